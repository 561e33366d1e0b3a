//! Physical constants (SI) and the atomic parameters of the ⁸⁷Rb state pair
//! |1⟩ = |F=1, m_F=−1⟩, |2⟩ = |F=2, m_F=1⟩.

/// Vacuum permeability, T·m/A.
pub const MU0: f64 = 1.256_637_062_12e-6;
/// μ₀/4π, T·m/A.
pub const MU0_OVER_4PI: f64 = MU0 / (4.0 * std::f64::consts::PI);
/// Bohr magneton, J/T.
pub const BOHR_MAGNETON: f64 = 9.274_010_078_3e-24;
/// Planck constant, J·s.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// μ_B/h in Hz/T (1.399625 MHz/G).
pub const BOHR_MAGNETON_HZ_PER_T: f64 = 1.399_625e10;
/// Atomic mass of ⁸⁷Rb, kg.
pub const RB87_MASS: f64 = 1.443_160_648e-25;
/// g_F·m_F of the trapped state |F=2, m_F=1⟩.
pub const GF_MF_TRAPPED: f64 = 0.5;

/// One Gauss in Tesla.
pub const GAUSS: f64 = 1e-4;

/// Differential ac-Zeeman coefficients, Hz/G², for the (π, σ⁺, σ⁻)
/// components of the microwave amplitude at 12 MHz blue detuning.
pub const ACZ_PI_HZ_PER_G2: f64 = 71e3;
pub const ACZ_SIGMA_PLUS_HZ_PER_G2: f64 = 46e3;
pub const ACZ_SIGMA_MINUS_HZ_PER_G2: f64 = 39e3;

/// Static field at which the |1⟩–|2⟩ differential Zeeman shift vanishes to
/// first order, T.
pub const MAGIC_FIELD_T: f64 = 3.23 * GAUSS;

/// Peak/rms ratio used to convert configured rms microwave currents into the
/// phasor amplitudes the ac-Zeeman coefficients refer to.
pub const MW_RMS_TO_PEAK: f64 = std::f64::consts::SQRT_2;
