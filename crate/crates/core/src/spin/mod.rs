//! Collective spin of N two-level atoms in the symmetric (Dicke) subspace.
//!
//! Conventions used throughout:
//!
//! * basis index `k = 0..=N` holds the projection `m = k − N/2`; `k = N`
//!   (m = +N/2) is every atom in |2⟩, `k = 0` every atom in |1⟩;
//! * rotations are active and right-handed, `R(θ, n̂) = exp(−iθ n̂·S)`;
//! * polar angle 0 points along +S_z (all atoms in |2⟩), the azimuth is the
//!   relative phase between |1⟩ and |2⟩.

mod moments;
mod oat;
mod rotation;
mod squeezing;
mod state;
mod wigner;

pub use moments::{moments, SpinMoments};
pub use oat::{antisqueezed_tilt, calibrate_twist, optimal_twist, twist_squeezing, twisted_coherent_moments};
pub use rotation::{rotate, rotate_z, twist, RotationSpec};
pub use squeezing::{from_db, squeezing_wineland, to_db, SqueezingAnalysis};
pub(crate) use squeezing::transverse_frame;
pub use state::{coherent_state, measure_distribution, DickeState};
pub use wigner::{wigner, WignerKernel, MAX_WIGNER_ATOMS};


/// Matrix element ⟨m+1|S₊|m⟩ between basis indices `k` and `k+1`.
#[inline]
pub(crate) fn ladder(n_atoms: usize, k: usize) -> f64 {
    (((k + 1) * (n_atoms - k)) as f64).sqrt()
}
