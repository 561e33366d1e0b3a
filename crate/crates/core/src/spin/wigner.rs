use std::f64::consts::PI;

use super::{rotate, rotate_z, DickeState, RotationSpec};
use crate::error::{Error, Result};

/// Largest atom number accepted by [`wigner`].
pub const MAX_WIGNER_ATOMS: usize = 256;

/// Diagonal Wigner kernel for a given N.
///
/// In the frame where the evaluation point is the north pole only the q = 0
/// multipoles contribute, and the diagonal elements of T_k0 are the
/// orthonormal discrete (Gram) polynomials of degree k on m = −S…S. The
/// kernel is normalised so that W integrates to 1 over the unit sphere:
///
/// W(n̂) = Σ_m |⟨m|R⁻¹(n̂)|ψ⟩|² K_m,
/// K_m = √((N+1)/4π) Σ_k √((2k+1)/4π) t_k(m).
#[derive(Clone, Debug)]
pub struct WignerKernel {
    atom_count: usize,
    weights: Vec<f64>,
}

impl WignerKernel {
    pub fn new(atom_count: usize) -> Result<Self> {
        if atom_count == 0 {
            return Err(Error::invalid("atom count must be at least 1"));
        }
        if atom_count > MAX_WIGNER_ATOMS {
            return Err(Error::UnsupportedSize { size: atom_count, limit: MAX_WIGNER_ATOMS });
        }
        let points = atom_count + 1;
        let s = atom_count as f64 / 2.0;
        let mf = points as f64;
        let grid: Vec<f64> = (0..points).map(|k| k as f64 - s).collect();
        // Lanczos on diag(m) from the uniform vector, fully reorthogonalised:
        // the three-term recurrence alone loses orthogonality at high degree.
        let mut basis: Vec<Vec<f64>> = vec![vec![1.0 / mf.sqrt(); points]];
        let mut weights: Vec<f64> = basis[0].iter().map(|t| t * (1.0 / (4.0 * PI)).sqrt()).collect();
        for k in 0..atom_count {
            let mut next: Vec<f64> = (0..points).map(|i| grid[i] * basis[k][i]).collect();
            for _ in 0..2 {
                for v in &basis {
                    let d: f64 = v.iter().zip(&next).map(|(a, b)| a * b).sum();
                    next.iter_mut().zip(v).for_each(|(x, a)| *x -= d * a);
                }
            }
            let len = next.iter().map(|x| x * x).sum::<f64>().sqrt();
            next.iter_mut().for_each(|x| *x /= len);
            let ylm = ((2.0 * (k + 1) as f64 + 1.0) / (4.0 * PI)).sqrt();
            for (w, t) in weights.iter_mut().zip(&next) {
                *w += ylm * t;
            }
            basis.push(next);
        }
        let norm = (mf / (4.0 * PI)).sqrt();
        weights.iter_mut().for_each(|w| *w *= norm);
        Ok(Self { atom_count, weights })
    }

    pub fn atom_count(&self) -> usize {
        self.atom_count
    }

    /// W at (`polar`, `azimuth`).
    pub fn evaluate(&self, state: &DickeState, polar: f64, azimuth: f64) -> f64 {
        let aligned = rotate(&rotate_z(state, -azimuth), &RotationSpec::about_y(-polar));
        aligned
            .amplitudes()
            .iter()
            .zip(&self.weights)
            .map(|(a, w)| a.norm_sqr() * w)
            .sum()
    }
}

/// Spherical Wigner function at each (polar, azimuth) grid point.
pub fn wigner(state: &DickeState, grid: &[(f64, f64)]) -> Result<Vec<f64>> {
    let kernel = WignerKernel::new(state.atom_count())?;
    Ok(grid.iter().map(|&(th, ph)| kernel.evaluate(state, th, ph)).collect())
}
