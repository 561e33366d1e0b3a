use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{ladder, DickeState, RotationSpec};

/// First and symmetrised second moments of the collective spin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinMoments {
    pub atom_count: usize,
    /// ⟨S_x⟩, ⟨S_y⟩, ⟨S_z⟩.
    pub mean: [f64; 3],
    /// ½⟨{S_i, S_j}⟩ − ⟨S_i⟩⟨S_j⟩.
    pub covariance: [[f64; 3]; 3],
}

impl SpinMoments {
    /// Moments of the fully polarised state along ±z.
    pub fn polarized_z(atom_count: usize, up: bool) -> Self {
        let s = atom_count as f64 / 2.0;
        let mut covariance = [[0.0; 3]; 3];
        covariance[0][0] = s / 2.0;
        covariance[1][1] = s / 2.0;
        Self { atom_count, mean: [0.0, 0.0, if up { s } else { -s }], covariance }
    }

    pub fn spin(&self) -> f64 {
        self.atom_count as f64 / 2.0
    }

    pub fn mean_length(&self) -> f64 {
        norm3(&self.mean)
    }

    /// |⟨S⃗⟩|/(N/2).
    pub fn contrast(&self) -> f64 {
        self.mean_length() / self.spin()
    }

    /// ⟨n⟩ = 2⟨S_z⟩/N.
    pub fn expected_n(&self) -> f64 {
        self.mean[2] / self.spin()
    }

    /// Variance of û·S⃗ for a unit vector û.
    pub fn variance_along(&self, u: &[f64; 3]) -> f64 {
        let mut v = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                v += u[i] * self.covariance[i][j] * u[j];
            }
        }
        v
    }

    /// Moments after the state rotation `rot`: ⟨S⃗⟩ → R⟨S⃗⟩, Σ → RΣRᵀ.
    pub fn rotated(&self, rot: &RotationSpec) -> Self {
        self.transformed(&rot.matrix())
    }

    pub fn rotated_z(&self, angle: f64) -> Self {
        self.transformed(&RotationSpec::about_z(angle).matrix())
    }

    fn transformed(&self, r: &[[f64; 3]; 3]) -> Self {
        let mut mean = [0.0; 3];
        for i in 0..3 {
            mean[i] = (0..3).map(|j| r[i][j] * self.mean[j]).sum();
        }
        let mut tmp = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                tmp[i][j] = (0..3).map(|k| r[i][k] * self.covariance[k][j]).sum();
            }
        }
        let mut covariance = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                covariance[i][j] = (0..3).map(|k| tmp[i][k] * r[j][k]).sum();
            }
        }
        Self { atom_count: self.atom_count, mean, covariance }
    }

    /// Independent per-atom dephasing that keeps a fraction `retention` of
    /// every single-atom transverse coherence.
    ///
    /// For a permutation-symmetric state the transverse mean shrinks by
    /// `retention`, pair correlations between transverse components by
    /// `retention²` and transverse–longitudinal correlations by `retention`;
    /// the single-atom terms s_x² = s_y² = ¼ are untouched.
    pub fn dephased(&self, retention: f64) -> Self {
        let c = retention;
        let quarter_n = self.atom_count as f64 / 4.0;
        let mut out = self.clone();
        out.mean[0] *= c;
        out.mean[1] *= c;
        // raw symmetrised second moments
        let raw = |i: usize, j: usize| self.covariance[i][j] + self.mean[i] * self.mean[j];
        let mut second = [[0.0; 3]; 3];
        for i in 0..2 {
            for j in 0..2 {
                let diag = if i == j { quarter_n } else { 0.0 };
                second[i][j] = diag + c * c * (raw(i, j) - diag);
            }
            second[i][2] = c * raw(i, 2);
            second[2][i] = second[i][2];
        }
        second[2][2] = raw(2, 2);
        for i in 0..3 {
            for j in 0..3 {
                out.covariance[i][j] = second[i][j] - out.mean[i] * out.mean[j];
            }
        }
        out
    }
}

/// Exact moments from the state vector via the ladder-operator action.
pub fn moments(state: &DickeState) -> SpinMoments {
    let n = state.atom_count();
    let s = state.spin();
    let psi = state.amplitudes();
    let zero = C64::new(0.0, 0.0);
    let mut sx = vec![zero; n + 1];
    let mut sy = vec![zero; n + 1];
    let mut sz = vec![zero; n + 1];
    for k in 0..=n {
        sz[k] = psi[k] * (k as f64 - s);
        // S₊ψ at k gets ladder(k−1)ψ[k−1]; S₋ψ at k gets ladder(k)ψ[k+1]
        let plus = if k > 0 { psi[k - 1] * ladder(n, k - 1) } else { zero };
        let minus = if k < n { psi[k + 1] * ladder(n, k) } else { zero };
        sx[k] = (plus + minus) * 0.5;
        sy[k] = (plus - minus) * C64::new(0.0, -0.5);
    }
    let vecs = [&sx, &sy, &sz];
    let inner = |a: &[C64], b: &[C64]| a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<C64>();
    let mut mean = [0.0; 3];
    for i in 0..3 {
        mean[i] = inner(psi, vecs[i]).re;
    }
    let mut covariance = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in i..3 {
            let v = inner(vecs[i], vecs[j]).re - mean[i] * mean[j];
            covariance[i][j] = v;
            covariance[j][i] = v;
        }
    }
    SpinMoments { atom_count: n, mean, covariance }
}

pub(crate) fn norm3(v: &[f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}
