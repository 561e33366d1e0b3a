#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use scanprobe::spin::DickeState;

/// Dense S_x, S_y, S_z on the Dicke basis, index k ↔ m = k − N/2.
pub fn spin_matrices(n: usize) -> [DMatrix<C64>; 3] {
    let s = n as f64 / 2.0;
    let dim = n + 1;
    let mut plus = DMatrix::<C64>::zeros(dim, dim);
    for k in 0..n {
        let m = k as f64 - s;
        plus[(k + 1, k)] = C64::new((s * (s + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
    }
    let minus = plus.adjoint();
    let sx = (&plus + &minus) * C64::new(0.5, 0.0);
    let sy = (&plus - &minus) * C64::new(0.0, -0.5);
    let sz = DMatrix::from_fn(dim, dim, |i, j| if i == j { C64::new(i as f64 - s, 0.0) } else { C64::new(0.0, 0.0) });
    [sx, sy, sz]
}

/// exp(−i·θ·n̂·S) by dense matrix exponential.
pub fn dense_rotation(ops: &[DMatrix<C64>; 3], axis: [f64; 3], angle: f64) -> DMatrix<C64> {
    let len = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    let gen = &ops[0] * C64::new(axis[0] / len, 0.0) + &ops[1] * C64::new(axis[1] / len, 0.0) + &ops[2] * C64::new(axis[2] / len, 0.0);
    (gen * C64::new(0.0, -angle)).exp()
}

/// exp(−i·μ·S_z²) by dense matrix exponential.
pub fn dense_twist(ops: &[DMatrix<C64>; 3], mu: f64) -> DMatrix<C64> {
    (&ops[2] * &ops[2] * C64::new(0.0, -mu)).exp()
}

pub fn to_vector(state: &DickeState) -> DVector<C64> {
    DVector::from_column_slice(state.amplitudes())
}

pub fn max_diff(a: &DVector<C64>, b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn expectation(op: &DMatrix<C64>, v: &DVector<C64>) -> f64 {
    (v.adjoint() * op * v)[(0, 0)].re
}

/// Binomial pmf over k successes of n trials with probability p.
pub fn binomial_pmf(n: usize, p: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut ln_choose = 0.0f64;
    for k in 0..=n {
        if k > 0 {
            ln_choose += ((n - k + 1) as f64).ln() - (k as f64).ln();
        }
        let lp = if p == 0.0 {
            if k == 0 { 0.0 } else { f64::NEG_INFINITY }
        } else if p == 1.0 {
            if k == n { 0.0 } else { f64::NEG_INFINITY }
        } else {
            ln_choose + k as f64 * p.ln() + (n - k) as f64 * (1.0 - p).ln()
        };
        out.push(lp.exp());
    }
    out
}

pub fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    (m, x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0))
}
