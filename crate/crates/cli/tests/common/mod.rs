#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64 as C64;

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
    let gen = &ops[0] * C64::new(axis[0] / len, 0.0)
        + &ops[1] * C64::new(axis[1] / len, 0.0)
        + &ops[2] * C64::new(axis[2] / len, 0.0);
    (gen * C64::new(0.0, -angle)).exp()
}

/// exp(−i·μ·S_z²) by dense matrix exponential.
pub fn dense_twist(ops: &[DMatrix<C64>; 3], mu: f64) -> DMatrix<C64> {
    (&ops[2] * &ops[2] * C64::new(0.0, -mu)).exp()
}

pub fn all_down(n: usize) -> DVector<C64> {
    let mut v = DVector::<C64>::zeros(n + 1);
    v[0] = C64::new(1.0, 0.0);
    v
}

fn expect(op: &DMatrix<C64>, v: &DVector<C64>) -> f64 {
    (v.adjoint() * op * v)[(0, 0)].re
}

/// Wineland ξ² from dense operators: N·min transverse variance / |⟨S⟩|².
pub fn dense_xi2(ops: &[DMatrix<C64>; 3], v: &DVector<C64>) -> f64 {
    let n = (v.len() - 1) as f64;
    let mean: Vec<f64> = ops.iter().map(|o| expect(o, v)).collect();
    let len = mean.iter().map(|x| x * x).sum::<f64>().sqrt();
    let u: Vec<f64> = mean.iter().map(|x| x / len).collect();
    // any two unit vectors orthogonal to u
    let helper = if u[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let dot = helper.iter().zip(&u).map(|(a, b)| a * b).sum::<f64>();
    let mut e1: Vec<f64> = helper.iter().zip(&u).map(|(h, x)| h - dot * x).collect();
    let l1 = e1.iter().map(|x| x * x).sum::<f64>().sqrt();
    e1.iter_mut().for_each(|x| *x /= l1);
    let e2 = vec![u[1] * e1[2] - u[2] * e1[1], u[2] * e1[0] - u[0] * e1[2], u[0] * e1[1] - u[1] * e1[0]];
    let along = |e: &[f64]| &ops[0] * C64::new(e[0], 0.0) + &ops[1] * C64::new(e[1], 0.0) + &ops[2] * C64::new(e[2], 0.0);
    let (a, b) = (along(&e1), along(&e2));
    let (ma, mb) = (expect(&a, v), expect(&b, v));
    let aa = expect(&(&a * &a), v) - ma * ma;
    let bb = expect(&(&b * &b), v) - mb * mb;
    let ab = 0.5 * expect(&(&a * &b + &b * &a), v) - ma * mb;
    let min = Matrix2::new(aa, ab, ab, bb).symmetric_eigenvalues().min();
    n * min / (len * len)
}
