use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use serde::{Deserialize, Serialize};

use super::field::{norm, ChipGeometry};
use super::{biot_savart, ChipConfig};
use crate::constants::{BOHR_MAGNETON, GF_MF_TRAPPED, RB87_MASS};
use crate::error::{Error, Result};

/// Finite-difference step for gradients and Hessians, m.
const FD_STEP_M: f64 = 1e-8;
const MAX_ITERATIONS: usize = 200;
/// Largest single Newton step, m.
const MAX_STEP_M: f64 = 5e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrapSolution {
    pub position_m: [f64; 3],
    pub bottom_field_t: f64,
    /// Frequencies of the principal axes closest to x, y and z, Hz.
    pub frequencies_hz: [f64; 3],
    /// Ascending principal frequencies, Hz, with their unit axes.
    pub principal_frequencies_hz: [f64; 3],
    pub principal_axes: [[f64; 3]; 3],
    pub iterations: usize,
}

impl TrapSolution {
    /// Atom–surface distance for a chip surface at z = 0.
    pub fn surface_distance_m(&self) -> f64 {
        self.position_m[2]
    }
}

fn field_magnitude(geom: &ChipGeometry, p: &[f64; 3]) -> Result<f64> {
    Ok(norm(&biot_savart(geom, p)?))
}

fn offset(p: &[f64; 3], i: usize, h: f64) -> [f64; 3] {
    let mut q = *p;
    q[i] += h;
    q
}

fn gradient(geom: &ChipGeometry, p: &[f64; 3]) -> Result<Vector3<f64>> {
    let h = FD_STEP_M;
    let mut g = Vector3::zeros();
    for i in 0..3 {
        g[i] = (field_magnitude(geom, &offset(p, i, h))? - field_magnitude(geom, &offset(p, i, -h))?) / (2.0 * h);
    }
    Ok(g)
}

fn hessian(geom: &ChipGeometry, p: &[f64; 3]) -> Result<Matrix3<f64>> {
    let h = FD_STEP_M;
    let f0 = field_magnitude(geom, p)?;
    let mut m = Matrix3::zeros();
    for i in 0..3 {
        let fp = field_magnitude(geom, &offset(p, i, h))?;
        let fm = field_magnitude(geom, &offset(p, i, -h))?;
        m[(i, i)] = (fp - 2.0 * f0 + fm) / (h * h);
        for j in 0..i {
            let f = |si: f64, sj: f64| field_magnitude(geom, &offset(&offset(p, i, si * h), j, sj * h));
            let v = (f(1.0, 1.0)? - f(1.0, -1.0)? - f(-1.0, 1.0)? + f(-1.0, -1.0)?) / (4.0 * h * h);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    Ok(m)
}

/// Local minimum of |B| near `guess` by damped Newton iteration with
/// backtracking, plus harmonic frequencies of the trapped state.
pub fn find_trap(geom: &ChipGeometry, guess: [f64; 3]) -> Result<TrapSolution> {
    geom.validate()?;
    let mut p = guess;
    let mut trace = vec![p];
    let fail = |reason: String, iterations: usize, trace: Vec<[f64; 3]>| Error::SearchFailure { reason, iterations, trace };
    let mut f = field_magnitude(geom, &p).map_err(|e| fail(e.to_string(), 0, trace.clone()))?;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let g = gradient(geom, &p).map_err(|e| fail(e.to_string(), iterations, trace.clone()))?;
        if g.norm() <= 1e-4 * f {
            converged = true;
            break;
        }
        let h = hessian(geom, &p).map_err(|e| fail(e.to_string(), iterations, trace.clone()))?;
        let mut step = match h.cholesky() {
            Some(c) => -c.solve(&g),
            None => -g * (1e-6 / g.norm()),
        };
        if step.norm() > MAX_STEP_M {
            step *= MAX_STEP_M / step.norm();
        }
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let q = [p[0] + alpha * step[0], p[1] + alpha * step[1], p[2] + alpha * step[2]];
            if let Ok(fq) = field_magnitude(geom, &q) {
                if fq <= f {
                    p = q;
                    f = fq;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        trace.push(p);
        if !accepted || alpha * step.norm() < 1e-13 {
            converged = g.norm() <= 1e-2 * f;
            break;
        }
    }
    if !converged {
        return Err(fail("no convergence".into(), iterations, trace));
    }
    let h = hessian(geom, &p).map_err(|e| fail(e.to_string(), iterations, trace.clone()))?;
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    if eig.eigenvalues[order[0]] <= 0.0 {
        return Err(fail("Hessian of |B| is not positive definite".into(), iterations, trace));
    }
    let freq = |lambda: f64| (GF_MF_TRAPPED * BOHR_MAGNETON * lambda / RB87_MASS).sqrt() / std::f64::consts::TAU;
    let mut principal_frequencies_hz = [0.0; 3];
    let mut principal_axes = [[0.0; 3]; 3];
    let mut frequencies_hz = [f64::NAN; 3];
    for (slot, &k) in order.iter().enumerate() {
        let v = eig.eigenvectors.column(k);
        principal_frequencies_hz[slot] = freq(eig.eigenvalues[k]);
        principal_axes[slot] = [v[0], v[1], v[2]];
        let axis = (0..3).max_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs())).unwrap_or(0);
        frequencies_hz[axis] = principal_frequencies_hz[slot];
    }
    if frequencies_hz.iter().any(|f| f.is_nan()) {
        frequencies_hz = principal_frequencies_hz;
    }
    Ok(TrapSolution { position_m: p, bottom_field_t: f, frequencies_hz, principal_frequencies_hz, principal_axes, iterations })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub eta: f64,
    pub trap: TrapSolution,
}

/// Trap positions along an η ramp with `steps` evenly spaced points,
/// each search seeded from the previous minimum.
pub fn transport_trajectory(cfg: &ChipConfig, eta_from: f64, eta_to: f64, steps: usize) -> Result<Vec<TrajectoryPoint>> {
    if steps < 2 {
        return Err(Error::invalid("a trajectory needs at least 2 steps"));
    }
    cfg.trap_config(eta_from)?;
    cfg.trap_config(eta_to)?;
    let mut out: Vec<TrajectoryPoint> = Vec::with_capacity(steps);
    let mut guess = cfg.trap_guess(eta_from);
    for i in 0..steps {
        let eta = eta_from + (eta_to - eta_from) * i as f64 / (steps - 1) as f64;
        if let Some(prev) = out.last() {
            let scale = eta / prev.eta;
            let q = prev.trap.position_m;
            guess = [q[0] * scale, q[1] * scale, q[2] * scale];
        }
        let lost = |reason: String| Error::Trajectory { eta, reason };
        let trap = find_trap(&cfg.geometry(eta)?, guess).map_err(|e| lost(e.to_string()))?;
        if trap.position_m[2] <= 0.0 {
            return Err(lost("minimum reached the chip surface".into()));
        }
        if let Some(prev) = out.last() {
            let jump = norm(&[
                trap.position_m[0] - guess[0],
                trap.position_m[1] - guess[1],
                trap.position_m[2] - guess[2],
            ]);
            if jump > 2e-6 + 0.25 * prev.trap.position_m[2] {
                return Err(lost(format!("minimum jumped by {:.2} µm", jump * 1e6)));
            }
        }
        out.push(TrajectoryPoint { eta, trap });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::{WireRole, WireSegment};
    use super::*;
    use crate::constants::{GAUSS, MU0};
    use std::f64::consts::PI;

    const HALF: f64 = 0.4e-3;
    const CAP_X: f64 = 0.3e-3;
    const CAP_I: f64 = 0.05;
    const CAP_L: f64 = 5e-3;

    // A finite wire along x plus two end-cap wires along y that add only B_x
    // on the axis, so the radial balance is that of the bare wire.
    fn ioffe(il: f64, by: f64) -> ChipGeometry {
        let seg = |start_m, end_m, current_a| WireSegment { start_m, end_m, current_a, role: WireRole::Dc, phase_rad: 0.0 };
        ChipGeometry {
            segments: vec![
                seg([-HALF, 0.0, 0.0], [HALF, 0.0, 0.0], il),
                seg([-CAP_X, -CAP_L, 0.0], [-CAP_X, CAP_L, 0.0], CAP_I),
                seg([CAP_X, -CAP_L, 0.0], [CAP_X, CAP_L, 0.0], CAP_I),
            ],
            bias_t: [3.2 * GAUSS, by, 0.0],
        }
    }

    #[test]
    fn long_wire_trap_distance() {
        let g = ioffe(0.130, 5.2 * GAUSS);
        let t = find_trap(&g, [0.0, 2e-6, 45e-6]).unwrap();
        let d = MU0 * 0.130 / (2.0 * PI * 5.2 * GAUSS);
        assert!((d - 50e-6).abs() < 1e-9);
        // on the axis: B_x = B_x0 + cap(z) and B_y = B_y0 - μ0 I / (2π z) · L / sqrt(L² + z²)
        let cap = |z: f64| {
            let r2 = CAP_X * CAP_X + z * z;
            MU0 / (2.0 * PI) * CAP_I * 2.0 * z / r2 * CAP_L / (CAP_L * CAP_L + r2).sqrt()
        };
        let bw = |z: f64| MU0 * 0.130 / (2.0 * PI * z) * HALF / (HALF * HALF + z * z).sqrt();
        let b = |z: f64| (3.2 * GAUSS + cap(z)).hypot(5.2 * GAUSS - bw(z));
        let (mut lo, mut hi) = (40e-6, 60e-6);
        for _ in 0..200 {
            let (m1, m2) = (lo + (hi - lo) / 3.0, hi - (hi - lo) / 3.0);
            if b(m1) < b(m2) { hi = m2 } else { lo = m1 }
        }
        assert!((t.position_m[2] - lo).abs() < 1e-9, "{:?} vs {lo}", t.position_m);
        assert!(t.position_m[0].abs() < 1e-9 && t.position_m[1].abs() < 1e-9);
        assert!((t.position_m[2] - d).abs() / d < 0.03);
        assert!((t.bottom_field_t - b(lo)).abs() < 1e-12);
        assert!(t.frequencies_hz[0] > 1.0);
        assert!(t.frequencies_hz[1] > 400.0 && t.frequencies_hz[2] > 400.0);
    }

    #[test]
    fn no_minimum_is_a_search_failure() {
        let g = ChipGeometry { segments: vec![], bias_t: [0.0, 0.0, 0.0] };
        let g = ChipGeometry { bias_t: [1e-4, 0.0, 0.0], ..g };
        match find_trap(&g, [0.0; 3]) {
            Err(Error::SearchFailure { trace, .. }) => assert!(!trace.is_empty()),
            other => panic!("{other:?}"),
        }
    }
}
