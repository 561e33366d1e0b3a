use super::{from_db, SpinMoments};
use crate::error::{Error, Result};

/// Moments of a coherent state along +x after the twist exp(−iμS_z²), in
/// closed form. Valid for any N ≥ 1.
pub fn twisted_coherent_moments(atom_count: usize, mu: f64) -> SpinMoments {
    let s = atom_count as f64 / 2.0;
    let a = 1.0 - pow_cos(2.0 * mu, 2.0 * s - 2.0);
    let b = 4.0 * mu.sin() * pow_cos(mu, 2.0 * s - 2.0);
    let k = 0.25 * s * (2.0 * s - 1.0);
    let mut covariance = [[0.0; 3]; 3];
    covariance[1][1] = 0.5 * s + k * a;
    covariance[2][2] = 0.5 * s;
    covariance[1][2] = 0.5 * k * b;
    covariance[2][1] = 0.5 * k * b;
    let x2 = 0.5 * (k * 2.0 * pow_cos(2.0 * mu, 2.0 * s - 2.0) + s * s + 0.5 * s);
    let mean_x = s * pow_cos(mu, 2.0 * s - 1.0);
    covariance[0][0] = x2 - mean_x * mean_x;
    let mean = [mean_x, 0.0, 0.0];
    SpinMoments { atom_count, mean, covariance }
}

fn pow_cos(x: f64, p: f64) -> f64 {
    if p == 0.0 {
        1.0
    } else {
        x.cos().powf(p)
    }
}

/// Wineland ξ² of the twisted coherent state.
pub fn twist_squeezing(atom_count: usize, mu: f64) -> f64 {
    let m = twisted_coherent_moments(atom_count, mu);
    let (a, b, c) = (m.covariance[1][1], m.covariance[2][2], m.covariance[1][2]);
    let min = 0.5 * (a + b) - (0.25 * (a - b) * (a - b) + c * c).sqrt();
    atom_count as f64 * min / (m.mean[0] * m.mean[0])
}

/// Angle β of the anti-squeezed axis above the equator (from +y toward
/// +z) for the twisted coherent state. A rotation by −β about x puts it on
/// the equator.
pub fn antisqueezed_tilt(atom_count: usize, mu: f64) -> f64 {
    let m = twisted_coherent_moments(atom_count, mu);
    let (a, b, c) = (m.covariance[1][1], m.covariance[2][2], m.covariance[1][2]);
    0.5 * (2.0 * c).atan2(a - b)
}

/// Twist strength minimising ξ² for N atoms.
pub fn optimal_twist(atom_count: usize) -> Result<f64> {
    if atom_count < 2 {
        return Err(Error::invalid("squeezing needs at least 2 atoms"));
    }
    // coarse log scan, then golden section around the best bracket
    let grid: Vec<f64> = (0..=400).map(|i| 10f64.powf(-6.0 + 5.5 * i as f64 / 400.0)).collect();
    let values: Vec<f64> = grid.iter().map(|&mu| twist_squeezing(atom_count, mu)).collect();
    let best = (0..grid.len()).min_by(|&i, &j| values[i].total_cmp(&values[j])).unwrap_or(0);
    let mut lo = grid[best.saturating_sub(1)];
    let mut hi = grid[(best + 1).min(grid.len() - 1)];
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..200 {
        let x1 = hi - g * (hi - lo);
        let x2 = lo + g * (hi - lo);
        if twist_squeezing(atom_count, x1) < twist_squeezing(atom_count, x2) {
            hi = x2;
        } else {
            lo = x1;
        }
        if hi - lo < 1e-15 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Smallest μ with ξ²(μ) equal to `target_db`. A target of 0 dB gives 0.
pub fn calibrate_twist(atom_count: usize, target_db: f64) -> Result<f64> {
    if !target_db.is_finite() || target_db > 0.0 {
        return Err(Error::invalid("target squeezing must be a finite value ≤ 0 dB"));
    }
    if target_db == 0.0 {
        return Ok(0.0);
    }
    let target = from_db(target_db);
    let mut hi = optimal_twist(atom_count)?;
    if twist_squeezing(atom_count, hi) > target {
        return Err(Error::Conditioning(format!(
            "{target_db} dB is below the best reachable squeezing for {atom_count} atoms"
        )));
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if twist_squeezing(atom_count, mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-16 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::{coherent_state, moments, squeezing_wineland, to_db, twist};
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn closed_form_matches_state() {
        for &(n, mu) in &[(2usize, 0.3), (9, 0.05), (40, 0.02), (120, 0.011)] {
            let psi = twist(&coherent_state(n, FRAC_PI_2, 0.0).unwrap(), mu);
            let exact = moments(&psi);
            let closed = twisted_coherent_moments(n, mu);
            for i in 0..3 {
                assert!((exact.mean[i] - closed.mean[i]).abs() < 1e-9, "n={n} mean {i}");
                for j in 0..3 {
                    assert!(
                        (exact.covariance[i][j] - closed.covariance[i][j]).abs() < 1e-8,
                        "n={n} cov {i}{j}: {} vs {}",
                        exact.covariance[i][j],
                        closed.covariance[i][j]
                    );
                }
            }
            let xi = squeezing_wineland(&exact).unwrap().xi2;
            assert!((xi - twist_squeezing(n, mu)).abs() < 1e-9);
        }
    }

    #[test]
    fn calibration_hits_target() {
        let mu = calibrate_twist(1400, -4.3).unwrap();
        assert!((to_db(twist_squeezing(1400, mu)) + 4.3).abs() < 1e-9);
        assert!(mu > 1e-4 && mu < 3e-3, "{mu}");
        assert_eq!(calibrate_twist(1400, 0.0).unwrap(), 0.0);
        assert!(calibrate_twist(10, -30.0).is_err());
    }

    #[test]
    fn tilt_is_in_first_quadrant() {
        let beta = antisqueezed_tilt(1400, calibrate_twist(1400, -4.3).unwrap());
        assert!(beta > 0.0 && beta < FRAC_PI_2);
    }
}
