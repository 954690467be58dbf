//! Volumes of unit balls and unit spheres in integer dimensions.

use std::f64::consts::PI;

/// Volume of the unit ball in `R^n` (`omega_n`); `omega_0 = 1`.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / n as f64 * unit_ball_volume(n - 2),
    }
}

/// Volume of the unit sphere `S^k` in `R^{k+1}`; `|S^k| = (k+1) omega_{k+1}`.
pub fn unit_sphere_area(k: usize) -> f64 {
    (k as f64 + 1.0) * unit_ball_volume(k + 1)
}
