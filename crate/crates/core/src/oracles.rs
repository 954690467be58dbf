//! Closed-form and one-dimensional reference spectra.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::spheres::unit_ball_volume;

/// Mixed Steklov-Neumann eigenvalue of the annulus `eps < |x| < delta` in `R^n`
/// (Steklov inside, Neumann outside) for spherical-harmonic degree `k`.
pub fn annulus_sn_eigenvalue(n: usize, eps: f64, delta: f64, k: usize) -> Result<f64> {
    if n < 2 {
        return invalid("annulus needs n >= 2");
    }
    if !(eps > 0.0 && eps < delta) {
        return invalid(format!("need 0 < eps < delta, got eps={eps}, delta={delta}"));
    }
    if k == 0 {
        return Ok(0.0);
    }
    let (nf, kf) = (n as f64, k as f64);
    let big = (delta / eps).powf(2.0 * kf - 2.0 + nf);
    // Numerator and denominator divided through by eps^(k-1) (delta/eps)^(2k-2+n).
    let num = kf - kf / big;
    let den = eps / big + kf / (kf - 2.0 + nf) * eps;
    Ok(num / den)
}

/// Laplace eigenvalues `k(k+n-2)/radius^2` of the sphere `S^{n-1}` of the given
/// radius in `R^n`, with multiplicities, for degrees `0..=max_degree`.
pub fn sphere_laplace_spectrum(n: usize, radius: f64, max_degree: usize) -> Result<Vec<(f64, usize)>> {
    if n < 2 {
        return invalid("sphere spectrum needs n >= 2");
    }
    if !(radius > 0.0) {
        return invalid("radius must be positive");
    }
    let binom = |a: i64, b: i64| -> f64 {
        if a < b || b < 0 || a < 0 {
            return 0.0;
        }
        (0..b).map(|i| (a - i) as f64 / (i + 1) as f64).product()
    };
    Ok((0..=max_degree)
        .map(|k| {
            let (ki, ni) = (k as i64, n as i64);
            let mult = binom(ki + ni - 1, ni - 1) - binom(ki + ni - 3, ni - 1);
            let value = (k * (k + n - 2)) as f64 / (radius * radius);
            (value, mult.round() as usize)
        })
        .collect())
}

/// Flattens `(value, multiplicity)` pairs into a list.
pub fn expand_multiplicities(pairs: &[(f64, usize)]) -> Vec<f64> {
    pairs.iter().flat_map(|&(v, m)| std::iter::repeat_n(v, m)).collect()
}

/// The `count` smallest Steklov eigenvalues of `Sigma x [0, L]`, given the Laplace
/// eigenvalues of `Sigma` (with multiplicity, `lambdas[0] = 0`). Fails unless the
/// truncation provably contains all of them.
pub fn cylinder_steklov_spectrum(lambdas: &[f64], length: f64, count: usize) -> Result<Vec<f64>> {
    if count == 0 {
        return invalid("count must be at least 1");
    }
    if !(length > 0.0) {
        return invalid("length must be positive");
    }
    if lambdas.first() != Some(&0.0) {
        return invalid("the Laplace spectrum must start with lambda_0 = 0");
    }
    if lambdas.windows(2).any(|w| w[1] < w[0]) {
        return invalid("Laplace eigenvalues must be nondecreasing");
    }
    let mut vals = vec![0.0, 2.0 / length];
    for &lam in &lambdas[1..] {
        let s = lam.sqrt();
        let x = s * length / 2.0;
        vals.push(s * x.tanh());
        vals.push(s / x.tanh());
    }
    vals.sort_by(f64::total_cmp);
    let last = *lambdas.last().unwrap();
    let threshold = last.sqrt() * (last.sqrt() * length / 2.0).tanh();
    if vals.len() < count || vals[count - 1] > threshold {
        return Err(Error::TruncationNotCertified(format!(
            "{} Laplace eigenvalues (largest {last}) do not determine the first {count} Steklov eigenvalues",
            lambdas.len()
        )));
    }
    vals.truncate(count);
    Ok(vals)
}

/// Closed-form Steklov spectrum of `S^{n-1}_radius x [0, L]`, extending the sphere
/// spectrum until the truncation is certified.
pub fn sphere_cylinder_spectrum(n: usize, radius: f64, length: f64, count: usize) -> Result<Vec<f64>> {
    let mut degree = 4;
    loop {
        let lambdas = expand_multiplicities(&sphere_laplace_spectrum(n, radius, degree)?);
        match cylinder_steklov_spectrum(&lambdas, length, count) {
            Err(Error::TruncationNotCertified(_)) if degree < 1 << 20 => degree *= 2,
            other => return other,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparatedModeProblem {
    pub n: usize,
    pub eps: f64,
    pub delta: f64,
    /// Sphere-harmonic eigenvalue `k(k+n-2)`.
    pub mu: f64,
    /// Circle eigenvalue `j^2/R^2`.
    pub lambda: f64,
    pub radial_resolution: usize,
}

impl SeparatedModeProblem {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return invalid("separated modes need n >= 2");
        }
        if !(self.eps > 0.0 && self.eps < self.delta && self.delta.is_finite()) {
            return invalid("need 0 < eps < delta");
        }
        if !(self.mu >= 0.0 && self.lambda >= 0.0) {
            return invalid("mode eigenvalues must be nonnegative");
        }
        if self.radial_resolution < 16 {
            return invalid("radial resolution must be at least 16");
        }
        Ok(())
    }
}

/// Nodes of a grid on `[a, b]` with `n` intervals, geometric with the first
/// interval at most `first_max` (uniform when that already holds).
fn graded_grid(a: f64, b: f64, n: usize, first_max: f64) -> Vec<f64> {
    let len = b - a;
    if len / n as f64 <= first_max {
        return (0..=n).map(|i| a + len * i as f64 / n as f64).collect();
    }
    let first = |q: f64| len * (q - 1.0) / (q.powi(n as i32) - 1.0);
    let (mut lo, mut hi) = (1.0 + 1e-12, 2.0);
    while first(hi) > first_max {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if first(mid) > first_max {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let q = hi;
    let h0 = first(q);
    let mut nodes = Vec::with_capacity(n + 1);
    let mut x = a;
    let mut h = h0;
    nodes.push(a);
    for _ in 0..n {
        x += h;
        h *= q;
        nodes.push(x);
    }
    nodes[n] = b;
    nodes
}

/// The radial mixed Steklov-Neumann eigenvalue for one separated mode, by
/// piecewise-linear elements on a grid graded towards `eps`.
pub fn separated_mode_sn_eigenvalue(p: &SeparatedModeProblem) -> Result<f64> {
    p.validate()?;
    if p.mu == 0.0 && p.lambda == 0.0 {
        return Ok(0.0);
    }
    let nodes = graded_grid(p.eps, p.delta, p.radial_resolution, p.eps / 16.0);
    let m = nodes.len();
    let np = p.n as f64;
    // 3-point Gauss-Legendre on [0, 1]
    let gx = [0.5 - 0.5 * (0.6f64).sqrt(), 0.5, 0.5 + 0.5 * (0.6f64).sqrt()];
    let gw = [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0];
    let mut diag = vec![0.0; m];
    let mut off = vec![0.0; m - 1];
    for e in 0..m - 1 {
        let (x0, x1) = (nodes[e], nodes[e + 1]);
        let h = x1 - x0;
        let (mut k_stiff, mut m00, mut m01, mut m11) = (0.0, 0.0, 0.0, 0.0);
        for q in 0..3 {
            let t = gx[q];
            let r = x0 + t * h;
            let w = gw[q] * h;
            k_stiff += w * r.powf(np - 1.0) / (h * h);
            let pot = p.lambda * r.powf(np - 1.0) + p.mu * r.powf(np - 3.0);
            let (f0, f1) = (1.0 - t, t);
            m00 += w * pot * f0 * f0;
            m01 += w * pot * f0 * f1;
            m11 += w * pot * f1 * f1;
        }
        diag[e] += k_stiff + m00;
        diag[e + 1] += k_stiff + m11;
        off[e] += -k_stiff + m01;
    }
    // Schur complement onto node 0 through a tridiagonal solve of the remainder.
    let size = m - 1;
    let mut c = vec![0.0; size];
    let mut d = vec![0.0; size];
    let rhs0 = 1.0;
    for i in 0..size {
        let a_ii = diag[i + 1];
        let sub = if i > 0 { off[i] } else { 0.0 };
        let denom = a_ii - if i > 0 { sub * c[i - 1] } else { 0.0 };
        if !(denom > 0.0) {
            return Err(Error::Factorization("radial system is not positive definite".into()));
        }
        let sup = if i + 1 < size { off[i + 1] } else { 0.0 };
        c[i] = sup / denom;
        let r = if i == 0 { rhs0 } else { 0.0 };
        d[i] = (r - if i > 0 { sub * d[i - 1] } else { 0.0 }) / denom;
    }
    let mut y = vec![0.0; size];
    for i in (0..size).rev() {
        y[i] = d[i] - if i + 1 < size { c[i] * y[i + 1] } else { 0.0 };
    }
    let schur = diag[0] - off[0] * off[0] * y[0];
    Ok(schur / p.eps.powf(np - 1.0))
}

/// `min{1/4, (2^{n-2}-1)(n-1)/(4(n-2)), n pi^2 omega_n^2 (2^n-1)/4, (n-1)(2^n-1)/(n-1+2^n)}`.
pub fn blowup_constant(n: usize) -> Result<f64> {
    if n < 3 {
        return invalid("the blow-up constant is defined for n >= 3");
    }
    let nf = n as f64;
    let two_n = 2f64.powi(n as i32);
    let w = unit_ball_volume(n);
    let terms = [
        0.25,
        (2f64.powi(n as i32 - 2) - 1.0) * (nf - 1.0) / (4.0 * (nf - 2.0)),
        nf * std::f64::consts::PI.powi(2) * w * w * (two_n - 1.0) / 4.0,
        (nf - 1.0) * (two_n - 1.0) / (nf - 1.0 + two_n),
    ];
    Ok(terms.iter().copied().fold(f64::INFINITY, f64::min))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeValue {
    pub degree: usize,
    pub circle_mode: usize,
    pub mu: f64,
    pub lambda: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSweep {
    pub values: Vec<ModeValue>,
    /// Minimum over all swept modes other than `(0, 0)`.
    pub minimum: f64,
    pub argmin: (usize, usize),
    /// Whether the minimum provably bounds every unswept mode: separated values
    /// increase with both `mu` and `lambda`, so the modes `(1, 0)` and `(0, 1)`
    /// bound everything else.
    pub tail_certified: bool,
}

/// Sweeps separated modes of `A(eps, delta) x S^1_R` for sphere degrees
/// `0..=max_degree` and circle modes `0..=max_circle_mode`.
pub fn sweep_separated_modes(
    n: usize,
    eps: f64,
    delta: f64,
    circle_radius: f64,
    max_degree: usize,
    max_circle_mode: usize,
    radial_resolution: usize,
) -> Result<ModeSweep> {
    if max_degree < 1 || max_circle_mode < 1 {
        return invalid("the sweep must include degree 1 and circle mode 1");
    }
    if !(circle_radius > 0.0) {
        return invalid("circle radius must be positive");
    }
    let mut values = Vec::new();
    for k in 0..=max_degree {
        for j in 0..=max_circle_mode {
            if k == 0 && j == 0 {
                continue;
            }
            let mu = (k * (k + n - 2)) as f64;
            let lambda = (j * j) as f64 / (circle_radius * circle_radius);
            let value = separated_mode_sn_eigenvalue(&SeparatedModeProblem {
                n,
                eps,
                delta,
                mu,
                lambda,
                radial_resolution,
            })?;
            values.push(ModeValue { degree: k, circle_mode: j, mu, lambda, value });
        }
    }
    let best = values.iter().min_by(|a, b| a.value.total_cmp(&b.value)).unwrap();
    let minimum = best.value;
    let argmin = (best.degree, best.circle_mode);
    let corner = |k: usize, j: usize| values.iter().find(|v| v.degree == k && v.circle_mode == j).unwrap().value;
    let tail_certified = corner(1, 0).min(corner(0, 1)) >= minimum;
    Ok(ModeSweep { values, minimum, argmin, tail_certified })
}
