use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::TableRow;
use crate::error::{invalid, Result};
use crate::geometry::unit_boundary_circle_radius;
use crate::oracles::{
    annulus_sn_eigenvalue, blowup_constant, cylinder_steklov_spectrum, expand_multiplicities,
    sphere_laplace_spectrum, sweep_separated_modes, SeparatedModeProblem, separated_mode_sn_eigenvalue,
};
use crate::spheres::{unit_ball_volume, unit_sphere_area};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticFit {
    pub k_lo: usize,
    pub k_hi: usize,
    pub fitted_exponent: f64,
    pub fitted_coefficient: f64,
    /// `1/(n-1)`.
    pub predicted_exponent: f64,
    /// `2 pi / (omega_{n-1} |Sigma|)^{1/(n-1)}`.
    pub predicted_coefficient: f64,
}

/// Least-squares fit of `log sigma_k = e log k + log c` over `k_lo..=k_hi`, where
/// `eigenvalues[k] = sigma_k`.
pub fn fit_asymptotics(eigenvalues: &[f64], n: usize, volume_sigma: f64, k_lo: usize, k_hi: usize) -> Result<AsymptoticFit> {
    if n < 2 {
        return invalid("n must be at least 2");
    }
    if k_lo < 5 || k_hi <= k_lo {
        return invalid(format!("need 5 <= k_lo < k_hi, got {k_lo}..{k_hi}"));
    }
    if k_hi >= eigenvalues.len() {
        return invalid(format!("k_hi = {k_hi} exceeds the {} available eigenvalues", eigenvalues.len()));
    }
    if let Some(k) = (k_lo..=k_hi).find(|&k| !(eigenvalues[k] > 0.0)) {
        return invalid(format!("sigma_{k} = {} is not positive", eigenvalues[k]));
    }
    let pts: Vec<(f64, f64)> = (k_lo..=k_hi).map(|k| ((k as f64).ln(), eigenvalues[k].ln())).collect();
    let np = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / np;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / np;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let e = 1.0 / (n as f64 - 1.0);
    Ok(AsymptoticFit {
        k_lo,
        k_hi,
        fitted_exponent: slope,
        fitted_coefficient: (my - slope * mx).exp(),
        predicted_exponent: e,
        predicted_coefficient: 2.0 * PI / (unit_ball_volume(n - 1) * volume_sigma).powf(e),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlowupOptions {
    pub max_degree: usize,
    pub max_circle_mode: usize,
    pub radial_resolution: usize,
}

impl Default for BlowupOptions {
    fn default() -> Self {
        BlowupOptions { max_degree: 12, max_circle_mode: 12, radial_resolution: 2000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupRow {
    pub epsilon: f64,
    pub delta: f64,
    pub circle_radius: f64,
    pub mode_minimum: f64,
    pub argmin: (usize, usize),
    pub c_hat: f64,
    pub c_hat_over_eps: f64,
    pub ratio: f64,
    pub satisfied: bool,
    pub tail_certified: bool,
    /// Radial solver at sphere degree 1, circle mode 0.
    pub first_mode_value: f64,
    pub first_mode_closed_form: f64,
    /// `(n-1)(2^n-1)/((n-1+2^n) eps)`.
    pub first_mode_bound: f64,
}

impl BlowupRow {
    pub fn table_row(&self) -> TableRow {
        TableRow {
            k: None,
            epsilon: Some(self.epsilon),
            value: self.mode_minimum,
            bound: self.c_hat_over_eps,
            satisfied: self.satisfied && self.tail_certified,
        }
    }
}

/// Mixed eigenvalue lower bounds on `A(eps, 2/eps) x S^1_R` with `|S^{n-1}_eps x S^1_R| = 1`.
pub fn blowup_experiment(n: usize, epsilons: &[f64], opts: &BlowupOptions) -> Result<Vec<BlowupRow>> {
    let c_hat = blowup_constant(n)?;
    if epsilons.is_empty() {
        return invalid("need at least one epsilon");
    }
    let nf = n as f64;
    let two_n = 2f64.powi(n as i32);
    epsilons
        .iter()
        .map(|&eps| {
            if !(eps > 0.0 && eps < 1.0) {
                return invalid(format!("epsilon must lie in (0, 1), got {eps}"));
            }
            let delta = 2.0 / eps;
            let r = unit_boundary_circle_radius(n, eps);
            let sweep = sweep_separated_modes(n, eps, delta, r, opts.max_degree, opts.max_circle_mode, opts.radial_resolution)?;
            let first_mode_value = separated_mode_sn_eigenvalue(&SeparatedModeProblem {
                n,
                eps,
                delta,
                mu: nf - 1.0,
                lambda: 0.0,
                radial_resolution: opts.radial_resolution,
            })?;
            let bound = c_hat / eps;
            Ok(BlowupRow {
                epsilon: eps,
                delta,
                circle_radius: r,
                mode_minimum: sweep.minimum,
                argmin: sweep.argmin,
                c_hat,
                c_hat_over_eps: bound,
                ratio: sweep.minimum / bound,
                satisfied: sweep.minimum >= bound,
                tail_certified: sweep.tail_certified,
                first_mode_value,
                first_mode_closed_form: annulus_sn_eigenvalue(n, eps, delta, 1)?,
                first_mode_bound: (nf - 1.0) * (two_n - 1.0) / ((nf - 1.0 + two_n) * eps),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObstructionRow {
    pub k: usize,
    pub lambda_k: f64,
    pub length: f64,
    pub volume_m: f64,
    pub sigma_2k: f64,
    /// `sqrt(lambda_k) tanh(1/2)`.
    pub lower_bound: f64,
    pub scaled: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstructionReport {
    pub n: usize,
    pub alpha: f64,
    pub beta: f64,
    pub tanh_half: f64,
    pub rows: Vec<ObstructionRow>,
    pub fitted_exponent: f64,
    /// `(1 + beta)/(n - 1)`.
    pub predicted_exponent: f64,
    pub fit_tolerance: f64,
    /// Whether the data grows at least as fast as predicted.
    pub consistent: bool,
    /// Whether `alpha (n-1) >= 1 + beta`, necessary for a bound of order `k^alpha`.
    pub alpha_admissible: bool,
}

impl ObstructionReport {
    pub fn table_rows(&self) -> Vec<TableRow> {
        self.rows
            .iter()
            .map(|r| TableRow {
                k: Some(r.k),
                epsilon: None,
                value: r.sigma_2k,
                bound: r.lower_bound,
                satisfied: r.sigma_2k >= r.lower_bound * (1.0 - 1e-12),
            })
            .collect()
    }
}

/// Cylinders `S^{n-1} x [0, L]` with `L = 1/sqrt(lambda_k)`: tracks `sigma_{2k}`
/// and fits the exponent of `sigma_{2k} |M|^{-beta}` in `k`.
pub fn obstruction_experiment(n: usize, alpha: f64, beta: f64, k_list: &[usize]) -> Result<ObstructionReport> {
    if n < 2 {
        return invalid("n must be at least 2");
    }
    if k_list.is_empty() || k_list.contains(&0) {
        return invalid("k list must be nonempty with k >= 1");
    }
    let kmax = *k_list.iter().max().unwrap();
    let mut degree = 2;
    let mut lambdas = expand_multiplicities(&sphere_laplace_spectrum(n, 1.0, degree)?);
    let fit_tolerance = 0.05;
    let mut rows = Vec::with_capacity(k_list.len());
    for &k in k_list {
        let row = loop {
            while lambdas.len() <= 4 * kmax + 8 {
                degree *= 2;
                lambdas = expand_multiplicities(&sphere_laplace_spectrum(n, 1.0, degree)?);
            }
            let lambda_k = lambdas[k];
            let length = 1.0 / lambda_k.sqrt();
            match cylinder_steklov_spectrum(&lambdas, length, 2 * k + 1) {
                Ok(spec) => {
                    let volume_m = unit_sphere_area(n - 1) * length;
                    let sigma_2k = spec[2 * k];
                    break ObstructionRow {
                        k,
                        lambda_k,
                        length,
                        volume_m,
                        sigma_2k,
                        lower_bound: lambda_k.sqrt() * 0.5f64.tanh(),
                        scaled: sigma_2k * volume_m.powf(-beta),
                    };
                }
                Err(crate::Error::TruncationNotCertified(_)) => {
                    degree *= 2;
                    lambdas = expand_multiplicities(&sphere_laplace_spectrum(n, 1.0, degree)?);
                }
                Err(e) => return Err(e),
            }
        };
        rows.push(row);
    }
    let fitted_exponent = if rows.len() >= 2 {
        let pts: Vec<(f64, f64)> = rows.iter().map(|r| ((r.k as f64).ln(), r.scaled.ln())).collect();
        let np = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / np;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / np;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    } else {
        f64::NAN
    };
    let predicted_exponent = (1.0 + beta) / (n as f64 - 1.0);
    Ok(ObstructionReport {
        n,
        alpha,
        beta,
        tanh_half: 0.5f64.tanh(),
        rows,
        fitted_exponent,
        predicted_exponent,
        fit_tolerance,
        consistent: fitted_exponent >= predicted_exponent - fit_tolerance,
        alpha_admissible: alpha * (n as f64 - 1.0) >= 1.0 + beta,
    })
}
