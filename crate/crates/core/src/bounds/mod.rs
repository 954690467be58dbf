//! Explicit upper bounds for Steklov eigenvalues in terms of intersection indices,
//! their constants, and the experiment drivers built on the oracles.

mod experiments;

pub use experiments::{
    blowup_experiment, fit_asymptotics, obstruction_experiment, AsymptoticFit, BlowupOptions, BlowupRow,
    ObstructionReport, ObstructionRow,
};

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::spheres::unit_sphere_area;

/// The ambient covering constant `32^m`.
pub fn ambient_covering_constant(m: usize) -> f64 {
    32f64.powi(m as i32)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantsConfig {
    /// Covering constant `C(m)`.
    pub c_cover: f64,
    /// Isoperimetric constant for small balls; no closed form is known, so it is a
    /// configuration value (default 1).
    pub d_n: f64,
    /// Whether `c_cover` was measured on a mesh rather than set to `32^m`.
    pub empirical: bool,
}

impl ConstantsConfig {
    pub fn ambient(m: usize) -> Self {
        ConstantsConfig { c_cover: ambient_covering_constant(m), d_n: 1.0, empirical: false }
    }

    pub fn empirical(c_cover: f64) -> Self {
        ConstantsConfig { c_cover, d_n: 1.0, empirical: true }
    }

    pub fn with_d_n(mut self, d_n: f64) -> Self {
        self.d_n = d_n;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c_cover > 0.0 && self.c_cover.is_finite()) {
            return invalid("covering constant must be positive");
        }
        if !(self.d_n > 0.0 && self.d_n.is_finite()) {
            return invalid("D_n must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub n: usize,
    pub m: usize,
    pub c_m: f64,
    pub c_n: f64,
    pub d_n: f64,
    pub c_hat_n: f64,
    pub c_tilde: f64,
    pub a_tilde: f64,
    pub b_tilde: f64,
}

pub fn constants(n: usize, m: usize, config: &ConstantsConfig) -> Result<Constants> {
    if !(2 <= n && n <= m) {
        return invalid(format!("need 2 <= n <= m, got n={n}, m={m}"));
    }
    config.validate()?;
    let e = 1.0 / (n as f64 - 1.0);
    let nf = n as f64;
    let c = config.c_cover;
    let s = unit_sphere_area(n - 1);
    let c_n = 2f64.powi(n as i32 - 1) * unit_sphere_area(n);
    let c_hat_n = c_n / config.d_n;
    Ok(Constants {
        n,
        m,
        c_m: c,
        c_n,
        d_n: config.d_n,
        c_hat_n,
        c_tilde: 4.0 * 4f64.powf(3.0 * e) * c.powf((nf + 3.0) * e) * s.powf(2.0 * e),
        b_tilde: 4.0 * 2f64.powf(3.0 * e) * c_hat_n * c.powf((nf + 1.0) * e) * s.powf(e),
        a_tilde: 4f64.powf(nf * e) * c_hat_n * c,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub n: usize,
    pub m: usize,
    pub volume_m: f64,
    pub volume_sigma: f64,
    pub i_m: f64,
    pub i_sigma: f64,
    pub r0: Option<f64>,
    pub k: usize,
    pub constants: ConstantsConfig,
}

impl BoundInputs {
    pub fn validate(&self) -> Result<()> {
        if !(2 <= self.n && self.n <= self.m) {
            return invalid(format!("need 2 <= n <= m, got n={}, m={}", self.n, self.m));
        }
        for (name, v) in [("|M|", self.volume_m), ("|Sigma|", self.volume_sigma), ("i(M)", self.i_m), ("i(Sigma)", self.i_sigma)] {
            if !(v > 0.0 && v.is_finite()) {
                return invalid(format!("{name} must be positive, got {v}"));
            }
        }
        if let Some(r) = self.r0 {
            if !(r > 0.0) {
                return invalid("injectivity radius must be positive");
            }
        }
        if self.k < 1 {
            return invalid("k must be at least 1");
        }
        self.constants.validate()
    }

    fn exp(&self) -> f64 {
        1.0 / (self.n as f64 - 1.0)
    }
}

/// `C~ i(Sigma)^{2/(n-1)} |M| / |Sigma|^{(n+1)/(n-1)} k^{2/(n-1)}`.
pub fn volume_bound(inputs: &BoundInputs) -> Result<f64> {
    inputs.validate()?;
    let c = constants(inputs.n, inputs.m, &inputs.constants)?;
    let e = inputs.exp();
    Ok(c.c_tilde * inputs.i_sigma.powf(2.0 * e) * inputs.volume_m
        / inputs.volume_sigma.powf((inputs.n as f64 + 1.0) * e)
        * (inputs.k as f64).powf(2.0 * e))
}

/// `A~ i(M)/r_0 + B~ i(M) (i(Sigma) k / |Sigma|)^{1/(n-1)}`, with the threshold
/// `k_0 = |Sigma| / (2 C^2 |S^{n-1}| i(Sigma) r_0^{n-1})`.
pub fn injectivity_bound(inputs: &BoundInputs) -> Result<(f64, f64)> {
    inputs.validate()?;
    let Some(r0) = inputs.r0 else {
        return invalid("the injectivity-radius bound needs r_0");
    };
    let c = constants(inputs.n, inputs.m, &inputs.constants)?;
    let e = inputs.exp();
    let rhs = c.a_tilde * inputs.i_m / r0
        + c.b_tilde * inputs.i_m * (inputs.i_sigma * inputs.k as f64 / inputs.volume_sigma).powf(e);
    Ok((rhs, threshold_k0(inputs, r0, &c)))
}

fn threshold_k0(inputs: &BoundInputs, r0: f64, c: &Constants) -> f64 {
    inputs.volume_sigma
        / (2.0 * c.c_m * c.c_m * unit_sphere_area(inputs.n - 1) * inputs.i_sigma * r0.powi(inputs.n as i32 - 1))
}

/// `(|Sigma|^{1/(n-1)}, C~ i(Sigma)^{2/(n-1)} / I(M)^{n/(n-1)} k^{2/(n-1)})` with
/// `I(M) = |Sigma| / |M|^{(n-1)/n}`; the inequality reads `sigma_k * lhs <= rhs`.
pub fn isoperimetric_bound(inputs: &BoundInputs) -> Result<(f64, f64)> {
    inputs.validate()?;
    let c = constants(inputs.n, inputs.m, &inputs.constants)?;
    let e = inputs.exp();
    let nf = inputs.n as f64;
    let iso = inputs.volume_sigma / inputs.volume_m.powf((nf - 1.0) / nf);
    let rhs = c.c_tilde * inputs.i_sigma.powf(2.0 * e) / iso.powf(nf * e) * (inputs.k as f64).powf(2.0 * e);
    Ok((inputs.volume_sigma.powf(e), rhs))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub inputs: BoundInputs,
    pub constants: Constants,
    pub volume_rhs: f64,
    pub injectivity_rhs: Option<f64>,
    pub k0: Option<f64>,
    pub isoperimetric_lhs_factor: f64,
    pub isoperimetric_rhs: f64,
    pub computed_sigma_k: Option<f64>,
    pub tolerance: f64,
    pub volume_satisfied: Option<bool>,
    pub injectivity_satisfied: Option<bool>,
    pub isoperimetric_satisfied: Option<bool>,
    pub notes: Vec<String>,
}

pub fn bound_report(inputs: &BoundInputs, computed_sigma_k: Option<f64>, tolerance: f64) -> Result<BoundReport> {
    let consts = constants(inputs.n, inputs.m, &inputs.constants)?;
    let volume_rhs = volume_bound(inputs)?;
    let (injectivity_rhs, k0) = match inputs.r0 {
        Some(_) => {
            let (r, k) = injectivity_bound(inputs)?;
            (Some(r), Some(k))
        }
        None => (None, None),
    };
    let (lhs_factor, iso_rhs) = isoperimetric_bound(inputs)?;
    let holds = |rhs: f64| computed_sigma_k.map(|s| s <= rhs + tolerance);
    let mut notes = Vec::new();
    if inputs.constants.d_n == 1.0 {
        notes.push("D_n = 1 is a configuration default, not a derived value".to_string());
    }
    if inputs.constants.empirical {
        notes.push(format!("covering constant C = {} measured on the mesh", inputs.constants.c_cover));
    }
    Ok(BoundReport {
        inputs: *inputs,
        constants: consts,
        volume_rhs,
        injectivity_rhs,
        k0,
        isoperimetric_lhs_factor: lhs_factor,
        isoperimetric_rhs: iso_rhs,
        computed_sigma_k,
        tolerance,
        volume_satisfied: holds(volume_rhs),
        injectivity_satisfied: injectivity_rhs.and_then(holds),
        isoperimetric_satisfied: computed_sigma_k.map(|s| s * lhs_factor <= iso_rhs + tolerance * lhs_factor),
        notes,
    })
}

/// One row of an exported table (`k, epsilon, value, bound, satisfied`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub k: Option<usize>,
    pub epsilon: Option<f64>,
    pub value: f64,
    pub bound: f64,
    pub satisfied: bool,
}

pub fn write_table_csv<W: Write>(rows: &[TableRow], mut w: W) -> Result<()> {
    writeln!(w, "k,epsilon,value,bound,satisfied")?;
    for r in rows {
        let k = r.k.map(|k| k.to_string()).unwrap_or_default();
        let e = r.epsilon.map(|e| format!("{e:e}")).unwrap_or_default();
        writeln!(w, "{k},{e},{:e},{:e},{}", r.value, r.bound, r.satisfied)?;
    }
    Ok(())
}
