mod args;
mod report;

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use serde::Serialize;
use serde_json::{json, Value};

use steklov_core::bounds::{
    blowup_experiment, bound_report, fit_asymptotics, obstruction_experiment, write_table_csv, BlowupOptions,
    BoundInputs, BoundReport, ConstantsConfig,
};
use steklov_core::geometry::{
    generate_mesh, geometric_summary, EmbeddedMesh, FaceTag, FamilyDescriptor,
};
use steklov_core::index::{degree_upper_bound, estimate_index, family_index_bounds, IndexEstimate, IndexOptions};
use steklov_core::oracles::{
    annulus_sn_eigenvalue, blowup_constant, separated_mode_sn_eigenvalue, sphere_cylinder_spectrum,
    SeparatedModeProblem,
};
use steklov_core::packing::{certify_sigma_k, empirical_config};
use steklov_core::spectral::{solve_steklov, ProblemKind, SpectralProblem};

use args::{
    BoundKind, BoundsArgs, CertifyArgs, Cli, Command, ConstantsArgs, ExperimentCommand, IndexArgs, MeshArgs,
    OracleCommand, SpectrumArgs,
};
use report::{emit, usage, Failure, Outcome, RunReport, Timer, SCHEMA_VERSION};

struct Run {
    seed: Option<u64>,
    payload: Value,
    check: Option<String>,
}

impl Run {
    fn new(payload: impl Serialize) -> Outcome<Run> {
        Ok(Run { seed: None, payload: serde_json::to_value(payload)?, check: None })
    }

    fn seeded(mut self, seed: u64) -> Run {
        self.seed = Some(seed);
        self
    }

    fn check(mut self, ok: bool, msg: impl Into<String>) -> Run {
        if !ok {
            self.check = Some(msg.into());
        }
        self
    }
}

fn read_mesh(path: &Path) -> Outcome<EmbeddedMesh> {
    Ok(EmbeddedMesh::read_json(path)?)
}

fn has_neumann(mesh: &EmbeddedMesh) -> bool {
    mesh.boundary_faces().iter().any(|f| f.tag == FaceTag::Neumann)
}

fn natural_kind(mesh: &EmbeddedMesh) -> ProblemKind {
    if has_neumann(mesh) {
        ProblemKind::SteklovNeumann
    } else {
        ProblemKind::Steklov
    }
}

fn write_file(path: &Path, f: impl FnOnce(&mut Vec<u8>) -> Outcome<()>) -> Outcome<()> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    fs::write(path, buf)?;
    Ok(())
}

fn mesh_cmd(a: &MeshArgs, t: &mut Timer) -> Outcome<Run> {
    let desc = FamilyDescriptor::new(a.family.variant(), a.family.h);
    let mesh = t.run("generate", || Ok(generate_mesh(&desc)?))?;
    t.run("write", || Ok(mesh.write_json(&a.out)?))?;
    let summary = geometric_summary(&mesh, Some(&desc));
    Run::new(json!({
        "descriptor": desc,
        "mesh_file": a.out,
        "vertices": mesh.num_vertices(),
        "cells": mesh.num_cells(),
        "boundary_faces": mesh.boundary_faces().len(),
        "summary": summary,
        "index_bounds": family_index_bounds(&desc.variant),
    }))
}

fn spectrum_cmd(a: &SpectrumArgs, t: &mut Timer) -> Outcome<Run> {
    let mesh = t.run("read", || read_mesh(&a.mesh))?;
    let problem = SpectralProblem::new(&mesh, a.kind.into(), a.k_max)
        .with_tolerance(a.tol)
        .with_method(a.method.into())
        .with_vectors(a.traces.is_some());
    let result = t.run("solve", || Ok(solve_steklov(&problem)?))?;
    if let Some(path) = &a.traces {
        write_file(path, |w| Ok(result.write_traces_csv(w)?))?;
    }
    let mut payload = serde_json::to_value(&result)?;
    if let Value::Object(map) = &mut payload {
        map.remove("eigenvectors_boundary");
        map.remove("boundary_vertices");
    }
    Run::new(payload)
}

fn oracle_cmd(o: &OracleCommand, t: &mut Timer) -> Outcome<Run> {
    let (name, values) = t.run("evaluate", || {
        Ok(match *o {
            OracleCommand::AnnulusSn { n, eps, delta, mode } => {
                ("annulus-sn", vec![annulus_sn_eigenvalue(n, eps, delta, mode)?])
            }
            OracleCommand::Cylinder { n, radius, length, count } => {
                ("cylinder", sphere_cylinder_spectrum(n, radius, length, count)?)
            }
            OracleCommand::BlowupConstant { n } => ("blowup-constant", vec![blowup_constant(n)?]),
            OracleCommand::SeparatedMode { n, eps, delta, mu, lambda, radial_resolution } => {
                let p = SeparatedModeProblem { n, eps, delta, mu, lambda, radial_resolution };
                ("separated-mode", vec![separated_mode_sn_eigenvalue(&p)?])
            }
        })
    })?;
    Run::new(json!({ "oracle": name, "values": values }))
}

fn parse_degrees(pieces: &[String]) -> Outcome<Vec<Vec<u64>>> {
    pieces
        .iter()
        .map(|p| {
            p.split(',')
                .map(|d| d.trim().parse::<u64>().map_err(|_| Failure::Usage(format!("bad degree list '{p}'"))))
                .collect()
        })
        .collect()
}

/// Splits the samples over `threads` independent streams seeded `seed, seed+1, ...`
/// and merges by maximum.
fn partitioned_index(mesh: &EmbeddedMesh, opts: &IndexOptions, threads: usize) -> Outcome<IndexEstimate> {
    if threads <= 1 {
        return Ok(estimate_index(mesh, opts)?);
    }
    let parts: Vec<IndexOptions> = (0..threads)
        .map(|i| {
            let samples = opts.samples / threads + usize::from(i < opts.samples % threads);
            IndexOptions { samples: samples.max(1), seed: opts.seed.wrapping_add(i as u64), ..*opts }
        })
        .collect();
    let results: Vec<_> = std::thread::scope(|s| {
        let handles: Vec<_> = parts.iter().map(|p| s.spawn(move || estimate_index(mesh, p))).collect();
        handles.into_iter().map(|h| h.join().expect("sampling thread panicked")).collect()
    });
    let mut merged: Option<IndexEstimate> = None;
    let mut curves = Vec::new();
    let mut histogram = BTreeMap::new();
    let (mut samples, mut rejections, mut improvements) = (0, 0, 0);
    for r in results {
        let r = r?;
        samples += r.samples;
        rejections += r.degeneracy_rejections;
        improvements += r.hill_climb_improvements;
        curves.push(r.sensitivity.clone());
        for (k, v) in &r.histogram {
            *histogram.entry(*k).or_insert(0) += v;
        }
        if merged.as_ref().is_none_or(|m| r.sampled_max > m.sampled_max) {
            merged = Some(r);
        }
    }
    let mut est = merged.expect("at least one partition");
    est.samples = samples;
    est.degeneracy_rejections = rejections;
    est.hill_climb_improvements = improvements;
    est.histogram = histogram;
    let len = curves.iter().map(Vec::len).min().unwrap_or(0);
    est.sensitivity = (0..len)
        .map(|i| {
            let drawn = curves.iter().map(|c| c[i].0).sum();
            let best = curves.iter().map(|c| c[i].1).max().unwrap_or(0);
            (drawn, best)
        })
        .collect();
    Ok(est)
}

fn index_cmd(a: &IndexArgs, threads: usize, t: &mut Timer) -> Outcome<Run> {
    let pieces = parse_degrees(&a.degrees)?;
    let mesh = t.run("read", || read_mesh(&a.mesh))?;
    let opts = IndexOptions {
        hill_climb_rounds: a.hill_climb_rounds,
        ..IndexOptions::new(a.samples, a.seed).with_hill_climb(a.hill_climb)
    };
    let mut est = t.run("sample", || partitioned_index(&mesh, &opts, threads))?;
    if !pieces.is_empty() {
        est.degree_upper_bound = Some(degree_upper_bound(&pieces)?);
    }
    let within = est.degree_upper_bound.is_none_or(|d| est.sampled_max as u64 <= d);
    let msg = format!("sampled count {} exceeds the degree bound {:?}", est.sampled_max, est.degree_upper_bound);
    Ok(Run::new(json!({ "estimate": est, "options": opts }))?.seeded(a.seed).check(within, msg))
}

fn constants_config(c: &ConstantsArgs, m: usize, measure: impl FnOnce() -> Outcome<Option<ConstantsConfig>>) -> Outcome<ConstantsConfig> {
    let cfg = if c.ambient_constants {
        ConstantsConfig::ambient(m)
    } else if let Some(cc) = c.c_cover {
        ConstantsConfig::empirical(cc)
    } else {
        measure()?.unwrap_or_else(|| ConstantsConfig::ambient(m))
    };
    let cfg = cfg.with_d_n(c.d_n);
    cfg.validate()?;
    Ok(cfg)
}

fn certify_cmd(a: &CertifyArgs, t: &mut Timer) -> Outcome<Run> {
    let mesh = t.run("read", || read_mesh(&a.mesh))?;
    let cfg = t.run("constants", || {
        constants_config(&a.constants, mesh.ambient_dim(), || Ok(Some(empirical_config(&mesh, a.k, a.i_sigma, a.seed)?)))
    })?;
    let cert = t.run("certify", || Ok(certify_sigma_k(&mesh, a.k, &cfg, a.i_sigma)?))?;
    let msg = format!("FEM sigma_{} = {} exceeds the certified bound {}", a.k, cert.fem_sigma_k, cert.certified_bound);
    let valid = cert.valid;
    Ok(Run::new(json!({ "constants": cfg, "certificate": cert }))?.seeded(a.seed).check(valid, msg))
}

fn index_value(path: &Path) -> Outcome<f64> {
    let doc: Value = serde_json::from_str(&fs::read_to_string(path)?)?;
    let est = doc.pointer("/payload/estimate").unwrap_or(&doc);
    let est: IndexEstimate = serde_json::from_value(est.clone())?;
    Ok(est.degree_upper_bound.map_or(est.sampled_max as f64, |d| d as f64))
}

#[derive(Serialize)]
struct CorollaryCheck {
    lhs_factor: f64,
    volume_rhs: f64,
    isoperimetric_rhs: f64,
    relative_error: f64,
    holds: bool,
}

fn bounds_cmd(a: &BoundsArgs, t: &mut Timer) -> Outcome<Run> {
    if a.bound == BoundKind::Injectivity && a.r0.is_none() {
        return usage("the injectivity bound needs --r0");
    }
    let mesh = a.mesh.as_deref().map(|p| t.run("read", || read_mesh(p))).transpose()?;
    let summary = mesh.as_ref().map(|m| geometric_summary(m, None));
    let pick = |flag: Option<f64>, from_mesh: Option<f64>, name: &str| {
        flag.or(from_mesh).ok_or_else(|| Failure::Usage(format!("--{name} is required without --mesh")))
    };
    let n = pick(a.n.map(|x| x as f64), mesh.as_ref().map(|m| m.intrinsic_dim() as f64), "n")? as usize;
    let m = pick(a.m.map(|x| x as f64), mesh.as_ref().map(|m| m.ambient_dim() as f64), "m")? as usize;
    let volume_m = pick(a.volume_m, summary.map(|s| s.volume_m), "volume-m")?;
    let volume_sigma = pick(a.volume_sigma, summary.map(|s| s.volume_sigma), "volume-sigma")?;
    let i_m = match (&a.index, a.i_m) {
        (_, Some(v)) => v,
        (Some(p), None) => index_value(p)?,
        (None, None) => return usage("--i-m or --index is required"),
    };
    let cfg = t.run("constants", || {
        constants_config(&a.constants, m, || {
            mesh.as_ref().map(|ms| empirical_config(ms, a.k, a.i_sigma, 0)).transpose().map_err(Failure::from)
        })
    })?;
    let sigma = match (&mesh, a.compute) {
        (Some(ms), true) => {
            let r = t.run("solve", || Ok(solve_steklov(&SpectralProblem::new(ms, natural_kind(ms), a.k))?))?;
            Some(r.eigenvalues[a.k])
        }
        _ => a.sigma,
    };
    let inputs = BoundInputs { n, m, volume_m, volume_sigma, i_m, i_sigma: a.i_sigma, r0: a.r0, k: a.k, constants: cfg };
    let rep: BoundReport = t.run("evaluate", || Ok(bound_report(&inputs, sigma, a.tolerance)?))?;
    let corollary = a.check_corollary.then(|| {
        let product = rep.isoperimetric_lhs_factor * rep.volume_rhs;
        let relative_error = (product - rep.isoperimetric_rhs).abs() / rep.isoperimetric_rhs.abs().max(f64::MIN_POSITIVE);
        CorollaryCheck {
            lhs_factor: rep.isoperimetric_lhs_factor,
            volume_rhs: rep.volume_rhs,
            isoperimetric_rhs: rep.isoperimetric_rhs,
            relative_error,
            holds: relative_error <= 1e-12,
        }
    });
    let selected = match a.bound {
        BoundKind::All => vec![rep.volume_satisfied, rep.injectivity_satisfied, rep.isoperimetric_satisfied],
        BoundKind::Volume => vec![rep.volume_satisfied],
        BoundKind::Injectivity => vec![rep.injectivity_satisfied],
        BoundKind::Isoperimetric => vec![rep.isoperimetric_satisfied],
    };
    let ok = !selected.contains(&Some(false)) && corollary.as_ref().is_none_or(|c| c.holds);
    let run = Run::new(json!({ "report": rep, "corollary": corollary }))?;
    Ok(run.check(ok, "a requested bound or identity does not hold"))
}

fn write_csv(path: Option<&Path>, f: impl FnOnce(&mut Vec<u8>) -> Outcome<()>) -> Outcome<()> {
    path.map_or(Ok(()), |p| write_file(p, f))
}

fn experiment_cmd(e: &ExperimentCommand, t: &mut Timer) -> Outcome<Run> {
    match e {
        ExperimentCommand::Asymptotics { mesh, k_lo, k_hi, kind, csv } => {
            let mesh = t.run("read", || read_mesh(mesh))?;
            let volume_sigma = geometric_summary(&mesh, None).volume_sigma;
            let spec = t.run("solve", || Ok(solve_steklov(&SpectralProblem::new(&mesh, (*kind).into(), *k_hi))?))?;
            let fit = fit_asymptotics(&spec.eigenvalues, mesh.intrinsic_dim(), volume_sigma, *k_lo, *k_hi)?;
            write_csv(csv.as_deref(), |w| {
                writeln!(w, "k,sigma_k,fitted")?;
                for k in *k_lo..=*k_hi {
                    let fitted = fit.fitted_coefficient * (k as f64).powf(fit.fitted_exponent);
                    writeln!(w, "{k},{},{fitted}", spec.eigenvalues[k])?;
                }
                Ok(())
            })?;
            Run::new(json!({ "fit": fit, "eigenvalues": spec.eigenvalues }))
        }
        ExperimentCommand::Blowup { n, eps, max_degree, max_circle_mode, radial_resolution, csv } => {
            let opts = BlowupOptions {
                max_degree: *max_degree,
                max_circle_mode: *max_circle_mode,
                radial_resolution: *radial_resolution,
            };
            let rows = t.run("sweep", || Ok(blowup_experiment(*n, eps, &opts)?))?;
            let table: Vec<_> = rows.iter().map(|r| r.table_row()).collect();
            write_csv(csv.as_deref(), |w| Ok(write_table_csv(&table, w)?))?;
            let ok = table.iter().all(|r| r.satisfied);
            Ok(Run::new(json!({ "options": opts, "rows": rows }))?.check(ok, "a mode minimum falls below c_hat/eps"))
        }
        ExperimentCommand::Obstruction { n, beta, alpha, kmin, kmax, csv } => {
            if kmin > kmax {
                return usage("--kmin must not exceed --kmax");
            }
            let alpha = alpha.unwrap_or(1.0 + beta);
            let ks: Vec<usize> = (*kmin..=*kmax).collect();
            let rep = t.run("evaluate", || Ok(obstruction_experiment(*n, alpha, *beta, &ks)?))?;
            write_csv(csv.as_deref(), |w| Ok(write_table_csv(&rep.table_rows(), w)?))?;
            let ok = rep.consistent;
            Ok(Run::new(&rep)?.check(ok, "fitted exponent is outside the predicted range"))
        }
    }
}

fn command_name(c: &Command) -> String {
    match c {
        Command::Mesh(_) => "mesh".into(),
        Command::Spectrum(_) => "spectrum".into(),
        Command::Oracle { oracle } => format!("oracle {}", variant_name(oracle)),
        Command::Index(_) => "index".into(),
        Command::Certify(_) => "certify".into(),
        Command::Bounds(_) => "bounds".into(),
        Command::Experiment { experiment } => format!("experiment {}", variant_name(experiment)),
    }
}

fn unwrap_single(v: Value) -> Value {
    match v {
        Value::Object(map) if map.len() == 1 => map.into_iter().next().map(|(_, inner)| inner).unwrap_or(Value::Null),
        other => other,
    }
}

/// The arguments of the leaf subcommand, with every default filled in.
fn params(c: &Command) -> Outcome<Value> {
    let v = unwrap_single(serde_json::to_value(c)?);
    Ok(match c {
        Command::Oracle { .. } | Command::Experiment { .. } => unwrap_single(unwrap_single(v)),
        _ => v,
    })
}

fn variant_name(v: &impl Serialize) -> String {
    match serde_json::to_value(v) {
        Ok(Value::Object(map)) => map.keys().next().cloned().unwrap_or_default(),
        Ok(Value::String(s)) => s,
        _ => String::new(),
    }
}

fn execute(cli: &Cli) -> Outcome<()> {
    if cli.threads == 0 {
        return usage("--threads must be at least 1");
    }
    let mut timer = Timer::default();
    let run = match &cli.command {
        Command::Mesh(a) => mesh_cmd(a, &mut timer),
        Command::Spectrum(a) => spectrum_cmd(a, &mut timer),
        Command::Oracle { oracle } => oracle_cmd(oracle, &mut timer),
        Command::Index(a) => index_cmd(a, cli.threads, &mut timer),
        Command::Certify(a) => certify_cmd(a, &mut timer),
        Command::Bounds(a) => bounds_cmd(a, &mut timer),
        Command::Experiment { experiment } => experiment_cmd(experiment, &mut timer),
    }?;
    let params = params(&cli.command)?;
    let report = RunReport {
        schema_version: SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION"),
        command: command_name(&cli.command),
        params,
        seed: run.seed,
        threads: cli.threads,
        stages: timer.stages,
        payload: run.payload,
    };
    emit(&report, cli.report.as_deref())?;
    match run.check {
        Some(msg) => Err(Failure::Check(msg)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("steklab: {}", f.message());
            ExitCode::from(f.exit_code() as u8)
        }
    }
}
