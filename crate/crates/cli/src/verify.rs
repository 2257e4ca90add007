//! The `verify-geometry` and `verify-identities` subcommands.

use std::path::{Path, PathBuf};

use serde::Serialize;

use ragd::geometry::{
    multinomial_identity, run_distortion_mc, run_sandwich_mc, GeometryReport, IdentityVariant,
};
use ragd::Manifold;

use crate::error::CliError;
use crate::log;

#[derive(Serialize)]
struct ModelReport {
    samples: u64,
    rejected: u64,
    violations: u64,
    max_ratio_observed: f64,
    max_equality_deviation: f64,
    /// True when every admissible sample was an exact equality up to
    /// rounding, as in the flat-space distortion check.
    exact_equality: bool,
}

impl From<&GeometryReport> for ModelReport {
    fn from(r: &GeometryReport) -> Self {
        ModelReport {
            samples: r.samples,
            rejected: r.rejected,
            violations: r.violations,
            max_ratio_observed: r.max_ratio_observed,
            max_equality_deviation: r.max_equality_deviation,
            exact_equality: r.samples > r.rejected && r.max_equality_deviation <= 1e-12,
        }
    }
}

#[derive(Serialize)]
struct GeometryJson {
    schema: u32,
    seed: u64,
    models: std::collections::BTreeMap<String, ModelReport>,
}

fn model_report(model: &str, samples: u64, seed: u64) -> Result<GeometryReport, CliError> {
    let run = |r: Result<GeometryReport, ragd::GeoError>| r.map_err(CliError::numerical);
    match model {
        "hyperbolic-triangles" => run(run_sandwich_mc(-1.0, samples, seed)),
        "spherical-triangles" => run(run_sandwich_mc(1.0, samples, seed)),
        "distortion-sphere" => run(run_distortion_mc(&Manifold::Sphere(3), samples, seed)),
        "distortion-hyperbolic" => {
            run(run_distortion_mc(&Manifold::Hyperbolic(3), samples, seed))
        }
        "distortion-euclidean" => {
            run(run_distortion_mc(&Manifold::Euclidean(3), samples, seed))
        }
        other => Err(CliError::Config(format!("unknown model '{other}'"))),
    }
}

pub fn cmd_verify_geometry(
    model: &str,
    samples: u64,
    seed: u64,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    if samples == 0 {
        return Err(CliError::Config("samples must be at least 1".into()));
    }
    let models: Vec<&str> = match model {
        "all" => vec![
            "hyperbolic-triangles",
            "spherical-triangles",
            "distortion-sphere",
            "distortion-hyperbolic",
            "distortion-euclidean",
        ],
        m => vec![m],
    };
    let mut reports = std::collections::BTreeMap::new();
    let mut violations = 0u64;
    for m in models {
        let r = model_report(m, samples, seed)?;
        log::info(&format!(
            "{m}: {} samples, {} rejected, {} violations, max ratio {}",
            r.samples, r.rejected, r.violations, r.max_ratio_observed
        ));
        violations += r.violations;
        reports.insert(m.to_string(), ModelReport::from(&r));
    }
    write_json(out.as_deref(), &GeometryJson { schema: 1, seed, models: reports })?;
    if violations > 0 {
        return Err(CliError::Violation(format!(
            "{violations} geometry violations; see report"
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct IdentityJson {
    schema: u32,
    p_max: u64,
    checked: u64,
    mismatches: u64,
}

pub fn cmd_verify_identities(p_max: u64, out: Option<PathBuf>) -> Result<(), CliError> {
    if p_max > 20 {
        return Err(CliError::Config(format!(
            "p_max {p_max} exceeds the exact-arithmetic cap 20"
        )));
    }
    let mut checked = 0u64;
    let mut mismatches = 0u64;
    for p in 0..=p_max {
        for q in 0..=p {
            for variant in [IdentityVariant::Even, IdentityVariant::Odd] {
                let c = multinomial_identity(p, q, variant).map_err(CliError::numerical)?;
                checked += 1;
                if !c.equal {
                    mismatches += 1;
                    log::info(&format!(
                        "mismatch at p = {p}, q = {q}, {variant:?}: {} != {}",
                        c.lhs, c.rhs
                    ));
                }
            }
        }
    }
    log::info(&format!("{checked} identities checked, {mismatches} mismatches"));
    write_json(out.as_deref(), &IdentityJson { schema: 1, p_max, checked, mismatches })?;
    if mismatches > 0 {
        return Err(CliError::Violation(format!("{mismatches} identity mismatches")));
    }
    Ok(())
}

fn write_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<(), CliError> {
    let json = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Numerical(format!("report serialization: {e}")))?;
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir)
                .map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;
            std::fs::write(dir.join("report.json"), json + "\n")?;
        }
        None => println!("{json}"),
    }
    Ok(())
}
