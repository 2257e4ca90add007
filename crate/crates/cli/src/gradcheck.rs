//! The `grad-check` subcommand: finite-difference gradient verification
//! plus a sweep of the strong-convexity and smoothness inequalities.

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use ragd::objective::{check_g_smoothness, check_g_strong_convexity, finite_diff_grad_check};

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::experiment::build_objective;
use crate::log;

const GRAD_TOL: f64 = 1e-5;

#[derive(Serialize)]
struct GradCheckJson {
    schema: u32,
    seed: u64,
    max_gradient_error: f64,
    pairs_checked: usize,
    convexity_violations: usize,
    smoothness_violations: usize,
}

pub fn cmd_grad_check(
    config_path: &Path,
    seed_override: Option<u64>,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let mut cfg = ExperimentConfig::load(config_path).map_err(CliError::Config)?;
    if let Some(seed) = seed_override {
        cfg.run.seed = seed;
    }
    let obj = build_objective(&cfg, config_path)?;
    let m = obj.manifold;
    let gc = cfg.grad_check.clone();
    let pairs = gc.as_ref().and_then(|g| g.pairs).unwrap_or(10_000);
    let points = gc.as_ref().and_then(|g| g.points).unwrap_or(20);
    let radius = if obj.domain_radius.is_finite() { obj.domain_radius } else { 1.0 };

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.run.seed);
    let sample = |rng: &mut ChaCha8Rng| -> Result<ragd::ManifoldPoint, CliError> {
        let t = m.random_tangent(&obj.domain_center, rng, radius);
        m.exp(&obj.domain_center, &t).map_err(CliError::numerical)
    };

    let mut max_err = 0.0f64;
    for _ in 0..points {
        let x = sample(&mut rng)?;
        let err = finite_diff_grad_check(&obj, &x, 8, 1e-6, &mut rng)
            .map_err(CliError::numerical)?;
        max_err = max_err.max(err);
    }
    log::info(&format!("max finite-difference gradient error: {max_err}"));

    let mut convexity_violations = 0usize;
    let mut smoothness_violations = 0usize;
    for _ in 0..pairs {
        let x = sample(&mut rng)?;
        let y = sample(&mut rng)?;
        let c = check_g_strong_convexity(&obj, &x, &y).map_err(CliError::numerical)?;
        if !c.holds {
            convexity_violations += 1;
        }
        let s = check_g_smoothness(&obj, &x, &y).map_err(CliError::numerical)?;
        if !s.holds || !s.grad_lipschitz_holds {
            smoothness_violations += 1;
        }
    }
    log::info(&format!(
        "{pairs} pairs: {convexity_violations} convexity violations, \
         {smoothness_violations} smoothness violations"
    ));

    let report = GradCheckJson {
        schema: 1,
        seed: cfg.run.seed,
        max_gradient_error: max_err,
        pairs_checked: pairs,
        convexity_violations,
        smoothness_violations,
    };
    let json = serde_json::to_string_pretty(&report)
        .map_err(|e| CliError::Numerical(format!("report serialization: {e}")))?;
    match out {
        Some(dir) => {
            std::fs::create_dir_all(&dir)
                .map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;
            std::fs::write(dir.join("grad-check.json"), json + "\n")?;
        }
        None => println!("{json}"),
    }

    if max_err > GRAD_TOL {
        return Err(CliError::Violation(format!(
            "max gradient error {max_err} exceeds {GRAD_TOL}"
        )));
    }
    if convexity_violations + smoothness_violations > 0 {
        return Err(CliError::Violation(format!(
            "{convexity_violations} convexity and {smoothness_violations} smoothness violations"
        )));
    }
    Ok(())
}
