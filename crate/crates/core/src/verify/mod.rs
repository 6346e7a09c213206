//! Experiment harness: sampled checks of the growth inequalities, the
//! monotonicity of normalized growth at minimal vectors, and the explicit
//! 3x3 counterexample, each producing a seed-deterministic report.

mod appendix;
mod asymptotic;
mod minimal;
mod report;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde_json::{json, Value};

use crate::catalog::AlgebraFile;
use crate::config::{derive_seed, RunConfig};
use crate::error::{Error, Result};
use crate::liealg::LieAlgebra;
use crate::numcore::{self, expm, Matrix};

pub use appendix::{
    appendix1_exact_exponents, appendix1_log_norms, appendix1_setup, run_appendix1, Appendix1Setup,
};
pub use asymptotic::{run_cor87, run_thm81};
pub use minimal::{run_lemma95, run_prop91_94};
pub use report::{round_floats, Check, ExperimentReport, Record, Verdict, REPORT_SCHEMA};

pub const EXPERIMENTS: &[&str] = &["thm81", "cor87", "lemma95", "appendix1", "prop91-94"];

/// Runs an experiment by name. `appendix1` builds its own inputs and
/// ignores `alg` and `v`.
pub fn run_experiment(
    name: &str,
    input: Option<(&LieAlgebra, &[f64])>,
    cfg: &RunConfig,
) -> Result<ExperimentReport> {
    if name == "appendix1" {
        return run_appendix1(cfg);
    }
    if !EXPERIMENTS.contains(&name) {
        return Err(Error::InvalidInput(format!(
            "unknown experiment '{name}' (expected one of {})",
            EXPERIMENTS.join(", ")
        )));
    }
    let (alg, v) = input.ok_or_else(|| {
        Error::InvalidInput(format!("experiment '{name}' needs an algebra and a vector"))
    })?;
    match name {
        "thm81" => run_thm81(alg, v, cfg),
        "cor87" => run_cor87(alg, v, cfg),
        "lemma95" => run_lemma95(alg, v, cfg),
        _ => run_prop91_94(alg, v, cfg),
    }
}

/// Re-runs a report from its embedded configuration and inputs.
pub fn replay(report: &ExperimentReport) -> Result<ExperimentReport> {
    let cfg: RunConfig = serde_json::from_value(report.config.clone())
        .map_err(|e| Error::InvalidInput(format!("report config: {e}")))?;
    let file: AlgebraFile = serde_json::from_value(report.inputs["algebra"].clone())
        .map_err(|e| Error::InvalidInput(format!("report algebra: {e}")))?;
    let v: Vec<f64> = serde_json::from_value(report.inputs["vector"].clone())
        .map_err(|e| Error::InvalidInput(format!("report vector: {e}")))?;
    let alg = file.into_algebra(cfg.tol)?;
    run_experiment(&report.name, Some((&alg, &v)), &cfg)
}

// Seed streams, one per kind of random draw.
const STREAM_THM81: u64 = 0x81;
const STREAM_COR87: u64 = 0x87;
const STREAM_COR87_K: u64 = 0x870;
const STREAM_LEMMA95: u64 = 0x95;
const STREAM_PROP_ORBIT: u64 = 0x91;
const STREAM_PROP_PERTURB: u64 = 0x910;
const STREAM_PROP_RATIO: u64 = 0x94;

fn row_seed(seed: u64, stream: u64, row: usize) -> u64 {
    derive_seed(derive_seed(seed, stream), row as u64)
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| StandardNormal.sample(rng)).collect()
}

/// Uniform unit vector of length `d`.
fn unit(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let c = gaussian(rng, d);
        if numcore::norm(&c) > 1e-12 {
            return numcore::normalized(&c);
        }
    }
}

/// `exp(sum c_i B_i)`, the identity for an empty basis.
fn exp_combination(coords: &[f64], basis: &[Matrix], n: usize) -> Matrix {
    if basis.is_empty() {
        Matrix::identity(n)
    } else {
        expm(&numcore::combine(coords, basis))
    }
}

fn combination(coords: &[f64], basis: &[Matrix]) -> Matrix {
    numcore::combine(coords, basis).sym_part()
}

fn inputs(alg: &LieAlgebra, v: &[f64]) -> Value {
    json!({ "algebra": AlgebraFile::from_algebra(alg), "vector": v })
}

fn config_value(cfg: &RunConfig) -> Value {
    serde_json::to_value(cfg).expect("config is serializable")
}

fn record(v: Value) -> Record {
    match v {
        Value::Object(m) => m,
        _ => unreachable!("records are built from json objects"),
    }
}

/// `None` for non-finite values so they serialize as null.
fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn extremes(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
        (lo.min(x), hi.max(x))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn unknown_experiment_is_rejected() {
        let cfg = RunConfig::default();
        assert!(matches!(
            run_experiment("thm99", None, &cfg),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            run_experiment("thm81", None, &cfg),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn row_seeds_differ_by_stream_and_row() {
        assert_ne!(row_seed(1, STREAM_THM81, 0), row_seed(1, STREAM_THM81, 1));
        assert_ne!(row_seed(1, STREAM_THM81, 0), row_seed(1, STREAM_COR87, 0));
        assert_eq!(
            row_seed(5, STREAM_LEMMA95, 3),
            row_seed(5, STREAM_LEMMA95, 3)
        );
    }

    #[test]
    fn replay_reproduces_a_report() {
        let entry = catalog::lookup("sl2").unwrap();
        let mut cfg = RunConfig::default();
        cfg.experiment.thm81_rays = 3;
        cfg.experiment.thm81_t_grid = vec![5.0, 30.0];
        let r = run_thm81(&entry.algebra, &[1.0, 0.0], &cfg).unwrap();
        let parsed = ExperimentReport::from_json(&r.to_json()).unwrap();
        assert_eq!(replay(&parsed).unwrap().to_json(), r.to_json());
    }
}
