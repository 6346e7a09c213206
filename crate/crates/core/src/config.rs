//! Run configuration: every tolerance, optimizer option and seed in one
//! serializable value that is embedded in each report.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::geometry::DistanceOptions;
use crate::growth::GrowthOptions;
use crate::numcore::Tolerances;
use crate::orbitflow::{ClassifyOptions, FlowOptions};

pub const SEED_ENV: &str = "ORBITGROWTH_SEED";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentOptions {
    /// Slack on asymptotic inequalities.
    pub eps_exp: f64,
    /// Only distances at least this large enter asymptotic checks.
    pub t_asym: f64,

    pub thm81_rays: usize,
    pub thm81_t_grid: Vec<f64>,
    /// Time at which pure-ray ratios are compared with `λ_X`.
    pub ray_t: f64,
    pub ray_tol: f64,

    pub cor87_t_grid: Vec<f64>,
    pub k_samples: usize,

    pub lemma_rays: usize,
    pub s_max: f64,
    pub lemma_steps: usize,
    pub mono_tol: f64,
    pub terminal_tol: f64,

    pub n_list: Vec<u32>,
    pub appendix_s_max: f64,
    pub ratio_tol: f64,

    pub prop_samples: usize,
    pub prop_perturbations: usize,
    pub prop_delta: f64,
    pub prop_restarts: usize,
    pub prop_t_sweep: Vec<f64>,
    pub prop_const_tol: f64,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        Self {
            eps_exp: 0.05,
            t_asym: 20.0,
            thm81_rays: 24,
            thm81_t_grid: vec![5.0, 20.0, 50.0, 100.0],
            ray_t: 100.0,
            ray_tol: 0.01,
            cor87_t_grid: vec![50.0, 100.0, 200.0],
            k_samples: 512,
            lemma_rays: 64,
            s_max: 20.0,
            lemma_steps: 200,
            mono_tol: 1e-9,
            terminal_tol: 0.01,
            n_list: vec![1, 2, 3],
            appendix_s_max: 40.0,
            ratio_tol: 0.05,
            prop_samples: 6,
            prop_perturbations: 3,
            prop_delta: 1e-3,
            prop_restarts: 16,
            prop_t_sweep: vec![5.0, 10.0, 20.0, 40.0],
            prop_const_tol: 1e-3,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputOptions {
    pub json: Option<String>,
    pub csv: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    /// Master seed; the seeds of the sub-options are derived from it by [`RunConfig::resolved`].
    pub seed: u64,
    pub tol: Tolerances,
    pub growth: GrowthOptions,
    pub flow: FlowOptions,
    pub distance: DistanceOptions,
    pub eps_lambda: f64,
    pub experiment: ExperimentOptions,
    pub output: OutputOptions,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            tol: Tolerances::default(),
            growth: GrowthOptions::default(),
            flow: FlowOptions::default(),
            distance: DistanceOptions::default(),
            eps_lambda: 1e-3,
            experiment: ExperimentOptions::default(),
            output: OutputOptions::default(),
        }
    }
}

/// Mixes a stream index into a seed (splitmix64 finalizer).
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RunConfig {
    /// Copy with sub-option seeds and tolerances taken from the top level.
    pub fn resolved(&self) -> Self {
        let mut c = self.clone();
        c.growth.seed = derive_seed(self.seed, 1);
        c.growth.tol = self.tol;
        c.distance.seed = derive_seed(self.seed, 2);
        c
    }

    pub fn classify_options(&self) -> ClassifyOptions {
        let r = self.resolved();
        ClassifyOptions {
            flow: r.flow,
            growth: r.growth,
            eps_lambda: r.eps_lambda,
        }
    }

    /// Applies `key = value` lines (`#` starts a comment). Keys are dotted
    /// paths into the serialized config, e.g. `growth.restarts = 32`;
    /// list values are comma separated.
    pub fn apply_key_values(&mut self, text: &str) -> Result<()> {
        let mut tree =
            serde_json::to_value(&*self).map_err(|e| Error::InvalidInput(e.to_string()))?;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidInput(format!("line {}: expected key = value", lineno + 1))
            })?;
            set_path(&mut tree, key.trim(), parse_value(value.trim()))
                .map_err(|e| Error::InvalidInput(format!("line {}: {e}", lineno + 1)))?;
        }
        *self = serde_json::from_value(tree).map_err(|e| Error::InvalidInput(e.to_string()))?;
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        self.apply_key_values(&format!("{key} = {value}"))
    }
}

fn parse_scalar(s: &str) -> Value {
    let s = s.trim();
    match serde_json::from_str::<Value>(s) {
        Ok(v) => v,
        Err(_) => Value::String(s.trim_matches('"').to_string()),
    }
}

fn parse_value(s: &str) -> Value {
    if s.starts_with('[') {
        return parse_scalar(s);
    }
    if s.contains(',') {
        Value::Array(s.split(',').map(parse_scalar).collect())
    } else {
        parse_scalar(s)
    }
}

fn set_path(tree: &mut Value, key: &str, value: Value) -> std::result::Result<(), String> {
    let mut node = tree;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| format!("'{key}' is not a config key"))?;
        let slot = obj
            .get_mut(*part)
            .ok_or_else(|| format!("unknown config key '{key}'"))?;
        if i + 1 == parts.len() {
            *slot = match (&*slot, value) {
                // a single element for a list-valued key
                (Value::Array(_), v @ Value::Number(_)) => Value::Array(vec![v]),
                (_, v) => v,
            };
            return Ok(());
        }
        node = slot;
    }
    Err(format!("empty config key '{key}'"))
}
