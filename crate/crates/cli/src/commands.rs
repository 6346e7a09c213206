use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use orbitgrowth::catalog::{self, AlgebraFile, CatalogEntry};
use orbitgrowth::config::{RunConfig, SEED_ENV};
use orbitgrowth::growth::{growth_exponents, hilbert_mumford, GrowthOptions};
use orbitgrowth::liealg::{
    cartan_split, center_split, killing_analysis, stabilizer_data, LieAlgebra,
};
use orbitgrowth::orbitflow::{classify_orbit, is_minimal, moment_map};
use orbitgrowth::verify::{self, round_floats, ExperimentReport, Verdict, EXPERIMENTS};
use orbitgrowth::Error;
use serde_json::{json, Value};

use crate::{AlgebraArgs, Command, CommonArgs, ExperimentArgs, Outcome, VectorArgs};

pub fn run(cmd: Command) -> Result<Outcome> {
    match cmd {
        Command::Catalog => list_catalog(),
        Command::Analyze(a) => analyze(&a),
        Command::Growth(a) => growth(&a),
        Command::Classify(a) => classify(&a),
        Command::Experiment(a) => experiment(a),
        Command::Replay { report, common } => replay(&report, &common),
    }
}

struct Loaded {
    cfg: RunConfig,
    json: Option<PathBuf>,
    csv: Option<PathBuf>,
}

/// Defaults, then the config file, then `$ORBITGROWTH_SEED`, then `--set`,
/// then `--seed`. Output paths are taken out of the config so that reports
/// do not depend on where they are written.
fn load_config(common: &CommonArgs) -> Result<Loaded> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &common.config {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        cfg.apply_key_values(&text)
            .map_err(|e| anyhow!("config {}: {e}", path.display()))?;
    }
    if let Ok(s) = std::env::var(SEED_ENV) {
        cfg.seed = s
            .trim()
            .parse()
            .with_context(|| format!("{SEED_ENV} must be an unsigned integer, got '{s}'"))?;
    }
    for kv in &common.overrides {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| anyhow!("--set expects KEY=VALUE, got '{kv}'"))?;
        cfg.set(k.trim(), v.trim())
            .map_err(|e| anyhow!("--set {kv}: {e}"))?;
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(t) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build_global()
            .context("configuring the worker pool")?;
    }
    let output = std::mem::take(&mut cfg.output);
    Ok(Loaded {
        json: common.json.clone().or(output.json.map(PathBuf::from)),
        csv: common.csv.clone().or(output.csv.map(PathBuf::from)),
        cfg,
    })
}

/// Catalog name or `alg_v1` JSON path.
fn resolve_algebra(reference: &str, cfg: &RunConfig) -> Result<(LieAlgebra, Option<CatalogEntry>)> {
    if catalog::NAMES.contains(&reference) {
        let entry = catalog::lookup(reference)?;
        let mut alg = entry.algebra.clone();
        alg.tol = cfg.tol;
        return Ok((alg, Some(entry)));
    }
    let path = Path::new(reference);
    if !path.exists() {
        bail!(
            "'{reference}' is neither a catalog algebra ({}) nor a file",
            catalog::NAMES.join(", ")
        );
    }
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file: AlgebraFile = serde_json::from_str(&text)
        .with_context(|| format!("parsing algebra file {}", path.display()))?;
    Ok((file.into_algebra(cfg.tol)?, None))
}

fn resolve_input(algebra: &str, vector: &str, cfg: &RunConfig) -> Result<(LieAlgebra, Vec<f64>)> {
    let (alg, entry) = resolve_algebra(algebra, cfg)?;
    let v = catalog::resolve_vector(entry.as_ref(), &alg, vector)?;
    if v.iter().all(|x| *x == 0.0) {
        return Err(Error::ZeroVector.into());
    }
    Ok((alg, v))
}

/// Writes a line to stdout; a closed pipe (e.g. `| head`) is not an error.
fn say(text: &str) -> Result<()> {
    match writeln!(io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Prints rounded JSON and writes it to `--json` when given.
fn emit(mut value: Value, json_path: Option<&Path>) -> Result<()> {
    round_floats(&mut value);
    let text = serde_json::to_string_pretty(&value)?;
    say(&text)?;
    if let Some(p) = json_path {
        write_file(p, &text)?;
    }
    Ok(())
}

fn list_catalog() -> Result<Outcome> {
    for name in catalog::NAMES {
        let e = catalog::lookup(name)?;
        let vectors: Vec<&str> = e.vectors.iter().map(|(n, _)| *n).collect();
        say(&format!(
            "{:<9} n={:<2} dim={:<2} vectors: {:<14} {}",
            e.name,
            e.algebra.n(),
            e.algebra.dim(),
            vectors.join(", "),
            e.description
        ))?;
    }
    Ok(Outcome::Ok)
}

fn analyze(args: &AlgebraArgs) -> Result<Outcome> {
    let loaded = load_config(&args.common)?;
    let (alg, _) = resolve_algebra(&args.algebra, &loaded.cfg)?;
    let split = cartan_split(&alg);
    let center = center_split(&alg);
    let killing = killing_analysis(&alg, &split);
    let out = json!({
        "algebra": alg.name,
        "n": alg.n(),
        "dim": alg.dim(),
        "validation": alg.report,
        "dim_k": split.k_basis.len(),
        "dim_p": split.p_basis.len(),
        "dim_center": center.z_basis.len(),
        "z_p_flag": center.z_p_flag,
        "z_k_generator": center.z_k_generator,
        "semisimple": killing.semisimple,
        "neg_def_on_k": killing.neg_def_on_k,
        "pos_def_on_p": killing.pos_def_on_p,
        "killing_matrix": killing.killing_matrix,
    });
    emit(out, loaded.json.as_deref())?;
    Ok(Outcome::Ok)
}

fn growth(args: &VectorArgs) -> Result<Outcome> {
    let loaded = load_config(&args.common)?;
    let r = loaded.cfg.resolved();
    let (alg, v) = resolve_input(&args.algebra, &args.vector, &r)?;
    let split = cartan_split(&alg);
    let stab = stabilizer_data(&alg, &split, &v)?;
    let (gv, kv, pv, pt) = stab.dims();
    let mut out = json!({
        "algebra": alg.name,
        "vector": v,
        "dims": { "g_v": gv, "k_v": kv, "p_v": pv, "ptilde_v": pt },
        "is_minimal": is_minimal(&alg, &v, r.tol.comp)?,
        "moment_norm": moment_map(&split, &v).residual_norm,
    });
    let obj = out.as_object_mut().expect("object literal");
    if !split.p_basis.is_empty() {
        let hm = hilbert_mumford(&alg, &v, &r.growth)?;
        obj.insert("hilbert_mumford".into(), json!(hm.value));
        obj.insert("hilbert_mumford_certificate".into(), json!(hm.certificate));
    }
    let opts = GrowthOptions {
        with_hilbert_mumford: false,
        ..r.growth.clone()
    };
    match growth_exponents(&alg, &stab, &opts) {
        Ok(ge) => {
            obj.insert("status".into(), json!("ok"));
            obj.insert("lambda_minus".into(), json!(ge.lambda_minus));
            obj.insert("lambda_plus".into(), json!(ge.lambda_plus));
            obj.insert("argmin_x".into(), json!(ge.argmin_x));
            obj.insert("argmax_x".into(), json!(ge.argmax_x));
            obj.insert("restarts".into(), json!(ge.restarts));
            obj.insert("converged".into(), json!(ge.converged));
        }
        Err(Error::BoundedOrbit) => {
            obj.insert("status".into(), json!("BoundedOrbit"));
            obj.insert("message".into(), json!(Error::BoundedOrbit.to_string()));
        }
        Err(e) => return Err(e.into()),
    }
    obj.insert("config".into(), serde_json::to_value(&r)?);
    emit(out, loaded.json.as_deref())?;
    Ok(Outcome::Ok)
}

fn classify(args: &VectorArgs) -> Result<Outcome> {
    let loaded = load_config(&args.common)?;
    let r = loaded.cfg.resolved();
    let (alg, v) = resolve_input(&args.algebra, &args.vector, &r)?;
    let verdict = classify_orbit(&alg, &v, &r.classify_options())?;
    let out = json!({
        "algebra": alg.name,
        "vector": v,
        "verdict": verdict.kind,
        "evidence": verdict.evidence,
        "config": r,
    });
    emit(out, loaded.json.as_deref())?;
    Ok(Outcome::Ok)
}

fn print_verdict(rep: &ExperimentReport) -> Result<()> {
    let v = match rep.verdict {
        Verdict::Pass => "PASS",
        Verdict::Fail => "FAIL",
        Verdict::Informational => "INFORMATIONAL",
    };
    say(&format!(
        "experiment {}: {v} ({} records)",
        rep.name,
        rep.records.len()
    ))?;
    for c in &rep.checks {
        let tag = match (c.pass, c.gating) {
            (true, _) => "ok",
            (false, true) => "FAIL",
            (false, false) => "note",
        };
        say(&format!("  [{tag}] {}: {}", c.name, c.detail))?;
    }
    Ok(())
}

fn write_report(rep: &ExperimentReport, loaded: &Loaded) -> Result<()> {
    if let Some(p) = &loaded.json {
        write_file(p, &rep.to_json())?;
    }
    if let Some(p) = &loaded.csv {
        write_file(p, &rep.to_csv()?)?;
    }
    Ok(())
}

fn experiment(args: ExperimentArgs) -> Result<Outcome> {
    if !EXPERIMENTS.contains(&args.name.as_str()) {
        bail!(
            "unknown experiment '{}' (expected one of {})",
            args.name,
            EXPERIMENTS.join(", ")
        );
    }
    let mut loaded = load_config(&args.common)?;
    if let Some(ns) = args.n_list {
        loaded.cfg.experiment.n_list = ns;
    }
    if let Some(s) = args.smax {
        loaded.cfg.experiment.appendix_s_max = s;
    }
    let input = if args.name == "appendix1" {
        None
    } else {
        let (Some(a), Some(v)) = (&args.algebra, &args.vector) else {
            bail!("experiment {} needs --algebra and --vector", args.name);
        };
        Some(resolve_input(a, v, &loaded.cfg)?)
    };
    let rep = verify::run_experiment(
        &args.name,
        input.as_ref().map(|(a, v)| (a, v.as_slice())),
        &loaded.cfg,
    )?;
    write_report(&rep, &loaded)?;
    print_verdict(&rep)?;
    Ok(if rep.passed() {
        Outcome::Ok
    } else {
        Outcome::ExperimentFailed
    })
}

fn replay(path: &Path, common: &CommonArgs) -> Result<Outcome> {
    let loaded = load_config(common)?;
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let original = ExperimentReport::from_json(&text)?;
    let again = verify::replay(&original)?;
    write_report(&again, &loaded)?;
    if again.to_json_value() == original.to_json_value() {
        say(&format!("replay {}: identical payload", original.name))?;
        Ok(Outcome::Ok)
    } else {
        say(&format!("replay {}: payload differs", original.name))?;
        Ok(Outcome::ExperimentFailed)
    }
}
