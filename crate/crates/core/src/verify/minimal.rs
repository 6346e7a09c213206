use rayon::prelude::*;
use serde_json::json;

use super::{
    combination, config_value, exp_combination, extremes, finite, gaussian, inputs, record, rng,
    row_seed, unit, Check, ExperimentReport, Record, Verdict, STREAM_LEMMA95, STREAM_PROP_ORBIT,
    STREAM_PROP_PERTURB, STREAM_PROP_RATIO,
};
use crate::config::{derive_seed, RunConfig};
use crate::error::{Error, Result};
use crate::geometry::{dist_to_kgv, FactoredElement};
use crate::growth::{dyn_lambda, growth_exponents, lambda_x, GrowthOptions};
use crate::liealg::{cartan_split, stabilizer_data, LieAlgebra, StabilizerData};
use crate::numcore;
use crate::orbitflow::is_minimal;

fn require_minimal(alg: &LieAlgebra, v: &[f64], cfg: &RunConfig) -> Result<()> {
    if is_minimal(alg, v, cfg.tol.comp)? {
        Ok(())
    } else {
        Err(Error::Rejected(format!(
            "vector is not minimal: |m(v)| exceeds {:e} |v|^2 (run `classify` to flow to a minimal vector)",
            cfg.tol.comp
        )))
    }
}

/// For a minimal unit `v` and sampled unit `X` in the symmetric part,
/// checks that `φ_X(s) = log|exp(sX) v| / s` is non-decreasing on a grid
/// in `(0, s_max]` and records its distance to `λ_X(v)` at `s_max`.
pub fn run_lemma95(alg: &LieAlgebra, v: &[f64], cfg: &RunConfig) -> Result<ExperimentReport> {
    let r = cfg.resolved();
    let ex = &r.experiment;
    require_minimal(alg, v, &r)?;
    let u = numcore::normalized(v);
    let split = cartan_split(alg);
    if split.p_basis.is_empty() {
        return Err(Error::CompactGroup);
    }
    if ex.lemma_steps < 2 || !(ex.s_max > 0.0) {
        return Err(Error::InvalidInput(
            "lemma95 needs lemma_steps >= 2 and s_max > 0".into(),
        ));
    }
    let grid: Vec<f64> = (1..=ex.lemma_steps)
        .map(|j| ex.s_max * j as f64 / ex.lemma_steps as f64)
        .collect();

    let rows: Vec<Result<Record>> = (0..ex.lemma_rays)
        .into_par_iter()
        .map(|i| {
            let seed = row_seed(r.seed, STREAM_LEMMA95, i);
            let coords = unit(&mut rng(seed), split.p_basis.len());
            let x = combination(&coords, &split.p_basis);
            if numcore::norm(&x.mul_vec(&u)) <= 1e-10 {
                return Ok(record(
                    json!({ "row": i, "seed": seed, "x_coords": coords, "skipped": true }),
                ));
            }
            let phi = grid
                .iter()
                .map(|&s| dyn_lambda(&u, &x, s, &r.tol))
                .collect::<Result<Vec<f64>>>()?;
            let min_diff = phi
                .windows(2)
                .map(|w| w[1] - w[0])
                .fold(f64::INFINITY, f64::min);
            let lx = lambda_x(&u, &x, &r.tol)?;
            let terminal = *phi.last().expect("grid is non-empty");
            Ok(record(json!({
                "row": i,
                "seed": seed,
                "x_coords": coords,
                "skipped": false,
                "lambda_x": lx,
                "phi_first": phi[0],
                "phi_terminal": terminal,
                "min_diff": min_diff,
                "monotone": min_diff >= -ex.mono_tol,
                "terminal_gap": lx - terminal,
                "terminal_ok": (lx - terminal).abs() <= ex.terminal_tol,
            })))
        })
        .collect();

    let mut rep = ExperimentReport::new("lemma95", config_value(&r), inputs(alg, v));
    for row in rows {
        rep.records.push(row?);
    }
    let used: Vec<&Record> = rep
        .records
        .iter()
        .filter(|row| row["skipped"] == false)
        .collect();
    let mono_failures = used.iter().filter(|row| row["monotone"] != true).count();
    let term_failures = used.iter().filter(|row| row["terminal_ok"] != true).count();
    let (worst_diff, _) = extremes(used.iter().filter_map(|row| row["min_diff"].as_f64()));
    let (gap_lo, gap_hi) = extremes(used.iter().filter_map(|row| row["terminal_gap"].as_f64()));
    rep.checks.push(Check::gating(
        "monotone",
        !used.is_empty() && mono_failures == 0,
        format!(
            "{mono_failures} of {} rays with a finite difference below -{:e}; smallest difference {worst_diff:.3e}",
            used.len(),
            ex.mono_tol
        ),
    ));
    rep.checks.push(Check::informational(
        "terminal",
        !used.is_empty() && term_failures == 0,
        format!(
            "{term_failures} of {} rays with |lambda_X - phi(s_max)| > {}; gaps in [{gap_lo:.4e}, {gap_hi:.4e}]",
            used.len(),
            ex.terminal_tol
        ),
    ));
    let sm = &mut rep.summary;
    sm.insert("rays_used".into(), json!(used.len()));
    sm.insert("rays_skipped".into(), json!(rep.records.len() - used.len()));
    sm.insert("smallest_difference".into(), json!(finite(worst_diff)));
    sm.insert("terminal_gap_max".into(), json!(finite(gap_hi)));
    rep.conclude(Verdict::Pass);
    Ok(rep)
}

struct OrbitSample {
    w: Vec<f64>,
    stab: StabilizerData,
    lambda_minus: f64,
    seed: u64,
}

/// Lower semicontinuity and positivity of `λ⁻` on a sampled set of minimal
/// vectors (the `K`-orbit of `v`), and a searched radius beyond which
/// growth ratios exceed half the minimum.
pub fn run_prop91_94(alg: &LieAlgebra, v: &[f64], cfg: &RunConfig) -> Result<ExperimentReport> {
    let r = cfg.resolved();
    let ex = &r.experiment;
    require_minimal(alg, v, &r)?;
    let u = numcore::normalized(v);
    let split = cartan_split(alg);
    let n = u.len();
    let gopts = GrowthOptions {
        restarts: ex.prop_restarts,
        with_hilbert_mumford: false,
        ..r.growth.clone()
    };
    let lambda_minus = |stab: &StabilizerData| -> Result<f64> {
        Ok(growth_exponents(alg, stab, &gopts)?.lambda_minus)
    };

    let orbit: Vec<Result<OrbitSample>> = (0..ex.prop_samples.max(1))
        .into_par_iter()
        .map(|i| {
            let seed = row_seed(r.seed, STREAM_PROP_ORBIT, i);
            let w = if i == 0 {
                u.clone()
            } else {
                let k = exp_combination(
                    &gaussian(&mut rng(seed), split.k_basis.len()),
                    &split.k_basis,
                    n,
                );
                k.mul_vec(&u)
            };
            let stab = stabilizer_data(alg, &split, &w)?;
            let lambda_minus = lambda_minus(&stab)?;
            Ok(OrbitSample {
                w,
                stab,
                lambda_minus,
                seed,
            })
        })
        .collect();
    let orbit = orbit.into_iter().collect::<Result<Vec<_>>>()?;
    let (lmin, lmax) = extremes(orbit.iter().map(|s| s.lambda_minus));
    let base_dim = orbit[0].stab.gv_basis.len();

    let mut rep = ExperimentReport::new("prop91-94", config_value(&r), inputs(alg, v));
    for (i, s) in orbit.iter().enumerate() {
        rep.records.push(record(json!({
            "row": rep.records.len(),
            "kind": "orbit",
            "sample": i,
            "seed": s.seed,
            "stabilizer_dim": s.stab.gv_basis.len(),
            "lambda_minus": s.lambda_minus,
            "vector": s.w,
        })));
    }

    let pairs: Vec<(usize, usize)> = (0..orbit.len())
        .flat_map(|i| (0..ex.prop_perturbations).map(move |j| (i, j)))
        .collect();
    let perturbed: Vec<Result<Record>> = pairs
        .par_iter()
        .enumerate()
        .map(|(idx, &(i, j))| {
            let seed = row_seed(r.seed, STREAM_PROP_PERTURB, idx);
            let dir = unit(&mut rng(seed), n);
            let w: Vec<f64> = orbit[i]
                .w
                .iter()
                .zip(&dir)
                .map(|(a, d)| a + ex.prop_delta * d)
                .collect();
            let stab = stabilizer_data(alg, &split, &w)?;
            let dim = stab.gv_basis.len();
            if dim != base_dim || stab.ptilde_basis.is_empty() {
                return Ok(record(json!({
                    "kind": "perturbation", "sample": i, "perturbation": j, "seed": seed,
                    "stabilizer_dim": dim, "excluded": true,
                })));
            }
            let lm = lambda_minus(&stab)?;
            Ok(record(json!({
                "kind": "perturbation",
                "sample": i,
                "perturbation": j,
                "seed": seed,
                "stabilizer_dim": dim,
                "excluded": false,
                "lambda_minus": lm,
                "lambda_minus_base": orbit[i].lambda_minus,
                "semicontinuous": lm >= orbit[i].lambda_minus - ex.eps_exp,
            })))
        })
        .collect();
    for row in perturbed {
        let mut row = row?;
        row.insert("row".into(), json!(rep.records.len()));
        rep.records.push(row);
    }

    let c_prime = 0.5 * lmin;
    let rays_per_sample = 2;
    let ratio_jobs: Vec<(usize, usize)> = (0..orbit.len())
        .flat_map(|i| (0..rays_per_sample).map(move |j| (i, j)))
        .collect();
    let ratio_rows: Vec<Result<Vec<Record>>> = ratio_jobs
        .par_iter()
        .enumerate()
        .map(|(idx, &(i, j))| {
            let s = &orbit[i];
            let seed = row_seed(r.seed, STREAM_PROP_RATIO, idx);
            let mut g = rng(seed);
            let x_coords = unit(&mut g, s.stab.ptilde_basis.len());
            let k_coords = gaussian(&mut g, split.k_basis.len());
            let h_coords = gaussian(&mut g, s.stab.gv_basis.len());
            let x = combination(&x_coords, &s.stab.ptilde_basis);
            let k = exp_combination(&k_coords, &split.k_basis, n);
            let h = exp_combination(&h_coords, &s.stab.gv_basis, n);
            let mut rows = Vec::new();
            for (m, &t) in ex.prop_t_sweep.iter().enumerate() {
                let el = FactoredElement::new(k.clone(), x.scale(t), h.clone())?;
                let growth = el.log_norm_apply(&s.w);
                let dopts = crate::geometry::DistanceOptions {
                    seed: derive_seed(seed, m as u64),
                    ..r.distance.clone()
                };
                let d = dist_to_kgv(&s.stab, &el, &dopts)?;
                rows.push(record(json!({
                    "kind": "ratio",
                    "sample": i,
                    "ray": j,
                    "seed": seed,
                    "t": t,
                    "log_growth": growth,
                    "dist": d.value,
                    "ratio": finite(growth / d.value),
                    "x_coords": x_coords,
                    "k_coords": k_coords,
                    "h_coords": h_coords,
                })));
            }
            Ok(rows)
        })
        .collect();
    for rows in ratio_rows {
        for mut row in rows? {
            row.insert("row".into(), json!(rep.records.len()));
            rep.records.push(row);
        }
    }

    // smallest sweep radius beyond which every sampled ratio exceeds c'
    let ratio_samples: Vec<(f64, f64)> = rep
        .records
        .iter()
        .filter(|row| row["kind"] == "ratio")
        .map(|row| {
            (
                row["dist"].as_f64().unwrap_or(0.0),
                row["ratio"].as_f64().unwrap_or(f64::NEG_INFINITY),
            )
        })
        .collect();
    let mut radii = ex.prop_t_sweep.clone();
    radii.sort_by(f64::total_cmp);
    let r0 = radii.iter().copied().find(|&r0| {
        let beyond: Vec<f64> = ratio_samples
            .iter()
            .filter(|(d, _)| *d >= r0)
            .map(|(_, q)| *q)
            .collect();
        !beyond.is_empty() && beyond.iter().all(|&q| q > c_prime)
    });

    let perturb_rows = || {
        rep.records
            .iter()
            .filter(|row| row["kind"] == "perturbation")
    };
    let used = perturb_rows()
        .filter(|row| row["excluded"] == false)
        .count();
    let excluded = perturb_rows().count() - used;
    let semi_failures = perturb_rows()
        .filter(|row| row["excluded"] == false && row["semicontinuous"] != true)
        .count();

    rep.checks.push(Check::gating(
        "k_invariance",
        lmax - lmin <= ex.prop_const_tol,
        format!(
            "lambda- over {} orbit samples in [{lmin:.9}, {lmax:.9}] (tolerance {})",
            orbit.len(),
            ex.prop_const_tol
        ),
    ));
    rep.checks.push(Check::gating(
        "minimum_positive",
        lmin > 0.0,
        format!("minimum lambda- = {lmin:.9}"),
    ));
    rep.checks.push(Check::gating(
        "semicontinuity",
        semi_failures == 0,
        format!(
            "{semi_failures} of {used} perturbations drop below lambda- - {}; {excluded} excluded",
            ex.eps_exp
        ),
    ));
    rep.checks.push(Check::gating(
        "ratio_threshold",
        r0.is_some(),
        match r0 {
            Some(r0) => {
                format!("all sampled ratios with distance >= {r0} exceed c' = {c_prime:.6}")
            }
            None => format!(
                "no sweep radius in {:?} separates the ratios from c' = {c_prime:.6}",
                ex.prop_t_sweep
            ),
        },
    ));
    let sm = &mut rep.summary;
    sm.insert("lambda_minus_min".into(), json!(lmin));
    sm.insert("lambda_minus_max".into(), json!(lmax));
    sm.insert("c_prime".into(), json!(c_prime));
    sm.insert("r0".into(), json!(r0));
    sm.insert("perturbations_excluded".into(), json!(excluded));
    rep.conclude(Verdict::Pass);
    Ok(rep)
}
