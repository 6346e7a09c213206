use serde_json::json;

use super::{config_value, inputs, record, Check, ExperimentReport, Verdict};
use crate::catalog;
use crate::config::RunConfig;
use crate::error::Result;
use crate::geometry::FactoredElement;
use crate::growth::{growth_exponents, lambda_x};
use crate::liealg::{adjoint_matrix, cartan_split, stabilizer_data, LieAlgebra};
use crate::numcore::{self, Matrix, Tolerances};

/// Adjoint `sl(3)` on `M(3) = R^9`, `v = E23 - E32`, and the matrix of
/// conjugation by the permutation-reflection `k`.
pub struct Appendix1Setup {
    pub alg: LieAlgebra,
    pub v: Vec<f64>,
    pub k: Matrix,
    /// `X -> k X k^t` on row-major `M(3)`, i.e. `k ⊗ k`.
    pub rho_k: Matrix,
}

pub fn appendix1_setup() -> Result<Appendix1Setup> {
    let entry = catalog::lookup("ad-sl3")?;
    let k = Matrix::from_rows(&[&[0.0, 1.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 0.0, -1.0]])?;
    let mut rho_k = Matrix::zeros(9);
    for (i, j, a, b) in (0..81).map(|e| (e / 27, (e / 9) % 3, (e / 3) % 3, e % 3)) {
        rho_k[(3 * i + j, 3 * a + b)] = k[(i, a)] * k[(j, b)];
    }
    let v = entry.vectors[0].1.clone();
    Ok(Appendix1Setup {
        alg: entry.algebra,
        v,
        k,
        rho_k,
    })
}

/// `B_N = diag(N+2, 2, 1)` and `B'_N = k B_N k`.
fn generators(setup: &Appendix1Setup, n: u32) -> (Matrix, Matrix) {
    let b = Matrix::diag(&[n as f64 + 2.0, 2.0, 1.0]);
    let b_prime = &(&setup.k * &b) * &setup.k;
    (b, b_prime)
}

/// `(λ_{ad B_N}(v), λ_{ad B'_N}(v))`, exactly `(1, N+1)`.
pub fn appendix1_exact_exponents(
    setup: &Appendix1Setup,
    n: u32,
    tol: &Tolerances,
) -> Result<(f64, f64)> {
    let (b, bp) = generators(setup, n);
    Ok((
        lambda_x(&setup.v, &adjoint_matrix(&b), tol)?,
        lambda_x(&setup.v, &adjoint_matrix(&bp), tol)?,
    ))
}

/// `(log|g v|, log|g^t v|)` for `g = ρ(k) exp(s ad B_N)`.
pub fn appendix1_log_norms(setup: &Appendix1Setup, n: u32, s: f64) -> Result<(f64, f64)> {
    let (b, _) = generators(setup, n);
    let sa = adjoint_matrix(&b).scale(s);
    let id = Matrix::identity(9);
    let g = FactoredElement::new(setup.rho_k.clone(), sa.clone(), id.clone())?;
    let gt = FactoredElement::new(id, sa, setup.rho_k.transpose())?;
    Ok((g.log_norm_apply(&setup.v), gt.log_norm_apply(&setup.v)))
}

/// `½ log(e^{2a} + e^{-2a})` without overflow.
fn log_cosh_form(a: f64) -> f64 {
    let a = a.abs();
    a + 0.5 * (-4.0 * a).exp().ln_1p()
}

pub fn run_appendix1(cfg: &RunConfig) -> Result<ExperimentReport> {
    let r = cfg.resolved();
    let ex = &r.experiment;
    let setup = appendix1_setup()?;
    let split = cartan_split(&setup.alg);
    let stab = stabilizer_data(&setup.alg, &split, &setup.v)?;
    let mut gopts = r.growth.clone();
    gopts.with_hilbert_mumford = false;
    let lambda_plus = growth_exponents(&setup.alg, &stab, &gopts)?.lambda_plus;
    let log_v = numcore::norm(&setup.v).ln();
    let s_max = ex.appendix_s_max;
    let s_grid = [s_max / 8.0, s_max / 4.0, s_max / 2.0, s_max];

    let mut rep =
        ExperimentReport::new("appendix1", config_value(&r), inputs(&setup.alg, &setup.v));
    let (mut exact_ok, mut ratio_ok, mut closed_ok, mut lb_ok, mut member_ok) =
        (true, true, true, true, true);
    let mut worst_ratio: f64 = 0.0;
    let mut ratios_at_max = Vec::new();
    for &n in &ex.n_list {
        let (b, _) = generators(&setup, n);
        let ad_b = adjoint_matrix(&b);
        member_ok &=
            setup.alg.membership_residual(&ad_b) <= 1e-10 * ad_b.norm() && ad_b.asymmetry() == 0.0;
        let (lb, lbp) = appendix1_exact_exponents(&setup, n, &r.tol)?;
        exact_ok &= (lb - 1.0).abs() <= 1e-10 && (lbp - (n as f64 + 1.0)).abs() <= 1e-10;
        let target = n as f64 + 1.0;
        let mut prev_lb = f64::NEG_INFINITY;
        for &s in &s_grid {
            let (lg, lgt) = appendix1_log_norms(&setup, n, s)?;
            // |g v|^2 = e^{2s} + e^{-2s}, |g^t v|^2 = e^{2s(N+1)} + e^{-2s(N+1)}
            let (cf, cft) = (log_cosh_form(s), log_cosh_form(s * target));
            closed_ok &=
                (lg - cf).abs() <= 1e-9 * cf.max(1.0) && (lgt - cft).abs() <= 1e-9 * cft.max(1.0);
            let ratio = lgt / lg;
            let rel_err = (ratio - target).abs() / target;
            let lower = (lg - log_v) / (lambda_plus + ex.eps_exp);
            lb_ok &= lower > prev_lb;
            prev_lb = lower;
            if s == s_max {
                worst_ratio = worst_ratio.max(rel_err);
                ratio_ok &= rel_err <= ex.ratio_tol;
                ratios_at_max.push(json!({ "N": n, "ratio": ratio }));
            }
            rep.records.push(record(json!({
                "row": rep.records.len(),
                "N": n,
                "s": s,
                "log_norm_g": lg,
                "log_norm_gt": lgt,
                "closed_form_g": cf,
                "closed_form_gt": cft,
                "ratio": ratio,
                "target": target,
                "rel_err": rel_err,
                "lambda_b": lb,
                "lambda_b_prime": lbp,
                "dist_lower_bound": lower,
            })));
        }
    }
    rep.checks.push(Check::gating(
        "generators_in_algebra",
        member_ok,
        "ad B_N is symmetric and lies in the adjoint image".into(),
    ));
    rep.checks.push(Check::gating(
        "exact_exponents",
        exact_ok,
        "lambda_{ad B_N}(v) = 1 and lambda_{ad B'_N}(v) = N+1 to 1e-10".into(),
    ));
    rep.checks.push(Check::gating(
        "closed_form",
        closed_ok,
        "log-norms match the two-term closed forms to 1e-9".into(),
    ));
    rep.checks.push(Check::gating(
        "ratio",
        ratio_ok,
        format!("at s = {s_max} the largest relative deviation from N+1 is {worst_ratio:.3e} (tolerance {})", ex.ratio_tol),
    ));
    rep.checks.push(Check::gating(
        "distance_lower_bound_grows",
        lb_ok,
        format!("log(|g v|/|v|)/(lambda+ + eps) increases along s in {s_grid:?}"),
    ));
    let sm = &mut rep.summary;
    sm.insert("lambda_plus".into(), json!(lambda_plus));
    sm.insert("ratios_at_s_max".into(), json!(ratios_at_max));
    sm.insert(
        "conclusion".into(),
        json!("the transposed-to-direct log-norm ratio approaches N+1 and so is not bounded by any constant uniform in N"),
    );
    rep.conclude(Verdict::Informational);
    Ok(rep)
}
