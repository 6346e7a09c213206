//! Moment map, descent to minimal vectors, and orbit classification.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::growth::{growth_exponents, GrowthOptions};
use crate::liealg::{bounded_orbit_test, cartan_split, stabilizer_data, CartanSplit, LieAlgebra};
use crate::numcore::{self, dot, expm, Matrix};

/// `m(v)`: the symmetric algebra element with `<m(v), X> = <X v, v>` for all `X`.
#[derive(Clone, Debug, Serialize)]
pub struct MomentValue {
    pub m: Matrix,
    /// Coordinates in the orthonormal symmetric basis of the Cartan split.
    pub coords: Vec<f64>,
    pub residual_norm: f64,
}

pub fn moment_map(split: &CartanSplit, v: &[f64]) -> MomentValue {
    let coords: Vec<f64> = split
        .p_basis
        .iter()
        .map(|p| dot(&p.mul_vec(v), v))
        .collect();
    let n = v.len();
    let m = if coords.is_empty() {
        Matrix::zeros(n)
    } else {
        numcore::combine(&coords, &split.p_basis)
    };
    let residual_norm = numcore::norm(&coords);
    MomentValue {
        m,
        coords,
        residual_norm,
    }
}

/// `|m(v)| <= tol |v|^2`
pub fn is_minimal(alg: &LieAlgebra, v: &[f64], tol: f64) -> Result<bool> {
    if v.len() != alg.n() {
        return Err(Error::DimensionMismatch {
            expected: alg.n(),
            got: v.len(),
        });
    }
    let vv = dot(v, v);
    if vv == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(moment_map(&cartan_split(alg), v).residual_norm <= tol * vv)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FlowOptions {
    /// Stop when `|m(w)| <= eps_m |w|^2`.
    pub eps_m: f64,
    /// Stop when `|w| <= eps_collapse |v|`.
    pub eps_collapse: f64,
    pub max_iter: usize,
    /// First trial step, in units of `1/|w|^2` (the moment map is quadratic in `w`).
    pub initial_step: f64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self {
            eps_m: 1e-8,
            eps_collapse: 1e-6,
            max_iter: 10_000,
            initial_step: 0.1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FlowStatus {
    ConvergedMinimal,
    NormCollapse,
    MaxIterations,
}

#[derive(Clone, Debug, Serialize)]
pub struct FlowStep {
    pub w: Vec<f64>,
    pub moment_norm: f64,
    /// Step `η` used to reach this iterate (0 for the starting point).
    pub step_size: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FlowTrace {
    pub iterates: Vec<FlowStep>,
    pub terminal: Vec<f64>,
    pub status: FlowStatus,
}

impl FlowTrace {
    pub fn iterations(&self) -> usize {
        self.iterates.len() - 1
    }
}

/// Relative size below which a change of `|w|^2` is not resolved in `f64`.
const ROUNDING_FLOOR: f64 = 1e-13;

/// Descent of `|w|^2` along the orbit: `w <- exp(-η m(w)) w` with
/// backtracking on `|w|^2`. The directional derivative is `-2η|m(w)|^2`,
/// so a decreasing step exists until `m(w) = 0`.
pub fn kempf_ness_flow(alg: &LieAlgebra, v: &[f64], opts: &FlowOptions) -> Result<FlowTrace> {
    if v.len() != alg.n() {
        return Err(Error::DimensionMismatch {
            expected: alg.n(),
            got: v.len(),
        });
    }
    let v0 = numcore::norm(v);
    if v0 == 0.0 {
        return Err(Error::ZeroVector);
    }
    let split = cartan_split(alg);
    let mut w = v.to_vec();
    let mut mom = moment_map(&split, &w);
    let mut iterates = vec![FlowStep {
        w: w.clone(),
        moment_norm: mom.residual_norm,
        step_size: 0.0,
    }];
    let mut scale = opts.initial_step;
    let status = loop {
        let ww = dot(&w, &w);
        if mom.residual_norm <= opts.eps_m * ww {
            break FlowStatus::ConvergedMinimal;
        }
        if ww.sqrt() <= opts.eps_collapse * v0 {
            break FlowStatus::NormCollapse;
        }
        if iterates.len() > opts.max_iter {
            break FlowStatus::MaxIterations;
        }
        let m2 = mom.residual_norm * mom.residual_norm;
        let mut accepted = None;
        while scale > 1e-16 {
            let eta = scale / ww;
            let mut next = expm(&mom.m.scale(-eta)).mul_vec(&w);
            // |next|^2 - |w|^2 as (next - w).(next + w)
            let diff: f64 = next.iter().zip(&w).map(|(a, b)| (a - b) * (a + b)).sum();
            let predicted = 2.0 * eta * m2;
            if predicted > ROUNDING_FLOOR * ww {
                if diff <= -1e-4 * predicted && diff < 0.0 {
                    accepted = Some((next, eta));
                    break;
                }
            } else {
                // The decrease of |w|^2 is below what rounding can resolve:
                // accept a step that shrinks |m| and clamp the norm, which
                // moves w by at most a rounding error.
                let m_next = moment_map(&split, &next).residual_norm;
                if m_next < mom.residual_norm {
                    let nn = dot(&next, &next);
                    if nn > ww {
                        let r = (ww / nn).sqrt();
                        next.iter_mut().for_each(|x| *x *= r);
                    }
                    accepted = Some((next, eta));
                    break;
                }
            }
            scale *= 0.5;
        }
        let Some((next, eta)) = accepted else {
            break FlowStatus::MaxIterations;
        };
        w = next;
        mom = moment_map(&split, &w);
        iterates.push(FlowStep {
            w: w.clone(),
            moment_norm: mom.residual_norm,
            step_size: eta,
        });
        scale = (scale * 2.0).min(1e3);
    };
    Ok(FlowTrace {
        terminal: w,
        iterates,
        status,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerdictKind {
    Bounded,
    ClosedUnbounded,
    NotClosed,
    Undetermined,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Thresholds {
    pub eps_m: f64,
    pub eps_collapse: f64,
    pub eps_lambda: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NormHistory {
    pub initial_norm: f64,
    pub final_norm: f64,
    pub iterations: usize,
    pub status: Option<FlowStatus>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerdictEvidence {
    pub lambda_minus_at_w: Option<f64>,
    /// `|m(w)| / |w|^2` at the terminal point.
    pub moment_residual: f64,
    pub norm_history: NormHistory,
    pub thresholds: Thresholds,
    pub terminal: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OrbitVerdict {
    pub kind: VerdictKind,
    pub evidence: VerdictEvidence,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifyOptions {
    pub flow: FlowOptions,
    pub growth: GrowthOptions,
    /// Dead zone around `λ⁻ = 0` in which no verdict is given.
    pub eps_lambda: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            flow: FlowOptions::default(),
            growth: GrowthOptions::default(),
            eps_lambda: 1e-3,
        }
    }
}

/// Bounded / closed / not closed, decided in order by: the bounded-orbit
/// test; collapse of the flow (a nonzero vector cannot be mapped to 0 by an
/// invertible map, so a collapsing flow shows `0` lies in the closure but
/// not in the orbit); the sign of `λ⁻` at the terminal minimal point.
pub fn classify_orbit(alg: &LieAlgebra, v: &[f64], opts: &ClassifyOptions) -> Result<OrbitVerdict> {
    let split = cartan_split(alg);
    let stab = stabilizer_data(alg, &split, v)?;
    let thresholds = Thresholds {
        eps_m: opts.flow.eps_m,
        eps_collapse: opts.flow.eps_collapse,
        eps_lambda: opts.eps_lambda,
    };
    let v_norm = numcore::norm(v);
    if bounded_orbit_test(&split, &stab)? {
        let residual = moment_map(&split, v).residual_norm / (v_norm * v_norm);
        return Ok(OrbitVerdict {
            kind: VerdictKind::Bounded,
            evidence: VerdictEvidence {
                lambda_minus_at_w: None,
                moment_residual: residual,
                norm_history: NormHistory {
                    initial_norm: v_norm,
                    final_norm: v_norm,
                    iterations: 0,
                    status: None,
                },
                thresholds,
                terminal: v.to_vec(),
            },
        });
    }
    let trace = kempf_ness_flow(alg, v, &opts.flow)?;
    let w = trace.terminal.clone();
    let w_norm = numcore::norm(&w);
    let residual = trace.iterates.last().expect("nonempty").moment_norm / (w_norm * w_norm);
    let history = NormHistory {
        initial_norm: v_norm,
        final_norm: w_norm,
        iterations: trace.iterations(),
        status: Some(trace.status),
    };
    let mut evidence = VerdictEvidence {
        lambda_minus_at_w: None,
        moment_residual: residual,
        norm_history: history,
        thresholds,
        terminal: w.clone(),
    };
    let kind = match trace.status {
        FlowStatus::NormCollapse => VerdictKind::NotClosed,
        FlowStatus::MaxIterations => VerdictKind::Undetermined,
        FlowStatus::ConvergedMinimal => {
            let stab_w = stabilizer_data(alg, &split, &w)?;
            let growth = GrowthOptions {
                with_hilbert_mumford: false,
                ..opts.growth.clone()
            };
            let lm = growth_exponents(alg, &stab_w, &growth)?.lambda_minus;
            evidence.lambda_minus_at_w = Some(lm);
            if lm > opts.eps_lambda {
                VerdictKind::ClosedUnbounded
            } else if lm < -opts.eps_lambda {
                VerdictKind::NotClosed
            } else {
                VerdictKind::Undetermined
            }
        }
    };
    Ok(OrbitVerdict { kind, evidence })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ad_sl3() -> (LieAlgebra, Vec<f64>) {
        let alg = catalog::lookup("ad-sl3").unwrap().algebra;
        let v = catalog::parse_vector(&alg, "E23-E32").unwrap();
        (alg, v)
    }

    #[test]
    fn moment_of_e1_in_sl2() {
        let alg = catalog::sl(2);
        let m = moment_map(&cartan_split(&alg), &[1.0, 0.0]);
        assert!((&m.m - &Matrix::diag(&[0.5, -0.5])).norm() < 1e-15);
        assert!(!is_minimal(&alg, &[1.0, 0.0], 1e-8).unwrap());
    }

    #[test]
    fn normal_matrix_is_minimal_for_adjoint_action() {
        let (alg, v) = ad_sl3();
        assert!(moment_map(&cartan_split(&alg), &v).residual_norm <= 1e-10);
        assert!(is_minimal(&alg, &v, 1e-8).unwrap());
        // a fixed vector has zero moment
        let id = catalog::parse_vector(&alg, "E11+E22+E33").unwrap();
        assert!(moment_map(&cartan_split(&alg), &id).residual_norm < 1e-15);
    }

    #[test]
    fn moment_pairs_like_the_action() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for name in ["sl2", "gl2", "ad-sl3", "sl2-quad", "so2scale"] {
            let alg = catalog::lookup(name).unwrap().algebra;
            let split = cartan_split(&alg);
            for _ in 0..20 {
                let v: Vec<f64> = (0..alg.n()).map(|_| rng.random_range(-1.0..1.0)).collect();
                let vv = dot(&v, &v);
                let m = moment_map(&split, &v);
                for x in alg.basis() {
                    let lhs = numcore::frob_inner(&m.m, x).unwrap();
                    let rhs = dot(&x.mul_vec(&v), &v);
                    assert!((lhs - rhs).abs() <= 1e-10 * vv * x.norm());
                }
                for k in &split.k_basis {
                    assert!(numcore::frob_inner(&m.m, k).unwrap().abs() < 1e-12);
                }
                let r = rng.random_range(-3.0..3.0);
                let rv: Vec<f64> = v.iter().map(|a| r * a).collect();
                let mr = moment_map(&split, &rv);
                assert!((&mr.m - &m.m.scale(r * r)).norm() <= 1e-12 * (1.0 + mr.m.norm()));
            }
        }
    }

    #[test]
    fn flow_collapses_e1() {
        let alg = catalog::sl(2);
        let tr = kempf_ness_flow(&alg, &[1.0, 0.0], &FlowOptions::default()).unwrap();
        assert_eq!(tr.status, FlowStatus::NormCollapse);
        for pair in tr.iterates.windows(2) {
            assert!(dot(&pair[1].w, &pair[1].w) < dot(&pair[0].w, &pair[0].w));
        }
    }

    #[test]
    fn flow_stops_immediately_at_minimal_vector() {
        let (alg, v) = ad_sl3();
        let tr = kempf_ness_flow(&alg, &v, &FlowOptions::default()).unwrap();
        assert_eq!(tr.status, FlowStatus::ConvergedMinimal);
        assert_eq!(tr.iterations(), 0);
        assert_eq!(tr.terminal, v);
    }

    #[test]
    fn flow_finds_minimal_point_of_a_closed_orbit() {
        let (alg, v) = ad_sl3();
        let split = cartan_split(&alg);
        let g = expm(&numcore::combine(
            &[0.4, -0.2, 0.3, 0.1, 0.2],
            &split.p_basis,
        ));
        let gv = g.mul_vec(&v);
        // tight residual so the stabilizer split below is resolved at the rank tolerance
        let opts = FlowOptions {
            eps_m: 1e-13,
            ..FlowOptions::default()
        };
        let tr = kempf_ness_flow(&alg, &gv, &opts).unwrap();
        assert_eq!(tr.status, FlowStatus::ConvergedMinimal);
        for pair in tr.iterates.windows(2) {
            assert!(dot(&pair[1].w, &pair[1].w) <= dot(&pair[0].w, &pair[0].w));
        }
        let w = &tr.terminal;
        // minimal vectors of one orbit share their norm
        assert!((numcore::norm(w) - numcore::norm(&v)).abs() < 1e-6);
        // the stabilizer of a minimal vector splits into skew and symmetric parts
        let st = stabilizer_data(&alg, &split, w).unwrap();
        let (gv_dim, kv, pv, _) = st.dims();
        assert_eq!(kv + pv, gv_dim);
        // small rotations stay minimal to first order
        let k = expm(&numcore::combine(&[1e-3, -2e-3, 5e-4], &split.k_basis));
        let kw = k.mul_vec(w);
        assert!(is_minimal(&alg, &kw, 1e-6).unwrap());
    }

    #[test]
    fn derivative_of_norm_is_twice_the_moment_pairing() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (alg, _) = ad_sl3();
        let split = cartan_split(&alg);
        for _ in 0..100 {
            let v: Vec<f64> = (0..alg.n()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let c: Vec<f64> = (0..alg.dim())
                .map(|_| rng.random_range(-1.0..1.0))
                .collect();
            let x = alg.from_coords(&c);
            let h = 1e-5;
            let f = |t: f64| {
                let w = expm(&x.scale(t)).mul_vec(&v);
                dot(&w, &w)
            };
            let fd = (f(h) - f(-h)) / (2.0 * h);
            let an = 2.0 * numcore::frob_inner(&moment_map(&split, &v).m, &x).unwrap();
            assert!((fd - an).abs() <= 1e-6 * an.abs().max(1.0));
        }
    }

    #[test]
    fn classifier_examples() {
        let opts = ClassifyOptions::default();
        let sl2 = catalog::sl(2);
        assert_eq!(
            classify_orbit(&sl2, &[1.0, 0.0], &opts).unwrap().kind,
            VerdictKind::NotClosed
        );

        let (alg, v) = ad_sl3();
        let verdict = classify_orbit(&alg, &v, &opts).unwrap();
        assert_eq!(verdict.kind, VerdictKind::ClosedUnbounded);
        assert!(verdict.evidence.lambda_minus_at_w.unwrap() > 1e-3);

        let so2 = catalog::lookup("so2scale").unwrap().algebra;
        assert_eq!(
            classify_orbit(&so2, &[1.0, 0.0, 0.0, 0.0], &opts)
                .unwrap()
                .kind,
            VerdictKind::Bounded
        );

        // positive definite forms of determinant 1: closed, unbounded
        let quad = catalog::lookup("sl2-quad").unwrap().algebra;
        assert_eq!(
            classify_orbit(&quad, &[1.0, 1.0, 0.0], &opts).unwrap().kind,
            VerdictKind::ClosedUnbounded
        );
        // x^2 is degenerate: scaling it down along the orbit reaches 0
        assert_eq!(
            classify_orbit(&quad, &[1.0, 0.0, 0.0], &opts).unwrap().kind,
            VerdictKind::NotClosed
        );
    }

    #[test]
    fn verdict_serializes() {
        let v = classify_orbit(&catalog::sl(2), &[1.0, 0.0], &ClassifyOptions::default()).unwrap();
        let s = serde_json::to_string(&v).unwrap();
        let back: OrbitVerdict = serde_json::from_str(&s).unwrap();
        assert_eq!(back.kind, VerdictKind::NotClosed);
    }
}
