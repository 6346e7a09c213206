//! KP decompositions, symmetric rays, and right-invariant distances to
//! `K` and to `K·G_v`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::liealg::{CartanSplit, LieAlgebra, StabilizerData};
use crate::numcore::{
    self, expm, log_orthogonal, polar, svd_jacobi, sym_eig, Matrix, SymEigen, Tolerances,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    /// `g = k exp(X)`, `|X| = d_L(g, K)`
    Left,
    /// `g = exp(X) k`, `|X| = d_R(g, K)`
    Right,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KPDecomposition {
    pub k: Matrix,
    pub x: Matrix,
    pub side: Side,
    pub dist_to_k: f64,
    /// `|X - proj_g(X)| / |X|`; large values mean `g` was not built from the algebra.
    pub membership_residual: f64,
}

impl KPDecomposition {
    pub fn reconstruct(&self) -> Matrix {
        match self.side {
            Side::Left => &self.k * &expm(&self.x),
            Side::Right => &expm(&self.x) * &self.k,
        }
    }

    pub fn in_algebra(&self, tol: &Tolerances) -> bool {
        self.membership_residual <= tol.rank.sqrt()
    }
}

/// Polar factors of `g` (left) or of `g^t` transposed back (right). The
/// transpose exchanges the two invariant metrics, so the right-side `|X|`
/// is the right-invariant distance from `g` to `K`.
pub fn kp_decompose(alg: &LieAlgebra, g: &Matrix, side: Side) -> Result<KPDecomposition> {
    if g.n() != alg.n() {
        return Err(Error::DimensionMismatch {
            expected: alg.n(),
            got: g.n(),
        });
    }
    let (k, x) = match side {
        Side::Left => {
            let p = polar(g, &alg.tol)?;
            (p.k, p.x)
        }
        Side::Right => {
            let p = polar(&g.transpose(), &alg.tol)?;
            (p.k.transpose(), p.x)
        }
    };
    let dist = x.norm();
    let membership_residual = if dist == 0.0 {
        0.0
    } else {
        alg.membership_residual(&x) / dist
    };
    Ok(KPDecomposition {
        k,
        x,
        side,
        dist_to_k: dist,
        membership_residual,
    })
}

/// `(exp(tX), |t| |X|)`: a minimizing geodesic from the identity for symmetric `X`.
pub fn geodesic_ray(x: &Matrix, t: f64, tol: &Tolerances) -> Result<(Matrix, f64)> {
    let asym = x.asymmetry();
    if asym > tol.sym {
        return Err(Error::NotSymmetric(asym));
    }
    let xs = x.sym_part();
    Ok((expm(&xs.scale(t)), t.abs() * xs.norm()))
}

/// Group element kept as `k exp(S) h` (`k` orthogonal, `S` symmetric) so
/// that far-out elements keep their small singular values.
#[derive(Clone, Debug)]
pub struct FactoredElement {
    pub k: Matrix,
    pub s: Matrix,
    pub h: Matrix,
    s_eig: SymEigen,
}

impl FactoredElement {
    pub fn new(k: Matrix, s: Matrix, h: Matrix) -> Result<Self> {
        let s_eig = sym_eig(&s, &Tolerances::default())?;
        Ok(Self { k, s, h, s_eig })
    }

    pub fn dense(g: Matrix) -> Self {
        let n = g.n();
        Self::new(Matrix::identity(n), Matrix::zeros(n), g).expect("zero is symmetric")
    }

    pub fn matrix(&self) -> Matrix {
        &(&self.k * &expm(&self.s)) * &self.h
    }

    /// `log |g v|`, with `exp(S)` applied in its eigenbasis.
    pub fn log_norm_apply(&self, v: &[f64]) -> f64 {
        let c = self.s_eig.coords(&self.h.mul_vec(v));
        let top = self
            .s_eig
            .values
            .iter()
            .zip(&c)
            .filter(|(_, ci)| **ci != 0.0)
            .map(|(l, ci)| l + ci.abs().ln())
            .fold(f64::NEG_INFINITY, f64::max);
        let s: f64 = self
            .s_eig
            .values
            .iter()
            .zip(&c)
            .filter(|(_, ci)| **ci != 0.0)
            .map(|(l, ci)| (2.0 * (l + ci.abs().ln() - top)).exp())
            .sum();
        top + 0.5 * s.ln()
    }

    /// Logarithms of the singular values of `g · right`.
    ///
    /// These equal those of `B D` with `B = (h right)^t Q`, `D = exp(Λ)`, where
    /// `S = Q Λ Q^t`; one-sided Jacobi keeps relative accuracy on such
    /// column-scaled products.
    pub fn log_singular_values(&self, right: &Matrix) -> Vec<f64> {
        let c = &self.h * right;
        let mut b = &c.transpose() * &self.s_eig.vectors;
        let n = b.n();
        let logs_d = &self.s_eig.values;
        // scale columns by exp(λ_j - λ_max) and add λ_max back afterwards
        let top = logs_d[0];
        for i in 0..n {
            for j in 0..n {
                b[(i, j)] *= (logs_d[j] - top).exp();
            }
        }
        svd_jacobi(&b).sigma.iter().map(|s| s.ln() + top).collect()
    }

    /// Right-invariant distance from `g · right` to `K`.
    pub fn dist_to_k_right(&self, right: &Matrix) -> f64 {
        self.log_singular_values(right)
            .iter()
            .map(|l| l * l)
            .sum::<f64>()
            .sqrt()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DistanceOptions {
    pub restarts: usize,
    /// Random starting points are drawn uniformly from this ball in `g_v`.
    pub init_radius: f64,
    /// Pattern search stops once the step falls below this size.
    pub min_step: f64,
    pub max_evals: usize,
    pub seed: u64,
    /// `λ⁺(v)` for the growth-based lower bound.
    pub lambda_plus: Option<f64>,
    pub eps: f64,
    /// Lower bounds are only reported for distances at least this large.
    pub asymptotic_threshold: f64,
}

impl Default for DistanceOptions {
    fn default() -> Self {
        Self {
            restarts: 16,
            init_radius: 2.0,
            min_step: 1e-8,
            max_evals: 4000,
            seed: 0xd15,
            lambda_plus: None,
            eps: 0.05,
            asymptotic_threshold: 20.0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DistanceEstimate {
    /// Smallest `d_R(g exp(-Z), K)` found: an upper bound for `d_R(g, K·G_v)`.
    pub value: f64,
    pub minimizer_z: Vec<f64>,
    pub stationary: bool,
    /// `log(|g v|/|v|) / (λ⁺ + eps)` when it applies; `None` means no bound.
    pub lower_bound: Option<f64>,
    pub evaluations: usize,
}

struct PatternResult {
    z: Vec<f64>,
    value: f64,
    stationary: bool,
    evals: usize,
}

fn pattern_search(
    f: &dyn Fn(&[f64]) -> f64,
    z0: Vec<f64>,
    opts: &DistanceOptions,
) -> PatternResult {
    let d = z0.len();
    let mut z = z0;
    let mut value = f(&z);
    let mut evals = 1;
    let mut step = 0.5;
    while step >= opts.min_step && evals < opts.max_evals {
        let mut improved = false;
        'poll: for i in 0..d {
            for sign in [1.0, -1.0] {
                let mut cand = z.clone();
                cand[i] += sign * step;
                let fc = f(&cand);
                evals += 1;
                if fc < value {
                    z = cand;
                    value = fc;
                    improved = true;
                    break 'poll;
                }
            }
        }
        step = if improved {
            (step * 2.0).min(4.0)
        } else {
            step * 0.5
        };
    }
    PatternResult {
        z,
        value,
        stationary: step < opts.min_step,
        evals,
    }
}

/// Estimate of `d_R(g, K·G_v) = min_h d_R(g h^{-1}, K)` over `h = exp(Z)`,
/// `Z` in the stabilizer algebra, by multi-start pattern search.
pub fn dist_to_kgv(
    stab: &StabilizerData,
    g: &FactoredElement,
    opts: &DistanceOptions,
) -> Result<DistanceEstimate> {
    let n = g.k.n();
    if stab.v.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: stab.v.len(),
        });
    }
    let basis = &stab.gv_basis;
    let d = basis.len();
    let objective = |z: &[f64]| -> f64 {
        if d == 0 {
            return g.dist_to_k_right(&Matrix::identity(n));
        }
        let zm = numcore::combine(z, basis);
        g.dist_to_k_right(&expm(&zm.scale(-1.0)))
    };
    let (value, minimizer_z, stationary, evaluations) = if d == 0 {
        (objective(&[]), Vec::new(), true, 1)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let mut starts = vec![vec![0.0; d]];
        while starts.len() < opts.restarts.max(1) {
            let dir: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
            let r = opts.init_radius * rng.random::<f64>().powf(1.0 / d as f64);
            starts.push(numcore::normalized(&dir).iter().map(|x| x * r).collect());
        }
        let results: Vec<PatternResult> = starts
            .into_par_iter()
            .map(|z0| pattern_search(&objective, z0, opts))
            .collect();
        let evals = results.iter().map(|r| r.evals).sum();
        let best = results
            .into_iter()
            .reduce(|a, b| if b.value < a.value { b } else { a })
            .expect("at least one restart");
        (best.value, best.z, best.stationary, evals)
    };
    let lower_bound = opts.lambda_plus.and_then(|lp| {
        let growth = g.log_norm_apply(&stab.v) - numcore::norm(&stab.v).ln();
        let lb = growth / (lp + opts.eps);
        // the bound is asymptotic; below the threshold it is not claimed
        (lp + opts.eps > 0.0 && lb > 0.0 && value >= opts.asymptotic_threshold)
            .then(|| lb.min(value))
    });
    Ok(DistanceEstimate {
        value,
        minimizer_z,
        stationary,
        lower_bound,
        evaluations,
    })
}

/// `exp(λ_max) <= |g|_F <= sqrt(n) exp(λ_max)` for the left polar factor `X` of `g`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NormDistReport {
    pub lambda_max: f64,
    pub lower: f64,
    pub norm: f64,
    pub upper: f64,
    pub pass: bool,
}

pub fn norm_dist_check(g: &Matrix, tol: &Tolerances) -> Result<NormDistReport> {
    let p = polar(g, tol)?;
    let lambda_max = sym_eig(&p.x, tol)?.values[0];
    let lower = lambda_max.exp();
    let upper = (g.n() as f64).sqrt() * lower;
    let norm = g.norm();
    let slack = 1e-12 * upper;
    let pass = lower <= norm + slack && norm <= upper + slack;
    Ok(NormDistReport {
        lambda_max,
        lower,
        norm,
        upper,
        pass,
    })
}

/// Sampled estimate of `max |log k|` over `k = exp(Y)`, `Y` in the skew part.
pub fn sampled_k_diameter(split: &CartanSplit, samples: usize, seed: u64, tol: &Tolerances) -> f64 {
    if split.k_basis.is_empty() {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: f64 = 0.0;
    for _ in 0..samples {
        let c: Vec<f64> = split
            .k_basis
            .iter()
            .map(|_| {
                let x: f64 = StandardNormal.sample(&mut rng);
                2.0 * x
            })
            .collect();
        let k = expm(&numcore::combine(&c, &split.k_basis));
        if let Ok(l) = log_orthogonal(&k, tol) {
            best = best.max(l.norm());
        }
    }
    best
}
