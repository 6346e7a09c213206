//! Multi-start search over the unit sphere of a subspace of symmetric matrices.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{clusters, dyn_from_eigen, lambda_x, surrogate_grad};
use crate::error::{Error, Result};
use crate::liealg::{cartan_split, LieAlgebra, StabilizerData};
use crate::numcore::{self, dot, sym_eig, Matrix, SymEigen, Tolerances};

/// Optimizer settings shared by [`growth_exponents`] and [`hilbert_mumford`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GrowthOptions {
    pub restarts: usize,
    /// Increasing smoothing parameters for the surrogate `log|exp(tX)v|/t`.
    pub t_schedule: Vec<f64>,
    pub seed: u64,
    /// Gradient iterations per `t` stage.
    pub max_steps: usize,
    /// Try snapping minimizers onto the set where small top components vanish exactly.
    pub polish: bool,
    /// Components below this fraction of `|v|` are candidates for dropping.
    pub drop_ratio: f64,
    /// Also compute the Hilbert–Mumford value in [`growth_exponents`].
    pub with_hilbert_mumford: bool,
    pub tol: Tolerances,
}

impl Default for GrowthOptions {
    fn default() -> Self {
        Self {
            restarts: 64,
            t_schedule: vec![10.0, 30.0, 100.0],
            seed: 0x5eed,
            max_steps: 200,
            polish: true,
            drop_ratio: 1e-3,
            with_hilbert_mumford: true,
            tol: Tolerances::default(),
        }
    }
}

/// `λ⁻(v)`, `λ⁺(v)` with unit certificates in the complement subspace.
#[derive(Clone, Debug, Serialize)]
pub struct GrowthExponents {
    pub lambda_minus: f64,
    pub lambda_plus: f64,
    pub argmin_x: Matrix,
    pub argmax_x: Matrix,
    pub m_value: Option<f64>,
    pub restarts: usize,
    pub converged: bool,
}

/// `M(v)` with a unit certificate `X` in the symmetric part (`μ_X(v) = M(v)`).
#[derive(Clone, Debug, Serialize)]
pub struct HilbertMumford {
    pub value: f64,
    pub certificate: Matrix,
    pub converged: bool,
}

/// `c -> λ_{Σ c_k B_k}(v)` on the unit sphere, `B_k` orthonormal.
struct SphereProblem<'a> {
    v: &'a [f64],
    basis: &'a [Matrix],
    tol: Tolerances,
}

#[derive(Clone, Debug)]
struct Candidate {
    value: f64,
    coords: Vec<f64>,
}

fn better(a: Option<Candidate>, b: Candidate, sign: f64) -> Option<Candidate> {
    match a {
        Some(a) if sign * a.value <= sign * b.value => Some(a),
        _ => Some(b),
    }
}

fn tangent(g: &[f64], c: &[f64]) -> Vec<f64> {
    let gc = dot(g, c);
    g.iter().zip(c).map(|(a, b)| a - gc * b).collect()
}

fn step(c: &[f64], dir: &[f64], alpha: f64) -> Vec<f64> {
    let x: Vec<f64> = c.iter().zip(dir).map(|(a, d)| a - alpha * d).collect();
    numcore::normalized(&x)
}

impl SphereProblem<'_> {
    fn dim(&self) -> usize {
        self.basis.len()
    }

    fn matrix(&self, c: &[f64]) -> Matrix {
        numcore::combine(c, self.basis).sym_part()
    }

    fn eigen(&self, c: &[f64]) -> Result<SymEigen> {
        sym_eig(&self.matrix(c), &self.tol)
    }

    fn exact(&self, c: &[f64]) -> Result<f64> {
        lambda_x(self.v, &self.matrix(c), &self.tol)
    }

    fn surrogate(&self, c: &[f64], t: f64) -> Result<(f64, Vec<f64>)> {
        let eig = self.eigen(c)?;
        let (val, g) = surrogate_grad(&eig, &eig.coords(self.v), t);
        Ok((
            val,
            self.basis
                .iter()
                .map(|b| dot(g.as_slice(), b.as_slice()))
                .collect(),
        ))
    }

    /// Projected gradient with Armijo backtracking on `sign * surrogate`.
    fn descend(&self, mut c: Vec<f64>, t: f64, sign: f64, steps: usize) -> Result<Vec<f64>> {
        let (mut f, mut g) = self.surrogate(&c, t)?;
        f *= sign;
        let mut alpha = 0.5;
        for _ in 0..steps {
            let d: Vec<f64> = tangent(&g, &c).iter().map(|x| sign * x).collect();
            let dn2 = dot(&d, &d);
            if dn2.sqrt() < 1e-12 {
                break;
            }
            let mut accepted = false;
            while alpha > 1e-12 {
                let cand = step(&c, &d, alpha);
                let (fc, gc) = self.surrogate(&cand, t)?;
                if sign * fc <= f - 1e-4 * alpha * dn2 {
                    c = cand;
                    f = sign * fc;
                    g = gc;
                    alpha = (alpha * 2.0).min(1.0);
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        Ok(c)
    }

    /// Rows of the derivative of `(q_j^t v)_{j < k}` (top-`k` eigencomponents)
    /// with respect to the sphere coordinates, from first-order eigenvector
    /// perturbation; only couplings across the gap at `k` contribute.
    fn component_jacobian(&self, eig: &SymEigen, comps: &[f64], k: usize) -> Vec<Vec<f64>> {
        let n = comps.len();
        let q = &eig.vectors;
        let qt_b_q: Vec<Matrix> = self
            .basis
            .iter()
            .map(|b| &(&q.transpose() * b) * q)
            .collect();
        (0..k)
            .map(|j| {
                qt_b_q
                    .iter()
                    .map(|m| {
                        (k..n)
                            .map(|i| m[(i, j)] * comps[i] / (eig.values[j] - eig.values[i]))
                            .sum()
                    })
                    .collect()
            })
            .collect()
    }

    /// Newton projection onto `{c : v ⊥ top-k eigenspace of X(c)}` on the sphere.
    fn project(&self, mut c: Vec<f64>, k: usize) -> Result<Option<Vec<f64>>> {
        let vn = numcore::norm(self.v);
        for _ in 0..40 {
            let eig = self.eigen(&c)?;
            let comps = eig.coords(self.v);
            let resid = comps[..k].iter().map(|x| x * x).sum::<f64>().sqrt();
            if resid <= 1e-15 * vn {
                return Ok(Some(c));
            }
            if eig.values[k - 1] - eig.values[k] <= 1e-9 {
                return Ok(None);
            }
            let mut rows = self.component_jacobian(&eig, &comps, k);
            rows.push(c.clone());
            let mut rhs: Vec<f64> = comps[..k].iter().map(|x| -x).collect();
            rhs.push(0.0);
            let Some(delta) = min_norm_solve(&rows, &rhs) else {
                return Ok(None);
            };
            if numcore::norm(&delta) > 0.5 {
                return Ok(None);
            }
            let x: Vec<f64> = c.iter().zip(&delta).map(|(a, b)| a + b).collect();
            c = numcore::normalized(&x);
        }
        let comps = self.eigen(&c)?.coords(self.v);
        let resid = comps[..k].iter().map(|x| x * x).sum::<f64>().sqrt();
        Ok((resid <= 1e-12 * vn).then_some(c))
    }

    /// Descends `λ` on the manifold where the top-`k` components vanish:
    /// surrogate gradient with those components removed, projected onto the
    /// tangent space of the constraint, followed by Newton re-projection.
    fn constrained_descent(
        &self,
        mut c: Vec<f64>,
        k: usize,
        t: f64,
        iters: usize,
    ) -> Result<Vec<f64>> {
        let mut f = self.reduced_value(&c, k, t)?;
        let mut alpha = 0.25;
        for _ in 0..iters {
            let eig = self.eigen(&c)?;
            let mut comps = eig.coords(self.v);
            comps[..k].iter_mut().for_each(|x| *x = 0.0);
            let (_, g) = surrogate_grad(&eig, &comps, t);
            let g: Vec<f64> = self
                .basis
                .iter()
                .map(|b| dot(g.as_slice(), b.as_slice()))
                .collect();
            let mut rows = self.component_jacobian(&eig, &eig.coords(self.v), k);
            rows.push(c.clone());
            let d = null_projection(&rows, &g);
            let dn2 = dot(&d, &d);
            if dn2.sqrt() < 1e-12 {
                break;
            }
            let mut accepted = false;
            while alpha > 1e-10 {
                if let Some(cand) = self.project(step(&c, &d, alpha), k)? {
                    let fc = self.reduced_value(&cand, k, t)?;
                    if fc < f - 1e-4 * alpha * dn2 {
                        c = cand;
                        f = fc;
                        alpha = (alpha * 2.0).min(1.0);
                        accepted = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        Ok(c)
    }

    fn reduced_value(&self, c: &[f64], k: usize, t: f64) -> Result<f64> {
        let eig = self.eigen(c)?;
        let mut comps = eig.coords(self.v);
        comps[..k].iter_mut().for_each(|x| *x = 0.0);
        Ok(dyn_from_eigen(&eig, &comps, t))
    }

    /// Snaps a minimizer candidate onto sets where small leading components
    /// vanish and descends there; returns the best exactly evaluated point.
    fn polish(&self, c: &[f64], drop_ratio: f64) -> Result<Option<Candidate>> {
        let eig = self.eigen(c)?;
        let comps = eig.coords(self.v);
        let vn = numcore::norm(self.v);
        let width = self.tol.cluster * eig.values.iter().map(|l| l * l).sum::<f64>().sqrt();
        let mut best: Option<Candidate> = None;
        for r in clusters(&eig.values, width) {
            let comp = r.clone().map(|i| comps[i] * comps[i]).sum::<f64>().sqrt();
            if comp > drop_ratio * vn {
                break;
            }
            let k = r.end;
            if k == comps.len() {
                break;
            }
            let Some(mut p) = self.project(c.to_vec(), k)? else {
                continue;
            };
            for &t in &[1e2, 1e3, 1e4] {
                p = self.constrained_descent(p, k, t, 100)?;
            }
            if let Ok(value) = self.exact(&p) {
                best = better(best, Candidate { value, coords: p }, 1.0);
            }
        }
        Ok(best)
    }
}

/// Minimum-norm solution of `A x = b` for a short, wide `A` (pseudo-inverse of `A A^t`).
fn min_norm_solve(rows: &[Vec<f64>], rhs: &[f64]) -> Option<Vec<f64>> {
    let m = rows.len();
    let mut gram = Matrix::zeros(m);
    for i in 0..m {
        for j in 0..m {
            gram[(i, j)] = dot(&rows[i], &rows[j]);
        }
    }
    let eig = sym_eig(&gram, &Tolerances::default()).ok()?;
    let cut = 1e-12 * eig.values[0].max(0.0);
    let y = eig.coords(rhs);
    let mut w = vec![0.0; m];
    for k in 0..m {
        if eig.values[k] > cut {
            let s = y[k] / eig.values[k];
            for i in 0..m {
                w[i] += s * eig.vectors[(i, k)];
            }
        }
    }
    let d = rows[0].len();
    Some(
        (0..d)
            .map(|a| (0..m).map(|i| rows[i][a] * w[i]).sum())
            .collect(),
    )
}

/// Component of `g` in the kernel of `A`.
fn null_projection(rows: &[Vec<f64>], g: &[f64]) -> Vec<f64> {
    let ag: Vec<f64> = rows.iter().map(|r| dot(r, g)).collect();
    match min_norm_solve(rows, &ag) {
        Some(p) => g.iter().zip(&p).map(|(a, b)| a - b).collect(),
        None => g.to_vec(),
    }
}

/// Start points: `±` coordinate axes first, then seeded Gaussian directions.
fn start_points(dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(count);
    for k in 0..(2 * dim).min(count) {
        let mut c = vec![0.0; dim];
        c[k / 2] = if k % 2 == 0 { 1.0 } else { -1.0 };
        out.push(c);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while out.len() < count {
        let c: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        if numcore::norm(&c) > 1e-8 {
            out.push(numcore::normalized(&c));
        }
    }
    out
}

struct SearchResult {
    min: Candidate,
    max: Candidate,
    converged: bool,
}

fn search(prob: &SphereProblem, opts: &GrowthOptions, want_max: bool) -> Result<SearchResult> {
    let d = prob.dim();
    if d == 1 {
        let a = Candidate {
            value: prob.exact(&[1.0])?,
            coords: vec![1.0],
        };
        let b = Candidate {
            value: prob.exact(&[-1.0])?,
            coords: vec![-1.0],
        };
        let (min, max) = if a.value <= b.value { (a, b) } else { (b, a) };
        return Ok(SearchResult {
            min,
            max,
            converged: true,
        });
    }
    let starts = start_points(d, opts.restarts.max(1), opts.seed);
    let per_start: Vec<Result<(Candidate, Option<Candidate>)>> = starts
        .par_iter()
        .map(|c0| {
            let mut lo = prob.exact(c0).ok().map(|value| Candidate {
                value,
                coords: c0.clone(),
            });
            let mut hi = lo.clone();
            let mut c = c0.clone();
            for &t in &opts.t_schedule {
                c = prob.descend(c, t, 1.0, opts.max_steps)?;
            }
            let neg: Vec<f64> = c.iter().map(|x| -x).collect();
            for p in [c.clone(), neg] {
                if let Ok(value) = prob.exact(&p) {
                    let cand = Candidate { value, coords: p };
                    hi = better(hi, cand.clone(), -1.0);
                    lo = better(lo, cand, 1.0);
                }
            }
            if opts.polish {
                if let Some(p) = prob.polish(&c, opts.drop_ratio)? {
                    lo = better(lo, p, 1.0);
                }
            }
            if want_max {
                let mut c = c0.clone();
                for &t in &opts.t_schedule {
                    c = prob.descend(c, t, -1.0, opts.max_steps)?;
                }
                let neg: Vec<f64> = c.iter().map(|x| -x).collect();
                for p in [c, neg] {
                    if let Ok(value) = prob.exact(&p) {
                        let cand = Candidate { value, coords: p };
                        hi = better(hi, cand.clone(), -1.0);
                        lo = better(lo, cand, 1.0);
                    }
                }
            }
            let lo = lo.ok_or_else(|| Error::Diagnostic("no exact evaluation succeeded".into()))?;
            Ok((lo, hi))
        })
        .collect();
    let mut mins = Vec::new();
    let mut maxs = Vec::new();
    for r in per_start {
        let (lo, hi) = r?;
        mins.push(lo);
        if let Some(h) = hi {
            maxs.push(h);
        }
    }
    let min = mins
        .iter()
        .cloned()
        .fold(None, |a, b| better(a, b, 1.0))
        .expect("nonempty");
    let max = maxs
        .iter()
        .cloned()
        .fold(None, |a, b| better(a, b, -1.0))
        .unwrap_or_else(|| min.clone());
    let agree = |list: &[Candidate], best: f64| {
        list.iter()
            .filter(|c| (c.value - best).abs() <= 1e-6)
            .count()
            >= 2
    };
    let converged = agree(&mins, min.value) && (!want_max || agree(&maxs, max.value));
    Ok(SearchResult {
        min,
        max,
        converged,
    })
}

/// `λ⁻(v)` and `λ⁺(v)`: extremes of `λ_X(v)` over unit `X` in the complement
/// of `k + g_v`.
pub fn growth_exponents(
    alg: &LieAlgebra,
    stab: &StabilizerData,
    opts: &GrowthOptions,
) -> Result<GrowthExponents> {
    if stab.ptilde_basis.is_empty() {
        return Err(Error::BoundedOrbit);
    }
    let prob = SphereProblem {
        v: &stab.v,
        basis: &stab.ptilde_basis,
        tol: opts.tol,
    };
    let res = search(&prob, opts, true)?;
    let m_value = if opts.with_hilbert_mumford {
        Some(hilbert_mumford(alg, &stab.v, opts)?.value)
    } else {
        None
    };
    Ok(GrowthExponents {
        lambda_minus: res.min.value,
        lambda_plus: res.max.value,
        argmin_x: prob.matrix(&res.min.coords),
        argmax_x: prob.matrix(&res.max.coords),
        m_value,
        restarts: if prob.dim() == 1 {
            1
        } else {
            opts.restarts.max(1)
        },
        converged: res.converged,
    })
}

/// `M(v) = sup μ_X(v)` over unit `X` in the symmetric part, computed as
/// `-inf λ_Y(v)` with certificate `X = -Y`.
pub fn hilbert_mumford(
    alg: &LieAlgebra,
    v: &[f64],
    opts: &GrowthOptions,
) -> Result<HilbertMumford> {
    let split = cartan_split(alg);
    if split.p_basis.is_empty() {
        return Err(Error::CompactGroup);
    }
    if v.len() != alg.n() {
        return Err(Error::DimensionMismatch {
            expected: alg.n(),
            got: v.len(),
        });
    }
    if numcore::norm(v) == 0.0 {
        return Err(Error::ZeroVector);
    }
    let prob = SphereProblem {
        v,
        basis: &split.p_basis,
        tol: opts.tol,
    };
    let res = search(&prob, opts, false)?;
    Ok(HilbertMumford {
        value: -res.min.value,
        certificate: prob.matrix(&res.min.coords).scale(-1.0),
        converged: res.converged,
    })
}

/// Exact `λ_X(v)` at `samples` uniformly random unit `X` in the span of an
/// orthonormal `basis`; returns the smallest and largest values seen.
pub fn sampled_extremes(
    v: &[f64],
    basis: &[Matrix],
    samples: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<(f64, f64)> {
    let prob = SphereProblem {
        v,
        basis,
        tol: *tol,
    };
    let chunks = 64;
    let parts: Vec<Result<(f64, f64)>> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(chunk as u64));
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            let count = samples / chunks + usize::from(chunk < samples % chunks);
            for _ in 0..count {
                let c: Vec<f64> = (0..basis.len())
                    .map(|_| StandardNormal.sample(&mut rng))
                    .collect();
                let val = prob.exact(&numcore::normalized(&c))?;
                lo = lo.min(val);
                hi = hi.max(val);
            }
            Ok((lo, hi))
        })
        .collect();
    parts
        .into_iter()
        .try_fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
            let (a, b) = r?;
            Ok((lo.min(a), hi.max(b)))
        })
}
