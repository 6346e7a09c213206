//! Growth rates of `|exp(tX) v|` for symmetric `X`, the exponents
//! `λ⁻(v) <= λ⁺(v)` and the Hilbert–Mumford function.

mod search;

pub use search::{
    growth_exponents, hilbert_mumford, sampled_extremes, GrowthExponents, GrowthOptions,
    HilbertMumford,
};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numcore::{self, sym_eig, Matrix, SymEigen, Tolerances};

/// Eigenvalue clusters of `X` with the norm of the component of `v` in each.
#[derive(Clone, Debug, Serialize)]
pub struct EigenComponentProfile {
    /// `(eigenvalue, component norm)`, eigenvalues descending.
    pub entries: Vec<(f64, f64)>,
}

/// Groups eigenvalues (descending) into clusters of width `width`, returning index ranges.
pub(crate) fn clusters(values: &[f64], width: f64) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i - 1] - values[i] > width {
            out.push(start..i);
            start = i;
        }
    }
    out
}

fn cluster_width(eig: &SymEigen, tol: &Tolerances) -> f64 {
    let xnorm = eig.values.iter().map(|l| l * l).sum::<f64>().sqrt();
    tol.cluster * xnorm
}

impl EigenComponentProfile {
    pub fn from_eigen(eig: &SymEigen, v: &[f64], tol: &Tolerances) -> Self {
        let c = eig.coords(v);
        let entries = clusters(&eig.values, cluster_width(eig, tol))
            .into_iter()
            .map(|r| {
                let lam = r.clone().map(|i| eig.values[i]).sum::<f64>() / r.len() as f64;
                let comp = r.map(|i| c[i] * c[i]).sum::<f64>().sqrt();
                (lam, comp)
            })
            .collect();
        Self { entries }
    }

    pub fn new(v: &[f64], x: &Matrix, tol: &Tolerances) -> Result<Self> {
        check_inputs(v, x)?;
        Ok(Self::from_eigen(&sym_eig(x, tol)?, v, tol))
    }

    /// Largest eigenvalue whose component exceeds `tol.comp * |v|`.
    pub fn top(&self, vnorm: f64, tol: &Tolerances) -> Result<f64> {
        self.entries
            .iter()
            .find(|(_, c)| *c > tol.comp * vnorm)
            .map(|(l, _)| *l)
            .ok_or_else(|| Error::Diagnostic("no eigencomponent of v above the threshold".into()))
    }
}

fn check_inputs(v: &[f64], x: &Matrix) -> Result<()> {
    if v.len() != x.n() {
        return Err(Error::DimensionMismatch {
            expected: x.n(),
            got: v.len(),
        });
    }
    if numcore::norm(v) == 0.0 {
        return Err(Error::ZeroVector);
    }
    if x.norm() == 0.0 {
        return Err(Error::InvalidInput("X must be nonzero".into()));
    }
    Ok(())
}

/// Exponential growth rate of `t -> |exp(tX) v|`: the largest eigenvalue
/// of `X` whose eigenspace carries a non-negligible component of `v`.
pub fn lambda_x(v: &[f64], x: &Matrix, tol: &Tolerances) -> Result<f64> {
    EigenComponentProfile::new(v, x, tol)?.top(numcore::norm(v), tol)
}

/// Smallest eigenvalue carrying a component of `v`, `-λ_{-X}(v)`.
pub fn mu_x(v: &[f64], x: &Matrix, tol: &Tolerances) -> Result<f64> {
    Ok(-lambda_x(v, &-x, tol)?)
}

/// `log|exp(tX) v| / t` via log-sum-exp in the eigenbasis of `X`.
pub fn dyn_lambda(v: &[f64], x: &Matrix, t: f64, tol: &Tolerances) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidInput(format!("t must be positive, got {t}")));
    }
    check_inputs(v, x)?;
    let eig = sym_eig(x, tol)?;
    Ok(dyn_from_eigen(&eig, &eig.coords(v), t))
}

pub(crate) fn dyn_from_eigen(eig: &SymEigen, c: &[f64], t: f64) -> f64 {
    let top = leading_supported(eig, c);
    let s: f64 = eig
        .values
        .iter()
        .zip(c)
        .filter(|(_, ci)| *ci * *ci > 0.0)
        .map(|(l, ci)| ci * ci * (2.0 * t * (l - top)).exp())
        .sum();
    top + s.ln() / (2.0 * t)
}

/// Largest eigenvalue whose component is representable after squaring.
fn leading_supported(eig: &SymEigen, c: &[f64]) -> f64 {
    eig.values
        .iter()
        .zip(c)
        .find(|(_, ci)| *ci * *ci > 0.0)
        .map(|(l, _)| *l)
        .unwrap_or(eig.values[0])
}

/// Value and gradient (Frobenius dual, a symmetric matrix) of
/// `X -> log|exp(tX) v| / t` at the eigendecomposition `eig` of `X`.
///
/// The derivative of `v^t exp(2tX) v` is `Q (Γ ∘ c c^t) Q^t` with `c = Q^t v`
/// and `Γ` the divided differences of `exp(2t·)`; everything is scaled by
/// `exp(-2t λ)`, `λ` the leading eigenvalue carrying part of `v`, to stay finite.
pub(crate) fn surrogate_grad(eig: &SymEigen, c: &[f64], t: f64) -> (f64, Matrix) {
    let n = c.len();
    let lam = &eig.values;
    let top = leading_supported(eig, c);
    let a: Vec<f64> = lam.iter().map(|l| (2.0 * t * (l - top)).exp()).collect();
    let f: f64 = (0..n)
        .filter(|&i| c[i] * c[i] > 0.0)
        .map(|i| c[i] * c[i] * a[i])
        .sum();
    let mut w = Matrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            if c[i] * c[j] == 0.0 {
                continue;
            }
            // λ_i >= λ_j for i <= j
            let (hi, lo) = if i <= j { (i, j) } else { (j, i) };
            let d = lam[hi] - lam[lo];
            let gamma = if 2.0 * t * d > 1.0 {
                (a[hi] - a[lo]) / d
            } else if d > 0.0 {
                a[lo] * (2.0 * t * d).exp_m1() / d
            } else {
                2.0 * t * a[hi]
            };
            w[(i, j)] = gamma * c[i] * c[j];
        }
    }
    let q = &eig.vectors;
    let g = &(q * &w) * &q.transpose();
    let value = top + f.ln() / (2.0 * t);
    (value, g.sym_part().scale(1.0 / (2.0 * t * f)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const R: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn h() -> Matrix {
        Matrix::diag(&[1.0, -1.0])
    }

    fn random_sym(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = rng.random_range(-1.0..1.0);
            }
        }
        m.sym_part()
    }

    #[test]
    fn lambda_examples() {
        let tol = Tolerances::default();
        assert_eq!(lambda_x(&[1.0, 0.0], &h(), &tol).unwrap(), 1.0);
        assert_eq!(lambda_x(&[0.0, 2.0], &h(), &tol).unwrap(), -1.0);
        assert_eq!(mu_x(&[1.0, 0.0], &h(), &tol).unwrap(), 1.0);
        assert_eq!(mu_x(&[1.0, 1.0], &h(), &tol).unwrap(), -1.0);
        assert!(lambda_x(&[0.0, 0.0], &h(), &tol).is_err());
        assert!(lambda_x(&[1.0, 0.0], &Matrix::zeros(2), &tol).is_err());
    }

    #[test]
    fn profile_accounts_for_the_whole_vector() {
        let tol = Tolerances::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let x = random_sym(&mut rng, 5);
            let v: Vec<f64> = (0..5).map(|_| rng.random_range(-2.0..2.0)).collect();
            let p = EigenComponentProfile::new(&v, &x, &tol).unwrap();
            let total: f64 = p.entries.iter().map(|(_, c)| c * c).sum();
            let vv = numcore::dot(&v, &v);
            assert!((total - vv).abs() <= 1e-9 * vv);
        }
    }

    #[test]
    fn degenerate_eigenvalues_cluster() {
        let tol = Tolerances::default();
        let x = Matrix::diag(&[1.0, 1.0, -2.0]);
        let p = EigenComponentProfile::new(&[1.0, 1.0, 0.0], &x, &tol).unwrap();
        assert_eq!(p.entries.len(), 2);
        assert!((p.entries[0].1 - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn mu_is_minus_lambda_of_negation() {
        let tol = Tolerances::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let x = random_sym(&mut rng, 4);
            let v: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
            assert_eq!(
                mu_x(&v, &x, &tol).unwrap(),
                -lambda_x(&v, &x.scale(-1.0), &tol).unwrap()
            );
        }
    }

    #[test]
    fn dyn_lambda_examples() {
        let tol = Tolerances::default();
        let x = h().scale(R);
        for &t in &[0.5, 1.0, 20.0, 1e4] {
            assert!((dyn_lambda(&[1.0, 0.0], &x, t, &tol).unwrap() - R).abs() < 1e-15);
        }
        // two-term closed form: log((e^{2a} + e^{-2a})/1)/(2t) with a = t/sqrt2, |v|^2 = 2 split evenly
        let t = 20.0;
        let a = t * R;
        let expect = ((2.0 * a).exp() + (-2.0 * a).exp()).ln() / (2.0 * t);
        let got = dyn_lambda(&[1.0, 1.0], &x, t, &tol).unwrap();
        assert!((got - expect).abs() < 1e-13);
        assert!((got - R).abs() < 1e-8);
        // no overflow for huge t
        assert!(dyn_lambda(&[1.0, 1.0], &x, 1e6, &tol).unwrap().is_finite());
        assert!(dyn_lambda(&[1.0, 1.0], &x, 0.0, &tol).is_err());
    }

    #[test]
    fn dyn_lambda_converges_at_the_computable_rate() {
        let tol = Tolerances::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let x = random_sym(&mut rng, 4);
            let v: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
            let v = numcore::normalized(&v);
            let p = EigenComponentProfile::new(&v, &x, &tol).unwrap();
            let vn = numcore::norm(&v);
            let lam = p.top(vn, &tol).unwrap();
            let cmin = p
                .entries
                .iter()
                .map(|(_, c)| c * c)
                .filter(|&c| c > 0.0)
                .fold(f64::INFINITY, f64::min);
            for &t in &[1.0, 10.0, 100.0] {
                let d = dyn_lambda(&v, &x, t, &tol).unwrap();
                let bound = (vn * vn / cmin).ln() / (2.0 * t);
                assert!(
                    (d - lam).abs() <= bound + 1e-12,
                    "t={t} d={d} lam={lam} bound={bound}"
                );
            }
        }
    }

    #[test]
    fn surrogate_gradient_matches_finite_differences() {
        let tol = Tolerances::default();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..30 {
            let x = random_sym(&mut rng, 4);
            let e = random_sym(&mut rng, 4);
            let v: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
            for &t in &[0.7, 5.0, 40.0] {
                let eig = sym_eig(&x, &tol).unwrap();
                let (val, g) = surrogate_grad(&eig, &eig.coords(&v), t);
                assert!((val - dyn_lambda(&v, &x, t, &tol).unwrap()).abs() < 1e-12);
                let h = 1e-6;
                let fd = (dyn_lambda(&v, &x.axpy(h, &e), t, &tol).unwrap()
                    - dyn_lambda(&v, &x.axpy(-h, &e), t, &tol).unwrap())
                    / (2.0 * h);
                let an = numcore::frob_inner(&g, &e).unwrap();
                assert!(
                    (fd - an).abs() < 1e-6 * (1.0 + an.abs()),
                    "t={t} fd={fd} an={an}"
                );
            }
        }
    }

    #[test]
    fn homogeneity_and_conjugation() {
        let tol = Tolerances::default();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..50 {
            let x = random_sym(&mut rng, 4);
            let v: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
            let lam = lambda_x(&v, &x, &tol).unwrap();
            let c = rng.random_range(0.1..10.0);
            assert!((lambda_x(&v, &x.scale(c), &tol).unwrap() - c * lam).abs() < 1e-12 * (1.0 + c));
            let r = rng.random_range(-5.0..5.0);
            let rv: Vec<f64> = v.iter().map(|a| a * r).collect();
            assert!((lambda_x(&rv, &x, &tol).unwrap() - lam).abs() < 1e-12);

            let mut a = Matrix::zeros(4);
            for i in 0..4 {
                for j in 0..4 {
                    a[(i, j)] = rng.random_range(-1.0..1.0);
                }
            }
            let k = numcore::expm(&a.skew_part());
            let kxk = &(&k * &x) * &k.transpose();
            let kv = k.mul_vec(&v);
            assert!((lambda_x(&kv, &kxk.sym_part(), &tol).unwrap() - lam).abs() < 1e-10);

            // commuting g = exp(sX)
            let g = numcore::expm(&x.scale(rng.random_range(-1.0..1.0)));
            assert!((lambda_x(&g.mul_vec(&v), &x, &tol).unwrap() - lam).abs() < 1e-10);
        }
    }

    #[test]
    fn small_perturbations_never_drop_lambda() {
        // lower semicontinuity: a perturbation can only add components
        let tol = Tolerances::default();
        let x = Matrix::diag(&[2.0, 1.0, -1.0]);
        let v = [0.0, 1.0, 1.0];
        let lam = lambda_x(&v, &x, &tol).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let d: Vec<f64> = (0..3).map(|_| rng.random_range(-1e-3..1e-3)).collect();
            let vp: Vec<f64> = v.iter().zip(&d).map(|(a, b)| a + b).collect();
            assert!(lambda_x(&vp, &x, &tol).unwrap() >= lam - 1e-12);
        }
    }
}
