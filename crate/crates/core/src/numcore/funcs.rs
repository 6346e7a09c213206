use serde::{Deserialize, Serialize};

use super::{svd_jacobi, sym_eig, Matrix, Tolerances};
use crate::error::{Error, Result};

const TAYLOR_DEGREE: usize = 18;
const SCALED_NORM: f64 = 0.25;

/// Matrix exponential.
///
/// Exactly symmetric inputs go through the eigendecomposition; everything
/// else uses scaling-and-squaring with a degree-18 Taylor polynomial on a
/// matrix scaled below norm 1/4 (truncation error < 1e-25 before squaring).
pub fn expm(a: &Matrix) -> Matrix {
    let n = a.n();
    if a.asymmetry() <= 1e-15 {
        let eig = sym_eig(a, &Tolerances::default()).expect("symmetric input");
        return eig.map(f64::exp);
    }
    let nrm = a.norm();
    let squarings = if nrm > SCALED_NORM {
        (nrm / SCALED_NORM).log2().ceil() as u32
    } else {
        0
    };
    let b = a.scale(0.5f64.powi(squarings as i32));
    let id = Matrix::identity(n);
    // Horner: I + b/1 (I + b/2 (I + ... (I + b/N)))
    let mut acc = id.clone();
    for k in (1..=TAYLOR_DEGREE).rev() {
        acc = id.axpy(1.0 / k as f64, &(&b * &acc));
    }
    for _ in 0..squarings {
        acc = &acc * &acc;
    }
    acc
}

/// Logarithm of a symmetric positive definite matrix.
pub fn logm_spd(p: &Matrix, tol: &Tolerances) -> Result<Matrix> {
    let eig = sym_eig(p, tol)?;
    let min = *eig.values.last().expect("nonempty");
    if min <= tol.pd {
        return Err(Error::NotPositiveDefinite(min));
    }
    Ok(eig.map(f64::ln))
}

/// `g = k exp(x)` with `k` orthogonal and `x` symmetric.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PolarFactors {
    pub k: Matrix,
    pub x: Matrix,
}

impl PolarFactors {
    pub fn reconstruct(&self) -> Matrix {
        &self.k * &expm(&self.x)
    }
}

/// Left polar decomposition `g = k exp(X)`, `X = log(g^t g) / 2`.
///
/// Computed from a one-sided Jacobi SVD `g = U S V^t` as `X = V log(S) V^t`,
/// `k = U V^t`, which never forms `g^t g`.
pub fn polar(g: &Matrix, tol: &Tolerances) -> Result<PolarFactors> {
    if !g.is_finite() {
        return Err(Error::NonFinite);
    }
    let svd = svd_jacobi(g);
    let smax = svd.sigma[0];
    let smin = *svd.sigma.last().expect("nonempty");
    if smax == 0.0 || smin <= tol.pd * smax {
        return Err(Error::Singular(if smax == 0.0 { 0.0 } else { smin / smax }));
    }
    let n = g.n();
    let v = &svd.v;
    let logs: Vec<f64> = svd.sigma.iter().map(|s| s.ln()).collect();
    let mut x = Matrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            let s: f64 = (0..n).map(|k| v[(i, k)] * logs[k] * v[(j, k)]).sum();
            x[(i, j)] = s;
            x[(j, i)] = s;
        }
    }
    let k = &svd.u * &v.transpose();
    Ok(PolarFactors { k, x })
}

/// Principal logarithm of a rotation matrix (skew-symmetric result).
///
/// Uses the commuting split `k = S + A` into symmetric and skew parts:
/// on each invariant plane `S = cos θ`, `A = sin θ J`, so `log k = A f(S)`
/// with `f(c) = arccos(c) / sqrt(1 - c^2)`.
pub fn log_orthogonal(k: &Matrix, tol: &Tolerances) -> Result<Matrix> {
    let n = k.n();
    let orth = (&(&k.transpose() * k) - &Matrix::identity(n)).norm();
    if orth > tol.orth * (n as f64).sqrt() {
        return Err(Error::InvalidInput(format!(
            "matrix is not orthogonal (residual {orth:e})"
        )));
    }
    let s = k.sym_part();
    let a = k.skew_part();
    let eig = sym_eig(&s, tol)?;
    if eig.values.iter().any(|&c| c < -1.0 + 1e-8) {
        return Err(Error::InvalidInput(
            "rotation by pi (or reflection): principal logarithm is not unique".into(),
        ));
    }
    let f = eig.map(|c| {
        let c = c.clamp(-1.0, 1.0);
        let s2 = 1.0 - c * c;
        if s2 < 1e-12 {
            // arccos(c)/sin(θ) -> 1 + θ²/6 near θ = 0
            1.0 + s2 / 6.0
        } else {
            c.acos() / s2.sqrt()
        }
    });
    Ok((&a * &f).skew_part())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rot(t: f64) -> Matrix {
        Matrix::from_rows(&[&[t.cos(), -t.sin()], &[t.sin(), t.cos()]]).unwrap()
    }

    #[test]
    fn expm_zero_is_identity() {
        assert_eq!(expm(&Matrix::zeros(3)), Matrix::identity(3));
    }

    #[test]
    fn expm_diagonal() {
        let l2 = 2f64.ln();
        let e = expm(&Matrix::diag(&[l2, -l2]));
        assert!((&e - &Matrix::diag(&[2.0, 0.5])).norm() < 1e-15);
    }

    #[test]
    fn expm_of_rotation_generator() {
        let j = &Matrix::unit(2, 0, 1) - &Matrix::unit(2, 1, 0);
        for &t in &[0.1, 1.0, 2.5, 7.0] {
            let e = expm(&j.scale(t));
            // exp(tJ) = cos t I + sin t J
            let expect = Matrix::identity(2).scale(t.cos()).axpy(t.sin(), &j);
            assert!((&e - &expect).norm() < 1e-13, "t = {t}");
        }
    }

    #[test]
    fn expm_nilpotent() {
        let e12 = Matrix::unit(2, 0, 1);
        let e = expm(&e12.scale(3.0));
        assert!((&e - &Matrix::identity(2).axpy(3.0, &e12)).norm() < 1e-14);
    }

    #[test]
    fn logm_examples() {
        let tol = Tolerances::default();
        assert!(logm_spd(&Matrix::identity(3), &tol).unwrap().norm() < 1e-15);
        let e2 = 2f64.exp();
        let l = logm_spd(&Matrix::diag(&[e2 * e2, 1.0 / (e2 * e2)]), &tol).unwrap();
        assert!((&l - &Matrix::diag(&[4.0, -4.0])).norm() < 1e-14);
        let l = logm_spd(&Matrix::diag(&[e2, 1.0 / e2]), &tol).unwrap();
        assert!((&l - &Matrix::diag(&[2.0, -2.0])).norm() < 1e-14);
    }

    #[test]
    fn logm_rejects_indefinite() {
        let tol = Tolerances::default();
        assert!(matches!(
            logm_spd(&Matrix::diag(&[1.0, -1.0]), &tol),
            Err(Error::NotPositiveDefinite(_))
        ));
    }

    #[test]
    fn polar_examples() {
        let tol = Tolerances::default();
        let p = polar(&Matrix::identity(2), &tol).unwrap();
        assert!((&p.k - &Matrix::identity(2)).norm() < 1e-15);
        assert!(p.x.norm() < 1e-15);

        let l2 = 2f64.ln();
        let p = polar(&Matrix::diag(&[2.0, 0.5]), &tol).unwrap();
        assert!((&p.k - &Matrix::identity(2)).norm() < 1e-15);
        assert!((&p.x - &Matrix::diag(&[l2, -l2])).norm() < 1e-15);

        let g = &rot(0.8) * &Matrix::diag(&[2.0, 0.5]);
        let p = polar(&g, &tol).unwrap();
        assert!((&p.k - &rot(0.8)).norm() < 1e-14);
        assert!((&p.x - &Matrix::diag(&[l2, -l2])).norm() < 1e-14);
    }

    #[test]
    fn polar_rejects_singular() {
        let tol = Tolerances::default();
        let g = Matrix::from_rows(&[&[1.0, 2.0], &[2.0, 4.0]]).unwrap();
        assert!(matches!(polar(&g, &tol), Err(Error::Singular(_))));
    }

    #[test]
    fn log_of_rotation() {
        let tol = Tolerances::default();
        let j = &Matrix::unit(2, 1, 0) - &Matrix::unit(2, 0, 1);
        let l = log_orthogonal(&rot(1.2), &tol).unwrap();
        assert!((&l - &j.scale(1.2)).norm() < 1e-13);
        // angle wraps into (-pi, pi)
        let l = log_orthogonal(&rot(2.0 * std::f64::consts::PI + 0.5), &tol).unwrap();
        assert!((&l - &j.scale(0.5)).norm() < 1e-12);
        assert!(log_orthogonal(&Matrix::identity(3), &tol).unwrap().norm() < 1e-15);
    }
}
