use super::{Matrix, Tolerances};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;
/// Off-diagonal stopping threshold relative to the Frobenius norm.
const SWEEP_TOL: f64 = 1e-14;

/// Eigendecomposition `S = Q diag(values) Q^t` with values sorted descending.
#[derive(Clone, Debug)]
pub struct SymEigen {
    pub values: Vec<f64>,
    /// Columns are eigenvectors, paired with `values`.
    pub vectors: Matrix,
}

impl SymEigen {
    pub fn reconstruct(&self) -> Matrix {
        self.map(|x| x)
    }

    /// `Q f(Λ) Q^t`
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Matrix {
        let n = self.values.len();
        let q = &self.vectors;
        let fv: Vec<f64> = self.values.iter().map(|&x| f(x)).collect();
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                let s: f64 = (0..n).map(|k| q[(i, k)] * fv[k] * q[(j, k)]).sum();
                out[(i, j)] = s;
                out[(j, i)] = s;
            }
        }
        out
    }

    /// Coordinates of `v` in the eigenbasis, `Q^t v`.
    pub fn coords(&self, v: &[f64]) -> Vec<f64> {
        let n = self.values.len();
        (0..n)
            .map(|k| (0..n).map(|i| self.vectors[(i, k)] * v[i]).sum())
            .collect()
    }
}

/// Cyclic Jacobi eigensolver for symmetric matrices.
pub fn sym_eig(s: &Matrix, tol: &Tolerances) -> Result<SymEigen> {
    let asym = s.asymmetry();
    if asym > tol.sym {
        return Err(Error::NotSymmetric(asym));
    }
    if !s.is_finite() {
        return Err(Error::NonFinite);
    }
    let n = s.n();
    let mut a = s.sym_part();
    let mut v = Matrix::identity(n);
    let scale = a.norm();

    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    off += a[(i, j)] * a[(i, j)];
                }
            }
        }
        if off.sqrt() <= SWEEP_TOL * scale || scale == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
                let t = sign / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - sn * akq;
                    a[(k, q)] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - sn * aqk;
                    a[(q, k)] = sn * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - sn * vkq;
                    v[(k, q)] = sn * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let cols: Vec<Vec<f64>> = order.iter().map(|&i| v.column(i)).collect();
    Ok(SymEigen {
        values,
        vectors: Matrix::from_columns(&cols),
    })
}

/// Singular value decomposition `A = U diag(sigma) V^t`, sigma descending.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: Matrix,
    pub sigma: Vec<f64>,
    pub v: Matrix,
}

/// One-sided (Hestenes) Jacobi SVD.
///
/// Orthogonalizes the columns of `a` by plane rotations applied from the
/// right. Singular values of column-graded inputs come out with high
/// relative accuracy, which the distance estimators rely on.
pub fn svd_jacobi(a: &Matrix) -> Svd {
    let n = a.n();
    // columns stored contiguously
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
    let mut v: Vec<Vec<f64>> = (0..n).map(|j| Matrix::identity(n).column(j)).collect();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = cols[p].iter().map(|x| x * x).sum();
                let beta: f64 = cols[q].iter().map(|x| x * x).sum();
                let gamma: f64 = cols[p].iter().zip(&cols[q]).map(|(x, y)| x * y).sum();
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let sign = if zeta >= 0.0 { 1.0 } else { -1.0 };
                let t = sign / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (lo, hi) = cols.split_at_mut(q);
                for (x, y) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
                    let (xp, xq) = (*x, *y);
                    *x = c * xp - s * xq;
                    *y = s * xp + c * xq;
                }
                let (lo, hi) = v.split_at_mut(q);
                for (x, y) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
                    let (xp, xq) = (*x, *y);
                    *x = c * xp - s * xq;
                    *y = s * xp + c * xq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let sig: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sig[j].total_cmp(&sig[i]));
    let sigma: Vec<f64> = order.iter().map(|&i| sig[i]).collect();
    let ucols: Vec<Vec<f64>> = order
        .iter()
        .map(|&i| {
            let s = sig[i];
            if s > 0.0 {
                cols[i].iter().map(|x| x / s).collect()
            } else {
                vec![0.0; n]
            }
        })
        .collect();
    let vcols: Vec<Vec<f64>> = order.iter().map(|&i| v[i].clone()).collect();
    Svd {
        u: Matrix::from_columns(&ucols),
        sigma,
        v: Matrix::from_columns(&vcols),
    }
}
