use super::{dot, norm, sym_eig, Matrix, Tolerances};

/// Orthonormal spanning subset of `vectors` (modified Gram-Schmidt with
/// column pivoting and one re-orthogonalization pass).
///
/// Vectors whose residual falls below `rank_tol * max input norm` are dropped.
pub fn orthonormal_vectors(vectors: &[Vec<f64>], rank_tol: f64) -> Vec<Vec<f64>> {
    let max_norm = vectors.iter().map(|v| norm(v)).fold(0.0, f64::max);
    if max_norm == 0.0 {
        return Vec::new();
    }
    let mut work: Vec<Vec<f64>> = vectors.to_vec();
    let mut out: Vec<Vec<f64>> = Vec::new();
    while !work.is_empty() {
        let (idx, best) = work
            .iter()
            .enumerate()
            .map(|(i, w)| (i, norm(w)))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty");
        if best < rank_tol * max_norm {
            break;
        }
        let mut q: Vec<f64> = work.swap_remove(idx).iter().map(|x| x / best).collect();
        for o in &out {
            let c = dot(o, &q);
            q.iter_mut().zip(o).for_each(|(x, y)| *x -= c * y);
        }
        let qn = norm(&q);
        q.iter_mut().for_each(|x| *x /= qn);
        for w in work.iter_mut() {
            let c = dot(&q, w);
            w.iter_mut().zip(&q).for_each(|(x, y)| *x -= c * y);
        }
        out.push(q);
    }
    out
}

/// Matrix version of [`orthonormal_vectors`] under the trace inner product.
pub fn orthonormal_basis(mats: &[Matrix], rank_tol: f64) -> Vec<Matrix> {
    let Some(n) = mats.first().map(Matrix::n) else {
        return Vec::new();
    };
    let flat: Vec<Vec<f64>> = mats.iter().map(|m| m.as_slice().to_vec()).collect();
    orthonormal_vectors(&flat, rank_tol)
        .into_iter()
        .map(|v| Matrix::from_row_major(n, v).expect("finite"))
        .collect()
}

/// Orthonormal basis of the kernel of the linear map whose matrix has the
/// given rows (each of length `dim`).
///
/// Kernel directions are eigenvectors of the Gram matrix `A^t A`; each
/// candidate is classified by its directly recomputed image norm `|A q|`
/// against `rank_tol * sigma_max`, which avoids squaring the threshold.
pub fn nullspace(rows: &[Vec<f64>], dim: usize, rank_tol: f64) -> Vec<Vec<f64>> {
    let mut gram = Matrix::zeros(dim);
    for r in rows {
        debug_assert_eq!(r.len(), dim);
        for i in 0..dim {
            if r[i] == 0.0 {
                continue;
            }
            for j in 0..dim {
                gram[(i, j)] += r[i] * r[j];
            }
        }
    }
    let eig = sym_eig(&gram, &Tolerances::default()).expect("gram matrix is symmetric");
    let image_norms: Vec<f64> = (0..dim)
        .map(|k| {
            let q = eig.vectors.column(k);
            rows.iter().map(|r| dot(r, &q).powi(2)).sum::<f64>().sqrt()
        })
        .collect();
    let smax = image_norms.iter().cloned().fold(0.0, f64::max);
    (0..dim)
        .filter(|&k| smax == 0.0 || image_norms[k] <= rank_tol * smax)
        .map(|k| eig.vectors.column(k))
        .collect()
}

/// Component of `x` orthogonal to the span of an orthonormal family.
pub fn project_residual(x: &[f64], onb: &[Vec<f64>]) -> Vec<f64> {
    let mut r = x.to_vec();
    for o in onb {
        let c = dot(o, &r);
        r.iter_mut().zip(o).for_each(|(a, b)| *a -= c * b);
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dependent_pair_collapses() {
        let e12 = Matrix::unit(2, 0, 1);
        let b = orthonormal_basis(&[e12.clone(), e12.scale(2.0)], 1e-9);
        assert_eq!(b.len(), 1);
        assert!((&b[0] - &e12).norm() < 1e-15 || (&b[0] + &e12).norm() < 1e-15);
    }

    #[test]
    fn already_orthogonal_pair_normalized() {
        let h = Matrix::diag(&[1.0, -1.0]);
        let s = &Matrix::unit(2, 0, 1) + &Matrix::unit(2, 1, 0);
        let b = orthonormal_basis(&[h.clone(), s.clone()], 1e-9);
        assert_eq!(b.len(), 2);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!(b.iter().any(|m| (m - &h.scale(r)).norm() < 1e-15));
        assert!(b.iter().any(|m| (m - &s.scale(r)).norm() < 1e-15));
    }

    #[test]
    fn empty_in_empty_out() {
        assert!(orthonormal_basis(&[], 1e-9).is_empty());
        assert!(orthonormal_vectors(&[], 1e-9).is_empty());
    }

    #[test]
    fn nullspace_examples() {
        assert_eq!(nullspace(&[], 3, 1e-9).len(), 3);
        assert_eq!(nullspace(&[vec![0.0; 3]], 3, 1e-9).len(), 3);

        // e1 -> e1, e2 -> 0
        let k = nullspace(&[vec![1.0, 0.0], vec![0.0, 0.0]], 2, 1e-9);
        assert_eq!(k.len(), 1);
        assert!((k[0][1].abs() - 1.0).abs() < 1e-15 && k[0][0].abs() < 1e-15);
    }

    #[test]
    fn nullspace_of_evaluation_on_sl2() {
        // X -> X e1 for X = aH + bE12 + cE21: X e1 = (a, c)
        let rows = vec![vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0]];
        let k = nullspace(&rows, 3, 1e-9);
        assert_eq!(k.len(), 1);
        assert!((k[0][1].abs() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn nullspace_resolves_tiny_but_nonzero_rows() {
        // singular value 1e-7 relative: above the 1e-9 threshold, so no kernel
        let rows = vec![vec![1.0, 0.0], vec![0.0, 1e-7]];
        assert!(nullspace(&rows, 2, 1e-9).is_empty());
        let rows = vec![vec![1.0, 0.0], vec![0.0, 1e-11]];
        assert_eq!(nullspace(&rows, 2, 1e-9).len(), 1);
    }
}
