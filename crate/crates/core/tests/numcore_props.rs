use orbitgrowth::numcore::{
    expm, logm_spd, nullspace, orthonormal_basis, polar, svd_jacobi, sym_eig, Matrix, Tolerances,
};
use proptest::prelude::*;

fn matrix(max_n: usize, range: f64) -> impl Strategy<Value = Matrix> {
    (1..=max_n).prop_flat_map(move |n| {
        prop::collection::vec(-range..range, n * n)
            .prop_map(move |d| Matrix::from_row_major(n, d).unwrap())
    })
}

fn gram_error(q: &Matrix) -> f64 {
    (&(&q.transpose() * q) - &Matrix::identity(q.n())).max_abs()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn sym_eig_reconstructs(a in matrix(6, 3.0)) {
        let s = a.sym_part();
        let e = sym_eig(&s, &Tolerances::default()).unwrap();
        prop_assert!((&e.reconstruct() - &s).max_abs() <= 1e-10 * s.norm().max(1.0));
        prop_assert!(gram_error(&e.vectors) <= 1e-12);
        prop_assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn svd_reconstructs(a in matrix(6, 3.0)) {
        let s = svd_jacobi(&a);
        let us = Matrix::from_columns(&(0..a.n()).map(|j| s.u.column(j).iter().map(|x| x * s.sigma[j]).collect()).collect::<Vec<_>>());
        prop_assert!((&(&us * &s.v.transpose()) - &a).max_abs() <= 1e-10 * a.norm().max(1.0));
        prop_assert!(s.sigma.iter().all(|x| *x >= 0.0));
    }

    #[test]
    fn expm_inverse(a in matrix(5, 1.0)) {
        let p = &expm(&a) * &expm(&a.scale(-1.0));
        prop_assert!((&p - &Matrix::identity(a.n())).max_abs() <= 1e-9);
    }

    #[test]
    fn expm_of_commuting_sum(a in matrix(5, 1.0), s in -2.0f64..2.0, t in -2.0f64..2.0) {
        let lhs = expm(&a.scale(s + t));
        let rhs = &expm(&a.scale(s)) * &expm(&a.scale(t));
        prop_assert!((&lhs - &rhs).max_abs() <= 1e-9 * lhs.norm().max(1.0));
    }

    #[test]
    fn polar_roundtrip(a in matrix(5, 1.0), b in matrix(5, 1.0)) {
        prop_assume!(a.n() == b.n());
        let g = &expm(&a) * &expm(&b);
        let p = polar(&g, &Tolerances::default()).unwrap();
        prop_assert!((&p.reconstruct() - &g).max_abs() <= 1e-8 * g.norm());
        prop_assert!(gram_error(&p.k) <= 1e-10);
        prop_assert!(p.x.asymmetry() <= 1e-12);
    }

    #[test]
    fn logm_inverts_expm_on_symmetric(a in matrix(5, 2.0)) {
        let s = a.sym_part();
        let l = logm_spd(&expm(&s), &Tolerances::default()).unwrap();
        prop_assert!((&l - &s).max_abs() <= 1e-9);
    }

    #[test]
    fn orthonormal_basis_is_orthonormal(mats in prop::collection::vec(matrix(3, 2.0), 1..8)) {
        let n = mats[0].n();
        let mats: Vec<Matrix> = mats.into_iter().filter(|m| m.n() == n).collect();
        let onb = orthonormal_basis(&mats, 1e-9);
        for (i, a) in onb.iter().enumerate() {
            for (j, b) in onb.iter().enumerate() {
                let ip: f64 = a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| x * y).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                prop_assert!((ip - expect).abs() <= 1e-12);
            }
        }
        prop_assert!(onb.len() <= mats.len());
    }

    #[test]
    fn nullspace_vectors_are_annihilated(rows in prop::collection::vec(prop::collection::vec(-2.0f64..2.0, 5), 1..4)) {
        let kernel = nullspace(&rows, 5, 1e-9);
        prop_assert!(kernel.len() >= 5 - rows.len());
        let scale: f64 = rows.iter().flatten().map(|x| x * x).sum::<f64>().sqrt().max(1.0);
        for q in &kernel {
            for r in &rows {
                let d: f64 = r.iter().zip(q).map(|(a, b)| a * b).sum();
                prop_assert!(d.abs() <= 1e-8 * scale);
            }
        }
    }
}

#[test]
fn non_finite_and_asymmetric_inputs_are_rejected() {
    let tol = Tolerances::default();
    let a = Matrix::from_rows(&[&[1.0, 2.0], &[0.0, 1.0]]).unwrap();
    assert!(sym_eig(&a, &tol).is_err());
    assert!(Matrix::from_row_major(2, vec![1.0, f64::NAN, 0.0, 1.0]).is_err());
    let singular = Matrix::from_rows(&[&[1.0, 1.0], &[1.0, 1.0]]).unwrap();
    assert!(polar(&singular, &tol).is_err());
    assert!(logm_spd(&Matrix::diag(&[1.0, -1.0]), &tol).is_err());
}
