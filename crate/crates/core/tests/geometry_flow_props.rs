use orbitgrowth::catalog;
use orbitgrowth::geometry::{
    dist_to_kgv, kp_decompose, norm_dist_check, DistanceOptions, FactoredElement, Side,
};
use orbitgrowth::liealg::{cartan_split, stabilizer_data};
use orbitgrowth::numcore::{self, expm, svd_jacobi, Matrix, Tolerances};
use orbitgrowth::orbitflow::{kempf_ness_flow, moment_map, FlowOptions, FlowStatus};
use proptest::prelude::*;

fn coords(d: usize, range: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-range..range, d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn right_kp_roundtrip(y in coords(3, 2.0), x in coords(5, 1.0)) {
        let alg = catalog::sl(3);
        let split = cartan_split(&alg);
        let k = expm(&numcore::combine(&y, &split.k_basis));
        let s = numcore::combine(&x, &split.p_basis);
        let g = &expm(&s) * &k;
        let d = kp_decompose(&alg, &g, Side::Right).unwrap();
        prop_assert!((&d.reconstruct() - &g).max_abs() <= 1e-9 * g.norm());
        prop_assert!((&d.x - &s).max_abs() <= 1e-8);
        prop_assert!((d.dist_to_k - s.norm()).abs() <= 1e-8);
        prop_assert!(d.in_algebra(&alg.tol));
    }

    #[test]
    fn factored_element_matches_dense(y in coords(3, 2.0), x in coords(5, 1.0), z in coords(8, 0.5)) {
        let alg = catalog::sl(3);
        let split = cartan_split(&alg);
        let k = expm(&numcore::combine(&y, &split.k_basis));
        let s = numcore::combine(&x, &split.p_basis);
        let h = expm(&numcore::combine(&z, alg.basis()));
        let f = FactoredElement::new(k, s, h).unwrap();
        let dense = f.matrix();
        let mut expect: Vec<f64> = svd_jacobi(&dense).sigma.iter().map(|s| s.ln()).collect();
        let mut got = f.log_singular_values(&Matrix::identity(3));
        expect.sort_by(f64::total_cmp);
        got.sort_by(f64::total_cmp);
        for (a, b) in got.iter().zip(&expect) {
            prop_assert!((a - b).abs() <= 1e-9);
        }
        let v = [1.0, -0.5, 2.0];
        let direct = numcore::norm(&dense.mul_vec(&v)).ln();
        prop_assert!((f.log_norm_apply(&v) - direct).abs() <= 1e-10);
    }

    #[test]
    fn norm_distance_inequality(y in coords(3, 3.0), x in coords(5, 3.0)) {
        let alg = catalog::sl(3);
        let split = cartan_split(&alg);
        let g = &expm(&numcore::combine(&y, &split.k_basis)) * &expm(&numcore::combine(&x, &split.p_basis));
        prop_assert!(norm_dist_check(&g, &Tolerances::default()).unwrap().pass);
    }

    #[test]
    fn moment_map_is_k_equivariant(y in coords(3, 2.0), v in coords(3, 2.0)) {
        prop_assume!(numcore::norm(&v) > 1e-2);
        let alg = catalog::sl(3);
        let split = cartan_split(&alg);
        let k = expm(&numcore::combine(&y, &split.k_basis));
        let lhs = moment_map(&split, &k.mul_vec(&v)).m;
        let rhs = &(&k * &moment_map(&split, &v).m) * &k.transpose();
        prop_assert!((&lhs - &rhs).max_abs() <= 1e-10 * numcore::dot(&v, &v).max(1.0));
    }
}

#[test]
fn kgv_distance_of_sampled_elements() {
    let alg = catalog::sl(2);
    let split = cartan_split(&alg);
    let v = [1.0, 0.0];
    let stab = stabilizer_data(&alg, &split, &v).unwrap();
    let x = stab.ptilde_basis[0].clone();
    for (t, z) in [(5.0, 0.7), (30.0, -1.3), (60.0, 2.0)] {
        let h = expm(&stab.gv_basis[0].scale(z));
        let k = expm(&split.k_basis[0].scale(0.4));
        let g = FactoredElement::new(k, x.scale(t), h).unwrap();
        let d = dist_to_kgv(&stab, &g, &DistanceOptions::default()).unwrap();
        // h can be undone exactly, leaving k exp(tX) at distance t from K
        assert!(d.value <= t + 1e-6, "t = {t}: {}", d.value);
        assert!(d.value >= 0.0);
        assert!(d.value <= g.dist_to_k_right(&Matrix::identity(2)) + 1e-12);
    }
}

#[test]
fn flow_decreases_norm_and_reaches_minimal_vectors() {
    let entry = catalog::lookup("sl2-quad").unwrap();
    let alg = &entry.algebra;
    let v = vec![3.0, 0.5, 0.2];
    let trace = kempf_ness_flow(alg, &v, &FlowOptions::default()).unwrap();
    assert_eq!(trace.status, FlowStatus::ConvergedMinimal);
    for w in trace.iterates.windows(2) {
        assert!(numcore::norm(&w[1].w) <= numcore::norm(&w[0].w) * (1.0 + 1e-12));
    }
    let w = &trace.terminal;
    let m = moment_map(&cartan_split(alg), w).residual_norm;
    assert!(m <= 1e-8 * numcore::dot(w, w));
}

#[test]
fn flow_collapses_on_nilpotent_vectors() {
    let entry = catalog::lookup("sl2-quad").unwrap();
    let trace = kempf_ness_flow(&entry.algebra, &[1.0, 0.0, 0.0], &FlowOptions::default()).unwrap();
    assert_eq!(trace.status, FlowStatus::NormCollapse);
}
