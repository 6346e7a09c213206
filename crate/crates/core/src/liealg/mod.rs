//! Self-adjoint Lie subalgebras of `M(n, R)` and their structure.

mod stabilizer;

pub use stabilizer::{bounded_orbit_test, stabilizer_data, StabilizerData};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numcore::{
    self, dot, nullspace, orthonormal_basis, orthonormal_vectors, project_residual, sym_eig,
    Matrix, Tolerances,
};

/// Residuals measured while validating a basis.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct ValidationReport {
    pub rank: usize,
    /// max over pairs of `|[Xi,Xj] - proj| / (|Xi| |Xj|)`
    pub bracket_residual: f64,
    /// max over basis of `|Xi^t - proj| / |Xi|`
    pub transpose_residual: f64,
}

/// A validated, bracket- and transpose-closed subspace of `M(n, R)`.
#[derive(Clone, Debug)]
pub struct LieAlgebra {
    pub name: String,
    n: usize,
    basis: Vec<Matrix>,
    onb: Vec<Matrix>,
    onb_flat: Vec<Vec<f64>>,
    pub tol: Tolerances,
    pub report: ValidationReport,
}

impl LieAlgebra {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.onb.len()
    }

    /// The basis as supplied.
    pub fn basis(&self) -> &[Matrix] {
        &self.basis
    }

    /// Orthonormal basis under the trace inner product.
    pub fn onb(&self) -> &[Matrix] {
        &self.onb
    }

    /// Coordinates of `m` in [`Self::onb`] (orthogonal projection).
    pub fn coords(&self, m: &Matrix) -> Vec<f64> {
        self.onb_flat.iter().map(|b| dot(b, m.as_slice())).collect()
    }

    pub fn from_coords(&self, c: &[f64]) -> Matrix {
        numcore::combine(c, &self.onb)
    }

    /// `|m - proj(m)| / |m|`, zero for `m = 0`.
    pub fn membership_residual(&self, m: &Matrix) -> f64 {
        let nrm = m.norm();
        if nrm == 0.0 {
            return 0.0;
        }
        numcore::norm(&project_residual(m.as_slice(), &self.onb_flat)) / nrm
    }
}

/// Checks linear independence, bracket closure and transpose closure.
pub fn validate(name: &str, basis: Vec<Matrix>, tol: Tolerances) -> Result<LieAlgebra> {
    let first = basis.first().ok_or(Error::EmptyBasis)?;
    let n = first.n();
    for b in &basis {
        if b.n() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: b.n(),
            });
        }
        if !b.is_finite() {
            return Err(Error::NonFinite);
        }
    }
    let onb = orthonormal_basis(&basis, tol.rank);
    if onb.len() < basis.len() {
        return Err(Error::DegenerateBasis {
            rank: onb.len(),
            size: basis.len(),
        });
    }
    let onb_flat: Vec<Vec<f64>> = onb.iter().map(|m| m.as_slice().to_vec()).collect();
    let resid = |m: &Matrix| numcore::norm(&project_residual(m.as_slice(), &onb_flat));

    let mut bracket_residual: f64 = 0.0;
    for (i, a) in basis.iter().enumerate() {
        for b in &basis[i + 1..] {
            let r = resid(&a.commutator(b)) / (a.norm() * b.norm());
            bracket_residual = bracket_residual.max(r);
        }
    }
    let transpose_residual = basis
        .iter()
        .map(|a| resid(&a.transpose()) / a.norm())
        .fold(0.0, f64::max);
    let report = ValidationReport {
        rank: onb.len(),
        bracket_residual,
        transpose_residual,
    };

    if bracket_residual > tol.rank {
        return Err(Error::NotALieAlgebra {
            residual: bracket_residual,
        });
    }
    if transpose_residual > tol.rank {
        return Err(Error::NotSelfAdjoint {
            residual: transpose_residual,
        });
    }
    Ok(LieAlgebra {
        name: name.to_string(),
        n,
        basis,
        onb,
        onb_flat,
        tol,
        report,
    })
}

/// `part(m)` for each `m`, dropping parts that are negligible relative to `|m|`.
fn significant_parts(mats: &[Matrix], part: impl Fn(&Matrix) -> Matrix, tol: f64) -> Vec<Matrix> {
    mats.iter()
        .map(|m| (part(m), m.norm()))
        .filter(|(p, nrm)| p.norm() > tol * nrm)
        .map(|(p, _)| p)
        .collect()
}

/// Orthogonal split into skew-symmetric and symmetric parts.
#[derive(Clone, Debug)]
pub struct CartanSplit {
    pub k_basis: Vec<Matrix>,
    pub p_basis: Vec<Matrix>,
}

pub fn cartan_split(alg: &LieAlgebra) -> CartanSplit {
    let skew = significant_parts(&alg.basis, Matrix::skew_part, alg.tol.rank);
    let sym = significant_parts(&alg.basis, Matrix::sym_part, alg.tol.rank);
    let k_basis = orthonormal_basis(&skew, alg.tol.rank)
        .iter()
        .map(Matrix::skew_part)
        .collect();
    let p_basis = orthonormal_basis(&sym, alg.tol.rank)
        .iter()
        .map(Matrix::sym_part)
        .collect();
    CartanSplit { k_basis, p_basis }
}

/// Center of the algebra and its orthogonal complement.
#[derive(Clone, Debug)]
pub struct CenterSplit {
    pub z_basis: Vec<Matrix>,
    pub g0_basis: Vec<Matrix>,
    /// Center meets the symmetric part.
    pub z_p_flag: bool,
    /// Central skew element rescaled so that `J^2 = -I`, when one exists.
    pub z_k_generator: Option<Matrix>,
}

/// Matrices of `ad X` for every orthonormal basis element, in orthonormal coordinates.
fn ad_matrices(alg: &LieAlgebra, xs: &[Matrix]) -> Vec<Vec<Vec<f64>>> {
    let d = alg.dim();
    xs.iter()
        .map(|x| {
            let cols: Vec<Vec<f64>> = alg
                .onb
                .iter()
                .map(|b| alg.coords(&x.commutator(b)))
                .collect();
            // row i, col j
            (0..d)
                .map(|i| (0..d).map(|j| cols[j][i]).collect())
                .collect()
        })
        .collect()
}

pub fn center_split(alg: &LieAlgebra) -> CenterSplit {
    let d = alg.dim();
    let n2 = alg.n * alg.n;
    // c -> [sum c_k B_k, B_j] for every j, stacked
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(d * n2);
    for bj in &alg.onb {
        let brackets: Vec<Matrix> = alg.onb.iter().map(|bk| bk.commutator(bj)).collect();
        for e in 0..n2 {
            rows.push(brackets.iter().map(|m| m.as_slice()[e]).collect());
        }
    }
    let kernel = nullspace(&rows, d, alg.tol.rank);
    let z_basis: Vec<Matrix> = kernel.iter().map(|c| alg.from_coords(c)).collect();
    let z_flat: Vec<Vec<f64>> = z_basis.iter().map(|m| m.as_slice().to_vec()).collect();

    let comp: Vec<Vec<f64>> = alg
        .onb_flat
        .iter()
        .map(|b| project_residual(b, &z_flat))
        .collect();
    let g0_basis = orthonormal_vectors(&comp, alg.tol.rank)
        .into_iter()
        .map(|v| Matrix::from_row_major(alg.n, v).expect("finite"))
        .collect();

    let zp = orthonormal_basis(&significant_parts(&z_basis, Matrix::sym_part, 1e-6), 1e-6);
    let zk = orthonormal_basis(&significant_parts(&z_basis, Matrix::skew_part, 1e-6), 1e-6);
    let z_k_generator = if zk.len() == 1 {
        let j = zk[0].skew_part();
        let j2 = &j * &j;
        let mu = j2.trace() / alg.n as f64;
        let dev = (&j2 - &Matrix::identity(alg.n).scale(mu)).norm();
        (mu < 0.0 && dev <= 1e-8 * j.norm().powi(2)).then(|| j.scale(1.0 / (-mu).sqrt()))
    } else {
        None
    };
    CenterSplit {
        z_basis,
        g0_basis,
        z_p_flag: !zp.is_empty(),
        z_k_generator,
    }
}

/// Killing form data.
#[derive(Clone, Debug, Serialize)]
pub struct KillingReport {
    /// `B(Xi, Xj) = tr(ad Xi ad Xj)` in the supplied basis.
    pub killing_matrix: Vec<Vec<f64>>,
    pub neg_def_on_k: bool,
    pub pos_def_on_p: bool,
    pub semisimple: bool,
}

fn trace_product(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let d = a.len();
    (0..d)
        .map(|i| (0..d).map(|j| a[i][j] * b[j][i]).sum::<f64>())
        .sum()
}

fn gram_of(ads: &[Vec<Vec<f64>>]) -> Vec<Vec<f64>> {
    ads.iter()
        .map(|a| ads.iter().map(|b| trace_product(a, b)).collect())
        .collect()
}

fn eigenvalues(m: &[Vec<f64>]) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let d = m.len();
    let flat: Vec<f64> = m.iter().flatten().cloned().collect();
    let mat = Matrix::from_row_major(d, flat).expect("finite");
    sym_eig(&mat.sym_part(), &Tolerances::default())
        .expect("symmetric")
        .values
}

pub fn killing_analysis(alg: &LieAlgebra, split: &CartanSplit) -> KillingReport {
    let killing_matrix = gram_of(&ad_matrices(alg, &alg.basis));
    let full = eigenvalues(&gram_of(&ad_matrices(alg, &alg.onb)));
    let scale = full.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let thresh = alg.tol.rank * scale.max(f64::MIN_POSITIVE);
    let semisimple = scale > 0.0 && full.iter().all(|x| x.abs() > thresh);
    let on_k = eigenvalues(&gram_of(&ad_matrices(alg, &split.k_basis)));
    let on_p = eigenvalues(&gram_of(&ad_matrices(alg, &split.p_basis)));
    KillingReport {
        killing_matrix,
        neg_def_on_k: on_k.iter().all(|&x| x < -thresh),
        pos_def_on_p: on_p.iter().all(|&x| x > thresh),
        semisimple,
    }
}

/// Matrix of `B -> X B - B X` on `M(m)` in the row-major basis `E_ij`.
pub fn adjoint_matrix(x: &Matrix) -> Matrix {
    let m = x.n();
    let mut out = Matrix::zeros(m * m);
    for i in 0..m {
        for j in 0..m {
            let row = i * m + j;
            for k in 0..m {
                // (X B)_ij = sum_k X_ik B_kj
                out[(row, k * m + j)] += x[(i, k)];
                // (B X)_ij = sum_k B_ik X_kj
                out[(row, i * m + k)] -= x[(k, j)];
            }
        }
    }
    out
}

/// Image of the algebra under the adjoint representation on `M(m) = R^{m^2}`.
///
/// Basis elements whose images are dependent (central directions) are dropped.
pub fn build_adjoint_rep(alg: &LieAlgebra) -> Result<LieAlgebra> {
    let mut images: Vec<Matrix> = Vec::new();
    let mut kept: Vec<Vec<f64>> = Vec::new();
    for x in &alg.basis {
        let a = adjoint_matrix(x);
        let nrm = a.norm();
        if nrm == 0.0 {
            continue;
        }
        let onb = orthonormal_vectors(&kept, alg.tol.rank);
        let r = numcore::norm(&project_residual(a.as_slice(), &onb));
        if r > alg.tol.rank * nrm {
            kept.push(a.as_slice().to_vec());
            images.push(a);
        }
    }
    validate(&format!("ad-{}", alg.name), images, alg.tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn e(n: usize, i: usize, j: usize) -> Matrix {
        Matrix::unit(n, i, j)
    }

    #[test]
    fn validate_sl2() {
        let alg = catalog::sl(2);
        assert_eq!(alg.dim(), 3);
        assert!(alg.report.bracket_residual < 1e-15);
    }

    #[test]
    fn single_e12_is_not_self_adjoint() {
        let r = validate("e12", vec![e(2, 0, 1)], Tolerances::default());
        assert!(matches!(r, Err(Error::NotSelfAdjoint { .. })));
    }

    #[test]
    fn e12_e21_is_not_a_lie_algebra() {
        let r = validate("bad", vec![e(2, 0, 1), e(2, 1, 0)], Tolerances::default());
        assert!(matches!(r, Err(Error::NotALieAlgebra { .. })));
    }

    #[test]
    fn dependent_basis_rejected() {
        let h = Matrix::diag(&[1.0, -1.0]);
        let r = validate("dep", vec![h.clone(), h.scale(3.0)], Tolerances::default());
        assert!(matches!(
            r,
            Err(Error::DegenerateBasis { rank: 1, size: 2 })
        ));
        assert!(matches!(
            validate("e", vec![], Tolerances::default()),
            Err(Error::EmptyBasis)
        ));
    }

    #[test]
    fn sl2_cartan_split() {
        let alg = catalog::sl(2);
        let s = cartan_split(&alg);
        assert_eq!(s.k_basis.len(), 1);
        assert_eq!(s.p_basis.len(), 2);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let k = (&e(2, 0, 1) - &e(2, 1, 0)).scale(r);
        assert!((&s.k_basis[0] - &k).norm() < 1e-15 || (&s.k_basis[0] + &k).norm() < 1e-15);
        // p spans {H, E12+E21}
        let h = Matrix::diag(&[r, -r]);
        let sy = (&e(2, 0, 1) + &e(2, 1, 0)).scale(r);
        for p in &s.p_basis {
            let c1 = numcore::frob_inner(p, &h).unwrap();
            let c2 = numcore::frob_inner(p, &sy).unwrap();
            assert!((c1 * c1 + c2 * c2 - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn skew_and_symmetric_algebras() {
        let so3 = catalog::so(3);
        let s = cartan_split(&so3);
        assert_eq!((s.k_basis.len(), s.p_basis.len()), (3, 0));
        let diag = validate("h", vec![Matrix::diag(&[1.0, -1.0])], Tolerances::default()).unwrap();
        let s = cartan_split(&diag);
        assert_eq!((s.k_basis.len(), s.p_basis.len()), (0, 1));
    }

    #[test]
    fn center_examples() {
        let c = center_split(&catalog::gl(2));
        assert_eq!(c.z_basis.len(), 1);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let z = &c.z_basis[0];
        assert!(
            (z - &Matrix::diag(&[r, r])).norm() < 1e-12
                || (z + &Matrix::diag(&[r, r])).norm() < 1e-12
        );
        assert!(c.z_p_flag);
        assert_eq!(c.g0_basis.len(), 3);

        let c = center_split(&catalog::sl(2));
        assert!(c.z_basis.is_empty());
        assert!(!c.z_p_flag);

        let j = &e(2, 0, 1) - &e(2, 1, 0);
        let so2 = validate("so2", vec![j.clone()], Tolerances::default()).unwrap();
        let c = center_split(&so2);
        let gen = c.z_k_generator.expect("J exists");
        assert!((&gen - &j).norm() < 1e-14 || (&gen + &j).norm() < 1e-14);
        assert!((&(&gen * &gen) + &Matrix::identity(2)).norm() < 1e-14);
    }

    #[test]
    fn killing_sl2_h_h_is_eight() {
        let alg = catalog::sl(2);
        let rep = killing_analysis(&alg, &cartan_split(&alg));
        // basis order is H, E12, E21
        assert!((rep.killing_matrix[0][0] - 8.0).abs() < 1e-9);
        assert!(rep.semisimple && rep.neg_def_on_k && rep.pos_def_on_p);
    }

    #[test]
    fn killing_gl2_not_semisimple() {
        let alg = catalog::gl(2);
        let rep = killing_analysis(&alg, &cartan_split(&alg));
        assert!(!rep.semisimple);
        assert!(!rep.pos_def_on_p);
    }

    #[test]
    fn adjoint_of_diagonal_has_root_eigenvalues() {
        let l = [3.0, 1.5, -0.5];
        let a = adjoint_matrix(&Matrix::diag(&l));
        for i in 0..3 {
            for j in 0..3 {
                let idx = i * 3 + j;
                let col = a.column(idx);
                for (r, x) in col.iter().enumerate() {
                    let expect = if r == idx { l[i] - l[j] } else { 0.0 };
                    assert_eq!(*x, expect);
                }
            }
        }
        assert_eq!(adjoint_matrix(&Matrix::identity(3)).norm(), 0.0);
    }

    #[test]
    fn adjoint_sl3_validates() {
        let ad = build_adjoint_rep(&catalog::sl(3)).unwrap();
        assert_eq!(ad.dim(), 8);
        assert_eq!(ad.n(), 9);
        assert!(ad.report.transpose_residual < 1e-12);
        // gl(3) drops its central direction
        assert_eq!(build_adjoint_rep(&catalog::gl(3)).unwrap().dim(), 8);
    }
}
