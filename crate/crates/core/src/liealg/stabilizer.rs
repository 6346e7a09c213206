use serde::Serialize;

use super::{CartanSplit, LieAlgebra};
use crate::error::{Error, Result};
use crate::numcore::{self, dot, nullspace, orthonormal_basis, Matrix};

/// Subspaces attached to a nonzero vector `v`.
#[derive(Clone, Debug, Serialize)]
pub struct StabilizerData {
    pub v: Vec<f64>,
    /// `g_v = {X : X v = 0}`, orthonormal.
    pub gv_basis: Vec<Matrix>,
    /// `k_v = g_v ∩ so(n)`
    pub kv_basis: Vec<Matrix>,
    /// `p_v = g_v ∩ sym(n)`
    pub pv_basis: Vec<Matrix>,
    /// `(k + g_v)^⊥` inside `g`, orthonormal and symmetric.
    pub ptilde_basis: Vec<Matrix>,
}

impl StabilizerData {
    pub fn dims(&self) -> (usize, usize, usize, usize) {
        (
            self.gv_basis.len(),
            self.kv_basis.len(),
            self.pv_basis.len(),
            self.ptilde_basis.len(),
        )
    }
}

/// Kernel of `w -> sum_i w_i part(B_i)` expressed as matrices `sum_i w_i B_i`.
fn kernel_of_part(basis: &[Matrix], part: impl Fn(&Matrix) -> Matrix, tol: f64) -> Vec<Matrix> {
    if basis.is_empty() {
        return Vec::new();
    }
    let parts: Vec<Matrix> = basis.iter().map(part).collect();
    let len = parts[0].as_slice().len();
    let rows: Vec<Vec<f64>> = (0..len)
        .map(|e| parts.iter().map(|p| p.as_slice()[e]).collect())
        .collect();
    nullspace(&rows, basis.len(), tol)
        .iter()
        .map(|w| numcore::combine(w, basis))
        .collect()
}

pub fn stabilizer_data(alg: &LieAlgebra, split: &CartanSplit, v: &[f64]) -> Result<StabilizerData> {
    let n = alg.n();
    if v.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: v.len(),
        });
    }
    let vn = numcore::norm(v);
    if vn == 0.0 {
        return Err(Error::ZeroVector);
    }
    let tol = alg.tol.rank;
    let d = alg.dim();

    // c -> (sum c_k B_k) v
    let images: Vec<Vec<f64>> = alg.onb().iter().map(|b| b.mul_vec(v)).collect();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|a| images.iter().map(|im| im[a]).collect())
        .collect();
    let gv_basis: Vec<Matrix> = nullspace(&rows, d, tol)
        .iter()
        .map(|c| alg.from_coords(c))
        .collect();

    let kv_basis = kernel_of_part(&gv_basis, Matrix::sym_part, tol);
    let pv_basis = kernel_of_part(&gv_basis, Matrix::skew_part, tol);

    // complement of span(k ∪ g_v): coordinates orthogonal to every spanning element
    let spanning: Vec<Matrix> = split.k_basis.iter().chain(&gv_basis).cloned().collect();
    let span_onb = orthonormal_basis(&spanning, tol);
    let expected = split.k_basis.len() + gv_basis.len() - kv_basis.len();
    if span_onb.len() != expected {
        return Err(Error::Diagnostic(format!(
            "dim(k + g_v) = {} but dim k + dim g_v - dim k_v = {}",
            span_onb.len(),
            expected
        )));
    }
    let ptilde_basis: Vec<Matrix> = if span_onb.is_empty() {
        alg.onb().to_vec()
    } else {
        let rows: Vec<Vec<f64>> = span_onb
            .iter()
            .map(|s| {
                alg.onb()
                    .iter()
                    .map(|b| dot(b.as_slice(), s.as_slice()))
                    .collect()
            })
            .collect();
        nullspace(&rows, d, tol)
            .iter()
            .map(|c| alg.from_coords(c))
            .collect()
    };
    let ptilde_basis: Vec<Matrix> = ptilde_basis
        .into_iter()
        .map(|m| {
            let asym = m.asymmetry();
            if asym > 1e-8 {
                Err(Error::Diagnostic(format!(
                    "complement element not symmetric ({asym:e})"
                )))
            } else {
                Ok(m.sym_part())
            }
        })
        .collect::<Result<_>>()?;

    Ok(StabilizerData {
        v: v.to_vec(),
        gv_basis,
        kv_basis,
        pv_basis,
        ptilde_basis,
    })
}

/// Bounded orbit test: `(k + g_v)^⊥ = 0` and, independently, `X v = 0` for all `X` in `p`.
pub fn bounded_orbit_test(split: &CartanSplit, stab: &StabilizerData) -> Result<bool> {
    let by_complement = stab.ptilde_basis.is_empty();
    let vn = numcore::norm(&stab.v);
    let max_move = split
        .p_basis
        .iter()
        .map(|p| numcore::norm(&p.mul_vec(&stab.v)) / p.norm())
        .fold(0.0, f64::max);
    let by_p_action = max_move <= 1e-8 * vn;
    if by_complement != by_p_action {
        return Err(Error::Diagnostic(format!(
            "bounded-orbit criteria disagree: dim complement = {}, max |Xv|/|v| over p = {:.3e}",
            stab.ptilde_basis.len(),
            max_move / vn
        )));
    }
    Ok(by_complement)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::liealg::cartan_split;

    #[test]
    fn sl2_e1() {
        let alg = catalog::sl(2);
        let split = cartan_split(&alg);
        let st = stabilizer_data(&alg, &split, &[1.0, 0.0]).unwrap();
        assert_eq!(st.dims(), (1, 0, 0, 1));
        let e12 = Matrix::unit(2, 0, 1);
        assert!((&st.gv_basis[0] - &e12).norm() < 1e-12 || (&st.gv_basis[0] + &e12).norm() < 1e-12);
        let h = Matrix::diag(&[1.0, -1.0]).scale(std::f64::consts::FRAC_1_SQRT_2);
        let p = &st.ptilde_basis[0];
        assert!((p - &h).norm() < 1e-12 || (p + &h).norm() < 1e-12);
        assert!(!bounded_orbit_test(&split, &st).unwrap());
    }

    #[test]
    fn adjoint_sl3_rotation_vector() {
        let entry = catalog::lookup("ad-sl3").unwrap();
        let alg = entry.algebra;
        let split = cartan_split(&alg);
        let v = catalog::parse_vector(&alg, "E23-E32").unwrap();
        let st = stabilizer_data(&alg, &split, &v).unwrap();
        let (gv, kv, pv, pt) = st.dims();
        assert_eq!(gv, 2);
        assert_eq!(pt, 4);
        assert_eq!((kv, pv), (1, 1));
    }

    #[test]
    fn fixed_vector_has_full_stabilizer() {
        // the identity matrix is fixed by the adjoint action
        let alg = catalog::lookup("ad-sl3").unwrap().algebra;
        let split = cartan_split(&alg);
        let v = catalog::parse_vector(&alg, "E11+E22+E33").unwrap();
        let st = stabilizer_data(&alg, &split, &v).unwrap();
        assert_eq!(st.gv_basis.len(), alg.dim());
        assert!(st.ptilde_basis.is_empty());
        assert!(bounded_orbit_test(&split, &st).unwrap());
    }

    #[test]
    fn circle_block_is_bounded() {
        let alg = catalog::lookup("so2scale").unwrap().algebra;
        let split = cartan_split(&alg);
        let st = stabilizer_data(&alg, &split, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(bounded_orbit_test(&split, &st).unwrap());
        let st = stabilizer_data(&alg, &split, &[1.0, 0.0, 1.0, 1.0]).unwrap();
        assert!(!bounded_orbit_test(&split, &st).unwrap());
        assert!(st.gv_basis.is_empty());
    }

    #[test]
    fn zero_vector_rejected() {
        let alg = catalog::sl(2);
        let split = cartan_split(&alg);
        assert!(matches!(
            stabilizer_data(&alg, &split, &[0.0, 0.0]),
            Err(Error::ZeroVector)
        ));
    }
}
