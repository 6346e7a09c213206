//! Built-in algebras, named vectors, and the `alg_v1` JSON format.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::liealg::{build_adjoint_rep, validate, LieAlgebra};
use crate::numcore::{Matrix, Tolerances};

/// A catalog algebra with a few named vectors.
#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub description: &'static str,
    pub algebra: LieAlgebra,
    pub vectors: Vec<(&'static str, Vec<f64>)>,
}

pub const NAMES: &[&str] = &["sl2", "sl3", "gl2", "so3", "ad-sl3", "so2scale", "sl2-quad"];

/// Traceless matrices: `E_ii - E_(i+1)(i+1)` first, then `E_ij` (i != j) row-major.
pub fn sl_basis(n: usize) -> Vec<Matrix> {
    let mut b = Vec::new();
    for i in 0..n - 1 {
        let mut h = Matrix::zeros(n);
        h[(i, i)] = 1.0;
        h[(i + 1, i + 1)] = -1.0;
        b.push(h);
    }
    for i in 0..n {
        for j in 0..n {
            if i != j {
                b.push(Matrix::unit(n, i, j));
            }
        }
    }
    b
}

pub fn sl(n: usize) -> LieAlgebra {
    validate(&format!("sl{n}"), sl_basis(n), Tolerances::default()).expect("sl(n) is valid")
}

/// `{I} ∪ sl(n)`
pub fn gl(n: usize) -> LieAlgebra {
    let mut b = vec![Matrix::identity(n)];
    b.extend(sl_basis(n));
    validate(&format!("gl{n}"), b, Tolerances::default()).expect("gl(n) is valid")
}

pub fn so(n: usize) -> LieAlgebra {
    let mut b = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            b.push(&Matrix::unit(n, i, j) - &Matrix::unit(n, j, i));
        }
    }
    validate(&format!("so{n}"), b, Tolerances::default()).expect("so(n) is valid")
}

/// Block-diagonal matrix `a ⊕ b`.
pub fn direct_sum(a: &Matrix, b: &Matrix) -> Matrix {
    let (na, nb) = (a.n(), b.n());
    let mut m = Matrix::zeros(na + nb);
    for i in 0..na {
        for j in 0..na {
            m[(i, j)] = a[(i, j)];
        }
    }
    for i in 0..nb {
        for j in 0..nb {
            m[(na + i, na + j)] = b[(i, j)];
        }
    }
    m
}

/// `span{(E12 - E21) ⊕ 0, 0 ⊕ diag(1, -1)}` on R^4: a circle times a scaling.
pub fn so2_scale() -> LieAlgebra {
    let j = &Matrix::unit(2, 0, 1) - &Matrix::unit(2, 1, 0);
    let h = Matrix::diag(&[1.0, -1.0]);
    let z = Matrix::zeros(2);
    validate(
        "so2scale",
        vec![direct_sum(&j, &z), direct_sum(&z, &h)],
        Tolerances::default(),
    )
    .expect("so2scale is valid")
}

/// sl(2) acting on binary quadratic forms `S -> X S + S X^t`, in the
/// orthonormal basis `E11, E22, (E12 + E21)/sqrt 2` of symmetric 2x2 matrices.
pub fn sl2_quadratic_forms() -> LieAlgebra {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let sym_basis = [
        Matrix::unit(2, 0, 0),
        Matrix::unit(2, 1, 1),
        (&Matrix::unit(2, 0, 1) + &Matrix::unit(2, 1, 0)).scale(r),
    ];
    let rep = |x: &Matrix| {
        let mut m = Matrix::zeros(3);
        for (c, s) in sym_basis.iter().enumerate() {
            let img = &(x * s) + &(s * &x.transpose());
            for (r, t) in sym_basis.iter().enumerate() {
                m[(r, c)] = crate::numcore::frob_inner(&img, t).expect("same size");
            }
        }
        m
    };
    let basis = sl_basis(2).iter().map(rep).collect();
    validate("sl2-quad", basis, Tolerances::default()).expect("sl2-quad is valid")
}

fn std_vec(n: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[i] = 1.0;
    v
}

pub fn lookup(name: &str) -> Result<CatalogEntry> {
    let entry = match name {
        "sl2" => CatalogEntry {
            name: "sl2",
            description: "standard representation of sl(2, R) on R^2",
            algebra: sl(2),
            vectors: vec![("e1", std_vec(2, 0)), ("e2", std_vec(2, 1))],
        },
        "sl3" => CatalogEntry {
            name: "sl3",
            description: "standard representation of sl(3, R) on R^3",
            algebra: sl(3),
            vectors: vec![("e1", std_vec(3, 0))],
        },
        "gl2" => CatalogEntry {
            name: "gl2",
            description: "gl(2, R) = R I + sl(2, R) on R^2",
            algebra: gl(2),
            vectors: vec![("e1", std_vec(2, 0))],
        },
        "so3" => CatalogEntry {
            name: "so3",
            description: "so(3) on R^3 (compact, no symmetric part)",
            algebra: so(3),
            vectors: vec![("e1", std_vec(3, 0))],
        },
        "ad-sl3" => {
            let algebra = build_adjoint_rep(&sl(3))?;
            let mut v = vec![0.0; 9];
            v[5] = 1.0;
            v[7] = -1.0;
            CatalogEntry {
                name: "ad-sl3",
                description: "adjoint action of sl(3, R) on M(3, R) = R^9 by commutators",
                algebra,
                vectors: vec![("E23-E32", v)],
            }
        }
        "so2scale" => CatalogEntry {
            name: "so2scale",
            description: "rotation of R^2 ⊕ hyperbolic scaling of R^2",
            algebra: so2_scale(),
            vectors: vec![("e1", std_vec(4, 0)), ("generic", vec![1.0, 0.0, 1.0, 1.0])],
        },
        "sl2-quad" => CatalogEntry {
            name: "sl2-quad",
            description: "sl(2, R) acting on binary quadratic forms (symmetric 2x2 matrices)",
            algebra: sl2_quadratic_forms(),
            vectors: vec![("I", vec![1.0, 1.0, 0.0]), ("x2", vec![1.0, 0.0, 0.0])],
        },
        other => {
            return Err(Error::InvalidInput(format!(
                "unknown catalog algebra '{other}'"
            )))
        }
    };
    Ok(entry)
}

/// Validates every catalog entry.
pub fn self_test() -> Result<()> {
    for name in NAMES {
        let entry = lookup(name)?;
        validate(
            entry.name,
            entry.algebra.basis().to_vec(),
            entry.algebra.tol,
        )?;
        for (_, v) in &entry.vectors {
            if v.len() != entry.algebra.n() {
                return Err(Error::DimensionMismatch {
                    expected: entry.algebra.n(),
                    got: v.len(),
                });
            }
        }
    }
    Ok(())
}

/// Parses a vector for `alg`.
///
/// Accepted forms: comma-separated reals (`1,0,0`); or a signed sum of
/// terms `c*e<i>` (standard basis, 1-based) or, when `n = m^2`, `c*E<i><j>`
/// (elementary matrices of `M(m)`, row-major, 1-based single digits),
/// e.g. `E23-E32` or `2*E11+e4`.
pub fn parse_vector(alg: &LieAlgebra, text: &str) -> Result<Vec<f64>> {
    let n = alg.n();
    let text = text.trim();
    let bad = || Error::InvalidInput(format!("cannot parse vector '{text}'"));
    if text.contains(',') || text.parse::<f64>().is_ok() {
        let v: Vec<f64> = text
            .split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        if v.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: v.len(),
            });
        }
        return Ok(v);
    }
    let m = (n as f64).sqrt().round() as usize;
    let mut v = vec![0.0; n];
    let mut rest = text.replace(' ', "");
    if !rest.starts_with(['+', '-']) {
        rest.insert(0, '+');
    }
    let mut terms = Vec::new();
    let mut cur = String::new();
    for ch in rest.chars() {
        if (ch == '+' || ch == '-') && !cur.is_empty() && !cur.ends_with(['e', 'E', '*']) {
            terms.push(std::mem::take(&mut cur));
        }
        cur.push(ch);
    }
    terms.push(cur);
    for term in terms {
        let (sign, body) = term.split_at(1);
        let sign = if sign == "-" { -1.0 } else { 1.0 };
        let (coef, sym) = match body.split_once('*') {
            Some((c, s)) => (c.parse::<f64>().map_err(|_| bad())?, s),
            None => (1.0, body),
        };
        if let Some(idx) = sym.strip_prefix('E') {
            let digits: Vec<usize> = idx
                .chars()
                .map(|c| c.to_digit(10).map(|d| d as usize))
                .collect::<Option<_>>()
                .ok_or_else(bad)?;
            if m * m != n || digits.len() != 2 || digits.iter().any(|&d| d == 0 || d > m) {
                return Err(bad());
            }
            v[(digits[0] - 1) * m + digits[1] - 1] += sign * coef;
        } else if let Some(idx) = sym.strip_prefix('e') {
            let i: usize = idx.parse().map_err(|_| bad())?;
            if i == 0 || i > n {
                return Err(bad());
            }
            v[i - 1] += sign * coef;
        } else {
            return Err(bad());
        }
    }
    Ok(v)
}

/// Resolves a vector given either as a catalog vector name or in [`parse_vector`] syntax.
pub fn resolve_vector(
    entry: Option<&CatalogEntry>,
    alg: &LieAlgebra,
    text: &str,
) -> Result<Vec<f64>> {
    if let Some(e) = entry {
        if let Some((_, v)) = e.vectors.iter().find(|(name, _)| *name == text) {
            return Ok(v.clone());
        }
    }
    parse_vector(alg, text)
}

/// `alg_v1` JSON algebra file.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AlgebraFile {
    #[serde(default = "default_version")]
    pub version: String,
    pub name: String,
    pub n: usize,
    /// Each basis element as `n*n` row-major reals.
    pub basis: Vec<Vec<f64>>,
}

fn default_version() -> String {
    "alg_v1".into()
}

impl AlgebraFile {
    pub fn from_algebra(alg: &LieAlgebra) -> Self {
        Self {
            version: default_version(),
            name: alg.name.clone(),
            n: alg.n(),
            basis: alg.basis().iter().map(|m| m.as_slice().to_vec()).collect(),
        }
    }

    pub fn into_algebra(self, tol: Tolerances) -> Result<LieAlgebra> {
        if self.version != "alg_v1" {
            return Err(Error::InvalidInput(format!(
                "unsupported algebra version '{}'",
                self.version
            )));
        }
        let basis = self
            .basis
            .into_iter()
            .map(|row| Matrix::from_row_major(self.n, row))
            .collect::<Result<Vec<_>>>()?;
        validate(&self.name, basis, tol)
    }
}
