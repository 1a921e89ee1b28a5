//! Dense real symmetric matrices of small dimension and their invariants.
//!
//! Everything here is sized for Hessians: `2 <= dim <= 8`. The spectrum comes
//! from cyclic Jacobi rotations, and the elementary symmetric functions from
//! the characteristic polynomial (Faddeev–LeVerrier), cross-checked against the
//! eigenvalue expansion.

mod jacobi;
mod sample;

pub use jacobi::{eigen, Eigen};
pub use sample::{sample_semidefinite, SemidefSample, Sign};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

pub const MIN_DIM: usize = 2;
pub const MAX_DIM: usize = 8;

/// Real symmetric `dim x dim` matrix; only the upper triangle is stored,
/// row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetricMatrix {
    dim: usize,
    upper: Vec<f64>,
}

#[inline]
fn packed_index(dim: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    // rows 0..i hold dim + (dim-1) + ... + (dim-i+1) entries
    i * dim - i * i.saturating_sub(1) / 2 + (j - i)
}

impl SymmetricMatrix {
    pub(crate) fn check_dim(dim: usize) -> Result<()> {
        if (MIN_DIM..=MAX_DIM).contains(&dim) {
            Ok(())
        } else {
            Err(Error::input(format!(
                "matrix dimension {dim} outside {MIN_DIM}..={MAX_DIM}"
            )))
        }
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        Self::check_dim(dim)?;
        Ok(Self {
            dim,
            upper: vec![0.0; dim * (dim + 1) / 2],
        })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::from_diagonal(&vec![1.0; dim])
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        let mut m = Self::zeros(diag.len())?;
        for (i, &d) in diag.iter().enumerate() {
            m.set(i, i, d);
        }
        m.validate()?;
        Ok(m)
    }

    /// Builds the matrix from `f(i, j)` evaluated on the upper triangle only.
    pub fn from_upper_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut m = Self::zeros(dim)?;
        for i in 0..dim {
            for j in i..dim {
                m.set(i, j, f(i, j));
            }
        }
        m.validate()?;
        Ok(m)
    }

    /// Builds the matrix from full rows. The rows must be symmetric up to
    /// `1e-12` relative to the largest entry; the upper triangle is kept.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::input("rows do not form a square matrix"));
        }
        let big = rows.iter().flatten().fold(0.0f64, |acc, x| acc.max(x.abs())).max(1.0);
        for i in 0..dim {
            for j in (i + 1)..dim {
                if (rows[i][j] - rows[j][i]).abs() > 1e-12 * big {
                    return Err(Error::input(format!("matrix is not symmetric at ({i},{j})")));
                }
            }
        }
        Self::from_upper_fn(dim, |i, j| rows[i][j])
    }

    /// `v vᵗ`
    pub fn outer(v: &[f64]) -> Result<Self> {
        Self::from_upper_fn(v.len(), |i, j| v[i] * v[j])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.upper[packed_index(self.dim, i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let k = packed_index(self.dim, i, j);
        self.upper[k] = value;
    }

    pub fn validate(&self) -> Result<()> {
        if self.upper.iter().all(|x| x.is_finite()) {
            Ok(())
        } else {
            Err(Error::input("matrix has a non-finite entry"))
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                s += self.get(i, j).powi(2);
            }
        }
        s.sqrt()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j)).collect())
            .collect()
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    /// `<self, other>` = Σᵢⱼ selfᵢⱼ otherᵢⱼ = tr(self · other).
    pub fn contract(&self, other: &SymmetricMatrix) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        let mut s = 0.0;
        for i in 0..self.dim {
            s += self.get(i, i) * other.get(i, i);
            for j in (i + 1)..self.dim {
                s += 2.0 * self.get(i, j) * other.get(i, j);
            }
        }
        s
    }

    /// Product of two symmetric matrices, as a dense matrix (generally not symmetric).
    pub fn mul_dense(&self, other: &SymmetricMatrix) -> Vec<Vec<f64>> {
        let n = self.dim;
        let mut out = vec![vec![0.0; n]; n];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..n).map(|k| self.get(i, k) * other.get(k, j)).sum();
            }
        }
        out
    }

    /// `self²`, which is symmetric.
    pub fn square(&self) -> SymmetricMatrix {
        let n = self.dim;
        let mut out = SymmetricMatrix {
            dim: n,
            upper: vec![0.0; self.upper.len()],
        };
        for i in 0..n {
            for j in i..n {
                out.set(i, j, (0..n).map(|k| self.get(i, k) * self.get(k, j)).sum());
            }
        }
        out
    }

    /// `a·self + b·other`
    pub fn lin_comb(&self, a: f64, other: &SymmetricMatrix, b: f64) -> SymmetricMatrix {
        debug_assert_eq!(self.dim, other.dim);
        SymmetricMatrix {
            dim: self.dim,
            upper: self
                .upper
                .iter()
                .zip(&other.upper)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        }
    }

    pub fn scaled(&self, a: f64) -> SymmetricMatrix {
        SymmetricMatrix {
            dim: self.dim,
            upper: self.upper.iter().map(|x| a * x).collect(),
        }
    }

    /// Adds `c` to every diagonal entry.
    pub fn shift_diagonal(&self, c: f64) -> SymmetricMatrix {
        let mut out = self.clone();
        for i in 0..self.dim {
            out.set(i, i, self.get(i, i) + c);
        }
        out
    }
}

/// Eigenvalues sorted ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(f64::NAN)
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(f64::NAN)
    }

    pub fn spectral_radius(&self) -> f64 {
        self.min().abs().max(self.max().abs())
    }
}

pub fn spectrum(a: &SymmetricMatrix) -> Result<Spectrum> {
    Ok(Spectrum {
        eigenvalues: eigen(a)?.values,
    })
}

/// Elementary symmetric function `e_k` of a list of values (`e_0 = 1`), by
/// the product expansion of `Π (1 + λᵢ t)`.
pub fn elem_sym_values(values: &[f64], k: usize) -> f64 {
    if k > values.len() {
        return 0.0;
    }
    let mut e = vec![0.0; k + 1];
    e[0] = 1.0;
    for (n, &x) in values.iter().enumerate() {
        for j in (1..=k.min(n + 1)).rev() {
            e[j] += x * e[j - 1];
        }
    }
    e[k]
}

/// Coefficients `c_0..=c_n` of `det(tI - A) = Σ c_{n-k} t^{n-k}` with
/// `c_n = 1`, by the Faddeev–LeVerrier recursion. Returned in order of
/// the power of `t` being removed: `out[k]` multiplies `t^{n-k}`.
fn char_poly(a: &SymmetricMatrix) -> Vec<f64> {
    let n = a.dim();
    let dense = a.to_dense();
    let mut out = vec![0.0; n + 1];
    out[0] = 1.0;
    // M_1 = I, c_1 = -tr(A); M_k = A M_{k-1} + c_{k-1} I; c_k = -tr(A M_k)/k
    let mut m = vec![vec![0.0; n]; n];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for k in 1..=n {
        // am = A * M
        let mut am = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                am[i][j] = (0..n).map(|l| dense[i][l] * m[l][j]).sum();
            }
        }
        let tr: f64 = (0..n).map(|i| am[i][i]).sum();
        out[k] = -tr / k as f64;
        for i in 0..n {
            am[i][i] += out[k];
        }
        m = am;
    }
    out
}

/// `S_k(λ(A))`, the k-th elementary symmetric function of the eigenvalues.
///
/// The characteristic-polynomial route is returned; the eigenvalue expansion
/// is computed alongside and the two must agree to `1e-9` relative to
/// `e_k(|λ|)`, which bounds every term of the expansion.
pub fn elem_sym(a: &SymmetricMatrix, k: usize) -> Result<f64> {
    a.validate()?;
    let n = a.dim();
    if k > n {
        return Err(Error::input(format!("order k={k} exceeds dimension {n}")));
    }
    if k == 0 {
        return Ok(1.0);
    }
    let coeffs = char_poly(a);
    let from_poly = if k.is_multiple_of(2) { coeffs[k] } else { -coeffs[k] };
    let spec = spectrum(a)?;
    let from_eigs = elem_sym_values(&spec.eigenvalues, k);
    let abs_vals: Vec<f64> = spec.eigenvalues.iter().map(|x| x.abs()).collect();
    let bound = elem_sym_values(&abs_vals, k);
    let tol = 1e-9 * bound.max(f64::MIN_POSITIVE);
    if (from_poly - from_eigs).abs() > tol && bound > 0.0 {
        return Err(Error::Identity {
            what: format!("S_{k} characteristic polynomial vs eigenvalue expansion"),
            gap: (from_poly - from_eigs).abs(),
            tol,
        });
    }
    Ok(from_poly)
}

/// The 2-Hessian cofactor matrix `S₂ⁱʲ(A) = (tr A) δᵢⱼ − Aᵢⱼ`.
pub fn cofactor_s2(a: &SymmetricMatrix) -> Result<SymmetricMatrix> {
    a.validate()?;
    Ok(a.scaled(-1.0).shift_diagonal(a.trace()))
}

/// The Newton comatrix `B = tr(A) A − A²`.
pub fn newton_comatrix(a: &SymmetricMatrix) -> Result<SymmetricMatrix> {
    a.validate()?;
    Ok(a.lin_comb(a.trace(), &a.square(), -1.0))
}

/// `S_k` of the spectrum with the eigenvalue at (0-based) index `m` removed.
/// Zero when fewer than `k` values remain.
pub fn omitted_sym(spec: &Spectrum, k: usize, m: usize) -> Result<f64> {
    let n = spec.len();
    if m >= n {
        return Err(Error::input(format!(
            "omitted index {m} out of range for {n} eigenvalues"
        )));
    }
    if k + 1 > n {
        return Ok(if k == 0 { 1.0 } else { 0.0 });
    }
    let rest: Vec<f64> = spec
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != m)
        .map(|(_, &x)| x)
        .collect();
    Ok(elem_sym_values(&rest, k))
}

/// Binomial coefficient as a float; only small arguments occur here.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn diag(d: &[f64]) -> SymmetricMatrix {
        SymmetricMatrix::from_diagonal(d).unwrap()
    }

    #[test]
    fn packed_storage_covers_upper_triangle() {
        for n in MIN_DIM..=MAX_DIM {
            let mut seen = vec![false; n * (n + 1) / 2];
            for i in 0..n {
                for j in i..n {
                    let k = packed_index(n, i, j);
                    assert!(!seen[k], "collision at ({i},{j}) for n={n}");
                    seen[k] = true;
                    assert_eq!(k, packed_index(n, j, i));
                }
            }
            assert!(seen.iter().all(|&s| s));
        }
    }

    #[test]
    fn spectrum_examples() {
        let s = spectrum(&SymmetricMatrix::identity(3).unwrap()).unwrap();
        for x in s.eigenvalues {
            assert_relative_eq!(x, 1.0, epsilon = 1e-14);
        }
        let s = spectrum(&diag(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(s.eigenvalues, vec![1.0, 2.0, 3.0]);
        let a = SymmetricMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let s = spectrum(&a).unwrap();
        assert_relative_eq!(s.eigenvalues[0], 1.0, epsilon = 1e-14);
        assert_relative_eq!(s.eigenvalues[1], 3.0, epsilon = 1e-14);
    }

    #[test]
    fn non_finite_entry_is_rejected() {
        let mut a = SymmetricMatrix::identity(3).unwrap();
        a.set(0, 2, f64::NAN);
        assert!(matches!(spectrum(&a), Err(Error::Input(_))));
        assert!(matches!(cofactor_s2(&a), Err(Error::Input(_))));
        assert!(SymmetricMatrix::from_diagonal(&[1.0, f64::INFINITY]).is_err());
    }

    #[test]
    fn dimension_limits() {
        assert!(SymmetricMatrix::zeros(1).is_err());
        assert!(SymmetricMatrix::zeros(9).is_err());
        assert!(SymmetricMatrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).is_err());
    }

    #[test]
    fn elem_sym_examples() {
        assert_relative_eq!(elem_sym(&diag(&[1.0, 2.0, 3.0]), 2).unwrap(), 11.0);
        for n in 2..=8 {
            let i = SymmetricMatrix::identity(n).unwrap();
            assert_relative_eq!(elem_sym(&i, 2).unwrap(), (n * (n - 1) / 2) as f64, max_relative = 1e-14);
        }
        let a = SymmetricMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        assert_relative_eq!(elem_sym(&a, 2).unwrap(), 3.0, max_relative = 1e-14);
        assert!(elem_sym(&a, 3).is_err());
        assert_eq!(elem_sym(&a, 0).unwrap(), 1.0);
    }

    #[test]
    fn cofactor_examples() {
        assert_eq!(cofactor_s2(&diag(&[1.0, 2.0, 3.0])).unwrap(), diag(&[5.0, 4.0, 3.0]));
        assert_eq!(
            cofactor_s2(&SymmetricMatrix::identity(3).unwrap()).unwrap(),
            diag(&[2.0, 2.0, 2.0])
        );
        let a = diag(&[1.0, 2.0, 3.0]);
        let c = cofactor_s2(&a).unwrap();
        assert_relative_eq!(c.contract(&a), 22.0);
        assert_relative_eq!(2.0 * elem_sym(&a, 2).unwrap(), 22.0);
    }

    #[test]
    fn newton_comatrix_examples() {
        let a = diag(&[1.0, 2.0, 3.0]);
        let b = newton_comatrix(&a).unwrap();
        assert_eq!(b, diag(&[5.0, 8.0, 9.0]));
        assert_relative_eq!(b.trace(), 22.0);
        let two_tr_ba = 2.0 * b.contract(&a);
        assert_relative_eq!(two_tr_ba, 96.0);
        assert_relative_eq!(
            b.trace() * a.trace() - 6.0 * elem_sym(&a, 3).unwrap(),
            96.0,
            max_relative = 1e-14
        );
        let i4 = SymmetricMatrix::identity(4).unwrap();
        assert_eq!(newton_comatrix(&i4).unwrap(), diag(&[3.0; 4]));
    }

    #[test]
    fn omitted_sym_examples() {
        let s3 = Spectrum {
            eigenvalues: vec![1.0, 5.0, 7.0],
        };
        for m in 0..3 {
            assert_eq!(omitted_sym(&s3, 3, m).unwrap(), 0.0);
        }
        let s4 = Spectrum {
            eigenvalues: vec![1.0, 2.0, 3.0, 4.0],
        };
        assert_eq!(omitted_sym(&s4, 3, 0).unwrap(), 24.0);
        let ones = Spectrum {
            eigenvalues: vec![1.0; 4],
        };
        for m in 0..4 {
            assert_eq!(omitted_sym(&ones, 3, m).unwrap(), 1.0);
        }
        assert!(omitted_sym(&s4, 2, 4).is_err());
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(3, 2), 3.0);
        assert_eq!(binomial(6, 2), 15.0);
        assert_eq!(binomial(2, 3), 0.0);
    }
}
