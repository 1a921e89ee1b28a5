//! The sharp matrix inequality and the transformed-Hessian factorization.
//!
//! For symmetric `A` with Newton comatrix `B = tr(A)A − A²` and a vector `v`,
//!
//! ```text
//! rhs − lhs = 2(Av,Bv) − (Av,v) tr B − ⅓|v|² (2 tr(BA) − tr B tr A)
//!           = 2 Σₖ wₖ² S₃⁽ᵏ⁾(λ),            w = Pv in the eigenbasis of A
//! ```
//!
//! which is nonnegative on the positive semidefinite cone, nonpositive on the
//! negative one, and identically zero for `N = 3`.

use crate::error::{Error, Result};
use crate::symmat::{cofactor_s2, eigen, elem_sym_values, newton_comatrix, omitted_sym, Spectrum, SymmetricMatrix};
use serde::{Deserialize, Serialize};

/// Semidefinite membership tolerance, relative to the spectral radius.
pub const SEMIDEF_TOL: f64 = 1e-12;
/// Sign tolerance for residuals, relative to [`inequality_scale`].
pub const RESIDUAL_SIGN_TOL: f64 = 1e-9;
/// Direct-vs-closed agreement, relative to [`inequality_scale`].
pub const RESIDUAL_AGREE_TOL: f64 = 1e-9;
/// `|U'|` below this is treated as a non-monotone transform.
pub const MIN_TRANSFORM_SLOPE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixSign {
    Positive,
    Negative,
    Indefinite,
}

impl MatrixSign {
    pub fn classify(spec: &Spectrum) -> Self {
        let tol = SEMIDEF_TOL * spec.spectral_radius().max(1.0);
        if spec.min() >= -tol {
            MatrixSign::Positive
        } else if spec.max() <= tol {
            MatrixSign::Negative
        } else {
            MatrixSign::Indefinite
        }
    }
}

/// `1 + ‖A‖_F³ |v|²`: both sides of the inequality are cubic in `A` and
/// quadratic in `v`.
pub fn inequality_scale(a: &SymmetricMatrix, v: &[f64]) -> f64 {
    let r: f64 = v.iter().map(|x| x * x).sum();
    1.0 + a.frobenius_norm().powi(3) * r
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityRecord {
    pub lhs: f64,
    pub rhs: f64,
    pub residual_direct: f64,
    pub residual_closed: f64,
    pub matrix_sign: MatrixSign,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    pub scale: f64,
}

impl InequalityRecord {
    fn semidef_tol(&self) -> f64 {
        SEMIDEF_TOL * self.min_eigenvalue.abs().max(self.max_eigenvalue.abs()).max(1.0)
    }

    pub fn agreement_gap(&self) -> f64 {
        (self.residual_direct - self.residual_closed).abs()
    }

    /// The record's invariants: direct and closed residuals agree, and the
    /// residual sign matches the matrix sign.
    pub fn check(&self) -> Result<()> {
        let tol = RESIDUAL_AGREE_TOL * self.scale;
        if self.agreement_gap() > tol {
            return Err(Error::Identity {
                what: "direct vs closed-form residual".into(),
                gap: self.agreement_gap(),
                tol,
            });
        }
        let sign_tol = RESIDUAL_SIGN_TOL * self.scale;
        let bad = match self.matrix_sign {
            MatrixSign::Positive => self.residual_direct < -sign_tol,
            MatrixSign::Negative => self.residual_direct > sign_tol,
            MatrixSign::Indefinite => false,
        };
        if bad {
            return Err(Error::Identity {
                what: format!("residual sign for {:?} semidefinite matrix", self.matrix_sign),
                gap: self.residual_direct,
                tol: sign_tol,
            });
        }
        Ok(())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_dims(a: &SymmetricMatrix, v: &[f64]) -> Result<()> {
    if a.dim() != v.len() {
        return Err(Error::input(format!(
            "vector length {} does not match matrix dimension {}",
            v.len(),
            a.dim()
        )));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::input("vector has a non-finite entry"));
    }
    a.validate()
}

/// Evaluates both sides of the matrix inequality and its residual two ways.
///
/// Only records; sign invariants are asserted by [`InequalityRecord::check`].
pub fn lemma1_evaluate(a: &SymmetricMatrix, v: &[f64]) -> Result<InequalityRecord> {
    check_dims(a, v)?;
    let b = newton_comatrix(a)?;
    let r = dot(v, v);
    let tr_a = a.trace();
    let tr_b = b.trace();
    let av = a.mul_vec(v);
    let bv = b.mul_vec(v);
    let lhs = r * (2.0 * b.contract(a) - tr_b * tr_a) / 3.0;
    let rhs = 2.0 * dot(&av, &bv) - dot(&av, v) * tr_b;

    let e = eigen(a)?;
    let w = e.to_eigenbasis(v);
    let spec = Spectrum {
        eigenvalues: e.values.clone(),
    };
    let mut closed = 0.0;
    for (k, wk) in w.iter().enumerate() {
        closed += wk * wk * omitted_sym(&spec, 3, k)?;
    }
    Ok(InequalityRecord {
        lhs,
        rhs,
        residual_direct: rhs - lhs,
        residual_closed: 2.0 * closed,
        matrix_sign: MatrixSign::classify(&spec),
        min_eigenvalue: spec.min(),
        max_eigenvalue: spec.max(),
        scale: inequality_scale(a, v),
    })
}

/// The reversed inequality for negative semidefinite matrices.
pub fn remark_sign_check(a: &SymmetricMatrix, v: &[f64]) -> Result<InequalityRecord> {
    let rec = lemma1_evaluate(a, v)?;
    if rec.max_eigenvalue > rec.semidef_tol() {
        return Err(Error::Precondition(format!(
            "matrix is not negative semidefinite (largest eigenvalue {:e})",
            rec.max_eigenvalue
        )));
    }
    rec.check()?;
    let tol = RESIDUAL_SIGN_TOL * rec.scale;
    if rec.residual_direct > tol {
        return Err(Error::Identity {
            what: "reversed inequality for a negative semidefinite matrix".into(),
            gap: rec.residual_direct,
            tol,
        });
    }
    Ok(rec)
}

/// `r = |v|²`, `s = tr A`, `q = <Av,v>`, `t = |Av|²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractionScalars {
    pub r: f64,
    pub s: f64,
    pub q: f64,
    pub t: f64,
}

/// Computes `(r, s, q, t)` and checks the six contraction identities used
/// in the expansion argument, with `B = v ⊗ v`:
///
/// * `S₂ⁱʲ(A)(AB+BA)ⱼᵢ = 2sq − 2t`
/// * `(rδ − vvᵗ) : A² = r tr(A²) − t`
/// * `S₂ⁱʲ(A)(Av)ⱼvᵢ = sq − t`
/// * `(rδ − vvᵗ) : (Av)(Av)ᵗ = rt − q²`
/// * `(rδ − vvᵗ) : (AB+BA) = 0`
/// * `(rδ − vvᵗ) : B² = 0`
pub fn contraction_scalars(a: &SymmetricMatrix, v: &[f64]) -> Result<ContractionScalars> {
    check_dims(a, v)?;
    let n = a.dim();
    let av = a.mul_vec(v);
    let sc = ContractionScalars {
        r: dot(v, v),
        s: a.trace(),
        q: dot(&av, v),
        t: dot(&av, &av),
    };
    let ContractionScalars { r, s, q, t } = sc;

    let cof = cofactor_s2(a)?;
    let bmat = SymmetricMatrix::outer(v)?;
    // AB + BA = (Av)vᵗ + v(Av)ᵗ
    let ab_ba = SymmetricMatrix::from_upper_fn(n, |i, j| av[i] * v[j] + v[i] * av[j])?;
    let proj = bmat.scaled(-1.0).shift_diagonal(r);
    let av_outer = SymmetricMatrix::outer(&av)?;
    let a2 = a.square();
    let b2 = bmat.square();
    let cof_av_v: f64 = {
        let c_av = cof.mul_vec(&av);
        dot(&c_av, v)
    };

    let scale = a.frobenius_norm().max(1.0).powi(2) * r.max(1.0).powi(3);
    let tol = 1e-10 * scale;
    let checks = [
        ("S2ij(A)(AB+BA)ji = 2sq-2t", cof.contract(&ab_ba), 2.0 * s * q - 2.0 * t),
        ("(r d - vv):A^2 = r tr(A^2) - t", proj.contract(&a2), r * a2.trace() - t),
        ("S2ij(A)(Av)j vi = sq - t", cof_av_v, s * q - t),
        (
            "(r d - vv):(Av)(Av) = rt - q^2",
            proj.contract(&av_outer),
            r * t - q * q,
        ),
        ("(r d - vv):(AB+BA) = 0", proj.contract(&ab_ba), 0.0),
        ("(r d - vv):B^2 = 0", proj.contract(&b2), 0.0),
    ];
    for (what, got, want) in checks {
        let gap = (got - want).abs();
        if gap > tol {
            return Err(Error::Identity {
                what: what.into(),
                gap,
                tol,
            });
        }
    }
    Ok(sc)
}

/// A strictly monotone scalar transform evaluated at one value of `u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransformEval {
    pub u_value: f64,
    pub u_prime: f64,
    pub u_second: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Monotone {
    Increasing,
    Decreasing,
}

impl TransformEval {
    pub fn new(u_value: f64, u_prime: f64, u_second: f64) -> Result<Self> {
        if !(u_value.is_finite() && u_prime.is_finite() && u_second.is_finite()) {
            return Err(Error::input("transform values must be finite"));
        }
        if u_prime.abs() < MIN_TRANSFORM_SLOPE {
            return Err(Error::SingularTransform(u_prime));
        }
        Ok(Self {
            u_value,
            u_prime,
            u_second,
        })
    }

    pub fn monotone(&self) -> Monotone {
        if self.u_prime > 0.0 {
            Monotone::Increasing
        } else {
            Monotone::Decreasing
        }
    }
}

/// The quantity `M` for a Hessian `h` and gradient `v`, written through the
/// invariants of `h`:
///
/// `M = ⅓|v|² [2 S₂ⁱʲ(h) (h²)ⱼᵢ − 2 S₂(h) tr h] − 2 S₂ⁱʲ(h)(hv)ⱼ(hv)ᵢ + 2 S₂(h) <hv,v>`.
///
/// Evaluated on `D²(U∘u)` this is the transported inequality; evaluated on
/// `D²u` it is the bracket multiplying `U'³`.
pub fn m_functional(h: &SymmetricMatrix, v: &[f64]) -> Result<f64> {
    let cof = cofactor_s2(h)?;
    let s2 = 0.5 * (h.trace().powi(2) - h.square().trace());
    let hv = h.mul_vec(v);
    let r = dot(v, v);
    let term1 = r * (2.0 * cof.contract(&h.square()) - 2.0 * s2 * h.trace()) / 3.0;
    let term2 = -2.0 * dot(&cof.mul_vec(&hv), &hv);
    let term3 = 2.0 * s2 * dot(&hv, v);
    Ok(term1 + term2 + term3)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lemma2Record {
    pub m_direct: f64,
    pub m_factored: f64,
    pub scale: f64,
}

/// Relative agreement of the direct and factored `M`.
pub const FACTOR_AGREE_TOL: f64 = 1e-8;

/// `M` evaluated directly on `hessU = D²(U∘u)` and as `U'³ · bracket(A_u)` with
/// `A_u = (hessU − U'' ∇u⊗∇u)/U'`.
pub fn lemma2_evaluate(hess_u: &SymmetricMatrix, gradu: &[f64], tr: &TransformEval) -> Result<Lemma2Record> {
    check_dims(hess_u, gradu)?;
    if tr.u_prime.abs() < MIN_TRANSFORM_SLOPE {
        return Err(Error::SingularTransform(tr.u_prime));
    }
    let vv = SymmetricMatrix::outer(gradu)?;
    let a_u = hess_u.lin_comb(1.0 / tr.u_prime, &vv, -tr.u_second / tr.u_prime);
    let m_direct = m_functional(hess_u, gradu)?;
    let m_factored = tr.u_prime.powi(3) * m_functional(&a_u, gradu)?;
    let scale = inequality_scale(hess_u, gradu).max(tr.u_prime.abs().powi(3) * inequality_scale(&a_u, gradu));
    let rec = Lemma2Record {
        m_direct,
        m_factored,
        scale,
    };
    let gap = (m_direct - m_factored).abs();
    let tol = FACTOR_AGREE_TOL * scale;
    if gap > tol {
        return Err(Error::Identity {
            what: "direct vs factored M".into(),
            gap,
            tol,
        });
    }
    let sign = MatrixSign::classify(&Spectrum {
        eigenvalues: eigen(hess_u)?.values,
    });
    if sign == MatrixSign::Positive && m_direct > RESIDUAL_SIGN_TOL * scale {
        return Err(Error::Identity {
            what: "M <= 0 for a convex transformed function".into(),
            gap: m_direct,
            tol: RESIDUAL_SIGN_TOL * scale,
        });
    }
    Ok(rec)
}

/// `m30 α³ + m21 α²β + m12 αβ² + m03 β³`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpansionCoeffs {
    pub m30: f64,
    pub m21: f64,
    pub m12: f64,
    pub m03: f64,
}

impl ExpansionCoeffs {
    pub fn eval(&self, alpha: f64, beta: f64) -> f64 {
        self.m30 * alpha.powi(3)
            + self.m21 * alpha * alpha * beta
            + self.m12 * alpha * beta * beta
            + self.m03 * beta.powi(3)
    }

    pub fn max_mixed(&self) -> f64 {
        self.m21.abs().max(self.m12.abs()).max(self.m03.abs())
    }
}

/// Probe pairs `(α, β)` for recovering the cubic expansion.
pub const PROBES: [(f64, f64); 4] = [(1.0, 0.0), (0.0, 1.0), (1.0, 1.0), (2.0, 1.0)];
/// Vanishing tolerance for the mixed coefficients, relative to `max(1, |m30|)`.
pub const VANISH_TOL: f64 = 1e-8;

/// Gaussian elimination with partial pivoting on a small dense system.
pub(crate) fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap_or(col);
        if a[piv][col].abs() < 1e-300 {
            return Err(Error::Numerical("singular probe system".into()));
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in (col + 1)..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = ((row + 1)..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Ok(x)
}

/// The `α³` coefficient written with the contraction scalars:
/// `⅓ r (2 S₂ⁱʲ(A)(A²)ⱼᵢ − 2 S₂(A) s) − 2 S₂ⁱʲ(A)(Av)ⱼ(Av)ᵢ + 2 S₂(A) q`.
pub fn leading_coefficient(a_u: &SymmetricMatrix, v: &[f64]) -> Result<f64> {
    let sc = contraction_scalars(a_u, v)?;
    let cof = cofactor_s2(a_u)?;
    let s2 = 0.5 * (sc.s * sc.s - a_u.square().trace());
    let av = a_u.mul_vec(v);
    Ok(
        sc.r * (2.0 * cof.contract(&a_u.square()) - 2.0 * s2 * sc.s) / 3.0 - 2.0 * dot(&cof.mul_vec(&av), &av)
            + 2.0 * s2 * sc.q,
    )
}

/// Recovers the `(α, β)` expansion of `M(αA_u + β∇u⊗∇u, ∇u)` from four
/// probes and checks that only the `α³` term survives.
pub fn expansion_coefficients(a_u: &SymmetricMatrix, gradu: &[f64]) -> Result<ExpansionCoeffs> {
    check_dims(a_u, gradu)?;
    let vv = SymmetricMatrix::outer(gradu)?;
    let mut rows = Vec::with_capacity(4);
    let mut vals = Vec::with_capacity(4);
    for &(al, be) in &PROBES {
        rows.push(vec![al.powi(3), al * al * be, al * be * be, be.powi(3)]);
        vals.push(m_functional(&a_u.lin_comb(al, &vv, be), gradu)?);
    }
    let x = solve_dense(rows, vals)?;
    let c = ExpansionCoeffs {
        m30: x[0],
        m21: x[1],
        m12: x[2],
        m03: x[3],
    };
    let tol = VANISH_TOL * c.m30.abs().max(1.0);
    if c.max_mixed() > tol {
        return Err(Error::Identity {
            what: "mixed expansion coefficients vanish".into(),
            gap: c.max_mixed(),
            tol,
        });
    }
    let lead = leading_coefficient(a_u, gradu)?;
    if (lead - c.m30).abs() > tol {
        return Err(Error::Identity {
            what: "alpha^3 coefficient equals the untransformed bracket".into(),
            gap: (lead - c.m30).abs(),
            tol,
        });
    }
    Ok(c)
}

/// `−2 Σₖ wₖ² S₃⁽ᵏ⁾(λ(h))` with `w` the eigenbasis coordinates of `v`.
pub fn m_closed_form(h: &SymmetricMatrix, v: &[f64]) -> Result<f64> {
    let e = eigen(h)?;
    let w = e.to_eigenbasis(v);
    let mut s = 0.0;
    for (k, wk) in w.iter().enumerate() {
        let rest: Vec<f64> = e
            .values
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != k)
            .map(|(_, &x)| x)
            .collect();
        s += wk * wk * elem_sym_values(&rest, 3);
    }
    Ok(-2.0 * s)
}
