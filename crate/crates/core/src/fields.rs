//! Closed-form scalar fields with analytic derivatives, and the pointwise
//! identities of the 2-Hessian operator evaluated on them.

use crate::error::{Error, Result};
use crate::symmat::{cofactor_s2, eigen, elem_sym_values, SymmetricMatrix};
use crate::transform::Transform;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Value, gradient and Hessian of a field at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub hessian: SymmetricMatrix,
}

impl Jet {
    pub fn grad_norm(&self) -> f64 {
        self.gradient.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn s2(&self) -> f64 {
        let h = &self.hessian;
        0.5 * (h.trace().powi(2) - h.square().trace())
    }
}

/// Anything that can report second-order jets at points.
pub trait SecondOrderField {
    fn dim(&self) -> usize;
    fn jet(&self, x: &[f64]) -> Result<Jet>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldFamily {
    Quadratic,
    RadialPower,
    GaussianBump,
    Polynomial,
}

/// `coeff · Π xᵢ^{powers[i]}`
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub coeff: f64,
    pub powers: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SyntheticField {
    /// `½ xᵗQx + bᵗx + c`
    Quadratic {
        hessian: SymmetricMatrix,
        linear: Vec<f64>,
        constant: f64,
    },
    /// `a (|x|^p − R^p)`, `p >= 2`
    RadialPower {
        dim: usize,
        amplitude: f64,
        power: f64,
        radius: f64,
    },
    /// `−A exp(−|x − c|² / 2σ²)`
    GaussianBump {
        center: Vec<f64>,
        amplitude: f64,
        width: f64,
    },
    Polynomial {
        dim: usize,
        terms: Vec<Monomial>,
    },
}

impl SyntheticField {
    pub fn quadratic(hessian: SymmetricMatrix, linear: Vec<f64>, constant: f64) -> Result<Self> {
        if linear.len() != hessian.dim() {
            return Err(Error::input("linear term has the wrong dimension"));
        }
        Ok(SyntheticField::Quadratic {
            hessian,
            linear,
            constant,
        })
    }

    /// `a (|x|² − R²)` in `dim` dimensions.
    pub fn radial_quadratic(dim: usize, amplitude: f64, radius: f64) -> Result<Self> {
        Self::radial_power(dim, amplitude, 2.0, radius)
    }

    pub fn radial_power(dim: usize, amplitude: f64, power: f64, radius: f64) -> Result<Self> {
        if !(2..=8).contains(&dim) {
            return Err(Error::input(format!("dimension {dim} out of range")));
        }
        if power < 2.0 {
            return Err(Error::input("radial power must be >= 2 for a C² field"));
        }
        Ok(SyntheticField::RadialPower {
            dim,
            amplitude,
            power,
            radius,
        })
    }

    pub fn gaussian_bump(center: Vec<f64>, amplitude: f64, width: f64) -> Result<Self> {
        if width <= 0.0 {
            return Err(Error::input("bump width must be positive"));
        }
        Ok(SyntheticField::GaussianBump {
            center,
            amplitude,
            width,
        })
    }

    pub fn polynomial(dim: usize, terms: Vec<Monomial>) -> Result<Self> {
        if terms.iter().any(|t| t.powers.len() != dim) {
            return Err(Error::input("monomial arity does not match dimension"));
        }
        Ok(SyntheticField::Polynomial { dim, terms })
    }

    /// `x⁴ − 6x²y² + y⁴`, a harmonic quartic saddle in the plane.
    pub fn quartic_saddle() -> Self {
        let m = |c: f64, a: u32, b: u32| Monomial {
            coeff: c,
            powers: vec![a, b],
        };
        SyntheticField::Polynomial {
            dim: 2,
            terms: vec![m(1.0, 4, 0), m(-6.0, 2, 2), m(1.0, 0, 4)],
        }
    }

    pub fn family(&self) -> FieldFamily {
        match self {
            SyntheticField::Quadratic { .. } => FieldFamily::Quadratic,
            SyntheticField::RadialPower { .. } => FieldFamily::RadialPower,
            SyntheticField::GaussianBump { .. } => FieldFamily::GaussianBump,
            SyntheticField::Polynomial { .. } => FieldFamily::Polynomial,
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            SyntheticField::Quadratic {
                hessian,
                linear,
                constant,
            } => {
                let qx = hessian.mul_vec(x);
                0.5 * dot(x, &qx) + dot(linear, x) + constant
            }
            SyntheticField::RadialPower {
                amplitude,
                power,
                radius,
                ..
            } => amplitude * (norm(x).powf(*power) - radius.powf(*power)),
            SyntheticField::GaussianBump {
                center,
                amplitude,
                width,
            } => {
                let d2: f64 = x.iter().zip(center).map(|(a, b)| (a - b).powi(2)).sum();
                -amplitude * (-d2 / (2.0 * width * width)).exp()
            }
            SyntheticField::Polynomial { terms, .. } => terms
                .iter()
                .map(|t| {
                    t.coeff
                        * t.powers
                            .iter()
                            .zip(x)
                            .map(|(&p, &xi)| xi.powi(p as i32))
                            .product::<f64>()
                })
                .sum(),
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `d^k/dx^k x^p`
fn power_derivative(x: f64, p: u32, k: u32) -> f64 {
    if k > p {
        return 0.0;
    }
    let falling: f64 = (0..k).map(|i| (p - i) as f64).product();
    falling * x.powi((p - k) as i32)
}

impl SecondOrderField for SyntheticField {
    fn dim(&self) -> usize {
        match self {
            SyntheticField::Quadratic { hessian, .. } => hessian.dim(),
            SyntheticField::RadialPower { dim, .. } => *dim,
            SyntheticField::GaussianBump { center, .. } => center.len(),
            SyntheticField::Polynomial { dim, .. } => *dim,
        }
    }

    fn jet(&self, x: &[f64]) -> Result<Jet> {
        let n = self.dim();
        if x.len() != n {
            return Err(Error::input("point has the wrong dimension"));
        }
        let value = self.value(x);
        let (gradient, hessian) = match self {
            SyntheticField::Quadratic { hessian, linear, .. } => {
                let g = hessian.mul_vec(x).iter().zip(linear).map(|(a, b)| a + b).collect();
                (g, hessian.clone())
            }
            SyntheticField::RadialPower {
                amplitude: a, power: p, ..
            } => {
                let r = norm(x);
                if r == 0.0 {
                    // p = 2 is the only power with a nonzero Hessian at the origin
                    let c = if *p == 2.0 { 2.0 * a } else { 0.0 };
                    (vec![0.0; n], SymmetricMatrix::identity(n)?.scaled(c))
                } else {
                    let g = a * p * r.powf(p - 2.0);
                    let grad = x.iter().map(|xi| g * xi).collect();
                    let k = a * p * (p - 2.0) * r.powf(p - 4.0);
                    let h = SymmetricMatrix::from_upper_fn(n, |i, j| k * x[i] * x[j] + if i == j { g } else { 0.0 })?;
                    (grad, h)
                }
            }
            SyntheticField::GaussianBump {
                center,
                amplitude,
                width,
            } => {
                let d: Vec<f64> = x.iter().zip(center).map(|(a, b)| a - b).collect();
                let s2 = width * width;
                let g = amplitude * (-dot(&d, &d) / (2.0 * s2)).exp();
                let grad = d.iter().map(|di| g * di / s2).collect();
                let h = SymmetricMatrix::from_upper_fn(n, |i, j| {
                    g * ((if i == j { 1.0 / s2 } else { 0.0 }) - d[i] * d[j] / (s2 * s2))
                })?;
                (grad, h)
            }
            SyntheticField::Polynomial { terms, .. } => {
                let mut grad = vec![0.0; n];
                let mut hess = SymmetricMatrix::zeros(n)?;
                for t in terms {
                    let base: Vec<f64> = (0..n).map(|i| x[i].powi(t.powers[i] as i32)).collect();
                    let prod_except =
                        |skip: &[usize]| -> f64 { (0..n).filter(|i| !skip.contains(i)).map(|i| base[i]).product() };
                    for i in 0..n {
                        grad[i] += t.coeff * power_derivative(x[i], t.powers[i], 1) * prod_except(&[i]);
                        for j in i..n {
                            let d = if i == j {
                                power_derivative(x[i], t.powers[i], 2) * prod_except(&[i])
                            } else {
                                power_derivative(x[i], t.powers[i], 1)
                                    * power_derivative(x[j], t.powers[j], 1)
                                    * prod_except(&[i, j])
                            };
                            hess.set(i, j, hess.get(i, j) + t.coeff * d);
                        }
                    }
                }
                (grad, hess)
            }
        };
        hessian.validate()?;
        Ok(Jet {
            value,
            gradient,
            hessian,
        })
    }
}

/// Largest relative disagreement between the analytic derivatives and central
/// differences of `u` with step `h` (first derivatives from two-point,
/// second from three/four-point stencils).
pub fn finite_difference_error(fld: &SyntheticField, x: &[f64], h: f64) -> Result<f64> {
    let n = fld.dim();
    let jet = fld.jet(x)?;
    let shifted = |steps: &[(usize, f64)]| -> f64 {
        let mut y = x.to_vec();
        for &(i, s) in steps {
            y[i] += s;
        }
        fld.value(&y)
    };
    let gscale = jet.grad_norm().max(1.0);
    let hscale = jet.hessian.frobenius_norm().max(1.0);
    let mut worst = 0.0f64;
    for i in 0..n {
        let d1 = (shifted(&[(i, h)]) - shifted(&[(i, -h)])) / (2.0 * h);
        worst = worst.max((d1 - jet.gradient[i]).abs() / gscale);
        for j in i..n {
            let d2 = if i == j {
                (shifted(&[(i, h)]) - 2.0 * jet.value + shifted(&[(i, -h)])) / (h * h)
            } else {
                (shifted(&[(i, h), (j, h)]) - shifted(&[(i, h), (j, -h)]) - shifted(&[(i, -h), (j, h)])
                    + shifted(&[(i, -h), (j, -h)]))
                    / (4.0 * h * h)
            };
            worst = worst.max((d2 - jet.hessian.get(i, j)).abs() / hscale);
        }
    }
    Ok(worst)
}

/// `S₂ᵏˡ(D²u) u,ₖₗ − 2 S₂(D²u)`; zero by degree-2 homogeneity.
pub fn euler_identity_gap_jet(jet: &Jet) -> Result<f64> {
    let cof = cofactor_s2(&jet.hessian)?;
    Ok(cof.contract(&jet.hessian) - 2.0 * jet.s2())
}

pub fn euler_identity_gap(fld: &impl SecondOrderField, x: &[f64]) -> Result<f64> {
    euler_identity_gap_jet(&fld.jet(x)?)
}

/// Tolerance scale for the Euler gap: `1 + ‖D²u‖²`.
pub fn euler_scale(jet: &Jet) -> f64 {
    1.0 + jet.hessian.frobenius_norm().powi(2)
}

/// Gradients below this are treated as critical points.
pub const CRITICAL_GRAD: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureProbe {
    pub point: Vec<f64>,
    pub grad_norm: f64,
    pub s2_value: f64,
    /// `S₂ⁱʲ u,ᵢ u,ₗ u,ₗⱼ`
    pub lhs_334: f64,
    /// `(S₂|∇u|² − lhs_334) / |∇u|³`
    pub h2_extracted: f64,
    /// Second elementary symmetric function of the level-set principal
    /// curvatures, from the shape operator `P D²u P / |∇u|`.
    pub geometric_s2_kappa: f64,
    /// Sum of the principal curvatures.
    pub geometric_h1: f64,
    /// `|∇u| · S₂(κ)`
    pub weighted_candidate: f64,
    /// Whether `H₂ = S₂(κ)` closes the level-set identity.
    pub closes_with_plain: bool,
    /// Whether `H₂ = |∇u| S₂(κ)` closes the level-set identity.
    pub closes_with_weighted: bool,
}

/// Principal curvatures of the level set through a point, as the nonzero
/// part of the spectrum of `P D²u P / |∇u|` with `P = I − n nᵗ`.
pub fn level_set_curvatures(jet: &Jet) -> Result<Vec<f64>> {
    let g = jet.grad_norm();
    if g < CRITICAL_GRAD {
        return Err(Error::Precondition(format!(
            "|grad u| = {g:e} is below the critical-point threshold"
        )));
    }
    let n = jet.hessian.dim();
    let nrm: Vec<f64> = jet.gradient.iter().map(|x| x / g).collect();
    let p = |i: usize, j: usize| (if i == j { 1.0 } else { 0.0 }) - nrm[i] * nrm[j];
    let h = &jet.hessian;
    let shape = SymmetricMatrix::from_upper_fn(n, |i, j| {
        let mut s = 0.0;
        for k in 0..n {
            for l in 0..n {
                s += p(i, k) * h.get(k, l) * p(l, j);
            }
        }
        s / g
    })?;
    let e = eigen(&shape)?;
    // drop the eigenvalue belonging to the normal direction
    let normal_idx = (0..n)
        .max_by(|&a, &b| {
            let pa: f64 = (0..n).map(|i| e.vectors[i][a] * nrm[i]).sum::<f64>().abs();
            let pb: f64 = (0..n).map(|i| e.vectors[i][b] * nrm[i]).sum::<f64>().abs();
            pa.total_cmp(&pb)
        })
        .unwrap_or(0);
    Ok(e.values
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != normal_idx)
        .map(|(_, &x)| x)
        .collect())
}

/// Relative tolerance for closing the level-set identity with a candidate H₂.
pub const H2_CLOSE_TOL: f64 = 1e-8;

pub fn levelset_h2_extract_jet(jet: &Jet, point: &[f64]) -> Result<CurvatureProbe> {
    let g = jet.grad_norm();
    if g < CRITICAL_GRAD {
        return Err(Error::Precondition(format!(
            "probe at near-critical point (|grad u| = {g:e})"
        )));
    }
    let cof = cofactor_s2(&jet.hessian)?;
    let hv = jet.hessian.mul_vec(&jet.gradient);
    let lhs = dot(&cof.mul_vec(&jet.gradient), &hv);
    let s2 = jet.s2();
    let h2 = (s2 * g * g - lhs) / g.powi(3);
    let kappa = level_set_curvatures(jet)?;
    let s2k = elem_sym_values(&kappa, 2);
    let h1 = kappa.iter().sum();
    let scale = (s2 * g * g).abs().max(lhs.abs()).max(1e-300);
    let closes = |cand: f64| (s2 * g * g - cand * g.powi(3) - lhs).abs() <= H2_CLOSE_TOL * scale;
    Ok(CurvatureProbe {
        point: point.to_vec(),
        grad_norm: g,
        s2_value: s2,
        lhs_334: lhs,
        h2_extracted: h2,
        geometric_s2_kappa: s2k,
        geometric_h1: h1,
        weighted_candidate: g * s2k,
        closes_with_plain: closes(s2k),
        closes_with_weighted: closes(g * s2k),
    })
}

pub fn levelset_h2_extract(fld: &impl SecondOrderField, x: &[f64]) -> Result<CurvatureProbe> {
    levelset_h2_extract_jet(&fld.jet(x)?, x)
}

/// `S₂ⁱʲ u,ᵢ u,ⱼ − H₁ |∇u|³` with `H₁` the sum of level-set principal
/// curvatures.
pub fn levelset_h1_gap(jet: &Jet) -> Result<f64> {
    let cof = cofactor_s2(&jet.hessian)?;
    let lhs = dot(&cof.mul_vec(&jet.gradient), &jet.gradient);
    let h1: f64 = level_set_curvatures(jet)?.iter().sum();
    Ok(lhs - h1 * jet.grad_norm().powi(3))
}

/// Least-squares factor `c` in `h2_extracted ≈ c · |∇u| S₂(κ)` and the largest
/// relative residual of the fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct H2Fit {
    pub factor: f64,
    pub max_rel_residual: f64,
    pub probes: usize,
}

pub fn fit_h2_convention(probes: &[CurvatureProbe]) -> Result<H2Fit> {
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for p in probes {
        sxy += p.weighted_candidate * p.h2_extracted;
        sxx += p.weighted_candidate * p.weighted_candidate;
    }
    if sxx == 0.0 {
        return Err(Error::Numerical("degenerate H2 regression".into()));
    }
    let factor = sxy / sxx;
    let max_rel_residual = probes
        .iter()
        .map(|p| {
            (p.h2_extracted - factor * p.weighted_candidate).abs()
                / p.h2_extracted.abs().max(p.weighted_candidate.abs()).max(1e-300)
        })
        .fold(0.0, f64::max);
    Ok(H2Fit {
        factor,
        max_rel_residual,
        probes: probes.len(),
    })
}

/// `|∇u|² S₂(D²u) − (u,ᵢₗ u,ᵢ u,ₗ Δu − u,ᵢₖ u,ₖ u,ᵢₗ u,ₗ)`.
pub fn philippin_safoui_gap_jet(jet: &Jet) -> f64 {
    let v = &jet.gradient;
    let hv = jet.hessian.mul_vec(v);
    let r = dot(v, v);
    let q = dot(&hv, v);
    let t = dot(&hv, &hv);
    r * jet.s2() - (q * jet.hessian.trace() - t)
}

pub fn philippin_safoui_gap(fld: &impl SecondOrderField, x: &[f64]) -> Result<f64> {
    Ok(philippin_safoui_gap_jet(&fld.jet(x)?))
}

/// Natural scale of the gap: `1 + |∇u|² ‖D²u‖²`.
pub fn philippin_safoui_scale(jet: &Jet) -> f64 {
    1.0 + jet.grad_norm().powi(2) * jet.hessian.frobenius_norm().powi(2)
}

/// `D²(U∘u) = U'(u) D²u + U''(u) ∇u ⊗ ∇u`.
pub fn transform_hessian_jet(jet: &Jet, tr: &Transform) -> Result<SymmetricMatrix> {
    let (_, up, upp) = tr.derivatives(jet.value)?;
    let vv = SymmetricMatrix::outer(&jet.gradient)?;
    Ok(jet.hessian.lin_comb(up, &vv, upp))
}

pub fn transform_hessian(fld: &impl SecondOrderField, tr: &Transform, x: &[f64]) -> Result<SymmetricMatrix> {
    transform_hessian_jet(&fld.jet(x)?, tr)
}

/// Relative tolerance on the smallest transformed-Hessian eigenvalue.
pub const CONVEXITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexityReport {
    pub transform: String,
    pub points: usize,
    /// Smallest eigenvalue of `D²(U∘u)` divided by `max(1e-300, ‖D²(U∘u)‖_F)`
    /// at the same point, minimised over the batch.
    pub min_relative_eigenvalue: f64,
    /// Smallest absolute eigenvalue over the batch.
    pub min_eigenvalue: f64,
    pub argmin: Vec<f64>,
    pub convex: bool,
}

/// Scans `(point, jet)` pairs; each point must lie in the transform's domain.
/// The verdict is convex iff every smallest eigenvalue is at least
/// `−1e-8` times the Frobenius norm of the transformed Hessian at that point.
pub fn convexity_scan_jets<'a, I>(tr: &Transform, jets: I) -> Result<ConvexityReport>
where
    I: IntoIterator<Item = (&'a [f64], Jet)>,
{
    let mut report = ConvexityReport {
        transform: tr.name(),
        points: 0,
        min_relative_eigenvalue: f64::INFINITY,
        min_eigenvalue: f64::INFINITY,
        argmin: Vec::new(),
        convex: true,
    };
    for (x, jet) in jets {
        let h = transform_hessian_jet(&jet, tr)?;
        let lmin = eigen(&h)?.values[0];
        let rel = lmin / h.frobenius_norm().max(1e-300);
        report.points += 1;
        report.min_eigenvalue = report.min_eigenvalue.min(lmin);
        if rel < report.min_relative_eigenvalue {
            report.min_relative_eigenvalue = rel;
            report.argmin = x.to_vec();
        }
    }
    if report.points == 0 {
        return Err(Error::input("convexity scan over an empty batch"));
    }
    report.convex = report.min_relative_eigenvalue >= -CONVEXITY_TOL;
    Ok(report)
}

pub fn convexity_scan(fld: &impl SecondOrderField, tr: &Transform, points: &[Vec<f64>]) -> Result<ConvexityReport> {
    let jets: Result<Vec<_>> = points.iter().map(|x| fld.jet(x).map(|j| (x.as_slice(), j))).collect();
    convexity_scan_jets(tr, jets?)
}

/// `count` points uniform in the ball of radius `radius` about the origin.
pub fn sample_points_in_ball(seed: u64, dim: usize, radius: f64, count: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let dir: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
            let n = norm(&dir).max(1e-300);
            let r = radius * rng.random::<f64>().powf(1.0 / dim as f64);
            dir.iter().map(|d| d * r / n).collect()
        })
        .collect()
}

/// Random symmetric positive semidefinite quadratic field plus the usual
/// menagerie, used by the identity scans.
pub fn menagerie(seed: u64, dim: usize) -> Result<Vec<SyntheticField>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let psd = crate::symmat::sample_semidefinite(seed, dim, crate::symmat::Sign::Positive, 2.0)?;
    let linear: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal) * 0.5).collect();
    let indefinite = psd.matrix.shift_diagonal(-1.0);
    let center: Vec<f64> = (0..dim).map(|_| rng.random_range(-0.2..0.2)).collect();
    let mut terms = Vec::new();
    for _ in 0..6 {
        let powers: Vec<u32> = (0..dim).map(|_| rng.random_range(0..3u32)).collect();
        terms.push(Monomial {
            coeff: rng.random_range(-1.0..1.0),
            powers,
        });
    }
    Ok(vec![
        SyntheticField::quadratic(psd.matrix, linear.clone(), -1.0)?,
        SyntheticField::quadratic(indefinite, linear, 0.0)?,
        SyntheticField::radial_quadratic(dim, 0.5 + rng.random::<f64>(), 1.0)?,
        SyntheticField::radial_power(dim, 1.0, 4.0, 1.0)?,
        SyntheticField::gaussian_bump(center, 1.0 + rng.random::<f64>(), 0.7)?,
        SyntheticField::polynomial(dim, terms)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn a3() -> f64 {
        1.0 / (2.0 * 3f64.sqrt())
    }

    #[test]
    fn euler_gap_on_diagonal_quadratic() {
        let f = SyntheticField::quadratic(
            SymmetricMatrix::from_diagonal(&[1.0, 2.0, 3.0]).unwrap(),
            vec![0.0; 3],
            0.0,
        )
        .unwrap();
        let jet = f.jet(&[0.2, 0.1, -0.3]).unwrap();
        let cof = cofactor_s2(&jet.hessian).unwrap();
        assert_relative_eq!(cof.contract(&jet.hessian), 22.0);
        assert_relative_eq!(2.0 * jet.s2(), 22.0);
        assert_eq!(euler_identity_gap_jet(&jet).unwrap(), 0.0);
        for n in 2..=6 {
            let iso = SyntheticField::radial_quadratic(n, 0.5, 0.0).unwrap();
            let x: Vec<f64> = (0..n).map(|i| 0.1 * i as f64 - 0.2).collect();
            assert!(euler_identity_gap(&iso, &x).unwrap().abs() <= 1e-14);
        }
    }

    #[test]
    fn euler_gap_on_gaussian_bump_samples() {
        let f = SyntheticField::gaussian_bump(vec![0.1, -0.1, 0.0], 1.5, 0.6).unwrap();
        for x in sample_points_in_ball(3, 3, 1.5, 100) {
            let jet = f.jet(&x).unwrap();
            let gap = euler_identity_gap_jet(&jet).unwrap();
            assert!(gap.abs() <= 1e-10 * euler_scale(&jet));
        }
    }

    #[test]
    fn h2_radial_n3_unit_sphere() {
        let a = a3();
        let f = SyntheticField::radial_quadratic(3, a, 1.0).unwrap();
        let p = levelset_h2_extract(&f, &[0.0, 1.0, 0.0]).unwrap();
        assert_relative_eq!(p.lhs_334, 32.0 * a.powi(4), max_relative = 1e-12);
        assert_relative_eq!(p.lhs_334, 2.0 / 9.0, max_relative = 1e-12);
        assert_relative_eq!(p.h2_extracted, 2.0 * a, max_relative = 1e-12);
        assert_relative_eq!(p.h2_extracted, 1.0 / 3f64.sqrt(), max_relative = 1e-12);
        // the unit sphere has S₂(κ) = 1
        assert_relative_eq!(p.geometric_s2_kappa, 1.0, max_relative = 1e-12);
        assert!(p.closes_with_weighted);
        assert!(!p.closes_with_plain);
    }

    #[test]
    fn h2_radial_any_radius_is_two_a_over_r() {
        let a = 0.7;
        let f = SyntheticField::radial_quadratic(3, a, 1.0).unwrap();
        for r in [0.1, 0.35, 0.8, 1.3] {
            let p = levelset_h2_extract(&f, &[r, 0.0, 0.0]).unwrap();
            assert_relative_eq!(p.h2_extracted, 2.0 * a / r, max_relative = 1e-10);
        }
    }

    #[test]
    fn h2_n4_against_shape_operator() {
        // brute force: the level sphere of radius r has N-1 curvatures 1/r
        let a = 0.3;
        let f = SyntheticField::radial_quadratic(4, a, 1.0).unwrap();
        let p = levelset_h2_extract(&f, &[0.0, 0.6, 0.8, 0.0]).unwrap();
        assert_relative_eq!(p.geometric_s2_kappa, 3.0, max_relative = 1e-12);
        assert_relative_eq!(p.h2_extracted, 6.0 * a, max_relative = 1e-12);
        assert_relative_eq!(p.h2_extracted, p.weighted_candidate, max_relative = 1e-12);
    }

    #[test]
    fn h2_rejects_critical_point() {
        let f = SyntheticField::radial_quadratic(3, 1.0, 1.0).unwrap();
        assert!(matches!(
            levelset_h2_extract(&f, &[0.0; 3]),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn h1_identity_radial_n3() {
        let f = SyntheticField::radial_quadratic(3, 0.4, 1.0).unwrap();
        for r in [0.2, 0.5, 0.9] {
            let jet = f.jet(&[0.0, 0.0, r]).unwrap();
            let h1: f64 = level_set_curvatures(&jet).unwrap().iter().sum();
            assert_relative_eq!(h1, 2.0 / r, max_relative = 1e-12);
            assert!(levelset_h1_gap(&jet).unwrap().abs() <= 1e-12);
        }
    }

    #[test]
    fn philippin_safoui_examples() {
        let a = a3();
        let f = SyntheticField::radial_quadratic(3, a, 1.0).unwrap();
        for r in [0.0, 0.3, 1.0] {
            let gap = philippin_safoui_gap(&f, &[r, 0.0, 0.0]).unwrap();
            assert_relative_eq!(gap, 16.0 * a.powi(4) * r * r, epsilon = 1e-15);
        }
        for seed in 0..20 {
            let psd = crate::symmat::sample_semidefinite(seed, 4, crate::symmat::Sign::Positive, 1.0).unwrap();
            let f = SyntheticField::quadratic(psd.matrix, vec![0.3, -0.2, 0.1, 0.0], 0.0).unwrap();
            for x in sample_points_in_ball(seed, 4, 1.0, 50) {
                let jet = f.jet(&x).unwrap();
                assert!(philippin_safoui_gap_jet(&jet) >= -1e-9 * philippin_safoui_scale(&jet));
            }
        }
    }

    #[test]
    fn transform_hessian_examples() {
        let q = SyntheticField::quadratic(SymmetricMatrix::identity(2).unwrap(), vec![0.0, 0.0], -1.0).unwrap();
        let h = transform_hessian(&q, &Transform::Identity, &[0.3, 0.2]).unwrap();
        assert_eq!(h, SymmetricMatrix::identity(2).unwrap());

        // u = -1, D²u = I, ∇u = e₁
        let lin = SyntheticField::quadratic(SymmetricMatrix::identity(2).unwrap(), vec![1.0, 0.0], -1.0).unwrap();
        let h = transform_hessian(&lin, &Transform::NegSqrt, &[0.0, 0.0]).unwrap();
        assert_relative_eq!(h.get(0, 0), 0.75);
        assert_relative_eq!(h.get(1, 1), 0.5);
        assert_eq!(h.get(0, 1), 0.0);

        let h = transform_hessian(&q, &Transform::NegLog, &[0.0, 0.0]).unwrap();
        assert_eq!(h, SymmetricMatrix::identity(2).unwrap());

        assert!(matches!(
            transform_hessian(&q, &Transform::NegSqrt, &[2.0, 0.0]),
            Err(Error::TransformDomain { .. })
        ));
    }

    #[test]
    fn transform_hessian_matches_finite_differences() {
        let f = SyntheticField::radial_quadratic(3, 0.5, 1.0).unwrap();
        let tr = Transform::NegSqrt;
        let x = [0.2, -0.3, 0.4];
        let h = transform_hessian(&f, &tr, &x).unwrap();
        let big_u = |y: &[f64]| tr.derivatives(f.value(y)).unwrap().0;
        let step = 1e-4;
        for i in 0..3 {
            for j in 0..3 {
                let mut pp = x.to_vec();
                let mut pm = x.to_vec();
                let mut mp = x.to_vec();
                let mut mm = x.to_vec();
                pp[i] += step;
                pp[j] += step;
                pm[i] += step;
                pm[j] -= step;
                mp[i] -= step;
                mp[j] += step;
                mm[i] -= step;
                mm[j] -= step;
                let d = (big_u(&pp) - big_u(&pm) - big_u(&mp) + big_u(&mm)) / (4.0 * step * step);
                assert!((d - h.get(i, j)).abs() <= 1e-6, "({i},{j}) {d} vs {}", h.get(i, j));
            }
        }
    }

    #[test]
    fn convexity_scan_examples() {
        let disk = SyntheticField::radial_quadratic(2, 0.5, 1.0).unwrap();
        let pts = sample_points_in_ball(1, 2, 0.99, 200);
        assert!(convexity_scan(&disk, &Transform::Identity, &pts).unwrap().convex);

        let ball = SyntheticField::radial_quadratic(3, a3(), 1.0).unwrap();
        let pts = sample_points_in_ball(2, 3, 0.99, 200);
        assert!(convexity_scan(&ball, &Transform::NegSqrt, &pts).unwrap().convex);

        let saddle = SyntheticField::quartic_saddle();
        let pts = sample_points_in_ball(3, 2, 1.0, 200);
        let rep = convexity_scan(&saddle, &Transform::Identity, &pts).unwrap();
        assert!(!rep.convex);
        assert!(rep.min_eigenvalue < 0.0);
    }

    #[test]
    fn menagerie_finite_difference_consistency() {
        for dim in 2..=6 {
            for f in menagerie(dim as u64, dim).unwrap() {
                for x in sample_points_in_ball(11 + dim as u64, dim, 0.9, 10) {
                    let err = finite_difference_error(&f, &x, 1e-4).unwrap();
                    assert!(err <= 1e-6, "{:?} dim {dim}: {err:e}", f.family());
                }
            }
        }
    }
}
