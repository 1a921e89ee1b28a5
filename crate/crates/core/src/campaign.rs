//! Seeded sampling campaigns over the matrix inequalities and the pointwise
//! field identities. Samples are drawn independently from derived seeds and
//! evaluated in parallel; results are merged in index order, so a campaign is
//! a pure function of its parameters.

use crate::error::{Error, Result};
use crate::fields::{
    euler_identity_gap_jet, euler_scale, fit_h2_convention, levelset_h2_extract_jet, menagerie,
    philippin_safoui_gap_jet, philippin_safoui_scale, sample_points_in_ball, H2Fit, SecondOrderField, SyntheticField,
};
use crate::matineq::{expansion_coefficients, lemma1_evaluate, lemma2_evaluate, InequalityRecord, TransformEval};
use crate::symmat::{eigen, sample_semidefinite, Sign, SymmetricMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// SplitMix64 finalizer over `(base, stream, index)`.
pub fn derive_seed(base: u64, stream: u64, index: u64) -> u64 {
    let mut z = base
        .wrapping_add(stream.wrapping_mul(0x9e37_79b9_7f4a_7c15))
        .wrapping_add(index.wrapping_mul(0xd1b5_4a32_d192_ed03));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (lo.ln() + (hi.ln() - lo.ln()) * rng.random::<f64>()).exp()
}

/// A Gaussian vector with log-uniform magnitude in `[0.1, 10]`.
pub fn sample_vector(seed: u64, dim: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mag = log_uniform(&mut rng, 0.1, 10.0);
    let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
    v.iter().map(|x| x * mag / n).collect()
}

/// A symmetric matrix with independent Gaussian entries, scaled by `scale`.
pub fn sample_symmetric(seed: u64, dim: usize, scale: f64) -> Result<SymmetricMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SymmetricMatrix::from_upper_fn(dim, |_, _| scale * rng.sample::<f64, _>(StandardNormal))
}

/// Which matrices a campaign draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleKind {
    Positive,
    Negative,
    Indefinite,
    /// Cycles through positive, negative and indefinite by sample index.
    Mixed,
}

impl fmt::Display for SampleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SampleKind::Positive => "positive",
            SampleKind::Negative => "negative",
            SampleKind::Indefinite => "indefinite",
            SampleKind::Mixed => "mixed",
        })
    }
}

impl FromStr for SampleKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "positive" => Ok(SampleKind::Positive),
            "negative" => Ok(SampleKind::Negative),
            "indefinite" => Ok(SampleKind::Indefinite),
            "mixed" => Ok(SampleKind::Mixed),
            other => Err(Error::Input(format!(
                "unknown sign '{other}' (expected positive, negative, indefinite or mixed)"
            ))),
        }
    }
}

/// Draws the matrix for sample `index` of a campaign with the given seed.
pub fn sample_matrix(seed: u64, dim: usize, kind: SampleKind, index: u64) -> Result<SymmetricMatrix> {
    let kind = match kind {
        SampleKind::Mixed => [SampleKind::Positive, SampleKind::Negative, SampleKind::Indefinite][(index % 3) as usize],
        k => k,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let scale = log_uniform(&mut rng, 0.1, 10.0);
    match kind {
        SampleKind::Positive => Ok(sample_semidefinite(seed, dim, Sign::Positive, scale)?.matrix),
        SampleKind::Negative => Ok(sample_semidefinite(seed, dim, Sign::Negative, scale)?.matrix),
        _ => sample_symmetric(seed, dim, scale),
    }
}

/// Tolerance for the three-dimensional identity, relative to the record's scale.
pub const IDENTITY_3D_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IneqSample {
    pub seed: u64,
    pub dim: usize,
    pub record: InequalityRecord,
    pub violation: Option<String>,
}

/// Evaluates one sample and every invariant that applies to it: residual
/// agreement, the residual sign for semidefinite matrices, and the exact
/// identity in three dimensions.
pub fn ineq_sample(seed: u64, dim: usize, kind: SampleKind, index: u64) -> Result<IneqSample> {
    let a = sample_matrix(seed, dim, kind, index)?;
    let v = sample_vector(seed.rotate_left(17), dim);
    let record = lemma1_evaluate(&a, &v)?;
    let mut violation = record.check().err().map(|e| e.to_string());
    if violation.is_none() && dim == 3 {
        let tol = IDENTITY_3D_TOL * record.scale;
        if record.residual_direct.abs() > tol {
            violation = Some(
                Error::Identity {
                    what: "three-dimensional identity".into(),
                    gap: record.residual_direct,
                    tol,
                }
                .to_string(),
            );
        }
    }
    Ok(IneqSample {
        seed,
        dim,
        record,
        violation,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IneqCampaign {
    pub seed: u64,
    pub dims: Vec<usize>,
    pub count: usize,
    pub kind: SampleKind,
}

/// Per-dimension statistics; residuals are divided by each record's scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimStats {
    pub dim: usize,
    pub samples: usize,
    pub min_rel_residual: f64,
    pub max_rel_residual: f64,
    pub max_rel_abs_residual: f64,
    pub max_rel_discrepancy: f64,
    pub violations: usize,
    pub first_violation_seed: Option<u64>,
    pub first_violation: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IneqOutcome {
    pub stats: Vec<DimStats>,
    pub samples: Vec<IneqSample>,
}

impl IneqOutcome {
    pub fn passed(&self) -> bool {
        self.stats.iter().all(|s| s.violations == 0)
    }
}

impl IneqCampaign {
    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::input("count must be at least 1"));
        }
        if self.dims.is_empty() {
            return Err(Error::input("no dimensions requested"));
        }
        for &d in &self.dims {
            SymmetricMatrix::check_dim(d)?;
        }
        Ok(())
    }

    /// Runs the campaign; `keep_samples` retains every record for export.
    pub fn run(&self, keep_samples: bool) -> Result<IneqOutcome> {
        self.validate()?;
        let mut stats = Vec::with_capacity(self.dims.len());
        let mut kept = Vec::new();
        for &dim in &self.dims {
            let samples = (0..self.count as u64)
                .into_par_iter()
                .map(|i| ineq_sample(derive_seed(self.seed, dim as u64, i), dim, self.kind, i))
                .collect::<Result<Vec<_>>>()?;
            let mut st = DimStats {
                dim,
                samples: samples.len(),
                min_rel_residual: f64::INFINITY,
                max_rel_residual: f64::NEG_INFINITY,
                max_rel_abs_residual: 0.0,
                max_rel_discrepancy: 0.0,
                violations: 0,
                first_violation_seed: None,
                first_violation: None,
            };
            for s in &samples {
                let r = &s.record;
                let rel = r.residual_direct / r.scale;
                st.min_rel_residual = st.min_rel_residual.min(rel);
                st.max_rel_residual = st.max_rel_residual.max(rel);
                st.max_rel_abs_residual = st.max_rel_abs_residual.max(rel.abs());
                st.max_rel_discrepancy = st.max_rel_discrepancy.max(r.agreement_gap() / r.scale);
                if let Some(v) = &s.violation {
                    st.violations += 1;
                    if st.first_violation_seed.is_none() {
                        st.first_violation_seed = Some(s.seed);
                        st.first_violation = Some(v.clone());
                    }
                }
            }
            stats.push(st);
            if keep_samples {
                kept.extend(samples);
            }
        }
        Ok(IneqOutcome { stats, samples: kept })
    }
}

/// Outcome of a campaign over a factorization or expansion identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityStats {
    pub tuples: usize,
    /// Largest gap divided by the identity's own tolerance scale.
    pub max_rel_gap: f64,
    pub failures: usize,
    pub first_failure_seed: Option<u64>,
    pub first_failure: Option<String>,
}

impl IdentityStats {
    fn merge(outcomes: Vec<(u64, std::result::Result<f64, String>)>) -> Self {
        let mut st = IdentityStats {
            tuples: outcomes.len(),
            max_rel_gap: 0.0,
            failures: 0,
            first_failure_seed: None,
            first_failure: None,
        };
        for (seed, o) in outcomes {
            match o {
                Ok(g) => st.max_rel_gap = st.max_rel_gap.max(g),
                Err(msg) => {
                    st.failures += 1;
                    if st.first_failure_seed.is_none() {
                        st.first_failure_seed = Some(seed);
                        st.first_failure = Some(msg);
                    }
                }
            }
        }
        st
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

fn tuple_dim(i: u64) -> usize {
    2 + (i % 7) as usize
}

/// Direct versus factored `M` on random `(D²(U∘u), ∇u, U', U'')` tuples in
/// dimensions 2–8; half the Hessians are positive semidefinite so the sign
/// claim is exercised too.
pub fn lemma2_campaign(seed: u64, count: usize) -> Result<IdentityStats> {
    if count == 0 {
        return Err(Error::input("count must be at least 1"));
    }
    let outcomes = (0..count as u64)
        .into_par_iter()
        .map(|i| -> Result<(u64, std::result::Result<f64, String>)> {
            let s = derive_seed(seed, 0x2a, i);
            let dim = tuple_dim(i);
            let kind = if i % 2 == 0 {
                SampleKind::Positive
            } else {
                SampleKind::Indefinite
            };
            let h = sample_matrix(s, dim, kind, i)?;
            let g = sample_vector(s.rotate_left(9), dim);
            let mut rng = ChaCha8Rng::seed_from_u64(s.rotate_left(29));
            let up = log_uniform(&mut rng, 0.1, 10.0) * if rng.random::<bool>() { 1.0 } else { -1.0 };
            let upp: f64 = rng.sample(StandardNormal);
            let tr = TransformEval::new(0.0, up, upp)?;
            Ok((
                s,
                match lemma2_evaluate(&h, &g, &tr) {
                    Ok(rec) => Ok((rec.m_direct - rec.m_factored).abs() / rec.scale),
                    Err(e @ Error::Identity { .. }) => Err(e.to_string()),
                    Err(e) => return Err(e),
                },
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(IdentityStats::merge(outcomes))
}

/// Mixed expansion coefficients of `M(αA + β∇u⊗∇u)` on random tuples; the
/// reported gap is `max(|m21|, |m12|, |m03|) / max(1, |m30|)`.
pub fn expansion_campaign(seed: u64, count: usize) -> Result<IdentityStats> {
    if count == 0 {
        return Err(Error::input("count must be at least 1"));
    }
    let outcomes = (0..count as u64)
        .into_par_iter()
        .map(|i| -> Result<(u64, std::result::Result<f64, String>)> {
            let s = derive_seed(seed, 0x3b, i);
            let dim = tuple_dim(i);
            // the mixed coefficients are recovered from differences of
            // cubic probe values, so magnitudes are kept near one
            let a = sample_matrix(s, dim, SampleKind::Mixed, i)?;
            let mut rng = ChaCha8Rng::seed_from_u64(s.rotate_left(29));
            let a = a.scaled(log_uniform(&mut rng, 0.5, 2.0) / a.frobenius_norm().max(1e-300));
            let g = sample_vector(s.rotate_left(9), dim);
            let gn = g.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
            let t = log_uniform(&mut rng, 0.5, 2.0) / gn;
            let g: Vec<f64> = g.iter().map(|x| x * t).collect();
            Ok((
                s,
                match expansion_coefficients(&a, &g) {
                    Ok(c) => Ok(c.max_mixed() / c.m30.abs().max(1.0)),
                    Err(e @ Error::Identity { .. }) => Err(e.to_string()),
                    Err(e) => return Err(e),
                },
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(IdentityStats::merge(outcomes))
}

pub const EULER_TOL: f64 = 1e-10;
pub const PS_TOL: f64 = 1e-9;
pub const H2_FIT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityScanReport {
    pub seed: u64,
    pub count: usize,
    pub dims: Vec<usize>,
    pub fields: usize,
    pub euler_points: usize,
    pub euler_max_rel_gap: f64,
    /// Points whose Hessian is positive semidefinite.
    pub ps_points: usize,
    pub ps_min_rel_gap: f64,
    pub h2_fit: H2Fit,
    pub h2_closes_weighted: usize,
    pub h2_closes_plain: usize,
    pub euler_ok: bool,
    pub ps_ok: bool,
    pub h2_ok: bool,
}

impl IdentityScanReport {
    pub fn passed(&self) -> bool {
        self.euler_ok && self.ps_ok && self.h2_ok
    }
}

pub const SCAN_DIMS: [usize; 3] = [2, 3, 4];

fn is_convex(h: &SymmetricMatrix) -> Result<bool> {
    let e = eigen(h)?;
    Ok(e.values[0] >= -1e-12 * h.frobenius_norm().max(1.0))
}

/// Euler and Philippin–Safoui gaps over the field menagerie in dimensions
/// 2–4 (`count` points per field), and the level-set `H₂` convention fit on
/// three-dimensional radial probes.
pub fn identity_scan(seed: u64, count: usize) -> Result<IdentityScanReport> {
    if count == 0 {
        return Err(Error::input("count must be at least 1"));
    }
    let mut fields = 0;
    let mut euler_points = 0;
    let mut euler_max = 0.0f64;
    let mut ps_points = 0;
    let mut ps_min = f64::INFINITY;
    for &dim in &SCAN_DIMS {
        for (fi, fld) in menagerie(derive_seed(seed, dim as u64, 0), dim)?.iter().enumerate() {
            fields += 1;
            let pts = sample_points_in_ball(derive_seed(seed, dim as u64, 1 + fi as u64), dim, 0.9, count);
            let gaps = pts
                .par_iter()
                .map(|x| -> Result<(f64, Option<f64>)> {
                    let jet = fld.jet(x)?;
                    let e = euler_identity_gap_jet(&jet)?.abs() / euler_scale(&jet);
                    let ps = if is_convex(&jet.hessian)? {
                        Some(philippin_safoui_gap_jet(&jet) / philippin_safoui_scale(&jet))
                    } else {
                        None
                    };
                    Ok((e, ps))
                })
                .collect::<Result<Vec<_>>>()?;
            for (e, ps) in gaps {
                euler_points += 1;
                euler_max = euler_max.max(e);
                if let Some(p) = ps {
                    ps_points += 1;
                    ps_min = ps_min.min(p);
                }
            }
        }
    }

    let probes_fields = [
        SyntheticField::radial_quadratic(3, 0.5, 1.0)?,
        SyntheticField::radial_quadratic(3, 1.0 / (2.0 * 3f64.sqrt()), 1.0)?,
        SyntheticField::radial_power(3, 1.0, 4.0, 1.0)?,
        SyntheticField::radial_power(3, 0.3, 3.0, 2.0)?,
    ];
    let mut probes = Vec::new();
    for (k, fld) in probes_fields.iter().enumerate() {
        for x in sample_points_in_ball(derive_seed(seed, 0x42, k as u64), 3, 0.9, count.min(256)) {
            let r = x.iter().map(|c| c * c).sum::<f64>().sqrt();
            if r < 0.05 {
                continue;
            }
            probes.push(levelset_h2_extract_jet(&fld.jet(&x)?, &x)?);
        }
    }
    let h2_fit = fit_h2_convention(&probes)?;
    Ok(IdentityScanReport {
        seed,
        count,
        dims: SCAN_DIMS.to_vec(),
        fields,
        euler_points,
        euler_max_rel_gap: euler_max,
        ps_points,
        ps_min_rel_gap: ps_min,
        h2_closes_weighted: probes.iter().filter(|p| p.closes_with_weighted).count(),
        h2_closes_plain: probes.iter().filter(|p| p.closes_with_plain).count(),
        euler_ok: euler_max <= EULER_TOL,
        ps_ok: ps_points > 0 && ps_min >= -PS_TOL,
        h2_ok: h2_fit.max_rel_residual <= H2_FIT_TOL,
        h2_fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_seeds_are_distinct_and_stable() {
        let a: Vec<u64> = (0..1000).map(|i| derive_seed(42, 3, i)).collect();
        let mut b = a.clone();
        b.sort_unstable();
        b.dedup();
        assert_eq!(b.len(), a.len());
        assert_eq!(derive_seed(42, 3, 7), a[7]);
        assert_ne!(derive_seed(42, 3, 7), derive_seed(42, 4, 7));
    }

    #[test]
    fn mixed_kind_cycles_signs() {
        let pos = sample_matrix(5, 4, SampleKind::Mixed, 0).unwrap();
        let neg = sample_matrix(5, 4, SampleKind::Mixed, 1).unwrap();
        assert!(eigen(&pos).unwrap().values[0] >= -1e-12);
        assert!(eigen(&neg).unwrap().values[3] <= 1e-12);
    }

    #[test]
    fn small_campaigns_pass_and_repeat() {
        let c = IneqCampaign {
            seed: 7,
            dims: vec![2, 3, 5],
            count: 300,
            kind: SampleKind::Mixed,
        };
        let a = c.run(true).unwrap();
        assert!(a.passed(), "{:?}", a.stats);
        assert_eq!(a.samples.len(), 900);
        assert_eq!(a, c.run(true).unwrap());
        assert!(a.stats[1].max_rel_abs_residual <= IDENTITY_3D_TOL);
        assert!(lemma2_campaign(7, 200).unwrap().passed());
        assert!(expansion_campaign(7, 200).unwrap().passed());
    }

    #[test]
    fn identity_scan_small() {
        let r = identity_scan(3, 40).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!((r.h2_fit.factor - 1.0).abs() < 1e-8);
        assert_eq!(r.h2_closes_weighted, r.h2_fit.probes);
    }

    #[test]
    fn zero_count_is_rejected() {
        let c = IneqCampaign {
            seed: 1,
            dims: vec![3],
            count: 0,
            kind: SampleKind::Positive,
        };
        assert!(c.run(false).is_err());
        assert!(identity_scan(1, 0).is_err());
    }
}
