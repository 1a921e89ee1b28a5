use super::{solution_jets, PrincipleMode};
use crate::error::{Error, Result};
use crate::fields::{convexity_scan_jets, ConvexityReport};
use crate::solver::{Solution, SourceTerm};
use crate::symmat::binomial;
use crate::transform::Transform;
use serde::{Deserialize, Serialize};
use std::fmt;

/// The principles a P-function can be checked against, with the hypotheses
/// on `f`, `α` and the dimension under which each is claimed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Theorem {
    /// `f' ≥ 0`, `α = C(N,2)^{−1/2}`: maximum on the boundary.
    IsotropicMax,
    /// `N = 2`, `f' ≥ 0`, `α ∈ (−∞,−1] ∪ [0,1]`: maximum on the boundary.
    PlanarMax,
    /// `N = 2`, `f' ≤ 0`, `α ∈ [−1,0) ∪ [1,∞)`: minimum on the boundary.
    PlanarMin,
    /// `f' ≤ 0`, `α ≥ 1`, some increasing `U` with `U∘u` convex: minimum on
    /// the boundary.
    ConvexMin,
}

impl Theorem {
    pub fn mode(self) -> PrincipleMode {
        match self {
            Theorem::IsotropicMax | Theorem::PlanarMax => PrincipleMode::Max,
            Theorem::PlanarMin | Theorem::ConvexMin => PrincipleMode::Min,
        }
    }

    pub fn needs_convexity(self) -> bool {
        self == Theorem::ConvexMin
    }

    /// Whether `(dim, f, α)` satisfies the theorem's stated hypotheses
    /// (the convexity hypothesis of [`Theorem::ConvexMin`] is checked
    /// separately on the solution).
    pub fn applies(self, dim: usize, f: &SourceTerm, alpha: f64) -> bool {
        let inc = f.is_nondecreasing();
        let dec = f.is_nonincreasing();
        match self {
            Theorem::IsotropicMax => inc && (alpha - isotropic_alpha(dim)).abs() <= 1e-12,
            Theorem::PlanarMax => dim == 2 && inc && (alpha <= -1.0 || (0.0..=1.0).contains(&alpha)),
            Theorem::PlanarMin => dim == 2 && dec && ((-1.0..0.0).contains(&alpha) || alpha >= 1.0),
            Theorem::ConvexMin => dec && alpha >= 1.0,
        }
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Theorem::IsotropicMax => "isotropic-max",
            Theorem::PlanarMax => "planar-max",
            Theorem::PlanarMin => "planar-min",
            Theorem::ConvexMin => "convex-min",
        })
    }
}

/// `C(N,2)^{−1/2}`
pub fn isotropic_alpha(dim: usize) -> f64 {
    binomial(dim, 2).powf(-0.5)
}

/// All theorems whose hypotheses on `(dim, f, α)` hold, in a fixed order.
pub fn applicable_theorems(dim: usize, f: &SourceTerm, alpha: f64) -> Vec<Theorem> {
    [
        Theorem::ConvexMin,
        Theorem::PlanarMin,
        Theorem::IsotropicMax,
        Theorem::PlanarMax,
    ]
    .into_iter()
    .filter(|t| t.applies(dim, f, alpha))
    .collect()
}

/// Increasing transforms tried, mildest first, when looking for one that
/// makes the solution convex.
pub const CONVEXITY_CANDIDATES: [Transform; 3] = [Transform::Identity, Transform::NegSqrt, Transform::NegLog];

/// The first candidate transform whose composition with the solution passes
/// the convexity scan.
pub fn convexity_witness(sol: &Solution) -> Result<ConvexityReport> {
    let jets = solution_jets(sol)?;
    let mut best: Option<ConvexityReport> = None;
    for tr in CONVEXITY_CANDIDATES {
        let rep = convexity_scan_jets(&tr, jets.iter().map(|(x, j)| (x.as_slice(), j.clone())))?;
        if rep.convex {
            return Ok(rep);
        }
        if best
            .as_ref()
            .is_none_or(|b| rep.min_relative_eigenvalue > b.min_relative_eigenvalue)
        {
            best = Some(rep);
        }
    }
    let b = best.expect("candidate list is non-empty");
    Err(Error::Hypothesis(format!(
        "no candidate transform makes the solution convex (best: {} with relative eigenvalue {:e})",
        b.transform, b.min_relative_eigenvalue
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{solve_radial, SolveConfig};

    #[test]
    fn hypotheses() {
        let c = SourceTerm::constant(1.0);
        let dec = SourceTerm::ExpDecreasing;
        let inc = SourceTerm::ExpIncreasing;
        assert_eq!(applicable_theorems(3, &dec, 1.5), vec![Theorem::ConvexMin]);
        assert_eq!(applicable_theorems(2, &dec, -0.5), vec![Theorem::PlanarMin]);
        assert!(applicable_theorems(3, &dec, -0.5).is_empty());
        assert_eq!(applicable_theorems(2, &inc, -2.0), vec![Theorem::PlanarMax]);
        assert_eq!(
            applicable_theorems(3, &inc, 1.0 / 3f64.sqrt()),
            vec![Theorem::IsotropicMax]
        );
        assert_eq!(
            applicable_theorems(2, &c, 1.0),
            vec![
                Theorem::ConvexMin,
                Theorem::PlanarMin,
                Theorem::IsotropicMax,
                Theorem::PlanarMax
            ]
        );
        assert!(applicable_theorems(3, &inc, 2.0).is_empty());
    }

    #[test]
    fn torsion_solution_is_convex_itself() {
        let sol = Solution::Radial(solve_radial(3, 1.0, SourceTerm::constant(1.0), &SolveConfig::default()).unwrap());
        assert_eq!(convexity_witness(&sol).unwrap().transform, "identity");
    }
}
