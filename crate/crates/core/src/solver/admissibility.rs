use super::Solution;
use crate::symmat::elem_sym_values;
use serde::{Deserialize, Serialize};

/// Smallest `S₁`, `S₂` and cofactor eigenvalue over the interior nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub min_s1: f64,
    pub min_s2: f64,
    pub min_cofactor_eigenvalue: f64,
    pub nodes: usize,
    pub admissible: bool,
}

impl AdmissibilityReport {
    /// From Hessian spectra; the cofactor `S₂ⁱʲ = S₁δ − D²u` shares the
    /// eigenvectors of the Hessian with eigenvalues `S₁ − λᵢ`.
    pub fn from_spectra<'a>(spectra: impl IntoIterator<Item = &'a Vec<f64>>) -> Self {
        let mut report = AdmissibilityReport {
            min_s1: f64::INFINITY,
            min_s2: f64::INFINITY,
            min_cofactor_eigenvalue: f64::INFINITY,
            nodes: 0,
            admissible: false,
        };
        for spec in spectra {
            let s1: f64 = spec.iter().sum();
            let s2 = elem_sym_values(spec, 2);
            let cof = spec.iter().map(|l| s1 - l).fold(f64::INFINITY, f64::min);
            report.min_s1 = report.min_s1.min(s1);
            report.min_s2 = report.min_s2.min(s2);
            report.min_cofactor_eigenvalue = report.min_cofactor_eigenvalue.min(cof);
            report.nodes += 1;
        }
        report.admissible =
            report.nodes > 0 && report.min_s1 > 0.0 && report.min_s2 > 0.0 && report.min_cofactor_eigenvalue > 0.0;
        report
    }
}

pub fn admissibility_report(sol: &Solution) -> AdmissibilityReport {
    AdmissibilityReport::from_spectra(&sol.hessian_spectra())
}
