use super::SymmetricMatrix;
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 64;

/// Eigen-decomposition `A = V diag(values) Vᵗ` with eigenvalues ascending and
/// eigenvectors stored as the columns of `vectors` (`vectors[i][k]` is
/// component `i` of eigenvector `k`).
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

impl Eigen {
    /// Coordinates of `v` in the eigenbasis, `w = Vᵗ v`.
    pub fn to_eigenbasis(&self, v: &[f64]) -> Vec<f64> {
        let n = self.values.len();
        (0..n)
            .map(|k| (0..n).map(|i| self.vectors[i][k] * v[i]).sum())
            .collect()
    }

    /// Max-abs entry of `V diag(values) Vᵗ − A`.
    pub fn reconstruction_error(&self, a: &SymmetricMatrix) -> f64 {
        let n = self.values.len();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let r: f64 = (0..n)
                    .map(|k| self.vectors[i][k] * self.values[k] * self.vectors[j][k])
                    .sum();
                worst = worst.max((r - a.get(i, j)).abs());
            }
        }
        worst
    }
}

/// Cyclic Jacobi eigensolver. Sweeps until the off-diagonal Frobenius mass
/// drops below `1e-14 ‖A‖_F`.
pub fn eigen(a: &SymmetricMatrix) -> Result<Eigen> {
    a.validate()?;
    let n = a.dim();
    let mut m = a.to_dense();
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let norm = a.frobenius_norm();
    let threshold = 1e-14 * norm;

    let off = |m: &Vec<Vec<f64>>| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += 2.0 * m[i][j] * m[i][j];
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    while off(&m) > threshold {
        if sweeps == MAX_SWEEPS {
            return Err(Error::Numerical(format!(
                "Jacobi eigensolver did not converge in {MAX_SWEEPS} sweeps"
            )));
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p][q];
                if apq == 0.0 {
                    continue;
                }
                // symmetric Schur rotation annihilating m[p][q]
                let theta = (m[q][q] - m[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for row in m.iter_mut() {
                    let (mp, mq) = (row[p], row[q]);
                    row[p] = c * mp - s * mq;
                    row[q] = s * mp + c * mq;
                }
                for k in 0..n {
                    let (mp, mq) = (m[p][k], m[q][k]);
                    m[p][k] = c * mp - s * mq;
                    m[q][k] = s * mp + c * mq;
                }
                m[p][q] = 0.0;
                m[q][p] = 0.0;
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i][i].total_cmp(&m[j][j]));
    let values = order.iter().map(|&k| m[k][k]).collect();
    let vectors = (0..n).map(|i| order.iter().map(|&k| v[i][k]).collect()).collect();
    Ok(Eigen { values, vectors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symmat::{sample_semidefinite, Sign};

    #[test]
    fn reconstruction_matches_input() {
        for seed in 0..200u64 {
            let dim = 2 + (seed as usize % 7);
            let s = sample_semidefinite(seed, dim, Sign::Positive, 3.0).unwrap();
            // make it indefinite
            let a = s.matrix.shift_diagonal(-1.5);
            let e = eigen(&a).unwrap();
            let tol = 1e-10 * a.frobenius_norm().max(1e-300);
            assert!(e.reconstruction_error(&a) <= tol, "seed {seed}");
            assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
            let sum: f64 = e.values.iter().sum();
            assert!((sum - a.trace()).abs() <= tol);
        }
    }

    #[test]
    fn zero_matrix() {
        let z = SymmetricMatrix::zeros(5).unwrap();
        let e = eigen(&z).unwrap();
        assert!(e.values.iter().all(|&x| x == 0.0));
    }
}
