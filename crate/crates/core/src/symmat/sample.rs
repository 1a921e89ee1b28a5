use super::SymmetricMatrix;
use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Probability that a sample has some eigenvalues pinned to exactly zero.
const BOUNDARY_PROBABILITY: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Positive,
    Negative,
}

impl std::fmt::Display for Sign {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Sign::Positive => "positive",
            Sign::Negative => "negative",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemidefSample {
    pub matrix: SymmetricMatrix,
    pub sign: Sign,
    pub seed: u64,
    pub scale: f64,
}

/// Random orthogonal matrix: modified Gram–Schmidt on a Gaussian draw.
pub(crate) fn random_orthogonal<R: Rng>(rng: &mut R, dim: usize) -> Vec<Vec<f64>> {
    loop {
        let mut cols: Vec<Vec<f64>> = (0..dim)
            .map(|_| (0..dim).map(|_| rng.sample(StandardNormal)).collect())
            .collect();
        let mut ok = true;
        for k in 0..dim {
            for j in 0..k {
                let d: f64 = (0..dim).map(|i| cols[k][i] * cols[j][i]).sum();
                for i in 0..dim {
                    cols[k][i] -= d * cols[j][i];
                }
            }
            let norm = cols[k].iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm < 1e-8 {
                ok = false;
                break;
            }
            cols[k].iter_mut().for_each(|x| *x /= norm);
        }
        if ok {
            return cols;
        }
    }
}

/// Draws `±Q Λ Qᵗ` with `Q` orthogonal and `Λ` diagonal in `[0, scale]`.
///
/// With probability 0.2 between one and `dim - 1` eigenvalues are set to zero
/// so the boundary of the semidefinite cone is exercised. The draw depends on
/// `(seed, dim, sign, scale)` only.
pub fn sample_semidefinite(seed: u64, dim: usize, sign: Sign, scale: f64) -> Result<SemidefSample> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::input(format!("scale must be positive, got {scale}")));
    }
    SymmetricMatrix::check_dim(dim)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = random_orthogonal(&mut rng, dim);
    let mut lambda: Vec<f64> = (0..dim).map(|_| scale * rng.random::<f64>()).collect();
    if rng.random::<f64>() < BOUNDARY_PROBABILITY {
        let zeros = rng.random_range(1..dim);
        for _ in 0..zeros {
            let i = rng.random_range(0..dim);
            lambda[i] = 0.0;
        }
    }
    let s = match sign {
        Sign::Positive => 1.0,
        Sign::Negative => -1.0,
    };
    let matrix = SymmetricMatrix::from_upper_fn(dim, |i, j| {
        s * (0..dim).map(|k| q[k][i] * lambda[k] * q[k][j]).sum::<f64>()
    })?;
    Ok(SemidefSample {
        matrix,
        sign,
        seed,
        scale,
    })
}
