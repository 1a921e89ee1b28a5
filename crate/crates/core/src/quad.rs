//! Quadrature: cumulative Simpson-type product rules on uniform nodes and
//! adaptive Simpson for scalar integrals.

use crate::error::{Error, Result};

const GAUSS4_NODES: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_3,
    0.339_981_043_584_856_3,
    0.861_136_311_594_052_6,
];
const GAUSS4_WEIGHTS: [f64; 4] = [
    0.347_854_845_137_453_8,
    0.652_145_154_862_546_1,
    0.652_145_154_862_546_1,
    0.347_854_845_137_453_8,
];

/// Running integrals `I_j = ∫₀^{r_j} s^k F(s) ds` on uniform nodes
/// `r_j = j·h`, with `F` replaced by its quadratic interpolant on each
/// Simpson panel and the weight `s^k` integrated exactly.
///
/// For `k = 0` this is composite Simpson at even nodes and the one-interval
/// three-point rule at odd nodes. Treating the weight exactly keeps the rule
/// fourth-order accurate relative to `I_j` right down to the origin, where
/// plain Simpson on `s^k F` loses two orders.
#[derive(Debug, Clone)]
pub struct CumulativeRule {
    prev: Vec<usize>,
    base: Vec<usize>,
    weights: Vec<[f64; 3]>,
}

impl CumulativeRule {
    /// `h` is the node spacing, `len` the number of nodes (at least 3), and
    /// `power` the weight exponent `k` (at most 5, so that 4-point Gauss is
    /// exact on every panel).
    pub fn new(h: f64, len: usize, power: u32) -> Self {
        assert!(len >= 3, "cumulative rule needs at least three nodes");
        assert!(power <= 5, "weight exponent too large for the panel rule");
        let panel = |b: usize, t0: f64, t1: f64| -> [f64; 3] {
            let mut w = [0.0; 3];
            let half = 0.5 * (t1 - t0);
            let mid = 0.5 * (t1 + t0);
            for (x, gw) in GAUSS4_NODES.iter().zip(GAUSS4_WEIGHTS) {
                let t = mid + half * x;
                let s = (b as f64 + t) * h;
                let weight = s.powi(power as i32) * gw * half * h;
                w[0] += weight * 0.5 * (t - 1.0) * (t - 2.0);
                w[1] += weight * -t * (t - 2.0);
                w[2] += weight * 0.5 * t * (t - 1.0);
            }
            w
        };
        let mut prev = vec![0; len];
        let mut base = vec![0; len];
        let mut weights = vec![[0.0; 3]; len];
        for j in 1..len {
            if j % 2 == 0 {
                prev[j] = j - 2;
                base[j] = j - 2;
                weights[j] = panel(j - 2, 0.0, 2.0);
            } else if j + 1 < len {
                prev[j] = j - 1;
                base[j] = j - 1;
                weights[j] = panel(j - 1, 0.0, 1.0);
            } else {
                prev[j] = j - 1;
                base[j] = j - 2;
                weights[j] = panel(j - 2, 1.0, 2.0);
            }
        }
        CumulativeRule { prev, base, weights }
    }

    pub fn integrate(&self, values: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; values.len()];
        for j in 1..values.len() {
            let b = self.base[j];
            let w = &self.weights[j];
            out[j] = out[self.prev[j]] + w[0] * values[b] + w[1] * values[b + 1] + w[2] * values[b + 2];
        }
        out
    }
}

const MAX_DEPTH: u32 = 60;

/// Adaptive Simpson quadrature of `f` over `[a, b]` to relative tolerance
/// `rel_tol` (with an absolute floor proportional to the interval length).
pub fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    // a coarse magnitude estimate to turn the relative target into an absolute one
    let scale = whole.abs().max((b - a).abs() * 1e-300);
    let eps = rel_tol * scale;
    // halving the leaf tolerance stalls at endpoint singularities such as
    // (−s)^{1/4}; a floor keeps the depth bounded at negligible cost in accuracy
    let floor = eps * 1e-6;
    let value = recurse(&f, a, b, fa, fm, fb, whole, eps, floor, MAX_DEPTH)?;
    if !value.is_finite() {
        return Err(Error::Numerical(format!(
            "adaptive quadrature on [{a}, {b}] produced a non-finite value"
        )));
    }
    Ok(value)
}

#[allow(clippy::too_many_arguments)]
fn recurse(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    floor: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * eps || (b - a).abs() <= f64::EPSILON * a.abs().max(b.abs()) {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::Numerical(format!(
            "adaptive quadrature did not reach tolerance on [{a}, {b}]"
        )));
    }
    let child = (0.5 * eps).max(floor);
    Ok(recurse(f, a, m, fa, flm, fm, left, child, floor, depth - 1)?
        + recurse(f, m, b, fm, frm, fb, right, child, floor, depth - 1)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cumulative_rule_is_exact_on_polynomial_data() {
        let n = 11;
        let h = 0.1;
        for power in 0..=5u32 {
            let rule = CumulativeRule::new(h, n, power);
            // F quadratic: s^k F integrates exactly
            let vals: Vec<f64> = (0..n)
                .map(|j| {
                    let s = j as f64 * h;
                    1.0 + s - 2.0 * s * s
                })
                .collect();
            let got = rule.integrate(&vals);
            for (j, g) in got.iter().enumerate() {
                let r = j as f64 * h;
                let k = power as f64;
                let exact =
                    r.powf(k + 1.0) / (k + 1.0) + r.powf(k + 2.0) / (k + 2.0) - 2.0 * r.powf(k + 3.0) / (k + 3.0);
                assert!((g - exact).abs() <= 1e-14, "k={power} j={j}: {g} vs {exact}");
            }
        }
    }

    #[test]
    fn cumulative_rule_is_fourth_order() {
        let err = |n: usize| {
            let h = 1.0 / (n - 1) as f64;
            let rule = CumulativeRule::new(h, n, 2);
            let vals: Vec<f64> = (0..n).map(|j| (j as f64 * h).exp()).collect();
            let got = rule.integrate(&vals);
            // ∫₀^1 s² e^s ds = e − 2
            (got[n - 1] - (std::f64::consts::E - 2.0)).abs()
        };
        let ratio = err(17) / err(33);
        assert!(ratio > 14.0, "ratio {ratio}");
    }

    #[test]
    fn adaptive_simpson_examples() {
        let v = adaptive_simpson(|s: f64| (-s).powf(0.25), -1.0, 0.0, 1e-10).unwrap();
        assert_relative_eq!(v, 0.8, max_relative = 1e-9);
        let v = adaptive_simpson(|s: f64| (-s).exp(), -0.5, 0.0, 1e-12).unwrap();
        assert_relative_eq!(v, 0.5f64.exp() - 1.0, max_relative = 1e-11);
        assert_eq!(adaptive_simpson(|_| 1.0, 0.0, 0.0, 1e-10).unwrap(), 0.0);
    }
}
