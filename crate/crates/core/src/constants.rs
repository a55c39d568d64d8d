//! Constants of the comparison construction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nonlinearity::{truncation_exponent, Nonlinearity};
use crate::problem::ProblemSpec;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    pub beta: f64,
    pub c1: f64,
    /// Scan radius where the sampled supremum was finite.
    pub s0: f64,
    pub c4: f64,
    /// `l = C4^{-1/β}`.
    pub l: f64,
    pub varsigma: f64,
    /// `ℓ = ς l`; the comparison supersolution is `ℓ d`.
    pub ell: f64,
    /// Truncation exponent.
    pub p: f64,
}

impl DerivedConstants {
    /// Comparison nonlinearity `k(s) = s^β` on `s > 0`.
    pub fn k(&self, s: f64) -> f64 {
        if s > 0.0 {
            s.powf(self.beta)
        } else {
            0.0
        }
    }
}

fn sampled_sup(g: &Nonlinearity, beta: f64, s0: f64) -> f64 {
    let n = 2000;
    let (lo, hi) = ((s0 * 1e-8).ln(), s0.ln());
    (0..=n)
        .map(|k| {
            let s = (lo + (hi - lo) * k as f64 / n as f64).exp();
            g.eval(s) / s.powf(1.0 + beta)
        })
        .fold(0.0, f64::max)
}

/// Whether `limsup_{s→0} g(s)/s^{1+β}` is finite on a dyadic sample.
pub fn zero_condition_holds(g: &Nonlinearity, beta: f64) -> bool {
    let ratio = |k: i32| {
        let s = 2f64.powi(-k);
        g.eval(s) / s.powf(1.0 + beta)
    };
    let early = (0..=30).map(ratio).fold(0.0, f64::max);
    let late = (30..=60).map(ratio).fold(0.0, f64::max);
    late.is_finite() && late <= 1e3 * early.max(f64::MIN_POSITIVE)
}

/// Computes `C4`, `l`, `ς`, `ℓ`, `p` for the given growth constant `c1`.
pub fn derive_constants(spec: &ProblemSpec, c1: f64) -> Result<DerivedConstants> {
    let beta = spec.beta;
    if !(c1.is_finite() && c1 >= 0.0) {
        return Err(Error::param(format!("growth constant C1 must be finite and nonnegative, got {c1}")));
    }
    if !zero_condition_holds(&spec.g, beta) {
        return Err(Error::hypothesis("absorption g", "g(s)/s^(1+beta) unbounded as s -> 0"));
    }
    let mut s0 = 1.0;
    for _ in 0..60 {
        let sup = sampled_sup(&spec.g, beta, s0);
        if sup.is_finite() {
            let c4 = (1.0f64 + 1e-6).max(s0.powf(-beta)).max(c1 * sup / spec.lambda);
            if c4.is_finite() {
                let l = c4.powf(-1.0 / beta);
                return Ok(DerivedConstants {
                    beta,
                    c1,
                    s0,
                    c4,
                    l,
                    varsigma: 1.0,
                    ell: l,
                    p: truncation_exponent(spec.dim),
                });
            }
        }
        s0 *= 0.5;
    }
    Err(Error::hypothesis("absorption g", "no finite C4 on the scanned radii"))
}

/// Largest violation of `b g(s) <= λ a s k(s/(l d))` over nodes and a log sample of `(0, s0]`.
/// Returns the maximal relative excess (nonpositive when the bound holds).
pub fn comparison_bound_excess(spec: &ProblemSpec, consts: &DerivedConstants, a: &[f64], b: &[f64], d: &[f64]) -> f64 {
    let mut worst = f64::NEG_INFINITY;
    for k in 0..200 {
        let s = consts.s0 * 10f64.powf(-8.0 * k as f64 / 199.0);
        let gs = spec.g.eval(s);
        for i in 0..a.len() {
            if d[i] <= 0.0 {
                continue;
            }
            let rhs = spec.lambda * a[i] * s * consts.k(s / (consts.l * d[i]));
            let lhs = b[i] * gs;
            let excess = (lhs - rhs) / rhs.max(f64::MIN_POSITIVE);
            worst = worst.max(excess);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::ZeroSet;
    use crate::profile::Profile;

    fn spec(g: Nonlinearity, beta: f64, lambda: f64) -> ProblemSpec {
        ProblemSpec {
            dim: 3,
            lambda,
            mu: 0.0,
            a: Profile::Instanton { power: 3.0 },
            b: Profile::constant(1.0),
            h: Profile::constant(0.0),
            g,
            beta,
            c1: None,
            q: 2.0,
            s: 4.0,
            c2: None,
            zero_set: ZeroSet::Empty,
        }
    }

    #[test]
    fn pure_power_constants() {
        let s = spec(Nonlinearity::power(4.0), 3.0, 2.0);
        let c = derive_constants(&s, 1.0).unwrap();
        assert_eq!(c.s0, 1.0);
        assert!((c.c4 - (1.0 + 1e-6)).abs() < 1e-15);
        let c = derive_constants(&s, 40.0).unwrap();
        assert!((c.c4 - 20.0).abs() < 1e-9);
        assert!((c.l - 20f64.powf(-1.0 / 3.0)).abs() < 1e-12);
        assert_eq!(c.ell, c.l);
        assert_eq!(c.p, 2.0);
    }

    #[test]
    fn zero_condition_detects_slow_vanishing() {
        assert!(zero_condition_holds(&Nonlinearity::power(4.0), 3.0));
        assert!(!zero_condition_holds(&Nonlinearity::power(2.0), 3.0));
        assert!(derive_constants(&spec(Nonlinearity::power(2.0), 3.0, 1.0), 1.0).is_err());
    }

    #[test]
    fn comparison_bound_holds_at_tight_c1() {
        let s = spec(Nonlinearity::power(4.0), 3.0, 3.0);
        let r: Vec<f64> = (0..50).map(|i| i as f64 * 0.2).collect();
        let d: Vec<f64> = r.iter().map(|&x| crate::profile::instanton(x, 3)).collect();
        let a: Vec<f64> = d.iter().map(|v| v.powi(3)).collect();
        let b: Vec<f64> = vec![1.0; 50];
        // b d^β / a = 1
        let c = derive_constants(&s, 1.0).unwrap();
        assert!(comparison_bound_excess(&s, &c, &a, &b, &d) <= 1e-12);
    }
}
