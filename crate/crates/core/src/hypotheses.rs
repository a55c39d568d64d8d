//! Numerical checks of the structural hypotheses on the data.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::constants::zero_condition_holds;
use crate::grid::RadialGrid;
use crate::problem::{Coefficients, ProblemSpec, ZeroSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Hypothesis {
    WeightA,
    AbsorptionG,
    CoefficientB,
    HarvestH,
    HarvestLevel,
    LambdaWindow,
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Hypothesis::WeightA => "weight a",
            Hypothesis::AbsorptionG => "absorption g",
            Hypothesis::CoefficientB => "coefficient b",
            Hypothesis::HarvestH => "harvest profile h",
            Hypothesis::HarvestLevel => "harvest level mu",
            Hypothesis::LambdaWindow => "lambda window",
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HypothesisCheck {
    pub hypothesis: Hypothesis,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub checks: Vec<HypothesisCheck>,
    /// Smallest `C1` with `b <= C1 a d^{-β}` at the nodes.
    pub c1_tight: f64,
    /// Largest sampled `R^{N/r'} ||h||_{L^q(|x|>R)}`.
    pub c2_found: f64,
    /// Log-log slope of `a^{N/2} r^{N-1}` over the outer grid, if the tail is nonzero.
    pub a_tail_slope: Option<f64>,
}

impl HypothesisReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&HypothesisCheck> {
        self.checks.iter().find(|c| !c.passed)
    }

    pub fn get(&self, h: Hypothesis) -> Option<&HypothesisCheck> {
        self.checks.iter().find(|c| c.hypothesis == h)
    }
}

/// Least-squares slope of `log(|f| r^{N-1})` against `log r` on `[R/4, R]`.
/// `None` when the integrand vanishes there.
pub fn tail_slope(grid: &RadialGrid, values: &[f64], power: f64) -> Option<f64> {
    let big_r = grid.outer_radius();
    let n = grid.dim() as f64;
    let pts: Vec<(f64, f64)> = grid
        .nodes()
        .iter()
        .zip(values)
        .filter(|(r, v)| **r >= big_r / 4.0 && v.abs().powf(power) > 1e-300)
        .map(|(r, v)| (r.ln(), power * v.abs().ln() + (n - 1.0) * r.ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let (num, den) = pts
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + (x - mx) * (y - my), b + (x - mx) * (x - mx)));
    Some(num / den)
}

fn integrable_tail(grid: &RadialGrid, values: &[f64], power: f64) -> (bool, Option<f64>) {
    if !grid.kind().is_whole_space() {
        return (true, None);
    }
    match tail_slope(grid, values, power) {
        None => (true, None),
        Some(s) => (s < -1.0 - 1e-3, Some(s)),
    }
}

fn interior(grid: &RadialGrid) -> impl Iterator<Item = usize> + '_ {
    let n = grid.len();
    let whole = grid.kind().is_whole_space();
    let annulus = grid.kind().inner_radius() > 0.0;
    (0..n).filter(move |&i| (whole || i + 1 < n) && (!annulus || i > 0))
}

/// Runs the checks on nodal samples; `d` is the instanton (or its bounded analogue).
pub fn validate_hypotheses(spec: &ProblemSpec, grid: &RadialGrid, coeffs: &Coefficients, d: &[f64]) -> HypothesisReport {
    let mut checks = Vec::new();
    let n = spec.dim as f64;
    let r = grid.nodes();
    let idx: Vec<usize> = interior(grid).collect();

    let a_tail_slope;
    // weight a
    {
        let min_a = idx.iter().map(|&i| coeffs.a[i]).fold(f64::INFINITY, f64::min);
        let max_a = coeffs.a.iter().copied().fold(0.0, f64::max);
        let (tail_ok, slope) = integrable_tail(grid, &coeffs.a, n / 2.0);
        let passed = min_a > 0.0 && max_a.is_finite() && tail_ok;
        let detail = if !(min_a > 0.0) {
            format!("a is not positive at every node (min {min_a:.3e})")
        } else if !tail_ok {
            format!("a^(N/2) r^(N-1) decays with slope {:.3} >= -1: a not in L^(N/2)", slope.unwrap_or(f64::NAN))
        } else {
            format!("min {min_a:.3e}, max {max_a:.3e}")
        };
        checks.push(HypothesisCheck { hypothesis: Hypothesis::WeightA, passed, detail });
        a_tail_slope = slope;
    }

    // absorption g
    {
        let neg_ok = [-1e3, -1.0, -1e-6, 0.0].iter().all(|&s| spec.g.eval(s) == 0.0);
        let zero_ok = zero_condition_holds(&spec.g, spec.beta);
        let ratios: Vec<f64> = (1..=6).map(|k| {
            let s = 10f64.powi(k);
            spec.g.eval(s) / s
        }).collect();
        let inf_ok = ratios.windows(2).all(|w| w[1] > w[0]) && ratios[5] > 10.0 * ratios[0];
        let passed = neg_ok && zero_ok && inf_ok;
        let detail = if !neg_ok {
            "g does not vanish on (-inf, 0]".to_string()
        } else if !zero_ok {
            format!("g(s)/s^(1+beta) unbounded as s -> 0 for beta = {}", spec.beta)
        } else if !inf_ok {
            "g(s)/s does not grow without bound".to_string()
        } else {
            format!("g(s)/s at 1e6: {:.3e}", ratios[5])
        };
        checks.push(HypothesisCheck { hypothesis: Hypothesis::AbsorptionG, passed, detail });
    }

    // coefficient b
    let mut c1_tight = 0.0f64;
    {
        let mut nonneg = true;
        let mut any_pos = false;
        for &i in &idx {
            let b = coeffs.b[i];
            if b < 0.0 {
                nonneg = false;
            }
            if b > 0.0 {
                any_pos = true;
                let ratio = if coeffs.a[i] > 0.0 && d[i] > 0.0 {
                    b * d[i].powf(spec.beta) / coeffs.a[i]
                } else {
                    f64::INFINITY
                };
                c1_tight = c1_tight.max(ratio);
            }
        }
        let c1 = spec.c1.unwrap_or(c1_tight);
        let bound_ok = c1_tight.is_finite() && c1_tight <= c1 * (1.0 + 1e-12);
        let zero_ok = match spec.zero_set {
            ZeroSet::Empty => idx.iter().all(|&i| coeffs.b[i] > 0.0),
            ZeroSet::ClosedBall { radius } => idx.iter().all(|&i| {
                let inside = r[i] < radius * (1.0 - 1e-12);
                let outside = r[i] > radius * (1.0 + 1e-12);
                (!inside || coeffs.b[i] == 0.0) && (!outside || coeffs.b[i] > 0.0)
            }),
            ZeroSet::MeasureZero => idx.windows(2).all(|w| coeffs.b[w[0]] > 0.0 || coeffs.b[w[1]] > 0.0),
        };
        let passed = nonneg && any_pos && bound_ok && zero_ok;
        let detail = if !nonneg {
            "b takes negative values".into()
        } else if !any_pos {
            "b vanishes identically".into()
        } else if !bound_ok {
            format!("b <= C1 a d^-beta needs C1 >= {c1_tight:.6e}, declared {c1:.6e}")
        } else if !zero_ok {
            format!("zero set of b does not match the declared {:?}", spec.zero_set)
        } else {
            format!("tight C1 = {c1_tight:.6e}")
        };
        checks.push(HypothesisCheck { hypothesis: Hypothesis::CoefficientB, passed, detail });
    }

    // harvest h
    let c2_found;
    {
        let nonneg = coeffs.h.iter().all(|&v| v >= 0.0);
        let nonzero = coeffs.h.iter().any(|&v| v > 0.0);
        let mut tails = true;
        for p in [1.0, spec.q, spec.s] {
            tails &= integrable_tail(grid, &coeffs.h, p).0;
        }
        let rp = spec.q / (spec.q - 1.0);
        let mut vals = Vec::new();
        let mut big_r = 2f64.powi((r[1].log2()).ceil() as i32);
        while big_r <= grid.outer_radius() / 2.0 {
            let v = big_r.powf(n / rp) * grid.lp_norm_outside(&coeffs.h, spec.q, big_r);
            vals.push(v);
            big_r *= 2.0;
        }
        c2_found = vals.iter().copied().fold(0.0, f64::max);
        let trend_ok = !grid.kind().is_whole_space()
            || vals.len() < 4
            || vals[vals.len() - 1] <= 1.01 * vals[..vals.len() - 1].iter().copied().fold(0.0, f64::max);
        let declared_ok = spec.c2.is_none_or(|c2| c2_found <= c2 * (1.0 + 1e-12));
        let passed = nonneg && (nonzero || spec.mu == 0.0) && tails && trend_ok && declared_ok;
        let detail = if !nonneg {
            "h takes negative values".into()
        } else if !nonzero && spec.mu > 0.0 {
            "h vanishes identically".into()
        } else if !tails {
            "h is not in L^1, L^q and L^s".into()
        } else if !(trend_ok && declared_ok) {
            format!("decay bound grows or exceeds C2 (sup found {c2_found:.3e})")
        } else {
            format!("C2 found {c2_found:.6e}")
        };
        checks.push(HypothesisCheck { hypothesis: Hypothesis::HarvestH, passed, detail });
    }

    checks.push(HypothesisCheck {
        hypothesis: Hypothesis::HarvestLevel,
        passed: spec.mu >= 0.0 && spec.mu.is_finite(),
        detail: format!("mu = {}", spec.mu),
    });

    HypothesisReport { checks, c1_tight, c2_found, a_tail_slope }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::DomainKind;
    use crate::nonlinearity::Nonlinearity;
    use crate::profile::{instanton, Profile};

    fn grid() -> RadialGrid {
        RadialGrid::build(3, DomainKind::WholeSpace { r_infinity: 200.0 }, 400, 1.015).unwrap()
    }

    fn spec(a: Profile) -> ProblemSpec {
        ProblemSpec {
            dim: 3,
            lambda: 2.0,
            mu: 0.0,
            a,
            b: Profile::Instanton { power: 0.0 },
            h: Profile::Gaussian { amplitude: 1.0, center: 0.0, width: 1.0 },
            g: Nonlinearity::power(4.0),
            beta: 3.0,
            c1: None,
            q: 2.0,
            s: 4.0,
            c2: None,
            zero_set: ZeroSet::Empty,
        }
    }

    fn run(s: &ProblemSpec) -> HypothesisReport {
        let g = grid();
        let c = s.sample(&g).unwrap();
        let d = g.sample_fn(|r| instanton(r, 3));
        validate_hypotheses(s, &g, &c, &d)
    }

    #[test]
    fn instanton_weight_passes() {
        let rep = run(&spec(Profile::Instanton { power: 3.0 }));
        assert!(rep.passed(), "{:?}", rep.first_failure());
        assert!((rep.c1_tight - 1.0).abs() < 1e-9);
    }

    #[test]
    fn constant_weight_fails_integrability() {
        let rep = run(&spec(Profile::constant(1.0)));
        let c = rep.get(Hypothesis::WeightA).unwrap();
        assert!(!c.passed);
        assert!(rep.a_tail_slope.unwrap() > 1.9);
    }

    #[test]
    fn borderline_weight_fails() {
        // a = r^{-2}: a^{3/2} r^2 ~ 1/r is not integrable
        let a = Profile::Sum { terms: vec![Profile::constant(1.0), Profile::PowerLaw { exponent: 2.0 }] }.pow(-1.0);
        let rep = run(&spec(a));
        assert!(!rep.get(Hypothesis::WeightA).unwrap().passed);
    }

    #[test]
    fn slow_vanishing_g_fails() {
        let mut s = spec(Profile::Instanton { power: 3.0 });
        s.g = Nonlinearity::power(2.0);
        assert!(!run(&s).get(Hypothesis::AbsorptionG).unwrap().passed);
    }

    #[test]
    fn declared_c1_too_small_fails() {
        let mut s = spec(Profile::Instanton { power: 3.0 });
        s.c1 = Some(0.5);
        assert!(!run(&s).get(Hypothesis::CoefficientB).unwrap().passed);
    }

    #[test]
    fn slowly_decaying_harvest_fails() {
        let mut s = spec(Profile::Instanton { power: 3.0 });
        s.h = Profile::Instanton { power: 2.0 };
        s.mu = 1.0;
        assert!(!run(&s).get(Hypothesis::HarvestH).unwrap().passed);
    }
}
