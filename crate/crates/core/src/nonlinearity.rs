//! Absorption nonlinearities `g`, their truncations `j_m` and primitives.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerTerm {
    pub coefficient: f64,
    pub exponent: f64,
}

/// User-supplied nonlinearity; its primitive is computed by adaptive quadrature.
#[derive(Clone)]
pub struct CustomFn(pub Arc<dyn Fn(f64) -> f64 + Send + Sync>);

impl fmt::Debug for CustomFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("CustomFn")
    }
}

impl PartialEq for CustomFn {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

/// A continuous function vanishing on `(-inf, 0]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Nonlinearity {
    /// `s^exponent` for `s > 0`.
    Power { exponent: f64 },
    /// `Σ c_k s^{e_k}` for `s > 0`.
    Polynomial { terms: Vec<PowerTerm> },
    /// `s (e^{rate s} - 1)` for `s > 0`.
    ExpGrowth { rate: f64 },
    #[serde(skip)]
    Custom(CustomFn),
}

impl Nonlinearity {
    pub fn power(exponent: f64) -> Self {
        Nonlinearity::Power { exponent }
    }

    pub fn custom(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Nonlinearity::Custom(CustomFn(Arc::new(f)))
    }

    /// `g + (s^+)^2`, the fast-growth modification.
    pub fn plus_square(&self) -> Self {
        let sq = PowerTerm { coefficient: 1.0, exponent: 2.0 };
        match self {
            Nonlinearity::Power { exponent } => Nonlinearity::Polynomial {
                terms: vec![PowerTerm { coefficient: 1.0, exponent: *exponent }, sq],
            },
            Nonlinearity::Polynomial { terms } => {
                let mut t = terms.clone();
                t.push(sq);
                Nonlinearity::Polynomial { terms: t }
            }
            other => {
                let inner = other.clone();
                Nonlinearity::custom(move |s| inner.eval(s) + if s > 0.0 { s * s } else { 0.0 })
            }
        }
    }

    pub fn eval(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        match self {
            Nonlinearity::Power { exponent } => s.powf(*exponent),
            Nonlinearity::Polynomial { terms } => terms.iter().map(|t| t.coefficient * s.powf(t.exponent)).sum(),
            Nonlinearity::ExpGrowth { rate } => s * (rate * s).exp_m1(),
            Nonlinearity::Custom(f) => (f.0)(s).max(0.0),
        }
    }

    /// `∫_0^s g`.
    pub fn primitive(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        match self {
            Nonlinearity::Power { exponent } => s.powf(exponent + 1.0) / (exponent + 1.0),
            Nonlinearity::Polynomial { terms } => terms
                .iter()
                .map(|t| t.coefficient * s.powf(t.exponent + 1.0) / (t.exponent + 1.0))
                .sum(),
            Nonlinearity::ExpGrowth { rate } => {
                let c = *rate;
                let x = c * s;
                // ∫ s e^{cs} = (e^{cs}(cs - 1) + 1)/c^2, expanded near zero
                let first = if x.abs() < 1e-3 {
                    s * s * (0.5 + x / 3.0 + x * x / 8.0 + x * x * x / 30.0)
                } else {
                    (x.exp() * (x - 1.0) + 1.0) / (c * c)
                };
                first - 0.5 * s * s
            }
            Nonlinearity::Custom(f) => adaptive_simpson(&|x| (f.0)(x).max(0.0), 0.0, s, 1e-12),
        }
    }

    /// Whether the primitive has a closed form.
    pub fn has_closed_form(&self) -> bool {
        !matches!(self, Nonlinearity::Custom(_))
    }
}

/// Adaptive Simpson quadrature to absolute tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    if a == b {
        return 0.0;
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    rec(f, a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, 50)
}

/// `j_m(s) = g(s)` for `s <= m`, `g(m) - m^p + s^p` beyond.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedNonlinearity {
    pub g: Nonlinearity,
    pub m: f64,
    pub p: f64,
}

impl TruncatedNonlinearity {
    pub fn new(g: Nonlinearity, m: f64, p: f64) -> Self {
        Self { g, m, p }
    }

    pub fn eval(&self, s: f64) -> f64 {
        if s <= self.m {
            self.g.eval(s)
        } else {
            self.g.eval(self.m) - self.m.powf(self.p) + s.powf(self.p)
        }
    }

    /// `J_m(s) = ∫_0^s j_m`.
    pub fn primitive(&self, s: f64) -> f64 {
        if s <= self.m {
            self.g.primitive(s)
        } else {
            let (m, p) = (self.m, self.p);
            self.g.primitive(m) + (self.g.eval(m) - m.powf(p)) * (s - m) + (s.powf(p + 1.0) - m.powf(p + 1.0)) / (p + 1.0)
        }
    }
}

/// Pointwise `inf_{m >= 1} j_m(s)`, the lower envelope of the truncations.
pub fn truncation_envelope(g: &Nonlinearity, p: f64, s: f64) -> f64 {
    if s <= 1.0 {
        return g.eval(s);
    }
    let phi = |m: f64| g.eval(m) - m.powf(p);
    // coarse log scan, then golden-section refinement around the best sample
    let n = 64;
    let (lo, hi) = (0.0f64, s.ln());
    let at = |k: usize| (lo + (hi - lo) * k as f64 / n as f64).exp();
    let mut best = 0;
    let mut best_val = phi(at(0));
    for k in 1..=n {
        let v = phi(at(k));
        if v < best_val {
            best_val = v;
            best = k;
        }
    }
    let (mut a, mut b) = (at(best.saturating_sub(1)), at((best + 1).min(n)));
    let gr = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - gr * (b - a);
    let mut d = a + gr * (b - a);
    for _ in 0..100 {
        if phi(c) < phi(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - gr * (b - a);
        d = a + gr * (b - a);
        if (b - a).abs() < 1e-12 * s {
            break;
        }
    }
    let refined = phi(0.5 * (a + b)).min(best_val);
    (refined + s.powf(p)).min(g.eval(s))
}

/// Checks that `j(s)/s` grows without bound along `s = 10, 100, ..., s_max`.
pub fn envelope_superlinear(g: &Nonlinearity, p: f64, s_max: f64) -> (bool, Vec<(f64, f64)>) {
    let mut samples = Vec::new();
    let mut s = 10.0;
    while s <= s_max * (1.0 + 1e-12) {
        samples.push((s, truncation_envelope(g, p, s) / s));
        s *= 10.0;
    }
    let increasing = samples.windows(2).all(|w| w[1].1 > w[0].1);
    let grows = samples.len() >= 2 && samples.last().unwrap().1 >= 10.0 * samples[0].1;
    (increasing && grows, samples)
}

/// Exponent `p = min(2, (N+2)/(N-2))` of the truncation tail.
pub fn truncation_exponent(dim: usize) -> f64 {
    let n = dim as f64;
    (2.0f64).min((n + 2.0) / (n - 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primitives_match_quadrature() {
        for g in [
            Nonlinearity::power(4.0),
            Nonlinearity::Polynomial { terms: vec![PowerTerm { coefficient: 2.0, exponent: 2.5 }, PowerTerm { coefficient: 1.0, exponent: 2.0 }] },
            Nonlinearity::ExpGrowth { rate: 1.5 },
        ] {
            for &s in &[1e-4, 0.3, 1.0, 2.7] {
                let tol = 1e-14 * g.eval(s) * s;
                let q = adaptive_simpson(&|x| g.eval(x), 0.0, s, tol);
                assert!((g.primitive(s) - q).abs() < 1e-10 * q, "{g:?} {s}");
            }
        }
    }

    #[test]
    fn custom_uses_quadrature() {
        let g = Nonlinearity::custom(|s| s * s * (1.0 + s.sin()));
        assert!(!g.has_closed_form());
        let exact = {
            // ∫ s^2 + s^2 sin s = s^3/3 + (2 - s^2) cos s + 2 s sin s - 2
            let s: f64 = 1.3;
            s.powi(3) / 3.0 + (2.0 - s * s) * s.cos() + 2.0 * s * s.sin() - 2.0
        };
        assert!((g.primitive(1.3) - exact).abs() < 1e-11);
    }

    #[test]
    fn truncation_is_continuous_at_m() {
        let t = TruncatedNonlinearity::new(Nonlinearity::power(4.0), 2.0, 2.0);
        assert!((t.eval(2.0 - 1e-12) - t.eval(2.0 + 1e-12)).abs() < 1e-9);
        assert_eq!(t.eval(1.5), 1.5f64.powi(4));
        // J_m derivative equals j_m
        for &s in &[0.5, 2.0, 3.5] {
            let h = 1e-6;
            let d = (t.primitive(s + h) - t.primitive(s - h)) / (2.0 * h);
            assert!((d - t.eval(s)).abs() < 1e-6 * t.eval(s).max(1.0));
        }
    }

    #[test]
    fn vanishes_on_negatives() {
        for g in [Nonlinearity::power(2.0), Nonlinearity::ExpGrowth { rate: 1.0 }] {
            assert_eq!(g.eval(-1.0), 0.0);
            assert_eq!(g.primitive(-3.0), 0.0);
        }
    }

    #[test]
    fn envelope_superlinear_for_powers() {
        assert_eq!(truncation_exponent(3), 2.0);
        assert_eq!(truncation_exponent(6), 2.0);
        assert!((truncation_exponent(7) - 1.8).abs() < 1e-15);
        let (ok, samples) = envelope_superlinear(&Nonlinearity::power(4.0), 2.0, 1e6);
        assert!(ok);
        // j(s) = s^2 for s > 1
        let (s, ratio) = samples[2];
        assert!((ratio - s).abs() < 1e-6 * s);
    }
}
