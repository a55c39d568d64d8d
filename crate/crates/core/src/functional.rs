//! Discrete energies and their weighted-`L^2` gradients.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::nonlinearity::TruncatedNonlinearity;
use crate::operator::LaplaceOperator;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// `½||u||² - λ/2 ∫a(u⁺)² + ∫G(x,u) + μ∫hu` with the comparison nonlinearity.
    Comparison,
    /// `½||u||² - λ/2 ∫au² + ∫b J_m(u) + μ∫hu`.
    Truncated,
    /// `½||u||² - λ/2 ∫au² + 2∫b̃ J̃_m(u)`.
    FastGrowth,
}

/// Reaction data for each variant.
#[derive(Clone, Debug)]
pub enum Reaction<'a> {
    Comparison { ld: &'a [f64], beta: f64 },
    Truncated { b: &'a [f64], j: TruncatedNonlinearity },
    FastGrowth { b_tilde: &'a [f64], j: TruncatedNonlinearity },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub dirichlet: f64,
    pub linear: f64,
    pub reaction: f64,
    pub harvest: f64,
    pub total: f64,
}

#[derive(Clone, Debug)]
pub struct Functional<'a> {
    pub op: &'a LaplaceOperator,
    pub lambda: f64,
    pub mu: f64,
    pub a: &'a [f64],
    pub h: &'a [f64],
    pub reaction: Reaction<'a>,
}

const GAUSS3: [(f64, f64); 3] = [
    (0.112_701_665_379_258_31, 5.0 / 18.0),
    (0.5, 8.0 / 18.0),
    (0.887_298_334_620_741_7, 5.0 / 18.0),
];

impl<'a> Functional<'a> {
    pub fn variant(&self) -> Variant {
        match self.reaction {
            Reaction::Comparison { .. } => Variant::Comparison,
            Reaction::Truncated { .. } => Variant::Truncated,
            Reaction::FastGrowth { .. } => Variant::FastGrowth,
        }
    }

    fn harvest_level(&self) -> f64 {
        match self.reaction {
            Reaction::FastGrowth { .. } => 0.0,
            _ => self.mu,
        }
    }

    /// Nodal energy density split into (linear, reaction, harvest).
    fn density(&self, i: usize, u: f64) -> (f64, f64, f64) {
        let a = self.a[i];
        let harvest = self.harvest_level() * self.h[i] * u;
        match &self.reaction {
            Reaction::Comparison { ld, beta } => {
                let up = u.max(0.0);
                let lin = -0.5 * self.lambda * a * up * up;
                let react = if up > 0.0 {
                    self.lambda * a * up.powf(2.0 + beta) / ((2.0 + beta) * ld[i].powf(*beta))
                } else {
                    0.0
                };
                (lin, react, harvest)
            }
            Reaction::Truncated { b, j } => (-0.5 * self.lambda * a * u * u, b[i] * j.primitive(u), harvest),
            Reaction::FastGrowth { b_tilde, j } => (-0.5 * self.lambda * a * u * u, 2.0 * b_tilde[i] * j.primitive(u), harvest),
        }
    }

    /// Derivative of the nodal density.
    pub fn density_derivative(&self, i: usize, u: f64) -> f64 {
        let a = self.a[i];
        let harvest = self.harvest_level() * self.h[i];
        match &self.reaction {
            Reaction::Comparison { ld, beta } => {
                let up = u.max(0.0);
                -self.lambda * a * up + self.lambda * a * up * (up / ld[i]).powf(*beta) + harvest
            }
            Reaction::Truncated { b, j } => -self.lambda * a * u + b[i] * j.eval(u) + harvest,
            Reaction::FastGrowth { b_tilde, j } => -self.lambda * a * u + 2.0 * b_tilde[i] * j.eval(u),
        }
    }

    pub fn energy(&self, u: &[f64]) -> EnergyBreakdown {
        let dirichlet = 0.5 * self.op.energy_sq(u);
        let (mut linear, mut reaction, mut harvest) = (0.0, 0.0, 0.0);
        let fixed = self.op.fixed();
        for (i, (&ui, &v)) in u.iter().zip(self.op.volumes()).enumerate() {
            if fixed[i] {
                continue;
            }
            let (l, r, h) = self.density(i, ui);
            linear += v * l;
            reaction += v * r;
            harvest += v * h;
        }
        EnergyBreakdown { dirichlet, linear, reaction, harvest, total: dirichlet + linear + reaction + harvest }
    }

    /// Weighted-`L^2` gradient `(K u)/V + f'(u)`; zero at Dirichlet nodes.
    pub fn gradient(&self, u: &[f64]) -> Vec<f64> {
        let ku = self.op.stiffness_apply(u);
        let fixed = self.op.fixed();
        (0..u.len())
            .map(|i| if fixed[i] { 0.0 } else { ku[i] / self.op.volumes()[i] + self.density_derivative(i, u[i]) })
            .collect()
    }

    /// `<∇E(u), v>` in the weighted inner product.
    pub fn directional_derivative(&self, u: &[f64], v: &[f64]) -> f64 {
        let g = self.gradient(u);
        g.iter().zip(v).zip(self.op.volumes()).map(|((a, b), w)| a * b * w).sum()
    }

    /// `E(u + s) - E(u)` without forming the two energies.
    pub fn energy_change(&self, u: &[f64], s: &[f64]) -> f64 {
        let ku = self.op.stiffness_apply(u);
        let ks = self.op.stiffness_apply(s);
        let mut quad = 0.0;
        for i in 0..u.len() {
            quad += s[i] * (ku[i] + 0.5 * ks[i]);
        }
        let fixed = self.op.fixed();
        let mut nodal = 0.0;
        for i in 0..u.len() {
            if fixed[i] || s[i] == 0.0 {
                continue;
            }
            let mut acc = 0.0;
            for (t, w) in GAUSS3 {
                acc += w * self.density_derivative(i, u[i] + t * s[i]);
            }
            nodal += self.op.volumes()[i] * acc * s[i];
        }
        quad + nodal
    }

    /// Nodal right-hand side `λ a u - (reaction) - μ h` of the Euler–Lagrange equation.
    pub fn source(&self, u: &[f64]) -> Vec<f64> {
        (0..u.len()).map(|i| -self.density_derivative(i, u[i])).collect()
    }
}

/// Outcome of one finite-difference gradient check.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GradientSample {
    pub analytic: f64,
    pub finite_difference: f64,
    pub relative_error: f64,
}

/// Compares `<∇E(u), v>` with central differences of `E` along `pairs` random
/// smooth directions, shaped like `base`, around randomly perturbed copies of `base`.
pub fn check_gradient(f: &Functional<'_>, base: &[f64], pairs: usize, seed: u64) -> Vec<GradientSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = base.len();
    let scale = base.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-3);
    let mut out = Vec::with_capacity(pairs);
    for _ in 0..pairs {
        let (a1, a2, k1, k2): (f64, f64, f64, f64) = (rng.random_range(0.3..1.5), rng.random_range(-0.2..0.2), rng.random_range(0.5..4.0), rng.random_range(0.5..4.0));
        let mut u: Vec<f64> = (0..n)
            .map(|i| {
                let x = i as f64 / n as f64;
                base[i] * (a1 + a2 * (k1 * std::f64::consts::PI * x).sin())
            })
            .collect();
        let (c1, c2): (f64, f64) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let mut v: Vec<f64> = (0..n)
            .map(|i| {
                let x = i as f64 / n as f64;
                (base[i].abs() + 1e-3 * scale) * (c1 * (k2 * std::f64::consts::PI * x).cos() + c2 * (-3.0 * x).exp())
            })
            .collect();
        f.op.enforce(&mut u);
        f.op.enforce(&mut v);
        let analytic = f.directional_derivative(&u, &v);
        // fourth-order central difference
        let eps = 1e-3;
        let at = |t: f64| {
            let w: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + t * b).collect();
            f.energy(&w).total
        };
        let fd = (8.0 * (at(eps) - at(-eps)) - (at(2.0 * eps) - at(-2.0 * eps))) / (12.0 * eps);
        let relative_error = (fd - analytic).abs() / (fd.abs() + 1e-12);
        out.push(GradientSample { analytic, finite_difference: fd, relative_error });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{DomainKind, RadialGrid};
    use crate::nonlinearity::Nonlinearity;
    use crate::operator::BoundaryCondition;
    use crate::profile::instanton;

    struct Setup {
        op: LaplaceOperator,
        a: Vec<f64>,
        b: Vec<f64>,
        h: Vec<f64>,
        ld: Vec<f64>,
    }

    fn setup() -> Setup {
        let g = RadialGrid::build(3, DomainKind::WholeSpace { r_infinity: 50.0 }, 200, 1.02).unwrap();
        let op = LaplaceOperator::new(&g, BoundaryCondition::DecayMatched);
        let d = g.sample_fn(|r| instanton(r, 3));
        Setup {
            a: d.iter().map(|v| v.powi(3)).collect(),
            b: d.iter().map(|_| 1.0).collect(),
            h: g.sample_fn(|r| (-r * r).exp()),
            ld: d.iter().map(|v| 0.8 * v).collect(),
            op,
        }
    }

    #[test]
    fn energy_change_matches_difference() {
        let s = setup();
        let f = Functional {
            op: &s.op,
            lambda: 3.0,
            mu: 0.2,
            a: &s.a,
            h: &s.h,
            reaction: Reaction::Truncated { b: &s.b, j: TruncatedNonlinearity::new(Nonlinearity::power(4.0), 2.0, 2.0) },
        };
        let u: Vec<f64> = s.ld.iter().map(|v| 1.3 * v).collect();
        let step: Vec<f64> = s.ld.iter().map(|v| -0.2 * v).collect();
        let unew: Vec<f64> = u.iter().zip(&step).map(|(a, b)| a + b).collect();
        let direct = f.energy(&unew).total - f.energy(&u).total;
        assert!((f.energy_change(&u, &step) - direct).abs() < 1e-12 * direct.abs().max(1.0));
    }

    #[test]
    fn gradients_are_consistent() {
        let s = setup();
        let j = TruncatedNonlinearity::new(Nonlinearity::power(4.0), 0.5, 2.0);
        for reaction in [
            Reaction::Comparison { ld: &s.ld, beta: 3.0 },
            Reaction::Truncated { b: &s.b, j: j.clone() },
            Reaction::FastGrowth { b_tilde: &s.b, j: TruncatedNonlinearity::new(Nonlinearity::power(2.0).plus_square(), 0.5, 2.0) },
        ] {
            let f = Functional { op: &s.op, lambda: 3.0, mu: 0.1, a: &s.a, h: &s.h, reaction };
            for sample in check_gradient(&f, &s.ld, 10, 7) {
                assert!(sample.relative_error < 1e-6, "{:?} {sample:?}", f.variant());
            }
        }
    }

    #[test]
    fn fast_growth_ignores_harvest() {
        let s = setup();
        let j = TruncatedNonlinearity::new(Nonlinearity::power(2.0).plus_square(), 1.0, 2.0);
        let f = Functional { op: &s.op, lambda: 3.0, mu: 5.0, a: &s.a, h: &s.h, reaction: Reaction::FastGrowth { b_tilde: &s.b, j } };
        assert_eq!(f.energy(&s.ld).harvest, 0.0);
    }
}
