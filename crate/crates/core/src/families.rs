//! Built-in problem families used by the CLI, the tests and the benches.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{DomainKind, RadialGrid};
use crate::nonlinearity::Nonlinearity;
use crate::operator::{BoundaryCondition, LaplaceOperator};
use crate::oracles::AppendixExample;
use crate::pipeline::{eigen_window, BoundedConfig, FastGrowthSpec};
use crate::problem::{ProblemSpec, ZeroSet};
use crate::profile::Profile;
use crate::spectral::{check_lambda_window, WindowCheck};

/// How `λ` is fixed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LambdaChoice {
    Value(f64),
    /// `λ1 + t (λ* - λ1)` for `t` in `(0, 1)`; needs a finite `λ*`.
    WindowFraction(f64),
}

impl Default for LambdaChoice {
    fn default() -> Self {
        LambdaChoice::WindowFraction(0.5)
    }
}

/// Sets `spec.lambda` from `choice` using the eigenvalues on `grid`.
pub fn resolve_lambda(spec: &mut ProblemSpec, grid: &RadialGrid, choice: LambdaChoice) -> Result<WindowCheck> {
    let op = LaplaceOperator::new(grid, BoundaryCondition::natural(grid));
    let a = spec.a.sample(grid);
    let (l1, ls) = eigen_window(spec, grid, &op, &a)?;
    spec.lambda = match choice {
        LambdaChoice::Value(v) => v,
        LambdaChoice::WindowFraction(t) => {
            if !ls.value.is_finite() {
                return Err(Error::Config("window fraction needs a finite lambda*".into()));
            }
            if !(t > 0.0 && t < 1.0) {
                return Err(Error::Config(format!("window fraction {t} not in (0, 1)")));
            }
            l1.value + t * (ls.value - l1.value)
        }
    };
    Ok(check_lambda_window(spec.lambda, l1.value, ls.value))
}

/// Whole-space grid with every breakpoint of `spec` on a node.
pub fn whole_space_grid(spec: &ProblemSpec, r_infinity: f64, intervals: usize, stretch: f64) -> Result<RadialGrid> {
    RadialGrid::build(spec.dim, DomainKind::WholeSpace { r_infinity }, intervals, stretch)?.pinned(&spec.breakpoints())
}

/// Ball grid with the breakpoints of `spec` and the extra radii on nodes.
pub fn ball_grid(spec: &ProblemSpec, radius: f64, intervals: usize, extra: &[f64]) -> Result<RadialGrid> {
    let mut pins = spec.breakpoints();
    pins.extend_from_slice(extra);
    pins.retain(|&p| p > 0.0 && p < radius);
    pins.sort_by(f64::total_cmp);
    pins.dedup();
    RadialGrid::build(spec.dim, DomainKind::Ball { radius }, intervals, 1.0)?.pinned(&pins)
}

fn one_minus(p: Profile) -> Profile {
    Profile::Sum { terms: vec![Profile::constant(1.0), p.scaled(-1.0)] }
}

/// Plateau problem in `R^3`: `b` vanishes on the ball of radius 3 and equals 200
/// beyond radius 4, `a` switches from `0.2 d^4` to `5 d^3` across the transition,
/// `g = s^4` and `h = exp(-r^2)`.
pub fn main_plateau(lambda: f64) -> ProblemSpec {
    let step = Profile::Step { start: 3.0, width: 1.0 };
    let a = Profile::Sum {
        terms: vec![
            Profile::Product { factors: vec![Profile::Instanton { power: 4.0 }.scaled(0.2), one_minus(step.clone())] },
            Profile::Product { factors: vec![Profile::Instanton { power: 3.0 }.scaled(5.0), step.clone()] },
        ],
    };
    ProblemSpec {
        dim: 3,
        lambda,
        mu: 0.0,
        a,
        b: step.scaled(200.0),
        h: Profile::Gaussian { amplitude: 1.0, center: 0.0, width: 1.0 },
        g: Nonlinearity::power(4.0),
        beta: 3.0,
        c1: None,
        q: 3.0,
        s: 6.0,
        c2: None,
        zero_set: ZeroSet::ClosedBall { radius: 3.0 },
    }
}

/// Default grid of the plateau problem.
pub fn main_plateau_grid(intervals: usize) -> Result<RadialGrid> {
    whole_space_grid(&main_plateau(1.0), 200.0, intervals, 1.012)
}

/// The plateau problem with `λ` midway in its window on `grid`.
pub fn main_plateau_midway(grid: &RadialGrid) -> Result<ProblemSpec> {
    let mut spec = main_plateau(1.0);
    resolve_lambda(&mut spec, grid, LambdaChoice::WindowFraction(0.5))?;
    Ok(spec)
}

/// Absorption level of the bounded family beyond radius 1.
pub const BOUNDED_PO_B0: f64 = 20.0;

/// Ball of radius 2 with the boundary-degenerate weight of the bounded appendix
/// example, `b = b0` beyond radius 1 and a Gaussian `h`.
pub fn bounded_po(lambda: f64, b0: f64) -> Result<ProblemSpec> {
    let ex = AppendixExample::ball_of_radius_two(3, 3.0, 1.0)?;
    Ok(ProblemSpec {
        dim: 3,
        lambda,
        mu: 0.0,
        a: ex.a,
        b: Profile::piecewise(1.0, Profile::constant(0.0), Profile::constant(b0)),
        h: Profile::Gaussian { amplitude: 1.0, center: 0.0, width: 1.0 },
        g: Nonlinearity::power(4.0),
        beta: 3.0,
        c1: None,
        q: 3.0,
        s: 6.0,
        c2: None,
        zero_set: ZeroSet::ClosedBall { radius: 1.0 },
    })
}

pub fn bounded_po_grid(intervals: usize) -> Result<RadialGrid> {
    let cfg = BoundedConfig::default();
    ball_grid(&bounded_po(1.0, BOUNDED_PO_B0)?, 2.0, intervals, &[cfg.bump_radius])
}

/// `a = d^3`, `λ = 3`, `Υ = 1 + r^4`, `g = s^2`, `h = (1 - r^2)^3` on the unit ball.
pub fn fast_growth_example() -> FastGrowthSpec {
    FastGrowthSpec {
        dim: 3,
        lambda: 3.0,
        a: Profile::Instanton { power: 3.0 },
        upsilon: Profile::Sum { terms: vec![Profile::constant(1.0), Profile::PowerLaw { exponent: 4.0 }] },
        g: Nonlinearity::power(2.0),
        h: Profile::SmoothBump { amplitude: 1.0, radius: 1.0 },
    }
}

pub fn fast_growth_grid(intervals: usize) -> Result<RadialGrid> {
    RadialGrid::build(3, DomainKind::WholeSpace { r_infinity: 200.0 }, intervals, 1.012)?.pinned(&[1.0])
}
