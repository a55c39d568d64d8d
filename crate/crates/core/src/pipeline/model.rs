use serde::{Deserialize, Serialize};

use crate::constants::{derive_constants, DerivedConstants};
use crate::error::{Error, Result};
use crate::functional::{Functional, Reaction};
use crate::grid::{DomainKind, RadialGrid};
use crate::hypotheses::{validate_hypotheses, HypothesisReport};
use crate::instanton::{build_d_bounded, build_instanton, BoundedInstanton};
use crate::minimize::{minimize_constrained, MinimizeOptions, MinimizeOutcome};
use crate::nonlinearity::TruncatedNonlinearity;
use crate::obstacle::ObstacleSet;
use crate::operator::{BoundaryCondition, LaplaceOperator};
use crate::problem::{Coefficients, ProblemSpec, ZeroSet};
use crate::spectral::{check_lambda_window, principal_eigen, EigenDomain, EigenOptions, EigenResult, WindowCheck};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PipelineSettings {
    pub minimize: MinimizeOptions,
    /// Slack allowed in pointwise inequalities.
    pub certificate_tol: f64,
    /// Bound on the weighted relative residual of the final solution.
    pub residual_tol: f64,
    /// Maximal number of doublings of the truncation level.
    pub max_doublings: usize,
    /// Coarse points used before bisecting for `μ2`.
    pub mu_scan_points: usize,
    /// Relative bracket width of all bisections.
    pub bisection_rel_tol: f64,
}

impl Default for PipelineSettings {
    fn default() -> Self {
        Self {
            minimize: MinimizeOptions::default(),
            certificate_tol: 1e-9,
            residual_tol: 1e-7,
            max_doublings: 12,
            mu_scan_points: 9,
            bisection_rel_tol: 1e-3,
        }
    }
}

/// Which comparison profile `d` to use.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ComparisonProfile {
    Instanton,
    /// Green potential of a uniform bump at the origin of a ball.
    Bounded { inner_radius: f64, bump_radius: f64, mass: f64 },
}

/// Sampled problem, spectral window and constants on a fixed grid.
#[derive(Clone, Debug)]
pub struct Model {
    pub spec: ProblemSpec,
    pub grid: RadialGrid,
    pub op: LaplaceOperator,
    pub coeffs: Coefficients,
    pub d: Vec<f64>,
    pub bounded_d: Option<BoundedInstanton>,
    /// The supersolution `ℓ d`.
    pub ld: Vec<f64>,
    pub consts: DerivedConstants,
    pub hypotheses: HypothesisReport,
    pub lambda_1: EigenResult,
    pub lambda_star: EigenResult,
    pub window: WindowCheck,
    pub settings: PipelineSettings,
}

/// Region where `b` vanishes, as an eigenproblem domain.
pub fn zero_set_domain(zero_set: &ZeroSet) -> EigenDomain {
    match zero_set {
        ZeroSet::ClosedBall { radius } => EigenDomain::InteriorBall { radius: *radius },
        ZeroSet::Empty | ZeroSet::MeasureZero => EigenDomain::Empty,
    }
}

/// `λ1(a)` on the grid and `λ*` on the zero set of `b`.
pub fn eigen_window(spec: &ProblemSpec, grid: &RadialGrid, op: &LaplaceOperator, a: &[f64]) -> Result<(EigenResult, EigenResult)> {
    let opts = EigenOptions::default();
    let l1 = principal_eigen(op, grid, a, EigenDomain::Full, opts)?;
    let ls = principal_eigen(op, grid, a, zero_set_domain(&spec.zero_set), opts)?;
    Ok((l1, ls))
}

impl Model {
    pub fn new(spec: ProblemSpec, grid: RadialGrid, comparison: ComparisonProfile, settings: PipelineSettings) -> Result<Self> {
        spec.validate_parameters()?;
        let coeffs = spec.sample(&grid)?;
        let op = LaplaceOperator::new(&grid, BoundaryCondition::natural(&grid));
        let (d, bounded_d) = match comparison {
            ComparisonProfile::Instanton => {
                if !grid.kind().is_whole_space() {
                    return Err(Error::param("the instanton comparison needs a whole-space grid"));
                }
                (build_instanton(&grid), None)
            }
            ComparisonProfile::Bounded { inner_radius, bump_radius, mass } => {
                if !matches!(grid.kind(), DomainKind::Ball { .. }) {
                    return Err(Error::param("the bounded comparison needs a ball grid"));
                }
                let bd = build_d_bounded(&grid, inner_radius, bump_radius, mass)?;
                (bd.d.clone(), Some(bd))
            }
        };
        let hypotheses = validate_hypotheses(&spec, &grid, &coeffs, &d);
        if let Some(f) = hypotheses.first_failure() {
            return Err(Error::hypothesis(f.hypothesis.to_string(), f.detail.clone()));
        }
        let (lambda_1, lambda_star) = eigen_window(&spec, &grid, &op, &coeffs.a)?;
        let window = check_lambda_window(spec.lambda, lambda_1.value, lambda_star.value);
        if !window.inside {
            return Err(Error::Window(format!(
                "lambda = {} not in ({}, {}): margins {:.6e}, {:.6e}",
                spec.lambda, window.lambda_1, window.lambda_star, window.lower_margin, window.upper_margin
            )));
        }
        let c1 = spec.c1.unwrap_or(hypotheses.c1_tight);
        let consts = derive_constants(&spec, c1)?;
        let ld = d.iter().map(|v| consts.ell * v).collect();
        Ok(Self { spec, grid, op, coeffs, d, bounded_d, ld, consts, hypotheses, lambda_1, lambda_star, window, settings })
    }

    pub fn is_whole_space(&self) -> bool {
        self.grid.kind().is_whole_space()
    }

    pub fn comparison_functional(&self, mu: f64) -> Functional<'_> {
        Functional {
            op: &self.op,
            lambda: self.spec.lambda,
            mu,
            a: &self.coeffs.a,
            h: &self.coeffs.h,
            reaction: Reaction::Comparison { ld: &self.ld, beta: self.consts.beta },
        }
    }

    pub fn truncated_functional(&self, mu: f64, m: f64) -> Functional<'_> {
        Functional {
            op: &self.op,
            lambda: self.spec.lambda,
            mu,
            a: &self.coeffs.a,
            h: &self.coeffs.h,
            reaction: Reaction::Truncated {
                b: &self.coeffs.b,
                j: TruncatedNonlinearity::new(self.spec.g.clone(), m, self.consts.p),
            },
        }
    }

    pub fn minimize(&self, f: &Functional<'_>, start: &[f64], obstacle: &ObstacleSet) -> Result<MinimizeOutcome> {
        minimize_constrained(f, start, obstacle, &self.settings.minimize)
    }

    /// Indices of nodes not held by a Dirichlet condition.
    pub fn free_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.grid.len()).filter(|&i| !self.op.fixed()[i])
    }

    /// Smallest value over free nodes.
    pub fn min_free(&self, u: &[f64]) -> f64 {
        self.free_nodes().map(|i| u[i]).fold(f64::INFINITY, f64::min)
    }

    /// Radius beyond which `h` is negligible.
    pub fn harvest_support_radius(&self) -> f64 {
        let hmax = self.coeffs.h.iter().copied().fold(0.0, f64::max);
        let r = self.grid.nodes();
        (0..r.len()).rev().find(|&i| self.coeffs.h[i] > 1e-12 * hmax).map_or(0.0, |i| r[i])
    }
}
