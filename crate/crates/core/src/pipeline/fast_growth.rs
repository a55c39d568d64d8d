use serde::{Deserialize, Serialize};

use super::main_solve::LadderRung;
use super::model::PipelineSettings;
use super::report::{Certificate, PipelineReport, Status};
use crate::error::{Error, Result};
use crate::functional::{Functional, Reaction};
use crate::grid::RadialGrid;
use crate::minimize::{minimize_constrained, MinimizeOutcome};
use crate::nonlinearity::{truncation_exponent, Nonlinearity, TruncatedNonlinearity};
use crate::obstacle::ObstacleSet;
use crate::operator::{BoundaryCondition, LaplaceOperator};
use crate::oracles::verify_solution;
use crate::problem::{ProblemSpec, ZeroSet};
use crate::profile::Profile;
use crate::spectral::{check_lambda_window, principal_eigen, EigenDomain, EigenOptions};

/// Problem with `b = λ a Υ` for a locally bounded `Υ` of arbitrary growth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FastGrowthSpec {
    pub dim: usize,
    pub lambda: f64,
    pub a: Profile,
    pub upsilon: Profile,
    pub g: Nonlinearity,
    /// Compactly supported harvesting profile.
    pub h: Profile,
}

impl FastGrowthSpec {
    /// Equivalent problem data at harvesting level `mu`.
    pub fn problem(&self, mu: f64) -> ProblemSpec {
        ProblemSpec {
            dim: self.dim,
            lambda: self.lambda,
            mu,
            a: self.a.clone(),
            b: Profile::scaled(Profile::Product { factors: vec![self.a.clone(), self.upsilon.clone()] }, self.lambda),
            h: self.h.clone(),
            g: self.g.clone(),
            beta: 3.0,
            c1: None,
            q: self.dim as f64,
            s: 2.0 * self.dim as f64,
            c2: None,
            zero_set: ZeroSet::Empty,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FastGrowthOutcome {
    /// Positive minimizer `ů` of the modified problem.
    pub u_ring: Vec<f64>,
    pub c: f64,
    pub c9: f64,
    pub mu_3: f64,
    pub mu: f64,
    pub u: Vec<f64>,
    pub ladder: Vec<LadderRung>,
    pub report: PipelineReport,
}

fn ladder<'a>(
    op: &LaplaceOperator,
    settings: &PipelineSettings,
    start: &[f64],
    obstacle: &ObstacleSet,
    functional: impl Fn(f64) -> Functional<'a>,
) -> Result<(MinimizeOutcome, Vec<LadderRung>, bool)> {
    let mut m = 1.0f64;
    let mut rungs = Vec::new();
    let mut out = minimize_constrained(&functional(m), start, obstacle, &settings.minimize)?;
    loop {
        let sup = out.u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let norm = op.energy_norm(&out.u);
        rungs.push(LadderRung {
            m,
            sup,
            norm,
            c6: sup / norm.max(f64::MIN_POSITIVE),
            energy: out.energy.total,
            iterations: out.iterations,
            converged: out.converged,
            trace: out.trace.clone(),
        });
        let closed = out.converged && sup <= m;
        if closed || !out.converged || rungs.len() > settings.max_doublings {
            return Ok((out, rungs, closed));
        }
        m *= 2.0;
        out = minimize_constrained(&functional(m), &out.u, obstacle, &settings.minimize)?;
    }
}

/// Builds `ů`, derives `μ3 = λ c^2 / C9` and solves at `mu` (default `μ3 / 2`)
/// with `ů` as lower obstacle.
pub fn solve_fast_growth(spec: &FastGrowthSpec, grid: &RadialGrid, settings: &PipelineSettings, mu: Option<f64>) -> Result<FastGrowthOutcome> {
    if spec.dim < 3 || grid.dim() != spec.dim {
        return Err(Error::DimensionMismatch { expected: spec.dim, found: grid.dim() });
    }
    let lambda = spec.lambda;
    let op = LaplaceOperator::new(grid, BoundaryCondition::natural(grid));
    let a = spec.a.sample(grid);
    let ups = spec.upsilon.sample(grid);
    let h = spec.h.sample(grid);
    let n = grid.len();
    let tol = settings.certificate_tol;
    let p = truncation_exponent(spec.dim);
    let mut report = PipelineReport::new("fast-growth", spec.dim, lambda, mu.unwrap_or(f64::NAN));

    let hmax = h.iter().copied().fold(0.0, f64::max);
    let support: Vec<usize> = (0..n).filter(|&i| h[i] > 1e-12 * hmax && !op.fixed()[i]).collect();
    if support.is_empty() || h.iter().any(|&v| v < 0.0) {
        return Err(Error::hypothesis("harvesting profile h", "h must be nonnegative and not identically zero"));
    }
    if support.iter().any(|&i| a[i] <= 0.0) {
        return Err(Error::hypothesis("harvesting profile h", "h <= C9 a needs a > 0 on the support of h"));
    }
    let c9 = support.iter().map(|&i| h[i] / a[i]).fold(0.0, f64::max);

    let l1 = principal_eigen(&op, grid, &a, EigenDomain::Full, EigenOptions::default())?;
    let window = check_lambda_window(lambda, l1.value, f64::INFINITY);
    if !window.inside {
        return Err(Error::Window(format!("lambda = {lambda} <= lambda_1 = {}", l1.value)));
    }
    report.window = Some(window);
    report.scalar("lambda_1", l1.value);

    let b: Vec<f64> = (0..n).map(|i| lambda * a[i] * ups[i]).collect();
    let b_tilde: Vec<f64> = (0..n).map(|i| lambda * a[i] * ups[i].max(1.0)).collect();
    let g_tilde = spec.g.plus_square();

    // ů over u >= 0, from the first multiple t φ1 (t = 1, 1/2, ...) with negative energy
    let phi = l1.eigenfunction.as_ref().map(|f| f.values.clone()).unwrap_or_else(|| vec![1.0; n]);
    let zero = vec![0.0; n];
    let ring_functional = |m: f64| Functional {
        op: &op,
        lambda,
        mu: 0.0,
        a: &a,
        h: &zero,
        reaction: Reaction::FastGrowth { b_tilde: &b_tilde, j: TruncatedNonlinearity::new(g_tilde.clone(), m, p) },
    };
    let probe = ring_functional(1.0);
    let start = (0..40)
        .map(|k| 0.5f64.powi(k))
        .map(|t| phi.iter().map(|v| t * v.max(0.0)).collect::<Vec<f64>>())
        .find(|u| probe.energy(u).total < 0.0)
        .ok_or_else(|| Error::Window("no multiple of the principal eigenfunction has negative energy".into()))?;
    let nonneg = ObstacleSet::non_negative(n);
    let (ring_out, ring_ladder, ring_closed) = ladder(&op, settings, &start, &nonneg, ring_functional)?;
    let u_ring = ring_out.u;
    let c = support.iter().map(|&i| u_ring[i]).fold(f64::INFINITY, f64::min);
    let mu_3 = lambda * c * c / c9;
    let mu = mu.unwrap_or(0.5 * mu_3);
    report.mu = mu;
    report.scalar("C9", c9);
    report.scalar("c", c);
    report.scalar("mu_3", mu_3);
    report.scalar("ring_sup", ring_ladder.last().map_or(f64::NAN, |r| r.sup));
    report.push(Certificate::flag("ring-converged", ring_out.converged && ring_closed, "minimizer over u >= 0 closed its ladder"));
    let ring_min = (0..n).filter(|&i| !op.fixed()[i]).map(|i| u_ring[i]).fold(f64::INFINITY, f64::min);
    report.push(Certificate::above("ring-positivity", ring_min, 0.0, "u_ring > 0 at interior nodes"));
    report.push(Certificate::above("c-positive", c, 0.0, "c = min u_ring on supp h"));
    report.push(Certificate::above("mu3-positive", mu_3, 0.0, "mu_3 = lambda c^2 / C9"));

    // μ h <= (λ c^2 / C9) h <= c^2 b̃ <= b̃ g̃(ů) on supp h
    let mut chain_excess = f64::NEG_INFINITY;
    for &i in &support {
        let steps = [mu * h[i], lambda * c * c / c9 * h[i], c * c * b_tilde[i], b_tilde[i] * g_tilde.eval(u_ring[i])];
        for w in steps.windows(2) {
            chain_excess = chain_excess.max(w[0] - w[1] * (1.0 + 1e-12));
        }
    }
    report.push(Certificate::at_most("harvest-chain", chain_excess, tol, "mu h <= b_tilde g_tilde(u_ring) on supp h"));

    let problem = spec.problem(mu);
    let lower = ObstacleSet::lower_only(u_ring.clone());
    let (out, rungs, closed) = ladder(&op, settings, &u_ring, &lower, |m| Functional {
        op: &op,
        lambda,
        mu,
        a: &a,
        h: &h,
        reaction: Reaction::Truncated { b: &b, j: TruncatedNonlinearity::new(spec.g.clone(), m, p) },
    })?;
    let last = rungs.last().expect("ladder has a rung").clone();
    if !out.converged {
        report.status = Status::NonConvergence;
    }
    report.push(Certificate::flag("main-converged", out.converged, format!("{} iterations", out.iterations)));
    report.push(Certificate::flag("ladder-closed", closed, format!("sup u = {:.6e}, m = {}", last.sup, last.m)));
    report.scalar("m", last.m);
    report.scalar("sup_u", last.sup);
    report.scalar("energy", last.energy);
    let u = out.u;
    let below = u.iter().zip(&u_ring).map(|(x, y)| y - x).fold(f64::NEG_INFINITY, f64::max);
    report.push(Certificate::at_most("lower-obstacle", below, tol, "u_ring <= u"));
    let j = TruncatedNonlinearity::new(spec.g.clone(), last.m, p);
    report.push(Certificate::flag("branch-identity", u.iter().all(|&v| j.eval(v) == spec.g.eval(v)), "j_m(u) = g(u)"));

    let coeffs = crate::problem::Coefficients { a: a.clone(), b: b.clone(), h: h.clone() };
    let v = verify_solution(&u, &problem, &coeffs, grid, &op)?;
    report.scalar("residual", v.relative_strong);
    report.push(Certificate::at_most("residual", v.relative_strong, settings.residual_tol, "weighted relative strong residual"));
    report.push(Certificate::above("positivity", v.min_interior, 0.0, "u > 0 at interior nodes"));
    if let Some(c3) = v.decay_lower {
        report.scalar("C3", c3);
        report.push(Certificate::above("decay", c3, 0.0, "min r^(N-2) u over the outer half"));
    }
    report.finalize();

    Ok(FastGrowthOutcome { u_ring, c, c9, mu_3, mu, u, ladder: rungs, report })
}
