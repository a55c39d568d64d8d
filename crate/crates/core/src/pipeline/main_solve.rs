use serde::{Deserialize, Serialize};

use super::model::Model;
use super::related::{decay_constant, solve_related, RelatedPreparation, RelatedSolution};
use super::report::{Certificate, PipelineReport, Status};
use crate::error::Result;
use crate::minimize::TraceRow;
use crate::nonlinearity::TruncatedNonlinearity;
use crate::obstacle::ObstacleSet;
use crate::oracles::{verify_solution, VerificationReport};

/// One level of the truncation ladder.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LadderRung {
    pub m: f64,
    pub sup: f64,
    pub norm: f64,
    /// `sup u / ||u||`.
    pub c6: f64,
    pub energy: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Filled when traces are recorded.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<TraceRow>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MainSolution {
    pub mu: f64,
    pub u: Vec<f64>,
    pub related: RelatedSolution,
    pub ladder: Vec<LadderRung>,
    pub verification: Option<VerificationReport>,
    pub report: PipelineReport,
}

impl MainSolution {
    pub fn succeeded(&self) -> bool {
        self.report.status == Status::Success
    }
}

/// Prepares the related problem and solves at `mu`.
pub fn solve_main(model: &Model, mu: f64) -> Result<MainSolution> {
    let prep = RelatedPreparation::new(model)?;
    solve_main_with(model, &prep, mu)
}

/// Truncation ladder above `ū_μ`, reusing a prepared related problem.
pub fn solve_main_with(model: &Model, prep: &RelatedPreparation, mu: f64) -> Result<MainSolution> {
    let s = &model.settings;
    let tol = s.certificate_tol;
    let mut report = PipelineReport::new("main", model.grid.dim(), model.spec.lambda, mu);
    report.window = Some(model.window.clone());
    report.hypotheses = Some(model.hypotheses.clone());
    report.constants = Some(model.consts.clone());
    report.scalar("lambda_1", model.lambda_1.value);
    report.scalar("lambda_star", model.lambda_star.value);
    prep.record(&mut report);

    let related = solve_related(model, prep, mu)?;
    report.scalar("related_energy", related.energy);
    if let Some(c3) = related.c3 {
        report.scalar("C3_related", c3);
    }
    for c in &related.certificates {
        report.push(c.clone());
    }
    if !related.converged {
        report.status = Status::NonConvergence;
    }

    let lower = ObstacleSet::lower_only(related.u.clone());
    let mut u = related.u.clone();
    let mut m = 1.0f64;
    let mut ladder = Vec::new();
    let mut closed = false;
    for _ in 0..=s.max_doublings {
        let f = model.truncated_functional(mu, m);
        let out = model.minimize(&f, &u, &lower)?;
        let sup = out.u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let norm = model.op.energy_norm(&out.u);
        ladder.push(LadderRung {
            m,
            sup,
            norm,
            c6: sup / norm.max(f64::MIN_POSITIVE),
            energy: out.energy.total,
            iterations: out.iterations,
            converged: out.converged,
            trace: out.trace.clone(),
        });
        u = out.u;
        if !out.converged {
            report.status = Status::NonConvergence;
            break;
        }
        if sup <= m {
            closed = true;
            break;
        }
        m *= 2.0;
    }
    let last = ladder.last().expect("ladder has at least one rung").clone();
    report.push(Certificate::flag(
        "main-converged",
        last.converged,
        format!("{} iterations at m = {}", last.iterations, last.m),
    ));
    report.push(Certificate::flag(
        "ladder-closed",
        closed,
        format!("sup u = {:.6e} against m = {} after {} levels", last.sup, last.m, ladder.len()),
    ));
    let c6 = ladder.iter().map(|r| r.c6).fold(0.0, f64::max);
    let max_norm = ladder.iter().map(|r| r.norm).fold(0.0, f64::max);
    report.scalar("m", last.m);
    report.scalar("sup_u", last.sup);
    report.scalar("C6", c6);
    report.scalar("C7", c6 * max_norm);
    report.scalar("energy", last.energy);

    let j = TruncatedNonlinearity::new(model.spec.g.clone(), last.m, model.consts.p);
    let identity = u.iter().all(|&v| j.eval(v) == model.spec.g.eval(v));
    report.push(Certificate::flag("branch-identity", identity, "j_m(u) = g(u) at every node"));
    report.push(Certificate::at_most(
        "energy-ordering",
        last.energy - related.energy,
        tol,
        "I^m(u) <= I_mu(u_bar)",
    ));
    report.push(Certificate::at_most("energy-negative", related.energy, 0.0, "I_mu(u_bar) < 0"));
    let below_sub = u.iter().zip(&related.u).map(|(a, b)| b - a).fold(f64::NEG_INFINITY, f64::max);
    report.push(Certificate::at_most("lower-obstacle", below_sub, tol, "u_bar <= u"));

    let mut spec = model.spec.clone();
    spec.mu = mu;
    let v = verify_solution(&u, &spec, &model.coeffs, &model.grid, &model.op)?;
    report.scalar("residual", v.relative_strong);
    report.scalar("dual_residual", v.relative_dual);
    report.push(Certificate::at_most("residual", v.relative_strong, s.residual_tol, "weighted relative strong residual"));
    report.push(Certificate::above("positivity", v.min_interior, 0.0, "u > 0 at interior nodes"));
    let scale = model.op.energy_sq(&u);
    report.push(Certificate::above("rayleigh", v.rayleigh_slack, -1e-9 * scale.max(1.0), "lambda int a u^2 >= ||u||^2"));
    if model.is_whole_space() {
        let over = u.iter().zip(&model.ld).map(|(a, b)| a - b).fold(f64::NEG_INFINITY, f64::max);
        report.push(Certificate::at_most("upper-envelope", over, tol, "u <= l d"));
        let r0 = related.decay_radius.unwrap_or(0.0);
        let c3 = decay_constant(model, &u, r0);
        report.scalar("C3", c3);
        report.scalar("decay_radius", r0);
        report.push(Certificate::above("decay", c3, 0.0, format!("u >= C3 / r^(N-2) for r >= {r0:.4}")));
    }
    report.finalize();

    Ok(MainSolution { mu, u, related, ladder, verification: Some(v), report })
}
