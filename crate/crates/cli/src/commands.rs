use std::collections::BTreeMap;
use std::path::Path;

use logistic_steady::functional::{check_gradient, Functional, Reaction};
use logistic_steady::grid::DomainKind;
use logistic_steady::nonlinearity::{truncation_exponent, TruncatedNonlinearity};
use logistic_steady::oracles::{study_appendix, AppendixExample};
use logistic_steady::pipeline::{
    eigen_window, find_mu_threshold, is_success_prefix, solve_bounded, solve_fast_growth, solve_main_with, solve_related,
    Certificate, Model, PipelineReport, RelatedPreparation, Status, SweepPoint,
};
use logistic_steady::spectral::{check_lambda_window, richardson, serde_inf, EigenResult, WindowCheck};
use logistic_steady::{BoundaryCondition, Error, LaplaceOperator, ProblemSpec, RadialGrid, Result};
use rayon::prelude::*;
use serde::Serialize;

use crate::artifacts::{decay_envelope, grid_rows, ladder_rows, solution_rows, traces, Artifacts, EigenSummary, GridSummary, RunManifest, Timings};
use crate::config::{Resolved, RunConfig, Variant};

type Writer = Box<dyn FnOnce(&mut Artifacts) -> Result<()>>;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CERTIFICATE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_HYPOTHESIS: i32 = 3;
pub const EXIT_NONCONVERGENCE: i32 = 4;

pub fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Hypothesis { .. } | Error::Window(_) => EXIT_HYPOTHESIS,
        Error::NonConvergence { .. } => EXIT_NONCONVERGENCE,
        Error::Certificate { .. } => EXIT_CERTIFICATE,
        _ => EXIT_CONFIG,
    }
}

pub fn exit_code_for_status(s: Status) -> i32 {
    match s {
        Status::Success => EXIT_OK,
        Status::CertificateFailure => EXIT_CERTIFICATE,
        Status::NonConvergence => EXIT_NONCONVERGENCE,
    }
}

/// Shared run context.
pub struct Run<'a> {
    pub config: RunConfig,
    pub out_dir: &'a Path,
    pub seed: u64,
    pub threads: Option<usize>,
}

fn eigen_summary(l1: &EigenResult, ls: &EigenResult, window: Option<WindowCheck>) -> EigenSummary {
    EigenSummary {
        lambda_1: l1.value,
        lambda_1_residual: Some(l1.residual),
        lambda_star: ls.value,
        lambda_star_residual: Some(ls.residual),
        window,
    }
}

fn gradient_certificate(report: &mut PipelineReport, f: &Functional<'_>, base: &[f64], pairs: usize, seed: u64) {
    let worst = check_gradient(f, base, pairs, seed).iter().map(|s| s.relative_error).fold(0.0, f64::max);
    report.scalar("gradient_max_relative_error", worst);
    report.push(Certificate::at_most(
        "gradient-consistency",
        worst,
        1e-6,
        format!("{pairs} random directions around the solution"),
    ));
    report.finalize();
}

fn print_certificates(report: &PipelineReport) {
    for c in &report.certificates {
        println!("  [{}] {:<24} {}", if c.passed { "pass" } else { "FAIL" }, c.name, c.detail);
    }
    println!("status: {:?}", report.status);
}

/// `solve`: one pipeline variant at one `μ`.
pub fn solve(run: Run<'_>, variant: Variant) -> Result<i32> {
    let cfg = &run.config;
    if !cfg.supports(variant) {
        return Err(Error::Config(format!("variant {} does not apply to this problem family", variant.name())));
    }
    let mut timings = Timings::default();
    timings.start("setup");
    let resolved = cfg.resolve()?;
    let settings = cfg.solver.settings();
    let mut manifest = RunManifest::new("solve", cfg, run.seed, run.threads)?;
    manifest.variant = Some(variant.name().into());

    let (report, writer): (PipelineReport, Writer) = match resolved {
        Resolved::Pipeline { spec, grid, comparison, bounded } => {
            let model = Model::new(spec, grid, comparison, settings)?;
            manifest.grid = Some(GridSummary::of(&model.grid));
            manifest.eigen = Some(eigen_summary(&model.lambda_1, &model.lambda_star, Some(model.window.clone())));
            manifest.constants = Some(model.consts.clone());
            timings.start("related-preparation");
            let prep = RelatedPreparation::new(&model)?;
            let mu = model.spec.mu;
            timings.start("solve");
            let pairs = cfg.solver.gradient_pairs;
            match variant {
                Variant::Related => {
                    let sol = solve_related(&model, &prep, mu)?;
                    let mut report = sol.report(&model, &prep);
                    gradient_certificate(&mut report, &model.comparison_functional(mu), &sol.u, pairs, run.seed);
                    let env = sol.c3.map(|c| decay_envelope(&model.grid, c));
                    let rows = solution_rows(&model.grid, &sol.u, Some(&model.ld), Some(&prep.u_hat_mu2), env.as_deref());
                    let g = grid_rows(&model.grid);
                    let t = traces(Some(&sol.trace), &[]);
                    (report, Box::new(move |a: &mut Artifacts| {
                        a.write_csv("solution.csv", &rows)?;
                        a.write_csv("grid.csv", &g)?;
                        a.write_traces(&t)
                    }))
                }
                Variant::Main => {
                    let sol = solve_main_with(&model, &prep, mu)?;
                    let mut report = sol.report.clone();
                    let m = sol.ladder.last().map_or(1.0, |r| r.m);
                    gradient_certificate(&mut report, &model.truncated_functional(mu, m), &sol.u, pairs, run.seed);
                    let env = report.get_scalar("C3").map(|c| decay_envelope(&model.grid, c));
                    let rows = solution_rows(&model.grid, &sol.u, Some(&model.ld), Some(&sol.related.u), env.as_deref());
                    let g = grid_rows(&model.grid);
                    let ladder = ladder_rows(&sol.ladder);
                    let t = traces(Some(&sol.related.trace), &sol.ladder);
                    (report, Box::new(move |a: &mut Artifacts| {
                        a.write_csv("solution.csv", &rows)?;
                        a.write_csv("ladder.csv", &ladder)?;
                        a.write_csv("grid.csv", &g)?;
                        a.write_traces(&t)
                    }))
                }
                Variant::Bounded => {
                    let bcfg = bounded.ok_or_else(|| Error::Config("bounded variant needs a ball domain".into()))?;
                    let out = solve_bounded(&model, &bcfg, mu)?;
                    let mut report = out.main.report.clone();
                    let m = out.main.ladder.last().map_or(1.0, |r| r.m);
                    gradient_certificate(&mut report, &model.truncated_functional(mu, m), &out.main.u, pairs, run.seed);
                    let d_hat = model.bounded_d.as_ref().map(|b| b.d.clone()).unwrap_or_default();
                    let env: Vec<f64> = d_hat.iter().zip(&prep.w).map(|(d, w)| out.epsilon * d - mu * w).collect();
                    let rows = solution_rows(&model.grid, &out.main.u, Some(&model.ld), Some(&out.main.related.u), Some(&env));
                    let g = grid_rows(&model.grid);
                    let ladder = ladder_rows(&out.main.ladder);
                    let t = traces(Some(&out.main.related.trace), &out.main.ladder);
                    (report, Box::new(move |a: &mut Artifacts| {
                        a.write_csv("solution.csv", &rows)?;
                        a.write_csv("ladder.csv", &ladder)?;
                        a.write_csv("grid.csv", &g)?;
                        a.write_traces(&t)
                    }))
                }
                _ => unreachable!("checked by supports"),
            }
        }
        Resolved::FastGrowth { spec, grid } => {
            manifest.grid = Some(GridSummary::of(&grid));
            timings.start("solve");
            let out = solve_fast_growth(&spec, &grid, &settings, cfg.mu)?;
            let mut report = out.report.clone();
            let op = LaplaceOperator::new(&grid, BoundaryCondition::natural(&grid));
            let a = spec.a.sample(&grid);
            let h = spec.h.sample(&grid);
            let ups = spec.upsilon.sample(&grid);
            let b: Vec<f64> = a.iter().zip(&ups).map(|(a, y)| spec.lambda * a * y).collect();
            let m = out.ladder.last().map_or(1.0, |r| r.m);
            let f = Functional {
                op: &op,
                lambda: spec.lambda,
                mu: out.mu,
                a: &a,
                h: &h,
                reaction: Reaction::Truncated { b: &b, j: TruncatedNonlinearity::new(spec.g.clone(), m, truncation_exponent(spec.dim)) },
            };
            gradient_certificate(&mut report, &f, &out.u, cfg.solver.gradient_pairs, run.seed);
            manifest.eigen = report.window.clone().map(|w| EigenSummary {
                lambda_1: w.lambda_1,
                lambda_1_residual: None,
                lambda_star: w.lambda_star,
                lambda_star_residual: None,
                window: Some(w),
            });
            let env = report.get_scalar("C3").map(|c| decay_envelope(&grid, c));
            let rows = solution_rows(&grid, &out.u, None, Some(&out.u_ring), env.as_deref());
            let g = grid_rows(&grid);
            let ladder = ladder_rows(&out.ladder);
            let t = traces(None, &out.ladder);
            (report, Box::new(move |a: &mut Artifacts| {
                a.write_csv("solution.csv", &rows)?;
                a.write_csv("ladder.csv", &ladder)?;
                a.write_csv("grid.csv", &g)?;
                a.write_traces(&t)
            }))
        }
        Resolved::Oracle { example, grid } => {
            manifest.grid = Some(GridSummary::of(&grid));
            timings.start("verify");
            let (report, rows) = verify_oracle(&example, &grid, cfg.solver.verify_tol)?;
            manifest.notes.push("oracle eigenfunction normalized so that phi(0) = sqrt(lambda*); phi = sin(pi r) / r for N = 3".into());
            let g = grid_rows(&grid);
            (report, Box::new(move |a: &mut Artifacts| {
                a.write_csv("oracle.csv", &rows)?;
                a.write_csv("grid.csv", &g)
            }))
        }
    };

    timings.start("write");
    print_certificates(&report);
    let code = exit_code_for_status(report.status);
    let mut art = Artifacts::create(run.out_dir)?;
    writer(&mut art)?;
    art.write_json("report.json", &report)?;
    manifest.status = Some(report.status);
    manifest.exit_code = code;
    manifest.scalars = report.scalars.clone();
    manifest.certificates = report.certificates.clone();
    if manifest.constants.is_none() {
        manifest.constants = report.constants.clone();
    }
    manifest.outputs = art.entries();
    art.write_json("manifest.json", &manifest)?;
    timings.write(run.out_dir)?;
    Ok(code)
}

#[derive(Serialize)]
struct OracleRow {
    r: f64,
    u: f64,
    a: f64,
    b: f64,
    mu_h: f64,
}

/// Residual study of the exact appendix solution, plus the window gate it must fail.
fn verify_oracle(ex: &AppendixExample, grid: &RadialGrid, tol: f64) -> Result<(PipelineReport, Vec<OracleRow>)> {
    let study = study_appendix(ex, grid)?;
    let mut report = PipelineReport::new("verify", ex.dim, ex.lambda, ex.mu);
    let spec = ex.spec();
    let op = LaplaceOperator::new(grid, BoundaryCondition::natural(grid));
    let (l1, ls) = eigen_window(&spec, grid, &op, &spec.a.sample(grid))?;
    let window = check_lambda_window(ex.lambda, l1.value, ls.value);

    println!("{:>8} {:>14} {:>14} {:>14}", "nodes", "rel. dual", "rel. strong", "dual");
    for (n, v) in [(study.nodes, &study.coarse), (2 * study.nodes - 1, &study.fine)] {
        println!("{:>8} {:>14.6e} {:>14.6e} {:>14.6e}", n, v.relative_dual, v.relative_strong, v.dual_residual);
    }
    println!("observed order: {:.4}", study.order);

    report.scalar("residual", study.coarse.relative_dual);
    report.scalar("residual_fine", study.fine.relative_dual);
    report.scalar("strong_residual", study.coarse.relative_strong);
    report.scalar("order", study.order);
    report.scalar("kappa", ex.kappa);
    report.scalar("lambda_star_exact", ex.lambda_star);
    report.scalar("lambda_1", l1.value);
    report.scalar("lambda_star", ls.value);
    report.push(Certificate::at_most("oracle-residual", study.coarse.relative_dual, tol, "relative dual residual of the exact solution"));
    report.push(Certificate::above("oracle-order", study.order, 1.9, "observed order under 2x refinement"));
    report.push(Certificate::above("oracle-positivity", study.coarse.min_interior, 0.0, "exact solution positive"));
    report.push(Certificate::flag(
        "window-rejected",
        !window.inside,
        format!("lambda = lambda* + mu lies outside ({:.6}, {:.6})", l1.value, ls.value),
    ));
    if let Some(c1) = study.c1_bar {
        report.scalar("C1_bar", c1);
        report.scalar("boundary_limit", ex.boundary_limit());
        report.push(Certificate::flag("growth-bound", c1.is_finite() && c1 > 0.0, format!("sup b dist^beta / a = {c1:.6e}")));
    }
    report.window = Some(window);
    report.finalize();

    let dim = ex.dim;
    let rows = grid
        .nodes()
        .iter()
        .map(|&r| OracleRow { r, u: ex.u.at(r, dim), a: ex.a.at(r, dim), b: ex.b.at(r, dim), mu_h: ex.mu_h.at(r, dim) })
        .collect();
    Ok((report, rows))
}

/// Evenly spaced `μ` values in `[0, mu_max]`.
pub fn mu_grid(mu_max: f64, steps: usize) -> Vec<f64> {
    if mu_max == 0.0 || steps == 0 {
        return vec![0.0];
    }
    (0..=steps).map(|k| mu_max * k as f64 / steps as f64).collect()
}

#[derive(Serialize)]
struct ThresholdSummary {
    mu_0: f64,
    bracket_width: f64,
    mu_hi: f64,
    evaluations: usize,
    /// Last success of the sweep before its first failure.
    sweep_last_success: Option<f64>,
    step: f64,
    success_prefix: bool,
    consistent: bool,
}

#[derive(Serialize)]
struct SweepRow {
    mu: f64,
    success: bool,
    status: String,
    norm: f64,
    min_u: f64,
    c3: f64,
    energy_related: f64,
    energy: f64,
    error: String,
}

impl From<&SweepPoint> for SweepRow {
    fn from(p: &SweepPoint) -> Self {
        Self {
            mu: p.mu,
            success: p.success,
            status: p.status.map_or_else(|| "error".into(), |s| format!("{s:?}")),
            norm: p.norm,
            min_u: p.min_u,
            c3: p.c3,
            energy_related: p.energy_related,
            energy: p.energy,
            error: p.error.clone().unwrap_or_default(),
        }
    }
}

/// `sweep`: parallel solves on `[0, mu_max]` and a bisected threshold.
pub fn sweep(run: Run<'_>, mu_max: f64, steps: usize) -> Result<i32> {
    let cfg = &run.config;
    if !(mu_max >= 0.0 && mu_max.is_finite()) {
        return Err(Error::Config(format!("mu-max = {mu_max} must be finite and nonnegative")));
    }
    let mut timings = Timings::default();
    timings.start("setup");
    let (spec, grid, comparison) = match cfg.resolve()? {
        Resolved::Pipeline { spec, grid, comparison, .. } => (spec, grid, comparison),
        _ => return Err(Error::Config("sweep needs a whole-space or bounded pipeline family".into())),
    };
    let model = Model::new(spec, grid, comparison, cfg.solver.settings())?;
    let mut manifest = RunManifest::new("sweep", cfg, run.seed, run.threads)?;
    manifest.grid = Some(GridSummary::of(&model.grid));
    manifest.eigen = Some(eigen_summary(&model.lambda_1, &model.lambda_star, Some(model.window.clone())));
    manifest.constants = Some(model.consts.clone());
    timings.start("related-preparation");
    let prep = RelatedPreparation::new(&model)?;

    timings.start("sweep");
    let mus = mu_grid(mu_max, steps);
    let mut art = Artifacts::create(run.out_dir)?;
    let dir = art.dir().to_path_buf();
    let results: Vec<(SweepPoint, Vec<crate::artifacts::OutputEntry>)> = mus
        .par_iter()
        .enumerate()
        .map(|(k, &mu)| -> Result<_> {
            let outcome = solve_main_with(&model, &prep, mu);
            let point = SweepPoint::from_outcome(&model, mu, &outcome);
            let mut local = Artifacts::create(&dir)?;
            if let Ok(sol) = &outcome {
                local.write_json(&format!("points/point_{k:04}.json"), &sol.report)?;
            }
            Ok((point, local.entries()))
        })
        .collect::<Result<_>>()?;
    let mut points = Vec::with_capacity(results.len());
    for (p, e) in results {
        points.push(p);
        art.extend(e);
    }

    timings.start("threshold");
    let prefix = is_success_prefix(&points);
    let step = if mus.len() > 1 { mus[1] - mus[0] } else { 0.0 };
    let last_success = points.iter().take_while(|p| p.success).last().map(|p| p.mu);
    let threshold = if points[0].success { Some(find_mu_threshold(&model, &prep, Some(mu_max))?) } else { None };

    let mut certs = vec![
        Certificate::flag("mu-zero", points[0].success, "certified solution at mu = 0"),
        Certificate::flag("success-prefix", prefix, "all sweep successes precede all failures"),
    ];
    let summary = threshold.as_ref().map(|t| {
        let gap = last_success.map_or(f64::INFINITY, |s| (t.mu_0 - s).abs());
        let consistent = gap <= step.max(t.bracket_width) + 1e-12;
        certs.push(Certificate::at_most(
            "threshold-consistency",
            gap,
            step.max(t.bracket_width),
            "bisected threshold within one sweep step of the last success",
        ));
        ThresholdSummary {
            mu_0: t.mu_0,
            bracket_width: t.bracket_width,
            mu_hi: t.mu_hi,
            evaluations: t.evaluations.len(),
            sweep_last_success: last_success,
            step,
            success_prefix: prefix,
            consistent,
        }
    });

    println!("{:>14} {:>8} {:>14} {:>14} {:>14}", "mu", "success", "norm", "min u", "C3");
    for p in &points {
        println!("{:>14.6e} {:>8} {:>14.6e} {:>14.6e} {:>14.6e}", p.mu, p.success, p.norm, p.min_u, p.c3);
    }
    if let Some(s) = &summary {
        println!("threshold mu_0 = {:.6e} (bracket {:.3e})", s.mu_0, s.bracket_width);
    }
    for c in &certs {
        println!("  [{}] {:<24} {}", if c.passed { "pass" } else { "FAIL" }, c.name, c.detail);
    }

    timings.start("write");
    let rows: Vec<SweepRow> = points.iter().map(SweepRow::from).collect();
    art.write_csv("sweep.csv", &rows)?;
    if let Some(s) = &summary {
        art.write_json("threshold.json", s)?;
    }
    let passed = certs.iter().all(|c| c.passed);
    let code = if passed { EXIT_OK } else { EXIT_CERTIFICATE };
    manifest.status = Some(if passed { Status::Success } else { Status::CertificateFailure });
    manifest.exit_code = code;
    manifest.scalars = prep_scalars(&prep);
    manifest.certificates = certs;
    manifest.outputs = art.entries();
    art.write_json("manifest.json", &manifest)?;
    timings.write(run.out_dir)?;
    Ok(code)
}

fn prep_scalars(prep: &RelatedPreparation) -> BTreeMap<String, f64> {
    let mut r = PipelineReport::new("sweep", 0, 0.0, 0.0);
    prep.record(&mut r);
    r.scalars
}

#[derive(Serialize)]
struct EigenValueReport {
    #[serde(with = "serde_inf")]
    value: f64,
    #[serde(with = "serde_inf")]
    refined: f64,
    /// Second-order extrapolation of the two meshes.
    #[serde(with = "serde_inf")]
    richardson: f64,
    residual: f64,
    iterations: usize,
}

#[derive(Serialize)]
struct EigenReport {
    dim: usize,
    nodes: usize,
    outer_radius: f64,
    lambda_1: EigenValueReport,
    lambda_star: EigenValueReport,
    window: Option<WindowCheck>,
    /// `λ1` on a grid truncated at `2 R∞` minus `λ1` at `R∞`.
    r_infinity_shift: Option<f64>,
}

fn eigen_value(coarse: &EigenResult, fine: &EigenResult) -> EigenValueReport {
    let rich = if coarse.value.is_finite() { richardson(coarse.value, fine.value, 2.0) } else { f64::INFINITY };
    EigenValueReport { value: coarse.value, refined: fine.value, richardson: rich, residual: coarse.residual, iterations: coarse.iterations }
}

fn window_pair(spec: &ProblemSpec, grid: &RadialGrid) -> Result<(EigenResult, EigenResult)> {
    let op = LaplaceOperator::new(grid, BoundaryCondition::natural(grid));
    eigen_window(spec, grid, &op, &spec.a.sample(grid))
}

/// `eigen`: `λ1`, `λ*` and the window margins.
pub fn eigen(run: Run<'_>) -> Result<i32> {
    let cfg = &run.config;
    let mut timings = Timings::default();
    timings.start("eigen");
    let (spec, grid) = match cfg.resolve()? {
        Resolved::Pipeline { spec, grid, .. } => (spec, grid),
        Resolved::FastGrowth { spec, grid } => (spec.problem(cfg.mu.unwrap_or(0.0)), grid),
        Resolved::Oracle { example, grid } => (example.spec(), grid),
    };
    let (l1, ls) = window_pair(&spec, &grid)?;
    let (l1f, lsf) = window_pair(&spec, &grid.refined())?;
    let window = (spec.lambda > 0.0).then(|| check_lambda_window(spec.lambda, l1.value, ls.value));
    let r_infinity_shift = match grid.kind() {
        DomainKind::WholeSpace { r_infinity } => {
            let far = RadialGrid::build(grid.dim(), DomainKind::WholeSpace { r_infinity: 2.0 * r_infinity }, grid.intervals(), grid.stretch())?
                .pinned(&spec.breakpoints())?;
            Some(window_pair(&spec, &far)?.0.value - l1.value)
        }
        _ => None,
    };
    let report = EigenReport {
        dim: grid.dim(),
        nodes: grid.len(),
        outer_radius: grid.outer_radius(),
        lambda_1: eigen_value(&l1, &l1f),
        lambda_star: eigen_value(&ls, &lsf),
        window: window.clone(),
        r_infinity_shift,
    };
    println!("lambda_1    = {:.10} (richardson {:.10})", report.lambda_1.value, report.lambda_1.richardson);
    println!("lambda_star = {:.10} (richardson {:.10})", report.lambda_star.value, report.lambda_star.richardson);
    if let Some(w) = &window {
        println!("lambda = {:.10}: margins {:.6e} / {:.6e}, inside = {}", w.lambda, w.lower_margin, w.upper_margin, w.inside);
    }

    let mut art = Artifacts::create(run.out_dir)?;
    art.write_json("eigen.json", &report)?;
    let mut manifest = RunManifest::new("eigen", cfg, run.seed, run.threads)?;
    manifest.grid = Some(GridSummary::of(&grid));
    manifest.eigen = Some(eigen_summary(&l1, &ls, window));
    manifest.outputs = art.entries();
    art.write_json("manifest.json", &manifest)?;
    timings.write(run.out_dir)?;
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mu_grid_shapes() {
        assert_eq!(mu_grid(0.0, 16), vec![0.0]);
        let g = mu_grid(1.6, 16);
        assert_eq!(g.len(), 17);
        assert_eq!(g[16], 1.6);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code_for(&Error::Config("x".into())), EXIT_CONFIG);
        assert_eq!(exit_code_for(&Error::Window("x".into())), EXIT_HYPOTHESIS);
        assert_eq!(
            exit_code_for(&Error::NonConvergence { stage: "s".into(), detail: "d".into() }),
            EXIT_NONCONVERGENCE
        );
        assert_eq!(exit_code_for_status(Status::CertificateFailure), EXIT_CERTIFICATE);
    }
}
