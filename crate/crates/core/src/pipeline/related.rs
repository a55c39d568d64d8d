use serde::{Deserialize, Serialize};

use super::model::Model;
use super::report::{Certificate, PipelineReport};
use crate::error::{Error, Result};
use crate::minimize::{MinimizeOutcome, TraceRow};
use crate::obstacle::ObstacleSet;

/// One point of the coarse `μ` scan of the stage-1 problem.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ScanPoint {
    pub mu: f64,
    pub energy: f64,
    pub max: f64,
    pub norm: f64,
    pub converged: bool,
}

/// Band of `||û_μ||` over a family of stage-1 minimizers.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NormWindow {
    pub norms: Vec<f64>,
    pub min: f64,
    pub max: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
}

impl NormWindow {
    /// `lower_ok` needs every norm above `floor`; `upper_ok` needs all finite.
    pub fn from_norms(norms: Vec<f64>, floor: f64) -> Self {
        let min = norms.iter().copied().fold(f64::INFINITY, f64::min);
        let max = norms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lower_ok = !norms.is_empty() && min > floor;
        let upper_ok = !norms.is_empty() && max.is_finite();
        Self { norms, min, max, lower_ok, upper_ok }
    }
}

/// `μ`-independent data of the related problem: stage-1 minimizers, the
/// positivity point and the harmonic comparison.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RelatedPreparation {
    pub u_hat_zero: Vec<f64>,
    pub energy_zero: f64,
    pub c5: f64,
    /// `C5 / ∫ h û_0`, below which negativity `I_μ ≤ -C5` is automatic.
    pub mu_natural: f64,
    pub mu_1: f64,
    pub mu_2: f64,
    pub mu_2_bracket: f64,
    pub scan: Vec<ScanPoint>,
    pub u_hat_mu2: Vec<f64>,
    pub x0_index: usize,
    pub x0_radius: f64,
    pub rho: f64,
    pub epsilon: f64,
    /// `-Δw = h`.
    pub w: Vec<f64>,
    pub c_ao: f64,
    pub norm_window: NormWindow,
}

fn stage_one_raw(model: &Model, mu: f64, start: &[f64]) -> Result<MinimizeOutcome> {
    let f = model.comparison_functional(mu);
    model.minimize(&f, start, &ObstacleSet::upper_only(model.ld.clone()))
}

/// Stage-1 minimizer over `{u <= ℓd}` started from `start`.
pub fn stage_one(model: &Model, mu: f64, start: &[f64]) -> Result<MinimizeOutcome> {
    let out = stage_one_raw(model, mu, start)?;
    if !out.converged {
        return Err(Error::stalled(
            "stage-1 minimization",
            format!("mu = {mu}: projected gradient {:.3e} after {} iterations", out.projected_gradient, out.iterations),
        ));
    }
    Ok(out)
}

fn max_value(u: &[f64]) -> f64 {
    u.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

impl RelatedPreparation {
    pub fn new(model: &Model) -> Result<Self> {
        let s = &model.settings;
        let zero = stage_one(model, 0.0, &model.ld)?;
        let energy_zero = zero.energy.total;
        if energy_zero >= 0.0 || max_value(&zero.u) <= 0.0 {
            return Err(Error::Certificate {
                name: "stage-1 negativity".into(),
                detail: format!("minimum energy {energy_zero:.3e} at mu = 0 is not negative; lambda too small"),
            });
        }
        let c5 = 0.5 * energy_zero.abs();
        let h_mass = model.grid.inner(&model.coeffs.h, &zero.u);
        let mu_natural = if h_mass > 0.0 { c5 / h_mass } else { 1.0 };

        let negative = |p: &ScanPoint| p.energy <= -c5;
        let positive = |p: &ScanPoint| negative(p) && p.max > 0.0;
        // continuation from û_0 keeps small-μ minimizers on the branch through û_0;
        // scan points only need the sign of the maximum and the energy level,
        // so iterates that stop short of the tolerance are still usable
        let eval = |mu: f64| -> Result<(ScanPoint, Vec<f64>)> {
            let out = stage_one_raw(model, mu, &zero.u)?;
            let p = ScanPoint {
                mu,
                energy: out.energy.total,
                max: max_value(&out.u),
                norm: model.op.energy_norm(&out.u),
                converged: out.converged,
            };
            Ok((p, out.u))
        };

        let top = 2.0 * mu_natural;
        let n = s.mu_scan_points.max(2);
        let mut scan = Vec::with_capacity(n);
        for k in 0..n {
            scan.push(eval(top * k as f64 / (n - 1) as f64)?.0);
        }
        let mut hi = top;
        while scan.last().is_some_and(positive) && hi < 1e12 * mu_natural {
            hi *= 2.0;
            scan.push(eval(hi)?.0);
        }

        let bisect = |pred: &dyn Fn(&ScanPoint) -> bool| -> Result<(f64, f64)> {
            let first_false = scan.iter().position(|p| !pred(p));
            let Some(k) = first_false else {
                return Ok((scan.last().unwrap().mu, 0.0));
            };
            if k == 0 {
                return Ok((0.0, 0.0));
            }
            let (mut lo, mut hi) = (scan[k - 1].mu, scan[k].mu);
            while hi - lo > s.bisection_rel_tol * hi {
                let mid = 0.5 * (lo + hi);
                if pred(&eval(mid)?.0) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Ok((lo, hi - lo))
        };
        let (mu_1, _) = bisect(&negative)?;
        let (mu_2, mu_2_bracket) = bisect(&positive)?;

        let u_hat_mu2 = stage_one(model, mu_2, &zero.u)?.u;
        let r = model.grid.nodes();
        let x0_index = (0..r.len()).fold(0, |b, i| if u_hat_mu2[i] > u_hat_mu2[b] { i } else { b });
        let x0_radius = r[x0_index];
        // the radial shell |r - r_x0| <= ρ contains B_ρ(x0); ρ is the last node
        // distance before the first nonpositive node
        let rho_cap = 0.25 * model.grid.outer_radius();
        let bad = (0..r.len())
            .filter(|&i| u_hat_mu2[i] <= 0.0 && !model.op.fixed()[i])
            .map(|i| (r[i] - x0_radius).abs())
            .fold(f64::INFINITY, f64::min);
        let rho = (0..r.len())
            .map(|i| (r[i] - x0_radius).abs())
            .filter(|&t| t < bad && t <= rho_cap)
            .fold(0.0, f64::max);
        let shell_min = (0..r.len())
            .filter(|&i| (r[i] - x0_radius).abs() <= rho)
            .map(|i| u_hat_mu2[i])
            .fold(f64::INFINITY, f64::min);
        let n2 = model.grid.dim() as i32 - 2;
        let epsilon = 0.5 * rho.powi(n2) * shell_min.max(0.0);

        let w = model.op.solve_poisson(&model.coeffs.h)?;
        let half = 0.5 * model.grid.outer_radius();
        let c_ao = if model.is_whole_space() {
            r.iter().zip(&w).filter(|(ri, _)| **ri >= half).map(|(ri, v)| ri.powi(n2) * v).fold(0.0, f64::max)
        } else {
            w.iter().copied().fold(0.0, f64::max)
        };

        let mut norms = Vec::with_capacity(10);
        for k in 0..10 {
            norms.push(model.op.energy_norm(&stage_one(model, mu_1 * k as f64 / 9.0, &zero.u)?.u));
        }
        let norm_window = NormWindow::from_norms(norms, 1e-8);

        Ok(Self {
            u_hat_zero: zero.u,
            energy_zero,
            c5,
            mu_natural,
            mu_1,
            mu_2,
            mu_2_bracket,
            scan,
            u_hat_mu2,
            x0_index,
            x0_radius,
            rho,
            epsilon,
            w,
            c_ao,
            norm_window,
        })
    }

    /// `ε / |x - x0|^{N-2}` minimized over the points of the sphere of radius `r`
    /// outside `B_ρ(x0)`; `None` when the whole sphere lies inside.
    pub fn comparison_at(&self, r: f64, dim: usize) -> Option<f64> {
        if r + self.x0_radius < self.rho {
            return None;
        }
        let dist = self.rho.max((r - self.x0_radius).abs());
        Some(self.epsilon / dist.powi(dim as i32 - 2))
    }

    pub fn record(&self, report: &mut PipelineReport) {
        report.scalar("C5", self.c5);
        report.scalar("mu_natural", self.mu_natural);
        report.scalar("mu_1", self.mu_1);
        report.scalar("mu_2", self.mu_2);
        report.scalar("mu_2_bracket", self.mu_2_bracket);
        report.scalar("x0_radius", self.x0_radius);
        report.scalar("rho", self.rho);
        report.scalar("epsilon", self.epsilon);
        report.scalar("C_AO", self.c_ao);
        report.scalar("norm_min", self.norm_window.min);
        report.scalar("norm_max", self.norm_window.max);
    }
}

/// Stage-2 minimizer `ū_μ` over `{û_{μ2} <= u <= ℓd}` and its certificates.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RelatedSolution {
    pub mu: f64,
    pub u: Vec<f64>,
    pub energy: f64,
    pub iterations: usize,
    pub converged: bool,
    pub min_interior: f64,
    /// `min r^{N-2} ū` on the far region; whole space only.
    pub c3: Option<f64>,
    pub decay_radius: Option<f64>,
    pub certificates: Vec<Certificate>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<TraceRow>,
}

/// Radius beyond which the decay certificate is evaluated.
pub fn decay_radius(model: &Model, prep: &RelatedPreparation) -> f64 {
    2.0 * model.harvest_support_radius().max(prep.x0_radius)
}

/// `min r^{N-2} u` over nodes with `r >= r_min`.
pub fn decay_constant(model: &Model, u: &[f64], r_min: f64) -> f64 {
    let n2 = model.grid.dim() as i32 - 2;
    model
        .grid
        .nodes()
        .iter()
        .zip(u)
        .filter(|(r, _)| **r >= r_min)
        .map(|(r, v)| r.powi(n2) * v)
        .fold(f64::INFINITY, f64::min)
}

pub fn solve_related(model: &Model, prep: &RelatedPreparation, mu: f64) -> Result<RelatedSolution> {
    if !(0.0..=prep.mu_2).contains(&mu) {
        return Err(Error::param(format!("mu = {mu} outside [0, mu_2 = {}]", prep.mu_2)));
    }
    let tol = model.settings.certificate_tol;
    let f = model.comparison_functional(mu);
    let obstacle = ObstacleSet::ordered(prep.u_hat_mu2.clone(), model.ld.clone())?;
    let out = model.minimize(&f, &model.ld, &obstacle)?;
    let u = out.u;
    let energy = out.energy.total;
    let mut certs = vec![
        Certificate::flag(
            "related-converged",
            out.converged,
            format!("projected gradient {:.3e} after {} iterations", out.projected_gradient, out.iterations),
        ),
        Certificate::at_most("related-energy", energy, -0.5 * prep.c5, "I_mu(u_bar) <= -C5/2"),
        Certificate::flag("related-ordering", obstacle.contains(&u, tol), "u_hat(mu_2) <= u_bar <= l d"),
    ];

    // the ε / |x - x0|^{N-2} comparison is a whole-space device; on a ball the
    // Green profile takes its place
    if model.is_whole_space() {
        let dim = model.grid.dim();
        let mut excess = f64::NEG_INFINITY;
        for (i, &r) in model.grid.nodes().iter().enumerate() {
            if let Some(c) = prep.comparison_at(r, dim) {
                excess = excess.max(c - u[i] - mu * prep.w[i]);
            }
        }
        certs.push(Certificate::at_most(
            "related-comparison",
            excess,
            tol,
            "eps/|x-x0|^(N-2) <= u_bar + mu w outside B_rho(x0)",
        ));
    }
    let min_interior = model.min_free(&u);
    certs.push(Certificate::above("related-positivity", min_interior, 0.0, "u_bar > 0 at interior nodes"));

    let (c3, decay_r) = if model.is_whole_space() {
        let r0 = decay_radius(model, prep);
        let c3 = decay_constant(model, &u, r0);
        certs.push(Certificate::above("related-decay", c3, 0.0, format!("min r^(N-2) u_bar over r >= {r0:.4}")));
        (Some(c3), Some(r0))
    } else {
        (None, None)
    };

    Ok(RelatedSolution {
        mu,
        u,
        energy,
        iterations: out.iterations,
        converged: out.converged,
        min_interior,
        c3,
        decay_radius: decay_r,
        certificates: certs,
        trace: out.trace,
    })
}

impl RelatedSolution {
    /// Stand-alone report of the related problem.
    pub fn report(&self, model: &Model, prep: &RelatedPreparation) -> PipelineReport {
        let mut report = PipelineReport::new("related", model.grid.dim(), model.spec.lambda, self.mu);
        report.window = Some(model.window.clone());
        report.hypotheses = Some(model.hypotheses.clone());
        report.constants = Some(model.consts.clone());
        report.scalar("lambda_1", model.lambda_1.value);
        report.scalar("lambda_star", model.lambda_star.value);
        prep.record(&mut report);
        report.scalar("related_energy", self.energy);
        if let Some(c3) = self.c3 {
            report.scalar("C3", c3);
        }
        for c in &self.certificates {
            report.push(c.clone());
        }
        if !self.converged {
            report.status = super::report::Status::NonConvergence;
        }
        report.finalize();
        report
    }
}
