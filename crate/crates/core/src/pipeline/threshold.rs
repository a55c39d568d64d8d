use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::main_solve::{solve_main_with, MainSolution};
use super::model::Model;
use super::related::RelatedPreparation;
use super::report::Status;
use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ThresholdResult {
    /// Largest `μ` with a certified solution.
    pub mu_0: f64,
    /// `mu_0 + bracket_width` failed.
    pub bracket_width: f64,
    pub mu_hi: f64,
    pub evaluations: Vec<(f64, bool)>,
}

fn certified(model: &Model, prep: &RelatedPreparation, mu: f64) -> bool {
    solve_main_with(model, prep, mu).is_ok_and(|s| s.succeeded())
}

/// Bisection on `[0, mu_hi]` for the largest `μ` whose full run certifies.
/// `mu_hi` defaults to `μ2` of the related problem.
pub fn find_mu_threshold(model: &Model, prep: &RelatedPreparation, mu_hi: Option<f64>) -> Result<ThresholdResult> {
    let hi0 = mu_hi.unwrap_or(prep.mu_2);
    if !(hi0 >= 0.0 && hi0.is_finite()) {
        return Err(Error::param(format!("mu_hi = {hi0} must be finite and nonnegative")));
    }
    let mut evaluations = Vec::new();
    let ok0 = certified(model, prep, 0.0);
    evaluations.push((0.0, ok0));
    if !ok0 {
        return Err(Error::Certificate {
            name: "threshold".into(),
            detail: "no certified solution at mu = 0".into(),
        });
    }
    let ok_hi = hi0 == 0.0 || certified(model, prep, hi0);
    evaluations.push((hi0, ok_hi));
    if ok_hi {
        return Ok(ThresholdResult { mu_0: hi0, bracket_width: 0.0, mu_hi: hi0, evaluations });
    }
    let (mut lo, mut hi) = (0.0, hi0);
    while hi - lo > model.settings.bisection_rel_tol * hi0 {
        let mid = 0.5 * (lo + hi);
        let ok = certified(model, prep, mid);
        evaluations.push((mid, ok));
        if ok {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(ThresholdResult { mu_0: lo, bracket_width: hi - lo, mu_hi: hi0, evaluations })
}

/// One row of a `μ` sweep.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepPoint {
    pub mu: f64,
    pub success: bool,
    pub status: Option<Status>,
    pub norm: f64,
    pub min_u: f64,
    pub c3: f64,
    pub energy_related: f64,
    pub energy: f64,
    pub error: Option<String>,
}

impl SweepPoint {
    /// Summarizes the outcome of one solve at `mu`.
    pub fn from_outcome(model: &Model, mu: f64, outcome: &Result<MainSolution>) -> Self {
        match outcome {
            Ok(s) => SweepPoint {
                mu,
                success: s.succeeded(),
                status: Some(s.report.status),
                norm: model.op.energy_norm(&s.u),
                min_u: model.min_free(&s.u),
                c3: s.report.get_scalar("C3").unwrap_or(f64::NAN),
                energy_related: s.related.energy,
                energy: s.report.get_scalar("energy").unwrap_or(f64::NAN),
                error: None,
            },
            Err(e) => SweepPoint {
                mu,
                success: false,
                status: None,
                norm: f64::NAN,
                min_u: f64::NAN,
                c3: f64::NAN,
                energy_related: f64::NAN,
                energy: f64::NAN,
                error: Some(e.to_string()),
            },
        }
    }
}

/// Independent solves at each `μ`, run in parallel.
pub fn sweep(model: &Model, prep: &RelatedPreparation, mus: &[f64]) -> Vec<SweepPoint> {
    mus.par_iter()
        .map(|&mu| SweepPoint::from_outcome(model, mu, &solve_main_with(model, prep, mu)))
        .collect()
}

/// Whether all successes precede all failures.
pub fn is_success_prefix(points: &[SweepPoint]) -> bool {
    let first_fail = points.iter().position(|p| !p.success).unwrap_or(points.len());
    points[first_fail..].iter().all(|p| !p.success)
}
