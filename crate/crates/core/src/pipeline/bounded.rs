use serde::{Deserialize, Serialize};

use super::main_solve::{solve_main_with, MainSolution};
use super::model::{ComparisonProfile, Model};
use super::related::RelatedPreparation;
use super::report::Certificate;
use crate::error::{Error, Result};
use crate::instanton::{check_growth_equivalence, GrowthEquivalence};

/// Green-profile parameters and the collar used for boundary ratios.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundedConfig {
    pub inner_radius: f64,
    pub bump_radius: f64,
    pub mass: f64,
    /// Width of the boundary collar on which `u / dist` is recorded.
    pub collar_width: f64,
}

impl Default for BoundedConfig {
    fn default() -> Self {
        Self { inner_radius: 0.5, bump_radius: 0.5, mass: 1.0, collar_width: 0.25 }
    }
}

impl BoundedConfig {
    pub fn comparison(&self) -> ComparisonProfile {
        ComparisonProfile::Bounded { inner_radius: self.inner_radius, bump_radius: self.bump_radius, mass: self.mass }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundedOutcome {
    pub main: MainSolution,
    pub growth: GrowthEquivalence,
    /// Used multiple of `d̂` below `û_{μ2}` on the bump.
    pub epsilon: f64,
    /// Largest `ε` with `ε d̂ <= ū + μ w` at every node.
    pub epsilon_critical: f64,
    /// `ε min d̂ / w`: harvesting level below which `ε d̂ - μ w > 0`.
    pub mu_7: f64,
    pub collar_min: f64,
    pub collar_max: f64,
}

/// Related and truncated problems on a ball, with the Green-profile comparison.
pub fn solve_bounded(model: &Model, cfg: &BoundedConfig, mu: f64) -> Result<BoundedOutcome> {
    let bd = model
        .bounded_d
        .as_ref()
        .ok_or_else(|| Error::param("solve_bounded needs a model built with the bounded comparison"))?;
    let prep = RelatedPreparation::new(model)?;
    let mut main = solve_main_with(model, &prep, mu)?;
    let tol = model.settings.certificate_tol;
    let big_r = model.grid.outer_radius();
    let r = model.grid.nodes();
    let free: Vec<usize> = model.free_nodes().collect();

    let growth = check_growth_equivalence(&model.grid, &model.coeffs.a, &model.coeffs.b, bd, model.spec.beta);
    let d_hat = &bd.d;

    let on_bump = free.iter().copied().filter(|&i| r[i] <= cfg.bump_radius);
    let bump_min = on_bump.map(|i| prep.u_hat_mu2[i] / d_hat[i]).fold(f64::INFINITY, f64::min);
    let epsilon = 0.5 * bump_min.max(0.0);
    let ubar = &main.related.u;
    let epsilon_critical = free
        .iter()
        .map(|&i| (ubar[i] + mu * prep.w[i]) / d_hat[i])
        .fold(f64::INFINITY, f64::min);
    let mu_7 = epsilon
        * free
            .iter()
            .filter(|&&i| prep.w[i] > 0.0)
            .map(|&i| d_hat[i] / prep.w[i])
            .fold(f64::INFINITY, f64::min);

    let collar: Vec<f64> = free
        .iter()
        .filter(|&&i| r[i] >= big_r - cfg.collar_width)
        .map(|&i| main.u[i] / (big_r - r[i]))
        .collect();
    let collar_min = collar.iter().copied().fold(f64::INFINITY, f64::min);
    let collar_max = collar.iter().copied().fold(0.0, f64::max);

    let rep = &mut main.report;
    rep.variant = "bounded".into();
    rep.scalar("sup_b_dist", growth.sup_dist);
    rep.scalar("sup_b_d", growth.sup_d);
    rep.scalar("d_dist_lower", growth.c_lower);
    rep.scalar("d_dist_upper", growth.c_upper);
    rep.scalar("epsilon_hat", epsilon);
    rep.scalar("epsilon_critical", epsilon_critical);
    rep.scalar("mu_7", mu_7);
    rep.scalar("collar_min", collar_min);
    rep.scalar("collar_max", collar_max);
    rep.push(Certificate::flag(
        "growth-equivalence",
        growth.consistent && growth.sup_dist.is_finite(),
        format!("sup b dist^beta / a = {:.6e}, sup b d^beta / a = {:.6e}", growth.sup_dist, growth.sup_d),
    ));
    rep.push(Certificate::above("green-comparison-scale", epsilon, 0.0, "u_hat(mu_2) / d_hat > 0 on the bump"));
    rep.push(Certificate::at_most(
        "green-comparison",
        epsilon - epsilon_critical,
        tol,
        "eps d_hat <= u_bar + mu w at every node",
    ));
    rep.push(Certificate::above("collar-lower", collar_min, 0.0, "u / dist bounded below on the collar"));
    rep.push(Certificate::flag("collar-upper", collar_max.is_finite(), "u / dist bounded above on the collar"));
    rep.finalize();

    Ok(BoundedOutcome { main, growth, epsilon, epsilon_critical, mu_7, collar_min, collar_max })
}
