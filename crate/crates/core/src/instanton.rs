//! Comparison profiles `d`: the Aubin–Talenti instanton on `R^N`, and the
//! Green potential of a bump on a ball.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{unit_ball_volume, RadialGrid};
use crate::operator::{BoundaryCondition, LaplaceOperator};
use crate::profile::{instanton, Profile};

/// Nodal samples of `(1 + r^2)^{-(N-2)/2}`.
pub fn build_instanton(grid: &RadialGrid) -> Vec<f64> {
    let dim = grid.dim();
    grid.sample_fn(|r| instanton(r, dim))
}

/// Potential `d` solving `-Δd = η` on a ball with `d = 0` on the boundary.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundedInstanton {
    pub d: Vec<f64>,
    pub bump_radius: f64,
    pub mass: f64,
    /// `c` in `c dist <= d`.
    pub c_lower: f64,
    /// `C` in `d <= C dist`.
    pub c_upper: f64,
    /// One-sided estimate of `-∂_r d` at the boundary.
    pub hopf_slope: f64,
}

/// Uniform bump of total mass `mass` on `r <= radius`.
pub fn uniform_bump(dim: usize, radius: f64, mass: f64) -> Profile {
    let level = mass / (unit_ball_volume(dim) * radius.powi(dim as i32));
    Profile::piecewise(radius, Profile::constant(level), Profile::constant(0.0))
}

/// Builds `d` on a ball grid centred at the origin.
///
/// `inner_radius` must satisfy `3 r < R`; the bump lives on `r <= bump_radius <= inner_radius`.
pub fn build_d_bounded(grid: &RadialGrid, inner_radius: f64, bump_radius: f64, mass: f64) -> Result<BoundedInstanton> {
    let big_r = match grid.kind() {
        crate::grid::DomainKind::Ball { radius } => *radius,
        _ => return Err(Error::param("bounded instanton requires a ball grid")),
    };
    if !(3.0 * inner_radius < big_r) {
        return Err(Error::param(format!("inner radius {inner_radius} must be below R/3 = {}", big_r / 3.0)));
    }
    if !(bump_radius > 0.0 && bump_radius <= inner_radius && mass > 0.0) {
        return Err(Error::param("bump radius must lie in (0, inner radius] with positive mass"));
    }
    let op = LaplaceOperator::new(grid, BoundaryCondition::DirichletZero);
    let eta = uniform_bump(grid.dim(), bump_radius, mass).sample(grid);
    let d = op.solve_poisson(&eta)?;
    let r = grid.nodes();
    let n = r.len();
    let mut c_lower = f64::INFINITY;
    let mut c_upper = 0.0f64;
    for i in 0..n - 1 {
        let ratio = d[i] / (big_r - r[i]);
        c_lower = c_lower.min(ratio);
        c_upper = c_upper.max(ratio);
    }
    let hopf_slope = d[n - 2] / (big_r - r[n - 2]);
    Ok(BoundedInstanton { d, bump_radius, mass, c_lower, c_upper, hopf_slope })
}

/// Both growth bounds on `b` and their comparison through `c dist <= d <= C dist`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GrowthEquivalence {
    /// `sup b dist^β / a`.
    pub sup_dist: f64,
    /// `sup b d^β / a`.
    pub sup_d: f64,
    pub c_lower: f64,
    pub c_upper: f64,
    /// `sup_d <= C^β sup_dist` and `sup_dist <= sup_d / c^β`.
    pub consistent: bool,
}

impl GrowthEquivalence {
    /// Bound on `b dist^β / a` holds with the given constant.
    pub fn dist_bound_holds(&self, c1_bar: f64) -> bool {
        self.sup_dist <= c1_bar * (1.0 + 1e-12)
    }

    /// Bound on `b d^β / a` holds with the constant converted from `c1_bar`.
    pub fn d_bound_holds(&self, c1_bar: f64, beta: f64) -> bool {
        self.sup_d <= c1_bar * self.c_upper.powf(beta) * (1.0 + 1e-12)
    }
}

/// Computes both suprema over interior nodes of a ball grid.
pub fn check_growth_equivalence(grid: &RadialGrid, a: &[f64], b: &[f64], d: &BoundedInstanton, beta: f64) -> GrowthEquivalence {
    let r = grid.nodes();
    let big_r = grid.outer_radius();
    let mut sup_dist = 0.0f64;
    let mut sup_d = 0.0f64;
    for i in 0..r.len() - 1 {
        if b[i] <= 0.0 {
            continue;
        }
        let (x, y) = if a[i] > 0.0 {
            (b[i] * (big_r - r[i]).powf(beta) / a[i], b[i] * d.d[i].powf(beta) / a[i])
        } else {
            (f64::INFINITY, f64::INFINITY)
        };
        sup_dist = sup_dist.max(x);
        sup_d = sup_d.max(y);
    }
    let tol = 1.0 + 1e-10;
    let consistent = sup_d <= d.c_upper.powf(beta) * sup_dist * tol
        && sup_dist <= sup_d / d.c_lower.powf(beta) * tol
        && (sup_d.is_finite() == sup_dist.is_finite());
    GrowthEquivalence { sup_dist, sup_d, c_lower: d.c_lower, c_upper: d.c_upper, consistent }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::DomainKind;
    use std::f64::consts::PI;

    fn ball(m: usize) -> RadialGrid {
        RadialGrid::build(3, DomainKind::Ball { radius: 1.0 }, m, 1.0).unwrap().pinned(&[0.1]).unwrap()
    }

    #[test]
    fn green_potential_outside_bump() {
        let g = ball(400);
        let d = build_d_bounded(&g, 0.1, 0.1, 1.0).unwrap();
        for (i, &r) in g.nodes().iter().enumerate() {
            if r >= 0.1 {
                let exact = (1.0 / r - 1.0) / (4.0 * PI);
                assert!((d.d[i] - exact).abs() < 1e-4 * exact.max(1e-2), "{r} {} {exact}", d.d[i]);
            }
        }
        assert!(d.c_lower >= 1.0 / (4.0 * PI) * 0.999);
        // d(0)/R = 14/(4π); d/dist still grows inside the bump
        assert!(d.c_upper >= 14.0 / (4.0 * PI) && d.c_upper <= 15.0 / (4.0 * PI));
    }

    #[test]
    fn rejects_wide_inner_radius() {
        let g = ball(64);
        assert!(build_d_bounded(&g, 0.4, 0.1, 1.0).is_err());
    }

    #[test]
    fn equivalence_for_distance_weighted_b() {
        let g = ball(200);
        let d = build_d_bounded(&g, 0.1, 0.1, 1.0).unwrap();
        let a = vec![1.0; g.len()];
        let beta = 2.0;
        let b: Vec<f64> = g.nodes().iter().map(|r| if *r < 1.0 { (1.0 - r).powf(-beta) } else { 0.0 }).collect();
        let eq = check_growth_equivalence(&g, &a, &b, &d, beta);
        assert!(eq.consistent);
        assert!((eq.sup_dist - 1.0).abs() < 1e-12);
        assert!(eq.sup_d >= d.c_lower.powf(beta) * 0.999 && eq.sup_d <= d.c_upper.powf(beta) * 1.001);
    }

    #[test]
    fn spike_breaks_both_bounds() {
        let g = ball(200);
        let d = build_d_bounded(&g, 0.1, 0.1, 1.0).unwrap();
        let a = vec![1.0; g.len()];
        let beta = 2.0;
        let mut b: Vec<f64> = g.nodes().iter().map(|r| if *r < 1.0 { (1.0 - r).powf(-beta) } else { 0.0 }).collect();
        let spike = (d.c_upper / d.c_lower).powf(beta) * 10.0;
        b[100] *= spike;
        let eq = check_growth_equivalence(&g, &a, &b, &d, beta);
        assert!(!eq.dist_bound_holds(1.0));
        assert!(!eq.d_bound_holds(1.0, beta));
        assert!(eq.consistent);
    }
}
