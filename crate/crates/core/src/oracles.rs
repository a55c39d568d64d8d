//! Closed-form solutions and residual-based verification.
//!
//! The appendix family glues a shifted principal eigenfunction of the unit
//! ball to a harmonic exterior, producing an exact positive solution for a
//! λ above the window. A second member lives on the ball of radius 2.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{unit_sphere_area, DomainKind, RadialGrid};
use crate::nonlinearity::Nonlinearity;
use crate::operator::{BoundaryCondition, LaplaceOperator};
use crate::problem::{Coefficients, ProblemSpec, ZeroSet};
use crate::profile::Profile;
use crate::spectral::{principal_eigen, EigenDomain, EigenOptions};

/// Exact solution of the appendix example, with its coefficients.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AppendixExample {
    pub dim: usize,
    pub beta: f64,
    pub mu: f64,
    /// Dirichlet eigenvalue of the unit ball.
    pub lambda_star: f64,
    pub lambda: f64,
    pub kappa: f64,
    /// Whether the exterior lives on `1 < r < 2` instead of `r > 1`.
    pub bounded: bool,
    pub phi: Profile,
    pub a: Profile,
    pub b: Profile,
    /// The full harvest term `μ h`.
    pub mu_h: Profile,
    pub u: Profile,
}

/// Principal Dirichlet eigenpair of the unit ball, `φ(0) = sqrt(λ*)`, and `φ'(1)`.
///
/// Closed form for `N = 3`; tabulated from a fine eigen-solve otherwise.
fn unit_ball_eigenpair(dim: usize) -> Result<(f64, Profile, f64)> {
    if dim == 3 {
        let pi = std::f64::consts::PI;
        return Ok((pi * pi, Profile::SinOverR { frequency: pi }, -pi));
    }
    let grid = RadialGrid::build(dim, DomainKind::Ball { radius: 1.0 }, 4000, 1.0)?;
    let op = LaplaceOperator::new(&grid, BoundaryCondition::DirichletZero);
    let fine = principal_eigen(&op, &grid, &vec![1.0; grid.len()], EigenDomain::Full, EigenOptions::default())?;
    let coarse_grid = RadialGrid::build(dim, DomainKind::Ball { radius: 1.0 }, 2000, 1.0)?;
    let coarse_op = LaplaceOperator::new(&coarse_grid, BoundaryCondition::DirichletZero);
    let coarse = principal_eigen(&coarse_op, &coarse_grid, &vec![1.0; coarse_grid.len()], EigenDomain::Full, EigenOptions::default())?;
    let lambda_star = crate::spectral::richardson(coarse.value, fine.value, 2.0);
    let phi = fine.eigenfunction.expect("finite eigenvalue has an eigenfunction");
    let scale = lambda_star.sqrt() / phi.values[0];
    let values: Vec<f64> = phi.values.iter().map(|v| v * scale).collect();
    let r = grid.nodes();
    let m = r.len() - 1;
    let h = r[m] - r[m - 1];
    let slope = (3.0 * values[m] - 4.0 * values[m - 1] + values[m - 2]) / (2.0 * h);
    Ok((lambda_star, Profile::Tabulated { radii: r.to_vec(), values }, slope))
}

impl AppendixExample {
    /// The `R^N` member: exterior `u = κ r^{2-N}`.
    pub fn whole_space(dim: usize, beta: f64, mu: f64) -> Result<Self> {
        Self::build(dim, beta, mu, false)
    }

    /// The ball-of-radius-2 member: exterior `u = κ (r^{2-N} - 2^{2-N})`.
    pub fn ball_of_radius_two(dim: usize, beta: f64, mu: f64) -> Result<Self> {
        Self::build(dim, beta, mu, true)
    }

    fn build(dim: usize, beta: f64, mu: f64, bounded: bool) -> Result<Self> {
        if dim < 3 {
            return Err(Error::param("dimension must be >= 3"));
        }
        if !(beta > 0.0 && mu > 0.0) {
            return Err(Error::param("appendix example needs beta > 0 and mu > 0"));
        }
        let (lambda_star, phi, slope) = unit_ball_eigenpair(dim)?;
        let n2 = dim as f64 - 2.0;
        // C^1 gluing at r = 1: φ'(1) = -(N-2) κ
        let kappa = -slope / n2;
        let lambda = lambda_star + mu;
        let shift = if bounded { 2f64.powf(-n2) } else { 0.0 };
        let harmonic = Profile::Sum {
            terms: vec![Profile::PowerLaw { exponent: -n2 }, Profile::constant(-shift)],
        };
        let inner_level = kappa * (1.0 - shift);
        let a = Profile::piecewise(1.0, Profile::constant(1.0), harmonic.clone().pow(beta));
        let b = Profile::piecewise(1.0, Profile::constant(0.0), Profile::constant(lambda / kappa.powf(beta)));
        let mu_h = Profile::piecewise(
            1.0,
            Profile::Sum { terms: vec![phi.clone().scaled(mu), Profile::constant(lambda * inner_level)] },
            Profile::constant(0.0),
        );
        let u = Profile::piecewise(
            1.0,
            Profile::Sum { terms: vec![phi.clone(), Profile::constant(inner_level)] },
            harmonic.scaled(kappa),
        );
        Ok(Self { dim, beta, mu, lambda_star, lambda, kappa, bounded, phi, a, b, mu_h, u })
    }

    pub fn domain(&self, r_infinity: f64) -> DomainKind {
        if self.bounded {
            DomainKind::Ball { radius: 2.0 }
        } else {
            DomainKind::WholeSpace { r_infinity }
        }
    }

    /// As a problem specification with `h = μh / μ`.
    pub fn spec(&self) -> ProblemSpec {
        ProblemSpec {
            dim: self.dim,
            lambda: self.lambda,
            mu: self.mu,
            a: self.a.clone(),
            b: self.b.clone(),
            h: self.mu_h.clone().scaled(1.0 / self.mu),
            g: Nonlinearity::power(1.0 + self.beta),
            beta: self.beta,
            c1: None,
            q: self.dim as f64,
            s: 2.0 * self.dim as f64,
            c2: None,
            zero_set: ZeroSet::ClosedBall { radius: 1.0 },
        }
    }

    /// `[(r^{2-N} - 2^{2-N}) / (2 - r)]^β` at `r`, whose limit at 2 certifies the distance bound.
    pub fn boundary_ratio(&self, r: f64) -> f64 {
        let n2 = self.dim as f64 - 2.0;
        ((r.powf(-n2) - 2f64.powf(-n2)) / (2.0 - r)).powf(self.beta)
    }

    /// Exact value of that limit, `((N-2) 2^{1-N})^β`.
    pub fn boundary_limit(&self) -> f64 {
        let n = self.dim as f64;
        ((n - 2.0) * 2f64.powf(1.0 - n)).powf(self.beta)
    }
}

/// Residual measures of a candidate solution on a grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerificationReport {
    /// `sqrt(Rᵀ K⁻¹ R)` of the weak residual `R = K u - V f(u)`.
    pub dual_residual: f64,
    /// Dual residual over the energy norm of `u`.
    pub relative_dual: f64,
    /// Weighted `L^2` norm of `-Δu - f(u)` over that of the source terms.
    pub relative_strong: f64,
    pub energy_norm: f64,
    pub min_interior: f64,
    /// `λ∫au² - ||u||²`; nonnegative for every solution.
    pub rayleigh_slack: f64,
    /// `min r^{N-2} u` over the outer half of a whole-space grid.
    pub decay_lower: Option<f64>,
}

/// Nodal source `λ a u - b g(u) - μ h`.
pub fn source(spec: &ProblemSpec, coeffs: &Coefficients, u: &[f64]) -> Vec<f64> {
    (0..u.len())
        .map(|i| spec.lambda * coeffs.a[i] * u[i] - coeffs.b[i] * spec.g.eval(u[i]) - spec.mu * coeffs.h[i])
        .collect()
}

/// Residual report for `u` against `-Δu = λ a u - b g(u) - μ h`.
pub fn verify_solution(u: &[f64], spec: &ProblemSpec, coeffs: &Coefficients, grid: &RadialGrid, op: &LaplaceOperator) -> Result<VerificationReport> {
    if u.len() != grid.len() {
        return Err(Error::DimensionMismatch { expected: grid.len(), found: u.len() });
    }
    let f = source(spec, coeffs, u);
    let ku = op.stiffness_apply(u);
    let vol = grid.weights();
    let fixed = op.fixed();
    let mut weak = vec![0.0; u.len()];
    let (mut num, mut den) = (0.0, 0.0);
    let mut min_interior = f64::INFINITY;
    for i in 0..u.len() {
        if fixed[i] {
            continue;
        }
        weak[i] = ku[i] - vol[i] * f[i];
        num += weak[i] * weak[i] / vol[i];
        let s = spec.lambda * coeffs.a[i] * u[i];
        let t = coeffs.b[i] * spec.g.eval(u[i]);
        let m = spec.mu * coeffs.h[i];
        den += vol[i] * (s.abs() + t.abs() + m.abs()).powi(2);
        min_interior = min_interior.min(u[i]);
    }
    let dual_residual = op.dual_norm(&weak)?;
    let energy_norm = op.energy_norm(u);
    let decay_lower = grid.kind().is_whole_space().then(|| {
        let half = grid.outer_radius() / 2.0;
        let n2 = grid.dim() as i32 - 2;
        grid.nodes()
            .iter()
            .zip(u)
            .filter(|(r, _)| **r >= half)
            .map(|(r, v)| r.powi(n2) * v)
            .fold(f64::INFINITY, f64::min)
    });
    Ok(VerificationReport {
        dual_residual,
        relative_dual: dual_residual / energy_norm.max(f64::MIN_POSITIVE),
        relative_strong: (num / den.max(f64::MIN_POSITIVE)).sqrt(),
        energy_norm,
        min_interior,
        rayleigh_slack: crate::spectral::rayleigh_slack(op, &coeffs.a, spec.lambda, u),
        decay_lower,
    })
}

/// Observed convergence order from errors on successive 2x refinements.
pub fn observed_order(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}

/// Residuals of the exact appendix solution on a grid and its 2x refinement.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OracleStudy {
    pub nodes: usize,
    pub coarse: VerificationReport,
    pub fine: VerificationReport,
    /// Observed order of the relative dual residual.
    pub order: f64,
    /// `sup b dist^β / a` over the exterior shell; `None` on whole space.
    pub c1_bar: Option<f64>,
}

impl OracleStudy {
    /// Residual of the exact solution on the coarse grid.
    pub fn residual(&self) -> f64 {
        self.coarse.relative_dual
    }
}

fn appendix_residual(ex: &AppendixExample, grid: &RadialGrid) -> Result<VerificationReport> {
    let spec = ex.spec();
    let op = LaplaceOperator::new(grid, BoundaryCondition::natural(grid));
    let coeffs = spec.sample(grid)?;
    verify_solution(&ex.u.sample(grid), &spec, &coeffs, grid, &op)
}

/// Verifies the exact solution of `ex` on `grid` and on `grid.refined()`.
pub fn study_appendix(ex: &AppendixExample, grid: &RadialGrid) -> Result<OracleStudy> {
    if grid.dim() != ex.dim {
        return Err(Error::DimensionMismatch { expected: ex.dim, found: grid.dim() });
    }
    let coarse = appendix_residual(ex, grid)?;
    let fine = appendix_residual(ex, &grid.refined())?;
    let order = observed_order(coarse.relative_dual, fine.relative_dual);
    let c1_bar = ex.bounded.then(|| {
        let outer = grid.outer_radius();
        grid.nodes()
            .iter()
            .filter(|&&r| r > 1.0 && r < outer)
            .map(|&r| ex.b.at(r, ex.dim) * (outer - r).powf(ex.beta) / ex.a.at(r, ex.dim))
            .fold(0.0, f64::max)
    });
    Ok(OracleStudy { nodes: grid.len(), coarse, fine, order, c1_bar })
}

/// Potential `w` with `-Δw = h` on a whole-space grid, compared with the exterior field of the total mass.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PotentialDecay {
    pub w: Vec<f64>,
    pub mass: f64,
    /// `sup r^{N-2} w` over the outer half of the grid.
    pub c_ao: f64,
    /// Largest relative deviation from `mass / ((N-2)|S^{N-1}| r^{N-2})` on `[r_min, R/2]`.
    pub max_relative_deviation: f64,
}

pub fn verify_potential_decay(h: &[f64], grid: &RadialGrid, r_min: f64) -> Result<PotentialDecay> {
    if !grid.kind().is_whole_space() {
        return Err(Error::param("potential decay needs a whole-space grid"));
    }
    let op = LaplaceOperator::new(grid, BoundaryCondition::DecayMatched);
    let w = op.solve_poisson(h)?;
    let mass = grid.integrate(h);
    let n2 = grid.dim() as i32 - 2;
    let coef = mass / ((grid.dim() as f64 - 2.0) * unit_sphere_area(grid.dim()));
    let half = grid.outer_radius() / 2.0;
    let mut c_ao = 0.0f64;
    let mut dev = 0.0f64;
    for (r, v) in grid.nodes().iter().zip(&w) {
        if *r >= half {
            c_ao = c_ao.max(r.powi(n2) * v);
        }
        if *r >= r_min && *r <= half {
            let exact = coef / r.powi(n2);
            dev = dev.max((v - exact).abs() / exact);
        }
    }
    Ok(PotentialDecay { w, mass, c_ao, max_relative_deviation: dev })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Side;
    use crate::instanton::uniform_bump;

    #[test]
    fn appendix_is_c1_at_the_gluing_radius() {
        for bounded in [false, true] {
            let ex = AppendixExample::build(3, 3.0, 0.1, bounded).unwrap();
            let (l, r) = (ex.u.eval(1.0, Side::Left, 3), ex.u.eval(1.0, Side::Right, 3));
            assert!((l - r).abs() < 1e-12);
            let h = 1e-6;
            let dl = (ex.u.eval(1.0, Side::Left, 3) - ex.u.eval(1.0 - h, Side::Left, 3)) / h;
            let dr = (ex.u.eval(1.0 + h, Side::Right, 3) - ex.u.eval(1.0, Side::Right, 3)) / h;
            assert!((dl - dr).abs() < 1e-4);
        }
    }

    #[test]
    fn appendix_pointwise_identities() {
        let ex = AppendixExample::whole_space(3, 3.0, 0.1).unwrap();
        let lap = |r: f64, side: Side| {
            let hh = 1e-4;
            let f = |x: f64| ex.u.eval(x, side, 3);
            let d2 = (f(r + hh) - 2.0 * f(r) + f(r - hh)) / (hh * hh);
            let d1 = (f(r + hh) - f(r - hh)) / (2.0 * hh);
            -(d2 + 2.0 / r * d1)
        };
        for &(r, side) in &[(0.5, Side::Left), (0.9, Side::Left), (1.5, Side::Right), (7.0, Side::Right)] {
            let u = ex.u.eval(r, side, 3);
            let rhs = ex.lambda * ex.a.eval(r, side, 3) * u - ex.b.eval(r, side, 3) * u.powf(1.0 + ex.beta) - ex.mu_h.eval(r, side, 3);
            assert!((lap(r, side) - rhs).abs() < 1e-5 * rhs.abs().max(1.0), "{r}");
        }
    }

    #[test]
    fn tabulated_eigenpair_in_four_dimensions() {
        let ex = AppendixExample::whole_space(4, 3.0, 0.1).unwrap();
        // j_{1,1}^2 for N = 4
        assert!((ex.lambda_star - 14.681_970_642_123_9).abs() < 1e-5);
        assert!(ex.kappa > 0.0);
    }

    #[test]
    fn boundary_ratio_limit() {
        let ex = AppendixExample::ball_of_radius_two(3, 3.0, 0.1).unwrap();
        assert!((ex.boundary_ratio(2.0 - 1e-7) - ex.boundary_limit()).abs() < 1e-6);
        assert!((ex.boundary_limit() - 1.0 / 64.0).abs() < 1e-15);
    }

    #[test]
    fn exact_solution_residual_is_second_order() {
        let ex = AppendixExample::ball_of_radius_two(3, 3.0, 0.1).unwrap();
        let g = RadialGrid::build(3, ex.domain(0.0), 200, 1.0).unwrap().pinned(&[1.0]).unwrap();
        let s = study_appendix(&ex, &g).unwrap();
        assert!(s.order > 1.9, "{}", s.order);
        let c1 = s.c1_bar.unwrap();
        assert!(c1.is_finite() && c1 > 0.0);
        assert!(c1 <= ex.b.at(1.5, 3) / ex.boundary_limit() * 1.0001);
    }

    #[test]
    fn potential_of_unit_bump() {
        let g = RadialGrid::build(3, DomainKind::WholeSpace { r_infinity: 100.0 }, 3000, 1.0015).unwrap().pinned(&[1.0]).unwrap();
        let h = uniform_bump(3, 1.0, 1.0).sample(&g);
        let p = verify_potential_decay(&h, &g, 2.0).unwrap();
        assert!((p.mass - 1.0).abs() < 1e-12);
        assert!(p.max_relative_deviation < 1e-6, "{}", p.max_relative_deviation);
        assert!((p.c_ao - 1.0 / (4.0 * std::f64::consts::PI)).abs() < 1e-6);
    }
}
