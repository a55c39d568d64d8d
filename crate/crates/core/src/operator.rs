//! Finite-volume radial Laplacian.
//!
//! Stiffness `K` is symmetric tridiagonal with face conductances
//! `|S^{N-1}| r_f^{N-1} / h`; the nodal Laplacian is `(K u)_i / V_i`.
//! The decay-matched outer condition adds the exterior harmonic energy
//! `(N-2) |S^{N-1}| R^{N-2}` to the last diagonal entry.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{unit_sphere_area, RadialGrid};
use crate::tridiag;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryCondition {
    DirichletZero,
    /// Robin condition matching `u ~ r^{2-N}` beyond the truncation radius.
    DecayMatched,
}

impl BoundaryCondition {
    /// Natural outer condition for the domain kind.
    pub fn natural(grid: &RadialGrid) -> Self {
        if grid.kind().is_whole_space() {
            BoundaryCondition::DecayMatched
        } else {
            BoundaryCondition::DirichletZero
        }
    }
}

/// Stiffness matrix, cell volumes and the mask of Dirichlet nodes.
#[derive(Clone, Debug)]
pub struct LaplaceOperator {
    diag: Vec<f64>,
    off: Vec<f64>,
    volumes: Vec<f64>,
    fixed: Vec<bool>,
    bc: BoundaryCondition,
}

impl LaplaceOperator {
    pub fn new(grid: &RadialGrid, bc: BoundaryCondition) -> Self {
        let n = grid.len();
        let r = grid.nodes();
        let dim = grid.dim();
        let sigma = unit_sphere_area(dim);
        let mut diag = vec![0.0; n];
        let mut off = vec![0.0; n - 1];
        for i in 0..n - 1 {
            let h = r[i + 1] - r[i];
            let f = 0.5 * (r[i] + r[i + 1]);
            let c = sigma * f.powi(dim as i32 - 1) / h;
            off[i] = -c;
            diag[i] += c;
            diag[i + 1] += c;
        }
        let mut fixed = vec![false; n];
        if grid.kind().inner_radius() > 0.0 {
            fixed[0] = true;
        }
        match bc {
            BoundaryCondition::DirichletZero => fixed[n - 1] = true,
            BoundaryCondition::DecayMatched => {
                let big_r = r[n - 1];
                diag[n - 1] += (dim as f64 - 2.0) * sigma * big_r.powi(dim as i32 - 2);
            }
        }
        Self {
            diag,
            off,
            volumes: grid.weights().to_vec(),
            fixed,
            bc,
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn bc(&self) -> BoundaryCondition {
        self.bc
    }

    pub fn volumes(&self) -> &[f64] {
        &self.volumes
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn off(&self) -> &[f64] {
        &self.off
    }

    /// Nodes held at zero by a Dirichlet condition.
    pub fn fixed(&self) -> &[bool] {
        &self.fixed
    }

    /// Zeroes the Dirichlet nodes of `u`.
    pub fn enforce(&self, u: &mut [f64]) {
        for (v, &f) in u.iter_mut().zip(&self.fixed) {
            if f {
                *v = 0.0;
            }
        }
    }

    /// `K u`.
    pub fn stiffness_apply(&self, u: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut out = vec![0.0; n];
        for i in 0..n {
            let mut s = self.diag[i] * u[i];
            if i > 0 {
                s += self.off[i - 1] * u[i - 1];
            }
            if i + 1 < n {
                s += self.off[i] * u[i + 1];
            }
            out[i] = s;
        }
        out
    }

    /// Nodal `-Δu`; zero at Dirichlet nodes.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let mut ku = self.stiffness_apply(u);
        for ((k, &fixed), &vol) in ku.iter_mut().zip(&self.fixed).zip(&self.volumes) {
            *k = if fixed { 0.0 } else { *k / vol };
        }
        ku
    }

    /// `u^T K u`, the squared energy norm.
    pub fn energy_sq(&self, u: &[f64]) -> f64 {
        let ku = self.stiffness_apply(u);
        ku.iter().zip(u).map(|(a, b)| a * b).sum()
    }

    pub fn energy_norm(&self, u: &[f64]) -> f64 {
        self.energy_sq(u).max(0.0).sqrt()
    }

    /// Solves `(K + diag(shift)) x = rhs` on nodes that are neither Dirichlet nor `excluded`.
    /// Remaining entries of `x` are zero.
    pub fn solve_masked(&self, rhs: &[f64], shift: Option<&[f64]>, excluded: Option<&[bool]>) -> Result<Vec<f64>> {
        let n = self.len();
        let skip = |i: usize| self.fixed[i] || excluded.is_some_and(|e| e[i]);
        let mut d = self.diag.clone();
        let mut o = self.off.clone();
        let mut b = rhs.to_vec();
        if let Some(s) = shift {
            for i in 0..n {
                d[i] += s[i];
            }
        }
        for i in 0..n {
            if skip(i) {
                d[i] = 1.0;
                b[i] = 0.0;
                if i > 0 {
                    o[i - 1] = 0.0;
                }
                if i + 1 < n {
                    o[i] = 0.0;
                }
            }
        }
        tridiag::solve_symmetric(&d, &o, &b)
            .ok_or_else(|| Error::stalled("linear solve", "zero pivot in tridiagonal system"))
    }

    /// Solves `K x = rhs` with Dirichlet nodes eliminated.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        self.solve_masked(rhs, None, None)
    }

    /// Dual norm `sqrt(r^T K^{-1} r)` of a nodal functional `r` (already volume-weighted).
    pub fn dual_norm(&self, r: &[f64]) -> Result<f64> {
        let x = self.solve(r)?;
        Ok(x.iter().zip(r).map(|(a, b)| a * b).sum::<f64>().max(0.0).sqrt())
    }

    /// Solution of `-Δw = f` with the operator's boundary condition.
    pub fn solve_poisson(&self, f: &[f64]) -> Result<Vec<f64>> {
        let rhs: Vec<f64> = f.iter().zip(&self.volumes).map(|(a, v)| a * v).collect();
        self.solve(&rhs)
    }

    /// Count of generalized eigenvalues of `K x = θ diag(weight) x` below `shift`
    /// on nodes that are neither Dirichlet nor `excluded`.
    pub fn count_below(&self, weight: &[f64], shift: f64, excluded: Option<&[bool]>) -> usize {
        let n = self.len();
        let skip = |i: usize| self.fixed[i] || excluded.is_some_and(|e| e[i]);
        let idx: Vec<usize> = (0..n).filter(|&i| !skip(i)).collect();
        let d: Vec<f64> = idx.iter().map(|&i| self.diag[i] - shift * weight[i]).collect();
        let o: Vec<f64> = idx
            .windows(2)
            .map(|w| if w[1] == w[0] + 1 { self.off[w[0]] } else { 0.0 })
            .collect();
        tridiag::negative_pivots(&d, &o)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::DomainKind;

    #[test]
    fn quadratic_is_exact_in_the_interior() {
        for dim in [3usize, 4, 5] {
            let g = RadialGrid::build(dim, DomainKind::Ball { radius: 1.0 }, 64, 1.0).unwrap();
            let op = LaplaceOperator::new(&g, BoundaryCondition::DirichletZero);
            let u = g.sample_fn(|r| r * r);
            let lap = op.apply(&u);
            for v in &lap[..g.len() - 1] {
                assert!((v + 2.0 * dim as f64).abs() < 1e-10, "{v}");
            }
        }
    }

    #[test]
    fn quadratic_exact_on_stretched_mesh() {
        let g = RadialGrid::build(3, DomainKind::WholeSpace { r_infinity: 50.0 }, 200, 1.02).unwrap();
        let op = LaplaceOperator::new(&g, BoundaryCondition::DecayMatched);
        let u = g.sample_fn(|r| r * r);
        let lap = op.apply(&u);
        for v in &lap[..g.len() - 1] {
            assert!((v + 6.0).abs() < 1e-9 * 2500.0);
        }
    }

    #[test]
    fn harmonic_function_second_order_on_annulus() {
        let errs: Vec<f64> = [64usize, 128]
            .iter()
            .map(|&m| {
                let g = RadialGrid::build(3, DomainKind::Annulus { inner: 1.0, outer: 2.0 }, m, 1.0).unwrap();
                let op = LaplaceOperator::new(&g, BoundaryCondition::DirichletZero);
                let lap = op.apply(&g.sample_fn(|r| 1.0 / r));
                lap[1..m].iter().fold(0.0f64, |a, v| a.max(v.abs()))
            })
            .collect();
        assert!(errs[0] / errs[1] > 3.8, "{errs:?}");
    }

    #[test]
    fn decay_condition_matches_exterior_energy() {
        let g = RadialGrid::build(3, DomainKind::WholeSpace { r_infinity: 10.0 }, 64, 1.0).unwrap();
        let op = LaplaceOperator::new(&g, BoundaryCondition::DecayMatched);
        let n = g.len();
        let interior = LaplaceOperator::new(&g, BoundaryCondition::DirichletZero).diag()[n - 1];
        // exterior extension of u(R)=1 as R/r carries energy 4π R
        assert!((op.diag()[n - 1] - interior - 4.0 * std::f64::consts::PI * 10.0).abs() < 1e-12);
    }

    #[test]
    fn solve_inverts_stiffness() {
        let g = RadialGrid::build(3, DomainKind::WholeSpace { r_infinity: 20.0 }, 80, 1.03).unwrap();
        let op = LaplaceOperator::new(&g, BoundaryCondition::DecayMatched);
        let u = g.sample_fn(|r| (-r).exp());
        let back = op.solve(&op.stiffness_apply(&u)).unwrap();
        for (a, b) in back.iter().zip(&u) {
            assert!((a - b).abs() < 1e-10);
        }
    }
}
