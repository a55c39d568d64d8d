use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::nonlinearity::Nonlinearity;
use crate::profile::Profile;

/// Declared zero set of the absorption coefficient `b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ZeroSet {
    Empty,
    MeasureZero,
    ClosedBall { radius: f64 },
}

/// Data of `-Δu = λ a u - b g(u) - μ h`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub dim: usize,
    pub lambda: f64,
    pub mu: f64,
    pub a: Profile,
    pub b: Profile,
    pub h: Profile,
    pub g: Nonlinearity,
    pub beta: f64,
    /// Growth constant in `b <= C1 a d^{-β}`; derived from the data when absent.
    #[serde(default)]
    pub c1: Option<f64>,
    pub q: f64,
    pub s: f64,
    /// Bound in the harvest decay condition; derived when absent.
    #[serde(default)]
    pub c2: Option<f64>,
    pub zero_set: ZeroSet,
}

impl ProblemSpec {
    pub fn validate_parameters(&self) -> Result<()> {
        let n = self.dim as f64;
        if self.dim < 3 {
            return Err(Error::param(format!("dimension must be >= 3, got {}", self.dim)));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::param(format!("beta must be positive, got {}", self.beta)));
        }
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(Error::param(format!("lambda must be positive, got {}", self.lambda)));
        }
        if !(self.q > n / 2.0) {
            return Err(Error::param(format!("q must exceed N/2, got {}", self.q)));
        }
        if !(self.s > n) {
            return Err(Error::param(format!("s must exceed N, got {}", self.s)));
        }
        if let ZeroSet::ClosedBall { radius } = self.zero_set {
            if !(radius > 0.0) {
                return Err(Error::param("zero-set radius must be positive"));
            }
        }
        Ok(())
    }

    /// Radii that must be grid nodes for exact sampling.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out: Vec<f64> = [&self.a, &self.b, &self.h].iter().flat_map(|p| p.breakpoints()).collect();
        if let ZeroSet::ClosedBall { radius } = self.zero_set {
            out.push(radius);
        }
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    pub fn sample(&self, grid: &RadialGrid) -> Result<Coefficients> {
        if grid.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: grid.dim() });
        }
        Ok(Coefficients {
            a: self.a.sample(grid),
            b: self.b.sample(grid),
            h: self.h.sample(grid),
        })
    }
}

/// Nodal samples of `a`, `b`, `h`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub h: Vec<f64>,
}
