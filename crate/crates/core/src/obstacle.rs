use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObstacleKind {
    /// `{u <= ℓd}`.
    UpperOnly,
    /// `{û <= u <= ℓd}`.
    Ordered,
    /// `{u >= ū}`.
    LowerOnly,
    /// `{u >= 0}`.
    NonNegative,
}

/// Nodewise box constraints; the projection is the pointwise clamp.
#[derive(Clone, Debug, PartialEq)]
pub struct ObstacleSet {
    pub kind: ObstacleKind,
    pub lower: Option<Vec<f64>>,
    pub upper: Option<Vec<f64>>,
}

impl ObstacleSet {
    pub fn upper_only(upper: Vec<f64>) -> Self {
        Self { kind: ObstacleKind::UpperOnly, lower: None, upper: Some(upper) }
    }

    pub fn ordered(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch { expected: lower.len(), found: upper.len() });
        }
        if let Some(i) = (0..lower.len()).find(|&i| lower[i] > upper[i] + 1e-12 * upper[i].abs().max(1.0)) {
            return Err(Error::param(format!("lower obstacle exceeds upper obstacle at node {i}")));
        }
        Ok(Self { kind: ObstacleKind::Ordered, lower: Some(lower), upper: Some(upper) })
    }

    pub fn lower_only(lower: Vec<f64>) -> Self {
        Self { kind: ObstacleKind::LowerOnly, lower: Some(lower), upper: None }
    }

    pub fn non_negative(n: usize) -> Self {
        Self { kind: ObstacleKind::NonNegative, lower: Some(vec![0.0; n]), upper: None }
    }

    pub fn lo(&self, i: usize) -> f64 {
        self.lower.as_ref().map_or(f64::NEG_INFINITY, |l| l[i])
    }

    pub fn hi(&self, i: usize) -> f64 {
        self.upper.as_ref().map_or(f64::INFINITY, |u| u[i])
    }

    pub fn clamp(&self, i: usize, v: f64) -> f64 {
        v.max(self.lo(i)).min(self.hi(i))
    }

    pub fn project(&self, u: &mut [f64]) {
        for (i, v) in u.iter_mut().enumerate() {
            *v = self.clamp(i, *v);
        }
    }

    pub fn contains(&self, u: &[f64], tol: f64) -> bool {
        (0..u.len()).all(|i| u[i] >= self.lo(i) - tol && u[i] <= self.hi(i) + tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection_clamps_both_sides() {
        let o = ObstacleSet::ordered(vec![0.0, 0.0], vec![1.0, 2.0]).unwrap();
        let mut u = vec![-1.0, 3.0];
        o.project(&mut u);
        assert_eq!(u, vec![0.0, 2.0]);
        assert!(o.contains(&u, 0.0));
    }

    #[test]
    fn rejects_crossing_obstacles() {
        assert!(ObstacleSet::ordered(vec![2.0], vec![1.0]).is_err());
    }
}
