//! Principal weighted eigenvalues `-Δφ = θ a φ`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, FieldRole};
use crate::grid::RadialGrid;
use crate::operator::LaplaceOperator;

/// Serializes non-finite floats as the strings `"inf"`, `"-inf"`, `"nan"`.
pub mod serde_inf {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Str(s) => match s.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("unexpected float string {other}"))),
            },
        }
    }
}

/// [`serde_inf`] applied to the values of a string-keyed map.
pub mod serde_inf_map {
    use std::collections::BTreeMap;

    use serde::ser::SerializeMap;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Value(#[serde(with = "super::serde_inf")] f64);

    pub fn serialize<S: Serializer>(m: &BTreeMap<String, f64>, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(m.len()))?;
        for (k, v) in m {
            map.serialize_entry(k, &Value(*v))?;
        }
        map.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<String, f64>, D::Error> {
        let raw = BTreeMap::<String, Value>::deserialize(d)?;
        Ok(raw.into_iter().map(|(k, v)| (k, v.0)).collect())
    }
}

/// Which region the eigenproblem lives on.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EigenDomain {
    /// The whole grid with its own boundary condition.
    Full,
    /// The open ball `r < radius` with Dirichlet data at `radius`.
    InteriorBall { radius: f64 },
    /// Empty region; the eigenvalue is `+inf`.
    Empty,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EigenResult {
    #[serde(with = "serde_inf")]
    pub value: f64,
    pub domain: EigenDomain,
    /// Positive, `max = 1` normalized.
    pub eigenfunction: Option<Field>,
    pub iterations: usize,
    /// Relative weighted residual of `-Δφ - θ a φ`.
    pub residual: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct EigenOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 500 }
    }
}

/// Shifted inverse iteration with Rayleigh-quotient acceleration, guarded by Sturm counts.
pub fn principal_eigen(op: &LaplaceOperator, grid: &RadialGrid, a: &[f64], domain: EigenDomain, opts: EigenOptions) -> Result<EigenResult> {
    let n = op.len();
    let excluded: Vec<bool> = match domain {
        EigenDomain::Empty => {
            return Ok(EigenResult { value: f64::INFINITY, domain, eigenfunction: None, iterations: 0, residual: 0.0 });
        }
        EigenDomain::Full => vec![false; n],
        EigenDomain::InteriorBall { radius } => grid.nodes().iter().map(|&r| r >= radius * (1.0 - 1e-12)).collect(),
    };
    let active = |i: usize| !op.fixed()[i] && !excluded[i];
    if (0..n).filter(|&i| active(i)).count() < 2 {
        return Err(Error::param("eigenproblem region contains fewer than two nodes"));
    }
    let w: Vec<f64> = (0..n).map(|i| if active(i) { a[i] * op.volumes()[i] } else { 0.0 }).collect();
    if w.iter().any(|&x| x < 0.0) || !w.iter().any(|&x| x > 0.0) {
        return Err(Error::param("eigen weight must be nonnegative and not identically zero"));
    }
    let b_norm = |x: &[f64]| x.iter().zip(&w).map(|(v, wi)| wi * v * v).sum::<f64>().sqrt();
    let rayleigh = |x: &[f64]| op.energy_sq(x) / x.iter().zip(&w).map(|(v, wi)| wi * v * v).sum::<f64>();

    let mut x: Vec<f64> = (0..n).map(|i| if active(i) { 1.0 } else { 0.0 }).collect();
    let mut theta = rayleigh(&x);
    let mut shift = 0.0;
    let mut iterations = 0;
    let mut converged = false;
    for it in 0..opts.max_iter {
        iterations = it + 1;
        let neg_shift: Vec<f64> = w.iter().map(|wi| -shift * wi).collect();
        let rhs: Vec<f64> = x.iter().zip(&w).map(|(v, wi)| v * wi).collect();
        let y = op.solve_masked(&rhs, Some(&neg_shift), Some(&excluded))?;
        let nrm = b_norm(&y);
        if !(nrm.is_finite() && nrm > 0.0) {
            return Err(Error::stalled("eigen", "inverse iteration produced a degenerate vector"));
        }
        x = y.iter().map(|v| v / nrm).collect();
        let next = rayleigh(&x);
        let inc = (next - theta).abs();
        theta = next;
        if it >= 3 && inc <= opts.tol * theta.abs().max(1.0) {
            converged = true;
            break;
        }
        // Rayleigh shift only while it stays below the second eigenvalue
        if it >= 3 {
            let cand = theta * (1.0 - 1e-9);
            if op.count_below(&w, cand, Some(&excluded)) <= 1 {
                shift = cand;
            }
        }
    }
    if !converged {
        return Err(Error::stalled("eigen", format!("no convergence in {iterations} iterations")));
    }
    let sign = if x.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
    let peak = x.iter().map(|v| v * sign).fold(f64::NEG_INFINITY, f64::max);
    let phi: Vec<f64> = x.iter().map(|v| v * sign / peak).collect();
    if op.count_below(&w, theta * (1.0 - 1e-6), Some(&excluded)) != 0 {
        return Err(Error::stalled("eigen", "converged to a non-principal eigenpair"));
    }
    let lap = op.apply(&phi);
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..n {
        if active(i) {
            let v = op.volumes()[i];
            num += v * (lap[i] - theta * a[i] * phi[i]).powi(2);
            den += v * (theta * a[i] * phi[i]).powi(2);
        }
    }
    Ok(EigenResult {
        value: theta,
        domain,
        eigenfunction: Some(Field::new(FieldRole::Eigenfunction, phi)),
        iterations,
        residual: (num / den).sqrt(),
    })
}

/// Second-order Richardson extrapolation from a coarse and a 2x refined value.
pub fn richardson(coarse: f64, fine: f64, order: f64) -> f64 {
    fine + (fine - coarse) / (2f64.powf(order) - 1.0)
}

/// Strict membership `λ1 < λ < λ*`, with the two margins.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WindowCheck {
    pub lambda: f64,
    pub lambda_1: f64,
    #[serde(with = "serde_inf")]
    pub lambda_star: f64,
    pub lower_margin: f64,
    #[serde(with = "serde_inf")]
    pub upper_margin: f64,
    pub inside: bool,
}

pub fn check_lambda_window(lambda: f64, lambda_1: f64, lambda_star: f64) -> WindowCheck {
    let lower_margin = lambda - lambda_1;
    let upper_margin = lambda_star - lambda;
    WindowCheck {
        lambda,
        lambda_1,
        lambda_star,
        lower_margin,
        upper_margin,
        inside: lower_margin > 0.0 && upper_margin > 0.0,
    }
}

/// Necessary condition `||u||^2 <= λ ∫ a u^2` for a solution; returns the slack `λ∫au² - ||u||²`.
pub fn rayleigh_slack(op: &LaplaceOperator, a: &[f64], lambda: f64, u: &[f64]) -> f64 {
    let weighted: f64 = a.iter().zip(u).zip(op.volumes()).map(|((ai, ui), v)| v * ai * ui * ui).sum();
    lambda * weighted - op.energy_sq(u)
}
