//! Radial coefficient profiles as small expression trees.
//!
//! Profiles are evaluated with an explicit [`Side`] so that jumps placed
//! exactly on a node are sampled by their one-sided limits.

use serde::{Deserialize, Serialize};

use crate::grid::{RadialGrid, Side};

/// The Aubin–Talenti instanton `(1 + r^2)^{-(N-2)/2}`.
pub fn instanton(r: f64, dim: usize) -> f64 {
    (1.0 + r * r).powf(-(dim as f64 - 2.0) / 2.0)
}

/// C² smoothstep `6x^5 - 15x^4 + 10x^3` clipped to `[0, 1]`.
pub fn smoothstep(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        x * x * x * (10.0 + x * (-15.0 + 6.0 * x))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Profile {
    Constant { value: f64 },
    /// `d(r)^power` with `d` the instanton of the ambient dimension.
    Instanton { power: f64 },
    /// `r^exponent` for `r > 0`.
    PowerLaw { exponent: f64 },
    Gaussian { amplitude: f64, center: f64, width: f64 },
    /// `amplitude (1 - (r/radius)^2)^3` inside the radius, zero outside.
    SmoothBump { amplitude: f64, radius: f64 },
    /// Smoothstep rising from 0 at `start` to 1 at `start + width`.
    Step { start: f64, width: f64 },
    /// `sin(frequency r) / r`, continuous at the origin.
    SinOverR { frequency: f64 },
    Scaled { factor: f64, profile: Box<Profile> },
    /// `max(base, 0)^exponent`.
    Power { base: Box<Profile>, exponent: f64 },
    Sum { terms: Vec<Profile> },
    Product { factors: Vec<Profile> },
    /// `inner` for `r < breakpoint`, `outer` for `r > breakpoint`; the side picks the value at the breakpoint.
    Piecewise { breakpoint: f64, inner: Box<Profile>, outer: Box<Profile> },
    /// Linear interpolation of tabulated values, constant beyond the table.
    Tabulated { radii: Vec<f64>, values: Vec<f64> },
}

impl Profile {
    pub fn constant(value: f64) -> Self {
        Profile::Constant { value }
    }

    pub fn scaled(self, factor: f64) -> Self {
        Profile::Scaled { factor, profile: Box::new(self) }
    }

    pub fn piecewise(breakpoint: f64, inner: Profile, outer: Profile) -> Self {
        Profile::Piecewise { breakpoint, inner: Box::new(inner), outer: Box::new(outer) }
    }

    pub fn pow(self, exponent: f64) -> Self {
        Profile::Power { base: Box::new(self), exponent }
    }

    pub fn eval(&self, r: f64, side: Side, dim: usize) -> f64 {
        match self {
            Profile::Constant { value } => *value,
            Profile::Instanton { power } => instanton(r, dim).powf(*power),
            Profile::PowerLaw { exponent } => r.powf(*exponent),
            Profile::Gaussian { amplitude, center, width } => {
                let z = (r - center) / width;
                amplitude * (-z * z).exp()
            }
            Profile::SmoothBump { amplitude, radius } => {
                if r < *radius {
                    let t = 1.0 - (r / radius).powi(2);
                    amplitude * t * t * t
                } else {
                    0.0
                }
            }
            Profile::Step { start, width } => smoothstep((r - start) / width),
            Profile::SinOverR { frequency } => {
                let x = frequency * r;
                if x.abs() < 1e-6 {
                    frequency * (1.0 - x * x / 6.0)
                } else {
                    x.sin() / r
                }
            }
            Profile::Scaled { factor, profile } => factor * profile.eval(r, side, dim),
            Profile::Power { base, exponent } => base.eval(r, side, dim).max(0.0).powf(*exponent),
            Profile::Sum { terms } => terms.iter().map(|p| p.eval(r, side, dim)).sum(),
            Profile::Product { factors } => factors.iter().map(|p| p.eval(r, side, dim)).product(),
            Profile::Piecewise { breakpoint, inner, outer } => {
                let use_inner = r < *breakpoint || (r == *breakpoint && side == Side::Left);
                if use_inner {
                    inner.eval(r, side, dim)
                } else {
                    outer.eval(r, side, dim)
                }
            }
            Profile::Tabulated { radii, values } => tabulated(radii, values, r),
        }
    }

    /// Value at `r`, averaging the one-sided limits.
    pub fn at(&self, r: f64, dim: usize) -> f64 {
        0.5 * (self.eval(r, Side::Left, dim) + self.eval(r, Side::Right, dim))
    }

    /// Cell-averaged nodal samples on `grid`.
    pub fn sample(&self, grid: &RadialGrid) -> Vec<f64> {
        let dim = grid.dim();
        grid.sample_sided(|r, s| self.eval(r, s, dim))
    }

    /// Breakpoints that should coincide with grid nodes.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out = Vec::new();
        self.collect_breakpoints(&mut out);
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    fn collect_breakpoints(&self, out: &mut Vec<f64>) {
        match self {
            Profile::SmoothBump { radius, .. } => out.push(*radius),
            Profile::Step { start, width } => out.extend([*start, start + width]),
            Profile::Piecewise { breakpoint, inner, outer } => {
                out.push(*breakpoint);
                inner.collect_breakpoints(out);
                outer.collect_breakpoints(out);
            }
            Profile::Scaled { profile, .. } => profile.collect_breakpoints(out),
            Profile::Power { base, .. } => base.collect_breakpoints(out),
            Profile::Sum { terms } => terms.iter().for_each(|p| p.collect_breakpoints(out)),
            Profile::Product { factors } => factors.iter().for_each(|p| p.collect_breakpoints(out)),
            _ => {}
        }
    }
}

fn tabulated(radii: &[f64], values: &[f64], r: f64) -> f64 {
    let n = radii.len().min(values.len());
    if n == 0 {
        return 0.0;
    }
    if r <= radii[0] {
        return values[0];
    }
    if r >= radii[n - 1] {
        return values[n - 1];
    }
    let j = radii[..n].partition_point(|&x| x <= r);
    let t = (r - radii[j - 1]) / (radii[j] - radii[j - 1]);
    values[j - 1] * (1.0 - t) + values[j] * t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instanton_solves_critical_equation() {
        // -Δd = N(N-2) d^{(N+2)/(N-2)}, checked by central differences
        for dim in [3usize, 4, 5] {
            let n = dim as f64;
            for &r in &[0.3, 1.0, 2.5] {
                let h = 1e-4;
                let d = |x: f64| instanton(x, dim);
                let d2 = (d(r + h) - 2.0 * d(r) + d(r - h)) / (h * h);
                let d1 = (d(r + h) - d(r - h)) / (2.0 * h);
                let lap = d2 + (n - 1.0) / r * d1;
                let rhs = n * (n - 2.0) * d(r).powf((n + 2.0) / (n - 2.0));
                assert!((-lap - rhs).abs() < 1e-6 * rhs.max(1.0));
            }
        }
    }

    #[test]
    fn piecewise_respects_side() {
        let p = Profile::piecewise(1.0, Profile::constant(2.0), Profile::constant(5.0));
        assert_eq!(p.eval(1.0, Side::Left, 3), 2.0);
        assert_eq!(p.eval(1.0, Side::Right, 3), 5.0);
        assert_eq!(p.at(1.0, 3), 3.5);
        assert_eq!(p.breakpoints(), vec![1.0]);
    }

    #[test]
    fn json_round_trip() {
        let p = Profile::Sum {
            terms: vec![
                Profile::Instanton { power: 3.0 }.scaled(0.5),
                Profile::Sum { terms: vec![Profile::PowerLaw { exponent: -1.0 }, Profile::constant(-0.5)] }.pow(3.0),
            ],
        };
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(serde_json::from_str::<Profile>(&s).unwrap(), p);
    }

    #[test]
    fn smoothstep_is_monotone_and_clipped() {
        let mut prev = 0.0;
        for k in -10..=30 {
            let v = smoothstep(k as f64 / 20.0);
            assert!(v >= prev && (0.0..=1.0).contains(&v));
            prev = v;
        }
        assert_eq!(smoothstep(1.0), 1.0);
    }
}
