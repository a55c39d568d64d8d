//! JSON run configuration.

use std::path::Path;

use logistic_steady::families::{self, LambdaChoice};
use logistic_steady::grid::{DomainKind, RadialGrid};
use logistic_steady::minimize::MinimizeOptions;
use logistic_steady::oracles::AppendixExample;
use logistic_steady::pipeline::{BoundedConfig, ComparisonProfile, FastGrowthSpec, PipelineSettings};
use logistic_steady::{Error, ProblemSpec, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Related,
    Main,
    FastGrowth,
    Bounded,
    Verify,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Related => "related",
            Variant::Main => "main",
            Variant::FastGrowth => "fast-growth",
            Variant::Bounded => "bounded",
            Variant::Verify => "verify",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProblemConfig {
    /// Fully specified problem on an explicit domain.
    Custom {
        spec: ProblemSpec,
        domain: DomainKind,
        #[serde(default)]
        bounded: Option<BoundedConfig>,
    },
    MainPlateau,
    BoundedPo {
        #[serde(default = "default_b0")]
        b0: f64,
    },
    FastGrowthExample,
    FastGrowth {
        spec: FastGrowthSpec,
        #[serde(default = "default_r_infinity")]
        r_infinity: f64,
    },
    Appendix {
        #[serde(default = "default_dim")]
        dim: usize,
        #[serde(default = "default_beta")]
        beta: f64,
        #[serde(default = "default_mu")]
        mu: f64,
    },
    AppendixBounded {
        #[serde(default = "default_dim")]
        dim: usize,
        #[serde(default = "default_beta")]
        beta: f64,
        #[serde(default = "default_mu")]
        mu: f64,
    },
}

fn default_b0() -> f64 {
    families::BOUNDED_PO_B0
}
fn default_r_infinity() -> f64 {
    200.0
}
fn default_dim() -> usize {
    3
}
fn default_beta() -> f64 {
    3.0
}
fn default_mu() -> f64 {
    0.1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_intervals")]
    pub intervals: usize,
    /// Ratio of consecutive cell widths on whole-space grids.
    #[serde(default = "default_stretch")]
    pub stretch: f64,
    /// Overrides the truncation radius of whole-space families.
    #[serde(default)]
    pub r_infinity: Option<f64>,
}

fn default_intervals() -> usize {
    600
}
fn default_stretch() -> f64 {
    1.012
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { intervals: default_intervals(), stretch: default_stretch(), r_infinity: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default)]
    pub record_trace: bool,
    #[serde(default = "default_max_doublings")]
    pub max_doublings: usize,
    /// Bound on the relative dual residual accepted by the verify variant.
    #[serde(default = "default_verify_tol")]
    pub verify_tol: f64,
    /// Random direction pairs of the gradient consistency check.
    #[serde(default = "default_gradient_pairs")]
    pub gradient_pairs: usize,
}

fn default_tol() -> f64 {
    1e-9
}
fn default_max_iter() -> usize {
    20000
}
fn default_max_doublings() -> usize {
    12
}
fn default_verify_tol() -> f64 {
    5e-4
}
fn default_gradient_pairs() -> usize {
    20
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: default_tol(),
            max_iter: default_max_iter(),
            record_trace: false,
            max_doublings: default_max_doublings(),
            verify_tol: default_verify_tol(),
            gradient_pairs: default_gradient_pairs(),
        }
    }
}

impl SolverConfig {
    pub fn settings(&self) -> PipelineSettings {
        PipelineSettings {
            minimize: MinimizeOptions { tol: self.tol, max_iter: self.max_iter, record_trace: self.record_trace, ..Default::default() },
            max_doublings: self.max_doublings,
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    #[serde(default)]
    pub lambda: Option<LambdaChoice>,
    /// Harvesting level; the fast-growth family defaults to `μ3 / 2`, the others to 0.
    #[serde(default)]
    pub mu: Option<f64>,
    #[serde(default)]
    pub variant: Option<Variant>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub solver: SolverConfig,
}

/// A configuration resolved into concrete solver inputs.
pub enum Resolved {
    Pipeline { spec: ProblemSpec, grid: RadialGrid, comparison: ComparisonProfile, bounded: Option<BoundedConfig> },
    FastGrowth { spec: FastGrowthSpec, grid: RadialGrid },
    Oracle { example: AppendixExample, grid: RadialGrid },
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let cfg: RunConfig = serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn check(&self) -> Result<()> {
        let g = &self.grid;
        if g.intervals < 16 {
            return Err(Error::Config(format!("grid.intervals = {} must be at least 16", g.intervals)));
        }
        if !(g.stretch >= 1.0 && g.stretch.is_finite()) {
            return Err(Error::Config(format!("grid.stretch = {} must be >= 1", g.stretch)));
        }
        if let Some(r) = g.r_infinity {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::Config(format!("grid.r_infinity = {r} must be positive")));
            }
        }
        if let Some(mu) = self.mu {
            if !(mu >= 0.0 && mu.is_finite()) {
                return Err(Error::Config(format!("mu = {mu} must be finite and nonnegative")));
            }
        }
        if !(self.solver.tol > 0.0) {
            return Err(Error::Config("solver.tol must be positive".into()));
        }
        Ok(())
    }

    pub fn default_variant(&self) -> Variant {
        if let Some(v) = self.variant {
            return v;
        }
        match &self.problem {
            ProblemConfig::Custom { domain, .. } if !domain.is_whole_space() => Variant::Bounded,
            ProblemConfig::Custom { .. } | ProblemConfig::MainPlateau => Variant::Main,
            ProblemConfig::BoundedPo { .. } => Variant::Bounded,
            ProblemConfig::FastGrowthExample | ProblemConfig::FastGrowth { .. } => Variant::FastGrowth,
            ProblemConfig::Appendix { .. } | ProblemConfig::AppendixBounded { .. } => Variant::Verify,
        }
    }

    /// Whether `variant` applies to this problem family.
    pub fn supports(&self, variant: Variant) -> bool {
        match &self.problem {
            ProblemConfig::Custom { domain, .. } if !domain.is_whole_space() => {
                matches!(variant, Variant::Related | Variant::Bounded)
            }
            ProblemConfig::Custom { .. } | ProblemConfig::MainPlateau => matches!(variant, Variant::Related | Variant::Main),
            ProblemConfig::BoundedPo { .. } => matches!(variant, Variant::Related | Variant::Bounded),
            ProblemConfig::FastGrowthExample | ProblemConfig::FastGrowth { .. } => variant == Variant::FastGrowth,
            ProblemConfig::Appendix { .. } | ProblemConfig::AppendixBounded { .. } => variant == Variant::Verify,
        }
    }

    /// Builds the grid and problem data; `λ` is fixed here.
    pub fn resolve(&self) -> Result<Resolved> {
        let g = &self.grid;
        let lambda_choice = self.lambda.unwrap_or_default();
        match &self.problem {
            ProblemConfig::Custom { spec, domain, bounded } => {
                let mut spec = spec.clone();
                spec.mu = self.mu.unwrap_or(0.0);
                let (grid, comparison) = match domain {
                    DomainKind::WholeSpace { r_infinity } => (
                        families::whole_space_grid(&spec, g.r_infinity.unwrap_or(*r_infinity), g.intervals, g.stretch)?,
                        ComparisonProfile::Instanton,
                    ),
                    DomainKind::Ball { radius } => {
                        let b = bounded.unwrap_or_default();
                        (families::ball_grid(&spec, *radius, g.intervals, &[b.bump_radius])?, b.comparison())
                    }
                    DomainKind::Annulus { .. } => {
                        return Err(Error::Config("annular domains are supported by the eigen command only".into()))
                    }
                };
                if self.lambda.is_some() || spec.lambda <= 0.0 {
                    families::resolve_lambda(&mut spec, &grid, lambda_choice)?;
                }
                let bounded = (!domain.is_whole_space()).then(|| bounded.unwrap_or_default());
                Ok(Resolved::Pipeline { spec, grid, comparison, bounded })
            }
            ProblemConfig::MainPlateau => {
                let mut spec = families::main_plateau(1.0);
                spec.mu = self.mu.unwrap_or(0.0);
                let grid = families::whole_space_grid(&spec, g.r_infinity.unwrap_or(200.0), g.intervals, g.stretch)?;
                families::resolve_lambda(&mut spec, &grid, lambda_choice)?;
                Ok(Resolved::Pipeline { spec, grid, comparison: ComparisonProfile::Instanton, bounded: None })
            }
            ProblemConfig::BoundedPo { b0 } => {
                let mut spec = families::bounded_po(1.0, *b0)?;
                spec.mu = self.mu.unwrap_or(0.0);
                let b = BoundedConfig::default();
                let grid = families::ball_grid(&spec, 2.0, g.intervals, &[b.bump_radius])?;
                families::resolve_lambda(&mut spec, &grid, lambda_choice)?;
                Ok(Resolved::Pipeline { spec, grid, comparison: b.comparison(), bounded: Some(b) })
            }
            ProblemConfig::FastGrowthExample => {
                let spec = families::fast_growth_example();
                let grid = fast_grid(&spec, g.r_infinity.unwrap_or(200.0), g)?;
                Ok(Resolved::FastGrowth { spec, grid })
            }
            ProblemConfig::FastGrowth { spec, r_infinity } => {
                let grid = fast_grid(spec, g.r_infinity.unwrap_or(*r_infinity), g)?;
                Ok(Resolved::FastGrowth { spec: spec.clone(), grid })
            }
            ProblemConfig::Appendix { dim, beta, mu } | ProblemConfig::AppendixBounded { dim, beta, mu } => {
                let bounded = matches!(self.problem, ProblemConfig::AppendixBounded { .. });
                let example = if bounded {
                    AppendixExample::ball_of_radius_two(*dim, *beta, *mu)?
                } else {
                    AppendixExample::whole_space(*dim, *beta, *mu)?
                };
                let kind = example.domain(g.r_infinity.unwrap_or(200.0));
                let stretch = if bounded { 1.0 } else { g.stretch };
                let grid = RadialGrid::build(*dim, kind, g.intervals, stretch)?.pinned(&[1.0])?;
                Ok(Resolved::Oracle { example, grid })
            }
        }
    }
}

fn fast_grid(spec: &FastGrowthSpec, r_infinity: f64, g: &GridConfig) -> Result<RadialGrid> {
    let mut pins: Vec<f64> = [&spec.a, &spec.upsilon, &spec.h].iter().flat_map(|p| p.breakpoints()).collect();
    pins.sort_by(f64::total_cmp);
    pins.dedup();
    RadialGrid::build(spec.dim, DomainKind::WholeSpace { r_infinity }, g.intervals, g.stretch)?.pinned(&pins)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_uses_defaults() {
        let cfg: RunConfig = serde_json::from_str(r#"{"problem": {"family": "main-plateau"}}"#).unwrap();
        assert_eq!(cfg.grid, GridConfig::default());
        assert_eq!(cfg.default_variant(), Variant::Main);
        assert!(cfg.supports(Variant::Related));
        assert!(!cfg.supports(Variant::FastGrowth));
    }

    #[test]
    fn lambda_choices_parse() {
        let a: RunConfig =
            serde_json::from_str(r#"{"problem": {"family": "main-plateau"}, "lambda": {"value": 10.0}}"#).unwrap();
        assert_eq!(a.lambda, Some(LambdaChoice::Value(10.0)));
        let b: RunConfig =
            serde_json::from_str(r#"{"problem": {"family": "main-plateau"}, "lambda": {"window-fraction": 0.25}}"#).unwrap();
        assert_eq!(b.lambda, Some(LambdaChoice::WindowFraction(0.25)));
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let r: std::result::Result<RunConfig, _> = serde_json::from_str(r#"{"problem": {"family": "main-plateau"}, "grdi": {}}"#);
        assert!(r.is_err());
    }

    #[test]
    fn appendix_defaults_to_verify() {
        let cfg: RunConfig = serde_json::from_str(r#"{"problem": {"family": "appendix", "mu": 0.1}}"#).unwrap();
        assert_eq!(cfg.default_variant(), Variant::Verify);
        match cfg.resolve().unwrap() {
            Resolved::Oracle { example, grid } => {
                assert_eq!(example.dim, 3);
                assert_eq!(grid.nodes()[grid.nearest(1.0)], 1.0);
            }
            _ => panic!("expected an oracle"),
        }
    }

    #[test]
    fn round_trip() {
        let cfg = RunConfig {
            problem: ProblemConfig::BoundedPo { b0: 20.0 },
            lambda: Some(LambdaChoice::WindowFraction(0.5)),
            mu: Some(0.01),
            variant: Some(Variant::Bounded),
            grid: GridConfig { intervals: 400, stretch: 1.0, r_infinity: None },
            solver: SolverConfig::default(),
        };
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&text).unwrap(), cfg);
    }
}
