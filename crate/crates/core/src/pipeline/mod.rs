//! End-to-end construction of positive solutions.
//!
//! Stages: hypothesis and window checks, the related problem with its
//! comparison supersolution `ℓd`, the truncated problem above the related
//! solution, and certification of the result.

mod bounded;
mod fast_growth;
mod main_solve;
mod model;
mod related;
mod report;
mod threshold;

pub use bounded::{solve_bounded, BoundedConfig, BoundedOutcome};
pub use fast_growth::{solve_fast_growth, FastGrowthOutcome, FastGrowthSpec};
pub use main_solve::{solve_main, solve_main_with, LadderRung, MainSolution};
pub use model::{eigen_window, zero_set_domain, ComparisonProfile, Model, PipelineSettings};
pub use related::{decay_constant, solve_related, stage_one, NormWindow, RelatedPreparation, RelatedSolution, ScanPoint};
pub use report::{Certificate, PipelineReport, Status};
pub use threshold::{find_mu_threshold, is_success_prefix, sweep, SweepPoint, ThresholdResult};
