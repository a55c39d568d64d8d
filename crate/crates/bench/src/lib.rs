//! Shared fixtures for the solver benchmarks.

use logistic_steady::families::{main_plateau_grid, main_plateau_midway};
use logistic_steady::pipeline::{ComparisonProfile, Model, PipelineSettings};

/// Main plateau model at the midpoint of its admissible window.
pub fn plateau_model(intervals: usize) -> Model {
    let grid = main_plateau_grid(intervals).expect("grid");
    let spec = main_plateau_midway(&grid).expect("spec");
    Model::new(spec, grid, ComparisonProfile::Instanton, PipelineSettings::default()).expect("model")
}
