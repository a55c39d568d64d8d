use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::constants::DerivedConstants;
use crate::hypotheses::HypothesisReport;
use crate::spectral::WindowCheck;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Success,
    CertificateFailure,
    NonConvergence,
}

/// One pass/fail check with the measured value and its threshold.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Certificate {
    pub name: String,
    pub passed: bool,
    #[serde(with = "crate::spectral::serde_inf")]
    pub value: f64,
    #[serde(with = "crate::spectral::serde_inf")]
    pub threshold: f64,
    pub detail: String,
}

impl Certificate {
    /// Passes when `value <= threshold`.
    pub fn at_most(name: &str, value: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed: value <= threshold, value, threshold, detail: detail.into() }
    }

    /// Passes when `value > threshold`.
    pub fn above(name: &str, value: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed: value > threshold, value, threshold, detail: detail.into() }
    }

    pub fn flag(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, value: passed as u8 as f64, threshold: 1.0, detail: detail.into() }
    }
}

/// Everything a run certifies, serialized as the report JSON.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PipelineReport {
    pub variant: String,
    pub dim: usize,
    pub lambda: f64,
    pub mu: f64,
    pub status: Status,
    pub window: Option<WindowCheck>,
    pub hypotheses: Option<HypothesisReport>,
    pub constants: Option<DerivedConstants>,
    /// Named scalar outputs (`C3`, `C5`, `mu_1`, ...).
    #[serde(with = "crate::spectral::serde_inf_map")]
    pub scalars: BTreeMap<String, f64>,
    pub certificates: Vec<Certificate>,
}

impl PipelineReport {
    pub fn new(variant: &str, dim: usize, lambda: f64, mu: f64) -> Self {
        Self {
            variant: variant.into(),
            dim,
            lambda,
            mu,
            status: Status::Success,
            window: None,
            hypotheses: None,
            constants: None,
            scalars: BTreeMap::new(),
            certificates: Vec::new(),
        }
    }

    pub fn scalar(&mut self, name: &str, value: f64) {
        self.scalars.insert(name.into(), value);
    }

    pub fn get_scalar(&self, name: &str) -> Option<f64> {
        self.scalars.get(name).copied()
    }

    pub fn push(&mut self, c: Certificate) {
        self.certificates.push(c);
    }

    pub fn certificate(&self, name: &str) -> Option<&Certificate> {
        self.certificates.iter().find(|c| c.name == name)
    }

    pub fn all_passed(&self) -> bool {
        self.certificates.iter().all(|c| c.passed)
    }

    /// Sets the status from the certificates unless non-convergence was recorded.
    pub fn finalize(&mut self) {
        if self.status == Status::Success && !self.all_passed() {
            self.status = Status::CertificateFailure;
        }
    }

    pub fn failed(&self) -> Vec<&Certificate> {
        self.certificates.iter().filter(|c| !c.passed).collect()
    }
}
