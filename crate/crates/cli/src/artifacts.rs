//! Output files, their hashes and the run manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use logistic_steady::constants::DerivedConstants;
use logistic_steady::minimize::TraceRow;
use logistic_steady::pipeline::{Certificate, LadderRung, Status};
use logistic_steady::spectral::{serde_inf, WindowCheck};
use logistic_steady::{Error, RadialGrid, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Git-style content hash: `sha256("blob <len>\0" + content)`.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    hex::encode(h.finalize())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OutputEntry {
    pub path: String,
    pub bytes: usize,
    pub sha256: String,
}

/// Collects files written under one output directory.
pub struct Artifacts {
    dir: PathBuf,
    entries: Vec<OutputEntry>,
}

impl Artifacts {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), entries: Vec::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, bytes)?;
        self.entries.push(OutputEntry { path: name.into(), bytes: bytes.len(), sha256: sha256_hex(bytes) });
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.write_bytes(name, &bytes)
    }

    /// Writes each non-empty trace under `traces/`.
    pub fn write_traces(&mut self, traces: &[(String, Vec<TraceRow>)]) -> Result<()> {
        for (name, rows) in traces.iter().filter(|(_, rows)| !rows.is_empty()) {
            self.write_csv(&format!("traces/{name}.csv"), rows)?;
        }
        Ok(())
    }

    pub fn write_csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in rows {
            w.serialize(row)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        self.write_bytes(name, &bytes)
    }

    /// Adds entries produced elsewhere, e.g. by parallel workers.
    pub fn extend(&mut self, entries: Vec<OutputEntry>) {
        self.entries.extend(entries);
    }

    pub fn entries(&self) -> Vec<OutputEntry> {
        let mut e = self.entries.clone();
        e.sort_by(|a, b| a.path.cmp(&b.path));
        e
    }
}

/// One row of a solution CSV; absent columns are left empty.
#[derive(Clone, Debug, Serialize)]
pub struct SolutionRow {
    pub r: f64,
    pub u: f64,
    pub ld: Option<f64>,
    pub subsolution: Option<f64>,
    pub envelope: Option<f64>,
}

pub fn solution_rows(grid: &RadialGrid, u: &[f64], ld: Option<&[f64]>, sub: Option<&[f64]>, envelope: Option<&[f64]>) -> Vec<SolutionRow> {
    grid.nodes()
        .iter()
        .enumerate()
        .map(|(i, &r)| SolutionRow {
            r,
            u: u[i],
            ld: ld.map(|v| v[i]),
            subsolution: sub.map(|v| v[i]),
            envelope: envelope.map(|v| v[i]).filter(|e| e.is_finite()),
        })
        .collect()
}

/// `c / r^{N-2}` at the nodes.
pub fn decay_envelope(grid: &RadialGrid, c: f64) -> Vec<f64> {
    let n2 = grid.dim() as i32 - 2;
    grid.nodes().iter().map(|r| if *r > 0.0 { c / r.powi(n2) } else { f64::NAN }).collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GridSummary {
    pub dim: usize,
    pub kind: logistic_steady::DomainKind,
    pub intervals: usize,
    pub stretch: f64,
    pub outer_radius: f64,
    pub max_spacing: f64,
}

impl GridSummary {
    pub fn of(grid: &RadialGrid) -> Self {
        Self {
            dim: grid.dim(),
            kind: grid.kind().clone(),
            intervals: grid.intervals(),
            stretch: grid.stretch(),
            outer_radius: grid.outer_radius(),
            max_spacing: grid.max_spacing(),
        }
    }
}

/// Nodes and quadrature weights, for exact reproduction of the discretization.
#[derive(Clone, Debug, Serialize)]
pub struct GridRow {
    pub r: f64,
    pub weight: f64,
}

pub fn grid_rows(grid: &RadialGrid) -> Vec<GridRow> {
    grid.nodes().iter().zip(grid.weights()).map(|(&r, &weight)| GridRow { r, weight }).collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EigenSummary {
    pub lambda_1: f64,
    pub lambda_1_residual: Option<f64>,
    #[serde(with = "serde_inf")]
    pub lambda_star: f64,
    pub lambda_star_residual: Option<f64>,
    pub window: Option<WindowCheck>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub variant: Option<String>,
    /// Effective configuration, command-line overrides applied.
    pub config: RunConfig,
    pub input_hash: String,
    pub seed: u64,
    pub threads: Option<usize>,
    pub grid: Option<GridSummary>,
    pub eigen: Option<EigenSummary>,
    pub constants: Option<DerivedConstants>,
    #[serde(with = "logistic_steady::spectral::serde_inf_map")]
    pub scalars: BTreeMap<String, f64>,
    pub notes: Vec<String>,
    pub status: Option<Status>,
    pub exit_code: i32,
    pub certificates: Vec<Certificate>,
    pub outputs: Vec<OutputEntry>,
}

impl RunManifest {
    pub fn new(command: &str, config: &RunConfig, seed: u64, threads: Option<usize>) -> Result<Self> {
        let bytes = serde_json::to_vec(config)?;
        Ok(Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            variant: None,
            config: config.clone(),
            input_hash: content_hash(&bytes),
            seed,
            threads,
            grid: None,
            eigen: None,
            constants: None,
            scalars: BTreeMap::new(),
            notes: Vec::new(),
            status: None,
            exit_code: 0,
            certificates: Vec::new(),
            outputs: Vec::new(),
        })
    }
}

/// Wall-clock seconds per stage, kept apart from the deterministic outputs.
#[derive(Default)]
pub struct Timings {
    stages: Vec<(String, f64)>,
    clock: Option<(String, Instant)>,
}

impl Timings {
    pub fn start(&mut self, stage: &str) {
        self.stop();
        self.clock = Some((stage.into(), Instant::now()));
    }

    pub fn stop(&mut self) {
        if let Some((name, t)) = self.clock.take() {
            self.stages.push((name, t.elapsed().as_secs_f64()));
        }
    }

    pub fn write(mut self, dir: &Path) -> Result<()> {
        self.stop();
        let map: BTreeMap<String, f64> = self.stages.into_iter().collect();
        fs::write(dir.join("timings.json"), serde_json::to_vec_pretty(&map)?)?;
        Ok(())
    }
}

#[derive(Serialize)]
pub struct LadderRow {
    pub m: f64,
    pub sup: f64,
    pub norm: f64,
    pub c6: f64,
    pub energy: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub fn ladder_rows(ladder: &[LadderRung]) -> Vec<LadderRow> {
    ladder
        .iter()
        .map(|r| LadderRow { m: r.m, sup: r.sup, norm: r.norm, c6: r.c6, energy: r.energy, iterations: r.iterations, converged: r.converged })
        .collect()
}

/// Named minimizer traces: the related solve, then one per ladder rung.
pub fn traces(related: Option<&[TraceRow]>, ladder: &[LadderRung]) -> Vec<(String, Vec<TraceRow>)> {
    let mut out: Vec<(String, Vec<TraceRow>)> = related.map(|t| ("related".to_string(), t.to_vec())).into_iter().collect();
    out.extend(ladder.iter().enumerate().map(|(k, r)| (format!("rung_{k:02}"), r.trace.clone())));
    out
}
