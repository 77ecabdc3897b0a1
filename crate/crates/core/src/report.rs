//! Result rows and their table, CSV and JSON renderings.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;

use crate::fault::{FaultComplex, FaultSpec};
use crate::mesh::{Coord, MeshShape};
use crate::montecarlo::McEstimate;
use crate::reliability::ReliabilityResult;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Table,
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "table" => Ok(Format::Table),
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format {other:?}")),
        }
    }
}

/// A record with a fixed column order.
pub trait Row: Serialize {
    fn columns() -> &'static [&'static str];
    fn cells(&self) -> Vec<String>;
}

pub fn render<R: Row>(rows: &[R], format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(rows).expect("rows serialize") + "\n",
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(R::columns()).expect("in-memory write");
            for r in rows {
                w.write_record(r.cells()).expect("in-memory write");
            }
            String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
        }
        Format::Table => {
            let cells: Vec<Vec<String>> = rows.iter().map(Row::cells).collect();
            let widths: Vec<usize> = R::columns()
                .iter()
                .enumerate()
                .map(|(i, h)| cells.iter().map(|r| r[i].len()).chain([h.len()]).max().unwrap_or(0))
                .collect();
            let mut out = String::new();
            let line = |out: &mut String, vals: &mut dyn Iterator<Item = &str>| {
                let parts: Vec<String> = vals.zip(&widths).map(|(v, w)| format!("{v:<w$}")).collect();
                let _ = writeln!(out, "{}", parts.join("  ").trim_end());
            };
            line(&mut out, &mut R::columns().iter().copied());
            let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
            let _ = writeln!(out, "{}", rule.join("  "));
            for r in &cells {
                line(&mut out, &mut r.iter().map(String::as_str));
            }
            out
        }
    }
}

pub fn mesh_label(shape: &MeshShape) -> String {
    shape
        .radices()
        .iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join("x")
}

/// Origin and extent columns for the fault list.
pub fn fault_labels(specs: &[FaultSpec]) -> (String, String) {
    if specs.is_empty() {
        return ("-".into(), "none".into());
    }
    let mut origins = Vec::new();
    let mut shapes = Vec::new();
    let ext = |e: &[usize]| e.iter().map(usize::to_string).collect::<Vec<_>>().join("x");
    for s in specs {
        match s {
            FaultSpec::Rectangular { origin, extents } => {
                origins.push(origin.to_string());
                shapes.push(ext(extents));
            }
            FaultSpec::Overlapping { rects } => {
                origins.push(rects.iter().map(|r| r.origin.to_string()).collect::<Vec<_>>().join("+"));
                shapes.push(format!(
                    "overlap[{}]",
                    rects.iter().map(|r| ext(&r.extents)).collect::<Vec<_>>().join("+")
                ));
            }
            FaultSpec::Arbitrary { nodes } => {
                let min = nodes.iter().min().cloned().unwrap_or(Coord(vec![]));
                origins.push(min.to_string());
                shapes.push(format!("arbitrary[{} nodes]", nodes.len()));
            }
        }
    }
    (origins.join(";"), shapes.join(";"))
}

/// One exact analysis, with the columns of the published comparison table
/// followed by the computed fields.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub mesh: String,
    pub classification: String,
    pub origin: String,
    pub fault: String,
    pub p_hit: String,
    pub p_miss: String,
    pub p_hit_exact: String,
    pub p_miss_exact: String,
    pub total_paths: String,
    pub miss_paths: String,
    pub engine: String,
    pub cross_check: String,
    pub obstacles: String,
    pub pair_convention: String,
    pub runtime_ms: u128,
}

impl ReportRow {
    pub fn new(
        shape: &MeshShape,
        complex: &FaultComplex,
        result: &ReliabilityResult,
        obstacles: crate::fault::ObstacleModel,
        precision: usize,
        runtime_ms: u128,
    ) -> Self {
        let (origin, fault) = fault_labels(&complex.specs);
        ReportRow {
            mesh: mesh_label(shape),
            classification: result.classification.to_string(),
            origin,
            fault,
            p_hit: result.p_hit.render(precision),
            p_miss: result.p_miss.render(precision),
            p_hit_exact: result.p_hit.fraction(),
            p_miss_exact: result.p_miss.fraction(),
            total_paths: result.total_paths.to_string(),
            miss_paths: result.miss_paths.to_string(),
            engine: result.engine.to_string(),
            cross_check: result.cross_check.to_string(),
            obstacles: obstacles.to_string(),
            pair_convention: result.pair_convention.to_string(),
            runtime_ms,
        }
    }
}

impl Row for ReportRow {
    fn columns() -> &'static [&'static str] {
        &[
            "mesh",
            "classification",
            "origin",
            "fault",
            "p_hit",
            "p_miss",
            "p_hit_exact",
            "p_miss_exact",
            "total_paths",
            "miss_paths",
            "engine",
            "cross_check",
            "obstacles",
            "pair_convention",
            "runtime_ms",
        ]
    }

    fn cells(&self) -> Vec<String> {
        vec![
            self.mesh.clone(),
            self.classification.clone(),
            self.origin.clone(),
            self.fault.clone(),
            self.p_hit.clone(),
            self.p_miss.clone(),
            self.p_hit_exact.clone(),
            self.p_miss_exact.clone(),
            self.total_paths.clone(),
            self.miss_paths.clone(),
            self.engine.clone(),
            self.cross_check.clone(),
            self.obstacles.clone(),
            self.pair_convention.clone(),
            self.runtime_ms.to_string(),
        ]
    }
}

/// One Monte-Carlo run. Carries no timing so repeated runs print identically.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct McRow {
    pub mesh: String,
    pub classification: String,
    pub origin: String,
    pub fault: String,
    pub p_hit: String,
    pub p_hat: f64,
    pub std_error: f64,
    pub samples: u64,
    pub seed: u64,
    pub hit_weight: String,
    pub total_weight: String,
    pub obstacles: String,
    pub estimator: String,
}

impl McRow {
    pub fn new(
        shape: &MeshShape,
        complex: &FaultComplex,
        est: &McEstimate,
        obstacles: crate::fault::ObstacleModel,
        precision: usize,
    ) -> Self {
        let (origin, fault) = fault_labels(&complex.specs);
        McRow {
            mesh: mesh_label(shape),
            classification: complex.classification.to_string(),
            origin,
            fault,
            p_hit: est.render(precision),
            p_hat: est.p_hat,
            std_error: est.std_error,
            samples: est.samples,
            seed: est.seed,
            hit_weight: est.hit_weight.to_string(),
            total_weight: est.total_weight.to_string(),
            obstacles: obstacles.to_string(),
            estimator: est.estimator.to_string(),
        }
    }
}

impl Row for McRow {
    fn columns() -> &'static [&'static str] {
        &[
            "mesh",
            "classification",
            "origin",
            "fault",
            "p_hit",
            "p_hat",
            "std_error",
            "samples",
            "seed",
            "hit_weight",
            "total_weight",
            "obstacles",
            "estimator",
        ]
    }

    fn cells(&self) -> Vec<String> {
        vec![
            self.mesh.clone(),
            self.classification.clone(),
            self.origin.clone(),
            self.fault.clone(),
            self.p_hit.clone(),
            format!("{:.6}", self.p_hat),
            format!("{:.6}", self.std_error),
            self.samples.to_string(),
            self.seed.to_string(),
            self.hit_weight.clone(),
            self.total_weight.clone(),
            self.obstacles.clone(),
            self.estimator.clone(),
        ]
    }
}
