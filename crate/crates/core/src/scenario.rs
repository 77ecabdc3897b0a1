//! JSON scenario files.
//!
//! ```json
//! {
//!   "mesh": [7, 8, 11],
//!   "faults": [{"type": "rect", "origin": [2, 2, 2], "extents": [2, 1, 3]}],
//!   "analysis": {"engine": "auto", "precision": 3},
//!   "mc": {"samples": 1000000, "seed": 1}
//! }
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::Error;
use crate::fault::{build_complex_many, FaultComplex, FaultSpec, ObstacleModel};
use crate::mesh::MeshShape;
use crate::montecarlo::McConfig;
use crate::reliability::{AnalysisOptions, CrossCheck, EnginePolicy, DEFAULT_BUDGET, PAIR_CONVENTION};

pub const DEFAULT_PRECISION: usize = 3;
pub const DEFAULT_SAMPLES: u64 = 1_000_000;
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Error, PartialEq)]
pub enum ScenarioError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{field}: {source}")]
    Invalid {
        field: String,
        #[source]
        source: Error,
    },
    #[error("{field}: {message}")]
    Unsupported { field: String, message: String },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub engine: Option<EnginePolicy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cross_check: Option<CrossCheck>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub obstacles: Option<ObstacleModel>,
    /// Echo only; the sole supported value is `unordered-distinct`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair_convention: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub mesh: Vec<usize>,
    #[serde(default)]
    pub faults: Vec<FaultSpec>,
    #[serde(default, skip_serializing_if = "is_default")]
    pub analysis: AnalysisSection,
    #[serde(default, skip_serializing_if = "is_default")]
    pub mc: McSection,
}

fn is_default<T: Default + PartialEq>(v: &T) -> bool {
    *v == T::default()
}

impl ScenarioConfig {
    pub fn new(mesh: Vec<usize>, faults: Vec<FaultSpec>) -> Self {
        ScenarioConfig {
            mesh,
            faults,
            analysis: AnalysisSection::default(),
            mc: McSection::default(),
        }
    }

    pub fn shape(&self) -> Result<MeshShape, ScenarioError> {
        MeshShape::new(self.mesh.clone()).map_err(|source| ScenarioError::Invalid {
            field: "mesh".into(),
            source,
        })
    }

    /// Builds the fault complex, naming the offending entry on failure.
    pub fn complex(&self) -> Result<FaultComplex, ScenarioError> {
        let shape = self.shape()?;
        for (i, spec) in self.faults.iter().enumerate() {
            spec.nodes(&shape).map_err(|source| ScenarioError::Invalid {
                field: format!("faults[{i}]"),
                source,
            })?;
        }
        let complex = build_complex_many(&shape, &self.faults).map_err(|source| ScenarioError::Invalid {
            field: "faults".into(),
            source,
        })?;
        Ok(complex.with_model(self.obstacles()))
    }

    pub fn obstacles(&self) -> ObstacleModel {
        self.analysis.obstacles.unwrap_or_default()
    }

    pub fn precision(&self) -> usize {
        self.analysis.precision.unwrap_or(DEFAULT_PRECISION)
    }

    pub fn analysis_options(&self) -> AnalysisOptions {
        let mut o = AnalysisOptions::default();
        if let Some(e) = self.analysis.engine {
            o.engine = e;
        }
        o.cross_check = self.analysis.cross_check;
        o.budget = self.analysis.budget.unwrap_or(DEFAULT_BUDGET);
        if let Some(w) = self.mc.workers {
            o.workers = w;
        }
        o
    }

    pub fn mc_config(&self) -> McConfig {
        let mut c = McConfig::new(
            self.mc.samples.unwrap_or(DEFAULT_SAMPLES),
            self.mc.seed.unwrap_or(DEFAULT_SEED),
        );
        if let Some(w) = self.mc.workers {
            c.workers = w;
        }
        c
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }
}

/// Parses and semantically checks a scenario.
pub fn parse_scenario(text: &str) -> Result<ScenarioConfig, ScenarioError> {
    let cfg: ScenarioConfig = serde_json::from_str(text).map_err(|e| ScenarioError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    cfg.complex()?;
    if let Some(pc) = &cfg.analysis.pair_convention {
        if pc != PAIR_CONVENTION {
            return Err(ScenarioError::Unsupported {
                field: "analysis.pair_convention".into(),
                message: format!("only {PAIR_CONVENTION} is supported, got {pc}"),
            });
        }
    }
    if cfg.mc.samples == Some(0) {
        return Err(ScenarioError::Invalid {
            field: "mc.samples".into(),
            source: Error::NoSamples,
        });
    }
    if cfg.mc.workers == Some(0) {
        return Err(ScenarioError::Invalid {
            field: "mc.workers".into(),
            source: Error::NoWorkers,
        });
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fault::Classification;

    #[test]
    fn parses_rectangular_fault() {
        let cfg = parse_scenario(
            r#"{"mesh":[7,8,11],"faults":[{"type":"rect","origin":[2,2,2],"extents":[2,1,3]}]}"#,
        )
        .unwrap();
        assert_eq!(cfg.mesh, vec![7, 8, 11]);
        let c = cfg.complex().unwrap();
        assert_eq!(c.faulty.len(), 6);
        assert_eq!(c.classification, Classification::Ring);
    }

    #[test]
    fn bounds_error_names_dimension() {
        let err = parse_scenario(
            r#"{"mesh":[7,8,11],"faults":[{"type":"rect","origin":[0,0,0],"extents":[9,1,1]}]}"#,
        )
        .unwrap_err();
        assert!(matches!(
            &err,
            ScenarioError::Invalid { field, source: Error::BlockOutOfBounds { dim: 0, .. } } if field == "faults[0]"
        ));
        assert!(err.to_string().contains("dimension 0"), "{err}");
    }

    #[test]
    fn parses_arbitrary_shape() {
        let cfg = parse_scenario(r#"{"mesh":[5,5],"faults":[{"type":"arbitrary","nodes":[[1,1],[2,2]]}]}"#).unwrap();
        assert_eq!(cfg.complex().unwrap().faulty.len(), 2);
    }

    #[test]
    fn rejects_unknown_fields() {
        let err = parse_scenario(r#"{"mesh":[5,5],"fault":[]}"#).unwrap_err();
        assert!(matches!(err, ScenarioError::Syntax { line: 1, .. }), "{err}");
        let err = parse_scenario(
            r#"{"mesh":[5,5],"faults":[{"type":"rect","origin":[1,1],"extents":[1,1],"color":2}]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, ScenarioError::Syntax { .. }), "{err}");
    }

    #[test]
    fn syntax_error_has_position() {
        let err = parse_scenario("{\n  \"mesh\": [5, 5,\n}").unwrap_err();
        match err {
            ScenarioError::Syntax { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn option_sections() {
        let cfg = parse_scenario(
            r#"{"mesh":[4,4],"faults":[],
                "analysis":{"engine":"dp","cross_check":"full","precision":5,"obstacles":"fault"},
                "mc":{"samples":10,"seed":3,"workers":2}}"#,
        )
        .unwrap();
        assert_eq!(cfg.precision(), 5);
        assert_eq!(cfg.analysis_options().engine, EnginePolicy::Dp);
        assert_eq!(cfg.mc_config(), McConfig { samples: 10, seed: 3, workers: 2 });
        assert!(parse_scenario(r#"{"mesh":[4,4],"mc":{"samples":0}}"#).is_err());
        assert!(parse_scenario(r#"{"mesh":[4,4],"analysis":{"pair_convention":"ordered"}}"#).is_err());
        assert!(parse_scenario(r#"{"mesh":[4,1]}"#).is_err());
    }
}
