//! Exact and Monte-Carlo analysis of how often minimal paths in an
//! n-dimensional mesh run into the ring of healthy nodes around a fault region.

pub mod error;
pub mod fault;
pub mod mesh;
pub mod montecarlo;
pub mod paths;
pub mod reliability;
pub mod report;
pub mod scenario;
pub mod table2;

pub use error::{Error, Result};
pub use fault::{
    build_complex, build_complex_many, Classification, FaultComplex, FaultSpec, ObstacleModel, Rect,
};
pub use mesh::{Coord, MeshShape};
pub use montecarlo::{estimate_p_hit, McConfig, McEstimate};
pub use reliability::{p_miss, AnalysisOptions, Probability, ReliabilityResult};
pub use scenario::{parse_scenario, ScenarioConfig};
