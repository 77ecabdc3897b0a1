use thiserror::Error;

use crate::mesh::Coord;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("mesh must have at least one dimension")]
    EmptyShape,
    #[error("radix {radix} in dimension {dim} is below the minimum of 2")]
    RadixTooSmall { dim: usize, radix: usize },
    #[error("coordinate {coord} has {got} components, mesh has {expected} dimensions")]
    DimensionMismatch {
        coord: Coord,
        expected: usize,
        got: usize,
    },
    #[error("coordinate {coord} lies outside the mesh in dimension {dim}")]
    OutOfMesh { coord: Coord, dim: usize },
    #[error("extent {extent} in dimension {dim} must be at least 1")]
    ZeroExtent { dim: usize, extent: usize },
    #[error(
        "fault block at {origin} exceeds the mesh in dimension {dim}: \
         {origin_component} + {extent} > {radix}"
    )]
    BlockOutOfBounds {
        origin: Coord,
        dim: usize,
        origin_component: usize,
        extent: usize,
        radix: usize,
    },
    #[error("fault block extent {extent} in dimension {dim} must be at most {max} (radix {radix})", max = radix - 1)]
    ExtentTooLarge { dim: usize, extent: usize, radix: usize },
    #[error("fault specification contains no nodes")]
    EmptyFaultSet,
    #[error("an overlapping fault specification needs at least two rectangles, got {0}")]
    TooFewRectangles(usize),
    #[error("every mesh node is faulty")]
    AllNodesFaulty,
    #[error("endpoint {0} lies inside the fault ring set")]
    EndpointInObstacles(Coord),
    #[error("fewer than two non-faulty nodes; no source-destination pairs exist")]
    NoPairs,
    #[error("minimal path count {count} exceeds the enumeration cap {cap}")]
    EnumerationCap { count: String, cap: u64 },
    #[error("restriction determinant for {a} -> {b} is negative ({value})")]
    NegativeDeterminant { a: Coord, b: Coord, value: String },
    #[error(
        "engines disagree on pair {a} -> {b}: determinant gives {determinant}, \
         dynamic program gives {dynamic}"
    )]
    CrossCheck {
        a: Coord,
        b: Coord,
        determinant: String,
        dynamic: String,
    },
    #[error("sample count must be positive")]
    NoSamples,
    #[error("worker count must be positive")]
    NoWorkers,
}

pub type Result<T> = std::result::Result<T, Error>;
