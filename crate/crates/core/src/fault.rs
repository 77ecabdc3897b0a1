//! Fault regions and the rings of healthy nodes that surround them.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{Coord, MeshShape};

/// Axis-aligned block of faulty nodes. `extents[i]` counts nodes, and
/// `origin` is the block's componentwise-minimum corner.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rect {
    pub origin: Coord,
    pub extents: Vec<usize>,
}

impl Rect {
    pub fn new(origin: impl Into<Coord>, extents: impl Into<Vec<usize>>) -> Self {
        Rect {
            origin: origin.into(),
            extents: extents.into(),
        }
    }

    fn hi(&self, dim: usize) -> usize {
        self.origin.0[dim] + self.extents[dim] - 1
    }

    /// Largest per-dimension gap between two blocks; 0 when they overlap.
    fn gap(&self, other: &Rect) -> usize {
        (0..self.extents.len())
            .map(|i| {
                let (lo1, hi1) = (self.origin.0[i], self.hi(i));
                let (lo2, hi2) = (other.origin.0[i], other.hi(i));
                lo2.saturating_sub(hi1).max(lo1.saturating_sub(hi2))
            })
            .max()
            .unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum FaultSpec {
    #[serde(rename = "rect")]
    Rectangular { origin: Coord, extents: Vec<usize> },
    #[serde(rename = "overlap")]
    Overlapping { rects: Vec<Rect> },
    /// Any non-empty node set with no prescribed shape.
    Arbitrary { nodes: Vec<Coord> },
}

impl FaultSpec {
    pub fn rect(origin: impl Into<Coord>, extents: impl Into<Vec<usize>>) -> Self {
        FaultSpec::Rectangular {
            origin: origin.into(),
            extents: extents.into(),
        }
    }

    pub fn is_rectangular(&self) -> bool {
        matches!(self, FaultSpec::Rectangular { .. })
    }

    /// Faulty nodes named by this spec, bounds-checked against `shape`.
    pub fn nodes(&self, shape: &MeshShape) -> Result<BTreeSet<Coord>> {
        match self {
            FaultSpec::Rectangular { origin, extents } => expand_rectangular(shape, origin, extents),
            FaultSpec::Overlapping { rects } => {
                if rects.len() < 2 {
                    return Err(Error::TooFewRectangles(rects.len()));
                }
                let mut all = BTreeSet::new();
                for r in rects {
                    all.extend(expand_rectangular(shape, &r.origin, &r.extents)?);
                }
                Ok(all)
            }
            FaultSpec::Arbitrary { nodes } => {
                if nodes.is_empty() {
                    return Err(Error::EmptyFaultSet);
                }
                for v in nodes {
                    shape.check(v)?;
                }
                Ok(nodes.iter().cloned().collect())
            }
        }
    }
}

/// The block `{origin + m : 0 <= m_i <= extents_i - 1}`.
pub fn expand_rectangular(
    shape: &MeshShape,
    origin: &Coord,
    extents: &[usize],
) -> Result<BTreeSet<Coord>> {
    shape.check(origin)?;
    if extents.len() != shape.dims() {
        return Err(Error::DimensionMismatch {
            coord: Coord(extents.to_vec()),
            expected: shape.dims(),
            got: extents.len(),
        });
    }
    for (dim, (&l, (&x, &r))) in extents
        .iter()
        .zip(origin.0.iter().zip(shape.radices()))
        .enumerate()
    {
        if l == 0 {
            return Err(Error::ZeroExtent { dim, extent: l });
        }
        if x + l > r {
            return Err(Error::BlockOutOfBounds {
                origin: origin.clone(),
                dim,
                origin_component: x,
                extent: l,
                radix: r,
            });
        }
        // a block may not span a whole dimension
        if l >= r {
            return Err(Error::ExtentTooLarge { dim, extent: l, radix: r });
        }
    }
    let mut out = BTreeSet::new();
    let mut cur = origin.clone();
    loop {
        out.insert(cur.clone());
        // odometer over the block
        let mut d = 0;
        loop {
            if d == extents.len() {
                return Ok(out);
            }
            if cur.0[d] + 1 < origin.0[d] + extents[d] {
                cur.0[d] += 1;
                break;
            }
            cur.0[d] = origin.0[d];
            d += 1;
        }
    }
}

/// Healthy nodes at Chebyshev distance exactly 1 from some faulty node.
pub fn ring_of(shape: &MeshShape, faulty: &BTreeSet<Coord>) -> BTreeSet<Coord> {
    let n = shape.dims();
    let mut ring = BTreeSet::new();
    let mut offset = vec![0i64; n];
    for f in faulty {
        offset.iter_mut().for_each(|o| *o = -1);
        'shell: loop {
            if offset.iter().any(|&o| o != 0) {
                let cand: Option<Vec<usize>> = f
                    .0
                    .iter()
                    .zip(&offset)
                    .zip(shape.radices())
                    .map(|((&x, &o), &r)| {
                        let y = x as i64 + o;
                        (0..r as i64).contains(&y).then_some(y as usize)
                    })
                    .collect();
                if let Some(c) = cand {
                    let c = Coord(c);
                    if !faulty.contains(&c) {
                        ring.insert(c);
                    }
                }
            }
            let mut d = 0;
            loop {
                if d == n {
                    break 'shell;
                }
                if offset[d] < 1 {
                    offset[d] += 1;
                    break;
                }
                offset[d] = -1;
                d += 1;
            }
        }
    }
    ring
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    /// No faulty nodes at all.
    #[serde(rename = "none")]
    FaultFree,
    Ring,
    Chain,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Classification::FaultFree => write!(f, "none"),
            Classification::Ring => write!(f, "ring"),
            Classification::Chain => write!(f, "chain"),
        }
    }
}

/// Chain when any faulty node touches the mesh border.
pub fn classify(shape: &MeshShape, faulty: &BTreeSet<Coord>) -> Classification {
    if faulty.is_empty() {
        Classification::FaultFree
    } else if faulty.iter().any(|f| shape.on_boundary(f)) {
        Classification::Chain
    } else {
        Classification::Ring
    }
}

/// Which nodes a path must avoid to count as a miss.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObstacleModel {
    /// Faulty nodes and their ring.
    #[default]
    #[serde(rename = "ring")]
    FaultRing,
    /// Faulty nodes alone.
    #[serde(rename = "fault")]
    FaultOnly,
}

impl fmt::Display for ObstacleModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObstacleModel::FaultRing => write!(f, "ring"),
            ObstacleModel::FaultOnly => write!(f, "fault"),
        }
    }
}

/// Faulty set, its ring, and their union.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FaultComplex {
    pub faulty: BTreeSet<Coord>,
    pub ring: BTreeSet<Coord>,
    pub obstacles: BTreeSet<Coord>,
    pub classification: Classification,
    pub specs: Vec<FaultSpec>,
}

impl FaultComplex {
    pub fn fault_free() -> Self {
        FaultComplex {
            faulty: BTreeSet::new(),
            ring: BTreeSet::new(),
            obstacles: BTreeSet::new(),
            classification: Classification::FaultFree,
            specs: Vec::new(),
        }
    }

    /// Same faults with the ring dropped, so only faulty nodes obstruct.
    pub fn fault_only(&self) -> FaultComplex {
        FaultComplex {
            ring: BTreeSet::new(),
            obstacles: self.faulty.clone(),
            ..self.clone()
        }
    }

    /// Applies an obstacle model; [`ObstacleModel::FaultRing`] is the identity.
    pub fn with_model(&self, model: ObstacleModel) -> FaultComplex {
        match model {
            ObstacleModel::FaultRing => self.clone(),
            ObstacleModel::FaultOnly => self.fault_only(),
        }
    }

    /// Per-node membership masks indexed by linear node index: `(faulty, obstacle)`.
    pub fn masks(&self, shape: &MeshShape) -> (Vec<bool>, Vec<bool>) {
        let mut faulty = vec![false; shape.len()];
        let mut obstacle = vec![false; shape.len()];
        for f in &self.faulty {
            faulty[shape.index_of(f)] = true;
        }
        for v in &self.obstacles {
            obstacle[shape.index_of(v)] = true;
        }
        (faulty, obstacle)
    }
}

pub fn build_complex(shape: &MeshShape, spec: &FaultSpec) -> Result<FaultComplex> {
    build_complex_many(shape, std::slice::from_ref(spec))
}

/// Union of several specs; an empty list yields a fault-free complex.
pub fn build_complex_many(shape: &MeshShape, specs: &[FaultSpec]) -> Result<FaultComplex> {
    let mut faulty = BTreeSet::new();
    for s in specs {
        faulty.extend(s.nodes(shape)?);
    }
    if faulty.is_empty() {
        return Ok(FaultComplex::fault_free());
    }
    let ring = ring_of(shape, &faulty);
    let obstacles = faulty.union(&ring).cloned().collect();
    let classification = classify(shape, &faulty);
    Ok(FaultComplex {
        faulty,
        ring,
        obstacles,
        classification,
        specs: specs.to_vec(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "code", rename_all = "snake_case")]
pub enum Violation {
    OutOfMesh { node: Coord },
    AllNodesFaulty,
    Disconnected,
    DisjointRectangles { spec: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::OutOfMesh { node } => write!(f, "faulty node {node} lies outside the mesh"),
            Violation::AllNodesFaulty => write!(f, "every node is faulty"),
            Violation::Disconnected => write!(f, "healthy nodes are disconnected"),
            Violation::DisjointRectangles { spec } => {
                write!(f, "fault spec {spec}: rectangles neither overlap nor touch")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "code", rename_all = "snake_case")]
pub enum Notice {
    /// Fewer than two nodes lie outside the fault ring set, so no path can miss it.
    ObstaclesCoverMesh { outside: usize },
    /// Rectangular fault blocks are convex by construction.
    ConvexByConstruction,
}

impl fmt::Display for Notice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Notice::ObstaclesCoverMesh { outside } => write!(
                f,
                "FR covers all nodes ({outside} outside); every path meets the ring"
            ),
            Notice::ConvexByConstruction => write!(f, "rectangular faults are convex"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub notices: Vec<Notice>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate(shape: &MeshShape, complex: &FaultComplex) -> ValidationReport {
    let mut report = ValidationReport::default();
    for f in &complex.faulty {
        if !shape.contains(f) {
            report.violations.push(Violation::OutOfMesh { node: f.clone() });
        }
    }
    if !report.violations.is_empty() {
        return report;
    }
    match shape.connectivity_check(&complex.faulty) {
        Ok(true) => {}
        Ok(false) => report.violations.push(Violation::Disconnected),
        Err(_) => report.violations.push(Violation::AllNodesFaulty),
    }
    for (i, spec) in complex.specs.iter().enumerate() {
        if let FaultSpec::Overlapping { rects } = spec {
            if !rects_linked(rects) {
                report.violations.push(Violation::DisjointRectangles { spec: i });
            }
        }
    }
    let outside = shape.len() - complex.obstacles.len();
    if outside < 2 {
        report.notices.push(Notice::ObstaclesCoverMesh { outside });
    }
    if !complex.specs.is_empty() && complex.specs.iter().all(FaultSpec::is_rectangular) {
        report.notices.push(Notice::ConvexByConstruction);
    }
    report
}

/// Whether the "overlaps or touches" relation links all rectangles together.
fn rects_linked(rects: &[Rect]) -> bool {
    if rects.is_empty() {
        return true;
    }
    let mut reached = vec![false; rects.len()];
    reached[0] = true;
    let mut stack = vec![0];
    while let Some(i) = stack.pop() {
        for j in 0..rects.len() {
            if !reached[j] && rects[i].gap(&rects[j]) <= 1 {
                reached[j] = true;
                stack.push(j);
            }
        }
    }
    reached.into_iter().all(|r| r)
}
