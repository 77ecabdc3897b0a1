//! Mesh geometry: shapes, coordinates, boxes and connectivity.
//!
//! Coordinates are 0-based, so node `x` satisfies `0 <= x[i] <= R_i - 1`.
//! Nodes are linearised in mixed radix with dimension 0 varying fastest.

use std::collections::VecDeque;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A node position, one component per mesh dimension.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Coord(pub Vec<usize>);

impl Coord {
    pub fn new(components: impl Into<Vec<usize>>) -> Self {
        Coord(components.into())
    }

    pub fn dims(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[usize] {
        &self.0
    }

    /// Chebyshev (L-infinity) distance.
    pub fn chebyshev(&self, other: &Coord) -> usize {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(&x, &y)| x.abs_diff(y))
            .max()
            .unwrap_or(0)
    }

    /// Manhattan (L1) distance.
    pub fn manhattan(&self, other: &Coord) -> usize {
        self.0.iter().zip(&other.0).map(|(&x, &y)| x.abs_diff(y)).sum()
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

impl From<Vec<usize>> for Coord {
    fn from(v: Vec<usize>) -> Self {
        Coord(v)
    }
}

impl<const N: usize> From<[usize; N]> for Coord {
    fn from(v: [usize; N]) -> Self {
        Coord(v.to_vec())
    }
}

/// Radices `R_1..R_n` of an n-dimensional mesh without wraparound links.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct MeshShape {
    radices: Vec<usize>,
}

impl MeshShape {
    pub fn new(radices: impl Into<Vec<usize>>) -> Result<Self> {
        let radices = radices.into();
        if radices.is_empty() {
            return Err(Error::EmptyShape);
        }
        if let Some((dim, &radix)) = radices.iter().enumerate().find(|(_, &r)| r < 2) {
            return Err(Error::RadixTooSmall { dim, radix });
        }
        Ok(MeshShape { radices })
    }

    pub fn radices(&self) -> &[usize] {
        &self.radices
    }

    pub fn dims(&self) -> usize {
        self.radices.len()
    }

    /// Number of nodes as a machine integer; used for indexing.
    pub fn len(&self) -> usize {
        self.radices.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn node_count(&self) -> BigUint {
        self.radices.iter().map(|&r| BigUint::from(r)).product()
    }

    /// Checks dimensionality and bounds.
    pub fn check(&self, c: &Coord) -> Result<()> {
        if c.dims() != self.dims() {
            return Err(Error::DimensionMismatch {
                coord: c.clone(),
                expected: self.dims(),
                got: c.dims(),
            });
        }
        match c.0.iter().zip(&self.radices).position(|(&x, &r)| x >= r) {
            Some(dim) => Err(Error::OutOfMesh { coord: c.clone(), dim }),
            None => Ok(()),
        }
    }

    pub fn contains(&self, c: &Coord) -> bool {
        self.check(c).is_ok()
    }

    /// True when some component sits on the mesh border.
    pub fn on_boundary(&self, c: &Coord) -> bool {
        c.0.iter()
            .zip(&self.radices)
            .any(|(&x, &r)| x == 0 || x == r - 1)
    }

    pub fn index_of(&self, c: &Coord) -> usize {
        let mut idx = 0;
        let mut stride = 1;
        for (&x, &r) in c.0.iter().zip(&self.radices) {
            idx += x * stride;
            stride *= r;
        }
        idx
    }

    pub fn coord_of(&self, mut idx: usize) -> Coord {
        let mut v = Vec::with_capacity(self.dims());
        for &r in &self.radices {
            v.push(idx % r);
            idx /= r;
        }
        Coord(v)
    }

    /// Stride of each dimension in the linear index.
    pub fn strides(&self) -> Vec<usize> {
        let mut s = Vec::with_capacity(self.dims());
        let mut acc = 1;
        for &r in &self.radices {
            s.push(acc);
            acc *= r;
        }
        s
    }

    /// All nodes in linear index order.
    pub fn nodes(&self) -> impl Iterator<Item = Coord> + '_ {
        (0..self.len()).map(move |i| self.coord_of(i))
    }

    /// Link count from the alternating sum over elementary symmetric
    /// products of the radices:
    /// `n*e_n - e_{n-1} + e_{n-2} - ... + (-1)^(n-1) * e_1`.
    ///
    /// This agrees with [`MeshShape::link_count_direct`] only for `n <= 2`.
    /// From three dimensions on the trailing terms do not cancel; it reduces
    /// to `(n-1)*e_n + prod(R_i - 1) - (-1)^n`.
    pub fn link_count_formula(&self) -> BigUint {
        let n = self.dims();
        let e = elementary_symmetric(&self.radices);
        let mut total = BigInt::from(n) * BigInt::from(e[n].clone());
        for k in 1..n {
            let term = BigInt::from(e[n - k].clone());
            if k % 2 == 1 {
                total -= term;
            } else {
                total += term;
            }
        }
        total
            .to_biguint()
            .expect("alternating link sum is positive for radices >= 2")
    }

    /// Direct count: `sum_i (R_i - 1) * prod_{j != i} R_j`.
    pub fn link_count_direct(&self) -> BigUint {
        (0..self.dims())
            .map(|i| {
                self.radices
                    .iter()
                    .enumerate()
                    .map(|(j, &r)| BigUint::from(if i == j { r - 1 } else { r }))
                    .product::<BigUint>()
            })
            .sum()
    }

    /// Coordinates one hop away, ordered by dimension then `-1` before `+1`.
    pub fn neighbors(&self, v: &Coord) -> Result<Vec<Coord>> {
        self.check(v)?;
        let mut out = Vec::with_capacity(2 * self.dims());
        for (i, &r) in self.radices.iter().enumerate() {
            if v.0[i] > 0 {
                let mut w = v.clone();
                w.0[i] -= 1;
                out.push(w);
            }
            if v.0[i] + 1 < r {
                let mut w = v.clone();
                w.0[i] += 1;
                out.push(w);
            }
        }
        Ok(out)
    }

    /// True iff the subgraph induced on the non-faulty nodes is connected.
    pub fn connectivity_check<'a>(&self, faulty: impl IntoIterator<Item = &'a Coord>) -> Result<bool> {
        let n_nodes = self.len();
        let mut blocked = vec![false; n_nodes];
        let mut n_blocked = 0;
        for f in faulty {
            self.check(f)?;
            let i = self.index_of(f);
            if !blocked[i] {
                blocked[i] = true;
                n_blocked += 1;
            }
        }
        if n_blocked == n_nodes {
            return Err(Error::AllNodesFaulty);
        }
        let strides = self.strides();
        let start = blocked.iter().position(|b| !b).expect("some node is healthy");
        let mut seen = blocked;
        seen[start] = true;
        let mut reached = 1;
        let mut queue = VecDeque::from([start]);
        while let Some(i) = queue.pop_front() {
            for (d, &r) in self.radices.iter().enumerate() {
                let x = (i / strides[d]) % r;
                if x > 0 && !seen[i - strides[d]] {
                    seen[i - strides[d]] = true;
                    reached += 1;
                    queue.push_back(i - strides[d]);
                }
                if x + 1 < r && !seen[i + strides[d]] {
                    seen[i + strides[d]] = true;
                    reached += 1;
                    queue.push_back(i + strides[d]);
                }
            }
        }
        Ok(reached + n_blocked == n_nodes)
    }
}

impl<'de> Deserialize<'de> for MeshShape {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let radices = Vec::<usize>::deserialize(d)?;
        MeshShape::new(radices).map_err(serde::de::Error::custom)
    }
}

/// `e[k]` is the k-th elementary symmetric polynomial of `values`.
fn elementary_symmetric(values: &[usize]) -> Vec<BigUint> {
    let mut e = vec![BigUint::zero(); values.len() + 1];
    e[0] = BigUint::one();
    for (i, &v) in values.iter().enumerate() {
        for k in (1..=i + 1).rev() {
            let add = &e[k - 1] * BigUint::from(v);
            e[k] += add;
        }
    }
    e
}

/// Axis-aligned sub-mesh spanned by two corners.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoundingBox {
    pub lo: Coord,
    pub hi: Coord,
}

impl BoundingBox {
    pub fn contains(&self, c: &Coord) -> bool {
        c.0.iter()
            .zip(self.lo.0.iter().zip(&self.hi.0))
            .all(|(&x, (&lo, &hi))| lo <= x && x <= hi)
    }

    pub fn volume(&self) -> usize {
        self.lo
            .0
            .iter()
            .zip(&self.hi.0)
            .map(|(&lo, &hi)| hi - lo + 1)
            .product()
    }
}

/// Componentwise min/max box of two points; every minimal `a -> b` path stays inside it.
pub fn bounding_box(a: &Coord, b: &Coord) -> BoundingBox {
    let (lo, hi) = a
        .0
        .iter()
        .zip(&b.0)
        .map(|(&x, &y)| (x.min(y), x.max(y)))
        .unzip();
    BoundingBox {
        lo: Coord(lo),
        hi: Coord(hi),
    }
}

/// Per-dimension absolute distances `|b_i - a_i|`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DeltaVector(pub Vec<usize>);

impl DeltaVector {
    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }
}

pub fn delta(a: &Coord, b: &Coord) -> Result<DeltaVector> {
    if a.dims() != b.dims() {
        return Err(Error::DimensionMismatch {
            coord: b.clone(),
            expected: a.dims(),
            got: b.dims(),
        });
    }
    Ok(DeltaVector(
        a.0.iter().zip(&b.0).map(|(&x, &y)| x.abs_diff(y)).collect(),
    ))
}
