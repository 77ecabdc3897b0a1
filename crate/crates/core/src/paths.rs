//! Exact counting of minimal paths, with and without forbidden nodes.
//!
//! Three independent engines count minimal `a -> b` paths that avoid a set
//! of nodes:
//!
//! * [`avoid_count_det`]: determinant of the signed path-count matrix built
//!   from the restriction points,
//! * [`avoid_count_dp`]: a dynamic program over the bounding box,
//! * [`brute_force_avoid`]: explicit enumeration, for small instances.

use std::collections::{BTreeSet, HashSet};

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::mesh::{bounding_box, Coord, MeshShape};

/// Default cap on the number of paths [`brute_force_avoid`] will walk.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1_000_000;

/// Pascal triangle up to a fixed row, so multinomials are products of
/// binomials and never need big-integer division.
#[derive(Clone, Debug)]
pub struct PathCounter {
    rows: Vec<Vec<BigUint>>,
}

impl PathCounter {
    /// Table able to count paths of up to `max_len` hops.
    pub fn new(max_len: usize) -> Self {
        let mut rows: Vec<Vec<BigUint>> = Vec::with_capacity(max_len + 1);
        rows.push(vec![BigUint::one()]);
        for n in 1..=max_len {
            let prev = &rows[n - 1];
            let mut row = Vec::with_capacity(n + 1);
            row.push(BigUint::one());
            for k in 1..n {
                row.push(&prev[k - 1] + &prev[k]);
            }
            row.push(BigUint::one());
            rows.push(row);
        }
        PathCounter { rows }
    }

    /// Sized for the longest minimal path in `shape`.
    pub fn for_shape(shape: &MeshShape) -> Self {
        Self::new(shape.radices().iter().map(|r| r - 1).sum())
    }

    pub fn max_len(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn binomial(&self, n: usize, k: usize) -> BigUint {
        if k > n {
            return BigUint::zero();
        }
        match self.rows.get(n) {
            Some(row) => row[k].clone(),
            None => binomial_slow(n, k),
        }
    }

    /// `(sum d)! / prod d_i!` as a product of binomials over prefix sums.
    pub fn multinomial(&self, deltas: &[usize]) -> BigUint {
        let mut acc = BigUint::one();
        let mut total = 0;
        for &d in deltas {
            total += d;
            if d > 0 && d < total {
                acc *= self.binomial(total, d);
            }
        }
        acc
    }

    /// Number of minimal paths between `a` and `b`.
    pub fn lt(&self, a: &Coord, b: &Coord) -> BigUint {
        let d: Vec<usize> = a.0.iter().zip(&b.0).map(|(&x, &y)| x.abs_diff(y)).collect();
        self.multinomial(&d)
    }

    /// Paths from `from` to `to` whose moves all follow the `a -> b`
    /// orientation in every dimension; zero if any move would go against it.
    pub fn lm(&self, a: &Coord, b: &Coord, from: &Coord, to: &Coord) -> BigUint {
        let signed = SignedDelta::new(a, b, from, to);
        match signed.magnitudes() {
            Some(d) => self.multinomial(&d),
            None => BigUint::zero(),
        }
    }
}

fn binomial_slow(n: usize, k: usize) -> BigUint {
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= BigUint::from(n - i);
        acc /= BigUint::from(i + 1);
    }
    acc
}

/// Minimal path count between two nodes.
pub fn lt(a: &Coord, b: &Coord) -> BigUint {
    PathCounter::new(a.manhattan(b)).lt(a, b)
}

/// Orientation-aware path count; see [`PathCounter::lm`].
pub fn lm(a: &Coord, b: &Coord, from: &Coord, to: &Coord) -> BigUint {
    PathCounter::new(from.manhattan(to)).lm(a, b, from, to)
}

/// Per-dimension displacement from one point to another, signed positive
/// when it runs the same way as `a -> b` and negative otherwise.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignedDelta(pub Vec<i64>);

impl SignedDelta {
    pub fn new(a: &Coord, b: &Coord, from: &Coord, to: &Coord) -> Self {
        SignedDelta(
            (0..a.dims())
                .map(|i| {
                    let step = to.0[i] as i64 - from.0[i] as i64;
                    // a dimension with no displacement admits no moves at all
                    let with = match b.0[i].cmp(&a.0[i]) {
                        std::cmp::Ordering::Greater => step >= 0,
                        std::cmp::Ordering::Less => step <= 0,
                        std::cmp::Ordering::Equal => step == 0,
                    };
                    if with {
                        step.abs()
                    } else {
                        -step.abs()
                    }
                })
                .collect(),
        )
    }

    /// Absolute values, or `None` if any component is negative.
    pub fn magnitudes(&self) -> Option<Vec<usize>> {
        self.0
            .iter()
            .map(|&d| (d >= 0).then_some(d as usize))
            .collect()
    }
}

/// Fault-ring nodes inside the bounding box of a source-destination pair,
/// in lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RestrictionSet {
    pub a: Coord,
    pub b: Coord,
    pub points: Vec<Coord>,
}

impl RestrictionSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

pub fn restriction(
    shape: &MeshShape,
    a: &Coord,
    b: &Coord,
    obstacles: &BTreeSet<Coord>,
) -> Result<RestrictionSet> {
    shape.check(a)?;
    shape.check(b)?;
    for end in [a, b] {
        if obstacles.contains(end) {
            return Err(Error::EndpointInObstacles(end.clone()));
        }
    }
    let bx = bounding_box(a, b);
    let points = obstacles.iter().filter(|c| bx.contains(c)).cloned().collect();
    Ok(RestrictionSet {
        a: a.clone(),
        b: b.clone(),
        points,
    })
}

/// Matrix whose determinant counts the `a -> b` paths avoiding `points`.
/// Row 0 holds `lm(C_l, b)`, row `k >= 1` holds `lm(C_l, C_k)`, with `C_0 = a`.
pub fn avoidance_matrix(counter: &PathCounter, a: &Coord, b: &Coord, points: &[Coord]) -> Vec<Vec<BigInt>> {
    let m = points.len();
    let col = |l: usize| if l == 0 { a } else { &points[l - 1] };
    let mut rows = Vec::with_capacity(m + 1);
    rows.push(
        (0..=m)
            .map(|l| BigInt::from(counter.lm(a, b, col(l), b)))
            .collect(),
    );
    for k in 1..=m {
        rows.push(
            (0..=m)
                .map(|l| BigInt::from(counter.lm(a, b, col(l), &points[k - 1])))
                .collect(),
        );
    }
    rows
}

/// Exact integer determinant: cofactor expansion up to 4x4, Bareiss
/// fraction-free elimination beyond.
pub fn determinant(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    match n {
        0 => BigInt::one(),
        1..=4 => cofactor(&m, &(0..n).collect::<Vec<_>>()),
        _ => {
            let mut negate = false;
            let mut prev = BigInt::one();
            for k in 0..n - 1 {
                if m[k][k].is_zero() {
                    match (k + 1..n).find(|&r| !m[r][k].is_zero()) {
                        Some(r) => {
                            m.swap(k, r);
                            negate = !negate;
                        }
                        None => return BigInt::zero(),
                    }
                }
                for i in k + 1..n {
                    for j in k + 1..n {
                        let v = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
                        m[i][j] = v;
                    }
                }
                prev = m[k][k].clone();
            }
            let d = m[n - 1][n - 1].clone();
            if negate {
                -d
            } else {
                d
            }
        }
    }
}

/// Laplace expansion along the first remaining row over the given columns.
fn cofactor(m: &[Vec<BigInt>], cols: &[usize]) -> BigInt {
    let row = m.len() - cols.len();
    if cols.len() == 1 {
        return m[row][cols[0]].clone();
    }
    let mut acc = BigInt::zero();
    for (pos, &c) in cols.iter().enumerate() {
        if m[row][c].is_zero() {
            continue;
        }
        let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
        let term = &m[row][c] * cofactor(m, &rest);
        if pos % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

/// Paths from `a` to `b` that visit none of `points`, via the determinant.
pub fn avoid_count_det(a: &Coord, b: &Coord, points: &[Coord]) -> Result<BigUint> {
    let len = points
        .iter()
        .chain([a, b])
        .map(|c| c.manhattan(a).max(c.manhattan(b)))
        .max()
        .unwrap_or(0);
    avoid_count_det_with(&PathCounter::new(len), a, b, points)
}

pub fn avoid_count_det_with(
    counter: &PathCounter,
    a: &Coord,
    b: &Coord,
    points: &[Coord],
) -> Result<BigUint> {
    let det = determinant(avoidance_matrix(counter, a, b, points));
    match det.sign() {
        Sign::Minus => Err(Error::NegativeDeterminant {
            a: a.clone(),
            b: b.clone(),
            value: det.to_string(),
        }),
        _ => Ok(det.abs().to_biguint().expect("non-negative")),
    }
}

/// Paths from `a` to `b` avoiding `forbidden`, by dynamic programming over
/// the bounding box in order of increasing distance from `a`.
pub fn avoid_count_dp(
    shape: &MeshShape,
    a: &Coord,
    b: &Coord,
    forbidden: &HashSet<Coord>,
) -> Result<BigUint> {
    shape.check(a)?;
    shape.check(b)?;
    let n = a.dims();
    let sides: Vec<usize> = a.0.iter().zip(&b.0).map(|(&x, &y)| x.abs_diff(y) + 1).collect();
    let dir: Vec<bool> = a.0.iter().zip(&b.0).map(|(&x, &y)| y >= x).collect();
    let volume: usize = sides.iter().product();
    let mut strides = vec![1; n];
    for i in 1..n {
        strides[i] = strides[i - 1] * sides[i - 1];
    }
    // local offsets measured from a toward b, so index order is topological
    let mut counts = vec![BigUint::zero(); volume];
    let mut local = vec![0usize; n];
    let mut node = a.clone();
    for idx in 0..volume {
        if idx > 0 {
            let mut d = 0;
            while local[d] + 1 == sides[d] {
                local[d] = 0;
                d += 1;
            }
            local[d] += 1;
        }
        for i in 0..n {
            node.0[i] = if dir[i] { a.0[i] + local[i] } else { a.0[i] - local[i] };
        }
        if idx == 0 {
            counts[0] = if forbidden.contains(&node) {
                BigUint::zero()
            } else {
                BigUint::one()
            };
            continue;
        }
        if forbidden.contains(&node) {
            continue;
        }
        let mut sum = BigUint::zero();
        for i in 0..n {
            if local[i] > 0 {
                sum += &counts[idx - strides[i]];
            }
        }
        counts[idx] = sum;
    }
    Ok(counts.pop().unwrap_or_default())
}

/// Enumerates every minimal `a -> b` path and counts those avoiding `forbidden`.
pub fn brute_force_avoid(
    shape: &MeshShape,
    a: &Coord,
    b: &Coord,
    forbidden: &HashSet<Coord>,
    cap: u64,
) -> Result<BigUint> {
    shape.check(a)?;
    shape.check(b)?;
    let total = lt(a, b);
    if total > BigUint::from(cap) {
        return Err(Error::EnumerationCap {
            count: total.to_string(),
            cap,
        });
    }
    fn walk(cur: &mut Coord, b: &Coord, forbidden: &HashSet<Coord>) -> u64 {
        if forbidden.contains(cur) {
            return 0;
        }
        if cur == b {
            return 1;
        }
        let mut found = 0;
        for i in 0..cur.dims() {
            let (x, y) = (cur.0[i], b.0[i]);
            if x == y {
                continue;
            }
            cur.0[i] = if y > x { x + 1 } else { x - 1 };
            found += walk(cur, b, forbidden);
            cur.0[i] = x;
        }
        found
    }
    Ok(BigUint::from(walk(&mut a.clone(), b, forbidden)))
}
