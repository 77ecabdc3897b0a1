//! Exact hit/miss probabilities aggregated over all source-destination pairs.
//!
//! The denominator counts every minimal path between two distinct healthy
//! nodes, including paths that pass through faulty nodes. The numerator
//! counts, over pairs of nodes outside the fault-ring set `FR`, the minimal
//! paths that avoid `FR` entirely. Pairs are unordered and distinct; every
//! count is symmetric in its endpoints, so the ordered convention would
//! double both sums and leave the ratio unchanged.

use std::collections::HashSet;
use std::fmt;

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fault::{Classification, FaultComplex};
use crate::mesh::{bounding_box, Coord, MeshShape};
use crate::paths::{avoid_count_det_with, avoid_count_dp, PathCounter};

pub const PAIR_CONVENTION: &str = "unordered-distinct";

/// Default work budget; see [`predicted_cost`].
pub const DEFAULT_BUDGET: f64 = 1e10;

/// Restriction sets this small are always cross-checked in full under `Auto`.
pub const FULL_CHECK_MAX_OBSTACLES: usize = 10;

/// Sampled cross-checks visit roughly this many pairs.
const SAMPLE_TARGET: usize = 256;

/// Sampled determinant checks skip pairs with larger restriction sets.
const SAMPLE_MAX_RESTRICTION: usize = 40;

/// Exact probability held as a reduced fraction.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Probability(Ratio<BigUint>);

impl Probability {
    pub fn new(numerator: BigUint, denominator: BigUint) -> Self {
        assert!(!denominator.is_zero(), "probability denominator must be positive");
        assert!(numerator <= denominator, "probability exceeds one");
        Probability(Ratio::new(numerator, denominator))
    }

    pub fn zero() -> Self {
        Probability(Ratio::zero())
    }

    pub fn one() -> Self {
        Probability(Ratio::one())
    }

    pub fn numer(&self) -> &BigUint {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigUint {
        self.0.denom()
    }

    pub fn complement(&self) -> Self {
        Probability(Ratio::one() - &self.0)
    }

    pub fn to_f64(&self) -> f64 {
        // ratios of huge integers overflow a naive f64 division
        let (n, d) = (self.numer(), self.denom());
        let shift = d.bits().saturating_sub(60);
        let (n, d) = (n >> shift, d >> shift);
        match (n.to_f64(), d.to_f64()) {
            (Some(n), Some(d)) if d > 0.0 => n / d,
            _ => 0.0,
        }
    }

    /// Decimal string with `precision` digits, rounded half to even.
    pub fn render(&self, precision: usize) -> String {
        render_ratio(self.numer(), self.denom(), precision)
    }

    /// `numerator/denominator` in lowest terms.
    pub fn fraction(&self) -> String {
        format!("{}/{}", self.numer(), self.denom())
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.fraction())
    }
}

pub fn render_ratio(numer: &BigUint, denom: &BigUint, precision: usize) -> String {
    let scale = BigUint::from(10u32).pow(precision as u32);
    let scaled = numer * &scale;
    let mut q = &scaled / denom;
    let twice_rem = (&scaled % denom) * 2u32;
    if twice_rem > *denom || (twice_rem == *denom && (&q % 2u32) == BigUint::one()) {
        q += 1u32;
    }
    let int = &q / &scale;
    if precision == 0 {
        return int.to_string();
    }
    let frac = (&q % &scale).to_string();
    format!("{int}.{frac:0>precision$}")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    #[serde(rename = "det")]
    Determinant,
    #[serde(rename = "dp")]
    Dp,
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Engine::Determinant => write!(f, "det"),
            Engine::Dp => write!(f, "dp"),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnginePolicy {
    #[serde(rename = "det")]
    Determinant,
    Dp,
    #[default]
    Auto,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CrossCheck {
    Off,
    Sample,
    Full,
}

impl fmt::Display for CrossCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CrossCheck::Off => write!(f, "off"),
            CrossCheck::Sample => write!(f, "sample"),
            CrossCheck::Full => write!(f, "full"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnalysisOptions {
    pub engine: EnginePolicy,
    /// `None` lets engine selection decide.
    pub cross_check: Option<CrossCheck>,
    pub budget: f64,
    pub workers: usize,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            engine: EnginePolicy::Auto,
            cross_check: None,
            budget: DEFAULT_BUDGET,
            workers: rayon::current_num_threads().max(1),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EngineChoice {
    pub engine: Engine,
    pub cross_check: CrossCheck,
}

/// Work estimates for each engine, in big-integer operations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CostEstimate {
    /// Pairs outside `FR` times a cubic determinant on the full obstacle set.
    pub determinant: f64,
    /// Pairs outside `FR` are swept per source over every orthant.
    pub dp: f64,
}

impl CostEstimate {
    pub fn cheapest(&self) -> f64 {
        self.determinant.min(self.dp)
    }
}

pub fn predicted_cost(shape: &MeshShape, complex: &FaultComplex) -> CostEstimate {
    let outside = (shape.len() - complex.obstacles.len()) as f64;
    let pairs = outside * (outside - 1.0).max(0.0) / 2.0;
    let m = complex.obstacles.len() as f64 + 1.0;
    let orthants: f64 = shape.radices().iter().map(|&r| (r + 1) as f64).product();
    CostEstimate {
        determinant: pairs * m * m * m,
        dp: outside * orthants * shape.dims() as f64,
    }
}

/// Picks the counting engine. An explicit policy always wins; `Auto` uses
/// the determinant unless its predicted cost exceeds `budget`, capped at
/// [`DEFAULT_BUDGET`] so that raising the budget admits larger scenarios
/// without forcing the slower engine onto them.
pub fn engine_select(
    shape: &MeshShape,
    complex: &FaultComplex,
    policy: EnginePolicy,
    budget: f64,
) -> EngineChoice {
    let small = complex.obstacles.len() <= FULL_CHECK_MAX_OBSTACLES;
    let sample_or_full = if small { CrossCheck::Full } else { CrossCheck::Sample };
    match policy {
        EnginePolicy::Determinant => EngineChoice {
            engine: Engine::Determinant,
            cross_check: sample_or_full,
        },
        EnginePolicy::Dp => EngineChoice {
            engine: Engine::Dp,
            cross_check: CrossCheck::Sample,
        },
        EnginePolicy::Auto => {
            if predicted_cost(shape, complex).determinant > budget.min(DEFAULT_BUDGET) {
                EngineChoice {
                    engine: Engine::Dp,
                    cross_check: CrossCheck::Sample,
                }
            } else {
                EngineChoice {
                    engine: Engine::Determinant,
                    cross_check: sample_or_full,
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReliabilityResult {
    #[serde(serialize_with = "ser_display")]
    pub total_paths: BigUint,
    #[serde(serialize_with = "ser_display")]
    pub miss_paths: BigUint,
    #[serde(serialize_with = "ser_display")]
    pub p_miss: Probability,
    #[serde(serialize_with = "ser_display")]
    pub p_hit: Probability,
    pub engine: Engine,
    pub cross_check: CrossCheck,
    pub cross_checked_pairs: usize,
    pub pair_convention: &'static str,
    pub classification: Classification,
}

fn ser_display<T: fmt::Display, S: serde::Serializer>(v: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    if workers == 0 {
        return Err(Error::NoWorkers);
    }
    Ok(rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("thread pool"))
}

/// Sum of `lt(a, b)` over unordered pairs of distinct healthy nodes.
pub fn total_paths(shape: &MeshShape, faulty: &HashSet<Coord>) -> Result<BigUint> {
    total_paths_with(shape, faulty, rayon::current_num_threads().max(1))
}

pub fn total_paths_with(shape: &MeshShape, faulty: &HashSet<Coord>, workers: usize) -> Result<BigUint> {
    let healthy: Vec<Coord> = shape.nodes().filter(|v| !faulty.contains(v)).collect();
    if healthy.len() < 2 {
        return Err(Error::NoPairs);
    }
    let counter = PathCounter::for_shape(shape);
    let partial: Vec<BigUint> = pool(workers)?.install(|| {
        (0..healthy.len())
            .into_par_iter()
            .map(|i| {
                healthy[i + 1..]
                    .iter()
                    .map(|b| counter.lt(&healthy[i], b))
                    .sum::<BigUint>()
            })
            .collect()
    });
    Ok(partial.into_iter().sum())
}

/// Outcome of the numerator sum.
#[derive(Clone, Debug, PartialEq)]
pub struct MissCount {
    pub miss_paths: BigUint,
    pub choice: EngineChoice,
    pub cross_checked_pairs: usize,
}

/// Sum over unordered pairs outside `FR` of the paths avoiding `FR`.
pub fn miss_paths(shape: &MeshShape, complex: &FaultComplex, opts: &AnalysisOptions) -> Result<MissCount> {
    let mut choice = engine_select(shape, complex, opts.engine, opts.budget);
    if let Some(cc) = opts.cross_check {
        choice.cross_check = cc;
    }
    let (_, obstacle) = complex.masks(shape);
    let outside: Vec<usize> = (0..shape.len()).filter(|&i| !obstacle[i]).collect();
    let pairs = outside.len() * outside.len().saturating_sub(1) / 2;
    let stride = match choice.cross_check {
        CrossCheck::Off => 0,
        CrossCheck::Full => 1,
        CrossCheck::Sample => (pairs / SAMPLE_TARGET).max(1),
    };
    let ctx = Ctx {
        shape,
        counter: PathCounter::for_shape(shape),
        obstacle: &obstacle,
        obstacle_list: complex.obstacles.iter().cloned().collect(),
        obstacle_set: complex.obstacles.iter().cloned().collect(),
        outside: &outside,
        stride,
        engine: choice.engine,
    };
    let partial: Vec<Result<(BigUint, usize)>> =
        pool(opts.workers)?.install(|| (0..outside.len()).into_par_iter().map(|i| ctx.source(i)).collect());
    let mut miss = BigUint::zero();
    let mut checked = 0;
    for p in partial {
        let (m, c) = p?;
        miss += m;
        checked += c;
    }
    Ok(MissCount {
        miss_paths: miss,
        choice,
        cross_checked_pairs: checked,
    })
}

struct Ctx<'a> {
    shape: &'a MeshShape,
    counter: PathCounter,
    obstacle: &'a [bool],
    obstacle_list: Vec<Coord>,
    obstacle_set: HashSet<Coord>,
    outside: &'a [usize],
    /// Every `stride`-th pair in canonical order is cross-checked; 0 disables.
    stride: usize,
    engine: Engine,
}

impl Ctx<'_> {
    /// Canonical rank of pair `(i, j)`, `i < j`, among outside nodes.
    fn pair_rank(&self, i: usize, j: usize) -> usize {
        let n = self.outside.len();
        i * n - i * (i + 1) / 2 + (j - i - 1)
    }

    fn sampled(&self, i: usize, j: usize) -> bool {
        self.stride > 0 && self.pair_rank(i, j).is_multiple_of(self.stride)
    }

    fn restriction(&self, a: &Coord, b: &Coord) -> Vec<Coord> {
        let bx = bounding_box(a, b);
        self.obstacle_list.iter().filter(|c| bx.contains(c)).cloned().collect()
    }

    fn source(&self, i: usize) -> Result<(BigUint, usize)> {
        let a = self.shape.coord_of(self.outside[i]);
        let mut total = BigUint::zero();
        let mut checked = 0;
        match self.engine {
            Engine::Determinant => {
                for j in i + 1..self.outside.len() {
                    let b = self.shape.coord_of(self.outside[j]);
                    let points = self.restriction(&a, &b);
                    let det = avoid_count_det_with(&self.counter, &a, &b, &points)?;
                    if self.sampled(i, j) {
                        let dp = avoid_count_dp(self.shape, &a, &b, &self.obstacle_set)?;
                        if dp != det {
                            return Err(cross_check_error(a, b, &det, &dp));
                        }
                        checked += 1;
                    }
                    total += det;
                }
            }
            Engine::Dp => {
                let counts = if fits_u128(self.shape) {
                    Swept::Small(sweep::<u128>(self.shape, &a, self.obstacle))
                } else {
                    Swept::Big(sweep::<BigUint>(self.shape, &a, self.obstacle))
                };
                for j in i + 1..self.outside.len() {
                    let count = counts.get(self.outside[j]);
                    if self.sampled(i, j) {
                        let b = self.shape.coord_of(self.outside[j]);
                        let points = self.restriction(&a, &b);
                        if points.len() <= SAMPLE_MAX_RESTRICTION || self.stride == 1 {
                            let det = avoid_count_det_with(&self.counter, &a, &b, &points)?;
                            if det != count {
                                return Err(cross_check_error(a, b, &det, &count));
                            }
                            checked += 1;
                        }
                    }
                    total += count;
                }
            }
        }
        Ok((total, checked))
    }
}

fn cross_check_error(a: Coord, b: Coord, det: &BigUint, dp: &BigUint) -> Error {
    Error::CrossCheck {
        a,
        b,
        determinant: det.to_string(),
        dynamic: dp.to_string(),
    }
}

/// Largest minimal path count in the mesh fits comfortably in a `u128`.
fn fits_u128(shape: &MeshShape) -> bool {
    let d: Vec<usize> = shape.radices().iter().map(|r| r - 1).collect();
    PathCounter::for_shape(shape).multinomial(&d).bits() < 127
}

enum Swept {
    Small(Vec<u128>),
    Big(Vec<BigUint>),
}

impl Swept {
    fn get(&self, idx: usize) -> BigUint {
        match self {
            Swept::Small(v) => BigUint::from(v[idx]),
            Swept::Big(v) => v[idx].clone(),
        }
    }
}

trait Cell: Clone + Send {
    fn empty() -> Self;
    fn unit() -> Self;
    fn add(&mut self, other: &Self);
}

impl Cell for u128 {
    fn empty() -> Self {
        0
    }
    fn unit() -> Self {
        1
    }
    fn add(&mut self, other: &Self) {
        *self += *other;
    }
}

impl Cell for BigUint {
    fn empty() -> Self {
        Zero::zero()
    }
    fn unit() -> Self {
        One::one()
    }
    fn add(&mut self, other: &Self) {
        *self += other;
    }
}

/// Obstacle-avoiding minimal path counts from `a` to every node, indexed by
/// linear node index. Each orthant around `a` is an independent DAG swept in
/// order of increasing distance; nodes on shared faces get the same value
/// from every orthant that contains them.
fn sweep<T: Cell>(shape: &MeshShape, a: &Coord, blocked: &[bool]) -> Vec<T> {
    let n = shape.dims();
    let strides = shape.strides();
    let origin = shape.index_of(a);
    let mut out = vec![T::empty(); shape.len()];
    let mut local = vec![0usize; n];
    let mut buf: Vec<T> = Vec::new();
    for orthant in 0..(1usize << n) {
        let forward: Vec<bool> = (0..n).map(|i| orthant >> i & 1 == 0).collect();
        let sides: Vec<usize> = (0..n)
            .map(|i| if forward[i] { shape.radices()[i] - a.0[i] } else { a.0[i] + 1 })
            .collect();
        let mut lstrides = vec![1usize; n];
        for i in 1..n {
            lstrides[i] = lstrides[i - 1] * sides[i - 1];
        }
        let volume = lstrides[n - 1] * sides[n - 1];
        buf.clear();
        buf.resize(volume, T::empty());
        local.iter_mut().for_each(|x| *x = 0);
        let mut global = origin;
        for idx in 0..volume {
            if idx > 0 {
                let mut d = 0;
                while local[d] + 1 == sides[d] {
                    if forward[d] {
                        global -= local[d] * strides[d];
                    } else {
                        global += local[d] * strides[d];
                    }
                    local[d] = 0;
                    d += 1;
                }
                local[d] += 1;
                if forward[d] {
                    global += strides[d];
                } else {
                    global -= strides[d];
                }
            }
            if blocked[global] {
                continue;
            }
            if idx == 0 {
                buf[0] = T::unit();
            } else {
                let mut acc = T::empty();
                for i in 0..n {
                    if local[i] > 0 {
                        acc.add(&buf[idx - lstrides[i]]);
                    }
                }
                buf[idx] = acc;
            }
            out[global] = buf[idx].clone();
        }
    }
    out
}

/// Full exact analysis: `P_miss = miss / total`, `P_hit = 1 - P_miss`.
pub fn p_miss(shape: &MeshShape, complex: &FaultComplex, opts: &AnalysisOptions) -> Result<ReliabilityResult> {
    let faulty: HashSet<Coord> = complex.faulty.iter().cloned().collect();
    let total = total_paths_with(shape, &faulty, opts.workers)?;
    let miss = miss_paths(shape, complex, opts)?;
    let p_miss = Probability::new(miss.miss_paths.clone(), total.clone());
    Ok(ReliabilityResult {
        p_hit: p_miss.complement(),
        p_miss,
        total_paths: total,
        miss_paths: miss.miss_paths,
        engine: miss.choice.engine,
        cross_check: miss.choice.cross_check,
        cross_checked_pairs: miss.cross_checked_pairs,
        pair_convention: PAIR_CONVENTION,
        classification: complex.classification,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fault::{build_complex, FaultSpec};

    fn shape(r: &[usize]) -> MeshShape {
        MeshShape::new(r.to_vec()).unwrap()
    }

    fn opts(engine: EnginePolicy, cc: CrossCheck) -> AnalysisOptions {
        AnalysisOptions {
            engine,
            cross_check: Some(cc),
            ..Default::default()
        }
    }

    #[test]
    fn rendering_rounds_half_to_even() {
        let r = |n: u32, d: u32, p| render_ratio(&BigUint::from(n), &BigUint::from(d), p);
        assert_eq!(r(1, 8, 2), "0.12");
        assert_eq!(r(3, 8, 2), "0.38");
        assert_eq!(r(1, 1, 3), "1.000");
        assert_eq!(r(0, 5, 3), "0.000");
        assert_eq!(r(2, 3, 3), "0.667");
        assert_eq!(r(1, 2, 0), "0");
        assert_eq!(r(3, 2, 0), "2");
    }

    #[test]
    fn small_totals() {
        assert_eq!(total_paths(&shape(&[2, 2]), &HashSet::new()).unwrap(), BigUint::from(8u32));
        let f: HashSet<Coord> = [Coord::from([1, 1])].into();
        assert_eq!(total_paths(&shape(&[2, 2]), &f).unwrap(), BigUint::from(4u32));
        let all: HashSet<Coord> = shape(&[2, 2]).nodes().skip(1).collect();
        assert_eq!(total_paths(&shape(&[2, 2]), &all), Err(Error::NoPairs));
    }

    #[test]
    fn fault_free_mesh_never_hits() {
        let s = shape(&[4, 3]);
        let r = p_miss(&s, &FaultComplex::fault_free(), &AnalysisOptions::default()).unwrap();
        assert_eq!(r.total_paths, r.miss_paths);
        assert_eq!(r.p_hit, Probability::zero());
        assert_eq!(r.classification, Classification::FaultFree);
    }

    #[test]
    fn ring_covering_mesh_always_hits() {
        let s = shape(&[3, 2, 2]);
        let c = build_complex(&s, &FaultSpec::rect([1, 1, 0], [1, 1, 1])).unwrap();
        let r = p_miss(&s, &c, &AnalysisOptions::default()).unwrap();
        assert!(r.miss_paths.is_zero());
        assert_eq!(r.p_hit, Probability::one());
        assert_eq!(r.p_hit.render(3), "1.000");
    }

    #[test]
    fn engines_agree_on_small_mesh() {
        let s = shape(&[4, 4]);
        let c = build_complex(&s, &FaultSpec::rect([1, 1], [1, 1])).unwrap();
        let det = miss_paths(&s, &c, &opts(EnginePolicy::Determinant, CrossCheck::Full)).unwrap();
        let dp = miss_paths(&s, &c, &opts(EnginePolicy::Dp, CrossCheck::Full)).unwrap();
        assert_eq!(det.miss_paths, dp.miss_paths);
        assert_eq!(det.cross_checked_pairs, 21);
        // seven nodes survive outside FR; pair (3,0)-(3,3) has a single path
        let obstacles: HashSet<Coord> = c.obstacles.iter().cloned().collect();
        assert_eq!(
            avoid_count_dp(&s, &Coord::from([3, 0]), &Coord::from([3, 3]), &obstacles).unwrap(),
            BigUint::one()
        );
    }

    #[test]
    fn fault_free_miss_equals_total() {
        let s = shape(&[3, 4]);
        let m = miss_paths(&s, &FaultComplex::fault_free(), &AnalysisOptions::default()).unwrap();
        assert_eq!(m.miss_paths, total_paths(&s, &HashSet::new()).unwrap());
    }

    #[test]
    fn selection_rules() {
        let s = shape(&[7, 8, 11]);
        let c = build_complex(&s, &FaultSpec::rect([2, 2, 2], [2, 1, 3])).unwrap();
        assert_eq!(c.obstacles.len(), 60);
        assert_eq!(engine_select(&s, &c, EnginePolicy::Auto, DEFAULT_BUDGET).engine, Engine::Dp);
        assert_eq!(
            engine_select(&s, &c, EnginePolicy::Determinant, DEFAULT_BUDGET).engine,
            Engine::Determinant
        );
        let c = build_complex(&s, &FaultSpec::rect([3, 3, 3], [1, 1, 1])).unwrap();
        assert_eq!(c.obstacles.len(), 27);
        let s = shape(&[6, 6]);
        let c = build_complex(&s, &FaultSpec::rect([0, 0], [1, 2])).unwrap();
        assert!(c.obstacles.len() <= FULL_CHECK_MAX_OBSTACLES);
        let choice = engine_select(&s, &c, EnginePolicy::Auto, DEFAULT_BUDGET);
        assert_eq!(choice, EngineChoice { engine: Engine::Determinant, cross_check: CrossCheck::Full });
        assert_eq!(engine_select(&s, &c, EnginePolicy::Dp, DEFAULT_BUDGET).engine, Engine::Dp);
    }

    #[test]
    fn results_independent_of_worker_count() {
        let s = shape(&[5, 4, 3]);
        let c = build_complex(&s, &FaultSpec::rect([1, 1, 1], [2, 1, 1])).unwrap();
        let mut o = opts(EnginePolicy::Dp, CrossCheck::Off);
        o.workers = 1;
        let one = p_miss(&s, &c, &o).unwrap();
        o.workers = 4;
        assert_eq!(p_miss(&s, &c, &o).unwrap(), one);
    }
}
