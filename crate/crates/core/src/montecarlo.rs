//! Monte-Carlo estimate of the hit probability.
//!
//! Each sample draws an unordered pair of distinct healthy nodes uniformly,
//! then a minimal path between them uniformly, and records whether the path
//! visits any obstacle (endpoints included). Pairs carry very different
//! numbers of paths, so samples are weighted by `lt(a, b)` and the estimate
//! is the ratio `sum(w * hit) / sum(w)`, which is consistent for the
//! path-uniform hit probability.
//!
//! Samples are grouped into fixed blocks of [`BLOCK_SIZE`]; block `k` draws
//! from ChaCha stream `k` of the seed. Blocks are merged in index order, so
//! the estimate depends only on `(seed, samples)` and never on `workers`.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fault::FaultComplex;
use crate::mesh::{Coord, MeshShape};
use crate::paths::PathCounter;
use crate::reliability::{render_ratio, Probability};

pub const BLOCK_SIZE: u64 = 4096;

/// Estimates further than this many standard errors from the exact value fail.
pub const AGREEMENT_SIGMAS: f64 = 4.0;

pub const ESTIMATOR: &str = "lt-weighted ratio over uniform unordered pairs";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct McConfig {
    pub samples: u64,
    pub seed: u64,
    pub workers: usize,
}

impl McConfig {
    pub fn new(samples: u64, seed: u64) -> Self {
        McConfig {
            samples,
            seed,
            workers: rayon::current_num_threads().max(1),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct McEstimate {
    pub p_hat: f64,
    pub std_error: f64,
    pub samples: u64,
    pub seed: u64,
    /// Exact `sum(w * hit)`.
    #[serde(serialize_with = "ser_display")]
    pub hit_weight: BigUint,
    /// Exact `sum(w)`.
    #[serde(serialize_with = "ser_display")]
    pub total_weight: BigUint,
    pub estimator: &'static str,
}

fn ser_display<T: std::fmt::Display, S: serde::Serializer>(v: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

impl McEstimate {
    pub fn render(&self, precision: usize) -> String {
        render_ratio(&self.hit_weight, &self.total_weight, precision)
    }
}

/// Draws one minimal path uniformly: each hop picks dimension `i` with
/// probability proportional to the hops still owed in that dimension.
pub fn sample_minimal_path<R: Rng + ?Sized>(rng: &mut R, a: &Coord, b: &Coord) -> Vec<Coord> {
    let mut remaining: Vec<usize> = a.0.iter().zip(&b.0).map(|(&x, &y)| x.abs_diff(y)).collect();
    let mut left: usize = remaining.iter().sum();
    let mut cur = a.clone();
    let mut path = Vec::with_capacity(left + 1);
    path.push(cur.clone());
    while left > 0 {
        let dim = pick_dimension(rng, &remaining, left);
        if b.0[dim] > cur.0[dim] {
            cur.0[dim] += 1;
        } else {
            cur.0[dim] -= 1;
        }
        remaining[dim] -= 1;
        left -= 1;
        path.push(cur.clone());
    }
    path
}

fn pick_dimension<R: Rng + ?Sized>(rng: &mut R, remaining: &[usize], left: usize) -> usize {
    let mut r = rng.random_range(0..left);
    for (i, &d) in remaining.iter().enumerate() {
        if r < d {
            return i;
        }
        r -= d;
    }
    unreachable!("remaining hops sum to `left`")
}

#[derive(Clone, Debug, Default)]
struct BlockSums {
    weight: BigUint,
    hit_weight: BigUint,
    // float moments for the delta-method variance
    w: f64,
    wh: f64,
    w2: f64,
    w2h: f64,
}

struct Sampler<'a> {
    shape: &'a MeshShape,
    strides: Vec<usize>,
    healthy: Vec<usize>,
    obstacle: Vec<bool>,
    counter: PathCounter,
    /// Scale keeping float weights near 1.
    scale: f64,
}

impl Sampler<'_> {
    fn block(&self, seed: u64, index: u64, count: u64) -> BlockSums {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        let k = self.healthy.len();
        let n = self.shape.dims();
        let mut sums = BlockSums::default();
        let mut remaining = vec![0usize; n];
        for _ in 0..count {
            let i = rng.random_range(0..k);
            let mut j = rng.random_range(0..k - 1);
            if j >= i {
                j += 1;
            }
            let (ai, bi) = (self.healthy[i], self.healthy[j]);
            let a = self.shape.coord_of(ai);
            let b = self.shape.coord_of(bi);
            let weight = self.counter.lt(&a, &b);

            for (r, (&x, &y)) in remaining.iter_mut().zip(a.0.iter().zip(&b.0)) {
                *r = x.abs_diff(y);
            }
            let mut left: usize = remaining.iter().sum();
            let mut cur = ai;
            let mut hit = self.obstacle[cur];
            while left > 0 {
                let dim = pick_dimension(&mut rng, &remaining, left);
                if b.0[dim] > a.0[dim] {
                    cur += self.strides[dim];
                } else {
                    cur -= self.strides[dim];
                }
                remaining[dim] -= 1;
                left -= 1;
                hit |= self.obstacle[cur];
            }

            let w = weight.to_f64().unwrap_or(f64::MAX) / self.scale;
            sums.w += w;
            sums.w2 += w * w;
            if hit {
                sums.hit_weight += &weight;
                sums.wh += w;
                sums.w2h += w * w;
            }
            sums.weight += weight;
        }
        sums
    }
}

pub fn estimate_p_hit(shape: &MeshShape, complex: &FaultComplex, cfg: &McConfig) -> Result<McEstimate> {
    if cfg.samples == 0 {
        return Err(Error::NoSamples);
    }
    if cfg.workers == 0 {
        return Err(Error::NoWorkers);
    }
    let (faulty, obstacle) = complex.masks(shape);
    let healthy: Vec<usize> = (0..shape.len()).filter(|&i| !faulty[i]).collect();
    if healthy.len() < 2 {
        return Err(Error::NoPairs);
    }
    let counter = PathCounter::for_shape(shape);
    let corner: Vec<usize> = shape.radices().iter().map(|r| r - 1).collect();
    let scale = counter.multinomial(&corner).to_f64().unwrap_or(f64::MAX);
    let sampler = Sampler {
        shape,
        strides: shape.strides(),
        healthy,
        obstacle,
        counter,
        scale,
    };
    let blocks = cfg.samples.div_ceil(BLOCK_SIZE);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .expect("thread pool");
    let parts: Vec<BlockSums> = pool.install(|| {
        (0..blocks)
            .into_par_iter()
            .map(|k| {
                let count = BLOCK_SIZE.min(cfg.samples - k * BLOCK_SIZE);
                sampler.block(cfg.seed, k, count)
            })
            .collect()
    });
    let mut total = BlockSums::default();
    for p in parts {
        total.weight += p.weight;
        total.hit_weight += p.hit_weight;
        total.w += p.w;
        total.wh += p.wh;
        total.w2 += p.w2;
        total.w2h += p.w2h;
    }
    let p_hat = if total.weight.is_zero() {
        0.0
    } else {
        Probability::new(total.hit_weight.clone(), total.weight.clone()).to_f64()
    };
    Ok(McEstimate {
        p_hat,
        std_error: ratio_std_error(&total, cfg.samples),
        samples: cfg.samples,
        seed: cfg.seed,
        hit_weight: total.hit_weight,
        total_weight: total.weight,
        estimator: ESTIMATOR,
    })
}

/// Delta-method standard error of `R = sum(w h) / sum(w)`:
/// `sqrt(n / (n - 1) * sum(w_i^2 (h_i - R)^2)) / sum(w)`.
fn ratio_std_error(s: &BlockSums, n: u64) -> f64 {
    if n < 2 || s.w <= 0.0 {
        return 0.0;
    }
    let r = s.wh / s.w;
    // h is 0/1, so sum w^2 (h - r)^2 = (1 - 2r) sum w^2 h + r^2 sum w^2
    let resid = ((1.0 - 2.0 * r) * s.w2h + r * r * s.w2).max(0.0);
    let n = n as f64;
    (resid * n / (n - 1.0)).sqrt() / s.w
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct McComparison {
    pub exact: f64,
    pub exact_fraction: String,
    pub estimate: McEstimate,
    /// `|p_hat - exact| / std_error`; infinite if they differ with zero error.
    pub sigmas: f64,
    pub agrees: bool,
}

/// Compares an estimate with an exact hit probability at [`AGREEMENT_SIGMAS`].
pub fn compare(exact: &Probability, estimate: McEstimate) -> McComparison {
    let x = exact.to_f64();
    let diff = (estimate.p_hat - x).abs();
    let sigmas = if estimate.std_error > 0.0 {
        diff / estimate.std_error
    } else if diff < 1e-12 {
        0.0
    } else {
        f64::INFINITY
    };
    McComparison {
        exact: x,
        exact_fraction: exact.fraction(),
        estimate,
        sigmas,
        agrees: sigmas <= AGREEMENT_SIGMAS,
    }
}

/// Runs the exact analysis and the estimator on the same scenario.
pub fn mc_vs_exact(
    shape: &MeshShape,
    complex: &FaultComplex,
    opts: &crate::reliability::AnalysisOptions,
    cfg: &McConfig,
) -> Result<McComparison> {
    let exact = crate::reliability::p_miss(shape, complex, opts)?;
    let estimate = estimate_p_hit(shape, complex, cfg)?;
    Ok(compare(&exact.p_hit, estimate))
}
