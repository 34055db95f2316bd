//! Sampling estimates of `mu_p`, influences and `p(alpha)` for functions
//! given only as an evaluation oracle.
//!
//! Randomness: every run is cut into chunks of [`CHUNK`] samples. Chunk `c`
//! of phase `k` draws from ChaCha8 seeded with `seed_from_u64(seed)` on
//! stream `(k << 32) | c`. Plain estimates use phase 0 and bisection step
//! `s` uses phase `s + 1`. Chunk counts are integers summed in chunk order,
//! so results do not depend on the worker count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::format::RNG_ID;
use crate::hypercube::{BooleanFunction, FamilySpec};
use crate::measure::Bias;

pub const CHUNK: u64 = 4096;
/// Largest sample count a bisection step may grow to.
pub const DEFAULT_SAMPLE_CAP: u64 = 1 << 24;
/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// A point of `{0,1}^n` stored as little-endian words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Point {
    n: usize,
    words: Vec<u64>,
}

impl Point {
    pub fn zeros(n: usize) -> Self {
        Point {
            n,
            words: vec![0; n.div_ceil(64).max(1)],
        }
    }

    pub fn ones(n: usize) -> Self {
        let mut x = Point::zeros(n);
        for i in 0..n {
            x.set(i, true);
        }
        x
    }

    pub fn arity(&self) -> usize {
        self.n
    }

    /// Coordinate `i` (0-based).
    #[inline]
    pub fn get(&self, i: usize) -> bool {
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// The point's index in a dense table (`n <= 64`).
    pub fn index(&self) -> usize {
        self.words[0] as usize
    }

    pub fn le(&self, other: &Point) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }
}

/// A black-box Boolean function.
pub trait Oracle: Sync {
    fn arity(&self) -> usize;
    fn eval(&self, x: &Point) -> bool;
    fn monotone_declared(&self) -> bool;
    fn describe(&self) -> String;
}

/// A named family evaluated directly on points, at any arity.
#[derive(Debug, Clone, Copy)]
pub struct FamilyOracle(pub FamilySpec);

impl FamilyOracle {
    pub fn new(spec: FamilySpec) -> Result<Self> {
        spec.validate()?;
        Ok(FamilyOracle(spec))
    }
}

impl Oracle for FamilyOracle {
    fn arity(&self) -> usize {
        self.0.arity()
    }

    fn eval(&self, x: &Point) -> bool {
        match self.0 {
            FamilySpec::Dictator { i, .. } => x.get(i - 1),
            FamilySpec::AndAll { n } => x.count_ones() == n,
            FamilySpec::OrAll { .. } => x.count_ones() > 0,
            FamilySpec::Majority { n } => 2 * x.count_ones() > n,
            FamilySpec::Parity { .. } => x.count_ones() % 2 == 1,
            FamilySpec::Tribes { k, m } => (0..m).any(|b| (0..k).all(|j| x.get(b * k + j))),
            FamilySpec::CyclicRun { n, len } => {
                (0..n).any(|start| (0..len).all(|off| x.get((start + off) % n)))
            }
        }
    }

    fn monotone_declared(&self) -> bool {
        !matches!(self.0, FamilySpec::Parity { .. })
    }

    fn describe(&self) -> String {
        self.0.to_string()
    }
}

/// A dense table used as an oracle.
#[derive(Debug, Clone)]
pub struct TableOracle {
    table: BooleanFunction,
    monotone: bool,
}

impl TableOracle {
    pub fn new(table: BooleanFunction) -> Self {
        let monotone = table.is_monotone();
        TableOracle { table, monotone }
    }
}

impl Oracle for TableOracle {
    fn arity(&self) -> usize {
        self.table.arity()
    }

    fn eval(&self, x: &Point) -> bool {
        self.table.get(x.index())
    }

    fn monotone_declared(&self) -> bool {
        self.monotone
    }

    fn describe(&self) -> String {
        self.table.to_hex_string()
    }
}

/// Connectivity of a graph on `m` vertices. Edge `{a, b}` with `a < b`
/// (1-based) is coordinate number `(a, b)` in lexicographic order:
/// `{1,2}, {1,3}, ..., {1,m}, {2,3}, ...`.
#[derive(Debug, Clone)]
pub struct ConnectivityOracle {
    m: usize,
    edges: Vec<(usize, usize)>,
}

pub fn connectivity_oracle(m: usize) -> Result<ConnectivityOracle> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!(
            "connectivity needs m >= 2 vertices, got {m}"
        )));
    }
    let edges = (0..m)
        .flat_map(|a| (a + 1..m).map(move |b| (a, b)))
        .collect();
    Ok(ConnectivityOracle { m, edges })
}

impl ConnectivityOracle {
    pub fn vertices(&self) -> usize {
        self.m
    }

    /// Coordinate (1-based) of the edge between vertices `a` and `b` (1-based).
    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        let (a, b) = (a.min(b), a.max(b));
        if a == 0 || a == b || b > self.m {
            return None;
        }
        let (a, b) = (a - 1, b - 1);
        // edges before row a: sum over r < a of (m - 1 - r)
        Some(a * (2 * self.m - a - 1) / 2 + (b - a - 1) + 1)
    }
}

fn find(parent: &mut [usize], mut v: usize) -> usize {
    while parent[v] != v {
        parent[v] = parent[parent[v]];
        v = parent[v];
    }
    v
}

impl Oracle for ConnectivityOracle {
    fn arity(&self) -> usize {
        self.edges.len()
    }

    fn eval(&self, x: &Point) -> bool {
        let mut parent: Vec<usize> = (0..self.m).collect();
        let mut components = self.m;
        for (e, &(a, b)) in self.edges.iter().enumerate() {
            if !x.get(e) {
                continue;
            }
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra] = rb;
                components -= 1;
                if components == 1 {
                    return true;
                }
            }
        }
        components == 1
    }

    fn monotone_declared(&self) -> bool {
        true
    }

    fn describe(&self) -> String {
        format!("connectivity:m={}", self.m)
    }
}

/// A proportion with its 95% Wilson interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    #[serde(serialize_with = "crate::format::decimal")]
    pub mean: f64,
    #[serde(serialize_with = "crate::format::decimal")]
    pub stderr: f64,
    pub samples: u64,
    pub successes: u64,
    #[serde(serialize_with = "crate::format::decimal")]
    pub ci_lo: f64,
    #[serde(serialize_with = "crate::format::decimal")]
    pub ci_hi: f64,
    pub seed: u64,
    pub rng: &'static str,
}

impl Estimate {
    pub fn from_counts(successes: u64, samples: u64, seed: u64) -> Self {
        let (ci_lo, ci_hi) = wilson(successes, samples);
        let mean = successes as f64 / samples as f64;
        Estimate {
            mean,
            stderr: (mean * (1.0 - mean) / samples as f64).sqrt(),
            samples,
            successes,
            ci_lo,
            ci_hi,
            seed,
            rng: RNG_ID,
        }
    }

    pub fn contains(&self, value: f64) -> bool {
        self.ci_lo <= value && value <= self.ci_hi
    }
}

/// 95% Wilson score interval, clamped so it always brackets the mean.
pub fn wilson(successes: u64, samples: u64) -> (f64, f64) {
    let nf = samples as f64;
    let phat = successes as f64 / nf;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / nf;
    let center = (phat + z2 / (2.0 * nf)) / denom;
    let half = Z95 * (phat * (1.0 - phat) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    let lo = if successes == 0 {
        0.0
    } else {
        (center - half).max(0.0).min(phat)
    };
    let hi = if successes == samples {
        1.0
    } else {
        (center + half).min(1.0).max(phat)
    };
    (lo, hi)
}

/// Bernoulli(p) threshold on `u64` draws.
fn cutoff(p: Bias) -> u64 {
    let t = p.p() * 18_446_744_073_709_551_616.0;
    if t >= u64::MAX as f64 {
        u64::MAX
    } else {
        t as u64
    }
}

fn fill(x: &mut Point, cut: u64, rng: &mut ChaCha8Rng) {
    for w in x.words.iter_mut() {
        *w = 0;
    }
    for i in 0..x.n {
        if rng.random::<u64>() < cut {
            x.words[i / 64] |= 1u64 << (i % 64);
        }
    }
}

/// A point with independent Bernoulli(p) coordinates.
pub fn sample_point(n: usize, p: Bias, rng: &mut ChaCha8Rng) -> Point {
    let mut x = Point::zeros(n);
    fill(&mut x, cutoff(p), rng);
    x
}

/// The generator for chunk `chunk` of phase `phase`.
pub fn chunk_rng(seed: u64, phase: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((phase << 32) | chunk);
    rng
}

/// Sampling controls.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sampler {
    pub seed: u64,
    pub workers: usize,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler { seed, workers: 1 }
    }

    pub fn workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }

    /// Counts successes of `trial` over chunks `[first, first + count)`.
    fn run_chunks<T>(&self, phase: u64, first: u64, samples: u64, trial: &T) -> u64
    where
        T: Fn(&mut ChaCha8Rng) -> bool + Sync,
    {
        let total = first * CHUNK + samples;
        let chunks: Vec<u64> = (first..total.div_ceil(CHUNK)).collect();
        let count = |c: &u64| -> u64 {
            let mut rng = chunk_rng(self.seed, phase, *c);
            let len = CHUNK.min(total - c * CHUNK);
            (0..len).filter(|_| trial(&mut rng)).count() as u64
        };
        if self.workers <= 1 || chunks.len() <= 1 {
            return chunks.iter().map(count).sum();
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .expect("thread pool");
        let per_chunk: Vec<u64> = pool.install(|| chunks.par_iter().map(count).collect());
        per_chunk.iter().sum()
    }
}

fn check_samples(samples: u64) -> Result<()> {
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be at least 1".into()));
    }
    Ok(())
}

fn mu_trial<'a>(
    f: &'a (impl Oracle + ?Sized),
    p: Bias,
) -> impl Fn(&mut ChaCha8Rng) -> bool + Sync + 'a {
    let cut = cutoff(p);
    let n = f.arity();
    move |rng| {
        let mut x = Point::zeros(n);
        fill(&mut x, cut, rng);
        f.eval(&x)
    }
}

/// Fraction of Bernoulli(p) points where `f` is 1.
pub fn estimate_mu(
    f: &(impl Oracle + ?Sized),
    p: Bias,
    samples: u64,
    sampler: Sampler,
) -> Result<Estimate> {
    check_samples(samples)?;
    let hits = sampler.run_chunks(0, 0, samples, &mu_trial(f, p));
    Ok(Estimate::from_counts(hits, samples, sampler.seed))
}

/// Fraction of sampled fibers along coordinate `i` (1-based) on which `f`
/// is nonconstant.
pub fn estimate_influence(
    f: &(impl Oracle + ?Sized),
    p: Bias,
    i: usize,
    samples: u64,
    sampler: Sampler,
) -> Result<Estimate> {
    check_samples(samples)?;
    let n = f.arity();
    if i == 0 || i > n {
        return Err(Error::CoordinateOutOfRange { index: i, n });
    }
    let cut = cutoff(p);
    let trial = move |rng: &mut ChaCha8Rng| {
        let mut x = Point::zeros(n);
        fill(&mut x, cut, rng);
        x.set(i - 1, false);
        let low = f.eval(&x);
        x.set(i - 1, true);
        low != f.eval(&x)
    };
    let hits = sampler.run_chunks(0, 0, samples, &trial);
    Ok(Estimate::from_counts(hits, samples, sampler.seed))
}

/// Draws `pairs` comparable pairs `x <= y` (y adds each absent coordinate
/// of x with probability 1/2) and counts pairs with `f(x) > f(y)`.
pub fn monotone_spot_check(f: &(impl Oracle + ?Sized), p: Bias, pairs: u64, seed: u64) -> u64 {
    let n = f.arity();
    let mut rng = chunk_rng(seed, u32::MAX as u64, 0);
    let mut violations = 0;
    for _ in 0..pairs {
        let x = sample_point(n, p, &mut rng);
        let mut y = x.clone();
        for j in 0..n {
            if !y.get(j) && rng.random::<bool>() {
                y.set(j, true);
            }
        }
        debug_assert!(x.le(&y));
        if f.eval(&x) && !f.eval(&y) {
            violations += 1;
        }
    }
    violations
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McThreshold {
    #[serde(serialize_with = "crate::format::decimal")]
    pub alpha: f64,
    #[serde(serialize_with = "crate::format::decimal")]
    pub p_hat: f64,
    #[serde(serialize_with = "crate::format::decimal_pair")]
    pub bracket: (f64, f64),
    pub estimate: Estimate,
    pub steps: u32,
    pub total_samples: u64,
    /// A step hit the sample cap with its interval still covering alpha.
    pub capped: bool,
}

/// Bisection for `mu_p = alpha` where a step moves the bracket only once
/// the Wilson interval at the midpoint excludes `alpha`, doubling the
/// samples up to `cap`. Stops when the bracket is narrower than `tol_p`,
/// or at a capped step (flagged). Returns the bracket midpoint and an
/// estimate there with `samples_per_step` samples.
pub fn mc_p_of_alpha(
    f: &(impl Oracle + ?Sized),
    alpha: f64,
    samples_per_step: u64,
    tol_p: f64,
    cap: u64,
    sampler: Sampler,
) -> Result<McThreshold> {
    if !f.monotone_declared() {
        return Err(Error::NotMonotone);
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidLevel(alpha));
    }
    if !(tol_p > 0.0 && tol_p < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "tol_p = {tol_p} must lie in (0, 1)"
        )));
    }
    check_samples(samples_per_step)?;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut steps = 0u32;
    let mut total = 0u64;
    let mut capped = false;
    while hi - lo > tol_p {
        let mid = 0.5 * (lo + hi);
        let p = Bias::new(mid)?;
        let trial = mu_trial(f, p);
        let phase = steps as u64 + 1;
        let mut n = samples_per_step;
        let mut hits = sampler.run_chunks(phase, 0, n, &trial);
        total += n;
        let decided = loop {
            let est = Estimate::from_counts(hits, n, sampler.seed);
            if est.ci_hi < alpha {
                break Some(true);
            }
            if est.ci_lo > alpha {
                break Some(false);
            }
            if n >= cap {
                break None;
            }
            // extend the same sample sequence: chunks continue where they stopped
            let extra = n.min(cap - n);
            hits += extend(&sampler, phase, n, extra, &trial);
            n += extra;
            total += extra;
        };
        steps += 1;
        match decided {
            Some(true) => lo = mid,
            Some(false) => hi = mid,
            None => {
                capped = true;
                lo = mid;
                hi = mid;
            }
        }
    }
    let p_hat = 0.5 * (lo + hi);
    let estimate = estimate_mu(f, Bias::new(p_hat)?, samples_per_step, sampler)?;
    Ok(McThreshold {
        alpha,
        p_hat,
        bracket: (lo, hi),
        estimate,
        steps,
        total_samples: total,
        capped,
    })
}

/// Samples `[done, done + extra)` of a phase; `done` need not be a chunk
/// multiple, so the partial chunk is replayed and trimmed.
fn extend<T>(sampler: &Sampler, phase: u64, done: u64, extra: u64, trial: &T) -> u64
where
    T: Fn(&mut ChaCha8Rng) -> bool + Sync,
{
    let end = done + extra;
    let first = done / CHUNK;
    let upto = sampler.run_chunks(phase, first, end - first * CHUNK, trial);
    let skip = done - first * CHUNK;
    if skip == 0 {
        return upto;
    }
    let mut rng = chunk_rng(sampler.seed, phase, first);
    let replay = (0..skip).filter(|_| trial(&mut rng)).count() as u64;
    upto - replay
}
