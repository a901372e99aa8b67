//! Face-flip Metropolis sampling of the loop O(n) measure, FK sampling through the
//! superposition with Bernoulli percolation, and tail estimators with batch-means errors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{self, EdgeConfig};
use crate::error::{Error, Result};
use crate::hexlattice::Domain;

/// Steps between full recomputations of the cached |ω| and ℓ(ω).
pub const COHERENCE_INTERVAL: u64 = 1 << 16;

/// Batches per chain for batch-means standard errors.
pub const BATCHES_PER_CHAIN: usize = 32;

const NONE: u32 = u32::MAX;

/// Generator for chain `chain` of a run seeded with `seed`.
pub fn chain_rng(seed: u64, chain: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chain);
    rng
}

/// A running face-flip chain targeting x^{|ω|} n^{ℓ(ω)}.
///
/// With n = 1 the loop structure is irrelevant to the acceptance ratio and is not tracked.
#[derive(Clone, Debug)]
pub struct ChainState<'d> {
    domain: &'d Domain,
    n: f64,
    x_pow: [f64; 13],
    cfg: EdgeConfig,
    open: usize,
    track_loops: bool,
    loop_of: Vec<u32>,
    loop_len: Vec<u32>,
    free_ids: Vec<u32>,
    loops: usize,
    steps: u64,
    rng: ChaCha8Rng,
    // Scratch space for Δℓ.
    visit: Vec<u32>,
    stamp: u32,
    touched: Vec<u32>,
    old_edges: Vec<usize>,
    new_loops: Vec<Vec<usize>>,
}

impl<'d> ChainState<'d> {
    /// Starts from the empty configuration.
    pub fn new(domain: &'d Domain, n: f64, x: f64, rng: ChaCha8Rng) -> Result<Self> {
        if !(n > 0.0) {
            return Err(Error::NonPositiveN(n));
        }
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::OutOfRange { name: "x", value: x, expected: "[0, 1]" });
        }
        if domain.num_faces() == 0 {
            return Err(Error::InvalidArgument("domain has no inner face".into()));
        }
        let mut x_pow = [0.0; 13];
        for (i, slot) in x_pow.iter_mut().enumerate() {
            *slot = x.powi(i as i32 - 6);
        }
        Ok(ChainState {
            domain,
            n,
            x_pow,
            cfg: EdgeConfig::empty(domain),
            open: 0,
            track_loops: n != 1.0,
            loop_of: vec![NONE; domain.num_edges()],
            loop_len: Vec::new(),
            free_ids: Vec::new(),
            loops: 0,
            steps: 0,
            rng,
            visit: vec![0; domain.num_edges()],
            stamp: 0,
            touched: Vec::new(),
            old_edges: Vec::new(),
            new_loops: Vec::new(),
        })
    }

    pub fn domain(&self) -> &'d Domain {
        self.domain
    }

    pub fn config(&self) -> &EdgeConfig {
        &self.cfg
    }

    pub fn open_count(&self) -> usize {
        self.open
    }

    /// ℓ(ω) from the cache, or recomputed when loops are not tracked.
    pub fn loop_count(&self) -> usize {
        if self.track_loops {
            self.loops
        } else {
            config::decompose_loops(self.domain, &self.cfg).map(|d| d.loop_count()).unwrap_or(0)
        }
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn rng_mut(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// One Metropolis proposal: flip the six edges of a uniform inner face.
    pub fn face_flip_step(&mut self) {
        let u = self.rng.random_range(0..self.domain.num_faces());
        let hex = self.domain.face(u).edges;
        let delta_open: i32 = hex.iter().map(|&e| if self.cfg.get(e) { -1 } else { 1 }).sum();
        let mut ratio = self.x_pow[(delta_open + 6) as usize];
        let delta_loops = if self.track_loops && ratio > 0.0 {
            let d = self.delta_loops(&hex);
            ratio *= self.n.powi(d);
            Some(d)
        } else {
            None
        };
        let accept = ratio >= 1.0 || self.rng.random::<f64>() < ratio;
        if accept {
            for &e in &hex {
                self.cfg.toggle(e);
            }
            self.open = (self.open as i32 + delta_open) as usize;
            if let Some(d) = delta_loops {
                self.commit_loops(d);
            }
        }
        self.steps += 1;
        if self.steps.is_multiple_of(COHERENCE_INTERVAL) {
            assert!(self.check_coherence(), "cached |ω| or ℓ(ω) drifted from the configuration");
        }
    }

    /// |F_D| proposals.
    pub fn sweep(&mut self) {
        for _ in 0..self.domain.num_faces() {
            self.face_flip_step();
        }
    }

    /// Recomputes |ω| and ℓ(ω) from scratch and compares with the caches.
    pub fn check_coherence(&self) -> bool {
        let Ok(dec) = config::decompose_loops(self.domain, &self.cfg) else {
            return false;
        };
        if dec.open_edges != self.open {
            return false;
        }
        if !self.track_loops {
            return true;
        }
        dec.loops.len() == self.loops
            && dec.loops.iter().all(|l| {
                let id = self.loop_of[l.edges[0]];
                id != NONE
                    && self.loop_len[id as usize] as usize == l.len()
                    && l.edges.iter().all(|&e| self.loop_of[e] == id)
            })
    }

    fn next_stamp(&mut self) -> u32 {
        self.stamp = self.stamp.wrapping_add(1);
        if self.stamp == 0 {
            self.visit.iter_mut().for_each(|v| *v = 0);
            self.stamp = 1;
        }
        self.stamp
    }

    /// Walks the cycle through `start` in the configuration `open(e)`.
    fn trace(&self, start: usize, open: impl Fn(usize) -> bool) -> Vec<usize> {
        let mut edges = vec![start];
        let mut e = start;
        let mut v = self.domain.edge(start).head;
        loop {
            let next = self
                .domain
                .incident_edges(v)
                .iter()
                .copied()
                .find(|&f| f != e && open(f))
                .expect("even configuration");
            if next == start {
                return edges;
            }
            edges.push(next);
            v = self.domain.edge(next).other_end(v);
            e = next;
        }
    }

    /// ℓ(ω Δ hex) − ℓ(ω), re-tracing only the loops that meet the hexagon. Leaves the
    /// touched loops and the new loops in scratch for [`Self::commit_loops`].
    fn delta_loops(&mut self, hex: &[usize; 6]) -> i32 {
        self.touched.clear();
        self.old_edges.clear();
        for &e in hex {
            let id = self.loop_of[e];
            if id != NONE && !self.touched.contains(&id) {
                self.touched.push(id);
                let cfg = &self.cfg;
                let cycle = self.trace(e, |f| cfg.get(f));
                self.old_edges.extend(cycle);
            }
        }
        let in_hex = |e: usize| hex.contains(&e);
        let stamp = self.next_stamp();
        self.new_loops.clear();
        // Loops of the new configuration through these edges stay inside them.
        let old_edges = std::mem::take(&mut self.old_edges);
        for &e in hex.iter().chain(&old_edges) {
            if self.cfg.get(e) == in_hex(e) || self.visit[e] == stamp {
                continue;
            }
            let cfg = &self.cfg;
            let cycle = self.trace(e, |f| cfg.get(f) != in_hex(f));
            for &f in &cycle {
                self.visit[f] = stamp;
            }
            self.new_loops.push(cycle);
        }
        self.old_edges = old_edges;
        self.new_loops.len() as i32 - self.touched.len() as i32
    }

    fn commit_loops(&mut self, delta: i32) {
        self.free_ids.extend_from_slice(&self.touched);
        for &e in &self.old_edges {
            self.loop_of[e] = NONE;
        }
        for cycle in &self.new_loops {
            let id = match self.free_ids.pop() {
                Some(id) => id,
                None => {
                    self.loop_len.push(0);
                    (self.loop_len.len() - 1) as u32
                }
            };
            self.loop_len[id as usize] = cycle.len() as u32;
            for &e in cycle {
                self.loop_of[e] = id;
            }
        }
        self.loops = (self.loops as i32 + delta) as usize;
    }
}

/// Run lengths and seeding shared by all samplers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SamplerConfig {
    pub burn_in_sweeps: u64,
    /// Measurement sweeps per chain.
    pub sweeps: u64,
    /// Sweeps between recorded samples.
    pub thinning: u64,
    pub seed: u64,
    pub chains: u32,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig { burn_in_sweeps: 1000, sweeps: 10_000, thinning: 1, seed: 0, chains: 1 }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.burn_in_sweeps == 0 || self.sweeps == 0 || self.thinning == 0 || self.chains == 0 {
            return Err(Error::InvalidArgument("sampler counts must be positive".into()));
        }
        if self.thinning > self.sweeps {
            return Err(Error::InvalidArgument("thinning exceeds the number of sweeps".into()));
        }
        Ok(())
    }

    pub fn samples_per_chain(&self) -> u64 {
        self.sweeps / self.thinning
    }

    pub fn total_samples(&self) -> u64 {
        self.samples_per_chain() * self.chains as u64
    }
}

/// Which measure a sampler targets.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Ensemble {
    Loop { n: f64 },
    /// FK-Ising through the superposition of Loop(1, x) and Perco(x).
    Fk,
}

/// One chain of either ensemble, after burn-in.
pub struct Sampler<'d> {
    chain: ChainState<'d>,
    fk: bool,
    x: f64,
    thinning: u64,
}

impl<'d> Sampler<'d> {
    pub fn new(domain: &'d Domain, ensemble: Ensemble, x: f64, cfg: &SamplerConfig, chain: u64) -> Result<Self> {
        cfg.validate()?;
        let rng = chain_rng(cfg.seed, chain);
        let (n, fk) = match ensemble {
            Ensemble::Loop { n } => (n, false),
            Ensemble::Fk => {
                if !(0.0..=1.0).contains(&x) {
                    return Err(Error::OutOfRange { name: "x", value: x, expected: "[0, 1]" });
                }
                (1.0, true)
            }
        };
        let mut chain = ChainState::new(domain, n, x, rng)?;
        for _ in 0..cfg.burn_in_sweeps {
            chain.sweep();
        }
        Ok(Sampler { chain, fk, x, thinning: cfg.thinning })
    }

    pub fn domain(&self) -> &'d Domain {
        self.chain.domain()
    }

    /// Advances by the thinning interval and returns the next sample.
    pub fn next_sample(&mut self) -> EdgeConfig {
        for _ in 0..self.thinning {
            self.chain.sweep();
        }
        if !self.fk {
            return self.chain.config().clone();
        }
        let mut cfg = self.chain.config().clone();
        let x = self.x;
        let rng = self.chain.rng_mut();
        for e in 0..cfg.len() {
            if rng.random::<f64>() < x {
                cfg.set(e, true);
            }
        }
        cfg
    }
}

/// Samples of all chains in order, chain 0 first.
pub struct SampleStream<'d> {
    domain: &'d Domain,
    ensemble: Ensemble,
    x: f64,
    cfg: SamplerConfig,
    chain: u32,
    emitted: u64,
    current: Option<Sampler<'d>>,
}

impl Iterator for SampleStream<'_> {
    type Item = EdgeConfig;

    fn next(&mut self) -> Option<EdgeConfig> {
        loop {
            if self.chain >= self.cfg.chains {
                return None;
            }
            if self.current.is_none() {
                let s = Sampler::new(self.domain, self.ensemble, self.x, &self.cfg, self.chain as u64)
                    .expect("parameters validated at construction");
                self.current = Some(s);
                self.emitted = 0;
            }
            if self.emitted < self.cfg.samples_per_chain() {
                self.emitted += 1;
                return self.current.as_mut().map(Sampler::next_sample);
            }
            self.current = None;
            self.chain += 1;
        }
    }
}

fn stream<'d>(domain: &'d Domain, ensemble: Ensemble, x: f64, cfg: &SamplerConfig) -> Result<SampleStream<'d>> {
    // Fail early on bad parameters rather than inside the iterator.
    let mut probe = *cfg;
    probe.burn_in_sweeps = 1;
    Sampler::new(domain, ensemble, x, &probe, 0)?;
    Ok(SampleStream { domain, ensemble, x, cfg: *cfg, chain: 0, emitted: 0, current: None })
}

/// Thinned post-burn-in loop configurations from Loop(D, n, x).
pub fn sample_loop_config<'d>(domain: &'d Domain, n: f64, x: f64, cfg: &SamplerConfig) -> Result<SampleStream<'d>> {
    stream(domain, Ensemble::Loop { n }, x, cfg)
}

/// FK configurations ω ∨ π with ω from the n = 1 chain and π ~ Perco(x).
pub fn sample_fk_stream<'d>(domain: &'d Domain, x: f64, cfg: &SamplerConfig) -> Result<SampleStream<'d>> {
    stream(domain, Ensemble::Fk, x, cfg)
}

/// A single FK draw: a fresh chain seeded from `rng`, default burn-in.
pub fn sample_fk<R: Rng + ?Sized>(domain: &Domain, x: f64, rng: &mut R) -> Result<EdgeConfig> {
    let cfg = SamplerConfig { seed: rng.random(), sweeps: 1, ..SamplerConfig::default() };
    Ok(Sampler::new(domain, Ensemble::Fk, x, &cfg, 0)?.next_sample())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    /// |C₀|, the number of vertices joined to the origin.
    ClusterSize,
    /// R, the length of the longest loop surrounding the origin.
    MaxLoop,
}

impl Statistic {
    pub fn name(self) -> &'static str {
        match self {
            Statistic::ClusterSize => "cluster",
            Statistic::MaxLoop => "R",
        }
    }

    pub fn evaluate(self, domain: &Domain, cfg: &EdgeConfig) -> Result<usize> {
        let origin = domain.origin().ok_or_else(|| Error::InvalidArgument("domain does not contain the origin".into()))?;
        match self {
            Statistic::ClusterSize => Ok(cluster_size_from(domain, cfg, origin)),
            Statistic::MaxLoop => config::max_surrounding_loop(domain, cfg, origin),
        }
    }
}

/// Vertices reachable from `v` through open edges.
pub fn cluster_size_from(domain: &Domain, cfg: &EdgeConfig, v: usize) -> usize {
    let mut seen = vec![false; domain.num_vertices()];
    let mut stack = vec![v];
    seen[v] = true;
    let mut size = 0;
    while let Some(a) = stack.pop() {
        size += 1;
        for &e in domain.incident_edges(a) {
            if cfg.get(e) {
                let b = domain.edge(e).other_end(a);
                if !seen[b] {
                    seen[b] = true;
                    stack.push(b);
                }
            }
        }
    }
    size
}

/// Survival estimates P(stat ≥ k), k = 0..=k_max.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailEstimate {
    pub statistic: Statistic,
    pub estimates: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Samples with stat ≥ k.
    pub survivors: Vec<u64>,
    pub n_samples: u64,
}

impl TailEstimate {
    pub fn k_max(&self) -> usize {
        self.estimates.len() - 1
    }

    /// Rebuilds an estimate from (k, estimate, stderr) rows; survivor counts are rounded
    /// from estimate × n_samples.
    pub fn from_rows(statistic: Statistic, rows: &[(usize, f64, f64)], n_samples: u64) -> Result<Self> {
        for (i, row) in rows.iter().enumerate() {
            if row.0 != i {
                return Err(Error::Parse(format!("tail rows must list k = 0, 1, 2, ... (row {i} has k = {})", row.0)));
            }
        }
        if rows.is_empty() {
            return Err(Error::InsufficientData("empty tail".into()));
        }
        Ok(TailEstimate {
            statistic,
            estimates: rows.iter().map(|r| r.1).collect(),
            stderr: rows.iter().map(|r| r.2).collect(),
            survivors: rows.iter().map(|r| (r.1 * n_samples as f64).round() as u64).collect(),
            n_samples,
        })
    }
}

/// Statistic values of one chain.
fn chain_values(
    domain: &Domain,
    ensemble: Ensemble,
    x: f64,
    statistic: Statistic,
    cfg: &SamplerConfig,
    chain: u64,
) -> Result<Vec<u32>> {
    let mut sampler = Sampler::new(domain, ensemble, x, cfg, chain)?;
    (0..cfg.samples_per_chain())
        .map(|_| statistic.evaluate(domain, &sampler.next_sample()).map(|v| v as u32))
        .collect()
}

/// Batch means: splits each chain into equal batches and returns (mean, standard error)
/// of the per-batch means of `f`.
pub fn batch_means(chains: &[Vec<f64>]) -> (f64, f64) {
    let mut batch_avgs = Vec::new();
    let mut total = 0.0;
    let mut count = 0usize;
    for values in chains {
        total += values.iter().sum::<f64>();
        count += values.len();
        let batches = BATCHES_PER_CHAIN.min(values.len());
        if batches == 0 {
            continue;
        }
        let size = values.len() / batches;
        for b in 0..batches {
            let end = if b + 1 == batches { values.len() } else { (b + 1) * size };
            let slice = &values[b * size..end];
            batch_avgs.push(slice.iter().sum::<f64>() / slice.len() as f64);
        }
    }
    let mean = total / count.max(1) as f64;
    let m = batch_avgs.len();
    if m < 2 {
        return (mean, 0.0);
    }
    let avg = batch_avgs.iter().sum::<f64>() / m as f64;
    let var = batch_avgs.iter().map(|b| (b - avg).powi(2)).sum::<f64>() / (m - 1) as f64;
    (mean, (var / m as f64).sqrt())
}

/// Tail of `statistic` under Loop(D, n, x).
pub fn estimate_tail(
    domain: &Domain,
    n: f64,
    x: f64,
    statistic: Statistic,
    k_max: usize,
    cfg: &SamplerConfig,
) -> Result<TailEstimate> {
    estimate_tail_for(domain, Ensemble::Loop { n }, x, statistic, k_max, cfg)
}

/// Tail of `statistic` under either ensemble; chains run in parallel and are combined in
/// chain order.
pub fn estimate_tail_for(
    domain: &Domain,
    ensemble: Ensemble,
    x: f64,
    statistic: Statistic,
    k_max: usize,
    cfg: &SamplerConfig,
) -> Result<TailEstimate> {
    cfg.validate()?;
    let limit = match statistic {
        Statistic::ClusterSize => domain.num_vertices(),
        Statistic::MaxLoop => domain.num_edges(),
    };
    if k_max > limit {
        return Err(Error::OutOfRange { name: "k_max", value: k_max as f64, expected: "at most the statistic's range" });
    }
    if matches!((ensemble, statistic), (Ensemble::Fk, Statistic::MaxLoop)) {
        return Err(Error::InvalidArgument("R is defined for loop configurations only".into()));
    }
    if domain.origin().is_none() {
        return Err(Error::InvalidArgument("domain does not contain the origin".into()));
    }
    let values: Vec<Vec<u32>> = (0..cfg.chains as u64)
        .into_par_iter()
        .map(|c| chain_values(domain, ensemble, x, statistic, cfg, c))
        .collect::<Result<_>>()?;
    let n_samples: u64 = values.iter().map(|v| v.len() as u64).sum();
    let mut estimates = Vec::with_capacity(k_max + 1);
    let mut stderr = Vec::with_capacity(k_max + 1);
    let mut survivors = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        let indicators: Vec<Vec<f64>> = values
            .iter()
            .map(|chain| chain.iter().map(|&v| if v as usize >= k { 1.0 } else { 0.0 }).collect())
            .collect();
        let count: u64 = values.iter().flatten().filter(|&&v| v as usize >= k).count() as u64;
        let (_, se) = batch_means(&indicators);
        estimates.push(count as f64 / n_samples as f64);
        stderr.push(se);
        survivors.push(count);
    }
    Ok(TailEstimate { statistic, estimates, stderr, survivors, n_samples })
}
