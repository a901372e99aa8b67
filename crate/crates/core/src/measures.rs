//! Exhaustive enumeration of the loop, percolation and FK-Ising measures on small domains.
//!
//! Tables are indexed by the configuration read as an integer, edge 0 in the least
//! significant bit. Even subgraphs are enumerated through the cycle space spanned by the
//! facial hexagons (domains are simply connected), so loop partition functions cost
//! `2^|F|` rather than `2^|E|` terms.

use serde::Serialize;

use crate::config::{self, EdgeConfig};
use crate::error::{Error, Result};
use crate::hexlattice::Domain;
use crate::sum::{chunked_sum, CompensatedSum};

/// Largest ground set for a full probability table.
pub const MAX_TABLE_BITS: usize = 24;
/// Largest face count for cycle-space enumeration.
pub const MAX_CYCLE_FACES: usize = 30;

/// Inhomogeneous edge weights `x_e ∈ [0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightVector {
    domain_id: u64,
    weights: Vec<f64>,
}

impl WeightVector {
    pub fn from_vec(domain: &Domain, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != domain.num_edges() {
            return Err(Error::DomainMismatch);
        }
        if let Some(&bad) = weights.iter().find(|w| !(0.0..=1.0).contains(*w)) {
            return Err(Error::OutOfRange { name: "x_e", value: bad, expected: "[0, 1]" });
        }
        Ok(WeightVector { domain_id: domain.id(), weights })
    }

    pub fn constant(domain: &Domain, x: f64) -> Result<Self> {
        Self::from_vec(domain, vec![x; domain.num_edges()])
    }

    /// `x · 1{e ∈ keep}`: the measure conditioned to use only edges of `keep`.
    pub fn masked(domain: &Domain, x: f64, keep: &EdgeConfig) -> Result<Self> {
        Self::constant(domain, x)?.restricted(keep)
    }

    /// Same weights with every edge outside `keep` set to zero.
    pub fn restricted(&self, keep: &EdgeConfig) -> Result<Self> {
        if keep.domain_id() != self.domain_id || keep.len() != self.weights.len() {
            return Err(Error::DomainMismatch);
        }
        let weights = self
            .weights
            .iter()
            .enumerate()
            .map(|(e, &w)| if keep.get(e) { w } else { 0.0 })
            .collect();
        Ok(WeightVector { domain_id: self.domain_id, weights })
    }

    pub fn get(&self, e: usize) -> f64 {
        self.weights[e]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    /// FK edge parameter p_e = 2x_e / (1 + x_e).
    pub fn p(&self, e: usize) -> f64 {
        p_of_x(self.weights[e])
    }

    fn check(&self, domain: &Domain) -> Result<()> {
        if self.domain_id != domain.id() || self.weights.len() != domain.num_edges() {
            return Err(Error::DomainMismatch);
        }
        Ok(())
    }
}

pub fn p_of_x(x: f64) -> f64 {
    2.0 * x / (1.0 + x)
}

/// What a table's bits index: domain edges, or inner faces (bit set = spin `+1`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Ground {
    Edges,
    Faces,
}

/// A full probability table over `{0,1}^bits`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactDistribution {
    domain_id: u64,
    ground: Ground,
    bits: usize,
    probs: Vec<f64>,
    normalization: f64,
}

impl ExactDistribution {
    /// Normalises non-negative weights into a table.
    pub fn from_weights(domain: &Domain, ground: Ground, weights: Vec<f64>) -> Result<Self> {
        let bits = match ground {
            Ground::Edges => domain.num_edges(),
            Ground::Faces => domain.num_faces(),
        };
        if weights.len() != 1usize << bits {
            return Err(Error::DomainMismatch);
        }
        let z = chunked_sum(weights.len() as u64, |i| weights[i as usize]);
        if !(z > 0.0) {
            return Err(Error::InvalidArgument("weights sum to zero".into()));
        }
        let probs = weights.into_iter().map(|w| w / z).collect();
        Ok(ExactDistribution { domain_id: domain.id(), ground, bits, probs, normalization: z })
    }

    pub fn point_mass(domain: &Domain, cfg: &EdgeConfig) -> Result<Self> {
        check_table_size(domain.num_edges())?;
        let mut w = vec![0.0; 1 << domain.num_edges()];
        w[cfg.to_index() as usize] = 1.0;
        Self::from_weights(domain, Ground::Edges, w)
    }

    pub fn domain_id(&self) -> u64 {
        self.domain_id
    }

    pub fn ground(&self) -> Ground {
        self.ground
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, index: u64) -> f64 {
        self.probs[index as usize]
    }

    /// The constant the raw weights were divided by.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().copied().collect::<CompensatedSum>().value()
    }

    /// Probability of the event `{ξ : pred(ξ)}`.
    pub fn mass(&self, pred: impl Fn(u64) -> bool) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .filter(|(i, _)| pred(*i as u64))
            .map(|(_, p)| *p)
            .collect::<CompensatedSum>()
            .value()
    }

    pub fn expectation(&self, f: impl Fn(u64) -> f64) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(i, p)| p * f(i as u64))
            .collect::<CompensatedSum>()
            .value()
    }

    pub(crate) fn same_space(&self, other: &ExactDistribution) -> Result<()> {
        if self.domain_id != other.domain_id || self.ground != other.ground || self.bits != other.bits {
            return Err(Error::DomainMismatch);
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MeasureKind {
    Loop { n: f64 },
    Perco,
    Fk,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PartitionReport {
    pub z_loop: f64,
    pub z_fk: f64,
    /// 2^{−|V|} ∏_e (1 + x_e).
    pub rescaling_factor: f64,
    pub relative_discrepancy: f64,
}

fn check_table_size(bits: usize) -> Result<()> {
    if bits > MAX_TABLE_BITS {
        return Err(Error::TooLarge { what: "table bits", size: bits, limit: MAX_TABLE_BITS });
    }
    Ok(())
}

fn check_cycle_space(domain: &Domain) -> Result<()> {
    if domain.num_faces() > MAX_CYCLE_FACES {
        return Err(Error::TooLarge { what: "|F_D|", size: domain.num_faces(), limit: MAX_CYCLE_FACES });
    }
    Ok(())
}

/// Small-domain view with configurations packed in a `u64`.
pub(crate) struct Compact {
    nv: usize,
    ends: Vec<(u8, u8)>,
}

impl Compact {
    pub(crate) fn new(domain: &Domain) -> Result<Self> {
        if domain.num_edges() > 64 {
            return Err(Error::TooLarge { what: "|E| for packed enumeration", size: domain.num_edges(), limit: 64 });
        }
        let ends = domain.edges().iter().map(|e| (e.tail as u8, e.head as u8)).collect();
        Ok(Compact { nv: domain.num_vertices(), ends })
    }

    /// k(mask), isolated vertices included.
    pub(crate) fn components(&self, mask: u64) -> usize {
        let mut parent = [0u8; 128];
        for (i, p) in parent.iter_mut().enumerate().take(self.nv) {
            *p = i as u8;
        }
        fn find(parent: &mut [u8; 128], mut x: u8) -> u8 {
            while parent[x as usize] != x {
                parent[x as usize] = parent[parent[x as usize] as usize];
                x = parent[x as usize];
            }
            x
        }
        let mut comps = self.nv;
        let mut m = mask;
        while m != 0 {
            let e = m.trailing_zeros() as usize;
            m &= m - 1;
            let (a, b) = self.ends[e];
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra as usize] = rb;
                comps -= 1;
            }
        }
        comps
    }

    /// Whether the endpoints of edge `e` are joined by `mask`.
    pub(crate) fn connects(&self, mask: u64, e: usize) -> bool {
        let (a, b) = self.ends[e];
        let mut comp: u128 = 1 << a;
        loop {
            let mut grown = comp;
            let mut m = mask;
            while m != 0 {
                let f = m.trailing_zeros() as usize;
                m &= m - 1;
                let (u, v) = self.ends[f];
                if comp >> u & 1 == 1 || comp >> v & 1 == 1 {
                    grown |= 1 << u | 1 << v;
                }
            }
            if grown == comp {
                return comp >> b & 1 == 1;
            }
            comp = grown;
        }
    }

    pub(crate) fn nv(&self) -> usize {
        self.nv
    }
}

/// Product of per-edge factors over a packed subset of `edges`, via two half tables.
struct SplitProduct {
    low_bits: usize,
    low: Vec<(u64, f64)>,
    high: Vec<(u64, f64)>,
}

impl SplitProduct {
    /// `factor(e, open)` for each listed edge.
    fn new(edges: &[usize], factor: impl Fn(usize, bool) -> f64) -> Self {
        let low_bits = edges.len() / 2;
        let build = |part: &[usize]| -> Vec<(u64, f64)> {
            (0u64..1 << part.len())
                .map(|idx| {
                    let mut mask = 0;
                    let mut w = 1.0;
                    for (j, &e) in part.iter().enumerate() {
                        let open = idx >> j & 1 == 1;
                        if open {
                            mask |= 1 << e;
                        }
                        w *= factor(e, open);
                    }
                    (mask, w)
                })
                .collect()
        };
        SplitProduct { low_bits, low: build(&edges[..low_bits]), high: build(&edges[low_bits..]) }
    }

    fn get(&self, idx: u64) -> (u64, f64) {
        let (ml, wl) = self.low[(idx & ((1 << self.low_bits) - 1)) as usize];
        let (mh, wh) = self.high[(idx >> self.low_bits) as usize];
        (ml | mh, wl * wh)
    }
}

/// Visits every even subgraph `(face subset s, configuration)`, in order of `s`.
fn for_each_even(domain: &Domain, mut f: impl FnMut(u64, &EdgeConfig)) {
    let faces: Vec<EdgeConfig> = (0..domain.num_faces()).map(|u| config::face_cycle(domain, u)).collect();
    let mut cfg = EdgeConfig::empty(domain);
    let mut gray = 0u64;
    f(0, &cfg);
    for i in 1u64..1 << domain.num_faces() {
        let u = i.trailing_zeros() as usize;
        gray ^= 1 << u;
        for e in faces[u].iter_open() {
            cfg.toggle(e);
        }
        f(gray, &cfg);
    }
}

fn loop_weight(domain: &Domain, n: f64, w: &WeightVector, cfg: &EdgeConfig) -> f64 {
    let mut prod = 1.0;
    for e in cfg.iter_open() {
        prod *= w.get(e);
        if prod == 0.0 {
            return 0.0;
        }
    }
    // Every component of an even subgraph is a cycle, so ℓ = k − |V| + |ω|.
    let loops = config::component_count(domain, cfg) + cfg.count_open() - domain.num_vertices();
    prod * n.powi(loops as i32)
}

/// Z_loop(D, n, x) = Σ over even ω of ∏_{e∈ω} x_e · n^{ℓ(ω)}.
pub fn z_loop(domain: &Domain, n: f64, w: &WeightVector) -> Result<f64> {
    if !(n > 0.0) {
        return Err(Error::NonPositiveN(n));
    }
    w.check(domain)?;
    check_cycle_space(domain)?;
    let mut sum = CompensatedSum::default();
    for_each_even(domain, |_, cfg| sum.add(loop_weight(domain, n, w, cfg)));
    Ok(sum.value())
}

/// Z_FK(x) = Σ_ω ∏ p_e ∏ (1 − p_e) 2^{k(ω)}, enumerating subsets of the edges with x_e > 0.
pub fn z_fk(domain: &Domain, w: &WeightVector) -> Result<f64> {
    w.check(domain)?;
    let compact = Compact::new(domain)?;
    let support: Vec<usize> = (0..domain.num_edges()).filter(|&e| w.get(e) > 0.0).collect();
    check_table_size(support.len())?;
    let table = SplitProduct::new(&support, |e, open| if open { w.p(e) } else { 1.0 - w.p(e) });
    let pow2: Vec<f64> = (0..=compact.nv()).map(|k| 2f64.powi(k as i32)).collect();
    Ok(chunked_sum(1 << support.len(), |idx| {
        let (mask, weight) = table.get(idx);
        if weight == 0.0 {
            0.0
        } else {
            weight * pow2[compact.components(mask)]
        }
    }))
}

/// Full normalised table of the requested measure.
pub fn exact_distribution(kind: MeasureKind, domain: &Domain, w: &WeightVector) -> Result<ExactDistribution> {
    w.check(domain)?;
    check_table_size(domain.num_edges())?;
    let all: Vec<usize> = (0..domain.num_edges()).collect();
    let size = 1usize << domain.num_edges();
    let weights = match kind {
        MeasureKind::Loop { n } => {
            if !(n > 0.0) {
                return Err(Error::NonPositiveN(n));
            }
            check_cycle_space(domain)?;
            let mut table = vec![0.0; size];
            for_each_even(domain, |_, cfg| {
                table[cfg.to_index() as usize] = loop_weight(domain, n, w, cfg);
            });
            table
        }
        MeasureKind::Perco => {
            let t = SplitProduct::new(&all, |e, open| if open { w.get(e) } else { 1.0 - w.get(e) });
            (0..size as u64).map(|i| t.get(i).1).collect()
        }
        MeasureKind::Fk => {
            let compact = Compact::new(domain)?;
            let t = SplitProduct::new(&all, |e, open| if open { w.p(e) } else { 1.0 - w.p(e) });
            (0..size as u64)
                .map(|i| {
                    let wt = t.get(i).1;
                    if wt == 0.0 {
                        0.0
                    } else {
                        wt * 2f64.powi(compact.components(i) as i32)
                    }
                })
                .collect()
        }
    };
    ExactDistribution::from_weights(domain, Ground::Edges, weights)
}

/// Exact law of ω ∨ π for independent ω ~ Loop(1, w) and π ~ Perco(w).
///
/// For each even ω the mass of ω ∨ π = η only depends on π restricted to the edges off ω,
/// so the convolution runs over η ⊇ ω.
pub fn superposition_distribution(domain: &Domain, w: &WeightVector) -> Result<ExactDistribution> {
    w.check(domain)?;
    check_table_size(domain.num_edges())?;
    let loops = exact_distribution(MeasureKind::Loop { n: 1.0 }, domain, w)?;
    let full: u64 = (1u64 << domain.num_edges()) - 1;
    let mut table = vec![0.0; 1 << domain.num_edges()];
    let mut add = |omega: u64, mass: f64| {
        let free = full & !omega;
        let mut sub = free;
        loop {
            let mut weight = mass;
            for e in 0..domain.num_edges() {
                if free >> e & 1 == 1 {
                    weight *= if sub >> e & 1 == 1 { w.get(e) } else { 1.0 - w.get(e) };
                }
            }
            table[(omega | sub) as usize] += weight;
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & free;
        }
    };
    for_each_even(domain, |_, cfg| {
        let idx = cfg.to_index();
        let mass = loops.prob(idx);
        if mass > 0.0 {
            add(idx, mass);
        }
    });
    ExactDistribution::from_weights(domain, Ground::Edges, table)
}

/// Total variation distance ½ Σ |a − b|.
pub fn tv_distance(a: &ExactDistribution, b: &ExactDistribution) -> Result<f64> {
    a.same_space(b)?;
    let s = a
        .probs
        .iter()
        .zip(&b.probs)
        .map(|(p, q)| (p - q).abs())
        .collect::<CompensatedSum>()
        .value();
    Ok(0.5 * s)
}

/// Checks Z_loop(D, 1, x) / (2^{−|V|} ∏ (1 + x_e)) = Z_FK(D, x).
pub fn verify_partition_identity(domain: &Domain, w: &WeightVector) -> Result<PartitionReport> {
    let z_loop = z_loop(domain, 1.0, w)?;
    let z_fk = z_fk(domain, w)?;
    let log_factor = w.as_slice().iter().map(|x| x.ln_1p()).sum::<f64>()
        - domain.num_vertices() as f64 * std::f64::consts::LN_2;
    let rescaling_factor = log_factor.exp();
    let relative_discrepancy = ((z_loop / rescaling_factor) - z_fk).abs() / z_fk;
    Ok(PartitionReport { z_loop, z_fk, rescaling_factor, relative_discrepancy })
}

/// Loop measure with weights x · 1{e ∉ removed}.
pub fn conditional_loop_measure(
    domain: &Domain,
    n: f64,
    x: f64,
    removed: &EdgeConfig,
) -> Result<ExactDistribution> {
    let w = WeightVector::masked(domain, x, &removed.complement())?;
    exact_distribution(MeasureKind::Loop { n }, domain, &w)
}
