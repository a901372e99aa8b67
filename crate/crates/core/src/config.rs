//! Edge configurations, their loop and cluster decompositions, and the loop/spin
//! correspondence on inner faces.

use std::fmt;

use crate::error::{Error, Result};
use crate::hexlattice::Domain;
use crate::unionfind::UnionFind;

/// A subset of the edges of one domain, stored as a bit vector over dense edge indices.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct EdgeConfig {
    domain_id: u64,
    len: usize,
    words: Vec<u64>,
}

impl fmt::Debug for EdgeConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "EdgeConfig({})", self.to_hex())
    }
}

impl EdgeConfig {
    pub fn empty(domain: &Domain) -> Self {
        EdgeConfig {
            domain_id: domain.id(),
            len: domain.num_edges(),
            words: vec![0; domain.num_edges().div_ceil(64)],
        }
    }

    pub fn full(domain: &Domain) -> Self {
        let mut c = EdgeConfig::empty(domain);
        for e in 0..c.len {
            c.set(e, true);
        }
        c
    }

    pub fn from_edges(domain: &Domain, edges: impl IntoIterator<Item = usize>) -> Self {
        let mut c = EdgeConfig::empty(domain);
        for e in edges {
            c.set(e, true);
        }
        c
    }

    /// Configuration from a table index, edge 0 in the least significant bit.
    pub fn from_index(domain: &Domain, index: u64) -> Self {
        assert!(domain.num_edges() <= 64, "table indices address at most 64 edges");
        let mut c = EdgeConfig::empty(domain);
        if let Some(w) = c.words.first_mut() {
            *w = index;
        }
        c
    }

    /// Table index of the configuration (edge 0 = least significant bit).
    pub fn to_index(&self) -> u64 {
        assert!(self.len <= 64, "table indices address at most 64 edges");
        self.words.first().copied().unwrap_or(0)
    }

    pub fn domain_id(&self) -> u64 {
        self.domain_id
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn get(&self, e: usize) -> bool {
        debug_assert!(e < self.len);
        self.words[e / 64] >> (e % 64) & 1 == 1
    }

    pub fn set(&mut self, e: usize, open: bool) {
        assert!(e < self.len, "edge {e} out of range");
        let mask = 1u64 << (e % 64);
        if open {
            self.words[e / 64] |= mask;
        } else {
            self.words[e / 64] &= !mask;
        }
    }

    pub fn toggle(&mut self, e: usize) {
        debug_assert!(e < self.len);
        self.words[e / 64] ^= 1u64 << (e % 64);
    }

    /// Number of open edges, |ω|.
    pub fn count_open(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter_open(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(i * 64 + b)
            })
        })
    }

    fn check_same(&self, other: &EdgeConfig) -> Result<()> {
        if self.domain_id != other.domain_id || self.len != other.len {
            return Err(Error::DomainMismatch);
        }
        Ok(())
    }

    pub fn union(&self, other: &EdgeConfig) -> Result<EdgeConfig> {
        self.check_same(other)?;
        let mut out = self.clone();
        out.words.iter_mut().zip(&other.words).for_each(|(a, b)| *a |= b);
        Ok(out)
    }

    pub fn intersection(&self, other: &EdgeConfig) -> Result<EdgeConfig> {
        self.check_same(other)?;
        let mut out = self.clone();
        out.words.iter_mut().zip(&other.words).for_each(|(a, b)| *a &= b);
        Ok(out)
    }

    pub fn symmetric_difference(&self, other: &EdgeConfig) -> Result<EdgeConfig> {
        self.check_same(other)?;
        let mut out = self.clone();
        out.words.iter_mut().zip(&other.words).for_each(|(a, b)| *a ^= b);
        Ok(out)
    }

    pub fn complement(&self) -> EdgeConfig {
        let mut out = self.clone();
        for e in 0..self.len {
            out.toggle(e);
        }
        out
    }

    pub fn is_subset(&self, other: &EdgeConfig) -> Result<bool> {
        self.check_same(other)?;
        Ok(self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0))
    }

    /// Hex string with edge 0 in the most significant bit of the first digit; the last
    /// digit is zero-padded on the right.
    pub fn to_hex(&self) -> String {
        let digits = self.len.div_ceil(4);
        (0..digits)
            .map(|d| {
                let nibble = (0..4).fold(0u32, |acc, j| {
                    let e = 4 * d + j;
                    (acc << 1) | (e < self.len && self.get(e)) as u32
                });
                char::from_digit(nibble, 16).unwrap()
            })
            .collect()
    }

    pub fn from_hex(domain: &Domain, hex: &str) -> Result<EdgeConfig> {
        let mut c = EdgeConfig::empty(domain);
        let hex = hex.trim();
        if hex.len() != c.len.div_ceil(4) {
            return Err(Error::Parse(format!(
                "expected {} hex digits for {} edges, got {}",
                c.len.div_ceil(4),
                c.len,
                hex.len()
            )));
        }
        for (d, ch) in hex.chars().enumerate() {
            let nibble = ch
                .to_digit(16)
                .ok_or_else(|| Error::Parse(format!("invalid hex digit {ch:?}")))?;
            for j in 0..4 {
                if nibble >> (3 - j) & 1 == 1 {
                    let e = 4 * d + j;
                    if e >= c.len {
                        return Err(Error::Parse("padding bits must be zero".into()));
                    }
                    c.set(e, true);
                }
            }
        }
        Ok(c)
    }
}

fn check_domain(domain: &Domain, cfg: &EdgeConfig) {
    assert!(
        cfg.domain_id == domain.id() && cfg.len == domain.num_edges(),
        "edge configuration used with a different domain"
    );
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Spin {
    Plus,
    Minus,
}

impl Spin {
    pub fn value(self) -> i8 {
        match self {
            Spin::Plus => 1,
            Spin::Minus => -1,
        }
    }

    pub fn flipped(self) -> Spin {
        match self {
            Spin::Plus => Spin::Minus,
            Spin::Minus => Spin::Plus,
        }
    }
}

/// A ±1 assignment to the inner faces of a domain; faces outside are implicitly `+1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SpinConfig {
    domain_id: u64,
    spins: Vec<Spin>,
}

impl SpinConfig {
    pub fn all(domain: &Domain, spin: Spin) -> Self {
        SpinConfig {
            domain_id: domain.id(),
            spins: vec![spin; domain.num_faces()],
        }
    }

    pub fn from_spins(domain: &Domain, spins: Vec<Spin>) -> Result<Self> {
        if spins.len() != domain.num_faces() {
            return Err(Error::DomainMismatch);
        }
        Ok(SpinConfig { domain_id: domain.id(), spins })
    }

    /// Spins from a face mask: bit `u` set means face `u` has spin `+1`.
    pub fn from_plus_mask(domain: &Domain, mask: u64) -> Self {
        assert!(domain.num_faces() <= 64);
        let spins = (0..domain.num_faces())
            .map(|u| if mask >> u & 1 == 1 { Spin::Plus } else { Spin::Minus })
            .collect();
        SpinConfig { domain_id: domain.id(), spins }
    }

    pub fn plus_mask(&self) -> u64 {
        assert!(self.spins.len() <= 64);
        self.spins
            .iter()
            .enumerate()
            .filter(|(_, s)| **s == Spin::Plus)
            .fold(0, |m, (u, _)| m | 1 << u)
    }

    pub fn domain_id(&self) -> u64 {
        self.domain_id
    }

    pub fn get(&self, u: usize) -> Spin {
        self.spins[u]
    }

    pub fn set(&mut self, u: usize, s: Spin) {
        self.spins[u] = s;
    }

    pub fn spins(&self) -> &[Spin] {
        &self.spins
    }

    pub fn len(&self) -> usize {
        self.spins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spins.is_empty()
    }

    pub fn negated(&self) -> SpinConfig {
        SpinConfig {
            domain_id: self.domain_id,
            spins: self.spins.iter().map(|s| s.flipped()).collect(),
        }
    }

    pub fn count_plus(&self) -> usize {
        self.spins.iter().filter(|s| **s == Spin::Plus).count()
    }
}

/// One loop: edge indices in cyclic order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Loop {
    pub edges: Vec<usize>,
}

impl Loop {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoopDecomposition {
    /// Loops ordered by their smallest edge index.
    pub loops: Vec<Loop>,
    pub open_edges: usize,
}

impl LoopDecomposition {
    /// ℓ(ω).
    pub fn loop_count(&self) -> usize {
        self.loops.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClusterStats {
    /// k(ω), isolated vertices included.
    pub components: usize,
    /// Vertex indices of the cluster of the origin, sorted; empty if the domain lacks it.
    pub origin_cluster: Vec<usize>,
}

impl ClusterStats {
    pub fn origin_cluster_size(&self) -> usize {
        self.origin_cluster.len()
    }
}

pub fn degree(domain: &Domain, cfg: &EdgeConfig, v: usize) -> usize {
    domain.incident_edges(v).iter().filter(|&&e| cfg.get(e)).count()
}

fn check_even(domain: &Domain, cfg: &EdgeConfig) -> Result<()> {
    check_domain(domain, cfg);
    for v in 0..domain.num_vertices() {
        let d = degree(domain, cfg, v);
        if d != 0 && d != 2 {
            return Err(Error::NotEven { vertex: v, degree: d });
        }
    }
    Ok(())
}

/// True iff every vertex has degree 0 or 2.
pub fn is_loop_config(domain: &Domain, cfg: &EdgeConfig) -> bool {
    check_even(domain, cfg).is_ok()
}

/// Splits an even configuration into its loops.
pub fn decompose_loops(domain: &Domain, cfg: &EdgeConfig) -> Result<LoopDecomposition> {
    check_even(domain, cfg)?;
    let mut seen = vec![false; domain.num_edges()];
    let mut loops = Vec::new();
    for start in cfg.iter_open() {
        if seen[start] {
            continue;
        }
        let mut edges = Vec::new();
        let mut e = start;
        let mut v = domain.edge(start).head;
        loop {
            seen[e] = true;
            edges.push(e);
            let next = domain
                .incident_edges(v)
                .iter()
                .copied()
                .find(|&f| f != e && cfg.get(f))
                .expect("even vertex has a second open edge");
            if next == start {
                break;
            }
            v = domain.edge(next).other_end(v);
            e = next;
        }
        loops.push(Loop { edges });
    }
    Ok(LoopDecomposition { loops, open_edges: cfg.count_open() })
}

/// Number of connected components k(ω), counting isolated vertices.
pub fn component_count(domain: &Domain, cfg: &EdgeConfig) -> usize {
    check_domain(domain, cfg);
    let mut uf = UnionFind::new(domain.num_vertices());
    for e in cfg.iter_open() {
        let (a, b) = domain.edge(e).endpoints();
        uf.union(a, b);
    }
    uf.sets()
}

pub fn components(domain: &Domain, cfg: &EdgeConfig) -> ClusterStats {
    check_domain(domain, cfg);
    let mut uf = UnionFind::new(domain.num_vertices());
    for e in cfg.iter_open() {
        let (a, b) = domain.edge(e).endpoints();
        uf.union(a, b);
    }
    let origin_cluster = match domain.origin() {
        Some(o) => {
            let root = uf.find(o);
            (0..domain.num_vertices()).filter(|&v| uf.find(v) == root).collect()
        }
        None => Vec::new(),
    };
    ClusterStats { components: uf.sets(), origin_cluster }
}

/// |C₀|: vertices in the cluster of the origin (1 when the origin is isolated).
pub fn origin_cluster_size(domain: &Domain, cfg: &EdgeConfig) -> usize {
    check_domain(domain, cfg);
    let Some(o) = domain.origin() else { return 0 };
    let mut uf = UnionFind::new(domain.num_vertices());
    for e in cfg.iter_open() {
        let (a, b) = domain.edge(e).endpoints();
        uf.union(a, b);
    }
    uf.set_size(o)
}

/// Edges crossed when walking from face `u` straight along its row (decreasing `q`)
/// until past the domain, in crossing order.
fn row_crossings(domain: &Domain, u: usize) -> impl Iterator<Item = usize> + '_ {
    let f = domain.face(u).coord;
    let qmin = domain.q_range().0;
    (qmin..=f.q)
        .rev()
        .filter_map(move |a| domain.edge_between_faces(f.offset(a - f.q, 0), f.offset(a - f.q - 1, 0)))
}

/// Length of the longest loop whose closed region contains vertex `v` (loops through
/// `v` count); 0 if there is none.
pub fn max_surrounding_loop(domain: &Domain, cfg: &EdgeConfig, v: usize) -> Result<usize> {
    let dec = decompose_loops(domain, cfg)?;
    if dec.loops.is_empty() {
        return Ok(0);
    }
    let mut loop_of = vec![usize::MAX; domain.num_edges()];
    for (i, l) in dec.loops.iter().enumerate() {
        for &e in &l.edges {
            loop_of[e] = i;
        }
    }
    let mut surrounds = vec![false; dec.loops.len()];
    for &e in domain.incident_edges(v) {
        if loop_of[e] != usize::MAX {
            surrounds[loop_of[e]] = true;
        }
    }
    // Off a loop, the three faces at v lie on the same side of it, so the crossing
    // parity of any one of them decides.
    let mut parity = vec![false; dec.loops.len()];
    for e in row_crossings(domain, domain.face_at_vertex(v)) {
        if loop_of[e] != usize::MAX {
            parity[loop_of[e]] ^= true;
        }
    }
    Ok(dec
        .loops
        .iter()
        .enumerate()
        .filter(|(i, _)| surrounds[*i] || parity[*i])
        .map(|(_, l)| l.len())
        .max()
        .unwrap_or(0))
}

/// Face spins: −1 exactly on faces surrounded by an odd number of loops.
pub fn spins_from_loops(domain: &Domain, cfg: &EdgeConfig) -> Result<SpinConfig> {
    check_even(domain, cfg)?;
    Ok(odd_crossing_spins(domain, cfg))
}

/// Crossing parity along rows, without the evenness check.
pub(crate) fn odd_crossing_spins(domain: &Domain, cfg: &EdgeConfig) -> SpinConfig {
    let mut spins = SpinConfig::all(domain, Spin::Plus);
    let (qmin, qmax) = domain.q_range();
    let (rmin, rmax) = domain.r_range();
    for r in rmin..=rmax {
        let mut odd = false;
        for q in qmin..=qmax {
            let f = crate::hexlattice::FaceCoord::new(q, r);
            if let Some(e) = domain.edge_between_faces(f.offset(-1, 0), f) {
                odd ^= cfg.get(e);
            }
            if let Some(u) = domain.face_index(f) {
                spins.spins[u] = if odd { Spin::Minus } else { Spin::Plus };
            }
        }
    }
    spins
}

fn side_spin(spins: &SpinConfig, face: Option<usize>) -> Spin {
    face.map_or(Spin::Plus, |u| spins.spins[u])
}

/// The interface configuration: edges whose two sides carry different spins.
pub fn loops_from_spins(domain: &Domain, spins: &SpinConfig) -> EdgeConfig {
    assert_eq!(spins.domain_id, domain.id(), "spin configuration used with a different domain");
    EdgeConfig::from_edges(
        domain,
        domain.edges().iter().enumerate().filter_map(|(i, e)| {
            (side_spin(spins, e.left_face) != side_spin(spins, e.right_face)).then_some(i)
        }),
    )
}

/// (D₊, D₋): edges with `+1` on both sides and edges with `−1` on both sides.
pub fn spin_edge_domains(domain: &Domain, spins: &SpinConfig) -> (EdgeConfig, EdgeConfig) {
    assert_eq!(spins.domain_id, domain.id(), "spin configuration used with a different domain");
    let mut plus = EdgeConfig::empty(domain);
    let mut minus = EdgeConfig::empty(domain);
    for (i, e) in domain.edges().iter().enumerate() {
        match (side_spin(spins, e.left_face), side_spin(spins, e.right_face)) {
            (Spin::Plus, Spin::Plus) => plus.set(i, true),
            (Spin::Minus, Spin::Minus) => minus.set(i, true),
            _ => {}
        }
    }
    (plus, minus)
}

/// log₂ of the number of even subgraphs of η: k(η) + |η| − |V|.
pub fn even_subgraph_exponent(domain: &Domain, cfg: &EdgeConfig) -> usize {
    component_count(domain, cfg) + cfg.count_open() - domain.num_vertices()
}

/// Number of even subgraphs contained in η, 2^{k(η)+|η|−|V|}.
pub fn count_even_subgraphs(domain: &Domain, cfg: &EdgeConfig) -> Result<u128> {
    let exp = even_subgraph_exponent(domain, cfg);
    if exp >= 128 {
        return Err(Error::TooLarge { what: "even-subgraph exponent", size: exp, limit: 127 });
    }
    Ok(1u128 << exp)
}

/// |F(η)|: faces of η as a plane graph, the unbounded one included. Counted as connected
/// components of the dual graph whose links are the closed edges.
pub fn face_count(domain: &Domain, cfg: &EdgeConfig) -> usize {
    check_domain(domain, cfg);
    let outer = domain.num_faces();
    let mut uf = UnionFind::new(outer + 1);
    for (i, e) in domain.edges().iter().enumerate() {
        if !cfg.get(i) {
            let a = e.left_face.unwrap_or(outer);
            let b = e.right_face.unwrap_or(outer);
            uf.union(a, b);
        }
    }
    uf.sets()
}

/// The facial hexagon of inner face `u` as a configuration.
pub fn face_cycle(domain: &Domain, u: usize) -> EdgeConfig {
    EdgeConfig::from_edges(domain, domain.face(u).edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hexagon(d: &Domain, u: usize) -> EdgeConfig {
        face_cycle(d, u)
    }

    fn outer_cycle(d: &Domain) -> EdgeConfig {
        EdgeConfig::from_edges(d, d.boundary().iter().copied())
    }

    fn shared_edge(d: &Domain) -> usize {
        (0..d.num_edges()).find(|&e| !d.edge(e).is_boundary()).unwrap()
    }

    #[test]
    fn loop_config_predicate() {
        let d = Domain::single_hex();
        assert!(is_loop_config(&d, &EdgeConfig::empty(&d)));
        assert!(!is_loop_config(&d, &EdgeConfig::from_edges(&d, [0])));
        assert!(is_loop_config(&d, &EdgeConfig::full(&d)));
    }

    #[test]
    fn decomposition_examples() {
        let d = Domain::single_hex();
        assert_eq!(decompose_loops(&d, &EdgeConfig::empty(&d)).unwrap().loop_count(), 0);
        let dec = decompose_loops(&d, &EdgeConfig::full(&d)).unwrap();
        assert_eq!(dec.loop_count(), 1);
        assert_eq!(dec.loops[0].len(), 6);

        let two = Domain::two_hex();
        let outer = hexagon(&two, 0).symmetric_difference(&hexagon(&two, 1)).unwrap();
        assert_eq!(outer, outer_cycle(&two));
        let dec = decompose_loops(&two, &outer).unwrap();
        assert_eq!(dec.loop_count(), 1);
        assert_eq!(dec.loops[0].len(), 10);
        assert_eq!(dec.open_edges, 10);

        let bad = EdgeConfig::from_edges(&two, [0]);
        assert!(matches!(decompose_loops(&two, &bad), Err(Error::NotEven { degree: 1, .. })));
    }

    #[test]
    fn decomposed_loops_are_cycles() {
        let d = Domain::hex_ball(2);
        // Two far-apart hexagons plus one more.
        let cfg = [0, 7, 14]
            .iter()
            .fold(EdgeConfig::empty(&d), |acc, &u| acc.symmetric_difference(&hexagon(&d, u)).unwrap());
        let dec = decompose_loops(&d, &cfg).unwrap();
        let total: usize = dec.loops.iter().map(|l| l.len()).sum();
        assert_eq!(total, cfg.count_open());
        for l in &dec.loops {
            for w in l.edges.windows(2) {
                let (a, b) = (d.edge(w[0]), d.edge(w[1]));
                let share = [a.tail, a.head].iter().any(|v| *v == b.tail || *v == b.head);
                assert!(share);
            }
        }
        let mins: Vec<usize> = dec.loops.iter().map(|l| *l.edges.iter().min().unwrap()).collect();
        assert!(mins.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn component_examples() {
        let d = Domain::single_hex();
        let s = components(&d, &EdgeConfig::empty(&d));
        assert_eq!((s.components, s.origin_cluster_size()), (6, 1));
        let s = components(&d, &EdgeConfig::full(&d));
        assert_eq!((s.components, s.origin_cluster_size()), (1, 6));

        let two = Domain::two_hex();
        for u in 0..2 {
            assert_eq!(component_count(&two, &hexagon(&two, u)), 5);
        }
    }

    #[test]
    fn surrounding_loop_examples() {
        let d = Domain::single_hex();
        let o = d.origin().unwrap();
        assert_eq!(max_surrounding_loop(&d, &EdgeConfig::empty(&d), o).unwrap(), 0);
        assert_eq!(max_surrounding_loop(&d, &EdgeConfig::full(&d), o).unwrap(), 6);

        let two = Domain::two_hex();
        let o = two.origin().unwrap();
        assert_eq!(max_surrounding_loop(&two, &outer_cycle(&two), o).unwrap(), 10);
    }

    #[test]
    fn surrounding_loop_strict_interior() {
        // A ring of six hexagons around the central one; the loop is the outer boundary of
        // hex_ball(1), and a vertex of the central face is strictly inside it.
        let d = Domain::hex_ball(2);
        let ball1 = Domain::hex_ball(1);
        let ring_edges: Vec<usize> = ball1
            .boundary()
            .iter()
            .map(|&e| {
                let be = ball1.edge(e);
                d.edge_between_faces(be.left, be.right).unwrap()
            })
            .collect();
        let cfg = EdgeConfig::from_edges(&d, ring_edges);
        assert!(is_loop_config(&d, &cfg));
        let o = d.origin().unwrap();
        assert_eq!(max_surrounding_loop(&d, &cfg, o).unwrap(), 18);
        // A boundary vertex of hex_ball(2) is outside the ring.
        let outside = d.edge(d.boundary()[0]).tail;
        assert_eq!(max_surrounding_loop(&d, &cfg, outside).unwrap(), 0);
    }

    #[test]
    fn spin_examples() {
        let d = Domain::single_hex();
        assert_eq!(spins_from_loops(&d, &EdgeConfig::empty(&d)).unwrap(), SpinConfig::all(&d, Spin::Plus));
        assert_eq!(spins_from_loops(&d, &EdgeConfig::full(&d)).unwrap(), SpinConfig::all(&d, Spin::Minus));
        assert!(loops_from_spins(&d, &SpinConfig::all(&d, Spin::Plus)).is_empty());
        assert_eq!(loops_from_spins(&d, &SpinConfig::all(&d, Spin::Minus)), EdgeConfig::full(&d));

        let two = Domain::two_hex();
        assert_eq!(
            spins_from_loops(&two, &outer_cycle(&two)).unwrap(),
            SpinConfig::all(&two, Spin::Minus)
        );
        for mask in 0..4 {
            let s = SpinConfig::from_plus_mask(&two, mask);
            let cfg = loops_from_spins(&two, &s);
            assert_eq!(spins_from_loops(&two, &cfg).unwrap(), s);
        }
    }

    #[test]
    fn spin_edge_domain_examples() {
        let d = Domain::single_hex();
        let (p, m) = spin_edge_domains(&d, &SpinConfig::all(&d, Spin::Plus));
        assert_eq!((p, m.is_empty()), (EdgeConfig::full(&d), true));
        let (p, m) = spin_edge_domains(&d, &SpinConfig::all(&d, Spin::Minus));
        assert!(p.is_empty() && m.is_empty());

        let two = Domain::two_hex();
        let (p, m) = spin_edge_domains(&two, &SpinConfig::all(&two, Spin::Minus));
        assert!(p.is_empty());
        assert_eq!(m, EdgeConfig::from_edges(&two, [shared_edge(&two)]));
    }

    #[test]
    fn even_subgraph_count_examples() {
        let d = Domain::single_hex();
        assert_eq!(count_even_subgraphs(&d, &EdgeConfig::full(&d)).unwrap(), 2);
        assert_eq!(count_even_subgraphs(&d, &EdgeConfig::empty(&d)).unwrap(), 1);
        let two = Domain::two_hex();
        let full = EdgeConfig::full(&two);
        let brute = (0u64..1 << 11)
            .filter(|&m| is_loop_config(&two, &EdgeConfig::from_index(&two, m)))
            .count();
        assert_eq!(brute, 4);
        assert_eq!(count_even_subgraphs(&two, &full).unwrap(), 4);
    }

    #[test]
    fn face_count_examples() {
        let d = Domain::two_hex();
        assert_eq!(face_count(&d, &EdgeConfig::empty(&d)), 1);
        assert_eq!(face_count(&d, &EdgeConfig::full(&d)), 3);
        assert_eq!(face_count(&d, &outer_cycle(&d)), 2);
    }

    #[test]
    fn hex_encoding() {
        let d = Domain::single_hex();
        let c = EdgeConfig::from_edges(&d, [0, 5]);
        assert_eq!(c.to_hex(), "84");
        assert_eq!(EdgeConfig::from_hex(&d, "84").unwrap(), c);
        assert_eq!(c.to_index(), 0b100001);
        assert!(EdgeConfig::from_hex(&d, "85").is_err());
        assert!(EdgeConfig::from_hex(&d, "8").is_err());
        assert_eq!(EdgeConfig::full(&Domain::two_hex()).to_hex(), "ffe");
    }

    #[test]
    fn mismatched_domains_are_rejected() {
        let a = EdgeConfig::empty(&Domain::single_hex());
        let b = EdgeConfig::empty(&Domain::two_hex());
        assert_eq!(a.union(&b), Err(Error::DomainMismatch));
    }
}
