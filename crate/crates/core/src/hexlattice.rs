//! Geometry of the hexagonal lattice and finite domains cut out by a simple cycle.
//!
//! Faces of the hexagonal lattice form a triangular lattice and are addressed with axial
//! coordinates `(q, r)`. Each vertex of the hexagonal lattice is a triangle of three
//! mutually adjacent faces; there are two such triangles per unit cell, told apart by a
//! [`Parity`] bit:
//!
//! * `Up(q, r)` is the triangle of faces `(q, r)`, `(q + 1, r)`, `(q, r + 1)`;
//! * `Down(q, r)` is the triangle of faces `(q + 1, r)`, `(q, r + 1)`, `(q + 1, r + 1)`.
//!
//! An edge separates two adjacent faces, and its endpoints are the two triangles that
//! contain both of them. All planar predicates run on exact integer coordinates.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};

/// The six neighbour offsets on the face lattice, counter-clockwise.
pub const FACE_DIRECTIONS: [(i32, i32); 6] = [(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct FaceCoord {
    pub q: i32,
    pub r: i32,
}

impl FaceCoord {
    pub const fn new(q: i32, r: i32) -> Self {
        FaceCoord { q, r }
    }

    pub fn offset(self, dq: i32, dr: i32) -> Self {
        FaceCoord::new(self.q + dq, self.r + dr)
    }

    pub fn neighbors(self) -> [FaceCoord; 6] {
        FACE_DIRECTIONS.map(|(dq, dr)| self.offset(dq, dr))
    }

    /// The six corners of the hexagon.
    pub fn vertices(self) -> [HexVertex; 6] {
        let FaceCoord { q, r } = self;
        [
            HexVertex::up(q, r),
            HexVertex::up(q - 1, r),
            HexVertex::up(q, r - 1),
            HexVertex::down(q - 1, r),
            HexVertex::down(q, r - 1),
            HexVertex::down(q - 1, r - 1),
        ]
    }

    /// Hex distance on the face lattice.
    pub fn distance(self, other: FaceCoord) -> u32 {
        let dq = self.q - other.q;
        let dr = self.r - other.r;
        dq.abs().max(dr.abs()).max((dq + dr).abs()) as u32
    }

    /// Face centre, scaled so that it is commensurate with [`HexVertex::position`].
    pub(crate) fn position(self) -> (i64, i64) {
        let (x, y) = self.unit_position();
        (3 * x, 3 * y)
    }

    fn unit_position(self) -> (i64, i64) {
        (2 * self.q as i64 + self.r as i64, self.r as i64)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Parity {
    Up,
    Down,
}

/// A vertex of the hexagonal lattice: a unit cell `(q, r)` plus a parity bit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct HexVertex {
    pub q: i32,
    pub r: i32,
    pub parity: Parity,
}

impl HexVertex {
    /// The distinguished vertex 0.
    pub const ORIGIN: HexVertex = HexVertex::up(0, 0);

    pub const fn up(q: i32, r: i32) -> Self {
        HexVertex { q, r, parity: Parity::Up }
    }

    pub const fn down(q: i32, r: i32) -> Self {
        HexVertex { q, r, parity: Parity::Down }
    }

    /// The three faces meeting at this vertex.
    pub fn faces(self) -> [FaceCoord; 3] {
        let HexVertex { q, r, parity } = self;
        match parity {
            Parity::Up => [FaceCoord::new(q, r), FaceCoord::new(q + 1, r), FaceCoord::new(q, r + 1)],
            Parity::Down => [
                FaceCoord::new(q + 1, r),
                FaceCoord::new(q, r + 1),
                FaceCoord::new(q + 1, r + 1),
            ],
        }
    }

    pub fn neighbors(self) -> [HexVertex; 3] {
        let HexVertex { q, r, parity } = self;
        match parity {
            Parity::Up => [HexVertex::down(q, r), HexVertex::down(q - 1, r), HexVertex::down(q, r - 1)],
            Parity::Down => [HexVertex::up(q, r), HexVertex::up(q + 1, r), HexVertex::up(q, r + 1)],
        }
    }

    pub fn is_adjacent(self, other: HexVertex) -> bool {
        self.neighbors().contains(&other)
    }

    /// Sum of the three surrounding face centres (three times the centroid).
    pub(crate) fn position(self) -> (i64, i64) {
        self.faces().iter().fold((0, 0), |(x, y), f| {
            let (fx, fy) = f.unit_position();
            (x + fx, y + fy)
        })
    }
}

/// The two endpoints of the edge separating adjacent faces `f` and `g`, in canonical order.
pub fn edge_between(f: FaceCoord, g: FaceCoord) -> Option<(HexVertex, HexVertex)> {
    if f.distance(g) != 1 {
        return None;
    }
    let gv = g.vertices();
    let mut shared = f.vertices().into_iter().filter(|v| gv.contains(v));
    let a = shared.next()?;
    let b = shared.next()?;
    Some((a.min(b), a.max(b)))
}

fn cross(o: (i64, i64), a: (i64, i64), b: (i64, i64)) -> i64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Lattice translation: `dq, dr` on the face lattice; `dparity` must be zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LatticeOffset {
    pub dq: i32,
    pub dr: i32,
    pub dparity: i32,
}

impl LatticeOffset {
    pub const ZERO: LatticeOffset = LatticeOffset { dq: 0, dr: 0, dparity: 0 };

    pub fn new(dq: i32, dr: i32) -> Self {
        LatticeOffset { dq, dr, dparity: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HexEdge {
    /// Endpoint vertex indices, oriented tail to head.
    pub tail: usize,
    pub head: usize,
    /// Lattice faces on the left and right of the oriented edge.
    pub left: FaceCoord,
    pub right: FaceCoord,
    /// Indices of those faces when they are inner faces of the domain.
    pub left_face: Option<usize>,
    pub right_face: Option<usize>,
}

impl HexEdge {
    pub fn endpoints(&self) -> (usize, usize) {
        (self.tail, self.head)
    }

    pub fn is_boundary(&self) -> bool {
        self.right_face.is_none()
    }

    pub fn other_end(&self, v: usize) -> usize {
        if v == self.tail {
            self.head
        } else {
            self.tail
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HexFace {
    pub coord: FaceCoord,
    /// Boundary edges of the hexagon, ordered as [`FACE_DIRECTIONS`].
    pub edges: [usize; 6],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DomainSummary {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub boundary_length: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    SingleHex,
    TwoHex,
    HexBall(u32),
}

impl std::str::FromStr for Preset {
    type Err = Error;

    /// Accepts `single_hex`, `two_hex`, `hex_ball:R`, `hex_ball(R)` and `hex_ball R`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "single_hex" => return Ok(Preset::SingleHex),
            "two_hex" => return Ok(Preset::TwoHex),
            _ => {}
        }
        if let Some(rest) = s.strip_prefix("hex_ball") {
            let radius = rest.trim_matches(|c: char| c == ':' || c == '(' || c == ')' || c.is_whitespace());
            return radius
                .parse()
                .map(Preset::HexBall)
                .map_err(|_| Error::Parse(format!("bad hex_ball radius {rest:?}")));
        }
        Err(Error::Parse(format!("unknown preset {s:?}")))
    }
}

/// A finite, simply connected domain of the hexagonal lattice. Immutable once built.
#[derive(Clone, Debug)]
pub struct Domain {
    id: u64,
    vertices: Vec<HexVertex>,
    edges: Vec<HexEdge>,
    faces: Vec<HexFace>,
    vertex_lookup: HashMap<HexVertex, usize>,
    face_lookup: HashMap<FaceCoord, usize>,
    face_pair_lookup: HashMap<(FaceCoord, FaceCoord), usize>,
    incident: Vec<Vec<usize>>,
    boundary: Vec<usize>,
    origin: Option<usize>,
    q_range: (i32, i32),
    r_range: (i32, i32),
}

impl PartialEq for Domain {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id && self.faces == other.faces
    }
}

impl Domain {
    /// Builds the domain enclosed by a closed walk of lattice vertices.
    ///
    /// The walk may or may not repeat its first vertex at the end.
    pub fn from_boundary(walk: &[HexVertex]) -> Result<Domain> {
        let mut walk = walk.to_vec();
        if walk.len() > 1 && walk.first() == walk.last() {
            walk.pop();
        }
        let mut seen = BTreeSet::new();
        for v in &walk {
            if !seen.insert(*v) {
                return Err(Error::NonSimpleCycle(*v));
            }
        }
        if walk.len() < 3 {
            return Err(Error::NotAClosedWalk(format!("only {} vertices", walk.len())));
        }
        for i in 0..walk.len() {
            let (a, b) = (walk[i], walk[(i + 1) % walk.len()]);
            if !a.is_adjacent(b) {
                return Err(Error::NotAClosedWalk(format!("{a:?} and {b:?} are not adjacent")));
            }
        }

        let polygon: Vec<(i64, i64)> = walk.iter().map(|v| v.position()).collect();
        let qs = walk.iter().map(|v| v.q);
        let rs = walk.iter().map(|v| v.r);
        let (qmin, qmax) = (qs.clone().min().unwrap(), qs.max().unwrap() + 1);
        let (rmin, rmax) = (rs.clone().min().unwrap(), rs.max().unwrap() + 1);
        let mut enclosed = BTreeSet::new();
        for q in qmin..=qmax {
            for r in rmin..=rmax {
                let f = FaceCoord::new(q, r);
                if point_in_polygon(f.position(), &polygon) {
                    enclosed.insert(f);
                }
            }
        }
        let domain = Domain::from_faces(enclosed)?;
        let on_boundary: BTreeSet<HexVertex> = domain
            .boundary
            .iter()
            .map(|&e| domain.vertices[domain.edges[e].tail])
            .collect();
        if on_boundary != seen {
            return Err(Error::NonSimpleCycle(walk[0]));
        }
        if domain.origin.is_none() {
            return Err(Error::OriginOutside);
        }
        Ok(domain)
    }

    /// Builds the domain whose inner faces are exactly `faces`.
    ///
    /// The union of the faces must be simply connected; the origin need not be included.
    pub fn from_faces(faces: impl IntoIterator<Item = FaceCoord>) -> Result<Domain> {
        let face_set: BTreeSet<FaceCoord> = faces.into_iter().collect();
        let Some(&first) = face_set.first() else {
            return Err(Error::NotSimplyConnected("no faces".into()));
        };
        let mut reached = BTreeSet::from([first]);
        let mut queue = VecDeque::from([first]);
        while let Some(f) = queue.pop_front() {
            for g in f.neighbors() {
                if face_set.contains(&g) && reached.insert(g) {
                    queue.push_back(g);
                }
            }
        }
        if reached.len() != face_set.len() {
            return Err(Error::NotSimplyConnected("faces are not connected".into()));
        }

        let vertex_set: BTreeSet<HexVertex> = face_set.iter().flat_map(|f| f.vertices()).collect();
        let vertices: Vec<HexVertex> = vertex_set.into_iter().collect();
        let vertex_lookup: HashMap<HexVertex, usize> =
            vertices.iter().enumerate().map(|(i, v)| (*v, i)).collect();
        let faces_sorted: Vec<FaceCoord> = face_set.iter().copied().collect();
        let face_lookup: HashMap<FaceCoord, usize> =
            faces_sorted.iter().enumerate().map(|(i, f)| (*f, i)).collect();

        let mut edge_map: BTreeMap<(HexVertex, HexVertex), (FaceCoord, FaceCoord)> = BTreeMap::new();
        for &f in &face_set {
            for g in f.neighbors() {
                let ends = edge_between(f, g).expect("neighbouring faces share an edge");
                edge_map.entry(ends).or_insert((f, g));
            }
        }

        let mut edges = Vec::with_capacity(edge_map.len());
        let mut face_pair_lookup = HashMap::with_capacity(2 * edge_map.len());
        for (idx, ((a, b), (f, g))) in edge_map.into_iter().enumerate() {
            let (pa, pb) = (a.position(), b.position());
            let (left, right) = if cross(pa, pb, f.position()) > 0 { (f, g) } else { (g, f) };
            let mut edge = HexEdge {
                tail: vertex_lookup[&a],
                head: vertex_lookup[&b],
                left,
                right,
                left_face: face_lookup.get(&left).copied(),
                right_face: face_lookup.get(&right).copied(),
            };
            if edge.left_face.is_none() {
                std::mem::swap(&mut edge.tail, &mut edge.head);
                std::mem::swap(&mut edge.left, &mut edge.right);
                std::mem::swap(&mut edge.left_face, &mut edge.right_face);
            }
            face_pair_lookup.insert((f, g), idx);
            face_pair_lookup.insert((g, f), idx);
            edges.push(edge);
        }

        let faces: Vec<HexFace> = faces_sorted
            .iter()
            .map(|&f| HexFace {
                coord: f,
                edges: f.neighbors().map(|g| face_pair_lookup[&(f, g)]),
            })
            .collect();

        let mut incident = vec![Vec::with_capacity(3); vertices.len()];
        for (i, e) in edges.iter().enumerate() {
            incident[e.tail].push(i);
            incident[e.head].push(i);
        }

        // Boundary edges have the domain on their left, so following tail -> head traces
        // the outer boundary counter-clockwise.
        let boundary_edges: Vec<usize> = (0..edges.len()).filter(|&e| edges[e].is_boundary()).collect();
        let mut next_from_tail: HashMap<usize, usize> = HashMap::new();
        for &e in &boundary_edges {
            if next_from_tail.insert(edges[e].tail, e).is_some() {
                return Err(Error::NotSimplyConnected(format!(
                    "boundary pinches at {:?}",
                    vertices[edges[e].tail]
                )));
            }
        }
        let mut boundary = Vec::with_capacity(boundary_edges.len());
        let mut cur = boundary_edges[0];
        loop {
            boundary.push(cur);
            cur = next_from_tail[&edges[cur].head];
            if cur == boundary_edges[0] || boundary.len() > boundary_edges.len() {
                break;
            }
        }
        if boundary.len() != boundary_edges.len() {
            return Err(Error::NotSimplyConnected("face set has holes".into()));
        }

        let q_range = (
            faces_sorted.iter().map(|f| f.q).min().unwrap(),
            faces_sorted.iter().map(|f| f.q).max().unwrap(),
        );
        let r_range = (
            faces_sorted.iter().map(|f| f.r).min().unwrap(),
            faces_sorted.iter().map(|f| f.r).max().unwrap(),
        );

        let domain = Domain {
            id: fingerprint(&faces_sorted),
            origin: vertex_lookup.get(&HexVertex::ORIGIN).copied(),
            vertices,
            edges,
            faces,
            vertex_lookup,
            face_lookup,
            face_pair_lookup,
            incident,
            boundary,
            q_range,
            r_range,
        };
        debug_assert_eq!(domain.edges.len() + 1, domain.vertices.len() + domain.faces.len());
        Ok(domain)
    }

    pub fn preset(kind: Preset) -> Domain {
        let faces: Vec<FaceCoord> = match kind {
            Preset::SingleHex => vec![FaceCoord::new(0, 0)],
            Preset::TwoHex => vec![FaceCoord::new(0, 0), FaceCoord::new(1, 0)],
            Preset::HexBall(radius) => {
                let r = radius as i32;
                let centre = FaceCoord::new(0, 0);
                (-r..=r)
                    .flat_map(|q| (-r..=r).map(move |s| FaceCoord::new(q, s)))
                    .filter(|f| f.distance(centre) <= radius)
                    .collect()
            }
        };
        Domain::from_faces(faces).expect("preset domains are simply connected")
    }

    pub fn single_hex() -> Domain {
        Domain::preset(Preset::SingleHex)
    }

    pub fn two_hex() -> Domain {
        Domain::preset(Preset::TwoHex)
    }

    pub fn hex_ball(radius: u32) -> Domain {
        Domain::preset(Preset::HexBall(radius))
    }

    /// The domain shifted by a lattice translation. Indices are re-derived from scratch.
    pub fn translate(&self, offset: LatticeOffset) -> Result<Domain> {
        if offset.dparity != 0 {
            return Err(Error::ParityViolation((offset.dq, offset.dr, offset.dparity)));
        }
        Domain::from_faces(self.faces.iter().map(|f| f.coord.offset(offset.dq, offset.dr)))
    }

    /// Parses the plain-text domain format: either `preset <name> [radius]`, or `boundary`
    /// followed by one `q r parity` line per vertex (parity `0`/`up` or `1`/`down`).
    pub fn parse(text: &str) -> Result<Domain> {
        let mut lines = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty domain file".into()))?;
        let mut words = header.split_whitespace();
        match words.next() {
            Some("preset") => {
                let rest: Vec<&str> = words.collect();
                let preset: Preset = rest.join(" ").parse()?;
                Ok(Domain::preset(preset))
            }
            Some("boundary") => {
                let walk = lines.map(parse_vertex_line).collect::<Result<Vec<_>>>()?;
                Domain::from_boundary(&walk)
            }
            _ => Err(Error::Parse(format!("unknown domain header {header:?}"))),
        }
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn vertices(&self) -> &[HexVertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[HexEdge] {
        &self.edges
    }

    pub fn faces(&self) -> &[HexFace] {
        &self.faces
    }

    pub fn edge(&self, e: usize) -> &HexEdge {
        &self.edges[e]
    }

    pub fn face(&self, u: usize) -> &HexFace {
        &self.faces[u]
    }

    pub fn vertex_index(&self, v: HexVertex) -> Option<usize> {
        self.vertex_lookup.get(&v).copied()
    }

    pub fn face_index(&self, f: FaceCoord) -> Option<usize> {
        self.face_lookup.get(&f).copied()
    }

    /// The domain edge separating lattice faces `f` and `g`, if any.
    pub fn edge_between_faces(&self, f: FaceCoord, g: FaceCoord) -> Option<usize> {
        self.face_pair_lookup.get(&(f, g)).copied()
    }

    pub fn incident_edges(&self, v: usize) -> &[usize] {
        &self.incident[v]
    }

    /// Boundary cycle as edge indices, counter-clockwise.
    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    /// Index of vertex 0, if the domain contains it.
    pub fn origin(&self) -> Option<usize> {
        self.origin
    }

    pub(crate) fn q_range(&self) -> (i32, i32) {
        self.q_range
    }

    pub(crate) fn r_range(&self) -> (i32, i32) {
        self.r_range
    }

    /// An inner face with `v` on its boundary.
    pub fn face_at_vertex(&self, v: usize) -> usize {
        self.vertices[v]
            .faces()
            .iter()
            .find_map(|f| self.face_index(*f))
            .expect("every domain vertex lies on an inner face")
    }

    pub fn summary(&self) -> DomainSummary {
        DomainSummary {
            vertices: self.num_vertices(),
            edges: self.num_edges(),
            faces: self.num_faces(),
            boundary_length: self.boundary.len(),
        }
    }
}

fn parse_vertex_line(line: &str) -> Result<HexVertex> {
    let parts: Vec<&str> = line.split_whitespace().collect();
    let bad = || Error::Parse(format!("bad vertex line {line:?}"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let q = parts[0].parse().map_err(|_| bad())?;
    let r = parts[1].parse().map_err(|_| bad())?;
    let parity = match parts[2] {
        "0" | "up" | "Up" => Parity::Up,
        "1" | "down" | "Down" => Parity::Down,
        _ => return Err(bad()),
    };
    Ok(HexVertex { q, r, parity })
}

fn point_in_polygon(p: (i64, i64), polygon: &[(i64, i64)]) -> bool {
    let mut inside = false;
    for i in 0..polygon.len() {
        let (x1, y1) = polygon[i];
        let (x2, y2) = polygon[(i + 1) % polygon.len()];
        if (y1 > p.1) != (y2 > p.1) {
            let lhs = (p.0 - x1) * (y2 - y1);
            let rhs = (p.1 - y1) * (x2 - x1);
            let left_of_crossing = if y2 > y1 { lhs < rhs } else { lhs > rhs };
            if left_of_crossing {
                inside = !inside;
            }
        }
    }
    inside
}

fn fingerprint(faces: &[FaceCoord]) -> u64 {
    // FNV-1a over the sorted face coordinates.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for f in faces {
        for b in f.q.to_le_bytes().into_iter().chain(f.r.to_le_bytes()) {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}
