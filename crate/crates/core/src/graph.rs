//! Simple polyhedra as planar trivalent graphs.
//!
//! Storage is a half-edge structure. Edge `e` owns half-edges `2e` and `2e + 1`; faces are
//! traversed counterclockwise seen from outside, so `next(h)` stays in the face on the left
//! of `h`. Faces carry a persistent integer id and a display label.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::f64::consts::PI;
use std::fmt;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tetra::{classify_slots, TetraError, TruncationType, PAIR_OF_SLOT};

pub type FaceId = u32;
pub type EdgeId = usize;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("not trivalent: vertex {vertex} has degree {degree}")]
    NotTrivalent { vertex: usize, degree: usize },
    #[error("Euler relation fails: V - E + F = {v} - {e} + {f}")]
    Euler { v: usize, e: usize, f: usize },
    #[error("inconsistent face trace: {0}")]
    FaceTrace(String),
    #[error("face {0} has fewer than 3 sides")]
    SmallFace(FaceId),
    #[error("faces {0} and {1} share more than one edge")]
    MultiEdge(FaceId, FaceId),
    #[error("edge {0} has the same face on both sides")]
    Loop(EdgeId),
    #[error("unknown edge {0}")]
    UnknownEdge(EdgeId),
    #[error("unknown face {0}")]
    UnknownFace(FaceId),
    #[error("I-H move on edge {edge} would collapse face {face}")]
    Collapse { edge: EdgeId, face: FaceId },
    #[error("I-H move on edge {0} has coinciding or adjacent end-faces")]
    EndFaces(EdgeId),
    #[error("face {0} is not a triangle")]
    NotTriangle(FaceId),
    #[error("capping face {face} would collapse neighbour {neighbour}")]
    CapCollapse { face: FaceId, neighbour: FaceId },
    #[error("cannot cap: graph already has 4 faces")]
    Terminal,
    #[error("reduction stuck at {faces} faces")]
    ReductionStuck { faces: usize },
    #[error("script ended at {0} faces instead of 4")]
    ScriptIncomplete(usize),
    #[error("unsupported tetrahedron type for faces {faces:?}")]
    Unsupported {
        faces: [FaceId; 4],
        source: TetraError,
    },
    #[error("degenerate move: repeated face in {0:?}")]
    DegenerateMove([FaceId; 4]),
    #[error("angles required: edge between faces {0} and {1} has no dihedral angle")]
    AnglesRequired(FaceId, FaceId),
    #[error("invalid angle {p}π/{q}: must lie in (0, π)")]
    InvalidAngle { p: i64, q: i64 },
    #[error("malformed polyhedron file: {0}")]
    Malformed(String),
}

/// Dihedral angle `p·π/q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PiRational {
    pub p: i64,
    pub q: i64,
}

impl PiRational {
    pub fn new(p: i64, q: i64) -> Result<Self, GraphError> {
        let a = PiRational { p, q };
        a.check()?;
        Ok(a.reduced())
    }

    pub fn check(&self) -> Result<(), GraphError> {
        let ok = self.q != 0 && {
            let (p, q) = if self.q < 0 {
                (-self.p, -self.q)
            } else {
                (self.p, self.q)
            };
            p > 0 && p < q
        };
        if ok {
            Ok(())
        } else {
            Err(GraphError::InvalidAngle {
                p: self.p,
                q: self.q,
            })
        }
    }

    pub fn reduced(&self) -> Self {
        let (mut a, mut b) = (self.p.abs(), self.q.abs());
        while b != 0 {
            (a, b) = (b, a % b);
        }
        let s = if self.q < 0 { -1 } else { 1 };
        let g = a.max(1);
        PiRational {
            p: s * self.p / g,
            q: s * self.q / g,
        }
    }

    pub fn radians(&self) -> f64 {
        PI * self.p as f64 / self.q as f64
    }
}

impl fmt::Display for PiRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.p {
            1 => write!(f, "π/{}", self.q),
            p => write!(f, "{p}π/{}", self.q),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct Face {
    id: FaceId,
    label: String,
    rep: Option<usize>,
}

/// One face of the input: id, display label and its vertices in counterclockwise order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaceCycle {
    pub id: FaceId,
    pub label: String,
    pub vertices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanarTrivalentGraph {
    origin: Vec<usize>,
    next: Vec<usize>,
    face: Vec<usize>,
    alive: Vec<bool>,
    vertex_rep: Vec<Option<usize>>,
    faces: Vec<Face>,
    angles: Vec<Option<PiRational>>,
}

#[inline]
fn twin(h: usize) -> usize {
    h ^ 1
}

impl PlanarTrivalentGraph {
    /// Builds the graph from counterclockwise face cycles. Edges are numbered by the
    /// sorted pair of face ids they separate.
    pub fn from_face_cycles(cycles: &[FaceCycle]) -> Result<Self, GraphError> {
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        let mut seen_ids = BTreeSet::new();
        for (fi, c) in cycles.iter().enumerate() {
            if !seen_ids.insert(c.id) {
                return Err(GraphError::Malformed(format!("duplicate face id {}", c.id)));
            }
            if c.vertices.len() < 3 {
                return Err(GraphError::SmallFace(c.id));
            }
            let n = c.vertices.len();
            for i in 0..n {
                let key = (c.vertices[i], c.vertices[(i + 1) % n]);
                if directed.insert(key, fi).is_some() {
                    return Err(GraphError::FaceTrace(format!(
                        "directed edge {}->{} used twice",
                        key.0, key.1
                    )));
                }
            }
        }
        let mut pairs: Vec<((FaceId, FaceId), (usize, usize))> = Vec::new();
        for (&(a, b), &fi) in &directed {
            let fj = *directed
                .get(&(b, a))
                .ok_or_else(|| GraphError::FaceTrace(format!("edge {a}->{b} has no reverse")))?;
            let (ia, ib) = (cycles[fi].id, cycles[fj].id);
            if ia < ib {
                pairs.push(((ia, ib), (a, b)));
            } else if ia == ib {
                return Err(GraphError::FaceTrace(format!("face {ia} borders itself")));
            }
        }
        pairs.sort();
        for w in pairs.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(GraphError::MultiEdge(w[0].0 .0, w[0].0 .1));
            }
        }
        let n_vertices = cycles
            .iter()
            .flat_map(|c| c.vertices.iter())
            .max()
            .map_or(0, |m| m + 1);
        let mut vmap = vec![usize::MAX; n_vertices];
        let mut next_v = 0;
        let mut half: HashMap<(usize, usize), usize> = HashMap::new();
        let nh = 2 * pairs.len();
        let mut origin = vec![0; nh];
        let mut face = vec![0; nh];
        let index_of: HashMap<FaceId, usize> =
            cycles.iter().enumerate().map(|(i, c)| (c.id, i)).collect();
        for (e, &((fa, fb), (a, b))) in pairs.iter().enumerate() {
            for v in [a, b] {
                if vmap[v] == usize::MAX {
                    vmap[v] = next_v;
                    next_v += 1;
                }
            }
            half.insert((a, b), 2 * e);
            half.insert((b, a), 2 * e + 1);
            origin[2 * e] = vmap[a];
            origin[2 * e + 1] = vmap[b];
            face[2 * e] = index_of[&fa];
            face[2 * e + 1] = index_of[&fb];
        }
        let mut next = vec![0; nh];
        let mut faces = Vec::with_capacity(cycles.len());
        for c in cycles {
            let n = c.vertices.len();
            let hs: Vec<usize> = (0..n)
                .map(|i| half[&(c.vertices[i], c.vertices[(i + 1) % n])])
                .collect();
            for i in 0..n {
                next[hs[i]] = hs[(i + 1) % n];
            }
            faces.push(Face {
                id: c.id,
                label: c.label.clone(),
                rep: Some(hs[0]),
            });
        }
        let mut vertex_rep = vec![None; next_v];
        for h in 0..nh {
            vertex_rep[origin[h]].get_or_insert(h);
        }
        let g = PlanarTrivalentGraph {
            origin,
            next,
            face,
            alive: vec![true; nh],
            vertex_rep,
            faces,
            angles: vec![None; pairs.len()],
        };
        g.validate()?;
        Ok(g)
    }

    /// Builds the graph from the cyclic neighbour list of every face (the dual rotation
    /// system). Vertices are the consecutive neighbour triples.
    pub fn from_face_rotation(rotation: &[(FaceId, Vec<FaceId>)]) -> Result<Self, GraphError> {
        let mut corner_ids: BTreeMap<[FaceId; 3], usize> = BTreeMap::new();
        let mut cycles = Vec::with_capacity(rotation.len());
        for (f, nbrs) in rotation {
            let n = nbrs.len();
            let mut verts = Vec::with_capacity(n);
            for i in 0..n {
                let mut tri = [*f, nbrs[i], nbrs[(i + 1) % n]];
                let m = (0..3).min_by_key(|&k| tri[k]).unwrap_or(0);
                tri.rotate_left(m);
                let next_id = corner_ids.len();
                verts.push(*corner_ids.entry(tri).or_insert(next_id));
            }
            cycles.push(FaceCycle {
                id: *f,
                label: f.to_string(),
                vertices: verts,
            });
        }
        Self::from_face_cycles(&cycles)
    }

    pub fn half_edge_count(&self) -> usize {
        self.origin.len()
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> + '_ {
        (0..self.angles.len()).filter(move |&e| self.alive[2 * e])
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_rep.iter().filter(|r| r.is_some()).count()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_ids().count()
    }

    pub fn face_count(&self) -> usize {
        self.faces.iter().filter(|f| f.rep.is_some()).count()
    }

    /// Live face ids, ascending.
    pub fn face_ids(&self) -> Vec<FaceId> {
        let mut ids: Vec<FaceId> = self
            .faces
            .iter()
            .filter(|f| f.rep.is_some())
            .map(|f| f.id)
            .collect();
        ids.sort_unstable();
        ids
    }

    pub fn face_label(&self, id: FaceId) -> Option<&str> {
        self.faces
            .iter()
            .find(|f| f.id == id)
            .map(|f| f.label.as_str())
    }

    fn face_index(&self, id: FaceId) -> Result<usize, GraphError> {
        self.faces
            .iter()
            .position(|f| f.id == id && f.rep.is_some())
            .ok_or(GraphError::UnknownFace(id))
    }

    fn face_cycle_idx(&self, fi: usize) -> Vec<usize> {
        let mut out = Vec::new();
        if let Some(start) = self.faces[fi].rep {
            let mut h = start;
            loop {
                out.push(h);
                h = self.next[h];
                if h == start || out.len() > self.origin.len() {
                    break;
                }
            }
        }
        out
    }

    fn prev(&self, h: usize) -> usize {
        let mut x = h;
        loop {
            let n = self.next[x];
            if n == h {
                return x;
            }
            x = n;
        }
    }

    pub fn face_sides(&self, id: FaceId) -> Result<usize, GraphError> {
        Ok(self.face_cycle_idx(self.face_index(id)?).len())
    }

    /// Neighbouring face ids in counterclockwise order around the face.
    pub fn neighbours(&self, id: FaceId) -> Result<Vec<FaceId>, GraphError> {
        let fi = self.face_index(id)?;
        Ok(self
            .face_cycle_idx(fi)
            .into_iter()
            .map(|h| self.faces[self.face[twin(h)]].id)
            .collect())
    }

    pub fn adjacent(&self, a: FaceId, b: FaceId) -> bool {
        self.neighbours(a).map(|n| n.contains(&b)).unwrap_or(false)
    }

    /// The two faces separated by an edge, smaller id first.
    pub fn edge_faces(&self, e: EdgeId) -> Result<(FaceId, FaceId), GraphError> {
        if e >= self.angles.len() || !self.alive[2 * e] {
            return Err(GraphError::UnknownEdge(e));
        }
        let a = self.faces[self.face[2 * e]].id;
        let b = self.faces[self.face[2 * e + 1]].id;
        Ok((a.min(b), a.max(b)))
    }

    pub fn edge_between(&self, a: FaceId, b: FaceId) -> Option<EdgeId> {
        self.edge_ids().find(|&e| {
            let (x, y) = self.edge_faces(e).unwrap_or((FaceId::MAX, FaceId::MAX));
            (x, y) == (a.min(b), a.max(b))
        })
    }

    pub fn angle(&self, e: EdgeId) -> Option<PiRational> {
        self.angles.get(e).copied().flatten()
    }

    pub fn set_angle(&mut self, e: EdgeId, angle: PiRational) -> Result<(), GraphError> {
        angle.check()?;
        self.edge_faces(e)?;
        self.angles[e] = Some(angle.reduced());
        Ok(())
    }

    pub fn set_angle_between(
        &mut self,
        a: FaceId,
        b: FaceId,
        angle: PiRational,
    ) -> Result<(), GraphError> {
        let e = self
            .edge_between(a, b)
            .ok_or(GraphError::UnknownEdge(usize::MAX))?;
        self.set_angle(e, angle)
    }

    /// Dihedral angle between two faces, if they share an edge carrying one.
    pub fn angle_between(&self, a: FaceId, b: FaceId) -> Option<PiRational> {
        self.edge_between(a, b).and_then(|e| self.angle(e))
    }

    pub fn has_all_angles(&self) -> bool {
        self.edge_ids().all(|e| self.angles[e].is_some())
    }

    /// Outgoing half-edges at a vertex, counterclockwise.
    fn rotation_at(&self, v: usize) -> Vec<usize> {
        let mut out = Vec::new();
        if let Some(start) = self.vertex_rep[v] {
            let mut h = start;
            loop {
                out.push(h);
                h = twin(self.prev(h));
                if h == start || out.len() > 3 {
                    break;
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<(), GraphError> {
        let nh = self.origin.len();
        for h in (0..nh).filter(|&h| self.alive[h]) {
            let n = self.next[h];
            if !self.alive[n] || !self.alive[twin(h)] {
                return Err(GraphError::FaceTrace(format!(
                    "half-edge {h} links to a removed one"
                )));
            }
            if self.origin[n] != self.origin[twin(h)] {
                return Err(GraphError::FaceTrace(format!(
                    "half-edge {h} does not chain to {n}"
                )));
            }
            if self.face[n] != self.face[h] {
                return Err(GraphError::FaceTrace(format!("half-edge {h} changes face")));
            }
            if self.face[h] == self.face[twin(h)] {
                return Err(GraphError::Loop(h / 2));
            }
            if self.vertex_rep[self.origin[h]].is_none() {
                return Err(GraphError::FaceTrace(format!(
                    "half-edge {h} starts at a removed vertex"
                )));
            }
        }
        let mut degree = vec![0usize; self.vertex_rep.len()];
        for h in (0..nh).filter(|&h| self.alive[h]) {
            degree[self.origin[h]] += 1;
        }
        for (v, rep) in self.vertex_rep.iter().enumerate() {
            if rep.is_some() && degree[v] != 3 {
                return Err(GraphError::NotTrivalent {
                    vertex: v,
                    degree: degree[v],
                });
            }
            if let Some(r) = rep {
                if !self.alive[*r] || self.origin[*r] != v || self.rotation_at(v).len() != 3 {
                    return Err(GraphError::NotTrivalent {
                        vertex: v,
                        degree: degree[v],
                    });
                }
            }
        }
        let mut covered = 0;
        for (fi, f) in self.faces.iter().enumerate() {
            if f.rep.is_none() {
                continue;
            }
            let cyc = self.face_cycle_idx(fi);
            if cyc.iter().any(|&h| self.face[h] != fi || !self.alive[h]) {
                return Err(GraphError::FaceTrace(format!(
                    "face {} cycle leaves the face",
                    f.id
                )));
            }
            if cyc.len() < 3 {
                return Err(GraphError::SmallFace(f.id));
            }
            let nbrs: Vec<usize> = cyc.iter().map(|&h| self.face[twin(h)]).collect();
            let distinct: BTreeSet<usize> = nbrs.iter().copied().collect();
            if distinct.len() != nbrs.len() {
                let dup = nbrs
                    .iter()
                    .find(|x| nbrs.iter().filter(|y| y == x).count() > 1);
                let other = dup.map_or(f.id, |&d| self.faces[d].id);
                return Err(GraphError::MultiEdge(f.id.min(other), f.id.max(other)));
            }
            covered += cyc.len();
        }
        let live_half = (0..nh).filter(|&h| self.alive[h]).count();
        if covered != live_half {
            return Err(GraphError::FaceTrace(
                "some half-edges belong to no face cycle".into(),
            ));
        }
        let (v, e, f) = (self.vertex_count(), self.edge_count(), self.face_count());
        if v + f != e + 2 {
            return Err(GraphError::Euler { v, e, f });
        }
        Ok(())
    }

    /// Faces involved in an I-H move on `e`: the two faces along the edge, then the
    /// end-faces at its origin and target.
    pub fn ih_faces(&self, e: EdgeId) -> Result<[FaceId; 4], GraphError> {
        self.edge_faces(e)?;
        let h = 2 * e;
        let t = twin(h);
        let c = self.face[twin(self.next[t])];
        let d = self.face[twin(self.next[h])];
        Ok([
            self.faces[self.face[h]].id,
            self.faces[self.face[t]].id,
            self.faces[c].id,
            self.faces[d].id,
        ])
    }

    pub fn ih_check(&self, e: EdgeId) -> Result<[FaceId; 4], GraphError> {
        let q = self.ih_faces(e)?;
        for &f in &q[..2] {
            if self.face_sides(f)? < 4 {
                return Err(GraphError::Collapse { edge: e, face: f });
            }
        }
        if q[2] == q[3] || self.adjacent(q[2], q[3]) {
            return Err(GraphError::EndFaces(e));
        }
        Ok(q)
    }

    /// I-H move: the edge between faces A and B is reconnected so that it separates the
    /// end-faces C and D instead. Returns the new graph and the quadruple {A, B, C, D}.
    pub fn apply_ih(&self, e: EdgeId) -> Result<(Self, [FaceId; 4]), GraphError> {
        let q = self.ih_check(e)?;
        let mut g = self.clone();
        let h = 2 * e;
        let t = twin(h);
        let (u, v) = (g.origin[h], g.origin[t]);
        let (fa, fb) = (g.face[h], g.face[t]);
        let (a1, a2) = (g.prev(h), g.next[h]);
        let (b1, b2) = (g.prev(t), g.next[t]);
        let (c, d) = (g.face[twin(b2)], g.face[twin(a2)]);
        let (tb2, ta2) = (twin(b2), twin(a2));
        g.origin[a2] = u;
        g.origin[b2] = v;
        g.next[a1] = a2;
        g.next[b1] = b2;
        g.next[tb2] = t;
        g.next[t] = twin(a1);
        g.next[ta2] = h;
        g.next[h] = twin(b1);
        g.face[h] = d;
        g.face[t] = c;
        g.vertex_rep[u] = Some(h);
        g.vertex_rep[v] = Some(t);
        g.faces[fa].rep = Some(a1);
        g.faces[fb].rep = Some(b1);
        g.angles[e] = None;
        debug_assert!(g.validate().is_ok());
        Ok((g, q))
    }

    pub fn cap_check(&self, f: FaceId) -> Result<[FaceId; 4], GraphError> {
        if self.face_count() <= 4 {
            return Err(GraphError::Terminal);
        }
        let nbrs = self.neighbours(f)?;
        if nbrs.len() != 3 {
            return Err(GraphError::NotTriangle(f));
        }
        for &n in &nbrs {
            if self.face_sides(n)? < 4 {
                return Err(GraphError::CapCollapse {
                    face: f,
                    neighbour: n,
                });
            }
        }
        Ok([f, nbrs[0], nbrs[1], nbrs[2]])
    }

    /// Capping move: contracts a triangular face to a vertex. Returns the new graph and
    /// the quadruple of the face and its three neighbours.
    pub fn apply_cap(&self, f: FaceId) -> Result<(Self, [FaceId; 4]), GraphError> {
        let q = self.cap_check(f)?;
        let mut g = self.clone();
        let fi = g.face_index(f)?;
        let es = g.face_cycle_idx(fi);
        let w = g.origin[es[0]];
        for &ei in &es {
            let t = twin(ei);
            let p = g.prev(t);
            let n = g.next[t];
            g.next[p] = n;
            g.origin[n] = w;
            let nf = g.face[t];
            if g.faces[nf].rep == Some(t) {
                g.faces[nf].rep = Some(n);
            }
        }
        for &ei in &es[1..] {
            g.vertex_rep[g.origin[ei]] = None;
        }
        for &ei in &es {
            g.alive[ei] = false;
            g.alive[twin(ei)] = false;
            g.angles[ei / 2] = None;
        }
        g.vertex_rep[w] = (0..g.origin.len()).find(|&h| g.alive[h] && g.origin[h] == w);
        g.faces[fi].rep = None;
        debug_assert!(g.validate().is_ok());
        Ok((g, q))
    }

    pub fn apply(&self, mv: Move) -> Result<(Self, [FaceId; 4]), GraphError> {
        match mv {
            Move::Ih(e) => self.apply_ih(e),
            Move::Cap(f) => self.apply_cap(f),
        }
    }

    /// Graphviz rendering of the 1-skeleton, edges labelled by face pair and angle.
    pub fn to_dot(&self, name: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "graph \"{name}\" {{");
        self.write_dot_body(&mut s, "");
        s.push_str("}\n");
        s
    }

    fn write_dot_body(&self, s: &mut String, prefix: &str) {
        for (v, rep) in self.vertex_rep.iter().enumerate() {
            if rep.is_some() {
                let _ = writeln!(s, "  {prefix}v{v} [shape=point];");
            }
        }
        for e in self.edge_ids() {
            let (a, b) = self.edge_faces(e).unwrap_or_default();
            let label = match self.angles[e] {
                Some(x) => format!("{a}|{b} {x}"),
                None => format!("{a}|{b}"),
            };
            let _ = writeln!(
                s,
                "  {prefix}v{} -- {prefix}v{} [label=\"{label}\"];",
                self.origin[2 * e],
                self.origin[2 * e + 1]
            );
        }
    }

    pub fn to_file(&self, name: Option<&str>) -> PolyhedronFile {
        let faces = self
            .faces
            .iter()
            .filter(|f| f.rep.is_some())
            .map(|f| FaceRecord {
                id: f.id,
                label: f.label.clone(),
            })
            .collect();
        let vertices = (0..self.vertex_rep.len())
            .filter(|&v| self.vertex_rep[v].is_some())
            .map(|v| VertexRecord {
                id: v,
                half_edges: self.rotation_at(v),
            })
            .collect();
        let edges = self
            .edge_ids()
            .map(|e| EdgeRecord {
                id: e,
                face_pair: [
                    self.faces[self.face[2 * e]].id,
                    self.faces[self.face[2 * e + 1]].id,
                ],
                angle: self.angles[e],
            })
            .collect();
        PolyhedronFile {
            name: name.map(str::to_string),
            faces,
            vertices,
            edges,
        }
    }

    pub fn from_file(file: &PolyhedronFile) -> Result<Self, GraphError> {
        let bad = |m: String| GraphError::Malformed(m);
        let n_edges = file.edges.iter().map(|e| e.id + 1).max().unwrap_or(0);
        let nh = 2 * n_edges;
        let mut alive = vec![false; nh];
        let mut angles = vec![None; n_edges];
        let face_index: HashMap<FaceId, usize> = file
            .faces
            .iter()
            .enumerate()
            .map(|(i, f)| (f.id, i))
            .collect();
        if face_index.len() != file.faces.len() {
            return Err(bad("duplicate face id".into()));
        }
        let mut expected_face = vec![usize::MAX; nh];
        for e in &file.edges {
            if alive[2 * e.id] {
                return Err(bad(format!("duplicate edge id {}", e.id)));
            }
            alive[2 * e.id] = true;
            alive[2 * e.id + 1] = true;
            for (s, f) in e.face_pair.iter().enumerate() {
                expected_face[2 * e.id + s] =
                    *face_index.get(f).ok_or(GraphError::UnknownFace(*f))?;
            }
            if let Some(a) = e.angle {
                a.check()?;
                angles[e.id] = Some(a.reduced());
            }
        }
        let n_vertices = file.vertices.iter().map(|v| v.id + 1).max().unwrap_or(0);
        let mut origin = vec![usize::MAX; nh];
        let mut vertex_rep = vec![None; n_vertices];
        let mut ccw_prev = vec![usize::MAX; nh];
        for v in &file.vertices {
            if v.half_edges.len() != 3 {
                return Err(GraphError::NotTrivalent {
                    vertex: v.id,
                    degree: v.half_edges.len(),
                });
            }
            let k = v.half_edges.len();
            for (i, &h) in v.half_edges.iter().enumerate() {
                if h >= nh || !alive[h] || origin[h] != usize::MAX {
                    return Err(bad(format!("vertex {} lists half-edge {h} badly", v.id)));
                }
                origin[h] = v.id;
                ccw_prev[h] = v.half_edges[(i + k - 1) % k];
            }
            vertex_rep[v.id] = Some(v.half_edges[0]);
        }
        let mut next = vec![0; nh];
        for h in (0..nh).filter(|&h| alive[h]) {
            if origin[h] == usize::MAX {
                return Err(bad(format!("half-edge {h} has no origin vertex")));
            }
            next[h] = ccw_prev[twin(h)];
        }
        let mut faces: Vec<Face> = file
            .faces
            .iter()
            .map(|f| Face {
                id: f.id,
                label: f.label.clone(),
                rep: None,
            })
            .collect();
        for h in (0..nh).filter(|&h| alive[h]) {
            faces[expected_face[h]].rep.get_or_insert(h);
        }
        let g = PlanarTrivalentGraph {
            origin,
            next,
            face: expected_face,
            alive,
            vertex_rep,
            faces,
            angles,
        };
        g.validate()?;
        Ok(g)
    }

    /// True when the two graphs have the same face ids, adjacency and edge angles.
    pub fn same_combinatorics(&self, other: &Self) -> bool {
        let ids = self.face_ids();
        if ids != other.face_ids() {
            return false;
        }
        ids.iter().all(|&f| {
            let mut a = self.neighbours(f).unwrap_or_default();
            let mut b = other.neighbours(f).unwrap_or_default();
            a.sort_unstable();
            b.sort_unstable();
            a == b
                && a.iter()
                    .all(|&n| self.angle_between(f, n) == other.angle_between(f, n))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaceRecord {
    pub id: FaceId,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexRecord {
    pub id: usize,
    /// Outgoing half-edges, counterclockwise seen from outside. Half-edge `2e + s` of
    /// edge `e` has face `face_pair[s]` on its left.
    pub half_edges: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub id: EdgeId,
    pub face_pair: [FaceId; 2],
    #[serde(default)]
    pub angle: Option<PiRational>,
}

/// On-disk JSON form of a polyhedron.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyhedronFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub faces: Vec<FaceRecord>,
    pub vertices: Vec<VertexRecord>,
    pub edges: Vec<EdgeRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Move {
    Ih(EdgeId),
    Cap(FaceId),
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Move::Ih(e) => write!(f, "ih(edge {e})"),
            Move::Cap(x) => write!(f, "cap(face {x})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReductionTrace {
    pub moves: Vec<Move>,
    pub terminal: PlanarTrivalentGraph,
}

impl ReductionTrace {
    /// Graphviz rendering of every stage of the reduction, one cluster per stage.
    pub fn to_dot(&self, start: &PlanarTrivalentGraph) -> String {
        let mut s = String::from("graph trace {\n");
        let mut g = start.clone();
        for i in 0..=self.moves.len() {
            let title = if i == 0 {
                "start".to_string()
            } else {
                self.moves[i - 1].to_string()
            };
            if i > 0 {
                match g.apply(self.moves[i - 1]) {
                    Ok((h, _)) => g = h,
                    Err(_) => break,
                }
            }
            let _ = writeln!(s, " subgraph cluster_{i} {{\n  label=\"{title}\";");
            g.write_dot_body(&mut s, &format!("s{i}_"));
            s.push_str(" }\n");
        }
        s.push_str("}\n");
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Strategy {
    /// Cap triangles first, then triangle-creating I-H moves, then any legal I-H move,
    /// lowest id first, backtracking away from unsupported tetrahedra.
    Default,
    Script(Vec<Move>),
}

/// Length pattern of a quadruple: 1-based slots whose faces are not adjacent in `original`.
fn length_slots_of(original: &PlanarTrivalentGraph, q: &[FaceId; 4]) -> Vec<usize> {
    (0..6)
        .filter(|&k| {
            let (i, j) = PAIR_OF_SLOT[k];
            !original.adjacent(q[i], q[j])
        })
        .map(|k| k + 1)
        .collect()
}

fn quadruple_type(
    original: &PlanarTrivalentGraph,
    q: &[FaceId; 4],
) -> Result<TruncationType, GraphError> {
    let set: BTreeSet<FaceId> = q.iter().copied().collect();
    if set.len() != 4 {
        return Err(GraphError::DegenerateMove(*q));
    }
    classify_slots(&length_slots_of(original, q))
        .map(|(k, _)| k)
        .map_err(|source| GraphError::Unsupported { faces: *q, source })
}

fn candidates(g: &PlanarTrivalentGraph) -> Vec<Move> {
    let mut out: Vec<Move> = g
        .face_ids()
        .into_iter()
        .filter(|&f| g.cap_check(f).is_ok())
        .map(Move::Cap)
        .collect();
    let legal: Vec<EdgeId> = g.edge_ids().filter(|&e| g.ih_check(e).is_ok()).collect();
    let creates = |e: EdgeId| {
        g.edge_faces(e)
            .map(|(a, b)| g.face_sides(a).unwrap_or(0) == 4 || g.face_sides(b).unwrap_or(0) == 4)
            .unwrap_or(false)
    };
    out.extend(legal.iter().filter(|&&e| creates(e)).map(|&e| Move::Ih(e)));
    out.extend(legal.iter().filter(|&&e| !creates(e)).map(|&e| Move::Ih(e)));
    out
}

const SEARCH_BUDGET: usize = 200_000;

fn search(
    original: &PlanarTrivalentGraph,
    g: &PlanarTrivalentGraph,
    moves: &mut Vec<Move>,
    budget: &mut usize,
) -> Option<PlanarTrivalentGraph> {
    if *budget == 0 {
        return None;
    }
    *budget -= 1;
    if g.face_count() == 4 {
        let ids = g.face_ids();
        let q = [ids[0], ids[1], ids[2], ids[3]];
        return quadruple_type(original, &q).ok().map(|_| g.clone());
    }
    for mv in candidates(g) {
        let Ok((h, q)) = g.apply(mv) else { continue };
        if quadruple_type(original, &q).is_err() {
            continue;
        }
        moves.push(mv);
        if let Some(t) = search(original, &h, moves, budget) {
            return Some(t);
        }
        moves.pop();
    }
    None
}

pub fn reduce(
    graph: &PlanarTrivalentGraph,
    strategy: &Strategy,
) -> Result<ReductionTrace, GraphError> {
    graph.validate()?;
    if graph.face_count() < 4 {
        return Err(GraphError::ReductionStuck {
            faces: graph.face_count(),
        });
    }
    match strategy {
        Strategy::Script(moves) => {
            let mut g = graph.clone();
            for &mv in moves {
                g = g.apply(mv)?.0;
            }
            if g.face_count() != 4 {
                return Err(GraphError::ScriptIncomplete(g.face_count()));
            }
            Ok(ReductionTrace {
                moves: moves.clone(),
                terminal: g,
            })
        }
        Strategy::Default => {
            let mut moves = Vec::new();
            let mut budget = SEARCH_BUDGET;
            let terminal = search(graph, graph, &mut moves, &mut budget).ok_or(
                GraphError::ReductionStuck {
                    faces: graph.face_count(),
                },
            )?;
            Ok(ReductionTrace { moves, terminal })
        }
    }
}

/// Classification of one face pair of a planned tetrahedron.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PairKind {
    /// The faces meet along an original edge with this dihedral angle.
    Angle { angle: PiRational },
    /// The faces are disjoint; index into `DecompositionPlan::length_variables`.
    Length { variable: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannedTetrahedron {
    /// Face ids, ascending; tetrahedron face `i` is `faces[i]`.
    pub faces: [FaceId; 4],
    /// Indexed by 0-based slot, see `tetra::PAIR_OF_SLOT`.
    pub pairs: [PairKind; 6],
    pub kind: TruncationType,
    /// The move that detached it, `None` for the terminal tetrahedron.
    pub source: Option<Move>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionPlan {
    pub tetrahedra: Vec<PlannedTetrahedron>,
    /// Face pairs carrying a common perpendicular, smaller id first.
    pub length_variables: Vec<(FaceId, FaceId)>,
}

impl DecompositionPlan {
    pub fn type_counts(&self) -> BTreeMap<TruncationType, usize> {
        let mut m = BTreeMap::new();
        for t in &self.tetrahedra {
            *m.entry(t.kind).or_insert(0) += 1;
        }
        m
    }
}

pub fn plan_from_trace(
    original: &PlanarTrivalentGraph,
    trace: &ReductionTrace,
) -> Result<DecompositionPlan, GraphError> {
    let mut quads: Vec<([FaceId; 4], Option<Move>)> = Vec::new();
    let mut g = original.clone();
    for &mv in &trace.moves {
        let (h, q) = g.apply(mv)?;
        quads.push((q, Some(mv)));
        g = h;
    }
    if g.face_count() != 4 {
        return Err(GraphError::ScriptIncomplete(g.face_count()));
    }
    let ids = g.face_ids();
    quads.push(([ids[0], ids[1], ids[2], ids[3]], None));

    let mut length_variables: Vec<(FaceId, FaceId)> = Vec::new();
    let mut tetrahedra = Vec::with_capacity(quads.len());
    for (q, source) in quads {
        let kind = quadruple_type(original, &q)?;
        let mut faces = q;
        faces.sort_unstable();
        let mut pairs = [PairKind::Length { variable: 0 }; 6];
        for (k, pair) in pairs.iter_mut().enumerate() {
            let (i, j) = PAIR_OF_SLOT[k];
            let (a, b) = (faces[i], faces[j]);
            *pair = if original.adjacent(a, b) {
                let angle = original
                    .angle_between(a, b)
                    .ok_or(GraphError::AnglesRequired(a, b))?;
                PairKind::Angle { angle }
            } else {
                let key = (a.min(b), a.max(b));
                let variable = match length_variables.iter().position(|&p| p == key) {
                    Some(v) => v,
                    None => {
                        length_variables.push(key);
                        length_variables.len() - 1
                    }
                };
                PairKind::Length { variable }
            };
        }
        tetrahedra.push(PlannedTetrahedron {
            faces,
            pairs,
            kind,
            source,
        });
    }
    Ok(DecompositionPlan {
        tetrahedra,
        length_variables,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k4() -> PlanarTrivalentGraph {
        PlanarTrivalentGraph::from_face_rotation(&[
            (1, vec![2, 3, 4]),
            (2, vec![1, 4, 3]),
            (3, vec![1, 2, 4]),
            (4, vec![1, 3, 2]),
        ])
        .unwrap()
    }

    #[test]
    fn tetrahedron_counts() {
        let g = k4();
        assert_eq!(
            (g.vertex_count(), g.edge_count(), g.face_count()),
            (4, 6, 4)
        );
        assert_eq!(g.apply_cap(1).unwrap_err(), GraphError::Terminal);
    }

    #[test]
    fn angles_are_reduced_and_checked() {
        assert_eq!(PiRational::new(2, 4).unwrap(), PiRational { p: 1, q: 2 });
        assert!(PiRational::new(3, 2).is_err());
        assert!(PiRational::new(0, 2).is_err());
        assert_eq!(PiRational { p: 2, q: 5 }.to_string(), "2π/5");
    }
}
