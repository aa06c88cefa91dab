//! Corner-table triangulations of closed oriented surfaces.
//!
//! A half-edge `(face, slot)` runs from corner `slot` to corner `slot + 1` of
//! its face. The gluing pairs every half-edge with an oppositely oriented
//! partner, possibly in the same face. Vertex and edge ids are assigned in
//! order of their least `(face, slot)` representative at construction and stay
//! attached to the same vertex or edge through flips.

use std::fmt;

use thiserror::Error;

/// A directed half-edge `(face, slot)`.
pub type HalfEdge = (usize, usize);

/// Errors raised while building or flipping a triangulation.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SurfaceError {
    /// The complex has no faces.
    #[error("triangulation has no faces")]
    Empty,
    /// A half-edge references a face or slot that does not exist.
    #[error("half-edge ({0}, {1}) does not exist")]
    InvalidHalfEdge(usize, usize),
    /// A half-edge is missing from the gluing, repeated, or glued to itself.
    #[error("half-edge ({0}, {1}) is not glued to exactly one partner")]
    NonInvolution(usize, usize),
    /// The Euler characteristic is odd or exceeds 2.
    #[error("Euler characteristic {0} is not that of a closed oriented surface")]
    NonOrientable(i64),
    /// The edge bounds one face on both sides, or the flip would leave an
    /// endpoint with a single corner.
    #[error("edge {0} cannot be flipped: its quadrilateral is self-glued")]
    UnflippableSelfGluing(Label),
}

/// Canonical label of a vertex or edge: its least `(face, slot)` representative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label {
    pub face: usize,
    pub slot: usize,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.face, self.slot)
    }
}

#[inline]
fn next(s: usize) -> usize {
    (s + 1) % 3
}

#[inline]
fn prev(s: usize) -> usize {
    (s + 2) % 3
}

/// Closed oriented triangulated surface stored as a corner table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Triangulation {
    twin: Vec<usize>,
    corner_vertex: Vec<usize>,
    half_edge_edge: Vec<usize>,
    edge_half: Vec<usize>,
    vertex_count: usize,
    edge_count: usize,
}

fn least_half_edges(twin: &[usize], half_edge_edge: &[usize], edge_count: usize) -> Vec<usize> {
    let mut out = vec![usize::MAX; edge_count];
    for (h, &e) in half_edge_edge.iter().enumerate() {
        if out[e] == usize::MAX {
            out[e] = h.min(twin[h]);
        }
    }
    out
}

impl Triangulation {
    /// Builds a triangulation from `face_count` triangles and a list of glued
    /// half-edge pairs.
    pub fn build_from_gluing(
        face_count: usize,
        gluing: &[(HalfEdge, HalfEdge)],
    ) -> Result<Self, SurfaceError> {
        if face_count == 0 {
            return Err(SurfaceError::Empty);
        }
        let n = 3 * face_count;
        let mut twin = vec![usize::MAX; n];
        for &(a, b) in gluing {
            for &(f, s) in &[a, b] {
                if f >= face_count || s > 2 {
                    return Err(SurfaceError::InvalidHalfEdge(f, s));
                }
            }
            let (ia, ib) = (3 * a.0 + a.1, 3 * b.0 + b.1);
            if ia == ib {
                return Err(SurfaceError::NonInvolution(a.0, a.1));
            }
            for &(i, h) in &[(ia, a), (ib, b)] {
                if twin[i] != usize::MAX {
                    return Err(SurfaceError::NonInvolution(h.0, h.1));
                }
                twin[i] = if i == ia { ib } else { ia };
            }
        }
        if let Some(i) = twin.iter().position(|&t| t == usize::MAX) {
            return Err(SurfaceError::NonInvolution(i / 3, i % 3));
        }

        let mut corner_vertex = vec![usize::MAX; n];
        let mut vertex_count = 0;
        for c in 0..n {
            if corner_vertex[c] != usize::MAX {
                continue;
            }
            let mut cur = c;
            loop {
                corner_vertex[cur] = vertex_count;
                let t = twin[cur];
                cur = 3 * (t / 3) + next(t % 3);
                if cur == c {
                    break;
                }
            }
            vertex_count += 1;
        }

        let mut half_edge_edge = vec![usize::MAX; n];
        let mut edge_count = 0;
        for h in 0..n {
            if half_edge_edge[h] == usize::MAX {
                half_edge_edge[h] = edge_count;
                half_edge_edge[twin[h]] = edge_count;
                edge_count += 1;
            }
        }

        let edge_half = least_half_edges(&twin, &half_edge_edge, edge_count);
        let t = Triangulation {
            twin,
            corner_vertex,
            half_edge_edge,
            edge_half,
            vertex_count,
            edge_count,
        };
        let chi = t.euler_characteristic();
        if chi > 2 || chi.rem_euclid(2) != 0 {
            return Err(SurfaceError::NonOrientable(chi));
        }
        Ok(t)
    }

    pub fn face_count(&self) -> usize {
        self.twin.len() / 3
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// χ = |V| − |E| + |F|.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_count as i64 - self.edge_count as i64 + self.face_count() as i64
    }

    pub fn genus(&self) -> usize {
        ((2 - self.euler_characteristic()) / 2) as usize
    }

    /// Partner of a half-edge.
    pub fn twin(&self, h: HalfEdge) -> HalfEdge {
        let t = self.twin[3 * h.0 + h.1];
        (t / 3, t % 3)
    }

    /// Vertex id at corner `(face, slot)`.
    pub fn vertex(&self, face: usize, slot: usize) -> usize {
        self.corner_vertex[3 * face + slot]
    }

    /// Vertex ids at the three corners of a face.
    pub fn face_vertices(&self, face: usize) -> [usize; 3] {
        [self.vertex(face, 0), self.vertex(face, 1), self.vertex(face, 2)]
    }

    /// Edge id of half-edge `(face, slot)`.
    pub fn edge(&self, face: usize, slot: usize) -> usize {
        self.half_edge_edge[3 * face + slot]
    }

    /// Edge ids on the three slots of a face.
    pub fn face_edges(&self, face: usize) -> [usize; 3] {
        [self.edge(face, 0), self.edge(face, 1), self.edge(face, 2)]
    }

    /// The two half-edges of an edge, least first.
    pub fn edge_half_edges(&self, e: usize) -> (HalfEdge, HalfEdge) {
        let i = self.edge_half[e];
        let j = self.twin[i];
        ((i / 3, i % 3), (j / 3, j % 3))
    }

    /// Half-edge pairs for every edge, indexed by edge id.
    pub fn all_edge_half_edges(&self) -> Vec<(HalfEdge, HalfEdge)> {
        (0..self.edge_count).map(|e| self.edge_half_edges(e)).collect()
    }

    /// Endpoint vertex ids of an edge, read along its least half-edge.
    pub fn edge_endpoints(&self, e: usize) -> (usize, usize) {
        let ((f, s), _) = self.edge_half_edges(e);
        (self.vertex(f, s), self.vertex(f, next(s)))
    }

    /// True when both sides of the edge belong to the same face.
    pub fn is_self_glued(&self, e: usize) -> bool {
        let (a, b) = self.edge_half_edges(e);
        a.0 == b.0
    }

    /// Corners of every vertex, indexed by vertex id, each list ascending.
    pub fn vertex_corners(&self) -> Vec<Vec<(usize, usize)>> {
        let mut out = vec![Vec::new(); self.vertex_count];
        for (c, &v) in self.corner_vertex.iter().enumerate() {
            out[v].push((c / 3, c % 3));
        }
        out
    }

    /// Number of corners at each vertex.
    pub fn vertex_degrees(&self) -> Vec<usize> {
        let mut out = vec![0; self.vertex_count];
        for &v in &self.corner_vertex {
            out[v] += 1;
        }
        out
    }

    /// Canonical label of every vertex, indexed by vertex id.
    pub fn vertex_labels(&self) -> Vec<Label> {
        let mut out = vec![None; self.vertex_count];
        for (c, &v) in self.corner_vertex.iter().enumerate() {
            if out[v].is_none() {
                out[v] = Some(Label {
                    face: c / 3,
                    slot: c % 3,
                });
            }
        }
        out.into_iter().map(|l| l.expect("vertex without corners")).collect()
    }

    /// Canonical label of every edge, indexed by edge id.
    pub fn edge_labels(&self) -> Vec<Label> {
        self.all_edge_half_edges()
            .into_iter()
            .map(|(a, _)| Label {
                face: a.0,
                slot: a.1,
            })
            .collect()
    }

    /// Vertex ids sorted by canonical label.
    pub fn vertices_in_label_order(&self) -> Vec<usize> {
        let labels = self.vertex_labels();
        let mut ids: Vec<usize> = (0..self.vertex_count).collect();
        ids.sort_by_key(|&v| labels[v]);
        ids
    }

    /// Edge ids sorted by canonical label.
    pub fn edges_in_label_order(&self) -> Vec<usize> {
        let labels = self.edge_labels();
        let mut ids: Vec<usize> = (0..self.edge_count).collect();
        ids.sort_by_key(|&e| labels[e]);
        ids
    }

    /// Gluing pairs in canonical form: least half-edge first, sorted.
    pub fn gluing(&self) -> Vec<(HalfEdge, HalfEdge)> {
        let mut out: Vec<_> = (0..self.twin.len())
            .filter(|&h| h < self.twin[h])
            .map(|h| {
                let t = self.twin[h];
                ((h / 3, h % 3), (t / 3, t % 3))
            })
            .collect();
        out.sort();
        out
    }

    /// True when vertex and edge ids coincide with canonical label order.
    pub fn has_canonical_ids(&self) -> bool {
        let v = self.vertices_in_label_order();
        let e = self.edges_in_label_order();
        v.iter().enumerate().all(|(i, &x)| i == x) && e.iter().enumerate().all(|(i, &x)| i == x)
    }

    /// The two corners opposite an edge: `(face, slot)` of the apex in each
    /// incident face, ordered as the edge's half-edges.
    pub fn opposite_corners(&self, e: usize) -> ((usize, usize), (usize, usize)) {
        let ((f, s), (g, t)) = self.edge_half_edges(e);
        ((f, prev(s)), (g, prev(t)))
    }

    /// Checks whether `e` can be flipped: refused when `e` bounds one face on
    /// both sides or when both endpoints have degree 2 (double of a triangle).
    pub fn check_flippable(&self, e: usize) -> Result<(), SurfaceError> {
        let ((f, s), (g, _)) = self.edge_half_edges(e);
        let label = Label { face: f, slot: s };
        if f == g {
            return Err(SurfaceError::UnflippableSelfGluing(label));
        }
        let deg = self.vertex_degrees();
        let (i, j) = (self.vertex(f, s), self.vertex(f, next(s)));
        if deg[i] == 2 && deg[j] == 2 {
            return Err(SurfaceError::UnflippableSelfGluing(label));
        }
        Ok(())
    }

    /// Replaces edge `e` by the other diagonal of its quadrilateral.
    ///
    /// The new diagonal keeps edge id `e`. With `e = ((f, s), (g, t))` joining
    /// `i → j`, apex `k` in `f` and apex `l` in `g`, the new faces are
    /// `f = (k, i, l)` and `g = (l, j, k)`, the diagonal sitting in slot 2 of
    /// both.
    pub fn flip(&self, e: usize) -> Result<Triangulation, SurfaceError> {
        self.check_flippable(e)?;
        let ((f, s), (g, t)) = self.edge_half_edges(e);
        let i = self.vertex(f, s);
        let j = self.vertex(f, next(s));
        let k = self.vertex(f, prev(s));
        let l = self.vertex(g, prev(t));

        let n = self.twin.len();
        let mut map: Vec<usize> = (0..n).collect();
        map[3 * f + prev(s)] = 3 * f;
        map[3 * g + next(t)] = 3 * f + 1;
        map[3 * f + s] = 3 * f + 2;
        map[3 * g + prev(t)] = 3 * g;
        map[3 * f + next(s)] = 3 * g + 1;
        map[3 * g + t] = 3 * g + 2;

        let mut twin = vec![0; n];
        let mut half_edge_edge = vec![0; n];
        for h in 0..n {
            twin[map[h]] = map[self.twin[h]];
            half_edge_edge[map[h]] = self.half_edge_edge[h];
        }
        let mut corner_vertex = self.corner_vertex.clone();
        corner_vertex[3 * f..3 * f + 3].copy_from_slice(&[k, i, l]);
        corner_vertex[3 * g..3 * g + 3].copy_from_slice(&[l, j, k]);

        let edge_half = least_half_edges(&twin, &half_edge_edge, self.edge_count);
        let out = Triangulation {
            twin,
            corner_vertex,
            half_edge_edge,
            edge_half,
            vertex_count: self.vertex_count,
            edge_count: self.edge_count,
        };
        debug_assert!(out.orbits_consistent());
        Ok(out)
    }

    /// Relabels vertex and edge ids into canonical label order.
    pub fn canonicalized(&self) -> (Triangulation, Vec<usize>, Vec<usize>) {
        let v_order = self.vertices_in_label_order();
        let e_order = self.edges_in_label_order();
        let mut v_new = vec![0; self.vertex_count];
        for (new, &old) in v_order.iter().enumerate() {
            v_new[old] = new;
        }
        let mut e_new = vec![0; self.edge_count];
        for (new, &old) in e_order.iter().enumerate() {
            e_new[old] = new;
        }
        let half_edge_edge: Vec<usize> = self.half_edge_edge.iter().map(|&e| e_new[e]).collect();
        let t = Triangulation {
            twin: self.twin.clone(),
            corner_vertex: self.corner_vertex.iter().map(|&v| v_new[v]).collect(),
            edge_half: least_half_edges(&self.twin, &half_edge_edge, self.edge_count),
            half_edge_edge,
            vertex_count: self.vertex_count,
            edge_count: self.edge_count,
        };
        (t, v_order, e_order)
    }

    /// Verifies that corner vertex ids agree with the orbits of the gluing.
    pub fn orbits_consistent(&self) -> bool {
        let n = self.twin.len();
        for c in 0..n {
            let t = self.twin[c];
            if self.twin[t] != c || t == c {
                return false;
            }
            if self.half_edge_edge[c] != self.half_edge_edge[t] {
                return false;
            }
            let nc = 3 * (t / 3) + next(t % 3);
            if self.corner_vertex[nc] != self.corner_vertex[c] {
                return false;
            }
        }
        let mut seen = vec![0usize; self.vertex_count];
        let mut count = 0;
        let mut visited = vec![false; n];
        for c in 0..n {
            if visited[c] {
                continue;
            }
            let mut cur = c;
            loop {
                visited[cur] = true;
                let t = self.twin[cur];
                cur = 3 * (t / 3) + next(t % 3);
                if cur == c {
                    break;
                }
            }
            count += 1;
            seen[self.corner_vertex[c]] += 1;
        }
        count == self.vertex_count && seen.iter().all(|&x| x == 1)
    }
}
