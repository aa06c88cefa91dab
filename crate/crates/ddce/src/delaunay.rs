//! Weighted Delaunay predicates, the flip algorithm and tessellation
//! extraction.
//!
//! The decorated cotan weight of an edge `ij` with apexes `k`, `l` is
//! `(cot α^k + cot α^l) · T(r_ij) / S(ℓ_ij)` with `T, S` = `tan, sin`,
//! identity, or `tanh, sinh`. Its sign equals the sign of the face-circle
//! center distance sum `d^k + d^l`.

use std::collections::VecDeque;
use std::f64::consts::PI;

use thiserror::Error;

use crate::metric::{validate, DecoratedMetric, MetricError};
use crate::surface::{SurfaceError, Triangulation};
use crate::trig::{
    diagonal_length, face_circle_lift, DEGENERACY_TOL, interior_angles_unchecked, realize, Background,
    DecoratedTriangle, TriangleGeometry, TrigError,
};

/// Absolute tolerance on the scale-free Delaunay predicate.
pub const DELAUNAY_TOL: f64 = 1e-12;

/// Errors raised by Delaunay operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DelaunayError {
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Trig(#[from] TrigError),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error("edge {edge} is not weighted Delaunay (w = {weight})")]
    NotDelaunay { edge: usize, weight: f64 },
    #[error("flip limit of {0} exceeded")]
    FlipLimit(usize),
    #[error("support function is defined for spherical metrics only")]
    NotSpherical,
}

/// Weight of one edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeWeight {
    pub edge: usize,
    pub w: f64,
}

/// One performed flip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlipRecord {
    /// Edge id; the new diagonal keeps it.
    pub edge: usize,
    pub old_length: f64,
    pub new_length: f64,
    /// Minimum of the support function after the flip (spherical only).
    pub support_min: Option<f64>,
}

/// Faces grouped across zero-weight edges.
#[derive(Debug, Clone, PartialEq)]
pub struct Tessellation {
    pub triangulation: Triangulation,
    /// Edge ids with weight above the tolerance.
    pub kept_edges: Vec<usize>,
    /// Edge ids with `|w| ≤ tol`.
    pub removed_edges: Vec<usize>,
    /// Face groups, each ascending, ordered by least face.
    pub face_groups: Vec<Vec<usize>>,
}

fn rotated(m: &DecoratedMetric, f: usize, s: usize) -> DecoratedTriangle {
    let t = m.face_triangle(f);
    let r = |a: [f64; 3]| [a[s], a[(s + 1) % 3], a[(s + 2) % 3]];
    DecoratedTriangle::new(m.background, r(t.lengths), r(t.radii))
}

/// Sum of the two half-weights of an edge.
fn weight_from(m: &DecoratedMetric, geoms: &[TriangleGeometry], e: usize) -> f64 {
    let ((f, s), (g, t)) = m.triangulation.edge_half_edges(e);
    geoms[f].half_weight[s] + geoms[g].half_weight[t]
}

/// Decorated cotan weight of edge `e`.
pub fn edge_weight(m: &DecoratedMetric, e: usize) -> Result<f64, TrigError> {
    let ((f, s), (g, t)) = m.triangulation.edge_half_edges(e);
    let gf = m.face_geometry(f)?;
    let gg = if g == f { gf } else { m.face_geometry(g)? };
    Ok(gf.half_weight[s] + gg.half_weight[t])
}

/// Weights of all edges, indexed by edge id.
pub fn edge_weights(m: &DecoratedMetric) -> Result<Vec<f64>, TrigError> {
    let geoms = m.geometries()?;
    Ok((0..m.triangulation.edge_count())
        .map(|e| weight_from(m, &geoms, e))
        .collect())
}

/// Predicate data of one edge from the geometry of its two faces.
struct EdgeTest {
    self_glued: bool,
    concave: bool,
    cot_sum: f64,
}

fn edge_test(m: &DecoratedMetric, gf: &TriangleGeometry, gg: &TriangleGeometry, e: usize) -> EdgeTest {
    let ((f, s), (g, t)) = m.triangulation.edge_half_edges(e);
    let at_i = gf.angles[s] + gg.angles[(t + 1) % 3];
    let at_j = gf.angles[(s + 1) % 3] + gg.angles[t];
    EdgeTest {
        self_glued: f == g,
        concave: at_i >= PI - DEGENERACY_TOL || at_j >= PI - DEGENERACY_TOL,
        cot_sum: gf.cot_alpha[s] + gg.cot_alpha[t],
    }
}

impl EdgeTest {
    fn delaunay(&self, strict: bool) -> bool {
        if self.self_glued || self.concave {
            return true;
        }
        if strict {
            self.cot_sum > DELAUNAY_TOL
        } else {
            self.cot_sum >= -DELAUNAY_TOL
        }
    }
}

fn test_edge(m: &DecoratedMetric, e: usize) -> Result<EdgeTest, TrigError> {
    let ((f, _), (g, _)) = m.triangulation.edge_half_edges(e);
    let gf = m.face_geometry(f)?;
    let gg = if g == f { gf } else { m.face_geometry(g)? };
    Ok(edge_test(m, &gf, &gg, e))
}

/// Whether edge `e` is local Delaunay: `d^k + d^l ≥ 0` (strict: `> tol`),
/// evaluated in the scale-free form `cot α^k + cot α^l`. Self-glued edges and
/// edges whose quadrilateral is concave at an endpoint are local Delaunay.
pub fn is_local_delaunay(m: &DecoratedMetric, e: usize, strict: bool) -> Result<bool, TrigError> {
    Ok(test_edge(m, e)?.delaunay(strict))
}

/// Whether every edge is local Delaunay (non-strict).
pub fn is_delaunay(m: &DecoratedMetric) -> Result<bool, TrigError> {
    let geoms = m.geometries()?;
    Ok((0..m.triangulation.edge_count()).all(|e| {
        let ((f, _), (g, _)) = m.triangulation.edge_half_edges(e);
        edge_test(m, &geoms[f], &geoms[g], e).delaunay(false)
    }))
}

/// Flips non-Delaunay edges in FIFO order until every edge is local Delaunay.
pub fn flip_to_delaunay(m: &DecoratedMetric) -> Result<(DecoratedMetric, Vec<FlipRecord>), DelaunayError> {
    let v = validate(m);
    if !v.is_empty() {
        return Err(MetricError::Invalid(v).into());
    }
    let mut cur = m.clone();
    let n_e = cur.triangulation.edge_count();
    let limit = 100 * n_e + 100;
    let mut queue: VecDeque<usize> = (0..n_e).collect();
    let mut queued = vec![true; n_e];
    let mut log = Vec::new();
    let spherical = cur.background == Background::Spherical;
    while let Some(e) = queue.pop_front() {
        queued[e] = false;
        if test_edge(&cur, e)?.delaunay(false) {
            continue;
        }
        if log.len() >= limit {
            return Err(DelaunayError::FlipLimit(limit));
        }
        let ((f, s), (g, t)) = cur.triangulation.edge_half_edges(e);
        let d = diagonal_length(cur.background, &rotated(&cur, f, s), &rotated(&cur, g, t))?;
        let tri = cur.triangulation.flip(e)?;
        let old = cur.lengths[e];
        cur.triangulation = tri;
        cur.lengths[e] = d;
        for face in [f, g] {
            for x in cur.triangulation.face_edges(face) {
                if x != e && !queued[x] {
                    queued[x] = true;
                    queue.push_back(x);
                }
            }
        }
        let support_min = if spherical {
            Some(support_minimum(&cur)?)
        } else {
            None
        };
        log.push(FlipRecord {
            edge: e,
            old_length: old,
            new_length: d,
            support_min,
        });
    }
    Ok((cur, log))
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Spherical distance from `q` to the geodesic triangle `p`.
fn distance_to_triangle(p: &[[f64; 3]; 3], q: [f64; 3]) -> f64 {
    let inside = (0..3).all(|a| dot(cross(p[a], p[(a + 1) % 3]), q) >= 0.0);
    if inside {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for a in 0..3 {
        let (x, y) = (p[a], p[(a + 1) % 3]);
        let n = cross(x, y);
        let nn = dot(n, n).sqrt();
        let n = [n[0] / nn, n[1] / nn, n[2] / nn];
        let qn = dot(q, n);
        let proj = [q[0] - qn * n[0], q[1] - qn * n[1], q[2] - qn * n[2]];
        let on_arc = dot(cross(x, proj), n) >= 0.0 && dot(cross(proj, y), n) >= 0.0;
        let d = if on_arc && dot(proj, proj) > 0.0 {
            qn.abs().min(1.0).asin()
        } else {
            dot(q, x).clamp(-1.0, 1.0).acos().min(dot(q, y).clamp(-1.0, 1.0).acos())
        };
        best = best.min(d);
    }
    best
}

/// Minimum over the surface of the support function of the lifted
/// face-circles: per face `cos ρ / cos(dist(q, face))` for face-circle
/// center `q` and radius `ρ`.
pub fn support_minimum(m: &DecoratedMetric) -> Result<f64, DelaunayError> {
    if m.background != Background::Spherical {
        return Err(DelaunayError::NotSpherical);
    }
    let mut best = f64::INFINITY;
    for f in 0..m.triangulation.face_count() {
        let tri = m.face_triangle(f);
        tri.check()?;
        let ang = interior_angles_unchecked(Background::Spherical, tri.lengths);
        let p = realize(Background::Spherical, tri.lengths, ang);
        let x = face_circle_lift(Background::Spherical, &p, tri.radii)?;
        let rho = 1f64.atan2(x[3]);
        let s = rho.sin();
        let q = [x[0] * s, x[1] * s, x[2] * s];
        let d = distance_to_triangle(&p, q);
        best = best.min(rho.cos() / d.cos());
    }
    Ok(best)
}

/// Groups faces across edges with `|w| ≤ tol`.
pub fn extract_tessellation(m: &DecoratedMetric, tol: f64) -> Result<Tessellation, DelaunayError> {
    let w = edge_weights(m)?;
    let t = &m.triangulation;
    let mut parent: Vec<usize> = (0..t.face_count()).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let nxt = p[y];
            p[y] = r;
            y = nxt;
        }
        r
    }
    let mut kept = Vec::new();
    let mut removed = Vec::new();
    for e in t.edges_in_label_order() {
        if w[e] < -tol {
            return Err(DelaunayError::NotDelaunay { edge: e, weight: w[e] });
        }
        if w[e] > tol {
            kept.push(e);
        } else {
            removed.push(e);
            let ((f, _), (g, _)) = t.edge_half_edges(e);
            let (a, b) = (find(&mut parent, f), find(&mut parent, g));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut index = vec![usize::MAX; t.face_count()];
    for f in 0..t.face_count() {
        let r = find(&mut parent, f);
        if index[r] == usize::MAX {
            index[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[index[r]].push(f);
    }
    Ok(Tessellation {
        triangulation: t.clone(),
        kept_edges: kept,
        removed_edges: removed,
        face_groups: groups,
    })
}
