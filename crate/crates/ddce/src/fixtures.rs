//! Standard triangulations and random decorated metrics.

use std::collections::HashMap;

use crate::metric::{validate, DecoratedMetric};
use crate::surface::{HalfEdge, SurfaceError, Triangulation};
use crate::trig::{diagonal_length, Background, DecoratedTriangle};

/// Triangulation from oriented vertex triples; every directed edge `(a, b)`
/// must have exactly one reverse `(b, a)`.
pub fn from_oriented_faces(faces: &[[usize; 3]]) -> Result<Triangulation, SurfaceError> {
    let mut at: HashMap<(usize, usize), HalfEdge> = HashMap::new();
    for (f, v) in faces.iter().enumerate() {
        for s in 0..3 {
            if at.insert((v[s], v[(s + 1) % 3]), (f, s)).is_some() {
                return Err(SurfaceError::NonInvolution(f, s));
            }
        }
    }
    let mut pairs = Vec::new();
    for (f, v) in faces.iter().enumerate() {
        for s in 0..3 {
            let (a, b) = (v[s], v[(s + 1) % 3]);
            let other = *at.get(&(b, a)).ok_or(SurfaceError::NonInvolution(f, s))?;
            if (f, s) < other {
                pairs.push(((f, s), other));
            }
        }
    }
    Triangulation::build_from_gluing(faces.len(), &pairs)
}

/// Two triangles glued along their boundaries (genus 0, 3 vertices).
pub fn double_triangle() -> Triangulation {
    Triangulation::build_from_gluing(2, &[((0, 0), (1, 2)), ((0, 1), (1, 1)), ((0, 2), (1, 0))])
        .expect("valid gluing")
}

/// Boundary of a tetrahedron.
pub fn tetrahedron() -> Triangulation {
    from_oriented_faces(&[[0, 1, 2], [0, 3, 1], [1, 3, 2], [0, 2, 3]]).expect("valid gluing")
}

/// Boundary of an octahedron.
pub fn octahedron() -> Triangulation {
    // 0 top, 5 bottom, equator 1..4 counterclockwise seen from the top.
    from_oriented_faces(&[
        [0, 1, 2],
        [0, 2, 3],
        [0, 3, 4],
        [0, 4, 1],
        [5, 2, 1],
        [5, 3, 2],
        [5, 4, 3],
        [5, 1, 4],
    ])
    .expect("valid gluing")
}

/// Boundary of an icosahedron.
pub fn icosahedron() -> Triangulation {
    // 0 top, 11 bottom, upper ring 1..5, lower ring 6..10.
    let mut f = Vec::new();
    for i in 0..5 {
        let (u, un) = (1 + i, 1 + (i + 1) % 5);
        let (l, ln) = (6 + i, 6 + (i + 1) % 5);
        f.push([0, u, un]);
        f.push([u, l, un]);
        f.push([un, l, ln]);
        f.push([11, ln, l]);
    }
    from_oriented_faces(&f).expect("valid gluing")
}

/// `n × m` square grid on a torus, each square split by a diagonal
/// (`n, m ≥ 3`).
pub fn torus_grid(n: usize, m: usize) -> Triangulation {
    let id = |i: usize, j: usize| (i % n) * m + (j % m);
    let mut f = Vec::new();
    for i in 0..n {
        for j in 0..m {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            f.push([a, b, c]);
            f.push([a, c, d]);
        }
    }
    from_oriented_faces(&f).expect("valid gluing")
}

/// One square with opposite sides identified, split by a diagonal
/// (genus 1, one vertex).
pub fn square_torus() -> Triangulation {
    Triangulation::build_from_gluing(2, &[((0, 0), (1, 1)), ((0, 1), (1, 2)), ((0, 2), (1, 0))])
        .expect("valid gluing")
}

/// Octagon with sides identified as `a b a⁻¹ b⁻¹ c d c⁻¹ d⁻¹`, fanned into six
/// triangles (genus 2, one vertex, nine edges).
pub fn genus2_octagon() -> Triangulation {
    Triangulation::build_from_gluing(
        6,
        &[
            ((0, 0), (1, 1)),
            ((0, 1), (2, 1)),
            ((3, 1), (5, 1)),
            ((4, 1), (5, 2)),
            ((0, 2), (1, 0)),
            ((1, 2), (2, 0)),
            ((2, 2), (3, 0)),
            ((3, 2), (4, 0)),
            ((4, 2), (5, 0)),
        ],
    )
    .expect("valid gluing")
}

/// Parameters of [`random_metric`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomMetricSpec {
    pub background: Background,
    /// Base edge length.
    pub length: f64,
    /// Relative length perturbation, at most 0.3.
    pub jitter: f64,
    /// Probability that a vertex is ideal.
    pub ideal_probability: f64,
    /// Radii are drawn from `[0, max_radius_fraction · min incident ℓ / 2)`.
    pub max_radius_fraction: f64,
}

/// Random valid decorated metric on `t`; `uniform` yields samples in `[0, 1)`.
/// Retries until valid.
pub fn random_metric<F: FnMut() -> f64>(
    t: &Triangulation,
    spec: RandomMetricSpec,
    uniform: &mut F,
) -> DecoratedMetric {
    loop {
        let lengths: Vec<f64> = (0..t.edge_count())
            .map(|_| spec.length * (1.0 + spec.jitter * (2.0 * uniform() - 1.0)))
            .collect();
        let mut min_len = vec![f64::INFINITY; t.vertex_count()];
        for (e, &l) in lengths.iter().enumerate() {
            let (i, j) = t.edge_endpoints(e);
            min_len[i] = min_len[i].min(l);
            min_len[j] = min_len[j].min(l);
        }
        let radii: Vec<f64> = (0..t.vertex_count())
            .map(|v| {
                let ideal = uniform() < spec.ideal_probability;
                let u = uniform();
                if ideal {
                    0.0
                } else {
                    (0.05 + 0.95 * u) * spec.max_radius_fraction * 0.5 * min_len[v]
                }
            })
            .collect();
        let m = DecoratedMetric::new(t.clone(), spec.background, lengths, radii);
        if validate(&m).is_empty() {
            return m;
        }
    }
}

/// Applies up to `count` random geometric flips that keep the metric valid
/// and every length at most twice the initial maximum.
pub fn scramble<F: FnMut() -> f64>(m: &DecoratedMetric, count: usize, uniform: &mut F) -> DecoratedMetric {
    let cap = 2.0 * m.lengths.iter().fold(0.0f64, |a, &b| a.max(b));
    let mut cur = m.clone();
    let n_e = cur.triangulation.edge_count();
    for _ in 0..count {
        let e = ((uniform() * n_e as f64) as usize).min(n_e - 1);
        if cur.triangulation.check_flippable(e).is_err() {
            continue;
        }
        let ((f, s), (g, u)) = cur.triangulation.edge_half_edges(e);
        let rot = |face: usize, slot: usize| {
            let t = cur.face_triangle(face);
            let r = |a: [f64; 3]| [a[slot], a[(slot + 1) % 3], a[(slot + 2) % 3]];
            DecoratedTriangle::new(cur.background, r(t.lengths), r(t.radii))
        };
        let Ok(d) = diagonal_length(cur.background, &rot(f, s), &rot(g, u)) else {
            continue;
        };
        if d > cap {
            continue;
        }
        let Ok(tri) = cur.triangulation.flip(e) else {
            continue;
        };
        let mut next = cur.clone();
        next.triangulation = tri;
        next.lengths[e] = d;
        if validate(&next).is_empty() {
            cur = next;
        }
    }
    cur
}
