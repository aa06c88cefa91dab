//! Per-triangle kernel for spherical, Euclidean and hyperbolic backgrounds.
//!
//! A triangle `(i, j, k)` carries lengths `[ℓ_ij, ℓ_jk, ℓ_ki]` and radii
//! `[r_i, r_j, r_k]`. Slot `s` refers to the edge from corner `s` to corner
//! `s + 1`; its apex is corner `s + 2`.
//!
//! Circles are lifted to R^{3,1} with the form `x0y0 + x1y1 + x2y2 − x3y3`:
//! spherical `(p, cos r)`, hyperbolic `(p_x, p_y, −cosh r, p_z)` for `p` on the
//! hyperboloid `x² + y² − z² = −1`, Euclidean `(c, (a − 1)/2, (a + 1)/2)` with
//! `a = |c|² − r²`. The inversive distance of two lifted circles is
//! `−⟨C_i, C_j⟩ / (|C_i| |C_j|)`.

use std::f64::consts::PI;

use thiserror::Error;

/// Relative tolerance on strict triangle inequalities.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// Constant-curvature model space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Background {
    Spherical,
    Euclidean,
    Hyperbolic,
}

impl Background {
    /// Curvature sign κ.
    pub fn curvature(self) -> i32 {
        match self {
            Background::Spherical => 1,
            Background::Euclidean => 0,
            Background::Hyperbolic => -1,
        }
    }

    /// Lower-case name used in files.
    pub fn name(self) -> &'static str {
        match self {
            Background::Spherical => "spherical",
            Background::Euclidean => "euclidean",
            Background::Hyperbolic => "hyperbolic",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "spherical" => Some(Background::Spherical),
            "euclidean" => Some(Background::Euclidean),
            "hyperbolic" => Some(Background::Hyperbolic),
            _ => None,
        }
    }

    /// `sin`, identity or `sinh`.
    #[inline]
    pub fn sn(self, x: f64) -> f64 {
        match self {
            Background::Spherical => x.sin(),
            Background::Euclidean => x,
            Background::Hyperbolic => x.sinh(),
        }
    }

    /// `tan`, identity or `tanh`.
    #[inline]
    pub fn tn(self, x: f64) -> f64 {
        match self {
            Background::Spherical => x.tan(),
            Background::Euclidean => x,
            Background::Hyperbolic => x.tanh(),
        }
    }

    /// `cos ℓ`, `1` or `cosh ℓ`: the diagonal factor of the Hessian.
    #[inline]
    pub fn cs(self, x: f64) -> f64 {
        match self {
            Background::Spherical => x.cos(),
            Background::Euclidean => 1.0,
            Background::Hyperbolic => x.cosh(),
        }
    }
}

/// Errors raised by the triangle kernel.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrigError {
    #[error("degenerate triangle: lengths {0:?} violate the strict triangle or perimeter bounds")]
    DegenerateTriangle([f64; 3]),
    #[error("inversive distance needs positive radii")]
    ZeroRadius,
    #[error("radii {radii:?} are not admissible for lengths {lengths:?}")]
    InvalidDecoration { lengths: [f64; 3], radii: [f64; 3] },
    #[error("no real face-circle")]
    NoRealFaceCircle,
    #[error("flipped triangles are not valid")]
    FlipGeometryInvalid,
}

/// `acosh(1 + x)` for `x ≥ 0`, accurate near zero.
#[inline]
pub fn acosh1p(x: f64) -> f64 {
    (x + (x * (2.0 + x)).sqrt()).ln_1p()
}

/// `(e^x + y e^{−x}) / 2`.
#[inline]
pub fn tau(y: f64, x: f64) -> f64 {
    0.5 * (x.exp() + y * (-x).exp())
}

/// Checks strict triangle inequalities and, for spherical triangles, the
/// bounds `ℓ < π` and perimeter `< 2π`.
pub fn check_lengths(bg: Background, l: [f64; 3]) -> Result<(), TrigError> {
    let bad = Err(TrigError::DegenerateTriangle(l));
    if l.iter().any(|x| !x.is_finite() || *x <= 0.0) {
        return bad;
    }
    let p = l[0] + l[1] + l[2];
    let tol = DEGENERACY_TOL * p;
    for a in 0..3 {
        if p - 2.0 * l[a] <= tol {
            return bad;
        }
    }
    if bg == Background::Spherical {
        if l.iter().any(|&x| x >= PI * (1.0 - DEGENERACY_TOL)) {
            return bad;
        }
        if p >= 2.0 * PI * (1.0 - DEGENERACY_TOL) {
            return bad;
        }
    }
    Ok(())
}

/// Interior angles `[θ_i, θ_j, θ_k]` from lengths `[ℓ_ij, ℓ_jk, ℓ_ki]`,
/// via the half-angle form of the law of cosines.
pub fn interior_angles(bg: Background, l: [f64; 3]) -> Result<[f64; 3], TrigError> {
    check_lengths(bg, l)?;
    Ok(interior_angles_unchecked(bg, l))
}

pub(crate) fn interior_angles_unchecked(bg: Background, l: [f64; 3]) -> [f64; 3] {
    let s = 0.5 * (l[0] + l[1] + l[2]);
    let f = |x: f64| bg.sn(x);
    let fs = f(s);
    // Corner c is opposite slot c + 1 and adjacent to slots c and c + 2.
    let mut out = [0.0; 3];
    for c in 0..3 {
        let opp = l[(c + 1) % 3];
        let a = l[c];
        let b = l[(c + 2) % 3];
        let num = (f(s - a) * f(s - b)).max(0.0).sqrt();
        let den = (fs * f(s - opp)).max(0.0).sqrt();
        out[c] = 2.0 * num.atan2(den);
    }
    out
}

/// Inversive distance of two vertex-circles at distance `ℓ`.
pub fn inversive_distance(bg: Background, l: f64, ri: f64, rj: f64) -> Result<f64, TrigError> {
    Ok(1.0 + inversive_distance_minus_one(bg, l, ri, rj)?)
}

/// `I − 1`, evaluated without cancellation near tangency.
pub fn inversive_distance_minus_one(
    bg: Background,
    l: f64,
    ri: f64,
    rj: f64,
) -> Result<f64, TrigError> {
    if ri <= 0.0 || rj <= 0.0 {
        return Err(TrigError::ZeroRadius);
    }
    let sp = 0.5 * (l + ri + rj);
    let sm = 0.5 * (l - ri - rj);
    Ok(match bg {
        Background::Spherical => 2.0 * sp.sin() * sm.sin() / (ri.sin() * rj.sin()),
        Background::Hyperbolic => 2.0 * sp.sinh() * sm.sinh() / (ri.sinh() * rj.sinh()),
        Background::Euclidean => (l - ri - rj) * (l + ri + rj) / (2.0 * ri * rj),
    })
}

/// A triangle with lengths `[ℓ_ij, ℓ_jk, ℓ_ki]` and radii `[r_i, r_j, r_k]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoratedTriangle {
    pub background: Background,
    pub lengths: [f64; 3],
    pub radii: [f64; 3],
}

impl DecoratedTriangle {
    pub fn new(background: Background, lengths: [f64; 3], radii: [f64; 3]) -> Self {
        DecoratedTriangle {
            background,
            lengths,
            radii,
        }
    }

    /// Checks lengths, radius ranges and per-edge hyperideality.
    pub fn check(&self) -> Result<(), TrigError> {
        check_lengths(self.background, self.lengths)?;
        let bad = Err(TrigError::InvalidDecoration {
            lengths: self.lengths,
            radii: self.radii,
        });
        for &r in &self.radii {
            if !r.is_finite() || r < 0.0 {
                return bad;
            }
            if self.background == Background::Spherical && r >= 0.5 * PI {
                return bad;
            }
        }
        for s in 0..3 {
            if self.radii[s] + self.radii[(s + 1) % 3] >= self.lengths[s] {
                return bad;
            }
        }
        Ok(())
    }
}

/// Derived per-face data of a decorated triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleGeometry {
    /// Interior angle at each corner.
    pub angles: [f64; 3],
    /// Face-circle radius; `None` for hyperbolic horocycles and hypercycles.
    pub face_radius: Option<f64>,
    /// Intersection angle α of the face-circle with the edge in each slot.
    pub alpha: [f64; 3],
    /// `cot α` per slot.
    pub cot_alpha: [f64; 3],
    /// `r_ij` per slot: half the chord cut from the edge by the face-circle.
    pub edge_radius: [f64; 3],
    /// Signed distance `d^k_ij` from the face-circle center to each edge,
    /// positive on the triangle's side; `None` when the center is not real.
    pub face_distance: [Option<f64>; 3],
    /// `tan d`, `d` or `tanh d` of `face_distance`, always real.
    pub face_distance_t: [f64; 3],
    /// Distance `d_ij` from the slot's first vertex to the foot of the center.
    pub foot_distance: [f64; 3],
    /// Half-weight per slot: `cot α · T(r_ij) / S(ℓ_ij)`.
    pub half_weight: [f64; 3],
}

/// Foot distance `d_ij` and section radius `r_ij` of an edge.
pub fn edge_section(bg: Background, l: f64, ri: f64, rj: f64) -> (f64, f64) {
    match bg {
        Background::Euclidean => {
            let d = (l * l + ri * ri - rj * rj) / (2.0 * l);
            let r2 = ((d - ri) * (d + ri)).max(0.0);
            (d, r2.sqrt())
        }
        Background::Hyperbolic => {
            let (ch_ri, ch_rj) = (ri.cosh(), rj.cosh());
            let d = ((l.cosh() * ch_ri - ch_rj) / (l.sinh() * ch_ri)).atanh();
            let s2 = ((d - ri).sinh() * (d + ri).sinh()).max(0.0) / (ch_ri * ch_ri);
            (d, s2.sqrt().asinh())
        }
        Background::Spherical => {
            let (c_ri, c_rj) = (ri.cos(), rj.cos());
            let d = (c_rj - l.cos() * c_ri).atan2(l.sin() * c_ri);
            let s2 = ((d - ri).sin() * (d + ri).sin()).max(0.0) / (c_ri * c_ri);
            (d, s2.sqrt().min(1.0).asin())
        }
    }
}

type V4 = [f64; 4];

#[inline]
fn mink(a: &V4, b: &V4) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2] - a[3] * b[3]
}

fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Vector Minkowski-orthogonal to three lifts.
fn mink_cross(a: &V4, b: &V4, c: &V4) -> V4 {
    let mut v = [0.0; 4];
    for (m, vm) in v.iter_mut().enumerate() {
        let cols: Vec<usize> = (0..4).filter(|&x| x != m).collect();
        let minor = [
            [a[cols[0]], a[cols[1]], a[cols[2]]],
            [b[cols[0]], b[cols[1]], b[cols[2]]],
            [c[cols[0]], c[cols[1]], c[cols[2]]],
        ];
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        *vm = sign * det3(minor);
    }
    v[3] = -v[3];
    v
}

/// Vertex positions of a triangle realized counterclockwise in the model:
/// unit vectors in R³, hyperboloid points `(x, y, z)` or planar points `(x, y, 0)`.
pub fn realize(bg: Background, l: [f64; 3], angles: [f64; 3]) -> [[f64; 3]; 3] {
    let (lij, lki, th) = (l[0], l[2], angles[0]);
    match bg {
        Background::Spherical => [
            [1.0, 0.0, 0.0],
            [lij.cos(), lij.sin(), 0.0],
            [lki.cos(), lki.sin() * th.cos(), lki.sin() * th.sin()],
        ],
        Background::Hyperbolic => [
            [0.0, 0.0, 1.0],
            [lij.sinh(), 0.0, lij.cosh()],
            [lki.sinh() * th.cos(), lki.sinh() * th.sin(), lki.cosh()],
        ],
        Background::Euclidean => [
            [0.0, 0.0, 0.0],
            [lij, 0.0, 0.0],
            [lki * th.cos(), lki * th.sin(), 0.0],
        ],
    }
}

/// Lift of the circle of radius `r` centered at model point `p`.
pub fn circle_lift(bg: Background, p: [f64; 3], r: f64) -> [f64; 4] {
    match bg {
        Background::Spherical => [p[0], p[1], p[2], r.cos()],
        Background::Hyperbolic => [p[0], p[1], -r.cosh(), p[2]],
        Background::Euclidean => {
            let a = p[0] * p[0] + p[1] * p[1] - r * r;
            [p[0], p[1], 0.5 * (a - 1.0), 0.5 * (a + 1.0)]
        }
    }
}

/// Unit lift of the geodesic through `p` and `q`, oriented toward `toward`.
fn line_lift(bg: Background, p: [f64; 3], q: [f64; 3], toward: [f64; 3]) -> V4 {
    let g = match bg {
        Background::Spherical => {
            let n = cross(p, q);
            let s = norm3(n);
            [n[0] / s, n[1] / s, n[2] / s, 0.0]
        }
        Background::Hyperbolic => {
            let c = cross(p, q);
            let m = [c[0], c[1], -c[2]];
            let s = (m[0] * m[0] + m[1] * m[1] - m[2] * m[2]).sqrt();
            [m[0] / s, m[1] / s, 0.0, m[2] / s]
        }
        Background::Euclidean => {
            let (dx, dy) = (q[0] - p[0], q[1] - p[1]);
            let s = dx.hypot(dy);
            let (mx, my) = (-dy / s, dx / s);
            let delta = mx * p[0] + my * p[1];
            [mx, my, delta, delta]
        }
    };
    let t = circle_lift(bg, toward, 0.0);
    if mink(&g, &t) < 0.0 {
        [-g[0], -g[1], -g[2], -g[3]]
    } else {
        g
    }
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm3(a: [f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

fn centroid(bg: Background, p: &[[f64; 3]; 3]) -> [f64; 3] {
    let s = [
        p[0][0] + p[1][0] + p[2][0],
        p[0][1] + p[1][1] + p[2][1],
        p[0][2] + p[1][2] + p[2][2],
    ];
    match bg {
        Background::Spherical => {
            let n = norm3(s);
            [s[0] / n, s[1] / n, s[2] / n]
        }
        Background::Hyperbolic => {
            let n = (s[2] * s[2] - s[0] * s[0] - s[1] * s[1]).sqrt();
            [s[0] / n, s[1] / n, s[2] / n]
        }
        Background::Euclidean => [s[0] / 3.0, s[1] / 3.0, 0.0],
    }
}

/// Unit lift of the face-circle, oriented so hyperideal vertex centers lie
/// outside it (or, with only ideal vertices, the centroid lies inside).
pub fn face_circle_lift(
    bg: Background,
    p: &[[f64; 3]; 3],
    radii: [f64; 3],
) -> Result<[f64; 4], TrigError> {
    let c: Vec<V4> = (0..3).map(|a| circle_lift(bg, p[a], radii[a])).collect();
    let x = mink_cross(&c[0], &c[1], &c[2]);
    let q = mink(&x, &x);
    if !(q > 0.0) || !q.is_finite() {
        return Err(TrigError::NoRealFaceCircle);
    }
    let s = q.sqrt();
    let mut xh = [x[0] / s, x[1] / s, x[2] / s, x[3] / s];
    let big = (0..3).max_by(|&a, &b| radii[a].total_cmp(&radii[b])).unwrap();
    let flip = if radii[big] > 0.0 {
        mink(&xh, &circle_lift(bg, p[big], 0.0)) > 0.0
    } else {
        mink(&xh, &circle_lift(bg, centroid(bg, p), 0.0)) < 0.0
    };
    if flip {
        for v in xh.iter_mut() {
            *v = -*v;
        }
    }
    Ok(xh)
}

/// Face-circle data of a decorated triangle.
pub fn face_circle(t: &DecoratedTriangle) -> Result<TriangleGeometry, TrigError> {
    t.check()?;
    let bg = t.background;
    let l = t.lengths;
    let r = t.radii;
    let angles = interior_angles_unchecked(bg, l);
    let p = realize(bg, l, angles);
    let x = face_circle_lift(bg, &p, r)?;

    let face_radius = match bg {
        Background::Spherical => Some(1.0f64.atan2(x[3])),
        Background::Hyperbolic => {
            let nn = x[0] * x[0] + x[1] * x[1] - x[3] * x[3];
            if nn < 0.0 && x[3] > 0.0 {
                Some((1.0 / (-nn).sqrt()).asinh())
            } else {
                None
            }
        }
        Background::Euclidean => {
            let w = x[3] - x[2];
            if w > 0.0 {
                Some(1.0 / w)
            } else {
                return Err(TrigError::NoRealFaceCircle);
            }
        }
    };

    let mut alpha = [0.0; 3];
    let mut cot_alpha = [0.0; 3];
    let mut edge_radius = [0.0; 3];
    let mut face_distance = [None; 3];
    let mut face_distance_t = [0.0; 3];
    let mut foot_distance = [0.0; 3];
    let mut half_weight = [0.0; 3];
    for s in 0..3 {
        let (a, b, k) = (s, (s + 1) % 3, (s + 2) % 3);
        let g = line_lift(bg, p[a], p[b], p[k]);
        let ca = mink(&x, &g).clamp(-1.0, 1.0);
        let sa = (1.0 - ca * ca).sqrt();
        if sa == 0.0 {
            return Err(TrigError::NoRealFaceCircle);
        }
        alpha[s] = ca.acos();
        cot_alpha[s] = ca / sa;
        let (d, rij) = edge_section(bg, l[s], r[a], r[b]);
        foot_distance[s] = d;
        edge_radius[s] = rij;
        let dt = cot_alpha[s] * bg.sn(rij);
        face_distance_t[s] = dt;
        face_distance[s] = match bg {
            Background::Spherical => Some(dt.atan()),
            Background::Euclidean => Some(dt),
            Background::Hyperbolic => {
                if dt.abs() < 1.0 {
                    Some(dt.atanh())
                } else {
                    None
                }
            }
        };
        half_weight[s] = cot_alpha[s] * bg.tn(rij) / bg.sn(l[s]);
    }
    Ok(TriangleGeometry {
        angles,
        face_radius,
        alpha,
        cot_alpha,
        edge_radius,
        face_distance,
        face_distance_t,
        foot_distance,
        half_weight,
    })
}

/// Third side from two sides and the included angle, in stable
/// half-angle form.
pub fn law_of_cosines_side(bg: Background, a: f64, b: f64, gamma: f64) -> f64 {
    let h = (0.5 * gamma).sin();
    match bg {
        Background::Euclidean => ((a - b).powi(2) + 4.0 * a * b * h * h).sqrt(),
        Background::Hyperbolic => {
            let x = (0.5 * (a - b)).sinh().powi(2) + a.sinh() * b.sinh() * h * h;
            2.0 * x.sqrt().asinh()
        }
        Background::Spherical => {
            let x = (0.5 * (a - b)).sin().powi(2) + a.sin() * b.sin() * h * h;
            2.0 * x.sqrt().min(1.0).asin()
        }
    }
}

/// Length of the diagonal `kl` of the quadrilateral formed by
/// `left = (i, j, k)` and `right = (j, i, l)`, which share edge `ij`
/// in slot 0 of both.
pub fn diagonal_length(
    bg: Background,
    left: &DecoratedTriangle,
    right: &DecoratedTriangle,
) -> Result<f64, TrigError> {
    left.check()?;
    right.check()?;
    let al = interior_angles_unchecked(bg, left.lengths);
    let ar = interior_angles_unchecked(bg, right.lengths);
    let at_i = al[0] + ar[1];
    let at_j = al[1] + ar[0];
    if at_i >= PI - DEGENERACY_TOL || at_j >= PI - DEGENERACY_TOL {
        return Err(TrigError::FlipGeometryInvalid);
    }
    let l_ki = left.lengths[2];
    let l_jk = left.lengths[1];
    let l_il = right.lengths[1];
    let l_lj = right.lengths[2];
    let d = law_of_cosines_side(bg, l_ki, l_il, at_i);
    let (ri, rj, rk, rl) = (left.radii[0], left.radii[1], left.radii[2], right.radii[2]);
    let t1 = DecoratedTriangle::new(bg, [l_ki, l_il, d], [rk, ri, rl]);
    let t2 = DecoratedTriangle::new(bg, [l_lj, l_jk, d], [rl, rj, rk]);
    if t1.check().is_err() || t2.check().is_err() {
        return Err(TrigError::FlipGeometryInvalid);
    }
    Ok(d)
}
