//! Decorated metrics on whole surfaces, conformal change, λ-lengths, heights
//! and the Ω maps.
//!
//! Heights: spherical `sin r = 1/cosh h`, hyperbolic `sinh r = 1/sinh h`,
//! Euclidean `r = e^{−h}`. With `A = e^h − εe^{−h}`, `B = e^h + εe^{−h}` and
//! `L = 2(e^λ + ε_iε_j e^{−λ})`, lengths and λ-lengths are related by
//! spherical `L = A_iA_j − cos ℓ B_iB_j`, hyperbolic `L = cosh ℓ A_iA_j − B_iB_j`
//! and Euclidean `L/2 = ℓ² e^{h_i+h_j} − ε_i e^{h_j−h_i} − ε_j e^{h_i−h_j}`.
//!
//! Ideal vertices are gauged so that the horocycle at every ideal vertex has
//! total length 1, which makes λ depend only on the conformal class.

use std::f64::consts::PI;
use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::surface::{Label, Triangulation};
use crate::trig::{
    acosh1p, check_lengths, face_circle, inversive_distance_minus_one, tau, Background,
    DecoratedTriangle, TriangleGeometry, TrigError,
};

/// A single violated metric constraint, identified by canonical labels.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// Length or radius arrays do not match the triangulation.
    Shape { lengths: usize, radii: usize },
    /// A length is non-finite, non-positive, or (spherical) not below π.
    EdgeLength { edge: Label, value: f64 },
    /// A radius is non-finite, negative, or (spherical) not below π/2.
    Radius { vertex: Label, value: f64 },
    /// `r_i + r_j ≥ ℓ_ij`.
    Hyperideality { edge: Label, value: f64 },
    /// A strict triangle inequality fails.
    TriangleInequality { face: usize },
    /// A spherical face has perimeter `≥ 2π`.
    Perimeter { face: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Shape { lengths, radii } => {
                write!(f, "expected per-edge lengths and per-vertex radii, got {lengths} and {radii}")
            }
            Violation::EdgeLength { edge, value } => write!(f, "edge e{edge}: invalid length {value}"),
            Violation::Radius { vertex, value } => write!(f, "vertex v{vertex}: invalid radius {value}"),
            Violation::Hyperideality { edge, value } => {
                write!(f, "edge e{edge}: vertex-circles intersect (r_i + r_j - l = {value})")
            }
            Violation::TriangleInequality { face } => {
                write!(f, "face {face}: triangle inequality violated")
            }
            Violation::Perimeter { face } => write!(f, "face {face}: perimeter not below 2pi"),
        }
    }
}

/// Errors raised by metric operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("invalid metric: {}", join(.0))]
    Invalid(Vec<Violation>),
    #[error("scale factor at vertex {0} leaves the spherical radius domain")]
    ScaleOutOfDomain(usize),
    #[error("conformal change produced an invalid metric: {}", join(.0))]
    ResultInvalid(Vec<Violation>),
    #[error("heights out of domain: {0}")]
    HeightsOutOfDomain(String),
    #[error("weight at vertex {0} out of range")]
    WeightOutOfRange(usize),
    #[error("metrics are not comparable: {0}")]
    NotComparable(String),
    #[error(transparent)]
    Trig(#[from] TrigError),
}

fn join(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

/// Background, per-edge lengths and per-vertex radii on a triangulation.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoratedMetric {
    pub triangulation: Triangulation,
    pub background: Background,
    /// Length per edge id.
    pub lengths: Vec<f64>,
    /// Radius per vertex id.
    pub radii: Vec<f64>,
}

impl DecoratedMetric {
    pub fn new(
        triangulation: Triangulation,
        background: Background,
        lengths: Vec<f64>,
        radii: Vec<f64>,
    ) -> Self {
        DecoratedMetric {
            triangulation,
            background,
            lengths,
            radii,
        }
    }

    /// Hyperideal flags: `true` where `r > 0`.
    pub fn eps(&self) -> Vec<bool> {
        self.radii.iter().map(|&r| r > 0.0).collect()
    }

    /// The decorated triangle of a face.
    pub fn face_triangle(&self, f: usize) -> DecoratedTriangle {
        let t = &self.triangulation;
        let e = t.face_edges(f);
        let v = t.face_vertices(f);
        DecoratedTriangle::new(
            self.background,
            [self.lengths[e[0]], self.lengths[e[1]], self.lengths[e[2]]],
            [self.radii[v[0]], self.radii[v[1]], self.radii[v[2]]],
        )
    }

    /// Face-circle data of one face.
    pub fn face_geometry(&self, f: usize) -> Result<TriangleGeometry, TrigError> {
        face_circle(&self.face_triangle(f))
    }

    /// Face-circle data of every face.
    pub fn geometries(&self) -> Result<Vec<TriangleGeometry>, TrigError> {
        (0..self.triangulation.face_count())
            .into_par_iter()
            .map(|f| self.face_geometry(f))
            .collect()
    }

    pub fn is_valid(&self) -> bool {
        validate(self).is_empty()
    }
}

/// Lists every violated constraint; empty iff the metric is valid.
pub fn validate(m: &DecoratedMetric) -> Vec<Violation> {
    let t = &m.triangulation;
    let mut out = Vec::new();
    if m.lengths.len() != t.edge_count() || m.radii.len() != t.vertex_count() {
        out.push(Violation::Shape {
            lengths: m.lengths.len(),
            radii: m.radii.len(),
        });
        return out;
    }
    let el = t.edge_labels();
    let vl = t.vertex_labels();
    let sph = m.background == Background::Spherical;
    for e in t.edges_in_label_order() {
        let l = m.lengths[e];
        if !l.is_finite() || l <= 0.0 || (sph && l >= PI) {
            out.push(Violation::EdgeLength {
                edge: el[e],
                value: l,
            });
        }
    }
    for v in t.vertices_in_label_order() {
        let r = m.radii[v];
        if !r.is_finite() || r < 0.0 || (sph && r >= 0.5 * PI) {
            out.push(Violation::Radius {
                vertex: vl[v],
                value: r,
            });
        }
    }
    for e in t.edges_in_label_order() {
        let (i, j) = t.edge_endpoints(e);
        let excess = m.radii[i] + m.radii[j] - m.lengths[e];
        if !(excess < 0.0) {
            out.push(Violation::Hyperideality {
                edge: el[e],
                value: excess,
            });
        }
    }
    for f in 0..t.face_count() {
        let tri = m.face_triangle(f);
        if check_lengths(Background::Euclidean, tri.lengths).is_err() {
            out.push(Violation::TriangleInequality { face: f });
        } else if sph && check_lengths(m.background, tri.lengths).is_err() {
            out.push(Violation::Perimeter { face: f });
        }
    }
    out
}

fn require_valid(m: &DecoratedMetric) -> Result<(), MetricError> {
    let v = validate(m);
    if v.is_empty() {
        Ok(())
    } else {
        Err(MetricError::Invalid(v))
    }
}

/// Fundamental discrete conformal invariant: λ per edge, ε per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct Invariant {
    pub triangulation: Triangulation,
    /// λ-length per edge id.
    pub lambda: Vec<f64>,
    /// Hyperideal flag per vertex id.
    pub eps: Vec<bool>,
}

/// Per-vertex heights with background and reference radius `R`.
#[derive(Debug, Clone, PartialEq)]
pub struct Heights {
    pub background: Background,
    pub h: Vec<f64>,
    /// Reference radius; `sinh R = 1` (hyperbolic) and `cosh R = √2`
    /// (spherical) by default.
    pub radius: f64,
}

/// Default reference radius `asinh(1)`, giving `sinh R = 1` and `cosh R = √2`.
pub fn default_radius() -> f64 {
    1f64.asinh()
}

impl Heights {
    pub fn new(background: Background, h: Vec<f64>) -> Self {
        Heights {
            background,
            h,
            radius: default_radius(),
        }
    }
}

#[inline]
fn ef(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// λ-length of one edge with ideal endpoints at height 0.
fn provisional_lambda(bg: Background, l: f64, ri: f64, rj: f64) -> f64 {
    match (ri > 0.0, rj > 0.0) {
        (true, true) => acosh1p(
            inversive_distance_minus_one(bg, l, ri, rj).expect("radii are positive"),
        ),
        (false, false) => match bg {
            Background::Euclidean => 2.0 * l.ln(),
            _ => 2.0 * bg.sn(0.5 * l).ln(),
        },
        (a, _) => {
            let r = if a { ri } else { rj };
            match bg {
                Background::Hyperbolic => {
                    (2.0 * (0.5 * (l + r)).sinh() * (0.5 * (l - r)).sinh() / r.sinh()).ln()
                }
                Background::Spherical => {
                    (2.0 * (0.5 * (l + r)).sin() * (0.5 * (l - r)).sin() / r.sin()).ln()
                }
                Background::Euclidean => ((l - r) * (l + r) / r).ln(),
            }
        }
    }
}

/// Length of the horocyclic arc at an ideal corner, from the λ-lengths of the
/// two incident edges and the opposite edge.
fn corner_arc(lam_ij: f64, lam_ik: f64, lam_jk: f64, eps_j: bool, eps_k: bool) -> f64 {
    let (ej, ek) = (ef(eps_j), ef(eps_k));
    let a = (lam_jk.exp() + ej * ek * (-lam_jk).exp()) * (-lam_ij - lam_ik).exp()
        + ej * (-2.0 * lam_ij).exp()
        + ek * (-2.0 * lam_ik).exp();
    a.sqrt()
}

/// Total horocycle length at every ideal vertex (0 at hyperideal vertices).
pub fn horocycle_lengths(t: &Triangulation, lambda: &[f64], eps: &[bool]) -> Vec<f64> {
    let mut out = vec![0.0; t.vertex_count()];
    for f in 0..t.face_count() {
        let v = t.face_vertices(f);
        let e = t.face_edges(f);
        for c in 0..3 {
            if eps[v[c]] {
                continue;
            }
            let (j, k) = (v[(c + 1) % 3], v[(c + 2) % 3]);
            let lam_ij = lambda[e[c]];
            let lam_jk = lambda[e[(c + 1) % 3]];
            let lam_ik = lambda[e[(c + 2) % 3]];
            out[v[c]] += corner_arc(lam_ij, lam_ik, lam_jk, eps[j], eps[k]);
        }
    }
    out
}

/// Hyperideal height from a positive radius.
fn height_from_radius(bg: Background, r: f64) -> f64 {
    match bg {
        Background::Hyperbolic => (1.0 / r.sinh()).asinh(),
        Background::Spherical => (1.0 / r.sin()).acosh(),
        Background::Euclidean => -r.ln(),
    }
}

/// Radius from a hyperideal height.
pub(crate) fn radius_from_height(bg: Background, h: f64) -> f64 {
    match bg {
        Background::Hyperbolic => (1.0 / h.sinh()).asinh(),
        Background::Spherical => (1.0 / h.cosh()).asin(),
        Background::Euclidean => (-h).exp(),
    }
}

/// λ-lengths and heights in the horocycle gauge.
fn gauged(m: &DecoratedMetric) -> (Vec<f64>, Vec<f64>) {
    let t = &m.triangulation;
    let eps = m.eps();
    let mut lambda: Vec<f64> = (0..t.edge_count())
        .map(|e| {
            let (i, j) = t.edge_endpoints(e);
            provisional_lambda(m.background, m.lengths[e], m.radii[i], m.radii[j])
        })
        .collect();
    let arcs = horocycle_lengths(t, &lambda, &eps);
    let shift: Vec<f64> = (0..t.vertex_count())
        .map(|v| if eps[v] { 0.0 } else { arcs[v].ln() })
        .collect();
    for (e, lam) in lambda.iter_mut().enumerate() {
        let (i, j) = t.edge_endpoints(e);
        *lam += shift[i] + shift[j];
    }
    let h = (0..t.vertex_count())
        .map(|v| {
            if eps[v] {
                height_from_radius(m.background, m.radii[v])
            } else {
                shift[v]
            }
        })
        .collect();
    (lambda, h)
}

/// The fundamental discrete conformal invariant of a valid metric.
pub fn lambda_lengths(m: &DecoratedMetric) -> Result<Invariant, MetricError> {
    require_valid(m)?;
    let (lambda, _) = gauged(m);
    Ok(Invariant {
        triangulation: m.triangulation.clone(),
        lambda,
        eps: m.eps(),
    })
}

/// Heights of a valid metric in the horocycle gauge.
pub fn heights_from_decoration(m: &DecoratedMetric) -> Result<Heights, MetricError> {
    require_valid(m)?;
    let (_, h) = gauged(m);
    Ok(Heights::new(m.background, h))
}

/// Checks the per-vertex and per-edge height conditions that do not need the
/// resulting lengths.
pub fn check_heights(inv: &Invariant, h: &Heights) -> Result<(), MetricError> {
    let t = &inv.triangulation;
    if h.h.len() != t.vertex_count() || inv.eps.len() != t.vertex_count() {
        return Err(MetricError::HeightsOutOfDomain("size mismatch".into()));
    }
    if let Some(v) = h.h.iter().position(|x| !x.is_finite()) {
        return Err(MetricError::HeightsOutOfDomain(format!("h_{v} is not finite")));
    }
    if h.background != Background::Euclidean {
        for v in 0..t.vertex_count() {
            if inv.eps[v] && !(h.h[v] > 0.0) {
                return Err(MetricError::HeightsOutOfDomain(format!(
                    "hyperideal vertex {v} has height {} <= 0",
                    h.h[v]
                )));
            }
        }
    }
    if h.background == Background::Spherical {
        for e in 0..t.edge_count() {
            let (i, j) = t.edge_endpoints(e);
            if !(inv.lambda[e] < h.h[i] + h.h[j]) {
                return Err(MetricError::HeightsOutOfDomain(format!(
                    "edge {e}: lambda >= h_i + h_j"
                )));
            }
        }
    }
    Ok(())
}

/// Edge length from λ and the endpoint heights.
pub fn length_from_heights(
    bg: Background,
    lambda: f64,
    hi: f64,
    hj: f64,
    ei: bool,
    ej: bool,
) -> f64 {
    let (fi, fj) = (ef(ei), ef(ej));
    let big_l = 2.0 * (lambda.exp() + fi * fj * (-lambda).exp());
    let n = big_l + 2.0 * fi * (hj - hi).exp() + 2.0 * fj * (hi - hj).exp();
    let a = |h: f64, e: bool| if e { 2.0 * h.sinh() } else { h.exp() };
    let b = |h: f64, e: bool| if e { 2.0 * h.cosh() } else { h.exp() };
    match bg {
        Background::Hyperbolic => {
            let x = n / (a(hi, ei) * a(hj, ej));
            2.0 * (0.5 * x).sqrt().asinh()
        }
        Background::Spherical => {
            let x = n / (b(hi, ei) * b(hj, ej));
            if x > 2.0 {
                f64::NAN
            } else {
                2.0 * (0.5 * x).sqrt().asin()
            }
        }
        Background::Euclidean => (0.5 * n * (-hi - hj).exp()).sqrt(),
    }
}

/// Metric on `inv.triangulation` with λ-lengths `inv.lambda` and heights `h`.
pub fn decoration_from_heights(inv: &Invariant, h: &Heights) -> Result<DecoratedMetric, MetricError> {
    check_heights(inv, h)?;
    let m = decoration_from_heights_unchecked(inv, h);
    let v = validate(&m);
    if v.is_empty() {
        Ok(m)
    } else {
        Err(MetricError::HeightsOutOfDomain(join(&v)))
    }
}

pub(crate) fn decoration_from_heights_unchecked(inv: &Invariant, h: &Heights) -> DecoratedMetric {
    let t = &inv.triangulation;
    let bg = h.background;
    let lengths = (0..t.edge_count())
        .map(|e| {
            let (i, j) = t.edge_endpoints(e);
            length_from_heights(bg, inv.lambda[e], h.h[i], h.h[j], inv.eps[i], inv.eps[j])
        })
        .collect();
    let radii = (0..t.vertex_count())
        .map(|v| {
            if inv.eps[v] {
                radius_from_height(bg, h.h[v])
            } else {
                0.0
            }
        })
        .collect();
    DecoratedMetric::new(t.clone(), bg, lengths, radii)
}

/// `cosh x − 1` or `1 − cos x` without cancellation.
fn vers(bg: Background, x: f64) -> f64 {
    match bg {
        Background::Hyperbolic => 2.0 * (0.5 * x).sinh().powi(2),
        Background::Spherical => 2.0 * (0.5 * x).sin().powi(2),
        Background::Euclidean => 0.5 * x * x,
    }
}

/// `c_a c_b − 1` from `c_a − 1` and `c_b − 1`.
#[inline]
fn prod_minus_one(a: f64, b: f64) -> f64 {
    a * b + a + b
}

/// Applies logarithmic scale factors `u` to a valid metric.
pub fn conformal_change(m: &DecoratedMetric, u: &[f64]) -> Result<DecoratedMetric, MetricError> {
    require_valid(m)?;
    let t = &m.triangulation;
    if u.len() != t.vertex_count() {
        return Err(MetricError::NotComparable("scale factor count".into()));
    }
    let bg = m.background;
    let mut radii = m.radii.clone();
    for v in 0..t.vertex_count() {
        if u[v] == 0.0 || m.radii[v] == 0.0 {
            continue;
        }
        let s = u[v].exp() * bg.sn(m.radii[v]);
        radii[v] = match bg {
            Background::Hyperbolic => s.asinh(),
            Background::Euclidean => s,
            Background::Spherical => {
                if s >= 1.0 {
                    return Err(MetricError::ScaleOutOfDomain(v));
                }
                s.asin()
            }
        };
    }
    let mut lengths = m.lengths.clone();
    for e in 0..t.edge_count() {
        let (i, j) = t.edge_endpoints(e);
        if u[i] == 0.0 && u[j] == 0.0 {
            continue;
        }
        let l = m.lengths[e];
        let (ri, rj, ni, nj) = (m.radii[i], m.radii[j], radii[i], radii[j]);
        let k = (u[i] + u[j]).exp();
        lengths[e] = match bg {
            Background::Euclidean => {
                let c = l * l - ri * ri - rj * rj;
                (k * c + ni * ni + nj * nj).max(0.0).sqrt()
            }
            Background::Hyperbolic | Background::Spherical => {
                // cosh ℓ̃ − 1 = k (cosh ℓ − cosh r_i cosh r_j) + (cosh r̃_i cosh r̃_j − 1),
                // 1 − cos ℓ̃ = k (cos r_i cos r_j − cos ℓ) + (1 − cos r̃_i cos r̃_j).
                let old = vers(bg, l) - signed_pm1(bg, ri, rj);
                let new = k * old + signed_pm1(bg, ni, nj);
                if !(new > 0.0) {
                    return Err(MetricError::ResultInvalid(vec![Violation::EdgeLength {
                        edge: t.edge_labels()[e],
                        value: f64::NAN,
                    }]));
                }
                match bg {
                    Background::Hyperbolic => 2.0 * (0.5 * new).sqrt().asinh(),
                    _ => {
                        if new > 2.0 {
                            return Err(MetricError::ResultInvalid(vec![Violation::EdgeLength {
                                edge: t.edge_labels()[e],
                                value: f64::NAN,
                            }]));
                        }
                        2.0 * (0.5 * new).sqrt().asin()
                    }
                }
            }
        };
    }
    let out = DecoratedMetric::new(t.clone(), bg, lengths, radii);
    let v = validate(&out);
    if v.is_empty() {
        Ok(out)
    } else {
        Err(MetricError::ResultInvalid(v))
    }
}

/// Hyperbolic `cosh a cosh b − 1`, spherical `1 − cos a cos b`.
fn signed_pm1(bg: Background, a: f64, b: f64) -> f64 {
    let (va, vb) = (vers(bg, a), vers(bg, b));
    match bg {
        Background::Spherical => va + vb - va * vb,
        _ => prod_minus_one(va, vb),
    }
}

/// Ω weights of heights: hyperbolic `τ_ε(h)/sinh R`, spherical
/// `τ_{−ε}(h)/cosh R`, Euclidean `e^h`.
pub fn omega_map(h: &Heights, eps: &[bool]) -> Result<Vec<f64>, MetricError> {
    let r = h.radius;
    h.h.iter()
        .zip(eps)
        .enumerate()
        .map(|(v, (&x, &e))| {
            let w = match h.background {
                Background::Hyperbolic => tau(ef(e), x) / r.sinh(),
                Background::Spherical => tau(-ef(e), x) / r.cosh(),
                Background::Euclidean => x.exp(),
            };
            if w > 0.0 && w.is_finite() {
                Ok(w)
            } else {
                Err(MetricError::WeightOutOfRange(v))
            }
        })
        .collect()
}

/// Inverse of [`omega_map`].
pub fn omega_inverse(
    bg: Background,
    radius: f64,
    omega: &[f64],
    eps: &[bool],
) -> Result<Heights, MetricError> {
    let h = omega
        .iter()
        .zip(eps)
        .enumerate()
        .map(|(v, (&w, &e))| {
            if !(w > 0.0) || !w.is_finite() {
                return Err(MetricError::WeightOutOfRange(v));
            }
            match (bg, e) {
                (Background::Hyperbolic, true) => {
                    let y = w * radius.sinh();
                    if y > 1.0 {
                        Ok(acosh1p(y - 1.0))
                    } else {
                        Err(MetricError::WeightOutOfRange(v))
                    }
                }
                (Background::Hyperbolic, false) => Ok((2.0 * w * radius.sinh()).ln()),
                (Background::Spherical, true) => Ok((w * radius.cosh()).asinh()),
                (Background::Spherical, false) => Ok((2.0 * w * radius.cosh()).ln()),
                (Background::Euclidean, _) => Ok(w.ln()),
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Heights {
        background: bg,
        h,
        radius,
    })
}

/// Logarithmic scale factors `u` taking `m` toward `m2`.
///
/// Hyperideal vertices use the radius ratio; ideal vertices use the
/// difference of gauged heights, `u = h − h̃`.
pub fn scale_factors(m: &DecoratedMetric, m2: &DecoratedMetric) -> Result<Vec<f64>, MetricError> {
    if m.background != m2.background {
        return Err(MetricError::NotComparable("backgrounds differ".into()));
    }
    if m.eps() != m2.eps() {
        return Err(MetricError::NotComparable("ideal/hyperideal pattern differs".into()));
    }
    let h1 = heights_from_decoration(m)?;
    let h2 = heights_from_decoration(m2)?;
    let bg = m.background;
    Ok((0..m.radii.len())
        .map(|v| {
            if m.radii[v] > 0.0 {
                (bg.sn(m2.radii[v]) / bg.sn(m.radii[v])).ln()
            } else {
                h1.h[v] - h2.h[v]
            }
        })
        .collect())
}

/// Whether `m2` is the conformal change of `m` by [`scale_factors`], within
/// `tol` on every length and radius. Both metrics must share a triangulation.
pub fn are_dce(m: &DecoratedMetric, m2: &DecoratedMetric, tol: f64) -> Result<bool, MetricError> {
    if m.triangulation != m2.triangulation {
        return Err(MetricError::NotComparable("triangulations differ".into()));
    }
    let u = scale_factors(m, m2)?;
    let m3 = match conformal_change(m, &u) {
        Ok(x) => x,
        Err(MetricError::ResultInvalid(_)) | Err(MetricError::ScaleOutOfDomain(_)) => return Ok(false),
        Err(e) => return Err(e),
    };
    let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol);
    Ok(close(&m3.lengths, &m2.lengths) && close(&m3.radii, &m2.radii))
}
