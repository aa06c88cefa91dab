//! Prescribed cone angles by maximizing the discrete Hilbert–Einstein
//! functional in the heights chart.
//!
//! The state is an invariant `(T, λ, ε)` and heights `h`. At every evaluation
//! the triangulation is flipped in the invariant until it is weighted Delaunay
//! for `h`, then the metric is read off from `(λ, h)`. The gradient is
//! `Θ − θ`; `∂θ/∂h` is assembled from the decorated cotan half-weights.

use std::collections::VecDeque;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::metric::{
    check_heights, decoration_from_heights_unchecked, heights_from_decoration, lambda_lengths,
    length_from_heights, omega_map, radius_from_height, validate, DecoratedMetric, Heights, Invariant, MetricError,
};
use crate::delaunay::{flip_to_delaunay, DelaunayError};
use crate::surface::SurfaceError;
use crate::trig::{
    face_circle, interior_angles, tau, Background, DecoratedTriangle, TrigError, DEGENERACY_TOL,
};

/// Errors raised by the solver.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("target angles fail the Gauss-Bonnet condition")]
    Infeasible,
    #[error("invalid target angles: {0}")]
    BadTarget(String),
    #[error("no convergence after {} iterations (residual {})", .0.iterations, .0.residuals.last().copied().unwrap_or(f64::NAN))]
    MaxIterations(Box<SolveReport>),
    #[error("line search stalled after {} iterations (residual {})", .0.iterations, .0.residuals.last().copied().unwrap_or(f64::NAN))]
    LineSearchStalled(Box<SolveReport>),
    #[error("integration path leaves the heights domain")]
    PathLeavesDomain,
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Trig(#[from] TrigError),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error(transparent)]
    Delaunay(#[from] DelaunayError),
    #[error("invariant flips did not terminate")]
    FlipLimit,
}

/// Outcome of the Gauss–Bonnet test on target angles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Feasibility {
    Feasible,
    Infeasible,
    Unknown,
}

/// Newton trace.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    /// `‖Θ − θ‖∞` before each iteration and at the end.
    pub residuals: Vec<f64>,
    /// Invariant flips performed by each accepted step.
    pub flips: Vec<usize>,
    /// Accepted step lengths.
    pub steps: Vec<f64>,
    /// Increase of the functional over each accepted step.
    pub functional_increase: Vec<f64>,
    pub heights: Heights,
    pub scale_factors: Vec<f64>,
}

/// Cone angle at every vertex.
pub fn cone_angles(m: &DecoratedMetric) -> Result<Vec<f64>, TrigError> {
    let t = &m.triangulation;
    let mut theta = vec![0.0; t.vertex_count()];
    for f in 0..t.face_count() {
        let a = interior_angles(m.background, m.face_triangle(f).lengths)?;
        for (c, v) in t.face_vertices(f).into_iter().enumerate() {
            theta[v] += a[c];
        }
    }
    Ok(theta)
}

/// Hyperbolic: `ΣΘ/2π < 2g − 2 + |V|`; Euclidean: equality within `1e-12`;
/// spherical: unknown.
pub fn gauss_bonnet_check(bg: Background, theta: &[f64], genus: usize, n_v: usize) -> Feasibility {
    if theta.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
        return Feasibility::Infeasible;
    }
    let lhs = theta.iter().sum::<f64>() / (2.0 * PI);
    let rhs = 2.0 * genus as f64 - 2.0 + n_v as f64;
    match bg {
        Background::Hyperbolic => {
            if lhs < rhs - 1e-12 * rhs.abs().max(1.0) {
                Feasibility::Feasible
            } else {
                Feasibility::Infeasible
            }
        }
        Background::Euclidean => {
            if (lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1.0) {
                Feasibility::Feasible
            } else {
                Feasibility::Infeasible
            }
        }
        Background::Spherical => Feasibility::Unknown,
    }
}

/// `Θ − θ`.
pub fn gradient(m: &DecoratedMetric, theta: &[f64]) -> Result<Vec<f64>, TrigError> {
    let c = cone_angles(m)?;
    Ok(theta.iter().zip(&c).map(|(a, b)| a - b).collect())
}

/// `∂θ/∂h`, the negative of the Hessian of the functional.
pub fn angle_jacobian(m: &DecoratedMetric) -> Result<DMatrix<f64>, TrigError> {
    let t = &m.triangulation;
    let n = t.vertex_count();
    let geoms = m.geometries()?;
    let mut j = DMatrix::zeros(n, n);
    for (f, g) in geoms.iter().enumerate() {
        let v = t.face_vertices(f);
        let e = t.face_edges(f);
        for s in 0..3 {
            let (a, b) = (v[s], v[(s + 1) % 3]);
            let w = g.half_weight[s];
            let c = m.background.cs(m.lengths[e[s]]);
            j[(a, a)] += w * c;
            j[(b, b)] += w * c;
            j[(a, b)] -= w;
            j[(b, a)] -= w;
        }
    }
    Ok(j)
}

/// Hessian of the functional in the heights chart: `−(Δ + D)`.
pub fn hessian(m: &DecoratedMetric) -> Result<DMatrix<f64>, TrigError> {
    Ok(-angle_jacobian(m)?)
}

fn ef(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// `⟨X_a, X_b⟩` of the Gram vectors attached to two vertices joined by an edge.
fn gram(lambda: f64, ea: bool, eb: bool) -> f64 {
    -tau(ef(ea) * ef(eb), lambda)
}

/// Quadrilateral of an edge in the invariant: vertices `i, j, k, l` and the
/// λ-lengths `ij, jk, ki, il, lj`.
struct Quad {
    v: [usize; 4],
    lam: [f64; 5],
}

fn quad(inv: &Invariant, e: usize) -> Quad {
    let t = &inv.triangulation;
    let ((f, s), (g, u)) = t.edge_half_edges(e);
    let n = |x: usize| (x + 1) % 3;
    let p = |x: usize| (x + 2) % 3;
    Quad {
        v: [t.vertex(f, s), t.vertex(f, n(s)), t.vertex(f, p(s)), t.vertex(g, p(u))],
        lam: [
            inv.lambda[e],
            inv.lambda[t.edge(f, n(s))],
            inv.lambda[t.edge(f, p(s))],
            inv.lambda[t.edge(g, n(u))],
            inv.lambda[t.edge(g, p(u))],
        ],
    }
}

/// Coordinates `(a, b, c)` of the apexes `X_k` and `X_l` in the basis
/// `X_i, X_j, N`, with `c_k ≥ 0 ≥ c_l`, and the 2×2 Gram matrix of `X_i, X_j`.
struct QuadFrame {
    gram2: [[f64; 2]; 2],
    k: [f64; 3],
    l: [f64; 3],
}

fn quad_frame(q: &Quad, eps: &[bool]) -> QuadFrame {
    let [i, j, k, l] = q.v;
    let g_ij = gram(q.lam[0], eps[i], eps[j]);
    let gram2 = [[ef(eps[i]), g_ij], [g_ij, ef(eps[j])]];
    let det = gram2[0][0] * gram2[1][1] - g_ij * g_ij;
    let solve = |r0: f64, r1: f64, self_norm: f64| {
        let a = (r0 * gram2[1][1] - r1 * gram2[0][1]) / det;
        let b = (gram2[0][0] * r1 - gram2[1][0] * r0) / det;
        let c2 = self_norm - (a * r0 + b * r1);
        [a, b, c2.max(0.0).sqrt()]
    };
    let kk = solve(
        gram(q.lam[2], eps[k], eps[i]),
        gram(q.lam[1], eps[k], eps[j]),
        ef(eps[k]),
    );
    let ll = solve(
        gram(q.lam[3], eps[l], eps[i]),
        gram(q.lam[4], eps[l], eps[j]),
        ef(eps[l]),
    );
    QuadFrame {
        gram2,
        k: kk,
        l: [ll[0], ll[1], -ll[2]],
    }
}

/// λ-length of the other diagonal `kl` of the quadrilateral of edge `e`.
pub fn flipped_lambda(inv: &Invariant, e: usize) -> Result<f64, SolveError> {
    let q = quad(inv, e);
    let fr = quad_frame(&q, &inv.eps);
    let g = fr.gram2;
    let (a, b) = (fr.k, fr.l);
    let ip = a[0] * (g[0][0] * b[0] + g[0][1] * b[1])
        + a[1] * (g[1][0] * b[0] + g[1][1] * b[1])
        + a[2] * b[2];
    let val = -ip;
    let (ek, el) = (inv.eps[q.v[2]], inv.eps[q.v[3]]);
    if ek && el {
        if val >= 1.0 {
            Ok(crate::trig::acosh1p(val - 1.0))
        } else {
            Err(TrigError::FlipGeometryInvalid.into())
        }
    } else if val > 0.0 {
        Ok((2.0 * val).ln())
    } else {
        Err(TrigError::FlipGeometryInvalid.into())
    }
}

/// Relative convexity defect of edge `e` for vertex weights `omega`:
/// `(⟨X_l, m⟩ − ω_l)/ω_l` where `m` is the normal of the plane through
/// `X_i/ω_i, X_j/ω_j, X_k/ω_k`. Non-negative iff the edge is convex.
pub fn convexity_defect(inv: &Invariant, omega: &[f64], e: usize) -> f64 {
    let q = quad(inv, e);
    let fr = quad_frame(&q, &inv.eps);
    let [i, j, k, l] = q.v;
    let y3 = (omega[k] - fr.k[0] * omega[i] - fr.k[1] * omega[j]) / fr.k[2];
    let xl_m = fr.l[0] * omega[i] + fr.l[1] * omega[j] + fr.l[2] * y3;
    (xl_m - omega[l]) / omega[l]
}

/// Metric-based local Delaunay test of edge `e` at heights `h`, or `None`
/// when one of its triangles is not valid.
fn metric_edge_test(inv: &Invariant, h: &Heights, e: usize) -> Option<bool> {
    let t = &inv.triangulation;
    let bg = h.background;
    let ((f, s), (g, u)) = t.edge_half_edges(e);
    let tri = |face: usize, slot: usize| -> Option<DecoratedTriangle> {
        let mut l = [0.0; 3];
        let mut r = [0.0; 3];
        for c in 0..3 {
            let sl = (slot + c) % 3;
            let (a, b) = (t.vertex(face, sl), t.vertex(face, (sl + 1) % 3));
            l[c] = length_from_heights(bg, inv.lambda[t.edge(face, sl)], h.h[a], h.h[b], inv.eps[a], inv.eps[b]);
            r[c] = if inv.eps[a] { radius_from_height(bg, h.h[a]) } else { 0.0 };
        }
        let d = DecoratedTriangle::new(bg, l, r);
        d.check().ok().map(|_| d)
    };
    let (tf, tg) = (tri(f, s)?, tri(g, u)?);
    let (gf, gg) = (face_circle(&tf).ok()?, face_circle(&tg).ok()?);
    let at_i = gf.angles[0] + gg.angles[1];
    let at_j = gf.angles[1] + gg.angles[0];
    if at_i >= PI - DEGENERACY_TOL || at_j >= PI - DEGENERACY_TOL {
        return Some(true);
    }
    Some(gf.cot_alpha[0] + gg.cot_alpha[0] >= -crate::delaunay::DELAUNAY_TOL)
}

/// Tolerance on the relative convexity defect.
const CONVEX_TOL: f64 = 1e-11;

/// Flips the invariant until its triangulation is weighted Delaunay for `h`.
/// Returns the flipped invariant and the number of flips.
pub fn canonicalize(inv: &Invariant, h: &Heights) -> Result<(Invariant, usize), SolveError> {
    let omega = omega_map(h, &inv.eps)?;
    let mut cur = inv.clone();
    let n_e = cur.triangulation.edge_count();
    let limit = 100 * n_e + 100;
    let mut queue: VecDeque<usize> = (0..n_e).collect();
    let mut queued = vec![true; n_e];
    let mut flips = 0;
    while let Some(e) = queue.pop_front() {
        queued[e] = false;
        if cur.triangulation.check_flippable(e).is_err() {
            continue;
        }
        let ok = match metric_edge_test(&cur, h, e) {
            Some(x) => x,
            None => convexity_defect(&cur, &omega, e) >= -CONVEX_TOL,
        };
        if ok {
            continue;
        }
        if flips >= limit {
            return Err(SolveError::FlipLimit);
        }
        let lam = flipped_lambda(&cur, e)?;
        let ((f, _), (g, _)) = cur.triangulation.edge_half_edges(e);
        cur.triangulation = cur.triangulation.flip(e)?;
        cur.lambda[e] = lam;
        flips += 1;
        for face in [f, g] {
            for x in cur.triangulation.face_edges(face) {
                if x != e && !queued[x] {
                    queued[x] = true;
                    queue.push_back(x);
                }
            }
        }
    }
    Ok((cur, flips))
}

/// λ-lengths of `m` after flipping it to weighted Delaunay.
pub fn delaunay_invariant(m: &DecoratedMetric) -> Result<Invariant, SolveError> {
    let (d, _) = flip_to_delaunay(m)?;
    Ok(lambda_lengths(&d)?)
}

/// Canonical invariant and valid metric at heights `h`.
pub fn evaluate(inv: &Invariant, h: &Heights) -> Result<(Invariant, DecoratedMetric, usize), SolveError> {
    check_heights(inv, h)?;
    let (c, flips) = canonicalize(inv, h)?;
    let m = decoration_from_heights_unchecked(&c, h);
    let v = validate(&m);
    if !v.is_empty() {
        return Err(MetricError::HeightsOutOfDomain(format!("{} violations", v.len())).into());
    }
    Ok((c, m, flips))
}

fn check_target(m: &DecoratedMetric, theta: &[f64]) -> Result<(), SolveError> {
    if theta.len() != m.triangulation.vertex_count() {
        return Err(SolveError::BadTarget(format!(
            "expected {} angles, got {}",
            m.triangulation.vertex_count(),
            theta.len()
        )));
    }
    if theta.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
        return Err(SolveError::BadTarget("angles must be positive".into()));
    }
    Ok(())
}

const GK_NODES: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const GK_WK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const GK_WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Adaptive Gauss–Kronrod (7, 15) quadrature on `[a, b]`.
fn integrate<F>(f: &mut F, a: f64, b: f64, tol: f64, depth: usize) -> Result<f64, SolveError>
where
    F: FnMut(f64) -> Result<f64, SolveError>,
{
    let c = 0.5 * (a + b);
    let hw = 0.5 * (b - a);
    let mut k = 0.0;
    let mut g = 0.0;
    for n in 0..8 {
        let x = GK_NODES[n];
        let vals = if x == 0.0 {
            let v = f(c)?;
            (v, 0.0)
        } else {
            (f(c - hw * x)?, f(c + hw * x)?)
        };
        let s = vals.0 + vals.1;
        k += GK_WK[n] * s;
        if n % 2 == 1 {
            g += GK_WG[n / 2] * s;
        }
    }
    let (k, g) = (k * hw, g * hw);
    if (k - g).abs() <= tol || depth == 0 {
        Ok(k)
    } else {
        Ok(integrate(f, a, c, 0.5 * tol, depth - 1)? + integrate(f, c, b, 0.5 * tol, depth - 1)?)
    }
}

/// Functional difference along a polyline of heights, as the line integral of
/// `Θ − θ`.
pub fn functional_along(m0: &DecoratedMetric, path: &[Heights], theta: &[f64]) -> Result<f64, SolveError> {
    check_target(m0, theta)?;
    let inv = delaunay_invariant(m0)?;
    let mut total = 0.0;
    for w in path.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let dir: Vec<f64> = b.h.iter().zip(&a.h).map(|(x, y)| x - y).collect();
        if dir.iter().all(|&x| x == 0.0) {
            continue;
        }
        let mut f = |s: f64| -> Result<f64, SolveError> {
            let h = Heights {
                background: a.background,
                h: a.h.iter().zip(&dir).map(|(x, d)| x + s * d).collect(),
                radius: a.radius,
            };
            let (_, m, _) = evaluate(&inv, &h).map_err(|_| SolveError::PathLeavesDomain)?;
            let g = gradient(&m, theta)?;
            Ok(g.iter().zip(&dir).map(|(x, d)| x * d).sum())
        };
        total += integrate(&mut f, 0.0, 1.0, 1e-12, 30)?;
    }
    Ok(total)
}

/// Functional value at `h`, normalized to vanish at the heights of `m0`.
pub fn functional_value(m0: &DecoratedMetric, h: &Heights, theta: &[f64]) -> Result<f64, SolveError> {
    let h0 = heights_from_decoration(m0)?;
    functional_along(m0, &[h0, h.clone()], theta)
}

const GL3: [(f64, f64); 3] = [
    (0.112701665379258311482073460022, 5.0 / 18.0),
    (0.5, 8.0 / 18.0),
    (0.887298334620741688517926539978, 5.0 / 18.0),
];

fn solve_direction(j: &DMatrix<f64>, g: &[f64], pin: Option<usize>) -> Option<Vec<f64>> {
    let n = g.len();
    let idx: Vec<usize> = (0..n).filter(|&i| Some(i) != pin).collect();
    let m = idx.len();
    let a = DMatrix::from_fn(m, m, |r, c| j[(idx[r], idx[c])]);
    let b = DVector::from_fn(m, |r, _| g[idx[r]]);
    let x = match a.clone().cholesky() {
        Some(ch) => ch.solve(&b),
        None => a.lu().solve(&b)?,
    };
    let mut p = vec![0.0; n];
    for (r, &i) in idx.iter().enumerate() {
        p[i] = x[r];
    }
    if p.iter().all(|v| v.is_finite()) {
        Some(p)
    } else {
        None
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, &b| a.max(b.abs()))
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Solves for heights whose metric has cone angles `theta`, starting from `m0`.
///
/// Newton's method on `∂θ/∂h · p = Θ − θ` with backtracking. Hyperbolic and
/// Euclidean steps must increase the functional (Armijo) or reduce the
/// residual; spherical steps must reduce `‖Θ − θ‖₂`. The Euclidean reference
/// vertex (id 0) keeps its initial height.
pub fn newton_solve(
    m0: &DecoratedMetric,
    theta: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(DecoratedMetric, SolveReport), SolveError> {
    let t0 = &m0.triangulation;
    if gauss_bonnet_check(m0.background, theta, t0.genus(), t0.vertex_count()) == Feasibility::Infeasible {
        return Err(SolveError::Infeasible);
    }
    check_target(m0, theta)?;
    let bg = m0.background;
    let inv0 = delaunay_invariant(m0)?;
    let h0 = heights_from_decoration(m0)?;
    let (mut inv, mut m, first_flips) = evaluate(&inv0, &h0)?;
    let mut h = h0.clone();
    let pin = if bg == Background::Euclidean { Some(0) } else { None };

    let mut report = SolveReport {
        iterations: 0,
        residuals: Vec::new(),
        flips: Vec::new(),
        steps: Vec::new(),
        functional_increase: Vec::new(),
        heights: h0.clone(),
        scale_factors: vec![0.0; theta.len()],
    };
    let mut g = gradient(&m, theta)?;
    loop {
        let res = max_abs(&g);
        report.residuals.push(res);
        if res <= tol {
            break;
        }
        if report.iterations >= max_iter {
            report.heights = h.clone();
            report.scale_factors = scale_factors_from(m0, &m, &h0, &h);
            return Err(SolveError::MaxIterations(Box::new(report)));
        }
        let jac = angle_jacobian(&m)?;
        let p = match solve_direction(&jac, &g, pin) {
            Some(p) => p,
            None => {
                report.heights = h.clone();
                return Err(SolveError::LineSearchStalled(Box::new(report)));
            }
        };
        let slope: f64 = g.iter().zip(&p).map(|(a, b)| a * b).sum();
        let mut s = 1.0;
        let accepted = loop {
            if s < 1e-12 {
                break None;
            }
            let trial = Heights {
                background: bg,
                h: h.h.iter().zip(&p).map(|(x, d)| x + s * d).collect(),
                radius: h.radius,
            };
            if let Ok((inv_t, m_t, flips)) = evaluate(&inv, &trial) {
                let g_t = gradient(&m_t, theta)?;
                let ok;
                let mut gain = f64::NAN;
                if bg == Background::Spherical {
                    ok = norm2(&g_t) < (1.0 - 1e-4 * s) * norm2(&g);
                } else {
                    let mut dhe = 0.0;
                    let mut inside = true;
                    for &(x, wgt) in &GL3 {
                        let mid = Heights {
                            background: bg,
                            h: h.h.iter().zip(&p).map(|(a, d)| a + x * s * d).collect(),
                            radius: h.radius,
                        };
                        match evaluate(&inv, &mid) {
                            Ok((_, mm, _)) => {
                                let gm = gradient(&mm, theta)?;
                                dhe += wgt * s * gm.iter().zip(&p).map(|(a, b)| a * b).sum::<f64>();
                            }
                            Err(_) => {
                                inside = false;
                                break;
                            }
                        }
                    }
                    gain = dhe;
                    ok = inside
                        && (dhe >= 1e-4 * s * slope || max_abs(&g_t) < (1.0 - 1e-4 * s) * res);
                }
                if ok {
                    break Some((inv_t, m_t, flips, trial, g_t, gain));
                }
            }
            s *= 0.5;
        };
        match accepted {
            Some((inv_t, m_t, flips, trial, g_t, gain)) => {
                inv = inv_t;
                m = m_t;
                h = trial;
                g = g_t;
                report.iterations += 1;
                report.flips.push(flips);
                report.steps.push(s);
                report.functional_increase.push(gain);
            }
            None => {
                report.heights = h.clone();
                report.scale_factors = scale_factors_from(m0, &m, &h0, &h);
                return Err(SolveError::LineSearchStalled(Box::new(report)));
            }
        }
    }
    if report.iterations == 0 && first_flips == 0 && inv0.triangulation == m0.triangulation {
        report.heights = h0;
        return Ok((m0.clone(), report));
    }
    report.scale_factors = scale_factors_from(m0, &m, &h0, &h);
    report.heights = h;
    Ok((m, report))
}

/// Hyperideal: `ln(S(r̃)/S(r))`; ideal: `h₀ − h`.
fn scale_factors_from(m0: &DecoratedMetric, m: &DecoratedMetric, h0: &Heights, h: &Heights) -> Vec<f64> {
    let bg = m0.background;
    (0..m0.radii.len())
        .map(|v| {
            if m0.radii[v] > 0.0 {
                (bg.sn(m.radii[v]) / bg.sn(m0.radii[v])).ln()
            } else {
                h0.h[v] - h.h[v]
            }
        })
        .collect()
}
