//! Geometric transitions: families `h^t = Ω⁻¹(t·Ω(h¹))` on a fixed invariant
//! and their Euclidean limit.

use std::f64::consts::PI;

use rayon::prelude::*;
use thiserror::Error;

use crate::delaunay::edge_weights;
use crate::metric::{
    decoration_from_heights, omega_inverse, omega_map, DecoratedMetric, Heights, Invariant,
    MetricError,
};
use crate::trig::{interior_angles, Background, TrigError};

/// Errors raised by transition operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransitionError {
    #[error("transition requires a hyperbolic or spherical background")]
    EuclideanInput,
    #[error("parameter t = {0} must be finite and at least 1")]
    BadParameter(f64),
    #[error("parameters must be strictly increasing")]
    NotIncreasing,
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Trig(#[from] TrigError),
}

/// `Ω⁻¹(t·Ω(h¹))`.
pub fn scale_family(h1: &Heights, eps: &[bool], t: f64) -> Result<Heights, TransitionError> {
    if !(t >= 1.0) || !t.is_finite() {
        return Err(TransitionError::BadParameter(t));
    }
    if h1.background == Background::Euclidean {
        return Err(TransitionError::EuclideanInput);
    }
    let w: Vec<f64> = omega_map(h1, eps)?.into_iter().map(|x| t * x).collect();
    Ok(omega_inverse(h1.background, h1.radius, &w, eps)?)
}

/// Euclidean cusp heights `𝔥_i = ln Ω_i − ln Ω_0`.
pub fn euclidean_limit(h: &Heights, eps: &[bool]) -> Result<Heights, TransitionError> {
    if h.background == Background::Euclidean {
        return Err(TransitionError::EuclideanInput);
    }
    let w = omega_map(h, eps)?;
    let base = w.first().map(|x| x.ln()).unwrap_or(0.0);
    Ok(Heights {
        background: Background::Euclidean,
        h: w.iter().map(|x| x.ln() - base).collect(),
        radius: h.radius,
    })
}

/// Euclidean metric with the invariant `inv` at cusp heights `𝔥`.
pub fn euclidean_metric(inv: &Invariant, cusp: &Heights) -> Result<DecoratedMetric, TransitionError> {
    let mut c = cusp.clone();
    c.background = Background::Euclidean;
    Ok(decoration_from_heights(inv, &c)?)
}

/// One row of [`transition_diagnostics`].
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionRow {
    pub t: f64,
    pub heights: Heights,
    pub metric: DecoratedMetric,
    /// Max over faces of `|angle sum − π|`.
    pub max_anglesum_defect: f64,
    /// Max over edges of `|w(h^t) − w⁰(𝔥)|`.
    pub max_weight_deviation: f64,
}

/// Max over faces of `|angle sum − π|`.
pub fn max_anglesum_defect(m: &DecoratedMetric) -> Result<f64, TrigError> {
    let mut best: f64 = 0.0;
    for f in 0..m.triangulation.face_count() {
        let a = interior_angles(m.background, m.face_triangle(f).lengths)?;
        best = best.max((a[0] + a[1] + a[2] - PI).abs());
    }
    Ok(best)
}

/// Sweeps `t` on the triangulation of `inv`, comparing each metric with the
/// Euclidean limit of `h¹`.
pub fn transition_diagnostics(
    inv: &Invariant,
    h1: &Heights,
    ts: &[f64],
) -> Result<Vec<TransitionRow>, TransitionError> {
    if ts.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(TransitionError::NotIncreasing);
    }
    let cusp = euclidean_limit(h1, &inv.eps)?;
    let w0 = edge_weights(&euclidean_metric(inv, &cusp)?)?;
    ts.par_iter()
        .map(|&t| {
            let h = scale_family(h1, &inv.eps, t)?;
            let m = decoration_from_heights(inv, &h)?;
            let w = edge_weights(&m)?;
            let dev = w.iter().zip(&w0).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
            Ok(TransitionRow {
                t,
                max_anglesum_defect: max_anglesum_defect(&m)?,
                max_weight_deviation: dev,
                heights: h,
                metric: m,
            })
        })
        .collect()
}
