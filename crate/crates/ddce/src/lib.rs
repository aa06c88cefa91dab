//! Decorated discrete conformal equivalence of piecewise spherical, Euclidean
//! and hyperbolic surfaces.

// Negated comparisons reject NaN; quadrature nodes keep full printed precision.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod delaunay;
pub mod fixtures;
pub mod metric;
pub mod solver;
pub mod surface;
pub mod transition;
pub mod trig;
