#![allow(dead_code)]

use ddce::fixtures::*;
use ddce::metric::DecoratedMetric;
use ddce::surface::Triangulation;
use ddce::trig::Background;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const BACKGROUNDS: [Background; 3] = [Background::Hyperbolic, Background::Euclidean, Background::Spherical];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Triangulations with at most 12 vertices.
pub fn triangulations() -> Vec<Triangulation> {
    vec![
        double_triangle(),
        tetrahedron(),
        octahedron(),
        icosahedron(),
        torus_grid(3, 3),
        torus_grid(3, 4),
        square_torus(),
        genus2_octagon(),
    ]
}

pub fn spec(bg: Background) -> RandomMetricSpec {
    RandomMetricSpec {
        background: bg,
        length: if bg == Background::Spherical { 0.6 } else { 1.0 },
        jitter: 0.2,
        ideal_probability: 0.3,
        max_radius_fraction: 0.8,
    }
}

/// The `i`-th random metric of a corpus.
pub fn random(bg: Background, i: usize, r: &mut ChaCha8Rng) -> DecoratedMetric {
    let ts = triangulations();
    let t = &ts[i % ts.len()];
    let mut u = || r.gen::<f64>();
    random_metric(t, spec(bg), &mut u)
}

/// The `i`-th random metric, scrambled by random geometric flips.
pub fn scrambled(bg: Background, i: usize, r: &mut ChaCha8Rng) -> DecoratedMetric {
    let m = random(bg, i, r);
    let mut u = || r.gen::<f64>();
    scramble(&m, 40, &mut u)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}
