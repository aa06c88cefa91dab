//! Reference values computed independently at 40-digit precision.
#![allow(clippy::excessive_precision)]

mod common;

use std::f64::consts::PI;

use ddce::fixtures::genus2_octagon;
use ddce::metric::DecoratedMetric;
use ddce::solver::{cone_angles, newton_solve};
use ddce::trig::*;

const HYP_EQUILATERAL_ANGLE: f64 = 0.918_797_872_178_027_369_04;
const SPH_INVERSIVE: f64 = 4.263_782_812_897_355_912_5;
const HYP_INVERSIVE: f64 = 21.042_998_126_782_536_515;
const OCTANT_ALPHA: f64 = std::f64::consts::FRAC_PI_4;
const HYP_KITE_DIAGONAL: f64 = 1.475_465_799_150_654_289_9;
const GENUS2_L: f64 = 3.438_214_241_230_103_091_9;
const HYP_HALF_WEIGHTS: [f64; 3] = [
    0.108_378_212_040_370_640_71,
    0.289_190_027_328_075_032_4,
    0.215_185_528_148_912_681_31,
];
const HYP_FACE_RADIUS: f64 = 0.552_951_250_667_840_234_08;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

#[test]
fn hyperbolic_equilateral_angles() {
    let a = interior_angles(Background::Hyperbolic, [1.0; 3]).unwrap();
    for x in a {
        assert!(close(x, HYP_EQUILATERAL_ANGLE, 1e-14), "{x}");
    }
}

#[test]
fn inversive_distances() {
    let s = inversive_distance(Background::Spherical, 1.0, 0.3, 0.3).unwrap();
    assert!(close(s, SPH_INVERSIVE, 1e-13), "{s}");
    let h = inversive_distance(Background::Hyperbolic, 2.0, 0.3, 0.4).unwrap();
    assert!(close(h, HYP_INVERSIVE, 1e-13), "{h}");
}

#[test]
fn euclidean_equilateral_face_circle() {
    let g = face_circle(&DecoratedTriangle::new(Background::Euclidean, [2.0; 3], [0.5; 3])).unwrap();
    for s in 0..3 {
        assert!(close(g.edge_radius[s], 0.75f64.sqrt(), 1e-14));
        assert!(close(g.face_distance[s].unwrap(), 1.0 / 3f64.sqrt(), 1e-14));
    }
}

#[test]
fn spherical_octant_face_circle_angle() {
    let g = face_circle(&DecoratedTriangle::new(Background::Spherical, [PI / 2.0; 3], [0.0; 3])).unwrap();
    for s in 0..3 {
        assert!(close(g.alpha[s], OCTANT_ALPHA, 1e-14), "{}", g.alpha[s]);
    }
}

#[test]
fn hyperbolic_kite_diagonal() {
    let left = DecoratedTriangle::new(Background::Hyperbolic, [1.5, 1.2, 1.2], [0.0; 3]);
    let right = DecoratedTriangle::new(Background::Hyperbolic, [1.5, 1.0, 1.0], [0.0; 3]);
    let d = diagonal_length(Background::Hyperbolic, &left, &right).unwrap();
    assert!(close(d, HYP_KITE_DIAGONAL, 1e-14), "{d}");
}

#[test]
fn hyperbolic_half_weights() {
    let g = face_circle(&DecoratedTriangle::new(
        Background::Hyperbolic,
        [1.1, 0.9, 1.0],
        [0.2, 0.1, 0.15],
    ))
    .unwrap();
    for s in 0..3 {
        assert!(close(g.half_weight[s], HYP_HALF_WEIGHTS[s], 1e-12), "{s}: {}", g.half_weight[s]);
    }
    assert!(close(g.face_radius.unwrap(), HYP_FACE_RADIUS, 1e-12));
}

#[test]
fn genus2_uniformization_is_equilateral() {
    let t = genus2_octagon();
    let m = DecoratedMetric::new(t, Background::Hyperbolic, vec![2.0; 9], vec![0.0]);
    let (s, _) = newton_solve(&m, &[2.0 * PI], 1e-12, 25).unwrap();
    for &l in &s.lengths {
        assert!(close(l, GENUS2_L, 1e-11), "{l}");
    }
    let a = interior_angles(Background::Hyperbolic, [GENUS2_L; 3]).unwrap();
    assert!(close(a[0], PI / 9.0, 1e-14));
    let th = cone_angles(&s).unwrap();
    assert!((th[0] - 2.0 * PI).abs() < 1e-10);
}

#[test]
fn genus2_cone_angle_is_eighteen_corners() {
    let t = genus2_octagon();
    let m = DecoratedMetric::new(t, Background::Hyperbolic, vec![1.0; 9], vec![0.0]);
    let th = cone_angles(&m).unwrap();
    assert!(close(th[0], 18.0 * HYP_EQUILATERAL_ANGLE, 1e-13));
}
