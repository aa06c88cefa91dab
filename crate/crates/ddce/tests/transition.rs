mod common;

use common::*;
use ddce::delaunay::flip_to_delaunay;
use ddce::fixtures::double_triangle;
use ddce::metric::*;
use ddce::transition::*;
use ddce::trig::{tau, Background};

const TS: [f64; 5] = [1.0, 10.0, 100.0, 1000.0, 10000.0];

fn hyperbolic_case(i: usize, r: &mut rand_chacha::ChaCha8Rng) -> (Invariant, Heights) {
    let (m, _) = flip_to_delaunay(&random(Background::Hyperbolic, i, r)).unwrap();
    (lambda_lengths(&m).unwrap(), heights_from_decoration(&m).unwrap())
}

#[test]
fn unit_parameter_is_identity() {
    let mut r = rng(41);
    for bg in [Background::Hyperbolic, Background::Spherical] {
        let m = random(bg, 2, &mut r);
        let h = heights_from_decoration(&m).unwrap();
        let h1 = scale_family(&h, &m.eps(), 1.0).unwrap();
        assert!(max_abs_diff(&h.h, &h1.h) < 1e-12);
    }
}

#[test]
fn ideal_vertices_shift_by_log_t() {
    let mut r = rng(42);
    let m = random(Background::Hyperbolic, 3, &mut r);
    let eps = m.eps();
    let h = heights_from_decoration(&m).unwrap();
    for t in [2.0, 10.0, 1e4] {
        let ht = scale_family(&h, &eps, t).unwrap();
        for v in 0..eps.len() {
            assert!(ht.h[v] >= h.h[v]);
            if !eps[v] {
                assert!((ht.h[v] - h.h[v] - t.ln()).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn bad_parameters_are_rejected() {
    let h = Heights::new(Background::Hyperbolic, vec![1.0]);
    assert_eq!(scale_family(&h, &[true], 0.5), Err(TransitionError::BadParameter(0.5)));
    let e = Heights::new(Background::Euclidean, vec![1.0]);
    assert_eq!(scale_family(&e, &[true], 2.0), Err(TransitionError::EuclideanInput));
    let mut r = rng(43);
    let (inv, h) = hyperbolic_case(0, &mut r);
    assert_eq!(transition_diagnostics(&inv, &h, &[10.0, 1.0]).unwrap_err(), TransitionError::NotIncreasing);
}

#[test]
fn constant_heights_have_zero_cusp() {
    for eps in [[true; 3], [false; 3]] {
        let h = Heights::new(Background::Hyperbolic, vec![0.7; 3]);
        let c = euclidean_limit(&h, &eps).unwrap();
        assert!(c.h.iter().all(|&x| x.abs() < 1e-15));
    }
}

#[test]
fn double_triangle_limit_reproduces_lambda() {
    for radii in [[0.2, 0.3, 0.25], [0.0; 3], [0.2, 0.0, 0.1]] {
        let m = DecoratedMetric::new(double_triangle(), Background::Hyperbolic, vec![1.0, 1.1, 0.9], radii.to_vec());
        let inv = lambda_lengths(&m).unwrap();
        let h = heights_from_decoration(&m).unwrap();
        let e = euclidean_metric(&inv, &euclidean_limit(&h, &inv.eps).unwrap()).unwrap();
        let back = lambda_lengths(&e).unwrap();
        assert!(max_abs_diff(&back.lambda, &inv.lambda) < 1e-10, "{radii:?}");
    }
}

#[test]
fn mixed_cusp_differences_match_large_t() {
    let m = DecoratedMetric::new(double_triangle(), Background::Hyperbolic, vec![1.0, 1.1, 0.9], vec![0.2, 0.0, 0.1]);
    let eps = m.eps();
    let h = heights_from_decoration(&m).unwrap();
    let c = euclidean_limit(&h, &eps).unwrap();
    let ht = scale_family(&h, &eps, 1e4).unwrap();
    // ln τ_ε(h^t) − ln t tends to 𝔥 up to the common gauge.
    let lt: Vec<f64> = (0..3).map(|v| tau(if eps[v] { 1.0 } else { 0.0 }, ht.h[v]).ln()).collect();
    for v in 1..3 {
        assert!(((lt[v] - lt[0]) - (c.h[v] - c.h[0])).abs() < 1e-12);
        assert!(((ht.h[v] - ht.h[0]) - (c.h[v] - c.h[0])).abs() < 1e-4, "{v}");
    }
}

#[test]
fn hyperbolic_corpus_transitions() {
    let mut r = rng(44);
    for i in 0..24 {
        let (inv, h) = hyperbolic_case(i, &mut r);
        let rows = transition_diagnostics(&inv, &h, &TS).unwrap();
        assert_eq!(rows.len(), TS.len());
        assert_eq!(rows[0].t, 1.0);
        let base = lambda_lengths(&rows[0].metric).unwrap();
        for w in rows.windows(2) {
            assert!(w[1].max_anglesum_defect < w[0].max_anglesum_defect, "{i}");
        }
        for row in &rows {
            let l = lambda_lengths(&row.metric).unwrap();
            assert!(max_abs_diff(&l.lambda, &base.lambda) < 1e-9);
        }
        let last = rows.last().unwrap();
        assert!(last.max_anglesum_defect < 1e-5);
        assert!(last.max_weight_deviation < 1e-5, "{i}: {}", last.max_weight_deviation);
    }
}

#[test]
fn spherical_family_is_defined() {
    let mut r = rng(45);
    let (m, _) = flip_to_delaunay(&random(Background::Spherical, 1, &mut r)).unwrap();
    let inv = lambda_lengths(&m).unwrap();
    let h = heights_from_decoration(&m).unwrap();
    let rows = transition_diagnostics(&inv, &h, &[1.0, 10.0]).unwrap();
    assert_eq!(rows.len(), 2);
}
