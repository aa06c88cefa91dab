mod common;

use ddce::fixtures::*;
use ddce::surface::{SurfaceError, Triangulation};
use proptest::prelude::*;

#[test]
fn fixture_topology() {
    let cases = [
        (double_triangle(), 0, 3, 3),
        (tetrahedron(), 0, 4, 6),
        (octahedron(), 0, 6, 12),
        (icosahedron(), 0, 12, 30),
        (torus_grid(3, 3), 1, 9, 27),
        (square_torus(), 1, 1, 3),
        (genus2_octagon(), 2, 1, 9),
    ];
    for (t, g, v, e) in cases {
        assert_eq!(t.genus(), g);
        assert_eq!(t.vertex_count(), v);
        assert_eq!(t.edge_count(), e);
        assert!(t.orbits_consistent());
    }
    assert_eq!(genus2_octagon().euler_characteristic(), -2);
}

#[test]
fn bad_gluings_are_rejected() {
    assert_eq!(
        Triangulation::build_from_gluing(2, &[((0, 0), (1, 2)), ((0, 1), (1, 1))]).unwrap_err(),
        SurfaceError::NonInvolution(0, 2)
    );
    assert!(matches!(
        Triangulation::build_from_gluing(1, &[((0, 0), (0, 0)), ((0, 1), (0, 2))]),
        Err(SurfaceError::NonInvolution(..))
    ));
    assert!(matches!(
        Triangulation::build_from_gluing(1, &[((0, 0), (0, 3))]),
        Err(SurfaceError::InvalidHalfEdge(0, 3))
    ));
    assert_eq!(Triangulation::build_from_gluing(0, &[]).unwrap_err(), SurfaceError::Empty);
}

#[test]
fn double_triangle_edges_are_unflippable() {
    let t = double_triangle();
    for e in 0..3 {
        assert!(matches!(t.flip(e), Err(SurfaceError::UnflippableSelfGluing(_))));
    }
}

#[test]
fn gluing_round_trip() {
    for t in common::triangulations() {
        let u = Triangulation::build_from_gluing(t.face_count(), &t.gluing()).unwrap();
        assert_eq!(u, t);
    }
}

fn flippable(t: &Triangulation) -> Vec<usize> {
    (0..t.edge_count()).filter(|&e| t.check_flippable(e).is_ok()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn flips_preserve_topology(which in 0usize..8, picks in prop::collection::vec(any::<prop::sample::Index>(), 1..30)) {
        let t0 = common::triangulations()[which].clone();
        let mut t = t0.clone();
        for p in picks {
            let f = flippable(&t);
            if f.is_empty() { break; }
            let e = f[p.index(f.len())];
            let before = t.edge_endpoints(e);
            t = t.flip(e).unwrap();
            prop_assert!(t.orbits_consistent());
            prop_assert_eq!(t.vertex_count(), t0.vertex_count());
            prop_assert_eq!(t.edge_count(), t0.edge_count());
            prop_assert_eq!(t.genus(), t0.genus());
            let back = t.flip(e).unwrap();
            let (a, b) = back.edge_endpoints(e);
            prop_assert!((a, b) == before || (b, a) == before);
            prop_assert_eq!(back.canonicalized().0, t.flip(e).unwrap().canonicalized().0);
        }
    }

    #[test]
    fn labels_are_deterministic(which in 0usize..8, picks in prop::collection::vec(any::<prop::sample::Index>(), 0..10)) {
        let mut t = common::triangulations()[which].clone();
        for p in picks {
            let f = flippable(&t);
            if f.is_empty() { break; }
            t = t.flip(f[p.index(f.len())]).unwrap();
        }
        let u = Triangulation::build_from_gluing(t.face_count(), &t.gluing()).unwrap();
        let sorted = |mut v: Vec<ddce::surface::Label>| { v.sort(); v };
        prop_assert_eq!(sorted(t.edge_labels()), u.edge_labels());
        prop_assert_eq!(sorted(t.vertex_labels()), u.vertex_labels());
        prop_assert_eq!(t.edge_labels(), t.clone().edge_labels());
        let (c, _, _) = t.canonicalized();
        prop_assert!(c.has_canonical_ids());
        prop_assert_eq!(c.canonicalized().0, c.clone());
    }
}
