//! Acceptance criteria, one pass/fail line per criterion.

#[path = "../../ddce/tests/common/mod.rs"]
mod common;

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use common::*;
use ddce::delaunay::*;
use ddce::fixtures::genus2_octagon;
use ddce::metric::*;
use ddce::solver::*;
use ddce::transition::transition_diagnostics;
use ddce::trig::{interior_angles, inversive_distance, Background};
use ddce_cli::io::read_surface;
use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn fixtures_dir() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn fixture_files() -> Vec<String> {
    let mut v: Vec<String> = std::fs::read_dir(fixtures_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .map(|p| p.to_string_lossy().into_owned())
        .collect();
    v.sort();
    v
}

fn random_u(n: usize, amp: f64, r: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| amp * (2.0 * r.gen::<f64>() - 1.0)).collect()
}

fn hessian_fd_error(m: &DecoratedMetric) -> f64 {
    let inv = lambda_lengths(m).unwrap();
    let h0 = heights_from_decoration(m).unwrap();
    let hs = hessian(m).unwrap();
    let theta = vec![0.0; h0.h.len()];
    let step = 1e-5;
    let grad_at = |v: usize, s: f64| {
        let mut h = h0.clone();
        h.h[v] += s;
        gradient(&decoration_from_heights(&inv, &h).unwrap(), &theta).unwrap()
    };
    let mut worst: f64 = 0.0;
    for v in 0..h0.h.len() {
        let (p, q) = (grad_at(v, step), grad_at(v, -step));
        for a in 0..h0.h.len() {
            worst = worst.max(((p[a] - q[a]) / (2.0 * step) - hs[(a, v)]).abs());
        }
    }
    // A one-vertex Euclidean Hessian is exactly zero; compare absolutely.
    if hs.amax() == 0.0 {
        worst
    } else {
        worst / hs.amax()
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for bg in BACKGROUNDS {
        let mut r = rng(101);
        for i in 0..50 {
            worst = worst.max(hessian_fd_error(&random(bg, i, &mut r)));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(worst < 1e-5 && secs < 30.0, format!("max relative error {worst:.2e}, {secs:.2} s"))
}

fn eigenvalues(h: &DMatrix<f64>) -> Vec<f64> {
    let mut e: Vec<f64> = h.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    e.sort_by(|a, b| b.total_cmp(a));
    e
}

fn criterion_2() -> Outcome {
    let mut hyp_worst = f64::NEG_INFINITY;
    let mut r = rng(102);
    for i in 0..50 {
        let (m, _) = flip_to_delaunay(&random(Background::Hyperbolic, i, &mut r)).unwrap();
        let h = hessian(&m).unwrap();
        hyp_worst = hyp_worst.max(eigenvalues(&h)[0] / h.norm());
    }
    let (mut kernel, mut second) = (0.0f64, f64::NEG_INFINITY);
    let mut r = rng(103);
    for i in 0..50 {
        let (m, _) = flip_to_delaunay(&random(Background::Euclidean, i, &mut r)).unwrap();
        let h = hessian(&m).unwrap();
        let ones = nalgebra::DVector::from_element(h.nrows(), 1.0);
        kernel = kernel.max((&h * ones).amax() / h.norm().max(f64::MIN_POSITIVE));
        if let Some(&e) = eigenvalues(&h).get(1) {
            second = second.max(e / h.norm());
        }
    }
    outcome(
        hyp_worst < -1e-12 && kernel < 1e-10 && second < 0.0,
        format!("hyperbolic max eigenvalue/|H| {hyp_worst:.3e}; euclidean kernel residual {kernel:.1e}, second eigenvalue/|H| {second:.3e}"),
    )
}

fn criterion_3() -> Outcome {
    let (mut inv_err, mut cosh_err) = (0.0f64, 0.0f64);
    for bg in BACKGROUNDS {
        let mut r = rng(104);
        for i in 0..100 {
            let m = random(bg, i, &mut r);
            let mut amp = 0.5;
            let m2 = loop {
                if let Ok(x) = conformal_change(&m, &random_u(m.radii.len(), amp, &mut r)) {
                    break x;
                }
                amp *= 0.8;
            };
            let (a, b) = (lambda_lengths(&m).unwrap(), lambda_lengths(&m2).unwrap());
            inv_err = inv_err.max(max_abs_diff(&a.lambda, &b.lambda));
            for (mm, lam) in [(&m, &a), (&m2, &b)] {
                for e in 0..mm.lengths.len() {
                    let (x, y) = mm.triangulation.edge_endpoints(e);
                    if mm.radii[x] > 0.0 && mm.radii[y] > 0.0 {
                        let id = inversive_distance(bg, mm.lengths[e], mm.radii[x], mm.radii[y]).unwrap();
                        cosh_err = cosh_err.max((lam.lambda[e].cosh() - id).abs() / id);
                    }
                }
            }
        }
    }
    outcome(
        inv_err < 1e-10 && cosh_err < 1e-10,
        format!("max lambda change {inv_err:.1e}, max |cosh lambda - I|/I {cosh_err:.1e}"),
    )
}

fn criterion_4() -> Outcome {
    let (mut ratio, mut min_w, mut angle_err) = (0.0f64, f64::INFINITY, 0.0f64);
    let mut support_ok = true;
    let mut max_drop: f64 = 0.0;
    let mut failures = 0;
    for bg in BACKGROUNDS {
        let mut r = rng(105);
        for i in 0..200 {
            let m = scrambled(bg, i, &mut r);
            let Ok((d, log)) = flip_to_delaunay(&m) else {
                failures += 1;
                continue;
            };
            ratio = ratio.max(log.len() as f64 / m.lengths.len() as f64);
            min_w = min_w.min(edge_weights(&d).unwrap().iter().copied().fold(f64::INFINITY, f64::min));
            let theta0 = cone_angles(&m).unwrap();
            let mut cur = m.clone();
            let mut prev = if bg == Background::Spherical { support_minimum(&m).unwrap() } else { 0.0 };
            for f in &log {
                cur.triangulation = cur.triangulation.flip(f.edge).unwrap();
                cur.lengths[f.edge] = f.new_length;
                angle_err = angle_err.max(max_abs_diff(&cone_angles(&cur).unwrap(), &theta0));
                if bg == Background::Spherical {
                    let s = f.support_min.unwrap();
                    // Equal support values recomputed on different faces may differ in the last bits.
                    support_ok &= s >= prev - 4.0 * f64::EPSILON * prev.abs();
                    max_drop = max_drop.max(prev - s);
                    prev = s;
                }
            }
        }
    }
    outcome(
        failures == 0 && ratio <= 10.0 && min_w >= -1e-12 && angle_err < 1e-10 && support_ok,
        format!(
            "failures {failures}, max flips/|E| {ratio:.2}, min weight {min_w:.3e}, cone angle drift {angle_err:.1e}, support minimum monotone {support_ok} (largest decrease {max_drop:.1e})"
        ),
    )
}

fn criterion_5() -> Outcome {
    let m = DecoratedMetric::new(genus2_octagon(), Background::Hyperbolic, vec![1.5; 9], vec![0.3]);
    let m2 = conformal_change(&m, &[0.4]).unwrap();
    let start = Instant::now();
    let solved = newton_solve(&m, &[2.0 * PI], 1e-12, 25);
    let secs = start.elapsed().as_secs_f64();
    let other = newton_solve(&m2, &[2.0 * PI], 1e-12, 25);
    match (solved, other) {
        (Ok((a, rep)), Ok((b, _))) => {
            let err = cone_angles(&a).unwrap().iter().fold(0.0f64, |x, t| x.max((t - 2.0 * PI).abs()));
            let diff = if a.triangulation == b.triangulation {
                max_abs_diff(&a.lengths, &b.lengths).max(max_abs_diff(&a.radii, &b.radii))
            } else {
                f64::INFINITY
            };
            outcome(
                err < 1e-10 && rep.iterations <= 25 && secs < 1.0 && diff < 1e-8,
                format!("|theta - 2pi| {err:.1e}, {} iterations, {secs:.3} s, initializations differ by {diff:.1e}", rep.iterations),
            )
        }
        (a, b) => outcome(false, format!("solve failed: {:?} / {:?}", a.err(), b.err())),
    }
}

fn criterion_6() -> Outcome {
    let got = [
        gauss_bonnet_check(Background::Hyperbolic, &[2.0 * PI], 2, 1),
        gauss_bonnet_check(Background::Euclidean, &[2.0 * PI], 1, 1),
        gauss_bonnet_check(Background::Hyperbolic, &[2.0 * PI; 3], 0, 3),
    ];
    let want = [Feasibility::Feasible, Feasibility::Feasible, Feasibility::Infeasible];
    let f = fixtures_dir().join("double_triangle_hyperbolic.json");
    let o = Command::new(env!("CARGO_BIN_EXE_ddce"))
        .args(["solve", f.to_str().unwrap(), "--theta", "2pi"])
        .output()
        .unwrap();
    let iterated = String::from_utf8_lossy(&o.stdout).contains("residual");
    outcome(
        got == want && o.status.code() == Some(4) && !iterated,
        format!("checks {got:?}, infeasible solve exit {:?}, iterated {iterated}", o.status.code()),
    )
}

fn criterion_7() -> Outcome {
    let ts = [1.0, 10.0, 100.0, 1000.0, 10000.0];
    let (mut defect, mut dev) = (0.0f64, 0.0f64);
    let mut monotone = true;
    let mut r = rng(107);
    let mut cases: Vec<(Invariant, Heights)> = Vec::new();
    for i in 0..50 {
        let (m, _) = flip_to_delaunay(&random(Background::Hyperbolic, i, &mut r)).unwrap();
        cases.push((lambda_lengths(&m).unwrap(), heights_from_decoration(&m).unwrap()));
    }
    for f in fixture_files() {
        let m = read_surface(&f).unwrap().metric;
        if m.background == Background::Hyperbolic {
            let (d, _) = flip_to_delaunay(&m).unwrap();
            cases.push((lambda_lengths(&d).unwrap(), heights_from_decoration(&d).unwrap()));
        }
    }
    for (inv, h) in &cases {
        let rows = transition_diagnostics(inv, h, &ts).unwrap();
        monotone &= rows.windows(2).all(|w| w[1].max_anglesum_defect < w[0].max_anglesum_defect);
        let last = rows.last().unwrap();
        defect = defect.max(last.max_anglesum_defect);
        dev = dev.max(last.max_weight_deviation);
    }
    outcome(
        defect < 1e-5 && dev < 1e-5 && monotone,
        format!("{} cases; at t=1e4 defect {defect:.1e}, weight deviation {dev:.1e}; monotone {monotone}", cases.len()),
    )
}

fn criterion_8() -> Outcome {
    let mut metrics = Vec::new();
    for bg in BACKGROUNDS {
        let mut r = rng(108);
        for i in 0..100 {
            metrics.push(scrambled(bg, i, &mut r));
        }
    }
    for f in fixture_files() {
        metrics.push(read_surface(&f).unwrap().metric);
    }
    let mut worst: f64 = 0.0;
    for m in &metrics {
        let t = &m.triangulation;
        let curv: f64 = cone_angles(m).unwrap().iter().map(|x| 2.0 * PI - x).sum();
        let area_defect: f64 = (0..t.face_count())
            .map(|f| {
                let a = interior_angles(m.background, m.face_triangle(f).lengths).unwrap();
                PI - (a[0] + a[1] + a[2])
            })
            .sum();
        worst = worst.max((curv - area_defect - 2.0 * PI * t.euler_characteristic() as f64).abs());
    }
    outcome(worst < 1e-9, format!("{} metrics, max error {worst:.1e}", metrics.len()))
}

fn criterion_9() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut r = rng(109);
    let mut trials = 0;
    let mut i = 0;
    while trials < 50 {
        let bg = if i % 2 == 0 { Background::Hyperbolic } else { Background::Euclidean };
        let (m, _) = flip_to_delaunay(&random(bg, i, &mut r)).unwrap();
        i += 1;
        let inv = lambda_lengths(&m).unwrap();
        let h0 = heights_from_decoration(&m).unwrap();
        let shift = |d: &[f64]| Heights { h: h0.h.iter().zip(d).map(|(a, b)| a + b).collect(), ..h0.clone() };
        let n = h0.h.len();
        let a = shift(&random_u(n, 0.1, &mut r));
        let b = shift(&random_u(n, 0.1, &mut r));
        let mid = shift(&random_u(n, 0.1, &mut r));
        if [&a, &b, &mid].iter().any(|h| evaluate(&inv, h).is_err()) {
            continue;
        }
        let theta = cone_angles(&m).unwrap();
        let direct = functional_along(&m, &[a.clone(), b.clone()], &theta);
        let bent = functional_along(&m, &[a, mid, b], &theta);
        if let (Ok(x), Ok(y)) = (direct, bent) {
            worst = worst.max((x - y).abs());
            trials += 1;
        }
    }
    outcome(worst < 1e-7, format!("{trials} trials, max difference {worst:.1e}"))
}

fn run_all(dir: &Path, threads: &str) -> Vec<u8> {
    let mut bytes = Vec::new();
    for (k, f) in fixture_files().iter().enumerate() {
        let base = dir.join(format!("f{k}"));
        let b = base.to_string_lossy();
        let cmds: Vec<Vec<String>> = vec![
            vec!["validate".into(), f.clone()],
            vec!["delaunay".into(), f.clone(), "--out".into(), format!("{b}_delaunay.json")],
            vec!["invariant".into(), f.clone()],
            vec!["solve".into(), f.clone(), "--out".into(), format!("{b}_solve.json")],
            vec!["transition".into(), f.clone(), "--out-prefix".into(), format!("{b}_tr")],
        ];
        for c in cmds {
            let o = Command::new(env!("CARGO_BIN_EXE_ddce"))
                .args(&c)
                .args(["--threads", threads])
                .env_remove("DDCE_THREADS")
                .output()
                .unwrap();
            bytes.extend(format!("{:?}\n", o.status.code()).bytes());
            bytes.extend(o.stdout);
            bytes.extend(o.stderr);
        }
    }
    let mut names: Vec<_> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    names.sort();
    for p in names {
        bytes.extend(p.file_name().unwrap().to_string_lossy().bytes());
        bytes.extend(std::fs::read(&p).unwrap());
    }
    bytes
}

fn criterion_10() -> Outcome {
    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let a = run_all(d1.path(), "1");
    let b = run_all(d2.path(), "4");
    outcome(a == b, format!("{} fixtures, {} bytes per run", fixture_files().len(), a.len()))
}

type Criterion = (&'static str, fn() -> Outcome);

#[test]
fn acceptance() {
    let criteria: [Criterion; 10] = [
        ("hessian-gradient consistency", criterion_1),
        ("concavity", criterion_2),
        ("conformal invariance", criterion_3),
        ("flip algorithm", criterion_4),
        ("uniformization", criterion_5),
        ("feasibility gate", criterion_6),
        ("transition limit", criterion_7),
        ("bookkeeping gauss-bonnet", criterion_8),
        ("path independence", criterion_9),
        ("cli determinism", criterion_10),
    ];
    let mut failed = Vec::new();
    let mut err = std::io::stderr();
    for (n, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        let status = if o.pass { "PASS" } else { "FAIL" };
        // Written to the raw stream so the lines survive output capture.
        writeln!(err, "criterion {}: {status} {name}: {}", n + 1, o.detail).unwrap();
        if !o.pass {
            failed.push(n + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
