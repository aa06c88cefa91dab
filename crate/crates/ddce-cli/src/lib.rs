//! Command-line front end: file I/O and thin compositions of library calls.

pub mod io;

use std::f64::consts::PI;
use std::io::Write;

use clap::{Parser, Subcommand};
use ddce::delaunay::{extract_tessellation, flip_to_delaunay};
use ddce::metric::{heights_from_decoration, lambda_lengths, validate, DecoratedMetric};
use ddce::solver::{delaunay_invariant, newton_solve, SolveError};
use ddce::transition::transition_diagnostics;
use ddce::trig::Background;

use crate::io::{fmt_f64, parse_vertex_table, read_surface, write_surface_string, SurfaceFile};

/// Exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const INVALID: i32 = 1;
    pub const PARSE: i32 = 2;
    pub const NO_CONVERGENCE: i32 = 3;
    pub const INFEASIBLE: i32 = 4;
}

/// Edge weights at or below this are treated as zero when listing kept edges.
const KEPT_EDGE_TOL: f64 = 1e-10;

#[derive(Debug, Parser)]
#[command(name = "ddce", version, about = "Decorated discrete conformal maps")]
pub struct Cli {
    /// Worker threads for per-face work (overridden by DDCE_THREADS).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a surface file and list every violated constraint.
    Validate { path: String },
    /// Flip to a weighted Delaunay triangulation.
    Delaunay {
        path: String,
        #[arg(long)]
        out: Option<String>,
    },
    /// Print the λ-lengths of the kept edges and the vertex types.
    Invariant { path: String },
    /// Solve for prescribed cone angles.
    Solve {
        path: String,
        /// `2pi`, a number, `input` (the file's theta_target) or a JSON file
        /// mapping vertex labels to angles.
        #[arg(long)]
        theta: Option<String>,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 50)]
        max_iter: usize,
        #[arg(long)]
        out: Option<String>,
    },
    /// Sweep the transition family toward the Euclidean limit.
    Transition {
        path: String,
        /// Comma-separated, strictly increasing parameters `t ≥ 1`.
        #[arg(long, default_value = "1,10,100,1000,10000")]
        t_list: String,
        #[arg(long)]
        out_prefix: Option<String>,
    },
}

/// Effective thread count: `DDCE_THREADS`, else `--threads`.
pub fn thread_count(flag: Option<usize>) -> Option<usize> {
    std::env::var("DDCE_THREADS")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .or(flag)
        .filter(|&n| n > 0)
}

/// Runs one command, writing results to `out` and diagnostics to `err`, and
/// returns the exit code.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let r = match &cli.command {
        Command::Validate { path } => cmd_validate(path, out),
        Command::Delaunay { path, out: dest } => cmd_delaunay(path, dest.as_deref(), out),
        Command::Invariant { path } => cmd_invariant(path, out),
        Command::Solve {
            path,
            theta,
            tol,
            max_iter,
            out: dest,
        } => cmd_solve(path, theta.as_deref(), *tol, *max_iter, dest.as_deref(), out),
        Command::Transition {
            path,
            t_list,
            out_prefix,
        } => cmd_transition(path, t_list, out_prefix.as_deref(), out),
    };
    match r {
        Ok(code) => code,
        Err(Failure { code, message }) => {
            let _ = writeln!(err, "error: {message}");
            code
        }
    }
}

/// A failed command: exit code and message.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

fn fail(code: i32, message: impl Into<String>) -> Failure {
    Failure {
        code,
        message: message.into(),
    }
}

type CmdResult = Result<i32, Failure>;

fn io_fail(e: std::io::Error) -> Failure {
    fail(exit::PARSE, format!("write failed: {e}"))
}

fn load(path: &str) -> Result<SurfaceFile, Failure> {
    read_surface(path).map_err(|e| fail(exit::PARSE, e.to_string()))
}

/// Loads and validates; violations become exit code 1.
fn load_valid(path: &str) -> Result<SurfaceFile, Failure> {
    let f = load(path)?;
    let v = validate(&f.metric);
    if v.is_empty() {
        Ok(f)
    } else {
        let list: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        Err(fail(exit::INVALID, format!("invalid metric:\n  {}", list.join("\n  "))))
    }
}

fn write_file(path: &str, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| fail(exit::PARSE, format!("cannot write {path}: {e}")))
}

fn cmd_validate(path: &str, out: &mut dyn Write) -> CmdResult {
    let f = load(path)?;
    let t = &f.metric.triangulation;
    if let Some(h) = &f.heights {
        if h.len() != t.vertex_count() {
            return Err(fail(exit::PARSE, "heights: wrong size"));
        }
    }
    let v = validate(&f.metric);
    if v.is_empty() {
        writeln!(
            out,
            "valid {} surface: genus {}, {} vertices, {} edges, {} faces",
            f.metric.background.name(),
            t.genus(),
            t.vertex_count(),
            t.edge_count(),
            t.face_count()
        )
        .map_err(io_fail)?;
        Ok(exit::OK)
    } else {
        for x in &v {
            writeln!(out, "{x}").map_err(io_fail)?;
        }
        Ok(exit::INVALID)
    }
}

fn cmd_delaunay(path: &str, dest: Option<&str>, out: &mut dyn Write) -> CmdResult {
    let f = load_valid(path)?;
    let m = &f.metric;
    let (md, log) = flip_to_delaunay(m).map_err(|e| fail(exit::INVALID, e.to_string()))?;
    writeln!(out, "flips {}", log.len()).map_err(io_fail)?;
    let mut t = m.triangulation.clone();
    for (n, r) in log.iter().enumerate() {
        let label = t.edge_labels()[r.edge];
        let support = r.support_min.map(|s| format!(" support_min {}", fmt_f64(s))).unwrap_or_default();
        writeln!(
            out,
            "flip {n} e{label} {} -> {}{support}",
            fmt_f64(r.old_length),
            fmt_f64(r.new_length)
        )
        .map_err(io_fail)?;
        t = t.flip(r.edge).map_err(|e| fail(exit::INVALID, e.to_string()))?;
    }
    if let Some(p) = dest {
        let file = SurfaceFile {
            metric: md,
            theta_target: f.theta_target.clone(),
            heights: None,
        };
        write_file(p, &write_surface_string(&file))?;
    }
    Ok(exit::OK)
}

fn cmd_invariant(path: &str, out: &mut dyn Write) -> CmdResult {
    let f = load_valid(path)?;
    let (md, _) = flip_to_delaunay(&f.metric).map_err(|e| fail(exit::INVALID, e.to_string()))?;
    let inv = lambda_lengths(&md).map_err(|e| fail(exit::INVALID, e.to_string()))?;
    let tess = extract_tessellation(&md, KEPT_EDGE_TOL).map_err(|e| fail(exit::INVALID, e.to_string()))?;
    let t = &md.triangulation;
    let el = t.edge_labels();
    let vl = t.vertex_labels();
    writeln!(out, "edge lambda").map_err(io_fail)?;
    for &e in &tess.kept_edges {
        writeln!(out, "e{} {}", el[e], fmt_f64(inv.lambda[e])).map_err(io_fail)?;
    }
    writeln!(out, "vertex eps").map_err(io_fail)?;
    for v in t.vertices_in_label_order() {
        writeln!(out, "v{} {}", vl[v], u8::from(inv.eps[v])).map_err(io_fail)?;
    }
    Ok(exit::OK)
}

fn target_angles(spec: Option<&str>, f: &SurfaceFile) -> Result<Vec<f64>, Failure> {
    let n = f.metric.triangulation.vertex_count();
    match spec {
        None | Some("input") => f
            .theta_target
            .clone()
            .ok_or_else(|| fail(exit::PARSE, "no --theta given and the file has no theta_target")),
        Some("2pi") => Ok(vec![2.0 * PI; n]),
        Some(s) => {
            if let Ok(x) = s.parse::<f64>() {
                return Ok(vec![x; n]);
            }
            let text = std::fs::read_to_string(s).map_err(|e| fail(exit::PARSE, format!("cannot read {s}: {e}")))?;
            parse_vertex_table(&text, &f.metric.triangulation).map_err(|e| fail(exit::PARSE, e.to_string()))
        }
    }
}

fn cmd_solve(
    path: &str,
    theta: Option<&str>,
    tol: f64,
    max_iter: usize,
    dest: Option<&str>,
    out: &mut dyn Write,
) -> CmdResult {
    let f = load_valid(path)?;
    let target = target_angles(theta, &f)?;
    match newton_solve(&f.metric, &target, tol, max_iter) {
        Ok((m, rep)) => {
            writeln!(out, "converged iterations {}", rep.iterations).map_err(io_fail)?;
            for (k, r) in rep.residuals.iter().enumerate() {
                writeln!(out, "residual {k} {}", fmt_f64(*r)).map_err(io_fail)?;
            }
            if let Some(p) = dest {
                let file = SurfaceFile {
                    metric: m,
                    theta_target: Some(target),
                    heights: Some(rep.heights.h.clone()),
                };
                write_file(p, &write_surface_string(&file))?;
            }
            Ok(exit::OK)
        }
        Err(SolveError::Infeasible) => Err(fail(
            exit::INFEASIBLE,
            "target angles violate the Gauss-Bonnet condition",
        )),
        Err(SolveError::BadTarget(s)) => Err(fail(exit::PARSE, s)),
        Err(e @ (SolveError::MaxIterations(_) | SolveError::LineSearchStalled(_))) => {
            let rep = match &e {
                SolveError::MaxIterations(r) | SolveError::LineSearchStalled(r) => r,
                _ => unreachable!(),
            };
            for (k, r) in rep.residuals.iter().enumerate() {
                writeln!(out, "residual {k} {}", fmt_f64(*r)).map_err(io_fail)?;
            }
            Err(fail(exit::NO_CONVERGENCE, e.to_string()))
        }
        Err(e) => Err(fail(exit::INVALID, e.to_string())),
    }
}

fn parse_t_list(s: &str) -> Result<Vec<f64>, Failure> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| fail(exit::PARSE, format!("bad t value {x:?}")))
        })
        .collect()
}

fn cmd_transition(path: &str, t_list: &str, prefix: Option<&str>, out: &mut dyn Write) -> CmdResult {
    let f = load_valid(path)?;
    if f.metric.background == Background::Euclidean {
        return Err(fail(exit::INVALID, "transition needs a hyperbolic or spherical input"));
    }
    let ts = parse_t_list(t_list)?;
    let m: &DecoratedMetric = &f.metric;
    let inv = delaunay_invariant(m).map_err(|e| fail(exit::INVALID, e.to_string()))?;
    let (md, _) = flip_to_delaunay(m).map_err(|e| fail(exit::INVALID, e.to_string()))?;
    let h1 = heights_from_decoration(&md).map_err(|e| fail(exit::INVALID, e.to_string()))?;
    let rows = transition_diagnostics(&inv, &h1, &ts).map_err(|e| fail(exit::INVALID, e.to_string()))?;

    let mut csv = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| fail(exit::PARSE, e.to_string());
    csv.write_record(["t", "max_anglesum_defect", "max_weight_deviation"])
        .map_err(csv_err)?;
    for r in &rows {
        csv.write_record([
            fmt_f64(r.t),
            fmt_f64(r.max_anglesum_defect),
            fmt_f64(r.max_weight_deviation),
        ])
        .map_err(csv_err)?;
    }
    let csv_bytes = csv.into_inner().map_err(|e| fail(exit::PARSE, e.to_string()))?;
    let csv_text = String::from_utf8(csv_bytes).expect("CSV output is UTF-8");
    out.write_all(csv_text.as_bytes()).map_err(io_fail)?;
    if let Some(p) = prefix {
        write_file(&format!("{p}.csv"), &csv_text)?;
        for (k, r) in rows.iter().enumerate() {
            let file = SurfaceFile {
                metric: r.metric.clone(),
                theta_target: None,
                heights: Some(r.heights.h.clone()),
            };
            write_file(&format!("{p}_t{k}.json"), &write_surface_string(&file))?;
        }
    }
    Ok(exit::OK)
}
