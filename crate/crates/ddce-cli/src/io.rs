//! JSON surface files.
//!
//! Lengths, radii, target angles and heights are maps keyed by canonical
//! labels `e<face>.<slot>` and `v<face>.<slot>`, written in label order.
//! Floats are written with 17 significant digits.

use std::io;

use ddce::metric::DecoratedMetric;
use ddce::surface::{Label, SurfaceError, Triangulation};
use ddce::trig::Background;
use serde::Deserialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::{Map, Value};
use thiserror::Error;

/// Errors while reading a surface file.
#[derive(Debug, Error)]
pub enum ParseError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown background {0:?}")]
    Background(String),
    #[error("invalid gluing: {0}")]
    Gluing(#[from] SurfaceError),
    #[error("{field}: {message}")]
    Field { field: &'static str, message: String },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    background: String,
    faces: usize,
    gluing: Vec<[[usize; 2]; 2]>,
    lengths: Map<String, Value>,
    radii: Map<String, Value>,
    #[serde(default)]
    theta_target: Option<Map<String, Value>>,
    #[serde(default)]
    heights: Option<Map<String, Value>>,
}

/// Contents of a surface file.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceFile {
    pub metric: DecoratedMetric,
    /// Target cone angle per vertex id.
    pub theta_target: Option<Vec<f64>>,
    /// Heights per vertex id.
    pub heights: Option<Vec<f64>>,
}

fn edge_key(l: Label) -> String {
    format!("e{l}")
}

fn vertex_key(l: Label) -> String {
    format!("v{l}")
}

/// Reads a per-id table from a label-keyed map.
fn table(
    field: &'static str,
    map: &Map<String, Value>,
    labels: &[Label],
    key: fn(Label) -> String,
) -> Result<Vec<f64>, ParseError> {
    let err = |message: String| ParseError::Field { field, message };
    let keys: Vec<String> = labels.iter().map(|&l| key(l)).collect();
    if let Some(k) = map.keys().find(|k| !keys.contains(k)) {
        return Err(err(format!("unknown label {k}")));
    }
    keys.iter()
        .map(|k| {
            map.get(k)
                .ok_or_else(|| err(format!("missing label {k}")))?
                .as_f64()
                .ok_or_else(|| err(format!("{k} is not a number")))
        })
        .collect()
}

/// Parses a surface file from JSON text.
pub fn parse_surface(text: &str) -> Result<SurfaceFile, ParseError> {
    let raw: RawFile = serde_json::from_str(text)?;
    let background =
        Background::from_name(&raw.background).ok_or_else(|| ParseError::Background(raw.background.clone()))?;
    let pairs: Vec<_> = raw
        .gluing
        .iter()
        .map(|[a, b]| ((a[0], a[1]), (b[0], b[1])))
        .collect();
    let t = Triangulation::build_from_gluing(raw.faces, &pairs)?;
    let el = t.edge_labels();
    let vl = t.vertex_labels();
    let lengths = table("lengths", &raw.lengths, &el, edge_key)?;
    let radii = table("radii", &raw.radii, &vl, vertex_key)?;
    let theta_target = raw
        .theta_target
        .as_ref()
        .map(|m| table("theta_target", m, &vl, vertex_key))
        .transpose()?;
    let heights = raw
        .heights
        .as_ref()
        .map(|m| table("heights", m, &vl, vertex_key))
        .transpose()?;
    Ok(SurfaceFile {
        metric: DecoratedMetric::new(t, background, lengths, radii),
        theta_target,
        heights,
    })
}

/// Reads and parses a surface file.
pub fn read_surface(path: &str) -> Result<SurfaceFile, ParseError> {
    let text = std::fs::read_to_string(path).map_err(|source| ParseError::Io {
        path: path.to_string(),
        source,
    })?;
    parse_surface(&text)
}

/// Parses a label-keyed per-vertex angle map for `t`.
pub fn parse_vertex_table(text: &str, t: &Triangulation) -> Result<Vec<f64>, ParseError> {
    let map: Map<String, Value> = serde_json::from_str(text)?;
    table("theta", &map, &t.vertex_labels(), vertex_key)
}

fn labeled(values: &[f64], labels: &[Label], order: &[usize], key: fn(Label) -> String) -> Value {
    let mut m = Map::new();
    for &id in order {
        m.insert(key(labels[id]), Value::from(values[id]));
    }
    Value::Object(m)
}

/// Surface file as a JSON value with maps in canonical label order.
pub fn surface_value(file: &SurfaceFile) -> Value {
    let m = &file.metric;
    let t = &m.triangulation;
    let el = t.edge_labels();
    let vl = t.vertex_labels();
    let eo = t.edges_in_label_order();
    let vo = t.vertices_in_label_order();
    let mut out = Map::new();
    out.insert("background".into(), Value::from(m.background.name()));
    out.insert("faces".into(), Value::from(t.face_count()));
    let gluing: Vec<Value> = t
        .gluing()
        .into_iter()
        .map(|(a, b)| serde_json::json!([[a.0, a.1], [b.0, b.1]]))
        .collect();
    out.insert("gluing".into(), Value::Array(gluing));
    out.insert("lengths".into(), labeled(&m.lengths, &el, &eo, edge_key));
    out.insert("radii".into(), labeled(&m.radii, &vl, &vo, vertex_key));
    if let Some(th) = &file.theta_target {
        out.insert("theta_target".into(), labeled(th, &vl, &vo, vertex_key));
    }
    if let Some(h) = &file.heights {
        out.insert("heights".into(), labeled(h, &vl, &vo, vertex_key));
    }
    Value::Object(out)
}

/// Pretty JSON with every float written as `{:.16e}` and nested arrays
/// written on one line.
struct FloatFormatter {
    inner: PrettyFormatter<'static>,
    depth: usize,
}

impl Formatter for FloatFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }
    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.depth += 1;
        if self.depth > 1 {
            w.write_all(b"[")
        } else {
            self.inner.begin_array(w)
        }
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.depth -= 1;
        if self.depth >= 1 {
            w.write_all(b"]")
        } else {
            self.inner.end_array(w)
        }
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        if self.depth > 1 {
            if first {
                Ok(())
            } else {
                w.write_all(b", ")
            }
        } else {
            self.inner.begin_array_value(w, first)
        }
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        if self.depth > 1 {
            Ok(())
        } else {
            self.inner.end_array_value(w)
        }
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object_value(w)
    }
}

/// Serializes a JSON value with fixed float formatting and a trailing newline.
pub fn to_json_string(v: &Value) -> String {
    let mut buf = Vec::new();
    let fmt = FloatFormatter {
        inner: PrettyFormatter::with_indent(b"  "),
        depth: 0,
    };
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, fmt);
    serde::Serialize::serialize(v, &mut ser).expect("serializing a JSON value cannot fail");
    buf.push(b'\n');
    String::from_utf8(buf).expect("JSON output is UTF-8")
}

/// Surface file as text.
pub fn write_surface_string(file: &SurfaceFile) -> String {
    to_json_string(&surface_value(file))
}

/// Formats a float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}
