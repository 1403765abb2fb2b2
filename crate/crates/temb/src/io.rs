//! JSON embeddings, SVG drawings and CSV grids of the continuum limits.
//!
//! Embedding files look like
//! `{"graph": "aztec", "n": 4, "mode": "double", "vertices": [{"j": 0, "k": 1,
//! "kind": "inner", "t": [re, im], "o": [re, im]}, ...]}`. In exact mode each
//! number is replaced by `{"num": "<decimal integer>", "log2den": <int>}`.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::{Read, Write};

use num_bigint::BigInt;
use serde_json::{json, Value};

use crate::lattice::{GraphKind, TEmbeddingLevel, Vertex, VertexKind};
use crate::limits::{classify_region, in_domain, psi, theta_limit, xi, z_limit, Region};
use crate::recurrence::Dir;
use crate::scalar::{Cx, Dyadic, Scalar};
use crate::verify::DualGraph;
use crate::Error;

/// Scalar mode of an embedding file.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Double,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Double => "double",
        }
    }

    pub fn parse(s: &str) -> Result<Self, Error> {
        match s {
            "exact" => Ok(Mode::Exact),
            "double" => Ok(Mode::Double),
            _ => Err(Error::Format(format!("unknown mode {s:?}"))),
        }
    }
}

/// Scalars with a JSON form.
pub trait JsonScalar: Scalar {
    const MODE: Mode;
    fn to_json(&self) -> Result<Value, Error>;
    fn from_json(v: &Value) -> Result<Self, Error>;
}

impl JsonScalar for f64 {
    const MODE: Mode = Mode::Double;

    fn to_json(&self) -> Result<Value, Error> {
        serde_json::Number::from_f64(*self)
            .map(Value::Number)
            .ok_or_else(|| Error::Format(format!("{self} has no JSON form")))
    }

    fn from_json(v: &Value) -> Result<Self, Error> {
        v.as_f64().ok_or_else(|| Error::Format(format!("expected a number, got {v}")))
    }
}

impl JsonScalar for Dyadic {
    const MODE: Mode = Mode::Exact;

    fn to_json(&self) -> Result<Value, Error> {
        Ok(json!({"num": self.numerator().to_string(), "log2den": self.log2_den()}))
    }

    fn from_json(v: &Value) -> Result<Self, Error> {
        let num = v
            .get("num")
            .and_then(Value::as_str)
            .and_then(|s| s.parse::<BigInt>().ok())
            .ok_or_else(|| Error::Format(format!("expected a decimal \"num\" string in {v}")))?;
        let den = v
            .get("log2den")
            .and_then(Value::as_u64)
            .and_then(|d| u32::try_from(d).ok())
            .ok_or_else(|| Error::Format(format!("expected a non-negative \"log2den\" in {v}")))?;
        Ok(Dyadic::new(num, den))
    }
}

fn cx_json<S: JsonScalar>(z: &Cx<S>) -> Result<Value, Error> {
    Ok(Value::Array(vec![z.re.to_json()?, z.im.to_json()?]))
}

fn cx_from_json<S: JsonScalar>(v: &Value) -> Result<Cx<S>, Error> {
    match v.as_array().map(Vec::as_slice) {
        Some([re, im]) => Ok(Cx::new(S::from_json(re)?, S::from_json(im)?)),
        _ => Err(Error::Format(format!("expected [re, im], got {v}"))),
    }
}

/// The JSON document of a level.
pub fn level_to_json<S: JsonScalar>(level: &TEmbeddingLevel<S>) -> Result<Value, Error> {
    let vertices = level
        .vertices
        .iter()
        .map(|v| {
            Ok(json!({
                "j": v.at.j,
                "k": v.at.k,
                "kind": match v.kind { VertexKind::Inner => "inner", VertexKind::Boundary => "boundary" },
                "t": cx_json(&v.t)?,
                "o": cx_json(&v.o)?,
            }))
        })
        .collect::<Result<Vec<Value>, Error>>()?;
    Ok(json!({"graph": level.kind.name(), "n": level.n, "mode": S::MODE.name(), "vertices": vertices}))
}

pub fn write_level<S: JsonScalar>(level: &TEmbeddingLevel<S>, mut out: impl Write) -> Result<(), Error> {
    serde_json::to_writer(&mut out, &level_to_json(level)?).map_err(|e| Error::Format(e.to_string()))?;
    out.write_all(b"\n")?;
    Ok(())
}

/// A level of either mode, as read from a file.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyLevel {
    Exact(TEmbeddingLevel<Dyadic>),
    Double(TEmbeddingLevel<f64>),
}

impl AnyLevel {
    pub fn kind(&self) -> GraphKind {
        match self {
            AnyLevel::Exact(l) => l.kind,
            AnyLevel::Double(l) => l.kind,
        }
    }

    pub fn n(&self) -> i64 {
        match self {
            AnyLevel::Exact(l) => l.n,
            AnyLevel::Double(l) => l.n,
        }
    }

    pub fn to_f64(&self) -> TEmbeddingLevel<f64> {
        match self {
            AnyLevel::Exact(l) => l.to_f64(),
            AnyLevel::Double(l) => l.clone(),
        }
    }
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value, Error> {
    v.get(key).ok_or_else(|| Error::Format(format!("missing field {key:?}")))
}

fn int_field(v: &Value, key: &str) -> Result<i64, Error> {
    field(v, key)?.as_i64().ok_or_else(|| Error::Format(format!("field {key:?} is not an integer")))
}

fn str_field<'a>(v: &'a Value, key: &str) -> Result<&'a str, Error> {
    field(v, key)?.as_str().ok_or_else(|| Error::Format(format!("field {key:?} is not a string")))
}

fn level_from_value<S: JsonScalar>(doc: &Value, kind: GraphKind, n: i64) -> Result<TEmbeddingLevel<S>, Error> {
    let list = field(doc, "vertices")?.as_array().ok_or_else(|| Error::Format("\"vertices\" is not an array".into()))?;
    let mut by_coord: HashMap<(i64, i64), (VertexKind, Cx<S>, Cx<S>)> = HashMap::new();
    for v in list {
        let (j, k) = (int_field(v, "j")?, int_field(v, "k")?);
        let kind = match str_field(v, "kind")? {
            "inner" => VertexKind::Inner,
            "boundary" => VertexKind::Boundary,
            other => return Err(Error::Format(format!("unknown vertex kind {other:?}"))),
        };
        let entry = (kind, cx_from_json(field(v, "t")?)?, cx_from_json(field(v, "o")?)?);
        if by_coord.insert((j, k), entry).is_some() {
            return Err(Error::Format(format!("vertex ({j},{k}) appears twice")));
        }
    }
    // canonical order and completeness come from the graph itself
    let skeleton = TEmbeddingLevel::<f64>::build(kind, n, |_, _| Cx::zero(), |_, _| Cx::zero());
    let mut vertices = Vec::with_capacity(skeleton.vertices.len());
    for s in &skeleton.vertices {
        match by_coord.remove(&(s.at.j, s.at.k)) {
            Some((k, t, o)) if k == s.kind => vertices.push(Vertex { at: s.at, kind: k, t, o }),
            Some(_) => return Err(Error::Format(format!("vertex ({},{}) has the wrong kind", s.at.j, s.at.k))),
            None => return Err(Error::Format(format!("vertex ({},{}) is missing", s.at.j, s.at.k))),
        }
    }
    if let Some((j, k)) = by_coord.keys().min() {
        return Err(Error::Format(format!("({j},{k}) is not a vertex of the {} graph of size {n}", kind.name())));
    }
    Ok(TEmbeddingLevel::from_vertices(kind, n, vertices))
}

/// Parses an embedding document.
pub fn level_from_json(doc: &Value) -> Result<AnyLevel, Error> {
    let kind = match str_field(doc, "graph")? {
        "aztec" => GraphKind::Aztec,
        "tower" => GraphKind::Tower,
        other => return Err(Error::Format(format!("unknown graph {other:?}"))),
    };
    let n = int_field(doc, "n")?;
    if n < 1 {
        return Err(Error::Format(format!("size must be at least 1, got {n}")));
    }
    Ok(match Mode::parse(str_field(doc, "mode")?)? {
        Mode::Exact => AnyLevel::Exact(level_from_value(doc, kind, n)?),
        Mode::Double => AnyLevel::Double(level_from_value(doc, kind, n)?),
    })
}

pub fn read_level(mut input: impl Read) -> Result<AnyLevel, Error> {
    let mut text = String::new();
    input.read_to_string(&mut text)?;
    let doc: Value = serde_json::from_str(&text).map_err(|e| Error::Format(e.to_string()))?;
    level_from_json(&doc)
}

// ---------------------------------------------------------------------------
// SVG

fn svg_path(edges: &[(usize, usize)], pts: &[num_complex::Complex64]) -> String {
    let mut d = String::new();
    for &(u, v) in edges {
        let (a, b) = (pts[u], pts[v]);
        // the y axis of SVG points down
        write!(d, "M{:.6} {:.6}L{:.6} {:.6}", a.re, -a.im, b.re, -b.im).unwrap();
    }
    d.replace("-0.000000", "0.000000")
}

/// The embedded dual graph in black with its origami image in blue.
pub fn render_svg<S: Scalar>(level: &TEmbeddingLevel<S>) -> Result<String, Error> {
    let g = DualGraph::new(level.kind, level.n)?;
    let edges: Vec<(usize, usize)> = g.edges().collect();
    let t: Vec<_> = level.vertices.iter().map(|v| v.t.to_c64()).collect();
    let o: Vec<_> = level.vertices.iter().map(|v| v.o.to_c64()).collect();
    let mut s = String::new();
    s.push_str("<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"-1.1 -1.1 2.2 2.2\">\n");
    for (colour, pts) in [("black", &t), ("blue", &o)] {
        writeln!(
            s,
            "<g fill=\"none\" stroke=\"{colour}\" stroke-width=\"0.002\"><path d=\"{}\"/></g>",
            svg_path(&edges, pts)
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    Ok(s)
}

// ---------------------------------------------------------------------------
// Continuum grid

/// One grid point of the continuum limits. The limits are empty at the
/// tangency points, and `xi` is empty off the liquid region.
#[derive(Clone, Debug, PartialEq)]
pub struct LimitsRow {
    pub x: f64,
    pub y: f64,
    pub region: Region,
    pub z: Option<num_complex::Complex64>,
    pub theta: Option<f64>,
    pub xi: Option<num_complex::Complex64>,
}

pub const LIMITS_HEADER: &str = "x,y,Re z,Im z,ϑ,region,Re ξ,Im ξ";

/// The `res x res` grid over `[-1, 1]^2`, restricted to `|x| + |y| <= 1`.
pub fn limits_grid(res: usize) -> Result<Vec<LimitsRow>, Error> {
    if res < 2 {
        return Err(Error::Precondition(format!("grid resolution must be at least 2, got {res}")));
    }
    let at = |a: usize| -1.0 + 2.0 * a as f64 / (res - 1) as f64;
    let mut rows = Vec::new();
    for a in 0..res {
        for b in 0..res {
            let (x, y) = (at(a), at(b));
            if !in_domain(x, y) {
                continue;
            }
            let region = classify_region(x, y);
            let (z, theta) = match region {
                Region::Tangency => (None, None),
                _ => (Some(z_limit(x, y)?), Some(theta_limit(x, y)?)),
            };
            rows.push(LimitsRow { x, y, region, z, theta, xi: xi(x, y).ok() });
        }
    }
    Ok(rows)
}

/// Largest `|Psi_E + Psi_N + Psi_W + Psi_S - 1|` over the rows with limits.
pub fn normalization_residual(rows: &[LimitsRow]) -> Result<f64, Error> {
    let mut worst = 0.0f64;
    for r in rows.iter().filter(|r| r.z.is_some()) {
        let s: f64 = Dir::ALL.iter().map(|&d| psi(d, r.x, r.y)).sum::<Result<f64, Error>>()?;
        worst = worst.max((s - 1.0).abs());
    }
    Ok(worst)
}

/// Seventeen significant digits, enough to round-trip any double.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_limits_csv(rows: &[LimitsRow], mut out: impl Write) -> Result<(), Error> {
    let opt = |v: Option<f64>| v.map(fmt17).unwrap_or_default();
    let mut s = String::with_capacity(rows.len() * 160);
    s.push_str(LIMITS_HEADER);
    s.push('\n');
    for r in rows {
        writeln!(
            s,
            "{},{},{},{},{},{:?},{},{}",
            fmt17(r.x),
            fmt17(r.y),
            opt(r.z.map(|z| z.re)),
            opt(r.z.map(|z| z.im)),
            opt(r.theta),
            r.region,
            opt(r.xi.map(|z| z.re)),
            opt(r.xi.map(|z| z.im)),
        )
        .unwrap();
    }
    out.write_all(s.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recurrence::aztec_embedding;
    use crate::tower::tower_embedding;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn round_trip<S: JsonScalar>(level: &TEmbeddingLevel<S>) -> AnyLevel {
        let mut buf = Vec::new();
        write_level(level, &mut buf).unwrap();
        read_level(buf.as_slice()).unwrap()
    }

    #[test]
    fn double_round_trip_is_bit_exact() {
        for n in [1, 4, 17] {
            let lv = aztec_embedding::<f64>(n).unwrap();
            assert_eq!(round_trip(&lv), AnyLevel::Double(lv));
        }
        let lv = tower_embedding::<f64>(5).unwrap();
        assert_eq!(round_trip(&lv), AnyLevel::Double(lv));
    }

    #[test]
    fn exact_round_trip() {
        let lv = aztec_embedding::<Dyadic>(9).unwrap();
        assert_eq!(round_trip(&lv), AnyLevel::Exact(lv));
        let doc = level_to_json(&aztec_embedding::<Dyadic>(1).unwrap()).unwrap();
        assert_eq!(doc["mode"], "exact");
        assert_eq!(doc["vertices"][1]["t"][0], json!({"num": "1", "log2den": 0}));
    }

    #[test]
    fn schema_fields() {
        let doc = level_to_json(&aztec_embedding::<f64>(4).unwrap()).unwrap();
        assert_eq!(doc["graph"], "aztec");
        assert_eq!(doc["n"], 4);
        assert_eq!(doc["mode"], "double");
        let b: Vec<&Value> = doc["vertices"].as_array().unwrap().iter().filter(|v| v["kind"] == "boundary").collect();
        let got: Vec<(i64, i64, f64, f64)> = b
            .iter()
            .map(|v| (v["j"].as_i64().unwrap(), v["k"].as_i64().unwrap(), v["t"][0].as_f64().unwrap(), v["t"][1].as_f64().unwrap()))
            .collect();
        assert_eq!(got, [(4, 0, 1.0, 0.0), (0, 4, 0.0, 1.0), (-4, 0, -1.0, 0.0), (0, -4, 0.0, -1.0)]);
    }

    #[test]
    fn malformed_documents() {
        let good = level_to_json(&aztec_embedding::<f64>(2).unwrap()).unwrap();
        let mut bad = good.clone();
        bad["graph"] = json!("hexagon");
        assert!(matches!(level_from_json(&bad), Err(Error::Format(_))));
        let mut bad = good.clone();
        bad["vertices"].as_array_mut().unwrap().pop();
        assert!(matches!(level_from_json(&bad), Err(Error::Format(_))));
        let mut bad = good.clone();
        bad["vertices"][0]["t"] = json!([1.0]);
        assert!(matches!(level_from_json(&bad), Err(Error::Format(_))));
        let mut bad = good.clone();
        bad["vertices"][0]["j"] = json!(7);
        assert!(level_from_json(&bad).is_err());
        let mut bad = good;
        bad["mode"] = json!("exact");
        assert!(matches!(level_from_json(&bad), Err(Error::Format(_))));
        assert!(read_level(&b"{not json"[..]).is_err());
    }

    #[test]
    fn svg_is_deterministic() {
        let lv = aztec_embedding::<f64>(6).unwrap();
        let a = render_svg(&lv).unwrap();
        assert_eq!(a, render_svg(&lv).unwrap());
        assert!(a.contains("viewBox=\"-1.1 -1.1 2.2 2.2\""));
        assert!(a.contains("stroke=\"black\" stroke-width=\"0.002\"") && a.contains("stroke=\"blue\""));
        assert!(!a.contains("<text"));
        assert_eq!(a.matches("<g ").count(), 2);
        assert_eq!(render_svg(&aztec_embedding::<Dyadic>(6).unwrap()).unwrap(), a);
    }

    #[test]
    fn limits_rows() {
        assert!(limits_grid(1).is_err());
        let rows = limits_grid(11).unwrap();
        let centre = rows.iter().find(|r| r.x == 0.0 && r.y == 0.0).unwrap();
        assert_eq!(centre.region, Region::Liquid);
        assert!(centre.z.unwrap().norm() < 1e-15 && centre.theta.unwrap().abs() < 1e-15);
        assert!((centre.xi.unwrap() - num_complex::Complex64::i()).norm() < 1e-15);
        let east = rows.iter().find(|r| (r.x - 0.8).abs() < 1e-12 && r.y == 0.0).unwrap();
        assert_eq!(east.region, Region::EastFrozen);
        assert_eq!(east.z, Some(num_complex::Complex64::new(1.0, 0.0)));
        assert!((east.theta.unwrap() - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(east.xi.is_none());
        assert!(normalization_residual(&rows).unwrap() < 1e-10);
        let rows = limits_grid(5).unwrap();
        assert_eq!(rows.iter().filter(|r| r.region == Region::Tangency && r.z.is_none()).count(), 4);
        assert!(normalization_residual(&rows).unwrap() < 1e-10);
    }

    #[test]
    fn csv_format() {
        let rows = limits_grid(3).unwrap();
        let mut buf = Vec::new();
        write_limits_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(!text.contains('\r'));
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], LIMITS_HEADER);
        assert_eq!(lines.len(), rows.len() + 1);
        let centre = lines.iter().find(|l| l.starts_with("0.0000000000000000e0,0.0000000000000000e0,")).unwrap();
        let f: Vec<&str> = centre.split(',').collect();
        assert_eq!(f.len(), 8);
        assert_eq!(f[5], "Liquid");
        assert_eq!(f[7].parse::<f64>().unwrap(), 1.0);
        assert_eq!(fmt17(0.1).parse::<f64>().unwrap(), 0.1);
        assert_eq!(fmt17(1.0 / 3.0).trim_start_matches("3.").len(), "3333333333333333e-1".len());
    }
}
