//! Angle condition, perfectness and properness of an embedded dual graph.

use std::cmp::Ordering;
use std::f64::consts::PI;

use num_complex::Complex64;

use super::dual::{DualGraph, FaceColor};
use super::report::CheckReport;
use crate::lattice::TEmbeddingLevel;
use crate::scalar::{Cx, Scalar};
use crate::Error;

pub(crate) fn positions<S: Scalar>(level: &TEmbeddingLevel<S>) -> Vec<Complex64> {
    level.vertices.iter().map(|v| v.t.to_c64()).collect()
}

pub(crate) fn check_shape<S: Scalar>(g: &DualGraph, level: &TEmbeddingLevel<S>) -> Result<(), Error> {
    if g.kind != level.kind || g.n != level.n || g.coords.len() != level.vertices.len() {
        return Err(Error::Precondition("dual graph and embedding describe different graphs".into()));
    }
    if g.coords.iter().zip(&level.vertices).any(|(c, v)| *c != v.at) {
        return Err(Error::Precondition("vertex order differs from the dual graph".into()));
    }
    Ok(())
}

/// Counter-clockwise angle from `a` to `b`, in `[0, 2pi)`.
pub(crate) fn ccw_angle(a: Complex64, b: Complex64) -> f64 {
    (b / a).arg().rem_euclid(2.0 * PI)
}

/// Black and white corner sums at every inner vertex. Edge vectors are
/// differenced in the level's scalar before rounding, so exact levels give
/// accurate angles even where positions agree to many digits.
pub fn corner_sums<S: Scalar>(g: &DualGraph, level: &TEmbeddingLevel<S>) -> Result<Vec<(f64, f64)>, Error> {
    let d = |a: usize, v: usize| (level.vertices[a].t.clone() - level.vertices[v].t.clone()).to_c64();
    let mut out = Vec::new();
    for v in 0..g.coords.len() {
        if g.is_boundary(v) {
            continue;
        }
        let (mut black, mut white) = (0.0, 0.0);
        for (a, b, f) in g.corners(v) {
            let (da, db) = (d(a, v), d(b, v));
            if da == Complex64::new(0.0, 0.0) || db == Complex64::new(0.0, 0.0) {
                let c = g.coords[v];
                return Err(Error::Degenerate(format!("zero-length edge at ({},{})", c.j, c.k)));
            }
            let angle = ccw_angle(da, db);
            match g.faces[f].color {
                Some(FaceColor::Black) => black += angle,
                _ => white += angle,
            }
        }
        out.push((black, white));
    }
    Ok(out)
}

/// Black and white corner angles sum to `pi` at every inner vertex.
pub fn angle_condition_check<S: Scalar>(g: &DualGraph, level: &TEmbeddingLevel<S>, tol: f64) -> Result<CheckReport, Error> {
    check_shape(g, level)?;
    let sums = corner_sums(g, level)?;
    let dev = sums.iter().map(|(b, w)| (b - PI).abs().max((w - PI).abs())).fold(0.0, f64::max);
    Ok(CheckReport::new("angle_condition")
        .stat("max_deviation", dev)
        .stat("inner_vertices", sums.len() as f64)
        .param("tol", tol)
        .gate(dev < tol))
}

fn line_distance(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let d = b - a;
    ((p - a) * d.conj()).im.abs() / d.norm()
}

/// The outer quadrilateral is tangential and each boundary vertex's inner
/// edge runs along the bisector of its outer angle.
pub fn perfectness_check<S: Scalar>(g: &DualGraph, level: &TEmbeddingLevel<S>, tol: f64) -> Result<CheckReport, Error> {
    check_shape(g, level)?;
    let t = positions(level);
    let b = g.boundary_indices();
    let p: Vec<Complex64> = b.iter().map(|&i| t[i]).collect();
    // inward bisector at each corner
    let bis: Vec<Complex64> = (0..4)
        .map(|s| {
            let (prev, next) = (p[(s + 3) % 4], p[(s + 1) % 4]);
            let u = (prev - p[s]).unscale((prev - p[s]).norm()) + (next - p[s]).unscale((next - p[s]).norm());
            u.unscale(u.norm())
        })
        .collect();
    // least-squares intersection of the four bisector lines
    let (mut a11, mut a12, mut a22, mut r1, mut r2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for s in 0..4 {
        let nrm = bis[s] * Complex64::i();
        let c = nrm.re * p[s].re + nrm.im * p[s].im;
        a11 += nrm.re * nrm.re;
        a12 += nrm.re * nrm.im;
        a22 += nrm.im * nrm.im;
        r1 += nrm.re * c;
        r2 += nrm.im * c;
    }
    let det = a11 * a22 - a12 * a12;
    if det.abs() < 1e-300 {
        return Err(Error::Degenerate("bisectors are parallel".into()));
    }
    let centre = Complex64::new((a22 * r1 - a12 * r2) / det, (a11 * r2 - a12 * r1) / det);
    let dists: Vec<f64> = (0..4).map(|s| line_distance(centre, p[s], p[(s + 1) % 4])).collect();
    let radius = dists.iter().sum::<f64>() / 4.0;
    let tangency = dists.iter().map(|d| (d - radius).abs()).fold(0.0, f64::max);
    let centre_off = (0..4).map(|s| line_distance(centre, p[s], p[s] + bis[s])).fold(0.0, f64::max);
    let mut bisector = 0.0f64;
    for (s, &bv) in b.iter().enumerate() {
        for &w in &g.rotation[bv] {
            if g.is_boundary(w) {
                continue;
            }
            let d = t[w] - t[bv];
            bisector = bisector.max((d / bis[s]).arg().abs());
        }
    }
    Ok(CheckReport::new("perfectness")
        .stat("radius", radius)
        .stat("tangency_residual", tangency.max(centre_off))
        .stat("bisector_residual", bisector)
        .param("tol", tol)
        .gate(tangency.max(centre_off) < tol && bisector < tol))
}

fn orient<S: Scalar>(a: &Cx<S>, b: &Cx<S>, c: &Cx<S>) -> Ordering {
    let (bx, by) = (b.re.clone() - a.re.clone(), b.im.clone() - a.im.clone());
    let (cx, cy) = (c.re.clone() - a.re.clone(), c.im.clone() - a.im.clone());
    (bx * cy - by * cx).sign()
}

fn between<S: Scalar>(a: &S, x: &S, b: &S) -> bool {
    let lo = (x.clone() - a.clone()).sign() != Ordering::Less;
    let hi = (b.clone() - x.clone()).sign() != Ordering::Less;
    let lo2 = (a.clone() - x.clone()).sign() != Ordering::Less;
    let hi2 = (x.clone() - b.clone()).sign() != Ordering::Less;
    (lo && hi) || (lo2 && hi2)
}

/// `c` lies on segment `ab`, given that the three points are collinear.
fn on_segment<S: Scalar>(a: &Cx<S>, c: &Cx<S>, b: &Cx<S>) -> bool {
    between(&a.re, &c.re, &b.re) && between(&a.im, &c.im, &b.im)
}

fn segments_meet<S: Scalar>(a: &Cx<S>, b: &Cx<S>, c: &Cx<S>, d: &Cx<S>) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    if o1 != o2 && o3 != o4 {
        return true;
    }
    (o1 == Ordering::Equal && on_segment(a, c, b))
        || (o2 == Ordering::Equal && on_segment(a, d, b))
        || (o3 == Ordering::Equal && on_segment(c, a, d))
        || (o4 == Ordering::Equal && on_segment(c, b, d))
}

/// Two edges from a common endpoint `a` overlap when they leave in the same
/// direction.
fn overlap_at<S: Scalar>(a: &Cx<S>, b: &Cx<S>, d: &Cx<S>) -> bool {
    if orient(a, b, d) != Ordering::Equal {
        return false;
    }
    let dot = (b.re.clone() - a.re.clone()) * (d.re.clone() - a.re.clone())
        + (b.im.clone() - a.im.clone()) * (d.im.clone() - a.im.clone());
    dot.sign() == Ordering::Greater
}

fn le<S: Scalar>(a: &S, b: &S) -> bool {
    (b.clone() - a.clone()).sign() != Ordering::Less
}

struct Boxed<S> {
    lo: [S; 2],
    hi: [S; 2],
    mid2: [S; 2],
}

const LEAF: usize = 24;
const MAX_DEPTH: u32 = 96;

fn split_pairs<S: Scalar>(
    boxes: &[Boxed<S>],
    mut ids: Vec<u32>,
    axis: usize,
    stalled: bool,
    depth: u32,
    out: &mut Vec<(u32, u32)>,
) {
    if ids.len() > LEAF && depth < MAX_DEPTH {
        let m = ids.len() / 2;
        ids.select_nth_unstable_by(m, |&a, &b| {
            (boxes[a as usize].mid2[axis].clone() - boxes[b as usize].mid2[axis].clone()).sign()
        });
        let cut = boxes[ids[m] as usize].mid2[axis].clone();
        let (mut left, mut right) = (Vec::new(), Vec::new());
        for &e in &ids {
            let b = &boxes[e as usize];
            if le(&(b.lo[axis].clone() + b.lo[axis].clone()), &cut) {
                left.push(e);
            }
            if le(&cut, &(b.hi[axis].clone() + b.hi[axis].clone())) {
                right.push(e);
            }
        }
        let progress = 4 * left.len().max(right.len()) <= 3 * ids.len();
        if progress {
            split_pairs(boxes, left, 1 - axis, false, depth + 1, out);
            split_pairs(boxes, right, 1 - axis, false, depth + 1, out);
            return;
        }
        if !stalled {
            split_pairs(boxes, ids, 1 - axis, true, depth + 1, out);
            return;
        }
    }
    for i in 0..ids.len() {
        for j in i + 1..ids.len() {
            let (a, b) = (&boxes[ids[i] as usize], &boxes[ids[j] as usize]);
            if (0..2).all(|d| le(&a.lo[d], &b.hi[d]) && le(&b.lo[d], &a.hi[d])) {
                out.push((ids[i].min(ids[j]), ids[i].max(ids[j])));
            }
        }
    }
}

fn zero_length<S: Scalar>(b: &Boxed<S>) -> bool {
    (0..2).all(|d| le(&b.hi[d], &b.lo[d]))
}

/// Edges whose endpoints coincide.
pub fn zero_length_edges<S: Scalar>(g: &DualGraph, level: &TEmbeddingLevel<S>) -> Vec<(usize, usize)> {
    g.edges().filter(|&(u, v)| (level.vertices[u].t.clone() - level.vertices[v].t.clone()).is_zero()).collect()
}

/// Edge pairs that meet anywhere other than at a shared endpoint. The broad
/// phase splits edge bounding boxes at exact medians, so clusters of nearly
/// equal positions are separated as long as the scalar separates them.
pub fn crossing_edges<S: Scalar>(g: &DualGraph, level: &TEmbeddingLevel<S>) -> Vec<((usize, usize), (usize, usize))> {
    let t: Vec<&Cx<S>> = level.vertices.iter().map(|v| &v.t).collect();
    let edges: Vec<(usize, usize)> = g.edges().collect();
    let pick = |a: &S, b: &S, low: bool| if le(a, b) == low { a.clone() } else { b.clone() };
    let boxes: Vec<Boxed<S>> = edges
        .iter()
        .map(|&(u, v)| {
            let (a, b) = (t[u], t[v]);
            Boxed {
                lo: [pick(&a.re, &b.re, true), pick(&a.im, &b.im, true)],
                hi: [pick(&a.re, &b.re, false), pick(&a.im, &b.im, false)],
                mid2: [a.re.clone() + b.re.clone(), a.im.clone() + b.im.clone()],
            }
        })
        .collect();
    let mut pairs = Vec::new();
    let live: Vec<u32> = (0..edges.len() as u32).filter(|&e| !zero_length(&boxes[e as usize])).collect();
    split_pairs(&boxes, live, 0, false, 0, &mut pairs);
    pairs.sort_unstable();
    pairs.dedup();
    let mut bad = Vec::new();
    for (e, f) in pairs {
        let ((a, b), (c, d)) = (edges[e as usize], edges[f as usize]);
        let conflict = if a == c {
            overlap_at(t[a], t[b], t[d])
        } else if a == d {
            overlap_at(t[a], t[b], t[c])
        } else if b == c {
            overlap_at(t[b], t[a], t[d])
        } else if b == d {
            overlap_at(t[b], t[a], t[c])
        } else {
            segments_meet(t[a], t[b], t[c], t[d])
        };
        if conflict {
            bad.push((edges[e as usize], edges[f as usize]));
        }
    }
    bad
}

/// A degree-2 vertex whose neighbours are joined by an edge must sit on that
/// edge, so the triangle they span is flat and its sides overlap. Such a
/// pair is forced by the angle condition rather than by a folding.
fn forced_overlap<S: Scalar>(g: &DualGraph, level: &TEmbeddingLevel<S>, e: (usize, usize), f: (usize, usize)) -> bool {
    let shared = [e.0, e.1].into_iter().find(|x| *x == f.0 || *x == f.1);
    let Some(s) = shared else { return false };
    let (x, y) = (if e.0 == s { e.1 } else { e.0 }, if f.0 == s { f.1 } else { f.0 });
    let flat = |mid: usize, end: usize| {
        g.rotation[mid].len() == 2
            && g.rotation[mid].contains(&s)
            && g.rotation[mid].contains(&end)
            && g.rotation[s].contains(&end)
            && {
                let t = |i: usize| &level.vertices[i].t;
                orient(t(s), t(end), t(mid)) == Ordering::Equal && on_segment(t(s), t(mid), t(end))
            }
    };
    flat(x, y) || flat(y, x)
}

/// No two edges meet except at a shared endpoint.
pub fn properness_check<S: Scalar>(g: &DualGraph, level: &TEmbeddingLevel<S>) -> Result<CheckReport, Error> {
    check_shape(g, level)?;
    let (flat, bad): (Vec<_>, Vec<_>) =
        crossing_edges(g, level).into_iter().partition(|(e, f)| forced_overlap(g, level, *e, *f));
    let zero = zero_length_edges(g, level);
    let mut r = CheckReport::new("properness")
        .stat("edges", g.edge_count() as f64)
        .stat("zero_length_edges", zero.len() as f64)
        .stat("crossings", bad.len() as f64)
        .stat("flat_digon_overlaps", flat.len() as f64)
        .param("exact", if S::EXACT { 1.0 } else { 0.0 })
        .gate(bad.is_empty() && zero.is_empty());
    if let Some(&(a, b)) = zero.first() {
        let (ca, cb) = (g.coords[a], g.coords[b]);
        r = r.note(format!("edge ({},{})-({},{}) has zero length", ca.j, ca.k, cb.j, cb.k));
    }
    if let Some(((a, b), (c, d))) = bad.first() {
        let (ca, cb, cc, cd) = (g.coords[*a], g.coords[*b], g.coords[*c], g.coords[*d]);
        r = r.note(format!(
            "edge ({},{})-({},{}) meets ({},{})-({},{})",
            ca.j, ca.k, cb.j, cb.k, cc.j, cc.k, cd.j, cd.k
        ));
    }
    Ok(r)
}
