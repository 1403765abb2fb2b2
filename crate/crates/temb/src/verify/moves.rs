//! Central moves and face weights.

use num_complex::Complex64;

use super::dual::{DualGraph, FaceColor};
use super::geometry::check_shape;
use super::report::CheckReport;
use crate::lattice::{in_aztec, in_lambda, FaceCoord, TEmbeddingLevel};
use crate::recurrence::{embedding_images, rule_levels, RuleLevel};
use crate::scalar::Scalar;
use crate::Error;

/// Roots of `(u1-z)(u3-z) / ((u2-z)(u4-z)) = (u1-u)(u3-u) / ((u2-u)(u4-u))`
/// other than `u`: returns `(u_tilde, r)` where `r` is the common ratio.
fn other_root(u: Complex64, q: [Complex64; 4]) -> Result<(Complex64, Complex64), Error> {
    let pts = [u, q[0], q[1], q[2], q[3]];
    for i in 0..5 {
        for j in i + 1..5 {
            if pts[i] == pts[j] {
                return Err(Error::Precondition("central move needs five distinct points".into()));
            }
        }
    }
    let r = (q[0] - u) * (q[2] - u) / ((q[1] - u) * (q[3] - u));
    let lead = Complex64::new(1.0, 0.0) - r;
    let scale = pts.iter().map(|z| z.norm()).fold(1.0, f64::max);
    if lead.norm() <= 1e-14 {
        return Err(Error::Degenerate("cross-ratio equation is linear; the second root is at infinity".into()));
    }
    let sum = ((q[0] + q[2]) - r * (q[1] + q[3])) / lead;
    let v = sum - u;
    Ok((if (v - u).norm() <= 1e-12 * scale { u } else { v }, r))
}

/// The central move of `u` with respect to the quadrilateral `u1 u2 u3 u4`:
/// the second root of the cross-ratio equation.
pub fn central_move(u: Complex64, quad: [Complex64; 4]) -> Result<Complex64, Error> {
    let (v, _) = other_root(u, quad)?;
    if v == u {
        return Err(Error::Degenerate("the two roots coincide".into()));
    }
    Ok(v)
}

/// Both roots of the central-move quadratic, `u` first. The second equals
/// `u` when the roots coincide.
pub fn central_move_roots(u: Complex64, quad: [Complex64; 4]) -> Result<(Complex64, Complex64), Error> {
    let (v, _) = other_root(u, quad)?;
    Ok((u, v))
}

/// Checks that the update of each odd face from size `n` to `n + 1` is the
/// central move of its old position with respect to its four new
/// neighbours, for every `n < n_max`. Faces where the two roots coincide are
/// compared against the double root.
pub fn rule5_check(n_max: i64, tol: f64) -> Result<CheckReport, Error> {
    if n_max < 2 {
        return Err(Error::Precondition(format!("need n_max >= 2, got {n_max}")));
    }
    let levels = rule_levels::<f64>(&embedding_images(), n_max);
    let (mut dev, mut faces, mut double) = (0.0f64, 0usize, 0usize);
    for w in levels.windows(2) {
        let (old, new) = (&w[0], &w[1]);
        let n = old.n;
        for j in -n..=n {
            for k in -n..=n {
                if !(in_aztec(j, k, n) && in_lambda(j, k, n)) {
                    continue;
                }
                let t = |a: &RuleLevel<f64>, j: i64, k: i64| a.values.get(j, k).to_c64();
                let u = t(old, j, k);
                let quad = [t(new, j + 1, k), t(new, j, k + 1), t(new, j - 1, k), t(new, j, k - 1)];
                let (_, v) = central_move_roots(u, quad)?;
                if v == u {
                    double += 1;
                }
                dev = dev.max((v - t(new, j, k)).norm());
                faces += 1;
            }
        }
    }
    Ok(CheckReport::new("central_move")
        .stat("max_deviation", dev)
        .stat("faces", faces as f64)
        .stat("double_roots", double as f64)
        .param("n_max", n_max as f64)
        .param("tol", tol)
        .gate(dev < tol))
}

/// Neighbours of the inner dual vertex `v` in clockwise order, starting
/// from an edge whose counter-clockwise side is a white face.
fn clockwise_from_white(g: &DualGraph, v: usize) -> Result<Vec<usize>, Error> {
    let corners: Vec<(usize, usize, usize)> = g.corners(v).collect();
    let deg = corners.len();
    // corners[i] is the sector from rotation[v][i] to rotation[v][i+1]
    let Some(start) = (0..deg).find(|&i| g.faces[corners[i].2].color == Some(FaceColor::White)) else {
        return Err(Error::Degenerate("vertex without white corners".into()));
    };
    Ok((0..deg).map(|s| g.rotation[v][(start + deg - s) % deg]).collect())
}

/// Face weight `X` at every inner dual vertex, from the complex formula
/// `(-1)^(d+1) prod (T(v) - T(v_{2s-1})) / (T(v_{2s}) - T(v))`.
pub fn face_weights<S: Scalar>(g: &DualGraph, level: &TEmbeddingLevel<S>) -> Result<Vec<(FaceCoord, Complex64)>, Error> {
    check_shape(g, level)?;
    let diff = |a: usize, b: usize| (level.vertices[a].t.clone() - level.vertices[b].t.clone()).to_c64();
    let mut out = Vec::new();
    for v in 0..g.coords.len() {
        if g.is_boundary(v) {
            continue;
        }
        let cw = clockwise_from_white(g, v)?;
        let d = cw.len() / 2;
        let mut x = Complex64::new(if d % 2 == 1 { 1.0 } else { -1.0 }, 0.0);
        for s in 0..d {
            x *= diff(v, cw[2 * s]) / diff(cw[2 * s + 1], v);
        }
        out.push((g.coords[v], x));
    }
    Ok(out)
}

/// Face weights equal 1 at every inner dual vertex whose neighbours are all
/// inner. Vertices next to the boundary see the reduction's merged edges and
/// are only reported.
pub fn face_weight_check<S: Scalar>(g: &DualGraph, level: &TEmbeddingLevel<S>, tol: f64) -> Result<CheckReport, Error> {
    let weights = face_weights(g, level)?;
    let (mut interior, mut count) = (0.0f64, 0usize);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for (c, x) in &weights {
        let i = g.index_of(*c).unwrap();
        if g.rotation[i].iter().all(|&w| !g.is_boundary(w)) {
            interior = interior.max((x - 1.0).norm());
            count += 1;
        } else {
            lo = lo.min(x.norm());
            hi = hi.max(x.norm());
        }
    }
    let mut r = CheckReport::new("face_weights")
        .stat("max_deviation", interior)
        .stat("interior_vertices", count as f64)
        .param("tol", tol)
        .gate(interior < tol);
    if hi > 0.0 {
        r = r.stat("boundary_adjacent_min", lo).stat("boundary_adjacent_max", hi);
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::GraphKind;
    use crate::recurrence::{aztec_embedding, aztec_t};
    use crate::tower::tower_embedding;
    use proptest::prelude::*;

    #[test]
    fn rule5_at_n3_face_00() {
        let old = aztec_t::<f64>(3).unwrap();
        let new = aztec_t::<f64>(4).unwrap();
        let t = |l: &RuleLevel<f64>, j: i64, k: i64| l.values.get(j, k).to_c64();
        let quad = [t(&new, 1, 0), t(&new, 0, 1), t(&new, -1, 0), t(&new, 0, -1)];
        // the centre is fixed by symmetry, so the quadratic has a double root there
        assert!(matches!(central_move(t(&old, 0, 0), quad), Err(Error::Degenerate(_))));
        let (_, v) = central_move_roots(t(&old, 0, 0), quad).unwrap();
        assert!((v - t(&new, 0, 0)).norm() < 1e-12);
        let quad = [t(&new, 2, 1), t(&new, 1, 2), t(&new, 0, 1), t(&new, 1, 0)];
        let v = central_move(t(&old, 1, 1), quad).unwrap();
        assert!((v - t(&new, 1, 1)).norm() < 1e-12);
    }

    #[test]
    fn rule5_small_sizes() {
        let r = rule5_check(6, 1e-12).unwrap();
        assert!(r.pass, "{}", r.summary());
        assert!(rule5_check(1, 1e-12).is_err());
    }

    #[test]
    fn central_move_preconditions() {
        let q = [1.0, 0.0, -1.0, 0.0].map(|a| Complex64::new(a, 1.0 - a.abs()));
        assert!(matches!(central_move(q[0], q), Err(Error::Precondition(_))));
        // centre of a square: the ratio is 1
        assert!(central_move(Complex64::new(0.0, 0.0), [1.0, 0.0, -1.0, 0.0].map(|a| Complex64::new(a, 1.0 - a.abs()))).is_err());
    }

    #[test]
    fn face_weights_are_one() {
        for n in [2, 6, 12] {
            let g = DualGraph::new(GraphKind::Aztec, n).unwrap();
            let r = face_weight_check(&g, &aztec_embedding::<f64>(n).unwrap(), 1e-9).unwrap();
            assert!(r.pass, "n={n} {}", r.summary());
        }
        let g = DualGraph::new(GraphKind::Tower, 6).unwrap();
        let r = face_weight_check(&g, &tower_embedding::<f64>(6).unwrap(), 1e-9).unwrap();
        assert!(r.pass, "{}", r.summary());
    }

    fn pt() -> impl Strategy<Value = Complex64> {
        (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(a, b)| Complex64::new(a, b))
    }

    proptest! {
        #[test]
        fn central_move_is_an_involution(u in pt(), q in [pt(), pt(), pt(), pt()]) {
            let pts = [u, q[0], q[1], q[2], q[3]];
            for i in 0..5 {
                for j in i + 1..5 {
                    prop_assume!((pts[i] - pts[j]).norm() > 0.05);
                }
            }
            let r = (q[0] - u) * (q[2] - u) / ((q[1] - u) * (q[3] - u));
            prop_assume!((r - 1.0).norm() > 0.05);
            let v = central_move(u, q);
            prop_assume!(v.is_ok());
            let v = v.unwrap();
            prop_assume!(q.iter().all(|p| (p - v).norm() > 0.05) && (v - u).norm() > 0.05);
            let w = central_move(v, q).unwrap();
            let scale = v.norm().max(1.0);
            prop_assert!((w - u).norm() < 1e-12 * scale * scale, "{u} -> {v} -> {w}");
        }
    }
}
