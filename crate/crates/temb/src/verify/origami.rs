//! Origami map by folding along edges, and its metric properties.

use std::cmp::Ordering;
use std::collections::VecDeque;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dual::DualGraph;
use super::geometry::{check_shape, positions};
use super::report::CheckReport;
use crate::lattice::TEmbeddingLevel;
use crate::scalar::Scalar;
use crate::Error;

/// Isometry `z -> a z + b` or, when `flip`, `z -> a conj(z) + b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Isometry {
    pub a: Complex64,
    pub b: Complex64,
    pub flip: bool,
}

impl Isometry {
    pub const IDENTITY: Isometry = Isometry { a: Complex64::new(1.0, 0.0), b: Complex64::new(0.0, 0.0), flip: false };

    pub fn apply(&self, z: Complex64) -> Complex64 {
        self.a * if self.flip { z.conj() } else { z } + self.b
    }

    /// Reflection across the line through `p` and `q`.
    pub fn reflection(p: Complex64, q: Complex64) -> Result<Self, Error> {
        Self::reflection_along(p, q - p)
    }

    /// Reflection across the line through `p` with direction `d`.
    pub fn reflection_along(p: Complex64, d: Complex64) -> Result<Self, Error> {
        if d.norm_sqr() == 0.0 {
            return Err(Error::Degenerate("reflection across a zero-length edge".into()));
        }
        let rot = d / d.conj();
        Ok(Isometry { a: rot, b: p - rot * p.conj(), flip: true })
    }

    /// `self` after `other`.
    pub fn compose(&self, other: &Isometry) -> Isometry {
        let a_in = if self.flip { other.a.conj() } else { other.a };
        let b_in = if self.flip { other.b.conj() } else { other.b };
        Isometry { a: self.a * a_in, b: self.a * b_in + self.b, flip: self.flip != other.flip }
    }

    fn distance(&self, other: &Isometry) -> f64 {
        if self.flip != other.flip {
            return f64::INFINITY;
        }
        (self.a - other.a).norm() + (self.b - other.b).norm()
    }
}

/// Result of folding the embedding from the root face.
#[derive(Clone, Debug)]
pub struct Fold {
    /// Isometry applied on each face; the outer face keeps the identity.
    pub face_maps: Vec<Isometry>,
    /// Origami value of each vertex, read from the first face containing it.
    pub values: Vec<Complex64>,
    /// Largest disagreement between the tree maps and the fold across an
    /// edge left out of the spanning tree.
    pub cycle_defect: f64,
    /// Largest spread of a vertex's value over the faces containing it.
    pub vertex_defect: f64,
}

/// Folds the embedding along a breadth-first spanning tree of the face
/// adjacency, starting from the bounded face `root` where the origami map is
/// the identity.
pub fn origami_fold<S: Scalar>(g: &DualGraph, level: &TEmbeddingLevel<S>, root: usize) -> Result<Fold, Error> {
    origami_fold_from(g, level, root, Isometry::IDENTITY)
}

/// The fold normalised like the recurrence origami: the root face is first
/// reflected across the outer edge `B_E B_N`, so the boundary images lie on
/// that line and inner values fall on its far side.
pub fn recurrence_normalised_fold<S: Scalar>(g: &DualGraph, level: &TEmbeddingLevel<S>) -> Result<Fold, Error> {
    let [be, bn, _, _] = g.boundary_indices();
    let r = Isometry::reflection(level.vertices[be].t.to_c64(), level.vertices[bn].t.to_c64())?;
    origami_fold_from(g, level, g.root, r)
}

/// Fold with the map `start` on the bounded face `root`.
pub fn origami_fold_from<S: Scalar>(g: &DualGraph, level: &TEmbeddingLevel<S>, root: usize, start: Isometry) -> Result<Fold, Error> {
    check_shape(g, level)?;
    if root == g.outer || root >= g.faces.len() {
        return Err(Error::Precondition(format!("root face {root} is not a bounded face")));
    }
    let t = positions(level);
    let mut maps: Vec<Option<Isometry>> = vec![None; g.faces.len()];
    maps[root] = Some(start);
    let mut queue = VecDeque::from([root]);
    let mut cycle_defect = 0.0f64;
    while let Some(f) = queue.pop_front() {
        let phi = maps[f].unwrap();
        let cyc = &g.faces[f].cycle;
        for i in 0..cyc.len() {
            let (u, v) = (cyc[i], cyc[(i + 1) % cyc.len()]);
            let h = g.left_of(v, u);
            if h == g.outer {
                continue;
            }
            let d = (level.vertices[v].t.clone() - level.vertices[u].t.clone()).to_c64();
            let next = phi.compose(&Isometry::reflection_along(t[u], d)?);
            match maps[h] {
                None => {
                    maps[h] = Some(next);
                    queue.push_back(h);
                }
                Some(m) => cycle_defect = cycle_defect.max(m.distance(&next)),
            }
        }
    }
    if maps.iter().enumerate().any(|(f, m)| f != g.outer && m.is_none()) {
        return Err(Error::Disconnected);
    }
    let face_maps: Vec<Isometry> = maps.into_iter().map(|m| m.unwrap_or(Isometry::IDENTITY)).collect();
    let mut values: Vec<Option<Complex64>> = vec![None; t.len()];
    let mut vertex_defect = 0.0f64;
    for (f, face) in g.bounded_faces() {
        for &v in &face.cycle {
            let z = face_maps[f].apply(t[v]);
            match values[v] {
                None => values[v] = Some(z),
                Some(w) => vertex_defect = vertex_defect.max((w - z).norm()),
            }
        }
    }
    let values = values.into_iter().map(|z| z.expect("every vertex lies on a bounded face")).collect();
    Ok(Fold { face_maps, values, cycle_defect, vertex_defect })
}

/// Folded origami, with the recurrence normalisation, against the level's stored
/// origami values.
pub fn fold_consistency_check<S: Scalar>(g: &DualGraph, level: &TEmbeddingLevel<S>, tol: f64) -> Result<CheckReport, Error> {
    let fold = recurrence_normalised_fold(g, level)?;
    let dev = level
        .vertices
        .iter()
        .zip(&fold.values)
        .map(|(v, z)| (v.o.to_c64() - z).norm())
        .fold(0.0, f64::max);
    Ok(CheckReport::new("origami_fold")
        .stat("max_deviation", dev)
        .stat("cycle_defect", fold.cycle_defect)
        .stat("vertex_defect", fold.vertex_defect)
        .param("tol", tol)
        .gate(dev < tol && fold.cycle_defect < tol && fold.vertex_defect < tol))
}

/// Edges whose origami image has a different length from the embedded edge,
/// compared as squared lengths in the level's scalar.
pub fn length_mismatches<S: Scalar>(g: &DualGraph, level: &TEmbeddingLevel<S>, tol: f64) -> (usize, f64) {
    let mut bad = 0;
    let mut worst = 0.0f64;
    for (u, v) in g.edges() {
        let (a, b) = (&level.vertices[u], &level.vertices[v]);
        let dt = (a.t.clone() - b.t.clone()).norm_sqr();
        let d_o = (a.o.clone() - b.o.clone()).norm_sqr();
        let diff = d_o.clone() - dt.clone();
        let gap = (d_o.to_f64().sqrt() - dt.to_f64().sqrt()).abs();
        worst = worst.max(gap);
        let off = if S::EXACT { diff.sign() != Ordering::Equal } else { gap > tol };
        if off {
            bad += 1;
        }
    }
    (bad, worst)
}

/// Edge lengths preserved, boundary images collinear, and the sampled
/// Lipschitz ratio at most `1 + tol`.
pub fn origami_metric_checks<S: Scalar>(
    g: &DualGraph,
    level: &TEmbeddingLevel<S>,
    tol: f64,
    samples: usize,
    seed: u64,
) -> Result<CheckReport, Error> {
    check_shape(g, level)?;
    let (mismatched, worst) = length_mismatches(g, level, tol);

    let b = g.boundary_indices();
    let ob: Vec<Complex64> = b.iter().map(|&i| level.vertices[i].o.to_c64()).collect();
    let (mut p, mut q) = (ob[0], ob[0]);
    for x in &ob {
        for y in &ob {
            if (x - y).norm() > (p - q).norm() {
                (p, q) = (*x, *y);
            }
        }
    }
    let line = if (p - q).norm() == 0.0 {
        0.0
    } else {
        ob.iter().map(|z| ((z - p) * (q - p).conj()).im.abs() / (q - p).norm()).fold(0.0, f64::max)
    };

    // differences are taken in the level's scalar, so frozen clusters whose
    // positions agree in double precision still give accurate ratios
    let ratio = |i: usize, j: usize| {
        let (a, b) = (&level.vertices[i], &level.vertices[j]);
        let dz = (a.t.clone() - b.t.clone()).to_c64().norm();
        (dz > 0.0).then(|| (a.o.clone() - b.o.clone()).to_c64().norm() / dz)
    };
    let m = level.vertices.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lip = 0.0f64;
    for _ in 0..samples {
        let (i, j) = (rng.random_range(0..m), rng.random_range(0..m));
        if let Some(r) = ratio(i, j) {
            lip = lip.max(r);
        }
    }
    for (u, v) in g.edges() {
        if let Some(r) = ratio(u, v) {
            lip = lip.max(r);
        }
    }
    Ok(CheckReport::new("origami_metric")
        .stat("edge_length_mismatches", mismatched as f64)
        .stat("max_edge_length_gap", worst)
        .stat("boundary_line_residual", line)
        .stat("lipschitz_ratio", lip)
        .param("tol", tol)
        .param("samples", samples as f64)
        .param("seed", seed as f64)
        .gate(mismatched == 0 && line < tol && lip <= 1.0 + tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::GraphKind;
    use crate::recurrence::aztec_embedding;
    use crate::tower::tower_embedding;
    use crate::{Cx, Dyadic};

    fn aztec(n: i64) -> (DualGraph, TEmbeddingLevel<f64>) {
        (DualGraph::new(GraphKind::Aztec, n).unwrap(), aztec_embedding::<f64>(n).unwrap())
    }

    #[test]
    fn reflection_fixes_its_line() {
        let (p, q) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0));
        let r = Isometry::reflection(p, q).unwrap();
        assert!((r.apply(p) - p).norm() < 1e-15 && (r.apply(q) - q).norm() < 1e-15);
        assert!((r.apply(Complex64::new(0.0, 0.0)) - Complex64::new(1.0, 1.0)).norm() < 1e-15);
        let id = r.compose(&r);
        assert!(!id.flip && id.distance(&Isometry::IDENTITY) < 1e-15);
        assert!(Isometry::reflection(p, p).is_err());
    }

    #[test]
    fn root_face_is_fixed() {
        let (g, lv) = aztec(4);
        let fold = origami_fold(&g, &lv, g.root).unwrap();
        assert_eq!(fold.face_maps[g.root], Isometry::IDENTITY);
        for &v in &g.faces[g.root].cycle {
            assert!((fold.values[v] - lv.vertices[v].t.to_c64()).norm() < 1e-12);
        }
        assert!(origami_fold(&g, &lv, g.outer).is_err());
    }

    #[test]
    fn fold_is_path_independent() {
        let (g, lv) = aztec(8);
        let a = origami_fold(&g, &lv, g.root).unwrap();
        assert!(a.cycle_defect < 1e-12 && a.vertex_defect < 1e-12);
        // a second spanning tree, grown from a face far from the root
        let far = g.bounded_faces().map(|(f, _)| f).max_by_key(|&f| {
            let c = g.coords[g.faces[f].cycle[0]];
            c.j + c.k
        });
        let far = far.unwrap();
        let b = origami_fold_from(&g, &lv, far, a.face_maps[far]).unwrap();
        for f in 0..g.faces.len() {
            if f != g.outer {
                assert!(a.face_maps[f].distance(&b.face_maps[f]) < 1e-12);
            }
        }
        let dev = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        assert!(dev < 1e-12, "{dev}");
    }

    #[test]
    fn fold_matches_recurrence_origami() {
        for n in [1, 2, 4, 9] {
            let (g, lv) = aztec(n);
            let r = fold_consistency_check(&g, &lv, 1e-10).unwrap();
            assert!(r.pass, "n={n} {}", r.summary());
        }
        for n in [1, 3, 6] {
            let g = DualGraph::new(GraphKind::Tower, n).unwrap();
            let r = fold_consistency_check(&g, &tower_embedding::<f64>(n).unwrap(), 1e-10).unwrap();
            assert!(r.pass, "tower n={n} {}", r.summary());
        }
    }

    #[test]
    fn fold_on_an_exact_level() {
        let g = DualGraph::new(GraphKind::Aztec, 10).unwrap();
        let r = fold_consistency_check(&g, &aztec_embedding::<Dyadic>(10).unwrap(), 1e-10).unwrap();
        assert!(r.pass, "{}", r.summary());
    }

    #[test]
    fn metric_checks_pass() {
        let (g, lv) = aztec(10);
        let r = origami_metric_checks(&g, &lv, 1e-9, 20_000, 3).unwrap();
        assert!(r.pass, "{}", r.summary());
        assert_eq!(r, origami_metric_checks(&g, &lv, 1e-9, 20_000, 3).unwrap());
    }

    #[test]
    fn boundary_origami_lies_on_the_segment_from_1_to_i() {
        for n in [1, 5, 10] {
            let lv = aztec_embedding::<Dyadic>(n).unwrap();
            for v in lv.boundary() {
                let o = v.o.to_c64();
                assert_eq!(o.re + o.im, 1.0, "n={n} {o}");
                assert!((0.0..=1.0).contains(&o.re));
            }
        }
    }

    #[test]
    fn edge_lengths_preserved_exactly() {
        for n in [3, 8] {
            let g = DualGraph::new(GraphKind::Aztec, n).unwrap();
            let lv = aztec_embedding::<Dyadic>(n).unwrap();
            assert_eq!(length_mismatches(&g, &lv, 0.0).0, 0, "n={n}");
        }
        let g = DualGraph::new(GraphKind::Aztec, 3).unwrap();
        let mut lv = aztec_embedding::<Dyadic>(3).unwrap();
        let i = lv.index_of(0, 0).unwrap();
        lv.vertices[i].o = lv.vertices[i].o.clone() + Cx::real(Dyadic::new(1.into(), 40));
        assert!(length_mismatches(&g, &lv, 0.0).0 > 0);
    }
}
