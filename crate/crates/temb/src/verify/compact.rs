//! Checks restricted to a compact part of the liquid region: rigidity,
//! Lip(kappa, delta), Exp-Fat(delta), plus convergence and frozen collapse.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::dual::DualGraph;
use super::geometry::{ccw_angle, check_shape};
use super::report::CheckReport;
use crate::lattice::{TEmbeddingLevel, VertexKind};
use crate::limits::{classify_region, frozen_values, theta_limit, z_limit, Region};
use crate::recurrence::o_prime;
use crate::scalar::Scalar;
use crate::Error;

/// `K_r = {x^2 + y^2 <= r^2 / 2}` in liquid coordinates `(x, y) = (j/n, k/n)`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CompactSubset {
    pub r: f64,
}

impl CompactSubset {
    pub fn new(r: f64) -> Result<Self, Error> {
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::Precondition(format!("compact radius must lie in (0,1), got {r}")));
        }
        Ok(CompactSubset { r })
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x * x + y * y <= self.r * self.r / 2.0
    }

    pub fn contains_face(&self, j: i64, k: i64, n: i64) -> bool {
        self.contains(j as f64 / n as f64, k as f64 / n as f64)
    }

    /// Inner vertices of `level` whose face lies in `K_r`.
    pub fn vertices<S>(&self, level: &TEmbeddingLevel<S>) -> Vec<usize> {
        level
            .vertices
            .iter()
            .enumerate()
            .filter(|(_, v)| v.kind == VertexKind::Inner && self.contains_face(v.at.j, v.at.k, level.n))
            .map(|(i, _)| i)
            .collect()
    }

    /// Points of the limiting image `z(K_r)` on the boundary circle of `K_r`.
    pub fn z_image_boundary(&self, samples: usize) -> Result<Vec<Complex64>, Error> {
        let rho = self.r / 2f64.sqrt();
        (0..samples)
            .map(|i| {
                let a = 2.0 * PI * i as f64 / samples as f64;
                z_limit(rho * a.cos(), rho * a.sin())
            })
            .collect()
    }
}

fn diff<S: Scalar>(level: &TEmbeddingLevel<S>, a: usize, b: usize) -> Complex64 {
    (level.vertices[a].t.clone() - level.vertices[b].t.clone()).to_c64()
}

fn in_k_mask<S>(k: &CompactSubset, level: &TEmbeddingLevel<S>) -> Vec<bool> {
    let mut mask = vec![false; level.vertices.len()];
    for i in k.vertices(level) {
        mask[i] = true;
    }
    mask
}

/// `n * edge length` range and face angles over `K`. Passes when
/// `max(n * max_edge, 1 / (n * min_edge)) <= c_cap` and every corner angle
/// of a face inside `K` lies in `(eps, pi - eps)`.
pub fn rigidity_report<S: Scalar>(
    g: &DualGraph,
    level: &TEmbeddingLevel<S>,
    k: &CompactSubset,
    c_cap: f64,
    eps: f64,
) -> Result<CheckReport, Error> {
    check_shape(g, level)?;
    let mask = in_k_mask(k, level);
    let n = level.n as f64;
    let (mut lo, mut hi, mut edges) = (f64::INFINITY, 0.0f64, 0usize);
    for (u, v) in g.edges() {
        if mask[u] && mask[v] {
            let l = diff(level, u, v).norm();
            lo = lo.min(l);
            hi = hi.max(l);
            edges += 1;
        }
    }
    if edges == 0 {
        return Err(Error::EmptySample(format!("K_{} contains no edges at n = {}", k.r, level.n)));
    }
    let (mut amin, mut amax, mut faces) = (f64::INFINITY, 0.0f64, 0usize);
    for (_, face) in g.bounded_faces() {
        let c = &face.cycle;
        if !c.iter().all(|&v| mask[v]) {
            continue;
        }
        faces += 1;
        for i in 0..c.len() {
            let (prev, v, next) = (c[(i + c.len() - 1) % c.len()], c[i], c[(i + 1) % c.len()]);
            let a = ccw_angle(diff(level, next, v), diff(level, prev, v));
            amin = amin.min(a);
            amax = amax.max(a);
        }
    }
    let c_bar = (n * hi).max(1.0 / (n * lo));
    Ok(CheckReport::new("rigidity")
        .stat("c_bar", c_bar)
        .stat("min_edge_times_n", n * lo)
        .stat("max_edge_times_n", n * hi)
        .stat("min_angle", amin)
        .stat("max_angle", amax)
        .stat("edges", edges as f64)
        .stat("faces", faces as f64)
        .param("r", k.r)
        .param("c_cap", c_cap)
        .param("eps", eps)
        .gate(c_bar <= c_cap && amin > eps && amax < PI - eps))
}

/// Sampling plan for [`lip_check`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LipSampling {
    pub pairs: usize,
    pub balls: usize,
    pub seed: u64,
}

impl Default for LipSampling {
    fn default() -> Self {
        LipSampling { pairs: 1_000_000, balls: 50, seed: 0 }
    }
}

const CHUNK: usize = 1 << 16;

/// Largest origami ratio `|O(z) - O(z')| / |z - z'|` over vertex pairs of
/// `K` with `|z - z'| >= delta`: seeded uniform pairs, plus every pair at
/// separation in `[delta, 2 delta]` inside random balls of radius `2 delta`.
/// Passes when the ratio is below 1.
pub fn lip_check<S: Scalar>(
    level: &TEmbeddingLevel<S>,
    k: &CompactSubset,
    delta: f64,
    plan: LipSampling,
) -> Result<CheckReport, Error> {
    if !(delta > 0.0) {
        return Err(Error::Precondition(format!("delta must be positive, got {delta}")));
    }
    let ids = k.vertices(level);
    if ids.len() < 2 {
        return Err(Error::NoAdmissiblePairs);
    }
    let z: Vec<Complex64> = ids.iter().map(|&i| level.vertices[i].t.to_c64()).collect();
    let o: Vec<Complex64> = ids.iter().map(|&i| level.vertices[i].o.to_c64()).collect();
    let ratio = |a: usize, b: usize| {
        let d = (z[a] - z[b]).norm();
        if d >= delta {
            Some((o[a] - o[b]).norm() / d)
        } else {
            None
        }
    };

    let chunks = plan.pairs.div_ceil(CHUNK);
    let (kappa_u, admissible_u) = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
            rng.set_stream(c as u64);
            let count = CHUNK.min(plan.pairs - c * CHUNK);
            let (mut best, mut hits) = (0.0f64, 0usize);
            for _ in 0..count {
                let (a, b) = (rng.random_range(0..z.len()), rng.random_range(0..z.len()));
                if let Some(r) = ratio(a, b) {
                    best = best.max(r);
                    hits += 1;
                }
            }
            (best, hits)
        })
        .reduce(|| (0.0, 0), |x, y| (x.0.max(y.0), x.1 + y.1));

    // exhaustive near-delta pairs in random balls
    let cell = 2.0 * delta;
    let key = |p: Complex64| ((p.re / cell).floor() as i64, (p.im / cell).floor() as i64);
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (i, p) in z.iter().enumerate() {
        grid.entry(key(*p)).or_default().push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    rng.set_stream(u64::MAX);
    let centres: Vec<usize> = (0..plan.balls).map(|_| rng.random_range(0..z.len())).collect();
    let (kappa_b, admissible_b) = centres
        .par_iter()
        .map(|&c| {
            let (cx, cy) = key(z[c]);
            let mut ball = Vec::new();
            for dx in -1..=1 {
                for dy in -1..=1 {
                    if let Some(v) = grid.get(&(cx + dx, cy + dy)) {
                        ball.extend(v.iter().copied().filter(|&i| (z[i] - z[c]).norm() <= 2.0 * delta));
                    }
                }
            }
            let (mut best, mut hits) = (0.0f64, 0usize);
            for (x, &a) in ball.iter().enumerate() {
                for &b in &ball[x + 1..] {
                    if (z[a] - z[b]).norm() <= 2.0 * delta {
                        if let Some(r) = ratio(a, b) {
                            best = best.max(r);
                            hits += 1;
                        }
                    }
                }
            }
            (best, hits)
        })
        .reduce(|| (0.0, 0), |x, y| (x.0.max(y.0), x.1 + y.1));

    if admissible_u + admissible_b == 0 {
        return Err(Error::NoAdmissiblePairs);
    }
    let kappa = kappa_u.max(kappa_b);
    Ok(CheckReport::new("lip")
        .stat("kappa_hat", kappa)
        .stat("kappa_uniform", kappa_u)
        .stat("kappa_balls", kappa_b)
        .stat("admissible_uniform", admissible_u as f64)
        .stat("admissible_balls", admissible_b as f64)
        .param("r", k.r)
        .param("delta", delta)
        .param("pairs", plan.pairs as f64)
        .param("balls", plan.balls as f64)
        .param("seed", plan.seed as f64)
        .gate(kappa < 1.0))
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Diameter of a planar point set, through its convex hull.
pub fn diameter(points: &[Complex64]) -> f64 {
    let mut p: Vec<Complex64> = points.to_vec();
    p.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    p.dedup();
    if p.len() < 2 {
        return 0.0;
    }
    let cross = |o: Complex64, a: Complex64, b: Complex64| ((a - o).conj() * (b - o)).im;
    let mut hull: Vec<Complex64> = Vec::new();
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Complex64>> = if pass == 0 { Box::new(p.iter()) } else { Box::new(p.iter().rev()) };
        for &q in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], q) <= 0.0 {
                hull.pop();
            }
            hull.push(q);
        }
        hull.pop();
    }
    let mut best = 0.0f64;
    for i in 0..hull.len() {
        for j in i + 1..hull.len() {
            best = best.max((hull[i] - hull[j]).norm());
        }
    }
    best
}

/// Fan triangulation of every face inside `K` from its lowest `(j, k)`
/// vertex; triangles with inradius below `rho` are non-fat. Passes when
/// every vertex-connected component of non-fat triangles has diameter below
/// `bound`.
pub fn exp_fat_check_rho<S: Scalar>(
    g: &DualGraph,
    level: &TEmbeddingLevel<S>,
    k: &CompactSubset,
    rho: f64,
    bound: f64,
) -> Result<CheckReport, Error> {
    check_shape(g, level)?;
    let mask = in_k_mask(k, level);
    let mut parent: Vec<usize> = (0..level.vertices.len()).collect();
    let mut thin = vec![false; level.vertices.len()];
    let (mut pieces, mut non_fat, mut min_r) = (0usize, 0usize, f64::INFINITY);
    for (_, face) in g.bounded_faces() {
        let c = &face.cycle;
        if !c.iter().all(|&v| mask[v]) {
            continue;
        }
        let low = (0..c.len()).min_by_key(|&i| g.coords[c[i]]).unwrap();
        let v0 = c[low];
        for s in 1..c.len() - 1 {
            let (a, b) = (c[(low + s) % c.len()], c[(low + s + 1) % c.len()]);
            let (da, db, dab) = (diff(level, a, v0), diff(level, b, v0), diff(level, b, a));
            let area = (da.conj() * db).im.abs() / 2.0;
            let perimeter = da.norm() + db.norm() + dab.norm();
            let r = if perimeter > 0.0 { 2.0 * area / perimeter } else { 0.0 };
            pieces += 1;
            min_r = min_r.min(r);
            if r < rho {
                non_fat += 1;
                for x in [v0, a, b] {
                    thin[x] = true;
                }
                let (ra, rb, r0) = (find(&mut parent, a), find(&mut parent, b), find(&mut parent, v0));
                parent[ra] = r0;
                parent[rb] = r0;
            }
        }
    }
    let mut comps: HashMap<usize, Vec<Complex64>> = HashMap::new();
    for v in 0..thin.len() {
        if thin[v] {
            let root = find(&mut parent, v);
            comps.entry(root).or_default().push(level.vertices[v].t.to_c64());
        }
    }
    let (largest, diam) = comps.values().fold((0usize, 0.0f64), |(l, d), pts| (l.max(pts.len()), d.max(diameter(pts))));
    Ok(CheckReport::new("exp_fat")
        .stat("pieces", pieces as f64)
        .stat("non_fat_pieces", non_fat as f64)
        .stat("components", comps.len() as f64)
        .stat("largest_component_vertices", largest as f64)
        .stat("max_component_diameter", diam)
        .stat("min_inradius", if pieces > 0 { min_r } else { 0.0 })
        .param("r", k.r)
        .param("rho", rho)
        .param("bound", bound)
        .gate(diam < bound))
}

/// Exp-Fat with `rho = exp(-delta' / delta)`.
pub fn exp_fat_check<S: Scalar>(
    g: &DualGraph,
    level: &TEmbeddingLevel<S>,
    k: &CompactSubset,
    delta: f64,
    delta_prime: f64,
    bound: f64,
) -> Result<CheckReport, Error> {
    if !(delta > 0.0 && delta_prime > 0.0) {
        return Err(Error::Precondition("delta and delta' must be positive".into()));
    }
    let r = exp_fat_check_rho(g, level, k, (-delta_prime / delta).exp(), bound)?;
    Ok(r.param("delta", delta).param("delta_prime", delta_prime))
}

/// `delta_n = log n / n`.
pub fn default_delta(n: i64) -> f64 {
    (n as f64).ln() / n as f64
}

/// `delta'_n = 1 / log n`.
pub fn default_delta_prime(n: i64) -> f64 {
    1.0 / (n as f64).ln()
}

/// Largest distances `|T_n - z|` and `|O'_n - theta|` over the faces of `K`,
/// comparing face `(j, k)` with the limit at `(j/n, k/n)`.
pub fn convergence_sup<S: Scalar>(level: &TEmbeddingLevel<S>, k: &CompactSubset) -> Result<(f64, f64), Error> {
    let ids = k.vertices(level);
    if ids.is_empty() {
        return Err(Error::EmptySample(format!("K_{} has no faces at n = {}", k.r, level.n)));
    }
    let n = level.n as f64;
    ids.par_iter()
        .map(|&i| {
            let v = &level.vertices[i];
            let (x, y) = (v.at.j as f64 / n, v.at.k as f64 / n);
            let dz = (v.t.to_c64() - z_limit(x, y)?).norm();
            let dth = (o_prime(v.o.to_c64()) - theta_limit(x, y)?).norm();
            Ok((dz, dth))
        })
        .try_reduce(|| (0.0, 0.0), |a, b| Ok((a.0.max(b.0), a.1.max(b.1))))
}

/// Frozen-region faces at distance at least `margin` from the arctic circle
/// and from the edges of the domain.
pub fn frozen_sample<S>(level: &TEmbeddingLevel<S>, region: Region, margin: f64) -> Vec<usize> {
    let n = level.n as f64;
    level
        .vertices
        .iter()
        .enumerate()
        .filter(|(_, v)| {
            let (x, y) = (v.at.j as f64 / n, v.at.k as f64 / n);
            v.kind == VertexKind::Inner
                && classify_region(x, y) == region
                && (x * x + y * y).sqrt() - std::f64::consts::FRAC_1_SQRT_2 >= margin
                && (1.0 - x.abs() - y.abs()) / 2f64.sqrt() >= margin
        })
        .map(|(i, _)| i)
        .collect()
}

/// Collapse of one frozen region at a single size.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FrozenCollapse {
    pub n: i64,
    pub samples: usize,
    /// Diameter of `{(T_n, O'_n)}` in `C^2`.
    pub diameter: f64,
    /// Largest distance from `(T_n, O'_n)` to the region's limit point.
    pub max_distance: f64,
}

/// Diameter and distance to the limit point of the frozen-region sample, per
/// level. Passes when both strictly decrease along the sequence.
pub fn frozen_collapse_report<S: Scalar>(
    levels: &[&TEmbeddingLevel<S>],
    region: Region,
    margin: f64,
) -> Result<(Vec<FrozenCollapse>, CheckReport), Error> {
    let (z0, th0) = frozen_values(region)
        .ok_or_else(|| Error::Precondition(format!("{region:?} is not a frozen region")))?;
    let target = Complex64::new(th0, 0.0);
    let mut rows = Vec::new();
    for level in levels {
        let ids = frozen_sample(level, region, margin);
        if ids.is_empty() {
            return Err(Error::EmptySample(format!("no {region:?} faces at n = {}", level.n)));
        }
        let pts: Vec<(Complex64, Complex64)> =
            ids.iter().map(|&i| (level.vertices[i].t.to_c64(), o_prime(level.vertices[i].o.to_c64()))).collect();
        let dist = |a: &(Complex64, Complex64), b: &(Complex64, Complex64)| ((a.0 - b.0).norm_sqr() + (a.1 - b.1).norm_sqr()).sqrt();
        let max_distance = pts.iter().map(|p| dist(p, &(z0, target))).fold(0.0, f64::max);
        let diameter = pts
            .par_iter()
            .enumerate()
            .map(|(i, p)| pts[i + 1..].iter().map(|q| dist(p, q)).fold(0.0, f64::max))
            .reduce(|| 0.0, f64::max);
        rows.push(FrozenCollapse { n: level.n, samples: ids.len(), diameter, max_distance });
    }
    let decreasing = rows.windows(2).all(|w| w[1].max_distance < w[0].max_distance && w[1].diameter < w[0].diameter);
    let mut r = CheckReport::new(&format!("frozen_collapse_{region:?}")).param("margin", margin).gate(decreasing);
    for row in &rows {
        r = r
            .stat(&format!("n{}_max_distance", row.n), row.max_distance)
            .stat(&format!("n{}_diameter", row.n), row.diameter)
            .stat(&format!("n{}_samples", row.n), row.samples as f64);
    }
    Ok((rows, r))
}
