//! Edge-inclusion probabilities of the uniform Aztec diamond: the shuffling
//! update, a brute-force matching enumerator, and the probability formulas
//! for `T_n` and `O_n`.

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;

use crate::lattice::{in_aztec, in_lambda, FaceCoord, GraphKind, Grid, TEmbeddingLevel};
use crate::recurrence::{embedding_images, origami_images, BoundaryImages, Dir};
use crate::scalar::{Cx, Scalar};
use crate::Error;

/// `p_E, p_N, p_W, p_S` on the odd faces of `A_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeProbabilityField<S> {
    pub n: i64,
    pe: Grid<S>,
    pn: Grid<S>,
    pw: Grid<S>,
    ps: Grid<S>,
}

impl<S: Scalar> EdgeProbabilityField<S> {
    /// The level `n = 0`: every probability is zero.
    pub fn empty() -> Self {
        let g = Grid::square(0, S::zero());
        EdgeProbabilityField { n: 0, pe: g.clone(), pn: g.clone(), pw: g.clone(), ps: g }
    }

    fn grid(&self, dir: Dir) -> &Grid<S> {
        match dir {
            Dir::E => &self.pe,
            Dir::N => &self.pn,
            Dir::W => &self.pw,
            Dir::S => &self.ps,
        }
    }

    /// `p_dir(j, k, n)`; zero off the odd faces of `A_n`.
    pub fn get(&self, dir: Dir, j: i64, k: i64) -> S {
        self.grid(dir).get(j, k).clone()
    }

    /// Odd faces of `A_n`.
    pub fn faces(&self) -> impl Iterator<Item = FaceCoord> + '_ {
        let n = self.n;
        (-n..=n).flat_map(move |j| (-n..=n).map(move |k| FaceCoord::new(j, k))).filter(move |f| in_aztec(f.j, f.k, n) && in_lambda(f.j, f.k, n))
    }

    /// Probability of the edge of `A_n` joining two vertices given in doubled
    /// coordinates (odd integers).
    pub fn edge(&self, a: (i64, i64), b: (i64, i64)) -> S {
        let ((x0, y0), (x1, y1)) = if a <= b { (a, b) } else { (b, a) };
        let candidates = if x0 == x1 {
            debug_assert_eq!(y1, y0 + 2);
            let k = (y0 + 1) / 2;
            [(Dir::E, (x0 - 1) / 2, k), (Dir::W, (x0 + 1) / 2, k)]
        } else {
            debug_assert_eq!((x1, y1), (x0 + 2, y0));
            let j = (x0 + 1) / 2;
            [(Dir::N, j, (y0 - 1) / 2), (Dir::S, j, (y0 + 1) / 2)]
        };
        for (d, j, k) in candidates {
            if in_aztec(j, k, self.n) && in_lambda(j, k, self.n) {
                return self.get(d, j, k);
            }
        }
        S::zero()
    }

    /// Converts every entry.
    pub fn map<U: Scalar>(&self, f: impl Fn(&S) -> U) -> EdgeProbabilityField<U> {
        EdgeProbabilityField { n: self.n, pe: self.pe.map(&f), pn: self.pn.map(&f), pw: self.pw.map(&f), ps: self.ps.map(&f) }
    }
}

/// One shuffling step, level `n - 1` to level `n`.
pub fn shuffle_step<S: Scalar>(prev: &EdgeProbabilityField<S>) -> EdgeProbabilityField<S> {
    let n = prev.n + 1;
    let p = |d: Dir, j: i64, k: i64| prev.get(d, j, k);
    let f = Grid::par_from_fn(-n, n, -n, n, S::zero(), |j, k| {
        if in_aztec(j, k, n) && in_lambda(j, k, n) {
            S::one() - p(Dir::E, j - 1, k) - p(Dir::W, j + 1, k) - p(Dir::N, j, k - 1) - p(Dir::S, j, k + 1)
        } else {
            S::zero()
        }
    });
    let upd = |d: Dir, dj: i64, dk: i64| {
        Grid::par_from_fn(-n, n, -n, n, S::zero(), |j, k| {
            if in_aztec(j, k, n) && in_lambda(j, k, n) {
                p(d, j + dj, k + dk) + f.get(j, k).half()
            } else {
                S::zero()
            }
        })
    };
    EdgeProbabilityField { n, pe: upd(Dir::E, -1, 0), ps: upd(Dir::S, 0, 1), pn: upd(Dir::N, 0, -1), pw: upd(Dir::W, 1, 0) }
}

/// Level `n` of the shuffling dynamics.
pub fn shuffle<S: Scalar>(n: i64) -> EdgeProbabilityField<S> {
    let mut cur = EdgeProbabilityField::empty();
    while cur.n < n {
        cur = shuffle_step(&cur);
    }
    cur
}

/// Levels `0..=n_max`.
pub fn shuffle_levels<S: Scalar>(n_max: i64) -> Vec<EdgeProbabilityField<S>> {
    let mut out = vec![EdgeProbabilityField::empty()];
    for _ in 0..n_max {
        let next = shuffle_step(out.last().unwrap());
        out.push(next);
    }
    out
}

/// The Aztec diamond graph `A_n` in doubled coordinates.
#[derive(Clone, Debug)]
pub struct AztecGraph {
    pub n: i64,
    pub vertices: Vec<(i64, i64)>,
    pub edges: Vec<(usize, usize)>,
}

impl AztecGraph {
    pub fn new(n: i64) -> Self {
        let mut vertices = Vec::new();
        for x in (-2 * n + 1..=2 * n - 1).step_by(2) {
            for y in (-2 * n + 1..=2 * n - 1).step_by(2) {
                if x.abs() + y.abs() <= 2 * n {
                    vertices.push((x, y));
                }
            }
        }
        let idx = |p: (i64, i64)| vertices.iter().position(|&q| q == p);
        let mut edges = Vec::new();
        for (a, &(x, y)) in vertices.iter().enumerate() {
            for q in [(x + 2, y), (x, y + 2)] {
                if let Some(b) = idx(q) {
                    edges.push((a, b));
                }
            }
        }
        AztecGraph { n, vertices, edges }
    }
}

/// All perfect matchings of `A_n`, as lists of edge indices.
#[derive(Clone, Debug)]
pub struct MatchingEnumeration {
    pub graph: AztecGraph,
    pub matchings: Vec<Vec<usize>>,
}

pub const BRUTE_FORCE_MAX: i64 = 4;

pub fn enumerate_matchings(n: i64) -> Result<MatchingEnumeration, Error> {
    if !(0..=BRUTE_FORCE_MAX).contains(&n) {
        return Err(Error::Precondition(format!("brute force is limited to n <= {BRUTE_FORCE_MAX}, got {n}")));
    }
    let graph = AztecGraph::new(n);
    let nv = graph.vertices.len();
    let mut incident = vec![Vec::new(); nv];
    for (e, &(a, b)) in graph.edges.iter().enumerate() {
        incident[a].push((e, b));
        incident[b].push((e, a));
    }
    let mut matched = vec![false; nv];
    let mut stack = Vec::new();
    let mut out = Vec::new();
    fn rec(incident: &[Vec<(usize, usize)>], matched: &mut [bool], stack: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let Some(v) = matched.iter().position(|m| !m) else {
            out.push(stack.clone());
            return;
        };
        matched[v] = true;
        for &(e, w) in &incident[v] {
            if !matched[w] {
                matched[w] = true;
                stack.push(e);
                rec(incident, matched, stack, out);
                stack.pop();
                matched[w] = false;
            }
        }
        matched[v] = false;
    }
    if nv > 0 {
        rec(&incident, &mut matched, &mut stack, &mut out);
    }
    Ok(MatchingEnumeration { graph, matchings: out })
}

/// Exact probabilities from the full list of matchings.
pub fn brute_force_probabilities(n: i64) -> Result<EdgeProbabilityField<BigRational>, Error> {
    let en = enumerate_matchings(n)?;
    if n == 0 {
        return Ok(EdgeProbabilityField::empty());
    }
    let mut counts = vec![0u64; en.graph.edges.len()];
    for m in &en.matchings {
        for &e in m {
            counts[e] += 1;
        }
    }
    let total = en.matchings.len() as u64;
    let pos = |e: usize| {
        let (a, b) = en.graph.edges[e];
        (en.graph.vertices[a], en.graph.vertices[b])
    };
    let prob = |p: (i64, i64), q: (i64, i64)| {
        (0..counts.len())
            .find(|&e| {
                let (a, b) = pos(e);
                (a, b) == (p, q) || (a, b) == (q, p)
            })
            .map(|e| BigRational::new(counts[e].into(), total.into()))
            .unwrap_or_else(BigRational::zero)
    };
    let mut field = EdgeProbabilityField {
        n,
        pe: Grid::square(n, BigRational::zero()),
        pn: Grid::square(n, BigRational::zero()),
        pw: Grid::square(n, BigRational::zero()),
        ps: Grid::square(n, BigRational::zero()),
    };
    for j in -n..=n {
        for k in -n..=n {
            if !(in_aztec(j, k, n) && in_lambda(j, k, n)) {
                continue;
            }
            let (x, y) = (2 * j, 2 * k);
            field.pe.set(j, k, prob((x + 1, y - 1), (x + 1, y + 1)));
            field.pw.set(j, k, prob((x - 1, y - 1), (x - 1, y + 1)));
            field.pn.set(j, k, prob((x - 1, y + 1), (x + 1, y + 1)));
            field.ps.set(j, k, prob((x - 1, y - 1), (x + 1, y - 1)));
        }
    }
    Ok(field)
}

/// `T`, `O` and `O'` at one odd face, from its four edge probabilities.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityPoint<S> {
    pub at: FaceCoord,
    pub t: Cx<S>,
    pub o: Cx<S>,
    pub o_prime: Complex64,
}

/// `T = pE + i pN - pW - i pS`.
pub fn t_from_probabilities<S: Scalar>(field: &EdgeProbabilityField<S>, j: i64, k: i64) -> Cx<S> {
    let [e, nn, w, s] = Dir::ALL.map(|d| field.get(d, j, k));
    Cx::new(e - w, nn - s)
}

/// `O = pE + i pN + pW + i pS`.
pub fn o_from_probabilities<S: Scalar>(field: &EdgeProbabilityField<S>, j: i64, k: i64) -> Cx<S> {
    let [e, nn, w, s] = Dir::ALL.map(|d| field.get(d, j, k));
    Cx::new(e + w, nn + s)
}

/// `O' = ((pE - pN + pW - pS) + i (-1 + pE + pN + pW + pS)) / sqrt 2`.
pub fn o_prime_from_probabilities<S: Scalar>(field: &EdgeProbabilityField<S>, j: i64, k: i64) -> Complex64 {
    let [e, nn, w, s] = Dir::ALL.map(|d| field.get(d, j, k).to_f64());
    Complex64::new(e - nn + w - s, -1.0 + e + nn + w + s) * std::f64::consts::FRAC_1_SQRT_2
}

/// `T`, `O`, `O'` at every odd inner vertex of size `field.n`.
pub fn embedding_from_probabilities<S: Scalar>(field: &EdgeProbabilityField<S>) -> Vec<ProbabilityPoint<S>> {
    field
        .faces()
        .map(|f| ProbabilityPoint {
            at: f,
            t: t_from_probabilities(field, f.j, f.k),
            o: o_from_probabilities(field, f.j, f.k),
            o_prime: o_prime_from_probabilities(field, f.j, f.k),
        })
        .collect()
}

/// The full level of size `n` from shuffling probabilities: odd vertices
/// from the field of size `n`, even vertices from the field of size `n + 1`
/// (where they are odd), boundary vertices from their fixed images.
pub fn aztec_embedding_from_probabilities<S: Scalar>(n: i64) -> Result<TEmbeddingLevel<S>, Error> {
    if n < 1 {
        return Err(Error::Precondition(format!("size must be at least 1, got {n}")));
    }
    let levels = shuffle_levels::<S>(n + 1);
    let (cur, next) = (&levels[n as usize], &levels[n as usize + 1]);
    let field = |j: i64, k: i64| if in_lambda(j, k, n) { cur } else { next };
    let boundary = GraphKind::Aztec.boundary(n);
    let pick = |img: &BoundaryImages<S>, f: &dyn Fn(&EdgeProbabilityField<S>, i64, i64) -> Cx<S>, j: i64, k: i64| {
        match boundary.iter().position(|b| (b.j, b.k) == (j, k)) {
            Some(s) => img[s].clone(),
            None => f(field(j, k), j, k),
        }
    };
    let (tb, ob) = (embedding_images::<S>(), origami_images::<S>());
    Ok(TEmbeddingLevel::build(
        GraphKind::Aztec,
        n,
        |j, k| pick(&tb, &t_from_probabilities, j, k),
        |j, k| pick(&ob, &o_from_probabilities, j, k),
    ))
}

/// Largest violation of `pE(j,k) = pN(-k,j) = pW(-j,-k) = pS(k,-j)`.
pub fn symmetry_map<S: Scalar>(field: &EdgeProbabilityField<S>) -> f64 {
    let mut worst = 0.0f64;
    for f in field.faces() {
        let (j, k) = (f.j, f.k);
        let e = field.get(Dir::E, j, k);
        for other in [field.get(Dir::N, -k, j), field.get(Dir::W, -j, -k), field.get(Dir::S, k, -j)] {
            let d = e.clone() - other;
            if !d.is_zero() {
                worst = worst.max(d.to_f64().abs()).max(f64::MIN_POSITIVE);
            }
        }
    }
    worst
}

/// Largest violation of "probabilities at each vertex sum to one".
pub fn vertex_normalization_defect<S: Scalar>(field: &EdgeProbabilityField<S>) -> Option<S> {
    let g = AztecGraph::new(field.n);
    for &(x, y) in &g.vertices {
        let mut s = S::zero();
        for q in [(x + 2, y), (x - 2, y), (x, y + 2), (x, y - 2)] {
            if q.0.abs() + q.1.abs() <= 2 * field.n {
                s = s + field.edge((x, y), q);
            }
        }
        if s != S::one() {
            return Some(s);
        }
    }
    None
}

/// Converts a dyadic field to exact rationals.
pub fn to_rational(field: &EdgeProbabilityField<crate::Dyadic>) -> EdgeProbabilityField<BigRational> {
    field.map(|d| d.to_rational())
}
