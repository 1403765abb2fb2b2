//! The discrete wave recurrence on the parity lattice and the update-rule
//! construction of Aztec t-embeddings and origami maps.

use num_complex::Complex64;

use crate::lattice::{in_aztec, in_lambda, GraphKind, Grid, TEmbeddingLevel};
use crate::scalar::{Cx, Scalar};
use crate::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Dir {
    E,
    N,
    W,
    S,
}

impl Dir {
    pub const ALL: [Dir; 4] = [Dir::E, Dir::N, Dir::W, Dir::S];

    /// Unit step `(dj, dk)`.
    pub fn step(self) -> (i64, i64) {
        match self {
            Dir::E => (1, 0),
            Dir::N => (0, 1),
            Dir::W => (-1, 0),
            Dir::S => (0, -1),
        }
    }
}

/// Source amplitudes `(b0, bE, bN, bW, bS)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryData<S> {
    pub b0: Cx<S>,
    pub be: Cx<S>,
    pub bn: Cx<S>,
    pub bw: Cx<S>,
    pub bs: Cx<S>,
}

impl<S: Scalar> BoundaryData<S> {
    pub fn new(b0: Cx<S>, be: Cx<S>, bn: Cx<S>, bw: Cx<S>, bs: Cx<S>) -> Self {
        BoundaryData { b0, be, bn, bw, bs }
    }

    pub fn zero() -> Self {
        let z = Cx::from_ints(0, 0);
        BoundaryData::new(z.clone(), z.clone(), z.clone(), z.clone(), z)
    }

    /// `(1, 0, 0, 0, 0)`.
    pub fn fundamental() -> Self {
        BoundaryData { b0: Cx::from_ints(1, 0), ..Self::zero() }
    }

    /// Unit amplitude on one directional source.
    pub fn unit(dir: Dir) -> Self {
        let mut bd = Self::zero();
        *bd.dir_mut(dir) = Cx::from_ints(1, 0);
        bd
    }

    /// `(0, 1, i, -1, -i)`: the t-embedding.
    pub fn embedding() -> Self {
        BoundaryData::new(Cx::from_ints(0, 0), Cx::from_ints(1, 0), Cx::from_ints(0, 1), Cx::from_ints(-1, 0), Cx::from_ints(0, -1))
    }

    /// `(0, 1, i, 1, i)`: the origami map.
    pub fn origami() -> Self {
        BoundaryData::new(Cx::from_ints(0, 0), Cx::from_ints(1, 0), Cx::from_ints(0, 1), Cx::from_ints(1, 0), Cx::from_ints(0, 1))
    }

    pub fn dir(&self, dir: Dir) -> &Cx<S> {
        match dir {
            Dir::E => &self.be,
            Dir::N => &self.bn,
            Dir::W => &self.bw,
            Dir::S => &self.bs,
        }
    }

    fn dir_mut(&mut self, dir: Dir) -> &mut Cx<S> {
        match dir {
            Dir::E => &mut self.be,
            Dir::N => &mut self.bn,
            Dir::W => &mut self.bw,
            Dir::S => &mut self.bs,
        }
    }
}

fn level_grid<S: Scalar>(n: i64) -> Grid<Cx<S>> {
    Grid::square(n.max(0) + 1, Cx::zero())
}

/// One step of the wave recurrence: from levels `n - 1` and `n`, the values
/// at level `n + 1` (on the points with `j + k + n` even).
pub fn step_wave<S: Scalar>(prev: &Grid<Cx<S>>, cur: &Grid<Cx<S>>, bd: &BoundaryData<S>, n: i64) -> Grid<Cx<S>> {
    let r = n + 2;
    Grid::par_from_fn(-r, r, -r, r, Cx::zero(), |j, k| {
        if (j + k + n).rem_euclid(2) != 0 {
            return Cx::zero();
        }
        let nb = cur.get(j - 1, k).clone() + cur.get(j + 1, k).clone() + cur.get(j, k + 1).clone() + cur.get(j, k - 1).clone();
        let mut v = nb.half() - prev.get(j, k).clone();
        if n == 0 && j == 0 && k == 0 {
            v = v + bd.b0.clone();
        }
        let mut src = Cx::zero();
        if k == 0 && j == n {
            src = src + bd.be.clone();
        }
        if k == 0 && j == -n {
            src = src + bd.bw.clone();
        }
        if j == 0 && k == n {
            src = src + bd.bn.clone();
        }
        if j == 0 && k == -n {
            src = src + bd.bs.clone();
        }
        v + src.half()
    })
}

/// Solution of the wave recurrence on levels `0..=n_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveField<S> {
    levels: Vec<Grid<Cx<S>>>,
}

impl<S: Scalar> WaveField<S> {
    pub fn n_max(&self) -> i64 {
        self.levels.len() as i64 - 1
    }

    /// `f(j, k, n)`; zero for `n <= 0`, off-lattice points and points beyond
    /// the stored range.
    pub fn get(&self, j: i64, k: i64, n: i64) -> Cx<S> {
        if n < 0 || n > self.n_max() {
            return Cx::zero();
        }
        self.levels[n as usize].get(j, k).clone()
    }

    /// Like [`WaveField::get`] but rejects points off the parity lattice.
    pub fn value(&self, j: i64, k: i64, n: i64) -> Result<Cx<S>, Error> {
        if !in_lambda(j, k, n) {
            return Err(Error::Parity { j, k, n });
        }
        if n > self.n_max() {
            return Err(Error::Precondition(format!("level {n} beyond stored range {}", self.n_max())));
        }
        Ok(self.get(j, k, n))
    }

    pub fn level(&self, n: i64) -> &Grid<Cx<S>> {
        &self.levels[n as usize]
    }
}

/// Steps the recurrence from the zero initial data, keeping every level.
pub fn solve<S: Scalar>(bd: &BoundaryData<S>, n_max: i64) -> WaveField<S> {
    let mut levels = vec![level_grid::<S>(0)];
    let mut prev = level_grid::<S>(-1);
    for n in 0..n_max {
        let next = step_wave(&prev, &levels[n as usize], bd, n);
        prev = levels[n as usize].clone();
        levels.push(next);
    }
    WaveField { levels }
}

/// Levels `n` and `n + 1` of the solution, keeping only two levels in memory.
pub fn solve_pair<S: Scalar>(bd: &BoundaryData<S>, n: i64) -> (Grid<Cx<S>>, Grid<Cx<S>>) {
    let mut prev = level_grid::<S>(-1);
    let mut cur = level_grid::<S>(0);
    for m in 0..=n {
        let next = step_wave(&prev, &cur, bd, m);
        prev = cur;
        cur = next;
    }
    (prev, cur)
}

pub fn fundamental_solution<S: Scalar>(n_max: i64) -> WaveField<S> {
    solve(&BoundaryData::fundamental(), n_max)
}

/// Directional solution assembled from the fundamental solution by
/// `f_E(j,k,n) = 1/2 sum_s f0(j-s, k, n-s)` and its rotations.
pub fn directional_solution<S: Scalar>(dir: Dir, n_max: i64) -> WaveField<S> {
    let f0 = fundamental_solution::<S>(n_max);
    let (dj, dk) = dir.step();
    let levels = (0..=n_max)
        .map(|n| {
            let r = n + 1;
            Grid::par_from_fn(-r, r, -r, r, Cx::zero(), |j, k| {
                let mut acc = Cx::zero();
                for s in 0..=n + 1 {
                    acc = acc + f0.get(j - s * dj, k - s * dk, n - s);
                }
                acc.half()
            })
        })
        .collect();
    WaveField { levels }
}

/// Values of an Aztec level built by the update rules, including the four
/// boundary vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct RuleLevel<S> {
    pub n: i64,
    pub values: Grid<Cx<S>>,
}

/// Images `[E, N, W, S]` of the boundary vertices `(n,0), (0,n), (-n,0), (0,-n)`.
pub type BoundaryImages<S> = [Cx<S>; 4];

pub fn embedding_images<S: Scalar>() -> BoundaryImages<S> {
    [Cx::from_ints(1, 0), Cx::from_ints(0, 1), Cx::from_ints(-1, 0), Cx::from_ints(0, -1)]
}

pub fn origami_images<S: Scalar>() -> BoundaryImages<S> {
    [Cx::from_ints(1, 0), Cx::from_ints(0, 1), Cx::from_ints(1, 0), Cx::from_ints(0, 1)]
}

fn base_level<S: Scalar>(img: &BoundaryImages<S>) -> RuleLevel<S> {
    let mut values = Grid::square(1, Cx::zero());
    let mut centre = Cx::zero();
    for (d, v) in Dir::ALL.iter().zip(img) {
        let (dj, dk) = d.step();
        values.set(dj, dk, v.clone());
        centre = centre + v.clone();
    }
    values.set(0, 0, centre.half());
    RuleLevel { n: 1, values }
}

/// One application of the update rules, size `n` to `n + 1`.
pub fn rule_step<S: Scalar>(level: &RuleLevel<S>, img: &BoundaryImages<S>) -> RuleLevel<S> {
    let n = level.n;
    let g = |j: i64, k: i64| level.values.get(j, k).clone();
    let mut u: Grid<Cx<S>> = Grid::square(n + 1, Cx::zero());
    // (1) new boundary
    for (d, v) in Dir::ALL.iter().zip(img) {
        let (dj, dk) = d.step();
        u.set(dj * (n + 1), dk * (n + 1), v.clone());
    }
    // (2) old boundary moves to the midpoint with its inner neighbour,
    // (3) ring vertices go to the midpoint of their two inner neighbours
    for j in -n..=n {
        let k_abs = n - j.abs();
        for k in [k_abs, -k_abs] {
            let v = if k == 0 {
                (g(j, 0) + g(j - j.signum(), 0)).half()
            } else if j == 0 {
                (g(0, k) + g(0, k - k.signum())).half()
            } else {
                (g(j - j.signum(), k) + g(j, k - k.signum())).half()
            };
            u.set(j, k, v);
        }
    }
    // (4) persistence on the even class
    for j in -n..=n {
        for k in -n..=n {
            if in_aztec(j, k, n) && !in_lambda(j, k, n) {
                u.set(j, k, g(j, k));
            }
        }
    }
    // (5) the odd class reads only values fixed above
    let upd = Grid::par_from_fn(-n, n, -n, n, Cx::zero(), |j, k| {
        if in_aztec(j, k, n) && in_lambda(j, k, n) {
            let nb = u.get(j - 1, k).clone() + u.get(j + 1, k).clone() + u.get(j, k + 1).clone() + u.get(j, k - 1).clone();
            nb.half() - g(j, k)
        } else {
            Cx::zero()
        }
    });
    for (j, k, v) in upd.iter() {
        if in_aztec(j, k, n) && in_lambda(j, k, n) {
            u.set(j, k, v.clone());
        }
    }
    RuleLevel { n: n + 1, values: u }
}

/// All levels `1..=n` built by the update rules.
pub fn rule_levels<S: Scalar>(img: &BoundaryImages<S>, n: i64) -> Vec<RuleLevel<S>> {
    let mut out = vec![base_level(img)];
    while out.last().map(|l| l.n).unwrap_or(0) < n {
        let next = rule_step(out.last().unwrap(), img);
        out.push(next);
    }
    out
}

/// Level `n` by the update rules.
pub fn rule_level<S: Scalar>(img: &BoundaryImages<S>, n: i64) -> Result<RuleLevel<S>, Error> {
    if n < 1 {
        return Err(Error::Precondition(format!("size must be at least 1, got {n}")));
    }
    let mut cur = base_level(img);
    while cur.n < n {
        cur = rule_step(&cur, img);
    }
    Ok(cur)
}

/// `T_n` by the update rules.
pub fn aztec_t<S: Scalar>(n: i64) -> Result<RuleLevel<S>, Error> {
    rule_level(&embedding_images(), n)
}

/// `O_n` by the update rules.
pub fn aztec_o<S: Scalar>(n: i64) -> Result<RuleLevel<S>, Error> {
    rule_level(&origami_images(), n)
}

/// Perfect t-embedding and origami map of the reduced Aztec diamond of size
/// `n + 1`, by the update rules.
pub fn aztec_embedding<S: Scalar>(n: i64) -> Result<TEmbeddingLevel<S>, Error> {
    let t = aztec_t::<S>(n)?;
    let o = aztec_o::<S>(n)?;
    Ok(TEmbeddingLevel::build(GraphKind::Aztec, n, |j, k| t.values.get(j, k).clone(), |j, k| o.values.get(j, k).clone()))
}

/// The same level read off wave solutions: odd vertices from level `n`,
/// even vertices from level `n + 1`.
pub fn aztec_embedding_from_wave<S: Scalar>(n: i64) -> Result<TEmbeddingLevel<S>, Error> {
    if n < 1 {
        return Err(Error::Precondition(format!("size must be at least 1, got {n}")));
    }
    let (t0, t1) = solve_pair(&BoundaryData::<S>::embedding(), n);
    let (o0, o1) = solve_pair(&BoundaryData::<S>::origami(), n);
    let tb = embedding_images::<S>();
    let ob = origami_images::<S>();
    let pick = |a: &Grid<Cx<S>>, b: &Grid<Cx<S>>, img: &BoundaryImages<S>, j: i64, k: i64| {
        for (d, v) in Dir::ALL.iter().zip(img) {
            let (dj, dk) = d.step();
            if (j, k) == (dj * n, dk * n) {
                return v.clone();
            }
        }
        if in_lambda(j, k, n) {
            a.get(j, k).clone()
        } else {
            b.get(j, k).clone()
        }
    };
    Ok(TEmbeddingLevel::build(
        GraphKind::Aztec,
        n,
        |j, k| pick(&t0, &t1, &tb, j, k),
        |j, k| pick(&o0, &o1, &ob, j, k),
    ))
}

/// `O' = e^{i pi/4} (O - (1+i)/2)`.
pub fn o_prime(o: Complex64) -> Complex64 {
    Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4) * (o - Complex64::new(0.5, 0.5))
}
