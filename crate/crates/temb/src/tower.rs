//! Tower graphs: the even/odd update rules at half-step time `m`, the tower
//! wave system, and the coordinate change to the Aztec diamond.

use num_complex::Complex64;

use crate::lattice::{in_aztec, in_hm, in_lambda, in_tower, GraphKind, Grid, TEmbeddingLevel};
use crate::recurrence::{o_prime, BoundaryImages};
use crate::scalar::{Cx, Scalar};
use crate::Error;

/// Boundary amplitudes `(b_E, b_N, b_W, b_S)` of the tower wave system,
/// plus the value `f(0,0,1)` it starts from.
///
/// The homogeneous start `seed = 0` reproduces the embedding. The origami map
/// starts from `seed = (b_E + b_N + b_W + b_S) / 2`, the value of the Aztec
/// wave at `(0,0,1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TowerBoundarySystem<S> {
    pub be: Cx<S>,
    pub bn: Cx<S>,
    pub bw: Cx<S>,
    pub bs: Cx<S>,
    pub seed: Cx<S>,
}

impl<S: Scalar> TowerBoundarySystem<S> {
    pub fn new(be: Cx<S>, bn: Cx<S>, bw: Cx<S>, bs: Cx<S>) -> Self {
        TowerBoundarySystem { be, bn, bw, bs, seed: Cx::zero() }
    }

    pub fn from_images(img: &BoundaryImages<S>) -> Self {
        let [be, bn, bw, bs] = img.clone();
        Self::new(be, bn, bw, bs)
    }

    pub fn with_seed(mut self, seed: Cx<S>) -> Self {
        self.seed = seed;
        self
    }

    pub fn embedding() -> Self {
        Self::from_images(&crate::recurrence::embedding_images())
    }

    pub fn origami() -> Self {
        let s = Self::from_images(&crate::recurrence::origami_images());
        let seed = (s.be.clone() + s.bn.clone() + s.bw.clone() + s.bs.clone()).half();
        s.with_seed(seed)
    }

    fn images(&self) -> BoundaryImages<S> {
        [self.be.clone(), self.bn.clone(), self.bw.clone(), self.bs.clone()]
    }
}

/// Values of the tower recurrence at half-step `m` on `H_m`; `m = 2n` at
/// whole sizes.
#[derive(Clone, Debug, PartialEq)]
pub struct TowerLevel<S> {
    pub m: i64,
    pub values: Grid<Cx<S>>,
}

impl<S: Scalar> TowerLevel<S> {
    pub fn get(&self, j: i64, k: i64) -> Cx<S> {
        self.values.get(j, k).clone()
    }
}

fn level_grid<S: Scalar>(m: i64) -> Grid<Cx<S>> {
    let lo = -(m / 2) - 2;
    Grid::new(lo, m + 2, lo, m + 2, Cx::zero())
}

/// Level `m = 2` for the given images `[E, N, W, S]` and start value.
pub fn tower_base_with<S: Scalar>(bd: &TowerBoundarySystem<S>) -> TowerLevel<S> {
    let mut values = level_grid(2);
    let c = bd.seed.clone();
    values.set(0, 0, c.clone());
    values.set(1, 0, (bd.be.clone() + c.clone()).half());
    values.set(0, 1, (bd.bn.clone() + c).half());
    values.set(2, 0, bd.be.clone());
    values.set(0, 2, bd.bn.clone());
    values.set(-1, 0, bd.bw.clone());
    values.set(0, -1, bd.bs.clone());
    TowerLevel { m: 2, values }
}

/// Level `m = 2` of the tower embedding.
pub fn tower_base<S: Scalar>() -> TowerLevel<S> {
    tower_base_with(&TowerBoundarySystem::embedding())
}

fn four_sum<S: Scalar>(g: &Grid<Cx<S>>, j: i64, k: i64) -> Cx<S> {
    g.get(j - 1, k).clone() + g.get(j + 1, k).clone() + g.get(j, k - 1).clone() + g.get(j, k + 1).clone()
}

fn is_pair(j: i64, k: i64, a: i64, b: i64) -> bool {
    (j, k) == (a, b) || (j, k) == (b, a)
}

/// Even half-step, `m = 2n` to `2n + 1`.
///
/// The exclusions `{j,k} = {0,2n}` and `{j,k} = {-n,0}` are read as
/// unordered pairs.
pub fn even_update<S: Scalar>(level: &TowerLevel<S>, img: &BoundaryImages<S>) -> Result<TowerLevel<S>, Error> {
    let m = level.m;
    if m < 2 || m % 2 != 0 {
        return Err(Error::Precondition(format!("even update needs an even level m >= 2, got {m}")));
    }
    let n = m / 2;
    let g = &level.values;
    let out = level_grid::<S>(m + 1);
    let mut u = Grid::par_from_fn(*out.j_range().start(), *out.j_range().end(), *out.k_range().start(), *out.k_range().end(), Cx::zero(), |j, k| {
        if !in_hm(j, k, m + 1) {
            return Cx::zero();
        }
        if !is_pair(j, k, 0, 2 * n) && !is_pair(j, k, -n, 0) && (-j - k + 2 * n + 1).rem_euclid(3) == 1 {
            four_sum(g, j, k).half() - g.get(j, k).clone()
        } else {
            g.get(j, k).clone()
        }
    });
    let [be, bn, bw, bs] = img.clone();
    u.set(2 * n + 1, 0, be);
    u.set(-n - 1, 0, bw);
    u.set(0, 2 * n + 1, bn);
    u.set(0, -n - 1, bs);
    for ((cj, ck), (ij, ik)) in [((2 * n, 0), (2 * n - 1, 0)), ((0, 2 * n), (0, 2 * n - 1)), ((-n, 0), (-n + 1, 0)), ((0, -n), (0, -n + 1))] {
        u.set(cj, ck, (g.get(ij, ik).clone() + g.get(cj, ck).clone()).half());
    }
    Ok(TowerLevel { m: m + 1, values: u })
}

/// Odd half-step, `m = 2n + 1` to `2n + 2`.
pub fn odd_update<S: Scalar>(level: &TowerLevel<S>, img: &BoundaryImages<S>) -> Result<TowerLevel<S>, Error> {
    let m = level.m;
    if m < 3 || m % 2 != 1 {
        return Err(Error::Precondition(format!("odd update needs an odd level m >= 3, got {m}")));
    }
    let n = (m - 1) / 2;
    let g = &level.values;
    let out = level_grid::<S>(m + 1);
    let mut u = Grid::par_from_fn(*out.j_range().start(), *out.j_range().end(), *out.k_range().start(), *out.k_range().end(), Cx::zero(), |j, k| {
        if !in_hm(j, k, m + 1) {
            return Cx::zero();
        }
        if !is_pair(j, k, 0, 2 * n + 1) && (-j - k + 2 * n + 2).rem_euclid(3) == 1 {
            four_sum(g, j, k).half() - g.get(j, k).clone()
        } else {
            g.get(j, k).clone()
        }
    });
    let [be, bn, bw, bs] = img.clone();
    u.set(2 * n + 2, 0, be);
    u.set(-n - 1, 0, bw);
    u.set(0, 2 * n + 2, bn);
    u.set(0, -n - 1, bs);
    for ((cj, ck), (ij, ik)) in [((2 * n + 1, 0), (2 * n, 0)), ((0, 2 * n + 1), (0, 2 * n))] {
        u.set(cj, ck, (g.get(ij, ik).clone() + g.get(cj, ck).clone()).half());
    }
    Ok(TowerLevel { m: m + 1, values: u })
}

fn half_step<S: Scalar>(level: &TowerLevel<S>, img: &BoundaryImages<S>) -> TowerLevel<S> {
    let r = if level.m % 2 == 0 { even_update(level, img) } else { odd_update(level, img) };
    r.expect("levels built from the base have m >= 2")
}

/// Levels `m = 2..=m_max`; entry `i` is level `m = i + 2`.
pub fn tower_levels<S: Scalar>(bd: &TowerBoundarySystem<S>, m_max: i64) -> Vec<TowerLevel<S>> {
    let img = bd.images();
    let mut out = vec![tower_base_with(bd)];
    while out.last().unwrap().m < m_max {
        let next = half_step(out.last().unwrap(), &img);
        out.push(next);
    }
    out
}

fn whole_level<S: Scalar>(bd: &TowerBoundarySystem<S>, n: i64) -> Result<TowerLevel<S>, Error> {
    if n < 1 {
        return Err(Error::Precondition(format!("size must be at least 1, got {n}")));
    }
    let img = bd.images();
    let mut cur = tower_base_with(bd);
    while cur.m < 2 * n {
        cur = half_step(&cur, &img);
    }
    Ok(cur)
}

/// `T~_n`, the tower embedding at `m = 2n`.
pub fn tower_t<S: Scalar>(n: i64) -> Result<TowerLevel<S>, Error> {
    whole_level(&TowerBoundarySystem::embedding(), n)
}

/// `O~_n`, the origami map at `m = 2n`.
pub fn tower_o<S: Scalar>(n: i64) -> Result<TowerLevel<S>, Error> {
    whole_level(&TowerBoundarySystem::origami(), n)
}

/// `O~'_n` on the faces of the tower of size `n` and its four boundary
/// vertices.
pub fn tower_o_prime<S: Scalar>(n: i64) -> Result<Vec<((i64, i64), Complex64)>, Error> {
    let lvl = tower_embedding::<S>(n)?;
    Ok(lvl.vertices.iter().map(|v| ((v.at.j, v.at.k), o_prime(v.o.to_c64()))).collect())
}

/// Perfect t-embedding and origami map of the tower graph of size `n`.
pub fn tower_embedding<S: Scalar>(n: i64) -> Result<TEmbeddingLevel<S>, Error> {
    let t = tower_t::<S>(n)?;
    let o = tower_o::<S>(n)?;
    Ok(TEmbeddingLevel::build(GraphKind::Tower, n, |j, k| t.get(j, k), |j, k| o.get(j, k)))
}

/// Solution of the tower wave system, stored for `m = -1..=m_max`. Values
/// live on `m - j - k = 1 mod 3`.
#[derive(Clone, Debug)]
pub struct TowerWave<S> {
    levels: Vec<Grid<Cx<S>>>,
}

impl<S: Scalar> TowerWave<S> {
    pub fn m_max(&self) -> i64 {
        self.levels.len() as i64 - 2
    }

    /// `f~(j,k,m)`; zero before `m = -1`, past `m_max` and off the lattice.
    pub fn get(&self, j: i64, k: i64, m: i64) -> Cx<S> {
        if m < -1 || m > self.m_max() {
            return Cx::zero();
        }
        self.levels[(m + 1) as usize].get(j, k).clone()
    }
}

pub fn on_tower_lattice(j: i64, k: i64, m: i64) -> bool {
    (m - j - k).rem_euclid(3) == 1
}

/// Solves the tower wave system up to `m_max`.
pub fn tower_wave<S: Scalar>(bd: &TowerBoundarySystem<S>, m_max: i64) -> TowerWave<S> {
    let mut levels: Vec<Grid<Cx<S>>> = (-1..=1.min(m_max)).map(|m| level_grid::<S>(m.max(0))).collect();
    if m_max >= 1 {
        levels[2].set(0, 0, bd.seed.clone());
    }
    for m in 1..m_max {
        let at = |mm: i64| &levels[(mm + 1) as usize];
        let (g2, g1, g0) = (at(m - 2), at(m - 1), at(m));
        let shape = level_grid::<S>(m + 1);
        let next = Grid::par_from_fn(*shape.j_range().start(), *shape.j_range().end(), *shape.k_range().start(), *shape.k_range().end(), Cx::zero(), |j, k| {
            if !on_tower_lattice(j, k, m + 1) {
                return Cx::zero();
            }
            let mut v = (g1.get(j + 1, k).clone() + g1.get(j, k + 1).clone() + g0.get(j - 1, k).clone() + g0.get(j, k - 1).clone()).half() - g2.get(j, k).clone();
            let mut src = Cx::zero();
            if (j, k) == (m, 0) {
                src = src + bd.be.clone();
            }
            if (j, k) == (0, m) {
                src = src + bd.bn.clone();
            }
            if m % 2 == 0 && (j, k) == (-m / 2, 0) {
                src = src + bd.bw.clone();
            }
            if m % 2 == 0 && (j, k) == (0, -m / 2) {
                src = src + bd.bs.clone();
            }
            v = v + src.half();
            v
        });
        levels.push(next);
    }
    TowerWave { levels }
}

/// Tower values at the odd Aztec vertices for all sizes up to `n_max`.
#[derive(Clone, Debug)]
pub struct TowerHistory<S> {
    t: Vec<TowerLevel<S>>,
    o: Vec<TowerLevel<S>>,
    t0: Cx<S>,
    o0: Cx<S>,
}

impl<S: Scalar> TowerHistory<S> {
    /// Enough half-steps to serve every Aztec size up to `n_max`.
    pub fn new(n_max: i64) -> Self {
        let m_max = (3 * n_max).max(2);
        let te = TowerBoundarySystem::embedding();
        let or = TowerBoundarySystem::origami();
        TowerHistory { t0: te.seed.clone(), o0: or.seed.clone(), t: tower_levels(&te, m_max), o: tower_levels(&or, m_max) }
    }

    fn at(levels: &[TowerLevel<S>], start: &Cx<S>, j: i64, k: i64, m: i64) -> Cx<S> {
        match m {
            ..=0 => Cx::zero(),
            1 if (j, k) == (0, 0) => start.clone(),
            1 => Cx::zero(),
            _ => levels.get((m - 2) as usize).map(|l| l.get(j, k)).unwrap_or_else(Cx::zero),
        }
    }

    /// `(T~(j,k,m), O~(j,k,m))` with `m = (3n - j - k - 1) / 2`.
    pub fn aztec_value(&self, j: i64, k: i64, n: i64) -> Result<(Cx<S>, Cx<S>), Error> {
        if !in_lambda(j, k, n) {
            return Err(Error::Parity { j, k, n });
        }
        if !in_aztec(j, k, n) {
            return Err(Error::Precondition(format!("({j},{k}) is not an inner face at size {n}")));
        }
        let m = (3 * n - j - k - 1) / 2;
        if 2 * m != 3 * n - j - k - 1 {
            return Err(Error::Parity { j, k, n });
        }
        if m - 2 >= self.t.len() as i64 {
            return Err(Error::Precondition(format!("history too short for size {n}")));
        }
        Ok((Self::at(&self.t, &self.t0, j, k, m), Self::at(&self.o, &self.o0, j, k, m)))
    }
}

/// `(T_n(j,k), O_n(j,k))` for `j + k + n` odd, read from the tower levels.
pub fn aztec_from_tower<S: Scalar>(j: i64, k: i64, n: i64) -> Result<(Cx<S>, Cx<S>), Error> {
    TowerHistory::new(n.max(1)).aztec_value(j, k, n)
}

/// Whether `(j,k)` is a face of the tower of size `n` or one of its four
/// boundary vertices.
pub fn in_tower_closure(j: i64, k: i64, n: i64) -> bool {
    in_tower(j, k, n) || GraphKind::Tower.boundary(n).iter().any(|b| (b.j, b.k) == (j, k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recurrence::{aztec_o, aztec_t, embedding_images};
    use crate::scalar::Dyadic;

    type D = Dyadic;

    fn c(a: i64, b: i64) -> Cx<D> {
        Cx::from_ints(a, b)
    }

    #[test]
    fn base_values() {
        let b = tower_base::<D>();
        assert_eq!(b.get(0, 0), Cx::zero());
        assert_eq!(b.get(1, 0), c(1, 0).half());
        assert_eq!(b.get(0, 1), c(0, 1).half());
    }

    #[test]
    fn boundary_images_are_fixed() {
        for n in 1..=10 {
            let t = tower_t::<D>(n).unwrap();
            assert_eq!(t.get(2 * n, 0), c(1, 0));
            assert_eq!(t.get(0, 2 * n), c(0, 1));
            assert_eq!(t.get(-n, 0), c(-1, 0));
            assert_eq!(t.get(0, -n), c(0, -1));
            let o = tower_o::<D>(n).unwrap();
            assert_eq!(o.get(2 * n, 0), c(1, 0));
            assert_eq!(o.get(-n, 0), c(1, 0));
            assert_eq!(o.get(0, 2 * n), c(0, 1));
            assert_eq!(o.get(0, -n), c(0, 1));
        }
    }

    #[test]
    fn second_level_boundary() {
        let t = tower_t::<D>(2).unwrap();
        assert_eq!(t.get(4, 0), c(1, 0));
    }

    #[test]
    fn zero_data_stays_zero() {
        let z = TowerBoundarySystem::<D>::new(Cx::zero(), Cx::zero(), Cx::zero(), Cx::zero());
        for l in tower_levels(&z, 14) {
            assert!(l.values.iter().all(|(_, _, v)| v.is_zero()));
        }
    }

    #[test]
    fn corner_midpoint() {
        let img = embedding_images::<D>();
        for n in 1..=6 {
            let lvl = tower_levels(&TowerBoundarySystem::<D>::embedding(), 2 * n).pop().unwrap();
            let next = even_update(&lvl, &img).unwrap();
            assert_eq!(next.get(2 * n, 0), (lvl.get(2 * n - 1, 0) + lvl.get(2 * n, 0)).half());
        }
    }

    #[test]
    fn update_parity_is_checked() {
        let img = embedding_images::<D>();
        let b = tower_base::<D>();
        assert!(odd_update(&b, &img).is_err());
        let l3 = even_update(&b, &img).unwrap();
        assert!(even_update(&l3, &img).is_err());
    }

    #[test]
    fn o_prime_at_the_east_corner() {
        for n in 1..=4 {
            let op = tower_o_prime::<D>(n).unwrap();
            let v = op.iter().find(|(p, _)| *p == (2 * n, 0)).unwrap().1;
            assert!((v - Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn tower_and_aztec_agree_at_the_centre() {
        let t2 = tower_t::<D>(2).unwrap();
        let a3 = aztec_t::<D>(3).unwrap();
        assert_eq!(t2.get(0, 0), Cx::zero());
        assert_eq!(a3.values.get(0, 0), &Cx::zero());
        assert_eq!(aztec_from_tower::<D>(0, 0, 1).unwrap().0, Cx::zero());
        assert_eq!(aztec_from_tower::<D>(1, 0, 2).unwrap().0, c(1, 0).half());
    }

    #[test]
    fn coordinate_change_identity() {
        let h = TowerHistory::<D>::new(20);
        for n in 1..=20 {
            let t = aztec_t::<D>(n).unwrap();
            let o = aztec_o::<D>(n).unwrap();
            for j in -n..=n {
                for k in -n..=n {
                    if in_aztec(j, k, n) && in_lambda(j, k, n) {
                        let (tt, to) = h.aztec_value(j, k, n).unwrap();
                        assert_eq!(&tt, t.values.get(j, k), "T at ({j},{k}), n={n}");
                        assert_eq!(&to, o.values.get(j, k), "O at ({j},{k}), n={n}");
                    }
                }
            }
        }
    }

    #[test]
    fn aztec_from_tower_checks_parity() {
        assert!(matches!(aztec_from_tower::<D>(0, 0, 2), Err(Error::Parity { .. })));
    }

    #[test]
    fn wave_reproduces_updates() {
        for bd in [TowerBoundarySystem::<D>::embedding(), TowerBoundarySystem::origami()] {
            let levels = tower_levels(&bd, 24);
            let w = tower_wave(&bd, 24);
            for l in &levels {
                for (j, k, v) in l.values.iter() {
                    if on_tower_lattice(j, k, l.m) {
                        assert_eq!(v, &w.get(j, k, l.m), "({j},{k},{})", l.m);
                    }
                }
            }
        }
    }

    #[test]
    fn persistence_off_the_wave_lattice() {
        let bd = TowerBoundarySystem::<D>::embedding();
        let levels = tower_levels(&bd, 24);
        for w in levels.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            let n_prev = a.m / 2;
            for (j, k, v) in b.values.iter() {
                let fresh = !in_hm(j, k, a.m) || GraphKind::Tower.boundary(n_prev).iter().any(|p| (p.j, p.k) == (j, k));
                if !on_tower_lattice(j, k, b.m) && !fresh {
                    assert_eq!(v, &a.get(j, k), "({j},{k},{})", b.m);
                }
            }
        }
    }

    #[test]
    fn reflection_symmetry() {
        for n in 1..=12 {
            let t = tower_t::<D>(n).unwrap();
            for (j, k, v) in t.values.iter() {
                if in_tower_closure(j, k, n) {
                    assert_eq!(v.clone(), t.get(k, j).conj().mul_i(), "({j},{k}) n={n}");
                }
            }
        }
    }
}
