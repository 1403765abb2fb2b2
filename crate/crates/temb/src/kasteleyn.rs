//! Kasteleyn signs of the Aztec diamond and the contour-integral formulas for
//! the inverse Kasteleyn matrix, the edge probabilities, `T_n` and its edge
//! differences, evaluated by the trapezoidal rule on circles in MPFR
//! arithmetic.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use rug::float::Constant;
use rug::{Assign, Complex, Float};

use crate::lattice::{in_aztec, in_lambda, FaceCoord, GraphKind, TEmbeddingLevel};
use crate::limits::ActionFrame;
use crate::recurrence::{embedding_images, origami_images, Dir};
use crate::scalar::Cx;
use crate::Error;

/// A positively oriented circle sampled at `nodes` equally spaced points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContourSpec {
    pub center: Complex64,
    pub radius: f64,
    pub nodes: usize,
}

impl ContourSpec {
    pub fn validate(&self) -> Result<(), Error> {
        if !(self.radius > 0.0 && self.radius < 0.5) {
            return Err(Error::Precondition(format!("contour radius must lie in (0, 1/2), got {}", self.radius)));
        }
        if self.nodes < 64 || !self.nodes.is_power_of_two() {
            return Err(Error::Precondition(format!("nodes must be a power of two >= 64, got {}", self.nodes)));
        }
        Ok(())
    }
}

/// The circles around `0` (for `z`) and `1` (for `w`), and the tolerance on
/// the change under node doubling.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Contours {
    pub z: ContourSpec,
    pub w: ContourSpec,
    pub tol: f64,
}

impl Default for Contours {
    fn default() -> Self {
        Self::with_nodes(64)
    }
}

impl Contours {
    pub fn with_nodes(nodes: usize) -> Self {
        Contours {
            z: ContourSpec { center: Complex64::new(0.0, 0.0), radius: 0.25, nodes },
            w: ContourSpec { center: Complex64::new(1.0, 0.0), radius: 0.25, nodes },
            tol: 1e-10,
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        self.z.validate()?;
        self.w.validate()?;
        if self.z.center != Complex64::new(0.0, 0.0) || self.w.center != Complex64::new(1.0, 0.0) {
            return Err(Error::Precondition("contours must be centred at 0 and 1".into()));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Kasteleyn matrix

/// Kasteleyn entry between a black and a white vertex of `A_n`, both in
/// doubled coordinates.
pub fn kasteleyn_entry(b: (i64, i64), w: (i64, i64), n: i64) -> Option<Complex64> {
    if !is_black(b, n) || !is_white(w, n) {
        return None;
    }
    let (j1, k1) = ((b.0 - 1) / 2, (b.1 - 1) / 2);
    let (j2, k2) = ((w.0 - 1) / 2, (w.1 + 1) / 2);
    let s = if (k1 + n).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    match (j2 - j1, k2 - k1) {
        (0, 0) => Some(Complex64::new(-s, 0.0)),
        (-1, 1) => Some(Complex64::new(0.0, -s)),
        (0, 2) => Some(Complex64::new(s, 0.0)),
        (1, 1) => Some(Complex64::new(0.0, s)),
        _ => None,
    }
}

fn in_an(v: (i64, i64), n: i64) -> bool {
    v.0.rem_euclid(2) == 1 && v.1.rem_euclid(2) == 1 && v.0.abs() + v.1.abs() <= 2 * n
}

pub fn is_black(v: (i64, i64), n: i64) -> bool {
    in_an(v, n) && ((v.0 + v.1) / 2 + n).rem_euclid(2) == 0
}

pub fn is_white(v: (i64, i64), n: i64) -> bool {
    in_an(v, n) && ((v.0 + v.1) / 2 + n).rem_euclid(2) == 1
}

/// Sparse Kasteleyn matrix of `A_n`, rows black and columns white.
#[derive(Clone, Debug)]
pub struct KasteleynMatrix {
    pub n: i64,
    pub blacks: Vec<(i64, i64)>,
    pub whites: Vec<(i64, i64)>,
    pub entries: Vec<(usize, usize, Complex64)>,
}

impl KasteleynMatrix {
    pub fn new(n: i64) -> Self {
        let mut blacks = Vec::new();
        let mut whites = Vec::new();
        for x in (-2 * n + 1..=2 * n - 1).step_by(2) {
            for y in (-2 * n + 1..=2 * n - 1).step_by(2) {
                if is_black((x, y), n) {
                    blacks.push((x, y));
                } else if is_white((x, y), n) {
                    whites.push((x, y));
                }
            }
        }
        let wi: HashMap<(i64, i64), usize> = whites.iter().enumerate().map(|(i, &w)| (w, i)).collect();
        let mut entries = Vec::new();
        for (bi, &b) in blacks.iter().enumerate() {
            for d in [(2, 0), (-2, 0), (0, 2), (0, -2)] {
                let w = (b.0 + d.0, b.1 + d.1);
                if let (Some(&j), Some(v)) = (wi.get(&w), kasteleyn_entry(b, w, n)) {
                    entries.push((bi, j, v));
                }
            }
        }
        KasteleynMatrix { n, blacks, whites, entries }
    }

    pub fn get(&self, b: (i64, i64), w: (i64, i64)) -> Complex64 {
        kasteleyn_entry(b, w, self.n).filter(|_| in_an(b, self.n) && in_an(w, self.n)).unwrap_or_default()
    }

    /// Alternating products `K(b1,w1) K(b2,w2) / (K(b1,w2) K(b2,w1))` around
    /// every face of `A_n`.
    pub fn face_products(&self) -> Vec<(FaceCoord, Complex64)> {
        let n = self.n;
        let mut out = Vec::new();
        for j in -n..=n {
            for k in -n..=n {
                if !in_aztec(j, k, n) {
                    continue;
                }
                let corners = [(2 * j - 1, 2 * k - 1), (2 * j + 1, 2 * k - 1), (2 * j + 1, 2 * k + 1), (2 * j - 1, 2 * k + 1)];
                let (bs, ws): (Vec<_>, Vec<_>) = corners.iter().partition(|&&v| is_black(v, n));
                let (b1, b2, w1, w2) = (bs[0], bs[1], ws[0], ws[1]);
                let p = self.get(b1, w1) * self.get(b2, w2) / (self.get(b1, w2) * self.get(b2, w1));
                out.push((FaceCoord::new(j, k), p));
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Quadrature

struct Nodes {
    prec: u32,
    z: Vec<Complex>,
    w: Vec<Complex>,
}

/// `z_k (w_l - 1) / ((z_k - w_l) N^2)`, row-major.
struct Kernel {
    k: Vec<Complex>,
}

fn circle(prec: u32, spec: &ContourSpec, nodes: usize) -> Vec<Complex> {
    let two_pi = Float::with_val(prec, Constant::Pi) * 2u32;
    (0..nodes)
        .map(|i| {
            let theta = Float::with_val(prec, &two_pi * i as u32) / nodes as u32;
            let (s, c) = theta.sin_cos(Float::new(prec));
            let r = Float::with_val(prec, spec.radius);
            Complex::with_val(prec, (Float::with_val(prec, &r * &c) + spec.center.re, Float::with_val(prec, &r * &s) + spec.center.im))
        })
        .collect()
}

type NodeKey = (usize, u32, u64, u64);

fn node_key(c: &Contours, nodes: usize, prec: u32) -> NodeKey {
    (nodes, prec, c.z.radius.to_bits(), c.w.radius.to_bits())
}

fn nodes_for(c: &Contours, nodes: usize, prec: u32) -> Arc<Nodes> {
    static CACHE: OnceLock<Mutex<HashMap<NodeKey, Arc<Nodes>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let key = node_key(c, nodes, prec);
    if let Some(v) = cache.lock().unwrap().get(&key) {
        return v.clone();
    }
    let v = Arc::new(Nodes { prec, z: circle(prec, &c.z, nodes), w: circle(prec, &c.w, nodes) });
    cache.lock().unwrap().insert(key, v.clone());
    v
}

/// Kernels are cached for node counts up to this size; larger ones are
/// evaluated on the fly.
const KERNEL_CACHE_MAX: usize = 256;

fn kernel_for(c: &Contours, nodes: usize, prec: u32) -> Option<Arc<Kernel>> {
    if nodes > KERNEL_CACHE_MAX {
        return None;
    }
    static CACHE: OnceLock<Mutex<HashMap<NodeKey, Arc<Kernel>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let key = node_key(c, nodes, prec);
    if let Some(v) = cache.lock().unwrap().get(&key) {
        return Some(v.clone());
    }
    let nd = nodes_for(c, nodes, prec);
    let k = kernel_rows(&nd);
    let v = Arc::new(Kernel { k });
    cache.lock().unwrap().insert(key, v.clone());
    Some(v)
}

fn kernel_entry(z: &Complex, w: &Complex, scale: &Float, prec: u32) -> Complex {
    let num = Complex::with_val(prec, z * Complex::with_val(prec, w - 1u32));
    let den = Complex::with_val(prec, z - w);
    Complex::with_val(prec, num / den) / scale
}

fn kernel_rows(nd: &Nodes) -> Vec<Complex> {
    let prec = nd.prec;
    let n = nd.z.len();
    let scale = Float::with_val(prec, n as u64 * n as u64);
    nd.z.par_iter().flat_map_iter(|z| nd.w.iter().map(|w| kernel_entry(z, w, &scale, prec)).collect::<Vec<_>>()).collect()
}

/// Powers of the factors `w, w+1, w-1` (or `z, z+1, z-1`) with integer
/// exponents.
fn monomial(v: &Complex, e0: i64, e1: i64, e2: i64, prec: u32) -> Complex {
    let p0 = ipow(v, e0, prec);
    let p1 = ipow(&Complex::with_val(prec, v + 1u32), e1, prec);
    let p2 = ipow(&Complex::with_val(prec, v - 1u32), e2, prec);
    Complex::with_val(prec, &p0 * &p1) * p2
}

/// Integer power by repeated squaring; MPC's general power goes through
/// logarithms and is far slower.
fn ipow(v: &Complex, e: i64, prec: u32) -> Complex {
    let mut base = v.clone();
    let mut acc = Complex::with_val(prec, 1);
    let mut m = e.unsigned_abs();
    while m > 0 {
        if m & 1 == 1 {
            acc *= &base;
        }
        m >>= 1;
        if m > 0 {
            base.square_mut();
        }
    }
    if e < 0 {
        acc.recip_mut();
    }
    acc
}

fn log2_abs_monomial(v: Complex64, e0: i64, e1: i64, e2: i64) -> f64 {
    e0 as f64 * v.norm().log2() + e1 as f64 * (v + 1.0).norm().log2() + e2 as f64 * (v - 1.0).norm().log2()
}

/// Exponents `(e0, e1, e2)` of `v^e0 (v+1)^e1 (v-1)^e2` for the `z` and `w`
/// parts of an integrand.
#[derive(Clone, Copy, Debug)]
struct Exponents {
    z: (i64, i64, i64),
    w: (i64, i64, i64),
}

fn peak_log2(c: &Contours, e: &Exponents) -> f64 {
    let m = 256;
    let mut pz = f64::NEG_INFINITY;
    let mut pw = f64::NEG_INFINITY;
    for i in 0..m {
        let t = Complex64::from_polar(1.0, std::f64::consts::TAU * i as f64 / m as f64);
        pz = pz.max(log2_abs_monomial(c.z.center + t * c.z.radius, e.z.0, e.z.1, e.z.2));
        pw = pw.max(log2_abs_monomial(c.w.center + t * c.w.radius, e.w.0, e.w.1, e.w.2));
    }
    pz + pw
}

/// Working precision for a peak integrand magnitude of `2^peak`.
fn precision_for(peak: f64) -> u32 {
    let bits = peak.max(0.0).ceil() as u32 + 96;
    bits.div_ceil(64) * 64
}

fn to_c64(c: &Complex) -> Complex64 {
    Complex64::new(c.real().to_f64(), c.imag().to_f64())
}

fn half_exponent(num: i64, what: &str) -> Result<i64, Error> {
    if num.rem_euclid(2) != 0 {
        return Err(Error::Precondition(format!("non-integral exponent {num}/2 in {what}")));
    }
    Ok(num / 2)
}

/// `(1/N^2) sum_k sum_l A_k K_kl B_l` for several `(A, B)` pairs sharing
/// the `B` vectors; returns one value per requested pair.
///
/// `extend` may append linear combinations of the row sums `u = K B`, which
/// `pairs` can then refer to.
fn kernel_forms(c: &Contours, nodes: usize, prec: u32, a_of: &dyn Fn(&Complex) -> Vec<Complex>, b_of: &dyn Fn(&Complex) -> Vec<Complex>, extend: &dyn Fn(&mut Vec<Complex>), pairs: &[(usize, usize)]) -> Vec<Complex> {
    let nd = nodes_for(c, nodes, prec);
    let kern = kernel_for(c, nodes, prec);
    let bs: Vec<Vec<Complex>> = nd.w.iter().map(b_of).collect();
    let nb = bs[0].len();
    let scale = Float::with_val(prec, nodes as u64 * nodes as u64);
    let mut out = vec![Complex::new(prec); pairs.len()];
    let mut tmp = Complex::new(prec);
    let mut ft = Float::new(prec);
    let mut u = vec![Complex::new(prec); nb];
    for (k, z) in nd.z.iter().enumerate() {
        let av = a_of(z);
        for ui in u.iter_mut() {
            ui.assign(0);
        }
        for (l, w) in nd.w.iter().enumerate() {
            let fresh;
            let kv = match &kern {
                Some(kr) => &kr.k[k * nodes + l],
                None => {
                    fresh = kernel_entry(z, w, &scale, prec);
                    &fresh
                }
            };
            for (ui, bv) in u.iter_mut().zip(&bs[l]) {
                mul_add(ui, kv, bv, &mut ft);
            }
        }
        let mut ux = u.clone();
        extend(&mut ux);
        for (o, &(ai, bi)) in out.iter_mut().zip(pairs) {
            tmp.assign(&av[ai] * &ux[bi]);
            *o += &tmp;
        }
    }
    out
}

/// `acc += a * b` from four real products; MPC's correctly rounded
/// product is several times slower and the extra accuracy is not needed.
fn mul_add(acc: &mut Complex, a: &Complex, b: &Complex, t: &mut Float) {
    let (ar, ai) = (a.real(), a.imag());
    let (br, bi) = (b.real(), b.imag());
    let (re, im) = acc.as_mut_real_imag();
    t.assign(ar * br);
    *re += &*t;
    t.assign(ai * bi);
    *re -= &*t;
    t.assign(ar * bi);
    *im += &*t;
    t.assign(ai * br);
    *im += &*t;
}

/// `(1/N) sum_k f(v_k) (v_k - centre)`, the trapezoidal rule for
/// `(1/2 pi i) \oint f(v) dv`.
fn contour_mean(spec: &ContourSpec, nodes: usize, prec: u32, f: &dyn Fn(&Complex) -> Complex) -> Complex {
    let pts = circle(prec, spec, nodes);
    let mut acc = Complex::new(prec);
    for v in &pts {
        let d = Complex::with_val(prec, v - Complex::with_val(prec, (spec.center.re, spec.center.im)));
        acc += f(v) * d;
    }
    acc / nodes as u32
}

// ---------------------------------------------------------------------------
// Face integrals

/// Contour-integral values at one odd face.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FaceIntegrals {
    pub pe: f64,
    pub pn: f64,
    pub pw: f64,
    pub ps: f64,
    pub t: Complex64,
    /// Largest change of any of the values under the last node doubling.
    pub residual: f64,
    /// Node count of the reported values.
    pub nodes: usize,
}

impl FaceIntegrals {
    pub fn p(&self, d: Dir) -> f64 {
        match d {
            Dir::E => self.pe,
            Dir::N => self.pn,
            Dir::W => self.pw,
            Dir::S => self.ps,
        }
    }
}

fn face_exponents(j: i64, k: i64, n: i64) -> Result<Exponents, Error> {
    let a = half_exponent(n + 1 + j + k, "a")?;
    let b = half_exponent(n + 1 - j + k, "b")?;
    let c = half_exponent(n + 1 + j - k, "c")?;
    Ok(Exponents { z: (-a, b, c), w: (a, -b, -c) })
}

fn check_face(j: i64, k: i64, n: i64) -> Result<(), Error> {
    if !in_lambda(j, k, n) {
        return Err(Error::Parity { j, k, n });
    }
    if !in_aztec(j, k, n) {
        return Err(Error::Precondition(format!("({j},{k}) is not an inner face at size {n}")));
    }
    Ok(())
}

fn face_raw(j: i64, k: i64, n: i64, c: &Contours, nodes: usize, prec: u32) -> Result<[Complex; 5], Error> {
    let e = face_exponents(j, k, n)?;
    let a_of = |z: &Complex| {
        let m = monomial(z, e.z.0, e.z.1, e.z.2, prec);
        let zp1 = Complex::with_val(prec, z + 1u32);
        let zm1 = Complex::with_val(prec, z - 1u32);
        let ae = Complex::with_val(prec, &m / &zp1);
        let an = Complex::with_val(prec, &m / &zm1);
        let one_m_i = Complex::with_val(prec, (1, -1));
        let z_m_i = Complex::with_val(prec, z - Complex::with_val(prec, (0, 1)));
        let gt = Complex::with_val(prec, &one_m_i * &z_m_i) / Complex::with_val(prec, &zm1 * &zp1);
        let at = Complex::with_val(prec, &m * &gt);
        vec![ae, an, at]
    };
    let b_of = |w: &Complex| {
        let m = monomial(w, e.w.0, e.w.1, e.w.2, prec);
        let mw = Complex::with_val(prec, &m / w);
        vec![m, mw]
    };
    // (w - i)/w = 1 - i/w
    let extend = |u: &mut Vec<Complex>| {
        let iv = Complex::with_val(prec, &u[1] * Complex::with_val(prec, (0, 1)));
        let t = Complex::with_val(prec, &u[0] - &iv);
        u.push(t);
    };
    // pE: 1/(1+z); pN: -1/(z-1); pW: 1/(w(z-1)) + 1; pS: 1/(w(z+1)); T: G_T - 1
    let v = kernel_forms(c, nodes, prec, &a_of, &b_of, &extend, &[(0, 0), (1, 0), (1, 1), (0, 1), (2, 2)]);
    let [pe, pn, pw, ps, t]: [Complex; 5] = v.try_into().expect("five forms");
    Ok([pe, -pn, pw + 1u32, ps, t - 1u32])
}

/// Edge probabilities and `T_n(j,k)` at an odd face from the contour
/// integrals, with the node-doubling check.
pub fn face_integrals(j: i64, k: i64, n: i64, c: &Contours) -> Result<FaceIntegrals, Error> {
    check_face(j, k, n)?;
    c.validate()?;
    let prec = precision_for(peak_log2(c, &face_exponents(j, k, n)?));
    face_integrals_at(j, k, n, c, prec)
}

/// Node counts are doubled from the requested one until the doubling check
/// passes or this many nodes would be needed.
pub const MAX_NODES: usize = 1024;

fn face_integrals_at(j: i64, k: i64, n: i64, c: &Contours, prec: u32) -> Result<FaceIntegrals, Error> {
    let mut nodes = c.z.nodes;
    let mut lo: Vec<Complex64> = face_raw(j, k, n, c, nodes, prec)?.iter().map(to_c64).collect();
    loop {
        let hi: Vec<Complex64> = face_raw(j, k, n, c, 2 * nodes, prec)?.iter().map(to_c64).collect();
        let residual = lo.iter().zip(&hi).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        if residual <= c.tol {
            return Ok(FaceIntegrals { pe: hi[0].re, pn: hi[1].re, pw: hi[2].re, ps: hi[3].re, t: hi[4], residual, nodes: 2 * nodes });
        }
        if 4 * nodes > MAX_NODES {
            return Err(Error::Quadrature(format!("face ({j},{k}) at size {n}: node doubling changed the values by {residual:e} at {} nodes", 2 * nodes)));
        }
        nodes *= 2;
        lo = hi;
    }
}

/// Odd faces of `A_n` in `(j, k)` order.
pub fn aztec_faces(n: i64) -> Vec<FaceCoord> {
    (-n..=n).flat_map(|j| (-n..=n).map(move |k| FaceCoord::new(j, k))).filter(|f| in_aztec(f.j, f.k, n) && in_lambda(f.j, f.k, n)).collect()
}

/// Face integrals at every odd face of `A_n`, in `(j, k)` order.
pub fn aztec_integrals(n: i64, c: &Contours) -> Result<Vec<(FaceCoord, FaceIntegrals)>, Error> {
    c.validate()?;
    let faces = aztec_faces(n);
    let mut peak = 0.0f64;
    for f in &faces {
        peak = peak.max(peak_log2(c, &face_exponents(f.j, f.k, n)?));
    }
    let prec = precision_for(peak);
    faces.par_iter().map(|f| face_integrals_at(f.j, f.k, n, c, prec).map(|v| (*f, v))).collect()
}

/// The full level of size `n` from contour integrals: odd vertices from size
/// `n`, even vertices from size `n + 1` (where they are odd). `O` is read
/// off the probabilities as `pE + pW + i (pN + pS)`.
pub fn aztec_embedding_from_integrals(n: i64, c: &Contours) -> Result<TEmbeddingLevel<f64>, Error> {
    if n < 1 {
        return Err(Error::Precondition(format!("size must be at least 1, got {n}")));
    }
    let mut values: HashMap<(i64, i64), FaceIntegrals> = HashMap::new();
    for size in [n, n + 1] {
        for (f, v) in aztec_integrals(size, c)? {
            if in_aztec(f.j, f.k, n) {
                values.insert((f.j, f.k), v);
            }
        }
    }
    let (tb, ob) = (embedding_images::<f64>(), origami_images::<f64>());
    let boundary = GraphKind::Aztec.boundary(n);
    let side = |j: i64, k: i64| boundary.iter().position(|b| (b.j, b.k) == (j, k));
    let cx = |z: Complex64| Cx::new(z.re, z.im);
    Ok(TEmbeddingLevel::build(
        GraphKind::Aztec,
        n,
        |j, k| side(j, k).map(|s| tb[s].clone()).unwrap_or_else(|| cx(values[&(j, k)].t)),
        |j, k| {
            side(j, k).map(|s| ob[s].clone()).unwrap_or_else(|| {
                let v = &values[&(j, k)];
                Cx::new(v.pe + v.pw, v.pn + v.ps)
            })
        },
    ))
}

/// `p_dir(j,k,n)` from the contour integrals with default contours.
pub fn p_edge_via_kasteleyn(dir: Dir, j: i64, k: i64, n: i64) -> Result<f64, Error> {
    Ok(face_integrals(j, k, n, &Contours::default())?.p(dir))
}

/// `T_n(j,k)` at an odd face from its double-integral formula.
pub fn t_embedding_integral(j: i64, k: i64, n: i64) -> Result<Complex64, Error> {
    Ok(face_integrals(j, k, n, &Contours::default())?.t)
}

// ---------------------------------------------------------------------------
// Inverse Kasteleyn matrix

/// `(-1)^{(k1 + k2 + 2n)/2}`, read as `i^{k1 + k2 + 2n}`.
fn inverse_prefactor(k1: i64, k2: i64, n: i64) -> Complex64 {
    match (k1 + k2 + 2 * n).rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// The double-integral part `f_1` of `K^{-1}`.
pub fn inverse_k_f1(j1: i64, k1: i64, j2: i64, k2: i64, n: i64, c: &Contours) -> Result<Complex64, Error> {
    c.validate()?;
    let e = Exponents {
        z: (-half_exponent(j1 + k1 + n + 1, "f1")?, half_exponent(k1 - j1 + n - 1, "f1")?, half_exponent(j1 - k1 + n + 1, "f1")?),
        w: (half_exponent(j2 + k2 + n + 1, "f1")?, -half_exponent(k2 - j2 + n + 1, "f1")?, -half_exponent(j2 - k2 + n + 1, "f1")?),
    };
    let prec = precision_for(peak_log2(c, &e));
    let eval = |nodes: usize| {
        let a_of = |z: &Complex| vec![monomial(z, e.z.0, e.z.1, e.z.2, prec)];
        let b_of = |w: &Complex| vec![monomial(w, e.w.0, e.w.1, e.w.2, prec)];
        // dz dw / (w - z)
        -to_c64(&kernel_forms(c, nodes, prec, &a_of, &b_of, &|_| {}, &[(0, 0)])[0])
    };
    let (lo, hi) = (eval(c.z.nodes), eval(2 * c.z.nodes));
    let r = (lo - hi).norm();
    if !(r <= c.tol) {
        return Err(Error::Quadrature(format!("f1 node doubling changed the value by {r:e}")));
    }
    Ok(inverse_prefactor(k1, k2, n) * hi)
}

/// The single-integral part `f_2` of `K^{-1}`.
pub fn inverse_k_f2(j1: i64, k1: i64, j2: i64, k2: i64, n: i64, c: &Contours) -> Result<Complex64, Error> {
    c.validate()?;
    let p = half_exponent(j2 + k2 - j1 - k1, "f2")?;
    let q = half_exponent(k2 - j2 - k1 + j1, "f2")?;
    let prec = 128 + 4 * (p.abs() + q.abs()) as u32;
    let f = |z: &Complex| {
        let a = ipow(&Complex::with_val(prec, z + 1u32), p, prec);
        let b = ipow(z, q, prec);
        let d = ipow(&Complex::with_val(prec, z + 2u32), q + 1, prec);
        Complex::with_val(prec, &a * &b) / d
    };
    let lo = to_c64(&contour_mean(&c.z, c.z.nodes, prec, &f));
    let hi = to_c64(&contour_mean(&c.z, 2 * c.z.nodes, prec, &f));
    let r = (lo - hi).norm();
    if !(r <= c.tol) {
        return Err(Error::Quadrature(format!("f2 node doubling changed the value by {r:e}")));
    }
    Ok(inverse_prefactor(k1, k2, n) * hi)
}

/// `K^{-1}` between the white vertex `(j1 + 1/2, k1 - 1/2)` and the black
/// vertex `(j2 + 1/2, k2 + 1/2)`.
pub fn inverse_k_entry(j1: i64, k1: i64, j2: i64, k2: i64, n: i64, c: &Contours) -> Result<Complex64, Error> {
    if !in_lambda(j1, k1, n) || !in_lambda(j2, k2, n) {
        return Err(Error::Parity { j: j1, k: k1, n });
    }
    let f1 = inverse_k_f1(j1, k1, j2, k2, n, c)?;
    if j1 + k1 < j2 + k2 + 2 {
        Ok(f1)
    } else {
        Ok(f1 - inverse_k_f2(j1, k1, j2, k2, n, c)?)
    }
}

// ---------------------------------------------------------------------------
// Edge differences and the leading term

/// `G_{i,i'} = h(z) g(w)` as evaluators.
fn direction_factors(di: i64, dk: i64) -> Result<(fn(Complex64) -> Complex64, fn(Complex64) -> Complex64), Error> {
    fn one(_: Complex64) -> Complex64 {
        Complex64::new(1.0, 0.0)
    }
    fn inv(z: Complex64) -> Complex64 {
        1.0 / z
    }
    fn neg_inv(z: Complex64) -> Complex64 {
        -1.0 / z
    }
    fn inv_m1(w: Complex64) -> Complex64 {
        1.0 / (w - 1.0)
    }
    fn inv_p1(w: Complex64) -> Complex64 {
        1.0 / (w + 1.0)
    }
    match (di, dk) {
        (1, 0) => Ok((inv, inv_m1)),
        (0, 1) => Ok((neg_inv, inv_p1)),
        (-1, 0) => Ok((one, inv_p1)),
        (0, -1) => Ok((one, inv_m1)),
        _ => Err(Error::Precondition(format!("({di},{dk}) is not a unit step"))),
    }
}

/// `G_T(z,w) = (1-i)(z-i)(w-i) / ((z-1)(z+1)w)`.
pub fn g_t(z: Complex64, w: Complex64) -> Complex64 {
    let i = Complex64::i();
    (1.0 - i) * (z - i) * (w - i) / ((z - 1.0) * (z + 1.0) * w)
}

fn check_edge(j: i64, k: i64, di: i64, dk: i64, n: i64) -> Result<(), Error> {
    if di.abs() + dk.abs() != 1 {
        return Err(Error::Precondition(format!("({di},{dk}) is not a unit step")));
    }
    check_face(j, k, n)?;
    if !in_aztec(j + di, k + dk, n) {
        return Err(Error::Precondition(format!("({},{}) is not an inner face at size {n}", j + di, k + dk)));
    }
    Ok(())
}

/// `T_n(j+i, k+i') - T_n(j,k)` from the separable double integral with
/// `G_{i,i'} G_T`; `(j,k)` is an odd face and both ends are inner.
pub fn edge_difference_integral(j: i64, k: i64, di: i64, dk: i64, n: i64) -> Result<Complex64, Error> {
    check_edge(j, k, di, dk, n)?;
    let c = Contours::with_nodes(256);
    let e = face_exponents(j, k, n)?;
    // z part: (1-i)(z-i)/((z-1)(z+1)) h(z); w part: (w-i)/w g(w)
    let (hz, gw): (&dyn Fn(&Complex, u32) -> Complex, &dyn Fn(&Complex, u32) -> Complex) = match (di, dk) {
        (1, 0) => (&|z, p| Complex::with_val(p, z.recip_ref()), &|w, p| Complex::with_val(p, Complex::with_val(p, w - 1u32).recip_ref())),
        (0, 1) => (&|z, p| -Complex::with_val(p, z.recip_ref()), &|w, p| Complex::with_val(p, Complex::with_val(p, w + 1u32).recip_ref())),
        (-1, 0) => (&|_, p| Complex::with_val(p, 1), &|w, p| Complex::with_val(p, Complex::with_val(p, w + 1u32).recip_ref())),
        _ => (&|_, p| Complex::with_val(p, 1), &|w, p| Complex::with_val(p, Complex::with_val(p, w - 1u32).recip_ref())),
    };
    let mut prec = precision_for(peak_log2(&c, &e));
    let mut nodes = c.z.nodes;
    let eval = |nodes: usize, prec: u32| {
        let fz = |z: &Complex| {
            let m = monomial(z, e.z.0, e.z.1, e.z.2, prec);
            let zm1 = Complex::with_val(prec, z - 1u32);
            let zp1 = Complex::with_val(prec, z + 1u32);
            let num = Complex::with_val(prec, Complex::with_val(prec, (1, -1)) * Complex::with_val(prec, z - Complex::with_val(prec, (0, 1))));
            let g = Complex::with_val(prec, &num / Complex::with_val(prec, &zm1 * &zp1));
            Complex::with_val(prec, &m * &g) * hz(z, prec)
        };
        let fw = |w: &Complex| {
            let m = monomial(w, e.w.0, e.w.1, e.w.2, prec);
            let g = Complex::with_val(prec, Complex::with_val(prec, w - Complex::with_val(prec, (0, 1))) / w);
            Complex::with_val(prec, &m * &g) * gw(w, prec)
        };
        let iz = contour_mean(&c.z, nodes, prec, &fz);
        let iw = contour_mean(&c.w, nodes, prec, &fw);
        to_c64(&Complex::with_val(prec, &iz * &iw))
    };
    for _ in 0..4 {
        let lo = eval(nodes, prec);
        let hi = eval(2 * nodes, prec + 64);
        let r = (lo - hi).norm();
        if r <= 1e-12 * hi.norm().max(1e-300) {
            return Ok(hi);
        }
        nodes *= 2;
        prec += 64;
    }
    Err(Error::Quadrature(format!("edge ({j},{k})+({di},{dk}) at size {n} did not converge")))
}

/// The displayed leading term approximates `LEADING_TERM_SIGN` times
/// [`edge_difference_integral`]; the sign comes from the contour
/// orientation and is the same for all four directions.
pub const LEADING_TERM_SIGN: f64 = -1.0;

/// Steepest-descent leading term of the edge-difference integral.
pub fn leading_term(j: i64, k: i64, di: i64, dk: i64, n: i64) -> Result<Complex64, Error> {
    let (h, g) = direction_factors(di, dk)?;
    let m = (n + 1) as f64;
    let (x, y) = (j as f64 / m, k as f64 / m);
    let fr = ActionFrame::new(x, y)?;
    let xi = fr.xi;
    let xb = xi.conj();
    let gg = |z: Complex64, w: Complex64| h(z) * g(w) * g_t(z, w);
    let alpha = Complex64::from_polar(1.0, -2.0 * fr.theta);
    let beta = Complex64::from_polar(1.0, -2.0 * m * fr.s(xi)?.im);
    let bracket = alpha * gg(xi, xi) + beta * gg(xi, xb) - alpha.conj() * gg(xb, xb) - beta.conj() * gg(xb, xi);
    let i = Complex64::i();
    Ok(-1.0 / m / (2.0 * std::f64::consts::PI * i * fr.s2.norm()) * bracket)
}
