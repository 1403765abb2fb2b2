//! Continuum limits: the edge densities `Psi`, the limit embedding `z` and
//! origami `theta`, the action `S` with its critical point, and the Aztec and
//! tower conformal structures.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::recurrence::Dir;
use crate::Error;

const SINGULAR_EPS: f64 = 1e-12;

/// Regions of the scaled Aztec domain `|x| + |y| <= 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    Liquid,
    EastFrozen,
    NorthFrozen,
    WestFrozen,
    SouthFrozen,
    /// One of the four points `(+-1/2, +-1/2)` where the arctic circle
    /// touches the boundary; they belong to no open frozen region.
    Tangency,
    Outside,
}

pub fn in_domain(x: f64, y: f64) -> bool {
    x.abs() + y.abs() <= 1.0
}

pub fn is_liquid(x: f64, y: f64) -> bool {
    in_domain(x, y) && x * x + y * y < 0.5
}

pub fn classify_region(x: f64, y: f64) -> Region {
    if !in_domain(x, y) {
        Region::Outside
    } else if x * x + y * y < 0.5 {
        Region::Liquid
    } else if x > 0.5 {
        Region::EastFrozen
    } else if y > 0.5 {
        Region::NorthFrozen
    } else if x < -0.5 {
        Region::WestFrozen
    } else if y < -0.5 {
        Region::SouthFrozen
    } else {
        Region::Tangency
    }
}

fn check_east(x: f64, y: f64) -> Result<(), Error> {
    if !in_domain(x, y) {
        return Err(Error::Precondition(format!("({x},{y}) is outside the Aztec domain")));
    }
    if (x - 0.5).abs() < SINGULAR_EPS && (y.abs() - 0.5).abs() < SINGULAR_EPS {
        return Err(Error::Precondition(format!("Psi_E is singular at ({x},{y})")));
    }
    Ok(())
}

/// `1 - 2x^2 - 2y^2`, accurate near the arctic circle: the squares are
/// split exactly with `fma` and the five terms summed with compensation.
pub fn arctic_defect(x: f64, y: f64) -> f64 {
    let (xh, yh) = (x * x, y * y);
    let (xl, yl) = (x.mul_add(x, -xh), y.mul_add(y, -yh));
    let (mut sum, mut comp) = (1.0f64, 0.0f64);
    for t in [-2.0 * xh, -2.0 * yh, -2.0 * xl, -2.0 * yl] {
        let s = sum + t;
        comp += if sum.abs() >= t.abs() { (sum - s) + t } else { (t - s) + sum };
        sum = s;
    }
    sum + comp
}

/// Closed form of `Psi_E`.
pub fn psi_e(x: f64, y: f64) -> Result<f64, Error> {
    check_east(x, y)?;
    let d = arctic_defect(x, y);
    Ok(if d <= 0.0 {
        if x > 0.5 {
            1.0
        } else {
            0.0
        }
    } else {
        0.5 + ((2.0 * x - 1.0) / d.sqrt()).atan() / PI
    })
}

/// `Psi_E` as the integral over `s in [0,1]` of the local density, by
/// tanh-sinh quadrature after `s = endpoint +- u^2` on each half of the
/// support.
pub fn psi_e_quadrature(x: f64, y: f64) -> Result<f64, Error> {
    check_east(x, y)?;
    // density 1/(pi sqrt(q)) with q(s) = -s^2 + (4x-2)s + 1 - 2x^2 - 2y^2
    let p = 2.0 * x - 1.0;
    let disc = p * p + 1.0 - 2.0 * x * x - 2.0 * y * y;
    if disc <= 0.0 {
        return Ok(0.0);
    }
    let (a, b) = (p - disc.sqrt(), p + disc.sqrt());
    let (lo, hi) = (a.max(0.0), b.min(1.0));
    if lo >= hi {
        return Ok(0.0);
    }
    let mid = 0.5 * (lo + hi);
    let (dl, dr) = (lo - a, b - hi);
    // s = lo + u^2: q = (dl + u^2)(b - s)
    let left = |u: f64| {
        let s = lo + u * u;
        let g = if dl == 0.0 { 1.0 } else { u / (dl + u * u).sqrt() };
        2.0 * g / (b - s).sqrt()
    };
    // s = hi - u^2: q = (s - a)(dr + u^2)
    let right = |u: f64| {
        let s = hi - u * u;
        let g = if dr == 0.0 { 1.0 } else { u / (dr + u * u).sqrt() };
        2.0 * g / (s - a).sqrt()
    };
    let h = (mid - lo).sqrt();
    let l = quadrature::double_exponential::integrate(left, 0.0, h, 1e-14);
    let r = quadrature::double_exponential::integrate(right, 0.0, h, 1e-14);
    let err = l.error_estimate + r.error_estimate;
    if !(err < 1e-9) {
        return Err(Error::Quadrature(format!("Psi_E at ({x},{y}): error estimate {err:e}")));
    }
    Ok((l.integral + r.integral) / PI)
}

fn to_east(dir: Dir, x: f64, y: f64) -> (f64, f64) {
    match dir {
        Dir::E => (x, y),
        Dir::N => (y, -x),
        Dir::W => (-x, -y),
        Dir::S => (-y, x),
    }
}

/// `Psi_dir` by the closed form.
pub fn psi(dir: Dir, x: f64, y: f64) -> Result<f64, Error> {
    let (a, b) = to_east(dir, x, y);
    psi_e(a, b)
}

/// `Psi_dir` by quadrature.
pub fn psi_quadrature(dir: Dir, x: f64, y: f64) -> Result<f64, Error> {
    let (a, b) = to_east(dir, x, y);
    psi_e_quadrature(a, b)
}

fn psi4(x: f64, y: f64) -> Result<[f64; 4], Error> {
    Ok([psi(Dir::E, x, y)?, psi(Dir::N, x, y)?, psi(Dir::W, x, y)?, psi(Dir::S, x, y)?])
}

/// `z = Psi_E + i Psi_N - Psi_W - i Psi_S`.
pub fn z_limit(x: f64, y: f64) -> Result<Complex64, Error> {
    let [e, n, w, s] = psi4(x, y)?;
    Ok(Complex64::new(e - w, n - s))
}

/// `theta = (Psi_E - Psi_N + Psi_W - Psi_S) / sqrt 2`.
pub fn theta_limit(x: f64, y: f64) -> Result<f64, Error> {
    let [e, n, w, s] = psi4(x, y)?;
    Ok((e - n + w - s) * FRAC_1_SQRT_2)
}

/// Inverts `z` on the liquid disk by Newton iteration from the nearest
/// point of a seed grid.
pub fn z_inverse(w: Complex64) -> Result<(f64, f64), Error> {
    if w.re.abs() + w.im.abs() >= 1.0 {
        return Err(Error::Precondition(format!("{w} is outside the open square")));
    }
    let r = FRAC_1_SQRT_2;
    let steps = 60;
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for a in 0..=steps {
        for b in 0..=steps {
            let x = -r + 2.0 * r * a as f64 / steps as f64;
            let y = -r + 2.0 * r * b as f64 / steps as f64;
            if x * x + y * y < 0.5 * 0.999 {
                let d = (z_limit(x, y)? - w).norm();
                if d < best.0 {
                    best = (d, x, y);
                }
            }
        }
    }
    let (_, mut x, mut y) = best;
    for _ in 0..100 {
        let f = z_limit(x, y)? - w;
        if f.norm() < 1e-14 {
            return Ok((x, y));
        }
        let h = 1e-7;
        let fx = (z_limit(x + h, y)? - z_limit(x - h, y)?) / (2.0 * h);
        let fy = (z_limit(x, y + h)? - z_limit(x, y - h)?) / (2.0 * h);
        let det = fx.re * fy.im - fx.im * fy.re;
        if det == 0.0 {
            break;
        }
        let dx = (f.re * fy.im - f.im * fy.re) / det;
        let dy = (fx.re * f.im - fx.im * f.re) / det;
        let mut t = 1.0;
        while t > 1e-6 && !is_liquid(x - t * dx, y - t * dy) {
            t *= 0.5;
        }
        x -= t * dx;
        y -= t * dy;
    }
    let res = (z_limit(x, y)? - w).norm();
    if res < 1e-10 {
        Ok((x, y))
    } else {
        Err(Error::Quadrature(format!("z inverse did not converge at {w}, residual {res:e}")))
    }
}

/// Critical point of the action in the upper half plane.
pub fn xi(x: f64, y: f64) -> Result<Complex64, Error> {
    if !is_liquid(x, y) {
        return Err(Error::OutsideLiquid { x, y });
    }
    Ok(Complex64::new(y - x, (1.0 - 2.0 * x * x - 2.0 * y * y).sqrt()) / (1.0 - x - y))
}

/// Coefficients of the three logarithms of `S`.
fn action_coeffs(x: f64, y: f64) -> (f64, f64, f64) {
    (0.5 * (1.0 + x + y), 0.5 * (1.0 - x + y), 0.5 * (1.0 + x - y))
}

fn check_action_point(z: Complex64) -> Result<(), Error> {
    for p in [0.0, 1.0, -1.0] {
        if (z - p).norm() == 0.0 {
            return Err(Error::Precondition(format!("the action is singular at {z}")));
        }
    }
    Ok(())
}

/// `S(z) = a log z - b log(z + 1) - c log(z - 1)` with principal logarithms.
pub fn action_s(z: Complex64, x: f64, y: f64) -> Result<Complex64, Error> {
    check_action_point(z)?;
    let (a, b, c) = action_coeffs(x, y);
    Ok(a * z.ln() - b * (z + 1.0).ln() - c * (z - 1.0).ln())
}

pub fn action_s_prime(z: Complex64, x: f64, y: f64) -> Result<Complex64, Error> {
    check_action_point(z)?;
    let (a, b, c) = action_coeffs(x, y);
    Ok(a / z - b / (z + 1.0) - c / (z - 1.0))
}

pub fn action_s_second(z: Complex64, x: f64, y: f64) -> Result<Complex64, Error> {
    check_action_point(z)?;
    let (a, b, c) = action_coeffs(x, y);
    Ok(-a / (z * z) + b / ((z + 1.0) * (z + 1.0)) + c / ((z - 1.0) * (z - 1.0)))
}

/// `S''(xi(x,y))`.
pub fn s_second(x: f64, y: f64) -> Result<Complex64, Error> {
    action_s_second(xi(x, y)?, x, y)
}

/// Critical point data at a liquid point.
#[derive(Clone, Copy, Debug)]
pub struct ActionFrame {
    pub x: f64,
    pub y: f64,
    pub xi: Complex64,
    pub s2: Complex64,
    /// `arg S''(xi) / 2`.
    pub theta: f64,
}

impl ActionFrame {
    pub fn new(x: f64, y: f64) -> Result<Self, Error> {
        let xi = xi(x, y)?;
        let s2 = action_s_second(xi, x, y)?;
        Ok(ActionFrame { x, y, xi, s2, theta: 0.5 * s2.arg() })
    }

    pub fn s(&self, z: Complex64) -> Result<Complex64, Error> {
        action_s(z, self.x, self.y)
    }
}

/// Aztec conformal structure; `Im > 0` exactly on the liquid disk.
pub fn xi_aztec(x: f64, y: f64) -> Complex64 {
    let r = Complex64::new(-1.0 + 2.0 * x * x + 2.0 * y * y, 0.0).sqrt();
    (Complex64::new(x + y, 0.0) - r) / (-1.0 + x - y)
}

/// Tower conformal structure.
pub fn xi_tower(x: f64, y: f64) -> Complex64 {
    let s = x + y;
    let r = Complex64::new(18.0 * x * x + 18.0 * y * y - (4.0 + s) * (4.0 + s), 0.0).sqrt();
    (Complex64::new(-3.0 * s, 0.0) + r) / (4.0 + 4.0 * y - 2.0 * x)
}

/// The change of coordinates from the tower to the Aztec domain.
pub fn tower_to_aztec(x: f64, y: f64) -> (f64, f64) {
    let d = 4.0 + x + y;
    (3.0 * x / d, 3.0 * y / d)
}

pub fn is_tower_liquid(x: f64, y: f64) -> bool {
    let (a, b) = tower_to_aztec(x, y);
    4.0 + x + y > 0.0 && is_liquid(a, b)
}

/// `|xi_aztec(3x/(4+x+y), 3y/(4+x+y)) - xi_tower(x,y)|`.
pub fn coord_change_residual(x: f64, y: f64) -> Result<f64, Error> {
    if !is_tower_liquid(x, y) {
        return Err(Error::OutsideLiquid { x, y });
    }
    let (a, b) = tower_to_aztec(x, y);
    Ok((xi_aztec(a, b) - xi_tower(x, y)).norm())
}

/// The Moebius map `((1-i)/sqrt 2)(z - i)/(z + i)` from the upper half plane
/// to the unit disk.
pub fn disk_map(z: Complex64) -> Complex64 {
    let i = Complex64::i();
    Complex64::new(FRAC_1_SQRT_2, -FRAC_1_SQRT_2) * (z - i) / (z + i)
}

/// `(z, theta)` values on each frozen region.
pub fn frozen_values(r: Region) -> Option<(Complex64, f64)> {
    let s = FRAC_1_SQRT_2;
    match r {
        Region::EastFrozen => Some((Complex64::new(1.0, 0.0), s)),
        Region::NorthFrozen => Some((Complex64::new(0.0, 1.0), -s)),
        Region::WestFrozen => Some((Complex64::new(-1.0, 0.0), s)),
        Region::SouthFrozen => Some((Complex64::new(0.0, -1.0), -s)),
        _ => None,
    }
}
