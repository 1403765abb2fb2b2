//! Numeric scalars.
//!
//! Every recurrence in this crate uses only `+`, `-`, `*` and halving, so the
//! [`Scalar`] trait asks for exactly that. [`Dyadic`] keeps those operations
//! exact; `f64` and `f32` are the fast modes.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Real scalar used by the recurrences.
pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialEq
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    /// True when arithmetic never rounds.
    const EXACT: bool;

    fn half(&self) -> Self;
    fn from_i64(v: i64) -> Self;
    fn to_f64(&self) -> f64;

    /// Sign of the value. Exact scalars override this so that values below
    /// the `f64` range keep their sign.
    fn sign(&self) -> Ordering {
        self.to_f64().partial_cmp(&0.0).unwrap_or(Ordering::Equal)
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;
    fn half(&self) -> Self {
        self * 0.5
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;
    fn half(&self) -> Self {
        self * 0.5
    }
    fn from_i64(v: i64) -> Self {
        v as f32
    }
    fn to_f64(&self) -> f64 {
        *self as f64
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;
    fn half(&self) -> Self {
        self / BigInt::from(2)
    }
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(v.into())
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn sign(&self) -> Ordering {
        self.numer().sign().cmp(&num_bigint::Sign::NoSign)
    }
}

/// Exact dyadic rational `num / 2^exp`, kept normalised (odd numerator when
/// `exp > 0`, and `exp == 0` for zero) so that `==` is structural.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    num: BigInt,
    exp: u32,
}

impl Dyadic {
    pub fn new(num: BigInt, exp: u32) -> Self {
        let mut d = Dyadic { num, exp };
        d.normalize();
        d
    }

    fn normalize(&mut self) {
        if self.num.is_zero() {
            self.exp = 0;
            return;
        }
        let tz = self.num.trailing_zeros().unwrap_or(0);
        let shift = tz.min(self.exp as u64) as u32;
        if shift > 0 {
            self.num >>= shift;
            self.exp -= shift;
        }
    }

    pub fn numerator(&self) -> &BigInt {
        &self.num
    }

    /// Base-2 logarithm of the (reduced) denominator.
    pub fn log2_den(&self) -> u32 {
        self.exp
    }

    /// Exact value of a finite double.
    pub fn from_f64(x: f64) -> Option<Self> {
        if !x.is_finite() {
            return None;
        }
        if x == 0.0 {
            return Some(Dyadic::zero());
        }
        let bits = x.to_bits();
        let sign = if bits >> 63 == 1 { -1 } else { 1 };
        let e = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, e) = if e == 0 { (frac, -1074) } else { (frac | (1u64 << 52), e - 1075) };
        let num = BigInt::from(mant) * sign;
        Some(if e >= 0 {
            Dyadic::new(num << (e as u32), 0)
        } else {
            Dyadic::new(num, (-e) as u32)
        })
    }

    /// Nearest double, plus whether the conversion was exact.
    pub fn to_f64_checked(&self) -> (f64, bool) {
        let x = self.to_f64_lossy();
        let exact = Dyadic::from_f64(x).is_some_and(|d| &d == self);
        (x, exact)
    }

    fn to_f64_lossy(&self) -> f64 {
        let bits = self.num.bits();
        // Keep 64 leading bits so the conversion rounds once.
        if bits > 64 {
            let drop = bits - 64;
            let top = (&self.num >> drop).to_f64().unwrap_or(f64::NAN);
            scale2(top, drop as i64 - self.exp as i64)
        } else {
            scale2(self.num.to_f64().unwrap_or(f64::NAN), -(self.exp as i64))
        }
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::new(self.num.clone(), BigInt::one() << self.exp)
    }

    /// Converts a rational whose reduced denominator is a power of two.
    pub fn from_rational(r: &BigRational) -> Option<Self> {
        let den = r.denom();
        let tz = den.trailing_zeros().unwrap_or(0);
        if den != &(BigInt::one() << tz) {
            return None;
        }
        Some(Dyadic::new(r.numer().clone(), tz as u32))
    }

    pub fn abs(&self) -> Self {
        Dyadic { num: self.num.abs(), exp: self.exp }
    }
}

fn scale2(x: f64, e: i64) -> f64 {
    let mut x = x;
    let mut e = e;
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
    }
    x * 2f64.powi(e as i32)
}

fn align(a: &Dyadic, b: &Dyadic) -> (BigInt, BigInt, u32) {
    match a.exp.cmp(&b.exp) {
        Ordering::Equal => (a.num.clone(), b.num.clone(), a.exp),
        Ordering::Less => (&a.num << (b.exp - a.exp), b.num.clone(), b.exp),
        Ordering::Greater => (a.num.clone(), &b.num << (a.exp - b.exp), a.exp),
    }
}

impl Add for Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: Dyadic) -> Dyadic {
        &self + &rhs
    }
}

impl<'a> Add<&'a Dyadic> for &'a Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: &Dyadic) -> Dyadic {
        if rhs.num.is_zero() {
            return self.clone();
        }
        if self.num.is_zero() {
            return rhs.clone();
        }
        let (x, y, e) = align(self, rhs);
        Dyadic::new(x + y, e)
    }
}

impl Sub for Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: Dyadic) -> Dyadic {
        &self - &rhs
    }
}

impl<'a> Sub<&'a Dyadic> for &'a Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: &Dyadic) -> Dyadic {
        let (x, y, e) = align(self, rhs);
        Dyadic::new(x - y, e)
    }
}

impl Mul for Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: Dyadic) -> Dyadic {
        &self * &rhs
    }
}

impl<'a> Mul<&'a Dyadic> for &'a Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: &Dyadic) -> Dyadic {
        Dyadic::new(&self.num * &rhs.num, self.exp + rhs.exp)
    }
}

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic { num: -self.num, exp: self.exp }
    }
}

impl AddAssign for Dyadic {
    fn add_assign(&mut self, rhs: Dyadic) {
        *self = &*self + &rhs;
    }
}

impl SubAssign for Dyadic {
    fn sub_assign(&mut self, rhs: Dyadic) {
        *self = &*self - &rhs;
    }
}

impl Zero for Dyadic {
    fn zero() -> Self {
        Dyadic { num: BigInt::zero(), exp: 0 }
    }
    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
}

impl One for Dyadic {
    fn one() -> Self {
        Dyadic { num: BigInt::one(), exp: 0 }
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (x, y, _) = align(self, other);
        x.cmp(&y)
    }
}

impl From<i64> for Dyadic {
    fn from(v: i64) -> Self {
        Dyadic { num: BigInt::from(v), exp: 0 }
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp == 0 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/2^{}", self.num, self.exp)
        }
    }
}

impl Scalar for Dyadic {
    const EXACT: bool = true;
    fn half(&self) -> Self {
        if self.num.is_zero() {
            return self.clone();
        }
        if self.num.is_even() {
            Dyadic::new(&self.num >> 1u32, self.exp)
        } else {
            Dyadic { num: self.num.clone(), exp: self.exp + 1 }
        }
    }
    fn from_i64(v: i64) -> Self {
        v.into()
    }
    fn to_f64(&self) -> f64 {
        self.to_f64_lossy()
    }
    fn sign(&self) -> Ordering {
        self.num.sign().cmp(&num_bigint::Sign::NoSign)
    }
}

/// Complex number over any [`Scalar`].
#[derive(Clone, Debug, PartialEq)]
pub struct Cx<S> {
    pub re: S,
    pub im: S,
}

impl<S: Scalar> Cx<S> {
    pub fn new(re: S, im: S) -> Self {
        Cx { re, im }
    }
    pub fn zero() -> Self {
        Cx { re: S::zero(), im: S::zero() }
    }
    pub fn real(re: S) -> Self {
        Cx { re, im: S::zero() }
    }
    pub fn i() -> Self {
        Cx { re: S::zero(), im: S::one() }
    }
    /// `a + b i` for small integers.
    pub fn from_ints(a: i64, b: i64) -> Self {
        Cx { re: S::from_i64(a), im: S::from_i64(b) }
    }
    pub fn half(&self) -> Self {
        Cx { re: self.re.half(), im: self.im.half() }
    }
    pub fn conj(&self) -> Self {
        Cx { re: self.re.clone(), im: -self.im.clone() }
    }
    pub fn mul_i(&self) -> Self {
        Cx { re: -self.im.clone(), im: self.re.clone() }
    }
    pub fn scale(&self, s: &S) -> Self {
        Cx { re: self.re.clone() * s.clone(), im: self.im.clone() * s.clone() }
    }
    pub fn norm_sqr(&self) -> S {
        self.re.clone() * self.re.clone() + self.im.clone() * self.im.clone()
    }
    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }
}

impl<S: Scalar> Zero for Cx<S> {
    fn zero() -> Self {
        Cx::zero()
    }
    fn is_zero(&self) -> bool {
        Cx::is_zero(self)
    }
}

impl<S: Scalar> Add for Cx<S> {
    type Output = Cx<S>;
    fn add(self, rhs: Cx<S>) -> Cx<S> {
        Cx { re: self.re + rhs.re, im: self.im + rhs.im }
    }
}

impl<S: Scalar> Sub for Cx<S> {
    type Output = Cx<S>;
    fn sub(self, rhs: Cx<S>) -> Cx<S> {
        Cx { re: self.re - rhs.re, im: self.im - rhs.im }
    }
}

impl<S: Scalar> Mul for Cx<S> {
    type Output = Cx<S>;
    fn mul(self, rhs: Cx<S>) -> Cx<S> {
        Cx {
            re: self.re.clone() * rhs.re.clone() - self.im.clone() * rhs.im.clone(),
            im: self.re * rhs.im + self.im * rhs.re,
        }
    }
}

impl<S: Scalar> Neg for Cx<S> {
    type Output = Cx<S>;
    fn neg(self) -> Cx<S> {
        Cx { re: -self.re, im: -self.im }
    }
}
