//! Exact integer and rational number theory used by every series in the crate.
//!
//! Everything here is exact: Dedekind sums are returned as reduced rationals,
//! and phases are carried as [`RationalAngle`]s so that no rounding happens
//! before the single complex exponential taken per residue.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use rug::{Integer, Rational};

use crate::error::{Error, Result};

/// Above this modulus [`dedekind_sum`] switches from the direct O(k) sum to
/// the reciprocity recursion.
pub const DEDEKIND_DIRECT_CUTOFF: i64 = 64;

/// An exact angle `theta` in `[0, 1)`, standing for `exp(2*pi*i*theta)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RationalAngle(Rational);

impl RationalAngle {
    pub fn zero() -> Self {
        RationalAngle(Rational::new())
    }

    /// Reduces `theta` modulo 1.
    pub fn new(theta: Rational) -> Self {
        let floor = Integer::from(theta.floor_ref());
        RationalAngle(theta - floor)
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Self::new(Rational::from((num, den)))
    }

    pub fn theta(&self) -> &Rational {
        &self.0
    }

    pub fn into_rational(self) -> Rational {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.cmp0() == std::cmp::Ordering::Equal
    }

    /// Multiplies the angle by an integer, i.e. raises the unit number to a power.
    pub fn scale(&self, factor: i64) -> Self {
        Self::new(Rational::from(&self.0 * Integer::from(factor)))
    }
}

impl Default for RationalAngle {
    fn default() -> Self {
        Self::zero()
    }
}

impl fmt::Display for RationalAngle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Add for RationalAngle {
    type Output = RationalAngle;
    fn add(self, rhs: Self) -> Self {
        RationalAngle::new(self.0 + rhs.0)
    }
}

impl<'a> Add<&'a RationalAngle> for &'a RationalAngle {
    type Output = RationalAngle;
    fn add(self, rhs: &'a RationalAngle) -> RationalAngle {
        RationalAngle::new(Rational::from(&self.0 + &rhs.0))
    }
}

impl Sub for RationalAngle {
    type Output = RationalAngle;
    fn sub(self, rhs: Self) -> Self {
        RationalAngle::new(self.0 - rhs.0)
    }
}

impl Neg for RationalAngle {
    type Output = RationalAngle;
    fn neg(self) -> Self {
        RationalAngle::new(-self.0)
    }
}

impl Neg for &RationalAngle {
    type Output = RationalAngle;
    fn neg(self) -> RationalAngle {
        RationalAngle::new(Rational::from(-&self.0))
    }
}

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a as i64
}

/// Least nonnegative residue of `a` modulo `m` (`m >= 1`).
pub fn modulo(a: i64, m: i64) -> i64 {
    a.rem_euclid(m)
}

/// Returns `(g, x)` with `g = gcd(a, m)` and `a*x ≡ g (mod m)`.
fn ext_gcd(a: i64, m: i64) -> (i64, i64) {
    let (mut old_r, mut r) = (a as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    (old_r as i64, old_s as i64)
}

/// Inverse of `a` modulo `m`, as the least nonnegative representative.
/// For `m == 1` this is 0.
pub fn mod_inverse(a: i64, m: i64) -> Result<i64> {
    if m < 1 {
        return Err(Error::InvalidArgument(format!("modulus must be positive, got {m}")));
    }
    if m == 1 {
        return Ok(0);
    }
    let a = modulo(a, m);
    let (g, x) = ext_gcd(a, m);
    if g != 1 {
        return Err(Error::NotCoprime { h: a, k: m });
    }
    Ok(modulo(x, m))
}

/// `h'` in `[0, k)` with `h*h' ≡ -1 (mod k)`.
pub fn neg_inverse(h: i64, k: i64) -> Result<i64> {
    if k < 1 {
        return Err(Error::InvalidArgument(format!("modulus must be positive, got {k}")));
    }
    if k == 1 {
        return Ok(0);
    }
    if gcd(h, k) != 1 {
        return Err(Error::NotCoprime { h, k });
    }
    Ok(modulo(-mod_inverse(h, k)?, k))
}

/// Euler's totient by trial division.
pub fn totient(k: i64) -> i64 {
    assert!(k >= 1);
    let mut n = k;
    let mut phi = k;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            phi -= phi / p;
        }
        p += 1;
    }
    if n > 1 {
        phi -= phi / n;
    }
    phi
}

/// Dedekind sum `s(h, k)`.
///
/// Uses the defining sum for `k <= DEDEKIND_DIRECT_CUTOFF` and the
/// reciprocity recursion above it.
pub fn dedekind_sum(h: i64, k: i64) -> Rational {
    assert!(k >= 1, "dedekind_sum needs k >= 1");
    if k <= DEDEKIND_DIRECT_CUTOFF {
        dedekind_sum_direct(h, k)
    } else {
        dedekind_sum_reciprocity(h, k)
    }
}

/// The defining O(k) sum `sum_{r=1}^{k-1} (r/k)((hr/k) - floor(hr/k) - 1/2)`.
///
/// Accumulated as the integer `sum r*(2*(hr mod k) - k)` over the common
/// denominator `2k^2`.
pub fn dedekind_sum_direct(h: i64, k: i64) -> Rational {
    assert!(k >= 1);
    let h = modulo(h, k) as i128;
    let k128 = k as i128;
    let mut acc = Integer::new();
    for r in 1..k128 {
        let term = r * (2 * ((h * r) % k128) - k128);
        acc += term;
    }
    Rational::from((acc, Integer::from(2) * Integer::from(k) * Integer::from(k)))
}

/// Euclidean-style evaluation via `s(h,k) + s(k,h) = -1/4 + (h^2 + k^2 + 1)/(12hk)`.
pub fn dedekind_sum_reciprocity(h: i64, k: i64) -> Rational {
    assert!(k >= 1);
    let (mut a, mut b) = (modulo(h, k), k);
    let mut total = Rational::new();
    let mut positive = true;
    // s(a, b) = -s(b mod a, a) - 1/4 + (a^2 + b^2 + 1)/(12ab)
    while a != 0 {
        let (a2, b2) = (a as i128, b as i128);
        let num = Integer::from(a2 * a2 + b2 * b2 + 1) * 4 - Integer::from(12 * a2 * b2);
        let step = Rational::from((num, Integer::from(48 * a2 * b2)));
        if positive {
            total += step;
        } else {
            total -= step;
        }
        positive = !positive;
        (a, b) = (b % a, a);
    }
    total
}

/// Checks `s(h, k) = s(h1, k)` for `h*h1 ≡ 1 (mod k)`.
pub fn dedekind_sum_symmetry_check(h: i64, k: i64) -> Result<bool> {
    if k < 1 {
        return Err(Error::InvalidArgument(format!("modulus must be positive, got {k}")));
    }
    if gcd(h, k) != 1 {
        return Err(Error::NotCoprime { h, k });
    }
    let h1 = mod_inverse(h, k)?;
    Ok(dedekind_sum(h, k) == dedekind_sum(h1, k))
}

/// Jacobi symbol `(a / n)` for odd positive `n`.
pub fn jacobi(a: i64, n: i64) -> Result<i32> {
    if n < 1 || n % 2 == 0 {
        return Err(Error::InvalidArgument(format!("Jacobi symbol needs an odd positive modulus, got {n}")));
    }
    let mut a = modulo(a, n);
    let mut n = n;
    let mut sign = 1;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            if n % 8 == 3 || n % 8 == 5 {
                sign = -sign;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            sign = -sign;
        }
        a %= n;
    }
    Ok(if n == 1 { sign } else { 0 })
}

/// Angle of `omega(h, k) = exp(pi*i*s(h, k))` assembled from the parity
/// closed forms (Jacobi symbol, a power of `i`, and `exp(2 pi i p (h - h')/(g k))`).
///
/// `h'` is the least nonnegative solution of `h h' ≡ -1 (mod gk)` and `p` the
/// least nonnegative solution of `(24/g) p ≡ 1 (mod gk)`.
pub fn omega_closed(h: i64, k: i64) -> Result<RationalAngle> {
    if k < 1 {
        return Err(Error::InvalidArgument(format!("modulus must be positive, got {k}")));
    }
    if gcd(h, k) != 1 {
        return Err(Error::NotCoprime { h, k });
    }
    let h = modulo(h, k);
    let odd = k % 2 == 1;
    let g = if odd { gcd(3, k) } else { 8 * gcd(3, k) };
    let gk = g * k;
    let h_prime = neg_inverse(h, gk)?;
    let p = mod_inverse(24 / g, gk)?;

    // i^x contributes x/4 turns; for even k the exponent b(k+1)/2 is a half-integer.
    let (symbol, i_power) = if odd {
        (jacobi(h, k)?, Rational::from((k - 1, 2)))
    } else {
        let b = modulo(h_prime, 8);
        (jacobi(k, h)?, Rational::from((b * (k + 1), 2)))
    };
    let mut theta = i_power / 4;
    if symbol == -1 {
        theta += Rational::from((1, 2));
    }
    debug_assert!(symbol != 0);
    theta += Rational::from((Integer::from(p) * Integer::from(h - h_prime), Integer::from(gk)));
    Ok(RationalAngle::new(theta))
}

/// All `Q | l` with `Q^2 < l`, ascending.
pub fn divisors_with_small_square(l: i64) -> Vec<i64> {
    assert!(l >= 2, "l must be at least 2");
    (1..).take_while(|q| q * q < l).filter(|q| l % q == 0).collect()
}
