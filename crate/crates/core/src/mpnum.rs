//! Arbitrary-precision reals bound to an explicit precision context.
//!
//! Floating values live in MPFR (`rug::Float`). Every [`BigReal`] remembers the
//! precision of the [`PrecisionContext`] that produced it, and binary
//! operations between values of different contexts are rejected.
//! There is no global precision state.

use std::cmp::Ordering;
use std::fmt;

use rug::float::{Constant, Round};
use rug::ops::Pow;
use rug::{Float, Integer, Rational};

use crate::arith::RationalAngle;
use crate::error::{Error, Result};

/// Guard bits subtracted from the working precision when deriving `eps`.
pub const EPS_GUARD_BITS: u32 = 16;
/// Extra bits carried inside the Bessel series.
pub const BESSEL_GUARD_BITS: u32 = 32;
/// Extra bits carried inside `unit_exp` before rounding back.
const EXP_GUARD_BITS: u32 = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrecisionContext {
    bits: u32,
}

impl PrecisionContext {
    pub const MIN_BITS: u32 = 64;

    pub fn new(bits: u32) -> Result<Self> {
        if bits < Self::MIN_BITS {
            return Err(Error::InvalidArgument(format!(
                "precision must be at least {} bits, got {bits}",
                Self::MIN_BITS
            )));
        }
        Ok(PrecisionContext { bits })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Same context with more bits (never fewer).
    pub fn raised_to(&self, bits: u32) -> Self {
        PrecisionContext { bits: self.bits.max(bits) }
    }

    /// `2^(-bits + 16)`.
    pub fn eps(&self) -> BigReal {
        let mut f = Float::with_val(self.bits, 1);
        f >>= self.bits - EPS_GUARD_BITS;
        BigReal { bits: self.bits, value: f }
    }

    pub fn zero(&self) -> BigReal {
        BigReal { bits: self.bits, value: Float::new(self.bits) }
    }

    pub fn one(&self) -> BigReal {
        self.from_int(1)
    }

    pub fn from_int(&self, v: i64) -> BigReal {
        BigReal { bits: self.bits, value: Float::with_val(self.bits, v) }
    }

    pub fn from_integer(&self, v: &Integer) -> BigReal {
        BigReal { bits: self.bits, value: Float::with_val(self.bits, v) }
    }

    pub fn from_rational(&self, v: &Rational) -> BigReal {
        BigReal { bits: self.bits, value: Float::with_val(self.bits, v) }
    }

    pub fn from_f64(&self, v: f64) -> BigReal {
        BigReal { bits: self.bits, value: Float::with_val(self.bits, v) }
    }

    pub fn pi(&self) -> BigReal {
        BigReal { bits: self.bits, value: Float::with_val(self.bits, Constant::Pi) }
    }

    /// Wraps a float computed elsewhere, rounding it to this context.
    pub fn wrap(&self, value: Float) -> BigReal {
        let value = if value.prec() == self.bits { value } else { Float::with_val(self.bits, value) };
        BigReal { bits: self.bits, value }
    }
}

impl Default for PrecisionContext {
    fn default() -> Self {
        PrecisionContext { bits: 128 }
    }
}

/// A real number at the precision of one [`PrecisionContext`].
#[derive(Clone, Debug, PartialEq, PartialOrd)]
pub struct BigReal {
    bits: u32,
    value: Float,
}

impl BigReal {
    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn context(&self) -> PrecisionContext {
        PrecisionContext { bits: self.bits }
    }

    pub fn as_float(&self) -> &Float {
        &self.value
    }

    pub fn into_float(self) -> Float {
        self.value
    }

    pub fn to_f64(&self) -> f64 {
        self.value.to_f64()
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
    }

    pub fn sign(&self) -> Ordering {
        self.value.cmp0().unwrap_or(Ordering::Equal)
    }

    fn check(&self, other: &BigReal) -> Result<()> {
        if self.bits != other.bits {
            return Err(Error::ContextMismatch { left: self.bits, right: other.bits });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &BigReal) -> Result<BigReal> {
        self.check(other)?;
        Ok(self.with(Float::with_val(self.bits, &self.value + &other.value)))
    }

    pub fn try_sub(&self, other: &BigReal) -> Result<BigReal> {
        self.check(other)?;
        Ok(self.with(Float::with_val(self.bits, &self.value - &other.value)))
    }

    pub fn try_mul(&self, other: &BigReal) -> Result<BigReal> {
        self.check(other)?;
        Ok(self.with(Float::with_val(self.bits, &self.value * &other.value)))
    }

    pub fn try_div(&self, other: &BigReal) -> Result<BigReal> {
        self.check(other)?;
        Ok(self.with(Float::with_val(self.bits, &self.value / &other.value)))
    }

    fn with(&self, value: Float) -> BigReal {
        BigReal { bits: self.bits, value }
    }

    pub fn abs(&self) -> BigReal {
        self.with(Float::with_val(self.bits, self.value.abs_ref()))
    }

    pub fn neg(&self) -> BigReal {
        self.with(Float::with_val(self.bits, -&self.value))
    }

    pub fn sqrt(&self) -> BigReal {
        self.with(Float::with_val(self.bits, self.value.sqrt_ref()))
    }

    pub fn exp(&self) -> BigReal {
        self.with(Float::with_val(self.bits, self.value.exp_ref()))
    }

    pub fn ln(&self) -> BigReal {
        self.with(Float::with_val(self.bits, self.value.ln_ref()))
    }

    pub fn mul_rational(&self, q: &Rational) -> BigReal {
        self.with(Float::with_val(self.bits, &self.value * q))
    }

    pub fn mul_int(&self, v: i64) -> BigReal {
        self.with(Float::with_val(self.bits, &self.value * v))
    }

    pub fn powf(&self, exponent: &BigReal) -> Result<BigReal> {
        self.check(exponent)?;
        Ok(self.with(Float::with_val(self.bits, (&self.value).pow(&exponent.value))))
    }

    /// Nearest integer, ties away from zero.
    pub fn round_to_integer(&self) -> Integer {
        let rounded = Float::with_val(self.bits, self.value.round_ref());
        rounded.to_integer().expect("finite value")
    }

    /// Size of one unit in the last place of this value at its precision.
    pub fn ulp(&self) -> BigReal {
        let exp = self.value.get_exp().unwrap_or(0);
        let mut f = Float::with_val(self.bits, 1);
        f <<= exp - self.bits as i32;
        self.with(f)
    }

    /// Positional decimal rendering with `frac_digits` digits after the point.
    pub fn to_fixed(&self, frac_digits: usize) -> String {
        fixed_decimal(&self.value, frac_digits)
    }

    /// Decimal rendering carrying every significant digit of the precision.
    pub fn to_decimal_string(&self) -> String {
        let digits = (self.bits as f64 * std::f64::consts::LOG10_2).ceil() as i64 + 1;
        let int_digits = match self.value.get_exp() {
            Some(e) if e > 0 => (e as f64 * std::f64::consts::LOG10_2).ceil() as i64,
            _ => 0,
        };
        self.to_fixed((digits - int_digits).max(1) as usize)
    }
}

impl fmt::Display for BigReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match f.precision() {
            Some(p) => f.write_str(&self.to_fixed(p)),
            None => f.write_str(&self.to_decimal_string()),
        }
    }
}

/// Rounds `x * 10^frac_digits` to an integer and places the decimal point.
pub fn fixed_decimal(x: &Float, frac_digits: usize) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let scale = Integer::from(Integer::u_pow_u(10, frac_digits as u32));
    let exact = x.to_rational().expect("finite");
    let scaled = exact * &scale;
    let rounded = scaled.round().into_numer_denom().0;
    let negative = rounded < 0;
    let digits = Integer::from(rounded.abs_ref()).to_string();
    let digits = if digits.len() <= frac_digits {
        format!("{}{}", "0".repeat(frac_digits + 1 - digits.len()), digits)
    } else {
        digits
    };
    let (int_part, frac_part) = digits.split_at(digits.len() - frac_digits);
    let sign = if negative { "-" } else { "" };
    if frac_digits == 0 {
        format!("{sign}{int_part}")
    } else {
        format!("{sign}{int_part}.{frac_part}")
    }
}

/// A complex number at the precision of one context.
#[derive(Clone, Debug, PartialEq)]
pub struct BigComplex {
    pub re: BigReal,
    pub im: BigReal,
}

impl BigComplex {
    pub fn new(re: BigReal, im: BigReal) -> Result<Self> {
        re.check(&im)?;
        Ok(BigComplex { re, im })
    }

    pub fn from_real(re: BigReal) -> Self {
        let im = re.context().zero();
        BigComplex { re, im }
    }

    pub fn one(ctx: &PrecisionContext) -> Self {
        BigComplex { re: ctx.one(), im: ctx.zero() }
    }

    pub fn bits(&self) -> u32 {
        self.re.bits
    }

    pub fn try_add(&self, other: &BigComplex) -> Result<BigComplex> {
        Ok(BigComplex { re: self.re.try_add(&other.re)?, im: self.im.try_add(&other.im)? })
    }

    pub fn try_sub(&self, other: &BigComplex) -> Result<BigComplex> {
        Ok(BigComplex { re: self.re.try_sub(&other.re)?, im: self.im.try_sub(&other.im)? })
    }

    pub fn try_mul(&self, other: &BigComplex) -> Result<BigComplex> {
        self.re.check(&other.re)?;
        let p = self.bits();
        let (a, b, c, d) = (&self.re.value, &self.im.value, &other.re.value, &other.im.value);
        let re = Float::with_val(p, a * c) - Float::with_val(p, b * d);
        let im = Float::with_val(p, a * d) + Float::with_val(p, b * c);
        Ok(BigComplex { re: self.re.with(re), im: self.re.with(im) })
    }

    pub fn try_div(&self, other: &BigComplex) -> Result<BigComplex> {
        self.re.check(&other.re)?;
        let p = self.bits();
        let (a, b, c, d) = (&self.re.value, &self.im.value, &other.re.value, &other.im.value);
        let den = Float::with_val(p, c * c) + Float::with_val(p, d * d);
        let re = (Float::with_val(p, a * c) + Float::with_val(p, b * d)) / &den;
        let im = (Float::with_val(p, b * c) - Float::with_val(p, a * d)) / &den;
        Ok(BigComplex { re: self.re.with(re), im: self.re.with(im) })
    }

    pub fn scale(&self, factor: &BigReal) -> Result<BigComplex> {
        Ok(BigComplex { re: self.re.try_mul(factor)?, im: self.im.try_mul(factor)? })
    }

    pub fn conj(&self) -> BigComplex {
        BigComplex { re: self.re.clone(), im: self.im.neg() }
    }

    pub fn powi(&self, mut e: u32) -> BigComplex {
        let mut result = BigComplex::one(&self.re.context());
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                result = result.try_mul(&base).expect("same context");
            }
            e >>= 1;
            if e > 0 {
                base = base.try_mul(&base).expect("same context");
            }
        }
        result
    }

    pub fn abs(&self) -> BigReal {
        let p = self.bits();
        let v = Float::with_val(p, self.re.value.hypot_ref(&self.im.value));
        self.re.with(v)
    }
}

impl fmt::Display for BigComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.re, self.im)
    }
}

/// `exp(2 pi i theta)` for an exact angle.
///
/// The angle is folded into `[0, 1/8]` before any rounding: first by quadrant
/// (a power of `i`), then by the reflection `u -> 1/4 - u` which swaps cosine
/// and sine. Multiples of `1/4` are returned exactly, and `theta` and `1 - theta`
/// give exact conjugates.
pub fn unit_exp(theta: &RationalAngle, ctx: &PrecisionContext) -> BigComplex {
    let t = theta.theta();
    if let (Some(num), Some(den)) = (t.numer().to_u64(), t.denom().to_u64()) {
        if den <= u64::MAX / 8 {
            return unit_exp_ratio(num, den, ctx);
        }
    }
    let four_t = Rational::from(t * 4u32);
    let quadrant = Integer::from(four_t.floor_ref()).to_u32().expect("angle in [0, 1)");
    let u = (four_t - quadrant) / 4u32;
    let (psi, swapped) = if u > (1, 8) { (Rational::from((1, 4)) - u, true) } else { (u, false) };
    let bits = ctx.bits() + EXP_GUARD_BITS;
    let turns = Float::with_val(bits, &psi);
    unfold(quadrant, swapped, if psi == 0 { None } else { Some(turns) }, ctx)
}

/// `exp(2 pi i num/den)` for `0 <= num < den`; same folding as [`unit_exp`].
pub fn unit_exp_ratio(num: u64, den: u64, ctx: &PrecisionContext) -> BigComplex {
    assert!(num < den && den <= u64::MAX / 8, "angle {num}/{den} outside [0, 1)");
    let (num, den) = (num as u128, den as u128);
    let quadrant = (4 * num / den) as u32;
    // u = rem / (4 den) in [0, 1/4)
    let rem = 4 * num - quadrant as u128 * den;
    let swapped = 2 * rem > den;
    let psi_num = if swapped { den - rem } else { rem };
    let turns = if psi_num == 0 {
        None
    } else {
        let bits = ctx.bits() + EXP_GUARD_BITS;
        Some(Float::with_val(bits, psi_num as u64) / Float::with_val(bits, 4 * den as u64))
    };
    unfold(quadrant, swapped, turns, ctx)
}

/// Evaluates `exp(2 pi i psi)` for `psi` in `[0, 1/8]` and maps it back to the
/// original quadrant.
fn unfold(quadrant: u32, swapped: bool, psi_turns: Option<Float>, ctx: &PrecisionContext) -> BigComplex {
    let bits = ctx.bits();
    let (c, s) = match psi_turns {
        None => (Float::with_val(bits, 1), Float::with_val(bits, 0)),
        Some(turns) => {
            let work = turns.prec();
            let mut arg = Float::with_val(work, Constant::Pi);
            arg *= &turns;
            arg *= 2u32;
            let mut cos = Float::new(work);
            arg.sin_cos_mut(&mut cos);
            (Float::with_val_round(bits, &cos, Round::Nearest).0, Float::with_val_round(bits, &arg, Round::Nearest).0)
        }
    };
    let (c, s) = if swapped { (s, c) } else { (c, s) };
    let (re, im) = match quadrant {
        0 => (c, s),
        1 => (-s, c),
        2 => (-c, -s),
        _ => (s, -c),
    };
    BigComplex { re: ctx.wrap(re), im: ctx.wrap(im) }
}

/// Order of a modified Bessel function: an integer or half-integer `nu >= 0`,
/// stored as `2 nu`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BesselOrder {
    twice: u32,
}

impl BesselOrder {
    pub fn integer(nu: u32) -> Self {
        BesselOrder { twice: 2 * nu }
    }

    /// `nu = twice / 2`.
    pub fn from_twice(twice: u32) -> Self {
        BesselOrder { twice }
    }

    /// Accepts any nonnegative rational with denominator 1 or 2.
    pub fn from_rational(nu: &Rational) -> Result<Self> {
        let twice = Rational::from(nu * 2u32);
        if *nu < 0 || *twice.denom() != 1 {
            return Err(Error::InvalidArgument(format!("Bessel order {nu} is not a nonnegative half-integer")));
        }
        let twice = twice.numer().to_u32().ok_or_else(|| Error::InvalidArgument(format!("order {nu} too large")))?;
        Ok(BesselOrder { twice })
    }

    pub fn twice(&self) -> u32 {
        self.twice
    }

    pub fn as_rational(&self) -> Rational {
        Rational::from((self.twice, 2))
    }
}

/// `Gamma(twice / 2)` for a positive integer `twice`, from `Gamma(1/2) = sqrt(pi)`,
/// `Gamma(1) = 1` and the recurrence `Gamma(x + 1) = x Gamma(x)`.
pub fn gamma_half_integer(twice: u32, prec: u32) -> Float {
    assert!(twice > 0, "Gamma has a pole at 0");
    let (mut value, mut arg_twice) = if twice.is_multiple_of(2) {
        (Float::with_val(prec, 1), 2u32)
    } else {
        (Float::with_val(prec, Constant::Pi).sqrt(), 1u32)
    };
    while arg_twice < twice {
        // Gamma(a + 1) = a Gamma(a) with a = arg_twice / 2
        value *= arg_twice;
        value /= 2u32;
        arg_twice += 2;
    }
    value
}

/// Modified Bessel function of the first kind `I_nu(x)` for `x >= 0`.
///
/// Sums `sum_j (x/2)^(nu + 2j) / (j! Gamma(nu + j + 1))` at `ctx.bits + 32`
/// bits. All terms are positive, and summation stops once the terms are
/// decreasing geometrically and the next one is below `eps` times the
/// partial sum.
pub fn bessel_i(order: BesselOrder, x: &BigReal, ctx: &PrecisionContext) -> Result<BigReal> {
    if x.bits() != ctx.bits() {
        return Err(Error::ContextMismatch { left: x.bits(), right: ctx.bits() });
    }
    if x.sign() == Ordering::Less {
        return Err(Error::InvalidArgument("bessel_i needs x >= 0".into()));
    }
    if x.is_zero() {
        return Ok(if order.twice == 0 { ctx.one() } else { ctx.zero() });
    }
    let work = ctx.bits() + BESSEL_GUARD_BITS;
    let half = Float::with_val(work, x.as_float() / 2u32);
    let quarter_sq = Float::with_val(work, half.square_ref());

    // (x/2)^nu / Gamma(nu + 1)
    let mut term = Float::with_val(work, (&half).pow(order.twice / 2));
    if order.twice % 2 == 1 {
        term *= Float::with_val(work, half.sqrt_ref());
    }
    term /= gamma_half_integer(order.twice + 2, work);

    let mut eps = Float::with_val(work, 1);
    eps >>= work;
    let mut sum = Float::new(work);
    let mut j: u64 = 0;
    loop {
        sum += &term;
        // ratio of consecutive terms: (x/2)^2 / ((j + 1)(nu + j + 1))
        let denom = Integer::from(j + 1) * Integer::from(order.twice as u64 + 2 * j + 2);
        let mut ratio = Float::with_val(work, &quarter_sq * 2u32);
        ratio /= Float::with_val(work, &denom);
        term *= &ratio;
        j += 1;
        if ratio < 0.5 && term <= Float::with_val(work, &eps * &sum) {
            break;
        }
    }
    Ok(ctx.wrap(sum))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(bits: u32) -> PrecisionContext {
        PrecisionContext::new(bits).unwrap()
    }

    fn ulps(a: &Float, b: &Float, bits: u32) -> f64 {
        let diff = Float::with_val(bits * 2, a - b).abs();
        let scale = a.clone().abs().max(&b.clone().abs());
        let exp = scale.get_exp().unwrap_or(0);
        let mut ulp = Float::with_val(bits * 2, 1);
        ulp <<= exp - bits as i32;
        (diff / ulp).to_f64()
    }

    #[test]
    fn context_rules() {
        assert!(PrecisionContext::new(63).is_err());
        let a = ctx(64).one();
        let b = ctx(128).one();
        assert!(matches!(a.try_add(&b), Err(Error::ContextMismatch { left: 64, right: 128 })));
        assert_eq!(a.try_add(&a).unwrap().to_f64(), 2.0);
        let eps = ctx(128).eps();
        assert_eq!(eps.as_float().get_exp(), Some(-111));
    }

    #[test]
    fn unit_exp_exact_points() {
        let c = ctx(128);
        let one = unit_exp(&RationalAngle::zero(), &c);
        assert_eq!(one.re.to_f64(), 1.0);
        assert!(one.im.is_zero());
        let i = unit_exp(&RationalAngle::from_ratio(1, 4), &c);
        assert!(i.re.is_zero());
        assert_eq!(i.im.to_f64(), 1.0);
        let m1 = unit_exp(&RationalAngle::from_ratio(1, 2), &c);
        assert_eq!(m1.re.to_f64(), -1.0);
        assert!(m1.im.is_zero());
        let mi = unit_exp(&RationalAngle::from_ratio(3, 4), &c);
        assert!(mi.re.is_zero());
        assert_eq!(mi.im.to_f64(), -1.0);
    }

    #[test]
    fn unit_exp_third_turn() {
        let bits = 200;
        let c = ctx(bits);
        let z = unit_exp(&RationalAngle::from_ratio(1, 3), &c);
        let half = Float::with_val(bits, -0.5);
        let root3 = Float::with_val(bits, 3).sqrt() / 2u32;
        assert!(ulps(z.re.as_float(), &half, bits) <= 4.0);
        assert!(ulps(z.im.as_float(), &root3, bits) <= 4.0);
    }

    #[test]
    fn unit_exp_matches_direct_evaluation() {
        let bits = 160;
        let c = ctx(bits);
        for den in 1..60i64 {
            for num in 0..den {
                let theta = RationalAngle::from_ratio(num, den);
                let z = unit_exp(&theta, &c);
                let mut arg = Float::with_val(bits + 64, Constant::Pi) * 2u32;
                arg *= Float::with_val(bits + 64, theta.theta());
                let mut cos = Float::new(bits + 64);
                arg.sin_cos_mut(&mut cos);
                // absolute error against a 64-bit-better reference
                let err_re = Float::with_val(bits + 64, z.re.as_float() - &cos).abs().to_f64();
                let err_im = Float::with_val(bits + 64, z.im.as_float() - &arg).abs().to_f64();
                let tol = 4.0 * 2f64.powi(-(bits as i32));
                assert!(err_re <= tol && err_im <= tol, "{num}/{den}: {err_re:e} {err_im:e}");
            }
        }
    }

    #[test]
    fn ratio_path_matches_rational_path() {
        let c = ctx(128);
        for den in 1..40u64 {
            for num in 0..den {
                let a = unit_exp_ratio(num, den, &c);
                let b = unit_exp(&RationalAngle::from_ratio(num as i64, den as i64), &c);
                assert_eq!(a, b);
                // non-reduced fractions describe the same angle
                assert_eq!(unit_exp_ratio(3 * num, 3 * den, &c), a);
            }
        }
        // force the big-rational route with a huge denominator
        let big = Rational::from((Integer::from(1) << 70u32, Integer::from(3) << 70u32));
        let z = unit_exp(&RationalAngle::new(big), &c);
        assert_eq!(z, unit_exp_ratio(1, 3, &c));
    }

    #[test]
    fn unit_exp_conjugate_symmetry_is_exact() {
        let c = ctx(96);
        for den in 2..50i64 {
            for num in 1..den {
                let a = unit_exp(&RationalAngle::from_ratio(num, den), &c);
                let b = unit_exp(&RationalAngle::from_ratio(den - num, den), &c);
                assert_eq!(a.re, b.re);
                assert_eq!(a.im, b.im.neg());
            }
        }
    }

    #[test]
    fn gamma_half_values() {
        let p = 128;
        assert_eq!(gamma_half_integer(2, p), 1);
        assert_eq!(gamma_half_integer(8, p), 6);
        let sqrt_pi = Float::with_val(p, Constant::Pi).sqrt();
        assert_eq!(gamma_half_integer(1, p), sqrt_pi);
        // Gamma(5/2) = 3 sqrt(pi) / 4
        let expected = Float::with_val(p, &sqrt_pi * 3u32) / 4u32;
        assert!(ulps(&gamma_half_integer(5, p), &expected, p) <= 2.0);
    }

    fn closed_half(x: &Float, bits: u32) -> Float {
        // sqrt(2/(pi x)) sinh x
        let pi = Float::with_val(bits, Constant::Pi);
        let pref = (Float::with_val(bits, 2) / (pi * x)).sqrt();
        pref * Float::with_val(bits, x.sinh_ref())
    }

    fn closed_three_halves(x: &Float, bits: u32) -> Float {
        // sqrt(2/(pi x)) (cosh x - sinh x / x)
        let pi = Float::with_val(bits, Constant::Pi);
        let pref = (Float::with_val(bits, 2) / (pi * x)).sqrt();
        let inner = Float::with_val(bits, x.cosh_ref()) - Float::with_val(bits, x.sinh_ref()) / x;
        pref * inner
    }

    #[test]
    fn bessel_examples() {
        let c = ctx(128);
        assert!(bessel_i(BesselOrder::integer(1), &c.zero(), &c).unwrap().is_zero());
        assert_eq!(bessel_i(BesselOrder::integer(0), &c.zero(), &c).unwrap().to_f64(), 1.0);
        let v = bessel_i(BesselOrder::from_twice(1), &c.one(), &c).unwrap();
        assert!((v.to_f64() - 0.937_674_888_245_488_f64).abs() < 1e-14);
        assert!(bessel_i(BesselOrder::integer(1), &c.from_int(-1), &c).is_err());
        assert!(bessel_i(BesselOrder::integer(1), &ctx(96).one(), &c).is_err());
    }

    #[test]
    fn bessel_half_integer_closed_forms() {
        let bits = 192;
        let hi = bits + 64;
        let c = ctx(bits);
        for x in [Rational::from((1, 2)), 1.into(), 2.into(), 5.into(), 10.into()] {
            let xr = c.from_rational(&x);
            let xf = Float::with_val(hi, &x);
            let half = bessel_i(BesselOrder::from_twice(1), &xr, &c).unwrap();
            let three = bessel_i(BesselOrder::from_twice(3), &xr, &c).unwrap();
            assert!(ulps(half.as_float(), &closed_half(&xf, hi), bits) <= 16.0, "x={x}");
            assert!(ulps(three.as_float(), &closed_three_halves(&xf, hi), bits) <= 16.0, "x={x}");
        }
    }

    #[test]
    fn bessel_recurrence() {
        let bits = 160;
        let c = ctx(bits);
        for twice_nu in [2u32, 3, 4] {
            for x in [1i64, 4, 16] {
                let xr = c.from_int(x);
                let lo = bessel_i(BesselOrder::from_twice(twice_nu - 2), &xr, &c).unwrap();
                let mid = bessel_i(BesselOrder::from_twice(twice_nu), &xr, &c).unwrap();
                let hi = bessel_i(BesselOrder::from_twice(twice_nu + 2), &xr, &c).unwrap();
                let lhs = Float::with_val(bits, lo.as_float() - hi.as_float());
                let rhs = Float::with_val(bits, mid.as_float() * twice_nu) / x;
                assert!(ulps(&lhs, &rhs, bits) <= 64.0, "nu={twice_nu}/2 x={x}");
            }
        }
    }

    #[test]
    fn bessel_monotone_in_x() {
        let c = ctx(128);
        for twice in [0u32, 1, 2, 3, 5] {
            let mut prev = bessel_i(BesselOrder::from_twice(twice), &c.zero(), &c).unwrap();
            for i in 1..60 {
                let x = c.from_rational(&Rational::from((i, 3)));
                let v = bessel_i(BesselOrder::from_twice(twice), &x, &c).unwrap();
                assert!(v > prev);
                prev = v;
            }
        }
    }

    #[test]
    fn bessel_large_argument_matches_mpfr() {
        // I_1(x) sqrt(2 pi x) e^{-x} = 1 - 3/(8x) - 15/(128 x^2) + O(x^-3)
        let c = ctx(256);
        let x = c.from_int(200);
        let v = bessel_i(BesselOrder::integer(1), &x, &c).unwrap();
        let pi = c.pi();
        let scale = Float::with_val(256, pi.as_float() * 400u32).sqrt();
        let ratio = Float::with_val(256, v.as_float() * &scale) / Float::with_val(256, x.as_float().exp_ref());
        let expected = 1.0 - 3.0 / 1600.0 - 15.0 / (2.0 * 1600.0 * 1600.0);
        assert!((ratio.to_f64() - expected).abs() < 1e-7);
    }

    #[test]
    fn precision_doubling_reproduces_digits() {
        let lo = ctx(128);
        let hi = ctx(256);
        for (twice, x) in [(2u32, Rational::from(7)), (3, Rational::from((31, 4))), (2, Rational::from(150))] {
            let a = bessel_i(BesselOrder::from_twice(twice), &lo.from_rational(&x), &lo).unwrap();
            let b = bessel_i(BesselOrder::from_twice(twice), &hi.from_rational(&x), &hi).unwrap();
            let b_rounded = Float::with_val(128, b.as_float());
            assert!(ulps(a.as_float(), &b_rounded, 128) <= 1.0, "nu={twice}/2 x={x}");
        }
    }

    #[test]
    fn fixed_rendering() {
        let c = ctx(128);
        assert_eq!(c.from_rational(&Rational::from((-1, 8))).to_fixed(3), "-0.125");
        assert_eq!(c.from_int(420621700).to_fixed(2), "420621700.00");
        assert_eq!(c.from_rational(&Rational::from((2, 3))).to_fixed(4), "0.6667");
        assert_eq!(c.from_int(5).to_fixed(0), "5");
    }

    #[test]
    fn complex_ops() {
        let c = ctx(128);
        let a = BigComplex::new(c.from_int(1), c.from_int(2)).unwrap();
        let b = BigComplex::new(c.from_int(3), c.from_int(-1)).unwrap();
        let p = a.try_mul(&b).unwrap();
        assert_eq!((p.re.to_f64(), p.im.to_f64()), (5.0, 5.0));
        let q = p.try_div(&b).unwrap();
        assert_eq!((q.re.to_f64(), q.im.to_f64()), (1.0, 2.0));
        let sq = a.powi(3);
        assert_eq!((sq.re.to_f64(), sq.im.to_f64()), (-11.0, -2.0));
        assert_eq!(BigComplex::new(c.from_int(3), c.from_int(4)).unwrap().abs().to_f64(), 5.0);
    }
}
