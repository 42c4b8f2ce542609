//! Numerical checks of the modular transformations behind the series.
//!
//! Both sides are evaluated from truncated products `prod_{n<=N} (1 - w^n)`.
//! The neglected factor of such a product is bounded by
//! `|log prod_{n>N} (1 - w^n)| <= |w|^(N+1) / ((1 - |w|)(1 - |w|^(N+1)))`,
//! and a check refuses to run when the sum of these bounds (times `r`) is
//! above `ctx.eps()`.

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Float, Rational};

use crate::arith::{dedekind_sum, gcd, neg_inverse, RationalAngle};
use crate::charsums::h_q;
use crate::error::{Error, Result};
use crate::mpnum::{unit_exp, BigComplex, BigReal, PrecisionContext};

/// Extra bits carried through the products.
const WORK_GUARD_BITS: u32 = 32;

/// Both sides of a transformation and their distance.
#[derive(Clone, Debug)]
pub struct TransformCheck {
    pub lhs: BigComplex,
    pub rhs: BigComplex,
    /// `|lhs - rhs|`.
    pub residual: BigReal,
    /// `log2` of the relative truncation error bound that was asserted.
    pub tail_log2: f64,
}

/// `log2` of the bound on `|log prod_{n>N} (1 - w^n)|` for `|w| = exp(-2 pi decay)`.
fn product_tail_log2(decay: f64, n_terms: usize) -> f64 {
    let ln_w = -2.0 * std::f64::consts::PI * decay;
    let ln_top = ln_w * (n_terms as f64 + 1.0);
    let ln_bound = ln_top - (-ln_w.exp_m1()).ln() - (-ln_top.exp_m1()).ln();
    ln_bound * std::f64::consts::LOG2_E
}

/// `log2` of a sum of terms given by their `log2`.
fn log2_sum(terms: &[f64]) -> f64 {
    let top = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    top + terms.iter().map(|t| (t - top).exp2()).sum::<f64>().log2()
}

/// `exp(2 pi i angle) exp(-2 pi decay)`.
fn nome(angle: &RationalAngle, decay: &Rational, ctx: &PrecisionContext) -> Result<BigComplex> {
    let bits = ctx.bits();
    let mut radius = Float::with_val(bits, Constant::Pi) * Float::with_val(bits, decay);
    radius *= -2i32;
    unit_exp(angle, ctx).scale(&ctx.wrap(radius.exp()))
}

/// `prod_{n=1}^{N} (1 - w^n)`.
fn euler_product(w: &BigComplex, n_terms: usize, ctx: &PrecisionContext) -> Result<BigComplex> {
    let one = BigComplex::one(ctx);
    let mut power = w.clone();
    let mut product = one.clone();
    for _ in 0..n_terms {
        product = product.try_mul(&one.try_sub(&power)?)?;
        power = power.try_mul(w)?;
    }
    Ok(product)
}

fn real_exp(x: Float, ctx: &PrecisionContext) -> BigComplex {
    BigComplex::from_real(ctx.wrap(x.exp()))
}

fn check_inputs(h: i64, k: i64, z: &Rational, n_terms: usize) -> Result<()> {
    if *z <= 0 {
        return Err(Error::InvalidArgument(format!("z must be positive, got {z}")));
    }
    if k < 1 || n_terms == 0 {
        return Err(Error::InvalidArgument(format!("need k >= 1 and N >= 1, got k = {k}, N = {n_terms}")));
    }
    if gcd(h, k) != 1 {
        return Err(Error::NotCoprime { h, k });
    }
    Ok(())
}

fn assert_tail(tail_log2: f64, ctx: &PrecisionContext) -> Result<()> {
    let eps_log2 = ctx.bits() as f64 - 16.0;
    if tail_log2 > -eps_log2 {
        return Err(Error::TailTooLarge { bound: format!("2^{tail_log2:.1}"), eps: format!("2^{}", -eps_log2) });
    }
    Ok(())
}

fn finish(lhs: BigComplex, rhs: BigComplex, tail_log2: f64, ctx: &PrecisionContext) -> Result<TransformCheck> {
    let bits = ctx.bits();
    let narrow = |x: &BigReal| ctx.wrap(Float::with_val(bits, x.as_float()));
    let narrow_c = |z: &BigComplex| BigComplex { re: narrow(&z.re), im: narrow(&z.im) };
    let residual = narrow(&lhs.try_sub(&rhs)?.abs());
    Ok(TransformCheck { lhs: narrow_c(&lhs), rhs: narrow_c(&rhs), residual, tail_log2 })
}

/// Smallest product length whose tail bound passes at `ctx` for
/// [`check_transformation`] with these parameters (`l = None` for
/// [`check_f_transformation`]).
pub fn sufficient_terms(k: i64, z: &Rational, l: Option<i64>, r: u32, ctx: &PrecisionContext) -> Result<usize> {
    check_inputs(1, k, z, 1)?;
    let d_q = Rational::from(z / (k * k));
    let d_w1 = Rational::from(z.recip_ref());
    let mut decays = vec![d_q.to_f64(), d_w1.to_f64()];
    if let Some(l) = l {
        if l < 2 {
            return Err(Error::InvalidArgument(format!("need l >= 2, got {l}")));
        }
        let q = gcd(k, l);
        decays.push(Rational::from(&d_q * l).to_f64());
        decays.push((Rational::from((q * q, l)) / z).to_f64());
    }
    let bound = |n: usize| {
        let tails: Vec<f64> = decays.iter().map(|&d| product_tail_log2(d, n) + (r.max(1) as f64).log2()).collect();
        log2_sum(&tails)
    };
    let target = -(ctx.bits() as f64 - 16.0);
    let mut hi = 1usize;
    while bound(hi) > target {
        hi *= 2;
        if hi > 1 << 24 {
            return Err(Error::InvalidArgument(format!("decay too slow for k = {k}, z = {z}")));
        }
    }
    let mut lo = hi / 2;
    while lo + 1 < hi {
        let mid = (lo + hi) / 2;
        if bound(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Checks, for `q = exp(2 pi i (h/k + i z / k^2))` and `Q = gcd(k, l)`,
///
/// ```text
/// R(q) = (Q/l)^(r/2) exp(i pi r (s(h,k) - s(l h/Q, k/Q)) + (pi r / 12 z)(1 - Q^2/l) + (pi r z / 12 k^2)(l - 1))
///        F(exp(2 pi i (h'/k + i/z))) / F(exp(2 pi i Q (h_Q/k + i Q/(l z))))
/// ```
///
/// where `R(q) = prod (1 - q^(ln))^r / (1 - q^n)^r` and `F(q) = prod (1 - q^n)^(-r)`.
pub fn check_transformation(
    h: i64,
    k: i64,
    z: &Rational,
    l: i64,
    r: u32,
    n_terms: usize,
    ctx: &PrecisionContext,
) -> Result<TransformCheck> {
    check_inputs(h, k, z, n_terms)?;
    if l < 2 || r == 0 {
        return Err(Error::InvalidArgument(format!("need l >= 2 and r >= 1, got l = {l}, r = {r}")));
    }
    let q = gcd(k, l);
    let kq = k / q;
    let h_prime = neg_inverse(h, k)?;
    let hq = h_q(h, k, l, q)?;

    // decays: |nome| = exp(-2 pi decay)
    let d_q = Rational::from(z / (k * k));
    let d_ql = Rational::from(&d_q * l);
    let d_w1 = Rational::from(z.recip_ref());
    let d_w2 = Rational::from((q * q, l)) / z;
    let tails: Vec<f64> = [&d_q, &d_ql, &d_w1, &d_w2]
        .iter()
        .map(|d| product_tail_log2(d.to_f64(), n_terms) + (r as f64).log2())
        .collect();
    let tail_log2 = log2_sum(&tails);
    assert_tail(tail_log2, ctx)?;

    let work = ctx.raised_to(ctx.bits() + WORK_GUARD_BITS);
    let bits = work.bits();

    let nome_q = nome(&RationalAngle::from_ratio(h, k), &d_q, &work)?;
    let nome_ql = nome(&RationalAngle::from_ratio(h * l, k), &d_ql, &work)?;
    let lhs = euler_product(&nome_ql, n_terms, &work)?.try_div(&euler_product(&nome_q, n_terms, &work)?)?.powi(r);

    let w1 = nome(&RationalAngle::from_ratio(h_prime, k), &d_w1, &work)?;
    let w2 = nome(&RationalAngle::from_ratio(hq, kq), &d_w2, &work)?;
    // F(w1) / F(w2) = (P(w2) / P(w1))^r
    let quotient = euler_product(&w2, n_terms, &work)?.try_div(&euler_product(&w1, n_terms, &work)?)?.powi(r);

    let dedekind = dedekind_sum(h, k) - dedekind_sum(((l / q) * h).rem_euclid(kq), kq);
    let phase = unit_exp(&RationalAngle::new(dedekind * Rational::from((r, 2))), &work);

    let r_f = Float::with_val(bits, r);
    let pi = Float::with_val(bits, Constant::Pi);
    let z_f = Float::with_val(bits, z);
    let mut growth = Float::with_val(bits, Rational::from((l - q * q, l)));
    growth *= &pi * Float::with_val(bits, &r_f / 12u32);
    growth /= &z_f;
    let mut decay = Float::with_val(bits, &pi * &r_f) * &z_f;
    decay *= Float::with_val(bits, l - 1);
    decay /= Float::with_val(bits, 12 * k * k);
    let mut prefactor = Float::with_val(bits, Rational::from((q, l))).sqrt().pow(r);
    prefactor *= Float::with_val(bits, growth + decay).exp();

    let rhs = phase.try_mul(&quotient)?.scale(&work.wrap(prefactor))?;
    finish(lhs, rhs, tail_log2, ctx)
}

/// Checks `f(exp(2 pi i (h/k + i z/k^2))) = sqrt(z/k) exp(i pi s(h,k)) exp((pi/12k)(k/z - z/k)) f(exp(2 pi i (h'/k + i/z)))`
/// for `f(q) = prod (1 - q^n)^(-1)`.
pub fn check_f_transformation(
    h: i64,
    k: i64,
    z: &Rational,
    n_terms: usize,
    ctx: &PrecisionContext,
) -> Result<TransformCheck> {
    check_inputs(h, k, z, n_terms)?;
    let h_prime = neg_inverse(h, k)?;
    let d_q = Rational::from(z / (k * k));
    let d_w = Rational::from(z.recip_ref());
    let tail_log2 = log2_sum(&[product_tail_log2(d_q.to_f64(), n_terms), product_tail_log2(d_w.to_f64(), n_terms)]);
    assert_tail(tail_log2, ctx)?;

    let work = ctx.raised_to(ctx.bits() + WORK_GUARD_BITS);
    let bits = work.bits();
    let one = BigComplex::one(&work);
    let lhs = one.try_div(&euler_product(&nome(&RationalAngle::from_ratio(h, k), &d_q, &work)?, n_terms, &work)?)?;
    let f_w =
        one.try_div(&euler_product(&nome(&RationalAngle::from_ratio(h_prime, k), &d_w, &work)?, n_terms, &work)?)?;

    let phase = unit_exp(&RationalAngle::new(dedekind_sum(h, k) / Rational::from(2)), &work);
    let z_over_k = Rational::from(z / k);
    let mut exponent = Float::with_val(bits, Rational::from(z_over_k.recip_ref())) - Float::with_val(bits, &z_over_k);
    exponent *= Float::with_val(bits, Constant::Pi);
    exponent /= 12 * k;
    let scale = Float::with_val(bits, &z_over_k).sqrt() * exponent.exp();
    let rhs = phase.try_mul(&f_w)?.try_mul(&real_exp(Float::with_val(bits, 0), &work))?.scale(&work.wrap(scale))?;
    finish(lhs, rhs, tail_log2, ctx)
}
