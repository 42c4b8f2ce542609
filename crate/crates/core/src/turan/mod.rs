//! Jensen polynomials of partition-type sequences.
//!
//! `J^{d,n}(X) = sum_{i=0}^{d} C(d,i) t(n+i) X^i` is built from exact
//! coefficients, and its hyperbolicity is decided with Sturm sequences
//! (see [`poly`]). Scans report every failing shift in a finite range and
//! never extrapolate past it.
//!
//! The Hermite profile rescales `J^{d,n}` as
//! `delta(n)^(-d) / t(n) * J^{d,n}((delta(n) X - 1) / exp(A(n)))`, which tends
//! to the Hermite polynomial `H_d` with generating function `exp(-t^2 + X t)`.

pub mod poly;

pub use poly::{count_real_roots, is_hyperbolic, sturm_sequence, IntPoly};

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Float, Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mpnum::{BigReal, PrecisionContext};
use crate::qoracle::{coefficients, CoefficientTable, SeriesSpec};

/// `J^{d,n}` with coefficients `C(d,i) t(n+i)`, constant term first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JensenPoly {
    pub d: usize,
    pub n: usize,
    pub coeffs: Vec<Integer>,
}

impl JensenPoly {
    pub fn poly(&self) -> IntPoly {
        IntPoly::new(self.coeffs.clone())
    }

    pub fn is_hyperbolic(&self) -> Result<bool> {
        is_hyperbolic(&self.poly())
    }
}

pub fn jensen_poly(table: &CoefficientTable, d: usize, n: usize) -> Result<JensenPoly> {
    let coeffs = (0..=d)
        .map(|i| Ok(Integer::from(Integer::binomial_u(d as u32, i as u32)) * table.get(n + i)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(JensenPoly { d, n, coeffs })
}

/// Which polynomial a scan position `n` stands for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShiftConvention {
    /// `J^{d,n}`.
    Direct,
    /// `J^{d,n-1}`; position 0 has no polynomial and is skipped.
    Previous,
}

impl ShiftConvention {
    fn shift(self, n: u64) -> Option<u64> {
        match self {
            ShiftConvention::Direct => Some(n),
            ShiftConvention::Previous => n.checked_sub(1),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TuranScan {
    pub d: usize,
    pub from: u64,
    pub to: u64,
    pub convention: ShiftConvention,
    /// Positions in `from..=to` whose polynomial is not hyperbolic, increasing.
    pub failures: Vec<u64>,
}

impl TuranScan {
    /// First position after the last failure, or `from` when nothing failed.
    /// Only a statement about the scanned range.
    pub fn threshold(&self) -> u64 {
        self.failures.last().map_or(self.from, |n| n + 1)
    }
}

/// Scans an existing table, which must cover `to + d`.
pub fn turan_scan_table(
    table: &CoefficientTable,
    d: usize,
    from: u64,
    to: u64,
    convention: ShiftConvention,
) -> Result<TuranScan> {
    if from > to {
        return Err(Error::InvalidArgument(format!("empty range {from}..={to}")));
    }
    let mut failures = Vec::new();
    for n in from..=to {
        let Some(shift) = convention.shift(n) else { continue };
        if !jensen_poly(table, d, shift as usize)?.is_hyperbolic()? {
            failures.push(n);
        }
    }
    Ok(TuranScan { d, from, to, convention, failures })
}

/// Scans the coefficients of `spec` for `n` in `from..=to`.
pub fn turan_scan(spec: SeriesSpec, d: usize, from: u64, to: u64, convention: ShiftConvention) -> Result<TuranScan> {
    let table = coefficients(spec, to as usize + d)?;
    turan_scan_table(&table, d, from, to, convention)
}

/// `A(n)`, `delta(n)` and `g_i(n)` for `3 <= i <= d`.
#[derive(Clone, Debug)]
pub struct GorzProfile {
    pub a: BigReal,
    pub delta: BigReal,
    /// `g[0]` is `g_3`.
    pub g: Vec<BigReal>,
}

/// `r (1 - 1/l) / 24`.
fn growth_constant(r: u32, l: u32) -> Rational {
    Rational::from((r as i64 * (l as i64 - 1), 24 * l as i64))
}

/// `binom(1/2, i)` exactly.
fn half_binomial(i: u32) -> Rational {
    let mut value = Rational::from(1);
    for j in 0..i {
        value *= Rational::from((1 - 2 * j as i64, 2 * (j as i64 + 1)));
    }
    value
}

pub fn gorz_profile(r: u32, l: u32, d: usize, n: u64, ctx: &PrecisionContext) -> Result<GorzProfile> {
    if r == 0 || l < 2 || n == 0 {
        return Err(Error::InvalidArgument(format!("need r >= 1, l >= 2, n >= 1; got r = {r}, l = {l}, n = {n}")));
    }
    let bits = ctx.bits();
    let c = growth_constant(r, l);
    let pi = Float::with_val(bits, Constant::Pi);
    let nf = Float::with_val(bits, n);

    // A = 2 pi sqrt(c / n) - 3 / (4n)
    let mut a = Float::with_val(bits, Rational::from(&c / n)).sqrt() * &pi * 2u32;
    a -= Float::with_val(bits, Rational::from((3, 4 * n as i64)));

    // delta^2 = (pi/2) sqrt(c / n^3) - 3 / (8 n^2)
    let n3 = Integer::from(n).pow(3_u32);
    let mut delta_sq = Float::with_val(bits, Rational::from(&c / n3)).sqrt() * &pi / 2u32;
    delta_sq -= Float::with_val(bits, Rational::from((3, 8 * Integer::from(n).pow(2_u32))));
    if delta_sq <= 0 {
        return Err(Error::InvalidArgument(format!("delta(n)^2 = {} is not positive at n = {n}", delta_sq.to_f64())));
    }
    let delta = delta_sq.sqrt();

    // g_i = 4 pi sqrt(c) binom(1/2, i) n^(1/2 - i) + (3/4) (-1)^i / (i n^i)
    let sqrt_c = Float::with_val(bits, &c).sqrt();
    let g = (3..=d as u32)
        .map(|i| {
            let mut main = Float::with_val(bits, &sqrt_c * &pi) * 4u32;
            main *= Float::with_val(bits, &half_binomial(i));
            main *= Float::with_val(bits, nf.sqrt_ref());
            main /= Float::with_val(bits, Integer::from(n).pow(i));
            let sign = if i % 2 == 0 { 3 } else { -3 };
            let correction = Rational::from((sign, 4 * i as i64)) / Integer::from(n).pow(i);
            ctx.wrap(main + Float::with_val(bits, &correction))
        })
        .collect();
    Ok(GorzProfile { a: ctx.wrap(a), delta: ctx.wrap(delta), g })
}

/// Coefficients of `H_d`, constant term first, for `exp(-t^2 + X t) = sum H_d(X) t^d / d!`.
pub fn hermite_coefficients(d: usize) -> Vec<Integer> {
    // H_d = d! sum_m (-1)^m X^(d-2m) / (m! (d-2m)!)
    let mut coeffs = vec![Integer::new(); d + 1];
    let d_fact = Integer::from(Integer::factorial(d as u32));
    for m in 0..=d / 2 {
        let denom = Integer::from(Integer::factorial(m as u32)) * Integer::from(Integer::factorial((d - 2 * m) as u32));
        let value = Integer::from(d_fact.div_exact_ref(&denom));
        coeffs[d - 2 * m] = if m % 2 == 0 { value } else { -value };
    }
    coeffs
}

/// Coefficients of `delta^(-d) / t(n) * J^{d,n}((delta X - 1) / exp(A))`, constant term first.
pub fn rescaled_jensen(
    table: &CoefficientTable,
    profile: &GorzProfile,
    d: usize,
    n: usize,
    ctx: &PrecisionContext,
) -> Result<Vec<BigReal>> {
    let jensen = jensen_poly(table, d, n)?;
    let bits = ctx.bits();
    let t_n = Float::with_val(bits, table.get(n)?);
    let exp_neg_a = Float::with_val(bits, -profile.a.as_float()).exp();
    let delta = profile.delta.as_float();
    // powers e^(-iA)
    let mut decay = Vec::with_capacity(d + 1);
    let mut power = Float::with_val(bits, 1);
    for _ in 0..=d {
        decay.push(power.clone());
        power *= &exp_neg_a;
    }
    let mut out = Vec::with_capacity(d + 1);
    for j in 0..=d {
        // sum_{i >= j} C(d,i) t(n+i) e^(-iA) C(i,j) (-1)^(i-j)
        let mut sum = Float::new(bits);
        for (i, (coeff, decay)) in jensen.coeffs.iter().zip(&decay).enumerate().skip(j) {
            let mut term = Float::with_val(bits, coeff) * decay;
            term *= Integer::from(Integer::binomial_u(i as u32, j as u32));
            if (i - j) % 2 == 1 {
                sum -= term;
            } else {
                sum += term;
            }
        }
        sum /= &t_n;
        // delta^(j - d)
        sum /= Float::with_val(bits, delta.clone().pow((d - j) as u32));
        out.push(ctx.wrap(sum));
    }
    Ok(out)
}

/// `max_j |rescaled_j - H_j|` for `b_l^(r)` at shift `n`.
///
/// The cancellation in the rescaling costs about `d log2(1/delta)` bits, so
/// the work precision is raised by that much over `ctx`.
pub fn hermite_distance(r: u32, l: u32, d: usize, n: u64, ctx: &PrecisionContext) -> Result<BigReal> {
    let table = coefficients(SeriesSpec::b_l_r(r, l), n as usize + d)?;
    hermite_distance_table(&table, r, l, d, n, ctx)
}

pub fn hermite_distance_table(
    table: &CoefficientTable,
    r: u32,
    l: u32,
    d: usize,
    n: u64,
    ctx: &PrecisionContext,
) -> Result<BigReal> {
    let rough = gorz_profile(r, l, d, n, &PrecisionContext::new(64)?)?;
    let loss = (d as f64 * -rough.delta.to_f64().log2()).ceil().max(0.0) as u32;
    let work = ctx.raised_to(ctx.bits() + loss + 32);
    let profile = gorz_profile(r, l, d, n, &work)?;
    let rescaled = rescaled_jensen(table, &profile, d, n as usize, &work)?;
    let target = hermite_coefficients(d);
    let mut worst = Float::new(work.bits());
    for (got, want) in rescaled.iter().zip(&target) {
        let diff = Float::with_val(work.bits(), got.as_float() - want).abs();
        if diff > worst {
            worst = diff;
        }
    }
    Ok(ctx.wrap(Float::with_val(ctx.bits(), &worst)))
}
