//! Kloosterman-type character sums.
//!
//! Two families appear in the series:
//!
//! - `C_{k,r,l,Q,m,s}(n)`, summing
//!   `exp(pi i r (s(h,k) - s(l h/Q, k/Q)) + 2 pi i (m h' + s Q h_Q - n h)/k)`,
//! - `A_{k,r,m}(n)`, summing `exp(pi i r s(h,k) + 2 pi i (m h' - n h)/k)`,
//!
//! both over a reduced residue system mod `k`, with `h h' ≡ -1 (mod k)` and
//! `(l/Q) h h_Q ≡ -1 (mod k/Q)`.
//!
//! Every phase is an exact rational with denominator dividing `12k` (since
//! `6k s(h,k)` is an integer), so a [`ResidueKernel`] stores the
//! Dedekind-sum part of each phase once per modulus and the per-`(m, s, n)`
//! sums only add integers before the single complex exponential.

use rug::{Float, Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::arith::{dedekind_sum, gcd, modulo, neg_inverse, totient, RationalAngle};
use crate::error::{Error, Result};
use crate::mpnum::{unit_exp, unit_exp_ratio, BigComplex, PrecisionContext};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CharSumFamily {
    /// The `b_l^(r)` family.
    C,
    /// The `p^(r)` family.
    A,
}

/// Parameters of one character sum. `l` and `q` are ignored for the `A` family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CharSumSpec {
    pub family: CharSumFamily,
    pub k: i64,
    pub r: i64,
    pub l: i64,
    pub q: i64,
    pub m: i64,
    pub s: i64,
    pub n: i64,
}

impl CharSumSpec {
    /// `C_{k,r,l,Q,m,s}(n)` with `Q = gcd(k, l)`.
    pub fn c_family(k: i64, r: i64, l: i64, m: i64, s: i64, n: i64) -> Result<Self> {
        let spec = CharSumSpec { family: CharSumFamily::C, k, r, l, q: gcd(k, l), m, s, n };
        spec.validate()?;
        Ok(spec)
    }

    /// `A_{k,r,m}(n)`.
    pub fn a_family(k: i64, r: i64, m: i64, n: i64) -> Result<Self> {
        let spec = CharSumSpec { family: CharSumFamily::A, k, r, l: 1, q: 1, m, s: 0, n };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::InvalidArgument(format!("k must be positive, got {}", self.k)));
        }
        if self.m < 0 || self.s < 0 {
            return Err(Error::InvalidArgument(format!(
                "m and s must be nonnegative, got m = {}, s = {}",
                self.m, self.s
            )));
        }
        if self.family == CharSumFamily::C {
            if self.l < 1 {
                return Err(Error::InvalidArgument(format!("l must be positive, got {}", self.l)));
            }
            if gcd(self.k, self.l) != self.q {
                return Err(Error::InvalidArgument(format!(
                    "Q = {} but gcd(k, l) = gcd({}, {}) = {}",
                    self.q,
                    self.k,
                    self.l,
                    gcd(self.k, self.l)
                )));
            }
        }
        Ok(())
    }
}

fn mul_mod(a: i64, b: i64, m: i64) -> i64 {
    (a as i128 * b as i128).rem_euclid(m as i128) as i64
}

/// `h_Q` in `[0, k/Q)` with `(l/Q) h h_Q ≡ -1 (mod k/Q)`.
pub fn h_q(h: i64, k: i64, l: i64, q: i64) -> Result<i64> {
    let kq = k / q;
    neg_inverse(mul_mod(l / q, h, kq), kq)
}

/// Exact phase of the `h`-th summand, reduced mod 1.
pub fn phase_of_term(spec: &CharSumSpec, h: i64) -> Result<RationalAngle> {
    spec.validate()?;
    let k = spec.k;
    if gcd(h, k) != 1 {
        return Err(Error::NotCoprime { h, k });
    }
    let h_prime = neg_inverse(h, k)?;
    let hq = match spec.family {
        CharSumFamily::C => h_q(h, k, spec.l, spec.q)?,
        CharSumFamily::A => 0,
    };
    phase_with_representatives(spec, h, h_prime, hq)
}

/// The phase formula with caller-chosen representatives of `h'` and `h_Q`.
/// Only the congruences are checked; the result must not depend on the choice.
pub fn phase_with_representatives(spec: &CharSumSpec, h: i64, h_prime: i64, hq: i64) -> Result<RationalAngle> {
    let k = spec.k;
    if mul_mod(h, h_prime, k) != modulo(-1, k) {
        return Err(Error::InvalidArgument(format!("{h_prime} is not -1/{h} mod {k}")));
    }
    let dedekind = match spec.family {
        CharSumFamily::C => {
            let kq = k / spec.q;
            let lq = spec.l / spec.q;
            if mul_mod(mul_mod(lq, h, kq), hq, kq) != modulo(-1, kq) {
                return Err(Error::InvalidArgument(format!("{hq} is not -1/({lq}*{h}) mod {kq}")));
            }
            dedekind_sum(modulo(h, k), k) - dedekind_sum(mul_mod(lq, h, kq), kq)
        }
        CharSumFamily::A => dedekind_sum(modulo(h, k), k),
    };
    let linear = Integer::from(spec.m) * h_prime + Integer::from(spec.s) * spec.q * hq - Integer::from(spec.n) * h;
    let theta = dedekind * Rational::from((spec.r, 2)) + Rational::from((linear, Integer::from(k)));
    Ok(RationalAngle::new(theta))
}

/// The sum itself, after checking that its imaginary part is rounding noise.
///
/// The real part is the value; the imaginary part is kept in the result as a
/// diagnostic. Fails with [`Error::ImaginaryResidue`] when
/// `|Im| > k 2^(8 - bits)`.
pub fn char_sum(spec: &CharSumSpec, ctx: &PrecisionContext) -> Result<BigComplex> {
    spec.validate()?;
    let kernel = match spec.family {
        CharSumFamily::C => ResidueKernel::c_family(spec.k, spec.l)?,
        CharSumFamily::A => ResidueKernel::a_family(spec.k)?,
    };
    kernel.sum(spec.r, spec.m, spec.s, spec.n, ctx)
}

/// Reference evaluation: one [`unit_exp`] per exact [`phase_of_term`].
pub fn char_sum_reference(spec: &CharSumSpec, ctx: &PrecisionContext) -> Result<BigComplex> {
    spec.validate()?;
    let mut acc = BigComplex::from_real(ctx.zero());
    for h in 0..spec.k {
        if gcd(h, spec.k) == 1 {
            acc = acc.try_add(&unit_exp(&phase_of_term(spec, h)?, ctx))?;
        }
    }
    Ok(acc)
}

#[derive(Clone, Debug)]
struct Residue {
    h: i64,
    h_prime: i64,
    h_q: i64,
    /// `6k` times the Dedekind-sum combination, mod `12k`.
    dedekind6: i64,
}

/// Everything about a modulus `k` that does not depend on `r, m, s, n`.
#[derive(Clone, Debug)]
pub struct ResidueKernel {
    family: CharSumFamily,
    k: i64,
    l: i64,
    q: i64,
    residues: Vec<Residue>,
}

impl ResidueKernel {
    pub fn c_family(k: i64, l: i64) -> Result<Self> {
        Self::build(CharSumFamily::C, k, l)
    }

    pub fn a_family(k: i64) -> Result<Self> {
        Self::build(CharSumFamily::A, k, 1)
    }

    fn build(family: CharSumFamily, k: i64, l: i64) -> Result<Self> {
        if k < 1 || l < 1 {
            return Err(Error::InvalidArgument(format!("need k, l >= 1, got k = {k}, l = {l}")));
        }
        let q = gcd(k, l);
        let kq = k / q;
        let lq = l / q;
        let twelve_k = 12 * k;
        let mut residues = Vec::with_capacity(totient(k) as usize);
        for h in 0..k {
            if gcd(h, k) != 1 {
                continue;
            }
            let h_prime = neg_inverse(h, k)?;
            let (h_q, sums) = match family {
                CharSumFamily::C => {
                    let hq = h_q(h, k, l, q)?;
                    (hq, dedekind_sum(h, k) - dedekind_sum(mul_mod(lq, h, kq), kq))
                }
                CharSumFamily::A => (0, dedekind_sum(h, k)),
            };
            let scaled = sums * Integer::from(6 * k);
            debug_assert!(*scaled.denom() == 1);
            let dedekind6 = Integer::from(scaled.numer().mod_u((twelve_k) as u32)).to_i64().expect("fits");
            residues.push(Residue { h, h_prime, h_q, dedekind6 });
        }
        Ok(ResidueKernel { family, k, l, q, residues })
    }

    pub fn family(&self) -> CharSumFamily {
        self.family
    }

    pub fn k(&self) -> i64 {
        self.k
    }

    pub fn q(&self) -> i64 {
        self.q
    }

    pub fn l(&self) -> i64 {
        self.l
    }

    /// Number of reduced residues, `phi(k)`.
    pub fn len(&self) -> usize {
        self.residues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residues.is_empty()
    }

    /// Phase numerators over `12k`, in increasing `h`.
    pub fn numerators(&self, r: i64, m: i64, s: i64, n: i64) -> impl Iterator<Item = u64> + '_ {
        let big = 12 * self.k as i128;
        let (r, m, s, n) = (r as i128, m as i128, s as i128, n as i128);
        let sq = s * self.q as i128;
        self.residues.iter().map(move |res| {
            let linear = m * res.h_prime as i128 + sq * res.h_q as i128 - n * res.h as i128;
            (r * res.dedekind6 as i128 + 12 * linear).rem_euclid(big) as u64
        })
    }

    pub fn phase(&self, index: usize, r: i64, m: i64, s: i64, n: i64) -> RationalAngle {
        let num = self.numerators(r, m, s, n).nth(index).expect("index in range");
        RationalAngle::from_ratio(num as i64, 12 * self.k)
    }

    /// Sums the unit numbers in increasing `h`; see [`char_sum`] for the check.
    pub fn sum(&self, r: i64, m: i64, s: i64, n: i64, ctx: &PrecisionContext) -> Result<BigComplex> {
        let bits = ctx.bits();
        let den = 12 * self.k as u64;
        let mut re = Float::new(bits);
        let mut im = Float::new(bits);
        for num in self.numerators(r, m, s, n) {
            let z = unit_exp_ratio(num, den, ctx);
            re += z.re.as_float();
            im += z.im.as_float();
        }
        let mut tolerance = Float::with_val(bits, self.k);
        tolerance >>= bits - 8;
        if Float::with_val(bits, im.abs_ref()) > tolerance {
            return Err(Error::ImaginaryResidue {
                k: self.k,
                imag: im.to_string_radix(10, Some(12)),
                tolerance: tolerance.to_string_radix(10, Some(6)),
            });
        }
        Ok(BigComplex { re: ctx.wrap(re), im: ctx.wrap(im) })
    }
}

/// `max |C_{k,r,l,Q,0,0}(n)| / (sqrt(n) k^(1/2 + 0.01))` over `2 <= k <= k_max`.
///
/// A diagnostic for the Weil-type bound; nothing is asserted about it.
pub fn weil_ratio(r: i64, l: i64, n: i64, k_max: i64, ctx: &PrecisionContext) -> Result<f64> {
    let mut worst = 0f64;
    for k in 2..=k_max {
        let kernel = ResidueKernel::c_family(k, l)?;
        let value = kernel.sum(r, 0, 0, n, ctx)?.re.to_f64().abs();
        let ratio = value / ((n.max(1) as f64).sqrt() * (k as f64).powf(0.51));
        worst = worst.max(ratio);
    }
    Ok(worst)
}
