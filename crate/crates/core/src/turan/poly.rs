//! Dense univariate polynomials over the integers, with exact real-root counting.

use std::cmp::Ordering;
use std::fmt;

use rug::{Integer, Rational};

use crate::error::{Error, Result};

/// Coefficients from the constant term up; no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct IntPoly {
    coeffs: Vec<Integer>,
}

impl IntPoly {
    pub fn new(mut coeffs: Vec<Integer>) -> Self {
        while coeffs.last().is_some_and(|c| *c == 0) {
            coeffs.pop();
        }
        IntPoly { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Integer::from(c)).collect())
    }

    /// `prod (X - root)` over integer roots.
    pub fn from_roots(roots: &[i64]) -> Self {
        roots.iter().fold(IntPoly::from_i64(&[1]), |p, &r| p.mul(&IntPoly::from_i64(&[-r, 1])))
    }

    pub fn coeffs(&self) -> &[Integer] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&Integer> {
        self.coeffs.last()
    }

    pub fn derivative(&self) -> IntPoly {
        IntPoly::new(self.coeffs.iter().enumerate().skip(1).map(|(i, c)| Integer::from(c * i as u64)).collect())
    }

    pub fn neg(&self) -> IntPoly {
        IntPoly { coeffs: self.coeffs.iter().map(|c| Integer::from(-c)).collect() }
    }

    pub fn mul(&self, other: &IntPoly) -> IntPoly {
        if self.is_zero() || other.is_zero() {
            return IntPoly::default();
        }
        let mut out = vec![Integer::new(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += Integer::from(a * b);
            }
        }
        IntPoly::new(out)
    }

    /// Positive gcd of the coefficients (0 for the zero polynomial).
    pub fn content(&self) -> Integer {
        self.coeffs.iter().fold(Integer::new(), |g, c| g.gcd(c))
    }

    /// Divides out the positive content; signs are kept.
    pub fn primitive_part(&self) -> IntPoly {
        let g = self.content();
        if g <= 1 {
            return self.clone();
        }
        IntPoly { coeffs: self.coeffs.iter().map(|c| Integer::from(c.div_exact_ref(&g))).collect() }
    }

    /// Pseudo-division: returns `(q, r)` with `lc(d)^(deg a - deg d + 1) a = q d + r`.
    pub fn pseudo_div(&self, divisor: &IntPoly) -> (IntPoly, IntPoly) {
        let dd = divisor.degree().expect("division by the zero polynomial");
        let Some(da) = self.degree() else {
            return (IntPoly::default(), IntPoly::default());
        };
        if da < dd {
            return (IntPoly::default(), self.clone());
        }
        let lc = divisor.leading().unwrap().clone();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![Integer::new(); da - dd + 1];
        for shift in (0..=da - dd).rev() {
            // every step multiplies everything so far by lc
            for q in quot.iter_mut() {
                *q *= &lc;
            }
            let top = rem[shift + dd].clone();
            for c in rem.iter_mut() {
                *c *= &lc;
            }
            quot[shift] += &top;
            for (j, d) in divisor.coeffs.iter().enumerate() {
                rem[shift + j] -= Integer::from(&top * d);
            }
        }
        (IntPoly::new(quot), IntPoly::new(rem))
    }

    /// Greatest common divisor, primitive with positive leading coefficient.
    pub fn gcd(&self, other: &IntPoly) -> IntPoly {
        let (mut a, mut b) = (self.primitive_part(), other.primitive_part());
        if a.degree() < b.degree() {
            std::mem::swap(&mut a, &mut b);
        }
        while !b.is_zero() {
            let (_, r) = a.pseudo_div(&b);
            a = b;
            b = r.primitive_part();
        }
        match a.leading().map(|c| c.cmp0()) {
            Some(Ordering::Less) => a.neg(),
            _ => a,
        }
    }

    /// `p / gcd(p, p')`, primitive: the product of the distinct irreducible factors.
    pub fn square_free_part(&self) -> IntPoly {
        if self.degree().unwrap_or(0) == 0 {
            return self.primitive_part();
        }
        let g = self.gcd(&self.derivative());
        if g.degree() == Some(0) {
            return self.primitive_part();
        }
        let (q, r) = self.pseudo_div(&g);
        debug_assert!(r.is_zero());
        q.primitive_part()
    }

    /// Sign at `x`.
    pub fn sign_at(&self, x: &Rational) -> Ordering {
        // Horner with the numerators of x^i scaled by den^(deg)
        let mut acc = Integer::new();
        let (num, den) = (x.numer(), x.denom());
        let mut den_power = Integer::from(1);
        for c in self.coeffs.iter().rev() {
            acc *= num;
            acc += Integer::from(c * &den_power);
            den_power *= den;
        }
        acc.cmp0()
    }

    pub fn sign_at_pos_inf(&self) -> Ordering {
        self.leading().map_or(Ordering::Equal, |c| c.cmp0())
    }

    pub fn sign_at_neg_inf(&self) -> Ordering {
        let s = self.sign_at_pos_inf();
        if self.degree().unwrap_or(0) % 2 == 1 {
            s.reverse()
        } else {
            s
        }
    }

    /// `p(a X + b)` scaled by a positive integer so the coefficients are integral.
    pub fn affine(&self, a: &Rational, b: &Rational) -> IntPoly {
        let mut out: Vec<Rational> = Vec::new();
        // Horner: out = out * (aX + b) + c
        for c in self.coeffs.iter().rev() {
            let mut next = vec![Rational::new(); out.len() + 1];
            for (i, v) in out.iter().enumerate() {
                next[i] += Rational::from(v * b);
                next[i + 1] += Rational::from(v * a);
            }
            next[0] += c;
            out = next;
        }
        let lcm = out.iter().fold(Integer::from(1), |l, v| l.lcm(v.denom()));
        IntPoly::new(out.into_iter().map(|v| (v * &lcm).into_numer_denom().0).collect())
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if *c == 0 {
                continue;
            }
            if !first {
                f.write_str(if *c < 0 { " - " } else { " + " })?;
            } else if *c < 0 {
                f.write_str("-")?;
            }
            first = false;
            let abs = Integer::from(c.abs_ref());
            match i {
                0 => write!(f, "{abs}")?,
                _ if abs == 1 => {}
                _ => write!(f, "{abs}*")?,
            }
            match i {
                0 => {}
                1 => f.write_str("X")?,
                _ => write!(f, "X^{i}")?,
            }
        }
        Ok(())
    }
}

/// Sturm sequence `p, p', -rem(p, p'), ...`, each member made primitive.
///
/// Pseudo-remainders are multiplied by the sign of the pseudo-division factor
/// so that every member has the sign of the true remainder.
pub fn sturm_sequence(p: &IntPoly) -> Vec<IntPoly> {
    let mut seq = vec![p.primitive_part()];
    let d = p.derivative().primitive_part();
    if d.is_zero() {
        return seq;
    }
    seq.push(d);
    loop {
        let n = seq.len();
        let (a, b) = (&seq[n - 2], &seq[n - 1]);
        let (_, r) = a.pseudo_div(b);
        if r.is_zero() {
            break;
        }
        let power = a.degree().unwrap() - b.degree().unwrap() + 1;
        let factor_negative = *b.leading().unwrap() < 0 && power % 2 == 1;
        let next = if factor_negative { r } else { r.neg() };
        seq.push(next.primitive_part());
    }
    seq
}

fn sign_changes(signs: impl Iterator<Item = Ordering>) -> usize {
    let mut changes = 0;
    let mut last = Ordering::Equal;
    for s in signs.filter(|s| *s != Ordering::Equal) {
        if last != Ordering::Equal && s != last {
            changes += 1;
        }
        last = s;
    }
    changes
}

/// Number of distinct real roots.
pub fn count_real_roots(p: &IntPoly) -> Result<usize> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let seq = sturm_sequence(p);
    let at_neg = sign_changes(seq.iter().map(IntPoly::sign_at_neg_inf));
    let at_pos = sign_changes(seq.iter().map(IntPoly::sign_at_pos_inf));
    Ok(at_neg - at_pos)
}

/// Distinct real roots in the half-open interval `(a, b]`.
pub fn count_real_roots_in(p: &IntPoly, a: &Rational, b: &Rational) -> Result<usize> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let seq = sturm_sequence(p);
    let at_a = sign_changes(seq.iter().map(|s| s.sign_at(a)));
    let at_b = sign_changes(seq.iter().map(|s| s.sign_at(b)));
    Ok(at_a.saturating_sub(at_b))
}

/// All complex roots are real.
///
/// Decided on the square-free part: every root of `p` is real exactly when
/// the number of distinct real roots equals the degree of that part.
pub fn is_hyperbolic(p: &IntPoly) -> Result<bool> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let sqf = p.square_free_part();
    let degree = sqf.degree().unwrap();
    if degree == 0 {
        return Ok(true);
    }
    Ok(count_real_roots(&sqf)? == degree)
}
