//! Convergent series for `b_l^(r)(n)`, `p^(r)(n)` and their specializations.
//!
//! The `b_l^(r)` series is summed in the form
//!
//! ```text
//! sum_{Q | l, Q^2 < l} (Q/l)^(r/2) sum_{gcd(k,l)=Q} sum'_{m,s}
//!     (2 pi / k) sqrt(delta / nu) p^(r)(m) a^(r)(s) C_{k,r,l,Q,m,s}(n) I_1((4 pi / k) sqrt(delta nu))
//! ```
//!
//! with `delta = (r/24)(1 - Q^2/l) - (m + Q^2 s / l)` and
//! `nu = n + r(l-1)/24`; the primed sum keeps the pairs with `delta > 0`.
//! `p^(r)` uses `I_{1+r/2}` and the `A_{k,r,m}` sums.
//!
//! Terms are accumulated in increasing `k`. The result is rounded and
//! [`Certificate`] records how far the float was from that integer, together
//! with a heuristic tail estimate.

mod transform;

pub use transform::{check_f_transformation, check_transformation, sufficient_terms, TransformCheck};

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Float, Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::arith::{divisors_with_small_square, gcd};
use crate::charsums::{CharSumFamily, ResidueKernel};
use crate::error::{Error, Result};
use crate::mpnum::{bessel_i, BesselOrder, BigReal, PrecisionContext};
use crate::qoracle::{coefficients, SeriesKind, SeriesSpec};

/// Bits added above the size of the largest term.
pub const GUARD_BITS: u32 = 64;
/// Number of trailing terms used to fit the tail constant.
pub const FIT_WINDOW: usize = 10;
/// Residue kernels for moduli above this are rebuilt instead of cached.
const KERNEL_CACHE_MAX_K: i64 = 4096;

/// Which series to sum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormulaKind {
    /// `b_l^(r)`, r-colored l-regular partitions.
    Blr,
    /// `p^(r)`, r-colored partitions.
    Pr,
    /// `p_d^(r)`, r-colored distinct parts (`b_2^(r)`).
    Pd,
    /// Sum of minimal excludants over partitions (`b_2^(2)`).
    Mex,
    /// Sum of minimal excludants over overpartitions (`b_2^(3)`).
    Mexbar,
    /// `b_l`, l-regular partitions (`b_l^(1)`).
    Bl,
    /// `p`, ordinary partitions (`p^(1)`).
    P,
}

impl FormulaKind {
    pub const ALL: [FormulaKind; 7] = [
        FormulaKind::Blr,
        FormulaKind::Pr,
        FormulaKind::Pd,
        FormulaKind::Mex,
        FormulaKind::Mexbar,
        FormulaKind::Bl,
        FormulaKind::P,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FormulaKind::Blr => "blr",
            FormulaKind::Pr => "pr",
            FormulaKind::Pd => "pd",
            FormulaKind::Mex => "mex",
            FormulaKind::Mexbar => "mexbar",
            FormulaKind::Bl => "bl",
            FormulaKind::P => "p",
        }
    }

    /// Fills the parameters the kind fixes and rejects contradicting ones.
    pub fn params(self, r: Option<u32>, l: Option<u32>, n: u64) -> Result<FormulaParams> {
        let (r, l) = self.resolve(r, l)?;
        let params = FormulaParams { r, l, n };
        params.validate()?;
        Ok(params)
    }

    /// `(r, l)` with fixed values filled in; `n` is not looked at.
    pub fn resolve(self, r: Option<u32>, l: Option<u32>) -> Result<(u32, Option<u32>)> {
        fn fixed(name: &str, given: Option<u32>, value: u32, kind: FormulaKind) -> Result<u32> {
            match given {
                Some(v) if v != value => {
                    Err(Error::InvalidArgument(format!("{} fixes {name} = {value}, got {v}", kind.name())))
                }
                _ => Ok(value),
            }
        }
        fn required(name: &str, given: Option<u32>, kind: FormulaKind) -> Result<u32> {
            given.ok_or_else(|| Error::InvalidArgument(format!("{} needs {name}", kind.name())))
        }
        fn absent(given: Option<u32>, kind: FormulaKind) -> Result<()> {
            match given {
                Some(l) => Err(Error::InvalidArgument(format!("{} takes no l, got {l}", kind.name()))),
                None => Ok(()),
            }
        }
        let (r, l) = match self {
            FormulaKind::Blr => (required("r", r, self)?, Some(required("l", l, self)?)),
            FormulaKind::Pr => {
                absent(l, self)?;
                (required("r", r, self)?, None)
            }
            FormulaKind::Pd => (required("r", r, self)?, Some(fixed("l", l, 2, self)?)),
            FormulaKind::Mex => (fixed("r", r, 2, self)?, Some(fixed("l", l, 2, self)?)),
            FormulaKind::Mexbar => (fixed("r", r, 3, self)?, Some(fixed("l", l, 2, self)?)),
            FormulaKind::Bl => (fixed("r", r, 1, self)?, Some(required("l", l, self)?)),
            FormulaKind::P => {
                absent(l, self)?;
                (fixed("r", r, 1, self)?, None)
            }
        };
        if r == 0 {
            return Err(Error::InvalidArgument("r must be positive".into()));
        }
        if let Some(l) = l.filter(|&l| l < 2) {
            return Err(Error::InvalidArgument(format!("l must be at least 2, got {l}")));
        }
        Ok((r, l))
    }

    /// The oracle series for `(r, l)`, without an `n`.
    pub fn series_spec(self, r: Option<u32>, l: Option<u32>) -> Result<SeriesSpec> {
        let (r, l) = self.resolve(r, l)?;
        self.oracle_spec(&FormulaParams { r, l, n: 0 })
    }

    /// The q-series whose coefficients the formula reproduces.
    pub fn oracle_spec(self, params: &FormulaParams) -> Result<SeriesSpec> {
        match self {
            FormulaKind::Blr | FormulaKind::Bl => SeriesSpec::new(SeriesKind::BLR, Some(params.r), params.l),
            FormulaKind::Pr | FormulaKind::P => SeriesSpec::new(SeriesKind::PR, Some(params.r), None),
            FormulaKind::Pd => SeriesSpec::new(SeriesKind::PDR, Some(params.r), None),
            FormulaKind::Mex => SeriesSpec::new(SeriesKind::SigmaMex, None, None),
            FormulaKind::Mexbar => SeriesSpec::new(SeriesKind::SigmaMexBar, None, None),
        }
    }

    /// Summed with the `p^(r)` series rather than the `b_l^(r)` one.
    pub fn uses_p_formula(self) -> bool {
        matches!(self, FormulaKind::Pr | FormulaKind::P)
    }
}

impl fmt::Display for FormulaKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FormulaKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let kind = match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "blr" | "b_l_r" => FormulaKind::Blr,
            "pr" | "p_r" => FormulaKind::Pr,
            "pd" | "pd_r" => FormulaKind::Pd,
            "mex" | "sigma_mex" => FormulaKind::Mex,
            "mexbar" | "sigma_mex_bar" => FormulaKind::Mexbar,
            "bl" | "b_l" => FormulaKind::Bl,
            "p" => FormulaKind::P,
            other => return Err(Error::InvalidArgument(format!("unknown formula kind {other:?}"))),
        };
        Ok(kind)
    }
}

/// `r`, `l` and `n`; `l` is `None` for the `p^(r)` formula.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FormulaParams {
    pub r: u32,
    pub l: Option<u32>,
    pub n: u64,
}

impl FormulaParams {
    pub fn b_l_r(r: u32, l: u32, n: u64) -> Self {
        FormulaParams { r, l: Some(l), n }
    }

    pub fn p_r(r: u32, n: u64) -> Self {
        FormulaParams { r, l: None, n }
    }

    pub fn validate(&self) -> Result<()> {
        if self.r == 0 {
            return Err(Error::InvalidArgument("r must be positive".into()));
        }
        match self.l {
            Some(l) if l < 2 => Err(Error::InvalidArgument(format!("l must be at least 2, got {l}"))),
            // the p^(r) formula needs n > r/24
            None if 24 * self.n <= self.r as u64 => Err(Error::InvalidArgument(format!(
                "the p^(r) series needs n > r/24, got r = {}, n = {}",
                self.r, self.n
            ))),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum KMax {
    Fixed(u64),
    Auto,
}

impl FromStr for KMax {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(KMax::Auto);
        }
        s.parse::<u64>()
            .map(KMax::Fixed)
            .map_err(|_| Error::InvalidArgument(format!("k_max must be a positive integer or 'auto', got {s:?}")))
    }
}

/// When to stop adding terms.
///
/// `Auto` stops at the first `K > FIT_WINDOW` where the rounded partial sum
/// has been the same for `stability_window` consecutive `k` and the tail
/// estimate is below `tail_threshold`, or at `hard_cap`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    pub k_max: KMax,
    pub stability_window: usize,
    pub tail_threshold: f64,
    pub hard_cap: u64,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy { k_max: KMax::Auto, stability_window: 5, tail_threshold: 0.1, hard_cap: 20_000 }
    }
}

impl TruncationPolicy {
    pub fn fixed(k_max: u64) -> Self {
        TruncationPolicy { k_max: KMax::Fixed(k_max), ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_max == KMax::Fixed(0) {
            return Err(Error::InvalidArgument("k_max must be at least 1".into()));
        }
        if self.stability_window == 0 || self.hard_cap == 0 {
            return Err(Error::InvalidArgument("stability window and hard cap must be positive".into()));
        }
        if self.tail_threshold.is_nan() || self.tail_threshold <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "tail threshold must be positive, got {}",
                self.tail_threshold
            )));
        }
        Ok(())
    }
}

/// One `(Q, k, m, s)` summand.
#[derive(Clone, Debug)]
pub struct TermContribution {
    pub q: i64,
    pub k: i64,
    pub m: i64,
    pub s: i64,
    pub delta: Rational,
    pub nu: Rational,
    pub charsum: BigReal,
    pub bessel_arg: BigReal,
    pub contribution: BigReal,
}

/// Everything at one modulus `k`, with the partial sum through `k`.
#[derive(Clone, Debug)]
pub struct KTerm {
    pub k: u64,
    pub contribution: BigReal,
    pub running_total: BigReal,
}

#[derive(Clone, Debug)]
pub struct Certificate {
    pub float_value: BigReal,
    pub integer_value: Integer,
    /// `|float_value - integer_value|`.
    pub residual: BigReal,
    /// `C_fit K^(-1/2)`, with `C_fit` the largest `|term_k| k^(3/2)` among the last terms.
    pub tail_estimate: f64,
    pub k_used: u64,
    pub precision_bits: u32,
    /// The rounded partial sum was constant over the stability window.
    pub stable: bool,
    /// `stable` and `residual + tail_estimate < 1/2`.
    pub certified: bool,
}

#[derive(Clone, Debug)]
pub struct Evaluation {
    pub certificate: Certificate,
    pub per_k: Vec<KTerm>,
    /// Per-summand detail; empty unless requested.
    pub trace: Vec<TermContribution>,
}

/// A `(Q, m, s)` summand with its `k`-independent factors.
#[derive(Clone, Debug)]
struct Component {
    q: i64,
    m: i64,
    s: i64,
    delta: Rational,
    /// Everything but `C / k` and the Bessel factor.
    amplitude: Float,
    /// Bessel argument at `k = 1`.
    argument: Float,
}

/// A series ready to be summed at a fixed working precision.
#[derive(Clone, Debug)]
struct Plan {
    family: CharSumFamily,
    r: i64,
    l: i64,
    n: i64,
    nu: Rational,
    order: BesselOrder,
    components: Vec<Component>,
    ctx: PrecisionContext,
}

/// Exact data of one summand before any rounding.
struct RawComponent {
    q: i64,
    m: i64,
    s: i64,
    delta: Rational,
    weight: Integer,
}

/// `(m, s)` pairs with `m + Q^2 s / l < (r/24)(1 - Q^2/l)`, in lexicographic order.
pub fn admissible_pairs(r: u32, l: u32, q: u32) -> Vec<(u32, u32)> {
    let (r, l, q) = (r as i64, l as i64, q as i64);
    if q * q >= l || l % q != 0 {
        return Vec::new();
    }
    let q2 = q * q;
    // (r/24)(l/Q^2 - 1), floored
    let bound = (r * (l - q2)) / (24 * q2);
    let limit = Rational::from((r * (l - q2), 24 * l));
    let mut pairs = Vec::new();
    for m in 0..=bound {
        for s in 0..=bound {
            if (m * l + q2 * s, l) < limit {
                pairs.push((m as u32, s as u32));
            }
        }
    }
    pairs
}

fn delta_of(r: i64, l: i64, q: i64, m: i64, s: i64) -> Rational {
    let q2 = q * q;
    Rational::from((r * (l - q2), 24 * l)) - Rational::from((m * l + q2 * s, l))
}

fn log2_f64(x: &Rational) -> f64 {
    Float::with_val(64, x).log2().to_f64()
}

fn integer_log2(x: &Integer) -> f64 {
    Float::with_val(64, x).abs().log2().to_f64()
}

impl Plan {
    fn raw_blr(r: u32, l: u32, n: u64) -> Result<(Rational, Vec<RawComponent>)> {
        let (ri, li) = (r as i64, l as i64);
        let nu = Rational::from(n) + Rational::from((ri * (li - 1), 24));
        let mut raw = Vec::new();
        for q in divisors_with_small_square(li) {
            let pairs = admissible_pairs(r, l, q as u32);
            let max_index = pairs.iter().map(|&(m, s)| m.max(s) as usize).max().unwrap_or(0);
            let p_coeffs = coefficients(SeriesSpec::p_r(r), max_index)?;
            let a_coeffs = coefficients(SeriesSpec::a_r(r), max_index)?;
            for (m, s) in pairs {
                let weight = Integer::from(p_coeffs.get(m as usize)? * a_coeffs.get(s as usize)?);
                if weight == 0 {
                    continue;
                }
                let (m, s) = (m as i64, s as i64);
                raw.push(RawComponent { q, m, s, delta: delta_of(ri, li, q, m, s), weight });
            }
        }
        Ok((nu, raw))
    }

    fn raw_pr(r: u32, n: u64) -> Result<(Rational, Vec<RawComponent>)> {
        let ri = r as i64;
        let nu = Rational::from(n) - Rational::from((ri, 24));
        let max_m = (ri / 24) as usize;
        let p_coeffs = coefficients(SeriesSpec::p_r(r), max_m)?;
        let mut raw = Vec::new();
        for m in 0..=max_m as i64 {
            let delta = Rational::from((ri, 24)) - m;
            if delta <= 0 {
                continue;
            }
            raw.push(RawComponent { q: 1, m, s: 0, delta, weight: p_coeffs.get(m as usize)?.clone() });
        }
        Ok((nu, raw))
    }

    /// Upper bound for `log2` of any single term: `|amplitude| e^argument`
    /// bounds `(amplitude / k) phi(k) I(argument / k)` for every `k`.
    fn magnitude_log2(family: CharSumFamily, r: u32, l: u32, nu: &Rational, raw: &[RawComponent]) -> f64 {
        let mut best = 0f64;
        for c in raw {
            let ratio = Rational::from(&c.delta / nu);
            let prefactor = match family {
                CharSumFamily::C => (r as f64 / 2.0) * (c.q as f64 / l as f64).log2() + 0.5 * log2_f64(&ratio),
                CharSumFamily::A => (r as f64 + 2.0) / 4.0 * log2_f64(&ratio),
            };
            let amp = (2.0 * std::f64::consts::PI).log2() + prefactor + integer_log2(&c.weight);
            let arg = 4.0 * std::f64::consts::PI * Float::with_val(64, Rational::from(&c.delta * nu)).sqrt().to_f64();
            best = best.max(amp + arg * std::f64::consts::LOG2_E);
        }
        best
    }

    fn build(family: CharSumFamily, params: &FormulaParams, ctx: &PrecisionContext) -> Result<Plan> {
        params.validate()?;
        let r = params.r;
        let l = params.l.unwrap_or(1);
        let (nu, raw) = match family {
            CharSumFamily::C => Self::raw_blr(r, l, params.n)?,
            CharSumFamily::A => Self::raw_pr(r, params.n)?,
        };
        let magnitude = Self::magnitude_log2(family, r, l, &nu, &raw);
        let ctx = ctx.raised_to(magnitude.ceil().max(0.0) as u32 + GUARD_BITS);
        let bits = ctx.bits();
        let pi = Float::with_val(bits, Constant::Pi);
        let two_pi = Float::with_val(bits, &pi * 2u32);
        let four_pi = Float::with_val(bits, &pi * 4u32);
        let components = raw
            .into_iter()
            .map(|c| {
                let ratio = Float::with_val(bits, Rational::from(&c.delta / &nu));
                let prefactor = match family {
                    CharSumFamily::C => {
                        let base = Float::with_val(bits, Rational::from((c.q, l as i64)));
                        Float::with_val(bits, base.sqrt().pow(r)) * ratio.sqrt()
                    }
                    // (delta/nu)^(1/2 + r/4) = (delta/nu)^(1/4)^(r + 2)
                    CharSumFamily::A => ratio.sqrt().sqrt().pow(r + 2),
                };
                let amplitude = Float::with_val(bits, &two_pi * &prefactor) * &c.weight;
                let argument =
                    Float::with_val(bits, &four_pi * Float::with_val(bits, Rational::from(&c.delta * &nu)).sqrt());
                Component { q: c.q, m: c.m, s: c.s, delta: c.delta, amplitude, argument }
            })
            .collect();
        let order = match family {
            CharSumFamily::C => BesselOrder::integer(1),
            CharSumFamily::A => BesselOrder::from_twice(r + 2),
        };
        Ok(Plan { family, r: r as i64, l: l as i64, n: params.n as i64, nu, order, components, ctx })
    }
}

/// Sums series, reusing residue kernels across calls.
#[derive(Debug, Default)]
pub struct Evaluator {
    kernels: HashMap<(CharSumFamily, i64, i64), Arc<ResidueKernel>>,
}

impl Evaluator {
    pub fn new() -> Self {
        Self::default()
    }

    fn kernel(&mut self, family: CharSumFamily, k: i64, l: i64) -> Result<Arc<ResidueKernel>> {
        let key = (family, k, l);
        if let Some(kernel) = self.kernels.get(&key) {
            return Ok(kernel.clone());
        }
        let kernel = Arc::new(match family {
            CharSumFamily::C => ResidueKernel::c_family(k, l)?,
            CharSumFamily::A => ResidueKernel::a_family(k)?,
        });
        if k <= KERNEL_CACHE_MAX_K {
            self.kernels.insert(key, kernel.clone());
        }
        Ok(kernel)
    }

    /// All summands at modulus `k`, added in component order.
    fn term(&mut self, plan: &Plan, k: u64, mut trace: Option<&mut Vec<TermContribution>>) -> Result<Float> {
        let ctx = &plan.ctx;
        let bits = ctx.bits();
        let k = k as i64;
        let q = match plan.family {
            CharSumFamily::C => gcd(k, plan.l),
            CharSumFamily::A => 1,
        };
        let mut sum = Float::new(bits);
        if !plan.components.iter().any(|c| c.q == q) {
            return Ok(sum);
        }
        let kernel = self.kernel(plan.family, k, plan.l)?;
        for c in plan.components.iter().filter(|c| c.q == q) {
            let charsum = kernel.sum(plan.r, c.m, c.s, plan.n, ctx)?.re;
            let arg = ctx.wrap(Float::with_val(bits, &c.argument / k));
            let bessel = bessel_i(plan.order, &arg, ctx)?;
            let mut value = Float::with_val(bits, &c.amplitude / k);
            value *= charsum.as_float();
            value *= bessel.as_float();
            sum += &value;
            if let Some(trace) = trace.as_deref_mut() {
                trace.push(TermContribution {
                    q,
                    k,
                    m: c.m,
                    s: c.s,
                    delta: c.delta.clone(),
                    nu: plan.nu.clone(),
                    charsum,
                    bessel_arg: arg,
                    contribution: ctx.wrap(value),
                });
            }
        }
        Ok(sum)
    }

    fn run(&mut self, plan: &Plan, policy: &TruncationPolicy, with_trace: bool) -> Result<Evaluation> {
        policy.validate()?;
        let ctx = plan.ctx;
        let bits = ctx.bits();
        let mut total = Float::new(bits);
        let mut per_k = Vec::new();
        let mut trace = Vec::new();
        let mut recent: VecDeque<f64> = VecDeque::with_capacity(FIT_WINDOW);
        let mut last_rounded: Option<Integer> = None;
        let mut run_length = 0usize;
        let mut k = 0u64;
        let tail = loop {
            k += 1;
            let c = self.term(plan, k, with_trace.then_some(&mut trace))?;
            total += &c;
            if recent.len() == FIT_WINDOW {
                recent.pop_front();
            }
            recent.push_back(c.to_f64().abs() * (k as f64).powf(1.5));
            let c_fit = recent.iter().copied().fold(0.0, f64::max);
            let tail = c_fit / (k as f64).sqrt();

            let rounded = ctx.wrap(total.clone()).round_to_integer();
            if last_rounded.as_ref() == Some(&rounded) {
                run_length += 1;
            } else {
                run_length = 1;
                last_rounded = Some(rounded);
            }
            per_k.push(KTerm { k, contribution: ctx.wrap(c), running_total: ctx.wrap(total.clone()) });

            let done = match policy.k_max {
                KMax::Fixed(cap) => k >= cap,
                KMax::Auto => {
                    k >= policy.hard_cap
                        || (k as usize > FIT_WINDOW
                            && run_length >= policy.stability_window
                            && tail < policy.tail_threshold)
                }
            };
            if done {
                break tail;
            }
        };
        let integer_value = last_rounded.expect("at least one term");
        let float_value = ctx.wrap(total);
        let residual = float_value.try_sub(&ctx.from_integer(&integer_value))?.abs();
        let stable = run_length >= policy.stability_window;
        let certified = stable && residual.to_f64() + tail < 0.5;
        Ok(Evaluation {
            certificate: Certificate {
                float_value,
                integer_value,
                residual,
                tail_estimate: tail,
                k_used: k,
                precision_bits: bits,
                stable,
                certified,
            },
            per_k,
            trace,
        })
    }

    pub fn evaluate_b_l_r(
        &mut self,
        params: &FormulaParams,
        policy: &TruncationPolicy,
        ctx: &PrecisionContext,
        with_trace: bool,
    ) -> Result<Evaluation> {
        if params.l.is_none() {
            return Err(Error::InvalidArgument("b_l^(r) needs l".into()));
        }
        let plan = Plan::build(CharSumFamily::C, params, ctx)?;
        self.run(&plan, policy, with_trace)
    }

    pub fn evaluate_p_r(
        &mut self,
        r: u32,
        n: u64,
        policy: &TruncationPolicy,
        ctx: &PrecisionContext,
        with_trace: bool,
    ) -> Result<Evaluation> {
        let plan = Plan::build(CharSumFamily::A, &FormulaParams::p_r(r, n), ctx)?;
        self.run(&plan, policy, with_trace)
    }

    /// Any [`FormulaKind`]. For [`FormulaKind::Mexbar`] the overpartition
    /// shape of the series is summed as well and must agree with the generic
    /// sum to `2^(-bits/4)`.
    pub fn evaluate(
        &mut self,
        kind: FormulaKind,
        params: &FormulaParams,
        policy: &TruncationPolicy,
        ctx: &PrecisionContext,
        with_trace: bool,
    ) -> Result<Evaluation> {
        let params = kind.params(Some(params.r), params.l, params.n)?;
        if kind.uses_p_formula() {
            return self.evaluate_p_r(params.r, params.n, policy, ctx, with_trace);
        }
        let eval = self.evaluate_b_l_r(&params, policy, ctx, with_trace)?;
        if kind == FormulaKind::Mexbar {
            let cert = &eval.certificate;
            let work = PrecisionContext::new(cert.precision_bits)?;
            let shape = self.sigma_mex_bar_shape(params.n, cert.k_used, &work)?;
            let diff = shape.try_sub(&cert.float_value)?.abs();
            let mut tolerance = Float::with_val(work.bits(), 1);
            tolerance >>= work.bits() / 4;
            if *diff.as_float() > tolerance {
                return Err(Error::Disagreement {
                    what: "overpartition minimal-excludant shape vs generic series".into(),
                    diff: diff.to_fixed(30),
                    tolerance: tolerance.to_string_radix(10, Some(6)),
                });
            }
        }
        Ok(eval)
    }

    /// `pi / (4 sqrt 2 sqrt(n + 1/8)) sum_{k odd <= k_max} G_k(n)/k I_1((pi/k) sqrt(n + 1/8))`
    /// with `G_k = C_{k,3,2,1,0,0}`.
    pub fn sigma_mex_bar_shape(&mut self, n: u64, k_max: u64, ctx: &PrecisionContext) -> Result<BigReal> {
        let bits = ctx.bits();
        let pi = Float::with_val(bits, Constant::Pi);
        let root = Float::with_val(bits, Rational::from(n) + Rational::from((1, 8))).sqrt();
        let mut sum = Float::new(bits);
        for k in (1..=k_max as i64).step_by(2) {
            let g = self.kernel(CharSumFamily::C, k, 2)?.sum(3, 0, 0, n as i64, ctx)?.re;
            let arg = ctx.wrap(Float::with_val(bits, &pi * &root) / k);
            let mut term = bessel_i(BesselOrder::integer(1), &arg, ctx)?.into_float();
            term *= g.as_float();
            term /= k;
            sum += term;
        }
        let mut prefactor = Float::with_val(bits, 2u32).sqrt() * 4u32;
        prefactor *= &root;
        let prefactor = Float::with_val(bits, &pi / &prefactor);
        Ok(ctx.wrap(sum * prefactor))
    }
}

/// Sums the `b_l^(r)` series for `params`.
pub fn evaluate_b_l_r(
    params: &FormulaParams,
    policy: &TruncationPolicy,
    ctx: &PrecisionContext,
) -> Result<Certificate> {
    Ok(Evaluator::new().evaluate_b_l_r(params, policy, ctx, false)?.certificate)
}

/// Sums the `p^(r)` series; needs `n > r/24`.
pub fn evaluate_p_r(r: u32, n: u64, policy: &TruncationPolicy, ctx: &PrecisionContext) -> Result<Certificate> {
    Ok(Evaluator::new().evaluate_p_r(r, n, policy, ctx, false)?.certificate)
}

/// A specialization by kind; parameters the kind fixes may be omitted.
pub fn evaluate_special(
    kind: FormulaKind,
    r: Option<u32>,
    l: Option<u32>,
    n: u64,
    policy: &TruncationPolicy,
    ctx: &PrecisionContext,
) -> Result<Certificate> {
    let params = kind.params(r, l, n)?;
    Ok(Evaluator::new().evaluate(kind, &params, policy, ctx, false)?.certificate)
}

/// Per-`k` contributions for `k = 1..=k_max` with running totals.
pub fn term_trace(kind: FormulaKind, params: &FormulaParams, k_max: u64, ctx: &PrecisionContext) -> Result<Vec<KTerm>> {
    let policy = TruncationPolicy::fixed(k_max);
    Ok(Evaluator::new().evaluate(kind, params, &policy, ctx, false)?.per_k)
}

/// `(1/sqrt 2) l^(-r/2) ((r/24)(1 - 1/l))^(1/4) n^(-3/4) exp(4 pi sqrt((n r / 24)(1 - 1/l)))`.
pub fn asymptotic_main_term(r: u32, l: u32, n: u64, ctx: &PrecisionContext) -> Result<BigReal> {
    if n == 0 || r == 0 || l < 2 {
        return Err(Error::InvalidArgument(format!("need n >= 1, r >= 1, l >= 2; got n = {n}, r = {r}, l = {l}")));
    }
    let bits = ctx.bits();
    let c = Rational::from((r as i64 * (l as i64 - 1), 24 * l as i64));
    let c_float = Float::with_val(bits, &c);
    let mut value = Float::with_val(bits, 2u32).sqrt().recip();
    value *= Float::with_val(bits, l).pow(Float::with_val(bits, -(r as f64) / 2.0));
    value *= Float::with_val(bits, c_float.sqrt_ref()).sqrt();
    value *= Float::with_val(bits, n).pow(Float::with_val(bits, -0.75));
    let mut exponent = Float::with_val(bits, Rational::from(&c * Integer::from(n))).sqrt();
    exponent *= Float::with_val(bits, Constant::Pi) * 4u32;
    value *= exponent.exp();
    Ok(ctx.wrap(value))
}
