use anyhow::{Context, Result};
use rug::{Float, Integer};
use serde_json::{Map, Value};

use rademacher_core::mpnum::{BigReal, PrecisionContext};
use rademacher_core::qoracle::{coefficients, CoefficientCache, CoefficientTable, SeriesSpec};
use rademacher_core::radseries::{
    asymptotic_main_term, check_f_transformation, check_transformation, sufficient_terms, Certificate, Evaluator,
    FormulaKind, FormulaParams, TransformCheck, TruncationPolicy,
};
use rademacher_core::tables::{check_breakdown, check_table, TableName};
use rademacher_core::turan::{hermite_distance_table, turan_scan_table, ShiftConvention, TuranScan};
use rademacher_core::Error;

use crate::report::{float, kv, opt, real, row, sci, string, Report, Status};
use crate::{Opts, Prec};

/// Precision floor when `--prec auto`; the evaluators raise it as the terms require.
const AUTO_BITS: u32 = 128;
/// `transform` runs at this precision unless told otherwise.
const TRANSFORM_AUTO_BITS: u32 = 192;

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Error::InvalidArgument(msg.into()).into()
}

fn context(o: &Opts, auto_bits: u32) -> Result<PrecisionContext> {
    let bits = match o.prec {
        Prec::Auto => auto_bits,
        Prec::Bits(b) => b,
    };
    Ok(PrecisionContext::new(bits)?)
}

fn policy(o: &Opts) -> Result<TruncationPolicy> {
    let policy = TruncationPolicy { k_max: o.kmax, ..Default::default() };
    policy.validate()?;
    Ok(policy)
}

fn kind(o: &Opts) -> Result<FormulaKind> {
    o.kind.ok_or_else(|| usage("--kind is required"))
}

fn need<T: Clone>(value: &Option<T>, flag: &str) -> Result<T> {
    value.clone().ok_or_else(|| usage(format!("--{flag} is required")))
}

fn params(o: &Opts) -> Result<(FormulaKind, FormulaParams)> {
    let kind = kind(o)?;
    let n = need(&o.n, "n")?;
    Ok((kind, kind.params(o.r, o.l, n)?))
}

fn oracle_table(o: &Opts, spec: SeriesSpec, limit: usize) -> Result<CoefficientTable> {
    match &o.cache {
        Some(path) => {
            let mut cache =
                CoefficientCache::open(path).with_context(|| format!("opening cache {}", path.display()))?;
            Ok(cache.get_or_compute(spec, limit)?)
        }
        None => Ok(coefficients(spec, limit)?),
    }
}

fn kind_fields(report: &mut Report, kind: FormulaKind, p: &FormulaParams) {
    report.field("kind", kind.name()).field("r", string(p.r)).field("l", opt(p.l)).field("n", string(p.n));
}

fn certificate_fields(report: &mut Report, cert: &Certificate) {
    report
        .field("value", string(&cert.integer_value))
        .field("float", real(&cert.float_value))
        .field("residual", sci(&cert.residual))
        .field("tail_estimate", float(cert.tail_estimate))
        .field("k_used", cert.k_used)
        .field("precision_bits", cert.precision_bits)
        .field("certified", cert.certified);
    if !cert.certified {
        report.fail(Status::Uncertified);
    }
}

fn label(kind: FormulaKind, p: &FormulaParams) -> String {
    match p.l {
        Some(l) => format!("{}(r={}, l={l}, n={})", kind.name(), p.r, p.n),
        None => format!("{}(r={}, n={})", kind.name(), p.r, p.n),
    }
}

fn certificate_text(out: &mut String, cert: &Certificate) {
    kv(
        out,
        &[
            ("value", cert.integer_value.to_string()),
            ("float", cert.float_value.to_fixed(12)),
            ("residual", format!("{:.3e}", cert.residual.to_f64())),
            ("tail estimate", format!("{:.3e}", cert.tail_estimate)),
            ("k used", cert.k_used.to_string()),
            ("precision bits", cert.precision_bits.to_string()),
            ("certified", cert.certified.to_string()),
        ],
    );
}

fn evaluate(o: &Opts, kind: FormulaKind, p: &FormulaParams) -> Result<Certificate> {
    let ctx = context(o, AUTO_BITS)?;
    Ok(Evaluator::new().evaluate(kind, p, &policy(o)?, &ctx, false)?.certificate)
}

pub fn compute(o: &Opts) -> Result<Report> {
    let (kind, p) = params(o)?;
    let cert = evaluate(o, kind, &p)?;
    let mut report = Report::new();
    kind_fields(&mut report, kind, &p);
    certificate_fields(&mut report, &cert);
    report.line(label(kind, &p));
    certificate_text(&mut report.text, &cert);
    Ok(report)
}

pub fn oracle(o: &Opts) -> Result<Report> {
    let kind = kind(o)?;
    let spec = kind.series_spec(o.r, o.l)?;
    let (r, l) = kind.resolve(o.r, o.l)?;
    let mut report = Report::new();
    report.field("kind", kind.name()).field("r", string(r)).field("l", opt(l));
    match (o.n, o.from, o.to) {
        (Some(n), None, None) => {
            let table = oracle_table(o, spec, n as usize)?;
            let value = table.get(n as usize)?;
            report.field("n", string(n)).field("value", string(value));
            report.line(format!("{spec_kind}[{n}] = {value}", spec_kind = spec.kind));
        }
        (None, from, Some(to)) => {
            let from = from.unwrap_or(0);
            if from > to {
                return Err(usage(format!("empty range {from}..={to}")));
            }
            let table = oracle_table(o, spec, to as usize)?;
            let rows = (from..=to)
                .map(|n| Ok(row([("n", string(n)), ("value", string(table.get(n as usize)?))])))
                .collect::<Result<Vec<_>>>()?;
            for n in from..=to {
                report.line(format!("{n:>6}  {}", table.get(n as usize)?));
            }
            report.field("from", string(from)).field("to", string(to)).rows("values", rows);
        }
        _ => return Err(usage("give either --n or --to (with optional --from)")),
    }
    Ok(report)
}

pub fn verify(o: &Opts) -> Result<Report> {
    let (kind, p) = params(o)?;
    let cert = evaluate(o, kind, &p)?;
    let table = oracle_table(o, kind.oracle_spec(&p)?, p.n as usize)?;
    let exact = table.get(p.n as usize)?;
    let matched = cert.integer_value == *exact;
    let mut report = Report::new();
    kind_fields(&mut report, kind, &p);
    certificate_fields(&mut report, &cert);
    report.field("oracle", string(exact)).field("match", matched);
    if !matched {
        report.fail(Status::Mismatch);
    }
    report.line(label(kind, &p));
    certificate_text(&mut report.text, &cert);
    let verdict = if matched { "match" } else { "MISMATCH" };
    kv(&mut report.text, &[("oracle", exact.to_string()), ("verdict", verdict.to_string())]);
    Ok(report)
}

pub fn terms(o: &Opts) -> Result<Report> {
    let (kind, p) = params(o)?;
    let ctx = context(o, AUTO_BITS)?;
    let eval = Evaluator::new().evaluate(kind, &p, &policy(o)?, &ctx, false)?;
    let mut report = Report::new();
    kind_fields(&mut report, kind, &p);
    certificate_fields(&mut report, &eval.certificate);
    report.line(label(kind, &p));
    report.line(format!("{:>6}  {:>32}  {:>32}", "k", "contribution", "running total"));
    let rows = eval
        .per_k
        .iter()
        .map(|t| {
            report.line(format!(
                "{:>6}  {:>32}  {:>32}",
                t.k,
                t.contribution.to_fixed(12),
                t.running_total.to_fixed(12)
            ));
            row([
                ("k", string(t.k)),
                ("contribution", real(&t.contribution)),
                ("running_total", real(&t.running_total)),
            ])
        })
        .collect();
    report.rows("terms", rows);
    Ok(report)
}

pub fn table(name: TableName, o: &Opts) -> Result<Report> {
    let ctx = context(o, AUTO_BITS)?;
    let mut report = Report::new();
    report.field("table", name.name());
    if name == TableName::Breakdown {
        let check = check_breakdown(&ctx)?;
        report.line(format!("{:>4}  {:>26}  {:>20}  {}", "k", "computed", "published", "ok"));
        let rows = check
            .terms
            .iter()
            .map(|t| {
                report.line(format!(
                    "{:>4}  {:>26}  {:>20}  {}",
                    t.k,
                    t.computed.to_fixed(10),
                    t.published,
                    mark(t.passed)
                ));
                row([
                    ("k", string(t.k)),
                    ("computed", real(&t.computed)),
                    ("published", string(t.published)),
                    ("passed", t.passed.into()),
                ])
            })
            .collect();
        report.line(format!("total {}  {}", check.total.to_fixed(10), mark(check.total_passed)));
        report.line(format!("error vs exact {:.3e}", check.error));
        report
            .field("total", real(&check.total))
            .field("total_passed", check.total_passed)
            .field("error", float(check.error))
            .field("passed", check.passed())
            .rows("terms", rows);
        if !check.passed() {
            report.fail(Status::Mismatch);
        }
        return Ok(report);
    }
    let checks = check_table(name, &policy(o)?, &ctx)?;
    report.line(format!(
        "{:>4} {:>3} {:>4}  {:>14}  {:>20}  {:>24}  {:>9}  {}",
        "r", "l", "n", "exact", "published", "computed", "certified", "ok"
    ));
    let rows = checks
        .iter()
        .map(|c| {
            let cert = &c.certificate;
            report.line(format!(
                "{:>4} {:>3} {:>4}  {:>14}  {:>20}  {:>24}  {:>9}  {}",
                c.row.r,
                c.row.l.map_or("-".into(), |l| l.to_string()),
                c.row.n,
                c.row.exact,
                c.row.displayed,
                cert.float_value.to_fixed(10),
                cert.certified,
                mark(c.passed)
            ));
            row([
                ("kind", c.row.kind.name().into()),
                ("r", string(c.row.r)),
                ("l", opt(c.row.l)),
                ("n", string(c.row.n)),
                ("exact", string(c.row.exact)),
                ("published", c.row.displayed.into()),
                ("float", real(&cert.float_value)),
                ("value", string(&cert.integer_value)),
                ("float_error", float(c.float_error)),
                ("k_used", cert.k_used.into()),
                ("certified", cert.certified.into()),
                ("seconds", float(c.elapsed.as_secs_f64())),
                ("passed", c.passed.into()),
            ])
        })
        .collect();
    let passed = checks.iter().filter(|c| c.passed).count();
    report.line(format!("{passed}/{} rows match", checks.len()));
    report.field("passed", passed == checks.len()).rows("rows", rows);
    if passed != checks.len() {
        report.fail(Status::Mismatch);
    }
    Ok(report)
}

fn mark(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "FAIL"
    }
}

pub fn turan(o: &Opts) -> Result<Report> {
    let kind = kind(o)?;
    let (r, l) = kind.resolve(o.r, o.l)?;
    let spec = kind.series_spec(o.r, o.l)?;
    let d = need(&o.d, "d")?;
    if d == 0 {
        return Err(usage("--d must be at least 1"));
    }
    let to = need(&o.to, "to")?;
    let from = o.from.unwrap_or(0);
    let limit = (to as usize + d).max(o.n.map_or(0, |n| n as usize + d));
    let table = oracle_table(o, spec, limit)?;
    let scan = turan_scan_table(&table, d, from, to, o.convention)?;

    let mut report = Report::new();
    report
        .field("kind", kind.name())
        .field("r", string(r))
        .field("l", opt(l))
        .field("d", string(d))
        .field("from", string(from))
        .field("to", string(to))
        .field("convention", convention_name(o.convention))
        .field("failures", Value::Array(scan.failures.iter().map(string).collect()))
        .field("threshold", string(scan.threshold()))
        .field("hyperbolic", scan.failures.is_empty());
    turan_text(&mut report, kind, r, l, &scan);
    if !scan.failures.is_empty() {
        report.fail(Status::Mismatch);
    }
    if let Some(n) = o.n {
        let l = l.ok_or_else(|| usage("the Hermite profile needs an l-regular kind"))?;
        let ctx = context(o, AUTO_BITS)?;
        let distance = hermite_distance_table(&table, r, l, d, n, &ctx)?;
        report.field("hermite_n", string(n)).field("hermite_distance", sci(&distance));
        report.line(format!("Hermite distance at n = {n}: {:.6e}", distance.to_f64()));
    }
    Ok(report)
}

fn convention_name(c: ShiftConvention) -> &'static str {
    match c {
        ShiftConvention::Direct => "direct",
        ShiftConvention::Previous => "previous",
    }
}

fn turan_text(report: &mut Report, kind: FormulaKind, r: u32, l: Option<u32>, scan: &TuranScan) {
    let shift = match scan.convention {
        ShiftConvention::Direct => "n",
        ShiftConvention::Previous => "n-1",
    };
    let what = match l {
        Some(l) => format!("{} r={r} l={l}", kind.name()),
        None => format!("{} r={r}", kind.name()),
    };
    report.line(format!("J^{{{},{shift}}} for {what}, n in [{}, {}]", scan.d, scan.from, scan.to));
    if scan.failures.is_empty() {
        report.line("hyperbolic at every n in range");
    } else {
        let shown: Vec<String> = scan.failures.iter().take(40).map(|n| n.to_string()).collect();
        let more = if scan.failures.len() > 40 { ", ..." } else { "" };
        report.line(format!("{} failures: {}{more}", scan.failures.len(), shown.join(", ")));
        report.line(format!("hyperbolic from n = {} to the end of the range", scan.threshold()));
    }
}

pub fn asympt(o: &Opts) -> Result<Report> {
    let r = need(&o.r, "r")?;
    let l = need(&o.l, "l")?;
    let n = need(&o.n, "n")?;
    let p = FormulaKind::Blr.params(Some(r), Some(l), n)?;
    let cert = evaluate(o, FormulaKind::Blr, &p)?;
    let bits = cert.precision_bits;
    let ctx = PrecisionContext::new(bits)?;
    let main = asymptotic_main_term(r, l, n, &ctx)?;
    let ratio = cert.float_value.try_div(&main)?;
    let deviation = ctx.wrap(Float::with_val(bits, ratio.as_float() - 1u32).abs());
    let mut report = Report::new();
    report
        .field("r", string(r))
        .field("l", string(l))
        .field("n", string(n))
        .field("value", real(&cert.float_value))
        .field("main_term", real(&main))
        .field("ratio", real(&ratio))
        .field("deviation", sci(&deviation))
        .field("k_used", cert.k_used)
        .field("precision_bits", bits)
        .field("certified", cert.certified);
    report.line(format!("b_{l}^({r})({n}) against the leading asymptotic"));
    kv(
        &mut report.text,
        &[
            ("value", format!("{:.12e}", cert.float_value.to_f64())),
            ("main term", format!("{:.12e}", main.to_f64())),
            ("ratio", ratio.to_fixed(12)),
            ("|ratio - 1|", format!("{:.6e}", deviation.to_f64())),
        ],
    );
    Ok(report)
}

pub fn transform(o: &Opts) -> Result<Report> {
    let h = need(&o.h, "h")?;
    let k = need(&o.k, "k")?;
    let z = need(&o.z, "z")?;
    let ctx = context(o, TRANSFORM_AUTO_BITS)?;
    let l = o.l.map(i64::from);
    let r = match l {
        Some(_) => need(&o.r, "r")?,
        None => o.r.unwrap_or(1),
    };
    if l.is_none() && r != 1 {
        return Err(usage("without --l the check is for f(q) and takes no r other than 1"));
    }
    let n_terms = match o.terms {
        Some(n) => n,
        None => sufficient_terms(k, &z, l, r, &ctx)?,
    };
    let check: TransformCheck = match l {
        Some(l) => check_transformation(h, k, &z, l, r, n_terms, &ctx)?,
        None => check_f_transformation(h, k, &z, n_terms, &ctx)?,
    };
    let bits = ctx.bits();
    let scale = check.lhs.abs().to_f64().max(1.0);
    let mut threshold = Float::with_val(bits, scale);
    threshold >>= bits / 2;
    let passed = *check.residual.as_float() <= threshold;
    let threshold = ctx.wrap(threshold);

    let mut report = Report::new();
    report
        .field("h", string(h))
        .field("k", string(k))
        .field("z", string(&z))
        .field("l", l.map_or(Value::Null, string))
        .field("r", string(r))
        .field("terms", n_terms)
        .field("precision_bits", bits)
        .field("lhs_re", real(&check.lhs.re))
        .field("lhs_im", real(&check.lhs.im))
        .field("rhs_re", real(&check.rhs.re))
        .field("rhs_im", real(&check.rhs.im))
        .field("residual", sci(&check.residual))
        .field("tail_log2", float(check.tail_log2))
        .field("threshold", sci(&threshold))
        .field("passed", passed);
    if !passed {
        report.fail(Status::Mismatch);
    }
    let what = match l {
        Some(l) => format!("l={l} r={r}"),
        None => "f(q)".to_string(),
    };
    report.line(format!("transformation at h={h} k={k} z={z}, {what}, {n_terms} product terms"));
    kv(
        &mut report.text,
        &[
            ("lhs", format!("{} {:+}i", check.lhs.re.to_fixed(20), check.lhs.im.to_f64())),
            ("rhs", format!("{} {:+}i", check.rhs.re.to_fixed(20), check.rhs.im.to_f64())),
            ("residual", format!("{:.3e}", check.residual.to_f64())),
            ("threshold", format!("2^-{} * {scale:.3e}", bits / 2)),
            ("tail bound", format!("2^{:.1}", check.tail_log2)),
            ("verdict", mark(passed).to_string()),
        ],
    );
    Ok(report)
}

pub fn selftest(o: &Opts) -> Result<Report> {
    let ctx = context(o, AUTO_BITS)?;
    let policy = policy(o)?;
    let mut results: Vec<(String, bool, String)> = Vec::new();

    for name in [TableName::Table1, TableName::Table2, TableName::Table3] {
        let checks = check_table(name, &policy, &ctx)?;
        let passed = checks.iter().filter(|c| c.passed).count();
        results.push((name.name().into(), passed == checks.len(), format!("{passed}/{} rows", checks.len())));
    }
    let breakdown = check_breakdown(&ctx)?;
    results.push(("breakdown".into(), breakdown.passed(), format!("total {}", breakdown.total.to_fixed(7))));

    let mut evaluator = Evaluator::new();
    for (kind, r, l, n) in [(FormulaKind::P, None, None, 100u64), (FormulaKind::Blr, Some(3), Some(5), 40)] {
        let p = kind.params(r, l, n)?;
        let cert = evaluator.evaluate(kind, &p, &policy, &ctx, false)?.certificate;
        let exact: Integer = coefficients(kind.oracle_spec(&p)?, n as usize)?.get(n as usize)?.clone();
        let ok = cert.certified && cert.integer_value == exact;
        results.push((format!("verify {}", label(kind, &p)), ok, cert.integer_value.to_string()));
    }

    let wide = ctx.raised_to(ctx.bits().max(TRANSFORM_AUTO_BITS));
    let z = rug::Rational::from(1);
    let n_terms = sufficient_terms(1, &z, Some(3), 2, &wide)?;
    let check = check_transformation(0, 1, &z, 3, 2, n_terms, &wide)?;
    let bound: BigReal = wide.eps().sqrt();
    results.push((
        "transform h=0 k=1 z=1 l=3 r=2".into(),
        check.residual <= bound,
        format!("residual {:.3e}", check.residual.to_f64()),
    ));

    let p = coefficients(SeriesSpec::p_r(1), 1003)?;
    for (d, from, to) in [(2, 26, 1000), (3, 94, 500)] {
        let scan = turan_scan_table(&p, d, from, to, ShiftConvention::Direct)?;
        results.push((
            format!("turan p d={d} [{from}, {to}]"),
            scan.failures.is_empty(),
            format!("{} failures", scan.failures.len()),
        ));
    }

    let mut report = Report::new();
    let rows: Vec<Map<String, Value>> = results
        .iter()
        .map(|(name, ok, detail)| {
            report.line(format!("{:<4} {name}: {detail}", mark(*ok)));
            row([("check", name.as_str().into()), ("passed", (*ok).into()), ("detail", detail.as_str().into())])
        })
        .collect();
    let passed = results.iter().filter(|r| r.1).count();
    report.line(format!("{passed}/{} checks passed", results.len()));
    report.field("passed", passed == results.len()).rows("checks", rows);
    if passed != results.len() {
        report.fail(Status::Mismatch);
    }
    Ok(report)
}
