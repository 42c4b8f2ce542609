//! Exact q-series coefficients of the generating products.
//!
//! This is the ground truth the analytic series are certified against, so
//! there is no floating point anywhere in here. Negative powers go through
//! the logarithmic-derivative recurrence; every division in it is checked
//! to be exact.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rug::{Assign, Integer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which generating product a table expands.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SeriesKind {
    /// `(q; q)_inf^{-r}`: r-colored partitions.
    PR,
    /// `(q; q)_inf^{r}`.
    AR,
    /// `(q^l; q^l)_inf^r / (q; q)_inf^r`: r-colored l-regular partitions.
    BLR,
    /// `prod (1 + q^n)^r`: r-colored distinct parts.
    PDR,
    /// Sum of minimal excludants over partitions, `prod (1 + q^n)^2`.
    SigmaMex,
    /// Overpartition analogue, `prod (1 + q^n)^3`.
    SigmaMexBar,
}

impl SeriesKind {
    pub const ALL: [SeriesKind; 6] = [
        SeriesKind::PR,
        SeriesKind::AR,
        SeriesKind::BLR,
        SeriesKind::PDR,
        SeriesKind::SigmaMex,
        SeriesKind::SigmaMexBar,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SeriesKind::PR => "P_R",
            SeriesKind::AR => "A_R",
            SeriesKind::BLR => "B_L_R",
            SeriesKind::PDR => "PD_R",
            SeriesKind::SigmaMex => "SIGMA_MEX",
            SeriesKind::SigmaMexBar => "SIGMA_MEX_BAR",
        }
    }
}

impl fmt::Display for SeriesKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SeriesKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        SeriesKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown series kind {s:?}")))
    }
}

/// A fully resolved `(kind, r, l)` triple.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SeriesSpec {
    pub kind: SeriesKind,
    pub r: u32,
    pub l: Option<u32>,
}

impl SeriesSpec {
    /// Fills in implied parameters and rejects conflicting ones.
    pub fn new(kind: SeriesKind, r: Option<u32>, l: Option<u32>) -> Result<Self> {
        let fixed_r = match kind {
            SeriesKind::SigmaMex => Some(2),
            SeriesKind::SigmaMexBar => Some(3),
            _ => None,
        };
        let r = match (fixed_r, r) {
            (Some(f), Some(given)) if f != given => {
                return Err(Error::InvalidArgument(format!("{kind} fixes r = {f}, got r = {given}")))
            }
            (Some(f), _) => f,
            (None, Some(given)) => given,
            (None, None) => return Err(Error::InvalidArgument(format!("{kind} needs r"))),
        };
        if r == 0 {
            return Err(Error::InvalidArgument("r must be at least 1".into()));
        }
        let l = match kind {
            SeriesKind::PR | SeriesKind::AR => {
                if l.is_some() {
                    return Err(Error::InvalidArgument(format!("{kind} takes no l")));
                }
                None
            }
            SeriesKind::BLR => match l {
                Some(l) if l >= 2 => Some(l),
                Some(l) => return Err(Error::InvalidArgument(format!("l must be at least 2, got {l}"))),
                None => return Err(Error::InvalidArgument("B_L_R needs l".into())),
            },
            SeriesKind::PDR | SeriesKind::SigmaMex | SeriesKind::SigmaMexBar => match l {
                None | Some(2) => Some(2),
                Some(other) => return Err(Error::InvalidArgument(format!("{kind} fixes l = 2, got l = {other}"))),
            },
        };
        Ok(SeriesSpec { kind, r, l })
    }

    pub fn p_r(r: u32) -> Self {
        SeriesSpec::new(SeriesKind::PR, Some(r), None).expect("valid r")
    }

    pub fn a_r(r: u32) -> Self {
        SeriesSpec::new(SeriesKind::AR, Some(r), None).expect("valid r")
    }

    pub fn b_l_r(r: u32, l: u32) -> Self {
        SeriesSpec::new(SeriesKind::BLR, Some(r), Some(l)).expect("valid r, l")
    }
}

/// Exact coefficients `values[0..=limit]` of one generating product.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoefficientTable {
    pub spec: SeriesSpec,
    pub values: Vec<Integer>,
}

impl CoefficientTable {
    pub fn limit(&self) -> usize {
        self.values.len() - 1
    }

    pub fn get(&self, index: usize) -> Result<&Integer> {
        self.values.get(index).ok_or(Error::OutOfRange { index, limit: self.limit() })
    }

    /// Prefix of the table up to `limit`.
    pub fn truncated(&self, limit: usize) -> Result<CoefficientTable> {
        if limit > self.limit() {
            return Err(Error::OutOfRange { index: limit, limit: self.limit() });
        }
        Ok(CoefficientTable { spec: self.spec, values: self.values[..=limit].to_vec() })
    }
}

/// Coefficients of `prod_{n>=1} (1 - q^n)` up to `q^limit` from the pentagonal
/// number theorem.
pub fn euler_coeffs(limit: usize) -> CoefficientTable {
    let mut values = vec![Integer::new(); limit + 1];
    values[0] = Integer::from(1);
    for j in 1i64.. {
        let first = (j * (3 * j - 1) / 2) as usize;
        if first > limit {
            break;
        }
        let sign = if j % 2 == 0 { 1 } else { -1 };
        values[first] += sign;
        let second = (j * (3 * j + 1) / 2) as usize;
        if second <= limit {
            values[second] += sign;
        }
    }
    CoefficientTable { spec: SeriesSpec::a_r(1), values }
}

/// Truncated product of two series.
pub fn multiply(a: &[Integer], b: &[Integer], limit: usize) -> Vec<Integer> {
    let mut out = vec![Integer::new(); limit + 1];
    for (i, ai) in a.iter().enumerate().take(limit + 1) {
        if ai.cmp0() == std::cmp::Ordering::Equal {
            continue;
        }
        for (j, bj) in b.iter().enumerate().take(limit + 1 - i) {
            out[i + j] += Integer::from(ai * bj);
        }
    }
    out
}

/// Substitutes `q -> q^step`.
pub fn stretch(a: &[Integer], step: usize, limit: usize) -> Vec<Integer> {
    let mut out = vec![Integer::new(); limit + 1];
    for (i, ai) in a.iter().enumerate() {
        if i * step > limit {
            break;
        }
        out[i * step] = ai.clone();
    }
    out
}

/// Truncated `e`-th power of a power series.
///
/// Series with constant term `+-1` use the recurrence
/// `n f_n = sum_{k=1}^{n} ((e + 1) k - n) g_k f_{n-k}`, valid for any integer
/// `e` and exact over the integers. Other constant terms are only accepted
/// for `e >= 0` and go through repeated squaring.
pub fn power_series_pow(base: &[Integer], e: i64, limit: usize) -> Result<Vec<Integer>> {
    if base.is_empty() {
        return Err(Error::InvalidArgument("empty series".into()));
    }
    let c0 = &base[0];
    let unit = *c0 == 1 || *c0 == -1;
    if !unit {
        if e < 0 {
            return Err(Error::NonUnitConstant { constant: c0.to_string() });
        }
        return Ok(pow_by_squaring(base, e as u64, limit));
    }
    let negate = *c0 == -1;
    // g = base / c0 has constant term 1
    let g: Vec<(usize, Integer)> = base
        .iter()
        .enumerate()
        .skip(1)
        .take(limit)
        .filter(|(_, c)| c.cmp0() != std::cmp::Ordering::Equal)
        .map(|(i, c)| (i, if negate { Integer::from(-c) } else { c.clone() }))
        .collect();
    let mut f = vec![Integer::new(); limit + 1];
    f[0] = Integer::from(1);
    let mut acc = Integer::new();
    for n in 1..=limit {
        acc.assign(0);
        for (k, gk) in g.iter() {
            if *k > n {
                break;
            }
            let weight = (e + 1) * (*k as i64) - n as i64;
            if weight == 0 {
                continue;
            }
            acc += Integer::from(gk * &f[n - k]) * weight;
        }
        if !acc.is_divisible_u(n as u32) {
            return Err(Error::NonIntegral { index: n });
        }
        f[n] = Integer::from(acc.div_exact_u_ref(n as u32));
    }
    if negate && e % 2 != 0 {
        for c in f.iter_mut() {
            *c = Integer::from(-&*c);
        }
    }
    Ok(f)
}

fn pow_by_squaring(base: &[Integer], mut e: u64, limit: usize) -> Vec<Integer> {
    let mut result = vec![Integer::new(); limit + 1];
    result[0] = Integer::from(1);
    let mut square: Vec<Integer> = base.iter().take(limit + 1).cloned().collect();
    square.resize(limit + 1, Integer::new());
    while e > 0 {
        if e & 1 == 1 {
            result = multiply(&result, &square, limit);
        }
        e >>= 1;
        if e > 0 {
            square = multiply(&square, &square, limit);
        }
    }
    result
}

/// `prod (1 + q^n)` by the distinct-parts recurrence.
pub fn distinct_parts(limit: usize) -> Vec<Integer> {
    let mut d = vec![Integer::new(); limit + 1];
    d[0] = Integer::from(1);
    for part in 1..=limit {
        for i in (part..=limit).rev() {
            let prev = d[i - part].clone();
            d[i] += prev;
        }
    }
    d
}

/// Exact coefficients of the product selected by `spec`, up to `q^limit`.
pub fn coefficients(spec: SeriesSpec, limit: usize) -> Result<CoefficientTable> {
    let r = spec.r as i64;
    let values = match spec.kind {
        SeriesKind::PR => power_series_pow(&euler_coeffs(limit).values, -r, limit)?,
        SeriesKind::AR => power_series_pow(&euler_coeffs(limit).values, r, limit)?,
        SeriesKind::BLR => {
            let l = spec.l.expect("B_L_R spec carries l") as usize;
            let euler = euler_coeffs(limit).values;
            let a = power_series_pow(&euler, r, limit / l)?;
            let p = power_series_pow(&euler, -r, limit)?;
            multiply(&stretch(&a, l, limit), &p, limit)
        }
        SeriesKind::PDR | SeriesKind::SigmaMex | SeriesKind::SigmaMexBar => {
            power_series_pow(&distinct_parts(limit), r, limit)?
        }
    };
    Ok(CoefficientTable { spec, values })
}

/// Sparse integer cache of coefficient tables, stored as one JSON document.
///
/// Entries are keyed by `{kind, r, l, N}`; a request for a shorter prefix of a
/// cached table is served from it. Writes go straight to disk.
#[derive(Debug)]
pub struct CoefficientCache {
    path: PathBuf,
    entries: BTreeMap<(SeriesSpec, usize), Vec<Integer>>,
}

#[derive(Serialize, Deserialize)]
struct CacheDocument {
    entries: Vec<CacheEntry>,
}

#[derive(Serialize, Deserialize)]
struct CacheEntry {
    kind: SeriesKind,
    r: u32,
    l: Option<u32>,
    #[serde(rename = "N")]
    limit: usize,
    values: Vec<String>,
}

impl CoefficientCache {
    /// Opens the cache at `path`, starting empty when the file does not exist.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let mut entries = BTreeMap::new();
        if path.exists() {
            let text = std::fs::read_to_string(&path)?;
            let doc: CacheDocument = serde_json::from_str(&text)?;
            for entry in doc.entries {
                let spec = SeriesSpec::new(entry.kind, Some(entry.r), entry.l)?;
                if entry.values.len() != entry.limit + 1 {
                    return Err(Error::Cache(format!(
                        "{} r={} has {} values for N={}",
                        entry.kind,
                        entry.r,
                        entry.values.len(),
                        entry.limit
                    )));
                }
                let values = entry
                    .values
                    .iter()
                    .map(|s| Integer::from_str(s).map_err(|e| Error::Cache(format!("bad integer {s:?}: {e}"))))
                    .collect::<Result<Vec<_>>>()?;
                entries.insert((spec, entry.limit), values);
            }
        }
        Ok(CoefficientCache { path, entries })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn lookup(&self, spec: SeriesSpec, limit: usize) -> Option<CoefficientTable> {
        self.entries
            .range((spec, limit)..)
            .take_while(|((s, _), _)| *s == spec)
            .next()
            .map(|(_, values)| CoefficientTable { spec, values: values[..=limit].to_vec() })
    }

    pub fn get_or_compute(&mut self, spec: SeriesSpec, limit: usize) -> Result<CoefficientTable> {
        if let Some(table) = self.lookup(spec, limit) {
            return Ok(table);
        }
        let table = coefficients(spec, limit)?;
        self.entries.insert((spec, limit), table.values.clone());
        self.save()?;
        Ok(table)
    }

    pub fn save(&self) -> Result<()> {
        let doc = CacheDocument {
            entries: self
                .entries
                .iter()
                .map(|((spec, limit), values)| CacheEntry {
                    kind: spec.kind,
                    r: spec.r,
                    l: spec.l,
                    limit: *limit,
                    values: values.iter().map(|v| v.to_string()).collect(),
                })
                .collect(),
        };
        let text = serde_json::to_string_pretty(&doc)?;
        std::fs::write(&self.path, text)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<Integer> {
        v.iter().map(|&x| Integer::from(x)).collect()
    }

    /// Direct expansion of prod_{n=1}^{N} (1 - q^n).
    fn euler_by_product(limit: usize) -> Vec<Integer> {
        let mut c = vec![Integer::new(); limit + 1];
        c[0] = Integer::from(1);
        for n in 1..=limit {
            for i in (n..=limit).rev() {
                let prev = c[i - n].clone();
                c[i] -= prev;
            }
        }
        c
    }

    /// p(n) by the pentagonal recurrence.
    fn partitions(limit: usize) -> Vec<Integer> {
        let mut p = vec![Integer::new(); limit + 1];
        p[0] = Integer::from(1);
        for n in 1..=limit as i64 {
            let mut acc = Integer::new();
            for j in 1i64.. {
                let g1 = j * (3 * j - 1) / 2;
                if g1 > n {
                    break;
                }
                let sign = if j % 2 == 1 { 1 } else { -1 };
                acc += Integer::from(&p[(n - g1) as usize] * sign);
                let g2 = j * (3 * j + 1) / 2;
                if g2 <= n {
                    acc += Integer::from(&p[(n - g2) as usize] * sign);
                }
            }
            p[n as usize] = acc;
        }
        p
    }

    #[test]
    fn euler_examples() {
        assert_eq!(euler_coeffs(7).values, ints(&[1, -1, -1, 0, 0, 1, 0, 1]));
        assert_eq!(euler_coeffs(0).values, ints(&[1]));
        assert_eq!(euler_coeffs(2).values, ints(&[1, -1, -1]));
        assert_eq!(euler_coeffs(200).values, euler_by_product(200));
    }

    #[test]
    fn pow_examples() {
        let e4 = euler_coeffs(4).values;
        assert_eq!(power_series_pow(&e4, -1, 4).unwrap(), ints(&[1, 1, 2, 3, 5]));
        let p = partitions(3);
        assert_eq!(multiply(&p, &p, 3), ints(&[1, 2, 5, 10]));
        assert_eq!(power_series_pow(&euler_coeffs(3).values, -2, 3).unwrap(), ints(&[1, 2, 5, 10]));
        let t = ints(&[1, 3, -2, 7, 0, 5]);
        assert_eq!(power_series_pow(&t, 1, 5).unwrap(), t);
        assert_eq!(power_series_pow(&t, 0, 5).unwrap(), ints(&[1, 0, 0, 0, 0, 0]));
    }

    #[test]
    fn pow_rejects_non_unit_constant() {
        let t = ints(&[2, 1]);
        assert!(matches!(power_series_pow(&t, -1, 4), Err(Error::NonUnitConstant { .. })));
        assert_eq!(power_series_pow(&t, 2, 3).unwrap(), ints(&[4, 4, 1, 0]));
    }

    #[test]
    fn pow_with_negative_unit_constant() {
        let t = ints(&[-1, 1]);
        // (-1 + q)^-1 = -(1 + q + q^2 + ...)
        assert_eq!(power_series_pow(&t, -1, 3).unwrap(), ints(&[-1, -1, -1, -1]));
        // (-1 + q)^2 = 1 - 2q + q^2
        assert_eq!(power_series_pow(&t, 2, 3).unwrap(), ints(&[1, -2, 1, 0]));
    }

    #[test]
    fn partition_numbers_match_recurrence() {
        let table = coefficients(SeriesSpec::p_r(1), 300).unwrap();
        assert_eq!(table.values, partitions(300));
        assert_eq!(table.values[100], Integer::from(190569292u64));
    }

    #[test]
    fn coefficient_examples() {
        let t = coefficients(SeriesSpec::b_l_r(50, 3), 7).unwrap();
        assert_eq!(t.values[7], Integer::from(420621700u64));
        // 3-regular partitions of 4: {4}, {2,2}, {2,1,1}, {1,1,1,1}
        let t = coefficients(SeriesSpec::b_l_r(1, 3), 4).unwrap();
        assert_eq!(t.values[4], 4);
        let mex = SeriesSpec::new(SeriesKind::SigmaMex, None, None).unwrap();
        assert_eq!(mex.r, 2);
        assert_eq!(coefficients(mex, 2).unwrap().values[2], 3);
        let bar = SeriesSpec::new(SeriesKind::SigmaMexBar, None, None).unwrap();
        assert_eq!(coefficients(bar, 2).unwrap().values[2], 6);
    }

    #[test]
    fn spec_validation() {
        assert!(SeriesSpec::new(SeriesKind::SigmaMex, Some(3), None).is_err());
        assert!(SeriesSpec::new(SeriesKind::BLR, Some(1), None).is_err());
        assert!(SeriesSpec::new(SeriesKind::BLR, Some(1), Some(1)).is_err());
        assert!(SeriesSpec::new(SeriesKind::PR, Some(1), Some(3)).is_err());
        assert!(SeriesSpec::new(SeriesKind::PR, Some(0), None).is_err());
        assert!(SeriesSpec::new(SeriesKind::PDR, Some(4), Some(3)).is_err());
        assert_eq!(SeriesSpec::new(SeriesKind::PDR, Some(4), None).unwrap().l, Some(2));
        assert_eq!("b_l_r".parse::<SeriesKind>().unwrap(), SeriesKind::BLR);
    }

    #[test]
    fn leading_coefficient_is_one() {
        for kind in SeriesKind::ALL {
            let l = if kind == SeriesKind::BLR { Some(5) } else { None };
            let spec = SeriesSpec::new(
                kind,
                Some(match kind {
                    SeriesKind::SigmaMex => 2,
                    SeriesKind::SigmaMexBar => 3,
                    _ => 4,
                }),
                l,
            )
            .unwrap();
            let t = coefficients(spec, 10).unwrap();
            assert_eq!(t.values.len(), 11);
            assert_eq!(t.values[0], 1);
        }
    }

    #[test]
    fn truncation_and_lookup() {
        let t = coefficients(SeriesSpec::p_r(2), 20).unwrap();
        assert_eq!(t.truncated(5).unwrap().values, t.values[..=5].to_vec());
        assert!(t.truncated(21).is_err());
        assert!(matches!(t.get(21), Err(Error::OutOfRange { index: 21, limit: 20 })));
    }

    #[test]
    fn cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.json");
        let spec = SeriesSpec::b_l_r(12, 6);
        {
            let mut cache = CoefficientCache::open(&path).unwrap();
            assert!(cache.is_empty());
            let t = cache.get_or_compute(spec, 30).unwrap();
            assert_eq!(t.values[22], Integer::from(299225122470u64));
        }
        let text = std::fs::read_to_string(&path).unwrap();
        let cache = CoefficientCache::open(&path).unwrap();
        assert_eq!(cache.len(), 1);
        assert_eq!(cache.lookup(spec, 22).unwrap().values[22], Integer::from(299225122470u64));
        assert!(cache.lookup(spec, 31).is_none());
        cache.save().unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), text);
    }

    /// prod_n (1 - q^(l n))^r / (1 - q^n)^r by repeated multiplication and geometric series.
    fn regular_by_product(r: u32, l: usize, limit: usize) -> Vec<Integer> {
        let mut c = vec![Integer::new(); limit + 1];
        c[0] = Integer::from(1);
        for _ in 0..r {
            for n in 1..=limit {
                // times 1 / (1 - q^n)
                for i in n..=limit {
                    let prev = c[i - n].clone();
                    c[i] += prev;
                }
            }
            for n in (l..=limit).step_by(l) {
                for i in (n..=limit).rev() {
                    let prev = c[i - n].clone();
                    c[i] -= prev;
                }
            }
        }
        c
    }

    #[test]
    fn regular_matches_direct_product() {
        for r in 1..=4 {
            for l in [2, 3, 5, 6] {
                let got = coefficients(SeriesSpec::b_l_r(r, l), 60).unwrap();
                assert_eq!(got.values, regular_by_product(r, l as usize, 60), "r={r} l={l}");
            }
        }
    }

    #[test]
    fn two_regular_is_distinct_parts() {
        for r in 1..=5 {
            let b = coefficients(SeriesSpec::b_l_r(r, 2), 100).unwrap();
            let pd = coefficients(SeriesSpec::new(SeriesKind::PDR, Some(r), None).unwrap(), 100).unwrap();
            assert_eq!(b.values, pd.values, "r={r}");
        }
    }

    #[test]
    fn colored_partitions_convolve() {
        for (r1, r2) in [(1, 1), (1, 2), (2, 3)] {
            let a = coefficients(SeriesSpec::p_r(r1), 80).unwrap();
            let b = coefficients(SeriesSpec::p_r(r2), 80).unwrap();
            let sum = coefficients(SeriesSpec::p_r(r1 + r2), 80).unwrap();
            assert_eq!(multiply(&a.values, &b.values, 80), sum.values);
        }
    }

    #[test]
    fn powers_are_mutual_inverses() {
        let mut unit = vec![Integer::new(); 81];
        unit[0] = Integer::from(1);
        for r in 1..=5 {
            let a = coefficients(SeriesSpec::a_r(r), 80).unwrap();
            let p = coefficients(SeriesSpec::p_r(r), 80).unwrap();
            assert_eq!(multiply(&a.values, &p.values, 80), unit, "r={r}");
        }
    }

    #[test]
    fn sign_patterns() {
        for r in 1..=5 {
            let mut specs = vec![SeriesSpec::p_r(r), SeriesSpec::new(SeriesKind::PDR, Some(r), None).unwrap()];
            specs.extend([2, 3, 5, 6].map(|l| SeriesSpec::b_l_r(r, l)));
            for spec in specs {
                let t = coefficients(spec, 100).unwrap();
                assert!(t.values.iter().all(|v| *v >= 0), "{spec:?}");
            }
            let a = coefficients(SeriesSpec::a_r(r), 100).unwrap();
            let bounded = a.values.iter().all(|v| v.clone().abs() <= 1);
            assert_eq!(bounded, r == 1, "r={r}");
        }
    }
}
