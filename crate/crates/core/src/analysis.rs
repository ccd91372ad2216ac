//! Closed-form parameters of the scheme families and a memory-rate comparison.
//!
//! Every ratio is an exact [`BigRational`]; decimals appear only in CSV output.

use std::cmp::Ordering;
use std::fmt;

use itertools::Itertools;
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::combinat::binomial;
use crate::construct::{Construction1Params, Construction2Params, ParamError, Variant};
use crate::model::PdaArray;
use crate::validate::validate;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("invalid arguments: {0}")]
    InvalidArguments(String),
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("array is not a CPDA: {0}")]
    NotCpda(String),
    #[error("malformed grid: {0}")]
    Grid(String),
}

impl From<ParamError> for AnalysisError {
    fn from(e: ParamError) -> Self {
        AnalysisError::InvalidArguments(e.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    C1P,
    C1PPrime,
    C2,
    /// Grouped MN arrays, one group of users per relay partition.
    Scheme2,
    /// Grouped subset arrays with one relay fewer.
    Scheme3,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::C1P => "c1p",
            Family::C1PPrime => "c1pp",
            Family::C2 => "c2",
            Family::Scheme2 => "scheme2",
            Family::Scheme3 => "scheme3",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `(K, F, Z, S)` of the underlying array.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArrayCounts {
    pub k: BigUint,
    pub f: BigUint,
    pub z: BigUint,
    pub s: BigUint,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemeParams {
    pub family: Family,
    /// Free parameters, e.g. `b=2;lambda=1` or `t=3`.
    pub params: String,
    pub k: BigUint,
    pub h: usize,
    pub r: usize,
    pub memory_ratio: BigRational,
    pub rate: BigRational,
    /// Rows of the array behind the scheme.
    pub rows: BigUint,
    /// Pieces each file is cut into for integral transmissions.
    pub f_eff: BigUint,
    pub counts: Option<ArrayCounts>,
    pub source: &'static str,
}

impl SchemeParams {
    /// Packet count when every relay's share is counted as separate packets: `H * rows`.
    pub fn relay_split_packets(&self) -> BigUint {
        BigUint::from(self.h) * &self.rows
    }
}

fn b(n: usize, k: usize) -> BigUint {
    binomial(n as u64, k as u64)
}

fn ratio(num: BigUint, den: BigUint) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn one_minus(num: BigUint, den: BigUint) -> BigRational {
    BigRational::one() - ratio(num, den)
}

/// Closed forms of the subset construction for one symbol rule.
pub fn params_construction1(
    h: usize,
    r: usize,
    bb: usize,
    lambda: usize,
    variant: Variant,
) -> Result<SchemeParams, AnalysisError> {
    let p = Construction1Params::new(h, r, bb, lambda)?;
    let m = p.core_size();
    let f = b(h, bb);
    let non_stars = b(r, lambda) * b(h - r, bb - lambda);
    let z = &f - &non_stars;
    let (s, w, family, source) = match variant {
        Variant::P => (
            b(h, m) * b(h - m, lambda),
            lambda,
            Family::C1P,
            "subset construction, symbols (A u B - I, I)",
        ),
        Variant::PPrime => (
            b(h, m) * b(m, r - lambda),
            r - lambda,
            Family::C1PPrime,
            "subset construction, symbols (A u B - I, A - B)",
        ),
    };
    Ok(SchemeParams {
        family,
        params: format!("b={bb};lambda={lambda}"),
        k: b(h, r),
        h,
        r,
        memory_ratio: one_minus(non_stars, f.clone()),
        rate: ratio(s.clone(), BigUint::from(h) * &f),
        rows: f.clone(),
        f_eff: BigUint::from(w) * &f,
        counts: Some(ArrayCounts {
            k: b(h, r),
            f,
            z,
            s,
        }),
        source,
    })
}

/// Closed forms of the generalized construction.
pub fn params_construction2(
    h: usize,
    r: usize,
    bb: usize,
    lambda: usize,
) -> Result<SchemeParams, AnalysisError> {
    let p = Construction2Params::new(h, r, bb, lambda)?;
    let f = b(h, bb) * b(bb, lambda);
    let non_stars = b(h - r, lambda) * b(r, bb - lambda);
    let z = &f - &non_stars;
    let s = b(h, r + lambda) * b(r + lambda, r + lambda - bb);
    Ok(SchemeParams {
        family: Family::C2,
        params: format!("b={bb};lambda={lambda}"),
        k: b(h, r),
        h,
        r,
        memory_ratio: one_minus(non_stars, f.clone()),
        rate: ratio(s.clone(), BigUint::from(h) * &f),
        rows: f.clone(),
        f_eff: BigUint::from(p.width()) * &f,
        counts: Some(ArrayCounts {
            k: b(h, r),
            f,
            z,
            s,
        }),
        source: "generalized subset construction",
    })
}

fn require_divides(h: usize, r: usize) -> Result<(), AnalysisError> {
    if r == 0 || !h.is_multiple_of(r) {
        return Err(AnalysisError::NotApplicable(format!(
            "r = {r} does not divide H = {h}"
        )));
    }
    Ok(())
}

/// Grouped MN baseline with `K1 = C(H-1, r-1)` users per group.
pub fn params_scheme2(h: usize, r: usize, t: usize) -> Result<SchemeParams, AnalysisError> {
    let k1 = scheme2_group_size(h, r)?;
    if t == 0 || BigUint::from(t) >= k1 {
        return Err(AnalysisError::InvalidArguments(format!(
            "need 1 <= t < K1 = {k1}, got t = {t}"
        )));
    }
    let rows = b(k1.to_usize().expect("K1 fits in usize"), t);
    Ok(scheme2_point(h, r, &k1, t, rows))
}

fn scheme2_group_size(h: usize, r: usize) -> Result<BigUint, AnalysisError> {
    if r == 0 || r >= h {
        return Err(AnalysisError::InvalidArguments(format!(
            "need 0 < r < H, got r = {r}, H = {h}"
        )));
    }
    require_divides(h, r)?;
    Ok(b(h - 1, r - 1))
}

fn scheme2_point(h: usize, r: usize, k1: &BigUint, t: usize, rows: BigUint) -> SchemeParams {
    let k = b(h, r);
    let mn = ratio(BigUint::from(t), k1.clone());
    let rate = BigRational::from_integer(BigInt::from(k.clone())) * (BigRational::one() - &mn)
        / (BigRational::from_integer(BigInt::from(h))
            * (BigRational::one() + BigRational::from_integer(BigInt::from(k1.clone())) * &mn));
    SchemeParams {
        family: Family::Scheme2,
        params: format!("t={t}"),
        k,
        h,
        r,
        memory_ratio: mn,
        rate,
        f_eff: BigUint::from(r) * &rows,
        rows,
        counts: None,
        source: "grouped MN arrays",
    }
}

/// Grouped subset arrays built at `(H-1, r-1, b, lambda)`.
pub fn params_scheme3(
    h: usize,
    r: usize,
    bb: usize,
    lambda: usize,
) -> Result<SchemeParams, AnalysisError> {
    if r < 2 || r >= h {
        return Err(AnalysisError::InvalidArguments(format!(
            "need 2 <= r < H, got r = {r}, H = {h}"
        )));
    }
    require_divides(h, r)?;
    Construction1Params::new(h - 1, r - 1, bb, lambda)
        .map_err(|e| AnalysisError::NotApplicable(e.0))?;
    if lambda > r - 1 {
        return Err(AnalysisError::NotApplicable(format!(
            "need lambda <= r - 1, got {lambda}"
        )));
    }
    let m = r + bb - 2 * lambda;
    let s_prime = b(h - 1, m - 1) * b(h - m, lambda).min(b(m - 1, r - 1 - lambda));
    let base_rows = b(h - 1, bb);
    let rows = BigUint::from(r) * &base_rows;
    Ok(SchemeParams {
        family: Family::Scheme3,
        params: format!("b={bb};lambda={lambda}"),
        k: b(h, r),
        h,
        r,
        memory_ratio: one_minus(b(r - 1, lambda) * b(h - r, bb - lambda), base_rows.clone()),
        rate: ratio(s_prime, BigUint::from(r) * &base_rows),
        f_eff: BigUint::from(h) * &rows,
        rows,
        counts: None,
        source: "grouped subset arrays",
    })
}

/// `R_h = (1/F) * sum over symbols s with h in I_s of 1/|I_s|`, from the array alone.
pub fn rate_from_array(array: &PdaArray<u32>) -> Result<Vec<BigRational>, AnalysisError> {
    let report = validate(array, true);
    if !report.passed() {
        return Err(AnalysisError::NotCpda(report.summary()));
    }
    let mut acc = vec![BigRational::zero(); array.h()];
    let f = BigInt::from(array.f());
    for info in array.symbol_index().iter() {
        let share = BigRational::new(BigInt::one(), &f * BigInt::from(info.width()));
        for relay in info.intersection.iter() {
            acc[relay - 1] += &share;
        }
    }
    Ok(acc)
}

/// All parameter tuples of the subset constructions at `(H, r)` whose closed
/// forms describe the generated arrays, with `M/N < 1`.
pub fn scheme1_candidates(h: usize, r: usize) -> Vec<SchemeParams> {
    let mut out = Vec::new();
    for bb in 1..h {
        for lambda in 1..=r.min(bb) {
            let Ok(p) = Construction1Params::new(h, r, bb, lambda) else {
                continue;
            };
            for variant in [Variant::P, Variant::PPrime] {
                if p.is_regular(variant) {
                    out.push(
                        params_construction1(h, r, bb, lambda, variant).expect("checked params"),
                    );
                }
            }
            if let Ok(c2) = params_construction2(h, r, bb, lambda) {
                out.push(c2);
            }
        }
    }
    out.retain(|p| p.memory_ratio < BigRational::one());
    out
}

pub fn scheme2_candidates(h: usize, r: usize) -> Vec<SchemeParams> {
    let Ok(k1) = scheme2_group_size(h, r) else {
        return Vec::new();
    };
    let k1_usize = k1.to_usize().expect("K1 fits in usize");
    let mut rows = BigUint::one();
    let mut out = Vec::with_capacity(k1_usize.saturating_sub(1));
    for t in 1..k1_usize {
        // C(K1, t) = C(K1, t-1) * (K1 - t + 1) / t
        rows = rows * BigUint::from(k1_usize - t + 1) / BigUint::from(t);
        out.push(scheme2_point(h, r, &k1, t, rows.clone()));
    }
    out
}

pub fn scheme3_candidates(h: usize, r: usize) -> Vec<SchemeParams> {
    let mut out = Vec::new();
    for bb in 1..h {
        for lambda in 1..=bb {
            if let Ok(p) = params_scheme3(h, r, bb, lambda) {
                out.push(p);
            }
        }
    }
    out.retain(|p| p.memory_ratio < BigRational::one());
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchMode {
    /// Take the candidate whose `M/N` is nearest to the grid point.
    Closest,
    /// Only candidates whose `M/N` equals the grid point.
    Exact,
}

/// Best candidate for one grid point: nearest `M/N`, then lower rate, then
/// smaller `F_eff`, then family and parameter text.
pub fn pick<'a>(
    candidates: &'a [SchemeParams],
    point: &BigRational,
    mode: MatchMode,
) -> Option<&'a SchemeParams> {
    candidates
        .iter()
        .filter(|c| mode == MatchMode::Closest || &c.memory_ratio == point)
        .min_by(|a, b| {
            (&a.memory_ratio - point)
                .abs()
                .cmp(&(&b.memory_ratio - point).abs())
                .then_with(|| a.rate.cmp(&b.rate))
                .then_with(|| a.f_eff.cmp(&b.f_eff))
                .then_with(|| a.family.cmp(&b.family))
                .then_with(|| a.params.cmp(&b.params))
        })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComparisonRow {
    pub memory_ratio: BigRational,
    pub scheme1: Option<SchemeParams>,
    pub scheme2: Option<SchemeParams>,
    pub scheme3: Option<SchemeParams>,
}

impl ComparisonRow {
    /// `R_h` of Scheme1 over Scheme2's, when both exist.
    pub fn rate_over_scheme2(&self) -> Option<BigRational> {
        let (s1, s2) = (self.scheme1.as_ref()?, self.scheme2.as_ref()?);
        (!s2.rate.is_zero()).then(|| &s1.rate / &s2.rate)
    }
}

/// Grid and matching rules for [`compare_table`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompareOptions {
    /// `None` uses every distinct Scheme1 memory ratio.
    pub grid: Option<Vec<BigRational>>,
    pub scheme1_mode: MatchMode,
    pub scheme3_mode: MatchMode,
}

impl Default for CompareOptions {
    fn default() -> Self {
        CompareOptions {
            grid: None,
            scheme1_mode: MatchMode::Closest,
            scheme3_mode: MatchMode::Exact,
        }
    }
}

/// One row per grid point, sorted by memory ratio. Scheme2 is always matched to the closest `t`.
pub fn compare_table(h: usize, r: usize, options: &CompareOptions) -> Vec<ComparisonRow> {
    let s1 = scheme1_candidates(h, r);
    let s2 = scheme2_candidates(h, r);
    let s3 = scheme3_candidates(h, r);
    let grid: Vec<BigRational> = match &options.grid {
        Some(g) => g.iter().cloned().sorted().dedup().collect(),
        None => s1
            .iter()
            .map(|c| c.memory_ratio.clone())
            .sorted()
            .dedup()
            .collect(),
    };
    grid.into_iter()
        .map(|point| ComparisonRow {
            scheme1: pick(&s1, &point, options.scheme1_mode).cloned(),
            scheme2: pick(&s2, &point, MatchMode::Closest).cloned(),
            scheme3: pick(&s3, &point, options.scheme3_mode).cloned(),
            memory_ratio: point,
        })
        .collect()
}

/// A comparison row where Scheme1 does not beat a baseline as claimed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DominanceViolation {
    pub memory_ratio: BigRational,
    pub baseline: Family,
    pub message: String,
}

impl fmt::Display for DominanceViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "M/N={} ({}) vs {}: {}",
            self.memory_ratio,
            decimal(&self.memory_ratio, 6),
            self.baseline,
            self.message
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DominanceReport {
    pub scheme2_rows: usize,
    pub scheme3_rows: usize,
    pub violations: Vec<DominanceViolation>,
    /// Largest Scheme1/Scheme2 rate quotient over the table.
    pub max_rate_over_scheme2: Option<BigRational>,
}

impl DominanceReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Scheme1 must need fewer packets than Scheme2 wherever both apply, and both
/// a strictly lower rate and fewer packets than Scheme3 at equal memory ratio.
pub fn check_dominance(rows: &[ComparisonRow]) -> DominanceReport {
    let mut violations = Vec::new();
    let (mut scheme2_rows, mut scheme3_rows) = (0, 0);
    for row in rows {
        let Some(s1) = &row.scheme1 else { continue };
        if let Some(s2) = &row.scheme2 {
            scheme2_rows += 1;
            if s1.f_eff >= s2.f_eff {
                violations.push(DominanceViolation {
                    memory_ratio: row.memory_ratio.clone(),
                    baseline: Family::Scheme2,
                    message: format!(
                        "F_eff {} ({} {}) >= {} ({})",
                        s1.f_eff, s1.family, s1.params, s2.f_eff, s2.params
                    ),
                });
            }
        }
        if let Some(s3) = row
            .scheme3
            .as_ref()
            .filter(|s3| s3.memory_ratio == s1.memory_ratio)
        {
            scheme3_rows += 1;
            let mut problems = Vec::new();
            if s1.rate >= s3.rate {
                problems.push(format!("R_h {} >= {}", s1.rate, s3.rate));
            }
            if s1.f_eff >= s3.f_eff {
                problems.push(format!("F_eff {} >= {}", s1.f_eff, s3.f_eff));
            }
            if !problems.is_empty() {
                violations.push(DominanceViolation {
                    memory_ratio: row.memory_ratio.clone(),
                    baseline: Family::Scheme3,
                    message: format!(
                        "{} ({} {} vs {})",
                        problems.join(", "),
                        s1.family,
                        s1.params,
                        s3.params
                    ),
                });
            }
        }
    }
    DominanceReport {
        scheme2_rows,
        scheme3_rows,
        violations,
        max_rate_over_scheme2: rows
            .iter()
            .filter_map(ComparisonRow::rate_over_scheme2)
            .max(),
    }
}

/// Rounds to `digits` decimal places, half away from zero.
pub fn decimal(value: &BigRational, digits: usize) -> String {
    let scale = BigInt::from(10u32).pow(digits as u32);
    let scaled = value * BigRational::from_integer(scale.clone());
    let rounded = scaled.round().to_integer();
    let (int, frac) = rounded.abs().div_rem(&scale);
    let sign = if rounded.is_negative() { "-" } else { "" };
    if digits == 0 {
        return format!("{sign}{int}");
    }
    format!("{sign}{int}.{:0>width$}", frac.to_string(), width = digits)
}

pub const CSV_HEADER: &str = "H,r,family,params,memory_ratio_num,memory_ratio_den,rate_num,rate_den,F_eff,applicable,grid_num,grid_den,memory_ratio_decimal,rate_decimal,rate_over_scheme2";

fn csv_line(
    h: usize,
    r: usize,
    label: &str,
    point: &BigRational,
    p: Option<&SchemeParams>,
    extra: &str,
) -> String {
    match p {
        Some(p) => format!(
            "{h},{r},{label},{}:{},{},{},{},{},{},true,{},{},{},{},{extra}",
            p.family,
            p.params,
            p.memory_ratio.numer(),
            p.memory_ratio.denom(),
            p.rate.numer(),
            p.rate.denom(),
            p.f_eff,
            point.numer(),
            point.denom(),
            decimal(&p.memory_ratio, 6),
            decimal(&p.rate, 6),
        ),
        None => format!(
            "{h},{r},{label},,,,,,,false,{},{},,,",
            point.numer(),
            point.denom()
        ),
    }
}

/// Three lines per row (scheme1, scheme2, scheme3) under [`CSV_HEADER`].
pub fn comparison_csv(h: usize, r: usize, rows: &[ComparisonRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        let quotient = row
            .rate_over_scheme2()
            .map(|q| decimal(&q, 6))
            .unwrap_or_default();
        for (label, p, extra) in [
            ("scheme1", row.scheme1.as_ref(), quotient.as_str()),
            ("scheme2", row.scheme2.as_ref(), ""),
            ("scheme3", row.scheme3.as_ref(), ""),
        ] {
            out.push_str(&csv_line(h, r, label, &row.memory_ratio, p, extra));
            out.push('\n');
        }
    }
    out
}

/// One CSV line for a single parameter set, same columns as the comparison.
pub fn params_csv(p: &SchemeParams) -> String {
    format!(
        "{CSV_HEADER}\n{}\n",
        csv_line(p.h, p.r, p.family.name(), &p.memory_ratio, Some(p), "")
    )
}

/// Parses `p/q`, integers or plain decimals such as `0.25`.
pub fn parse_ratio(text: &str) -> Result<BigRational, AnalysisError> {
    let bad = || AnalysisError::Grid(format!("{text:?} is not a ratio"));
    let digits = |s: &str| !s.is_empty() && s.bytes().all(|c| c.is_ascii_digit());
    let value = if let Some((n, d)) = text.split_once('/') {
        if !digits(n) || !digits(d) {
            return Err(bad());
        }
        let d: BigInt = d.parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        BigRational::new(n.parse().map_err(|_| bad())?, d)
    } else if let Some((i, f)) = text.split_once('.') {
        if !digits(i) || !digits(f) {
            return Err(bad());
        }
        let scale = BigInt::from(10u32).pow(f.len() as u32);
        let whole: BigInt = format!("{i}{f}").parse().map_err(|_| bad())?;
        BigRational::new(whole, scale)
    } else if digits(text) {
        BigRational::from_integer(text.parse().map_err(|_| bad())?)
    } else {
        return Err(bad());
    };
    if value > BigRational::one() {
        return Err(AnalysisError::Grid(format!("{text} exceeds 1")));
    }
    Ok(value)
}

/// Comma-separated ratios, or `start:stop:step` (inclusive of `stop` when hit exactly).
pub fn parse_grid(text: &str) -> Result<Vec<BigRational>, AnalysisError> {
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [start, stop, step] => {
            let (start, stop, step) = (parse_ratio(start)?, parse_ratio(stop)?, parse_ratio(step)?);
            if !step.is_positive() {
                return Err(AnalysisError::Grid("step must be positive".into()));
            }
            let mut out = Vec::new();
            let mut x = start;
            while x.cmp(&stop) != Ordering::Greater {
                out.push(x.clone());
                x += &step;
            }
            Ok(out)
        }
        [list] => list.split(',').map(parse_ratio).collect(),
        _ => Err(AnalysisError::Grid(format!(
            "{text:?} is neither a list nor start:stop:step"
        ))),
    }
}
