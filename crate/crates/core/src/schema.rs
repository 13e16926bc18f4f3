//! k-schema arithmetic.
//!
//! A k-schema is a pair of sequences `(j_1..j_n)`, `(x_1..x_n)` with every
//! `j_i` a divisor of `k`, strictly increasing and at most `k/3`. Subphase `i`
//! presents intervals of bandwidth `j_i/k` until `x_i` new colors appear.
//!
//! Per subphase the schema determines
//! - `chi_i`: marked intervals so far, `x_1 + ... + x_i`;
//! - `gamma_i`: bins first-fit needs for the marked intervals, packing `x_q`
//!   items of size `j_q` into bins of capacity `k` in subphase order;
//! - `delta_i`: new colors forceable in subphase `i`,
//!   `k - gamma_{i-1} - chi_{i-1} + ceil(j_i chi_{i-1} / k)`;
//! - `scalable_cap_i`: `floor(k + (1/k) sum_{q<i} (j_i - j_q - k) x_q)`.
//!
//! All quantities are exact big integers so that `k` in the 10^17 range works.

use std::fmt::Write as _;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::exactnum::{BigInt, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SchemaError {
    #[error("k must be positive, got {0}")]
    KNotPositive(BigInt),
    #[error("row {index}: j = {j} does not divide k = {k}")]
    NotDivisor { index: usize, j: BigInt, k: BigInt },
    #[error("row {index}: j = {j} is not larger than the previous row's j")]
    NotIncreasing { index: usize, j: BigInt },
    #[error("row {index}: j = {j} exceeds k/3")]
    ExceedsThird { index: usize, j: BigInt },
    #[error("row {index}: x = {x} must be at least 1")]
    XNotPositive { index: usize, x: BigInt },
    #[error("row {index}: j = {j} must be positive")]
    JNotPositive { index: usize, j: BigInt },
    #[error("index {index} out of range 0..={n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("not a k-strategy: subphase {index} asks for x = {x} > delta = {delta}")]
    NotAStrategy { index: usize, x: BigInt, delta: BigInt },
    #[error("item size {size} exceeds bin capacity {capacity}")]
    SizeExceedsCapacity { size: BigInt, capacity: BigInt },
    #[error("malformed schema JSON: {0}")]
    Json(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Row {
    pub j: BigInt,
    pub x: BigInt,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct KSchema {
    k: BigInt,
    rows: Vec<Row>,
}

fn big(v: u64) -> BigInt {
    BigInt::from(v)
}

impl KSchema {
    /// Validates a k-schema, including the `j_n <= k/3` bound.
    pub fn new(k: BigInt, rows: Vec<Row>) -> Result<Self, SchemaError> {
        Self::validate(&k, &rows, true)?;
        Ok(KSchema { k, rows })
    }

    /// Like [`KSchema::new`] but without the `j_n <= k/3` bound. The separation
    /// phase is well defined without it; the one-row schema `([1],[k])` for
    /// `k < 3` needs this.
    pub fn new_unbounded(k: BigInt, rows: Vec<Row>) -> Result<Self, SchemaError> {
        Self::validate(&k, &rows, false)?;
        Ok(KSchema { k, rows })
    }

    pub fn from_u64(k: u64, rows: &[(u64, u64)]) -> Result<Self, SchemaError> {
        Self::new(big(k), rows.iter().map(|&(j, x)| Row { j: big(j), x: big(x) }).collect())
    }

    fn validate(k: &BigInt, rows: &[Row], third: bool) -> Result<(), SchemaError> {
        if !k.is_positive() {
            return Err(SchemaError::KNotPositive(k.clone()));
        }
        for (i, row) in rows.iter().enumerate() {
            let index = i + 1;
            if !row.j.is_positive() {
                return Err(SchemaError::JNotPositive { index, j: row.j.clone() });
            }
            if !(k % &row.j).is_zero() {
                return Err(SchemaError::NotDivisor { index, j: row.j.clone(), k: k.clone() });
            }
            if i > 0 && row.j <= rows[i - 1].j {
                return Err(SchemaError::NotIncreasing { index, j: row.j.clone() });
            }
            if third && &row.j * 3u32 > *k {
                return Err(SchemaError::ExceedsThird { index, j: row.j.clone() });
            }
            if row.x < BigInt::one() {
                return Err(SchemaError::XNotPositive { index, x: row.x.clone() });
            }
        }
        Ok(())
    }

    /// The schema `([1], [k])`.
    pub fn single(k: u64) -> Result<Self, SchemaError> {
        Self::new_unbounded(big(k), vec![Row { j: BigInt::one(), x: big(k) }])
    }

    pub fn k(&self) -> &BigInt {
        &self.k
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    /// Row `i`, 1-based.
    pub fn row(&self, i: usize) -> Result<&Row, SchemaError> {
        if i == 0 || i > self.n() {
            return Err(SchemaError::IndexOutOfRange { index: i, n: self.n() });
        }
        Ok(&self.rows[i - 1])
    }

    fn check_prefix(&self, i: usize) -> Result<(), SchemaError> {
        if i > self.n() {
            return Err(SchemaError::IndexOutOfRange { index: i, n: self.n() });
        }
        Ok(())
    }

    /// The a-scaled schema `(a j_i, a x_i)` over `a k`.
    pub fn scale(&self, a: &BigInt) -> KSchema {
        assert!(a.is_positive(), "scale factor must be positive");
        KSchema {
            k: &self.k * a,
            rows: self.rows.iter().map(|r| Row { j: &r.j * a, x: &r.x * a }).collect(),
        }
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Array(vec![Value::String(r.j.to_string()), Value::String(r.x.to_string())]))
            .collect();
        serde_json::json!({ "k": self.k.to_string(), "rows": rows })
    }

    /// Parses `{"k": "...", "rows": [["j", "x"], ...]}`. Numbers may be given
    /// as strings or JSON integers.
    pub fn from_json(v: &Value) -> Result<Self, SchemaError> {
        fn num(v: &Value) -> Result<BigInt, SchemaError> {
            let s = match v {
                Value::String(s) => s.clone(),
                Value::Number(n) if n.is_i64() || n.is_u64() => n.to_string(),
                other => return Err(SchemaError::Json(format!("expected an integer, got {other}"))),
            };
            s.trim().parse().map_err(|_| SchemaError::Json(format!("invalid integer `{s}`")))
        }
        let k = num(v.get("k").ok_or_else(|| SchemaError::Json("missing `k`".into()))?)?;
        let rows = v
            .get("rows")
            .and_then(Value::as_array)
            .ok_or_else(|| SchemaError::Json("missing `rows` array".into()))?;
        let rows = rows
            .iter()
            .map(|r| match r.as_array().map(Vec::as_slice) {
                Some([j, x]) => Ok(Row { j: num(j)?, x: num(x)? }),
                _ => Err(SchemaError::Json(format!("row must be a pair, got {r}"))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        KSchema::new(k, rows)
    }

    pub fn from_json_str(s: &str) -> Result<Self, SchemaError> {
        let v: Value = serde_json::from_str(s).map_err(|e| SchemaError::Json(e.to_string()))?;
        Self::from_json(&v)
    }
}

/// Table 1 of the construction: a 120-strategy forcing 492 colors.
pub fn s120() -> KSchema {
    KSchema::from_u64(
        120,
        &[(1, 120), (2, 1), (3, 1), (4, 1), (5, 1), (6, 1), (8, 2), (10, 2), (12, 2), (15, 4), (20, 5), (24, 4), (30, 8)],
    )
    .expect("fixture is a valid schema")
}

/// Table 2: the scalable variant of [`s120`].
pub fn s120_scalable() -> KSchema {
    KSchema::from_u64(
        120,
        &[(1, 120), (2, 1), (3, 1), (4, 1), (5, 1), (6, 1), (8, 2), (10, 2), (12, 2), (15, 3), (20, 6), (24, 4), (30, 8)],
    )
    .expect("fixture is a valid schema")
}

/// Built-in fixture by name: `s120` or `s120-scalable`.
pub fn builtin(name: &str) -> Option<KSchema> {
    match name {
        "s120" => Some(s120()),
        "s120-scalable" => Some(s120_scalable()),
        _ => None,
    }
}

// ---------------------------------------------------------------------------
// First-fit packing
// ---------------------------------------------------------------------------

/// A maximal run of consecutive bins (in creation order) with equal load.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Run {
    #[serde(with = "crate::exactnum::bigint_str")]
    pub load: BigInt,
    #[serde(with = "crate::exactnum::bigint_str")]
    pub count: BigInt,
}

/// Run-length compressed first-fit bins in creation order.
///
/// Bins whose free space is below the smallest size still to come can be
/// retired: they keep counting towards [`BinState::bin_count`] but are no
/// longer scanned.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinState {
    capacity: BigInt,
    runs: Vec<Run>,
    retired: BigInt,
}

impl BinState {
    pub fn new(capacity: BigInt) -> Self {
        BinState { capacity, runs: Vec::new(), retired: BigInt::zero() }
    }

    pub fn capacity(&self) -> &BigInt {
        &self.capacity
    }

    /// Live runs in creation order.
    pub fn runs(&self) -> &[Run] {
        &self.runs
    }

    pub fn bin_count(&self) -> BigInt {
        self.runs.iter().fold(self.retired.clone(), |acc, r| acc + &r.count)
    }

    /// Bin loads one by one. Only meaningful when nothing was retired and the
    /// bin count is small.
    pub fn expand(&self) -> Vec<BigInt> {
        assert!(self.retired.is_zero(), "cannot expand a state with retired bins");
        let mut out = Vec::new();
        for r in &self.runs {
            let mut c = r.count.clone();
            while c.is_positive() {
                out.push(r.load.clone());
                c -= 1;
            }
        }
        out
    }

    /// Retires every bin that cannot take an item of `size`.
    pub fn retire_below(&mut self, size: &BigInt) {
        let limit = &self.capacity - size;
        let mut kept = Vec::with_capacity(self.runs.len());
        for r in self.runs.drain(..) {
            if r.load > limit {
                self.retired += r.count;
            } else {
                kept.push(r);
            }
        }
        self.runs = kept;
        self.coalesce();
    }

    fn coalesce(&mut self) {
        let mut merged: Vec<Run> = Vec::with_capacity(self.runs.len());
        for r in self.runs.drain(..) {
            if r.count.is_zero() {
                continue;
            }
            match merged.last_mut() {
                Some(last) if last.load == r.load => last.count += r.count,
                _ => merged.push(r),
            }
        }
        self.runs = merged;
    }

    /// Packs `count` items of `size` one after another with first-fit.
    pub fn pack(&mut self, size: &BigInt, count: &BigInt) -> Result<(), SchemaError> {
        if size > &self.capacity || !size.is_positive() {
            return Err(SchemaError::SizeExceedsCapacity { size: size.clone(), capacity: self.capacity.clone() });
        }
        let mut rem = count.clone();
        if !rem.is_positive() {
            return Ok(());
        }
        let mut out: Vec<Run> = Vec::with_capacity(self.runs.len() + 3);
        for r in self.runs.drain(..) {
            let free = &self.capacity - &r.load;
            if rem.is_zero() || &free < size {
                out.push(r);
                continue;
            }
            // Identical items fill the first fitting bin before moving on.
            let per_bin = free / size;
            let whole = &r.count * &per_bin;
            if rem >= whole {
                out.push(Run { load: &r.load + &per_bin * size, count: r.count });
                rem -= whole;
            } else {
                let (full, partial) = rem.div_rem(&per_bin);
                let mut left = r.count.clone();
                if full.is_positive() {
                    left -= &full;
                    out.push(Run { load: &r.load + &per_bin * size, count: full });
                }
                if partial.is_positive() {
                    left -= 1;
                    out.push(Run { load: &r.load + &partial * size, count: BigInt::one() });
                }
                out.push(Run { load: r.load, count: left });
                rem = BigInt::zero();
            }
        }
        if rem.is_positive() {
            let per_bin = &self.capacity / size;
            let (full, partial) = rem.div_rem(&per_bin);
            if full.is_positive() {
                out.push(Run { load: &per_bin * size, count: full });
            }
            if partial.is_positive() {
                out.push(Run { load: partial * size, count: BigInt::one() });
            }
        }
        self.runs = out;
        self.coalesce();
        Ok(())
    }
}

/// First-fit packing of the batches `(size, count)` in order, items of a batch
/// arriving consecutively.
pub fn first_fit_pack(capacity: &BigInt, batches: &[(BigInt, BigInt)]) -> Result<BinState, SchemaError> {
    let mut state = BinState::new(capacity.clone());
    for (size, count) in batches {
        state.pack(size, count)?;
    }
    Ok(state)
}

// ---------------------------------------------------------------------------
// Derived quantities
// ---------------------------------------------------------------------------

/// Incremental evaluator of the per-subphase recurrences. Rows must arrive
/// with strictly increasing `j`, which lets the packer retire bins.
#[derive(Debug, Clone)]
pub struct Accumulator {
    k: BigInt,
    bins: BinState,
    chi: BigInt,
    weight: BigInt,
    gamma: BigInt,
}

impl Accumulator {
    pub fn new(k: &BigInt) -> Self {
        Accumulator {
            k: k.clone(),
            bins: BinState::new(k.clone()),
            chi: BigInt::zero(),
            weight: BigInt::zero(),
            gamma: BigInt::zero(),
        }
    }

    pub fn chi(&self) -> &BigInt {
        &self.chi
    }

    pub fn gamma(&self) -> &BigInt {
        &self.gamma
    }

    /// `sum_q j_q x_q` over the rows pushed so far.
    pub fn weight(&self) -> &BigInt {
        &self.weight
    }

    /// Delta for a next row with divisor `j`.
    pub fn delta(&self, j: &BigInt) -> BigInt {
        &self.k - &self.gamma - &self.chi + (j * &self.chi).div_ceil(&self.k)
    }

    /// Floor of the scalability bound for a next row with divisor `j`.
    pub fn scalable_cap(&self, j: &BigInt) -> BigInt {
        let num = &self.k * &self.k + (j - &self.k) * &self.chi - &self.weight;
        num.div_floor(&self.k)
    }

    pub fn push(&mut self, j: &BigInt, x: &BigInt) -> Result<(), SchemaError> {
        self.bins.retire_below(j);
        self.bins.pack(j, x)?;
        self.chi += x;
        self.weight += j * x;
        self.gamma = self.bins.bin_count();
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DerivedRow {
    pub index: usize,
    #[serde(with = "crate::exactnum::bigint_str")]
    pub j: BigInt,
    #[serde(with = "crate::exactnum::bigint_str")]
    pub x: BigInt,
    #[serde(with = "crate::exactnum::bigint_str")]
    pub chi: BigInt,
    #[serde(with = "crate::exactnum::bigint_str")]
    pub gamma: BigInt,
    #[serde(with = "crate::exactnum::bigint_str")]
    pub delta: BigInt,
    #[serde(with = "crate::exactnum::bigint_str")]
    pub scalable_cap: BigInt,
}

/// One derived row per subphase.
pub fn derive(s: &KSchema) -> Vec<DerivedRow> {
    let mut acc = Accumulator::new(s.k());
    let mut out = Vec::with_capacity(s.n());
    for (i, r) in s.rows().iter().enumerate() {
        let delta = acc.delta(&r.j);
        let scalable_cap = acc.scalable_cap(&r.j);
        acc.push(&r.j, &r.x).expect("schema rows fit the bins");
        out.push(DerivedRow {
            index: i + 1,
            j: r.j.clone(),
            x: r.x.clone(),
            chi: acc.chi().clone(),
            gamma: acc.gamma().clone(),
            delta,
            scalable_cap,
        });
    }
    out
}

fn prefix(s: &KSchema, i: usize) -> Accumulator {
    let mut acc = Accumulator::new(s.k());
    for r in &s.rows()[..i] {
        acc.push(&r.j, &r.x).expect("schema rows fit the bins");
    }
    acc
}

/// Number of marked intervals after subphase `i`.
pub fn chi(s: &KSchema, i: usize) -> Result<BigInt, SchemaError> {
    s.check_prefix(i)?;
    Ok(s.rows()[..i].iter().fold(BigInt::zero(), |acc, r| acc + &r.x))
}

/// First-fit bin count of the marked intervals after subphase `i`.
pub fn gamma(s: &KSchema, i: usize) -> Result<BigInt, SchemaError> {
    s.check_prefix(i)?;
    let batches: Vec<(BigInt, BigInt)> = s.rows()[..i].iter().map(|r| (r.j.clone(), r.x.clone())).collect();
    Ok(first_fit_pack(s.k(), &batches)?.bin_count())
}

/// New colors forceable in subphase `i`, closed form.
pub fn delta(s: &KSchema, i: usize) -> Result<BigInt, SchemaError> {
    let row = s.row(i)?;
    Ok(prefix(s, i - 1).delta(&row.j))
}

/// `ceil((j/k) ((k/j)(k - gamma) - chi ((k/j) - 1)))` evaluated over the
/// rationals; equals [`delta`].
pub fn delta_expanded(s: &KSchema, i: usize) -> Result<BigInt, SchemaError> {
    let row = s.row(i)?;
    let acc = prefix(s, i - 1);
    let k = Rational::from_integer(s.k().clone());
    let j = Rational::from_integer(row.j.clone());
    let ratio = &k / &j;
    let inner = &ratio * (&k - Rational::from_integer(acc.gamma().clone()))
        - Rational::from_integer(acc.chi().clone()) * (&ratio - Rational::one());
    Ok((j / k * inner).ceil().to_integer())
}

pub fn scalable_cap(s: &KSchema, i: usize) -> Result<BigInt, SchemaError> {
    let row = s.row(i)?;
    Ok(prefix(s, i - 1).scalable_cap(&row.j))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub index: usize,
    pub x: BigInt,
    pub bound: BigInt,
}

/// First subphase with `x_i > delta_i`, if any.
pub fn first_strategy_violation(s: &KSchema) -> Option<Violation> {
    derive(s)
        .into_iter()
        .find(|r| r.x > r.delta)
        .map(|r| Violation { index: r.index, x: r.x, bound: r.delta })
}

pub fn is_k_strategy(s: &KSchema) -> bool {
    first_strategy_violation(s).is_none()
}

/// First subphase breaking the scalability bound, if any.
pub fn first_scalability_violation(s: &KSchema) -> Option<Violation> {
    derive(s)
        .into_iter()
        .find(|r| r.x > r.scalable_cap)
        .map(|r| Violation { index: r.index, x: r.x, bound: r.scalable_cap })
}

pub fn is_scalable(s: &KSchema) -> bool {
    derive(s).iter().all(|r| r.x <= r.delta && r.x <= r.scalable_cap)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StrategyReport {
    #[serde(with = "crate::exactnum::bigint_str")]
    pub k: BigInt,
    #[serde(with = "crate::exactnum::bigint_str")]
    pub sum_x: BigInt,
    #[serde(with = "crate::exactnum::bigint_str")]
    pub gamma_n: BigInt,
    /// Colors forced against any algorithm, `sum x + 3(k - gamma_n) - 2`.
    #[serde(with = "crate::exactnum::bigint_str")]
    pub forced_colors: BigInt,
    #[serde(with = "crate::exactnum::rational_str")]
    pub absolute_ratio: Rational,
    /// `(sum x + 3(k - gamma_n)) / k`; a valid asymptotic bound only when
    /// `scalable` holds.
    #[serde(with = "crate::exactnum::rational_str")]
    pub asymptotic_ratio: Rational,
    pub scalable: bool,
}

impl StrategyReport {
    pub fn optimum_bound(&self) -> &BigInt {
        &self.k
    }
}

pub fn strategy_report(s: &KSchema) -> Result<StrategyReport, SchemaError> {
    let rows = derive(s);
    if let Some(r) = rows.iter().find(|r| r.x > r.delta) {
        return Err(SchemaError::NotAStrategy { index: r.index, x: r.x.clone(), delta: r.delta.clone() });
    }
    let scalable = rows.iter().all(|r| r.x <= r.scalable_cap);
    let sum_x = rows.last().map_or_else(BigInt::zero, |r| r.chi.clone());
    let gamma_n = rows.last().map_or_else(BigInt::zero, |r| r.gamma.clone());
    Ok(report_from(s.k(), sum_x, gamma_n, scalable))
}

pub(crate) fn report_from(k: &BigInt, sum_x: BigInt, gamma_n: BigInt, scalable: bool) -> StrategyReport {
    let tail = (k - &gamma_n) * 3u32;
    let forced = &sum_x + &tail - 2u32;
    StrategyReport {
        k: k.clone(),
        absolute_ratio: Rational::new(forced.clone(), k.clone()),
        asymptotic_ratio: Rational::new(&sum_x + &tail, k.clone()),
        forced_colors: forced,
        sum_x,
        gamma_n,
        scalable,
    }
}

/// Derived table as CSV with columns `j,x,chi,gamma,delta,scalable_cap`.
pub fn table_csv(s: &KSchema) -> String {
    let mut out = String::from("j,x,chi,gamma,delta,scalable_cap\n");
    for r in derive(s) {
        let _ = writeln!(out, "{},{},{},{},{},{}", r.j, r.x, r.chi, r.gamma, r.delta, r.scalable_cap);
    }
    out
}

/// Derived table as aligned text.
pub fn table_text(s: &KSchema) -> String {
    let rows = derive(s);
    let header = ["i", "j", "x", "chi", "gamma", "delta", "cap"];
    let cells: Vec<[String; 7]> = rows
        .iter()
        .map(|r| {
            [
                r.index.to_string(),
                r.j.to_string(),
                r.x.to_string(),
                r.chi.to_string(),
                r.gamma.to_string(),
                r.delta.to_string(),
                r.scalable_cap.to_string(),
            ]
        })
        .collect();
    let widths: Vec<usize> = (0..7)
        .map(|c| cells.iter().map(|r| r[c].len()).chain([header[c].len()]).max().unwrap_or(1))
        .collect();
    let mut out = String::new();
    let line = |vals: Vec<&str>, out: &mut String| {
        let parts: Vec<String> = vals.iter().zip(&widths).map(|(v, w)| format!("{v:>w$}")).collect();
        let _ = writeln!(out, "{}", parts.join("  "));
    };
    line(header.to_vec(), &mut out);
    for r in &cells {
        line(r.iter().map(String::as_str).collect(), &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(v: i64) -> BigInt {
        BigInt::from(v)
    }

    fn gammas(s: &KSchema) -> Vec<i64> {
        derive(s).iter().map(|r| i64::try_from(r.gamma.clone()).unwrap()).collect()
    }

    #[test]
    fn validation() {
        assert!(KSchema::from_u64(12, &[(1, 3), (4, 1)]).is_ok());
        assert!(matches!(KSchema::from_u64(12, &[(5, 1)]), Err(SchemaError::NotDivisor { .. })));
        assert!(matches!(KSchema::from_u64(12, &[(2, 1), (2, 1)]), Err(SchemaError::NotIncreasing { .. })));
        assert!(matches!(KSchema::from_u64(12, &[(6, 1)]), Err(SchemaError::ExceedsThird { .. })));
        assert!(matches!(KSchema::from_u64(12, &[(1, 0)]), Err(SchemaError::XNotPositive { .. })));
        assert!(matches!(KSchema::from_u64(0, &[]), Err(SchemaError::KNotPositive(_))));
        assert!(KSchema::single(2).is_ok());
        assert!(KSchema::from_u64(2, &[(1, 2)]).is_err());
    }

    #[test]
    fn packing_examples() {
        let st = first_fit_pack(&b(120), &[(b(1), b(120))]).unwrap();
        assert_eq!(st.bin_count(), b(1));
        assert_eq!(st.expand(), vec![b(120)]);
        let all: Vec<_> = s120().rows().iter().map(|r| (r.j.clone(), r.x.clone())).collect();
        assert_eq!(first_fit_pack(&b(120), &all).unwrap().bin_count(), b(6));
        let st = first_fit_pack(&b(120), &[(b(30), b(8))]).unwrap();
        assert_eq!(st.expand(), vec![b(120), b(120)]);
        assert!(matches!(
            first_fit_pack(&b(10), &[(b(11), b(1))]),
            Err(SchemaError::SizeExceedsCapacity { .. })
        ));
    }

    #[test]
    fn packing_splits_runs() {
        // One bin at load 6; the size-3 batch tops it up and opens a second bin.
        let mut st = first_fit_pack(&b(10), &[(b(2), b(3))]).unwrap();
        st.pack(&b(3), &b(3)).unwrap();
        st.pack(&b(1), &b(1)).unwrap();
        assert_eq!(st.expand(), vec![b(10), b(6)]);
        let mut st = BinState::new(b(12));
        st.pack(&b(4), &b(1)).unwrap();
        st.pack(&b(12), &b(1)).unwrap();
        st.pack(&b(4), &b(1)).unwrap();
        st.pack(&b(5), &b(1)).unwrap();
        assert_eq!(st.expand(), vec![b(8), b(12), b(5)]);
    }

    #[test]
    fn chi_values() {
        assert_eq!(chi(&s120(), 0).unwrap(), b(0));
        assert_eq!(chi(&s120(), 13).unwrap(), b(152));
        // 120 + 5*1 + 3*2 + 3 = 134
        assert_eq!(chi(&s120_scalable(), 10).unwrap(), b(134));
        assert!(matches!(chi(&s120(), 14), Err(SchemaError::IndexOutOfRange { .. })));
    }

    #[test]
    fn gamma_values() {
        assert_eq!(gammas(&s120()), vec![1, 2, 2, 2, 2, 2, 2, 2, 2, 3, 4, 4, 6]);
        assert_eq!(gamma(&s120_scalable(), 13).unwrap(), b(6));
        assert_eq!(gamma(&s120(), 0).unwrap(), b(0));
        for i in 0..=13 {
            assert_eq!(gamma(&s120(), i).unwrap(), if i == 0 { b(0) } else { b(gammas(&s120())[i - 1]) });
        }
    }

    #[test]
    fn delta_values() {
        assert_eq!(delta(&s120(), 1).unwrap(), b(120));
        assert_eq!(delta(&KSchema::from_u64(36, &[(2, 5), (3, 1)]).unwrap(), 1).unwrap(), b(36));
        // 120 - 4 - 144 + ceil(30 * 144 / 120) = 8
        assert_eq!(delta(&s120(), 13).unwrap(), b(8));
        assert_eq!(delta(&s120().scale(&b(3)), 10).unwrap(), b(11));
        assert!(matches!(delta(&s120(), 0), Err(SchemaError::IndexOutOfRange { .. })));
        for i in 1..=13 {
            assert_eq!(delta(&s120(), i).unwrap(), delta_expanded(&s120(), i).unwrap());
        }
    }

    #[test]
    fn strategy_checks() {
        assert!(is_k_strategy(&s120()));
        let v = first_strategy_violation(&s120().scale(&b(3))).unwrap();
        assert_eq!((v.index, v.x, v.bound), (10, b(12), b(11)));
        for k in [1, 2, 3, 7, 120] {
            assert!(is_k_strategy(&KSchema::single(k).unwrap()));
            assert!(is_scalable(&KSchema::single(k).unwrap()));
        }
        assert!(is_scalable(&s120_scalable()));
        assert!(!is_scalable(&s120()));
        let v = first_scalability_violation(&s120()).unwrap();
        assert_eq!((v.index, v.x, v.bound), (10, b(4), b(3)));
    }

    #[test]
    fn scalable_caps() {
        assert_eq!(scalable_cap(&s120(), 1).unwrap(), b(120));
        assert_eq!(scalable_cap(&s120_scalable(), 10).unwrap(), b(3));
        assert_eq!(scalable_cap(&s120_scalable(), 11).unwrap(), b(6));
    }

    #[test]
    fn scaling() {
        assert_eq!(s120().scale(&b(1)), s120());
        let s3 = s120().scale(&b(3));
        assert_eq!(s3.k(), &b(360));
        assert_eq!(s3.row(10).unwrap().x, b(12));
        assert!(is_k_strategy(&s120_scalable().scale(&b(120))));
    }

    #[test]
    fn reports() {
        let r = strategy_report(&s120()).unwrap();
        assert_eq!(r.forced_colors, b(492));
        assert_eq!(r.absolute_ratio, Rational::new(b(41), b(10)));
        assert!(!r.scalable);
        let r = strategy_report(&s120_scalable()).unwrap();
        assert_eq!(r.asymptotic_ratio, Rational::new(b(247), b(60)));
        assert!(r.scalable);
        assert_eq!(strategy_report(&KSchema::single(4).unwrap()).unwrap().forced_colors, b(11));
        assert!(matches!(strategy_report(&s120().scale(&b(3))), Err(SchemaError::NotAStrategy { index: 10, .. })));
    }

    #[test]
    fn json_round_trip() {
        let s = s120_scalable();
        let back = KSchema::from_json(&s.to_json()).unwrap();
        assert_eq!(back, s);
        let raw = r#"{"k": 12, "rows": [[1, "4"], ["4", 1]]}"#;
        assert_eq!(KSchema::from_json_str(raw).unwrap(), KSchema::from_u64(12, &[(1, 4), (4, 1)]).unwrap());
        assert!(matches!(KSchema::from_json_str(r#"{"k": 12}"#), Err(SchemaError::Json(_))));
        assert!(KSchema::from_json_str(r#"{"k": 12, "rows": [[5, 1]]}"#).is_err());
    }

    #[test]
    fn csv_table() {
        let csv = table_csv(&s120());
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("j,x,chi,gamma,delta,scalable_cap"));
        assert_eq!(lines.next(), Some("1,120,120,1,120,120"));
        assert_eq!(csv.lines().count(), 14);
    }

    fn naive_pack(cap: u64, batches: &[(u64, u64)]) -> Vec<u64> {
        let mut bins: Vec<u64> = Vec::new();
        for &(size, count) in batches {
            for _ in 0..count {
                match bins.iter_mut().find(|l| **l + size <= cap) {
                    Some(l) => *l += size,
                    None => bins.push(size),
                }
            }
        }
        bins
    }

    fn divisors(k: u64) -> Vec<u64> {
        (1..=k).filter(|d| k.is_multiple_of(*d)).collect()
    }

    /// Random scalable k-strategy: each x is drawn up to min(delta, cap).
    fn random_scalable() -> impl proptest::strategy::Strategy<Value = KSchema> {
        use proptest::prelude::*;
        (0usize..5, proptest::collection::vec((any::<bool>(), 1u64..1000), 12)).prop_map(|(ki, picks)| {
            let k = [12u64, 24, 36, 60, 120][ki];
            let mut acc = Accumulator::new(&big(k));
            let mut rows = Vec::new();
            for (&j, &(take, r)) in divisors(k).iter().filter(|&&d| 3 * d <= k).zip(&picks) {
                let j = big(j);
                let bound = acc.delta(&j).min(acc.scalable_cap(&j));
                if !take || bound < BigInt::one() {
                    continue;
                }
                let x = BigInt::from(r) % &bound + 1;
                acc.push(&j, &x).unwrap();
                rows.push(Row { j, x });
            }
            KSchema::new(big(k), rows).unwrap()
        })
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(1000))]
        #[test]
        fn packing_matches_item_by_item(cap in 1u64..=60, raw in proptest::collection::vec((0usize..12, 0u64..=50), 0..=10)) {
            let divs = divisors(cap);
            let batches: Vec<(u64, u64)> = raw.into_iter().map(|(s, c)| (divs[s % divs.len()], c)).collect();
            let big_batches: Vec<_> = batches.iter().map(|&(s, c)| (big(s), big(c))).collect();
            let st = first_fit_pack(&big(cap), &big_batches).unwrap();
            let expect: Vec<BigInt> = naive_pack(cap, &batches).into_iter().map(big).collect();
            proptest::prop_assert_eq!(st.expand(), expect);
        }
    }

    proptest::proptest! {
        #[test]
        fn retiring_keeps_counts_for_increasing_sizes(cap in 1u64..60, raw in proptest::collection::btree_map(1u64..60, 1u64..30, 0..8)) {
            let batches: Vec<(u64, u64)> = raw.into_iter().filter(|&(s, _)| s <= cap).collect();
            let mut st = BinState::new(big(cap));
            for &(s, c) in &batches {
                st.retire_below(&big(s));
                st.pack(&big(s), &big(c)).unwrap();
            }
            proptest::prop_assert_eq!(st.bin_count(), big(naive_pack(cap, &batches).len() as u64));
        }

        #[test]
        fn delta_forms_agree(s in random_scalable()) {
            for i in 1..=s.n() {
                proptest::prop_assert_eq!(delta(&s, i).unwrap(), delta_expanded(&s, i).unwrap());
            }
        }

        #[test]
        fn derived_rows_are_monotone(s in random_scalable()) {
            let mut weight = BigInt::zero();
            let mut prev = (BigInt::zero(), BigInt::zero());
            for r in derive(&s) {
                weight += &r.j * &r.x;
                proptest::prop_assert!(r.chi >= prev.0 && r.gamma >= prev.1);
                proptest::prop_assert!(r.gamma >= weight.div_ceil(s.k()));
                prev = (r.chi, r.gamma);
            }
        }

        #[test]
        fn zk_scaling_closed_forms(s in random_scalable(), z in 1u64..=3) {
            let k = s.k().clone();
            let scaled = s.scale(&(&k * z));
            let mut weight = BigInt::zero();
            for i in 1..=s.n() {
                let ji = &s.rows()[i - 1].j;
                let sum = s.rows()[..i - 1].iter().fold(BigInt::zero(), |acc, r| acc + (ji - &r.j - &k) * &r.x);
                proptest::prop_assert_eq!(delta(&scaled, i).unwrap(), (&k * &k + sum) * z);
                weight += ji * &s.rows()[i - 1].x;
                proptest::prop_assert_eq!(gamma(&scaled, i).unwrap(), &weight * z);
            }
        }

        #[test]
        fn scalable_strategies_scale(s in random_scalable(), zi in 0usize..4) {
            let z = [1u64, 2, 3, 5][zi];
            let scaled = s.scale(&(s.k() * z));
            proptest::prop_assert!(is_k_strategy(&scaled));
            let base = strategy_report(&s).unwrap();
            let big_report = strategy_report(&scaled).unwrap();
            proptest::prop_assert!(big_report.gamma_n <= s.k() * z * &base.gamma_n);
            proptest::prop_assert!(base.scalable);
            proptest::prop_assert!(big_report.absolute_ratio >= base.absolute_ratio);
        }
    }
}
