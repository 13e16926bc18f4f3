//! Greedy synthesis of scalable strategies over the divisors of `k`, and
//! tables of their asymptotic ratios.

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde_json::Value;
use thiserror::Error;

use crate::exactnum::{render_rational, round_decimal, truncate_decimal, BigInt, Rational};
use crate::schema::{self, Accumulator, KSchema, Row, SchemaError};

/// Trial division stops at this prime; a larger prime factor is an error.
pub const DEFAULT_PRIME_BOUND: u64 = 100_000;

/// The `k` values of the published ratio table, in its row order.
pub const TABLE3_KS: [&str; 24] = [
    "60",
    "120",
    "360",
    "840",
    "2520",
    "7560",
    "10080",
    "15120",
    "25200",
    "27720",
    "110880",
    "554400",
    "2162160",
    "21621600",
    "183783600",
    "2327925600",
    "48886437600",
    "321253732800",
    "4497552259200",
    "97821761637600",
    "866421317361600",
    "4043299481020800",
    "12129898443062400",
    "224403121196654400",
];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SearchError {
    #[error("k = {k}: factor {residue} has no prime factor below {bound}")]
    FactorizationFailed { k: BigInt, residue: BigInt, bound: u64 },
    #[error("k = {0} is below 3")]
    KTooSmall(BigInt),
    #[error("no rows to take a maximum over")]
    Empty,
    #[error(transparent)]
    Schema(#[from] SchemaError),
}

pub fn table3_ks() -> Vec<BigInt> {
    TABLE3_KS.iter().map(|s| s.parse().expect("literal")).collect()
}

/// Prime factorization by trial division up to `bound`.
pub fn factorize(k: &BigInt, bound: u64) -> Result<Vec<(BigInt, u32)>, SearchError> {
    let mut rest = k.clone();
    let mut out = Vec::new();
    let mut p = 2u64;
    while p <= bound {
        let bp = BigInt::from(p);
        if &bp * &bp > rest {
            break;
        }
        let mut e = 0u32;
        while (&rest % &bp).is_zero() {
            rest /= &bp;
            e += 1;
        }
        if e > 0 {
            out.push((bp, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if rest > BigInt::one() {
        if rest > BigInt::from(bound) && &BigInt::from(bound) * BigInt::from(bound) < rest {
            return Err(SearchError::FactorizationFailed { k: k.clone(), residue: rest, bound });
        }
        out.push((rest, 1));
    }
    Ok(out)
}

/// All divisors `d` of `k` with `3d <= k`, ascending.
pub fn divisors_upto_third(k: &BigInt) -> Result<Vec<BigInt>, SearchError> {
    divisors_upto_third_with(k, DEFAULT_PRIME_BOUND)
}

pub fn divisors_upto_third_with(k: &BigInt, bound: u64) -> Result<Vec<BigInt>, SearchError> {
    if k < &BigInt::from(3) {
        return Err(SearchError::KTooSmall(k.clone()));
    }
    let mut divs = vec![BigInt::one()];
    for (p, e) in factorize(k, bound)? {
        let mut next = Vec::with_capacity(divs.len() * (e as usize + 1));
        for d in &divs {
            let mut m = d.clone();
            for _ in 0..=e {
                next.push(m.clone());
                m *= &p;
            }
        }
        divs = next;
    }
    divs.retain(|d| d * 3u32 <= *k);
    divs.sort();
    Ok(divs)
}

/// Greedy scalable strategy for `k`.
///
/// Divisors are taken in ascending order with `x = min(delta, scalable_cap)`,
/// skipping those where that is not positive. The result is the shortest
/// prefix of this sequence with the largest `sum x + 3(k - gamma)`: rows whose
/// new colors are paid for by the same number of lost final-phase colors are
/// dropped from the tail.
pub fn synthesize(k: &BigInt) -> Result<KSchema, SearchError> {
    let divisors = divisors_upto_third(k)?;
    let mut acc = Accumulator::new(k);
    let mut rows: Vec<Row> = Vec::new();
    let value = |acc: &Accumulator| acc.chi() + (k - acc.gamma()) * 3u32;
    let mut best = (value(&acc), 0usize);
    for j in divisors {
        let x = acc.delta(&j).min(acc.scalable_cap(&j));
        if x <= BigInt::zero() {
            continue;
        }
        acc.push(&j, &x)?;
        rows.push(Row { j, x });
        let v = value(&acc);
        if v > best.0 {
            best = (v, rows.len());
        }
    }
    rows.truncate(best.1);
    Ok(KSchema::new(k.clone(), rows)?)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatioRow {
    pub k: BigInt,
    pub strategy: KSchema,
    pub asymptotic_ratio: Rational,
    /// Seven places, truncated.
    pub rendered: String,
    /// Seven places, rounded half up.
    pub rounded: String,
}

impl RatioRow {
    pub fn to_json(&self) -> Value {
        serde_json::json!({
            "k": self.k.to_string(),
            "ratio_exact": render_rational(&self.asymptotic_ratio),
            "ratio_7dp": self.rendered,
            "ratio_7dp_rounded": self.rounded,
            "strategy": self.strategy.to_json(),
        })
    }
}

pub fn ratio_row(k: &BigInt) -> Result<RatioRow, SearchError> {
    let strategy = synthesize(k)?;
    let report = schema::strategy_report(&strategy)?;
    Ok(RatioRow {
        k: k.clone(),
        rendered: truncate_decimal(&report.asymptotic_ratio, 7),
        rounded: round_decimal(&report.asymptotic_ratio, 7),
        asymptotic_ratio: report.asymptotic_ratio,
        strategy,
    })
}

/// Worker count from `ARENA_THREADS`, if set to a positive integer.
pub fn threads_from_env() -> Option<usize> {
    std::env::var("ARENA_THREADS").ok()?.trim().parse().ok().filter(|&n| n > 0)
}

/// One row per `k`, computed in parallel. Failed rows do not affect others.
pub fn ratio_table(ks: &[BigInt]) -> Vec<Result<RatioRow, SearchError>> {
    ratio_table_with_threads(ks, threads_from_env())
}

pub fn ratio_table_with_threads(ks: &[BigInt], threads: Option<usize>) -> Vec<Result<RatioRow, SearchError>> {
    let run = || ks.par_iter().map(ratio_row).collect();
    match threads {
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build().expect("thread pool").install(run),
        None => run(),
    }
}

/// Largest asymptotic ratio among the successful rows.
pub fn headline_of(rows: &[Result<RatioRow, SearchError>]) -> Result<Rational, SearchError> {
    rows.iter().filter_map(|r| r.as_ref().ok()).map(|r| r.asymptotic_ratio.clone()).max().ok_or(SearchError::Empty)
}

pub fn headline_bound(ks: &[BigInt]) -> Result<Rational, SearchError> {
    headline_of(&ratio_table(ks))
}

/// Highly composite numbers up to `limit` that are at least 3. Candidates are
/// products of leading primes with nonincreasing exponents; a candidate is
/// kept when it has more divisors than every smaller one.
pub fn highly_composite_upto(limit: &BigInt) -> Vec<BigInt> {
    const PRIMES: [u32; 20] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71];
    let mut cands: Vec<(BigInt, BigInt)> = Vec::new();
    fn walk(idx: usize, max_e: u32, n: BigInt, d: BigInt, limit: &BigInt, out: &mut Vec<(BigInt, BigInt)>) {
        out.push((n.clone(), d.clone()));
        if idx == PRIMES.len() {
            return;
        }
        let mut m = n;
        for e in 1..=max_e {
            m *= PRIMES[idx];
            if &m > limit {
                break;
            }
            walk(idx + 1, e, m.clone(), &d * (e + 1), limit, out);
        }
    }
    walk(0, u32::MAX, BigInt::one(), BigInt::one(), limit, &mut cands);
    cands.sort();
    let mut best = BigInt::zero();
    let mut out = Vec::new();
    for (n, d) in cands {
        if d > best {
            best = d;
            if n >= BigInt::from(3) {
                out.push(n);
            }
        }
    }
    out
}

/// CSV with columns `k,ratio_exact,ratio_7dp,error`.
pub fn table_csv(rows: &[Result<RatioRow, SearchError>], ks: &[BigInt]) -> String {
    let mut out = String::from("k,ratio_exact,ratio_7dp,error\n");
    for (k, row) in ks.iter().zip(rows) {
        match row {
            Ok(r) => out.push_str(&format!("{},{},{},\n", r.k, render_rational(&r.asymptotic_ratio), r.rendered)),
            Err(e) => out.push_str(&format!("{k},,,\"{e}\"\n")),
        }
    }
    out
}

pub fn table_json(rows: &[Result<RatioRow, SearchError>], ks: &[BigInt]) -> Value {
    Value::Array(
        ks.iter()
            .zip(rows)
            .map(|(k, row)| match row {
                Ok(r) => r.to_json(),
                Err(e) => serde_json::json!({ "k": k.to_string(), "error": e.to_string() }),
            })
            .collect(),
    )
}

/// Number of divisors of `k`, from its factorization.
pub fn divisor_count(k: &BigInt) -> Result<u64, SearchError> {
    Ok(factorize(k, DEFAULT_PRIME_BOUND)?.iter().map(|(_, e)| u64::from(*e) + 1).product())
}
