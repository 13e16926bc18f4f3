//! Offline evidence about presented sets: the constructive k-coloring of a
//! schema game, exact chromatic numbers of tiny sets and the load bound.

use std::collections::BTreeMap;

use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::exactnum::{BigInt, Rational};
use crate::model::{peak_load, Coloring, Interval, Tag, Transcript};
use crate::schema::KSchema;

/// Largest set [`exact_chromatic`] accepts.
pub const EXACT_LIMIT: usize = 25;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("certificate infeasible: {0}")]
    CertificateInfeasible(String),
    #[error("{0} intervals exceed the exact-search limit of {EXACT_LIMIT}")]
    TooLarge(usize),
}

/// Colors intervals that conflict whenever they intersect, in order of left
/// endpoint, each with the smallest color free at its left endpoint. Uses
/// exactly the maximum clique size many colors.
pub fn greedy_interval_coloring(items: &[(u64, &Interval)]) -> BTreeMap<u64, u32> {
    let mut order: Vec<&(u64, &Interval)> = items.iter().collect();
    order.sort_by(|a, b| a.1.lo.cmp(&b.1.lo).then(a.0.cmp(&b.0)));
    let mut active: Vec<(&Interval, u32)> = Vec::new();
    let mut out = BTreeMap::new();
    for &&(id, iv) in &order {
        active.retain(|(a, _)| a.hi > iv.lo);
        let color = (0u32..).find(|c| active.iter().all(|(_, used)| used != c)).expect("unbounded range");
        active.push((iv, color));
        out.insert(id, color);
    }
    out
}

/// The k-coloring behind the schema strategy. Marked intervals are packed
/// first-fit in arrival order (colors `0..gamma_n`); non-marked intervals of
/// subphase `i` fill colors in index order up to the room left by marked
/// intervals of subphases `<= i`; final-phase intervals take the colors no
/// marked interval uses.
pub fn constructive_coloring(t: &Transcript, s: &KSchema) -> Result<Coloring, OracleError> {
    let infeasible = |m: String| OracleError::CertificateInfeasible(m);
    let k = s.k();
    let n = s.n();
    let mut coloring = Coloring::new();

    // Marked intervals, first-fit in arrival order.
    let mut bins: Vec<BigInt> = Vec::new();
    // marked_load[i][c]: load of color c added by marked intervals of subphase i.
    let mut marked_load: Vec<BTreeMap<usize, BigInt>> = vec![BTreeMap::new(); n + 1];
    let mut finals: Vec<(u64, &Interval)> = Vec::new();
    let mut plain: Vec<Vec<u64>> = vec![Vec::new(); n + 1];
    for e in t.entries() {
        match &e.item.tag {
            Tag::Sep { subphase, marked } => {
                let i = *subphase;
                if i == 0 || i > n {
                    return Err(infeasible(format!("interval {} has subphase {i} outside 1..={n}", e.item.id)));
                }
                if !marked {
                    plain[i].push(e.item.id);
                    continue;
                }
                let j = &s.rows()[i - 1].j;
                let c = match bins.iter().position(|load| load + j <= *k) {
                    Some(c) => c,
                    None => {
                        bins.push(BigInt::zero());
                        bins.len() - 1
                    }
                };
                bins[c] += j;
                *marked_load[i].entry(c).or_insert_with(BigInt::zero) += j;
                coloring.assign(e.item.id, c as u32);
            }
            Tag::Final | Tag::UnitFinal => finals.push((e.item.id, &e.item.interval)),
            other => return Err(infeasible(format!("interval {} has foreign tag `{other}`", e.item.id))),
        }
    }
    let gamma = bins.len();

    // Non-marked intervals, subphase by subphase.
    let mut marked_so_far: BTreeMap<usize, BigInt> = BTreeMap::new();
    let mut width = gamma;
    for i in 1..=n {
        for (c, l) in &marked_load[i] {
            *marked_so_far.entry(*c).or_insert_with(BigInt::zero) += l;
        }
        let j = &s.rows()[i - 1].j;
        let room = |c: usize| -> BigInt {
            let used = marked_so_far.get(&c).cloned().unwrap_or_else(BigInt::zero);
            (k - used).div_floor(j)
        };
        let mut c = 0usize;
        let mut left = room(0);
        for &id in &plain[i] {
            while left <= BigInt::zero() {
                c += 1;
                left = room(c);
            }
            coloring.assign(id, c as u32);
            left -= 1;
            width = width.max(c + 1);
        }
    }

    // Final phase on the colors free of marked intervals.
    for (id, c) in greedy_interval_coloring(&finals) {
        let color = gamma as u32 + c;
        width = width.max(color as usize + 1);
        coloring.assign(id, color);
    }
    if BigInt::from(width) > *k {
        return Err(infeasible(format!("needs {width} colors, more than k = {k}")));
    }
    Ok(coloring)
}

/// Ceiling of the peak total bandwidth.
pub fn load_lower_bound(set: &[(Interval, Rational)]) -> u64 {
    peak_load(set.iter().map(|(i, b)| (i, b)))
        .map_or(0, |(l, _)| l.ceil().to_integer().to_u64().expect("load fits in u64"))
}

/// Minimum number of colors keeping every color's load at most 1, by
/// depth-first search over assignments in left-endpoint order.
pub fn exact_chromatic(set: &[(Interval, Rational)]) -> Result<u64, OracleError> {
    if set.len() > EXACT_LIMIT {
        return Err(OracleError::TooLarge(set.len()));
    }
    let mut items: Vec<&(Interval, Rational)> = set.iter().collect();
    items.sort_by(|a, b| a.0.lo.cmp(&b.0.lo));
    let lower = load_lower_bound(set);
    for colors in lower.max(u64::from(!set.is_empty()))..=set.len() as u64 {
        let mut assign = vec![0usize; items.len()];
        if search(&items, &mut assign, 0, 0, colors as usize) {
            return Ok(colors);
        }
    }
    Ok(set.len() as u64)
}

fn search(items: &[&(Interval, Rational)], assign: &mut [usize], i: usize, used: usize, limit: usize) -> bool {
    if i == items.len() {
        return true;
    }
    let (iv, bw) = items[i];
    // Earlier items start no later than `iv`, so a color's load inside `iv` is
    // highest at its left endpoint.
    for c in 0..(used + 1).min(limit) {
        let load = (0..i)
            .filter(|&q| assign[q] == c && items[q].0.hi > iv.lo)
            .fold(bw.clone(), |acc, q| acc + &items[q].1);
        if load > Rational::one() {
            continue;
        }
        assign[i] = c;
        if search(items, assign, i + 1, used.max(c + 1), limit) {
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{ratio, Dyadic};

    fn iv(lo: i64, hi: i64) -> Interval {
        Interval::new(Dyadic::from_int(lo), Dyadic::from_int(hi)).unwrap()
    }

    #[test]
    fn exact_examples() {
        let one = ratio(1, 1);
        let disjoint = vec![(iv(0, 1), one.clone()), (iv(2, 3), one.clone()), (iv(4, 5), one.clone())];
        assert_eq!(exact_chromatic(&disjoint).unwrap(), 1);
        let clique: Vec<_> = (0..4).map(|i| (iv(i, 10 + i), one.clone())).collect();
        assert_eq!(exact_chromatic(&clique).unwrap(), 4);
        assert_eq!(exact_chromatic(&vec![(iv(0, 1), ratio(1, 2)); 3]).unwrap(), 2);
        assert_eq!(exact_chromatic(&[]).unwrap(), 0);
        assert_eq!(exact_chromatic(&vec![(iv(0, 1), one); 26]), Err(OracleError::TooLarge(26)));
    }

    #[test]
    fn exact_beats_load_bound_when_it_must() {
        // Peak load 9/5 but no two of these fit one color.
        let set = vec![(iv(0, 2), ratio(3, 5)); 3];
        assert_eq!(load_lower_bound(&set), 2);
        assert_eq!(exact_chromatic(&set).unwrap(), 3);
        // Overlapping pieces summing to exactly 1 share a color.
        let set = vec![(iv(0, 2), ratio(2, 3)), (iv(1, 3), ratio(1, 3)), (iv(2, 4), ratio(2, 3))];
        assert_eq!(exact_chromatic(&set).unwrap(), 1);
    }

    #[test]
    fn load_bound_examples() {
        assert_eq!(load_lower_bound(&[]), 0);
        let clique: Vec<_> = (0..5).map(|i| (iv(i, 10), ratio(1, 1))).collect();
        assert_eq!(load_lower_bound(&clique), 5);
        assert_eq!(load_lower_bound(&[(iv(0, 2), ratio(3, 4)), (iv(1, 3), ratio(3, 4))]), 2);
    }

    #[test]
    fn greedy_uses_clique_many_colors() {
        let ivs = [iv(0, 4), iv(1, 2), iv(2, 5), iv(3, 6), iv(5, 7)];
        let items: Vec<(u64, &Interval)> = ivs.iter().enumerate().map(|(n, i)| (n as u64, i)).collect();
        let c = greedy_interval_coloring(&items);
        assert_eq!(c.values().copied().max(), Some(2));
        assert_eq!(c[&1], 1);
        assert_eq!(c[&2], 1);
    }

    proptest::proptest! {
        #[test]
        fn sandwich(raw in proptest::collection::vec((0i64..6, 1i64..4, 1i64..4, 1i64..4), 0..9)) {
            let set: Vec<_> = raw.into_iter().map(|(lo, len, p, q)| (iv(lo, lo + len), ratio(p.min(q), q))).collect();
            let lower = load_lower_bound(&set);
            let exact = exact_chromatic(&set).unwrap();
            proptest::prop_assert!(lower <= exact);
            // One color per interval is always valid.
            proptest::prop_assert!(exact <= set.len() as u64);
            // Unit bandwidths make this an interval graph: the greedy order is optimal.
            let unit: Vec<_> = set.iter().map(|(i, _)| (i.clone(), ratio(1, 1))).collect();
            let items: Vec<(u64, &Interval)> = unit.iter().enumerate().map(|(n, (i, _))| (n as u64, i)).collect();
            let greedy = greedy_interval_coloring(&items).values().copied().max().map_or(0, |m| m as u64 + 1);
            proptest::prop_assert_eq!(exact_chromatic(&unit).unwrap(), greedy);
        }
    }
}
