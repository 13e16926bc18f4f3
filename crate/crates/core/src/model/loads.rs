//! Incremental per-color load profiles.
//!
//! Coordinates produced by repeated bisection carry numerators with tens of
//! thousands of bits, so each distinct endpoint is registered once and given
//! an order-preserving `u128` label. Profiles are treaps keyed by coordinate
//! id and compared through those labels; a relabel keeps the order, so the
//! treaps stay valid.
//!
//! Loads are stored as integers over a common denominator shared by every
//! profile. When a bandwidth with a new denominator arrives all stored values
//! are rescaled.

use std::collections::BTreeMap;
use std::ops::Bound;

use num_integer::Integer;
use num_traits::ToPrimitive;

use crate::exactnum::{BigInt, Dyadic, Rational};

use super::ColorId;

pub type CoordId = u32;

const NIL: u32 = u32::MAX;

#[derive(Debug, Clone, Default)]
struct CoordIndex {
    by_value: BTreeMap<Dyadic, CoordId>,
    labels: Vec<u128>,
}

impl CoordIndex {
    fn get(&self, d: &Dyadic) -> Option<CoordId> {
        self.by_value.get(d).copied()
    }

    fn register(&mut self, d: &Dyadic) -> CoordId {
        if let Some(id) = self.get(d) {
            return id;
        }
        let below = self
            .by_value
            .range((Bound::Unbounded, Bound::Excluded(d)))
            .next_back()
            .map_or(0, |(_, &id)| self.labels[id as usize]);
        let above = self
            .by_value
            .range((Bound::Excluded(d), Bound::Unbounded))
            .next()
            .map_or(u128::MAX, |(_, &id)| self.labels[id as usize]);
        let id = self.labels.len() as CoordId;
        self.by_value.insert(d.clone(), id);
        if above - below >= 2 {
            self.labels.push(below + (above - below) / 2);
        } else {
            self.labels.push(0);
            self.relabel();
        }
        id
    }

    fn relabel(&mut self) {
        let step = u128::MAX / (self.by_value.len() as u128 + 1);
        for (i, &id) in self.by_value.values().enumerate() {
            self.labels[id as usize] = step * (i as u128 + 1);
        }
    }
}

#[derive(Debug, Clone)]
struct Node {
    key: CoordId,
    prio: u64,
    val: i128,
    mx: i128,
    // Pending addition for the children only.
    lazy: i128,
    left: u32,
    right: u32,
}

/// Piecewise-constant load of one color: a node with key `x` holds the load
/// on `[x, next key)`. Left of the first key the load is zero.
#[derive(Debug, Clone)]
struct Profile {
    nodes: Vec<Node>,
    root: u32,
}

impl Profile {
    fn new() -> Self {
        Profile { nodes: Vec::new(), root: NIL }
    }

    fn apply(&mut self, t: u32, v: i128) {
        if t == NIL || v == 0 {
            return;
        }
        let n = &mut self.nodes[t as usize];
        n.val += v;
        n.mx += v;
        n.lazy += v;
    }

    fn push(&mut self, t: u32) {
        let (l, r, z) = {
            let n = &self.nodes[t as usize];
            (n.left, n.right, n.lazy)
        };
        if z != 0 {
            self.apply(l, z);
            self.apply(r, z);
            self.nodes[t as usize].lazy = 0;
        }
    }

    fn pull(&mut self, t: u32) {
        let n = &self.nodes[t as usize];
        let mut m = n.val;
        if n.left != NIL {
            m = m.max(self.nodes[n.left as usize].mx + n.lazy);
        }
        if n.right != NIL {
            m = m.max(self.nodes[n.right as usize].mx + n.lazy);
        }
        self.nodes[t as usize].mx = m;
    }

    /// Splits into keys `< label` and keys `>= label`.
    fn split(&mut self, t: u32, label: u128, labels: &[u128]) -> (u32, u32) {
        if t == NIL {
            return (NIL, NIL);
        }
        self.push(t);
        let k = labels[self.nodes[t as usize].key as usize];
        if k < label {
            let (a, b) = self.split(self.nodes[t as usize].right, label, labels);
            self.nodes[t as usize].right = a;
            self.pull(t);
            (t, b)
        } else {
            let (a, b) = self.split(self.nodes[t as usize].left, label, labels);
            self.nodes[t as usize].left = b;
            self.pull(t);
            (a, t)
        }
    }

    fn merge(&mut self, a: u32, b: u32) -> u32 {
        if a == NIL {
            return b;
        }
        if b == NIL {
            return a;
        }
        if self.nodes[a as usize].prio > self.nodes[b as usize].prio {
            self.push(a);
            let r = self.merge(self.nodes[a as usize].right, b);
            self.nodes[a as usize].right = r;
            self.pull(a);
            a
        } else {
            self.push(b);
            let l = self.merge(a, self.nodes[b as usize].left);
            self.nodes[b as usize].left = l;
            self.pull(b);
            b
        }
    }

    fn contains(&self, key: CoordId, labels: &[u128]) -> bool {
        let target = labels[key as usize];
        let mut t = self.root;
        while t != NIL {
            let n = &self.nodes[t as usize];
            let k = labels[n.key as usize];
            if k == target {
                return true;
            }
            t = if target < k { n.left } else { n.right };
        }
        false
    }

    /// Load at the coordinate with label `target`.
    fn value_at(&self, target: u128, labels: &[u128]) -> i128 {
        let mut t = self.root;
        let mut acc = 0i128;
        let mut best = 0i128;
        while t != NIL {
            let n = &self.nodes[t as usize];
            let k = labels[n.key as usize];
            if k <= target {
                best = n.val + acc;
                if k == target {
                    break;
                }
                acc += n.lazy;
                t = n.right;
            } else {
                acc += n.lazy;
                t = n.left;
            }
        }
        best
    }

    /// Maximum stored value over keys with labels in `[lo, hi)`; a missing
    /// bound means unbounded on that side.
    fn range_max(&self, t: u32, lo: Option<u128>, hi: Option<u128>, acc: i128, labels: &[u128]) -> Option<i128> {
        if t == NIL {
            return None;
        }
        let n = &self.nodes[t as usize];
        if lo.is_none() && hi.is_none() {
            return Some(n.mx + acc);
        }
        let k = labels[n.key as usize];
        let child = acc + n.lazy;
        if lo.is_some_and(|lo| k < lo) {
            return self.range_max(n.right, lo, hi, child, labels);
        }
        if hi.is_some_and(|hi| k >= hi) {
            return self.range_max(n.left, lo, hi, child, labels);
        }
        let mut m = n.val + acc;
        if let Some(v) = self.range_max(n.left, lo, None, child, labels) {
            m = m.max(v);
        }
        if let Some(v) = self.range_max(n.right, None, hi, child, labels) {
            m = m.max(v);
        }
        Some(m)
    }

    fn insert_breakpoint(&mut self, key: CoordId, prio: u64, labels: &[u128]) {
        if self.contains(key, labels) {
            return;
        }
        let label = labels[key as usize];
        let val = self.value_at(label, labels);
        let id = self.nodes.len() as u32;
        self.nodes.push(Node { key, prio, val, mx: val, lazy: 0, left: NIL, right: NIL });
        let (a, b) = self.split(self.root, label, labels);
        let a = self.merge(a, id);
        self.root = self.merge(a, b);
    }

    fn add(&mut self, lo: u128, hi: u128, v: i128, labels: &[u128]) {
        let (a, rest) = self.split(self.root, lo, labels);
        let (mid, c) = self.split(rest, hi, labels);
        self.apply(mid, v);
        let a = self.merge(a, mid);
        self.root = self.merge(a, c);
    }

    fn peak(&self, lo: u128, hi: u128, labels: &[u128]) -> i128 {
        let at_lo = self.value_at(lo, labels);
        self.range_max(self.root, Some(lo), Some(hi), 0, labels).map_or(at_lo, |m| m.max(at_lo))
    }

    fn rescale(&mut self, f: i128) {
        for n in &mut self.nodes {
            n.val = n.val.checked_mul(f).expect("load overflow while rescaling");
            n.mx = n.mx.checked_mul(f).expect("load overflow while rescaling");
            n.lazy = n.lazy.checked_mul(f).expect("load overflow while rescaling");
        }
    }
}

/// Per-color load profiles of a growing game, queryable in logarithmic time.
#[derive(Debug, Clone)]
pub struct LoadIndex {
    coords: CoordIndex,
    den: i128,
    profiles: Vec<Profile>,
    rng: u64,
}

impl Default for LoadIndex {
    fn default() -> Self {
        Self::new()
    }
}

impl LoadIndex {
    pub fn new() -> Self {
        LoadIndex { coords: CoordIndex::default(), den: 1, profiles: Vec::new(), rng: 0x9E37_79B9_7F4A_7C15 }
    }

    /// Registers a coordinate so that it can be used in queries.
    pub fn register(&mut self, d: &Dyadic) -> CoordId {
        self.coords.register(d)
    }

    pub fn coord(&self, d: &Dyadic) -> Option<CoordId> {
        self.coords.get(d)
    }

    pub fn color_count(&self) -> u32 {
        self.profiles.len() as u32
    }

    fn next_prio(&mut self) -> u64 {
        // xorshift64*
        self.rng ^= self.rng >> 12;
        self.rng ^= self.rng << 25;
        self.rng ^= self.rng >> 27;
        self.rng.wrapping_mul(0x2545_F491_4F6C_DD1D)
    }

    fn scaled(&mut self, bw: &Rational) -> i128 {
        let q = bw.denom().to_i128().expect("bandwidth denominator fits in i128");
        if self.den % q != 0 {
            let new_den = self.den.lcm(&q);
            let f = new_den / self.den;
            for p in &mut self.profiles {
                p.rescale(f);
            }
            self.den = new_den;
        }
        let p = bw.numer().to_i128().expect("bandwidth numerator fits in i128");
        p.checked_mul(self.den / q).expect("load overflow")
    }

    fn unscale(&self, v: i128) -> Rational {
        Rational::new(BigInt::from(v), BigInt::from(self.den))
    }

    /// Adds `bw` to color `c` on `[lo, hi)`. Both coordinates must have been
    /// registered.
    pub fn add(&mut self, c: ColorId, lo: CoordId, hi: CoordId, bw: &Rational) {
        let v = self.scaled(bw);
        while self.profiles.len() <= c as usize {
            self.profiles.push(Profile::new());
        }
        let p1 = self.next_prio();
        let p2 = self.next_prio();
        let labels = &self.coords.labels;
        let prof = &mut self.profiles[c as usize];
        prof.insert_breakpoint(lo, p1, labels);
        prof.insert_breakpoint(hi, p2, labels);
        prof.add(labels[lo as usize], labels[hi as usize], v, labels);
    }

    fn peak_scaled(&self, c: ColorId, lo: CoordId, hi: CoordId) -> i128 {
        match self.profiles.get(c as usize) {
            None => 0,
            Some(p) => {
                let labels = &self.coords.labels;
                p.peak(labels[lo as usize], labels[hi as usize], labels)
            }
        }
    }

    /// Maximum load of color `c` over `[lo, hi)`.
    pub fn peak_in(&self, c: ColorId, lo: CoordId, hi: CoordId) -> Rational {
        self.unscale(self.peak_scaled(c, lo, hi))
    }

    /// Whether adding `bw` to color `c` on `[lo, hi)` keeps its load at most 1.
    pub fn fits(&self, c: ColorId, lo: CoordId, hi: CoordId, bw: &Rational) -> bool {
        let peak = self.peak_scaled(c, lo, hi);
        if let (Some(p), Some(q)) = (bw.numer().to_i128(), bw.denom().to_i128()) {
            if self.den % q == 0 {
                return peak + p * (self.den / q) <= self.den;
            }
        }
        self.unscale(peak) + bw <= Rational::from_integer(BigInt::from(1))
    }
}
