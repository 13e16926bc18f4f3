//! Forcing `3w - 2` colors with bandwidth-1 intervals of clique size `w`.
//!
//! A level-`w` block repeatedly plays level-`w-1` blocks in disjoint slots of
//! its region. Each finished sub-block used at least `3w - 5` colors. Once four
//! sub-blocks share a common `(3w - 5)`-subset `C` of their colors, four covers
//! are presented; a cover spans whole sub-blocks and therefore conflicts with
//! all of `C`. Covers meet only pairwise in the gaps between slots:
//!
//! - `X` covers block `P1`, `Y` covers block `P4`;
//! - if `Y` and `X` differ, one cover over `P1+1 ..= P4-1` touches both;
//! - otherwise `Z` over `P3 ..= P4-1` touches `Y`, and a last cover over
//!   `P1+1 ..= P3-1` touches `X` and `Z`.
//!
//! Either way three colors outside `C` appear. No point is covered twice by
//! covers inside a sub-block, so the clique grows by one per level.

use std::collections::{BTreeSet, HashMap};

use crate::exactnum::{BigInt, Dyadic};
use crate::model::{ColorId, Interval};

fn target(level: u32) -> usize {
    3 * level as usize - 2
}

/// Upper bound on the intervals a level-`level` block presents against a
/// legal algorithm, saturating.
pub fn interval_bound(level: u32) -> u64 {
    block_bound(level).saturating_add(u64::from(level))
}

fn block_bound(level: u32) -> u64 {
    if level <= 1 {
        return 1;
    }
    // Colors of the sub-blocks stay within a set of 3w - 3; four repeats of
    // one (3w - 5)-subset appear after 3 * C(3w - 3, 2) + 1 sub-blocks.
    let u = 3 * u64::from(level) - 3;
    let subsets = u * (u - 1) / 2;
    (3 * subsets + 1).saturating_mul(block_bound(level - 1)).saturating_add(4)
}

/// Geometry of the slots inside a block region `[lo, hi)`. Slot `t` occupies
/// `[lo + W(1 - 2^-t), lo + W(1 - 2^-(t+1)))` and its sub-block the middle half
/// of that; the rest is gap.
#[derive(Debug, Clone)]
struct Slots {
    lo: Dyadic,
    width: Dyadic,
}

impl Slots {
    fn start(&self, t: usize) -> Dyadic {
        // W (1 - 2^-t) = W - W / 2^t
        &self.lo + &(&self.width - &self.width.div_pow2(t as u64))
    }

    fn size(&self, t: usize) -> Dyadic {
        self.width.div_pow2(t as u64 + 1)
    }

    fn block(&self, t: usize) -> (Dyadic, Dyadic) {
        let (s, w) = (self.start(t), self.size(t));
        let quarter = w.div_pow2(2);
        (&s + &quarter, &s + &quarter.mul_int(&BigInt::from(3)))
    }

    /// The gap just left of slot `t`'s block.
    fn gap_before(&self, t: usize) -> (Dyadic, Dyadic) {
        let end = self.block(t).0;
        let start = if t == 0 { self.lo.clone() } else { self.block(t - 1).1 };
        (start, end)
    }

    /// Cover of the blocks of slots `a..=b`, reaching a quarter into the gap
    /// before `a` from its right and three quarters into the gap after `b`.
    fn cover(&self, a: usize, b: usize) -> Interval {
        let (g0, g1) = self.gap_before(a);
        let lo = &g1 - &(&g1 - &g0).div_pow2(2).mul_int(&BigInt::from(3));
        let (h0, h1) = self.gap_before(b + 1);
        let hi = &h0 + &(&h1 - &h0).div_pow2(2).mul_int(&BigInt::from(3));
        Interval::new(lo, hi).expect("cover is nonempty")
    }
}

#[derive(Debug, Clone)]
enum State {
    Leaf { asked: bool },
    Growing { done: Vec<BTreeSet<ColorId>>, seen: HashMap<Vec<ColorId>, Vec<usize>>, current: Option<Box<Block>> },
    Covers { slots: [usize; 4], step: Step, first: Option<ColorId> },
    Finished,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Step {
    First,
    Last,
    Bridge,
    Right,
    Middle,
    Done,
}

/// A recursive block, resumable one interval at a time.
#[derive(Debug, Clone)]
pub struct Block {
    level: u32,
    lo: Dyadic,
    hi: Dyadic,
    palette: BTreeSet<ColorId>,
    state: State,
}

impl Block {
    pub fn new(level: u32, lo: Dyadic, hi: Dyadic) -> Self {
        assert!(level >= 1, "block level starts at 1");
        assert!(lo < hi, "block region must be nonempty");
        let state = if level == 1 {
            State::Leaf { asked: false }
        } else {
            State::Growing { done: Vec::new(), seen: HashMap::new(), current: None }
        };
        Block { level, lo, hi, palette: BTreeSet::new(), state }
    }

    pub fn palette(&self) -> &BTreeSet<ColorId> {
        &self.palette
    }

    fn slots(&self) -> Slots {
        Slots { lo: self.lo.clone(), width: &self.hi - &self.lo }
    }

    /// Next interval to present, or `None` once the block is finished.
    pub fn next_request(&mut self) -> Option<Interval> {
        loop {
            if self.palette.len() >= target(self.level) {
                self.state = State::Finished;
            }
            let slots = self.slots();
            let level = self.level;
            match &mut self.state {
                State::Finished => return None,
                State::Leaf { asked } => {
                    if *asked {
                        self.state = State::Finished;
                        continue;
                    }
                    *asked = true;
                    return Some(Interval::new(self.lo.clone(), self.hi.clone()).expect("nonempty region"));
                }
                State::Growing { done, seen, current } => {
                    if let Some(sub) = current {
                        if let Some(iv) = sub.next_request() {
                            return Some(iv);
                        }
                        let t = done.len();
                        done.push(sub.palette.clone());
                        *current = None;
                        if let Some(four) = record(seen, &done[t], t, target(level - 1)) {
                            self.state = State::Covers { slots: four, step: Step::First, first: None };
                            continue;
                        }
                    }
                    let (lo, hi) = slots.block(done.len());
                    *current = Some(Box::new(Block::new(level - 1, lo, hi)));
                }
                State::Covers { slots: [p1, _, p3, p4], step, .. } => {
                    let (a, b) = match step {
                        Step::First => (*p1, *p1),
                        Step::Last => (*p4, *p4),
                        Step::Bridge => (*p1 + 1, *p4 - 1),
                        Step::Right => (*p3, *p4 - 1),
                        Step::Middle => (*p1 + 1, *p3 - 1),
                        Step::Done => {
                            self.state = State::Finished;
                            continue;
                        }
                    };
                    return Some(slots.cover(a, b));
                }
            }
        }
    }

    /// Records the color the algorithm gave to the last requested interval.
    pub fn feed(&mut self, color: ColorId) {
        self.palette.insert(color);
        match &mut self.state {
            State::Growing { current: Some(sub), .. } => sub.feed(color),
            State::Covers { step, first, .. } => {
                *step = match *step {
                    Step::First => {
                        *first = Some(color);
                        Step::Last
                    }
                    Step::Last if *first != Some(color) => Step::Bridge,
                    Step::Last => Step::Right,
                    Step::Right => Step::Middle,
                    Step::Bridge | Step::Middle | Step::Done => Step::Done,
                };
            }
            _ => {}
        }
    }
}

/// A piece `[x, h)` on which the number of covering intervals is constant and
/// maximal, with that number.
fn deepest_piece(items: &[Interval]) -> (Interval, u32) {
    let mut best: Option<(&Dyadic, u32)> = None;
    for iv in items {
        let depth = items.iter().filter(|o| o.contains(&iv.lo)).count() as u32;
        if best.is_none_or(|(_, d)| depth > d) {
            best = Some((&iv.lo, depth));
        }
    }
    let (x, depth) = best.expect("a finished game presented something");
    let h = items
        .iter()
        .flat_map(|o| [&o.lo, &o.hi])
        .filter(|e| *e > x)
        .min()
        .expect("covering intervals end right of x");
    (Interval::new(x.clone(), h.clone()).expect("x < h"), depth)
}

/// Adds the `size`-subsets of a finished sub-block's palette to the tally and
/// returns the first four slots sharing one, if any.
fn record(
    seen: &mut HashMap<Vec<ColorId>, Vec<usize>>,
    palette: &BTreeSet<ColorId>,
    slot: usize,
    size: usize,
) -> Option<[usize; 4]> {
    let colors: Vec<ColorId> = palette.iter().copied().collect();
    let mut found = None;
    for subset in subsets(&colors, size) {
        let slots = seen.entry(subset).or_default();
        slots.push(slot);
        if found.is_none() && slots.len() == 4 {
            found = Some([slots[0], slots[1], slots[2], slots[3]]);
        }
    }
    found
}

/// All `size`-element subsets in lexicographic order.
fn subsets(items: &[ColorId], size: usize) -> Vec<Vec<ColorId>> {
    if size == 0 {
        return vec![Vec::new()];
    }
    if items.len() < size {
        return Vec::new();
    }
    let mut out = Vec::new();
    for (i, &x) in items.iter().enumerate() {
        for mut rest in subsets(&items[i + 1..], size - 1) {
            rest.insert(0, x);
            out.push(rest);
        }
    }
    out
}

/// A whole game: the root block plus the colors it has seen.
#[derive(Debug, Clone)]
pub struct KtGame {
    omega: u32,
    region: Interval,
    root: Block,
    presented: Vec<Interval>,
    padding: Option<(Interval, u32)>,
}

impl KtGame {
    pub fn new(omega: u32, region: Interval) -> Self {
        let root = Block::new(omega.max(1), region.lo.clone(), region.hi.clone());
        KtGame { omega, region, root, presented: Vec::new(), padding: None }
    }

    pub fn omega(&self) -> u32 {
        self.omega
    }

    pub fn region(&self) -> &Interval {
        &self.region
    }

    /// Distinct colors on the game's own intervals.
    pub fn palette(&self) -> &BTreeSet<ColorId> {
        self.root.palette()
    }

    /// Blocks first. If the algorithm ran out of colors before the clique
    /// reached `w`, the deepest point is then topped up to exactly `w`.
    pub fn next_request(&mut self) -> Option<Interval> {
        if self.omega == 0 {
            return None;
        }
        let iv = match self.root.next_request() {
            Some(iv) => iv,
            None => {
                if self.padding.is_none() {
                    let (piece, depth) = deepest_piece(&self.presented);
                    self.padding = Some((piece, self.omega.saturating_sub(depth)));
                }
                let (piece, left) = self.padding.as_mut().expect("just set");
                if *left == 0 {
                    return None;
                }
                *left -= 1;
                piece.clone()
            }
        };
        self.presented.push(iv.clone());
        Some(iv)
    }

    pub fn feed(&mut self, color: ColorId) {
        self.root.feed(color);
    }
}
