//! Game objects: intervals with bandwidth, colors and transcripts.
//!
//! Intervals are half-open, `[lo, hi)`. Two intervals that only touch at an
//! endpoint do not intersect, and a point `p` lies in `[lo, hi)` iff
//! `lo <= p < hi`.

mod loads;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::exactnum::{rational_str, Dyadic, Rational};

pub use loads::{CoordId, LoadIndex};

/// Canonical color: colors are numbered 0, 1, 2, ... by first use.
pub type ColorId = u32;

/// Opaque color token chosen by an algorithm.
pub type ColorToken = u64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("empty interval: lo {lo} is not below hi {hi}")]
    EmptyInterval { lo: String, hi: String },
    #[error("bandwidth {0} is outside (0, 1]")]
    BadBandwidth(String),
    #[error("transcript ids must strictly increase (saw {prev} then {next})")]
    IdsNotIncreasing { prev: u64, next: u64 },
    #[error("unknown tag `{0}`")]
    BadTag(String),
}

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Interval {
    pub lo: Dyadic,
    pub hi: Dyadic,
}

impl Interval {
    pub fn new(lo: Dyadic, hi: Dyadic) -> Result<Self, ModelError> {
        if lo >= hi {
            return Err(ModelError::EmptyInterval { lo: lo.to_string(), hi: hi.to_string() });
        }
        Ok(Interval { lo, hi })
    }

    pub fn contains(&self, p: &Dyadic) -> bool {
        &self.lo <= p && p < &self.hi
    }

    pub fn length(&self) -> Dyadic {
        &self.hi - &self.lo
    }

    /// True when `self` lies inside `outer` (both half-open).
    pub fn within(&self, outer: &Interval) -> bool {
        outer.lo <= self.lo && self.hi <= outer.hi
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:?}, {:?})", self.lo, self.hi)
    }
}

pub fn intersects(a: &Interval, b: &Interval) -> bool {
    std::cmp::max(&a.lo, &b.lo) < std::cmp::min(&a.hi, &b.hi)
}

/// Presenter annotation attached to each interval.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Tag {
    /// Separation subphase `subphase` (1-based); `marked` when the interval
    /// received a color never used before.
    Sep { subphase: usize, marked: bool },
    /// Kierstead-Trotter final phase of a schema game.
    Final,
    /// The bandwidth-1 copies closing a unit-interval game.
    UnitFinal,
    /// Standalone Kierstead-Trotter game.
    Kt,
    Custom(String),
}

impl Tag {
    /// Phase label used for statistics: the tag without the marked flag.
    pub fn phase(&self) -> String {
        match self {
            Tag::Sep { subphase, .. } => format!("sep:{subphase}"),
            other => other.to_string(),
        }
    }

    pub fn is_marked(&self) -> bool {
        matches!(self, Tag::Sep { marked: true, .. })
    }

    pub fn subphase(&self) -> Option<usize> {
        match self {
            Tag::Sep { subphase, .. } => Some(*subphase),
            _ => None,
        }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tag::Sep { subphase, marked: false } => write!(f, "sep:{subphase}"),
            Tag::Sep { subphase, marked: true } => write!(f, "sep:{subphase}:marked"),
            Tag::Final => f.write_str("final"),
            Tag::UnitFinal => f.write_str("unit-final"),
            Tag::Kt => f.write_str("kt"),
            Tag::Custom(s) => f.write_str(s),
        }
    }
}

impl FromStr for Tag {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "final" => return Ok(Tag::Final),
            "unit-final" => return Ok(Tag::UnitFinal),
            "kt" => return Ok(Tag::Kt),
            _ => {}
        }
        if let Some(rest) = s.strip_prefix("sep:") {
            let (num, marked) = match rest.strip_suffix(":marked") {
                Some(n) => (n, true),
                None => (rest, false),
            };
            let subphase = num.parse().map_err(|_| ModelError::BadTag(s.to_string()))?;
            return Ok(Tag::Sep { subphase, marked });
        }
        if s.is_empty() {
            return Err(ModelError::BadTag(s.to_string()));
        }
        Ok(Tag::Custom(s.to_string()))
    }
}

impl Serialize for Tag {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Tag {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub fn check_bandwidth(bw: &Rational) -> Result<(), ModelError> {
    if bw <= &Rational::zero() || bw > &Rational::one() {
        return Err(ModelError::BadBandwidth(crate::exactnum::render_rational(bw)));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PresentedInterval {
    pub id: u64,
    pub interval: Interval,
    pub bandwidth: Rational,
    pub tag: Tag,
}

/// One round of the game: the presented interval and its canonical color.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub item: PresentedInterval,
    pub color: ColorId,
}

#[derive(Serialize, Deserialize)]
struct EntryRepr {
    id: u64,
    lo: Dyadic,
    hi: Dyadic,
    #[serde(with = "rational_str")]
    bandwidth: Rational,
    tag: Tag,
    color: ColorId,
}

/// Append-only game history. Color tokens are canonicalized on entry.
#[derive(Debug, Clone, Default)]
pub struct Transcript {
    entries: Vec<Entry>,
    token_to_color: HashMap<ColorToken, ColorId>,
    tokens: Vec<ColorToken>,
}

impl Transcript {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn last(&self) -> Option<&Entry> {
        self.entries.last()
    }

    pub fn next_id(&self) -> u64 {
        self.entries.last().map_or(0, |e| e.item.id + 1)
    }

    /// Canonical id a token would receive, without recording it.
    pub fn lookup_token(&self, token: ColorToken) -> Option<ColorId> {
        self.token_to_color.get(&token).copied()
    }

    /// Token first mapped to `color`.
    pub fn token_of(&self, color: ColorId) -> Option<ColorToken> {
        self.tokens.get(color as usize).copied()
    }

    pub fn color_count(&self) -> u32 {
        self.tokens.len() as u32
    }

    /// Appends an interval colored with an algorithm token. Returns the
    /// canonical color and whether it is new.
    pub fn push_token(&mut self, item: PresentedInterval, token: ColorToken) -> Result<(ColorId, bool), ModelError> {
        let (color, fresh) = match self.token_to_color.get(&token) {
            Some(&c) => (c, false),
            None => (self.tokens.len() as ColorId, true),
        };
        self.check_next(&item)?;
        if fresh {
            self.token_to_color.insert(token, color);
            self.tokens.push(token);
        }
        self.entries.push(Entry { item, color });
        Ok((color, fresh))
    }

    /// Appends an entry whose color is already canonical (or will be
    /// canonicalized as a token equal to it).
    pub fn push(&mut self, item: PresentedInterval, color: ColorToken) -> Result<ColorId, ModelError> {
        self.push_token(item, color).map(|(c, _)| c)
    }

    fn check_next(&self, item: &PresentedInterval) -> Result<(), ModelError> {
        if item.interval.lo >= item.interval.hi {
            return Err(ModelError::EmptyInterval {
                lo: item.interval.lo.to_string(),
                hi: item.interval.hi.to_string(),
            });
        }
        check_bandwidth(&item.bandwidth)?;
        if let Some(prev) = self.entries.last() {
            if item.id <= prev.item.id {
                return Err(ModelError::IdsNotIncreasing { prev: prev.item.id, next: item.id });
            }
        }
        Ok(())
    }

    /// Overwrites the tag of the most recent entry.
    pub fn retag_last(&mut self, tag: Tag) {
        if let Some(e) = self.entries.last_mut() {
            e.item.tag = tag;
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self.reprs()).expect("transcript serializes")
    }

    fn reprs(&self) -> Vec<EntryRepr> {
        self.entries
            .iter()
            .map(|e| EntryRepr {
                id: e.item.id,
                lo: e.item.interval.lo.clone(),
                hi: e.item.interval.hi.clone(),
                bandwidth: e.item.bandwidth.clone(),
                tag: e.item.tag.clone(),
                color: e.color,
            })
            .collect()
    }

    /// Rebuilds a transcript from its JSON array form. Color ids in the file
    /// are treated as tokens and re-canonicalized.
    pub fn from_json(v: &serde_json::Value) -> Result<Self, TranscriptParseError> {
        let reprs: Vec<EntryRepr> = serde_json::from_value(v.clone())?;
        Self::from_reprs(reprs)
    }

    pub fn from_json_str(s: &str) -> Result<Self, TranscriptParseError> {
        let reprs: Vec<EntryRepr> = serde_json::from_str(s)?;
        Self::from_reprs(reprs)
    }

    fn from_reprs(reprs: Vec<EntryRepr>) -> Result<Self, TranscriptParseError> {
        let mut t = Transcript::new();
        for r in reprs {
            let item = PresentedInterval {
                id: r.id,
                interval: Interval { lo: r.lo, hi: r.hi },
                bandwidth: r.bandwidth,
                tag: r.tag,
            };
            t.push(item, r.color as ColorToken)?;
        }
        Ok(t)
    }
}

impl Serialize for Transcript {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.reprs().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Transcript {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let reprs = Vec::<EntryRepr>::deserialize(d)?;
        Transcript::from_reprs(reprs).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Error)]
pub enum TranscriptParseError {
    #[error("malformed transcript JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid transcript entry: {0}")]
    Model(#[from] ModelError),
}

/// Offline coloring used as a colorability certificate.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coloring {
    pub colors: BTreeMap<u64, u32>,
}

impl Coloring {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn assign(&mut self, id: u64, color: u32) {
        self.colors.insert(id, color);
    }

    pub fn get(&self, id: u64) -> Option<u32> {
        self.colors.get(&id).copied()
    }

    pub fn distinct(&self) -> usize {
        self.colors.values().collect::<BTreeSet<_>>().len()
    }
}

/// Exact load of color `c` at point `p`.
pub fn load_at(t: &Transcript, p: &Dyadic, c: ColorId) -> Rational {
    t.entries()
        .iter()
        .filter(|e| e.color == c && e.item.interval.contains(p))
        .fold(Rational::zero(), |acc, e| acc + &e.item.bandwidth)
}

/// Maximum load of one weighted family of intervals. The load is piecewise
/// constant and can only rise at a left endpoint, so a sweep over sorted
/// endpoints finds the peak exactly. Returns the peak and a point attaining it.
pub fn peak_load<'a, I>(items: I) -> Option<(Rational, Dyadic)>
where
    I: IntoIterator<Item = (&'a Interval, &'a Rational)>,
{
    // Right endpoints sort before left endpoints at the same coordinate.
    let mut events: Vec<(&Dyadic, bool, &Rational)> = Vec::new();
    for (iv, bw) in items {
        events.push((&iv.lo, true, bw));
        events.push((&iv.hi, false, bw));
    }
    if events.is_empty() {
        return None;
    }
    events.sort_by(|a, b| a.0.cmp(b.0).then(a.1.cmp(&b.1)));
    let mut cur = Rational::zero();
    let mut best: Option<(Rational, Dyadic)> = None;
    for (x, is_start, bw) in events {
        if is_start {
            cur += bw;
            if best.as_ref().is_none_or(|(b, _)| &cur > b) {
                best = Some((cur.clone(), x.clone()));
            }
        } else {
            cur -= bw;
        }
    }
    best
}

/// Maximum over all points of `load_at(t, ., c)`.
pub fn max_color_load(t: &Transcript, c: ColorId) -> Rational {
    peak_load(
        t.entries()
            .iter()
            .filter(|e| e.color == c)
            .map(|e| (&e.item.interval, &e.item.bandwidth)),
    )
    .map_or_else(Rational::zero, |(l, _)| l)
}

pub fn distinct_colors(t: &Transcript) -> usize {
    t.entries().iter().map(|e| e.color).collect::<BTreeSet<_>>().len()
}
