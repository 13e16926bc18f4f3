//! The referee: plays a presenter against an algorithm round by round and
//! checks every answer.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use crate::exactnum::{render_rational, Dyadic, Rational};
use crate::model::{
    peak_load, ColorId, ColorToken, Coloring, CoordId, Interval, LoadIndex, ModelError, PresentedInterval, Tag,
    Transcript,
};

/// One presented interval, before the algorithm has answered.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Request {
    pub interval: Interval,
    pub bandwidth: Rational,
    pub tag: Tag,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Move {
    Present(Request),
    Stop,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PresenterError {
    #[error("subphase {subphase} exceeded its budget of {limit} intervals")]
    SubphaseBudgetExceeded { subphase: usize, limit: String },
    #[error("certificate infeasible: {0}")]
    CertificateInfeasible(String),
    #[error("presenter rejected its input: {0}")]
    InvalidInput(String),
}

pub trait Presenter {
    fn name(&self) -> String;

    /// The next interval to present, or `Stop`. Must be a function of the
    /// transcript prefix and the presenter's own earlier moves.
    fn next_move(&mut self, t: &Transcript) -> Result<Move, PresenterError>;

    /// Sees the answer to the last request (now the last transcript entry) and
    /// may return a refined tag for it.
    fn observe(&mut self, t: &Transcript) -> Option<Tag>;

    /// A coloring of every presented interval that the presenter claims is
    /// legal.
    fn certificate(&self, t: &Transcript) -> Result<Coloring, PresenterError>;

    /// Rounds the presenter needs at most against a legal algorithm.
    fn default_budget(&self) -> u64;
}

/// The incoming interval as the algorithm sees it. Coordinates are already
/// registered with the load index.
#[derive(Debug, Clone)]
pub struct Incoming {
    pub interval: Interval,
    pub bandwidth: Rational,
    pub lo: CoordId,
    pub hi: CoordId,
}

/// What an algorithm may look at: intervals, bandwidths and its own colors,
/// never the presenter's tags.
pub struct PublicView<'a> {
    transcript: &'a Transcript,
    loads: &'a LoadIndex,
}

impl<'a> PublicView<'a> {
    pub fn len(&self) -> usize {
        self.transcript.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transcript.is_empty()
    }

    /// Interval, bandwidth and canonical color of round `i`.
    pub fn entry(&self, i: usize) -> (&'a Interval, &'a Rational, ColorId) {
        let e = &self.transcript.entries()[i];
        (&e.item.interval, &e.item.bandwidth, e.color)
    }

    pub fn color_count(&self) -> u32 {
        self.transcript.color_count()
    }

    /// Token to answer with in order to reuse canonical color `c`.
    pub fn token_of(&self, c: ColorId) -> Option<ColorToken> {
        self.transcript.token_of(c)
    }

    /// A token never used before.
    pub fn fresh_token(&self) -> ColorToken {
        (0..self.color_count()).filter_map(|c| self.token_of(c)).max().map_or(0, |m| m + 1)
    }

    pub fn loads(&self) -> &LoadIndex {
        self.loads
    }

    pub fn fits(&self, c: ColorId, incoming: &Incoming) -> bool {
        self.loads.fits(c, incoming.lo, incoming.hi, &incoming.bandwidth)
    }

    /// Peak load of color `c` inside the incoming interval after adding it.
    pub fn peak_after(&self, c: ColorId, incoming: &Incoming) -> Rational {
        self.loads.peak_in(c, incoming.lo, incoming.hi) + &incoming.bandwidth
    }
}

pub trait Algorithm {
    fn name(&self) -> String;
    fn choose_color(&mut self, view: &PublicView<'_>, incoming: &Incoming) -> ColorToken;
}

/// A point where one color's load exceeds 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub color: ColorId,
    pub point: Dyadic,
    #[serde(with = "crate::exactnum::rational_str")]
    pub load: Rational,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GameError {
    #[error("round {round}: color {color} reaches load {} at {point}", render_rational(.load))]
    IllegalColor { round: usize, point: Dyadic, color: ColorId, load: Rational },
    #[error("presenter did not stop within {budget} rounds")]
    BudgetExhausted { budget: u64 },
    #[error("presenter certificate is invalid: {0}")]
    InvalidCertificate(String),
    #[error(transparent)]
    Presenter(#[from] PresenterError),
    #[error("malformed request: {0}")]
    BadRequest(#[from] ModelError),
}

impl GameError {
    /// Process exit status for this class of failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            GameError::IllegalColor { .. } => 3,
            GameError::BudgetExhausted { .. } => 4,
            GameError::InvalidCertificate(_) => 5,
            GameError::Presenter(_) => 6,
            GameError::BadRequest(_) => 7,
        }
    }
}

/// A failed game together with the transcript played so far.
#[derive(Debug, Clone)]
pub struct GameFailure {
    pub error: GameError,
    pub transcript: Transcript,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PhaseStats {
    pub phase: String,
    pub intervals: usize,
    pub new_colors: usize,
}

#[derive(Debug, Clone)]
pub struct GameReport {
    pub presenter: String,
    pub algorithm: String,
    pub transcript: Transcript,
    pub colors_used: usize,
    pub certificate: Coloring,
    pub certificate_colors: usize,
    pub violations: Vec<Violation>,
    pub per_phase_stats: Vec<PhaseStats>,
}

impl GameReport {
    pub fn summary_json(&self) -> Value {
        serde_json::json!({
            "presenter": self.presenter,
            "algorithm": self.algorithm,
            "intervals": self.transcript.len(),
            "colors_used": self.colors_used,
            "certificate_colors": self.certificate_colors,
            "violations": self.violations,
            "per_phase_stats": self.per_phase_stats,
        })
    }

    pub fn to_json(&self) -> Value {
        let mut v = self.summary_json();
        let colors: BTreeMap<String, u32> =
            self.certificate.colors.iter().map(|(id, c)| (id.to_string(), *c)).collect();
        v["certificate"] = serde_json::json!({ "colors": colors });
        v["transcript"] = self.transcript.to_json();
        v
    }
}

/// Runs one game. Every answer is checked against the exact per-color loads
/// inside the incoming interval, the only place they can change.
pub fn play(p: &mut dyn Presenter, a: &mut dyn Algorithm, budget: u64) -> Result<GameReport, Box<GameFailure>> {
    let mut t = Transcript::new();
    let mut loads = LoadIndex::new();
    let fail = |error: GameError, t: Transcript| Box::new(GameFailure { error, transcript: t });
    let mut rounds = 0u64;
    loop {
        let mv = match p.next_move(&t) {
            Ok(mv) => mv,
            Err(e) => return Err(fail(e.into(), t)),
        };
        let req = match mv {
            Move::Stop => break,
            Move::Present(r) => r,
        };
        if rounds == budget {
            return Err(fail(GameError::BudgetExhausted { budget }, t));
        }
        rounds += 1;
        let item = PresentedInterval { id: t.next_id(), interval: req.interval, bandwidth: req.bandwidth, tag: req.tag };
        if let Err(e) = crate::model::check_bandwidth(&item.bandwidth) {
            return Err(fail(e.into(), t));
        }
        let lo = loads.register(&item.interval.lo);
        let hi = loads.register(&item.interval.hi);
        let incoming = Incoming { interval: item.interval.clone(), bandwidth: item.bandwidth.clone(), lo, hi };
        let token = a.choose_color(&PublicView { transcript: &t, loads: &loads }, &incoming);
        if let Some(c) = t.lookup_token(token) {
            if !loads.fits(c, lo, hi, &item.bandwidth) {
                let (load, point) = peak_load(
                    t.entries()
                        .iter()
                        .filter(|e| e.color == c)
                        .map(|e| (&e.item.interval, &e.item.bandwidth))
                        .chain(std::iter::once((&item.interval, &item.bandwidth))),
                )
                .expect("at least the incoming interval");
                let round = t.len() + 1;
                return Err(fail(GameError::IllegalColor { round, point, color: c, load }, t));
            }
        }
        let bw = item.bandwidth.clone();
        let (color, _) = match t.push_token(item, token) {
            Ok(r) => r,
            Err(e) => return Err(fail(e.into(), t)),
        };
        loads.add(color, lo, hi, &bw);
        if let Some(tag) = p.observe(&t) {
            t.retag_last(tag);
        }
    }
    let certificate = match p.certificate(&t) {
        Ok(c) => c,
        Err(e) => return Err(fail(e.into(), t)),
    };
    let bad = validate_coloring(&t, &certificate);
    if let Err(msg) = bad {
        return Err(fail(GameError::InvalidCertificate(msg), t));
    }
    let violations = verify_transcript(&t);
    Ok(GameReport {
        presenter: p.name(),
        algorithm: a.name(),
        colors_used: t.color_count() as usize,
        certificate_colors: certificate.distinct(),
        certificate,
        violations,
        per_phase_stats: phase_stats(&t),
        transcript: t,
    })
}

/// Per-color peak loads recomputed from scratch; one violation per color
/// whose peak exceeds 1.
pub fn verify_transcript(t: &Transcript) -> Vec<Violation> {
    let mut groups: BTreeMap<ColorId, Vec<(&Interval, &Rational)>> = BTreeMap::new();
    for e in t.entries() {
        groups.entry(e.color).or_default().push((&e.item.interval, &e.item.bandwidth));
    }
    overloads(groups)
}

fn overloads(groups: BTreeMap<ColorId, Vec<(&Interval, &Rational)>>) -> Vec<Violation> {
    let one = Rational::from_integer(1.into());
    groups
        .into_iter()
        .filter_map(|(color, items)| {
            let (load, point) = peak_load(items)?;
            (load > one).then_some(Violation { color, point, load })
        })
        .collect()
}

/// Checks that `c` colors every entry and keeps every color class at load at
/// most 1.
pub fn validate_coloring(t: &Transcript, c: &Coloring) -> Result<(), String> {
    let mut groups: BTreeMap<ColorId, Vec<(&Interval, &Rational)>> = BTreeMap::new();
    for e in t.entries() {
        let color = c.get(e.item.id).ok_or_else(|| format!("interval {} has no color", e.item.id))?;
        groups.entry(color).or_default().push((&e.item.interval, &e.item.bandwidth));
    }
    match overloads(groups).first() {
        None => Ok(()),
        Some(v) => Err(format!("color {} reaches load {} at {}", v.color, render_rational(&v.load), v.point)),
    }
}

/// Intervals and new colors per phase label, in order of first appearance.
pub fn phase_stats(t: &Transcript) -> Vec<PhaseStats> {
    let mut out: Vec<PhaseStats> = Vec::new();
    let mut seen = 0u32;
    for e in t.entries() {
        let phase = e.item.tag.phase();
        let idx = match out.iter().position(|s| s.phase == phase) {
            Some(i) => i,
            None => {
                out.push(PhaseStats { phase, intervals: 0, new_colors: 0 });
                out.len() - 1
            }
        };
        out[idx].intervals += 1;
        if e.color == seen {
            seen += 1;
            out[idx].new_colors += 1;
        }
    }
    out
}
