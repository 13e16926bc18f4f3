//! Opponents for the presenters: first-fit, best-fit, worst-fit and a seeded
//! random-fit. Each only ever answers with a feasible color.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64;
use thiserror::Error;

use crate::engine::{Algorithm, Incoming, PublicView};
use crate::exactnum::Rational;
use crate::model::{ColorId, ColorToken};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ZooSpec {
    FirstFit,
    BestFit,
    WorstFit,
    RandomFit(u64),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown algorithm `{0}` (expected first-fit, best-fit, worst-fit or random-fit:<seed>)")]
pub struct ZooParseError(pub String);

impl FromStr for ZooSpec {
    type Err = ZooParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "first-fit" => Ok(ZooSpec::FirstFit),
            "best-fit" => Ok(ZooSpec::BestFit),
            "worst-fit" => Ok(ZooSpec::WorstFit),
            _ => s
                .strip_prefix("random-fit:")
                .and_then(|seed| seed.parse().ok())
                .map(ZooSpec::RandomFit)
                .ok_or_else(|| ZooParseError(s.to_string())),
        }
    }
}

impl fmt::Display for ZooSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ZooSpec::FirstFit => f.write_str("first-fit"),
            ZooSpec::BestFit => f.write_str("best-fit"),
            ZooSpec::WorstFit => f.write_str("worst-fit"),
            ZooSpec::RandomFit(seed) => write!(f, "random-fit:{seed}"),
        }
    }
}

impl ZooSpec {
    pub fn build(self) -> Box<dyn Algorithm + Send> {
        match self {
            ZooSpec::FirstFit => Box::new(FirstFit),
            ZooSpec::BestFit => Box::new(PeakFit { best: true }),
            ZooSpec::WorstFit => Box::new(PeakFit { best: false }),
            ZooSpec::RandomFit(seed) => Box::new(RandomFit::new(seed)),
        }
    }

    /// The three deterministic algorithms.
    pub fn deterministic() -> [ZooSpec; 3] {
        [ZooSpec::FirstFit, ZooSpec::BestFit, ZooSpec::WorstFit]
    }
}

fn answer(view: &PublicView<'_>, c: Option<ColorId>) -> ColorToken {
    match c {
        Some(c) => view.token_of(c).expect("existing color has a token"),
        None => view.fresh_token(),
    }
}

/// Smallest feasible color, else a new one.
#[derive(Debug, Clone, Default)]
pub struct FirstFit;

impl Algorithm for FirstFit {
    fn name(&self) -> String {
        ZooSpec::FirstFit.to_string()
    }

    fn choose_color(&mut self, view: &PublicView<'_>, incoming: &Incoming) -> ColorToken {
        let c = (0..view.color_count()).find(|&c| view.fits(c, incoming));
        answer(view, c)
    }
}

/// Feasible color with the highest (best-fit) or lowest (worst-fit) peak load
/// inside the incoming interval after placement; ties go to the smaller color.
#[derive(Debug, Clone)]
pub struct PeakFit {
    best: bool,
}

impl Algorithm for PeakFit {
    fn name(&self) -> String {
        if self.best { ZooSpec::BestFit } else { ZooSpec::WorstFit }.to_string()
    }

    fn choose_color(&mut self, view: &PublicView<'_>, incoming: &Incoming) -> ColorToken {
        let mut chosen: Option<(ColorId, Rational)> = None;
        for c in (0..view.color_count()).filter(|&c| view.fits(c, incoming)) {
            let peak = view.peak_after(c, incoming);
            let better = match &chosen {
                None => true,
                Some((_, p)) if self.best => &peak > p,
                Some((_, p)) => &peak < p,
            };
            if better {
                chosen = Some((c, peak));
            }
        }
        answer(view, chosen.map(|(c, _)| c))
    }
}

/// Uniform choice among the feasible colors and one fresh color, drawn from
/// PCG-XSL-RR-128/64 seeded with `Pcg64::seed_from_u64`.
#[derive(Debug, Clone)]
pub struct RandomFit {
    seed: u64,
    rng: Pcg64,
}

impl RandomFit {
    pub fn new(seed: u64) -> Self {
        RandomFit { seed, rng: Pcg64::seed_from_u64(seed) }
    }
}

impl Algorithm for RandomFit {
    fn name(&self) -> String {
        ZooSpec::RandomFit(self.seed).to_string()
    }

    fn choose_color(&mut self, view: &PublicView<'_>, incoming: &Incoming) -> ColorToken {
        let feasible: Vec<ColorId> = (0..view.color_count()).filter(|&c| view.fits(c, incoming)).collect();
        let pick = self.rng.gen_range(0..=feasible.len());
        answer(view, feasible.get(pick).copied())
    }
}
