//! Presenter strategies.
//!
//! - [`SchemaPresenter`]: separation subphases driven by a k-schema, then a
//!   bandwidth-1 final phase on the region that only marked intervals cover.
//! - [`KtPresenter`]: the bandwidth-1 game forcing `3w - 2` colors on a
//!   `w`-colorable set.
//! - [`UnitPresenter`]: unit-length intervals forcing `2k - 1` colors.

use std::collections::BTreeMap;

use crate::engine::{Move, Presenter, PresenterError, Request};
use crate::exactnum::{Dyadic, Rational};
use crate::model::{Coloring, Interval, Tag, Transcript};
use crate::oracle::greedy_interval_coloring;

pub mod kt;
pub mod separation;
pub mod unit;

pub use kt::KtGame;
pub use separation::{SchemaPresenter, Separation, SubphaseState};
pub use unit::UnitPresenter;

/// Standalone bandwidth-1 game on a region.
#[derive(Debug, Clone)]
pub struct KtPresenter {
    game: KtGame,
}

impl KtPresenter {
    pub fn new(omega: u32, region: Interval) -> Result<Self, PresenterError> {
        if omega == 0 {
            return Err(PresenterError::InvalidInput("omega must be at least 1".into()));
        }
        Ok(KtPresenter { game: KtGame::new(omega, region) })
    }

    /// On the region `[0, 1)`.
    pub fn unit_region(omega: u32) -> Result<Self, PresenterError> {
        Self::new(omega, Interval::new(Dyadic::zero(), Dyadic::from_int(1)).expect("nonempty"))
    }

    pub fn game(&self) -> &KtGame {
        &self.game
    }
}

impl Presenter for KtPresenter {
    fn name(&self) -> String {
        format!("kt(omega={})", self.game.omega())
    }

    fn next_move(&mut self, _: &Transcript) -> Result<Move, PresenterError> {
        Ok(match self.game.next_request() {
            Some(interval) => Move::Present(Request { interval, bandwidth: Rational::from_integer(1.into()), tag: Tag::Kt }),
            None => Move::Stop,
        })
    }

    fn observe(&mut self, t: &Transcript) -> Option<Tag> {
        self.game.feed(t.last().expect("answered entry").color);
        None
    }

    fn certificate(&self, t: &Transcript) -> Result<Coloring, PresenterError> {
        let items: Vec<(u64, &Interval)> = t.entries().iter().map(|e| (e.item.id, &e.item.interval)).collect();
        let colors: BTreeMap<u64, u32> = greedy_interval_coloring(&items);
        let mut c = Coloring::new();
        for (id, color) in colors {
            c.assign(id, color);
        }
        Ok(c)
    }

    fn default_budget(&self) -> u64 {
        kt::interval_bound(self.game.omega())
    }
}
