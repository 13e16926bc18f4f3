//! Unit-length intervals: the separation phase of `([1], [k])` followed by
//! `k - 1` bandwidth-1 copies starting at the middle of the surviving region.

use crate::engine::{Move, Presenter, PresenterError, Request};
use crate::exactnum::{Dyadic, Rational};
use crate::model::{Coloring, Interval, Tag, Transcript};
use crate::oracle;
use crate::schema::KSchema;

use super::separation::Separation;

#[derive(Debug, Clone)]
pub struct UnitPresenter {
    k: u64,
    sep: Separation,
    copies_left: u64,
}

impl UnitPresenter {
    pub fn new(k: u64) -> Result<Self, PresenterError> {
        let s = KSchema::single(k).map_err(|e| PresenterError::InvalidInput(e.to_string()))?;
        Ok(UnitPresenter { k, sep: Separation::new(s), copies_left: k - 1 })
    }
}

impl Presenter for UnitPresenter {
    fn name(&self) -> String {
        format!("unit(k={})", self.k)
    }

    fn next_move(&mut self, t: &Transcript) -> Result<Move, PresenterError> {
        if let Some(req) = self.sep.next_request(t)? {
            return Ok(Move::Present(req));
        }
        if self.copies_left == 0 {
            return Ok(Move::Stop);
        }
        self.copies_left -= 1;
        let (l, r) = self.sep.final_region().expect("separation finished");
        let p = Dyadic::mid(l, r);
        let hi = &p + &Dyadic::from_int(1);
        Ok(Move::Present(Request {
            interval: Interval::new(p, hi).expect("unit interval"),
            bandwidth: Rational::from_integer(1.into()),
            tag: Tag::UnitFinal,
        }))
    }

    fn observe(&mut self, t: &Transcript) -> Option<Tag> {
        if self.sep.is_done() && t.last().is_some_and(|e| e.item.tag == Tag::UnitFinal) {
            None
        } else {
            Some(self.sep.observe(t))
        }
    }

    fn certificate(&self, t: &Transcript) -> Result<Coloring, PresenterError> {
        oracle::constructive_coloring(t, self.sep.schema()).map_err(|e| PresenterError::CertificateInfeasible(e.to_string()))
    }

    fn default_budget(&self) -> u64 {
        self.k * self.k + self.k - 1
    }
}
