//! The separation phase of a schema strategy and the full schema presenter.

use num_traits::{ToPrimitive, Zero};

use crate::engine::{Move, Presenter, PresenterError, Request};
use crate::exactnum::{BigInt, Dyadic, Rational};
use crate::model::{Coloring, Interval, Tag, Transcript};
use crate::oracle;
use crate::schema::{self, KSchema};

use super::kt::{self, KtGame};

/// Bisection state of the current subphase.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubphaseState {
    /// 1-based subphase index.
    pub index: usize,
    /// Region `[big_l, big_r)` the subphase plays in.
    pub big_l: Dyadic,
    pub big_r: Dyadic,
    /// Every interval of the subphase has this length.
    pub length: Dyadic,
    /// Reused colors end at or left of `l`; new colors start being pushed
    /// right of `r`.
    pub l: Dyadic,
    pub r: Dyadic,
    pub new_colors: BigInt,
    pub presented: BigInt,
}

impl SubphaseState {
    fn start(index: usize, big_l: Dyadic, big_r: Dyadic) -> Self {
        let length = (&big_r - &big_l).half();
        SubphaseState {
            index,
            l: &big_l + &length,
            r: big_r.clone(),
            big_l,
            big_r,
            length,
            new_colors: BigInt::zero(),
            presented: BigInt::zero(),
        }
    }

    /// Midpoint of `[l, r)`: the right end of the next interval.
    pub fn p(&self) -> Dyadic {
        Dyadic::mid(&self.l, &self.r)
    }
}

/// Runs the subphases of a schema one interval at a time.
#[derive(Debug, Clone)]
pub struct Separation {
    schema: KSchema,
    bandwidths: Vec<Rational>,
    limits: Vec<BigInt>,
    state: Option<SubphaseState>,
    pending: Option<(Dyadic, u32)>,
    marked: Vec<u64>,
    region_after: Option<(Dyadic, Dyadic)>,
}

impl Separation {
    pub fn new(schema: KSchema) -> Self {
        let k = schema.k().clone();
        let bandwidths = schema.rows().iter().map(|r| Rational::new(r.j.clone(), k.clone())).collect();
        // Subphase i presents at most (k / j_i)(k - gamma_{i-1}) intervals.
        let gammas: Vec<BigInt> = schema::derive(&schema).into_iter().map(|r| r.gamma).collect();
        let limits = schema
            .rows()
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let prev = if i == 0 { BigInt::zero() } else { gammas[i - 1].clone() };
                (&k / &r.j) * (&k - prev)
            })
            .collect();
        let first = (schema.n() > 0).then(|| SubphaseState::start(1, Dyadic::zero(), Dyadic::from_int(2)));
        let region_after = (schema.n() == 0).then(|| (Dyadic::zero(), Dyadic::from_int(2)));
        Separation { schema, bandwidths, limits, state: first, pending: None, marked: Vec::new(), region_after }
    }

    pub fn schema(&self) -> &KSchema {
        &self.schema
    }

    pub fn state(&self) -> Option<&SubphaseState> {
        self.state.as_ref()
    }

    /// Ids of the marked intervals, in order.
    pub fn marked(&self) -> &[u64] {
        &self.marked
    }

    /// `[L_{n+1}, R_{n+1})` once all subphases are over.
    pub fn final_region(&self) -> Option<(&Dyadic, &Dyadic)> {
        self.region_after.as_ref().map(|(a, b)| (a, b))
    }

    /// Interval budget of subphase `i` (1-based).
    pub fn limit(&self, i: usize) -> &BigInt {
        &self.limits[i - 1]
    }

    pub fn is_done(&self) -> bool {
        self.state.is_none()
    }

    pub fn next_request(&mut self, t: &Transcript) -> Result<Option<Request>, PresenterError> {
        let Some(st) = &mut self.state else { return Ok(None) };
        let i = st.index;
        if st.presented >= self.limits[i - 1] {
            return Err(PresenterError::SubphaseBudgetExceeded { subphase: i, limit: self.limits[i - 1].to_string() });
        }
        st.presented += 1;
        let p = st.p();
        let lo = &p - &st.length;
        self.pending = Some((p.clone(), t.color_count()));
        Ok(Some(Request {
            interval: Interval::new(lo, p).expect("subphase intervals are nonempty"),
            bandwidth: self.bandwidths[i - 1].clone(),
            tag: Tag::Sep { subphase: i, marked: false },
        }))
    }

    /// Updates the bisection with the answer to the last request and returns
    /// its tag.
    pub fn observe(&mut self, t: &Transcript) -> Tag {
        let (p, colors_before) = self.pending.take().expect("observe follows a request");
        let st = self.state.as_mut().expect("subphase in progress");
        let i = st.index;
        let fresh = t.color_count() > colors_before;
        if fresh {
            st.r = p;
            st.new_colors += 1;
            self.marked.push(t.last().expect("answered entry").item.id);
        } else {
            st.l = p;
        }
        if st.new_colors == self.schema.rows()[i - 1].x {
            let (l, r) = (st.l.clone(), st.r.clone());
            if i == self.schema.n() {
                self.state = None;
                self.region_after = Some((l, r));
            } else {
                self.state = Some(SubphaseState::start(i + 1, l, r));
            }
        }
        Tag::Sep { subphase: i, marked: fresh }
    }
}

/// Separation phase followed by the bandwidth-1 final phase on the surviving
/// region with `w = k - gamma_n`.
#[derive(Debug, Clone)]
pub struct SchemaPresenter {
    sep: Separation,
    final_phase: Option<KtGame>,
    with_final: bool,
    omega: u32,
    in_final: bool,
}

impl SchemaPresenter {
    /// Requires a k-strategy. `with_final = false` stops after the separation
    /// phase.
    pub fn new(s: KSchema, with_final: bool) -> Result<Self, PresenterError> {
        if let Some(v) = schema::first_strategy_violation(&s) {
            return Err(PresenterError::InvalidInput(format!(
                "not a k-strategy: subphase {} asks for {} > {}",
                v.index, v.x, v.bound
            )));
        }
        let gamma_n = schema::gamma(&s, s.n()).expect("full prefix");
        let omega = (s.k() - gamma_n).to_u32().unwrap_or(u32::MAX);
        Ok(SchemaPresenter { sep: Separation::new(s), final_phase: None, with_final, omega, in_final: false })
    }

    pub fn separation(&self) -> &Separation {
        &self.sep
    }

    pub fn omega(&self) -> u32 {
        self.omega
    }
}

impl Presenter for SchemaPresenter {
    fn name(&self) -> String {
        format!("schema(k={}, n={}{})", self.sep.schema().k(), self.sep.schema().n(), if self.with_final { "" } else { ", sep-only" })
    }

    fn next_move(&mut self, t: &Transcript) -> Result<Move, PresenterError> {
        if let Some(req) = self.sep.next_request(t)? {
            return Ok(Move::Present(req));
        }
        if !self.with_final {
            return Ok(Move::Stop);
        }
        if self.final_phase.is_none() {
            let (lo, hi) = self.sep.final_region().expect("separation finished");
            let region = Interval::new(lo.clone(), hi.clone()).expect("final region is nonempty");
            self.final_phase = Some(KtGame::new(self.omega, region));
        }
        let game = self.final_phase.as_mut().expect("just created");
        self.in_final = true;
        Ok(match game.next_request() {
            Some(interval) => Move::Present(Request { interval, bandwidth: Rational::from_integer(1.into()), tag: Tag::Final }),
            None => Move::Stop,
        })
    }

    fn observe(&mut self, t: &Transcript) -> Option<Tag> {
        if self.in_final {
            let game = self.final_phase.as_mut().expect("final phase running");
            game.feed(t.last().expect("answered entry").color);
            None
        } else {
            Some(self.sep.observe(t))
        }
    }

    fn certificate(&self, t: &Transcript) -> Result<Coloring, PresenterError> {
        oracle::constructive_coloring(t, self.sep.schema()).map_err(|e| PresenterError::CertificateInfeasible(e.to_string()))
    }

    fn default_budget(&self) -> u64 {
        let sep = self.sep.limits.iter().fold(BigInt::zero(), |acc, l| acc + l).to_u64().unwrap_or(u64::MAX);
        let fin = if self.with_final { kt::interval_bound(self.omega) } else { 0 };
        sep.saturating_add(fin)
    }
}
