use arena_core::algorithms::ZooSpec;
use arena_core::engine::{play, verify_transcript, validate_coloring, Move, Presenter, Request};
use arena_core::exactnum::{ratio, BigInt, Dyadic};
use arena_core::model::{intersects, Interval, Tag, Transcript};
use arena_core::presenters::{KtPresenter, SchemaPresenter, UnitPresenter};
use arena_core::schema::{self, KSchema};

fn dy(s: &str) -> Dyadic {
    s.parse().unwrap()
}

#[test]
fn first_separation_move() {
    let mut p = SchemaPresenter::new(schema::s120_scalable(), true).unwrap();
    let st = p.separation().state().unwrap().clone();
    assert_eq!((st.big_l.clone(), st.big_r.clone()), (dy("0"), dy("2")));
    assert_eq!((st.length.clone(), st.l.clone(), st.r.clone()), (dy("1"), dy("1"), dy("2")));
    assert_eq!(st.p(), dy("3/2"));
    let Move::Present(Request { interval, bandwidth, tag }) = p.next_move(&Transcript::new()).unwrap() else {
        panic!("expected a request")
    };
    assert_eq!(interval, Interval::new(dy("1/2"), dy("3/2")).unwrap());
    assert_eq!(bandwidth, ratio(1, 120));
    assert_eq!(tag, Tag::Sep { subphase: 1, marked: false });
}

#[test]
fn non_strategies_are_refused() {
    assert!(SchemaPresenter::new(schema::s120().scale(&BigInt::from(3)), true).is_err());
}

#[test]
fn single_row_games_force_four_k_minus_five() {
    for k in 2..=4u64 {
        for spec in ZooSpec::deterministic().into_iter().chain((0..5).map(ZooSpec::RandomFit)) {
            let mut p = SchemaPresenter::new(KSchema::single(k).unwrap(), true).unwrap();
            let budget = p.default_budget();
            let r = play(&mut p, spec.build().as_mut(), budget).unwrap();
            assert!(r.colors_used as u64 >= 4 * k - 5, "k={k} {spec}: {}", r.colors_used);
            assert!(r.certificate_colors as u64 <= k);
            assert!(r.violations.is_empty());
            // Separation colors never reappear in the final phase.
            let sep_colors: Vec<u32> =
                r.transcript.entries().iter().filter(|e| e.item.tag.subphase().is_some()).map(|e| e.color).collect();
            assert!(r
                .transcript
                .entries()
                .iter()
                .filter(|e| e.item.tag == Tag::Final)
                .all(|e| !sep_colors.contains(&e.color)));
        }
    }
}

#[test]
fn subphase_geometry() {
    let s = KSchema::from_u64(36, &[(1, 20), (2, 3), (3, 4), (6, 2)]).unwrap();
    assert!(schema::is_k_strategy(&s));
    for spec in [ZooSpec::FirstFit, ZooSpec::WorstFit, ZooSpec::RandomFit(3)] {
        let mut p = SchemaPresenter::new(s.clone(), false).unwrap();
        let budget = p.default_budget();
        let r = play(&mut p, spec.build().as_mut(), budget).unwrap();
        let t = &r.transcript;
        for i in 1..=s.n() {
            let sub: Vec<_> = t.entries().iter().filter(|e| e.item.tag.subphase() == Some(i)).collect();
            // Pairwise intersecting.
            for a in &sub {
                for b in &sub {
                    assert!(intersects(&a.item.interval, &b.item.interval));
                }
            }
            let new = r.per_phase_stats.iter().find(|st| st.phase == format!("sep:{i}")).unwrap();
            assert_eq!(BigInt::from(new.new_colors), s.rows()[i - 1].x);
            assert!(BigInt::from(new.intervals) <= *p.separation().limit(i));
            // Reused colors receive at most k/j - 1 intervals in the subphase.
            let cap = 36 / s.rows()[i - 1].j.to_string().parse::<usize>().unwrap() - 1;
            let seen_before: std::collections::BTreeSet<u32> =
                t.entries().iter().filter(|e| e.item.tag.subphase().is_some_and(|q| q < i)).map(|e| e.color).collect();
            for c in &seen_before {
                assert!(sub.iter().filter(|e| e.color == *c).count() <= cap);
            }
        }
        // Marked intervals cover the surviving region.
        let (lo, hi) = p.separation().final_region().unwrap();
        for e in t.entries().iter().filter(|e| e.item.tag.is_marked()) {
            assert!(e.item.interval.lo <= *lo && e.item.interval.hi >= *hi);
        }
        let coloring = arena_core::oracle::constructive_coloring(t, &s).unwrap();
        assert!(validate_coloring(t, &coloring).is_ok());
        let marked_colors: std::collections::BTreeSet<u32> =
            t.entries().iter().filter(|e| e.item.tag.is_marked()).map(|e| coloring.get(e.item.id).unwrap()).collect();
        assert_eq!(BigInt::from(marked_colors.len()), schema::gamma(&s, s.n()).unwrap());
    }
}

#[test]
fn unit_games() {
    for k in 1..=6u64 {
        for spec in ZooSpec::deterministic().into_iter().chain([ZooSpec::RandomFit(11)]) {
            let mut p = UnitPresenter::new(k).unwrap();
            let budget = p.default_budget();
            let r = play(&mut p, spec.build().as_mut(), budget).unwrap();
            assert!(r.colors_used as u64 >= 2 * k - 1);
            assert!(r.certificate_colors as u64 <= k);
            assert!(r.transcript.entries().iter().all(|e| e.item.interval.length() == Dyadic::from_int(1)));
        }
    }
}

#[test]
fn kt_games() {
    for omega in 1..=3u32 {
        for spec in ZooSpec::deterministic().into_iter().chain((0..3).map(ZooSpec::RandomFit)) {
            let mut p = KtPresenter::unit_region(omega).unwrap();
            let budget = p.default_budget();
            let r = play(&mut p, spec.build().as_mut(), budget).unwrap();
            assert!(r.colors_used >= 3 * omega as usize - 2, "omega={omega} {spec}");
            assert_eq!(r.certificate_colors, omega as usize);
            let region = Interval::new(dy("0"), dy("1")).unwrap();
            assert!(r.transcript.entries().iter().all(|e| e.item.interval.within(&region)));
        }
    }
}

#[test]
fn replay_is_deterministic() {
    let run = || {
        let mut p = SchemaPresenter::new(KSchema::single(4).unwrap(), true).unwrap();
        let r = play(&mut p, ZooSpec::RandomFit(5).build().as_mut(), 10_000).unwrap();
        serde_json::to_string(&r.transcript.to_json()).unwrap()
    };
    assert_eq!(run(), run());
}

#[test]
fn scalable_separation_game() {
    let start = std::time::Instant::now();
    let mut p = SchemaPresenter::new(schema::s120_scalable(), false).unwrap();
    let budget = p.default_budget();
    let r = play(&mut p, ZooSpec::FirstFit.build().as_mut(), budget).unwrap();
    eprintln!("{} intervals in {:?}", r.transcript.len(), start.elapsed());
    assert_eq!(r.colors_used, 152);
    assert!(r.certificate_colors <= 120);
    assert!(verify_transcript(&r.transcript).is_empty());
}
