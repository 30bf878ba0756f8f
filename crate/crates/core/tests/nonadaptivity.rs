//! The query oracle only ever sees one batch, fixed before any answer.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use monodist::approx::{approx_mono_on, ApproxMonoPlan, ApproxParams};
use monodist::error::Error;
use monodist::families;
use monodist::oracle::{Phase, QueryOracle};
use monodist::{Func, Point};

fn query_fingerprint(oracle: &QueryOracle<'_>) -> (u64, u64) {
    let mut h = DefaultHasher::new();
    let mut count = 0u64;
    oracle.for_each_query(|p| {
        p.0.hash(&mut h);
        count += 1;
    });
    (h.finish(), count)
}

#[test]
fn second_batch_is_refused() {
    let f = families::majority(5).unwrap();
    let mut oracle = QueryOracle::new(&f);
    assert_eq!(oracle.phase(), Phase::Collecting);
    oracle.batch_query(&[Point(0), Point(31)]).unwrap();
    assert_eq!(oracle.phase(), Phase::Answered);
    assert!(matches!(oracle.batch_query(&[Point(1)]), Err(Error::Protocol(_))));

    let plan = Arc::new(ApproxMonoPlan::new(&ApproxParams::experiment(0.25, 1), 5).unwrap());
    assert!(matches!(oracle.submit(plan.clone()), Err(Error::Protocol(_))));

    let mut fresh = QueryOracle::new(&f);
    fresh.submit(plan.clone()).unwrap();
    assert!(matches!(fresh.submit(plan), Err(Error::Protocol(_))));
}

#[test]
fn a_finished_run_cannot_query_again() {
    let f = families::antidictator(6, 2).unwrap();
    let params = ApproxParams::experiment(0.3, 9);
    let mut oracle = QueryOracle::new(&f);
    approx_mono_on(&params, &mut oracle).unwrap();
    assert!(matches!(approx_mono_on(&params, &mut oracle), Err(Error::Protocol(_))));
}

#[test]
fn unplanned_points_are_refused() {
    let f = families::majority(6).unwrap();
    let plan = Arc::new(ApproxMonoPlan::new(&ApproxParams::experiment(0.3, 4), 6).unwrap());
    let mut oracle = QueryOracle::new(&f);
    let sheet = oracle.submit(plan).unwrap();
    let probe = sheet.group(0).next().unwrap();
    let planned = probe.probe().points();
    for p in &planned {
        assert_eq!(probe.answer(*p).unwrap(), f.eval(*p));
    }
    let outside = (0..64).map(Point).find(|p| !planned.contains(p)).unwrap();
    assert!(matches!(probe.answer(outside), Err(Error::Protocol(_))));
}

#[test]
fn queries_do_not_depend_on_the_function() {
    let n = 6;
    let targets: Vec<Func> = vec![
        families::constant(n, false).unwrap(),
        families::antimajority(n).unwrap(),
        families::random(n, 0.5, 77).unwrap(),
    ];
    for seed in [1u64, 2, 3] {
        let params = ApproxParams::experiment(0.3, seed);
        let mut seen = Vec::new();
        let mut labels = Vec::new();
        for f in &targets {
            let mut oracle = QueryOracle::new(f);
            let verdict = approx_mono_on(&params, &mut oracle).unwrap();
            assert_eq!(verdict.query_count, query_fingerprint(&oracle).1);
            seen.push(query_fingerprint(&oracle));
            labels.push(verdict.label);
        }
        assert!(seen.windows(2).all(|w| w[0] == w[1]), "seed {seed}: {seen:?}");
        // the constant is monotone and must be labelled close
        assert!(!labels[0].eq(&monodist::approx::Label::Far));
    }
}
