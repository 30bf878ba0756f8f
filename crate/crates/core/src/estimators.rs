//! The two sampling subroutines and the capture predicate.
//!
//! Both estimators describe their trials as a single [`ProbeGroup`] and run
//! it through a [`QueryOracle`], so the sampled points depend only on the
//! seed. `log` is base 2 in every sample-size formula.

use std::sync::Arc;

use crate::cube::{DimSet, Point};
use crate::error::{Error, Result};
use crate::func::Func;
use crate::oracle::{AnsweredProbe, GroupPlan, ProbeGroup, ProbeShape, QueryOracle};
use crate::rng;

/// The capture event at `x` for direction set `S`, reading `f` through
/// `bit`.
///
/// Some `i` in `S` must give a decreasing edge `(x, y = x^(i))`, so `x_i = 0`,
/// `f(x) = 1`, `f(y) = 0`; and every other `j` in `S` must leave the edge
/// between `y` and `y^(j)` nondecreasing. Since `f(y) = 0` that edge can only
/// be decreasing when `y` is its upper end, i.e. `y_j = 1` and `f(y^(j)) = 1`.
pub fn capture_by<E>(
    x: Point,
    set: DimSet,
    mut bit: impl FnMut(Point) -> std::result::Result<bool, E>,
) -> std::result::Result<bool, E> {
    if set.is_empty() || !bit(x)? {
        return Ok(false);
    }
    'candidates: for i in set.bits() {
        if x.bit(i) {
            continue;
        }
        let y = x.toggle_bit(i);
        if bit(y)? {
            continue;
        }
        for j in set.bits() {
            if j != i && y.bit(j) && bit(y.toggle_bit(j))? {
                continue 'candidates;
            }
        }
        return Ok(true);
    }
    Ok(false)
}

/// `Capture(x, S, f)` for a total function.
pub fn capture(x: Point, set: DimSet, f: &Func) -> Result<bool> {
    capture_by(x, set, |p| f.bit(p))
}

pub(crate) fn capture_answered(probe: &AnsweredProbe<'_>, set: DimSet) -> Result<bool> {
    capture_by(probe.probe().x(), set, |p| {
        probe
            .answer(p)?
            .bit()
            .ok_or_else(|| Error::Precondition(format!("erased value at point {}", p.0)))
    })
}

pub(crate) fn edge_answered(probe: &AnsweredProbe<'_>) -> Result<bool> {
    let p = probe.probe();
    let bit = p.edge_bit().expect("edge probe");
    let lo = probe.answer(p.x().with_bit(bit, false))?;
    let hi = probe.answer(p.x().with_bit(bit, true))?;
    match (lo.bit(), hi.bit()) {
        (Some(a), Some(b)) => Ok(a && !b),
        _ => Err(Error::Precondition("erased value on a sampled edge".into())),
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::arg(format!("delta={delta} outside (0,1)")));
    }
    Ok(())
}

fn trials_from(numerator: f64, delta: f64) -> Result<u64> {
    let t = (numerator / (delta * delta)).ceil();
    if !t.is_finite() || t >= 2f64.powi(63) {
        return Err(Error::resource("trial count", "2^63"));
    }
    Ok((t as u64).max(1))
}

/// `ceil(10 log n / delta^2)`, at least 1.
pub fn edge_violation_trials(n: u32, delta: f64) -> Result<u64> {
    check_delta(delta)?;
    trials_from(10.0 * f64::from(n).log2(), delta)
}

/// `ceil(10 log(n / eps_outer) / delta^2)`, at least 1.
pub fn matching_trials(n: u32, eps_outer: f64, delta: f64) -> Result<u64> {
    check_delta(delta)?;
    // 1/2 is admitted for the first level of the distance schedule
    if !(eps_outer > 0.0 && eps_outer <= 0.5) {
        return Err(Error::arg(format!("eps_outer={eps_outer} outside (0,1/2]")));
    }
    trials_from(10.0 * (f64::from(n) / eps_outer).log2(), delta)
}

/// A counting estimate `hits / trials`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Estimate {
    pub hits: u64,
    pub trials: u64,
    pub queries: u64,
}

impl Estimate {
    pub fn value(&self) -> f64 {
        self.hits as f64 / self.trials as f64
    }
}

pub(crate) fn edge_group(seed: u64, trials: u64) -> ProbeGroup {
    ProbeGroup {
        shape: ProbeShape::Edge,
        stream: rng::derive(seed, &[rng::EDGE]),
        trials,
    }
}

/// Estimates the fraction of decreasing edges to within `delta`.
pub fn edge_violations(delta: f64, f: &Func, seed: u64) -> Result<Estimate> {
    f.require_total()?;
    let trials = edge_violation_trials(f.n(), delta)?;
    let mut oracle = QueryOracle::new(f);
    let sheet = oracle.submit(Arc::new(GroupPlan::new(f.n(), vec![edge_group(seed, trials)])))?;
    let mut hits = 0;
    for probe in sheet.group(0) {
        hits += u64::from(edge_answered(&probe)?);
    }
    Ok(Estimate {
        hits,
        trials,
        queries: oracle.query_count()?,
    })
}

/// Estimates `Pr_x[Capture(x, S, f) = 1]` to within `delta`.
pub fn matching_estimation(
    set: DimSet,
    delta: f64,
    f: &Func,
    eps_outer: f64,
    seed: u64,
) -> Result<Estimate> {
    f.require_total()?;
    if set.0 & !crate::cube::low_mask(f.n()) != 0 {
        return Err(Error::arg(format!("set {set} not inside [{}]", f.n())));
    }
    let trials = matching_trials(f.n(), eps_outer, delta)?;
    let group = ProbeGroup {
        shape: ProbeShape::Capture(set),
        stream: rng::derive(seed, &[rng::MATCH]),
        trials,
    };
    let mut oracle = QueryOracle::new(f);
    let sheet = oracle.submit(Arc::new(GroupPlan::new(f.n(), vec![group])))?;
    let mut hits = 0;
    for probe in sheet.group(0) {
        hits += u64::from(capture_answered(&probe, set)?);
    }
    Ok(Estimate {
        hits,
        trials,
        queries: oracle.query_count()?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families;

    #[test]
    fn capture_examples() {
        let a = families::antidictator(2, 1).unwrap();
        assert!(!capture(Point(0), DimSet::EMPTY, &a).unwrap());
        assert!(capture(Point(0b00), DimSet(0b01), &a).unwrap());
        // x_1 = 1 means f(x) = 0
        assert!(!capture(Point(0b01), DimSet(0b01), &a).unwrap());
        assert!(!capture(Point(0b00), DimSet(0b10), &a).unwrap());
    }

    #[test]
    fn capture_needs_clean_neighbourhood() {
        // f = 1 at 000 and 100 only (dimension 3 = bit 2)
        let f = Func::from_rule(3, |x| x.0 & 0b011 == 0).unwrap();
        assert!(capture(Point(0), DimSet(0b101), &f).unwrap());
        // y = 101 sits above 001 along dimension 3, and f(001) = 0
        assert!(capture(Point(0b100), DimSet(0b101), &f).unwrap());
        // setting g(001) = 1 makes (001, 101) decreasing
        let g = Func::from_rule(3, |x| x.0 & 0b011 == 0 || x.0 == 0b001).unwrap();
        assert!(!capture(Point(0b100), DimSet(0b101), &g).unwrap());
    }

    #[test]
    fn trial_formulas() {
        assert_eq!(edge_violation_trials(10, 0.05).unwrap(), 13288);
        assert_eq!(matching_trials(10, 0.1, 0.05).unwrap(), 26576);
        assert_eq!(edge_violation_trials(1, 0.5).unwrap(), 1);
        assert!(edge_violation_trials(4, 0.0).is_err());
        assert!(matching_trials(4, 0.6, 0.1).is_err());
    }

    #[test]
    fn constants_estimate_zero() {
        let f = families::constant(6, true).unwrap();
        let e = edge_violations(0.2, &f, 1).unwrap();
        assert_eq!(e.hits, 0);
        assert_eq!(e.queries, 2 * e.trials);
        let m = matching_estimation(DimSet::full(6), 0.1, &f, 0.1, 2).unwrap();
        assert_eq!(m.hits, 0);
        assert_eq!(m.queries, m.trials * 37);
        let empty = matching_estimation(DimSet::EMPTY, 0.1, &families::antidictator(6, 1).unwrap(), 0.1, 3)
            .unwrap();
        assert_eq!(empty.hits, 0);
    }

    #[test]
    fn estimates_are_seed_deterministic() {
        let f = families::antidictator(8, 1).unwrap();
        assert_eq!(
            edge_violations(0.1, &f, 5).unwrap(),
            edge_violations(0.1, &f, 5).unwrap()
        );
        let e = edge_violations(0.05, &f, 9).unwrap();
        assert!((e.value() - 1.0 / 8.0).abs() < 0.05);
    }
}
