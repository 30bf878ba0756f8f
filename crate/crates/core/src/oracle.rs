//! Two-phase, query-counting access to a [`Func`].
//!
//! An algorithm first hands the oracle its complete query multiset and only
//! then gets to read answers. A second submission on the same oracle is a
//! protocol error: an algorithm that needed it would be adaptive.
//!
//! Query multisets come in two forms. Small explicit batches are a list of
//! points. Sampling algorithms instead submit a [`QueryPlan`]: an immutable
//! description built from a seed, made of [`ProbeGroup`]s whose trials are
//! regenerated on demand from their RNG stream. The plan is fixed before the
//! oracle is touched, so it cannot depend on any answer; answers to a plan
//! are handed out per probe and only for points the probe planned.

use std::fmt;
use std::sync::Arc;

use rand::{Rng as _, RngCore};

use crate::cube::{low_mask, DimSet, Point};
use crate::error::{Error, Result};
use crate::func::{Func, Value};
use crate::rng::{self, Rng};

/// The query pattern shared by all trials of a group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ProbeShape {
    /// Uniform `x` and dimension `i`; queries `x^(i->0)` and `x^(i->1)`.
    Edge,
    /// Uniform `x`; queries `x`, every `y_i = x^(i)` for `i` in the set and
    /// every `y_i^(j)` for `j` in the set other than `i`.
    Capture(DimSet),
}

/// `trials` independent probes of one shape drawn from one RNG stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ProbeGroup {
    pub shape: ProbeShape,
    pub stream: u64,
    pub trials: u64,
}

impl ProbeGroup {
    pub fn queries_per_trial(&self) -> u64 {
        match self.shape {
            ProbeShape::Edge => 2,
            ProbeShape::Capture(set) => 1 + u64::from(set.len()).pow(2),
        }
    }

    pub fn query_count(&self) -> Result<u64> {
        self.trials
            .checked_mul(self.queries_per_trial())
            .ok_or_else(|| Error::resource("query count", "u64"))
    }

    fn probes(&self, n: u32) -> ProbeIter {
        ProbeIter {
            rng: rng::rng(self.stream),
            shape: self.shape,
            n,
            mask: low_mask(n),
            remaining: self.trials,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum ProbeKind {
    Edge { bit: u32 },
    Capture { set: DimSet },
}

/// One planned trial. Only obtainable by iterating a submitted plan.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Probe {
    x: Point,
    kind: ProbeKind,
}

impl Probe {
    pub fn x(&self) -> Point {
        self.x
    }

    /// For edge probes, the sampled 0-based dimension.
    pub fn edge_bit(&self) -> Option<u32> {
        match self.kind {
            ProbeKind::Edge { bit } => Some(bit),
            ProbeKind::Capture { .. } => None,
        }
    }

    pub fn len(&self) -> u64 {
        match self.kind {
            ProbeKind::Edge { .. } => 2,
            ProbeKind::Capture { set } => 1 + u64::from(set.len()).pow(2),
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The planned query sequence of this probe.
    pub fn points(&self) -> Vec<Point> {
        match self.kind {
            ProbeKind::Edge { bit } => vec![self.x.with_bit(bit, false), self.x.with_bit(bit, true)],
            ProbeKind::Capture { set } => {
                let mut out = Vec::with_capacity(self.len() as usize);
                out.push(self.x);
                for i in set.bits() {
                    let y = self.x.toggle_bit(i);
                    out.push(y);
                    out.extend(set.bits().filter(|&j| j != i).map(|j| y.toggle_bit(j)));
                }
                out
            }
        }
    }

    #[inline]
    fn plans(&self, p: Point) -> bool {
        match self.kind {
            ProbeKind::Edge { bit } => p.0 | (1 << bit) == self.x.0 | (1 << bit),
            ProbeKind::Capture { set } => {
                let diff = p.0 ^ self.x.0;
                diff & !set.0 == 0 && diff.count_ones() <= 2
            }
        }
    }
}

struct ProbeIter {
    rng: Rng,
    shape: ProbeShape,
    n: u32,
    mask: u64,
    remaining: u64,
}

impl Iterator for ProbeIter {
    type Item = Probe;

    #[inline]
    fn next(&mut self) -> Option<Probe> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        let x = Point(self.rng.next_u64() & self.mask);
        let kind = match self.shape {
            ProbeShape::Edge => ProbeKind::Edge {
                bit: self.rng.gen_range(0..self.n),
            },
            ProbeShape::Capture(set) => ProbeKind::Capture { set },
        };
        Some(Probe { x, kind })
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let r = usize::try_from(self.remaining).unwrap_or(usize::MAX);
        (r, Some(r))
    }
}

/// A seed-determined query multiset, laid out as indexed probe groups.
pub trait QueryPlan: Send + Sync {
    fn n(&self) -> u32;
    fn group_count(&self) -> usize;
    fn group(&self, index: usize) -> ProbeGroup;

    fn query_count(&self) -> Result<u64> {
        (0..self.group_count()).try_fold(0u64, |acc, g| {
            acc.checked_add(self.group(g).query_count()?)
                .ok_or_else(|| Error::resource("query count", "u64"))
        })
    }
}

/// A plan that is just a list of groups.
#[derive(Clone, Debug)]
pub struct GroupPlan {
    n: u32,
    groups: Vec<ProbeGroup>,
}

impl GroupPlan {
    pub fn new(n: u32, groups: Vec<ProbeGroup>) -> Self {
        GroupPlan { n, groups }
    }
}

impl QueryPlan for GroupPlan {
    fn n(&self) -> u32 {
        self.n
    }
    fn group_count(&self) -> usize {
        self.groups.len()
    }
    fn group(&self, index: usize) -> ProbeGroup {
        self.groups[index]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Collecting,
    Answered,
}

enum Batch {
    Points { queries: Vec<Point>, answers: Vec<Value> },
    Plan(Arc<dyn QueryPlan>),
}

pub struct QueryOracle<'f> {
    target: &'f Func,
    phase: Phase,
    batch: Option<Batch>,
}

impl fmt::Debug for QueryOracle<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("QueryOracle")
            .field("target", &self.target.label())
            .field("phase", &self.phase)
            .finish()
    }
}

impl<'f> QueryOracle<'f> {
    pub fn new(target: &'f Func) -> Self {
        QueryOracle {
            target,
            phase: Phase::Collecting,
            batch: None,
        }
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn n(&self) -> u32 {
        self.target.n()
    }

    fn freeze(&mut self) -> Result<()> {
        if self.phase == Phase::Answered {
            return Err(Error::Protocol(
                "a second query batch was submitted; the caller is adaptive".into(),
            ));
        }
        self.phase = Phase::Answered;
        Ok(())
    }

    /// Answers an explicit batch, in order.
    pub fn batch_query(&mut self, queries: &[Point]) -> Result<Vec<Value>> {
        let cube = self.target.cube();
        if let Some(bad) = queries.iter().find(|q| !cube.contains(**q)) {
            return Err(Error::arg(format!("query {} outside the cube", bad.0)));
        }
        self.freeze()?;
        let answers: Vec<Value> = queries.iter().map(|&q| self.target.eval(q)).collect();
        self.batch = Some(Batch::Points {
            queries: queries.to_vec(),
            answers: answers.clone(),
        });
        Ok(answers)
    }

    /// Freezes `plan` as this oracle's query multiset and opens the answers.
    pub fn submit(&mut self, plan: Arc<dyn QueryPlan>) -> Result<AnswerSheet<'f>> {
        if plan.n() != self.target.n() {
            return Err(Error::arg(format!(
                "plan for n={} submitted to a function with n={}",
                plan.n(),
                self.target.n()
            )));
        }
        self.freeze()?;
        self.batch = Some(Batch::Plan(Arc::clone(&plan)));
        Ok(AnswerSheet {
            target: self.target,
            plan,
        })
    }

    /// Size of the submitted multiset; 0 before submission.
    pub fn query_count(&self) -> Result<u64> {
        match &self.batch {
            None => Ok(0),
            Some(Batch::Points { queries, .. }) => Ok(queries.len() as u64),
            Some(Batch::Plan(plan)) => plan.query_count(),
        }
    }

    /// Answers recorded for an explicit batch.
    pub fn answer_log(&self) -> Option<&[Value]> {
        match &self.batch {
            Some(Batch::Points { answers, .. }) => Some(answers),
            _ => None,
        }
    }

    /// Visits the submitted query sequence in order.
    pub fn for_each_query(&self, mut visit: impl FnMut(Point)) {
        match &self.batch {
            None => {}
            Some(Batch::Points { queries, .. }) => queries.iter().copied().for_each(visit),
            Some(Batch::Plan(plan)) => {
                let n = plan.n();
                for g in 0..plan.group_count() {
                    for probe in plan.group(g).probes(n) {
                        for p in probe.points() {
                            visit(p);
                        }
                    }
                }
            }
        }
    }
}

/// Read access to the answers of a submitted plan.
pub struct AnswerSheet<'f> {
    target: &'f Func,
    plan: Arc<dyn QueryPlan>,
}

impl<'f> AnswerSheet<'f> {
    pub fn plan(&self) -> &dyn QueryPlan {
        self.plan.as_ref()
    }

    /// The answered probes of group `index`, in plan order. Answers are
    /// evaluated when read.
    pub fn group(&self, index: usize) -> impl Iterator<Item = AnsweredProbe<'f>> {
        let target = self.target;
        self.plan
            .group(index)
            .probes(self.plan.n())
            .map(move |probe| AnsweredProbe { probe, target })
    }
}

pub struct AnsweredProbe<'f> {
    probe: Probe,
    target: &'f Func,
}

impl AnsweredProbe<'_> {
    pub fn probe(&self) -> &Probe {
        &self.probe
    }

    /// The answer to planned query `p`. Points outside the probe's pattern
    /// were never submitted and are refused.
    #[inline]
    pub fn answer(&self, p: Point) -> Result<Value> {
        if !self.probe.plans(p) {
            return Err(Error::Protocol(format!(
                "point {} was not part of the submitted probe",
                p.0
            )));
        }
        Ok(self.target.eval(p))
    }
}
