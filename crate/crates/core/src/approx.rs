//! `ApproxMono` and the halving-schedule distance approximator.
//!
//! A run is described by an [`ApproxMonoPlan`]: group 0 holds the
//! edge-violation trials, followed by one matching-estimation group per
//! `(h, k)` with `d = 2^h` and `k < t`, in loop order. The direction set of
//! each group is drawn from its own stream, so the whole plan (and hence the
//! query multiset) is a function of `(seed, eps, n)` alone. The distance
//! approximator concatenates one plan per (level, repetition) into a
//! [`SchedulePlan`] and submits it as a single batch.
//!
//! Under [`Profile::Experiment`] answers are read lazily and evaluation stops
//! as soon as the outcome is decided; the submitted batch is unchanged.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng as _;

use crate::cube::DimSet;
use crate::error::{Error, Result};
use crate::estimators::{self, capture_answered, edge_answered};
use crate::func::Func;
use crate::oracle::{AnswerSheet, ProbeGroup, ProbeShape, QueryOracle, QueryPlan};
use crate::rng;

/// Inner additive-error floor of the experiment profile.
pub const EXPERIMENT_DELTA_FLOOR: f64 = 0.15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Profile {
    Proof,
    Experiment,
}

impl FromStr for Profile {
    type Err = Error;
    fn from_str(s: &str) -> Result<Profile> {
        match s {
            "proof" => Ok(Profile::Proof),
            "experiment" => Ok(Profile::Experiment),
            _ => Err(Error::arg(format!("unknown profile {s:?} (proof|experiment)"))),
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Profile::Proof => "proof",
            Profile::Experiment => "experiment",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ApproxParams {
    pub eps: f64,
    pub polylog_exponent: u32,
    pub c_t: f64,
    pub profile: Profile,
    /// Lower bound on the matching-estimation error; 0 disables it.
    pub delta_floor: f64,
    pub seed: u64,
}

impl ApproxParams {
    /// Profile defaults: proof uses exponent 4 and no floor; experiment uses
    /// exponent 1 and [`EXPERIMENT_DELTA_FLOOR`].
    pub fn new(eps: f64, profile: Profile, seed: u64) -> ApproxParams {
        let (polylog_exponent, delta_floor) = match profile {
            Profile::Proof => (4, 0.0),
            Profile::Experiment => (1, EXPERIMENT_DELTA_FLOOR),
        };
        ApproxParams {
            eps,
            polylog_exponent,
            c_t: 1.0,
            profile,
            delta_floor,
            seed,
        }
    }

    pub fn experiment(eps: f64, seed: u64) -> ApproxParams {
        ApproxParams::new(eps, Profile::Experiment, seed)
    }

    pub fn proof(eps: f64, seed: u64) -> ApproxParams {
        ApproxParams::new(eps, Profile::Proof, seed)
    }

    fn check(&self) -> Result<()> {
        // 1/2 itself is admitted: it is the first level of the schedule
        if !(self.eps > 0.0 && self.eps <= 0.5) {
            return Err(Error::arg(format!("eps={} outside (0,1/2)", self.eps)));
        }
        if self.polylog_exponent < 1 {
            return Err(Error::arg("polylog_exponent must be >= 1"));
        }
        if !(self.c_t >= 1.0) {
            return Err(Error::arg("C_t must be >= 1"));
        }
        if !(0.0..1.0).contains(&self.delta_floor) {
            return Err(Error::arg("delta floor must lie in [0,1)"));
        }
        Ok(())
    }

    /// `t = ceil(C_t sqrt(n) (floor(log2 n) + 1)^e / eps)`.
    pub fn repetitions(&self, n: u32) -> Result<u64> {
        self.check()?;
        let levels = f64::from(h_max(n) + 1);
        let t = (self.c_t * f64::from(n).sqrt() * levels.powi(self.polylog_exponent as i32)
            / self.eps)
            .ceil();
        if !t.is_finite() || t >= 2f64.powi(53) {
            return Err(Error::resource("ApproxMono repetitions", "2^53"));
        }
        Ok((t as u64).max(1))
    }

    pub fn edge_delta(&self, n: u32) -> f64 {
        self.eps / (2.0 * f64::from(n).sqrt())
    }

    pub fn edge_threshold(&self, n: u32) -> f64 {
        3.0 * self.eps / (2.0 * f64::from(n).sqrt())
    }

    pub fn capture_threshold(&self, n: u32) -> Result<f64> {
        Ok(3.0 / (4.0 * self.repetitions(n)? as f64))
    }

    /// `1/(4t)`, raised to the profile's floor.
    pub fn inner_delta(&self, n: u32) -> Result<f64> {
        let delta = 1.0 / (4.0 * self.repetitions(n)? as f64);
        Ok(delta.max(self.delta_floor))
    }

    fn with_eps(&self, eps: f64, seed: u64) -> ApproxParams {
        ApproxParams {
            eps,
            seed,
            ..self.clone()
        }
    }
}

/// `floor(log2 n)`: the last `h` in the `d = 2^h` loop.
pub fn h_max(n: u32) -> u32 {
    31 - n.max(1).leading_zeros()
}

/// Smallest count `c` with `c / trials >= threshold`.
fn hits_needed(threshold: f64, trials: u64) -> u64 {
    let mut c = (threshold * trials as f64).ceil().max(0.0) as u64;
    while c > 0 && (c - 1) as f64 / trials as f64 >= threshold {
        c -= 1;
    }
    while (c as f64) / (trials as f64) < threshold {
        c += 1;
    }
    c
}

/// The direction set of matching-estimation call `(h, k)`.
pub fn sample_set(seed: u64, n: u32, h: u32, k: u64) -> DimSet {
    let mut r = rng::rng_at(seed, &[rng::SETS, u64::from(h), k]);
    let p = 1.0 / f64::from(1u32 << h);
    let mut mask = 0u64;
    for b in 0..n {
        if r.gen_bool(p) {
            mask |= 1 << b;
        }
    }
    DimSet(mask)
}

/// The query plan of one `ApproxMono` run.
#[derive(Clone, Debug, PartialEq)]
pub struct ApproxMonoPlan {
    n: u32,
    seed: u64,
    eps: f64,
    t: u64,
    edge_trials: u64,
    match_trials: u64,
    edge_threshold: f64,
    capture_threshold: f64,
}

impl ApproxMonoPlan {
    pub fn new(params: &ApproxParams, n: u32) -> Result<ApproxMonoPlan> {
        let t = params.repetitions(n)?;
        let edge_trials = estimators::edge_violation_trials(n, params.edge_delta(n))?;
        let match_trials =
            estimators::matching_trials(n, params.eps, params.inner_delta(n)?)?;
        let groups = (u64::from(h_max(n)) + 1).checked_mul(t).and_then(|g| g.checked_add(1));
        if groups.is_none_or(|g| g > usize::MAX as u64 / 2) {
            return Err(Error::resource("ApproxMono group count", "usize"));
        }
        Ok(ApproxMonoPlan {
            n,
            seed: params.seed,
            eps: params.eps,
            t,
            edge_trials,
            match_trials,
            edge_threshold: params.edge_threshold(n),
            capture_threshold: params.capture_threshold(n)?,
        })
    }

    pub fn repetitions(&self) -> u64 {
        self.t
    }

    pub fn edge_trials(&self) -> u64 {
        self.edge_trials
    }

    pub fn match_trials(&self) -> u64 {
        self.match_trials
    }

    /// `(h, k)` of capture group `index >= 1`.
    pub fn cell(&self, index: usize) -> (u32, u64) {
        let i = index as u64 - 1;
        ((i / self.t) as u32, i % self.t)
    }

    pub fn set(&self, index: usize) -> DimSet {
        let (h, k) = self.cell(index);
        sample_set(self.seed, self.n, h, k)
    }
}

impl QueryPlan for ApproxMonoPlan {
    fn n(&self) -> u32 {
        self.n
    }

    fn group_count(&self) -> usize {
        1 + (h_max(self.n) as usize + 1) * self.t as usize
    }

    fn group(&self, index: usize) -> ProbeGroup {
        if index == 0 {
            return estimators::edge_group(self.seed, self.edge_trials);
        }
        let (h, k) = self.cell(index);
        ProbeGroup {
            shape: ProbeShape::Capture(self.set(index)),
            stream: rng::derive(self.seed, &[rng::MATCH, u64::from(h), k]),
            trials: self.match_trials,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Label {
    Close,
    Far,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Close => "close",
            Label::Far => "far",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Trigger {
    EdgeTest {
        gamma: f64,
    },
    CaptureTest {
        d: u64,
        iteration: u64,
        set: DimSet,
        xi: f64,
    },
    FallThrough,
}

impl fmt::Display for Trigger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Trigger::EdgeTest { .. } => f.write_str("edge-test"),
            Trigger::CaptureTest { d, iteration, .. } => {
                write!(f, "capture-test(d={d},iteration={iteration})")
            }
            Trigger::FallThrough => f.write_str("fall-through"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub label: Label,
    pub trigger: Trigger,
    pub query_count: u64,
}

impl Verdict {
    pub fn is_far(&self) -> bool {
        self.label == Label::Far
    }
}

/// Hits in group `index`; with `stop_at`, counting ends once reached.
fn count_hits(
    sheet: &AnswerSheet<'_>,
    index: usize,
    shape: ProbeShape,
    stop_at: Option<u64>,
) -> Result<u64> {
    let limit = stop_at.unwrap_or(u64::MAX);
    let mut hits = 0u64;
    for probe in sheet.group(index) {
        let hit = match shape {
            ProbeShape::Edge => edge_answered(&probe)?,
            ProbeShape::Capture(set) => capture_answered(&probe, set)?,
        };
        hits += u64::from(hit);
        if hits >= limit {
            break;
        }
    }
    Ok(hits)
}

/// Runs the decision logic of one plan whose groups start at `base` in
/// `sheet`. The trigger is the first line that fires in loop order.
fn decide(
    sheet: &AnswerSheet<'_>,
    base: usize,
    plan: &ApproxMonoPlan,
    profile: Profile,
) -> Result<(Label, Trigger)> {
    let short = profile == Profile::Experiment;
    let edge_need = hits_needed(plan.edge_threshold, plan.edge_trials);
    let capture_need = hits_needed(plan.capture_threshold, plan.match_trials);

    let edge_hits = count_hits(sheet, base, ProbeShape::Edge, short.then_some(edge_need))?;
    let mut first: Option<Trigger> = None;
    if edge_hits >= edge_need {
        first = Some(Trigger::EdgeTest {
            gamma: edge_hits as f64 / plan.edge_trials as f64,
        });
        if short {
            return Ok((Label::Far, first.unwrap()));
        }
    }
    for index in 1..plan.group_count() {
        let group = sheet.plan().group(base + index);
        let hits = count_hits(sheet, base + index, group.shape, short.then_some(capture_need))?;
        if hits >= capture_need && first.is_none() {
            let (h, k) = plan.cell(index);
            let ProbeShape::Capture(set) = group.shape else {
                unreachable!("capture group")
            };
            first = Some(Trigger::CaptureTest {
                d: 1 << h,
                iteration: k,
                set,
                xi: hits as f64 / plan.match_trials as f64,
            });
            if short {
                break;
            }
        }
    }
    Ok(match first {
        Some(trigger) => (Label::Far, trigger),
        None => (Label::Close, Trigger::FallThrough),
    })
}

fn prepare(f: &Func) -> Result<Func> {
    f.require_total()?;
    if f.n() <= 20 {
        f.materialize()
    } else {
        Ok(f.clone())
    }
}

/// One `ApproxMono` run against `f`.
pub fn approx_mono(params: &ApproxParams, f: &Func) -> Result<Verdict> {
    if !(params.eps > 0.0 && params.eps < 0.5) {
        return Err(Error::arg(format!("eps={} outside (0,1/2)", params.eps)));
    }
    let g = prepare(f)?;
    let mut oracle = QueryOracle::new(&g);
    approx_mono_on(params, &mut oracle)
}

/// One `ApproxMono` run through a caller-owned oracle.
pub fn approx_mono_on(params: &ApproxParams, oracle: &mut QueryOracle<'_>) -> Result<Verdict> {
    let plan = Arc::new(ApproxMonoPlan::new(params, oracle.n())?);
    let sheet = oracle.submit(plan.clone())?;
    let (label, trigger) = decide(&sheet, 0, &plan, params.profile)?;
    Ok(Verdict {
        label,
        trigger,
        query_count: oracle.query_count()?,
    })
}

/// `1/2, 1/4, ...` down to the first value `<= alpha`.
pub fn schedule(alpha: f64) -> Result<Vec<f64>> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(Error::arg(format!("alpha={alpha} outside (0,1/2)")));
    }
    let mut out = vec![0.5];
    while *out.last().unwrap() > alpha {
        out.push(out.last().unwrap() / 2.0);
    }
    Ok(out)
}

/// `ceil(24 ln(2 (ceil(log2(1/alpha)) + 1)))` repetitions per level.
pub fn level_repetitions(alpha: f64) -> Result<u64> {
    schedule(alpha)?;
    let levels = (1.0 / alpha).log2().ceil() + 1.0;
    Ok((24.0 * (2.0 * levels).ln()).ceil() as u64)
}

/// All `ApproxMono` runs of the distance approximator, level-major.
#[derive(Clone, Debug)]
pub struct SchedulePlan {
    n: u32,
    levels: Vec<f64>,
    reps: u64,
    runs: Vec<ApproxMonoPlan>,
    offsets: Vec<usize>,
}

impl SchedulePlan {
    pub fn new(alpha: f64, params: &ApproxParams, n: u32) -> Result<SchedulePlan> {
        let levels = schedule(alpha)?;
        let reps = level_repetitions(alpha)?;
        let mut runs = Vec::new();
        let mut offsets = vec![0usize];
        for (level, &eps) in levels.iter().enumerate() {
            for rep in 0..reps {
                let seed = rng::derive(params.seed, &[rng::REP, level as u64, rep]);
                let plan = ApproxMonoPlan::new(&params.with_eps(eps, seed), n)?;
                let end = offsets
                    .last()
                    .unwrap()
                    .checked_add(plan.group_count())
                    .ok_or_else(|| Error::resource("schedule group count", "usize"))?;
                offsets.push(end);
                runs.push(plan);
            }
        }
        Ok(SchedulePlan {
            n,
            levels,
            reps,
            runs,
            offsets,
        })
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn repetitions(&self) -> u64 {
        self.reps
    }

    fn run_index(&self, level: usize, rep: u64) -> usize {
        level * self.reps as usize + rep as usize
    }
}

impl QueryPlan for SchedulePlan {
    fn n(&self) -> u32 {
        self.n
    }

    fn group_count(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    fn group(&self, index: usize) -> ProbeGroup {
        let run = self.offsets.partition_point(|&o| o <= index) - 1;
        self.runs[run].group(index - self.offsets[run])
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LevelOutcome {
    pub eps: f64,
    pub far_votes: u64,
    pub close_votes: u64,
    pub far: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DistanceEstimate {
    pub eps_hat: f64,
    pub eps_star: f64,
    pub repetitions: u64,
    /// Levels in schedule order, as far as they were evaluated.
    pub levels: Vec<LevelOutcome>,
}

pub fn approx_distance(alpha: f64, params: &ApproxParams, f: &Func) -> Result<DistanceEstimate> {
    let g = prepare(f)?;
    let mut oracle = QueryOracle::new(&g);
    approx_distance_on(alpha, params, &mut oracle)
}

/// The distance approximator through a caller-owned oracle: every level and
/// repetition is planned up front and submitted as one batch.
pub fn approx_distance_on(
    alpha: f64,
    params: &ApproxParams,
    oracle: &mut QueryOracle<'_>,
) -> Result<DistanceEstimate> {
    let plan = Arc::new(SchedulePlan::new(alpha, params, oracle.n())?);
    let sheet = oracle.submit(plan.clone())?;
    let short = params.profile == Profile::Experiment;
    let reps = plan.reps;
    let majority = reps / 2 + 1;
    let mut outcomes = Vec::new();
    let mut eps_star = None;
    for (level, &eps) in plan.levels.iter().enumerate() {
        let (mut far_votes, mut close_votes) = (0u64, 0u64);
        for rep in 0..reps {
            if short && (far_votes >= majority || close_votes > reps - majority) {
                break;
            }
            let run = plan.run_index(level, rep);
            let (label, _) = decide(&sheet, plan.offsets[run], &plan.runs[run], params.profile)?;
            match label {
                Label::Far => far_votes += 1,
                Label::Close => close_votes += 1,
            }
        }
        let far = far_votes >= majority;
        outcomes.push(LevelOutcome {
            eps,
            far_votes,
            close_votes,
            far,
        });
        if far && eps_star.is_none() {
            eps_star = Some(eps);
            if short {
                break;
            }
        }
    }
    let eps_star = eps_star.unwrap_or(*plan.levels.last().unwrap());
    Ok(DistanceEstimate {
        eps_hat: (2.0 * eps_star).min(1.0),
        eps_star,
        repetitions: reps,
        levels: outcomes,
    })
}
