//! The acceptance suite: eleven end-to-end checks, each with a time limit.
//!
//! Every check derives its randomness from one master seed, so a suite run
//! is reproducible. Sweeps run on the current rayon pool; results are
//! collected in input order, so worker count never changes the output.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::io::Write;
use std::path::Path;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::approx::{self, ApproxParams, Label};
use crate::cube::{DimSet, Point};
use crate::error::{Error, Result};
use crate::estimators;
use crate::exact;
use crate::families;
use crate::func::Func;
use crate::isoperimetry::{self as iso, Mode, RESTRICTED_SLACK};
use crate::lowerbound::{self, Sign};
use crate::oracle::QueryOracle;
use crate::rng;
use crate::stats;

pub const DEFAULT_SEED: u64 = 20_190_715;

const SUITE: u64 = 0x5355;

/// One measured constant, written to `constants.csv`.
#[derive(Clone, Debug, PartialEq)]
pub struct Constant {
    pub criterion: u32,
    pub name: String,
    pub n: u32,
    pub value: String,
}

#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub passed: bool,
    pub detail: String,
    pub constants: Vec<Constant>,
    /// Names of the failed clauses, when a check has several.
    pub failed: Vec<String>,
}

pub struct Ctx {
    pub seed: u64,
    /// Restricts size-parameterized checks to one dimension.
    pub n: Option<u32>,
}

impl Ctx {
    fn seed_for(&self, criterion: u32, index: u64) -> u64 {
        rng::derive(self.seed, &[SUITE, u64::from(criterion), index])
    }
}

pub struct Criterion {
    pub id: u32,
    pub key: &'static str,
    pub title: &'static str,
    pub limit: Duration,
    run: fn(&Ctx) -> Result<Outcome>,
}

#[derive(Clone, Debug)]
pub struct CriterionReport {
    pub id: u32,
    pub key: &'static str,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub limit: Duration,
    pub constants: Vec<Constant>,
    /// Failed clauses; the criterion key when it has no finer breakdown.
    pub failed: Vec<String>,
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} C{:<2} {:<13} {:>8.2}s / {:>4}s  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.key,
            self.elapsed.as_secs_f64(),
            self.limit.as_secs(),
            self.detail
        )
    }
}

const fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

pub fn criteria() -> &'static [Criterion] {
    static ALL: [Criterion; 11] = [
        Criterion { id: 1, key: "oracles", title: "min-cut oracle against brute force", limit: secs(60), run: oracles },
        Criterion { id: 2, key: "lemma25", title: "capture probability at most twice the distance", limit: secs(60), run: capture_vs_distance },
        Criterion { id: 3, key: "sandwich", title: "decreasing-edge sandwich", limit: secs(120), run: sandwich },
        Criterion { id: 4, key: "estimators", title: "estimator concentration", limit: secs(120), run: concentration },
        Criterion { id: 5, key: "approx", title: "ApproxMono verdicts", limit: secs(300), run: approx_verdicts },
        Criterion { id: 6, key: "ratio", title: "distance approximation ratio", limit: secs(600), run: ratio_band },
        Criterion { id: 7, key: "isoperimetry", title: "Talagrand objective against distance", limit: secs(300), run: isoperimetry },
        Criterion { id: 8, key: "restricted", title: "restricted objectives", limit: secs(300), run: restricted },
        Criterion { id: 9, key: "switch", title: "switching process", limit: secs(120), run: switching },
        Criterion { id: 10, key: "lowerbound", title: "lower-bound construction", limit: secs(600), run: lower_bound },
        Criterion { id: 11, key: "audit", title: "nonadaptivity audit", limit: secs(60), run: audit },
    ];
    &ALL
}

/// Criteria matching a comma-separated filter of keys or ids (`5`, `c5`,
/// `approx`); all of them when `only` is `None`.
pub fn select(only: Option<&str>) -> Result<Vec<&'static Criterion>> {
    let Some(only) = only else {
        return Ok(criteria().iter().collect());
    };
    let mut out = Vec::new();
    for token in only.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let lower = token.to_ascii_lowercase();
        let id = lower.trim_start_matches('c').parse::<u32>().ok();
        let c = criteria()
            .iter()
            .find(|c| c.key == lower || Some(c.id) == id)
            .ok_or_else(|| Error::arg(format!("unknown criterion {token:?}")))?;
        if !out.iter().any(|o: &&Criterion| o.id == c.id) {
            out.push(c);
        }
    }
    out.sort_by_key(|c| c.id);
    Ok(out)
}

pub fn run_criterion(c: &Criterion, ctx: &Ctx) -> CriterionReport {
    let start = Instant::now();
    let result = (c.run)(ctx);
    let elapsed = start.elapsed();
    let (mut passed, mut detail, constants, mut failed) = match result {
        Ok(o) => (o.passed, o.detail, o.constants, o.failed),
        Err(e) => (false, format!("error: {e}"), Vec::new(), vec!["error".to_string()]),
    };
    if !passed && failed.is_empty() {
        failed.push(c.key.to_string());
    }
    if elapsed > c.limit {
        passed = false;
        detail = format!("{detail}; over the time limit");
        failed.push("time_limit".to_string());
    }
    CriterionReport {
        id: c.id,
        key: c.key,
        title: c.title,
        passed,
        detail,
        elapsed,
        limit: c.limit,
        constants,
        failed,
    }
}

pub fn write_constants<W: Write>(reports: &[CriterionReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["criterion", "name", "n", "value"]).map_err(csv_err)?;
    for c in reports.iter().flat_map(|r| &r.constants) {
        w.write_record([
            format!("C{}", c.criterion),
            c.name.clone(),
            c.n.to_string(),
            c.value.clone(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

pub fn write_constants_file(reports: &[CriterionReport], path: &Path) -> Result<()> {
    write_constants(reports, std::io::BufWriter::new(std::fs::File::create(path)?))
}

/// A random function for sweeps: density drawn from `[0.1, 0.9]`, then
/// independent values.
pub fn sweep_function(n: u32, seed: u64) -> Result<Func> {
    let p = 0.1 + 0.8 * rng::unit_hash(seed, u64::MAX);
    families::random(n, p, seed)
}

fn all_functions(n: u32) -> impl Iterator<Item = Func> {
    let size = 1u64 << n;
    (0..1u64 << size).map(move |m| Func::from_bits(n, (0..size).map(|x| m >> x & 1 == 1)).unwrap())
}

fn constant(criterion: u32, name: impl Into<String>, n: u32, value: impl ToString) -> Constant {
    Constant {
        criterion,
        name: name.into(),
        n,
        value: value.to_string(),
    }
}

fn oracles(ctx: &Ctx) -> Result<Outcome> {
    let mut mismatches = 0;
    for f in all_functions(3) {
        let a = exact::exact_distance_to_monotone(&f)?;
        let b = exact::brute_force_distance(&f)?;
        mismatches += u32::from(a != b);
    }
    let random: Vec<u32> = (0..1000u64)
        .into_par_iter()
        .map(|i| -> Result<u32> {
            let f = sweep_function(4, ctx.seed_for(1, i))?;
            Ok(u32::from(
                exact::exact_distance_to_monotone(&f)? != exact::brute_force_distance(&f)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    mismatches += random.iter().sum::<u32>();
    let counts = (2..=4)
        .map(|n| exact::monotone_functions(n).map(|v| v.len()))
        .collect::<Result<Vec<_>>>()?;
    Ok(Outcome {
        passed: mismatches == 0 && counts == [6, 20, 168],
        detail: format!(
            "{mismatches} mismatches over 256 + 1000 functions; monotone counts {counts:?}"
        ),
        constants: Vec::new(),
        failed: Vec::new(),
    })
}

fn capture_vs_distance(_: &Ctx) -> Result<Outcome> {
    let mut violations = 0;
    let mut worst = 0.0f64;
    for f in all_functions(3) {
        let dist = exact::exact_distance_to_monotone(&f)?.value();
        for s in 0..8 {
            let p = exact::exact_capture_probability(&f, DimSet(s))?;
            if p > dist.times(2) {
                violations += 1;
            }
            if !dist.is_zero() {
                worst = worst.max(p.to_f64() / dist.to_f64());
            }
        }
    }
    Ok(Outcome {
        passed: violations == 0,
        detail: format!("{violations} violations over 2048 pairs; max capture/dist = {worst}"),
        constants: vec![constant(2, "max_capture_over_dist", 3, worst)],
        failed: Vec::new(),
    })
}

fn sandwich(ctx: &Ctx) -> Result<Outcome> {
    let check = |f: &Func| -> Result<bool> {
        let d = exact::exact_distance_to_monotone(f)?.changed_points;
        let e = exact::decreasing_edge_count(f)?;
        Ok(d <= e && e <= u64::from(f.n()) * d)
    };
    let mut failures = 0u32;
    for f in all_functions(3) {
        failures += u32::from(!check(&f)?);
    }
    for n in [8, 10] {
        let bad = (0..1000u64)
            .into_par_iter()
            .map(|i| -> Result<u32> {
                let f = sweep_function(n, ctx.seed_for(3, u64::from(n) << 32 | i))?;
                Ok(u32::from(!check(&f)?))
            })
            .collect::<Result<Vec<_>>>()?;
        failures += bad.iter().sum::<u32>();
    }
    Ok(Outcome {
        passed: failures == 0,
        detail: format!("{failures} failures over 256 + 2000 functions"),
        constants: Vec::new(),
        failed: Vec::new(),
    })
}

fn concentration(ctx: &Ctx) -> Result<Outcome> {
    const N: u32 = 10;
    const DELTA: f64 = 0.05;
    const RUNS: u64 = 1000;
    let f = families::antidictator(N, 1)?.materialize()?;
    // the analytic rate: exactly 2^(n-1) of the n 2^(n-1) edges decrease
    let rate = exact::decreasing_edge_count(&f)? as f64 / (f64::from(N) * 2f64.powi(N as i32 - 1));
    let set = DimSet::from_dims(N, &[1])?;
    let capture = exact::exact_capture_probability(&f, set)?.to_f64();
    let errors = (0..RUNS)
        .into_par_iter()
        .map(|i| -> Result<(bool, bool)> {
            let seed = ctx.seed_for(4, i);
            let e = estimators::edge_violations(DELTA, &f, seed)?;
            let m = estimators::matching_estimation(set, DELTA, &f, 0.1, seed)?;
            Ok(((e.value() - rate).abs() > DELTA, (m.value() - capture).abs() > DELTA))
        })
        .collect::<Result<Vec<_>>>()?;
    let edge_bad = errors.iter().filter(|e| e.0).count() as u64;
    let match_bad = errors.iter().filter(|e| e.1).count() as u64;
    // one-sided test of "failure rate >= 1%": reject when the lower tail at
    // the observed count is below 0.01
    let p_value = |k: u64| 1.0 - stats::binomial_upper_tail(k + 1, RUNS, 0.01);
    let (pe, pm) = (p_value(edge_bad), p_value(match_bad));
    let te = estimators::edge_violation_trials(N, DELTA)?;
    let tm = estimators::matching_trials(N, 0.1, DELTA)?;
    Ok(Outcome {
        passed: pe < 0.01 && pm < 0.01,
        detail: format!(
            "edge: {edge_bad}/{RUNS} off by > {DELTA} (p={pe:.2e}, Hoeffding {:.1e}); \
             matching: {match_bad}/{RUNS} (p={pm:.2e}, Hoeffding {:.1e})",
            stats::hoeffding(DELTA, te),
            stats::hoeffding(DELTA, tm)
        ),
        constants: vec![
            constant(4, "edge_error_rate", N, edge_bad as f64 / RUNS as f64),
            constant(4, "matching_error_rate", N, match_bad as f64 / RUNS as f64),
        ],
        failed: Vec::new(),
    })
}

fn approx_verdicts(ctx: &Ctx) -> Result<Outcome> {
    const N: u32 = 10;
    let cases = [
        ("majority", families::majority(N)?, 0.2, Label::Close, 80),
        ("antimajority", families::antimajority(N)?, 0.1, Label::Far, 80),
        ("constant0", families::constant(N, false)?, 0.1, Label::Close, 100),
    ];
    let mut passed = true;
    let mut parts = Vec::new();
    let mut constants = Vec::new();
    for (index, (name, f, eps, want, needed)) in cases.into_iter().enumerate() {
        let f = f.materialize()?;
        let hits = (0..100u64)
            .into_par_iter()
            .map(|i| {
                let seed = ctx.seed_for(5, (index as u64) << 32 | i);
                approx::approx_mono(&ApproxParams::experiment(eps, seed), &f)
                    .map(|v| u32::from(v.label == want))
            })
            .collect::<Result<Vec<_>>>()?
            .iter()
            .sum::<u32>();
        passed &= hits >= needed;
        parts.push(format!("{name} {want} {hits}/100"));
        constants.push(constant(5, format!("{name}_{want}_rate"), N, f64::from(hits) / 100.0));
    }
    let anti = exact::exact_distance_to_monotone(&families::antimajority(N)?)?;
    passed &= anti.to_f64() >= 0.1;
    parts.push(format!("dist(antimajority) = {}", anti.value()));
    Ok(Outcome {
        passed,
        detail: parts.join("; "),
        constants,
        failed: Vec::new(),
    })
}

fn ratio_band(ctx: &Ctx) -> Result<Outcome> {
    let cases = [
        ("antidictator", families::antidictator(10, 1)?, 0.05),
        ("antimajority", families::antimajority(10)?, 0.05),
        ("remark", families::remark(9)?, 1.0 / 256.0),
    ];
    let mut passed = true;
    let mut parts = Vec::new();
    let mut constants = Vec::new();
    for (index, (name, f, alpha)) in cases.into_iter().enumerate() {
        let f = f.materialize()?;
        let n = f.n();
        let dist = exact::exact_distance_to_monotone(&f)?.to_f64();
        let params = ApproxParams::experiment(0.25, 0);
        let band = 4.0 * f64::from(n).sqrt()
            * f64::from(approx::h_max(n) + 1).powi(params.polylog_exponent as i32);
        let estimates = (0..100u64)
            .into_par_iter()
            .map(|i| {
                let p = ApproxParams {
                    seed: ctx.seed_for(6, (index as u64) << 32 | i),
                    ..params.clone()
                };
                approx::approx_distance(alpha, &p, &f).map(|e| e.eps_hat)
            })
            .collect::<Result<Vec<_>>>()?;
        let ratios: Vec<f64> = estimates.iter().filter(|&&e| e >= dist).map(|e| e / dist).collect();
        let covered = ratios.len();
        let max = ratios.iter().copied().fold(0.0, f64::max);
        let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let ok = covered >= 80 && max <= band;
        passed &= ok;
        parts.push(format!("{name}: {covered}/100 cover, ratio {min:.3}..{max:.3} (band {band:.2})"));
        constants.push(constant(6, format!("{name}_min_ratio"), n, min));
        constants.push(constant(6, format!("{name}_max_ratio"), n, max));
        constants.push(constant(6, format!("{name}_band"), n, band));
    }
    Ok(Outcome {
        passed,
        detail: parts.join("; "),
        constants,
        failed: Vec::new(),
    })
}

/// Min over nonmonotone functions of (objective/dist, colored/dist), and
/// how many functions had a nonpositive ratio.
fn objective_ratios(fs: impl ParallelIterator<Item = Result<Func>>) -> Result<(f64, f64, u64)> {
    let rows = fs
        .map(|f| -> Result<Option<(f64, f64)>> {
            let f = f?;
            let d = exact::exact_distance_to_monotone(&f)?;
            if d.is_zero() {
                return Ok(None);
            }
            let obj = iso::talagrand_objective(&f)?.value;
            let (red, blue) = iso::colored_objectives(&f, &iso::kms_coloring(&f)?)?;
            Ok(Some((obj / d.to_f64(), (red + blue) / d.to_f64())))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = (f64::INFINITY, f64::INFINITY, 0);
    for (a, b) in rows.into_iter().flatten() {
        out.0 = out.0.min(a);
        out.1 = out.1.min(b);
        out.2 += u64::from(!(a > 0.0 && b > 0.0));
    }
    Ok(out)
}

fn isoperimetry(ctx: &Ctx) -> Result<Outcome> {
    let mut bad = 0;
    let mut parts = Vec::new();
    let mut constants = Vec::new();
    for n in 1..=3 {
        let fs: Vec<Func> = all_functions(n).collect();
        let (a, b, z) = objective_ratios(fs.into_par_iter().map(Ok))?;
        bad += z;
        parts.push(format!("n={n}: min {a:.4}/{b:.4}"));
        constants.push(constant(7, "min_objective_over_dist", n, a));
        constants.push(constant(7, "min_colored_over_dist", n, b));
    }
    let mut mins = Vec::new();
    for n in [8, 10] {
        let (a, b, z) = objective_ratios(
            (0..1000u64)
                .into_par_iter()
                .map(|i| sweep_function(n, ctx.seed_for(7, u64::from(n) << 32 | i))),
        )?;
        bad += z;
        mins.push((a, b));
        parts.push(format!("n={n}: min {a:.4}/{b:.4}"));
        constants.push(constant(7, "min_objective_over_dist", n, a));
        constants.push(constant(7, "min_colored_over_dist", n, b));
    }
    let spread = |x: f64, y: f64| x.max(y) / x.min(y);
    let (s1, s2) = (spread(mins[0].0, mins[1].0), spread(mins[0].1, mins[1].1));
    constants.push(constant(7, "min_ratio_spread_8_10", 10, s1));
    constants.push(constant(7, "min_colored_ratio_spread_8_10", 10, s2));
    Ok(Outcome {
        passed: bad == 0 && s1 <= 1.2 && s2 <= 1.2,
        detail: format!(
            "{bad} nonpositive ratios; {}; spread n=8 vs 10: {s1:.3}/{s2:.3}",
            parts.join(", ")
        ),
        constants,
        failed: Vec::new(),
    })
}

fn restricted(ctx: &Ctx) -> Result<Outcome> {
    let check = |f: &Func| -> Result<(u32, f64)> {
        let full = iso::talagrand_objective(f)?.value;
        let coloring = iso::kms_coloring(f)?;
        let (red, blue) = iso::colored_objectives(f, &coloring)?;
        let mut failures = 0;
        let mut worst_gap = 0.0f64;
        for p in [1.0, 0.5, 0.25] {
            let r = iso::restricted_objective(f, p, Mode::Exact, 0)?.mean;
            let c = iso::restricted_colored_objective(f, &coloring, p, Mode::Exact, 0)?.mean;
            let (bound, cbound) = (p.sqrt() * full, p.sqrt() * (red + blue));
            failures += u32::from(r > bound + RESTRICTED_SLACK);
            failures += u32::from(c > cbound + RESTRICTED_SLACK);
            if p == 1.0 {
                let tol = f64::EPSILON * full.max(1.0);
                failures += u32::from((r - full).abs() > tol);
                failures += u32::from((c - (red + blue)).abs() > tol);
            } else {
                worst_gap = worst_gap.max(r / bound.max(f64::MIN_POSITIVE));
            }
        }
        Ok((failures, worst_gap))
    };
    let mut failures = 0;
    let mut worst = 0.0f64;
    let fs: Vec<Func> = all_functions(3).collect();
    let rows = fs
        .par_iter()
        .map(&check)
        .chain((0..100u64).into_par_iter().map(|i| check(&sweep_function(8, ctx.seed_for(8, i))?)))
        .collect::<Result<Vec<_>>>()?;
    for (f, w) in rows {
        failures += f;
        worst = worst.max(w);
    }
    Ok(Outcome {
        passed: failures == 0,
        detail: format!(
            "{failures} failed comparisons over 356 functions x 3 values of p; \
             max restricted/(sqrt(p) objective) = {worst:.4}"
        ),
        constants: vec![constant(8, "max_restricted_over_sqrt_p_bound", 8, worst)],
        failed: Vec::new(),
    })
}

fn switching(ctx: &Ctx) -> Result<Outcome> {
    const N: u32 = 8;
    let rows = (0..100u64)
        .into_par_iter()
        .map(|i| -> Result<(bool, bool, f64)> {
            let seed = ctx.seed_for(9, i);
            let f = sweep_function(N, seed)?;
            let mut perm: Vec<u32> = (1..=N).collect();
            perm.shuffle(&mut rng::rng_at(seed, &[1]));
            let sorted = iso::switch_sort(&f, &perm)?;
            let d = exact::exact_distance_to_monotone(&f)?.changed_points;
            let moved = f.hamming_distance(&sorted)?;
            let psi0 = iso::psi_process(&f, 0.0, 20, seed)?.mean;
            Ok((
                exact::decreasing_edge_count(&sorted)? == 0,
                moved >= d,
                psi0,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let unsorted = rows.iter().filter(|r| !r.0).count();
    let short = rows.iter().filter(|r| !r.1).count();
    let nonzero = rows.iter().filter(|r| r.2 != 0.0).count();
    Ok(Outcome {
        passed: unsorted == 0 && short == 0 && nonzero == 0,
        detail: format!(
            "{unsorted} not monotone after sorting, {short} moved fewer than dist*2^n points, \
             {nonzero} nonzero estimates at p=0 (of 100)"
        ),
        constants: Vec::new(),
        failed: Vec::new(),
    })
}

struct LbSweep {
    n: u32,
    erasure_mismatch: usize,
    plus_nonzero: usize,
    minus_zero: [usize; 3],
    band: (f64, f64),
}

fn lower_bound_at(ctx: &Ctx, n: u32) -> Result<LbSweep> {
    const KAPPA: f64 = 0.25;
    let rows = (0..50u64)
        .into_par_iter()
        .map(|i| -> Result<(bool, bool, [bool; 3], f64)> {
            let seed = ctx.seed_for(10, u64::from(n) << 32 | i);
            let (plus, f) = lowerbound::sample_instance(n, KAPPA, Sign::Plus, seed)?;
            let (minus, g) = lowerbound::sample_instance(n, KAPPA, Sign::Minus, seed)?;
            let mut erasure_ok = true;
            for (inst, h) in [(&plus, &f), (&minus, &g)] {
                let s = lowerbound::erasure_stats(inst);
                erasure_ok &= s.count == h.erased_count() && s.count <= s.bound;
                erasure_ok &= match n {
                    8 => s.count == 84,
                    12 => s.count == 1000,
                    _ => true,
                };
            }
            let fp = lowerbound::farness(&plus, &f)?;
            let fm = lowerbound::dminus_farness(&minus, &g)?;
            Ok((
                erasure_ok,
                fp.mono.is_zero() && fp.unate.is_zero() && fp.junta.is_zero(),
                [fm.mono.is_zero(), fm.unate.is_zero(), fm.junta.is_zero()],
                fm.mono.to_f64() * f64::from(n).sqrt(),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut sweep = LbSweep {
        n,
        erasure_mismatch: rows.iter().filter(|r| !r.0).count(),
        plus_nonzero: rows.iter().filter(|r| !r.1).count(),
        minus_zero: [0; 3],
        band: (f64::INFINITY, 0.0),
    };
    for r in &rows {
        for k in 0..3 {
            sweep.minus_zero[k] += usize::from(r.2[k]);
        }
        if r.3 > 0.0 {
            sweep.band.0 = sweep.band.0.min(r.3);
        }
        sweep.band.1 = sweep.band.1.max(r.3);
    }
    Ok(sweep)
}

fn lower_bound(ctx: &Ctx) -> Result<Outcome> {
    let ns = match ctx.n {
        Some(n) => vec![n],
        None => vec![8, 12],
    };
    let sweeps = ns
        .iter()
        .map(|&n| lower_bound_at(ctx, n))
        .collect::<Result<Vec<_>>>()?;
    let mut failed: Vec<String> = Vec::new();
    let mut fail = |clause: &str| {
        if !failed.iter().any(|f| f == clause) {
            failed.push(clause.to_string());
        }
    };
    let mut parts = Vec::new();
    let mut constants = Vec::new();
    for s in &sweeps {
        let [zm, zu, zj] = s.minus_zero;
        for (bad, clause) in [
            (s.erasure_mismatch, "erasure_counts"),
            (s.plus_nonzero, "dplus_distances_zero"),
            (zm, "dminus_mono_positive"),
            (zu, "dminus_unate_positive"),
            (zj, "dminus_junta_positive"),
        ] {
            if bad > 0 {
                fail(clause);
            }
        }
        parts.push(format!(
            "n={}: erasure mismatches {}, D+ nonzero {}, D- zero (mono/unate/junta) {zm}/{zu}/{zj} of 50, \
             sqrt(n) dist_mono {:.4}..{:.4}",
            s.n, s.erasure_mismatch, s.plus_nonzero, s.band.0, s.band.1
        ));
        constants.push(constant(10, "dminus_sqrt_n_dist_mono_min", s.n, s.band.0));
        constants.push(constant(10, "dminus_sqrt_n_dist_mono_max", s.n, s.band.1));
        constants.push(constant(10, "dminus_unate_zero_fraction", s.n, zu as f64 / 50.0));
    }
    if sweeps.len() > 1 {
        let lo = sweeps.iter().map(|s| s.band.0).fold(f64::INFINITY, f64::min);
        let hi = sweeps.iter().map(|s| s.band.1).fold(0.0, f64::max);
        let spread = hi / lo;
        if !(spread <= 3.0) {
            fail("band_spread");
        }
        parts.push(format!("band spread {spread:.3}"));
        constants.push(constant(10, "dminus_band_spread", ns[ns.len() - 1], spread));
    }
    Ok(Outcome {
        passed: failed.is_empty(),
        detail: parts.join("; "),
        constants,
        failed,
    })
}

/// Order-sensitive and order-free fingerprints of a query sequence, plus
/// its length.
fn fingerprint(oracle: &QueryOracle<'_>) -> (u64, u64, u64) {
    let mut ordered = std::collections::hash_map::DefaultHasher::new();
    let mut multiset = 0u64;
    let mut count = 0u64;
    oracle.for_each_query(|p: Point| {
        p.0.hash(&mut ordered);
        multiset = multiset.wrapping_add(rng::derive(p.0, &[]));
        count += 1;
    });
    (ordered.finish(), multiset, count)
}

/// Independent closed form for the size of an `ApproxMono` batch:
/// `2 t_e + sum over capture calls of t' (1 + |S|^2)`.
pub fn closed_form_query_count(params: &ApproxParams, n: u32) -> u64 {
    let nf = f64::from(n);
    let levels = f64::from(31 - n.leading_zeros() + 1);
    let t = (params.c_t * nf.sqrt() * levels.powi(params.polylog_exponent as i32) / params.eps).ceil() as u64;
    let de = params.eps / (2.0 * nf.sqrt());
    let te = ((10.0 * nf.log2() / (de * de)).ceil() as u64).max(1);
    let dm = (1.0 / (4.0 * t as f64)).max(params.delta_floor);
    let tm = ((10.0 * (nf / params.eps).log2() / (dm * dm)).ceil() as u64).max(1);
    let mut total = 2 * te;
    for h in 0..levels as u32 {
        for k in 0..t {
            let s = u64::from(approx::sample_set(params.seed, n, h, k).len());
            total += tm * (1 + s * s);
        }
    }
    total
}

/// `eps` of the audited runs. Each audit replays the whole batch twice, so
/// this sets the cost of the check.
pub const AUDIT_EPS: f64 = 0.1;

fn audit(ctx: &Ctx) -> Result<Outcome> {
    const N: u32 = 10;
    let truth = families::antimajority(N)?.materialize()?;
    let zero = families::constant(N, false)?.materialize()?;
    let rows = (0..20u64)
        .into_par_iter()
        .map(|i| -> Result<(bool, bool)> {
            let params = ApproxParams::experiment(AUDIT_EPS, ctx.seed_for(11, i));
            let mut a = QueryOracle::new(&truth);
            let va = approx::approx_mono_on(&params, &mut a)?;
            let mut b = QueryOracle::new(&zero);
            let vb = approx::approx_mono_on(&params, &mut b)?;
            let (fa, fb) = (fingerprint(&a), fingerprint(&b));
            let expected = closed_form_query_count(&params, N);
            Ok((
                fa == fb,
                va.query_count == expected && vb.query_count == expected && fa.2 == expected,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let differ = rows.iter().filter(|r| !r.0).count();
    let miscounted = rows.iter().filter(|r| !r.1).count();
    Ok(Outcome {
        passed: differ == 0 && miscounted == 0,
        detail: format!(
            "{differ}/20 seeds with differing query sequences, {miscounted}/20 off the closed-form count \
             (n={N}, eps={AUDIT_EPS})"
        ),
        constants: Vec::new(),
        failed: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selection() {
        assert_eq!(select(None).unwrap().len(), 11);
        let s = select(Some("lemma25, c5,11,approx")).unwrap();
        assert_eq!(s.iter().map(|c| c.id).collect::<Vec<_>>(), vec![2, 5, 11]);
        assert!(select(Some("nope")).is_err());
    }

    #[test]
    fn closed_form_matches_plan() {
        for seed in 0..5 {
            let p = ApproxParams::experiment(0.45, seed);
            let plan = approx::ApproxMonoPlan::new(&p, 6).unwrap();
            use crate::oracle::QueryPlan;
            assert_eq!(plan.query_count().unwrap(), closed_form_query_count(&p, 6));
        }
    }

    #[test]
    fn constants_csv_quotes_sets() {
        let r = CriterionReport {
            id: 2,
            key: "x",
            title: "x",
            passed: true,
            detail: String::new(),
            elapsed: Duration::ZERO,
            limit: Duration::ZERO,
            constants: vec![constant(2, "set", 3, "{1,2}")],
            failed: Vec::new(),
        };
        let mut out = Vec::new();
        write_constants(&[r], &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "criterion,name,n,value\nC2,set,3,\"{1,2}\"\n");
    }

    #[test]
    fn small_criteria_pass() {
        let ctx = Ctx { seed: 1, n: None };
        for key in ["lemma25", "switch"] {
            let c = select(Some(key)).unwrap()[0];
            let r = run_criterion(c, &ctx);
            assert!(r.passed, "{r}");
        }
    }
}
