//! The hard instances for nonadaptive erasure-resilient testers.
//!
//! A random half `M` of the coordinates is the control part and the rest
//! (`M̄`) the action part. Points with `|x_M| != n/4` get the value of the
//! comparison `|x_M| > n/4`. On the middle layer of `M` every prefix `x_M`
//! names an action subcube; the subcube is erased in a window of radius
//! `r = floor(n^kappa)` around `|x_M̄| = n/4`, and outside the window its
//! value is `0*` when `x_M` is in the chosen half `P_M` of the prefixes and
//! `1*` otherwise. `D+` turns the stars into constants; `D-` turns them into
//! majority or anti-majority of `x_M̄`.

pub mod families;

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;

use crate::cube::{DimSet, Point};
use crate::error::{Error, Result};
use crate::exact::{
    binomial, exact_distance_to_junta, exact_distance_to_monotone, exact_distance_to_unate,
    k_subsets, Dyadic, ExactDistance,
};
use crate::func::{Func, Value, MAX_TABLE_DIM};
use crate::rng;
use crate::stats::{McEstimate, Running};

/// Largest `n` for [`farness`]; the unate and junta sweeps dominate.
pub const FARNESS_CAP: u32 = 12;
/// Largest `n` for exhaustive enumeration of `M` in [`bad_event_probability`].
pub const BAD_EVENT_EXACT_CAP: u32 = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "plus",
            Sign::Minus => "minus",
        })
    }
}

impl FromStr for Sign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Sign> {
        match s {
            "plus" | "+" => Ok(Sign::Plus),
            "minus" | "-" => Ok(Sign::Minus),
            _ => Err(Error::arg(format!("unknown sign {s:?}"))),
        }
    }
}

/// What `g` assigns to a point before the stars are resolved.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cell {
    Zero,
    One,
    Erased,
    ZeroStar,
    OneStar,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LowerBoundInstance {
    pub n: u32,
    pub kappa: f64,
    /// Control dimensions, `|M| = n/2`.
    pub m: DimSet,
    /// Chosen prefixes `x & M`, sorted.
    pub pm: Vec<u64>,
    pub sign: Sign,
    pub radius: u32,
    pub seed: u64,
}

/// `floor(n^kappa)`.
pub fn window_radius(n: u32, kappa: f64) -> u32 {
    let r = f64::from(n).powf(kappa).floor() as u32;
    // guard against powf landing just under an integer
    if f64::from(r + 1).powf(1.0 / kappa) <= f64::from(n) * (1.0 + 1e-12) {
        r + 1
    } else {
        r
    }
}

fn check_shape(n: u32, kappa: f64) -> Result<u32> {
    if n == 0 || !n.is_multiple_of(4) {
        return Err(Error::arg(format!("n={n} must be a positive multiple of 4")));
    }
    if !(kappa > 0.0 && kappa < 0.5) {
        return Err(Error::arg(format!("kappa={kappa} outside (0,1/2)")));
    }
    let r = window_radius(n, kappa);
    if r < 1 {
        return Err(Error::arg(format!("window radius floor(n^kappa) = {r} < 1")));
    }
    Ok(r)
}

/// The uniformly random `n/2`-subset `M` drawn for `seed`.
pub fn sample_control(n: u32, seed: u64) -> DimSet {
    let mut dims: Vec<u32> = (0..n).collect();
    dims.shuffle(&mut rng::rng_at(seed, &[rng::LB, 0]));
    DimSet(dims[..(n / 2) as usize].iter().fold(0, |acc, &b| acc | 1 << b))
}

/// All prefixes `x & M` with `|x_M| = n/4`, sorted.
pub fn middle_prefixes(n: u32, m: DimSet) -> Vec<u64> {
    let bits: Vec<u32> = m.bits().collect();
    let mut out: Vec<u64> = k_subsets(n / 2, n / 4)
        .into_iter()
        .map(|sub| {
            DimSet(sub)
                .bits()
                .fold(0u64, |acc, pos| acc | 1 << bits[pos as usize])
        })
        .collect();
    out.sort_unstable();
    out
}

impl LowerBoundInstance {
    /// `g(x)` before the stars are resolved.
    pub fn cell(&self, x: Point) -> Cell {
        let quarter = self.n / 4;
        let wm = x.restrict_weight(self.m);
        if wm < quarter {
            return Cell::Zero;
        }
        if wm > quarter {
            return Cell::One;
        }
        let wa = x.restrict_weight(self.m.complement(self.n));
        if wa.abs_diff(quarter) <= self.radius {
            Cell::Erased
        } else if self.in_pm(x) {
            Cell::ZeroStar
        } else {
            Cell::OneStar
        }
    }

    pub fn in_pm(&self, x: Point) -> bool {
        self.pm.binary_search(&(x.0 & self.m.0)).is_ok()
    }

    pub fn value(&self, x: Point) -> Value {
        let quarter = self.n / 4;
        match self.cell(x) {
            Cell::Zero => Value::Zero,
            Cell::One => Value::One,
            Cell::Erased => Value::Erased,
            star => {
                let b = match self.sign {
                    Sign::Plus => star == Cell::OneStar,
                    Sign::Minus => {
                        let maj = x.restrict_weight(self.m.complement(self.n)) > quarter;
                        maj == (star == Cell::ZeroStar)
                    }
                };
                Value::from_bool(b)
            }
        }
    }

    pub fn materialize(&self) -> Result<Func> {
        let table = (0..1u64 << self.n).map(|x| self.value(Point(x))).collect();
        Ok(Func::from_table(self.n, table)?.with_label(format!("d{}:{}", self.sign, self.kappa)))
    }

    /// For `D+`: the `M`-junta that fills every erased point with the
    /// value its subcube takes outside the window. Monotone.
    pub fn junta_completion(&self) -> Result<Func> {
        let table = (0..1u64 << self.n)
            .map(|x| {
                let x = Point(x);
                Value::from_bool(match self.cell(x) {
                    Cell::Zero => false,
                    Cell::One => true,
                    _ => !self.in_pm(x),
                })
            })
            .collect();
        Func::from_table(self.n, table)
    }

    pub fn meta_line(&self) -> String {
        format!(
            "n={} kappa={} M={} pm_size={} sign={} seed={}",
            self.n,
            self.kappa,
            self.m,
            self.pm.len(),
            self.sign,
            self.seed
        )
    }
}

/// Samples `M` and `P_M` for `seed` and builds the `D+` or `D-` function.
/// The same seed gives the same `M` and `P_M` for both signs.
pub fn sample_instance(
    n: u32,
    kappa: f64,
    sign: Sign,
    seed: u64,
) -> Result<(LowerBoundInstance, Func)> {
    let radius = check_shape(n, kappa)?;
    if n > MAX_TABLE_DIM {
        return Err(Error::resource(
            format!("lower-bound instance with n={n}"),
            MAX_TABLE_DIM,
        ));
    }
    let m = sample_control(n, seed);
    let mut psi = middle_prefixes(n, m);
    assert!(psi.len().is_multiple_of(2), "middle layer of M has odd size");
    psi.shuffle(&mut rng::rng_at(seed, &[rng::LB, 1]));
    psi.truncate(psi.len() / 2);
    psi.sort_unstable();
    // the tie layer of M̄ must be erased so D- never needs a tie rule
    assert!(radius >= 1);
    let inst = LowerBoundInstance {
        n,
        kappa,
        m,
        pm: psi,
        sign,
        radius,
        seed,
    };
    let f = inst.materialize()?;
    Ok((inst, f))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ErasureStats {
    pub count: u64,
    pub fraction: Dyadic,
    /// `C(n/2, n/4)^2 * (2r + 1)`.
    pub bound: u64,
}

/// Erased points counted layer by layer: every middle prefix of `M`
/// contributes the `M̄` layers inside the window.
pub fn erasure_stats(inst: &LowerBoundInstance) -> ErasureStats {
    let half = u64::from(inst.n / 2);
    let quarter = i64::from(inst.n / 4);
    let r = i64::from(inst.radius);
    let layers: u64 = (quarter - r..=quarter + r)
        .filter(|&l| l >= 0 && l <= half as i64)
        .map(|l| binomial(half, l as u64))
        .sum();
    let prefixes = binomial(half, half / 2);
    let count = prefixes * layers;
    ErasureStats {
        count,
        fraction: Dyadic::new(count, inst.n),
        bound: prefixes * prefixes * (2 * u64::from(inst.radius) + 1),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Farness {
    pub mono: ExactDistance,
    pub unate: ExactDistance,
    /// Distance to an `n/2`-junta.
    pub junta: ExactDistance,
}

/// Exact min-completion distances of an instance's function to monotone,
/// unate and `n/2`-junta.
pub fn farness(inst: &LowerBoundInstance, f: &Func) -> Result<Farness> {
    if inst.n > FARNESS_CAP {
        return Err(Error::resource(
            format!("farness sweep at n={}", inst.n),
            FARNESS_CAP,
        ));
    }
    Ok(Farness {
        mono: exact_distance_to_monotone(f)?,
        unate: exact_distance_to_unate(f)?,
        junta: exact_distance_to_junta(f, inst.n / 2)?,
    })
}

pub fn dminus_farness(inst: &LowerBoundInstance, f: &Func) -> Result<Farness> {
    if inst.sign != Sign::Minus {
        return Err(Error::arg("dminus_farness needs a minus instance"));
    }
    farness(inst, f)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BadEvent {
    /// Monte Carlo estimate over random `M`.
    pub estimate: McEstimate,
    /// `sum over pairs with |T| >= 2r + 2 of 2^-|T|`.
    pub union_bound: f64,
    /// Exhaustive average over all `M`, when `n` is small enough.
    pub exact: Option<f64>,
}

/// Does some pair of queries share an action subcube of `M` with its two
/// action weights on opposite sides of the erased window?
fn bad_for(queries: &[Point], n: u32, m: DimSet, radius: u32) -> bool {
    let quarter = n / 4;
    let action = m.complement(n);
    let mut span: HashMap<u64, (u32, u32)> = HashMap::new();
    for &x in queries {
        if x.restrict_weight(m) != quarter {
            continue;
        }
        let w = x.restrict_weight(action);
        let e = span.entry(x.0 & m.0).or_insert((w, w));
        e.0 = e.0.min(w);
        e.1 = e.1.max(w);
    }
    span.values()
        .any(|&(lo, hi)| lo + radius < quarter && hi > quarter + radius)
}

/// Probability over `M` that the query set sees both sides of some erased
/// window.
pub fn bad_event_probability(
    queries: &[Point],
    n: u32,
    kappa: f64,
    mc_samples: u64,
    seed: u64,
) -> Result<BadEvent> {
    let radius = check_shape(n, kappa)?;
    let mask = crate::cube::low_mask(n);
    if let Some(x) = queries.iter().find(|x| x.0 & !mask != 0) {
        return Err(Error::arg(format!("query {} outside the {n}-cube", x.0)));
    }
    let mut union_bound = 0.0;
    for (a, &x) in queries.iter().enumerate() {
        for &y in &queries[a + 1..] {
            let t = (x.0 ^ y.0).count_ones();
            if t >= 2 * radius + 2 {
                union_bound += 0.5f64.powi(t as i32);
            }
        }
    }
    let mut running = Running::default();
    let mut rng = rng::rng_at(seed, &[rng::LB, 2]);
    let mut dims: Vec<u32> = (0..n).collect();
    for _ in 0..mc_samples {
        dims.shuffle(&mut rng);
        let m = DimSet(dims[..(n / 2) as usize].iter().fold(0, |acc, &b| acc | 1 << b));
        running.push(f64::from(u8::from(bad_for(queries, n, m, radius))));
    }
    let exact = (n <= BAD_EVENT_EXACT_CAP).then(|| {
        let all = k_subsets(n, n / 2);
        let bad = all
            .iter()
            .filter(|&&m| bad_for(queries, n, DimSet(m), radius))
            .count();
        bad as f64 / all.len() as f64
    });
    let estimate = if mc_samples == 0 {
        McEstimate {
            mean: f64::NAN,
            half_width: f64::INFINITY,
            samples: 0,
        }
    } else {
        running.estimate()
    };
    Ok(BadEvent {
        estimate,
        union_bound,
        exact,
    })
}

fn meta_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

/// Writes the truth table to `path` and the metadata line to `path.meta`.
pub fn write_instance(inst: &LowerBoundInstance, f: &Func, path: &Path) -> Result<()> {
    f.write_table(std::io::BufWriter::new(std::fs::File::create(path)?))?;
    let mut meta = std::fs::File::create(meta_path(path))?;
    writeln!(meta, "{}", inst.meta_line())?;
    Ok(())
}

/// Reads an instance written by [`write_instance`]. The instance is
/// regenerated from its seed and checked against the stored table.
pub fn read_instance(path: &Path) -> Result<(LowerBoundInstance, Func)> {
    let f = Func::load(path)?;
    let text = std::fs::read_to_string(meta_path(path))?;
    let line = text.lines().next().unwrap_or("");
    let mut fields: HashMap<&str, &str> = HashMap::new();
    for (offset, word) in line.split_whitespace().enumerate() {
        let (k, v) = word.split_once('=').ok_or_else(|| Error::Parse {
            line: 1,
            offset,
            message: format!("expected key=value, got {word:?}"),
        })?;
        fields.insert(k, v);
    }
    let get = |k: &str| {
        fields.get(k).copied().ok_or_else(|| Error::Parse {
            line: 1,
            offset: 0,
            message: format!("missing field {k}"),
        })
    };
    let bad = |k: &str| Error::Parse {
        line: 1,
        offset: 0,
        message: format!("bad value for {k}"),
    };
    let n: u32 = get("n")?.parse().map_err(|_| bad("n"))?;
    let kappa: f64 = get("kappa")?.parse().map_err(|_| bad("kappa"))?;
    let sign: Sign = get("sign")?.parse()?;
    let seed: u64 = get("seed")?.parse().map_err(|_| bad("seed"))?;
    let (inst, g) = sample_instance(n, kappa, sign, seed)?;
    if inst.m.to_string() != get("M")? || g.to_table_string()? != f.to_table_string()? {
        return Err(Error::Precondition(format!(
            "{} does not match the instance regenerated from its metadata",
            path.display()
        )));
    }
    Ok((inst, f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::monotone_completable;

    #[test]
    fn radius_floors() {
        assert_eq!(window_radius(8, 0.25), 1);
        assert_eq!(window_radius(12, 0.25), 1);
        assert_eq!(window_radius(16, 0.25), 2);
        assert_eq!(window_radius(16, 0.49), 3);
    }

    #[test]
    fn shape_errors() {
        assert!(matches!(sample_instance(10, 0.25, Sign::Plus, 0), Err(Error::Argument(_))));
        assert!(sample_instance(8, 0.5, Sign::Plus, 0).is_err());
        assert!(sample_instance(8, 0.0, Sign::Plus, 0).is_err());
    }

    #[test]
    fn instance_invariants() {
        let (inst, f) = sample_instance(8, 0.25, Sign::Plus, 3).unwrap();
        assert_eq!(inst.m.len(), 4);
        assert_eq!(inst.pm.len(), 3);
        assert!(inst.pm.iter().all(|&p| p & !inst.m.0 == 0 && p.count_ones() == 2));
        assert_eq!(f.erased_count(), 84);
        let stats = erasure_stats(&inst);
        assert_eq!(stats.count, 84);
        assert_eq!(stats.bound, 108);
        assert_eq!(stats.fraction, Dyadic::new(84, 8));
        let (other, _) = sample_instance(8, 0.25, Sign::Minus, 3).unwrap();
        assert_eq!((other.m, &other.pm), (inst.m, &inst.pm));
    }

    #[test]
    fn erasure_closed_form_at_12() {
        let (inst, f) = sample_instance(12, 0.25, Sign::Minus, 1).unwrap();
        assert_eq!(erasure_stats(&inst).count, 1000);
        assert_eq!(f.erased_count(), 1000);
        for n in [4, 8, 12, 16] {
            for kappa in [0.1, 0.25, 0.4] {
                let (inst, f) = sample_instance(n, kappa, Sign::Plus, 2).unwrap();
                let s = erasure_stats(&inst);
                assert_eq!(s.count, f.erased_count(), "n={n} kappa={kappa}");
                assert!(s.count <= s.bound);
            }
        }
    }

    #[test]
    fn plus_is_completable_and_minus_is_not() {
        for seed in 0..20 {
            let (inst, f) = sample_instance(8, 0.25, Sign::Plus, seed).unwrap();
            assert!(monotone_completable(&f).unwrap());
            let fr = farness(&inst, &f).unwrap();
            assert!(fr.mono.is_zero() && fr.unate.is_zero() && fr.junta.is_zero());
            let j = inst.junta_completion().unwrap();
            assert!(exact_distance_to_monotone(&j).unwrap().is_zero());
            for x in 0..256 {
                if let Some(b) = f.eval(Point(x)).bit() {
                    assert_eq!(j.bit(Point(x)).unwrap(), b);
                }
            }
            let (minus, g) = sample_instance(8, 0.25, Sign::Minus, seed).unwrap();
            let fr = dminus_farness(&minus, &g).unwrap();
            assert!(!fr.mono.is_zero() && !fr.junta.is_zero());
        }
    }

    #[test]
    fn minus_is_unate_completable_at_small_n() {
        // reversing half of the action dimensions leaves every surviving
        // low-weight point incomparable with every surviving high-weight one
        for (n, seeds) in [(8, 10), (12, 3)] {
            for seed in 0..seeds {
                let (inst, g) = sample_instance(n, 0.25, Sign::Minus, seed).unwrap();
                assert!(exact_distance_to_unate(&g).unwrap().is_zero());
                let flip = inst
                    .m
                    .complement(n)
                    .bits()
                    .take((n / 4) as usize)
                    .fold(0u64, |acc, b| acc | 1 << b);
                assert!(monotone_completable(&g.xor_shift(flip).unwrap()).unwrap());
            }
        }
    }

    #[test]
    fn signs_differ_only_on_stars() {
        let (inst, f) = sample_instance(8, 0.25, Sign::Plus, 9).unwrap();
        let (_, g) = sample_instance(8, 0.25, Sign::Minus, 9).unwrap();
        for x in 0..256 {
            let x = Point(x);
            if f.eval(x) != g.eval(x) {
                assert!(matches!(inst.cell(x), Cell::ZeroStar | Cell::OneStar));
            }
        }
    }

    #[test]
    fn bad_event_examples() {
        let single = bad_event_probability(&[Point(5)], 8, 0.25, 200, 1).unwrap();
        assert_eq!(single.estimate.mean, 0.0);
        assert_eq!(single.union_bound, 0.0);
        let x = Point(0b0011_0101);
        let pair = [x, x.complement(8)];
        let b = bad_event_probability(&pair, 8, 0.25, 2000, 1).unwrap();
        assert!(b.estimate.mean <= 2f64.powi(-8) + b.estimate.half_width);
        assert_eq!(b.exact, Some(0.0));
        assert_eq!(b.union_bound, 2f64.powi(-8));
        let near = [x, x.toggle_bit(0)];
        let b = bad_event_probability(&near, 8, 0.25, 500, 1).unwrap();
        assert_eq!((b.estimate.mean, b.exact, b.union_bound), (0.0, Some(0.0), 0.0));
    }

    #[test]
    fn bad_event_exact_matches_hypergeometric() {
        // n = 16, r = 2: bad needs T inside M̄, x_M on the middle layer, and
        // the action weights to straddle [2, 6]
        let x = Point(0);
        let y = Point(0b11_1111);
        let b = bad_event_probability(&[x, y], 16, 0.25, 0, 0).unwrap();
        // |x_M| = 0 is never the middle layer
        assert_eq!(b.exact, Some(0.0));
        let x = Point(0b1111 << 7);
        let y = Point(x.0 | 0b111_1111);
        let b = bad_event_probability(&[x, y], 16, 0.25, 0, 0).unwrap();
        // M must contain the 4 ones of x and avoid T, so it picks 4 of the
        // remaining 5 dims; the action weights are then 0 and 7
        let want = binomial(5, 4) as f64 / binomial(16, 8) as f64;
        assert!((b.exact.unwrap() - want).abs() < 1e-15, "{b:?} {want}");
        assert!(b.exact.unwrap() <= b.union_bound);
    }

    #[test]
    fn meta_round_trip() {
        let dir = std::env::temp_dir().join(format!("lb-meta-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("inst.tt");
        let (inst, f) = sample_instance(8, 0.25, Sign::Minus, 21).unwrap();
        write_instance(&inst, &f, &path).unwrap();
        let (back, g) = read_instance(&path).unwrap();
        assert_eq!(back, inst);
        assert_eq!(g.erased_count(), 84);
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
