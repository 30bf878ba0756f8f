//! Exact ground truth for small dimensions.
//!
//! Everything here is computed by exhaustive enumeration or an exact
//! min-cut, and reported as integers over a power-of-two denominator.

use std::cmp::Ordering;
use std::fmt;

use crate::cube::{DimSet, Point};
use crate::error::{Error, Result};
use crate::estimators::capture_by;
use crate::flow::FlowNetwork;
use crate::func::{Func, Value};

/// Default dimension cap for the min-cut oracle.
pub const MONOTONE_CAP: u32 = 16;
pub const UNATE_CAP: u32 = 12;
pub const BRUTE_FORCE_CAP: u32 = 4;
pub const CAPTURE_CAP: u32 = 20;
/// Largest `C(n,k) * 2^n` the junta sweep will attempt.
pub const JUNTA_BUDGET: u64 = 1 << 28;

/// A non-negative rational `num / 2^log_den`, kept unreduced so that
/// `84/256` prints as such. Equality is numeric.
#[derive(Clone, Copy, Debug)]
pub struct Dyadic {
    pub num: u64,
    pub log_den: u32,
}

impl Dyadic {
    pub fn new(num: u64, log_den: u32) -> Dyadic {
        assert!(log_den < 64);
        Dyadic { num, log_den }
    }

    pub fn zero() -> Dyadic {
        Dyadic::new(0, 0)
    }

    pub fn den(self) -> u64 {
        1u64 << self.log_den
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den() as f64
    }

    /// `k * self`, exact.
    pub fn times(self, k: u64) -> Dyadic {
        Dyadic::new(self.num.checked_mul(k).expect("dyadic overflow"), self.log_den)
    }

    pub fn is_zero(self) -> bool {
        self.num == 0
    }

    /// Lowest terms.
    pub fn reduced(self) -> Dyadic {
        if self.num == 0 {
            return Dyadic::zero();
        }
        let shift = self.num.trailing_zeros().min(self.log_den);
        Dyadic::new(self.num >> shift, self.log_den - shift)
    }
}

impl PartialEq for Dyadic {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Dyadic {}

impl std::hash::Hash for Dyadic {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        let r = self.reduced();
        (r.num, r.log_den).hash(state);
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let a = u128::from(self.num) << other.log_den;
        let b = u128::from(other.num) << self.log_den;
        a.cmp(&b)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den())
    }
}

/// Number of points changed out of `2^n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ExactDistance {
    pub changed_points: u64,
    pub n: u32,
}

impl ExactDistance {
    pub fn domain_size(self) -> u64 {
        1u64 << self.n
    }

    pub fn value(self) -> Dyadic {
        Dyadic::new(self.changed_points, self.n)
    }

    pub fn to_f64(self) -> f64 {
        self.value().to_f64()
    }

    pub fn is_zero(self) -> bool {
        self.changed_points == 0
    }
}

impl fmt::Display for ExactDistance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.value().fmt(f)
    }
}

fn cap_check(f: &Func, cap: u32, what: &str) -> Result<()> {
    if f.n() > cap {
        return Err(Error::resource(format!("{what} at n={}", f.n()), format!("n <= {cap}")));
    }
    Ok(())
}

/// All decreasing edges `(x, x^(i))` with `x_i = 0`, ordered by lower
/// endpoint then dimension.
pub fn decreasing_edges(f: &Func) -> Result<Vec<(Point, Point)>> {
    let table = f.bit_table()?;
    let n = f.n();
    let mut out = Vec::new();
    for (x, &fx) in table.iter().enumerate() {
        if !fx {
            continue;
        }
        for b in 0..n {
            let y = x | 1 << b;
            if y != x && !table[y] {
                out.push((Point(x as u64), Point(y as u64)));
            }
        }
    }
    Ok(out)
}

pub fn decreasing_edge_count(f: &Func) -> Result<u64> {
    Ok(influence_profile(f)?.edges)
}

/// `I_f^-(x)` for every point, with the total decreasing-edge count.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InfluenceProfile {
    pub n: u32,
    pub counts: Vec<u32>,
    pub edges: u64,
}

impl InfluenceProfile {
    pub fn at(&self, x: Point) -> u32 {
        self.counts[x.0 as usize]
    }

    /// Number of points with each count `0..=n`.
    pub fn histogram(&self) -> Vec<u64> {
        let mut h = vec![0u64; self.n as usize + 1];
        for &c in &self.counts {
            h[c as usize] += 1;
        }
        h
    }
}

pub fn influence_profile(f: &Func) -> Result<InfluenceProfile> {
    let table = f.bit_table()?;
    Ok(profile_of(f.n(), &table))
}

pub(crate) fn profile_of(n: u32, table: &[bool]) -> InfluenceProfile {
    let mut counts = vec![0u32; table.len()];
    let mut edges = 0u64;
    for x in 0..table.len() {
        if !table[x] {
            continue;
        }
        for b in 0..n {
            let y = x | 1 << b;
            if y != x && !table[y] {
                counts[x] += 1;
                counts[y] += 1;
                edges += 1;
            }
        }
    }
    InfluenceProfile { n, counts, edges }
}

/// Min-cut network over the hypercube; terminal capacities are rewritten
/// per solve so one network serves many functions of the same dimension.
pub(crate) struct CubeCut {
    n: u32,
    net: FlowNetwork,
    source_arcs: Vec<usize>,
    sink_arcs: Vec<usize>,
}

impl CubeCut {
    pub(crate) fn new(n: u32) -> CubeCut {
        let size = 1usize << n;
        let (s, t) = (size, size + 1);
        let mut net = FlowNetwork::new(size + 2);
        let infinite = size as u64 + 1;
        let mut source_arcs = Vec::with_capacity(size);
        let mut sink_arcs = Vec::with_capacity(size);
        for x in 0..size {
            source_arcs.push(net.add_arc(s, x, 0));
            sink_arcs.push(net.add_arc(x, t, 0));
            for b in 0..n {
                let y = x | 1 << b;
                if y != x {
                    net.add_arc(x, y, infinite);
                }
            }
        }
        CubeCut {
            n,
            net,
            source_arcs,
            sink_arcs,
        }
    }

    /// Minimum number of nonerased points to change; `value(x)` gives the
    /// function on index `x`.
    pub(crate) fn solve(&mut self, value: impl Fn(usize) -> Value) -> u64 {
        let size = 1usize << self.n;
        for x in 0..size {
            let v = value(x);
            self.net
                .set_capacity(self.source_arcs[x], u64::from(v == Value::One));
            self.net
                .set_capacity(self.sink_arcs[x], u64::from(v == Value::Zero));
        }
        self.net.max_flow(size, size + 1)
    }

    /// Monotone function on the source side of the last cut.
    pub(crate) fn repair(&self) -> Vec<bool> {
        let size = 1usize << self.n;
        let mut side = self.net.source_side(size);
        side.truncate(size);
        side
    }
}

pub fn exact_distance_to_monotone(f: &Func) -> Result<ExactDistance> {
    exact_distance_to_monotone_capped(f, MONOTONE_CAP)
}

pub fn exact_distance_to_monotone_capped(f: &Func, cap: u32) -> Result<ExactDistance> {
    cap_check(f, cap, "min-cut distance")?;
    let values = f.values()?;
    let mut cut = CubeCut::new(f.n());
    let changed = cut.solve(|x| values[x]);
    Ok(ExactDistance {
        changed_points: changed,
        n: f.n(),
    })
}

/// A nearest monotone completion of `f` with its distance.
pub fn monotone_repair(f: &Func) -> Result<(ExactDistance, Func)> {
    cap_check(f, MONOTONE_CAP, "min-cut distance")?;
    let values = f.values()?;
    let mut cut = CubeCut::new(f.n());
    let changed = cut.solve(|x| values[x]);
    let g = Func::from_bits(f.n(), cut.repair())?.with_label(format!("repair({})", f.label()));
    Ok((
        ExactDistance {
            changed_points: changed,
            n: f.n(),
        },
        g,
    ))
}

/// Whether the nonerased values extend to a monotone function: no
/// nonerased `x < y` with `f(x) = 1`, `f(y) = 0`. Computed by closing the
/// 1-points upward, independently of the min-cut.
pub fn monotone_completable(f: &Func) -> Result<bool> {
    let values = f.values()?;
    let n = f.n();
    let mut above_one: Vec<bool> = values.iter().map(|&v| v == Value::One).collect();
    for x in 0..values.len() {
        if !above_one[x] {
            above_one[x] = (0..n).any(|b| x >> b & 1 == 1 && above_one[x ^ 1 << b]);
        }
    }
    Ok(!values
        .iter()
        .zip(&above_one)
        .any(|(&v, &up)| v == Value::Zero && up))
}

/// Every monotone function on `n <= 4` variables, as a bit mask over
/// point indices.
pub fn monotone_functions(n: u32) -> Result<Vec<u64>> {
    if n == 0 || n > BRUTE_FORCE_CAP {
        return Err(Error::resource(
            format!("monotone enumeration at n={n}"),
            format!("1..={BRUTE_FORCE_CAP}"),
        ));
    }
    let size = 1u64 << n;
    let tables = 1u64 << size;
    let monotone = |m: u64| {
        (0..size).all(|x| {
            m >> x & 1 == 0 || (0..n).all(|b| m >> (x | 1 << b) & 1 == 1)
        })
    };
    Ok((0..tables).filter(|&m| monotone(m)).collect())
}

/// Minimum Hamming distance to any monotone function by enumeration.
pub fn brute_force_distance(f: &Func) -> Result<ExactDistance> {
    cap_check(f, BRUTE_FORCE_CAP, "brute-force distance")?;
    let table = f.bit_table()?;
    let mask = table
        .iter()
        .enumerate()
        .fold(0u64, |m, (x, &b)| m | u64::from(b) << x);
    let best = monotone_functions(f.n())?
        .into_iter()
        .map(|m| u64::from((m ^ mask).count_ones()))
        .min()
        .expect("constants are monotone");
    Ok(ExactDistance {
        changed_points: best,
        n: f.n(),
    })
}

/// `Pr_x[Capture(x, S, f) = 1]` by enumeration.
pub fn exact_capture_probability(f: &Func, set: DimSet) -> Result<Dyadic> {
    cap_check(f, CAPTURE_CAP, "capture enumeration")?;
    let table = f.bit_table()?;
    Ok(Dyadic::new(capture_count(&table, f.n(), set), f.n()))
}

pub(crate) fn capture_count(table: &[bool], _n: u32, set: DimSet) -> u64 {
    let mut count = 0;
    for x in 0..table.len() {
        let hit = capture_by(Point(x as u64), set, |p| Ok::<_, Error>(table[p.0 as usize]))
            .expect("infallible");
        count += u64::from(hit);
    }
    count
}

/// Per dimension `i`, the numbers of nonerased decreasing and increasing
/// `i`-edges. Reorienting other dimensions permutes `i`-edges among
/// themselves, so these counts give, for every orientation, a matching
/// lower bound on the distance.
fn directional_edge_counts(values: &[Value], n: u32) -> Vec<(u64, u64)> {
    let mut out = vec![(0u64, 0u64); n as usize];
    for x in 0..values.len() {
        for b in 0..n {
            let y = x | 1 << b;
            if y == x {
                continue;
            }
            match (values[x], values[y]) {
                (Value::One, Value::Zero) => out[b as usize].0 += 1,
                (Value::Zero, Value::One) => out[b as usize].1 += 1,
                _ => {}
            }
        }
    }
    out
}

/// Minimum over orientations `r` of the monotone distance of `x -> f(x ^ r)`.
pub fn exact_distance_to_unate(f: &Func) -> Result<ExactDistance> {
    Ok(unate_search(f)?.0)
}

/// As [`exact_distance_to_unate`], also returning a best orientation.
pub fn unate_search(f: &Func) -> Result<(ExactDistance, u64)> {
    cap_check(f, UNATE_CAP, "unate orientation sweep")?;
    let n = f.n();
    let values = f.values()?;
    let counts = directional_edge_counts(&values, n);
    let bound = |r: u64| {
        counts
            .iter()
            .enumerate()
            .map(|(b, &(dec, inc))| if r >> b & 1 == 1 { inc } else { dec })
            .max()
            .unwrap_or(0)
    };
    let mut order: Vec<(u64, u64)> = (0..1u64 << n).map(|r| (bound(r), r)).collect();
    order.sort_unstable();
    let mut cut = CubeCut::new(n);
    let mut best = (u64::MAX, 0u64);
    for (lb, r) in order {
        if lb >= best.0 {
            break;
        }
        let d = cut.solve(|x| values[x ^ r as usize]);
        if d < best.0 {
            best = (d, r);
            if d == 0 {
                break;
            }
        }
    }
    Ok((
        ExactDistance {
            changed_points: best.0,
            n,
        },
        best.1,
    ))
}

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// k-subsets of `0..n` as masks, in increasing numeric order.
pub(crate) fn k_subsets(n: u32, k: u32) -> Vec<u64> {
    (0..1u64 << n).filter(|m| m.count_ones() == k).collect()
}

/// Minimum over `k`-sets `J` of the cost of making `f` depend only on `J`:
/// each cell `x_J = c` is filled with its nonerased plurality.
pub fn exact_distance_to_junta(f: &Func, k: u32) -> Result<ExactDistance> {
    Ok(junta_search(f, k)?.0)
}

/// As [`exact_distance_to_junta`], also returning a best set.
pub fn junta_search(f: &Func, k: u32) -> Result<(ExactDistance, DimSet)> {
    let n = f.n();
    if k > n {
        return Err(Error::arg(format!("junta size k={k} exceeds n={n}")));
    }
    let work = binomial(u64::from(n), u64::from(k)).saturating_mul(1u64 << n);
    if n > crate::func::MAX_TABLE_DIM || work > JUNTA_BUDGET {
        return Err(Error::resource(
            format!("junta sweep with n={n}, k={k}"),
            format!("C(n,k)*2^n <= {JUNTA_BUDGET}"),
        ));
    }
    let values = f.values()?;
    let mut best = (u64::MAX, DimSet::EMPTY);
    let mut zeros = vec![0u64; 1 << k];
    let mut ones = vec![0u64; 1 << k];
    for j in k_subsets(n, k) {
        zeros.fill(0);
        ones.fill(0);
        let bits: Vec<u32> = DimSet(j).bits().collect();
        for (x, &v) in values.iter().enumerate() {
            let cell = bits
                .iter()
                .enumerate()
                .fold(0usize, |c, (pos, &b)| c | (x >> b & 1) << pos);
            match v {
                Value::Zero => zeros[cell] += 1,
                Value::One => ones[cell] += 1,
                Value::Erased => {}
            }
        }
        let cost: u64 = zeros.iter().zip(&ones).map(|(&z, &o)| z.min(o)).sum();
        if cost < best.0 {
            best = (cost, DimSet(j));
        }
    }
    Ok((
        ExactDistance {
            changed_points: best.0,
            n,
        },
        best.1,
    ))
}

/// The quantities reported by the `exact` command.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactReport {
    pub n: u32,
    pub dist_mono: ExactDistance,
    pub dist_unate: Option<ExactDistance>,
    pub dist_junta: Option<(u32, ExactDistance)>,
    /// Absent for functions with erased values.
    pub dec_edges: Option<u64>,
}

pub fn exact_report(f: &Func, unate: bool, junta_k: Option<u32>) -> Result<ExactReport> {
    let dist_mono = exact_distance_to_monotone(f)?;
    let dist_unate = if unate {
        Some(exact_distance_to_unate(f)?)
    } else {
        None
    };
    let dist_junta = match junta_k {
        Some(k) => Some((k, exact_distance_to_junta(f, k)?)),
        None => None,
    };
    let dec_edges = if f.is_total() {
        Some(decreasing_edge_count(f)?)
    } else {
        None
    };
    Ok(ExactReport {
        n: f.n(),
        dist_mono,
        dist_unate,
        dist_junta,
        dec_edges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families;

    fn all_functions(n: u32) -> impl Iterator<Item = Func> {
        let size = 1u64 << n;
        (0..1u64 << size).map(move |m| Func::from_bits(n, (0..size).map(|x| m >> x & 1 == 1)).unwrap())
    }

    #[test]
    fn dyadic_ordering_and_display() {
        assert!(Dyadic::new(1, 2) < Dyadic::new(3, 3));
        assert_eq!(Dyadic::new(2, 2).cmp(&Dyadic::new(1, 1)), Ordering::Equal);
        assert_eq!(Dyadic::new(2, 5).to_string(), "2/32");
    }

    #[test]
    fn decreasing_edges_examples() {
        assert!(decreasing_edges(&families::constant(4, false).unwrap()).unwrap().is_empty());
        // f = 1 - x_1 at n=2: edges along dimension 1
        let f = families::antidictator(2, 1).unwrap();
        let edges = decreasing_edges(&f).unwrap();
        assert_eq!(edges, vec![(Point(0b00), Point(0b01)), (Point(0b10), Point(0b11))]);
        let r = families::remark(5).unwrap();
        assert_eq!(decreasing_edges(&r).unwrap().len(), 10);
    }

    #[test]
    fn profile_examples() {
        let p = influence_profile(&families::constant(4, true).unwrap()).unwrap();
        assert!(p.counts.iter().all(|&c| c == 0));
        let p = influence_profile(&families::antidictator(6, 3).unwrap()).unwrap();
        assert!(p.counts.iter().all(|&c| c == 1));
        let p = influence_profile(&families::remark(5).unwrap()).unwrap();
        assert_eq!(p.at(Point(0)), 5);
        assert_eq!(p.at(Point(31)), 5);
        let h = p.histogram();
        assert_eq!((h[0], h[1], h[5]), (32 - 12, 10, 2));
        for x in 0..32u64 {
            let w = x.count_ones();
            let expected = match w {
                0 | 5 => 5,
                1 | 4 => 1,
                _ => 0,
            };
            assert_eq!(p.at(Point(x)), expected);
        }
        assert_eq!(p.counts.iter().map(|&c| u64::from(c)).sum::<u64>(), 2 * p.edges);
    }

    #[test]
    fn dedekind_counts() {
        let counts: Vec<usize> = (1..=4).map(|n| monotone_functions(n).unwrap().len()).collect();
        assert_eq!(counts, vec![3, 6, 20, 168]);
        assert!(monotone_functions(5).is_err());
    }

    #[test]
    fn distance_examples() {
        let r = families::remark(5).unwrap();
        assert_eq!(exact_distance_to_monotone(&r).unwrap().value(), Dyadic::new(2, 5));
        let a = families::antidictator(3, 1).unwrap();
        assert_eq!(exact_distance_to_monotone(&a).unwrap().value(), Dyadic::new(1, 1));
        assert_eq!(brute_force_distance(&a).unwrap().value(), Dyadic::new(1, 1));
        let a2 = families::antidictator(2, 1).unwrap();
        assert_eq!(brute_force_distance(&a2).unwrap().changed_points, 2);
        assert!(brute_force_distance(&families::constant(3, false).unwrap()).unwrap().is_zero());
        assert!(matches!(
            exact_distance_to_monotone(&families::constant(17, false).unwrap()),
            Err(Error::Resource { .. })
        ));
    }

    #[test]
    fn min_cut_matches_brute_force_at_n3() {
        for f in all_functions(3) {
            assert_eq!(
                exact_distance_to_monotone(&f).unwrap(),
                brute_force_distance(&f).unwrap()
            );
        }
    }

    #[test]
    fn repair_is_monotone_and_attains_the_distance() {
        for f in all_functions(3).step_by(7) {
            let (d, g) = monotone_repair(&f).unwrap();
            assert_eq!(decreasing_edge_count(&g).unwrap(), 0);
            assert_eq!(f.hamming_distance(&g).unwrap(), d.changed_points);
        }
    }

    #[test]
    fn erased_points_are_free() {
        // 1 ? 0 pattern along a chain: erasures alone cannot fix a violation
        let f = Func::parse_table("n=2\n?1?0\n").unwrap();
        // f(01)=1, f(11)=0 violate
        assert_eq!(exact_distance_to_monotone(&f).unwrap().changed_points, 1);
        assert!(!monotone_completable(&f).unwrap());
        let g = Func::parse_table("n=2\n1??1\n").unwrap();
        assert!(exact_distance_to_monotone(&g).unwrap().is_zero());
        assert!(monotone_completable(&g).unwrap());
        // violation only through an erased middle point
        let h = Func::parse_table("n=2\n1??0\n").unwrap();
        assert!(!monotone_completable(&h).unwrap());
        assert_eq!(exact_distance_to_monotone(&h).unwrap().changed_points, 1);
    }

    #[test]
    fn completability_matches_zero_distance_on_partial_functions() {
        // all 3^4 partial functions on n=2 and a sample at n=3
        for n in [2u32, 3] {
            let size = 1usize << n;
            let total = 3u64.pow(size as u32);
            for code in (0..total).step_by(if n == 2 { 1 } else { 13 }) {
                let mut c = code;
                let table: Vec<Value> = (0..size)
                    .map(|_| {
                        let v = [Value::Zero, Value::One, Value::Erased][(c % 3) as usize];
                        c /= 3;
                        v
                    })
                    .collect();
                let f = Func::from_table(n, table).unwrap();
                assert_eq!(
                    monotone_completable(&f).unwrap(),
                    exact_distance_to_monotone(&f).unwrap().is_zero()
                );
            }
        }
    }

    #[test]
    fn capture_probability_examples() {
        let a = families::antidictator(2, 1).unwrap();
        assert!(exact_capture_probability(&a, DimSet::EMPTY).unwrap().is_zero());
        assert_eq!(exact_capture_probability(&a, DimSet(0b01)).unwrap(), Dyadic::new(1, 1));
        assert!(exact_capture_probability(&a, DimSet(0b10)).unwrap().is_zero());
    }

    #[test]
    fn unate_examples() {
        let a = families::antidictator(5, 2).unwrap();
        assert!(exact_distance_to_unate(&a).unwrap().is_zero());
        let (_, r) = unate_search(&a).unwrap();
        assert_eq!(r, 0b10);
        assert!(exact_distance_to_unate(&families::majority(5).unwrap()).unwrap().is_zero());
        // parity on 2 variables is 1/4-far from unate
        let p = Func::from_rule(2, |x| x.weight() == 1).unwrap();
        assert_eq!(exact_distance_to_unate(&p).unwrap().changed_points, 1);
    }

    #[test]
    fn unate_pruning_matches_full_sweep() {
        for f in all_functions(3).step_by(5) {
            let values = f.values().unwrap();
            let mut cut = CubeCut::new(3);
            let full = (0..8usize)
                .map(|r| cut.solve(|x| values[x ^ r]))
                .min()
                .unwrap();
            assert_eq!(exact_distance_to_unate(&f).unwrap().changed_points, full);
        }
    }

    #[test]
    fn junta_examples() {
        let d = families::dictator(4, 3).unwrap();
        assert!(exact_distance_to_junta(&d, 1).unwrap().is_zero());
        let p = Func::from_rule(2, |x| x.weight() == 1).unwrap();
        // every cell of either coordinate holds one 0 and one 1
        assert_eq!(exact_distance_to_junta(&p, 1).unwrap().value(), Dyadic::new(1, 1));
        assert_eq!(binomial(12, 6), 924);
    }
}
