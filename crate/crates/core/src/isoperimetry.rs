//! Directed-isoperimetry quantities: the Talagrand objective, its colored
//! variant, the `H_{d,b,s}` partition behind the capture analysis, the
//! switching process and the restricted objective.
//!
//! Square roots are only taken at the end: every evaluator first builds an
//! integer profile (how many points have each count) and sums `count * sqrt(k)`
//! from that, so two quantities built from the same profile agree bit for bit.

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::cube::{DimSet, Point};
use crate::error::{Error, Result};
use crate::exact::{self, capture_count, exact_distance_to_monotone, profile_of};
use crate::func::Func;
use crate::rng;
use crate::stats::{McEstimate, Running};

pub const OBJECTIVE_CAP: u32 = 20;
pub const RESTRICTED_EXACT_CAP: u32 = 10;
pub const LEMMA26_CAP: u32 = 12;

/// Slack allowed when comparing a restricted objective to its bound.
pub const RESTRICTED_SLACK: f64 = 1.0 / (1u64 << 40) as f64;

fn cap_check(n: u32, cap: u32, what: &str) -> Result<()> {
    if n > cap {
        return Err(Error::resource(format!("{what} at n={n}"), format!("n <= {cap}")));
    }
    Ok(())
}

/// `(1 / 2^n) * sum_k hist[k] * sqrt(k)`.
fn sqrt_mean(hist: &[u64], n: u32) -> f64 {
    let sum: f64 = hist
        .iter()
        .enumerate()
        .map(|(k, &c)| c as f64 * (k as f64).sqrt())
        .sum();
    sum / (1u64 << n) as f64
}

fn histogram(counts: impl Iterator<Item = u32>, n: u32) -> Vec<u64> {
    let mut h = vec![0u64; n as usize + 1];
    for c in counts {
        h[c as usize] += 1;
    }
    h
}

/// `E_x[sqrt(I_f^-(x))]` with the profile it was computed from.
#[derive(Clone, Debug, PartialEq)]
pub struct Objective {
    pub value: f64,
    /// `histogram[k]` = number of points with `I_f^-(x) = k`.
    pub histogram: Vec<u64>,
}

pub fn talagrand_objective(f: &Func) -> Result<Objective> {
    cap_check(f.n(), OBJECTIVE_CAP, "Talagrand objective")?;
    let profile = exact::influence_profile(f)?;
    let histogram = profile.histogram();
    Ok(Objective {
        value: sqrt_mean(&histogram, f.n()),
        histogram,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Color {
    Red,
    Blue,
}

/// A red/blue coloring of the decreasing edges of one function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coloring {
    edges: Vec<(Point, Point)>,
    colors: Vec<Color>,
}

impl Coloring {
    /// Colors every decreasing edge `(x, y)` of `f` (with `f(x) = 1`).
    pub fn from_fn(f: &Func, mut rule: impl FnMut(Point, Point) -> Color) -> Result<Coloring> {
        let edges = exact::decreasing_edges(f)?;
        let colors = edges.iter().map(|&(x, y)| rule(x, y)).collect();
        Ok(Coloring { edges, colors })
    }

    /// An explicit coloring; checked against the function when used.
    pub fn from_parts(edges: Vec<(Point, Point)>, colors: Vec<Color>) -> Result<Coloring> {
        if edges.len() != colors.len() {
            return Err(Error::arg("one color per edge required"));
        }
        Ok(Coloring { edges, colors })
    }

    pub fn edges(&self) -> &[(Point, Point)] {
        &self.edges
    }

    pub fn colors(&self) -> &[Color] {
        &self.colors
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn red_count(&self) -> usize {
        self.colors.iter().filter(|&&c| c == Color::Red).count()
    }

    /// Per point, the 0-based dimensions of red edges counted at its
    /// 1-valued end and of blue edges counted at its 0-valued end.
    fn masks(&self, f: &Func) -> Result<(Vec<u64>, Vec<u64>)> {
        if self.edges != exact::decreasing_edges(f)? {
            return Err(Error::arg(
                "coloring does not cover exactly the decreasing edges of f",
            ));
        }
        let size = f.size() as usize;
        let mut red = vec![0u64; size];
        let mut blue = vec![0u64; size];
        for (&(x, y), &c) in self.edges.iter().zip(&self.colors) {
            let dim = (x.0 ^ y.0).trailing_zeros();
            match c {
                Color::Red => red[x.0 as usize] |= 1 << dim,
                Color::Blue => blue[y.0 as usize] |= 1 << dim,
            }
        }
        Ok((red, blue))
    }
}

/// Red iff `I_f^-(x) >= I_f^-(y)`, so ties go red.
pub fn kms_coloring(f: &Func) -> Result<Coloring> {
    let profile = exact::influence_profile(f)?;
    Coloring::from_fn(f, |x, y| {
        if profile.at(x) >= profile.at(y) {
            Color::Red
        } else {
            Color::Blue
        }
    })
}

/// `(E[sqrt(I_red)], E[sqrt(I_blue)])`.
pub fn colored_objectives(f: &Func, coloring: &Coloring) -> Result<(f64, f64)> {
    cap_check(f.n(), OBJECTIVE_CAP, "colored objective")?;
    let (red, blue) = coloring.masks(f)?;
    let n = f.n();
    let hr = histogram(red.iter().map(|m| m.count_ones()), n);
    let hb = histogram(blue.iter().map(|m| m.count_ones()), n);
    Ok((sqrt_mean(&hr, n), sqrt_mean(&hb, n)))
}

/// One refined cell `H_{d,b,s}`.
#[derive(Clone, Debug, PartialEq)]
pub struct HCell {
    pub s: u32,
    pub points: Vec<Point>,
}

/// The class `H_{d,b}` and its refinement.
#[derive(Clone, Debug, PartialEq)]
pub struct HClass {
    pub d: u32,
    pub color: Color,
    pub size: u64,
    /// `(1/2^n) sum_{x in H_{d,b}} sqrt(I_{f,b}(x))`.
    pub objective: f64,
    pub cells: Vec<HCell>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub d: u32,
    pub color: Color,
    pub s: u32,
    pub points: Vec<Point>,
    /// The class objective of `H_{d*,b*}`.
    pub class_objective: f64,
    /// `|H_{d*,b*,s*}| sqrt(s*) / 2^n`.
    pub size_bound: f64,
    /// `sqrt(s*) / d*`.
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HPartition {
    pub n: u32,
    pub classes: Vec<HClass>,
    pub witness: Option<Witness>,
}

/// Builds every `H_{d,b}` and `H_{d,b,s}` and selects the witness maximizing
/// `|H_{d,b,s}| sqrt(s) / 2^n`; ties go to smaller `d`, then red, then
/// smaller `s`. A monotone function gives no classes and no witness.
pub fn h_partition(f: &Func, coloring: &Coloring) -> Result<HPartition> {
    cap_check(f.n(), OBJECTIVE_CAP, "H-partition")?;
    let n = f.n();
    let table = f.bit_table()?;
    let profile = profile_of(n, &table);
    let (red, blue) = coloring.masks(f)?;
    let mut classes = Vec::new();
    let mut d = 1u32;
    while d <= n {
        for color in [Color::Red, Color::Blue] {
            let want = color == Color::Red;
            let (masks, members): (&[u64], Vec<Point>) = (
                if want { &red } else { &blue },
                (0..table.len())
                    .filter(|&x| {
                        let c = profile.counts[x];
                        table[x] == want && d <= c && c < 2 * d
                    })
                    .map(|x| Point(x as u64))
                    .collect(),
            );
            if members.is_empty() {
                continue;
            }
            let colored: Vec<u32> = members
                .iter()
                .map(|x| masks[x.0 as usize].count_ones())
                .collect();
            let objective = colored.iter().map(|&c| f64::from(c).sqrt()).sum::<f64>()
                / (1u64 << n) as f64;
            let mut cells = Vec::new();
            let mut s = 1u32;
            while s <= d {
                let points: Vec<Point> = members
                    .iter()
                    .zip(&colored)
                    .filter(|&(_, &c)| s <= c && c < 2 * s)
                    .map(|(&x, _)| x)
                    .collect();
                if !points.is_empty() {
                    cells.push(HCell { s, points });
                }
                s *= 2;
            }
            classes.push(HClass {
                d,
                color,
                size: members.len() as u64,
                objective,
                cells,
            });
        }
        d *= 2;
    }
    let mut witness: Option<Witness> = None;
    for class in &classes {
        for cell in &class.cells {
            let score = cell.points.len() as f64 * f64::from(cell.s).sqrt() / (1u64 << n) as f64;
            // classes and cells are visited in tie-break order
            if witness.as_ref().is_none_or(|w| score > w.size_bound) {
                witness = Some(Witness {
                    d: class.d,
                    color: class.color,
                    s: cell.s,
                    points: cell.points.clone(),
                    class_objective: class.objective,
                    size_bound: score,
                    ratio: f64::from(cell.s).sqrt() / f64::from(class.d),
                });
            }
        }
    }
    Ok(HPartition {
        n,
        classes,
        witness,
    })
}

/// Lower bounds on `Pr_S[Capture(x, S, f)]` for inclusion probability
/// `1/d`, from the unique-index argument.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CaptureBound {
    /// `|viol(x)|`.
    pub viol: u32,
    /// `|goodviol(x)|`: decreasing dimensions whose other end has no larger
    /// count.
    pub goodviol: u32,
    /// `sum_{i in goodviol} (1/d) (1 - 1/d)^{|viol(x) ∪ viol(x^(i))| - 1}`:
    /// the exact probability of the disjoint events "i is the only
    /// decreasing dimension of x or x^(i) in S".
    pub unique_index: f64,
    /// `(s/d) (1 - 1/d)^{4d}` with `s = |goodviol|`, for `d >= 2` and
    /// `|viol| < 2d`; for `d = 1`, the unique-index value.
    pub closed_form: Option<f64>,
}

pub fn capture_bound(f: &Func, x: Point, d: u32) -> Result<CaptureBound> {
    if d == 0 || !d.is_power_of_two() {
        return Err(Error::arg(format!("d={d} is not a power of two")));
    }
    let table = f.bit_table()?;
    let n = f.n();
    let profile = profile_of(n, &table);
    let viol_mask = |z: usize| -> u64 {
        (0..n)
            .filter(|&b| {
                let w = z ^ 1 << b;
                let (lo, hi) = if z < w { (z, w) } else { (w, z) };
                table[lo] && !table[hi]
            })
            .fold(0u64, |m, b| m | 1 << b)
    };
    let xi = x.0 as usize;
    let vx = viol_mask(xi);
    let q = 1.0 / f64::from(d);
    let mut goodviol = 0;
    let mut unique_index = 0.0;
    if table[xi] {
        for b in DimSet(vx).bits() {
            let y = xi ^ 1 << b;
            if profile.counts[xi] >= profile.counts[y] {
                goodviol += 1;
            }
            // f(x) = 1, so every decreasing edge at x goes up from x
            let others = (vx | viol_mask(y)).count_ones() - 1;
            unique_index += q * (1.0 - q).powi(others as i32);
        }
    }
    let viol = vx.count_ones();
    let closed_form = if d == 1 {
        Some(unique_index)
    } else if viol < 2 * d && table[xi] {
        Some(f64::from(goodviol) * q * (1.0 - q).powi(4 * d as i32))
    } else {
        None
    };
    Ok(CaptureBound {
        viol,
        goodviol,
        unique_index,
        closed_form,
    })
}

/// Draws `S ~ S(1/d)`.
fn draw_set(r: &mut rng::Rng, n: u32, p: f64) -> DimSet {
    DimSet((0..n).filter(|_| r.gen_bool(p)).fold(0u64, |m, b| m | 1 << b))
}

/// `Pr_{S ~ S(1/d)}[Capture(x, S, f) = 1]`; exact for `d = 1`.
pub fn capture_probability_over_s(
    x: Point,
    f: &Func,
    d: u32,
    samples: u64,
    seed: u64,
) -> Result<McEstimate> {
    if d == 0 || !d.is_power_of_two() {
        return Err(Error::arg(format!("d={d} is not a power of two")));
    }
    let table = f.bit_table()?;
    let n = f.n();
    let hit = |s: DimSet| {
        crate::estimators::capture_by(x, s, |p| Ok::<_, Error>(table[p.0 as usize]))
            .expect("infallible")
    };
    if d == 1 {
        return Ok(McEstimate::exact(if hit(DimSet::full(n)) { 1.0 } else { 0.0 }));
    }
    let mut r = rng::rng_at(seed, &[rng::SETS, x.0, u64::from(d)]);
    let mut acc = Running::default();
    for _ in 0..samples {
        let s = draw_set(&mut r, n, 1.0 / f64::from(d));
        acc.push(if hit(s) { 1.0 } else { 0.0 });
    }
    Ok(acc.estimate())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Lemma26Row {
    pub d: u32,
    /// `E_S[Pr_x[Capture(x, S, f)]]`, exact in `x`, sampled in `S`.
    pub estimate: McEstimate,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Lemma26Table {
    pub rows: Vec<Lemma26Row>,
    pub best_d: u32,
    pub max: f64,
    pub dist: f64,
    pub decreasing_edges: u64,
    /// `max / (dist / (sqrt(n) * log2(n)^4))`; `None` for monotone `f`.
    pub ratio: Option<f64>,
}

pub fn lemma26_witness(f: &Func, samples: u64, seed: u64) -> Result<Lemma26Table> {
    cap_check(f.n(), LEMMA26_CAP, "capture table")?;
    let n = f.n();
    let table = f.bit_table()?;
    let dist = exact_distance_to_monotone(f)?.to_f64();
    let edges = profile_of(n, &table).edges;
    let size = (1u64 << n) as f64;
    let mut rows = Vec::new();
    let mut d = 1u32;
    while d <= n {
        let estimate = if d == 1 {
            McEstimate::exact(capture_count(&table, n, DimSet::full(n)) as f64 / size)
        } else {
            let mut r = rng::rng_at(seed, &[rng::SETS, u64::from(d)]);
            let mut acc = Running::default();
            for _ in 0..samples {
                let s = draw_set(&mut r, n, 1.0 / f64::from(d));
                acc.push(capture_count(&table, n, s) as f64 / size);
            }
            acc.estimate()
        };
        rows.push(Lemma26Row { d, estimate });
        d *= 2;
    }
    let (best_d, max) = rows
        .iter()
        .fold((1, f64::NEG_INFINITY), |(bd, bm), r| {
            if r.estimate.mean > bm {
                (r.d, r.estimate.mean)
            } else {
                (bd, bm)
            }
        });
    let scale = f64::from(n).sqrt() * f64::from(n).log2().max(1.0).powi(4);
    let ratio = (dist > 0.0).then(|| max / (dist / scale));
    Ok(Lemma26Table {
        rows,
        best_d,
        max,
        dist,
        decreasing_edges: edges,
        ratio,
    })
}

/// Sorts `f` along each 1-based dimension of `dims` in turn: every
/// decreasing edge along that dimension has its two values swapped.
pub fn switch_sort(f: &Func, dims: &[u32]) -> Result<Func> {
    let n = f.n();
    let mut table = f.bit_table()?;
    for &i in dims {
        if i == 0 || i > n {
            return Err(Error::arg(format!("dimension {i} outside 1..={n}")));
        }
        sort_dimension(&mut table, i - 1);
    }
    Ok(Func::from_bits(n, table)?.with_label(format!("sorted({})", f.label())))
}

fn sort_dimension(table: &mut [bool], b: u32) {
    for x in 0..table.len() {
        let y = x | 1 << b;
        if y != x && table[x] && !table[y] {
            table[x] = false;
            table[y] = true;
        }
    }
}

/// Mean relative distance between `f` and `f` sorted along a random
/// permutation of `S ~ S(p)`.
pub fn psi_process(f: &Func, p: f64, trials: u64, seed: u64) -> Result<McEstimate> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::arg(format!("p={p} outside [0,1]")));
    }
    let n = f.n();
    let base = f.bit_table()?;
    let size = base.len() as f64;
    let mut acc = Running::default();
    for trial in 0..trials {
        let mut r = rng::rng_at(seed, &[rng::SETS, trial]);
        let mut order: Vec<u32> = draw_set(&mut r, n, p).bits().collect();
        order.shuffle(&mut r);
        let mut table = base.clone();
        for &b in &order {
            sort_dimension(&mut table, b);
        }
        let changed = table.iter().zip(&base).filter(|(a, b)| a != b).count();
        acc.push(changed as f64 / size);
    }
    Ok(acc.estimate())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Mode {
    /// Sum over all `2^n` subsets; `n <= 10`.
    Exact,
    MonteCarlo { samples: u64 },
}

/// Decreasing dimensions at each point (as a 1-valued or 0-valued end).
fn viol_masks(table: &[bool], n: u32) -> Vec<u64> {
    let mut out = vec![0u64; table.len()];
    for x in 0..table.len() {
        if !table[x] {
            continue;
        }
        for b in 0..n {
            let y = x | 1 << b;
            if y != x && !table[y] {
                out[x] |= 1 << b;
                out[y] |= 1 << b;
            }
        }
    }
    out
}

/// `E_{S ~ S(p)} E_x[sqrt(|mask(x) ∩ S|)]` for per-point masks.
fn restricted_mean(masks: &[Vec<u64>], n: u32, p: f64, mode: Mode, seed: u64) -> Result<McEstimate> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::arg(format!("p={p} outside [0,1]")));
    }
    match mode {
        Mode::Exact => {
            cap_check(n, RESTRICTED_EXACT_CAP, "exact restricted objective")?;
            // counts[s][k]: (S, x) pairs with |S| = s and |mask(x) ∩ S| = k,
            // summed over all mask families
            let dim = n as usize + 1;
            let mut counts = vec![0u64; dim * dim];
            for s in 0..1u64 << n {
                let row = s.count_ones() as usize * dim;
                for family in masks {
                    for &m in family {
                        counts[row + (m & s).count_ones() as usize] += 1;
                    }
                }
            }
            let mut total = 0.0;
            for s in 0..dim {
                let weight = p.powi(s as i32) * (1.0 - p).powi((dim - 1 - s) as i32);
                if weight == 0.0 {
                    continue;
                }
                let row: f64 = (0..dim)
                    .map(|k| counts[s * dim + k] as f64 * (k as f64).sqrt())
                    .sum();
                total += weight * row;
            }
            Ok(McEstimate::exact(total / (1u64 << n) as f64))
        }
        Mode::MonteCarlo { samples } => {
            let mut r = rng::rng_at(seed, &[rng::SETS]);
            let mut acc = Running::default();
            let size = 1u64 << n;
            for _ in 0..samples {
                let s = draw_set(&mut r, n, p);
                let x = r.gen_range(0..size) as usize;
                let v: f64 = masks
                    .iter()
                    .map(|fam| f64::from((fam[x] & s.0).count_ones()).sqrt())
                    .sum();
                acc.push(v);
            }
            Ok(acc.estimate())
        }
    }
}

/// The restricted Talagrand objective: decreasing edges of random
/// restrictions `f(., z)` counted only along `S ~ S(p)`.
pub fn restricted_objective(f: &Func, p: f64, mode: Mode, seed: u64) -> Result<McEstimate> {
    let table = f.bit_table()?;
    restricted_mean(&[viol_masks(&table, f.n())], f.n(), p, mode, seed)
}

/// The colored restricted objective (red plus blue), for the coloring of
/// `f` carried down to each restriction.
pub fn restricted_colored_objective(
    f: &Func,
    coloring: &Coloring,
    p: f64,
    mode: Mode,
    seed: u64,
) -> Result<McEstimate> {
    let (red, blue) = coloring.masks(f)?;
    restricted_mean(&[red, blue], f.n(), p, mode, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn objective_examples() {
        assert_eq!(talagrand_objective(&families::constant(5, true).unwrap()).unwrap().value, 0.0);
        let a = families::antidictator(6, 4).unwrap();
        assert!(close(talagrand_objective(&a).unwrap().value, 1.0));
        let r = families::remark(5).unwrap();
        let expected = (2.0 * 5f64.sqrt() + 10.0) / 32.0;
        assert!(close(talagrand_objective(&r).unwrap().value, expected));
    }

    #[test]
    fn coloring_examples() {
        let a = families::antidictator(4, 1).unwrap();
        let c = kms_coloring(&a).unwrap();
        assert_eq!(c.len(), 8);
        assert_eq!(c.red_count(), 8);
        let (red, blue) = colored_objectives(&a, &c).unwrap();
        assert!(close(red, 0.5));
        assert_eq!(blue, 0.0);
        let r = families::remark(5).unwrap();
        let c = kms_coloring(&r).unwrap();
        // edges out of 0^5 are red (5 >= 1); edges into 1^5 are blue (1 < 5)
        assert_eq!((c.len(), c.red_count()), (10, 5));
        let k = kms_coloring(&families::constant(3, false).unwrap()).unwrap();
        assert!(k.is_empty());
        assert_eq!(colored_objectives(&families::constant(3, false).unwrap(), &k).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn incomplete_coloring_is_rejected() {
        let a = families::antidictator(3, 1).unwrap();
        let c = kms_coloring(&a).unwrap();
        let partial =
            Coloring::from_parts(c.edges()[1..].to_vec(), c.colors()[1..].to_vec()).unwrap();
        assert!(matches!(colored_objectives(&a, &partial), Err(Error::Argument(_))));
    }

    #[test]
    fn h_partition_examples() {
        let a = families::antidictator(5, 2).unwrap();
        let h = h_partition(&a, &kms_coloring(&a).unwrap()).unwrap();
        let w = h.witness.unwrap();
        assert_eq!((w.d, w.color, w.s), (1, Color::Red, 1));
        assert!(close(w.size_bound, 0.5));
        let r = families::remark(5).unwrap();
        let h = h_partition(&r, &kms_coloring(&r).unwrap()).unwrap();
        let w = h.witness.unwrap();
        assert_eq!((w.d, w.color, w.s), (4, Color::Red, 4));
        assert_eq!(w.points, vec![Point(0)]);
        let c = families::constant(4, true).unwrap();
        let h = h_partition(&c, &kms_coloring(&c).unwrap()).unwrap();
        assert!(h.classes.is_empty() && h.witness.is_none());
    }

    #[test]
    fn capture_over_s_examples() {
        let a = families::antidictator(6, 1).unwrap();
        assert_eq!(capture_probability_over_s(Point(0), &a, 1, 0, 1).unwrap().mean, 1.0);
        let e = capture_probability_over_s(Point(1), &a, 4, 2000, 1).unwrap();
        assert_eq!(e.mean, 0.0);
    }

    #[test]
    fn switch_sort_examples() {
        let a = families::antidictator(4, 1).unwrap();
        let s = switch_sort(&a, &[1]).unwrap();
        assert_eq!(s.hamming_distance(&families::dictator(4, 1).unwrap()).unwrap(), 0);
        let m = families::majority(5).unwrap();
        assert_eq!(switch_sort(&m, &[3, 1, 2]).unwrap().hamming_distance(&m).unwrap(), 0);
    }

    #[test]
    fn psi_endpoints() {
        let a = families::antidictator(5, 3).unwrap();
        assert_eq!(psi_process(&a, 0.0, 20, 1).unwrap().mean, 0.0);
        let e = psi_process(&a, 1.0, 5, 2).unwrap();
        assert_eq!((e.mean, e.half_width), (1.0, 0.0));
    }

    #[test]
    fn restricted_objective_endpoints_and_closed_form() {
        let r = families::remark(5).unwrap();
        let full = talagrand_objective(&r).unwrap().value;
        assert_eq!(restricted_objective(&r, 1.0, Mode::Exact, 0).unwrap().mean, full);
        assert_eq!(restricted_objective(&r, 0.0, Mode::Exact, 0).unwrap().mean, 0.0);
        // per point, E_S sqrt(|viol ∩ S|) is a binomial average
        let p: f64 = 0.25;
        let prof = exact::influence_profile(&r).unwrap();
        let by_formula: f64 = prof
            .counts
            .iter()
            .map(|&c| {
                (0..=c)
                    .map(|k| {
                        exact::binomial(u64::from(c), u64::from(k)) as f64
                            * p.powi(k as i32)
                            * (1.0 - p).powi((c - k) as i32)
                            * f64::from(k).sqrt()
                    })
                    .sum::<f64>()
            })
            .sum::<f64>()
            / 32.0;
        let exact_mode = restricted_objective(&r, p, Mode::Exact, 0).unwrap().mean;
        assert!((exact_mode - by_formula).abs() < 1e-12);
        let mc = restricted_objective(&r, p, Mode::MonteCarlo { samples: 200_000 }, 3).unwrap();
        assert!((mc.mean - exact_mode).abs() < 4.0 * mc.half_width + 1e-3);
    }
}
