//! Named function families used by the tools and tests.

use std::fmt;
use std::str::FromStr;

use crate::cube::{DimSet, Point};
use crate::error::{Error, Result};
use crate::func::{Func, MAX_TABLE_DIM};
use crate::rng;

use super::{sample_instance, Sign};

pub fn constant(n: u32, value: bool) -> Result<Func> {
    Ok(Func::from_rule(n, move |_| value)?.with_label(format!("constant{}", u8::from(value))))
}

fn check_dim(n: u32, i: u32) -> Result<()> {
    if i == 0 || i > n {
        return Err(Error::arg(format!("dimension {i} outside 1..={n}")));
    }
    Ok(())
}

/// `f(x) = x_i` (1-based).
pub fn dictator(n: u32, i: u32) -> Result<Func> {
    check_dim(n, i)?;
    Ok(Func::from_rule(n, move |x| x.bit(i - 1))?.with_label(format!("dictator:{i}")))
}

/// `f(x) = 1 - x_i` (1-based).
pub fn antidictator(n: u32, i: u32) -> Result<Func> {
    check_dim(n, i)?;
    Ok(Func::from_rule(n, move |x| !x.bit(i - 1))?.with_label(format!("antidictator:{i}")))
}

/// `[|x| > n/2]`; ties go to 0 when `n` is even.
pub fn majority(n: u32) -> Result<Func> {
    Ok(Func::from_rule(n, move |x| 2 * x.weight() > n)?.with_label("majority"))
}

/// `1 - majority(x)`.
pub fn antimajority(n: u32) -> Result<Func> {
    Ok(Func::from_rule(n, move |x| 2 * x.weight() <= n)?.with_label("antimajority"))
}

/// Majority with the values at `0^n` and `1^n` swapped: `f(0^n) = 1`,
/// `f(1^n) = 0`. Exactly two points away from monotone.
pub fn remark(n: u32) -> Result<Func> {
    if n.is_multiple_of(2) {
        return Err(Error::arg(format!(
            "remark family needs odd n (got {n}) so that majority has no ties"
        )));
    }
    let top = crate::cube::low_mask(n);
    Ok(Func::from_rule(n, move |x| {
        if x.0 == 0 {
            true
        } else if x.0 == top {
            false
        } else {
            2 * x.weight() > n
        }
    })?
    .with_label("remark"))
}

/// Each value independently 1 with probability `p`, keyed by `seed`.
/// Materialized when `n` admits a table.
pub fn random(n: u32, p: f64, seed: u64) -> Result<Func> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::arg(format!("p={p} outside [0,1]")));
    }
    let f = Func::from_rule(n, move |x| rng::unit_hash(seed, x.0) < p)?;
    let f = if n <= MAX_TABLE_DIM { f.materialize()? } else { f };
    Ok(f.with_label(format!("random_p:{p}")))
}

/// `f = 1` exactly when `x_B` is all ones and `x_i = 0`, for a random
/// `m`-set `B` and a random `i` outside it. The only decreasing edges are
/// the `2^(n-m-1)` disjoint edges along `i`, so the distance is `2^-(m+1)`.
pub fn sparse_violation(n: u32, m: u32, seed: u64) -> Result<Func> {
    if m + 1 > n {
        return Err(Error::arg(format!("sparse_violation needs m < n (m={m}, n={n})")));
    }
    let (block, i) = sparse_violation_parts(n, m, seed);
    let f = Func::from_rule(n, move |x| x.0 & block.0 == block.0 && !x.bit(i))?;
    Ok(f.with_label(format!("sparse_violation:{m}")))
}

pub(crate) fn sparse_violation_parts(n: u32, m: u32, seed: u64) -> (DimSet, u32) {
    use rand::seq::SliceRandom;
    let mut dims: Vec<u32> = (0..n).collect();
    dims.shuffle(&mut rng::rng_at(seed, &[rng::FAMILY]));
    let block = dims[..m as usize].iter().fold(0u64, |acc, &b| acc | 1 << b);
    (DimSet(block), dims[m as usize])
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Family {
    Constant(bool),
    Dictator(u32),
    Antidictator(u32),
    Majority,
    Antimajority,
    Remark,
    RandomP(f64),
    SparseViolation(u32),
    DPlus(f64),
    DMinus(f64),
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Constant(_) => "constant",
            Family::Dictator(_) => "dictator",
            Family::Antidictator(_) => "antidictator",
            Family::Majority => "majority",
            Family::Antimajority => "antimajority",
            Family::Remark => "remark",
            Family::RandomP(_) => "random_p",
            Family::SparseViolation(_) => "sparse_violation",
            Family::DPlus(_) => "dplus",
            Family::DMinus(_) => "dminus",
        }
    }

    /// Parameters as `key=value`, empty when there are none.
    pub fn params(&self) -> String {
        match *self {
            Family::Constant(b) => format!("value={}", u8::from(b)),
            Family::Dictator(i) | Family::Antidictator(i) => format!("i={i}"),
            Family::RandomP(p) => format!("p={p}"),
            Family::SparseViolation(m) => format!("m={m}"),
            Family::DPlus(k) | Family::DMinus(k) => format!("kappa={k}"),
            Family::Majority | Family::Antimajority | Family::Remark => String::new(),
        }
    }

    /// Whether the generated function depends on the seed.
    pub fn is_seeded(&self) -> bool {
        matches!(
            self,
            Family::RandomP(_) | Family::SparseViolation(_) | Family::DPlus(_) | Family::DMinus(_)
        )
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Family::Constant(b) => write!(f, "constant{}", u8::from(b)),
            Family::Dictator(i) => write!(f, "dictator:{i}"),
            Family::Antidictator(i) => write!(f, "antidictator:{i}"),
            Family::RandomP(p) => write!(f, "random_p:{p}"),
            Family::SparseViolation(m) => write!(f, "sparse_violation:{m}"),
            Family::DPlus(k) => write!(f, "dplus:{k}"),
            Family::DMinus(k) => write!(f, "dminus:{k}"),
            other => f.write_str(other.name()),
        }
    }
}

/// Accepts `constant0`, `constant1`, `dictator[:i]`, `antidictator[:i]`,
/// `majority`, `antimajority`, `remark`, `random_p[:p]`,
/// `sparse_violation[:m]`, `dplus[:kappa]`, `dminus[:kappa]`.
impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Family> {
        let (name, param) = match s.split_once(':') {
            Some((a, b)) => (a, Some(b)),
            None => (s, None),
        };
        fn num<T: FromStr>(s: &str, p: Option<&str>, default: T) -> Result<T> {
            match p {
                None => Ok(default),
                Some(text) => text
                    .parse()
                    .map_err(|_| Error::arg(format!("bad parameter {text:?} in family {s:?}"))),
            }
        }
        let family = match name {
            "constant0" if param.is_none() => Family::Constant(false),
            "constant1" if param.is_none() => Family::Constant(true),
            "constant" => Family::Constant(match param {
                None | Some("0") => false,
                Some("1") => true,
                _ => return Err(Error::arg(format!("bad constant {s:?}"))),
            }),
            "dictator" => Family::Dictator(num(s, param, 1)?),
            "antidictator" => Family::Antidictator(num(s, param, 1)?),
            "majority" => Family::Majority,
            "antimajority" => Family::Antimajority,
            "remark" => Family::Remark,
            "random_p" | "random" => Family::RandomP(num(s, param, 0.5)?),
            "sparse_violation" => Family::SparseViolation(num(s, param, 2)?),
            "dplus" => Family::DPlus(num(s, param, 0.25)?),
            "dminus" => Family::DMinus(num(s, param, 0.25)?),
            _ => return Err(Error::arg(format!("unknown family {s:?}"))),
        };
        Ok(family)
    }
}

/// A family together with the dimension and the seed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FamilySpec {
    pub family: Family,
    pub n: u32,
    pub seed: u64,
}

impl FamilySpec {
    pub fn new(family: Family, n: u32, seed: u64) -> FamilySpec {
        FamilySpec { family, n, seed }
    }
}

pub fn gen_family(spec: FamilySpec) -> Result<Func> {
    let FamilySpec { family, n, seed } = spec;
    let f = match family {
        Family::Constant(b) => constant(n, b)?,
        Family::Dictator(i) => dictator(n, i)?,
        Family::Antidictator(i) => antidictator(n, i)?,
        Family::Majority => majority(n)?,
        Family::Antimajority => antimajority(n)?,
        Family::Remark => remark(n)?,
        Family::RandomP(p) => random(n, p, seed)?,
        Family::SparseViolation(m) => sparse_violation(n, m, seed)?,
        Family::DPlus(k) => sample_instance(n, k, Sign::Plus, seed)?.1,
        Family::DMinus(k) => sample_instance(n, k, Sign::Minus, seed)?.1,
    };
    Ok(f.with_label(family.to_string()))
}

/// The point with ones exactly on the given 1-based dimensions.
pub fn point(n: u32, dims: &[u32]) -> Result<Point> {
    Ok(Point(DimSet::from_dims(n, dims)?.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{brute_force_distance, exact_distance_to_monotone};

    #[test]
    fn remark_family() {
        let f = remark(5).unwrap();
        assert!(f.bit(Point(0)).unwrap());
        assert!(!f.bit(Point(0b11111)).unwrap());
        assert!(f.bit(Point(0b00111)).unwrap());
        assert!(!f.bit(Point(0b00011)).unwrap());
        assert_eq!(exact_distance_to_monotone(&f).unwrap().changed_points, 2);
        assert!(matches!(remark(4), Err(Error::Argument(_))));
    }

    #[test]
    fn small_distances() {
        let a = antidictator(3, 2).unwrap().materialize().unwrap();
        assert_eq!(brute_force_distance(&a).unwrap().changed_points, 4);
        assert!(exact_distance_to_monotone(&constant(8, true).unwrap()).unwrap().is_zero());
        assert!(dictator(3, 4).is_err());
    }

    #[test]
    fn sparse_violation_distance() {
        for seed in 0..5 {
            let f = sparse_violation(8, 3, seed).unwrap();
            let d = exact_distance_to_monotone(&f).unwrap();
            assert_eq!(d.changed_points, 1 << (8 - 3 - 1));
            assert_eq!(crate::exact::decreasing_edge_count(&f).unwrap(), 1 << (8 - 3 - 1));
        }
    }

    #[test]
    fn random_is_seeded() {
        let a = random(10, 0.3, 4).unwrap();
        let b = random(10, 0.3, 4).unwrap();
        assert_eq!(a.hamming_distance(&b).unwrap(), 0);
        let c = random(10, 0.3, 5).unwrap();
        assert!(a.hamming_distance(&c).unwrap() > 0);
        let ones = a.bit_table().unwrap().iter().filter(|&&b| b).count();
        assert!((ones as f64 / 1024.0 - 0.3).abs() < 0.06);
    }

    #[test]
    fn parse_round_trip() {
        for s in [
            "constant0",
            "constant1",
            "dictator:3",
            "antidictator:1",
            "majority",
            "antimajority",
            "remark",
            "random_p:0.25",
            "sparse_violation:3",
            "dplus:0.25",
            "dminus:0.3",
        ] {
            let fam: Family = s.parse().unwrap();
            assert_eq!(fam.to_string(), s);
        }
        assert_eq!("antidictator".parse::<Family>().unwrap(), Family::Antidictator(1));
        assert_eq!("constant:1".parse::<Family>().unwrap(), Family::Constant(true));
        assert!("parity".parse::<Family>().is_err());
        assert!("dictator:x".parse::<Family>().is_err());
    }

    #[test]
    fn gen_family_is_deterministic() {
        let spec = FamilySpec::new(Family::DMinus(0.25), 8, 11);
        let a = gen_family(spec).unwrap();
        let b = gen_family(spec).unwrap();
        assert_eq!(a.to_table_string().unwrap(), b.to_table_string().unwrap());
        assert_eq!(a.label(), "dminus:0.25");
    }
}
