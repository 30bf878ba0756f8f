//! Hypercube geometry.
//!
//! A point of `{0,1}^n` is stored as an unsigned index whose bit `i - 1`
//! holds coordinate `x_i` (dimension 1 is the least significant bit).
//! Public operations that take a dimension use 1-based numbering and are
//! checked against the ambient dimension; the `*_bit` helpers on [`Point`]
//! are 0-based and unchecked, for inner loops.

use std::fmt;

use crate::error::{Error, Result};

/// Largest dimension a point can live in (one machine word).
pub const MAX_DIM: u32 = 63;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Point(pub u64);

impl Point {
    #[inline]
    pub fn index(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn weight(self) -> u32 {
        self.0.count_ones()
    }

    /// Number of set coordinates inside `set`.
    #[inline]
    pub fn restrict_weight(self, set: DimSet) -> u32 {
        (self.0 & set.0).count_ones()
    }

    #[inline]
    pub fn bit(self, b: u32) -> bool {
        self.0 >> b & 1 == 1
    }

    #[inline]
    pub fn toggle_bit(self, b: u32) -> Point {
        Point(self.0 ^ (1u64 << b))
    }

    #[inline]
    pub fn with_bit(self, b: u32, value: bool) -> Point {
        if value {
            Point(self.0 | 1u64 << b)
        } else {
            Point(self.0 & !(1u64 << b))
        }
    }

    #[inline]
    pub fn complement(self, n: u32) -> Point {
        Point(!self.0 & low_mask(n))
    }

    /// Coordinatewise `self <= other`.
    #[inline]
    pub fn precedes(self, other: Point) -> bool {
        self.0 & !other.0 == 0
    }
}

/// A set of dimensions, stored as a bitmask with the same bit order as
/// [`Point`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct DimSet(pub u64);

impl DimSet {
    pub const EMPTY: DimSet = DimSet(0);

    pub fn full(n: u32) -> DimSet {
        DimSet(low_mask(n))
    }

    /// Builds a set from 1-based dimension numbers.
    pub fn from_dims(n: u32, dims: &[u32]) -> Result<DimSet> {
        let mut mask = 0u64;
        for &d in dims {
            check_dim(n, d)?;
            mask |= 1u64 << (d - 1);
        }
        Ok(DimSet(mask))
    }

    #[inline]
    pub fn len(self) -> u32 {
        self.0.count_ones()
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn contains_bit(self, b: u32) -> bool {
        self.0 >> b & 1 == 1
    }

    /// 0-based bit positions in increasing order.
    pub fn bits(self) -> impl Iterator<Item = u32> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let b = rest.trailing_zeros();
                rest &= rest - 1;
                Some(b)
            }
        })
    }

    /// 1-based dimension numbers in increasing order.
    pub fn dims(self) -> Vec<u32> {
        self.bits().map(|b| b + 1).collect()
    }

    pub fn complement(self, n: u32) -> DimSet {
        DimSet(!self.0 & low_mask(n))
    }
}

impl fmt::Display for DimSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dims: Vec<String> = self.dims().iter().map(u32::to_string).collect();
        write!(f, "{{{}}}", dims.join(","))
    }
}

#[inline]
pub fn low_mask(n: u32) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

fn check_dim(n: u32, i: u32) -> Result<()> {
    if i == 0 || i > n {
        return Err(Error::arg(format!("dimension {i} outside 1..={n}")));
    }
    Ok(())
}

/// The hypercube `{0,1}^n`; carries the ambient dimension for checked
/// point operations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Cube {
    n: u32,
}

impl Cube {
    pub fn new(n: u32) -> Result<Cube> {
        if n == 0 || n > MAX_DIM {
            return Err(Error::arg(format!("dimension n={n} outside 1..={MAX_DIM}")));
        }
        Ok(Cube { n })
    }

    pub fn n(self) -> u32 {
        self.n
    }

    pub fn size(self) -> u64 {
        1u64 << self.n
    }

    pub fn contains(self, x: Point) -> bool {
        x.0 <= low_mask(self.n)
    }

    pub fn points(self) -> impl Iterator<Item = Point> {
        (0..self.size()).map(Point)
    }

    fn check(self, x: Point, i: u32) -> Result<()> {
        check_dim(self.n, i)?;
        if !self.contains(x) {
            return Err(Error::arg(format!("point {} outside {{0,1}}^{}", x.0, self.n)));
        }
        Ok(())
    }

    /// `x^{(i)}`: complement coordinate `i`.
    pub fn flip(self, x: Point, i: u32) -> Result<Point> {
        self.check(x, i)?;
        Ok(x.toggle_bit(i - 1))
    }

    /// `x^{(i -> b)}`: force coordinate `i` to `b`.
    pub fn set_bit(self, x: Point, i: u32, b: bool) -> Result<Point> {
        self.check(x, i)?;
        Ok(x.with_bit(i - 1, b))
    }

    pub fn weight(self, x: Point) -> u32 {
        x.weight()
    }

    pub fn restrict_weight(self, x: Point, set: DimSet) -> Result<u32> {
        if set.0 & !low_mask(self.n) != 0 {
            return Err(Error::arg(format!("dimension set {set} not inside [{}]", self.n)));
        }
        Ok(x.restrict_weight(set))
    }

    pub fn complement(self, x: Point) -> Point {
        x.complement(self.n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(bits: &str) -> Point {
        // written with dimension 1 rightmost
        Point(u64::from_str_radix(bits, 2).unwrap())
    }

    #[test]
    fn flip_examples() {
        let c = Cube::new(4).unwrap();
        assert_eq!(c.flip(p("0000"), 3).unwrap(), p("0100"));
        assert_eq!(c.flip(p("1111"), 1).unwrap(), p("1110"));
        assert!(c.flip(p("0000"), 0).is_err());
        assert!(c.flip(p("0000"), 5).is_err());
    }

    #[test]
    fn set_bit_examples() {
        let c = Cube::new(4).unwrap();
        assert_eq!(c.set_bit(p("0101"), 2, true).unwrap(), p("0111"));
        assert_eq!(c.set_bit(p("0101"), 1, true).unwrap(), p("0101"));
        assert_eq!(c.set_bit(p("1111"), 4, false).unwrap(), p("0111"));
        assert!(c.set_bit(p("1111"), 9, false).is_err());
    }

    #[test]
    fn weights() {
        let c = Cube::new(4).unwrap();
        assert_eq!(c.weight(p("0000")), 0);
        assert_eq!(c.weight(p("1011")), 3);
        let s12 = DimSet::from_dims(4, &[1, 2]).unwrap();
        assert_eq!(c.restrict_weight(p("1011"), s12).unwrap(), 2);
        assert_eq!(c.restrict_weight(p("1011"), DimSet::EMPTY).unwrap(), 0);
        assert_eq!(c.restrict_weight(p("1011"), DimSet::full(4)).unwrap(), 3);
        assert!(c.restrict_weight(p("1011"), DimSet(1 << 6)).is_err());
    }

    #[test]
    fn complement_weight_identity_n10() {
        let c = Cube::new(10).unwrap();
        for x in c.points() {
            assert_eq!(x.weight() + c.complement(x).weight(), 10);
        }
    }

    #[test]
    fn dimset_dims_roundtrip() {
        let s = DimSet::from_dims(8, &[2, 5, 8]).unwrap();
        assert_eq!(s.dims(), vec![2, 5, 8]);
        assert_eq!(s.to_string(), "{2,5,8}");
        assert_eq!(s.complement(8).len(), 5);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn flip_is_involutive(x in 0u64..(1 << 16), i in 1u32..=16) {
            let c = Cube::new(16).unwrap();
            let x = Point(x);
            prop_assert_eq!(c.flip(c.flip(x, i).unwrap(), i).unwrap(), x);
            let xi = x.bit(i - 1);
            prop_assert_eq!(c.set_bit(x, i, xi).unwrap(), x);
            let once = c.set_bit(x, i, !xi).unwrap();
            prop_assert_eq!(c.set_bit(once, i, !xi).unwrap(), once);
        }
    }
}
