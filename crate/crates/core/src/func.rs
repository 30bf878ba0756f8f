//! Boolean functions over the hypercube with an optional erased value.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use crate::cube::{Cube, Point, MAX_DIM};
use crate::error::{Error, Result};

/// Largest dimension with a dense value table.
pub const MAX_TABLE_DIM: u32 = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Value {
    Zero = 0,
    One = 1,
    /// An erased value, written `?` in truth-table files.
    Erased = 2,
}

impl Value {
    #[inline]
    pub fn from_bool(b: bool) -> Value {
        if b {
            Value::One
        } else {
            Value::Zero
        }
    }

    /// `Some(bit)` for a defined value, `None` when erased.
    #[inline]
    pub fn bit(self) -> Option<bool> {
        match self {
            Value::Zero => Some(false),
            Value::One => Some(true),
            Value::Erased => None,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Value::Zero => '0',
            Value::One => '1',
            Value::Erased => '?',
        }
    }
}

type Rule = dyn Fn(Point) -> Value + Send + Sync;

#[derive(Clone)]
enum Backing {
    Table(Arc<[Value]>),
    Rule(Arc<Rule>),
}

/// An immutable function `{0,1}^n -> {0, 1, ⊥}`.
///
/// Cloning is cheap; the backing is shared.
#[derive(Clone)]
pub struct Func {
    n: u32,
    backing: Backing,
    label: String,
    total: bool,
}

impl fmt::Debug for Func {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.backing {
            Backing::Table(_) => "table",
            Backing::Rule(_) => "rule",
        };
        f.debug_struct("Func")
            .field("n", &self.n)
            .field("label", &self.label)
            .field("backing", &kind)
            .finish()
    }
}

impl Func {
    pub fn from_table(n: u32, table: Vec<Value>) -> Result<Func> {
        if n == 0 || n > MAX_TABLE_DIM {
            return Err(Error::resource(
                format!("truth table for n={n}"),
                format!("1..={MAX_TABLE_DIM}"),
            ));
        }
        if table.len() as u64 != 1u64 << n {
            return Err(Error::arg(format!(
                "table has {} entries, expected 2^{n}",
                table.len()
            )));
        }
        let total = !table.contains(&Value::Erased);
        Ok(Func {
            n,
            backing: Backing::Table(table.into()),
            label: String::from("table"),
            total,
        })
    }

    /// Total function from a bit table.
    pub fn from_bits(n: u32, bits: impl IntoIterator<Item = bool>) -> Result<Func> {
        Func::from_table(n, bits.into_iter().map(Value::from_bool).collect())
    }

    /// Total function given by a pure rule. The rule must never return
    /// [`Value::Erased`].
    pub fn from_rule<F>(n: u32, rule: F) -> Result<Func>
    where
        F: Fn(Point) -> bool + Send + Sync + 'static,
    {
        if n == 0 || n > MAX_DIM {
            return Err(Error::resource(format!("rule for n={n}"), format!("1..={MAX_DIM}")));
        }
        Ok(Func {
            n,
            backing: Backing::Rule(Arc::new(move |x| Value::from_bool(rule(x)))),
            label: String::from("rule"),
            total: true,
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Func {
        self.label = label.into();
        self
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn cube(&self) -> Cube {
        Cube::new(self.n).expect("dimension validated at construction")
    }

    pub fn size(&self) -> u64 {
        1u64 << self.n
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_total(&self) -> bool {
        self.total
    }

    pub fn has_table(&self) -> bool {
        matches!(self.backing, Backing::Table(_))
    }

    #[inline]
    pub fn eval(&self, x: Point) -> Value {
        debug_assert!(self.cube().contains(x));
        match &self.backing {
            Backing::Table(t) => t[x.0 as usize],
            Backing::Rule(r) => r(x),
        }
    }

    /// Evaluates a point of a total function.
    #[inline]
    pub fn bit(&self, x: Point) -> Result<bool> {
        self.eval(x)
            .bit()
            .ok_or_else(|| Error::Precondition(format!("erased value at point {}", x.0)))
    }

    pub fn require_total(&self) -> Result<()> {
        if self.total {
            Ok(())
        } else {
            Err(Error::Precondition(format!(
                "function '{}' contains erased values",
                self.label
            )))
        }
    }

    /// Dense copy of the values; fails above [`MAX_TABLE_DIM`].
    pub fn values(&self) -> Result<Vec<Value>> {
        if self.n > MAX_TABLE_DIM {
            return Err(Error::resource(
                format!("materializing n={}", self.n),
                MAX_TABLE_DIM,
            ));
        }
        Ok(match &self.backing {
            Backing::Table(t) => t.to_vec(),
            Backing::Rule(r) => (0..self.size()).map(|i| r(Point(i))).collect(),
        })
    }

    /// Table-backed copy; a no-op for table functions.
    pub fn materialize(&self) -> Result<Func> {
        if self.has_table() {
            return Ok(self.clone());
        }
        let mut f = Func::from_table(self.n, self.values()?)?;
        f.label = self.label.clone();
        Ok(f)
    }

    /// Values of a total function as bits, indexed by point.
    pub fn bit_table(&self) -> Result<Vec<bool>> {
        self.require_total()?;
        Ok(self
            .values()?
            .into_iter()
            .map(|v| v == Value::One)
            .collect())
    }

    /// Number of points where two functions of the same dimension differ.
    pub fn hamming_distance(&self, other: &Func) -> Result<u64> {
        if self.n != other.n {
            return Err(Error::arg("dimension mismatch"));
        }
        Ok(self
            .cube()
            .points()
            .filter(|&x| self.eval(x) != other.eval(x))
            .count() as u64)
    }

    pub fn erased_count(&self) -> u64 {
        if self.total {
            return 0;
        }
        self.cube()
            .points()
            .filter(|&x| self.eval(x) == Value::Erased)
            .count() as u64
    }

    /// `x -> f(x XOR mask)`.
    pub fn xor_shift(&self, mask: u64) -> Result<Func> {
        let values = self.values()?;
        let shifted = (0..self.size())
            .map(|i| values[(i ^ mask) as usize])
            .collect();
        Func::from_table(self.n, shifted)
    }

    /// Writes the truth-table format: `n=<n>` then `2^n` symbols.
    pub fn write_table<W: Write>(&self, mut out: W) -> Result<()> {
        let values = self.values()?;
        writeln!(out, "n={}", self.n)?;
        let line: String = values.iter().map(|v| v.symbol()).collect();
        writeln!(out, "{line}")?;
        Ok(())
    }

    pub fn to_table_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_table(&mut buf)?;
        Ok(String::from_utf8(buf).expect("ascii"))
    }

    pub fn parse_table(text: &str) -> Result<Func> {
        let header_end = text.find('\n').ok_or_else(|| Error::Parse {
            line: 1,
            offset: text.len(),
            message: "missing newline after header".into(),
        })?;
        let header = &text[..header_end];
        let n_str = header.strip_prefix("n=").ok_or_else(|| Error::Parse {
            line: 1,
            offset: 0,
            message: format!("expected 'n=<int>', found {header:?}"),
        })?;
        let n: u32 = n_str.parse().map_err(|_| Error::Parse {
            line: 1,
            offset: 2,
            message: format!("invalid dimension {n_str:?}"),
        })?;
        if n == 0 || n > MAX_TABLE_DIM {
            return Err(Error::resource(
                format!("truth table for n={n}"),
                format!("1..={MAX_TABLE_DIM}"),
            ));
        }
        let mut body = &text[header_end + 1..];
        if let Some(stripped) = body.strip_suffix('\n') {
            body = stripped;
        }
        let expected = 1usize << n;
        let mut table = Vec::with_capacity(expected);
        for (offset, ch) in body.bytes().enumerate() {
            let v = match ch {
                b'0' => Value::Zero,
                b'1' => Value::One,
                b'?' => Value::Erased,
                _ => {
                    return Err(Error::Parse {
                        line: 2,
                        offset,
                        message: format!("unexpected byte {:?}", ch as char),
                    })
                }
            };
            if table.len() == expected {
                return Err(Error::Parse {
                    line: 2,
                    offset,
                    message: format!("more than 2^{n} = {expected} values"),
                });
            }
            table.push(v);
        }
        if table.len() != expected {
            return Err(Error::Parse {
                line: 2,
                offset: table.len(),
                message: format!("found {} values, expected 2^{n} = {expected}", table.len()),
            });
        }
        Func::from_table(n, table)
    }

    pub fn read_table<R: Read>(mut input: R) -> Result<Func> {
        let mut text = String::new();
        input.read_to_string(&mut text)?;
        Func::parse_table(&text)
    }

    pub fn load(path: &Path) -> Result<Func> {
        let f = Func::read_table(std::fs::File::open(path)?)?;
        Ok(f.with_label(path.display().to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_write_round_trip() {
        let text = "n=2\n01?1\n";
        let f = Func::parse_table(text).unwrap();
        assert_eq!(f.n(), 2);
        assert!(!f.is_total());
        assert_eq!(f.eval(Point(2)), Value::Erased);
        assert_eq!(f.eval(Point(1)), Value::One);
        assert_eq!(f.to_table_string().unwrap(), text);
        // trailing newline optional
        let g = Func::parse_table("n=2\n0101").unwrap();
        assert!(g.is_total());
    }

    #[test]
    fn table_lookup_matches_index() {
        let f = Func::parse_table("n=3\n00000100\n").unwrap();
        assert_eq!(f.eval(Point(5)), Value::One);
        assert_eq!(f.eval(Point(4)), Value::Zero);
    }

    #[test]
    fn parse_errors_report_position() {
        match Func::parse_table("n=2\n01x1\n") {
            Err(Error::Parse { line, offset, .. }) => assert_eq!((line, offset), (2, 2)),
            other => panic!("unexpected {other:?}"),
        }
        match Func::parse_table("n=2\n011\n") {
            Err(Error::Parse { line: 2, offset: 3, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        match Func::parse_table("m=2\n0111\n") {
            Err(Error::Parse { line: 1, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            Func::parse_table("n=2\n01110\n"),
            Err(Error::Parse { line: 2, offset: 4, .. })
        ));
        assert!(matches!(
            Func::parse_table("n=30\n0\n"),
            Err(Error::Resource { .. })
        ));
    }

    #[test]
    fn rule_and_table_agree() {
        let rule = Func::from_rule(5, |x| x.weight() >= 3).unwrap();
        let table = rule.materialize().unwrap();
        for x in rule.cube().points() {
            assert_eq!(rule.eval(x), table.eval(x));
            assert_eq!(rule.eval(x), rule.eval(x));
        }
        assert_eq!(rule.hamming_distance(&table).unwrap(), 0);
    }

    #[test]
    fn erased_bit_is_precondition_error() {
        let f = Func::parse_table("n=1\n?1\n").unwrap();
        assert!(matches!(f.bit(Point(0)), Err(Error::Precondition(_))));
        assert_eq!(f.erased_count(), 1);
    }
}
