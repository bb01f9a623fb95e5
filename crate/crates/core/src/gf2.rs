//! GF(2) vectors and subgroup arithmetic: XOR addition, dot products, span
//! membership, rank, and orthogonal complements via Gaussian elimination.
//!
//! Everything here is immutable after construction and cheap to copy; widths
//! are capped at [`MAX_WIDTH`] so exhaustive enumeration stays feasible.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Maximum supported bit width.
pub const MAX_WIDTH: u32 = 24;

/// Largest rank [`Gf2Basis::enumerate_span`] is willing to expand.
pub const MAX_SPAN_RANK: usize = 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Gf2Error {
    #[error("span of rank {rank} exceeds the enumeration guard of 2^{max}")]
    SpanTooLarge { rank: usize, max: usize },
    #[error("vectors are linearly dependent: rank {rank} < count {count}")]
    DependentVectors { rank: usize, count: usize },
    #[error("cannot parse bit vector {0:?}")]
    Parse(String),
}

/// Fixed-width binary string over GF(2).
///
/// Coordinate 1 is the leftmost character of the display form and the most
/// significant bit of the stored value, so the numeric value of a vector
/// equals its bitstring read as a binary number.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BitVector {
    width: u32,
    bits: u32,
}

impl BitVector {
    /// A vector of `width` bits with value `bits`.
    ///
    /// Panics if `width` is outside `1..=MAX_WIDTH` or `bits` has bits set
    /// above position `width - 1`.
    pub fn new(width: u32, bits: u32) -> Self {
        assert!(
            (1..=MAX_WIDTH).contains(&width),
            "width {width} outside 1..={MAX_WIDTH}"
        );
        assert!(
            bits < (1u32 << width),
            "value {bits:#b} does not fit in {width} bits"
        );
        Self { width, bits }
    }

    /// The all-zero vector of the given width.
    pub fn zero(width: u32) -> Self {
        Self::new(width, 0)
    }

    pub fn width(self) -> u32 {
        self.width
    }

    pub fn bits(self) -> u32 {
        self.bits
    }

    pub fn is_zero(self) -> bool {
        self.bits == 0
    }

    /// Coordinatewise sum mod 2. Panics on width mismatch.
    pub fn xor(self, rhs: Self) -> Self {
        assert_eq!(self.width, rhs.width, "xor of mismatched widths");
        Self {
            width: self.width,
            bits: self.bits ^ rhs.bits,
        }
    }

    /// Parity of the coordinatewise AND. Panics on width mismatch.
    pub fn dot(self, rhs: Self) -> bool {
        assert_eq!(self.width, rhs.width, "dot of mismatched widths");
        (self.bits & rhs.bits).count_ones() % 2 == 1
    }

    /// Concatenation `self · rhs`, with `self` in the leftmost coordinates.
    pub fn concat(self, rhs: Self) -> Self {
        Self::new(self.width + rhs.width, (self.bits << rhs.width) | rhs.bits)
    }

    /// The leftmost `width` coordinates.
    pub fn left(self, width: u32) -> Self {
        assert!(width <= self.width);
        Self::new(width, self.bits >> (self.width - width))
    }

    /// The rightmost `width` coordinates.
    pub fn right(self, width: u32) -> Self {
        assert!(width <= self.width);
        Self::new(width, self.bits & ((1u32 << width) - 1))
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:0width$b}", self.bits, width = self.width as usize)
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({self})")
    }
}

impl FromStr for BitVector {
    type Err = Gf2Error;

    fn from_str(s: &str) -> Result<Self, Gf2Error> {
        let width = s.len() as u32;
        if !(1..=MAX_WIDTH).contains(&width) {
            return Err(Gf2Error::Parse(s.to_string()));
        }
        let mut bits = 0u32;
        for c in s.chars() {
            bits = (bits << 1)
                | match c {
                    '0' => 0,
                    '1' => 1,
                    _ => return Err(Gf2Error::Parse(s.to_string())),
                };
        }
        Ok(Self { width, bits })
    }
}

impl Serialize for BitVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(de::Error::custom)
    }
}

/// GF(2) rank of an arbitrary list of equal-width vectors.
pub fn rank(vectors: &[BitVector]) -> usize {
    match vectors.first() {
        Some(first) => rref_rows(first.width(), vectors.iter().copied()).len(),
        None => 0,
    }
}

/// Reduce `x` against rows in reduced row echelon form.
pub fn reduce(x: BitVector, rows: &[BitVector]) -> BitVector {
    let mut bits = x.bits();
    for row in rows {
        debug_assert_eq!(row.width(), x.width());
        let pivot = 31 - row.bits().leading_zeros();
        if bits >> pivot & 1 == 1 {
            bits ^= row.bits();
        }
    }
    BitVector::new(x.width(), bits)
}

/// Row-reduced echelon form with pivots in coordinate order (coordinate 1
/// first). Ties cannot occur over GF(2), so the result is deterministic.
fn rref_rows(width: u32, vectors: impl IntoIterator<Item = BitVector>) -> Vec<BitVector> {
    let mut rows: Vec<u32> = Vec::new();
    for v in vectors {
        assert_eq!(v.width(), width, "rref over mismatched widths");
        let mut bits = v.bits();
        for &row in &rows {
            let pivot = 31 - row.leading_zeros();
            if bits >> pivot & 1 == 1 {
                bits ^= row;
            }
        }
        if bits == 0 {
            continue;
        }
        let pivot = 31 - bits.leading_zeros();
        for row in rows.iter_mut() {
            if *row >> pivot & 1 == 1 {
                *row ^= bits;
            }
        }
        rows.push(bits);
    }
    // Highest pivot bit first = lowest coordinate index first.
    rows.sort_unstable_by(|a, b| b.cmp(a));
    rows.into_iter().map(|b| BitVector::new(width, b)).collect()
}

/// Ordered, linearly independent set of equal-width vectors.
///
/// Vectors are kept in insertion order; use [`Gf2Basis::rref`] for the
/// canonical reduced form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gf2Basis {
    ambient_width: u32,
    vectors: Vec<BitVector>,
}

impl Gf2Basis {
    pub fn empty(ambient_width: u32) -> Self {
        assert!((1..=MAX_WIDTH).contains(&ambient_width));
        Self {
            ambient_width,
            vectors: Vec::new(),
        }
    }

    /// Build a basis from the given vectors, rejecting dependent input.
    pub fn from_vectors(ambient_width: u32, vectors: Vec<BitVector>) -> Result<Self, Gf2Error> {
        for v in &vectors {
            assert_eq!(v.width(), ambient_width, "basis vector width mismatch");
        }
        let r = rank(&vectors);
        if r != vectors.len() {
            return Err(Gf2Error::DependentVectors {
                rank: r,
                count: vectors.len(),
            });
        }
        Ok(Self {
            ambient_width,
            vectors,
        })
    }

    pub fn ambient_width(&self) -> u32 {
        self.ambient_width
    }

    pub fn rank(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[BitVector] {
        &self.vectors
    }

    /// Canonical reduced row echelon form of the spanned subgroup.
    pub fn rref(&self) -> Vec<BitVector> {
        rref_rows(self.ambient_width, self.vectors.iter().copied())
    }

    /// Whether `z` is a GF(2) combination of the basis vectors.
    pub fn in_span(&self, z: BitVector) -> bool {
        assert_eq!(z.width(), self.ambient_width, "in_span width mismatch");
        reduce(z, &self.rref()).is_zero()
    }

    /// Append `z` if it is independent of the current span. Returns whether
    /// the basis changed.
    pub fn extend_if_independent(&mut self, z: BitVector) -> bool {
        if self.in_span(z) {
            false
        } else {
            self.vectors.push(z);
            true
        }
    }

    /// All `2^rank` spanned vectors.
    pub fn enumerate_span(&self) -> Result<BTreeSet<BitVector>, Gf2Error> {
        if self.rank() > MAX_SPAN_RANK {
            return Err(Gf2Error::SpanTooLarge {
                rank: self.rank(),
                max: MAX_SPAN_RANK,
            });
        }
        let mut span = BTreeSet::new();
        for mask in 0u32..1 << self.rank() {
            let mut acc = BitVector::zero(self.ambient_width);
            for (i, v) in self.vectors.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    acc = acc.xor(*v);
                }
            }
            span.insert(acc);
        }
        Ok(span)
    }

    /// Basis of the orthogonal complement, i.e. the solution set of the
    /// XOR-equation system `v · g = 0` for every basis vector `v`.
    ///
    /// The result is the RREF nullspace basis ordered by free coordinate, so
    /// repeated calls produce identical output.
    pub fn perp(&self) -> Gf2Basis {
        let w = self.ambient_width;
        let rows = self.rref();
        let pivot_mask: u32 = rows
            .iter()
            .map(|r| 1u32 << (31 - r.bits().leading_zeros()))
            .fold(0, |acc, b| acc | b);
        let mut out = Vec::new();
        // Coordinate order: coordinate 1 (most significant bit) first.
        for coord in 0..w {
            let bit = 1u32 << (w - 1 - coord);
            if pivot_mask & bit != 0 {
                continue;
            }
            let mut v = bit;
            for row in &rows {
                if row.bits() & bit != 0 {
                    let pivot = 1u32 << (31 - row.bits().leading_zeros());
                    v |= pivot;
                }
            }
            out.push(BitVector::new(w, v));
        }
        Gf2Basis {
            ambient_width: w,
            vectors: out,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bv(s: &str) -> BitVector {
        s.parse().unwrap()
    }

    fn basis(width: u32, vs: &[&str]) -> Gf2Basis {
        Gf2Basis::from_vectors(width, vs.iter().map(|s| bv(s)).collect()).unwrap()
    }

    #[test]
    fn xor_examples() {
        assert_eq!(bv("110").xor(bv("101")), bv("011"));
        let x = bv("0101");
        assert_eq!(x.xor(x), BitVector::zero(4));
        assert_eq!(x.xor(BitVector::zero(4)), x);
    }

    #[test]
    #[should_panic(expected = "mismatched widths")]
    fn xor_width_mismatch_panics() {
        let _ = bv("110").xor(bv("10"));
    }

    #[test]
    fn dot_examples() {
        assert!(bv("110").dot(bv("101")));
        assert!(!bv("1011").dot(BitVector::zero(4)));
        assert!(!bv("111").dot(bv("110")));
    }

    #[test]
    fn in_span_examples() {
        let b = basis(3, &["110", "101"]);
        assert!(b.in_span(bv("011")));
        assert!(b.in_span(BitVector::zero(3)));
        // 100 is none of the four combinations {000, 110, 101, 011}.
        assert!(!b.in_span(bv("100")));
    }

    #[test]
    fn extend_examples() {
        let mut b = Gf2Basis::empty(3);
        assert!(b.extend_if_independent(bv("101")));
        assert_eq!(b.vectors(), &[bv("101")]);
        assert!(!b.extend_if_independent(bv("101")));

        let mut b = basis(3, &["110", "101"]);
        assert!(!b.extend_if_independent(bv("011")));
        assert_eq!(b.rank(), 2);
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank(&[]), 0);
        assert_eq!(rank(&[bv("110"), bv("101"), bv("011")]), 2);
        assert_eq!(rank(&[bv("100"), bv("010"), bv("001")]), 3);
    }

    #[test]
    fn perp_examples() {
        let full = Gf2Basis::empty(3).perp();
        assert_eq!(full.rank(), 3);
        assert_eq!(
            full.enumerate_span().unwrap().len(),
            8,
            "perp of the trivial subgroup is everything"
        );

        let none = basis(3, &["100", "010", "001"]).perp();
        assert_eq!(none.rank(), 0);

        // Of the four vectors of width 2, exactly {00, 11} annihilate 11.
        let b = basis(2, &["11"]).perp();
        assert_eq!(b.vectors(), &[bv("11")]);
    }

    #[test]
    fn perp_rank_is_complementary() {
        let b = basis(4, &["1100", "0110"]);
        assert_eq!(b.perp().rank(), 2);
    }

    #[test]
    fn enumerate_examples() {
        let empty = Gf2Basis::empty(2);
        let span = empty.enumerate_span().unwrap();
        assert_eq!(span.into_iter().collect::<Vec<_>>(), vec![bv("00")]);

        let b = basis(2, &["10", "01"]);
        assert_eq!(b.enumerate_span().unwrap().len(), 4);

        let b = basis(3, &["110", "011"]);
        let expected: BTreeSet<_> = ["000", "110", "011", "101"].iter().map(|s| bv(s)).collect();
        assert_eq!(b.enumerate_span().unwrap(), expected);
    }

    #[test]
    fn enumerate_guard() {
        let vectors: Vec<_> = (0..21).map(|i| BitVector::new(24, 1 << i)).collect();
        let b = Gf2Basis::from_vectors(24, vectors).unwrap();
        assert!(matches!(
            b.enumerate_span(),
            Err(Gf2Error::SpanTooLarge { rank: 21, .. })
        ));
    }

    #[test]
    fn dependent_vectors_rejected() {
        let err = Gf2Basis::from_vectors(3, vec![bv("110"), bv("101"), bv("011")]);
        assert!(matches!(
            err,
            Err(Gf2Error::DependentVectors { rank: 2, count: 3 })
        ));
    }

    #[test]
    fn display_roundtrip() {
        for s in ["0", "1", "0101", "111000111"] {
            assert_eq!(bv(s).to_string(), s);
        }
        assert!("012".parse::<BitVector>().is_err());
        assert!("".parse::<BitVector>().is_err());
    }

    #[test]
    fn rref_is_deterministic_and_reduced() {
        let b = basis(4, &["1110", "0111"]);
        let rows = b.rref();
        assert_eq!(rows, vec![bv("1001"), bv("0111")]);
        // Feeding the same span in another order yields identical rows.
        let b2 = basis(4, &["0111", "1001"]);
        assert_eq!(b2.rref(), rows);
    }
}
