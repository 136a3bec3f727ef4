//! Arithmetic of the Klein four-group acting on a single circle coordinate.
//!
//! An entry records how one holonomy element acts on one lattice coordinate
//! `t ↦ ±t + {0, ½}`. The code packs this into two bits: the high bit is the
//! sign (set for `−t`) and the low bit is the half translation. With this
//! layout the group law is plain XOR, because `−½ ≡ ½ (mod 1)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One of the four circle automorphisms `g0..g3`, stored as its 2-bit code.
#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(try_from = "u8", into = "u8")]
pub struct DEntry(u8);

impl DEntry {
    /// `t ↦ t`
    pub const G0: DEntry = DEntry(0);
    /// `t ↦ t + ½`
    pub const G1: DEntry = DEntry(1);
    /// `t ↦ −t`
    pub const G2: DEntry = DEntry(2);
    /// `t ↦ −t + ½`
    pub const G3: DEntry = DEntry(3);

    pub const ALL: [DEntry; 4] = [Self::G0, Self::G1, Self::G2, Self::G3];

    pub fn new(code: u8) -> Result<Self> {
        if code < 4 {
            Ok(DEntry(code))
        } else {
            Err(Error::InvalidEntry(code))
        }
    }

    pub const fn from_parts(reflects: bool, half: bool) -> Self {
        DEntry(((reflects as u8) << 1) | half as u8)
    }

    pub const fn code(self) -> u8 {
        self.0
    }

    /// True for codes 2 and 3 (the coordinate is negated).
    pub const fn reflects(self) -> bool {
        self.0 & 2 != 0
    }

    /// True for codes 1 and 3 (translation by ½).
    pub const fn has_half(self) -> bool {
        self.0 & 1 != 0
    }

    /// `+1` or `−1`.
    pub const fn sign(self) -> i8 {
        if self.reflects() {
            -1
        } else {
            1
        }
    }

    pub const fn star(self, other: DEntry) -> DEntry {
        DEntry(self.0 ^ other.0)
    }

    pub const fn sign_class(self) -> SignClass {
        if self.reflects() {
            SignClass::Q
        } else {
            SignClass::P
        }
    }
}

impl TryFrom<u8> for DEntry {
    type Error = Error;

    fn try_from(code: u8) -> Result<Self> {
        DEntry::new(code)
    }
}

impl From<DEntry> for u8 {
    fn from(e: DEntry) -> u8 {
        e.0
    }
}

impl fmt::Display for DEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The product `g_a g_b` in the Klein four-group.
pub const fn star(a: DEntry, b: DEntry) -> DEntry {
    a.star(b)
}

/// Whether an entry acts trivially (`p`, codes 0 and 1) or by negation (`q`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SignClass {
    #[serde(rename = "p")]
    P,
    #[serde(rename = "q")]
    Q,
}

impl SignClass {
    /// Pointwise product of characters: `p` is the identity.
    pub const fn mul(self, other: SignClass) -> SignClass {
        match (self, other) {
            (SignClass::P, x) | (x, SignClass::P) => x,
            (SignClass::Q, SignClass::Q) => SignClass::P,
        }
    }
}

impl fmt::Display for SignClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SignClass::P => "p",
            SignClass::Q => "q",
        })
    }
}

pub(crate) const ENTRIES_PER_WORD: usize = 32;
const LOW_BITS: u64 = 0x5555_5555_5555_5555;

/// A row of entries, packed two bits per entry (entry `j` at bits `2j..2j+2`
/// of word `j / 32`). Unused high bits are always zero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Row {
    len: usize,
    words: Vec<u64>,
}

impl Row {
    pub fn zeros(len: usize) -> Self {
        Row {
            len,
            words: vec![0; len.div_ceil(ENTRIES_PER_WORD)],
        }
    }

    pub fn from_entries(entries: &[DEntry]) -> Self {
        let mut row = Row::zeros(entries.len());
        for (j, &e) in entries.iter().enumerate() {
            row.set(j, e);
        }
        row
    }

    pub fn from_codes(codes: &[u8]) -> Result<Self> {
        let entries = codes
            .iter()
            .map(|&c| DEntry::new(c))
            .collect::<Result<Vec<_>>>()?;
        Ok(Row::from_entries(&entries))
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, j: usize) -> DEntry {
        assert!(
            j < self.len,
            "column {j} out of range for row of length {}",
            self.len
        );
        let w = self.words[j / ENTRIES_PER_WORD];
        DEntry(((w >> (2 * (j % ENTRIES_PER_WORD))) & 3) as u8)
    }

    pub fn set(&mut self, j: usize, e: DEntry) {
        assert!(
            j < self.len,
            "column {j} out of range for row of length {}",
            self.len
        );
        let shift = 2 * (j % ENTRIES_PER_WORD);
        let w = &mut self.words[j / ENTRIES_PER_WORD];
        *w = (*w & !(3 << shift)) | ((e.0 as u64) << shift);
    }

    pub fn entries(&self) -> impl Iterator<Item = DEntry> + '_ {
        (0..self.len).map(move |j| self.get(j))
    }

    pub fn codes(&self) -> Vec<u8> {
        self.entries().map(DEntry::code).collect()
    }

    /// Entrywise `⋆`.
    pub fn star(&self, other: &Row) -> Result<Row> {
        if self.len != other.len {
            return Err(Error::LengthMismatch {
                left: self.len,
                right: other.len,
            });
        }
        Ok(self.star_unchecked(other))
    }

    pub(crate) fn star_unchecked(&self, other: &Row) -> Row {
        debug_assert_eq!(self.len, other.len);
        Row {
            len: self.len,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a ^ b)
                .collect(),
        }
    }

    pub(crate) fn star_assign(&mut self, other: &Row) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    /// Per word, the low bit of each 2-bit lane is set where the entry is 1.
    fn one_lanes(&self) -> impl Iterator<Item = u64> + '_ {
        self.words.iter().map(|&w| w & !(w >> 1) & LOW_BITS)
    }

    /// Per word, the low bit of each lane is set where the entry is 2 or 3.
    fn reflect_lanes(&self) -> impl Iterator<Item = u64> + '_ {
        self.words.iter().map(|&w| (w >> 1) & LOW_BITS)
    }

    pub fn has_one(&self) -> bool {
        self.one_lanes().any(|w| w != 0)
    }

    pub fn count_ones(&self) -> usize {
        self.one_lanes().map(|w| w.count_ones() as usize).sum()
    }

    /// Columns holding an entry equal to 1, ascending.
    pub fn one_positions(&self) -> Vec<usize> {
        lanes_to_positions(self.one_lanes())
    }

    /// True if some entry is 2 or 3.
    pub fn has_reflection(&self) -> bool {
        self.reflect_lanes().any(|w| w != 0)
    }

    /// True if every entry lies in `{0, 1}`.
    pub fn acts_trivially(&self) -> bool {
        !self.has_reflection()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn phi(&self) -> Vec<SignClass> {
        self.entries().map(DEntry::sign_class).collect()
    }

    pub fn without_column(&self, j: usize) -> Row {
        let kept: Vec<DEntry> = self
            .entries()
            .enumerate()
            .filter_map(|(i, e)| (i != j).then_some(e))
            .collect();
        Row::from_entries(&kept)
    }

    pub fn select(&self, columns: &[usize]) -> Row {
        let picked: Vec<DEntry> = columns.iter().map(|&j| self.get(j)).collect();
        Row::from_entries(&picked)
    }
}

fn lanes_to_positions(lanes: impl Iterator<Item = u64>) -> Vec<usize> {
    let mut out = Vec::new();
    for (wi, mut w) in lanes.enumerate() {
        while w != 0 {
            let bit = w.trailing_zeros() as usize;
            out.push(wi * ENTRIES_PER_WORD + bit / 2);
            w &= w - 1;
        }
    }
    out
}

/// Entrywise `⋆` of two rows; fails on a length mismatch.
pub fn star_rows(r1: &Row, r2: &Row) -> Result<Row> {
    r1.star(r2)
}

pub fn phi(row: &Row) -> Vec<SignClass> {
    row.phi()
}

impl fmt::Debug for Row {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Row({self})")
    }
}

impl fmt::Display for Row {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (j, e) in self.entries().enumerate() {
            if j > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn row(codes: &[u8]) -> Row {
        Row::from_codes(codes).unwrap()
    }

    #[test]
    fn star_examples() {
        assert_eq!(star(DEntry::G1, DEntry::G2), DEntry::G3);
        for x in DEntry::ALL {
            assert_eq!(star(DEntry::G0, x), x);
        }
        assert_eq!(star(DEntry::G2, DEntry::G3), DEntry::G1);
    }

    #[test]
    fn star_table_is_klein_four() {
        for a in DEntry::ALL {
            assert_eq!(a.star(a), DEntry::G0);
            for b in DEntry::ALL {
                assert_eq!(a.star(b), b.star(a));
                assert_eq!(a.star(b).sign(), a.sign() * b.sign());
                assert_eq!(a.star(b).has_half(), a.has_half() ^ b.has_half());
                for c in DEntry::ALL {
                    assert_eq!(a.star(b).star(c), a.star(b.star(c)));
                }
            }
        }
    }

    #[test]
    fn invalid_code_rejected() {
        assert!(matches!(DEntry::new(4), Err(Error::InvalidEntry(4))));
    }

    #[test]
    fn star_rows_examples() {
        assert_eq!(
            star_rows(&row(&[2, 2, 1, 3]), &row(&[1, 0, 2, 2])).unwrap(),
            row(&[3, 2, 3, 1])
        );
        let r = row(&[3, 1, 2, 0, 1]);
        assert_eq!(star_rows(&r, &Row::zeros(5)).unwrap(), r);
        assert_eq!(
            star_rows(&row(&[1, 2, 2]), &row(&[2, 1, 3])).unwrap(),
            row(&[3, 3, 1])
        );
    }

    #[test]
    fn star_rows_length_mismatch() {
        let err = star_rows(&row(&[1, 2]), &row(&[1, 2, 3])).unwrap_err();
        assert!(matches!(err, Error::LengthMismatch { left: 2, right: 3 }));
    }

    #[test]
    fn phi_examples() {
        use SignClass::{P, Q};
        assert_eq!(phi(&row(&[0, 3, 2, 1, 2])), vec![P, Q, Q, P, Q]);
        assert_eq!(phi(&Row::zeros(4)), vec![P; 4]);
        assert_eq!(phi(&row(&[3, 2, 3, 1])), vec![Q, Q, Q, P]);
    }

    #[test]
    fn wide_rows_span_words() {
        let codes: Vec<u8> = (0..70).map(|j| (j * 7 % 4) as u8).collect();
        let r = row(&codes);
        assert_eq!(r.codes(), codes);
        let expected_ones: Vec<usize> = (0..70).filter(|&j| codes[j] == 1).collect();
        assert_eq!(r.one_positions(), expected_ones);
        assert_eq!(r.count_ones(), expected_ones.len());
        assert_eq!(r.without_column(33).len(), 69);
        assert_eq!(
            r.without_column(33).get(33),
            DEntry::new(codes[34]).unwrap()
        );
    }

    fn arb_row(n: usize) -> impl Strategy<Value = Vec<u8>> {
        proptest::collection::vec(0u8..4, n)
    }

    proptest! {
        #[test]
        fn phi_of_star_is_product_of_phis(
            (a, b) in (1usize..80).prop_flat_map(|n| (arb_row(n), arb_row(n)))
        ) {
            let (ra, rb) = (row(&a), row(&b));
            let lhs = phi(&ra.star(&rb).unwrap());
            let rhs: Vec<SignClass> = phi(&ra).into_iter().zip(phi(&rb)).map(|(x, y)| x.mul(y)).collect();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn packed_predicates_match_entrywise(codes in (1usize..80).prop_flat_map(arb_row)) {
            let r = row(&codes);
            prop_assert_eq!(r.has_one(), codes.contains(&1));
            prop_assert_eq!(r.acts_trivially(), codes.iter().all(|&c| c < 2));
            prop_assert_eq!(r.count_ones(), codes.iter().filter(|&&c| c == 1).count());
            prop_assert_eq!(r.is_zero(), codes.iter().all(|&c| c == 0));
        }
    }
}
