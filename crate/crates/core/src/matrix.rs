//! Characteristic matrices: generator matrices, their `⋆`-closures and the
//! validity predicates that decide whether they define a Bieberbach group of
//! diagonal type.
//!
//! Holonomy elements are bitvectors in `F₂ᵏ` stored as `u32`; bit `i` stands
//! for generator `i + 1`. The closure keeps its rows in index order and
//! exposes the graded display order separately.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::klein::{DEntry, Row, SignClass};

/// Largest generator count accepted; the closure has `2ᵏ − 1` rows.
pub const MAX_GENERATORS: usize = 16;

/// A nonzero element of the holonomy group `C₂ᵏ`, as a bitvector.
pub type Element = u32;

/// `k × n` generator matrix: row `i` describes generator `i + 1`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GenMatrix {
    n: usize,
    rows: Vec<Row>,
}

impl GenMatrix {
    pub fn new(rows: Vec<Row>) -> Result<Self> {
        let k = rows.len();
        let n = rows.first().map_or(0, Row::len);
        if k == 0 || n == 0 {
            return Err(Error::Degenerate { k, n });
        }
        if k > MAX_GENERATORS {
            return Err(Error::TooManyGenerators {
                k,
                max: MAX_GENERATORS,
            });
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::LengthMismatch {
                left: n,
                right: bad.len(),
            });
        }
        Ok(GenMatrix { n, rows })
    }

    pub fn from_codes<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self> {
        let rows = rows
            .iter()
            .map(|r| Row::from_codes(r.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        GenMatrix::new(rows)
    }

    /// Builds a matrix from columns given top to bottom.
    pub fn from_columns<C: AsRef<[DEntry]>>(k: usize, columns: &[C]) -> Result<Self> {
        let n = columns.len();
        if k == 0 || n == 0 {
            return Err(Error::Degenerate { k, n });
        }
        let mut rows = vec![Row::zeros(n); k];
        for (j, col) in columns.iter().enumerate() {
            let col = col.as_ref();
            if col.len() != k {
                return Err(Error::LengthMismatch {
                    left: k,
                    right: col.len(),
                });
            }
            for (i, &e) in col.iter().enumerate() {
                rows[i].set(j, e);
            }
        }
        GenMatrix::new(rows)
    }

    pub fn k(&self) -> usize {
        self.rows.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &Row {
        &self.rows[i]
    }

    pub fn entry(&self, i: usize, j: usize) -> DEntry {
        self.rows[i].get(j)
    }

    pub fn codes(&self) -> Vec<Vec<u8>> {
        self.rows.iter().map(Row::codes).collect()
    }

    pub fn column(&self, j: usize) -> Vec<DEntry> {
        self.rows.iter().map(|r| r.get(j)).collect()
    }

    /// Base-4 code of column `j`, first row most significant.
    pub fn column_code(&self, j: usize) -> u64 {
        self.rows
            .iter()
            .fold(0u64, |acc, r| (acc << 2) | r.get(j).code() as u64)
    }

    pub fn without_column(&self, j: usize) -> Result<GenMatrix> {
        if j >= self.n {
            return Err(Error::Precondition(format!(
                "column {} out of range 1..={}",
                j + 1,
                self.n
            )));
        }
        GenMatrix::new(self.rows.iter().map(|r| r.without_column(j)).collect())
    }

    pub fn select_columns(&self, columns: &[usize]) -> Result<GenMatrix> {
        GenMatrix::new(self.rows.iter().map(|r| r.select(columns)).collect())
    }

    pub fn append_column(&self, column: &[DEntry]) -> Result<GenMatrix> {
        if column.len() != self.k() {
            return Err(Error::LengthMismatch {
                left: self.k(),
                right: column.len(),
            });
        }
        let rows = self
            .rows
            .iter()
            .zip(column)
            .map(|(r, &e)| {
                let mut entries: Vec<DEntry> = r.entries().collect();
                entries.push(e);
                Row::from_entries(&entries)
            })
            .collect();
        GenMatrix::new(rows)
    }

    pub fn closure(&self) -> ClosureMatrix {
        closure(self)
    }
}

impl fmt::Display for GenMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, r) in self.rows.iter().enumerate() {
            if i > 0 {
                f.write_str("\n")?;
            }
            write!(f, "{r}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for GenMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self.rows.iter().map(|r| format!("[{r}]")).collect();
        write!(f, "GenMatrix[{}]", rows.join(", "))
    }
}

impl Serialize for GenMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.codes().serialize(s)
    }
}

impl<'de> Deserialize<'de> for GenMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let codes = Vec::<Vec<u8>>::deserialize(d)?;
        GenMatrix::from_codes(&codes).map_err(serde::de::Error::custom)
    }
}

/// The `(2ᵏ − 1) × n` matrix of all nonzero `⋆`-combinations of generator rows.
#[derive(Clone, PartialEq, Eq)]
pub struct ClosureMatrix {
    k: usize,
    n: usize,
    // rows[v - 1] is the row of element v
    rows: Vec<Row>,
}

pub fn closure(a: &GenMatrix) -> ClosureMatrix {
    let k = a.k();
    let size = 1usize << k;
    let mut rows: Vec<Row> = Vec::with_capacity(size - 1);
    for v in 1..size {
        let low = v.trailing_zeros() as usize;
        let rest = v & (v - 1);
        let row = if rest == 0 {
            a.row(low).clone()
        } else {
            let mut r = rows[rest - 1].clone();
            r.star_assign(a.row(low));
            r
        };
        rows.push(row);
    }
    ClosureMatrix { k, n: a.n(), rows }
}

impl ClosureMatrix {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, v: Element) -> &Row {
        assert!(v != 0, "the identity has no closure row");
        &self.rows[v as usize - 1]
    }

    /// `(element, row)` pairs in index order.
    pub fn iter(&self) -> impl Iterator<Item = (Element, &Row)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| (i as Element + 1, r))
    }

    /// Rows in graded display order.
    pub fn display_rows(&self) -> impl Iterator<Item = (Element, &Row)> + '_ {
        display_order(self.k)
            .into_iter()
            .map(move |v| (v, self.row(v)))
    }

    pub fn entry(&self, v: Element, j: usize) -> DEntry {
        self.row(v).get(j)
    }

    pub fn column(&self, j: usize) -> Vec<DEntry> {
        self.rows.iter().map(|r| r.get(j)).collect()
    }

    /// Elements whose row has no entry 1; each yields a torsion element.
    pub fn torsion_rows(&self) -> Vec<Element> {
        self.iter()
            .filter(|(_, r)| !r.has_one())
            .map(|(v, _)| v)
            .collect()
    }

    /// Elements whose row lies entirely in `{0, 1}`; these act trivially.
    pub fn trivial_rows(&self) -> Vec<Element> {
        self.iter()
            .filter(|(_, r)| r.acts_trivially())
            .map(|(v, _)| v)
            .collect()
    }

    pub fn is_torsion_free(&self) -> bool {
        self.rows.iter().all(Row::has_one)
    }

    pub fn is_faithful(&self) -> bool {
        self.rows.iter().all(Row::has_reflection)
    }

    /// Number of entries equal to 1 in each column.
    pub fn column_one_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n];
        for r in &self.rows {
            for j in r.one_positions() {
                counts[j] += 1;
            }
        }
        counts
    }

    /// Columns lying entirely in `{0, 1}`: coordinates fixed by the whole holonomy.
    pub fn fixed_columns(&self) -> Vec<usize> {
        (0..self.n)
            .filter(|&j| self.rows.iter().all(|r| !r.get(j).reflects()))
            .collect()
    }

    pub fn phi(&self) -> Vec<Vec<SignClass>> {
        self.rows.iter().map(Row::phi).collect()
    }

    pub fn phi_column(&self, j: usize) -> Vec<SignClass> {
        self.rows.iter().map(|r| r.get(j).sign_class()).collect()
    }

    pub fn to_gen_rows(&self, elements: &[Element]) -> Vec<Row> {
        elements.iter().map(|&v| self.row(v).clone()).collect()
    }
}

impl fmt::Display for ClosureMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = display_order(self.k)
            .into_iter()
            .map(|v| element_label(v).chars().count())
            .max()
            .unwrap_or(0);
        for (i, (v, r)) in self.display_rows().enumerate() {
            if i > 0 {
                f.write_str("\n")?;
            }
            write!(f, "{:<width$}  {r}", element_label(v))?;
        }
        Ok(())
    }
}

impl fmt::Debug for ClosureMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ClosureMatrix(k={}, n={})\n{self}", self.k, self.n)
    }
}

/// Nonzero elements of `F₂ᵏ` ordered by support size, then lexicographically
/// by the sorted generator indices: `r1, r2, r3, r1r2, r1r3, r2r3, r1r2r3`.
pub fn display_order(k: usize) -> Vec<Element> {
    let mut elems: Vec<Element> = (1..(1u32 << k)).collect();
    elems.sort_by_key(|&v| (v.count_ones(), support(v)));
    elems
}

/// Generator indices (0-based) present in `v`.
pub fn support(v: Element) -> Vec<usize> {
    (0..32).filter(|&i| v >> i & 1 == 1).collect()
}

/// `r1⋆r3` style label for an element.
pub fn element_label(v: Element) -> String {
    support(v)
        .iter()
        .map(|i| format!("r{}", i + 1))
        .collect::<Vec<_>>()
        .join("⋆")
}

/// Outcome of the torsion and faithfulness tests on a closure.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub k: usize,
    pub n: usize,
    pub torsion_free: bool,
    pub faithful: bool,
    /// Union of `torsion_rows` and `trivial_rows`, ascending.
    pub offending_rows: Vec<Element>,
    pub torsion_rows: Vec<Element>,
    pub trivial_rows: Vec<Element>,
}

impl ValidityReport {
    pub fn is_valid(&self) -> bool {
        self.torsion_free && self.faithful
    }

    pub(crate) fn require(&self) -> Result<()> {
        if self.is_valid() {
            return Ok(());
        }
        let mut reasons = Vec::new();
        if !self.torsion_free {
            reasons.push(format!("torsion at {}", labels(&self.torsion_rows)));
        }
        if !self.faithful {
            reasons.push(format!("not faithful at {}", labels(&self.trivial_rows)));
        }
        Err(Error::InvalidMatrix {
            k: self.k,
            reason: reasons.join("; "),
        })
    }
}

fn labels(elems: &[Element]) -> String {
    elems
        .iter()
        .map(|&v| element_label(v))
        .collect::<Vec<_>>()
        .join(", ")
}

pub fn validate_closure(c: &ClosureMatrix) -> ValidityReport {
    let torsion_rows = c.torsion_rows();
    let trivial_rows = c.trivial_rows();
    let mut offending_rows: Vec<Element> =
        torsion_rows.iter().chain(&trivial_rows).copied().collect();
    offending_rows.sort_unstable();
    offending_rows.dedup();
    ValidityReport {
        k: c.k(),
        n: c.n(),
        torsion_free: torsion_rows.is_empty(),
        faithful: trivial_rows.is_empty(),
        offending_rows,
        torsion_rows,
        trivial_rows,
    }
}

pub fn validate(a: &GenMatrix) -> ValidityReport {
    validate_closure(&a.closure())
}

pub fn is_torsion_free(c: &ClosureMatrix) -> (bool, Vec<Element>) {
    let rows = c.torsion_rows();
    (rows.is_empty(), rows)
}

pub fn is_faithful(c: &ClosureMatrix) -> (bool, Vec<Element>) {
    let rows = c.trivial_rows();
    (rows.is_empty(), rows)
}

pub fn column_one_counts(c: &ClosureMatrix) -> Vec<usize> {
    c.column_one_counts()
}
