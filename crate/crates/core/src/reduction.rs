//! Column deletion quotients, holonomy renormalization and minimality
//! certificates.
//!
//! Deleting column `i` is the quotient by the lattice line `ℤeᵢ`; the result
//! is torsion-free exactly when every closure row keeps an entry 1. A
//! deletion can make some holonomy elements act trivially, in which case
//! [`renormalize_holonomy`] absorbs them into a refined lattice.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::klein::{DEntry, Row, SignClass};
use crate::matrix::{display_order, validate, ClosureMatrix, Element, GenMatrix};

/// Columns whose deletion leaves an entry 1 in every closure row. Only the
/// closure's torsion-freeness matters here, not faithfulness.
pub fn torsion_preserving_deletions(c: &ClosureMatrix) -> Vec<usize> {
    let mut private = vec![false; c.n()];
    for (_, row) in c.iter() {
        let ones = row.one_positions();
        if ones.len() == 1 {
            private[ones[0]] = true;
        }
    }
    (0..c.n()).filter(|&j| !private[j]).collect()
}

pub fn deletable_columns(a: &GenMatrix) -> Result<Vec<usize>> {
    validate(a).require()?;
    Ok(torsion_preserving_deletions(&a.closure()))
}

pub fn is_col_irreducible(a: &GenMatrix) -> Result<bool> {
    Ok(deletable_columns(a)?.is_empty())
}

/// Quotient by `ℤeᵢ`. The input must be torsion-free and `i` a
/// torsion-preserving deletion; the result may fail to be faithful.
pub fn delete_column(a: &GenMatrix, i: usize) -> Result<GenMatrix> {
    let c = a.closure();
    if let Some(&row) = c.torsion_rows().first() {
        return Err(Error::HasTorsion { row });
    }
    if i >= a.n() || !torsion_preserving_deletions(&c).contains(&i) {
        return Err(Error::NotDeletable { column: i });
    }
    a.without_column(i)
}

/// Details of a lattice refinement by the trivially acting elements.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Renormalization {
    /// Nonzero holonomy elements acting trivially, ascending.
    pub holonomy_kernel: Vec<Element>,
    /// Columns whose translation unit changed.
    pub renormalized_columns: Vec<usize>,
    /// Generators kept as coset representatives.
    pub kept_generators: Vec<usize>,
    pub result: GenMatrix,
}

/// Vectors over `F₂` indexed by columns.
type Bits = Vec<bool>;

fn xor_into(a: &mut Bits, b: &Bits) {
    for (x, &y) in a.iter_mut().zip(b) {
        *x ^= y;
    }
}

/// Reduced row echelon form of `vectors` restricted to `cols`; returns
/// `(pivot, row)` pairs.
fn rref(vectors: &[Bits], cols: &[usize]) -> Vec<(usize, Bits)> {
    let mut basis: Vec<(usize, Bits)> = Vec::new();
    for v in vectors {
        let mut v: Bits = v.clone();
        for (p, b) in &basis {
            if v[*p] {
                xor_into(&mut v, b);
            }
        }
        let Some(&p) = cols.iter().find(|&&j| v[j]) else {
            continue;
        };
        for (_, b) in basis.iter_mut() {
            if b[p] {
                xor_into(b, &v);
            }
        }
        basis.push((p, v));
    }
    basis.sort_by_key(|(p, _)| *p);
    basis
}

fn f2_span_contains(basis: &[Element], v: Element) -> bool {
    // slot b holds a vector whose highest set bit is b
    let mut slots = [0 as Element; 32];
    let reduce = |slots: &[Element; 32], mut x: Element| {
        while x != 0 {
            let top = 31 - x.leading_zeros() as usize;
            if slots[top] == 0 {
                break;
            }
            x ^= slots[top];
        }
        x
    };
    for &b in basis {
        let x = reduce(&slots, b);
        if x != 0 {
            slots[31 - x.leading_zeros() as usize] = x;
        }
    }
    reduce(&slots, v) == 0
}

/// Sign functional of column `j`: bit `i` set when generator `i` reflects.
fn sign_functional(a: &GenMatrix, j: usize) -> Element {
    (0..a.k()).fold(0, |acc, i| acc | (a.entry(i, j).reflects() as Element) << i)
}

/// Refines the lattice by the translations of the trivially acting elements
/// and re-expresses the group on a complement of that kernel.
///
/// The refined lattice is `ℤⁿ + ½W`, where `W` is spanned by the half
/// patterns of kernel rows. It stays diagonal only when `W` splits along the
/// classes of columns with equal sign functional; otherwise the error is
/// [`Error::NonDiagonalRefinement`]. Inside a class with `W` in reduced form
/// with pivots `P`, pivot columns lose their half bit and every other column
/// `j` gets `h_j + Σ_p h_p (w_p)_j`.
pub fn renormalize_detailed(a: &GenMatrix) -> Result<Renormalization> {
    let c = a.closure();
    if let Some(&row) = c.torsion_rows().first() {
        return Err(Error::HasTorsion { row });
    }
    let kernel = c.trivial_rows();
    if kernel.is_empty() {
        return Ok(Renormalization {
            holonomy_kernel: vec![],
            renormalized_columns: vec![],
            kept_generators: (0..a.k()).collect(),
            result: a.clone(),
        });
    }

    let n = a.n();
    let halves: Vec<Bits> = kernel
        .iter()
        .map(|&v| {
            let row = c.row(v);
            (0..n).map(|j| row.get(j).has_half()).collect()
        })
        .collect();
    let all_cols: Vec<usize> = (0..n).collect();
    let dim_w = rref(&halves, &all_cols).len();

    let mut classes: BTreeMap<Element, Vec<usize>> = BTreeMap::new();
    for j in 0..n {
        classes.entry(sign_functional(a, j)).or_default().push(j);
    }
    let mut per_class = Vec::new();
    for cols in classes.values() {
        let projected: Vec<Bits> = halves
            .iter()
            .map(|h| (0..n).map(|j| h[j] && cols.contains(&j)).collect())
            .collect();
        per_class.push((cols.clone(), rref(&projected, cols)));
    }
    if per_class.iter().map(|(_, b)| b.len()).sum::<usize>() != dim_w {
        return Err(Error::NonDiagonalRefinement);
    }

    let mut touched = vec![false; n];
    let transform = |row: &Row| -> Row {
        let mut out = row.clone();
        for (cols, basis) in &per_class {
            for &j in cols {
                if basis.iter().any(|(p, _)| *p == j) {
                    continue;
                }
                let flip = basis
                    .iter()
                    .filter(|(p, w)| w[j] && row.get(*p).has_half())
                    .count()
                    % 2
                    == 1;
                let e = row.get(j);
                out.set(j, DEntry::from_parts(e.reflects(), e.has_half() ^ flip));
            }
            for (p, _) in basis {
                out.set(*p, DEntry::from_parts(row.get(*p).reflects(), false));
            }
        }
        out
    };
    for (_, basis) in &per_class {
        for (_, w) in basis {
            for (j, &bit) in w.iter().enumerate() {
                touched[j] |= bit;
            }
        }
    }

    let mut span: Vec<Element> = kernel.clone();
    let mut kept = Vec::new();
    for i in 0..a.k() {
        let e = 1 << i;
        if !f2_span_contains(&span, e) {
            span.push(e);
            kept.push(i);
        }
    }
    if kept.is_empty() {
        return Err(Error::Degenerate { k: 0, n });
    }
    let result = GenMatrix::new(kept.iter().map(|&i| transform(a.row(i))).collect())?;
    let report = validate(&result);
    if !report.is_valid() {
        return Err(Error::Verification(format!(
            "renormalized matrix is not valid: {:?}",
            report.offending_rows
        )));
    }
    Ok(Renormalization {
        holonomy_kernel: kernel,
        renormalized_columns: (0..n).filter(|&j| touched[j]).collect(),
        kept_generators: kept,
        result,
    })
}

pub fn renormalize_holonomy(a: &GenMatrix) -> Result<GenMatrix> {
    renormalize_detailed(a).map(|r| r.result)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionStep {
    /// Index in the matrix the step was applied to.
    pub deleted_column: usize,
    /// Index of the same column in the input matrix.
    pub original_column: usize,
    pub holonomy_kernel: Vec<Element>,
    pub renormalized_columns: Vec<usize>,
    /// Whether the kernel was absorbed into a refined lattice.
    pub renormalized: bool,
    pub k: usize,
    pub n: usize,
    pub faithful: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionTrace {
    pub input: GenMatrix,
    pub steps: Vec<ReductionStep>,
    #[serde(rename = "final")]
    pub final_matrix: GenMatrix,
    /// Rank of the holonomy group acting on the final lattice.
    pub final_holonomy_rank: usize,
    /// False when a trivially acting subgroup could not be absorbed into a
    /// diagonal lattice; the final matrix is then a torsion-free but
    /// non-faithful description of the quotient.
    pub final_diagonal: bool,
}

impl ReductionTrace {
    /// Recomputes the final matrix from the input and the recorded steps.
    pub fn replay(&self) -> Result<GenMatrix> {
        let mut m = self.input.clone();
        for step in &self.steps {
            m = delete_column(&m, step.deleted_column)?;
            if step.renormalized {
                m = renormalize_holonomy(&m)?;
            }
        }
        Ok(m)
    }

    pub fn final_dimension(&self) -> usize {
        self.final_matrix.n()
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Diagonal,
    /// The trivially acting subgroup does not split along characters.
    Pending,
    /// Every holonomy element acts trivially: the quotient is a torus group.
    Collapsed,
}

fn delete_and_renormalize(
    current: &GenMatrix,
    i: usize,
    original_column: usize,
) -> Result<(GenMatrix, ReductionStep, Outcome)> {
    let mut next = current.without_column(i)?;
    let kernel = next.closure().trivial_rows();
    let mut step = ReductionStep {
        deleted_column: i,
        original_column,
        holonomy_kernel: kernel.clone(),
        renormalized_columns: vec![],
        renormalized: false,
        k: next.k(),
        n: next.n(),
        faithful: kernel.is_empty(),
    };
    let mut outcome = Outcome::Diagonal;
    if !kernel.is_empty() {
        match renormalize_detailed(&next) {
            Ok(r) => {
                step.renormalized_columns = r.renormalized_columns;
                step.renormalized = true;
                next = r.result;
                step.k = next.k();
                step.faithful = true;
            }
            Err(Error::NonDiagonalRefinement) => outcome = Outcome::Pending,
            Err(Error::Degenerate { k: 0, .. }) => outcome = Outcome::Collapsed,
            Err(e) => return Err(e),
        }
    }
    Ok((next, step, outcome))
}

fn is_diagonal_terminal(m: &GenMatrix) -> bool {
    let trivial = m.closure().trivial_rows().len();
    trivial == 0 || trivial == (1 << m.k()) - 1
}

/// Depth-first search for a deletion sequence ending at a diagonal matrix.
/// Quotients that stay diagonal are tried first, then lower indices.
fn search_diagonal(
    current: &GenMatrix,
    origin: &[usize],
    dead: &mut HashSet<GenMatrix>,
    path: &mut Vec<ReductionStep>,
) -> Result<Option<GenMatrix>> {
    let candidates = torsion_preserving_deletions(&current.closure());
    if candidates.is_empty() {
        return Ok(is_diagonal_terminal(current).then(|| current.clone()));
    }
    if dead.contains(current) {
        return Ok(None);
    }
    let mut attempts = candidates
        .iter()
        .map(|&i| delete_and_renormalize(current, i, origin[i]))
        .collect::<Result<Vec<_>>>()?;
    attempts.sort_by_key(|(_, step, o)| (*o == Outcome::Pending, step.deleted_column));
    for (next, step, _) in attempts {
        let mut rest = origin.to_vec();
        rest.remove(step.deleted_column);
        path.push(step);
        if let Some(done) = search_diagonal(&next, &rest, dead, path)? {
            return Ok(Some(done));
        }
        path.pop();
    }
    dead.insert(current.clone());
    Ok(None)
}

/// Deletes columns until none is deletable, renormalizing after every
/// holonomy drop. The deletion sequence is the first one, trying diagonal
/// quotients before others and lower indices before higher, that ends at a
/// diagonal matrix; when none does, the lowest-index column is taken at
/// every step and the trace is flagged as not diagonal.
pub fn reduce_fully(a: &GenMatrix) -> Result<ReductionTrace> {
    validate(a).require()?;
    let origin: Vec<usize> = (0..a.n()).collect();
    let mut steps = Vec::new();
    let mut dead = HashSet::new();
    let current = match search_diagonal(a, &origin, &mut dead, &mut steps)? {
        Some(done) => done,
        None => {
            steps.clear();
            let mut current = a.clone();
            let mut origin = origin;
            while let Some(&i) = torsion_preserving_deletions(&current.closure()).first() {
                let (next, step, _) = delete_and_renormalize(&current, i, origin.remove(i))?;
                steps.push(step);
                current = next;
            }
            current
        }
    };
    let trivial = current.closure().trivial_rows().len();
    let collapsed = trivial == (1 << current.k()) - 1;
    let final_holonomy_rank = if collapsed {
        0
    } else {
        current.k() - (trivial + 1).trailing_zeros() as usize
    };
    Ok(ReductionTrace {
        input: a.clone(),
        steps,
        final_diagonal: is_diagonal_terminal(&current),
        final_matrix: current,
        final_holonomy_rank,
    })
}

/// For each column, a closure row whose only entry 1 lies in that column.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IrreducibilityCertificate {
    pub row_assignment: Vec<Element>,
}

impl IrreducibilityCertificate {
    pub fn verify(&self, a: &GenMatrix) -> Result<()> {
        let c = a.closure();
        if self.row_assignment.len() != a.n() {
            return Err(Error::Verification(
                "assignment length differs from n".into(),
            ));
        }
        for (j, &v) in self.row_assignment.iter().enumerate() {
            if v == 0 || v >= 1 << a.k() || c.row(v).one_positions() != vec![j] {
                return Err(Error::Verification(format!(
                    "row {v} is not private to column {}",
                    j + 1
                )));
            }
        }
        Ok(())
    }
}

/// Some exactly when no column is deletable. Rows are chosen first in
/// display order.
pub fn irreducibility_certificate(a: &GenMatrix) -> Result<Option<IrreducibilityCertificate>> {
    validate(a).require()?;
    let c = a.closure();
    let mut assignment: Vec<Option<Element>> = vec![None; a.n()];
    for v in display_order(a.k()) {
        let ones = c.row(v).one_positions();
        if let [j] = ones[..] {
            assignment[j].get_or_insert(v);
        }
    }
    Ok(assignment
        .into_iter()
        .collect::<Option<Vec<_>>>()
        .map(|row_assignment| IrreducibilityCertificate { row_assignment }))
}

pub fn phi_columns(c: &ClosureMatrix) -> Vec<Vec<SignClass>> {
    (0..c.n()).map(|j| c.phi_column(j)).collect()
}

/// Whether the columns of `Φ(closure)` are pairwise distinct, i.e. the
/// actions on different coordinates have different kernels.
pub fn kernels_distinct(a: &GenMatrix) -> bool {
    let mut cols = phi_columns(&a.closure());
    let n = cols.len();
    cols.sort();
    cols.dedup();
    cols.len() == n
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinimalityCertificate {
    pub row_assignment: Vec<Element>,
    pub phi_columns: Vec<Vec<SignClass>>,
}

impl MinimalityCertificate {
    pub fn verify(&self, a: &GenMatrix) -> Result<()> {
        validate(a).require()?;
        IrreducibilityCertificate {
            row_assignment: self.row_assignment.clone(),
        }
        .verify(a)?;
        if self.phi_columns != phi_columns(&a.closure()) {
            return Err(Error::Verification(
                "phi columns differ from the closure".into(),
            ));
        }
        for (i, x) in self.phi_columns.iter().enumerate() {
            if self.phi_columns[i + 1..].contains(x) {
                return Err(Error::Verification(format!("phi column {} repeats", i + 1)));
            }
        }
        Ok(())
    }
}

/// Some when the matrix is col-irreducible with distinct action kernels.
pub fn minimality_certificate(a: &GenMatrix) -> Result<Option<MinimalityCertificate>> {
    let Some(irr) = irreducibility_certificate(a)? else {
        return Ok(None);
    };
    if !kernels_distinct(a) {
        return Ok(None);
    }
    Ok(Some(MinimalityCertificate {
        row_assignment: irr.row_assignment,
        phi_columns: phi_columns(&a.closure()),
    }))
}
