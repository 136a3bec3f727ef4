//! Canonical forms under column permutation and change of generators.
//!
//! A matrix is keyed by the ascending list of its column codes (base-4, first
//! row most significant). Keys compare lexicographically. The canonical form
//! is the matrix with the smallest key over every ordered basis of `F₂ᵏ`,
//! with its columns written in ascending code order.

use crate::klein::{DEntry, Row};
use crate::matrix::{Element, GenMatrix};

/// Ascending column codes; the total order used for canonical forms.
pub type CanonicalKey = Vec<u64>;

/// All ordered bases of `F₂ᵏ`, i.e. the elements of `GL_k(F₂)` as lists of
/// images of the standard basis vectors.
pub fn ordered_bases(k: usize) -> Vec<Vec<Element>> {
    fn extend(
        k: usize,
        chosen: &mut Vec<Element>,
        span: &mut Vec<Element>,
        out: &mut Vec<Vec<Element>>,
    ) {
        if chosen.len() == k {
            out.push(chosen.clone());
            return;
        }
        for v in 1..(1u32 << k) {
            if span.contains(&v) {
                continue;
            }
            let before = span.len();
            let added: Vec<Element> = span.iter().map(|&s| s ^ v).collect();
            span.extend(added);
            chosen.push(v);
            extend(k, chosen, span, out);
            chosen.pop();
            span.truncate(before);
        }
    }
    let mut out = Vec::new();
    extend(k, &mut Vec::with_capacity(k), &mut vec![0], &mut out);
    out
}

/// Column code of column `col` (generator entries, top first) after replacing
/// the generators by the elements of `basis`.
fn transformed_code(col: &[u8], basis: &[Element]) -> u64 {
    basis.iter().fold(0u64, |acc, &b| {
        let e = col
            .iter()
            .enumerate()
            .filter(|(i, _)| b >> i & 1 == 1)
            .fold(0u8, |x, (_, &c)| x ^ c);
        (acc << 2) | e as u64
    })
}

fn columns(a: &GenMatrix) -> Vec<Vec<u8>> {
    (0..a.n())
        .map(|j| (0..a.k()).map(|i| a.entry(i, j).code()).collect())
        .collect()
}

fn key_for(cols: &[Vec<u8>], basis: &[Element]) -> CanonicalKey {
    let mut key: Vec<u64> = cols.iter().map(|c| transformed_code(c, basis)).collect();
    key.sort_unstable();
    key
}

/// Key of `a` as written: its column codes in ascending order.
pub fn column_key(a: &GenMatrix) -> CanonicalKey {
    let mut key: Vec<u64> = (0..a.n()).map(|j| a.column_code(j)).collect();
    key.sort_unstable();
    key
}

/// The smallest key in the orbit of `a`.
pub fn canonical_key(a: &GenMatrix) -> CanonicalKey {
    let cols = columns(a);
    ordered_bases(a.k())
        .iter()
        .map(|b| key_for(&cols, b))
        .min()
        .expect("GL_k is nonempty")
}

/// Rebuilds a `k`-row matrix from column codes.
pub fn matrix_from_key(k: usize, key: &[u64]) -> GenMatrix {
    let mut rows = vec![Row::zeros(key.len()); k];
    for (j, &code) in key.iter().enumerate() {
        for (i, row) in rows.iter_mut().enumerate() {
            let shift = 2 * (k - 1 - i);
            row.set(
                j,
                DEntry::from_parts(code >> (shift + 1) & 1 == 1, code >> shift & 1 == 1),
            );
        }
    }
    GenMatrix::new(rows).expect("key has the matrix shape")
}

pub fn canonicalize(a: &GenMatrix) -> GenMatrix {
    matrix_from_key(a.k(), &canonical_key(a))
}
