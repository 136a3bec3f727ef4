//! Exhaustive and randomized search over characteristic matrices.
//!
//! A matrix is a list of column types. A type `t < 4ᵏ` stores the generator
//! entries of a column as base-4 digits, first row most significant. For each
//! type the engine precomputes bitmasks over the `2ᵏ − 1` closure rows: rows
//! where the column holds a 1, and rows where it reflects. Validity and
//! irreducibility then reduce to a few word operations per matrix.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::canonical::{canonical_key, matrix_from_key};
use crate::error::{Error, Result};
use crate::matrix::{GenMatrix, MAX_GENERATORS};

/// Largest `k` whose closure rows fit a `u64` mask.
pub const MAX_SEARCH_K: usize = 6;

/// Per-type closure masks for a fixed `k`.
#[derive(Clone, Debug)]
pub struct ColumnTypes {
    k: usize,
    ones: Vec<u64>,
    signs: Vec<u64>,
    full: u64,
}

impl ColumnTypes {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 || k > MAX_SEARCH_K {
            return Err(Error::ResourceGuard(format!(
                "search supports 1 <= k <= {MAX_SEARCH_K}, got {k}"
            )));
        }
        let count = 1usize << (2 * k);
        let rows = (1usize << k) - 1;
        let mut ones = vec![0u64; count];
        let mut signs = vec![0u64; count];
        for t in 0..count {
            for v in 1..=rows {
                let e = Self::entry_of(k, t, v as u32);
                if e == 1 {
                    ones[t] |= 1 << (v - 1);
                }
                if e >= 2 {
                    signs[t] |= 1 << (v - 1);
                }
            }
        }
        Ok(ColumnTypes {
            k,
            ones,
            signs,
            full: if rows == 64 {
                u64::MAX
            } else {
                (1u64 << rows) - 1
            },
        })
    }

    /// Entry code of type `t` on closure row `v`.
    pub fn entry_of(k: usize, t: usize, v: u32) -> u8 {
        (0..k)
            .filter(|i| v >> i & 1 == 1)
            .fold(0u8, |acc, i| acc ^ ((t >> (2 * (k - 1 - i))) & 3) as u8)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn count(&self) -> usize {
        self.ones.len()
    }

    pub fn full(&self) -> u64 {
        self.full
    }

    /// Closure rows (bit `v − 1`) where type `t` has entry 1.
    pub fn ones(&self, t: usize) -> u64 {
        self.ones[t]
    }

    /// Closure rows where type `t` reflects.
    pub fn signs(&self, t: usize) -> u64 {
        self.signs[t]
    }

    /// Number of 1 entries in the closure column of type `t`.
    pub fn one_count(&self, t: usize) -> u32 {
        self.ones[t].count_ones()
    }

    /// Whether type `t` obeys the column-count law: the count of 1s is
    /// 0, `2ᵏ⁻²` or `2ᵏ⁻¹`, the last only for columns without reflections.
    pub fn obeys_count_law(&self, t: usize) -> bool {
        let c = self.one_count(t);
        let half = 1u32 << (self.k - 1);
        let quarter = if self.k >= 2 { 1u32 << (self.k - 2) } else { 0 };
        c == 0 || (self.k >= 2 && c == quarter) || (c == half && self.signs[t] == 0)
    }

    pub fn is_valid(&self, types: &[usize]) -> bool {
        let (once, _, sign) = self.accumulate(types);
        once == self.full && sign == self.full
    }

    /// Whether every column owns a closure row in which it holds the only 1.
    pub fn is_irreducible(&self, types: &[usize]) -> bool {
        let (once, twice, _) = self.accumulate(types);
        let private = once & !twice;
        types.iter().all(|&t| self.ones[t] & private != 0)
    }

    fn accumulate(&self, types: &[usize]) -> (u64, u64, u64) {
        types.iter().fold((0, 0, 0), |(once, twice, sign), &t| {
            (
                once | self.ones[t],
                twice | (once & self.ones[t]),
                sign | self.signs[t],
            )
        })
    }

    pub fn types_of(&self, a: &GenMatrix) -> Vec<usize> {
        (0..a.n()).map(|j| a.column_code(j) as usize).collect()
    }

    pub fn matrix(&self, types: &[usize]) -> GenMatrix {
        let key: Vec<u64> = types.iter().map(|&t| t as u64).collect();
        matrix_from_key(self.k, &key)
    }
}

/// How the search space is traversed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    /// Every ordered tuple of column types: all `4ᵏⁿ` generator matrices.
    Raw,
    /// Non-decreasing tuples: one matrix per column multiset.
    Multiset,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchDigest {
    pub k: usize,
    pub n: usize,
    pub mode: SearchMode,
    /// Size of the unpruned space.
    pub space_size: u128,
    /// Complete matrices reached after pruning.
    pub candidates_examined: u64,
    pub valid_found: u64,
    pub irreducible_found: u64,
    /// Valid matrices with a column violating the count law.
    pub column_law_violations: u64,
    /// Least irreducible valid matrix in search order, if any.
    pub first_irreducible: Option<GenMatrix>,
    pub equivalence: String,
}

#[derive(Clone, Debug, Default)]
pub struct SearchOptions {
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
    /// Permit `(k, n)` outside the default verification set.
    pub allow_any: bool,
    /// Force a traversal mode instead of choosing by size.
    pub mode: Option<SearchMode>,
}

/// Pairs checked by default: the first dimensions above the exact values
/// for `k = 2, 3`.
pub const DEFAULT_PAIRS: [(usize, usize); 4] = [(2, 4), (2, 5), (3, 6), (3, 7)];

/// Raw traversal is used when `4ᵏⁿ` is at most this.
pub const RAW_LIMIT: u128 = 1 << 20;

/// Refuse searches whose unpruned space exceeds this.
pub const SPACE_LIMIT: u128 = 4_000_000_000;

pub fn binomial(n: u128, r: u128) -> u128 {
    if r > n {
        return 0;
    }
    (0..r).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

pub fn space_size(k: usize, n: usize, mode: SearchMode) -> u128 {
    let types = 1u128 << (2 * k);
    match mode {
        SearchMode::Raw => types.saturating_pow(n as u32),
        SearchMode::Multiset => binomial(types + n as u128 - 1, n as u128),
    }
}

pub(crate) fn run_in_pool<R: Send>(jobs: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R> {
    match jobs {
        None => Ok(f()),
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| Error::ResourceGuard(format!("thread pool: {e}"))),
    }
}

#[derive(Clone, Default)]
struct Tally {
    examined: u64,
    valid: u64,
    irreducible: u64,
    law_violations: u64,
    first: Option<Vec<usize>>,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        self.examined += other.examined;
        self.valid += other.valid;
        self.irreducible += other.irreducible;
        self.law_violations += other.law_violations;
        self.first = match (self.first, other.first) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        self
    }
}

struct Walker<'a> {
    types: &'a ColumnTypes,
    n: usize,
    ordered: bool,
    /// OR of `ones` over types `>= t`.
    suffix_ones: Vec<u64>,
    suffix_signs: Vec<u64>,
    stack: Vec<usize>,
    tally: Tally,
}

impl<'a> Walker<'a> {
    fn new(types: &'a ColumnTypes, n: usize, ordered: bool) -> Self {
        let count = types.count();
        let mut suffix_ones = vec![0u64; count + 1];
        let mut suffix_signs = vec![0u64; count + 1];
        for t in (0..count).rev() {
            suffix_ones[t] = suffix_ones[t + 1] | types.ones[t];
            suffix_signs[t] = suffix_signs[t + 1] | types.signs[t];
        }
        Walker {
            types,
            n,
            ordered,
            suffix_ones,
            suffix_signs,
            stack: Vec::with_capacity(n),
            tally: Tally::default(),
        }
    }

    fn walk(&mut self, once: u64, twice: u64, sign: u64) {
        let full = self.types.full;
        let start = if self.ordered {
            0
        } else {
            *self.stack.last().unwrap_or(&0)
        };
        if (once | self.suffix_ones[start]) != full || (sign | self.suffix_signs[start]) != full {
            return;
        }
        let last = self.stack.len() + 1 == self.n;
        for t in start..self.types.count() {
            let o = self.types.ones[t];
            let (once2, twice2, sign2) = (once | o, twice | (once & o), sign | self.types.signs[t]);
            if last {
                self.tally.examined += 1;
                if once2 == full && sign2 == full {
                    self.stack.push(t);
                    self.leaf(once2, twice2);
                    self.stack.pop();
                }
            } else {
                self.stack.push(t);
                self.walk(once2, twice2, sign2);
                self.stack.pop();
            }
        }
    }

    fn leaf(&mut self, once: u64, twice: u64) {
        self.tally.valid += 1;
        if !self.stack.iter().all(|&t| self.types.obeys_count_law(t)) {
            self.tally.law_violations += 1;
        }
        let private = once & !twice;
        if self
            .stack
            .iter()
            .all(|&t| self.types.ones[t] & private != 0)
        {
            self.tally.irreducible += 1;
            if self.tally.first.is_none() {
                self.tally.first = Some(self.stack.clone());
            }
        }
    }
}

/// Counts valid and col-irreducible matrices of shape `(k, n)` without
/// failing on irreducible ones.
pub fn search_irreducible(k: usize, n: usize, opts: &SearchOptions) -> Result<SearchDigest> {
    if n == 0 {
        return Err(Error::Degenerate { k, n });
    }
    let types = ColumnTypes::new(k)?;
    let mode = opts
        .mode
        .unwrap_or(if space_size(k, n, SearchMode::Raw) <= RAW_LIMIT {
            SearchMode::Raw
        } else {
            SearchMode::Multiset
        });
    let space = space_size(k, n, mode);
    if space > SPACE_LIMIT {
        return Err(Error::ResourceGuard(format!(
            "search space for k={k}, n={n} has {space} matrices (limit {SPACE_LIMIT})"
        )));
    }
    let ordered = mode == SearchMode::Raw;
    let tally = run_in_pool(opts.jobs, || {
        (0..types.count())
            .into_par_iter()
            .map(|first| {
                let mut w = Walker::new(&types, n, ordered);
                let o = types.ones[first];
                w.stack.push(first);
                if n == 1 {
                    w.tally.examined += 1;
                    if o == types.full && types.signs[first] == types.full {
                        w.leaf(o, 0);
                    }
                } else {
                    w.walk(o, 0, types.signs[first]);
                }
                w.tally
            })
            .reduce(Tally::default, Tally::merge)
    })?;
    Ok(SearchDigest {
        k,
        n,
        mode,
        space_size: space,
        candidates_examined: tally.examined,
        valid_found: tally.valid,
        irreducible_found: tally.irreducible,
        column_law_violations: tally.law_violations,
        first_irreducible: tally.first.map(|t| types.matrix(&t)),
        equivalence: match mode {
            SearchMode::Raw => "none: every generator matrix".into(),
            SearchMode::Multiset => "column permutation: one matrix per column multiset".into(),
        },
    })
}

/// Verifies that every valid `(k, n)` matrix has a deletable column.
pub fn exhaustive_reducibility(k: usize, n: usize) -> Result<SearchDigest> {
    exhaustive_reducibility_with(k, n, &SearchOptions::default())
}

pub fn exhaustive_reducibility_with(
    k: usize,
    n: usize,
    opts: &SearchOptions,
) -> Result<SearchDigest> {
    if !opts.allow_any && !DEFAULT_PAIRS.contains(&(k, n)) {
        return Err(Error::ResourceGuard(format!(
            "(k, n) = ({k}, {n}) is outside the default set {DEFAULT_PAIRS:?}"
        )));
    }
    let digest = search_irreducible(k, n, opts)?;
    match &digest.first_irreducible {
        Some(matrix) => Err(Error::Counterexample {
            k,
            n,
            matrix: matrix.clone(),
        }),
        None => Ok(digest),
    }
}

/// Lazily yields valid matrices of shape `(k, n)` in column-multiset order.
pub struct Enumeration {
    types: ColumnTypes,
    current: Option<Vec<usize>>,
    up_to_equivalence: bool,
}

impl Iterator for Enumeration {
    type Item = GenMatrix;

    fn next(&mut self) -> Option<GenMatrix> {
        loop {
            let cur = self.current.as_mut()?;
            let found = self.types.is_valid(cur).then(|| cur.clone());
            // advance to the next non-decreasing tuple
            let top = self.types.count() - 1;
            match cur.iter().rposition(|&t| t < top) {
                Some(i) => {
                    let v = cur[i] + 1;
                    cur[i..].fill(v);
                }
                None => self.current = None,
            }
            let Some(types) = found else { continue };
            let m = self.types.matrix(&types);
            if self.up_to_equivalence {
                let key: Vec<u64> = types.iter().map(|&t| t as u64).collect();
                if canonical_key(&m) != key {
                    continue;
                }
            }
            return Some(m);
        }
    }
}

/// Largest `k` accepted by [`enumerate_bieberbach`].
pub const ENUMERATION_MAX_K: usize = 3;

/// All valid matrices of shape `(k, n)`, one per column multiset, or one per
/// class under column permutation and change of generators when
/// `up_to_equivalence` is set. Emitted matrices have ascending column codes.
pub fn enumerate_bieberbach(k: usize, n: usize, up_to_equivalence: bool) -> Result<Enumeration> {
    if k == 0 || n == 0 {
        return Err(Error::Degenerate { k, n });
    }
    if k > ENUMERATION_MAX_K {
        return Err(Error::ResourceGuard(format!(
            "exhaustive enumeration supports k <= {ENUMERATION_MAX_K}, got {k}"
        )));
    }
    let space = space_size(k, n, SearchMode::Multiset);
    if space > SPACE_LIMIT {
        return Err(Error::ResourceGuard(format!(
            "enumeration space for k={k}, n={n} has {space} multisets (limit {SPACE_LIMIT})"
        )));
    }
    debug_assert!(k <= MAX_GENERATORS);
    Ok(Enumeration {
        types: ColumnTypes::new(k)?,
        current: Some(vec![0; n]),
        up_to_equivalence,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepDigest {
    pub k: usize,
    pub n: usize,
    pub seed: u64,
    pub draws: u64,
    pub valid_found: u64,
    pub irreducible_found: u64,
    pub column_law_violations: u64,
    pub first_irreducible: Option<GenMatrix>,
}

/// Draws uniform random `(k, n)` matrices until `valid_target` valid ones
/// have been seen. Workers use independent ChaCha streams derived from
/// `seed`, so the digest does not depend on the thread count.
pub fn random_sweep(
    k: usize,
    n: usize,
    valid_target: u64,
    seed: u64,
    jobs: Option<usize>,
) -> Result<SweepDigest> {
    const STREAMS: u64 = 64;
    let types = ColumnTypes::new(k)?;
    if n == 0 {
        return Err(Error::Degenerate { k, n });
    }
    let per_stream = valid_target / STREAMS;
    let extra = valid_target % STREAMS;
    let results = run_in_pool(jobs, || {
        (0..STREAMS)
            .into_par_iter()
            .map(|s| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(s);
                let target = per_stream + u64::from(s < extra);
                let mut cols = vec![0usize; n];
                let (mut draws, mut valid, mut irr, mut law) = (0u64, 0u64, 0u64, 0u64);
                let mut first: Option<Vec<usize>> = None;
                let mut tries = 0u64;
                while valid < target {
                    tries += 1;
                    if tries > target.saturating_mul(1000).max(1000) {
                        break;
                    }
                    draws += 1;
                    for c in cols.iter_mut() {
                        *c = rng.gen_range(0..types.count());
                    }
                    if !types.is_valid(&cols) {
                        continue;
                    }
                    valid += 1;
                    if !cols.iter().all(|&t| types.obeys_count_law(t)) {
                        law += 1;
                    }
                    if types.is_irreducible(&cols) {
                        irr += 1;
                        first.get_or_insert_with(|| cols.clone());
                    }
                }
                (draws, valid, irr, law, first)
            })
            .collect::<Vec<_>>()
    })?;
    let mut digest = SweepDigest {
        k,
        n,
        seed,
        draws: 0,
        valid_found: 0,
        irreducible_found: 0,
        column_law_violations: 0,
        first_irreducible: None,
    };
    for (draws, valid, irr, law, first) in results {
        digest.draws += draws;
        digest.valid_found += valid;
        digest.irreducible_found += irr;
        digest.column_law_violations += law;
        if digest.first_irreducible.is_none() {
            digest.first_irreducible = first.map(|t| types.matrix(&t));
        }
    }
    Ok(digest)
}
