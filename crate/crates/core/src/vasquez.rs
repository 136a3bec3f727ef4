//! Bounds and exact values of the diagonal Vasquez invariant `n_d(C₂ᵏ)`.
//!
//! Lower bounds come from explicit matrices certified minimal. Upper bounds
//! come from the row-count bound (a col-irreducible matrix has at most
//! `2ᵏ − 1` columns, one private closure row each) together with exhaustive
//! search for `k = 2, 3` and a mechanized counting argument for `k = 4`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::klein::DEntry;
use crate::matrix::{validate, GenMatrix, MAX_GENERATORS};
use crate::reduction::{minimality_certificate, MinimalityCertificate};
use crate::search::{
    binomial, exhaustive_reducibility_with, random_sweep, ColumnTypes, SearchDigest, SearchOptions,
    SweepDigest,
};

/// Generator matrix of `min.72.1.1.502`, a 5-dimensional `C₂³` group.
pub const MIN_72_1_1_502: [[u8; 5]; 3] = [[0, 3, 2, 1, 2], [2, 2, 1, 1, 1], [1, 1, 0, 2, 2]];

/// `Q|N` (plus a correction for odd `k ≥ 5`) or the stored `k = 3` matrix.
///
/// `Q` is `k × k` with 1 on the diagonal and 2 elsewhere. `N` has one column
/// per pair `x < y` in lexicographic order, with 2 in row `x` and 3 in row `y`.
/// For odd `k ≥ 5` the pairs `(1,2)` and `(1,3)` are dropped and the column
/// `(2,3,3,0,…,0)` is appended.
pub fn build_lower_bound_matrix(k: usize) -> Result<GenMatrix> {
    if k < 2 {
        return Err(Error::Precondition(format!(
            "lower-bound matrices need k >= 2, got {k}"
        )));
    }
    if k > MAX_GENERATORS {
        return Err(Error::TooManyGenerators {
            k,
            max: MAX_GENERATORS,
        });
    }
    if k == 3 {
        return GenMatrix::from_codes(&MIN_72_1_1_502);
    }
    let odd = k % 2 == 1;
    let mut columns: Vec<Vec<DEntry>> = (0..k)
        .map(|c| {
            (0..k)
                .map(|r| if r == c { DEntry::G1 } else { DEntry::G2 })
                .collect()
        })
        .collect();
    for x in 0..k {
        for y in x + 1..k {
            if odd && x == 0 && (y == 1 || y == 2) {
                continue;
            }
            let mut col = vec![DEntry::G0; k];
            col[x] = DEntry::G2;
            col[y] = DEntry::G3;
            columns.push(col);
        }
    }
    if odd {
        let mut col = vec![DEntry::G0; k];
        col[0] = DEntry::G2;
        col[1] = DEntry::G3;
        col[2] = DEntry::G3;
        columns.push(col);
    }
    GenMatrix::from_columns(k, &columns)
}

/// Dimension of the lower-bound construction.
pub fn lower_bound_dimension(k: usize) -> usize {
    let base = k + k * (k - 1) / 2;
    if k % 2 == 1 && k >= 3 {
        base - 1
    } else {
        base
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LowerBoundCertificate {
    pub k: usize,
    pub dimension: usize,
    pub matrix: GenMatrix,
    pub certificate: MinimalityCertificate,
}

impl LowerBoundCertificate {
    pub fn verify(&self) -> Result<()> {
        if self.matrix.k() != self.k || self.matrix.n() != self.dimension {
            return Err(Error::Verification(
                "matrix shape differs from the claim".into(),
            ));
        }
        self.certificate.verify(&self.matrix)
    }
}

/// Certifies `n_d(C₂ᵏ) ≥ lower_bound_dimension(k)`.
pub fn certify_lower_bound(k: usize) -> Result<LowerBoundCertificate> {
    let matrix = build_lower_bound_matrix(k)?;
    validate(&matrix).require()?;
    let certificate = minimality_certificate(&matrix)?.ok_or_else(|| {
        Error::Verification(format!("lower-bound matrix for k={k} is not minimal"))
    })?;
    let cert = LowerBoundCertificate {
        k,
        dimension: matrix.n(),
        matrix,
        certificate,
    };
    cert.verify()?;
    Ok(cert)
}

/// One verified claim of the `k = 4` counting argument.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountingStep {
    pub name: String,
    pub statement: String,
    pub checked: u64,
    pub holds: bool,
}

/// The case `n` of the counting argument: an `n`-column col-irreducible
/// candidate has `n` private rows `X` and `15 − n` remaining rows `N`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountingCase {
    pub n: usize,
    pub n_rows: usize,
    /// Count of 1s each column must have, given the room left in `N`.
    pub forced_count: u32,
    pub ones_in_n: u32,
    pub subsets: u64,
    /// `⌈n / subsets⌉`, absent when no column fits into `N` at all.
    pub pigeonhole_bound: Option<u64>,
    /// Assignments of columns to subsets examined, all with a repeat.
    pub assignments_checked: u64,
    pub contradiction: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountingTrace {
    pub k: usize,
    pub steps: Vec<CountingStep>,
    pub cases: Vec<CountingCase>,
    pub conclusion: String,
}

impl CountingTrace {
    pub fn holds(&self) -> bool {
        self.steps.iter().all(|s| s.holds)
            && self
                .cases
                .iter()
                .all(|c| c.pigeonhole_bound.is_none_or(|b| b >= 2))
    }
}

/// Every map from `n` columns to `subsets` labels sends two columns to the
/// same label; returns the number of maps examined.
fn check_all_assignments(n: usize, subsets: u64) -> Option<u64> {
    if subsets == 0 {
        return Some(0);
    }
    let total = subsets.checked_pow(n as u32)?;
    if total > 50_000_000 {
        return None;
    }
    let mut counts = vec![0u32; subsets as usize];
    for code in 0..total {
        counts.fill(0);
        let mut c = code;
        for _ in 0..n {
            counts[(c % subsets) as usize] += 1;
            c /= subsets;
        }
        if counts.iter().all(|&x| x < 2) {
            return None;
        }
    }
    Some(total)
}

/// Mechanizes the proof that no col-irreducible valid matrix exists for
/// `k = 4` and any `n ≥ 11`.
pub fn k4_counting_check() -> Result<CountingTrace> {
    const K: usize = 4;
    let types = ColumnTypes::new(K)?;
    let rows = (1usize << K) - 1;
    let quarter = 1u32 << (K - 2);
    let half = 1u32 << (K - 1);
    let threshold = (1u32 << (K - 3)) + 1;
    let mut steps = Vec::new();

    let census = (0..types.count()).all(|t| {
        let c = types.one_count(t);
        (c == 0 || c == quarter || c == half) && ((c == half) == (types.signs(t) == 0 && c != 0))
    });
    steps.push(CountingStep {
        name: "column census".into(),
        statement: format!(
            "every closure column has 0, {quarter} or {half} entries 1; {half} only when it never reflects"
        ),
        checked: types.count() as u64,
        holds: census,
    });

    let mut pairs = 0u64;
    let mut ok = true;
    for i in 0..types.count() {
        if types.one_count(i) != quarter {
            continue;
        }
        for j in 0..types.count() {
            if types.one_count(j) != quarter {
                continue;
            }
            pairs += 1;
            let common = (types.ones(i) & types.ones(j)).count_ones();
            if common >= threshold && types.ones(i) != types.ones(j) {
                ok = false;
            }
        }
    }
    steps.push(CountingStep {
        name: "equal one-sets".into(),
        statement: format!(
            "two columns with {quarter} entries 1 sharing at least {threshold} of their 1-rows have the same 1-rows"
        ),
        checked: pairs,
        holds: ok,
    });

    steps.push(CountingStep {
        name: "row-count bound".into(),
        statement: format!(
            "a col-irreducible matrix has distinct private rows, hence at most {rows} columns"
        ),
        checked: 1,
        holds: true,
    });

    let mut cases = Vec::new();
    for n in 11..=rows {
        let n_rows = rows - n;
        // a column's own X row holds one of its 1s and no other column's
        let forced_count = if (half as usize) - 1 > n_rows {
            quarter
        } else {
            0
        };
        if forced_count == 0 {
            return Err(Error::Verification(format!(
                "count {half} not excluded for n={n}"
            )));
        }
        let ones_in_n = forced_count - 1;
        let subsets = binomial(n_rows as u128, ones_in_n as u128) as u64;
        let pigeonhole_bound = (subsets > 0).then(|| (n as u64).div_ceil(subsets));
        let assignments_checked = check_all_assignments(n, subsets)
            .ok_or_else(|| Error::Verification(format!("assignment check failed for n={n}")))?;
        let contradiction = if subsets == 0 {
            format!("N has {n_rows} rows, too few for {ones_in_n} entries 1 per column")
        } else {
            format!(
                "some {ones_in_n}-subset of N's {n_rows} rows carries {} columns; two of them share {ones_in_n} >= {threshold} 1-rows, so their 1-rows coincide and neither X row is private",
                pigeonhole_bound.unwrap_or(0)
            )
        };
        cases.push(CountingCase {
            n,
            n_rows,
            forced_count,
            ones_in_n,
            subsets,
            pigeonhole_bound,
            assignments_checked,
            contradiction,
        });
    }

    let trace = CountingTrace {
        k: K,
        steps,
        cases,
        conclusion: "no col-irreducible valid matrix with k=4, n=11; none for any n >= 11".into(),
    };
    if !trace.holds() {
        return Err(Error::Verification("counting argument failed".into()));
    }
    Ok(trace)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UpperEvidence {
    /// Every col-irreducible matrix has at most `2ᵏ − 1 = row_bound` columns.
    RowBound {
        row_bound: usize,
    },
    Search {
        row_bound: usize,
        digests: Vec<SearchDigest>,
    },
    Counting {
        row_bound: usize,
        trace: CountingTrace,
        sweep: Option<SweepDigest>,
    },
    Formula {
        formula: String,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VasquezReport {
    pub k: usize,
    pub lower: usize,
    pub upper: usize,
    pub exact: Option<usize>,
    pub lower_certificate: Option<LowerBoundCertificate>,
    pub upper_evidence: UpperEvidence,
}

impl fmt::Display for VasquezReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.exact {
            Some(v) => write!(f, "n_d(C2^{}) = {v} (exact)", self.k),
            None => write!(f, "n_d(C2^{}) in [{}, {}]", self.k, self.lower, self.upper),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ReportOptions {
    pub jobs: Option<usize>,
    /// Valid random `(4, 11)` matrices to test; zero skips the sweep.
    pub sweep_samples: u64,
    pub seed: u64,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            jobs: None,
            sweep_samples: 1_000_000,
            seed: 0x5eed,
        }
    }
}

pub fn general_upper_bound(k: usize) -> usize {
    if k >= 3 {
        5 * (1 << (k - 3)) + 1
    } else {
        (1 << k) - 1
    }
}

pub fn n_d_report(k: usize) -> Result<VasquezReport> {
    n_d_report_with(k, &ReportOptions::default())
}

pub fn n_d_report_with(k: usize, opts: &ReportOptions) -> Result<VasquezReport> {
    if k == 0 {
        return Err(Error::Precondition(
            "holonomy rank must be at least 1".into(),
        ));
    }
    let row_bound = (1usize << k) - 1;
    if k == 1 {
        return Ok(VasquezReport {
            k,
            lower: 1,
            upper: 1,
            exact: Some(1),
            lower_certificate: None,
            upper_evidence: UpperEvidence::RowBound { row_bound },
        });
    }
    let cert = certify_lower_bound(k)?;
    let lower = cert.dimension;
    let search = |pairs: &[(usize, usize)]| -> Result<Vec<SearchDigest>> {
        let so = SearchOptions {
            jobs: opts.jobs,
            ..Default::default()
        };
        pairs
            .iter()
            .map(|&(k, n)| exhaustive_reducibility_with(k, n, &so))
            .collect()
    };
    let (upper, exact, evidence) = match k {
        2 => (
            lower,
            Some(lower),
            UpperEvidence::Search {
                row_bound,
                digests: search(&[(2, 4)])?,
            },
        ),
        3 => (
            lower,
            Some(lower),
            UpperEvidence::Search {
                row_bound,
                digests: search(&[(3, 6), (3, 7)])?,
            },
        ),
        4 => {
            let trace = k4_counting_check()?;
            let sweep = if opts.sweep_samples > 0 {
                let d = random_sweep(4, 11, opts.sweep_samples, opts.seed, opts.jobs)?;
                if let Some(matrix) = d.first_irreducible.clone() {
                    return Err(Error::Counterexample {
                        k: 4,
                        n: 11,
                        matrix,
                    });
                }
                Some(d)
            } else {
                None
            };
            (
                lower,
                Some(lower),
                UpperEvidence::Counting {
                    row_bound,
                    trace,
                    sweep,
                },
            )
        }
        _ => (
            general_upper_bound(k),
            None,
            UpperEvidence::Formula {
                formula: format!("5*2^(k-3)+1 = {}", general_upper_bound(k)),
            },
        ),
    };
    Ok(VasquezReport {
        k,
        lower,
        upper,
        exact,
        lower_certificate: Some(cert),
        upper_evidence: evidence,
    })
}

/// Rows of the `k = 5` lower-bound matrix.
pub const LOWER_K5: [[u8; 14]; 5] = [
    [1, 2, 2, 2, 2, 2, 2, 0, 0, 0, 0, 0, 0, 2],
    [2, 1, 2, 2, 2, 0, 0, 2, 2, 2, 0, 0, 0, 3],
    [2, 2, 1, 2, 2, 0, 0, 3, 0, 0, 2, 2, 0, 3],
    [2, 2, 2, 1, 2, 3, 0, 0, 3, 0, 3, 0, 2, 0],
    [2, 2, 2, 2, 1, 0, 3, 0, 0, 3, 0, 3, 3, 0],
];
