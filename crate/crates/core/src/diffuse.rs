//! First Betti number, diffuseness for holonomy `C₂²`, and the reduction
//! of `b₁ = 0` groups to a subquotient isomorphic to the Passman group `Δ_P`.
//!
//! `Δ_P = ⟨x, y | x⁻¹y²xy² = y⁻¹x²yx² = 1⟩` is the 3-dimensional
//! Hantzsche-Wendt group, the standard example of a non-diffuse group.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::affine::{eval_word, realize, translation_rank, Word};
use crate::error::{Error, Result};
use crate::matrix::{validate, Element, GenMatrix};
use crate::reduction::reduce_fully;
use crate::Isometry;

/// Words whose triviality defines `Δ_P` on the generators `x`, `y`.
pub const DELTA_P_RELATIONS: [&str; 2] = ["x^-1 y^2 x y^2", "y^-1 x^2 y x^2"];

/// Rank of the lattice fixed by the holonomy: the number of closure columns
/// lying in `{0, 1}`.
pub fn betti1(a: &GenMatrix) -> Result<usize> {
    validate(a).require()?;
    Ok(a.closure().fixed_columns().len())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationCheck {
    pub word: String,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaPWitness {
    /// The `C₂²` matrix whose generators are `α`, `β`.
    pub matrix: GenMatrix,
    pub alpha: Isometry,
    pub beta: Isometry,
    pub relation_checks: Vec<RelationCheck>,
    /// Translation parts of `α²`, `β²`, `(αβ)²` in lattice units.
    pub independence_vectors: Vec<Vec<i64>>,
    pub independence_rank: usize,
}

impl DeltaPWitness {
    pub fn holds(&self) -> bool {
        self.relation_checks.iter().all(|r| r.holds) && self.independence_rank == 3
    }

    /// Recomputes every check from the stored isometries.
    pub fn verify(&self) -> Result<()> {
        let again = check_relations(&self.alpha, &self.beta)?;
        if again.relation_checks != self.relation_checks
            || again.independence_vectors != self.independence_vectors
            || again.independence_rank != self.independence_rank
        {
            return Err(Error::Verification("witness does not recompute".into()));
        }
        if !self.holds() {
            return Err(Error::Verification("witness checks fail".into()));
        }
        Ok(())
    }
}

struct Checks {
    relation_checks: Vec<RelationCheck>,
    independence_vectors: Vec<Vec<i64>>,
    independence_rank: usize,
}

fn check_relations(alpha: &Isometry, beta: &Isometry) -> Result<Checks> {
    let gens = BTreeMap::from([
        ("x".to_string(), alpha.clone()),
        ("y".to_string(), beta.clone()),
    ]);
    let relation_checks = DELTA_P_RELATIONS
        .iter()
        .map(|w| {
            let word: Word = w.parse()?;
            Ok(RelationCheck {
                word: w.to_string(),
                holds: eval_word(&gens, &word)?.is_identity(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let squares = [alpha.square(), beta.square(), alpha.compose(beta)?.square()];
    let independence_vectors = squares
        .iter()
        .map(|g| g.trans2.iter().map(|t| t / 2).collect())
        .collect();
    Ok(Checks {
        relation_checks,
        independence_rank: translation_rank(&squares)?,
        independence_vectors,
    })
}

/// Evaluates the `Δ_P` relations and the rank of the squares on the two
/// generators of a `C₂²` matrix, without requiring `b₁ = 0`.
pub fn delta_p_relations(a: &GenMatrix) -> Result<DeltaPWitness> {
    if a.k() != 2 {
        return Err(Error::WrongHolonomy {
            expected: 2,
            found: a.k(),
        });
    }
    let real = realize::<i64>(a);
    let (alpha, beta) = (real.generators[0].clone(), real.generators[1].clone());
    let checks = check_relations(&alpha, &beta)?;
    Ok(DeltaPWitness {
        matrix: a.clone(),
        alpha,
        beta,
        relation_checks: checks.relation_checks,
        independence_vectors: checks.independence_vectors,
        independence_rank: checks.independence_rank,
    })
}

/// Proves `⟨α, β⟩ ≅ Δ_P` for a `C₂²` group with `b₁ = 0`.
pub fn deltap_witness(a: &GenMatrix) -> Result<DeltaPWitness> {
    validate(a).require()?;
    if a.k() != 2 {
        return Err(Error::WrongHolonomy {
            expected: 2,
            found: a.k(),
        });
    }
    let b1 = betti1(a)?;
    if b1 != 0 {
        return Err(Error::Precondition(format!("b1 = {b1}, expected 0")));
    }
    let w = delta_p_relations(a)?;
    if !w.holds() {
        return Err(Error::Verification(format!(
            "Delta_P checks failed: {:?}, rank {}",
            w.relation_checks, w.independence_rank
        )));
    }
    Ok(w)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// Poly-`ℤ`, hence diffuse.
    Diffuse,
    NonDiffuse,
    /// Holonomy rank at least 3 with `b₁ > 0`: nothing is claimed.
    NoCertificate,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Diffuse => "diffuse",
            Verdict::NonDiffuse => "non-diffuse",
            Verdict::NoCertificate => "no certificate",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffuseClassification {
    pub verdict: Verdict,
    /// `b₁`, the rank of the center.
    pub center_rank: usize,
    pub witness: Option<DeltaPWitness>,
    pub pipeline: Option<PipelineTrace>,
}

/// Diffuseness for holonomy `C₂²`: non-diffuse exactly when every fixed
/// column is zero, i.e. the group is `ℤ^{b₁} × Γ̄` with `b₁(Γ̄) = 0`. The
/// witness is computed on `Γ̄`, the restriction to the non-fixed columns.
pub fn classify_c22(a: &GenMatrix) -> Result<DiffuseClassification> {
    validate(a).require()?;
    if a.k() != 2 {
        return Err(Error::WrongHolonomy {
            expected: 2,
            found: a.k(),
        });
    }
    let c = a.closure();
    let fixed = c.fixed_columns();
    let center_rank = fixed.len();
    let split = fixed
        .iter()
        .all(|&j| (0..a.k()).all(|i| a.entry(i, j).code() == 0));
    if !split {
        return Ok(DiffuseClassification {
            verdict: Verdict::Diffuse,
            center_rank,
            witness: None,
            pipeline: None,
        });
    }
    let moving: Vec<usize> = (0..a.n()).filter(|j| !fixed.contains(j)).collect();
    let restricted = a.select_columns(&moving)?;
    Ok(DiffuseClassification {
        verdict: Verdict::NonDiffuse,
        center_rank,
        witness: Some(deltap_witness(&restricted)?),
        pipeline: None,
    })
}

/// Diffuseness for any holonomy rank, as far as certificates reach.
pub fn classify(a: &GenMatrix) -> Result<DiffuseClassification> {
    validate(a).require()?;
    match a.k() {
        1 => Ok(DiffuseClassification {
            verdict: Verdict::Diffuse,
            center_rank: betti1(a)?,
            witness: None,
            pipeline: None,
        }),
        2 => classify_c22(a),
        _ => {
            let b1 = betti1(a)?;
            if b1 > 0 {
                return Ok(DiffuseClassification {
                    verdict: Verdict::NoCertificate,
                    center_rank: b1,
                    witness: None,
                    pipeline: None,
                });
            }
            let trace = nondiffuse_pipeline(a)?;
            Ok(DiffuseClassification {
                verdict: Verdict::NonDiffuse,
                center_rank: 0,
                witness: Some(trace.terminal.clone()),
                pipeline: Some(trace),
            })
        }
    }
}

/// Restriction to an index-2 subgroup `H = ker λ` of the holonomy.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HyperplaneStep {
    /// `λ` as a bitvector: `v ∈ H` iff `v·λ = 0`.
    pub functional: Element,
    /// Nonzero elements of `H`, ascending.
    pub hyperplane: Vec<Element>,
    /// Elements of `H` used as new generators.
    pub basis: Vec<Element>,
    /// Functionals tried first and the column fixed by their kernel.
    pub rejected: Vec<(Element, usize)>,
    pub matrix: GenMatrix,
}

fn parity(x: Element) -> bool {
    x.count_ones() % 2 == 1
}

/// Finds the first `H = ker λ` (by `λ` as an integer) fixing no column and
/// returns the matrix of the preimage of `H`.
pub fn b1_zero_subgroup(a: &GenMatrix) -> Result<HyperplaneStep> {
    validate(a).require()?;
    let k = a.k();
    if k < 3 {
        return Err(Error::Precondition(format!(
            "hyperplane restriction needs k >= 3, got {k}"
        )));
    }
    let b1 = betti1(a)?;
    if b1 != 0 {
        return Err(Error::Precondition(format!("b1 = {b1}, expected 0")));
    }
    if a.n() >= (1 << k) - 1 {
        return Err(Error::Precondition(format!(
            "n = {} must be below 2^k - 1 = {}",
            a.n(),
            (1 << k) - 1
        )));
    }
    scan_hyperplanes(a)
}

/// The scan behind [`b1_zero_subgroup`] without the size precondition, which
/// only guarantees that some hyperplane qualifies.
fn scan_hyperplanes(a: &GenMatrix) -> Result<HyperplaneStep> {
    let k = a.k();
    let c = a.closure();
    let size: Element = 1 << k;
    let mut rejected = Vec::new();
    for lambda in 1..size {
        let hyperplane: Vec<Element> = (1..size).filter(|&v| !parity(v & lambda)).collect();
        let fixed = (0..a.n()).find(|&j| hyperplane.iter().all(|&v| !c.entry(v, j).reflects()));
        if let Some(j) = fixed {
            rejected.push((lambda, j));
            continue;
        }
        let mut basis: Vec<Element> = Vec::new();
        let mut span: Vec<Element> = vec![0];
        for &v in &hyperplane {
            if !span.contains(&v) {
                let more: Vec<Element> = span.iter().map(|s| s ^ v).collect();
                span.extend(more);
                basis.push(v);
            }
        }
        let matrix = GenMatrix::new(c.to_gen_rows(&basis))?;
        validate(&matrix).require()?;
        if betti1(&matrix)? != 0 {
            return Err(Error::Verification("restriction has b1 > 0".into()));
        }
        return Ok(HyperplaneStep {
            functional: lambda,
            hyperplane,
            basis,
            rejected,
            matrix,
        });
    }
    Err(Error::Verification(
        "every index-2 subgroup fixes a column".into(),
    ))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PipelineStep {
    /// A fibration quotient by column deletions.
    Quotient {
        deleted_columns: Vec<usize>,
        renormalizations: usize,
        matrix: GenMatrix,
    },
    HyperplaneRestriction(HyperplaneStep),
}

impl PipelineStep {
    pub fn matrix(&self) -> &GenMatrix {
        match self {
            PipelineStep::Quotient { matrix, .. } => matrix,
            PipelineStep::HyperplaneRestriction(h) => &h.matrix,
        }
    }
}

/// A chain `Γ' ≤ Γ`, `N ⊴ Γ'` with `Γ'/N ≅ Δ_P`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineTrace {
    pub input: GenMatrix,
    pub steps: Vec<PipelineStep>,
    pub terminal: DeltaPWitness,
}

impl PipelineTrace {
    /// Revalidates every intermediate matrix and the terminal witness.
    pub fn verify(&self) -> Result<()> {
        let mut k = self.input.k();
        for step in &self.steps {
            let m = step.matrix();
            validate(m).require()?;
            if betti1(m)? != 0 {
                return Err(Error::Verification("intermediate b1 > 0".into()));
            }
            if let PipelineStep::HyperplaneRestriction(_) = step {
                if m.k() >= k {
                    return Err(Error::Verification("holonomy rank did not drop".into()));
                }
            }
            k = m.k();
        }
        let last = self.steps.last().map_or(&self.input, PipelineStep::matrix);
        if &self.terminal.matrix != last {
            return Err(Error::Verification(
                "witness is not on the last matrix".into(),
            ));
        }
        self.terminal.verify()
    }
}

/// Sign functional of column `j` of `a`.
fn sign_functional(a: &GenMatrix, j: usize) -> Element {
    (0..a.k()).fold(0, |acc, i| acc | (a.entry(i, j).reflects() as Element) << i)
}

/// Quotient by all coordinates whose action kernel is `ker λ`, for the first
/// `λ` leaving a valid matrix. Afterwards no column is fixed by `ker λ`.
fn targeted_quotient(a: &GenMatrix) -> Option<(Vec<usize>, GenMatrix)> {
    (1..(1 as Element) << a.k()).find_map(|lambda| {
        let keep: Vec<usize> = (0..a.n())
            .filter(|&j| sign_functional(a, j) != lambda)
            .collect();
        if keep.is_empty() || keep.len() == a.n() {
            return None;
        }
        let m = a.select_columns(&keep).ok()?;
        validate(&m).is_valid().then(|| {
            let deleted = (0..a.n()).filter(|j| !keep.contains(j)).collect();
            (deleted, m)
        })
    })
}

/// Alternates fibration quotients and hyperplane restrictions until the
/// holonomy is `C₂²`, then builds the `Δ_P` witness.
///
/// The quotient is the full column reduction when that ends at a diagonal
/// matrix. Otherwise the pipeline deletes exactly the coordinates fixed by
/// one index-2 subgroup, which keeps the holonomy and `b₁ = 0`.
pub fn nondiffuse_pipeline(a: &GenMatrix) -> Result<PipelineTrace> {
    validate(a).require()?;
    let b1 = betti1(a)?;
    if b1 != 0 {
        return Err(Error::Precondition(format!("b1 = {b1}, expected 0")));
    }
    let mut steps = Vec::new();
    let mut current = a.clone();
    while current.k() > 2 {
        let trace = reduce_fully(&current)?;
        if trace.final_diagonal {
            if !trace.steps.is_empty() {
                current = trace.final_matrix.clone();
                validate(&current).require()?;
                steps.push(PipelineStep::Quotient {
                    deleted_columns: trace.steps.iter().map(|s| s.original_column).collect(),
                    renormalizations: trace.steps.iter().filter(|s| s.renormalized).count(),
                    matrix: current.clone(),
                });
                if current.k() <= 2 {
                    break;
                }
            }
        } else {
            let (deleted, m) = targeted_quotient(&current).ok_or(Error::NonDiagonalRefinement)?;
            current = m;
            steps.push(PipelineStep::Quotient {
                deleted_columns: deleted,
                renormalizations: 0,
                matrix: current.clone(),
            });
        }
        if betti1(&current)? != 0 {
            return Err(Error::Verification("quotient has b1 > 0".into()));
        }
        let h = scan_hyperplanes(&current)?;
        current = h.matrix.clone();
        steps.push(PipelineStep::HyperplaneRestriction(h));
    }
    let terminal = deltap_witness(&current)?;
    let trace = PipelineTrace {
        input: a.clone(),
        steps,
        terminal,
    };
    trace.verify()?;
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vasquez::build_lower_bound_matrix;

    fn m(rows: &[&[u8]]) -> GenMatrix {
        GenMatrix::from_codes(rows).unwrap()
    }

    fn min19() -> GenMatrix {
        m(&[&[2, 2, 1, 3], &[1, 0, 2, 2]])
    }

    fn min72() -> GenMatrix {
        m(&[&[0, 3, 2, 1, 2], &[2, 2, 1, 1, 1], &[1, 1, 0, 2, 2]])
    }

    fn deltap() -> GenMatrix {
        m(&[&[1, 3, 2], &[2, 1, 3]])
    }

    #[test]
    fn betti_examples() {
        assert_eq!(betti1(&min19()).unwrap(), 0);
        assert_eq!(betti1(&deltap()).unwrap(), 0);
        let zero = vec![crate::klein::DEntry::G0; 2];
        assert_eq!(betti1(&min19().append_column(&zero).unwrap()).unwrap(), 1);
        assert!(betti1(&m(&[&[1, 2], &[2, 1]])).is_err());
    }

    #[test]
    fn betti_matches_realized_signs() {
        for a in [
            min19(),
            min72(),
            deltap(),
            m(&[&[1, 2, 2, 1], &[2, 1, 3, 0]]),
        ] {
            let real = realize::<i64>(&a);
            let fixed = (0..a.n())
                .filter(|&j| real.generators.iter().all(|g| g.signs[j] == 1))
                .count();
            assert_eq!(betti1(&a).unwrap(), fixed);
        }
    }

    #[test]
    fn classify_examples() {
        let c = classify_c22(&min19()).unwrap();
        assert_eq!(c.verdict, Verdict::NonDiffuse);
        assert!(c.witness.unwrap().holds());

        let c = classify_c22(&m(&[&[1, 2, 2, 1], &[2, 1, 3, 0]])).unwrap();
        assert_eq!(c.verdict, Verdict::Diffuse);
        assert_eq!(c.center_rank, 1);

        let c = classify_c22(&deltap()).unwrap();
        assert_eq!(c.verdict, Verdict::NonDiffuse);
        assert_eq!(c.witness.unwrap().independence_rank, 3);

        assert!(matches!(
            classify_c22(&min72()),
            Err(Error::WrongHolonomy { .. })
        ));
    }

    #[test]
    fn split_center_is_non_diffuse() {
        let zero = vec![crate::klein::DEntry::G0; 2];
        let a = deltap().append_column(&zero).unwrap();
        let c = classify_c22(&a).unwrap();
        assert_eq!((c.verdict, c.center_rank), (Verdict::NonDiffuse, 1));
        assert_eq!(c.witness.unwrap().matrix, deltap());
    }

    #[test]
    fn witness_examples() {
        let w = deltap_witness(&deltap()).unwrap();
        assert_eq!(
            w.independence_vectors,
            vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, -1]]
        );
        w.verify().unwrap();
        assert!(deltap_witness(&min19()).unwrap().holds());
        assert!(deltap_witness(&m(&[&[0, 3, 2, 1, 2], &[3, 3, 1, 3, 3]]))
            .unwrap()
            .holds());
        assert!(deltap_witness(&m(&[&[1, 2, 2, 1], &[2, 1, 3, 0]])).is_err());
    }

    #[test]
    fn relations_fail_on_nonzero_fixed_column() {
        let w = delta_p_relations(&m(&[&[1, 2, 2, 1], &[2, 1, 3, 0]])).unwrap();
        assert!(!w.holds());
    }

    #[test]
    fn hyperplane_for_min72() {
        let h = b1_zero_subgroup(&min72()).unwrap();
        assert_eq!(h.functional, 0b110);
        assert_eq!(h.hyperplane, vec![0b001, 0b110, 0b111]);
        assert_eq!(h.basis, vec![0b001, 0b110]);
        assert_eq!(h.matrix, m(&[&[0, 3, 2, 1, 2], &[3, 3, 1, 3, 3]]));
        // H = <g1, g2> is rejected because of column 4
        assert!(h.rejected.contains(&(0b100, 3)));
        assert_eq!(h.rejected.len(), 5);
        assert!(b1_zero_subgroup(&min19()).is_err());
    }

    #[test]
    fn pipeline_min72() {
        let t = nondiffuse_pipeline(&min72()).unwrap();
        assert_eq!(t.steps.len(), 1);
        assert!(
            matches!(&t.steps[0], PipelineStep::HyperplaneRestriction(h) if h.basis == vec![0b001, 0b110])
        );
        assert_eq!(t.terminal.matrix, m(&[&[0, 3, 2, 1, 2], &[3, 3, 1, 3, 3]]));
        assert!(t.terminal.holds());
        t.verify().unwrap();
    }

    #[test]
    fn pipeline_c22_is_witness_only() {
        let t = nondiffuse_pipeline(&deltap()).unwrap();
        assert!(t.steps.is_empty());
        assert!(t.terminal.holds());
    }

    #[test]
    fn pipeline_lower_k4() {
        let a = build_lower_bound_matrix(4).unwrap();
        assert_eq!(betti1(&a).unwrap(), 0);
        let t = nondiffuse_pipeline(&a).unwrap();
        t.verify().unwrap();
        let hyperplanes = t
            .steps
            .iter()
            .filter(|s| matches!(s, PipelineStep::HyperplaneRestriction(_)))
            .count();
        assert!(hyperplanes <= 2);
    }

    #[test]
    fn general_classifier() {
        assert_eq!(classify(&m(&[&[1, 2]])).unwrap().verdict, Verdict::Diffuse);
        let c = classify(&min72()).unwrap();
        assert_eq!(c.verdict, Verdict::NonDiffuse);
        assert!(c.pipeline.is_some());
        let zero = vec![crate::klein::DEntry::G0; 3];
        let with_center = min72().append_column(&zero).unwrap();
        assert_eq!(
            classify(&with_center).unwrap().verdict,
            Verdict::NoCertificate
        );
    }
}
