//! JSON certificates: a typed payload plus named checks, recomputed when
//! the certificate is built.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::affine::{realize, torsion_oracle};
use crate::canonical::canonical_key;
use crate::diffuse::{classify, deltap_witness, nondiffuse_pipeline, Verdict};
use crate::error::Result;
use crate::io::serialize_matrix;
use crate::klein::star_rows;
use crate::library::ExampleId;
use crate::matrix::{element_label, validate, GenMatrix};
use crate::reduction::{
    deletable_columns, irreducibility_certificate, kernels_distinct, minimality_certificate,
    reduce_fully, renormalize_holonomy, torsion_preserving_deletions,
};
use crate::vasquez::{UpperEvidence, VasquezReport};

pub const SCHEMA_VERSION: u32 = 1;

/// JSON schema every certificate validates against.
pub const SCHEMA: &str = include_str!("../schema/certificate.v1.json");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateKind {
    Validity,
    Closure,
    Reduction,
    Minimality,
    Vasquez,
    Classification,
    Witness,
    Pipeline,
    Enumeration,
    Example,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
}

impl Check {
    pub fn new(name: &str, pass: bool) -> Self {
        Check {
            name: name.to_string(),
            pass,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    #[serde(rename = "type")]
    pub kind: CertificateKind,
    pub version: u32,
    /// SHA-256 of the canonical text of the input.
    pub input_hash: String,
    pub payload: Value,
    pub checks: Vec<Check>,
}

impl Certificate {
    pub fn new(kind: CertificateKind, input: &str, payload: Value, checks: Vec<Check>) -> Self {
        Certificate {
            kind,
            version: SCHEMA_VERSION,
            input_hash: input_hash(input),
            payload,
            checks,
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failed_checks(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.name.as_str())
            .collect()
    }
}

pub fn input_hash(input: &str) -> String {
    hex::encode(Sha256::digest(input.as_bytes()))
}

fn matrix_input(a: &GenMatrix) -> String {
    serialize_matrix(a)
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("certificate payloads serialize")
}

pub fn validity(a: &GenMatrix) -> Certificate {
    let report = validate(a);
    let oracle = torsion_oracle::<i64>(a);
    let payload = json!({
        "matrix": a,
        "holonomy_rank": a.k(),
        "dimension": a.n(),
        "report": report,
    });
    let checks = vec![
        Check::new("torsion-free", report.torsion_free),
        Check::new("faithful", report.faithful),
        Check::new(
            "affine-oracle-agrees",
            oracle.is_none() == report.torsion_free,
        ),
    ];
    Certificate::new(CertificateKind::Validity, &matrix_input(a), payload, checks)
}

pub fn closure(a: &GenMatrix) -> Certificate {
    let c = a.closure();
    let rows: Vec<Value> = c
        .display_rows()
        .map(|(v, row)| json!({ "element": v, "label": element_label(v), "entries": row.codes() }))
        .collect();
    let elements: Vec<_> = c.iter().map(|(v, _)| v).collect();
    let star_closed = elements.iter().all(|&u| {
        elements
            .iter()
            .filter(|&&v| v != u)
            .all(|&v| star_rows(c.row(u), c.row(v)).ok().as_ref() == Some(c.row(u ^ v)))
    });
    let g = realize::<i64>(a);
    let affine = elements.iter().all(|&v| &g.element(v).row() == c.row(v));
    let phi: Vec<String> = c
        .display_rows()
        .map(|(_, row)| row.phi().iter().map(ToString::to_string).collect())
        .collect();
    let payload = json!({ "k": a.k(), "n": a.n(), "rows": rows, "phi": phi });
    let checks = vec![
        Check::new("closed-under-star", star_closed),
        Check::new("affine-realization-agrees", affine),
    ];
    Certificate::new(CertificateKind::Closure, &matrix_input(a), payload, checks)
}

pub fn reduction(a: &GenMatrix) -> Result<Certificate> {
    let trace = reduce_fully(a)?;
    let replay = trace.replay();
    let mut m = trace.input.clone();
    let mut steps_ok = true;
    for step in &trace.steps {
        m = match m.without_column(step.deleted_column) {
            Ok(next) => next,
            Err(_) => {
                steps_ok = false;
                break;
            }
        };
        steps_ok &= m.closure().is_torsion_free();
        if step.renormalized {
            match renormalize_holonomy(&m) {
                Ok(next) => m = next,
                Err(_) => steps_ok = false,
            }
        }
    }
    // A non-diagonal final matrix is not faithful, so test deletions directly.
    let final_irreducible = torsion_preserving_deletions(&trace.final_matrix.closure()).is_empty();
    let minimality = if validate(&trace.final_matrix).is_valid() {
        minimality_certificate(&trace.final_matrix)?
    } else {
        None
    };
    let payload = json!({
        "trace": trace,
        "final_dimension": trace.final_dimension(),
        "exact": minimality.is_some(),
        "minimality": minimality,
    });
    let checks = vec![
        Check::new(
            "replay-matches",
            replay.as_ref().ok() == Some(&trace.final_matrix),
        ),
        Check::new("steps-torsion-free", steps_ok),
        Check::new("final-col-irreducible", final_irreducible),
        Check::new("final-diagonal", trace.final_diagonal),
    ];
    Ok(Certificate::new(
        CertificateKind::Reduction,
        &matrix_input(a),
        payload,
        checks,
    ))
}

pub fn minimality(a: &GenMatrix) -> Result<Certificate> {
    let deletable = deletable_columns(a)?;
    let irreducibility = irreducibility_certificate(a)?;
    let cert = minimality_certificate(a)?;
    let verified = cert.as_ref().is_some_and(|c| c.verify(a).is_ok());
    let distinct = kernels_distinct(a);
    let payload = json!({
        "matrix": a,
        "deletable_columns": deletable,
        "kernels_distinct": distinct,
        "certificate": cert,
    });
    let checks = vec![
        Check::new("col-irreducible", deletable.is_empty()),
        Check::new(
            "criterion-agrees",
            irreducibility.is_some() == deletable.is_empty(),
        ),
        Check::new("kernels-distinct", distinct),
        Check::new("certificate-verifies", verified),
    ];
    Ok(Certificate::new(
        CertificateKind::Minimality,
        &matrix_input(a),
        payload,
        checks,
    ))
}

pub fn vasquez(report: &VasquezReport) -> Certificate {
    let lower_ok = report
        .lower_certificate
        .as_ref()
        .map_or(report.k == 1, |c| {
            c.verify().is_ok() && c.dimension == report.lower
        });
    let upper_ok = match &report.upper_evidence {
        UpperEvidence::RowBound { .. } | UpperEvidence::Formula { .. } => true,
        UpperEvidence::Search { digests, .. } => digests.iter().all(|d| d.irreducible_found == 0),
        UpperEvidence::Counting { trace, sweep, .. } => {
            trace.holds() && sweep.as_ref().is_none_or(|s| s.irreducible_found == 0)
        }
    };
    let checks = vec![
        Check::new("lower-certificate-verifies", lower_ok),
        Check::new("upper-evidence-holds", upper_ok),
        Check::new("exact", report.exact.is_some()),
    ];
    Certificate::new(
        CertificateKind::Vasquez,
        &format!("vasquez k={}\n", report.k),
        to_value(report),
        checks,
    )
}

pub fn classification(a: &GenMatrix) -> Result<Certificate> {
    let c = classify(a)?;
    let witness_ok = c.witness.as_ref().is_none_or(|w| w.verify().is_ok());
    let pipeline_ok = c.pipeline.as_ref().is_none_or(|p| p.verify().is_ok());
    let checks = vec![
        Check::new("verdict-certified", c.verdict != Verdict::NoCertificate),
        Check::new("witness-verifies", witness_ok),
        Check::new("pipeline-verifies", pipeline_ok),
    ];
    Ok(Certificate::new(
        CertificateKind::Classification,
        &matrix_input(a),
        to_value(&c),
        checks,
    ))
}

pub fn witness(a: &GenMatrix) -> Result<Certificate> {
    let w = deltap_witness(a)?;
    let mut checks: Vec<Check> = w
        .relation_checks
        .iter()
        .map(|r| Check::new(&format!("relation {}", r.word), r.holds))
        .collect();
    checks.push(Check::new("translation-rank-3", w.independence_rank == 3));
    Ok(Certificate::new(
        CertificateKind::Witness,
        &matrix_input(a),
        to_value(&w),
        checks,
    ))
}

pub fn pipeline(a: &GenMatrix) -> Result<Certificate> {
    let trace = nondiffuse_pipeline(a)?;
    let terminal = &trace.terminal;
    let checks = vec![
        Check::new("trace-verifies", trace.verify().is_ok()),
        Check::new("terminal-holonomy-c2^2", terminal.matrix.k() == 2),
        Check::new("terminal-witness-holds", terminal.holds()),
    ];
    Ok(Certificate::new(
        CertificateKind::Pipeline,
        &matrix_input(a),
        to_value(&trace),
        checks,
    ))
}

pub fn enumeration(
    k: usize,
    n: usize,
    up_to_equivalence: bool,
    matrices: &[GenMatrix],
) -> Certificate {
    let all_valid = matrices.iter().all(|m| validate(m).is_valid());
    let mut keys: Vec<_> = matrices.iter().map(canonical_key).collect();
    keys.sort();
    let before = keys.len();
    keys.dedup();
    let payload = json!({
        "k": k,
        "n": n,
        "up_to_equivalence": up_to_equivalence,
        "count": matrices.len(),
        "matrices": matrices,
    });
    let mut checks = vec![Check::new("all-valid", all_valid)];
    if up_to_equivalence {
        checks.push(Check::new("canonical-forms-distinct", keys.len() == before));
    }
    Certificate::new(
        CertificateKind::Enumeration,
        &format!("enumerate k={k} n={n} equivalence={up_to_equivalence}\n"),
        payload,
        checks,
    )
}

pub fn example(id: ExampleId) -> Certificate {
    let a = id.matrix();
    let payload = json!({ "name": id.name(), "matrix": a, "text": serialize_matrix(&a) });
    let checks = vec![Check::new("valid", validate(&a).is_valid())];
    Certificate::new(CertificateKind::Example, &matrix_input(&a), payload, checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_is_sha256_hex() {
        assert_eq!(
            input_hash(""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn validity_of_min19() {
        let c = validity(&ExampleId::Min19.matrix());
        assert!(c.passed());
        let trivial = GenMatrix::from_codes(&[[1, 0], [0, 1]]).unwrap();
        assert_eq!(validity(&trivial).failed_checks(), vec!["faithful"]);
        let torsion = GenMatrix::from_codes(&[[2, 0], [0, 2]]).unwrap();
        assert_eq!(validity(&torsion).failed_checks(), vec!["torsion-free"]);
    }

    #[test]
    fn closure_checks_pass() {
        for id in ExampleId::ALL {
            assert!(closure(&id.matrix()).passed(), "{id}");
        }
    }

    #[test]
    fn kind_serializes_kebab() {
        let c = example(ExampleId::DeltaP);
        let v = serde_json::to_value(&c).unwrap();
        assert_eq!(v["type"], "example");
        assert_eq!(v["version"], 1);
    }
}
