use jsonschema::JSONSchema;
use serde_json::Value;

use diagflat::cert::{self, Certificate, SCHEMA};
use diagflat::search::enumerate_bieberbach;
use diagflat::vasquez::{n_d_report_with, ReportOptions};
use diagflat::{serialize_matrix, ExampleId, GenMatrix};

fn schema() -> JSONSchema {
    let schema: Value = serde_json::from_str(SCHEMA).unwrap();
    JSONSchema::compile(&schema).unwrap()
}

fn assert_conforms(c: &Certificate) {
    let value = serde_json::to_value(c).unwrap();
    let compiled = schema();
    let msgs: Vec<String> = match compiled.validate(&value) {
        Ok(()) => Vec::new(),
        Err(errors) => errors
            .map(|e| format!("{} at {}", e, e.instance_path))
            .collect(),
    };
    assert!(
        msgs.is_empty(),
        "{:?} certificate rejected: {msgs:?}",
        c.kind
    );
}

fn all_certificates() -> Vec<Certificate> {
    let mut out = Vec::new();
    for id in ExampleId::ALL {
        let a = id.matrix();
        out.push(cert::example(id));
        out.push(cert::validity(&a));
        out.push(cert::closure(&a));
        out.push(cert::reduction(&a).unwrap());
        out.push(cert::minimality(&a).unwrap());
        out.push(cert::classification(&a).unwrap());
    }
    for id in [ExampleId::Min19, ExampleId::DeltaP] {
        out.push(cert::witness(&id.matrix()).unwrap());
    }
    for id in [ExampleId::Min72, ExampleId::Lower(4)] {
        out.push(cert::pipeline(&id.matrix()).unwrap());
    }
    let opts = ReportOptions {
        sweep_samples: 1000,
        ..ReportOptions::default()
    };
    for k in [1, 2, 4, 6] {
        out.push(cert::vasquez(&n_d_report_with(k, &opts).unwrap()));
    }
    let found: Vec<GenMatrix> = enumerate_bieberbach(2, 3, true).unwrap().collect();
    out.push(cert::enumeration(2, 3, true, &found));
    out
}

#[test]
fn every_certificate_kind_conforms() {
    let certs = all_certificates();
    let mut kinds: Vec<_> = certs.iter().map(|c| c.kind).collect();
    kinds.dedup();
    assert!(kinds.len() >= 10);
    for c in &certs {
        assert_conforms(c);
    }
}

#[test]
fn embedded_examples_pass_every_check() {
    for c in all_certificates() {
        let informational = [
            "final-diagonal",
            "exact",
            "verdict-certified",
            "kernels-distinct",
            "certificate-verifies",
            "col-irreducible",
        ];
        let failed: Vec<_> = c
            .failed_checks()
            .into_iter()
            .filter(|n| !informational.contains(n))
            .collect();
        assert!(failed.is_empty(), "{:?}: {failed:?}", c.kind);
    }
}

#[test]
fn input_hash_is_the_matrix_text_hash() {
    let a = ExampleId::Min19.matrix();
    let c = cert::validity(&a);
    assert_eq!(c.input_hash, cert::input_hash(&serialize_matrix(&a)));
    assert_eq!(c.input_hash, cert::closure(&a).input_hash);
}

#[test]
fn schema_rejects_malformed_certificates() {
    let compiled = schema();
    let good = serde_json::to_value(cert::example(ExampleId::DeltaP)).unwrap();
    assert!(compiled.is_valid(&good));

    let mut bad_hash = good.clone();
    bad_hash["input_hash"] = Value::from("xyz");
    assert!(!compiled.is_valid(&bad_hash));

    let mut bad_type = good.clone();
    bad_type["type"] = Value::from("proof");
    assert!(!compiled.is_valid(&bad_type));

    let mut bad_check = good.clone();
    bad_check["checks"][0]["pass"] = Value::from("yes");
    assert!(!compiled.is_valid(&bad_check));

    let mut bad_entry = good.clone();
    bad_entry["payload"]["matrix"][0][0] = Value::from(4);
    assert!(!compiled.is_valid(&bad_entry));

    let mut missing = good;
    missing.as_object_mut().unwrap().remove("checks");
    assert!(!compiled.is_valid(&missing));
}

#[test]
fn certificates_round_trip_through_json() {
    for c in all_certificates() {
        let text = serde_json::to_string(&c).unwrap();
        let back: Certificate = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
    }
}

#[test]
fn lower_bound_examples_are_certified_minimal() {
    for k in 2..=5 {
        let c = cert::minimality(&ExampleId::Lower(k).matrix()).unwrap();
        assert!(c.passed(), "lower:k{k}: {:?}", c.failed_checks());
    }
    let c = cert::minimality(&ExampleId::Min19.matrix()).unwrap();
    assert_eq!(
        c.failed_checks(),
        vec![
            "col-irreducible",
            "kernels-distinct",
            "certificate-verifies"
        ]
    );
}
