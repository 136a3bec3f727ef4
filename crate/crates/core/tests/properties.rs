use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use diagflat::canonical::{canonical_key, ordered_bases};
use diagflat::diffuse::{betti1, delta_p_relations, nondiffuse_pipeline, PipelineStep};
use diagflat::reduction::{deletable_columns, irreducibility_certificate, reduce_fully};
use diagflat::search::{enumerate_bieberbach, search_irreducible, SearchOptions};
use diagflat::{eval_word, star_rows, validate, ExampleId, GenMatrix, Word};

fn random_matrix(rng: &mut ChaCha8Rng, k: usize, n: usize) -> GenMatrix {
    let rows: Vec<Vec<u8>> = (0..k)
        .map(|_| (0..n).map(|_| rng.gen_range(0..4)).collect())
        .collect();
    GenMatrix::from_codes(&rows).unwrap()
}

/// Rejection-samples a valid matrix; shapes without any are skipped.
fn random_valid(seed: u64, ks: std::ops::RangeInclusive<usize>, max_n: usize) -> GenMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let k = rng.gen_range(ks.clone());
        let n = rng.gen_range(k.max(2)..=max_n);
        for _ in 0..500 {
            let a = random_matrix(&mut rng, k, n);
            if validate(&a).is_valid() {
                return a;
            }
        }
    }
}

/// Sorted multiset of closure columns, each column sorted: invariant under
/// basis change and column permutation.
fn column_profile(a: &GenMatrix) -> Vec<Vec<u8>> {
    let c = a.closure();
    let mut cols: Vec<Vec<u8>> = (0..a.n())
        .map(|j| {
            let mut col: Vec<u8> = c.column(j).into_iter().map(u8::from).collect();
            col.sort();
            col
        })
        .collect();
    cols.sort();
    cols
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn closure_rows_agree_on_every_decomposition(seed in any::<u64>()) {
        let a = random_valid(seed, 2..=4, 9);
        let c = a.closure();
        for (v, row) in c.iter() {
            for u in 1..(1u32 << a.k()) {
                let w = v ^ u;
                if w == 0 || u == v {
                    continue;
                }
                prop_assert_eq!(&star_rows(c.row(u), c.row(w)).unwrap(), row);
            }
        }
    }

    #[test]
    fn validity_is_the_row_condition(seed in any::<u64>(), k in 1usize..=3, n in 1usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_matrix(&mut rng, k, n);
        let rows: Vec<Vec<u8>> = a.closure().iter().map(|(_, r)| r.codes()).collect();
        let expected = rows.iter().all(|r| r.contains(&1) && r.iter().any(|&x| x >= 2));
        prop_assert_eq!(validate(&a).is_valid(), expected);
    }

    #[test]
    fn column_count_law_on_valid_matrices(seed in any::<u64>()) {
        let a = random_valid(seed, 2..=4, 10);
        let k = a.k();
        let c = a.closure();
        for (j, count) in c.column_one_counts().into_iter().enumerate() {
            prop_assert!([0, 1 << (k - 2), 1 << (k - 1)].contains(&count));
            let no_one = c.column(j).iter().all(|&e| u8::from(e) != 1);
            prop_assert_eq!(count == 0, no_one);
            if count == 1 << (k - 1) {
                prop_assert!(c.column(j).iter().all(|&e| u8::from(e) <= 1));
            }
        }
    }

    #[test]
    fn canonical_key_separates_column_profiles(s1 in any::<u64>(), s2 in any::<u64>(), n in 1usize..=5) {
        let mut r1 = ChaCha8Rng::seed_from_u64(s1);
        let mut r2 = ChaCha8Rng::seed_from_u64(s2);
        let a = random_matrix(&mut r1, 2, n);
        let b = random_matrix(&mut r2, 2, n);
        if column_profile(&a) != column_profile(&b) {
            prop_assert_ne!(canonical_key(&a), canonical_key(&b));
        }
    }

    #[test]
    fn canonical_key_is_constant_on_orbits(seed in any::<u64>(), basis in 0usize..168) {
        let a = random_valid(seed, 3..=3, 7);
        let c = a.closure();
        let bases = ordered_bases(3);
        let rows = c.to_gen_rows(&bases[basis]);
        let mut cols: Vec<usize> = (0..a.n()).collect();
        cols.reverse();
        let b = GenMatrix::new(rows).unwrap().select_columns(&cols).unwrap();
        prop_assert_eq!(canonical_key(&a), canonical_key(&b));
    }

    #[test]
    fn irreducibility_criterion_matches_deletions(seed in any::<u64>()) {
        let a = random_valid(seed, 1..=3, 8);
        let deletable = deletable_columns(&a).unwrap();
        let cert = irreducibility_certificate(&a).unwrap();
        prop_assert_eq!(cert.is_some(), deletable.is_empty());
        if let Some(cert) = cert {
            cert.verify(&a).unwrap();
        }
    }

    #[test]
    fn reduction_steps_stay_torsion_free(seed in any::<u64>()) {
        let a = random_valid(seed, 1..=4, 10);
        let trace = reduce_fully(&a).unwrap();
        prop_assert_eq!(trace.replay().unwrap(), trace.final_matrix.clone());
        let mut m = a.clone();
        for step in &trace.steps {
            m = m.without_column(step.deleted_column).unwrap();
            prop_assert!(m.closure().is_torsion_free());
            if step.renormalized {
                m = diagflat::reduction::renormalize_holonomy(&m).unwrap();
                prop_assert!(m.closure().is_torsion_free());
            }
        }
    }

    #[test]
    fn c22_relations_are_trivial_when_b1_is_zero(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(3..=8);
        let a = loop {
            let a = random_matrix(&mut rng, 2, n);
            if validate(&a).is_valid() && betti1(&a).unwrap() == 0 {
                break a;
            }
        };
        let w = delta_p_relations(&a).unwrap();
        let gens = BTreeMap::from([("x".to_string(), w.alpha.clone()), ("y".to_string(), w.beta.clone())]);
        for rel in diagflat::diffuse::DELTA_P_RELATIONS {
            let word: Word = rel.parse().unwrap();
            let g = eval_word(&gens, &word).unwrap();
            prop_assert!(g.is_identity(), "{} = {}", rel, g);
        }
        prop_assert_eq!(w.independence_rank, 3);
    }
}

#[test]
fn every_valid_c22_matrix_with_four_or_five_columns_is_reducible() {
    for n in 4..=5 {
        let mut seen = 0;
        for a in enumerate_bieberbach(2, n, true).unwrap() {
            assert!(!deletable_columns(&a).unwrap().is_empty(), "{a:?}");
            seen += 1;
        }
        assert!(seen > 0);
    }
}

#[test]
fn enumeration_is_valid_and_canonically_distinct() {
    for (k, n) in [(2, 3), (2, 4), (2, 5), (3, 4)] {
        let found: Vec<GenMatrix> = enumerate_bieberbach(k, n, true).unwrap().collect();
        let mut keys: Vec<_> = found.iter().map(canonical_key).collect();
        assert!(found.iter().all(|a| validate(a).is_valid()));
        let len = keys.len();
        keys.sort();
        keys.dedup();
        assert_eq!(keys.len(), len, "k={k} n={n}");
    }
}

#[test]
fn search_digest_does_not_depend_on_jobs() {
    let run = |jobs| {
        search_irreducible(
            3,
            5,
            &SearchOptions {
                jobs: Some(jobs),
                allow_any: true,
                ..SearchOptions::default()
            },
        )
        .unwrap()
    };
    let one = run(1);
    assert!(one.irreducible_found > 0);
    assert_eq!(one, run(3));
}

#[test]
fn pipeline_invariants() {
    for id in [
        ExampleId::Min72,
        ExampleId::Lower(4),
        ExampleId::Min19,
        ExampleId::DeltaP,
    ] {
        let a = id.matrix();
        let trace = nondiffuse_pipeline(&a).unwrap();
        trace.verify().unwrap();
        let mut rank = a.k();
        let mut hyperplanes = 0;
        for step in &trace.steps {
            let m = step.matrix();
            assert_eq!(betti1(m).unwrap(), 0, "{id}");
            if let PipelineStep::HyperplaneRestriction(_) = step {
                assert!(m.k() < rank, "{id}");
                hyperplanes += 1;
            }
            rank = m.k();
        }
        assert!(hyperplanes <= a.k().saturating_sub(2), "{id}");
        assert_eq!(trace.terminal.matrix.k(), 2);
    }
}
