//! End-to-end invariants of mining and detection over generated graphs.

use std::io::Cursor;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tcmine_core::detect::detect;
use tcmine_core::fixture::{generate_to_string, FixtureConfig, CLASS_PROPERTY};
use tcmine_core::ingest::{ingest_reader, IngestConfig, InputFormat};
use tcmine_core::io::ConstraintRecord;
use tcmine_core::miner::{mine, score_constraint, MiningConfig};
use tcmine_core::store::{KgStore, ObjectRef, StoreBuilder};
use tcmine_core::time::TimeInterval;
use tcmine_core::TemporalPredicate;

fn ingest_tsv(tsv: &str) -> KgStore {
    let cfg = IngestConfig {
        class_property: Some(CLASS_PROPERTY.to_string()),
        ..Default::default()
    };
    ingest_reader(Cursor::new(tsv.as_bytes()), InputFormat::Tsv, &cfg)
        .unwrap()
        .0
}

fn mining_cfg() -> MiningConfig {
    MiningConfig { theta_freq: 20, ..Default::default() }
}

#[test]
fn mining_output_is_independent_of_input_order() {
    let fixture = FixtureConfig { size: 400, ..Default::default() };
    let (tsv, _) = generate_to_string(&fixture).unwrap();
    let store_a = ingest_tsv(&tsv);

    let mut lines: Vec<&str> = tsv.lines().collect();
    lines.shuffle(&mut ChaCha8Rng::seed_from_u64(99));
    let shuffled = lines.join("\n") + "\n";
    let store_b = ingest_tsv(&shuffled);

    let cfg = mining_cfg();
    let out_a = mine(&store_a, &cfg).unwrap();
    let out_b = mine(&store_b, &cfg).unwrap();

    let records = |store: &KgStore, cs: &[tcmine_core::miner::Constraint]| -> Vec<ConstraintRecord> {
        cs.iter().map(|c| ConstraintRecord::from_constraint(store, c)).collect()
    };
    assert_eq!(records(&store_a, &out_a.constraints), records(&store_b, &out_b.constraints));
    assert_eq!(records(&store_a, &out_a.candidates), records(&store_b, &out_b.candidates));
}

/// A symmetric constraint over two different properties must serialize the
/// same way no matter which property the ingest interned first.
#[test]
fn symmetric_cross_property_constraints_are_order_independent() {
    let mut lines: Vec<String> = Vec::new();
    for i in 0..40 {
        // playing and coaching spells of one person never overlap
        lines.push(format!("p{i}\tplays_in\tteam_a\t1990\t1999\n"));
        lines.push(format!("p{i}\tcoaches\tteam_b\t2001\t2009\n"));
    }
    let forward: String = lines.concat();
    let backward: String = lines.iter().rev().cloned().collect();

    let cfg = MiningConfig { theta_freq: 10, ..Default::default() };
    let mut outputs = Vec::new();
    for text in [&forward, &backward] {
        let store = ingest_tsv(text);
        let out = mine(&store, &cfg).unwrap();
        let disjoint: Vec<ConstraintRecord> = out
            .constraints
            .iter()
            .filter(|c| c.head == TemporalPredicate::Disjoint)
            .map(|c| ConstraintRecord::from_constraint(&store, c))
            .collect();
        assert_eq!(disjoint.len(), 1);
        outputs.push(disjoint);
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0][0].properties, vec!["coaches", "plays_in"]);
}

#[test]
fn accepted_constraints_pass_thresholds_under_rescoring() {
    let fixture = FixtureConfig { size: 600, ..Default::default() };
    let (tsv, _) = generate_to_string(&fixture).unwrap();
    let store = ingest_tsv(&tsv);
    let cfg = mining_cfg();
    let out = mine(&store, &cfg).unwrap();
    assert!(!out.constraints.is_empty());
    for c in &out.constraints {
        let rescored = score_constraint(&store, &c.pattern, c.head, c.restriction.as_ref());
        assert_eq!(rescored, c.score, "{}", c.identity(&store));
        assert!(rescored.support() >= u64::from(cfg.theta_freq));
        assert!(rescored.confidence().unwrap() >= cfg.theta_accept);
    }
}

#[test]
fn candidate_scores_match_independent_rescoring() {
    let fixture = FixtureConfig { size: 300, ..Default::default() };
    let (tsv, _) = generate_to_string(&fixture).unwrap();
    let store = ingest_tsv(&tsv);
    let out = mine(&store, &mining_cfg()).unwrap();
    for c in &out.candidates {
        let rescored = score_constraint(&store, &c.pattern, c.head, None);
        assert_eq!(rescored, c.score, "{}", c.identity(&store));
    }
}

/// Blanking any reported fact's interval removes that report: an absent
/// interval can evaluate to unknown at worst, never to a definite
/// violation.
#[test]
fn reports_vanish_when_their_interval_becomes_unknown() {
    let fixture = FixtureConfig { size: 250, ..Default::default() };
    let (tsv, _) = generate_to_string(&fixture).unwrap();
    let store = ingest_tsv(&tsv);
    let out = mine(&store, &mining_cfg()).unwrap();
    let detected = detect(&store, &out.constraints);
    let temporal_reports: Vec<_> = detected
        .reports
        .iter()
        .filter(|r| r.head != TemporalPredicate::MutualExclusion)
        .take(5)
        .collect();
    assert!(!temporal_reports.is_empty(), "fixture should contain conflicts");

    for report in temporal_reports {
        let blank = report.facts[0];
        let mut builder = StoreBuilder::new().with_class_property(CLASS_PROPERTY);
        for f in store.temporal_facts() {
            let interval = if f.id == blank { TimeInterval::default() } else { f.interval };
            let object = match f.object {
                tcmine_core::ObjectTerm::Resource(r) => {
                    ObjectRef::Resource(store.resource_name(r))
                }
                tcmine_core::ObjectTerm::Literal(l) => ObjectRef::Literal(store.literal_value(l)),
            };
            builder
                .add_temporal(
                    store.resource_name(f.subject),
                    store.resource_name(f.property),
                    object,
                    interval,
                )
                .unwrap();
        }
        for f in store.plain_facts() {
            let object = match f.object {
                tcmine_core::ObjectTerm::Resource(r) => {
                    ObjectRef::Resource(store.resource_name(r))
                }
                tcmine_core::ObjectTerm::Literal(l) => ObjectRef::Literal(store.literal_value(l)),
            };
            builder.add_plain(
                store.resource_name(f.subject),
                store.resource_name(f.property),
                object,
            );
        }
        let perturbed = builder.build();

        // same constraints, re-resolved against the perturbed store
        let records: Vec<ConstraintRecord> = out
            .constraints
            .iter()
            .map(|c| ConstraintRecord::from_constraint(&store, c))
            .collect();
        let resolved: Vec<_> = records
            .iter()
            .map(|r| r.resolve(&perturbed).unwrap())
            .collect();
        let after = detect(&perturbed, &resolved);

        let original_key = (
            report.constraint_index,
            store.resource_name(report.anchor).to_string(),
            report
                .facts
                .iter()
                .map(|&f| {
                    let fact = store.fact(f);
                    (
                        store.resource_name(fact.subject).to_string(),
                        store.object_repr(fact.object),
                        fact.interval,
                    )
                })
                .collect::<Vec<_>>(),
        );
        let still_there = after.reports.iter().any(|r| {
            let key = (
                r.constraint_index,
                perturbed.resource_name(r.anchor).to_string(),
                r.facts
                    .iter()
                    .map(|&f| {
                        let fact = perturbed.fact(f);
                        (
                            perturbed.resource_name(fact.subject).to_string(),
                            perturbed.object_repr(fact.object),
                            fact.interval,
                        )
                    })
                    .collect::<Vec<_>>(),
            );
            key == original_key
        });
        assert!(!still_there, "report should disappear once its interval is blanked");
    }
}
