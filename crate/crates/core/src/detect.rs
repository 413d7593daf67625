//! Conflict detection: apply accepted constraints back to a store and
//! report every matched subgraph whose head evaluates to a definite
//! violation.
//!
//! Interval heads report matches evaluating to `Negative`; undecidable
//! matches are suppressed (they reflect missing time information, not
//! inconsistency) but counted. Mutual-exclusion heads report one conflict
//! per anchor entity listing all distinct objects when two or more exist.
//!
//! Detection deliberately relaxes the distinct-objects rule that mining
//! applies to equal-property pairs: two facts re-asserting the same object
//! with incompatible intervals are exactly the kind of duplicate-entry
//! error worth surfacing, even though they never served as mining evidence.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::algebra::TemporalPredicate;
use crate::miner::Constraint;
use crate::par;
use crate::store::{FactId, KgStore, ObjectTerm, PlainFactId, ResourceId};
use crate::truth::TruthValue;

use crate::miner::matching;

/// One detected violation.
#[derive(Debug, Clone, PartialEq)]
pub struct ConflictReport {
    /// Index into the constraint slice given to [`detect`].
    pub constraint_index: usize,
    pub anchor: ResourceId,
    /// The temporal facts of the matched subgraph (both endpoints of a
    /// pair, or every admissible fact of a mutual-exclusion violation).
    pub facts: Vec<FactId>,
    /// Link fact for linked-subjects constraints.
    pub link: Option<PlainFactId>,
    pub head: TemporalPredicate,
    /// Head truth value; always `Negative` for reported conflicts.
    pub value: TruthValue,
    /// Distinct conflicting objects of a mutual-exclusion violation.
    pub objects: Option<Vec<ObjectTerm>>,
}

/// Reports plus per-constraint counts of suppressed undecidable matches.
#[derive(Debug, Clone, Default)]
pub struct DetectOutcome {
    pub reports: Vec<ConflictReport>,
    pub unknown_matches: Vec<u64>,
}

fn detect_one(store: &KgStore, index: usize, constraint: &Constraint) -> (Vec<ConflictReport>, u64) {
    let mut reports = Vec::new();
    let mut unknown = 0u64;
    let pattern = &constraint.pattern;
    let restriction = constraint.restriction.as_ref();
    let anchors = matching::candidate_anchor_pool(store, pattern, constraint.head);
    match constraint.head.as_interval() {
        None => {
            for &anchor in &anchors {
                if let Some(ev) = matching::me_evidence(store, anchor, pattern, restriction) {
                    if ev.violated {
                        reports.push(ConflictReport {
                            constraint_index: index,
                            anchor,
                            facts: ev.facts,
                            link: None,
                            head: constraint.head,
                            value: TruthValue::Negative,
                            objects: Some(ev.objects),
                        });
                    }
                }
            }
        }
        Some(p) => {
            let ordered = !constraint.head.is_symmetric();
            for &anchor in &anchors {
                matching::for_each_match(
                    store,
                    pattern,
                    anchor,
                    ordered,
                    matching::ObjectRule::AllowEqual,
                    restriction,
                    |m| {
                        let v = crate::algebra::eval_on_bounds(
                            p,
                            store.fact_bounds(m.f1.id),
                            store.fact_bounds(m.f2.id),
                        );
                        match v {
                            TruthValue::Negative => reports.push(ConflictReport {
                                constraint_index: index,
                                anchor,
                                facts: vec![m.f1.id, m.f2.id],
                                link: m.link.map(|(f, _)| f.id),
                                head: constraint.head,
                                value: v,
                                objects: None,
                            }),
                            TruthValue::Unknown => unknown += 1,
                            TruthValue::Positive => {}
                        }
                    },
                );
            }
        }
    }
    (reports, unknown)
}

/// Apply every constraint to the store. Reports come back sorted by
/// (constraint index, anchor, fact ids); symmetric-head fact pairs are
/// enumerated unordered, so one pair yields one report.
pub fn detect(store: &KgStore, constraints: &[Constraint]) -> DetectOutcome {
    let indexed: Vec<(usize, &Constraint)> = constraints.iter().enumerate().collect();
    let results = par::map_slice(&indexed, |(i, c)| detect_one(store, *i, c));
    let mut outcome = DetectOutcome::default();
    for (reports, unknown) in results {
        outcome.reports.extend(reports);
        outcome.unknown_matches.push(unknown);
    }
    outcome
        .reports
        .sort_by(|a, b| {
            (a.constraint_index, a.anchor, &a.facts).cmp(&(b.constraint_index, b.anchor, &b.facts))
        });
    outcome
}

/// Aggregate statistics over a set of reports.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ConflictStats {
    pub total: u64,
    /// (constraint index, conflict count) per constraint.
    pub per_constraint: Vec<(usize, u64)>,
    pub per_head: BTreeMap<String, u64>,
    /// Anchors with the most conflicts, descending,名 ties by name.
    pub top_entities: Vec<(String, u64)>,
}

pub fn summarize(
    store: &KgStore,
    num_constraints: usize,
    reports: &[ConflictReport],
    top_k: usize,
) -> ConflictStats {
    let mut per_constraint = vec![0u64; num_constraints];
    let mut per_head: BTreeMap<String, u64> = BTreeMap::new();
    let mut per_entity: BTreeMap<&str, u64> = BTreeMap::new();
    for r in reports {
        if let Some(slot) = per_constraint.get_mut(r.constraint_index) {
            *slot += 1;
        }
        *per_head.entry(r.head.name().to_string()).or_default() += 1;
        *per_entity.entry(store.resource_name(r.anchor)).or_default() += 1;
    }
    let mut ranked: Vec<(String, u64)> =
        per_entity.into_iter().map(|(e, n)| (e.to_string(), n)).collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(top_k);
    ConflictStats {
        total: reports.len() as u64,
        per_constraint: per_constraint.into_iter().enumerate().collect(),
        per_head,
        top_entities: ranked,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::miner::{ClassRestriction, Score, Slot};
    use crate::store::{ObjectRef, StoreBuilder};
    use crate::time::TimeInterval;

    fn iv(s: &str, e: &str) -> TimeInterval {
        TimeInterval::parse_fields(s, e).unwrap()
    }

    fn disjoint_constraint(store: &KgStore, prop: &str) -> Constraint {
        let p = store.resource_id(prop).unwrap();
        Constraint {
            pattern: GraphPattern::SharedSubject { p1: p, p2: p },
            head: TemporalPredicate::Disjoint,
            restriction: None,
            score: Score::default(),
        }
    }

    use crate::miner::GraphPattern;

    #[test]
    fn overlapping_stints_at_one_team_are_reported_once() {
        // two career facts for the same team whose intervals cannot both
        // hold under disjointness
        let mut b = StoreBuilder::new();
        b.add_temporal("player_1", "member_of", ObjectRef::Resource("squad_x"), iv("1998", "2009"))
            .unwrap();
        b.add_temporal("player_1", "member_of", ObjectRef::Resource("squad_x"), iv("2002", "-"))
            .unwrap();
        let store = b.build();
        let constraint = disjoint_constraint(&store, "member_of");
        let outcome = detect(&store, &[constraint]);
        assert_eq!(outcome.reports.len(), 1);
        let r = &outcome.reports[0];
        assert_eq!(store.resource_name(r.anchor), "player_1");
        assert_eq!(r.facts.len(), 2);
        assert_eq!(r.value, TruthValue::Negative);
    }

    #[test]
    fn clearly_ordered_intervals_are_not_conflicts() {
        let mut b = StoreBuilder::new();
        b.add_temporal("p", "member_of", ObjectRef::Resource("t1"), iv("1998", "2001")).unwrap();
        b.add_temporal("p", "member_of", ObjectRef::Resource("t2"), iv("2002", "-")).unwrap();
        let store = b.build();
        let constraint = disjoint_constraint(&store, "member_of");
        let outcome = detect(&store, &[constraint]);
        assert!(outcome.reports.is_empty());
        assert_eq!(outcome.unknown_matches, vec![0]);
    }

    #[test]
    fn unknown_matches_are_suppressed_but_counted() {
        let mut b = StoreBuilder::new();
        b.add_temporal("p", "member_of", ObjectRef::Resource("t1"), iv("1998", "-")).unwrap();
        b.add_temporal("p", "member_of", ObjectRef::Resource("t2"), iv("2002", "-")).unwrap();
        let store = b.build();
        let constraint = disjoint_constraint(&store, "member_of");
        let outcome = detect(&store, &[constraint]);
        assert!(outcome.reports.is_empty());
        assert_eq!(outcome.unknown_matches, vec![1]);
    }

    #[test]
    fn mutual_exclusion_lists_all_distinct_objects() {
        let mut b = StoreBuilder::new();
        b.add_temporal("p", "born_in", ObjectRef::Resource("city_a"), iv("1970-01-01", "1970-01-01"))
            .unwrap();
        b.add_temporal("p", "born_in", ObjectRef::Resource("city_b"), iv("1970-01-01", "1970-01-01"))
            .unwrap();
        b.add_temporal("q", "born_in", ObjectRef::Resource("city_a"), iv("1980-01-01", "1980-01-01"))
            .unwrap();
        let store = b.build();
        let born = store.resource_id("born_in").unwrap();
        let c = Constraint {
            pattern: GraphPattern::SharedSubject { p1: born, p2: born },
            head: TemporalPredicate::MutualExclusion,
            restriction: None,
            score: Score::default(),
        };
        let outcome = detect(&store, &[c]);
        assert_eq!(outcome.reports.len(), 1);
        let r = &outcome.reports[0];
        assert_eq!(store.resource_name(r.anchor), "p");
        assert_eq!(r.facts.len(), 2);
        let objects = r.objects.as_ref().unwrap();
        assert_eq!(objects.len(), 2);
    }

    #[test]
    fn restricted_constraints_never_report_outside_their_restriction() {
        let mut b = StoreBuilder::new().with_class_property("instance_of");
        b.add_plain("t1", "instance_of", ObjectRef::Resource("club"));
        // overlapping club facts: reported under the club restriction
        b.add_temporal("p", "member_of", ObjectRef::Resource("t1"), iv("1998", "2009")).unwrap();
        b.add_temporal("p", "member_of", ObjectRef::Resource("t2"), iv("2002", "2003")).unwrap();
        let store = b.build();
        let member = store.resource_id("member_of").unwrap();
        let club = store.resource_id("club").unwrap();
        let mut restricted = disjoint_constraint(&store, "member_of");
        restricted.restriction = Some(ClassRestriction(
            [(Slot::Y, club), (Slot::Z, club)].into_iter().collect(),
        ));
        let _ = member;
        let outcome = detect(&store, &[restricted]);
        // t2 has no class, so the pair fails the paired restriction
        assert!(outcome.reports.is_empty());
    }

    #[test]
    fn summary_counts_per_constraint_and_head() {
        let mut b = StoreBuilder::new();
        b.add_temporal("p", "member_of", ObjectRef::Resource("t1"), iv("1998", "2009")).unwrap();
        b.add_temporal("p", "member_of", ObjectRef::Resource("t2"), iv("2002", "2005")).unwrap();
        b.add_temporal("p", "member_of", ObjectRef::Resource("t3"), iv("2003", "2004")).unwrap();
        let store = b.build();
        let c1 = disjoint_constraint(&store, "member_of");
        let mut c2 = disjoint_constraint(&store, "member_of");
        c2.head = TemporalPredicate::Include;
        let outcome = detect(&store, &[c1, c2]);
        let stats = summarize(&store, 2, &outcome.reports, 10);
        assert_eq!(stats.total, outcome.reports.len() as u64);
        assert_eq!(stats.per_constraint.len(), 2);
        assert_eq!(
            stats.per_constraint.iter().map(|(_, n)| n).sum::<u64>(),
            stats.total
        );
        assert_eq!(stats.top_entities[0].0, "p");
        let empty = summarize(&store, 2, &[], 10);
        assert_eq!(empty.total, 0);
        assert_eq!(empty.per_constraint, vec![(0, 0), (1, 0)]);
    }
}
