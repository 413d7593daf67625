//! Class-restriction refinement of borderline candidates.
//!
//! Restrictions are built from classes actually observed on the candidate's
//! matched slots, capped per slot at the most frequent classes. Shared
//! subject patterns try single-slot restrictions plus the paired form
//! `class(y) = class(z) = c`; linked patterns try single slots only. Every
//! restricted variant is rescored on its restricted match subset.

use std::collections::{BTreeSet, HashMap};

use crate::store::{KgStore, ObjectTerm, ResourceId};

use super::matching::{self, ObjectRule};
use super::{ClassRestriction, Constraint, GraphPattern, MiningConfig, Slot};

#[derive(Default)]
struct SlotCounts(HashMap<ResourceId, u64>);

impl SlotCounts {
    fn observe_entity(&mut self, store: &KgStore, e: ResourceId) {
        for c in store.classes_of(e) {
            *self.0.entry(c).or_default() += 1;
        }
    }

    fn observe_object(&mut self, store: &KgStore, o: ObjectTerm) {
        if let Some(r) = o.as_resource() {
            self.observe_entity(store, r);
        }
    }

    /// Most frequent classes first; ties break on the smaller id.
    fn top(&self, cap: usize) -> Vec<ResourceId> {
        let mut ranked: Vec<(u64, ResourceId)> =
            self.0.iter().map(|(&c, &n)| (n, c)).collect();
        ranked.sort_unstable_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
        ranked.into_iter().take(cap).map(|(_, c)| c).collect()
    }
}

/// Classes observed per restrictable slot over the candidate's matches.
/// For equal-property shared pairs the two interchangeable object slots
/// share one pool; mutual-exclusion candidates observe over their evidence
/// facts instead of pair matches.
fn observe_slots(
    store: &KgStore,
    candidate: &Constraint,
    anchors: &[ResourceId],
) -> HashMap<Slot, SlotCounts> {
    let mut counts: HashMap<Slot, SlotCounts> = HashMap::new();
    let pattern = &candidate.pattern;
    match candidate.head.as_interval() {
        None => {
            for &anchor in anchors {
                if let Some(ev) = matching::me_evidence(store, anchor, pattern, None) {
                    counts.entry(Slot::X).or_default().observe_entity(store, anchor);
                    for fid in ev.facts {
                        let f = store.fact(fid);
                        let slot = match *pattern {
                            GraphPattern::SharedSubject { p1, p2 } if p1 != p2 => {
                                if f.property == p1 {
                                    Slot::Y
                                } else {
                                    Slot::Z
                                }
                            }
                            _ => Slot::Y,
                        };
                        counts.entry(slot).or_default().observe_object(store, f.object);
                    }
                }
            }
        }
        Some(_) => {
            let ordered = !candidate.head.is_symmetric();
            for &anchor in anchors {
                matching::for_each_match(
                    store,
                    pattern,
                    anchor,
                    ordered,
                    ObjectRule::RequireDistinct,
                    None,
                    |m| {
                        counts.entry(Slot::X).or_default().observe_entity(store, anchor);
                        match *pattern {
                            GraphPattern::SharedSubject { p1, p2 } => {
                                if p1 == p2 && !ordered {
                                    let pool = counts.entry(Slot::Y).or_default();
                                    pool.observe_object(store, m.f1.object);
                                    pool.observe_object(store, m.f2.object);
                                } else {
                                    counts
                                        .entry(Slot::Y)
                                        .or_default()
                                        .observe_object(store, m.f1.object);
                                    counts
                                        .entry(Slot::Z)
                                        .or_default()
                                        .observe_object(store, m.f2.object);
                                }
                            }
                            GraphPattern::LinkedSubjects { .. } => {
                                if let Some((_, linked)) = m.link {
                                    counts
                                        .entry(Slot::Y)
                                        .or_default()
                                        .observe_entity(store, linked);
                                }
                                counts
                                    .entry(Slot::Z1)
                                    .or_default()
                                    .observe_object(store, m.f1.object);
                                counts
                                    .entry(Slot::Z2)
                                    .or_default()
                                    .observe_object(store, m.f2.object);
                            }
                        }
                    },
                );
            }
        }
    }
    counts
}

/// Candidate restrictions for one borderline constraint.
fn candidate_restrictions(
    store: &KgStore,
    candidate: &Constraint,
    config: &MiningConfig,
    anchors: &[ResourceId],
) -> Vec<ClassRestriction> {
    let counts = observe_slots(store, candidate, anchors);
    let cap = config.max_classes_per_slot;
    let top = |slot: Slot| -> Vec<ResourceId> {
        counts.get(&slot).map_or_else(Vec::new, |c| c.top(cap))
    };
    let mut out: BTreeSet<ClassRestriction> = BTreeSet::new();
    for c in top(Slot::X) {
        out.insert(ClassRestriction::single(Slot::X, c));
    }
    match candidate.pattern {
        GraphPattern::SharedSubject { p1, p2 } => {
            let ys = top(Slot::Y);
            let zs = top(Slot::Z);
            if p1 == p2 && candidate.head.is_symmetric() {
                // interchangeable object slots share one pool; a single
                // restriction on z would duplicate the one on y
                for &c in &ys {
                    out.insert(ClassRestriction::single(Slot::Y, c));
                    out.insert(ClassRestriction::paired(c));
                }
            } else {
                for &c in &ys {
                    out.insert(ClassRestriction::single(Slot::Y, c));
                }
                for &c in &zs {
                    out.insert(ClassRestriction::single(Slot::Z, c));
                }
                for &c in &ys {
                    if zs.contains(&c) {
                        out.insert(ClassRestriction::paired(c));
                    }
                }
            }
        }
        GraphPattern::LinkedSubjects { .. } => {
            for slot in [Slot::Y, Slot::Z1, Slot::Z2] {
                for c in top(slot) {
                    out.insert(ClassRestriction::single(slot, c));
                }
            }
        }
    }
    out.into_iter().collect()
}

pub(crate) fn refine_with_anchors(
    store: &KgStore,
    candidate: &Constraint,
    config: &MiningConfig,
    anchors: &[ResourceId],
) -> Vec<Constraint> {
    debug_assert!(candidate.restriction.is_none());
    let mut out = Vec::new();
    for restriction in candidate_restrictions(store, candidate, config, anchors) {
        let score = super::score_over_anchors(
            store,
            &candidate.pattern,
            candidate.head,
            Some(&restriction),
            anchors,
        );
        if score.support() < u64::from(config.theta_freq) {
            continue;
        }
        if score.confidence().unwrap_or(0.0) < config.theta_accept {
            continue;
        }
        out.push(Constraint {
            pattern: candidate.pattern,
            head: candidate.head,
            restriction: Some(restriction),
            score,
        });
    }
    super::sort_constraints(store, &mut out);
    out
}
