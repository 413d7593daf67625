//! Body-match enumeration and per-anchor verdict computation.

use std::collections::BTreeSet;

use crate::algebra::{eval_on_bounds, TemporalPredicate};
use crate::store::{FactId, KgStore, ObjectTerm, PlainFact, PlainFactId, ResourceId, TemporalFact};
use crate::truth::TruthValue;

use super::{ClassRestriction, GraphPattern, Slot};

/// Object rule for equal-property shared-subject pairs. Mining requires the
/// two object variables to bind different things; conflict detection also
/// inspects pairs that re-assert the same object with incompatible
/// intervals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum ObjectRule {
    RequireDistinct,
    AllowEqual,
}

/// One enumerated body match (borrowed form used during streaming).
pub(crate) struct BodyMatch<'a> {
    pub f1: &'a TemporalFact,
    pub f2: &'a TemporalFact,
    /// Link fact and linked entity for linked-subjects patterns.
    pub link: Option<(&'a PlainFact, ResourceId)>,
}

impl BodyMatch<'_> {
    pub(crate) fn to_subgraph(&self, anchor: ResourceId) -> MatchedSubgraph {
        MatchedSubgraph {
            anchor,
            linked: self.link.map(|(_, y)| y),
            link: self.link.map(|(f, _)| f.id),
            fact1: self.f1.id,
            fact2: self.f2.id,
        }
    }
}

/// A materialized body match: the anchor entity, the linked entity and link
/// fact when the pattern spans two subjects, and the two temporal facts
/// supplying `t1` and `t2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchedSubgraph {
    pub anchor: ResourceId,
    pub linked: Option<ResourceId>,
    pub link: Option<PlainFactId>,
    pub fact1: FactId,
    pub fact2: FactId,
}

fn object_has_class(store: &KgStore, o: ObjectTerm, class: Option<ResourceId>) -> bool {
    match class {
        None => true,
        Some(c) => o.as_resource().is_some_and(|r| store.has_class(r, c)),
    }
}

fn entity_has_class(store: &KgStore, e: ResourceId, class: Option<ResourceId>) -> bool {
    match class {
        None => true,
        Some(c) => store.has_class(e, c),
    }
}

/// Restriction check for one shared-subject pair. For unordered
/// equal-property pairs the object slots are interchangeable, so the pair
/// satisfies `y`/`z` requirements if either assignment of the two objects
/// does.
fn shared_pair_satisfies(
    store: &KgStore,
    restriction: &ClassRestriction,
    anchor: ResourceId,
    o1: ObjectTerm,
    o2: ObjectTerm,
    existential: bool,
) -> bool {
    if !entity_has_class(store, anchor, restriction.get(Slot::X)) {
        return false;
    }
    let ry = restriction.get(Slot::Y);
    let rz = restriction.get(Slot::Z);
    let direct =
        object_has_class(store, o1, ry) && object_has_class(store, o2, rz);
    if existential {
        direct
            || (object_has_class(store, o2, ry) && object_has_class(store, o1, rz))
    } else {
        direct
    }
}

fn linked_match_satisfies(
    store: &KgStore,
    restriction: &ClassRestriction,
    anchor: ResourceId,
    linked: ResourceId,
    o1: ObjectTerm,
    o2: ObjectTerm,
) -> bool {
    entity_has_class(store, anchor, restriction.get(Slot::X))
        && entity_has_class(store, linked, restriction.get(Slot::Y))
        && object_has_class(store, o1, restriction.get(Slot::Z1))
        && object_has_class(store, o2, restriction.get(Slot::Z2))
}

/// Stream every body match of `pattern` anchored at `anchor`. `ordered`
/// selects directional-head enumeration (both orientations of an
/// equal-property pair) over unordered pairs.
pub(crate) fn for_each_match<'a, F>(
    store: &'a KgStore,
    pattern: &GraphPattern,
    anchor: ResourceId,
    ordered: bool,
    rule: ObjectRule,
    restriction: Option<&ClassRestriction>,
    mut f: F,
) where
    F: FnMut(BodyMatch<'a>),
{
    match *pattern {
        GraphPattern::SharedSubject { p1, p2 } => {
            let facts1: Vec<&TemporalFact> =
                store.facts_of_subject_property(anchor, p1).collect();
            let same_prop = p1 == p2;
            let existential = same_prop && !ordered;
            let keep = |a: &TemporalFact, b: &TemporalFact| -> bool {
                if same_prop && rule == ObjectRule::RequireDistinct && a.object == b.object {
                    return false;
                }
                match restriction {
                    None => true,
                    Some(r) => {
                        shared_pair_satisfies(store, r, anchor, a.object, b.object, existential)
                    }
                }
            };
            if same_prop {
                for (i, &a) in facts1.iter().enumerate() {
                    if ordered {
                        for (j, &b) in facts1.iter().enumerate() {
                            if i != j && keep(a, b) {
                                f(BodyMatch { f1: a, f2: b, link: None });
                            }
                        }
                    } else {
                        for &b in &facts1[i + 1..] {
                            if keep(a, b) {
                                f(BodyMatch { f1: a, f2: b, link: None });
                            }
                        }
                    }
                }
            } else {
                let facts2: Vec<&TemporalFact> =
                    store.facts_of_subject_property(anchor, p2).collect();
                for &a in &facts1 {
                    for &b in &facts2 {
                        if keep(a, b) {
                            f(BodyMatch { f1: a, f2: b, link: None });
                        }
                    }
                }
            }
        }
        GraphPattern::LinkedSubjects { link, direction, p1, p2 } => {
            let facts2: Vec<&TemporalFact> =
                store.facts_of_subject_property(anchor, p2).collect();
            if facts2.is_empty() {
                return;
            }
            let links: Vec<(&PlainFact, ResourceId)> = match direction {
                super::LinkDirection::Forward => store
                    .plain_facts_linking(anchor)
                    .filter(|lf| lf.property == link)
                    .filter_map(|lf| lf.object.as_resource().map(|y| (lf, y)))
                    .collect(),
                super::LinkDirection::Reversed => store
                    .plain_facts_linked_to(anchor)
                    .filter(|lf| lf.property == link)
                    .map(|lf| (lf, lf.subject))
                    .collect(),
            };
            for (lf, linked_entity) in links {
                if linked_entity == anchor {
                    continue;
                }
                for f1 in store.facts_of_subject_property(linked_entity, p1) {
                    for &f2 in &facts2 {
                        let ok = match restriction {
                            None => true,
                            Some(r) => linked_match_satisfies(
                                store,
                                r,
                                anchor,
                                linked_entity,
                                f1.object,
                                f2.object,
                            ),
                        };
                        if ok {
                            f(BodyMatch { f1, f2, link: Some((lf, linked_entity)) });
                        }
                    }
                }
            }
        }
    }
}

/// Evidence of one entity for a mutual-exclusion head: the admissible facts
/// of the property pair, their distinct objects, and whether a pair of
/// distinct objects violates uniqueness.
///
/// An entity provides evidence when some fact pair (allowing a single fact
/// to fill both atoms of an equal-property body) satisfies the restriction's
/// object slots, interchangeably when the properties are equal, and the
/// anchor satisfies its own slot. It violates when a satisfying pair binds
/// two distinct objects.
#[derive(Debug, Clone)]
pub(crate) struct MeEvidence {
    pub facts: Vec<FactId>,
    pub objects: Vec<ObjectTerm>,
    pub violated: bool,
}

pub(crate) fn me_evidence(
    store: &KgStore,
    anchor: ResourceId,
    pattern: &GraphPattern,
    restriction: Option<&ClassRestriction>,
) -> Option<MeEvidence> {
    let GraphPattern::SharedSubject { p1, p2 } = *pattern else {
        return None;
    };
    let empty = ClassRestriction::default();
    let r = restriction.unwrap_or(&empty);
    if !entity_has_class(store, anchor, r.get(Slot::X)) {
        return None;
    }
    let same_prop = p1 == p2;
    let side1: Vec<&TemporalFact> = store.facts_of_subject_property(anchor, p1).collect();
    let side2: Vec<&TemporalFact> = if same_prop {
        side1.clone()
    } else {
        store.facts_of_subject_property(anchor, p2).collect()
    };
    let ry = r.get(Slot::Y);
    let rz = r.get(Slot::Z);
    let sat = |o1: ObjectTerm, o2: ObjectTerm| -> bool {
        let direct = object_has_class(store, o1, ry) && object_has_class(store, o2, rz);
        if same_prop {
            direct || (object_has_class(store, o2, ry) && object_has_class(store, o1, rz))
        } else {
            direct
        }
    };

    let mut admissible: BTreeSet<FactId> = BTreeSet::new();
    let mut violated = false;
    for a in &side1 {
        for b in &side2 {
            if !sat(a.object, b.object) {
                continue;
            }
            admissible.insert(a.id);
            admissible.insert(b.id);
            if a.object != b.object {
                violated = true;
            }
        }
    }
    if admissible.is_empty() {
        return None;
    }
    let mut objects: BTreeSet<ObjectTerm> = BTreeSet::new();
    for id in &admissible {
        objects.insert(store.fact(*id).object);
    }
    Some(MeEvidence {
        facts: admissible.into_iter().collect(),
        objects: objects.into_iter().collect(),
        violated,
    })
}

/// Verdict of one anchor for one candidate, or `None` when the anchor has
/// no (restricted) matches and contributes no evidence.
pub(crate) fn anchor_verdict(
    store: &KgStore,
    pattern: &GraphPattern,
    head: TemporalPredicate,
    restriction: Option<&ClassRestriction>,
    anchor: ResourceId,
) -> Option<TruthValue> {
    match head.as_interval() {
        None => me_evidence(store, anchor, pattern, restriction).map(|ev| {
            if ev.violated {
                TruthValue::Negative
            } else {
                TruthValue::Positive
            }
        }),
        Some(p) => {
            let mut any = false;
            let mut saw_unknown = false;
            let mut saw_negative = false;
            for_each_match(
                store,
                pattern,
                anchor,
                !head.is_symmetric(),
                ObjectRule::RequireDistinct,
                restriction,
                |m| {
                    any = true;
                    if saw_unknown {
                        return;
                    }
                    match eval_on_bounds(
                        p,
                        store.fact_bounds(m.f1.id),
                        store.fact_bounds(m.f2.id),
                    ) {
                        TruthValue::Unknown => saw_unknown = true,
                        TruthValue::Negative => saw_negative = true,
                        TruthValue::Positive => {}
                    }
                },
            );
            if !any {
                None
            } else if saw_unknown {
                Some(TruthValue::Unknown)
            } else if saw_negative {
                Some(TruthValue::Negative)
            } else {
                Some(TruthValue::Positive)
            }
        }
    }
}

fn subjects_of_property(store: &KgStore, p: ResourceId) -> Vec<ResourceId> {
    let mut subjects: Vec<ResourceId> = store.facts_of_property(p).map(|f| f.subject).collect();
    subjects.sort_unstable();
    subjects.dedup();
    subjects
}

fn intersect_sorted(a: Vec<ResourceId>, b: &[ResourceId]) -> Vec<ResourceId> {
    a.into_iter()
        .filter(|x| b.binary_search(x).is_ok())
        .collect()
}

/// Anchor entities that can possibly contribute evidence for a candidate:
/// for interval heads, subjects carrying both properties (one suffices when
/// equal); for mutual exclusion, every entity with facts for the property
/// pair. A superset is fine; anchors without matches score nothing.
pub(crate) fn candidate_anchor_pool(
    store: &KgStore,
    pattern: &GraphPattern,
    _head: TemporalPredicate,
) -> Vec<ResourceId> {
    match *pattern {
        GraphPattern::SharedSubject { p1, p2 } => {
            let s1 = subjects_of_property(store, p1);
            if p1 == p2 {
                s1
            } else {
                let s2 = subjects_of_property(store, p2);
                intersect_sorted(s1, &s2)
            }
        }
        GraphPattern::LinkedSubjects { p2, .. } => subjects_of_property(store, p2),
    }
}
