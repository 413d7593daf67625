//! Pattern instantiation: one pass over subjects and their neighborhoods
//! collects, for every realizable property combination, the anchors that can
//! host a body match. Combinations below the frequency threshold are
//! dropped.

use std::collections::{BTreeSet, HashMap};

use crate::store::{KgStore, ResourceId};

use super::{GraphPattern, LinkDirection};

pub(crate) struct PatternAnchors {
    pub pattern: GraphPattern,
    pub anchors: Vec<ResourceId>,
}

/// Distinct temporal properties of a subject together with whether the
/// property alone can host an equal-property pair (two facts with two
/// distinct objects).
fn subject_profile(store: &KgStore, s: ResourceId) -> Vec<(ResourceId, bool)> {
    let mut profile: Vec<(ResourceId, crate::store::ObjectTerm, bool)> = Vec::new();
    for f in store.temporal_facts_of(s) {
        match profile.iter_mut().find(|(p, _, _)| *p == f.property) {
            None => profile.push((f.property, f.object, false)),
            Some((_, first, multi)) => {
                if *first != f.object {
                    *multi = true;
                }
            }
        }
    }
    profile.into_iter().map(|(p, _, multi)| (p, multi)).collect()
}

pub(crate) fn instantiate_with_anchors(store: &KgStore, theta_freq: u32) -> Vec<PatternAnchors> {
    let mut shared: HashMap<(ResourceId, ResourceId), Vec<ResourceId>> = HashMap::new();
    let mut linked: HashMap<(ResourceId, LinkDirection, ResourceId, ResourceId), Vec<ResourceId>> =
        HashMap::new();

    for &s in store.temporal_subjects() {
        let profile = subject_profile(store, s);
        // shared-subject pairs, canonical order p1 <= p2
        for (i, &(pa, pair_ready)) in profile.iter().enumerate() {
            if pair_ready {
                shared.entry((pa, pa)).or_default().push(s);
            }
            for &(pb, _) in &profile[i + 1..] {
                let key = if pa <= pb { (pa, pb) } else { (pb, pa) };
                shared.entry(key).or_default().push(s);
            }
        }
        if profile.is_empty() {
            continue;
        }
        // linked-subjects triples anchored at s (s supplies p2)
        let own_props: Vec<ResourceId> = profile.iter().map(|&(p, _)| p).collect();
        let mut keys: BTreeSet<(ResourceId, LinkDirection, ResourceId, ResourceId)> =
            BTreeSet::new();
        let mut visit = |link: ResourceId, direction: LinkDirection, other: ResourceId| {
            if other == s {
                return;
            }
            let mut other_props: Vec<ResourceId> =
                store.temporal_facts_of(other).map(|f| f.property).collect();
            other_props.sort_unstable();
            other_props.dedup();
            for &p1 in &other_props {
                for &p2 in &own_props {
                    keys.insert((link, direction, p1, p2));
                }
            }
        };
        for lf in store.plain_facts_linking(s) {
            if let Some(y) = lf.object.as_resource() {
                visit(lf.property, LinkDirection::Forward, y);
            }
        }
        for lf in store.plain_facts_linked_to(s) {
            visit(lf.property, LinkDirection::Reversed, lf.subject);
        }
        for key in keys {
            linked.entry(key).or_default().push(s);
        }
    }

    let threshold = theta_freq as usize;
    let mut out: Vec<PatternAnchors> = Vec::new();

    let mut shared: Vec<_> = shared.into_iter().collect();
    shared.sort_unstable_by_key(|(k, _)| *k);
    for ((p1, p2), anchors) in shared {
        if anchors.len() >= threshold {
            // canonical slot order by property name, so the emitted
            // constraints do not depend on interning order
            let (p1, p2) = if store.resource_name(p1) <= store.resource_name(p2) {
                (p1, p2)
            } else {
                (p2, p1)
            };
            out.push(PatternAnchors {
                pattern: GraphPattern::SharedSubject { p1, p2 },
                anchors,
            });
        }
    }

    let mut linked: Vec<_> = linked.into_iter().collect();
    linked.sort_unstable_by_key(|(k, _)| *k);
    for ((link, direction, p1, p2), anchors) in linked {
        if anchors.len() >= threshold {
            out.push(PatternAnchors {
                pattern: GraphPattern::LinkedSubjects { link, direction, p1, p2 },
                anchors,
            });
        }
    }
    out
}
