//! Straight-line reference implementation of mining and detection.
//!
//! Everything here is recomputed from first principles with flat loops and
//! ordered maps: matches are materialized per candidate, verdicts are
//! collected into vectors before folding, predicates are evaluated from raw
//! intervals rather than precomputed bounds, and none of the engine's
//! indexes or streaming shortcuts are used. The outputs must agree with the
//! engine bit for bit; differential tests rely on that.

pub mod gen;

use std::collections::{BTreeMap, BTreeSet};

use tcmine_core::algebra::eval_predicate;
use tcmine_core::detect::ConflictReport;
use tcmine_core::miner::{
    sort_constraints, ClassRestriction, Constraint, GraphPattern, LinkDirection, MiningConfig,
    Score, Slot,
};
use tcmine_core::store::{FactId, KgStore, ObjectTerm, PlainFact, ResourceId, TemporalFact};
use tcmine_core::truth::TruthValue;
use tcmine_core::TemporalPredicate;

struct Graph<'a> {
    facts_by_subject: BTreeMap<ResourceId, Vec<&'a TemporalFact>>,
    links_from: BTreeMap<ResourceId, Vec<&'a PlainFact>>,
    links_to: BTreeMap<ResourceId, Vec<&'a PlainFact>>,
    classes: BTreeMap<ResourceId, BTreeSet<ResourceId>>,
}

fn build_graph(store: &KgStore) -> Graph<'_> {
    let mut g = Graph {
        facts_by_subject: BTreeMap::new(),
        links_from: BTreeMap::new(),
        links_to: BTreeMap::new(),
        classes: BTreeMap::new(),
    };
    for f in store.temporal_facts() {
        g.facts_by_subject.entry(f.subject).or_default().push(f);
    }
    for f in store.plain_facts() {
        if let ObjectTerm::Resource(o) = f.object {
            g.links_from.entry(f.subject).or_default().push(f);
            g.links_to.entry(o).or_default().push(f);
            if Some(f.property) == store.class_property() {
                g.classes.entry(f.subject).or_default().insert(o);
            }
        }
    }
    g
}

impl Graph<'_> {
    fn facts_of(&self, s: ResourceId, p: ResourceId) -> Vec<&TemporalFact> {
        self.facts_by_subject
            .get(&s)
            .map(|fs| fs.iter().copied().filter(|f| f.property == p).collect())
            .unwrap_or_default()
    }

    fn has_class(&self, e: ResourceId, c: ResourceId) -> bool {
        self.classes.get(&e).is_some_and(|cs| cs.contains(&c))
    }

    fn object_ok(&self, o: ObjectTerm, class: Option<ResourceId>) -> bool {
        match class {
            None => true,
            Some(c) => matches!(o, ObjectTerm::Resource(r) if self.has_class(r, c)),
        }
    }

    fn entity_ok(&self, e: ResourceId, class: Option<ResourceId>) -> bool {
        class.is_none_or(|c| self.has_class(e, c))
    }
}

#[derive(Clone, Copy)]
struct NMatch<'a> {
    f1: &'a TemporalFact,
    f2: &'a TemporalFact,
    link: Option<&'a PlainFact>,
    linked: Option<ResourceId>,
}

fn shared_matches<'a>(
    g: &'a Graph<'a>,
    anchor: ResourceId,
    p1: ResourceId,
    p2: ResourceId,
    ordered: bool,
    allow_equal_objects: bool,
) -> Vec<NMatch<'a>> {
    let mut out = Vec::new();
    if p1 == p2 {
        let facts = g.facts_of(anchor, p1);
        for i in 0..facts.len() {
            let js: Box<dyn Iterator<Item = usize>> = if ordered {
                Box::new((0..facts.len()).filter(move |&j| j != i))
            } else {
                Box::new(i + 1..facts.len())
            };
            for j in js {
                if !allow_equal_objects && facts[i].object == facts[j].object {
                    continue;
                }
                out.push(NMatch { f1: facts[i], f2: facts[j], link: None, linked: None });
            }
        }
    } else {
        for f1 in g.facts_of(anchor, p1) {
            for f2 in g.facts_of(anchor, p2) {
                out.push(NMatch { f1, f2, link: None, linked: None });
            }
        }
    }
    out
}

fn linked_matches<'a>(
    g: &'a Graph<'a>,
    anchor: ResourceId,
    link: ResourceId,
    direction: LinkDirection,
    p1: ResourceId,
    p2: ResourceId,
) -> Vec<NMatch<'a>> {
    let mut out = Vec::new();
    let empty = Vec::new();
    let link_facts = match direction {
        LinkDirection::Forward => g.links_from.get(&anchor).unwrap_or(&empty),
        LinkDirection::Reversed => g.links_to.get(&anchor).unwrap_or(&empty),
    };
    for lf in link_facts {
        if lf.property != link {
            continue;
        }
        let other = match direction {
            LinkDirection::Forward => match lf.object {
                ObjectTerm::Resource(r) => r,
                ObjectTerm::Literal(_) => continue,
            },
            LinkDirection::Reversed => lf.subject,
        };
        if other == anchor {
            continue;
        }
        for f1 in g.facts_of(other, p1) {
            for f2 in g.facts_of(anchor, p2) {
                out.push(NMatch { f1, f2, link: Some(lf), linked: Some(other) });
            }
        }
    }
    out
}

/// Restriction check. Equal-property unordered pairs satisfy the object
/// slots if either assignment of the two objects does.
fn match_satisfies(
    g: &Graph<'_>,
    pattern: &GraphPattern,
    anchor: ResourceId,
    m: &NMatch<'_>,
    r: &ClassRestriction,
    existential: bool,
) -> bool {
    if !g.entity_ok(anchor, r.get(Slot::X)) {
        return false;
    }
    match pattern {
        GraphPattern::SharedSubject { .. } => {
            let (ry, rz) = (r.get(Slot::Y), r.get(Slot::Z));
            let direct = g.object_ok(m.f1.object, ry) && g.object_ok(m.f2.object, rz);
            if existential {
                direct || (g.object_ok(m.f2.object, ry) && g.object_ok(m.f1.object, rz))
            } else {
                direct
            }
        }
        GraphPattern::LinkedSubjects { .. } => {
            g.entity_ok(m.linked.expect("linked match"), r.get(Slot::Y))
                && g.object_ok(m.f1.object, r.get(Slot::Z1))
                && g.object_ok(m.f2.object, r.get(Slot::Z2))
        }
    }
}

fn matches_for<'a>(
    g: &'a Graph<'a>,
    pattern: &GraphPattern,
    head: TemporalPredicate,
    anchor: ResourceId,
    restriction: Option<&ClassRestriction>,
    allow_equal_objects: bool,
) -> Vec<NMatch<'a>> {
    let ordered = !head.is_symmetric();
    let mut ms = match *pattern {
        GraphPattern::SharedSubject { p1, p2 } => {
            shared_matches(g, anchor, p1, p2, ordered, allow_equal_objects)
        }
        GraphPattern::LinkedSubjects { link, direction, p1, p2 } => {
            linked_matches(g, anchor, link, direction, p1, p2)
        }
    };
    if let Some(r) = restriction {
        let existential = matches!(*pattern, GraphPattern::SharedSubject { p1, p2 } if p1 == p2)
            && !ordered;
        ms.retain(|m| match_satisfies(g, pattern, anchor, m, r, existential));
    }
    ms
}

struct MeEntity {
    facts: Vec<FactId>,
    objects: Vec<ObjectTerm>,
    violated: bool,
}

/// Mutual-exclusion evidence of one entity: some fact pair (a single fact
/// may fill both atoms of an equal-property body) must satisfy the object
/// slots, interchangeably for equal properties; a satisfying pair with two
/// distinct objects is a violation.
fn me_entity(
    g: &Graph<'_>,
    anchor: ResourceId,
    p1: ResourceId,
    p2: ResourceId,
    restriction: Option<&ClassRestriction>,
) -> Option<MeEntity> {
    let empty = ClassRestriction::default();
    let r = restriction.unwrap_or(&empty);
    if !g.entity_ok(anchor, r.get(Slot::X)) {
        return None;
    }
    let side1 = g.facts_of(anchor, p1);
    let side2 = if p1 == p2 { side1.clone() } else { g.facts_of(anchor, p2) };
    let (ry, rz) = (r.get(Slot::Y), r.get(Slot::Z));
    let same = p1 == p2;
    let sat = |o1: ObjectTerm, o2: ObjectTerm| {
        let direct = g.object_ok(o1, ry) && g.object_ok(o2, rz);
        if same {
            direct || (g.object_ok(o2, ry) && g.object_ok(o1, rz))
        } else {
            direct
        }
    };
    let mut facts: BTreeSet<FactId> = BTreeSet::new();
    let mut violated = false;
    for a in &side1 {
        for b in &side2 {
            if sat(a.object, b.object) {
                facts.insert(a.id);
                facts.insert(b.id);
                if a.object != b.object {
                    violated = true;
                }
            }
        }
    }
    if facts.is_empty() {
        return None;
    }
    let objects: BTreeSet<ObjectTerm> = side1
        .iter()
        .chain(side2.iter())
        .filter(|f| facts.contains(&f.id))
        .map(|f| f.object)
        .collect();
    Some(MeEntity {
        facts: facts.into_iter().collect(),
        objects: objects.into_iter().collect(),
        violated,
    })
}

fn entity_verdict(values: &[TruthValue]) -> TruthValue {
    if values.contains(&TruthValue::Unknown) {
        TruthValue::Unknown
    } else if values.contains(&TruthValue::Negative) {
        TruthValue::Negative
    } else {
        TruthValue::Positive
    }
}

/// Entities that can carry evidence for a candidate: both properties for
/// interval heads and mutual exclusion alike (one suffices when equal).
fn evidence_entities(
    g: &Graph<'_>,
    pattern: &GraphPattern,
) -> Vec<ResourceId> {
    let mut out = Vec::new();
    match *pattern {
        GraphPattern::SharedSubject { p1, p2 } => {
            for (&s, facts) in &g.facts_by_subject {
                let has1 = facts.iter().any(|f| f.property == p1);
                let has2 = p1 == p2 || facts.iter().any(|f| f.property == p2);
                if has1 && has2 {
                    out.push(s);
                }
            }
        }
        GraphPattern::LinkedSubjects { p2, .. } => {
            for (&s, facts) in &g.facts_by_subject {
                if facts.iter().any(|f| f.property == p2) {
                    out.push(s);
                }
            }
        }
    }
    out
}

fn score_candidate(
    g: &Graph<'_>,
    pattern: &GraphPattern,
    head: TemporalPredicate,
    restriction: Option<&ClassRestriction>,
) -> Score {
    let mut score = Score::default();
    for anchor in evidence_entities(g, pattern) {
        match head.as_interval() {
            None => {
                let GraphPattern::SharedSubject { p1, p2 } = *pattern else {
                    continue;
                };
                if let Some(ev) = me_entity(g, anchor, p1, p2, restriction) {
                    score.add_verdict(if ev.violated {
                        TruthValue::Negative
                    } else {
                        TruthValue::Positive
                    });
                }
            }
            Some(_) => {
                let ms = matches_for(g, pattern, head, anchor, restriction, false);
                if ms.is_empty() {
                    continue;
                }
                let values: Vec<TruthValue> = ms
                    .iter()
                    .map(|m| eval_predicate(head, &m.f1.interval, &m.f2.interval).unwrap())
                    .collect();
                score.add_verdict(entity_verdict(&values));
            }
        }
    }
    score
}

/// Score one constraint by brute force.
pub fn naive_score(
    store: &KgStore,
    pattern: &GraphPattern,
    head: TemporalPredicate,
    restriction: Option<&ClassRestriction>,
) -> Score {
    score_candidate(&build_graph(store), pattern, head, restriction)
}

fn instantiate(store: &KgStore, g: &Graph<'_>, theta_freq: u32) -> Vec<GraphPattern> {
    let mut shared: BTreeMap<(ResourceId, ResourceId), u64> = BTreeMap::new();
    let mut linked: BTreeMap<(ResourceId, LinkDirection, ResourceId, ResourceId), BTreeSet<ResourceId>> =
        BTreeMap::new();
    for (&s, facts) in &g.facts_by_subject {
        let mut props: Vec<ResourceId> = facts.iter().map(|f| f.property).collect();
        props.sort_unstable();
        props.dedup();
        for (i, &pa) in props.iter().enumerate() {
            let objects: BTreeSet<ObjectTerm> = facts
                .iter()
                .filter(|f| f.property == pa)
                .map(|f| f.object)
                .collect();
            if objects.len() >= 2 {
                *shared.entry((pa, pa)).or_default() += 1;
            }
            for &pb in &props[i + 1..] {
                *shared.entry((pa, pb)).or_default() += 1;
            }
        }
        let mut link_ends: Vec<(ResourceId, LinkDirection, ResourceId)> = Vec::new();
        if let Some(ls) = g.links_from.get(&s) {
            for lf in ls {
                if let ObjectTerm::Resource(y) = lf.object {
                    link_ends.push((lf.property, LinkDirection::Forward, y));
                }
            }
        }
        if let Some(ls) = g.links_to.get(&s) {
            for lf in ls {
                link_ends.push((lf.property, LinkDirection::Reversed, lf.subject));
            }
        }
        for (p0, dir, other) in link_ends {
            if other == s {
                continue;
            }
            let Some(other_facts) = g.facts_by_subject.get(&other) else {
                continue;
            };
            let mut other_props: Vec<ResourceId> =
                other_facts.iter().map(|f| f.property).collect();
            other_props.sort_unstable();
            other_props.dedup();
            for &p1 in &other_props {
                for &p2 in &props {
                    linked.entry((p0, dir, p1, p2)).or_default().insert(s);
                }
            }
        }
    }
    let mut out = Vec::new();
    for ((p1, p2), count) in shared {
        if count >= u64::from(theta_freq) {
            // property slots ordered by name, matching the engine
            let (p1, p2) = if store.resource_name(p1) <= store.resource_name(p2) {
                (p1, p2)
            } else {
                (p2, p1)
            };
            out.push(GraphPattern::SharedSubject { p1, p2 });
        }
    }
    for ((link, direction, p1, p2), anchors) in linked {
        if anchors.len() as u64 >= u64::from(theta_freq) {
            out.push(GraphPattern::LinkedSubjects { link, direction, p1, p2 });
        }
    }
    out
}

fn shared_heads(config: &MiningConfig) -> Vec<TemporalPredicate> {
    config.predicates.clone()
}

fn linked_heads(config: &MiningConfig) -> Vec<TemporalPredicate> {
    config
        .predicates
        .iter()
        .copied()
        .filter(|p| !matches!(p, TemporalPredicate::Disjoint | TemporalPredicate::MutualExclusion))
        .collect()
}

fn variants(pattern: &GraphPattern, config: &MiningConfig) -> Vec<(GraphPattern, TemporalPredicate)> {
    let mut out = Vec::new();
    match *pattern {
        GraphPattern::SharedSubject { p1, p2 } => {
            for head in shared_heads(config) {
                out.push((GraphPattern::SharedSubject { p1, p2 }, head));
                if !head.is_symmetric() && p1 != p2 {
                    out.push((GraphPattern::SharedSubject { p1: p2, p2: p1 }, head));
                }
            }
        }
        GraphPattern::LinkedSubjects { .. } => {
            for head in linked_heads(config) {
                out.push((*pattern, head));
            }
        }
    }
    out
}

fn observe_and_enumerate_restrictions(
    g: &Graph<'_>,
    candidate: &Constraint,
    config: &MiningConfig,
) -> Vec<ClassRestriction> {
    let mut counts: BTreeMap<Slot, BTreeMap<ResourceId, u64>> = BTreeMap::new();
    let mut bump = |slot: Slot, classes: Option<&BTreeSet<ResourceId>>| {
        if let Some(cs) = classes {
            let slot_counts = counts.entry(slot).or_default();
            for &c in cs {
                *slot_counts.entry(c).or_default() += 1;
            }
        }
    };
    let pattern = &candidate.pattern;
    for anchor in evidence_entities(g, pattern) {
        match candidate.head.as_interval() {
            None => {
                let GraphPattern::SharedSubject { p1, p2 } = *pattern else { continue };
                if let Some(ev) = me_entity(g, anchor, p1, p2, None) {
                    bump(Slot::X, g.classes.get(&anchor));
                    for fid in ev.facts {
                        let f = g
                            .facts_by_subject
                            .get(&anchor)
                            .unwrap()
                            .iter()
                            .find(|f| f.id == fid)
                            .unwrap();
                        let slot = if p1 != p2 && f.property != p1 { Slot::Z } else { Slot::Y };
                        if let ObjectTerm::Resource(r) = f.object {
                            bump(slot, g.classes.get(&r));
                        }
                    }
                }
            }
            Some(_) => {
                for m in matches_for(g, pattern, candidate.head, anchor, None, false) {
                    bump(Slot::X, g.classes.get(&anchor));
                    match *pattern {
                        GraphPattern::SharedSubject { p1, p2 } => {
                            let pooled = p1 == p2 && candidate.head.is_symmetric();
                            let (s1, s2) = if pooled { (Slot::Y, Slot::Y) } else { (Slot::Y, Slot::Z) };
                            if let ObjectTerm::Resource(r) = m.f1.object {
                                bump(s1, g.classes.get(&r));
                            }
                            if let ObjectTerm::Resource(r) = m.f2.object {
                                bump(s2, g.classes.get(&r));
                            }
                        }
                        GraphPattern::LinkedSubjects { .. } => {
                            bump(Slot::Y, g.classes.get(&m.linked.unwrap()));
                            if let ObjectTerm::Resource(r) = m.f1.object {
                                bump(Slot::Z1, g.classes.get(&r));
                            }
                            if let ObjectTerm::Resource(r) = m.f2.object {
                                bump(Slot::Z2, g.classes.get(&r));
                            }
                        }
                    }
                }
            }
        }
    }
    let top = |slot: Slot| -> Vec<ResourceId> {
        let Some(slot_counts) = counts.get(&slot) else { return Vec::new() };
        let mut ranked: Vec<(u64, ResourceId)> =
            slot_counts.iter().map(|(&c, &n)| (n, c)).collect();
        ranked.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
        ranked.into_iter().take(config.max_classes_per_slot).map(|(_, c)| c).collect()
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

/// Candidate pool and accepted constraints of a full mining pass.
pub struct NaiveOutcome {
    pub candidates: Vec<Constraint>,
    pub accepted: Vec<Constraint>,
}

pub fn naive_mine(store: &KgStore, config: &MiningConfig) -> NaiveOutcome {
    config.validate().expect("caller validates");
    let g = build_graph(store);
    let mut candidates = Vec::new();
    let mut accepted = Vec::new();
    for pattern in instantiate(store, &g, config.theta_freq) {
        for (variant, head) in variants(&pattern, config) {
            let score = score_candidate(&g, &variant, head, None);
            if score.support() < u64::from(config.theta_freq) {
                continue;
            }
            let candidate = Constraint { pattern: variant, head, restriction: None, score };
            candidates.push(candidate.clone());
            let confidence = score.confidence().unwrap_or(0.0);
            if confidence >= config.theta_accept {
                accepted.push(candidate);
            } else if confidence >= config.theta_refine {
                for restriction in observe_and_enumerate_restrictions(&g, &candidate, config) {
                    let rescored = score_candidate(&g, &variant, head, Some(&restriction));
                    if rescored.support() >= u64::from(config.theta_freq)
                        && rescored.confidence().unwrap_or(0.0) >= config.theta_accept
                    {
                        accepted.push(Constraint {
                            pattern: variant,
                            head,
                            restriction: Some(restriction),
                            score: rescored,
                        });
                    }
                }
            }
        }
    }
    sort_constraints(store, &mut candidates);
    sort_constraints(store, &mut accepted);
    NaiveOutcome { candidates, accepted }
}

pub fn naive_detect(store: &KgStore, constraints: &[Constraint]) -> Vec<ConflictReport> {
    let g = build_graph(store);
    let mut reports = Vec::new();
    for (index, c) in constraints.iter().enumerate() {
        match c.head.as_interval() {
            None => {
                let GraphPattern::SharedSubject { p1, p2 } = c.pattern else { continue };
                for anchor in evidence_entities(&g, &c.pattern) {
                    if let Some(ev) = me_entity(&g, anchor, p1, p2, c.restriction.as_ref()) {
                        if ev.violated {
                            reports.push(ConflictReport {
                                constraint_index: index,
                                anchor,
                                facts: ev.facts,
                                link: None,
                                head: c.head,
                                value: TruthValue::Negative,
                                objects: Some(ev.objects),
                            });
                        }
                    }
                }
            }
            Some(_) => {
                for anchor in evidence_entities(&g, &c.pattern) {
                    for m in
                        matches_for(&g, &c.pattern, c.head, anchor, c.restriction.as_ref(), true)
                    {
                        let v = eval_predicate(c.head, &m.f1.interval, &m.f2.interval).unwrap();
                        if v == TruthValue::Negative {
                            reports.push(ConflictReport {
                                constraint_index: index,
                                anchor,
                                facts: vec![m.f1.id, m.f2.id],
                                link: m.link.map(|f| f.id),
                                head: c.head,
                                value: v,
                                objects: None,
                            });
                        }
                    }
                }
            }
        }
    }
    reports.sort_by(|a, b| {
        (a.constraint_index, a.anchor, &a.facts).cmp(&(b.constraint_index, b.anchor, &b.facts))
    });
    reports
}
