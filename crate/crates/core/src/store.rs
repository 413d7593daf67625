//! Interned, immutable, index-backed store of temporal and plain facts.
//!
//! External identifiers are interned to dense ids at build time. The built
//! store is read-only and safe to share across threads; all accessors return
//! facts in fact-id order.

use std::collections::{HashMap, HashSet};
use std::io::{self, Write};

use serde::Serialize;

use crate::time::{IntervalBounds, TimeInterval};

/// Dense id of an interned IRI-like resource.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ResourceId(pub(crate) u32);

impl ResourceId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Dense id of an interned literal string.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LiteralId(pub(crate) u32);

/// Dense id of a temporal fact within one store.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FactId(pub(crate) u32);

impl FactId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Dense id of a plain (non-temporal) fact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PlainFactId(pub(crate) u32);

impl PlainFactId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Object position of a fact: a resource or an opaque literal. Literals
/// never participate in class refinement or link traversal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ObjectTerm {
    Resource(ResourceId),
    Literal(LiteralId),
}

impl ObjectTerm {
    pub fn as_resource(self) -> Option<ResourceId> {
        match self {
            ObjectTerm::Resource(r) => Some(r),
            ObjectTerm::Literal(_) => None,
        }
    }
}

/// Object argument for the builder API.
#[derive(Debug, Clone, Copy)]
pub enum ObjectRef<'a> {
    Resource(&'a str),
    Literal(&'a str),
}

/// A subject-property-object statement valid over a time interval.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemporalFact {
    pub id: FactId,
    pub subject: ResourceId,
    pub property: ResourceId,
    pub object: ObjectTerm,
    pub interval: TimeInterval,
}

/// A subject-property-object statement with no time attached.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlainFact {
    pub id: PlainFactId,
    pub subject: ResourceId,
    pub property: ResourceId,
    pub object: ObjectTerm,
}

#[derive(Debug, Default, Clone)]
struct Interner {
    map: HashMap<String, u32>,
    names: Vec<String>,
}

impl Interner {
    fn intern(&mut self, s: &str) -> u32 {
        if let Some(&id) = self.map.get(s) {
            return id;
        }
        let id = self.names.len() as u32;
        self.names.push(s.to_string());
        self.map.insert(s.to_string(), id);
        id
    }

    fn get(&self, s: &str) -> Option<u32> {
        self.map.get(s).copied()
    }

    fn name(&self, id: u32) -> &str {
        &self.names[id as usize]
    }

    fn len(&self) -> usize {
        self.names.len()
    }
}

impl PartialEq for Interner {
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names
    }
}

impl Eq for Interner {}

/// Compressed sparse rows: key -> sorted slice of u32 payloads.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct Csr {
    offsets: Vec<u32>,
    items: Vec<u32>,
}

impl Csr {
    fn build(num_keys: usize, mut pairs: Vec<(u32, u32)>) -> Self {
        pairs.sort_unstable();
        pairs.dedup();
        let mut offsets = vec![0u32; num_keys + 1];
        for &(k, _) in &pairs {
            offsets[k as usize + 1] += 1;
        }
        for i in 1..offsets.len() {
            offsets[i] += offsets[i - 1];
        }
        let items = pairs.into_iter().map(|(_, v)| v).collect();
        Self { offsets, items }
    }

    fn get(&self, key: u32) -> &[u32] {
        let k = key as usize;
        if k + 1 >= self.offsets.len() {
            return &[];
        }
        &self.items[self.offsets[k] as usize..self.offsets[k + 1] as usize]
    }
}

/// Summary counts of a built store.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct StoreStats {
    pub entities: u64,
    pub facts: u64,
    pub temporal_facts: u64,
    pub plain_facts: u64,
    pub properties: u64,
    pub temporal_properties: u64,
    pub plain_properties: u64,
    pub classes: u64,
    pub literals: u64,
}

/// Immutable fact store. Built once via [`StoreBuilder`]; every accessor is
/// read-only and the whole structure is `Sync`.
#[derive(Debug, Clone, PartialEq)]
pub struct KgStore {
    resources: Interner,
    literals: Interner,
    temporal: Vec<TemporalFact>,
    bounds: Vec<IntervalBounds>,
    plain: Vec<PlainFact>,
    class_property: Option<ResourceId>,
    t_by_subject: Csr,
    t_by_property: Csr,
    p_by_subject: Csr,
    p_by_object: Csr,
    classes: Csr,
    temporal_properties: Vec<ResourceId>,
    link_properties: Vec<ResourceId>,
    temporal_subjects: Vec<ResourceId>,
}

impl KgStore {
    pub fn resource_id(&self, name: &str) -> Option<ResourceId> {
        self.resources.get(name).map(ResourceId)
    }

    pub fn resource_name(&self, id: ResourceId) -> &str {
        self.resources.name(id.0)
    }

    pub fn literal_value(&self, id: LiteralId) -> &str {
        self.literals.name(id.0)
    }

    /// Render an object for output; literals carry a leading `"` marker,
    /// matching the fact-file convention.
    pub fn object_repr(&self, o: ObjectTerm) -> String {
        match o {
            ObjectTerm::Resource(r) => self.resource_name(r).to_string(),
            ObjectTerm::Literal(l) => format!("\"{}", self.literal_value(l)),
        }
    }

    pub fn num_resources(&self) -> usize {
        self.resources.len()
    }

    pub fn temporal_facts(&self) -> &[TemporalFact] {
        &self.temporal
    }

    pub fn plain_facts(&self) -> &[PlainFact] {
        &self.plain
    }

    pub fn fact(&self, id: FactId) -> &TemporalFact {
        &self.temporal[id.index()]
    }

    pub fn plain_fact(&self, id: PlainFactId) -> &PlainFact {
        &self.plain[id.index()]
    }

    /// Endpoint day ranges of a fact's interval, precomputed at build time.
    pub fn fact_bounds(&self, id: FactId) -> &IntervalBounds {
        &self.bounds[id.index()]
    }

    /// All temporal facts with the given subject, in fact-id order.
    pub fn temporal_facts_of(&self, subject: ResourceId) -> impl Iterator<Item = &TemporalFact> {
        self.t_by_subject.get(subject.0).iter().map(|&i| &self.temporal[i as usize])
    }

    /// Temporal facts with the given subject and property, in fact-id order.
    pub fn facts_of_subject_property(
        &self,
        subject: ResourceId,
        property: ResourceId,
    ) -> impl Iterator<Item = &TemporalFact> {
        self.temporal_facts_of(subject).filter(move |f| f.property == property)
    }

    /// All temporal facts with the given property, in fact-id order.
    pub fn facts_of_property(&self, property: ResourceId) -> impl Iterator<Item = &TemporalFact> {
        self.t_by_property.get(property.0).iter().map(|&i| &self.temporal[i as usize])
    }

    /// All plain facts with the given subject, in fact-id order.
    pub fn plain_facts_of(&self, subject: ResourceId) -> impl Iterator<Item = &PlainFact> {
        self.p_by_subject.get(subject.0).iter().map(|&i| &self.plain[i as usize])
    }

    /// Plain facts `(subject, p, o)` whose object is a resource: the link
    /// atoms available from `subject`.
    pub fn plain_facts_linking(&self, subject: ResourceId) -> impl Iterator<Item = &PlainFact> {
        self.plain_facts_of(subject).filter(|f| f.object.as_resource().is_some())
    }

    /// Plain facts `(s, p, object)` pointing at the given resource: link
    /// atoms reaching `object` in the reversed direction.
    pub fn plain_facts_linked_to(&self, object: ResourceId) -> impl Iterator<Item = &PlainFact> {
        self.p_by_object.get(object.0).iter().map(|&i| &self.plain[i as usize])
    }

    /// Classes of an entity: objects of its plain facts under the configured
    /// class-membership property. Empty when no class property was set.
    pub fn classes_of(&self, entity: ResourceId) -> impl Iterator<Item = ResourceId> + '_ {
        self.classes.get(entity.0).iter().map(|&c| ResourceId(c))
    }

    pub fn has_class(&self, entity: ResourceId, class: ResourceId) -> bool {
        self.classes.get(entity.0).binary_search(&class.0).is_ok()
    }

    pub fn class_property(&self) -> Option<ResourceId> {
        self.class_property
    }

    /// Distinct properties appearing on temporal facts, ascending by id.
    pub fn temporal_properties(&self) -> &[ResourceId] {
        &self.temporal_properties
    }

    /// Distinct properties of resource-object plain facts, ascending by id.
    pub fn link_properties(&self) -> &[ResourceId] {
        &self.link_properties
    }

    /// Subjects having at least one temporal fact, ascending by id.
    pub fn temporal_subjects(&self) -> &[ResourceId] {
        &self.temporal_subjects
    }

    pub fn stats(&self) -> StoreStats {
        let mut entities: HashSet<ResourceId> = HashSet::new();
        let mut t_props: HashSet<ResourceId> = HashSet::new();
        let mut p_props: HashSet<ResourceId> = HashSet::new();
        let mut classes: HashSet<u32> = HashSet::new();
        for f in &self.temporal {
            entities.insert(f.subject);
            if let ObjectTerm::Resource(r) = f.object {
                entities.insert(r);
            }
            t_props.insert(f.property);
        }
        for f in &self.plain {
            entities.insert(f.subject);
            if let ObjectTerm::Resource(r) = f.object {
                entities.insert(r);
            }
            p_props.insert(f.property);
        }
        classes.extend(self.classes.items.iter().copied());
        let all_props: HashSet<_> = t_props.union(&p_props).collect();
        StoreStats {
            entities: entities.len() as u64,
            facts: (self.temporal.len() + self.plain.len()) as u64,
            temporal_facts: self.temporal.len() as u64,
            plain_facts: self.plain.len() as u64,
            properties: all_props.len() as u64,
            temporal_properties: t_props.len() as u64,
            plain_properties: p_props.len() as u64,
            classes: classes.len() as u64,
            literals: self.literals.len() as u64,
        }
    }

    /// Write the store back out as TSV, temporal facts first, in fact-id
    /// order. Re-ingesting the output reproduces the store.
    pub fn export_tsv<W: Write>(&self, mut w: W) -> io::Result<()> {
        for f in &self.temporal {
            writeln!(
                w,
                "{}\t{}\t{}\t{}\t{}",
                self.resource_name(f.subject),
                self.resource_name(f.property),
                self.object_repr(f.object),
                f.interval.start_literal(),
                f.interval.end_literal(),
            )?;
        }
        for f in &self.plain {
            writeln!(
                w,
                "{}\t{}\t{}\t-\t-",
                self.resource_name(f.subject),
                self.resource_name(f.property),
                self.object_repr(f.object),
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AddOutcome {
    Added,
    Duplicate,
}

/// Error for a temporal fact whose interval cannot satisfy start <= end.
#[derive(Debug, Clone, thiserror::Error)]
#[error("interval {interval} has start after end")]
pub struct InvalidInterval {
    pub interval: TimeInterval,
}

/// Single-writer builder; [`StoreBuilder::build`] freezes the store.
#[derive(Debug, Default)]
pub struct StoreBuilder {
    resources: Interner,
    literals: Interner,
    temporal: Vec<TemporalFact>,
    plain: Vec<PlainFact>,
    seen_temporal: HashSet<(u32, u32, ObjectTerm, TimeInterval)>,
    seen_plain: HashSet<(u32, u32, ObjectTerm)>,
    class_property: Option<String>,
}

impl StoreBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Configure the property whose plain facts define class membership.
    pub fn with_class_property(mut self, property: &str) -> Self {
        self.class_property = Some(property.to_string());
        self
    }

    fn object(&mut self, o: ObjectRef<'_>) -> ObjectTerm {
        match o {
            ObjectRef::Resource(r) => ObjectTerm::Resource(ResourceId(self.resources.intern(r))),
            ObjectRef::Literal(l) => ObjectTerm::Literal(LiteralId(self.literals.intern(l))),
        }
    }

    /// Add a temporal fact. Exact duplicates (same subject, property,
    /// object, and interval) are stored once.
    pub fn add_temporal(
        &mut self,
        subject: &str,
        property: &str,
        object: ObjectRef<'_>,
        interval: TimeInterval,
    ) -> Result<AddOutcome, InvalidInterval> {
        if !interval.is_well_formed() {
            return Err(InvalidInterval { interval });
        }
        let s = self.resources.intern(subject);
        let p = self.resources.intern(property);
        let o = self.object(object);
        if !self.seen_temporal.insert((s, p, o, interval)) {
            return Ok(AddOutcome::Duplicate);
        }
        let id = FactId(self.temporal.len() as u32);
        self.temporal.push(TemporalFact {
            id,
            subject: ResourceId(s),
            property: ResourceId(p),
            object: o,
            interval,
        });
        Ok(AddOutcome::Added)
    }

    /// Add a plain fact; exact duplicate triples are stored once.
    pub fn add_plain(&mut self, subject: &str, property: &str, object: ObjectRef<'_>) -> AddOutcome {
        let s = self.resources.intern(subject);
        let p = self.resources.intern(property);
        let o = self.object(object);
        if !self.seen_plain.insert((s, p, o)) {
            return AddOutcome::Duplicate;
        }
        let id = PlainFactId(self.plain.len() as u32);
        self.plain.push(PlainFact {
            id,
            subject: ResourceId(s),
            property: ResourceId(p),
            object: o,
        });
        AddOutcome::Added
    }

    pub fn build(self) -> KgStore {
        let n = self.resources.len();
        let class_property = self.class_property.as_deref().and_then(|p| self.resources.get(p)).map(ResourceId);

        let bounds = self.temporal.iter().map(|f| f.interval.effective_bounds()).collect();

        let t_by_subject = Csr::build(
            n,
            self.temporal.iter().map(|f| (f.subject.0, f.id.0)).collect(),
        );
        let t_by_property = Csr::build(
            n,
            self.temporal.iter().map(|f| (f.property.0, f.id.0)).collect(),
        );
        let p_by_subject = Csr::build(
            n,
            self.plain.iter().map(|f| (f.subject.0, f.id.0)).collect(),
        );
        let p_by_object = Csr::build(
            n,
            self.plain
                .iter()
                .filter_map(|f| f.object.as_resource().map(|o| (o.0, f.id.0)))
                .collect(),
        );
        let classes = Csr::build(
            n,
            self.plain
                .iter()
                .filter(|f| Some(f.property) == class_property)
                .filter_map(|f| f.object.as_resource().map(|o| (f.subject.0, o.0)))
                .collect(),
        );

        let mut temporal_properties: Vec<ResourceId> = self
            .temporal
            .iter()
            .map(|f| f.property)
            .collect::<HashSet<_>>()
            .into_iter()
            .collect();
        temporal_properties.sort_unstable();
        let mut link_properties: Vec<ResourceId> = self
            .plain
            .iter()
            .filter(|f| f.object.as_resource().is_some())
            .map(|f| f.property)
            .collect::<HashSet<_>>()
            .into_iter()
            .collect();
        link_properties.sort_unstable();
        let mut temporal_subjects: Vec<ResourceId> = self
            .temporal
            .iter()
            .map(|f| f.subject)
            .collect::<HashSet<_>>()
            .into_iter()
            .collect();
        temporal_subjects.sort_unstable();

        KgStore {
            resources: self.resources,
            literals: self.literals,
            temporal: self.temporal,
            bounds,
            plain: self.plain,
            class_property,
            t_by_subject,
            t_by_property,
            p_by_subject,
            p_by_object,
            classes,
            temporal_properties,
            link_properties,
            temporal_subjects,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(s: &str, e: &str) -> TimeInterval {
        TimeInterval::parse_fields(s, e).unwrap()
    }

    fn small_store() -> KgStore {
        let mut b = StoreBuilder::new().with_class_property("instance_of");
        b.add_temporal("a", "plays_for", ObjectRef::Resource("t1"), iv("1998", "2001")).unwrap();
        b.add_temporal("a", "plays_for", ObjectRef::Resource("t2"), iv("2002", "2005")).unwrap();
        b.add_temporal("b", "plays_for", ObjectRef::Resource("t1"), iv("1990", "-")).unwrap();
        b.add_temporal("a", "award", ObjectRef::Literal("golden boot"), iv("2003", "2003")).unwrap();
        b.add_plain("a", "instance_of", ObjectRef::Resource("athlete"));
        b.add_plain("a", "instance_of", ObjectRef::Resource("coach"));
        b.add_plain("a", "knows", ObjectRef::Resource("b"));
        b.add_plain("a", "motto", ObjectRef::Literal("run fast"));
        b.build()
    }

    #[test]
    fn subject_index_returns_facts_in_id_order() {
        let s = small_store();
        let a = s.resource_id("a").unwrap();
        let ids: Vec<u32> = s.temporal_facts_of(a).map(|f| f.id.0).collect();
        assert_eq!(ids, vec![0, 1, 3]);
        let plays = s.resource_id("plays_for").unwrap();
        let ids: Vec<u32> = s.facts_of_subject_property(a, plays).map(|f| f.id.0).collect();
        assert_eq!(ids, vec![0, 1]);
    }

    #[test]
    fn unknown_subject_yields_nothing() {
        let s = small_store();
        let t1 = s.resource_id("t1").unwrap();
        assert_eq!(s.temporal_facts_of(t1).count(), 0);
    }

    #[test]
    fn property_index_covers_all_subjects() {
        let s = small_store();
        let plays = s.resource_id("plays_for").unwrap();
        assert_eq!(s.facts_of_property(plays).count(), 3);
    }

    #[test]
    fn classes_come_from_plain_facts_only() {
        let s = small_store();
        let a = s.resource_id("a").unwrap();
        let b = s.resource_id("b").unwrap();
        let names: Vec<&str> = s.classes_of(a).map(|c| s.resource_name(c)).collect();
        assert_eq!(names, vec!["athlete", "coach"]);
        assert_eq!(s.classes_of(b).count(), 0);
    }

    #[test]
    fn linking_skips_literal_objects() {
        let s = small_store();
        let a = s.resource_id("a").unwrap();
        let props: Vec<&str> = s
            .plain_facts_linking(a)
            .map(|f| s.resource_name(f.property))
            .collect();
        assert_eq!(props, vec!["instance_of", "instance_of", "knows"]);
        let b = s.resource_id("b").unwrap();
        assert_eq!(s.plain_facts_linked_to(b).count(), 1);
    }

    #[test]
    fn duplicates_are_stored_once() {
        let mut b = StoreBuilder::new();
        assert_eq!(
            b.add_temporal("s", "p", ObjectRef::Resource("o"), iv("2000", "2001")).unwrap(),
            AddOutcome::Added
        );
        assert_eq!(
            b.add_temporal("s", "p", ObjectRef::Resource("o"), iv("2000", "2001")).unwrap(),
            AddOutcome::Duplicate
        );
        // a different interval is a different quad
        assert_eq!(
            b.add_temporal("s", "p", ObjectRef::Resource("o"), iv("2000", "2002")).unwrap(),
            AddOutcome::Added
        );
        assert_eq!(b.add_plain("s", "q", ObjectRef::Resource("o")), AddOutcome::Added);
        assert_eq!(b.add_plain("s", "q", ObjectRef::Resource("o")), AddOutcome::Duplicate);
        let store = b.build();
        assert_eq!(store.temporal_facts().len(), 2);
        assert_eq!(store.plain_facts().len(), 1);
    }

    #[test]
    fn reversed_interval_is_rejected() {
        let mut b = StoreBuilder::new();
        assert!(b.add_temporal("s", "p", ObjectRef::Resource("o"), iv("2009", "2002")).is_err());
    }

    #[test]
    fn stats_count_the_expected_shapes() {
        let s = small_store().stats();
        assert_eq!(s.temporal_facts, 4);
        assert_eq!(s.plain_facts, 4);
        assert_eq!(s.temporal_properties, 2);
        assert_eq!(s.plain_properties, 3);
        assert_eq!(s.classes, 2);
        assert_eq!(s.literals, 2);
    }
}
