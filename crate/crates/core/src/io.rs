//! JSONL record formats for constraints and conflicts.
//!
//! Constraints serialize one per line with external identifiers:
//!
//! ```json
//! {"shape":"a","properties":["plays_for","plays_for"],"linkDirection":null,
//!  "head":"disjoint","restriction":{"y":"club","z":"club"},
//!  "support":9800,"positives":9600,"negatives":200,"unknowns":150,
//!  "confidence":0.9795918367346939}
//! ```
//!
//! `properties` holds `[p1, p2]` for shape `a` and `[link, p1, p2]` for
//! shape `b`. The same format is accepted as input for detect-only runs;
//! records naming properties or classes missing from the store are skipped
//! with a diagnostic.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detect::ConflictReport;
use crate::miner::{
    ClassRestriction, Constraint, GraphPattern, LinkDirection, Score, Slot,
};
use crate::store::KgStore;
use crate::TemporalPredicate;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintRecord {
    pub shape: String,
    pub properties: Vec<String>,
    #[serde(rename = "linkDirection")]
    pub link_direction: Option<String>,
    pub head: String,
    pub restriction: Option<BTreeMap<String, String>>,
    pub support: u64,
    pub positives: u64,
    pub negatives: u64,
    pub unknowns: u64,
    pub confidence: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ResolveError {
    #[error("unknown shape `{0}`")]
    UnknownShape(String),
    #[error("unknown head `{0}`")]
    UnknownHead(String),
    #[error("shape `{shape}` takes {expected} properties, found {found}")]
    BadPropertyCount { shape: String, expected: usize, found: usize },
    #[error("property `{0}` does not occur in the store")]
    UnknownProperty(String),
    #[error("class `{0}` does not occur in the store")]
    UnknownClass(String),
    #[error("slot `{0}` is not valid here")]
    BadSlot(String),
    #[error("linkDirection must be `forward` or `reversed`")]
    BadDirection,
    #[error("head `{0}` is not minable on linked-subjects patterns")]
    HeadNotApplicable(String),
}

impl ConstraintRecord {
    pub fn from_constraint(store: &KgStore, c: &Constraint) -> Self {
        let name = |r| store.resource_name(r).to_string();
        let (link_direction, properties) = match c.pattern {
            GraphPattern::SharedSubject { p1, p2 } => (None, vec![name(p1), name(p2)]),
            GraphPattern::LinkedSubjects { link, direction, p1, p2 } => (
                Some(direction.name().to_string()),
                vec![name(link), name(p1), name(p2)],
            ),
        };
        let restriction = c.restriction.as_ref().map(|r| {
            r.0.iter()
                .map(|(slot, class)| (slot.name().to_string(), name(*class)))
                .collect()
        });
        ConstraintRecord {
            shape: c.pattern.shape_tag().to_string(),
            properties,
            link_direction,
            head: c.head.name().to_string(),
            restriction,
            support: c.score.support(),
            positives: c.score.positives,
            negatives: c.score.negatives,
            unknowns: c.score.unknowns,
            confidence: c.score.confidence().unwrap_or(0.0),
        }
    }

    /// Bind the record's external identifiers against a store.
    pub fn resolve(&self, store: &KgStore) -> Result<Constraint, ResolveError> {
        let head: TemporalPredicate = self
            .head
            .parse()
            .map_err(|_| ResolveError::UnknownHead(self.head.clone()))?;
        let prop = |name: &String| {
            store
                .resource_id(name)
                .ok_or_else(|| ResolveError::UnknownProperty(name.clone()))
        };
        let expect = |n: usize| {
            if self.properties.len() == n {
                Ok(())
            } else {
                Err(ResolveError::BadPropertyCount {
                    shape: self.shape.clone(),
                    expected: n,
                    found: self.properties.len(),
                })
            }
        };
        let pattern = match self.shape.as_str() {
            "a" => {
                expect(2)?;
                GraphPattern::SharedSubject {
                    p1: prop(&self.properties[0])?,
                    p2: prop(&self.properties[1])?,
                }
            }
            "b" => {
                expect(3)?;
                if matches!(
                    head,
                    TemporalPredicate::Disjoint | TemporalPredicate::MutualExclusion
                ) {
                    return Err(ResolveError::HeadNotApplicable(self.head.clone()));
                }
                let direction = match self.link_direction.as_deref() {
                    Some("forward") => LinkDirection::Forward,
                    Some("reversed") => LinkDirection::Reversed,
                    _ => return Err(ResolveError::BadDirection),
                };
                GraphPattern::LinkedSubjects {
                    link: prop(&self.properties[0])?,
                    direction,
                    p1: prop(&self.properties[1])?,
                    p2: prop(&self.properties[2])?,
                }
            }
            other => return Err(ResolveError::UnknownShape(other.to_string())),
        };
        let restriction = match &self.restriction {
            None => None,
            Some(map) => {
                let mut r = ClassRestriction::default();
                for (slot_name, class_name) in map {
                    let slot = Slot::parse(slot_name)
                        .filter(|s| s.valid_for(&pattern))
                        .ok_or_else(|| ResolveError::BadSlot(slot_name.clone()))?;
                    let class = store
                        .resource_id(class_name)
                        .ok_or_else(|| ResolveError::UnknownClass(class_name.clone()))?;
                    r.0.insert(slot, class);
                }
                Some(r)
            }
        };
        Ok(Constraint {
            pattern,
            head,
            restriction,
            score: Score {
                positives: self.positives,
                negatives: self.negatives,
                unknowns: self.unknowns,
            },
        })
    }
}

/// Write constraints as JSONL, one record per line.
pub fn write_constraints<W: Write>(
    store: &KgStore,
    constraints: &[Constraint],
    mut w: W,
) -> std::io::Result<()> {
    for c in constraints {
        let record = ConstraintRecord::from_constraint(store, c);
        serde_json::to_writer(&mut w, &record)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

#[derive(Debug, Error)]
pub enum RecordReadError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Read a JSONL constraints file.
pub fn read_constraint_records<R: BufRead>(
    reader: R,
) -> Result<Vec<ConstraintRecord>, RecordReadError> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: ConstraintRecord =
            serde_json::from_str(&line).map_err(|e| RecordReadError::Malformed {
                line: idx + 1,
                message: e.to_string(),
            })?;
        out.push(record);
    }
    Ok(out)
}

/// Constraints that resolved, and the records that did not, each tagged
/// with their input index.
pub type ResolvedConstraints = (Vec<(usize, Constraint)>, Vec<(usize, ResolveError)>);

/// Resolve records against a store, splitting off the unresolvable ones
/// with their input index and reason.
pub fn resolve_constraints(store: &KgStore, records: &[ConstraintRecord]) -> ResolvedConstraints {
    let mut resolved = Vec::new();
    let mut skipped = Vec::new();
    for (i, record) in records.iter().enumerate() {
        match record.resolve(store) {
            Ok(c) => resolved.push((i, c)),
            Err(e) => skipped.push((i, e)),
        }
    }
    (resolved, skipped)
}

/// One fact of a conflict record; `ts`/`te` are absent for plain link
/// facts as well as for absent endpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactRecord {
    pub s: String,
    pub p: String,
    pub o: String,
    pub ts: Option<String>,
    pub te: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConflictRecord {
    pub constraint: usize,
    pub anchor: String,
    pub facts: Vec<FactRecord>,
    pub head: String,
    pub value: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub objects: Option<Vec<String>>,
}

impl ConflictRecord {
    /// Render a report; `constraint_index` lets the caller remap slice
    /// positions to input-file line numbers.
    pub fn from_report(store: &KgStore, report: &ConflictReport, constraint_index: usize) -> Self {
        let mut facts = Vec::new();
        if let Some(link_id) = report.link {
            let lf = store.plain_fact(link_id);
            facts.push(FactRecord {
                s: store.resource_name(lf.subject).to_string(),
                p: store.resource_name(lf.property).to_string(),
                o: store.object_repr(lf.object),
                ts: None,
                te: None,
            });
        }
        for &fid in &report.facts {
            let f = store.fact(fid);
            facts.push(FactRecord {
                s: store.resource_name(f.subject).to_string(),
                p: store.resource_name(f.property).to_string(),
                o: store.object_repr(f.object),
                ts: f.interval.start.map(|t| t.to_string()),
                te: f.interval.end.map(|t| t.to_string()),
            });
        }
        ConflictRecord {
            constraint: constraint_index,
            anchor: store.resource_name(report.anchor).to_string(),
            facts,
            head: report.head.name().to_string(),
            value: report.value.to_string(),
            objects: report
                .objects
                .as_ref()
                .map(|os| os.iter().map(|&o| store.object_repr(o)).collect()),
        }
    }
}

/// Write conflict reports as JSONL. `line_map` translates report indexes
/// into the caller's constraint numbering (identity when `None`).
pub fn write_conflicts<W: Write>(
    store: &KgStore,
    reports: &[ConflictReport],
    line_map: Option<&[usize]>,
    mut w: W,
) -> std::io::Result<()> {
    for r in reports {
        let index = match line_map {
            Some(map) => map[r.constraint_index],
            None => r.constraint_index,
        };
        let record = ConflictRecord::from_report(store, r, index);
        serde_json::to_writer(&mut w, &record)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::{ObjectRef, StoreBuilder};
    use crate::time::TimeInterval;

    fn store() -> KgStore {
        let mut b = StoreBuilder::new().with_class_property("instance_of");
        b.add_plain("t1", "instance_of", ObjectRef::Resource("club"));
        b.add_temporal(
            "a",
            "plays_for",
            ObjectRef::Resource("t1"),
            TimeInterval::parse_fields("1998", "2009").unwrap(),
        )
        .unwrap();
        b.add_plain("a", "knows", ObjectRef::Resource("b"));
        b.build()
    }

    fn record() -> ConstraintRecord {
        ConstraintRecord {
            shape: "a".into(),
            properties: vec!["plays_for".into(), "plays_for".into()],
            link_direction: None,
            head: "disjoint".into(),
            restriction: None,
            support: 5,
            positives: 4,
            negatives: 1,
            unknowns: 2,
            confidence: 0.8,
        }
    }

    #[test]
    fn records_round_trip_through_resolution() {
        let store = store();
        let mut rec = record();
        rec.restriction =
            Some([("y".to_string(), "club".to_string())].into_iter().collect());
        let constraint = rec.resolve(&store).unwrap();
        let back = ConstraintRecord::from_constraint(&store, &constraint);
        assert_eq!(back, rec);
    }

    #[test]
    fn resolution_rejects_vocabulary_mismatches() {
        let store = store();
        let mut unknown_prop = record();
        unknown_prop.properties[0] = "nope".into();
        assert!(matches!(unknown_prop.resolve(&store), Err(ResolveError::UnknownProperty(_))));

        let mut bad_shape = record();
        bad_shape.shape = "c".into();
        assert!(matches!(bad_shape.resolve(&store), Err(ResolveError::UnknownShape(_))));

        let mut bad_head = record();
        bad_head.head = "overlaps".into();
        assert!(matches!(bad_head.resolve(&store), Err(ResolveError::UnknownHead(_))));

        let mut bad_count = record();
        bad_count.properties.push("plays_for".into());
        assert!(matches!(bad_count.resolve(&store), Err(ResolveError::BadPropertyCount { .. })));

        let mut bad_slot = record();
        bad_slot.restriction =
            Some([("z1".to_string(), "club".to_string())].into_iter().collect());
        assert!(matches!(bad_slot.resolve(&store), Err(ResolveError::BadSlot(_))));

        let mut bad_class = record();
        bad_class.restriction =
            Some([("y".to_string(), "castle".to_string())].into_iter().collect());
        assert!(matches!(bad_class.resolve(&store), Err(ResolveError::UnknownClass(_))));

        let mut linked_disjoint = record();
        linked_disjoint.shape = "b".into();
        linked_disjoint.properties = vec!["knows".into(), "plays_for".into(), "plays_for".into()];
        linked_disjoint.link_direction = Some("forward".into());
        assert!(matches!(
            linked_disjoint.resolve(&store),
            Err(ResolveError::HeadNotApplicable(_))
        ));

        let mut bad_direction = linked_disjoint;
        bad_direction.head = "before".into();
        bad_direction.link_direction = Some("sideways".into());
        assert!(matches!(bad_direction.resolve(&store), Err(ResolveError::BadDirection)));
    }

    #[test]
    fn unresolvable_records_are_split_off_with_their_index() {
        let store = store();
        let mut bad = record();
        bad.properties[1] = "nope".into();
        let records = vec![record(), bad, record()];
        let (resolved, skipped) = resolve_constraints(&store, &records);
        assert_eq!(resolved.iter().map(|(i, _)| *i).collect::<Vec<_>>(), vec![0, 2]);
        assert_eq!(skipped.len(), 1);
        assert_eq!(skipped[0].0, 1);
    }
}
