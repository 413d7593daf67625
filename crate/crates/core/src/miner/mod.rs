//! Constraint mining.
//!
//! Two structural patterns are instantiated against the store:
//!
//! * **shared subject**: two temporal facts on one subject `x`:
//!   `(x, p1, y, t1), (x, p2, z, t2)`. When `p1 = p2` the two facts must be
//!   distinct and carry different objects.
//! * **linked subjects**: a plain link fact connects the anchor `x` to a
//!   second subject `y` carrying the first temporal fact:
//!   `(x, p0, y), (y, p1, z1, t1), (x, p2, z2, t2)`; the link may also run
//!   in the reversed direction `(y, p0, x)`.
//!
//! Each instantiated pattern is combined with head predicates to form
//! candidate constraints. Candidates are scored by entity-level confidence:
//! an anchor entity is positive when every one of its body matches satisfies
//! the head, unknown when any match is undecidable, negative otherwise, and
//! `confidence = positives / (positives + negatives)` with unknowns dropped.
//! Candidates in the refinement band are narrowed with class restrictions on
//! the pattern slots and kept only when a restricted variant clears both the
//! support and acceptance thresholds.

mod instantiate;
pub(crate) mod matching;
mod refine;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::algebra::TemporalPredicate;
use crate::par;
use crate::store::{KgStore, ResourceId};
use crate::truth::TruthValue;

pub use matching::MatchedSubgraph;

/// Orientation of the link atom in a linked-subjects pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LinkDirection {
    /// Link fact is `(anchor, p0, linked)`.
    Forward,
    /// Link fact is `(linked, p0, anchor)`.
    Reversed,
}

impl LinkDirection {
    pub fn name(self) -> &'static str {
        match self {
            LinkDirection::Forward => "forward",
            LinkDirection::Reversed => "reversed",
        }
    }
}

/// A structural pattern with its property slots bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GraphPattern {
    /// Two temporal facts sharing a subject; `p1` supplies `t1`, `p2`
    /// supplies `t2`.
    SharedSubject { p1: ResourceId, p2: ResourceId },
    /// A plain link plus one temporal fact on each end; `p1` holds on the
    /// linked entity, `p2` on the anchor.
    LinkedSubjects {
        link: ResourceId,
        direction: LinkDirection,
        p1: ResourceId,
        p2: ResourceId,
    },
}

impl GraphPattern {
    pub fn shape_tag(&self) -> &'static str {
        match self {
            GraphPattern::SharedSubject { .. } => "a",
            GraphPattern::LinkedSubjects { .. } => "b",
        }
    }

    /// Property ids in record order: `[p1, p2]` or `[link, p1, p2]`.
    pub fn properties(&self) -> Vec<ResourceId> {
        match *self {
            GraphPattern::SharedSubject { p1, p2 } => vec![p1, p2],
            GraphPattern::LinkedSubjects { link, p1, p2, .. } => vec![link, p1, p2],
        }
    }
}

/// Variable slot of a pattern that a class restriction may bind.
/// Shared-subject patterns expose `x`, `y`, `z`; linked patterns expose
/// `x`, `y`, `z1`, `z2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slot {
    X,
    Y,
    Z,
    Z1,
    Z2,
}

impl Slot {
    pub fn name(self) -> &'static str {
        match self {
            Slot::X => "x",
            Slot::Y => "y",
            Slot::Z => "z",
            Slot::Z1 => "z1",
            Slot::Z2 => "z2",
        }
    }

    pub fn parse(s: &str) -> Option<Slot> {
        match s {
            "x" => Some(Slot::X),
            "y" => Some(Slot::Y),
            "z" => Some(Slot::Z),
            "z1" => Some(Slot::Z1),
            "z2" => Some(Slot::Z2),
            _ => None,
        }
    }

    pub fn valid_for(self, pattern: &GraphPattern) -> bool {
        match pattern {
            GraphPattern::SharedSubject { .. } => matches!(self, Slot::X | Slot::Y | Slot::Z),
            GraphPattern::LinkedSubjects { .. } => {
                matches!(self, Slot::X | Slot::Y | Slot::Z1 | Slot::Z2)
            }
        }
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Map from pattern slots to required classes.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClassRestriction(pub BTreeMap<Slot, ResourceId>);

impl ClassRestriction {
    pub fn single(slot: Slot, class: ResourceId) -> Self {
        ClassRestriction(BTreeMap::from([(slot, class)]))
    }

    pub fn paired(class: ResourceId) -> Self {
        ClassRestriction(BTreeMap::from([(Slot::Y, class), (Slot::Z, class)]))
    }

    pub fn get(&self, slot: Slot) -> Option<ResourceId> {
        self.0.get(&slot).copied()
    }
}

/// Positive / negative / unknown entity counts of one candidate.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Score {
    pub positives: u64,
    pub negatives: u64,
    pub unknowns: u64,
}

impl Score {
    /// Decided evidence: entities counted toward the confidence denominator.
    pub fn support(&self) -> u64 {
        self.positives + self.negatives
    }

    /// `positives / (positives + negatives)`; `None` without decided
    /// evidence.
    pub fn confidence(&self) -> Option<f64> {
        let support = self.support();
        if support == 0 {
            None
        } else {
            Some(self.positives as f64 / support as f64)
        }
    }

    pub fn add_verdict(&mut self, v: TruthValue) {
        match v {
            TruthValue::Positive => self.positives += 1,
            TruthValue::Negative => self.negatives += 1,
            TruthValue::Unknown => self.unknowns += 1,
        }
    }

    pub fn from_verdicts<I: IntoIterator<Item = TruthValue>>(verdicts: I) -> Self {
        let mut s = Score::default();
        for v in verdicts {
            s.add_verdict(v);
        }
        s
    }
}

/// A scored constraint: pattern body, head predicate, optional class
/// restriction, and its evidence counts.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub pattern: GraphPattern,
    pub head: TemporalPredicate,
    pub restriction: Option<ClassRestriction>,
    pub score: Score,
}

impl Constraint {
    pub fn confidence(&self) -> f64 {
        self.score.confidence().unwrap_or(0.0)
    }

    /// Stable textual identity (no scores), used for canonical ordering and
    /// set comparisons across runs.
    pub fn identity(&self, store: &KgStore) -> String {
        let mut s = format!("{}|", self.pattern.shape_tag());
        match self.pattern {
            GraphPattern::SharedSubject { p1, p2 } => {
                s.push_str(store.resource_name(p1));
                s.push('|');
                s.push_str(store.resource_name(p2));
                s.push_str("|-");
            }
            GraphPattern::LinkedSubjects { link, direction, p1, p2 } => {
                s.push_str(store.resource_name(link));
                s.push('|');
                s.push_str(store.resource_name(p1));
                s.push('|');
                s.push_str(store.resource_name(p2));
                s.push('|');
                s.push_str(direction.name());
            }
        }
        s.push('|');
        s.push_str(self.head.name());
        s.push('|');
        match &self.restriction {
            None => s.push('-'),
            Some(r) => {
                for (i, (slot, class)) in r.0.iter().enumerate() {
                    if i > 0 {
                        s.push(',');
                    }
                    s.push_str(slot.name());
                    s.push(':');
                    s.push_str(store.resource_name(*class));
                }
            }
        }
        s
    }
}

/// Sort constraints by confidence, then support, both descending, with the
/// textual identity as the final tie-break.
pub fn sort_constraints(store: &KgStore, constraints: &mut Vec<Constraint>) {
    let mut keyed: Vec<(f64, u64, String, Constraint)> = constraints
        .drain(..)
        .map(|c| (c.confidence(), c.score.support(), c.identity(store), c))
        .collect();
    keyed.sort_by(|a, b| {
        b.0.total_cmp(&a.0)
            .then_with(|| b.1.cmp(&a.1))
            .then_with(|| a.2.cmp(&b.2))
    });
    *constraints = keyed.into_iter().map(|(_, _, _, c)| c).collect();
}

/// Mining thresholds and the head predicates to try.
#[derive(Debug, Clone)]
pub struct MiningConfig {
    /// Minimum support for instantiated patterns and candidates.
    pub theta_freq: u32,
    /// Confidence at or above which a candidate is accepted outright.
    pub theta_accept: f64,
    /// Confidence floor below `theta_accept` at which refinement is tried;
    /// candidates below it are discarded.
    pub theta_refine: f64,
    /// Cap on the classes enumerated per slot during refinement, most
    /// frequent first.
    pub max_classes_per_slot: usize,
    /// Head predicates to try. Linked-subjects patterns never take
    /// `disjoint` (cross-subject disjointness blows up the search space for
    /// little value) nor `mutual_exclusion` (undefined across two subjects).
    pub predicates: Vec<TemporalPredicate>,
}

impl Default for MiningConfig {
    fn default() -> Self {
        Self {
            theta_freq: 20,
            theta_accept: 0.9,
            theta_refine: 0.5,
            max_classes_per_slot: 50,
            predicates: TemporalPredicate::ALL.to_vec(),
        }
    }
}

impl MiningConfig {
    pub fn validate(&self) -> Result<(), MiningError> {
        if self.theta_freq < 1 {
            return Err(MiningError::BadFrequencyThreshold);
        }
        let (r, a) = (self.theta_refine, self.theta_accept);
        if !(0.0..=1.0).contains(&r) || !(0.0..=1.0).contains(&a) || r > a {
            return Err(MiningError::BadThresholds { refine: r, accept: a });
        }
        Ok(())
    }

    fn heads_for_shared(&self) -> Vec<TemporalPredicate> {
        self.predicates.clone()
    }

    fn heads_for_linked(&self) -> Vec<TemporalPredicate> {
        self.predicates
            .iter()
            .copied()
            .filter(|p| {
                !matches!(
                    p,
                    TemporalPredicate::Disjoint | TemporalPredicate::MutualExclusion
                )
            })
            .collect()
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MiningError {
    #[error("theta_freq must be at least 1")]
    BadFrequencyThreshold,
    #[error("thresholds must satisfy 0 <= theta_refine <= theta_accept <= 1 (refine={refine}, accept={accept})")]
    BadThresholds { refine: f64, accept: f64 },
    #[error("cannot evaluate an empty match set")]
    EmptyMatches,
    #[error("match set spans multiple anchor entities")]
    MixedAnchors,
}

/// Per-entity outcome of evaluating one candidate's matches.
#[derive(Debug, Clone, PartialEq)]
pub struct EntityVerdict {
    pub entity: ResourceId,
    pub verdict: TruthValue,
    /// Head truth value of each match, retained for audit.
    pub values: Vec<TruthValue>,
}

/// Counters describing one mining run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MiningStats {
    pub shared_patterns: u64,
    pub linked_patterns: u64,
    pub candidates: u64,
    pub accepted_coarse: u64,
    pub refine_attempted: u64,
    pub accepted_refined: u64,
}

/// Result of [`mine`]: accepted constraints plus the support-filtered
/// candidate pool they were drawn from, both canonically sorted.
#[derive(Debug, Clone, Default)]
pub struct MiningOutcome {
    pub constraints: Vec<Constraint>,
    pub candidates: Vec<Constraint>,
    pub stats: MiningStats,
}

/// Instantiate both structural patterns against the store: shared-subject
/// property pairs (unordered; including `p1 = p2`) co-occurring on at least
/// `theta_freq` subjects, and linked-subjects triples in both directions
/// realized by at least `theta_freq` anchors. Counting runs over subjects
/// and their neighborhoods, never over the property vocabulary.
pub fn instantiate_patterns(store: &KgStore, config: &MiningConfig) -> Vec<GraphPattern> {
    instantiate::instantiate_with_anchors(store, config.theta_freq)
        .into_iter()
        .map(|pa| pa.pattern)
        .collect()
}

/// Materialize every body match of a pattern under mining semantics.
/// Symmetric heads yield each unordered fact pair once; directional heads
/// yield ordered pairs (both orientations when `p1 = p2`). Equal-property
/// pairs require distinct facts with distinct objects.
pub fn match_subgraphs(
    store: &KgStore,
    pattern: &GraphPattern,
    head: TemporalPredicate,
) -> Vec<MatchedSubgraph> {
    let ordered = !head.is_symmetric();
    let mut out = Vec::new();
    for &anchor in store.temporal_subjects() {
        matching::for_each_match(
            store,
            pattern,
            anchor,
            ordered,
            matching::ObjectRule::RequireDistinct,
            None,
            |m| out.push(m.to_subgraph(anchor)),
        );
    }
    out
}

/// Evaluate one anchor entity from its body matches. For interval heads the
/// verdict is unknown as soon as any match is undecidable, positive only
/// when every match is positive, negative otherwise. A mutual-exclusion
/// head is violated by every body match, so any match set is negative;
/// conforming entities have no matches and never reach this function.
pub fn evaluate_entity(
    store: &KgStore,
    matches: &[MatchedSubgraph],
    head: TemporalPredicate,
) -> Result<EntityVerdict, MiningError> {
    let Some(first) = matches.first() else {
        return Err(MiningError::EmptyMatches);
    };
    let entity = first.anchor;
    if matches.iter().any(|m| m.anchor != entity) {
        return Err(MiningError::MixedAnchors);
    }
    let values: Vec<TruthValue> = match head.as_interval() {
        None => vec![TruthValue::Negative; matches.len()],
        Some(p) => matches
            .iter()
            .map(|m| {
                crate::algebra::eval_on_bounds(
                    p,
                    store.fact_bounds(m.fact1),
                    store.fact_bounds(m.fact2),
                )
            })
            .collect(),
    };
    let verdict = fold_match_values(values.iter().copied());
    Ok(EntityVerdict { entity, verdict, values })
}

/// Entity verdict from per-match head values: unknown dominates, then any
/// negative makes the entity negative, else positive.
pub fn fold_match_values<I: IntoIterator<Item = TruthValue>>(values: I) -> TruthValue {
    let mut saw_negative = false;
    for v in values {
        match v {
            TruthValue::Unknown => return TruthValue::Unknown,
            TruthValue::Negative => saw_negative = true,
            TruthValue::Positive => {}
        }
    }
    if saw_negative {
        TruthValue::Negative
    } else {
        TruthValue::Positive
    }
}

/// Score a single candidate over the whole store. Anchors without matches
/// under the restriction contribute nothing.
pub fn score_constraint(
    store: &KgStore,
    pattern: &GraphPattern,
    head: TemporalPredicate,
    restriction: Option<&ClassRestriction>,
) -> Score {
    let anchors = matching::candidate_anchor_pool(store, pattern, head);
    score_over_anchors(store, pattern, head, restriction, &anchors)
}

pub(crate) fn score_over_anchors(
    store: &KgStore,
    pattern: &GraphPattern,
    head: TemporalPredicate,
    restriction: Option<&ClassRestriction>,
    anchors: &[ResourceId],
) -> Score {
    let mut score = Score::default();
    for &anchor in anchors {
        if let Some(v) = matching::anchor_verdict(store, pattern, head, restriction, anchor) {
            score.add_verdict(v);
        }
    }
    score
}

/// Refine a borderline candidate with class restrictions observed on its
/// matched slots, returning the restricted variants that clear both the
/// support and acceptance thresholds.
pub fn refine_constraint(
    store: &KgStore,
    candidate: &Constraint,
    config: &MiningConfig,
) -> Vec<Constraint> {
    let anchors = matching::candidate_anchor_pool(store, &candidate.pattern, candidate.head);
    refine::refine_with_anchors(store, candidate, config, &anchors)
}

struct PatternTask {
    pattern: GraphPattern,
    anchors: Vec<ResourceId>,
}

#[derive(Default)]
struct PatternOutput {
    candidates: Vec<Constraint>,
    accepted: Vec<Constraint>,
    refine_attempted: u64,
    accepted_refined: u64,
}

/// Run the full mining pass: instantiate patterns, build and score
/// candidates per head predicate, keep candidates with support at or above
/// `theta_freq`, accept those with confidence at or above `theta_accept`,
/// refine those in `[theta_refine, theta_accept)`, and discard the rest.
pub fn mine(store: &KgStore, config: &MiningConfig) -> Result<MiningOutcome, MiningError> {
    config.validate()?;
    let instantiated = instantiate::instantiate_with_anchors(store, config.theta_freq);

    let mut stats = MiningStats::default();
    for pa in &instantiated {
        match pa.pattern {
            GraphPattern::SharedSubject { .. } => stats.shared_patterns += 1,
            GraphPattern::LinkedSubjects { .. } => stats.linked_patterns += 1,
        }
    }

    let tasks: Vec<PatternTask> = instantiated
        .into_iter()
        .map(|pa| PatternTask { pattern: pa.pattern, anchors: pa.anchors })
        .collect();

    let outputs = par::map_slice(&tasks, |task| process_pattern(store, task, config));

    let mut candidates = Vec::new();
    let mut accepted = Vec::new();
    for out in outputs {
        stats.candidates += out.candidates.len() as u64;
        stats.refine_attempted += out.refine_attempted;
        stats.accepted_refined += out.accepted_refined;
        stats.accepted_coarse += out.accepted.len() as u64 - out.accepted_refined;
        candidates.extend(out.candidates);
        accepted.extend(out.accepted);
    }
    sort_constraints(store, &mut candidates);
    sort_constraints(store, &mut accepted);

    Ok(MiningOutcome { constraints: accepted, candidates, stats })
}

/// Candidate variants for one instantiated pattern: symmetric heads score
/// the canonical pattern once; directional heads score both property
/// orientations of a shared-subject pair.
fn candidate_variants(
    pattern: &GraphPattern,
    config: &MiningConfig,
) -> Vec<(GraphPattern, TemporalPredicate)> {
    let mut out = Vec::new();
    match *pattern {
        GraphPattern::SharedSubject { p1, p2 } => {
            for head in config.heads_for_shared() {
                if head.is_symmetric() {
                    out.push((GraphPattern::SharedSubject { p1, p2 }, head));
                } else {
                    out.push((GraphPattern::SharedSubject { p1, p2 }, head));
                    if p1 != p2 {
                        out.push((GraphPattern::SharedSubject { p1: p2, p2: p1 }, head));
                    }
                }
            }
        }
        GraphPattern::LinkedSubjects { .. } => {
            for head in config.heads_for_linked() {
                out.push((*pattern, head));
            }
        }
    }
    out
}

fn process_pattern(store: &KgStore, task: &PatternTask, config: &MiningConfig) -> PatternOutput {
    let mut out = PatternOutput::default();
    for (pattern, head) in candidate_variants(&task.pattern, config) {
        // Mutual exclusion draws evidence from every entity carrying the
        // property pair, not only from subjects with a matchable pair.
        let me_anchors;
        let anchors: &[ResourceId] = if head == TemporalPredicate::MutualExclusion {
            me_anchors = matching::candidate_anchor_pool(store, &pattern, head);
            &me_anchors
        } else {
            &task.anchors
        };

        let score = score_over_anchors(store, &pattern, head, None, anchors);
        if score.support() < u64::from(config.theta_freq) {
            continue;
        }
        let candidate = Constraint { pattern, head, restriction: None, score };
        out.candidates.push(candidate.clone());

        let confidence = score.confidence().unwrap_or(0.0);
        if confidence >= config.theta_accept {
            out.accepted.push(candidate);
        } else if confidence >= config.theta_refine {
            out.refine_attempted += 1;
            let refined = refine::refine_with_anchors(store, &candidate, config, anchors);
            out.accepted_refined += refined.len() as u64;
            out.accepted.extend(refined);
        }
    }
    out
}
