//! Temporal predicates over intervals with uncertain endpoints.
//!
//! Comparisons operate on the day ranges coarse values denote and decide only
//! when every refinement agrees, otherwise they return `Unknown`. Equality is
//! positive only for exact (day-granularity) equal values: two facts both
//! dated `2022` need not have happened at the same instant.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::time::{DayRange, IntervalBounds, TimeInterval};
use crate::truth::TruthValue;

/// The five interval predicates usable both as constraint heads and over
/// concrete interval pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IntervalPredicate {
    Start,
    Finish,
    Before,
    Disjoint,
    Include,
}

/// Constraint head predicates: the interval predicates plus mutual
/// exclusion, which asserts that the body must never match with two
/// distinct objects and is never evaluated over intervals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TemporalPredicate {
    Start,
    Finish,
    Before,
    Disjoint,
    Include,
    MutualExclusion,
}

impl TemporalPredicate {
    pub const ALL: [TemporalPredicate; 6] = [
        TemporalPredicate::Start,
        TemporalPredicate::Finish,
        TemporalPredicate::Before,
        TemporalPredicate::Disjoint,
        TemporalPredicate::Include,
        TemporalPredicate::MutualExclusion,
    ];

    /// Heads invariant under swapping the two body facts. `start` and
    /// `finish` compare like endpoints, `disjoint` and mutual exclusion are
    /// symmetric by definition; `before` and `include` are directional.
    pub fn is_symmetric(self) -> bool {
        !matches!(self, Self::Before | Self::Include)
    }

    pub fn as_interval(self) -> Option<IntervalPredicate> {
        match self {
            Self::Start => Some(IntervalPredicate::Start),
            Self::Finish => Some(IntervalPredicate::Finish),
            Self::Before => Some(IntervalPredicate::Before),
            Self::Disjoint => Some(IntervalPredicate::Disjoint),
            Self::Include => Some(IntervalPredicate::Include),
            Self::MutualExclusion => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Start => "start",
            Self::Finish => "finish",
            Self::Before => "before",
            Self::Disjoint => "disjoint",
            Self::Include => "include",
            Self::MutualExclusion => "mutual_exclusion",
        }
    }
}

impl fmt::Display for TemporalPredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TemporalPredicate {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "start" => Ok(Self::Start),
            "finish" => Ok(Self::Finish),
            "before" => Ok(Self::Before),
            "disjoint" => Ok(Self::Disjoint),
            "include" => Ok(Self::Include),
            "mutual_exclusion" => Ok(Self::MutualExclusion),
            other => Err(format!("unknown predicate `{other}`")),
        }
    }
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("mutual exclusion is a head-only predicate with no interval semantics")]
pub struct HeadNotTemporal;

/// `a < b` over day ranges: positive when every day of `a` precedes every
/// day of `b`, negative when no day of `a` precedes any day of `b`.
pub fn cmp_lt(a: DayRange, b: DayRange) -> TruthValue {
    if let (Some(ahi), Some(blo)) = (a.hi(), b.lo()) {
        if ahi < blo {
            return TruthValue::Positive;
        }
    }
    if let (Some(alo), Some(bhi)) = (a.lo(), b.hi()) {
        if alo >= bhi {
            return TruthValue::Negative;
        }
    }
    TruthValue::Unknown
}

/// `a = b` over day ranges: positive only when both are the same single
/// day, negative when the ranges are disjoint.
pub fn cmp_eq(a: DayRange, b: DayRange) -> TruthValue {
    if a.is_exact() && b.is_exact() && a.lo() == b.lo() {
        return TruthValue::Positive;
    }
    let disjoint = match (a.hi(), b.lo()) {
        (Some(ahi), Some(blo)) if ahi < blo => true,
        _ => match (b.hi(), a.lo()) {
            (Some(bhi), Some(alo)) => bhi < alo,
            _ => false,
        },
    };
    if disjoint {
        TruthValue::Negative
    } else {
        TruthValue::Unknown
    }
}

/// `a <= b` as the Kleene disjunction of `<` and `=`.
pub fn cmp_le(a: DayRange, b: DayRange) -> TruthValue {
    cmp_lt(a, b) | cmp_eq(a, b)
}

/// Interval inequality: the negation of both endpoints comparing equal.
fn interval_neq(a: &IntervalBounds, b: &IntervalBounds) -> TruthValue {
    !(cmp_eq(a.start, b.start) & cmp_eq(a.end, b.end))
}

fn before(a: &IntervalBounds, b: &IntervalBounds) -> TruthValue {
    cmp_lt(a.end, b.start) | (cmp_eq(a.end, b.start) & interval_neq(a, b))
}

/// Evaluate an interval predicate over precomputed endpoint bounds.
pub fn eval_on_bounds(
    p: IntervalPredicate,
    a: &IntervalBounds,
    b: &IntervalBounds,
) -> TruthValue {
    match p {
        IntervalPredicate::Start => cmp_eq(a.start, b.start),
        IntervalPredicate::Finish => cmp_eq(a.end, b.end),
        IntervalPredicate::Before => before(a, b),
        IntervalPredicate::Disjoint => before(a, b) | before(b, a),
        IntervalPredicate::Include => cmp_le(a.start, b.start) & cmp_le(b.end, a.end),
    }
}

/// Evaluate a head predicate over two intervals. Mutual exclusion is
/// rejected: it constrains object multiplicity, not time.
pub fn eval_predicate(
    p: TemporalPredicate,
    t1: &TimeInterval,
    t2: &TimeInterval,
) -> Result<TruthValue, HeadNotTemporal> {
    let p = p.as_interval().ok_or(HeadNotTemporal)?;
    Ok(eval_on_bounds(p, &t1.effective_bounds(), &t2.effective_bounds()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::time::TimePoint;
    use TruthValue::{Negative, Positive, Unknown};

    fn range(s: &str) -> DayRange {
        s.parse::<TimePoint>().unwrap().day_range()
    }

    fn interval(s: &str, e: &str) -> TimeInterval {
        TimeInterval::parse_fields(s, e).unwrap()
    }

    #[test]
    fn comparisons_across_granularities() {
        // month strictly before the following year
        assert_eq!(cmp_lt(range("2021-12"), range("2022")), Positive);
        assert_eq!(cmp_eq(range("2021-12"), range("2022")), Negative);
        // month inside the same year: undecidable either way
        assert_eq!(cmp_lt(range("2022-01"), range("2022")), Unknown);
        assert_eq!(cmp_eq(range("2022-01"), range("2022")), Unknown);
        // absent value against anything
        assert_eq!(cmp_lt(DayRange::UNBOUNDED, range("2022")), Unknown);
        assert_eq!(cmp_eq(DayRange::UNBOUNDED, range("2022")), Unknown);
    }

    #[test]
    fn equality_of_identical_coarse_values_is_unknown() {
        assert_eq!(cmp_eq(range("2022"), range("2022")), Unknown);
        assert_eq!(cmp_eq(range("2022-03-05"), range("2022-03-05")), Positive);
    }

    #[test]
    fn overlapping_open_interval_is_not_disjoint() {
        // [1998, 2009] vs [2002, -]: the open end is bounded below by 2002,
        // so both orientations of `before` fail decisively.
        let v = eval_predicate(
            TemporalPredicate::Disjoint,
            &interval("1998", "2009"),
            &interval("2002", "-"),
        )
        .unwrap();
        assert_eq!(v, Negative);
    }

    #[test]
    fn earlier_closed_interval_is_disjoint_from_later_open_one() {
        let v = eval_predicate(
            TemporalPredicate::Disjoint,
            &interval("1998", "2001"),
            &interval("2002", "-"),
        )
        .unwrap();
        assert_eq!(v, Positive);
    }

    /// Every day-exact refinement of [1998, 2001] and [2002, -] keeps the
    /// two intervals apart, so the coarse verdict Positive is sound.
    #[test]
    fn exactified_refinements_confirm_the_disjoint_verdict() {
        let d = |s: &str| range(s).lo().unwrap();
        let (s1_lo, s1_hi) = (d("1998-01-01"), d("1998-12-31"));
        let (e1_lo, e1_hi) = (d("2001-01-01"), d("2001-12-31"));
        let (s2_lo, s2_hi) = (d("2002-01-01"), d("2002-12-31"));
        let mut probe = 0i64;
        for step in 0..200 {
            probe = (probe + 37 * step + 11) % 365;
            let s1 = s1_lo + probe % (s1_hi - s1_lo + 1);
            let e1 = e1_lo + (probe * 7) % (e1_hi - e1_lo + 1);
            let s2 = s2_lo + (probe * 13) % (s2_hi - s2_lo + 1);
            let e2 = s2 + (probe * 3) % 20_000; // open end: any later day
            let two_valued_disjoint = e1 < s2 || e2 < s1;
            assert!(two_valued_disjoint, "refinement {s1}..{e1} vs {s2}..{e2}");
        }
    }

    #[test]
    fn inclusion_decides_through_strict_ordering() {
        let v = eval_predicate(
            TemporalPredicate::Include,
            &interval("1998", "2009"),
            &interval("2002", "2005"),
        )
        .unwrap();
        assert_eq!(v, Positive);
    }

    #[test]
    fn start_at_year_granularity_is_unknown() {
        let v = eval_predicate(
            TemporalPredicate::Start,
            &interval("2022", "2023"),
            &interval("2022", "2024"),
        )
        .unwrap();
        assert_eq!(v, Unknown);
    }

    #[test]
    fn touching_intervals_count_as_before_only_when_distinct() {
        let a = interval("2001-05-04", "2002-01-01");
        let b = interval("2002-01-01", "2009-12-31");
        assert_eq!(eval_predicate(TemporalPredicate::Before, &a, &b).unwrap(), Positive);
        // identical exact intervals never precede themselves
        assert_eq!(eval_predicate(TemporalPredicate::Before, &b, &b).unwrap(), Negative);
    }

    #[test]
    fn mutual_exclusion_is_rejected() {
        let iv = interval("2000", "2001");
        assert!(eval_predicate(TemporalPredicate::MutualExclusion, &iv, &iv).is_err());
    }
}
