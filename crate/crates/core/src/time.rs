//! Time values of variable granularity and the day ranges they denote.
//!
//! A [`TimePoint`] is a year, year-month, or year-month-day value. A coarse
//! value stands for every day it could denote, captured as a closed
//! [`DayRange`] of proleptic day indexes. Interval endpoints may be absent
//! entirely; [`TimeInterval::effective_bounds`] propagates what is known
//! through the well-formedness requirement `start <= end`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TimeError {
    #[error("month {0} out of range 1-12")]
    MonthOutOfRange(u32),
    #[error("day {day} invalid for {year}-{month:02})")]
    DayOutOfRange { year: i32, month: u8, day: u32 },
    #[error("malformed time literal `{0}`")]
    Malformed(String),
}

/// Proleptic Gregorian leap-year rule, valid for years <= 0 as well
/// (astronomical numbering: year 0 is a leap year).
pub fn is_leap_year(year: i32) -> bool {
    year % 4 == 0 && (year % 100 != 0 || year % 400 == 0)
}

/// Number of days in the given month, accounting for leap years.
pub fn days_in_month(year: i32, month: u8) -> u8 {
    match month {
        1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
        4 | 6 | 9 | 11 => 30,
        2 => {
            if is_leap_year(year) {
                29
            } else {
                28
            }
        }
        _ => unreachable!("month validated at construction"),
    }
}

/// Days since 1970-01-01 in the proleptic Gregorian calendar.
/// Works for negative years (days_from_civil, Hinnant).
fn day_index(year: i32, month: u8, day: u8) -> i64 {
    let y = i64::from(year) - i64::from(month <= 2);
    let era = if y >= 0 { y } else { y - 399 } / 400;
    let yoe = y - era * 400;
    let mp = (i64::from(month) + 9) % 12;
    let doy = (153 * mp + 2) / 5 + i64::from(day) - 1;
    let doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    era * 146_097 + doe - 719_468
}

/// Inverse of [`day_index`]: civil date for a day count since 1970-01-01.
fn civil_from_days(days: i64) -> (i32, u32, u32) {
    let z = days + 719_468;
    let era = if z >= 0 { z } else { z - 146_096 } / 146_097;
    let doe = z - era * 146_097;
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let y = yoe + era * 400;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let d = doy - (153 * mp + 2) / 5 + 1;
    let m = if mp < 10 { mp + 3 } else { mp - 9 };
    let y = if m <= 2 { y + 1 } else { y };
    (y as i32, m as u32, d as u32)
}

/// Precision of a [`TimePoint`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Granularity {
    Year,
    Month,
    Day,
}

/// A time value at year, month, or day granularity.
///
/// Invariants: `day` requires `month`; months are 1-12 and days valid for the
/// (year, month) pair including leap years. Years <= 0 are accepted with
/// proleptic day indexing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TimePoint {
    year: i32,
    month: Option<u8>,
    day: Option<u8>,
}

impl TimePoint {
    pub fn from_year(year: i32) -> Self {
        Self { year, month: None, day: None }
    }

    pub fn from_year_month(year: i32, month: u32) -> Result<Self, TimeError> {
        if !(1..=12).contains(&month) {
            return Err(TimeError::MonthOutOfRange(month));
        }
        Ok(Self { year, month: Some(month as u8), day: None })
    }

    pub fn from_ymd(year: i32, month: u32, day: u32) -> Result<Self, TimeError> {
        if !(1..=12).contains(&month) {
            return Err(TimeError::MonthOutOfRange(month));
        }
        let month = month as u8;
        if day < 1 || day > u32::from(days_in_month(year, month)) {
            return Err(TimeError::DayOutOfRange { year, month, day });
        }
        Ok(Self { year, month: Some(month), day: Some(day as u8) })
    }

    /// Day-granular point for a day count since 1970-01-01.
    pub fn from_day_index(day: i64) -> Self {
        let (y, m, d) = civil_from_days(day);
        Self::from_ymd(y, m, d).expect("civil_from_days yields valid dates")
    }

    pub fn year(&self) -> i32 {
        self.year
    }

    pub fn month(&self) -> Option<u8> {
        self.month
    }

    pub fn day(&self) -> Option<u8> {
        self.day
    }

    pub fn granularity(&self) -> Granularity {
        match (self.month, self.day) {
            (Some(_), Some(_)) => Granularity::Day,
            (Some(_), None) => Granularity::Month,
            (None, None) => Granularity::Year,
            (None, Some(_)) => unreachable!("day requires month"),
        }
    }

    /// The closed range of day indexes this value could denote: a year spans
    /// Jan 1 to Dec 31, a year-month spans the whole month, a full date is a
    /// single day.
    pub fn day_range(&self) -> DayRange {
        match (self.month, self.day) {
            (Some(m), Some(d)) => DayRange::exact(day_index(self.year, m, d)),
            (Some(m), None) => DayRange::closed(
                day_index(self.year, m, 1),
                day_index(self.year, m, days_in_month(self.year, m)),
            ),
            (None, _) => DayRange::closed(
                day_index(self.year, 1, 1),
                day_index(self.year, 12, 31),
            ),
        }
    }
}

impl fmt::Display for TimePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.year)?;
        if let Some(m) = self.month {
            write!(f, "-{m:02}")?;
        }
        if let Some(d) = self.day {
            write!(f, "-{d:02}")?;
        }
        Ok(())
    }
}

impl FromStr for TimePoint {
    type Err = TimeError;

    /// Strict parse of `YYYY`, `YYYY-MM`, or `YYYY-MM-DD`, optionally
    /// prefixed with `-` for years before year 1. No whitespace; months and
    /// days must be zero-padded to two digits.
    fn from_str(s: &str) -> Result<Self, TimeError> {
        let malformed = || TimeError::Malformed(s.to_string());
        let (negative, rest) = match s.strip_prefix('-') {
            Some(r) => (true, r),
            None => (false, s),
        };
        let mut parts = rest.split('-');
        let year_part = parts.next().ok_or_else(malformed)?;
        if year_part.is_empty()
            || year_part.len() > 9
            || !year_part.bytes().all(|b| b.is_ascii_digit())
        {
            return Err(malformed());
        }
        let mut year: i32 = year_part.parse().map_err(|_| malformed())?;
        if negative {
            year = -year;
        }
        let parse_two = |p: &str| -> Result<u32, TimeError> {
            if p.len() != 2 || !p.bytes().all(|b| b.is_ascii_digit()) {
                return Err(malformed());
            }
            p.parse().map_err(|_| malformed())
        };
        let point = match (parts.next(), parts.next(), parts.next()) {
            (None, _, _) => Self::from_year(year),
            (Some(m), None, _) => Self::from_year_month(year, parse_two(m)?)?,
            (Some(m), Some(d), None) => Self::from_ymd(year, parse_two(m)?, parse_two(d)?)?,
            _ => return Err(malformed()),
        };
        Ok(point)
    }
}

/// A closed range of day indexes, unbounded on either side when the
/// underlying time value gives no information there.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DayRange {
    lo: Option<i64>,
    hi: Option<i64>,
}

impl DayRange {
    pub const UNBOUNDED: DayRange = DayRange { lo: None, hi: None };

    pub fn exact(day: i64) -> Self {
        Self { lo: Some(day), hi: Some(day) }
    }

    pub fn closed(lo: i64, hi: i64) -> Self {
        debug_assert!(lo <= hi);
        Self { lo: Some(lo), hi: Some(hi) }
    }

    pub fn new(lo: Option<i64>, hi: Option<i64>) -> Self {
        if let (Some(l), Some(h)) = (lo, hi) {
            debug_assert!(l <= h);
        }
        Self { lo, hi }
    }

    /// Lower bound; `None` means unbounded below.
    pub fn lo(&self) -> Option<i64> {
        self.lo
    }

    /// Upper bound; `None` means unbounded above.
    pub fn hi(&self) -> Option<i64> {
        self.hi
    }

    /// True when the range denotes exactly one day.
    pub fn is_exact(&self) -> bool {
        matches!((self.lo, self.hi), (Some(l), Some(h)) if l == h)
    }

    /// True when `other` is a subset of `self`.
    pub fn contains_range(&self, other: &DayRange) -> bool {
        let lo_ok = match (self.lo, other.lo) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(a), Some(b)) => a <= b,
        };
        let hi_ok = match (self.hi, other.hi) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(a), Some(b)) => b <= a,
        };
        lo_ok && hi_ok
    }
}

/// The effective day ranges of an interval's two endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct IntervalBounds {
    pub start: DayRange,
    pub end: DayRange,
}

/// A validity interval with possibly absent endpoints.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct TimeInterval {
    pub start: Option<TimePoint>,
    pub end: Option<TimePoint>,
}

impl TimeInterval {
    pub fn new(start: Option<TimePoint>, end: Option<TimePoint>) -> Self {
        Self { start, end }
    }

    /// Interval for an instantaneous event: start = end = `t`.
    pub fn point(t: TimePoint) -> Self {
        Self { start: Some(t), end: Some(t) }
    }

    pub fn is_unknown(&self) -> bool {
        self.start.is_none() && self.end.is_none()
    }

    /// An interval is well formed when some refinement of its endpoints
    /// satisfies start <= end, i.e. the start's earliest day does not come
    /// after the end's latest day.
    pub fn is_well_formed(&self) -> bool {
        match (&self.start, &self.end) {
            (Some(s), Some(e)) => {
                let (slo, ehi) = (s.day_range().lo(), e.day_range().hi());
                match (slo, ehi) {
                    (Some(l), Some(h)) => l <= h,
                    _ => true,
                }
            }
            _ => true,
        }
    }

    /// Day ranges for both endpoints, with absent endpoints bounded by the
    /// present one through `end >= start`: an absent start can be no later
    /// than the end's latest day, an absent end no earlier than the start's
    /// earliest day.
    pub fn effective_bounds(&self) -> IntervalBounds {
        match (&self.start, &self.end) {
            (Some(s), Some(e)) => IntervalBounds {
                start: s.day_range(),
                end: e.day_range(),
            },
            (Some(s), None) => {
                let sr = s.day_range();
                IntervalBounds {
                    start: sr,
                    end: DayRange::new(sr.lo(), None),
                }
            }
            (None, Some(e)) => {
                let er = e.day_range();
                IntervalBounds {
                    start: DayRange::new(None, er.hi()),
                    end: er,
                }
            }
            (None, None) => IntervalBounds {
                start: DayRange::UNBOUNDED,
                end: DayRange::UNBOUNDED,
            },
        }
    }

    /// Parse the two time fields of a fact record; `-` denotes an absent
    /// endpoint.
    pub fn parse_fields(start: &str, end: &str) -> Result<Self, TimeError> {
        let parse = |field: &str| -> Result<Option<TimePoint>, TimeError> {
            if field == "-" {
                Ok(None)
            } else {
                field.parse().map(Some)
            }
        };
        Ok(Self::new(parse(start)?, parse(end)?))
    }

    pub fn start_literal(&self) -> String {
        self.start.map_or_else(|| "-".to_string(), |t| t.to_string())
    }

    pub fn end_literal(&self) -> String {
        self.end.map_or_else(|| "-".to_string(), |t| t.to_string())
    }
}

impl fmt::Display for TimeInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.start_literal(), self.end_literal())
    }
}
