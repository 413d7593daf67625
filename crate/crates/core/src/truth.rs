//! Three-valued truth carrier with strong Kleene connectives.

use std::fmt;
use std::str::FromStr;

/// Outcome of a comparison or predicate over uncertain time values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TruthValue {
    Positive,
    Negative,
    Unknown,
}

impl TruthValue {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Self::Positive
        } else {
            Self::Negative
        }
    }

    pub fn is_positive(self) -> bool {
        self == Self::Positive
    }

    pub fn is_negative(self) -> bool {
        self == Self::Negative
    }

    pub fn is_unknown(self) -> bool {
        self == Self::Unknown
    }

    /// Strong Kleene conjunction: Negative dominates, then Unknown.
    pub fn and(self, other: Self) -> Self {
        if self == Self::Negative || other == Self::Negative {
            return Self::Negative;
        }
        if self == Self::Unknown || other == Self::Unknown {
            return Self::Unknown;
        }
        Self::Positive
    }

    /// Strong Kleene disjunction: Positive dominates, then Unknown.
    pub fn or(self, other: Self) -> Self {
        if self == Self::Positive || other == Self::Positive {
            return Self::Positive;
        }
        if self == Self::Unknown || other == Self::Unknown {
            return Self::Unknown;
        }
        Self::Negative
    }

    /// Negation swaps Positive and Negative, fixes Unknown.
    #[allow(clippy::should_implement_trait)] // `!v` is also provided below
    pub fn not(self) -> Self {
        match self {
            Self::Positive => Self::Negative,
            Self::Negative => Self::Positive,
            Self::Unknown => Self::Unknown,
        }
    }
}

impl std::ops::Not for TruthValue {
    type Output = Self;

    fn not(self) -> Self {
        TruthValue::not(self)
    }
}

impl std::ops::BitAnd for TruthValue {
    type Output = Self;

    fn bitand(self, other: Self) -> Self {
        self.and(other)
    }
}

impl std::ops::BitOr for TruthValue {
    type Output = Self;

    fn bitor(self, other: Self) -> Self {
        self.or(other)
    }
}

impl fmt::Display for TruthValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Positive => "positive",
            Self::Negative => "negative",
            Self::Unknown => "unknown",
        };
        f.write_str(s)
    }
}

impl FromStr for TruthValue {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "positive" => Ok(Self::Positive),
            "negative" => Ok(Self::Negative),
            "unknown" => Ok(Self::Unknown),
            other => Err(format!("unknown truth value `{other}`")),
        }
    }
}
