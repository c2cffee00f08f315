//! Nonnegative reals extended with `+∞`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul};

use serde::{Serialize, Serializer};

/// A nonnegative real number or `+∞`.
///
/// Quantities such as `E[X]` of a Pareto law with tail index `α ≤ 1`, or the
/// PAoI of a policy that never delivers, are genuinely infinite. They are
/// carried explicitly instead of through a large sentinel float so that
/// comparisons and `min` stay total.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedReal {
    Finite(f64),
    Infinite,
}

impl ExtendedReal {
    pub const ZERO: Self = ExtendedReal::Finite(0.0);

    /// Maps `f64::INFINITY` to [`ExtendedReal::Infinite`].
    ///
    /// Panics on NaN or negative input: both indicate a logic error upstream.
    pub fn new(value: f64) -> Self {
        assert!(!value.is_nan(), "ExtendedReal cannot hold NaN");
        assert!(
            value >= 0.0,
            "ExtendedReal must be nonnegative, got {value}"
        );
        if value == f64::INFINITY {
            ExtendedReal::Infinite
        } else {
            ExtendedReal::Finite(value)
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    pub fn is_infinite(self) -> bool {
        !self.is_finite()
    }

    /// The finite value, if any.
    pub fn finite(self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(v) => Some(v),
            ExtendedReal::Infinite => None,
        }
    }

    /// Lossless conversion to `f64` (`+∞` becomes `f64::INFINITY`).
    pub fn to_f64(self) -> f64 {
        match self {
            ExtendedReal::Finite(v) => v,
            ExtendedReal::Infinite => f64::INFINITY,
        }
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    /// `numerator / denominator` where a zero denominator yields `+∞`.
    pub fn ratio(numerator: f64, denominator: f64) -> Self {
        if denominator <= 0.0 {
            ExtendedReal::Infinite
        } else {
            ExtendedReal::new((numerator / denominator).max(0.0))
        }
    }
}

impl Default for ExtendedReal {
    fn default() -> Self {
        Self::ZERO
    }
}

impl From<f64> for ExtendedReal {
    fn from(value: f64) -> Self {
        ExtendedReal::new(value)
    }
}

impl Eq for ExtendedReal {}

impl PartialOrd for ExtendedReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtendedReal {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => a.total_cmp(b),
            (ExtendedReal::Finite(_), ExtendedReal::Infinite) => Ordering::Less,
            (ExtendedReal::Infinite, ExtendedReal::Finite(_)) => Ordering::Greater,
            (ExtendedReal::Infinite, ExtendedReal::Infinite) => Ordering::Equal,
        }
    }
}

impl Add for ExtendedReal {
    type Output = ExtendedReal;

    fn add(self, rhs: Self) -> Self {
        match (self, rhs) {
            (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => ExtendedReal::new(a + b),
            _ => ExtendedReal::Infinite,
        }
    }
}

/// Scaling by a nonnegative factor. `0 · ∞ = 0`, the measure-theoretic convention.
impl Mul<f64> for ExtendedReal {
    type Output = ExtendedReal;

    fn mul(self, rhs: f64) -> Self {
        assert!(rhs >= 0.0, "scale factor must be nonnegative");
        match self {
            ExtendedReal::Finite(a) => ExtendedReal::new(a * rhs),
            ExtendedReal::Infinite if rhs == 0.0 => ExtendedReal::ZERO,
            ExtendedReal::Infinite => ExtendedReal::Infinite,
        }
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedReal::Finite(v) => fmt::Display::fmt(v, f),
            ExtendedReal::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for ExtendedReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtendedReal::Finite(v) => serializer.serialize_f64(*v),
            ExtendedReal::Infinite => serializer.serialize_str("inf"),
        }
    }
}
