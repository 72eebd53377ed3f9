use std::fmt;

use crate::scalar::{render, smax, smin, Scalar};

/// A real interval with independent endpoint closedness.
///
/// Empty iff `lo > hi`, or `lo == hi` without both endpoints closed.
#[derive(Debug, Clone, PartialEq)]
pub struct Interval<S> {
    pub lo: S,
    pub hi: S,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl<S: Scalar> Interval<S> {
    pub fn closed(lo: S, hi: S) -> Self {
        Interval { lo, hi, lo_closed: true, hi_closed: true }
    }

    pub fn open(lo: S, hi: S) -> Self {
        Interval { lo, hi, lo_closed: false, hi_closed: false }
    }

    pub fn unit() -> Self {
        Self::closed(S::zero(), S::one())
    }

    /// Canonical empty interval.
    pub fn empty() -> Self {
        Interval { lo: S::one(), hi: S::zero(), lo_closed: false, hi_closed: false }
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && !(self.lo_closed && self.hi_closed))
    }

    /// Positive length (beyond the float epsilon in float mode).
    pub fn has_interior(&self) -> bool {
        S::gap_positive(&self.lo, &self.hi)
    }

    /// Nonempty but without interior.
    pub fn is_degenerate(&self) -> bool {
        !self.is_empty() && !self.has_interior()
    }

    pub fn length(&self) -> S {
        if self.is_empty() {
            S::zero()
        } else {
            self.hi.clone() - self.lo.clone()
        }
    }

    pub fn midpoint(&self) -> S {
        (self.lo.clone() + self.hi.clone()) / S::from_int(2)
    }

    pub fn closure(&self) -> Self {
        if self.is_empty() && self.lo > self.hi {
            return Self::empty();
        }
        Self::closed(self.lo.clone(), self.hi.clone())
    }

    pub fn contains(&self, x: &S) -> bool {
        let above = if self.lo_closed { *x >= self.lo } else { *x > self.lo };
        let below = if self.hi_closed { *x <= self.hi } else { *x < self.hi };
        above && below
    }

    /// Closed-interval membership with the mode tolerance at the endpoints.
    pub fn contains_approx(&self, x: &S, tol: f64) -> bool {
        (self.lo <= *x || x.near(&self.lo, tol)) && (*x <= self.hi || x.near(&self.hi, tol))
    }

    pub fn intersect(&self, other: &Self) -> Self {
        let (lo, lo_closed) = if self.lo > other.lo {
            (self.lo.clone(), self.lo_closed)
        } else if other.lo > self.lo {
            (other.lo.clone(), other.lo_closed)
        } else {
            (self.lo.clone(), self.lo_closed && other.lo_closed)
        };
        let (hi, hi_closed) = if self.hi < other.hi {
            (self.hi.clone(), self.hi_closed)
        } else if other.hi < self.hi {
            (other.hi.clone(), other.hi_closed)
        } else {
            (self.hi.clone(), self.hi_closed && other.hi_closed)
        };
        Interval { lo, hi, lo_closed, hi_closed }
    }

    /// Closed-interval containment `self ⊆ other`.
    pub fn is_subset_of(&self, other: &Self, tol: f64) -> bool {
        self.is_empty() || (other.contains_approx(&self.lo, tol) && other.contains_approx(&self.hi, tol))
    }

    /// Endpoint equality (exact, or within `tol` in float mode).
    pub fn same_as(&self, other: &Self, tol: f64) -> bool {
        self.lo.near(&other.lo, tol) && self.hi.near(&other.hi, tol)
    }

    /// Interval spanned by two values in either order, closed.
    pub fn spanning(a: S, b: S) -> Self {
        Self::closed(smin(&a, &b), smax(&a, &b))
    }

    pub fn to_f64(&self) -> Interval<f64> {
        Interval {
            lo: self.lo.to_f64(),
            hi: self.hi.to_f64(),
            lo_closed: self.lo_closed,
            hi_closed: self.hi_closed,
        }
    }
}

impl<S: Scalar> fmt::Display for Interval<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "∅");
        }
        write!(
            f,
            "{}{},{}{}",
            if self.lo_closed { '[' } else { '(' },
            render(&self.lo),
            render(&self.hi),
            if self.hi_closed { ']' } else { ')' }
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn q(p: i64, d: i64) -> Rational {
        Rational::from_ratio(p, d)
    }

    #[test]
    fn emptiness_rules() {
        assert!(Interval::closed(q(1, 2), q(1, 3)).is_empty());
        assert!(!Interval::closed(q(1, 2), q(1, 2)).is_empty());
        assert!(Interval::open(q(1, 2), q(1, 2)).is_empty());
        assert!(Interval::closed(q(1, 2), q(1, 2)).is_degenerate());
    }

    #[test]
    fn intersection_tracks_closedness() {
        let a = Interval::closed(q(0, 1), q(1, 2));
        let b = Interval::open(q(1, 2), q(1, 1));
        assert!(a.intersect(&b).is_empty());
        let c = Interval::closed(q(1, 2), q(1, 1));
        let ac = a.intersect(&c);
        assert!(ac.is_degenerate());
        assert_eq!(ac.lo, q(1, 2));
    }

    #[test]
    fn display_uses_exact_rationals() {
        let a = Interval::closed(q(1, 4), q(1, 2));
        assert_eq!(a.to_string(), "[1/4,1/2]");
    }
}
