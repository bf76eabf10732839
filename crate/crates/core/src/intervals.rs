//! Closed intervals of pseudo-mean values and the coverage set that the
//! middle loop shrinks until empty.

use crate::error::{Error, Result};

/// A closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(lo <= hi, "interval bounds out of order: [{lo}, {hi}]");
        Interval { lo, hi }
    }

    /// `[center − radius, center + radius]`.
    pub fn centered(center: f64, radius: f64) -> Self {
        let radius = radius.abs();
        Interval::new(center - radius, center + radius)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        (self.hi + self.lo) / 2.0
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// Disjoint closed intervals, kept sorted by descending upper endpoint.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IntervalSet {
    parts: Vec<Interval>,
}

impl IntervalSet {
    pub fn new(initial: Interval) -> Self {
        IntervalSet {
            parts: vec![initial],
        }
    }

    /// Build from arbitrary disjoint parts; ordering is restored here.
    pub fn from_parts(mut parts: Vec<Interval>) -> Self {
        parts.sort_by(|a, b| b.hi.total_cmp(&a.hi));
        debug_assert!(parts.windows(2).all(|w| w[1].hi < w[0].lo));
        IntervalSet { parts }
    }

    pub fn parts(&self) -> &[Interval] {
        &self.parts
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Total length.
    pub fn measure(&self) -> f64 {
        self.parts.iter().map(Interval::width).sum()
    }

    /// `self − cut`. Pieces created by the cut that are narrower than
    /// `min_width` are dropped.
    pub fn subtract(&self, cut: Interval, min_width: f64) -> IntervalSet {
        let mut parts = Vec::with_capacity(self.parts.len() + 1);
        for &part in &self.parts {
            if cut.hi < part.lo || cut.lo > part.hi {
                parts.push(part);
                continue;
            }
            if cut.hi < part.hi {
                let right = Interval::new(cut.hi, part.hi);
                if right.width() >= min_width {
                    parts.push(right);
                }
            }
            if cut.lo > part.lo {
                let left = Interval::new(part.lo, cut.lo);
                if left.width() >= min_width {
                    parts.push(left);
                }
            }
        }
        IntervalSet::from_parts(parts)
    }

    /// Midpoint of the part with the largest upper endpoint.
    pub fn next_probe(&self) -> Result<f64> {
        self.parts
            .first()
            .map(Interval::midpoint)
            .ok_or(Error::EmptyIntervalSet)
    }
}
