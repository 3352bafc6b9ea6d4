//! Round feedback and query accounting.
//!
//! Learners pull the gradient and the loss value from a [`Feedback`] object.
//! Wrapping it in a [`CountingOracle`] records how many of each were
//! requested, which together with the projection counter of a learner gives
//! the per-round complexity.

use std::cell::Cell;

use serde::{Deserialize, Serialize};

use crate::environment::Sample;
use crate::vector::DecisionVector;

/// First-order feedback about `f_t` at the submitted decision `x_t`.
pub trait Feedback {
    fn round(&self) -> usize;
    /// `∇f_t(x_t)`
    fn gradient(&self) -> DecisionVector;
    /// `f_t(x_t)`
    fn value(&self) -> f64;

    #[doc(hidden)]
    fn is_counting(&self) -> bool {
        false
    }
}

/// Eagerly evaluated feedback.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundFeedback {
    pub round: usize,
    pub grad: DecisionVector,
    pub value: f64,
}

impl Feedback for RoundFeedback {
    fn round(&self) -> usize {
        self.round
    }

    fn gradient(&self) -> DecisionVector {
        self.grad.clone()
    }

    fn value(&self) -> f64 {
        self.value
    }
}

/// Lazily evaluated square-loss feedback for one sample.
#[derive(Debug, Clone, Copy)]
pub struct SampleFeedback<'a> {
    pub round: usize,
    pub sample: &'a Sample,
    pub point: &'a DecisionVector,
}

impl Feedback for SampleFeedback<'_> {
    fn round(&self) -> usize {
        self.round
    }

    fn gradient(&self) -> DecisionVector {
        let r = self.sample.feature.dot(self.point) - self.sample.label;
        self.sample.feature.scale(r)
    }

    fn value(&self) -> f64 {
        self.sample.loss(self.point)
    }
}

impl<F: Feedback + ?Sized> Feedback for &F {
    fn round(&self) -> usize {
        (**self).round()
    }

    fn gradient(&self) -> DecisionVector {
        (**self).gradient()
    }

    fn value(&self) -> f64 {
        (**self).value()
    }

    fn is_counting(&self) -> bool {
        (**self).is_counting()
    }
}

/// Counts gradient and value queries passing through it.
///
/// Wrapping an oracle that already counts leaves the counting to the inner
/// one, so nested wrappers never double-count.
#[derive(Debug)]
pub struct CountingOracle<F> {
    inner: F,
    active: bool,
    gradient_queries: Cell<u64>,
    value_queries: Cell<u64>,
}

impl<F: Feedback> CountingOracle<F> {
    pub fn new(inner: F) -> Self {
        let active = !inner.is_counting();
        Self {
            inner,
            active,
            gradient_queries: Cell::new(0),
            value_queries: Cell::new(0),
        }
    }

    pub fn inner(&self) -> &F {
        &self.inner
    }

    /// `(gradient queries, value queries)` seen by this wrapper.
    pub fn counts(&self) -> (u64, u64) {
        (self.gradient_queries.get(), self.value_queries.get())
    }
}

impl<F: Feedback> Feedback for CountingOracle<F> {
    fn round(&self) -> usize {
        self.inner.round()
    }

    fn gradient(&self) -> DecisionVector {
        if self.active {
            self.gradient_queries.set(self.gradient_queries.get() + 1);
        }
        self.inner.gradient()
    }

    fn value(&self) -> f64 {
        if self.active {
            self.value_queries.set(self.value_queries.get() + 1);
        }
        self.inner.value()
    }

    fn is_counting(&self) -> bool {
        true
    }
}

/// Per-round query and projection counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundCounts {
    pub projections: u64,
    pub gradients: u64,
    pub values: u64,
}

/// Running totals plus the per-round breakdown.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexityCounters {
    pub projections_onto_x: u64,
    pub gradient_queries: u64,
    pub value_queries: u64,
    pub per_round: Vec<RoundCounts>,
}

impl ComplexityCounters {
    pub fn record_round(&mut self, c: RoundCounts) {
        self.projections_onto_x += c.projections;
        self.gradient_queries += c.gradients;
        self.value_queries += c.values;
        self.per_round.push(c);
    }

    pub fn totals(&self) -> (u64, u64, u64) {
        (
            self.projections_onto_x,
            self.gradient_queries,
            self.value_queries,
        )
    }

    /// Whether the per-round entries add up to the totals.
    pub fn is_consistent(&self) -> bool {
        let sum = self.per_round.iter().fold((0, 0, 0), |acc, c| {
            (acc.0 + c.projections, acc.1 + c.gradients, acc.2 + c.values)
        });
        sum == self.totals()
    }
}
