//! First-order base learners: fixed-step OGD and self-confident SOGD.
//!
//! Both take an arbitrary [`Projector`]. The projection-efficient
//! algorithms pass the surrogate ball (a radial rescale); the multi-projection
//! baselines pass the original domain.

use crate::domains::Projector;
use crate::error::Result;
use crate::vector::DecisionVector;

/// Online gradient descent with a fixed step size.
#[derive(Debug, Clone, PartialEq)]
pub struct Ogd {
    y: DecisionVector,
    step: f64,
}

impl Ogd {
    pub fn new(start: DecisionVector, step: f64) -> Self {
        Self { y: start, step }
    }

    pub fn decision(&self) -> &DecisionVector {
        &self.y
    }

    pub fn step_size(&self) -> f64 {
        self.step
    }

    /// `y ← Π[y − η g]`
    pub fn step<P: Projector>(&mut self, grad: &DecisionVector, proj: &P) -> Result<()> {
        let cand = self.y.axpy(-self.step, grad);
        self.y = proj.project(&cand)?;
        Ok(())
    }
}

/// Scale-free OGD: `η_t = c·D / sqrt(δ + Σ_{s=τ}^{t} ‖g_s‖²)`.
///
/// The squared norm of the current gradient enters the sum before the step
/// size is computed.
#[derive(Debug, Clone, PartialEq)]
pub struct Sogd {
    y: DecisionVector,
    sq_grad_sum: f64,
    delta: f64,
    numerator: f64,
    start_round: usize,
    last_step: Option<f64>,
}

impl Sogd {
    /// `numerator` is `c·D`; the default `c` is 1.
    pub fn new(start: DecisionVector, numerator: f64, delta: f64, start_round: usize) -> Self {
        Self {
            y: start,
            sq_grad_sum: 0.0,
            delta,
            numerator,
            start_round,
            last_step: None,
        }
    }

    pub fn decision(&self) -> &DecisionVector {
        &self.y
    }

    pub fn start_round(&self) -> usize {
        self.start_round
    }

    pub fn sq_grad_sum(&self) -> f64 {
        self.sq_grad_sum
    }

    /// Step size used by the most recent update.
    pub fn last_step(&self) -> Option<f64> {
        self.last_step
    }

    pub fn step<P: Projector>(&mut self, grad: &DecisionVector, proj: &P) -> Result<()> {
        self.sq_grad_sum += grad.norm_sq();
        let eta = self.numerator / (self.delta + self.sq_grad_sum).sqrt();
        self.last_step = Some(eta);
        let cand = self.y.axpy(-eta, grad);
        self.y = proj.project(&cand)?;
        Ok(())
    }
}
