//! Expert combiners: Hedge on linearized losses and Adapt-ML-Prod for
//! sleeping experts.

use crate::error::{usage, Error, Result};
use crate::vector::DecisionVector;

/// Softmax of `-rate * losses`, shifted by the minimum loss.
fn softmax_neg(losses: &[f64], rate: f64) -> Vec<f64> {
    let min = losses.iter().copied().fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = losses.iter().map(|l| (-rate * (l - min)).exp()).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|x| x / z).collect()
}

/// Normalises `exp(logits)` with max-subtraction.
fn normalize_log(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|x| x / z).collect()
}

/// Hedge learning-rate schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HedgeRate {
    Fixed(f64),
    /// `ε_t = sqrt(ln N / (1 + D² Σ_{s<t} ‖∇_s‖²))`
    SelfConfident { diameter: f64 },
}

/// Exponential weights over a fixed set of experts.
#[derive(Debug, Clone, PartialEq)]
pub struct Hedge {
    cum_losses: Vec<f64>,
    rate: HedgeRate,
    sq_grad_sum: f64,
    rounds: usize,
}

impl Hedge {
    pub fn new(n_experts: usize, rate: HedgeRate) -> Result<Self> {
        if n_experts == 0 {
            return Err(usage("hedge needs at least one expert"));
        }
        Ok(Self {
            cum_losses: vec![0.0; n_experts],
            rate,
            sq_grad_sum: 0.0,
            rounds: 0,
        })
    }

    pub fn n_experts(&self) -> usize {
        self.cum_losses.len()
    }

    pub fn cum_losses(&self) -> &[f64] {
        &self.cum_losses
    }

    /// Number of accumulated rounds.
    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn learning_rate(&self) -> f64 {
        match self.rate {
            HedgeRate::Fixed(eps) => eps,
            HedgeRate::SelfConfident { diameter } => {
                let ln_n = (self.n_experts() as f64).ln();
                (ln_n / (1.0 + diameter * diameter * self.sq_grad_sum)).sqrt()
            }
        }
    }

    pub fn weights(&self) -> Vec<f64> {
        softmax_neg(&self.cum_losses, self.learning_rate())
    }

    pub fn accumulate(&mut self, losses: &[f64], grad_sq: f64) -> Result<()> {
        if losses.len() != self.cum_losses.len() {
            return Err(usage(format!(
                "expected {} losses, got {}",
                self.cum_losses.len(),
                losses.len()
            )));
        }
        for (c, l) in self.cum_losses.iter_mut().zip(losses) {
            *c += l;
        }
        self.sq_grad_sum += grad_sq;
        self.rounds += 1;
        Ok(())
    }
}

/// One sleeping expert inside [`AdaMlProd`].
#[derive(Debug, Clone, PartialEq)]
pub struct ExpertSlot {
    pub index: usize,
    pub gamma: f64,
    /// `ln w`
    pub log_w: f64,
    pub eta: f64,
    pub sq_excess_sum: f64,
    pub start_round: usize,
}

impl ExpertSlot {
    pub fn weight(&self) -> f64 {
        self.log_w.exp()
    }
}

/// Normalised feedback losses for one round.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedbackLosses {
    pub hat: f64,
    pub ells: Vec<f64>,
}

/// Builds `ℓ̂ = ⟨∇, y⟩/(2GD)` and `ℓ_i = ⟨∇, y_i⟩/(2GD)`.
///
/// Every output lies in `[-1/2, 1/2]` when `‖∇‖ ≤ G` and all points have norm
/// at most `D`; a larger value means the bounds were configured too small.
pub fn amlprod_feedback(
    grad: &DecisionVector,
    y_combined: &DecisionVector,
    y_locals: &[&DecisionVector],
    g_bound: f64,
    d_bound: f64,
) -> Result<FeedbackLosses> {
    const SLACK: f64 = 1e-9;
    let scale = 2.0 * g_bound * d_bound;
    let hat = grad.dot(y_combined) / scale;
    let ells: Vec<f64> = y_locals.iter().map(|y| grad.dot(y) / scale).collect();
    for l in std::iter::once(&hat).chain(&ells) {
        if l.is_nan() || l.abs() > 0.5 + SLACK {
            return Err(Error::ContractViolation(format!(
                "feedback loss {l} outside [-1/2, 1/2]; check the G and D bounds"
            )));
        }
    }
    Ok(FeedbackLosses { hat, ells })
}

/// Adapt-ML-Prod over a changing set of awake experts.
///
/// Weights are stored as logarithms: the exponent `η_new/η_old` applied every
/// round underflows a linear representation on long runs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AdaMlProd {
    slots: Vec<ExpertSlot>,
}

impl AdaMlProd {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn slots(&self) -> &[ExpertSlot] {
        &self.slots
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// Wakes expert `m` at round `t` with `γ = ln(1+2m)`, `w = 1`,
    /// `η = min{1/2, √γ}`.
    pub fn spawn(&mut self, m: usize, t: usize) -> Result<()> {
        if m == 0 {
            return Err(usage("expert indices start at 1"));
        }
        if self.slots.iter().any(|s| s.index >= m) {
            return Err(usage(format!(
                "expert index {m} is not greater than every existing index"
            )));
        }
        let gamma = (1.0 + 2.0 * m as f64).ln();
        self.slots.push(ExpertSlot {
            index: m,
            gamma,
            log_w: 0.0,
            eta: gamma.sqrt().min(0.5),
            sq_excess_sum: 0.0,
            start_round: t,
        });
        Ok(())
    }

    /// Applies one round of feedback; `ells` is aligned with [`Self::slots`].
    pub fn update(&mut self, hat: f64, ells: &[f64]) -> Result<()> {
        if ells.len() != self.slots.len() {
            return Err(usage(format!(
                "expected {} expert losses, got {}",
                self.slots.len(),
                ells.len()
            )));
        }
        if let Some(l) = ells.iter().find(|l| (hat - *l).abs() > 1.0 + 1e-9) {
            return Err(usage(format!("excess loss {} exceeds 1 in magnitude", hat - l)));
        }
        for (slot, l) in self.slots.iter_mut().zip(ells) {
            let r = hat - l;
            let eta_old = slot.eta;
            slot.sq_excess_sum += r * r;
            let eta_new = (slot.gamma / (1.0 + slot.sq_excess_sum)).sqrt().min(0.5);
            let factor = 1.0 + eta_old * r;
            assert!(factor > 0.0, "multiplicative factor {factor} must stay positive");
            slot.log_w = (slot.log_w + factor.ln()) * (eta_new / eta_old);
            slot.eta = eta_new;
        }
        Ok(())
    }

    /// `p_i ∝ w_i η_i`
    pub fn weights(&self) -> Result<Vec<f64>> {
        if self.slots.is_empty() {
            return Err(usage("no awake experts"));
        }
        let logits: Vec<f64> = self.slots.iter().map(|s| s.log_w + s.eta.ln()).collect();
        Ok(normalize_log(&logits))
    }

    /// Puts the listed experts to sleep for good.
    pub fn retire(&mut self, indices: &[usize]) -> Result<()> {
        if let Some(m) = indices
            .iter()
            .find(|m| !self.slots.iter().any(|s| s.index == **m))
        {
            return Err(usage(format!("unknown expert index {m}")));
        }
        self.slots.retain(|s| !indices.contains(&s.index));
        Ok(())
    }
}
