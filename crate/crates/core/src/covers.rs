//! Geometric covering intervals over marker indices.
//!
//! The learner started at marker `m = i·2^k` (`i` odd) stays awake on marker
//! indices `[m, m + 2^k)` and is retired when marker `m + 2^k` is
//! registered. With `s_t = t` this is the standard geometric cover; with
//! markers registered whenever the running loss of the final decisions
//! crosses a growing threshold, it is the problem-dependent cover.

use serde::{Deserialize, Serialize};

use crate::error::{config, usage, Result};

/// Marker-index span `[start, end)` of the learner created at marker `m`.
pub fn span_for_marker(m: usize) -> Result<(usize, usize)> {
    if m < 1 {
        return Err(usage("marker indices start at 1"));
    }
    let len = 1usize << m.trailing_zeros();
    Ok((m, m + len))
}

/// The interval `[t, t + 2^k − 1]` of the standard cover that starts at
/// round `t`, where `t = i·2^k` with `i` odd.
pub fn standard_cover_starting_at(t: usize) -> Result<(usize, usize)> {
    if t < 1 {
        return Err(usage("rounds start at 1"));
    }
    let (start, end) = span_for_marker(t)?;
    Ok((start, end - 1))
}

/// Splits the marker range starting at `p` and reaching `q` into the chain
/// of consecutive registry spans `[i_1, i_2), [i_2, i_3), …` with `i_1 = p`
/// and `i_v ≤ q < i_{v+1}`.
pub fn decompose(p: usize, q: usize) -> Result<Vec<(usize, usize)>> {
    if p < 1 || q < p {
        return Err(usage("decomposition needs 1 ≤ p ≤ q"));
    }
    let mut out = Vec::new();
    let mut i = p;
    while i <= q {
        let span = span_for_marker(i)?;
        out.push(span);
        i = span.1;
    }
    Ok(out)
}

/// Which threshold generating function to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdVariant {
    Adaptive,
    IntervalDynamic,
}

/// Constants of the threshold generating function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdParams {
    pub g: f64,
    pub d: f64,
    pub l: f64,
    pub delta: f64,
    pub horizon: usize,
    /// Inner pool size; required by the interval-dynamic variant.
    pub n_experts: Option<usize>,
    pub variant: ThresholdVariant,
    /// Multiplier applied to every threshold (1 reproduces the formula).
    pub scale: f64,
}

impl ThresholdParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("G", self.g), ("D", self.d), ("L", self.l), ("delta", self.delta)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(config(format!("{name} must be positive")));
            }
        }
        if self.horizon < 1 {
            return Err(config("horizon must be at least 1"));
        }
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return Err(config("threshold scale must be positive"));
        }
        if self.variant == ThresholdVariant::IntervalDynamic {
            match self.n_experts {
                Some(n) if n >= 1 => {}
                _ => return Err(config("interval-dynamic thresholds need the pool size N")),
            }
        }
        Ok(())
    }

    /// `μ_T = ln(1 + (1 + ln(1+T)) / (2e))`
    pub fn mu(&self) -> f64 {
        let t = self.horizon as f64;
        (1.0 + (1.0 + (1.0 + t).ln()) / (2.0 * std::f64::consts::E)).ln()
    }

    /// Threshold `C_m`, already multiplied by `scale`.
    pub fn threshold(&self, m: usize) -> Result<f64> {
        if m < 1 {
            return Err(usage("marker indices start at 1"));
        }
        self.validate()?;
        let (g, d, l) = (self.g, self.d, self.l);
        let mu = self.mu();
        let log_m = (1.0 + 2.0 * m as f64).ln();
        let raw = match self.variant {
            ThresholdVariant::Adaptive => {
                (54.0 * g * d + 168.0 * d * d * l) * log_m
                    + 168.0 * d * d * l * mu * mu
                    + 18.0 * g * d * mu
                    + 6.0 * d * self.delta.sqrt()
                    + 672.0 * d * d * l
            }
            ThresholdVariant::IntervalDynamic => {
                let ln_n = (self.n_experts.unwrap_or(1) as f64).ln();
                let inner = 12.0 * d * log_m.sqrt() + 4.0 * d * mu + 6.0 * d * ln_n.sqrt();
                7.0 * l * inner * inner
                    + 54.0 * g * d * log_m
                    + 18.0 * g * d * mu
                    + 1.5 * (6.0 + g * g * d * d) * ln_n.sqrt()
                    + (630.0 * l + 23.0) * d * d
                    + 9.0
            }
        };
        Ok(self.scale * raw)
    }
}

/// Awake range of one learner in marker indices, `[start_marker, end_marker)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub learner: usize,
    pub start_marker: usize,
    pub end_marker: usize,
}

impl Span {
    fn for_marker(m: usize) -> Result<Self> {
        let (start_marker, end_marker) = span_for_marker(m)?;
        Ok(Self {
            learner: m,
            start_marker,
            end_marker,
        })
    }
}

/// What happened when a new marker was registered.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkerEvent {
    pub round: usize,
    pub marker_index: usize,
    pub retired: Vec<usize>,
    pub spawned: Span,
}

/// Problem-dependent marker bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkerRegistry {
    params: ThresholdParams,
    markers: Vec<usize>,
    running_loss: f64,
    threshold: f64,
    active: Vec<Span>,
}

impl MarkerRegistry {
    /// Registers `s_1 = 1` and the first learner.
    pub fn new(params: ThresholdParams) -> Result<Self> {
        params.validate()?;
        let threshold = params.threshold(1)?;
        Ok(Self {
            params,
            markers: vec![1],
            running_loss: 0.0,
            threshold,
            active: vec![Span::for_marker(1)?],
        })
    }

    pub fn params(&self) -> &ThresholdParams {
        &self.params
    }

    /// Marker rounds `s_1, s_2, …`.
    pub fn markers(&self) -> &[usize] {
        &self.markers
    }

    pub fn marker_count(&self) -> usize {
        self.markers.len()
    }

    pub fn running_loss(&self) -> f64 {
        self.running_loss
    }

    pub fn current_threshold(&self) -> f64 {
        self.threshold
    }

    pub fn active_spans(&self) -> &[Span] {
        &self.active
    }

    /// Ids (creation marker indices) of the awake learners, oldest first.
    pub fn active_learners(&self) -> Vec<usize> {
        self.active.iter().map(|s| s.learner).collect()
    }

    /// Adds `f_t(x_t)` to the running loss and registers a marker at round
    /// `t` if it now exceeds the current threshold. At most one marker per
    /// call; the running loss restarts from zero.
    pub fn register_loss(&mut self, f_value: f64, t: usize) -> Result<Option<MarkerEvent>> {
        if !(f_value.is_finite() && f_value >= 0.0) {
            return Err(usage(format!("losses must be finite and non-negative, got {f_value}")));
        }
        self.running_loss += f_value;
        if self.running_loss <= self.threshold {
            return Ok(None);
        }
        self.running_loss = 0.0;
        let m = self.markers.len() + 1;
        let retired: Vec<usize> = self
            .active
            .iter()
            .filter(|s| s.end_marker == m)
            .map(|s| s.learner)
            .collect();
        self.active.retain(|s| s.end_marker != m);
        self.markers.push(t);
        self.threshold = self.params.threshold(m)?;
        let spawned = Span::for_marker(m)?;
        self.active.push(spawned);
        Ok(Some(MarkerEvent {
            round: t,
            marker_index: m,
            retired,
            spawned,
        }))
    }
}
