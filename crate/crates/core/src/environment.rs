//! Synthetic drifting regression streams with square loss.
//!
//! Each round draws a feature uniformly from the ball of diameter `D`
//! (radius `D/2`) and labels it `y = xᵀw* + ε` with `ε ~ U[0, noise_max]`.
//! The ground truth `w*` is either piecewise constant over equal stages or
//! follows a projected random walk with steps of length `step_scale · D/T`.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domains::{unit_ball_sample, Domain};
use crate::error::{config, Result};
use crate::vector::DecisionVector;

/// How the ground-truth model moves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Drift {
    /// Constant within each of `stages` equal blocks, redrawn uniformly from
    /// the domain at every block start.
    Piecewise { stages: usize },
    /// Projected random walk with step length `step_scale · D / T`.
    RandomWalk {
        #[serde(default = "one")]
        step_scale: f64,
    },
}

fn one() -> f64 {
    1.0
}

fn default_noise() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentConfig {
    pub horizon: usize,
    pub dim: usize,
    pub domain: Domain,
    pub drift: Drift,
    #[serde(default = "default_noise")]
    pub noise_max: f64,
    #[serde(default)]
    pub seed: u64,
    /// Starting ground truth; drawn uniformly from the domain when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_target: Option<Vec<f64>>,
}

impl EnvironmentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.horizon < 1 {
            return Err(config("environment.horizon must be at least 1"));
        }
        if self.dim != self.domain.dim() {
            return Err(config(format!(
                "environment.dim is {} but the domain has dimension {}",
                self.dim,
                self.domain.dim()
            )));
        }
        match self.drift {
            Drift::Piecewise { stages } if stages < 1 => {
                return Err(config("environment.drift.stages must be at least 1"))
            }
            Drift::RandomWalk { step_scale } if !(step_scale >= 0.0 && step_scale.is_finite()) => {
                return Err(config("environment.drift.step_scale must be non-negative"))
            }
            _ => {}
        }
        if !(self.noise_max >= 0.0 && self.noise_max.is_finite()) {
            return Err(config("environment.noise_max must be non-negative"));
        }
        if let Some(w) = &self.initial_target {
            let w = DecisionVector::new(w.clone())?;
            w.check_dim(self.dim)?;
            if !self.domain.contains(&w, self.domain.tolerance())? {
                return Err(config("environment.initial_target lies outside the domain"));
            }
        }
        Ok(())
    }
}

/// One round of data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub feature: DecisionVector,
    pub label: f64,
    /// Ground-truth model `w*_t`.
    pub target: DecisionVector,
}

impl Sample {
    /// `(½(xᵀw − y)², (xᵀw − y)·x)`
    pub fn loss_and_grad(&self, w: &DecisionVector) -> Result<(f64, DecisionVector)> {
        w.check_dim(self.feature.dim())?;
        let r = self.feature.dot(w) - self.label;
        Ok((0.5 * r * r, self.feature.scale(r)))
    }

    pub fn loss(&self, w: &DecisionVector) -> f64 {
        let r = self.feature.dot(w) - self.label;
        0.5 * r * r
    }
}

/// Free-function form of [`Sample::loss_and_grad`].
pub fn loss_and_grad(sample: &Sample, w: &DecisionVector) -> Result<(f64, DecisionVector)> {
    sample.loss_and_grad(w)
}

/// Deterministic stream for the given configuration.
pub fn generate_stream(cfg: &EnvironmentConfig) -> Result<Vec<Sample>> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let domain = &cfg.domain;
    let diameter = domain.diameter();
    let feature_radius = diameter / 2.0;
    let t_total = cfg.horizon;

    let mut target = match &cfg.initial_target {
        Some(w) => DecisionVector::new(w.clone())?,
        None => domain.sample_uniform(&mut rng),
    };
    let mut stage = 0usize;
    let mut out = Vec::with_capacity(t_total);
    for t in 0..t_total {
        match cfg.drift {
            Drift::Piecewise { stages } => {
                let s = t * stages / t_total;
                if s != stage {
                    stage = s;
                    target = domain.sample_uniform(&mut rng);
                }
            }
            Drift::RandomWalk { step_scale } => {
                if t > 0 {
                    let step = step_scale * diameter / t_total as f64;
                    let dir = random_direction(&mut rng, cfg.dim);
                    target = domain.project(&target.axpy(step, &dir))?;
                }
            }
        }
        let feature =
            DecisionVector::from_raw(unit_ball_sample(&mut rng, cfg.dim)).scale(feature_radius);
        let noise = if cfg.noise_max > 0.0 {
            rng.random_range(0.0..cfg.noise_max)
        } else {
            0.0
        };
        let label = feature.dot(&target) + noise;
        out.push(Sample {
            feature,
            label,
            target: target.clone(),
        });
    }
    Ok(out)
}

fn random_direction<R: Rng>(rng: &mut R, dim: usize) -> DecisionVector {
    loop {
        let g: Vec<f64> = (0..dim)
            .map(|_| rng.sample(rand_distr::StandardNormal))
            .collect();
        let n = crate::vector::norm(&g);
        if n > 0.0 {
            return DecisionVector::from_raw(g.into_iter().map(|x| x / n).collect());
        }
    }
}

/// Gradient and smoothness bounds valid over the whole domain for this stream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StreamBounds {
    /// `max_t ‖x_t‖ (‖x_t‖ R + |y_t|)` with `R` the largest member norm.
    pub g: f64,
    /// `max_t ‖x_t‖²`
    pub l: f64,
}

pub fn stream_bounds(samples: &[Sample], domain: &Domain) -> StreamBounds {
    let r = domain.max_norm();
    let mut g: f64 = 0.0;
    let mut l: f64 = 0.0;
    for s in samples {
        let n = s.feature.norm();
        g = g.max(n * (n * r + s.label.abs()));
        l = l.max(n * n);
    }
    StreamBounds { g, l }
}

/// Writes `t, x_1..x_d, y, w_1..w_d` rows.
pub fn write_stream_csv<W: Write>(samples: &[Sample], mut w: W) -> std::io::Result<()> {
    let d = samples.first().map_or(0, |s| s.feature.dim());
    let mut header = vec!["t".to_string()];
    header.extend((1..=d).map(|i| format!("x{i}")));
    header.push("y".into());
    header.extend((1..=d).map(|i| format!("w{i}")));
    writeln!(w, "{}", header.join(","))?;
    for (t, s) in samples.iter().enumerate() {
        let mut row = vec![(t + 1).to_string()];
        row.extend(s.feature.iter().map(|v| v.to_string()));
        row.push(s.label.to_string());
        row.extend(s.target.iter().map(|v| v.to_string()));
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}
