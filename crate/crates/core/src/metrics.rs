//! Dynamic regret, path length, and brute-force interval regret.

use serde::{Deserialize, Serialize};

use crate::domains::Domain;
use crate::environment::Sample;
use crate::error::{usage, Result};
use crate::vector::DecisionVector;

/// Largest horizon accepted by [`adaptive_regret_bruteforce`].
pub const BRUTEFORCE_MAX_HORIZON: usize = 2000;

/// Inner solves stop once the gradient mapping of the per-round averaged
/// interval objective drops below this.
pub const INNER_RESIDUAL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretReport {
    /// Cumulative learner loss after each round.
    pub cumulative_loss: Vec<f64>,
    /// `Σ f_t(x_t) − Σ f_t(u_t)`
    pub dynamic_regret: f64,
    /// `P_T = Σ_{t≥2} ‖u_t − u_{t−1}‖`
    pub path_length: f64,
    /// `F_T = Σ f_t(u_t)`
    pub comparator_loss: f64,
    /// Worst regret per interval length, when computed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adaptive_regret_table: Option<Vec<(usize, f64)>>,
    /// Cumulative wall-clock time after each round, when measured.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub wall_time_ns: Vec<u64>,
}

pub fn path_length(comparators: &[DecisionVector]) -> f64 {
    comparators.windows(2).map(|w| w[0].distance(&w[1])).sum()
}

/// Regret of `decisions` against the comparator sequence under per-round
/// losses `loss(t, w)` with `t` starting at 0.
pub fn dynamic_regret<F>(
    decisions: &[DecisionVector],
    comparators: &[DecisionVector],
    loss: F,
) -> Result<RegretReport>
where
    F: Fn(usize, &DecisionVector) -> f64,
{
    if decisions.len() != comparators.len() {
        return Err(usage(format!(
            "{} decisions but {} comparators",
            decisions.len(),
            comparators.len()
        )));
    }
    let mut cumulative_loss = Vec::with_capacity(decisions.len());
    let mut total = 0.0;
    let mut comparator_loss = 0.0;
    for (t, (x, u)) in decisions.iter().zip(comparators).enumerate() {
        total += loss(t, x);
        comparator_loss += loss(t, u);
        cumulative_loss.push(total);
    }
    Ok(RegretReport {
        cumulative_loss,
        dynamic_regret: total - comparator_loss,
        path_length: path_length(comparators),
        comparator_loss,
        adaptive_regret_table: None,
        wall_time_ns: Vec::new(),
    })
}

/// Worst interval regret found by exhaustive search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveRegret {
    /// 1-based inclusive interval attaining the maximum.
    pub worst_interval: (usize, usize),
    pub worst_regret: f64,
    /// `(length, max over intervals of that length)` for every length
    /// `≥ min_len`.
    pub by_length: Vec<(usize, f64)>,
    /// Largest averaged gradient-mapping residual over all inner solves.
    pub max_residual: f64,
}

/// `max_{[r,s], s−r+1 ≥ min_len} (Σ_{t=r}^{s} f_t(x_t) − min_{u∈X} Σ_{t=r}^{s} f_t(u))`
/// for square losses. Intended for small horizons.
pub fn adaptive_regret_bruteforce(
    decisions: &[DecisionVector],
    samples: &[Sample],
    domain: &Domain,
    min_len: usize,
) -> Result<AdaptiveRegret> {
    let t_total = samples.len();
    if decisions.len() != t_total {
        return Err(usage(format!(
            "{} decisions but {} samples",
            decisions.len(),
            t_total
        )));
    }
    if t_total > BRUTEFORCE_MAX_HORIZON {
        return Err(usage(format!(
            "brute-force interval regret supports at most {BRUTEFORCE_MAX_HORIZON} rounds, got {t_total}"
        )));
    }
    if min_len < 1 || min_len > t_total {
        return Err(usage(format!(
            "min_len must lie in [1, {t_total}], got {min_len}"
        )));
    }
    let d = domain.dim();
    let learner: Vec<f64> = decisions
        .iter()
        .zip(samples)
        .map(|(x, s)| s.loss(x))
        .collect();

    let mut by_length = vec![f64::NEG_INFINITY; t_total + 1];
    let mut worst = (f64::NEG_INFINITY, (1, 1));
    let mut max_residual: f64 = 0.0;
    let mut q = Quadratic::new(d);
    for r in 0..t_total {
        q.reset();
        let mut u = DecisionVector::zeros(d);
        let mut lip = 0.0;
        let mut learner_loss = 0.0;
        for s in r..t_total {
            q.add(&samples[s]);
            learner_loss += learner[s];
            let len = s - r + 1;
            if len < min_len {
                continue;
            }
            let (sol, l_used, res) = q.minimize(domain, u, lip, len as f64)?;
            u = sol;
            lip = l_used;
            max_residual = max_residual.max(res);
            let regret = learner_loss - q.value(&u);
            if regret > by_length[len] {
                by_length[len] = regret;
            }
            if regret > worst.0 {
                worst = (regret, (r + 1, s + 1));
            }
        }
    }
    Ok(AdaptiveRegret {
        worst_interval: worst.1,
        worst_regret: worst.0,
        by_length: (min_len..=t_total).map(|l| (l, by_length[l])).collect(),
        max_residual,
    })
}

/// `F(u) = ½uᵀAu − bᵀu + c` accumulated from square losses.
struct Quadratic {
    d: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    c: f64,
}

impl Quadratic {
    fn new(d: usize) -> Self {
        Self {
            d,
            a: vec![0.0; d * d],
            b: vec![0.0; d],
            c: 0.0,
        }
    }

    fn reset(&mut self) {
        self.a.iter_mut().for_each(|v| *v = 0.0);
        self.b.iter_mut().for_each(|v| *v = 0.0);
        self.c = 0.0;
    }

    fn add(&mut self, s: &Sample) {
        let x = s.feature.as_slice();
        for i in 0..self.d {
            for j in 0..self.d {
                self.a[i * self.d + j] += x[i] * x[j];
            }
            self.b[i] += s.label * x[i];
        }
        self.c += 0.5 * s.label * s.label;
    }

    fn hess(&self, u: &[f64]) -> Vec<f64> {
        (0..self.d)
            .map(|i| crate::vector::dot(&self.a[i * self.d..(i + 1) * self.d], u))
            .collect()
    }

    fn value(&self, u: &DecisionVector) -> f64 {
        let au = self.hess(u);
        0.5 * crate::vector::dot(&au, u) - crate::vector::dot(&self.b, u) + self.c
    }

    fn grad(&self, u: &[f64]) -> Vec<f64> {
        let mut g = self.hess(u);
        for (gi, bi) in g.iter_mut().zip(&self.b) {
            *gi -= bi;
        }
        g
    }

    /// Accelerated projected gradient with backtracking and restarts.
    /// Returns the minimizer, the final curvature estimate and the averaged
    /// gradient-mapping residual.
    fn minimize(
        &self,
        domain: &Domain,
        start: DecisionVector,
        lip_hint: f64,
        len: f64,
    ) -> Result<(DecisionVector, f64, f64)> {
        let trace: f64 = (0..self.d).map(|i| self.a[i * self.d + i]).sum();
        if trace == 0.0 {
            return Ok((start, lip_hint, 0.0));
        }
        let mut lip = if lip_hint > 0.0 {
            lip_hint
        } else {
            trace / self.d as f64
        };
        let mut x = domain.project(&start)?;
        let mut fx = self.value(&x);
        let mut y = x.clone();
        let mut theta = 1.0f64;
        let mut residual = f64::INFINITY;
        for _ in 0..200_000 {
            let gy = DecisionVector::from_raw(self.grad(&y));
            let fy = self.value(&y);
            // backtrack until the quadratic upper model holds at the step
            let (x_new, fx_new) = loop {
                let cand = domain.project(&y.axpy(-1.0 / lip, &gy))?;
                let diff = cand.sub(&y);
                let f_cand = self.value(&cand);
                let model = fy + gy.dot(&diff) + 0.5 * lip * diff.norm_sq();
                if f_cand <= model + 1e-12 * fy.abs().max(1.0) || lip >= trace * 4.0 {
                    break (cand, f_cand);
                }
                lip = (lip * 2.0).min(trace * 4.0);
            };
            // residual at the new iterate
            let gx = DecisionVector::from_raw(self.grad(&x_new));
            let px = domain.project(&x_new.axpy(-1.0 / lip, &gx))?;
            residual = lip * x_new.distance(&px) / len;
            if residual <= INNER_RESIDUAL_TOL {
                return Ok((x_new, lip, residual));
            }
            if fx_new > fx {
                theta = 1.0;
                y = x.clone();
                continue;
            }
            let theta_new = 0.5 * (1.0 + (1.0 + 4.0 * theta * theta).sqrt());
            let mom = (theta - 1.0) / theta_new;
            y = x_new.axpy(mom, &x_new.sub(&x));
            theta = theta_new;
            x = x_new;
            fx = fx_new;
        }
        Ok((x, lip, residual))
    }
}
