//! Config audit: derived pools, rates and thresholds plus consistency
//! warnings.

use nonstat_oco::algorithms::MetaMode;
use nonstat_oco::meta::{Hedge, HedgeRate};

use crate::config::BenchConfig;
use crate::BenchError;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Validation {
    pub warnings: Vec<String>,
    /// Human-readable audit lines.
    pub lines: Vec<String>,
}

pub fn validate(cfg: &BenchConfig) -> Result<Validation, BenchError> {
    cfg.check()?;
    let mut v = Validation::default();
    let c = cfg.constants();
    let domain_d = cfg.environment.domain.diameter();
    if (c.d - domain_d).abs() > 1e-9 * domain_d {
        v.warnings.push(format!(
            "constants.d = {} differs from the domain diameter {domain_d}",
            c.d
        ));
    }
    let derived = BenchConfig {
        constants: Default::default(),
        ..cfg.clone()
    }
    .constants();
    if c.g < derived.g {
        v.warnings.push(format!(
            "constants.g = {} is below the gradient bound {} of this environment; \
             feedback losses may leave [-1/2, 1/2]",
            c.g, derived.g
        ));
    }
    v.lines.push(format!(
        "constants: G={} D={} L={} delta={} T={}",
        c.g, c.d, c.l, c.delta, c.horizon
    ));
    for alg in cfg.resolve_algorithms()? {
        let a = &alg.config;
        let mut line = format!("{}: ", alg.label);
        if a.pool.is_empty() {
            line.push_str(&format!("SOGD learners numerator={:.6e}", a.sogd_numerator()));
        } else {
            let pool: Vec<String> = a.pool.iter().map(|e| format!("{e:.6e}")).collect();
            line.push_str(&format!("N={} pool=[{}]", a.pool.len(), pool.join(", ")));
        }
        match a.meta {
            MetaMode::Fixed { rate } => line.push_str(&format!(" meta=fixed eps={rate:.6e}")),
            MetaMode::SelfConfident if !a.pool.is_empty() => {
                let h = Hedge::new(a.pool.len(), HedgeRate::SelfConfident { diameter: c.d })
                    .map_err(|e| BenchError::config("algorithms", e.to_string()))?;
                line.push_str(&format!(" meta=self_confident eps_1={:.6e}", h.learning_rate()));
            }
            MetaMode::SelfConfident => line.push_str(" meta=adapt_ml_prod"),
        }
        if let Some(p) = a.threshold_params() {
            let th: Vec<String> = [1usize, 2, 4, 8]
                .iter()
                .map(|&m| {
                    p.threshold(m)
                        .map(|g| format!("G({m})={g:.6e}"))
                        .unwrap_or_else(|e| e.to_string())
                })
                .collect();
            line.push_str(&format!(" threshold_scale={} {}", a.threshold_scale, th.join(" ")));
        }
        v.lines.push(line);
    }
    Ok(v)
}
