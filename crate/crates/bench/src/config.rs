//! Benchmark configuration: JSON schema, defaults and normalisation.

use std::path::{Path, PathBuf};

use nonstat_oco::algorithms::{AlgorithmConfig, AlgorithmKind, PoolKind, ProblemConstants};
use nonstat_oco::environment::EnvironmentConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::BenchError;

/// One contender, either by bare name or with overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlgorithmEntry {
    Name(String),
    Spec(AlgorithmSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmSpec {
    pub name: String,
    /// Defaults to `name`, suffixed with the pool when one is given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pool: Option<PoolKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pool_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold_scale: Option<f64>,
    /// SOGD numerator as a multiple of `D`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sogd_scale: Option<f64>,
}

impl AlgorithmEntry {
    pub fn spec(&self) -> AlgorithmSpec {
        match self {
            AlgorithmEntry::Name(name) => AlgorithmSpec {
                name: name.clone(),
                label: None,
                pool: None,
                pool_size: None,
                threshold_scale: None,
                sogd_scale: None,
            },
            AlgorithmEntry::Spec(s) => s.clone(),
        }
    }
}

/// Optional overrides of the problem constants. Missing values are derived
/// from the environment: `D` is the domain diameter, `L = (D/2)²` bounds the
/// squared feature norm and `G = (D/2)(D·R + noise_max)` bounds the gradient
/// norm over the domain, with `R` its largest member norm.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsOverride {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdaptiveRegretSpec {
    pub min_len: usize,
}

fn default_seeds() -> Vec<u64> {
    (0..5).collect()
}

fn default_record_every() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub environment: EnvironmentConfig,
    pub algorithms: Vec<AlgorithmEntry>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    #[serde(default)]
    pub constants: ConstantsOverride,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adaptive_regret: Option<AdaptiveRegretSpec>,
}

/// A contender after defaults and overrides are applied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedAlgorithm {
    pub label: String,
    pub config: AlgorithmConfig,
}

impl BenchConfig {
    pub fn from_json(text: &str) -> Result<Self, BenchError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            BenchError::config(path, e.into_inner().to_string())
        })
    }

    pub fn load(path: &Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| BenchError::config("<file>", format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Structural checks that do not need the learners.
    pub fn check(&self) -> Result<(), BenchError> {
        self.environment
            .validate()
            .map_err(|e| BenchError::config("environment", e.to_string()))?;
        if self.algorithms.is_empty() {
            return Err(BenchError::config("algorithms", "at least one algorithm is required"));
        }
        if self.seeds.is_empty() {
            return Err(BenchError::config("seeds", "at least one seed is required"));
        }
        if self.record_every < 1 {
            return Err(BenchError::config("record_every", "must be at least 1"));
        }
        for (name, v) in [
            ("g", self.constants.g),
            ("d", self.constants.d),
            ("l", self.constants.l),
            ("delta", self.constants.delta),
        ] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(BenchError::config(
                        format!("constants.{name}"),
                        format!("must be positive, got {v}"),
                    ));
                }
            }
        }
        let mut seeds = self.seeds.clone();
        seeds.sort_unstable();
        seeds.dedup();
        if seeds.len() != self.seeds.len() {
            return Err(BenchError::config("seeds", "seeds must be distinct"));
        }
        if let Some(a) = self.adaptive_regret {
            if a.min_len < 1 || a.min_len > self.environment.horizon {
                return Err(BenchError::config(
                    "adaptive_regret.min_len",
                    format!("must lie in [1, {}]", self.environment.horizon),
                ));
            }
        }
        self.resolve_algorithms().map(|_| ())
    }

    pub fn constants(&self) -> ProblemConstants {
        let env = &self.environment;
        let d_domain = env.domain.diameter();
        let half = d_domain / 2.0;
        let r = env.domain.max_norm();
        ProblemConstants {
            g: self
                .constants
                .g
                .unwrap_or(half * (d_domain * r + env.noise_max)),
            d: self.constants.d.unwrap_or(d_domain),
            l: self.constants.l.unwrap_or(half * half),
            delta: self.constants.delta.unwrap_or(1.0),
            horizon: env.horizon,
        }
    }

    pub fn resolve_algorithms(&self) -> Result<Vec<ResolvedAlgorithm>, BenchError> {
        let constants = self.constants();
        let mut out: Vec<ResolvedAlgorithm> = Vec::new();
        for (i, entry) in self.algorithms.iter().enumerate() {
            let path = |field: &str| format!("algorithms[{i}]{field}");
            let spec = entry.spec();
            let kind = AlgorithmKind::from_name(&spec.name).ok_or_else(|| {
                let known: Vec<&str> = AlgorithmKind::ALL.iter().map(|k| k.name()).collect();
                BenchError::config(
                    path(".name"),
                    format!("unknown algorithm `{}`; expected one of {}", spec.name, known.join(", ")),
                )
            })?;
            let mut cfg = AlgorithmConfig::new(kind, constants)
                .map_err(|e| BenchError::config("constants", e.to_string()))?;
            if let Some(pool) = spec.pool {
                cfg = cfg
                    .with_pool_kind(pool)
                    .map_err(|e| BenchError::config(path(".pool"), e.to_string()))?;
            }
            if let Some(n) = spec.pool_size {
                cfg = cfg
                    .with_pool_size(n)
                    .map_err(|e| BenchError::config(path(".pool_size"), e.to_string()))?;
            }
            if let Some(s) = spec.threshold_scale {
                cfg = cfg
                    .with_threshold_scale(s)
                    .map_err(|e| BenchError::config(path(".threshold_scale"), e.to_string()))?;
            }
            if let Some(s) = spec.sogd_scale {
                cfg = cfg
                    .with_sogd_scale(s)
                    .map_err(|e| BenchError::config(path(".sogd_scale"), e.to_string()))?;
            }
            cfg.validate()
                .map_err(|e| BenchError::config(path(""), e.to_string()))?;
            let label = spec.label.clone().unwrap_or_else(|| match spec.pool {
                Some(PoolKind::Worstcase) => format!("{}-worstcase", spec.name),
                Some(PoolKind::Smallloss) => format!("{}-smallloss", spec.name),
                None => spec.name.clone(),
            });
            if label.is_empty() || !label.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c)) {
                return Err(BenchError::config(
                    path(".label"),
                    format!("`{label}` must be non-empty and use only [A-Za-z0-9._-]"),
                ));
            }
            if out.iter().any(|a| a.label == label) {
                return Err(BenchError::config(path(".label"), format!("duplicate label `{label}`")));
            }
            out.push(ResolvedAlgorithm { label, config: cfg });
        }
        Ok(out)
    }

    /// The semantic content of the config: everything except where the
    /// output goes, with defaults made explicit.
    pub fn canonical(&self) -> BenchConfig {
        BenchConfig {
            output_dir: None,
            algorithms: self
                .algorithms
                .iter()
                .map(|a| AlgorithmEntry::Spec(a.spec()))
                .collect(),
            ..self.clone()
        }
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        config_hash(&self.canonical())
    }
}

/// Hash of an already canonical config, as embedded in reports.
pub fn config_hash(canonical: &BenchConfig) -> String {
    let bytes = serde_json::to_vec(canonical).expect("config serialises");
    hex::encode(Sha256::digest(&bytes))
}
