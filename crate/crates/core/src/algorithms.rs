//! Online learners built from the reduction, base learners, meta learners
//! and covers.
//!
//! Every learner follows the same protocol: it holds the decision `x_t`,
//! receives feedback about `f_t` at `x_t`, and returns `x_{t+1}`.

use serde::{Deserialize, Serialize};

use crate::base::{Ogd, Sogd};
use crate::covers::{MarkerRegistry, ThresholdParams, ThresholdVariant};
use crate::domains::{CountingDomain, Domain};
use crate::error::{config, usage, Result};
use crate::meta::{amlprod_feedback, AdaMlProd, Hedge, HedgeRate};
use crate::oracle::Feedback;
use crate::surrogate::ReductionState;
use crate::vector::DecisionVector;

/// Gradient bound `G`, diameter `D`, smoothness `L`, SOGD offset `δ` and
/// horizon `T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConstants {
    pub g: f64,
    pub d: f64,
    pub l: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    pub horizon: usize,
}

fn default_delta() -> f64 {
    1.0
}

fn one() -> f64 {
    1.0
}

impl ProblemConstants {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("g", self.g), ("d", self.d), ("l", self.l), ("delta", self.delta)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(config(format!("constants.{name} must be positive, got {v}")));
            }
        }
        if self.horizon < 1 {
            return Err(config("constants.horizon must be at least 1"));
        }
        Ok(())
    }

    fn threshold(&self, variant: ThresholdVariant, n: Option<usize>, scale: f64) -> ThresholdParams {
        ThresholdParams {
            g: self.g,
            d: self.d,
            l: self.l,
            delta: self.delta,
            horizon: self.horizon,
            n_experts: n,
            variant,
            scale,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgorithmKind {
    EfficientDynamicWorstcase,
    EfficientDynamicSmallloss,
    EfficientAdaptive,
    EfficientIntervalDynamic,
    BaselineAder,
    BaselineAdaptiveMultiproj,
}

impl AlgorithmKind {
    pub const ALL: [AlgorithmKind; 6] = [
        AlgorithmKind::EfficientDynamicWorstcase,
        AlgorithmKind::EfficientDynamicSmallloss,
        AlgorithmKind::EfficientAdaptive,
        AlgorithmKind::EfficientIntervalDynamic,
        AlgorithmKind::BaselineAder,
        AlgorithmKind::BaselineAdaptiveMultiproj,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AlgorithmKind::EfficientDynamicWorstcase => "efficient_dynamic_worstcase",
            AlgorithmKind::EfficientDynamicSmallloss => "efficient_dynamic_smallloss",
            AlgorithmKind::EfficientAdaptive => "efficient_adaptive",
            AlgorithmKind::EfficientIntervalDynamic => "efficient_interval_dynamic",
            AlgorithmKind::BaselineAder => "baseline_ader",
            AlgorithmKind::BaselineAdaptiveMultiproj => "baseline_adaptive_multiproj",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    /// Whether the learner reads `f_t(x_t)` every round.
    pub fn uses_values(self) -> bool {
        matches!(
            self,
            AlgorithmKind::EfficientAdaptive
                | AlgorithmKind::EfficientIntervalDynamic
                | AlgorithmKind::BaselineAdaptiveMultiproj
        )
    }
}

/// Which step-size pool a dynamic learner uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoolKind {
    /// `η_i = 2^{i−1}(D/G)√(5/(2T))`
    Worstcase,
    /// `η_i = 2^{i−1}√(5D²/(1+8LGDT))`
    Smallloss,
}

/// Hedge learning-rate mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum MetaMode {
    Fixed { rate: f64 },
    SelfConfident,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmConfig {
    pub kind: AlgorithmKind,
    pub constants: ProblemConstants,
    /// Step sizes of the OGD experts; empty for the SOGD-based learners.
    pub pool: Vec<f64>,
    pub pool_kind: Option<PoolKind>,
    pub meta: MetaMode,
    pub threshold_scale: f64,
    /// SOGD step numerator as a multiple of `D`.
    #[serde(default = "one")]
    pub sogd_scale: f64,
}

/// `N = ⌈½ log₂(1 + 2T/5)⌉ + 1`
pub fn worstcase_pool_size(c: &ProblemConstants) -> usize {
    let t = c.horizon as f64;
    (0.5 * (1.0 + 2.0 * t / 5.0).log2()).ceil() as usize + 1
}

/// `N = ⌈½ log₂((5D² + 2D²T)(1 + 8LGDT)/(5D²))⌉ + 1`
pub fn smallloss_pool_size(c: &ProblemConstants) -> usize {
    let t = c.horizon as f64;
    let d2 = c.d * c.d;
    let arg = (5.0 * d2 + 2.0 * d2 * t) * (1.0 + 8.0 * c.l * c.g * c.d * t) / (5.0 * d2);
    (0.5 * arg.log2()).ceil() as usize + 1
}

fn geometric(first: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| first * 2f64.powi(i as i32)).collect()
}

pub fn worstcase_pool(c: &ProblemConstants, n: usize) -> Vec<f64> {
    let first = (c.d / c.g) * (5.0 / (2.0 * c.horizon as f64)).sqrt();
    geometric(first, n)
}

pub fn smallloss_pool(c: &ProblemConstants, n: usize) -> Vec<f64> {
    let t = c.horizon as f64;
    let first = (5.0 * c.d * c.d / (1.0 + 8.0 * c.l * c.g * c.d * t)).sqrt();
    geometric(first, n)
}

/// `ε = √(ln N / (1 + G²D²T))`
pub fn worstcase_meta_rate(c: &ProblemConstants, n: usize) -> f64 {
    let gd = c.g * c.d;
    ((n as f64).ln() / (1.0 + gd * gd * c.horizon as f64)).sqrt()
}

pub fn configure_dynamic_worstcase(c: ProblemConstants) -> Result<AlgorithmConfig> {
    c.validate()?;
    let n = worstcase_pool_size(&c);
    Ok(AlgorithmConfig {
        kind: AlgorithmKind::EfficientDynamicWorstcase,
        constants: c,
        pool: worstcase_pool(&c, n),
        pool_kind: Some(PoolKind::Worstcase),
        meta: MetaMode::Fixed {
            rate: worstcase_meta_rate(&c, n),
        },
        threshold_scale: 1.0,
        sogd_scale: 1.0,
    })
}

pub fn configure_dynamic_smallloss(c: ProblemConstants) -> Result<AlgorithmConfig> {
    c.validate()?;
    let n = smallloss_pool_size(&c);
    Ok(AlgorithmConfig {
        kind: AlgorithmKind::EfficientDynamicSmallloss,
        constants: c,
        pool: smallloss_pool(&c, n),
        pool_kind: Some(PoolKind::Smallloss),
        meta: MetaMode::SelfConfident,
        threshold_scale: 1.0,
        sogd_scale: 1.0,
    })
}

impl AlgorithmConfig {
    /// Default configuration of each learner. The Ader baseline uses the
    /// worst-case pool; switch with [`Self::with_pool_kind`].
    pub fn new(kind: AlgorithmKind, c: ProblemConstants) -> Result<Self> {
        c.validate()?;
        let cfg = match kind {
            AlgorithmKind::EfficientDynamicWorstcase => configure_dynamic_worstcase(c)?,
            AlgorithmKind::EfficientDynamicSmallloss => configure_dynamic_smallloss(c)?,
            AlgorithmKind::BaselineAder => AlgorithmConfig {
                kind,
                ..configure_dynamic_worstcase(c)?
            },
            AlgorithmKind::EfficientIntervalDynamic => AlgorithmConfig {
                kind,
                ..configure_dynamic_smallloss(c)?
            },
            AlgorithmKind::EfficientAdaptive | AlgorithmKind::BaselineAdaptiveMultiproj => {
                AlgorithmConfig {
                    kind,
                    constants: c,
                    pool: Vec::new(),
                    pool_kind: None,
                    meta: MetaMode::SelfConfident,
                    threshold_scale: 1.0,
                    sogd_scale: 1.0,
                }
            }
        };
        Ok(cfg)
    }

    /// Rebuilds the pool and meta rate from the chosen formula.
    pub fn with_pool_kind(mut self, kind: PoolKind) -> Result<Self> {
        if self.pool.is_empty() {
            return Err(usage(format!("{} has no step-size pool", self.kind.name())));
        }
        let c = self.constants;
        let (pool, meta) = match kind {
            PoolKind::Worstcase => {
                let n = worstcase_pool_size(&c);
                (
                    worstcase_pool(&c, n),
                    MetaMode::Fixed {
                        rate: worstcase_meta_rate(&c, n),
                    },
                )
            }
            PoolKind::Smallloss => (smallloss_pool(&c, smallloss_pool_size(&c)), MetaMode::SelfConfident),
        };
        self.pool = pool;
        self.meta = meta;
        self.pool_kind = Some(kind);
        Ok(self)
    }

    /// Keeps the first `n` step sizes of the formula pool (extending it
    /// geometrically if needed) and recomputes a fixed meta rate for `n`.
    pub fn with_pool_size(mut self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(config("pool size must be at least 1"));
        }
        let first = *self
            .pool
            .first()
            .ok_or_else(|| usage(format!("{} has no step-size pool", self.kind.name())))?;
        self.pool = geometric(first, n);
        if let MetaMode::Fixed { .. } = self.meta {
            self.meta = MetaMode::Fixed {
                rate: worstcase_meta_rate(&self.constants, n),
            };
        }
        Ok(self)
    }

    pub fn with_threshold_scale(mut self, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(config(format!("threshold_scale must be positive, got {scale}")));
        }
        self.threshold_scale = scale;
        Ok(self)
    }

    pub fn with_sogd_scale(mut self, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(config(format!("sogd_scale must be positive, got {scale}")));
        }
        self.sogd_scale = scale;
        Ok(self)
    }

    /// `sogd_scale · D`
    pub fn sogd_numerator(&self) -> f64 {
        self.sogd_scale * self.constants.d
    }

    /// Threshold parameters for the marker-based learners.
    pub fn threshold_params(&self) -> Option<ThresholdParams> {
        let c = &self.constants;
        match self.kind {
            AlgorithmKind::EfficientAdaptive | AlgorithmKind::BaselineAdaptiveMultiproj => {
                Some(c.threshold(ThresholdVariant::Adaptive, None, self.threshold_scale))
            }
            AlgorithmKind::EfficientIntervalDynamic => Some(c.threshold(
                ThresholdVariant::IntervalDynamic,
                Some(self.pool.len()),
                self.threshold_scale,
            )),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.constants.validate()?;
        if !(self.threshold_scale > 0.0 && self.threshold_scale.is_finite()) {
            return Err(config("threshold_scale must be positive"));
        }
        if !(self.sogd_scale > 0.0 && self.sogd_scale.is_finite()) {
            return Err(config("sogd_scale must be positive"));
        }
        let needs_pool = !matches!(
            self.kind,
            AlgorithmKind::EfficientAdaptive | AlgorithmKind::BaselineAdaptiveMultiproj
        );
        if needs_pool && self.pool.is_empty() {
            return Err(config(format!("{} needs a non-empty pool", self.kind.name())));
        }
        if self.pool.iter().any(|e| !(*e >= 0.0 && e.is_finite())) {
            return Err(config("step sizes must be finite and non-negative"));
        }
        if let MetaMode::Fixed { rate } = self.meta {
            if !(rate >= 0.0 && rate.is_finite()) {
                return Err(config("meta rate must be finite and non-negative"));
            }
        }
        if let Some(p) = self.threshold_params() {
            p.validate()?;
        }
        Ok(())
    }

    fn hedge_rate(&self) -> HedgeRate {
        match self.meta {
            MetaMode::Fixed { rate } => HedgeRate::Fixed(rate),
            MetaMode::SelfConfident => HedgeRate::SelfConfident {
                diameter: self.constants.d,
            },
        }
    }
}

/// Internal state snapshot for reporting.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub rounds: usize,
    /// Awake learner ids (or expert indices for the fixed ensembles).
    pub active_learners: Vec<usize>,
    /// Current combination weights aligned with `active_learners`.
    pub weights: Vec<f64>,
    /// Registered marker rounds.
    pub markers: Vec<usize>,
    /// Rounds whose surrogate loss had an active distance term.
    pub active_surrogate_rounds: u64,
}

pub trait OnlineLearner: Send {
    fn kind(&self) -> AlgorithmKind;
    /// Decision `x_t` for the upcoming round.
    fn decision(&self) -> &DecisionVector;
    /// Consumes feedback for the current round and returns `x_{t+1}`.
    fn round(&mut self, feedback: &dyn Feedback) -> Result<DecisionVector>;
    /// Total projections onto the feasible domain so far.
    fn projections_onto_x(&self) -> u64;
    fn diagnostics(&self) -> Diagnostics;
}

/// Instantiates the learner described by `cfg` on `domain`.
pub fn build_learner(cfg: &AlgorithmConfig, domain: &Domain) -> Result<Box<dyn OnlineLearner>> {
    cfg.validate()?;
    Ok(match cfg.kind {
        AlgorithmKind::EfficientDynamicWorstcase | AlgorithmKind::EfficientDynamicSmallloss => {
            Box::new(EfficientDynamic::new(cfg, domain)?)
        }
        AlgorithmKind::EfficientAdaptive => Box::new(EfficientAdaptive::new(cfg, domain)?),
        AlgorithmKind::EfficientIntervalDynamic => {
            Box::new(EfficientIntervalDynamic::new(cfg, domain)?)
        }
        AlgorithmKind::BaselineAder => Box::new(BaselineAder::new(cfg, domain)?),
        AlgorithmKind::BaselineAdaptiveMultiproj => {
            Box::new(BaselineAdaptiveMultiproj::new(cfg, domain)?)
        }
    })
}

/// Round bookkeeping shared by all learners.
#[derive(Debug, Clone)]
struct Clock {
    t: usize,
    horizon: usize,
}

impl Clock {
    fn new(horizon: usize) -> Self {
        Self { t: 0, horizon }
    }

    fn tick(&mut self, fb: &dyn Feedback) -> Result<usize> {
        let t = self.t + 1;
        if t > self.horizon {
            return Err(usage(format!("round {t} exceeds the horizon {}", self.horizon)));
        }
        if fb.round() != t {
            return Err(usage(format!(
                "feedback is for round {} but the learner expects round {t}",
                fb.round()
            )));
        }
        self.t = t;
        Ok(t)
    }
}

fn checked_gradient(fb: &dyn Feedback, dim: usize) -> Result<DecisionVector> {
    let g = fb.gradient();
    g.check_dim(dim)?;
    if !g.is_finite() {
        return Err(crate::error::Error::NonFinite("gradient"));
    }
    Ok(g)
}

fn weighted(weights: &[f64], points: &[&DecisionVector]) -> Result<DecisionVector> {
    DecisionVector::combine(weights.iter().copied().zip(points.iter().copied()))
        .ok_or_else(|| usage("cannot combine an empty set of decisions"))
}

/// Ensemble of fixed-step OGD experts on a ball combined by Hedge on
/// linearized losses.
#[derive(Debug, Clone)]
struct OgdEnsemble {
    experts: Vec<Ogd>,
    hedge: Hedge,
    combined: DecisionVector,
}

impl OgdEnsemble {
    fn new(start: DecisionVector, pool: &[f64], rate: HedgeRate) -> Result<Self> {
        Ok(Self {
            experts: pool.iter().map(|&eta| Ogd::new(start.clone(), eta)).collect(),
            hedge: Hedge::new(pool.len(), rate)?,
            combined: start,
        })
    }

    fn decision(&self) -> &DecisionVector {
        &self.combined
    }

    /// Losses use the local decisions held before the step.
    fn step(&mut self, grad: &DecisionVector, ball: &Domain) -> Result<&DecisionVector> {
        let losses: Vec<f64> = self.experts.iter().map(|e| grad.dot(e.decision())).collect();
        for e in &mut self.experts {
            e.step(grad, ball)?;
        }
        self.hedge.accumulate(&losses, grad.norm_sq())?;
        let p = self.hedge.weights();
        let pts: Vec<&DecisionVector> = self.experts.iter().map(|e| e.decision()).collect();
        self.combined = weighted(&p, &pts)?;
        Ok(&self.combined)
    }
}

/// Ader over the surrogate ball with one projection onto `X` per round.
pub struct EfficientDynamic {
    kind: AlgorithmKind,
    clock: Clock,
    red: ReductionState,
    ball: Domain,
    ensemble: OgdEnsemble,
    outside: u64,
}

impl EfficientDynamic {
    pub fn new(cfg: &AlgorithmConfig, domain: &Domain) -> Result<Self> {
        let red = ReductionState::new(domain.clone());
        let ball = red.domain_y().clone();
        let ensemble = OgdEnsemble::new(red.y().clone(), &cfg.pool, cfg.hedge_rate())?;
        Ok(Self {
            kind: cfg.kind,
            clock: Clock::new(cfg.constants.horizon),
            red,
            ball,
            ensemble,
            outside: 0,
        })
    }
}

impl OnlineLearner for EfficientDynamic {
    fn kind(&self) -> AlgorithmKind {
        self.kind
    }

    fn decision(&self) -> &DecisionVector {
        self.red.x()
    }

    fn round(&mut self, fb: &dyn Feedback) -> Result<DecisionVector> {
        self.clock.tick(fb)?;
        let grad = checked_gradient(fb, self.red.x().dim())?;
        let Self {
            red,
            ball,
            ensemble,
            outside,
            ..
        } = self;
        let (x, _) = red.round(grad, |spec| {
            if !spec.is_linear() {
                *outside += 1;
            }
            let g = spec.gradient_at_center();
            ensemble.step(&g, ball).cloned()
        })?;
        Ok(x)
    }

    fn projections_onto_x(&self) -> u64 {
        self.red.projections()
    }

    fn diagnostics(&self) -> Diagnostics {
        Diagnostics {
            rounds: self.clock.t,
            active_learners: (1..=self.ensemble.experts.len()).collect(),
            weights: self.ensemble.hedge.weights(),
            markers: Vec::new(),
            active_surrogate_rounds: self.outside,
        }
    }
}

/// A sleeping learner of the marker-based algorithms together with its id.
#[derive(Debug, Clone)]
struct Sleeper<B> {
    id: usize,
    inner: B,
}

/// Removes retired learners, spawns the new one and wakes its meta slot.
fn apply_marker<B>(
    registry: &mut MarkerRegistry,
    meta: &mut AdaMlProd,
    learners: &mut Vec<Sleeper<B>>,
    f_value: f64,
    t: usize,
    spawn: impl FnOnce() -> Result<B>,
) -> Result<()> {
    if let Some(ev) = registry.register_loss(f_value, t)? {
        meta.retire(&ev.retired)?;
        learners.retain(|l| !ev.retired.contains(&l.id));
        learners.push(Sleeper {
            id: ev.marker_index,
            inner: spawn()?,
        });
        meta.spawn(ev.marker_index, t)?;
    }
    Ok(())
}

fn new_registry(cfg: &AlgorithmConfig) -> Result<MarkerRegistry> {
    let params = cfg
        .threshold_params()
        .ok_or_else(|| usage(format!("{} has no threshold", cfg.kind.name())))?;
    MarkerRegistry::new(params)
}

/// SOGD learners on the surrogate ball over problem-dependent covers,
/// combined by Adapt-ML-Prod.
pub struct EfficientAdaptive {
    clock: Clock,
    constants: ProblemConstants,
    numerator: f64,
    red: ReductionState,
    ball: Domain,
    registry: MarkerRegistry,
    meta: AdaMlProd,
    learners: Vec<Sleeper<Sogd>>,
    outside: u64,
}

impl EfficientAdaptive {
    pub fn new(cfg: &AlgorithmConfig, domain: &Domain) -> Result<Self> {
        let c = cfg.constants;
        let red = ReductionState::new(domain.clone());
        let ball = red.domain_y().clone();
        let mut meta = AdaMlProd::new();
        meta.spawn(1, 1)?;
        let learners = vec![Sleeper {
            id: 1,
            inner: Sogd::new(red.y().clone(), cfg.sogd_numerator(), c.delta, 1),
        }];
        Ok(Self {
            clock: Clock::new(c.horizon),
            constants: c,
            numerator: cfg.sogd_numerator(),
            red,
            ball,
            registry: new_registry(cfg)?,
            meta,
            learners,
            outside: 0,
        })
    }

    pub fn registry(&self) -> &MarkerRegistry {
        &self.registry
    }
}

impl OnlineLearner for EfficientAdaptive {
    fn kind(&self) -> AlgorithmKind {
        AlgorithmKind::EfficientAdaptive
    }

    fn decision(&self) -> &DecisionVector {
        self.red.x()
    }

    fn round(&mut self, fb: &dyn Feedback) -> Result<DecisionVector> {
        let t = self.clock.tick(fb)?;
        let grad = checked_gradient(fb, self.red.x().dim())?;
        let f_value = fb.value();
        let Self {
            constants: c,
            numerator,
            red,
            ball,
            registry,
            meta,
            learners,
            outside,
            ..
        } = self;
        let y_t = red.y().clone();
        apply_marker(registry, meta, learners, f_value, t, || {
            Ok(Sogd::new(y_t.clone(), *numerator, c.delta, t))
        })?;
        let (x, _) = red.round(grad, |spec| {
            if !spec.is_linear() {
                *outside += 1;
            }
            let g = spec.gradient_at_center();
            let locals: Vec<&DecisionVector> = learners.iter().map(|l| l.inner.decision()).collect();
            let fbl = amlprod_feedback(&g, spec.center_y(), &locals, c.g, c.d)?;
            for l in learners.iter_mut() {
                l.inner.step(&g, ball)?;
            }
            meta.update(fbl.hat, &fbl.ells)?;
            let p = meta.weights()?;
            let pts: Vec<&DecisionVector> = learners.iter().map(|l| l.inner.decision()).collect();
            weighted(&p, &pts)
        })?;
        Ok(x)
    }

    fn projections_onto_x(&self) -> u64 {
        self.red.projections()
    }

    fn diagnostics(&self) -> Diagnostics {
        Diagnostics {
            rounds: self.clock.t,
            active_learners: self.learners.iter().map(|l| l.id).collect(),
            weights: self.meta.weights().unwrap_or_default(),
            markers: self.registry.markers().to_vec(),
            active_surrogate_rounds: self.outside,
        }
    }
}

/// Efficient dynamic learners over problem-dependent covers, combined by
/// Adapt-ML-Prod. Each inner learner runs its own Hedge with a
/// self-confident rate that only sees gradients from its start round on.
pub struct EfficientIntervalDynamic {
    clock: Clock,
    constants: ProblemConstants,
    pool: Vec<f64>,
    red: ReductionState,
    ball: Domain,
    registry: MarkerRegistry,
    meta: AdaMlProd,
    learners: Vec<Sleeper<OgdEnsemble>>,
    outside: u64,
}

impl EfficientIntervalDynamic {
    pub fn new(cfg: &AlgorithmConfig, domain: &Domain) -> Result<Self> {
        let c = cfg.constants;
        let red = ReductionState::new(domain.clone());
        let ball = red.domain_y().clone();
        let mut meta = AdaMlProd::new();
        meta.spawn(1, 1)?;
        let rate = HedgeRate::SelfConfident { diameter: c.d };
        let learners = vec![Sleeper {
            id: 1,
            inner: OgdEnsemble::new(red.y().clone(), &cfg.pool, rate)?,
        }];
        Ok(Self {
            clock: Clock::new(c.horizon),
            constants: c,
            pool: cfg.pool.clone(),
            red,
            ball,
            registry: new_registry(cfg)?,
            meta,
            learners,
            outside: 0,
        })
    }

    pub fn registry(&self) -> &MarkerRegistry {
        &self.registry
    }
}

impl OnlineLearner for EfficientIntervalDynamic {
    fn kind(&self) -> AlgorithmKind {
        AlgorithmKind::EfficientIntervalDynamic
    }

    fn decision(&self) -> &DecisionVector {
        self.red.x()
    }

    fn round(&mut self, fb: &dyn Feedback) -> Result<DecisionVector> {
        let t = self.clock.tick(fb)?;
        let grad = checked_gradient(fb, self.red.x().dim())?;
        let f_value = fb.value();
        let Self {
            constants: c,
            pool,
            red,
            ball,
            registry,
            meta,
            learners,
            outside,
            ..
        } = self;
        let y_t = red.y().clone();
        apply_marker(registry, meta, learners, f_value, t, || {
            OgdEnsemble::new(y_t.clone(), pool, HedgeRate::SelfConfident { diameter: c.d })
        })?;
        let (x, _) = red.round(grad, |spec| {
            if !spec.is_linear() {
                *outside += 1;
            }
            let g = spec.gradient_at_center();
            let locals: Vec<&DecisionVector> = learners.iter().map(|l| l.inner.decision()).collect();
            let fbl = amlprod_feedback(&g, spec.center_y(), &locals, c.g, c.d)?;
            for l in learners.iter_mut() {
                l.inner.step(&g, ball)?;
            }
            meta.update(fbl.hat, &fbl.ells)?;
            let p = meta.weights()?;
            let pts: Vec<&DecisionVector> = learners.iter().map(|l| l.inner.decision()).collect();
            weighted(&p, &pts)
        })?;
        Ok(x)
    }

    fn projections_onto_x(&self) -> u64 {
        self.red.projections()
    }

    fn diagnostics(&self) -> Diagnostics {
        Diagnostics {
            rounds: self.clock.t,
            active_learners: self.learners.iter().map(|l| l.id).collect(),
            weights: self.meta.weights().unwrap_or_default(),
            markers: self.registry.markers().to_vec(),
            active_surrogate_rounds: self.outside,
        }
    }
}

/// Ader with every expert projecting onto `X`.
pub struct BaselineAder {
    clock: Clock,
    domain: CountingDomain,
    experts: Vec<Ogd>,
    hedge: Hedge,
    x: DecisionVector,
}

impl BaselineAder {
    pub fn new(cfg: &AlgorithmConfig, domain: &Domain) -> Result<Self> {
        let x = DecisionVector::zeros(domain.dim());
        Ok(Self {
            clock: Clock::new(cfg.constants.horizon),
            domain: CountingDomain::new(domain.clone()),
            experts: cfg.pool.iter().map(|&eta| Ogd::new(x.clone(), eta)).collect(),
            hedge: Hedge::new(cfg.pool.len(), cfg.hedge_rate())?,
            x,
        })
    }
}

impl OnlineLearner for BaselineAder {
    fn kind(&self) -> AlgorithmKind {
        AlgorithmKind::BaselineAder
    }

    fn decision(&self) -> &DecisionVector {
        &self.x
    }

    fn round(&mut self, fb: &dyn Feedback) -> Result<DecisionVector> {
        self.clock.tick(fb)?;
        let grad = checked_gradient(fb, self.x.dim())?;
        let losses: Vec<f64> = self.experts.iter().map(|e| grad.dot(e.decision())).collect();
        for e in &mut self.experts {
            e.step(&grad, &self.domain)?;
        }
        self.hedge.accumulate(&losses, grad.norm_sq())?;
        let p = self.hedge.weights();
        let pts: Vec<&DecisionVector> = self.experts.iter().map(|e| e.decision()).collect();
        self.x = weighted(&p, &pts)?;
        Ok(self.x.clone())
    }

    fn projections_onto_x(&self) -> u64 {
        self.domain.projections()
    }

    fn diagnostics(&self) -> Diagnostics {
        Diagnostics {
            rounds: self.clock.t,
            active_learners: (1..=self.experts.len()).collect(),
            weights: self.hedge.weights(),
            markers: Vec::new(),
            active_surrogate_rounds: 0,
        }
    }
}

/// Marker-based SOGD ensemble with every learner projecting onto `X`.
pub struct BaselineAdaptiveMultiproj {
    clock: Clock,
    constants: ProblemConstants,
    numerator: f64,
    domain: CountingDomain,
    registry: MarkerRegistry,
    meta: AdaMlProd,
    learners: Vec<Sleeper<Sogd>>,
    x: DecisionVector,
}

impl BaselineAdaptiveMultiproj {
    pub fn new(cfg: &AlgorithmConfig, domain: &Domain) -> Result<Self> {
        let c = cfg.constants;
        let x = DecisionVector::zeros(domain.dim());
        let mut meta = AdaMlProd::new();
        meta.spawn(1, 1)?;
        Ok(Self {
            clock: Clock::new(c.horizon),
            constants: c,
            numerator: cfg.sogd_numerator(),
            domain: CountingDomain::new(domain.clone()),
            registry: new_registry(cfg)?,
            meta,
            learners: vec![Sleeper {
                id: 1,
                inner: Sogd::new(x.clone(), cfg.sogd_numerator(), c.delta, 1),
            }],
            x,
        })
    }

    pub fn registry(&self) -> &MarkerRegistry {
        &self.registry
    }
}

impl OnlineLearner for BaselineAdaptiveMultiproj {
    fn kind(&self) -> AlgorithmKind {
        AlgorithmKind::BaselineAdaptiveMultiproj
    }

    fn decision(&self) -> &DecisionVector {
        &self.x
    }

    fn round(&mut self, fb: &dyn Feedback) -> Result<DecisionVector> {
        let t = self.clock.tick(fb)?;
        let grad = checked_gradient(fb, self.x.dim())?;
        let f_value = fb.value();
        let c = self.constants;
        let numerator = self.numerator;
        let x_t = self.x.clone();
        apply_marker(
            &mut self.registry,
            &mut self.meta,
            &mut self.learners,
            f_value,
            t,
            || Ok(Sogd::new(x_t, numerator, c.delta, t)),
        )?;
        let locals: Vec<&DecisionVector> = self.learners.iter().map(|l| l.inner.decision()).collect();
        let fbl = amlprod_feedback(&grad, &self.x, &locals, c.g, c.d)?;
        for l in &mut self.learners {
            l.inner.step(&grad, &self.domain)?;
        }
        self.meta.update(fbl.hat, &fbl.ells)?;
        let p = self.meta.weights()?;
        let pts: Vec<&DecisionVector> = self.learners.iter().map(|l| l.inner.decision()).collect();
        self.x = weighted(&p, &pts)?;
        Ok(self.x.clone())
    }

    fn projections_onto_x(&self) -> u64 {
        self.domain.projections()
    }

    fn diagnostics(&self) -> Diagnostics {
        Diagnostics {
            rounds: self.clock.t,
            active_learners: self.learners.iter().map(|l| l.id).collect(),
            weights: self.meta.weights().unwrap_or_default(),
            markers: self.registry.markers().to_vec(),
            active_surrogate_rounds: 0,
        }
    }
}
