//! Projection-efficient online convex optimization in non-stationary
//! environments.
//!
//! The crate provides convex domains with exact projections, the
//! domain-to-ball surrogate reduction, base learners, meta learners,
//! geometric covers, the full set of online algorithms, a synthetic
//! drifting regression environment, and regret metrics.

pub mod algorithms;
pub mod base;
pub mod covers;
pub mod domains;
pub mod environment;
pub mod error;
pub mod meta;
pub mod metrics;
pub mod oracle;
pub mod surrogate;
pub mod vector;

pub use algorithms::{build_learner, AlgorithmConfig, AlgorithmKind, OnlineLearner, ProblemConstants};
pub use domains::{CountingDomain, Domain, Projector};
pub use environment::{generate_stream, Drift, EnvironmentConfig, Sample};
pub use error::{Error, Result};
pub use oracle::{ComplexityCounters, CountingOracle, Feedback, RoundCounts};
pub use vector::DecisionVector;
