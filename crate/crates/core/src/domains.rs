//! Feasible domains with Euclidean projection, distance and membership.
//!
//! Every domain contains the origin. The surrogate ball used by the
//! projection-efficient learners is the origin-centred ball whose radius is
//! the domain diameter; it contains the domain because any member `x`
//! satisfies `‖x‖ = ‖x − 0‖ ≤ D`.

use std::cell::Cell;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{config, Error, Result};
use crate::vector::{rescale_to_ball, DecisionVector};

/// Projection tolerance relative to the domain diameter.
pub const DEFAULT_PROJ_TOL: f64 = 1e-10;

const ROOT_TOL: f64 = 1e-12;
const MAX_ROOT_ITERS: usize = 200;

/// An origin-containing convex set with a cheap projection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DomainSpec", into = "DomainSpec")]
pub enum Domain {
    Ball { dim: usize, radius: f64 },
    Box { lower: Vec<f64>, upper: Vec<f64> },
    /// `{x : Σ_i diag_i x_i² ≤ level}`
    Ellipsoid { diag: Vec<f64>, level: f64 },
}

/// Wire format of a domain in configuration files.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    Ball {
        dim: usize,
        radius: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
    },
    Box {
        lower: Vec<f64>,
        upper: Vec<f64>,
    },
    Ellipsoid {
        diag: Vec<f64>,
        level: f64,
    },
    /// Axis weights spaced logarithmically in `[1, 10]`, level chosen so
    /// the diameter equals `diameter`.
    LogSpacedEllipsoid {
        dim: usize,
        diameter: f64,
    },
}

impl TryFrom<DomainSpec> for Domain {
    type Error = Error;

    fn try_from(spec: DomainSpec) -> Result<Self> {
        match spec {
            DomainSpec::Ball {
                dim,
                radius,
                center,
            } => {
                if let Some(c) = center {
                    if c.len() != dim {
                        return Err(config("ball center dimension differs from dim"));
                    }
                    if c.iter().any(|v| *v != 0.0) {
                        return Err(config("only origin-centred balls are supported"));
                    }
                }
                Domain::ball(dim, radius)
            }
            DomainSpec::Box { lower, upper } => Domain::boxed(lower, upper),
            DomainSpec::Ellipsoid { diag, level } => Domain::ellipsoid(diag, level),
            DomainSpec::LogSpacedEllipsoid { dim, diameter } => {
                Domain::log_spaced_ellipsoid(dim, diameter)
            }
        }
    }
}

impl From<Domain> for DomainSpec {
    fn from(d: Domain) -> Self {
        match d {
            Domain::Ball { dim, radius } => DomainSpec::Ball {
                dim,
                radius,
                center: None,
            },
            Domain::Box { lower, upper } => DomainSpec::Box { lower, upper },
            Domain::Ellipsoid { diag, level } => DomainSpec::Ellipsoid { diag, level },
        }
    }
}

impl Domain {
    pub fn ball(dim: usize, radius: f64) -> Result<Self> {
        if dim == 0 {
            return Err(config("dimension must be positive"));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(config("ball radius must be positive and finite"));
        }
        Ok(Domain::Ball { dim, radius })
    }

    pub fn boxed(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(config("box bounds must be non-empty with equal lengths"));
        }
        for (l, u) in lower.iter().zip(&upper) {
            if !(l.is_finite() && u.is_finite()) {
                return Err(config("box bounds must be finite"));
            }
            if !(*l <= 0.0 && 0.0 <= *u) {
                return Err(config("box must contain the origin"));
            }
        }
        Ok(Domain::Box { lower, upper })
    }

    pub fn ellipsoid(diag: Vec<f64>, level: f64) -> Result<Self> {
        if diag.is_empty() {
            return Err(config("ellipsoid needs at least one axis"));
        }
        if diag.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return Err(config("ellipsoid axis weights must be positive"));
        }
        if !(level.is_finite() && level > 0.0) {
            return Err(config("ellipsoid level must be positive"));
        }
        Ok(Domain::Ellipsoid { diag, level })
    }

    /// Ellipsoid with weights `10^{i/(d-1)}` and level `λ_min (D/2)²`, whose
    /// diameter is exactly `diameter`.
    pub fn log_spaced_ellipsoid(dim: usize, diameter: f64) -> Result<Self> {
        if dim == 0 {
            return Err(config("dimension must be positive"));
        }
        let diag: Vec<f64> = (0..dim)
            .map(|i| {
                if dim == 1 {
                    1.0
                } else {
                    10f64.powf(i as f64 / (dim - 1) as f64)
                }
            })
            .collect();
        let half = diameter / 2.0;
        Domain::ellipsoid(diag, half * half)
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Ball { dim, .. } => *dim,
            Domain::Box { lower, .. } => lower.len(),
            Domain::Ellipsoid { diag, .. } => diag.len(),
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            Domain::Ball { radius, .. } => 2.0 * radius,
            Domain::Box { lower, upper } => lower
                .iter()
                .zip(upper)
                .map(|(l, u)| (u - l) * (u - l))
                .sum::<f64>()
                .sqrt(),
            Domain::Ellipsoid { diag, level } => 2.0 * (level / min_of(diag)).sqrt(),
        }
    }

    /// Largest Euclidean norm of a member point.
    pub fn max_norm(&self) -> f64 {
        match self {
            Domain::Ball { radius, .. } => *radius,
            Domain::Box { lower, upper } => lower
                .iter()
                .zip(upper)
                .map(|(l, u)| {
                    let m = l.abs().max(u.abs());
                    m * m
                })
                .sum::<f64>()
                .sqrt(),
            Domain::Ellipsoid { diag, level } => (level / min_of(diag)).sqrt(),
        }
    }

    /// Absolute projection tolerance `τ_proj`.
    pub fn tolerance(&self) -> f64 {
        DEFAULT_PROJ_TOL * self.diameter()
    }

    /// Constraint residual: positive outside, non-positive inside.
    pub fn residual(&self, p: &[f64]) -> f64 {
        match self {
            Domain::Ball { radius, .. } => crate::vector::norm(p) - radius,
            Domain::Box { lower, upper } => p
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(x, (l, u))| (l - x).max(x - u))
                .fold(f64::NEG_INFINITY, f64::max),
            Domain::Ellipsoid { diag, level } => {
                p.iter().zip(diag).map(|(x, e)| e * x * x).sum::<f64>() - level
            }
        }
    }

    fn validate(&self, p: &DecisionVector) -> Result<()> {
        p.check_dim(self.dim())?;
        if !p.is_finite() {
            return Err(Error::NonFinite("projection input"));
        }
        Ok(())
    }

    pub fn contains(&self, p: &DecisionVector, tol: f64) -> Result<bool> {
        if tol < 0.0 {
            return Err(crate::error::usage("membership tolerance must be non-negative"));
        }
        self.validate(p)?;
        Ok(self.residual(p) <= tol)
    }

    /// Euclidean projection `argmin_{x ∈ X} ‖x − p‖`.
    pub fn project(&self, p: &DecisionVector) -> Result<DecisionVector> {
        self.validate(p)?;
        Ok(self.project_unchecked(p))
    }

    pub(crate) fn project_unchecked(&self, p: &DecisionVector) -> DecisionVector {
        match self {
            Domain::Ball { radius, .. } => rescale_to_ball(p.clone(), *radius),
            Domain::Box { lower, upper } => DecisionVector::from_raw(
                p.iter()
                    .zip(lower.iter().zip(upper))
                    .map(|(x, (l, u))| x.clamp(*l, *u))
                    .collect(),
            ),
            Domain::Ellipsoid { diag, level } => {
                DecisionVector::from_raw(project_ellipsoid(diag, *level, p))
            }
        }
    }

    /// `S_X(p) = ‖p − Π_X[p]‖`.
    pub fn distance(&self, p: &DecisionVector) -> Result<f64> {
        let q = self.project(p)?;
        Ok(p.distance(&q))
    }

    /// Origin-centred ball of radius equal to the diameter.
    pub fn surrogate_ball(&self) -> Domain {
        Domain::Ball {
            dim: self.dim(),
            radius: self.diameter(),
        }
    }

    /// Uniform sample from the domain.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> DecisionVector {
        match self {
            Domain::Ball { dim, radius } => {
                DecisionVector::from_raw(unit_ball_sample(rng, *dim)).scale(*radius)
            }
            Domain::Box { lower, upper } => DecisionVector::from_raw(
                lower
                    .iter()
                    .zip(upper)
                    .map(|(l, u)| if l < u { rng.random_range(*l..*u) } else { *l })
                    .collect(),
            ),
            Domain::Ellipsoid { diag, level } => {
                let z = unit_ball_sample(rng, diag.len());
                DecisionVector::from_raw(
                    z.iter()
                        .zip(diag)
                        .map(|(zi, e)| zi * (level / e).sqrt())
                        .collect(),
                )
            }
        }
    }
}

fn min_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Uniform point in the unit ball of `R^dim`.
pub(crate) fn unit_ball_sample<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let n = crate::vector::norm(&g);
        if n > 0.0 {
            let u: f64 = rng.random();
            let r = u.powf(1.0 / dim as f64);
            return g.iter().map(|x| x * r / n).collect();
        }
    }
}

/// Projection onto `{x : Σ e_i x_i² ≤ c}`.
///
/// Outside points map to `x_i = p_i / (1 + λ e_i)` where `λ > 0` solves
/// `φ(λ) = Σ e_i p_i² / (1 + λ e_i)² − c = 0`. `φ` is convex and decreasing,
/// so Newton from `λ = 0` approaches the root monotonically; a bisection
/// bracket guards against round-off.
fn project_ellipsoid(diag: &[f64], level: f64, p: &[f64]) -> Vec<f64> {
    let q: f64 = p.iter().zip(diag).map(|(x, e)| e * x * x).sum();
    if q <= level {
        return p.to_vec();
    }
    let e_min = min_of(diag);
    let mut lo = 0.0;
    let mut hi = crate::vector::norm(p) / (level * e_min).sqrt();
    let mut lambda: f64 = 0.0;
    for _ in 0..MAX_ROOT_ITERS {
        let mut phi = -level;
        let mut dphi = 0.0;
        for (x, e) in p.iter().zip(diag) {
            let den = 1.0 + lambda * e;
            let t = e * x * x / (den * den);
            phi += t;
            dphi -= 2.0 * t * e / den;
        }
        if phi > 0.0 {
            lo = lambda;
        } else if phi < 0.0 {
            hi = lambda;
        } else {
            break;
        }
        let newton = lambda - phi / dphi;
        let next = if newton > lo && newton < hi && newton.is_finite() {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let step = (next - lambda).abs();
        lambda = next;
        if step <= ROOT_TOL * lambda.max(1.0) {
            break;
        }
    }
    let mut x: Vec<f64> = p
        .iter()
        .zip(diag)
        .map(|(pi, e)| pi / (1.0 + lambda * e))
        .collect();
    // Round-off can leave the root a hair short of the boundary.
    let r: f64 = x.iter().zip(diag).map(|(xi, e)| e * xi * xi).sum();
    if r > level {
        let s = (level / r).sqrt();
        x.iter_mut().for_each(|xi| *xi *= s);
    }
    x
}

/// Anything that can project onto a fixed convex set.
pub trait Projector {
    fn project(&self, p: &DecisionVector) -> Result<DecisionVector>;

    /// Absolute tolerance used for membership decisions.
    fn tolerance(&self) -> f64;

    fn distance(&self, p: &DecisionVector) -> Result<f64> {
        let q = self.project(p)?;
        Ok(p.distance(&q))
    }
}

impl Projector for Domain {
    fn project(&self, p: &DecisionVector) -> Result<DecisionVector> {
        Domain::project(self, p)
    }

    fn tolerance(&self) -> f64 {
        Domain::tolerance(self)
    }
}

impl Projector for CountingDomain {
    fn project(&self, p: &DecisionVector) -> Result<DecisionVector> {
        CountingDomain::project(self, p)
    }

    fn tolerance(&self) -> f64 {
        self.domain.tolerance()
    }
}

/// A domain wrapper that counts every projection performed through it.
///
/// Learners own one of these for the original domain so the number of
/// projections onto `X` is observable without instrumenting callers.
#[derive(Debug, Clone)]
pub struct CountingDomain {
    domain: Domain,
    projections: Cell<u64>,
}

impl CountingDomain {
    pub fn new(domain: Domain) -> Self {
        Self {
            domain,
            projections: Cell::new(0),
        }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn projections(&self) -> u64 {
        self.projections.get()
    }

    pub fn project(&self, p: &DecisionVector) -> Result<DecisionVector> {
        let q = self.domain.project(p)?;
        self.projections.set(self.projections.get() + 1);
        Ok(q)
    }

    /// Distance to the domain; costs one counted projection.
    pub fn distance(&self, p: &DecisionVector) -> Result<f64> {
        let q = self.project(p)?;
        Ok(p.distance(&q))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn v(x: &[f64]) -> DecisionVector {
        DecisionVector::new(x.to_vec()).unwrap()
    }

    fn ell() -> Domain {
        Domain::ellipsoid(vec![1.0, 4.0], 9.0).unwrap()
    }

    #[test]
    fn ball_projection_examples() {
        let b = Domain::ball(2, 2.0).unwrap();
        let q = b.project(&v(&[3.0, 4.0])).unwrap();
        assert!((q[0] - 1.2).abs() < 1e-15 && (q[1] - 1.6).abs() < 1e-15);
        assert_eq!(b.project(&v(&[1.0, 0.0])).unwrap().as_slice(), &[1.0, 0.0]);
    }

    /// Grid search over a fine polar mesh of the ellipse and its interior.
    fn grid_nearest(d: &Domain, p: &[f64]) -> (f64, f64, f64) {
        let Domain::Ellipsoid { diag, level } = d else {
            unreachable!()
        };
        let (a, b) = ((level / diag[0]).sqrt(), (level / diag[1]).sqrt());
        let mut best = (f64::INFINITY, 0.0, 0.0);
        let n_theta = 20_000;
        for k in 0..n_theta {
            let th = 2.0 * std::f64::consts::PI * k as f64 / n_theta as f64;
            for s in [1.0, 0.999, 0.99, 0.9, 0.5] {
                let (x, y) = (s * a * th.cos(), s * b * th.sin());
                let dd = ((x - p[0]).powi(2) + (y - p[1]).powi(2)).sqrt();
                if dd < best.0 {
                    best = (dd, x, y);
                }
            }
        }
        best
    }

    #[test]
    fn ellipsoid_projection_matches_grid_oracle() {
        let d = ell();
        let (dist, gx, gy) = grid_nearest(&d, &[6.0, 0.0]);
        let q = d.project(&v(&[6.0, 0.0])).unwrap();
        assert!((q[0] - gx).abs() < 1e-3 && (q[1] - gy).abs() < 1e-3);
        assert!((q[0] - 3.0).abs() < 1e-12 && q[1].abs() < 1e-12);
        assert!((d.distance(&v(&[6.0, 0.0])).unwrap() - 3.0).abs() < 1e-12);
        assert!((dist - 3.0).abs() < 1e-6);

        // an off-axis point as well
        let p = [2.0, 3.0];
        let (gdist, _, _) = grid_nearest(&d, &p);
        let dist = d.distance(&v(&p)).unwrap();
        assert!(dist <= gdist + 1e-12);
        assert!(gdist - dist < 1e-3);
    }

    #[test]
    fn distance_and_contains_examples() {
        let b = Domain::ball(2, 1.0).unwrap();
        assert_eq!(b.distance(&v(&[2.0, 0.0])).unwrap(), 1.0);
        assert!(b.contains(&v(&[0.5, 0.5]), 0.0).unwrap());
        assert!(!b.contains(&v(&[1.0 + 1e-6, 0.0]), 1e-9).unwrap());
        assert!(ell().contains(&v(&[3.0, 0.0]), 1e-9).unwrap());
        assert!(b.contains(&v(&[0.0, 0.0]), -1.0).is_err());
    }

    #[test]
    fn surrogate_ball_examples() {
        assert_eq!(
            Domain::ball(2, 3.0).unwrap().surrogate_ball(),
            Domain::Ball { dim: 2, radius: 6.0 }
        );
        assert_eq!(ell().diameter(), 6.0);
        assert_eq!(ell().surrogate_ball(), Domain::Ball { dim: 2, radius: 6.0 });
        let bx = Domain::boxed(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        let Domain::Ball { radius, .. } = bx.surrogate_ball() else {
            unreachable!()
        };
        assert!((radius - 2.0 * 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn input_validation() {
        let b = Domain::ball(2, 1.0).unwrap();
        assert!(matches!(
            b.project(&v(&[1.0, 2.0, 3.0])),
            Err(Error::DimensionMismatch { .. })
        ));
        let bad = DecisionVector::from_raw(vec![f64::NAN, 0.0]);
        assert!(matches!(b.project(&bad), Err(Error::NonFinite(_))));
        assert!(Domain::ellipsoid(vec![1.0, 0.0], 1.0).is_err());
        assert!(Domain::ellipsoid(vec![1.0, -2.0], 1.0).is_err());
        assert!(Domain::boxed(vec![0.5], vec![1.0]).is_err());
        let spec: std::result::Result<Domain, _> = serde_json_like_ball_with_center();
        assert!(spec.is_err());
    }

    fn serde_json_like_ball_with_center() -> Result<Domain> {
        Domain::try_from(DomainSpec::Ball {
            dim: 2,
            radius: 1.0,
            center: Some(vec![0.5, 0.0]),
        })
    }

    #[test]
    fn log_spaced_ellipsoid_has_requested_diameter() {
        let d = Domain::log_spaced_ellipsoid(8, 6.0).unwrap();
        assert!((d.diameter() - 6.0).abs() < 1e-12);
        assert!((d.max_norm() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_samples_are_members() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in [
            ell(),
            Domain::ball(3, 2.0).unwrap(),
            Domain::boxed(vec![-1.0, 0.0], vec![2.0, 1.0]).unwrap(),
        ] {
            for _ in 0..200 {
                let s = d.sample_uniform(&mut rng);
                assert!(d.contains(&s, 1e-12).unwrap());
            }
        }
    }

    #[test]
    fn ball_domain_matches_closed_form_rescale_bitwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let b = Domain::ball(5, 1.7).unwrap();
        for _ in 0..1000 {
            let p = DecisionVector::from_raw(
                (0..5).map(|_| rng.random_range(-4.0..4.0)).collect(),
            );
            let a = b.project(&p).unwrap();
            let c = rescale_to_ball(p, 1.7);
            assert_eq!(a, c);
        }
    }

    #[test]
    fn counting_domain_counts() {
        let c = CountingDomain::new(ell());
        c.project(&v(&[1.0, 1.0])).unwrap();
        c.distance(&v(&[5.0, 1.0])).unwrap();
        assert_eq!(c.projections(), 2);
    }

    fn arb_domain() -> impl Strategy<Value = Domain> {
        prop_oneof![
            (0.1f64..5.0).prop_map(|r| Domain::ball(3, r).unwrap()),
            prop::collection::vec(0.1f64..20.0, 3)
                .prop_flat_map(|diag| (Just(diag), 0.1f64..10.0))
                .prop_map(|(diag, c)| Domain::ellipsoid(diag, c).unwrap()),
            (
                prop::collection::vec(-3.0f64..0.0, 3),
                prop::collection::vec(0.0f64..3.0, 3)
            )
                .prop_map(|(l, u)| Domain::boxed(l, u).unwrap()),
        ]
    }

    fn arb_point() -> impl Strategy<Value = DecisionVector> {
        prop::collection::vec(-10.0f64..10.0, 3).prop_map(DecisionVector::from_raw)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(512))]

        #[test]
        fn projection_is_member_and_idempotent(d in arb_domain(), p in arb_point()) {
            let tau = d.tolerance();
            let q = d.project(&p).unwrap();
            prop_assert!(d.contains(&q, tau).unwrap());
            let qq = d.project(&q).unwrap();
            prop_assert!(q.distance(&qq) <= tau);
        }

        #[test]
        fn projection_is_nonexpansive(d in arb_domain(), p in arb_point(), r in arb_point()) {
            let tau = d.tolerance();
            let (a, b) = (d.project(&p).unwrap(), d.project(&r).unwrap());
            prop_assert!(a.distance(&b) <= p.distance(&r) + 2.0 * tau);
        }

        #[test]
        fn variational_inequality(d in arb_domain(), p in arb_point(), seed in any::<u64>()) {
            let tau = d.tolerance();
            let q = d.project(&p).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..16 {
                let m = d.sample_uniform(&mut rng);
                let lhs = p.sub(&q).dot(&m.sub(&q));
                prop_assert!(lhs <= tau * p.distance(&m), "vi residual {}", lhs);
                prop_assert!(p.distance(&q) <= p.distance(&m) + tau);
            }
        }

        #[test]
        fn ellipsoid_boundary_residual_and_kkt(
            diag in prop::collection::vec(0.1f64..20.0, 3),
            c in 0.1f64..10.0,
            p in arb_point(),
        ) {
            let d = Domain::ellipsoid(diag.clone(), c).unwrap();
            if d.residual(&p) > 0.0 {
                let q = d.project(&p).unwrap();
                prop_assert!(d.residual(&q).abs() <= d.tolerance());
                // recover the multiplier from the best-conditioned coordinate
                let i = (0..3)
                    .max_by(|&a, &b| (diag[a] * q[a].abs()).total_cmp(&(diag[b] * q[b].abs())))
                    .unwrap();
                let lambda = (p[i] - q[i]) / (diag[i] * q[i]);
                let kkt: f64 = (0..3)
                    .map(|j| (q[j] - p[j] + lambda * diag[j] * q[j]).powi(2))
                    .sum::<f64>()
                    .sqrt();
                prop_assert!(lambda >= -1e-12);
                prop_assert!(kkt <= 1e-8, "kkt residual {}", kkt);
            }
        }
    }
}
