//! Surrogate losses on the enclosing ball and the one-projection reduction.
//!
//! For a round with gradient `∇f_t(x_t)` and surrogate centre `y_t` (with
//! `x_t = Π_X[y_t]`), the surrogate loss on the ball `Y` is
//!
//! ```text
//! g_t(y) = ⟨∇f_t(x_t), y⟩ − 1{⟨∇f_t(x_t), v_t⟩ < 0} · ⟨∇f_t(x_t), v_t⟩ · S_X(y)
//! ```
//!
//! with `v_t = (y_t − x_t)/‖y_t − x_t‖` and `S_X` the distance to `X`. An
//! algorithm run on `g_t` over `Y` keeps its regret on `X` after a single
//! projection of its output per round.

use crate::domains::{CountingDomain, Domain, Projector};
use crate::error::{Error, Result};
use crate::vector::DecisionVector;

/// Frozen description of one round's surrogate loss.
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateSpec {
    grad_f: DecisionVector,
    v: DecisionVector,
    activation: f64,
    center_y: DecisionVector,
    center_x: DecisionVector,
}

/// A surrogate (sub)gradient and whether a boundary subgradient had to be
/// selected.
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateGradient {
    pub grad: DecisionVector,
    pub subgradient_choice: bool,
}

fn validate_grad(grad_f: &DecisionVector, dim: usize) -> Result<()> {
    grad_f.check_dim(dim)?;
    if !grad_f.is_finite() {
        return Err(Error::NonFinite("gradient"));
    }
    Ok(())
}

impl SurrogateSpec {
    /// Builds the surrogate at `y_t`, spending one projection onto `X`.
    pub fn new<P: Projector>(
        grad_f: DecisionVector,
        y_t: DecisionVector,
        domain_x: &P,
    ) -> Result<Self> {
        let x_t = domain_x.project(&y_t)?;
        Self::from_projection(grad_f, y_t, x_t, domain_x.tolerance())
    }

    /// Builds the surrogate from an already computed `x_t = Π_X[y_t]`.
    ///
    /// When `‖y_t − x_t‖ ≤ tol` the direction is undefined and the loss
    /// degenerates to the linear term.
    pub fn from_projection(
        grad_f: DecisionVector,
        y_t: DecisionVector,
        x_t: DecisionVector,
        tol: f64,
    ) -> Result<Self> {
        validate_grad(&grad_f, y_t.dim())?;
        x_t.check_dim(y_t.dim())?;
        let gap = y_t.sub(&x_t);
        let dist = gap.norm();
        let (v, activation) = if dist <= tol {
            (DecisionVector::zeros(y_t.dim()), 0.0)
        } else {
            let v = gap.scale(1.0 / dist);
            let a = grad_f.dot(&v).min(0.0);
            (v, a)
        };
        Ok(Self {
            grad_f,
            v,
            activation,
            center_y: y_t,
            center_x: x_t,
        })
    }

    pub fn grad_f(&self) -> &DecisionVector {
        &self.grad_f
    }

    /// Unit projection direction, or zero when `y_t ∈ X`.
    pub fn direction(&self) -> &DecisionVector {
        &self.v
    }

    /// `min(0, ⟨∇f_t(x_t), v_t⟩)`
    pub fn activation(&self) -> f64 {
        self.activation
    }

    pub fn center_y(&self) -> &DecisionVector {
        &self.center_y
    }

    pub fn center_x(&self) -> &DecisionVector {
        &self.center_x
    }

    pub fn is_linear(&self) -> bool {
        self.activation == 0.0
    }

    /// `g_t(y)`. Costs one projection when the distance term is active.
    pub fn value<P: Projector>(&self, y: &DecisionVector, domain_x: &P) -> Result<f64> {
        y.check_dim(self.grad_f.dim())?;
        let linear = self.grad_f.dot(y);
        if self.is_linear() {
            return Ok(linear);
        }
        Ok(linear - self.activation * domain_x.distance(y)?)
    }

    /// `∇g_t(y_t)`, which never needs a projection.
    pub fn gradient_at_center(&self) -> DecisionVector {
        if self.is_linear() {
            self.grad_f.clone()
        } else {
            self.grad_f.axpy(-self.activation, &self.v)
        }
    }

    /// `∇g_t(y)` for any `y` in the ball.
    ///
    /// Away from the centre the distance term needs `Π_X[y]` (one counted
    /// projection). If `y` lies in `X` while the distance term is active the
    /// subdifferential is set-valued; `∇f_t(x_t)` is returned and the choice
    /// is flagged.
    pub fn gradient<P: Projector>(
        &self,
        y: &DecisionVector,
        domain_x: &P,
    ) -> Result<SurrogateGradient> {
        y.check_dim(self.grad_f.dim())?;
        if self.is_linear() || *y == self.center_y {
            return Ok(SurrogateGradient {
                grad: self.gradient_at_center(),
                subgradient_choice: false,
            });
        }
        let q = domain_x.project(y)?;
        let gap = y.sub(&q);
        let d = gap.norm();
        if d <= domain_x.tolerance() {
            return Ok(SurrogateGradient {
                grad: self.grad_f.clone(),
                subgradient_choice: true,
            });
        }
        Ok(SurrogateGradient {
            grad: self.grad_f.axpy(-self.activation / d, &gap),
            subgradient_choice: false,
        })
    }
}

/// State of the reduction protocol around an inner algorithm running on the
/// surrogate ball.
///
/// The projection `x_{t+1} = Π_X[y_{t+1}]` submitted at the end of a round is
/// cached as the next round's surrogate centre, so each round costs exactly
/// one projection onto `X`.
#[derive(Debug, Clone)]
pub struct ReductionState {
    domain_x: CountingDomain,
    domain_y: Domain,
    radius: f64,
    x: DecisionVector,
    y: DecisionVector,
}

impl ReductionState {
    /// Starts at the origin, which is a member of every domain.
    pub fn new(domain_x: Domain) -> Self {
        let domain_y = domain_x.surrogate_ball();
        let radius = domain_x.diameter();
        let dim = domain_x.dim();
        Self {
            domain_x: CountingDomain::new(domain_x),
            domain_y,
            radius,
            x: DecisionVector::zeros(dim),
            y: DecisionVector::zeros(dim),
        }
    }

    pub fn domain_x(&self) -> &Domain {
        self.domain_x.domain()
    }

    /// The surrogate ball `Y`.
    pub fn domain_y(&self) -> &Domain {
        &self.domain_y
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn x(&self) -> &DecisionVector {
        &self.x
    }

    pub fn y(&self) -> &DecisionVector {
        &self.y
    }

    pub fn projections(&self) -> u64 {
        self.domain_x.projections()
    }

    /// Surrogate for the current round, reusing the cached `x_t`.
    pub fn surrogate(&self, grad_f: DecisionVector) -> Result<SurrogateSpec> {
        SurrogateSpec::from_projection(
            grad_f,
            self.y.clone(),
            self.x.clone(),
            self.domain_x.tolerance(),
        )
    }

    /// Runs one round: build `g_t`, ask the inner algorithm for `y_{t+1}`,
    /// submit `x_{t+1} = Π_X[y_{t+1}]`.
    pub fn round<F>(
        &mut self,
        grad_f: DecisionVector,
        inner_step: F,
    ) -> Result<(DecisionVector, DecisionVector)>
    where
        F: FnOnce(&SurrogateSpec) -> Result<DecisionVector>,
    {
        let spec = self.surrogate(grad_f)?;
        let y_next = inner_step(&spec)?;
        y_next.check_dim(self.y.dim())?;
        if !y_next.is_finite() || y_next.norm() > self.radius * (1.0 + 1e-12) {
            return Err(Error::ContractViolation(format!(
                "inner algorithm returned a point of norm {} outside the surrogate ball of radius {}",
                y_next.norm(),
                self.radius
            )));
        }
        let x_next = self.domain_x.project(&y_next)?;
        self.x = x_next.clone();
        self.y = y_next.clone();
        Ok((x_next, y_next))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> DecisionVector {
        DecisionVector::new(x.to_vec()).unwrap()
    }

    fn unit_ball() -> Domain {
        Domain::ball(2, 1.0).unwrap()
    }

    #[test]
    fn make_surrogate_examples() {
        let x = unit_ball();
        let s = SurrogateSpec::new(v(&[1.0, 0.0]), v(&[2.0, 0.0]), &x).unwrap();
        assert_eq!(s.direction().as_slice(), &[1.0, 0.0]);
        assert_eq!(s.activation(), 0.0);

        let s = SurrogateSpec::new(v(&[-1.0, 1.0]), v(&[2.0, 0.0]), &x).unwrap();
        assert_eq!(s.direction().as_slice(), &[1.0, 0.0]);
        // independent inner product: (-1)(1) + (1)(0)
        let ip: f64 = [-1.0f64, 1.0].iter().zip([1.0, 0.0]).map(|(a, b)| a * b).sum();
        assert_eq!(s.activation(), ip);

        let s = SurrogateSpec::new(v(&[-1.0, 1.0]), v(&[0.5, 0.0]), &x).unwrap();
        assert_eq!(s.direction().as_slice(), &[0.0, 0.0]);
        assert_eq!(s.activation(), 0.0);
    }

    #[test]
    fn make_surrogate_counts_one_projection() {
        let x = CountingDomain::new(unit_ball());
        SurrogateSpec::new(v(&[1.0, 0.0]), v(&[2.0, 0.0]), &x).unwrap();
        assert_eq!(x.projections(), 1);
    }

    #[test]
    fn value_examples() {
        let x = unit_ball();
        let s = SurrogateSpec::new(v(&[1.0, 0.0]), v(&[2.0, 0.0]), &x).unwrap();
        assert_eq!(s.value(&v(&[2.0, 0.0]), &x).unwrap(), 2.0);

        let s = SurrogateSpec::new(v(&[-1.0, 1.0]), v(&[2.0, 0.0]), &x).unwrap();
        assert_eq!(s.value(&v(&[2.0, 0.0]), &x).unwrap(), -1.0);
        let u = v(&[0.3, -0.4]);
        assert_eq!(s.value(&u, &x).unwrap(), s.grad_f().dot(&u));
    }

    #[test]
    fn value_projection_is_counted_only_when_active() {
        let x = CountingDomain::new(unit_ball());
        let lin = SurrogateSpec::new(v(&[1.0, 0.0]), v(&[2.0, 0.0]), &x).unwrap();
        lin.value(&v(&[1.5, 0.0]), &x).unwrap();
        assert_eq!(x.projections(), 1);
        let act = SurrogateSpec::new(v(&[-1.0, 1.0]), v(&[2.0, 0.0]), &x).unwrap();
        act.value(&v(&[1.5, 0.0]), &x).unwrap();
        assert_eq!(x.projections(), 3);
    }

    #[test]
    fn gradient_examples() {
        let x = unit_ball();
        let lin = SurrogateSpec::new(v(&[1.0, 0.0]), v(&[2.0, 0.0]), &x).unwrap();
        assert_eq!(lin.gradient_at_center(), v(&[1.0, 0.0]));

        let s = SurrogateSpec::new(v(&[-1.0, 1.0]), v(&[2.0, 0.0]), &x).unwrap();
        let g = s.gradient_at_center();
        assert_eq!(g, v(&[0.0, 1.0]));
        assert!(g.norm() <= s.grad_f().norm());

        // central differences of g_t at y_t
        let h = 1e-6;
        let y = s.center_y().clone();
        for i in 0..2 {
            let mut e = vec![0.0; 2];
            e[i] = h;
            let e = v(&e);
            let fd = (s.value(&y.add(&e), &x).unwrap() - s.value(&y.sub(&e), &x).unwrap())
                / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-6);
        }

        let z = SurrogateSpec::new(v(&[0.0, 0.0]), v(&[2.0, 0.0]), &x).unwrap();
        let gz = z.gradient(&v(&[0.7, 1.0]), &x).unwrap();
        assert_eq!(gz.grad, v(&[0.0, 0.0]));
    }

    #[test]
    fn gradient_off_centre_and_boundary_choice() {
        let x = CountingDomain::new(unit_ball());
        let s = SurrogateSpec::new(v(&[-1.0, 1.0]), v(&[2.0, 0.0]), &x).unwrap();
        let g = s.gradient(&v(&[0.0, 3.0]), &x).unwrap();
        // direction (0,1), activation -1 → (-1, 1) + (0, 1)
        assert!(!g.subgradient_choice);
        assert!((g.grad[0] + 1.0).abs() < 1e-15 && (g.grad[1] - 2.0).abs() < 1e-15);
        assert_eq!(x.projections(), 2);

        let inside = s.gradient(&v(&[0.5, 0.0]), &x).unwrap();
        assert!(inside.subgradient_choice);
        assert_eq!(&inside.grad, s.grad_f());
    }

    #[test]
    fn non_finite_gradient_rejected() {
        let x = unit_ball();
        let bad = DecisionVector::from_raw(vec![f64::NAN, 0.0]);
        assert!(matches!(
            SurrogateSpec::new(bad, v(&[2.0, 0.0]), &x),
            Err(Error::NonFinite(_))
        ));
    }

    fn state_at(y: &[f64]) -> ReductionState {
        let mut st = ReductionState::new(unit_ball());
        // steer the state to y with an inner step returning y
        st.round(v(&[0.0, 0.0]), |_| Ok(v(y))).unwrap();
        st
    }

    #[test]
    fn reduction_round_identity_inner() {
        let mut st = state_at(&[2.0, 0.0]);
        let before = st.projections();
        let (x_next, y_next) = st
            .round(v(&[1.0, 0.0]), |spec| Ok(spec.center_y().clone()))
            .unwrap();
        assert_eq!(x_next, v(&[1.0, 0.0]));
        assert_eq!(y_next, v(&[2.0, 0.0]));
        assert_eq!(st.projections() - before, 1);
    }

    #[test]
    fn reduction_round_zero_step_is_fixed_point() {
        let mut st = state_at(&[0.3, 1.5]);
        let (x0, y0) = (st.x().clone(), st.y().clone());
        let (x1, y1) = st
            .round(v(&[0.4, -2.0]), |spec| {
                let g = spec.gradient_at_center();
                Ok(spec.center_y().axpy(-0.0, &g))
            })
            .unwrap();
        assert_eq!((x1, y1), (x0, y0));
    }

    #[test]
    fn reduction_counts_one_projection_per_round() {
        let mut st = ReductionState::new(unit_ball());
        for t in 0..37 {
            let g = v(&[(t as f64).sin(), (t as f64).cos()]);
            st.round(g, |spec| {
                let step = spec.center_y().axpy(-0.5, &spec.gradient_at_center());
                Ok(crate::vector::rescale_to_ball(step, 2.0))
            })
            .unwrap();
        }
        assert_eq!(st.projections(), 37);
    }

    #[test]
    fn reduction_rejects_points_outside_ball() {
        let mut st = ReductionState::new(unit_ball());
        let r = st.round(v(&[1.0, 0.0]), |_| Ok(v(&[3.0, 0.0])));
        assert!(matches!(r, Err(Error::ContractViolation(_))));
    }
}
