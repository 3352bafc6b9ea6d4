use nonstat_oco::domains::{CountingDomain, Domain};
use nonstat_oco::surrogate::{ReductionState, SurrogateSpec};
use nonstat_oco::DecisionVector;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn domain_strategy() -> impl Strategy<Value = Domain> {
    let ball = (1usize..5, 0.2f64..3.0).prop_map(|(d, r)| Domain::ball(d, r).unwrap());
    let boxed = prop::collection::vec((0.1f64..2.0, 0.1f64..2.0), 1..5).prop_map(|v| {
        let (lo, hi): (Vec<f64>, Vec<f64>) = v.into_iter().map(|(a, b)| (-a, b)).unzip();
        Domain::boxed(lo, hi).unwrap()
    });
    let ellipsoid = (prop::collection::vec(0.2f64..5.0, 1..5), 0.3f64..3.0)
        .prop_map(|(diag, c)| Domain::ellipsoid(diag, c).unwrap());
    prop_oneof![ball, boxed, ellipsoid]
}

/// Uniform-ish point of the surrogate ball.
fn point_in_ball(rng: &mut ChaCha8Rng, dim: usize, radius: f64) -> DecisionVector {
    let g: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let n = g.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
    let r = radius * rng.random_range(0.0f64..1.0).sqrt();
    DecisionVector::new(g.into_iter().map(|x| x * r / n).collect()).unwrap()
}

fn random_vec(rng: &mut ChaCha8Rng, dim: usize, scale: f64) -> DecisionVector {
    DecisionVector::new((0..dim).map(|_| rng.random_range(-scale..scale)).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn surrogate_properties(domain in domain_strategy(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = domain.dim();
        let radius = domain.diameter();
        for _ in 0..10 {
            let y_t = point_in_ball(&mut rng, dim, radius);
            let grad = random_vec(&mut rng, dim, 3.0);
            let spec = SurrogateSpec::new(grad.clone(), y_t.clone(), &domain).unwrap();
            let scale = 1.0 + grad.norm() * radius;
            prop_assert!(spec.activation() <= 0.0);
            let vn = spec.direction().norm();
            prop_assert!(vn == 0.0 || (vn - 1.0).abs() <= 1e-12);

            // convexity along random chords
            let a = point_in_ball(&mut rng, dim, radius);
            let b = point_in_ball(&mut rng, dim, radius);
            let lam: f64 = rng.random_range(0.0..1.0);
            let mid = a.scale(lam).add(&b.scale(1.0 - lam));
            let lhs = spec.value(&mid, &domain).unwrap();
            let rhs = lam * spec.value(&a, &domain).unwrap()
                + (1.0 - lam) * spec.value(&b, &domain).unwrap();
            prop_assert!(lhs <= rhs + 1e-9 * scale, "{lhs} > {rhs}");

            // gradient-norm domination at the centre
            let gc = spec.gradient(&y_t, &domain).unwrap().grad;
            prop_assert_eq!(&gc, &spec.gradient_at_center());
            prop_assert!(gc.norm() <= grad.norm() + 1e-12);

            // sandwich against members of X
            let u = domain.sample_uniform(&mut rng);
            let x_t = spec.center_x();
            let lower = grad.dot(&x_t.sub(&u));
            let mid_term = spec.value(&y_t, &domain).unwrap() - spec.value(&u, &domain).unwrap();
            let upper = gc.dot(&y_t.sub(&u));
            prop_assert!(lower <= mid_term + 1e-9 * scale, "{lower} > {mid_term}");
            prop_assert!(mid_term <= upper + 1e-9 * scale, "{mid_term} > {upper}");

            // distance is 1-Lipschitz
            let da = domain.distance(&a).unwrap();
            let db = domain.distance(&b).unwrap();
            prop_assert!((da - db).abs() <= a.distance(&b) + 1e-9 * radius);
        }
    }

    #[test]
    fn gradient_matches_finite_differences(domain in domain_strategy(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = domain.dim();
        let radius = domain.diameter();
        let mut checked = 0;
        for _ in 0..50 {
            let y_t = point_in_ball(&mut rng, dim, radius);
            let grad = random_vec(&mut rng, dim, 3.0);
            let spec = SurrogateSpec::new(grad, y_t, &domain).unwrap();
            if spec.is_linear() {
                continue;
            }
            let y = point_in_ball(&mut rng, dim, radius);
            if domain.distance(&y).unwrap() <= 1e-2 {
                continue;
            }
            // a box has kinks where the nearest face changes; stay clear of them
            if let Domain::Box { lower, upper } = &domain {
                let near_kink = y.iter().zip(lower.iter().zip(upper)).any(|(v, (l, h))| {
                    (v - l).abs() < 1e-3 || (v - h).abs() < 1e-3
                });
                if near_kink {
                    continue;
                }
            }
            let g = spec.gradient(&y, &domain).unwrap().grad;
            let h = 1e-5;
            let mut fd = Vec::with_capacity(dim);
            for i in 0..dim {
                let mut e = vec![0.0; dim];
                e[i] = h;
                let e = DecisionVector::new(e).unwrap();
                let fp = spec.value(&y.add(&e), &domain).unwrap();
                let fm = spec.value(&y.sub(&e), &domain).unwrap();
                fd.push((fp - fm) / (2.0 * h));
            }
            let fd = DecisionVector::new(fd).unwrap();
            prop_assert!(fd.distance(&g) <= 1e-6 * g.norm().max(1.0), "fd {fd:?} vs {g:?}");
            checked += 1;
        }
        prop_assume!(checked > 0);
    }

    #[test]
    fn reduction_projects_once_per_round(seed in any::<u64>(), rounds in 1usize..60) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let domain = Domain::log_spaced_ellipsoid(3, 2.0).unwrap();
        let mut red = ReductionState::new(domain.clone());
        let ball = red.domain_y().clone();
        for t in 1..=rounds {
            let grad = random_vec(&mut rng, 3, 2.0);
            let target = point_in_ball(&mut rng, 3, ball.diameter() / 2.0);
            let (x, y) = red.round(grad, |spec| {
                let g = spec.gradient_at_center();
                ball.project(&target.axpy(-0.1, &g))
            }).unwrap();
            prop_assert_eq!(red.projections(), t as u64);
            prop_assert_eq!(&x, &domain.project(&y).unwrap());
            prop_assert!(y.norm() <= ball.diameter() / 2.0 + 1e-12);
        }
    }
}

#[test]
fn make_surrogate_spends_one_counted_projection() {
    let x = CountingDomain::new(Domain::ball(2, 1.0).unwrap());
    let g = DecisionVector::new(vec![-1.0, 1.0]).unwrap();
    let y = DecisionVector::new(vec![2.0, 0.0]).unwrap();
    let spec = SurrogateSpec::new(g, y.clone(), &x).unwrap();
    assert_eq!(x.projections(), 1);
    assert_eq!(spec.gradient(&y, &x).unwrap().grad.as_slice(), &[0.0, 1.0]);
    assert_eq!(x.projections(), 1);
    assert_eq!(spec.value(&y, &x).unwrap(), -1.0);
    assert_eq!(x.projections(), 2);
}
