use hetflow_core::homogeneous::{catalog, random_metric};
use hetflow_core::homothety::*;
use hetflow_core::par::Execution;
use hetflow_core::tensor::Metric;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

#[test]
fn lambert_w_branches() {
    let e = std::f64::consts::E;
    assert_eq!(lambert_w(0.0, Branch::Principal).unwrap(), 0.0);
    assert!(close(lambert_w(e, Branch::Principal).unwrap(), 1.0, 1e-15));
    assert_eq!(lambert_w(-1.0 / e, Branch::Principal).unwrap(), -1.0);
    assert!(close(lambert_w(-1.0 / e, Branch::Lower).unwrap(), -1.0, 1e-7));
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..500 {
        let x: f64 = rng.gen_range(-1.0 / e..50.0);
        let w = lambert_w(x, Branch::Principal).unwrap();
        assert!((w * w.exp() - x).abs() <= 1e-14 * x.abs().max(1e-300) + 1e-16, "W0({x})");
        assert!(w >= -1.0);
        if x < 0.0 {
            let w = lambert_w(x, Branch::Lower).unwrap();
            assert!((w * w.exp() - x).abs() <= 1e-14 * x.abs() + 1e-16, "W-1({x})");
            assert!(w <= -1.0);
        }
    }
    assert!(lambert_w(-0.4, Branch::Principal).is_err());
    assert!(lambert_w(0.5, Branch::Lower).is_err());
    assert!(lambert_w(f64::NAN, Branch::Principal).is_err());
}

#[test]
fn static_curves() {
    assert!(kappa_crit_p((2.0f64 / 3.0).sqrt()).abs() < 1e-15);
    assert_eq!(kappa_crit_n(0.0), 6.0);
    assert!(close(kappa_crit_p(1.0), 12.0 / 49.0, 1e-15));
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..20 {
        let mu: f64 = rng.gen_range((2.0f64 / 3.0).sqrt()..3.0);
        assert!(kappa_crit_p_admissible(mu));
        assert!(f_p(kappa_crit_p(mu), mu, 1.0).unwrap().abs() <= 1e-12);
    }
    let (lo, hi) = negative_band();
    assert!(close(lo, 2.0 / 3.0 * (3.0 - 2.0 * 2f64.sqrt()), 1e-15));
    assert!(!kappa_crit_n_admissible(((lo + hi) / 2.0).sqrt()));
    assert!(kappa_crit_n(((lo + hi) / 2.0).sqrt()) < 0.0);
    assert!(f_flat(kappa_crit_flat(1.3), 1.3, 1.0).unwrap().abs() < 1e-14);
}

#[test]
fn cubic_threshold() {
    let x = mu_threshold_cubic();
    assert!(x > 1.5 && x < 1.6);
    assert!(threshold_cubic(x).abs() <= 1e-10);
    // deflate to the quadratic 27x² + (6 + 27x)x' ... and check its roots
    let (a, b) = (27.0, 6.0 + 27.0 * x);
    let c = -68.0 + b * x;
    let disc = b * b - 4.0 * a * c;
    assert!(disc >= 0.0);
    for r in [(-b + disc.sqrt()) / (2.0 * a), (-b - disc.sqrt()) / (2.0 * a)] {
        assert!(r <= 0.0, "second positive root {r}");
        assert!(threshold_cubic(r).abs() < 1e-9);
    }
}

#[test]
fn kappa0_band() {
    for mu in [0.3, 0.6, 0.9, 1.0, 1.1, 1.2] {
        let k = kappa0(mu).unwrap();
        assert!(k.residual.abs() <= 1e-10 && k.residual_dy.abs() <= 1e-10, "{mu}: {k:?}");
        assert!(k.y0 > 0.0 && k.y0 < 1.0);
        assert!(k.kappa0 > kappa_crit_p(mu).max(0.0));
        let below = classify(HomothetyCase::Positive, k.kappa0 * (1.0 - 1e-3), mu).unwrap();
        let above = classify(HomothetyCase::Positive, k.kappa0 * (1.0 + 1e-3), mu).unwrap();
        assert!(below.tag.is_eternal(), "{mu}: {below:?}");
        assert_eq!(above.tag, BehaviorTag::FiniteTimeCollapse, "{mu}");
    }
    assert!(kappa0(0.0).is_err());
}

#[test]
fn flat_closed_form_properties() {
    for t in [-3.0, 0.0, 2.0] {
        assert_eq!(flat_closed_form(2.0, 2.0f64.sqrt(), t).unwrap(), 1.0);
    }
    assert!(close(flat_closed_form(0.0, 1.0, 2.0).unwrap(), 7f64.cbrt(), 1e-15));
    assert!(flat_closed_form(0.0, 1.0, -1.0 / 3.0).is_err());
    // b > 0
    let (k, mu) = (0.5, 1.0);
    let lim = (k * mu * mu / 4.0f64).cbrt();
    assert!(close(flat_closed_form(k, mu, -50.0).unwrap(), lim, 1e-12));
    // ODE residual by central differences
    for &(k, mu) in &[(0.5, 1.0), (3.0, 1.5), (1.0, 0.3)] {
        let p = HomothetyProblem::for_case(HomothetyCase::Flat, k, mu).unwrap();
        let ts = flat_collapse_time(k, mu).unwrap_or(5.0);
        for i in 0..50 {
            let t = -4.0 + (ts - 0.1 + 4.0) * i as f64 / 49.0;
            let h = 1e-5;
            let s = flat_closed_form(k, mu, t).unwrap();
            let ds = (flat_closed_form(k, mu, t + h).unwrap() - flat_closed_form(k, mu, t - h).unwrap()) / (2.0 * h);
            assert!((s * ds - p.rhs(s).unwrap()).abs() < 1e-7, "({k},{mu}) t={t}");
            // t(σ) is ill-conditioned once σ sits on its t → −∞ limit
            let lim = (k * mu * mu / 4.0f64).cbrt();
            if (s - lim).abs() > 1e-4 {
                let back = flat_closed_form_inverse(k, mu, s).unwrap();
                assert!((back - t).abs() < 1e-8 * t.abs().max(1.0), "({k},{mu}) t={t} back={back}");
            }
        }
    }
}

#[test]
fn su2_closed_form_properties() {
    let k = 0.8;
    assert!(close(su2_closed_form(k, -200.0).unwrap(), 3.0, 1e-12));
    assert!(su2_closed_form(k, su2_t_max(k)).unwrap().abs() < 1e-6);
    assert!(su2_closed_form(k, su2_t_max(k) * 1.01).is_err());
    assert!(close(su2_closed_form(k, 0.0).unwrap(), 1.0, 1e-14));
    let tm = su2_t_max(k);
    for i in 0..100 {
        let t = -5.0 * k + (tm - 0.05 * k + 5.0 * k) * i as f64 / 99.0;
        let h = 1e-6;
        let s = su2_closed_form(k, t).unwrap();
        let ds = (su2_closed_form(k, t + h).unwrap() - su2_closed_form(k, t - h).unwrap()) / (2.0 * h);
        assert!((s * ds - (4.0 * s - 12.0) / k).abs() <= 1e-8, "t = {t}");
        assert!((su2_closed_form_inverse(k, s).unwrap() - t).abs() < 1e-9);
    }
}

/// Graph distance between a sample and a closed form with explicit inverse.
fn graph_err(t: f64, s: f64, cf: impl Fn(f64) -> Option<f64>, inv: impl Fn(f64) -> Option<f64>) -> f64 {
    let ds = cf(t).map_or(f64::INFINITY, |c| (s - c).abs() / s);
    let dt = inv(s).map_or(f64::INFINITY, |ti| (t - ti).abs() / t.abs().max(1.0));
    ds.min(dt)
}

#[test]
fn integrator_matches_flat_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut params: Vec<(f64, f64)> = (0..7).map(|_| (rng.gen_range(0.1..2.0), rng.gen_range(0.2..1.5))).collect();
    params.extend([(2.0, 2.0), (3.0, 1.5), (1.5, 2.5)]);
    let mut negative_b = 0;
    for (k, mu) in params {
        let p = HomothetyProblem::for_case(HomothetyCase::Flat, k, mu).unwrap();
        let tr = integrate(&p, (-20.0, 20.0), &IntegrationOptions::default()).unwrap();
        let mut worst = 0.0f64;
        for &(t, s) in &tr.samples {
            let e = graph_err(t, s, |t| flat_closed_form(k, mu, t).ok(), |s| flat_closed_form_inverse(k, mu, s));
            worst = worst.max(e);
        }
        assert!(worst <= 1e-6, "({k},{mu}): {worst}");
        if let Some(ts) = flat_collapse_time(k, mu) {
            negative_b += 1;
            let tc = tr.collapse_time().expect("collapse event");
            assert!((tc - ts).abs() <= 1e-6 * ts.abs(), "({k},{mu}): {tc} vs {ts}");
        }
    }
    assert!(negative_b >= 3);
}

#[test]
fn integrator_matches_su2_collapse() {
    for k in [0.2, 1.0, 3.0] {
        let p = su2_problem(k).unwrap();
        let tr = integrate(&p, (-10.0 * k, f64::INFINITY), &IntegrationOptions::default()).unwrap();
        let tc = tr.collapse_time().unwrap();
        assert!((tc - su2_t_max(k)).abs() <= 1e-6 * su2_t_max(k), "{k}");
        for t in [-5.0 * k, -k, 0.0, 0.5 * su2_t_max(k)] {
            let s = tr.sigma_at(t).unwrap();
            assert!((s - su2_closed_form(k, t).unwrap()).abs() <= 1e-8, "{k} {t}");
        }
    }
}

#[test]
fn static_trajectories_are_constant() {
    let p = HomothetyProblem::for_case(HomothetyCase::Negative, 6.0, 0.0).unwrap();
    let tr = integrate(&p, (-5.0, 5.0), &IntegrationOptions::default()).unwrap();
    assert!(tr.samples.iter().all(|&(_, s)| (s - 1.0).abs() <= 1e-12));
    assert_eq!(tr.behavior().tag, BehaviorTag::Static);
    let mu = 1.3;
    let p = HomothetyProblem::for_case(HomothetyCase::Positive, kappa_crit_p(mu), mu).unwrap();
    assert_eq!(classify_problem(&p).unwrap().tag, BehaviorTag::Static);
}

#[test]
fn itemized_examples() {
    let b = classify(HomothetyCase::Positive, 0.1, 1.0).unwrap();
    assert_eq!(b.tag, BehaviorTag::EternalRegular);
    let (lo, hi) = (b.past_limit.unwrap(), b.future_limit.unwrap());
    assert!(0.0 < lo && lo < 1.0 && 1.0 < hi && hi.is_finite());

    assert_eq!(classify(HomothetyCase::Negative, 7.0, 0.0).unwrap().tag, BehaviorTag::FiniteTimeCollapse);
    assert_eq!(classify(HomothetyCase::Negative, 6.0, 0.0).unwrap().tag, BehaviorTag::Static);
    assert_eq!(classify(HomothetyCase::Negative, 5.0, 0.0).unwrap().tag, BehaviorTag::EternalPastFiniteFutureDivergent);

    // κ = μ = 0: σ = 1 − 2t/3
    let b = classify(HomothetyCase::Positive, 0.0, 0.0).unwrap();
    assert_eq!(b.tag, BehaviorTag::FiniteTimeCollapse);
    assert!((b.collapse_time.unwrap() - 1.5).abs() < 1e-7);
    let p = HomothetyProblem::for_case(HomothetyCase::Positive, 0.0, 0.0).unwrap();
    let tr = integrate(&p, (-3.0, 1.0), &IntegrationOptions::default()).unwrap();
    for &(t, s) in &tr.samples {
        assert!((s - (1.0 - 2.0 * t / 3.0)).abs() < 1e-9);
    }
}

#[test]
fn cubic_boundary_is_unresolved() {
    let mu = mu_threshold_cubic().sqrt();
    assert_eq!(classify(HomothetyCase::Positive, 0.9, mu).unwrap().tag, BehaviorTag::Unresolved);
    assert_ne!(classify(HomothetyCase::Positive, 0.9, mu * 1.01).unwrap().tag, BehaviorTag::Unresolved);
}

#[test]
fn roots_and_integration_agree_on_grids() {
    let kappas = linspace(0.0, 2.0, 20);
    let mus = linspace(0.0, 2.5, 20);
    for case in HomothetyCase::ALL {
        let cells = sweep(case, &kappas, &mus, true, Execution::default()).unwrap();
        for c in cells {
            let it = c.integrated.unwrap();
            if c.behavior.tag == BehaviorTag::Unresolved {
                continue;
            }
            assert_eq!(c.behavior.tag, it, "{case} κ={} μ={}", c.kappa, c.mu);
        }
    }
}

#[test]
fn sweep_is_executor_independent() {
    let kappas = linspace(0.0, 1.0, 7);
    let mus = linspace(0.0, 2.0, 7);
    let a = sweep(HomothetyCase::Positive, &kappas, &mus, false, Execution::Sequential).unwrap();
    let b = sweep(HomothetyCase::Positive, &kappas, &mus, false, Execution::Parallel).unwrap();
    assert_eq!(a, b);
}

#[test]
fn trajectories_are_monotone() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..30 {
        let case = HomothetyCase::ALL[rng.gen_range(0..3)];
        let p = HomothetyProblem::for_case(case, rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0)).unwrap();
        let tr = integrate(&p, (-30.0, 30.0), &IntegrationOptions::default()).unwrap();
        let sign = p.rhs(1.0).unwrap().signum();
        for w in tr.samples.windows(2) {
            let d = (w[1].1 - w[0].1) * sign;
            assert!(d >= -1e-12 * w[0].1, "{p:?}");
        }
    }
}

#[test]
fn halving_tolerance_stays_within_estimate() {
    for (case, k, mu) in [(HomothetyCase::Positive, 0.1, 1.0), (HomothetyCase::Negative, 0.5, 0.2), (HomothetyCase::Flat, 0.5, 1.0)] {
        let p = HomothetyProblem::for_case(case, k, mu).unwrap();
        let span = (-2.0, 2.0);
        let a = integrate(&p, span, &IntegrationOptions::with_tol(1e-8)).unwrap();
        let b = integrate(&p, span, &IntegrationOptions::with_tol(5e-9)).unwrap();
        for t in [span.0, span.1] {
            let (sa, sb) = (a.sigma_at(t).unwrap(), b.sigma_at(t).unwrap());
            assert!((sa - sb).abs() <= a.error_estimate, "{case}: {} > {}", (sa - sb).abs(), a.error_estimate);
        }
    }
}

#[test]
fn einstein_necessity() {
    for k in [0.3, 1.0, 2.0] {
        let su2 = catalog("su2", k).unwrap();
        let g = Metric::identity(3);
        let c = check_homothety_consistency(&su2, &g, k, 0.0, HomothetyModel::Printed).unwrap();
        assert!(c.pass && !c.einstein, "{c:?}");
        assert!((c.f_t.unwrap() - 1.0 / k).abs() < 1e-12);
        assert!(c.scalar.abs() < 1e-12);
        let p = problem_for_metric(&su2, &g, k, 0.0, HomothetyModel::Printed).unwrap();
        assert!((p.rhs(0.5).unwrap() - (4.0 * 0.5 - 12.0) / k).abs() < 1e-12);
        // with μ ≠ 0 or under the flow-reduced model the relations fail
        assert!(!check_homothety_consistency(&su2, &g, k, 0.1, HomothetyModel::Printed).unwrap().pass);
        assert!(!check_homothety_consistency(&su2, &g, k, 0.0, HomothetyModel::FlowReduced).unwrap().pass);
    }
    for (name, c) in [("r3", 0.0), ("hyperbolic", 0.7), ("su2", 0.0)] {
        let alg = if name == "su2" {
            hetflow_core::homogeneous::LieAlgebraData::from_brackets("s3", 3, &[(1, 2, 0, 1.0), (2, 0, 1, 1.0), (0, 1, 2, 1.0)]).unwrap()
        } else {
            catalog(name, c).unwrap()
        };
        let r = check_homothety_consistency(&alg, &Metric::identity(3), 0.5, 0.4, HomothetyModel::Printed).unwrap();
        assert!(r.pass && r.einstein, "{name}");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let sl2 = catalog("sl2r", 0.0).unwrap();
    for _ in 0..10 {
        let g = random_metric(&mut rng, 3, 0.25);
        let r = check_homothety_consistency(&sl2, &g, 0.5, 0.0, HomothetyModel::Printed).unwrap();
        assert!(r.scalar.abs() > 1e-3);
        assert!(!r.pass);
    }
}
