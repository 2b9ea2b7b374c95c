use hetflow_core::chart::{self, Poly, PolyMetric};
use hetflow_core::homogeneous::{build_sample_invariant, catalog, random_metric, InvariantGeometry};
use hetflow_core::identities::rel_err;
use hetflow_core::soliton::*;
use hetflow_core::tensor::{hodge_star, AltTensor, Metric, SymBilinear};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const KAPPAS: [f64; 4] = [0.1, 0.5, 1.0, 3.7];

fn chart_sample(rng: &mut ChaCha8Rng, n: usize) -> hetflow_core::sample::GeometrySample {
    let m = PolyMetric::random(rng, n, 0.3);
    let h = chart::random_three_form(rng, n, 3, 0.3);
    let p = Poly::random(rng, n, 4, 0.3);
    chart::build_sample_with_form(&m, &h, Some(&p), 2).unwrap()
}

#[test]
fn divergence_identities_on_random_three_dimensional_charts() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for i in 0..100 {
        let s = if i % 2 == 0 { chart::random_sample(&mut rng) } else { chart_sample(&mut rng, 3) };
        let r = verify_divergence_identities(&s, 0.3 + 0.01 * i as f64).unwrap();
        assert!(r.passed(), "{:?}", r.residuals);
    }
}

#[test]
fn divergence_identities_in_four_dimensions() {
    // ⟨R∧R⟩ and dH are generically nonzero here, so every term is exercised
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..12 {
        let s = chart_sample(&mut rng, 4);
        let e = Equations::evaluate(&s, 0.8).unwrap();
        assert!(e.rgh_wedge_rgh.iter().any(|x| x.abs() > 1e-3));
        let r = verify_divergence_identities(&s, 0.8).unwrap();
        assert!(r.passed(), "{:?}", r.residuals);
    }
}

#[test]
fn levi_civita_form_slots_break_the_first_lemma() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let s = chart_sample(&mut rng, 4);
    let e = Equations::evaluate_with(&s, 0.8, AdjointConvention::Mixed).unwrap();
    let (l, r) = e.lemma_div_rr();
    assert!(identity_defect(&l, &r) > 1e-4);
}

#[test]
fn divergence_identities_on_invariant_samples_with_closed_phi() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    for (name, phi) in [("heisenberg", vec![0.0, 0.4, -0.7]), ("e11", vec![0.0, 0.0, 0.6]), ("hyperbolic", vec![0.0, 0.0, 1.1])] {
        for _ in 0..5 {
            let g = random_metric(&mut rng, 3, 0.3);
            let geom = InvariantGeometry::new(catalog(name, 0.6).unwrap(), g)
                .unwrap()
                .with_dilaton(1.3)
                .unwrap()
                .with_closed_phi(phi.clone())
                .unwrap();
            let s = build_sample_invariant(&geom).unwrap();
            let r = verify_divergence_identities(&s, 0.9).unwrap();
            assert!(r.passed(), "{name} {:?}", r.residuals);
        }
    }
}

#[test]
fn zero_data_gives_zero_residuals() {
    let s = chart::build_sample(&PolyMetric::flat(3), None, None, 2).unwrap();
    let c = SolitonCandidate::new(s.clone(), 1.0).unwrap();
    let r = residual_general(&c).unwrap();
    assert!(r.residuals.values().all(|x| x.value == 0.0), "{:?}", r.residuals);
    let v = verify_divergence_identities(&s, 1.0).unwrap();
    assert!(v.residuals.values().all(|x| x.value == 0.0));
}

#[test]
fn einstein_split_matches_torsion_connection() {
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    for n in [3, 4] {
        let s = chart_sample(&mut rng, n);
        let e = Equations::evaluate(&s, 0.4).unwrap();
        let split: Vec<f64> = e.einstein_sym.iter().zip(&e.einstein_skew).map(|(a, b)| a + b).collect();
        assert!(rel_err(&split, &e.einstein_full) < 1e-12);
    }
}

#[test]
fn three_dimensional_reformulation_matches_general_system() {
    let mut rng = ChaCha8Rng::seed_from_u64(26);
    for _ in 0..20 {
        let s = chart::random_sample(&mut rng);
        let kappa = 0.6;
        let e = Equations::evaluate(&s, kappa).unwrap();
        let t = equations_3d(&s, kappa).unwrap();
        assert!(rel_err(&e.einstein_sym, t.einstein.comps()) < 1e-9);
        // E^a = ½(−∗df + f∗φ) = ½ ∗(fφ − df)
        let g = s.metric();
        let star = hodge_star(&AltTensor::one_form(&t.maxwell), &g, 1.0).unwrap();
        let half: Vec<f64> = star.comps().iter().map(|x| 0.5 * x).collect();
        assert!(rel_err(&e.einstein_skew, &half) < 1e-9);
    }
}

#[test]
fn constructed_solitons_satisfy_every_equation() {
    for kappa in KAPPAS {
        for c in [heisenberg_strong_soliton(kappa).unwrap(), hyperbolic_soliton(kappa).unwrap()] {
            let g = residual_general(&c).unwrap();
            assert!(g.passed(), "κ={kappa} {:?}", g.residuals);
            let t = residual_3d(&c).unwrap();
            assert!(t.passed(), "κ={kappa} {:?}", t.residuals);
            let st = strong_residual(&c).unwrap();
            assert!(st.full <= EXACT_TOL && st.skew <= EXACT_TOL);
            assert!(st.reduced.unwrap() <= EXACT_TOL);
            let v = verify_divergence_identities(&c.sample, kappa).unwrap();
            assert!(v.passed());
        }
    }
}

#[test]
fn heisenberg_killing_field_and_flat_auxiliary_connection() {
    for kappa in KAPPAS {
        let geom = heisenberg_geometry(kappa).unwrap();
        let f = geom.f.unwrap();
        let st = case_one_structure(&geom).unwrap();
        assert!(st.killing_defect <= EXACT_TOL);
        assert!(st.dxi_defect <= EXACT_TOL);
        assert!(st.auxiliary_curvature <= EXACT_TOL);
        assert!(st.auxiliary_xi <= EXACT_TOL);
        // ξ = e₁/f up to sign
        assert!((st.xi[0].abs() - 1.0 / f.abs()).abs() < 1e-12);
        // Ric = ½ f² (−g + 2 ξ⊗ξ)
        let (_, ric, _) = geom.curvature();
        let xl = geom.metric.lower(&st.xi);
        for i in 0..3 {
            for j in 0..3 {
                let w = 0.5 * f * f * (-geom.metric.at(i, j) + 2.0 * xl[i] * xl[j]);
                assert!((ric.at(i, j) - w).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn opposite_orientation_fails_only_the_strong_condition() {
    let kappa = 0.7;
    let mut geom = heisenberg_geometry(kappa).unwrap();
    geom.f = geom.f.map(|f| -f);
    let c = SolitonCandidate::from_invariant(geom, kappa).unwrap();
    assert!(residual_3d(&c).unwrap().passed());
    let st = strong_residual(&c).unwrap();
    assert!(st.full > 0.1);
    assert!((st.full - st.reduced.unwrap()).abs() < 1e-12);
}

#[test]
fn classification_round_trip() {
    for kappa in KAPPAS {
        for (geom, want) in [
            (heisenberg_geometry(kappa).unwrap(), ConstantDilatonCase::One),
            (hyperbolic_geometry(kappa).unwrap(), ConstantDilatonCase::Three),
        ] {
            let (_, ric, _) = geom.curvature();
            let cl = classify_constant_dilaton(&geom.metric, &ric, kappa).unwrap();
            assert_eq!(cl.case, Some(want));
            let f = cl.f.unwrap();
            assert!((kappa * f * f - want.kappa_f2()).abs() < 1e-12);
            assert!((f - geom.f.unwrap().abs()).abs() < 1e-12);
            assert!(cl.scalar_residual.abs() < 1e-12);
            assert!(cl.trace_identity.abs() < 1e-11);
            let (q, sres) = residual_quadratic_form(&geom.metric, &ric, f, kappa);
            assert!(q.max_abs() < 1e-12 && sres.abs() < 1e-12);
            assert!((quadratic_discriminant(f, kappa) - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn synthetic_spectra_classify_into_all_three_cases() {
    let g = Metric::identity(3);
    for kappa in KAPPAS {
        for case in [ConstantDilatonCase::One, ConstantDilatonCase::Two, ConstantDilatonCase::Three] {
            let sp = case.spectrum(kappa);
            let ric = SymBilinear::new(3, vec![sp[2], 0.0, 0.0, 0.0, sp[0], 0.0, 0.0, 0.0, sp[1]]).unwrap();
            let cl = classify_constant_dilaton(&g, &ric, kappa).unwrap();
            assert_eq!(cl.case, Some(case));
            let (q, _) = residual_quadratic_form(&g, &ric, cl.f.unwrap(), kappa);
            assert!(q.max_abs() < 1e-12);
            // the principal curvatures are roots of the quadratic
            let roots = quadratic_roots(cl.f.unwrap(), kappa);
            assert!(sp.iter().all(|m| roots.iter().any(|r| (r - m).abs() < 1e-12)));
        }
        let bent = SymBilinear::new(3, vec![-0.5 / kappa, 0.0, 0.0, 0.0, -0.5 / kappa, 0.0, 0.0, 0.0, 0.4 / kappa]).unwrap();
        assert!(classify_constant_dilaton(&g, &bent, kappa).unwrap().case.is_none());
        let (q, _) = residual_quadratic_form(&g, &bent, 1.0 / kappa.sqrt(), kappa);
        assert!(q.max_abs() > 1e-3);
    }
}

#[test]
fn case_two_on_e11_is_a_soliton_but_not_strong() {
    // identity metric on E(1,1): Ric = diag(0, 0, −2), so κ = ½, f = 2
    let kappa = 0.5;
    let geom = InvariantGeometry::new(catalog("e11", 0.0).unwrap(), Metric::identity(3)).unwrap().with_dilaton(2.0).unwrap();
    let (_, ric, _) = geom.curvature();
    let cl = classify_constant_dilaton(&geom.metric, &ric, kappa).unwrap();
    assert_eq!(cl.case, Some(ConstantDilatonCase::Two));
    let c = SolitonCandidate::from_invariant(geom, kappa).unwrap();
    assert!(residual_3d(&c).unwrap().passed());
    assert!(residual_general(&c).unwrap().get("einstein_sym").unwrap().pass);
    let st = strong_residual(&c).unwrap();
    assert!(st.full > 0.1 && st.reduced.unwrap() > 0.1);
}

#[test]
fn su2_with_any_dilaton_is_not_a_soliton() {
    let kappa = 1.2;
    for f in [0.5, 1.0, 3.0] {
        let geom = InvariantGeometry::new(catalog("su2", kappa).unwrap(), Metric::identity(3)).unwrap().with_dilaton(f).unwrap();
        let c = SolitonCandidate::from_invariant(geom, kappa).unwrap();
        let r = residual_3d(&c).unwrap();
        assert!(!r.get("einstein_sym").unwrap().pass);
        assert!(!r.get("dilaton").unwrap().pass);
        assert!(r.get("einstein_skew").unwrap().pass);
    }
}

#[test]
fn skew_projection_is_the_dilaton_laplacian() {
    let mut rng = ChaCha8Rng::seed_from_u64(27);
    for _ in 0..20 {
        let s = chart::random_sample(&mut rng);
        let (star, expected) = strong_skew_scalar_3d(&s, 0.9).unwrap();
        assert!((star + expected).abs() <= 1e-9 * (1.0 + expected.abs()), "{star} {expected}");
    }
}

#[test]
fn residual_report_json_shape() {
    let r = residual_general(&hyperbolic_soliton(1.0).unwrap()).unwrap();
    let v: serde_json::Value = serde_json::to_value(&r).unwrap();
    assert_eq!(v["schema_version"], 1);
    for name in ["einstein_sym", "einstein_skew", "dilaton", "bianchi", "strong_full", "strong_skew", "trace_identity"] {
        let e = &v["residuals"][name];
        assert!(e["value"].as_f64().unwrap() >= 0.0, "{name}");
        assert!(e["tol"].is_number() && e["pass"].is_boolean());
    }
}

#[test]
fn invalid_kappa_is_rejected() {
    assert!(heisenberg_strong_soliton(0.0).is_err());
    assert!(hyperbolic_soliton(-1.0).is_err());
    assert!(hyperbolic_soliton(f64::NAN).is_err());
}
