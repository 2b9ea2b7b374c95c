use hetflow_core::homogeneous::*;
use hetflow_core::identities::{riemannian_3d, torsion_3d};
use hetflow_core::soliton::classify_constant_dilaton;
use hetflow_core::tensor::{constant_curvature, Metric};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[test]
fn connection_and_curvature_invariants_on_random_metrics() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for name in CATALOG {
        let alg = catalog(name, 0.8).unwrap();
        for _ in 0..100 {
            let g = random_metric(&mut rng, 3, 0.3);
            let gamma = levi_civita_invariant(&alg, &g).unwrap();
            let metricity = invariant_covariant_derivative(g.comps(), 2, &gamma, 3);
            assert!(max_abs(&metricity) <= 1e-10, "{name} metricity");
            for i in 0..3 {
                for j in 0..3 {
                    for kk in 0..3 {
                        let t = gamma[(i * 3 + j) * 3 + kk] - gamma[(j * 3 + i) * 3 + kk] - alg.c[(i * 3 + j) * 3 + kk];
                        assert!(t.abs() <= 1e-10, "{name} torsion");
                    }
                }
            }
            let (r, ric, _) = invariant_curvature(&alg, &g).unwrap();
            assert!(r.pair_symmetry_defect() <= 1e-10, "{name}");
            assert!(r.first_bianchi_defect() <= 1e-10, "{name}");
            // contracted second Bianchi: the scalar curvature is constant, so div Ric = 0
            let nric = invariant_covariant_derivative(ric.comps(), 2, &gamma, 3);
            let gi = g.inv();
            for v in 0..3 {
                let div: f64 =
                    (0..3).flat_map(|i| (0..3).map(move |a| (i, a))).map(|(i, a)| gi[i * 3 + a] * nric[(i * 3 + a) * 3 + v]).sum();
                assert!(div.abs() <= 1e-10, "{name} div Ric = {div}");
            }
        }
    }
}

#[test]
fn abelian_connection_vanishes() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let g = random_metric(&mut rng, 3, 0.3);
    let gamma = levi_civita_invariant(&catalog("r3", 0.0).unwrap(), &g).unwrap();
    assert_eq!(max_abs(&gamma), 0.0);
}

#[test]
fn volume_form_is_parallel() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let alg = catalog("sl2r", 0.0).unwrap();
    let g = random_metric(&mut rng, 3, 0.3);
    let gamma = levi_civita_invariant(&alg, &g).unwrap();
    let nnu = invariant_covariant_derivative(g.volume_form().comps(), 3, &gamma, 3);
    assert!(max_abs(&nnu) <= 1e-12);
}

#[test]
fn su2_brackets_and_non_einstein_ricci() {
    let kappa = 2.5_f64;
    let a = catalog("su2", kappa).unwrap();
    let r = kappa.sqrt();
    assert!((a.bracket(1, 2)[0] - 0.5 / r).abs() < 1e-15);
    assert!((a.bracket(2, 0)[1] - 0.5 / r).abs() < 1e-15);
    assert!((a.bracket(0, 1)[2] - 2.0 / r).abs() < 1e-15);
    let g = Metric::identity(3);
    let (_, ric, s) = invariant_curvature(&a, &g).unwrap();
    assert!(s.abs() < 1e-12);
    let mut ev = ric.eigenvalues(&g);
    ev.sort_by(|x, y| x.total_cmp(y));
    let want = [-1.0 / kappa, -1.0 / kappa, 2.0 / kappa];
    for i in 0..3 {
        assert!((ev[i] - want[i]).abs() < 1e-12);
    }
    // not Einstein, and s = 0 cannot satisfy s = −½f² with f ≠ 0
    assert!(classify_constant_dilaton(&g, &ric, kappa).unwrap().case.is_none());
}

#[test]
fn hyperbolic_model_has_constant_negative_curvature() {
    for c in [0.3, 1.0, 1.7] {
        let alg = catalog("hyperbolic", c).unwrap();
        assert!(!alg.is_unimodular());
        assert!((alg.ad_traces()[2] - 2.0 * c).abs() < 1e-15);
        let g = Metric::identity(3);
        let (r, _, s) = invariant_curvature(&alg, &g).unwrap();
        assert!(r.max_abs_diff(&constant_curvature(&g, -c * c)) < 1e-12);
        assert!((s + 6.0 * c * c).abs() < 1e-12);
    }
}

#[test]
fn milnor_cross_check_on_diagonal_metrics() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    use rand::Rng;
    // [e_j, e_k] = λ_i e_i cyclic on an orthonormal frame: rescale the basis
    for lam in [[1.0, 0.0, 0.0], [-1.0, 1.0, 1.0], [1.0, -1.0, 0.0], [1.0, 1.0, 0.0], [1.0, 1.0, 1.0]] {
        for _ in 0..20 {
            let d: Vec<f64> = (0..3).map(|_| rng.gen_range(0.5..2.0)).collect();
            // with g = diag(d²) the unit frame E_i = e_i/d_i has [E_j,E_k] = λ_i d_i/(d_j d_k) E_i
            let alg = LieAlgebraData::from_brackets("milnor", 3, &[(1, 2, 0, lam[0]), (2, 0, 1, lam[1]), (0, 1, 2, lam[2])]).unwrap();
            let g = Metric::diagonal(&[d[0] * d[0], d[1] * d[1], d[2] * d[2]]).unwrap();
            let (_, ric, _) = invariant_curvature(&alg, &g).unwrap();
            let eff = [lam[0] * d[0] / (d[1] * d[2]), lam[1] * d[1] / (d[2] * d[0]), lam[2] * d[2] / (d[0] * d[1])];
            let want = milnor_ricci(eff);
            for i in 0..3 {
                let got = ric.at(i, i) / (d[i] * d[i]);
                assert!((got - want[i]).abs() < 1e-10, "{lam:?}");
            }
        }
    }
}

#[test]
fn closed_invariant_one_forms() {
    let h = catalog("heisenberg", 0.0).unwrap();
    assert!(h.is_closed_one_form(&[0.0, 1.0, -2.0]));
    assert!(!h.is_closed_one_form(&[1.0, 0.0, 0.0]));
    let geom = InvariantGeometry::new(h, Metric::identity(3)).unwrap();
    assert!(geom.clone().with_closed_phi(vec![1.0, 0.0, 0.0]).is_err());
    assert!(geom.with_closed_phi(vec![0.0, 0.3, 0.1]).is_ok());
}

#[test]
fn invariant_samples_satisfy_three_dimensional_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for name in ["heisenberg", "sl2r", "e11", "e2", "su2"] {
        for _ in 0..10 {
            let g = random_metric(&mut rng, 3, 0.3);
            let geom = InvariantGeometry::new(catalog(name, 1.3).unwrap(), g).unwrap().with_dilaton(0.9).unwrap();
            let s = build_sample_invariant(&geom).unwrap();
            for c in riemannian_3d(&s).unwrap().into_iter().chain(torsion_3d(&s).unwrap()) {
                assert!(c.rel_err < 1e-10, "{name} {} {}", c.name, c.rel_err);
            }
            assert!(s.df().unwrap().iter().all(|x| *x == 0.0));
        }
    }
}
