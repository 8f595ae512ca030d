use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use norden_core::checks::{
    check_kahler_curvature_property, check_lemma, check_prop_w3, check_theorem21, check_theorem22, random_pairs,
};
use norden_core::curvature::curvature_symmetry;
use norden_core::generator::{canonical_norden, generate, random_model, GeneratorConfig, ModelKind};
use norden_core::norden::validate_norden;
use norden_core::{verify, Error, Geometry, LieAlgebraModel, Tolerances};

fn tol() -> Tolerances {
    Tolerances::default()
}

fn w3(dim: usize, seed: u64) -> Geometry {
    let g = generate(ModelKind::W3, &GeneratorConfig::new(dim, seed), &tol()).unwrap();
    Geometry::new(g.model, g.structure, &tol()).unwrap()
}

fn flat(dim: usize) -> Geometry {
    Geometry::new(LieAlgebraModel::abelian(dim).unwrap(), canonical_norden(dim).unwrap(), &tol()).unwrap()
}

#[test]
fn doubling_the_metric_halves_scalar_curvature() {
    for seed in 0..10 {
        let (m, s) = random_model(&GeneratorConfig::new(4, seed), &tol()).unwrap();
        let base = Geometry::new(m.clone(), s.clone(), &tol()).unwrap();
        let s2 = validate_norden(s.j().clone(), s.g() * 2.0, &tol()).unwrap();
        let scaled = Geometry::new(m, s2, &tol()).unwrap();
        let sc = base.curvature.tau.abs().max(1.0);
        assert!((scaled.curvature.tau - base.curvature.tau / 2.0).abs() <= 1e-10 * sc);
        assert!((scaled.curvature.tau_star2 - base.curvature.tau_star2 / 2.0).abs() <= 1e-10 * sc);
        // the connection does not change under constant rescaling
        let diff = scaled.connection.coefficients().max_abs_diff(base.connection.coefficients());
        assert!(diff <= 1e-12 * base.connection.coefficients().max_abs().max(1.0));
    }
}

#[test]
fn curvature_symmetries_on_random_models() {
    for seed in 0..20 {
        for dim in [4, 6] {
            let (m, s) = random_model(&GeneratorConfig::new(dim, seed), &tol()).unwrap();
            let geom = Geometry::new(m, s, &tol()).unwrap();
            let sym = curvature_symmetry(&geom.curvature);
            for r in [sym.first_pair, sym.second_pair, sym.pair_exchange, sym.bianchi, sym.rho_star_symmetry] {
                assert!(r <= 1e-10, "{sym:?}");
            }
        }
    }
}

#[test]
fn lemma_contraction_order_matters() {
    // the other slot pairing traces (∇_{e_i}J)e_i, which vanishes on W3, so the
    // identity would read ‖∇J‖ = 0 and fail on non-isotropic models
    let geom = w3(4, 3);
    let gi = geom.structure.g_inv();
    let lemma = check_lemma(&geom, &tol()).unwrap();
    assert!(lemma.ii <= 1e-10);
    let wrong = geom.gram.contract(&[(0, 2), (1, 3)], &[gi, gi]).unwrap().scalar();
    let snorm = geom.curvature.snorm;
    assert!(snorm.abs() > 1e-3);
    assert!(wrong.abs() <= 1e-10 * snorm.abs().max(1.0));
}

#[test]
fn w3_only_checks_reject_other_classes() {
    let mut found = 0;
    for seed in 0..10 {
        let (m, s) = random_model(&GeneratorConfig::new(4, seed), &tol()).unwrap();
        let geom = Geometry::new(m, s, &tol()).unwrap();
        if geom.classes.is_w3 {
            continue;
        }
        found += 1;
        assert!(matches!(check_prop_w3(&geom, &tol()), Err(Error::NotW3(_))));
        assert!(matches!(check_lemma(&geom, &tol()), Err(Error::NotW3(_))));
        let report = verify(&geom, &tol(), 10, 0);
        assert_eq!(report.check("identity12").unwrap().residual, None);
    }
    assert!(found > 0);
}

#[test]
fn bisectional_curvature_examples() {
    let s = canonical_norden(4).unwrap();
    let x = DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]);
    let y = DVector::from_vec(vec![0.0, 1.0, 0.0, 0.0]);
    let geom = flat(4);
    assert_eq!(geom.bisectional_curvature(&x, &y, 1e-8).unwrap(), 0.0);

    // e0 + e3 spans a strongly isotropic plane: g(x,x) = g(x,Jx) = 0
    let j = s.j();
    let a = DVector::from_vec(vec![1.0, 0.0, 0.0, 1.0]);
    assert!(s.inner(&a, &a).abs() < 1e-15 && s.inner(&a, &(j * &a)).abs() < 1e-15);
    assert!(matches!(
        geom.bisectional_curvature(&a, &y, 1e-8),
        Err(Error::IsotropicPlane(_))
    ));

    let w = w3(4, 5);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let jw = w.structure.j().clone();
    for _ in 0..50 {
        let x = DVector::from_fn(4, |_, _| rng.random_range(-1.0..1.0));
        let y = DVector::from_fn(4, |_, _| rng.random_range(-1.0..1.0));
        let (al, be) = (rng.random_range(-1.0..1.0_f64), rng.random_range(-1.0..1.0_f64));
        if al * al + be * be < 0.1 {
            continue;
        }
        let (Ok(h0), Ok(h1)) = (
            w.bisectional_curvature(&x, &y, 1e-8),
            w.bisectional_curvature(&(&x * al + &jw * &x * be), &y, 1e-8),
        ) else {
            continue;
        };
        assert!((h1 - h0).abs() <= 1e-9 * h0.abs().max(1.0));
    }
}

#[test]
fn kahler_curvature_property_examples() {
    let k = check_kahler_curvature_property(&flat(4), &tol());
    assert!(k.has_kahler_curvature && k.consistent);
    for seed in 0..5 {
        let geom = w3(4, seed);
        let k = check_kahler_curvature_property(&geom, &tol());
        assert!(k.consistent);
        // a non-isotropic W3 model cannot have Kähler curvature
        assert!(!k.has_kahler_curvature);
    }
}

#[test]
fn holomorphic_checks_on_flat_model() {
    let geom = flat(4);
    let pairs = random_pairs(4, 50, 1);
    let out = check_theorem21(&geom, &pairs, 1e-8, 1e-8, &tol()).unwrap();
    assert_eq!(out.violations, 0);
    let t22 = check_theorem22(&geom, &tol()).unwrap();
    assert!(t22.antecedent && t22.consistent);
    assert_eq!(t22.snorm, 0.0);
}

#[test]
fn verify_reports_every_row_on_w3_models() {
    for dim in [4, 6] {
        let geom = w3(dim, 11);
        let report = verify(&geom, &tol(), 100, 0);
        assert!(report.all_passed, "{:?}", report.checks);
        assert_eq!(report.theorem21_violations, Some(0));
        assert_eq!(report.theorem22_consistent, Some(true));
    }
}

#[test]
fn perturbed_connection_breaks_the_first_identity() {
    let geom = w3(4, 0);
    let bad = geom.connection.perturbed(0, 1, 0, 1e-3);
    let broken = Geometry::with_connection(geom.model.clone(), geom.structure.clone(), bad, &tol()).unwrap();
    let report = verify(&broken, &tol(), 10, 0);
    assert!(!report.check("theorem1_i").unwrap().passed());
    assert!(!report.check("torsion").unwrap().passed());
    assert!(!report.all_passed);
}

#[test]
fn structure_matrices_are_consistent() {
    let geom = w3(6, 2);
    let j: &DMatrix<f64> = geom.structure.j();
    assert!((j * j + DMatrix::identity(6, 6)).amax() <= 1e-10);
}
