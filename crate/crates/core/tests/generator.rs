use norden_core::files::ModelFile;
use norden_core::generator::{
    generate, random_norden, search_isotropic_kahler, solve_w3_family, GeneratorConfig, ModelKind, W3Family,
};
use norden_core::norden::validate_norden;
use norden_core::{Error, Geometry, Tolerances};

fn tol() -> Tolerances {
    Tolerances::default()
}

#[test]
fn same_seed_same_model() {
    for kind in [ModelKind::Kahler, ModelKind::Random, ModelKind::W3] {
        for dim in [4, 6] {
            let cfg = GeneratorConfig::new(dim, 7);
            let a = generate(kind, &cfg, &tol()).unwrap();
            let b = generate(kind, &cfg, &tol()).unwrap();
            assert_eq!(a.model.constants(), b.model.constants());
            assert_eq!(a.structure.g(), b.structure.g());
            assert_eq!(a.label, b.label);
            let fa = ModelFile::from_model(&a.model, &a.structure, Some(a.label.clone())).to_json();
            let fb = ModelFile::from_model(&b.model, &b.structure, Some(b.label)).to_json();
            assert_eq!(fa, fb);
        }
    }
}

#[test]
fn different_seeds_differ() {
    let a = generate(ModelKind::W3, &GeneratorConfig::new(4, 1), &tol()).unwrap();
    let b = generate(ModelKind::W3, &GeneratorConfig::new(4, 2), &tol()).unwrap();
    assert_ne!(a.model.constants(), b.model.constants());
}

#[test]
fn random_structures_validate() {
    for dim in [4, 6, 8] {
        for seed in 0..100 {
            let s = random_norden(&GeneratorConfig::new(dim, seed), &tol()).unwrap();
            assert!(validate_norden(s.j().clone(), s.g().clone(), &tol()).is_ok());
        }
    }
}

#[test]
fn invalid_dimensions_are_rejected() {
    for dim in [0, 3, 5, 10] {
        let err = generate(ModelKind::W3, &GeneratorConfig::new(dim, 0), &tol()).unwrap_err();
        assert!(matches!(err, Error::InvalidDimension(_)), "{err:?}");
    }
}

#[test]
fn generated_kinds_have_their_class() {
    for seed in 0..5 {
        let k = generate(ModelKind::Kahler, &GeneratorConfig::new(4, seed), &tol()).unwrap();
        let g = Geometry::new(k.model, k.structure, &tol()).unwrap();
        assert!(g.classes.is_w0);

        for dim in [4, 6] {
            let w = generate(ModelKind::W3, &GeneratorConfig::new(dim, seed), &tol()).unwrap();
            let g = Geometry::new(w.model, w.structure, &tol()).unwrap();
            assert!(g.classes.is_w3 && !g.classes.is_w0);
            assert!((g.nabla_j.max_abs() - 1.0).abs() <= 1e-12);
            assert!(g.model.jacobi_residual().0 <= 1e-10);
        }
    }
}

#[test]
fn nilpotent_family_at_dim_six() {
    let cfg = GeneratorConfig::new(6, 3);
    let s = random_norden(&cfg, &tol()).unwrap();
    let sol = solve_w3_family(&s, &cfg, &tol()).unwrap();
    assert!(matches!(sol.family, W3Family::TwoStepNilpotent { .. }));
    assert!(sol.solution_dim > 0);
}

#[test]
fn nilpotent_family_at_dim_four_is_kahler_only() {
    let mut cfg = GeneratorConfig::new(4, 3);
    let s = random_norden(&cfg, &tol()).unwrap();
    for center in 1..=2 {
        cfg.center_dim = Some(center);
        let label = match solve_w3_family(&s, &cfg, &tol()) {
            Ok(sol) => sol.family.to_string(),
            Err(e) => e.kind().to_string(),
        };
        assert!(!label.contains("nilpotent"), "center {center}: {label}");
    }
}

#[test]
fn isotropic_search_results_are_isotropic() {
    for seed in 0..3 {
        let cfg = GeneratorConfig::new(4, seed);
        let s = random_norden(&cfg, &tol()).unwrap();
        match search_isotropic_kahler(&s, &cfg, &tol()) {
            Ok(m) => {
                let g = Geometry::new(m, s, &tol()).unwrap();
                let inv = g.invariants(1e-8);
                assert!(g.classes.is_w3);
                assert!(inv.snorm.abs() <= 1e-8);
                assert!(!inv.is_kahler && inv.is_isotropic_kahler);
                assert!((inv.tau_star2 + inv.tau).abs() <= 1e-8);
            }
            Err(Error::NotFound(_)) => {}
            Err(e) => panic!("{e}"),
        }
    }
}

#[test]
fn isotropic_flags_of_generated_models() {
    let w = generate(ModelKind::W3, &GeneratorConfig::new(4, 0), &tol()).unwrap();
    let inv = Geometry::new(w.model, w.structure, &tol()).unwrap().invariants(1e-8);
    assert_eq!((inv.is_kahler, inv.is_isotropic_kahler), (false, false));

    let i = generate(ModelKind::IsotropicW3, &GeneratorConfig::new(4, 0), &tol()).unwrap();
    let inv = Geometry::new(i.model, i.structure, &tol()).unwrap().invariants(1e-8);
    assert_eq!((inv.is_kahler, inv.is_isotropic_kahler), (false, true));
}
