//! Identity checks on a computed [`Geometry`] and the aggregated verification report.
//!
//! Every residual is a max-norm over all frame tuples divided by
//! `max(1, max-norm of the largest participating tensor)`.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::curvature::{curvature_symmetry, plane_norm_squared, Geometry};
use crate::error::{Error, Result};
use crate::models::{metricity_residual, torsion_residual};
use crate::norden::strongly_isotropic_vector;
use crate::tensor::DenseTensor;
use crate::tolerance::Tolerances;

fn relative(abs: f64, scale: f64) -> f64 {
    abs / scale.max(1.0)
}

fn largest(ts: &[&DenseTensor]) -> f64 {
    ts.iter().fold(0.0, |m, t| m.max(t.max_abs()))
}

fn require_w3(geom: &Geometry, tol: &Tolerances) -> Result<()> {
    let r = geom.classes.residual_w3;
    if r > tol.class {
        return Err(Error::NotW3(r));
    }
    Ok(())
}

fn jmap(t: &DenseTensor, slots: &[usize], geom: &Geometry) -> DenseTensor {
    t.with_slots_mapped(slots, geom.structure.j())
        .expect("slot within rank")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourResiduals {
    pub i: f64,
    pub ii: f64,
    pub iii: f64,
    pub iv: f64,
}

/// Curvature identities valid on every almost complex manifold with Norden metric.
pub fn check_theorem1(geom: &Geometry) -> FourResiduals {
    let r = &geom.curvature.r;
    let nf = &geom.nabla_f;
    let a = &geom.gram;
    let gi = geom.structure.g_inv();

    // R(X,Y,JZ,U) − R(X,Y,Z,JU) − (∇_X F)(Y,Z,U) + (∇_Y F)(X,Z,U)
    let t1 = jmap(r, &[2], geom)
        .combine(1.0, &jmap(r, &[3], geom), -1.0)
        .combine(1.0, nf, -1.0)
        .combine(1.0, &nf.permuted(&[1, 0, 2, 3]), 1.0);

    // (∇_X F)(Y,JZ,U) + (∇_X F)(Y,Z,JU) + g((∇_X J)Z,(∇_Y J)U) + g((∇_X J)U,(∇_Y J)Z)
    let nf_jz_plus_ju = jmap(nf, &[2], geom).combine(1.0, &jmap(nf, &[3], geom), 1.0);
    let a_sym = a.combine(1.0, &a.permuted(&[0, 1, 3, 2]), 1.0);
    let t2 = nf_jz_plus_ju.combine(1.0, &a_sym, 1.0);

    let t3 = nf.combine(1.0, &nf.permuted(&[0, 1, 3, 2]), -1.0);

    // g^{ij}(∇_{e_i}F)(e_j,Jz,u) + g^{ij}(∇_{e_i}F)(e_j,z,Ju) + 2 g^{ij} g((∇_{e_i}J)z,(∇_{e_j}J)u)
    let lhs4 = nf_jz_plus_ju.contract(&[(0, 1)], &[gi]).expect("rank 4");
    let rhs4 = a.contract(&[(0, 1)], &[gi]).expect("rank 4");
    let t4 = lhs4.combine(1.0, &rhs4, 2.0);

    FourResiduals {
        i: relative(t1.max_abs(), largest(&[r, nf])),
        ii: relative(t2.max_abs(), largest(&[nf, a])),
        iii: relative(t3.max_abs(), nf.max_abs()),
        iv: relative(t4.max_abs(), largest(&[&lhs4, &rhs4])),
    }
}

/// Properties of the `∇J`, `F` and `∇F` of a `W3` model.
pub fn check_prop_w3(geom: &Geometry, tol: &Tolerances) -> Result<FourResiduals> {
    require_w3(geom, tol)?;
    let nj = &geom.nabla_j;
    let f = &geom.f;
    let nf = &geom.nabla_f;
    let gi = geom.structure.g_inv();

    // (∇_X J)JY + (∇_Y J)JX + (∇_{JX} J)Y + (∇_{JY} J)X, vector valued
    let at_jy = jmap(nj, &[1], geom);
    let at_jx = jmap(nj, &[0], geom);
    let p1 = at_jy
        .combine(1.0, &at_jy.permuted(&[1, 0, 2]), 1.0)
        .combine(1.0, &at_jx, 1.0)
        .combine(1.0, &at_jx.permuted(&[1, 0, 2]), 1.0);

    let p2 = jmap(f, &[0], geom).cyclic_sum([0, 1, 2]);
    let p3 = nf.cyclic_sum([1, 2, 3]);
    let trace_first = nf.contract(&[(1, 2)], &[gi]).expect("rank 4");
    let trace_last = nf.contract(&[(2, 3)], &[gi]).expect("rank 4");

    Ok(FourResiduals {
        i: relative(p1.max_abs(), nj.max_abs()),
        ii: relative(p2.max_abs(), f.max_abs()),
        iii: relative(p3.max_abs(), nf.max_abs()),
        iv: relative(
            trace_first.max_abs().max(trace_last.max_abs()),
            nf.max_abs(),
        ),
    })
}

/// `B(x, y, z, u) = g((∇_x J)y + (∇_y J)x, (∇_z J)u + (∇_u J)z)`.
fn symmetrized_gram(geom: &Geometry) -> DenseTensor {
    let a = &geom.gram;
    // A(x,y,z,u) = g((∇_x J)z, (∇_y J)u); B expands into four A-terms
    let b1 = a.permuted(&[0, 2, 1, 3]); // g((∇_x J)y, (∇_z J)u)
    let b2 = a.permuted(&[0, 3, 1, 2]); // g((∇_x J)y, (∇_u J)z)
    let b3 = a.permuted(&[1, 2, 0, 3]); // g((∇_y J)x, (∇_z J)u)
    let b4 = a.permuted(&[1, 3, 0, 2]); // g((∇_y J)x, (∇_u J)z)
    b1.combine(1.0, &b2, 1.0)
        .combine(1.0, &b3, 1.0)
        .combine(1.0, &b4, 1.0)
}

/// The twelve curvature terms of the `W3` curvature identity, each given as
/// `(argument letter, J applied)` per slot with letters `X, Y, Z, U = 0, 1, 2, 3`.
const IDENTITY12_TERMS: [[(usize, bool); 4]; 12] = [
    [(0, false), (2, true), (1, false), (3, true)],
    [(0, false), (1, true), (3, false), (2, true)],
    [(0, false), (1, true), (2, false), (3, true)],
    [(0, false), (2, true), (3, false), (1, true)],
    [(0, false), (3, true), (1, false), (2, true)],
    [(0, false), (3, true), (2, false), (1, true)],
    [(0, true), (2, false), (1, true), (3, false)],
    [(0, true), (1, false), (3, true), (2, false)],
    [(0, true), (1, false), (2, true), (3, false)],
    [(0, true), (2, false), (3, true), (1, false)],
    [(0, true), (3, false), (1, true), (2, false)],
    [(0, true), (3, false), (2, true), (1, false)],
];

/// Twelve-term curvature sum plus the cyclic `∇J` term; vanishes on `W3`.
pub fn check_identity12(geom: &Geometry, tol: &Tolerances) -> Result<f64> {
    require_w3(geom, tol)?;
    let r = &geom.curvature.r;
    let d = geom.dim();
    let mut sum = DenseTensor::zeros(d, 4);
    for term in IDENTITY12_TERMS {
        let jslots: Vec<usize> = (0..4).filter(|&s| term[s].1).collect();
        let twisted = jmap(r, &jslots, geom);
        let perm: Vec<usize> = term.iter().map(|&(letter, _)| letter).collect();
        sum = sum.combine(1.0, &twisted.permuted(&perm), 1.0);
    }
    let b = symmetrized_gram(geom);
    let total = sum.combine(1.0, &b.cyclic_sum([0, 1, 2]), 1.0);
    Ok(relative(total.max_abs(), largest(&[r, &b])))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaResiduals {
    pub i: f64,
    pub ii: f64,
}

/// Ricci-type consequences of the `W3` curvature identity.
pub fn check_lemma(geom: &Geometry, tol: &Tolerances) -> Result<LemmaResiduals> {
    require_w3(geom, tol)?;
    let c = &geom.curvature;
    let gi = geom.structure.g_inv();
    // ρ*(Jy,z) + ρ*(y,Jz) + ρ(y,z) − ρ(Jy,Jz) + g^{ij} B(e_i, y, e_j, z)
    let b = symmetrized_gram(geom);
    let b_trace = b.contract(&[(0, 2)], &[gi]).expect("rank 4");
    let lhs = jmap(&c.rho_star, &[0], geom)
        .combine(1.0, &jmap(&c.rho_star, &[1], geom), 1.0)
        .combine(1.0, &c.rho, 1.0)
        .combine(1.0, &jmap(&c.rho, &[0, 1], geom), -1.0)
        .combine(1.0, &b_trace, 1.0);
    let i = relative(lhs.max_abs(), largest(&[&c.rho, &c.rho_star, &b_trace]));

    // ‖∇J‖ + 2 g^{ij} g^{kl} g((∇_{e_i}J)e_k, (∇_{e_l}J)e_j)
    let crossed = geom
        .gram
        .contract(&[(0, 3), (1, 2)], &[gi, gi])
        .expect("rank 4")
        .scalar();
    let ii = relative((c.snorm + 2.0 * crossed).abs(), c.snorm.abs().max(crossed.abs()));
    Ok(LemmaResiduals { i, ii })
}

/// `|‖∇J‖ + 2(τ + τ**)|` on a `W3` model.
pub fn check_norm_theorem(geom: &Geometry, tol: &Tolerances) -> Result<f64> {
    require_w3(geom, tol)?;
    let c = &geom.curvature;
    let scale = c.snorm.abs().max(c.tau.abs()).max(c.tau_star2.abs());
    Ok(relative((c.snorm + 2.0 * (c.tau + c.tau_star2)).abs(), scale))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KahlerCurvatureCheck {
    /// `max |R(X,Y,JZ,JU) + R(X,Y,Z,U)|`, relative.
    pub residual: f64,
    pub has_kahler_curvature: bool,
    /// `max |g((∇_x J)z,(∇_y J)u) + g((∇_x J)u,(∇_y J)z)|`, relative.
    pub polarized_residual: f64,
    /// Relative `|‖∇J‖|`.
    pub snorm: f64,
    /// True unless a `W3` model with Kähler curvature has a nonzero square norm
    /// or violates the polarized identity.
    pub consistent: bool,
}

/// Kähler property of `R` and its consequence `‖∇J‖ = 0` on `W3` models.
pub fn check_kahler_curvature_property(geom: &Geometry, tol: &Tolerances) -> KahlerCurvatureCheck {
    let r = &geom.curvature.r;
    let residual = relative(
        jmap(r, &[2, 3], geom).combine(1.0, r, 1.0).max_abs(),
        r.max_abs(),
    );
    let a = &geom.gram;
    let polarized_residual = relative(
        a.combine(1.0, &a.permuted(&[0, 1, 3, 2]), 1.0).max_abs(),
        a.max_abs(),
    );
    let snorm = relative(geom.curvature.snorm.abs(), a.max_abs());
    let has_kahler_curvature = residual <= tol.check;
    let applies = has_kahler_curvature && geom.classes.is_w3 && geom.dim() >= 4;
    let consistent = !applies || (snorm <= tol.check && polarized_residual <= tol.check);
    KahlerCurvatureCheck {
        residual,
        has_kahler_curvature,
        polarized_residual,
        snorm,
        consistent,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Theorem21Outcome {
    pub pairs: usize,
    pub violations: usize,
    /// Pairs where some quantity sat between its tolerance and the band edge.
    pub ambiguous: usize,
}

/// Width of the gray zone between "zero" and "nonzero".
pub const BAND_FACTOR: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Zeroness {
    Zero,
    NonZero,
    Ambiguous,
}

fn zeroness(value: f64, tol: f64) -> Zeroness {
    if value <= tol {
        Zeroness::Zero
    } else if value > BAND_FACTOR * tol {
        Zeroness::NonZero
    } else {
        Zeroness::Ambiguous
    }
}

/// Tests `R(x,Jx,y,Jy) = 0 ⟺ h(x,y) = 0 ∨ {x,Jx} strongly isotropic ∨ {y,Jy} strongly isotropic`
/// on each pair. `tol_r` bounds `|R(x,Jx,y,Jy)| / (|x|²|y|² max(1, max|R|))`,
/// `tol_h` bounds `|h| / max(1, max|R|)`, and the isotropy test uses `tol.isotropic`
/// on `g(x,x)² + g(x,Jx)²` relative to `|x|⁴ max(1, max|g|)²`.
pub fn check_theorem21(
    geom: &Geometry,
    pairs: &[(DVector<f64>, DVector<f64>)],
    tol_r: f64,
    tol_h: f64,
    tol: &Tolerances,
) -> Result<Theorem21Outcome> {
    require_w3(geom, tol)?;
    let s = &geom.structure;
    let r_scale = geom.curvature.r.max_abs().max(1.0);
    let g_scale = s.g().amax().max(1.0);
    let iso_tol = tol.isotropic * tol.isotropic;
    let mut out = Theorem21Outcome {
        pairs: pairs.len(),
        violations: 0,
        ambiguous: 0,
    };
    for (x, y) in pairs {
        let (nx, ny) = (x.norm_squared(), y.norm_squared());
        let q = geom.holomorphic_quartic(x, y);
        let lhs = zeroness(q.abs() / (nx * ny * r_scale), tol_r);
        let dx = plane_norm_squared(s, x);
        let dy = plane_norm_squared(s, y);
        let x_iso = zeroness(dx / (nx * nx * g_scale * g_scale), iso_tol);
        let y_iso = zeroness(dy / (ny * ny * g_scale * g_scale), iso_tol);
        let h = if x_iso == Zeroness::NonZero && y_iso == Zeroness::NonZero {
            zeroness((q / (dx.sqrt() * dy.sqrt())).abs() / r_scale, tol_h)
        } else {
            Zeroness::Ambiguous
        };
        let rhs_true = x_iso == Zeroness::Zero || y_iso == Zeroness::Zero || h == Zeroness::Zero;
        let rhs_false =
            x_iso == Zeroness::NonZero && y_iso == Zeroness::NonZero && h == Zeroness::NonZero;
        let violated = (lhs == Zeroness::Zero && rhs_false) || (lhs == Zeroness::NonZero && rhs_true);
        if violated {
            out.violations += 1;
        } else if lhs == Zeroness::Ambiguous || !(rhs_true || rhs_false) {
            out.ambiguous += 1;
        }
    }
    Ok(out)
}

/// Pairs of random vectors with entries uniform in `[-1, 1]`.
pub fn random_pairs(dim: usize, count: usize, seed: u64) -> Vec<(DVector<f64>, DVector<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let x = DVector::from_fn(dim, |_, _| rng.random_range(-1.0..=1.0));
            let y = DVector::from_fn(dim, |_, _| rng.random_range(-1.0..=1.0));
            (x, y)
        })
        .collect()
}

/// Pairs whose first vector lies on the cone `g(x,x) = g(x,Jx) = 0`.
pub fn null_cone_pairs(geom: &Geometry, count: usize, seed: u64) -> Vec<(DVector<f64>, DVector<f64>)> {
    let d = geom.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let x0 = DVector::from_fn(d, |_, _| rng.random_range(-1.0..=1.0));
        let w = DVector::from_fn(d, |_, _| rng.random_range(-1.0..=1.0));
        let y = DVector::from_fn(d, |_, _| rng.random_range(-1.0..=1.0));
        if let Some(x) = strongly_isotropic_vector(&geom.structure, &x0, &w) {
            if x.norm() > 1e-3 {
                out.push((x, y));
            }
        }
    }
    out
}

/// Largest `|R(x,Jx,y,Jy)| / (|x|²|y|² max(1, max|R|))` over the given pairs.
pub fn max_relative_quartic(geom: &Geometry, pairs: &[(DVector<f64>, DVector<f64>)]) -> f64 {
    let r_scale = geom.curvature.r.max_abs().max(1.0);
    pairs.iter().fold(0.0, |m, (x, y)| {
        let q = geom.holomorphic_quartic(x, y);
        m.max(q.abs() / (x.norm_squared() * y.norm_squared() * r_scale))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Theorem22Outcome {
    /// `max |R(x,Jx,y,Jy)|` over `x, y ∈ {e_a} ∪ {e_a + e_b}`.
    pub max_polarized: f64,
    pub snorm: f64,
    /// `R(x,Jx,y,Jy)` vanishes for all `x, y`.
    pub antecedent: bool,
    pub consistent: bool,
}

/// The frame vectors and their pairwise sums; a quadratic form in `x` is zero
/// iff it vanishes on this set.
pub fn polarization_vectors(dim: usize) -> Vec<DVector<f64>> {
    let mut out: Vec<DVector<f64>> = (0..dim)
        .map(|a| DVector::from_fn(dim, |i, _| if i == a { 1.0 } else { 0.0 }))
        .collect();
    for a in 0..dim {
        for b in a + 1..dim {
            out.push(DVector::from_fn(dim, |i, _| if i == a || i == b { 1.0 } else { 0.0 }));
        }
    }
    out
}

/// `R(x,Jx,y,Jy) = 0` for all `x, y` implies `‖∇J‖ = 0` on `W3`; absolute threshold `tol.check`.
pub fn check_theorem22(geom: &Geometry, tol: &Tolerances) -> Result<Theorem22Outcome> {
    require_w3(geom, tol)?;
    let vs = polarization_vectors(geom.dim());
    let mut max_polarized: f64 = 0.0;
    for x in &vs {
        for y in &vs {
            max_polarized = max_polarized.max(geom.holomorphic_quartic(x, y).abs());
        }
    }
    let snorm = geom.curvature.snorm;
    let antecedent = max_polarized <= tol.check;
    let consistent = !antecedent || snorm.abs() <= tol.check;
    Ok(Theorem22Outcome {
        max_polarized,
        snorm,
        antecedent,
        consistent,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub residual: Option<f64>,
    pub tolerance: f64,
    pub status: CheckStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckResult {
    fn residual(name: &str, residual: f64, tolerance: f64) -> Self {
        CheckResult {
            name: name.into(),
            residual: Some(residual),
            tolerance,
            status: if residual <= tolerance {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
            note: None,
        }
    }

    fn skipped(name: &str, tolerance: f64, why: &str) -> Self {
        CheckResult {
            name: name.into(),
            residual: None,
            tolerance,
            status: CheckStatus::Skipped,
            note: Some(why.into()),
        }
    }

    fn verdict(name: &str, ok: bool, tolerance: f64, note: String) -> Self {
        CheckResult {
            name: name.into(),
            residual: None,
            tolerance,
            status: if ok { CheckStatus::Pass } else { CheckStatus::Fail },
            note: Some(note),
        }
    }

    pub fn passed(&self) -> bool {
        self.status != CheckStatus::Fail
    }
}

/// Residual table of every applicable identity, in a fixed order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub tolerance: f64,
    pub samples: usize,
    pub sample_seed: u64,
    pub checks: Vec<CheckResult>,
    pub theorem21_violations: Option<usize>,
    pub theorem22_consistent: Option<bool>,
    /// Largest relative `|R(x,Jx,y,Jy)|` with `x` on the strongly isotropic cone.
    pub null_cone_max_quartic: Option<f64>,
    pub all_passed: bool,
}

impl VerificationReport {
    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Torsion-freeness and metricity of the connection, relative to `max |Γ|`.
pub fn connection_checks(geom: &Geometry, tol: &Tolerances) -> Vec<CheckResult> {
    let t = tol.check;
    let conn_scale = geom.connection.coefficients().max_abs();
    vec![
        CheckResult::residual(
            "torsion",
            relative(torsion_residual(&geom.connection, &geom.model), conn_scale),
            t,
        ),
        CheckResult::residual(
            "metricity",
            relative(metricity_residual(&geom.connection, geom.structure.g()), conn_scale),
            t,
        ),
    ]
}

/// `‖∇J‖ = −2(τ + τ**)` as a report row; skipped outside `W3`.
pub fn norm_theorem_row(geom: &Geometry, tol: &Tolerances) -> CheckResult {
    match check_norm_theorem(geom, tol) {
        Ok(r) => CheckResult::residual("norm_theorem", r, tol.check),
        Err(_) => CheckResult::skipped("norm_theorem", tol.check, "model is not in W3"),
    }
}

/// Runs every check on `geom`. Checks that require `W3` are skipped on other models.
pub fn verify(geom: &Geometry, tol: &Tolerances, samples: usize, seed: u64) -> VerificationReport {
    let t = tol.check;
    let mut checks = connection_checks(geom, tol);
    let f = &geom.f;
    let f_sym = f
        .max_abs_diff(&f.permuted(&[0, 2, 1]))
        .max(f.max_abs_diff(&jmap(f, &[1, 2], geom)));
    checks.push(CheckResult::residual("f_symmetries", relative(f_sym, f.max_abs()), t));

    let sym = curvature_symmetry(&geom.curvature);
    checks.push(CheckResult::residual("curvature_first_pair", sym.first_pair, t));
    checks.push(CheckResult::residual("curvature_second_pair", sym.second_pair, t));
    checks.push(CheckResult::residual("curvature_pair_exchange", sym.pair_exchange, t));
    checks.push(CheckResult::residual("first_bianchi", sym.bianchi, t));
    checks.push(CheckResult::residual("rho_star_symmetry", sym.rho_star_symmetry, t));

    let t1 = check_theorem1(geom);
    checks.push(CheckResult::residual("theorem1_i", t1.i, t));
    checks.push(CheckResult::residual("theorem1_ii", t1.ii, t));
    checks.push(CheckResult::residual("theorem1_iii", t1.iii, t));
    checks.push(CheckResult::residual("theorem1_iv", t1.iv, t));

    let is_w3 = geom.classes.is_w3;
    let skip_note = "model is not in W3";
    let skipped_names = [
        "prop_w3_i",
        "prop_w3_ii",
        "prop_w3_iii",
        "prop_w3_iv",
        "identity12",
        "lemma_i",
        "lemma_ii",
        "norm_theorem",
    ];
    match (
        check_prop_w3(geom, tol),
        check_identity12(geom, tol),
        check_lemma(geom, tol),
        check_norm_theorem(geom, tol),
    ) {
        (Ok(p), Ok(id12), Ok(lemma), Ok(norm)) => {
            checks.push(CheckResult::residual("prop_w3_i", p.i, t));
            checks.push(CheckResult::residual("prop_w3_ii", p.ii, t));
            checks.push(CheckResult::residual("prop_w3_iii", p.iii, t));
            checks.push(CheckResult::residual("prop_w3_iv", p.iv, t));
            checks.push(CheckResult::residual("identity12", id12, t));
            checks.push(CheckResult::residual("lemma_i", lemma.i, t));
            checks.push(CheckResult::residual("lemma_ii", lemma.ii, t));
            checks.push(CheckResult::residual("norm_theorem", norm, t));
        }
        _ => {
            for name in skipped_names {
                checks.push(CheckResult::skipped(name, t, skip_note));
            }
        }
    }

    let kahler = check_kahler_curvature_property(geom, tol);
    checks.push(CheckResult::verdict(
        "kahler_property",
        kahler.consistent,
        t,
        format!(
            "R Kähler residual {:e}, polarized residual {:e}, relative snorm {:e}",
            kahler.residual, kahler.polarized_residual, kahler.snorm
        ),
    ));

    let mut theorem21_violations = None;
    let mut theorem22_consistent = None;
    let mut null_cone_max_quartic = None;
    if is_w3 && geom.dim() >= 4 {
        let pairs = random_pairs(geom.dim(), samples, seed);
        let out = check_theorem21(geom, &pairs, t, t, tol).expect("W3 checked");
        theorem21_violations = Some(out.violations);
        checks.push(CheckResult::verdict(
            "theorem21",
            out.violations == 0,
            t,
            format!(
                "{} violations, {} ambiguous over {} pairs",
                out.violations, out.ambiguous, out.pairs
            ),
        ));
        let t22 = check_theorem22(geom, tol).expect("W3 checked");
        theorem22_consistent = Some(t22.consistent);
        checks.push(CheckResult::verdict(
            "theorem22",
            t22.consistent,
            t,
            format!(
                "max polarized |R(x,Jx,y,Jy)| {:e}, snorm {:e}",
                t22.max_polarized, t22.snorm
            ),
        ));
        let cone = null_cone_pairs(geom, samples.min(100), seed ^ 0x9e37_79b9_7f4a_7c15);
        null_cone_max_quartic = Some(max_relative_quartic(geom, &cone));
    } else {
        checks.push(CheckResult::skipped("theorem21", t, skip_note));
        checks.push(CheckResult::skipped("theorem22", t, skip_note));
    }

    let all_passed = checks.iter().all(CheckResult::passed);
    VerificationReport {
        tolerance: t,
        samples,
        sample_seed: seed,
        checks,
        theorem21_violations,
        theorem22_consistent,
        null_cone_max_quartic,
        all_passed,
    }
}
