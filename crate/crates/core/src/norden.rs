//! Norden structures, the fundamental tensor `F`, the Lie form and the basic classes.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::Connection;
use crate::tensor::{DenseTensor, MetricMatrix};
use crate::tolerance::Tolerances;

/// Almost complex structure `J` with a compatible Norden metric `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct NordenStructure {
    j: DMatrix<f64>,
    metric: MetricMatrix,
}

impl NordenStructure {
    pub fn dim(&self) -> usize {
        self.j.nrows()
    }

    pub fn n(&self) -> usize {
        self.dim() / 2
    }

    pub fn j(&self) -> &DMatrix<f64> {
        &self.j
    }

    pub fn metric(&self) -> &MetricMatrix {
        &self.metric
    }

    pub fn g(&self) -> &DMatrix<f64> {
        self.metric.entries()
    }

    pub fn g_inv(&self) -> &DMatrix<f64> {
        self.metric.inverse()
    }

    /// `g(x, y)`.
    pub fn inner(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        (x.transpose() * self.g() * y)[(0, 0)]
    }
}

/// Checks `J² = −I`, `g(JX, JY) = −g(X, Y)` and signature `(n, n)`.
pub fn validate_norden(j: DMatrix<f64>, g: DMatrix<f64>, tol: &Tolerances) -> Result<NordenStructure> {
    if !j.is_square() || !g.is_square() || j.nrows() != g.nrows() {
        return Err(Error::ShapeMismatch(format!(
            "J is {}x{}, g is {}x{}",
            j.nrows(),
            j.ncols(),
            g.nrows(),
            g.ncols()
        )));
    }
    crate::tensor::check_dim(j.nrows())?;
    let d = j.nrows();
    let id = DMatrix::<f64>::identity(d, d);
    let r = (&j * &j + &id).amax();
    if r > tol.linear {
        return Err(Error::NotAlmostComplex(r));
    }
    let r = (j.transpose() * &g * &j + &g).amax();
    if r > tol.linear {
        return Err(Error::NotNordenCompatible(r));
    }
    let metric = MetricMatrix::new(g, tol)?;
    let (pos, neg) = metric.signature(tol)?;
    if pos != d / 2 || neg != d / 2 {
        return Err(Error::WrongSignature {
            pos,
            neg,
            expected: d / 2,
        });
    }
    Ok(NordenStructure { j, metric })
}

/// `g̃(X, Y) = g(X, JY)`, returned as the matrix `g J`.
pub fn associated_metric(s: &NordenStructure) -> DMatrix<f64> {
    s.g() * s.j()
}

/// `nj[i, j, k] = ((∇_{e_i} J) e_j)^k = Γ^k_{im} J^m_j − J^k_m Γ^m_{ij}`.
pub fn nabla_j(conn: &Connection, s: &NordenStructure) -> DenseTensor {
    let d = s.dim();
    let j = s.j();
    DenseTensor::from_fn(d, 3, |idx| {
        let (i, jj, k) = (idx[0], idx[1], idx[2]);
        (0..d)
            .map(|m| conn.gamma(i, m, k) * j[(m, jj)] - j[(k, m)] * conn.gamma(i, jj, m))
            .sum()
    })
}

/// `F(e_i, e_j, e_k) = g((∇_{e_i} J) e_j, e_k)`.
pub fn f_tensor(conn: &Connection, s: &NordenStructure) -> DenseTensor {
    f_from_nabla_j(&nabla_j(conn, s), s.g())
}

pub(crate) fn f_from_nabla_j(nj: &DenseTensor, g: &DMatrix<f64>) -> DenseTensor {
    let d = nj.dim();
    DenseTensor::from_fn(d, 3, |idx| {
        (0..d)
            .map(|l| g[(idx[2], l)] * nj.get(&[idx[0], idx[1], l]))
            .sum()
    })
}

/// `θ(e_k) = g^{ij} F(e_i, e_j, e_k)`.
pub fn lie_form(f: &DenseTensor, g_inv: &DMatrix<f64>) -> DenseTensor {
    let d = f.dim();
    DenseTensor::from_fn(d, 1, |idx| {
        let k = idx[0];
        let mut s = 0.0;
        for i in 0..d {
            for j in 0..d {
                s += g_inv[(i, j)] * f.get(&[i, j, k]);
            }
        }
        s
    })
}

/// Coefficient in front of the brace of the `W1` condition.
///
/// The `g`-trace of the brace over its first two arguments equals `2n θ`,
/// so `1/(2n)` is the value for which a `W1` tensor reproduces its own Lie form.
pub fn w1_coefficient(n: usize) -> f64 {
    1.0 / (2 * n) as f64
}

/// `c {g(x,y)θ(z) + g(x,z)θ(y) + g(x,Jy)θ(Jz) + g(x,Jz)θ(Jy)}` for a covector `θ`.
pub fn w1_projection(s: &NordenStructure, theta: &DenseTensor, coefficient: f64) -> DenseTensor {
    let d = s.dim();
    let g = s.g();
    let j = s.j();
    let gj = g * j;
    let theta_j: Vec<f64> = (0..d)
        .map(|k| (0..d).map(|m| theta.get(&[m]) * j[(m, k)]).sum())
        .collect();
    DenseTensor::from_fn(d, 3, |idx| {
        let (x, y, z) = (idx[0], idx[1], idx[2]);
        coefficient
            * (g[(x, y)] * theta.get(&[z])
                + g[(x, z)] * theta.get(&[y])
                + gj[(x, y)] * theta_j[z]
                + gj[(x, z)] * theta_j[y])
    })
}

/// A `W1` fundamental tensor built from a chosen Lie form.
pub fn w1_tensor(s: &NordenStructure, theta: &DenseTensor) -> DenseTensor {
    w1_projection(s, theta, w1_coefficient(s.n()))
}

/// Residuals and memberships for `W0` and the three basic classes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMembership {
    pub is_w0: bool,
    pub is_w1: bool,
    pub is_w2: bool,
    pub is_w3: bool,
    pub residual_w0: f64,
    pub residual_w1: f64,
    pub residual_w2: f64,
    pub residual_w3: f64,
    pub theta_norm: f64,
    pub tolerance: f64,
}

pub fn classify(f: &DenseTensor, s: &NordenStructure, eps_class: f64) -> ClassMembership {
    let theta = lie_form(f, s.g_inv());
    let theta_norm = theta.max_abs();
    let residual_w0 = f.max_abs();
    let residual_w1 = f.max_abs_diff(&w1_tensor(s, &theta));
    let f_jz = f
        .with_slot_mapped(2, s.j())
        .expect("rank-3 tensor has slot 2");
    let residual_w2 = f_jz.cyclic_sum([0, 1, 2]).max_abs().max(theta_norm);
    let residual_w3 = f.cyclic_sum([0, 1, 2]).max_abs();
    ClassMembership {
        is_w0: residual_w0 <= eps_class,
        is_w1: residual_w1 <= eps_class,
        is_w2: residual_w2 <= eps_class,
        is_w3: residual_w3 <= eps_class,
        residual_w0,
        residual_w1,
        residual_w2,
        residual_w3,
        theta_norm,
        tolerance: eps_class,
    }
}

/// `(∇_{e_i} F)(e_j, e_k, e_l) = −F(∇_{e_i}e_j, e_k, e_l) − F(e_j, ∇_{e_i}e_k, e_l) − F(e_j, e_k, ∇_{e_i}e_l)`.
pub fn nabla_f(conn: &Connection, f: &DenseTensor) -> DenseTensor {
    let d = f.dim();
    DenseTensor::from_fn(d, 4, |idx| {
        let (i, j, k, l) = (idx[0], idx[1], idx[2], idx[3]);
        -(0..d)
            .map(|m| {
                conn.gamma(i, j, m) * f.get(&[m, k, l])
                    + conn.gamma(i, k, m) * f.get(&[j, m, l])
                    + conn.gamma(i, l, m) * f.get(&[j, k, m])
            })
            .sum::<f64>()
    })
}

/// Moves `x0` along the holomorphic plane of `w` onto the cone `g(x,x) = g(x,Jx) = 0`.
///
/// `G(x, y) = g(x, y) − i g(x, Jy)` is complex bilinear when `J` acts as `i`, so
/// `x = x0 + (a + bJ) w` is strongly isotropic iff `λ = a + ib` solves
/// `G(w,w) λ² + 2 G(x0,w) λ + G(x0,x0) = 0`. Returns `None` when `G(w, w)` vanishes.
pub fn strongly_isotropic_vector(
    s: &NordenStructure,
    x0: &DVector<f64>,
    w: &DVector<f64>,
) -> Option<DVector<f64>> {
    use num_complex::Complex64;
    let j = s.j();
    let big_g = |x: &DVector<f64>, y: &DVector<f64>| Complex64::new(s.inner(x, y), -s.inner(x, &(j * y)));
    let a = big_g(w, w);
    if a.norm() <= 1e-12 * w.norm_squared().max(1e-300) {
        return None;
    }
    let b = big_g(x0, w) * 2.0;
    let c = big_g(x0, x0);
    let disc = (b * b - a * c * 4.0).sqrt();
    // the root with the smaller modulus keeps x close to x0
    let r1 = (-b + disc) / (a * 2.0);
    let r2 = (-b - disc) / (a * 2.0);
    let lambda = if r1.norm() <= r2.norm() { r1 } else { r2 };
    Some(x0 + w * lambda.re + (j * w) * lambda.im)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::canonical_norden;
    use crate::models::{levi_civita, LieAlgebraModel};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn canonical_pair_is_valid() {
        let s = canonical_norden(4).unwrap();
        validate_norden(s.j().clone(), s.g().clone(), &tol()).unwrap();
    }

    #[test]
    fn identity_j_is_not_almost_complex() {
        let s = canonical_norden(4).unwrap();
        let err = validate_norden(DMatrix::identity(4, 4), s.g().clone(), &tol()).unwrap_err();
        assert!(matches!(err, Error::NotAlmostComplex(_)));
    }

    #[test]
    fn riemannian_metric_is_not_norden() {
        let s = canonical_norden(4).unwrap();
        let err = validate_norden(s.j().clone(), DMatrix::identity(4, 4), &tol()).unwrap_err();
        assert!(matches!(err, Error::NotNordenCompatible(_)));
    }

    #[test]
    fn associated_metric_of_canonical_pair() {
        let s = canonical_norden(4).unwrap();
        let gt = associated_metric(&s);
        // g̃(e_0, e_2) = g(e_0, J e_2) = g(e_0, −e_0) = −1
        assert_eq!(gt[(0, 2)], -1.0);
        assert_eq!(gt[(2, 0)], -1.0);
        for (a, b) in [(0, 0), (0, 1), (1, 1), (2, 2), (2, 3), (3, 3)] {
            assert_eq!(gt[(a, b)], 0.0);
        }
        validate_norden(s.j().clone(), gt, &tol()).unwrap();
    }

    #[test]
    fn flat_model_has_vanishing_f() {
        let s = canonical_norden(4).unwrap();
        let conn = levi_civita(&LieAlgebraModel::abelian(4).unwrap(), s.metric()).unwrap();
        let f = f_tensor(&conn, &s);
        assert_eq!(f.max_abs(), 0.0);
        assert_eq!(nabla_j(&conn, &s).max_abs(), 0.0);
        assert_eq!(lie_form(&f, s.g_inv()).max_abs(), 0.0);
        assert_eq!(nabla_f(&conn, &f).max_abs(), 0.0);
        let c = classify(&f, &s, 1e-8);
        assert!(c.is_w0 && c.is_w1 && c.is_w2 && c.is_w3);
        assert_eq!(c.residual_w0 + c.residual_w1 + c.residual_w2 + c.residual_w3, 0.0);
    }

    #[test]
    fn w1_fixture_recovers_its_lie_form() {
        let s = canonical_norden(6).unwrap();
        let theta = DenseTensor::from_components(6, 1, vec![0.3, -1.2, 0.7, 0.05, -0.4, 0.9]).unwrap();
        let f = w1_tensor(&s, &theta);
        assert!(lie_form(&f, s.g_inv()).max_abs_diff(&theta) <= 1e-12);
        let c = classify(&f, &s, 1e-8);
        assert!(c.is_w1);
        assert!(!c.is_w3);
        assert!(!c.is_w2);
        assert!(!c.is_w0);
    }

    #[test]
    fn w1_fixture_has_f_symmetries() {
        let s = canonical_norden(4).unwrap();
        let theta = DenseTensor::from_components(4, 1, vec![1.0, 2.0, -0.5, 0.25]).unwrap();
        let f = w1_tensor(&s, &theta);
        assert!(f.max_abs_diff(&f.permuted(&[0, 2, 1])) <= 1e-14);
        let fjj = f.with_slots_mapped(&[1, 2], s.j()).unwrap();
        assert!(f.max_abs_diff(&fjj) <= 1e-14);
    }

    #[test]
    fn null_cone_vector_is_strongly_isotropic() {
        let s = canonical_norden(6).unwrap();
        let x0 = DVector::from_vec(vec![0.3, -0.2, 0.9, 0.1, 0.5, -0.7]);
        let w = DVector::from_vec(vec![1.0, 0.4, -0.3, 0.2, 0.0, 0.6]);
        let x = strongly_isotropic_vector(&s, &x0, &w).unwrap();
        assert!(s.inner(&x, &x).abs() <= 1e-12);
        assert!(s.inner(&x, &(s.j() * &x)).abs() <= 1e-12);
        assert!(x.norm() > 0.1);
    }

    #[test]
    fn classify_is_monotone_in_tolerance() {
        let s = canonical_norden(4).unwrap();
        let theta = DenseTensor::from_components(4, 1, vec![1e-9, 0.0, 0.0, 0.0]).unwrap();
        let f = w1_tensor(&s, &theta);
        let tight = classify(&f, &s, 1e-12);
        let loose = classify(&f, &s, 1e-6);
        for (a, b) in [
            (tight.is_w0, loose.is_w0),
            (tight.is_w1, loose.is_w1),
            (tight.is_w2, loose.is_w2),
            (tight.is_w3, loose.is_w3),
        ] {
            assert!(!a || b);
        }
        assert!(!tight.is_w0 && loose.is_w0);
    }
}
