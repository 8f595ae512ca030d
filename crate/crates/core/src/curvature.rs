//! Curvature of the Levi-Civita connection and the scalar invariants.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{levi_civita, Connection, LieAlgebraModel};
use crate::norden::{self, ClassMembership, NordenStructure};
use crate::tensor::DenseTensor;
use crate::tolerance::Tolerances;

/// `R(e_i, e_j, e_k, e_l) = g(R(e_i, e_j) e_k, e_l)` with
/// `R(X, Y)Z = ∇_X ∇_Y Z − ∇_Y ∇_X Z − ∇_{[X, Y]} Z` in the constant frame.
pub fn curvature_tensor(conn: &Connection, model: &LieAlgebraModel, g: &DMatrix<f64>) -> DenseTensor {
    let d = conn.dim();
    // R^l_{ijk} = Γ^m_{jk} Γ^l_{im} − Γ^m_{ik} Γ^l_{jm} − C^m_{ij} Γ^l_{mk}
    let upper = DenseTensor::from_fn(d, 4, |idx| {
        let (i, j, k, l) = (idx[0], idx[1], idx[2], idx[3]);
        (0..d)
            .map(|m| {
                conn.gamma(j, k, m) * conn.gamma(i, m, l) - conn.gamma(i, k, m) * conn.gamma(j, m, l)
                    - model.c(i, j, m) * conn.gamma(m, k, l)
            })
            .sum()
    });
    DenseTensor::from_fn(d, 4, |idx| {
        (0..d)
            .map(|m| upper.get(&[idx[0], idx[1], idx[2], m]) * g[(m, idx[3])])
            .sum()
    })
}

/// Ricci tensor, its associated tensor and the two scalar traces.
#[derive(Debug, Clone, PartialEq)]
pub struct RicciData {
    /// `ρ(y, z) = g^{ij} R(e_i, y, z, e_j)`.
    pub rho: DenseTensor,
    /// `ρ*(y, z) = g^{ij} R(e_i, y, z, J e_j)`.
    pub rho_star: DenseTensor,
    /// `τ = g^{ij} ρ(e_i, e_j)`.
    pub tau: f64,
    /// `τ** = g^{ij} g^{kl} R(e_i, e_k, J e_l, J e_j)`.
    pub tau_star2: f64,
}

pub fn ricci_and_scalars(r: &DenseTensor, s: &NordenStructure) -> RicciData {
    let gi = s.g_inv();
    let rho = r.contract(&[(0, 3)], &[gi]).expect("rank-4 curvature");
    let r_j3 = r.with_slot_mapped(3, s.j()).expect("rank-4 curvature");
    let rho_star = r_j3.contract(&[(0, 3)], &[gi]).expect("rank-4 curvature");
    let tau = rho.contract(&[(0, 1)], &[gi]).expect("rank-2 ricci").scalar();
    let tau_star2 = r
        .with_slots_mapped(&[2, 3], s.j())
        .and_then(|t| t.contract(&[(0, 3), (1, 2)], &[gi, gi]))
        .expect("rank-4 curvature")
        .scalar();
    RicciData {
        rho,
        rho_star,
        tau,
        tau_star2,
    }
}

/// `A(x, y, z, u) = g((∇_x J) z, (∇_y J) u)` on frame vectors.
pub fn nabla_j_gram(nj: &DenseTensor, g: &DMatrix<f64>) -> DenseTensor {
    let f = norden::f_from_nabla_j(nj, g);
    let d = nj.dim();
    DenseTensor::from_fn(d, 4, |idx| {
        let (x, y, z, u) = (idx[0], idx[1], idx[2], idx[3]);
        (0..d).map(|m| nj.get(&[x, z, m]) * f.get(&[y, u, m])).sum()
    })
}

/// `‖∇J‖ = g^{ij} g^{kl} g((∇_{e_i} J) e_k, (∇_{e_j} J) e_l)`; indefinite in general.
pub fn square_norm_nabla_j(nj: &DenseTensor, g: &DMatrix<f64>, g_inv: &DMatrix<f64>) -> f64 {
    nabla_j_gram(nj, g)
        .contract(&[(0, 1), (2, 3)], &[g_inv, g_inv])
        .expect("rank-4 gram")
        .scalar()
}

/// `(is_kahler, is_isotropic_kahler)`: `∇J = 0`, resp. `‖∇J‖ = 0`, within `eps`.
pub fn isotropic_kahler_flags(nj: &DenseTensor, snorm: f64, eps: f64) -> (bool, bool) {
    (nj.max_abs() <= eps, snorm.abs() <= eps)
}

/// `R(x, Jx, y, Jy)`.
pub fn holomorphic_quartic(r: &DenseTensor, j: &DMatrix<f64>, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    let jx = j * x;
    let jy = j * y;
    let d = r.dim();
    let c = r.components();
    let mut total = 0.0;
    let mut o = 0;
    for a in 0..d {
        for b in 0..d {
            let ab = x[a] * jx[b];
            for cc in 0..d {
                let abc = ab * y[cc];
                if abc == 0.0 {
                    o += d;
                    continue;
                }
                for e in 0..d {
                    total += abc * jy[e] * c[o];
                    o += 1;
                }
            }
        }
    }
    total
}

/// `g(x, x)² + g(x, Jx)²`; zero exactly on strongly isotropic holomorphic planes.
pub fn plane_norm_squared(s: &NordenStructure, x: &DVector<f64>) -> f64 {
    let gxx = s.inner(x, x);
    let gxjx = s.inner(x, &(s.j() * x));
    gxx * gxx + gxjx * gxjx
}

/// Holomorphic bisectional curvature
/// `h(x, y) = −R(x, Jx, y, Jy) / (√(g(x,x)² + g(x,Jx)²) √(g(y,y)² + g(y,Jy)²))`.
pub fn bisectional_curvature(
    r: &DenseTensor,
    s: &NordenStructure,
    x: &DVector<f64>,
    y: &DVector<f64>,
    eps_iso: f64,
) -> Result<f64> {
    let dx = plane_norm_squared(s, x);
    let dy = plane_norm_squared(s, y);
    let guard = eps_iso * eps_iso;
    if dx <= guard {
        return Err(Error::IsotropicPlane(dx));
    }
    if dy <= guard {
        return Err(Error::IsotropicPlane(dy));
    }
    Ok(-holomorphic_quartic(r, s.j(), x, y) / (dx.sqrt() * dy.sqrt()))
}

/// Curvature tensor together with its traces and the square norm of `∇J`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureData {
    pub r: DenseTensor,
    pub rho: DenseTensor,
    pub rho_star: DenseTensor,
    pub tau: f64,
    pub tau_star2: f64,
    pub snorm: f64,
}

/// Scalar summary of a model, as written to reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Invariants {
    pub tau: f64,
    pub tau_star2: f64,
    pub snorm: f64,
    pub max_abs_nabla_j: f64,
    pub is_kahler: bool,
    pub is_isotropic_kahler: bool,
}

/// Everything derived from a homogeneous model: connection, `∇J`, `F`, `∇F`,
/// curvature and class membership.
#[derive(Debug, Clone)]
pub struct Geometry {
    pub model: LieAlgebraModel,
    pub structure: NordenStructure,
    pub connection: Connection,
    pub nabla_j: DenseTensor,
    pub f: DenseTensor,
    pub nabla_f: DenseTensor,
    /// `g((∇_x J) z, (∇_y J) u)`.
    pub gram: DenseTensor,
    pub curvature: CurvatureData,
    pub classes: ClassMembership,
}

impl Geometry {
    pub fn new(model: LieAlgebraModel, structure: NordenStructure, tol: &Tolerances) -> Result<Self> {
        let conn = levi_civita(&model, structure.metric())?;
        Geometry::with_connection(model, structure, conn, tol)
    }

    /// Builds the geometry from an arbitrary connection. Only the Levi-Civita
    /// connection satisfies the identities; other inputs serve as negative controls.
    pub fn with_connection(
        model: LieAlgebraModel,
        structure: NordenStructure,
        connection: Connection,
        tol: &Tolerances,
    ) -> Result<Self> {
        if model.dim() != structure.dim() || connection.dim() != structure.dim() {
            return Err(Error::ShapeMismatch(format!(
                "model dim {}, structure dim {}, connection dim {}",
                model.dim(),
                structure.dim(),
                connection.dim()
            )));
        }
        let nabla_j = norden::nabla_j(&connection, &structure);
        let f = norden::f_from_nabla_j(&nabla_j, structure.g());
        let nabla_f = norden::nabla_f(&connection, &f);
        let gram = nabla_j_gram(&nabla_j, structure.g());
        let r = curvature_tensor(&connection, &model, structure.g());
        let ricci = ricci_and_scalars(&r, &structure);
        let gi = structure.g_inv();
        let snorm = gram
            .contract(&[(0, 1), (2, 3)], &[gi, gi])
            .expect("rank-4 gram")
            .scalar();
        let classes = norden::classify(&f, &structure, tol.class);
        Ok(Geometry {
            model,
            structure,
            connection,
            nabla_j,
            f,
            nabla_f,
            gram,
            curvature: CurvatureData {
                r,
                rho: ricci.rho,
                rho_star: ricci.rho_star,
                tau: ricci.tau,
                tau_star2: ricci.tau_star2,
                snorm,
            },
            classes,
        })
    }

    pub fn dim(&self) -> usize {
        self.structure.dim()
    }

    pub fn invariants(&self, eps: f64) -> Invariants {
        let (is_kahler, is_isotropic_kahler) =
            isotropic_kahler_flags(&self.nabla_j, self.curvature.snorm, eps);
        Invariants {
            tau: self.curvature.tau,
            tau_star2: self.curvature.tau_star2,
            snorm: self.curvature.snorm,
            max_abs_nabla_j: self.nabla_j.max_abs(),
            is_kahler,
            is_isotropic_kahler,
        }
    }

    pub fn holomorphic_quartic(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        holomorphic_quartic(&self.curvature.r, self.structure.j(), x, y)
    }

    pub fn bisectional_curvature(&self, x: &DVector<f64>, y: &DVector<f64>, eps_iso: f64) -> Result<f64> {
        bisectional_curvature(&self.curvature.r, &self.structure, x, y, eps_iso)
    }
}

/// Residuals of the algebraic symmetries every Riemann tensor must have.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureSymmetry {
    /// `R(X,Y,Z,U) + R(Y,X,Z,U)`.
    pub first_pair: f64,
    /// `R(X,Y,Z,U) + R(X,Y,U,Z)`.
    pub second_pair: f64,
    /// `R(X,Y,Z,U) − R(Z,U,X,Y)`.
    pub pair_exchange: f64,
    /// cyclic sum over `X, Y, Z`.
    pub bianchi: f64,
    /// `ρ*(y,z) − ρ*(z,y)`.
    pub rho_star_symmetry: f64,
}

/// Symmetry residuals relative to `max(1, max|R|)`.
pub fn curvature_symmetry(data: &CurvatureData) -> CurvatureSymmetry {
    let r = &data.r;
    let scale = r.max_abs().max(1.0);
    let rel = |t: &DenseTensor| t.max_abs() / scale;
    CurvatureSymmetry {
        first_pair: rel(&r.combine(1.0, &r.permuted(&[1, 0, 2, 3]), 1.0)),
        second_pair: rel(&r.combine(1.0, &r.permuted(&[0, 1, 3, 2]), 1.0)),
        pair_exchange: rel(&r.combine(1.0, &r.permuted(&[2, 3, 0, 1]), -1.0)),
        bianchi: rel(&r.cyclic_sum([0, 1, 2])),
        rho_star_symmetry: data
            .rho_star
            .max_abs_diff(&data.rho_star.permuted(&[1, 0]))
            / data.rho_star.max_abs().max(1.0),
    }
}
