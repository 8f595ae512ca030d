//! Left-invariant frames on Lie groups and their Levi-Civita connection.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::tensor::{check_dim, DenseTensor, MetricMatrix};
use crate::tolerance::Tolerances;

/// Lie algebra given by its structure constants in a fixed frame.
///
/// `constants[i, j, k] = C^k_{ij}`, i.e. `[e_i, e_j] = C^k_{ij} e_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct LieAlgebraModel {
    constants: DenseTensor,
}

impl LieAlgebraModel {
    pub fn abelian(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(LieAlgebraModel {
            constants: DenseTensor::zeros(dim, 3),
        })
    }

    /// Skips antisymmetry and Jacobi checks; for linear probes of the `C ↦ F` map.
    pub(crate) fn from_constants_unchecked(constants: DenseTensor) -> Self {
        LieAlgebraModel { constants }
    }

    pub fn dim(&self) -> usize {
        self.constants.dim()
    }

    pub fn constants(&self) -> &DenseTensor {
        &self.constants
    }

    /// `C^k_{ij}`.
    #[inline]
    pub fn c(&self, i: usize, j: usize, k: usize) -> f64 {
        self.constants.get(&[i, j, k])
    }

    pub fn bracket(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let d = self.dim();
        DVector::from_fn(d, |k, _| {
            let mut s = 0.0;
            for i in 0..d {
                for j in 0..d {
                    s += x[i] * y[j] * self.c(i, j, k);
                }
            }
            s
        })
    }

    pub fn scaled(&self, factor: f64) -> LieAlgebraModel {
        LieAlgebraModel {
            constants: self.constants.scaled(factor),
        }
    }

    /// Largest Jacobi residual and the `(i, j, k)` where it occurs.
    pub fn jacobi_residual(&self) -> (f64, [usize; 3]) {
        jacobi_residual(&self.constants)
    }
}

fn jacobi_residual(c: &DenseTensor) -> (f64, [usize; 3]) {
    let d = c.dim();
    let mut worst = (0.0, [0, 0, 0]);
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                for m in 0..d {
                    // [e_i, [e_j, e_k]] + cyclic
                    let mut s = 0.0;
                    for l in 0..d {
                        s += c.get(&[j, k, l]) * c.get(&[i, l, m])
                            + c.get(&[k, i, l]) * c.get(&[j, l, m])
                            + c.get(&[i, j, l]) * c.get(&[k, l, m]);
                    }
                    if s.abs() > worst.0 {
                        worst = (s.abs(), [i, j, k]);
                    }
                }
            }
        }
    }
    worst
}

/// Checks antisymmetry and the Jacobi identity of `C^k_{ij}`.
pub fn validate_lie_algebra(constants: DenseTensor, tol: &Tolerances) -> Result<LieAlgebraModel> {
    check_dim(constants.dim())?;
    if constants.rank() != 3 {
        return Err(Error::ShapeMismatch(format!(
            "structure constants must have rank 3, got {}",
            constants.rank()
        )));
    }
    let d = constants.dim();
    let mut worst = (0.0, [0, 0, 0]);
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                let r = (constants.get(&[i, j, k]) + constants.get(&[j, i, k])).abs();
                if r > worst.0 {
                    worst = (r, [i, j, k]);
                }
            }
        }
    }
    if worst.0 > tol.linear {
        return Err(Error::AntisymmetryViolation {
            indices: worst.1,
            residual: worst.0,
        });
    }
    let (residual, indices) = jacobi_residual(&constants);
    if residual > tol.jacobi {
        return Err(Error::JacobiViolation { indices, residual });
    }
    Ok(LieAlgebraModel { constants })
}

/// Connection coefficients `gamma[i, j, k] = Γ^k_{ij}`, `∇_{e_i} e_j = Γ^k_{ij} e_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Connection {
    gamma: DenseTensor,
}

impl Connection {
    pub fn from_coefficients(gamma: DenseTensor) -> Result<Self> {
        if gamma.rank() != 3 {
            return Err(Error::ShapeMismatch("connection coefficients must have rank 3".into()));
        }
        Ok(Connection { gamma })
    }

    pub fn dim(&self) -> usize {
        self.gamma.dim()
    }

    pub fn coefficients(&self) -> &DenseTensor {
        &self.gamma
    }

    #[inline]
    pub fn gamma(&self, i: usize, j: usize, k: usize) -> f64 {
        self.gamma.get(&[i, j, k])
    }

    /// `∇_x y` for constant-coefficient vectors.
    pub fn covariant(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let d = self.dim();
        DVector::from_fn(d, |k, _| {
            let mut s = 0.0;
            for i in 0..d {
                for j in 0..d {
                    s += x[i] * y[j] * self.gamma(i, j, k);
                }
            }
            s
        })
    }

    /// Adds `delta` to a single coefficient `Γ^k_{ij}`.
    pub fn perturbed(&self, i: usize, j: usize, k: usize, delta: f64) -> Connection {
        let mut gamma = self.gamma.clone();
        gamma.set(&[i, j, k], gamma.get(&[i, j, k]) + delta);
        Connection { gamma }
    }
}

/// Levi-Civita connection of a left-invariant metric (Koszul formula).
///
/// With `c_{ijl} = g([e_i, e_j], e_l)`:
/// `Γ_{ijl} = ½ (c_{ijl} − c_{jli} + c_{lij})` and `Γ^k_{ij} = g^{kl} Γ_{ijl}`.
pub fn levi_civita(model: &LieAlgebraModel, g: &MetricMatrix) -> Result<Connection> {
    let d = model.dim();
    if g.dim() != d {
        return Err(Error::ShapeMismatch(format!(
            "model dim {d}, metric dim {}",
            g.dim()
        )));
    }
    let gm = g.entries();
    let gi = g.inverse();
    let lowered = DenseTensor::from_fn(d, 3, |idx| {
        let (i, j, l) = (idx[0], idx[1], idx[2]);
        (0..d).map(|m| model.c(i, j, m) * gm[(m, l)]).sum()
    });
    let c = |i, j, l| lowered.get(&[i, j, l]);
    let mut gamma = DenseTensor::zeros(d, 3);
    for i in 0..d {
        for j in 0..d {
            let low: Vec<f64> = (0..d)
                .map(|l| 0.5 * (c(i, j, l) - c(j, l, i) + c(l, i, j)))
                .collect();
            for k in 0..d {
                let v: f64 = (0..d).map(|l| gi[(k, l)] * low[l]).sum();
                gamma.set(&[i, j, k], v);
            }
        }
    }
    Ok(Connection { gamma })
}

/// `max |Γ^k_{ij} − Γ^k_{ji} − C^k_{ij}|`.
pub fn torsion_residual(conn: &Connection, model: &LieAlgebraModel) -> f64 {
    let d = conn.dim();
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                let r = conn.gamma(i, j, k) - conn.gamma(j, i, k) - model.c(i, j, k);
                worst = worst.max(r.abs());
            }
        }
    }
    worst
}

/// `max |Γ^m_{ij} g_{mk} + Γ^m_{ik} g_{jm}|`, i.e. the frame components of `∇g`.
pub fn metricity_residual(conn: &Connection, g: &DMatrix<f64>) -> f64 {
    let d = conn.dim();
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                let r: f64 = (0..d)
                    .map(|m| conn.gamma(i, j, m) * g[(m, k)] + conn.gamma(i, k, m) * g[(j, m)])
                    .sum();
                worst = worst.max(r.abs());
            }
        }
    }
    worst
}
