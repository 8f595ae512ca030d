//! Homogeneous almost complex manifolds with Norden metric.
//!
//! Every model lives on a Lie group with a left-invariant frame `e_0 .. e_{2n-1}`:
//! the structure constants, the almost complex structure `J` and the metric `g`
//! all have constant components in that frame. Connection, curvature and every
//! tensor derived from them are therefore computed by pure finite-dimensional
//! algebra.
//!
//! Index conventions used throughout the crate:
//!
//! * structure constants `[i, j, k]` hold `C^k_{ij}` with `[e_i, e_j] = C^k_{ij} e_k`;
//! * connection coefficients `[i, j, k]` hold `Γ^k_{ij}` with `∇_{e_i} e_j = Γ^k_{ij} e_k`;
//! * matrices act on column vectors: `J[(k, j)] = J^k_j`, so `J e_j = J^k_j e_k`;
//! * `∇J` is stored as `[i, j, k] = ((∇_{e_i} J) e_j)^k`;
//! * covariant tensors store their arguments in slot order, e.g. `R[i, j, k, l] = R(e_i, e_j, e_k, e_l)`.

pub mod checks;
pub mod curvature;
pub mod error;
pub mod files;
pub mod generator;
pub mod models;
pub mod norden;
pub mod tensor;
pub mod tolerance;

pub use checks::{verify, CheckResult, CheckStatus, VerificationReport};
pub use curvature::{CurvatureData, Geometry};
pub use error::{Error, Result};
pub use generator::{GeneratorConfig, ModelKind};
pub use models::{Connection, LieAlgebraModel};
pub use norden::{ClassMembership, NordenStructure};
pub use tensor::{DenseTensor, MetricMatrix};
pub use tolerance::Tolerances;
