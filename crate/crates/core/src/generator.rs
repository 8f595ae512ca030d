//! Seeded construction of homogeneous Norden models.
//!
//! All sampling uses ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded with
//! `GeneratorConfig::seed`; each operation draws from its own stream so that
//! outputs do not depend on call order.

use levenberg_marquardt::{LeastSquaresProblem, LevenbergMarquardt};
use nalgebra::{DMatrix, DVector, Dyn, Owned};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{levi_civita, validate_lie_algebra, LieAlgebraModel};
use crate::norden::{self, classify, validate_norden, NordenStructure};
use crate::tensor::{check_dim, DenseTensor};
use crate::tolerance::Tolerances;

const STREAM_NORDEN: u64 = 1;
const STREAM_ALGEBRA: u64 = 2;
const STREAM_W3: u64 = 3;
const STREAM_ISOTROPIC: u64 = 4;

/// Singular values below this fraction of the largest count as zero.
pub const NULLSPACE_RTOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub dim: usize,
    pub seed: u64,
    pub max_retries: usize,
    /// Sampled entries are uniform in `[-range, range]`.
    pub range: f64,
    /// Size of the central block of the 2-step nilpotent family; `None` means `dim / 2`.
    pub center_dim: Option<usize>,
}

impl GeneratorConfig {
    pub fn new(dim: usize, seed: u64) -> Self {
        GeneratorConfig {
            dim,
            seed,
            max_retries: 50,
            range: 1.0,
            center_dim: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_dim(self.dim)?;
        if !matches!(self.dim, 4 | 6 | 8) {
            return Err(Error::InvalidDimension(self.dim));
        }
        if let Some(z) = self.center_dim {
            if z == 0 || z + 2 > self.dim {
                return Err(Error::ShapeMismatch(format!(
                    "center dimension {z} needs 1 <= z <= dim - 2"
                )));
            }
        }
        Ok(())
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        rng.random_range(-self.range..=self.range)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Kahler,
    Random,
    W3,
    IsotropicW3,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Kahler => "kahler",
            ModelKind::Random => "random",
            ModelKind::W3 => "w3",
            ModelKind::IsotropicW3 => "isotropic-w3",
        }
    }
}

/// `J₀ e_i = e_{n+i}`, `J₀ e_{n+i} = −e_i`, `g₀ = diag(I_n, −I_n)`.
pub fn canonical_norden(dim: usize) -> Result<NordenStructure> {
    check_dim(dim)?;
    let (j, g) = canonical_matrices(dim);
    validate_norden(j, g, &Tolerances::default())
}

fn canonical_matrices(dim: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = dim / 2;
    let mut j = DMatrix::zeros(dim, dim);
    for i in 0..n {
        j[(n + i, i)] = 1.0;
        j[(i, n + i)] = -1.0;
    }
    let g = DMatrix::from_fn(dim, dim, |r, c| match (r == c, r < n) {
        (true, true) => 1.0,
        (true, false) => -1.0,
        _ => 0.0,
    });
    (j, g)
}

/// `J = P J₀ P⁻¹` and `g = h − Jᵀ h J`; the second satisfies `JᵀgJ = −g` for every symmetric `h`.
pub fn norden_from_parts(p: &DMatrix<f64>, h: &DMatrix<f64>, tol: &Tolerances) -> Result<NordenStructure> {
    let dim = p.nrows();
    check_dim(dim)?;
    let (j0, _) = canonical_matrices(dim);
    let p_inv = p
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::DegenerateMetric("frame change is singular".into()))?;
    let j = p * j0 * p_inv;
    let hs = (h + h.transpose()) * 0.5;
    let g = &hs - j.transpose() * &hs * &j;
    let g = (&g + g.transpose()) * 0.5;
    validate_norden(j, g, tol)
}

pub fn random_norden(cfg: &GeneratorConfig, tol: &Tolerances) -> Result<NordenStructure> {
    cfg.validate()?;
    let mut rng = cfg.rng(STREAM_NORDEN);
    random_norden_with(cfg, tol, &mut rng)
}

fn random_norden_with(cfg: &GeneratorConfig, tol: &Tolerances, rng: &mut ChaCha8Rng) -> Result<NordenStructure> {
    let d = cfg.dim;
    for _ in 0..cfg.max_retries {
        let p = DMatrix::from_fn(d, d, |_, _| cfg.sample(rng));
        if p.determinant().abs() <= 0.1 {
            continue;
        }
        let h = DMatrix::from_fn(d, d, |_, _| cfg.sample(rng));
        let h = (&h + h.transpose()) * 0.5;
        match norden_from_parts(&p, &h, tol) {
            Ok(s) if s.g().determinant().abs() > tol.degenerate.sqrt() => return Ok(s),
            _ => continue,
        }
    }
    Err(Error::RetriesExhausted(cfg.max_retries))
}

/// Index triples `(a, b, z)`, `a < b`, of the free constants `C^z_{ab}` of the
/// 2-step nilpotent family with center `span{e_{dim-center}, .., e_{dim-1}}`.
fn nilpotent_slots(dim: usize, center: usize) -> Vec<(usize, usize, usize)> {
    let v = dim - center;
    let mut out = Vec::new();
    for a in 0..v {
        for b in a + 1..v {
            for z in v..dim {
                out.push((a, b, z));
            }
        }
    }
    out
}

/// Every independent antisymmetric constant `C^k_{ab}`, `a < b`.
fn general_slots(dim: usize) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for a in 0..dim {
        for b in a + 1..dim {
            for k in 0..dim {
                out.push((a, b, k));
            }
        }
    }
    out
}

fn constants_from(dim: usize, slots: &[(usize, usize, usize)], values: &[f64]) -> DenseTensor {
    let mut c = DenseTensor::zeros(dim, 3);
    for (&(a, b, k), &v) in slots.iter().zip(values) {
        c.set(&[a, b, k], v);
        c.set(&[b, a, k], -v);
    }
    c
}

/// Random 2-step nilpotent algebra: `[V, V] ⊆ Z`, `Z` central, with
/// `V = span{e_0, .., e_{dim-z-1}}`, `Z` the remaining `z = center_dim` vectors.
pub fn random_nilpotent_algebra(cfg: &GeneratorConfig, tol: &Tolerances) -> Result<LieAlgebraModel> {
    cfg.validate()?;
    let center = cfg.center_dim.unwrap_or(cfg.dim / 2);
    let mut rng = cfg.rng(STREAM_ALGEBRA);
    let slots = nilpotent_slots(cfg.dim, center);
    let values: Vec<f64> = slots.iter().map(|_| cfg.sample(&mut rng)).collect();
    validate_lie_algebra(constants_from(cfg.dim, &slots, &values), tol)
}

/// Random almost abelian algebra `ℝ ⋉_A ℝ^{dim-1}`: `[e_0, e_i] = A e_i`, all other brackets zero.
pub fn random_almost_abelian_algebra(cfg: &GeneratorConfig, tol: &Tolerances) -> Result<LieAlgebraModel> {
    cfg.validate()?;
    let mut rng = cfg.rng(STREAM_ALGEBRA);
    let d = cfg.dim;
    let mut c = DenseTensor::zeros(d, 3);
    for i in 1..d {
        for k in 1..d {
            let v = cfg.sample(&mut rng);
            c.set(&[0, i, k], v);
            c.set(&[i, 0, k], -v);
        }
    }
    validate_lie_algebra(c, tol)
}

/// Random Norden structure on a random algebra, alternating between the
/// 2-step nilpotent and the almost abelian family with the seed's parity.
pub fn random_model(cfg: &GeneratorConfig, tol: &Tolerances) -> Result<(LieAlgebraModel, NordenStructure)> {
    let s = random_norden(cfg, tol)?;
    let model = if cfg.seed % 2 == 0 {
        random_nilpotent_algebra(cfg, tol)?
    } else {
        random_almost_abelian_algebra(cfg, tol)?
    };
    Ok((model, s))
}

/// Linear pipeline `C ↦ (𝔖F, ∇J)` evaluated on each basis direction of a family.
struct LinearFamily {
    dim: usize,
    slots: Vec<(usize, usize, usize)>,
    /// columns: `𝔖_{ijk} F_{ijk}` of each basis direction
    cyclic: DMatrix<f64>,
    /// columns: `∇J` of each basis direction
    nabla_j: DMatrix<f64>,
}

impl LinearFamily {
    fn new(s: &NordenStructure, slots: Vec<(usize, usize, usize)>) -> Result<Self> {
        let d = s.dim();
        let rows = d * d * d;
        let mut cyclic = DMatrix::zeros(rows, slots.len());
        let mut nabla_j = DMatrix::zeros(rows, slots.len());
        for (col, &slot) in slots.iter().enumerate() {
            let model = LieAlgebraModel::from_constants_unchecked(constants_from(d, &[slot], &[1.0]));
            let conn = levi_civita(&model, s.metric())?;
            let nj = norden::nabla_j(&conn, s);
            let f = norden::f_from_nabla_j(&nj, s.g());
            let cyc = f.cyclic_sum([0, 1, 2]);
            cyclic.set_column(col, &DVector::from_column_slice(cyc.components()));
            nabla_j.set_column(col, &DVector::from_column_slice(nj.components()));
        }
        Ok(LinearFamily {
            dim: d,
            slots,
            cyclic,
            nabla_j,
        })
    }

    fn constants(&self, params: &DVector<f64>) -> DenseTensor {
        constants_from(self.dim, &self.slots, params.as_slice())
    }
}

/// Orthonormal basis (columns) of the numerical nullspace of `m`.
fn nullspace(m: &DMatrix<f64>) -> DMatrix<f64> {
    let cols = m.ncols();
    if cols == 0 {
        return DMatrix::zeros(0, 0);
    }
    // pad to at least as many rows as columns so V is complete
    let padded = if m.nrows() < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V");
    let smax = svd.singular_values.max();
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] <= NULLSPACE_RTOL * smax.max(f64::MIN_POSITIVE))
        .collect();
    let mut out = DMatrix::zeros(cols, keep.len());
    for (c, &i) in keep.iter().enumerate() {
        out.set_column(c, &v_t.row(i).transpose());
    }
    out
}

fn numerical_rank(m: &DMatrix<f64>) -> usize {
    if m.ncols() == 0 || m.nrows() == 0 {
        return 0;
    }
    let sv = m.singular_values();
    let smax = sv.max();
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > NULLSPACE_RTOL * smax).count()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "family")]
pub enum W3Family {
    /// `[V, V] ⊆ Z`, `Z` central of the given size.
    TwoStepNilpotent { center_dim: usize },
    /// All antisymmetric constants satisfying the linear `W3` condition,
    /// projected onto the Jacobi variety.
    JacobiProjected,
}

impl std::fmt::Display for W3Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            W3Family::TwoStepNilpotent { center_dim } => write!(f, "two-step-nilpotent(center={center_dim})"),
            W3Family::JacobiProjected => write!(f, "jacobi-projected"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct W3Solution {
    pub model: LieAlgebraModel,
    pub family: W3Family,
    /// Dimension of the linear `W3` solution space of the family.
    pub solution_dim: usize,
}

/// Solution space of `𝔖F = 0` inside a linear family, split into its basis and the
/// image of that basis under `C ↦ ∇J`.
struct W3Space {
    family: LinearFamily,
    basis: DMatrix<f64>,
    nabla_j: DMatrix<f64>,
}

impl W3Space {
    fn new(s: &NordenStructure, slots: Vec<(usize, usize, usize)>) -> Result<Self> {
        let family = LinearFamily::new(s, slots)?;
        let basis = nullspace(&family.cyclic);
        let nabla_j = &family.nabla_j * &basis;
        Ok(W3Space {
            family,
            basis,
            nabla_j,
        })
    }

    fn dim(&self) -> usize {
        self.basis.ncols()
    }

    fn has_non_kahler(&self) -> bool {
        numerical_rank(&self.nabla_j) > 0
    }

    fn constants(&self, coords: &DVector<f64>) -> DenseTensor {
        self.family.constants(&(&self.basis * coords))
    }

    /// Symmetric matrix of the square norm `‖∇J‖` as a quadratic form in the coordinates.
    fn snorm_form(&self, s: &NordenStructure) -> DMatrix<f64> {
        let d = s.dim();
        let k = self.dim();
        let g = s.g();
        let gi = s.g_inv();
        let cols: Vec<DenseTensor> = (0..k)
            .map(|c| {
                DenseTensor::from_components(d, 3, self.nabla_j.column(c).iter().copied().collect())
                    .expect("d³ components")
            })
            .collect();
        let lowered: Vec<DenseTensor> = cols.iter().map(|nj| norden::f_from_nabla_j(nj, g)).collect();
        let mut q = DMatrix::zeros(k, k);
        for a in 0..k {
            for b in a..k {
                // g^{ij} g^{kl} g((∇_i J_a) e_k, (∇_j J_b) e_l)
                let mut v = 0.0;
                for i in 0..d {
                    for j in 0..d {
                        if gi[(i, j)] == 0.0 {
                            continue;
                        }
                        for kk in 0..d {
                            for l in 0..d {
                                let w = gi[(i, j)] * gi[(kk, l)];
                                if w == 0.0 {
                                    continue;
                                }
                                let inner: f64 = (0..d)
                                    .map(|m| cols[a].get(&[i, kk, m]) * lowered[b].get(&[j, l, m]))
                                    .sum();
                                v += w * inner;
                            }
                        }
                    }
                }
                q[(a, b)] = v;
                q[(b, a)] = v;
            }
        }
        q
    }
}

fn random_coords(k: usize, cfg: &GeneratorConfig, rng: &mut ChaCha8Rng) -> DVector<f64> {
    DVector::from_fn(k, |_, _| cfg.sample(rng))
}

/// Rescales constants so that `max |∇J| = 1`; `None` for Kähler models.
fn normalized(c: DenseTensor, s: &NordenStructure, tol: &Tolerances) -> Result<Option<LieAlgebraModel>> {
    let model = validate_lie_algebra(c, &Tolerances {
        jacobi: tol.jacobi * 1e-2,
        ..*tol
    })?;
    let conn = levi_civita(&model, s.metric())?;
    let nj = norden::nabla_j(&conn, s).max_abs();
    let scale = model.constants().max_abs();
    if nj <= 1e-6 * scale.max(f64::MIN_POSITIVE) {
        return Ok(None);
    }
    let model = validate_lie_algebra(model.scaled(1.0 / nj).constants().clone(), tol)?;
    Ok(Some(model))
}

fn accept_w3(model: &LieAlgebraModel, s: &NordenStructure, tol: &Tolerances) -> Result<bool> {
    let conn = levi_civita(model, s.metric())?;
    let f = norden::f_tensor(&conn, s);
    let c = classify(&f, s, tol.class);
    Ok(c.is_w3 && !c.is_w0)
}

fn nilpotent_centers(cfg: &GeneratorConfig) -> Vec<usize> {
    let d = cfg.dim;
    match cfg.center_dim {
        Some(z) => vec![z],
        None => {
            let mut zs: Vec<usize> = (1..=d - 2).collect();
            zs.sort_by_key(|&z| (z as isize - (d / 2) as isize).abs());
            zs
        }
    }
}

/// Quadratic Jacobi residual and the unit-norm condition on `∇J`, optionally
/// with `‖∇J‖ = 0`, over coordinates of the general `W3` solution space.
struct JacobiProjection<'a> {
    space: &'a W3Space,
    /// basis constants of the solution space
    basis_constants: Vec<DenseTensor>,
    snorm_form: Option<DMatrix<f64>>,
    params: DVector<f64>,
}

/// `[A, [B, C]]`-type Jacobi expression bilinear in `(outer, inner)`:
/// `Σ_l inner^l_{jk} outer^m_{il} + cyclic(i, j, k)`.
fn jacobi_bilinear(outer: &DenseTensor, inner: &DenseTensor) -> DenseTensor {
    let d = outer.dim();
    DenseTensor::from_fn(d, 4, |idx| {
        let (i, j, k, m) = (idx[0], idx[1], idx[2], idx[3]);
        (0..d)
            .map(|l| {
                inner.get(&[j, k, l]) * outer.get(&[i, l, m])
                    + inner.get(&[k, i, l]) * outer.get(&[j, l, m])
                    + inner.get(&[i, j, l]) * outer.get(&[k, l, m])
            })
            .sum()
    })
}

impl<'a> JacobiProjection<'a> {
    fn new(space: &'a W3Space, snorm_form: Option<DMatrix<f64>>, start: DVector<f64>) -> Self {
        let k = space.dim();
        let basis_constants = (0..k)
            .map(|a| {
                let mut e = DVector::zeros(k);
                e[a] = 1.0;
                space.constants(&e)
            })
            .collect();
        JacobiProjection {
            space,
            basis_constants,
            snorm_form,
            params: start,
        }
    }

    fn current(&self) -> DenseTensor {
        self.space.constants(&self.params)
    }
}

impl LeastSquaresProblem<f64, Dyn, Dyn> for JacobiProjection<'_> {
    type ResidualStorage = Owned<f64, Dyn>;
    type JacobianStorage = Owned<f64, Dyn, Dyn>;
    type ParameterStorage = Owned<f64, Dyn>;

    fn set_params(&mut self, x: &DVector<f64>) {
        self.params.copy_from(x);
    }

    fn params(&self) -> DVector<f64> {
        self.params.clone()
    }

    fn residuals(&self) -> Option<DVector<f64>> {
        let c = self.current();
        let jac = jacobi_bilinear(&c, &c);
        let nj = &self.space.nabla_j * &self.params;
        let mut r: Vec<f64> = jac.into_components();
        r.push(nj.norm_squared() - 1.0);
        if let Some(q) = &self.snorm_form {
            r.push((self.params.transpose() * q * &self.params)[(0, 0)]);
        }
        Some(DVector::from_vec(r))
    }

    fn jacobian(&self) -> Option<DMatrix<f64>> {
        let c = self.current();
        let k = self.params.len();
        let jacobi_rows = c.dim().pow(4);
        let rows = jacobi_rows + 1 + usize::from(self.snorm_form.is_some());
        let mut jm = DMatrix::zeros(rows, k);
        for (a, ba) in self.basis_constants.iter().enumerate() {
            let da = jacobi_bilinear(ba, &c).combine(1.0, &jacobi_bilinear(&c, ba), 1.0);
            for (row, v) in da.components().iter().enumerate() {
                jm[(row, a)] = *v;
            }
        }
        let nj = &self.space.nabla_j * &self.params;
        let grad = (self.space.nabla_j.transpose() * nj) * 2.0;
        let base = jacobi_rows;
        for a in 0..k {
            jm[(base, a)] = grad[a];
        }
        if let Some(q) = &self.snorm_form {
            let gq = (q * &self.params) * 2.0;
            for a in 0..k {
                jm[(base + 1, a)] = gq[a];
            }
        }
        Some(jm)
    }
}

fn project_onto_jacobi(
    space: &W3Space,
    snorm_form: Option<&DMatrix<f64>>,
    start: DVector<f64>,
) -> Option<DenseTensor> {
    let problem = JacobiProjection::new(space, snorm_form.cloned(), start);
    let (problem, _report) = LevenbergMarquardt::new()
        .with_ftol(1e-15)
        .with_xtol(1e-15)
        .with_gtol(1e-15)
        .with_patience(100)
        .minimize(problem);
    let residual = problem.residuals()?.amax();
    (residual <= 1e-12).then(|| problem.current())
}

/// Non-Kähler `W3` model on the frame of `s`.
///
/// The map `C ↦ 𝔖F` is linear at fixed `(J, g)`, so `W3` is a linear condition on the
/// structure constants. The 2-step nilpotent family (Jacobi holds identically) is
/// tried first; when its solution space is Kähler only, the general antisymmetric
/// solution space is used and its elements are projected onto the Jacobi variety.
pub fn solve_w3_family(s: &NordenStructure, cfg: &GeneratorConfig, tol: &Tolerances) -> Result<W3Solution> {
    cfg.validate()?;
    if s.dim() != cfg.dim {
        return Err(Error::ShapeMismatch(format!(
            "structure dim {}, config dim {}",
            s.dim(),
            cfg.dim
        )));
    }
    let mut rng = cfg.rng(STREAM_W3);
    for center in nilpotent_centers(cfg) {
        let space = W3Space::new(s, nilpotent_slots(cfg.dim, center))?;
        if !space.has_non_kahler() {
            continue;
        }
        for _ in 0..cfg.max_retries {
            let coords = random_coords(space.dim(), cfg, &mut rng);
            if let Some(model) = normalized(space.constants(&coords), s, tol)? {
                if accept_w3(&model, s, tol)? {
                    return Ok(W3Solution {
                        model,
                        family: W3Family::TwoStepNilpotent { center_dim: center },
                        solution_dim: space.dim(),
                    });
                }
            }
        }
    }

    let space = W3Space::new(s, general_slots(cfg.dim))?;
    if !space.has_non_kahler() {
        return Err(Error::OnlyKahlerSolutions);
    }
    for _ in 0..cfg.max_retries {
        let start = random_coords(space.dim(), cfg, &mut rng);
        let Some(c) = project_onto_jacobi(&space, None, start) else {
            continue;
        };
        if let Ok(Some(model)) = normalized(c, s, tol) {
            if accept_w3(&model, s, tol)? {
                return Ok(W3Solution {
                    model,
                    family: W3Family::JacobiProjected,
                    solution_dim: space.dim(),
                });
            }
        }
    }
    Err(Error::RetriesExhausted(cfg.max_retries))
}

/// Bisects `f` on `[lo, hi]` given a sign change.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * mid.abs().max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

fn isotropic_accept(model: &LieAlgebraModel, s: &NordenStructure, tol: &Tolerances) -> Result<bool> {
    let conn = levi_civita(model, s.metric())?;
    let nj = norden::nabla_j(&conn, s);
    let snorm = crate::curvature::square_norm_nabla_j(&nj, s.g(), s.g_inv());
    let f = norden::f_from_nabla_j(&nj, s.g());
    let c = classify(&f, s, tol.class);
    Ok(c.is_w3 && nj.max_abs() > 0.1 && snorm.abs() <= tol.check)
}

/// Non-Kähler `W3` model with vanishing square norm `‖∇J‖`.
///
/// In a linear solution space `‖∇J‖` is a quadratic form in the coordinates;
/// on a random 2-plane where it takes both signs, bisection along the circle
/// locates a zero. In the Jacobi-projected family the zero is added as one more
/// residual of the projection. `NotFound` is a regular outcome.
pub fn search_isotropic_kahler(
    s: &NordenStructure,
    cfg: &GeneratorConfig,
    tol: &Tolerances,
) -> Result<LieAlgebraModel> {
    cfg.validate()?;
    let mut rng = cfg.rng(STREAM_ISOTROPIC);
    for center in nilpotent_centers(cfg) {
        let space = W3Space::new(s, nilpotent_slots(cfg.dim, center))?;
        if !space.has_non_kahler() {
            continue;
        }
        let q = space.snorm_form(s);
        for _ in 0..cfg.max_retries {
            let t1 = random_coords(space.dim(), cfg, &mut rng);
            let t2 = random_coords(space.dim(), cfg, &mut rng);
            let at = |phi: f64| &t1 * phi.cos() + &t2 * phi.sin();
            let quad = |phi: f64| {
                let t = at(phi);
                (t.transpose() * &q * &t)[(0, 0)]
            };
            const STEPS: usize = 64;
            let step = std::f64::consts::PI / STEPS as f64;
            for k in 0..STEPS {
                let (a, b) = (k as f64 * step, (k + 1) as f64 * step);
                if quad(a).signum() == quad(b).signum() {
                    continue;
                }
                let phi = bisect(quad, a, b);
                if let Some(model) = normalized(space.constants(&at(phi)), s, tol)? {
                    if isotropic_accept(&model, s, tol)? {
                        return Ok(model);
                    }
                }
            }
        }
    }

    let space = W3Space::new(s, general_slots(cfg.dim))?;
    if space.has_non_kahler() {
        let q = space.snorm_form(s);
        for _ in 0..cfg.max_retries {
            let start = random_coords(space.dim(), cfg, &mut rng);
            let Some(c) = project_onto_jacobi(&space, Some(&q), start) else {
                continue;
            };
            if let Ok(Some(model)) = normalized(c, s, tol) {
                if isotropic_accept(&model, s, tol)? {
                    return Ok(model);
                }
            }
        }
    }
    Err(Error::NotFound(cfg.max_retries))
}

/// A generated model with its provenance label.
#[derive(Debug, Clone)]
pub struct GeneratedModel {
    pub model: LieAlgebraModel,
    pub structure: NordenStructure,
    pub label: String,
}

/// Attempts per Norden structure before a fresh structure is drawn; some
/// structures trap the Jacobi projection in a nonzero local minimum.
pub const ATTEMPTS_PER_STRUCTURE: usize = 8;

/// Runs `search` on successive random structures of one seeded stream; the first
/// structure is the one `random_norden` returns.
fn over_structures(
    cfg: &GeneratorConfig,
    tol: &Tolerances,
    mut search: impl FnMut(&NordenStructure, &GeneratorConfig) -> Result<(LieAlgebraModel, String)>,
) -> Result<GeneratedModel> {
    let mut rng = cfg.rng(STREAM_NORDEN);
    let per = GeneratorConfig {
        max_retries: cfg.max_retries.min(ATTEMPTS_PER_STRUCTURE),
        ..cfg.clone()
    };
    let mut last = Error::RetriesExhausted(cfg.max_retries);
    for _ in 0..cfg.max_retries.div_ceil(ATTEMPTS_PER_STRUCTURE).max(1) {
        let structure = random_norden_with(cfg, tol, &mut rng)?;
        match search(&structure, &per) {
            Ok((model, label)) => {
                return Ok(GeneratedModel {
                    model,
                    structure,
                    label,
                })
            }
            Err(e @ (Error::RetriesExhausted(_) | Error::NotFound(_))) => last = e,
            Err(e) => return Err(e),
        }
    }
    Err(last)
}

pub fn generate(kind: ModelKind, cfg: &GeneratorConfig, tol: &Tolerances) -> Result<GeneratedModel> {
    cfg.validate()?;
    let label_head = format!("{} dim={} seed={}", kind.as_str(), cfg.dim, cfg.seed);
    match kind {
        ModelKind::Kahler => Ok(GeneratedModel {
            model: LieAlgebraModel::abelian(cfg.dim)?,
            structure: canonical_norden(cfg.dim)?,
            label: format!("{label_head} abelian canonical"),
        }),
        ModelKind::Random => {
            let (model, structure) = random_model(cfg, tol)?;
            let family = if cfg.seed % 2 == 0 { "two-step-nilpotent" } else { "almost-abelian" };
            Ok(GeneratedModel {
                model,
                structure,
                label: format!("{label_head} {family}"),
            })
        }
        ModelKind::W3 => over_structures(cfg, tol, |s, per| {
            solve_w3_family(s, per, tol).map(|sol| (sol.model, format!("{label_head} {}", sol.family)))
        }),
        ModelKind::IsotropicW3 => over_structures(cfg, tol, |s, per| {
            search_isotropic_kahler(s, per, tol).map(|m| (m, label_head.clone()))
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn canonical_structures() {
        for (d, n) in [(4, 2), (6, 3)] {
            let s = canonical_norden(d).unwrap();
            assert_eq!(s.metric().signature(&tol()).unwrap(), (n, n));
            let id = DMatrix::<f64>::identity(d, d);
            assert_eq!(s.j() * s.j(), -id);
        }
    }

    #[test]
    fn construction_fixed_point() {
        let s0 = canonical_norden(4).unwrap();
        let s = norden_from_parts(&DMatrix::identity(4, 4), &(s0.g() * 0.5), &tol()).unwrap();
        assert_eq!(s.j(), s0.j());
        assert!((s.g() - s0.g()).amax() <= 1e-15);
    }

    #[test]
    fn random_norden_is_deterministic() {
        let cfg = GeneratorConfig::new(4, 11);
        let a = random_norden(&cfg, &tol()).unwrap();
        let b = random_norden(&cfg, &tol()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_nilpotent_sample_is_abelian() {
        let mut cfg = GeneratorConfig::new(4, 1);
        cfg.range = 0.0;
        let m = random_nilpotent_algebra(&cfg, &tol()).unwrap();
        assert_eq!(m.constants().max_abs(), 0.0);
    }

    #[test]
    fn nilpotent_sample_has_central_block() {
        let cfg = GeneratorConfig::new(4, 5);
        let m = random_nilpotent_algebra(&cfg, &tol()).unwrap();
        assert!(m.constants().max_abs() > 0.0);
        assert_eq!(m.jacobi_residual().0, 0.0);
        for z in 2..4 {
            for i in 0..4 {
                for k in 0..4 {
                    assert_eq!(m.c(z, i, k), 0.0);
                    assert_eq!(m.c(i, z, k), 0.0);
                }
            }
        }
    }

    #[test]
    fn bad_configs_are_rejected() {
        assert!(GeneratorConfig::new(5, 0).validate().is_err());
        assert!(GeneratorConfig::new(10, 0).validate().is_err());
        let mut cfg = GeneratorConfig::new(4, 0);
        cfg.center_dim = Some(3);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn nullspace_of_rank_deficient_matrix() {
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0, 1.0, 0.0, 1.0]);
        let n = nullspace(&m);
        assert_eq!(n.ncols(), 1);
        assert!((&m * &n).amax() <= 1e-12);
        let wide = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 1.0]);
        assert_eq!(nullspace(&wide).ncols(), 2);
    }

    #[test]
    fn snorm_form_matches_direct_square_norm() {
        let cfg = GeneratorConfig::new(4, 3);
        let s = random_norden(&cfg, &tol()).unwrap();
        let space = W3Space::new(&s, general_slots(4)).unwrap();
        let q = space.snorm_form(&s);
        let mut rng = cfg.rng(99);
        for _ in 0..5 {
            let t = random_coords(space.dim(), &cfg, &mut rng);
            let model = LieAlgebraModel::from_constants_unchecked(space.constants(&t));
            let conn = levi_civita(&model, s.metric()).unwrap();
            let nj = norden::nabla_j(&conn, &s);
            let direct = crate::curvature::square_norm_nabla_j(&nj, s.g(), s.g_inv());
            let quad = (t.transpose() * &q * &t)[(0, 0)];
            assert!((direct - quad).abs() <= 1e-10 * direct.abs().max(1.0), "{direct} vs {quad}");
        }
    }

    #[test]
    fn flat_structure_has_only_kahler_isotropic_solutions() {
        // on the abelian algebra ∇J ≡ 0, so no isotropic non-Kähler model exists there
        let s = canonical_norden(4).unwrap();
        let conn = levi_civita(&LieAlgebraModel::abelian(4).unwrap(), s.metric()).unwrap();
        let nj = norden::nabla_j(&conn, &s);
        assert_eq!(nj.max_abs(), 0.0);
    }
}
