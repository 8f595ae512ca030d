//! Dense multilinear algebra on the `2n`-dimensional model space.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerance::Tolerances;

/// Components of a rank-`r` tensor over a `dim`-dimensional space, stored
/// row-major in index order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseTensor {
    dim: usize,
    rank: usize,
    components: Vec<f64>,
}

pub(crate) fn check_dim(dim: usize) -> Result<()> {
    if dim < 2 || dim % 2 != 0 {
        return Err(Error::InvalidDimension(dim));
    }
    Ok(())
}

impl DenseTensor {
    pub fn zeros(dim: usize, rank: usize) -> Self {
        DenseTensor {
            dim,
            rank,
            components: vec![0.0; dim.pow(rank as u32)],
        }
    }

    pub fn from_components(dim: usize, rank: usize, components: Vec<f64>) -> Result<Self> {
        check_dim(dim)?;
        let expected = dim.pow(rank as u32);
        if components.len() != expected {
            return Err(Error::ShapeMismatch(format!(
                "rank-{rank} tensor over dim {dim} needs {expected} components, got {}",
                components.len()
            )));
        }
        Ok(DenseTensor {
            dim,
            rank,
            components,
        })
    }

    /// Builds a tensor by evaluating `f` on every multi-index.
    pub fn from_fn(dim: usize, rank: usize, mut f: impl FnMut(&[usize]) -> f64) -> Self {
        let mut t = DenseTensor::zeros(dim, rank);
        let mut idx = vec![0usize; rank];
        for c in t.components.iter_mut() {
            *c = f(&idx);
            advance(&mut idx, dim);
        }
        t
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    pub fn components_mut(&mut self) -> &mut [f64] {
        &mut self.components
    }

    pub fn into_components(self) -> Vec<f64> {
        self.components
    }

    #[inline]
    pub fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank);
        idx.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    #[inline]
    pub fn get(&self, idx: &[usize]) -> f64 {
        self.components[self.offset(idx)]
    }

    #[inline]
    pub fn set(&mut self, idx: &[usize], value: f64) {
        let o = self.offset(idx);
        self.components[o] = value;
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &DenseTensor) -> f64 {
        debug_assert_eq!(self.components.len(), other.components.len());
        self.components
            .iter()
            .zip(&other.components)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn scaled(&self, factor: f64) -> DenseTensor {
        self.map(|v| v * factor)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> DenseTensor {
        DenseTensor {
            dim: self.dim,
            rank: self.rank,
            components: self.components.iter().map(|&v| f(v)).collect(),
        }
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &DenseTensor, b: f64) -> DenseTensor {
        debug_assert_eq!(self.components.len(), other.components.len());
        DenseTensor {
            dim: self.dim,
            rank: self.rank,
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        }
    }

    /// Reorders arguments: `result(i_0, .., i_{r-1}) = self(i_{perm[0]}, .., i_{perm[r-1]})`.
    pub fn permuted(&self, perm: &[usize]) -> DenseTensor {
        assert_eq!(perm.len(), self.rank, "permutation length must equal rank");
        let mut src = vec![0usize; self.rank];
        DenseTensor::from_fn(self.dim, self.rank, |idx| {
            for (s, &p) in src.iter_mut().zip(perm) {
                *s = idx[p];
            }
            self.get(&src)
        })
    }

    /// Substitutes `M e_a` into one argument: `result(.., a, ..) = Σ_m M[(m, a)] self(.., m, ..)`.
    ///
    /// With `M = J` this evaluates the tensor with `J` applied to that slot.
    pub fn with_slot_mapped(&self, slot: usize, m: &DMatrix<f64>) -> Result<DenseTensor> {
        if slot >= self.rank {
            return Err(Error::SlotOutOfRange {
                slot,
                rank: self.rank,
            });
        }
        let d = self.dim;
        let stride = d.pow((self.rank - slot - 1) as u32);
        let mut out = DenseTensor::zeros(d, self.rank);
        for (o, value) in out.components.iter_mut().enumerate() {
            let a = (o / stride) % d;
            let base = o - a * stride;
            *value = (0..d)
                .map(|k| m[(k, a)] * self.components[base + k * stride])
                .sum();
        }
        Ok(out)
    }

    /// Applies `J` to every slot listed in `slots`.
    pub fn with_slots_mapped(&self, slots: &[usize], m: &DMatrix<f64>) -> Result<DenseTensor> {
        let mut t = self.clone();
        for &s in slots {
            t = t.with_slot_mapped(s, m)?;
        }
        Ok(t)
    }

    /// Traces pairs of slots against bilinear weights:
    /// pair `(a, b)` with weight `W` contributes `Σ W[(i, j)] T(.., i@a, .., j@b, ..)`.
    ///
    /// The surviving slots keep their relative order.
    pub fn contract(&self, pairs: &[(usize, usize)], weights: &[&DMatrix<f64>]) -> Result<DenseTensor> {
        if pairs.len() != weights.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} slot pairs but {} weights",
                pairs.len(),
                weights.len()
            )));
        }
        let mut used = vec![false; self.rank];
        for &(a, b) in pairs {
            for s in [a, b] {
                if s >= self.rank || used[s] {
                    return Err(Error::SlotOutOfRange {
                        slot: s,
                        rank: self.rank,
                    });
                }
                used[s] = true;
            }
        }
        for w in weights {
            if w.nrows() != self.dim || w.ncols() != self.dim {
                return Err(Error::ShapeMismatch(format!(
                    "weight is {}x{}, tensor dim is {}",
                    w.nrows(),
                    w.ncols(),
                    self.dim
                )));
            }
        }
        let free: Vec<usize> = (0..self.rank).filter(|&s| !used[s]).collect();
        let d = self.dim;
        let summed = 2 * pairs.len();
        let mut full = vec![0usize; self.rank];
        let mut inner = vec![0usize; summed];
        let out = DenseTensor::from_fn(d, free.len(), |outer| {
            for (&s, &i) in free.iter().zip(outer) {
                full[s] = i;
            }
            inner.iter_mut().for_each(|i| *i = 0);
            let mut acc = 0.0;
            for _ in 0..d.pow(summed as u32) {
                let mut w = 1.0;
                for (p, (&(a, b), m)) in pairs.iter().zip(weights).enumerate() {
                    let (i, j) = (inner[2 * p], inner[2 * p + 1]);
                    full[a] = i;
                    full[b] = j;
                    w *= m[(i, j)];
                }
                if w != 0.0 {
                    acc += w * self.get(&full);
                }
                advance(&mut inner, d);
            }
            acc
        });
        Ok(out)
    }

    /// Cyclic sum over three slots `(a, b, c)`:
    /// `T(.., x@a, y@b, z@c, ..) + T(.., y, z, x, ..) + T(.., z, x, y, ..)`.
    pub fn cyclic_sum(&self, slots: [usize; 3]) -> DenseTensor {
        let [a, b, c] = slots;
        let mut p1: Vec<usize> = (0..self.rank).collect();
        let mut p2 = p1.clone();
        (p1[a], p1[b], p1[c]) = (b, c, a);
        (p2[a], p2[b], p2[c]) = (c, a, b);
        let t1 = self.permuted(&p1);
        let t2 = self.permuted(&p2);
        self.combine(1.0, &t1, 1.0).combine(1.0, &t2, 1.0)
    }

    /// Rank-2 tensor as a matrix with `M[(i, j)] = T(e_i, e_j)`.
    pub fn to_matrix(&self) -> DMatrix<f64> {
        assert_eq!(self.rank, 2);
        DMatrix::from_row_slice(self.dim, self.dim, &self.components)
    }

    pub fn from_matrix(m: &DMatrix<f64>) -> DenseTensor {
        let d = m.nrows();
        DenseTensor::from_fn(d, 2, |i| m[(i[0], i[1])])
    }

    /// Scalar value of a rank-0 tensor.
    pub fn scalar(&self) -> f64 {
        assert_eq!(self.rank, 0);
        self.components[0]
    }
}

/// Odometer increment of a multi-index, last index fastest.
fn advance(idx: &mut [usize], dim: usize) {
    for i in idx.iter_mut().rev() {
        *i += 1;
        if *i < dim {
            return;
        }
        *i = 0;
    }
}

/// Symmetric nondegenerate metric together with its inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricMatrix {
    entries: DMatrix<f64>,
    inverse: DMatrix<f64>,
}

impl MetricMatrix {
    /// Accepts a matrix that is symmetric within `tol.linear`; the stored
    /// entries are the exact symmetric part.
    pub fn new(entries: DMatrix<f64>, tol: &Tolerances) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::ShapeMismatch(format!(
                "metric is {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        check_dim(entries.nrows())?;
        let asym = (&entries - entries.transpose()).amax();
        if asym > tol.linear {
            return Err(Error::ShapeMismatch(format!(
                "metric is not symmetric (max |g - gᵀ| = {asym:e})"
            )));
        }
        let entries = (&entries + entries.transpose()) * 0.5;
        let inverse = metric_inverse(&entries, tol)?;
        Ok(MetricMatrix { entries, inverse })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn inverse(&self) -> &DMatrix<f64> {
        &self.inverse
    }

    pub fn signature(&self, tol: &Tolerances) -> Result<(usize, usize)> {
        signature(&self.entries, tol.degenerate)
    }
}

/// Inverse of a symmetric metric, checked by its product residual.
pub fn metric_inverse(g: &DMatrix<f64>, tol: &Tolerances) -> Result<DMatrix<f64>> {
    let det = g.determinant();
    if det.abs() <= tol.degenerate {
        return Err(Error::DegenerateMetric(format!("|det g| = {:e}", det.abs())));
    }
    let inv = g
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::DegenerateMetric("matrix is singular".into()))?;
    let residual = (g * &inv - DMatrix::identity(g.nrows(), g.ncols())).amax();
    if residual > tol.linear {
        return Err(Error::DegenerateMetric(format!(
            "inverse residual {residual:e} exceeds {:e}",
            tol.linear
        )));
    }
    Ok(inv)
}

/// Numbers of positive and negative eigenvalues of a symmetric matrix.
pub fn signature(g: &DMatrix<f64>, eps_deg: f64) -> Result<(usize, usize)> {
    let eig = SymmetricEigen::new(g.clone());
    let mut pos = 0;
    let mut neg = 0;
    for &lambda in eig.eigenvalues.iter() {
        if lambda.abs() <= eps_deg {
            return Err(Error::DegenerateMetric(format!("eigenvalue {lambda:e} is zero")));
        }
        if lambda > 0.0 {
            pos += 1;
        } else {
            neg += 1;
        }
    }
    Ok((pos, neg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn inverse_of_involutive_diagonal() {
        let g = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 1.0, -1.0, -1.0]));
        assert_eq!(metric_inverse(&g, &tol()).unwrap(), g);
        let id = DMatrix::<f64>::identity(4, 4);
        assert_eq!(metric_inverse(&id, &tol()).unwrap(), id);
    }

    #[test]
    fn degenerate_metric_is_rejected() {
        let g = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 0.0, -1.0, -1.0]));
        assert!(matches!(metric_inverse(&g, &tol()), Err(Error::DegenerateMetric(_))));
        assert!(matches!(signature(&g, 1e-8), Err(Error::DegenerateMetric(_))));
    }

    #[test]
    fn diagonal_signatures() {
        let d = |v: Vec<f64>| DMatrix::from_diagonal(&nalgebra::DVector::from_vec(v));
        assert_eq!(signature(&d(vec![1.0, 1.0, -1.0, -1.0]), 1e-8).unwrap(), (2, 2));
        assert_eq!(signature(&d(vec![2.0, 3.0, -1.0, -5.0]), 1e-8).unwrap(), (2, 2));
    }

    #[test]
    fn trace_of_identity_is_dim() {
        let id = DMatrix::<f64>::identity(6, 6);
        let t = DenseTensor::from_matrix(&id);
        let s = t.contract(&[(0, 1)], &[&id]).unwrap();
        assert_eq!(s.rank(), 0);
        assert_eq!(s.scalar(), 6.0);
    }

    #[test]
    fn contracting_zero_gives_zero() {
        let id = DMatrix::<f64>::identity(4, 4);
        let z = DenseTensor::zeros(4, 4);
        let c = z.contract(&[(0, 3), (1, 2)], &[&id, &id]).unwrap();
        assert_eq!(c.rank(), 0);
        assert_eq!(c.scalar(), 0.0);
    }

    #[test]
    fn contract_rejects_bad_slots() {
        let id = DMatrix::<f64>::identity(4, 4);
        let t = DenseTensor::zeros(4, 3);
        assert!(matches!(
            t.contract(&[(0, 3)], &[&id]),
            Err(Error::SlotOutOfRange { slot: 3, rank: 3 })
        ));
        assert!(matches!(
            t.contract(&[(1, 1)], &[&id]),
            Err(Error::SlotOutOfRange { slot: 1, .. })
        ));
    }

    #[test]
    fn components_length_is_checked() {
        assert!(DenseTensor::from_components(4, 2, vec![0.0; 15]).is_err());
        assert!(DenseTensor::from_components(3, 2, vec![0.0; 9]).is_err());
        assert!(DenseTensor::from_components(4, 2, vec![0.0; 16]).is_ok());
    }

    #[test]
    fn slot_mapping_matches_direct_sum() {
        let t = DenseTensor::from_fn(4, 3, |i| (i[0] * 16 + i[1] * 4 + i[2]) as f64 - 20.0);
        let m = DMatrix::from_fn(4, 4, |r, c| (r as f64 - c as f64 * 0.5).sin());
        let mapped = t.with_slot_mapped(1, &m).unwrap();
        for i in 0..4 {
            for a in 0..4 {
                for k in 0..4 {
                    let direct: f64 = (0..4).map(|q| m[(q, a)] * t.get(&[i, q, k])).sum();
                    assert!((mapped.get(&[i, a, k]) - direct).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn permutation_reorders_arguments() {
        let t = DenseTensor::from_fn(2, 3, |i| (i[0] * 4 + i[1] * 2 + i[2]) as f64);
        let p = t.permuted(&[2, 0, 1]);
        assert_eq!(p.get(&[1, 0, 0]), t.get(&[0, 1, 0]));
        assert_eq!(p.get(&[0, 1, 1]), t.get(&[1, 0, 1]));
    }

    fn random_symmetric(seed: &[f64]) -> DMatrix<f64> {
        let a = DMatrix::from_iterator(4, 4, seed.iter().copied());
        let mut s = &a + a.transpose();
        for i in 0..4 {
            s[(i, i)] += if i < 2 { 4.0 } else { -4.0 };
        }
        s
    }

    #[test]
    fn random_symmetric_inverse_residual() {
        let vals: Vec<f64> = (0..16).map(|k| ((k * 7 + 3) as f64).sin()).collect();
        let g = random_symmetric(&vals);
        let inv = metric_inverse(&g, &tol()).unwrap();
        assert!((&g * inv - DMatrix::identity(4, 4)).amax() <= 1e-12);
    }

    proptest! {
        #[test]
        fn inverse_is_involutive(vals in proptest::collection::vec(-1.0f64..1.0, 16)) {
            let g = random_symmetric(&vals);
            let inv = metric_inverse(&g, &tol()).unwrap();
            let back = metric_inverse(&inv, &tol()).unwrap();
            prop_assert!((back - g).amax() <= 1e-10);
        }

        #[test]
        fn contraction_is_bilinear(
            t1 in proptest::collection::vec(-1.0f64..1.0, 64),
            t2 in proptest::collection::vec(-1.0f64..1.0, 64),
            a in -2.0f64..2.0,
            b in -2.0f64..2.0,
            gv in proptest::collection::vec(-1.0f64..1.0, 16),
        ) {
            let g = random_symmetric(&gv);
            let inv = metric_inverse(&g, &tol()).unwrap();
            let x = DenseTensor::from_components(4, 3, t1).unwrap();
            let y = DenseTensor::from_components(4, 3, t2).unwrap();
            let lhs = x.combine(a, &y, b).contract(&[(0, 1)], &[&inv]).unwrap();
            let rhs = x.contract(&[(0, 1)], &[&inv]).unwrap()
                .combine(a, &y.contract(&[(0, 1)], &[&inv]).unwrap(), b);
            prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-10);
        }

        #[test]
        fn contraction_order_is_irrelevant(
            t in proptest::collection::vec(-1.0f64..1.0, 256),
            gv in proptest::collection::vec(-1.0f64..1.0, 16),
        ) {
            let g = random_symmetric(&gv);
            let inv = metric_inverse(&g, &tol()).unwrap();
            let x = DenseTensor::from_components(4, 4, t).unwrap();
            let both = x.contract(&[(0, 3), (1, 2)], &[&inv, &g]).unwrap();
            let swapped = x.contract(&[(1, 2), (0, 3)], &[&g, &inv]).unwrap();
            let staged = x.contract(&[(1, 2)], &[&g]).unwrap().contract(&[(0, 1)], &[&inv]).unwrap();
            prop_assert!((both.scalar() - swapped.scalar()).abs() <= 1e-10);
            prop_assert!((both.scalar() - staged.scalar()).abs() <= 1e-10);
        }
    }
}
