//! JSON model and report files.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::checks::{verify, CheckResult, VerificationReport};
use crate::curvature::{Geometry, Invariants};
use crate::error::{Error, Result};
use crate::generator::GeneratorConfig;
use crate::models::{validate_lie_algebra, LieAlgebraModel};
use crate::norden::{validate_norden, ClassMembership, NordenStructure};
use crate::tensor::DenseTensor;
use crate::tolerance::Tolerances;

/// Two entries for the same constant may differ by at most this much.
pub const CONFLICT_TOL: f64 = 1e-15;

/// On-disk model. `structure_constants` lists `[i, j, k, C^k_{ij}]`; omitted entries
/// are zero and the antisymmetric counterpart `[j, i, k, -v]` may be left out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub structure_constants: Vec<(usize, usize, usize, f64)>,
    pub metric: Vec<Vec<f64>>,
    #[serde(rename = "J")]
    pub j: Vec<Vec<f64>>,
}

fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|r| m.row(r).iter().copied().collect()).collect()
}

fn rows_matrix(name: &str, rows: &[Vec<f64>], dim: usize) -> Result<DMatrix<f64>> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(Error::Parse(format!("{name} must be a {dim}x{dim} array")));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Parse(format!("{name} has non-finite entries")));
    }
    Ok(DMatrix::from_fn(dim, dim, |r, c| rows[r][c]))
}

impl ModelFile {
    /// Lists each constant with `i < j` once; the rest follows by antisymmetry.
    pub fn from_model(model: &LieAlgebraModel, s: &NordenStructure, label: Option<String>) -> Self {
        let d = model.dim();
        let mut sc = Vec::new();
        for i in 0..d {
            for j in i + 1..d {
                for k in 0..d {
                    let v = model.c(i, j, k);
                    if v != 0.0 {
                        sc.push((i, j, k, v));
                    }
                }
            }
        }
        ModelFile {
            dim: d,
            label,
            structure_constants: sc,
            metric: matrix_rows(s.g()),
            j: matrix_rows(s.j()),
        }
    }

    /// Structure constants after antisymmetric completion.
    pub fn constants(&self) -> Result<DenseTensor> {
        let d = self.dim;
        crate::tensor::check_dim(d).map_err(|e| Error::Parse(e.to_string()))?;
        let mut c = DenseTensor::zeros(d, 3);
        let mut seen = vec![false; d * d * d];
        let mut put = |c: &mut DenseTensor, idx: [usize; 3], v: f64| -> Result<()> {
            let off = c.offset(&idx);
            if seen[off] {
                let old = c.get(&idx);
                if (old - v).abs() > CONFLICT_TOL {
                    return Err(Error::Parse(format!(
                        "conflicting entries for C^{}_{}{}: {old} vs {v}",
                        idx[2], idx[0], idx[1]
                    )));
                }
            } else {
                seen[off] = true;
                c.set(&idx, v);
            }
            Ok(())
        };
        for &(i, j, k, v) in &self.structure_constants {
            if i >= d || j >= d || k >= d {
                return Err(Error::Parse(format!("index ({i}, {j}, {k}) out of range for dim {d}")));
            }
            if !v.is_finite() {
                return Err(Error::Parse(format!("non-finite constant at ({i}, {j}, {k})")));
            }
            if i == j {
                if v != 0.0 {
                    return Err(Error::AntisymmetryViolation {
                        indices: [i, j, k],
                        residual: v.abs(),
                    });
                }
                continue;
            }
            put(&mut c, [i, j, k], v)?;
            put(&mut c, [j, i, k], -v)?;
        }
        Ok(c)
    }

    /// Parsed but unvalidated `(J, g)`.
    pub fn matrices(&self) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let j = rows_matrix("J", &self.j, self.dim)?;
        let g = rows_matrix("metric", &self.metric, self.dim)?;
        Ok((j, g))
    }

    /// Full validation: Lie algebra axioms first, then the Norden conditions.
    pub fn to_model(&self, tol: &Tolerances) -> Result<(LieAlgebraModel, NordenStructure)> {
        let c = self.constants()?;
        let (j, g) = self.matrices()?;
        let model = validate_lie_algebra(c, tol)?;
        let s = validate_norden(j, g, tol)?;
        Ok((model, s))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("model file serializes");
        out.push('\n');
        out
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

/// Run configuration echoed into every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorConfig>,
    /// Name of a debug perturbation applied before checking, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
    pub all_passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ReportError>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportError {
    pub kind: String,
    pub message: String,
}

impl From<&Error> for ReportError {
    fn from(e: &Error) -> Self {
        ReportError {
            kind: e.kind().into(),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub version: String,
    pub config: RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub tolerances: Tolerances,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classes: Option<ClassMembership>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub invariants: Option<Invariants>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho_star: Option<Vec<Vec<f64>>>,
    pub checks: Vec<CheckResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verification: Option<VerificationDetails>,
    pub summary: Summary,
}

/// Scalar outcomes of the sampled checks that do not fit a residual row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationDetails {
    pub samples: usize,
    pub sample_seed: u64,
    pub theorem21_violations: Option<usize>,
    pub theorem22_consistent: Option<bool>,
    pub null_cone_max_quartic: Option<f64>,
}

impl From<&VerificationReport> for VerificationDetails {
    fn from(r: &VerificationReport) -> Self {
        VerificationDetails {
            samples: r.samples,
            sample_seed: r.sample_seed,
            theorem21_violations: r.theorem21_violations,
            theorem22_consistent: r.theorem22_consistent,
            null_cone_max_quartic: r.null_cone_max_quartic,
        }
    }
}

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

impl ReportFile {
    pub fn new(config: RunConfig, label: Option<String>, tolerances: Tolerances) -> Self {
        ReportFile {
            version: VERSION.into(),
            config,
            label,
            tolerances,
            classes: None,
            invariants: None,
            rho: None,
            rho_star: None,
            checks: Vec::new(),
            verification: None,
            summary: Summary {
                passed: 0,
                failed: 0,
                skipped: 0,
                all_passed: true,
                error: None,
            },
        }
    }

    pub fn with_invariants(mut self, geom: &Geometry, tol: &Tolerances) -> Self {
        self.invariants = Some(geom.invariants(tol.class));
        self.rho = Some(matrix_rows(&geom.curvature.rho.to_matrix()));
        self.rho_star = Some(matrix_rows(&geom.curvature.rho_star.to_matrix()));
        self
    }

    pub fn with_verification(mut self, geom: &Geometry, tol: &Tolerances, samples: usize, seed: u64) -> Self {
        let report = verify(geom, tol, samples, seed);
        self.verification = Some((&report).into());
        self.checks.extend(report.checks);
        self
    }

    pub fn with_error(mut self, e: &Error) -> Self {
        self.summary.error = Some(e.into());
        self
    }

    /// Recomputes the summary from the check rows and any recorded error.
    pub fn finish(mut self) -> Self {
        use crate::checks::CheckStatus::*;
        let count = |st| self.checks.iter().filter(|c| c.status == st).count();
        self.summary.passed = count(Pass);
        self.summary.failed = count(Fail);
        self.summary.skipped = count(Skipped);
        self.summary.all_passed = self.summary.failed == 0 && self.summary.error.is_none();
        self
    }

    /// Non-finite numbers are written as `null` by the JSON layer; any such value
    /// is reported as an error rather than silently dropped.
    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("report serializes");
        out.push('\n');
        out
    }
}
