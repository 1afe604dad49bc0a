//! Coupling files: `{n, U}`, `{n, alpha, beta, M}` or `{kind, param, n}`,
//! with complex entries written as `[re, im]` pairs.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use qgvertex::coupling::{classical_coupling, from_spectral};
use qgvertex::{ClassicalKind, ComplexMatrix, Tolerance, VertexCoupling};
use serde::de::IgnoredAny;
use serde::Deserialize;

use crate::Failure;

pub type PairRows = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CouplingFile {
    n: Option<usize>,
    #[serde(rename = "U")]
    u: Option<PairRows>,
    alpha: Option<f64>,
    beta: Option<f64>,
    #[serde(rename = "M")]
    m: Option<PairRows>,
    kind: Option<String>,
    param: Option<f64>,
    // informational blocks written by `design`
    #[allow(dead_code)]
    spectral: Option<IgnoredAny>,
    #[allow(dead_code)]
    report: Option<IgnoredAny>,
}

/// A parsed coupling file before any unitarity checks.
#[derive(Debug, Clone)]
pub enum RawCoupling {
    Matrix(ComplexMatrix),
    Spectral { alpha: f64, beta: f64, m: ComplexMatrix },
    Table { kind: ClassicalKind, param: f64, n: usize },
}

impl RawCoupling {
    pub fn build(&self, tol: Tolerance) -> Result<VertexCoupling, Failure> {
        match self {
            RawCoupling::Matrix(u) => VertexCoupling::new(u.clone(), tol).map_err(Failure::from),
            RawCoupling::Spectral { alpha, beta, m } => from_spectral(*alpha, *beta, m, tol).map_err(Failure::from),
            RawCoupling::Table { kind, param, n } => classical_coupling(*kind, *param, *n).map_err(Failure::from),
        }
    }
}

pub fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::parse(format!("cannot read {}: {e}", path.display())))
}

pub fn matrix_from_pairs(rows: &PairRows, n: usize, name: &str) -> Result<ComplexMatrix, Failure> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Failure::parse(format!(
            "{name} must be a {n}x{n} array of [re, im] pairs"
        )));
    }
    let data = rows.iter().flatten().map(|&[re, im]| Complex64::new(re, im)).collect();
    ComplexMatrix::from_row_major(n, data).map_err(|e| Failure::parse(format!("{name}: {e}")))
}

pub fn matrix_to_pairs(m: &ComplexMatrix) -> PairRows {
    m.rows().map(|row| row.iter().map(|z| [z.re, z.im]).collect()).collect()
}

pub fn parse_coupling(text: &str) -> Result<RawCoupling, Failure> {
    let file: CouplingFile =
        serde_json::from_str(text).map_err(|e| Failure::parse(format!("invalid coupling file: {e}")))?;

    let has_matrix = file.u.is_some();
    let has_spectral = file.m.is_some() || file.alpha.is_some() || file.beta.is_some();
    let has_table = file.kind.is_some() || file.param.is_some();
    let count = [has_matrix, has_spectral, has_table].iter().filter(|&&b| b).count();
    if count != 1 {
        return Err(Failure::parse(
            "coupling file must contain exactly one of {n, U}, {n, alpha, beta, M} or {kind, param, n}".into(),
        ));
    }
    let n = file.n.ok_or_else(|| Failure::parse("missing field `n`".into()))?;

    if let Some(u) = &file.u {
        return Ok(RawCoupling::Matrix(matrix_from_pairs(u, n, "U")?));
    }
    if has_spectral {
        let (Some(alpha), Some(beta), Some(m)) = (file.alpha, file.beta, &file.m) else {
            return Err(Failure::parse("spectral form needs alpha, beta and M".into()));
        };
        let m = matrix_from_pairs(m, n, "M")?;
        return Ok(RawCoupling::Spectral { alpha, beta, m });
    }
    let name = file.kind.unwrap_or_default();
    let kind = ClassicalKind::from_name(&name).ok_or_else(|| {
        let known: Vec<_> = ClassicalKind::ALL.iter().map(|k| k.name()).collect();
        Failure::parse(format!("unknown kind `{name}`, expected one of {}", known.join(", ")))
    })?;
    let param = match (kind, file.param) {
        (_, Some(p)) => p,
        (ClassicalKind::Free, None) => 0.0,
        (_, None) => return Err(Failure::parse(format!("kind `{}` needs `param`", kind.name()))),
    };
    Ok(RawCoupling::Table { kind, param, n })
}

#[derive(Debug, Deserialize)]
struct MatrixFile {
    n: usize,
    #[serde(rename = "M")]
    m: PairRows,
}

/// Reads `{n, M}`; other keys are ignored so a spectral coupling file works too.
pub fn parse_m_file(text: &str) -> Result<ComplexMatrix, Failure> {
    let file: MatrixFile = serde_json::from_str(text).map_err(|e| Failure::parse(format!("invalid M file: {e}")))?;
    matrix_from_pairs(&file.m, file.n, "M")
}
