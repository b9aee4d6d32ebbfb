//! JSON documents for sets, matrices and inclusion verdicts.
//!
//! A set document looks like
//!
//! ```json
//! { "name": "box", "c": [0, 0], "G": [[1, 0], [0, 1]], "E": [[1, 0], [0, 1]] }
//! ```
//!
//! with the optional constraint block `"F"`, `"theta"`, `"R"` present either
//! completely or not at all. Matrices are arrays of rows.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Number;
use thiserror::Error;

use crate::encode::{AlphaCertificate, CertificateCheckReport, CertificateShape, Condition, InclusionCertificate};
use crate::oracle::Witness;
use crate::set::{ConPolyZonotope, Exponents, Matrix, Vector};
use crate::solve::Certificate;

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },

    #[error("JSON error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },

    #[error("invalid document: {}", .0.join("; "))]
    Invalid(Vec<String>),
}

impl From<serde_json::Error> for DocumentError {
    fn from(e: serde_json::Error) -> Self {
        let message = e.to_string();
        // serde_json appends " at line L column C"; keep the bare message.
        let message = message.split(" at line ").next().unwrap_or(&message).to_string();
        DocumentError::Syntax { line: e.line(), column: e.column(), message }
    }
}

/// Serialized form of a [`ConPolyZonotope`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub c: Vec<f64>,
    #[serde(rename = "G")]
    pub g: Vec<Vec<f64>>,
    #[serde(rename = "E")]
    pub e: Vec<Vec<Number>>,
    #[serde(rename = "F", default, skip_serializing_if = "Option::is_none")]
    pub f: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<Vec<f64>>,
    #[serde(rename = "R", default, skip_serializing_if = "Option::is_none")]
    pub r: Option<Vec<Vec<Number>>>,
}

impl SetDocument {
    pub fn from_set(set: &ConPolyZonotope, name: Option<String>) -> Self {
        let exps = |m: &Exponents| -> Vec<Vec<Number>> {
            m.row_iter().map(|row| row.iter().map(|&v| Number::from(v)).collect()).collect()
        };
        let constrained = set.has_constraints();
        SetDocument {
            name,
            c: set.center.iter().copied().collect(),
            g: matrix_rows(&set.generators),
            e: exps(&set.exponents),
            f: constrained.then(|| matrix_rows(&set.constraint_generators)),
            theta: constrained.then(|| set.constraint_rhs.iter().copied().collect()),
            r: constrained.then(|| exps(&set.constraint_exponents)),
        }
    }

    /// Builds and validates the set, reporting every problem found.
    pub fn to_set(&self) -> Result<ConPolyZonotope, DocumentError> {
        let mut errors = Vec::new();
        let d = self.c.len();
        let n = self.g.first().map_or(0, Vec::len);
        let generators = rows_to_matrix("G", &self.g, d, n, &mut errors);
        let s = self.e.len();
        let exponents = exponent_matrix("E", &self.e, s, n, &mut errors);

        let present = [self.f.is_some(), self.theta.is_some(), self.r.is_some()];
        let (constraint_generators, constraint_rhs, constraint_exponents) = if present.iter().all(|&p| p) {
            let f = self.f.as_deref().unwrap_or_default();
            let theta = self.theta.as_deref().unwrap_or_default();
            let r = self.r.as_deref().unwrap_or_default();
            let p = f.len();
            let q = f.first().map_or(0, Vec::len);
            let fm = rows_to_matrix("F", f, p, q, &mut errors);
            let rq = r.first().map_or(0, Vec::len);
            let rm = exponent_matrix("R", r, r.len(), rq, &mut errors);
            (fm, Vector::from_column_slice(theta), rm)
        } else {
            if present.iter().any(|&p| p) {
                errors.push("constraint block incomplete: F, theta and R must be given together".into());
            }
            (Matrix::zeros(0, 0), Vector::zeros(0), Exponents::zeros(s, 0))
        };
        if !errors.is_empty() {
            return Err(DocumentError::Invalid(errors));
        }
        let set = ConPolyZonotope {
            center: Vector::from_column_slice(&self.c),
            generators,
            exponents,
            constraint_generators,
            constraint_rhs,
            constraint_exponents,
        };
        let violations = set.validate();
        if violations.is_empty() {
            Ok(set)
        } else {
            Err(DocumentError::Invalid(violations.iter().map(ToString::to_string).collect()))
        }
    }
}

fn matrix_rows(m: &Matrix) -> Vec<Vec<f64>> {
    m.row_iter().map(|row| row.iter().copied().collect()).collect()
}

fn rows_to_matrix(name: &str, rows: &[Vec<f64>], nrows: usize, ncols: usize, errors: &mut Vec<String>) -> Matrix {
    if rows.len() != nrows {
        errors.push(format!("{name} has {} rows, expected {nrows}", rows.len()));
        return Matrix::zeros(0, 0);
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != ncols {
            errors.push(format!("{name} row {i} has {} entries, expected {ncols}", row.len()));
            return Matrix::zeros(0, 0);
        }
    }
    Matrix::from_fn(nrows, ncols, |i, j| rows[i][j])
}

fn exponent_matrix(name: &str, rows: &[Vec<Number>], nrows: usize, ncols: usize, errors: &mut Vec<String>) -> Exponents {
    let mut out = Exponents::zeros(nrows, ncols);
    let mut ok = true;
    for (i, row) in rows.iter().enumerate() {
        if row.len() != ncols {
            errors.push(format!("{name} row {i} has {} entries, expected {ncols}", row.len()));
            ok = false;
            continue;
        }
        for (j, v) in row.iter().enumerate() {
            match v.as_u64().and_then(|u| i64::try_from(u).ok()) {
                Some(k) => out[(i, j)] = k,
                None => {
                    errors.push(format!("{name}[{i}][{j}] = {v}: exponent not a nonnegative integer"));
                    ok = false;
                }
            }
        }
    }
    if ok {
        out
    } else {
        Exponents::zeros(nrows, ncols)
    }
}

fn read(path: &Path) -> Result<String, DocumentError> {
    fs::read_to_string(path).map_err(|source| DocumentError::Io { path: path.display().to_string(), source })
}

/// Parses and validates a set document.
pub fn parse_set_str(text: &str) -> Result<(ConPolyZonotope, Option<String>), DocumentError> {
    let doc: SetDocument = serde_json::from_str(text)?;
    Ok((doc.to_set()?, doc.name))
}

pub fn parse_set(path: &Path) -> Result<(ConPolyZonotope, Option<String>), DocumentError> {
    parse_set_str(&read(path)?)
}

/// Writes a set document with one matrix row per line.
pub fn serialize_set(set: &ConPolyZonotope, name: Option<String>) -> String {
    let doc = SetDocument::from_set(set, name);
    let rows = |m: &[String]| {
        if m.is_empty() {
            "[]".to_string()
        } else {
            format!("[\n    {}\n  ]", m.join(",\n    "))
        }
    };
    let mut fields = Vec::new();
    if let Some(name) = &doc.name {
        fields.push(format!("\"name\": {}", json(name)));
    }
    fields.push(format!("\"c\": {}", json(&doc.c)));
    fields.push(format!("\"G\": {}", rows(&doc.g.iter().map(json).collect::<Vec<_>>())));
    fields.push(format!("\"E\": {}", rows(&doc.e.iter().map(json).collect::<Vec<_>>())));
    if let (Some(f), Some(theta), Some(r)) = (&doc.f, &doc.theta, &doc.r) {
        fields.push(format!("\"F\": {}", rows(&f.iter().map(json).collect::<Vec<_>>())));
        fields.push(format!("\"theta\": {}", json(theta)));
        fields.push(format!("\"R\": {}", rows(&r.iter().map(json).collect::<Vec<_>>())));
    }
    format!("{{\n  {}\n}}\n", fields.join(",\n  "))
}

fn json<T: Serialize + ?Sized>(value: &T) -> String {
    serde_json::to_string(value).expect("finite values serialize")
}

/// Parses a JSON array of equally long rows of numbers.
pub fn parse_matrix_str(text: &str) -> Result<Matrix, DocumentError> {
    let rows: Vec<Vec<f64>> = serde_json::from_str(text)?;
    let ncols = rows.first().map_or(0, Vec::len);
    let mut errors = Vec::new();
    let m = rows_to_matrix("matrix", &rows, rows.len(), ncols, &mut errors);
    if errors.is_empty() {
        Ok(m)
    } else {
        Err(DocumentError::Invalid(errors))
    }
}

pub fn parse_matrix(path: &Path) -> Result<Matrix, DocumentError> {
    parse_matrix_str(&read(path)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictStatus {
    Proven,
    NotProven,
    Falsified,
}

/// Certificate blocks as arrays of rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateDocument {
    pub gamma: Vec<f64>,
    #[serde(rename = "Gamma")]
    pub generator_map: Vec<Vec<f64>>,
    #[serde(rename = "Pi")]
    pub row_map: Vec<Vec<f64>>,
    #[serde(rename = "Psi")]
    pub constraint_map: Vec<Vec<f64>>,
    pub psi: Vec<f64>,
    #[serde(rename = "alpha_Gamma", default, skip_serializing_if = "Option::is_none")]
    pub generator_split: Option<Vec<Vec<f64>>>,
    #[serde(rename = "alpha_Psi", default, skip_serializing_if = "Option::is_none")]
    pub constraint_split: Option<Vec<Vec<f64>>>,
}

impl CertificateDocument {
    pub fn from_certificate(cert: &Certificate) -> Self {
        let base = cert.base();
        CertificateDocument {
            gamma: base.center_shift.iter().copied().collect(),
            generator_map: matrix_rows(&base.generator_map),
            row_map: matrix_rows(&base.row_map),
            constraint_map: matrix_rows(&base.constraint_map),
            psi: base.constraint_shift.iter().copied().collect(),
            generator_split: cert.alpha().map(|a| matrix_rows(&a.generator_split)),
            constraint_split: cert.alpha().map(|a| matrix_rows(&a.constraint_split)),
        }
    }

    /// Rebuilds the certificate; the shapes come from the set pair because
    /// an array of zero rows does not record its column count.
    pub fn to_certificate(&self, shape: &CertificateShape) -> Result<Certificate, DocumentError> {
        let mut errors = Vec::new();
        let s = shape;
        let base = InclusionCertificate {
            center_shift: vector("gamma", &self.gamma, s.n_outer, &mut errors),
            generator_map: rows_to_matrix("Gamma", &self.generator_map, s.n_outer, s.n_inner, &mut errors),
            row_map: rows_to_matrix("Pi", &self.row_map, s.p_outer, s.p_inner, &mut errors),
            constraint_map: rows_to_matrix("Psi", &self.constraint_map, s.q_outer, s.q_inner, &mut errors),
            constraint_shift: vector("psi", &self.psi, s.q_outer, &mut errors),
        };
        let cert = match (&self.generator_split, &self.constraint_split) {
            (Some(ag), Some(ap)) => Certificate::Alpha(AlphaCertificate {
                base,
                generator_split: rows_to_matrix("alpha_Gamma", ag, 2 * (s.n_inner + 1), s.n_outer, &mut errors),
                constraint_split: rows_to_matrix("alpha_Psi", ap, 2 * (s.q_inner + 1), s.q_outer, &mut errors),
            }),
            _ => Certificate::Base(base),
        };
        if errors.is_empty() {
            Ok(cert)
        } else {
            Err(DocumentError::Invalid(errors))
        }
    }
}

fn vector(name: &str, v: &[f64], len: usize, errors: &mut Vec<String>) -> Vector {
    if v.len() != len {
        errors.push(format!("{name} has {} entries, expected {len}", v.len()));
    }
    Vector::from_column_slice(v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessDocument {
    pub point: Vec<f64>,
    pub lambda: Vec<f64>,
    pub distance: f64,
}

impl From<&Witness> for WitnessDocument {
    fn from(w: &Witness) -> Self {
        WitnessDocument {
            point: w.point.iter().copied().collect(),
            lambda: w.inner_lambda.iter().copied().collect(),
            distance: w.outer_distance,
        }
    }
}

/// Machine-readable result of one inclusion check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictDocument {
    pub inner: String,
    pub outer: String,
    pub method: String,
    pub status: VerdictStatus,
    pub wall_time_s: f64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessDocument>,
    /// Largest residual of each condition. Bound conditions report the
    /// largest left-hand side, `null` when it is not finite.
    pub residuals: BTreeMap<String, Option<f64>>,
}

/// Per-condition maxima of a verification report.
pub fn residual_map(report: &CertificateCheckReport) -> BTreeMap<String, Option<f64>> {
    let finite = |v: f64| v.is_finite().then_some(v);
    let max = |v: &Vector| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: BTreeMap<String, Option<f64>> =
        report.eq_residuals.iter().map(|(c, &v)| (c.label().to_string(), finite(v))).collect();
    out.insert(Condition::GeneratorBound.label().into(), finite(max(&report.ineq_lhs_e)));
    out.insert(Condition::ConstraintBound.label().into(), finite(max(&report.ineq_lhs_r)));
    out
}
