//! On-disk JSON format for measurements. Operators are nested arrays of
//! `[re, im]` pairs, row-major; `kind` says whether they are POVM elements
//! or Kraus operators.

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::povm::kraus::{KrausSet, Povm};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasurementKind {
    Povm,
    Kraus,
}

impl MeasurementKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MeasurementKind::Povm => "povm",
            MeasurementKind::Kraus => "kraus",
        }
    }
}

/// Serialized measurement: `n_qubits`, `kind`, and one row-major complex
/// matrix per operator.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementFile {
    pub n_qubits: usize,
    pub kind: MeasurementKind,
    pub operators: Vec<Vec<Vec<[f64; 2]>>>,
}

impl MeasurementFile {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_povm(povm: &Povm) -> Self {
        MeasurementFile {
            n_qubits: povm.n_qubits(),
            kind: MeasurementKind::Povm,
            operators: povm.elements().iter().map(matrix_to_rows).collect(),
        }
    }

    pub fn from_kraus(set: &KrausSet) -> Self {
        MeasurementFile {
            n_qubits: set.n_qubits(),
            kind: MeasurementKind::Kraus,
            operators: set.operators().iter().map(matrix_to_rows).collect(),
        }
    }

    /// Decodes the operator arrays, checking shape against `n_qubits`.
    pub fn matrices(&self) -> Result<Vec<ComplexMatrix>> {
        if self.n_qubits == 0 {
            return Err(Error::InvalidArgument("n_qubits must be at least 1".into()));
        }
        if self.operators.is_empty() {
            return Err(Error::InvalidArgument("no operators given".into()));
        }
        let dim = 1usize << self.n_qubits;
        self.operators
            .iter()
            .enumerate()
            .map(|(i, rows)| rows_to_matrix(i, rows, dim))
            .collect()
    }

    /// Interprets the file as a POVM; Kraus files induce `F = M^dag M`.
    pub fn into_povm(&self) -> Result<Povm> {
        match self.kind {
            MeasurementKind::Povm => Povm::new(self.n_qubits, self.matrices()?),
            MeasurementKind::Kraus => Povm::from_kraus(&self.into_kraus()?),
        }
    }

    /// Interprets the file as a Kraus set; rejects POVM files, whose
    /// elements are not operation elements.
    pub fn into_kraus(&self) -> Result<KrausSet> {
        match self.kind {
            MeasurementKind::Kraus => KrausSet::new(self.n_qubits, self.matrices()?),
            MeasurementKind::Povm => Err(Error::WrongMode("kraus")),
        }
    }
}

fn matrix_to_rows(m: &ComplexMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.rows())
        .map(|r| (0..m.cols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
        .collect()
}

fn rows_to_matrix(index: usize, rows: &[Vec<[f64; 2]>], dim: usize) -> Result<ComplexMatrix> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(Error::DimensionMismatch(format!(
            "operator {index} must be {dim}x{dim} for the declared qubit count"
        )));
    }
    let mut m = ComplexMatrix::zeros(dim, dim);
    for (r, row) in rows.iter().enumerate() {
        for (c, &[re, im]) in row.iter().enumerate() {
            if !re.is_finite() || !im.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "operator {index} entry ({r},{c}) is not finite"
                )));
            }
            m[(r, c)] = Complex64::new(re, im);
        }
    }
    Ok(m)
}
