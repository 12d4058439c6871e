//! JSON interchange formats for matrices, spectra and operator-valued
//! trigonometric polynomials.
//!
//! Matrices are `{"n": 2, "w": 0.5, "re": [[..], [..]], "im": [[..], [..]]}`
//! with `w` defaulting to 1/n. Spectra are `{"values": [..], "weights": [..]}`.
//! Polynomials are `{"dim": n, "coeffs": {"k": matrix, ..}}`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::CMatrix;
use crate::spectral::{SingularSpectrum, TracialMatrix};
use crate::torus::OperatorTrigPolynomial;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<f64>,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn from_tracial(x: &TracialMatrix) -> Self {
        let n = x.dim();
        let m = x.matrix();
        MatrixJson {
            n,
            w: Some(x.weight()),
            re: (0..n).map(|i| (0..n).map(|j| m[(i, j)].re).collect()).collect(),
            im: (0..n).map(|i| (0..n).map(|j| m[(i, j)].im).collect()).collect(),
        }
    }

    pub fn to_tracial(&self) -> Result<TracialMatrix> {
        if self.n == 0 {
            return Err(invalid("matrix dimension n must be at least 1"));
        }
        let rows_ok = |rows: &[Vec<f64>]| rows.len() == self.n && rows.iter().all(|r| r.len() == self.n);
        if !rows_ok(&self.re) || !rows_ok(&self.im) {
            return Err(invalid(format!("re and im must both be {0}×{0}", self.n)));
        }
        let m = CMatrix::from_parts(&self.re, &self.im)?;
        TracialMatrix::new(m, self.w.unwrap_or(1.0 / self.n as f64))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumJson {
    pub values: Vec<f64>,
    pub weights: Vec<f64>,
}

impl SpectrumJson {
    pub fn from_spectrum(s: &SingularSpectrum) -> Self {
        SpectrumJson {
            values: s.values().to_vec(),
            weights: s.weights().to_vec(),
        }
    }

    pub fn to_spectrum(&self) -> Result<SingularSpectrum> {
        if self.values.len() != self.weights.len() {
            return Err(invalid("values and weights differ in length"));
        }
        SingularSpectrum::from_pairs(self.values.iter().copied().zip(self.weights.iter().copied()).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolynomialJson {
    pub dim: usize,
    pub coeffs: BTreeMap<String, MatrixJson>,
}

impl PolynomialJson {
    pub fn from_polynomial(f: &OperatorTrigPolynomial) -> Self {
        let coeffs = f
            .coefficients()
            .iter()
            .map(|(k, a)| {
                let t = TracialMatrix::new(a.clone(), f.weight()).expect("stored coefficients are valid");
                (k.to_string(), MatrixJson::from_tracial(&t))
            })
            .collect();
        PolynomialJson { dim: f.dim(), coeffs }
    }

    pub fn to_polynomial(&self) -> Result<OperatorTrigPolynomial> {
        let mut weight = None;
        let mut coeffs = BTreeMap::new();
        for (k, m) in &self.coeffs {
            let k: i64 = k.parse().map_err(|_| invalid(format!("coefficient key {k:?} is not an integer")))?;
            let t = m.to_tracial()?;
            if t.dim() != self.dim {
                return Err(invalid(format!("coefficient {k} has dimension {} not {}", t.dim(), self.dim)));
            }
            match weight {
                None => weight = Some(t.weight()),
                Some(w) if w != t.weight() => return Err(invalid("coefficients carry different trace weights")),
                _ => {}
            }
            coeffs.insert(k, t.matrix().clone());
        }
        OperatorTrigPolynomial::from_coefficients(self.dim, weight.unwrap_or(1.0 / self.dim.max(1) as f64), coeffs)
    }
}

/// Either a matrix or a spectrum, told apart by their keys.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum NormInput {
    Matrix(MatrixJson),
    Spectrum(SpectrumJson),
}

impl NormInput {
    pub fn spectrum(&self) -> Result<SingularSpectrum> {
        match self {
            NormInput::Matrix(m) => crate::spectral::singular_spectrum(&m.to_tracial()?),
            NormInput::Spectrum(s) => s.to_spectrum(),
        }
    }
}

pub fn parse_matrix(text: &str) -> Result<TracialMatrix> {
    let m: MatrixJson = serde_json::from_str(text).map_err(|e| invalid(format!("matrix JSON: {e}")))?;
    m.to_tracial()
}

pub fn parse_norm_input(text: &str) -> Result<SingularSpectrum> {
    let m: NormInput =
        serde_json::from_str(text).map_err(|e| invalid(format!("expected a matrix or spectrum JSON object: {e}")))?;
    m.spectrum()
}
