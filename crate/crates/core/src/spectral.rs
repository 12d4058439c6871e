//! Finite tracial matrix algebras: singular spectra, the distribution
//! function λ_s, generalized singular numbers μ_t, spectral truncation and
//! weighted direct sums.
//!
//! A matrix x ∈ M_N carries its own trace weight w, so the trace is
//! `x ↦ w Σ x_ii`. Its singular spectrum is the decreasing step function
//! t ↦ μ_t(x), stored as `(value, weight)` steps. Direct sums of such
//! steps realize the product traces on L_∞(Ω) ⊗ M and L_∞(T) ⊗ M without
//! assembling the block operator.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::CMatrix;

/// Absolute tolerance under which adjacent singular values are merged.
pub const MERGE_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct TracialMatrix {
    matrix: CMatrix,
    weight: f64,
}

impl TracialMatrix {
    pub fn new(matrix: CMatrix, weight: f64) -> Result<Self> {
        if matrix.dim() == 0 {
            return Err(invalid("matrix dimension must be positive"));
        }
        if !matrix.is_finite() {
            return Err(invalid("matrix entries must be finite"));
        }
        if !(weight.is_finite() && weight > 0.0) {
            return Err(invalid(format!("trace weight must be positive, got {weight}")));
        }
        Ok(TracialMatrix { matrix, weight })
    }

    /// Matrix with the normalized trace, w = 1/N.
    pub fn normalized(matrix: CMatrix) -> Result<Self> {
        let w = 1.0 / matrix.dim().max(1) as f64;
        Self::new(matrix, w)
    }

    pub fn diagonal(values: &[f64], weight: f64) -> Result<Self> {
        Self::new(CMatrix::from_real_diagonal(values), weight)
    }

    pub fn zero(n: usize, weight: f64) -> Result<Self> {
        Self::new(CMatrix::zeros(n), weight)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Same weight, new entries.
    pub fn with_matrix(&self, matrix: CMatrix) -> TracialMatrix {
        debug_assert_eq!(matrix.dim(), self.dim());
        TracialMatrix {
            matrix,
            weight: self.weight,
        }
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace() * self.weight
    }

    pub fn adjoint(&self) -> TracialMatrix {
        self.with_matrix(self.matrix.adjoint())
    }

    pub fn scale(&self, a: Complex64) -> TracialMatrix {
        self.with_matrix(self.matrix.scale(a))
    }

    pub fn scale_real(&self, a: f64) -> TracialMatrix {
        self.with_matrix(self.matrix.scale_real(a))
    }

    pub fn checked_compatible(&self, other: &TracialMatrix) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(invalid(format!("dimension mismatch: {} vs {}", self.dim(), other.dim())));
        }
        if self.weight != other.weight {
            return Err(invalid(format!("trace weight mismatch: {} vs {}", self.weight, other.weight)));
        }
        Ok(())
    }

    pub fn add(&self, other: &TracialMatrix) -> Result<TracialMatrix> {
        self.checked_compatible(other)?;
        Ok(self.with_matrix(&self.matrix + &other.matrix))
    }

    pub fn sub(&self, other: &TracialMatrix) -> Result<TracialMatrix> {
        self.checked_compatible(other)?;
        Ok(self.with_matrix(&self.matrix - &other.matrix))
    }

    pub fn mul(&self, other: &TracialMatrix) -> Result<TracialMatrix> {
        self.checked_compatible(other)?;
        Ok(self.with_matrix(&self.matrix * &other.matrix))
    }

    /// ‖x‖_2² = τ(x*x).
    pub fn l2_norm_sq(&self) -> f64 {
        self.weight * self.matrix.frobenius_sq()
    }
}

/// Decreasing step function μ_t: `values[i]` on `[T_{i-1}, T_i)` where
/// `T_i` is the running sum of `weights`, and zero past the total weight.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularSpectrum {
    values: Vec<f64>,
    weights: Vec<f64>,
}

impl SingularSpectrum {
    /// Sorts, merges values within [`MERGE_TOL`], and validates.
    pub fn from_pairs(mut pairs: Vec<(f64, f64)>) -> Result<Self> {
        for &(v, w) in &pairs {
            if !(v.is_finite() && v >= 0.0) {
                return Err(invalid(format!("singular values must be finite and >= 0, got {v}")));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(invalid(format!("spectral weights must be positive, got {w}")));
            }
        }
        pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut values: Vec<f64> = Vec::with_capacity(pairs.len());
        let mut weights: Vec<f64> = Vec::with_capacity(pairs.len());
        for (v, w) in pairs {
            match values.last() {
                Some(&head) if head - v <= MERGE_TOL => *weights.last_mut().unwrap() += w,
                _ => {
                    values.push(v);
                    weights.push(w);
                }
            }
        }
        Ok(SingularSpectrum { values, weights })
    }

    /// Each value with the same weight.
    pub fn uniform(values: &[f64], weight: f64) -> Result<Self> {
        Self::from_pairs(values.iter().map(|&v| (v, weight)).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// True when μ vanishes identically.
    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Cumulative weights T_1 < T_2 < … < T_n.
    pub fn cumulative(&self) -> Vec<f64> {
        self.weights
            .iter()
            .scan(0.0, |acc, &w| {
                *acc += w;
                Some(*acc)
            })
            .collect()
    }

    /// Iterator over `(value, T_i)` step endpoints.
    pub fn steps(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values.iter().copied().zip(self.cumulative())
    }

    /// λ_s = total weight of values strictly greater than `level`.
    pub fn lambda_at(&self, level: f64) -> f64 {
        self.values
            .iter()
            .zip(&self.weights)
            .filter(|(&v, _)| v > level)
            .map(|(_, &w)| w)
            .sum()
    }

    /// μ_t, right-continuous.
    pub fn mu_at(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for (&v, &w) in self.values.iter().zip(&self.weights) {
            acc += w;
            if t < acc {
                return v;
            }
        }
        0.0
    }

    /// ‖x‖_p = (Σ w_i v_i^p)^{1/p}; p = ∞ gives the largest value.
    pub fn lp_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.values.first().copied().unwrap_or(0.0);
        }
        self.values
            .iter()
            .zip(&self.weights)
            .map(|(&v, &w)| w * v.powf(p))
            .sum::<f64>()
            .powf(1.0 / p)
    }

    /// Spectrum of a·x: values scaled by |a|.
    pub fn scaled(&self, a: f64) -> SingularSpectrum {
        let a = a.abs();
        if a == 0.0 {
            return SingularSpectrum {
                values: vec![0.0],
                weights: vec![self.total_weight().max(f64::MIN_POSITIVE)],
            };
        }
        SingularSpectrum {
            values: self.values.iter().map(|v| v * a).collect(),
            weights: self.weights.clone(),
        }
    }

    /// Dilation t ↦ μ_{t/s}: every weight multiplied by `s`.
    pub fn dilated(&self, s: f64) -> SingularSpectrum {
        SingularSpectrum {
            values: self.values.clone(),
            weights: self.weights.iter().map(|w| w * s).collect(),
        }
    }
}

/// Singular values of x, each with weight w, via the Jacobi eigensolver on x*x.
pub fn singular_spectrum(x: &TracialMatrix) -> Result<SingularSpectrum> {
    spectrum_of_gram(&x.matrix().gram(), x.weight())
}

/// Spectrum of G^{1/2} for a positive semidefinite G.
pub fn spectrum_of_gram(gram: &CMatrix, weight: f64) -> Result<SingularSpectrum> {
    let eig = gram.hermitian_eigen()?;
    SingularSpectrum::uniform(
        &eig.values.iter().map(|&l| l.max(0.0).sqrt()).collect::<Vec<_>>(),
        weight,
    )
}

/// Splits x = head + tail with head = x·e_{(α,∞)}(|x|).
pub fn spectral_truncate(x: &TracialMatrix, alpha: f64) -> Result<(TracialMatrix, TracialMatrix)> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(invalid(format!("truncation level must be positive, got {alpha}")));
    }
    let eig = x.matrix().gram().hermitian_eigen()?;
    let proj = eig.projection(|k| eig.values[k].max(0.0).sqrt() > alpha);
    let head = x.matrix() * &proj;
    let tail = x.matrix() - &head;
    Ok((x.with_matrix(head), x.with_matrix(tail)))
}

/// Weighted union of spectra: block j contributes its steps with weights
/// multiplied by `scale_j`.
pub fn direct_sum(blocks: &[(SingularSpectrum, f64)]) -> Result<SingularSpectrum> {
    if blocks.is_empty() {
        return Err(invalid("direct sum of an empty list"));
    }
    let mut pairs = Vec::with_capacity(blocks.iter().map(|(s, _)| s.len()).sum());
    for (s, scale) in blocks {
        if !(scale.is_finite() && *scale > 0.0) {
            return Err(invalid(format!("direct-sum scale must be positive, got {scale}")));
        }
        pairs.extend(s.values.iter().zip(&s.weights).map(|(&v, &w)| (v, w * scale)));
    }
    SingularSpectrum::from_pairs(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d321() -> SingularSpectrum {
        singular_spectrum(&TracialMatrix::diagonal(&[3.0, 1.0, 2.0], 1.0 / 3.0).unwrap()).unwrap()
    }

    #[test]
    fn diagonal_spectrum_is_sorted() {
        let s = d321();
        assert_eq!(s.values(), &[3.0, 2.0, 1.0]);
        assert_eq!(s.weights(), &[1.0 / 3.0; 3]);
    }

    #[test]
    fn pauli_x_spectrum_merges() {
        let x = CMatrix::from_fn(2, |i, j| Complex64::new(if i != j { 1.0 } else { 0.0 }, 0.0));
        let s = singular_spectrum(&TracialMatrix::new(x, 0.5).unwrap()).unwrap();
        assert_eq!(s.len(), 1);
        assert!((s.values()[0] - 1.0).abs() < 1e-15);
        assert_eq!(s.weights()[0], 1.0);
    }

    #[test]
    fn lambda_examples() {
        let s = d321();
        assert!((s.lambda_at(1.5) - 2.0 / 3.0).abs() < 1e-15);
        assert!((s.lambda_at(2.0) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(s.lambda_at(3.0), 0.0);
    }

    #[test]
    fn mu_examples() {
        let s = d321();
        assert_eq!(s.mu_at(0.5), 2.0);
        assert_eq!(s.mu_at(0.2), 3.0);
        assert_eq!(s.mu_at(1.0), 0.0);
    }

    #[test]
    fn mu_lambda_generalized_inverse() {
        let s = d321();
        for i in 1..200 {
            let t = i as f64 * 0.006;
            assert!(s.lambda_at(s.mu_at(t)) <= t + 1e-15);
        }
    }

    #[test]
    fn truncate_diagonal() {
        let x = TracialMatrix::diagonal(&[3.0, 2.0, 1.0], 1.0 / 3.0).unwrap();
        let (head, tail) = spectral_truncate(&x, 1.5).unwrap();
        let want_head = CMatrix::from_real_diagonal(&[3.0, 2.0, 0.0]);
        let want_tail = CMatrix::from_real_diagonal(&[0.0, 0.0, 1.0]);
        assert!(head.matrix().max_abs_diff(&want_head) < 1e-15);
        assert!(tail.matrix().max_abs_diff(&want_tail) < 1e-15);
        let (head, tail) = spectral_truncate(&x, 5.0).unwrap();
        assert_eq!(head.matrix(), &CMatrix::zeros(3));
        assert!(tail.matrix().max_abs_diff(x.matrix()) == 0.0);
        assert!(spectral_truncate(&x, 0.0).is_err());
    }

    #[test]
    fn direct_sum_examples() {
        let one = SingularSpectrum::uniform(&[1.0], 1.0).unwrap();
        let two = SingularSpectrum::uniform(&[2.0], 1.0).unwrap();
        let s = direct_sum(&[(one.clone(), 0.5), (one.clone(), 0.5)]).unwrap();
        assert_eq!((s.values(), s.weights()), (&[1.0][..], &[1.0][..]));
        let s = direct_sum(&[(two, 0.5), (one, 0.5)]).unwrap();
        assert_eq!((s.values(), s.weights()), (&[2.0, 1.0][..], &[0.5, 0.5][..]));
        assert!(direct_sum(&[]).is_err());
    }

    #[test]
    fn invalid_inputs() {
        assert!(TracialMatrix::diagonal(&[1.0], 0.0).is_err());
        assert!(TracialMatrix::diagonal(&[f64::NAN], 1.0).is_err());
        assert!(SingularSpectrum::from_pairs(vec![(-1.0, 1.0)]).is_err());
        assert!(SingularSpectrum::from_pairs(vec![(1.0, 0.0)]).is_err());
    }

    #[test]
    fn zero_matrix_has_zero_spectrum() {
        let s = singular_spectrum(&TracialMatrix::zero(3, 1.0 / 3.0).unwrap()).unwrap();
        assert!(s.is_zero());
        assert!((s.total_weight() - 1.0).abs() < 1e-15);
    }
}
