//! Matrix-valued trigonometric polynomials f(z) = Σ a_k z^k on the circle,
//! with L_∞(T) ⊗ M realized by J equispaced samples of weight 1/J each.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::exec::Exec;
use crate::linalg::CMatrix;
use crate::spectral::{direct_sum, singular_spectrum, spectrum_of_gram, SingularSpectrum, TracialMatrix};

/// Degree cap; 81 = 3^4 covers the bands I_0 … I_4.
pub const MAX_DEGREE: i64 = 81;

#[derive(Clone, Debug, PartialEq)]
pub struct OperatorTrigPolynomial {
    dim: usize,
    weight: f64,
    coeffs: BTreeMap<i64, CMatrix>,
}

impl OperatorTrigPolynomial {
    pub fn zero(dim: usize, weight: f64) -> Result<Self> {
        // reuse TracialMatrix validation for dim and weight
        TracialMatrix::zero(dim, weight)?;
        Ok(OperatorTrigPolynomial {
            dim,
            weight,
            coeffs: BTreeMap::new(),
        })
    }

    pub fn from_coefficients(dim: usize, weight: f64, coeffs: BTreeMap<i64, CMatrix>) -> Result<Self> {
        let mut f = Self::zero(dim, weight)?;
        for (k, a) in coeffs {
            f.set(k, a)?;
        }
        Ok(f)
    }

    pub fn monomial(a: &TracialMatrix, k: i64) -> Result<Self> {
        let mut f = Self::zero(a.dim(), a.weight())?;
        f.set(k, a.matrix().clone())?;
        Ok(f)
    }

    pub fn set(&mut self, k: i64, a: CMatrix) -> Result<()> {
        if k.abs() > MAX_DEGREE {
            return Err(invalid(format!("frequency {k} exceeds the degree cap {MAX_DEGREE}")));
        }
        if a.dim() != self.dim {
            return Err(invalid(format!("coefficient dimension {} differs from {}", a.dim(), self.dim)));
        }
        if !a.is_finite() {
            return Err(invalid("coefficient has non-finite entries"));
        }
        self.coeffs.insert(k, a);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn coefficients(&self) -> &BTreeMap<i64, CMatrix> {
        &self.coeffs
    }

    /// Largest |k| with a stored coefficient (0 for the zero polynomial).
    pub fn degree(&self) -> usize {
        self.coeffs.keys().map(|k| k.unsigned_abs() as usize).max().unwrap_or(0)
    }

    pub fn is_analytic(&self) -> bool {
        self.coeffs.keys().all(|&k| k >= 0)
    }

    /// f(e^{2πi j/J}), with z^k reduced through (j·k mod J) so the phases
    /// are exact on the sample grid.
    pub fn sample(&self, j: usize, samples: usize) -> CMatrix {
        let mut acc = CMatrix::zeros(self.dim);
        for (&k, a) in &self.coeffs {
            acc = &acc + &a.scale(root_of_unity(j as i64 * k, samples));
        }
        acc
    }

    pub fn evaluate(&self, z: Complex64) -> CMatrix {
        let mut acc = CMatrix::zeros(self.dim);
        for (&k, a) in &self.coeffs {
            acc = &acc + &a.scale(z.powi(k as i32));
        }
        acc
    }

    fn map_coeffs<F: Fn(i64, &CMatrix) -> Option<(i64, CMatrix)>>(&self, f: F) -> Self {
        OperatorTrigPolynomial {
            dim: self.dim,
            weight: self.weight,
            coeffs: self.coeffs.iter().filter_map(|(&k, a)| f(k, a)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim || self.weight != other.weight {
            return Err(invalid("polynomials live in different algebras"));
        }
        let mut out = self.clone();
        for (&k, b) in &other.coeffs {
            let sum = match out.coeffs.get(&k) {
                Some(a) => a + b,
                None => b.clone(),
            };
            out.coeffs.insert(k, sum);
        }
        Ok(out)
    }

    pub fn scale(&self, alpha: Complex64) -> Self {
        self.map_coeffs(|k, a| Some((k, a.scale(alpha))))
    }

    /// z^m·f.
    pub fn shift(&self, m: i64) -> Result<Self> {
        let mut out = Self::zero(self.dim, self.weight)?;
        for (&k, a) in &self.coeffs {
            out.set(k + m, a.clone())?;
        }
        Ok(out)
    }
}

fn root_of_unity(m: i64, samples: usize) -> Complex64 {
    let r = m.rem_euclid(samples as i64) as f64;
    Complex64::from_polar(1.0, 2.0 * PI * r / samples as f64)
}

/// The stored coefficient f̂(n), or zero.
pub fn fourier_coefficient(f: &OperatorTrigPolynomial, n: i64) -> TracialMatrix {
    let m = f.coeffs.get(&n).cloned().unwrap_or_else(|| CMatrix::zeros(f.dim));
    TracialMatrix::new(m, f.weight).expect("coefficients are validated on insertion")
}

/// f̂(n) recomputed from J = 2d + 1 samples, exact for degree ≤ d.
/// Frequencies beyond the degree would alias on that grid and are zero.
pub fn fourier_coefficient_dft(f: &OperatorTrigPolynomial, n: i64) -> TracialMatrix {
    let samples = 2 * f.degree() + 1;
    let mut acc = CMatrix::zeros(f.dim);
    if n.unsigned_abs() as usize > f.degree() {
        return TracialMatrix::new(acc, f.weight).expect("zero matrix");
    }
    for j in 0..samples {
        acc = &acc + &f.sample(j, samples).scale(root_of_unity(-(j as i64) * n, samples));
    }
    TracialMatrix::new(acc.scale_real(1.0 / samples as f64), f.weight).expect("finite samples")
}

pub fn default_samples(degree: usize) -> usize {
    64.max(8 * degree)
}

fn check_samples(f: &OperatorTrigPolynomial, samples: usize) -> Result<()> {
    if samples < 2 * f.degree() + 1 {
        return Err(invalid(format!("{samples} samples cannot resolve degree {}", f.degree())));
    }
    Ok(())
}

/// μ of f over L_∞(T) ⊗ M, sampled at J points.
pub fn torus_spectrum(f: &OperatorTrigPolynomial, samples: Option<usize>, exec: Exec) -> Result<SingularSpectrum> {
    let samples = samples.unwrap_or_else(|| default_samples(f.degree()));
    check_samples(f, samples)?;
    let scale = 1.0 / samples as f64;
    let blocks = exec.try_map_range(samples, |j| -> Result<(SingularSpectrum, f64)> {
        Ok((singular_spectrum(&TracialMatrix::new(f.sample(j, samples), f.weight)?)?, scale))
    })?;
    direct_sum(&blocks)
}

/// μ of (Σ_k |f_k|²)^{1/2} over L_∞(T) ⊗ M, sampled at J points.
pub fn torus_column_square_spectrum(fs: &[OperatorTrigPolynomial], samples: usize, exec: Exec) -> Result<SingularSpectrum> {
    let first = fs.first().ok_or_else(|| invalid("empty polynomial family"))?;
    for f in fs {
        check_samples(f, samples)?;
        if f.dim != first.dim || f.weight != first.weight {
            return Err(invalid("polynomials live in different algebras"));
        }
    }
    let scale = 1.0 / samples as f64;
    let blocks = exec.try_map_range(samples, |j| -> Result<(SingularSpectrum, f64)> {
        let mut g = CMatrix::zeros(first.dim);
        for f in fs {
            g = &g + &f.sample(j, samples).gram();
        }
        Ok((spectrum_of_gram(&g, first.weight)?, scale))
    })?;
    direct_sum(&blocks)
}

/// Integer frequencies in I_n = (3^n/2, 3^n].
pub fn lacunary_band(n: u32) -> std::ops::RangeInclusive<i64> {
    let top = 3i64.pow(n);
    (top / 2 + 1)..=top
}

/// Bands I_n meeting [0, degree].
pub fn lacunary_bands_up_to(degree: usize) -> Vec<u32> {
    (0..).take_while(|&n| *lacunary_band(n).start() <= degree as i64).collect()
}

/// Δ_n f = Σ_{k ∈ I_n} f̂(k) z^k.
pub fn delta_multiplier(f: &OperatorTrigPolynomial, n: u32) -> OperatorTrigPolynomial {
    let band = lacunary_band(n);
    f.map_coeffs(|k, a| band.contains(&k).then(|| (k, a.clone())))
}
