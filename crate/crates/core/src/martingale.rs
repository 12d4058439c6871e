//! Dyadic matrix filtrations M_0 ⊂ M_1 ⊂ … ⊂ M_m inside M_{2^m}, with
//! M_k = M_{2^k} ⊗ I_{2^{m-k}}. The conditional expectation onto M_k
//! replaces each `2^{m-k}`-sized block by its normalized trace times the
//! identity, so every E_k is an exact block mean.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::linalg::CMatrix;
use crate::norms::{column_row_decomposition_bound, column_square_spectrum, phi_moment, row_square_spectrum, DecompositionBound};
use crate::orlicz::OrliczFunction;
use crate::spectral::TracialMatrix;

/// Largest supported number of levels (ambient dimension 2^10).
pub const MAX_LEVELS: usize = 10;
const MEMBERSHIP_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DyadicFiltration {
    levels: usize,
}

impl DyadicFiltration {
    pub fn new(levels: usize) -> Result<Self> {
        if levels == 0 || levels > MAX_LEVELS {
            return Err(invalid(format!("filtration levels must be in 1..={MAX_LEVELS}, got {levels}")));
        }
        Ok(DyadicFiltration { levels })
    }

    /// The filtration whose top algebra is M_n; `n` must be a power of two ≥ 2.
    pub fn for_dim(n: usize) -> Result<Self> {
        if n < 2 || !n.is_power_of_two() {
            return Err(invalid(format!("dyadic filtration needs a power-of-two dimension ≥ 2, got {n}")));
        }
        Self::new(n.trailing_zeros() as usize)
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn dim(&self) -> usize {
        1 << self.levels
    }

    fn check(&self, k: usize, x: &TracialMatrix) -> Result<()> {
        if k > self.levels {
            return Err(invalid(format!("level {k} outside 0..={}", self.levels)));
        }
        if x.dim() != self.dim() {
            return Err(invalid(format!("matrix dimension {} does not match filtration dimension {}", x.dim(), self.dim())));
        }
        Ok(())
    }

    /// E_k(x).
    pub fn conditional_expectation(&self, k: usize, x: &TracialMatrix) -> Result<TracialMatrix> {
        self.check(k, x)?;
        let block = 1usize << (self.levels - k);
        let blocks = 1usize << k;
        let a = x.matrix();
        let mut out = CMatrix::zeros(self.dim());
        let inv = 1.0 / block as f64;
        for bi in 0..blocks {
            for bj in 0..blocks {
                let mut tr = Complex64::new(0.0, 0.0);
                for t in 0..block {
                    tr += a[(bi * block + t, bj * block + t)];
                }
                let mean = tr * inv;
                for t in 0..block {
                    out[(bi * block + t, bj * block + t)] = mean;
                }
            }
        }
        Ok(x.with_matrix(out))
    }

    /// Whether x ∈ M_k up to a relative tolerance.
    pub fn contains(&self, k: usize, x: &TracialMatrix, tol: f64) -> Result<bool> {
        let e = self.conditional_expectation(k, x)?;
        let scale = 1.0 + x.matrix().frobenius();
        Ok(e.matrix().max_abs_diff(x.matrix()) <= tol * scale)
    }
}

/// A finite martingale x_0, …, x_m adapted to a dyadic filtration.
#[derive(Clone, Debug, PartialEq)]
pub struct MartingaleSequence {
    filtration: DyadicFiltration,
    elements: Vec<TracialMatrix>,
}

impl MartingaleSequence {
    /// Validates x_k ∈ M_k and E_k(x_{k+1}) = x_k to 1e-10.
    pub fn new(filtration: DyadicFiltration, elements: Vec<TracialMatrix>) -> Result<Self> {
        if elements.len() != filtration.levels() + 1 {
            return Err(invalid(format!(
                "martingale needs {} elements, got {}",
                filtration.levels() + 1,
                elements.len()
            )));
        }
        for (k, x) in elements.iter().enumerate() {
            if !filtration.contains(k, x, MEMBERSHIP_TOL)? {
                return Err(Error::PreconditionViolation(format!("element {k} is not in M_{k}")));
            }
            if k > 0 {
                elements[k - 1].checked_compatible(x)?;
                let e = filtration.conditional_expectation(k - 1, x)?;
                let scale = 1.0 + x.matrix().frobenius();
                if e.matrix().max_abs_diff(elements[k - 1].matrix()) > MEMBERSHIP_TOL * scale {
                    return Err(Error::PreconditionViolation(format!("E_{}(x_{k}) differs from x_{}", k - 1, k - 1)));
                }
            }
        }
        Ok(MartingaleSequence { filtration, elements })
    }

    pub fn filtration(&self) -> DyadicFiltration {
        self.filtration
    }

    pub fn elements(&self) -> &[TracialMatrix] {
        &self.elements
    }

    pub fn final_element(&self) -> &TracialMatrix {
        self.elements.last().expect("martingale has at least two elements")
    }

    /// dx_0 = x_0, dx_k = x_k - x_{k-1}.
    pub fn differences(&self) -> Vec<TracialMatrix> {
        let mut out = Vec::with_capacity(self.elements.len());
        out.push(self.elements[0].clone());
        for w in self.elements.windows(2) {
            out.push(w[1].with_matrix(w[1].matrix() - w[0].matrix()));
        }
        out
    }
}

/// x_k = E_k(x).
pub fn martingale_from_final(f: &DyadicFiltration, x: &TracialMatrix) -> Result<MartingaleSequence> {
    let elements = (0..=f.levels())
        .map(|k| f.conditional_expectation(k, x))
        .collect::<Result<Vec<_>>>()?;
    Ok(MartingaleSequence { filtration: *f, elements })
}

/// Martingale with differences α_k dx_k.
pub fn transform(mart: &MartingaleSequence, alpha: &[Complex64]) -> Result<MartingaleSequence> {
    let dx = mart.differences();
    if alpha.len() != dx.len() {
        return Err(invalid(format!("transform needs {} coefficients, got {}", dx.len(), alpha.len())));
    }
    let mut elements: Vec<TracialMatrix> = Vec::with_capacity(dx.len());
    for (k, (d, &a)) in dx.iter().zip(alpha).enumerate() {
        let term = d.matrix().scale(a);
        let next = if k == 0 { term } else { elements[k - 1].matrix() + &term };
        elements.push(d.with_matrix(next));
    }
    Ok(MartingaleSequence {
        filtration: mart.filtration,
        elements,
    })
}

/// (a_0, …, a_n) ↦ (E_0 a_0, …, E_n a_n).
pub fn stein_map(f: &DyadicFiltration, seq: &[TracialMatrix]) -> Result<Vec<TracialMatrix>> {
    if seq.len() > f.levels() + 1 {
        return Err(invalid(format!("Stein map takes at most {} elements, got {}", f.levels() + 1, seq.len())));
    }
    seq.iter()
        .enumerate()
        .map(|(n, a)| f.conditional_expectation(n, a))
        .collect()
}

/// Column and row square functions (Σ dx*dx)^{1/2} and (Σ dx dx*)^{1/2}.
pub fn square_functions(mart: &MartingaleSequence) -> Result<(TracialMatrix, TracialMatrix)> {
    let dx = mart.differences();
    let n = mart.filtration.dim();
    let mut col = CMatrix::zeros(n);
    let mut row = CMatrix::zeros(n);
    for d in &dx {
        col = &col + &d.matrix().gram();
        row = &row + &d.matrix().gram_row();
    }
    let w = dx[0].weight();
    Ok((
        TracialMatrix::new(col.psd_sqrt()?, w)?,
        TracialMatrix::new(row.psd_sqrt()?, w)?,
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BgRatio {
    pub lhs: f64,
    pub rhs: f64,
}

/// Φ-moments of x_m against those of the column plus row square functions.
pub fn bg_ratio(mart: &MartingaleSequence, phi: &OrliczFunction) -> Result<BgRatio> {
    let dx = mart.differences();
    let lhs = phi_moment(&crate::spectral::singular_spectrum(mart.final_element())?, phi).value;
    let rhs = phi_moment(&column_square_spectrum(&dx)?, phi).value + phi_moment(&row_square_spectrum(&dx)?, phi).value;
    Ok(BgRatio { lhs, rhs })
}

/// Upper bound for the decomposition infimum over dx_k = dy_k + dz_k.
pub fn bg_decomposition_bound(mart: &MartingaleSequence, phi: &OrliczFunction, search_budget: usize) -> Result<DecompositionBound> {
    column_row_decomposition_bound(&mart.differences(), phi, search_budget)
}
