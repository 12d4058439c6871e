//! Rademacher sums Σ ε_k x_k in L_∞(Ω) ⊗ M with Ω = {±1}^K realized
//! exhaustively: the sum is the block diagonal operator with one block per
//! sign pattern, each carrying probability 2^{-K}.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::exec::Exec;
use crate::linalg::CMatrix;
use crate::norms::{column_row_decomposition_bound, column_square_spectrum, phi_moment, row_square_spectrum, DecompositionBound};
use crate::orlicz::OrliczFunction;
use crate::spectral::{direct_sum, singular_spectrum, SingularSpectrum, TracialMatrix};

/// Largest K enumerated exhaustively.
pub const MAX_RADEMACHER: usize = 12;

#[derive(Clone, Debug, PartialEq)]
pub struct RademacherSystem {
    xs: Vec<TracialMatrix>,
}

impl RademacherSystem {
    pub fn new(xs: Vec<TracialMatrix>) -> Result<Self> {
        let first = xs.first().ok_or_else(|| invalid("Rademacher system needs at least one coefficient"))?;
        for x in &xs[1..] {
            first.checked_compatible(x)?;
        }
        Ok(RademacherSystem { xs })
    }

    pub fn k(&self) -> usize {
        self.xs.len()
    }

    pub fn coefficients(&self) -> &[TracialMatrix] {
        &self.xs
    }

    pub fn patterns(&self) -> usize {
        1 << self.k()
    }

    fn check_size(&self) -> Result<()> {
        if self.k() > MAX_RADEMACHER {
            return Err(Error::ResourceLimit(format!(
                "{} Rademacher variables exceed the exhaustive bound {MAX_RADEMACHER}",
                self.k()
            )));
        }
        Ok(())
    }

    /// F_ω = Σ ω_k x_k, where bit k of `pattern` set means ω_k = -1.
    pub fn pattern_block(&self, pattern: usize) -> TracialMatrix {
        let mut acc = CMatrix::zeros(self.xs[0].dim());
        for (k, x) in self.xs.iter().enumerate() {
            acc = if pattern >> k & 1 == 1 { &acc - x.matrix() } else { &acc + x.matrix() };
        }
        self.xs[0].with_matrix(acc)
    }

    /// α·x_k for every k.
    pub fn scaled(&self, alpha: Complex64) -> RademacherSystem {
        RademacherSystem {
            xs: self.xs.iter().map(|x| x.scale(alpha)).collect(),
        }
    }
}

/// μ of Σ ε_k x_k under the product trace.
pub fn rademacher_spectrum(sys: &RademacherSystem, exec: Exec) -> Result<SingularSpectrum> {
    sys.check_size()?;
    let scale = 1.0 / sys.patterns() as f64;
    let blocks = exec.try_map_range(sys.patterns(), |w| -> Result<(SingularSpectrum, f64)> {
        Ok((singular_spectrum(&sys.pattern_block(w))?, scale))
    })?;
    direct_sum(&blocks)
}

/// The block diagonal operator ⊕_ω F_ω with trace weight w·2^{-K}.
/// Serves as an explicit oracle for [`rademacher_spectrum`].
pub fn assembled_operator(sys: &RademacherSystem) -> Result<TracialMatrix> {
    sys.check_size()?;
    let n = sys.xs[0].dim();
    let blocks: Vec<TracialMatrix> = (0..sys.patterns()).map(|w| sys.pattern_block(w)).collect();
    let big = CMatrix::from_fn(n * blocks.len(), |i, j| {
        if i / n == j / n {
            blocks[i / n].matrix()[(i % n, j % n)]
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    TracialMatrix::new(big, sys.xs[0].weight() / sys.patterns() as f64)
}

/// ‖Σ ε_k x_k‖_{Φ_w}.
pub fn khintchine_lhs(sys: &RademacherSystem, phi: &OrliczFunction, exec: Exec) -> Result<f64> {
    Ok(phi_moment(&rademacher_spectrum(sys, exec)?, phi).value)
}

/// ‖(Σ|x_k|²)^{1/2}‖_{Φ_w} + ‖(Σ|x_k*|²)^{1/2}‖_{Φ_w}.
pub fn rc_sum_norm(sys: &RademacherSystem, phi: &OrliczFunction) -> Result<f64> {
    Ok(phi_moment(&column_square_spectrum(&sys.xs)?, phi).value + phi_moment(&row_square_spectrum(&sys.xs)?, phi).value)
}

/// Best decomposition x_k = y_k + z_k found within `budget` evaluations.
pub fn decomposition_infimum_bound(sys: &RademacherSystem, phi: &OrliczFunction, budget: usize) -> Result<DecompositionBound> {
    column_row_decomposition_bound(&sys.xs, phi, budget)
}
