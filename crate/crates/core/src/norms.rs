//! Norm-like functionals on singular spectra.
//!
//! With steps `(v_i, w_i)` and cumulative weights `T_i`, the condition
//! `tΦ(μ_t/c) ≤ 1 ∀t` only has to be checked at the right end of each
//! step, which turns the weak Orlicz quasi-norm into
//! `max_i v_i / Φ⁻¹(1/T_i)` and the weak Φ-moment into `max_i T_i Φ(v_i)`.
//! The λ-side description is computed independently by bisection on `c`
//! and serves as a cross-check.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::CMatrix;
use crate::numeric::{bisect_decreasing, bracket_decreasing, golden_max};
use crate::orlicz::{Family, OrliczFunction};
use crate::spectral::{spectrum_of_gram, SingularSpectrum, TracialMatrix};

const GOLDEN_MAX_ITER: usize = 64;
const GOLDEN_TOL: f64 = 1e-10;
const LUXEMBURG_REL_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NormForm {
    WeakOrliczMu,
    WeakOrliczLambda,
    PhiMoment,
    Luxemburg,
    WeakLp(f64),
    BanachRenorm,
    ColumnSquare,
    RowSquare,
}

impl fmt::Display for NormForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormForm::WeakOrliczMu => f.write_str("weak_orlicz_mu"),
            NormForm::WeakOrliczLambda => f.write_str("weak_orlicz_lambda"),
            NormForm::PhiMoment => f.write_str("phi_moment"),
            NormForm::Luxemburg => f.write_str("luxemburg"),
            NormForm::WeakLp(p) => write!(f, "weak_lp:{p}"),
            NormForm::BanachRenorm => f.write_str("banach_renorm"),
            NormForm::ColumnSquare => f.write_str("column_square"),
            NormForm::RowSquare => f.write_str("row_square"),
        }
    }
}

impl Serialize for NormForm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMethod {
    ClosedForm,
    Bisection,
    PiecewiseMax,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormResult {
    pub value: f64,
    pub form: NormForm,
    pub method: NormMethod,
}

impl NormResult {
    fn new(value: f64, form: NormForm, method: NormMethod) -> Self {
        NormResult { value, form, method }
    }
}

/// 1/Φ⁻¹(1/T), exact for pure powers so that the weak-L_p route and the
/// Orlicz route with Φ = t^p agree bit for bit.
fn weak_step_factor(phi: &OrliczFunction, t: f64) -> f64 {
    match phi.family() {
        Family::Power { p } => t.powf(1.0 / p),
        Family::ScaledPower { lambda, p } => (lambda * t).powf(1.0 / p),
        _ => 1.0 / phi.inverse_value(1.0 / t),
    }
}

/// ‖x‖_{L_Φ^w} = inf{c : tΦ(μ_t/c) ≤ 1 ∀t}, in closed form.
pub fn weak_orlicz_norm(s: &SingularSpectrum, phi: &OrliczFunction) -> NormResult {
    let value = s
        .steps()
        .filter(|&(v, _)| v > 0.0)
        .map(|(v, t)| v * weak_step_factor(phi, t))
        .fold(0.0, f64::max);
    NormResult::new(value, NormForm::WeakOrliczMu, NormMethod::ClosedForm)
}

/// sup_t tΦ(μ_t/c) evaluated at step ends.
pub fn sup_moment_at(s: &SingularSpectrum, phi: &OrliczFunction, c: f64) -> f64 {
    s.steps()
        .filter(|&(v, _)| v > 0.0)
        .map(|(v, t)| t * phi.value(v / c))
        .fold(0.0, f64::max)
}

/// The same quasi-norm through the distribution function:
/// inf{c : λ_s Φ(s/c) ≤ 1 ∀s}. On the λ-step `s ∈ [v_{i+1}, v_i)` the
/// level is `T_i` and the supremum is approached as `s → v_i`. Solved by
/// bisection on c without using Φ⁻¹.
pub fn weak_orlicz_norm_lambda(s: &SingularSpectrum, phi: &OrliczFunction) -> NormResult {
    let levels: Vec<(f64, f64)> = {
        // (s-endpoint, λ level just below it)
        let mut out = Vec::with_capacity(s.len());
        for (i, &v) in s.values().iter().enumerate() {
            if v > 0.0 {
                out.push((v, s.lambda_at(v) + s.weights()[i]));
            }
        }
        out
    };
    if levels.is_empty() {
        return NormResult::new(0.0, NormForm::WeakOrliczLambda, NormMethod::Bisection);
    }
    let f = |c: f64| {
        levels
            .iter()
            .map(|&(level, lam)| lam * phi.value(level / c))
            .fold(0.0, f64::max)
    };
    let (lo, hi) = bracket_decreasing(&f, 1.0, levels[0].0);
    let value = bisect_decreasing(f, 1.0, lo, hi, 0.0);
    NormResult::new(value, NormForm::WeakOrliczLambda, NormMethod::Bisection)
}

/// ‖x‖_{Φ_w} = sup_t tΦ(μ_t) = max_i T_i Φ(v_i).
pub fn phi_moment(s: &SingularSpectrum, phi: &OrliczFunction) -> NormResult {
    NormResult::new(sup_moment_at(s, phi, 1.0), NormForm::PhiMoment, NormMethod::ClosedForm)
}

/// Luxemburg norm inf{c : Σ w_i Φ(v_i/c) ≤ 1}.
pub fn luxemburg_norm(s: &SingularSpectrum, phi: &OrliczFunction) -> NormResult {
    if s.is_zero() {
        return NormResult::new(0.0, NormForm::Luxemburg, NormMethod::Bisection);
    }
    let f = |c: f64| {
        s.values()
            .iter()
            .zip(s.weights())
            .map(|(&v, &w)| w * phi.value(v / c))
            .sum::<f64>()
    };
    let (lo, hi) = bracket_decreasing(&f, 1.0, s.values()[0]);
    let value = bisect_decreasing(f, 1.0, lo, hi, LUXEMBURG_REL_TOL * 1e-5);
    NormResult::new(value, NormForm::Luxemburg, NormMethod::Bisection)
}

/// ‖x‖_{L_p^w} = sup_t t^{1/p} μ_t = max_i v_i T_i^{1/p}, any p > 0.
#[allow(clippy::neg_cmp_op_on_partial_ord)] // rejects NaN too
pub fn weak_lp_norm(s: &SingularSpectrum, p: f64) -> Result<NormResult> {
    if !(p > 0.0) {
        return Err(invalid(format!("weak L_p needs p > 0, got {p}")));
    }
    let value = s
        .steps()
        .filter(|&(v, _)| v > 0.0)
        .map(|(v, t)| v * t.powf(1.0 / p))
        .fold(0.0, f64::max);
    Ok(NormResult::new(value, NormForm::WeakLp(p), NormMethod::ClosedForm))
}

/// ∫_0^t μ_s ds for the step function.
pub fn integrated_mu(s: &SingularSpectrum, t: f64) -> f64 {
    let mut acc = 0.0;
    let mut start = 0.0;
    for (v, end) in s.steps() {
        if t <= end {
            return acc + v * (t - start);
        }
        acc += v * (end - start);
        start = end;
    }
    acc
}

/// Running average (1/t)∫_0^t μ_s ds.
pub fn hardy_average(s: &SingularSpectrum, t: f64) -> Result<f64> {
    if !(t.is_finite() && t > 0.0) {
        return Err(invalid(format!("Hardy average needs t > 0, got {t}")));
    }
    Ok(integrated_mu(s, t) / t)
}

/// sup_t tΦ(A(t)/c) for the running average A. Past the total weight the
/// function is nonincreasing (Φ(u)/u is nondecreasing), so only pieces
/// inside the support are searched.
fn renorm_sup(s: &SingularSpectrum, phi: &OrliczFunction, c: f64) -> f64 {
    let mut best: f64 = 0.0;
    let mut start = 0.0;
    let mut integral = 0.0;
    for (v, end) in s.steps() {
        let (t0, i0) = (start, integral);
        let g = |t: f64| t * phi.value((i0 + v * (t - t0)) / (t * c));
        if t0 > 0.0 {
            best = best.max(g(t0));
        }
        best = best.max(g(end));
        let (_, interior) = golden_max(g, t0, end, GOLDEN_TOL, GOLDEN_MAX_ITER);
        best = best.max(interior);
        integral += v * (end - start);
        start = end;
    }
    best
}

/// Banach renorming inf{c : sup_t tΦ(A(t)/c) ≤ 1} where A is the Hardy
/// average of μ. Always at least the weak quasi-norm since A ≥ μ.
pub fn banach_renorm(s: &SingularSpectrum, phi: &OrliczFunction) -> NormResult {
    if s.is_zero() {
        return NormResult::new(0.0, NormForm::BanachRenorm, NormMethod::PiecewiseMax);
    }
    let f = |c: f64| renorm_sup(s, phi, c);
    let start = weak_orlicz_norm(s, phi).value;
    let (lo, hi) = bracket_decreasing(&f, 1.0, start);
    let value = bisect_decreasing(f, 1.0, lo, hi, 0.0);
    NormResult::new(value, NormForm::BanachRenorm, NormMethod::PiecewiseMax)
}

fn check_family(xs: &[TracialMatrix]) -> Result<()> {
    let first = xs.first().ok_or_else(|| invalid("empty matrix family"))?;
    for x in &xs[1..] {
        first.checked_compatible(x)?;
    }
    Ok(())
}

fn sum_grams<F: Fn(&TracialMatrix) -> CMatrix>(xs: &[TracialMatrix], gram: F) -> CMatrix {
    let mut acc = CMatrix::zeros(xs[0].dim());
    for x in xs {
        acc = &acc + &gram(x);
    }
    acc
}

/// Spectrum of (Σ x_k* x_k)^{1/2}.
pub fn column_square_spectrum(xs: &[TracialMatrix]) -> Result<SingularSpectrum> {
    check_family(xs)?;
    spectrum_of_gram(&sum_grams(xs, |x| x.matrix().gram()), xs[0].weight())
}

/// Spectrum of (Σ x_k x_k*)^{1/2}.
pub fn row_square_spectrum(xs: &[TracialMatrix]) -> Result<SingularSpectrum> {
    check_family(xs)?;
    spectrum_of_gram(&sum_grams(xs, |x| x.matrix().gram_row()), xs[0].weight())
}

pub fn column_square_norm(xs: &[TracialMatrix], phi: &OrliczFunction) -> Result<NormResult> {
    let v = weak_orlicz_norm(&column_square_spectrum(xs)?, phi).value;
    Ok(NormResult::new(v, NormForm::ColumnSquare, NormMethod::ClosedForm))
}

pub fn row_square_norm(xs: &[TracialMatrix], phi: &OrliczFunction) -> Result<NormResult> {
    let v = weak_orlicz_norm(&row_square_spectrum(xs)?, phi).value;
    Ok(NormResult::new(v, NormForm::RowSquare, NormMethod::ClosedForm))
}

/// Empirical norm of the dilation t ↦ μ_{t/s} over a corpus: the largest
/// ratio ‖D_s x‖/‖x‖ seen. A lower bound for the operator norm.
pub fn dilation_norm_estimate(phi: &OrliczFunction, scale: f64, corpus: &[SingularSpectrum]) -> Result<f64> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(invalid(format!("dilation scale must be positive, got {scale}")));
    }
    if corpus.is_empty() {
        return Err(invalid("dilation estimate needs a nonempty corpus"));
    }
    Ok(corpus
        .iter()
        .filter(|s| !s.is_zero())
        .map(|s| weak_orlicz_norm(&s.dilated(scale), phi).value / weak_orlicz_norm(s, phi).value)
        .fold(0.0, f64::max))
}

/// Best value found for inf ‖(Σ|y_k|²)^{1/2}‖_{Φ_w} + ‖(Σ|z_k*|²)^{1/2}‖_{Φ_w}
/// over splits `y_k = t_k x_k`, `z_k = (1 - t_k) x_k`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecompositionBound {
    pub value: f64,
    pub column_only: f64,
    pub row_only: f64,
    pub evaluations: usize,
    pub split: Vec<f64>,
}

const SPLIT_GRID: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

/// Coordinate descent over `t_k ∈ {0, 1/4, 1/2, 3/4, 1}` starting from the
/// better of the all-column and all-row splits, capped at `budget`
/// evaluations beyond those two. Only ever an upper bound on the infimum.
pub fn column_row_decomposition_bound(
    xs: &[TracialMatrix],
    phi: &OrliczFunction,
    budget: usize,
) -> Result<DecompositionBound> {
    check_family(xs)?;
    let weight = xs[0].weight();
    let cols: Vec<CMatrix> = xs.iter().map(|x| x.matrix().gram()).collect();
    let rows: Vec<CMatrix> = xs.iter().map(|x| x.matrix().gram_row()).collect();
    let eval = |split: &[f64]| -> Result<f64> {
        let mut gc = CMatrix::zeros(xs[0].dim());
        let mut gr = CMatrix::zeros(xs[0].dim());
        for (k, &t) in split.iter().enumerate() {
            if t != 0.0 {
                gc = &gc + &cols[k].scale_real(t * t);
            }
            if t != 1.0 {
                gr = &gr + &rows[k].scale_real((1.0 - t) * (1.0 - t));
            }
        }
        Ok(phi_moment(&spectrum_of_gram(&gc, weight)?, phi).value
            + phi_moment(&spectrum_of_gram(&gr, weight)?, phi).value)
    };
    let k = xs.len();
    let column_only = eval(&vec![1.0; k])?;
    let row_only = eval(&vec![0.0; k])?;
    let (mut split, mut best) = if column_only <= row_only {
        (vec![1.0; k], column_only)
    } else {
        (vec![0.0; k], row_only)
    };
    let mut evaluations = 0;
    'outer: while evaluations < budget {
        let mut improved = false;
        for idx in 0..k {
            for &g in &SPLIT_GRID {
                if g == split[idx] {
                    continue;
                }
                if evaluations >= budget {
                    break 'outer;
                }
                let mut cand = split.clone();
                cand[idx] = g;
                let v = eval(&cand)?;
                evaluations += 1;
                if v < best {
                    best = v;
                    split = cand;
                    improved = true;
                }
            }
        }
        if !improved {
            break;
        }
    }
    Ok(DecompositionBound {
        value: best,
        column_only,
        row_only,
        evaluations,
        split,
    })
}
