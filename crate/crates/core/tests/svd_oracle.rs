//! Singular spectra checked against an independent one-sided Jacobi SVD
//! that never forms x*x.

mod common;

use num_complex::Complex64;
use proptest::prelude::*;
use wonc_core::corpus::{generate_member, CorpusSpec, Ensemble};
use wonc_core::spectral::singular_spectrum;
use wonc_core::TracialMatrix;

/// Singular values (descending) by one-sided Hestenes–Jacobi rotations on
/// the columns of x.
fn one_sided_jacobi(x: &TracialMatrix) -> Vec<f64> {
    let n = x.dim();
    let m = x.matrix();
    let mut cols: Vec<Vec<Complex64>> = (0..n).map(|j| (0..n).map(|i| m[(i, j)]).collect()).collect();
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = cols[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = cols[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma: Complex64 = cols[p].iter().zip(&cols[q]).map(|(a, b)| a.conj() * b).sum();
                if gamma.norm() <= 1e-15 * (alpha * beta).sqrt() || gamma.norm() == 0.0 {
                    continue;
                }
                rotated = true;
                let phase = gamma / gamma.norm();
                let zeta = (beta - alpha) / (2.0 * gamma.norm());
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                #[allow(clippy::needless_range_loop)]
                for i in 0..n {
                    let a = cols[p][i];
                    let b = cols[q][i];
                    cols[p][i] = a * c - b * phase.conj() * s;
                    cols[q][i] = a * phase * s + b * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = cols.iter().map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()).collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Expands a spectrum back into a list of values, one per unit of weight.
fn expand(x: &TracialMatrix) -> Vec<f64> {
    let s = singular_spectrum(x).unwrap();
    let mut out = Vec::new();
    for (v, w) in s.values().iter().zip(s.weights()) {
        let count = (w / x.weight()).round() as usize;
        out.extend(std::iter::repeat_n(*v, count));
    }
    out.resize(x.dim(), 0.0);
    out
}

fn assert_agrees(x: &TracialMatrix) {
    let ours = expand(x);
    let oracle = one_sided_jacobi(x);
    let top = oracle[0].max(1e-300);
    for (a, b) in ours.iter().zip(&oracle) {
        assert!((a - b).abs() <= 1e-10 * top, "{ours:?} vs {oracle:?}");
    }
}

#[test]
fn agrees_on_every_ensemble() {
    for ensemble in Ensemble::ALL {
        for dim in [1, 2, 3, 5, 8, 16] {
            let spec = CorpusSpec { seed: 11, instances: 10, dim, ensemble, scale: 1.0 };
            for i in 0..spec.instances {
                assert_agrees(&generate_member(&spec, i, 0).unwrap());
            }
        }
    }
}

proptest! {
    #![proptest_config(common::config(128))]

    #[test]
    fn agrees_on_random_matrices(x in common::tracial(7)) {
        assert_agrees(&x);
    }

    #[test]
    fn adjoint_has_the_same_spectrum(x in common::tracial(7)) {
        let a = singular_spectrum(&x).unwrap();
        let b = singular_spectrum(&x.adjoint()).unwrap();
        let top = a.values().first().copied().unwrap_or(0.0);
        let (ea, eb) = (expand(&x), expand(&x.adjoint()));
        for (u, v) in ea.iter().zip(&eb) {
            prop_assert!((u - v).abs() <= 1e-12 * top.max(1.0));
        }
        prop_assert!(common::rel(a.total_weight(), b.total_weight()) <= 1e-12);
    }
}
