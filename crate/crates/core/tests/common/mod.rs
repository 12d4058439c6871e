#![allow(dead_code)]

use num_complex::Complex64;
use proptest::prelude::*;
use wonc_core::{CMatrix, OrliczFunction, TracialMatrix};

pub fn entries(n: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-3.0..3.0f64, -3.0..3.0f64), n * n)
}

/// Square complex matrices of dimension 1..=max_dim with trace weight 1/n
/// or a random positive weight.
pub fn tracial(max_dim: usize) -> impl Strategy<Value = TracialMatrix> {
    (1..=max_dim, any::<bool>(), 0.05..2.0f64)
        .prop_flat_map(|(n, normalized, w)| (Just(n), Just(normalized), Just(w), entries(n)))
        .prop_map(|(n, normalized, w, e)| {
            let m = CMatrix::from_fn(n, |i, j| {
                let (re, im) = e[i * n + j];
                Complex64::new(re, im)
            });
            TracialMatrix::new(m, if normalized { 1.0 / n as f64 } else { w }).unwrap()
        })
}

/// Two matrices sharing dimension and weight.
pub fn tracial_pair(max_dim: usize) -> impl Strategy<Value = (TracialMatrix, TracialMatrix)> {
    (1..=max_dim)
        .prop_flat_map(|n| (entries(n), entries(n)))
        .prop_map(|(a, b)| {
            let n = (a.len() as f64).sqrt() as usize;
            let mk = |e: &[(f64, f64)]| {
                TracialMatrix::normalized(CMatrix::from_fn(n, |i, j| Complex64::new(e[i * n + j].0, e[i * n + j].1)))
                    .unwrap()
            };
            (mk(&a), mk(&b))
        })
}

pub fn phi_named() -> impl Strategy<Value = OrliczFunction> {
    prop_oneof![
        Just("pow:1"),
        Just("pow:1.5"),
        Just("pow:2"),
        Just("pow:4"),
        Just("plog:1.2,0.5"),
        Just("plog:2,1"),
        Just("plog:3,1"),
        Just("psin:3,0.2"),
        Just("spow:2.5,3"),
    ]
    .prop_map(|s| s.parse().unwrap())
}

/// Families with 1 < a ≤ b < ∞.
pub fn phi_reflexive() -> impl Strategy<Value = OrliczFunction> {
    prop_oneof![
        Just("pow:1.5"),
        Just("pow:2"),
        Just("pow:4"),
        Just("plog:1.2,0.5"),
        Just("plog:2,1"),
        Just("plog:3,1"),
    ]
    .prop_map(|s| s.parse().unwrap())
}

pub fn rel(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}

/// Property-test settings shared by the integration tests: no regression
/// files, a fixed case count.
pub fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}
