mod common;

use num_complex::Complex64;
use proptest::prelude::*;
use wonc_core::corpus::{generate_member, CorpusSpec, Ensemble};
use wonc_core::rademacher::{assembled_operator, khintchine_lhs, rademacher_spectrum, RademacherSystem};
use wonc_core::spectral::singular_spectrum;
use wonc_core::{CMatrix, Exec, OrliczFunction, TracialMatrix};

fn system(max_k: usize, max_dim: usize) -> impl Strategy<Value = Vec<TracialMatrix>> {
    (1..=max_k, 1..=max_dim)
        .prop_flat_map(|(k, n)| (Just(n), prop::collection::vec(common::entries(n), k)))
        .prop_map(|(n, es)| {
            es.iter()
                .map(|e| TracialMatrix::normalized(CMatrix::from_fn(n, |i, j| Complex64::new(e[i * n + j].0, e[i * n + j].1))).unwrap())
                .collect()
        })
}

proptest! {
    #![proptest_config(common::config(64))]

    #[test]
    fn sign_flip_and_permutation_invariance(xs in system(5, 4), which in any::<prop::sample::Index>()) {
        let base = rademacher_spectrum(&RademacherSystem::new(xs.clone()).unwrap(), Exec::Sequential).unwrap();
        let k = which.index(xs.len());
        let mut flipped = xs.clone();
        flipped[k] = flipped[k].scale_real(-1.0);
        let f = rademacher_spectrum(&RademacherSystem::new(flipped).unwrap(), Exec::Sequential).unwrap();
        prop_assert_eq!(&f, &base);
        let mut perm = xs.clone();
        perm.rotate_left(k);
        let p = rademacher_spectrum(&RademacherSystem::new(perm).unwrap(), Exec::Sequential).unwrap();
        // a permutation reorders the patterns, so block eigenproblems see
        // different roundoff; values agree to a few ulps of the largest one
        prop_assert_eq!(p.len(), base.len());
        let top = base.values()[0].max(f64::MIN_POSITIVE);
        for (a, b) in p.values().iter().zip(base.values()) {
            prop_assert!((a - b).abs() <= 1e-12 * top);
        }
    }

    #[test]
    fn scaling_is_exact(xs in system(4, 3), k in -4i32..4, theta in 0.0..std::f64::consts::TAU) {
        let sys = RademacherSystem::new(xs).unwrap();
        let base = rademacher_spectrum(&sys, Exec::Sequential).unwrap();
        let a = 2f64.powi(k);
        let scaled = rademacher_spectrum(&sys.scaled(Complex64::new(a, 0.0)), Exec::Sequential).unwrap();
        prop_assert_eq!(scaled.values().to_vec(), base.values().iter().map(|v| v * a).collect::<Vec<_>>());
        let rotated = rademacher_spectrum(&sys.scaled(Complex64::from_polar(1.0, theta)), Exec::Sequential).unwrap();
        for (u, v) in rotated.values().iter().zip(base.values()) {
            prop_assert!((u - v).abs() <= 1e-12 * base.values()[0].max(1.0));
        }
    }

    #[test]
    fn l2_orthogonality(xs in system(5, 4)) {
        let sys = RademacherSystem::new(xs.clone()).unwrap();
        let s = rademacher_spectrum(&sys, Exec::Sequential).unwrap();
        let l2: f64 = s.values().iter().zip(s.weights()).map(|(v, w)| w * v * v).sum();
        let coeffs: f64 = xs.iter().map(|x| x.l2_norm_sq()).sum();
        prop_assert!(common::rel(l2, coeffs) <= 1e-10);
    }

    #[test]
    fn parallel_matches_sequential(xs in system(6, 3)) {
        let sys = RademacherSystem::new(xs).unwrap();
        prop_assert_eq!(
            rademacher_spectrum(&sys, Exec::Sequential).unwrap(),
            rademacher_spectrum(&sys, Exec::Parallel).unwrap()
        );
    }
}

#[test]
fn exhaustive_patterns_match_the_assembled_block_matrix() {
    let spec = CorpusSpec { seed: 42, instances: 20, dim: 4, ensemble: Ensemble::ComplexGinibre, scale: 1.0 };
    for i in 0..spec.instances {
        let xs: Vec<TracialMatrix> = (0..4).map(|m| generate_member(&spec, i, m).unwrap()).collect();
        let sys = RademacherSystem::new(xs).unwrap();
        let a = rademacher_spectrum(&sys, Exec::Parallel).unwrap();
        let b = singular_spectrum(&assembled_operator(&sys).unwrap()).unwrap();
        let top = a.values()[0];
        assert_eq!(a.len(), b.len());
        for j in 0..a.len() {
            assert!((a.values()[j] - b.values()[j]).abs() <= 1e-10 * top);
            assert!((a.weights()[j] - b.weights()[j]).abs() <= 1e-10);
        }
    }
}

#[test]
fn single_coefficient_khintchine_is_the_moment() {
    let phi = OrliczFunction::power_log(3.0, 1.0).unwrap();
    let spec = CorpusSpec { seed: 3, instances: 5, dim: 3, ensemble: Ensemble::HermitianGaussian, scale: 1.0 };
    for i in 0..spec.instances {
        let x = generate_member(&spec, i, 0).unwrap();
        let sys = RademacherSystem::new(vec![x.clone()]).unwrap();
        let lhs = khintchine_lhs(&sys, &phi, Exec::Sequential).unwrap();
        let direct = wonc_core::norms::phi_moment(&singular_spectrum(&x).unwrap(), &phi).value;
        assert!(common::rel(lhs, direct) <= 1e-12);
    }
}
