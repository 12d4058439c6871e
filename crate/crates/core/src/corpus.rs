//! Seeded random matrix corpora.
//!
//! Every entry is drawn from a ChaCha8 stream keyed by the seed, with the
//! instance index as stream id and the position fixed by (member, entry).
//! Entries therefore do not depend on generation order, which keeps
//! parallel generation byte-identical to sequential generation.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{invalid, Result};
use crate::exec::Exec;
use crate::linalg::CMatrix;
use crate::spectral::TracialMatrix;

/// 32-bit words reserved per entry in the keystream.
const WORDS_PER_ENTRY: u128 = 8;
const LOG_UNIFORM_MIN: f64 = 1e-3;
const LOG_UNIFORM_MAX: f64 = 1e3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ensemble {
    ComplexGinibre,
    HermitianGaussian,
    DiagonalLogUniform,
    Unitary,
}

impl Ensemble {
    pub const ALL: [Ensemble; 4] = [
        Ensemble::ComplexGinibre,
        Ensemble::HermitianGaussian,
        Ensemble::DiagonalLogUniform,
        Ensemble::Unitary,
    ];
}

impl std::str::FromStr for Ensemble {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "complex_ginibre" | "ginibre" => Ok(Ensemble::ComplexGinibre),
            "hermitian_gaussian" | "hermitian" => Ok(Ensemble::HermitianGaussian),
            "diagonal_log_uniform" | "diagonal" => Ok(Ensemble::DiagonalLogUniform),
            "unitary" => Ok(Ensemble::Unitary),
            other => Err(invalid(format!("unknown ensemble {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSpec {
    pub seed: u64,
    pub instances: usize,
    pub dim: usize,
    pub ensemble: Ensemble,
    pub scale: f64,
}

impl CorpusSpec {
    pub fn validate(&self) -> Result<()> {
        if self.instances == 0 {
            return Err(invalid("corpus needs at least one instance"));
        }
        if self.dim == 0 {
            return Err(invalid("corpus dimension must be at least 1"));
        }
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return Err(invalid(format!("corpus scale must be positive, got {}", self.scale)));
        }
        Ok(())
    }
}

/// Position-addressed draws for one (seed, instance, member) triple.
struct EntryStream {
    rng: ChaCha8Rng,
    member: u128,
}

impl EntryStream {
    fn new(seed: u64, instance: usize, member: usize) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(instance as u64);
        EntryStream { rng, member: member as u128 }
    }

    fn seek(&mut self, entry: usize) {
        self.rng
            .set_word_pos((self.member << 32) + entry as u128 * WORDS_PER_ENTRY);
    }

    /// Uniform on (0, 1].
    fn open_unit(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard complex Gaussian (E|z|² = 1) at `entry`, by Box–Muller.
    fn complex_gaussian(&mut self, entry: usize) -> Complex64 {
        self.seek(entry);
        let u1 = self.open_unit();
        let u2 = self.open_unit();
        Complex64::from_polar((-u1.ln()).sqrt(), 2.0 * PI * u2)
    }

    fn uniform(&mut self, entry: usize) -> f64 {
        self.seek(entry);
        self.open_unit()
    }
}

fn ginibre(stream: &mut EntryStream, n: usize) -> CMatrix {
    CMatrix::from_fn(n, |i, j| stream.complex_gaussian(i * n + j))
}

/// One matrix of an instance; multi-matrix suites use `member > 0` for the
/// additional coefficients. Weight is the normalized 1/dim.
pub fn generate_member(spec: &CorpusSpec, instance: usize, member: usize) -> Result<TracialMatrix> {
    spec.validate()?;
    let n = spec.dim;
    let mut stream = EntryStream::new(spec.seed, instance, member);
    let m = match spec.ensemble {
        Ensemble::ComplexGinibre => ginibre(&mut stream, n).scale_real(spec.scale),
        Ensemble::HermitianGaussian => {
            let g = ginibre(&mut stream, n);
            let mut h = CMatrix::zeros(n);
            for i in 0..n {
                h[(i, i)] = Complex64::new(g[(i, i)].re * spec.scale, 0.0);
                for j in (i + 1)..n {
                    let v = (g[(i, j)] + g[(j, i)].conj()) * 0.5 * spec.scale;
                    h[(i, j)] = v;
                    h[(j, i)] = v.conj();
                }
            }
            h
        }
        Ensemble::DiagonalLogUniform => {
            let (lo, hi) = (LOG_UNIFORM_MIN.ln(), LOG_UNIFORM_MAX.ln());
            let diag: Vec<f64> = (0..n)
                .map(|i| (lo + (hi - lo) * stream.uniform(i)).exp() * spec.scale)
                .collect();
            CMatrix::from_real_diagonal(&diag)
        }
        Ensemble::Unitary => ginibre(&mut stream, n).qr_unitary()?.scale_real(spec.scale),
    };
    TracialMatrix::normalized(m)
}

/// Member 0 of every instance.
pub fn generate_corpus(spec: &CorpusSpec, exec: Exec) -> Result<Vec<TracialMatrix>> {
    spec.validate()?;
    exec.try_map_range(spec.instances, |i| generate_member(spec, i, 0))
}

/// Members `0..members` of every instance.
pub fn generate_families(spec: &CorpusSpec, members: usize, exec: Exec) -> Result<Vec<Vec<TracialMatrix>>> {
    spec.validate()?;
    exec.try_map_range(spec.instances, |i| (0..members).map(|m| generate_member(spec, i, m)).collect())
}

/// SHA-256 over dimension, weight and entries (little-endian bit patterns).
pub fn matrix_hash(xs: &[&TracialMatrix]) -> String {
    let mut h = Sha256::new();
    for x in xs {
        h.update((x.dim() as u64).to_le_bytes());
        h.update(x.weight().to_bits().to_le_bytes());
        for z in x.matrix().as_slice() {
            h.update(z.re.to_bits().to_le_bytes());
            h.update(z.im.to_bits().to_le_bytes());
        }
    }
    hex::encode(h.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(ensemble: Ensemble) -> CorpusSpec {
        CorpusSpec {
            seed: 7,
            instances: 5,
            dim: 4,
            ensemble,
            scale: 1.0,
        }
    }

    #[test]
    fn repeated_spec_is_identical() {
        for e in Ensemble::ALL {
            let a = generate_corpus(&spec(e), Exec::Sequential).unwrap();
            let b = generate_corpus(&spec(e), Exec::Parallel).unwrap();
            assert_eq!(a, b);
            let ha: Vec<_> = a.iter().map(|x| matrix_hash(&[x])).collect();
            let hb: Vec<_> = b.iter().map(|x| matrix_hash(&[x])).collect();
            assert_eq!(ha, hb);
        }
    }

    #[test]
    fn scale_doubles_entries_exactly() {
        for e in Ensemble::ALL {
            let a = generate_corpus(&spec(e), Exec::Sequential).unwrap();
            let b = generate_corpus(&CorpusSpec { scale: 2.0, ..spec(e) }, Exec::Sequential).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert_eq!(&x.matrix().scale_real(2.0), y.matrix());
            }
        }
    }

    #[test]
    fn ensembles_have_their_structure() {
        for x in generate_corpus(&spec(Ensemble::HermitianGaussian), Exec::Sequential).unwrap() {
            assert_eq!(&x.matrix().adjoint(), x.matrix());
        }
        for x in generate_corpus(&spec(Ensemble::Unitary), Exec::Sequential).unwrap() {
            assert!(x.matrix().gram().max_abs_diff(&CMatrix::identity(4)) < 1e-13);
        }
        for x in generate_corpus(&spec(Ensemble::DiagonalLogUniform), Exec::Sequential).unwrap() {
            for i in 0..4 {
                let d = x.matrix()[(i, i)];
                assert!(d.im == 0.0 && (1e-3..=1e3).contains(&d.re));
            }
        }
    }

    #[test]
    fn ginibre_moments_are_plausible() {
        let big = CorpusSpec {
            instances: 200,
            dim: 8,
            ..spec(Ensemble::ComplexGinibre)
        };
        let corpus = generate_corpus(&big, Exec::Parallel).unwrap();
        let entries: Vec<Complex64> = corpus.iter().flat_map(|x| x.matrix().as_slice().to_vec()).collect();
        let n = entries.len() as f64;
        let mean: Complex64 = entries.iter().sum::<Complex64>() / n;
        let second = entries.iter().map(|z| z.norm_sqr()).sum::<f64>() / n;
        let re_var = entries.iter().map(|z| z.re * z.re).sum::<f64>() / n;
        assert!(mean.norm() < 0.03, "{mean}");
        assert!((second - 1.0).abs() < 0.03, "{second}");
        assert!((re_var - 0.5).abs() < 0.03, "{re_var}");
    }

    #[test]
    fn members_and_instances_differ() {
        let s = spec(Ensemble::ComplexGinibre);
        let a = generate_member(&s, 0, 0).unwrap();
        assert_ne!(a, generate_member(&s, 0, 1).unwrap());
        assert_ne!(a, generate_member(&s, 1, 0).unwrap());
        assert_ne!(a, generate_member(&CorpusSpec { seed: 8, ..s }, 0, 0).unwrap());
    }

    #[test]
    fn invalid_specs() {
        let s = spec(Ensemble::Unitary);
        assert!(CorpusSpec { instances: 0, ..s }.validate().is_err());
        assert!(CorpusSpec { dim: 0, ..s }.validate().is_err());
        assert!(CorpusSpec { scale: -1.0, ..s }.validate().is_err());
        assert!("nope".parse::<Ensemble>().is_err());
    }
}
