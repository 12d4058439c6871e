//! Dense square complex matrices and a cyclic Jacobi eigensolver for the
//! Hermitian case. Dimensions here are small (tens, occasionally a few
//! hundred for assembled block operators), so everything is row-major
//! `Vec<Complex64>` with straightforward loops.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

const JACOBI_MAX_SWEEPS: usize = 100;
const JACOBI_REL_TOL: f64 = 1e-13;

#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        CMatrix {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn<F: FnMut(usize, usize) -> Complex64>(n: usize, mut f: F) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        CMatrix { n, data }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major real and imaginary parts.
    pub fn from_parts(re: &[Vec<f64>], im: &[Vec<f64>]) -> Result<Self> {
        let n = re.len();
        if im.len() != n || re.iter().chain(im.iter()).any(|row| row.len() != n) {
            return Err(Error::InvalidArgument(format!(
                "matrix parts must both be {n}x{n}"
            )));
        }
        Ok(Self::from_fn(n, |i, j| Complex64::new(re[i][j], im[i][j])))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, a: Complex64) -> Self {
        CMatrix {
            n: self.n,
            data: self.data.iter().map(|z| z * a).collect(),
        }
    }

    pub fn scale_real(&self, a: f64) -> Self {
        CMatrix {
            n: self.n,
            data: self.data.iter().map(|z| z * a).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn frobenius(&self) -> f64 {
        self.frobenius_sq().sqrt()
    }

    /// Largest entrywise deviation from `other`.
    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `self* self`.
    pub fn gram(&self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    acc += self[(k, i)].conj() * self[(k, j)];
                }
                out[(i, j)] = acc;
                out[(j, i)] = acc.conj();
            }
            out[(i, i)] = Complex64::new(out[(i, i)].re, 0.0);
        }
        out
    }

    /// `self self*`.
    pub fn gram_row(&self) -> Self {
        self.adjoint().gram()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| (self[(i, j)] - self[(j, i)].conj()).norm() <= tol))
    }

    /// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
    ///
    /// Only the upper triangle's Hermitian part is meaningful; the input is
    /// symmetrized first. Sweeps stop once the off-diagonal Frobenius norm
    /// falls below `1e-13 * ||A||_F`.
    pub fn hermitian_eigen(&self) -> Result<HermitianEigen> {
        let n = self.n;
        let mut a = Self::from_fn(n, |i, j| {
            if i == j {
                Complex64::new(self[(i, i)].re, 0.0)
            } else {
                0.5 * (self[(i, j)] + self[(j, i)].conj())
            }
        });
        let mut v = Self::identity(n);
        let norm = a.frobenius();
        let mut converged = false;
        for _ in 0..JACOBI_MAX_SWEEPS {
            if off_diagonal_norm(&a) <= JACOBI_REL_TOL * norm {
                converged = true;
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    rotate(&mut a, &mut v, p, q);
                }
            }
        }
        if !converged && off_diagonal_norm(&a) > JACOBI_REL_TOL * norm {
            return Err(Error::NumericalFailure(format!(
                "Jacobi eigensolver did not converge in {JACOBI_MAX_SWEEPS} sweeps"
            )));
        }
        Ok(HermitianEigen {
            values: (0..n).map(|i| a[(i, i)].re).collect(),
            vectors: v,
        })
    }

    /// Principal square root of a positive semidefinite Hermitian matrix.
    /// Slightly negative eigenvalues from rounding are clamped to zero.
    pub fn psd_sqrt(&self) -> Result<Self> {
        let eig = self.hermitian_eigen()?;
        let roots: Vec<f64> = eig.values.iter().map(|&l| l.max(0.0).sqrt()).collect();
        Ok(eig.reconstruct_with(&roots))
    }

    /// Unitary factor of a QR factorization by twice-iterated classical
    /// Gram-Schmidt. The triangular factor has a positive real diagonal, so
    /// the result is phase-normalized.
    pub fn qr_unitary(&self) -> Result<Self> {
        let n = self.n;
        let mut q = Self::zeros(n);
        for j in 0..n {
            let mut col: Vec<Complex64> = (0..n).map(|i| self[(i, j)]).collect();
            for _ in 0..2 {
                for k in 0..j {
                    let mut proj = Complex64::new(0.0, 0.0);
                    for i in 0..n {
                        proj += q[(i, k)].conj() * col[i];
                    }
                    for i in 0..n {
                        col[i] -= proj * q[(i, k)];
                    }
                }
            }
            let nrm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if nrm == 0.0 || !nrm.is_finite() {
                return Err(Error::NumericalFailure("rank-deficient QR input".into()));
            }
            for i in 0..n {
                q[(i, j)] = col[i] / nrm;
            }
        }
        Ok(q)
    }
}

fn off_diagonal_norm(a: &CMatrix) -> f64 {
    let n = a.n;
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// One complex Jacobi rotation annihilating `a[p][q]`: a phase change
/// makes the pivot real, then a real symmetric rotation zeroes it.
fn rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let g = a[(p, q)];
    let g_abs = g.norm();
    if g_abs == 0.0 {
        return;
    }
    let phase = g / g_abs;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let tau = (aqq - app) / (2.0 * g_abs);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let u_pp = Complex64::new(c, 0.0);
    let u_pq = Complex64::new(s, 0.0);
    let u_qp = -s * phase.conj();
    let u_qq = c * phase.conj();
    let n = a.n;
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * u_pp + akq * u_qp;
        a[(k, q)] = akp * u_pq + akq * u_qq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = u_pp.conj() * apk + u_qp.conj() * aqk;
        a[(q, k)] = u_pq.conj() * apk + u_qq.conj() * aqk;
    }
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)] = Complex64::new(app - t * g_abs, 0.0);
    a[(q, q)] = Complex64::new(aqq + t * g_abs, 0.0);
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * u_pp + vkq * u_qp;
        v[(k, q)] = vkp * u_pq + vkq * u_qq;
    }
}

/// Eigenvalues (unsorted) with eigenvectors as the columns of `vectors`.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    /// `V diag(d) V*` for a replacement diagonal `d`.
    pub fn reconstruct_with(&self, d: &[f64]) -> CMatrix {
        let n = self.vectors.n;
        let v = &self.vectors;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    if d[k] != 0.0 {
                        acc += v[(i, k)] * d[k] * v[(j, k)].conj();
                    }
                }
                out[(i, j)] = acc;
                out[(j, i)] = acc.conj();
            }
            out[(i, i)] = Complex64::new(out[(i, i)].re, 0.0);
        }
        out
    }

    /// Orthogonal projection onto the span of eigenvectors whose index is
    /// selected by `keep`.
    pub fn projection<F: Fn(usize) -> bool>(&self, keep: F) -> CMatrix {
        let d: Vec<f64> = (0..self.values.len())
            .map(|k| if keep(k) { 1.0 } else { 0.0 })
            .collect();
        self.reconstruct_with(&d)
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

impl<'a> Add<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        CMatrix {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<'a> Sub<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        CMatrix {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl<'a> Mul<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        let n = self.n;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        CMatrix {
            n: self.n,
            data: self.data.iter().map(|z| -z).collect(),
        }
    }
}
