//! Dense complex linear algebra for small square matrices.
//!
//! Storage is row-major. Everything the engine touches is 2×2, so the
//! Hermitian eigenvalue routine has a closed-form path for `dim == 2` and
//! falls back to a cyclic complex Jacobi sweep for larger matrices.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use thiserror::Error;

use crate::tol;

/// Complex scalar used for every matrix entry.
pub type C64 = Complex64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("matrix is not Hermitian (max |A - A†| = {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("expected {expected} entries for a {dim}x{dim} matrix, got {got}")]
    BadLength { dim: usize, expected: usize, got: usize },
    #[error("matrix dimension must be at least 1")]
    EmptyDimension,
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("Jacobi sweep did not converge (off-diagonal norm {residual:e})")]
    NoConvergence { residual: f64 },
}

/// Dense `dim × dim` complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct SquareMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl SquareMatrix {
    /// Builds a matrix from row-major entries, rejecting NaN/Inf.
    pub fn from_row_major(dim: usize, data: Vec<C64>) -> Result<Self, LinalgError> {
        if dim == 0 {
            return Err(LinalgError::EmptyDimension);
        }
        if data.len() != dim * dim {
            return Err(LinalgError::BadLength {
                dim,
                expected: dim * dim,
                got: data.len(),
            });
        }
        if let Some(k) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(LinalgError::NonFinite {
                row: k / dim,
                col: k % dim,
            });
        }
        Ok(Self { dim, data })
    }

    /// Builds a matrix from real row-major entries.
    pub fn from_real(dim: usize, data: &[f64]) -> Result<Self, LinalgError> {
        Self::from_row_major(dim, data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be at least 1");
        Self {
            dim,
            data: vec![C64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_diagonal_real(&vec![1.0; dim])
    }

    pub fn from_diagonal_real(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (k, &d) in diag.iter().enumerate() {
            m[(k, k)] = C64::new(d, 0.0);
        }
        m
    }

    /// The outer product `|row⟩⟨col|` scaled by `amp`.
    pub fn ket_bra(dim: usize, row: usize, col: usize, amp: f64) -> Self {
        let mut m = Self::zeros(dim);
        m[(row, col)] = C64::new(amp, 0.0);
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.dim).map(|k| self[(k, k)]).collect()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64, LinalgError> {
        check_dims(self, other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Largest entrywise modulus of `self - self†`.
    pub fn hermitian_deviation(&self) -> f64 {
        let n = self.dim;
        let mut dev: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian_deviation() <= tol::HERMITIAN
    }

    /// Largest modulus among the off-diagonal entries.
    pub fn max_off_diagonal(&self) -> f64 {
        let n = self.dim;
        let mut m: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    m = m.max(self[(i, j)].norm());
                }
            }
        }
        m
    }
}

fn check_dims(a: &SquareMatrix, b: &SquareMatrix) -> Result<(), LinalgError> {
    if a.dim != b.dim {
        return Err(LinalgError::DimensionMismatch {
            left: a.dim,
            right: b.dim,
        });
    }
    Ok(())
}

impl Index<(usize, usize)> for SquareMatrix {
    type Output = C64;

    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.dim + c]
    }
}

impl IndexMut<(usize, usize)> for SquareMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.dim + c]
    }
}

impl fmt::Debug for SquareMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "SquareMatrix({}x{}) [", self.dim, self.dim)?;
        for r in 0..self.dim {
            write!(f, "  ")?;
            for c in 0..self.dim {
                let z = self[(r, c)];
                write!(f, "{:+.6e}{:+.6e}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Add for &SquareMatrix {
    type Output = SquareMatrix;

    /// Panics on dimension mismatch; use [`try_add`] for a checked sum.
    fn add(self, rhs: &SquareMatrix) -> SquareMatrix {
        try_add(self, rhs).expect("dimension mismatch in matrix addition")
    }
}

impl Sub for &SquareMatrix {
    type Output = SquareMatrix;

    fn sub(self, rhs: &SquareMatrix) -> SquareMatrix {
        try_sub(self, rhs).expect("dimension mismatch in matrix subtraction")
    }
}

impl Mul for &SquareMatrix {
    type Output = SquareMatrix;

    fn mul(self, rhs: &SquareMatrix) -> SquareMatrix {
        matmul(self, rhs).expect("dimension mismatch in matrix product")
    }
}

pub fn try_add(a: &SquareMatrix, b: &SquareMatrix) -> Result<SquareMatrix, LinalgError> {
    check_dims(a, b)?;
    Ok(SquareMatrix {
        dim: a.dim,
        data: a.data.iter().zip(&b.data).map(|(x, y)| x + y).collect(),
    })
}

pub fn try_sub(a: &SquareMatrix, b: &SquareMatrix) -> Result<SquareMatrix, LinalgError> {
    check_dims(a, b)?;
    Ok(SquareMatrix {
        dim: a.dim,
        data: a.data.iter().zip(&b.data).map(|(x, y)| x - y).collect(),
    })
}

/// Matrix product `a · b`.
pub fn matmul(a: &SquareMatrix, b: &SquareMatrix) -> Result<SquareMatrix, LinalgError> {
    check_dims(a, b)?;
    let n = a.dim;
    if n == 2 {
        let (x, y) = (&a.data, &b.data);
        return Ok(SquareMatrix {
            dim: 2,
            data: vec![
                x[0] * y[0] + x[1] * y[2],
                x[0] * y[1] + x[1] * y[3],
                x[2] * y[0] + x[3] * y[2],
                x[2] * y[1] + x[3] * y[3],
            ],
        });
    }
    let mut out = SquareMatrix::zeros(n);
    for i in 0..n {
        for k in 0..n {
            let aik = a[(i, k)];
            if aik == C64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..n {
                out.data[i * n + j] += aik * b[(k, j)];
            }
        }
    }
    Ok(out)
}

/// Conjugate transpose.
pub fn adjoint(a: &SquareMatrix) -> SquareMatrix {
    let n = a.dim;
    let mut out = SquareMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            out[(j, i)] = a[(i, j)].conj();
        }
    }
    out
}

pub fn trace(a: &SquareMatrix) -> C64 {
    (0..a.dim).map(|k| a[(k, k)]).sum()
}

/// `a · x · a†`, the conjugation used by every Kraus map.
pub fn sandwich(a: &SquareMatrix, x: &SquareMatrix) -> Result<SquareMatrix, LinalgError> {
    matmul(&matmul(a, x)?, &adjoint(a))
}

/// Real eigenvalues of a Hermitian matrix in ascending order.
pub fn eig_hermitian(a: &SquareMatrix) -> Result<Vec<f64>, LinalgError> {
    let deviation = a.hermitian_deviation();
    if deviation > tol::HERMITIAN {
        return Err(LinalgError::NotHermitian { deviation });
    }
    let mut eigs = match a.dim {
        1 => vec![a[(0, 0)].re],
        2 => eig2(a).to_vec(),
        _ => jacobi_eigenvalues(a)?,
    };
    eigs.sort_by(f64::total_cmp);
    Ok(eigs)
}

fn eig2(a: &SquareMatrix) -> [f64; 2] {
    let p = a[(0, 0)].re;
    let s = a[(1, 1)].re;
    let off = a[(0, 1)];
    if off.norm() == 0.0 {
        return [p, s];
    }
    let mean = 0.5 * (p + s);
    // sqrt(((p - s)/2)^2 + |off|^2), written to avoid cancellation
    let radius = (0.5 * (p - s)).hypot(off.norm());
    [mean - radius, mean + radius]
}

/// Cyclic complex Jacobi: each pivot is rotated to a real entry by a phase,
/// then annihilated by a real Givens rotation.
fn jacobi_eigenvalues(a: &SquareMatrix) -> Result<Vec<f64>, LinalgError> {
    const MAX_SWEEPS: usize = 100;
    let n = a.dim;
    let mut m = a.clone();
    // symmetrize away the Hermitian slack so the diagonal is exactly real
    for i in 0..n {
        m[(i, i)] = C64::new(m[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)].conj());
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
    let scale = m.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(1.0);
    let off_norm = |m: &SquareMatrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    for _ in 0..MAX_SWEEPS {
        if off_norm(&m) <= tol::EIG_RESIDUAL * scale {
            return Ok((0..n).map(|k| m[(k, k)].re).collect());
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let w = m[(p, q)];
                let w_abs = w.norm();
                if w_abs == 0.0 {
                    continue;
                }
                let phase = w / w_abs;
                let theta = 0.5 * (2.0 * w_abs).atan2(m[(q, q)].re - m[(p, p)].re);
                let (s, c) = theta.sin_cos();
                // G = diag(1, conj(phase)) · [[c, s], [-s, c]]
                let g_pp = C64::new(c, 0.0);
                let g_pq = C64::new(s, 0.0);
                let g_qp = -phase.conj() * s;
                let g_qq = phase.conj() * c;
                for k in 0..n {
                    let akp = m[(k, p)];
                    let akq = m[(k, q)];
                    m[(k, p)] = akp * g_pp + akq * g_qp;
                    m[(k, q)] = akp * g_pq + akq * g_qq;
                }
                for k in 0..n {
                    let apk = m[(p, k)];
                    let aqk = m[(q, k)];
                    m[(p, k)] = g_pp.conj() * apk + g_qp.conj() * aqk;
                    m[(q, k)] = g_pq.conj() * apk + g_qq.conj() * aqk;
                }
                m[(p, q)] = C64::new(0.0, 0.0);
                m[(q, p)] = C64::new(0.0, 0.0);
                m[(p, p)] = C64::new(m[(p, p)].re, 0.0);
                m[(q, q)] = C64::new(m[(q, q)].re, 0.0);
            }
        }
    }
    Err(LinalgError::NoConvergence { residual: off_norm(&m) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn sigma_x() -> SquareMatrix {
        SquareMatrix::from_real(2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    fn sigma_z() -> SquareMatrix {
        SquareMatrix::from_diagonal_real(&[1.0, -1.0])
    }

    #[test]
    fn matmul_identity_and_diagonal() {
        let x = SquareMatrix::from_row_major(2, vec![c(1.0, 2.0), c(-3.0, 0.5), c(0.0, 1.0), c(4.0, 0.0)]).unwrap();
        assert_eq!(matmul(&SquareMatrix::identity(2), &x).unwrap(), x);
        let d = matmul(
            &SquareMatrix::from_diagonal_real(&[2.0, 3.0]),
            &SquareMatrix::from_diagonal_real(&[5.0, 7.0]),
        )
        .unwrap();
        assert_eq!(d, SquareMatrix::from_diagonal_real(&[10.0, 21.0]));
        assert_eq!(matmul(&sigma_z(), &sigma_z()).unwrap(), SquareMatrix::identity(2));
    }

    #[test]
    fn matmul_generic_path_matches_identity() {
        let mut x = SquareMatrix::zeros(3);
        for i in 0..3 {
            for j in 0..3 {
                x[(i, j)] = c(i as f64 - j as f64, (i * j) as f64);
            }
        }
        assert_eq!(matmul(&x, &SquareMatrix::identity(3)).unwrap(), x);
    }

    #[test]
    fn matmul_rejects_mismatch() {
        let err = matmul(&SquareMatrix::identity(2), &SquareMatrix::identity(3)).unwrap_err();
        assert_eq!(err, LinalgError::DimensionMismatch { left: 2, right: 3 });
    }

    #[test]
    fn adjoint_examples() {
        let d = SquareMatrix::from_diagonal_real(&[0.25, -4.0]);
        assert_eq!(adjoint(&d), d);
        let raise = SquareMatrix::ket_bra(2, 0, 1, 1.0);
        assert_eq!(adjoint(&raise), SquareMatrix::ket_bra(2, 1, 0, 1.0));
        let i_id = SquareMatrix::identity(2).scale(c(0.0, 1.0));
        assert_eq!(adjoint(&i_id), SquareMatrix::identity(2).scale(c(0.0, -1.0)));
    }

    #[test]
    fn trace_examples() {
        assert_eq!(trace(&SquareMatrix::identity(2)), c(2.0, 0.0));
        assert_eq!(trace(&sigma_z()), c(0.0, 0.0));
        let t = trace(&SquareMatrix::from_diagonal_real(&[2.0 / 3.0, 1.0 / 3.0]));
        assert!((t.re - 1.0).abs() < 1e-15 && t.im == 0.0);
    }

    #[test]
    fn eig_examples() {
        assert_eq!(eig_hermitian(&SquareMatrix::identity(2)).unwrap(), vec![1.0, 1.0]);
        assert_eq!(eig_hermitian(&sigma_x()).unwrap(), vec![-1.0, 1.0]);
        let e = eig_hermitian(&SquareMatrix::from_diagonal_real(&[7.0 / 12.0, 5.0 / 12.0])).unwrap();
        assert_eq!(e, vec![5.0 / 12.0, 7.0 / 12.0]);
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let m = SquareMatrix::ket_bra(2, 0, 1, 1.0);
        assert!(matches!(eig_hermitian(&m), Err(LinalgError::NotHermitian { .. })));
    }

    #[test]
    fn jacobi_three_by_three() {
        // sigma_x ⊕ 3 has eigenvalues -1, 1, 3
        let mut m = SquareMatrix::zeros(3);
        m[(0, 1)] = c(0.0, 1.0);
        m[(1, 0)] = c(0.0, -1.0);
        m[(2, 2)] = c(3.0, 0.0);
        let e = eig_hermitian(&m).unwrap();
        for (got, want) in e.iter().zip([-1.0, 1.0, 3.0]) {
            assert!((got - want).abs() < 1e-13, "{e:?}");
        }
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert_eq!(
            SquareMatrix::from_real(2, &[1.0, 2.0, 3.0]).unwrap_err(),
            LinalgError::BadLength {
                dim: 2,
                expected: 4,
                got: 3
            }
        );
        assert!(matches!(
            SquareMatrix::from_real(1, &[f64::NAN]),
            Err(LinalgError::NonFinite { row: 0, col: 0 })
        ));
        assert_eq!(
            SquareMatrix::from_real(0, &[]).unwrap_err(),
            LinalgError::EmptyDimension
        );
    }
}
