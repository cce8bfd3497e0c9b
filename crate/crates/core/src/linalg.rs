//! Small dense Hermitian eigensolver and a pivoted linear solve.
//!
//! The matrices in this crate are tiny (3x3 spin-1, 4x4 spin pair, 9x9 rate
//! generator), so a cyclic Jacobi diagonalization is both simple and accurate:
//! it converges quadratically, preserves Hermiticity by construction, and is
//! deterministic for a fixed sweep order.

use num_complex::Complex;

use crate::error::Error;
use crate::scalar::{lit, Float};
use crate::Result;

/// Dense Hermitian matrix stored row-major as complex entries.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix<T> {
    dim: usize,
    data: Vec<Complex<T>>,
}

impl<T: Float> HermitianMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        HermitianMatrix {
            dim,
            data: vec![Complex::new(T::zero(), T::zero()); dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex<T> {
        self.data[row * self.dim + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: Complex<T>) {
        self.data[row * self.dim + col] = value;
    }

    /// Sets `(row, col)` and mirrors the conjugate into `(col, row)`.
    pub fn set_sym(&mut self, row: usize, col: usize, value: Complex<T>) {
        self.set(row, col, value);
        if row != col {
            self.set(col, row, value.conj());
        }
    }

    /// Adds `value` at `(row, col)` and its conjugate at `(col, row)`.
    pub fn add_sym(&mut self, row: usize, col: usize, value: Complex<T>) {
        let cur = self.get(row, col);
        self.set(row, col, cur + value);
        if row != col {
            let cur = self.get(col, row);
            self.set(col, row, cur + value.conj());
        }
    }

    /// Largest deviation from Hermitian symmetry, in the matrix units.
    pub fn hermiticity_defect(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.dim {
            for j in i..self.dim {
                let d = (self.get(i, j) - self.get(j, i).conj()).norm();
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// Frobenius norm.
    pub fn frobenius_norm(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |acc, z| acc + z.norm_sqr())
            .sqrt()
    }

    /// Full eigendecomposition; eigenvalues ascending, eigenvectors as columns.
    pub fn eigh(&self) -> Result<EigenDecomposition<T>> {
        let tol = lit::<T>(1e3) * T::epsilon() * (T::one() + self.frobenius_norm());
        if !self.is_hermitian(tol) {
            return Err(Error::domain("matrix is not Hermitian"));
        }
        Ok(jacobi_hermitian(self))
    }
}

/// Result of [`HermitianMatrix::eigh`].
#[derive(Debug, Clone)]
pub struct EigenDecomposition<T> {
    /// Eigenvalues in ascending order (ties keep basis order, so a zero
    /// matrix decomposes into the identity basis).
    pub values: Vec<T>,
    /// Unit eigenvectors; column `k` belongs to `values[k]`.
    pub vectors: Vec<Vec<Complex<T>>>,
}

impl<T: Float> EigenDecomposition<T> {
    /// `<bra| vector_k>` overlap magnitude squared for a basis bra index.
    pub fn basis_weight(&self, k: usize, basis_index: usize) -> T {
        self.vectors[k][basis_index].norm_sqr()
    }

    /// `<v_i| op |v_j>` for a matrix `op` in the same basis.
    pub fn matrix_element(&self, op: &HermitianMatrix<T>, i: usize, j: usize) -> Complex<T> {
        let n = op.dim();
        let mut acc = Complex::new(T::zero(), T::zero());
        for a in 0..n {
            let mut row = Complex::new(T::zero(), T::zero());
            for b in 0..n {
                row += op.get(a, b) * self.vectors[j][b];
            }
            acc += self.vectors[i][a].conj() * row;
        }
        acc
    }
}

/// Cyclic Jacobi diagonalization of a Hermitian matrix.
///
/// Each rotation first removes the phase of the pivot, then applies the
/// classic symmetric Jacobi rotation; convergence is quadratic and the sweep
/// order is fixed, so results are bit-reproducible for identical inputs.
fn jacobi_hermitian<T: Float>(m: &HermitianMatrix<T>) -> EigenDecomposition<T> {
    let n = m.dim();
    let mut a = m.clone();
    // Eigenvector accumulator, starts as identity.
    let mut v = vec![vec![Complex::new(T::zero(), T::zero()); n]; n];
    for (k, col) in v.iter_mut().enumerate() {
        col[k] = Complex::new(T::one(), T::zero());
    }

    let scale = a.frobenius_norm().max(T::one());
    let off_tol = scale * T::epsilon() * lit::<T>(1e1);
    let max_sweeps = 64;

    for _ in 0..max_sweeps {
        let mut off = T::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off += a.get(p, q).norm_sqr();
            }
        }
        if off.sqrt() <= off_tol {
            break;
        }

        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                let r = apq.norm();
                if r <= scale * T::epsilon() {
                    continue;
                }
                // Phase e^{i phi} of the pivot; the rotation below zeroes it.
                let phase = apq / r;
                let app = a.get(p, p).re;
                let aqq = a.get(q, q).re;
                let tau = (aqq - app) / (r + r);
                let t = if tau >= T::zero() {
                    T::one() / (tau + (T::one() + tau * tau).sqrt())
                } else {
                    -T::one() / (-tau + (T::one() + tau * tau).sqrt())
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = t * c;

                // Columns: col_p' = c col_p - s e^{-i phi} col_q
                //          col_q' = s e^{i phi} col_p + c col_q
                let se_m = phase.conj() * s;
                let se_p = phase * s;
                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, akp * c - akq * se_m);
                    a.set(k, q, akp * se_p + akq * c);
                }
                // Rows pick up the conjugate coefficients.
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, apk * c - aqk * se_p);
                    a.set(q, k, apk * se_m + aqk * c);
                }
                // Clean up rounding on the pivot pair.
                a.set(p, q, Complex::new(T::zero(), T::zero()));
                a.set(q, p, Complex::new(T::zero(), T::zero()));
                let dpp = a.get(p, p);
                let dqq = a.get(q, q);
                a.set(p, p, Complex::new(dpp.re, T::zero()));
                a.set(q, q, Complex::new(dqq.re, T::zero()));

                for vec_row in v.iter_mut() {
                    let vp = vec_row[p];
                    let vq = vec_row[q];
                    vec_row[p] = vp * c - vq * se_m;
                    vec_row[q] = vp * se_p + vq * c;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a.get(i, i)
            .re
            .partial_cmp(&a.get(j, j).re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });

    let mut values = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n);
    for &k in &order {
        values.push(a.get(k, k).re);
        let mut col: Vec<Complex<T>> = v.iter().map(|row| row[k]).collect();
        canonicalize_phase(&mut col);
        vectors.push(col);
    }
    EigenDecomposition { values, vectors }
}

/// Rotates a vector's global phase so its largest component is real positive.
fn canonicalize_phase<T: Float>(col: &mut [Complex<T>]) {
    let mut best = 0;
    let mut best_norm = T::zero();
    for (i, z) in col.iter().enumerate() {
        let nz = z.norm_sqr();
        if nz > best_norm + T::epsilon() {
            best_norm = nz;
            best = i;
        }
    }
    let z = col[best];
    let r = z.norm();
    if r > T::zero() {
        let phase = z.conj() / r;
        for c in col.iter_mut() {
            *c *= phase;
        }
    }
}

/// Solves `A x = b` for a small dense real system by Gaussian elimination
/// with partial pivoting. `a` is row-major `n x n`.
pub fn solve_dense<T: Float>(a: &[T], b: &[T], n: usize) -> Result<Vec<T>> {
    assert_eq!(a.len(), n * n);
    assert_eq!(b.len(), n);
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    let scale = a
        .iter()
        .fold(T::zero(), |acc, &v| acc.max(v.abs()))
        .max(T::one());
    let tiny = scale * T::epsilon() * lit::<T>(1e2);

    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot_val = m[col * n + col].abs();
        for row in (col + 1)..n {
            let v = m[row * n + col].abs();
            if v > pivot_val {
                pivot_val = v;
                pivot_row = row;
            }
        }
        if pivot_val <= tiny {
            return Err(Error::Singular(format!(
                "zero pivot in column {col} during elimination"
            )));
        }
        if pivot_row != col {
            for k in 0..n {
                m.swap(col * n + k, pivot_row * n + k);
            }
            x.swap(col, pivot_row);
        }
        let inv = T::one() / m[col * n + col];
        for row in (col + 1)..n {
            let f = m[row * n + col] * inv;
            if f == T::zero() {
                continue;
            }
            for k in col..n {
                let delta = f * m[col * n + k];
                m[row * n + k] -= delta;
            }
            let dx = f * x[col];
            x[row] -= dx;
        }
    }
    for col in (0..n).rev() {
        let mut acc = x[col];
        for k in (col + 1)..n {
            acc -= m[col * n + k] * x[k];
        }
        x[col] = acc / m[col * n + col];
    }
    Ok(x)
}
