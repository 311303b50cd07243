//! Dense complex linear algebra: matrices, the Jacobi eigensolver, LU solves
//! and norms.

pub mod jacobi;
pub mod matrix;

pub use jacobi::{eigh, eigvalsh, Eigen};
pub use matrix::{basis_vector, inner, norm, normalized, real_vector, ComplexMatrix, C64, I, ONE, ZERO};

use crate::error::{Error, Result};

/// LU factorization with partial pivoting, stored in place.
pub struct Lu {
    lu: ComplexMatrix,
    perm: Vec<usize>,
}

impl Lu {
    pub fn factor(a: &ComplexMatrix) -> Result<Self> {
        let n = a.dim();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = a.max_abs().max(f64::MIN_POSITIVE);
        for k in 0..n {
            let (piv, pmax) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmax <= scale * 1e-300 {
                return Err(Error::Singular);
            }
            if piv != k {
                perm.swap(piv, k);
                let s = lu.as_mut_slice();
                for j in 0..n {
                    s.swap(k * n + j, piv * n + j);
                }
            }
            let pivot = lu[(k, k)];
            let s = lu.as_mut_slice();
            let (top, bottom) = s.split_at_mut((k + 1) * n);
            let krow = &top[k * n..];
            for row in bottom.chunks_mut(n) {
                let f = row[k] / pivot;
                row[k] = f;
                if f != ZERO {
                    for j in k + 1..n {
                        row[j] -= f * krow[j];
                    }
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn solve_vec(&self, b: &[C64]) -> Vec<C64> {
        let n = self.lu.dim();
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = self.lu.row(i);
            let s: C64 = (0..i).map(|j| row[j] * x[j]).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let s: C64 = (i + 1..n).map(|j| row[j] * x[j]).sum();
            x[i] = (x[i] - s) / row[i];
        }
        x
    }

    pub fn inverse(&self) -> ComplexMatrix {
        let n = self.lu.dim();
        let mut inv = ComplexMatrix::zeros(n);
        for j in 0..n {
            let col = self.solve_vec(&basis_vector(n, j));
            for (i, v) in col.into_iter().enumerate() {
                inv[(i, j)] = v;
            }
        }
        inv
    }
}

pub fn inverse(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    Ok(Lu::factor(a)?.inverse())
}

/// Largest eigenvalue of a Hermitian matrix.
pub fn max_eigenvalue(a: &ComplexMatrix) -> Result<f64> {
    Ok(eigvalsh(a)?.last().copied().unwrap_or(0.0))
}

/// Singular values, descending, from the clamped eigenvalues of A*A.
pub fn singular_values(a: &ComplexMatrix) -> Result<Vec<f64>> {
    let gram = a.adjoint().matmul(a).hermitian_part();
    let mut s: Vec<f64> = eigvalsh(&gram)?.into_iter().map(|x| x.max(0.0).sqrt()).collect();
    s.reverse();
    Ok(s)
}

/// Operator norm ‖A‖_∞ (largest singular value).
pub fn operator_norm(a: &ComplexMatrix) -> Result<f64> {
    if a.max_abs() == 0.0 {
        return Ok(0.0);
    }
    Ok(singular_values(a)?[0])
}

/// Operator norm of a Hermitian matrix, max |eigenvalue|.
pub fn hermitian_norm(a: &ComplexMatrix) -> Result<f64> {
    let v = eigvalsh(&a.hermitian_part())?;
    Ok(v.first().map_or(0.0, |x| x.abs()).max(v.last().map_or(0.0, |x| x.abs())))
}

/// Largest eigenvalue of a positive semidefinite matrix by power iteration,
/// optionally warm-started. Returns the estimate and the final iterate.
pub fn psd_power_max(a: &ComplexMatrix, start: Option<&[C64]>, tol: f64, max_iter: usize) -> (f64, Vec<C64>) {
    let n = a.dim();
    let mut x = match start.and_then(normalized) {
        Some(v) => v,
        None => {
            // deterministic start with nonzero overlap on generic vectors
            let v: Vec<C64> = (0..n).map(|k| C64::new(1.0 + 0.01 * k as f64, 0.5 / (1.0 + k as f64))).collect();
            normalized(&v).unwrap()
        }
    };
    let mut lambda = 0.0;
    for _ in 0..max_iter {
        let y = a.mul_vec(&x);
        let new_lambda = inner(&y, &x).re;
        let ny = norm(&y);
        if ny == 0.0 {
            return (0.0, x);
        }
        x = y.into_iter().map(|z| z / ny).collect();
        if (new_lambda - lambda).abs() <= tol * new_lambda.abs().max(f64::MIN_POSITIVE) {
            return (new_lambda.max(0.0), x);
        }
        lambda = new_lambda;
    }
    (lambda.max(0.0), x)
}
