//! Cyclic Jacobi eigensolver for Hermitian matrices.
//!
//! Rotations are applied in a fixed row-cyclic order, so results are bitwise
//! reproducible for a given input. Real symmetric input takes a real-arithmetic
//! path that is roughly four times cheaper.

use num_complex::Complex64 as C64;

use super::matrix::{ComplexMatrix, ZERO};
use crate::error::{Error, Result};

pub const MAX_SWEEPS: usize = 60;

/// Components below this modulus are skipped when fixing eigenvector phases.
const PHASE_THRESHOLD: f64 = 1e-10;

/// Ascending eigenvalues with matching orthonormal eigenvectors (as columns).
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

/// Full eigendecomposition of a Hermitian matrix. Only the upper triangle is
/// trusted; the input should already be symmetrized.
pub fn eigh(a: &ComplexMatrix) -> Result<Eigen> {
    let n = a.dim();
    let (values, vt) = if a.is_real() {
        let mut m: Vec<f64> = a.as_slice().iter().map(|z| z.re).collect();
        let mut vt = identity_real(n);
        jacobi_real(&mut m, n, Some(&mut vt))?;
        let vt: Vec<C64> = vt.into_iter().map(|x| C64::new(x, 0.0)).collect();
        (diag_real(&m, n), vt)
    } else {
        let mut m = a.as_slice().to_vec();
        let mut vt: Vec<C64> = identity_real(n).into_iter().map(|x| C64::new(x, 0.0)).collect();
        jacobi_complex(&mut m, n, Some(&mut vt))?;
        (diag_complex(&m, n), vt)
    };

    let order = ascending_order(&values);
    let mut sorted = Vec::with_capacity(n);
    let mut vectors = ComplexMatrix::zeros(n);
    for (col, &k) in order.iter().enumerate() {
        sorted.push(values[k]);
        let row = &vt[k * n..(k + 1) * n];
        let phase = row
            .iter()
            .find(|z| z.norm() > PHASE_THRESHOLD)
            .map(|z| z.conj() / z.norm())
            .unwrap_or(C64::new(1.0, 0.0));
        for i in 0..n {
            vectors[(i, col)] = row[i] * phase;
        }
    }
    Ok(Eigen { values: sorted, vectors })
}

/// Eigenvalues only, ascending.
pub fn eigvalsh(a: &ComplexMatrix) -> Result<Vec<f64>> {
    let n = a.dim();
    let mut values = if a.is_real() {
        let mut m: Vec<f64> = a.as_slice().iter().map(|z| z.re).collect();
        jacobi_real(&mut m, n, None)?;
        diag_real(&m, n)
    } else {
        let mut m = a.as_slice().to_vec();
        jacobi_complex(&mut m, n, None)?;
        diag_complex(&m, n)
    };
    values.sort_by(f64::total_cmp);
    Ok(values)
}

fn ascending_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    idx
}

fn identity_real(n: usize) -> Vec<f64> {
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    v
}

fn diag_real(m: &[f64], n: usize) -> Vec<f64> {
    (0..n).map(|i| m[i * n + i]).collect()
}

fn diag_complex(m: &[C64], n: usize) -> Vec<f64> {
    (0..n).map(|i| m[i * n + i].re).collect()
}

fn rotation(alpha: f64, gamma: f64, beta_abs: f64) -> (f64, f64, f64) {
    let zeta = (gamma - alpha) / (2.0 * beta_abs);
    let t = if zeta.is_finite() {
        zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
    } else {
        0.0
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    (t, c, t * c)
}

/// Negligible relative to both diagonal entries, in the sense that adding it
/// would not change either in floating point.
fn negligible(beta_abs: f64, alpha: f64, gamma: f64) -> bool {
    let g = 100.0 * beta_abs;
    alpha.abs() + g == alpha.abs() && gamma.abs() + g == gamma.abs()
}

fn jacobi_real(a: &mut [f64], n: usize, mut vt: Option<&mut Vec<f64>>) -> Result<()> {
    let scale: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n < 2 || scale == 0.0 {
        return Ok(());
    }
    let mut off = 0.0;
    for sweep in 0..MAX_SWEEPS {
        off = off_norm_real(a, n);
        if off <= 1e-15 * scale {
            return Ok(());
        }
        let thresh = if sweep < 3 { 0.2 * off / (n * n) as f64 } else { 0.0 };
        for p in 0..n - 1 {
            for q in p + 1..n {
                let beta = a[p * n + q];
                let alpha = a[p * n + p];
                let gamma = a[q * n + q];
                if sweep > 3 && negligible(beta.abs(), alpha, gamma) {
                    a[p * n + q] = 0.0;
                    a[q * n + p] = 0.0;
                    continue;
                }
                if beta == 0.0 || beta.abs() <= thresh {
                    continue;
                }
                let zeta = (gamma - alpha) / (2.0 * beta);
                let t = if zeta.is_finite() {
                    let sgn = if zeta >= 0.0 { 1.0 } else { -1.0 };
                    sgn / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
                } else {
                    0.0
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                a[p * n + p] = alpha - t * beta;
                a[q * n + q] = gamma + t * beta;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    let np = c * akp - s * akq;
                    let nq = s * akp + c * akq;
                    a[k * n + p] = np;
                    a[k * n + q] = nq;
                    a[p * n + k] = np;
                    a[q * n + k] = nq;
                }
                if let Some(v) = vt.as_deref_mut() {
                    let (head, tail) = v.split_at_mut(q * n);
                    let rp = &mut head[p * n..(p + 1) * n];
                    let rq = &mut tail[..n];
                    for (x, y) in rp.iter_mut().zip(rq.iter_mut()) {
                        let (vp, vq) = (*x, *y);
                        *x = c * vp - s * vq;
                        *y = s * vp + c * vq;
                    }
                }
            }
        }
    }
    Err(Error::NoConvergence { sweeps: MAX_SWEEPS, off_norm: off })
}

fn jacobi_complex(a: &mut [C64], n: usize, mut vt: Option<&mut Vec<C64>>) -> Result<()> {
    let scale: f64 = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if n < 2 || scale == 0.0 {
        return Ok(());
    }
    for i in 0..n {
        a[i * n + i].im = 0.0;
    }
    let mut off = 0.0;
    for sweep in 0..MAX_SWEEPS {
        off = off_norm_complex(a, n);
        if off <= 1e-15 * scale {
            return Ok(());
        }
        let thresh = if sweep < 3 { 0.2 * off / (n * n) as f64 } else { 0.0 };
        for p in 0..n - 1 {
            for q in p + 1..n {
                let beta = a[p * n + q];
                let beta_abs = beta.norm();
                let alpha = a[p * n + p].re;
                let gamma = a[q * n + q].re;
                if sweep > 3 && negligible(beta_abs, alpha, gamma) {
                    a[p * n + q] = ZERO;
                    a[q * n + p] = ZERO;
                    continue;
                }
                if beta_abs == 0.0 || beta_abs <= thresh {
                    continue;
                }
                let phase = beta / beta_abs;
                let (t, c, s) = rotation(alpha, gamma, beta_abs);
                let sp = phase * s;
                let sm = phase.conj() * s;
                a[p * n + p] = C64::new(alpha - t * beta_abs, 0.0);
                a[q * n + q] = C64::new(gamma + t * beta_abs, 0.0);
                a[p * n + q] = ZERO;
                a[q * n + p] = ZERO;
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    let np = akp * c - sm * akq;
                    let nq = sp * akp + akq * c;
                    a[k * n + p] = np;
                    a[k * n + q] = nq;
                    a[p * n + k] = np.conj();
                    a[q * n + k] = nq.conj();
                }
                if let Some(v) = vt.as_deref_mut() {
                    let (head, tail) = v.split_at_mut(q * n);
                    let rp = &mut head[p * n..(p + 1) * n];
                    let rq = &mut tail[..n];
                    for (x, y) in rp.iter_mut().zip(rq.iter_mut()) {
                        let (vp, vq) = (*x, *y);
                        *x = vp * c - sm * vq;
                        *y = sp * vp + vq * c;
                    }
                }
            }
        }
    }
    Err(Error::NoConvergence { sweeps: MAX_SWEEPS, off_norm: off })
}

fn off_norm_real(a: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for p in 0..n {
        for q in p + 1..n {
            s += a[p * n + q] * a[p * n + q];
        }
    }
    (2.0 * s).sqrt()
}

fn off_norm_complex(a: &[C64], n: usize) -> f64 {
    let mut s = 0.0;
    for p in 0..n {
        for q in p + 1..n {
            s += a[p * n + q].norm_sqr();
        }
    }
    (2.0 * s).sqrt()
}
