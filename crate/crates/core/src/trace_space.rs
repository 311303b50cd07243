//! Weighted traces, Schatten norms and the factorization T = G₁*G of a
//! commutator through its polar decomposition.
//!
//! The algebra is the full matrix algebra with τ(A) = Σ w_i A_ii. With
//! non-uniform weights τ is no longer tracial; weighted Schatten norms for
//! general p are then defined as τ(|A|^p)^{1/p} with |A|^p taken from the
//! eigenvectors of A*A.

use crate::error::{invalid, Error, Result};
use crate::linalg::{eigh, ComplexMatrix, C64, ZERO};

pub const FACT_TOL: f64 = 1e-10;

/// Relative threshold below which singular values count as zero in the polar
/// factorization.
const SUPPORT_CUTOFF: f64 = 1e-15;

#[derive(Clone, Debug, PartialEq)]
pub struct TraceWeight {
    weights: Vec<f64>,
}

impl TraceWeight {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(invalid("trace weight must be nonempty"));
        }
        if let Some(w) = weights.iter().find(|&&w| !(w > 0.0) || !w.is_finite()) {
            return Err(invalid(format!("trace weights must be positive and finite, got {w}")));
        }
        Ok(Self { weights })
    }

    pub fn uniform(dim: usize) -> Self {
        Self { weights: vec![1.0; dim] }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// τ(I).
    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    fn check(&self, a: &ComplexMatrix) -> Result<()> {
        if a.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: a.dim() });
        }
        Ok(())
    }
}

/// Schatten exponent p ∈ [1, ∞].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SchattenP {
    Finite(f64),
    Infinity,
}

impl From<f64> for SchattenP {
    fn from(p: f64) -> Self {
        if p.is_infinite() && p > 0.0 {
            SchattenP::Infinity
        } else {
            SchattenP::Finite(p)
        }
    }
}

/// τ(A) = Σ w_i A_ii.
pub fn trace(a: &ComplexMatrix, w: &TraceWeight) -> Result<C64> {
    w.check(a)?;
    Ok(a.diagonal().iter().zip(w.weights()).map(|(d, &wi)| d * wi).sum())
}

/// ‖A‖_p = τ(|A|^p)^{1/p}, or σ_max for p = ∞.
pub fn schatten_norm(a: &ComplexMatrix, p: impl Into<SchattenP>, w: &TraceWeight) -> Result<f64> {
    w.check(a)?;
    let p = p.into();
    if let SchattenP::Finite(p) = p {
        if !(p >= 1.0) {
            return Err(invalid(format!("Schatten exponent must be ≥ 1, got {p}")));
        }
    }
    if a.max_abs() == 0.0 {
        return Ok(0.0);
    }
    // For Hermitian A the singular values are |λ|, which avoids the square
    // root of tiny eigenvalues of A*A. The eigenvectors are shared either way.
    let hermitian = a.hermitian_defect() <= 1e-14 * a.max_abs();
    let e = if hermitian { eigh(&a.hermitian_part())? } else { eigh(&a.adjoint().matmul(a).hermitian_part())? };
    let sigma: Vec<f64> =
        e.values.iter().map(|&x| if hermitian { x.abs() } else { x.max(0.0).sqrt() }).collect();
    match p {
        SchattenP::Infinity => Ok(sigma.iter().fold(0.0, |m: f64, &s| m.max(s))),
        SchattenP::Finite(p) => {
            let uniform = w.weights().iter().all(|&x| x == 1.0);
            let total = if uniform {
                sigma.iter().map(|s| s.powf(p)).sum::<f64>()
            } else {
                // τ(V diag(σ^p) V*) = Σ_i w_i Σ_k |V_ik|² σ_k^p
                let n = a.dim();
                (0..n)
                    .map(|i| {
                        let diag: f64 = (0..n).map(|k| e.vectors[(i, k)].norm_sqr() * sigma[k].powf(p)).sum();
                        w.weights()[i] * diag
                    })
                    .sum()
            };
            Ok(total.powf(1.0 / p))
        }
    }
}

/// T = G₁* G with G = |T|^{1/2} and G₁* = V|T|^{1/2}, V the polar partial
/// isometry of T.
#[derive(Clone, Debug)]
pub struct CommutatorFactorization {
    pub g: ComplexMatrix,
    pub g1: ComplexMatrix,
    pub partial_isometry: ComplexMatrix,
    pub t: ComplexMatrix,
}

impl CommutatorFactorization {
    /// ‖G₁*G − T‖_max.
    pub fn residual(&self) -> f64 {
        self.g1.adjoint().matmul(&self.g).max_diff(&self.t)
    }
}

pub fn factor_commutator(t: &ComplexMatrix) -> Result<CommutatorFactorization> {
    t.check_finite()?;
    let n = t.dim();
    if t.max_abs() == 0.0 {
        let z = ComplexMatrix::zeros(n);
        return Ok(CommutatorFactorization { g: z.clone(), g1: z.clone(), partial_isometry: z, t: t.clone() });
    }
    let e = eigh(&t.adjoint().matmul(t).hermitian_part())?;
    let s: Vec<f64> = e.values.iter().map(|&x| x.max(0.0).sqrt()).collect();
    let smax = s.iter().fold(0.0, |m: f64, &x| m.max(x));
    let on = |x: f64| x > SUPPORT_CUTOFF * smax;
    let w = &e.vectors;
    let w_adj = w.adjoint();
    let sqrt_s: Vec<C64> = s.iter().map(|&x| C64::new(if on(x) { x.sqrt() } else { 0.0 }, 0.0)).collect();
    let inv_sqrt: Vec<C64> = s.iter().map(|&x| if on(x) { C64::new(1.0 / x.sqrt(), 0.0) } else { ZERO }).collect();
    let inv: Vec<C64> = s.iter().map(|&x| if on(x) { C64::new(1.0 / x, 0.0) } else { ZERO }).collect();
    let g = w.scale_columns(&sqrt_s).matmul(&w_adj).hermitian_part();
    let tw = t.matmul(w);
    let g1_adj = tw.scale_columns(&inv_sqrt).matmul(&w_adj);
    let partial_isometry = tw.scale_columns(&inv).matmul(&w_adj);
    Ok(CommutatorFactorization { g, g1: g1_adj.adjoint(), partial_isometry, t: t.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weighted_trace_of_diagonal() {
        let a = ComplexMatrix::from_real_diagonal(&[1.0, 2.0]);
        let w = TraceWeight::new(vec![2.0, 3.0]).unwrap();
        assert_eq!(trace(&a, &w).unwrap(), C64::new(8.0, 0.0));
        assert!(TraceWeight::new(vec![1.0, 0.0]).is_err());
        assert!(trace(&a, &TraceWeight::uniform(3)).is_err());
    }

    #[test]
    fn schatten_examples() {
        let w = TraceWeight::uniform(2);
        let a = ComplexMatrix::from_real_diagonal(&[3.0, 4.0]);
        assert!((schatten_norm(&a, 2.0, &w).unwrap() - 5.0).abs() < 1e-14);
        let n = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert!((schatten_norm(&n, 1.0, &w).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(schatten_norm(&ComplexMatrix::zeros(2), f64::INFINITY, &w).unwrap(), 0.0);
        assert!(schatten_norm(&a, 0.5, &w).is_err());
    }

    #[test]
    fn nilpotent_factorization_by_hand() {
        let t = ComplexMatrix::from_real_rows(&[vec![0.0, 2.0], vec![0.0, 0.0]]).unwrap();
        let f = factor_commutator(&t).unwrap();
        let r2 = 2f64.sqrt();
        let g = ComplexMatrix::from_real_rows(&[vec![0.0, 0.0], vec![0.0, r2]]).unwrap();
        let g1 = ComplexMatrix::from_real_rows(&[vec![0.0, 0.0], vec![r2, 0.0]]).unwrap();
        assert!(f.g.max_diff(&g) < 1e-14);
        assert!(f.g1.max_diff(&g1) < 1e-14);
        assert!(f.residual() < 1e-14);
    }
}
