//! Hermitian operators, spectral resolutions, Borel functional calculus,
//! propagators, resolvents and the δ-smoothing kernel.
//!
//! Finite matrices have pure point spectrum, so every ε → 0 limit here is
//! evaluated along an ε-schedule that stays above the local eigenvalue
//! spacing. Quantities are trusted only in that mesh-regularized regime.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, eigh, ComplexMatrix, C64, ONE, ZERO};

pub const HERMITICITY_TOL: f64 = 1e-12;
pub const ORTHO_TOL: f64 = 1e-10;
/// Relative to ‖H‖.
pub const RECON_TOL: f64 = 1e-9;
pub const PROJ_TOL: f64 = 1e-10;
pub const UNIT_TOL: f64 = 1e-10;
pub const RESOLVENT_GUARD: f64 = 1e-12;
pub const DELTA_TOL: f64 = 1e-10;
pub const FC_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-10;
/// Relative change between the last two ε-values below which a density is
/// called stabilized.
pub const STAB_TOL: f64 = 0.05;

/// A self-adjoint matrix, stored symmetrized.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
}

impl HermitianOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(matrix, HERMITICITY_TOL)
    }

    pub fn with_tolerance(matrix: ComplexMatrix, tol: f64) -> Result<Self> {
        matrix.check_finite()?;
        let defect = matrix.hermitian_defect();
        if defect > tol {
            return Err(Error::NotHermitian { defect, tol });
        }
        Ok(Self { matrix: matrix.hermitian_part() })
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(ComplexMatrix::from_real_rows(rows)?)
    }

    pub fn diagonal(values: &[f64]) -> Self {
        Self { matrix: ComplexMatrix::from_real_diagonal(values) }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { matrix: ComplexMatrix::zeros(dim) }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { matrix: &self.matrix + &other.matrix }
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { matrix: self.matrix.scale_real(c) }
    }
}

/// A real interval with independently open or closed ends. Infinite ends are
/// allowed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn closed(lo: f64, hi: f64) -> Self {
        Self { lo, hi, lo_closed: true, hi_closed: true }
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_closed { x >= self.lo } else { x > self.lo };
        let below = if self.hi_closed { x <= self.hi } else { x < self.hi };
        above && below
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Finite union of disjoint intervals, sorted by left end.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct BorelSet {
    intervals: Vec<Interval>,
}

impl BorelSet {
    pub fn new(intervals: Vec<Interval>) -> Result<Self> {
        for iv in &intervals {
            if iv.lo.is_nan() || iv.hi.is_nan() || iv.lo > iv.hi {
                return Err(Error::InvalidBorelSet(format!("bad interval [{}, {}]", iv.lo, iv.hi)));
            }
        }
        for w in intervals.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            let touching = a.hi == b.lo && a.hi_closed && b.lo_closed;
            if a.hi > b.lo || touching {
                return Err(Error::InvalidBorelSet(format!(
                    "intervals [{}, {}] and [{}, {}] overlap or are unsorted",
                    a.lo, a.hi, b.lo, b.hi
                )));
            }
        }
        Ok(Self { intervals })
    }

    pub fn empty() -> Self {
        Self { intervals: Vec::new() }
    }

    pub fn real_line() -> Self {
        Self { intervals: vec![Interval::closed(f64::NEG_INFINITY, f64::INFINITY)] }
    }

    /// Closed interval [lo, hi].
    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![Interval::closed(lo, hi)])
    }

    /// Half-open (−∞, λ], the argument of the distribution function E(λ).
    pub fn up_to(lambda: f64) -> Self {
        Self {
            intervals: vec![Interval { lo: f64::NEG_INFINITY, hi: lambda, lo_closed: false, hi_closed: true }],
        }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|iv| iv.contains(x))
    }

    /// Lebesgue measure |Λ|.
    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(Interval::length).sum()
    }

    pub fn intersection(&self, other: &Self) -> Self {
        let mut out = Vec::new();
        for a in &self.intervals {
            for b in &other.intervals {
                let (lo, lo_closed) = if a.lo > b.lo {
                    (a.lo, a.lo_closed)
                } else if b.lo > a.lo {
                    (b.lo, b.lo_closed)
                } else {
                    (a.lo, a.lo_closed && b.lo_closed)
                };
                let (hi, hi_closed) = if a.hi < b.hi {
                    (a.hi, a.hi_closed)
                } else if b.hi < a.hi {
                    (b.hi, b.hi_closed)
                } else {
                    (a.hi, a.hi_closed && b.hi_closed)
                };
                if lo < hi || (lo == hi && lo_closed && hi_closed) {
                    out.push(Interval { lo, hi, lo_closed, hi_closed });
                }
            }
        }
        out.sort_by(|x, y| x.lo.total_cmp(&y.lo));
        Self { intervals: out }
    }
}

/// Orthogonal projection.
#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    matrix: ComplexMatrix,
}

impl Projection {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(matrix, PROJ_TOL)
    }

    pub fn with_tolerance(matrix: ComplexMatrix, tol: f64) -> Result<Self> {
        matrix.check_finite()?;
        let defect = matrix.hermitian_defect().max(matrix.matmul(&matrix).max_diff(&matrix));
        if defect > tol {
            return Err(Error::NotProjection { defect, tol });
        }
        Ok(Self { matrix: matrix.hermitian_part() })
    }

    /// Projection onto the span of orthonormal vectors.
    pub fn from_orthonormal(dim: usize, vectors: &[Vec<C64>]) -> Self {
        let mut m = ComplexMatrix::zeros(dim);
        for v in vectors {
            for i in 0..dim {
                for j in 0..dim {
                    m[(i, j)] += v[i] * v[j].conj();
                }
            }
        }
        Self { matrix: m.hermitian_part() }
    }

    pub fn zero(dim: usize) -> Self {
        Self { matrix: ComplexMatrix::zeros(dim) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { matrix: ComplexMatrix::identity(dim) }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Rank, read off the trace.
    pub fn rank(&self) -> usize {
        self.matrix.trace().re.round().max(0.0) as usize
    }

    pub fn complement(&self) -> Self {
        Self { matrix: &ComplexMatrix::identity(self.dim()) - &self.matrix }
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        self.matrix.mul_vec(x)
    }

    /// ‖PA − AP‖_max.
    pub fn commutator_defect(&self, a: &ComplexMatrix) -> f64 {
        self.matrix.matmul(a).max_diff(&a.matmul(&self.matrix))
    }
}

/// Ascending eigenvalues and orthonormal eigenvectors of a Hermitian operator.
#[derive(Clone, Debug)]
pub struct SpectralResolution {
    operator: HermitianOperator,
    eigenvalues: Vec<f64>,
    eigenvectors: ComplexMatrix,
}

/// Cyclic Jacobi decomposition; see [`linalg::jacobi`] for the ordering and
/// phase conventions.
pub fn spectral_decompose(h: &HermitianOperator) -> Result<SpectralResolution> {
    let e = eigh(h.matrix())?;
    Ok(SpectralResolution { operator: h.clone(), eigenvalues: e.values, eigenvectors: e.vectors })
}

/// Trajectory of ⟨δ(λ, ε_k) f, g⟩ along a descending ε-schedule.
#[derive(Clone, Debug, Serialize)]
pub struct DensityTrail {
    pub epsilons: Vec<f64>,
    pub values: Vec<C64>,
    pub value: C64,
    pub stabilized: bool,
}

impl SpectralResolution {
    pub fn operator(&self) -> &HermitianOperator {
        &self.operator
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &ComplexMatrix {
        &self.eigenvectors
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, k: usize) -> Vec<C64> {
        self.eigenvectors.column(k)
    }

    /// ‖H‖ = max |λ_i|.
    pub fn norm(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Smallest and largest eigenvalue.
    pub fn band(&self) -> (f64, f64) {
        (self.eigenvalues[0], self.eigenvalues[self.dim() - 1])
    }

    /// Spectral coefficients U* f.
    pub fn coefficients(&self, f: &[C64]) -> Vec<C64> {
        self.eigenvectors.adjoint_mul_vec(f)
    }

    /// U c, the inverse of [`Self::coefficients`].
    pub fn synthesize(&self, c: &[C64]) -> Vec<C64> {
        self.eigenvectors.mul_vec(c)
    }

    /// Indices of eigenvalues lying in Λ.
    pub fn indices_in(&self, set: &BorelSet) -> Vec<usize> {
        (0..self.dim()).filter(|&i| set.contains(self.eigenvalues[i])).collect()
    }

    /// Number of eigenvalues ≤ λ.
    pub fn counting(&self, lambda: f64) -> usize {
        self.eigenvalues.partition_point(|&x| x <= lambda)
    }

    /// Largest gap between consecutive eigenvalues touching [lo, hi], with the
    /// neighbours just outside the window included.
    pub fn max_spacing_in(&self, lo: f64, hi: f64) -> f64 {
        let v = &self.eigenvalues;
        let start = v.partition_point(|&x| x < lo).saturating_sub(1);
        let end = (v.partition_point(|&x| x <= hi) + 1).min(v.len());
        v[start..end].windows(2).fold(0.0, |m, w| m.max(w[1] - w[0]))
    }

    /// Smallest positive gap between eigenvalues, ignoring exact degeneracies.
    pub fn min_gap(&self) -> f64 {
        let scale = self.norm().max(1.0);
        self.eigenvalues
            .windows(2)
            .map(|w| w[1] - w[0])
            .filter(|&g| g > 1e-12 * scale)
            .fold(f64::INFINITY, f64::min)
    }

    /// U diag(d) U*.
    pub fn from_diagonal(&self, d: &[C64]) -> ComplexMatrix {
        self.eigenvectors.scale_columns(d).matmul(&self.eigenvectors.adjoint())
    }

    /// φ(H) = Σ φ(λ_i) u_i u_i*.
    pub fn apply_function(&self, phi: impl Fn(f64) -> C64) -> Result<ComplexMatrix> {
        let mut d = Vec::with_capacity(self.dim());
        for &l in &self.eigenvalues {
            let v = phi(l);
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::NonFiniteFunction { eigenvalue: l });
            }
            d.push(v);
        }
        Ok(self.from_diagonal(&d))
    }

    /// φ(H) for real φ, returned as a Hermitian operator.
    pub fn apply_real_function(&self, phi: impl Fn(f64) -> f64) -> Result<HermitianOperator> {
        let m = self.apply_function(|x| C64::new(phi(x), 0.0))?;
        Ok(HermitianOperator { matrix: m.hermitian_part() })
    }

    /// E_H(Λ).
    pub fn spectral_projection(&self, set: &BorelSet) -> Projection {
        let d: Vec<C64> = self
            .eigenvalues
            .iter()
            .map(|&l| if set.contains(l) { ONE } else { ZERO })
            .collect();
        Projection { matrix: self.from_diagonal(&d).hermitian_part() }
    }

    /// Distribution function E_H(λ) = E_H((−∞, λ]).
    pub fn distribution(&self, lambda: f64) -> Projection {
        self.spectral_projection(&BorelSet::up_to(lambda))
    }

    /// U_H(t) = exp(−itH).
    pub fn propagator(&self, t: f64) -> ComplexMatrix {
        let d: Vec<C64> = self.eigenvalues.iter().map(|&l| C64::from_polar(1.0, -l * t)).collect();
        self.from_diagonal(&d)
    }

    /// Fails with a spectral-pole error if z is within the guard of an eigenvalue.
    pub fn check_resolvent_point(&self, z: C64) -> Result<()> {
        for &l in &self.eigenvalues {
            if (C64::new(l, 0.0) - z).norm() < RESOLVENT_GUARD {
                return Err(Error::SpectralPole { re: z.re, im: z.im, eigenvalue: l, guard: RESOLVENT_GUARD });
            }
        }
        Ok(())
    }

    /// R_H(z) = (H − z)^{-1} by an LU solve, independent of the eigenbasis.
    pub fn resolvent(&self, z: C64) -> Result<ComplexMatrix> {
        self.check_resolvent_point(z)?;
        let n = self.dim();
        let mut a = self.operator.matrix.clone();
        for i in 0..n {
            a[(i, i)] -= z;
        }
        linalg::inverse(&a)
    }

    /// R_H(z) through the eigenbasis.
    pub fn resolvent_spectral(&self, z: C64) -> Result<ComplexMatrix> {
        self.check_resolvent_point(z)?;
        self.apply_function(|l| ONE / (C64::new(l, 0.0) - z))
    }

    /// R(λ ± iε) = ±i∫₀^∞ e^{−εt ± iλt} e^{∓itH} dt, truncated at t_max and
    /// integrated by composite Simpson over propagator matrices. `sign` is +1
    /// or −1.
    pub fn resolvent_time_integral(&self, lambda: f64, eps: f64, sign: f64, t_max: f64, steps: usize) -> Result<ComplexMatrix> {
        if !(eps > 0.0) || !(t_max > 0.0) || sign.abs() != 1.0 {
            return Err(invalid("time-integral resolvent needs ε > 0, t_max > 0 and sign ±1"));
        }
        let steps = (steps.max(2) + 1) / 2 * 2;
        let h = t_max / steps as f64;
        let mut acc = ComplexMatrix::zeros(self.dim());
        for k in 0..=steps {
            let t = k as f64 * h;
            let w = if k == 0 || k == steps {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let scalar = C64::from_polar((-eps * t).exp() * w, sign * lambda * t);
            acc = &acc + &self.propagator(sign * t).scale(scalar);
        }
        Ok(acc.scale(C64::new(0.0, sign * h / 3.0)))
    }

    /// Eigen-weights of δ(λ, ε): (ε/π) / ((λ_i − λ)² + ε²).
    pub fn delta_weights(&self, lambda: f64, eps: f64) -> Vec<f64> {
        self.eigenvalues.iter().map(|&l| poisson(l - lambda, eps)).collect()
    }

    /// δ_H(λ, ε) = (ε/π) R(λ+iε) R(λ−iε), assembled in the eigenbasis.
    pub fn delta_smoothing(&self, lambda: f64, eps: f64) -> Result<HermitianOperator> {
        if !(eps > 0.0) {
            return Err(invalid(format!("ε must be positive, got {eps}")));
        }
        let d: Vec<C64> = self.delta_weights(lambda, eps).into_iter().map(|x| C64::new(x, 0.0)).collect();
        Ok(HermitianOperator { matrix: self.from_diagonal(&d).hermitian_part() })
    }

    /// The two resolvent expressions for δ: (1/2πi)[R(λ+iε) − R(λ−iε)] and
    /// (ε/π) R(λ+iε) R(λ−iε).
    pub fn delta_forms(&self, lambda: f64, eps: f64) -> Result<(ComplexMatrix, ComplexMatrix)> {
        if !(eps > 0.0) {
            return Err(invalid(format!("ε must be positive, got {eps}")));
        }
        let rp = self.resolvent(C64::new(lambda, eps))?;
        let rm = self.resolvent(C64::new(lambda, -eps))?;
        let difference = (&rp - &rm).scale(ONE / C64::new(0.0, 2.0 * PI));
        let product = rp.matmul(&rm).scale_real(eps / PI);
        Ok((difference, product))
    }

    /// ⟨δ(λ, ε) f, g⟩ along a strictly descending ε-schedule.
    pub fn spectral_density(&self, f: &[C64], g: &[C64], lambda: f64, schedule: &[f64]) -> Result<DensityTrail> {
        self.spectral_density_with(f, g, lambda, schedule, STAB_TOL)
    }

    pub fn spectral_density_with(
        &self,
        f: &[C64],
        g: &[C64],
        lambda: f64,
        schedule: &[f64],
        stab_tol: f64,
    ) -> Result<DensityTrail> {
        validate_descending(schedule)?;
        let cf = self.coefficients(f);
        let cg = self.coefficients(g);
        let values: Vec<C64> = schedule
            .iter()
            .map(|&eps| {
                let w = self.delta_weights(lambda, eps);
                cf.iter().zip(&cg).zip(&w).map(|((a, b), &d)| a * b.conj() * d).sum()
            })
            .collect();
        let value = *values.last().unwrap();
        let stabilized = match values.len() {
            1 => false,
            k => (values[k - 1] - values[k - 2]).norm() <= stab_tol * values[k - 1].norm().max(f64::MIN_POSITIVE),
        };
        Ok(DensityTrail { epsilons: schedule.to_vec(), values, value, stabilized })
    }

    /// ⟨f, g⟩-weighted spectral measure of an interval via eigenvalue counting:
    /// ⟨E(Λ) f, g⟩.
    pub fn spectral_measure(&self, f: &[C64], g: &[C64], set: &BorelSet) -> C64 {
        let cf = self.coefficients(f);
        let cg = self.coefficients(g);
        self.indices_in(set).into_iter().map(|i| cf[i] * cg[i].conj()).sum()
    }

    /// Moves x to the midpoint of the eigenvalue gap containing it, so that a
    /// window edge never sits on an eigenvalue.
    pub fn snap_to_gap(&self, x: f64) -> f64 {
        snap_to_gap(&self.eigenvalues, x)
    }
}

/// Poisson kernel (ε/π)/(x² + ε²).
pub fn poisson(x: f64, eps: f64) -> f64 {
    eps / PI / (x * x + eps * eps)
}

/// Midpoint of the gap of the sorted list `levels` containing x. Points
/// outside the list are returned unchanged.
pub fn snap_to_gap(levels: &[f64], x: f64) -> f64 {
    let k = levels.partition_point(|&l| l < x);
    if k == 0 || k == levels.len() {
        return x;
    }
    0.5 * (levels[k - 1] + levels[k])
}

pub(crate) fn validate_descending(schedule: &[f64]) -> Result<()> {
    if schedule.is_empty() {
        return Err(invalid("ε-schedule is empty"));
    }
    if schedule.iter().any(|&e| !(e > 0.0) || !e.is_finite()) {
        return Err(invalid("ε-schedule entries must be positive and finite"));
    }
    if schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(invalid("ε-schedule must be strictly descending"));
    }
    Ok(())
}

/// Projection onto the span of the singular vectors of A with singular value
/// above rank_tol·σ_max, from the eigendecomposition of AA*.
pub fn range_projection(a: &ComplexMatrix, rank_tol: f64) -> Result<Projection> {
    if !(rank_tol > 0.0) {
        return Err(invalid("rank_tol must be positive"));
    }
    let n = a.dim();
    if a.max_abs() == 0.0 {
        return Ok(Projection::zero(n));
    }
    gram_range_projection(&a.matmul(&a.adjoint()), rank_tol)
}

/// Range projection of a positive semidefinite Gram matrix K = AA*, keeping
/// eigenvalues above (rank_tol·σ_max)².
pub fn gram_range_projection(gram: &ComplexMatrix, rank_tol: f64) -> Result<Projection> {
    let n = gram.dim();
    let e = eigh(&gram.hermitian_part())?;
    let top = e.values.last().copied().unwrap_or(0.0);
    if top <= 0.0 {
        return Ok(Projection::zero(n));
    }
    let cut = top * rank_tol * rank_tol;
    let d: Vec<C64> = e.values.iter().map(|&s| if s > cut { ONE } else { ZERO }).collect();
    let m = e.vectors.scale_columns(&d).matmul(&e.vectors.adjoint());
    Ok(Projection { matrix: m.hermitian_part() })
}

/// Join of the ranges of the given matrices, R(A_1) ∨ … ∨ R(A_k), computed as
/// the range of Σ A_i A_i*.
pub fn join_ranges(dim: usize, mats: &[ComplexMatrix], rank_tol: f64) -> Result<Projection> {
    let gram = mats
        .par_iter()
        .map(|a| a.matmul(&a.adjoint()))
        .collect::<Vec<_>>()
        .into_iter()
        .fold(ComplexMatrix::zeros(dim), |acc, g| &acc + &g);
    if gram.max_abs() == 0.0 {
        return Ok(Projection::zero(dim));
    }
    gram_range_projection(&gram, rank_tol)
}


#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn diagonal_decomposition_permutes_basis() {
        let s = spectral_decompose(&HermitianOperator::diagonal(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(s.eigenvalues(), &[1.0, 2.0, 3.0]);
        let u = s.eigenvectors();
        assert_eq!(u[(1, 0)], ONE);
        assert_eq!(u[(2, 1)], ONE);
        assert_eq!(u[(0, 2)], ONE);
    }

    #[test]
    fn swap_matrix_eigenpairs() {
        let h = HermitianOperator::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let s = spectral_decompose(&h).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.eigenvalues()[0] + 1.0).abs() < 1e-15);
        assert!((s.eigenvalues()[1] - 1.0).abs() < 1e-15);
        let u = s.eigenvectors();
        assert!((u[(0, 0)] - c(r, 0.0)).norm() < 1e-15 && (u[(1, 0)] - c(-r, 0.0)).norm() < 1e-15);
        assert!((u[(0, 1)] - c(r, 0.0)).norm() < 1e-15 && (u[(1, 1)] - c(r, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn non_hermitian_input_rejected() {
        let m = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert!(matches!(HermitianOperator::new(m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn scalar_resolvent_and_pole() {
        let s = spectral_decompose(&HermitianOperator::diagonal(&[0.0])).unwrap();
        let r = s.resolvent(c(0.0, 1.0)).unwrap();
        assert!((r[(0, 0)] - c(0.0, 1.0)).norm() < 1e-15);
        assert!(matches!(s.resolvent(c(0.0, 0.0)), Err(Error::SpectralPole { eigenvalue, .. }) if eigenvalue == 0.0));
    }

    #[test]
    fn diagonal_resolvent() {
        let s = spectral_decompose(&HermitianOperator::diagonal(&[1.0, 2.0])).unwrap();
        let r = s.resolvent(c(1.0, 1.0)).unwrap();
        assert!((r[(0, 0)] - c(0.0, 1.0)).norm() < 1e-15);
        assert!((r[(1, 1)] - c(0.5, 0.5)).norm() < 1e-15);
        assert_eq!(r[(0, 1)], ZERO);
    }

    #[test]
    fn scalar_propagator() {
        let s = spectral_decompose(&HermitianOperator::diagonal(&[PI])).unwrap();
        assert!((s.propagator(1.0)[(0, 0)] - c(-1.0, 0.0)).norm() < 1e-15);
        assert_eq!(s.propagator(0.0), ComplexMatrix::identity(1));
    }

    #[test]
    fn two_site_delta() {
        let s = spectral_decompose(&HermitianOperator::diagonal(&[0.0, 10.0])).unwrap();
        let d = s.delta_smoothing(0.0, 0.01).unwrap();
        let m = d.matrix();
        assert!((m[(0, 0)].re - 1.0 / (0.01 * PI)).abs() < 1e-10);
        assert!((m[(1, 1)].re - 0.01 / PI / (100.0 + 1e-4)).abs() < 1e-18);
        assert_eq!(m[(0, 1)], ZERO);
        assert!(s.delta_smoothing(0.0, 0.0).is_err());
    }

    #[test]
    fn borel_set_validation_and_measure() {
        assert!(BorelSet::interval(2.0, 1.0).is_err());
        assert!(BorelSet::new(vec![Interval::closed(0.0, 1.0), Interval::closed(1.0, 2.0)]).is_err());
        let half = Interval { lo: 1.0, hi: 2.0, lo_closed: false, hi_closed: true };
        let s = BorelSet::new(vec![Interval::closed(0.0, 1.0), half]).unwrap();
        assert_eq!(s.measure(), 2.0);
        assert!(s.contains(1.0) && s.contains(2.0) && !s.contains(2.5));
        let t = s.intersection(&BorelSet::interval(0.5, 1.5).unwrap());
        assert!((t.measure() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn snapping_avoids_levels() {
        let levels = [0.0, 1.0, 3.0];
        assert_eq!(snap_to_gap(&levels, 1.0), 0.5);
        assert_eq!(snap_to_gap(&levels, 2.7), 2.0);
        assert_eq!(snap_to_gap(&levels, 0.2), 0.5);
        assert_eq!(snap_to_gap(&levels, -1.0), -1.0);
    }

    #[test]
    fn range_projection_of_outer_product() {
        let u = vec![c(1.0, 0.0), c(0.0, 2.0), c(0.0, 0.0)];
        let v = vec![c(0.5, 0.5), c(1.0, 0.0), c(3.0, 0.0)];
        let p = range_projection(&ComplexMatrix::outer(&u, &v), 1e-10).unwrap();
        let expected = ComplexMatrix::outer(&u, &u).scale_real(1.0 / 5.0);
        assert!(p.matrix().max_diff(&expected) < 1e-12);
        assert_eq!(p.rank(), 1);
    }
}
