//! Absolute-continuity diagnostics, the cutoff family ω_n, smooth-vector
//! filtering and the P_ac^∞ estimate.

use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{GammaKernels, RegularizationParams, SmoothnessReport};
use crate::error::{invalid, Error, Result};
use crate::linalg::{eigvalsh, ComplexMatrix, C64, ZERO};
use crate::operator_core::{join_ranges, poisson, HermitianOperator, Projection, SpectralResolution, PROJ_TOL};

/// Rank tolerance for the join of accepted candidate ranges.
pub const JOIN_RANK_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ACReport {
    pub grid: Vec<f64>,
    /// ‖P E_H(λ_k) P‖ per grid point.
    pub cdf_norms: Vec<f64>,
    /// ‖P (E(λ_{k+1}) − E(λ_k)) P‖ / (λ_{k+1} − λ_k) per cell.
    pub quotients: Vec<f64>,
    pub max_difference_quotient: f64,
    pub bound: f64,
    pub lipschitz_flag: bool,
    /// Set when the grid is finer than the local eigenvalue spacing.
    pub under_resolved: bool,
}

/// Tracks λ ↦ P E_H(λ) P on a grid. With P̂ = U*PU, the norm over an index
/// set S of eigenvalues is λ_max of the principal submatrix P̂_SS.
pub fn ac_modulus(p: &Projection, s: &SpectralResolution, grid: &[f64], bound: f64) -> Result<ACReport> {
    if grid.is_empty() {
        return Err(invalid("ac_modulus grid is empty"));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("ac_modulus grid must be strictly ascending"));
    }
    if p.dim() != s.dim() {
        return Err(Error::DimensionMismatch { expected: s.dim(), found: p.dim() });
    }
    let u = s.eigenvectors();
    let p_hat = u.adjoint().matmul(p.matrix()).matmul(u).hermitian_part();
    let top = |lo: usize, hi: usize| -> Result<f64> {
        if hi <= lo {
            return Ok(0.0);
        }
        let sub = ComplexMatrix::from_fn(hi - lo, |a, b| p_hat[(lo + a, lo + b)]);
        Ok(eigvalsh(&sub)?.last().copied().unwrap_or(0.0).max(0.0))
    };
    let counts: Vec<usize> = grid.iter().map(|&x| s.counting(x)).collect();
    let cdf_norms = counts.par_iter().map(|&c| top(0, c)).collect::<Result<Vec<_>>>()?;
    let quotients = (0..grid.len() - 1)
        .into_par_iter()
        .map(|k| Ok(top(counts[k], counts[k + 1])? / (grid[k + 1] - grid[k])))
        .collect::<Result<Vec<_>>>()?;
    let max_difference_quotient = quotients.iter().copied().fold(0.0, f64::max);
    let min_step = grid.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let spacing = s.max_spacing_in(grid[0], grid[grid.len() - 1]);
    Ok(ACReport {
        grid: grid.to_vec(),
        cdf_norms,
        quotients,
        max_difference_quotient,
        bound,
        lipschitz_flag: max_difference_quotient <= bound,
        under_resolved: grid.len() > 1 && min_step < spacing,
    })
}

/// Uniform grid with `cells` cells on [lo, hi].
pub fn uniform_grid(lo: f64, hi: f64, cells: usize) -> Vec<f64> {
    (0..=cells).map(|k| lo + (hi - lo) * k as f64 / cells as f64).collect()
}

/// Family of spectral cutoffs ω_n with 0 ⪯ ω_n ⪯ I, nested in n, → I.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffFamily {
    /// 𝟙_{[−n, n]}.
    #[default]
    Hard,
    /// 1 on [−n, n], falling linearly to 0 at |λ| = n + 1.
    Ramp,
}

impl CutoffFamily {
    pub fn eval(&self, n: u32, x: f64) -> f64 {
        let n = n as f64;
        match self {
            CutoffFamily::Hard => {
                if x.abs() <= n {
                    1.0
                } else {
                    0.0
                }
            }
            CutoffFamily::Ramp => (n + 1.0 - x.abs()).clamp(0.0, 1.0),
        }
    }
}

impl FromStr for CutoffFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hard" => Ok(CutoffFamily::Hard),
            "ramp" => Ok(CutoffFamily::Ramp),
            other => Err(Error::Unknown { kind: "cutoff family", name: other.to_string() }),
        }
    }
}

/// ω_n(H).
pub fn cutoff_operator(s: &SpectralResolution, n: u32, family: CutoffFamily) -> Result<HermitianOperator> {
    if n == 0 {
        return Err(invalid("cutoff index n must be at least 1"));
    }
    s.apply_real_function(|x| family.eval(n, x))
}

#[derive(Clone, Debug, Serialize)]
pub struct SmoothFilter {
    /// g = E(X)f.
    pub g: Vec<C64>,
    pub grid: Vec<f64>,
    /// ‖δ(λ, ε)f‖ at each grid point.
    pub density: Vec<f64>,
    /// Grid points kept in X.
    pub kept: Vec<bool>,
    /// Grid approximation of |X|.
    pub measure: f64,
}

/// Keeps the spectral content of f on X = {|λ| ≤ n, ‖δ(λ,ε)f‖ ≤ N}. Each
/// eigenvalue belongs to the grid cell of width ε/5 around its nearest grid
/// point; eigenvalues beyond ±n are dropped.
pub fn smooth_vector_filter(
    s: &SpectralResolution,
    f: &[C64],
    n_big: f64,
    n_small: f64,
    eps: f64,
) -> Result<SmoothFilter> {
    if f.len() != s.dim() {
        return Err(Error::DimensionMismatch { expected: s.dim(), found: f.len() });
    }
    if !(eps > 0.0) || !(n_big > 0.0) || !(n_small > 0.0) {
        return Err(invalid("smooth_vector_filter needs positive N, n and ε"));
    }
    let cells = ((2.0 * n_small / (eps / 5.0)).ceil() as usize).max(1);
    let dl = 2.0 * n_small / cells as f64;
    let grid: Vec<f64> = (0..=cells).map(|k| -n_small + k as f64 * dl).collect();
    let c = s.coefficients(f);
    let lam = s.eigenvalues();
    let density: Vec<f64> = grid
        .par_iter()
        .map(|&x| lam.iter().zip(&c).map(|(&l, ci)| (poisson(l - x, eps) * ci.norm()).powi(2)).sum::<f64>().sqrt())
        .collect();
    let kept: Vec<bool> = density.iter().map(|&d| d <= n_big).collect();
    let measure = kept
        .iter()
        .enumerate()
        .filter(|(_, &k)| k)
        .map(|(i, _)| if i == 0 || i == cells { 0.5 * dl } else { dl })
        .sum();
    let coeffs: Vec<C64> = lam
        .iter()
        .zip(&c)
        .map(|(&l, &ci)| {
            if l.abs() > n_small {
                return ZERO;
            }
            let k = (((l + n_small) / dl).round() as usize).min(cells);
            if kept[k] {
                ci
            } else {
                ZERO
            }
        })
        .collect();
    Ok(SmoothFilter { g: s.synthesize(&coeffs), grid, density, kept, measure })
}

/// ∫_{−T}^{T} ‖G e^{−itH} g‖² dt by the trapezoid rule with `steps` cells.
/// Works with the nonzero rows of GU, so a local G costs O(rows·N) per step.
pub fn windowed_time_integral(s: &SpectralResolution, g_op: &ComplexMatrix, g: &[C64], t: f64, steps: usize) -> f64 {
    let c = s.coefficients(g);
    let lam = s.eigenvalues();
    let gu = g_op.matmul(s.eigenvectors());
    let rows: Vec<Vec<C64>> = (0..gu.dim())
        .map(|i| gu.row(i))
        .filter(|r| r.iter().any(|z| *z != ZERO))
        .map(|r| r.iter().zip(&c).map(|(a, b)| a * b).collect())
        .collect();
    let steps = steps.max(2);
    let dt = 2.0 * t / steps as f64;
    let vals: Vec<f64> = (0..=steps)
        .into_par_iter()
        .map(|k| {
            let tk = -t + k as f64 * dt;
            let phase: Vec<C64> = lam.iter().map(|&l| C64::from_polar(1.0, -l * tk)).collect();
            let sq: f64 = rows.iter().map(|r| r.iter().zip(&phase).map(|(a, p)| a * p).sum::<C64>().norm_sqr()).sum();
            let w = if k == 0 || k == steps { 0.5 } else { 1.0 };
            w * sq
        })
        .collect();
    vals.into_iter().sum::<f64>() * dt
}

#[derive(Clone, Debug)]
pub struct PacEstimate {
    pub projection: Projection,
    pub reports: Vec<SmoothnessReport>,
    pub accepted: Vec<bool>,
}

impl PacEstimate {
    /// Largest γ₅ among accepted candidates.
    pub fn max_accepted_gamma5(&self) -> f64 {
        self.reports.iter().zip(&self.accepted).filter(|(_, &a)| a).map(|(r, _)| r.gamma[4]).fold(0.0, f64::max)
    }
}

/// Join of R(Ĝ*) over candidates that are mesh-smooth (finite γ's with spread
/// ≤ smooth_spread_tol), where Ĝ = G·E_H(window) is the compression the
/// functionals actually see.
pub fn pac_infty_estimate(
    s: &SpectralResolution,
    candidates: &[ComplexMatrix],
    params: &RegularizationParams,
    smooth_spread_tol: f64,
) -> Result<PacEstimate> {
    if candidates.is_empty() {
        return Err(invalid("pac_infty_estimate needs at least one candidate"));
    }
    let kernels = GammaKernels::new(s, params)?;
    let reports = candidates.par_iter().map(|g| kernels.estimate(g)).collect::<Result<Vec<_>>>()?;
    let accepted: Vec<bool> = reports.iter().map(|r| r.is_finite() && r.spread <= smooth_spread_tol).collect();
    let window = window_projection(s, params.lambda_window);
    let ranges: Vec<ComplexMatrix> = candidates
        .iter()
        .zip(&accepted)
        .filter(|(_, &a)| a)
        .map(|(g, _)| window.matrix().matmul(&g.adjoint()))
        .collect();
    let projection = if ranges.is_empty() { Projection::zero(s.dim()) } else { join_ranges(s.dim(), &ranges, JOIN_RANK_TOL)? };
    Ok(PacEstimate { projection, reports, accepted })
}

/// E_H([lo, hi]).
pub fn window_projection(s: &SpectralResolution, (lo, hi): (f64, f64)) -> Projection {
    let d: Vec<C64> = s
        .eigenvalues()
        .iter()
        .map(|&l| if l >= lo && l <= hi { C64::new(1.0, 0.0) } else { ZERO })
        .collect();
    Projection::with_tolerance(s.from_diagonal(&d), PROJ_TOL.max(1e-8)).expect("spectral projections are projections")
}

/// R(Ĝ*) for a single candidate, the natural P for checking that a smooth G
/// yields a norm absolutely continuous projection.
pub fn candidate_range(s: &SpectralResolution, g: &ComplexMatrix, params: &RegularizationParams) -> Result<Projection> {
    let window = window_projection(s, params.lambda_window);
    join_ranges(s.dim(), &[window.matrix().matmul(&g.adjoint())], JOIN_RANK_TOL)
}
