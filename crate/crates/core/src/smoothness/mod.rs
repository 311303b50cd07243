//! Regularized Kato-smoothness functionals γ₁…γ₅.
//!
//! G is compressed to the spectral window, Ĝ = G·E_H(window), and every
//! functional becomes a quadratic form in the window eigencoordinates c of f:
//!
//! - γ₁²: (1/2π) c*(K∘F)c with F_ab = ∫_{−T}^{T} cos((λ_a−λ_b)t) dt
//! - γ₂²: (1/2π)² c*(K∘I₂)c with I₂_ab = ∫ r̄_a⁺r_b⁺ + r̄_a⁻r_b⁻ dλ
//! - γ₃²: c*(K∘I₃)c with I₃_ab = ∫ d_a d_b dλ
//! - γ₄²: sup_λ λ_max(√d K √d)
//! - γ₅²: sup_Λ λ_max(K_ΛΛ)/|Λ|
//!
//! where K = Ĝ*Ĝ, r_a^± = 1/(λ_a − λ ∓ iε) and d_a are the Poisson weights of
//! δ(λ, ε). F, I₂ and I₃ depend only on the spectrum and the parameters, so
//! they are built once by [`GammaKernels`] and reused across candidates G.

mod ac;

pub use ac::*;

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::linalg::{eigh, eigvalsh, inner, psd_power_max, ComplexMatrix, C64, ZERO};
use crate::operator_core::{poisson, SpectralResolution};
use crate::rng::Rng;

pub const DEFAULT_PROBE_COUNT: usize = 16;
pub const DEFAULT_MESH_FACTOR: f64 = 3.0;
pub const DEFAULT_LAMBDA_MARGIN: f64 = 1.0;

/// Mesh regularization of the suprema in the smoothness functionals.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegularizationParams {
    pub eps_min: f64,
    pub len_min: f64,
    pub t_window: f64,
    pub lambda_window: (f64, f64),
    pub probe_count: usize,
    /// Extension of the λ-integrals beyond the window on each side.
    pub lambda_margin: f64,
    /// eps_min and len_min must be at least this multiple of the local spacing.
    pub mesh_factor: f64,
    pub seed: u64,
    /// Largest eigenvalue spacing inside the window, recorded at validation.
    pub max_spacing: f64,
}

impl RegularizationParams {
    pub fn new(
        s: &SpectralResolution,
        eps_min: f64,
        len_min: f64,
        t_window: f64,
        lambda_window: (f64, f64),
        probe_count: usize,
    ) -> Result<Self> {
        let p = Self {
            eps_min,
            len_min,
            t_window,
            lambda_window,
            probe_count,
            lambda_margin: DEFAULT_LAMBDA_MARGIN,
            mesh_factor: DEFAULT_MESH_FACTOR,
            seed: 0,
            max_spacing: 0.0,
        };
        p.validated(s)
    }

    /// Defaults: t_window = π/eps_min, 16 probes.
    pub fn standard(s: &SpectralResolution, eps_min: f64, len_min: f64, window: (f64, f64)) -> Result<Self> {
        Self::new(s, eps_min, len_min, PI / eps_min, window, DEFAULT_PROBE_COUNT)
    }

    pub fn with_margin(mut self, margin: f64) -> Self {
        self.lambda_margin = margin;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Relaxes or tightens the spacing rule and revalidates.
    pub fn with_mesh_factor(mut self, s: &SpectralResolution, factor: f64) -> Result<Self> {
        self.mesh_factor = factor;
        self.validated(s)
    }

    /// Checks the mesh rule against `s` and records the measured spacing.
    pub fn validated(mut self, s: &SpectralResolution) -> Result<Self> {
        let (lo, hi) = self.lambda_window;
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(invalid(format!("lambda_window must satisfy lo < hi, got ({lo}, {hi})")));
        }
        for (name, v) in [("eps_min", self.eps_min), ("len_min", self.len_min), ("t_window", self.t_window)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(invalid(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if self.probe_count == 0 {
            return Err(invalid("probe_count must be positive"));
        }
        if !(self.lambda_margin >= 0.0) {
            return Err(invalid("lambda_margin must be nonnegative"));
        }
        let spacing = s.max_spacing_in(lo, hi);
        let floor = self.mesh_factor * spacing;
        if self.eps_min < floor || self.len_min < floor {
            return Err(Error::UnderResolvedMesh(format!(
                "eps_min {} and len_min {} must be at least {} × spacing {:.4e} = {:.4e}",
                self.eps_min, self.len_min, self.mesh_factor, spacing, floor
            )));
        }
        if self.t_window > PI / self.eps_min * (1.0 + 1e-12) {
            return Err(Error::UnderResolvedMesh(format!(
                "t_window {} exceeds π/eps_min = {}",
                self.t_window,
                PI / self.eps_min
            )));
        }
        self.max_spacing = spacing;
        Ok(self)
    }
}

/// Rayleigh quotients of one probe vector against the three quadrature forms.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeRow {
    pub probe: usize,
    pub kind: &'static str,
    pub gamma1_sq: f64,
    pub gamma2_sq: f64,
    pub gamma3_sq: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SmoothnessReport {
    pub gamma: [f64; 5],
    /// One-sided forms (1/2π)² sup ∫‖GR(λ±iε)f‖² dλ for + and −.
    pub one_sided: [f64; 2],
    pub spread: f64,
    pub params: RegularizationParams,
    pub probes: Vec<ProbeRow>,
}

impl SmoothnessReport {
    pub fn max_gamma(&self) -> f64 {
        self.gamma.iter().fold(0.0, |m: f64, &g| m.max(g))
    }

    pub fn is_finite(&self) -> bool {
        self.gamma.iter().all(|g| g.is_finite())
    }
}

/// (max γ − min γ)/max γ, zero when all vanish.
pub fn spread(gamma: &[f64]) -> f64 {
    let max = gamma.iter().fold(0.0, |m: f64, &g| m.max(g));
    let min = gamma.iter().fold(f64::INFINITY, |m: f64, &g| m.min(g));
    if max <= f64::MIN_POSITIVE {
        0.0
    } else {
        (max - min) / max
    }
}

/// Spectrum-dependent quadrature kernels, shared across candidates.
#[derive(Clone, Debug)]
pub struct GammaKernels {
    params: RegularizationParams,
    dim: usize,
    /// Eigen-indices inside the window.
    window: Vec<usize>,
    eigenvectors: ComplexMatrix,
    f_kernel: Vec<f64>,
    i2_kernel: Vec<f64>,
    i2_plus: Vec<C64>,
    i3_kernel: Vec<f64>,
    /// Poisson weights at λ-grid points inside the window, one row per point.
    window_weights: Vec<Vec<f64>>,
    /// Dyadic intervals as (length, local window positions).
    dyadic: Vec<(f64, Vec<usize>)>,
}

impl GammaKernels {
    pub fn new(s: &SpectralResolution, params: &RegularizationParams) -> Result<Self> {
        let params = params.clone().validated(s)?;
        let (lo, hi) = params.lambda_window;
        let lam = s.eigenvalues();
        let window: Vec<usize> = (0..s.dim()).filter(|&i| lam[i] >= lo && lam[i] <= hi).collect();
        let wl: Vec<f64> = window.iter().map(|&i| lam[i]).collect();
        let m = wl.len();
        let eps = params.eps_min;

        // γ₁: trapezoid on [−T, T], dt ≤ 0.1/‖H‖, folded onto [0, T] by symmetry.
        let t = params.t_window;
        let dt_max = 0.1 / s.norm().max(1e-12);
        let half_steps = ((t / dt_max).ceil() as usize).max(1);
        let dt = t / half_steps as f64;
        let f_kernel: Vec<f64> = (0..m * m)
            .into_par_iter()
            .map(|k| {
                let omega = wl[k / m] - wl[k % m];
                let mut acc = 0.5 * (omega * t).cos();
                for j in 1..half_steps {
                    acc += (omega * j as f64 * dt).cos();
                }
                2.0 * dt * (acc + 0.5)
            })
            .collect();

        // λ-grid over the window plus margin, dλ ≤ ε/5.
        let (glo, ghi) = (lo - params.lambda_margin, hi + params.lambda_margin);
        let cells = (((ghi - glo) / (eps / 5.0)).ceil() as usize).max(1);
        let dl = (ghi - glo) / cells as f64;
        let grid: Vec<f64> = (0..=cells).map(|k| glo + k as f64 * dl).collect();
        let weight = |k: usize| if k == 0 || k == cells { 0.5 * dl } else { dl };

        let mut i2_plus = vec![ZERO; m * m];
        let mut i3_kernel = vec![0.0; m * m];
        for (k, &x) in grid.iter().enumerate() {
            let w = weight(k);
            let r: Vec<C64> = wl.iter().map(|&l| C64::new(1.0, 0.0) / C64::new(l - x, -eps)).collect();
            let d: Vec<f64> = wl.iter().map(|&l| poisson(l - x, eps)).collect();
            for a in 0..m {
                let ra = r[a].conj() * w;
                let da = d[a] * w;
                for b in 0..m {
                    i2_plus[a * m + b] += ra * r[b];
                    i3_kernel[a * m + b] += da * d[b];
                }
            }
        }
        // r⁻ = conj(r⁺), so the two-sided kernel is twice the real part.
        let i2_kernel: Vec<f64> = i2_plus.iter().map(|z| 2.0 * z.re).collect();

        let window_weights: Vec<Vec<f64>> = grid
            .iter()
            .filter(|&&x| x >= lo && x <= hi)
            .map(|&x| wl.iter().map(|&l| poisson(l - x, eps)).collect())
            .collect();

        let mut dyadic = Vec::new();
        let mut len = params.len_min;
        while len <= (hi - lo) * (1.0 + 1e-12) {
            let mut a = lo;
            while a + len <= hi + 1e-12 * (hi - lo) {
                let members: Vec<usize> = (0..m).filter(|&j| wl[j] >= a && wl[j] < a + len).collect();
                dyadic.push((len, members));
                a += 0.5 * len;
            }
            len *= 2.0;
        }

        Ok(Self {
            params,
            dim: s.dim(),
            window,
            eigenvectors: s.eigenvectors().clone(),
            f_kernel,
            i2_kernel,
            i2_plus,
            i3_kernel,
            window_weights,
            dyadic,
        })
    }

    pub fn params(&self) -> &RegularizationParams {
        &self.params
    }

    /// Number of eigenvalues inside the window.
    pub fn window_size(&self) -> usize {
        self.window.len()
    }

    /// Ĝ = G·U restricted to window eigencolumns, as N rows of length m.
    fn compress(&self, g: &ComplexMatrix) -> Vec<Vec<C64>> {
        let n = self.dim;
        let m = self.window.len();
        let u = &self.eigenvectors;
        (0..n)
            .map(|i| {
                let mut row = vec![ZERO; m];
                for (k, &gik) in g.row(i).iter().enumerate() {
                    if gik == ZERO {
                        continue;
                    }
                    let urow = u.row(k);
                    for (r, &col) in row.iter_mut().zip(&self.window) {
                        *r += gik * urow[col];
                    }
                }
                row
            })
            .collect()
    }

    /// K = Ĝ*Ĝ on the window (m × m).
    pub fn window_gram(&self, g: &ComplexMatrix) -> Result<ComplexMatrix> {
        if g.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: g.dim() });
        }
        g.check_finite()?;
        let m = self.window.len();
        let rows = self.compress(g);
        let mut k = ComplexMatrix::zeros(m);
        for row in rows.iter().filter(|r| r.iter().any(|z| *z != ZERO)) {
            for a in 0..m {
                let ca = row[a].conj();
                if ca == ZERO {
                    continue;
                }
                for b in 0..m {
                    k[(a, b)] += ca * row[b];
                }
            }
        }
        Ok(k.hermitian_part())
    }

    pub fn estimate(&self, g: &ComplexMatrix) -> Result<SmoothnessReport> {
        let m = self.window.len();
        let k = self.window_gram(g)?;
        if m == 0 || k.max_abs() == 0.0 {
            return Ok(SmoothnessReport {
                gamma: [0.0; 5],
                one_sided: [0.0; 2],
                spread: 0.0,
                params: self.params.clone(),
                probes: Vec::new(),
            });
        }
        let hadamard_real = |kernel: &[f64], scale: f64| {
            ComplexMatrix::from_fn(m, |a, b| k[(a, b)] * (kernel[a * m + b] * scale))
        };
        let q1 = hadamard_real(&self.f_kernel, 1.0 / (2.0 * PI));
        let q2 = hadamard_real(&self.i2_kernel, 1.0 / (4.0 * PI * PI));
        let q3 = hadamard_real(&self.i3_kernel, 1.0);
        let q_plus = ComplexMatrix::from_fn(m, |a, b| k[(a, b)] * self.i2_plus[a * m + b] / (4.0 * PI * PI));
        let q_minus = ComplexMatrix::from_fn(m, |a, b| k[(a, b)] * self.i2_plus[a * m + b].conj() / (4.0 * PI * PI));

        // Dominant directions of each form and of K, then seeded random probes.
        let forms = [&q1, &q2, &q3, &k];
        let dominant: Vec<Vec<C64>> = forms
            .par_iter()
            .map(|q| eigh(&q.hermitian_part()).map(|e| e.vectors.column(m - 1)))
            .collect::<Result<_>>()?;
        let mut probes: Vec<(&'static str, Vec<C64>)> =
            dominant.into_iter().zip(["dominant_q1", "dominant_q2", "dominant_q3", "dominant_gram"]).map(|(v, n)| (n, v)).collect();
        let mut rng = Rng::new(self.params.seed);
        while probes.len() < self.params.probe_count.max(4) {
            probes.push(("random", rng.unit_vector(m)));
        }
        let rayleigh = |q: &ComplexMatrix, c: &[C64]| inner(&q.mul_vec(c), c).re.max(0.0);
        let rows: Vec<ProbeRow> = probes
            .iter()
            .enumerate()
            .map(|(i, (kind, c))| ProbeRow {
                probe: i,
                kind,
                gamma1_sq: rayleigh(&q1, c),
                gamma2_sq: rayleigh(&q2, c),
                gamma3_sq: rayleigh(&q3, c),
            })
            .collect();
        let best = |f: fn(&ProbeRow) -> f64| rows.iter().map(f).fold(0.0, f64::max);
        let g1 = best(|r| r.gamma1_sq);
        let g2 = best(|r| r.gamma2_sq);
        let g3 = best(|r| r.gamma3_sq);
        let one_sided = [
            probes.iter().map(|(_, c)| rayleigh(&q_plus, c)).fold(0.0, f64::max).sqrt(),
            probes.iter().map(|(_, c)| rayleigh(&q_minus, c)).fold(0.0, f64::max).sqrt(),
        ];

        let g4 = self.gamma4_sq(&k)?;
        let g5 = self.gamma5_sq(&k)?;
        let gamma = [g1.sqrt(), g2.sqrt(), g3.sqrt(), g4.sqrt(), g5.sqrt()];
        Ok(SmoothnessReport { gamma, one_sided, spread: spread(&gamma), params: self.params.clone(), probes: rows })
    }

    /// sup over window grid points of ‖Gδ(λ,ε)G*‖ = λ_max(√d K √d). Power
    /// iteration scans the grid; the best few points are recomputed exactly.
    fn gamma4_sq(&self, k: &ComplexMatrix) -> Result<f64> {
        let m = k.dim();
        let scaled = |d: &[f64]| {
            let s: Vec<f64> = d.iter().map(|x| x.sqrt()).collect();
            ComplexMatrix::from_fn(m, |a, b| k[(a, b)] * (s[a] * s[b]))
        };
        let mut estimates = Vec::with_capacity(self.window_weights.len());
        let mut warm: Option<Vec<C64>> = None;
        for d in &self.window_weights {
            let (v, x) = psd_power_max(&scaled(d), warm.as_deref(), 1e-12, 3000);
            estimates.push(v);
            warm = Some(x);
        }
        let mut order: Vec<usize> = (0..estimates.len()).collect();
        order.sort_by(|&a, &b| estimates[b].total_cmp(&estimates[a]));
        let refined = order
            .iter()
            .take(3)
            .map(|&i| eigvalsh(&scaled(&self.window_weights[i])).map(|v| v[m - 1]))
            .collect::<Result<Vec<f64>>>()?;
        Ok(refined.into_iter().chain(estimates).fold(0.0, f64::max))
    }

    /// sup over the dyadic family of λ_max(K_ΛΛ)/|Λ|.
    fn gamma5_sq(&self, k: &ComplexMatrix) -> Result<f64> {
        let vals = self
            .dyadic
            .par_iter()
            .map(|(len, members)| {
                if members.is_empty() {
                    return Ok(0.0);
                }
                let sub = ComplexMatrix::from_fn(members.len(), |a, b| k[(members[a], members[b])]);
                Ok(eigvalsh(&sub)?.last().copied().unwrap_or(0.0).max(0.0) / len)
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(vals.into_iter().fold(0.0, f64::max))
    }
}

/// The five regularized smoothness constants of G relative to H.
pub fn gamma_estimates(g: &ComplexMatrix, s: &SpectralResolution, params: &RegularizationParams) -> Result<SmoothnessReport> {
    GammaKernels::new(s, params)?.estimate(g)
}
