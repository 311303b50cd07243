//! End-to-end Kato–Rosenblum verification on a finite pair H, H₁ = H + V.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::*;
use crate::linalg::ComplexMatrix;
use crate::models::{build_coupling, CouplingSpec};
use crate::smoothness::{pac_infty_estimate, RegularizationParams};
use crate::trace_space::{schatten_norm, TraceWeight};

pub const KR_SCHEMA_VERSION: u32 = 1;

/// Named tolerances; every report carries the values it was checked against.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KrTolerances {
    /// Bound for the limit-dependent residuals (isometry, intertwining, ...).
    pub residual: f64,
    /// Bound for the exact finite-dimensional identities.
    pub exact: f64,
    pub time_conv: f64,
    pub stationary_conv: f64,
}

impl Default for KrTolerances {
    fn default() -> Self {
        Self { residual: 0.05, exact: 1e-8, time_conv: TIME_CONV_TOL, stationary_conv: STAT_CONV_TOL }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProjectionChoice {
    /// E_H(window) and E_{H₁}(window).
    Band,
    /// Join of the window-compressed site projections accepted as smooth.
    PacEstimate { eps_min: f64, len_min: f64, smooth_spread_tol: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DuhamelConfig {
    pub s: f64,
    pub w: f64,
    pub steps: usize,
}

impl Default for DuhamelConfig {
    fn default() -> Self {
        Self { s: 0.0, w: 5.0, steps: 2000 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KrConfig {
    pub window: (f64, f64),
    pub coupling: CouplingSpec,
    pub projections: ProjectionChoice,
    pub abel_rate: f64,
    pub t_max: f64,
    pub time_points: usize,
    pub eps_schedule: Vec<f64>,
    pub lambda_margin: f64,
    pub mesh_factor: f64,
    pub intertwining_windows: Vec<(f64, f64)>,
    /// (re, im) of the resolvent probe points.
    pub probe_z: Vec<(f64, f64)>,
    pub duhamel: DuhamelConfig,
    pub tolerances: KrTolerances,
}

impl Default for KrConfig {
    fn default() -> Self {
        Self {
            window: (1.0, 3.0),
            coupling: CouplingSpec::Identity,
            projections: ProjectionChoice::Band,
            abel_rate: 0.05,
            t_max: 200.0,
            time_points: 10,
            eps_schedule: vec![0.15, 0.1, 0.075, 0.05],
            lambda_margin: 0.4,
            mesh_factor: WAVE_MESH_FACTOR,
            intertwining_windows: vec![(1.0, 3.0), (0.8, 2.0), (2.0, 3.2)],
            probe_z: vec![(2.0, 1.0), (0.5, 0.25), (3.5, -0.5)],
            duhamel: DuhamelConfig::default(),
            tolerances: KrTolerances::default(),
        }
    }
}

impl KrConfig {
    pub fn time_schedule(&self) -> Result<Schedule> {
        Schedule::time(self.t_max, self.time_points, Some(self.abel_rate))
    }

    pub fn epsilon_schedule(&self) -> Result<Schedule> {
        Schedule::epsilon(self.eps_schedule.clone())
    }

    /// λ-grid over the snapped window ± margin with step ε_min/5.
    pub fn lambda_grid(&self, window: (f64, f64)) -> Result<Vec<f64>> {
        let eps = self.epsilon_schedule()?;
        Ok(lambda_grid(window.0 - self.lambda_margin, window.1 + self.lambda_margin, eps.points[0] / 5.0))
    }

    /// Checks that need only H: window inside the band, schedules well formed,
    /// ε floor above the local spacing.
    pub fn validate(&self, s: &SpectralResolution) -> Result<()> {
        let (lo, hi) = self.window;
        let (band_lo, band_hi) = s.band();
        if !(lo < hi) || lo < band_lo || hi > band_hi {
            return Err(Error::WindowOutsideBand { lo, hi, band_lo, band_hi });
        }
        self.time_schedule()?;
        let eps = self.epsilon_schedule()?;
        // The density diverges at the band edges; keep the broadest kernel clear of them.
        let eps_max = eps.points[eps.points.len() - 1];
        if lo - band_lo < 5.0 * eps_max || band_hi - hi < 5.0 * eps_max {
            return Err(invalid(format!(
                "window [{lo}, {hi}] must stay 5ε = {} away from the band edges [{band_lo}, {band_hi}]",
                5.0 * eps_max
            )));
        }
        if !(self.lambda_margin >= 0.0) || !(self.mesh_factor > 0.0) {
            return Err(invalid("lambda_margin must be nonnegative and mesh_factor positive"));
        }
        let spacing = s.max_spacing_in(lo - self.lambda_margin, hi + self.lambda_margin);
        if eps.points[0] < self.mesh_factor * spacing {
            return Err(Error::UnderResolvedMesh(format!(
                "ε_min {} below {} × local spacing {spacing:.4e}",
                eps.points[0], self.mesh_factor
            )));
        }
        if self.intertwining_windows.iter().any(|&(a, b)| !(a < b)) {
            return Err(invalid("intertwining windows need lo < hi"));
        }
        if self.duhamel.s > self.duhamel.w {
            return Err(invalid("duhamel interval needs s ≤ w"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeResidual {
    pub z: (f64, f64),
    pub residual: f64,
    pub conditioning: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MethodSummary {
    pub method: Method,
    pub converged: bool,
    pub schedule: Vec<f64>,
    pub residual_trail: Vec<f64>,
    pub isometry: f64,
    pub co_isometry_violation: f64,
    pub intertwining: Vec<f64>,
    pub conjugation: f64,
    /// (‖WP − W‖_max, ‖P₁W − W‖_max).
    pub support: (f64, f64),
    pub recurrence_warning: bool,
    pub mesh_warning: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SignReport {
    pub sign: Sign,
    pub time: MethodSummary,
    pub stationary: MethodSummary,
    /// ‖W_time − W_stat‖.
    pub agreement: f64,
    /// 2 × the larger final trail value.
    pub triangle_bound: f64,
    /// max-entry distance between the weak construction and P₁W_timeP.
    pub weak_agreement: f64,
    pub chain_identity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KRReport {
    pub schema_version: u32,
    pub dim: usize,
    pub window: (f64, f64),
    pub snapped_window: (f64, f64),
    pub rank_p: usize,
    pub rank_p1: usize,
    pub perturbation_trace_norm: f64,
    pub commutator_trace_norm: f64,
    pub duhamel_residual: f64,
    pub resolvent_commutator: Vec<ProbeResidual>,
    pub signs: Vec<SignReport>,
    pub checks: Vec<Check>,
    pub flags: Vec<String>,
    pub passed: bool,
    pub config: KrConfig,
}

impl KRReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Largest value among all checks.
    pub fn max_residual(&self) -> f64 {
        self.checks.iter().map(|c| c.value).fold(0.0, f64::max)
    }
}

fn summarize(w: &WaveResult, pair: &ScatteringPair, windows: &[BorelSet]) -> Result<MethodSummary> {
    let (iso, co) = isometry_residuals(w, pair)?;
    let intertwining = windows.par_iter().map(|set| intertwining_residual(w, pair, set)).collect::<Result<Vec<_>>>()?;
    Ok(MethodSummary {
        method: w.method,
        converged: w.converged,
        schedule: w.schedule.clone(),
        residual_trail: w.residual_trail.clone(),
        isometry: iso,
        co_isometry_violation: co,
        intertwining,
        conjugation: conjugation_residual(w, pair)?,
        support: w.support_defects(pair),
        recurrence_warning: w.recurrence_warning,
        mesh_warning: w.mesh_warning,
    })
}

fn sign_report(pair: &ScatteringPair, sign: Sign, cfg: &KrConfig, grid: &[f64], windows: &[BorelSet]) -> Result<SignReport> {
    let tol = &cfg.tolerances;
    let time_sched = cfg.time_schedule()?;
    let eps = cfg.epsilon_schedule()?;
    let wt = time_dependent_wave_with(pair, sign, &time_sched, tol.time_conv)?;
    let ws = stationary_wave_with(pair, sign, grid, &eps, cfg.mesh_factor, tol.stationary_conv)?;
    let weak = weak_wave(pair, sign, &time_sched)?;
    let compressed = pair.p1.matrix().matmul(&wt.w).matmul(pair.p.matrix());
    let agreement = operator_norm(&(&wt.w - &ws.w))?;
    let chain = {
        let rhs = stationary_wave_with(&pair.chain(), sign, grid, &eps, cfg.mesh_factor, tol.stationary_conv)?;
        operator_norm(&(&ws.w.adjoint().matmul(&ws.w) - &rhs.w))?
    };
    Ok(SignReport {
        sign,
        time: summarize(&wt, pair, windows)?,
        stationary: summarize(&ws, pair, windows)?,
        agreement,
        triangle_bound: 2.0 * wt.final_trail().max(ws.final_trail()),
        weak_agreement: weak.w.max_diff(&compressed),
        chain_identity: chain,
    })
}

/// Site-projection candidates joined through the smoothness estimate.
fn pac_projection(s: &SpectralResolution, window: (f64, f64), eps_min: f64, len_min: f64, spread_tol: f64) -> Result<Projection> {
    let params = RegularizationParams::standard(s, eps_min, len_min, window)?;
    let n = s.dim();
    let candidates: Vec<ComplexMatrix> = (0..n)
        .map(|k| {
            let mut m = ComplexMatrix::zeros(n);
            m[(k, k)] = crate::linalg::ONE;
            m
        })
        .collect();
    Ok(pac_infty_estimate(s, &candidates, &params, spread_tol)?.projection)
}

/// Validates `cfg` against H and assembles the pair (H, H + V; J, P, P₁).
pub fn build_pair(h: &HermitianOperator, v: &HermitianOperator, cfg: &KrConfig) -> Result<ScatteringPair> {
    if v.dim() != h.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), found: v.dim() });
    }
    let s = spectral_decompose(h)?;
    cfg.validate(&s)?;
    let s1 = spectral_decompose(&h.add(v))?;
    let j = build_coupling(&cfg.coupling, &s)?;
    match &cfg.projections {
        ProjectionChoice::Band => ScatteringPair::band(s, s1, j, cfg.window),
        ProjectionChoice::PacEstimate { eps_min, len_min, smooth_spread_tol } => {
            let p = pac_projection(&s, cfg.window, *eps_min, *len_min, *smooth_spread_tol)?;
            let p1 = pac_projection(&s1, cfg.window, *eps_min, *len_min, *smooth_spread_tol)?;
            ScatteringPair::from_resolutions(s, s1, j, p, p1)
        }
    }
}

/// Builds H₁ = H + V, constructs W± by the time-dependent and stationary
/// routes and checks every identity of the proof chain on the result.
pub fn verify_kato_rosenblum(h: &HermitianOperator, v: &HermitianOperator, cfg: &KrConfig) -> Result<KRReport> {
    let pair = build_pair(h, v, cfg)?;
    let snapped = snap_window(&pair.s, &pair.s1, cfg.window);
    let grid = cfg.lambda_grid(snapped)?;
    let windows = cfg
        .intertwining_windows
        .iter()
        .map(|&w| snapped_interval(&pair, w))
        .collect::<Result<Vec<_>>>()?;

    let weight = TraceWeight::uniform(pair.dim());
    let perturbation_trace_norm = schatten_norm(v.matrix(), 1.0, &weight)?;
    let commutator_trace_norm = schatten_norm(&pair.commutator(), 1.0, &weight)?;
    let duhamel = duhamel_residual(&pair, cfg.duhamel.s, cfg.duhamel.w, cfg.duhamel.steps)?;
    let resolvent_commutator = cfg
        .probe_z
        .iter()
        .map(|&(re, im)| {
            let z = C64::new(re, im);
            Ok(ProbeResidual { z: (re, im), residual: resolvent_commutator_residual(&pair, z)?, conditioning: resolvent_conditioning(&pair, z) })
        })
        .collect::<Result<Vec<_>>>()?;
    let signs = [Sign::Plus, Sign::Minus]
        .par_iter()
        .map(|&sign| sign_report(&pair, sign, cfg, &grid, &windows))
        .collect::<Result<Vec<_>>>()?;

    let tol = &cfg.tolerances;
    let mut checks = Vec::new();
    let mut push = |name: String, value: f64, tolerance: f64| {
        checks.push(Check { passed: value <= tolerance, name, value, tolerance });
    };
    push("duhamel".into(), duhamel, tol.exact);
    for (k, r) in resolvent_commutator.iter().enumerate() {
        push(format!("resolvent_commutator_{k}"), r.residual, tol.exact * r.conditioning);
    }
    let mut flags = Vec::new();
    for r in &signs {
        let sg = r.sign.name();
        for m in [&r.time, &r.stationary] {
            let name = m.method.name();
            push(format!("{sg}.{name}.isometry"), m.isometry, tol.residual);
            push(format!("{sg}.{name}.co_isometry"), m.co_isometry_violation, tol.residual);
            for (k, x) in m.intertwining.iter().enumerate() {
                push(format!("{sg}.{name}.intertwining_{k}"), *x, tol.residual);
            }
            push(format!("{sg}.{name}.conjugation"), m.conjugation, tol.residual);
            if !m.converged {
                flags.push(format!("{sg}.{name}: not converged (final trail {:.3e})", m.residual_trail.last().copied().unwrap_or(0.0)));
            }
            if m.mesh_warning {
                flags.push(format!("{sg}.{name}: ε_min below the local spacing of H1"));
            }
            if m.recurrence_warning {
                flags.push(format!("{sg}.{name}: schedule exceeds the recurrence time"));
            }
        }
        push(format!("{sg}.agreement"), r.agreement, tol.residual);
        push(format!("{sg}.chain_identity"), r.chain_identity, tol.residual);
    }
    let passed = checks.iter().all(|c| c.passed) && flags.is_empty();
    Ok(KRReport {
        schema_version: KR_SCHEMA_VERSION,
        dim: pair.dim(),
        window: cfg.window,
        snapped_window: snapped,
        rank_p: pair.p.rank(),
        rank_p1: pair.p1.rank(),
        perturbation_trace_norm,
        commutator_trace_norm,
        duhamel_residual: duhamel,
        resolvent_commutator,
        signs,
        checks,
        flags,
        passed,
        config: cfg.clone(),
    })
}
