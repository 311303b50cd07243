//! Generalized wave operators and residual checks for the identities in the
//! proof of the Kato–Rosenblum theorem.
//!
//! Everything is evaluated in the eigenbases of H and H₁. With
//! M = U₁*JU, T̂ = U₁*(H₁J − JH)U and ω_ab = μ_a − λ_b:
//!
//! - time-dependent: W_J(t) = U₁ (M ∘ e^{itω}) U*, Abel-averaged in closed form;
//! - stationary: the δ-form of the resolvent commutator identity,
//!   W(ε) = P₁U₁[M + B(ε)∘T̂]U*P with B_ab = ∫ d¹_a(λ,ε) r_b(λ±iε) dλ,
//!   extrapolated linearly to ε = 0. The J-term carries the full-line Poisson
//!   mass ∫d¹_a dλ = 1 exactly.

mod kr;

pub use kr::*;

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, hermitian_norm, operator_norm, ComplexMatrix, C64, I, ONE, ZERO};
use crate::operator_core::{
    poisson, range_projection, snap_to_gap, spectral_decompose, BorelSet, HermitianOperator, Projection,
    SpectralResolution, PROJ_TOL,
};

/// Final trail value below which a time-dependent computation counts as converged.
pub const TIME_CONV_TOL: f64 = 1e-3;
/// Final ε-trail value below which a stationary computation counts as converged.
pub const STAT_CONV_TOL: f64 = 0.05;
/// ε and dλ floors for wave operators are this multiple of the local spacing.
pub const WAVE_MESH_FACTOR: f64 = 1.0;
/// Rank tolerance for the range projection of a computed W.
pub const RANGE_RANK_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Sign::Plus => "plus",
            Sign::Minus => "minus",
        }
    }
}

impl std::str::FromStr for Sign {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plus" | "+" => Ok(Sign::Plus),
            "minus" | "-" => Ok(Sign::Minus),
            other => Err(Error::Unknown { kind: "sign", name: other.to_string() }),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    TimeDependent,
    Weak,
    Stationary,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::TimeDependent => "time_dependent",
            Method::Weak => "weak",
            Method::Stationary => "stationary",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    Time,
    Epsilon,
}

/// Discretization of t → ∞ or ε → 0. Points are stored ascending; ε-schedules
/// are walked from the largest point down.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Schedule {
    pub kind: ScheduleKind,
    pub points: Vec<f64>,
    pub abel_rate: Option<f64>,
}

impl Schedule {
    pub fn new(kind: ScheduleKind, mut points: Vec<f64>, abel_rate: Option<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(invalid("schedule needs at least one point"));
        }
        if points.iter().any(|&p| !(p > 0.0) || !p.is_finite()) {
            return Err(invalid("schedule points must be positive and finite"));
        }
        points.sort_by(f64::total_cmp);
        if points.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid("schedule points must be distinct"));
        }
        if let Some(r) = abel_rate {
            if !(r > 0.0) || !r.is_finite() {
                return Err(invalid("abel_rate must be positive"));
            }
            if kind == ScheduleKind::Epsilon {
                return Err(invalid("abel_rate only applies to time schedules"));
            }
        }
        Ok(Self { kind, points, abel_rate })
    }

    /// `count` equally spaced times ending at t_max.
    pub fn time(t_max: f64, count: usize, abel_rate: Option<f64>) -> Result<Self> {
        let count = count.max(1);
        Self::new(ScheduleKind::Time, (1..=count).map(|k| t_max * k as f64 / count as f64).collect(), abel_rate)
    }

    pub fn epsilon(points: Vec<f64>) -> Result<Self> {
        Self::new(ScheduleKind::Epsilon, points, None)
    }

    /// Points from largest to smallest.
    pub fn descending(&self) -> Vec<f64> {
        self.points.iter().rev().copied().collect()
    }

    fn expect(&self, kind: ScheduleKind) -> Result<()> {
        if self.kind != kind {
            return Err(invalid(format!("expected a {kind:?} schedule, got {:?}", self.kind)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct WaveResult {
    pub w: ComplexMatrix,
    pub method: Method,
    pub sign: Sign,
    /// Schedule points in the order visited (ascending t, descending ε).
    pub schedule: Vec<f64>,
    /// Frobenius norm of the approximant at each schedule point.
    pub values: Vec<f64>,
    /// Change between consecutive schedule points.
    pub residual_trail: Vec<f64>,
    pub converged: bool,
    /// π / (smallest eigenvalue gap of H and H₁), for time schedules.
    pub recurrence_time: Option<f64>,
    pub recurrence_warning: bool,
    /// H₁ spacing exceeds the ε floor; the ε-trail cannot be trusted.
    pub mesh_warning: bool,
}

impl WaveResult {
    pub fn final_trail(&self) -> f64 {
        self.residual_trail.last().copied().unwrap_or(0.0)
    }

    /// (‖WP − W‖_max, ‖P₁W − W‖_max).
    pub fn support_defects(&self, pair: &ScatteringPair) -> (f64, f64) {
        let wp = self.w.matmul(pair.p.matrix());
        let p1w = pair.p1.matrix().matmul(&self.w);
        (wp.max_diff(&self.w), p1w.max_diff(&self.w))
    }
}

/// H, H₁, the identification J and a.c. surrogates P, P₁.
#[derive(Clone, Debug)]
pub struct ScatteringPair {
    pub s: SpectralResolution,
    pub s1: SpectralResolution,
    pub j: ComplexMatrix,
    pub p: Projection,
    pub p1: Projection,
}

impl ScatteringPair {
    pub fn new(h: &HermitianOperator, h1: &HermitianOperator, j: ComplexMatrix, p: Projection, p1: Projection) -> Result<Self> {
        Self::from_resolutions(spectral_decompose(h)?, spectral_decompose(h1)?, j, p, p1)
    }

    pub fn from_resolutions(
        s: SpectralResolution,
        s1: SpectralResolution,
        j: ComplexMatrix,
        p: Projection,
        p1: Projection,
    ) -> Result<Self> {
        let n = s.dim();
        for found in [s1.dim(), j.dim(), p.dim(), p1.dim()] {
            if found != n {
                return Err(Error::DimensionMismatch { expected: n, found });
            }
        }
        j.check_finite()?;
        let scale = s.norm().max(s1.norm()).max(1.0);
        let tol = PROJ_TOL.max(1e-12 * scale * n as f64);
        for (name, proj, op) in [("P", &p, &s), ("P1", &p1, &s1)] {
            let defect = proj.commutator_defect(op.operator().matrix());
            if defect > tol {
                return Err(invalid(format!("{name} does not commute with its operator (defect {defect:e})")));
            }
        }
        Ok(Self { s, s1, j, p, p1 })
    }

    /// P = E_H(window), P₁ = E_{H₁}(window) with window edges moved to the
    /// middle of the nearest gap of spec(H) ∪ spec(H₁).
    pub fn band(s: SpectralResolution, s1: SpectralResolution, j: ComplexMatrix, window: (f64, f64)) -> Result<Self> {
        let (lo, hi) = snap_window(&s, &s1, window);
        let set = BorelSet::interval(lo, hi)?;
        let p = s.spectral_projection(&set);
        let p1 = s1.spectral_projection(&set);
        Self::from_resolutions(s, s1, j, p, p1)
    }

    pub fn dim(&self) -> usize {
        self.s.dim()
    }

    /// (H₁, H; J*, P₁, P): roles swapped.
    pub fn swapped(&self) -> Self {
        Self { s: self.s1.clone(), s1: self.s.clone(), j: self.j.adjoint(), p: self.p1.clone(), p1: self.p.clone() }
    }

    /// (H, H; J*J, P, P), the right side of the chain identity.
    pub fn chain(&self) -> Self {
        Self {
            s: self.s.clone(),
            s1: self.s.clone(),
            j: self.j.adjoint().matmul(&self.j),
            p: self.p.clone(),
            p1: self.p.clone(),
        }
    }

    /// H₁J − JH.
    pub fn commutator(&self) -> ComplexMatrix {
        let h = self.s.operator().matrix();
        let h1 = self.s1.operator().matrix();
        &h1.matmul(&self.j) - &self.j.matmul(h)
    }

    /// M = U₁*JU.
    fn m_hat(&self) -> ComplexMatrix {
        self.s1.eigenvectors().adjoint().matmul(&self.j).matmul(self.s.eigenvectors())
    }

    /// T̂ = U₁*(H₁J − JH)U.
    fn t_hat(&self) -> ComplexMatrix {
        self.s1.eigenvectors().adjoint().matmul(&self.commutator()).matmul(self.s.eigenvectors())
    }

    /// U₁ X U*.
    fn to_standard(&self, x: &ComplexMatrix) -> ComplexMatrix {
        self.s1.eigenvectors().matmul(x).matmul(&self.s.eigenvectors().adjoint())
    }

    fn omega(&self, a: usize, b: usize) -> f64 {
        self.s1.eigenvalues()[a] - self.s.eigenvalues()[b]
    }

    fn recurrence_time(&self) -> f64 {
        PI / self.s.min_gap().min(self.s1.min_gap())
    }

    /// W_J(t) = e^{itH₁} J e^{−itH}.
    pub fn w_j(&self, t: f64) -> ComplexMatrix {
        self.s1.propagator(-t).matmul(&self.j).matmul(&self.s.propagator(t))
    }
}

/// Moves both window edges into the widest gap of spec(H) ∪ spec(H₁) within
/// one local H-spacing. A small perturbation shifts each level of H only
/// slightly, so the nearest merged gap could separate a level from its
/// perturbed partner; the widest nearby gap keeps such pairs together.
pub fn snap_window(s: &SpectralResolution, s1: &SpectralResolution, (lo, hi): (f64, f64)) -> (f64, f64) {
    let levels = merged_levels(s, s1);
    let edge = |x: f64| {
        let reach = s.max_spacing_in(x, x);
        snap_to_wide_gap(&levels, x, reach)
    };
    (edge(lo), edge(hi))
}

/// Midpoint of the widest gap of `levels` whose midpoint lies within `reach`
/// of x; falls back to the gap containing x.
pub fn snap_to_wide_gap(levels: &[f64], x: f64, reach: f64) -> f64 {
    let mut best: Option<(f64, f64)> = None;
    for w in levels.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        let width = w[1] - w[0];
        if (mid - x).abs() > reach {
            continue;
        }
        let better = match best {
            None => true,
            Some((bw, bm)) => width > bw || (width == bw && (mid - x).abs() < (bm - x).abs()),
        };
        if better {
            best = Some((width, mid));
        }
    }
    best.map_or_else(|| snap_to_gap(levels, x), |(_, mid)| mid)
}

fn merged_levels(s: &SpectralResolution, s1: &SpectralResolution) -> Vec<f64> {
    let mut levels: Vec<f64> = s.eigenvalues().iter().chain(s1.eigenvalues()).copied().collect();
    levels.sort_by(f64::total_cmp);
    levels
}

/// Snaps a Borel interval for intertwining checks.
pub fn snapped_interval(pair: &ScatteringPair, window: (f64, f64)) -> Result<BorelSet> {
    let (lo, hi) = snap_window(&pair.s, &pair.s1, window);
    BorelSet::interval(lo, hi)
}

/// Normalized truncated Abel weight 2ε∫₀^t e^{(iσω − 2ε)s} ds / (1 − e^{−2εt}).
fn abel_weight(omega: f64, sign: f64, rate: f64, t: f64) -> C64 {
    let z = C64::new(-2.0 * rate, sign * omega);
    let mass = 1.0 - (-2.0 * rate * t).exp();
    ((z * t).exp() - ONE) * (2.0 * rate) / z / mass
}

/// Eigen-coordinate kernel of the time-dependent construction at time t.
fn time_kernel(pair: &ScatteringPair, m: &ComplexMatrix, sign: Sign, t: f64, abel: Option<f64>) -> ComplexMatrix {
    let n = pair.dim();
    let sg = sign.value();
    ComplexMatrix::from_fn(n, |a, b| {
        let mab = m[(a, b)];
        if mab == ZERO {
            return ZERO;
        }
        let omega = pair.omega(a, b);
        let w = match abel {
            Some(rate) => abel_weight(omega, sg, rate, t),
            None => C64::from_polar(1.0, sg * omega * t),
        };
        mab * w
    })
}

fn time_family(pair: &ScatteringPair, sign: Sign, sched: &Schedule, weak: bool) -> Result<(Vec<ComplexMatrix>, f64)> {
    sched.expect(ScheduleKind::Time)?;
    let m = pair.m_hat();
    let t_rec = pair.recurrence_time();
    let ws = sched
        .points
        .par_iter()
        .map(|&t| {
            let x = pair.to_standard(&time_kernel(pair, &m, sign, t, sched.abel_rate));
            let w = x.matmul(pair.p.matrix());
            if weak {
                pair.p1.matrix().matmul(&w)
            } else {
                w
            }
        })
        .collect();
    Ok((ws, t_rec))
}

fn assemble(
    ws: Vec<ComplexMatrix>,
    trail_norm: impl Fn(&ComplexMatrix) -> Result<f64> + Sync,
    conv_tol: f64,
) -> Result<(ComplexMatrix, Vec<f64>, Vec<f64>, bool)> {
    let values: Vec<f64> = ws.iter().map(ComplexMatrix::frobenius_norm).collect();
    let trail = ws
        .par_windows(2)
        .map(|pair| trail_norm(&(&pair[1] - &pair[0])))
        .collect::<Result<Vec<f64>>>()?;
    let converged = trail.last().map_or(false, |&r| r < conv_tol);
    Ok((ws.into_iter().last().unwrap(), values, trail, converged))
}

/// Strong-limit construction s-lim e^{itH₁}Je^{−itH}P, Abel-averaged when the
/// schedule carries an Abel rate. The trail records changes of the truncated
/// Abel mean (or of W_J(t)P) between schedule points.
pub fn time_dependent_wave(pair: &ScatteringPair, sign: Sign, sched: &Schedule) -> Result<WaveResult> {
    time_dependent_wave_with(pair, sign, sched, TIME_CONV_TOL)
}

pub fn time_dependent_wave_with(pair: &ScatteringPair, sign: Sign, sched: &Schedule, conv_tol: f64) -> Result<WaveResult> {
    let (ws, t_rec) = time_family(pair, sign, sched, false)?;
    let (w, values, trail, converged) = assemble(ws, operator_norm, conv_tol)?;
    Ok(WaveResult {
        w,
        method: Method::TimeDependent,
        sign,
        schedule: sched.points.clone(),
        values,
        residual_trail: trail,
        converged,
        recurrence_time: Some(t_rec),
        recurrence_warning: sched.points.last().copied().unwrap_or(0.0) > t_rec,
        mesh_warning: false,
    })
}

/// Weak-limit construction P₁ e^{itH₁}Je^{−itH} P, with the trail measured in
/// the max-entry norm.
pub fn weak_wave(pair: &ScatteringPair, sign: Sign, sched: &Schedule) -> Result<WaveResult> {
    let (ws, t_rec) = time_family(pair, sign, sched, true)?;
    let (w, values, trail, converged) =
        assemble(ws, |d| Ok(d.max_abs()), TIME_CONV_TOL)?;
    Ok(WaveResult {
        w,
        method: Method::Weak,
        sign,
        schedule: sched.points.clone(),
        values,
        residual_trail: trail,
        converged,
        recurrence_time: Some(t_rec),
        recurrence_warning: sched.points.last().copied().unwrap_or(0.0) > t_rec,
        mesh_warning: false,
    })
}

/// Trapezoid weights for an ascending grid.
fn trapezoid_weights(grid: &[f64]) -> Vec<f64> {
    let n = grid.len();
    (0..n)
        .map(|k| {
            let left = if k > 0 { grid[k] - grid[k - 1] } else { 0.0 };
            let right = if k + 1 < n { grid[k + 1] - grid[k] } else { 0.0 };
            0.5 * (left + right)
        })
        .collect()
}

/// Coefficients c_k with a = Σ c_k y_k for the least-squares line y = a + bε.
fn intercept_coefficients(eps: &[f64]) -> Vec<f64> {
    let k = eps.len() as f64;
    if eps.len() == 1 {
        return vec![1.0];
    }
    let s1: f64 = eps.iter().sum();
    let s2: f64 = eps.iter().map(|e| e * e).sum();
    let det = k * s2 - s1 * s1;
    eps.iter().map(|&e| (s2 - e * s1) / det).collect()
}

/// Checks the ε floor and the grid step against the local spacing of an
/// operator over the grid range.
fn mesh_ok(s: &SpectralResolution, grid: &[f64], eps_min: f64, factor: f64) -> (bool, f64) {
    let spacing = s.max_spacing_in(grid[0], grid[grid.len() - 1]);
    (eps_min >= factor * spacing, spacing)
}

fn validate_grid(grid: &[f64], eps_min: f64) -> Result<()> {
    if grid.len() < 2 {
        return Err(invalid("λ-grid needs at least two points"));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("λ-grid must be strictly ascending"));
    }
    let step = grid.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    if step > eps_min / 5.0 * (1.0 + 1e-9) {
        return Err(Error::UnderResolvedMesh(format!("λ-grid step {step} exceeds ε_min/5 = {}", eps_min / 5.0)));
    }
    Ok(())
}

/// Uniform λ-grid on [lo, hi] with step at most `step`.
pub fn lambda_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let cells = ((hi - lo) / step).ceil().max(1.0) as usize;
    (0..=cells).map(|k| lo + (hi - lo) * k as f64 / cells as f64).collect()
}

/// Stationary construction from the δ-form of the resolvent commutator
/// identity, extrapolated to ε = 0 by a least-squares line through the
/// ε-schedule. Mesh validity is enforced against H; an under-resolved H₁ is
/// reported through `mesh_warning` and marks the result unconverged.
pub fn stationary_wave(pair: &ScatteringPair, sign: Sign, grid: &[f64], eps: &Schedule) -> Result<WaveResult> {
    stationary_wave_with(pair, sign, grid, eps, WAVE_MESH_FACTOR, STAT_CONV_TOL)
}

pub fn stationary_wave_with(
    pair: &ScatteringPair,
    sign: Sign,
    grid: &[f64],
    eps: &Schedule,
    mesh_factor: f64,
    conv_tol: f64,
) -> Result<WaveResult> {
    eps.expect(ScheduleKind::Epsilon)?;
    let eps_min = eps.points[0];
    validate_grid(grid, eps_min)?;
    let (ok, spacing) = mesh_ok(&pair.s, grid, eps_min, mesh_factor);
    if !ok {
        return Err(Error::UnderResolvedMesh(format!(
            "ε_min {eps_min} below {mesh_factor} × local spacing {spacing:.4e} of H"
        )));
    }
    let mesh_warning = !mesh_ok(&pair.s1, grid, eps_min, mesh_factor).0;

    let m = pair.m_hat();
    let t = pair.t_hat();
    let order = eps.descending();
    let kernels: Vec<ComplexMatrix> = order
        .par_iter()
        .map(|&e| stationary_kernel(pair, &m, &t, sign, grid, e))
        .collect();
    let sandwich = |x: &ComplexMatrix| pair.p1.matrix().matmul(&pair.to_standard(x)).matmul(pair.p.matrix());
    let ws: Vec<ComplexMatrix> = kernels.par_iter().map(sandwich).collect();
    let coeffs = intercept_coefficients(&order);
    let mut x = ComplexMatrix::zeros(pair.dim());
    for (c, k) in coeffs.iter().zip(&kernels) {
        x = &x + &k.scale_real(*c);
    }
    let w = sandwich(&x);
    let values: Vec<f64> = ws.iter().map(ComplexMatrix::frobenius_norm).collect();
    let trail = ws.par_windows(2).map(|p| operator_norm(&(&p[1] - &p[0]))).collect::<Result<Vec<f64>>>()?;
    let converged = !mesh_warning && trail.last().map_or(true, |&r| r <= conv_tol);
    Ok(WaveResult {
        w,
        method: Method::Stationary,
        sign,
        schedule: order,
        values,
        residual_trail: trail,
        converged,
        recurrence_time: None,
        recurrence_warning: false,
        mesh_warning,
    })
}

/// M + B(ε)∘T̂ with B_ab = Σ_λ w_λ d¹_a(λ,ε) / (λ_b − λ ∓ iε).
fn stationary_kernel(pair: &ScatteringPair, m: &ComplexMatrix, t: &ComplexMatrix, sign: Sign, grid: &[f64], eps: f64) -> ComplexMatrix {
    let n = pair.dim();
    let mu = pair.s1.eigenvalues();
    let lam = pair.s.eigenvalues();
    let w = trapezoid_weights(grid);
    let ie = C64::new(0.0, sign.value() * eps);
    // D[a][k] = w_k d¹_a(λ_k), R[k][b] = r_b(λ_k)
    let d: Vec<Vec<f64>> = mu.iter().map(|&ma| grid.iter().zip(&w).map(|(&x, &wk)| wk * poisson(ma - x, eps)).collect()).collect();
    let r: Vec<Vec<C64>> = grid.iter().map(|&x| lam.iter().map(|&lb| ONE / (C64::new(lb - x, 0.0) - ie)).collect()).collect();
    let rows: Vec<Vec<C64>> = (0..n)
        .into_par_iter()
        .map(|a| {
            let mut row = vec![ZERO; n];
            for (k, &dak) in d[a].iter().enumerate() {
                for (o, &rk) in row.iter_mut().zip(&r[k]) {
                    *o += rk * dak;
                }
            }
            row
        })
        .collect();
    ComplexMatrix::from_fn(n, |a, b| m[(a, b)] + rows[a][b] * t[(a, b)])
}

/// ‖(W_J(w) − W_J(s)) − i∫_s^w e^{itH₁}(H₁J − JH)e^{−itH} dt‖ with the
/// integral by composite Simpson on `steps` cells (rounded up to even). The
/// left side uses propagator matrices, the right side eigencoordinates.
pub fn duhamel_residual(pair: &ScatteringPair, s: f64, w: f64, steps: usize) -> Result<f64> {
    if !(s <= w) {
        return Err(invalid(format!("duhamel_residual needs s ≤ w, got s = {s}, w = {w}")));
    }
    let steps = (steps.max(2) + 1) / 2 * 2;
    let lhs = &pair.w_j(w) - &pair.w_j(s);
    let t = pair.t_hat();
    let n = pair.dim();
    let h = (w - s) / steps as f64;
    let entries: Vec<C64> = (0..n * n)
        .into_par_iter()
        .map(|k| {
            let (a, b) = (k / n, k % n);
            let tab = t[(a, b)];
            if tab == ZERO || h == 0.0 {
                return ZERO;
            }
            let omega = pair.omega(a, b);
            let step = C64::from_polar(1.0, omega * h);
            let mut e = C64::from_polar(1.0, omega * s);
            let mut acc = e;
            for j in 1..steps {
                e *= step;
                acc += e * if j % 2 == 1 { 4.0 } else { 2.0 };
            }
            acc += C64::from_polar(1.0, omega * w);
            tab * acc * (h / 3.0)
        })
        .collect();
    let quad = pair.to_standard(&ComplexMatrix::from_vec(n, entries)?);
    operator_norm(&(&lhs - &quad.scale(I)))
}

/// max-norm of J R_H(z) − R_{H₁}(z) J − R_{H₁}(z)(H₁J − JH)R_H(z), resolvents
/// by LU.
pub fn resolvent_commutator_residual(pair: &ScatteringPair, z: C64) -> Result<f64> {
    let r = pair.s.resolvent(z)?;
    let r1 = pair.s1.resolvent(z)?;
    let lhs = &pair.j.matmul(&r) - &r1.matmul(&pair.j);
    let rhs = r1.matmul(&pair.commutator()).matmul(&r);
    Ok(lhs.max_diff(&rhs))
}

/// Conditioning scale ‖H‖/dist(z, spec) for the commutator identity, the
/// larger of the two operators.
pub fn resolvent_conditioning(pair: &ScatteringPair, z: C64) -> f64 {
    let kappa = |s: &SpectralResolution| {
        let dist = s.eigenvalues().iter().map(|&l| (C64::new(l, 0.0) - z).norm()).fold(f64::INFINITY, f64::min);
        s.norm().max(1.0) / dist
    };
    kappa(&pair.s).max(kappa(&pair.s1)).max(1.0)
}

/// ‖W*W − W_chain‖ where W_chain is the stationary operator of (H, H; J*J).
pub fn chain_identity_residual(pair: &ScatteringPair, sign: Sign, grid: &[f64], eps: &Schedule) -> Result<f64> {
    let w = stationary_wave(pair, sign, grid, eps)?;
    chain_identity_residual_for(&w, pair, sign, grid, eps)
}

/// Chain identity for an already computed stationary W.
pub fn chain_identity_residual_for(w: &WaveResult, pair: &ScatteringPair, sign: Sign, grid: &[f64], eps: &Schedule) -> Result<f64> {
    let rhs = stationary_wave(&pair.chain(), sign, grid, eps)?;
    operator_norm(&(&w.w.adjoint().matmul(&w.w) - &rhs.w))
}

/// ‖E_{H₁}(Λ)W − W E_H(Λ)‖.
pub fn intertwining_residual(w: &WaveResult, pair: &ScatteringPair, set: &BorelSet) -> Result<f64> {
    let e = pair.s.spectral_projection(set);
    let e1 = pair.s1.spectral_projection(set);
    operator_norm(&(&e1.matrix().matmul(&w.w) - &w.w.matmul(e.matrix())))
}

/// (‖W*W − P‖, max(0, λ_max(WW* − P₁))).
pub fn isometry_residuals(w: &WaveResult, pair: &ScatteringPair) -> Result<(f64, f64)> {
    let ww = w.w.adjoint().matmul(&w.w);
    let iso = hermitian_norm(&(&ww - pair.p.matrix()))?;
    let co = &w.w.matmul(&w.w.adjoint()) - pair.p1.matrix();
    let top = linalg::max_eigenvalue(&co.hermitian_part())?;
    Ok((iso, top.max(0.0)))
}

/// ‖W H W* − H₁ P₁'‖ with P₁' the range projection of W.
pub fn conjugation_residual(w: &WaveResult, pair: &ScatteringPair) -> Result<f64> {
    let range = range_projection(&w.w, RANGE_RANK_TOL)?;
    let lhs = w.w.matmul(pair.s.operator().matrix()).matmul(&w.w.adjoint());
    let rhs = pair.s1.operator().matrix().matmul(range.matrix());
    operator_norm(&(&lhs - &rhs))
}

/// ‖φ(H₁)W − Wφ(H)‖ for a Borel function φ.
pub fn functional_intertwining_residual(w: &WaveResult, pair: &ScatteringPair, phi: impl Fn(f64) -> C64 + Copy) -> Result<f64> {
    let f = pair.s.apply_function(phi)?;
    let f1 = pair.s1.apply_function(phi)?;
    operator_norm(&(&f1.matmul(&w.w) - &w.w.matmul(&f)))
}

#[derive(Clone, Debug, Serialize)]
pub struct RadialProbe {
    pub epsilons: Vec<f64>,
    /// ‖A R(λ ± iε_k) P‖.
    pub norms: Vec<f64>,
    /// ‖A R(λ±iε_k)P − A R(λ±iε_{k+1})P‖.
    pub trail: Vec<f64>,
    /// d log‖X‖ / d log ε between consecutive points; −1 at a pole.
    pub slopes: Vec<f64>,
    pub stable: bool,
}

/// Largest |log-log slope| of ‖AR(λ±iε)P‖ accepted as stable.
pub const RADIAL_SLOPE_TOL: f64 = 0.25;

/// Tracks A R_H(λ ± iε) P along a descending ε-schedule. A pole shows up as
/// ‖AR P‖ ∝ 1/ε, a slope of −1; bounded radial limits have slope near 0.
pub fn radial_limit_probe(a: &ComplexMatrix, s: &SpectralResolution, p: &Projection, lambda: f64, eps: &[f64], sign: Sign) -> Result<RadialProbe> {
    crate::operator_core::validate_descending(eps)?;
    let xs = eps
        .par_iter()
        .map(|&e| {
            let r = s.apply_function(|l| ONE / C64::new(l - lambda, -sign.value() * e))?;
            Ok(a.matmul(&r).matmul(p.matrix()))
        })
        .collect::<Result<Vec<ComplexMatrix>>>()?;
    let norms = xs.par_iter().map(operator_norm).collect::<Result<Vec<f64>>>()?;
    let trail = xs.par_windows(2).map(|w| operator_norm(&(&w[1] - &w[0]))).collect::<Result<Vec<f64>>>()?;
    let slopes: Vec<f64> = (0..eps.len().saturating_sub(1))
        .map(|k| {
            if norms[k] == 0.0 || norms[k + 1] == 0.0 {
                0.0
            } else {
                (norms[k + 1] / norms[k]).ln() / (eps[k + 1] / eps[k]).ln()
            }
        })
        .collect();
    let stable = slopes.iter().all(|s| s.abs() <= RADIAL_SLOPE_TOL);
    Ok(RadialProbe { epsilons: eps.to_vec(), norms, trail, slopes, stable })
}
