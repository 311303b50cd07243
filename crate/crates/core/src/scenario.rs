//! Scenario runner behind the `scatterkit` command line.
//!
//! A scenario is a JSON file with a `schema_version`; unknown keys are
//! rejected so a misspelled tolerance cannot silently pass. Each subcommand
//! validates the parts of the config it uses against the built model before
//! doing any heavy work, writes its artifacts into the output directory, and
//! reports whether its checks passed.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{density_points, emit_plotdata, fmt_f64, wave_points, write_csv, write_json, OperatorJson, PlotKind};
use crate::linalg::ComplexMatrix;
use crate::models::{build_operator, build_perturbation, position_cutoff, CouplingSpec, ModelSpec, PerturbationSpec};
use crate::operator_core::{spectral_decompose, BorelSet, Projection, SpectralResolution};
use crate::smoothness::{ac_modulus, uniform_grid, GammaKernels, RegularizationParams};
use crate::wave::{
    build_pair, isometry_residuals, stationary_wave_with, time_dependent_wave_with, verify_kato_rosenblum, weak_wave,
    DuhamelConfig, KrConfig, KrTolerances, Method, ProjectionChoice, Sign,
};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_OUT_DIR: &str = "scatterkit-out";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub model: ModelSpec,
    #[serde(default = "PerturbationSpec::none")]
    pub perturbation: PerturbationSpec,
    #[serde(default)]
    pub coupling: CouplingSpec,
    pub window: (f64, f64),
    /// Seed for probe vectors; `--seed` overrides it.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub schedules: SchedulesConfig,
    #[serde(default)]
    pub checks: ChecksConfig,
    #[serde(default)]
    pub smoothness: SmoothnessConfig,
    #[serde(default)]
    pub acdiag: AcDiagConfig,
    #[serde(default)]
    pub spectrum: SpectrumConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub outputs: OutputsConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeScheduleConfig {
    pub t_max: f64,
    pub points: usize,
    pub abel_rate: f64,
}

impl Default for TimeScheduleConfig {
    fn default() -> Self {
        let kr = KrConfig::default();
        Self { t_max: kr.t_max, points: kr.time_points, abel_rate: kr.abel_rate }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchedulesConfig {
    pub time: TimeScheduleConfig,
    pub epsilon: Vec<f64>,
    pub lambda_margin: f64,
    pub mesh_factor: f64,
}

impl Default for SchedulesConfig {
    fn default() -> Self {
        let kr = KrConfig::default();
        Self {
            time: TimeScheduleConfig::default(),
            epsilon: kr.eps_schedule,
            lambda_margin: kr.lambda_margin,
            mesh_factor: kr.mesh_factor,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChecksConfig {
    pub intertwining_windows: Vec<(f64, f64)>,
    pub probe_z: Vec<(f64, f64)>,
    pub duhamel: DuhamelConfig,
    pub projections: ProjectionChoice,
}

impl Default for ChecksConfig {
    fn default() -> Self {
        let kr = KrConfig::default();
        Self {
            intertwining_windows: kr.intertwining_windows,
            probe_z: kr.probe_z,
            duhamel: kr.duhamel,
            projections: kr.projections,
        }
    }
}

/// The operator G fed to the smoothness functionals.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GSpec {
    /// χ of the middle site, dim/2.
    #[default]
    CentreSite,
    PositionCutoff { sites: Vec<usize> },
    Identity,
}

impl GSpec {
    pub fn build(&self, dim: usize) -> Result<ComplexMatrix> {
        match self {
            GSpec::CentreSite => position_cutoff(dim, &[dim / 2]),
            GSpec::PositionCutoff { sites } => position_cutoff(dim, sites),
            GSpec::Identity => Ok(ComplexMatrix::identity(dim)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SmoothnessConfig {
    pub g: GSpec,
    pub eps_min: f64,
    pub len_min: f64,
    /// Defaults to π/eps_min.
    pub t_window: Option<f64>,
    pub probe_count: usize,
    pub lambda_margin: f64,
    pub mesh_factor: f64,
}

impl Default for SmoothnessConfig {
    fn default() -> Self {
        Self {
            g: GSpec::default(),
            eps_min: 0.1,
            len_min: 0.2,
            t_window: None,
            probe_count: crate::smoothness::DEFAULT_PROBE_COUNT,
            lambda_margin: crate::smoothness::DEFAULT_LAMBDA_MARGIN,
            mesh_factor: crate::smoothness::DEFAULT_MESH_FACTOR,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AcProjection {
    #[default]
    Band,
    Identity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AcDiagConfig {
    pub projection: AcProjection,
    pub grid_step: f64,
    /// Lipschitz bound for the difference quotients; unchecked when absent.
    pub bound: Option<f64>,
}

impl Default for AcDiagConfig {
    fn default() -> Self {
        Self { projection: AcProjection::Band, grid_step: 0.1, bound: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumConfig {
    pub bins: usize,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self { bins: 32 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub residual: f64,
    pub exact: f64,
    pub time_conv: f64,
    pub stationary_conv: f64,
    pub gamma_spread: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        let kr = KrTolerances::default();
        Self {
            residual: kr.residual,
            exact: kr.exact,
            time_conv: kr.time_conv,
            stationary_conv: kr.stationary_conv,
            gamma_spread: 0.25,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputsConfig {
    pub dir: Option<PathBuf>,
    pub csv: bool,
    pub json: bool,
}

impl Default for OutputsConfig {
    fn default() -> Self {
        Self { dir: None, csv: true, json: true }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Spectrum,
    Smoothness,
    Acdiag,
    Wave { method: Method, sign: Sign },
    VerifyKr,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Smoothness => "smoothness",
            Command::Acdiag => "acdiag",
            Command::Wave { .. } => "wave",
            Command::VerifyKr => "verify-kr",
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub passed: bool,
    pub files: Vec<PathBuf>,
    /// One line per failed check or flag.
    pub failures: Vec<String>,
}

impl Outcome {
    /// 0 when every check passed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }
}

/// Exit status for a finished run: 0 pass, 1 check failure, 2 any error.
pub fn exit_code(result: &Result<Outcome>) -> i32 {
    match result {
        Ok(o) => o.exit_code(),
        Err(_) => 2,
    }
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {}, expected {SCHEMA_VERSION}",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn kr_config(&self) -> KrConfig {
        KrConfig {
            window: self.window,
            coupling: self.coupling.clone(),
            projections: self.checks.projections.clone(),
            abel_rate: self.schedules.time.abel_rate,
            t_max: self.schedules.time.t_max,
            time_points: self.schedules.time.points,
            eps_schedule: self.schedules.epsilon.clone(),
            lambda_margin: self.schedules.lambda_margin,
            mesh_factor: self.schedules.mesh_factor,
            intertwining_windows: self.checks.intertwining_windows.clone(),
            probe_z: self.checks.probe_z.clone(),
            duhamel: self.checks.duhamel.clone(),
            tolerances: KrTolerances {
                residual: self.tolerances.residual,
                exact: self.tolerances.exact,
                time_conv: self.tolerances.time_conv,
                stationary_conv: self.tolerances.stationary_conv,
            },
        }
    }

    pub fn regularization(&self, s: &SpectralResolution) -> Result<RegularizationParams> {
        let c = &self.smoothness;
        let t = c.t_window.unwrap_or(std::f64::consts::PI / c.eps_min);
        let p = RegularizationParams {
            eps_min: c.eps_min,
            len_min: c.len_min,
            t_window: t,
            lambda_window: self.window,
            probe_count: c.probe_count,
            lambda_margin: c.lambda_margin,
            mesh_factor: c.mesh_factor,
            seed: self.seed,
            max_spacing: 0.0,
        };
        p.validated(s)
    }

    /// Window inside the band plus the checks specific to `cmd`.
    pub fn validate(&self, s: &SpectralResolution, cmd: &Command) -> Result<()> {
        let (lo, hi) = self.window;
        let (band_lo, band_hi) = s.band();
        if !(lo < hi) || lo < band_lo || hi > band_hi {
            return Err(Error::WindowOutsideBand { lo, hi, band_lo, band_hi });
        }
        match cmd {
            Command::Spectrum => {
                if self.spectrum.bins == 0 {
                    return Err(Error::Config("spectrum.bins must be positive".into()));
                }
            }
            Command::Smoothness => {
                self.regularization(s)?;
            }
            Command::Acdiag => {
                if !(self.acdiag.grid_step > 0.0) {
                    return Err(Error::Config("acdiag.grid_step must be positive".into()));
                }
            }
            Command::Wave { .. } | Command::VerifyKr => self.kr_config().validate(s)?,
        }
        Ok(())
    }
}

/// Stable JSON envelope shared by the subcommand summaries.
#[derive(Serialize)]
struct Summary<'a, T: Serialize> {
    schema_version: u32,
    command: &'a str,
    passed: bool,
    tolerances: &'a Tolerances,
    report: T,
}

struct Artifacts<'a> {
    dir: PathBuf,
    cfg: &'a ScenarioConfig,
    files: Vec<PathBuf>,
}

impl Artifacts<'_> {
    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        self.files.push(p.clone());
        p
    }

    fn json<T: Serialize>(&mut self, name: &str, command: &str, passed: bool, report: T) -> Result<()> {
        if self.cfg.outputs.json {
            let p = self.path(name);
            write_json(&p, &Summary { schema_version: SCHEMA_VERSION, command, passed, tolerances: &self.cfg.tolerances, report })?;
        }
        Ok(())
    }

    fn plot(&mut self, name: &str, kind: PlotKind, points: &[(f64, f64)]) -> Result<()> {
        if self.cfg.outputs.csv {
            let p = self.path(name);
            emit_plotdata(&p, kind, points)?;
        }
        Ok(())
    }

    fn csv(&mut self, name: &str, header: &[&str], rows: Vec<Vec<String>>) -> Result<()> {
        if self.cfg.outputs.csv {
            let p = self.path(name);
            write_csv(&p, header, rows)?;
        }
        Ok(())
    }
}

/// Runs one subcommand. Errors (config, validation, I/O) map to exit 2,
/// failed checks to an [`Outcome`] with `passed = false`.
pub fn run_scenario(config: &ScenarioConfig, cmd: Command, opts: &RunOptions) -> Result<Outcome> {
    let mut cfg = config.clone();
    if let Some(seed) = opts.seed {
        cfg.seed = seed;
    }
    let h = build_operator(&cfg.model)?;
    let s = spectral_decompose(&h)?;
    cfg.validate(&s, &cmd)?;

    let dir = opts.out.clone().or_else(|| cfg.outputs.dir.clone()).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    fs::create_dir_all(&dir)?;
    let mut art = Artifacts { dir, cfg: &cfg, files: Vec::new() };
    let mut failures = Vec::new();
    let tol = &cfg.tolerances;

    match cmd {
        Command::Spectrum => {
            let (lo, hi) = s.band();
            let pad = 1e-9 * (hi - lo).max(1.0);
            let density = density_points(&s, lo - pad, hi + pad, cfg.spectrum.bins)?;
            let rows = s.eigenvalues().iter().enumerate().map(|(k, &l)| vec![k.to_string(), fmt_f64(l)]).collect();
            art.csv("spectrum_eigenvalues.csv", &["index", "eigenvalue"], rows)?;
            art.plot("spectrum_density.csv", PlotKind::Density, &density)?;
            #[derive(Serialize)]
            struct SpectrumSummary<'a> {
                dim: usize,
                band: (f64, f64),
                eigenvalues: &'a [f64],
            }
            art.json("spectrum.json", "spectrum", true, SpectrumSummary { dim: s.dim(), band: s.band(), eigenvalues: s.eigenvalues() })?;
        }
        Command::Smoothness => {
            let params = cfg.regularization(&s)?;
            let g = cfg.smoothness.g.build(s.dim())?;
            let report = GammaKernels::new(&s, &params)?.estimate(&g)?;
            if !report.is_finite() {
                failures.push("smoothness: non-finite γ".to_string());
            }
            if report.spread > tol.gamma_spread {
                failures.push(format!("smoothness: spread {} > {}", report.spread, tol.gamma_spread));
            }
            let rows = report
                .probes
                .iter()
                .map(|p| {
                    vec![p.probe.to_string(), p.kind.to_string(), fmt_f64(p.gamma1_sq), fmt_f64(p.gamma2_sq), fmt_f64(p.gamma3_sq)]
                })
                .collect();
            art.csv("smoothness_probes.csv", &["probe", "kind", "gamma1_sq", "gamma2_sq", "gamma3_sq"], rows)?;
            art.json("smoothness.json", "smoothness", failures.is_empty(), &report)?;
        }
        Command::Acdiag => {
            let p = match cfg.acdiag.projection {
                AcProjection::Band => s.spectral_projection(&BorelSet::interval(s.snap_to_gap(cfg.window.0), s.snap_to_gap(cfg.window.1))?),
                AcProjection::Identity => Projection::identity(s.dim()),
            };
            let (lo, hi) = cfg.window;
            let cells = ((hi - lo) / cfg.acdiag.grid_step).round().max(1.0) as usize;
            let grid = uniform_grid(lo, hi, cells);
            let report = ac_modulus(&p, &s, &grid, cfg.acdiag.bound.unwrap_or(f64::INFINITY))?;
            if !report.lipschitz_flag {
                failures.push(format!("acdiag: difference quotient {} exceeds bound {}", report.max_difference_quotient, report.bound));
            }
            let rows = (0..grid.len())
                .map(|k| {
                    let q = report.quotients.get(k).map_or(String::new(), |&q| fmt_f64(q));
                    vec![fmt_f64(grid[k]), fmt_f64(report.cdf_norms[k]), q]
                })
                .collect();
            art.csv("acdiag.csv", &["lambda", "cdf_norm", "quotient"], rows)?;
            art.json("acdiag.json", "acdiag", failures.is_empty(), &report)?;
        }
        Command::Wave { method, sign } => {
            let kr = cfg.kr_config();
            let v = build_perturbation(&cfg.perturbation, s.dim())?;
            let pair = build_pair(&h, &v.operator, &kr)?;
            let w = match method {
                Method::TimeDependent => time_dependent_wave_with(&pair, sign, &kr.time_schedule()?, tol.time_conv)?,
                Method::Weak => weak_wave(&pair, sign, &kr.time_schedule()?)?,
                Method::Stationary => {
                    let grid = kr.lambda_grid(crate::wave::snap_window(&pair.s, &pair.s1, kr.window))?;
                    stationary_wave_with(&pair, sign, &grid, &kr.epsilon_schedule()?, kr.mesh_factor, tol.stationary_conv)?
                }
            };
            let (iso, co) = isometry_residuals(&w, &pair)?;
            let support = w.support_defects(&pair);
            if !w.converged {
                failures.push(format!("wave: not converged (final trail {:e})", w.final_trail()));
            }
            for (name, value) in [("isometry", iso), ("co_isometry", co), ("support", support.0.max(support.1))] {
                if value > tol.residual {
                    failures.push(format!("wave: {name} residual {value} > {}", tol.residual));
                }
            }
            let (kind, points) = wave_points(&w);
            art.plot(&format!("wave_{}_{}_trail.csv", method.name(), sign.name()), kind, &points)?;
            #[derive(Serialize)]
            struct WaveSummary {
                method: Method,
                sign: Sign,
                converged: bool,
                schedule: Vec<f64>,
                residual_trail: Vec<f64>,
                isometry: f64,
                co_isometry_violation: f64,
                support: (f64, f64),
                recurrence_time: Option<f64>,
                recurrence_warning: bool,
                mesh_warning: bool,
                w: OperatorJson,
            }
            let summary = WaveSummary {
                method,
                sign,
                converged: w.converged,
                schedule: w.schedule.clone(),
                residual_trail: w.residual_trail.clone(),
                isometry: iso,
                co_isometry_violation: co,
                support,
                recurrence_time: w.recurrence_time,
                recurrence_warning: w.recurrence_warning,
                mesh_warning: w.mesh_warning,
                w: OperatorJson::from(&w.w),
            };
            art.json(&format!("wave_{}_{}.json", method.name(), sign.name()), "wave", failures.is_empty(), summary)?;
        }
        Command::VerifyKr => {
            let v = build_perturbation(&cfg.perturbation, s.dim())?;
            let report = verify_kato_rosenblum(&h, &v.operator, &cfg.kr_config())?;
            failures.extend(report.checks.iter().filter(|c| !c.passed).map(|c| format!("{}: {} > {}", c.name, c.value, c.tolerance)));
            failures.extend(report.flags.iter().cloned());
            let mut rows = Vec::new();
            for r in &report.signs {
                for m in [&r.time, &r.stationary] {
                    for (k, x) in m.residual_trail.iter().enumerate() {
                        rows.push(vec![r.sign.name().to_string(), m.method.name().to_string(), fmt_f64(m.schedule[k + 1]), fmt_f64(*x)]);
                    }
                }
            }
            art.csv("kr_trails.csv", &["sign", "method", "schedule_point", "residual"], rows)?;
            art.json("kr_report.json", "verify-kr", report.passed, &report)?;
        }
    }
    Ok(Outcome { passed: failures.is_empty(), files: art.files, failures })
}
