//! Deterministic benchmark operators, perturbations and couplings.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::{inner, normalized, operator_norm, ComplexMatrix, C64, ZERO};
use crate::operator_core::{BorelSet, HermitianOperator, SpectralResolution};
use crate::rng::Rng;
use crate::trace_space::{schatten_norm, TraceWeight};

/// Monotone profile g on (0, 1] for multiplication operators diag(g(k/dim)).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    #[default]
    Identity,
    Affine {
        scale: f64,
        offset: f64,
    },
    /// 2 − 2cos(πx), the symbol of the path Laplacian.
    Cosine,
}

impl Profile {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Profile::Identity => x,
            Profile::Affine { scale, offset } => scale * x + offset,
            Profile::Cosine => 2.0 - 2.0 * (std::f64::consts::PI * x).cos(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    /// Tridiagonal, 2 on the diagonal and −1 off it.
    PathLaplacian { dim: usize },
    Multiplication {
        dim: usize,
        #[serde(default)]
        profile: Profile,
    },
    DiagonalCustom { values: Vec<f64> },
}

impl ModelSpec {
    pub fn dim(&self) -> usize {
        match self {
            ModelSpec::PathLaplacian { dim } | ModelSpec::Multiplication { dim, .. } => *dim,
            ModelSpec::DiagonalCustom { values } => values.len(),
        }
    }

    /// Copy with a different dimension; custom diagonals are left alone.
    pub fn with_dim(&self, dim: usize) -> Self {
        match self {
            ModelSpec::PathLaplacian { .. } => ModelSpec::PathLaplacian { dim },
            ModelSpec::Multiplication { profile, .. } => ModelSpec::Multiplication { dim, profile: profile.clone() },
            other => other.clone(),
        }
    }
}

pub fn build_operator(spec: &ModelSpec) -> Result<HermitianOperator> {
    let dim = spec.dim();
    if dim < 2 {
        return Err(invalid(format!("model dimension must be at least 2, got {dim}")));
    }
    match spec {
        ModelSpec::PathLaplacian { dim } => Ok(path_laplacian(*dim)),
        ModelSpec::Multiplication { dim, profile } => build_multiplication(*dim, |x| profile.eval(x)),
        ModelSpec::DiagonalCustom { values } => {
            if values.iter().any(|v| !v.is_finite()) {
                return Err(invalid("diagonal values must be finite"));
            }
            Ok(HermitianOperator::diagonal(values))
        }
    }
}

pub fn path_laplacian(dim: usize) -> HermitianOperator {
    let m = ComplexMatrix::from_fn(dim, |i, j| {
        if i == j {
            C64::new(2.0, 0.0)
        } else if i.abs_diff(j) == 1 {
            C64::new(-1.0, 0.0)
        } else {
            ZERO
        }
    });
    HermitianOperator::new(m).expect("path Laplacian is symmetric")
}

/// diag(g(k/dim)), k = 1..dim.
pub fn build_multiplication(dim: usize, g: impl Fn(f64) -> f64) -> Result<HermitianOperator> {
    let values: Vec<f64> = (1..=dim).map(|k| g(k as f64 / dim as f64)).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(invalid("multiplication profile produced a non-finite value"));
    }
    Ok(HermitianOperator::diagonal(&values))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PerturbationSpec {
    /// strength·Σ e_m e_m* over distinct sites (0-based).
    RankK { sites: Vec<usize>, strength: f64 },
    /// Gaussian bump strength·exp(−(k−center)²/(2 width²)) on the diagonal,
    /// truncated beyond four widths.
    LocalPotential { center: usize, width: f64, strength: f64 },
    /// Q diag(strength·2^{−j}) Q* with Q a seeded random unitary.
    RandomTraceClass { strength: f64, seed: u64 },
    /// Independent uniform diagonal entries in [−strength, strength].
    Disorder { strength: f64, seed: u64 },
}

impl PerturbationSpec {
    pub fn strength(&self) -> f64 {
        match *self {
            PerturbationSpec::RankK { strength, .. }
            | PerturbationSpec::LocalPotential { strength, .. }
            | PerturbationSpec::RandomTraceClass { strength, .. }
            | PerturbationSpec::Disorder { strength, .. } => strength,
        }
    }

    pub fn none() -> Self {
        PerturbationSpec::RankK { sites: Vec::new(), strength: 0.0 }
    }
}

#[derive(Clone, Debug)]
pub struct Perturbation {
    pub operator: HermitianOperator,
    /// ‖V‖₁ under the uniform trace.
    pub trace_norm: f64,
}

pub fn build_perturbation(spec: &PerturbationSpec, dim: usize) -> Result<Perturbation> {
    let strength = spec.strength();
    if !(strength >= 0.0) || !strength.is_finite() {
        return Err(invalid(format!("perturbation strength must be finite and nonnegative, got {strength}")));
    }
    let m = match spec {
        PerturbationSpec::RankK { sites, .. } => {
            if sites.len() > dim {
                return Err(invalid(format!("rank {} exceeds dimension {dim}", sites.len())));
            }
            let mut seen = vec![false; dim];
            let mut diag = vec![0.0; dim];
            for &s in sites {
                if s >= dim || seen[s] {
                    return Err(invalid(format!("invalid rank-k site {s}: out of range or repeated")));
                }
                seen[s] = true;
                diag[s] = strength;
            }
            ComplexMatrix::from_real_diagonal(&diag)
        }
        PerturbationSpec::LocalPotential { center, width, .. } => {
            if *center >= dim || !(*width > 0.0) {
                return Err(invalid("local potential needs center < dim and width > 0"));
            }
            let diag: Vec<f64> = (0..dim)
                .map(|k| {
                    let x = (k as f64 - *center as f64) / width;
                    if x.abs() > 4.0 {
                        0.0
                    } else {
                        strength * (-0.5 * x * x).exp()
                    }
                })
                .collect();
            ComplexMatrix::from_real_diagonal(&diag)
        }
        PerturbationSpec::RandomTraceClass { seed, .. } => {
            let q = random_unitary(dim, &mut Rng::new(*seed));
            let profile: Vec<C64> = (0..dim).map(|j| C64::new(strength * 0.5f64.powi(j as i32), 0.0)).collect();
            q.scale_columns(&profile).matmul(&q.adjoint())
        }
        PerturbationSpec::Disorder { seed, .. } => {
            let mut rng = Rng::new(*seed);
            let diag: Vec<f64> = (0..dim).map(|_| rng.uniform_in(-strength, strength)).collect();
            ComplexMatrix::from_real_diagonal(&diag)
        }
    };
    let operator = HermitianOperator::new(m.hermitian_part())?;
    let trace_norm = schatten_norm(operator.matrix(), 1.0, &TraceWeight::uniform(dim))?;
    Ok(Perturbation { operator, trace_norm })
}

/// Unitary from modified Gram–Schmidt (applied twice) on complex Gaussian
/// columns.
pub fn random_unitary(dim: usize, rng: &mut Rng) -> ComplexMatrix {
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(dim);
    while cols.len() < dim {
        let mut v = rng.complex_vector(dim);
        for _ in 0..2 {
            for u in &cols {
                let c = inner(&v, u);
                for (x, y) in v.iter_mut().zip(u) {
                    *x -= c * y;
                }
            }
        }
        if let Some(v) = normalized(&v) {
            cols.push(v);
        }
    }
    ComplexMatrix::from_fn(dim, |i, j| cols[j][i])
}

/// χ of a set of sites, as a diagonal matrix.
pub fn position_cutoff(dim: usize, sites: &[usize]) -> Result<ComplexMatrix> {
    let mut d = vec![0.0; dim];
    for &s in sites {
        if s >= dim {
            return Err(invalid(format!("cutoff site {s} out of range for dimension {dim}")));
        }
        d[s] = 1.0;
    }
    Ok(ComplexMatrix::from_real_diagonal(&d))
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CouplingSpec {
    #[default]
    Identity,
    /// E_H(window) + c·E_H(ℝ \ window).
    BandLimited { window: (f64, f64), c: f64 },
    /// Seeded complex Gaussian matrix scaled to unit operator norm.
    Contraction { seed: u64 },
    Zero,
}

pub fn build_coupling(spec: &CouplingSpec, s: &SpectralResolution) -> Result<ComplexMatrix> {
    let dim = s.dim();
    match spec {
        CouplingSpec::Identity => Ok(ComplexMatrix::identity(dim)),
        CouplingSpec::Zero => Ok(ComplexMatrix::zeros(dim)),
        CouplingSpec::BandLimited { window, c } => {
            if !(c.abs() <= 1.0) {
                return Err(invalid(format!("band-limited coupling needs |c| ≤ 1, got {c}")));
            }
            let band = s.spectral_projection(&BorelSet::interval(window.0, window.1)?);
            let rest = band.complement();
            Ok(band.matrix() + &rest.matrix().scale_real(*c))
        }
        CouplingSpec::Contraction { seed } => {
            let mut rng = Rng::new(*seed);
            let x = ComplexMatrix::from_fn(dim, |_, _| rng.complex_normal());
            let n = operator_norm(&x)?;
            Ok(x.scale_real(1.0 / n))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_models() {
        let h = build_operator(&ModelSpec::PathLaplacian { dim: 2 }).unwrap();
        let expected = ComplexMatrix::from_real_rows(&[vec![2.0, -1.0], vec![-1.0, 2.0]]).unwrap();
        assert_eq!(h.matrix(), &expected);
        let m = build_operator(&ModelSpec::Multiplication { dim: 4, profile: Profile::Identity }).unwrap();
        assert_eq!(m.matrix().diagonal().iter().map(|z| z.re).collect::<Vec<_>>(), vec![0.25, 0.5, 0.75, 1.0]);
        assert!(build_operator(&ModelSpec::PathLaplacian { dim: 1 }).is_err());
    }

    #[test]
    fn rank_one_and_invalid_rank() {
        let p = build_perturbation(&PerturbationSpec::RankK { sites: vec![3], strength: 0.7 }, 8).unwrap();
        assert_eq!(p.operator.matrix()[(3, 3)], C64::new(0.7, 0.0));
        assert!((p.trace_norm - 0.7).abs() < 1e-15);
        assert!(build_perturbation(&PerturbationSpec::RankK { sites: vec![8], strength: 1.0 }, 8).is_err());
        assert!(build_perturbation(&PerturbationSpec::RankK { sites: vec![1, 1], strength: 1.0 }, 8).is_err());
    }

    #[test]
    fn spec_json_shape() {
        let spec: PerturbationSpec = serde_json::from_str(r#"{"kind":"rank_k","sites":[64],"strength":0.2}"#).unwrap();
        assert_eq!(spec, PerturbationSpec::RankK { sites: vec![64], strength: 0.2 });
        assert!(serde_json::from_str::<ModelSpec>(r#"{"kind":"path_laplacian","dim":4,"extra":1}"#).is_err());
    }
}
