use std::f64::consts::PI;

use scatterkit::linalg::{norm, ComplexMatrix, C64};
use scatterkit::models::{path_laplacian, position_cutoff};
use scatterkit::operator_core::*;
use scatterkit::rng::Rng;
use scatterkit::smoothness::*;

const N: usize = 128;

fn laplacian() -> SpectralResolution {
    spectral_decompose(&path_laplacian(N)).unwrap()
}

fn params(s: &SpectralResolution) -> RegularizationParams {
    RegularizationParams::standard(s, 0.2, 0.4, (1.0, 3.0)).unwrap()
}

/// Path Laplacian with `site` cut off from its neighbours, leaving an
/// eigenvalue at 2 whose eigenvector is the site itself.
fn decoupled(site: usize) -> SpectralResolution {
    let mut m = path_laplacian(N).matrix().clone();
    for nb in [site - 1, site + 1] {
        m[(site, nb)] = C64::new(0.0, 0.0);
        m[(nb, site)] = C64::new(0.0, 0.0);
    }
    spectral_decompose(&HermitianOperator::new(m).unwrap()).unwrap()
}

#[test]
fn zero_g_has_zero_gammas() {
    let s = laplacian();
    let r = gamma_estimates(&ComplexMatrix::zeros(N), &s, &params(&s)).unwrap();
    assert_eq!(r.gamma, [0.0; 5]);
    assert_eq!(r.spread, 0.0);
}

#[test]
fn gammas_are_homogeneous_of_degree_one() {
    let s = laplacian();
    let k = GammaKernels::new(&s, &params(&s)).unwrap();
    let g = position_cutoff(N, &[40, 41]).unwrap();
    let a = k.estimate(&g).unwrap();
    let b = k.estimate(&g.scale_real(-2.5)).unwrap();
    for (x, y) in a.gamma.iter().zip(&b.gamma) {
        assert!((2.5 * x - y).abs() < 1e-9 * y.max(1.0), "{x} vs {y}");
    }
}

#[test]
fn mesh_rule_rejects_fine_regularization() {
    let s = laplacian();
    assert!(RegularizationParams::standard(&s, 0.01, 0.4, (1.0, 3.0)).is_err());
    assert!(RegularizationParams::new(&s, 0.2, 0.4, 2.0 * PI / 0.2, (1.0, 3.0), 16).is_err());
    assert!(RegularizationParams::standard(&s, 0.2, 0.4, (3.0, 1.0)).is_err());
}

#[test]
fn cutoff_site_gamma5_stays_below_n_over_4pi_squared() {
    let s = laplacian();
    let p = params(&s);
    let chi = position_cutoff(N, &[N / 2]).unwrap();
    let n = 8u32;
    let w = cutoff_operator(&s, n, CutoffFamily::Hard).unwrap();
    let r = gamma_estimates(&chi.matmul(w.matrix()), &s, &p).unwrap();
    let bound = n as f64 / (2.0 * PI).powi(2);
    assert!(r.gamma[4].powi(2) <= bound, "{} > {bound}", r.gamma[4].powi(2));
}

#[test]
fn ac_modulus_of_zero_projection_is_flat() {
    let s = laplacian();
    let r = ac_modulus(&Projection::zero(N), &s, &uniform_grid(0.0, 4.0, 8), 1.0).unwrap();
    assert!(r.cdf_norms.iter().all(|&x| x == 0.0));
    assert_eq!(r.max_difference_quotient, 0.0);
    assert!(r.lipschitz_flag);
}

#[test]
fn ac_modulus_of_identity_counts_eigenvalues() {
    let s = spectral_decompose(&HermitianOperator::diagonal(&[0.1, 0.2, 0.7, 1.5])).unwrap();
    let grid = [0.0, 0.5, 1.0, 2.0];
    let r = ac_modulus(&Projection::identity(4), &s, &grid, 1.0).unwrap();
    assert_eq!(r.cdf_norms, vec![0.0, 1.0, 1.0, 1.0]);
    assert!((r.quotients[0] - 2.0).abs() < 1e-12);
    assert!((r.quotients[1] - 2.0).abs() < 1e-12);
    assert!((r.quotients[2] - 1.0).abs() < 1e-12);
    assert!(!r.lipschitz_flag);
    assert!(ac_modulus(&Projection::identity(4), &s, &[1.0, 0.5], 1.0).is_err());
    assert!(ac_modulus(&Projection::identity(4), &s, &[], 1.0).is_err());
}

#[test]
fn isolated_eigenvalue_breaks_the_lipschitz_bound() {
    let site = N / 2;
    let s = decoupled(site);
    let p = Projection::new(position_cutoff(N, &[site]).unwrap()).unwrap();
    let r = ac_modulus(&p, &s, &uniform_grid(1.0, 3.0, 200), 1.0).unwrap();
    // All of the mass of e_site sits at λ = 2 and jumps within one cell.
    assert!((r.max_difference_quotient - 100.0).abs() < 1e-8);
    assert!(!r.lipschitz_flag);
    assert!(r.under_resolved);
}

#[test]
fn ac_quotient_on_dyadic_grid_is_bounded_by_gamma5() {
    let s = laplacian();
    let p = params(&s);
    let kernels = GammaKernels::new(&s, &p).unwrap();
    let cells = ((p.lambda_window.1 - p.lambda_window.0) / p.len_min).round() as usize;
    let grid = uniform_grid(p.lambda_window.0, p.lambda_window.1, cells);
    for site in [10, 40, 64, 90] {
        let g = position_cutoff(N, &[site]).unwrap();
        let g5_sq = kernels.estimate(&g).unwrap().gamma[4].powi(2);
        let ac = ac_modulus(&Projection::new(g).unwrap(), &s, &grid, g5_sq).unwrap();
        assert!(ac.max_difference_quotient <= g5_sq * (1.0 + 1e-9), "site {site}");
    }
}

#[test]
fn cutoffs_are_monotone_and_exhaust() {
    let s = laplacian();
    let mut rng = Rng::new(17);
    for family in [CutoffFamily::Hard, CutoffFamily::Ramp] {
        let ops: Vec<ComplexMatrix> = (1..=5).map(|n| cutoff_operator(&s, n, family).unwrap().into_matrix()).collect();
        for _ in 0..10 {
            let f = rng.unit_vector(N);
            let q: Vec<f64> = ops.iter().map(|w| scatterkit::linalg::inner(&w.mul_vec(&f), &f).re).collect();
            assert!(q.windows(2).all(|p| p[1] >= p[0] - 1e-12));
            assert!(q.iter().all(|&x| (-1e-12..=1.0 + 1e-12).contains(&x)));
        }
        // ‖H‖ < 4, so ω_4 is already the identity.
        assert!(ops[3].max_diff(&ComplexMatrix::identity(N)) < 1e-10);
    }
    assert!(cutoff_operator(&s, 0, CutoffFamily::Hard).is_err());
    assert_eq!(CutoffFamily::Ramp.eval(1, 1.5), 0.5);
}

#[test]
fn smooth_filter_keeps_everything_or_nothing_at_the_extremes() {
    let s = laplacian();
    let f = Rng::new(2).unit_vector(N);
    let all = smooth_vector_filter(&s, &f, 1e6, 5.0, 0.2).unwrap();
    assert!(all.g.iter().zip(&f).all(|(a, b)| (a - b).norm() < 1e-10));
    assert!(all.kept.iter().all(|&k| k));
    let none = smooth_vector_filter(&s, &f, 1e-9, 5.0, 0.2).unwrap();
    assert!(norm(&none.g) < 1e-12);
    assert_eq!(none.measure, 0.0);
    // n below the band keeps only the part of f under |λ| ≤ n.
    let low = smooth_vector_filter(&s, &f, 1e6, 1.0, 0.2).unwrap();
    let e = s.spectral_projection(&BorelSet::interval(-1.0, 1.0).unwrap());
    let expect = e.apply(&f);
    assert!(low.g.iter().zip(&expect).all(|(a, b)| (a - b).norm() < 1e-10));
    assert!(smooth_vector_filter(&s, &f[..3], 1.0, 1.0, 0.2).is_err());
}

#[test]
fn windowed_integral_vanishes_for_zero_g() {
    let s = laplacian();
    let f = Rng::new(3).unit_vector(N);
    assert_eq!(windowed_time_integral(&s, &ComplexMatrix::zeros(N), &f, 5.0, 100), 0.0);
    // With G = I the integrand is ‖f‖² at every t.
    let v = windowed_time_integral(&s, &ComplexMatrix::identity(N), &f, 5.0, 100);
    assert!((v - 10.0).abs() < 1e-10);
}

#[test]
fn pac_of_zero_candidate_is_zero() {
    let s = laplacian();
    let est = pac_infty_estimate(&s, &[ComplexMatrix::zeros(N)], &params(&s), 0.5).unwrap();
    assert_eq!(est.projection.rank(), 0);
    assert!(pac_infty_estimate(&s, &[], &params(&s), 0.5).is_err());
}

#[test]
fn pac_rejects_a_site_carrying_an_eigenvector() {
    let site = N / 2;
    let s = decoupled(site);
    let p = params(&s);
    let cands: Vec<ComplexMatrix> = [20, site, 100].iter().map(|&k| position_cutoff(N, &[k]).unwrap()).collect();
    let est = pac_infty_estimate(&s, &cands, &p, 0.5).unwrap();
    assert_eq!(est.accepted, vec![true, false, true]);
    assert_eq!(est.projection.rank(), 2);
    // The rejected direction is orthogonal to the estimate.
    let e = scatterkit::linalg::basis_vector(N, site);
    assert!(norm(&est.projection.apply(&e)) < 1e-8);
}

#[test]
fn pac_join_grows_with_candidates() {
    let s = laplacian();
    let p = params(&s);
    let small: Vec<ComplexMatrix> = [30, 60].iter().map(|&k| position_cutoff(N, &[k]).unwrap()).collect();
    let mut big = small.clone();
    big.extend([90, 110].iter().map(|&k| position_cutoff(N, &[k]).unwrap()));
    let a = pac_infty_estimate(&s, &small, &p, 0.5).unwrap().projection;
    let b = pac_infty_estimate(&s, &big, &p, 0.5).unwrap().projection;
    assert!(b.rank() >= a.rank());
    assert!(b.matrix().matmul(a.matrix()).max_diff(a.matrix()) < 1e-8);
    // Everything found lives in the spectral window.
    let w = window_projection(&s, p.lambda_window);
    assert!(w.matrix().matmul(b.matrix()).max_diff(b.matrix()) < 1e-8);
    let single = candidate_range(&s, &small[0], &p).unwrap();
    assert_eq!(single.rank(), 1);
}
