use scatterkit::linalg::{operator_norm, ComplexMatrix, C64};
use scatterkit::models::{build_perturbation, path_laplacian, position_cutoff, PerturbationSpec};
use scatterkit::operator_core::*;
use scatterkit::rng::Rng;
use scatterkit::wave::*;
use scatterkit::Error;

const N: usize = 64;
const WINDOW: (f64, f64) = (1.0, 3.0);
const EPS: [f64; 4] = [0.3, 0.2, 0.15, 0.1];

fn rank_one_pair(j: Option<ComplexMatrix>) -> ScatteringPair {
    let h = path_laplacian(N);
    let v = build_perturbation(&PerturbationSpec::RankK { sites: vec![N / 2], strength: 0.2 }, N).unwrap().operator;
    let h1 = HermitianOperator::new(h.matrix() + v.matrix()).unwrap();
    let s = spectral_decompose(&h).unwrap();
    let s1 = spectral_decompose(&h1).unwrap();
    ScatteringPair::band(s, s1, j.unwrap_or_else(|| ComplexMatrix::identity(N)), WINDOW).unwrap()
}

fn free_pair(j: ComplexMatrix) -> ScatteringPair {
    let s = spectral_decompose(&path_laplacian(N)).unwrap();
    ScatteringPair::band(s.clone(), s, j, WINDOW).unwrap()
}

fn time_schedule() -> Schedule {
    Schedule::time(100.0, 10, Some(0.1)).unwrap()
}

fn eps_schedule() -> Schedule {
    Schedule::epsilon(EPS.to_vec()).unwrap()
}

fn grid() -> Vec<f64> {
    lambda_grid(WINDOW.0 - 0.4, WINDOW.1 + 0.4, EPS[3] / 5.0)
}

fn random_hermitian(dim: usize, rng: &mut Rng) -> HermitianOperator {
    HermitianOperator::new(ComplexMatrix::from_fn(dim, |_, _| rng.complex_normal()).hermitian_part()).unwrap()
}

#[test]
fn unperturbed_pair_with_identity_coupling_gives_p() {
    let pair = free_pair(ComplexMatrix::identity(N));
    let p = pair.p.matrix();
    for sign in [Sign::Plus, Sign::Minus] {
        let t = time_dependent_wave(&pair, sign, &time_schedule()).unwrap();
        assert!(t.w.max_diff(p) < 1e-10);
        let w = weak_wave(&pair, sign, &time_schedule()).unwrap();
        assert!(w.w.max_diff(p) < 1e-10);
        let st = stationary_wave(&pair, sign, &grid(), &eps_schedule()).unwrap();
        assert!(st.w.max_diff(p) < 1e-10);
        assert!(t.converged && st.converged);
    }
}

#[test]
fn zero_coupling_gives_zero() {
    let pair = rank_one_pair(Some(ComplexMatrix::zeros(N)));
    assert_eq!(time_dependent_wave(&pair, Sign::Plus, &time_schedule()).unwrap().w.max_abs(), 0.0);
    assert_eq!(weak_wave(&pair, Sign::Minus, &time_schedule()).unwrap().w.max_abs(), 0.0);
    assert!(stationary_wave(&pair, Sign::Plus, &grid(), &eps_schedule()).unwrap().w.max_abs() < 1e-14);
}

#[test]
fn weak_construction_is_adjoint_symmetric() {
    let pair = rank_one_pair(None);
    let sched = time_schedule();
    for sign in [Sign::Plus, Sign::Minus] {
        let w = weak_wave(&pair, sign, &sched).unwrap();
        let back = weak_wave(&pair.swapped(), sign, &sched).unwrap();
        assert!(w.w.adjoint().max_diff(&back.w) < 1e-10);
    }
}

#[test]
fn stationary_construction_is_nearly_adjoint_symmetric() {
    let pair = rank_one_pair(None);
    let w = stationary_wave(&pair, Sign::Plus, &grid(), &eps_schedule()).unwrap();
    let back = stationary_wave(&pair.swapped(), Sign::Plus, &grid(), &eps_schedule()).unwrap();
    let r = operator_norm(&(&w.w.adjoint() - &back.w)).unwrap();
    assert!(r < 0.05, "adjoint asymmetry {r}");
}

#[test]
fn duhamel_formula_holds() {
    let pair = rank_one_pair(None);
    assert_eq!(duhamel_residual(&pair, 2.0, 2.0, 100).unwrap(), 0.0);
    assert!(duhamel_residual(&pair, 0.0, 5.0, 2000).unwrap() < 1e-8);
    assert!(duhamel_residual(&pair, 3.0, 1.0, 10).is_err());

    let mut rng = Rng::new(8);
    let h = random_hermitian(8, &mut rng);
    let h1 = random_hermitian(8, &mut rng);
    let j = ComplexMatrix::from_fn(8, |_, _| rng.complex_normal());
    let pair = ScatteringPair::new(&h, &h1, j, Projection::identity(8), Projection::identity(8)).unwrap();
    assert!(duhamel_residual(&pair, -1.0, 2.0, 4000).unwrap() < 1e-8);

    // A coupling that commutes with H leaves W_J(t) constant.
    let s = spectral_decompose(&h).unwrap();
    let j = s.apply_function(|x| C64::new(x.cos(), 0.0)).unwrap();
    let pair = ScatteringPair::new(&h, &h, j, Projection::identity(8), Projection::identity(8)).unwrap();
    assert!(pair.commutator().max_abs() < 1e-12);
    assert!(duhamel_residual(&pair, 0.0, 7.0, 10).unwrap() < 1e-12);
}

#[test]
fn resolvent_commutator_identity_holds_for_random_pairs() {
    let mut rng = Rng::new(12);
    for _ in 0..10 {
        let h = random_hermitian(8, &mut rng);
        let h1 = random_hermitian(8, &mut rng);
        let j = ComplexMatrix::from_fn(8, |_, _| rng.complex_normal());
        let pair = ScatteringPair::new(&h, &h1, j, Projection::identity(8), Projection::identity(8)).unwrap();
        let z = C64::new(2.0, 1.0);
        assert!(resolvent_commutator_residual(&pair, z).unwrap() <= 1e-10);
        assert!(resolvent_conditioning(&pair, z) >= 1.0);
    }
}

#[test]
fn limit_cases_of_the_residuals() {
    let pair = rank_one_pair(None);
    let mut w = time_dependent_wave(&pair, Sign::Plus, &time_schedule()).unwrap();
    assert!(intertwining_residual(&w, &pair, &BorelSet::real_line()).unwrap() < 1e-12);
    assert!(functional_intertwining_residual(&w, &pair, |_| C64::new(3.0, -1.0)).unwrap() < 1e-12);
    w.w = ComplexMatrix::zeros(N);
    let (iso, co) = isometry_residuals(&w, &pair).unwrap();
    assert!((iso - 1.0).abs() < 1e-12);
    assert!(co < 1e-12);
}

#[test]
fn wave_operators_intertwine_functions_of_the_operators() {
    let pair = rank_one_pair(None);
    let set = snapped_interval(&pair, WINDOW).unwrap();
    let w_time = time_dependent_wave(&pair, Sign::Plus, &time_schedule()).unwrap();
    let w_stat = stationary_wave(&pair, Sign::Plus, &grid(), &eps_schedule()).unwrap();
    // Tolerance 0.05 × the Lipschitz constant of φ on [0, 4].
    let one = C64::new(1.0, 0.0);
    for w in [&w_time, &w_stat] {
        assert!(functional_intertwining_residual(w, &pair, |x| one * x).unwrap() < 0.05);
        assert!(functional_intertwining_residual(w, &pair, |x| one * (x * x)).unwrap() < 0.4);
        assert!(functional_intertwining_residual(w, &pair, |x| C64::from_polar(1.0, -x)).unwrap() < 0.05);
        let indicator = |x: f64| if set.contains(x) { one } else { C64::new(0.0, 0.0) };
        assert!(functional_intertwining_residual(w, &pair, indicator).unwrap() < 0.05);
    }
}

#[test]
fn constructions_respect_their_supports() {
    let pair = rank_one_pair(None);
    let t = time_dependent_wave(&pair, Sign::Minus, &time_schedule()).unwrap();
    assert!(t.support_defects(&pair).0 < 1e-12);
    let st = stationary_wave(&pair, Sign::Minus, &grid(), &eps_schedule()).unwrap();
    let (a, b) = st.support_defects(&pair);
    assert!(a < 1e-12 && b < 1e-12);
    let weak = weak_wave(&pair, Sign::Minus, &time_schedule()).unwrap();
    let (a, b) = weak.support_defects(&pair);
    assert!(a < 1e-12 && b < 1e-12);
}

#[test]
fn time_and_stationary_agree_within_their_trails() {
    let pair = rank_one_pair(None);
    for sign in [Sign::Plus, Sign::Minus] {
        let t = time_dependent_wave(&pair, sign, &time_schedule()).unwrap();
        let st = stationary_wave(&pair, sign, &grid(), &eps_schedule()).unwrap();
        assert!(t.converged && st.converged);
        let gap = operator_norm(&(&t.w - &st.w)).unwrap();
        let bound = 2.0 * t.final_trail().max(st.final_trail());
        assert!(gap <= bound, "{sign:?}: {gap} > {bound}");
        let (iso, _) = isometry_residuals(&st, &pair).unwrap();
        assert!(iso < 0.05);
    }
}

#[test]
fn stationary_method_refuses_an_under_resolved_mesh() {
    let pair = rank_one_pair(None);
    let fine = Schedule::epsilon(vec![0.05, 0.02]).unwrap();
    let g = lambda_grid(0.6, 3.4, 0.004);
    assert!(matches!(stationary_wave(&pair, Sign::Plus, &g, &fine), Err(Error::UnderResolvedMesh(_))));
    let coarse_grid = lambda_grid(0.6, 3.4, 0.5);
    assert!(stationary_wave(&pair, Sign::Plus, &coarse_grid, &eps_schedule()).is_err());
    assert!(stationary_wave(&pair, Sign::Plus, &grid(), &time_schedule()).is_err());
}

#[test]
fn long_schedules_raise_the_recurrence_warning() {
    let pair = rank_one_pair(None);
    let short = time_dependent_wave(&pair, Sign::Plus, &time_schedule()).unwrap();
    let t_rec = short.recurrence_time.unwrap();
    assert!(!short.recurrence_warning);
    let long = time_dependent_wave(&pair, Sign::Plus, &Schedule::time(2.0 * t_rec, 4, Some(0.1)).unwrap()).unwrap();
    assert!(long.recurrence_warning);
}

#[test]
fn schedules_validate_their_points() {
    assert!(Schedule::epsilon(vec![]).is_err());
    assert!(Schedule::epsilon(vec![0.1, 0.1]).is_err());
    assert!(Schedule::epsilon(vec![0.1, -0.2]).is_err());
    assert!(Schedule::new(ScheduleKind::Epsilon, vec![0.1], Some(0.5)).is_err());
    let s = Schedule::epsilon(vec![0.1, 0.3, 0.2]).unwrap();
    assert_eq!(s.descending(), vec![0.3, 0.2, 0.1]);
    assert_eq!(Schedule::time(10.0, 2, None).unwrap().points, vec![5.0, 10.0]);
}

#[test]
fn radial_probe_of_zero_is_flat() {
    let s = spectral_decompose(&path_laplacian(16)).unwrap();
    let r = radial_limit_probe(&ComplexMatrix::zeros(16), &s, &Projection::identity(16), 2.0, &[0.3, 0.1], Sign::Plus).unwrap();
    assert_eq!(r.norms, vec![0.0, 0.0]);
    assert!(r.stable);
}

#[test]
fn radial_probe_sees_an_isolated_pole() {
    let s = spectral_decompose(&HermitianOperator::diagonal(&[0.0, 1.0, 2.0])).unwrap();
    let r = radial_limit_probe(&ComplexMatrix::identity(3), &s, &Projection::identity(3), 1.0, &[0.1, 0.01, 0.001], Sign::Minus).unwrap();
    assert!(r.slopes.iter().all(|&x| (x + 1.0).abs() < 1e-3));
    assert!(!r.stable);
    assert!(radial_limit_probe(&ComplexMatrix::identity(3), &s, &Projection::identity(3), 1.0, &[0.01, 0.1], Sign::Plus).is_err());
}

#[test]
fn radial_probe_finds_the_free_green_function() {
    // ⟨e₀, R(λ + i0) e₀⟩ for the infinite chain has modulus 1/√(λ(4 − λ)).
    let n = 256;
    let s = spectral_decompose(&path_laplacian(n)).unwrap();
    let chi = position_cutoff(n, &[n / 2]).unwrap();
    let p = Projection::new(chi.clone()).unwrap();
    let r = radial_limit_probe(&chi, &s, &p, 2.0, &[0.3, 0.2, 0.1, 0.05], Sign::Plus).unwrap();
    assert!(r.stable);
    assert!((r.norms.last().unwrap() - 0.5).abs() < 0.01);
}
