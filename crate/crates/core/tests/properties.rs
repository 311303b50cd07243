use proptest::prelude::*;
use scatterkit::linalg::{inner, ComplexMatrix, C64};
use scatterkit::models::{path_laplacian, position_cutoff};
use scatterkit::operator_core::*;
use scatterkit::rng::Rng;
use scatterkit::smoothness::{cutoff_operator, pac_infty_estimate, CutoffFamily, RegularizationParams};
use scatterkit::trace_space::{factor_commutator, trace, TraceWeight, FACT_TOL};

fn hermitian(dim: usize, seed: u64) -> HermitianOperator {
    let mut rng = Rng::new(seed);
    HermitianOperator::new(ComplexMatrix::from_fn(dim, |_, _| rng.complex_normal()).hermitian_part()).unwrap()
}

fn matrix(dim: usize, seed: u64) -> ComplexMatrix {
    let mut rng = Rng::new(seed);
    ComplexMatrix::from_fn(dim, |_, _| rng.complex_normal())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn eigendecomposition_reconstructs(dim in 1usize..24, seed in any::<u64>()) {
        let h = hermitian(dim, seed);
        let s = spectral_decompose(&h).unwrap();
        let u = s.eigenvectors();
        prop_assert!(u.adjoint().matmul(u).max_diff(&ComplexMatrix::identity(dim)) < ORTHO_TOL);
        let d: Vec<C64> = s.eigenvalues().iter().map(|&l| C64::new(l, 0.0)).collect();
        prop_assert!(s.from_diagonal(&d).max_diff(h.matrix()) <= RECON_TOL * s.norm().max(1.0));
        prop_assert!(s.eigenvalues().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn spectral_projections_are_idempotent(dim in 2usize..20, seed in any::<u64>(), a in -3.0f64..3.0, len in 0.0f64..4.0) {
        let s = spectral_decompose(&hermitian(dim, seed)).unwrap();
        let p = s.spectral_projection(&BorelSet::interval(a, a + len).unwrap());
        let m = p.matrix();
        prop_assert!(m.matmul(m).max_diff(m) < PROJ_TOL);
        prop_assert!(m.hermitian_defect() < PROJ_TOL);
        prop_assert!(p.commutator_defect(s.operator().matrix()) < 1e-9);
    }

    #[test]
    fn functional_calculus_is_a_homomorphism(dim in 1usize..16, seed in any::<u64>(), c in -2.0f64..2.0) {
        let s = spectral_decompose(&hermitian(dim, seed)).unwrap();
        let f = |x: f64| C64::new((c * x).cos(), x);
        let g = |x: f64| C64::new(x * x - c, 0.5);
        let fg = s.apply_function(|x| f(x) * g(x)).unwrap();
        let prod = s.apply_function(f).unwrap().matmul(&s.apply_function(g).unwrap());
        let sum = &s.apply_function(f).unwrap() + &s.apply_function(g).unwrap();
        prop_assert!(fg.max_diff(&prod) < FC_TOL * (1.0 + fg.max_abs()));
        prop_assert!(s.apply_function(|x| f(x) + g(x)).unwrap().max_diff(&sum) < FC_TOL * (1.0 + sum.max_abs()));
    }

    #[test]
    fn first_resolvent_identity(dim in 1usize..16, seed in any::<u64>(), x in -3.0f64..3.0, y in 0.2f64..3.0) {
        let s = spectral_decompose(&hermitian(dim, seed)).unwrap();
        let (z, w) = (C64::new(x, y), C64::new(-x, -y));
        let rz = s.resolvent(z).unwrap();
        let rw = s.resolvent(w).unwrap();
        let rhs = rz.matmul(&rw).scale(z - w);
        prop_assert!((&rz - &rw).max_diff(&rhs) < 1e-9);
    }

    #[test]
    fn trace_is_cyclic(dim in 1usize..16, seed in any::<u64>()) {
        let a = matrix(dim, seed);
        let b = matrix(dim, seed.wrapping_add(1));
        let w = TraceWeight::uniform(dim);
        let ab = trace(&a.matmul(&b), &w).unwrap();
        let ba = trace(&b.matmul(&a), &w).unwrap();
        prop_assert!((ab - ba).norm() < 1e-10 * (1.0 + ab.norm()));
    }

    #[test]
    fn commutators_factor(dim in 1usize..14, seed in any::<u64>()) {
        let f = factor_commutator(&matrix(dim, seed)).unwrap();
        prop_assert!(f.residual() <= FACT_TOL * (1.0 + f.t.max_abs()));
    }

    #[test]
    fn cutoffs_increase_with_n(seed in any::<u64>(), family in prop_oneof![Just(CutoffFamily::Hard), Just(CutoffFamily::Ramp)]) {
        let s = spectral_decompose(&hermitian(12, seed)).unwrap();
        let f = Rng::new(seed ^ 0x5eed).unit_vector(12);
        let mut prev = 0.0;
        for n in 1..=6 {
            let w = cutoff_operator(&s, n, family).unwrap();
            let q = inner(&w.matrix().mul_vec(&f), &f).re;
            prop_assert!(q >= prev - 1e-12 && q <= 1.0 + 1e-12);
            prev = q;
        }
    }

    #[test]
    fn rng_streams_are_reproducible(seed in any::<u64>()) {
        let mut a = Rng::new(seed);
        let mut b = Rng::new(seed);
        for _ in 0..32 {
            prop_assert_eq!(a.next_u64(), b.next_u64());
        }
        let u = Rng::new(seed).uniform();
        prop_assert!((0.0..1.0).contains(&u));
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, ..ProptestConfig::default() })]

    #[test]
    fn pac_join_is_monotone_in_candidates(sites in proptest::collection::btree_set(4usize..60, 2..5)) {
        let s = spectral_decompose(&path_laplacian(64)).unwrap();
        let params = RegularizationParams::standard(&s, 0.3, 0.4, (1.0, 3.0)).unwrap();
        let cands: Vec<ComplexMatrix> = sites.iter().map(|&k| position_cutoff(64, &[k]).unwrap()).collect();
        let fewer = pac_infty_estimate(&s, &cands[..1], &params, 1.0).unwrap().projection;
        let more = pac_infty_estimate(&s, &cands, &params, 1.0).unwrap().projection;
        prop_assert!(more.rank() >= fewer.rank());
        prop_assert!(more.matrix().matmul(fewer.matrix()).max_diff(fewer.matrix()) < 1e-8);
    }
}
