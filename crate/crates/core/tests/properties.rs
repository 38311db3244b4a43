use proptest::prelude::*;

use qht::bounds::{keli_beta_bound, quasi_entropy, relative_entropy};
use qht::iid::{convolve_power, tail_mass};
use qht::linalg::{
    apply_fn, default_rank_tol, eig_hermitian, jordan_parts, loewner_gap, max_abs_diff,
    support_projector, CMatrix, HermitianMatrix, Projector,
};
use qht::measure::{Atom, AtomicMeasure, MERGE_TOL};
use qht::modular::{modular_spectrum, spectral_distribution, Reference};
use qht::rng::{generator, ginibre, orthonormal_columns};
use qht::states::{random_density, tensor_power, StatePair, FAITHFUL_FLOOR};

fn random_hermitian(seed: u64, dim: usize) -> HermitianMatrix {
    let g = ginibre(&mut generator(seed), dim, dim);
    HermitianMatrix::new(&g + g.adjoint()).unwrap()
}

fn spectral_radius(h: &HermitianMatrix) -> f64 {
    eig_hermitian(h).unwrap().values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eig_reconstructs(seed in any::<u64>(), dim in 2usize..=8) {
        let h = random_hermitian(seed, dim);
        let eig = eig_hermitian(&h).unwrap();
        let err = max_abs_diff(eig.reconstruct().as_matrix(), h.as_matrix());
        prop_assert!(err <= 1e-9 * (1.0 + spectral_radius(&h)));
        prop_assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn identity_map_is_identity(seed in any::<u64>(), dim in 2usize..=8) {
        let h = random_hermitian(seed, dim);
        let back = apply_fn(&h, |x| x).unwrap();
        prop_assert!(max_abs_diff(back.as_matrix(), h.as_matrix()) <= 1e-9);
    }

    #[test]
    fn support_of_pa_is_below_p(seed in any::<u64>(), dim in 2usize..=8, rank_seed in 0usize..=8) {
        let mut gen = generator(seed);
        let rank = rank_seed % (dim + 1);
        let p = Projector::from_orthonormal_columns(&orthonormal_columns(&mut gen, dim, rank), dim);
        let a = ginibre(&mut gen, dim, dim);
        let s = support_projector(&(p.as_matrix() * a), default_rank_tol(dim)).unwrap();
        prop_assert!(loewner_gap(s.matrix(), p.matrix()).unwrap() >= -1e-9);
        prop_assert_eq!(s.rank(), rank);
    }

    #[test]
    fn jordan_trace(seed in any::<u64>(), dim in 2usize..=8) {
        let h = random_hermitian(seed, dim);
        let (pos, neg) = jordan_parts(&h).unwrap();
        prop_assert!((pos.trace() - neg.trace() - h.trace()).abs() <= 1e-10);
        let product = pos.as_matrix() * neg.as_matrix();
        prop_assert!(max_abs_diff(&product, &CMatrix::zeros(dim, dim)) <= 1e-9);
    }

    #[test]
    fn random_densities_are_valid(seed in any::<u64>(), dim in 1usize..=8) {
        let rho = random_density(dim, seed, FAITHFUL_FLOOR).unwrap();
        prop_assert!(rho.check(FAITHFUL_FLOOR).is_ok());
        prop_assert!((rho.matrix().trace() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn tensor_power_spectrum(seed in any::<u64>(), dim in 2usize..=3, n in 1usize..=3) {
        let rho = random_density(dim, seed, FAITHFUL_FLOOR).unwrap();
        let mut want = vec![1.0f64];
        for _ in 0..n {
            want = want.iter().flat_map(|a| rho.eigenvalues().iter().map(move |b| a * b)).collect();
        }
        want.sort_by(f64::total_cmp);
        let got = tensor_power(&rho, n).unwrap();
        for (g, w) in got.eigenvalues().iter().zip(&want) {
            prop_assert!((g - w).abs() <= 1e-9);
        }
    }

    #[test]
    fn quasi_entropy_identity(seed in any::<u64>(), dim in 2usize..=6) {
        let pair = StatePair::random(dim, seed).unwrap();
        let spec = modular_spectrum(&pair);
        for s in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let via_spec: f64 = spec.pairs().map(|p| p.weight_sigma * p.ratio.powf(s)).sum();
            prop_assert!((via_spec - quasi_entropy(&pair, s).unwrap()).abs() <= 1e-9);
        }
    }

    #[test]
    fn relative_entropy_is_rho_mean(seed in any::<u64>(), dim in 2usize..=6) {
        let pair = StatePair::random(dim, seed).unwrap();
        let m = spectral_distribution(&modular_spectrum(&pair), Reference::Rho);
        prop_assert!((m.mean() - relative_entropy(&pair).unwrap()).abs() <= 1e-9);
    }

    #[test]
    fn keli_bound_is_monotone(seed in any::<u64>(), dim in 2usize..=6) {
        let pair = StatePair::random(dim, seed).unwrap();
        let grid = [0.01, 0.05, 0.1, 0.3, 0.5, 1.0, 2.0, 5.0, 10.0, 100.0];
        let bounds: Vec<f64> = grid.iter().map(|&e| keli_beta_bound(&pair, e).unwrap()).collect();
        prop_assert!(bounds.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn convolution_conserves_mass_and_moments(
        positions in prop::collection::vec(-3.0f64..3.0, 4),
        raw in prop::collection::vec(0.05f64..1.0, 4),
        n in 1usize..=50,
    ) {
        let total: f64 = raw.iter().sum();
        let base = AtomicMeasure::from_atoms(
            positions.iter().zip(&raw).map(|(&position, &m)| Atom { position, mass: m / total }),
            MERGE_TOL,
        ).unwrap();
        let power = convolve_power(&base, n, MERGE_TOL, 0.0).unwrap();
        prop_assert!((power.mass() + power.defect() - 1.0).abs() <= 1e-11);
        let nf = n as f64;
        let mean_scale = (nf * base.mean()).abs().max(1.0);
        prop_assert!((power.mean() - nf * base.mean()).abs() <= 1e-8 * mean_scale);
        prop_assert!((power.variance() - nf * base.variance()).abs() <= 1e-8 * (nf * base.variance()).max(1.0));
        prop_assert!(power.atoms().windows(2).all(|w| w[0].position < w[1].position));
    }

    #[test]
    fn tail_interval_is_ordered(
        positions in prop::collection::vec(-2.0f64..2.0, 1..6),
        threshold in -3.0f64..3.0,
        prune in 0.0f64..0.3,
        strict in any::<bool>(),
    ) {
        let k = positions.len() as f64;
        let m = AtomicMeasure::from_atoms(
            positions.iter().map(|&position| Atom { position, mass: 1.0 / k }),
            MERGE_TOL,
        ).unwrap().prune(prune);
        let t = tail_mass(&m, threshold, strict);
        prop_assert!(0.0 <= t.lower && t.lower <= t.upper && t.upper <= 1.0 + 1e-12);
    }
}
