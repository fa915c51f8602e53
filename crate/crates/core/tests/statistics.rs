use eigvar::ansatz::{random_init, AnsatzSpec};
use eigvar::numerics::{oracle_eigendecompose, random};
use eigvar::objectives::{objective_value, EvalMode, Problem};
use eigvar::simulator::{bitstring, sample_basis, DensityMatrix, StateVector};
use eigvar::swaptest::{destructive_swap_test, exact_pass_probability, mixed_swap_test};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

const SIGNIFICANCE: f64 = 1e-3;

fn pure(n: usize, r: &mut ChaCha8Rng) -> StateVector {
    StateVector::from_amplitudes(random::state(1 << n, r)).unwrap()
}

#[test]
fn basis_sampling_passes_chi_squared() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let shots = 100_000u64;
    let critical = ChiSquared::new(7.0).unwrap().inverse_cdf(1.0 - SIGNIFICANCE);
    for _ in 0..5 {
        let state = pure(3, &mut rng);
        let counts = sample_basis(&state, shots, &mut rng);
        assert_eq!(counts.values().sum::<u64>(), shots);
        let stat: f64 = state
            .probabilities()
            .iter()
            .enumerate()
            .map(|(k, &p)| {
                let expected = p * shots as f64;
                let observed = counts.get(&bitstring(k, 3)).copied().unwrap_or(0) as f64;
                (observed - expected).powi(2) / expected
            })
            .sum();
        assert!(stat < critical, "chi-squared {stat} above {critical}");
    }
}

#[test]
fn z_estimate_is_unbiased() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let (a, b) = (pure(2, &mut rng), pure(2, &mut rng));
    let p0 = exact_pass_probability(&a, &b).unwrap();
    let z = 2.0 * p0 - 1.0;
    let reps = 200;
    let shots = 10_000u64;
    let estimates: Vec<f64> = (0..reps)
        .map(|_| destructive_swap_test(&a, &b, shots, &mut rng).unwrap().z_hat)
        .collect();
    let mean = estimates.iter().sum::<f64>() / reps as f64;
    let var = estimates.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
    let bound = 3.0 * var.sqrt() / (reps as f64).sqrt();
    assert!((mean - z).abs() <= bound, "mean {mean} vs {z}, bound {bound}");
}

#[test]
fn repeated_passes_follow_power_law() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let (a, b) = (pure(1, &mut rng), pure(1, &mut rng));
    let p0 = exact_pass_probability(&a, &b).unwrap();
    let trials = 20_000;
    for k in [1u32, 3, 6] {
        let hits = (0..trials)
            .filter(|_| (0..k).all(|_| destructive_swap_test(&a, &b, 1, &mut rng).unwrap().passes == 1))
            .count();
        let p = p0.powi(k as i32);
        let rate = hits as f64 / trials as f64;
        let sd = (p * (1.0 - p) / trials as f64).sqrt();
        assert!((rate - p).abs() <= 5.0 * sd, "k={k}: {rate} vs {p}");
    }
}

#[test]
fn sampled_objective_tracks_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let spec = AnsatzSpec::with_default_depth(2).unwrap();
    let sampled = EvalMode::Sampled { shots: 100_000 };
    for _ in 0..50 {
        let problem = Problem::unitary_eig(random::unitary(4, &mut rng)).unwrap();
        let theta = random_init(&spec, &mut rng);
        let exact = objective_value(&problem, &spec, &theta.0, EvalMode::Exact, &mut rng).unwrap();
        let noisy = objective_value(&problem, &spec, &theta.0, sampled, &mut rng).unwrap();
        assert!((exact - noisy).abs() <= 0.02, "{noisy} vs {exact}");
    }
}

#[test]
fn mixed_test_estimates_trace_overlap() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let rho = DensityMatrix::new(random::density_with_spectrum(&[0.6, 0.25, 0.1, 0.05], &mut rng)).unwrap();
    for _ in 0..10 {
        let sigma = pure(2, &mut rng);
        let stats = mixed_swap_test(&rho, &sigma, 200_000, &mut rng).unwrap();
        let overlap = eigvar::simulator::expectation_in_state(&rho, &sigma).unwrap();
        let p = (1.0 + overlap) / 2.0;
        let sd = (p * (1.0 - p) / 200_000.0).sqrt();
        assert!((stats.p0_hat - p).abs() <= 5.0 * sd);
    }
}

#[test]
fn sampled_qpca_estimates_respect_top_eigenvalue() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let spec = AnsatzSpec::with_default_depth(2).unwrap();
    let rho = DensityMatrix::new(random::density_with_spectrum(&[0.55, 0.3, 0.1, 0.05], &mut rng)).unwrap();
    let lambda1 = oracle_eigendecompose(rho.matrix()).unwrap()[0].eigenvalue.re;
    let problem = Problem::qpca(rho, Vec::new(), 100.0).unwrap();
    for _ in 0..50 {
        let theta = random_init(&spec, &mut rng);
        let t = objective_value(&problem, &spec, &theta.0, EvalMode::Sampled { shots: 100_000 }, &mut rng).unwrap();
        assert!(t <= lambda1 + 0.02, "{t} above {lambda1}");
    }
}
