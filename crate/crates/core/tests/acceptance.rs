//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::TAU;
use std::panic;
use std::process::ExitCode;
use std::time::Instant;

use eigvar::ansatz::{prepare_state, random_init, AnsatzSpec, ParamVector};
use eigvar::cli::{self, CommandKind, RunConfig};
use eigvar::drivers::{find_eigenvector, find_eigenvector_normal, qpca, solve_generalized};
use eigvar::numerics::{
    eigenspace_fidelity, hermitize, oracle_eigendecompose, random, unitary_from_hermitian, ComplexMatrix, C64,
};
use eigvar::objectives::{objective_value, EvalMode, Problem};
use eigvar::optical::{coincidence_objective, coincidence_probability, find_eigenvector_optical};
use eigvar::optimizer::{minimize, Method, OptimizerConfig};
use eigvar::simulator::{expectation_in_state, pure_overlap, DensityMatrix, StateVector};
use eigvar::swaptest::{destructive_pass_probability, destructive_swap_test, full_test_pass_probability};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_pure(n: usize, rng: &mut ChaCha8Rng) -> StateVector {
    StateVector::from_amplitudes(random::state(1 << n, rng)).unwrap()
}

/// Five restarts sharing a budget of 2·10⁴ evaluations.
fn exact_cfg(seed: u64) -> OptimizerConfig {
    OptimizerConfig {
        method: Method::NelderMead,
        max_evals: 4000,
        restarts: 5,
        seed,
        ..OptimizerConfig::default()
    }
}

fn spec2() -> AnsatzSpec {
    AnsatzSpec::with_default_depth(2).unwrap()
}

fn swap_test_law() -> Outcome {
    let mut r = rng(101);
    let mut worst_sampled: f64 = 0.0;
    let mut worst_exact: f64 = 0.0;
    for i in 0..200 {
        let n = 1 + i % 3;
        let a = random_pure(n, &mut r);
        let b = random_pure(n, &mut r);
        let law = (1.0 + pure_overlap(&a, &b).unwrap()) / 2.0;
        let stats = destructive_swap_test(&a, &b, 100_000, &mut r).unwrap();
        worst_sampled = worst_sampled.max((stats.p0_hat - law).abs());
        let full = full_test_pass_probability(&a, &b).unwrap();
        let destructive = destructive_pass_probability(&a, &b).unwrap();
        worst_exact = worst_exact.max((full - destructive).abs());
    }
    check(
        worst_sampled <= 0.01 && worst_exact <= 1e-10,
        format!("max |p0_hat - law| = {worst_sampled:.4} (<= 0.01), max |full - destructive| = {worst_exact:.1e} (<= 1e-10)"),
    )
}

fn unitary_finder() -> Outcome {
    let mut r = rng(202);
    let mut successes = 0;
    let mut max_evals = 0;
    for i in 0..20 {
        let u = random::unitary(4, &mut r);
        let res = find_eigenvector(&u, &spec2(), &exact_cfg(2000 + i), EvalMode::Exact).unwrap();
        max_evals = max_evals.max(res.trace.n_evals);
        if res.objective_final >= 0.999 && res.oracle_fidelity >= 0.99 && res.residual <= 0.05 {
            successes += 1;
        }
    }
    check(
        successes >= 18 && max_evals <= 20_000,
        format!("{successes}/20 reached objective >= 0.999, fidelity >= 0.99, residual <= 0.05 (need 18); max evals {max_evals}"),
    )
}

fn qft(dim: usize) -> ComplexMatrix {
    let w = TAU / dim as f64;
    let norm = 1.0 / (dim as f64).sqrt();
    ComplexMatrix::from_fn(dim, |j, k| C64::from_polar(norm, w * (j * k) as f64))
}

fn degenerate_qft() -> Outcome {
    let res = find_eigenvector(&qft(4), &spec2(), &exact_cfg(303), EvalMode::Exact).unwrap();
    check(
        res.objective_final >= 0.99,
        format!("QFT objective {:.6} (>= 0.99), oracle fidelity {:.4}", res.objective_final, res.oracle_fidelity),
    )
}

fn sampled_robustness() -> Outcome {
    let mut r = rng(404);
    let cfg = |seed| OptimizerConfig {
        method: Method::Spsa,
        max_evals: 5000,
        restarts: 3,
        seed,
        ..OptimizerConfig::default()
    };
    let mut successes = 0;
    let mut values = Vec::new();
    for i in 0..10 {
        let u = random::unitary(4, &mut r);
        let res = find_eigenvector(&u, &spec2(), &cfg(4000 + i), EvalMode::Sampled { shots: 10_000 }).unwrap();
        let problem = Problem::unitary_eig(u).unwrap();
        let exact = objective_value(&problem, &spec2(), &res.theta_star.0, EvalMode::Exact, &mut r).unwrap();
        values.push(format!("{exact:.3}"));
        if exact >= 0.95 {
            successes += 1;
        }
    }
    check(
        successes >= 7,
        format!("{successes}/10 re-evaluated exact objectives >= 0.95 (need 7): [{}]", values.join(", ")),
    )
}

fn generalized() -> Outcome {
    let mut r = rng(505);
    let mut successes = 0;
    for i in 0..10 {
        let u = random::unitary(4, &mut r);
        let v = random::unitary(4, &mut r);
        let res = solve_generalized(&u, &v, &spec2(), &exact_cfg(5000 + i), EvalMode::Exact).unwrap();
        let uv = &u.adjoint() * &v;
        let lambda = res.oracle_eigenvalue;
        let psi = prepare_state(&spec2(), &res.theta_star.0).unwrap();
        let fidelity = eigenspace_fidelity(psi.amplitudes(), &uv, lambda, 0.05).unwrap();
        if fidelity >= 0.99 {
            successes += 1;
        }
    }
    check(successes >= 8, format!("{successes}/10 with fidelity >= 0.99 against the oracle of U†V (need 8)"))
}

/// Real parts spread over [−1.4, 1.4] with gaps of at least 0.1, so
/// `e^{2i·Re λ}` stays injective on the spectrum.
fn separated_spectrum(r: &mut ChaCha8Rng) -> Vec<C64> {
    use rand::Rng;
    loop {
        let mut re: Vec<f64> = (0..4).map(|_| r.random_range(-1.4..1.4)).collect();
        re.sort_by(f64::total_cmp);
        if re.windows(2).all(|w| w[1] - w[0] >= 0.1) {
            return re.into_iter().map(|x| C64::new(x, r.random_range(-1.0..1.0))).collect();
        }
    }
}

fn normal_matrices() -> Outcome {
    let mut r = rng(606);
    let mut successes = 0;
    let mut worst_identity: f64 = 1.0;
    for i in 0..10 {
        let eigs = separated_spectrum(&mut r);
        let a = random::normal_with_spectrum(&eigs, &mut r);
        let h = hermitize(&a);
        let u_a = unitary_from_hermitian(&h).unwrap();
        for pair in oracle_eigendecompose(&a).unwrap() {
            let mu = 2.0 * pair.eigenvalue.re;
            let in_h = eigenspace_fidelity(&pair.eigenvector, &h, C64::new(mu, 0.0), 1e-6).unwrap();
            let in_u = eigenspace_fidelity(&pair.eigenvector, &u_a, C64::new(0.0, mu).exp(), 1e-6).unwrap();
            worst_identity = worst_identity.min(in_h).min(in_u);
        }
        let res = find_eigenvector_normal(&a, &spec2(), &exact_cfg(6000 + i), EvalMode::Exact).unwrap();
        if res.oracle_fidelity >= 0.99 {
            successes += 1;
        }
    }
    check(
        successes >= 8 && worst_identity >= 1.0 - 1e-8,
        format!("{successes}/10 with fidelity >= 0.99 against A (need 8); min eigenvector agreement across A, H_A, U_A = {worst_identity:.12}"),
    )
}

fn principal_components() -> Outcome {
    let mut r = rng(707);
    let u = random::unitary(4, &mut r);
    let d = ComplexMatrix::diag_real(&[0.7, 0.2, 0.1, 0.0]);
    let rho = DensityMatrix::new(&(&u * &d) * &u.adjoint()).unwrap();
    let res = qpca(&rho, 2, &spec2(), &exact_cfg(7000), EvalMode::Exact, 100.0).unwrap();
    let (c1, c2) = (&res.components[0], &res.components[1]);
    let estimates_ok = (c1.eigenvalue_estimate - 0.7).abs() <= 0.02 && (c2.eigenvalue_estimate - 0.2).abs() <= 0.02;
    let fidelity_ok = c1.oracle_fidelity >= 0.98 && c2.oracle_fidelity >= 0.98;
    let overlap_ok = c2.max_prior_overlap <= 0.05;

    let lambda1 = oracle_eigendecompose(rho.matrix()).unwrap()[0].eigenvalue.re;
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..1000 {
        let theta = random_init(&spec2(), &mut r);
        let psi = prepare_state(&spec2(), &theta.0).unwrap();
        worst = worst.max(expectation_in_state(&rho, &psi).unwrap() - lambda1);
    }
    check(
        estimates_ok && fidelity_ok && overlap_ok && worst <= 1e-10,
        format!(
            "estimates ({:.4}, {:.4}) vs (0.7, 0.2) ±0.02; fidelities ({:.4}, {:.4}) >= 0.98; overlap {:.2e} <= 0.05; max tr(ρσ) - λ1 over 1000 θ = {worst:.2e}",
            c1.eigenvalue_estimate, c2.eigenvalue_estimate, c1.oracle_fidelity, c2.oracle_fidelity, c2.max_prior_overlap
        ),
    )
}

fn optical_identity() -> Outcome {
    let mut r = rng(808);
    let mut worst_identity: f64 = 0.0;
    for i in 0..100 {
        let n = 1 + i % 3;
        let a = random_pure(n, &mut r);
        let b = random_pure(n, &mut r);
        let pc = coincidence_probability(&DensityMatrix::from_pure(&a), &DensityMatrix::from_pure(&b)).unwrap();
        worst_identity = worst_identity.max((pc + full_test_pass_probability(&a, &b).unwrap() - 1.0).abs());
    }

    let spec = AnsatzSpec::with_default_depth(1).unwrap();
    let s = random::unitary(2, &mut r);
    let cfg = OptimizerConfig {
        max_evals: 4000,
        restarts: 3,
        seed: 808,
        ..OptimizerConfig::default()
    };
    let res = find_eigenvector_optical(&s, &spec, &cfg, EvalMode::Exact).unwrap();
    let mut thetas: Vec<ParamVector> = (0..20).map(|_| random_init(&spec, &mut r)).collect();
    thetas.push(res.theta_star.clone());
    let mut worst_agreement: f64 = 0.0;
    for theta in &thetas {
        let psi = prepare_state(&spec, &theta.0).unwrap();
        let destructive = 2.0 * destructive_pass_probability(&psi.apply_matrix(&s).unwrap(), &psi).unwrap() - 1.0;
        let optical = coincidence_objective(&s, &spec, &theta.0, EvalMode::Exact, &mut r).unwrap();
        worst_agreement = worst_agreement.max((optical - destructive).abs());
    }
    check(
        worst_identity <= 1e-12 && worst_agreement <= 1e-9 && res.converged,
        format!(
            "max |P_C + P0 - 1| = {worst_identity:.1e} (<= 1e-12); max |optical - destructive| = {worst_agreement:.1e} (<= 1e-9); search objective {:.6}",
            res.objective_final
        ),
    )
}

fn bowl(x: &[f64]) -> f64 {
    x.iter().map(|v| (v - 1.0).powi(2)).sum()
}

fn optimizer_regression() -> Outcome {
    let mut failures = Vec::new();
    for method in [Method::NelderMead, Method::Spsa] {
        let cfg = |max_evals, seed| OptimizerConfig {
            method,
            max_evals,
            restarts: 1,
            seed,
            ..OptimizerConfig::default()
        };
        let (_, t) = minimize(bowl, &ParamVector::zeros(4), &cfg(2000, 1), &mut rng(1)).unwrap();
        if t.best_value > 1e-4 {
            failures.push(format!("{method:?} dim 4: {:.2e}", t.best_value));
        }
        for dim in 1..=12 {
            let (_, t) = minimize(bowl, &ParamVector::zeros(dim), &cfg(5000, dim as u64), &mut rng(dim as u64)).unwrap();
            if t.best_value > 1e-3 || t.n_evals > 5000 {
                failures.push(format!("{method:?} dim {dim}: {:.2e}", t.best_value));
            }
        }
    }
    let noise = rand_distr::Normal::new(0.0, 0.01).unwrap();
    let mut noise_rng = rng(9);
    let noisy = |x: &[f64]| bowl(x) + rand_distr::Distribution::sample(&noise, &mut noise_rng);
    let cfg = OptimizerConfig {
        method: Method::Spsa,
        max_evals: 10_000,
        restarts: 1,
        stall_window: 10_000,
        ..OptimizerConfig::default()
    };
    let (_, t) = minimize(noisy, &ParamVector::zeros(4), &cfg, &mut rng(10)).unwrap();
    if t.best_value > 0.05 || t.n_evals > 10_000 {
        failures.push(format!("noisy SPSA: {:.3}", t.best_value));
    }
    check(
        failures.is_empty(),
        if failures.is_empty() {
            "both methods: dim 4 <= 1e-4 in 2000 evals, dims 1-12 <= 1e-3 in 5000 evals; noisy SPSA <= 0.05 in 1e4 evals".into()
        } else {
            failures.join("; ")
        },
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut r = rng(1010);
    let u_path = dir.path().join("u.json");
    cli::write_matrix_file(&u_path, &random::unitary(4, &mut r), None).unwrap();
    let d = ComplexMatrix::diag_real(&[0.6, 0.3, 0.1, 0.0]);
    let w = random::unitary(4, &mut r);
    let rho_path = dir.path().join("rho.json");
    cli::write_matrix_file(&rho_path, &(&(&w * &d) * &w.adjoint()), Some(cli::DENSITY_KIND)).unwrap();

    let mut configs = Vec::new();
    let mut find = RunConfig::new(CommandKind::FindEig, 17);
    find.input = Some(u_path);
    find.optimizer.method = Method::Spsa;
    find.optimizer.max_evals = 1000;
    find.mode = EvalMode::Sampled { shots: 2000 };
    configs.push(find);
    let mut pca = RunConfig::new(CommandKind::Qpca, 18);
    pca.input = Some(rho_path);
    pca.components = 2;
    pca.optimizer.max_evals = 2000;
    pca.optimizer.restarts = 2;
    configs.push(pca);

    let strip = |path: &std::path::Path| {
        let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
        v.as_object_mut().unwrap().remove("timestamp");
        v
    };
    let mut identical = 0;
    for mut c in configs {
        c.out = Some(dir.path().to_path_buf());
        let first = cli::run(&c).unwrap().path.unwrap();
        let second = cli::run(&c).unwrap().path.unwrap();
        if first != second && strip(&first) == strip(&second) {
            identical += 1;
        }
    }
    check(identical == 2, format!("{identical}/2 repeated runs (find-eig sampled, qpca) byte-identical modulo timestamp"))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("SWAP-test law", swap_test_law),
        ("unitary eigenvector finder", unitary_finder),
        ("degenerate QFT", degenerate_qft),
        ("sampled-mode robustness", sampled_robustness),
        ("generalized problem", generalized),
        ("normal matrices", normal_matrices),
        ("principal components", principal_components),
        ("optical identity", optical_identity),
        ("optimizer regression", optimizer_regression),
        ("determinism", determinism),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(f).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {} ({name}) [{secs:.1}s]: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {} ({name}) [{secs:.1}s]: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
