//! End-to-end eigenvector searches: unitary, generalized, normal and
//! principal-component problems, each checked against the dense oracle.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ansatz::{prepare_state, random_init, AnsatzSpec, ParamVector};
use crate::error::{check_dim, Error, Result};
use crate::numerics::{eigenspace_fidelity_with, nearest_eigenvalue, oracle_eigendecompose, ComplexMatrix, C64};
use crate::objectives::{
    objective_value, qpca_deflation_value, to_minimization, EvalMode, MinimizationForm, Problem,
    QpcaProblem, TRACE_FLOOR,
};
use crate::optimizer::{minimize, OptimizationTrace, OptimizerConfig};
use crate::simulator::{expectation_in_state, pure_overlap, DensityMatrix, StateVector};

/// Exact-mode success threshold on the fidelity objective.
pub const EXACT_THRESHOLD: f64 = 1.0 - 1e-3;
/// Eigenvalue distance used to select the oracle eigenspace.
pub const ORACLE_MATCH_TOL: f64 = 0.05;
/// Largest overlap allowed between successive principal components.
pub const ORTHOGONALITY_TOL: f64 = 0.05;
/// Exact-mode optimizer target, as a gap below the maximum of 1.
pub const EXACT_TARGET_GAP: f64 = 1e-10;
/// Eigenvalues of `U_A` closer than this are treated as coincident.
pub const SURROGATE_COLLISION_TOL: f64 = 1e-6;

/// Success threshold for the objective in the given mode:
/// `1 − max(1e-3, 3/√shots)` when sampled.
pub fn success_threshold(mode: EvalMode) -> f64 {
    match mode {
        EvalMode::Exact => EXACT_THRESHOLD,
        EvalMode::Sampled { shots } => 1.0 - (1.0 - EXACT_THRESHOLD).max(3.0 / (shots as f64).sqrt()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigResult {
    pub problem: String,
    pub ansatz: AnsatzSpec,
    pub mode: EvalMode,
    pub theta_star: ParamVector,
    /// Objective at `theta_star` in the run's mode; sampled runs draw a
    /// fresh estimate.
    pub objective_final: f64,
    pub exact_objective: f64,
    /// `⟨ψ|M|ψ⟩` for `M = U` or `M = A`; absent for generalized problems.
    pub rayleigh: Option<C64>,
    /// `‖M|ψ⟩ − λ|ψ⟩‖₂` with `λ = ⟨ψ|M|ψ⟩`.
    pub residual: f64,
    pub oracle_eigenvalue: C64,
    pub oracle_fidelity: f64,
    pub threshold: f64,
    pub converged: bool,
    /// `U_A` merges eigenvalues of `A` that differ only in their imaginary
    /// parts, so convergence does not imply an eigenvector of `A`.
    pub degenerate_surrogate: bool,
    pub seed: u64,
    pub trace: OptimizationTrace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QpcaComponent {
    pub index: usize,
    pub theta: ParamVector,
    /// Exact `tr(ρσ(θ))`.
    pub eigenvalue_estimate: f64,
    pub oracle_eigenvalue: f64,
    pub oracle_fidelity: f64,
    /// The trace estimate hit its floor at `theta`.
    pub saturated: bool,
    pub max_prior_overlap: f64,
    pub orthogonal: bool,
    pub trace: OptimizationTrace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QpcaResult {
    pub ansatz: AnsatzSpec,
    pub mode: EvalMode,
    pub penalty: f64,
    pub seed: u64,
    pub components: Vec<QpcaComponent>,
}

impl QpcaResult {
    /// Every component is orthogonal to its predecessors and unsaturated.
    pub fn is_clean(&self) -> bool {
        self.components.iter().all(|c| c.orthogonal && !c.saturated)
    }
}

/// Independent generator streams for the optimizer and for shot sampling
/// of the `index`-th optimization in a run.
fn streams(seed: u64, index: u64) -> (ChaCha8Rng, ChaCha8Rng) {
    let mut opt = ChaCha8Rng::seed_from_u64(seed);
    opt.set_stream(2 * index);
    let mut obj = ChaCha8Rng::seed_from_u64(seed);
    obj.set_stream(2 * index + 1);
    (opt, obj)
}

fn with_default_target(cfg: &OptimizerConfig, mode: EvalMode) -> OptimizerConfig {
    let mut cfg = cfg.clone();
    if cfg.target_value.is_none() {
        // a sampled estimate of ⟨Z⟩ can reach 1 exactly; stop only there
        cfg.target_value = Some(match mode {
            EvalMode::Exact => -(1.0 - EXACT_TARGET_GAP),
            EvalMode::Sampled { .. } => -1.0,
        });
    }
    cfg
}

/// Exact diagnostics of a candidate eigenvector.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Diagnostics {
    exact_objective: f64,
    rayleigh: C64,
    residual: f64,
    oracle_eigenvalue: C64,
    oracle_fidelity: f64,
}

fn diagnose(problem: &Problem, spec: &AnsatzSpec, theta: &[f64]) -> Result<Diagnostics> {
    let exact_objective = objective_value(problem, spec, theta, EvalMode::Exact, &mut ChaCha8Rng::seed_from_u64(0))?;
    let m = problem.target_matrix();
    let psi = prepare_state(spec, theta)?;
    let v = psi.amplitudes();
    let mv = m.mul_vec(v)?;
    let rayleigh = v.inner(&mv);
    let residual = (&mv - &v.scale(rayleigh)).norm();
    let pairs = oracle_eigendecompose(&m)?;
    // unitary targets have spectra on the unit circle
    let target = match problem {
        Problem::UnitaryEig { .. } | Problem::Generalized { .. } if rayleigh.norm() > 1e-12 => rayleigh / rayleigh.norm(),
        _ => rayleigh,
    };
    let idx = nearest_eigenvalue(&pairs, target).ok_or_else(|| Error::Decomposition("empty spectrum".into()))?;
    let oracle_eigenvalue = pairs[idx].eigenvalue;
    Ok(Diagnostics {
        exact_objective,
        rayleigh,
        residual,
        oracle_eigenvalue,
        oracle_fidelity: eigenspace_fidelity_with(&pairs, v, oracle_eigenvalue, ORACLE_MATCH_TOL),
    })
}

fn degenerate_surrogate(a: &ComplexMatrix) -> Result<bool> {
    let eigs: Vec<C64> = oracle_eigendecompose(a)?.iter().map(|p| p.eigenvalue).collect();
    let mapped: Vec<C64> = eigs.iter().map(|l| C64::new(0.0, 2.0 * l.re).exp()).collect();
    for j in 0..eigs.len() {
        for k in j + 1..eigs.len() {
            if (mapped[j] - mapped[k]).norm() <= SURROGATE_COLLISION_TOL
                && (eigs[j] - eigs[k]).norm() > SURROGATE_COLLISION_TOL
            {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

fn run_eig(problem: &Problem, spec: &AnsatzSpec, cfg: &OptimizerConfig, mode: EvalMode) -> Result<EigResult> {
    run_eig_with(problem, spec, cfg, mode, |theta, rng| objective_value(problem, spec, theta, mode, rng))
}

/// Runs the search with `objective` (to be maximized) standing in for the
/// problem's own SWAP-test objective; diagnostics still use `problem`.
pub(crate) fn run_eig_with<F>(
    problem: &Problem,
    spec: &AnsatzSpec,
    cfg: &OptimizerConfig,
    mode: EvalMode,
    mut objective: F,
) -> Result<EigResult>
where
    F: FnMut(&[f64], &mut ChaCha8Rng) -> Result<f64>,
{
    spec.validate()?;
    mode.validate()?;
    cfg.validate()?;
    check_dim(problem.dim(), spec.dim())?;
    let (mut opt_rng, mut obj_rng) = streams(cfg.seed, 0);
    let theta0 = random_init(spec, &mut opt_rng);
    let run_cfg = with_default_target(cfg, mode);
    let minimized = |theta: &[f64]| match objective(theta, &mut obj_rng) {
        Ok(v) => to_minimization(v, MinimizationForm::Negate).value,
        Err(_) => f64::NAN,
    };
    let (theta_star, trace) = minimize(minimized, &theta0, &run_cfg, &mut opt_rng)?;

    let d = diagnose(problem, spec, &theta_star.0)?;
    let objective_final = match mode {
        EvalMode::Exact => d.exact_objective,
        EvalMode::Sampled { .. } => objective(&theta_star.0, &mut obj_rng)?,
    };
    let threshold = success_threshold(mode);
    let degenerate = match problem {
        Problem::NormalEig { a, .. } => degenerate_surrogate(a)?,
        _ => false,
    };
    Ok(EigResult {
        problem: problem.kind_name().to_string(),
        ansatz: *spec,
        mode,
        theta_star,
        objective_final,
        exact_objective: d.exact_objective,
        rayleigh: match problem {
            Problem::Generalized { .. } => None,
            _ => Some(d.rayleigh),
        },
        residual: d.residual,
        oracle_eigenvalue: d.oracle_eigenvalue,
        oracle_fidelity: d.oracle_fidelity,
        threshold,
        converged: objective_final >= threshold,
        degenerate_surrogate: degenerate,
        seed: cfg.seed,
        trace,
    })
}

/// Variational search for an eigenvector of a unitary `U`.
pub fn find_eigenvector(u: &ComplexMatrix, spec: &AnsatzSpec, cfg: &OptimizerConfig, mode: EvalMode) -> Result<EigResult> {
    let problem = Problem::unitary_eig(u.clone())?;
    check_dim(u.dim(), spec.dim())?;
    run_eig(&problem, spec, cfg, mode)
}

/// Solves `U|e⟩ = λV|e⟩` by maximizing `|⟨ψ|U†V|ψ⟩|²`.
pub fn solve_generalized(
    u: &ComplexMatrix,
    v: &ComplexMatrix,
    spec: &AnsatzSpec,
    cfg: &OptimizerConfig,
    mode: EvalMode,
) -> Result<EigResult> {
    let problem = Problem::generalized(u.clone(), v.clone())?;
    check_dim(u.dim(), spec.dim())?;
    run_eig(&problem, spec, cfg, mode)
}

/// Eigenvector of a normal `A` through the surrogate `U_A = e^{i(A+A†)}`.
/// Rayleigh quotient, residual and oracle fidelity refer to `A` itself.
pub fn find_eigenvector_normal(
    a: &ComplexMatrix,
    spec: &AnsatzSpec,
    cfg: &OptimizerConfig,
    mode: EvalMode,
) -> Result<EigResult> {
    let problem = Problem::normal_eig(a.clone())?;
    check_dim(a.dim(), spec.dim())?;
    run_eig(&problem, spec, cfg, mode)
}

/// Finds the `k` leading principal components of `ρ` one at a time. Each
/// later component minimizes the deflation objective with penalty `penalty`
/// against the components already found.
pub fn qpca(
    rho: &DensityMatrix,
    k: usize,
    spec: &AnsatzSpec,
    cfg: &OptimizerConfig,
    mode: EvalMode,
    penalty: f64,
) -> Result<QpcaResult> {
    spec.validate()?;
    mode.validate()?;
    cfg.validate()?;
    check_dim(rho.dim(), spec.dim())?;
    if k == 0 || k > rho.dim() {
        return Err(Error::Config(format!("components must be in 1..={}, got {k}", rho.dim())));
    }
    let base = QpcaProblem::new(rho.clone(), Vec::new(), penalty)?;
    let oracle = oracle_eigendecompose(rho.matrix())?;
    let run_cfg = cfg.clone();

    let mut components: Vec<QpcaComponent> = Vec::with_capacity(k);
    let mut prior_states: Vec<StateVector> = Vec::new();
    for j in 0..k {
        let (mut opt_rng, mut obj_rng) = streams(cfg.seed, j as u64);
        let theta0 = random_init(spec, &mut opt_rng);
        let q = base.with_priors(components.iter().map(|c| c.theta.clone()).collect());
        let (theta, trace) = if j == 0 {
            let problem = Problem::Qpca(q.clone());
            let objective = |theta: &[f64]| match objective_value(&problem, spec, theta, mode, &mut obj_rng) {
                Ok(v) => -v,
                Err(_) => f64::NAN,
            };
            minimize(objective, &theta0, &run_cfg, &mut opt_rng)?
        } else {
            let objective = |theta: &[f64]| match qpca_deflation_value(&q, spec, theta, mode, &mut obj_rng) {
                Ok(d) => d.value,
                Err(_) => f64::NAN,
            };
            minimize(objective, &theta0, &run_cfg, &mut opt_rng)?
        };

        let psi = prepare_state(spec, &theta.0)?;
        let estimate = expectation_in_state(rho, &psi)?;
        let max_prior_overlap = prior_states
            .iter()
            .map(|p| pure_overlap(&psi, p))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        let oracle_eigenvalue = oracle[j].eigenvalue;
        components.push(QpcaComponent {
            index: j,
            theta,
            eigenvalue_estimate: estimate,
            oracle_eigenvalue: oracle_eigenvalue.re,
            oracle_fidelity: eigenspace_fidelity_with(&oracle, psi.amplitudes(), oracle_eigenvalue, ORACLE_MATCH_TOL),
            saturated: estimate <= TRACE_FLOOR,
            max_prior_overlap,
            orthogonal: max_prior_overlap <= ORTHOGONALITY_TOL,
            trace,
        });
        prior_states.push(psi);
    }
    Ok(QpcaResult {
        ansatz: *spec,
        mode,
        penalty,
        seed: cfg.seed,
        components,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    AtLeast,
    AtMost,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub comparison: Comparison,
    pub passed: bool,
}

impl Check {
    fn new(name: impl Into<String>, value: f64, comparison: Comparison, threshold: f64) -> Self {
        let passed = match comparison {
            Comparison::AtLeast => value >= threshold,
            Comparison::AtMost => value <= threshold,
        };
        Check {
            name: name.into(),
            value,
            threshold,
            comparison,
            passed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl VerificationReport {
    fn from_checks(checks: Vec<Check>) -> Self {
        let passed = checks.iter().all(|c| c.passed);
        VerificationReport { checks, passed }
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Residual bound expected of a converged eigenvector.
pub const VERIFY_RESIDUAL_MAX: f64 = 0.1;
/// Oracle fidelity expected of a converged eigenvector.
pub const VERIFY_FIDELITY_MIN: f64 = 0.95;
/// Allowed drift between a stored exact objective and its replay.
pub const REPLAY_TOL: f64 = 1e-12;

pub enum Verifiable<'a> {
    Eig(&'a EigResult),
    Qpca(&'a QpcaResult),
}

/// Recomputes the exact objective, residual and oracle fidelity of a stored
/// result and scores each against its threshold.
pub fn verify(result: Verifiable<'_>, problem: &Problem) -> Result<VerificationReport> {
    match result {
        Verifiable::Eig(r) => {
            if matches!(problem, Problem::Qpca(_)) {
                return Err(Error::UnsupportedKind(problem.kind_name()));
            }
            let d = diagnose(problem, &r.ansatz, &r.theta_star.0)?;
            let mut checks = vec![
                Check::new("convergence", d.exact_objective, Comparison::AtLeast, EXACT_THRESHOLD),
                Check::new("residual", d.residual, Comparison::AtMost, VERIFY_RESIDUAL_MAX),
                Check::new("oracle_fidelity", d.oracle_fidelity, Comparison::AtLeast, VERIFY_FIDELITY_MIN),
            ];
            if r.mode == EvalMode::Exact {
                checks.push(Check::new(
                    "replay",
                    (d.exact_objective - r.objective_final).abs(),
                    Comparison::AtMost,
                    REPLAY_TOL,
                ));
            }
            Ok(VerificationReport::from_checks(checks))
        }
        Verifiable::Qpca(r) => {
            let Problem::Qpca(q) = problem else {
                return Err(Error::UnsupportedKind(problem.kind_name()));
            };
            let rho = q.rho();
            check_dim(rho.dim(), r.ansatz.dim())?;
            let oracle = oracle_eigendecompose(rho.matrix())?;
            let lambda_max = oracle[0].eigenvalue.re;
            let mut checks = Vec::new();
            let mut states: Vec<StateVector> = Vec::new();
            for c in &r.components {
                let psi = prepare_state(&r.ansatz, &c.theta.0)?;
                let estimate = expectation_in_state(rho, &psi)?;
                let j = c.index.min(oracle.len() - 1);
                let fidelity =
                    eigenspace_fidelity_with(&oracle, psi.amplitudes(), oracle[j].eigenvalue, ORACLE_MATCH_TOL);
                let overlap = states
                    .iter()
                    .map(|p| pure_overlap(&psi, p))
                    .collect::<Result<Vec<_>>>()?
                    .into_iter()
                    .fold(0.0, f64::max);
                let i = c.index + 1;
                checks.push(Check::new(
                    format!("component_{i}_replay"),
                    (estimate - c.eigenvalue_estimate).abs(),
                    Comparison::AtMost,
                    REPLAY_TOL,
                ));
                checks.push(Check::new(
                    format!("component_{i}_bound"),
                    estimate - lambda_max,
                    Comparison::AtMost,
                    1e-10,
                ));
                checks.push(Check::new(
                    format!("component_{i}_oracle_fidelity"),
                    fidelity,
                    Comparison::AtLeast,
                    VERIFY_FIDELITY_MIN,
                ));
                checks.push(Check::new(
                    format!("component_{i}_orthogonality"),
                    overlap,
                    Comparison::AtMost,
                    ORTHOGONALITY_TOL,
                ));
                states.push(psi);
            }
            Ok(VerificationReport::from_checks(checks))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::Entangler;
    use crate::numerics::{random, ComplexMatrix};
    use crate::optimizer::Method;

    fn cfg(seed: u64) -> OptimizerConfig {
        OptimizerConfig {
            max_evals: 4000,
            restarts: 5,
            seed,
            ..OptimizerConfig::default()
        }
    }

    fn spec(n: usize) -> AnsatzSpec {
        AnsatzSpec::with_default_depth(n).unwrap()
    }

    fn diag_real(values: &[f64]) -> ComplexMatrix {
        ComplexMatrix::diag_real(values)
    }

    #[test]
    fn identity_converges_at_start() {
        let r = find_eigenvector(&ComplexMatrix::identity(4), &spec(2), &cfg(1), EvalMode::Exact).unwrap();
        assert!(r.converged);
        assert!((r.objective_final - 1.0).abs() < 1e-12);
        assert_eq!(r.trace.n_evals, 1);
        assert!((r.oracle_fidelity - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_unitary_reaches_oracle_eigenvector() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let u = random::unitary(4, &mut rng);
        let r = find_eigenvector(&u, &spec(2), &cfg(2), EvalMode::Exact).unwrap();
        assert!(r.converged, "{}", r.objective_final);
        assert!(r.oracle_fidelity >= 0.99);
        assert!(r.residual <= 0.05);
        // ‖Uψ − λψ‖² = 1 − |λ|² for unitary U
        assert!((r.residual.powi(2) - (1.0 - r.exact_objective)).abs() < 1e-9);
    }

    #[test]
    fn theta_star_replays_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let u = random::unitary(4, &mut rng);
        let s = spec(2);
        let r = find_eigenvector(&u, &s, &cfg(3), EvalMode::Exact).unwrap();
        let p = Problem::unitary_eig(u).unwrap();
        let again = objective_value(&p, &s, &r.theta_star.0, EvalMode::Exact, &mut rng).unwrap();
        assert!((again - r.objective_final).abs() <= 1e-12);
        let report = verify(Verifiable::Eig(&r), &p).unwrap();
        assert!(report.passed, "{report:?}");
    }

    #[test]
    fn perturbed_solution_fails_verification() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let u = random::unitary(4, &mut rng);
        let s = spec(2);
        let mut r = find_eigenvector(&u, &s, &cfg(4), EvalMode::Exact).unwrap();
        assert!(r.converged);
        for x in r.theta_star.0.iter_mut() {
            *x += 0.5;
        }
        let report = verify(Verifiable::Eig(&r), &Problem::unitary_eig(u).unwrap()).unwrap();
        let conv = report.check("convergence").unwrap();
        assert!(conv.value < EXACT_THRESHOLD);
        assert!(!conv.passed && !report.passed);
    }

    #[test]
    fn non_unitary_and_mismatched_inputs_are_rejected() {
        let bad = diag_real(&[1.0, 2.0]);
        assert_eq!(find_eigenvector(&bad, &spec(1), &cfg(0), EvalMode::Exact).unwrap_err().kind(), "not_unitary");
        let err = find_eigenvector(&ComplexMatrix::identity(4), &spec(1), &cfg(0), EvalMode::Exact).unwrap_err();
        assert_eq!(err.kind(), "dimension_mismatch");
        let nilpotent = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        let err = find_eigenvector_normal(&nilpotent, &spec(1), &cfg(0), EvalMode::Exact).unwrap_err();
        assert_eq!(err.kind(), "not_normal");
    }

    #[test]
    fn generalized_with_equal_pair_is_trivial() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        let u = random::unitary(4, &mut rng);
        let r = solve_generalized(&u, &u, &spec(2), &cfg(5), EvalMode::Exact).unwrap();
        assert!(r.converged && r.rayleigh.is_none());
        assert!((r.objective_final - 1.0).abs() < 1e-9);
    }

    #[test]
    fn generalized_z_against_identity_finds_z_eigenvector() {
        let z = diag_real(&[1.0, 1.0, -1.0, -1.0]);
        let r = solve_generalized(&z, &ComplexMatrix::identity(4), &spec(2), &cfg(6), EvalMode::Exact).unwrap();
        assert!(r.converged);
        assert!(r.oracle_fidelity >= 0.999);
    }

    #[test]
    fn generalized_random_pair_matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        let u = random::unitary(4, &mut rng);
        let v = random::unitary(4, &mut rng);
        let r = solve_generalized(&u, &v, &spec(2), &cfg(7), EvalMode::Exact).unwrap();
        assert!(r.converged && r.oracle_fidelity >= 0.99, "{} {}", r.objective_final, r.oracle_fidelity);
    }

    #[test]
    fn hermitian_diagonal_normal_case() {
        let a = diag_real(&[3.0, 1.0]);
        let r = find_eigenvector_normal(&a, &spec(1), &cfg(8), EvalMode::Exact).unwrap();
        assert!(r.converged && !r.degenerate_surrogate);
        let lambda = r.rayleigh.unwrap();
        assert!((lambda - C64::new(3.0, 0.0)).norm() < 1e-3 || (lambda - C64::new(1.0, 0.0)).norm() < 1e-3);
    }

    #[test]
    fn anti_hermitian_surrogate_is_flagged() {
        let iz = ComplexMatrix::diag(&[C64::new(0.0, 1.0), C64::new(0.0, -1.0)]);
        let r = find_eigenvector_normal(&iz, &spec(1), &cfg(9), EvalMode::Exact).unwrap();
        assert!(r.converged);
        assert!((r.objective_final - 1.0).abs() < 1e-12);
        assert!(r.degenerate_surrogate);
    }

    #[test]
    fn random_normal_matrix_matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(36);
        let eigs = [C64::new(1.1, 0.3), C64::new(0.4, -0.8), C64::new(-0.3, 0.5), C64::new(-1.0, -0.2)];
        let a = random::normal_with_spectrum(&eigs, &mut rng);
        let r = find_eigenvector_normal(&a, &spec(2), &cfg(10), EvalMode::Exact).unwrap();
        assert!(r.converged && r.oracle_fidelity >= 0.99, "{r:?}");
        assert!(!r.degenerate_surrogate);
    }

    #[test]
    fn sampled_threshold_follows_shot_noise() {
        assert_eq!(success_threshold(EvalMode::Exact), 1.0 - 1e-3);
        assert!((success_threshold(EvalMode::Sampled { shots: 10_000 }) - 0.97).abs() < 1e-12);
        assert!((success_threshold(EvalMode::Sampled { shots: 100_000_000 }) - 0.999).abs() < 1e-12);
    }

    #[test]
    fn sampled_spsa_run_improves_exact_objective() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let u = random::unitary(2, &mut rng);
        let c = OptimizerConfig {
            method: Method::Spsa,
            max_evals: 2000,
            restarts: 2,
            seed: 11,
            ..OptimizerConfig::default()
        };
        let r = find_eigenvector(&u, &spec(1), &c, EvalMode::Sampled { shots: 2000 }).unwrap();
        assert!(r.exact_objective >= 0.9, "{}", r.exact_objective);
    }

    #[test]
    fn pure_state_qpca() {
        let rho = DensityMatrix::from_pure(&StateVector::zero(1));
        let r = qpca(&rho, 1, &spec(1), &cfg(12), EvalMode::Exact, 100.0).unwrap();
        assert!(r.components[0].eigenvalue_estimate >= 0.999);
        assert!(r.components[0].oracle_fidelity >= 0.999);
    }

    #[test]
    fn maximally_mixed_qpca_is_flat() {
        let rho = DensityMatrix::maximally_mixed(2);
        let r = qpca(&rho, 1, &spec(2), &cfg(13), EvalMode::Exact, 100.0).unwrap();
        assert!((r.components[0].eigenvalue_estimate - 0.25).abs() < 0.02);
    }

    #[test]
    fn diagonal_qpca_finds_two_components() {
        let rho = DensityMatrix::new(diag_real(&[0.7, 0.2, 0.1, 0.0])).unwrap();
        let r = qpca(&rho, 2, &spec(2), &cfg(14), EvalMode::Exact, 100.0).unwrap();
        assert_eq!(r.components.len(), 2);
        assert!((r.components[0].eigenvalue_estimate - 0.7).abs() < 0.02);
        assert!((r.components[1].eigenvalue_estimate - 0.2).abs() < 0.02);
        assert!(r.components[1].orthogonal && r.is_clean());
        let q = Problem::qpca(rho, Vec::new(), 100.0).unwrap();
        assert!(verify(Verifiable::Qpca(&r), &q).unwrap().passed);
    }

    #[test]
    fn qpca_principal_fidelity_against_oracle() {
        let rho = DensityMatrix::new(diag_real(&[0.7, 0.3])).unwrap();
        let r = qpca(&rho, 1, &spec(1), &cfg(15), EvalMode::Exact, 100.0).unwrap();
        let q = Problem::qpca(rho, Vec::new(), 100.0).unwrap();
        let report = verify(Verifiable::Qpca(&r), &q).unwrap();
        assert!(report.check("component_1_oracle_fidelity").unwrap().value >= 0.999);
    }

    #[test]
    fn qpca_rejects_bad_component_count() {
        let rho = DensityMatrix::maximally_mixed(1);
        assert!(qpca(&rho, 0, &spec(1), &cfg(0), EvalMode::Exact, 100.0).is_err());
        assert!(qpca(&rho, 3, &spec(1), &cfg(0), EvalMode::Exact, 100.0).is_err());
    }

    #[test]
    fn runs_are_seed_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(38);
        let u = random::unitary(4, &mut rng);
        let s = AnsatzSpec::new(2, 2, Entangler::Ring).unwrap();
        let a = find_eigenvector(&u, &s, &cfg(40), EvalMode::Sampled { shots: 500 }).unwrap();
        let b = find_eigenvector(&u, &s, &cfg(40), EvalMode::Sampled { shots: 500 }).unwrap();
        assert_eq!(a, b);
    }
}
