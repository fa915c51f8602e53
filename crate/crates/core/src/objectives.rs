//! Objective functions built from SWAP-test statistics, evaluated exactly
//! or from sampled shots.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ansatz::{prepare_state, AnsatzSpec, ParamVector};
use crate::error::{check_dim, Error, Result};
use crate::numerics::{self, ComplexMatrix, C64, DEFAULT_TOL};
use crate::simulator::{expectation_in_state, DensityMatrix, StateVector};
use crate::swaptest::{destructive_swap_test, MixedSwapTester};

/// Lower clamp on the estimated `tr(ρσ)` in the deflation objective.
pub const TRACE_FLOOR: f64 = 1e-6;
/// Smallest magnitude accepted by the reciprocal transform.
pub const RECIPROCAL_GUARD: f64 = 1e-9;
/// Magnitude returned by the reciprocal transform inside the guard band.
pub const RECIPROCAL_SATURATION: f64 = 1e9;
pub const DEFAULT_PENALTY: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum EvalMode {
    #[default]
    Exact,
    Sampled { shots: u64 },
}

impl EvalMode {
    pub fn validate(&self) -> Result<()> {
        match self {
            EvalMode::Sampled { shots: 0 } => Err(Error::Config("shots must be at least 1".into())),
            _ => Ok(()),
        }
    }
}

/// Mixed state plus the components already found, for successive QPCA.
#[derive(Debug, Clone)]
pub struct QpcaProblem {
    rho: DensityMatrix,
    tester: MixedSwapTester,
    pub priors: Vec<ParamVector>,
    pub penalty: f64,
}

impl QpcaProblem {
    pub fn new(rho: DensityMatrix, priors: Vec<ParamVector>, penalty: f64) -> Result<Self> {
        if !(penalty >= 0.0 && penalty.is_finite()) {
            return Err(Error::Config(format!("penalty must be finite and non-negative, got {penalty}")));
        }
        let tester = MixedSwapTester::new(&rho)?;
        Ok(QpcaProblem {
            rho,
            tester,
            priors,
            penalty,
        })
    }

    pub fn rho(&self) -> &DensityMatrix {
        &self.rho
    }

    pub fn with_priors(&self, priors: Vec<ParamVector>) -> Self {
        QpcaProblem {
            priors,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone)]
pub enum Problem {
    UnitaryEig { u: ComplexMatrix },
    Generalized { u: ComplexMatrix, v: ComplexMatrix },
    /// `u_a = e^{i(A+A†)}` is precomputed from `a`.
    NormalEig { a: ComplexMatrix, u_a: ComplexMatrix },
    Qpca(QpcaProblem),
}

impl Problem {
    pub fn unitary_eig(u: ComplexMatrix) -> Result<Self> {
        numerics::ensure_unitary(&u, DEFAULT_TOL)?;
        Ok(Problem::UnitaryEig { u })
    }

    pub fn generalized(u: ComplexMatrix, v: ComplexMatrix) -> Result<Self> {
        check_dim(u.dim(), v.dim())?;
        numerics::ensure_unitary(&u, DEFAULT_TOL)?;
        numerics::ensure_unitary(&v, DEFAULT_TOL)?;
        Ok(Problem::Generalized { u, v })
    }

    pub fn normal_eig(a: ComplexMatrix) -> Result<Self> {
        numerics::ensure_normal(&a, DEFAULT_TOL)?;
        let u_a = numerics::unitary_from_hermitian(&numerics::hermitize(&a))?;
        Ok(Problem::NormalEig { a, u_a })
    }

    pub fn qpca(rho: DensityMatrix, priors: Vec<ParamVector>, penalty: f64) -> Result<Self> {
        Ok(Problem::Qpca(QpcaProblem::new(rho, priors, penalty)?))
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Problem::UnitaryEig { .. } => "unitary_eig",
            Problem::Generalized { .. } => "generalized",
            Problem::NormalEig { .. } => "normal_eig",
            Problem::Qpca(_) => "qpca",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Problem::UnitaryEig { u } | Problem::Generalized { u, .. } => u.dim(),
            Problem::NormalEig { a, .. } => a.dim(),
            Problem::Qpca(q) => q.rho.dim(),
        }
    }

    /// The matrix whose eigenvectors the problem targets: `U`, `U†V`, `A`
    /// or `ρ`.
    pub fn target_matrix(&self) -> ComplexMatrix {
        match self {
            Problem::UnitaryEig { u } => u.clone(),
            Problem::Generalized { u, v } => &u.adjoint() * v,
            Problem::NormalEig { a, .. } => a.clone(),
            Problem::Qpca(q) => q.rho.matrix().clone(),
        }
    }
}

fn trial_state(problem: &Problem, spec: &AnsatzSpec, theta: &[f64]) -> Result<StateVector> {
    check_dim(problem.dim(), spec.dim())?;
    prepare_state(spec, theta)
}

/// Fidelity objective `f(θ)`.
///
/// Exact values lie in `[0, 1]`; sampled values are `⟨Z⟩` estimates in `[−1, 1]`.
pub fn objective_value<R: Rng + ?Sized>(
    problem: &Problem,
    spec: &AnsatzSpec,
    theta: &[f64],
    mode: EvalMode,
    rng: &mut R,
) -> Result<f64> {
    mode.validate()?;
    let psi = trial_state(problem, spec, theta)?;
    match problem {
        Problem::UnitaryEig { u } | Problem::NormalEig { u_a: u, .. } => {
            let u_psi = psi.apply_matrix(u)?;
            compare_pure(&u_psi, &psi, mode, rng)
        }
        Problem::Generalized { u, v } => {
            let u_psi = psi.apply_matrix(u)?;
            let v_psi = psi.apply_matrix(v)?;
            compare_pure(&u_psi, &v_psi, mode, rng)
        }
        Problem::Qpca(q) => trace_estimate(q, &psi, mode, rng),
    }
}

fn compare_pure<R: Rng + ?Sized>(a: &StateVector, b: &StateVector, mode: EvalMode, rng: &mut R) -> Result<f64> {
    match mode {
        EvalMode::Exact => crate::simulator::pure_overlap(a, b),
        EvalMode::Sampled { shots } => Ok(destructive_swap_test(a, b, shots, rng)?.z_hat),
    }
}

fn trace_estimate<R: Rng + ?Sized>(q: &QpcaProblem, psi: &StateVector, mode: EvalMode, rng: &mut R) -> Result<f64> {
    match mode {
        EvalMode::Exact => expectation_in_state(&q.rho, psi),
        EvalMode::Sampled { shots } => Ok(q.tester.run(psi, shots, rng)?.z_hat),
    }
}

/// Value of the deflation objective and its parts.
#[derive(Debug, Clone, PartialEq)]
pub struct DeflationValue {
    pub value: f64,
    pub trace_estimate: f64,
    pub overlaps: Vec<f64>,
    /// The trace estimate fell to the floor.
    pub saturated: bool,
}

/// `1/max(t̂, floor) + C·Σ_j |⟨ψ(θ)|ψ(θ_j)⟩|²` over the prior components.
pub fn qpca_deflation_value<R: Rng + ?Sized>(
    q: &QpcaProblem,
    spec: &AnsatzSpec,
    theta: &[f64],
    mode: EvalMode,
    rng: &mut R,
) -> Result<DeflationValue> {
    mode.validate()?;
    check_dim(q.rho.dim(), spec.dim())?;
    let psi = prepare_state(spec, theta)?;
    let t = trace_estimate(q, &psi, mode, rng)?;
    let saturated = t <= TRACE_FLOOR;
    let mut overlaps = Vec::with_capacity(q.priors.len());
    for prior in &q.priors {
        let prior_state = prepare_state(spec, &prior.0)?;
        overlaps.push(compare_pure(&psi, &prior_state, mode, rng)?);
    }
    let value = 1.0 / t.max(TRACE_FLOOR) + q.penalty * overlaps.iter().sum::<f64>();
    Ok(DeflationValue {
        value,
        trace_estimate: t,
        overlaps,
        saturated,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MinimizationForm {
    /// `−f`, i.e. `P(1) − P(0)`.
    #[default]
    Negate,
    /// `1/f`, i.e. `1/(P(0) − P(1))`.
    Reciprocal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimized {
    pub value: f64,
    pub saturated: bool,
}

pub fn to_minimization(value: f64, form: MinimizationForm) -> Minimized {
    match form {
        MinimizationForm::Negate => Minimized {
            value: -value,
            saturated: false,
        },
        MinimizationForm::Reciprocal => {
            if value.abs() <= RECIPROCAL_GUARD {
                let sign = if value < 0.0 { -1.0 } else { 1.0 };
                Minimized {
                    value: sign * RECIPROCAL_SATURATION,
                    saturated: true,
                }
            } else {
                Minimized {
                    value: 1.0 / value,
                    saturated: false,
                }
            }
        }
    }
}

/// `⟨ψ(θ)|M|ψ(θ)⟩` with `M = U` or `M = A`.
pub fn rayleigh_quotient(problem: &Problem, spec: &AnsatzSpec, theta: &[f64]) -> Result<C64> {
    let m = match problem {
        Problem::UnitaryEig { u } => u,
        Problem::NormalEig { a, .. } => a,
        other => return Err(Error::UnsupportedKind(other.kind_name())),
    };
    let psi = trial_state(problem, spec, theta)?;
    Ok(psi.amplitudes().inner(&m.mul_vec(psi.amplitudes())?))
}
