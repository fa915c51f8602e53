//! Linear-optics analogue of the SWAP test. Two photons meeting on a
//! balanced beamsplitter produce a coincidence with probability
//! `(1 − tr(ρσ))/2`, the failure probability of the SWAP test. A single
//! photon spread over `d` time bins is a qudit evolved directly by the
//! scattering matrix of the interferometer.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::ansatz::{prepare_state, AnsatzSpec};
use crate::drivers::{run_eig_with, EigResult};
use crate::error::{check_dim, Error, Result};
use crate::numerics::{ensure_unitary, ComplexMatrix, ComplexVector, DEFAULT_TOL};
use crate::objectives::{EvalMode, Problem};
use crate::optimizer::OptimizerConfig;
use crate::simulator::{mixed_overlap, qubits_for_dim, DensityMatrix, StateVector, STATE_TOL};
use crate::swaptest::TestStats;

/// One photon over `d` orthogonal modes, `d` a power of two.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuditState {
    dim: usize,
    amplitudes: ComplexVector,
}

impl QuditState {
    pub fn new(amplitudes: ComplexVector) -> Result<Self> {
        let state = StateVector::from_amplitudes(amplitudes)?;
        Ok(Self::from_state(&state))
    }

    /// Photon in time bin `index`.
    pub fn bin(dim: usize, index: usize) -> Result<Self> {
        qubits_for_dim(dim)?;
        if index >= dim {
            return Err(Error::Dimension {
                expected: dim,
                found: index,
            });
        }
        Self::new(ComplexVector::basis(dim, index))
    }

    pub fn from_state(state: &StateVector) -> Self {
        QuditState {
            dim: state.dim(),
            amplitudes: state.amplitudes().clone(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn amplitudes(&self) -> &ComplexVector {
        &self.amplitudes
    }

    /// The same amplitudes on `log₂ d` qubits.
    pub fn to_state_vector(&self) -> StateVector {
        StateVector::from_amplitudes(self.amplitudes.clone()).expect("qudit invariants hold")
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(&self.to_state_vector())
    }
}

/// `(1 − tr(ρσ))/2`.
pub fn coincidence_probability(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_dim(rho.dim(), sigma.dim())?;
    Ok(((1.0 - mixed_overlap(rho, sigma)?) / 2.0).clamp(0.0, 0.5))
}

/// Counts coincidences over `shots` photon pairs. A coincidence is a failed
/// SWAP test, so `fails` holds the coincidence count.
pub fn sample_coincidences<R: Rng + ?Sized>(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    shots: u64,
    rng: &mut R,
) -> Result<TestStats> {
    if shots == 0 {
        return Err(Error::Config("shots must be at least 1".into()));
    }
    let p = coincidence_probability(rho, sigma)?;
    let coincidences = Binomial::new(shots, p).expect("probability in [0, 1/2]").sample(rng);
    Ok(TestStats::from_counts(shots - coincidences, shots))
}

/// `S|ψ⟩` for a single photon.
pub fn photon_evolution(s: &ComplexMatrix, psi: &QuditState) -> Result<QuditState> {
    ensure_unitary(s, DEFAULT_TOL)?;
    check_dim(s.dim(), psi.dim)?;
    let out = s.mul_vec(&psi.amplitudes)?;
    let norm = out.norm();
    let out = if (norm - 1.0).abs() > STATE_TOL { out.normalized() } else { out };
    Ok(QuditState {
        dim: psi.dim,
        amplitudes: out,
    })
}

/// `1 − 2·P_C` between the trial photon `ψ(θ)` and its scattered copy
/// `S|ψ(θ)⟩`: exact, or from the observed coincidence rate.
pub fn coincidence_objective<R: Rng + ?Sized>(
    s: &ComplexMatrix,
    spec: &AnsatzSpec,
    theta: &[f64],
    mode: EvalMode,
    rng: &mut R,
) -> Result<f64> {
    mode.validate()?;
    check_dim(s.dim(), spec.dim())?;
    let psi = QuditState::from_state(&prepare_state(spec, theta)?);
    let scattered = photon_evolution(s, &psi)?;
    let (rho, sigma) = (psi.density(), scattered.density());
    let rate = match mode {
        EvalMode::Exact => coincidence_probability(&rho, &sigma)?,
        EvalMode::Sampled { shots } => sample_coincidences(&rho, &sigma, shots, rng)?.p1_hat,
    };
    Ok(1.0 - 2.0 * rate)
}

/// Eigenvector search for the scattering matrix `S` driven by two-photon
/// coincidence counts.
pub fn find_eigenvector_optical(
    s: &ComplexMatrix,
    spec: &AnsatzSpec,
    cfg: &OptimizerConfig,
    mode: EvalMode,
) -> Result<EigResult> {
    let problem = Problem::unitary_eig(s.clone())?;
    check_dim(s.dim(), spec.dim())?;
    run_eig_with(&problem, spec, cfg, mode, |theta, rng| coincidence_objective(s, spec, theta, mode, rng))
}
