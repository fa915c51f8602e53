//! SWAP tests: the ancilla-based full test, the ancilla-free destructive
//! test and the mixed-state test against a density matrix.
//!
//! Register layout for two `n`-qubit inputs `a` and `b`: `a` occupies
//! qubits `0..n`, `b` qubits `n..2n`; the full test prepends its ancilla as
//! qubit 0. The destructive test pairs `a_i` with `b_i`, applies
//! `CNOT(b_i → a_i)` then `H(b_i)`, measures every qubit and passes when the
//! bitwise AND of the two result strings has even parity.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Result};
use crate::simulator::{
    pure_overlap, run_circuit, sample_counts, Circuit, DensityMatrix, Gate, MixtureSampler, StateVector,
};

/// Pass/fail counts and derived estimates of `P(0)`, `P(1)` and `⟨Z⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestStats {
    pub shots: u64,
    pub passes: u64,
    pub fails: u64,
    pub p0_hat: f64,
    pub p1_hat: f64,
    pub z_hat: f64,
    /// Binomial standard error of `p0_hat`.
    pub p0_stderr: f64,
    /// Standard error of `z_hat` (twice that of `p0_hat`).
    pub z_stderr: f64,
}

impl TestStats {
    pub fn from_counts(passes: u64, shots: u64) -> Self {
        assert!(shots > 0 && passes <= shots, "invalid counts {passes}/{shots}");
        let p0 = passes as f64 / shots as f64;
        let p1 = 1.0 - p0;
        let se = (p0 * p1 / shots as f64).sqrt();
        TestStats {
            shots,
            passes,
            fails: shots - passes,
            p0_hat: p0,
            p1_hat: p1,
            z_hat: p0 - p1,
            p0_stderr: se,
            z_stderr: 2.0 * se,
        }
    }
}

/// `(1 + |⟨a|b⟩|²)/2`.
pub fn exact_pass_probability(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok((1.0 + pure_overlap(a, b)?) / 2.0)
}

/// `(1 + tr(ρσ))/2` for `σ = |s⟩⟨s|`.
pub fn exact_mixed_pass_probability(rho: &DensityMatrix, sigma: &StateVector) -> Result<f64> {
    Ok((1.0 + crate::simulator::expectation_in_state(rho, sigma)?) / 2.0)
}

/// Ancilla `P(0)` of the full test circuit: `H`, controlled swaps of every
/// qubit pair, `H`, computed from the simulated output state.
pub fn full_test_pass_probability(a: &StateVector, b: &StateVector) -> Result<f64> {
    check_dim(a.n_qubits(), b.n_qubits())?;
    let n = a.n_qubits();
    let joint = StateVector::zero(1).tensor(a).tensor(b);
    let mut c = Circuit::new(2 * n + 1);
    c.push(Gate::h(0));
    for i in 0..n {
        c.push(Gate::cswap(0, 1 + i, 1 + n + i));
    }
    c.push(Gate::h(0));
    let out = run_circuit(&c, &joint)?;
    let half = out.dim() / 2;
    Ok(out.probabilities()[..half].iter().sum::<f64>().clamp(0.0, 1.0))
}

/// Simulates the full test circuit and draws `shots` ancilla measurements.
pub fn full_swap_test<R: Rng + ?Sized>(a: &StateVector, b: &StateVector, shots: u64, rng: &mut R) -> Result<TestStats> {
    let p0 = full_test_pass_probability(a, b)?;
    Ok(TestStats::from_counts(bernoulli_count(p0, shots, rng), shots))
}

fn bernoulli_count<R: Rng + ?Sized>(p: f64, shots: u64, rng: &mut R) -> u64 {
    let p = p.clamp(0.0, 1.0);
    if p >= 1.0 {
        shots
    } else if p <= 0.0 {
        0
    } else {
        Binomial::new(shots, p).expect("valid binomial").sample(rng)
    }
}

/// Whether a joint outcome index of the destructive circuit is a pass.
pub fn destructive_outcome_passes(outcome: usize, n_qubits: usize) -> bool {
    let mask = (1usize << n_qubits) - 1;
    let a_bits = outcome >> n_qubits;
    let b_bits = outcome & mask;
    (a_bits & b_bits).count_ones().is_multiple_of(2)
}

/// Exact distribution over all `4^n` joint outcomes of the destructive circuit.
pub fn destructive_outcome_distribution(a: &StateVector, b: &StateVector) -> Result<Vec<f64>> {
    check_dim(a.n_qubits(), b.n_qubits())?;
    let n = a.n_qubits();
    let joint = a.tensor(b);
    let mut c = Circuit::new(2 * n);
    for i in 0..n {
        c.push(Gate::cnot(n + i, i));
        c.push(Gate::h(n + i));
    }
    Ok(run_circuit(&c, &joint)?.probabilities())
}

/// Pass probability of the destructive circuit, summed over outcomes with
/// even AND-parity.
pub fn destructive_pass_probability(a: &StateVector, b: &StateVector) -> Result<f64> {
    let n = a.n_qubits();
    let dist = destructive_outcome_distribution(a, b)?;
    Ok(dist
        .iter()
        .enumerate()
        .filter(|&(k, _)| destructive_outcome_passes(k, n))
        .map(|(_, p)| p)
        .sum::<f64>()
        .clamp(0.0, 1.0))
}

fn passes_from_counts(counts: &[u64], n_qubits: usize) -> u64 {
    counts
        .iter()
        .enumerate()
        .filter(|&(k, _)| destructive_outcome_passes(k, n_qubits))
        .map(|(_, c)| c)
        .sum()
}

/// Runs the destructive test `shots` times, measuring all `2n` qubits per shot.
pub fn destructive_swap_test<R: Rng + ?Sized>(
    a: &StateVector,
    b: &StateVector,
    shots: u64,
    rng: &mut R,
) -> Result<TestStats> {
    let dist = destructive_outcome_distribution(a, b)?;
    let counts = sample_counts(&dist, shots, rng);
    Ok(TestStats::from_counts(passes_from_counts(&counts, a.n_qubits()), shots))
}

/// Destructive tests of copies of a mixed state against a fixed pure state.
///
/// Every shot draws an eigenvector of `ρ` with probability equal to its
/// eigenvalue and runs one destructive shot against `σ`.
#[derive(Debug, Clone)]
pub struct MixedSwapTester {
    sampler: MixtureSampler,
}

impl MixedSwapTester {
    pub fn new(rho: &DensityMatrix) -> Result<Self> {
        Ok(MixedSwapTester {
            sampler: MixtureSampler::new(rho)?,
        })
    }

    pub fn sampler(&self) -> &MixtureSampler {
        &self.sampler
    }

    pub fn run<R: Rng + ?Sized>(&self, sigma: &StateVector, shots: u64, rng: &mut R) -> Result<TestStats> {
        let states = self.sampler.states();
        check_dim(states[0].n_qubits(), sigma.n_qubits())?;
        let per_component = sample_counts(self.sampler.weights(), shots, rng);
        let mut passes = 0;
        for (state, &k) in states.iter().zip(&per_component) {
            if k == 0 {
                continue;
            }
            let dist = destructive_outcome_distribution(state, sigma)?;
            let counts = sample_counts(&dist, k, rng);
            passes += passes_from_counts(&counts, sigma.n_qubits());
        }
        Ok(TestStats::from_counts(passes, shots))
    }
}

/// One-shot convenience wrapper around [`MixedSwapTester`].
pub fn mixed_swap_test<R: Rng + ?Sized>(
    rho: &DensityMatrix,
    sigma: &StateVector,
    shots: u64,
    rng: &mut R,
) -> Result<TestStats> {
    MixedSwapTester::new(rho)?.run(sigma, shots, rng)
}
