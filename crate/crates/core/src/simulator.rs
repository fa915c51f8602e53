//! Statevector and density-matrix simulation.
//!
//! Qubit 0 is the most significant bit of the basis index: on three qubits,
//! basis index `0b100` is `|1⟩|0⟩|0⟩` and its bitstring reads `"100"`.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{check_dim, Error, Result};
use crate::numerics::{self, oracle, ComplexMatrix, ComplexVector, C64, ONE, ZERO};

/// Largest supported statevector register.
pub const MAX_STATE_QUBITS: usize = 24;
/// Largest supported density-matrix register.
pub const MAX_DENSITY_QUBITS: usize = 8;
/// Norm, Hermiticity, trace and positivity tolerance for states.
pub const STATE_TOL: f64 = 1e-10;

/// Pure state of `n_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: ComplexVector,
}

impl StateVector {
    /// `|0…0⟩`.
    pub fn zero(n_qubits: usize) -> Self {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Self {
        StateVector {
            n_qubits,
            amps: ComplexVector::basis(1 << n_qubits, index),
        }
    }

    /// Wraps amplitudes whose length is a power of two and whose norm is one.
    pub fn from_amplitudes(amps: ComplexVector) -> Result<Self> {
        let n_qubits = qubits_for_dim(amps.dim())?;
        if n_qubits > MAX_STATE_QUBITS {
            return Err(Error::Config(format!("{n_qubits} qubits exceeds the {MAX_STATE_QUBITS}-qubit limit")));
        }
        if !amps.is_finite() {
            return Err(Error::NonFinite);
        }
        let norm = amps.norm();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::Config(format!("state norm {norm} differs from 1")));
        }
        Ok(StateVector { n_qubits, amps })
    }

    /// Normalizes arbitrary nonzero amplitudes.
    pub fn from_unnormalized(amps: ComplexVector) -> Result<Self> {
        if amps.norm() == 0.0 {
            return Err(Error::Config("zero vector cannot be a state".into()));
        }
        Self::from_amplitudes(amps.normalized())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.dim()
    }

    pub fn amplitudes(&self) -> &ComplexVector {
        &self.amps
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|z| z.norm_sqr()).collect()
    }

    /// Tensor product with `self` on the leading qubits.
    pub fn tensor(&self, other: &StateVector) -> StateVector {
        StateVector {
            n_qubits: self.n_qubits + other.n_qubits,
            amps: self.amps.kron(&other.amps),
        }
    }

    pub fn with_global_phase(&self, phase: f64) -> StateVector {
        StateVector {
            n_qubits: self.n_qubits,
            amps: self.amps.scale(C64::from_polar(1.0, phase)),
        }
    }

    /// Applies a dense matrix to the whole register and renormalizes away
    /// round-off drift.
    pub fn apply_matrix(&self, m: &ComplexMatrix) -> Result<StateVector> {
        let out = m.mul_vec(&self.amps)?;
        Ok(StateVector {
            n_qubits: self.n_qubits,
            amps: renormalize(out),
        })
    }

    fn bit(&self, qubit: usize) -> usize {
        1 << (self.n_qubits - 1 - qubit)
    }

    fn apply_single(&mut self, qubit: usize, m: [[C64; 2]; 2], control_mask: usize) {
        let stride = self.bit(qubit);
        let amps = self.amps.as_mut_slice();
        for i in 0..amps.len() {
            if i & stride != 0 || i & control_mask != control_mask {
                continue;
            }
            let j = i | stride;
            let (a, b) = (amps[i], amps[j]);
            amps[i] = m[0][0] * a + m[0][1] * b;
            amps[j] = m[1][0] * a + m[1][1] * b;
        }
    }

    fn apply_cswap(&mut self, control: usize, a: usize, b: usize) {
        let (c, ba, bb) = (self.bit(control), self.bit(a), self.bit(b));
        let amps = self.amps.as_mut_slice();
        for i in 0..amps.len() {
            if i & c != 0 && i & ba != 0 && i & bb == 0 {
                amps.swap(i, (i & !ba) | bb);
            }
        }
    }

    fn apply_block(&mut self, u: &ComplexMatrix, qubits: &[usize]) {
        let k = qubits.len();
        let bits: Vec<usize> = qubits.iter().map(|&q| self.bit(q)).collect();
        let mask: usize = bits.iter().sum();
        let local = 1usize << k;
        let offsets: Vec<usize> = (0..local)
            .map(|l| {
                (0..k)
                    .filter(|&j| l & (1 << (k - 1 - j)) != 0)
                    .map(|j| bits[j])
                    .sum()
            })
            .collect();
        let amps = self.amps.as_mut_slice();
        let mut gathered = vec![ZERO; local];
        for base in 0..amps.len() {
            if base & mask != 0 {
                continue;
            }
            for (l, off) in offsets.iter().enumerate() {
                gathered[l] = amps[base | off];
            }
            for (r, off) in offsets.iter().enumerate() {
                amps[base | off] = (0..local).map(|c| u[(r, c)] * gathered[c]).sum();
            }
        }
    }
}

fn renormalize(v: ComplexVector) -> ComplexVector {
    let n = v.norm();
    if (n - 1.0).abs() > 1e-14 && n > 0.0 {
        v.normalized()
    } else {
        v
    }
}

/// Number of qubits for a power-of-two dimension.
pub fn qubits_for_dim(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::Config(format!("dimension {dim} is not a power of two")));
    }
    Ok(dim.trailing_zeros() as usize)
}

/// Mixed state of `n_qubits` qubits.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    n_qubits: usize,
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity (oracle minimum
    /// eigenvalue ≥ −1e-10).
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let n_qubits = qubits_for_dim(matrix.dim())?;
        if n_qubits > MAX_DENSITY_QUBITS {
            return Err(Error::Config(format!(
                "{n_qubits} qubits exceeds the {MAX_DENSITY_QUBITS}-qubit density-matrix limit"
            )));
        }
        if !matrix.is_finite() {
            return Err(Error::NonFinite);
        }
        let herm = matrix.hermiticity_residual();
        if herm > STATE_TOL {
            return Err(Error::InvalidDensity(format!("not Hermitian (residual {herm:.3e})")));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::InvalidDensity(format!("trace {tr} is not 1")));
        }
        let min = numerics::min_eigenvalue(&matrix)
            .ok_or_else(|| Error::InvalidDensity("eigendecomposition failed".into()))?;
        if min < -STATE_TOL {
            return Err(Error::InvalidDensity(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(DensityMatrix { n_qubits, matrix })
    }

    pub fn from_pure(state: &StateVector) -> Self {
        DensityMatrix {
            n_qubits: state.n_qubits,
            matrix: state.amps.projector(),
        }
    }

    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let d = 1usize << n_qubits;
        DensityMatrix {
            n_qubits,
            matrix: ComplexMatrix::identity(d).scale(C64::new(1.0 / d as f64, 0.0)),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }
}

/// Single-qubit, multi-qubit and block operations.
#[derive(Debug, Clone, PartialEq)]
pub enum GateKind {
    H,
    X,
    Z,
    Rx(f64),
    Ry(f64),
    /// Control first, target second.
    Cnot,
    Cz,
    /// Two controls, then target.
    Toffoli,
    /// Control, then the two swapped qubits.
    Cswap,
    /// Dense unitary; first listed qubit is the most significant.
    UnitaryBlock(ComplexMatrix),
}

impl GateKind {
    pub fn arity(&self) -> usize {
        match self {
            GateKind::H | GateKind::X | GateKind::Z | GateKind::Rx(_) | GateKind::Ry(_) => 1,
            GateKind::Cnot | GateKind::Cz => 2,
            GateKind::Toffoli | GateKind::Cswap => 3,
            GateKind::UnitaryBlock(m) => m.dim().trailing_zeros() as usize,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
}

impl Gate {
    pub fn h(q: usize) -> Self {
        Gate { kind: GateKind::H, qubits: vec![q] }
    }

    pub fn x(q: usize) -> Self {
        Gate { kind: GateKind::X, qubits: vec![q] }
    }

    pub fn z(q: usize) -> Self {
        Gate { kind: GateKind::Z, qubits: vec![q] }
    }

    pub fn rx(q: usize, angle: f64) -> Self {
        Gate { kind: GateKind::Rx(angle), qubits: vec![q] }
    }

    pub fn ry(q: usize, angle: f64) -> Self {
        Gate { kind: GateKind::Ry(angle), qubits: vec![q] }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Gate { kind: GateKind::Cnot, qubits: vec![control, target] }
    }

    pub fn cz(a: usize, b: usize) -> Self {
        Gate { kind: GateKind::Cz, qubits: vec![a, b] }
    }

    pub fn toffoli(c1: usize, c2: usize, target: usize) -> Self {
        Gate { kind: GateKind::Toffoli, qubits: vec![c1, c2, target] }
    }

    pub fn cswap(control: usize, a: usize, b: usize) -> Self {
        Gate { kind: GateKind::Cswap, qubits: vec![control, a, b] }
    }

    /// Dense unitary block, validated at 1e-8.
    pub fn unitary(matrix: ComplexMatrix, qubits: Vec<usize>) -> Result<Self> {
        check_dim(1 << qubits.len(), matrix.dim())?;
        numerics::ensure_unitary(&matrix, numerics::DEFAULT_TOL)?;
        Ok(Gate {
            kind: GateKind::UnitaryBlock(matrix),
            qubits,
        })
    }

    /// 2×2 matrix of a single-qubit gate kind.
    pub fn single_qubit_matrix(kind: &GateKind) -> Option<[[C64; 2]; 2]> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let r = |x: f64| C64::new(x, 0.0);
        Some(match kind {
            GateKind::H => [[r(s), r(s)], [r(s), r(-s)]],
            GateKind::X => [[ZERO, ONE], [ONE, ZERO]],
            GateKind::Z => [[ONE, ZERO], [ZERO, -ONE]],
            GateKind::Rx(t) => {
                let (c, sn) = ((t / 2.0).cos(), (t / 2.0).sin());
                [[r(c), C64::new(0.0, -sn)], [C64::new(0.0, -sn), r(c)]]
            }
            GateKind::Ry(t) => {
                let (c, sn) = ((t / 2.0).cos(), (t / 2.0).sin());
                [[r(c), r(-sn)], [r(sn), r(c)]]
            }
            _ => return None,
        })
    }

    fn validate(&self, n_qubits: usize) -> Result<()> {
        if self.qubits.len() != self.kind.arity() {
            return Err(Error::InvalidCircuit(format!(
                "{:?} expects {} qubits, got {}",
                self.kind,
                self.kind.arity(),
                self.qubits.len()
            )));
        }
        for (i, &q) in self.qubits.iter().enumerate() {
            if q >= n_qubits {
                return Err(Error::InvalidCircuit(format!("qubit {q} out of range for {n_qubits} qubits")));
            }
            if self.qubits[..i].contains(&q) {
                return Err(Error::InvalidCircuit(format!("qubit {q} addressed twice")));
            }
        }
        Ok(())
    }

    fn apply(&self, state: &mut StateVector) {
        let q = &self.qubits;
        match &self.kind {
            GateKind::Cnot => {
                let m = Self::single_qubit_matrix(&GateKind::X).unwrap();
                let mask = state.bit(q[0]);
                state.apply_single(q[1], m, mask);
            }
            GateKind::Cz => {
                let m = Self::single_qubit_matrix(&GateKind::Z).unwrap();
                let mask = state.bit(q[0]);
                state.apply_single(q[1], m, mask);
            }
            GateKind::Toffoli => {
                let m = Self::single_qubit_matrix(&GateKind::X).unwrap();
                let mask = state.bit(q[0]) | state.bit(q[1]);
                state.apply_single(q[2], m, mask);
            }
            GateKind::Cswap => state.apply_cswap(q[0], q[1], q[2]),
            GateKind::UnitaryBlock(u) => state.apply_block(u, q),
            single => {
                let m = Self::single_qubit_matrix(single).expect("single-qubit kind");
                state.apply_single(q[0], m, 0);
            }
        }
    }
}

/// Ordered gate list on a fixed register.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    pub n_qubits: usize,
    pub gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Circuit {
            n_qubits,
            gates: Vec::new(),
        }
    }

    pub fn push(&mut self, gate: Gate) -> &mut Self {
        self.gates.push(gate);
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.gates.iter().try_for_each(|g| g.validate(self.n_qubits))
    }
}

/// Applies the gates of `circuit` to `init` in order.
pub fn run_circuit(circuit: &Circuit, init: &StateVector) -> Result<StateVector> {
    check_dim(circuit.n_qubits, init.n_qubits)?;
    circuit.validate()?;
    let mut state = init.clone();
    for gate in &circuit.gates {
        gate.apply(&mut state);
    }
    state.amps = renormalize(state.amps);
    Ok(state)
}

/// Applies `u` on `qubits` (first listed = most significant) and identity elsewhere.
pub fn apply_unitary_block(state: &StateVector, u: &ComplexMatrix, qubits: &[usize]) -> Result<StateVector> {
    let gate = Gate::unitary(u.clone(), qubits.to_vec())?;
    gate.validate(state.n_qubits)?;
    let mut out = state.clone();
    gate.apply(&mut out);
    out.amps = renormalize(out.amps);
    Ok(out)
}

/// Multinomial draw of `shots` outcomes over `probabilities` via
/// conditional binomials; cost is independent of `shots`.
pub fn sample_counts<R: Rng + ?Sized>(probabilities: &[f64], shots: u64, rng: &mut R) -> Vec<u64> {
    let total: f64 = probabilities.iter().map(|p| p.max(0.0)).sum();
    let mut counts = vec![0u64; probabilities.len()];
    let mut remaining = shots;
    let mut mass = total;
    let last = probabilities.len().saturating_sub(1);
    for (i, &p) in probabilities.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if i == last {
            counts[i] = remaining;
            break;
        }
        let p = p.max(0.0);
        let q = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 0.0 };
        let k = if q >= 1.0 {
            remaining
        } else if q <= 0.0 {
            0
        } else {
            Binomial::new(remaining, q).expect("valid binomial").sample(rng)
        };
        counts[i] = k;
        remaining -= k;
        mass -= p;
    }
    counts
}

/// Bitstring of a basis index, qubit 0 first.
pub fn bitstring(index: usize, n_qubits: usize) -> String {
    (0..n_qubits)
        .map(|q| if index >> (n_qubits - 1 - q) & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Computational-basis measurement counts keyed by bitstring; outcomes that
/// never occur are omitted.
pub fn sample_basis<R: Rng + ?Sized>(state: &StateVector, shots: u64, rng: &mut R) -> BTreeMap<String, u64> {
    sample_counts(&state.probabilities(), shots, rng)
        .into_iter()
        .enumerate()
        .filter(|&(_, c)| c > 0)
        .map(|(i, c)| (bitstring(i, state.n_qubits), c))
        .collect()
}

/// `|⟨a|b⟩|²`.
pub fn pure_overlap(a: &StateVector, b: &StateVector) -> Result<f64> {
    check_dim(a.dim(), b.dim())?;
    Ok(a.amps.inner(&b.amps).norm_sqr().clamp(0.0, 1.0))
}

/// `tr(ρσ)`, clamped to `[0, 1]`.
pub fn mixed_overlap(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_dim(rho.dim(), sigma.dim())?;
    let (a, b) = (&rho.matrix, &sigma.matrix);
    let n = a.dim();
    let mut tr = ZERO;
    for i in 0..n {
        for j in 0..n {
            tr += a[(i, j)] * b[(j, i)];
        }
    }
    Ok(tr.re.clamp(0.0, 1.0))
}

/// `⟨ψ|ρ|ψ⟩` without forming the projector.
pub fn expectation_in_state(rho: &DensityMatrix, psi: &StateVector) -> Result<f64> {
    check_dim(rho.dim(), psi.dim())?;
    let rv = rho.matrix.mul_vec(&psi.amps)?;
    Ok(psi.amps.inner(&rv).re.clamp(0.0, 1.0))
}

/// Spectral ensemble of a density matrix, ready for repeated draws.
#[derive(Debug, Clone)]
pub struct MixtureSampler {
    weights: Vec<f64>,
    states: Vec<StateVector>,
}

impl MixtureSampler {
    pub fn new(rho: &DensityMatrix) -> Result<Self> {
        let pairs = oracle::oracle_eigendecompose(&rho.matrix)?;
        let mut weights = Vec::with_capacity(pairs.len());
        let mut states = Vec::with_capacity(pairs.len());
        for p in pairs {
            weights.push(p.eigenvalue.re.max(0.0));
            states.push(StateVector {
                n_qubits: rho.n_qubits,
                amps: p.eigenvector,
            });
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        Ok(MixtureSampler { weights, states })
    }

    /// Eigenvalues, descending.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Eigenvectors matching [`weights`](Self::weights).
    pub fn states(&self) -> &[StateVector] {
        &self.states
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> &StateVector {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (w, s) in self.weights.iter().zip(&self.states) {
            acc += w;
            if u < acc {
                return s;
            }
        }
        // round-off: fall back to the last state with nonzero weight
        let last = self.weights.iter().rposition(|&w| w > 0.0).unwrap_or(0);
        &self.states[last]
    }
}

/// Draws eigenvector `v_i` of `ρ` with probability `λ_i`.
pub fn draw_pure_from_mixture<R: Rng + ?Sized>(rho: &DensityMatrix, rng: &mut R) -> Result<StateVector> {
    Ok(MixtureSampler::new(rho)?.draw(rng).clone())
}
