//! Hardware-efficient trial-state circuits.
//!
//! Each layer is a row of `RX` rotations, a CNOT entangler, then a row of
//! `RY` rotations. Layer `l` reads its `RX` angles from
//! `θ[2nl .. 2nl+n]` and its `RY` angles from `θ[2nl+n .. 2n(l+1)]`.

use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulator::{run_circuit, Circuit, Gate, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Entangler {
    /// `CNOT(q, q+1)` for `q = 0..n−2`.
    #[default]
    LinearChain,
    /// Linear chain closed by `CNOT(n−1, 0)`.
    Ring,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub n_qubits: usize,
    pub n_layers: usize,
    #[serde(default)]
    pub entangler: Entangler,
}

impl AnsatzSpec {
    pub fn new(n_qubits: usize, n_layers: usize, entangler: Entangler) -> Result<Self> {
        let spec = AnsatzSpec {
            n_qubits,
            n_layers,
            entangler,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Linear chain with `n_qubits + 1` layers.
    pub fn with_default_depth(n_qubits: usize) -> Result<Self> {
        Self::new(n_qubits, n_qubits + 1, Entangler::LinearChain)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 || self.n_layers == 0 {
            return Err(Error::Config(format!(
                "ansatz needs at least one qubit and one layer (got {} qubits, {} layers)",
                self.n_qubits, self.n_layers
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }
}

/// Rotation angles in radians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamVector(pub Vec<f64>);

impl ParamVector {
    pub fn zeros(len: usize) -> Self {
        ParamVector(vec![0.0; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for ParamVector {
    fn from(v: Vec<f64>) -> Self {
        ParamVector(v)
    }
}

/// One `RX` and one `RY` angle per qubit per layer.
pub fn param_count(spec: &AnsatzSpec) -> usize {
    2 * spec.n_qubits * spec.n_layers
}

pub fn build_circuit(spec: &AnsatzSpec, theta: &[f64]) -> Result<Circuit> {
    spec.validate()?;
    let expected = param_count(spec);
    if theta.len() != expected {
        return Err(Error::ParamLength {
            expected,
            found: theta.len(),
        });
    }
    let n = spec.n_qubits;
    let mut circuit = Circuit::new(n);
    for layer in theta.chunks(2 * n) {
        let (rx, ry) = layer.split_at(n);
        for (q, &angle) in rx.iter().enumerate() {
            circuit.push(Gate::rx(q, angle));
        }
        for q in 0..n.saturating_sub(1) {
            circuit.push(Gate::cnot(q, q + 1));
        }
        if spec.entangler == Entangler::Ring && n > 1 {
            circuit.push(Gate::cnot(n - 1, 0));
        }
        for (q, &angle) in ry.iter().enumerate() {
            circuit.push(Gate::ry(q, angle));
        }
    }
    Ok(circuit)
}

/// `U(θ)|0…0⟩`.
pub fn prepare_state(spec: &AnsatzSpec, theta: &[f64]) -> Result<StateVector> {
    run_circuit(&build_circuit(spec, theta)?, &StateVector::zero(spec.n_qubits))
}

/// `len` angles drawn i.i.d. uniform on `[0, 2π)`.
pub fn random_angles<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(0.0..TAU)).collect()
}

pub fn random_init<R: Rng + ?Sized>(spec: &AnsatzSpec, rng: &mut R) -> ParamVector {
    ParamVector(random_angles(param_count(spec), rng))
}
