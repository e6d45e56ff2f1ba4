//! Block encodings of Trotterized evolution.
//!
//! A non-unitary factor `e^{c h δt}` with `h² = I` equals `αI + βh` with
//! `α = cosh(cδt)`, `β = sinh(cδt)`. One ancilla per factor realizes it:
//!
//! ```text
//! anc  |0⟩ ─ RY(θ) ──●── H ─   (keep anc = 0)
//! sys  |ψ⟩ ──────────h──────
//! ```
//!
//! `RY(θ)|0⟩ = (α|0⟩ + β|1⟩)/√(α²+β²)`, so the `⟨0|·|0⟩` block on the ancilla is
//! `(αI + βh)/√(2(α²+β²))`.

use num_complex::Complex64;

use crate::circuit::{Circuit, Gate, Layout};
use crate::error::{Error, Result};
use crate::model::{DenseMatrix, ModelParams, Scenario};
use crate::pauli::{NonHermitianSplit, PauliString};
use crate::statevector::{apply_circuit, basis_state, DENSE_CHECK_QUBIT_LIMIT};

/// Upper bound on the width of an assembled circuit. Circuits beyond the
/// statevector limit are still representable; only the projected backend can
/// run them.
pub const ASSEMBLY_WIDTH_LIMIT: usize = 1024;

/// One ancilla-assisted factor `e^{c h δt} / norm`.
#[derive(Clone, Debug, PartialEq)]
pub struct LcuStep {
    pub c: f64,
    pub h: PauliString,
    pub dt: f64,
    pub alpha: f64,
    pub beta: f64,
    pub theta: f64,
    pub norm: f64,
    pub ancilla: usize,
}

pub fn lcu_step(c: f64, h: PauliString, dt: f64, ancilla: usize) -> Result<LcuStep> {
    if h.is_identity() {
        return Err(Error::IdentityString);
    }
    if !c.is_finite() {
        return Err(Error::NonFinite("LCU coefficient"));
    }
    if !dt.is_finite() {
        return Err(Error::NonFinite("LCU time step"));
    }
    let x = c * dt;
    let (alpha, beta) = (x.cosh(), x.sinh());
    Ok(LcuStep {
        c,
        h,
        dt,
        alpha,
        beta,
        // atan2 keeps the sign of β, so negative c encodes e^{-|c| h δt}
        theta: 2.0 * beta.atan2(alpha),
        norm: (2.0 * (alpha * alpha + beta * beta)).sqrt(),
        ancilla,
    })
}

impl LcuStep {
    /// Gates on a register whose system qubits are `system` (qubit 1 first).
    pub fn gates(&self, system: &[usize]) -> Vec<Gate> {
        vec![
            Gate::ry(self.theta, self.ancilla),
            Gate::pauli(self.h.clone(), system).controlled_by(self.ancilla),
            Gate::h(self.ancilla),
        ]
    }

    /// Stand-alone circuit: ancilla at qubit 0, system above it.
    pub fn circuit(&self) -> Result<Circuit> {
        let n = self.h.num_qubits();
        let layout = Layout {
            system: 1..1 + n,
            block_ancillas: 0..1,
            hadamard_ancilla: None,
        };
        let mut step = self.clone();
        step.ancilla = 0;
        let mut circ = Circuit::new(layout)?;
        circ.extend(step.gates(&(1..1 + n).collect::<Vec<_>>()))?;
        Ok(circ)
    }
}

/// A unitary or ancilla-encoded factor of one Trotter step.
#[derive(Clone, Debug, PartialEq)]
pub enum StepFactor {
    /// `e^{-i c h δt}`.
    Unitary { c: f64, h: PauliString },
    /// `e^{c h δt}`, block encoded.
    Encoded { c: f64, h: PauliString },
}

/// An evolution `U_A` over `steps` Trotter steps, together with the scalars
/// needed to turn Hadamard-test probabilities back into a trace.
#[derive(Clone, Debug)]
pub struct EvolutionCircuit {
    /// `U_A` on system and block ancillas. The Hadamard-test ancilla (qubit 0)
    /// is reserved but idle.
    pub circuit: Circuit,
    pub lcu_steps: Vec<LcuStep>,
    pub factors: Vec<StepFactor>,
    pub total_norm: f64,
    pub scalar_prefactor: Complex64,
    pub block_ancillas: Vec<usize>,
    pub hadamard_ancilla: usize,
    pub system_qubits: usize,
    pub steps: usize,
    pub dt: f64,
}

impl EvolutionCircuit {
    pub fn width(&self) -> usize {
        self.circuit.width()
    }

    pub fn layout(&self) -> &Layout {
        self.circuit.layout()
    }

    /// Encoded factors per step (`n` in the ancilla count `n·N`).
    pub fn encoded_per_step(&self) -> usize {
        self.factors
            .iter()
            .filter(|f| matches!(f, StepFactor::Encoded { .. }))
            .count()
    }

    /// `total_norm · scalar_prefactor`: multiplies `Σ_α ⟨α|A|α⟩` into the trace.
    pub fn trace_scale(&self) -> Complex64 {
        self.scalar_prefactor * self.total_norm
    }

    /// The Hadamard-test circuit: `H`, `U_A` controlled on the test ancilla,
    /// then `S` (imaginary part only) and a closing `H`.
    pub fn hadamard_test_circuit(&self, imaginary: bool) -> Result<Circuit> {
        let h = self.hadamard_ancilla;
        let mut out = Circuit::new(self.circuit.layout().clone())?;
        out.push(Gate::h(h))?;
        out.extend(self.circuit.controlled_by(h)?.gates().iter().cloned())?;
        if imaginary {
            out.push(Gate::s(h))?;
        }
        out.push(Gate::h(h))?;
        Ok(out)
    }
}

/// Which exponent the scenario evolves with.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Evolution {
    /// `e^{-Hτ}`.
    Imaginary,
    /// `e^{-iHt}`.
    Real,
}

fn step_factors(split: &NonHermitianSplit, evolution: Evolution) -> Vec<StepFactor> {
    let mut unitary = Vec::new();
    let mut encoded = Vec::new();
    match evolution {
        Evolution::Real => {
            for (c, h) in &split.hermitian {
                unitary.push(StepFactor::Unitary {
                    c: *c,
                    h: h.clone(),
                });
            }
            // -i·(i c h) = c h
            for (c, h) in &split.antihermitian {
                encoded.push(StepFactor::Encoded {
                    c: *c,
                    h: h.clone(),
                });
            }
        }
        Evolution::Imaginary => {
            for (c, h) in &split.antihermitian {
                unitary.push(StepFactor::Unitary {
                    c: *c,
                    h: h.clone(),
                });
            }
            for (c, h) in &split.hermitian {
                encoded.push(StepFactor::Encoded {
                    c: -c,
                    h: h.clone(),
                });
            }
        }
    }
    unitary.extend(encoded);
    unitary
}

fn assemble(
    split: &NonHermitianSplit,
    dt: f64,
    steps: usize,
    evolution: Evolution,
) -> Result<EvolutionCircuit> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidParameter(format!("dt must be > 0, got {dt}")));
    }
    let factors = step_factors(split, evolution);
    let per_step = factors
        .iter()
        .filter(|f| matches!(f, StepFactor::Encoded { .. }))
        .count();
    let blocks = per_step.saturating_mul(steps);
    let width = blocks.saturating_add(split.num_qubits + 1);
    if width > ASSEMBLY_WIDTH_LIMIT {
        return Err(Error::Capacity {
            what: "evolution circuit",
            required: width,
            limit: ASSEMBLY_WIDTH_LIMIT,
        });
    }
    let layout = Layout::hadamard_test(split.num_qubits, blocks);
    let system = layout.system_qubits();
    let mut circuit = Circuit::new(layout.clone())?;
    let mut lcu_steps = Vec::with_capacity(blocks);
    let mut next_ancilla = layout.block_ancillas.start;
    for _ in 0..steps {
        for f in &factors {
            match f {
                StepFactor::Unitary { c, h } => {
                    circuit.push(exp_pauli_unitary(*c, h.clone(), dt, &system)?)?;
                }
                StepFactor::Encoded { c, h } => {
                    let step = lcu_step(*c, h.clone(), dt, next_ancilla)?;
                    next_ancilla += 1;
                    circuit.extend(step.gates(&system))?;
                    lcu_steps.push(step);
                }
            }
        }
    }
    let total_norm = lcu_steps.iter().map(|s| s.norm).product();
    let t = steps as f64 * dt;
    let s = split.scalar_offset;
    let scalar_prefactor = match evolution {
        Evolution::Imaginary => (-s * t).exp(),
        Evolution::Real => (Complex64::new(0.0, -t) * s).exp(),
    };
    Ok(EvolutionCircuit {
        circuit,
        lcu_steps,
        factors,
        total_norm,
        scalar_prefactor,
        block_ancillas: layout.block_ancillas.clone().collect(),
        hadamard_ancilla: 0,
        system_qubits: split.num_qubits,
        steps,
        dt,
    })
}

/// `e^{-i c h δt}` as a single string rotation on `system`.
pub fn exp_pauli_unitary(c: f64, h: PauliString, dt: f64, system: &[usize]) -> Result<Gate> {
    if h.is_identity() {
        return Err(Error::IdentityString);
    }
    Ok(Gate::pauli_rotation(c * dt, h, system))
}

/// `e^{-Hτ}` over `steps` steps of `params.dt`: every Hermitian term is
/// encoded with `c → −c`; identity terms fold into `e^{-sτ}`.
pub fn assemble_imaginary_time(
    split: &NonHermitianSplit,
    params: &ModelParams,
) -> Result<EvolutionCircuit> {
    assemble(split, params.dt, params.steps, Evolution::Imaginary)
}

/// `e^{-iHt}` for `H = H₁ + iH₂`: per step the `H₁` rotations, then one
/// encoded factor `e^{c_j h_j δt}` per anti-Hermitian term.
pub fn assemble_nonhermitian_realtime(
    split: &NonHermitianSplit,
    params: &ModelParams,
) -> Result<EvolutionCircuit> {
    if split.n() == 0 {
        return Err(Error::NoAntiHermitianTerms);
    }
    assemble(split, params.dt, params.steps, Evolution::Real)
}

/// `e^{-iHt}` with any mix of terms; with no anti-Hermitian terms this is the
/// plain unitary Hadamard test.
pub fn assemble_real_time(
    split: &NonHermitianSplit,
    params: &ModelParams,
) -> Result<EvolutionCircuit> {
    assemble(split, params.dt, params.steps, Evolution::Real)
}

/// Assembly matching the scenario's exponent.
pub fn assemble_for(split: &NonHermitianSplit, params: &ModelParams) -> Result<EvolutionCircuit> {
    match params.scenario {
        Scenario::ImaginaryTime => assemble_imaginary_time(split, params),
        Scenario::NonHermitianRealTime | Scenario::HermitianRealTime => {
            assemble_real_time(split, params)
        }
    }
}

fn extract(circuit: &Circuit) -> Result<DenseMatrix> {
    let width = circuit.width();
    if width > DENSE_CHECK_QUBIT_LIMIT {
        return Err(Error::Capacity {
            what: "block extraction",
            required: width,
            limit: DENSE_CHECK_QUBIT_LIMIT,
        });
    }
    let layout = circuit.layout();
    let n = layout.system.len();
    let dim = 1usize << n;
    let mut block = DenseMatrix::zeros(dim, dim);
    for col in 0..dim {
        let psi = apply_circuit(circuit, basis_state(layout.embed_system_index(col), width)?)?;
        for row in 0..dim {
            block[(row, col)] = psi.amplitudes()[layout.embed_system_index(row)];
        }
    }
    Ok(block)
}

/// The `2^Γ × 2^Γ` block of `U_A` between system states with every ancilla in `|0⟩`.
pub fn extract_block(ec: &EvolutionCircuit) -> Result<DenseMatrix> {
    extract(&ec.circuit)
}

pub fn extract_lcu_block(step: &LcuStep) -> Result<DenseMatrix> {
    extract(&step.circuit()?)
}
