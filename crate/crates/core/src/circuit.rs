//! Gate-level circuit representation.
//!
//! Qubit `q` of a circuit is bit `q` of the global basis index. Registers are
//! laid out so that the tensor product `|system⟩ ⊗ |block ancillas⟩ ⊗ |test⟩`
//! reads most-significant first: the Hadamard-test ancilla is qubit 0, block
//! ancillas follow, and the system register occupies the top bits.

use std::ops::Range;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliMasks, PauliString};

#[derive(Clone, Debug, PartialEq)]
pub enum GateKind {
    H,
    X,
    Z,
    S,
    Sdg,
    /// `[[cos θ/2, −sin θ/2], [sin θ/2, cos θ/2]]`.
    Ry(f64),
    /// `RZ(φ) = diag(e^{−iφ/2}, e^{iφ/2})`, used by the QASM lowering.
    Rz(f64),
    /// The string applied as an operator; letter `k` acts on `targets[k]`.
    Pauli(PauliString),
    /// `exp(−i θ P) = cos θ · I − i sin θ · P`; letter `k` acts on `targets[k]`.
    PauliRotation {
        angle: f64,
        string: PauliString,
    },
}

/// A gate with its targets and (all-ones) control qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub targets: Vec<usize>,
    pub controls: Vec<usize>,
}

fn h_matrix() -> [[Complex64; 2]; 2] {
    let r = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    [[r, r], [r, -r]]
}

impl Gate {
    fn single(kind: GateKind, q: usize) -> Self {
        Self {
            kind,
            targets: vec![q],
            controls: Vec::new(),
        }
    }

    pub fn h(q: usize) -> Self {
        Self::single(GateKind::H, q)
    }

    pub fn x(q: usize) -> Self {
        Self::single(GateKind::X, q)
    }

    pub fn z(q: usize) -> Self {
        Self::single(GateKind::Z, q)
    }

    pub fn s(q: usize) -> Self {
        Self::single(GateKind::S, q)
    }

    pub fn sdg(q: usize) -> Self {
        Self::single(GateKind::Sdg, q)
    }

    pub fn ry(theta: f64, q: usize) -> Self {
        Self::single(GateKind::Ry(theta), q)
    }

    pub fn rz(phi: f64, q: usize) -> Self {
        Self::single(GateKind::Rz(phi), q)
    }

    pub fn cx(control: usize, target: usize) -> Self {
        Self::x(target).controlled_by(control)
    }

    /// Applies `string` on `register`, where `register[b]` holds qubit `b + 1`
    /// of the string (bit `b`).
    pub fn pauli(string: PauliString, register: &[usize]) -> Self {
        let targets = string_targets(&string, register);
        Self {
            kind: GateKind::Pauli(string),
            targets,
            controls: Vec::new(),
        }
    }

    /// `exp(−i θ P)` for `P = string` placed on `register` as in [`Gate::pauli`].
    pub fn pauli_rotation(angle: f64, string: PauliString, register: &[usize]) -> Self {
        let targets = string_targets(&string, register);
        Self {
            kind: GateKind::PauliRotation { angle, string },
            targets,
            controls: Vec::new(),
        }
    }

    pub fn controlled_by(mut self, control: usize) -> Self {
        self.controls.push(control);
        self
    }

    /// Every qubit the gate touches, targets first.
    pub fn qubits(&self) -> impl Iterator<Item = usize> + '_ {
        self.targets.iter().chain(self.controls.iter()).copied()
    }

    pub fn validate(&self, width: usize) -> Result<()> {
        let mut seen = std::collections::BTreeSet::new();
        for q in self.qubits() {
            if q >= width {
                return Err(Error::QubitOutOfRange { index: q, width });
            }
            if !seen.insert(q) {
                return Err(Error::DuplicateQubit(q));
            }
        }
        let arity_ok = match &self.kind {
            GateKind::Pauli(p) | GateKind::PauliRotation { string: p, .. } => {
                p.num_qubits() == self.targets.len()
            }
            _ => self.targets.len() == 1,
        };
        if !arity_ok {
            return Err(Error::InvalidParameter(format!(
                "gate {:?} has {} targets",
                self.kind,
                self.targets.len()
            )));
        }
        match &self.kind {
            GateKind::Ry(t) | GateKind::Rz(t) | GateKind::PauliRotation { angle: t, .. }
                if !t.is_finite() =>
            {
                Err(Error::NonFinite("gate angle"))
            }
            _ => Ok(()),
        }
    }

    /// The 2×2 matrix of a single-qubit gate, `None` for string gates.
    pub fn single_qubit_matrix(&self) -> Option<[[Complex64; 2]; 2]> {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        Some(match self.kind {
            GateKind::H => h_matrix(),
            GateKind::X => Pauli::X.matrix(),
            GateKind::Z => Pauli::Z.matrix(),
            GateKind::S => [[one, zero], [zero, i]],
            GateKind::Sdg => [[one, zero], [zero, -i]],
            GateKind::Ry(theta) => {
                let (s, c) = (theta / 2.0).sin_cos();
                [
                    [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
                    [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
                ]
            }
            GateKind::Rz(phi) => [
                [Complex64::from_polar(1.0, -phi / 2.0), zero],
                [zero, Complex64::from_polar(1.0, phi / 2.0)],
            ],
            GateKind::Pauli(_) | GateKind::PauliRotation { .. } => return None,
        })
    }

    /// Masks of a string gate in global qubit positions.
    pub fn global_masks(&self) -> Option<PauliMasks> {
        let string = match &self.kind {
            GateKind::Pauli(p) | GateKind::PauliRotation { string: p, .. } => p,
            _ => return None,
        };
        let mut m = PauliMasks {
            x_mask: 0,
            z_mask: 0,
            y_count: 0,
        };
        for (letter, &q) in string.letters().iter().zip(&self.targets) {
            match letter {
                Pauli::I => {}
                Pauli::X => m.x_mask |= 1 << q,
                Pauli::Z => m.z_mask |= 1 << q,
                Pauli::Y => {
                    m.x_mask |= 1 << q;
                    m.z_mask |= 1 << q;
                    m.y_count += 1;
                }
            }
        }
        Some(m)
    }

    pub fn control_mask(&self) -> u64 {
        self.controls.iter().fold(0, |m, &q| m | (1 << q))
    }

    pub fn adjoint(&self) -> Gate {
        let kind = match &self.kind {
            GateKind::S => GateKind::Sdg,
            GateKind::Sdg => GateKind::S,
            GateKind::Ry(t) => GateKind::Ry(-t),
            GateKind::Rz(t) => GateKind::Rz(-t),
            GateKind::PauliRotation { angle, string } => GateKind::PauliRotation {
                angle: -angle,
                string: string.clone(),
            },
            k => k.clone(),
        };
        Gate {
            kind,
            targets: self.targets.clone(),
            controls: self.controls.clone(),
        }
    }
}

fn string_targets(string: &PauliString, register: &[usize]) -> Vec<usize> {
    assert_eq!(
        string.num_qubits(),
        register.len(),
        "Pauli string width must match its register"
    );
    // letters are written most-significant first
    register.iter().rev().copied().collect()
}

/// Index ranges of the registers inside a circuit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    /// System qubits; `system.start` holds qubit 1 of the lattice register.
    pub system: Range<usize>,
    pub block_ancillas: Range<usize>,
    pub hadamard_ancilla: Option<usize>,
}

impl Layout {
    /// Hadamard-test ancilla at qubit 0, `blocks` ancillas above it, then the system.
    pub fn hadamard_test(system_qubits: usize, blocks: usize) -> Self {
        Self {
            system: 1 + blocks..1 + blocks + system_qubits,
            block_ancillas: 1..1 + blocks,
            hadamard_ancilla: Some(0),
        }
    }

    pub fn width(&self) -> usize {
        self.system
            .end
            .max(self.block_ancillas.end)
            .max(self.hadamard_ancilla.map_or(0, |q| q + 1))
    }

    pub fn system_qubits(&self) -> Vec<usize> {
        self.system.clone().collect()
    }

    /// Global basis index of system state `alpha` with every ancilla in `|0⟩`.
    pub fn embed_system_index(&self, alpha: usize) -> usize {
        alpha << self.system.start
    }

    fn validate(&self) -> Result<()> {
        let overlaps = |a: &Range<usize>, b: &Range<usize>| a.start < b.end && b.start < a.end;
        let mut bad = overlaps(&self.system, &self.block_ancillas);
        if let Some(h) = self.hadamard_ancilla {
            bad |= self.system.contains(&h) || self.block_ancillas.contains(&h);
        }
        if bad {
            return Err(Error::InvalidParameter(format!(
                "register ranges overlap: {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    width: usize,
    gates: Vec<Gate>,
    layout: Layout,
}

impl Circuit {
    pub fn new(layout: Layout) -> Result<Self> {
        layout.validate()?;
        Ok(Self {
            width: layout.width(),
            gates: Vec::new(),
            layout,
        })
    }

    /// A bare register of `width` qubits, all of them system qubits.
    pub fn plain(width: usize) -> Self {
        Self {
            width,
            gates: Vec::new(),
            layout: Layout {
                system: 0..width,
                block_ancillas: 0..0,
                hadamard_ancilla: None,
            },
        }
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.validate(self.width)?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn extend(&mut self, gates: impl IntoIterator<Item = Gate>) -> Result<()> {
        for g in gates {
            self.push(g)?;
        }
        Ok(())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    /// Reversed circuit of adjoint gates.
    pub fn adjoint(&self) -> Circuit {
        Circuit {
            width: self.width,
            gates: self.gates.iter().rev().map(Gate::adjoint).collect(),
            layout: self.layout.clone(),
        }
    }

    /// The same gates, each additionally controlled on `control`.
    pub fn controlled_by(&self, control: usize) -> Result<Circuit> {
        let mut out = Circuit {
            width: self.width,
            gates: Vec::with_capacity(self.gates.len()),
            layout: self.layout.clone(),
        };
        for g in &self.gates {
            out.push(g.clone().controlled_by(control))?;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_catches_bad_indices() {
        let mut c = Circuit::plain(2);
        assert!(matches!(
            c.push(Gate::h(2)),
            Err(Error::QubitOutOfRange { index: 2, width: 2 })
        ));
        assert!(matches!(
            c.push(Gate::cx(1, 1)),
            Err(Error::DuplicateQubit(1))
        ));
        assert!(matches!(
            c.push(Gate::ry(f64::NAN, 0)),
            Err(Error::NonFinite(_))
        ));
        assert!(c.push(Gate::cx(0, 1)).is_ok());
    }

    #[test]
    fn layout_places_system_on_top() {
        let l = Layout::hadamard_test(2, 3);
        assert_eq!(l.width(), 6);
        assert_eq!(l.system, 4..6);
        assert_eq!(l.embed_system_index(2), 2 << 4);
        assert!(Circuit::new(Layout {
            system: 0..2,
            block_ancillas: 1..3,
            hadamard_ancilla: None
        })
        .is_err());
    }

    #[test]
    fn string_targets_follow_written_order() {
        let g = Gate::pauli("XZ".parse().unwrap(), &[4, 5]);
        // Z acts on qubit 1 of the string (register[0] = 4), X on qubit 2 (5)
        assert_eq!(g.targets, vec![5, 4]);
        let m = g.global_masks().unwrap();
        assert_eq!(m.x_mask, 1 << 5);
        assert_eq!(m.z_mask, 1 << 4);
    }

    #[test]
    fn ry_pins_rotation_convention() {
        let m = Gate::ry(std::f64::consts::PI, 0)
            .single_qubit_matrix()
            .unwrap();
        assert!((m[0][1].re + 1.0).abs() < 1e-15);
        assert!((m[1][0].re - 1.0).abs() < 1e-15);
    }
}
