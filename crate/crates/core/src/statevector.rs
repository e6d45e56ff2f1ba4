//! Dense statevector execution.
//!
//! Gates update amplitudes in place over the index pairs they couple; no
//! operator matrix is formed during execution.

use num_complex::Complex64;

use crate::circuit::{Circuit, Gate, GateKind};
use crate::error::{Error, Result};
use crate::model::DenseMatrix;

/// Largest register a full statevector is allocated for.
pub const STATEVECTOR_QUBIT_LIMIT: usize = 30;

/// Largest width for which dense unitaries are materialized (tests and checks).
pub const DENSE_CHECK_QUBIT_LIMIT: usize = 12;

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    width: usize,
    amps: Vec<Complex64>,
}

fn check_width(width: usize) -> Result<()> {
    if width > STATEVECTOR_QUBIT_LIMIT {
        return Err(Error::Capacity {
            what: "statevector",
            required: width,
            limit: STATEVECTOR_QUBIT_LIMIT,
        });
    }
    Ok(())
}

/// Computational basis state `|index⟩` on `width` qubits.
pub fn basis_state(index: usize, width: usize) -> Result<StateVector> {
    check_width(width)?;
    let dim = 1usize << width;
    if index >= dim {
        return Err(Error::BasisOutOfRange { index, width });
    }
    let mut amps = Vec::new();
    amps.try_reserve_exact(dim)
        .map_err(|_| Error::OutOfMemory { qubits: width })?;
    amps.resize(dim, Complex64::new(0.0, 0.0));
    amps[index] = Complex64::new(1.0, 0.0);
    Ok(StateVector { width, amps })
}

impl StateVector {
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let width = amps.len().trailing_zeros() as usize;
        if amps.is_empty() || 1usize << width != amps.len() {
            return Err(Error::InvalidParameter(format!(
                "amplitude count {} is not a power of two",
                amps.len()
            )));
        }
        check_width(width)?;
        Ok(Self { width, amps })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Applies a gate that has already been validated against this width.
    pub fn apply_gate(&mut self, gate: &Gate) {
        let cmask = gate.control_mask();
        if let Some(u) = gate.single_qubit_matrix() {
            apply_single(&mut self.amps, gate.targets[0], cmask, u);
            return;
        }
        let masks = gate.global_masks().expect("string gate");
        match gate.kind {
            GateKind::Pauli(_) => {
                for i in 0..self.amps.len() as u64 {
                    if i & cmask != cmask {
                        continue;
                    }
                    let j = i ^ masks.x_mask;
                    if masks.x_mask == 0 {
                        self.amps[i as usize] *= masks.phase(i);
                    } else if i < j {
                        let (ai, aj) = (self.amps[i as usize], self.amps[j as usize]);
                        self.amps[j as usize] = masks.phase(i) * ai;
                        self.amps[i as usize] = masks.phase(j) * aj;
                    }
                }
            }
            GateKind::PauliRotation { angle, .. } => {
                let (s, c) = angle.sin_cos();
                let mis = Complex64::new(0.0, -s);
                for i in 0..self.amps.len() as u64 {
                    if i & cmask != cmask {
                        continue;
                    }
                    let j = i ^ masks.x_mask;
                    if masks.x_mask == 0 {
                        self.amps[i as usize] *= c + mis * masks.phase(i);
                    } else if i < j {
                        let (ai, aj) = (self.amps[i as usize], self.amps[j as usize]);
                        self.amps[i as usize] = ai * c + mis * masks.phase(j) * aj;
                        self.amps[j as usize] = aj * c + mis * masks.phase(i) * ai;
                    }
                }
            }
            _ => unreachable!("single-qubit kinds handled above"),
        }
    }

    /// Zeroes every amplitude whose bit `qubit` is 1 (unnormalized projection onto `|0⟩`).
    pub fn project_zero(&mut self, qubit: usize) {
        let bit = 1usize << qubit;
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & bit != 0 {
                *a = Complex64::new(0.0, 0.0);
            }
        }
    }
}

fn apply_single(amps: &mut [Complex64], target: usize, cmask: u64, u: [[Complex64; 2]; 2]) {
    let bit = 1usize << target;
    let cmask = cmask as usize;
    for i in 0..amps.len() {
        if i & bit != 0 || i & cmask != cmask {
            continue;
        }
        let j = i | bit;
        let (a0, a1) = (amps[i], amps[j]);
        amps[i] = u[0][0] * a0 + u[0][1] * a1;
        amps[j] = u[1][0] * a0 + u[1][1] * a1;
    }
}

/// Runs `circuit` on `state`, returning the evolved state.
pub fn apply_circuit(circuit: &Circuit, mut state: StateVector) -> Result<StateVector> {
    if circuit.width() != state.width {
        return Err(Error::DimensionMismatch {
            expected: circuit.width(),
            got: state.width,
        });
    }
    for g in circuit.gates() {
        state.apply_gate(g);
    }
    Ok(state)
}

/// Probability that measuring `qubits` yields `outcome`, where bit `k` of
/// `outcome` is the result for `qubits[k]`.
pub fn marginal_probability(state: &StateVector, qubits: &[usize], outcome: u64) -> f64 {
    let (mask, want) = qubits
        .iter()
        .enumerate()
        .fold((0usize, 0usize), |(m, w), (k, &q)| {
            let bit = 1usize << q;
            (m | bit, if (outcome >> k) & 1 == 1 { w | bit } else { w })
        });
    state
        .amps
        .iter()
        .enumerate()
        .filter(|(i, _)| i & mask == want)
        .map(|(_, a)| a.norm_sqr())
        .sum()
}

/// Dense unitary of a circuit, one column per basis input.
pub fn circuit_matrix(circuit: &Circuit) -> Result<DenseMatrix> {
    if circuit.width() > DENSE_CHECK_QUBIT_LIMIT {
        return Err(Error::Capacity {
            what: "dense circuit matrix",
            required: circuit.width(),
            limit: DENSE_CHECK_QUBIT_LIMIT,
        });
    }
    let dim = 1usize << circuit.width();
    let mut out = DenseMatrix::zeros(dim, dim);
    for col in 0..dim {
        let psi = apply_circuit(circuit, basis_state(col, circuit.width())?)?;
        for (row, a) in psi.amps.into_iter().enumerate() {
            out[(row, col)] = a;
        }
    }
    Ok(out)
}

/// `max |(U_adj U − I)_{ij}|`, where `U_adj` runs `circuit.adjoint()`: each
/// basis column is pushed through the circuit and back.
pub fn adjoint_roundtrip_deviation(circuit: &Circuit) -> Result<f64> {
    if circuit.width() > DENSE_CHECK_QUBIT_LIMIT {
        return Err(Error::Capacity {
            what: "dense unitarity check",
            required: circuit.width(),
            limit: DENSE_CHECK_QUBIT_LIMIT,
        });
    }
    let inverse = circuit.adjoint();
    let dim = 1usize << circuit.width();
    let mut worst = 0.0f64;
    for col in 0..dim {
        let psi = apply_circuit(circuit, basis_state(col, circuit.width())?)?;
        let back = apply_circuit(&inverse, psi)?;
        for (row, a) in back.amps.iter().enumerate() {
            let expected = if row == col { 1.0 } else { 0.0 };
            worst = worst.max((a - expected).norm());
        }
    }
    Ok(worst)
}

/// Upper bound on `max |(U†U − I)_{ij}|` in `O(4^w · gates)` work, avoiding
/// the cubic Gram product. With `V` the matrix of `circuit.adjoint()`,
/// `U†U − I = (U† − V)U + (VU − I)`, and each column of `U` has unit norm,
/// so the bound is the round-trip deviation plus `√d · max |V − U†|`.
pub fn unitarity_bound(circuit: &Circuit) -> Result<f64> {
    let u = circuit_matrix(circuit)?;
    let v = circuit_matrix(&circuit.adjoint())?;
    let gap = (&v - u.adjoint())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    let roundtrip = adjoint_roundtrip_deviation(circuit)?;
    Ok(roundtrip + (u.nrows() as f64).sqrt() * gap)
}

/// `max |(U†U − I)_{ij}|`.
pub fn unitarity_deviation(u: &DenseMatrix) -> f64 {
    let gram = u.adjoint() * u;
    let dim = u.ncols();
    (gram - DenseMatrix::identity(dim, dim))
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-14
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn basis_states() {
        assert_eq!(
            basis_state(0, 1).unwrap().amps,
            vec![c(1.0, 0.0), c(0.0, 0.0)]
        );
        let s = basis_state(3, 2).unwrap();
        assert_eq!(s.amps[3], c(1.0, 0.0));
        assert_eq!(s.norm_sqr(), 1.0);
        assert!(matches!(
            basis_state(4, 2),
            Err(Error::BasisOutOfRange { .. })
        ));
        assert!(matches!(
            basis_state(0, 31),
            Err(Error::Capacity { limit: 30, .. })
        ));
    }

    #[test]
    fn hadamard_then_phase() {
        let mut circ = Circuit::plain(1);
        circ.push(Gate::h(0)).unwrap();
        let psi = apply_circuit(&circ, basis_state(0, 1).unwrap()).unwrap();
        assert!(close(psi.amps[0], c(FRAC_1_SQRT_2, 0.0)));
        assert!(close(psi.amps[1], c(FRAC_1_SQRT_2, 0.0)));
        circ.push(Gate::s(0)).unwrap();
        let psi = apply_circuit(&circ, basis_state(0, 1).unwrap()).unwrap();
        assert!(close(psi.amps[1], c(0.0, FRAC_1_SQRT_2)));
    }

    #[test]
    fn x_on_second_qubit() {
        let mut circ = Circuit::plain(2);
        circ.push(Gate::x(1)).unwrap();
        let psi = apply_circuit(&circ, basis_state(1, 2).unwrap()).unwrap();
        assert_eq!(psi.amps[3], c(1.0, 0.0));
    }

    #[test]
    fn width_mismatch_is_an_error() {
        let circ = Circuit::plain(2);
        assert!(matches!(
            apply_circuit(&circ, basis_state(0, 3).unwrap()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn marginals() {
        let mut circ = Circuit::plain(1);
        circ.push(Gate::h(0)).unwrap();
        let psi = apply_circuit(&circ, basis_state(0, 1).unwrap()).unwrap();
        assert!((marginal_probability(&psi, &[0], 0) - 0.5).abs() < 1e-15);

        let s = basis_state(3, 2).unwrap();
        assert_eq!(marginal_probability(&s, &[1], 0), 0.0);

        let mut bell = Circuit::plain(2);
        bell.extend([Gate::h(0), Gate::cx(0, 1)]).unwrap();
        let psi = apply_circuit(&bell, basis_state(0, 2).unwrap()).unwrap();
        assert!((marginal_probability(&psi, &[0, 1], 0b00) - 0.5).abs() < 1e-15);
        assert!(marginal_probability(&psi, &[0, 1], 0b10).abs() < 1e-15);
    }

    #[test]
    fn pauli_rotation_matches_closed_form() {
        let zz: crate::pauli::PauliString = "ZZ".parse().unwrap();
        let mut circ = Circuit::plain(2);
        circ.push(Gate::pauli_rotation(0.1, zz, &[0, 1])).unwrap();
        let u = circuit_matrix(&circ).unwrap();
        let e = |sign: f64| Complex64::from_polar(1.0, sign * 0.1);
        let diag = [e(-1.0), e(1.0), e(1.0), e(-1.0)];
        for r in 0..4 {
            for col in 0..4 {
                let want = if r == col { diag[r] } else { c(0.0, 0.0) };
                assert!(close(u[(r, col)], want), "({r},{col})");
            }
        }
    }

    #[test]
    fn pauli_rotation_quarter_turn_is_minus_i_x() {
        let mut circ = Circuit::plain(1);
        circ.push(Gate::pauli_rotation(
            std::f64::consts::FRAC_PI_2,
            "X".parse().unwrap(),
            &[0],
        ))
        .unwrap();
        let u = circuit_matrix(&circ).unwrap();
        assert!(close(u[(0, 1)], c(0.0, -1.0)));
        assert!(close(u[(1, 0)], c(0.0, -1.0)));
        assert!(u[(0, 0)].norm() < 1e-15);
    }

    #[test]
    fn string_gate_matches_kronecker_product() {
        for p in crate::pauli::PauliString::all(2) {
            let mut circ = Circuit::plain(2);
            circ.push(Gate::pauli(p.clone(), &[0, 1])).unwrap();
            let u = circuit_matrix(&circ).unwrap();
            assert!((u - p.to_matrix()).iter().all(|z| z.norm() < 1e-15), "{p}");
        }
    }

    #[test]
    fn controls_gate_only_the_one_subspace() {
        let mut circ = Circuit::plain(3);
        circ.push(
            Gate::pauli("X".parse().unwrap(), &[2])
                .controlled_by(0)
                .controlled_by(1),
        )
        .unwrap();
        let u = circuit_matrix(&circ).unwrap();
        for col in 0..8usize {
            let row = if col & 0b11 == 0b11 { col ^ 0b100 } else { col };
            assert_eq!(u[(row, col)], c(1.0, 0.0));
        }
    }

    #[test]
    fn projection_keeps_unnormalized_component() {
        let mut circ = Circuit::plain(2);
        circ.push(Gate::h(1)).unwrap();
        let mut psi = apply_circuit(&circ, basis_state(0, 2).unwrap()).unwrap();
        psi.project_zero(1);
        assert!((psi.norm_sqr() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn unitarity_bound_dominates_direct_check() {
        let mut c = Circuit::plain(3);
        c.push(Gate::h(0)).unwrap();
        c.push(Gate::cx(0, 2)).unwrap();
        c.push(Gate::ry(0.3, 1).controlled_by(2)).unwrap();
        c.push(Gate::pauli_rotation(
            0.7,
            "XYZ".parse().unwrap(),
            &[0, 1, 2],
        ))
        .unwrap();
        let direct = unitarity_deviation(&circuit_matrix(&c).unwrap());
        let bound = unitarity_bound(&c).unwrap();
        assert!(direct <= bound + 1e-16 && bound < 1e-14, "{direct} {bound}");
    }
}
