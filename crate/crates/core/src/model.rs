//! Lattice model of a particle on a periodic ring with a centered contact
//! potential, in position space.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{pauli_decompose, PauliString, WeightedPauliSum, DENSE_QUBIT_LIMIT};

pub type DenseMatrix = DMatrix<Complex64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    /// `Tr e^{-Hτ}` for the Hermitian lattice Hamiltonian.
    ImaginaryTime,
    /// `Tr e^{-iH t}` for the `L → iL` rotated, non-Hermitian Hamiltonian.
    NonHermitianRealTime,
    /// `Tr e^{-iH t}` for the Hermitian lattice Hamiltonian.
    HermitianRealTime,
}

impl Scenario {
    pub fn is_imaginary_time(self) -> bool {
        matches!(self, Scenario::ImaginaryTime)
    }

    pub fn name(self) -> &'static str {
        match self {
            Scenario::ImaginaryTime => "imaginary-time",
            Scenario::NonHermitianRealTime => "non-hermitian-real-time",
            Scenario::HermitianRealTime => "hermitian-real-time",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "imaginary-time" | "imaginary" => Ok(Scenario::ImaginaryTime),
            "non-hermitian-real-time" | "non-hermitian" => Ok(Scenario::NonHermitianRealTime),
            "hermitian-real-time" | "real-time" => Ok(Scenario::HermitianRealTime),
            _ => Err(Error::InvalidParameter(format!("unknown scenario {s:?}"))),
        }
    }
}

/// Physical and lattice parameters plus the evolution grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub mass: f64,
    pub spacing: f64,
    pub coupling: f64,
    pub qubits: usize,
    pub dt: f64,
    pub steps: usize,
    pub scenario: Scenario,
}

impl ModelParams {
    pub fn new(
        mass: f64,
        spacing: f64,
        coupling: f64,
        qubits: usize,
        dt: f64,
        steps: usize,
        scenario: Scenario,
    ) -> Result<Self> {
        let p = Self {
            mass,
            spacing,
            coupling,
            qubits,
            dt,
            steps,
            scenario,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("mass", self.mass),
            ("spacing", self.spacing),
            ("coupling", self.coupling),
            ("dt", self.dt),
        ] {
            if !v.is_finite() {
                return Err(Error::NonFinite(name));
            }
        }
        if self.mass <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "mass must be > 0, got {}",
                self.mass
            )));
        }
        if self.spacing <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "spacing must be > 0, got {}",
                self.spacing
            )));
        }
        if self.qubits < 1 {
            return Err(Error::InvalidParameter(
                "qubit count must be at least 1".into(),
            ));
        }
        if self.dt <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "dt must be > 0, got {}",
                self.dt
            )));
        }
        Ok(())
    }

    /// `L = 2^Γ a`.
    pub fn box_length(&self) -> f64 {
        (1u64 << self.qubits) as f64 * self.spacing
    }

    pub fn dim(&self) -> usize {
        1 << self.qubits
    }

    pub fn time(&self, step: usize) -> f64 {
        step as f64 * self.dt
    }

    /// Same parameters with the contact coupling switched off.
    pub fn free(&self) -> Self {
        Self {
            coupling: 0.0,
            ..*self
        }
    }

    /// The Pauli-sum Hamiltonian the scenario evolves: the lattice Hamiltonian,
    /// or its `L → iL` rotation for the non-Hermitian scenario.
    pub fn scenario_hamiltonian(&self) -> Result<WeightedPauliSum> {
        match self.scenario {
            Scenario::NonHermitianRealTime => rotate_il(self),
            _ => pauli_decompose(&build_position_hamiltonian(self, true)?, self.qubits),
        }
    }
}

/// Lattice Hamiltonian for a possibly complex spacing: periodic hopping
/// `-1/(2ma²)` and on-site `1/(ma²) + V(x)`, with `V = V₀/(2a)` on the two
/// central sites.
fn lattice_hamiltonian(mass: f64, spacing: Complex64, coupling: f64, qubits: usize) -> DenseMatrix {
    let dim = 1usize << qubits;
    let inv_ma2 = (spacing * spacing * mass).inv();
    let hop = -inv_ma2 * 0.5;
    let contact = Complex64::new(coupling, 0.0) / (spacing * 2.0);
    let mut h = DenseMatrix::zeros(dim, dim);
    for alpha in 0..dim {
        let next = (alpha + 1) % dim;
        h[(alpha, next)] += hop;
        h[(next, alpha)] += hop;
        h[(alpha, alpha)] += inv_ma2;
        if alpha + 1 == dim / 2 || alpha == dim / 2 {
            h[(alpha, alpha)] += contact;
        }
    }
    h
}

fn check_dense(qubits: usize) -> Result<()> {
    if qubits > DENSE_QUBIT_LIMIT {
        return Err(Error::Capacity {
            what: "dense Hamiltonian",
            required: qubits,
            limit: DENSE_QUBIT_LIMIT,
        });
    }
    Ok(())
}

/// Dense position-space Hamiltonian. With `interacting = false` the contact
/// coupling is set to zero.
///
/// For one qubit the periodic wrap links site 1 back to site 0, so the single
/// bond is counted twice.
pub fn build_position_hamiltonian(params: &ModelParams, interacting: bool) -> Result<DenseMatrix> {
    params.validate()?;
    check_dense(params.qubits)?;
    let coupling = if interacting { params.coupling } else { 0.0 };
    Ok(lattice_hamiltonian(
        params.mass,
        Complex64::new(params.spacing, 0.0),
        coupling,
        params.qubits,
    ))
}

/// `L → iL` rotated Hamiltonian, obtained by substituting `a → i a` in the
/// lattice Hamiltonian and decomposing.
pub fn rotate_il(params: &ModelParams) -> Result<WeightedPauliSum> {
    params.validate()?;
    check_dense(params.qubits)?;
    let h = lattice_hamiltonian(
        params.mass,
        Complex64::new(0.0, params.spacing),
        params.coupling,
        params.qubits,
    );
    pauli_decompose(&h, params.qubits)
}

/// Closed-form rotated Hamiltonians for one and two qubits:
///
/// * Γ = 1: `(1/ma²) X − (1/ma² + iV₀/2a) I`
/// * Γ = 2: `(1/2ma²)(I⊗X + X⊗X) + i(V₀/4a) Z⊗Z − (1/ma² + iV₀/4a) I⊗I`
pub fn rotate_il_closed_form(params: &ModelParams) -> Result<WeightedPauliSum> {
    params.validate()?;
    let inv_ma2 = 1.0 / (params.mass * params.spacing * params.spacing);
    let s = |t: &str| t.parse::<PauliString>();
    match params.qubits {
        1 => WeightedPauliSum::new(
            1,
            [
                (Complex64::new(inv_ma2, 0.0), s("X")?),
                (
                    Complex64::new(-inv_ma2, -params.coupling / (2.0 * params.spacing)),
                    s("I")?,
                ),
            ],
        ),
        2 => {
            let quarter = params.coupling / (4.0 * params.spacing);
            WeightedPauliSum::new(
                2,
                [
                    (Complex64::new(0.5 * inv_ma2, 0.0), s("IX")?),
                    (Complex64::new(0.5 * inv_ma2, 0.0), s("XX")?),
                    (Complex64::new(0.0, quarter), s("ZZ")?),
                    (Complex64::new(-inv_ma2, -quarter), s("II")?),
                ],
            )
        }
        q => Err(Error::InvalidParameter(format!(
            "closed-form rotated Hamiltonian exists for 1 or 2 qubits, got {q}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(qubits: usize, spacing: f64, coupling: f64) -> ModelParams {
        ModelParams::new(
            1.0,
            spacing,
            coupling,
            qubits,
            0.2,
            5,
            Scenario::ImaginaryTime,
        )
        .unwrap()
    }

    fn re(m: &DenseMatrix) -> Vec<f64> {
        m.transpose().iter().map(|z| z.re).collect()
    }

    #[test]
    fn one_qubit_interacting_matrix() {
        let h = build_position_hamiltonian(&params(1, 4.0, 2.0), true).unwrap();
        assert_eq!(re(&h), vec![0.3125, -0.0625, -0.0625, 0.3125]);
        assert!(h.iter().all(|z| z.im == 0.0));
    }

    #[test]
    fn one_qubit_free_matrix() {
        let h = build_position_hamiltonian(&params(1, 4.0, 2.0), false).unwrap();
        assert_eq!(re(&h), vec![0.0625, -0.0625, -0.0625, 0.0625]);
    }

    #[test]
    fn contact_sits_on_two_central_sites() {
        let h = build_position_hamiltonian(&params(3, 1.0, 2.0), true).unwrap();
        let free = build_position_hamiltonian(&params(3, 1.0, 2.0), false).unwrap();
        let v: Vec<f64> = (0..8).map(|i| (h[(i, i)] - free[(i, i)]).re).collect();
        assert_eq!(v, vec![0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn box_length_is_exact() {
        let p = params(2, 4.0 / 3.0, 2.0);
        assert_eq!(p.box_length(), 4.0 * (4.0 / 3.0));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(ModelParams::new(0.0, 1.0, 1.0, 1, 0.1, 1, Scenario::ImaginaryTime).is_err());
        assert!(ModelParams::new(1.0, -1.0, 1.0, 1, 0.1, 1, Scenario::ImaginaryTime).is_err());
        assert!(ModelParams::new(1.0, 1.0, 1.0, 0, 0.1, 1, Scenario::ImaginaryTime).is_err());
        assert!(ModelParams::new(1.0, 1.0, 1.0, 1, 0.0, 1, Scenario::ImaginaryTime).is_err());
        assert!(matches!(
            ModelParams::new(1.0, 1.0, f64::NAN, 1, 0.1, 1, Scenario::ImaginaryTime),
            Err(Error::NonFinite("coupling"))
        ));
        let mut p = params(1, 1.0, 1.0);
        p.qubits = 9;
        assert!(matches!(
            build_position_hamiltonian(&p, true),
            Err(Error::Capacity { limit: 8, .. })
        ));
    }

    #[test]
    fn scenario_names_round_trip() {
        for s in [
            Scenario::ImaginaryTime,
            Scenario::NonHermitianRealTime,
            Scenario::HermitianRealTime,
        ] {
            assert_eq!(s.name().parse::<Scenario>().unwrap(), s);
        }
        assert!("sideways".parse::<Scenario>().is_err());
    }
}
