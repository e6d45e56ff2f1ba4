//! OpenQASM 2.0 export.
//!
//! Everything is lowered to `qelib1.inc` primitives: `h x y z s sdg ry rz`,
//! `cx cy cz ch ccx`. Pauli rotations become a basis change, a CNOT ladder
//! and one `rz`; controlled `ry`/`rz` use the usual two-CNOT construction.

use std::fmt::Write as _;

use crate::circuit::{Circuit, Gate, GateKind};
use crate::error::{Error, Result};
use crate::pauli::Pauli;

struct Emitter {
    out: String,
}

impl Emitter {
    fn op(&mut self, name: &str, qubits: &[usize]) {
        let args: Vec<String> = qubits.iter().map(|q| format!("q[{q}]")).collect();
        let _ = writeln!(self.out, "{name} {};", args.join(","));
    }

    fn rot(&mut self, name: &str, angle: f64, q: usize) {
        let _ = writeln!(self.out, "{name}({angle:?}) q[{q}];");
    }

    // rz or ry with at most one control.
    fn axis_rotation(&mut self, name: &str, angle: f64, target: usize, control: Option<usize>) {
        match control {
            None => self.rot(name, angle, target),
            Some(c) => {
                self.rot(name, angle / 2.0, target);
                self.op("cx", &[c, target]);
                self.rot(name, -angle / 2.0, target);
                self.op("cx", &[c, target]);
            }
        }
    }

    fn controlled_letter(&mut self, p: Pauli, target: usize, controls: &[usize]) -> Result<()> {
        match (p, controls) {
            (Pauli::I, _) => {}
            (Pauli::X, []) => self.op("x", &[target]),
            (Pauli::Y, []) => self.op("y", &[target]),
            (Pauli::Z, []) => self.op("z", &[target]),
            (Pauli::X, [c]) => self.op("cx", &[*c, target]),
            (Pauli::Y, [c]) => self.op("cy", &[*c, target]),
            (Pauli::Z, [c]) => self.op("cz", &[*c, target]),
            (Pauli::X, [a, b]) => self.op("ccx", &[*a, *b, target]),
            (Pauli::Y, [a, b]) => {
                self.op("sdg", &[target]);
                self.op("ccx", &[*a, *b, target]);
                self.op("s", &[target]);
            }
            (Pauli::Z, [a, b]) => {
                self.op("h", &[target]);
                self.op("ccx", &[*a, *b, target]);
                self.op("h", &[target]);
            }
            _ => return Err(unsupported("Pauli letter", controls.len())),
        }
        Ok(())
    }

    fn gate(&mut self, g: &Gate) -> Result<()> {
        let ctl = g.controls.as_slice();
        let one_control = match ctl {
            [] => None,
            [c] => Some(*c),
            _ => None,
        };
        match &g.kind {
            GateKind::Pauli(string) => {
                for (&p, &t) in string.letters().iter().zip(&g.targets) {
                    self.controlled_letter(p, t, ctl)?;
                }
            }
            GateKind::X => self.controlled_letter(Pauli::X, g.targets[0], ctl)?,
            GateKind::Z => self.controlled_letter(Pauli::Z, g.targets[0], ctl)?,
            GateKind::H => match ctl {
                [] => self.op("h", &g.targets),
                [c] => self.op("ch", &[*c, g.targets[0]]),
                _ => return Err(unsupported("H", ctl.len())),
            },
            GateKind::S | GateKind::Sdg if ctl.is_empty() => {
                let name = if g.kind == GateKind::S { "s" } else { "sdg" };
                self.op(name, &g.targets);
            }
            GateKind::Ry(theta) if ctl.len() <= 1 => {
                self.axis_rotation("ry", *theta, g.targets[0], one_control)
            }
            GateKind::Rz(phi) if ctl.len() <= 1 => {
                self.axis_rotation("rz", *phi, g.targets[0], one_control)
            }
            GateKind::PauliRotation { angle, string } if ctl.len() <= 1 => {
                let support: Vec<(Pauli, usize)> = string
                    .letters()
                    .iter()
                    .zip(&g.targets)
                    .filter(|(p, _)| **p != Pauli::I)
                    .map(|(p, t)| (*p, *t))
                    .collect();
                let Some(&(_, last)) = support.last() else {
                    return Err(Error::IdentityString);
                };
                for &(p, q) in &support {
                    match p {
                        Pauli::X => self.op("h", &[q]),
                        Pauli::Y => {
                            self.op("sdg", &[q]);
                            self.op("h", &[q]);
                        }
                        _ => {}
                    }
                }
                for w in support.windows(2) {
                    self.op("cx", &[w[0].1, w[1].1]);
                }
                // e^{−iθZ} = rz(2θ)
                self.axis_rotation("rz", 2.0 * angle, last, one_control);
                for w in support.windows(2).rev() {
                    self.op("cx", &[w[0].1, w[1].1]);
                }
                for &(p, q) in &support {
                    match p {
                        Pauli::X => self.op("h", &[q]),
                        Pauli::Y => {
                            self.op("h", &[q]);
                            self.op("s", &[q]);
                        }
                        _ => {}
                    }
                }
            }
            other => return Err(unsupported(&format!("{other:?}"), ctl.len())),
        }
        Ok(())
    }
}

fn unsupported(what: &str, controls: usize) -> Error {
    Error::InvalidParameter(format!(
        "no QASM lowering for {what} with {controls} controls"
    ))
}

/// The circuit as OpenQASM 2.0 source, without measurements.
pub fn to_qasm(circuit: &Circuit) -> Result<String> {
    let mut e = Emitter { out: String::new() };
    let _ = writeln!(
        e.out,
        "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[{}];",
        circuit.width()
    );
    for g in circuit.gates() {
        e.gate(g)?;
    }
    Ok(e.out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::block_encoding::assemble_for;
    use crate::model::{ModelParams, Scenario};
    use crate::pauli::{split_hermitian_antihermitian, PauliString};
    use crate::statevector::circuit_matrix;

    // Reads back exactly the subset `to_qasm` writes.
    fn parse(src: &str) -> Circuit {
        let mut lines = src.lines();
        assert_eq!(lines.next(), Some("OPENQASM 2.0;"));
        assert_eq!(lines.next(), Some("include \"qelib1.inc\";"));
        let qreg = lines.next().unwrap();
        let width: usize = qreg
            .trim_start_matches("qreg q[")
            .trim_end_matches("];")
            .parse()
            .unwrap();
        let mut c = Circuit::plain(width);
        for line in lines {
            let line = line.trim_end_matches(';');
            let (head, args) = line.split_once(' ').unwrap();
            let qs: Vec<usize> = args
                .split(',')
                .map(|a| {
                    a.trim_start_matches("q[")
                        .trim_end_matches(']')
                        .parse()
                        .unwrap()
                })
                .collect();
            let (name, param) = match head.split_once('(') {
                Some((n, p)) => (n, Some(p.trim_end_matches(')').parse::<f64>().unwrap())),
                None => (head, None),
            };
            let y: PauliString = "Y".parse().unwrap();
            let g = match name {
                "h" => Gate::h(qs[0]),
                "x" => Gate::x(qs[0]),
                "y" => Gate::pauli(y, &[qs[0]]),
                "z" => Gate::z(qs[0]),
                "s" => Gate::s(qs[0]),
                "sdg" => Gate::sdg(qs[0]),
                "ry" => Gate::ry(param.unwrap(), qs[0]),
                "rz" => Gate::rz(param.unwrap(), qs[0]),
                "cx" => Gate::cx(qs[0], qs[1]),
                "cy" => Gate::pauli(y, &[qs[1]]).controlled_by(qs[0]),
                "cz" => Gate::z(qs[1]).controlled_by(qs[0]),
                "ch" => Gate::h(qs[1]).controlled_by(qs[0]),
                "ccx" => Gate::x(qs[2]).controlled_by(qs[0]).controlled_by(qs[1]),
                other => panic!("unexpected {other}"),
            };
            c.push(g).unwrap();
        }
        c
    }

    fn max_diff(a: &crate::model::DenseMatrix, b: &crate::model::DenseMatrix) -> f64 {
        (a - b).iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    fn round_trip(c: &Circuit) {
        let text = to_qasm(c).unwrap();
        let back = parse(&text);
        let d = max_diff(&circuit_matrix(c).unwrap(), &circuit_matrix(&back).unwrap());
        assert!(d < 1e-12, "{d}\n{text}");
    }

    #[test]
    fn rotations_and_controls_round_trip() {
        let mut c = Circuit::plain(4);
        let s = |t: &str| t.parse::<PauliString>().unwrap();
        c.push(Gate::pauli_rotation(0.37, s("XYZ"), &[1, 2, 3]))
            .unwrap();
        c.push(Gate::pauli_rotation(-0.2, s("YIX"), &[1, 2, 3]).controlled_by(0))
            .unwrap();
        c.push(Gate::ry(0.9, 2).controlled_by(3)).unwrap();
        c.push(
            Gate::pauli(s("YZ"), &[2, 3])
                .controlled_by(0)
                .controlled_by(1),
        )
        .unwrap();
        c.push(Gate::h(1).controlled_by(0)).unwrap();
        c.push(Gate::sdg(2)).unwrap();
        round_trip(&c);
    }

    #[test]
    fn hadamard_test_circuits_round_trip() {
        for (scenario, spacing) in [
            (Scenario::ImaginaryTime, 4.0 / 3.0),
            (Scenario::NonHermitianRealTime, 4.0 / 3.0),
        ] {
            let p = ModelParams::new(1.0, spacing, 2.0, 2, 0.2, 1, scenario).unwrap();
            let split = split_hermitian_antihermitian(&p.scenario_hamiltonian().unwrap());
            let ec = assemble_for(&split, &p).unwrap();
            for imaginary in [false, true] {
                round_trip(&ec.hadamard_test_circuit(imaginary).unwrap());
            }
        }
    }

    #[test]
    fn header_and_width() {
        let c = Circuit::plain(3);
        assert_eq!(
            to_qasm(&c).unwrap(),
            "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[3];\n"
        );
    }
}
