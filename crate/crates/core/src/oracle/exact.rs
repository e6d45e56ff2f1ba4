//! Dense references for C(t) = Tr e^{−iHt} (or Tr e^{−Hτ}) and its
//! interacting-minus-free difference.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::analytic::{analytic_delta_c, icf_from_phase_shift, TimeDomain};
use super::expm::{matrix_exp, trace_exp};
use crate::error::{Error, Result};
use crate::model::{build_position_hamiltonian, DenseMatrix, ModelParams, Scenario};
use crate::pauli::{split_hermitian_antihermitian, NonHermitianSplit, PauliString};

/// Largest register the dense oracles accept.
pub const ORACLE_QUBIT_LIMIT: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleMethod {
    EigenExponential,
    TrotterProduct,
    AnalyticErfc,
    PhaseShiftIntegral,
}

impl OracleMethod {
    pub fn name(self) -> &'static str {
        match self {
            OracleMethod::EigenExponential => "eigen-exponential",
            OracleMethod::TrotterProduct => "trotter-product",
            OracleMethod::AnalyticErfc => "analytic-erfc",
            OracleMethod::PhaseShiftIntegral => "phase-shift-integral",
        }
    }
}

/// Reference values on a time grid. The closed forms only know ΔC, and a
/// single-Hamiltonian Trotter reference only knows C.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub method: OracleMethod,
    pub times: Vec<f64>,
    pub c: Option<Vec<Complex64>>,
    pub c0: Option<Vec<Complex64>>,
    pub delta_c: Option<Vec<Complex64>>,
}

fn check_width(qubits: usize) -> Result<()> {
    if qubits > ORACLE_QUBIT_LIMIT {
        return Err(Error::Capacity {
            what: "dense oracle",
            required: qubits,
            limit: ORACLE_QUBIT_LIMIT,
        });
    }
    Ok(())
}

fn difference(c: &[Complex64], c0: &[Complex64]) -> Vec<Complex64> {
    c.iter().zip(c0).map(|(a, b)| a - b).collect()
}

// Dense Hamiltonian the scenario exponentiates, and the exponent per unit time.
fn scenario_matrix(params: &ModelParams) -> Result<(DenseMatrix, Complex64)> {
    Ok(match params.scenario {
        Scenario::ImaginaryTime => (
            build_position_hamiltonian(params, true)?,
            Complex64::new(-1.0, 0.0),
        ),
        Scenario::HermitianRealTime => (
            build_position_hamiltonian(params, true)?,
            Complex64::new(0.0, -1.0),
        ),
        Scenario::NonHermitianRealTime => (
            params.scenario_hamiltonian()?.to_matrix(),
            Complex64::new(0.0, -1.0),
        ),
    })
}

fn trace_series(params: &ModelParams, times: &[f64]) -> Result<Vec<Complex64>> {
    let (h, rate) = scenario_matrix(params)?;
    times
        .iter()
        .map(|&t| {
            if t == 0.0 {
                Ok(Complex64::new(h.nrows() as f64, 0.0))
            } else {
                trace_exp(&h, rate * t)
            }
        })
        .collect()
}

/// Exact C, C₀ and ΔC from the spectra of the interacting and free
/// Hamiltonians of `params.scenario`. For imaginary time the grid holds τ.
pub fn exact_icf(params: &ModelParams, times: &[f64]) -> Result<OracleResult> {
    params.validate()?;
    check_width(params.qubits)?;
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::NonFinite("time grid"));
    }
    let c = trace_series(params, times)?;
    let c0 = trace_series(&params.free(), times)?;
    Ok(OracleResult {
        method: OracleMethod::EigenExponential,
        times: times.to_vec(),
        delta_c: Some(difference(&c, &c0)),
        c: Some(c),
        c0: Some(c0),
    })
}

fn string_exp(c: f64, h: &PauliString, z: Complex64) -> Result<DenseMatrix> {
    matrix_exp(&h.to_matrix(), z * c)
}

/// One Trotter step as a dense matrix, factors multiplied in the order the
/// circuit applies them: unitary rotations first, then the non-unitary
/// factors, each group in term order.
pub fn trotter_step_matrix(
    split: &NonHermitianSplit,
    dt: f64,
    scenario: Scenario,
) -> Result<DenseMatrix> {
    let dim = 1usize << split.num_qubits;
    let rot = Complex64::new(0.0, -dt);
    let (unitary, unitary_z, damped, damped_z) = if scenario.is_imaginary_time() {
        // e^{−τ(i c h)} rotates; e^{−τ c h} damps.
        (
            &split.antihermitian,
            rot,
            &split.hermitian,
            Complex64::new(-dt, 0.0),
        )
    } else {
        // e^{−it c h} rotates; e^{−it(i c h)} = e^{t c h} damps.
        (
            &split.hermitian,
            rot,
            &split.antihermitian,
            Complex64::new(dt, 0.0),
        )
    };
    let mut step = DenseMatrix::identity(dim, dim);
    for (c, h) in unitary {
        step = string_exp(*c, h, unitary_z)? * step;
    }
    for (c, h) in damped {
        step = string_exp(*c, h, damped_z)? * step;
    }
    Ok(step)
}

fn offset_factor(split: &NonHermitianSplit, t: f64, scenario: Scenario) -> Complex64 {
    let s = split.scalar_offset;
    if scenario.is_imaginary_time() {
        (-s * t).exp()
    } else {
        (Complex64::new(0.0, -t) * s).exp()
    }
}

/// The dense N-step product including the identity offset, i.e. the
/// operator whose trace [`trotter_reference`] reports at step N.
pub fn trotter_propagator(
    split: &NonHermitianSplit,
    dt: f64,
    steps: usize,
    scenario: Scenario,
) -> Result<DenseMatrix> {
    check_width(split.num_qubits)?;
    let step = trotter_step_matrix(split, dt, scenario)?;
    let dim = step.nrows();
    let mut power = DenseMatrix::identity(dim, dim);
    for _ in 0..steps {
        power = &step * power;
    }
    Ok(power * offset_factor(split, steps as f64 * dt, scenario))
}

/// C at steps 0..=N from the dense first-order product formula — the value
/// a shot-free run of the assembled circuit should reproduce.
pub fn trotter_reference(
    split: &NonHermitianSplit,
    dt: f64,
    steps: usize,
    scenario: Scenario,
) -> Result<OracleResult> {
    check_width(split.num_qubits)?;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidParameter(format!("dt must be > 0, got {dt}")));
    }
    let step = trotter_step_matrix(split, dt, scenario)?;
    let dim = step.nrows();
    let mut power = DenseMatrix::identity(dim, dim);
    let mut times = Vec::with_capacity(steps + 1);
    let mut c = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        if k > 0 {
            power = &step * power;
        }
        let t = k as f64 * dt;
        times.push(t);
        c.push(offset_factor(split, t, scenario) * power.trace());
    }
    Ok(OracleResult {
        method: OracleMethod::TrotterProduct,
        times,
        c: Some(c),
        c0: None,
        delta_c: None,
    })
}

/// Trotter references for both the interacting and the free Hamiltonian of
/// `params`, on the grid `k·δt`, k = 0..=N.
pub fn trotter_icf(params: &ModelParams) -> Result<OracleResult> {
    params.validate()?;
    check_width(params.qubits)?;
    let split = split_hermitian_antihermitian(&params.scenario_hamiltonian()?);
    let free = split_hermitian_antihermitian(&params.free().scenario_hamiltonian()?);
    let int = trotter_reference(&split, params.dt, params.steps, params.scenario)?;
    let fr = trotter_reference(&free, params.dt, params.steps, params.scenario)?;
    let (c, c0) = (int.c.unwrap_or_default(), fr.c.unwrap_or_default());
    Ok(OracleResult {
        method: OracleMethod::TrotterProduct,
        times: int.times,
        delta_c: Some(difference(&c, &c0)),
        c: Some(c),
        c0: Some(c0),
    })
}

/// Closed-form infinite-volume ΔC on a grid.
pub fn analytic_series(
    mass: f64,
    coupling: f64,
    times: &[f64],
    domain: TimeDomain,
) -> Result<OracleResult> {
    let delta_c = times
        .iter()
        .map(|&t| analytic_delta_c(mass, coupling, t, domain))
        .collect::<Result<Vec<_>>>()?;
    Ok(OracleResult {
        method: OracleMethod::AnalyticErfc,
        times: times.to_vec(),
        c: None,
        c0: None,
        delta_c: Some(delta_c),
    })
}

/// ΔC(τ) from the phase-shift integral on a Euclidean grid; τ = 0 maps to 0.
pub fn phase_shift_series(mass: f64, coupling: f64, taus: &[f64]) -> Result<OracleResult> {
    let delta_c = taus
        .iter()
        .map(|&tau| {
            if tau == 0.0 {
                Ok(Complex64::new(0.0, 0.0))
            } else {
                icf_from_phase_shift(mass, coupling, tau).map(|v| Complex64::new(v, 0.0))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OracleResult {
        method: OracleMethod::PhaseShiftIntegral,
        times: taus.to_vec(),
        c: None,
        c0: None,
        delta_c: Some(delta_c),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::rotate_il_closed_form;
    use crate::oracle::expm::{expm_eigen, expm_taylor};

    fn fig4(steps: usize) -> ModelParams {
        ModelParams::new(1.0, 4.0, 2.0, 1, 0.2, steps, Scenario::ImaginaryTime).unwrap()
    }

    #[test]
    fn one_qubit_closed_form() {
        let tau = 1.0;
        let r = exact_icf(&fig4(5), &[0.0, tau]).unwrap();
        let want =
            (-tau / 16.0f64).exp() * ((-tau / 4.0f64).exp() - 1.0) * 2.0 * (tau / 16.0f64).cosh();
        let dc = r.delta_c.unwrap();
        assert_eq!(dc[0], Complex64::new(0.0, 0.0));
        assert!((dc[1].re - want).abs() < 1e-13, "{} vs {want}", dc[1]);
        assert!(dc[1].im.abs() < 1e-14);
        assert_eq!(r.c.unwrap()[0], Complex64::new(2.0, 0.0));
    }

    #[test]
    fn single_term_trotter_is_exact() {
        let p = fig4(5);
        let t = trotter_icf(&p).unwrap();
        let e = exact_icf(&p, &t.times).unwrap();
        for (a, b) in t.delta_c.unwrap().iter().zip(e.delta_c.unwrap()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_steps_is_identity_trace() {
        let p = ModelParams::new(1.0, 1.0, 2.0, 3, 0.1, 0, Scenario::ImaginaryTime).unwrap();
        let split = split_hermitian_antihermitian(&p.scenario_hamiltonian().unwrap());
        let r = trotter_reference(&split, 0.1, 0, Scenario::ImaginaryTime).unwrap();
        assert_eq!(r.c.unwrap(), vec![Complex64::new(8.0, 0.0)]);
    }

    fn rotated() -> ModelParams {
        ModelParams::new(
            1.0,
            4.0 / 3.0,
            2.0,
            2,
            0.2,
            10,
            Scenario::NonHermitianRealTime,
        )
        .unwrap()
    }

    #[test]
    fn rotated_series_is_complex() {
        let p = rotated();
        let times: Vec<f64> = (0..=10).map(|k| 0.2 * k as f64).collect();
        let dc = exact_icf(&p, &times).unwrap().delta_c.unwrap();
        assert_eq!(dc[0], Complex64::new(0.0, 0.0));
        assert!(dc[5].re.abs() > 1e-3 && dc[5].im.abs() > 1e-3, "{}", dc[5]);
    }

    #[test]
    fn rotated_exponential_dual_method() {
        let h = rotate_il_closed_form(&rotated()).unwrap().to_matrix();
        for t in [0.3, 1.0, 2.0] {
            let z = Complex64::new(0.0, -t);
            let a = expm_taylor(&h, z).unwrap();
            let b = expm_eigen(&h, z).unwrap();
            let d = (&a - &b).iter().map(|x| x.norm()).fold(0.0, f64::max);
            assert!(d < 1e-10, "t={t}: {d}");
            assert!((trace_exp(&h, z).unwrap() - a.trace()).norm() < 1e-10);
        }
    }

    #[test]
    fn trotter_error_orders() {
        // The operator error is first order in δt; the leading commutator is
        // traceless, so the trace error is second order.
        let p = rotated();
        let split = split_hermitian_antihermitian(&p.scenario_hamiltonian().unwrap());
        let h = p.scenario_hamiltonian().unwrap().to_matrix();
        let exact_u = matrix_exp(&h, Complex64::new(0.0, -1.0)).unwrap();
        let mut op = Vec::new();
        let mut tr = Vec::new();
        for dt in [0.2, 0.1, 0.05] {
            let n = (1.0f64 / dt).round() as usize;
            let u = trotter_propagator(&split, dt, n, p.scenario).unwrap();
            op.push((&u - &exact_u).iter().map(|x| x.norm()).fold(0.0, f64::max));
            let r = trotter_reference(&split, dt, n, p.scenario).unwrap();
            tr.push((r.c.unwrap()[n] - exact_u.trace()).norm());
        }
        for w in op.windows(2) {
            assert!((1.6..2.5).contains(&(w[0] / w[1])), "{op:?}");
        }
        for w in tr.windows(2) {
            assert!((3.2..5.0).contains(&(w[0] / w[1])), "{tr:?}");
        }
    }

    #[test]
    fn oracle_width_limit() {
        let p = ModelParams::new(1.0, 1.0, 2.0, 7, 0.1, 1, Scenario::ImaginaryTime).unwrap();
        assert!(matches!(exact_icf(&p, &[1.0]), Err(Error::Capacity { .. })));
    }
}
