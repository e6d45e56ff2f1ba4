//! Rescaling Hadamard-test sums into C(t) and ΔC(t) series.
//!
//! Each estimated quantity is a linear combination Σ κ·T of independent
//! trace estimates T (raw probability-difference sums), with κ the product
//! of the circuit's normalization and its scalar prefactor. The free run
//! enters with −κ₀. Where the interacting and free circuits coincide —
//! always at step 0, and at every step for one qubit, where V₀ only shifts
//! the identity term — a single run is shared with weight κ − κ₀.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::block_encoding::{assemble_for, EvolutionCircuit};
use crate::error::{Error, Result};
use crate::estimator::{
    exact_outcomes, sample_part, Backend, HadamardOutcome, Part, Sampling, StreamKey, TraceEstimate,
};
use crate::model::{ModelParams, Scenario};
use crate::oracle::exact::ORACLE_QUBIT_LIMIT;
use crate::oracle::expm::trace_exp;
use crate::oracle::{analytic_delta_c, exact_icf, trotter_icf, trotter_reference, TimeDomain};
use crate::pauli::{split_hermitian_antihermitian, NonHermitianSplit, WeightedPauliSum};
use crate::statevector::STATEVECTOR_QUBIT_LIMIT;

pub const RUN_INTERACTING: u64 = 0;
pub const RUN_FREE: u64 = 1;
pub const RUN_SHARED: u64 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Observable {
    /// C(t) − C₀(t).
    DeltaC,
    /// C(t) of the interacting Hamiltonian alone.
    C,
}

/// One estimate T with its weight κ.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaledTerm {
    pub scale: Complex64,
    pub estimate: TraceEstimate,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepRun {
    pub step: usize,
    pub time: f64,
    pub terms: Vec<ScaledTerm>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IcfRow {
    pub step: usize,
    pub time: f64,
    pub mean_re: Option<f64>,
    pub se_re: Option<f64>,
    pub mean_im: Option<f64>,
    pub se_im: Option<f64>,
    pub exact: Option<Complex64>,
    pub analytic: Option<Complex64>,
}

impl IcfRow {
    pub fn mean(&self) -> Option<Complex64> {
        Some(Complex64::new(self.mean_re?, self.mean_im?))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IcfSeries {
    pub params: ModelParams,
    pub observable: Observable,
    pub sampling: Sampling,
    pub backend: Backend,
    pub seed: u64,
    pub rows: Vec<IcfRow>,
}

// Re(κT) = κr·Tr − κi·Ti and Im(κT) = κi·Tr + κr·Ti; a component is
// available when every estimate it needs with nonzero weight is present.
fn component(terms: &[ScaledTerm], imaginary: bool) -> Option<(f64, f64)> {
    let mut mean = 0.0;
    let mut var = 0.0;
    for t in terms {
        let (w_re, w_im) = if imaginary {
            (t.scale.im, t.scale.re)
        } else {
            (t.scale.re, -t.scale.im)
        };
        for (w, part) in [(w_re, Part::Real), (w_im, Part::Imaginary)] {
            if w == 0.0 {
                continue;
            }
            let e = t.estimate.part(part)?;
            mean += w * e.mean;
            var += w * w * e.se * e.se;
        }
    }
    Some((mean, var.sqrt()))
}

/// Combines weighted estimates step by step. Errors if a step yields
/// neither component — e.g. a complex weight with only one measured part.
pub fn rescale_icf(runs: &[StepRun]) -> Result<Vec<IcfRow>> {
    runs.iter()
        .map(|r| {
            let re = component(&r.terms, false);
            let im = component(&r.terms, true);
            if re.is_none() && im.is_none() {
                return Err(Error::Mismatch(format!(
                    "step {}: the measured parts determine neither component",
                    r.step
                )));
            }
            Ok(IcfRow {
                step: r.step,
                time: r.time,
                mean_re: re.map(|v| v.0),
                se_re: re.map(|v| v.1),
                mean_im: im.map(|v| v.0),
                se_im: im.map(|v| v.1),
                exact: None,
                analytic: None,
            })
        })
        .collect()
}

/// Exact outcome probabilities of one circuit, kept for repeated sampling.
#[derive(Clone, Debug)]
pub struct PreparedRun {
    pub run: u64,
    pub scale: Complex64,
    pub total_norm: f64,
    pub outcomes: Vec<(Part, Vec<HadamardOutcome>)>,
}

impl PreparedRun {
    fn new(
        ec: &EvolutionCircuit,
        scale: Complex64,
        run: u64,
        parts: &[Part],
        backend: Backend,
    ) -> Result<Self> {
        let outcomes = parts
            .iter()
            .map(|&p| Ok((p, exact_outcomes(ec, p, backend)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            run,
            scale,
            total_norm: ec.total_norm,
            outcomes,
        })
    }

    fn sample(
        &self,
        step: usize,
        time: f64,
        sampling: Sampling,
        backend: Backend,
        seed: u64,
    ) -> Result<ScaledTerm> {
        let mut estimate = TraceEstimate {
            step,
            time,
            re: None,
            im: None,
            shots: sampling.shots(),
            trials: sampling.trials(),
            backend,
        };
        for (part, outcomes) in &self.outcomes {
            let key = StreamKey {
                seed,
                run: self.run,
                part: *part,
                step,
            };
            let e = sample_part(outcomes, sampling, key)?;
            match part {
                Part::Real => estimate.re = Some(e),
                Part::Imaginary => estimate.im = Some(e),
            }
        }
        Ok(ScaledTerm {
            scale: self.scale,
            estimate,
        })
    }
}

#[derive(Clone, Debug)]
pub struct PreparedStep {
    pub step: usize,
    pub time: f64,
    pub runs: Vec<PreparedRun>,
}

/// Everything needed to draw shot samples for a series, with the
/// expensive statevector work done once.
#[derive(Clone, Debug)]
pub struct PreparedSeries {
    pub params: ModelParams,
    pub observable: Observable,
    pub backend: Backend,
    pub parts: Vec<Part>,
    pub steps: Vec<PreparedStep>,
}

/// Interacting split and the matching free split (same term list, V₀ = 0),
/// so both runs use the same circuit layout.
pub fn scenario_splits(params: &ModelParams) -> Result<(NonHermitianSplit, NonHermitianSplit)> {
    let split = split_hermitian_antihermitian(&params.scenario_hamiltonian()?);
    let free =
        split_hermitian_antihermitian(&params.free().scenario_hamiltonian()?).aligned_to(&split)?;
    Ok((split, free))
}

/// Builds circuits for steps 0..=N and evaluates their exact outcome
/// probabilities for each requested part.
pub fn prepare_series(
    params: &ModelParams,
    observable: Observable,
    parts: &[Part],
    backend: Backend,
) -> Result<PreparedSeries> {
    params.validate()?;
    let (split, free) = scenario_splits(params)?;
    let free = match observable {
        Observable::DeltaC => Some(free),
        Observable::C => None,
    };
    prepare_with(params, &split, free.as_ref(), parts, backend)
}

/// C(t) series for an arbitrary Pauli sum. Only `dt`, `steps` and the
/// scenario's time domain are taken from `params`.
pub fn prepare_custom(
    hamiltonian: &WeightedPauliSum,
    params: &ModelParams,
    parts: &[Part],
    backend: Backend,
) -> Result<PreparedSeries> {
    params.validate()?;
    if hamiltonian.num_qubits() != params.qubits {
        return Err(Error::Mismatch(format!(
            "Hamiltonian acts on {} qubits, configuration says {}",
            hamiltonian.num_qubits(),
            params.qubits
        )));
    }
    let split = split_hermitian_antihermitian(hamiltonian);
    prepare_with(params, &split, None, parts, backend)
}

fn prepare_with(
    params: &ModelParams,
    split: &NonHermitianSplit,
    free: Option<&NonHermitianSplit>,
    parts: &[Part],
    backend: Backend,
) -> Result<PreparedSeries> {
    if parts.is_empty() {
        return Err(Error::InvalidParameter(
            "no Hadamard-test part requested".into(),
        ));
    }
    let mut parts = parts.to_vec();
    parts.sort_by_key(|p| *p == Part::Imaginary);
    parts.dedup();
    // Fail on the largest circuit before any statevector work.
    if backend == Backend::Faithful {
        let last = assemble_for(split, params)?;
        if last.width() > STATEVECTOR_QUBIT_LIMIT {
            return Err(Error::Capacity {
                what: "faithful backend",
                required: last.width(),
                limit: STATEVECTOR_QUBIT_LIMIT,
            });
        }
    }
    let observable = match free {
        Some(_) => Observable::DeltaC,
        None => Observable::C,
    };
    let mut steps = Vec::with_capacity(params.steps + 1);
    for k in 0..=params.steps {
        let pk = ModelParams {
            steps: k,
            ..*params
        };
        let ec = assemble_for(split, &pk)?;
        let kappa = ec.trace_scale();
        let runs = match free {
            None => vec![PreparedRun::new(
                &ec,
                kappa,
                RUN_INTERACTING,
                &parts,
                backend,
            )?],
            Some(free) => {
                let ec0 = assemble_for(free, &pk)?;
                let kappa0 = ec0.trace_scale();
                if ec.circuit == ec0.circuit {
                    vec![PreparedRun::new(
                        &ec,
                        kappa - kappa0,
                        RUN_SHARED,
                        &parts,
                        backend,
                    )?]
                } else {
                    vec![
                        PreparedRun::new(&ec, kappa, RUN_INTERACTING, &parts, backend)?,
                        PreparedRun::new(&ec0, -kappa0, RUN_FREE, &parts, backend)?,
                    ]
                }
            }
        };
        steps.push(PreparedStep {
            step: k,
            time: pk.time(k),
            runs,
        });
    }
    Ok(PreparedSeries {
        params: *params,
        observable,
        backend,
        parts,
        steps,
    })
}

impl PreparedSeries {
    /// Weighted estimates for every step under one sampling plan and seed.
    pub fn step_runs(&self, sampling: Sampling, seed: u64) -> Result<Vec<StepRun>> {
        sampling.validate()?;
        self.steps
            .iter()
            .map(|s| {
                let terms = s
                    .runs
                    .iter()
                    .map(|r| r.sample(s.step, s.time, sampling, self.backend, seed))
                    .collect::<Result<Vec<_>>>()?;
                Ok(StepRun {
                    step: s.step,
                    time: s.time,
                    terms,
                })
            })
            .collect()
    }

    /// Rescaled series without oracle columns.
    pub fn sample(&self, sampling: Sampling, seed: u64) -> Result<IcfSeries> {
        let rows = rescale_icf(&self.step_runs(sampling, seed)?)?;
        Ok(IcfSeries {
            params: self.params,
            observable: self.observable,
            sampling,
            backend: self.backend,
            seed,
            rows,
        })
    }

    pub fn times(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.time).collect()
    }
}

/// Which reference columns to fill.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleToggles {
    /// Spectral exact value.
    pub exact: bool,
    /// Dense Trotter product; fills the exact column only when `exact` is off.
    pub trotter: bool,
    /// Closed-form infinite-volume ΔC, where one exists for the scenario.
    pub analytic: bool,
}

impl Default for OracleToggles {
    fn default() -> Self {
        Self {
            exact: true,
            trotter: false,
            analytic: true,
        }
    }
}

/// Fills the reference columns of `series` in place.
pub fn attach_oracles(series: &mut IcfSeries, toggles: OracleToggles) -> Result<()> {
    let params = series.params;
    let times: Vec<f64> = series.rows.iter().map(|r| r.time).collect();
    let pick = |r: crate::oracle::OracleResult| match series.observable {
        Observable::DeltaC => r.delta_c,
        Observable::C => r.c,
    };
    let exact = if toggles.exact {
        pick(exact_icf(&params, &times)?)
    } else if toggles.trotter {
        pick(trotter_icf(&params)?)
    } else {
        None
    };
    if let Some(values) = exact {
        for (row, v) in series.rows.iter_mut().zip(values) {
            row.exact = Some(v);
        }
    }
    let domain = match params.scenario {
        Scenario::ImaginaryTime => Some(TimeDomain::Imaginary),
        Scenario::HermitianRealTime => Some(TimeDomain::Real),
        Scenario::NonHermitianRealTime => None,
    };
    if let (true, Observable::DeltaC, Some(domain)) = (toggles.analytic, series.observable, domain)
    {
        for row in &mut series.rows {
            row.analytic = Some(analytic_delta_c(
                params.mass,
                params.coupling,
                row.time,
                domain,
            )?);
        }
    }
    Ok(())
}

/// Reference columns for a [`prepare_custom`] series: the spectral trace
/// when `exact` is on, otherwise the Trotter product when `trotter` is.
pub fn attach_custom_oracles(
    series: &mut IcfSeries,
    hamiltonian: &WeightedPauliSum,
    toggles: OracleToggles,
) -> Result<()> {
    let p = series.params;
    let values = if toggles.exact {
        Some(custom_exact(
            hamiltonian,
            &p,
            &series.rows.iter().map(|r| r.time).collect::<Vec<_>>(),
        )?)
    } else if toggles.trotter {
        let split = split_hermitian_antihermitian(hamiltonian);
        trotter_reference(&split, p.dt, p.steps, p.scenario)?.c
    } else {
        None
    };
    if let Some(values) = values {
        for (row, v) in series.rows.iter_mut().zip(values) {
            row.exact = Some(v);
        }
    }
    Ok(())
}

fn custom_exact(h: &WeightedPauliSum, p: &ModelParams, times: &[f64]) -> Result<Vec<Complex64>> {
    if h.num_qubits() > ORACLE_QUBIT_LIMIT {
        return Err(Error::Capacity {
            what: "dense oracle",
            required: h.num_qubits(),
            limit: ORACLE_QUBIT_LIMIT,
        });
    }
    let m = h.to_matrix();
    let rate = if p.scenario.is_imaginary_time() {
        Complex64::new(-1.0, 0.0)
    } else {
        Complex64::new(0.0, -1.0)
    };
    times
        .iter()
        .map(|&t| {
            if t == 0.0 {
                Ok(Complex64::new(m.nrows() as f64, 0.0))
            } else {
                trace_exp(&m, rate * t)
            }
        })
        .collect()
}

/// Prepare, sample once and attach oracle columns.
pub fn run_series(
    params: &ModelParams,
    observable: Observable,
    parts: &[Part],
    sampling: Sampling,
    backend: Backend,
    seed: u64,
    toggles: OracleToggles,
) -> Result<IcfSeries> {
    let prepared = prepare_series(params, observable, parts, backend)?;
    let mut series = prepared.sample(sampling, seed)?;
    attach_oracles(&mut series, toggles)?;
    Ok(series)
}
