//! Hadamard-test probabilities and shot sampling.
//!
//! For each system basis state `α` the test ancilla is read out together
//! with every block ancilla. `P_α(0)` and `P_α(1)` are the probabilities of
//! the block ancillas all reading 0 with the test ancilla at 0 or 1; any other
//! outcome is discarded but still counts towards the shot total.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::block_encoding::EvolutionCircuit;
use crate::circuit::Gate;
use crate::error::{Error, Result};
use crate::statevector::{apply_circuit, basis_state, marginal_probability, StateVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Part {
    Real,
    Imaginary,
}

impl Part {
    fn tag(self) -> u64 {
        match self {
            Part::Real => 0,
            Part::Imaginary => 1,
        }
    }

    /// `+1` for `P(0) − P(1)`, `−1` for `P(1) − P(0)`.
    pub fn sign(self) -> f64 {
        match self {
            Part::Real => 1.0,
            Part::Imaginary => -1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    /// One statevector over every qubit of the circuit.
    Faithful,
    /// A `Γ + 2` qubit workspace; each block ancilla is projected onto `|0⟩`
    /// once its factor has been applied.
    Projected,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::Faithful => "faithful",
            Backend::Projected => "projected",
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "faithful" => Ok(Backend::Faithful),
            "projected" => Ok(Backend::Projected),
            _ => Err(Error::InvalidParameter(format!("unknown backend {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HadamardOutcome {
    pub alpha: usize,
    pub part: Part,
    pub p0: f64,
    pub p1: f64,
    pub p_other: f64,
}

impl HadamardOutcome {
    fn new(alpha: usize, part: Part, p0: f64, p1: f64) -> Self {
        Self {
            alpha,
            part,
            p0,
            p1,
            p_other: (1.0 - p0 - p1).max(0.0),
        }
    }

    /// `P(0) − P(1)` for the real part, `P(1) − P(0)` for the imaginary part.
    pub fn signed_difference(&self) -> f64 {
        self.part.sign() * (self.p0 - self.p1)
    }
}

fn check_alpha(ec: &EvolutionCircuit, alpha: usize) -> Result<()> {
    if alpha >> ec.system_qubits != 0 {
        return Err(Error::BasisOutOfRange {
            index: alpha,
            width: ec.system_qubits,
        });
    }
    Ok(())
}

/// Exact outcome probabilities from a full-width statevector.
pub fn hadamard_probabilities(
    ec: &EvolutionCircuit,
    alpha: usize,
    part: Part,
) -> Result<HadamardOutcome> {
    check_alpha(ec, alpha)?;
    let circuit = ec.hadamard_test_circuit(part == Part::Imaginary)?;
    let layout = circuit.layout();
    let psi = apply_circuit(
        &circuit,
        basis_state(layout.embed_system_index(alpha), circuit.width())?,
    )?;
    let mut readout = vec![ec.hadamard_ancilla];
    readout.extend(&ec.block_ancillas);
    let p0 = marginal_probability(&psi, &readout, 0);
    let p1 = marginal_probability(&psi, &readout, 1);
    Ok(HadamardOutcome::new(alpha, part, p0, p1))
}

/// Same probabilities as [`hadamard_probabilities`] on a `Γ + 2` qubit
/// workspace: test ancilla at 0, a single block-ancilla slot at 1, system
/// above. Each block ancilla's amplitude is projected onto `|0⟩` as soon as
/// the next one is needed. The result is unnormalized; the projected-away
/// weight is exactly `P_other`.
pub fn projected_backend(
    ec: &EvolutionCircuit,
    alpha: usize,
    part: Part,
) -> Result<HadamardOutcome> {
    check_alpha(ec, alpha)?;
    let full = ec.hadamard_test_circuit(part == Part::Imaginary)?;
    let layout = full.layout().clone();
    let n = ec.system_qubits;
    const TEST: usize = 0;
    const SLOT: usize = 1;
    let map = |q: usize| -> usize {
        if Some(q) == layout.hadamard_ancilla {
            TEST
        } else if layout.block_ancillas.contains(&q) {
            SLOT
        } else {
            2 + (q - layout.system.start)
        }
    };

    let mut psi = basis_state(alpha << 2, n + 2)?;
    let mut done = vec![false; layout.block_ancillas.len()];
    let mut current: Option<usize> = None;
    for gate in full.gates() {
        if let Some(b) = gate.qubits().find(|q| layout.block_ancillas.contains(q)) {
            if current != Some(b) {
                let slot_index = b - layout.block_ancillas.start;
                if done[slot_index] {
                    return Err(Error::AncillaReused(b));
                }
                if let Some(prev) = current {
                    psi.project_zero(SLOT);
                    done[prev - layout.block_ancillas.start] = true;
                }
                current = Some(b);
            }
        }
        let remapped = Gate {
            kind: gate.kind.clone(),
            targets: gate.targets.iter().map(|&q| map(q)).collect(),
            controls: gate.controls.iter().map(|&q| map(q)).collect(),
        };
        psi.apply_gate(&remapped);
    }
    psi.project_zero(SLOT);
    Ok(outcome_from_workspace(&psi, alpha, part))
}

fn outcome_from_workspace(psi: &StateVector, alpha: usize, part: Part) -> HadamardOutcome {
    let p0 = marginal_probability(psi, &[0, 1], 0b00);
    let p1 = marginal_probability(psi, &[0, 1], 0b01);
    HadamardOutcome::new(alpha, part, p0, p1)
}

/// Outcomes for every `α`, in order.
pub fn exact_outcomes(
    ec: &EvolutionCircuit,
    part: Part,
    backend: Backend,
) -> Result<Vec<HadamardOutcome>> {
    (0..1usize << ec.system_qubits)
        .into_par_iter()
        .map(|alpha| match backend {
            Backend::Faithful => hadamard_probabilities(ec, alpha, part),
            Backend::Projected => projected_backend(ec, alpha, part),
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Sampling {
    /// Exact probabilities; one deterministic "trial" with zero error.
    ShotFree,
    /// `shots` multinomial draws per basis state, repeated `trials` times.
    Shots { shots: u64, trials: usize },
}

impl Sampling {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Sampling::ShotFree => Ok(()),
            Sampling::Shots { shots, trials } => {
                if shots == 0 {
                    return Err(Error::InvalidParameter("shots must be at least 1".into()));
                }
                if trials == 0 {
                    return Err(Error::InvalidParameter("trials must be at least 1".into()));
                }
                Ok(())
            }
        }
    }

    pub fn shots(&self) -> Option<u64> {
        match *self {
            Sampling::ShotFree => None,
            Sampling::Shots { shots, .. } => Some(shots),
        }
    }

    pub fn trials(&self) -> usize {
        match *self {
            Sampling::ShotFree => 1,
            Sampling::Shots { trials, .. } => trials,
        }
    }
}

/// Identifies an independent random stream: one per run (interacting, free,
/// shared), part and step. Trials and basis states are mixed in below.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StreamKey {
    pub seed: u64,
    pub run: u64,
    pub part: Part,
    pub step: usize,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// ChaCha8 stream for one `(key, trial, α)` cell, independent of the order in
/// which cells are evaluated.
pub fn cell_rng(key: StreamKey, trial: usize, alpha: usize) -> ChaCha8Rng {
    let mut state = key.seed;
    for word in [
        key.run,
        key.part.tag(),
        key.step as u64,
        trial as u64,
        alpha as u64,
    ] {
        state = splitmix64(&mut state) ^ word;
    }
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}

fn binomial(rng: &mut ChaCha8Rng, n: u64, p: f64) -> u64 {
    let p = p.clamp(0.0, 1.0);
    if n == 0 || p == 0.0 {
        return 0;
    }
    if p == 1.0 {
        return n;
    }
    Binomial::new(n, p).expect("p in [0, 1]").sample(rng)
}

/// One multinomial draw over (outcome 0, outcome 1, discarded).
pub fn sample_counts(rng: &mut ChaCha8Rng, shots: u64, o: &HadamardOutcome) -> (u64, u64) {
    let k0 = binomial(rng, shots, o.p0);
    let rest = 1.0 - o.p0;
    let k1 = if rest > 0.0 {
        binomial(rng, shots - k0, o.p1 / rest)
    } else {
        0
    };
    (k0, k1)
}

/// Mean and standard error of one part of the trace.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartEstimate {
    pub mean: f64,
    pub se: f64,
}

/// Estimate of `Σ_α (P_α(0) − P_α(1))` (or the imaginary-part difference)
/// from precomputed outcomes.
pub fn sample_part(
    outcomes: &[HadamardOutcome],
    sampling: Sampling,
    key: StreamKey,
) -> Result<PartEstimate> {
    sampling.validate()?;
    let (shots, trials) = match sampling {
        Sampling::ShotFree => {
            let mean = outcomes
                .iter()
                .map(HadamardOutcome::signed_difference)
                .sum();
            return Ok(PartEstimate { mean, se: 0.0 });
        }
        Sampling::Shots { shots, trials } => (shots, trials),
    };
    let n = shots as f64;
    let sign = key.part.sign();
    let per_trial: Vec<(f64, f64)> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut value = 0.0;
            let mut plug_in_var = 0.0;
            for o in outcomes {
                let mut rng = cell_rng(key, trial, o.alpha);
                let (k0, k1) = sample_counts(&mut rng, shots, o);
                let (q0, q1) = (k0 as f64 / n, k1 as f64 / n);
                value += sign * (q0 - q1);
                plug_in_var += (q0 + q1 - (q0 - q1).powi(2)) / n;
            }
            (value, plug_in_var)
        })
        .collect();
    let t = trials as f64;
    let mean = per_trial.iter().map(|v| v.0).sum::<f64>() / t;
    let se = if trials >= 2 {
        let ss: f64 = per_trial.iter().map(|v| (v.0 - mean).powi(2)).sum();
        (ss / (t - 1.0) / t).sqrt()
    } else {
        // a single trial: multinomial variance of the observed frequencies
        per_trial[0].1.sqrt()
    };
    Ok(PartEstimate { mean, se })
}

/// Trace estimate at one step: the raw Hadamard-test sums, before any
/// normalization or scalar prefactor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEstimate {
    pub step: usize,
    pub time: f64,
    pub re: Option<PartEstimate>,
    pub im: Option<PartEstimate>,
    pub shots: Option<u64>,
    pub trials: usize,
    pub backend: Backend,
}

impl TraceEstimate {
    pub fn part(&self, part: Part) -> Option<PartEstimate> {
        match part {
            Part::Real => self.re,
            Part::Imaginary => self.im,
        }
    }
}

/// Runs both requested parts of the Hadamard test and samples them.
pub fn estimate_trace(
    ec: &EvolutionCircuit,
    parts: &[Part],
    sampling: Sampling,
    backend: Backend,
    seed: u64,
    run: u64,
) -> Result<TraceEstimate> {
    sampling.validate()?;
    let mut est = TraceEstimate {
        step: ec.steps,
        time: ec.steps as f64 * ec.dt,
        re: None,
        im: None,
        shots: sampling.shots(),
        trials: sampling.trials(),
        backend,
    };
    for &part in parts {
        let outcomes = exact_outcomes(ec, part, backend)?;
        let key = StreamKey {
            seed,
            run,
            part,
            step: ec.steps,
        };
        let e = sample_part(&outcomes, sampling, key)?;
        match part {
            Part::Real => est.re = Some(e),
            Part::Imaginary => est.im = Some(e),
        }
    }
    Ok(est)
}
