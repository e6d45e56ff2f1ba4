//! Configuration, orchestration and table output for the `icf` binary.
//!
//! Settings are layered: preset, then `key = value` lines from `--config`,
//! then command-line flags. Config keys are the long flag names without the
//! leading dashes.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, ValueEnum};
use icf_core::block_encoding::assemble_for;
use icf_core::estimator::{Backend, Part, Sampling};
use icf_core::icf::{
    attach_custom_oracles, attach_oracles, prepare_custom, prepare_series, scenario_splits,
    IcfSeries, Observable, OracleToggles,
};
use icf_core::model::{ModelParams, Scenario};
use icf_core::pauli::{split_hermitian_antihermitian, WeightedPauliSum};
use icf_core::qasm::to_qasm;
use serde::{Deserialize, Serialize};

pub const WORKERS_ENV: &str = "ICF_WORKERS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    Fig4,
    Fig6,
    Fig8,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackendChoice {
    Faithful,
    Projected,
    ShotFree,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PartChoice {
    Re,
    Im,
    Both,
}

impl PartChoice {
    fn parts(self) -> Vec<Part> {
        match self {
            PartChoice::Re => vec![Part::Real],
            PartChoice::Im => vec![Part::Imaginary],
            PartChoice::Both => vec![Part::Real, Part::Imaginary],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObservableChoice {
    DeltaC,
    C,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ScenarioChoice {
    ImaginaryTime,
    HermitianRealTime,
    NonHermitianRealTime,
}

impl From<ScenarioChoice> for Scenario {
    fn from(s: ScenarioChoice) -> Self {
        match s {
            ScenarioChoice::ImaginaryTime => Scenario::ImaginaryTime,
            ScenarioChoice::HermitianRealTime => Scenario::HermitianRealTime,
            ScenarioChoice::NonHermitianRealTime => Scenario::NonHermitianRealTime,
        }
    }
}

/// Command-line flags. Every field is optional so that presets and config
/// files can fill the gaps.
#[derive(Debug, Default, Parser)]
#[command(
    name = "icf",
    about = "Simulate integrated correlation functions with block-encoded circuits",
    args_override_self = true
)]
pub struct Args {
    /// key = value file; flags given on the command line take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    #[arg(long, value_enum)]
    pub scenario: Option<ScenarioChoice>,
    /// Number of system qubits Γ.
    #[arg(long)]
    pub gamma: Option<usize>,
    #[arg(long)]
    pub mass: Option<f64>,
    #[arg(long)]
    pub spacing: Option<f64>,
    /// Contact coupling V₀.
    #[arg(long, allow_negative_numbers = true)]
    pub coupling: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    /// Shots per basis state and trial.
    #[arg(long)]
    pub shots: Option<u64>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub backend: Option<BackendChoice>,
    /// Which Hadamard-test parts to measure.
    #[arg(long, value_enum)]
    pub part: Option<PartChoice>,
    #[arg(long, value_enum)]
    pub observable: Option<ObservableChoice>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Directory for OpenQASM files of the final step's circuits.
    #[arg(long)]
    pub export_qasm: Option<PathBuf>,
    /// Comma list from {exact, trotter, analytic}, or `none`.
    #[arg(long)]
    pub oracle: Option<String>,
    /// Pauli-sum text file; replaces the lattice Hamiltonian and measures C.
    #[arg(long)]
    pub hamiltonian: Option<PathBuf>,
    /// Use 1,000,000 shots for the fig8 preset instead of 100,000.
    #[arg(long)]
    pub million_shots: bool,
    /// Worker threads; defaults to ICF_WORKERS, then to all cores.
    #[arg(long, env = WORKERS_ENV)]
    pub workers: Option<usize>,
}

/// Fully resolved run settings.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub preset: Option<Preset>,
    pub params: ModelParams,
    pub observable: ObservableChoice,
    pub backend: BackendChoice,
    pub shots: Option<u64>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub part: PartChoice,
    pub oracle: OracleToggles,
    pub format: Format,
    pub hamiltonian: Option<PathBuf>,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub export_qasm: Option<PathBuf>,
    #[serde(skip)]
    pub workers: Option<usize>,
}

struct Defaults {
    scenario: Scenario,
    gamma: usize,
    mass: f64,
    spacing: f64,
    coupling: f64,
    dt: f64,
    steps: usize,
    shots: u64,
    trials: usize,
}

fn preset_defaults(preset: Option<Preset>, million: bool) -> Defaults {
    let base = Defaults {
        scenario: Scenario::ImaginaryTime,
        gamma: 1,
        mass: 1.0,
        spacing: 4.0,
        coupling: 2.0,
        dt: 0.2,
        steps: 10,
        shots: 10_000,
        trials: 10,
    };
    match preset {
        None => base,
        Some(Preset::Fig4) => Defaults {
            steps: 15,
            shots: 100_000,
            trials: 100,
            ..base
        },
        Some(Preset::Fig6) => Defaults {
            gamma: 2,
            spacing: 4.0 / 3.0,
            dt: 0.1,
            shots: 100_000,
            trials: 100,
            ..base
        },
        Some(Preset::Fig8) => Defaults {
            scenario: Scenario::NonHermitianRealTime,
            gamma: 2,
            spacing: 4.0 / 3.0,
            steps: 20,
            shots: if million { 1_000_000 } else { 100_000 },
            trials: 100,
            ..base
        },
    }
}

/// Parses `exact,trotter,analytic` style lists.
pub fn parse_oracle(list: &str) -> Result<OracleToggles> {
    let mut t = OracleToggles {
        exact: false,
        trotter: false,
        analytic: false,
    };
    for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match item {
            "exact" => t.exact = true,
            "trotter" => t.trotter = true,
            "analytic" => t.analytic = true,
            "none" => {}
            other => bail!("unknown oracle {other:?}; expected exact, trotter, analytic or none"),
        }
    }
    Ok(t)
}

/// Turns `key = value` lines into flag tokens. `#` starts a comment.
pub fn config_tokens(text: &str) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("config line {}: expected key = value, got {raw:?}", i + 1);
        };
        let (key, value) = (key.trim(), value.trim());
        if key == "config" {
            bail!(
                "config line {}: nested config files are not supported",
                i + 1
            );
        }
        if key == "million-shots" {
            match value {
                "true" => out.push("--million-shots".to_string()),
                "false" => {}
                _ => bail!("config line {}: million-shots must be true or false", i + 1),
            }
            continue;
        }
        out.push(format!("--{key}"));
        out.push(value.to_string());
    }
    Ok(out)
}

impl RunConfig {
    /// Parses an argument list (program name first), reading `--config` if
    /// given and letting explicit flags override it.
    pub fn from_args<I, S>(argv: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let argv: Vec<String> = argv.into_iter().map(Into::into).collect();
        let first = Args::try_parse_from(&argv)?;
        let args = match &first.config {
            None => first,
            Some(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading config {}", path.display()))?;
                let mut merged = vec![argv.first().cloned().unwrap_or_else(|| "icf".into())];
                merged.extend(config_tokens(&text)?);
                merged.extend(argv.iter().skip(1).cloned());
                Args::try_parse_from(&merged).context("in config file")?
            }
        };
        Self::from_parsed(args)
    }

    pub fn from_parsed(a: Args) -> Result<Self> {
        let d = preset_defaults(a.preset, a.million_shots);
        let scenario = a.scenario.map(Scenario::from).unwrap_or(d.scenario);
        let params = ModelParams::new(
            a.mass.unwrap_or(d.mass),
            a.spacing.unwrap_or(d.spacing),
            a.coupling.unwrap_or(d.coupling),
            a.gamma.unwrap_or(d.gamma),
            a.dt.unwrap_or(d.dt),
            a.steps.unwrap_or(d.steps),
            scenario,
        )?;
        let backend = a.backend.unwrap_or(BackendChoice::Projected);
        let sampled = backend != BackendChoice::ShotFree;
        if sampled && a.seed.is_none() {
            bail!("--seed is required for sampled runs (backend {backend:?})");
        }
        let part = a.part.unwrap_or(if scenario.is_imaginary_time() {
            PartChoice::Re
        } else {
            PartChoice::Both
        });
        let observable = match (&a.hamiltonian, a.observable) {
            (Some(_), Some(ObservableChoice::DeltaC)) => {
                bail!("a custom Hamiltonian has no free reference; use --observable c")
            }
            (Some(_), _) => ObservableChoice::C,
            (None, o) => o.unwrap_or(ObservableChoice::DeltaC),
        };
        if a.workers == Some(0) {
            bail!("worker count must be at least 1");
        }
        let oracle = match &a.oracle {
            Some(list) => parse_oracle(list)?,
            None => OracleToggles::default(),
        };
        Ok(RunConfig {
            preset: a.preset,
            params,
            observable,
            backend,
            shots: sampled.then_some(a.shots.unwrap_or(d.shots)),
            trials: sampled.then_some(a.trials.unwrap_or(d.trials)),
            seed: if sampled { a.seed } else { None },
            part,
            oracle,
            format: a.format.unwrap_or(Format::Csv),
            hamiltonian: a.hamiltonian,
            out: a.out,
            export_qasm: a.export_qasm,
            workers: a.workers,
        })
    }

    pub fn sampling(&self) -> Sampling {
        match (self.shots, self.trials) {
            (Some(shots), Some(trials)) => Sampling::Shots { shots, trials },
            _ => Sampling::ShotFree,
        }
    }

    pub fn core_backend(&self) -> Backend {
        match self.backend {
            BackendChoice::Faithful => Backend::Faithful,
            _ => Backend::Projected,
        }
    }

    fn core_observable(&self) -> Observable {
        match self.observable {
            ObservableChoice::DeltaC => Observable::DeltaC,
            ObservableChoice::C => Observable::C,
        }
    }

    fn custom_hamiltonian(&self) -> Result<Option<WeightedPauliSum>> {
        let Some(path) = &self.hamiltonian else {
            return Ok(None);
        };
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading Hamiltonian {}", path.display()))?;
        Ok(Some(WeightedPauliSum::parse_text(&text)?))
    }
}

/// Runs `f` on a pool of `workers` threads, or on rayon's global pool.
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(n) => Ok(rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()?
            .install(f)),
    }
}

/// Builds, samples and annotates the series described by `cfg`.
pub fn run_scenario(cfg: &RunConfig) -> Result<IcfSeries> {
    let custom = cfg.custom_hamiltonian()?;
    let parts = cfg.part.parts();
    with_workers(cfg.workers, || -> Result<IcfSeries> {
        let prepared = match &custom {
            Some(h) => prepare_custom(h, &cfg.params, &parts, cfg.core_backend())?,
            None => prepare_series(
                &cfg.params,
                cfg.core_observable(),
                &parts,
                cfg.core_backend(),
            )?,
        };
        let mut series = prepared.sample(cfg.sampling(), cfg.seed.unwrap_or(0))?;
        match &custom {
            Some(h) => attach_custom_oracles(&mut series, h, cfg.oracle)?,
            None => attach_oracles(&mut series, cfg.oracle)?,
        }
        Ok(series)
    })?
}

/// One output row; the CSV header is the field list in order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableRow {
    pub step: usize,
    pub time: f64,
    pub mean_re: Option<f64>,
    pub se_re: Option<f64>,
    pub mean_im: Option<f64>,
    pub se_im: Option<f64>,
    pub exact_re: Option<f64>,
    pub exact_im: Option<f64>,
    pub analytic_re: Option<f64>,
    pub analytic_im: Option<f64>,
}

pub const CSV_COLUMNS: [&str; 10] = [
    "step",
    "time",
    "mean_re",
    "se_re",
    "mean_im",
    "se_im",
    "exact_re",
    "exact_im",
    "analytic_re",
    "analytic_im",
];

#[derive(Serialize)]
struct JsonDoc<'a> {
    config: &'a RunConfig,
    seed: Option<u64>,
    rows: Vec<TableRow>,
}

pub fn table_rows(series: &IcfSeries) -> Vec<TableRow> {
    series
        .rows
        .iter()
        .map(|r| TableRow {
            step: r.step,
            time: r.time,
            mean_re: r.mean_re,
            se_re: r.se_re,
            mean_im: r.mean_im,
            se_im: r.se_im,
            exact_re: r.exact.map(|z| z.re),
            exact_im: r.exact.map(|z| z.im),
            analytic_re: r.analytic.map(|z| z.re),
            analytic_im: r.analytic.map(|z| z.im),
        })
        .collect()
}

/// Renders the series in the configured format.
pub fn emit_table(series: &IcfSeries, cfg: &RunConfig) -> Result<String> {
    let rows = table_rows(series);
    match cfg.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            if rows.is_empty() {
                w.write_record(CSV_COLUMNS)?;
            }
            for row in &rows {
                w.serialize(row)?;
            }
            Ok(String::from_utf8(w.into_inner()?)?)
        }
        Format::Json => {
            let doc = JsonDoc {
                config: cfg,
                seed: cfg.seed,
                rows,
            };
            Ok(serde_json::to_string_pretty(&doc)? + "\n")
        }
    }
}

/// QASM text for the final step's Hadamard-test circuits, keyed by file name.
pub fn qasm_files(cfg: &RunConfig) -> Result<Vec<(String, String)>> {
    let p = cfg.params;
    let mut circuits = Vec::new();
    match cfg.custom_hamiltonian()? {
        Some(h) => {
            let split = split_hermitian_antihermitian(&h);
            circuits.push(("custom", assemble_for(&split, &p)?));
        }
        None => {
            let (split, free) = scenario_splits(&p)?;
            circuits.push(("interacting", assemble_for(&split, &p)?));
            if cfg.observable == ObservableChoice::DeltaC {
                circuits.push(("free", assemble_for(&free, &p)?));
            }
        }
    }
    let mut files = Vec::new();
    for (name, ec) in circuits {
        for part in cfg.part.parts() {
            let tag = match part {
                Part::Real => "re",
                Part::Imaginary => "im",
            };
            let c = ec.hadamard_test_circuit(part == Part::Imaginary)?;
            files.push((format!("{name}_step{}_{tag}.qasm", p.steps), to_qasm(&c)?));
        }
    }
    Ok(files)
}

// Write to a sibling temporary file and rename, so a failed run never
// leaves a truncated file behind.
fn write_atomic(path: &Path, content: &str) -> Result<()> {
    use std::io::Write;
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating a temporary file in {}", dir.display()))?;
    tmp.write_all(content.as_bytes())?;
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Everything a run produces, computed before anything is written.
pub struct RunOutput {
    pub series: IcfSeries,
    pub table: String,
    pub qasm: Vec<(String, String)>,
}

pub fn prepare_output(cfg: &RunConfig) -> Result<RunOutput> {
    let series = run_scenario(cfg)?;
    let table = emit_table(&series, cfg)?;
    let qasm = match cfg.export_qasm {
        Some(_) => qasm_files(cfg)?,
        None => Vec::new(),
    };
    Ok(RunOutput {
        series,
        table,
        qasm,
    })
}

/// Writes the table (or returns it for standard output) and any QASM files.
pub fn write_output(cfg: &RunConfig, out: &RunOutput) -> Result<Option<String>> {
    if let Some(dir) = &cfg.export_qasm {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for (name, text) in &out.qasm {
            write_atomic(&dir.join(name), text)?;
        }
    }
    match &cfg.out {
        Some(path) => {
            write_atomic(path, &out.table)?;
            Ok(None)
        }
        None => Ok(Some(out.table.clone())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(args: &[&str]) -> Result<RunConfig> {
        RunConfig::from_args(std::iter::once("icf").chain(args.iter().copied()))
    }

    #[test]
    fn presets_pin_parameters() {
        let c = cfg(&["--preset", "fig4", "--seed", "1"]).unwrap();
        assert_eq!(
            (
                c.params.qubits,
                c.params.spacing,
                c.params.dt,
                c.params.steps
            ),
            (1, 4.0, 0.2, 15)
        );
        assert_eq!(
            c.sampling(),
            Sampling::Shots {
                shots: 100_000,
                trials: 100
            }
        );
        let c = cfg(&["--preset", "fig8", "--seed", "1", "--million-shots"]).unwrap();
        assert_eq!(c.params.scenario, Scenario::NonHermitianRealTime);
        assert_eq!(c.shots, Some(1_000_000));
        assert_eq!(c.part, PartChoice::Both);
        let c = cfg(&["--preset", "fig6", "--seed", "1", "--steps", "3"]).unwrap();
        assert_eq!((c.params.qubits, c.params.dt, c.params.steps), (2, 0.1, 3));
    }

    #[test]
    fn sampled_runs_need_a_seed() {
        assert!(cfg(&["--preset", "fig4"]).is_err());
        let c = cfg(&["--preset", "fig4", "--backend", "shot-free"]).unwrap();
        assert_eq!(c.sampling(), Sampling::ShotFree);
        assert_eq!(c.seed, None);
    }

    #[test]
    fn config_file_is_overridden_by_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        fs::write(
            &path,
            "# fig6-like\npreset = fig6\nsteps = 4\nseed = 9\ncoupling = -1.5\noracle = exact\n",
        )
        .unwrap();
        let c = cfg(&["--config", path.to_str().unwrap(), "--steps", "2"]).unwrap();
        assert_eq!(c.params.steps, 2);
        assert_eq!(c.params.coupling, -1.5);
        assert_eq!(c.seed, Some(9));
        assert!(c.oracle.exact && !c.oracle.analytic);
    }

    #[test]
    fn bad_config_lines_are_reported() {
        assert!(config_tokens("steps 4").is_err());
        assert!(config_tokens("config = x").is_err());
        assert_eq!(
            config_tokens("million-shots = true\n\n gamma=2 # two").unwrap(),
            ["--million-shots", "--gamma", "2"]
        );
        assert!(parse_oracle("exact,bogus").is_err());
    }

    #[test]
    fn capacity_errors_name_the_limit() {
        let c = cfg(&[
            "--backend",
            "faithful",
            "--gamma",
            "2",
            "--steps",
            "12",
            "--seed",
            "1",
            "--oracle",
            "none",
        ])
        .unwrap();
        let err = run_scenario(&c).unwrap_err().to_string();
        assert!(err.contains("limit of 30"), "{err}");
    }

    #[test]
    fn step_zero_row_and_disabled_columns() {
        let c = cfg(&["--backend", "shot-free", "--steps", "2", "--oracle", "none"]).unwrap();
        let text = emit_table(&run_scenario(&c).unwrap(), &c).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_COLUMNS.join(","));
        // κ − κ₀ = 0 at step 0 fixes both components.
        assert_eq!(lines.next().unwrap(), "0,0.0,0.0,0.0,0.0,0.0,,,,");
        let step1: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(step1.len(), 10);
        assert!(step1[2].parse::<f64>().unwrap() < 0.0);
        assert!(step1[4..].iter().all(|f| f.is_empty()));
    }

    #[test]
    fn qasm_export_lists_runs_and_parts() {
        let c = cfg(&[
            "--preset",
            "fig8",
            "--backend",
            "shot-free",
            "--steps",
            "1",
            "--export-qasm",
            "q",
        ])
        .unwrap();
        let names: Vec<String> = qasm_files(&c).unwrap().into_iter().map(|f| f.0).collect();
        assert_eq!(
            names,
            [
                "interacting_step1_re.qasm",
                "interacting_step1_im.qasm",
                "free_step1_re.qasm",
                "free_step1_im.qasm"
            ]
        );
    }
}
