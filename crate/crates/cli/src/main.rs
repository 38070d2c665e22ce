//! `qent`: construct, certify, search for and simulate maximally entangled
//! states.
//!
//! Exit status: 0 success, 1 negative verdict or unconverged search, 2 usage or
//! input error, 3 numerical failure.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};
use serde::Serialize;

use qent_core::catalog::{self, lookup};
use qent_core::certify::{certify_generators, marginals, FactorMarginal, DEFAULT_TOL};
use qent_core::generators::{sets_for, GeneratorChoice};
use qent_core::lambda::{self, Initial, SimConfig};
use qent_core::solver::{find_max_entangled, RestartOutcome, SolveOptions};
use qent_core::tensor::StateFile;
use qent_core::{Error, StateVector};

#[derive(Parser, Debug)]
#[command(name = "qent", version, about = "Maximal entanglement toolkit")]
struct Cli {
    /// Certification tolerance.
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Base seed for randomized commands.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a catalog state and write it as JSON.
    Construct {
        /// Catalog name, e.g. bell+, ghz-, eq12, two-qubit, spin1-III.
        name: String,
        /// Family parameter `key=value`; repeatable.
        #[arg(long = "param", value_name = "KEY=VALUE")]
        params: Vec<String>,
    },
    /// Certify a state file; prints a JSON report.
    Certify {
        state: PathBuf,
        /// pauli, spin, sun or auto (Pauli on qubits, spin elsewhere). Spin
        /// sets are incomplete above spin 1/2, so use sun to rule out
        /// states such as |0,0⟩ of two spin-1 factors.
        #[arg(long, default_value = "auto")]
        generators: GeneratorChoice,
    },
    /// Search for a maximally entangled state by multi-start descent.
    Solve {
        /// Comma-separated local dimensions.
        #[arg(long, value_delimiter = ',', required = true)]
        dims: Vec<usize>,
        #[arg(long, default_value = "sun")]
        generators: GeneratorChoice,
        #[arg(long, default_value_t = 10)]
        restarts: usize,
        #[arg(long)]
        max_iters: Option<usize>,
        /// Run restarts in parallel; results are unchanged.
        #[arg(long)]
        parallel: bool,
    },
    /// Integrate the Λ-atom master equation; writes the trajectory as CSV.
    Simulate { config: PathBuf },
    /// Von Neumann entropy of every single-factor reduced state.
    Entropy { state: PathBuf },
}

/// Failure carrying its exit status.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        let error = e.into();
        let numerical = matches!(
            error.downcast_ref::<Error>(),
            Some(Error::TraceDrift { .. } | Error::UnstableStep { .. } | Error::EmptySector(_))
        );
        Self { code: if numerical { 3 } else { 2 }, error }
    }
}

type Outcome = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: &Cli) -> Outcome {
    if !(cli.tol > 0.0 && cli.tol.is_finite()) {
        return Err(anyhow!("--tol must be positive, got {}", cli.tol).into());
    }
    match &cli.command {
        Command::Construct { name, params } => construct(cli, name, params),
        Command::Certify { state, generators } => certify(cli, state, *generators),
        Command::Solve { dims, generators, restarts, max_iters, parallel } => {
            let mut options = SolveOptions {
                restarts: *restarts,
                seed: cli.seed,
                parallel: *parallel,
                ..Default::default()
            };
            if let Some(m) = max_iters {
                options.max_iters = *m;
            }
            solve(cli, dims, *generators, &options)
        }
        Command::Simulate { config } => simulate(cli, config),
        Command::Entropy { state } => entropy(cli, state),
    }
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_state(path: &Path) -> anyhow::Result<StateVector> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    StateVector::from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

fn parse_params(raw: &[String]) -> anyhow::Result<BTreeMap<String, f64>> {
    raw.iter()
        .map(|kv| {
            let (k, v) = kv.split_once('=').ok_or_else(|| anyhow!("expected key=value, got `{kv}`"))?;
            let v: f64 = v.trim().parse().with_context(|| format!("parameter `{k}`"))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

fn construct(cli: &Cli, name: &str, raw: &[String]) -> Outcome {
    let params = parse_params(raw)?;
    let entry = lookup(name, &params).map_err(|e| match e {
        Error::UnknownState(_) => anyhow!("{e}; known states: {}", catalog::NAMES.join(", ")),
        other => other.into(),
    })?;
    let sets = sets_for(entry.state.space(), entry.generators)?;
    let report = certify_generators(&entry.state, &sets, cli.tol)?;
    let json = entry.state.to_json() + "\n";
    emit(cli.out.as_deref(), &json)?;
    let line = format!("residual {:e} ({:?} generators)", report.residual, entry.generators);
    if cli.out.is_some() {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
    Ok(0)
}

fn certify(cli: &Cli, path: &Path, choice: GeneratorChoice) -> Outcome {
    let state = read_state(path)?;
    let sets = sets_for(state.space(), choice)?;
    let report = certify_generators(&state, &sets, cli.tol)?;
    emit(cli.out.as_deref(), &(serde_json::to_string_pretty(&report)? + "\n"))?;
    Ok(if report.certified() { 0 } else { 1 })
}

#[derive(Serialize)]
struct SolveSummary<'a> {
    dims: &'a [usize],
    generators: GeneratorChoice,
    best_objective: f64,
    best_restart: usize,
    converged: bool,
    per_restart: &'a [RestartOutcome],
    state: StateFile,
}

fn solve(cli: &Cli, dims: &[usize], choice: GeneratorChoice, options: &SolveOptions) -> Outcome {
    let space = qent_core::CompositeSpace::new(dims.to_vec())?;
    let sets = sets_for(&space, choice)?;
    let result = find_max_entangled(dims, &sets, options)?;
    let summary = SolveSummary {
        dims,
        generators: choice,
        best_objective: result.best_objective,
        best_restart: result.best_restart,
        converged: result.converged,
        per_restart: &result.per_restart,
        state: result.best_state.to_file(),
    };
    println!("{}", serde_json::to_string_pretty(&summary)?);
    if let Some(p) = &cli.out {
        emit(Some(p), &(result.best_state.to_json() + "\n"))?;
    }
    Ok(if result.converged { 0 } else { 1 })
}

fn simulate(cli: &Cli, path: &Path) -> Outcome {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let config = SimConfig::from_json(&text).with_context(|| format!("config {}", path.display()))?;
    let run = lambda::evolve(&config, Initial::Default)?;
    emit(cli.out.as_deref(), &run.trajectory.to_csv())?;
    let last = run.trajectory.last().ok_or_else(|| anyhow!("empty trajectory"))?;
    let line = if config.atoms == 2 {
        format!("fidelity_final {} at t = {}", last.fidelity_final, last.t)
    } else {
        format!("fidelity_final undefined for {} atoms; t = {}", config.atoms, last.t)
    };
    if cli.out.is_some() {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
    Ok(0)
}

#[derive(Serialize)]
struct EntropyReport {
    dims: Vec<usize>,
    factors: Vec<FactorMarginal>,
}

fn entropy(cli: &Cli, path: &Path) -> Outcome {
    let state = read_state(path)?;
    if state.space().num_factors() < 2 {
        return Err(anyhow!("entropy needs at least two factors").into());
    }
    let report = EntropyReport {
        dims: state.dims().to_vec(),
        factors: marginals(&state),
    };
    emit(cli.out.as_deref(), &(serde_json::to_string_pretty(&report)? + "\n"))?;
    Ok(0)
}
