//! `qdiff`: command-line driver for the quantum diffusion workbench.
//!
//! Every run writes `result.json`, any CSV tables and `manifest.json` into the
//! output directory. Exit codes: 0 ok, 2 usage, 3 numeric budget exceeded,
//! 4 invariant violation, 1 I/O failure.

mod commands;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::mpsc;
use std::time::Duration;

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;

use commands::*;
use run::{resolve, write_error, write_run, CliError, CliResult, Common, Output};

#[derive(Parser, Debug)]
#[command(name = "qdiff", version, about = "Numerical workbench for weak-coupling quantum diffusion")]
struct Cli {
    /// Master seed; every random stream is derived from it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (default `qdiff-out/<subcommand>`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// JSON file with parameters; explicit flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Monte Carlo sample count (trials, particles or realizations).
    #[arg(long, global = true)]
    samples: Option<u64>,
    /// Wall-clock budget; exceeding it exits with code 3.
    #[arg(long, global = true)]
    budget_seconds: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Index classification and degree of a permutation.
    Perm(PermArgs),
    /// Momentum matrix M(pi), its inverse and a unimodularity check.
    Matrix(MatrixArgs),
    /// Histogram of degrees over all permutations of order n.
    Degrees(DegreesArgs),
    /// Monte Carlo value of a pairing graph.
    Val(ValArgs),
    /// Integration order for a pairing graph.
    Plan(PlanArgs),
    /// Power-counting bound against exact summation on a torus.
    PowerCount(PowerCountArgs),
    /// Empirical constants of the propagator inequalities.
    Bounds(BoundsArgs),
    /// Tabulated self-energy.
    SelfEnergy(SelfEnergyArgs),
    /// Geometric resummation, residue integral and delta families.
    MainTerm(MainTermArgs),
    /// Central limit statistics of rescaled sums.
    Clt(CltArgs),
    /// Green-Kubo coefficient of a correlated velocity chain.
    GreenKubo(GreenKuboArgs),
    /// Velocity jump process: Green-Kubo against the shell average.
    Jump(JumpArgs),
    /// Linear Boltzmann particle ensemble.
    Boltzmann(BoltzmannArgs),
    /// Disorder-averaged displacement in the Anderson model.
    Anderson(AndersonArgs),
    /// Wigner transform of an evolved lattice state.
    Wigner(WignerArgs),
    /// Finite Duhamel expansion against exact evolution.
    Duhamel(DuhamelArgs),
    /// Second-order Wigner terms in the kinetic scaling.
    LowOrder(LowOrderArgs),
}

fn job<P, A>(
    common: &Common,
    name: &'static str,
    args: &A,
    samples_key: Option<&str>,
    f: fn(&P) -> CliResult<Output>,
) -> CliResult<Box<dyn FnOnce(PathBuf) -> CliResult<Vec<String>> + Send>>
where
    P: Default + Serialize + DeserializeOwned + Send + 'static,
    A: Serialize,
{
    let resolved = resolve::<P, A>(common, args, samples_key)?;
    Ok(Box::new(move |out: PathBuf| {
        let output = f(&resolved.params)?;
        write_run(&out, name, &resolved, &output)?;
        Ok(output.violations)
    }))
}

fn name_of(c: &Command) -> &'static str {
    match c {
        Command::Perm(_) => "perm",
        Command::Matrix(_) => "matrix",
        Command::Degrees(_) => "degrees",
        Command::Val(_) => "val",
        Command::Plan(_) => "plan",
        Command::PowerCount(_) => "power-count",
        Command::Bounds(_) => "bounds",
        Command::SelfEnergy(_) => "self-energy",
        Command::MainTerm(_) => "main-term",
        Command::Clt(_) => "clt",
        Command::GreenKubo(_) => "green-kubo",
        Command::Jump(_) => "jump",
        Command::Boltzmann(_) => "boltzmann",
        Command::Anderson(_) => "anderson",
        Command::Wigner(_) => "wigner",
        Command::Duhamel(_) => "duhamel",
        Command::LowOrder(_) => "low-order",
    }
}

fn execute(cli: Cli) -> CliResult<(PathBuf, Vec<String>)> {
    let common = Common {
        seed: cli.seed,
        out: cli.out.clone(),
        config: cli.config.clone(),
        samples: cli.samples,
        budget_seconds: cli.budget_seconds,
    };
    let name = name_of(&cli.command);
    let out = common.out.clone().unwrap_or_else(|| PathBuf::from("qdiff-out").join(name));
    let c = &common;
    let work = match &cli.command {
        Command::Perm(a) => job(c, name, a, None, perm)?,
        Command::Matrix(a) => job(c, name, a, None, matrix)?,
        Command::Degrees(a) => job(c, name, a, None, degrees)?,
        Command::Val(a) => job(c, name, a, Some("samples"), val)?,
        Command::Plan(a) => job(c, name, a, None, plan)?,
        Command::PowerCount(a) => job(c, name, a, None, power_count_cmd)?,
        Command::Bounds(a) => job(c, name, a, None, bounds)?,
        Command::SelfEnergy(a) => job(c, name, a, None, self_energy)?,
        Command::MainTerm(a) => job(c, name, a, None, main_term)?,
        Command::Clt(a) => job(c, name, a, Some("trials"), clt)?,
        Command::GreenKubo(a) => job(c, name, a, Some("batches"), green_kubo)?,
        Command::Jump(a) => job(c, name, a, Some("trials"), jump)?,
        Command::Boltzmann(a) => job(c, name, a, Some("particles"), boltzmann)?,
        Command::Anderson(a) => job(c, name, a, Some("realizations"), anderson)?,
        Command::Wigner(a) => job(c, name, a, None, wigner_cmd)?,
        Command::Duhamel(a) => job(c, name, a, None, duhamel)?,
        Command::LowOrder(a) => job(c, name, a, Some("realizations"), low_order)?,
    };
    let budget = match common.budget_seconds {
        Some(b) if !(b > 0.0) || !b.is_finite() => {
            return Err(CliError::Usage(format!("budget must be a positive number of seconds, got {b}")))
        }
        b => b,
    };
    let (tx, rx) = mpsc::channel();
    let dir = out.clone();
    std::thread::spawn(move || {
        let _ = tx.send(work(dir));
    });
    let outcome = match budget {
        Some(b) => rx
            .recv_timeout(Duration::from_secs_f64(b))
            .map_err(|_| CliError::Budget(format!("run exceeded the budget of {b} s")))?,
        None => rx.recv().map_err(|_| CliError::Io("worker thread panicked".into()))?,
    };
    outcome.map(|v| (out, v))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("qdiff-out").join(name_of(&cli.command)));
    let err = match execute(cli) {
        Ok((dir, violations)) if violations.is_empty() => {
            println!("{}", dir.join("result.json").display());
            return ExitCode::SUCCESS;
        }
        Ok((_, violations)) => CliError::Invariant(violations.join("; ")),
        Err(e) => e,
    };
    write_error(&out, &err);
    eprintln!("{}", err.report());
    ExitCode::from(err.exit_code() as u8)
}
