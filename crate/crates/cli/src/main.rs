//! `qthermal`: error bounds, fidelities, temperatures and classifier
//! simulations for thermal-image discrimination, as CSV.

mod commands;
mod config;
mod error;
mod grid;
mod manifest;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use error::{CliError, Result};
use qthermal::channel::{fidelity_choi_inf, FidelityMethod};
use qthermal::EnvironmentPair;
use std::path::PathBuf;
use std::time::Instant;

#[derive(Parser, Debug)]
#[command(
    name = "qthermal",
    version,
    about = "Quantum and classical bounds for thermal-image discrimination"
)]
struct Cli {
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Finite-energy, classical and infinite-energy fidelities of a channel pair.
    #[command(args_override_self = true)]
    Fidelity(commands::fidelity::FidelityArgs),
    /// Error-probability bounds and advantage over a grid of probe copies.
    #[command(args_override_self = true)]
    Bounds(commands::bounds::BoundsArgs),
    /// Monte Carlo classifier error at the single-pixel error bounds.
    #[command(args_override_self = true)]
    Simulate(commands::simulate::SimulateArgs),
    /// Temperature of a thermal mode from its mean photon number.
    #[command(args_override_self = true)]
    Temp(commands::temp::TempArgs),
}

/// Options every command accepts.
#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Write the CSV here and the manifest to `<out>.manifest`; without it
    /// the CSV goes to stdout and the manifest to stderr.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// `key=value` defaults; flags on the command line take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Additive,
    Thermal,
}

/// Background/target channel pair.
#[derive(Args, Debug, Clone)]
pub struct ChannelArgs {
    #[arg(long, value_enum)]
    pub kind: Kind,
    /// Target additive noise.
    #[arg(long = "nuT")]
    pub nu_t: Option<f64>,
    /// Background additive noise.
    #[arg(long = "nuB")]
    pub nu_b: Option<f64>,
    /// Common transmissivity (thermal kind).
    #[arg(long)]
    pub tau: Option<f64>,
    /// Target environment ε = n̄ + 1/2.
    #[arg(long = "epsT")]
    pub eps_t: Option<f64>,
    /// Background environment ε = n̄ + 1/2.
    #[arg(long = "epsB")]
    pub eps_b: Option<f64>,
}

fn required(name: &str, v: Option<f64>, kind: &str) -> Result<f64> {
    v.ok_or_else(|| CliError::Usage(format!("--{name} is required for --kind {kind}")))
}

impl ChannelArgs {
    pub fn pair(&self) -> Result<EnvironmentPair> {
        Ok(match self.kind {
            Kind::Additive => EnvironmentPair::additive(
                required("nuB", self.nu_b, "additive")?,
                required("nuT", self.nu_t, "additive")?,
            )?,
            Kind::Thermal => EnvironmentPair::thermal(
                required("tau", self.tau, "thermal")?,
                required("epsB", self.eps_b, "thermal")?,
                required("epsT", self.eps_t, "thermal")?,
            )?,
        })
    }

    pub fn record(&self, m: &mut manifest::RunManifest) {
        match self.kind {
            Kind::Additive => {
                m.param("kind", "additive");
                m.param("nuT", opt(self.nu_t)).param("nuB", opt(self.nu_b));
            }
            Kind::Thermal => {
                m.param("kind", "thermal");
                m.param("tau", opt(self.tau));
                m.param("epsT", opt(self.eps_t)).param("epsB", opt(self.eps_b));
            }
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(qthermal::sim::advantage::format_float).unwrap_or_default()
}

/// Infinite-energy Choi fidelity; an unconverged extrapolation without a
/// trusted closed form is an error.
pub fn quantum_fidelity(pair: &EnvironmentPair) -> Result<f64> {
    let inf = fidelity_choi_inf(pair)?;
    if inf.method == FidelityMethod::Extrapolated && !inf.converged() {
        return Err(CliError::NonConvergence(format!(
            "infinite-energy fidelity did not converge (last step {:e})",
            inf.extrapolation.step
        )));
    }
    for flag in &inf.flags {
        eprintln!("note: {flag:?}");
    }
    Ok(inf.value)
}

fn run() -> Result<()> {
    let args = config::expand(std::env::args_os().collect(), &Cli::command())?;
    let cli = Cli::try_parse_from(args).unwrap_or_else(|e| e.exit());
    let start = Instant::now();
    let threads = cli.threads;
    let result = qthermal::exec::with_threads(threads, move || match cli.command {
        Command::Fidelity(a) => commands::fidelity::run(&a),
        Command::Bounds(a) => commands::bounds::run(&a),
        Command::Simulate(a) => commands::simulate::run(&a),
        Command::Temp(a) => commands::temp::run(&a),
    });
    eprintln!("wall time: {:.3} s", start.elapsed().as_secs_f64());
    result
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
