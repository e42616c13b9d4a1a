use super::fmt;
use crate::error::{CliError, Result};
use crate::manifest::{emit, RunManifest};
use crate::Common;
use clap::Args;
use qthermal::channel::{temperature_of, KELVIN_OFFSET};
use std::fmt::Write;

#[derive(Args, Debug)]
pub struct TempArgs {
    /// Wavelength in metres.
    #[arg(long, default_value_t = 1e-3)]
    pub lambda: f64,
    /// Mean photon numbers.
    #[arg(long, conflicts_with = "eps", required_unless_present = "eps")]
    pub nbar: Option<String>,
    /// Environment parameters ε = n̄ + 1/2.
    #[arg(long)]
    pub eps: Option<String>,
    #[command(flatten)]
    pub common: Common,
}

pub fn run(args: &TempArgs) -> Result<()> {
    let mut m = RunManifest::new("temp");
    m.param("lambda", fmt(args.lambda));
    let nbars: Vec<f64> = match (&args.nbar, &args.eps) {
        (Some(n), _) => {
            m.param("nbar", n);
            crate::grid::floats("nbar", n)?
        }
        (None, Some(e)) => {
            m.param("eps", e);
            crate::grid::floats("eps", e)?.into_iter().map(|e| e - 0.5).collect()
        }
        (None, None) => return Err(CliError::Usage("give --nbar or --eps".into())),
    };
    let mut csv = String::from("nbar,T_K,T_C\n");
    for nbar in nbars {
        let t = temperature_of(nbar, args.lambda)?;
        let _ = writeln!(csv, "{},{},{}", fmt(nbar), fmt(t), fmt(t - KELVIN_OFFSET));
    }
    emit(args.common.out.as_deref(), &csv, &m)
}
