use super::fmt;
use crate::error::Result;
use crate::manifest::{emit, RunManifest};
use crate::{quantum_fidelity, ChannelArgs, Common};
use clap::Args;
use qthermal::channel::fidelity_finite;
use std::fmt::Write;

#[derive(Args, Debug)]
pub struct FidelityArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    /// Probe energies `a = n̄_S + 1/2`; the vacuum row a=0.5 is always included.
    #[arg(long, default_value = "0.5,1,2.5,10,100")]
    pub a: String,
    #[command(flatten)]
    pub common: Common,
}

pub fn run(args: &FidelityArgs) -> Result<()> {
    let pair = args.channel.pair()?;
    let mut grid = crate::grid::floats("a", &args.a)?;
    if !grid.contains(&0.5) {
        grid.insert(0, 0.5);
    }
    let mut csv = String::from("a,F\n");
    for &a in &grid {
        let _ = writeln!(csv, "{},{}", fmt(a), fmt(fidelity_finite(&pair, a)?));
    }
    let _ = writeln!(csv, "inf,{}", fmt(quantum_fidelity(&pair)?));
    let mut m = RunManifest::new("fidelity");
    args.channel.record(&mut m);
    m.param("a", grid.iter().map(|&a| fmt(a)).collect::<Vec<_>>().join(","));
    emit(args.common.out.as_deref(), &csv, &m)
}
