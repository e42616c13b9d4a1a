use super::fmt;
use crate::error::{CliError, Result};
use crate::manifest::{emit, RunManifest};
use crate::{quantum_fidelity, ChannelArgs, Common, Kind};
use clap::{Args, ValueEnum};
use qthermal::bounds::{bounds_sweep, min_rel_probe_additive, min_rel_probe_uniform, ImageSpaceSpec};
use qthermal::channel::{fidelity_classical, fidelity_finite};
use qthermal::Execution;
use std::fmt::Write;

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Space {
    Uniform,
    Cpf,
    Bcpf,
}

#[derive(Args, Debug)]
pub struct BoundsArgs {
    #[arg(long, value_enum, default_value = "uniform")]
    pub space: Space,
    /// Pixel count.
    #[arg(long)]
    pub m: usize,
    /// Target count (cpf) or comma-separated target counts (bcpf).
    #[arg(long)]
    pub k: Option<String>,
    /// Probe copies per pixel: list and/or `start:stop[:step]` ranges.
    #[arg(long = "M")]
    pub copies: String,
    #[command(flatten)]
    pub channel: ChannelArgs,
    /// Finite probe energy for the quantum fidelity (default: infinite squeezing).
    #[arg(long)]
    pub a: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

fn space(args: &BoundsArgs) -> Result<ImageSpaceSpec> {
    let ks = || -> Result<Vec<usize>> {
        let k = args
            .k
            .as_deref()
            .ok_or_else(|| CliError::Usage("--k is required for cpf and bcpf spaces".into()))?;
        Ok(crate::grid::integers("k", k)?.into_iter().map(|k| k as usize).collect())
    };
    Ok(match args.space {
        Space::Uniform => ImageSpaceSpec::uniform(args.m)?,
        Space::Cpf => match ks()?.as_slice() {
            [k] => ImageSpaceSpec::cpf(args.m, *k)?,
            _ => return Err(CliError::Usage("--space cpf takes a single --k".into())),
        },
        Space::Bcpf => ImageSpaceSpec::bcpf(args.m, &ks()?)?,
    })
}

pub fn run(args: &BoundsArgs) -> Result<()> {
    let space = space(args)?;
    let copies = crate::grid::integers("M", &args.copies)?;
    let pair = args.channel.pair()?;
    let f_q = match args.a {
        Some(a) => fidelity_finite(&pair, a)?,
        None => quantum_fidelity(&pair)?,
    };
    let f_cl = fidelity_classical(&pair)?;
    let reports = bounds_sweep(&space, &copies, f_q, f_cl, Execution::Parallel)?;
    if let Some(w) = reports.first().and_then(|r| r.warning.as_ref()) {
        eprintln!("warning: {w}");
    }
    let mbar = match (args.channel.kind, args.a) {
        (Kind::Additive, None) => min_rel_probe_additive(pair.target.nu(), pair.background.nu())?,
        _ => min_rel_probe_uniform(f_q, f_cl)?,
    };
    let mut csv = String::from("M,q_lower,q_upper,cl_lower,mga,mpa\n");
    for r in &reports {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            r.copies,
            fmt(r.q_lower),
            fmt(r.q_upper),
            fmt(r.cl_lower),
            fmt(r.mga),
            fmt(r.mpa)
        );
    }
    let crossing = reports.iter().find(|r| r.mga > 0.0).map(|r| r.copies.to_string());
    let _ = writeln!(csv, "# mbar_adv={}", fmt(mbar));
    let _ = writeln!(csv, "# mga_positive_from_M={}", crossing.as_deref().unwrap_or("none"));

    let mut m = RunManifest::new("bounds");
    args.channel.record(&mut m);
    m.param("space", format!("{:?}", space.variant()).to_lowercase())
        .param("m", args.m)
        .param("M", &args.copies)
        .param("a", args.a.map(fmt).unwrap_or_else(|| "inf".into()))
        .param("F_q", fmt(f_q))
        .param("F_cl", fmt(f_cl));
    emit(args.common.out.as_deref(), &csv, &m)
}
