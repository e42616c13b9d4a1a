//! Classical-versus-quantum error regions as a function of probe copies.

use super::estimate::{estimate_classifier_error, Classifier, ErrorEstimate};
use super::noise::{NoiseDerivation, NoiseModel};
use super::Result;
use crate::bounds::pixel_error_bounds;
use crate::channel::{fidelity_choi_inf, fidelity_classical, EnvironmentPair};
use crate::exec::Execution;
use crate::sim::dataset::BinaryImageDataset;
use std::collections::HashMap;
use std::io::Write;

pub const CSV_HEADER: &str = "M,p_cl_low,p_cl_up,p_q_low,p_q_up,E_cl_L,E_cl_U,E_q_L,E_q_U,dE_min,dE_max,stderr_max";

#[derive(Debug, Clone, PartialEq)]
pub struct AdvantageRow {
    pub copies: u64,
    pub p_cl_low: f64,
    pub p_cl_up: f64,
    pub p_q_low: f64,
    pub p_q_up: f64,
    pub e_cl_lower: ErrorEstimate,
    pub e_cl_upper: ErrorEstimate,
    pub e_q_lower: ErrorEstimate,
    pub e_q_upper: ErrorEstimate,
    /// `E_cl^L − E_q^U`.
    pub de_min: f64,
    /// `E_cl^L − E_q^L`.
    pub de_max: f64,
    pub stderr_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdvantageConfig {
    pub trials: u32,
    pub seed: u64,
    pub exec: Execution,
    /// Replace all four flip probabilities by this value.
    pub p_override: Option<f64>,
}

/// Per-copy fidelities `(F_q, F_cl)` of a channel pair: infinite-energy Choi
/// states against vacuum probes.
pub fn channel_fidelities(pair: &EnvironmentPair) -> Result<(f64, f64)> {
    Ok((fidelity_choi_inf(pair)?.value, fidelity_classical(pair)?))
}

/// For every copy number, estimates the classifier error at the four
/// single-pixel error bounds (classical and quantum, lower and upper).
/// Identical flip probabilities share one estimate.
pub fn advantage_regions<C: Classifier + ?Sized>(
    classifier: &C,
    evaluation: &BinaryImageDataset,
    f_q: f64,
    f_cl: f64,
    copies: &[u64],
    config: &AdvantageConfig,
) -> Result<Vec<AdvantageRow>> {
    let mut cache: HashMap<u64, ErrorEstimate> = HashMap::new();
    let mut rows = Vec::with_capacity(copies.len());
    for &m in copies {
        let (mut p_cl_low, mut p_cl_up) = pixel_error_bounds(f_cl, m)?;
        let (mut p_q_low, mut p_q_up) = pixel_error_bounds(f_q, m)?;
        if let Some(p) = config.p_override {
            NoiseModel::flip(p)?;
            (p_cl_low, p_cl_up, p_q_low, p_q_up) = (p, p, p, p);
        }
        let mut estimate = |p: f64, derivation| -> Result<ErrorEstimate> {
            if let Some(e) = cache.get(&p.to_bits()) {
                return Ok(*e);
            }
            let noise = NoiseModel::flip(p)?.derived_as(derivation);
            let e = estimate_classifier_error(classifier, evaluation, &noise, config.trials, config.seed, config.exec)?;
            cache.insert(p.to_bits(), e);
            Ok(e)
        };
        let e_cl_lower = estimate(p_cl_low, NoiseDerivation::ClassicalLower)?;
        let e_cl_upper = estimate(p_cl_up, NoiseDerivation::ClassicalUpper)?;
        let e_q_lower = estimate(p_q_low, NoiseDerivation::QuantumLower)?;
        let e_q_upper = estimate(p_q_up, NoiseDerivation::QuantumUpper)?;
        let stderr_max = [e_cl_lower, e_cl_upper, e_q_lower, e_q_upper]
            .iter()
            .map(|e| e.stderr)
            .fold(0.0, f64::max);
        rows.push(AdvantageRow {
            copies: m,
            p_cl_low,
            p_cl_up,
            p_q_low,
            p_q_up,
            de_min: e_cl_lower.mean - e_q_upper.mean,
            de_max: e_cl_lower.mean - e_q_lower.mean,
            e_cl_lower,
            e_cl_upper,
            e_q_lower,
            e_q_upper,
            stderr_max,
        });
    }
    Ok(rows)
}

/// Shortest representation that parses back to the same `f64`; exponent
/// form outside `[1e-4, 1e15)`.
pub fn format_float(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn csv_row(row: &AdvantageRow) -> String {
    let fields = [
        row.p_cl_low,
        row.p_cl_up,
        row.p_q_low,
        row.p_q_up,
        row.e_cl_lower.mean,
        row.e_cl_upper.mean,
        row.e_q_lower.mean,
        row.e_q_upper.mean,
        row.de_min,
        row.de_max,
        row.stderr_max,
    ];
    let mut s = row.copies.to_string();
    for f in fields {
        s.push(',');
        s.push_str(&format_float(f));
    }
    s
}

pub fn write_csv<W: Write>(rows: &[AdvantageRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for row in rows {
        writeln!(out, "{}", csv_row(row))?;
    }
    Ok(())
}
