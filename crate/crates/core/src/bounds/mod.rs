//! Error-probability bounds for discriminating thermal images.
//!
//! With prior `π = 1/|U|` over an image space `U` and per-pixel fidelity `F`
//! between the two environments after `M` probe copies, the ultimate lower
//! bound is `(π²/2) Σ_{i≠i'} F^{2M d(i,i')}` and the pretty-good-measurement
//! upper bound is `π Σ_{i≠i'} F^{M d(i,i')}`. On the full uniform space the
//! pixel-by-pixel Helstrom bound `1 − (1 − F^M/2)^m` is also available and
//! is always the tighter of the two.

pub mod functional;

use crate::exec::Execution;
pub use functional::{bcpf_functional, cpf_functional, cross_functional, hamming_functional_uniform, FunctionalError};
use functional::{ln_bcpf, ln_cpf, ln_uniform, validate_target_set, LnFactorials};

pub type Result<T> = std::result::Result<T, FunctionalError>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpaceVariant {
    Uniform,
    /// Exactly `k` target pixels.
    Cpf(usize),
    /// Any target count in the (sorted, distinct) set.
    Bcpf(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageSpaceSpec {
    m: usize,
    variant: SpaceVariant,
}

impl ImageSpaceSpec {
    pub fn uniform(m: usize) -> Result<Self> {
        Self::new(m, SpaceVariant::Uniform)
    }

    pub fn cpf(m: usize, k: usize) -> Result<Self> {
        Self::new(m, SpaceVariant::Cpf(k))
    }

    pub fn bcpf(m: usize, ks: &[usize]) -> Result<Self> {
        Self::new(m, SpaceVariant::Bcpf(ks.to_vec()))
    }

    pub fn new(m: usize, variant: SpaceVariant) -> Result<Self> {
        if m == 0 {
            return Err(FunctionalError::Domain("pixel count must be at least 1".into()));
        }
        let variant = match variant {
            SpaceVariant::Cpf(k) if k > m => return Err(FunctionalError::Domain(format!("k={k} exceeds m={m}"))),
            SpaceVariant::Bcpf(mut ks) => {
                validate_target_set(m, &ks)?;
                ks.sort_unstable();
                SpaceVariant::Bcpf(ks)
            }
            v => v,
        };
        Ok(Self { m, variant })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn variant(&self) -> &SpaceVariant {
        &self.variant
    }

    /// True when the space contains every `m`-bit pattern.
    pub fn is_full(&self) -> bool {
        match &self.variant {
            SpaceVariant::Uniform => true,
            SpaceVariant::Cpf(_) => self.m == 0,
            SpaceVariant::Bcpf(ks) => ks.len() == self.m + 1,
        }
    }

    /// `ln |U|`.
    pub fn ln_size(&self, lf: &LnFactorials) -> f64 {
        if self.is_full() {
            return self.m as f64 * std::f64::consts::LN_2;
        }
        match &self.variant {
            SpaceVariant::Cpf(k) => lf.ln_binom(self.m, *k),
            SpaceVariant::Bcpf(ks) => functional::ln_sum_exp(ks.iter().map(|&k| lf.ln_binom(self.m, k))),
            SpaceVariant::Uniform => unreachable!(),
        }
    }

    /// `ln Σ_{i≠i'} f^{d(i,i')}` over ordered pairs in the space.
    pub fn ln_pair_sum(&self, lf: &LnFactorials, ln_f: f64) -> f64 {
        if self.is_full() {
            return self.ln_size(lf) + ln_uniform(self.m, ln_f);
        }
        match &self.variant {
            SpaceVariant::Cpf(k) => lf.ln_binom(self.m, *k) + ln_cpf(lf, self.m, *k, ln_f),
            SpaceVariant::Bcpf(ks) => ln_bcpf(lf, self.m, ks, ln_f),
            SpaceVariant::Uniform => unreachable!(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpperBoundMethod {
    /// Independent Helstrom measurements on each pixel.
    Local,
    /// Pretty good measurement on the whole image.
    Pgm,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub m: usize,
    pub copies: u64,
    pub q_lower: f64,
    pub q_upper: f64,
    pub cl_lower: f64,
    /// Minimum guaranteed advantage, `cl_lower − q_upper`.
    pub mga: f64,
    /// Maximum potential advantage, `cl_lower − q_lower`.
    pub mpa: f64,
    pub upper_method: UpperBoundMethod,
    pub q_upper_pgm: f64,
    pub q_upper_local: Option<f64>,
    /// Relative copy number above which advantage is guaranteed.
    pub mbar_adv: f64,
    /// Set when the inputs violated `0 ≤ F_q ≤ F_cl ≤ 1`.
    pub warning: Option<String>,
}

fn clip(p: f64) -> f64 {
    if p.is_nan() {
        p
    } else {
        p.clamp(0.0, 1.0)
    }
}

fn ln_power(f: f64, copies: u64) -> f64 {
    copies as f64 * f.ln()
}

/// Ultimate lower bound `(π²/2) Σ F^{2M d}`.
fn lower_bound(space: &ImageSpaceSpec, lf: &LnFactorials, copies: u64, f: f64) -> f64 {
    let ln_size = space.ln_size(lf);
    let ln = -std::f64::consts::LN_2 - 2.0 * ln_size + space.ln_pair_sum(lf, ln_power(f, 2 * copies));
    clip(ln.exp())
}

fn pgm_upper_bound(space: &ImageSpaceSpec, lf: &LnFactorials, copies: u64, f: f64) -> f64 {
    let ln = -space.ln_size(lf) + space.ln_pair_sum(lf, ln_power(f, copies));
    clip(ln.exp())
}

/// `1 − (1 − F^M/2)^m`: every pixel read out by its own Helstrom measurement.
pub fn local_upper_bound(m: usize, copies: u64, f: f64) -> f64 {
    let h = ln_power(f, copies).exp() / 2.0;
    clip(-(m as f64 * (-h).ln_1p()).exp_m1())
}

fn check_fidelity(name: &str, f: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&f) {
        return Err(FunctionalError::Domain(format!("{name}={f} outside [0, 1]")));
    }
    Ok(())
}

/// Bounds for `copies` probes per pixel given the quantum (`f_q`) and
/// classical (`f_cl`) per-copy fidelities.
pub fn bounds(space: &ImageSpaceSpec, copies: u64, f_q: f64, f_cl: f64) -> Result<BoundReport> {
    let lf = LnFactorials::new(space.m());
    bounds_with(space, &lf, copies, f_q, f_cl)
}

fn bounds_with(space: &ImageSpaceSpec, lf: &LnFactorials, copies: u64, f_q: f64, f_cl: f64) -> Result<BoundReport> {
    if copies == 0 {
        return Err(FunctionalError::Domain("need at least one probe copy".into()));
    }
    check_fidelity("F_q", f_q)?;
    check_fidelity("F_cl", f_cl)?;
    let warning = (f_q > f_cl).then(|| format!("F_q={f_q} exceeds F_cl={f_cl}"));
    let q_lower = lower_bound(space, lf, copies, f_q);
    let cl_lower = lower_bound(space, lf, copies, f_cl);
    let q_upper_pgm = pgm_upper_bound(space, lf, copies, f_q);
    let q_upper_local = space.is_full().then(|| local_upper_bound(space.m(), copies, f_q));
    let (q_upper, upper_method) = match q_upper_local {
        Some(local) if local <= q_upper_pgm => (local, UpperBoundMethod::Local),
        _ => (q_upper_pgm, UpperBoundMethod::Pgm),
    };
    Ok(BoundReport {
        m: space.m(),
        copies,
        q_lower,
        q_upper,
        cl_lower,
        mga: cl_lower - q_upper,
        mpa: cl_lower - q_lower,
        upper_method,
        q_upper_pgm,
        q_upper_local,
        mbar_adv: min_rel_probe_uniform(f_q, f_cl)?,
        warning,
    })
}

/// [`bounds`] over a grid of copy numbers, in grid order.
pub fn bounds_sweep(
    space: &ImageSpaceSpec,
    copies: &[u64],
    f_q: f64,
    f_cl: f64,
    exec: Execution,
) -> Result<Vec<BoundReport>> {
    let lf = LnFactorials::new(space.m());
    exec.try_map(copies.len(), |i| bounds_with(space, &lf, copies[i], f_q, f_cl))
}

/// Uniform-space bounds after Bernoulli's inequality:
/// `m F^{2M} / 2^{m+1} ≤ p ≤ m F^M / 2`. These are the bounds whose
/// crossing defines [`min_rel_probe_uniform`].
pub fn uniform_bernoulli_bounds(m: usize, copies: u64, f: f64) -> (f64, f64) {
    let ln_m = (m as f64).ln();
    let lower = ln_m - (m as f64 + 1.0) * std::f64::consts::LN_2 + ln_power(f, 2 * copies);
    let upper = ln_m - std::f64::consts::LN_2 + ln_power(f, copies);
    (clip(lower.exp()), clip(upper.exp()))
}

/// Smallest relative copy number `M/m` beyond which the simplified
/// classical lower bound exceeds the simplified quantum upper bound:
/// `ln 2 / (2 ln F_cl − ln F_q)`, or `+∞` when the denominator is not
/// positive.
pub fn min_rel_probe_uniform(f_q: f64, f_cl: f64) -> Result<f64> {
    if !(f_q > 0.0 && f_q <= 1.0 && f_cl > 0.0 && f_cl <= 1.0) {
        return Err(FunctionalError::Domain(format!(
            "fidelities must lie in (0, 1], got F_q={f_q}, F_cl={f_cl}"
        )));
    }
    Ok(mbar_from_rate(2.0 * f_cl.ln() - f_q.ln()))
}

fn mbar_from_rate(d: f64) -> f64 {
    if d > 0.0 {
        std::f64::consts::LN_2 / d
    } else {
        f64::INFINITY
    }
}

/// [`min_rel_probe_uniform`] for additive-noise channels, written through
/// `1/F_q = 1 + Δ_q` and `1/F_cl = 1 + Δ_cl` to keep precision when the
/// two noises are close.
pub fn min_rel_probe_additive(nu_t: f64, nu_b: f64) -> Result<f64> {
    if !(nu_t > 0.0 && nu_b > 0.0) || !nu_t.is_finite() || !nu_b.is_finite() {
        return Err(FunctionalError::Domain(format!(
            "additive noises must be positive, got ({nu_t}, {nu_b})"
        )));
    }
    let g = (nu_t * nu_b).sqrt();
    let gap = (nu_b.sqrt() - nu_t.sqrt()).powi(2);
    let delta_q = gap / (2.0 * g);
    // √((ν_T+1)(ν_B+1)) − √(ν_T ν_B) − 1 without the cancellation
    let delta_cl = gap / (((nu_t + 1.0) * (nu_b + 1.0)).sqrt() + g + 1.0);
    Ok(mbar_from_rate(delta_q.ln_1p() - 2.0 * delta_cl.ln_1p()))
}

/// Bounds on the error of a single-pixel Helstrom measurement with `M`
/// copies: `(1 − √(1 − F^{2M}))/2 ≤ p ≤ F^M/2`.
pub fn pixel_error_bounds(f: f64, copies: u64) -> Result<(f64, f64)> {
    check_fidelity("F", f)?;
    if copies == 0 {
        return Err(FunctionalError::Domain("need at least one probe copy".into()));
    }
    let fm = ln_power(f, copies).exp();
    let g = fm * fm;
    let lower = g / (2.0 * (1.0 + (1.0 - g).sqrt()));
    Ok((lower, fm / 2.0))
}
