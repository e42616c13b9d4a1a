//! Phase-insensitive Gaussian channels and the fidelities between their
//! output states.
//!
//! A channel is described by a transmissivity or gain `τ ≥ 0` and an induced
//! noise `ν` in shot-noise units. For `τ ≠ 1` the noise is also written as
//! `ν = ε |1 − τ|` with `ε = n̄ + 1/2`; additive-noise channels (`τ = 1`)
//! store `ν` directly since `ε` is undefined there.

use crate::gaussian::{gaussian_fidelity, CovarianceMatrix, GaussianError};
use nalgebra::DMatrix;
use thiserror::Error;

/// Slack on `ν ≥ |1 − τ|/2`.
pub const CHANNEL_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("non-physical channel: {0}")]
    NonPhysicalChannel(String),
    #[error("background and target transmissivities differ ({0} vs {1})")]
    TransmissivityMismatch(f64, f64),
    #[error("domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    Gaussian(#[from] GaussianError),
}

pub type Result<T> = std::result::Result<T, ChannelError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChannelKind {
    Loss,
    Additive,
    Amplifier,
}

impl ChannelKind {
    pub fn is_thermal(self) -> bool {
        self != ChannelKind::Additive
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSpec {
    tau: f64,
    nu: f64,
}

impl ChannelSpec {
    pub fn new(tau: f64, nu: f64) -> Result<Self> {
        if !tau.is_finite() || !nu.is_finite() {
            return Err(ChannelError::NonPhysicalChannel(format!(
                "non-finite parameters tau={tau}, nu={nu}"
            )));
        }
        if tau < 0.0 {
            return Err(ChannelError::NonPhysicalChannel(format!(
                "negative transmissivity {tau}"
            )));
        }
        let floor = (1.0 - tau).abs() / 2.0;
        if nu < floor - CHANNEL_TOL || nu < 0.0 {
            return Err(ChannelError::NonPhysicalChannel(format!(
                "noise {nu} below the minimum {floor} for tau={tau}"
            )));
        }
        Ok(Self { tau, nu: nu.max(floor) })
    }

    /// Thermal-loss (`τ < 1`) or thermal-amplifier (`τ > 1`) channel with
    /// environment `ε = n̄ + 1/2`.
    pub fn thermal(tau: f64, epsilon: f64) -> Result<Self> {
        if tau == 1.0 {
            return Err(ChannelError::Domain(
                "epsilon is undefined at tau = 1; use an additive channel".into(),
            ));
        }
        if !(epsilon >= 0.5 - CHANNEL_TOL) {
            return Err(ChannelError::NonPhysicalChannel(format!("epsilon {epsilon} below 1/2")));
        }
        Self::new(tau, epsilon.max(0.5) * (1.0 - tau).abs())
    }

    pub fn additive(nu: f64) -> Result<Self> {
        Self::new(1.0, nu)
    }

    pub fn identity() -> Self {
        Self { tau: 1.0, nu: 0.0 }
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn kind(&self) -> ChannelKind {
        if self.tau < 1.0 {
            ChannelKind::Loss
        } else if self.tau > 1.0 {
            ChannelKind::Amplifier
        } else {
            ChannelKind::Additive
        }
    }

    /// `ε = ν / |1 − τ|`, or `None` for additive channels.
    pub fn epsilon(&self) -> Option<f64> {
        match self.kind() {
            ChannelKind::Additive => None,
            _ => Some(self.nu / (1.0 - self.tau).abs()),
        }
    }

    /// Mean thermal photon number of the environment, `ε − 1/2`.
    pub fn nbar(&self) -> Option<f64> {
        self.epsilon().map(|e| e - 0.5)
    }

    /// Noise above the quantum-limited floor, `ν − |1 − τ|/2`.
    pub fn excess_noise(&self) -> f64 {
        self.nu - (1.0 - self.tau).abs() / 2.0
    }
}

/// Background and target channels of a thermal image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvironmentPair {
    pub background: ChannelSpec,
    pub target: ChannelSpec,
}

impl EnvironmentPair {
    pub fn new(background: ChannelSpec, target: ChannelSpec) -> Result<Self> {
        if background.tau != target.tau {
            return Err(ChannelError::TransmissivityMismatch(background.tau, target.tau));
        }
        Ok(Self { background, target })
    }

    pub fn thermal(tau: f64, eps_background: f64, eps_target: f64) -> Result<Self> {
        Self::new(
            ChannelSpec::thermal(tau, eps_background)?,
            ChannelSpec::thermal(tau, eps_target)?,
        )
    }

    pub fn additive(nu_background: f64, nu_target: f64) -> Result<Self> {
        Self::new(ChannelSpec::additive(nu_background)?, ChannelSpec::additive(nu_target)?)
    }

    pub fn tau(&self) -> f64 {
        self.background.tau
    }

    pub fn kind(&self) -> ChannelKind {
        self.background.kind()
    }
}

/// Output of a two-mode squeezed vacuum with `a = n̄_S + 1/2` whose signal
/// mode went through `ch`. Ordering (idler q, idler p, signal q, signal p).
pub fn choi_cm(ch: &ChannelSpec, a: f64) -> Result<CovarianceMatrix> {
    if !(a >= 0.5) || !a.is_finite() {
        return Err(ChannelError::Domain(format!("energy a={a} must be >= 1/2")));
    }
    let b = a * ch.tau + ch.nu;
    let c = (ch.tau * (a * a - 0.25)).sqrt();
    #[rustfmt::skip]
    let m = DMatrix::from_row_slice(4, 4, &[
        a,   0.0, c,   0.0,
        0.0, a,   0.0, -c,
        c,   0.0, b,   0.0,
        0.0, -c,  0.0, b,
    ]);
    CovarianceMatrix::new(m).map_err(|e| match e {
        GaussianError::NonPhysical(v) => {
            ChannelError::NonPhysicalChannel(format!("Choi matrix has symplectic eigenvalue {v} at a={a}"))
        }
        other => other.into(),
    })
}

/// Vacuum sent through the channel: `(τ/2 + ν) I`.
pub fn classical_output_cm(ch: &ChannelSpec) -> Result<CovarianceMatrix> {
    Ok(CovarianceMatrix::thermal(&[ch.tau / 2.0 + ch.nu])?)
}

/// Fidelity between the vacuum-probe outputs of the two channels.
pub fn fidelity_classical(pair: &EnvironmentPair) -> Result<f64> {
    Ok(gaussian_fidelity(
        &classical_output_cm(&pair.target)?,
        &classical_output_cm(&pair.background)?,
    )?)
}

/// Fidelity between the channels' outputs on a two-mode squeezed probe of
/// energy `a`.
///
/// Both Choi matrices are first moved by the two-mode squeezer that puts one
/// of them in Williamson form. The fidelity is invariant under that map,
/// and in the new frame no entry of size `a` is ever subtracted from another,
/// so large energies keep full precision. When the reference channel is
/// quantum limited its Williamson form has a pure mode; that mode is
/// projected out exactly (see [`fidelity_against_pure_mode`]) because the
/// general formula has a square-root sensitivity to rounding there.
pub fn fidelity_finite(pair: &EnvironmentPair, a: f64) -> Result<f64> {
    let frame = WilliamsonFrame::new(pair, a)?;
    match frame.pure_mode {
        Some(mode) => {
            let mixed = if mode == 0 { frame.y } else { frame.x };
            fidelity_against_pure_mode(mode, mixed, &frame.other)
        }
        None => {
            let (vt, vb) = frame.into_pair()?;
            Ok(gaussian_fidelity(&vt, &vb)?)
        }
    }
}

struct WilliamsonFrame {
    x: f64,
    y: f64,
    other: DMatrix<f64>,
    swapped: bool,
    pure_mode: Option<usize>,
}

impl WilliamsonFrame {
    /// The reference is the background unless only the target is quantum
    /// limited. With blocks `[[aI, cZ], [cZ, bI]]` the map is a two-mode
    /// squeezer with `tanh 2r = 2c/(a+b)`. The other channel differs only by
    /// `Δν` on the signal block, which maps to `Δν [[s²I, −scZ], [−scZ, c²I]]`.
    fn new(pair: &EnvironmentPair, a: f64) -> Result<Self> {
        let target = choi_cm(&pair.target, a)?;
        let background = choi_cm(&pair.background, a)?;
        let tau = pair.tau();
        let c = (tau * (a * a - 0.25)).sqrt();
        if c == 0.0 {
            let vb = background.matrix();
            return Ok(Self {
                x: vb[(0, 0)],
                y: vb[(2, 2)],
                other: target.into_matrix(),
                swapped: false,
                pure_mode: None,
            });
        }
        let swapped = pair.target.excess_noise() == 0.0 && pair.background.excess_noise() != 0.0;
        let (reference, other) = if swapped {
            (&pair.target, &pair.background)
        } else {
            (&pair.background, &pair.target)
        };
        let nu = reference.nu;
        let b = a * tau + nu;
        // (a+b)² − 4c² and ab − c², expanded so nothing cancels
        let r2 = (a * (1.0 - tau)).powi(2) + 2.0 * a * (1.0 + tau) * nu + nu * nu + tau;
        let r = r2.sqrt();
        let det = a * nu + tau / 4.0;
        let (mut x, mut y) = if b >= a {
            let y = (r + (b - a)) / 2.0;
            (det / y, y)
        } else {
            let x = (r - (b - a)) / 2.0;
            (x, det / x)
        };
        let mut pure_mode = None;
        if reference.excess_noise() == 0.0 && other.nu != reference.nu {
            if x <= y {
                (x, y) = (0.5, 2.0 * det);
                pure_mode = Some(0);
            } else {
                (x, y) = (2.0 * det, 0.5);
                pure_mode = Some(1);
            }
        }
        let ch2 = ((a + b) / r + 1.0) / 2.0;
        let chsh = c / r;
        let sh2 = chsh * chsh / ch2;
        let d = other.nu - nu;
        #[rustfmt::skip]
        let vo = DMatrix::from_row_slice(4, 4, &[
            x + d * sh2, 0.0,         -d * chsh,   0.0,
            0.0,         x + d * sh2, 0.0,         d * chsh,
            -d * chsh,   0.0,         y + d * ch2, 0.0,
            0.0,         d * chsh,    0.0,         y + d * ch2,
        ]);
        Ok(Self {
            x,
            y,
            other: vo,
            swapped,
            pure_mode,
        })
    }

    /// `(target, background)` in the frame.
    fn into_pair(self) -> Result<(CovarianceMatrix, CovarianceMatrix)> {
        let vr = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![self.x, self.x, self.y, self.y]));
        let (vr, vo) = (CovarianceMatrix::new(vr)?, CovarianceMatrix::new(self.other)?);
        Ok(if self.swapped { (vr, vo) } else { (vo, vr) })
    }
}

/// Target and background Choi matrices after the symplectic map that sends
/// a reference channel's Choi matrix (the background, unless only the target
/// is quantum limited) to `diag(x, x, y, y)`.
pub fn choi_pair_in_williamson_frame(pair: &EnvironmentPair, a: f64) -> Result<(CovarianceMatrix, CovarianceMatrix)> {
    WilliamsonFrame::new(pair, a)?.into_pair()
}

/// Fidelity between `|0⟩⟨0| ⊗ τ_y` (pure mode at index `pure`, thermal
/// `y I` on the other) and the two-mode state with covariance `other`.
///
/// Only the vacuum component of the other state on the pure mode
/// contributes: it has weight `p = 1/√det(A + I/2)` and conditional
/// covariance `B − C (A + I/2)⁻¹ Cᵀ`, so `F = √p · F₁(y I, V')`.
pub fn fidelity_against_pure_mode(pure: usize, y: f64, other: &DMatrix<f64>) -> Result<f64> {
    let (p, q) = if pure == 0 { (0, 2) } else { (2, 0) };
    let a_blk = other.view((p, p), (2, 2)) + DMatrix::identity(2, 2) * 0.5;
    let b_blk = other.view((q, q), (2, 2)).into_owned();
    let c_blk = other.view((q, p), (2, 2)).into_owned();
    let det_a = a_blk[(0, 0)] * a_blk[(1, 1)] - a_blk[(0, 1)] * a_blk[(1, 0)];
    let a_inv = a_blk
        .try_inverse()
        .ok_or_else(|| ChannelError::Domain("singular vacuum projection".into()))?;
    let conditional = &b_blk - &c_blk * a_inv * c_blk.transpose();
    let conditional = CovarianceMatrix::new((&conditional + conditional.transpose()) * 0.5)?;
    let f1 = gaussian_fidelity(&CovarianceMatrix::thermal(&[y])?, &conditional)?;
    Ok((det_a.powf(-0.25) * f1).clamp(0.0, 1.0))
}

/// Closed-form fidelities. These are fast paths; the covariance-matrix
/// computations in the parent module are the reference.
pub mod closed_form {
    /// Infinite-energy Choi fidelity of two additive-noise channels,
    /// `2√(ν_T ν_B)/(ν_T + ν_B)`, evaluated as `1/(1 + Δ)` with
    /// `Δ = (√ν_T − √ν_B)²/(2√(ν_T ν_B))` so near-equal noises keep full
    /// precision in `1 − F`.
    pub fn additive_choi(nu_t: f64, nu_b: f64) -> f64 {
        let g = (nu_t * nu_b).sqrt();
        if g == 0.0 {
            return if nu_t == nu_b { 1.0 } else { 0.0 };
        }
        let delta = (nu_t.sqrt() - nu_b.sqrt()).powi(2) / (2.0 * g);
        (1.0 / (1.0 + delta)).clamp(0.0, 1.0)
    }

    /// Vacuum-probe fidelity of two additive-noise channels,
    /// `1/(√((ν_T+1)(ν_B+1)) − √(ν_T ν_B))`, with the denominator written as
    /// `1 + (√ν_T − √ν_B)²/(√((ν_T+1)(ν_B+1)) + √(ν_T ν_B) + 1)`.
    pub fn additive_classical(nu_t: f64, nu_b: f64) -> f64 {
        let outer = ((nu_t + 1.0) * (nu_b + 1.0)).sqrt();
        let delta = (nu_t.sqrt() - nu_b.sqrt()).powi(2) / (outer + (nu_t * nu_b).sqrt() + 1.0);
        (1.0 / (1.0 + delta)).clamp(0.0, 1.0)
    }

    /// Two-mode squeezed probe of energy `a` through additive-noise channels.
    pub fn additive_finite(a: f64, nu_t: f64, nu_b: f64) -> f64 {
        let num = 2.0 * a * (nu_t * nu_b).sqrt() + ((2.0 * a * nu_t + 1.0) * (2.0 * a * nu_b + 1.0)).sqrt();
        (num / (2.0 * a * (nu_t + nu_b) + 1.0)).clamp(0.0, 1.0)
    }

    /// Infinite-energy Choi fidelity of thermal-loss or amplifier channels
    /// with common `τ`. Depends on the environments only.
    pub fn thermal_choi(eps_t: f64, eps_b: f64) -> f64 {
        let root = ((4.0 * eps_t * eps_t - 1.0).max(0.0) * (4.0 * eps_b * eps_b - 1.0).max(0.0)).sqrt();
        let num = (4.0 * eps_t * eps_b + 1.0 + root).sqrt();
        (num / (std::f64::consts::SQRT_2 * (eps_t + eps_b))).clamp(0.0, 1.0)
    }

    /// Vacuum-probe fidelity of thermal-loss or amplifier channels.
    pub fn thermal_classical(tau: f64, eps_t: f64, eps_b: f64) -> f64 {
        let g = (1.0 - tau).abs();
        let alpha = 4.0 * eps_t * eps_b * g * g + 2.0 * (eps_t + eps_b) * tau * g + 1.0 + tau * tau;
        let beta = 2.0 * (tau + (eps_t + eps_b) * g);
        let f = ((alpha + beta).sqrt() + (alpha - beta).max(0.0).sqrt()) / beta;
        f.clamp(0.0, 1.0)
    }
}

/// Neville table for polynomial extrapolation to `x = 0`. Entry `k` of the
/// result is the order-`k` estimate built from the last `k + 1` points.
pub fn neville_to_zero(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    let mut row = ys.to_vec();
    let mut diag = vec![row[n - 1]];
    for level in 1..n {
        let next: Vec<f64> = (0..n - level)
            .map(|i| {
                let (x0, x1) = (xs[i], xs[i + level]);
                (x0 * row[i + 1] - x1 * row[i]) / (x0 - x1)
            })
            .collect();
        diag.push(next[next.len() - 1]);
        row = next;
    }
    diag
}

/// Number of doubling steps in the extrapolation grid.
pub const EXTRAPOLATION_POINTS: usize = 6;
/// Acceptance threshold between the two highest extrapolation orders.
pub const EXTRAPOLATION_TOL: f64 = 1e-8;
/// Largest tolerated gap between a closed form and the extrapolated value.
pub const CLOSED_FORM_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Extrapolation {
    /// Highest-order estimate of the `a → ∞` limit.
    pub value: f64,
    /// Gap between the two highest orders.
    pub step: f64,
    pub converged: bool,
    /// Energies at which the Choi fidelity was evaluated.
    pub grid: Vec<f64>,
    pub samples: Vec<f64>,
}

/// Extrapolates [`fidelity_finite`] to infinite energy in `x = 1/a`.
///
/// The grid starts at `a0 = clamp(10/s, 100, 1e4)`, with `s` the smallest
/// excess noise of the pair, and doubles [`EXTRAPOLATION_POINTS`] − 1 times.
/// Quantum-limited channels (`s = 0`) approach the limit non-analytically
/// and usually come back unconverged.
pub fn extrapolate_choi_fidelity(pair: &EnvironmentPair) -> Result<Extrapolation> {
    let s = pair.background.excess_noise().min(pair.target.excess_noise());
    let a0 = if s > 0.0 { (10.0 / s).clamp(100.0, 1e4) } else { 100.0 };
    let grid: Vec<f64> = (0..EXTRAPOLATION_POINTS)
        .map(|k| a0 * f64::powi(2.0, k as i32))
        .collect();
    let samples = grid
        .iter()
        .map(|&a| fidelity_finite(pair, a))
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = grid.iter().map(|a| 1.0 / a).collect();
    let diag = neville_to_zero(&xs, &samples);
    let value = diag[diag.len() - 1];
    let step = (value - diag[diag.len() - 2]).abs();
    Ok(Extrapolation {
        value: value.clamp(0.0, 1.0),
        step,
        converged: step < EXTRAPOLATION_TOL,
        grid,
        samples,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FidelityMethod {
    ClosedForm,
    Extrapolated,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FidelityFlag {
    /// The closed form failed its identical-channel anchor.
    ClosedFormDisabled { anchor_error: f64 },
    /// The closed form and a converged extrapolation disagree; the
    /// extrapolated value was returned.
    ConventionUnresolved { closed_form: f64, extrapolated: f64 },
    /// The extrapolation did not settle below the tolerance.
    Unconverged { step: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct InfiniteEnergyFidelity {
    pub value: f64,
    pub method: FidelityMethod,
    pub closed_form: Option<f64>,
    pub extrapolation: Extrapolation,
    pub flags: Vec<FidelityFlag>,
}

impl InfiniteEnergyFidelity {
    pub fn converged(&self) -> bool {
        self.extrapolation.converged
    }
}

fn closed_form_choi(pair: &EnvironmentPair) -> (fn(f64, f64) -> f64, f64, f64) {
    match pair.kind() {
        ChannelKind::Additive => (closed_form::additive_choi, pair.target.nu(), pair.background.nu()),
        _ => (
            closed_form::thermal_choi,
            pair.target.epsilon().expect("thermal channel"),
            pair.background.epsilon().expect("thermal channel"),
        ),
    }
}

/// Choi fidelity in the infinite-squeezing limit.
///
/// The closed form is checked against its identical-channel anchor and
/// against the large-`a` extrapolation of [`fidelity_finite`]. When both
/// are trustworthy and disagree by more than [`CLOSED_FORM_TOL`], the
/// extrapolated value wins and the result is flagged.
pub fn fidelity_choi_inf(pair: &EnvironmentPair) -> Result<InfiniteEnergyFidelity> {
    let (form, t, b) = closed_form_choi(pair);
    let mut flags = Vec::new();
    let anchor_error = (form(t, t) - 1.0).abs().max((form(b, b) - 1.0).abs());
    let closed = if anchor_error > 1e-12 {
        flags.push(FidelityFlag::ClosedFormDisabled { anchor_error });
        None
    } else {
        Some(form(t, b))
    };
    let extrapolation = extrapolate_choi_fidelity(pair)?;
    if !extrapolation.converged {
        flags.push(FidelityFlag::Unconverged {
            step: extrapolation.step,
        });
    }
    let (value, method) = match closed {
        Some(c) if extrapolation.converged && (c - extrapolation.value).abs() > CLOSED_FORM_TOL => {
            flags.push(FidelityFlag::ConventionUnresolved {
                closed_form: c,
                extrapolated: extrapolation.value,
            });
            (extrapolation.value, FidelityMethod::Extrapolated)
        }
        Some(c) => (c, FidelityMethod::ClosedForm),
        None => (extrapolation.value, FidelityMethod::Extrapolated),
    };
    Ok(InfiniteEnergyFidelity {
        value: value.clamp(0.0, 1.0),
        method,
        closed_form: closed,
        extrapolation,
        flags,
    })
}

const PLANCK: f64 = 6.626_070_15e-34;
const LIGHT_SPEED: f64 = 299_792_458.0;
const BOLTZMANN: f64 = 1.380_649e-23;

/// Temperature in kelvin of a thermal mode with mean photon number `nbar`
/// at wavelength `lambda` (metres), from the Bose-Einstein occupation.
pub fn temperature_of(nbar: f64, lambda: f64) -> Result<f64> {
    if !(nbar > 0.0) || !nbar.is_finite() {
        return Err(ChannelError::Domain(format!(
            "mean photon number must be positive, got {nbar}"
        )));
    }
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(ChannelError::Domain(format!(
            "wavelength must be positive, got {lambda}"
        )));
    }
    Ok(PLANCK * LIGHT_SPEED / (BOLTZMANN * lambda * (1.0 / nbar).ln_1p()))
}

pub const KELVIN_OFFSET: f64 = 273.15;

#[cfg(test)]
mod tests {
    use super::*;

    fn approx(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn kinds_and_epsilon() {
        let ch = ChannelSpec::thermal(0.99, 18.5).unwrap();
        assert_eq!(ch.kind(), ChannelKind::Loss);
        assert!(approx(ch.nu(), 0.185, 1e-15));
        assert!(approx(ch.epsilon().unwrap(), 18.5, 1e-12));
        assert_eq!(ChannelSpec::additive(0.01).unwrap().kind(), ChannelKind::Additive);
        assert_eq!(ChannelSpec::thermal(2.0, 1.0).unwrap().kind(), ChannelKind::Amplifier);
        assert_eq!(ChannelSpec::additive(0.01).unwrap().epsilon(), None);
    }

    #[test]
    fn rejects_bad_channels() {
        assert!(ChannelSpec::new(0.5, 0.1).is_err());
        assert!(ChannelSpec::new(-0.1, 1.0).is_err());
        assert!(ChannelSpec::additive(-1e-3).is_err());
        assert!(ChannelSpec::thermal(1.0, 2.0).is_err());
        assert!(ChannelSpec::thermal(0.5, 0.4).is_err());
        let b = ChannelSpec::thermal(0.9, 2.0).unwrap();
        let t = ChannelSpec::thermal(0.8, 2.0).unwrap();
        assert!(matches!(
            EnvironmentPair::new(b, t),
            Err(ChannelError::TransmissivityMismatch(..))
        ));
    }

    #[test]
    fn choi_examples() {
        let v = choi_cm(&ChannelSpec::identity(), 3.0).unwrap();
        let tmsv = CovarianceMatrix::two_mode_squeezed(3.0).unwrap();
        assert!((v.matrix() - tmsv.matrix()).amax() < 1e-15);

        let ch = ChannelSpec::new(0.0, 2.0).unwrap();
        let v = choi_cm(&ch, 4.0).unwrap();
        let expected = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![4.0, 4.0, 2.0, 2.0]));
        assert_eq!(v.matrix(), &expected);

        let ch = ChannelSpec::new(0.5, 0.25).unwrap();
        let v = choi_cm(&ch, 0.5).unwrap();
        assert_eq!(v.matrix(), &(DMatrix::identity(4, 4) * 0.5));
        assert!(choi_cm(&ch, 0.4).is_err());
    }

    #[test]
    fn classical_output_examples() {
        let v = classical_output_cm(&ChannelSpec::identity()).unwrap();
        assert_eq!(v.matrix()[(0, 0)], 0.5);
        let v = classical_output_cm(&ChannelSpec::additive(0.01).unwrap()).unwrap();
        assert!(approx(v.matrix()[(1, 1)], 0.51, 1e-15));
        let v = classical_output_cm(&ChannelSpec::thermal(0.99, 18.5).unwrap()).unwrap();
        assert!(approx(v.matrix()[(0, 0)], 0.68, 1e-12));
    }

    #[test]
    fn additive_choi_fidelity() {
        let pair = EnvironmentPair::additive(0.02, 0.01).unwrap();
        let r = fidelity_choi_inf(&pair).unwrap();
        assert!(approx(r.value, 2.0 * 0.0002f64.sqrt() / 0.03, 1e-15));
        assert!(approx(r.value, 0.9428090, 1e-7));
        assert_eq!(r.method, FidelityMethod::ClosedForm);
        assert!(r.flags.is_empty(), "{:?}", r.flags);
        assert!(approx(r.extrapolation.value, r.value, 1e-8));
        // large but finite energy is already close
        let f = fidelity_finite(&pair, 1e5).unwrap();
        assert!(f > r.value && f - r.value < 1e-4);
        assert!(approx(f, closed_form::additive_finite(1e5, 0.01, 0.02), 1e-14));

        let same = EnvironmentPair::additive(0.01, 0.01).unwrap();
        assert_eq!(fidelity_choi_inf(&same).unwrap().value, 1.0);
    }

    #[test]
    fn thermal_choi_fidelity_anchor_and_oracle() {
        let same = EnvironmentPair::thermal(0.9, 3.0, 3.0).unwrap();
        assert!(approx(fidelity_choi_inf(&same).unwrap().value, 1.0, 1e-12));
        let pair = EnvironmentPair::thermal(0.99, 18.5, 20.2).unwrap();
        let r = fidelity_choi_inf(&pair).unwrap();
        assert!(r.converged(), "{:?}", r.extrapolation);
        assert!(approx(r.value, r.extrapolation.value, 1e-8));
        assert_eq!(r.method, FidelityMethod::ClosedForm);
    }

    #[test]
    fn thermal_closed_form_is_tau_independent_via_oracle() {
        let values: Vec<f64> = [0.1, 0.5, 0.9, 0.99, 1.5]
            .iter()
            .map(|&tau| {
                let pair = EnvironmentPair::thermal(tau, 2.0, 5.0).unwrap();
                extrapolate_choi_fidelity(&pair).unwrap().value
            })
            .collect();
        for v in &values {
            assert!(approx(*v, closed_form::thermal_choi(5.0, 2.0), 1e-8), "{values:?}");
        }
    }

    #[test]
    fn pure_loss_extrapolation_is_flagged() {
        let pair = EnvironmentPair::thermal(0.5, 0.5, 2.0).unwrap();
        let r = fidelity_choi_inf(&pair).unwrap();
        assert!(r.value > 0.0 && r.value < 1.0);
        if !r.converged() {
            assert!(r.flags.iter().any(|f| matches!(f, FidelityFlag::Unconverged { .. })));
        }
    }

    #[test]
    fn classical_closed_forms_match_oracle() {
        let pair = EnvironmentPair::additive(0.02, 0.01).unwrap();
        let f = fidelity_classical(&pair).unwrap();
        assert!(approx(f, closed_form::additive_classical(0.01, 0.02), 1e-12));
        assert!(approx(f, 0.999155, 1e-6));
        let pair = EnvironmentPair::thermal(0.99, 18.5, 20.2).unwrap();
        let f = fidelity_classical(&pair).unwrap();
        assert!(approx(f, closed_form::thermal_classical(0.99, 20.2, 18.5), 1e-12));
    }

    #[test]
    fn finite_energy_limits() {
        let pair = EnvironmentPair::additive(0.02, 0.01).unwrap();
        let cl = fidelity_classical(&pair).unwrap();
        assert!(approx(fidelity_finite(&pair, 0.5).unwrap(), cl, 1e-12));
        let mut prev = 1.0;
        for a in [0.5, 1.0, 2.5, 10.0, 100.0] {
            let f = fidelity_finite(&pair, a).unwrap();
            assert!(approx(f, closed_form::additive_finite(a, 0.01, 0.02), 1e-12));
            assert!(f <= prev + 1e-12);
            prev = f;
        }
        let same = EnvironmentPair::thermal(0.7, 4.0, 4.0).unwrap();
        assert!(approx(fidelity_finite(&same, 37.0).unwrap(), 1.0, 1e-12));
    }

    fn direct(pair: &EnvironmentPair, a: f64) -> f64 {
        gaussian_fidelity(
            &choi_cm(&pair.target, a).unwrap(),
            &choi_cm(&pair.background, a).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn williamson_frame_matches_direct_choi_fidelity() {
        let pairs = [
            EnvironmentPair::thermal(0.3, 2.0, 5.0).unwrap(),
            EnvironmentPair::thermal(2.5, 0.6, 1.7).unwrap(),
            EnvironmentPair::additive(0.4, 0.05).unwrap(),
            EnvironmentPair::thermal(0.0, 1.0, 3.0).unwrap(),
        ];
        for pair in &pairs {
            for a in [0.5, 0.8, 3.0, 20.0] {
                let framed = fidelity_finite(pair, a).unwrap();
                assert!(approx(direct(pair, a), framed, 1e-12), "{pair:?} a={a}");
            }
        }
    }

    #[test]
    #[allow(clippy::excessive_precision)]
    fn quantum_limited_reference_is_projected_exactly() {
        // 50-digit evaluations of the fidelity formula on the raw Choi matrices
        let pair = EnvironmentPair::thermal(2.5, 0.5, 1.7).unwrap();
        for (a, expected) in [
            (0.8, 0.888_234_415_008_462_04),
            (3.0, 0.757_578_978_093_898_56),
            (20.0, 0.689_000_879_907_969_25),
        ] {
            assert!(approx(fidelity_finite(&pair, a).unwrap(), expected, 1e-14), "a={a}");
        }
        // same pair with the roles swapped
        let swapped = EnvironmentPair::thermal(2.5, 1.7, 0.5).unwrap();
        assert!(approx(
            fidelity_finite(&swapped, 3.0).unwrap(),
            0.757_578_978_093_898_56,
            1e-14
        ));
        for pair in [
            EnvironmentPair::thermal(0.4, 3.0, 0.5).unwrap(),
            EnvironmentPair::additive(0.0, 0.3).unwrap(),
        ] {
            for a in [0.8, 3.0] {
                assert!(approx(direct(&pair, a), fidelity_finite(&pair, a).unwrap(), 1e-7));
            }
        }
    }

    #[test]
    fn neville_is_exact_on_polynomials() {
        let xs = [1.0, 0.5, 0.25, 0.125];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 2.0 * x + 0.5 * x * x * x).collect();
        let d = neville_to_zero(&xs, &ys);
        assert!(approx(d[3], 3.0, 1e-13));
    }

    #[test]
    fn temperature_examples() {
        let t = temperature_of(18.0, 1e-3).unwrap();
        assert!(approx(t, 266.1, 0.1), "{t}");
        assert_eq!(t, temperature_of(18.0, 1e-3).unwrap());
        assert!(temperature_of(19.7, 1e-3).unwrap() > t);
        assert!(temperature_of(0.0, 1e-3).is_err());
        assert!(temperature_of(1.0, 0.0).is_err());
    }
}
