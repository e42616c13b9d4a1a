//! Zero-mean Gaussian states.
//!
//! Covariance matrices use the quadrature ordering (q1, p1, q2, p2, ...) and
//! shot-noise units in which the vacuum is `I/2`. All matrix functions go
//! through symmetric eigendecompositions or Cholesky factors in double
//! precision; the matrices used here are at most a few modes wide.

use nalgebra::{DMatrix, Schur};
use thiserror::Error;

/// Largest tolerated `|V - Vᵀ|` entry before a matrix is rejected.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Slack on the uncertainty principle, scaled by `max(1, max|V_ij|)`.
/// Rounding in entries of size `a` moves symplectic eigenvalues by roughly
/// `a² · eps`, so a fixed absolute slack would reject valid large-energy
/// states.
pub const PHYSICALITY_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GaussianError {
    #[error("covariance matrix must be square with even dimension, got {rows}x{cols}")]
    BadShape { rows: usize, cols: usize },
    #[error("covariance matrix has non-finite entries")]
    NonFinite,
    #[error("covariance matrix is not symmetric (max deviation {0:.3e})")]
    NonSymmetric(f64),
    #[error("not a physical state: symplectic eigenvalue {0} is below 1/2")]
    NonPhysical(f64),
    #[error("mode count mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("the Fock oracle only supports products of single-mode thermal states")]
    UnsupportedState,
    #[error("Fock cutoff {cutoff} too small: truncated trace {trace}")]
    CutoffTooSmall { cutoff: usize, trace: f64 },
    #[error("eigenvalue iteration did not converge")]
    NoConvergence,
}

pub type Result<T> = std::result::Result<T, GaussianError>;

/// Covariance matrix of a bona fide zero-mean Gaussian state.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    matrix: DMatrix<f64>,
}

impl CovarianceMatrix {
    /// Validates and symmetrises `matrix`.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let matrix = checked_symmetric(matrix)?;
        let spectrum = spectrum_of_symmetric(&matrix)?;
        let slack = physicality_slack(&matrix);
        if let Some(&min) = spectrum.last() {
            if min < 0.5 - slack {
                return Err(GaussianError::NonPhysical(min));
            }
        }
        Ok(Self { matrix })
    }

    pub fn vacuum(modes: usize) -> Self {
        Self {
            matrix: DMatrix::identity(2 * modes, 2 * modes) * 0.5,
        }
    }

    /// Product of thermal states with the given `ε_k = n̄_k + 1/2`.
    pub fn thermal(epsilons: &[f64]) -> Result<Self> {
        let n = epsilons.len();
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        for (k, &eps) in epsilons.iter().enumerate() {
            if !eps.is_finite() {
                return Err(GaussianError::NonFinite);
            }
            if eps < 0.5 - PHYSICALITY_TOL {
                return Err(GaussianError::NonPhysical(eps));
            }
            m[(2 * k, 2 * k)] = eps;
            m[(2 * k + 1, 2 * k + 1)] = eps;
        }
        Ok(Self { matrix: m })
    }

    /// Two-mode squeezed vacuum with `a = n̄_S + 1/2` on both modes.
    pub fn two_mode_squeezed(a: f64) -> Result<Self> {
        if !(a >= 0.5) || !a.is_finite() {
            return Err(GaussianError::NonPhysical(a));
        }
        let c = (a * a - 0.25).sqrt();
        let mut m = DMatrix::zeros(4, 4);
        for i in 0..4 {
            m[(i, i)] = a;
        }
        m[(0, 2)] = c;
        m[(2, 0)] = c;
        m[(1, 3)] = -c;
        m[(3, 1)] = -c;
        Self::new(m)
    }

    pub fn modes(&self) -> usize {
        self.matrix.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    /// `V ⊕ W`.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let (a, b) = (self.matrix.nrows(), other.matrix.nrows());
        let mut m = DMatrix::zeros(a + b, a + b);
        m.view_mut((0, 0), (a, a)).copy_from(&self.matrix);
        m.view_mut((a, a), (b, b)).copy_from(&other.matrix);
        Self { matrix: m }
    }

    /// `S V Sᵀ`, re-validated.
    pub fn congruence(&self, s: &DMatrix<f64>) -> Result<Self> {
        let m = s * &self.matrix * s.transpose();
        let sym = (&m + m.transpose()) * 0.5;
        Self::new(sym)
    }

    /// Symplectic eigenvalues in descending order.
    pub fn symplectic_eigenvalues(&self) -> Vec<f64> {
        spectrum_of_symmetric(&self.matrix).expect("validated at construction")
    }
}

/// Symplectic eigenvalues of a raw matrix, descending.
///
/// Fails with [`GaussianError::NonSymmetric`] or
/// [`GaussianError::NonPhysical`] when the matrix is not a bona fide
/// covariance matrix.
pub fn symplectic_eigenvalues(matrix: &DMatrix<f64>) -> Result<Vec<f64>> {
    Ok(CovarianceMatrix::new(matrix.clone())?.symplectic_eigenvalues())
}

/// The standard symplectic form `⊕_k [[0, 1], [-1, 0]]`.
pub fn symplectic_form(modes: usize) -> DMatrix<f64> {
    let mut w = DMatrix::zeros(2 * modes, 2 * modes);
    for k in 0..modes {
        w[(2 * k, 2 * k + 1)] = 1.0;
        w[(2 * k + 1, 2 * k)] = -1.0;
    }
    w
}

fn physicality_slack(m: &DMatrix<f64>) -> f64 {
    PHYSICALITY_TOL * m.amax().max(1.0)
}

fn checked_symmetric(matrix: DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (rows, cols) = matrix.shape();
    if rows != cols || rows % 2 != 0 || rows == 0 {
        return Err(GaussianError::BadShape { rows, cols });
    }
    if matrix.iter().any(|x| !x.is_finite()) {
        return Err(GaussianError::NonFinite);
    }
    let dev = (&matrix - matrix.transpose()).amax();
    if dev > SYMMETRY_TOL {
        return Err(GaussianError::NonSymmetric(dev));
    }
    Ok((&matrix + matrix.transpose()) * 0.5)
}

/// Principal square root of a symmetric positive definite matrix.
fn sym_sqrt(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let eig = m.clone().symmetric_eigen();
    if eig.eigenvalues.iter().any(|&l| l <= 0.0) {
        return None;
    }
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
    Some(&eig.eigenvectors * d * eig.eigenvectors.transpose())
}

/// With `K = √V`, `A = K Ω K` is antisymmetric and `AᵀA` carries each
/// squared symplectic eigenvalue twice.
fn spectrum_of_symmetric(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = m.nrows() / 2;
    let Some(k) = sym_sqrt(m) else {
        let min = m.clone().symmetric_eigen().eigenvalues.min();
        return Err(GaussianError::NonPhysical(min));
    };
    let a = &k * symplectic_form(n) * &k;
    let b = a.transpose() * &a;
    let b = (&b + b.transpose()) * 0.5;
    let mut ev: Vec<f64> = b.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    Ok(ev.chunks(2).map(|p| (0.5 * (p[0] + p[1])).max(0.0).sqrt()).collect())
}

/// Bures fidelity `‖√ρ₁ √ρ₂‖₁` between two zero-mean Gaussian states.
///
/// Uses the auxiliary-matrix formula: with `V = V₁ + V₂` and
/// `V_aux = Ωᵀ V⁻¹ (Ω/4 + V₂ Ω V₁)`, the eigenvalues of `V_aux Ω` come in
/// pairs `±iμ_k` and
///
/// ```text
/// F = Π_k [2(μ_k + √(μ_k² − 1/4))]^{1/2} / det(V)^{1/4}.
/// ```
///
/// The value is averaged over both argument orders so it is exactly
/// symmetric, then clipped to `[0, 1]`.
pub fn gaussian_fidelity(v1: &CovarianceMatrix, v2: &CovarianceMatrix) -> Result<f64> {
    if v1.modes() != v2.modes() {
        return Err(GaussianError::DimensionMismatch(v1.modes(), v2.modes()));
    }
    if v1.matrix() == v2.matrix() {
        return Ok(1.0);
    }
    if is_pure(v1) || is_pure(v2) {
        return Ok(ln_pure_overlap(v1.matrix(), v2.matrix())?.exp().clamp(0.0, 1.0));
    }
    let f12 = ln_fidelity_ordered(v1.matrix(), v2.matrix())?;
    let f21 = ln_fidelity_ordered(v2.matrix(), v1.matrix())?;
    let f = 0.5 * (f12.exp() + f21.exp());
    Ok(f.clamp(0.0, 1.0))
}

/// Pure to within the accuracy of the computed symplectic spectrum.
fn is_pure(v: &CovarianceMatrix) -> bool {
    let tol = 64.0 * f64::EPSILON * v.matrix().amax().max(1.0).powi(2);
    v.symplectic_eigenvalues().iter().all(|&nu| nu <= 0.5 + tol)
}

/// `ln F = −¼ ln det(V₁ + V₂)` when either state is pure. The general
/// formula takes `√(μ² − 1/4)` at `μ ≈ 1/2` there and loses half the
/// digits.
fn ln_pure_overlap(v1: &DMatrix<f64>, v2: &DMatrix<f64>) -> Result<f64> {
    let sum = v1 + v2;
    let chol = sum
        .clone()
        .cholesky()
        .ok_or_else(|| GaussianError::NonPhysical(sum.clone().symmetric_eigen().eigenvalues.min()))?;
    Ok(-0.5 * chol.l().diagonal().iter().map(|x| x.ln()).sum::<f64>())
}

fn ln_fidelity_ordered(v1: &DMatrix<f64>, v2: &DMatrix<f64>) -> Result<f64> {
    let n = v1.nrows() / 2;
    let omega = symplectic_form(n);
    let sum = v1 + v2;
    let chol = sum
        .clone()
        .cholesky()
        .ok_or_else(|| GaussianError::NonPhysical(sum.clone().symmetric_eigen().eigenvalues.min()))?;
    let ln_det_sum: f64 = 2.0 * chol.l().diagonal().iter().map(|x| x.ln()).sum::<f64>();
    let rhs = &omega * 0.25 + v2 * &omega * v1;
    let v_aux = omega.transpose() * chol.solve(&rhs);
    let a = &v_aux * &omega;
    let neg_a2 = -(&a * &a);
    let mut mu2 = real_parts_of_eigenvalues(&neg_a2)?;
    mu2.sort_by(|x, y| y.total_cmp(x));
    let ln_num: f64 = mu2
        .chunks(2)
        .map(|p| {
            let m2 = (0.5 * (p[0] + p[1])).max(0.25);
            let mu = m2.sqrt();
            0.5 * (2.0 * (mu + (m2 - 0.25).sqrt())).ln()
        })
        .sum();
    Ok(ln_num - 0.25 * ln_det_sum)
}

const SCHUR_MAX_ITER: usize = 10_000;

/// Real parts of the eigenvalues of a general square matrix.
///
/// For pure states the matrix is a multiple of the identity plus rounding
/// noise, and plain shifted QR can stall on it. Failing that, the scalar
/// part is removed and the remainder rescaled; failing again, the remainder
/// is rotated by a fixed orthogonal similarity. Neither step changes the
/// spectrum.
fn real_parts_of_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    let re = |s: Schur<f64, nalgebra::Dyn>| -> Vec<f64> { s.complex_eigenvalues().iter().map(|z| z.re).collect() };
    if let Some(s) = Schur::try_new(m.clone(), f64::EPSILON, SCHUR_MAX_ITER) {
        return Ok(re(s));
    }
    let n = m.nrows();
    let c = m.trace() / n as f64;
    let rest = m - DMatrix::identity(n, n) * c;
    let scale = rest.amax();
    if scale == 0.0 {
        return Ok(vec![c; n]);
    }
    let rest = rest / scale;
    let mut q = DMatrix::<f64>::identity(n, n);
    for i in 0..n - 1 {
        let theta = std::f64::consts::FRAC_PI_4 * (i + 1) as f64 * 1.618_033_988_749_895;
        let mut g = DMatrix::<f64>::identity(n, n);
        let (cs, sn) = (theta.cos(), theta.sin());
        g[(i, i)] = cs;
        g[(i, i + 1)] = -sn;
        g[(i + 1, i)] = sn;
        g[(i + 1, i + 1)] = cs;
        q *= g;
    }
    for candidate in [rest.clone(), q.transpose() * &rest * &q] {
        if let Some(s) = Schur::try_new(candidate, f64::EPSILON, SCHUR_MAX_ITER) {
            return Ok(re(s).into_iter().map(|x| x * scale + c).collect());
        }
    }
    Err(GaussianError::NoConvergence)
}

/// Uhlmann fidelity computed in a truncated Fock basis.
///
/// Only products of single-mode thermal states are supported: their density
/// matrices are diagonal, so the fidelity is `Π_k Σ_{n<cutoff} √(p_n q_n)`
/// with Bose-Einstein weights. Each truncated trace must reach `1 − 1e-6`.
pub fn fock_fidelity_oracle(v1: &CovarianceMatrix, v2: &CovarianceMatrix, cutoff: usize) -> Result<f64> {
    if v1.modes() != v2.modes() {
        return Err(GaussianError::DimensionMismatch(v1.modes(), v2.modes()));
    }
    let e1 = thermal_occupations(v1)?;
    let e2 = thermal_occupations(v2)?;
    let mut fidelity = 1.0;
    for (&n1, &n2) in e1.iter().zip(&e2) {
        let p = bose_einstein(n1, cutoff);
        let q = bose_einstein(n2, cutoff);
        for dist in [&p, &q] {
            let trace: f64 = dist.iter().sum();
            if trace < 1.0 - 1e-6 {
                return Err(GaussianError::CutoffTooSmall { cutoff, trace });
            }
        }
        fidelity *= p.iter().zip(&q).map(|(a, b)| (a * b).sqrt()).sum::<f64>();
    }
    Ok(fidelity)
}

fn thermal_occupations(v: &CovarianceMatrix) -> Result<Vec<f64>> {
    let m = v.matrix();
    let dim = m.nrows();
    for i in 0..dim {
        for j in 0..dim {
            if i != j && m[(i, j)].abs() > SYMMETRY_TOL {
                return Err(GaussianError::UnsupportedState);
            }
        }
    }
    (0..v.modes())
        .map(|k| {
            let (q, p) = (m[(2 * k, 2 * k)], m[(2 * k + 1, 2 * k + 1)]);
            if (q - p).abs() > SYMMETRY_TOL {
                Err(GaussianError::UnsupportedState)
            } else {
                Ok((q - 0.5).max(0.0))
            }
        })
        .collect()
}

fn bose_einstein(nbar: f64, cutoff: usize) -> Vec<f64> {
    if nbar == 0.0 {
        let mut v = vec![0.0; cutoff];
        if cutoff > 0 {
            v[0] = 1.0;
        }
        return v;
    }
    let ln_ratio = (nbar / (nbar + 1.0)).ln();
    let ln_norm = (nbar + 1.0).ln();
    (0..cutoff).map(|n| (n as f64 * ln_ratio - ln_norm).exp()).collect()
}
