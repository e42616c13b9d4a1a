//! Finite-sample interpolation of nearest-neighbour error rates:
//! `E(T) ≈ E∞ + Σ_{j=2}^{jmax} x_j T^{−j/m}`.

use super::{Result, SimError};
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, PartialEq)]
pub struct SnappFit {
    /// Asymptotic error, clipped at zero.
    pub e_inf: f64,
    /// Fitted value before clipping.
    pub e_inf_raw: f64,
    /// `x_2 ..= x_jmax`.
    pub coefficients: Vec<f64>,
    pub residual_rms: f64,
    /// Ratio of extreme singular values of the equilibrated design.
    pub condition: f64,
    /// Set when `e_inf_raw < 0` and the estimate was clipped.
    pub clipped: bool,
    pub m: usize,
}

impl SnappFit {
    pub fn predict(&self, t: f64) -> f64 {
        self.e_inf_raw
            + self
                .coefficients
                .iter()
                .enumerate()
                .map(|(k, x)| x * t.powf(-((k + 2) as f64) / self.m as f64))
                .sum::<f64>()
    }
}

/// Relative singular-value cutoff below which the design counts as singular.
const RANK_TOL: f64 = 1e-14;

/// Least-squares fit of `(T, E)` samples.
///
/// Columns are scaled to unit norm before an SVD solve; the powers
/// `T^{−j/m}` are nearly collinear when `m` is large, and equilibration plus
/// SVD loses far less than forming normal equations would.
pub fn snapp_fit(samples: &[(f64, f64)], m: usize, jmax: usize) -> Result<SnappFit> {
    if m == 0 || jmax < 2 {
        return Err(SimError::Invalid(format!(
            "need m ≥ 1 and jmax ≥ 2, got m={m}, jmax={jmax}"
        )));
    }
    if let Some(&(t, e)) = samples.iter().find(|(t, e)| !(*t >= 1.0) || !e.is_finite()) {
        return Err(SimError::Invalid(format!("bad sample (T={t}, E={e})")));
    }
    let mut distinct: Vec<f64> = samples.iter().map(|s| s.0).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let cols = jmax;
    if distinct.len() < cols {
        return Err(SimError::InsufficientSamples {
            needed: cols,
            got: distinct.len(),
        });
    }
    let design = DMatrix::from_fn(samples.len(), cols, |r, c| {
        if c == 0 {
            1.0
        } else {
            samples[r].0.powf(-((c + 1) as f64) / m as f64)
        }
    });
    let scale: Vec<f64> = (0..cols).map(|c| design.column(c).norm()).collect();
    let scaled = DMatrix::from_fn(samples.len(), cols, |r, c| design[(r, c)] / scale[c]);
    let rhs = DVector::from_iterator(samples.len(), samples.iter().map(|s| s.1));
    let svd = scaled.svd(true, true);
    let sv = &svd.singular_values;
    let (smax, smin) = (sv.max(), sv.min());
    let rank = sv.iter().filter(|&&s| s > RANK_TOL * smax).count();
    if rank < cols {
        return Err(SimError::SingularDesign { rank, cols });
    }
    let y = svd.solve(&rhs, 0.0).map_err(|e| SimError::Invalid(e.to_string()))?;
    let params: Vec<f64> = y.iter().zip(&scale).map(|(v, s)| v / s).collect();
    let fitted = &design * DVector::from_vec(params.clone());
    let residual_rms = ((&fitted - &rhs).norm_squared() / samples.len() as f64).sqrt();
    let e_inf_raw = params[0];
    Ok(SnappFit {
        e_inf: e_inf_raw.max(0.0),
        e_inf_raw,
        coefficients: params[1..].to_vec(),
        residual_rms,
        condition: smax / smin,
        clipped: e_inf_raw < 0.0,
        m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synth(e_inf: f64, xs: &[f64], m: usize, ts: &[f64]) -> Vec<(f64, f64)> {
        ts.iter()
            .map(|&t| {
                let e = e_inf
                    + xs.iter()
                        .enumerate()
                        .map(|(k, x)| x * t.powf(-((k + 2) as f64) / m as f64))
                        .sum::<f64>();
                (t, e)
            })
            .collect()
    }

    #[test]
    fn round_trip() {
        let ts: Vec<f64> = [10.0, 20.0, 50.0, 100.0, 200.0, 500.0, 1e3, 2e3, 5e3, 1e4].to_vec();
        let xs = [0.8, -0.5, 0.3, 0.2];
        let fit = snapp_fit(&synth(0.05, &xs, 2, &ts), 2, 5).unwrap();
        assert!((fit.e_inf - 0.05).abs() < 1e-6 * 0.05);
        for (a, b) in fit.coefficients.iter().zip(&xs) {
            assert!((a - b).abs() < 1e-6 * b.abs(), "{:?}", fit.coefficients);
        }
        assert!(fit.residual_rms < 1e-12);
        assert!((fit.predict(300.0) - synth(0.05, &xs, 2, &[300.0])[0].1).abs() < 1e-12);
    }

    #[test]
    fn constant_data() {
        let s: Vec<(f64, f64)> = [10.0, 30.0, 100.0, 300.0, 1000.0, 3000.0]
            .iter()
            .map(|&t| (t, 0.2))
            .collect();
        let fit = snapp_fit(&s, 3, 5).unwrap();
        assert!((fit.e_inf - 0.2).abs() < 1e-9);
        assert!(
            fit.coefficients.iter().all(|x| x.abs() < 1e-7),
            "{:?}",
            fit.coefficients
        );
    }

    #[test]
    fn too_few_samples() {
        let s = [(10.0, 0.1), (20.0, 0.1), (20.0, 0.11), (40.0, 0.2)];
        assert!(matches!(
            snapp_fit(&s, 2, 5),
            Err(SimError::InsufficientSamples { needed: 5, got: 3 })
        ));
    }

    #[test]
    fn negative_limit_is_clipped() {
        let ts = [10.0, 20.0, 40.0, 80.0, 160.0];
        let fit = snapp_fit(&synth(-0.01, &[0.5], 2, &ts), 2, 3).unwrap();
        assert!(fit.clipped);
        assert_eq!(fit.e_inf, 0.0);
        assert!((fit.e_inf_raw + 0.01).abs() < 1e-9);
    }
}
