//! Sums of `f^d(i, i')` over pairs of binary patterns at Hamming distance
//! `d`, for the image spaces used by the bounds.
//!
//! Everything is evaluated as a logarithm first: the prefactors (binomials up
//! to `m = 10⁴`) overflow and the arguments (`F^{2M}` for `M ~ 10⁵`)
//! underflow long before the probabilities they feed do. The `ln_*`
//! functions take `ln f` (which may be `-∞`) and return `ln D` (`-∞` when
//! the sum vanishes).

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FunctionalError {
    #[error("domain error: {0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, FunctionalError>;

/// `ln n!` for `n = 0..=max`.
#[derive(Debug, Clone)]
pub struct LnFactorials(Vec<f64>);

impl LnFactorials {
    pub fn new(max: usize) -> Self {
        let mut table = Vec::with_capacity(max + 1);
        let mut acc = 0.0;
        table.push(0.0);
        for n in 1..=max {
            acc += (n as f64).ln();
            table.push(acc);
        }
        Self(table)
    }

    /// `ln C(n, k)`, or `-∞` outside `0 ≤ k ≤ n`.
    pub fn ln_binom(&self, n: usize, k: usize) -> f64 {
        if k > n {
            return f64::NEG_INFINITY;
        }
        self.0[n] - self.0[k] - self.0[n - k]
    }
}

/// `ln Σ exp(x_i)`; `-∞` for an empty or all-`-∞` input.
pub fn ln_sum_exp<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let terms: Vec<f64> = terms.into_iter().collect();
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// `ln(eˣ − 1)` for `x ≥ 0`.
fn ln_expm1(x: f64) -> f64 {
    if x > 30.0 {
        x + (-(-x).exp()).ln_1p()
    } else {
        x.exp_m1().ln()
    }
}

fn check_f(f: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&f) {
        return Err(FunctionalError::Domain(format!("argument {f} outside [0, 1]")));
    }
    Ok(f.ln())
}

fn check_m(m: usize) -> Result<()> {
    if m == 0 {
        return Err(FunctionalError::Domain("pixel count must be at least 1".into()));
    }
    Ok(())
}

/// `ln D_m` for the uniform space, `D_m = (1 + f)^m − 1`.
pub fn ln_uniform(m: usize, ln_f: f64) -> f64 {
    if ln_f == f64::NEG_INFINITY {
        return ln_f;
    }
    if ln_f < -600.0 {
        // (1+f)^m − 1 = m f (1 + O(m f)) and m f is far below rounding
        return (m as f64).ln() + ln_f;
    }
    ln_expm1(m as f64 * ln_f.exp().ln_1p())
}

/// `ln D_m^k` for the `k`-target space: `Σ_{j≥1} C(k,j) C(m−k,j) f^{2j}`.
pub fn ln_cpf(lf: &LnFactorials, m: usize, k: usize, ln_f: f64) -> f64 {
    let top = k.min(m - k);
    ln_sum_exp((1..=top).map(|j| lf.ln_binom(k, j) + lf.ln_binom(m - k, j) + 2.0 * j as f64 * ln_f))
}

/// `ln D̃_m^{k,l}`: sum over ordered pairs with `k` and `l` targets. With
/// `t` the size of the union of the two target sets, the distance is
/// `2t − k − l`.
pub fn ln_cross(lf: &LnFactorials, m: usize, k: usize, l: usize, ln_f: f64) -> f64 {
    let (k, l) = if k < l { (k, l) } else { (l, k) };
    ln_sum_exp(
        (l..=(k + l).min(m))
            .map(|t| lf.ln_binom(m, t) + lf.ln_binom(t, l) + lf.ln_binom(l, k + l - t) + (2 * t - k - l) as f64 * ln_f),
    )
}

/// `ln` of the unnormalised pair sum over the union of the `k`-target spaces
/// for every `k` in `ks`: diagonal blocks `C(m,j) D_m^j` plus every ordered
/// off-diagonal block.
pub fn ln_bcpf(lf: &LnFactorials, m: usize, ks: &[usize], ln_f: f64) -> f64 {
    let diag = ks.iter().map(|&j| lf.ln_binom(m, j) + ln_cpf(lf, m, j, ln_f));
    let off = ks.iter().flat_map(|&i| {
        ks.iter()
            .filter(move |&&l| l != i)
            .map(move |&l| ln_cross(lf, m, i, l, ln_f))
    });
    ln_sum_exp(diag.chain(off))
}

/// `D_m(f) = (1 + f)^m − 1`, the per-pattern average of `Σ_{i'≠i} f^d`
/// over all `2^m` patterns.
pub fn hamming_functional_uniform(m: usize, f: f64) -> Result<f64> {
    check_m(m)?;
    Ok(ln_uniform(m, check_f(f)?).exp())
}

/// `D_m^k(f)`, the per-pattern average over patterns with exactly `k` targets.
pub fn cpf_functional(m: usize, k: usize, f: f64) -> Result<f64> {
    check_m(m)?;
    if k > m {
        return Err(FunctionalError::Domain(format!("k={k} exceeds m={m}")));
    }
    let ln_f = check_f(f)?;
    Ok(ln_cpf(&LnFactorials::new(m), m, k, ln_f).exp())
}

/// `D̃_m^{k,l}(f)`, symmetric in `(k, l)`.
pub fn cross_functional(m: usize, k: usize, l: usize, f: f64) -> Result<f64> {
    check_m(m)?;
    if k == l || k > m || l > m {
        return Err(FunctionalError::Domain(format!(
            "need distinct k, l in [0, {m}], got ({k}, {l})"
        )));
    }
    let ln_f = check_f(f)?;
    Ok(ln_cross(&LnFactorials::new(m), m, k, l, ln_f).exp())
}

/// Unnormalised pair sum for the bounded-CPF space with target counts `ks`.
pub fn bcpf_functional(m: usize, ks: &[usize], f: f64) -> Result<f64> {
    check_m(m)?;
    validate_target_set(m, ks)?;
    let ln_f = check_f(f)?;
    Ok(ln_bcpf(&LnFactorials::new(m), m, ks, ln_f).exp())
}

pub(crate) fn validate_target_set(m: usize, ks: &[usize]) -> Result<()> {
    if ks.is_empty() {
        return Err(FunctionalError::Domain("empty target-count set".into()));
    }
    let mut sorted = ks.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(FunctionalError::Domain(format!("repeated target count in {ks:?}")));
    }
    if sorted.last().is_some_and(|&k| k > m) {
        return Err(FunctionalError::Domain(format!("target count above m={m} in {ks:?}")));
    }
    Ok(())
}

/// Brute-force pair sums by explicit enumeration of bit patterns. Only
/// practical for small `m`; used to validate the closed forms.
pub mod enumerate {
    /// `Σ f^{d(i,i')}` over ordered pairs with `i` in `a`, `i'` in `b`,
    /// `i ≠ i'`. Pairs are counted per distance in integers first, so the
    /// only rounding is in the final short sum.
    pub fn pair_sum(a: &[u32], b: &[u32], f: f64) -> f64 {
        let mut counts = [0u64; 33];
        for &x in a {
            for &y in b {
                counts[(x ^ y).count_ones() as usize] += 1;
            }
        }
        counts
            .iter()
            .enumerate()
            .skip(1)
            .map(|(d, &c)| c as f64 * f.powi(d as i32))
            .sum()
    }

    /// All `m`-bit patterns with a target count in `ks`.
    pub fn patterns(m: usize, ks: &[usize]) -> Vec<u32> {
        (0u32..1 << m)
            .filter(|p| ks.contains(&(p.count_ones() as usize)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        if a == b {
            0.0
        } else {
            (a - b).abs() / a.abs().max(b.abs())
        }
    }

    #[test]
    fn uniform_examples() {
        assert!(rel(hamming_functional_uniform(3, 1.0).unwrap(), 7.0) < 1e-15);
        assert_eq!(hamming_functional_uniform(5, 0.0).unwrap(), 0.0);
        assert!(rel(hamming_functional_uniform(2, 0.5).unwrap(), 1.25) < 1e-15);
        assert!(hamming_functional_uniform(0, 0.5).is_err());
        assert!(hamming_functional_uniform(2, 1.5).is_err());
    }

    #[test]
    fn cpf_examples() {
        assert!(rel(cpf_functional(4, 2, 1.0).unwrap(), 5.0) < 1e-14);
        assert!(rel(cpf_functional(4, 2, 0.5).unwrap(), 1.0625) < 1e-14);
        assert_eq!(cpf_functional(6, 0, 0.3).unwrap(), 0.0);
        assert_eq!(cpf_functional(6, 6, 0.3).unwrap(), 0.0);
        assert!(cpf_functional(3, 4, 0.3).is_err());
    }

    #[test]
    fn cross_examples() {
        assert!(rel(cross_functional(4, 1, 2, 1.0).unwrap(), 24.0) < 1e-14);
        assert!(rel(cross_functional(3, 0, 1, 0.5).unwrap(), 1.5) < 1e-14);
        assert_eq!(cross_functional(5, 1, 3, 0.0).unwrap(), 0.0);
        assert_eq!(
            cross_functional(7, 2, 5, 0.3).unwrap(),
            cross_functional(7, 5, 2, 0.3).unwrap()
        );
        assert!(cross_functional(3, 1, 1, 0.5).is_err());
    }

    #[test]
    fn bcpf_examples() {
        let full: Vec<usize> = (0..=3).collect();
        assert!(rel(bcpf_functional(3, &full, 0.5).unwrap(), 19.0) < 1e-14);
        let c = 6.0 * cpf_functional(4, 2, 0.3).unwrap();
        assert!(rel(bcpf_functional(4, &[2], 0.3).unwrap(), c) < 1e-14);
        assert_eq!(bcpf_functional(4, &[1, 3], 0.0).unwrap(), 0.0);
        assert!(bcpf_functional(4, &[], 0.3).is_err());
        assert!(bcpf_functional(4, &[1, 1], 0.3).is_err());
        assert!(bcpf_functional(4, &[5], 0.3).is_err());
    }

    #[test]
    fn full_bcpf_matches_uniform() {
        for m in 1..=12 {
            let full: Vec<usize> = (0..=m).collect();
            for f in [0.0, 0.1, 0.5, 0.9, 1.0] {
                let u = 2f64.powi(m as i32) * hamming_functional_uniform(m, f).unwrap();
                assert!(rel(bcpf_functional(m, &full, f).unwrap(), u) < 1e-12);
            }
        }
    }

    #[test]
    fn small_enumeration() {
        for m in 1..=6 {
            for f in [0.1, 0.5, 0.9] {
                let all = enumerate::patterns(m, &(0..=m).collect::<Vec<_>>());
                let e = enumerate::pair_sum(&all, &all, f) / all.len() as f64;
                assert!(rel(hamming_functional_uniform(m, f).unwrap(), e) < 1e-12);
            }
        }
    }

    #[test]
    fn large_arguments_stay_finite_in_log_space() {
        let lf = LnFactorials::new(10_000);
        // f = e^{-2000} underflows in linear space
        let v = ln_uniform(10_000, -2000.0);
        assert!((v - (10_000f64.ln() - 2000.0)).abs() < 1e-9);
        let v = ln_cpf(&lf, 10_000, 5_000, -1e-3);
        assert!(v.is_finite() && v > 700.0);
        assert_eq!(ln_uniform(5, f64::NEG_INFINITY), f64::NEG_INFINITY);
        assert_eq!(ln_cpf(&lf, 5, 2, f64::NEG_INFINITY), f64::NEG_INFINITY);
    }
}
