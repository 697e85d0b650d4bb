//! Integrals over the ordered simplex `0 < t_1 < ... < t_n < t` of
//! `Π t_i^{α_i} (t_{i+1} - t_i)^{β_i}` (with `t_{n+1} = t`), their gamma-product
//! closed form, and brute-force oracles.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quadrature::{tanh_sinh, QuadOptions};
use crate::scalar::{CompensatedSum, Real};
use crate::special::ln_gamma;

/// Time horizon and exponent vectors of a simplex integral.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplexIntegralSpec<T> {
    pub t: T,
    pub alphas: Vec<T>,
    pub betas: Vec<T>,
}

/// First integrability condition that fails, if any.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConditionViolation {
    #[error("alphas and betas must be non-empty and of equal length (got {alphas} and {betas})")]
    Shape { alphas: usize, betas: usize },
    #[error("upper time t must be finite and > 0 (got {0})")]
    Time(f64),
    #[error("non-finite exponent")]
    NonFinite,
    #[error("α₁ > -1 fails (α₁ = {0})")]
    Alpha1(f64),
    #[error("β_{index} > -1 fails (β_{index} = {value})")]
    Beta { index: usize, value: f64 },
    #[error("Σ_(i≤k)(α_i+β_i) + k + 1 + α_(k+1) > 0 fails at k = {k} (value {value})")]
    Coupling { k: usize, value: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimplexError {
    #[error(transparent)]
    Condition(#[from] ConditionViolation),
    #[error("nested quadrature supports n <= 3 (got {0})")]
    QuadratureDimension(usize),
    #[error("Monte Carlo oracle supports n <= 5 (got {0})")]
    MonteCarloDimension(usize),
    #[error("spectral integral needs α > -1 and t > 0 (got α = {alpha}, t = {t})")]
    SpectralDomain { alpha: f64, t: f64 },
}

impl<T: Real> SimplexIntegralSpec<T> {
    pub fn new(t: T, alphas: Vec<T>, betas: Vec<T>) -> Self {
        Self { t, alphas, betas }
    }

    pub fn n(&self) -> usize {
        self.alphas.len()
    }

    /// `|α| + |β| + n`, the homogeneity degree in `t`.
    pub fn degree(&self) -> T {
        self.alphas.iter().copied().sum::<T>()
            + self.betas.iter().copied().sum::<T>()
            + T::from_count(self.n())
    }

    pub fn with_t(&self, t: T) -> Self {
        Self { t, ..self.clone() }
    }
}

/// Checks `α₁ > -1`, `β_i > -1` and the coupling inequalities in order and
/// reports the first failure.
pub fn check_conditions<T: Real>(spec: &SimplexIntegralSpec<T>) -> Result<(), ConditionViolation> {
    let n = spec.alphas.len();
    if n == 0 || spec.betas.len() != n {
        return Err(ConditionViolation::Shape { alphas: n, betas: spec.betas.len() });
    }
    if !(spec.t > T::zero()) || !spec.t.is_finite() {
        return Err(ConditionViolation::Time(spec.t.to_f64_lossy()));
    }
    if spec.alphas.iter().chain(&spec.betas).any(|x| !x.is_finite()) {
        return Err(ConditionViolation::NonFinite);
    }
    if !(spec.alphas[0] > -T::one()) {
        return Err(ConditionViolation::Alpha1(spec.alphas[0].to_f64_lossy()));
    }
    for (i, &b) in spec.betas.iter().enumerate() {
        if !(b > -T::one()) {
            return Err(ConditionViolation::Beta { index: i + 1, value: b.to_f64_lossy() });
        }
    }
    let mut partial = T::zero();
    for k in 1..n {
        partial = partial + spec.alphas[k - 1] + spec.betas[k - 1];
        let value = partial + T::from_count(k + 1) + spec.alphas[k];
        if !(value > T::zero()) {
            return Err(ConditionViolation::Coupling { k, value: value.to_f64_lossy() });
        }
    }
    Ok(())
}

/// Closed-form value together with its logarithm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedForm<T> {
    pub log_value: T,
    pub value: T,
    /// `ln` of the product of gamma ratios over `k = 1..n-1`.
    pub log_gamma_product: T,
}

/// Gamma-product closed form of the simplex integral, assembled in log space.
pub fn closed_form<T: Real>(spec: &SimplexIntegralSpec<T>) -> Result<ClosedForm<T>, ConditionViolation> {
    check_conditions(spec)?;
    let n = spec.n();
    let one = T::one();
    let mut log_value = ln_gamma(spec.alphas[0] + one);
    for &b in &spec.betas {
        log_value = log_value + ln_gamma(b + one);
    }
    let degree = spec.degree();
    log_value = log_value - ln_gamma(degree + one);
    let mut log_gamma_product = T::zero();
    let mut partial = T::zero();
    for k in 1..n {
        partial = partial + spec.alphas[k - 1] + spec.betas[k - 1];
        let base = partial + T::from_count(k + 1);
        log_gamma_product = log_gamma_product + ln_gamma(base + spec.alphas[k]) - ln_gamma(base);
    }
    log_value = log_value + log_gamma_product + degree * spec.t.ln();
    Ok(ClosedForm { log_value, value: log_value.exp(), log_gamma_product })
}

/// `∫_ℝ e^{-t ξ²} |ξ|^α dξ = Γ((1+α)/2) t^{-(1+α)/2}`.
pub fn gaussian_spectral_integral<T: Real>(alpha: T, t: T) -> Result<T, SimplexError> {
    Ok(log_gaussian_spectral_integral(alpha, t)?.exp())
}

pub fn log_gaussian_spectral_integral<T: Real>(alpha: T, t: T) -> Result<T, SimplexError> {
    if !(alpha > -T::one()) || !(t > T::zero()) || !alpha.is_finite() || !t.is_finite() {
        return Err(SimplexError::SpectralDomain { alpha: alpha.to_f64_lossy(), t: t.to_f64_lossy() });
    }
    let s = (T::one() + alpha) / T::lit(2.0);
    Ok(ln_gamma(s) - s * t.ln())
}

/// Independent numerical estimate of a simplex integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleEstimate<T> {
    pub estimate: T,
    /// Quadrature: level-difference estimate. Monte Carlo: one standard error.
    pub error_bound: T,
    /// `false` when the budget ran out before the requested accuracy.
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleMethod<T> {
    /// Nested tanh-sinh, one level per simplex coordinate (n <= 3).
    NestedQuadrature { rel_tol: T, max_level: u32 },
    /// Dirichlet importance sampling of the gaps (n <= 5).
    MonteCarlo { samples: usize, seed: u64, target_rel_err: T },
}

/// Estimates the simplex integral without using the closed form.
pub fn brute_force<T: Real>(
    spec: &SimplexIntegralSpec<T>,
    method: OracleMethod<T>,
) -> Result<OracleEstimate<T>, SimplexError> {
    check_conditions(spec)?;
    match method {
        OracleMethod::NestedQuadrature { rel_tol, max_level } => {
            if spec.n() > 3 {
                return Err(SimplexError::QuadratureDimension(spec.n()));
            }
            Ok(nested_quadrature(spec, rel_tol, max_level))
        }
        OracleMethod::MonteCarlo { samples, seed, target_rel_err } => {
            if spec.n() > 5 {
                return Err(SimplexError::MonteCarloDimension(spec.n()));
            }
            Ok(monte_carlo(spec, samples, seed, target_rel_err))
        }
    }
}

/// `∫_0^{upper} s^{α_k} (upper - s)^{β_k} inner(s) ds`, recursing down to `k = 0`.
fn nested_level<T: Real>(
    spec: &SimplexIntegralSpec<T>,
    k: usize,
    upper: T,
    opts: &QuadOptions<T>,
    stats: &mut (T, bool),
) -> T {
    let q = tanh_sinh(
        |s, left, right| {
            let weight = left.powf(spec.alphas[k]) * right.powf(spec.betas[k]);
            if k == 0 {
                weight
            } else {
                weight * nested_level(spec, k - 1, s, opts, stats)
            }
        },
        T::zero(),
        upper,
        opts,
    );
    // accumulate a crude relative error budget across levels
    let rel = if q.value != T::zero() { q.error / q.value.abs() } else { q.error };
    stats.0 = stats.0.max(rel);
    stats.1 &= q.converged;
    q.value
}

fn nested_quadrature<T: Real>(spec: &SimplexIntegralSpec<T>, rel_tol: T, max_level: u32) -> OracleEstimate<T> {
    let opts = QuadOptions { rel_tol, abs_tol: T::zero(), max_level, min_level: 3 };
    let mut stats = (T::zero(), true);
    let estimate = nested_level(spec, spec.n() - 1, spec.t, &opts, &mut stats);
    let error_bound = stats.0 * T::from_count(spec.n()) * estimate.abs();
    OracleEstimate { estimate, error_bound, converged: stats.1 }
}

fn monte_carlo<T: Real>(
    spec: &SimplexIntegralSpec<T>,
    samples: usize,
    seed: u64,
    target_rel_err: T,
) -> OracleEstimate<T> {
    // Gaps g_1..g_{n+1} of the ordered points: g_1 = t_1, g_{i+1} = t_{i+1} - t_i.
    // Proposal: t · Dirichlet(κ) with κ_1 = 1 + α_1, κ_{i+1} = 1 + β_i, which
    // cancels the singular factors t_1^{α_1} and (t_{i+1} - t_i)^{β_i} exactly.
    let n = spec.n();
    let to_f = |x: T| x.to_f64_lossy();
    let mut kappa = Vec::with_capacity(n + 1);
    kappa.push(1.0 + to_f(spec.alphas[0]));
    kappa.extend(spec.betas.iter().map(|&b| 1.0 + to_f(b)));
    let gammas: Vec<Gamma<f64>> = kappa.iter().map(|&k| Gamma::new(k, 1.0).expect("shape > 0")).collect();
    let t = to_f(spec.t);
    let alphas: Vec<f64> = spec.alphas.iter().map(|&a| to_f(a)).collect();

    // ln of Π Γ(κ_i) / Γ(Σκ) · t^{Σκ - 1}, the normaliser of the matched factors
    let kappa_sum: f64 = kappa.iter().sum();
    let log_norm = kappa.iter().map(|&k| ln_gamma(k)).sum::<f64>() - ln_gamma(kappa_sum) + (kappa_sum - 1.0) * t.ln();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = CompensatedSum::<f64>::default();
    let mut sum_sq = CompensatedSum::<f64>::default();
    let mut g = vec![0.0; n + 1];
    for _ in 0..samples {
        let mut total = 0.0;
        for (gi, dist) in g.iter_mut().zip(&gammas) {
            *gi = dist.sample(&mut rng);
            total += *gi;
        }
        // remaining factors Π_{i≥2} t_i^{α_i}
        let mut position = g[0] / total * t;
        let mut log_w = 0.0;
        for i in 1..n {
            position += g[i] / total * t;
            log_w += alphas[i] * position.ln();
        }
        let w = (log_w + log_norm).exp();
        sum.add(w);
        sum_sq.add(w * w);
    }
    let m = samples.max(1) as f64;
    let mean = sum.value() / m;
    let var = (sum_sq.value() / m - mean * mean).max(0.0) * m / (m - 1.0).max(1.0);
    let stderr = (var / m).sqrt();
    OracleEstimate {
        estimate: T::lit(mean),
        error_bound: T::lit(stderr),
        converged: stderr <= to_f(target_rel_err) * mean.abs(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(t: f64, a: &[f64], b: &[f64]) -> SimplexIntegralSpec<f64> {
        SimplexIntegralSpec::new(t, a.to_vec(), b.to_vec())
    }

    #[test]
    fn closed_form_trivial_cases() {
        assert!((closed_form(&spec(1.0, &[0.0], &[0.0])).unwrap().value - 1.0).abs() < 1e-15);
        assert!((closed_form(&spec(1.0, &[1.0], &[1.0])).unwrap().value - 1.0 / 6.0).abs() < 1e-15);
        assert!((closed_form(&spec(1.0, &[0.0, 0.0], &[0.0, 0.0])).unwrap().value - 0.5).abs() < 1e-15);
        // volume of the 3-simplex scaled by t^3
        let v = closed_form(&spec(2.0, &[0.0; 3], &[0.0; 3])).unwrap().value;
        assert!((v - 8.0 / 6.0).abs() < 1e-14);
    }

    #[test]
    fn condition_diagnostics() {
        assert_eq!(check_conditions(&spec(1.0, &[-2.0], &[0.0])), Err(ConditionViolation::Alpha1(-2.0)));
        assert!(check_conditions(&spec(1.0, &[0.5, -0.5], &[-0.25, 0.25])).is_ok());
        match check_conditions(&spec(1.0, &[-0.5, -2.4], &[-0.5, 0.0])) {
            Err(ConditionViolation::Coupling { k: 1, value }) => assert!((value + 1.4).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            check_conditions(&spec(1.0, &[0.0, 0.0], &[0.0, -1.0])),
            Err(ConditionViolation::Beta { index: 2, .. })
        ));
        assert!(matches!(check_conditions(&spec(1.0, &[0.0], &[0.0, 0.0])), Err(ConditionViolation::Shape { .. })));
        assert!(matches!(check_conditions(&spec(0.0, &[0.0], &[0.0])), Err(ConditionViolation::Time(_))));
        assert!(closed_form(&spec(1.0, &[-2.0], &[0.0])).is_err());
    }

    #[test]
    fn spectral_integral_values() {
        let pi = std::f64::consts::PI;
        assert!((gaussian_spectral_integral(0.0_f64, 1.0).unwrap() - pi.sqrt()).abs() < 1e-14);
        assert!((gaussian_spectral_integral(1.0_f64, 1.0).unwrap() - 1.0).abs() < 1e-14);
        let v = gaussian_spectral_integral(-0.5_f64, 2.0).unwrap();
        assert!((v - 3.048_762_374_932_151_685).abs() < 1e-13);
        assert!(gaussian_spectral_integral(-1.0, 1.0).is_err());
        assert!(gaussian_spectral_integral(0.0, 0.0).is_err());
    }

    #[test]
    fn quadrature_oracle_on_mixed_exponents() {
        let s = spec(2.0, &[0.5, -0.5], &[-0.25, 0.25]);
        let exact = closed_form(&s).unwrap().value;
        let q = brute_force(&s, OracleMethod::NestedQuadrature { rel_tol: 1e-10, max_level: 8 }).unwrap();
        assert!(((q.estimate - exact) / exact).abs() < 1e-6, "{} vs {exact}", q.estimate);
    }

    #[test]
    fn monte_carlo_oracle_on_beta_case() {
        let s = spec(1.0, &[1.0], &[1.0]);
        let mc = brute_force(&s, OracleMethod::MonteCarlo { samples: 1000, seed: 3, target_rel_err: 1e-3 }).unwrap();
        // the proposal matches the n = 1 integrand exactly: zero variance
        assert!((mc.estimate - 1.0 / 6.0).abs() < 1e-12);
        assert!(mc.converged);
    }

    #[test]
    fn oracle_dimension_limits() {
        let s = spec(1.0, &[0.0; 4], &[0.0; 4]);
        assert!(matches!(
            brute_force(&s, OracleMethod::NestedQuadrature { rel_tol: 1e-8, max_level: 6 }),
            Err(SimplexError::QuadratureDimension(4))
        ));
        let s = spec(1.0, &[0.0; 6], &[0.0; 6]);
        assert!(matches!(
            brute_force(&s, OracleMethod::MonteCarlo { samples: 10, seed: 0, target_rel_err: 0.1 }),
            Err(SimplexError::MonteCarloDimension(6))
        ));
    }
}
