//! Exponents attached to `a ∈ A_n`, the gamma products `γ_n(a)`, and the
//! per-chaos bound on `E|J_n(t,x)|²`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::params::{FractionalParams, ParamError};
use crate::paths::{for_each_exponent_vector, ExponentVector, PathError};
use crate::scalar::{log_add_exp, log_sum_exp, Real};
use crate::simplex::{check_conditions, closed_form, SimplexIntegralSpec};
use crate::special::ln_gamma;

/// Largest `n` accepted by the exact-constants bound.
pub const MAX_EXACT_N: usize = 30;
/// Largest `n` for the enumerating cross-check of the exact sum.
pub const MAX_ENUMERATED_SUM_N: usize = 20;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChaosError {
    #[error("n = {n} outside 1..={max}")]
    Size { n: usize, max: usize },
    #[error("t = {0} must be finite and > 0")]
    Time(f64),
    #[error("constant C = {0} must be finite and > 0")]
    Constant(f64),
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Path(#[from] PathError),
    #[error("internal consistency: gamma argument {value} <= 0 at k = {k}")]
    GammaArgument { k: usize, value: f64 },
    #[error("Γ(an+1+b) >= Cⁿ(n!)^a fails at n = {n_max}, the end of the range")]
    StirlingFails { n_max: usize },
    #[error("invalid Stirling input: {0}")]
    StirlingInput(&'static str),
}

/// `α_j = (1 − 2H) a_j`.
pub fn spatial_exponents<T: Real>(a: &ExponentVector, params: &FractionalParams<T>) -> Vec<T> {
    let s = params.spectral_exponent();
    a.as_slice().iter().map(|&e| s * T::from_count(e as usize)).collect()
}

/// Exponents of the simplex integral that appears after raising the spectral
/// bound to the power `1/(2H₀)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TildeExponents<T> {
    pub alpha_tilde: Vec<T>,
    pub beta_tilde: Vec<T>,
}

impl<T: Real> TildeExponents<T> {
    pub fn n(&self) -> usize {
        self.alpha_tilde.len()
    }

    pub fn simplex_spec(&self, t: T) -> SimplexIntegralSpec<T> {
        SimplexIntegralSpec::new(t, self.alpha_tilde.clone(), self.beta_tilde.clone())
    }
}

/// `α̃₁ = (4H−3+α₁)/(4H₀)`, `α̃_j = (4H−2+α_{j−1}+α_j)/(4H₀)`,
/// `β̃_j = −(α_j+1)/(4H₀)`.
pub fn tilde_exponents<T: Real>(alpha: &[T], params: &FractionalParams<T>) -> Result<TildeExponents<T>, ChaosError> {
    let n = alpha.len();
    if n == 0 {
        return Err(ChaosError::Size { n, max: usize::MAX });
    }
    let four = T::lit(4.0);
    let q = four * params.h0();
    let h4 = four * params.h();
    let mut alpha_tilde = Vec::with_capacity(n);
    alpha_tilde.push((h4 - T::lit(3.0) + alpha[0]) / q);
    for j in 1..n {
        alpha_tilde.push((h4 - T::lit(2.0) + alpha[j - 1] + alpha[j]) / q);
    }
    let beta_tilde: Vec<T> = alpha.iter().map(|&a| -(a + T::one()) / q).collect();
    if !(alpha_tilde[0] > -T::one()) {
        return Err(ParamError::Exponents(format!("alpha_tilde_1 = {} <= -1", alpha_tilde[0])).into());
    }
    if let Some((j, b)) = beta_tilde.iter().enumerate().find(|(_, &b)| !(b > -T::one())) {
        return Err(ParamError::Exponents(format!("beta_tilde_{} = {b} <= -1", j + 1)).into());
    }
    Ok(TildeExponents { alpha_tilde, beta_tilde })
}

/// The inductive integrability condition. Checks both
/// `Σ_{i≤k}(α̃_i+β̃_i)+k+1+α̃_{k+1} > 0` (what the gamma product needs) and the
/// same sum with the untilded `α_{k+1}`, for `k = 1..n−1`.
pub fn verify_ab_condition<T: Real>(tilde: &TildeExponents<T>, alpha: &[T]) -> bool {
    let n = tilde.n();
    if tilde.beta_tilde.len() != n || alpha.len() != n {
        return false;
    }
    if check_conditions(&tilde.simplex_spec(T::one())).is_err() {
        return false;
    }
    let mut partial = T::zero();
    for k in 1..n {
        partial = partial + tilde.alpha_tilde[k - 1] + tilde.beta_tilde[k - 1];
        if !(partial + T::from_count(k + 1) + alpha[k] > T::zero()) {
            return false;
        }
    }
    true
}

/// `θ_k` from the partial sum `S_{k−1} = a_1 + ... + a_{k−1}`.
fn theta_from_partial<T: Real>(k: usize, partial: usize, params: &FractionalParams<T>) -> T {
    let q = T::lit(4.0) * params.h0();
    let slope = (q + T::lit(4.0) * params.h() - T::lit(3.0)) / q;
    T::one() - q.recip() + T::from_count(k) * slope + params.theta_step() * T::from_count(partial)
}

/// `θ_k = Σ_{i≤k}(α̃_i+β̃_i) + k + 1` in closed form, `1 <= k <= n`.
pub fn theta<T: Real>(k: usize, a: &ExponentVector, params: &FractionalParams<T>) -> Result<T, ChaosError> {
    let n = a.n();
    if k == 0 || k > n {
        return Err(ChaosError::Size { n: k, max: n });
    }
    let partial: usize = a.as_slice()[..k - 1].iter().map(|&e| e as usize).sum();
    Ok(theta_from_partial(k, partial, params))
}

/// `θ_1, ..., θ_n`.
pub fn thetas<T: Real>(a: &ExponentVector, params: &FractionalParams<T>) -> Vec<T> {
    let mut partial = 0usize;
    let mut out = Vec::with_capacity(a.n());
    for (i, &e) in a.as_slice().iter().enumerate() {
        out.push(theta_from_partial(i + 1, partial, params));
        partial += e as usize;
    }
    out
}

/// `ln γ_n(a) = Σ_{k=1}^{n−1} ln Γ(θ_k + c(a_k+a_{k+1}−2)) − ln Γ(θ_k)`,
/// `c = (1−2H)/(4H₀)`.
pub fn log_gamma_n<T: Real>(a: &ExponentVector, params: &FractionalParams<T>) -> Result<T, ChaosError> {
    let th = thetas(a, params);
    let c = params.theta_step();
    let a = a.as_slice();
    let mut acc = T::zero();
    for k in 1..a.len() {
        let base = th[k - 1];
        let arg = base + c * (T::from_count(a[k - 1] as usize + a[k] as usize) - T::lit(2.0));
        if !(arg > T::zero()) || !(base > T::zero()) {
            return Err(ChaosError::GammaArgument { k, value: arg.min(base).to_f64_lossy() });
        }
        acc = acc + ln_gamma(arg) - ln_gamma(base);
    }
    Ok(acc)
}

pub fn gamma_n<T: Real>(a: &ExponentVector, params: &FractionalParams<T>) -> Result<T, ChaosError> {
    Ok(log_gamma_n(a, params)?.exp())
}

/// Whether `θ_{i−1} + c(a_{i−1}+a_i−2) <= θ_{i+1}` for every `2 <= i <= n−1`,
/// the comparison that orders the two gamma arguments in the monotonicity
/// argument.
pub fn neighbour_comparison_holds<T: Real>(a: &ExponentVector, params: &FractionalParams<T>) -> bool {
    let th = thetas(a, params);
    let c = params.theta_step();
    let s = a.as_slice();
    (2..s.len()).all(|i| {
        let lhs = th[i - 2] + c * (T::from_count(s[i - 2] as usize + s[i - 1] as usize) - T::lit(2.0));
        lhs <= th[i] + T::lit(1e-12)
    })
}

/// Which form of the per-chaos bound to produce.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum BoundMode<T> {
    /// Every gamma and `c_H` factor of the chain, summed over `A_n`.
    ExactConstants,
    /// `Cⁿ (n!)^{−H} t^{n(2H₀+H−1)}`.
    Asymptotic { c: T },
}

/// Bound on `E|J_n(t,x)|²` divided by `J₀(t,x)²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChaosTermBound<T> {
    pub n: usize,
    /// `max_{a ∈ A_n} γ_n(a)`.
    pub gamma_n: T,
    pub log_bound: T,
    /// Power of `t` carried by the bound.
    pub time_exponent: T,
    /// `ln Σ_{a ∈ A_n} T_a` before the power `2H₀` (exact mode only).
    pub log_path_sum: Option<T>,
}

impl<T: Real> ChaosTermBound<T> {
    pub fn bound(&self) -> T {
        self.log_bound.exp()
    }
}

/// Terms of `ln T_a` that depend on a single `a_j`: `ln Γ(β̃_j+1)` and
/// `(2H₀)^{-1} ln Γ((1+α_j)/2)`.
fn local_term<T: Real>(aj: usize, params: &FractionalParams<T>) -> T {
    let alpha = params.spectral_exponent() * T::from_count(aj);
    let q = T::lit(4.0) * params.h0();
    let beta_tilde = -(alpha + T::one()) / q;
    ln_gamma(beta_tilde + T::one()) + ln_gamma((T::one() + alpha) / T::lit(2.0)) / (T::lit(2.0) * params.h0())
}

/// `ln c_H^{n/(2H₀)}`.
fn log_spectral_constant<T: Real>(n: usize, params: &FractionalParams<T>) -> T {
    T::from_count(n) * params.c_h().ln() / (T::lit(2.0) * params.h0())
}

fn check_time<T: Real>(t: T) -> Result<(), ChaosError> {
    if t > T::zero() && t.is_finite() {
        Ok(())
    } else {
        Err(ChaosError::Time(t.to_f64_lossy()))
    }
}

/// `ln Σ_{a ∈ A_n} T_a` by a transfer recursion over `(a_k, S_k)`.
///
/// With `e_k = S_k − k ∈ {0, 1}` the state `(e_{k−1}, e_k)` fixes `a_k` and
/// `θ_k`, so the sum over `2^{n−1}` vectors costs `O(n)`.
pub fn log_path_sum<T: Real>(n: usize, t: T, params: &FractionalParams<T>) -> Result<T, ChaosError> {
    if n == 0 || n > MAX_EXACT_N {
        return Err(ChaosError::Size { n, max: MAX_EXACT_N });
    }
    check_time(t)?;
    let ninf = T::neg_infinity();
    let q = T::lit(4.0) * params.h0();
    let c = params.theta_step();
    let s = params.spectral_exponent();
    let local: [T; 3] = [local_term(0, params), local_term(1, params), local_term(2, params)];
    // v[prev][cur] over e_{k-1}, e_k; e_0 = 0, e_n = 0
    let mut v = [[ninf; 2]; 2];
    for e1 in 0..2usize {
        if n == 1 && e1 == 1 {
            continue;
        }
        let alpha1 = s * T::from_count(1 + e1);
        v[0][e1] = ln_gamma((T::lit(4.0) * params.h() - T::lit(3.0) + alpha1) / q + T::one());
    }
    for k in 1..n {
        let mut next = [[ninf; 2]; 2];
        for prev in 0..2usize {
            for cur in 0..2usize {
                let acc = v[prev][cur];
                if acc == ninf {
                    continue;
                }
                let ak = 1 + cur - prev;
                let theta_k = theta_from_partial(k, k - 1 + prev, params);
                for e_next in 0..2usize {
                    if k + 1 == n && e_next == 1 {
                        continue;
                    }
                    let ak1 = 1 + e_next - cur;
                    let arg = theta_k + c * (T::from_count(ak + ak1) - T::lit(2.0));
                    if !(arg > T::zero()) {
                        return Err(ChaosError::GammaArgument { k, value: arg.to_f64_lossy() });
                    }
                    let w = acc + local[ak] + ln_gamma(arg) - ln_gamma(theta_k);
                    next[cur][e_next] = log_add_exp(next[cur][e_next], w);
                }
            }
        }
        v = next;
    }
    let mut total = ninf;
    for prev in 0..2usize {
        let acc = v[prev][0];
        if acc == ninf {
            continue;
        }
        let an = 1 - prev;
        let theta_n = theta_from_partial(n, n - 1 + prev, params);
        let alpha_n = s * T::from_count(an);
        let tail = local[an] - ln_gamma(theta_n) + ((alpha_n + T::one()) / q + theta_n - T::one()) * t.ln();
        total = log_add_exp(total, acc + tail);
    }
    Ok(total + log_spectral_constant(n, params))
}

/// `ln T_a` assembled from the simplex closed form on the tilde exponents.
pub fn log_path_term<T: Real>(a: &ExponentVector, t: T, params: &FractionalParams<T>) -> Result<T, ChaosError> {
    check_time(t)?;
    let alpha = spatial_exponents(a, params);
    let tilde = tilde_exponents(&alpha, params)?;
    let cf = closed_form(&tilde.simplex_spec(t))
        .map_err(|e| ParamError::Exponents(e.to_string()))?;
    let two_h0 = T::lit(2.0) * params.h0();
    let n = a.n();
    let spectral: T = alpha.iter().map(|&x| ln_gamma((T::one() + x) / T::lit(2.0))).sum();
    Ok((alpha[n - 1] + T::one()) / (T::lit(2.0) * two_h0) * t.ln()
        + cf.log_value
        + log_spectral_constant(n, params)
        + spectral / two_h0)
}

/// `ln Σ_{a ∈ A_n} T_a` by walking every vector; cross-check for
/// [`log_path_sum`].
pub fn log_path_sum_enumerated<T: Real>(n: usize, t: T, params: &FractionalParams<T>) -> Result<T, ChaosError> {
    if n == 0 || n > MAX_ENUMERATED_SUM_N {
        return Err(ChaosError::Size { n, max: MAX_ENUMERATED_SUM_N });
    }
    let mut terms = Vec::with_capacity(1 << (n - 1));
    let mut failure = None;
    for_each_exponent_vector(n, |a| {
        if failure.is_some() {
            return;
        }
        match log_path_term(&ExponentVector::new(a.to_vec()).expect("enumerated"), t, params) {
            Ok(x) => terms.push(x),
            Err(e) => failure = Some(e),
        }
    })?;
    match failure {
        Some(e) => Err(e),
        None => Ok(log_sum_exp(&terms)),
    }
}

/// `max_{a ∈ A_n} ln γ_n(a)` by the max-plus version of the transfer recursion.
pub fn max_log_gamma_n<T: Real>(n: usize, params: &FractionalParams<T>) -> Result<T, ChaosError> {
    if n == 0 {
        return Err(ChaosError::Size { n, max: usize::MAX });
    }
    let ninf = T::neg_infinity();
    let c = params.theta_step();
    let mut v = [[ninf; 2]; 2];
    v[0][0] = T::zero();
    if n > 1 {
        v[0][1] = T::zero();
    }
    for k in 1..n {
        let mut next = [[ninf; 2]; 2];
        for prev in 0..2usize {
            for cur in 0..2usize {
                if v[prev][cur] == ninf {
                    continue;
                }
                let ak = 1 + cur - prev;
                let theta_k = theta_from_partial(k, k - 1 + prev, params);
                for e_next in 0..2usize {
                    if k + 1 == n && e_next == 1 {
                        continue;
                    }
                    let arg = theta_k + c * (T::from_count(ak + 1 + e_next - cur) - T::lit(2.0));
                    if !(arg > T::zero()) {
                        return Err(ChaosError::GammaArgument { k, value: arg.to_f64_lossy() });
                    }
                    let w = v[prev][cur] + ln_gamma(arg) - ln_gamma(theta_k);
                    next[cur][e_next] = next[cur][e_next].max(w);
                }
            }
        }
        v = next;
    }
    Ok(v[0][0].max(v[1][0]))
}

/// Per-chaos bound on `E|J_n(t,x)|² / J₀(t,x)²`.
///
/// Exact mode: `b_{H₀}ⁿ (n!)^{2H₀−1} [Σ_{a∈A_n} T_a]^{2H₀}`. Asymptotic mode:
/// `Cⁿ (n!)^{−H} t^{n(2H₀+H−1)}`. `n = 0` gives the bound 1.
pub fn term_bound<T: Real>(
    n: usize,
    t: T,
    params: &FractionalParams<T>,
    mode: BoundMode<T>,
) -> Result<ChaosTermBound<T>, ChaosError> {
    check_time(t)?;
    let nn = T::from_count(n);
    let time_exponent = nn * params.growth_exponent();
    if n == 0 {
        return Ok(ChaosTermBound { n, gamma_n: T::one(), log_bound: T::zero(), time_exponent, log_path_sum: None });
    }
    let log_fact = ln_gamma(nn + T::one());
    match mode {
        BoundMode::ExactConstants => {
            let sum = log_path_sum(n, t, params)?;
            let two_h0 = T::lit(2.0) * params.h0();
            let log_bound = nn * params.lhs_constant().ln() + (two_h0 - T::one()) * log_fact + two_h0 * sum;
            Ok(ChaosTermBound {
                n,
                gamma_n: max_log_gamma_n(n, params)?.exp(),
                log_bound,
                time_exponent,
                log_path_sum: Some(sum),
            })
        }
        BoundMode::Asymptotic { c } => {
            if !(c > T::zero()) || !c.is_finite() {
                return Err(ChaosError::Constant(c.to_f64_lossy()));
            }
            Ok(ChaosTermBound {
                n,
                gamma_n: T::one(),
                log_bound: nn * c.ln() - params.h() * log_fact + time_exponent * t.ln(),
                time_exponent,
                log_path_sum: None,
            })
        }
    }
}

/// Outcome of a Stirling-type lower bound scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StirlingCheck {
    /// Smallest `N` in the range with the inequality holding on `N..=n_max`.
    pub threshold: usize,
    pub n_max: usize,
}

/// Scans `ln Γ(an+1+b) >= n ln C + a ln Γ(n+1)` over `n_min..=n_max`.
pub fn stirling_lb_check<T: Real>(a: T, b: T, c: T, n_min: usize, n_max: usize) -> Result<StirlingCheck, ChaosError> {
    if !(a > T::zero()) {
        return Err(ChaosError::StirlingInput("a must be > 0"));
    }
    if !(c > T::zero()) {
        return Err(ChaosError::Constant(c.to_f64_lossy()));
    }
    if n_min > n_max {
        return Err(ChaosError::StirlingInput("empty range"));
    }
    let holds = |n: usize| {
        let nn = T::from_count(n);
        let arg = a * nn + T::one() + b;
        if !(arg > T::zero()) {
            return false;
        }
        // tolerance for the equality case a = 1, b = 0, C = 1
        let slack = T::lit(1e-12) * (T::one() + ln_gamma(arg).abs());
        ln_gamma(arg) + slack >= nn * c.ln() + a * ln_gamma(nn + T::one())
    };
    let mut threshold = n_max + 1;
    for n in (n_min..=n_max).rev() {
        if !holds(n) {
            break;
        }
        threshold = n;
    }
    if threshold > n_max {
        return Err(ChaosError::StirlingFails { n_max });
    }
    Ok(StirlingCheck { threshold, n_max })
}

/// `(a, b)` of the factorial lower bound used in the final summation:
/// `a = (2H₀+H−1)/(2H₀)`, `b = −(1−H)/(2H₀)`.
pub fn stirling_exponents<T: Real>(params: &FractionalParams<T>) -> (T, T) {
    let two_h0 = T::lit(2.0) * params.h0();
    (params.growth_exponent() / two_h0, -(T::one() - params.h()) / two_h0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::enumerate_exponent_vectors;

    fn p(h0: f64, h: f64) -> FractionalParams<f64> {
        FractionalParams::new(h0, h).unwrap()
    }

    fn ev(s: &[u8]) -> ExponentVector {
        ExponentVector::new(s.to_vec()).unwrap()
    }

    #[test]
    fn spatial_examples() {
        let q = p(0.75, 0.25);
        assert_eq!(spatial_exponents(&ev(&[1, 1]), &q), vec![0.5, 0.5]);
        assert_eq!(spatial_exponents(&ev(&[2, 0]), &q), vec![1.0, 0.0]);
        let a = spatial_exponents(&ev(&[2, 1, 1, 0]), &p(0.75, 0.3));
        for (x, y) in a.iter().zip([0.8, 0.4, 0.4, 0.0]) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn tilde_example() {
        let t = tilde_exponents(&[0.5, 0.5], &p(0.75, 0.25)).unwrap();
        // (1 - 3 + 0.5)/3 = -0.5, (1 - 2 + 1)/3 = 0, -(1.5)/3 = -0.5
        assert!((t.alpha_tilde[0] + 0.5).abs() < 1e-15);
        assert!(t.alpha_tilde[1].abs() < 1e-15);
        assert!(t.beta_tilde.iter().all(|b| (b + 0.5).abs() < 1e-15));
        assert!(verify_ab_condition(&t, &[0.5, 0.5]));
    }

    #[test]
    fn beta_tilde_boundary() {
        // α_j = 2(1 − 2H) gives β̃_j = −(3 − 4H)/(4H₀)
        let q = p(0.7, 0.1);
        let t = tilde_exponents(&[1.6, 0.0], &q).unwrap();
        assert!((t.beta_tilde[0] + (3.0 - 0.4) / 2.8).abs() < 1e-15);
        assert!(t.beta_tilde[0] > -1.0);
    }

    #[test]
    fn theta_recurrence_and_tilde_sums() {
        let q = p(0.8, 0.3);
        let c = q.theta_step();
        let slope = (3.2 + 1.2 - 3.0) / 3.2;
        for a in enumerate_exponent_vectors(7).unwrap() {
            let th = thetas(&a, &q);
            assert!((th[0] - ((0.3 - 1.0) / 0.8 + 2.0)).abs() < 1e-12);
            for k in 1..th.len() {
                let step = slope + c * a.as_slice()[k - 1] as f64;
                assert!((th[k] - th[k - 1] - step).abs() < 1e-12);
            }
            let tilde = tilde_exponents(&spatial_exponents(&a, &q), &q).unwrap();
            let mut partial = 0.0;
            for k in 0..th.len() {
                partial += tilde.alpha_tilde[k] + tilde.beta_tilde[k];
                assert!((partial + (k + 2) as f64 - th[k]).abs() < 1e-12);
            }
            assert_eq!(theta(3, &a, &q).unwrap(), th[2]);
        }
        assert!(theta(0, &ev(&[1, 1]), &q).is_err());
    }

    #[test]
    fn gamma_n_examples() {
        let q = p(0.8, 0.3);
        assert_eq!(gamma_n(&ExponentVector::all_ones(9).unwrap(), &q).unwrap(), 1.0);
        // for n = 2 the single factor has a_1 + a_2 = 2, so γ_2 ≡ 1
        assert!((gamma_n(&ev(&[2, 0]), &q).unwrap() - 1.0).abs() < 1e-15);
        let g = gamma_n(&ev(&[2, 0, 1]), &q).unwrap();
        assert!(g > 0.0 && g < 1.0);
        assert!((max_log_gamma_n(2, &q).unwrap()).abs() < 1e-15);
        assert_eq!(max_log_gamma_n(1, &q).unwrap(), 0.0);
    }

    #[test]
    fn gamma_product_agrees_with_simplex_closed_form() {
        let q = p(0.7, 0.2);
        for a in enumerate_exponent_vectors(6).unwrap() {
            let tilde = tilde_exponents(&spatial_exponents(&a, &q), &q).unwrap();
            let cf = closed_form(&tilde.simplex_spec(1.0)).unwrap();
            assert!((cf.log_gamma_product - log_gamma_n(&a, &q).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn transfer_sum_matches_enumeration() {
        for q in [p(0.75, 0.3), p(0.85, 0.2), p(0.6, 0.45)] {
            for n in 1..=12 {
                for t in [0.3, 1.0, 7.0] {
                    let dp = log_path_sum(n, t, &q).unwrap();
                    let en = log_path_sum_enumerated(n, t, &q).unwrap();
                    assert!((dp - en).abs() < 1e-11 * (1.0 + en.abs()), "n={n} t={t}: {dp} vs {en}");
                }
            }
        }
    }

    #[test]
    fn term_bound_modes() {
        let q = p(0.75, 0.3);
        let zero = term_bound(0, 2.0, &q, BoundMode::ExactConstants).unwrap();
        assert_eq!(zero.bound(), 1.0);
        let asym = term_bound(3, 2.0, &q, BoundMode::Asymptotic { c: 1.5 }).unwrap();
        let want = 3.0 * 1.5_f64.ln() - 0.3 * 6.0_f64.ln() + 3.0 * 0.8 * 2.0_f64.ln();
        assert!((asym.log_bound - want).abs() < 1e-13);
        assert!((asym.time_exponent - 2.4).abs() < 1e-15);
        assert!(term_bound(31, 1.0, &q, BoundMode::ExactConstants).is_err());
        assert!(term_bound(30, 1.0, &q, BoundMode::ExactConstants).is_ok());
        let ex = term_bound(4, 1.0, &q, BoundMode::ExactConstants).unwrap();
        let enumerated = enumerate_exponent_vectors(4)
            .unwrap()
            .iter()
            .map(|a| gamma_n(a, &q).unwrap())
            .fold(0.0, f64::max);
        assert!((ex.gamma_n - enumerated).abs() < 1e-14);
        // a = 1120 beats the diagonal here
        assert!(ex.gamma_n > 1.0);
    }

    #[test]
    fn exact_bound_scales_with_the_lhs_constant() {
        let q = p(0.75, 0.3);
        let q2 = q.with_lhs_constant(2.0).unwrap();
        let a = term_bound(5, 1.3, &q, BoundMode::ExactConstants).unwrap();
        let b = term_bound(5, 1.3, &q2, BoundMode::ExactConstants).unwrap();
        assert!((b.log_bound - a.log_bound - 5.0 * 2.0_f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn stirling_examples() {
        assert_eq!(stirling_lb_check(1.0, 0.0, 1.0, 1, 300).unwrap().threshold, 1);
        let q = p(0.75, 0.25);
        let (a, b) = stirling_exponents(&q);
        let r = stirling_lb_check(a, b, 0.5, 1, 200).unwrap();
        assert!(r.threshold <= 200);
        assert!(matches!(stirling_lb_check(0.5, 0.0, 2.0, 1, 500), Err(ChaosError::StirlingFails { .. })));
    }
}
