//! Summation of the hypercontractive chaos series and the moment envelope.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::initial::{j0, InitialError, InitialMeasure};
use crate::params::FractionalParams;
use crate::quadrature::{tanh_sinh, QuadOptions};
use crate::scalar::{CompensatedSum, Real};
use crate::special::{digamma, ln_gamma};

/// Terms summed one by one up to this window size; wider peaks are integrated.
pub const MAX_DIRECT_TERMS: usize = 200_000;
/// Terms more than `e^{-60}` below the largest one are dropped.
const LOG_DROP: f64 = 60.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MomentError {
    #[error("p = {0} must be >= 2")]
    Order(f64),
    #[error("series argument {name} = {value} out of range")]
    Argument { name: &'static str, value: f64 },
    #[error("series peak index {0:e} too large to locate")]
    PeakOverflow(f64),
    #[error(transparent)]
    Initial(#[from] InitialError),
    #[error("envelope fit needs at least one finite point")]
    EmptyFit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesMethod {
    /// Terms added individually.
    Direct,
    /// Sum replaced by the integral of the term function across the peak.
    Integral,
}

/// `ln Σ_{n≥0} yⁿ / (n!)^a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesSum<T> {
    pub log_value: T,
    /// Index of the largest term.
    pub peak_index: u64,
    /// Last index that contributes; terms beyond are below `e^{-60}` of the peak.
    pub truncation_index: u64,
    pub method: SeriesMethod,
}

/// `ln Γ(z + d) − ln Γ(z)` without cancellation for large `z`.
fn ln_gamma_diff<T: Real>(z: T, d: T) -> T {
    let big = T::lit(1e4);
    if z < big || z + d < big {
        return ln_gamma(z + d) - ln_gamma(z);
    }
    let half = T::lit(0.5);
    let w = z + d;
    let inv = |x: T| x.recip();
    let cube = |x: T| x * x * x;
    (z - half) * (d / z).ln_1p() + d * w.ln() - d + (inv(w) - inv(z)) / T::lit(12.0)
        - (inv(cube(w)) - inv(cube(z))) / T::lit(360.0)
        + (inv(cube(w) * w * w) - inv(cube(z) * z * z)) / T::lit(1260.0)
}

/// Real maximiser of `ν ln y − a ln Γ(ν+1)` over `ν >= 0`.
fn peak<T: Real>(log_y: T, a: T) -> Result<T, MomentError> {
    let level = log_y / a;
    let euler = T::lit(0.577_215_664_901_532_9);
    if level <= -euler {
        return Ok(T::zero());
    }
    // ψ(x) < ln x and ψ(x) > ln x − 1/x bracket the root of ψ(ν + 1) = level
    let e = level.exp();
    if !(e < T::lit(1e18)) {
        return Err(MomentError::PeakOverflow(e.to_f64_lossy()));
    }
    let mut lo = (e - T::lit(2.0)).max(T::zero());
    let mut hi = e + T::one();
    let psi = |x: T| digamma(x + T::one()).unwrap_or(T::nan());
    for _ in 0..200 {
        let mid = (lo + hi) * T::lit(0.5);
        if mid <= lo || mid >= hi {
            break;
        }
        if psi(mid) < level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) * T::lit(0.5))
}

/// `ln Σ_{n≥0} yⁿ / (n!)^a` for `y >= 0`, `a > 0`.
///
/// The sum is taken over the window where terms exceed `e^{-60}` of the peak.
/// Windows wider than [`MAX_DIRECT_TERMS`] are integrated instead: the term
/// function is analytic with a Gaussian-like peak of width `σ > 9000` there,
/// so sum and integral agree far below double precision.
pub fn log_factorial_power_series<T: Real>(y: T, a: T) -> Result<SeriesSum<T>, MomentError> {
    if !(a > T::zero()) || !a.is_finite() {
        return Err(MomentError::Argument { name: "a", value: a.to_f64_lossy() });
    }
    if !(y >= T::zero()) || !y.is_finite() {
        return Err(MomentError::Argument { name: "y", value: y.to_f64_lossy() });
    }
    if y == T::zero() {
        return Ok(SeriesSum { log_value: T::zero(), peak_index: 0, truncation_index: 0, method: SeriesMethod::Direct });
    }
    let log_y = y.ln();
    let nu = peak(log_y, a)?;
    let drop = T::lit(LOG_DROP);
    // curvature of the exponent at the peak is about −a / (ν + 1)
    let sigma = ((nu + T::one()) / a).sqrt();
    let half_width = (T::lit(2.0) * drop).sqrt() * sigma;
    let nu_f = nu.to_f64_lossy();
    if (T::lit(2.0) * half_width).to_f64_lossy() < MAX_DIRECT_TERMS as f64 {
        let n_star = nu_f.round() as u64;
        let ns = T::from_u64(n_star).expect("index fits");
        let rel = |n: u64| {
            let d = T::from_u64(n).expect("index fits") - ns;
            d * log_y - a * ln_gamma_diff(ns + T::one(), d)
        };
        let phi_star = ns * log_y - a * ln_gamma(ns + T::one());
        let mut acc = CompensatedSum::default();
        acc.add(T::one());
        let mut n = n_star;
        while n > 0 {
            n -= 1;
            let r = rel(n);
            if r < -drop {
                break;
            }
            acc.add(r.exp());
        }
        let mut n = n_star;
        loop {
            n += 1;
            let r = rel(n);
            if r < -drop {
                break;
            }
            acc.add(r.exp());
        }
        return Ok(SeriesSum {
            log_value: phi_star + acc.value().ln(),
            peak_index: n_star,
            truncation_index: n - 1,
            method: SeriesMethod::Direct,
        });
    }
    let phi_ref = nu * log_y - a * ln_gamma(nu + T::one());
    let f = |s: T| ((s - nu) * log_y - a * ln_gamma_diff(nu + T::one(), s - nu)).exp();
    let panels = 24;
    let lo = nu - half_width * T::lit(1.1);
    let step = half_width * T::lit(2.2) / T::from_count(panels);
    let opts = QuadOptions { rel_tol: T::lit(1e-13), abs_tol: T::zero(), max_level: 8, min_level: 2 };
    let mut acc = CompensatedSum::default();
    for k in 0..panels {
        let a0 = lo + step * T::from_count(k);
        acc.add(tanh_sinh(|s, _, _| f(s), a0, a0 + step, &opts).value);
    }
    Ok(SeriesSum {
        log_value: phi_ref + acc.value().ln(),
        peak_index: nu_f.round() as u64,
        truncation_index: (nu + half_width * T::lit(1.1)).to_f64_lossy().ceil() as u64,
        method: SeriesMethod::Integral,
    })
}

/// The `p`-th moment series `[J₀ Σ_n ((p−1)C)^{n/2} (n!)^{−H/2} t^{n(2H₀+H−1)/2}]^p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSeries<T> {
    pub p: T,
    pub t: T,
    pub log_j0: T,
    /// `ln Σ_n ...` without the `J₀` factor.
    pub log_sum: T,
    /// `p (ln J₀ + log_sum)`.
    pub log_series_value: T,
    pub truncation_index: u64,
    pub method: SeriesMethod,
}

impl<T: Real> MomentSeries<T> {
    pub fn series_value(&self) -> T {
        self.log_series_value.exp()
    }

    /// `ln series_value − p ln J₀`.
    pub fn log_series_over_j0(&self) -> T {
        self.p * self.log_sum
    }
}

pub fn moment_series<T: Real>(
    p: T,
    t: T,
    x: T,
    params: &FractionalParams<T>,
    measure: &InitialMeasure<T>,
    c: T,
) -> Result<MomentSeries<T>, MomentError> {
    if !(p >= T::lit(2.0)) || !p.is_finite() {
        return Err(MomentError::Order(p.to_f64_lossy()));
    }
    if !(c > T::zero()) || !c.is_finite() {
        return Err(MomentError::Argument { name: "C", value: c.to_f64_lossy() });
    }
    if !(t > T::zero()) || !t.is_finite() {
        return Err(MomentError::Argument { name: "t", value: t.to_f64_lossy() });
    }
    let log_j0 = j0(t, x, measure)?.ln();
    let y = ((p - T::one()) * c).sqrt() * t.powf(params.growth_exponent() / T::lit(2.0));
    let s = log_factorial_power_series(y, params.h() / T::lit(2.0))?;
    Ok(MomentSeries {
        p,
        t,
        log_j0,
        log_sum: s.log_value,
        log_series_value: p * (log_j0 + s.log_value),
        truncation_index: s.truncation_index,
        method: s.method,
    })
}

/// Witnesses for `E|u|^p <= C₁^p J₀^p exp(C₂ p^{(H+1)/H} t^{(2H₀+H−1)/H})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeFit<T> {
    pub c1: T,
    pub c2: T,
    pub log_c1: T,
    /// Largest `ln envelope − ln series` over the fitted points.
    pub max_gap: T,
}

impl<T: Real> EnvelopeFit<T> {
    /// `ln envelope − p ln J₀` at `(p, t)`.
    pub fn log_envelope_over_j0(&self, p: T, t: T, params: &FractionalParams<T>) -> T {
        p * self.log_c1 + self.c2 * envelope_q(p, t, params)
    }
}

fn envelope_q<T: Real>(p: T, t: T, params: &FractionalParams<T>) -> T {
    p.powf(params.envelope_p_exponent()) * t.powf(params.envelope_time_exponent())
}

/// Fits `(C₁, C₂)` so that the envelope dominates every series point while
/// minimising the largest log-gap relative to the series log value.
///
/// For fixed `C₂` the smallest admissible `ln C₁` is explicit; the remaining
/// objective is convex in `C₂` and is minimised by golden-section search.
pub fn fit_envelope<T: Real>(points: &[MomentSeries<T>], params: &FractionalParams<T>) -> Result<EnvelopeFit<T>, MomentError> {
    let pts: Vec<(T, T, T)> = points
        .iter()
        .filter(|s| s.log_sum.is_finite())
        .map(|s| (s.p, envelope_q(s.p, s.t, params), s.log_series_over_j0()))
        .collect();
    if pts.is_empty() {
        return Err(MomentError::EmptyFit);
    }
    let log_c1_for = |c2: T| {
        pts.iter().map(|&(p, q, l)| (l - c2 * q) / p).fold(T::neg_infinity(), T::max)
    };
    let objective = |c2: T| {
        let lc1 = log_c1_for(c2);
        pts.iter()
            .map(|&(p, q, l)| (p * lc1 + c2 * q - l) / (T::one() + l.abs()))
            .fold(T::neg_infinity(), T::max)
    };
    let mut hi = pts.iter().map(|&(_, q, l)| l.abs() / q).fold(T::zero(), T::max) * T::lit(2.0) + T::lit(1e-300);
    let mut lo = T::zero();
    let g = T::lit(0.618_033_988_749_894_9);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (objective(x1), objective(x2));
    for _ in 0..300 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = objective(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = objective(x2);
        }
    }
    let mut c2 = (lo + hi) * T::lit(0.5);
    if !(c2 > T::zero()) {
        c2 = T::min_positive_value();
    }
    // nudge upwards so rounding cannot put the envelope below a fitted point
    let raw = log_c1_for(c2);
    let log_c1 = raw + T::lit(1e-12) * (T::one() + raw.abs());
    let max_gap = pts
        .iter()
        .map(|&(p, q, l)| p * log_c1 + c2 * q - l)
        .fold(T::neg_infinity(), T::max);
    Ok(EnvelopeFit { c1: log_c1.exp(), c2, log_c1, max_gap })
}

/// One row of a bound table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentBound<T> {
    pub t: T,
    pub p: T,
    pub log_series_value: T,
    pub log_envelope_value: T,
    pub series_value: T,
    pub envelope_value: T,
    pub truncation_index: u64,
}

/// Series value and envelope at `(p, t)` for fitted witnesses.
pub fn moment_bound<T: Real>(
    p: T,
    t: T,
    x: T,
    params: &FractionalParams<T>,
    measure: &InitialMeasure<T>,
    c: T,
    fit: &EnvelopeFit<T>,
) -> Result<MomentBound<T>, MomentError> {
    let s = moment_series(p, t, x, params, measure, c)?;
    Ok(bound_row(&s, params, fit))
}

fn bound_row<T: Real>(s: &MomentSeries<T>, params: &FractionalParams<T>, fit: &EnvelopeFit<T>) -> MomentBound<T> {
    let log_env = s.p * s.log_j0 + fit.log_envelope_over_j0(s.p, s.t, params);
    MomentBound {
        t: s.t,
        p: s.p,
        log_series_value: s.log_series_value,
        log_envelope_value: log_env,
        series_value: s.log_series_value.exp(),
        envelope_value: log_env.exp(),
        truncation_index: s.truncation_index,
    }
}

/// Series over a `(p, t)` grid with envelope witnesses fitted on that grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundTable<T> {
    pub rows: Vec<MomentBound<T>>,
    pub series: Vec<MomentSeries<T>>,
    pub fit: EnvelopeFit<T>,
}

pub fn bound_table<T: Real>(
    ps: &[T],
    ts: &[T],
    x: T,
    params: &FractionalParams<T>,
    measure: &InitialMeasure<T>,
    c: T,
) -> Result<BoundTable<T>, MomentError> {
    let mut series = Vec::with_capacity(ps.len() * ts.len());
    for &t in ts {
        for &p in ps {
            series.push(moment_series(p, t, x, params, measure, c)?);
        }
    }
    let fit = fit_envelope(&series, params)?;
    let rows = series.iter().map(|s| bound_row(s, params, &fit)).collect();
    Ok(BoundTable { rows, series, fit })
}

/// Least-squares slope of `ys` against `xs`.
pub fn least_squares_slope<T: Real>(xs: &[T], ys: &[T]) -> T {
    let n = T::from_count(xs.len());
    let mx = xs.iter().copied().sum::<T>() / n;
    let my = ys.iter().copied().sum::<T>() / n;
    let sxy: T = xs.iter().zip(ys).map(|(&x, &y)| (x - mx) * (y - my)).sum();
    let sxx: T = xs.iter().map(|&x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Fitted power of `t` in `ln series_value / p − ln J₀`, i.e. slope of
/// `ln(log_sum)` against `ln t`.
pub fn fit_time_exponent<T: Real>(series: &[MomentSeries<T>]) -> T {
    let xs: Vec<T> = series.iter().map(|s| s.t.ln()).collect();
    let ys: Vec<T> = series.iter().map(|s| s.log_sum.ln()).collect();
    least_squares_slope(&xs, &ys)
}

/// Fitted power of `p` in `ln series_value − p ln J₀` at fixed `t`.
///
/// The series depends on `p` through `p − 1`, so the slope of `ln(log_sum)`
/// against `ln(p − 1)` is measured and the outer power `p` adds one.
pub fn fit_p_exponent<T: Real>(series: &[MomentSeries<T>]) -> T {
    let xs: Vec<T> = series.iter().map(|s| (s.p - T::one()).ln()).collect();
    let ys: Vec<T> = series.iter().map(|s| s.log_sum.ln()).collect();
    T::one() + least_squares_slope(&xs, &ys)
}

/// Plain slope of `ln(ln series_value − p ln J₀)` against `ln p`.
pub fn fit_p_exponent_naive<T: Real>(series: &[MomentSeries<T>]) -> T {
    let xs: Vec<T> = series.iter().map(|s| s.p.ln()).collect();
    let ys: Vec<T> = series.iter().map(|s| s.log_series_over_j0().ln()).collect();
    least_squares_slope(&xs, &ys)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(y: f64, a: f64, terms: usize) -> f64 {
        let logs: Vec<f64> = (0..terms).map(|n| n as f64 * y.ln() - a * ln_gamma(n as f64 + 1.0)).collect();
        crate::scalar::log_sum_exp(&logs)
    }

    #[test]
    fn exponential_series() {
        for y in [0.01_f64, 1.0, 7.5, 300.0, 5e4] {
            let s = log_factorial_power_series(y, 1.0).unwrap();
            assert!((s.log_value - y).abs() < 1e-12 * y.max(1.0), "y={y}: {}", s.log_value);
        }
    }

    #[test]
    fn matches_brute_force_for_small_peaks() {
        for (y, a) in [(0.5_f64, 0.15), (3.0, 0.15), (2.0, 0.5), (1.5, 0.1)] {
            let s = log_factorial_power_series(y, a).unwrap();
            let b = brute(y, a, 200_000);
            assert!((s.log_value - b).abs() < 1e-10 * b.abs().max(1.0), "{y} {a}: {} vs {b}", s.log_value);
        }
    }

    #[test]
    fn integral_regime_is_continuous_with_direct() {
        // a = 1 has the closed form e^y even deep in the integral regime
        let s = log_factorial_power_series(1e12_f64, 1.0).unwrap();
        assert_eq!(s.method, SeriesMethod::Integral);
        assert!(((s.log_value - 1e12) / 1e12).abs() < 1e-13);
        // a = 1/2: ln Σ yⁿ/√(n!) ≈ y²/2 + ln y /2 + ln(2π)/4 + ... for large y
        let y = 1.0e4_f64;
        let s = log_factorial_power_series(y, 0.5).unwrap();
        assert_eq!(s.method, SeriesMethod::Integral);
        let approx = y * y / 2.0 + 0.5 * y.ln() + 0.25 * (2.0 * std::f64::consts::PI).ln() + 0.5 * 2.0_f64.ln();
        assert!((s.log_value - approx).abs() < 1e-3, "{} vs {approx}", s.log_value);
    }

    #[test]
    fn series_near_zero_time_is_j0_power() {
        let params = FractionalParams::new(0.75_f64, 0.3).unwrap();
        let dirac = InitialMeasure::Dirac { x0: 0.0 };
        let s = moment_series(2.0, 1e-12, 0.0, &params, &dirac, 1.0).unwrap();
        assert!(s.log_sum.abs() < 1e-4);
        assert!((s.log_series_value - 2.0 * s.log_j0).abs() < 1e-3);
    }

    #[test]
    fn envelope_dominates() {
        let params = FractionalParams::new(0.75_f64, 0.3).unwrap();
        let leb = InitialMeasure::Lebesgue { c: 1.0 };
        let table = bound_table(&[2.0, 4.0, 8.0], &[1.0, 3.0, 10.0], 0.0, &params, &leb, 2.0).unwrap();
        assert!(table.fit.c1 > 0.0 && table.fit.c2 > 0.0);
        for r in &table.rows {
            assert!(r.log_envelope_value >= r.log_series_value, "{r:?}");
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let params = FractionalParams::new(0.75_f64, 0.3).unwrap();
        let leb = InitialMeasure::Lebesgue { c: 1.0 };
        assert!(matches!(moment_series(1.5, 1.0, 0.0, &params, &leb, 1.0), Err(MomentError::Order(_))));
        assert!(moment_series(2.0, 1.0, 0.0, &params, &leb, 0.0).is_err());
        assert!(log_factorial_power_series(1.0_f64, 0.0).is_err());
    }
}
