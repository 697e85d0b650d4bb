//! Monte Carlo estimates of the exact low-order chaos norms `n!‖f̃_n‖²`
//! (`n ≤ 2`) and numerical checks of the bound chain against them.
//!
//! This module is `f64` only. Supported initial data are the ones whose
//! kernels have Gaussian spatial Fourier transforms: Dirac, Gaussian density
//! and Lebesgue.
//!
//! # Estimator
//!
//! For ordered times the kernel `f_n(t, ·)` is `J₀(t,x)` times the law of a
//! Gaussian chain (a Brownian bridge for Dirac data), so
//! `n! F f̃_n(t)(ξ) = J₀ exp(−i Σ ξ_j m(t_j) − ½ ξᵀK(t)ξ)` and
//!
//! `ψ(t,s) = J₀² ∫ μ(dξ) cos(Σ ξ_j (m(t_j) − m(s_j))) e^{−½ ξᵀ(K(t)+K(s))ξ}`.
//!
//! The `ξ` integral is done deterministically: `n = 1` in closed form through
//! Kummer's function, `n = 2` by whitening with the Cholesky factor and a
//! one-dimensional angular quadrature. Only the `2n` time variables are
//! sampled: ordered times from a scaled Dirichlet(κ, …, κ) law on the gaps
//! (mass near coinciding times and the endpoints), and `s_j = t_j + d_j` with
//! `|d_j|` drawn from the `|d|^{2H₀−2}` profile on `[−t, t]`.
//!
//! The second route ([`chaos_norm_estimate_direct`]) evaluates `n!‖f̃_n‖²`
//! literally: `f̃_n` is averaged over permutations, its Fourier transform is
//! built by composing heat kernels one step at a time in complex arithmetic,
//! and `ξ` is sampled. Agreement of the two routes checks the `n!` factors.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chaos::{term_bound, BoundMode, ChaosError};
use crate::initial::{heat_kernel_unchecked, j0, InitialError, InitialMeasure};
use crate::params::FractionalParams;
use crate::quadrature::{tanh_sinh, QuadOptions};
use crate::scalar::CompensatedSum;
use crate::special::ln_gamma;

/// Highest chaos order the verifier handles.
pub const MAX_MC_ORDER: usize = 2;
/// Samples per random stream.
const BATCH: u64 = 1024;
/// `ξ` draws per time sample in the direct route.
const XI_DRAWS: usize = 4;

#[derive(Debug, Error)]
pub enum McError {
    #[error("chaos order n = {0} outside 1..=2")]
    Order(usize),
    #[error("time t = {0} must be finite and > 0")]
    Time(f64),
    #[error("initial measure {0} not supported here (dirac, gaussian or lebesgue)")]
    Measure(String),
    #[error("times must be strictly increasing in (0, t) and match the points")]
    Times,
    #[error("budget: {0}")]
    Budget(String),
    #[error(transparent)]
    Initial(#[from] InitialError),
    #[error(transparent)]
    Chaos(#[from] ChaosError),
}

/// Covariance structure of the noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub params: FractionalParams<f64>,
}

impl NoiseSpec {
    pub fn new(params: FractionalParams<f64>) -> Self {
        Self { params }
    }

    /// Density of `μ(dξ)`: `c_H |ξ|^{1−2H}`.
    pub fn spectral_weight(&self, xi: f64) -> f64 {
        self.params.c_h() * xi.abs().powf(self.params.spectral_exponent())
    }

    /// `α_{H₀} |τ|^{2H₀−2}`.
    pub fn temporal_weight(&self, tau: f64) -> f64 {
        self.params.alpha_h0() * tau.abs().powf(2.0 * self.params.h0() - 2.0)
    }
}

/// Sample count and parallelism of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McBudget {
    pub samples: u64,
    pub workers: usize,
    /// When set, `target_met` reports whether `stderr ≤ target · |mean|`.
    #[serde(default)]
    pub target_rel_err: Option<f64>,
}

impl Default for McBudget {
    fn default() -> Self {
        Self { samples: 200_000, workers: 1, target_rel_err: None }
    }
}

impl McBudget {
    pub fn new(samples: u64, workers: usize) -> Self {
        Self { samples, workers, target_rel_err: None }
    }

    fn validate(&self) -> Result<(), McError> {
        if self.samples < 2 {
            return Err(McError::Budget(format!("need at least 2 samples, got {}", self.samples)));
        }
        if self.workers == 0 {
            return Err(McError::Budget("workers must be >= 1".into()));
        }
        if let Some(r) = self.target_rel_err {
            if !(r > 0.0) {
                return Err(McError::Budget(format!("target_rel_err = {r} must be > 0")));
            }
        }
        Ok(())
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorResult {
    pub mean: f64,
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
    /// False when a relative-error target was set and not reached.
    pub target_met: bool,
}

/// The normalisations that turn the kernel integrals into `E|J_n|²`.
///
/// Starting point: `E|J_n|² = n!‖f̃_n‖²` with
/// `‖f̃_n‖² = α_{H₀}ⁿ ∫_{[0,t]^{2n}} Π|t_j−s_j|^{2H₀−2} ∫ μ(dξ) F f̃_n(t)(ξ) conj(F f̃_n(s)(ξ))`.
///
/// * `psi_symmetrisation`: `ψ` is defined with a factor `(n!)²` in front of
///   `F f̃_n(t) conj(F f̃_n(s))`. Since `f̃_n = (1/n!) Σ_ρ f_n ∘ ρ` and exactly
///   one ordering of distinct times survives the indicator,
///   `n! F f̃_n(t) = J₀ exp(−iΣξ_j m(t_j) − ½ξᵀK(t)ξ)` for every `t`; the
///   `(n!)²` and the two `1/n!` cancel, leaving factor 1 on the Gaussian form.
/// * `step_one`: with that `ψ`, `E|J_n|² = (1/n!) α_{H₀}ⁿ ∫∫ Π|t_j−s_j|^{2H₀−2} ψ(t,s)`,
///   i.e. `n! · (n!)^{−2}`.
/// * `ordered_region`: the integrand is invariant under permuting the pairs
///   `(t_j, s_j)` together, so `∫_{[0,t]ⁿ} dt = n! ∫_{t₁<…<t_n} dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorBook {
    pub psi_symmetrisation: f64,
    pub step_one: f64,
    pub ordered_region: f64,
}

impl FactorBook {
    pub fn total(&self) -> f64 {
        self.psi_symmetrisation * self.step_one * self.ordered_region
    }
}

pub fn factor_book(n: usize) -> FactorBook {
    let fact = factorial(n);
    FactorBook { psi_symmetrisation: 1.0, step_one: 1.0 / fact, ordered_region: fact }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// The Gaussian chain behind `f_n`: position at time `τ` given arrival at
/// `x` at time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Chain {
    /// Start distributed `N(start, var)` (`var = 0` for a Dirac mass).
    Pinned { start: f64, var: f64 },
    /// Lebesgue data `c dx`: a free backward Brownian motion from `x`.
    Free { c: f64 },
}

impl Chain {
    fn from_measure(measure: &InitialMeasure<f64>) -> Result<Self, McError> {
        measure.validate()?;
        match *measure {
            InitialMeasure::Dirac { x0 } => Ok(Chain::Pinned { start: x0, var: 0.0 }),
            InitialMeasure::Gaussian { mean, variance } => Ok(Chain::Pinned { start: mean, var: variance }),
            InitialMeasure::Lebesgue { c } => Ok(Chain::Free { c }),
            ref other => Err(McError::Measure(format!("{other:?}"))),
        }
    }

    fn mean(&self, tau: f64, t: f64, x: f64) -> f64 {
        match *self {
            Chain::Pinned { start, var } => start + (var + tau) * (x - start) / (var + t),
            Chain::Free { .. } => x,
        }
    }

    fn cov(&self, a: f64, b: f64, t: f64) -> f64 {
        match *self {
            Chain::Pinned { var, .. } => var + a.min(b) - (var + a) * (var + b) / (var + t),
            Chain::Free { .. } => t - a.max(b),
        }
    }

    fn cov_matrix(&self, times: &[f64], t: f64) -> DMatrix<f64> {
        let n = times.len();
        DMatrix::from_fn(n, n, |i, j| self.cov(times[i], times[j], t))
    }

    /// `ln` of `J₀(t₁, y)` written as `exp(ln C + a y² + b y)`.
    fn initial_state(&self, t1: f64) -> ComplexGaussian {
        match *self {
            Chain::Pinned { start, var } => {
                let s = var + t1;
                ComplexGaussian {
                    log_c: Complex64::new(-0.5 * (2.0 * PI * s).ln() - start * start / (2.0 * s), 0.0),
                    a: -1.0 / (2.0 * s),
                    b: Complex64::new(start / s, 0.0),
                }
            }
            Chain::Free { c } => ComplexGaussian { log_c: Complex64::new(c.ln(), 0.0), a: 0.0, b: Complex64::new(0.0, 0.0) },
        }
    }
}

/// `y ↦ exp(log_c + a y² + b y)` with `a ≤ 0` real.
#[derive(Debug, Clone, Copy)]
struct ComplexGaussian {
    log_c: Complex64,
    a: f64,
    b: Complex64,
}

impl ComplexGaussian {
    /// `z ↦ ∫ g(y) e^{−iξy} G(Δ, z−y) dy`.
    fn step(self, delta: f64, xi: f64) -> Self {
        let a2 = 1.0 / (2.0 * delta) - self.a;
        let bb = self.b - Complex64::new(0.0, xi);
        let log_c = self.log_c - 0.5 * (2.0 * PI * delta).ln() + 0.5 * (PI / a2).ln() + bb * bb / (4.0 * a2);
        Self {
            log_c,
            a: 1.0 / (4.0 * a2 * delta * delta) - 1.0 / (2.0 * delta),
            b: bb / (2.0 * a2 * delta),
        }
    }

    fn eval(&self, x: f64) -> Complex64 {
        (self.log_c + self.a * x * x + self.b * x).exp()
    }
}

fn check_time(t: f64) -> Result<(), McError> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(McError::Time(t))
    }
}

fn check_order(n: usize) -> Result<(), McError> {
    if (1..=MAX_MC_ORDER).contains(&n) {
        Ok(())
    } else {
        Err(McError::Order(n))
    }
}

/// `f_n(t₁,x₁,…,t_n,x_n) = Π_j G(t_{j+1}−t_j, x_{j+1}−x_j) · J₀(t₁,x₁)` with
/// `(t_{n+1}, x_{n+1}) = (t, x)`, and 0 unless `0 < t₁ < … < t_n < t`.
pub fn kernel_f_n(
    times: &[f64],
    points: &[f64],
    t: f64,
    x: f64,
    measure: &InitialMeasure<f64>,
) -> Result<f64, McError> {
    check_time(t)?;
    if times.is_empty() || times.len() != points.len() {
        return Err(McError::Times);
    }
    let ordered = times[0] > 0.0 && times.windows(2).all(|w| w[0] < w[1]) && times[times.len() - 1] < t;
    if !ordered {
        return Ok(0.0);
    }
    let mut value = j0(times[0], points[0], measure)?;
    for j in 0..times.len() {
        let (tn, xn) = if j + 1 < times.len() { (times[j + 1], points[j + 1]) } else { (t, x) };
        value *= heat_kernel_unchecked(tn - times[j], xn - points[j]);
    }
    Ok(value)
}

/// `F f_n(t)(ξ)` for ordered `times`, by composing the heat steps in Fourier
/// variables; 0 when the times are not ordered.
fn kernel_fourier(chain: &Chain, times: &[f64], xi: &[f64], t: f64, x: f64) -> Complex64 {
    let n = times.len();
    let ordered = times[0] > 0.0 && times.windows(2).all(|w| w[0] < w[1]) && times[n - 1] < t;
    if !ordered {
        return Complex64::new(0.0, 0.0);
    }
    let mut g = chain.initial_state(times[0]);
    for j in 0..n {
        let next = if j + 1 < n { times[j + 1] } else { t };
        g = g.step(next - times[j], xi[j]);
    }
    g.eval(x)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// `F f̃_n(t)(ξ) = (1/n!) Σ_ρ F f_n(t_ρ)(ξ_ρ)`.
fn symmetrised_fourier(chain: &Chain, perms: &[Vec<usize>], times: &[f64], xi: &[f64], t: f64, x: f64) -> Complex64 {
    let mut tp = vec![0.0; times.len()];
    let mut xp = vec![0.0; times.len()];
    let mut acc = Complex64::new(0.0, 0.0);
    for rho in perms {
        for (k, &r) in rho.iter().enumerate() {
            tp[k] = times[r];
            xp[k] = xi[r];
        }
        acc += kernel_fourier(chain, &tp, &xp, t, x);
    }
    acc / perms.len() as f64
}

/// Kummer's function `M(α; ½; −z)` for `z ≥ 0`.
pub fn kummer_half(alpha: f64, z: f64) -> f64 {
    if z <= 0.0 {
        return 1.0;
    }
    if z <= 40.0 {
        // e^{−z} M(½ − α; ½; z): terms settle to one sign after a few steps
        let beta = 0.5 - alpha;
        let mut term = 1.0;
        let mut sum = CompensatedSum::default();
        sum.add(term);
        let mut k = 0.0;
        while k < 10_000.0 {
            term *= (beta + k) * z / ((0.5 + k) * (k + 1.0));
            sum.add(term);
            k += 1.0;
            if term == 0.0 || (k > z + 2.0 && term.abs() < 1e-17 * sum.value().abs()) {
                break;
            }
        }
        return (-z).exp() * sum.value();
    }
    // large z: Γ(½)/Γ(½−α) z^{−α} Σ (α)_k (α+½)_k / k! z^{−k}
    let x = 0.5 - alpha;
    let recip_gamma = (PI * x).sin() * ln_gamma(1.0 - x).exp() / PI;
    let mut term: f64 = 1.0;
    let mut sum: f64 = 1.0;
    for k in 0..60 {
        let kf = k as f64;
        let next = term * (alpha + kf) * (alpha + 0.5 + kf) / ((kf + 1.0) * z);
        if next.abs() >= term.abs() || next.abs() < 1e-17 * sum.abs() {
            break;
        }
        term = next;
        sum += term;
    }
    PI.sqrt() * recip_gamma * z.powf(-alpha) * sum
}

/// `∫_{ℝⁿ} Π|ξ_j|^a cos(ξ·Δ) e^{−½ξᵀMξ} dξ` for `n ∈ {1, 2}` and `M`
/// positive definite. Returns the value and an error estimate (0 when the
/// value is closed-form).
pub fn spectral_gaussian_integral(a: f64, m: &DMatrix<f64>, delta: &[f64]) -> (f64, f64) {
    match m.nrows() {
        1 => {
            let mm = m[(0, 0)];
            let h = 0.5 * (1.0 + a);
            let v = ln_gamma(h).exp() * (2.0 / mm).powf(h) * kummer_half(h, delta[0] * delta[0] / (2.0 * mm));
            (v, 0.0)
        }
        2 => angular_integral(a, m, delta),
        n => panic!("spectral_gaussian_integral: dimension {n} unsupported"),
    }
}

fn angular_integral(a: f64, m: &DMatrix<f64>, delta: &[f64]) -> (f64, f64) {
    let Some(chol) = m.clone().cholesky() else {
        return (f64::INFINITY, f64::INFINITY);
    };
    let l = chol.l();
    let det_l = l[(0, 0)] * l[(1, 1)];
    // ξ = L^{−T} η whitens the Gaussian factor
    let p = match l.transpose().try_inverse() {
        Some(p) => p,
        None => return (f64::INFINITY, f64::INFINITY),
    };
    let radial_const = 2f64.powf(a) * ln_gamma(a + 1.0).exp();
    let phase = delta.iter().any(|&d| d != 0.0);
    let f = |phi: f64| {
        let (s, c) = phi.sin_cos();
        let w0 = p[(0, 0)] * c + p[(0, 1)] * s;
        let w1 = p[(1, 0)] * c + p[(1, 1)] * s;
        let mut r = radial_const;
        if phase {
            let b = delta[0] * w0 + delta[1] * w1;
            r *= kummer_half(a + 1.0, 0.5 * b * b);
        }
        (w0 * w1).abs().powf(a) * r
    };
    // kinks where w_j vanishes
    let mut cuts = vec![0.0, PI];
    for j in 0..2 {
        let phi = (-p[(j, 0)]).atan2(p[(j, 1)]).rem_euclid(PI);
        if phi > 0.0 && phi < PI {
            cuts.push(phi);
        }
    }
    cuts.sort_by(|x, y| x.total_cmp(y));
    let opts = QuadOptions { rel_tol: 1e-10, abs_tol: 0.0, max_level: 8, min_level: 3 };
    let mut value = 0.0;
    let mut err = 0.0;
    for w in cuts.windows(2) {
        if w[1] - w[0] <= 0.0 {
            continue;
        }
        let q = tanh_sinh(|phi, _, _| f(phi), w[0], w[1], &opts);
        value += q.value;
        err += q.error;
    }
    // φ and φ + π contribute equally
    (2.0 * value / det_l, 2.0 * err / det_l)
}

/// `ψ(t, s)` for equal-length time vectors.
fn psi(chain: &Chain, noise: &Consts, ts: &[f64], ss: &[f64], t: f64, x: f64) -> f64 {
    let m = chain.cov_matrix(ts, t) + chain.cov_matrix(ss, t);
    let delta: Vec<f64> = ts.iter().zip(ss).map(|(&a, &b)| chain.mean(a, t, x) - chain.mean(b, t, x)).collect();
    let (v, _) = spectral_gaussian_integral(noise.a, &m, &delta);
    noise.j0_sq * noise.c_h.powi(ts.len() as i32) * v
}

/// Frozen constants of one configuration.
#[derive(Debug, Clone, Copy)]
struct Consts {
    a: f64,
    c_h: f64,
    alpha: f64,
    h0: f64,
    j0_sq: f64,
    kappa: f64,
}

impl Consts {
    fn new(params: &FractionalParams<f64>, t: f64, x: f64, measure: &InitialMeasure<f64>) -> Result<Self, McError> {
        let j = j0(t, x, measure)?;
        let (h0, h) = (params.h0(), params.h());
        Ok(Self {
            a: params.spectral_exponent(),
            c_h: params.c_h(),
            alpha: params.alpha_h0(),
            h0,
            j0_sq: j * j,
            kappa: 0.5f64.min(h0 + h - 0.5).min(2.0 * h),
        })
    }
}

/// Ordered times `t·(g₀, g₀+g₁, …)` with Dirichlet(κ, …, κ) gaps, and the
/// reciprocal of their density on the ordered region.
fn draw_ordered_times(n: usize, t: f64, k: &Consts, gamma: &Gamma<f64>, rng: &mut ChaCha8Rng) -> Option<(Vec<f64>, f64)> {
    let g: Vec<f64> = (0..=n).map(|_| gamma.sample(rng)).collect();
    if g.iter().any(|&v| !(v > 0.0)) {
        return None;
    }
    let total: f64 = g.iter().sum();
    let ln_total = total.ln();
    let mut ts = Vec::with_capacity(n);
    let mut acc = 0.0;
    for gi in &g[..n] {
        acc += gi;
        ts.push(t * acc / total);
    }
    let np1 = (n + 1) as f64;
    let ln_density = ln_gamma(np1 * k.kappa) - np1 * ln_gamma(k.kappa)
        + (k.kappa - 1.0) * g.iter().map(|&v| v.ln() - ln_total).sum::<f64>()
        - n as f64 * t.ln();
    Some((ts, (-ln_density).exp()))
}

/// Partners `s_j = t_j + d_j` with `|d_j|` from the `|d|^{2H₀−2}` profile on
/// `[0, t]` and a random sign, and the weight `Π α_{H₀}|d_j|^{2H₀−2} / density`.
/// `None` when some `s_j ∉ (0, t)`, which contributes 0.
fn draw_partners(ts: &[f64], t: f64, k: &Consts, rng: &mut ChaCha8Rng) -> Option<(Vec<f64>, f64)> {
    let expo = 1.0 / (2.0 * k.h0 - 1.0);
    let mut ss = Vec::with_capacity(ts.len());
    for &tj in ts {
        let u: f64 = rng.random();
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let s = tj + sign * t * u.powf(expo);
        if !(s > 0.0 && s < t) {
            return None;
        }
        ss.push(s);
    }
    // density of d is (2H₀−1)|d|^{2H₀−2} / (2 t^{2H₀−1})
    let pair_weight = k.alpha * 2.0 * t.powf(2.0 * k.h0 - 1.0) / (2.0 * k.h0 - 1.0);
    Some((ss, pair_weight.powi(ts.len() as i32)))
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, y: f64) {
        self.count += 1.0;
        let d = y - self.mean;
        self.mean += d / self.count;
        self.m2 += d * (y - self.mean);
    }

    fn merge(self, o: Moments) -> Moments {
        if o.count == 0.0 {
            return self;
        }
        if self.count == 0.0 {
            return o;
        }
        let count = self.count + o.count;
        let d = o.mean - self.mean;
        Moments {
            count,
            mean: self.mean + d * o.count / count,
            m2: self.m2 + o.m2 + d * d * self.count * o.count / count,
        }
    }
}

/// Runs `draw` over `budget.samples` samples in fixed-size batches. Batch `b`
/// uses stream `b` of a ChaCha8 generator seeded with `seed`, and batches are
/// merged in index order, so the result does not depend on the worker count.
fn run<F>(budget: &McBudget, seed: u64, draw: F) -> Result<EstimatorResult, McError>
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    budget.validate()?;
    let batches = budget.samples.div_ceil(BATCH);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(budget.workers)
        .build()
        .map_err(|e| McError::Budget(e.to_string()))?;
    let parts: Vec<Moments> = pool.install(|| {
        (0..batches)
            .into_par_iter()
            .map(|b| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(b);
                let count = BATCH.min(budget.samples - b * BATCH);
                let mut m = Moments::default();
                for _ in 0..count {
                    m.push(draw(&mut rng));
                }
                m
            })
            .collect()
    });
    let m = parts.into_iter().fold(Moments::default(), Moments::merge);
    let stderr = (m.m2 / (m.count - 1.0) / m.count).sqrt();
    let target_met = budget.target_rel_err.is_none_or(|r| stderr <= r * m.mean.abs());
    Ok(EstimatorResult { mean: m.mean, stderr, samples: budget.samples, seed, target_met })
}

fn setup(
    n: usize,
    t: f64,
    x: f64,
    params: &FractionalParams<f64>,
    measure: &InitialMeasure<f64>,
) -> Result<(Chain, Consts, Gamma<f64>), McError> {
    check_order(n)?;
    check_time(t)?;
    if !x.is_finite() {
        return Err(McError::Budget(format!("x = {x} must be finite")));
    }
    let chain = Chain::from_measure(measure)?;
    let k = Consts::new(params, t, x, measure)?;
    let gamma = Gamma::new(k.kappa, 1.0).expect("kappa > 0");
    Ok((chain, k, gamma))
}

/// Unbiased estimate of `E|J_n(t,x)|² = n!‖f̃_n‖²` through `ψ` (see
/// [`FactorBook`]).
pub fn chaos_norm_estimate(
    n: usize,
    t: f64,
    x: f64,
    params: &FractionalParams<f64>,
    measure: &InitialMeasure<f64>,
    budget: &McBudget,
    seed: u64,
) -> Result<EstimatorResult, McError> {
    let (chain, k, gamma) = setup(n, t, x, params, measure)?;
    let book = factor_book(n).total();
    run(budget, seed, |rng| {
        let Some((ts, wt)) = draw_ordered_times(n, t, &k, &gamma, rng) else {
            return 0.0;
        };
        let Some((ss, wd)) = draw_partners(&ts, t, &k, rng) else {
            return 0.0;
        };
        book * wt * wd * psi(&chain, &k, &ts, &ss, t, x)
    })
}

/// Independent estimate of `n!‖f̃_n‖²` straight from the symmetrised kernel:
/// permutation average, Fourier transform by heat-step composition, sampled
/// `ξ`, times over the whole cube `[0,t]^{2n}`.
pub fn chaos_norm_estimate_direct(
    n: usize,
    t: f64,
    x: f64,
    params: &FractionalParams<f64>,
    measure: &InitialMeasure<f64>,
    budget: &McBudget,
    seed: u64,
) -> Result<EstimatorResult, McError> {
    let (chain, k, gamma) = setup(n, t, x, params, measure)?;
    let perms = permutations(n);
    let fact = factorial(n);
    run(budget, seed, |rng| {
        let Some((sorted, wt)) = draw_ordered_times(n, t, &k, &gamma, rng) else {
            return 0.0;
        };
        // uniform relabelling: the unordered tuple has density p / n!
        let rho = &perms[rng.random_range(0..perms.len())];
        let ts: Vec<f64> = rho.iter().map(|&r| sorted[r]).collect();
        let Some((ss, wd)) = draw_partners(&ts, t, &k, rng) else {
            return 0.0;
        };
        let w = wt * fact * wd;
        // proposal for ξ: N(0, M⁻¹) with M the summed chain covariances
        let m = chain.cov_matrix(&ts, t) + chain.cov_matrix(&ss, t);
        let Some(chol) = m.cholesky() else {
            return 0.0;
        };
        let lt = chol.l().transpose();
        let det_l: f64 = (0..n).map(|i| lt[(i, i)]).product();
        let mut g = 0.0;
        for _ in 0..XI_DRAWS {
            let z = DVector::from_fn(n, |_, _| StandardNormal.sample(rng));
            let Some(xi) = lt.solve_upper_triangular(&z) else {
                return 0.0;
            };
            let inv_density = (2.0 * PI).powf(0.5 * n as f64) / det_l * (0.5 * z.norm_squared()).exp();
            let weight: f64 = xi.iter().map(|&v| k.c_h * v.abs().powf(k.a)).product();
            let ft = symmetrised_fourier(&chain, &perms, &ts, xi.as_slice(), t, x);
            let fs = symmetrised_fourier(&chain, &perms, &ss, xi.as_slice(), t, x);
            g += inv_density * weight * (ft * fs.conj()).re;
        }
        fact * w * g / XI_DRAWS as f64
    })
}

/// Deterministic nested-quadrature value of `E|J_1(t,x)|²`, returned with
/// the outer error estimate.
pub fn chaos_norm_quadrature_n1(
    t: f64,
    x: f64,
    params: &FractionalParams<f64>,
    measure: &InitialMeasure<f64>,
    rel_tol: f64,
) -> Result<(f64, f64), McError> {
    let (chain, k, _) = setup(1, t, x, params, measure)?;
    let expo = 2.0 * k.h0 - 2.0;
    let inner = QuadOptions { rel_tol, abs_tol: 0.0, max_level: 10, min_level: 3 };
    let outer = QuadOptions { rel_tol, abs_tol: 0.0, max_level: 10, min_level: 3 };
    let q = tanh_sinh(
        |t1, _, _| {
            let below = tanh_sinh(|s, _, gap| gap.powf(expo) * psi(&chain, &k, &[t1], &[s], t, x), 0.0, t1, &inner);
            let above = tanh_sinh(|s, gap, _| gap.powf(expo) * psi(&chain, &k, &[t1], &[s], t, x), t1, t, &inner);
            below.value + above.value
        },
        0.0,
        t,
        &outer,
    );
    Ok((k.alpha * q.value, k.alpha * q.error))
}

/// Outcome of the `ψ(t,t)` comparison at one ordered time tuple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsiBoundCheck {
    pub lhs: f64,
    pub lhs_err: f64,
    pub rhs: f64,
    pub rhs_err: f64,
    pub pass: bool,
}

/// Compares `ψ(t,t)` with
/// `J₀² ∫ Π_k exp(−((t_{k+1}−t_k)/(t_{k+1}t_k)) |Σ_{j≤k} t_j ξ_j|²) μ(dξ)`.
///
/// Both sides are Gaussian-weighted spectral integrals in at most two
/// dimensions and are computed by quadrature rather than sampling; the error
/// fields hold the quadrature error estimates. `pass` allows
/// `3·√(err_l² + err_r²) + 1e-10·rhs`, the relative part covering the cases
/// of exact equality.
pub fn verify_psi_bound(
    ordered_times: &[f64],
    t: f64,
    x: f64,
    params: &FractionalParams<f64>,
    measure: &InitialMeasure<f64>,
) -> Result<PsiBoundCheck, McError> {
    let n = ordered_times.len();
    let (chain, k, _) = setup(n.max(1), t, x, params, measure)?;
    check_order(n)?;
    let ordered = ordered_times[0] > 0.0
        && ordered_times.windows(2).all(|w| w[0] < w[1])
        && ordered_times[n - 1] < t;
    if !ordered {
        return Err(McError::Times);
    }
    let zero = vec![0.0; n];
    let lhs_m = chain.cov_matrix(ordered_times, t) * 2.0;
    let mut q = DMatrix::zeros(n, n);
    for kk in 0..n {
        let next = if kk + 1 < n { ordered_times[kk + 1] } else { t };
        let w = (next - ordered_times[kk]) / (next * ordered_times[kk]);
        for i in 0..=kk {
            for j in 0..=kk {
                q[(i, j)] += w * ordered_times[i] * ordered_times[j];
            }
        }
    }
    let rhs_m = q * 2.0;
    let scale = k.j0_sq * k.c_h.powi(n as i32);
    let (l, le) = spectral_gaussian_integral(k.a, &lhs_m, &zero);
    let (r, re) = spectral_gaussian_integral(k.a, &rhs_m, &zero);
    let (lhs, lhs_err, rhs, rhs_err) = (scale * l, scale * le, scale * r, scale * re);
    let pass = lhs <= rhs + 3.0 * lhs_err.hypot(rhs_err) + 1e-10 * rhs.abs();
    Ok(PsiBoundCheck { lhs, lhs_err, rhs, rhs_err, pass })
}

/// Estimate against the assembled bound `J₀² · term_bound(exact constants)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TermBoundReport {
    pub n: usize,
    pub t: f64,
    pub estimate: EstimatorResult,
    pub bound: f64,
    pub b_h0: f64,
    /// Smallest `b_{H₀}` for which the check still passes.
    pub b_min: f64,
    /// `b_{H₀}` at which the bound equals the point estimate.
    pub b_point: f64,
    /// `mean − 3·stderr ≤ bound`.
    pub pass: bool,
}

pub fn verify_term_bound(
    n: usize,
    t: f64,
    x: f64,
    params: &FractionalParams<f64>,
    measure: &InitialMeasure<f64>,
    budget: &McBudget,
    seed: u64,
) -> Result<TermBoundReport, McError> {
    let estimate = chaos_norm_estimate(n, t, x, params, measure, budget, seed)?;
    let tb = term_bound(n, t, params, BoundMode::ExactConstants)?;
    let j = j0(t, x, measure)?;
    let bound = j * j * tb.bound();
    let low = estimate.mean - 3.0 * estimate.stderr;
    let b = params.lhs_constant();
    let root = |v: f64| if v > 0.0 { b * (v / bound).powf(1.0 / n as f64) } else { 0.0 };
    Ok(TermBoundReport {
        n,
        t,
        estimate,
        bound,
        b_h0: b,
        b_min: root(low),
        b_point: root(estimate.mean),
        pass: low <= bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::exp_sinh;

    fn p(h0: f64, h: f64) -> FractionalParams<f64> {
        FractionalParams::new(h0, h).unwrap()
    }

    #[test]
    fn f1_dirac_is_product_of_two_kernels() {
        let mu = InitialMeasure::Dirac { x0: 0.0 };
        let v = kernel_f_n(&[0.3], &[0.2], 1.0, -0.1, &mu).unwrap();
        let want = heat_kernel_unchecked(0.7, -0.3) * heat_kernel_unchecked(0.3, 0.2);
        assert!((v - want).abs() < 1e-15);
        assert_eq!(kernel_f_n(&[0.5, 0.2], &[0.0, 0.0], 1.0, 0.0, &mu).unwrap(), 0.0);
    }

    #[test]
    fn kummer_matches_radial_quadrature() {
        for &a in &[0.2, 0.6, 0.9] {
            for &b in &[0.0, 0.5, 3.0, 9.5] {
                let q = exp_sinh(
                    |r: f64, _| r.powf(2.0 * a + 1.0) * (r * b).cos() * (-0.5 * r * r).exp(),
                    0.0,
                    &QuadOptions::with_rel_tol(1e-13),
                );
                let closed = 2f64.powf(a) * ln_gamma(a + 1.0).exp() * kummer_half(a + 1.0, 0.5 * b * b);
                assert!((q.value - closed).abs() < 1e-9 * (1.0 + closed.abs()), "a={a} b={b}: {} vs {closed}", q.value);
            }
        }
    }

    #[test]
    fn kummer_matches_frozen_values() {
        // 1F1(α; 1/2; −z), 30-digit reference evaluation
        let table = [
            (0.6, [0.692_044_755_862_682_2, -0.067_845_926_790_446_70, -0.018_447_496_123_093_27, -0.010_535_476_891_828_56, -0.002_630_480_726_270_666]),
            (1.2, [0.419_829_856_593_344_9, -0.130_698_186_045_346_0, -0.005_231_700_021_350_246, -0.001_685_826_600_216_100, -0.000_104_390_661_248_815_6]),
            (1.8, [0.180_818_879_502_027_0, 0.011_321_933_233_814_29, 0.000_777_763_218_303_604_2, 0.000_139_574_848_211_493_5, 2.128_868_926_550_131e-6]),
        ];
        for (alpha, want) in table {
            for (z, w) in [0.3, 5.0, 40.0, 100.0, 1000.0].into_iter().zip(want) {
                let got = kummer_half(alpha, z);
                assert!(((got - w) / w).abs() < 1e-11, "alpha={alpha} z={z}: {got} vs {w}");
            }
        }
    }

    #[test]
    fn kummer_branches_agree_at_switch() {
        for &alpha in &[0.6, 1.2, 1.8] {
            let lo = kummer_half(alpha, 40.0);
            let hi = kummer_half(alpha, 40.000001);
            assert!(((lo - hi) / lo).abs() < 1e-6, "{alpha}: {lo} vs {hi}");
        }
    }

    #[test]
    fn angular_integral_diagonal_is_product() {
        let a = 0.4;
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5]);
        let (v, _) = spectral_gaussian_integral(a, &m, &[0.0, 0.0]);
        let one = |mm: f64| spectral_gaussian_integral(a, &DMatrix::from_element(1, 1, mm), &[0.0]).0;
        let want = one(2.0) * one(0.5);
        assert!(((v - want) / want).abs() < 1e-10);
        // separable phase as well
        let (v, _) = spectral_gaussian_integral(a, &m, &[0.7, -1.3]);
        let phase = |mm: f64, d: f64| spectral_gaussian_integral(a, &DMatrix::from_element(1, 1, mm), &[d]).0;
        let want = phase(2.0, 0.7) * phase(0.5, -1.3);
        assert!(((v - want) / want).abs() < 1e-9);
    }

    #[test]
    fn fourier_chain_matches_bridge_form() {
        // n! F f̃ = J₀ exp(−iξ·m − ½ξᵀKξ) at ordered times
        let t = 1.3;
        let x = 0.4;
        for mu in [
            InitialMeasure::Dirac { x0: -0.2 },
            InitialMeasure::Gaussian { mean: 0.3, variance: 0.5 },
            InitialMeasure::Lebesgue { c: 2.0 },
        ] {
            let chain = Chain::from_measure(&mu).unwrap();
            let ts = [0.2, 0.9];
            let xi = [0.8, -1.7];
            let got = kernel_fourier(&chain, &ts, &xi, t, x);
            let k = chain.cov_matrix(&ts, t);
            let quad: f64 = (0..2).map(|i| (0..2).map(|j| xi[i] * k[(i, j)] * xi[j]).sum::<f64>()).sum();
            let lin: f64 = (0..2).map(|i| xi[i] * chain.mean(ts[i], t, x)).sum();
            let want = j0(t, x, &mu).unwrap() * Complex64::new(-0.5 * quad, -lin).exp();
            assert!((got - want).norm() < 1e-12, "{mu:?}: {got} vs {want}");
        }
    }

    #[test]
    fn bookkeeping_is_unity() {
        for n in 1..=2 {
            assert!((factor_book(n).total() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn psi_bound_equality_for_dirac_n1() {
        let c = verify_psi_bound(&[0.5], 1.0, 0.0, &p(0.75, 0.3), &InitialMeasure::Dirac { x0: 0.0 }).unwrap();
        assert!(c.pass);
        assert!(((c.lhs - c.rhs) / c.rhs).abs() < 1e-12);
    }

    #[test]
    fn rejects_unsupported_measure() {
        let r = chaos_norm_estimate(1, 1.0, 0.0, &p(0.75, 0.3), &InitialMeasure::Quadratic, &McBudget::new(10, 1), 1);
        assert!(matches!(r, Err(McError::Measure(_))));
        assert!(matches!(
            chaos_norm_estimate(3, 1.0, 0.0, &p(0.75, 0.3), &InitialMeasure::Lebesgue { c: 1.0 }, &McBudget::new(10, 1), 1),
            Err(McError::Order(3))
        ));
    }
}
