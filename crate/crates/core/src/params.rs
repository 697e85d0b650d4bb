//! Hurst parameters of the noise and the constants derived from them.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;
use crate::special::ln_gamma;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("H0 = {0} outside (1/2, 1)")]
    H0Range(f64),
    #[error("H = {0} outside (0, 1/2)")]
    HRange(f64),
    #[error("H0 + H = {0} must exceed 3/4")]
    Sum(f64),
    #[error("LHS constant b_H0 = {0} must be finite and > 0")]
    LhsConstant(f64),
    #[error("exponent condition fails: {0}")]
    Exponents(String),
}

/// Hurst pair `(H₀, H)` in the admissible region
/// `(½, 1) × (0, ½)`, `H₀ + H > ¾`, plus the Littlewood–Hardy–Sobolev constant
/// `b_{H₀}` (a configuration input, default 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams", bound = "T: Real")]
pub struct FractionalParams<T> {
    h0: T,
    h: T,
    lhs_constant: T,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    #[serde(rename = "H0")]
    h0: f64,
    #[serde(rename = "H")]
    h: f64,
    #[serde(rename = "b_H0", default = "one")]
    b: f64,
}

fn one() -> f64 {
    1.0
}

impl<T: Real> TryFrom<RawParams> for FractionalParams<T> {
    type Error = ParamError;
    fn try_from(raw: RawParams) -> Result<Self, ParamError> {
        FractionalParams::new(T::lit(raw.h0), T::lit(raw.h))?.with_lhs_constant(T::lit(raw.b))
    }
}

impl<T: Real> From<FractionalParams<T>> for RawParams {
    fn from(p: FractionalParams<T>) -> Self {
        RawParams { h0: p.h0.to_f64_lossy(), h: p.h.to_f64_lossy(), b: p.lhs_constant.to_f64_lossy() }
    }
}

impl<T: Real> FractionalParams<T> {
    pub fn new(h0: T, h: T) -> Result<Self, ParamError> {
        let half = T::lit(0.5);
        if !(h0 > half && h0 < T::one()) {
            return Err(ParamError::H0Range(h0.to_f64_lossy()));
        }
        if !(h > T::zero() && h < half) {
            return Err(ParamError::HRange(h.to_f64_lossy()));
        }
        if !(h0 + h > T::lit(0.75)) {
            return Err(ParamError::Sum((h0 + h).to_f64_lossy()));
        }
        Ok(Self { h0, h, lhs_constant: T::one() })
    }

    pub fn with_lhs_constant(mut self, b: T) -> Result<Self, ParamError> {
        if !(b > T::zero()) || !b.is_finite() {
            return Err(ParamError::LhsConstant(b.to_f64_lossy()));
        }
        self.lhs_constant = b;
        Ok(self)
    }

    pub fn h0(&self) -> T {
        self.h0
    }

    pub fn h(&self) -> T {
        self.h
    }

    /// `b_{H₀}`.
    pub fn lhs_constant(&self) -> T {
        self.lhs_constant
    }

    /// `α_{H₀} = H₀(2H₀ − 1)`.
    pub fn alpha_h0(&self) -> T {
        self.h0 * (T::lit(2.0) * self.h0 - T::one())
    }

    /// `c_H = Γ(2H + 1) sin(πH) / (2π)`, the spectral density constant.
    pub fn c_h(&self) -> T {
        let two = T::lit(2.0);
        ln_gamma(two * self.h + T::one()).exp() * (T::PI() * self.h).sin() / (two * T::PI())
    }

    /// `1 − 2H`, the exponent of the spectral weight `|ξ|^{1−2H}`.
    pub fn spectral_exponent(&self) -> T {
        T::one() - T::lit(2.0) * self.h
    }

    /// `(1 − 2H) / (4H₀)`, the unit shift of the exponents `θ_k`.
    pub fn theta_step(&self) -> T {
        self.spectral_exponent() / (T::lit(4.0) * self.h0)
    }

    /// `2H₀ + H − 1`, the per-chaos power of `t` in `E|J_n|²`.
    pub fn growth_exponent(&self) -> T {
        T::lit(2.0) * self.h0 + self.h - T::one()
    }

    /// `(2H₀ + H − 1) / H`, the power of `t` inside the moment envelope.
    pub fn envelope_time_exponent(&self) -> T {
        self.growth_exponent() / self.h
    }

    /// `(H + 1) / H`, the power of `p` inside the moment envelope.
    pub fn envelope_p_exponent(&self) -> T {
        (self.h + T::one()) / self.h
    }
}

/// `rows × cols` interior grid of the admissible region: `H₀` equally spaced
/// in `(½, 1)`, and for each `H₀` the `H` values equally spaced in
/// `(max(0, ¾ − H₀), ½)`.
pub fn admissible_grid<T: Real>(rows: usize, cols: usize) -> Vec<FractionalParams<T>> {
    let half = 0.5;
    let mut out = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        let h0 = half + half * (i + 1) as f64 / (rows + 1) as f64;
        let lo = (0.75 - h0).max(0.0);
        for j in 0..cols {
            let h = lo + (half - lo) * (j + 1) as f64 / (cols + 1) as f64;
            out.push(FractionalParams::new(T::lit(h0), T::lit(h)).expect("grid point is admissible"));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants() {
        let p = FractionalParams::new(0.75_f64, 0.25).unwrap();
        assert!((p.alpha_h0() - 0.375).abs() < 1e-15);
        // c_H at H = 1/4: Γ(1.5) sin(π/4) / (2π)
        let want = 0.886_226_925_452_758 * std::f64::consts::FRAC_1_SQRT_2 / (2.0 * std::f64::consts::PI);
        assert!((p.c_h() - want).abs() < 1e-14);
        assert!((p.theta_step() - 1.0 / 6.0).abs() < 1e-15);
        // H = 1/2 would give c = 1/(2π), the white-noise normalisation
        let q = FractionalParams::new(0.75_f64, 0.499_999_999).unwrap();
        assert!((q.c_h() - 1.0 / (2.0 * std::f64::consts::PI)).abs() < 1e-8);
    }

    #[test]
    fn rejects_outside_region() {
        assert!(matches!(FractionalParams::new(0.6_f64, 0.1), Err(ParamError::Sum(_))));
        assert!(matches!(FractionalParams::new(0.5_f64, 0.3), Err(ParamError::H0Range(_))));
        assert!(matches!(FractionalParams::new(0.8_f64, 0.5), Err(ParamError::HRange(_))));
        assert!(FractionalParams::new(0.8_f64, 0.3).unwrap().with_lhs_constant(0.0).is_err());
    }

    #[test]
    fn grid_is_admissible_and_sized() {
        let g = admissible_grid::<f64>(5, 5);
        assert_eq!(g.len(), 25);
        assert!(g.iter().all(|p| p.h0() + p.h() > 0.75));
    }

    #[test]
    fn serde_uses_symbol_names() {
        let p = FractionalParams::new(0.75_f64, 0.3).unwrap();
        let json = serde_json_like(&p);
        assert_eq!(json, (0.75, 0.3, 1.0));
    }

    fn serde_json_like(p: &FractionalParams<f64>) -> (f64, f64, f64) {
        let raw: RawParams = (*p).into();
        (raw.h0, raw.h, raw.b)
    }
}
