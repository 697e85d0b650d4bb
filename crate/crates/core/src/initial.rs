//! Initial measures, the heat kernel and `J₀ = G(t,·) * μ₀`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quadrature::{sinh_sinh, QuadOptions};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InitialError {
    #[error("t = {0} must be finite and > 0")]
    Time(f64),
    #[error("invalid measure: {0}")]
    Measure(String),
    #[error("quadrature for the custom density did not converge (estimate {value}, error {error})")]
    Quadrature { value: f64, error: f64 },
}

pub type DensityFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// Nonnegative initial measure on ℝ.
#[derive(Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields, bound = "T: Real")]
pub enum InitialMeasure<T> {
    /// `δ_{x0}`.
    Dirac { x0: T },
    /// `c dx`.
    Lebesgue { c: T },
    /// `x² dx`.
    Quadratic,
    /// Normal density with the given mean and variance (total mass 1).
    Gaussian { mean: T, variance: T },
    /// `Σ mass_i δ_{x_i}`.
    Atoms { atoms: Vec<(T, T)> },
    /// Arbitrary density handled by quadrature; results are oracle-grade.
    #[serde(skip)]
    CustomDensity { label: String, density: DensityFn<T> },
}

impl<T: Real> fmt::Debug for InitialMeasure<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Dirac { x0 } => write!(f, "Dirac({x0})"),
            Self::Lebesgue { c } => write!(f, "Lebesgue({c})"),
            Self::Quadratic => write!(f, "Quadratic"),
            Self::Gaussian { mean, variance } => write!(f, "Gaussian({mean}, {variance})"),
            Self::Atoms { atoms } => write!(f, "Atoms({atoms:?})"),
            Self::CustomDensity { label, .. } => write!(f, "CustomDensity({label})"),
        }
    }
}

/// `J₀` together with how it was obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct J0Value<T> {
    pub value: T,
    /// Zero for closed forms.
    pub error_estimate: T,
    /// True when the value comes from quadrature on a custom density.
    pub oracle_grade: bool,
}

/// `G(t,x) = (2πt)^{-1/2} e^{-x²/(2t)}`.
pub fn heat_kernel<T: Real>(t: T, x: T) -> Result<T, InitialError> {
    check_time(t)?;
    Ok(heat_kernel_unchecked(t, x))
}

pub(crate) fn heat_kernel_unchecked<T: Real>(t: T, x: T) -> T {
    let two = T::lit(2.0);
    (-(x * x) / (two * t)).exp() / (two * T::PI() * t).sqrt()
}

fn check_time<T: Real>(t: T) -> Result<(), InitialError> {
    if t > T::zero() && t.is_finite() {
        Ok(())
    } else {
        Err(InitialError::Time(t.to_f64_lossy()))
    }
}

impl<T: Real> InitialMeasure<T> {
    pub fn custom(label: impl Into<String>, density: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        Self::CustomDensity { label: label.into(), density: Arc::new(density) }
    }

    /// Checks parameter ranges (positive constants, masses and variance).
    pub fn validate(&self) -> Result<(), InitialError> {
        let bad = |m: &str| Err(InitialError::Measure(m.to_string()));
        match self {
            Self::Dirac { x0 } if !x0.is_finite() => bad("dirac: x0 must be finite"),
            Self::Lebesgue { c } if !(*c > T::zero() && c.is_finite()) => bad("lebesgue: c must be finite and > 0"),
            Self::Gaussian { mean, variance }
                if !(mean.is_finite() && *variance > T::zero() && variance.is_finite()) =>
            {
                bad("gaussian: needs finite mean and variance > 0")
            }
            Self::Atoms { atoms } if atoms.is_empty() => bad("atoms: empty list"),
            Self::Atoms { atoms } if atoms.iter().any(|&(x, m)| !x.is_finite() || !(m > T::zero() && m.is_finite())) => {
                bad("atoms: locations finite, masses finite and > 0")
            }
            _ => Ok(()),
        }
    }

    /// True when `J₀` has a closed form for this variant.
    pub fn has_closed_form(&self) -> bool {
        !matches!(self, Self::CustomDensity { .. })
    }
}

/// `J₀(t,x) = ∫ G(t, x−y) μ₀(dy)`.
pub fn j0<T: Real>(t: T, x: T, measure: &InitialMeasure<T>) -> Result<T, InitialError> {
    Ok(j0_with_error(t, x, measure)?.value)
}

/// [`j0`] with the quadrature error estimate for custom densities.
pub fn j0_with_error<T: Real>(t: T, x: T, measure: &InitialMeasure<T>) -> Result<J0Value<T>, InitialError> {
    check_time(t)?;
    measure.validate()?;
    let exact = |value| J0Value { value, error_estimate: T::zero(), oracle_grade: false };
    Ok(match measure {
        InitialMeasure::Dirac { x0 } => exact(heat_kernel_unchecked(t, x - *x0)),
        InitialMeasure::Lebesgue { c } => exact(*c),
        InitialMeasure::Quadratic => exact(x * x + t),
        InitialMeasure::Gaussian { mean, variance } => exact(heat_kernel_unchecked(*variance + t, x - *mean)),
        InitialMeasure::Atoms { atoms } => {
            exact(atoms.iter().map(|&(y, m)| m * heat_kernel_unchecked(t, x - y)).sum())
        }
        InitialMeasure::CustomDensity { density, .. } => {
            let q = sinh_sinh(
                |y| heat_kernel_unchecked(t, x - y) * density(y),
                x,
                t.sqrt(),
                &QuadOptions::with_rel_tol(T::lit(1e-10)),
            );
            if !q.converged || !q.value.is_finite() {
                return Err(InitialError::Quadrature { value: q.value.to_f64_lossy(), error: q.error.to_f64_lossy() });
            }
            J0Value { value: q.value, error_estimate: q.error, oracle_grade: true }
        }
    })
}

/// `∫ e^{−a x²} μ₀(dx)`, closed form where available.
pub fn gaussian_moment<T: Real>(measure: &InitialMeasure<T>, a: T) -> Result<T, InitialError> {
    measure.validate()?;
    if !(a > T::zero()) || !a.is_finite() {
        return Err(InitialError::Measure(format!("a = {a} must be finite and > 0")));
    }
    let one = T::one();
    let two = T::lit(2.0);
    Ok(match measure {
        InitialMeasure::Dirac { x0 } => (-a * *x0 * *x0).exp(),
        InitialMeasure::Lebesgue { c } => *c * (T::PI() / a).sqrt(),
        InitialMeasure::Quadratic => T::PI().sqrt() / two * a.powf(-T::lit(1.5)),
        InitialMeasure::Gaussian { mean, variance } => {
            let s = one + two * a * *variance;
            (-a * *mean * *mean / s).exp() / s.sqrt()
        }
        InitialMeasure::Atoms { atoms } => atoms.iter().map(|&(y, m)| m * (-a * y * y).exp()).sum(),
        InitialMeasure::CustomDensity { density, .. } => {
            let q = sinh_sinh(
                |y| (-a * y * y).exp() * density(y),
                T::zero(),
                a.sqrt().recip(),
                &QuadOptions::with_rel_tol(T::lit(1e-10)),
            );
            if !q.converged {
                return Err(InitialError::Quadrature { value: q.value.to_f64_lossy(), error: q.error.to_f64_lossy() });
            }
            q.value
        }
    })
}

/// Failure of the Gaussian integrability condition on `μ₀`.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("∫ exp(-a x²) μ₀(dx) is not finite at a = {a} ({reason})")]
pub struct CondViolation {
    pub a: f64,
    pub reason: String,
}

/// Evaluates `∫ e^{−a x²} μ₀(dx)` for every `a` of the grid; all finite is ok.
pub fn check_cond_mu0<T: Real>(measure: &InitialMeasure<T>, a_grid: &[T]) -> Result<Vec<T>, CondViolation> {
    a_grid
        .iter()
        .map(|&a| match gaussian_moment(measure, a) {
            Ok(v) if v.is_finite() => Ok(v),
            Ok(v) => Err(CondViolation { a: a.to_f64_lossy(), reason: format!("value {v}") }),
            Err(e) => Err(CondViolation { a: a.to_f64_lossy(), reason: e.to_string() }),
        })
        .collect()
}
