//! Moment-bound machinery for the parabolic Anderson model
//! `∂u/∂t = ½ ∂²u/∂x² + u Ẇ` on `ℝ₊ × ℝ`, driven by Gaussian noise that is
//! fractional in time (`H₀ > ½`) and rough in space (`H < ½`), started from a
//! rough initial measure.
//!
//! The floating-point modules are generic over [`Real`] (`f32` / `f64`); the
//! aliases below fix `f64`, which is what the command-line tool and the
//! Monte Carlo verifier use. The polynomial identity behind the exponent set
//! `A_n` is checked in exact rational arithmetic.

// `!(x > 0)` guards reject NaN on purpose; constant tables keep full digits.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision, clippy::needless_range_loop)]

pub mod scalar;
pub mod special;
pub mod quadrature;
pub mod paths;
pub mod simplex;
pub mod params;
pub mod chaos;
pub mod initial;
pub mod moments;
pub mod mc;

pub use scalar::Real;

pub type Params = params::FractionalParams<f64>;
pub type Measure = initial::InitialMeasure<f64>;
pub type SimplexSpec = simplex::SimplexIntegralSpec<f64>;
pub type TermBound = chaos::ChaosTermBound<f64>;
pub type Mode = chaos::BoundMode<f64>;
pub type Series = moments::MomentSeries<f64>;
pub type Envelope = moments::EnvelopeFit<f64>;
pub type Table = moments::BoundTable<f64>;
