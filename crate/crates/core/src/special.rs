//! Log-gamma, digamma and gamma ratios on the positive half-line.
//!
//! Every closed-form product of gamma values in this crate is assembled from
//! [`ln_gamma`] and exponentiated once at the end.

use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum SpecialError {
    #[error("{function}: argument {value} outside the domain ({requirement})")]
    Domain {
        function: &'static str,
        value: f64,
        requirement: &'static str,
    },
}

/// A strictly positive, finite real.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct PositiveReal<T>(T);

impl<T: Real> PositiveReal<T> {
    pub fn new(value: T) -> Result<Self, SpecialError> {
        if value.is_finite() && value > T::zero() {
            Ok(Self(value))
        } else {
            Err(SpecialError::Domain {
                function: "PositiveReal::new",
                value: value.to_f64_lossy(),
                requirement: "finite and > 0",
            })
        }
    }

    pub fn get(self) -> T {
        self.0
    }

    pub fn ln_gamma(self) -> T {
        ln_gamma(self.0)
    }

    pub fn digamma(self) -> T {
        digamma_unchecked(self.0)
    }
}

const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082;

// zeta(k) - 1 for k = 2..=30
const ZETA_MINUS_ONE: [f64; 29] = [
    0.644_934_066_848_226_436_47,
    0.202_056_903_159_594_285_4,
    0.082_323_233_711_138_191_516,
    0.036_927_755_143_369_926_331,
    0.017_343_061_984_449_139_715,
    0.008_349_277_381_922_826_839_8,
    0.004_077_356_197_944_339_378_7,
    0.002_008_392_826_082_214_417_9,
    0.000_994_575_127_818_085_337_15,
    0.000_494_188_604_119_464_558_7,
    0.000_246_086_553_308_048_298_64,
    0.000_122_713_347_578_489_146_75,
    6.124_813_505_870_482_925_9e-5,
    3.058_823_630_702_049_355_2e-5,
    1.528_225_940_865_187_173_3e-5,
    7.637_197_637_899_762_273_6e-6,
    3.817_293_264_999_839_856_5e-6,
    1.908_212_716_553_938_925_7e-6,
    9.539_620_338_727_961_131_5e-7,
    4.769_329_867_878_064_631_2e-7,
    2.384_505_027_277_329_9e-7,
    1.192_199_259_653_110_730_7e-7,
    5.960_818_905_125_947_961_2e-8,
    2.980_350_351_465_228_018_6e-8,
    1.490_155_482_836_504_123_5e-8,
    7.450_711_789_835_429_492e-9,
    3.725_334_024_788_457_054_8e-9,
    1.862_659_723_513_049_006_4e-9,
    9.313_274_324_196_681_828_7e-10,
];

// Lanczos approximation, g = 7, nine terms.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(2 + z)` for `|z| <= 1/2` by its Taylor series about 2.
///
/// The series is `(1 - γ) z + Σ_{k≥2} (-1)^k (ζ(k) - 1) z^k / k`, which keeps
/// full relative accuracy at the root `x = 2`.
fn ln_gamma_near_two<T: Real>(z: T) -> T {
    let mut acc = T::lit(1.0 - EULER_GAMMA);
    let mut zk = T::one();
    for (i, &c) in ZETA_MINUS_ONE.iter().enumerate() {
        let k = i + 2;
        zk = zk * z;
        let term = T::lit(c) * zk / T::from_count(k);
        acc = if k % 2 == 0 { acc + term } else { acc - term };
    }
    acc * z
}

fn ln_gamma_lanczos<T: Real>(x: T) -> T {
    let z = x - T::one();
    let mut a = T::lit(LANCZOS[0]);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        a = a + T::lit(c) / (z + T::from_count(i));
    }
    let t = z + T::lit(LANCZOS_G + 0.5);
    let half_ln_two_pi = T::lit(0.918_938_533_204_672_741_78);
    half_ln_two_pi + (z + T::lit(0.5)) * t.ln() - t + a.ln()
}

/// `ln Γ(x)` for `x > 0`. Returns NaN outside the domain; see [`log_gamma`]
/// for the checked variant.
pub fn ln_gamma<T: Real>(x: T) -> T {
    if !(x > T::zero()) {
        return T::nan();
    }
    if x.is_infinite() {
        return x;
    }
    let half = T::lit(0.5);
    let two = T::lit(2.0);
    if x < half {
        // Γ(x) = Γ(x + 2) / (x (x + 1))
        ln_gamma_near_two(x) - x.ln() - x.ln_1p()
    } else if x < T::lit(1.5) {
        ln_gamma_near_two(x - T::one()) - (x - T::one()).ln_1p()
    } else if x < T::lit(2.5) {
        ln_gamma_near_two(x - two)
    } else {
        ln_gamma_lanczos(x)
    }
}

/// Checked `ln Γ(x)`.
pub fn log_gamma<T: Real>(x: T) -> Result<T, SpecialError> {
    Ok(PositiveReal::new(x)
        .map_err(|_| domain("log_gamma", x))?
        .ln_gamma())
}

fn domain<T: Real>(function: &'static str, x: T) -> SpecialError {
    SpecialError::Domain {
        function,
        value: x.to_f64_lossy(),
        requirement: "finite and > 0",
    }
}

fn digamma_unchecked<T: Real>(x: T) -> T {
    // ψ(x) = ψ(x + m) - Σ_{j<m} 1/(x + j), then the asymptotic series at x + m >= 10
    let mut shift = T::zero();
    let mut y = x;
    let ten = T::lit(10.0);
    while y < ten {
        shift = shift + y.recip();
        y = y + T::one();
    }
    let inv2 = (y * y).recip();
    // Bernoulli terms B_{2k} / (2k)
    let series = inv2
        * (T::lit(1.0 / 12.0)
            - inv2
                * (T::lit(1.0 / 120.0)
                    - inv2
                        * (T::lit(1.0 / 252.0)
                            - inv2
                                * (T::lit(1.0 / 240.0)
                                    - inv2 * (T::lit(1.0 / 132.0) - inv2 * T::lit(691.0 / 32760.0))))));
    y.ln() - T::lit(0.5) / y - series - shift
}

/// Checked digamma `ψ(x) = Γ'(x)/Γ(x)`.
pub fn digamma<T: Real>(x: T) -> Result<T, SpecialError> {
    Ok(PositiveReal::new(x).map_err(|_| domain("digamma", x))?.digamma())
}

/// `Γ(z + a) / Γ(z)` evaluated in log space.
pub fn gamma_ratio<T: Real>(z: T, a: T) -> Result<T, SpecialError> {
    Ok(log_gamma_ratio(z, a)?.exp())
}

/// `ln(Γ(z + a) / Γ(z))`.
pub fn log_gamma_ratio<T: Real>(z: T, a: T) -> Result<T, SpecialError> {
    let z = PositiveReal::new(z).map_err(|_| domain("gamma_ratio", z))?;
    if !(a >= T::zero()) || !a.is_finite() {
        return Err(SpecialError::Domain {
            function: "gamma_ratio",
            value: a.to_f64_lossy(),
            requirement: "shift a finite and >= 0",
        });
    }
    if a == T::zero() {
        return Ok(T::zero());
    }
    Ok(ln_gamma(z.get() + a) - z.ln_gamma())
}
