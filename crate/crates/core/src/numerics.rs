//! Special functions and log-domain complex arithmetic.

use std::f64::consts::PI;
use std::ops::{Div, DivAssign, Mul, MulAssign};
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("invalid level r = {0}: r must be odd and at least 3")]
    InvalidLevel(i64),
    #[error("argument is not a number")]
    NotANumber,
}

/// A complex number kept as `exp(log_mag + i*phase)`.
///
/// `log_mag = -inf` encodes zero. The phase is accumulated without reduction,
/// so products of many factors stay exact in both fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogComplex {
    pub log_mag: f64,
    pub phase: f64,
}

impl LogComplex {
    pub const ONE: LogComplex = LogComplex {
        log_mag: 0.0,
        phase: 0.0,
    };
    pub const ZERO: LogComplex = LogComplex {
        log_mag: f64::NEG_INFINITY,
        phase: 0.0,
    };

    pub fn new(log_mag: f64, phase: f64) -> Self {
        LogComplex { log_mag, phase }
    }

    pub fn from_complex(z: Complex64) -> Self {
        if z.re == 0.0 && z.im == 0.0 {
            return Self::ZERO;
        }
        LogComplex {
            log_mag: z.norm().ln(),
            phase: z.arg(),
        }
    }

    /// Real numbers get phase 0 or pi, never a rounded `atan2` value.
    pub fn from_real(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else if x > 0.0 {
            LogComplex {
                log_mag: x.ln(),
                phase: 0.0,
            }
        } else {
            LogComplex {
                log_mag: (-x).ln(),
                phase: PI,
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.log_mag == f64::NEG_INFINITY
    }

    pub fn to_complex(self) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::from_polar(self.log_mag.exp(), self.phase)
    }

    /// Value scaled by `exp(-shift)`, useful for summing terms of wildly different size.
    pub fn to_complex_scaled(self, shift: f64) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::from_polar((self.log_mag - shift).exp(), self.phase)
    }

    /// Square root taken as half of both fields, so `sqrt(x*y) == sqrt(x)*sqrt(y)` exactly.
    pub fn sqrt(self) -> Self {
        LogComplex {
            log_mag: 0.5 * self.log_mag,
            phase: 0.5 * self.phase,
        }
    }

    pub fn powi(self, n: i32) -> Self {
        if self.is_zero() {
            return if n == 0 { Self::ONE } else { Self::ZERO };
        }
        LogComplex {
            log_mag: self.log_mag * n as f64,
            phase: self.phase * n as f64,
        }
    }

    pub fn inv(self) -> Self {
        LogComplex {
            log_mag: -self.log_mag,
            phase: -self.phase,
        }
    }

    /// Phase reduced to (-pi, pi].
    pub fn principal_phase(&self) -> f64 {
        let p = self.phase.rem_euclid(2.0 * PI);
        if p > PI {
            p - 2.0 * PI
        } else {
            p
        }
    }
}

impl Mul for LogComplex {
    type Output = LogComplex;
    fn mul(self, rhs: LogComplex) -> LogComplex {
        LogComplex {
            log_mag: self.log_mag + rhs.log_mag,
            phase: self.phase + rhs.phase,
        }
    }
}

impl MulAssign for LogComplex {
    fn mul_assign(&mut self, rhs: LogComplex) {
        *self = *self * rhs;
    }
}

impl Div for LogComplex {
    type Output = LogComplex;
    fn div(self, rhs: LogComplex) -> LogComplex {
        LogComplex {
            log_mag: self.log_mag - rhs.log_mag,
            phase: self.phase - rhs.phase,
        }
    }
}

impl DivAssign for LogComplex {
    fn div_assign(&mut self, rhs: LogComplex) {
        *self = *self / rhs;
    }
}

/// Sum of log-domain terms, returned in log-domain form.
pub fn log_sum<I: IntoIterator<Item = LogComplex>>(terms: I) -> LogComplex {
    let terms: Vec<LogComplex> = terms.into_iter().filter(|t| !t.is_zero()).collect();
    let shift = terms
        .iter()
        .map(|t| t.log_mag)
        .fold(f64::NEG_INFINITY, f64::max);
    if shift == f64::NEG_INFINITY {
        return LogComplex::ZERO;
    }
    let s: Complex64 = terms.iter().map(|t| t.to_complex_scaled(shift)).sum();
    let mut out = LogComplex::from_complex(s);
    if !out.is_zero() {
        out.log_mag += shift;
    }
    out
}

fn zeta_even(n: usize) -> f64 {
    if n == 1 {
        return PI * PI / 6.0;
    }
    let s = 2.0 * n as f64;
    let k_max = 200usize;
    let mut sum = 0.0;
    for k in (1..=k_max).rev() {
        sum += (k as f64).powf(-s);
    }
    // Euler-Maclaurin tail beyond k_max.
    let k = k_max as f64;
    sum + k.powf(1.0 - s) / (s - 1.0) - 0.5 * k.powf(-s) + s * k.powf(-s - 1.0) / 12.0
}

const BERNOULLI_TERMS: usize = 30;

/// `B_{2n} / (2n+1)!` for n = 1..=BERNOULLI_TERMS.
fn bernoulli_dilog_coefficients() -> &'static [f64; BERNOULLI_TERMS] {
    static COEFFS: OnceLock<[f64; BERNOULLI_TERMS]> = OnceLock::new();
    COEFFS.get_or_init(|| {
        let mut c = [0.0; BERNOULLI_TERMS];
        for (i, slot) in c.iter_mut().enumerate() {
            let n = i + 1;
            let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
            let two_n = 2.0 * n as f64;
            *slot = sign * 2.0 * zeta_even(n) / ((2.0 * PI).powf(two_n) * (two_n + 1.0));
        }
        c
    })
}

/// Li2 for |z| <= 1 and Re z <= 1/2, via the Bernoulli series in u = -log(1-z).
fn dilog_core(z: Complex64) -> Complex64 {
    let u = -(Complex64::new(1.0, 0.0) - z).ln();
    let u2 = u * u;
    let mut acc = u - u2 * 0.25;
    let mut p = u * u2;
    for &c in bernoulli_dilog_coefficients() {
        let t = p * c;
        acc += t;
        if t.norm() < 1e-18 * acc.norm() {
            break;
        }
        p *= u2;
    }
    acc
}

/// Principal-branch dilogarithm `Li2(z) = -int_0^z log(1-t)/t dt`, cut on [1, inf).
///
/// On the cut the value agrees with the limit from below (`Im Li2(x) = -pi*log x` for x > 1),
/// matching the convention of the principal complex logarithm.
pub fn dilog(z: Complex64) -> Result<Complex64, NumericsError> {
    if z.re.is_nan() || z.im.is_nan() {
        return Err(NumericsError::NotANumber);
    }
    Ok(dilog_unchecked(z))
}

pub(crate) fn dilog_unchecked(z: Complex64) -> Complex64 {
    let zeta2 = PI * PI / 6.0;
    let one = Complex64::new(1.0, 0.0);
    if z.re == 0.0 && z.im == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    if z.re == 1.0 && z.im == 0.0 {
        return Complex64::new(zeta2, 0.0);
    }
    if z.norm_sqr() > 1.0 {
        // Inversion: Li2(z) = -pi^2/6 - log^2(-z)/2 - Li2(1/z).
        let l = (-z).ln();
        return -zeta2 - 0.5 * l * l - dilog_unchecked(one / z);
    }
    if z.re > 0.5 {
        // Reflection: Li2(z) = pi^2/6 - log(z)log(1-z) - Li2(1-z).
        let w = one - z;
        return zeta2 - z.ln() * w.ln() - dilog_core(w);
    }
    dilog_core(z)
}

/// Clausen function Cl2(x) for |x| <= pi.
fn clausen_reduced(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let ax = x.abs();
    let r = (ax / (2.0 * PI)).powi(2);
    let mut sum = ax - ax * ax.ln();
    let mut p = r;
    for n in 1..=BERNOULLI_TERMS {
        let two_n = 2.0 * n as f64;
        let t = 2.0 * zeta_even(n) * p * ax / (two_n * (two_n + 1.0));
        sum += t;
        if t < 1e-18 {
            break;
        }
        p *= r;
    }
    sum.copysign(x)
}

/// Lobachevsky function `Λ(θ) = -int_0^θ log|2 sin t| dt`.
///
/// Evaluated as half the Clausen function of 2θ, whose Fourier series
/// `Σ sin(2nθ)/(2n²)` is resummed through its Bernoulli expansion.
pub fn lobachevsky(theta: f64) -> f64 {
    let mut t = theta.rem_euclid(PI);
    if t > PI / 2.0 {
        t -= PI;
    }
    0.5 * clausen_reduced(2.0 * t)
}

pub fn check_level(r: i64) -> Result<(), NumericsError> {
    if r < 3 || r % 2 == 0 {
        Err(NumericsError::InvalidLevel(r))
    } else {
        Ok(())
    }
}

/// `{n} = q^n - q^{-n}` at `q = exp(4πi/r)`, i.e. `2i·sin(4πn/r)`.
pub fn quantum_integer(n: i64, r: i64) -> Result<Complex64, NumericsError> {
    check_level(r)?;
    if n.rem_euclid(r) == 0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    Ok(Complex64::new(
        0.0,
        2.0 * (4.0 * PI * n as f64 / r as f64).sin(),
    ))
}

/// `{n}! = {1}{2}…{n}` in log-domain form. A vanishing factor yields `LogComplex::ZERO`.
pub fn log_quantum_factorial(n: u64, r: i64) -> Result<LogComplex, NumericsError> {
    check_level(r)?;
    let mut acc = LogComplex::ONE;
    for m in 1..=n {
        if (m as i64) % r == 0 {
            return Ok(LogComplex::ZERO);
        }
        let s = (4.0 * PI * m as f64 / r as f64).sin();
        acc.log_mag += (2.0 * s.abs()).ln();
        acc.phase += if s < 0.0 { 1.5 * PI } else { 0.5 * PI };
    }
    Ok(acc)
}

/// Normalized quantum integer `[n] = (q^{n/2} - q^{-n/2}) / (q^{1/2} - q^{-1/2})` at
/// `q = exp(4πi/r)`, i.e. `sin(2πn/r) / sin(2π/r)`. Exactly zero when r divides n.
pub fn normalized_quantum_integer(n: i64, r: i64) -> Result<f64, NumericsError> {
    check_level(r)?;
    Ok(normalized_qint_unchecked(n, r))
}

pub(crate) fn normalized_qint_unchecked(n: i64, r: i64) -> f64 {
    if n.rem_euclid(r) == 0 {
        return 0.0;
    }
    let x = 2.0 * PI / r as f64;
    (x * n as f64).sin() / x.sin()
}
