//! Log-polar complex numbers for products of thousands of unit-scale factors.
//!
//! A [`LogComplex`] stores `ln|z|` and `arg z` separately, so a product of
//! 10⁴ factors of modulus 0.9 (≈ 10⁻⁴⁵⁸) stays representable. Exact zero is
//! `log_mag = -inf`; any product containing it short-circuits to zero.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Mul, MulAssign};

use num_complex::Complex64;

/// Wraps an angle into `(-π, π]`.
pub fn wrap_phase(phase: f64) -> f64 {
    if !phase.is_finite() {
        return phase;
    }
    let mut p = phase % (2.0 * PI);
    if p <= -PI {
        p += 2.0 * PI;
    } else if p > PI {
        p -= 2.0 * PI;
    }
    p
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogComplex {
    /// Natural log of the modulus; `-inf` encodes exact zero.
    pub log_mag: f64,
    /// Argument in `(-π, π]`; zero for exact zero.
    pub phase: f64,
}

impl LogComplex {
    pub const ONE: LogComplex = LogComplex { log_mag: 0.0, phase: 0.0 };
    pub const ZERO: LogComplex = LogComplex { log_mag: f64::NEG_INFINITY, phase: 0.0 };

    pub fn new(log_mag: f64, phase: f64) -> Self {
        if log_mag == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        LogComplex { log_mag, phase: wrap_phase(phase) }
    }

    pub fn from_complex(z: Complex64) -> Self {
        if z.re == 0.0 && z.im == 0.0 {
            return Self::ZERO;
        }
        LogComplex { log_mag: z.norm().ln(), phase: z.arg() }
    }

    /// `exp(log_mag)` as a plain real; a positive real factor.
    pub fn from_real_log(log_mag: f64) -> Self {
        Self::new(log_mag, 0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.log_mag == f64::NEG_INFINITY
    }

    /// Back to rectangular form. Underflows to zero for `log_mag < ~-745`.
    pub fn to_complex(&self) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::from_polar(self.log_mag.exp(), self.phase)
    }

    pub fn abs(&self) -> f64 {
        self.log_mag.exp()
    }

    pub fn log10_abs(&self) -> f64 {
        self.log_mag / std::f64::consts::LN_10
    }

    pub fn conj(&self) -> Self {
        if self.is_zero() {
            return *self;
        }
        LogComplex { log_mag: self.log_mag, phase: wrap_phase(-self.phase) }
    }

    /// Multiplies by `exp(-exponent)` for a real damping exponent.
    pub fn damp(&self, exponent: f64) -> Self {
        if self.is_zero() {
            return *self;
        }
        LogComplex { log_mag: self.log_mag - exponent, phase: self.phase }
    }

    /// Stable sum: rescales both terms by the larger modulus before adding.
    pub fn add(&self, other: &LogComplex) -> LogComplex {
        if self.is_zero() {
            return *other;
        }
        if other.is_zero() {
            return *self;
        }
        let m = self.log_mag.max(other.log_mag);
        let s = Complex64::from_polar((self.log_mag - m).exp(), self.phase)
            + Complex64::from_polar((other.log_mag - m).exp(), other.phase);
        if s.re == 0.0 && s.im == 0.0 {
            return Self::ZERO;
        }
        LogComplex { log_mag: m + s.norm().ln(), phase: s.arg() }
    }

    /// Sums many terms with a single rescale by the largest modulus.
    pub fn sum<'a, I>(terms: I) -> LogComplex
    where
        I: IntoIterator<Item = &'a LogComplex>,
    {
        let terms: Vec<&LogComplex> = terms.into_iter().filter(|t| !t.is_zero()).collect();
        let Some(m) = terms.iter().map(|t| t.log_mag).reduce(f64::max) else {
            return Self::ZERO;
        };
        let s: Complex64 = terms.iter().map(|t| Complex64::from_polar((t.log_mag - m).exp(), t.phase)).sum();
        if s.re == 0.0 && s.im == 0.0 {
            return Self::ZERO;
        }
        LogComplex { log_mag: m + s.norm().ln(), phase: s.arg() }
    }

    /// Real part, scaled back from the log domain (may underflow to 0).
    pub fn re(&self) -> f64 {
        self.to_complex().re
    }
}

impl Default for LogComplex {
    fn default() -> Self {
        Self::ONE
    }
}

impl Mul for LogComplex {
    type Output = LogComplex;
    fn mul(self, rhs: LogComplex) -> LogComplex {
        if self.is_zero() || rhs.is_zero() {
            return Self::ZERO;
        }
        LogComplex { log_mag: self.log_mag + rhs.log_mag, phase: wrap_phase(self.phase + rhs.phase) }
    }
}

impl MulAssign for LogComplex {
    fn mul_assign(&mut self, rhs: LogComplex) {
        *self = *self * rhs;
    }
}

impl Mul<Complex64> for LogComplex {
    type Output = LogComplex;
    fn mul(self, rhs: Complex64) -> LogComplex {
        self * LogComplex::from_complex(rhs)
    }
}

impl From<Complex64> for LogComplex {
    fn from(z: Complex64) -> Self {
        LogComplex::from_complex(z)
    }
}

impl fmt::Display for LogComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "exp({:.6e}) * e^(i{:.6})", self.log_mag, self.phase)
    }
}

/// Product of `factors` accumulated as `Σ ln|z_k|` and wrapped `Σ arg z_k`.
///
/// The phase sum is wrapped once at the end, so it carries no more rounding
/// than a plain running sum of arguments.
pub fn log_product<I>(factors: I) -> LogComplex
where
    I: IntoIterator<Item = Complex64>,
{
    let mut log_mag = 0.0;
    let mut phase = 0.0;
    for z in factors {
        if z.re == 0.0 && z.im == 0.0 {
            return LogComplex::ZERO;
        }
        log_mag += z.norm().ln();
        phase += z.arg();
    }
    LogComplex::new(log_mag, phase)
}
