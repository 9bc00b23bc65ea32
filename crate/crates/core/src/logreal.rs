//! Reals with an unbounded binary exponent, for quantities whose scale
//! overflows binary64 (theta-type products, `q^{k^2}` factors).
//!
//! The value is `m · 2^e` with `1 <= |m| < 2`, so products keep full
//! binary64 precision regardless of magnitude.

use std::f64::consts::LN_2;
use std::fmt;
use std::ops::{Div, DivAssign, Mul, MulAssign, Neg};

#[derive(Clone, Copy, PartialEq)]
pub struct LogReal {
    m: f64,
    e: i64,
}

/// `x · 2^n` without intermediate overflow.
fn ldexp(mut x: f64, mut n: i64) -> f64 {
    while n > 1000 {
        x *= 2f64.powi(1000);
        n -= 1000;
        if x.is_infinite() {
            return x;
        }
    }
    while n < -1000 {
        x *= 2f64.powi(-1000);
        n += 1000;
        if x == 0.0 {
            return x;
        }
    }
    x * 2f64.powi(n as i32)
}

impl LogReal {
    pub const ZERO: LogReal = LogReal { m: 0.0, e: 0 };
    pub const ONE: LogReal = LogReal { m: 1.0, e: 0 };

    fn normalize(m: f64, e: i64) -> Self {
        if m == 0.0 {
            return Self::ZERO;
        }
        if !m.is_finite() {
            return LogReal { m, e: 0 };
        }
        let mut k = m.abs().log2().floor() as i64;
        let mut r = ldexp(m, -k);
        if r.abs() >= 2.0 {
            r /= 2.0;
            k += 1;
        } else if r.abs() < 1.0 {
            r *= 2.0;
            k -= 1;
        }
        LogReal { m: r, e: e + k }
    }

    pub fn from_f64(x: f64) -> Self {
        Self::normalize(x, 0)
    }

    /// `m · 2^e`.
    pub fn from_mantissa(m: f64, e: i64) -> Self {
        Self::normalize(m, e)
    }

    /// `sign · exp(ln)`; a zero sign gives zero.
    pub fn from_parts(sign: f64, ln: f64) -> Self {
        if sign == 0.0 || ln == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        if ln.is_nan() || sign.is_nan() {
            return LogReal { m: f64::NAN, e: 0 };
        }
        if ln == f64::INFINITY {
            return LogReal {
                m: sign.signum() * f64::INFINITY,
                e: 0,
            };
        }
        let l2 = ln / LN_2;
        let k = l2.floor();
        let frac = ((l2 - k) * LN_2).exp();
        Self::normalize(sign.signum() * frac, k as i64)
    }

    /// `exp(ln)`.
    pub fn exp(ln: f64) -> Self {
        Self::from_parts(1.0, ln)
    }

    pub fn sign(self) -> f64 {
        if self.m == 0.0 {
            0.0
        } else {
            self.m.signum()
        }
    }

    pub fn ln_abs(self) -> f64 {
        if self.m == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.m.abs().ln() + self.e as f64 * LN_2
        }
    }

    pub fn is_zero(self) -> bool {
        self.m == 0.0
    }

    pub fn is_finite(self) -> bool {
        self.m.is_finite()
    }

    /// Converts to `f64`, overflowing to infinity or underflowing to zero.
    pub fn to_f64(self) -> f64 {
        ldexp(self.m, self.e)
    }

    pub fn abs(self) -> Self {
        LogReal {
            m: self.m.abs(),
            e: self.e,
        }
    }

    pub fn powi(self, n: i64) -> Self {
        if n == 0 {
            return Self::ONE;
        }
        if self.is_zero() {
            return if n > 0 {
                Self::ZERO
            } else {
                LogReal {
                    m: f64::INFINITY,
                    e: 0,
                }
            };
        }
        let mut base = if n > 0 { self } else { Self::ONE / self };
        let mut k = n.unsigned_abs();
        let mut acc = Self::ONE;
        while k > 0 {
            if k & 1 == 1 {
                acc *= base;
            }
            base *= base;
            k >>= 1;
        }
        acc
    }

    /// Real power of a nonnegative value; `None` for a negative base.
    pub fn powf(self, e: f64) -> Option<Self> {
        if self.m < 0.0 {
            return None;
        }
        if self.is_zero() {
            return Some(if e > 0.0 {
                Self::ZERO
            } else if e == 0.0 {
                Self::ONE
            } else {
                LogReal {
                    m: f64::INFINITY,
                    e: 0,
                }
            });
        }
        // m^e exactly representable part plus the exponent split into
        // an integer and fractional power of two.
        let pe = self.e as f64 * e;
        let k = pe.floor();
        let frac = (pe - k).exp2() * self.m.powf(e);
        Some(Self::normalize(frac, k as i64))
    }

    pub fn sqrt(self) -> Option<Self> {
        if self.m < 0.0 {
            return None;
        }
        if self.is_zero() {
            return Some(Self::ZERO);
        }
        let (m, e) = if self.e % 2 == 0 {
            (self.m, self.e)
        } else {
            (self.m * 2.0, self.e - 1)
        };
        Some(Self::normalize(m.sqrt(), e / 2))
    }

    /// Relative distance `|a - b| / max(|a|, |b|)` computed without overflow.
    pub fn rel_diff(self, other: Self) -> f64 {
        if self.is_zero() && other.is_zero() {
            return 0.0;
        }
        let top = if self.is_zero() {
            other.e
        } else if other.is_zero() {
            self.e
        } else {
            self.e.max(other.e)
        };
        let a = ldexp(self.m, self.e - top);
        let b = ldexp(other.m, other.e - top);
        (a - b).abs() / a.abs().max(b.abs())
    }

    /// Binary exponent and mantissa, `value = m · 2^e`.
    pub fn parts(self) -> (f64, i64) {
        (self.m, self.e)
    }
}

impl Default for LogReal {
    fn default() -> Self {
        Self::ZERO
    }
}

impl From<f64> for LogReal {
    fn from(x: f64) -> Self {
        Self::from_f64(x)
    }
}

impl Mul for LogReal {
    type Output = LogReal;
    fn mul(self, rhs: LogReal) -> LogReal {
        LogReal::normalize(self.m * rhs.m, self.e + rhs.e)
    }
}

impl Mul<f64> for LogReal {
    type Output = LogReal;
    fn mul(self, rhs: f64) -> LogReal {
        self * LogReal::from_f64(rhs)
    }
}

impl Div for LogReal {
    type Output = LogReal;
    fn div(self, rhs: LogReal) -> LogReal {
        if rhs.is_zero() {
            return LogReal {
                m: self.m / 0.0,
                e: 0,
            };
        }
        LogReal::normalize(self.m / rhs.m, self.e - rhs.e)
    }
}

impl Div<f64> for LogReal {
    type Output = LogReal;
    fn div(self, rhs: f64) -> LogReal {
        self / LogReal::from_f64(rhs)
    }
}

impl MulAssign for LogReal {
    fn mul_assign(&mut self, rhs: LogReal) {
        *self = *self * rhs;
    }
}

impl DivAssign for LogReal {
    fn div_assign(&mut self, rhs: LogReal) {
        *self = *self / rhs;
    }
}

impl Neg for LogReal {
    type Output = LogReal;
    fn neg(self) -> LogReal {
        LogReal {
            m: -self.m,
            e: self.e,
        }
    }
}

impl fmt::Debug for LogReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.e == 0 || self.is_zero() {
            write!(f, "{}", self.m)
        } else {
            write!(f, "{}*2^{}", self.m, self.e)
        }
    }
}
