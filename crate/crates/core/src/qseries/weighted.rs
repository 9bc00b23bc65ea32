//! The entire series `(b;q)_∞ _1φ_1(a; b; q, z)`, written so that it stays
//! finite when `b` hits `q^{-m}` and when `z → 0` with `az` fixed.

use super::engine::{neg_q_power_index, sum_series, POWER_MATCH};
use super::pochhammer::qpoch_inf_scaled;
use super::{QContext, Scaled, SeriesValue};
use crate::error::Result;
use crate::logreal::LogReal;

/// Lower parameter of the weighted series.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Lower {
    /// `b = q^{1+m}`; terms with `j < -m` vanish.
    Lattice(i64),
    Value(f64),
}

impl Lower {
    fn normalized(self, q: f64) -> Lower {
        match self {
            Lower::Value(b) if b > 0.0 => {
                // b = q^n with n <= 0 means b = q^{1+m}, m = n - 1.
                let n = (b.ln() / q.ln()).round();
                if n <= 0.0 && n > -1e6 {
                    let target = q.powf(n);
                    if (b - target).abs() < POWER_MATCH * target {
                        return Lower::Lattice(n as i64 - 1);
                    }
                }
                self
            }
            other => other,
        }
    }
}

/// `Σ_j ∏_{i<j}(z - az q^i) (b q^j;q)_∞ q^{j(j-1)/2} (-1)^j / (q;q)_j`,
/// which equals `(b;q)_∞ _1φ_1(az/z; b; q, z)` when `z ≠ 0`.
pub fn weighted_1phi1_scaled(az: f64, z: f64, lower: Lower, ctx: &QContext) -> Result<Scaled> {
    let q = ctx.q;
    let lower = lower.normalized(q);

    let last = if z == 0.0 {
        if az == 0.0 {
            Some(0)
        } else {
            None
        }
    } else {
        neg_q_power_index(az / z, q).map(|n| n as usize)
    };

    let (j0, inv_factor): (usize, Box<dyn Fn(usize) -> f64>) = match lower {
        Lower::Lattice(m) => {
            let j0 = if m < 0 { (-m) as usize } else { 0 };
            (j0, Box::new(move |j| 1.0 - q.powi((1 + m + j as i64) as i32)))
        }
        Lower::Value(b) => (0, Box::new(move |j| 1.0 - b * q.powi(j as i32))),
    };

    if let Some(l) = last {
        if l < j0 {
            return Ok(Scaled::exact(LogReal::ZERO));
        }
    }

    let b_j0 = match lower {
        Lower::Lattice(m) => q.powi((1 + m + j0 as i64) as i32),
        Lower::Value(b) => b,
    };
    let head = qpoch_inf_scaled(b_j0, ctx)?;
    let mut first = head.value;
    let mut qi = 1.0;
    for _ in 0..j0 {
        first *= LogReal::from_f64(z - az * qi) / (1.0 - qi * q);
        qi *= q;
    }
    let jf = j0 as f64;
    first *= ctx.pow_scaled(jf * (jf - 1.0) / 2.0);
    if j0 % 2 == 1 {
        first = -first;
    }

    let ratio = move |j: usize| {
        let qj = q.powi(j as i32);
        -(z - az * qj) * qj / ((1.0 - qj * q) * inv_factor(j))
    };
    let mut s = sum_series(first, j0, last, ratio, ctx, "weighted_1phi1")?;
    s.abs_err = super::engine::sum_abs(s.abs_err, s.value.abs() * head.rel_err());
    Ok(s)
}

/// `(b;q)_∞ _1φ_1(a; b; q, z)`.
pub fn weighted_1phi1(a: f64, b: f64, z: f64, ctx: &QContext) -> Result<SeriesValue> {
    weighted_1phi1_scaled(a * z, z, Lower::Value(b), ctx).map(|s| s.to_series())
}

/// `(q^{1+m};q)_∞ _1φ_1(a; q^{1+m}; q, z)` for any integer `m`, read as the
/// entire series when `m < 0`.
pub fn reg_1phi1(a: f64, m: i64, z: f64, ctx: &QContext) -> Result<Scaled> {
    weighted_1phi1_scaled(a * z, z, Lower::Lattice(m), ctx)
}
