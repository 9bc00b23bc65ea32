use super::engine::neg_q_power_index;
use super::phi::phi_rs;
use super::pochhammer::{qpoch_inf_scaled, qpoch_multi_scaled};
use super::weighted::{reg_1phi1, weighted_1phi1_scaled, Lower};
use super::{PhiSpec, QContext};
use crate::error::{QError, Result};
use crate::logreal::LogReal;

/// Both sides of `(aq^k, q^{1-k}/a;q)_∞ = (-a)^{-k} q^{-k(k-1)/2} (a, q/a;q)_∞`.
pub fn theta_shift(a: f64, k: i64, ctx: &QContext) -> Result<(f64, f64)> {
    if a == 0.0 {
        return Err(QError::InvalidParameter("theta_shift needs a != 0".into()));
    }
    let q = ctx.q;
    let qk = q.powi(k as i32);
    let lhs = qpoch_multi_scaled(&[a * qk, q / (a * qk)], ctx)?.value;
    let kf = k as f64;
    let rhs = qpoch_multi_scaled(&[a, q / a], ctx)?.value
        * LogReal::from_f64(-a).powi(-k)
        * ctx.pow_scaled(-kf * (kf - 1.0) / 2.0);
    Ok((lhs.to_f64(), rhs.to_f64()))
}

/// Both sides of the index shift for `(q^{1-p};q)_∞ _1φ_1(aq^{-p}; q^{1-p}; q, z)`.
/// The left side is the entire regularized series, so any integer `p` works.
pub fn shift_1phi1(a: f64, p: i64, z: f64, ctx: &QContext) -> Result<(f64, f64)> {
    let q = ctx.q;
    let qp = q.powi(p as i32);
    let lhs = reg_1phi1(a / qp, -p, z, ctx)?.value;
    let den = qpoch_inf_scaled(q * qp / a, ctx)?.value;
    if den.is_zero() {
        let m = neg_q_power_index(q * qp / a, q).unwrap_or(0);
        return Err(QError::PoleInLowerParameter { value: q * qp / a, m });
    }
    let rhs = qpoch_inf_scaled(q / a, ctx)?.value / den
        * LogReal::from_f64(a * z / q).powi(p)
        * reg_1phi1(a, p, z * qp, ctx)?.value;
    Ok((lhs.to_f64(), rhs.to_f64()))
}

/// Both sides of `_1φ_1(a;c;q,z) = (z;q)_∞/(c;q)_∞ · _1φ_1(az/c; z; q, c)`.
pub fn transform_1phi1_heine(a: f64, c: f64, z: f64, ctx: &QContext) -> Result<(f64, f64)> {
    for v in [c, z] {
        if let Some(m) = neg_q_power_index(v, ctx.q) {
            return Err(QError::PoleInLowerParameter { value: v, m });
        }
    }
    let cinf = qpoch_inf_scaled(c, ctx)?.value;
    let lhs = weighted_1phi1_scaled(a * z, z, Lower::Value(c), ctx)?.value / cinf;
    let rhs = weighted_1phi1_scaled(a * z, c, Lower::Value(z), ctx)?.value / cinf;
    Ok((lhs.to_f64(), rhs.to_f64()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QDiffMode {
    /// `f = _2φ_1(a, b; c; q, ·)`.
    Hypergeometric,
    /// `f = _1φ_1(a; c; q, ·)`; `b` is ignored.
    Confluent,
}

/// A residual together with the magnitude of the terms that produced it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Residual {
    pub value: f64,
    pub scale: f64,
}

impl Residual {
    pub fn relative(&self) -> f64 {
        if self.scale == 0.0 {
            self.value.abs()
        } else {
            self.value.abs() / self.scale
        }
    }
}

/// Residual of the second-order q-difference equation satisfied by
/// `_2φ_1` (or by `_1φ_1` in confluent mode).
pub fn qdiff_residual_2phi1(
    a: f64,
    b: f64,
    c: f64,
    z: f64,
    mode: QDiffMode,
    ctx: &QContext,
) -> Result<Residual> {
    let q = ctx.q;
    let f = |x: f64| -> Result<f64> {
        let spec = match mode {
            QDiffMode::Hypergeometric => PhiSpec::new(&[a, b], &[c], x),
            QDiffMode::Confluent => PhiSpec::new(&[a], &[c], x),
        };
        Ok(phi_rs(&spec, ctx)?.value)
    };
    let (c1, c2, c3) = match mode {
        QDiffMode::Hypergeometric => (c - a * b * z, -(c + q) + (a + b) * z, q - z),
        QDiffMode::Confluent => (c - a * z, -(c + q) + z, q),
    };
    let t1 = c1 * f(q * z)?;
    let t2 = c2 * f(z)?;
    let t3 = c3 * f(z / q)?;
    Ok(Residual {
        value: t1 + t2 + t3,
        scale: t1.abs() + t2.abs() + t3.abs(),
    })
}
