//! q-Pochhammer symbols, basic hypergeometric series and the standard
//! identities built on them.

mod engine;
mod identities;
mod phi;
mod pochhammer;
mod qintegral;
mod weighted;

pub use identities::{
    qdiff_residual_2phi1, shift_1phi1, theta_shift, transform_1phi1_heine, QDiffMode, Residual,
};
pub use phi::{phi_rs, phi_rs_scaled};
pub use pochhammer::{
    qpoch_finite, qpoch_finite_scaled, qpoch_inf, qpoch_inf_scaled, qpoch_multi,
    qpoch_multi_scaled,
};
pub use qintegral::jackson_qintegral;
pub use weighted::{reg_1phi1, weighted_1phi1, weighted_1phi1_scaled, Lower};

pub(crate) use engine::best_of;
pub use engine::neg_q_power_index;

use crate::error::{QError, Result};
use crate::logreal::LogReal;
use serde::Serialize;

/// Global numeric configuration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QContext {
    pub q: f64,
    pub eps_term: f64,
    pub eps_verify: f64,
    pub max_terms: usize,
}

impl QContext {
    pub fn new(q: f64) -> Result<Self> {
        Self::with_options(q, 1e-16, 1e-10, 10_000)
    }

    pub fn with_options(q: f64, eps_term: f64, eps_verify: f64, max_terms: usize) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(QError::InvalidParameter(format!("q = {q} must lie in (0, 1)")));
        }
        if !(eps_term > 0.0) || !(eps_verify > 0.0) {
            return Err(QError::InvalidParameter(
                "eps_term and eps_verify must be positive".into(),
            ));
        }
        if max_terms == 0 {
            return Err(QError::InvalidParameter("max_terms must be at least 1".into()));
        }
        Ok(QContext {
            q,
            eps_term,
            eps_verify,
            max_terms,
        })
    }

    pub fn with_max_terms(mut self, max_terms: usize) -> Result<Self> {
        if max_terms == 0 {
            return Err(QError::InvalidParameter("max_terms must be at least 1".into()));
        }
        self.max_terms = max_terms;
        Ok(self)
    }

    /// `q^e` for a real exponent.
    pub fn pow(&self, e: f64) -> f64 {
        self.q.powf(e)
    }

    /// `q^e` without underflow; the integer part of `e` uses repeated
    /// squaring so the result keeps a few-ulp accuracy for large `|e|`.
    pub fn pow_scaled(&self, e: f64) -> LogReal {
        if !e.is_finite() || e.abs() >= 1e15 {
            return LogReal::exp(e * self.q.ln());
        }
        let n = e.floor();
        LogReal::from_f64(self.q).powi(n as i64) * self.q.powf(e - n)
    }
}

impl Default for QContext {
    fn default() -> Self {
        QContext {
            q: 0.5,
            eps_term: 1e-16,
            eps_verify: 1e-10,
            max_terms: 10_000,
        }
    }
}

/// A computed sum or product with diagnostics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SeriesValue {
    pub value: f64,
    pub abs_err: f64,
    pub n_terms: usize,
    pub cancellation: f64,
}

impl SeriesValue {
    pub fn exact(value: f64) -> Self {
        SeriesValue {
            value,
            abs_err: 0.0,
            n_terms: 0,
            cancellation: if value == 0.0 { 0.0 } else { 1.0 },
        }
    }

    /// Results with a cancellation index above this carry a warning status.
    pub const CANCELLATION_WARNING: f64 = 1e12;

    pub fn is_reliable(&self) -> bool {
        self.cancellation <= Self::CANCELLATION_WARNING && self.value.is_finite()
    }
}

/// Sign/log valued counterpart of [`SeriesValue`], used wherever the
/// magnitudes may leave the binary64 range.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scaled {
    pub value: LogReal,
    pub abs_err: LogReal,
    pub n_terms: usize,
    pub cancellation: f64,
}

impl Scaled {
    pub fn exact(value: LogReal) -> Self {
        Scaled {
            value,
            abs_err: LogReal::ZERO,
            n_terms: 0,
            cancellation: if value.is_zero() { 0.0 } else { 1.0 },
        }
    }

    /// Value with an estimated relative error.
    pub fn with_rel_err(value: LogReal, rel_err: f64, n_terms: usize) -> Self {
        Scaled {
            value,
            abs_err: value.abs() * rel_err,
            n_terms,
            cancellation: if value.is_zero() { 0.0 } else { 1.0 },
        }
    }

    pub fn rel_err(&self) -> f64 {
        if self.value.is_zero() {
            if self.abs_err.is_zero() {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.abs_err / self.value.abs()).to_f64()
        }
    }

    /// Product, propagating relative errors to first order.
    pub fn mul(self, other: Scaled) -> Scaled {
        let value = self.value * other.value;
        let rel = self.rel_err() + other.rel_err();
        Scaled {
            value,
            abs_err: if rel.is_finite() {
                value.abs() * rel
            } else {
                engine::sum_abs(self.abs_err * other.value.abs(), other.abs_err * self.value.abs())
            },
            n_terms: self.n_terms + other.n_terms,
            cancellation: self.cancellation.max(other.cancellation),
        }
    }

    pub fn div(self, other: Scaled) -> Scaled {
        let value = self.value / other.value;
        let rel = self.rel_err() + other.rel_err();
        Scaled {
            value,
            abs_err: value.abs() * rel,
            n_terms: self.n_terms + other.n_terms,
            cancellation: self.cancellation.max(other.cancellation),
        }
    }

    /// Multiplies by an exactly known factor.
    pub fn scale(self, f: LogReal) -> Scaled {
        Scaled {
            value: self.value * f,
            abs_err: self.abs_err * f.abs(),
            ..self
        }
    }

    pub fn to_series(&self) -> SeriesValue {
        SeriesValue {
            value: self.value.to_f64(),
            abs_err: self.abs_err.to_f64(),
            n_terms: self.n_terms,
            cancellation: self.cancellation,
        }
    }

    pub fn is_reliable(&self) -> bool {
        self.cancellation <= SeriesValue::CANCELLATION_WARNING && self.value.is_finite()
    }
}

/// Parameters of a generic `_rφ_s` series.
#[derive(Clone, Debug, PartialEq)]
pub struct PhiSpec {
    pub upper: Vec<f64>,
    pub lower: Vec<f64>,
    pub z: f64,
}

impl PhiSpec {
    pub fn new(upper: &[f64], lower: &[f64], z: f64) -> Self {
        PhiSpec {
            upper: upper.to_vec(),
            lower: lower.to_vec(),
            z,
        }
    }
}
