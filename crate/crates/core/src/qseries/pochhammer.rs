use super::{QContext, Scaled, SeriesValue};
use crate::error::{QError, Result};
use crate::logreal::LogReal;

/// Running product that renormalises its mantissa to stay in range.
struct ScaledProduct {
    m: f64,
    e2: i64,
}

impl ScaledProduct {
    fn new() -> Self {
        ScaledProduct { m: 1.0, e2: 0 }
    }

    fn mul(&mut self, f: f64) {
        self.m *= f;
        let a = self.m.abs();
        if a != 0.0 && !(1e-150..=1e150).contains(&a) {
            let e = a.log2().floor() as i64;
            self.m *= 2f64.powi(-e as i32);
            self.e2 += e;
        }
    }

    fn finish(self) -> LogReal {
        LogReal::from_mantissa(self.m, self.e2)
    }
}

/// `(a;q)_n`.
pub fn qpoch_finite(a: f64, n: usize, ctx: &QContext) -> f64 {
    let mut p = 1.0;
    let mut f = a;
    for _ in 0..n {
        p *= 1.0 - f;
        f *= ctx.q;
    }
    p
}

/// `(a;q)_n` without overflow.
pub fn qpoch_finite_scaled(a: f64, n: usize, ctx: &QContext) -> LogReal {
    let mut p = ScaledProduct::new();
    let mut f = a;
    for _ in 0..n {
        p.mul(1.0 - f);
        f *= ctx.q;
    }
    p.finish()
}

fn inf_length(a: f64, ctx: &QContext) -> Result<usize> {
    if a == 0.0 {
        return Ok(0);
    }
    let n = ((ctx.eps_term / a.abs()).ln() / ctx.q.ln()).ceil();
    let n = if n > 0.0 { n } else { 0.0 };
    if n > ctx.max_terms as f64 {
        return Err(QError::TruncationCapExceeded {
            what: "qpoch_inf",
            cap: ctx.max_terms,
        });
    }
    Ok(n as usize)
}

/// `(a;q)_∞` in sign/log form.
pub fn qpoch_inf_scaled(a: f64, ctx: &QContext) -> Result<Scaled> {
    if !a.is_finite() {
        return Err(QError::InvalidParameter(format!("non-finite Pochhammer argument {a}")));
    }
    let n = inf_length(a, ctx)?;
    let value = qpoch_finite_scaled(a, n, ctx);
    let tail = a.abs() * ctx.q.powi(n as i32) / (1.0 - ctx.q);
    let rel = tail + f64::EPSILON * (n as f64 + 1.0);
    Ok(Scaled::with_rel_err(value, rel, n))
}

/// `(a;q)_∞`, truncated once `|a| q^N < eps_term`.
pub fn qpoch_inf(a: f64, ctx: &QContext) -> Result<SeriesValue> {
    qpoch_inf_scaled(a, ctx).map(|s| s.to_series())
}

/// `(a_1, ..., a_m; q)_∞` in sign/log form.
pub fn qpoch_multi_scaled(params: &[f64], ctx: &QContext) -> Result<Scaled> {
    let mut acc = Scaled::exact(LogReal::ONE);
    for &a in params {
        acc = acc.mul(qpoch_inf_scaled(a, ctx)?);
    }
    Ok(acc)
}

/// `(a_1, ..., a_m; q)_∞`.
pub fn qpoch_multi(params: &[f64], ctx: &QContext) -> Result<SeriesValue> {
    qpoch_multi_scaled(params, ctx).map(|s| s.to_series())
}
