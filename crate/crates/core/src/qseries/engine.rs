//! Term-ratio summation shared by all series in the crate.

use super::{QContext, Scaled};
use crate::error::{QError, Result};
use crate::logreal::LogReal;
use crate::sum::ScaledSum;

/// Consecutive small terms required before a series is truncated.
const SMALL_RUN: usize = 3;

/// Relative tolerance used to recognise `x = q^{-m}`.
pub(crate) const POWER_MATCH: f64 = 1e-12;

/// Returns `m >= 0` when `x` equals `q^{-m}` to relative `1e-12`.
pub fn neg_q_power_index(x: f64, q: f64) -> Option<u64> {
    if !(x > 0.0) {
        return None;
    }
    let n = (x.ln() / -q.ln()).round();
    if n < 0.0 || n > 1e6 {
        return None;
    }
    let target = q.powf(-n);
    if target.is_finite() && (x - target).abs() < POWER_MATCH * target {
        Some(n as u64)
    } else {
        None
    }
}

/// Sums `t_{j0}, t_{j0+1}, ...` given the first term and the ratio
/// `t_{j+1}/t_j`.  `last` is an inclusive terminating index.
pub(crate) fn sum_series(
    first: LogReal,
    j0: usize,
    last: Option<usize>,
    mut ratio: impl FnMut(usize) -> f64,
    ctx: &QContext,
    what: &'static str,
) -> Result<Scaled> {
    let ln_eps = ctx.eps_term.ln();
    let mut acc = ScaledSum::new();
    let mut t = first;
    let mut j = j0;
    let mut small = 0usize;
    let mut last_ratio = f64::INFINITY;
    let mut tail = LogReal::ZERO;
    loop {
        acc.add(t);
        if let Some(l) = last {
            if j >= l {
                break;
            }
        }
        let s = acc.value();
        let is_small = t.is_zero() || (!s.is_zero() && t.ln_abs() < ln_eps + s.ln_abs());
        if is_small && last_ratio < 1.0 {
            small += 1;
        } else {
            small = 0;
        }
        let r = ratio(j);
        if !r.is_finite() {
            return Err(QError::DivergentSeries(format!(
                "{what}: non-finite term ratio at j = {j}"
            )));
        }
        if small >= SMALL_RUN {
            let ra = r.abs();
            tail = if ra < 1.0 {
                (t * ra).abs() / (1.0 - ra)
            } else {
                t.abs()
            };
            break;
        }
        if acc.len() >= ctx.max_terms {
            return Err(QError::TruncationCapExceeded {
                what,
                cap: ctx.max_terms,
            });
        }
        t = t * r;
        last_ratio = r.abs();
        j += 1;
    }
    let n = acc.len();
    let rounding = acc.abs_sum() * (f64::EPSILON * (2.0 + (n as f64).sqrt()));
    Ok(Scaled {
        value: acc.value(),
        abs_err: sum_abs(tail, rounding),
        n_terms: n,
        cancellation: acc.cancellation(),
    })
}

pub(crate) fn sum_abs(a: LogReal, b: LogReal) -> LogReal {
    let mut s = ScaledSum::new();
    s.add(a.abs());
    s.add(b.abs());
    s.value()
}

pub(crate) fn abs_diff(a: LogReal, b: LogReal) -> LogReal {
    let mut s = ScaledSum::new();
    s.add(a);
    s.add(-b);
    s.value().abs()
}

/// Picks the best-conditioned of several equivalent evaluations and checks
/// that every trustworthy alternative agrees with it.
pub(crate) fn best_of(candidates: Vec<Result<Scaled>>, ctx: &QContext) -> Result<Scaled> {
    let mut ok: Vec<Scaled> = Vec::new();
    let mut first_err = None;
    for c in candidates {
        match c {
            Ok(v) if v.value.is_finite() && v.abs_err.is_finite() => ok.push(v),
            Ok(_) => {}
            Err(e) => {
                if first_err.is_none() {
                    first_err = Some(e);
                }
            }
        }
    }
    if ok.is_empty() {
        return Err(first_err.unwrap_or_else(|| {
            QError::DivergentSeries("no finite evaluation available".into())
        }));
    }
    let best_idx = ok
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.cancellation.total_cmp(&b.1.cancellation))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let best = ok[best_idx];
    for (i, other) in ok.iter().enumerate() {
        if i == best_idx || !other.is_reliable() {
            continue;
        }
        let diff = abs_diff(best.value, other.value);
        let mag = if best.value.abs().ln_abs() >= other.value.abs().ln_abs() {
            best.value.abs()
        } else {
            other.value.abs()
        };
        let tol = sum_abs(sum_abs(best.abs_err, other.abs_err) * 16.0, mag * ctx.eps_verify);
        if !diff.is_zero() && diff.ln_abs() > tol.ln_abs() {
            return Err(QError::FormMismatch {
                first: best.value.to_f64(),
                second: other.value.to_f64(),
                tolerance: tol.to_f64(),
            });
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recognises_negative_powers() {
        let q = 0.5;
        assert_eq!(neg_q_power_index(1.0, q), Some(0));
        assert_eq!(neg_q_power_index(8.0 * (1.0 + 1e-14), q), Some(3));
        assert_eq!(neg_q_power_index(0.5, q), None);
        assert_eq!(neg_q_power_index(8.1, q), None);
        assert_eq!(neg_q_power_index(-8.0, q), None);
    }

    #[test]
    fn geometric_series() {
        let ctx = QContext::default();
        let s = sum_series(LogReal::ONE, 0, None, |_| 0.5, &ctx, "test").unwrap();
        assert!((s.value.to_f64() - 2.0).abs() < 1e-15);
        assert!(s.abs_err.to_f64() < 1e-14);
        assert_eq!(s.cancellation, 1.0);
    }

    #[test]
    fn terminating_index_is_inclusive() {
        let ctx = QContext::default();
        let s = sum_series(LogReal::ONE, 0, Some(2), |_| 1.0, &ctx, "test").unwrap();
        assert_eq!(s.value.to_f64(), 3.0);
        assert_eq!(s.n_terms, 3);
    }

    #[test]
    fn cap_is_enforced() {
        let ctx = QContext::default().with_max_terms(10).unwrap();
        let r = sum_series(LogReal::ONE, 0, None, |_| 0.99, &ctx, "test");
        assert!(matches!(r, Err(QError::TruncationCapExceeded { .. })));
    }

    #[test]
    fn best_of_flags_disagreement() {
        let ctx = QContext::default();
        let a = Scaled::with_rel_err(LogReal::from_f64(1.0), 1e-16, 1);
        let b = Scaled::with_rel_err(LogReal::from_f64(1.001), 1e-16, 1);
        assert!(matches!(
            best_of(vec![Ok(a), Ok(b)], &ctx),
            Err(QError::FormMismatch { .. })
        ));
        let c = Scaled::with_rel_err(LogReal::from_f64(1.0 + 1e-13), 1e-16, 1);
        assert!(best_of(vec![Ok(a), Ok(c)], &ctx).is_ok());
    }
}
