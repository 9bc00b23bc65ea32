//! Adaptive lattice sums over `k ∈ Z` or `k ≥ k_min`.

use crate::error::{QError, Result};
use crate::logreal::LogReal;
use crate::qseries::{QContext, Scaled};
use crate::sum::ScaledSum;

/// Terms required below the threshold before a direction is closed.
const SMALL_RUN: usize = 5;

/// Tuning of [`adaptive_sum`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SumWindow {
    /// Half-width of the window summed before any adaptivity.
    pub start: i64,
    /// Largest `|k|` that may be visited.
    pub cap: i64,
}

impl Default for SumWindow {
    fn default() -> Self {
        SumWindow { start: 10, cap: 200 }
    }
}

/// Result of an adaptive lattice sum together with the indices visited.
#[derive(Clone, Copy, Debug)]
pub struct LatticeSum {
    pub sum: Scaled,
    pub window: (i64, i64),
}

/// Sums `f(k)` over `k ≥ lower` (or all of `Z` when `lower` is `None`).
/// Each open direction is extended until five consecutive terms are below
/// `eps_term` times the running sum of magnitudes.
pub fn adaptive_sum<F>(mut f: F, lower: Option<i64>, win: SumWindow, ctx: &QContext) -> Result<LatticeSum>
where
    F: FnMut(i64) -> Result<LogReal>,
{
    let mut acc = ScaledSum::new();
    let (lo0, hi0) = match lower {
        Some(l) => (l, l + 2 * win.start),
        None => (-win.start, win.start),
    };
    for k in lo0..=hi0 {
        let t = f(k)?;
        check_finite(t, k)?;
        acc.add(t);
    }
    let mut extend = |dir: i64, from: i64, acc: &mut ScaledSum| -> Result<i64> {
        let mut k = from;
        let mut small = 0;
        loop {
            k += dir;
            if k.abs() > win.cap {
                return Err(QError::NonSummable { cap: win.cap });
            }
            let t = f(k)?;
            check_finite(t, k)?;
            acc.add(t);
            let thresh = acc.abs_sum() * ctx.eps_term;
            if t.is_zero() || t.abs().ln_abs() <= thresh.ln_abs() {
                small += 1;
                if small >= SMALL_RUN {
                    return Ok(k);
                }
            } else {
                small = 0;
            }
        }
    };
    let hi = extend(1, hi0, &mut acc)?;
    let lo = if lower.is_some() {
        lo0
    } else {
        extend(-1, lo0, &mut acc)?
    };
    let n = acc.len();
    let mut err = ScaledSum::new();
    err.add(acc.abs_sum() * (f64::EPSILON * (2.0 + (n as f64).sqrt())));
    err.add(acc.abs_sum() * ctx.eps_term);
    Ok(LatticeSum {
        sum: Scaled {
            value: acc.value(),
            abs_err: err.value(),
            n_terms: n,
            cancellation: acc.cancellation(),
        },
        window: (lo, hi),
    })
}

fn check_finite(t: LogReal, k: i64) -> Result<()> {
    if t.is_finite() {
        Ok(())
    } else {
        Err(QError::DivergentSeries(format!("non-finite lattice term at k = {k}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_sided_geometric() {
        let ctx = QContext::default();
        // Σ_k 2^{-|k|} = 3.
        let s = adaptive_sum(
            |k| Ok(LogReal::from_f64(0.5).powi(k.abs())),
            None,
            SumWindow::default(),
            &ctx,
        )
        .unwrap();
        assert!((s.sum.value.to_f64() - 3.0).abs() < 1e-15);
        assert!(s.window.0 < -50 && s.window.1 > 50);
    }

    #[test]
    fn one_sided_gaussian() {
        let ctx = QContext::default();
        let s = adaptive_sum(
            |k| Ok(LogReal::exp(-(k as f64).powi(2))),
            Some(0),
            SumWindow::default(),
            &ctx,
        )
        .unwrap();
        let o: f64 = (0..30).map(|k| (-(k as f64).powi(2)).exp()).sum();
        assert!((s.sum.value.to_f64() - o).abs() < 1e-15);
        assert_eq!(s.window.0, 0);
    }

    #[test]
    fn non_summable_is_reported() {
        let ctx = QContext::default();
        let r = adaptive_sum(|_| Ok(LogReal::ONE), None, SumWindow::default(), &ctx);
        assert!(matches!(r, Err(QError::NonSummable { cap: 200 })));
    }
}
