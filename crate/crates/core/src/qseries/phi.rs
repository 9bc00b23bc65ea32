use super::engine::{neg_q_power_index, sum_series};
use super::{PhiSpec, QContext, Scaled, SeriesValue};
use crate::error::{QError, Result};
use crate::logreal::LogReal;

/// Generic `_rφ_s(a; b; q, z)` with the factor `((-1)^j q^{j(j-1)/2})^{1+s-r}`.
pub fn phi_rs(spec: &PhiSpec, ctx: &QContext) -> Result<SeriesValue> {
    phi_rs_scaled(spec, ctx).map(|s| s.to_series())
}

pub fn phi_rs_scaled(spec: &PhiSpec, ctx: &QContext) -> Result<Scaled> {
    let q = ctx.q;
    let r = spec.upper.len() as i64;
    let s = spec.lower.len() as i64;
    let power = 1 + s - r;
    let z = spec.z;

    let last = spec
        .upper
        .iter()
        .filter_map(|&a| neg_q_power_index(a, q))
        .min()
        .map(|n| n as usize);

    for &b in &spec.lower {
        if let Some(m) = neg_q_power_index(b, q) {
            // The factor (1 - b q^m) first appears in term m + 1.
            if last.map_or(true, |n| n as u64 > m) {
                return Err(QError::PoleInLowerParameter { value: b, m });
            }
        }
    }

    if z == 0.0 {
        return Ok(Scaled::exact(LogReal::ONE));
    }
    if last.is_none() {
        if power < 0 {
            return Err(QError::DivergentSeries(format!(
                "_{r}phi_{s} with 1+s-r = {power} does not converge"
            )));
        }
        if power == 0 && z.abs() >= 1.0 {
            return Err(QError::DivergentSeries(format!(
                "_{r}phi_{s} needs |z| < 1, got {z}"
            )));
        }
    }

    let upper = spec.upper.clone();
    let lower = spec.lower.clone();
    let ratio = move |j: usize| {
        let qj = q.powi(j as i32);
        let mut num = z;
        for &a in &upper {
            num *= 1.0 - a * qj;
        }
        let mut den = 1.0 - qj * q;
        for &b in &lower {
            den *= 1.0 - b * qj;
        }
        let sign_q = -qj;
        num * sign_q.powi(power as i32) / den
    };
    sum_series(LogReal::ONE, 0, last, ratio, ctx, "phi_rs")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qseries::qpoch_finite;
    use crate::sum::CompensatedSum;

    fn ctx() -> QContext {
        QContext::default()
    }

    /// Explicit term formula, independent of the ratio recurrence.
    fn brute(up: &[f64], lo: &[f64], z: f64, n: usize) -> f64 {
        let c = ctx();
        let r = up.len() as i32;
        let s = lo.len() as i32;
        let mut acc = CompensatedSum::new();
        for j in 0..n {
            let mut num = 1.0;
            for &a in up {
                num *= qpoch_finite(a, j, &c);
            }
            let mut den = qpoch_finite(c.q, j, &c);
            for &b in lo {
                den *= qpoch_finite(b, j, &c);
            }
            let jf = j as f64;
            let fac = ((-1f64).powi(j as i32) * c.q.powf(jf * (jf - 1.0) / 2.0)).powi(1 + s - r);
            acc.add(num / den * fac * z.powi(j as i32));
        }
        acc.value()
    }

    #[test]
    fn zero_argument() {
        let v = phi_rs(&PhiSpec::new(&[0.3], &[0.6], 0.0), &ctx()).unwrap();
        assert_eq!(v.value, 1.0);
    }

    #[test]
    fn terminates_on_unit_upper_parameter() {
        let v = phi_rs(&PhiSpec::new(&[1.0, 0.3], &[0.2], 0.5), &ctx()).unwrap();
        assert_eq!(v.value, 1.0);
        assert_eq!(v.n_terms, 1);
    }

    #[test]
    fn matches_brute_force() {
        let v = phi_rs(&PhiSpec::new(&[0.2], &[0.6], 0.3), &ctx()).unwrap();
        let b = brute(&[0.2], &[0.6], 0.3, 200);
        assert!((v.value - b).abs() < 1e-15);
        let v = phi_rs(&PhiSpec::new(&[0.2, -0.7], &[0.6], 0.45), &ctx()).unwrap();
        let b = brute(&[0.2, -0.7], &[0.6], 0.45, 200);
        assert!((v.value - b).abs() < 1e-14);
    }

    #[test]
    fn terminating_matches_finite_sum() {
        let q = 0.5f64;
        let up = [q.powi(-4), 0.37];
        let lo = [0.21, -0.4];
        let v = phi_rs(&PhiSpec::new(&up, &lo, -1.3), &ctx()).unwrap();
        let b = brute(&up, &lo, -1.3, 5);
        // Four ulps of the term-magnitude scale.
        let scale = v.cancellation * v.value.abs();
        assert!((v.value - b).abs() <= 4.0 * f64::EPSILON * scale, "{} vs {b}", v.value);
        assert_eq!(v.n_terms, 5);
    }

    #[test]
    fn pole_detection() {
        let q = 0.5f64;
        let r = phi_rs(&PhiSpec::new(&[0.3], &[q.powi(-2)], 0.1), &ctx());
        assert!(matches!(r, Err(QError::PoleInLowerParameter { m: 2, .. })));
        // Terminating before the pole term is fine.
        let r = phi_rs(&PhiSpec::new(&[q.powi(-1)], &[q.powi(-2)], 0.1), &ctx());
        assert!(r.is_ok());
    }

    #[test]
    fn divergence() {
        let r = phi_rs(&PhiSpec::new(&[0.3, 0.2], &[0.5], 1.5), &ctx());
        assert!(matches!(r, Err(QError::DivergentSeries(_))));
        let r = phi_rs(&PhiSpec::new(&[0.3, 0.2, 0.1], &[], 0.5), &ctx());
        assert!(matches!(r, Err(QError::DivergentSeries(_))));
    }
}
