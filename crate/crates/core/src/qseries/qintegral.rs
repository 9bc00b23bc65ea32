use super::{QContext, SeriesValue};
use crate::error::{QError, Result};
use crate::sum::CompensatedSum;

/// Jackson q-integral over `[-c_end q, a_end q]` as used for big q-Jacobi weights:
/// `(1-q) Σ_{n≥0} q^n [a_end q f(a_end q^{n+1}) + c_end q f(-c_end q^{n+1})]`.
pub fn jackson_qintegral<F>(mut f: F, a_end: f64, c_end: f64, ctx: &QContext) -> Result<SeriesValue>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(a_end > 0.0 && c_end > 0.0) {
        return Err(QError::InvalidParameter(
            "q-integral endpoints must be positive".into(),
        ));
    }
    let q = ctx.q;
    let mut acc = CompensatedSum::new();
    let mut small = 0;
    let mut qn = 1.0;
    for _ in 0..ctx.max_terms {
        let qn1 = qn * q;
        let term = qn * (a_end * q * f(a_end * qn1)? + c_end * q * f(-c_end * qn1)?);
        acc.add(term);
        let last = term.abs();
        if last <= ctx.eps_term * acc.abs_sum() {
            small += 1;
            if small >= 3 {
                let v = (1.0 - q) * acc.value();
                let rounding = f64::EPSILON * acc.abs_sum() * (2.0 + (acc.len() as f64).sqrt());
                return Ok(SeriesValue {
                    value: v,
                    abs_err: (1.0 - q) * (last * q / (1.0 - q) + rounding),
                    n_terms: acc.len(),
                    cancellation: acc.cancellation(),
                });
            }
        } else {
            small = 0;
        }
        qn = qn1;
    }
    Err(QError::TruncationCapExceeded {
        what: "jackson_qintegral",
        cap: ctx.max_terms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> QContext {
        QContext::default()
    }

    #[test]
    fn zero_integrand() {
        let v = jackson_qintegral(|_| Ok(0.0), 1.0, 1.0, &ctx()).unwrap();
        assert_eq!(v.value, 0.0);
    }

    #[test]
    fn constant_integrand() {
        let v = jackson_qintegral(|_| Ok(1.0), 1.0, 1.0, &ctx()).unwrap();
        assert!((v.value - 1.0).abs() < 1e-15);
    }

    #[test]
    fn odd_integrand_cancels() {
        let v = jackson_qintegral(|x| Ok(x), 0.8, 0.8, &ctx()).unwrap();
        assert!(v.value.abs() < 1e-16);
    }

    #[test]
    fn monomials_match_geometric_oracle() {
        // ∫ x^d d_qx = (1-q) q^{d+1} (a^{d+1} + (-1)^d c^{d+1}) / (1 - q^{d+1})
        let c = ctx();
        let q = c.q;
        let (a, cc) = (0.9, 1.7);
        for d in 0..=4 {
            let v = jackson_qintegral(|x| Ok(x.powi(d)), a, cc, &c).unwrap().value;
            let sign = if d % 2 == 0 { 1.0 } else { -1.0 };
            let o = (1.0 - q) * q.powi(d + 1) * (a.powi(d + 1) + sign * cc.powi(d + 1))
                / (1.0 - q.powi(d + 1));
            assert!((v - o).abs() <= 1e-10 * o.abs(), "d = {d}");
        }
    }
}
