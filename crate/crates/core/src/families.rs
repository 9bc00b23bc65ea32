//! q-Laguerre polynomials, the complementary M-functions, Jackson's second
//! q-Bessel function, big q-Bessel functions and big q-Jacobi polynomials.

use crate::error::{QError, Result};
use crate::logreal::LogReal;
use crate::qseries::{
    best_of, phi_rs_scaled, qpoch_finite, qpoch_inf_scaled, qpoch_multi_scaled,
    weighted_1phi1_scaled, Lower, PhiSpec, QContext, Scaled, SeriesValue,
};
use serde::Serialize;

/// Parameters `(α, c)` of the measure on `{c q^k : k ∈ Z}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeasureSpec {
    pub alpha: f64,
    pub c: f64,
    #[serde(skip)]
    pub ctx: QContext,
}

impl MeasureSpec {
    pub fn new(alpha: f64, c: f64, ctx: QContext) -> Result<Self> {
        if !(alpha > -1.0) {
            return Err(QError::InvalidParameter(format!("alpha = {alpha} must exceed -1")));
        }
        if !(c > 0.0) {
            return Err(QError::InvalidParameter(format!("c = {c} must be positive")));
        }
        Ok(MeasureSpec { alpha, c, ctx })
    }

    /// The lattice point `c q^k`.
    pub fn point(&self, k: i64) -> f64 {
        self.c * self.ctx.q.powi(k as i32)
    }
}

/// Parameters `(a, b, c)` of the big q-Jacobi polynomials `P_k(x; a, b, -c; q)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BigJacobiParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl BigJacobiParams {
    pub fn new(a: f64, b: f64, c: f64, ctx: &QContext) -> Result<Self> {
        let q = ctx.q;
        if !(a > 0.0 && a < 1.0 / q) {
            return Err(QError::InvalidParameter(format!("a = {a} must lie in (0, 1/q)")));
        }
        if !(b > -1.0 / q) {
            return Err(QError::InvalidParameter(format!("b = {b} must exceed -1/q")));
        }
        if !(c > 0.0) {
            return Err(QError::InvalidParameter(format!("c = {c} must be positive")));
        }
        Ok(BigJacobiParams { a, b, c })
    }
}

fn pinf(a: f64, ctx: &QContext) -> Result<Scaled> {
    qpoch_inf_scaled(a, ctx)
}

/// Coefficients of `L_n^{(α)}(x;q)` in powers of `x`.
pub fn q_laguerre_coeffs(n: usize, alpha: f64, ctx: &QContext) -> Vec<f64> {
    let q = ctx.q;
    let qa1 = q.powf(alpha + 1.0);
    let pre = qpoch_finite(qa1, n, ctx) / qpoch_finite(q, n, ctx);
    let qn = q.powi(-(n as i32));
    (0..=n)
        .map(|j| {
            let jf = j as f64;
            pre * qpoch_finite(qn, j, ctx) / (qpoch_finite(qa1, j, ctx) * qpoch_finite(q, j, ctx))
                * q.powf(jf * (jf - 1.0) / 2.0 + (n as f64 + alpha + 1.0) * jf)
        })
        .collect()
}

/// Moak's q-Laguerre polynomial
/// `L_n^{(α)}(x;q) = (q^{α+1};q)_n/(q;q)_n · _1φ_1(q^{-n}; q^{α+1}; q, -x q^{n+α+1})`.
pub fn q_laguerre(n: usize, alpha: f64, x: f64, ctx: &QContext) -> Result<SeriesValue> {
    q_laguerre_scaled(n, alpha, x, ctx).map(|s| s.to_series())
}

pub fn q_laguerre_scaled(n: usize, alpha: f64, x: f64, ctx: &QContext) -> Result<Scaled> {
    if !(alpha > -1.0) {
        return Err(QError::InvalidParameter(format!("alpha = {alpha} must exceed -1")));
    }
    let q = ctx.q;
    let qa1 = q.powf(alpha + 1.0);
    let spec = PhiSpec::new(
        &[q.powi(-(n as i32))],
        &[qa1],
        -x * q.powf(n as f64 + alpha + 1.0),
    );
    let pre = qpoch_finite(qa1, n, ctx) / qpoch_finite(q, n, ctx);
    Ok(phi_rs_scaled(&spec, ctx)?.scale(LogReal::from_f64(pre)))
}

/// `d/dx L_n^{(α)}(x;q)`, from the coefficient expansion.
pub fn q_laguerre_derivative(n: usize, alpha: f64, x: f64, ctx: &QContext) -> f64 {
    let coeffs = q_laguerre_coeffs(n, alpha, ctx);
    let mut acc = 0.0;
    for (j, a) in coeffs.iter().enumerate().skip(1).rev() {
        acc = acc * x + j as f64 * a;
    }
    acc
}

/// Which printed expression of `M_p^{(α;c)}` to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MForm {
    /// `(q^{α+1};q)_∞/(q, -cq^{α+1};q)_∞ · _1φ_1(-cq^{α-p}; q^{α+1}; q, xq^{p+1}/c)`.
    A,
    /// `(xq^{p+1}/c;q)_∞/(q, -cq^{α+1};q)_∞ · _1φ_1(-x; xq^{p+1}/c; q, q^{α+1})`,
    /// summed as an entire series so the lower parameter may sit on `q^{-m}`.
    B,
    /// Both forms; the better conditioned one is returned after an agreement check.
    Auto,
}

fn m_norm(spec: &MeasureSpec) -> Result<Scaled> {
    let q = spec.ctx.q;
    qpoch_multi_scaled(&[q, -spec.c * q.powf(spec.alpha + 1.0)], &spec.ctx)
}

fn m_form_a(p: i64, spec: &MeasureSpec, x: f64) -> Result<Scaled> {
    let ctx = &spec.ctx;
    let q = ctx.q;
    let qa1 = q.powf(spec.alpha + 1.0);
    let series = phi_rs_scaled(
        &PhiSpec::new(
            &[-spec.c * q.powf(spec.alpha - p as f64)],
            &[qa1],
            x * q.powf(p as f64 + 1.0) / spec.c,
        ),
        ctx,
    )?;
    Ok(series.mul(pinf(qa1, ctx)?).div(m_norm(spec)?))
}

fn m_form_b(p: i64, spec: &MeasureSpec, x: f64, lattice: Option<i64>) -> Result<Scaled> {
    let ctx = &spec.ctx;
    let q = ctx.q;
    let z = q.powf(spec.alpha + 1.0);
    let lower = match lattice {
        Some(k) => Lower::Lattice(k + p),
        None => Lower::Value(x * q.powf(p as f64 + 1.0) / spec.c),
    };
    Ok(weighted_1phi1_scaled(-x * z, z, lower, ctx)?.div(m_norm(spec)?))
}

/// `M_p^{(α;c)}(x;q)`.
pub fn m_func(p: i64, spec: &MeasureSpec, x: f64, form: MForm) -> Result<SeriesValue> {
    m_func_scaled(p, spec, x, form).map(|s| s.to_series())
}

pub fn m_func_scaled(p: i64, spec: &MeasureSpec, x: f64, form: MForm) -> Result<Scaled> {
    match form {
        MForm::A => m_form_a(p, spec, x),
        MForm::B => m_form_b(p, spec, x, None),
        MForm::Auto => best_of(
            vec![m_form_a(p, spec, x), m_form_b(p, spec, x, None)],
            &spec.ctx,
        ),
    }
}

/// `M_p^{(α;c)}(c q^k;q)` with the lattice index passed exactly.
pub fn m_func_lattice(p: i64, spec: &MeasureSpec, k: i64, form: MForm) -> Result<Scaled> {
    let x = spec.point(k);
    match form {
        MForm::A => m_form_a(p, spec, x),
        MForm::B => m_form_b(p, spec, x, Some(k)),
        MForm::Auto => best_of(
            vec![m_form_a(p, spec, x), m_form_b(p, spec, x, Some(k))],
            &spec.ctx,
        ),
    }
}

fn is_integer(a: f64) -> bool {
    a.fract() == 0.0
}

/// Jackson's second q-Bessel function
/// `(q^{α+1};q)_∞/(q;q)_∞ (x/2)^α _0φ_1(-; q^{α+1}; q, -q^{α+1}x²/4)`.
pub fn jackson_j2(alpha: f64, x: f64, ctx: &QContext) -> Result<SeriesValue> {
    jackson_j2_scaled(alpha, x, ctx).map(|s| s.to_series())
}

pub fn jackson_j2_scaled(alpha: f64, x: f64, ctx: &QContext) -> Result<Scaled> {
    if x < 0.0 && !is_integer(alpha) {
        return Err(QError::NegativeBaseFractionalPower {
            base: x / 2.0,
            exponent: alpha,
        });
    }
    let q = ctx.q;
    let qa1 = q.powf(alpha + 1.0);
    let series = phi_rs_scaled(&PhiSpec::new(&[], &[qa1], -qa1 * x * x / 4.0), ctx)?;
    let power = if is_integer(alpha) {
        LogReal::from_f64(x / 2.0).powi(alpha as i64)
    } else {
        LogReal::from_f64(x / 2.0)
            .powf(alpha)
            .expect("nonnegative base checked above")
    };
    Ok(series
        .mul(pinf(qa1, ctx)?)
        .div(pinf(q, ctx)?)
        .scale(power))
}

/// The three available expressions for the big q-Bessel function.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BesselForm {
    /// `_1φ_1(x^{-1}; q^{α+1}; q, -x q^{k+α+2}/c)`; needs `x ≠ 0`.
    Direct,
    /// `(-q^{k+1}/c;q)_∞ _2φ_1(q^{α+1}x, 0; q^{α+1}; q, -q^{k+1}/c)`; needs `q^{k+1} < c`.
    Heine,
    /// `(Z;q)_∞ _1φ_1(B; Z; q, q^{α+1}) / (q^{α+1};q)_∞` with `B = -q^{k+1}/c`
    /// and `Z = -x q^{k+α+2}/c`, summed as an entire series.
    Entire,
    Auto,
}

fn bessel_direct(alpha: f64, k: i64, c: f64, x: f64, ctx: &QContext) -> Result<Scaled> {
    if x == 0.0 {
        return Err(QError::InvalidParameter(
            "the direct big q-Bessel series needs x != 0".into(),
        ));
    }
    let q = ctx.q;
    phi_rs_scaled(
        &PhiSpec::new(
            &[1.0 / x],
            &[q.powf(alpha + 1.0)],
            -x * q.powf(k as f64 + alpha + 2.0) / c,
        ),
        ctx,
    )
}

fn bessel_heine(alpha: f64, k: i64, c: f64, x: f64, ctx: &QContext) -> Result<Scaled> {
    let q = ctx.q;
    let z = -q.powi((k + 1) as i32) / c;
    if z.abs() >= 1.0 {
        return Err(QError::DivergentSeries(format!(
            "_2phi_1 form needs q^(k+1)/c < 1, got {}",
            -z
        )));
    }
    let qa1 = q.powf(alpha + 1.0);
    let series = phi_rs_scaled(&PhiSpec::new(&[qa1 * x, 0.0], &[qa1], z), ctx)?;
    Ok(series.mul(pinf(z, ctx)?))
}

fn bessel_entire(alpha: f64, k: i64, c: f64, x: f64, lattice: Option<i64>, ctx: &QContext) -> Result<Scaled> {
    let q = ctx.q;
    let w = q.powf(alpha + 1.0);
    let b = -q.powi((k + 1) as i32) / c;
    let lower = match lattice {
        Some(p) => Lower::Lattice(k + p),
        None => Lower::Value(-x * q.powf(k as f64 + alpha + 2.0) / c),
    };
    Ok(weighted_1phi1_scaled(b * w, w, lower, ctx)?.div(pinf(w, ctx)?))
}

/// Big q-Bessel function `𝒥_{α,k}^c(x;q)`.
pub fn big_qbessel(alpha: f64, k: i64, c: f64, x: f64, ctx: &QContext) -> Result<SeriesValue> {
    big_qbessel_form(alpha, k, c, x, BesselForm::Auto, ctx).map(|s| s.to_series())
}

pub fn big_qbessel_form(
    alpha: f64,
    k: i64,
    c: f64,
    x: f64,
    form: BesselForm,
    ctx: &QContext,
) -> Result<Scaled> {
    if !(alpha > -1.0) || !(c > 0.0) {
        return Err(QError::InvalidParameter(
            "big q-Bessel needs alpha > -1 and c > 0".into(),
        ));
    }
    match form {
        BesselForm::Direct => bessel_direct(alpha, k, c, x, ctx),
        BesselForm::Heine => bessel_heine(alpha, k, c, x, ctx),
        BesselForm::Entire => bessel_entire(alpha, k, c, x, None, ctx),
        BesselForm::Auto => {
            let mut forms = vec![bessel_entire(alpha, k, c, x, None, ctx)];
            if x != 0.0 {
                forms.push(bessel_direct(alpha, k, c, x, ctx));
            }
            if ctx.q.powi((k + 1) as i32) < c {
                forms.push(bessel_heine(alpha, k, c, x, ctx));
            }
            best_of(forms, ctx)
        }
    }
}

/// `𝒥_{α,k}^c(-c q^{p-α-1};q)` with the lattice index passed exactly.
pub fn big_qbessel_lattice(alpha: f64, k: i64, c: f64, p: i64, ctx: &QContext) -> Result<Scaled> {
    let q = ctx.q;
    let x = -c * q.powf(p as f64 - alpha - 1.0);
    let mut forms = vec![bessel_entire(alpha, k, c, x, Some(p), ctx)];
    forms.push(bessel_direct(alpha, k, c, x, ctx));
    if q.powi((k + 1) as i32) < c {
        forms.push(bessel_heine(alpha, k, c, x, ctx));
    }
    best_of(forms, ctx)
}

/// Big q-Jacobi polynomial `_3φ_2(q^{-k}, abq^{k+1}, x; aq, -cq; q, q)`.
pub fn big_qjacobi(k: usize, params: &BigJacobiParams, x: f64, ctx: &QContext) -> Result<SeriesValue> {
    let q = ctx.q;
    let BigJacobiParams { a, b, c } = *params;
    let spec = PhiSpec::new(
        &[q.powi(-(k as i32)), a * b * q.powi(k as i32 + 1), x],
        &[a * q, -c * q],
        q,
    );
    let v = phi_rs_scaled(&spec, ctx)?.to_series();
    if v.cancellation > TILDE_EXACT_ABOVE {
        let e = if v.cancellation < DOUBLE_DOUBLE_BELOW {
            big_qjacobi_dd(k, [a, b, c], x, q)
        } else {
            big_qjacobi_exact(k, [a, b, c], x, q)
        };
        if let Some(e) = e {
            return Ok(SeriesValue {
                value: e,
                abs_err: f64::EPSILON * e.abs(),
                cancellation: 1.0,
                ..v
            });
        }
    }
    Ok(v)
}

/// Cancellation up to which double-double arithmetic still leaves about
/// 1e-18 relative accuracy.
const DOUBLE_DOUBLE_BELOW: f64 = 1e14;

/// The terminating `_3φ_2` behind [`big_qjacobi`] in double-double arithmetic.
/// Denominators are cleared first so that the only division, which twofloat
/// performs to a little better than binary64, comes last.
fn big_qjacobi_dd(k: usize, [a, b, c]: [f64; 3], x: f64, q: f64) -> Option<f64> {
    use twofloat::TwoFloat;
    let one = TwoFloat::from(1.0);
    let qd = TwoFloat::from(q);
    let qpow = |n: usize| (0..n).fold(one, |p, _| p * qd);
    let qk = qpow(k);
    let abqk = TwoFloat::from(a) * b * qpow(k + 1);
    let mut num = Vec::with_capacity(k);
    let mut den = Vec::with_capacity(k);
    let mut qj = one;
    for _ in 0..k {
        let qq = qd * qj;
        // (1 - q^{-k} q^j) is multiplied through by q^k.
        num.push((qk - qj) * (one - abqk * qj) * (one - qj * x) * qd);
        den.push(qk * (one - qq * a) * (one + qq * c) * (one - qq));
        qj = qq;
    }
    // Σ_j ∏_{i<j} num_i ∏_{i≥j} den_i over ∏ den_i.
    let mut total = TwoFloat::from(0.0);
    let mut head = one;
    for j in 0..=k {
        let tail = den[j..].iter().fold(one, |p, d| p * *d);
        total += head * tail;
        if j < k {
            head = head * num[j];
        }
    }
    let denom = den.iter().fold(one, |p, d| p * *d);
    let v = f64::from(total / denom);
    v.is_finite().then_some(v)
}

/// Exact rational sum of the terminating `_3φ_2` behind [`big_qjacobi`].
fn big_qjacobi_exact(k: usize, [a, b, c]: [f64; 3], x: f64, q: f64) -> Option<f64> {
    use num_rational::BigRational;
    use num_traits::{One, ToPrimitive, Zero};
    let r = |v: f64| BigRational::from_float(v);
    let (a, b, c, x, q) = (r(a)?, r(b)?, r(c)?, r(x)?, r(q)?);
    let one = BigRational::one();
    let qk = one.clone() / num_traits::pow(q.clone(), k);
    let abqk = &a * &b * num_traits::pow(q.clone(), k + 1);
    let mut sum = BigRational::zero();
    let mut term = one.clone();
    let mut qj = one.clone();
    for _ in 0..k {
        sum += &term;
        let qq = &q * &qj;
        let num = (&one - &qk * &qj) * (&one - &abqk * &qj) * (&one - &x * &qj) * &q;
        let den = (&one - &a * &qq) * (&one + &c * &qq) * (&one - &qq);
        term = term * num / den;
        qj = qq;
    }
    sum += term;
    sum.to_f64()
}

/// Cancellation index above which the big q-Jacobi evaluations re-sum exactly.
const TILDE_EXACT_ABOVE: f64 = 1e4;

/// `P̃_k(x; a, 0, -c; q) = _2φ_1(q^{-k}, aq/x; aq; q, -x/c)`, summed with
/// `(aq/x;q)_j (-x/c)^j = ∏_{i<j}(aq^{i+1} - x)/c` so that `x = 0` is allowed.
///
/// Inside the orthogonality interval the terms can exceed the value by many
/// orders of magnitude. The value is well conditioned in `(a, c, x, q)`, so
/// in that case the sum is redone in exact rational arithmetic on the
/// binary64 inputs.
pub fn big_qjacobi_tilde(k: usize, a: f64, c: f64, x: f64, ctx: &QContext) -> Result<SeriesValue> {
    let q = ctx.q;
    let qk = q.powi(-(k as i32));
    let mut acc = crate::sum::CompensatedSum::new();
    let mut term = 1.0;
    let mut qj = 1.0;
    acc.add(term);
    for _ in 0..k {
        term *= (1.0 - qk * qj) * (a * q * qj - x) / (c * (1.0 - a * q * qj) * (1.0 - q * qj));
        acc.add(term);
        qj *= q;
    }
    let n = acc.len();
    if acc.cancellation() > TILDE_EXACT_ABOVE && acc.abs_sum().is_finite() {
        if let Some(v) = tilde_exact(k, a, c, x, q) {
            return Ok(SeriesValue {
                value: v,
                abs_err: f64::EPSILON * v.abs(),
                n_terms: n,
                cancellation: 1.0,
            });
        }
    }
    Ok(SeriesValue {
        value: acc.value(),
        abs_err: f64::EPSILON * acc.abs_sum() * (2.0 + (n as f64).sqrt()),
        n_terms: n,
        cancellation: acc.cancellation(),
    })
}

fn tilde_exact(k: usize, a: f64, c: f64, x: f64, q: f64) -> Option<f64> {
    use num_rational::BigRational;
    use num_traits::{One, ToPrimitive, Zero};
    let r = |v: f64| BigRational::from_float(v);
    let (a, c, x, q) = (r(a)?, r(c)?, r(x)?, r(q)?);
    let one = BigRational::one();
    let qk = one.clone() / num_traits::pow(q.clone(), k);
    let mut sum = BigRational::zero();
    let mut term = one.clone();
    let mut qj = one.clone();
    for _ in 0..k {
        sum += &term;
        let qq = &q * &qj;
        term = term * (&one - &qk * &qj) * (&a * &qq - &x) / (&c * (&one - &a * &qq) * (&one - &qq));
        qj = qq;
    }
    sum += term;
    sum.to_f64()
}

/// Both sides of `P̃_k = (-q^{-k}/c;q)_k · P_k(x; a, 0, -c; q)`.
pub fn big_qjacobi_tilde_scaling(k: usize, a: f64, c: f64, x: f64, ctx: &QContext) -> Result<(f64, f64)> {
    let q = ctx.q;
    let lhs = big_qjacobi_tilde(k, a, c, x, ctx)?.value;
    let p = big_qjacobi(k, &BigJacobiParams { a, b: 0.0, c }, x, ctx)?.value;
    let rhs = qpoch_finite(-q.powi(-(k as i32)) / c, k, ctx) * p;
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> QContext {
        QContext::default()
    }

    fn spec() -> MeasureSpec {
        MeasureSpec::new(0.25, 2.0, ctx()).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn laguerre_examples() {
        assert_eq!(q_laguerre(0, 0.4, 3.7, &ctx()).unwrap().value, 1.0);
        assert!((q_laguerre(1, 0.0, 0.0, &ctx()).unwrap().value - 1.0).abs() < 1e-15);
        // Three-term explicit sum.
        let q: f64 = 0.5;
        let (a, x) = (0.25f64, 1.3f64);
        let qa1 = q.powf(a + 1.0);
        let pre = (1.0 - qa1) * (1.0 - qa1 * q) / ((1.0 - q) * (1.0 - q * q));
        let z = -x * q.powf(3.0 + a);
        let t1 = (1.0 - q.powi(-2)) / ((1.0 - qa1) * (1.0 - q)) * (-z);
        let t2 = (1.0 - q.powi(-2)) * (1.0 - q.powi(-1))
            / ((1.0 - qa1) * (1.0 - qa1 * q) * (1.0 - q) * (1.0 - q * q))
            * q
            * z
            * z;
        let o = pre * (1.0 + t1 + t2);
        assert!(rel(q_laguerre(2, a, x, &ctx()).unwrap().value, o) < 1e-14);
    }

    #[test]
    fn laguerre_coefficients_reproduce_values() {
        for n in 0..6 {
            let co = q_laguerre_coeffs(n, 0.25, &ctx());
            let x = 0.77;
            let v: f64 = co.iter().rev().fold(0.0, |acc, a| acc * x + a);
            assert!(rel(v, q_laguerre(n, 0.25, x, &ctx()).unwrap().value) < 1e-13);
        }
    }

    #[test]
    fn m_forms_agree_on_lattice_point() {
        let s = spec();
        let x = 2.0 * 0.5f64.powi(3);
        let a = m_func(1, &s, x, MForm::A).unwrap().value;
        let b = m_func(1, &s, x, MForm::B).unwrap().value;
        assert!(rel(a, b) < 1e-12);
        let l = m_func_lattice(1, &s, 3, MForm::Auto).unwrap().value.to_f64();
        assert!(rel(l, a) < 1e-12);
    }

    #[test]
    fn m_decay_direction_towards_minus_infinity() {
        // |q^{p-α}/c| = 2.38 for p = -2: geometric decay with that ratio.
        let s = spec();
        let mut prev = f64::INFINITY;
        for k in (-15..=-6).rev() {
            let v = m_func_lattice(-2, &s, k, MForm::Auto).unwrap().value.to_f64().abs();
            assert!(v < prev);
            prev = v;
        }
        assert!(prev < 1e-5);
        // |q^{p-α}/c| = 0.59 for p = 0: the values grow instead.
        let a = m_func_lattice(0, &s, -10, MForm::Auto).unwrap().value.to_f64().abs();
        let b = m_func_lattice(0, &s, -15, MForm::Auto).unwrap().value.to_f64().abs();
        assert!(b > 10.0 * a);
    }

    #[test]
    fn j2_examples() {
        assert!((jackson_j2(0.0, 0.0, &ctx()).unwrap().value - 1.0).abs() < 1e-15);
        // Brute force _0φ_1 oracle.
        let q: f64 = 0.5;
        let (a, x) = (0.25f64, 0.8f64);
        let qa1 = q.powf(a + 1.0);
        let z = -qa1 * x * x / 4.0;
        let mut s = 0.0;
        for j in 0..40 {
            let jf = j as f64;
            s += q.powf(jf * (jf - 1.0)) * z.powi(j)
                / (qpoch_finite(qa1, j as usize, &ctx()) * qpoch_finite(q, j as usize, &ctx()));
        }
        let pre = qpoch_inf_scaled(qa1, &ctx()).unwrap().value.to_f64()
            / qpoch_inf_scaled(q, &ctx()).unwrap().value.to_f64();
        let o = pre * (x / 2.0).powf(a) * s;
        assert!(rel(jackson_j2(a, x, &ctx()).unwrap().value, o) < 1e-14);
        assert!(matches!(
            jackson_j2(0.25, -1.0, &ctx()),
            Err(QError::NegativeBaseFractionalPower { .. })
        ));
    }

    #[test]
    fn bessel_forms_agree() {
        let c = ctx();
        for &(k, x) in &[(1, 0.3), (0, 1.0), (-2, 0.125), (3, -0.7)] {
            let d = big_qbessel_form(0.25, k, 2.0, x, BesselForm::Direct, &c).unwrap();
            let e = big_qbessel_form(0.25, k, 2.0, x, BesselForm::Entire, &c).unwrap();
            assert!(d.value.rel_diff(e.value) < 1e-12, "{k} {x}");
        }
        let h = big_qbessel_form(0.25, 1, 2.0, 0.0, BesselForm::Heine, &c).unwrap();
        let e = big_qbessel_form(0.25, 1, 2.0, 0.0, BesselForm::Entire, &c).unwrap();
        assert!(h.value.rel_diff(e.value) < 1e-13);
    }

    #[test]
    fn bessel_at_zero_matches_series_oracle() {
        // (-q^{k+1}/c)_∞ Σ_j (0;q)_j... reduces to Σ (q^{α+1}·0)_j/((q^{α+1})_j (q)_j) z^j.
        let c = ctx();
        let q: f64 = 0.5;
        let k = 1;
        let z = -q.powi(k + 1) / 2.0;
        let qa1 = q.powf(1.25);
        let mut s = 0.0;
        for j in 0..60 {
            s += z.powi(j) / (qpoch_finite(qa1, j as usize, &c) * qpoch_finite(q, j as usize, &c));
        }
        let o = qpoch_inf_scaled(z, &c).unwrap().value.to_f64() * s;
        let v = big_qbessel(0.25, k as i64, 2.0, 0.0, &c).unwrap().value;
        assert!(rel(v, o) < 1e-14);
    }

    #[test]
    fn jacobi_examples() {
        let c = ctx();
        let p = BigJacobiParams::new(0.5, 0.2, 1.0, &c).unwrap();
        assert_eq!(big_qjacobi(0, &p, 0.3, &c).unwrap().value, 1.0);
        let q: f64 = 0.5;
        let o = 1.0
            + (1.0 - 1.0 / q) * (1.0 - 0.5 * 0.2 * q * q) * (1.0 - 0.3) * q
                / ((1.0 - 0.5 * q) * (1.0 + q) * (1.0 - q));
        assert!(rel(big_qjacobi(1, &p, 0.3, &c).unwrap().value, o) < 1e-14);
    }

    #[test]
    fn tilde_examples() {
        let c = ctx();
        assert_eq!(big_qjacobi_tilde(0, 0.5, 1.2, 0.7, &c).unwrap().value, 1.0);
        let (l, r) = big_qjacobi_tilde_scaling(3, 0.5, 1.2, 0.7, &c).unwrap();
        assert!(rel(l, r) < 1e-12);
        assert_eq!(big_qjacobi_tilde(4, 0.5, 1.2, 0.25, &c).unwrap().value, 1.0);
    }

    #[test]
    fn big_qjacobi_double_double_matches_exact() {
        let q: f64 = 0.5;
        for (a, b, c) in [(q.powf(0.25), 0.0, 2.0), (0.7, 0.4, 1.5)] {
            for k in [3, 6] {
                for n in 0..10 {
                    for x in [a * q.powi(n + 1), -c * q.powi(n + 1), 0.3] {
                        let d = big_qjacobi_dd(k, [a, b, c], x, q).unwrap();
                        let e = big_qjacobi_exact(k, [a, b, c], x, q).unwrap();
                        assert!(rel(d, e) < 1e-15, "k={k} x={x}: {d} vs {e}");
                    }
                }
            }
        }
    }

    #[test]
    fn big_qjacobi_high_degree_against_exact() {
        let q: f64 = 0.5;
        for p in [
            BigJacobiParams { a: q.powf(0.25), b: 0.0, c: 2.0 },
            BigJacobiParams { a: 0.7, b: 0.4, c: 1.5 },
        ] {
            for k in [6, 9, 12] {
                for n in 0..10 {
                    for x in [p.a * q.powi(n + 1), -p.c * q.powi(n + 1)] {
                        let v = big_qjacobi(k, &p, x, &ctx()).unwrap().value;
                        let e = big_qjacobi_exact(k, [p.a, p.b, p.c], x, q).unwrap();
                        assert!(rel(v, e) < 1e-14, "k={k} x={x}: {v} vs {e}");
                    }
                }
            }
        }
    }
}
