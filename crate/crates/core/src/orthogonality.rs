//! The discrete measure on `{c q^k : k ∈ Z}`, its orthogonality relations
//! for q-Laguerre polynomials and M-functions, dual orthogonality, the
//! Christoffel–Darboux kernel, Berg-type perturbations and generating
//! function identities.

use std::collections::BTreeMap;

use crate::bilateral::{adaptive_sum, LatticeSum, SumWindow};
use crate::error::{QError, Result};
use crate::families::{m_func_lattice, q_laguerre_derivative, q_laguerre_scaled, MForm, MeasureSpec};
use crate::logreal::LogReal;
use crate::qseries::{
    qpoch_finite, qpoch_finite_scaled, qpoch_inf_scaled, qpoch_multi_scaled, weighted_1phi1_scaled,
    Lower, QContext,
};
use crate::spectral::{eta_norm, v_sol_at, xi_norm, OperatorSpec, SpectralPoint};
use crate::sum::{CompensatedSum, ScaledSum};
use serde::Serialize;

/// Pass criterion of a [`VerificationReport`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tolerance {
    /// Bound on `|computed - predicted| / |predicted|`.
    pub rtol: f64,
    /// Bound on `|computed - predicted| / scale`, used for zero targets.
    pub atol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { rtol: 1e-9, atol: 1e-10 }
    }
}

/// Outcome of comparing a computed quantity with its predicted value.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub name: String,
    pub params: BTreeMap<String, f64>,
    pub computed: f64,
    pub predicted: f64,
    pub abs_err: f64,
    pub rel_err: f64,
    /// Magnitude against which `atol` is applied.
    pub scale: f64,
    pub cancellation: f64,
    pub pass: bool,
    /// Lattice indices actually summed, when a lattice sum was involved.
    #[serde(skip)]
    pub truncation_window: Option<(i64, i64)>,
    /// Why the check could not be evaluated.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl VerificationReport {
    pub fn new(
        check: &str,
        params: &[(&str, f64)],
        computed: f64,
        predicted: f64,
        scale: f64,
        tol: Tolerance,
    ) -> Self {
        let abs_err = (computed - predicted).abs();
        let rel_err = if predicted != 0.0 {
            abs_err / predicted.abs()
        } else if abs_err == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        let pass = if predicted != 0.0 {
            rel_err <= tol.rtol
        } else {
            abs_err <= tol.atol * scale
        };
        VerificationReport {
            name: check.to_string(),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            computed,
            predicted,
            abs_err,
            rel_err,
            scale,
            cancellation: 1.0,
            pass,
            truncation_window: None,
            error: None,
        }
    }

    /// One-sided check `computed ≤ bound`; tolerances do not apply.
    pub fn upper_bound(check: &str, params: &[(&str, f64)], computed: f64, bound: f64) -> Self {
        let abs_err = (computed - bound).max(0.0);
        VerificationReport {
            name: check.to_string(),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            computed,
            predicted: bound,
            abs_err,
            rel_err: if bound != 0.0 { abs_err / bound.abs() } else { abs_err },
            scale: bound.abs(),
            cancellation: 1.0,
            pass: computed <= bound,
            truncation_window: None,
            error: None,
        }
    }

    /// A check that could not be evaluated.
    pub fn failed(check: &str, params: &[(&str, f64)], err: &QError) -> Self {
        VerificationReport {
            name: check.to_string(),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            computed: f64::NAN,
            predicted: f64::NAN,
            abs_err: f64::NAN,
            rel_err: f64::NAN,
            scale: f64::NAN,
            cancellation: f64::NAN,
            pass: false,
            truncation_window: None,
            error: Some(err.to_string()),
        }
    }

    pub(crate) fn with_sum(mut self, s: &LatticeSum) -> Self {
        self.cancellation = s.sum.cancellation;
        self.truncation_window = Some(s.window);
        self
    }
}

/// Mass `q^{k(α+1)}/(-cq^k;q)_∞` at `c q^k`.
pub fn weight(spec: &MeasureSpec, k: i64) -> Result<LogReal> {
    let ctx = &spec.ctx;
    let p = qpoch_inf_scaled(-spec.point(k), ctx)?.value;
    Ok(ctx.pow_scaled(k as f64 * (spec.alpha + 1.0)) / p)
}

/// `𝓛(fg) = Σ_k weight(k) f(cq^k) g(cq^k)`, with `f` and `g` given on lattice indices.
pub fn functional_l<F, G>(spec: &MeasureSpec, mut f: F, mut g: G) -> Result<LatticeSum>
where
    F: FnMut(i64) -> Result<LogReal>,
    G: FnMut(i64) -> Result<LogReal>,
{
    adaptive_sum(
        |k| Ok(weight(spec, k)? * f(k)? * g(k)?),
        None,
        SumWindow::default(),
        &spec.ctx,
    )
}

/// `k ↦ L_n^{(α)}(cq^k;q)`.
pub fn laguerre_fn(spec: &MeasureSpec, n: usize) -> impl Fn(i64) -> Result<LogReal> + '_ {
    move |k| Ok(q_laguerre_scaled(n, spec.alpha, spec.point(k), &spec.ctx)?.value)
}

/// `k ↦ M_p^{(α;c)}(cq^k;q)`.
pub fn m_fn(spec: &MeasureSpec, p: i64) -> impl Fn(i64) -> Result<LogReal> + '_ {
    move |k| Ok(m_func_lattice(p, spec, k, MForm::Auto)?.value)
}

/// `k ↦ (cq^k)^m`.
pub fn monomial_fn(spec: &MeasureSpec, m: u32) -> impl Fn(i64) -> Result<LogReal> + '_ {
    move |k| Ok(LogReal::from_f64(spec.c).powi(m as i64) * spec.ctx.pow_scaled((k * m as i64) as f64))
}

/// `𝓛(L_p L_p)`.
pub fn laguerre_diag(spec: &MeasureSpec, p: usize) -> Result<f64> {
    let ctx = &spec.ctx;
    let q = ctx.q;
    let (a, c) = (spec.alpha, spec.c);
    let qa1 = q.powf(a + 1.0);
    let num = qpoch_multi_scaled(&[q, -c * qa1, -q.powf(-a) / c], ctx)?.value;
    let den = qpoch_multi_scaled(&[qa1, -c, -q / c], ctx)?.value;
    let v = num / den * qpoch_finite_scaled(qa1, p, ctx) / qpoch_finite_scaled(q, p, ctx)
        * ctx.pow_scaled(-(p as f64));
    Ok(v.to_f64())
}

/// `𝓛(M_p M_p)`.
pub fn m_diag(spec: &MeasureSpec, p: i64) -> Result<f64> {
    let ctx = &spec.ctx;
    let q = ctx.q;
    let (a, c) = (spec.alpha, spec.c);
    let qp1 = q.powi((p + 1) as i32);
    let num = qpoch_multi_scaled(&[-qp1 / c, -q.powf(-a) / c], ctx)?.value;
    let den = qpoch_multi_scaled(&[-qp1 * q.powf(-a) / c, -c * q.powf(a + 1.0), -c, -q / c], ctx)?.value;
    Ok((num / den * ctx.pow_scaled(a - p as f64) * c).to_f64())
}

fn check_nonneg(n: i64, what: &str) -> Result<usize> {
    usize::try_from(n).map_err(|_| QError::InvalidParameter(format!("{what} = {n} must be nonnegative")))
}

/// `𝓛(L_n L_p)` against `δ_{n,p}` times [`laguerre_diag`].
pub fn laguerre_gram(spec: &MeasureSpec, n: i64, p: i64, tol: Tolerance) -> Result<VerificationReport> {
    let (nu, pu) = (check_nonneg(n, "n")?, check_nonneg(p, "p")?);
    let s = functional_l(spec, laguerre_fn(spec, nu), laguerre_fn(spec, pu))?;
    let dn = laguerre_diag(spec, nu)?;
    let dp = laguerre_diag(spec, pu)?;
    let predicted = if n == p { dp } else { 0.0 };
    Ok(VerificationReport::new(
        "laguerre_gram",
        &[("n", n as f64), ("p", p as f64)],
        s.sum.value.to_f64(),
        predicted,
        (dn * dp).sqrt(),
        tol,
    )
    .with_sum(&s))
}

/// `𝓛(M_p M_r)` against `δ_{p,r}` times [`m_diag`].
pub fn m_gram(spec: &MeasureSpec, p: i64, r: i64, tol: Tolerance) -> Result<VerificationReport> {
    let s = functional_l(spec, m_fn(spec, p), m_fn(spec, r))?;
    let dp = m_diag(spec, p)?;
    let dr = m_diag(spec, r)?;
    let predicted = if p == r { dp } else { 0.0 };
    Ok(VerificationReport::new(
        "m_gram",
        &[("p", p as f64), ("r", r as f64)],
        s.sum.value.to_f64(),
        predicted,
        (dp * dr).sqrt(),
        tol,
    )
    .with_sum(&s))
}

/// `𝓛(M_p L_n) = 0`, judged against `√(𝓛(M_p²) 𝓛(L_n²))`.
pub fn cross_gram(spec: &MeasureSpec, p: i64, n: i64, tol: Tolerance) -> Result<VerificationReport> {
    let nu = check_nonneg(n, "n")?;
    let s = functional_l(spec, m_fn(spec, p), laguerre_fn(spec, nu))?;
    let scale = (m_diag(spec, p)? * laguerre_diag(spec, nu)?).sqrt();
    Ok(VerificationReport::new(
        "cross_gram",
        &[("p", p as f64), ("n", n as f64)],
        s.sum.value.to_f64(),
        0.0,
        scale,
        tol,
    )
    .with_sum(&s))
}

/// `𝓛(M_r x^m) = 0`, judged against `√(𝓛(M_r²) 𝓛(x^{2m}))`.
pub fn monomial_orth(spec: &MeasureSpec, r: i64, m: u32, tol: Tolerance) -> Result<VerificationReport> {
    let s = functional_l(spec, m_fn(spec, r), monomial_fn(spec, m))?;
    let xx = functional_l(spec, monomial_fn(spec, m), monomial_fn(spec, m))?;
    let scale = (m_diag(spec, r)? * xx.sum.value.to_f64()).sqrt();
    Ok(VerificationReport::new(
        "monomial_orth",
        &[("r", r as f64), ("m", m as f64)],
        s.sum.value.to_f64(),
        0.0,
        scale,
        tol,
    )
    .with_sum(&s))
}

/// The three members of the q-Hankel / Hansen–Lommel double equality.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HankelIdentity {
    /// Sum with the `_1φ_1(-cq^{α-p}; q^{α+1}; q, q^{p+k+1})` factors.
    pub lhs1: f64,
    /// Closed form.
    pub mid: f64,
    /// Sum with the `(q^{k+p+1};q)_∞ _1φ_1(-cq^k; q^{k+p+1}; q, q^{α+1})` factors.
    pub lhs2: f64,
    /// Lattice points where the first form was too ill-conditioned in
    /// binary64 and the second form was used for that term instead.
    pub lhs1_fallbacks: usize,
}

pub fn hankel_identity(spec: &MeasureSpec, p: i64, r: i64) -> Result<HankelIdentity> {
    let ctx = &spec.ctx;
    let q = ctx.q;
    let norm = qpoch_inf_scaled(-spec.c * q.powf(spec.alpha + 1.0), ctx)?.value;
    let norm2 = norm * norm;
    let mut fallbacks = 0;
    let mut form_a = |p: i64, k: i64| -> Result<LogReal> {
        let a = m_func_lattice(p, spec, k, MForm::A)?;
        if a.is_reliable() {
            Ok(a.value)
        } else {
            fallbacks += 1;
            Ok(m_func_lattice(p, spec, k, MForm::B)?.value)
        }
    };
    let s1 = adaptive_sum(
        |k| Ok(weight(spec, k)? * form_a(p, k)? * form_a(r, k)? * norm2),
        None,
        SumWindow::default(),
        ctx,
    )?;
    let s2 = adaptive_sum(
        |k| {
            Ok(weight(spec, k)?
                * m_func_lattice(p, spec, k, MForm::B)?.value
                * m_func_lattice(r, spec, k, MForm::B)?.value
                * norm2)
        },
        None,
        SumWindow::default(),
        ctx,
    )?;
    let mid = if p == r {
        m_diag(spec, p)? * norm2.to_f64()
    } else {
        0.0
    };
    Ok(HankelIdentity {
        lhs1: s1.sum.value.to_f64(),
        mid,
        lhs2: s2.sum.value.to_f64(),
        lhs1_fallbacks: fallbacks,
    })
}

/// `Σ_{p≥0} V_k(η_p)V_l(η_p)/‖V(η_p)‖² + Σ_{p∈Z} V_k(ξ_p)V_l(ξ_p)/‖V(ξ_p)‖²`
/// with `V = V^{1/t}`, against `δ_{k,l}`.
pub fn dual_orthogonality(op: &OperatorSpec, k: i64, l: i64, tol: Tolerance) -> Result<VerificationReport> {
    let s = 1.0 / op.t;
    let eta = adaptive_sum(
        |p| {
            let pt = SpectralPoint::eta(op, p)?;
            Ok(v_sol_at(op, s, k, &pt)?.value * v_sol_at(op, s, l, &pt)?.value / eta_norm(op, p)?)
        },
        Some(0),
        SumWindow::default(),
        &op.ctx,
    )?;
    let xi = adaptive_sum(
        |p| {
            let pt = SpectralPoint::xi(op, p);
            Ok(v_sol_at(op, s, k, &pt)?.value * v_sol_at(op, s, l, &pt)?.value / xi_norm(op, p)?)
        },
        None,
        SumWindow::default(),
        &op.ctx,
    )?;
    let total = ScaledSum::of(&[eta.sum.value, xi.sum.value]);
    let predicted = if k == l { 1.0 } else { 0.0 };
    let mut r = VerificationReport::new(
        "dual_orthogonality",
        &[("k", k as f64), ("l", l as f64)],
        total.value().to_f64(),
        predicted,
        1.0,
        tol,
    )
    .with_sum(&xi);
    r.cancellation = eta.sum.cancellation.max(xi.sum.cancellation);
    Ok(r)
}

/// `Σ_j q^{j(j-1)} (-q^{a+1}X)^j / ((q^{a+1};q)_j (q;q)_j)` and its
/// derivative in `X`; `_0φ_1(-; q^{a+1}; q, -q^{a+1}X)`.
fn bessel_entire(a: f64, x: f64, ctx: &QContext) -> Result<(f64, f64)> {
    let q = ctx.q;
    let b = q.powf(a + 1.0);
    let mut val = CompensatedSum::new();
    let mut der = CompensatedSum::new();
    // coefficient c_j, without the power of X
    let mut cj = 1.0;
    let mut xp = 1.0;
    val.add(1.0);
    let mut small = 0;
    for j in 1..ctx.max_terms {
        let jm = (j - 1) as f64;
        cj *= q.powf(2.0 * jm) * (-b) / ((1.0 - b * q.powf(jm)) * (1.0 - q.powf(jm + 1.0)));
        let d = j as f64 * cj * xp;
        xp *= x;
        let v = cj * xp;
        val.add(v);
        der.add(d);
        if v.abs() <= ctx.eps_term * val.abs_sum() && d.abs() <= ctx.eps_term * der.abs_sum() {
            small += 1;
            if small >= 3 {
                return Ok((val.value(), der.value()));
            }
        } else {
            small = 0;
        }
    }
    Err(QError::TruncationCapExceeded {
        what: "bessel_entire".into(),
        cap: ctx.max_terms,
    })
}

/// `(X F_{α+1}(X) F_α(Y) - Y F_{α+1}(Y) F_α(X)) / (X - Y)`, continued
/// analytically to `X = Y`.
fn bessel_kernel(alpha: f64, x: f64, y: f64, ctx: &QContext) -> Result<f64> {
    let (f1x, d1x) = bessel_entire(alpha + 1.0, x, ctx)?;
    let (f0x, d0x) = bessel_entire(alpha, x, ctx)?;
    if x == y {
        return Ok(f1x * f0x + x * (d1x * f0x - f1x * d0x));
    }
    let (f1y, _) = bessel_entire(alpha + 1.0, y, ctx)?;
    let (f0y, _) = bessel_entire(alpha, y, ctx)?;
    Ok((x * f1x * f0y - y * f1y * f0x) / (x - y))
}

/// The three members of the Christoffel–Darboux / Poisson kernel relation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CdKernel {
    /// `Σ_{p=0}^N q^p (q;q)_p/(q^{α+1};q)_p L_p(x) L_p(y)`.
    pub partial_sum: f64,
    /// `(q;q)_N/(q^{α+1};q)_N (x L_N^{(α+1)}(x) L_N(y) - y L_N^{(α+1)}(y) L_N(x))/(x - y)`.
    pub cd_form: f64,
    /// The `N → ∞` limit in terms of Jackson's second q-Bessel function.
    pub bessel_limit: f64,
}

/// At `x = y` the quotients are replaced by their derivative limits,
/// computed from the explicit power series.
pub fn cd_kernel(spec: &MeasureSpec, n: usize, x: f64, y: f64) -> Result<CdKernel> {
    let ctx = &spec.ctx;
    let q = ctx.q;
    let a = spec.alpha;
    let qa1 = q.powf(a + 1.0);
    let lag = |m: usize, al: f64, v: f64| -> Result<f64> { Ok(q_laguerre_scaled(m, al, v, ctx)?.value.to_f64()) };
    let mut ps = CompensatedSum::new();
    for p in 0..=n {
        let f = q.powi(p as i32) * qpoch_finite(q, p, ctx) / qpoch_finite(qa1, p, ctx);
        ps.add(f * lag(p, a, x)? * lag(p, a, y)?);
    }
    let pre = qpoch_finite(q, n, ctx) / qpoch_finite(qa1, n, ctx);
    let l1x = lag(n, a + 1.0, x)?;
    let l0x = lag(n, a, x)?;
    let cd = if x == y {
        let d1 = q_laguerre_derivative(n, a + 1.0, x, ctx);
        let d0 = q_laguerre_derivative(n, a, x, ctx);
        pre * (l1x * l0x + x * (d1 * l0x - l1x * d0))
    } else {
        let l1y = lag(n, a + 1.0, y)?;
        let l0y = lag(n, a, y)?;
        pre * (x * l1x * l0y - y * l1y * l0x) / (x - y)
    };
    // (q;q)_∞/(q^{α+1};q)_∞ times the two Jackson prefactors leaves (q^{α+2};q)_∞/(q;q)_∞.
    let cp = (qpoch_inf_scaled(q * qa1, ctx)?.value / qpoch_inf_scaled(q, ctx)?.value).to_f64();
    Ok(CdKernel {
        partial_sum: ps.value(),
        cd_form: cd,
        bessel_limit: cp * bessel_kernel(a, x, y, ctx)?,
    })
}

/// Both sides of the orthogonality relation obtained by summing the
/// Poisson kernel and the `ξ_p` part of the dual relations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CorollarySides {
    pub lhs: f64,
    /// Jackson q-Bessel product term.
    pub bessel_term: f64,
    /// Bilateral sum over `p` of the M-function products.
    pub m_sum: f64,
    pub rhs: f64,
}

/// Diagonal value `c q^{-k} (-cq^k;q)_∞ (-cq^{α+1}, -q^{-α}/c;q)_∞ / (-c, -q/c;q)_∞`
/// of the relation checked by [`corollary_sides`].
pub fn corollary_diag(spec: &MeasureSpec, k: i64) -> Result<f64> {
    let ctx = &spec.ctx;
    let q = ctx.q;
    let (a, c) = (spec.alpha, spec.c);
    let v = qpoch_inf_scaled(-spec.point(k), ctx)?.value
        * qpoch_multi_scaled(&[-c * q.powf(a + 1.0), -q.powf(-a) / c], ctx)?.value
        / qpoch_multi_scaled(&[-c, -q / c], ctx)?.value
        * ctx.pow_scaled(-(k as f64))
        * c;
    Ok(v.to_f64())
}

pub fn corollary_sides(spec: &MeasureSpec, k: i64, l: i64) -> Result<CorollarySides> {
    let ctx = &spec.ctx;
    let q = ctx.q;
    let (a, c) = (spec.alpha, spec.c);
    let norm = qpoch_inf_scaled(-c * q.powf(a + 1.0), ctx)?.value;
    let lhs = if k == l { corollary_diag(spec, k)? } else { 0.0 };
    let c0 = (qpoch_inf_scaled(q.powf(a + 1.0), ctx)?.value / qpoch_inf_scaled(q, ctx)?.value).to_f64();
    let cp = (qpoch_inf_scaled(q.powf(a + 2.0), ctx)?.value / qpoch_inf_scaled(q, ctx)?.value).to_f64();
    let bessel_term = c * cp * c0 * q.powf(a * (k + l) as f64 / 2.0)
        * bessel_kernel(a, spec.point(k), spec.point(l), ctx)?;
    let s = adaptive_sum(
        |p| {
            let qp1 = q.powi((p + 1) as i32);
            let r = qpoch_inf_scaled(-qp1 * q.powf(-a) / c, ctx)?.value / qpoch_inf_scaled(-qp1 / c, ctx)?.value;
            Ok(r * ctx.pow_scaled(p as f64)
                * m_func_lattice(p, spec, k, MForm::Auto)?.value
                * m_func_lattice(p, spec, l, MForm::Auto)?.value
                * norm
                * norm)
        },
        None,
        SumWindow::default(),
        ctx,
    )?;
    let m_sum = (s.sum.value * ctx.pow_scaled(a * ((k + l) as f64 / 2.0 - 1.0))).to_f64();
    Ok(CorollarySides {
        lhs,
        bessel_term,
        m_sum,
        rhs: bessel_term + m_sum,
    })
}

/// [`corollary_sides`] as a report; zero targets are judged against the
/// larger of the two right-hand terms.
pub fn corollary_check(spec: &MeasureSpec, k: i64, l: i64, tol: Tolerance) -> Result<VerificationReport> {
    let s = corollary_sides(spec, k, l)?;
    let scale = s.bessel_term.abs().max(s.m_sum.abs()).max(s.lhs.abs());
    Ok(VerificationReport::new(
        "corollary",
        &[("k", k as f64), ("l", l as f64)],
        s.rhs,
        s.lhs,
        scale,
        tol,
    ))
}

/// Whether `M_p^{(α;c)}(cq^k;q)` is bounded on the whole lattice, which
/// holds exactly when `|q^{p-α}/c| > 1`.
pub fn berg_admissible(spec: &MeasureSpec, p: i64) -> bool {
    (spec.ctx.q.powf(p as f64 - spec.alpha) / spec.c).abs() > 1.0
}

/// Half-width of the window over which the bound `K` is taken.
pub const BERG_WINDOW: i64 = 60;
/// Safety factor applied to the window supremum.
pub const BERG_SAFETY: f64 = 1.05;

/// `K = 1.05 · max_{|k| ≤ 60} |M_p(cq^k;q)|`.
pub fn berg_bound(spec: &MeasureSpec, p: i64) -> Result<f64> {
    let mut k_max: f64 = 0.0;
    for k in -BERG_WINDOW..=BERG_WINDOW {
        k_max = k_max.max(m_func_lattice(p, spec, k, MForm::Auto)?.value.to_f64().abs());
    }
    Ok(BERG_SAFETY * k_max)
}

/// Laguerre Gram entry `(n, m)` under the masses
/// `(1 + s K^{-1} M_p(cq^k;q)) q^{k(α+1)}/(-cq^k;q)_∞`, against the
/// unperturbed value. Fails if any mass actually used is negative.
pub fn berg_perturbed_gram(
    spec: &MeasureSpec,
    s: f64,
    p: i64,
    n: i64,
    m: i64,
    tol: Tolerance,
) -> Result<VerificationReport> {
    if !(-1.0..=1.0).contains(&s) {
        return Err(QError::InvalidParameter(format!("s = {s} must lie in [-1, 1]")));
    }
    if !berg_admissible(spec, p) {
        return Err(QError::InvalidParameter(format!(
            "M_{p} is unbounded on the lattice (needs |q^(p-alpha)/c| > 1)"
        )));
    }
    let (nu, mu) = (check_nonneg(n, "n")?, check_nonneg(m, "m")?);
    let k_bound = berg_bound(spec, p)?;
    let ln = laguerre_fn(spec, nu);
    let lm = laguerre_fn(spec, mu);
    let mut min_factor = f64::INFINITY;
    let sum = adaptive_sum(
        |k| {
            let f = 1.0 + s * m_func_lattice(p, spec, k, MForm::Auto)?.value.to_f64() / k_bound;
            if f < 0.0 {
                return Err(QError::InvalidParameter(format!(
                    "negative perturbed mass at k = {k} (factor {f})"
                )));
            }
            min_factor = min_factor.min(f);
            Ok(weight(spec, k)? * f * ln(k)? * lm(k)?)
        },
        None,
        SumWindow::default(),
        &spec.ctx,
    )?;
    let dn = laguerre_diag(spec, nu)?;
    let dm = laguerre_diag(spec, mu)?;
    let predicted = if n == m { dn } else { 0.0 };
    let mut r = VerificationReport::new(
        "berg_perturbed_gram",
        &[
            ("s", s),
            ("p", p as f64),
            ("n", n as f64),
            ("m", m as f64),
            ("K", k_bound),
            ("min_mass_factor", min_factor),
        ],
        sum.sum.value.to_f64(),
        predicted,
        (dn * dm).sqrt(),
        tol,
    )
    .with_sum(&sum);
    r.pass &= min_factor >= 0.0;
    Ok(r)
}

/// `1/(A;q)_∞`, with a pole error when `A = q^{-n}`.
fn inv_qpoch_inf(a: f64, ctx: &QContext) -> Result<LogReal> {
    let p = qpoch_inf_scaled(a, ctx)?.value;
    if p.is_zero() {
        return Err(QError::PoleInLowerParameter {
            value: a,
            m: crate::qseries::neg_q_power_index(a, ctx.q).unwrap_or(0),
        });
    }
    Ok(LogReal::ONE / p)
}

/// Both sides of
/// `Σ_p (zb)^p (q^{p+1};q)_∞/(aq^p/b;q)_∞ _1φ_1(aq^p/b; q^{p+1}; q, bx)
///  = (q, az, x/z;q)_∞/(a/b, bz;q)_∞`.
pub fn genfun_i(a: f64, b: f64, x: f64, z: f64, ctx: &QContext) -> Result<(f64, f64)> {
    if !(z != 0.0 && (z * b).abs() < 1.0) {
        return Err(QError::InvalidParameter(format!("need 0 < |z| < 1/|b|, got z = {z}, b = {b}")));
    }
    let q = ctx.q;
    let zb = LogReal::from_f64(z * b);
    let lhs = adaptive_sum(
        |p| {
            let ap = a * q.powi(p as i32) / b;
            let w = weighted_1phi1_scaled(ap * b * x, b * x, Lower::Lattice(p), ctx)?;
            Ok(zb.powi(p) * inv_qpoch_inf(ap, ctx)? * w.value)
        },
        None,
        SumWindow::default(),
        ctx,
    )?;
    let num = qpoch_multi_scaled(&[q, a * z, x / z], ctx)?.value;
    let den = qpoch_multi_scaled(&[a / b, b * z], ctx)?.value;
    Ok((lhs.sum.value.to_f64(), (num / den).to_f64()))
}

/// Both sides of
/// `Σ_r w^r (q^{r+1};q)_∞ _1φ_1(dq^{r+1}/y; q^{r+1}; q, y) = (d, q, y/w;q)_∞/(w, d/w;q)_∞`.
pub fn genfun_ii(d: f64, y: f64, w: f64, ctx: &QContext) -> Result<(f64, f64)> {
    if !(d.abs() < w.abs() && w.abs() < 1.0) {
        return Err(QError::InvalidParameter(format!("need |d| < |w| < 1, got d = {d}, w = {w}")));
    }
    let q = ctx.q;
    let wl = LogReal::from_f64(w);
    let lhs = adaptive_sum(
        |r| {
            let v = weighted_1phi1_scaled(d * q.powi((r + 1) as i32), y, Lower::Lattice(r), ctx)?;
            Ok(wl.powi(r) * v.value)
        },
        None,
        SumWindow::default(),
        ctx,
    )?;
    let num = qpoch_multi_scaled(&[d, q, y / w], ctx)?.value;
    let den = qpoch_multi_scaled(&[w, d / w], ctx)?.value;
    Ok((lhs.sum.value.to_f64(), (num / den).to_f64()))
}

/// Both sides of
/// `Σ_k y^k (q^{k+1};q)_∞/(aq^k/b;q)_∞ _1φ_1(aq^k/b; q^{k+1}; q, y)
///   (q^{k-l+1};q)_∞ _1φ_1(dq^{k-l+1}/y; q^{k-l+1}; q, y)
///  = d^l (ay/(bd);q)_l (d, q, q;q)_∞ / ((q;q)_l (a/b;q)_∞)` for `l ≥ 0`, and `0` for `l < 0`.
pub fn prop52(a: f64, b: f64, d: f64, y: f64, l: i64, ctx: &QContext) -> Result<(f64, f64)> {
    if !(y.abs() < 1.0) {
        return Err(QError::InvalidParameter(format!("need |y| < 1, got {y}")));
    }
    let q = ctx.q;
    let yl = LogReal::from_f64(y);
    let lhs = adaptive_sum(
        |k| {
            let ak = a * q.powi(k as i32) / b;
            let f1 = weighted_1phi1_scaled(ak * y, y, Lower::Lattice(k), ctx)?;
            let f2 = weighted_1phi1_scaled(d * q.powi((k - l + 1) as i32), y, Lower::Lattice(k - l), ctx)?;
            Ok(yl.powi(k) * inv_qpoch_inf(ak, ctx)? * f1.value * f2.value)
        },
        None,
        SumWindow::default(),
        ctx,
    )?;
    let rhs = if l < 0 {
        0.0
    } else {
        let lu = l as usize;
        let v = LogReal::from_f64(d).powi(l)
            * qpoch_finite_scaled(a * y / (b * d), lu, ctx)
            * qpoch_multi_scaled(&[d, q, q], ctx)?.value
            / qpoch_finite_scaled(q, lu, ctx)
            * inv_qpoch_inf(a / b, ctx)?;
        v.to_f64()
    };
    Ok((lhs.sum.value.to_f64(), rhs))
}

/// A pair of sides as a report; zero targets are judged against the largest
/// summand magnitude supplied in `scale`.
pub fn pair_report(
    check: &str,
    params: &[(&str, f64)],
    sides: (f64, f64),
    scale: f64,
    tol: Tolerance,
) -> VerificationReport {
    VerificationReport::new(check, params, sides.0, sides.1, scale, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> MeasureSpec {
        MeasureSpec::new(0.25, 2.0, QContext::default()).unwrap()
    }

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn weight_shape() {
        let s = spec();
        for k in -30..=30 {
            assert!(weight(&s, k).unwrap().sign() > 0.0);
        }
        let r = (weight(&s, 60).unwrap() / weight(&s, 61).unwrap()).to_f64();
        assert!((r - 0.5f64.powf(-1.25)).abs() < 1e-12);
        // Ratio w(k-1)/w(k) shrinks without bound as k → -∞.
        let mut prev = f64::INFINITY;
        for k in (-25..=-5).rev() {
            let r = (weight(&s, k - 1).unwrap() / weight(&s, k).unwrap()).to_f64();
            assert!(r < prev);
            prev = r;
        }
        assert!(prev < 1e-5);
    }

    #[test]
    fn total_mass() {
        let s = spec();
        let one = |_| Ok(LogReal::ONE);
        let m = functional_l(&s, one, one).unwrap().sum.value.to_f64();
        let d = laguerre_diag(&s, 0).unwrap();
        assert!((m - d).abs() < 1e-13 * d);
        let zero = functional_l(&s, |_| Ok(LogReal::ZERO), one).unwrap();
        assert!(zero.sum.value.is_zero());
    }

    #[test]
    fn laguerre_relations() {
        let s = spec();
        assert!(laguerre_gram(&s, 3, 3, tol()).unwrap().pass);
        let r = laguerre_gram(&s, 1, 0, tol()).unwrap();
        assert!(r.pass && r.predicted == 0.0);
        assert!(r.abs_err < 1e-13 * r.scale);
    }

    #[test]
    fn m_relations() {
        let s = spec();
        for (p, r) in [(0, 0), (-2, -2), (0, 1), (3, 3)] {
            let rep = m_gram(&s, p, r, tol()).unwrap();
            assert!(rep.pass, "{rep:?}");
        }
        for (p, n) in [(0, 0), (-3, 5), (4, 2)] {
            let rep = cross_gram(&s, p, n, tol()).unwrap();
            assert!(rep.pass, "{rep:?}");
        }
        for (r, m) in [(0, 0), (2, 3), (-1, 1)] {
            let rep = monomial_orth(&s, r, m, tol()).unwrap();
            assert!(rep.pass, "{rep:?}");
        }
    }

    #[test]
    fn hankel_members_agree() {
        let s = spec();
        let h = hankel_identity(&s, 0, 0).unwrap();
        let q: f64 = 0.5;
        let qp = |a: &[f64]| qpoch_multi_scaled(a, &s.ctx).unwrap().value.to_f64();
        let mid = 2.0 * q.powf(0.25) * qp(&[-q / 2.0]) / qp(&[-q.powf(0.75) / 2.0])
            * qp(&[-2.0 * q.powf(1.25), -q.powf(-0.25) / 2.0])
            / qp(&[-2.0, -q / 2.0]);
        assert!((h.mid - mid).abs() < 1e-13 * mid);
        assert!((h.lhs1 - mid).abs() < 1e-10 * mid);
        assert!((h.lhs2 - mid).abs() < 1e-10 * mid);
        let h = hankel_identity(&s, 1, 1).unwrap();
        assert!((h.lhs1 - h.lhs2).abs() < 1e-10 * h.mid);
        let h = hankel_identity(&s, 1, 2).unwrap();
        assert_eq!(h.mid, 0.0);
        let scale = (m_diag(&s, 1).unwrap() * m_diag(&s, 2).unwrap()).sqrt();
        assert!(h.lhs1.abs() < 1e-10 * scale && h.lhs2.abs() < 1e-10 * scale);
    }

    #[test]
    fn dual_relations() {
        let op = OperatorSpec::from_alpha(0.25, 2.0, QContext::default()).unwrap();
        let t = Tolerance { rtol: 1e-7, atol: 1e-7 };
        for (k, l) in [(0, 0), (0, 1), (-2, -2)] {
            let r = dual_orthogonality(&op, k, l, t).unwrap();
            assert!(r.pass, "{r:?}");
        }
    }

    #[test]
    fn cd_kernel_identity_and_limit() {
        let s = spec();
        let (x, y) = (s.point(2), s.point(3));
        let k = cd_kernel(&s, 0, x, y).unwrap();
        assert!((k.partial_sum - 1.0).abs() < 1e-15);
        assert!((k.cd_form - 1.0).abs() < 1e-14);
        let k = cd_kernel(&s, 5, x, y).unwrap();
        assert!((k.partial_sum - k.cd_form).abs() < 1e-12 * k.partial_sum.abs());
        let k = cd_kernel(&s, 60, x, y).unwrap();
        assert!((k.cd_form - k.bessel_limit).abs() < 1e-6);
        assert!((k.bessel_limit - 1.4919172950755005).abs() < 1e-12);
        let k = cd_kernel(&s, 40, x, x).unwrap();
        assert!((k.partial_sum - k.cd_form).abs() < 1e-11 * k.partial_sum.abs());
        assert!((k.cd_form - k.bessel_limit).abs() < 1e-8 * k.bessel_limit.abs());
    }

    #[test]
    fn corollary_examples() {
        let s = spec();
        let t = Tolerance { rtol: 1e-7, atol: 1e-7 };
        for (k, l) in [(0, 0), (0, 2), (-1, -1), (0, 1)] {
            let r = corollary_check(&s, k, l, t).unwrap();
            assert!(r.pass, "{r:?}");
        }
        let c = corollary_sides(&s, 0, 0).unwrap();
        assert!((c.lhs - 13.405345880567773).abs() < 1e-12);
    }

    #[test]
    fn berg_examples() {
        let s = spec();
        assert!(berg_admissible(&s, -2) && !berg_admissible(&s, 0));
        let plain = laguerre_gram(&s, 1, 1, tol()).unwrap();
        let zero = berg_perturbed_gram(&s, 0.0, -2, 1, 1, tol()).unwrap();
        assert_eq!(zero.computed, plain.computed);
        for sv in [-0.5, 1.0] {
            let r = berg_perturbed_gram(&s, sv, -2, 2, 3, tol()).unwrap();
            assert!(r.pass, "{r:?}");
            let r = berg_perturbed_gram(&s, sv, -2, 1, 1, tol()).unwrap();
            assert!(r.pass, "{r:?}");
        }
        assert!(berg_perturbed_gram(&s, 0.5, 0, 1, 1, tol()).is_err());
    }

    #[test]
    fn generating_functions() {
        let c = QContext::default();
        for (a, b, x, z) in [(0.3, 0.8, 0.2, 0.5), (0.0, 0.8, 0.2, 0.5), (-0.7, 1.3, -0.4, 0.6)] {
            let (l, r) = genfun_i(a, b, x, z, &c).unwrap();
            assert!((l - r).abs() < 1e-12 * r.abs(), "{a} {b}: {l} {r}");
        }
        for (d, y, w) in [(0.1, 0.3, 0.6), (0.0, 0.0, 0.6), (-0.3, -0.5, -0.7)] {
            let (l, r) = genfun_ii(d, y, w, &c).unwrap();
            assert!((l - r).abs() < 1e-12 * r.abs(), "{d} {y} {w}: {l} {r}");
        }
        let (l, r) = genfun_ii(0.1, 0.6, 0.6, &c).unwrap();
        assert_eq!(r, 0.0);
        assert!(l.abs() < 1e-14);
    }

    #[test]
    fn prop52_examples() {
        let c = QContext::default();
        for d in [0.4, 2.5] {
            for l in -2..=3 {
                let (lhs, rhs) = prop52(0.3, 0.8, d, 0.5, l, &c).unwrap();
                if l < 0 {
                    assert_eq!(rhs, 0.0);
                    assert!(lhs.abs() < 1e-14, "{d} {l}: {lhs}");
                } else {
                    assert!((lhs - rhs).abs() < 1e-12 * rhs.abs(), "{d} {l}: {lhs} {rhs}");
                }
            }
        }
    }
}
