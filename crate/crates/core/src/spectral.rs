//! The doubly infinite Jacobi operator
//! `(Lu)_k = a_k u_{k+1} + b_k u_k + a_{k-1} u_{k-1}` on `ℓ²(Z)`,
//! its eigensolutions, Wronskians, Green function and spectral data.

use std::collections::BTreeMap;

use crate::bilateral::{adaptive_sum, LatticeSum, SumWindow};
use crate::error::{QError, Result};
use crate::logreal::LogReal;
use crate::qseries::{
    best_of, phi_rs_scaled, qpoch_finite_scaled, qpoch_inf_scaled, qpoch_multi_scaled,
    weighted_1phi1_scaled, Lower, PhiSpec, QContext, Residual, Scaled,
};
use crate::sum::ScaledSum;
use serde::Serialize;

/// Relative tolerance for recognising `t = ±q^{m/2}`.
const DEGENERATE_MATCH: f64 = 1e-12;

/// `m` with `s² = q^m`, if any.
fn half_power_index(s: f64, q: f64) -> Option<i64> {
    let s2 = s * s;
    if !(s2 > 0.0) {
        return None;
    }
    let m = (s2.ln() / q.ln()).round();
    let target = q.powf(m);
    ((s2 - target).abs() < DEGENERATE_MATCH * target).then_some(m as i64)
}

/// Parameters `(c, t)` of the operator, together with the base `q`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OperatorSpec {
    pub c: f64,
    pub t: f64,
    /// `Some(m)` when `t = ±q^{m/2}`.
    pub degenerate: Option<i64>,
    #[serde(skip)]
    pub ctx: QContext,
}

impl OperatorSpec {
    pub fn new(c: f64, t: f64, ctx: QContext) -> Result<Self> {
        if !(c > 0.0) {
            return Err(QError::InvalidParameter(format!("c = {c} must be positive")));
        }
        if !(t.abs() > ctx.q.sqrt()) || !t.is_finite() {
            return Err(QError::InvalidParameter(format!(
                "|t| = {} must exceed q^(1/2)",
                t.abs()
            )));
        }
        Ok(OperatorSpec {
            c,
            t,
            degenerate: half_power_index(t, ctx.q),
            ctx,
        })
    }

    /// The operator tied to the measure parameter `α` through `t^{-2} = q^α`.
    pub fn from_alpha(alpha: f64, c: f64, ctx: QContext) -> Result<Self> {
        Self::new(c, ctx.q.powf(-alpha / 2.0), ctx)
    }

    fn require_nondegenerate(&self) -> Result<()> {
        match self.degenerate {
            Some(m) => Err(QError::DegenerateParameter(format!(
                "t = {} equals ±q^({m}/2)",
                self.t
            ))),
            None => Ok(()),
        }
    }
}

/// `(a_k, b_k)`.
pub fn coeffs(spec: &OperatorSpec, k: i64) -> (f64, f64) {
    let q = spec.ctx.q;
    let qk = q.powi(-k as i32);
    let a = q.powf(-(k as f64 + 1.0) / 2.0) * (1.0 + qk / spec.c).sqrt();
    let b = (spec.t + 1.0 / spec.t) / spec.c.sqrt() * qk;
    (a, b)
}

/// The three named solutions of `Lu = xu`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Solution {
    VT,
    VTinv,
    U,
}

/// Values of a sequence on a materialised window of indices.
#[derive(Clone, Debug, Default)]
pub struct LatticeVector {
    values: BTreeMap<i64, LogReal>,
}

impl LatticeVector {
    pub fn from_fn<F>(lo: i64, hi: i64, mut f: F) -> Result<Self>
    where
        F: FnMut(i64) -> Result<LogReal>,
    {
        let mut values = BTreeMap::new();
        for k in lo..=hi {
            values.insert(k, f(k)?);
        }
        Ok(LatticeVector { values })
    }

    pub fn from_values(lo: i64, vals: &[f64]) -> Self {
        LatticeVector {
            values: vals
                .iter()
                .enumerate()
                .map(|(i, &v)| (lo + i as i64, LogReal::from_f64(v)))
                .collect(),
        }
    }

    /// A named eigensolution at spectral parameter `x` over `[lo, hi]`.
    pub fn solution(spec: &OperatorSpec, sol: Solution, x: f64, lo: i64, hi: i64) -> Result<Self> {
        Self::from_fn(lo, hi, |k| Ok(solution_value(spec, sol, k, x)?.value))
    }

    pub fn get(&self, k: i64) -> Result<LogReal> {
        self.values.get(&k).copied().ok_or_else(|| {
            QError::InvalidParameter(format!("index {k} outside the materialised window"))
        })
    }

    pub fn value(&self, k: i64) -> Result<f64> {
        self.get(k).map(LogReal::to_f64)
    }

    pub fn window(&self) -> Option<(i64, i64)> {
        let lo = *self.values.keys().next()?;
        let hi = *self.values.keys().next_back()?;
        Some((lo, hi))
    }
}

fn combine(terms: &[LogReal]) -> Residual {
    let s = ScaledSum::of(terms);
    Residual {
        value: s.value().to_f64(),
        scale: s.abs_sum().to_f64(),
    }
}

/// `(Lu)_k`.
pub fn apply_l(spec: &OperatorSpec, u: &LatticeVector, k: i64) -> Result<f64> {
    let (a, b) = coeffs(spec, k);
    let (am, _) = coeffs(spec, k - 1);
    Ok(combine(&[u.get(k + 1)? * a, u.get(k)? * b, u.get(k - 1)? * am]).value)
}

/// `(Lu)_k - x u_k` with the magnitude of the three operator terms as scale.
pub fn eigen_residual(spec: &OperatorSpec, u: &LatticeVector, x: f64, k: i64) -> Result<Residual> {
    let (a, b) = coeffs(spec, k);
    let (am, _) = coeffs(spec, k - 1);
    let uk = u.get(k)?;
    let t1 = u.get(k + 1)? * a;
    let t2 = uk * b;
    let t3 = u.get(k - 1)? * am;
    let value = combine(&[t1, t2, t3, -(uk * x)]).value;
    Ok(Residual {
        value,
        scale: combine(&[t1.abs(), t2.abs(), t3.abs()]).value,
    })
}

fn sqrt_scaled(s: Scaled) -> Scaled {
    let v = s.value.sqrt().unwrap_or(LogReal::from_f64(f64::NAN));
    Scaled {
        value: v,
        abs_err: v * (s.rel_err() / 2.0),
        ..s
    }
}

/// `√((-q^{1-k}/c;q)_∞) q^{k(k+1)/4}`.
fn common_prefactor(spec: &OperatorSpec, k: i64) -> Result<Scaled> {
    let ctx = &spec.ctx;
    let p = qpoch_inf_scaled(-ctx.q.powi((1 - k) as i32) / spec.c, ctx)?;
    let kf = k as f64;
    Ok(sqrt_scaled(p).scale(ctx.pow_scaled(kf * (kf + 1.0) / 4.0)))
}

/// A point of the discrete spectrum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Branch {
    Eta,
    Xi,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpectralPoint {
    pub branch: Branch,
    pub p: i64,
    pub x: f64,
}

impl SpectralPoint {
    pub fn eta(spec: &OperatorSpec, p: i64) -> Result<Self> {
        if p < 0 {
            return Err(QError::InvalidParameter(format!("eta_p needs p >= 0, got {p}")));
        }
        Ok(SpectralPoint {
            branch: Branch::Eta,
            p,
            x: -spec.c.sqrt() * spec.ctx.q.powi(p as i32) / spec.t,
        })
    }

    pub fn xi(spec: &OperatorSpec, p: i64) -> Self {
        SpectralPoint {
            branch: Branch::Xi,
            p,
            x: spec.t * spec.ctx.q.powi(p as i32) / spec.c.sqrt(),
        }
    }
}

/// `η_p` for `0 ≤ p ≤ p_max` and `ξ_p` for `p_min ≤ p ≤ p_max`, ascending in `x`.
pub fn spectrum(spec: &OperatorSpec, p_min: i64, p_max: i64) -> Vec<SpectralPoint> {
    let mut pts: Vec<SpectralPoint> = (0.max(p_min)..=p_max)
        .filter_map(|p| SpectralPoint::eta(spec, p).ok())
        .chain((p_min..=p_max).map(|p| SpectralPoint::xi(spec, p)))
        .collect();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x));
    pts
}

fn check_s(spec: &OperatorSpec, s: f64) -> Result<()> {
    if s == 0.0 || !s.is_finite() {
        return Err(QError::InvalidParameter(format!("s = {s} must be finite and non-zero")));
    }
    if let Some(m) = half_power_index(s, spec.ctx.q) {
        if m <= -1 {
            return Err(QError::DegenerateParameter(format!(
                "s = {s} equals ±q^({m}/2); use the degenerate relation"
            )));
        }
    }
    Ok(())
}

fn v_impl(spec: &OperatorSpec, s: f64, k: i64, x: f64, lattice: Option<i64>) -> Result<Scaled> {
    check_s(spec, s)?;
    let ctx = &spec.ctx;
    let q = ctx.q;
    let sc = spec.c.sqrt();
    let qk1 = q.powi((k + 1) as i32);
    let pre = common_prefactor(spec, k)?.scale(LogReal::from_f64(-s * sc).powi(k));
    let z = x * s * qk1 * sc;
    let direct = weighted_1phi1_scaled(-s * s * spec.c * qk1, z, Lower::Value(q * s * s), ctx);
    let lower = match lattice {
        Some(m) => Lower::Lattice(m),
        None => Lower::Value(z),
    };
    let entire = weighted_1phi1_scaled(-spec.c * qk1 * s * s, q * s * s, lower, ctx);
    Ok(best_of(vec![direct, entire], ctx)?.mul(pre))
}

/// `V^s_k(x)` for `s ∈ {t, t^{-1}}`; `x = 0` gives the `_0φ_1` limit.
pub fn v_sol(spec: &OperatorSpec, s: f64, k: i64, x: f64) -> Result<Scaled> {
    v_impl(spec, s, k, x, None)
}

/// `V^s_k` at a spectral point, using the exact lattice structure at `ξ_p`.
pub fn v_sol_at(spec: &OperatorSpec, s: f64, k: i64, pt: &SpectralPoint) -> Result<Scaled> {
    let lattice = (pt.branch == Branch::Xi && s == 1.0 / spec.t).then_some(pt.p + k);
    v_impl(spec, s, k, pt.x, lattice)
}

/// Largest `k` for which the power series of `U_k` converges.
pub fn u_direct_limit(spec: &OperatorSpec) -> i64 {
    // q^{1-k}/c < 1  ⇔  k < 1 - ln c / ln q
    let bound = 1.0 - spec.c.ln() / spec.ctx.q.ln();
    let k = bound.ceil() as i64 - 1;
    if spec.ctx.q.powi((1 - k) as i32) / spec.c < 1.0 {
        k
    } else {
        k - 1
    }
}

fn u_direct(spec: &OperatorSpec, k: i64, x: f64) -> Result<Scaled> {
    let ctx = &spec.ctx;
    let sc = spec.c.sqrt();
    let z = -ctx.q.powi((1 - k) as i32) / spec.c;
    if z.abs() >= 1.0 {
        return Err(QError::DivergentSeries(format!(
            "U_k power series needs q^(1-k)/c < 1 (k = {k})"
        )));
    }
    let series = phi_rs_scaled(
        &PhiSpec::new(&[-sc / (spec.t * x), -sc * spec.t / x], &[0.0], z),
        ctx,
    )?;
    Ok(series
        .mul(common_prefactor(spec, k)?)
        .scale(LogReal::from_f64(x).powi(k)))
}

/// The two terms of the connection formula for `U_k(x)`.
fn connection_terms(spec: &OperatorSpec, k: i64, x: f64) -> Result<[Scaled; 2]> {
    let t = spec.t;
    let a = big_c(spec, t)?
        .mul(c_func(spec, t, x)?)
        .mul(v_sol(spec, t, k, x)?);
    let b = big_c(spec, 1.0 / t)?
        .mul(c_func(spec, 1.0 / t, x)?)
        .mul(v_sol(spec, 1.0 / t, k, x)?);
    Ok([a, b])
}

fn add_scaled(terms: &[Scaled]) -> Scaled {
    let s = ScaledSum::of(&terms.iter().map(|t| t.value).collect::<Vec<_>>());
    let err = ScaledSum::of(&terms.iter().map(|t| t.abs_err).collect::<Vec<_>>());
    let rounding = s.abs_sum() * (4.0 * f64::EPSILON);
    Scaled {
        value: s.value(),
        abs_err: ScaledSum::of(&[err.value(), rounding]).value(),
        n_terms: terms.iter().map(|t| t.n_terms).sum(),
        cancellation: terms
            .iter()
            .map(|t| t.cancellation)
            .fold(s.cancellation(), f64::max),
    }
}

/// `U_k(x)`: the power series where it converges, the connection formula otherwise.
pub fn u_sol(spec: &OperatorSpec, k: i64, x: f64) -> Result<Scaled> {
    if x == 0.0 {
        return Err(QError::InvalidParameter("U_k(x) needs x != 0".into()));
    }
    if k <= u_direct_limit(spec) {
        u_direct(spec, k, x)
    } else {
        spec.require_nondegenerate()?;
        Ok(add_scaled(&connection_terms(spec, k, x)?))
    }
}

/// Value of a named solution.
pub fn solution_value(spec: &OperatorSpec, sol: Solution, k: i64, x: f64) -> Result<Scaled> {
    match sol {
        Solution::VT => v_sol(spec, spec.t, k, x),
        Solution::VTinv => v_sol(spec, 1.0 / spec.t, k, x),
        Solution::U => u_sol(spec, k, x),
    }
}

/// `c_s(x) = (-√c/(xs), qs/(x√c), x√c/s; q)_∞`.
pub fn c_func(spec: &OperatorSpec, s: f64, x: f64) -> Result<Scaled> {
    let sc = spec.c.sqrt();
    let q = spec.ctx.q;
    qpoch_multi_scaled(&[-sc / (x * s), q * s / (x * sc), x * sc / s], &spec.ctx)
}

/// `c_s(x)` together with `∏(1 + |a_i| q^j)`, the scale against which a
/// vanishing factor is judged.
pub fn c_func_zero_test(spec: &OperatorSpec, s: f64, x: f64) -> Result<Residual> {
    let sc = spec.c.sqrt();
    let q = spec.ctx.q;
    let args = [-sc / (x * s), q * s / (x * sc), x * sc / s];
    let v = qpoch_multi_scaled(&args, &spec.ctx)?.value;
    let scale = qpoch_multi_scaled(&args.map(|a| -a.abs()), &spec.ctx)?.value;
    Ok(Residual {
        value: v.to_f64(),
        scale: scale.to_f64(),
    })
}

/// `C_s = 1/(qs², s^{-2}, -c, -q/c; q)_∞`.
pub fn big_c(spec: &OperatorSpec, s: f64) -> Result<Scaled> {
    let q = spec.ctx.q;
    if let Some(m) = half_power_index(s, q) {
        return Err(QError::DegenerateParameter(format!(
            "C_s is singular for s = ±q^({m}/2)"
        )));
    }
    let d = qpoch_multi_scaled(&[q * s * s, 1.0 / (s * s), -spec.c, -q / spec.c], &spec.ctx)?;
    Ok(Scaled::exact(LogReal::ONE).div(d))
}

/// `U_k(x) - C_t c_t(x) V^t_k(x) - C_{1/t} c_{1/t}(x) V^{1/t}_k(x)`.
///
/// `U_k` comes from its power series when that converges and otherwise from
/// the three-term recurrence started on the last two convergent indices, so
/// the check never uses the connection formula on both sides.
pub fn connection_residual(spec: &OperatorSpec, x: f64, k: i64) -> Result<Residual> {
    spec.require_nondegenerate()?;
    if x == 0.0 {
        return Err(QError::InvalidParameter("connection formula needs x != 0".into()));
    }
    let kd = u_direct_limit(spec);
    let u = if k <= kd {
        u_direct(spec, k, x)?.value
    } else {
        let mut um = u_direct(spec, kd - 1, x)?.value;
        let mut u0 = u_direct(spec, kd, x)?.value;
        for j in kd..k {
            let (a, b) = coeffs(spec, j);
            let (am, _) = coeffs(spec, j - 1);
            let next = ScaledSum::of(&[u0 * (x - b), -(um * am)]).value() / a;
            um = u0;
            u0 = next;
        }
        u0
    };
    let [a, b] = connection_terms(spec, k, x)?;
    let value = ScaledSum::of(&[u, -a.value, -b.value]).value();
    let scale = [u.abs(), a.value.abs(), b.value.abs()]
        .into_iter()
        .max_by(|p, q| p.ln_abs().total_cmp(&q.ln_abs()))
        .unwrap_or(LogReal::ZERO);
    Ok(Residual {
        value: value.to_f64(),
        scale: scale.to_f64(),
    })
}

/// Both sides of
/// `V^{±q^{-m/2}}_k(x) = (-c)^m (∓q^{1-m/2}x/√c;q)_∞/(∓q^{1+m/2}x/√c;q)_∞ V^{±q^{m/2}}_k(x)`,
/// the left side read through the regularized series.
pub fn degenerate_t_relation(
    spec: &OperatorSpec,
    m: i64,
    sign: f64,
    k: i64,
    x: f64,
) -> Result<(f64, f64)> {
    if m < 0 {
        return Err(QError::InvalidParameter(format!("m = {m} must be nonnegative")));
    }
    let ctx = &spec.ctx;
    let q = ctx.q;
    let sign = sign.signum();
    let sc = spec.c.sqrt();
    let s = sign * q.powf(-(m as f64) / 2.0);
    let qk1 = q.powi((k + 1) as i32);
    let pre = common_prefactor(spec, k)?.scale(LogReal::from_f64(-s * sc).powi(k));
    let lhs = weighted_1phi1_scaled(-s * s * spec.c * qk1, x * s * qk1 * sc, Lower::Lattice(-m), ctx)?
        .mul(pre)
        .value;
    let s2 = sign * q.powf(m as f64 / 2.0);
    let num = qpoch_inf_scaled(-sign * q.powf(1.0 - m as f64 / 2.0) * x / sc, ctx)?.value;
    let den = qpoch_inf_scaled(-sign * q.powf(1.0 + m as f64 / 2.0) * x / sc, ctx)?.value;
    let rhs = LogReal::from_f64(-spec.c).powi(m) * num / den * v_sol(spec, s2, k, x)?.value;
    Ok((lhs.to_f64(), rhs.to_f64()))
}

/// `[u, v]_k = a_k (u_{k+1} v_k - u_k v_{k+1})`.
pub fn wronskian(spec: &OperatorSpec, u: &LatticeVector, v: &LatticeVector, k: i64) -> Result<f64> {
    let (a, _) = coeffs(spec, k);
    let s = ScaledSum::of(&[u.get(k + 1)? * v.get(k)?, -(u.get(k)? * v.get(k + 1)?)]);
    Ok((s.value() * a).to_f64())
}

/// `a_k (|u_{k+1} v_k| + |u_k v_{k+1}|)`, the size of the two products whose
/// difference is the Wronskian.
pub fn wronskian_scale(spec: &OperatorSpec, u: &LatticeVector, v: &LatticeVector, k: i64) -> Result<f64> {
    let (a, _) = coeffs(spec, k);
    let s = ScaledSum::of(&[(u.get(k + 1)? * v.get(k)?).abs(), (u.get(k)? * v.get(k + 1)?).abs()]);
    Ok((s.value() * a).to_f64())
}

/// Closed-form Wronskians.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClosedWronskians {
    /// `[V^t, V^{1/t}] = (√c/t)(t², qt^{-2}, -1/c, -cq; q)_∞`.
    pub vv: f64,
    /// The alternative three-factor reading `(√c/t)(t², qt^{-2} - 1/c, -cq; q)_∞`.
    pub vv_three_factor: f64,
    /// `[U, V^t] = c_{1/t}(x)/(-t√c)`.
    pub uv: f64,
    /// `[U, V^{1/t}] = -t c_t(x)/√c`.
    pub uv_inv: f64,
}

pub fn wronskian_closed_forms(spec: &OperatorSpec, x: f64) -> Result<ClosedWronskians> {
    spec.require_nondegenerate()?;
    let ctx = &spec.ctx;
    let q = ctx.q;
    let (c, t) = (spec.c, spec.t);
    let sc = c.sqrt();
    let vv = qpoch_multi_scaled(&[t * t, q / (t * t), -1.0 / c, -c * q], ctx)?.value * (sc / t);
    let vv3 = qpoch_multi_scaled(&[t * t, q / (t * t) - 1.0 / c, -c * q], ctx)?.value * (sc / t);
    let uv = c_func(spec, 1.0 / t, x)?.value / (-t * sc);
    let uv_inv = c_func(spec, t, x)?.value * (-t / sc);
    Ok(ClosedWronskians {
        vv: vv.to_f64(),
        vv_three_factor: vv3.to_f64(),
        uv: uv.to_f64(),
        uv_inv: uv_inv.to_f64(),
    })
}

/// Green function `G_x(m, n) = U_{min(m,n)}(x) V^{1/t}_{max(m,n)}(x) / [U(x), V^{1/t}(x)]`.
pub fn green_function(spec: &OperatorSpec, m: i64, n: i64, x: f64) -> Result<f64> {
    spec.require_nondegenerate()?;
    if x == 0.0 {
        return Err(QError::SingularWronskian { x });
    }
    let z = c_func_zero_test(spec, spec.t, x)?;
    if z.value.abs() <= spec.ctx.eps_verify * z.scale {
        return Err(QError::SingularWronskian { x });
    }
    let w = wronskian_closed_forms(spec, x)?.uv_inv;
    let u = u_sol(spec, m.min(n), x)?.value;
    let v = v_sol(spec, 1.0 / spec.t, m.max(n), x)?.value;
    Ok((u * v / w).to_f64())
}

/// `Σ_n G_x(m,n) ((x - L) e_j)_n - δ_{m,j}`.
pub fn resolvent_residual(spec: &OperatorSpec, m: i64, j: i64, x: f64) -> Result<Residual> {
    let (a, b) = coeffs(spec, j);
    let (am, _) = coeffs(spec, j - 1);
    let t = [
        green_function(spec, m, j, x)? * (x - b),
        -green_function(spec, m, j + 1, x)? * a,
        -green_function(spec, m, j - 1, x)? * am,
    ];
    let delta = if m == j { 1.0 } else { 0.0 };
    let terms: Vec<LogReal> = t.iter().map(|&v| LogReal::from_f64(v)).collect();
    let s = ScaledSum::of(&terms);
    Ok(Residual {
        value: s.value().to_f64() - delta,
        scale: s.abs_sum().to_f64().max(1.0),
    })
}

fn require_eta_regime(spec: &OperatorSpec) -> Result<()> {
    match spec.degenerate {
        Some(m) if m >= 1 => Err(QError::DegenerateParameter(format!(
            "t^2 = q^{m} makes (qt^-2;q) vanish"
        ))),
        _ => Ok(()),
    }
}

/// `‖V^{1/t}(η_p)‖² = c^{-1}t²q^{-p} (q;q)_p/(qt^{-2};q)_p (q, -c/t², -qt²/c, qt^{-2}; q)_∞`.
pub fn eta_norm(spec: &OperatorSpec, p: i64) -> Result<f64> {
    Ok(eta_norm_scaled(spec, p)?.to_f64())
}

fn eta_norm_scaled(spec: &OperatorSpec, p: i64) -> Result<LogReal> {
    if p < 0 {
        return Err(QError::InvalidParameter(format!("eta_p needs p >= 0, got {p}")));
    }
    require_eta_regime(spec)?;
    let ctx = &spec.ctx;
    let q = ctx.q;
    let (c, t) = (spec.c, spec.t);
    let t2 = t * t;
    let pu = p as usize;
    let v = qpoch_finite_scaled(q, pu, ctx) / qpoch_finite_scaled(q / t2, pu, ctx)
        * qpoch_multi_scaled(&[q, -c / t2, -q * t2 / c, q / t2], ctx)?.value
        * ctx.pow_scaled(-(p as f64))
        * (t2 / c);
    Ok(v)
}

/// `‖V^{1/t}(ξ_p)‖² = q^{-p}(-q^{p+1}/c, q, q, -ct^{-2}, -qt²/c; q)_∞/(-q^{p+1}t²/c; q)_∞`.
pub fn xi_norm(spec: &OperatorSpec, p: i64) -> Result<f64> {
    Ok(xi_norm_scaled(spec, p)?.to_f64())
}

fn xi_norm_scaled(spec: &OperatorSpec, p: i64) -> Result<LogReal> {
    let ctx = &spec.ctx;
    let q = ctx.q;
    let (c, t) = (spec.c, spec.t);
    let t2 = t * t;
    let qp1 = q.powi((p + 1) as i32);
    let num = qpoch_multi_scaled(&[-qp1 / c, q, q, -c / t2, -q * t2 / c], ctx)?.value;
    let den = qpoch_inf_scaled(-qp1 * t2 / c, ctx)?.value;
    Ok(num / den * ctx.pow_scaled(-(p as f64)))
}

/// Spectral mass at `η_p`, equal to `1/eta_norm(p)`.
pub fn eta_weight(spec: &OperatorSpec, p: i64) -> Result<f64> {
    Ok((LogReal::ONE / eta_norm_scaled(spec, p)?).to_f64())
}

/// The mass at `η_p` in its printed form
/// `c t^{-2} q^p (qt^{-2};q)_p/(q;q)_p / (-c/t², -qt²/c, qt^{-2}; q)_∞`,
/// which carries an extra factor `(q;q)_∞` relative to [`eta_weight`].
pub fn eta_weight_as_printed(spec: &OperatorSpec, p: i64) -> Result<f64> {
    if p < 0 {
        return Err(QError::InvalidParameter(format!("eta_p needs p >= 0, got {p}")));
    }
    require_eta_regime(spec)?;
    let ctx = &spec.ctx;
    let q = ctx.q;
    let (c, t) = (spec.c, spec.t);
    let t2 = t * t;
    let pu = p as usize;
    let v = qpoch_finite_scaled(q / t2, pu, ctx) / qpoch_finite_scaled(q, pu, ctx)
        / qpoch_multi_scaled(&[-c / t2, -q * t2 / c, q / t2], ctx)?.value
        * ctx.pow_scaled(p as f64)
        * (c / t2);
    Ok(v.to_f64())
}

/// Spectral mass at `ξ_p`, `1/xi_norm(p)`.
pub fn xi_weight(spec: &OperatorSpec, p: i64) -> Result<f64> {
    Ok((LogReal::ONE / xi_norm_scaled(spec, p)?).to_f64())
}

/// `Σ_k u_k v_k` over `Z` for two solutions given as index functions.
pub fn lattice_inner<F, G>(spec: &OperatorSpec, mut u: F, mut v: G) -> Result<LatticeSum>
where
    F: FnMut(i64) -> Result<LogReal>,
    G: FnMut(i64) -> Result<LogReal>,
{
    adaptive_sum(|k| Ok(u(k)? * v(k)?), None, SumWindow::default(), &spec.ctx)
}

/// `Σ_k V^{1/t}_k(x)²` at a spectral point.
pub fn lattice_norm_sq(spec: &OperatorSpec, pt: &SpectralPoint) -> Result<LatticeSum> {
    let s = 1.0 / spec.t;
    lattice_inner(
        spec,
        |k| Ok(v_sol_at(spec, s, k, pt)?.value),
        |k| Ok(v_sol_at(spec, s, k, pt)?.value),
    )
}

/// Truncation of `L` to `[-K, K]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Boundary {
    /// Plain truncation.
    Dirichlet,
    /// Adds `a_K ρ` to the last diagonal entry, `ρ = -q^{1/2}/t` being the
    /// ratio `V^{1/t}_{k+1}/V^{1/t}_k` as `k → ∞`.
    Matched,
}

fn sturm_count(a: &[f64], b: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut d = 1.0;
    for i in 0..b.len() {
        d = if i == 0 { b[0] - x } else { b[i] - x - a[i - 1] * a[i - 1] / d };
        if d == 0.0 {
            d = -f64::MIN_POSITIVE;
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// Eigenvalues of the `(2K+1)×(2K+1)` section of `L`, ascending, by bisection
/// on Sturm sequence counts.
pub fn finite_section_eigenvalues(spec: &OperatorSpec, kmax: i64, boundary: Boundary) -> Result<Vec<f64>> {
    if kmax < 2 {
        return Err(QError::InvalidParameter(format!("K = {kmax} must be at least 2")));
    }
    let ks: Vec<i64> = (-kmax..=kmax).collect();
    let mut b: Vec<f64> = ks.iter().map(|&k| coeffs(spec, k).1).collect();
    let a: Vec<f64> = ks[..ks.len() - 1].iter().map(|&k| coeffs(spec, k).0).collect();
    if boundary == Boundary::Matched {
        let (ak, _) = coeffs(spec, kmax);
        let rho = -spec.ctx.q.sqrt() / spec.t;
        *b.last_mut().expect("non-empty") += ak * rho;
    }
    let n = b.len();
    // Gershgorin interval.
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { a[i - 1].abs() } else { 0.0 } + if i + 1 < n { a[i].abs() } else { 0.0 };
        lo = lo.min(b[i] - r);
        hi = hi.max(b[i] + r);
    }
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let (mut l, mut h) = (lo, hi);
        for _ in 0..2000 {
            let mid = 0.5 * (l + h);
            if mid <= l || mid >= h {
                break;
            }
            if sturm_count(&a, &b, mid) > i {
                h = mid;
            } else {
                l = mid;
            }
        }
        out.push(0.5 * (l + h));
    }
    Ok(out)
}

/// Direction of a tail.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Direction {
    PlusInfinity,
    MinusInfinity,
}

/// Window sums of `|u_k|²` moving away from the origin.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailReport {
    pub solution: Solution,
    pub x: f64,
    pub direction: Direction,
    /// `ln Σ_{k ∈ W_i} |u_k|²` for consecutive windows `W_1, W_2, ...`.
    pub ln_window_sums: Vec<f64>,
    /// Mean per-index ratio `|u_{k±1}|²/|u_k|²` over the last window.
    pub decay_ratio: f64,
    /// Each window contributes less than half of the previous one.
    pub cauchy_decreasing: bool,
}

pub fn ell2_tail_check(
    spec: &OperatorSpec,
    sol: Solution,
    x: f64,
    direction: Direction,
    window: i64,
) -> Result<TailReport> {
    if window < 1 {
        return Err(QError::InvalidParameter("window must be positive".into()));
    }
    const WINDOWS: i64 = 4;
    let dir = match direction {
        Direction::PlusInfinity => 1,
        Direction::MinusInfinity => -1,
    };
    let mut sums = Vec::new();
    let mut first_last = (LogReal::ZERO, LogReal::ZERO);
    for w in 1..=WINDOWS {
        let mut acc = ScaledSum::new();
        for i in 0..window {
            let k = dir * (w * window + i);
            let v = solution_value(spec, sol, k, x)?.value;
            let sq = v * v;
            if w == WINDOWS {
                if i == 0 {
                    first_last.0 = sq;
                }
                if i == window - 1 {
                    first_last.1 = sq;
                }
            }
            acc.add(sq);
        }
        sums.push(acc.value().ln_abs());
    }
    let decay_ratio = if window > 1 {
        ((first_last.1.ln_abs() - first_last.0.ln_abs()) / (window - 1) as f64).exp()
    } else {
        (sums[sums.len() - 1] - sums[sums.len() - 2]).exp()
    };
    let cauchy_decreasing = sums.windows(2).all(|w| w[1] < w[0] - std::f64::consts::LN_2);
    Ok(TailReport {
        solution: sol,
        x,
        direction,
        ln_window_sums: sums,
        decay_ratio,
        cauchy_decreasing,
    })
}
