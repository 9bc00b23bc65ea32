//! Named verification suites over seeded parameter grids.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{QError, Result};
use crate::families::{BigJacobiParams, MeasureSpec};
use crate::limits::{
    bqj_orthogonality, convergence_study, eqe_check, eqe_corollary_cross, finite_r_orth, lattice_values,
    limit_pointwise, LimitStudyConfig,
};
use crate::orthogonality::{
    berg_admissible, berg_perturbed_gram, cd_kernel, corollary_check, cross_gram, dual_orthogonality, genfun_i,
    genfun_ii, laguerre_gram, m_gram, monomial_orth, prop52, Tolerance, VerificationReport,
};
use crate::qseries::{qdiff_residual_2phi1, shift_1phi1, theta_shift, transform_1phi1_heine, QContext, QDiffMode};
use crate::spectral::{
    eigen_residual, finite_section_eigenvalues, resolvent_residual, v_sol_at, wronskian, wronskian_closed_forms,
    Boundary, LatticeVector, OperatorSpec, Solution, SpectralPoint,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    QseriesIdentities,
    Operator,
    Theorem41,
    Dual,
    Corollary,
    Berg,
    Genfun,
    Bigjacobi,
    Limits,
    All,
}

impl Suite {
    /// Every suite that `All` runs, in run order.
    pub const EACH: [Suite; 9] = [
        Suite::QseriesIdentities,
        Suite::Operator,
        Suite::Theorem41,
        Suite::Dual,
        Suite::Corollary,
        Suite::Berg,
        Suite::Genfun,
        Suite::Bigjacobi,
        Suite::Limits,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::QseriesIdentities => "qseries-identities",
            Suite::Operator => "operator",
            Suite::Theorem41 => "theorem41",
            Suite::Dual => "dual",
            Suite::Corollary => "corollary",
            Suite::Berg => "berg",
            Suite::Genfun => "genfun",
            Suite::Bigjacobi => "bigjacobi",
            Suite::Limits => "limits",
            Suite::All => "all",
        }
    }

    /// Independent random stream for each suite, so a suite draws the same
    /// grid whether it runs alone or inside `all`.
    fn stream(self) -> u64 {
        self as u64 + 1
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = QError;
    fn from_str(s: &str) -> Result<Self> {
        Suite::EACH
            .iter()
            .chain(std::iter::once(&Suite::All))
            .find(|v| v.name() == s)
            .copied()
            .ok_or_else(|| QError::InvalidParameter(format!("unknown suite '{s}'")))
    }
}

/// User overrides of the per-check tolerances.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct ToleranceOverride {
    pub rtol: Option<f64>,
    pub atol: Option<f64>,
}

impl ToleranceOverride {
    fn apply(&self, t: Tolerance) -> Tolerance {
        Tolerance {
            rtol: self.rtol.unwrap_or(t.rtol),
            atol: self.atol.unwrap_or(t.atol),
        }
    }
}

/// Parameters shared by all suites.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteConfig {
    pub q: f64,
    pub alpha: f64,
    pub c: f64,
    /// Operator parameter; `q^{-α/2}` when absent.
    pub t: Option<f64>,
    pub max_terms: usize,
    pub seed: u64,
    pub r_values: Vec<i64>,
    pub tolerance: ToleranceOverride,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            q: 0.5,
            alpha: 0.25,
            c: 2.0,
            t: None,
            max_terms: 10_000,
            seed: 0,
            r_values: vec![10, 20, 30],
            tolerance: ToleranceOverride::default(),
        }
    }
}

impl SuiteConfig {
    pub fn ctx(&self) -> Result<QContext> {
        QContext::new(self.q)?.with_max_terms(self.max_terms)
    }

    pub fn measure(&self) -> Result<MeasureSpec> {
        MeasureSpec::new(self.alpha, self.c, self.ctx()?)
    }

    pub fn operator(&self) -> Result<OperatorSpec> {
        let ctx = self.ctx()?;
        match self.t {
            Some(t) => OperatorSpec::new(self.c, t, ctx),
            None => OperatorSpec::from_alpha(self.alpha, self.c, ctx),
        }
    }

    /// Checks the parameters once, so that suites only report numerical failures.
    pub fn validate(&self) -> Result<()> {
        self.measure()?;
        self.operator()?;
        if self.r_values.is_empty() {
            return Err(QError::InvalidParameter("at least one r is required".into()));
        }
        LimitStudyConfig::with_r_values(self.alpha, self.c, 0, 0, self.r_values.clone(), self.ctx()?)?;
        for v in [self.tolerance.rtol, self.tolerance.atol].into_iter().flatten() {
            if !(v >= 0.0) {
                return Err(QError::InvalidParameter(format!("tolerance {v} must be nonnegative")));
            }
        }
        Ok(())
    }

    fn tol(&self, rtol: f64, atol: f64) -> Tolerance {
        self.tolerance.apply(Tolerance { rtol, atol })
    }

    fn rng(&self, suite: Suite) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(suite.stream());
        r
    }
}

/// Collects reports, turning evaluation errors into failed reports.
struct Sink(Vec<VerificationReport>);

impl Sink {
    fn push(&mut self, name: &str, params: &[(&str, f64)], r: Result<VerificationReport>) {
        self.0.push(r.unwrap_or_else(|e| VerificationReport::failed(name, params, &e)));
    }

    fn pair(&mut self, name: &str, params: &[(&str, f64)], sides: Result<(f64, f64)>, tol: Tolerance) {
        let r = sides.map(|(l, r)| VerificationReport::new(name, params, l, r, r.abs(), tol));
        self.push(name, params, r);
    }
}

/// Runs one suite, or every suite for [`Suite::All`].
pub fn run_suite(suite: Suite, cfg: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    cfg.validate()?;
    if suite == Suite::All {
        let mut out = Vec::new();
        for s in Suite::EACH {
            out.extend(run_suite(s, cfg)?);
        }
        return Ok(out);
    }
    let mut sink = Sink(Vec::new());
    match suite {
        Suite::QseriesIdentities => qseries_identities(cfg, &mut sink)?,
        Suite::Operator => operator(cfg, &mut sink)?,
        Suite::Theorem41 => theorem41(cfg, &mut sink)?,
        Suite::Dual => dual(cfg, &mut sink)?,
        Suite::Corollary => corollary(cfg, &mut sink)?,
        Suite::Berg => berg(cfg, &mut sink)?,
        Suite::Genfun => genfun(cfg, &mut sink)?,
        Suite::Bigjacobi => bigjacobi(cfg, &mut sink)?,
        Suite::Limits => limits(cfg, &mut sink)?,
        Suite::All => unreachable!("handled above"),
    }
    for r in &mut sink.0 {
        r.name = format!("{}.{}", suite.name(), r.name);
    }
    Ok(sink.0)
}

/// Points drawn by the identity suite.
pub const IDENTITY_GRID: usize = 50;

fn qseries_identities(cfg: &SuiteConfig, sink: &mut Sink) -> Result<()> {
    let ctx = cfg.ctx()?;
    let q = ctx.q;
    let tol = cfg.tol(1e-10, 1e-10);
    let mut rng = cfg.rng(Suite::QseriesIdentities);
    // Parameters are drawn away from q^{-m}, where the products vanish and
    // the relative error of either side is meaningless.
    for _ in 0..IDENTITY_GRID {
        let a = if rng.gen_bool(0.5) {
            -rng.gen_range(0.2..3.0)
        } else {
            rng.gen_range(q + 0.05..0.95)
        };
        let k = rng.gen_range(-6..=6);
        sink.pair("theta_shift", &[("a", a), ("k", k as f64)], theta_shift(a, k, &ctx), tol);
    }
    for _ in 0..IDENTITY_GRID {
        let a = -rng.gen_range(0.2..2.0);
        let p = rng.gen_range(-4..=4);
        let z = rng.gen_range(-2.0..2.0);
        sink.pair(
            "shift_1phi1",
            &[("a", a), ("p", p as f64), ("z", z)],
            shift_1phi1(a, p, z, &ctx),
            tol,
        );
    }
    for _ in 0..IDENTITY_GRID {
        let a = rng.gen_range(-2.0..2.0);
        let c = rng.gen_range(-2.0..0.9);
        let z = rng.gen_range(-2.0..0.9);
        sink.pair(
            "transform_1phi1_heine",
            &[("a", a), ("c", c), ("z", z)],
            transform_1phi1_heine(a, c, z, &ctx),
            tol,
        );
    }
    for i in 0..IDENTITY_GRID {
        let (mode, zmax, label) = if i % 2 == 0 {
            (QDiffMode::Hypergeometric, 0.9 * q, "qdiff_residual_2phi1")
        } else {
            (QDiffMode::Confluent, 3.0, "qdiff_residual_1phi1")
        };
        let a = rng.gen_range(-2.0..2.0);
        let b = rng.gen_range(-2.0..2.0);
        let c = rng.gen_range(-2.0..0.9);
        let z = rng.gen_range(-zmax..zmax);
        let params = [("a", a), ("b", b), ("c", c), ("z", z)];
        let r = qdiff_residual_2phi1(a, b, c, z, mode, &ctx)
            .map(|res| VerificationReport::new(label, &params, res.value, 0.0, res.scale, tol));
        sink.push(label, &params, r);
    }
    Ok(())
}

fn operator(cfg: &SuiteConfig, sink: &mut Sink) -> Result<()> {
    let op = cfg.operator()?;
    let inv = 1.0 / op.t;
    let tol = cfg.tol(1e-10, 1e-10);
    let mut pts = vec![];
    for p in 0..=1 {
        if let Ok(pt) = SpectralPoint::eta(&op, p) {
            pts.push(pt);
        }
    }
    pts.extend((-1..=1).map(|p| SpectralPoint::xi(&op, p)));
    for pt in &pts {
        let v = LatticeVector::from_fn(-9, 9, |k| Ok(v_sol_at(&op, inv, k, pt)?.value));
        for k in -8..=8 {
            let params = [("branch", pt.branch as u8 as f64), ("p", pt.p as f64), ("x", pt.x), ("k", k as f64)];
            let r = v.clone().and_then(|v| {
                let res = eigen_residual(&op, &v, pt.x, k)?;
                Ok(VerificationReport::new("eigen_residual", &params, res.value, 0.0, res.scale, tol))
            });
            sink.push("eigen_residual", &params, r);
        }
    }
    // Small |x| and spectral points: both V solutions are then well separated
    // at -∞ and the Wronskian is free of cancellation.
    let mut wx = vec![0.3, -0.3];
    wx.extend(pts.iter().filter(|p| p.p <= 0).map(|p| p.x));
    for &x in &wx {
        let params = [("x", x)];
        let r = (|| {
            let vt = LatticeVector::solution(&op, Solution::VT, x, -11, 11)?;
            let vi = LatticeVector::solution(&op, Solution::VTinv, x, -11, 11)?;
            let w0 = wronskian(&op, &vt, &vi, 0)?;
            let mut worst = (0.0, w0);
            for k in -10..=10 {
                let w = wronskian(&op, &vt, &vi, k)?;
                if (w - w0).abs() >= (worst.1 - w0).abs() {
                    worst = (k as f64, w);
                }
            }
            let closed = wronskian_closed_forms(&op, x)?.vv;
            Ok(vec![
                VerificationReport::new(
                    "wronskian_constancy",
                    &[("x", x), ("k", worst.0)],
                    worst.1,
                    w0,
                    w0.abs(),
                    tol,
                ),
                VerificationReport::new("wronskian_closed_form", &params, w0, closed, closed.abs(), cfg.tol(1e-9, 1e-9)),
            ])
        })();
        match r {
            Ok(v) => sink.0.extend(v),
            Err(e) => sink.0.push(VerificationReport::failed("wronskian_constancy", &params, &e)),
        }
    }
    for &x in &[0.3, 0.9, -0.7] {
        for (label, sol) in [("wronskian_u_vt", Solution::VT), ("wronskian_u_vtinv", Solution::VTinv)] {
            let params = [("x", x)];
            let r = (|| {
                let u = LatticeVector::solution(&op, Solution::U, x, -11, 11)?;
                let v = LatticeVector::solution(&op, sol, x, -11, 11)?;
                let cw = wronskian_closed_forms(&op, x)?;
                let closed = if sol == Solution::VT { cw.uv } else { cw.uv_inv };
                let mut worst = (0.0, wronskian(&op, &u, &v, 0)?);
                for k in -10..=10 {
                    let w = wronskian(&op, &u, &v, k)?;
                    if (w - closed).abs() >= (worst.1 - closed).abs() {
                        worst = (k as f64, w);
                    }
                }
                Ok(VerificationReport::new(
                    label,
                    &[("x", x), ("k", worst.0)],
                    worst.1,
                    closed,
                    closed.abs(),
                    cfg.tol(1e-9, 1e-9),
                ))
            })();
            sink.push(label, &params, r);
        }
    }
    let xg = 0.5 * (SpectralPoint::xi(&op, 0).x + SpectralPoint::xi(&op, 1).x);
    for (m, j) in [(0, 0), (2, -1), (-3, -3), (4, 5)] {
        let params = [("x", xg), ("m", m as f64), ("j", j as f64)];
        let r = resolvent_residual(&op, m, j, xg)
            .map(|res| VerificationReport::new("resolvent", &params, res.value, 0.0, res.scale, cfg.tol(1e-8, 1e-8)));
        sink.push("resolvent", &params, r);
    }
    let targets: Vec<SpectralPoint> = [SpectralPoint::xi(&op, 0), SpectralPoint::xi(&op, 1)]
        .into_iter()
        .chain((0..=1).filter_map(|p| SpectralPoint::eta(&op, p).ok()))
        .collect();
    let mut prev = vec![f64::INFINITY; targets.len()];
    for kmax in [10, 20, 30] {
        let ev = finite_section_eigenvalues(&op, kmax, Boundary::Matched);
        for (i, pt) in targets.iter().enumerate() {
            let params = [("branch", pt.branch as u8 as f64), ("p", pt.p as f64), ("K", kmax as f64)];
            let ev = match &ev {
                Ok(ev) => ev,
                Err(e) => {
                    sink.0.push(VerificationReport::failed("finite_section", &params, e));
                    continue;
                }
            };
            let nearest = ev
                .iter()
                .copied()
                .min_by(|a, b| (a - pt.x).abs().total_cmp(&(b - pt.x).abs()))
                .unwrap_or(f64::NAN);
            let d = (nearest - pt.x).abs();
            if prev[i].is_finite() {
                sink.0.push(VerificationReport::upper_bound("finite_section_monotone", &params, d, prev[i]));
            }
            prev[i] = d;
            if kmax == 30 {
                sink.0.push(VerificationReport::upper_bound("finite_section_distance", &params, d, 1e-6));
            }
        }
    }
    Ok(())
}

fn theorem41(cfg: &SuiteConfig, sink: &mut Sink) -> Result<()> {
    let spec = cfg.measure()?;
    let tol = cfg.tol(1e-9, 1e-10);
    for n in 0..9 {
        for p in 0..9 {
            let params = [("n", n as f64), ("p", p as f64)];
            sink.push("laguerre_gram", &params, laguerre_gram(&spec, n, p, tol));
        }
    }
    for p in -4..=4 {
        for r in -4..=4 {
            let params = [("p", p as f64), ("r", r as f64)];
            sink.push("m_gram", &params, m_gram(&spec, p, r, tol));
        }
    }
    for p in -4..=4 {
        for n in 0..9 {
            let params = [("p", p as f64), ("n", n as f64)];
            sink.push("cross_gram", &params, cross_gram(&spec, p, n, tol));
        }
    }
    Ok(())
}

fn dual(cfg: &SuiteConfig, sink: &mut Sink) -> Result<()> {
    let op = cfg.operator()?;
    let tol = cfg.tol(1e-7, 1e-7);
    for k in -4..=4 {
        for l in -4..=4 {
            let params = [("k", k as f64), ("l", l as f64)];
            sink.push("dual_orthogonality", &params, dual_orthogonality(&op, k, l, tol));
        }
    }
    Ok(())
}

fn corollary(cfg: &SuiteConfig, sink: &mut Sink) -> Result<()> {
    let spec = cfg.measure()?;
    let tol = cfg.tol(1e-7, 1e-7);
    for k in -4..=4 {
        for l in -4..=4 {
            let params = [("k", k as f64), ("l", l as f64)];
            sink.push("corollary", &params, corollary_check(&spec, k, l, tol));
        }
    }
    let (x, y) = (spec.point(2), spec.point(3));
    for (px, py) in [(x, y), (x, x), (spec.point(-1), spec.point(4))] {
        for n in [0, 1, 5, 10, 20, 30] {
            let params = [("x", px), ("y", py), ("N", n as f64)];
            let r = cd_kernel(&spec, n, px, py).map(|k| {
                VerificationReport::new("cd_kernel", &params, k.partial_sum, k.cd_form, k.cd_form.abs(), cfg.tol(1e-10, 1e-10))
            });
            sink.push("cd_kernel", &params, r);
        }
    }
    let params = [("x", x), ("y", y), ("N", 60.0)];
    let r = cd_kernel(&spec, 60, x, y).map(|k| {
        VerificationReport::new("cd_kernel_limit", &params, k.cd_form, k.bessel_limit, k.bessel_limit.abs(), cfg.tol(1e-6, 1e-6))
    });
    sink.push("cd_kernel_limit", &params, r);
    Ok(())
}

fn berg(cfg: &SuiteConfig, sink: &mut Sink) -> Result<()> {
    let spec = cfg.measure()?;
    let tol = cfg.tol(1e-9, 1e-10);
    // The largest admissible p not above -2.
    let p = (-40..=-2).rev().find(|&p| berg_admissible(&spec, p)).ok_or_else(|| {
        QError::InvalidParameter("no admissible p for the perturbed measure".into())
    })?;
    for s in [-1.0, -0.5, 0.5, 1.0] {
        for n in 0..4 {
            for m in 0..4 {
                let params = [("s", s), ("p", p as f64), ("n", n as f64), ("m", m as f64)];
                sink.push("berg_perturbed_gram", &params, berg_perturbed_gram(&spec, s, p, n, m, tol));
            }
        }
    }
    Ok(())
}

/// Points drawn for each generating function.
pub const GENFUN_GRID: usize = 20;

fn genfun(cfg: &SuiteConfig, sink: &mut Sink) -> Result<()> {
    let spec = cfg.measure()?;
    let ctx = spec.ctx;
    let tol = cfg.tol(1e-10, 1e-10);
    let mut rng = cfg.rng(Suite::Genfun);
    // Negative x/z and y/w keep the right-hand products away from their zeros.
    for _ in 0..GENFUN_GRID {
        let a = rng.gen_range(-0.9..0.9);
        let b = rng.gen_range(0.5..1.5);
        let x = -rng.gen_range(0.05..0.8);
        // The lattice sum decays like (bz)^k, so bz stays well below 1.
        let z = rng.gen_range(0.2..0.6f64.min(0.7 / b));
        sink.pair("genfun_i", &[("a", a), ("b", b), ("x", x), ("z", z)], genfun_i(a, b, x, z, &ctx), tol);
    }
    for _ in 0..GENFUN_GRID {
        let d: f64 = rng.gen_range(-0.45..0.45);
        // Terms decay like w^r and (d/w)^{-r}; both ratios stay below 0.75.
        let w = rng.gen_range(d.abs() / 0.75..0.7) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let y = -w.signum() * rng.gen_range(0.0..0.7);
        sink.pair("genfun_ii", &[("d", d), ("y", y), ("w", w)], genfun_ii(d, y, w, &ctx), tol);
    }
    let (a, b, y) = (0.3, 0.8, 0.5);
    for d in [0.4, 2.5] {
        let scale = prop52(a, b, d, y, 0, &ctx).map(|s| s.1.abs()).unwrap_or(1.0);
        for l in -3..=5 {
            let params = [("a", a), ("b", b), ("d", d), ("y", y), ("l", l as f64)];
            let r = prop52(a, b, d, y, l, &ctx)
                .map(|(lhs, rhs)| VerificationReport::new("prop52", &params, lhs, rhs, scale, cfg.tol(1e-9, 1e-9)));
            sink.push("prop52", &params, r);
        }
    }
    for r in -2..=2 {
        for m in 0..=5 {
            let params = [("r", r as f64), ("m", m as f64)];
            sink.push("monomial_orth", &params, monomial_orth(&spec, r, m, tol));
        }
    }
    Ok(())
}

fn bigjacobi(cfg: &SuiteConfig, sink: &mut Sink) -> Result<()> {
    let ctx = cfg.ctx()?;
    let tol = cfg.tol(1e-9, 1e-10);
    let a0 = ctx.pow(cfg.alpha);
    for (a, b, c) in [(a0, 0.0, cfg.c), (0.7, 0.4, 1.5)] {
        let params = BigJacobiParams::new(a, b, c, &ctx)?;
        for k in 0..=6 {
            for l in 0..=6 {
                let p = [("a", a), ("b", b), ("c", c), ("k", k as f64), ("l", l as f64)];
                sink.push("bqj_orthogonality", &p, bqj_orthogonality(&params, k, l, &ctx, tol));
            }
        }
    }
    Ok(())
}

fn limits(cfg: &SuiteConfig, sink: &mut Sink) -> Result<()> {
    let ctx = cfg.ctx()?;
    let q = ctx.q;
    let tol = cfg.tol(1e-9, 1e-9);
    let study = |k: i64, l: i64| LimitStudyConfig::with_r_values(cfg.alpha, cfg.c, k, l, cfg.r_values.clone(), ctx);
    let r_top = *cfg.r_values.iter().max().expect("validated non-empty");
    for (k, l) in [(0, 0), (1, 1), (0, 1), (2, 0)] {
        let sc = study(k, l)?;
        for &r in &cfg.r_values {
            let params = [("k", k as f64), ("l", l as f64), ("r", r as f64)];
            let rep = finite_r_orth(&sc, r).map(|(lhs, rhs)| {
                let scale = if rhs != 0.0 { rhs.abs() } else { 1.0 };
                VerificationReport::new("finite_r_orth", &params, lhs, rhs, scale, tol)
            });
            sink.push("finite_r_orth", &params, rep);
        }
    }
    let sc = study(0, 0)?;
    for x in [1.0, q, q * q] {
        let params = [("k", 0.0), ("r", r_top as f64), ("x", x)];
        match limit_pointwise(&sc, r_top, x) {
            Ok(v) => {
                sink.0.push(VerificationReport::upper_bound(
                    "pointwise_limit",
                    &params,
                    (v.ptilde - v.bessel).abs(),
                    1e-6,
                ));
                sink.0.push(VerificationReport::upper_bound("pointwise_bound_ptilde", &params, v.ptilde.abs(), v.bound));
                sink.0.push(VerificationReport::upper_bound("pointwise_bound_bessel", &params, v.bessel.abs(), v.bound));
            }
            Err(e) => sink.0.push(VerificationReport::failed("pointwise_limit", &params, &e)),
        }
    }
    for k in [0, 2] {
        let sc = study(k, k)?;
        for r in [k, k + 5, k + 15] {
            for p in (-6i64).max(-r)..=-k {
                let params = [("k", k as f64), ("r", r as f64), ("p", p as f64)];
                match lattice_values(&sc, r, p) {
                    Ok(v) => {
                        sink.0.push(VerificationReport::new(
                            "lattice_ptilde",
                            &params,
                            v.ptilde_direct,
                            v.ptilde_2phi2,
                            v.ptilde_2phi2.abs(),
                            tol,
                        ));
                        sink.0.push(VerificationReport::new(
                            "lattice_bessel",
                            &params,
                            v.bessel_direct,
                            v.bessel_1phi2,
                            v.bessel_1phi2.abs(),
                            tol,
                        ));
                        let m = v.ptilde_direct.abs().max(v.ptilde_2phi2.abs());
                        sink.0.push(VerificationReport::upper_bound("lattice_bound_ptilde", &params, m, v.bound));
                        let m = v.bessel_direct.abs().max(v.bessel_1phi2.abs());
                        sink.0.push(VerificationReport::upper_bound("lattice_bound_bessel", &params, m, v.bound));
                    }
                    Err(e) => sink.0.push(VerificationReport::failed("lattice_values", &params, &e)),
                }
            }
        }
    }
    for (k, l) in [(0, 0), (1, 1), (0, 1), (-1, 1)] {
        let sc = study(k, l)?;
        let params = [("k", k as f64), ("l", l as f64)];
        sink.push("bessel_orthogonality", &params, eqe_check(&sc, tol).map(|mut r| {
            r.name = "bessel_orthogonality".into();
            r
        }));
        // Off the diagonal both sides vanish, so their difference is checked.
        let r = eqe_corollary_cross(&sc).map(|(a, b)| {
            let (computed, predicted) = if k == l { (a, b) } else { (a - b, 0.0) };
            VerificationReport::new("corollary_equivalence", &params, computed, predicted, 1.0, cfg.tol(1e-7, 1e-7))
        });
        sink.push("corollary_equivalence", &params, r);
    }
    let sc = study(0, 0)?;
    match convergence_study(&sc) {
        Ok(st) => {
            for w in st.rows.windows(2) {
                let params = [("k", 0.0), ("l", 0.0), ("r", w[1].r as f64)];
                sink.0.push(VerificationReport::upper_bound(
                    "convergence_distance",
                    &params,
                    w[1].total_distance,
                    w[0].total_distance + st.noise_floor,
                ));
            }
            let lnq = q.ln();
            sink.0.push(VerificationReport::upper_bound("decay_first_sum", &[("k", 0.0)], st.first_sum.slope, lnq + 0.01));
            sink.0.push(VerificationReport::upper_bound("decay_second_sum", &[("k", 0.0)], st.second_sum.slope, lnq + 0.01));
            sink.0.push(VerificationReport::upper_bound(
                "decay_fourth_sum_quadratic",
                &[("k", 0.0)],
                st.fourth_sum_quadratic,
                0.0,
            ));
        }
        Err(e) => sink.0.push(VerificationReport::failed("convergence", &[], &e)),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::EACH.iter().chain([Suite::All].iter()) {
            assert_eq!(s.name().parse::<Suite>().unwrap(), *s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn identity_suite_passes_and_is_reproducible() {
        let cfg = SuiteConfig::default();
        let a = run_suite(Suite::QseriesIdentities, &cfg).unwrap();
        assert_eq!(a.len(), 4 * IDENTITY_GRID);
        for r in &a {
            assert!(r.pass, "{r:?}");
        }
        let b = run_suite(Suite::QseriesIdentities, &cfg).unwrap();
        assert_eq!(a, b);
        let other = SuiteConfig { seed: 7, ..SuiteConfig::default() };
        assert_ne!(a, run_suite(Suite::QseriesIdentities, &other).unwrap());
    }

    #[test]
    fn overrides_replace_tolerances() {
        let cfg = SuiteConfig {
            tolerance: ToleranceOverride { rtol: Some(1e-30), atol: Some(0.0) },
            ..SuiteConfig::default()
        };
        let r = run_suite(Suite::Bigjacobi, &cfg).unwrap();
        assert!(r.iter().any(|r| !r.pass));
    }

    #[test]
    fn invalid_config_is_an_error() {
        let cfg = SuiteConfig { c: -1.0, ..SuiteConfig::default() };
        assert!(run_suite(Suite::Dual, &cfg).is_err());
        let cfg = SuiteConfig { r_values: vec![20, 10], ..SuiteConfig::default() };
        assert!(run_suite(Suite::Limits, &cfg).is_err());
    }
}
