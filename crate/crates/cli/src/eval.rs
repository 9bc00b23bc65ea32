//! Name-based dispatch of `eval` to the library operations.

use qortho::families::{
    big_qbessel, big_qjacobi, big_qjacobi_tilde, jackson_j2, m_func, q_laguerre, BigJacobiParams, MForm, MeasureSpec,
};
use qortho::limits::{
    bqj_orthogonality, convergence_study, eqe_check, finite_r_orth, lattice_values, limit_pointwise,
    LimitStudyConfig,
};
use qortho::orthogonality::{
    berg_perturbed_gram, cd_kernel, corollary_check, cross_gram, dual_orthogonality, functional_l, genfun_i,
    genfun_ii, hankel_identity, laguerre_fn, laguerre_gram, m_fn, m_gram, monomial_fn, monomial_orth, prop52,
    weight, Tolerance, VerificationReport,
};
use qortho::qseries::{
    jackson_qintegral, qdiff_residual_2phi1, qpoch_finite, qpoch_inf, qpoch_multi, shift_1phi1, theta_shift,
    transform_1phi1_heine, QDiffMode,
};
use qortho::spectral::{
    apply_l, big_c, c_func, coeffs, connection_residual, degenerate_t_relation, ell2_tail_check, eta_norm,
    eta_weight, finite_section_eigenvalues, green_function, spectrum, u_sol, v_sol, wronskian,
    wronskian_closed_forms, xi_norm, xi_weight, Boundary, Direction, LatticeVector, OperatorSpec, Solution,
};
use qortho::{LogReal, PhiSpec, QContext, QError, Result, SeriesValue};
use serde_json::Value;

use crate::params::Params;

/// Global settings that supply defaults for the per-call parameters.
#[derive(Clone, Debug)]
pub struct Env {
    pub ctx: QContext,
    pub alpha: f64,
    pub c: f64,
    pub t: Option<f64>,
    pub tol: Tolerance,
    pub r_values: Option<Vec<i64>>,
}

/// What an evaluated function returns.
#[derive(Clone, Debug)]
pub enum Evaluated {
    Value(SeriesValue),
    Named(Vec<(&'static str, f64)>),
    Report(VerificationReport),
    Structured(Value),
}

/// Every name accepted by [`evaluate`].
pub const FUNCTIONS: &[&str] = &[
    "qpoch_finite",
    "qpoch_inf",
    "qpoch_multi",
    "phi_rs",
    "theta_shift",
    "shift_1phi1",
    "transform_1phi1_heine",
    "qdiff_residual_2phi1",
    "jackson_qintegral",
    "q_laguerre",
    "m_func",
    "jackson_j2",
    "big_qbessel",
    "big_qjacobi",
    "big_qjacobi_tilde",
    "coeffs",
    "apply_L",
    "v_sol",
    "u_sol",
    "c_func",
    "big_C",
    "connection_residual",
    "degenerate_t_relation",
    "wronskian",
    "wronskian_closed_forms",
    "green_function",
    "spectrum",
    "eta_norm",
    "xi_norm",
    "eta_weight",
    "xi_weight",
    "finite_section_eigenvalues",
    "ell2_tail_check",
    "weight",
    "functional_L",
    "laguerre_gram",
    "m_gram",
    "cross_gram",
    "monomial_orth",
    "hankel_identity",
    "dual_orthogonality",
    "cd_kernel",
    "corollary_check",
    "berg_perturbed_gram",
    "genfun_i",
    "genfun_ii",
    "prop52",
    "bqj_orthogonality",
    "finite_r_orth",
    "limit_pointwise",
    "lattice_values",
    "eqe_check",
    "convergence_study",
];

impl Env {
    pub fn measure(&self, p: &Params) -> Result<MeasureSpec> {
        MeasureSpec::new(p.f64_or("alpha", self.alpha)?, p.f64_or("c", self.c)?, self.ctx)
    }

    pub fn operator(&self, p: &Params) -> Result<OperatorSpec> {
        let c = p.f64_or("c", self.c)?;
        match p.opt_f64("t")?.or(self.t) {
            Some(t) => OperatorSpec::new(c, t, self.ctx),
            None => OperatorSpec::from_alpha(p.f64_or("alpha", self.alpha)?, c, self.ctx),
        }
    }

    fn limit_config(&self, p: &Params, k: i64, l: i64) -> Result<LimitStudyConfig> {
        let (alpha, c) = (p.f64_or("alpha", self.alpha)?, p.f64_or("c", self.c)?);
        match &self.r_values {
            Some(r) => LimitStudyConfig::with_r_values(alpha, c, k, l, r.clone(), self.ctx),
            None => LimitStudyConfig::new(alpha, c, k, l, self.ctx),
        }
    }
}

fn scaled(v: qortho::Scaled) -> Evaluated {
    Evaluated::Value(v.to_series())
}

fn pair((lhs, rhs): (f64, f64)) -> Evaluated {
    Evaluated::Named(vec![("lhs", lhs), ("rhs", rhs)])
}

fn solution(word: &str) -> Result<Solution> {
    match word {
        "VT" | "Vt" | "v_t" => Ok(Solution::VT),
        "VTinv" | "Vtinv" | "v_tinv" => Ok(Solution::VTinv),
        "U" | "u" => Ok(Solution::U),
        _ => Err(QError::InvalidParameter(format!("solution '{word}' is not one of VT, VTinv, U"))),
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> Evaluated {
    Evaluated::Structured(serde_json::to_value(v).unwrap_or(Value::Null))
}

/// Index window used to materialise lattice vectors around `k`.
const VECTOR_HALF_WIDTH: i64 = 2;

/// Evaluates `name` with the given parameters.
pub fn evaluate(name: &str, p: &Params, env: &Env) -> Result<Evaluated> {
    let ctx = &env.ctx;
    let out = match name {
        "qpoch_finite" => Evaluated::Named(vec![("value", qpoch_finite(p.f64("a")?, p.usize("n")?, ctx))]),
        "qpoch_inf" => Evaluated::Value(qpoch_inf(p.f64("a")?, ctx)?),
        "qpoch_multi" => Evaluated::Value(qpoch_multi(&p.list("a")?, ctx)?),
        "phi_rs" => {
            let spec = PhiSpec::new(&p.list("upper")?, &p.list("lower")?, p.f64("z")?);
            Evaluated::Value(qortho::qseries::phi_rs(&spec, ctx)?)
        }
        "theta_shift" => pair(theta_shift(p.f64("a")?, p.i64("k")?, ctx)?),
        "shift_1phi1" => pair(shift_1phi1(p.f64("a")?, p.i64("p")?, p.f64("z")?, ctx)?),
        "transform_1phi1_heine" => pair(transform_1phi1_heine(p.f64("a")?, p.f64("c")?, p.f64("z")?, ctx)?),
        "qdiff_residual_2phi1" => {
            let mode = match p.word_or("mode", "hypergeometric") {
                "hypergeometric" => QDiffMode::Hypergeometric,
                "confluent" => QDiffMode::Confluent,
                m => return Err(QError::InvalidParameter(format!("mode '{m}' is not hypergeometric or confluent"))),
            };
            let b = if mode == QDiffMode::Confluent { p.f64_or("b", 0.0)? } else { p.f64("b")? };
            let r = qdiff_residual_2phi1(p.f64("a")?, b, p.f64("c")?, p.f64("z")?, mode, ctx)?;
            Evaluated::Named(vec![("residual", r.value), ("scale", r.scale), ("relative", r.relative())])
        }
        "jackson_qintegral" => {
            // Integrand x^m.
            let m = p.i64_or("m", 0)?;
            let m = i32::try_from(m).map_err(|_| QError::InvalidParameter(format!("m = {m} out of range")))?;
            let v = jackson_qintegral(|x| Ok(x.powi(m)), p.f64("a_end")?, p.f64("c_end")?, ctx)?;
            Evaluated::Value(v)
        }
        "q_laguerre" => Evaluated::Value(q_laguerre(p.usize("n")?, p.f64_or("alpha", env.alpha)?, p.f64("x")?, ctx)?),
        "m_func" => {
            let form = match p.word_or("form", "auto") {
                "A" | "a" => MForm::A,
                "B" | "b" => MForm::B,
                "auto" => MForm::Auto,
                f => return Err(QError::InvalidParameter(format!("form '{f}' is not A, B or auto"))),
            };
            Evaluated::Value(m_func(p.i64("p")?, &env.measure(p)?, p.f64("x")?, form)?)
        }
        "jackson_j2" => Evaluated::Value(jackson_j2(p.f64_or("alpha", env.alpha)?, p.f64("x")?, ctx)?),
        "big_qbessel" => Evaluated::Value(big_qbessel(
            p.f64_or("alpha", env.alpha)?,
            p.i64("k")?,
            p.f64_or("c", env.c)?,
            p.f64("x")?,
            ctx,
        )?),
        "big_qjacobi" => {
            let params = BigJacobiParams::new(p.f64("a")?, p.f64_or("b", 0.0)?, p.f64_or("c", env.c)?, ctx)?;
            Evaluated::Value(big_qjacobi(p.usize("k")?, &params, p.f64("x")?, ctx)?)
        }
        "big_qjacobi_tilde" => Evaluated::Value(big_qjacobi_tilde(
            p.usize("k")?,
            p.f64("a")?,
            p.f64_or("c", env.c)?,
            p.f64("x")?,
            ctx,
        )?),
        "coeffs" => {
            let (a, b) = coeffs(&env.operator(p)?, p.i64("k")?);
            Evaluated::Named(vec![("a_k", a), ("b_k", b)])
        }
        "apply_L" => {
            let op = env.operator(p)?;
            let (sol, x, k) = (solution(p.word_or("solution", "VTinv"))?, p.f64("x")?, p.i64("k")?);
            let u = LatticeVector::solution(&op, sol, x, k - VECTOR_HALF_WIDTH, k + VECTOR_HALF_WIDTH)?;
            Evaluated::Named(vec![("value", apply_l(&op, &u, k)?), ("x_times_u", x * u.value(k)?)])
        }
        "v_sol" => scaled(v_sol(&env.operator(p)?, p.f64("s")?, p.i64("k")?, p.f64("x")?)?),
        "u_sol" => scaled(u_sol(&env.operator(p)?, p.i64("k")?, p.f64("x")?)?),
        "c_func" => scaled(c_func(&env.operator(p)?, p.f64("s")?, p.f64("x")?)?),
        "big_C" => scaled(big_c(&env.operator(p)?, p.f64("s")?)?),
        "connection_residual" => {
            let r = connection_residual(&env.operator(p)?, p.f64("x")?, p.i64("k")?)?;
            Evaluated::Named(vec![("residual", r.value), ("scale", r.scale), ("relative", r.relative())])
        }
        "degenerate_t_relation" => pair(degenerate_t_relation(
            &env.operator(p)?,
            p.i64("m")?,
            p.f64_or("sign", 1.0)?,
            p.i64("k")?,
            p.f64("x")?,
        )?),
        "wronskian" => {
            let op = env.operator(p)?;
            let (x, k) = (p.f64("x")?, p.i64("k")?);
            let (lo, hi) = (k - VECTOR_HALF_WIDTH, k + VECTOR_HALF_WIDTH);
            let u = LatticeVector::solution(&op, solution(p.word_or("u", "VT"))?, x, lo, hi)?;
            let v = LatticeVector::solution(&op, solution(p.word_or("v", "VTinv"))?, x, lo, hi)?;
            Evaluated::Named(vec![("value", wronskian(&op, &u, &v, k)?)])
        }
        "wronskian_closed_forms" => {
            let w = wronskian_closed_forms(&env.operator(p)?, p.f64("x")?)?;
            Evaluated::Named(vec![
                ("w_vv", w.vv),
                ("w_vv_three_factor", w.vv_three_factor),
                ("w_uv", w.uv),
                ("w_uv_inv", w.uv_inv),
            ])
        }
        "green_function" => Evaluated::Named(vec![(
            "value",
            green_function(&env.operator(p)?, p.i64("m")?, p.i64("n")?, p.f64("x")?)?,
        )]),
        "spectrum" => to_json(&spectrum(&env.operator(p)?, p.i64_or("p_min", -3)?, p.i64_or("p_max", 5)?)),
        "eta_norm" => Evaluated::Named(vec![("value", eta_norm(&env.operator(p)?, p.i64("p")?)?)]),
        "xi_norm" => Evaluated::Named(vec![("value", xi_norm(&env.operator(p)?, p.i64("p")?)?)]),
        "eta_weight" => Evaluated::Named(vec![("value", eta_weight(&env.operator(p)?, p.i64("p")?)?)]),
        "xi_weight" => Evaluated::Named(vec![("value", xi_weight(&env.operator(p)?, p.i64("p")?)?)]),
        "finite_section_eigenvalues" => {
            let boundary = match p.word_or("boundary", "matched") {
                "matched" => Boundary::Matched,
                "dirichlet" => Boundary::Dirichlet,
                b => return Err(QError::InvalidParameter(format!("boundary '{b}' is not matched or dirichlet"))),
            };
            to_json(&finite_section_eigenvalues(&env.operator(p)?, p.i64("K")?, boundary)?)
        }
        "ell2_tail_check" => {
            let direction = match p.word_or("direction", "+") {
                "+" | "plus" | "+inf" => Direction::PlusInfinity,
                "-" | "minus" | "-inf" => Direction::MinusInfinity,
                d => return Err(QError::InvalidParameter(format!("direction '{d}' is not + or -"))),
            };
            let sol = solution(p.word_or("solution", "VTinv"))?;
            to_json(&ell2_tail_check(&env.operator(p)?, sol, p.f64("x")?, direction, p.i64_or("window", 10)?)?)
        }
        "weight" => Evaluated::Value(SeriesValue::exact(weight(&env.measure(p)?, p.i64("k")?)?.to_f64())),
        "functional_L" => {
            let spec = env.measure(p)?;
            let f = lattice_fn(&spec, p.word_or("f", "laguerre"), p.i64_or("i", 0)?)?;
            let g = lattice_fn(&spec, p.word_or("g", "laguerre"), p.i64_or("j", 0)?)?;
            let s = functional_l(&spec, f, g)?;
            scaled(s.sum)
        }
        "laguerre_gram" => Evaluated::Report(laguerre_gram(&env.measure(p)?, p.i64("n")?, p.i64("p")?, env.tol)?),
        "m_gram" => Evaluated::Report(m_gram(&env.measure(p)?, p.i64("p")?, p.i64("r")?, env.tol)?),
        "cross_gram" => Evaluated::Report(cross_gram(&env.measure(p)?, p.i64("p")?, p.i64("n")?, env.tol)?),
        "monomial_orth" => {
            let m = p.usize("m")?;
            let m = u32::try_from(m).map_err(|_| QError::InvalidParameter(format!("m = {m} out of range")))?;
            Evaluated::Report(monomial_orth(&env.measure(p)?, p.i64("r")?, m, env.tol)?)
        }
        "hankel_identity" => {
            let h = hankel_identity(&env.measure(p)?, p.i64("p")?, p.i64("r")?)?;
            Evaluated::Named(vec![("lhs1", h.lhs1), ("mid", h.mid), ("lhs2", h.lhs2)])
        }
        "dual_orthogonality" => {
            Evaluated::Report(dual_orthogonality(&env.operator(p)?, p.i64("k")?, p.i64("l")?, env.tol)?)
        }
        "cd_kernel" => {
            let k = cd_kernel(&env.measure(p)?, p.usize("N")?, p.f64("x")?, p.f64("y")?)?;
            Evaluated::Named(vec![
                ("partial_sum", k.partial_sum),
                ("cd_form", k.cd_form),
                ("bessel_limit", k.bessel_limit),
            ])
        }
        "corollary_check" => Evaluated::Report(corollary_check(&env.measure(p)?, p.i64("k")?, p.i64("l")?, env.tol)?),
        "berg_perturbed_gram" => Evaluated::Report(berg_perturbed_gram(
            &env.measure(p)?,
            p.f64("s")?,
            p.i64("p")?,
            p.i64("n")?,
            p.i64("m")?,
            env.tol,
        )?),
        "genfun_i" => pair(genfun_i(p.f64("a")?, p.f64("b")?, p.f64("x")?, p.f64("z")?, ctx)?),
        "genfun_ii" => pair(genfun_ii(p.f64("d")?, p.f64("y")?, p.f64("w")?, ctx)?),
        "prop52" => pair(prop52(p.f64("a")?, p.f64("b")?, p.f64("d")?, p.f64("y")?, p.i64("l")?, ctx)?),
        "bqj_orthogonality" => {
            let a = p.f64_or("a", ctx.pow(env.alpha))?;
            let params = BigJacobiParams::new(a, p.f64_or("b", 0.0)?, p.f64_or("c", env.c)?, ctx)?;
            Evaluated::Report(bqj_orthogonality(&params, p.usize("k")?, p.usize("l")?, ctx, env.tol)?)
        }
        "finite_r_orth" => {
            let cfg = env.limit_config(p, p.i64("k")?, p.i64("l")?)?;
            pair(finite_r_orth(&cfg, p.i64("r")?)?)
        }
        "limit_pointwise" => {
            let cfg = env.limit_config(p, p.i64("k")?, 0)?;
            let v = limit_pointwise(&cfg, p.i64("r")?, p.f64("x")?)?;
            Evaluated::Named(vec![("ptilde", v.ptilde), ("bessel", v.bessel), ("bound", v.bound)])
        }
        "lattice_values" => {
            let cfg = env.limit_config(p, p.i64("k")?, 0)?;
            let v = lattice_values(&cfg, p.i64("r")?, p.i64("p")?)?;
            Evaluated::Named(vec![
                ("ptilde_2phi2", v.ptilde_2phi2),
                ("ptilde_direct", v.ptilde_direct),
                ("bessel_1phi2", v.bessel_1phi2),
                ("bessel_direct", v.bessel_direct),
                ("bound", v.bound),
            ])
        }
        "eqe_check" | "bessel_orthogonality" => {
            let cfg = env.limit_config(p, p.i64("k")?, p.i64("l")?)?;
            Evaluated::Report(eqe_check(&cfg, env.tol)?)
        }
        "convergence_study" => {
            let cfg = env.limit_config(p, p.i64_or("k", 0)?, p.i64_or("l", 0)?)?;
            to_json(&convergence_study(&cfg)?)
        }
        _ => return Err(QError::UnknownFunction(name.to_string())),
    };
    p.finish()?;
    Ok(out)
}

type LatticeFn<'a> = Box<dyn Fn(i64) -> Result<LogReal> + 'a>;

fn lattice_fn<'a>(spec: &'a MeasureSpec, kind: &str, index: i64) -> Result<LatticeFn<'a>> {
    let nonneg = |what: &str| {
        u32::try_from(index).map_err(|_| QError::InvalidParameter(format!("{what} index {index} must be nonnegative")))
    };
    Ok(match kind {
        "laguerre" => Box::new(laguerre_fn(spec, nonneg("laguerre")? as usize)),
        "m" => Box::new(m_fn(spec, index)),
        "monomial" => Box::new(monomial_fn(spec, nonneg("monomial")?)),
        _ => {
            return Err(QError::InvalidParameter(format!(
                "lattice function '{kind}' is not laguerre, m or monomial"
            )))
        }
    })
}
