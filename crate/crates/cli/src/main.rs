//! `qortho`: evaluate q-special functions, run verification suites and
//! tabulate families.

mod eval;
mod output;
mod params;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use qortho::orthogonality::Tolerance;
use qortho::suites::{run_suite, Suite, SuiteConfig, ToleranceOverride};
use qortho::{QContext, QError};

use eval::{evaluate, Env, Evaluated};
use output::Format;
use params::Params;

#[derive(Parser, Debug)]
#[command(name = "qortho", version, about = "q-Laguerre, M-function and big q-Bessel numerics with orthogonality checks")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Base q in (0, 1).
    #[arg(long, global = true, default_value_t = 0.5, allow_negative_numbers = true)]
    q: f64,
    /// Measure parameter alpha > -1.
    #[arg(long, global = true, default_value_t = 0.25, allow_negative_numbers = true)]
    alpha: f64,
    /// Lattice parameter c > 0.
    #[arg(long, global = true, default_value_t = 2.0, allow_negative_numbers = true)]
    c: f64,
    /// Operator parameter t; defaults to q^(-alpha/2).
    #[arg(long, global = true, allow_negative_numbers = true)]
    t: Option<f64>,
    /// Relative tolerance replacing each check's default.
    #[arg(long, global = true)]
    rtol: Option<f64>,
    /// Absolute tolerance (times the check's scale) replacing each check's default.
    #[arg(long, global = true)]
    atol: Option<f64>,
    /// Cap on series terms.
    #[arg(long, global = true, env = "QORTHO_MAX_TERMS", default_value_t = 10_000)]
    max_terms: usize,
    /// Output format; text for eval and verify, csv for table when absent.
    #[arg(long, global = true, value_enum)]
    output: Option<Format>,
    /// Write the output to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for the randomized parameter grids.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Comma-separated r values for the limit checks.
    #[arg(long = "r", global = true, value_delimiter = ',', allow_negative_numbers = true)]
    r: Option<Vec<i64>>,
    /// Record wall time in the verify summary (makes output run-dependent).
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate one function, e.g. `eval q_laguerre n=2 x=1.5`.
    Eval {
        function: String,
        /// Parameters as key=value.
        params: Vec<String>,
    },
    /// Run a verification suite: qseries-identities, operator, theorem41,
    /// dual, corollary, berg, genfun, bigjacobi, limits or all.
    Verify { suite: String },
    /// Tabulate a family: q_laguerre, m_func, jackson_j2, big_qbessel, weight or spectrum.
    Table {
        family: String,
        /// Parameters as key=value (k_min, k_max, n, p, j, p_min, p_max, ...).
        params: Vec<String>,
    },
    /// List the functions accepted by `eval`.
    Functions,
}

/// Exit status for all checks passing.
const EXIT_PASS: u8 = 0;
/// Exit status for a failed check or a numerical failure.
const EXIT_FAIL: u8 = 1;
/// Exit status for usage and parameter errors.
const EXIT_USAGE: u8 = 2;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e} [{}]", e.kind());
            ExitCode::from(if e.is_parameter_error() { EXIT_USAGE } else { EXIT_FAIL })
        }
    }
}

fn suite_config(g: &Global) -> SuiteConfig {
    let mut cfg = SuiteConfig {
        q: g.q,
        alpha: g.alpha,
        c: g.c,
        t: g.t,
        max_terms: g.max_terms,
        seed: g.seed,
        tolerance: ToleranceOverride {
            rtol: g.rtol,
            atol: g.atol,
        },
        ..SuiteConfig::default()
    };
    if let Some(r) = &g.r {
        cfg.r_values = r.clone();
    }
    cfg
}

fn env(g: &Global) -> Result<Env, QError> {
    let ctx = QContext::new(g.q)?.with_max_terms(g.max_terms)?;
    let d = Tolerance::default();
    Ok(Env {
        ctx,
        alpha: g.alpha,
        c: g.c,
        t: g.t,
        tol: Tolerance {
            rtol: g.rtol.unwrap_or(d.rtol),
            atol: g.atol.unwrap_or(d.atol),
        },
        r_values: g.r.clone(),
    })
}

fn emit(g: &Global, text: &str) -> Result<(), QError> {
    match &g.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| QError::InvalidParameter(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> Result<u8, QError> {
    let g = &cli.global;
    match &cli.command {
        Command::Eval { function, params } => {
            let p = Params::parse(params)?;
            let out = evaluate(function, &p, &env(g)?)?;
            emit(g, &output::render_eval(function, p.raw(), &out, g.output.unwrap_or(Format::Text)))?;
            Ok(match out {
                Evaluated::Report(r) if !r.pass => EXIT_FAIL,
                _ => EXIT_PASS,
            })
        }
        Command::Verify { suite } => {
            let suite: Suite = suite.parse()?;
            let cfg = suite_config(g);
            let t = cfg.operator()?.t;
            let start = Instant::now();
            let reports = run_suite(suite, &cfg)?;
            let wall = g.timing.then(|| start.elapsed().as_secs_f64() * 1e3);
            let fmt = g.output.unwrap_or(Format::Text);
            emit(g, &output::render_verify(suite.name(), &cfg, t, &reports, wall, fmt))?;
            let passed = reports.iter().filter(|r| r.pass).count();
            if g.out.is_some() {
                eprintln!("{}: {passed}/{} passed", suite.name(), reports.len());
            }
            Ok(if passed == reports.len() { EXIT_PASS } else { EXIT_FAIL })
        }
        Command::Table { family, params } => {
            let p = Params::parse(params)?;
            let t = table::tabulate(family, &p, &env(g)?)?;
            let text = match g.output.unwrap_or(Format::Csv) {
                Format::Json => t.to_json(),
                Format::Csv | Format::Text => t.to_csv(),
            };
            emit(g, &text)?;
            Ok(EXIT_PASS)
        }
        Command::Functions => {
            let mut s = eval::FUNCTIONS.join("\n");
            s.push('\n');
            emit(g, &s)?;
            Ok(EXIT_PASS)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn r_list_and_negative_values_parse() {
        let cli = Cli::try_parse_from(["qortho", "verify", "limits", "--r", "10,20,30", "--alpha", "-0.5"]).unwrap();
        assert_eq!(cli.global.r, Some(vec![10, 20, 30]));
        assert_eq!(cli.global.alpha, -0.5);
        let cli = Cli::try_parse_from(["qortho", "eval", "q_laguerre", "n=1", "x=-2"]).unwrap();
        match cli.command {
            Command::Eval { params, .. } => assert_eq!(params, vec!["n=1", "x=-2"]),
            other => panic!("{other:?}"),
        }
    }
}
