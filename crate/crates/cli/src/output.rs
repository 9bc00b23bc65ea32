//! JSON, CSV and text rendering of reports and evaluations.

use std::collections::BTreeMap;

use clap::ValueEnum;
use qortho::orthogonality::VerificationReport;
use qortho::suites::SuiteConfig;
use serde_json::{json, Map, Value};

use crate::eval::Evaluated;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

/// Report fields in output order.
pub const REPORT_FIELDS: [&str; 8] = [
    "name",
    "params",
    "computed",
    "predicted",
    "abs_err",
    "rel_err",
    "cancellation",
    "pass",
];

pub fn report_json(r: &VerificationReport) -> Value {
    let mut m = Map::new();
    m.insert("name".into(), json!(r.name));
    m.insert("params".into(), json!(r.params));
    m.insert("computed".into(), json!(r.computed));
    m.insert("predicted".into(), json!(r.predicted));
    m.insert("abs_err".into(), json!(r.abs_err));
    m.insert("rel_err".into(), json!(r.rel_err));
    m.insert("cancellation".into(), json!(r.cancellation));
    m.insert("pass".into(), json!(r.pass));
    if let Some(e) = &r.error {
        m.insert("error".into(), json!(e));
    }
    Value::Object(m)
}

fn config_json(cfg: &SuiteConfig, t: f64) -> Value {
    json!({
        "q": cfg.q,
        "alpha": cfg.alpha,
        "c": cfg.c,
        "t": t,
        "rtol": cfg.tolerance.rtol,
        "atol": cfg.tolerance.atol,
        "max_terms": cfg.max_terms,
        "seed": cfg.seed,
        "r_values": cfg.r_values,
    })
}

fn params_text(p: &BTreeMap<String, f64>) -> String {
    p.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";")
}

fn num(v: f64) -> String {
    format!("{v:e}")
}

fn csv_string(rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        // Writing to memory only fails on invalid UTF-8, which cannot occur here.
        w.write_record(&row).expect("in-memory CSV write");
    }
    String::from_utf8(w.into_inner().expect("in-memory CSV flush")).expect("CSV is UTF-8")
}

/// Verification run in the requested format.
pub fn render_verify(
    suite: &str,
    cfg: &SuiteConfig,
    t: f64,
    reports: &[VerificationReport],
    wall_time_ms: Option<f64>,
    fmt: Format,
) -> String {
    let passed = reports.iter().filter(|r| r.pass).count();
    match fmt {
        Format::Json => {
            let v = json!({
                "suite": suite,
                "config": config_json(cfg, t),
                "reports": reports.iter().map(report_json).collect::<Vec<_>>(),
                "summary": {
                    "total": reports.len(),
                    "passed": passed,
                    "wall_time_ms": wall_time_ms,
                },
            });
            let mut s = serde_json::to_string_pretty(&v).expect("JSON values serialize");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut rows = vec![std::iter::once("suite")
                .chain(REPORT_FIELDS)
                .chain(std::iter::once("error"))
                .map(String::from)
                .collect()];
            for r in reports {
                rows.push(vec![
                    suite.to_string(),
                    r.name.clone(),
                    params_text(&r.params),
                    num(r.computed),
                    num(r.predicted),
                    num(r.abs_err),
                    num(r.rel_err),
                    num(r.cancellation),
                    r.pass.to_string(),
                    r.error.clone().unwrap_or_default(),
                ]);
            }
            csv_string(rows)
        }
        Format::Text => {
            let mut s = String::new();
            for r in reports {
                s.push_str(&report_line(r));
                s.push('\n');
            }
            s.push_str(&format!("{suite}: {passed}/{} passed", reports.len()));
            if let Some(ms) = wall_time_ms {
                s.push_str(&format!(" in {ms:.1} ms"));
            }
            s.push('\n');
            s
        }
    }
}

pub fn report_line(r: &VerificationReport) -> String {
    let status = if r.pass { "PASS" } else { "FAIL" };
    let mut s = format!(
        "{status} {} [{}] computed={} predicted={} abs_err={} rel_err={}",
        r.name,
        params_text(&r.params),
        num(r.computed),
        num(r.predicted),
        num(r.abs_err),
        num(r.rel_err)
    );
    if let Some(e) = &r.error {
        s.push_str(&format!(" error=\"{e}\""));
    }
    s
}

/// Result of `eval` in the requested format.
pub fn render_eval(function: &str, params: &BTreeMap<String, String>, out: &Evaluated, fmt: Format) -> String {
    match fmt {
        Format::Json => {
            let mut m = Map::new();
            m.insert("function".into(), json!(function));
            m.insert("params".into(), json!(params));
            match out {
                Evaluated::Value(v) => {
                    m.insert("value".into(), json!(v.value));
                    m.insert("abs_err".into(), json!(v.abs_err));
                    m.insert("n_terms".into(), json!(v.n_terms));
                    m.insert("cancellation".into(), json!(v.cancellation));
                }
                Evaluated::Named(vals) => {
                    let vals: Map<String, Value> = vals.iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
                    m.insert("values".into(), Value::Object(vals));
                }
                Evaluated::Report(r) => {
                    m.insert("report".into(), report_json(r));
                }
                Evaluated::Structured(v) => {
                    m.insert("result".into(), v.clone());
                }
            }
            let mut s = serde_json::to_string_pretty(&Value::Object(m)).expect("JSON values serialize");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut rows = vec![vec!["key".to_string(), "value".to_string()]];
            for (k, v) in key_values(out) {
                rows.push(vec![k, v]);
            }
            csv_string(rows)
        }
        Format::Text => match out {
            Evaluated::Report(r) => report_line(r) + "\n",
            Evaluated::Structured(v) => serde_json::to_string_pretty(v).expect("JSON values serialize") + "\n",
            _ => key_values(out).into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect(),
        },
    }
}

fn key_values(out: &Evaluated) -> Vec<(String, String)> {
    match out {
        Evaluated::Value(v) => vec![
            ("value".into(), num(v.value)),
            ("abs_err".into(), num(v.abs_err)),
            ("n_terms".into(), v.n_terms.to_string()),
            ("cancellation".into(), num(v.cancellation)),
        ],
        Evaluated::Named(vals) => vals.iter().map(|(k, v)| (k.to_string(), num(*v))).collect(),
        Evaluated::Report(r) => {
            let v = report_json(r);
            let obj = v.as_object().expect("report is an object");
            obj.iter()
                .map(|(k, v)| {
                    let s = match v {
                        Value::Object(_) => params_text(&r.params),
                        Value::String(s) => s.clone(),
                        other => other.to_string(),
                    };
                    (k.clone(), s)
                })
                .collect()
        }
        Evaluated::Structured(v) => vec![("result".into(), v.to_string())],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use qortho::orthogonality::Tolerance;

    fn report() -> VerificationReport {
        VerificationReport::new("demo", &[("k", 1.0)], 1.0, 1.0, 1.0, Tolerance::default())
    }

    #[test]
    fn json_has_schema_fields() {
        let v: Value = serde_json::from_str(&render_verify(
            "x",
            &SuiteConfig::default(),
            1.0,
            &[report()],
            None,
            Format::Json,
        ))
        .unwrap();
        for k in ["suite", "config", "reports", "summary"] {
            assert!(v.get(k).is_some(), "{k}");
        }
        let r = &v["reports"][0];
        for k in REPORT_FIELDS {
            assert!(r.get(k).is_some(), "{k}");
        }
        assert!(v["summary"]["wall_time_ms"].is_null());
        assert_eq!(v["summary"]["passed"], 1);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let s = render_verify("x", &SuiteConfig::default(), 1.0, &[report()], None, Format::Csv);
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[0].starts_with("suite,name,params,computed"));
        assert!(lines[1].contains("true"));
    }
}
