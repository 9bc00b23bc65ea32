//! Tabulation of a family over a lattice range.

use qortho::families::{big_qbessel, jackson_j2, m_func, q_laguerre, MForm};
use qortho::orthogonality::weight;
use qortho::spectral::{eta_norm, eta_weight, spectrum, xi_norm, xi_weight, Branch};
use qortho::{QError, Result};

use crate::eval::Env;
use crate::params::Params;

pub const FAMILIES: &[&str] = &["q_laguerre", "m_func", "jackson_j2", "big_qbessel", "weight", "spectrum"];

/// Column names and rows of a table.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// Text columns prepended to `rows`, if any.
    pub labels: Option<Vec<String>>,
}

fn range(p: &Params, lo: &str, hi: &str, dlo: i64, dhi: i64) -> Result<Vec<i64>> {
    let (a, b) = (p.i64_or(lo, dlo)?, p.i64_or(hi, dhi)?);
    if a > b {
        return Err(QError::InvalidParameter(format!("{lo} = {a} exceeds {hi} = {b}")));
    }
    Ok((a..=b).collect())
}

fn header(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|s| s.to_string()).collect()
}

/// Tabulates `family`; lattice families run over `x = c q^k`, `k ∈ [k_min, k_max]`.
pub fn tabulate(family: &str, p: &Params, env: &Env) -> Result<Table> {
    let t = match family {
        "q_laguerre" | "m_func" | "jackson_j2" | "big_qbessel" | "weight" => {
            let spec = env.measure(p)?;
            let ks = range(p, "k_min", "k_max", -5, 5)?;
            let ctx = &spec.ctx;
            let index = match family {
                "q_laguerre" => p.i64_or("n", 3)?,
                "m_func" => p.i64_or("p", 0)?,
                "big_qbessel" => p.i64_or("j", 0)?,
                _ => 0,
            };
            let mut rows = Vec::with_capacity(ks.len());
            for &k in &ks {
                let x = spec.point(k);
                let (v, err) = match family {
                    "q_laguerre" => {
                        let n = usize::try_from(index)
                            .map_err(|_| QError::InvalidParameter(format!("n = {index} must be nonnegative")))?;
                        let v = q_laguerre(n, spec.alpha, x, ctx)?;
                        (v.value, v.abs_err)
                    }
                    "m_func" => {
                        let v = m_func(index, &spec, x, MForm::Auto)?;
                        (v.value, v.abs_err)
                    }
                    "jackson_j2" => {
                        let v = jackson_j2(spec.alpha, x, ctx)?;
                        (v.value, v.abs_err)
                    }
                    "big_qbessel" => {
                        let v = big_qbessel(spec.alpha, index, spec.c, x, ctx)?;
                        (v.value, v.abs_err)
                    }
                    _ => (weight(&spec, k)?.to_f64(), 0.0),
                };
                rows.push(vec![k as f64, x, v, err]);
            }
            Table {
                header: header(&["k", "x", "value", "abs_err"]),
                rows,
                labels: None,
            }
        }
        "spectrum" => {
            let op = env.operator(p)?;
            let ps = range(p, "p_min", "p_max", -3, 5)?;
            let (lo, hi) = (ps[0], ps[ps.len() - 1]);
            let mut rows = Vec::new();
            let mut labels = Vec::new();
            for pt in spectrum(&op, lo, hi) {
                let (norm, w) = match pt.branch {
                    Branch::Eta => (eta_norm(&op, pt.p)?, eta_weight(&op, pt.p)?),
                    Branch::Xi => (xi_norm(&op, pt.p)?, xi_weight(&op, pt.p)?),
                };
                labels.push(match pt.branch {
                    Branch::Eta => "eta".to_string(),
                    Branch::Xi => "xi".to_string(),
                });
                rows.push(vec![pt.p as f64, pt.x, norm, w]);
            }
            Table {
                header: header(&["branch", "p", "x", "norm", "weight"]),
                rows,
                labels: Some(labels),
            }
        }
        _ => {
            return Err(QError::InvalidParameter(format!(
                "unknown table family '{family}' (expected one of {})",
                FAMILIES.join(", ")
            )))
        }
    };
    p.finish()?;
    Ok(t)
}

impl Table {
    fn cells(&self) -> Vec<Vec<String>> {
        let offset = usize::from(self.labels.is_some());
        self.rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let mut cells: Vec<String> = self.labels.iter().map(|l| l[i].clone()).collect();
                for (j, v) in row.iter().enumerate() {
                    let col = &self.header[j + offset];
                    // Indices print as integers.
                    cells.push(if col == "k" || col == "p" { format!("{}", *v as i64) } else { format!("{v:e}") });
                }
                cells
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory CSV write");
        for row in self.cells() {
            w.write_record(&row).expect("in-memory CSV write");
        }
        String::from_utf8(w.into_inner().expect("in-memory CSV flush")).expect("CSV is UTF-8")
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<serde_json::Value> = self
            .cells()
            .into_iter()
            .map(|cells| {
                let mut m = serde_json::Map::new();
                for (h, c) in self.header.iter().zip(cells) {
                    let v = c.parse::<f64>().map(serde_json::Value::from).unwrap_or(serde_json::Value::String(c));
                    m.insert(h.clone(), v);
                }
                serde_json::Value::Object(m)
            })
            .collect();
        let mut s = serde_json::to_string_pretty(&rows).expect("JSON values serialize");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use qortho::orthogonality::Tolerance;
    use qortho::QContext;

    fn env() -> Env {
        Env {
            ctx: QContext::new(0.5).unwrap(),
            alpha: 0.25,
            c: 2.0,
            t: None,
            tol: Tolerance::default(),
            r_values: None,
        }
    }

    fn params(items: &[&str]) -> Params {
        Params::parse(&items.iter().map(|s| s.to_string()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn laguerre_table_covers_the_range() {
        let t = tabulate("q_laguerre", &params(&["n=2"]), &env()).unwrap();
        assert_eq!(t.rows.len(), 11);
        let csv = t.to_csv();
        assert!(csv.starts_with("k,x,value,abs_err\n"));
        assert!(csv.lines().nth(1).unwrap().starts_with("-5,"));
    }

    #[test]
    fn spectrum_table_has_both_branches() {
        let t = tabulate("spectrum", &params(&[]), &env()).unwrap();
        let labels = t.labels.as_ref().unwrap();
        assert_eq!(labels.iter().filter(|l| *l == "xi").count(), 9);
        assert_eq!(labels.iter().filter(|l| *l == "eta").count(), 6);
        assert!(t.to_csv().starts_with("branch,p,x,norm,weight\n"));
    }

    #[test]
    fn single_row_table_and_bad_ranges() {
        let t = tabulate("weight", &params(&["k_min=3", "k_max=3"]), &env()).unwrap();
        assert_eq!(t.to_csv().lines().count(), 2);
        assert!(tabulate("weight", &params(&["k_min=4", "k_max=3"]), &env()).is_err());
        assert!(tabulate("nope", &params(&[]), &env()).is_err());
    }
}
