//! `key=value` arguments of `eval` and `table`.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use qortho::{QError, Result};

#[derive(Debug, Default)]
pub struct Params {
    map: BTreeMap<String, String>,
    used: RefCell<BTreeSet<String>>,
}

impl Params {
    pub fn parse(items: &[String]) -> Result<Self> {
        let mut map = BTreeMap::new();
        for item in items {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| QError::InvalidParameter(format!("expected key=value, got '{item}'")))?;
            let k = k.trim();
            if k.is_empty() {
                return Err(QError::InvalidParameter(format!("empty key in '{item}'")));
            }
            if map.insert(k.to_string(), v.trim().to_string()).is_some() {
                return Err(QError::InvalidParameter(format!("'{k}' given twice")));
            }
        }
        Ok(Params {
            map,
            used: RefCell::default(),
        })
    }

    /// Arguments as supplied, for echoing in output.
    pub fn raw(&self) -> &BTreeMap<String, String> {
        &self.map
    }

    fn get(&self, key: &str) -> Option<&str> {
        let v = self.map.get(key)?;
        self.used.borrow_mut().insert(key.to_string());
        Some(v)
    }

    fn parse_as<T: FromStr>(&self, key: &str, what: &str) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| QError::InvalidParameter(format!("{key} = '{v}' is not {what}"))),
        }
    }

    fn required<T>(&self, key: &str, v: Option<T>) -> Result<T> {
        v.ok_or_else(|| QError::InvalidParameter(format!("missing parameter '{key}'")))
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        let v = self.parse_as(key, "a real number")?;
        self.required(key, v)
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.parse_as(key, "a real number")?.unwrap_or(default))
    }

    pub fn opt_f64(&self, key: &str) -> Result<Option<f64>> {
        self.parse_as(key, "a real number")
    }

    pub fn i64(&self, key: &str) -> Result<i64> {
        let v = self.parse_as(key, "an integer")?;
        self.required(key, v)
    }

    pub fn i64_or(&self, key: &str, default: i64) -> Result<i64> {
        Ok(self.parse_as(key, "an integer")?.unwrap_or(default))
    }

    pub fn usize(&self, key: &str) -> Result<usize> {
        let v = self.parse_as(key, "a nonnegative integer")?;
        self.required(key, v)
    }

    /// Comma-separated reals; an empty value is the empty list.
    pub fn list(&self, key: &str) -> Result<Vec<f64>> {
        let v = self.get(key);
        let v = self.required(key, v)?;
        if v.is_empty() {
            return Ok(Vec::new());
        }
        v.split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|_| QError::InvalidParameter(format!("{key}: '{s}' is not a real number")))
            })
            .collect()
    }

    pub fn word_or<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.get(key).unwrap_or(default)
    }

    /// Rejects keys that the function did not read.
    pub fn finish(&self) -> Result<()> {
        let used = self.used.borrow();
        let unused: Vec<&str> = self.map.keys().filter(|k| !used.contains(*k)).map(String::as_str).collect();
        if unused.is_empty() {
            Ok(())
        } else {
            Err(QError::InvalidParameter(format!("unknown parameter(s): {}", unused.join(", "))))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(items: &[&str]) -> Result<Params> {
        Params::parse(&items.iter().map(|s| s.to_string()).collect::<Vec<_>>())
    }

    #[test]
    fn parses_and_tracks_use() {
        let ps = p(&["n=3", "x=-1.5", "l=1,2.5"]).unwrap();
        assert_eq!(ps.usize("n").unwrap(), 3);
        assert_eq!(ps.f64("x").unwrap(), -1.5);
        assert!(ps.finish().is_err());
        assert_eq!(ps.list("l").unwrap(), vec![1.0, 2.5]);
        ps.finish().unwrap();
        assert_eq!(ps.f64_or("q", 0.5).unwrap(), 0.5);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(p(&["n"]).is_err());
        assert!(p(&["n=1", "n=2"]).is_err());
        let ps = p(&["n=-1", "x=abc"]).unwrap();
        assert!(ps.usize("n").is_err());
        assert!(ps.f64("x").is_err());
        assert!(ps.f64("y").is_err());
    }
}
