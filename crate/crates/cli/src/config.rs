//! Run parameters: a TOML file with optional per-command tables, then
//! `--set key=value` overrides on top.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Debug;
use std::path::Path;

use finsler_lab::lattice::Alpha;
use finsler_lab::{Error, Result, SymMatrix, Vector};
use toml::Value;

#[derive(Clone, Debug, Default)]
pub struct Params {
    values: BTreeMap<String, Value>,
    /// Every key read so far with the value it resolved to, defaults included.
    resolved: RefCell<BTreeMap<String, String>>,
}

impl Params {
    /// Top-level scalars of `file`, then the table named by each element of
    /// `section` in turn (`["bench", "ordering"]` reads `[bench]` and
    /// `[bench.ordering]`), then `overrides`.
    pub fn load(file: Option<&Path>, section: &[&str], overrides: &[String]) -> Result<Self> {
        let mut values = BTreeMap::new();
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Parse(format!("cannot read config {}: {e}", path.display())))?;
            let root: toml::Table = toml::from_str(&text)
                .map_err(|e| Error::Parse(format!("config {}: {e}", path.display())))?;
            let mut table = &root;
            merge_scalars(&mut values, table);
            for s in section {
                match table.get(*s) {
                    Some(Value::Table(t)) => {
                        table = t;
                        merge_scalars(&mut values, table);
                    }
                    Some(_) => return Err(Error::Parse(format!("config key {s:?} must be a table"))),
                    None => break,
                }
            }
        }
        for o in overrides {
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("override {o:?} is not key=value")))?;
            values.insert(k.trim().to_string(), parse_value(v.trim()));
        }
        Ok(Params {
            values,
            resolved: RefCell::default(),
        })
    }

    pub fn insert(&mut self, key: &str, v: Value) {
        self.values.insert(key.to_string(), v);
    }

    /// Rejects keys outside `allowed` so typos do not silently fall back to
    /// defaults.
    pub fn restrict(&self, allowed: &[&str]) -> Result<()> {
        let allowed: BTreeSet<&str> = allowed.iter().copied().collect();
        for k in self.values.keys() {
            if !allowed.contains(k.as_str()) {
                return Err(Error::Parse(format!("unknown key {k:?}; expected one of {allowed:?}")));
            }
        }
        Ok(())
    }

    pub fn has(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    /// Resolved value of every key read, sorted by key.
    pub fn echo(&self) -> Vec<(String, String)> {
        self.resolved.borrow().iter().map(|(k, v)| (k.clone(), v.clone())).collect()
    }

    fn note<T: Debug>(&self, key: &str, r: Result<T>) -> Result<T> {
        if let Ok(v) = &r {
            self.resolved.borrow_mut().insert(key.to_string(), format!("{v:?}"));
        }
        r
    }

    pub fn string(&self, key: &str, default: &str) -> Result<String> {
        let r = match self.values.get(key) {
            None => Ok(default.to_string()),
            Some(Value::String(s)) => Ok(s.clone()),
            Some(v) => Err(bad(key, "a string", v)),
        };
        if let Ok(v) = &r {
            self.resolved.borrow_mut().insert(key.to_string(), v.clone());
        }
        r
    }

    pub fn f64(&self, key: &str, default: f64) -> Result<f64> {
        let r = match self.values.get(key) {
            None => Ok(default),
            Some(v) => as_f64(v).ok_or_else(|| bad(key, "a number", v)),
        };
        self.note(key, r)
    }

    pub fn opt_f64(&self, key: &str) -> Result<Option<f64>> {
        let r = self.values.get(key).map(|v| as_f64(v).ok_or_else(|| bad(key, "a number", v))).transpose();
        self.note(key, r)
    }

    pub fn usize(&self, key: &str, default: usize) -> Result<usize> {
        let r = match self.values.get(key) {
            None => Ok(default),
            Some(Value::Integer(i)) if *i >= 0 => Ok(*i as usize),
            Some(v) => Err(bad(key, "a non-negative integer", v)),
        };
        self.note(key, r)
    }

    pub fn u64(&self, key: &str, default: u64) -> Result<u64> {
        let r = match self.values.get(key) {
            None => Ok(default),
            Some(Value::Integer(i)) if *i >= 0 => Ok(*i as u64),
            Some(v) => Err(bad(key, "a non-negative integer", v)),
        };
        self.note(key, r)
    }

    /// An array, a single number, or a string split on `,`, `;` or `x`.
    pub fn f64_list(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        let r = match self.values.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => list(v)
                .and_then(|items| items.iter().map(as_f64).collect())
                .ok_or_else(|| bad(key, "a list of numbers", v)),
        };
        self.note(key, r)
    }

    pub fn opt_f64_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        if self.has(key) {
            self.f64_list(key, &[]).map(Some)
        } else {
            Ok(None)
        }
    }

    pub fn usize_list(&self, key: &str, default: &[usize]) -> Result<Vec<usize>> {
        let r = match self.values.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => list(v)
                .and_then(|items| {
                    items
                        .iter()
                        .map(|x| match x {
                            Value::Integer(i) if *i > 0 => Some(*i as usize),
                            _ => None,
                        })
                        .collect()
                })
                .ok_or_else(|| bad(key, "a list of positive integers", v)),
        };
        self.note(key, r)
    }

    /// Numbers or `inf`.
    pub fn alphas(&self, key: &str, default: &[Alpha]) -> Result<Vec<Alpha>> {
        let r = match self.values.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => {
                let items = list(v).ok_or_else(|| bad(key, "a list of alphas", v))?;
                items
                    .iter()
                    .map(|x| match x {
                        Value::String(s) => Alpha::parse(s),
                        x => as_f64(x).ok_or_else(|| bad(key, "a list of alphas", v)).and_then(Alpha::new),
                    })
                    .collect()
            }
        };
        self.note(key, r)
    }

    pub fn vector(&self, key: &str, default: Vector) -> Result<Vector> {
        Ok(match self.opt_f64_list(key)? {
            Some(v) => Vector::new(v),
            None => default,
        })
    }

    /// Rows of a matrix: nested arrays.
    pub fn rows(&self, key: &str) -> Result<Option<Vec<Vec<f64>>>> {
        let r = match self.values.get(key) {
            None => Ok(None),
            Some(Value::Array(rows)) => rows
                .iter()
                .map(|r| match r {
                    Value::Array(xs) => xs.iter().map(as_f64).collect::<Option<Vec<f64>>>(),
                    _ => None,
                })
                .collect::<Option<Vec<_>>>()
                .map(Some)
                .ok_or_else(|| bad(key, "an array of numeric rows", &self.values[key])),
            Some(v) => Err(bad(key, "an array of numeric rows", v)),
        };
        self.note(key, r)
    }

    /// A symmetric matrix given as nested rows or `d²` flat entries.
    pub fn sym_matrix(&self, key: &str, d: usize) -> Result<Option<SymMatrix>> {
        let flat: Vec<f64> = match self.rows(key) {
            Ok(Some(rows)) => rows.concat(),
            Ok(None) => return Ok(None),
            Err(_) => self.f64_list(key, &[])?,
        };
        if flat.len() != d * d {
            return Err(Error::DimensionMismatch {
                expected: d * d,
                found: flat.len(),
            });
        }
        let m = SymMatrix::from_fn(d, |i, j| 0.5 * (flat[i * d + j] + flat[j * d + i]));
        Ok(Some(m))
    }
}

fn merge_scalars(values: &mut BTreeMap<String, Value>, table: &toml::Table) {
    for (k, v) in table {
        if !matches!(v, Value::Table(_)) {
            values.insert(k.clone(), v.clone());
        }
    }
}

/// TOML value syntax where it parses, a bare string otherwise.
fn parse_value(s: &str) -> Value {
    format!("v = {s}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(s.to_string()))
}

fn as_f64(v: &Value) -> Option<f64> {
    match v {
        Value::Float(x) => Some(*x),
        Value::Integer(i) => Some(*i as f64),
        Value::String(s) => match s.trim() {
            "inf" | "infinity" => Some(f64::INFINITY),
            t => t.parse().ok(),
        },
        _ => None,
    }
}

fn list(v: &Value) -> Option<Vec<Value>> {
    match v {
        Value::Array(a) => Some(a.clone()),
        Value::String(s) => Some(
            s.split([',', ';', 'x'])
                .map(|t| parse_value(t.trim()))
                .collect(),
        ),
        Value::Integer(_) | Value::Float(_) => Some(vec![v.clone()]),
        _ => None,
    }
}

fn bad(key: &str, what: &str, v: &Value) -> Error {
    Error::Parse(format!("key {key:?} must be {what}, got {v}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_parse_as_toml_then_fall_back_to_strings() {
        let p = Params::load(
            None,
            &[],
            &["eps=0.1".into(), "norm=l1".into(), "window=[8, 8]".into(), "alphas=1;inf".into()],
        )
        .unwrap();
        assert_eq!(p.f64("eps", 0.0).unwrap(), 0.1);
        assert_eq!(p.string("norm", "").unwrap(), "l1");
        assert_eq!(p.usize_list("window", &[]).unwrap(), vec![8, 8]);
        assert_eq!(p.alphas("alphas", &[]).unwrap(), vec![Alpha::Median, Alpha::Midrange]);
    }

    #[test]
    fn window_string_splits_on_x() {
        let p = Params::load(None, &[], &["window=16x32".into()]).unwrap();
        assert_eq!(p.usize_list("window", &[]).unwrap(), vec![16, 32]);
    }

    #[test]
    fn sections_override_top_level() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "seed = 3\nnorm = \"l1\"\n[bench]\nnorm = \"linf\"\n[bench.cones]\nh = 0.05\n").unwrap();
        let p = Params::load(Some(&path), &["bench", "cones"], &["h=0.1".into()]).unwrap();
        assert_eq!(p.string("norm", "").unwrap(), "linf");
        assert_eq!(p.f64("h", 0.0).unwrap(), 0.1);
        assert_eq!(p.u64("seed", 0).unwrap(), 3);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let p = Params::load(None, &[], &["nrom=l1".into()]).unwrap();
        assert!(p.restrict(&["norm"]).unwrap_err().is_config());
    }

    #[test]
    fn symmetric_matrix_from_flat_or_rows() {
        let p = Params::load(None, &[], &["x=[[1, 2], [0, 3]]".into(), "y=1,0,0,1".into()]).unwrap();
        let x = p.sym_matrix("x", 2).unwrap().unwrap();
        assert_eq!(x.get(0, 1), 1.0);
        assert_eq!(p.sym_matrix("y", 2).unwrap().unwrap().get(1, 1), 1.0);
        assert!(p.sym_matrix("y", 3).is_err());
    }
}
