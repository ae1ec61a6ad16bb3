//! Built-in norms and the norm file format.
//!
//! Names accepted by [`builtin`]:
//!
//! * `l1[:d]`: `Σ|q_i|`, generators `{±1}^d` (default `d = 2`)
//! * `linf[:d]`: `max|q_i|`, generators `±ē_i`
//! * `euclidean-polytope-k`: `2k` generators `(cos πj/k, sin πj/k)` in the plane
//! * `rhombic-dodecahedron`: `max_j ½ Σ_{i≠j} |q_i|` in `d = 3`; its dual
//!   ball is a rhombic dodecahedron

use std::path::Path;

use serde::Deserialize;

use super::PolyhedralNorm;
use crate::error::{Error, Result};
use crate::linalg::Vector;

/// On-disk norm definition (TOML).
///
/// ```toml
/// name = "hexagonal"
/// dim = 2
/// generators = [[1, 0], [0.5, 0.866], ...]
/// ```
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormFile {
    pub name: Option<String>,
    pub dim: usize,
    pub generators: Vec<Vec<f64>>,
}

fn sign_patterns(d: usize) -> Vec<Vector> {
    (0..1usize << d)
        .map(|mask| {
            Vector::new(
                (0..d)
                    .map(|i| if mask >> i & 1 == 1 { -1.0 } else { 1.0 })
                    .collect(),
            )
        })
        .collect()
}

fn parse_dim(arg: Option<&str>, name: &str) -> Result<usize> {
    match arg {
        None => Ok(2),
        Some(s) => s
            .parse::<usize>()
            .ok()
            .filter(|&d| d >= 1)
            .ok_or_else(|| Error::Parse(format!("bad dimension in norm name {name:?}"))),
    }
}

pub fn builtin(name: &str) -> Result<PolyhedralNorm> {
    let (base, arg) = match name.split_once(':') {
        Some((b, a)) => (b, Some(a)),
        None => (name, None),
    };
    let generators: Vec<Vector> = match base {
        "l1" => sign_patterns(parse_dim(arg, name)?),
        "linf" => {
            let d = parse_dim(arg, name)?;
            (0..d)
                .flat_map(|i| [Vector::unit(d, i), -&Vector::unit(d, i)])
                .collect()
        }
        "rhombic-dodecahedron" => {
            if arg.is_some_and(|a| a != "3") {
                return Err(Error::Parse("rhombic-dodecahedron is three-dimensional".into()));
            }
            let mut g = Vec::new();
            for j in 0..3 {
                for s in sign_patterns(2) {
                    let mut v = Vector::zeros(3);
                    let others: Vec<usize> = (0..3).filter(|&i| i != j).collect();
                    v[others[0]] = 0.5 * s[0];
                    v[others[1]] = 0.5 * s[1];
                    g.push(v);
                }
            }
            g
        }
        _ => {
            let k = base
                .strip_prefix("euclidean-polytope-")
                .and_then(|k| k.parse::<usize>().ok())
                .filter(|&k| k >= 2)
                .ok_or_else(|| Error::Parse(format!("unknown norm {name:?}")))?;
            (0..2 * k)
                .map(|j| {
                    let t = std::f64::consts::PI * j as f64 / k as f64;
                    Vector::from([t.cos(), t.sin()])
                })
                .collect()
        }
    };
    Ok(PolyhedralNorm::from_generators(&generators)?.with_name(name))
}

pub fn parse_norm(text: &str) -> Result<PolyhedralNorm> {
    let file: NormFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if file.generators.is_empty() {
        return Err(Error::Parse("norm file lists no generators".into()));
    }
    let mut gens = Vec::with_capacity(file.generators.len());
    for g in &file.generators {
        if g.len() != file.dim {
            return Err(Error::Parse(format!(
                "generator {g:?} does not have dimension {}",
                file.dim
            )));
        }
        gens.push(Vector::from(g.as_slice()));
    }
    let norm = PolyhedralNorm::from_generators(&gens)?;
    Ok(match file.name {
        Some(n) => norm.with_name(n),
        None => norm,
    })
}

pub fn load_norm(path: &Path) -> Result<PolyhedralNorm> {
    let text = std::fs::read_to_string(path)?;
    parse_norm(&text)
}

/// A built-in name, or a path to a norm file.
pub fn resolve_norm(spec: &str) -> Result<PolyhedralNorm> {
    match builtin(spec) {
        Ok(n) => Ok(n),
        Err(e) => {
            let path = Path::new(spec);
            if path.exists() {
                load_norm(path)
            } else {
                Err(e)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_sizes() {
        assert_eq!(builtin("l1:3").unwrap().generators().len(), 8);
        assert_eq!(builtin("linf:4").unwrap().generators().len(), 8);
        assert_eq!(builtin("euclidean-polytope-8").unwrap().generators().len(), 16);
        assert!(builtin("nope").is_err());
        assert!(builtin("l1:x").is_err());
    }

    #[test]
    fn file_with_redundant_generators() {
        let n = parse_norm(
            "name = \"box\"\ndim = 2\ngenerators = [[1,0],[-1,0],[0,1],[0,-1],[0.5,0]]\n",
        )
        .unwrap();
        assert_eq!(n.name(), "box");
        assert_eq!(n.generators().len(), 4);
        assert!(parse_norm("dim = 2\ngenerators = [[1,0,0]]").is_err());
        assert!(parse_norm("dim = ").is_err());
    }
}
