//! Symmetric edge sets `E ⊆ Λ∖{0}` and the geometry they induce: the index
//! maps `J`, `L`, the derived dual norm and the signed-sum set `Ẽ`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::finsler::PolyhedralNorm;
use crate::linalg::{rank, Vector};

/// Cap on `#E` for `Ẽ` generation (3^{#E/2 − 1} sums per excluded pair).
pub const MAX_TILDE_EDGES: usize = 16;

#[derive(Clone, Debug)]
pub struct EdgeSet {
    edges: Vec<Vector>,
    /// `neg[i]` is the index of `−e_i`.
    neg: Vec<usize>,
}

impl EdgeSet {
    pub fn new(edges: Vec<Vector>) -> Result<Self> {
        let d = edges.first().ok_or(Error::Empty("edge set"))?.dim();
        let scale = edges.iter().map(Vector::norm).fold(0.0, f64::max);
        let tol = 1e-12 * scale.max(1.0);
        let mut neg = Vec::with_capacity(edges.len());
        for (i, e) in edges.iter().enumerate() {
            e.check_dim(d)?;
            if e.norm() <= tol {
                return Err(Error::Degenerate("edge set contains 0".into()));
            }
            if edges[..i].iter().any(|f| f.dist(e) <= tol) {
                return Err(Error::Degenerate(format!("duplicate edge {e}")));
            }
            let j = edges
                .iter()
                .position(|f| f.dist(&-e) <= tol)
                .ok_or_else(|| Error::Degenerate(format!("edge set lacks −{e}")))?;
            neg.push(j);
        }
        if rank(d, &edges) < d {
            return Err(Error::Degenerate("edges do not span the space".into()));
        }
        Ok(EdgeSet { edges, neg })
    }

    /// `{±ē_i}` in dimension `d`.
    pub fn standard(d: usize) -> Self {
        let edges = (0..d)
            .flat_map(|i| [Vector::unit(d, i), -&Vector::unit(d, i)])
            .collect();
        EdgeSet::new(edges).expect("standard edges are valid")
    }

    pub fn edges(&self) -> &[Vector] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.edges[0].dim()
    }

    pub fn negation_index(&self, i: usize) -> usize {
        self.neg[i]
    }

    fn max_len(&self) -> f64 {
        self.edges.iter().map(Vector::norm).fold(0.0, f64::max)
    }

    /// `(J(p), L(p))` as index lists: `J = argmax ⟨p, e⟩`,
    /// `L = argmin |⟨p, e⟩|`, ties within `tol·‖p‖·max‖e‖`.
    pub fn index_sets(&self, p: &Vector, tol: f64) -> (Vec<usize>, Vec<usize>) {
        let vals: Vec<f64> = self.edges.iter().map(|e| p.dot(e)).collect();
        let slack = tol * p.norm() * self.max_len();
        let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = vals.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
        let j = (0..vals.len()).filter(|&i| vals[i] >= hi - slack).collect();
        let l = (0..vals.len()).filter(|&i| vals[i].abs() <= lo + slack).collect();
        (j, l)
    }

    /// `max_e Σ_{e' ∉ {e, −e}} |⟨p, e'⟩|`
    pub fn derived_dual_norm(&self, p: &Vector) -> f64 {
        let abs: Vec<f64> = self.edges.iter().map(|e| p.dot(e).abs()).collect();
        let total: f64 = abs.iter().sum();
        (0..abs.len())
            .map(|i| {
                let excluded = if self.neg[i] == i { abs[i] } else { abs[i] + abs[self.neg[i]] };
                total - excluded
            })
            .fold(0.0, f64::max)
    }

    /// `Ẽ`: all sums `Σ_{e' ∉ {e,−e}} ρ(e') e'` over `e ∈ E` and signs `ρ`.
    pub fn tilde(&self) -> Result<Vec<Vector>> {
        if self.len() > MAX_TILDE_EDGES {
            return Err(Error::DimensionCap {
                what: "signed-sum edge set",
                dim: self.len(),
                max: MAX_TILDE_EDGES,
            });
        }
        let d = self.dim();
        // one representative per ± pair
        let reps: Vec<usize> = (0..self.len()).filter(|&i| self.neg[i] > i).collect();
        let scale = self.max_len().max(1.0);
        let key = |v: &Vector| -> Vec<i64> {
            v.iter().map(|x| (x / scale * 1e9).round() as i64).collect()
        };
        let mut out: BTreeMap<Vec<i64>, Vector> = BTreeMap::new();
        for (k, _) in reps.iter().enumerate() {
            let rest: Vec<&Vector> = reps
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != k)
                .map(|(_, &i)| &self.edges[i])
                .collect();
            // each pair {e', −e'} contributes −2e', 0 or 2e'
            let count = 3usize.pow(rest.len() as u32);
            for mut code in 0..count {
                let mut v = Vector::zeros(d);
                for e in &rest {
                    let c = (code % 3) as f64 - 1.0;
                    code /= 3;
                    if c != 0.0 {
                        v = v.add_scaled(2.0 * c, e);
                    }
                }
                out.entry(key(&v)).or_insert(v);
            }
        }
        Ok(out.into_values().collect())
    }

    /// `Ẽ(p)`: members of `Ẽ` attaining the derived dual norm at `p`.
    pub fn tilde_active(&self, p: &Vector, tol: f64) -> Result<Vec<Vector>> {
        let all = self.tilde()?;
        let top = self.derived_dual_norm(p);
        let slack = tol * p.norm() * self.max_len() * self.len() as f64;
        Ok(all.into_iter().filter(|q| p.dot(q) >= top - slack).collect())
    }

    /// `φ_E`, the norm with dual `p ↦ max_e ⟨p, e⟩`.
    pub fn edge_norm(&self) -> Result<PolyhedralNorm> {
        Ok(PolyhedralNorm::from_dual_generators(&self.edges)?.with_name("edge-norm"))
    }

    /// `φ̲_E`, the norm whose dual is [`EdgeSet::derived_dual_norm`].
    pub fn derived_norm(&self) -> Result<PolyhedralNorm> {
        Ok(PolyhedralNorm::from_dual_generators(&self.tilde()?)?.with_name("derived-norm"))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeFile {
    edges: Vec<Vec<i64>>,
    /// Lattice basis as a list of column vectors; identity when absent.
    basis: Option<Vec<Vec<f64>>>,
}

/// Edge set plus the lattice basis its integer coordinates refer to.
#[derive(Clone, Debug)]
pub struct LatticeEdges {
    /// Columns of the lattice basis.
    pub basis: Vec<Vector>,
    /// Edge offsets in lattice coordinates.
    pub offsets: Vec<Vec<i64>>,
    pub edges: EdgeSet,
}

impl std::fmt::Display for LatticeEdges {
    /// `basis=(..);(..) offsets=(..);(..)`, stable across runs.
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let basis: Vec<String> = self
            .basis
            .iter()
            .map(|b| format!("({})", b.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",")))
            .collect();
        let offsets: Vec<String> = self
            .offsets
            .iter()
            .map(|k| format!("({})", k.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")))
            .collect();
        write!(f, "basis={} offsets={}", basis.join(";"), offsets.join(";"))
    }
}

impl LatticeEdges {
    pub fn new(basis: Vec<Vector>, offsets: Vec<Vec<i64>>) -> Result<Self> {
        let d = basis.len();
        if d == 0 {
            return Err(Error::Empty("lattice basis"));
        }
        let mut phys = Vec::with_capacity(offsets.len());
        for k in &offsets {
            if k.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: k.len(),
                });
            }
            let mut v = Vector::zeros(d);
            for (c, b) in k.iter().zip(&basis) {
                b.check_dim(d)?;
                v = v.add_scaled(*c as f64, b);
            }
            phys.push(v);
        }
        let edges = EdgeSet::new(phys)?;
        Ok(LatticeEdges {
            basis,
            offsets,
            edges,
        })
    }

    /// Named edge sets: `z2`, `z3`, `z4` (nearest neighbours of `ℤᵈ`),
    /// `z2-diag` (the eight king moves) and `triangular` (six nearest
    /// neighbours of the triangular lattice).
    pub fn named(name: &str) -> Result<Self> {
        let cube = |d: usize| -> Vec<Vector> { (0..d).map(|i| Vector::unit(d, i)).collect() };
        let axes = |d: usize| -> Vec<Vec<i64>> {
            (0..d)
                .flat_map(|i| {
                    let mut a = vec![0; d];
                    a[i] = 1;
                    let b: Vec<i64> = a.iter().map(|x| -x).collect();
                    [a, b]
                })
                .collect()
        };
        match name {
            "z2" => Self::new(cube(2), axes(2)),
            "z3" => Self::new(cube(3), axes(3)),
            "z4" => Self::new(cube(4), axes(4)),
            "z2-diag" => {
                let mut o = axes(2);
                o.extend([vec![1, 1], vec![-1, -1], vec![1, -1], vec![-1, 1]]);
                Self::new(cube(2), o)
            }
            "triangular" => {
                let basis = vec![
                    Vector::from([1.0, 0.0]),
                    Vector::from([0.5, 3f64.sqrt() / 2.0]),
                ];
                let o = vec![
                    vec![1, 0],
                    vec![-1, 0],
                    vec![0, 1],
                    vec![0, -1],
                    vec![1, -1],
                    vec![-1, 1],
                ];
                Self::new(basis, o)
            }
            _ => Err(Error::Parse(format!("unknown edge set {name:?}"))),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let f: EdgeFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let d = f
            .edges
            .first()
            .ok_or(Error::Parse("edge file lists no edges".into()))?
            .len();
        let basis = match f.basis {
            Some(cols) => cols.into_iter().map(Vector::new).collect(),
            None => (0..d).map(|i| Vector::unit(d, i)).collect(),
        };
        Self::new(basis, f.edges)
    }

    /// A named edge set or a path to an edge file.
    pub fn resolve(spec: &str) -> Result<Self> {
        match Self::named(spec) {
            Ok(e) => Ok(e),
            Err(err) => {
                let path = Path::new(spec);
                if path.exists() {
                    Self::parse(&std::fs::read_to_string(path)?)
                } else {
                    Err(err)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(e: &EdgeSet, idx: &[usize]) -> Vec<Vector> {
        idx.iter().map(|&i| e.edges()[i].clone()).collect()
    }

    #[test]
    fn index_sets_on_z2() {
        let e = EdgeSet::standard(2);
        let (j, l) = e.index_sets(&Vector::from([2.0, 1.0]), 1e-9);
        assert_eq!(ids(&e, &j), vec![Vector::from([1.0, 0.0])]);
        assert_eq!(ids(&e, &l), vec![Vector::from([0.0, 1.0]), Vector::from([0.0, -1.0])]);
        let (j, l) = e.index_sets(&Vector::zeros(2), 1e-9);
        assert_eq!((j.len(), l.len()), (4, 4));
        let (j, l) = e.index_sets(&Vector::from([1.0, 1.0]), 1e-9);
        assert_eq!(ids(&e, &j), vec![Vector::from([1.0, 0.0]), Vector::from([0.0, 1.0])]);
        assert_eq!(l.len(), 4);
    }

    #[test]
    fn derived_dual_norm_z3() {
        let e = EdgeSet::standard(3);
        assert_eq!(e.derived_dual_norm(&Vector::from([1.0, 1.0, 0.0])), 4.0);
        assert_eq!(e.derived_dual_norm(&Vector::zeros(3)), 0.0);
    }

    #[test]
    fn tilde_z2() {
        let e = EdgeSet::standard(2);
        let t = e.tilde().unwrap();
        // {±2ē_1, ±2ē_2, 0}
        assert_eq!(t.len(), 5);
        assert!(t.len() <= e.len() * (1 << (e.len() - 2)));
        assert_eq!(e.tilde_active(&Vector::zeros(2), 1e-9).unwrap().len(), 5);
    }

    #[test]
    fn invalid_edge_sets() {
        assert!(EdgeSet::new(vec![Vector::from([1.0, 0.0]), Vector::from([-1.0, 0.0])]).is_err());
        assert!(EdgeSet::new(vec![Vector::from([1.0, 0.0]), Vector::from([0.0, 1.0])]).is_err());
        assert!(LatticeEdges::named("hex").is_err());
    }

    #[test]
    fn edge_file() {
        let le = LatticeEdges::parse("edges = [[2,0],[-2,0],[0,1],[0,-1]]\n").unwrap();
        assert_eq!(le.edges.edges()[0], Vector::from([2.0, 0.0]));
    }
}
