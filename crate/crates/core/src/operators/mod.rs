//! Upper/lower operator pairs `(F̄, F̲)` on gradient–Hessian pairs: Finsler
//! infinity Laplacians and the lattice-limit operators `F_{E,α}`.

mod compat;
mod edges;
mod quad;

pub use compat::{compatibility_check, CompatReport};
pub use edges::{EdgeSet, LatticeEdges, MAX_TILDE_EDGES};
pub use quad::{quad_extrema_over_face, QuadExtrema};

use crate::error::{Error, Result};
use crate::finsler::{resolve_norm, PolyhedralNorm, TOL_ACTIVE};
use crate::linalg::{SymMatrix, Vector};

#[derive(Clone, Debug)]
pub enum PairKind {
    /// max/min of `⟨Xq, q⟩` over `∂φ*(p)`.
    InfLaplacian(PolyhedralNorm),
    /// max/min of `⟨Xe, e⟩` over `L(p)`.
    Median(EdgeSet),
    /// max/min of `⟨Xe, e⟩` over `J(p)`.
    Infty(EdgeSet),
    /// Envelopes of the weighted trace `F_{E,α}`.
    Alpha(EdgeSet, f64),
}

#[derive(Clone, Debug)]
pub struct OperatorPair {
    label: String,
    kind: PairKind,
    tol_active: f64,
}

pub fn inf_laplacian_pair(norm: &PolyhedralNorm) -> Result<OperatorPair> {
    norm.primal_vertices()?;
    Ok(OperatorPair {
        label: format!("inf-laplacian:{}", norm.name()),
        kind: PairKind::InfLaplacian(norm.clone()),
        tol_active: TOL_ACTIVE,
    })
}

pub fn f_median_pair(edges: &EdgeSet) -> OperatorPair {
    OperatorPair {
        label: "median".into(),
        kind: PairKind::Median(edges.clone()),
        tol_active: TOL_ACTIVE,
    }
}

pub fn f_infty_pair(edges: &EdgeSet) -> OperatorPair {
    OperatorPair {
        label: "infty".into(),
        kind: PairKind::Infty(edges.clone()),
        tol_active: TOL_ACTIVE,
    }
}

pub fn f_alpha_pair(edges: &EdgeSet, alpha: f64) -> Result<OperatorPair> {
    if !(alpha > 1.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (1, ∞), got {alpha}"
        )));
    }
    Ok(OperatorPair {
        label: format!("alpha:{alpha}"),
        kind: PairKind::Alpha(edges.clone(), alpha),
        tol_active: TOL_ACTIVE,
    })
}

/// Parses `inf-laplacian:<norm>`, `median:<edges>`, `infty:<edges>` or
/// `alpha:<value>:<edges>`, where `<norm>` and `<edges>` are built-in names
/// or file paths.
pub fn parse_operator(name: &str) -> Result<OperatorPair> {
    let (head, rest) = name
        .split_once(':')
        .ok_or_else(|| Error::Parse(format!("operator {name:?} lacks an argument")))?;
    let edges = |s: &str| LatticeEdges::resolve(s).map(|l| l.edges);
    let mut pair = match head {
        "inf-laplacian" => inf_laplacian_pair(&resolve_norm(rest)?)?,
        "median" => f_median_pair(&edges(rest)?),
        "infty" => f_infty_pair(&edges(rest)?),
        "alpha" => {
            let (a, e) = rest
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("operator {name:?} lacks an edge set")))?;
            let alpha: f64 = a
                .parse()
                .map_err(|_| Error::Parse(format!("bad alpha {a:?}")))?;
            f_alpha_pair(&edges(e)?, alpha)?
        }
        _ => return Err(Error::Parse(format!("unknown operator family {head:?}"))),
    };
    pair.label = name.to_string();
    Ok(pair)
}

fn extrema_over(edges: &EdgeSet, idx: &[usize], x: &SymMatrix) -> (f64, f64) {
    idx.iter()
        .map(|&i| x.quad_form(&edges.edges()[i]))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        })
}

impl OperatorPair {
    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn kind(&self) -> &PairKind {
        &self.kind
    }

    pub fn with_tol_active(mut self, tol: f64) -> Self {
        self.tol_active = tol;
        self
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            PairKind::InfLaplacian(n) => n.dim(),
            PairKind::Median(e) | PairKind::Infty(e) | PairKind::Alpha(e, _) => e.dim(),
        }
    }

    /// `(F̲(p, X), F̄(p, X))`.
    pub fn eval(&self, p: &Vector, x: &SymMatrix) -> Result<(f64, f64)> {
        p.check_dim(self.dim())?;
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.dim(),
            });
        }
        match &self.kind {
            PairKind::InfLaplacian(norm) => {
                let face = norm.dual_subdifferential(p, self.tol_active)?;
                let r = quad_extrema_over_face(x, &face)?;
                Ok((r.min, r.max))
            }
            PairKind::Median(e) => {
                let (_, l) = e.index_sets(p, self.tol_active);
                Ok(extrema_over(e, &l, x))
            }
            PairKind::Infty(e) => {
                let (j, _) = e.index_sets(p, self.tol_active);
                Ok(extrema_over(e, &j, x))
            }
            PairKind::Alpha(e, alpha) => Ok(self.alpha_eval(e, *alpha, p, x)),
        }
    }

    pub fn upper(&self, p: &Vector, x: &SymMatrix) -> Result<f64> {
        Ok(self.eval(p, x)?.1)
    }

    pub fn lower(&self, p: &Vector, x: &SymMatrix) -> Result<f64> {
        Ok(self.eval(p, x)?.0)
    }

    fn alpha_eval(&self, e: &EdgeSet, alpha: f64, p: &Vector, x: &SymMatrix) -> (f64, f64) {
        let all: Vec<usize> = (0..e.len()).collect();
        if p.norm_inf() == 0.0 {
            if alpha == 2.0 {
                let v = weighted_trace(e, x, |_| 1.0);
                return (v, v);
            }
            return extrema_over(e, &all, x);
        }
        let (_, l) = e.index_sets(p, self.tol_active);
        let slack = self.tol_active * p.norm() * e.edges().iter().map(Vector::norm).fold(0.0, f64::max);
        let prods: Vec<f64> = e.edges().iter().map(|f| p.dot(f).abs()).collect();
        let on_discontinuity = prods.iter().any(|&a| a <= slack);
        if alpha < 2.0 && on_discontinuity {
            // weights |⟨p,e⟩|^{α−2} blow up exactly on the vanishing set L(p)
            return extrema_over(e, &l, x);
        }
        let v = if alpha == 2.0 {
            weighted_trace(e, x, |_| 1.0)
        } else {
            weighted_trace(e, x, |i| {
                if prods[i] <= slack {
                    0.0
                } else {
                    prods[i].powf(alpha - 2.0)
                }
            })
        };
        (v, v)
    }
}

/// `F_{E,α}(p, X)` on the continuity set, straight from the weighted formula.
pub fn f_alpha_raw(edges: &EdgeSet, alpha: f64, p: &Vector, x: &SymMatrix) -> f64 {
    weighted_trace(edges, x, |i| p.dot(&edges.edges()[i]).abs().powf(alpha - 2.0))
}

fn weighted_trace(e: &EdgeSet, x: &SymMatrix, w: impl Fn(usize) -> f64) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, f) in e.edges().iter().enumerate() {
        let wi = w(i);
        num += wi * x.quad_form(f);
        den += wi;
    }
    num / den
}
