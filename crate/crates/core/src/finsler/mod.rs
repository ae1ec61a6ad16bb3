//! Polyhedral Finsler norms `φ(q) = max_i ⟨g_i, q⟩`, represented by the
//! extreme points `g_i` of the dual unit ball.

mod face;
mod catalog;

pub use face::SubdifferentialFace;
pub use catalog::{builtin, load_norm, parse_norm, resolve_norm, NormFile};

use crate::error::{Error, Result};
use crate::linalg::{solve_in_place, SymMatrix, Subspace, Vector};
use crate::simplex::{self, LpOutcome};

/// Default relative tolerance for active generators.
pub const TOL_ACTIVE: f64 = 1e-9;

/// Largest dimension for which the primal ball vertices are enumerated.
pub const MAX_VERTEX_DIM: usize = 4;

#[derive(Clone, Debug)]
pub struct PolyhedralNorm {
    name: String,
    dim: usize,
    generators: Vec<Vector>,
    /// Vertices of `{φ ≤ 1}`, i.e. the generators of `φ*`.
    primal_vertices: Option<Vec<Vector>>,
    symmetric: bool,
}

fn scale_of(points: &[Vector]) -> f64 {
    points.iter().map(Vector::norm_inf).fold(0.0, f64::max)
}

fn dedup(points: &[Vector], rel: f64) -> Vec<Vector> {
    let scale = scale_of(points).max(f64::MIN_POSITIVE);
    let mut out: Vec<Vector> = Vec::new();
    for p in points {
        if !out.iter().any(|o| o.dist(p) <= rel * scale) {
            out.push(p.clone());
        }
    }
    out
}

/// The extreme points of `conv(points)`, in input order. Fails when the
/// origin is not an interior point of the hull.
pub fn canonical_generators(points: &[Vector]) -> Result<Vec<Vector>> {
    let first = points
        .first()
        .ok_or(Error::Empty("generator list"))?;
    let d = first.dim();
    if d == 0 {
        return Err(Error::Degenerate("zero-dimensional generators".into()));
    }
    for p in points {
        p.check_dim(d)?;
        if !p.is_finite() {
            return Err(Error::Degenerate(format!("non-finite generator {p}")));
        }
    }
    let pts = dedup(points, 1e-12);
    let scale = scale_of(&pts);
    let tol = 1e-9 * scale.max(1.0);
    let mut extreme = Vec::new();
    for (k, p) in pts.iter().enumerate() {
        let others: Vec<&[f64]> = pts
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != k)
            .map(|(_, q)| q.as_slice())
            .collect();
        if simplex::convex_combination(&others, p.as_slice(), tol).is_none() {
            extreme.push(p.clone());
        }
    }
    if !origin_is_interior(&extreme, d) {
        return Err(Error::Degenerate(
            "origin is not an interior point of the generator hull".into(),
        ));
    }
    Ok(extreme)
}

/// Tests whether `t·(±ē_k) ∈ conv(points)` for some `t > 0` and every `k`.
fn origin_is_interior(points: &[Vector], d: usize) -> bool {
    if points.len() < d + 1 {
        return false;
    }
    let scale = scale_of(points);
    let n = points.len();
    for k in 0..d {
        for sign in [1.0, -1.0] {
            // variables (λ_1..λ_n, t): Σ λ_j g_j − t u = 0, Σ λ_j = 1
            let mut a: Vec<Vec<f64>> = (0..d)
                .map(|i| {
                    let mut row: Vec<f64> = points.iter().map(|p| p[i]).collect();
                    row.push(if i == k { -sign } else { 0.0 });
                    row
                })
                .collect();
            let mut ones = vec![1.0; n];
            ones.push(0.0);
            a.push(ones);
            let mut b = vec![0.0; d];
            b.push(1.0);
            let mut c = vec![0.0; n];
            c.push(-1.0);
            match simplex::minimize(&a, &b, &c, 1e-9 * scale.max(1.0)) {
                LpOutcome::Optimal { value, .. } if -value > 1e-9 * scale => {}
                _ => return false,
            }
        }
    }
    true
}

/// Vertices of `{x : ⟨g, x⟩ ≤ 1 ∀g}` by intersecting every `d`-subset of
/// facet hyperplanes and keeping the feasible points.
fn enumerate_ball_vertices(generators: &[Vector], d: usize) -> Result<Vec<Vector>> {
    if d > MAX_VERTEX_DIM {
        return Err(Error::DimensionCap {
            what: "dual-ball vertex enumeration",
            dim: d,
            max: MAX_VERTEX_DIM,
        });
    }
    let n = generators.len();
    let mut found: Vec<Vector> = Vec::new();
    let mut idx: Vec<usize> = (0..d).collect();
    loop {
        let mut a = Vec::with_capacity(d * d);
        for &i in &idx {
            a.extend_from_slice(generators[i].as_slice());
        }
        let mut x = vec![1.0; d];
        if solve_in_place(&mut a, &mut x, d, 1e-10).is_some() {
            let v = Vector::new(x);
            let vmax = v.norm_inf().max(1.0);
            let feasible = generators.iter().all(|g| g.dot(&v) <= 1.0 + 1e-9 * vmax);
            if feasible && !found.iter().any(|f| f.dist(&v) <= 1e-9 * vmax) {
                found.push(v);
            }
        }
        // next combination
        let mut k = d;
        loop {
            if k == 0 {
                return Ok(found);
            }
            k -= 1;
            if idx[k] < n - d + k {
                idx[k] += 1;
                for j in k + 1..d {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

impl PolyhedralNorm {
    /// The gauge `q ↦ max ⟨g, q⟩` over `points`, reduced to the extreme points.
    pub fn from_generators(points: &[Vector]) -> Result<Self> {
        let generators = canonical_generators(points)?;
        let dim = generators[0].dim();
        let primal_vertices = if dim <= MAX_VERTEX_DIM {
            Some(enumerate_ball_vertices(&generators, dim)?)
        } else {
            None
        };
        let symmetric = closed_under_negation(&generators);
        Ok(PolyhedralNorm {
            name: "custom".into(),
            dim,
            generators,
            primal_vertices,
            symmetric,
        })
    }

    /// The gauge whose unit ball is `conv(points)`; its dual is
    /// `p ↦ max ⟨p, x⟩` over `points`.
    pub fn from_dual_generators(points: &[Vector]) -> Result<Self> {
        Self::from_generators(points)?.dual()
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[Vector] {
        &self.generators
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Vertices of the unit ball `{φ ≤ 1}`.
    pub fn primal_vertices(&self) -> Result<&[Vector]> {
        self.primal_vertices
            .as_deref()
            .ok_or(Error::DimensionCap {
                what: "dual-ball vertex enumeration",
                dim: self.dim,
                max: MAX_VERTEX_DIM,
            })
    }

    pub fn eval(&self, q: &Vector) -> Result<f64> {
        q.check_dim(self.dim)?;
        Ok(self.eval_slice(q.as_slice()))
    }

    /// `φ(q)` without the dimension check.
    pub fn eval_slice(&self, q: &[f64]) -> f64 {
        self.generators
            .iter()
            .map(|g| crate::linalg::dot(g.as_slice(), q))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `φ*(p)`, the support function of `{φ ≤ 1}`.
    pub fn dual_eval(&self, p: &Vector) -> Result<f64> {
        p.check_dim(self.dim)?;
        Ok(self.dual_eval_slice(self.primal_vertices()?, p.as_slice()))
    }

    fn dual_eval_slice(&self, vertices: &[Vector], p: &[f64]) -> f64 {
        vertices
            .iter()
            .map(|v| crate::linalg::dot(v.as_slice(), p))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `φ*` as a polyhedral norm in its own right (vertices re-enumerated).
    pub fn dual(&self) -> Result<PolyhedralNorm> {
        let v = self.primal_vertices()?;
        Ok(PolyhedralNorm::from_generators(v)?.with_name(format!("{}*", self.name)))
    }

    /// Euclidean Lipschitz constant `max |g_i|`.
    pub fn lipschitz(&self) -> f64 {
        self.generators.iter().map(Vector::norm).fold(0.0, f64::max)
    }

    /// `∂φ(q)`: the face of the dual ball spanned by the active generators.
    pub fn subdifferential(&self, q: &Vector, tol_active: f64) -> Result<SubdifferentialFace> {
        q.check_dim(self.dim)?;
        Ok(active_face(&self.generators, q, tol_active))
    }

    /// `∂φ*(p)`: the face of `{φ ≤ 1}` exposed by `p`.
    pub fn dual_subdifferential(&self, p: &Vector, tol_active: f64) -> Result<SubdifferentialFace> {
        p.check_dim(self.dim)?;
        Ok(active_face(self.primal_vertices()?, p, tol_active))
    }

    /// `𝒯(p, φ) = ∂φ*(p)^⊥`.
    pub fn tangent_space(&self, p: &Vector) -> Result<Subspace> {
        self.tangent_space_tol(p, TOL_ACTIVE)
    }

    pub fn tangent_space_tol(&self, p: &Vector, tol_active: f64) -> Result<Subspace> {
        let face = self.dual_subdifferential(p, tol_active)?;
        Ok(Subspace::orthogonal_complement(self.dim, face.vertices()))
    }

    /// `⟨p⟩ ⊕ 𝒯(p, φ)`.
    pub fn support_space(&self, p: &Vector) -> Result<Subspace> {
        let t = self.tangent_space(p)?;
        Ok(t.join(&Subspace::span(self.dim, std::slice::from_ref(p))))
    }

    /// Spanning set `b_i ⊗ b_j + b_j ⊗ b_i` (`i ≤ j`) of `𝒮(p, φ)`.
    pub fn matrix_space_basis(&self, p: &Vector) -> Result<Vec<SymMatrix>> {
        p.check_dim(self.dim)?;
        if p.norm_inf() == 0.0 {
            return Ok(Vec::new());
        }
        let v = self.support_space(p)?;
        let b = v.basis();
        let mut out = Vec::with_capacity(b.len() * (b.len() + 1) / 2);
        for i in 0..b.len() {
            for j in i..b.len() {
                out.push(SymMatrix::sym_outer(&b[i], &b[j]));
            }
        }
        Ok(out)
    }

    /// `‖π_V X π_V − X‖_F / max(1, ‖X‖_F)` with `V = ⟨p⟩ ⊕ 𝒯(p, φ)`.
    pub fn matrix_space_residual(&self, p: &Vector, x: &SymMatrix) -> Result<f64> {
        p.check_dim(self.dim)?;
        let v = if p.norm_inf() == 0.0 {
            Subspace::zero(self.dim)
        } else {
            self.support_space(p)?
        };
        Ok(support_residual(&v, x))
    }

    pub fn matrix_space_membership(&self, p: &Vector, x: &SymMatrix, tol: f64) -> Result<bool> {
        Ok(self.matrix_space_residual(p, x)? <= tol)
    }
}

/// Relative distance of `X` from the matrices that only see `V`.
pub fn support_residual(v: &Subspace, x: &SymMatrix) -> f64 {
    let proj = x.congruence(&v.projector());
    (&proj - x).frobenius_norm() / x.frobenius_norm().max(1.0)
}

fn active_face(points: &[Vector], q: &Vector, tol_active: f64) -> SubdifferentialFace {
    let qn = q.norm();
    if qn == 0.0 {
        return SubdifferentialFace::new(points.to_vec());
    }
    let vals: Vec<f64> = points.iter().map(|g| g.dot(q)).collect();
    let top = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let cut = top - tol_active * qn;
    SubdifferentialFace::new(
        points
            .iter()
            .zip(&vals)
            .filter(|(_, &v)| v >= cut)
            .map(|(g, _)| g.clone())
            .collect(),
    )
}

fn closed_under_negation(points: &[Vector]) -> bool {
    let scale = scale_of(points).max(1.0);
    points
        .iter()
        .all(|p| points.iter().any(|q| q.dist(&-p) <= 1e-12 * scale))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l1(d: usize) -> PolyhedralNorm {
        builtin(&format!("l1:{d}")).unwrap()
    }

    #[test]
    fn l1_values() {
        let n = l1(2);
        assert_eq!(n.eval(&Vector::from([3.0, -4.0])).unwrap(), 7.0);
        assert_eq!(n.dual_eval(&Vector::from([3.0, -4.0])).unwrap(), 4.0);
        assert_eq!(n.eval(&Vector::zeros(2)).unwrap(), 0.0);
        assert_eq!(n.dual_eval(&Vector::zeros(2)).unwrap(), 0.0);
        assert!(n.eval(&Vector::zeros(3)).is_err());
    }

    #[test]
    fn rhombic_value() {
        let n = builtin("rhombic-dodecahedron").unwrap();
        assert_eq!(n.generators().len(), 12);
        assert!((n.eval(&Vector::from([1.0, 1.0, 0.0])).unwrap() - 1.0).abs() < 1e-15);
        // against the closed form max_j ½ Σ_{i≠j} |p_i|
        let p = Vector::from([0.3, -1.7, 0.9]);
        let direct = (0..3)
            .map(|j| 0.5 * (0..3).filter(|&i| i != j).map(|i| p[i].abs()).sum::<f64>())
            .fold(0.0, f64::max);
        assert!((n.eval(&p).unwrap() - direct).abs() < 1e-14);
    }

    #[test]
    fn canonical_drops_chord_midpoint() {
        let pts: Vec<Vector> = [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0], [0.5, 0.0]]
            .into_iter()
            .map(Vector::from)
            .collect();
        let g = canonical_generators(&pts).unwrap();
        assert_eq!(g, pts[..4].to_vec());
    }

    #[test]
    fn degenerate_generators_rejected() {
        let pts: Vec<Vector> = [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]
            .into_iter()
            .map(Vector::from)
            .collect();
        assert!(matches!(
            PolyhedralNorm::from_generators(&pts),
            Err(Error::Degenerate(_))
        ));
        assert!(PolyhedralNorm::from_generators(&[Vector::from([1.0])]).is_err());
    }

    #[test]
    fn asymmetric_gauge() {
        let pts: Vec<Vector> = [[1.0, 0.0], [0.0, 1.0], [-1.0, -1.0]]
            .into_iter()
            .map(Vector::from)
            .collect();
        let n = PolyhedralNorm::from_generators(&pts).unwrap();
        assert!(!n.is_symmetric());
        assert_eq!(n.primal_vertices().unwrap().len(), 3);
        let q = Vector::from([0.4, -2.0]);
        let back = n.dual().unwrap().dual().unwrap();
        assert!((back.eval(&q).unwrap() - n.eval(&q).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn l1_subdifferentials() {
        let dual = builtin("linf:2").unwrap();
        let f = dual.subdifferential(&Vector::from([2.0, 1.0]), TOL_ACTIVE).unwrap();
        assert_eq!(f.vertices(), &[Vector::from([1.0, 0.0])]);
        let f = dual.subdifferential(&Vector::from([1.0, 1.0]), TOL_ACTIVE).unwrap();
        assert_eq!(f.dim(), 1);
        assert_eq!(f.vertices().len(), 2);
        let f = dual.subdifferential(&Vector::zeros(2), TOL_ACTIVE).unwrap();
        assert_eq!(f.vertices().len(), 4);
    }

    #[test]
    fn l1_tangent_spaces() {
        let n = l1(2);
        let t = n.tangent_space(&Vector::from([2.0, 1.0])).unwrap();
        assert_eq!(t.dim(), 1);
        assert!(t.contains(&Vector::from([0.0, 1.0]), 1e-12));
        assert_eq!(n.tangent_space(&Vector::from([1.0, 1.0])).unwrap().dim(), 0);
        assert_eq!(n.tangent_space(&Vector::zeros(2)).unwrap().dim(), 0);
    }

    #[test]
    fn matrix_spaces() {
        let n = l1(2);
        let b = n.matrix_space_basis(&Vector::from([1.0, 1.0])).unwrap();
        assert_eq!(b.len(), 1);
        let expected = SymMatrix::from_fn(2, |_, _| 1.0);
        assert!((&b[0] - &expected).max_abs() < 1e-12);
        assert_eq!(n.matrix_space_basis(&Vector::from([2.0, 1.0])).unwrap().len(), 3);
        assert!(n.matrix_space_basis(&Vector::zeros(2)).unwrap().is_empty());

        let x = SymMatrix::diag(&[1.0, 0.0]);
        assert!(n.matrix_space_membership(&Vector::from([0.0, 3.0]), &x, 1e-9).unwrap());
        assert!(!n.matrix_space_membership(&Vector::from([1.0, 1.0]), &x, 1e-9).unwrap());
        let zero = SymMatrix::zeros(2);
        assert!(n.matrix_space_membership(&Vector::from([1.0, 1.0]), &zero, 1e-9).unwrap());
    }

    #[test]
    fn vertex_enumeration_cap() {
        let pts: Vec<Vector> = (0..5)
            .flat_map(|i| [Vector::unit(5, i), -&Vector::unit(5, i)])
            .collect();
        let n = PolyhedralNorm::from_generators(&pts).unwrap();
        assert_eq!(n.eval(&Vector::from([1.0, -3.0, 0.0, 0.5, 2.0])).unwrap(), 3.0);
        assert!(matches!(
            n.dual_eval(&Vector::zeros(5)),
            Err(Error::DimensionCap { .. })
        ));
    }
}
