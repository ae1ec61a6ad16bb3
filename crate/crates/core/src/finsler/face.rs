use crate::linalg::{Subspace, Vector};

/// A face of a polytope given by its vertices, with an orthonormal basis of
/// the direction space of its affine hull.
#[derive(Clone, Debug)]
pub struct SubdifferentialFace {
    vertices: Vec<Vector>,
    affine_basis: Vec<Vector>,
}

impl SubdifferentialFace {
    pub fn new(vertices: Vec<Vector>) -> Self {
        let affine_basis = match vertices.split_first() {
            Some((v0, rest)) => {
                let diffs: Vec<Vector> = rest.iter().map(|v| v - v0).collect();
                Subspace::span(v0.dim(), &diffs).basis().to_vec()
            }
            None => Vec::new(),
        };
        SubdifferentialFace {
            vertices,
            affine_basis,
        }
    }

    pub fn vertices(&self) -> &[Vector] {
        &self.vertices
    }

    pub fn affine_basis(&self) -> &[Vector] {
        &self.affine_basis
    }

    pub fn dim(&self) -> usize {
        self.affine_basis.len()
    }

    pub fn centroid(&self) -> Vector {
        let d = self.vertices[0].dim();
        let mut c = Vector::zeros(d);
        for v in &self.vertices {
            c = &c + v;
        }
        c.scaled(1.0 / self.vertices.len() as f64)
    }

    /// Does `x` lie in the affine hull of the face (within `tol`)?
    pub fn in_affine_hull(&self, x: &Vector, tol: f64) -> bool {
        let rel = x - &self.vertices[0];
        let mut r = rel.clone();
        for b in &self.affine_basis {
            r = r.add_scaled(-rel.dot(b), b);
        }
        r.norm() <= tol * x.norm().max(1.0)
    }
}
