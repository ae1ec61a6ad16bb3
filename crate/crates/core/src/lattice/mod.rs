//! Lattices, the update operators `M_α` and the synchronous growth scheme
//! `u⁽ⁿ⁾(x) = u⁽ⁿ⁻¹⁾(x) + M_α({u⁽ⁿ⁻¹⁾(x + e) − u⁽ⁿ⁻¹⁾(x)}_{e ∈ E})`.

mod datum;
mod malpha;
mod scheme;

pub use datum::InitialDatum;
pub use malpha::{m_alpha, median, Alpha};
pub use scheme::{evolve, evolve_field, Boundary, Field, SchemeConfig, Snapshot, Stepper, Trajectory, MAX_EDGES};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::operators::EdgeSet;

/// A full-rank lattice `Λ = B ℤᵈ`.
#[derive(Clone, Debug)]
pub struct Lattice {
    /// Columns of `B`.
    basis: Vec<Vector>,
    inverse: DMatrix<f64>,
}

impl Lattice {
    pub fn new(basis: Vec<Vector>) -> Result<Self> {
        let d = basis.len();
        if d == 0 {
            return Err(Error::Empty("lattice basis"));
        }
        for b in &basis {
            b.check_dim(d)?;
        }
        let m = DMatrix::from_fn(d, d, |i, j| basis[j][i]);
        let det = m.determinant();
        let scale = basis.iter().map(Vector::norm).product::<f64>();
        if det.abs() <= 1e-12 * scale {
            return Err(Error::Degenerate("lattice basis is singular".into()));
        }
        let inverse = m.try_inverse().expect("nonsingular basis");
        Ok(Lattice { basis, inverse })
    }

    pub fn integer(d: usize) -> Self {
        Self::new((0..d).map(|i| Vector::unit(d, i)).collect()).expect("identity basis")
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vector] {
        &self.basis
    }

    /// `B k` for integer coordinates `k`.
    pub fn point(&self, k: &[i64]) -> Vector {
        let mut v = Vector::zeros(self.dim());
        for (c, b) in k.iter().zip(&self.basis) {
            v = v.add_scaled(*c as f64, b);
        }
        v
    }

    /// `B⁻¹ v` without rounding.
    pub fn real_coords(&self, v: &Vector) -> Vec<f64> {
        let d = self.dim();
        (0..d)
            .map(|i| (0..d).map(|j| self.inverse[(i, j)] * v[j]).sum())
            .collect()
    }

    /// Integer coordinates of a lattice vector, checked to `1e−9`.
    pub fn coords(&self, v: &Vector) -> Result<Vec<i64>> {
        v.check_dim(self.dim())?;
        let real = self.real_coords(v);
        let k: Vec<i64> = real.iter().map(|x| x.round() as i64).collect();
        let err = real
            .iter()
            .zip(&k)
            .map(|(x, r)| (x - *r as f64).abs())
            .fold(0.0, f64::max);
        if err > 1e-9 * real.iter().fold(1.0f64, |m, x| m.max(x.abs())) {
            return Err(Error::NotInLattice(v.to_string()));
        }
        Ok(k)
    }

    /// Does `E` generate `Λ` as a group? Decided by integer row reduction of
    /// the edge coordinate matrix: `E` generates iff the reduced form has
    /// `d` unit pivots.
    pub fn generation_check(&self, edges: &EdgeSet) -> Result<bool> {
        let rows: Vec<Vec<i64>> = edges
            .edges()
            .iter()
            .map(|e| self.coords(e))
            .collect::<Result<_>>()?;
        Ok(lattice_index(&rows, self.dim()) == Some(1))
    }
}

/// Index `[ℤᵈ : span_ℤ(rows)]`, or `None` when the rows have rank `< d`.
pub fn lattice_index(rows: &[Vec<i64>], d: usize) -> Option<u128> {
    let mut m: Vec<Vec<i128>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| x as i128).collect())
        .collect();
    let mut index: u128 = 1;
    let mut top = 0;
    for col in 0..d {
        // Euclid on column `col` among rows `top..`
        loop {
            let piv = (top..m.len())
                .filter(|&r| m[r][col] != 0)
                .min_by_key(|&r| m[r][col].abs());
            let Some(piv) = piv else {
                return None;
            };
            m.swap(top, piv);
            let mut done = true;
            for r in top + 1..m.len() {
                let q = m[r][col] / m[top][col];
                if q != 0 {
                    for c in col..d {
                        m[r][c] -= q * m[top][c];
                    }
                }
                if m[r][col] != 0 {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        index *= m[top][col].unsigned_abs();
        top += 1;
    }
    Some(index)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::LatticeEdges;

    #[test]
    fn generation() {
        let z2 = Lattice::integer(2);
        assert!(z2.generation_check(&EdgeSet::standard(2)).unwrap());
        let doubled = EdgeSet::new(
            [[2.0, 0.0], [-2.0, 0.0], [0.0, 1.0], [0.0, -1.0]]
                .into_iter()
                .map(Vector::from)
                .collect(),
        )
        .unwrap();
        assert!(!z2.generation_check(&doubled).unwrap());
        let tri = LatticeEdges::named("triangular").unwrap();
        let lat = Lattice::new(tri.basis.clone()).unwrap();
        assert!(lat.generation_check(&tri.edges).unwrap());
        let off = EdgeSet::new(vec![
            Vector::from([0.5, 0.0]),
            Vector::from([-0.5, 0.0]),
            Vector::from([0.0, 1.0]),
            Vector::from([0.0, -1.0]),
        ])
        .unwrap();
        assert!(matches!(z2.generation_check(&off), Err(Error::NotInLattice(_))));
    }

    #[test]
    fn index_of_sublattices() {
        assert_eq!(lattice_index(&[vec![2, 1], vec![0, 3]], 2), Some(6));
        assert_eq!(lattice_index(&[vec![2, 0], vec![3, 0], vec![0, 1]], 2), Some(1));
        assert_eq!(lattice_index(&[vec![1, 1], vec![2, 2]], 2), None);
    }
}
