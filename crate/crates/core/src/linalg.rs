//! Small dense linear algebra for the desk-scale dimensions used throughout
//! (d ≤ 4): vectors, packed symmetric matrices, orthonormal subspaces and a
//! pivoted Gaussian solve.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative pivot threshold for orthogonal elimination.
pub const PIVOT_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(coords: Vec<f64>) -> Self {
        Vector(coords)
    }

    pub fn zeros(dim: usize) -> Self {
        Vector(vec![0.0; dim])
    }

    /// The `i`-th standard basis vector.
    pub fn unit(dim: usize, i: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[i] = 1.0;
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        dot(&self.0, &other.0)
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn scaled(&self, s: f64) -> Vector {
        Vector(self.0.iter().map(|x| x * s).collect())
    }

    /// `self + s * other`
    pub fn add_scaled(&self, s: f64, other: &Vector) -> Vector {
        Vector(self.0.iter().zip(&other.0).map(|(a, b)| a + s * b).collect())
    }

    pub fn normalized(&self) -> Option<Vector> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| self.scaled(1.0 / n))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    pub fn dist(&self, other: &Vector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: self.dim(),
            });
        }
        Ok(())
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl<const N: usize> From<[f64; N]> for Vector {
    fn from(a: [f64; N]) -> Self {
        Vector(a.to_vec())
    }
}

impl From<Vec<f64>> for Vector {
    fn from(v: Vec<f64>) -> Self {
        Vector(v)
    }
}

impl From<&[f64]> for Vector {
    fn from(v: &[f64]) -> Self {
        Vector(v.to_vec())
    }
}

impl Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for Vector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl Add for &Vector {
    type Output = Vector;
    fn add(self, rhs: &Vector) -> Vector {
        Vector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &Vector {
    type Output = Vector;
    fn sub(self, rhs: &Vector) -> Vector {
        Vector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Mul<f64> for &Vector {
    type Output = Vector;
    fn mul(self, s: f64) -> Vector {
        self.scaled(s)
    }
}

impl Neg for &Vector {
    type Output = Vector;
    fn neg(self) -> Vector {
        self.scaled(-1.0)
    }
}

impl fmt::Display for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

/// Symmetric matrix with a single stored (upper) triangle, so that
/// `get(i, j) == get(j, i)` holds exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    upper: Vec<f64>,
}

impl SymMatrix {
    fn offset(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        i * (2 * self.dim - i - 1) / 2 + j
    }

    pub fn zeros(dim: usize) -> Self {
        SymMatrix {
            dim,
            upper: vec![0.0; dim * (dim + 1) / 2],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diag(&vec![1.0; dim])
    }

    pub fn diag(entries: &[f64]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, &x) in entries.iter().enumerate() {
            m.set(i, i, x);
        }
        m
    }

    /// Builds from `f(i, j)` evaluated on the upper triangle only.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// `u ⊗ u`
    pub fn outer(u: &Vector) -> Self {
        Self::from_fn(u.dim(), |i, j| u[i] * u[j])
    }

    /// `u ⊗ v + v ⊗ u`
    pub fn sym_outer(u: &Vector, v: &Vector) -> Self {
        Self::from_fn(u.dim(), |i, j| u[i] * v[j] + v[i] * u[j])
    }

    /// Symmetrizes a dense matrix as `(A + Aᵀ) / 2`.
    pub fn from_dense(a: &DMatrix<f64>) -> Self {
        Self::from_fn(a.nrows(), |i, j| 0.5 * (a[(i, j)] + a[(j, i)]))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.upper[self.offset(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, x: f64) {
        let k = self.offset(i, j);
        self.upper[k] = x;
    }

    pub fn mul_vec(&self, v: &Vector) -> Vector {
        Vector::new(
            (0..self.dim)
                .map(|i| (0..self.dim).map(|j| self.get(i, j) * v[j]).sum())
                .collect(),
        )
    }

    /// `⟨X v, v⟩`
    pub fn quad_form(&self, v: &Vector) -> f64 {
        self.quad_form_slice(v.as_slice())
    }

    pub(crate) fn quad_form_slice(&self, v: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim {
            s += self.get(i, i) * v[i] * v[i];
            for j in i + 1..self.dim {
                s += 2.0 * self.get(i, j) * v[i] * v[j];
            }
        }
        s
    }

    /// `⟨X u, v⟩`
    pub fn bilinear(&self, u: &[f64], v: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                s += self.get(i, j) * u[i] * v[j];
            }
        }
        s
    }

    pub fn scaled(&self, s: f64) -> SymMatrix {
        SymMatrix {
            dim: self.dim,
            upper: self.upper.iter().map(|x| x * s).collect(),
        }
    }

    pub fn add_scaled(&self, s: f64, other: &SymMatrix) -> SymMatrix {
        SymMatrix {
            dim: self.dim,
            upper: self
                .upper
                .iter()
                .zip(&other.upper)
                .map(|(a, b)| a + s * b)
                .collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                s += self.get(i, j).powi(2);
            }
        }
        s.sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.upper.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.upper.iter().all(|x| x.is_finite())
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.get(i, j))
    }

    /// `P X P` for a symmetric `P` (typically an orthogonal projector).
    pub fn congruence(&self, p: &SymMatrix) -> SymMatrix {
        let pd = p.to_dense();
        Self::from_dense(&(&pd * self.to_dense() * &pd))
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.to_dense())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }
}

impl Add for &SymMatrix {
    type Output = SymMatrix;
    fn add(self, rhs: &SymMatrix) -> SymMatrix {
        self.add_scaled(1.0, rhs)
    }
}

impl Sub for &SymMatrix {
    type Output = SymMatrix;
    fn sub(self, rhs: &SymMatrix) -> SymMatrix {
        self.add_scaled(-1.0, rhs)
    }
}

/// A linear subspace given by an orthonormal basis.
#[derive(Clone, Debug)]
pub struct Subspace {
    ambient: usize,
    basis: Vec<Vector>,
}

impl Subspace {
    pub fn zero(ambient: usize) -> Self {
        Subspace {
            ambient,
            basis: Vec::new(),
        }
    }

    pub fn full(ambient: usize) -> Self {
        Subspace {
            ambient,
            basis: (0..ambient).map(|i| Vector::unit(ambient, i)).collect(),
        }
    }

    /// Orthonormalizes `vectors` by modified Gram–Schmidt, dropping any
    /// vector whose residual falls under the relative pivot threshold.
    pub fn span(ambient: usize, vectors: &[Vector]) -> Self {
        let mut basis: Vec<Vector> = Vec::new();
        for v in vectors {
            let scale = v.norm();
            if scale == 0.0 {
                continue;
            }
            let mut r = v.clone();
            // two passes keep the basis orthogonal to working precision
            for _ in 0..2 {
                for b in &basis {
                    let c = r.dot(b);
                    r = r.add_scaled(-c, b);
                }
            }
            let rn = r.norm();
            if rn > PIVOT_TOL * scale.max(1.0) {
                basis.push(r.scaled(1.0 / rn));
            }
            if basis.len() == ambient {
                break;
            }
        }
        Subspace { ambient, basis }
    }

    /// The orthogonal complement of `span(vectors)`.
    pub fn orthogonal_complement(ambient: usize, vectors: &[Vector]) -> Self {
        Self::span(ambient, vectors).complement()
    }

    pub fn complement(&self) -> Subspace {
        let need = self.ambient - self.basis.len();
        let mut out: Vec<Vector> = Vec::with_capacity(need);
        while out.len() < need {
            // greedily take the standard direction with the largest residual
            let mut best: Option<(f64, Vector)> = None;
            for i in 0..self.ambient {
                let mut r = Vector::unit(self.ambient, i);
                for _ in 0..2 {
                    for b in self.basis.iter().chain(out.iter()) {
                        let c = r.dot(b);
                        r = r.add_scaled(-c, b);
                    }
                }
                let rn = r.norm();
                if best.as_ref().map_or(true, |(m, _)| rn > *m) {
                    best = Some((rn, r));
                }
            }
            let (rn, r) = best.expect("ambient dimension is positive");
            out.push(r.scaled(1.0 / rn));
        }
        Subspace {
            ambient: self.ambient,
            basis: out,
        }
    }

    /// Span of the union of two subspaces.
    pub fn join(&self, other: &Subspace) -> Subspace {
        let all: Vec<Vector> = self.basis.iter().chain(other.basis.iter()).cloned().collect();
        Subspace::span(self.ambient, &all)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vector] {
        &self.basis
    }

    pub fn project(&self, v: &Vector) -> Vector {
        let mut out = Vector::zeros(self.ambient);
        for b in &self.basis {
            out = out.add_scaled(v.dot(b), b);
        }
        out
    }

    pub fn contains(&self, v: &Vector, tol: f64) -> bool {
        self.project(v).dist(v) <= tol * v.norm().max(1.0)
    }

    /// Orthogonal projector `π_V`.
    pub fn projector(&self) -> SymMatrix {
        let mut p = SymMatrix::zeros(self.ambient);
        for b in &self.basis {
            p = &p + &SymMatrix::outer(b);
        }
        p
    }
}

/// Solves the `n × n` system `a x = b` in place by Gaussian elimination with
/// partial pivoting (`a` row-major). Returns `None` when a pivot falls below
/// `rel_tol` times the largest entry of `a`.
pub(crate) fn solve_in_place(a: &mut [f64], b: &mut [f64], n: usize, rel_tol: f64) -> Option<()> {
    let scale = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return None;
    }
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&r, &s| a[r * n + col].abs().total_cmp(&a[s * n + col].abs()))
            .unwrap();
        if a[piv * n + col].abs() <= rel_tol * scale {
            return None;
        }
        if piv != col {
            for k in 0..n {
                a.swap(piv * n + k, col * n + k);
            }
            b.swap(piv, col);
        }
        let d = a[col * n + col];
        for r in col + 1..n {
            let f = a[r * n + col] / d;
            if f != 0.0 {
                for k in col..n {
                    a[r * n + k] -= f * a[col * n + k];
                }
                b[r] -= f * b[col];
            }
        }
    }
    for col in (0..n).rev() {
        let mut s = b[col];
        for k in col + 1..n {
            s -= a[col * n + k] * b[k];
        }
        b[col] = s / a[col * n + col];
    }
    Some(())
}

/// Numerical rank of a set of vectors under the Gram–Schmidt pivot rule.
pub fn rank(ambient: usize, vectors: &[Vector]) -> usize {
    Subspace::span(ambient, vectors).dim()
}
