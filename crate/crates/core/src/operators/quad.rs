use crate::error::{Error, Result};
use crate::finsler::SubdifferentialFace;
use crate::linalg::{rank, solve_in_place, SymMatrix, Vector};

/// Containment slack for barycentric coordinates of stationary points.
const CONTAIN_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct QuadExtrema {
    pub min: f64,
    pub max: f64,
    pub argmin: Vector,
    pub argmax: Vector,
}

impl QuadExtrema {
    fn consider(&mut self, x: Vector, val: f64) {
        if val < self.min {
            self.min = val;
            self.argmin = x.clone();
        }
        if val > self.max {
            self.max = val;
            self.argmax = x;
        }
    }
}

/// Exact extrema of `q ↦ ⟨Xq, q⟩` over `conv(face.vertices())`.
///
/// Every extremum sits in the relative interior of some face, where it is a
/// stationary point of the restricted quadratic. Those faces are covered by
/// simplices on affinely independent vertex subsets, so it suffices to solve
/// the restricted stationarity system on each such simplex and keep the
/// solutions with nonnegative barycentric coordinates.
pub fn quad_extrema_over_face(x: &SymMatrix, face: &SubdifferentialFace) -> Result<QuadExtrema> {
    let k = face.dim();
    if k > 3 {
        return Err(Error::FaceTooLarge(k));
    }
    let verts = face.vertices();
    let first = verts.first().ok_or(Error::Empty("face"))?;
    let mut out = QuadExtrema {
        min: f64::INFINITY,
        max: f64::NEG_INFINITY,
        argmin: first.clone(),
        argmax: first.clone(),
    };
    let xv: Vec<Vector> = verts.iter().map(|v| x.mul_vec(v)).collect();
    for v in verts {
        out.consider(v.clone(), x.quad_form(v));
    }
    let d = first.dim();
    let m = verts.len();
    for size in 2..=(k + 1).min(m) {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            stationary_on_simplex(x, verts, &xv, &idx, d, &mut out);
            if !next_combination(&mut idx, m) {
                break;
            }
        }
    }
    Ok(out)
}

fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let s = idx.len();
    let mut k = s;
    while k > 0 {
        k -= 1;
        if idx[k] < n - s + k {
            idx[k] += 1;
            for j in k + 1..s {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn stationary_on_simplex(
    x: &SymMatrix,
    verts: &[Vector],
    xv: &[Vector],
    idx: &[usize],
    d: usize,
    out: &mut QuadExtrema,
) {
    let v0 = &verts[idx[0]];
    let dirs: Vec<Vector> = idx[1..].iter().map(|&i| &verts[i] - v0).collect();
    let s = dirs.len();
    if rank(d, &dirs) < s {
        return;
    }
    // f(λ) = f(v0) + 2 gᵀλ + λᵀ H λ with H = Dᵀ X D, g = Dᵀ X v0
    let xd: Vec<Vector> = dirs.iter().map(|u| x.mul_vec(u)).collect();
    let mut h = vec![0.0; s * s];
    for a in 0..s {
        for b in 0..s {
            h[a * s + b] = dirs[a].dot(&xd[b]);
        }
    }
    let mut lam: Vec<f64> = dirs.iter().map(|u| -u.dot(&xv[idx[0]])).collect();
    if solve_in_place(&mut h, &mut lam, s, 1e-12).is_none() {
        return;
    }
    let total: f64 = lam.iter().sum();
    if lam.iter().any(|&l| l < -CONTAIN_TOL) || total > 1.0 + CONTAIN_TOL {
        return;
    }
    let mut pt = v0.clone();
    for (l, u) in lam.iter().zip(&dirs) {
        pt = pt.add_scaled(*l, u);
    }
    let val = x.quad_form(&pt);
    out.consider(pt, val);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segment_with_indefinite_form() {
        let face = SubdifferentialFace::new(vec![Vector::from([1.0, 0.0]), Vector::from([0.0, 1.0])]);
        let r = quad_extrema_over_face(&SymMatrix::diag(&[1.0, -1.0]), &face).unwrap();
        assert_eq!((r.min, r.max), (-1.0, 1.0));
        assert_eq!(r.argmin, Vector::from([0.0, 1.0]));
        assert_eq!(r.argmax, Vector::from([1.0, 0.0]));
    }

    #[test]
    fn identity_on_segment_finds_interior_minimum() {
        let face = SubdifferentialFace::new(vec![Vector::from([1.0, 0.0]), Vector::from([0.0, 1.0])]);
        let r = quad_extrema_over_face(&SymMatrix::identity(2), &face).unwrap();
        assert!((r.min - 0.5).abs() < 1e-15);
        assert!((r.argmin.dist(&Vector::from([0.5, 0.5]))) < 1e-15);
        assert_eq!(r.max, 1.0);
    }

    #[test]
    fn single_vertex() {
        let v = Vector::from([0.3, -2.0, 1.0]);
        let x = SymMatrix::from_fn(3, |i, j| (i + 2 * j) as f64 - 1.5);
        let r = quad_extrema_over_face(&x, &SubdifferentialFace::new(vec![v.clone()])).unwrap();
        assert_eq!(r.min, x.quad_form(&v));
        assert_eq!(r.max, r.min);
    }

    #[test]
    fn four_dimensional_face_rejected() {
        let mut vs: Vec<Vector> = (0..4).map(|i| Vector::unit(4, i)).collect();
        vs.push(Vector::zeros(4));
        let r = quad_extrema_over_face(&SymMatrix::identity(4), &SubdifferentialFace::new(vs));
        assert!(matches!(r, Err(Error::FaceTooLarge(4))));
    }
}
