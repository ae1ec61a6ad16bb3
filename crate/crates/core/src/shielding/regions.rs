//! Decomposition of `ℝ^d` into the cones `M_i` where generator `g_i` is
//! active, and the codimension-one interfaces between them.

use crate::error::{Error, Result};
use crate::finsler::PolyhedralNorm;
use crate::linalg::{rank, Vector};

const FACET_TOL: f64 = 1e-9;

/// Largest dimension with an explicit region decomposition.
pub const MAX_REGION_DIM: usize = 3;

/// The cone `M_i = {q : φ(q) = ⟨g_i, q⟩}`, spanned by the vertices of the
/// facet of `{φ ≤ 1}` exposed by `g_i`.
#[derive(Clone, Debug)]
pub struct Region {
    pub generator: usize,
    /// Indices into the primal ball vertices of the facet exposed by `g_i`.
    pub facet: Vec<usize>,
    /// Unit extreme rays.
    pub rays: Vec<Vector>,
    /// Unit normals `n` with `M_i = {⟨n, x⟩ ≤ 0}`, one per interface.
    pub constraints: Vec<Vector>,
}

/// `M_i ∩ M_j` when it has codimension one: a ray in 2D, a planar wedge in 3D.
#[derive(Clone, Debug)]
pub struct Interface {
    pub i: usize,
    pub j: usize,
    /// Unit extreme rays of the interface cone.
    pub rays: Vec<Vector>,
    /// `(g_i − g_j) / |g_i − g_j|`.
    pub normal: Vector,
    /// `|g_i − g_j|`.
    pub jump: f64,
}

#[derive(Clone, Debug)]
pub struct RegionDecomposition {
    dim: usize,
    regions: Vec<Region>,
    interfaces: Vec<Interface>,
}

pub fn region_decomposition(norm: &PolyhedralNorm) -> Result<RegionDecomposition> {
    let d = norm.dim();
    if !(2..=MAX_REGION_DIM).contains(&d) {
        return Err(Error::DimensionCap {
            what: "region decomposition",
            dim: d,
            max: MAX_REGION_DIM,
        });
    }
    let verts = norm.primal_vertices()?;
    let gens = norm.generators();
    let facets: Vec<Vec<usize>> = gens
        .iter()
        .map(|g| {
            (0..verts.len())
                .filter(|&k| g.dot(&verts[k]) >= 1.0 - FACET_TOL)
                .collect()
        })
        .collect();
    let mut interfaces = Vec::new();
    for i in 0..gens.len() {
        for j in i + 1..gens.len() {
            let common: Vec<Vector> = facets[i]
                .iter()
                .filter(|k| facets[j].contains(k))
                .map(|&k| verts[k].normalized().expect("vertex of a ball is nonzero"))
                .collect();
            if rank(d, &common) != d - 1 {
                continue;
            }
            let diff = &gens[i] - &gens[j];
            let jump = diff.norm();
            interfaces.push(Interface {
                i,
                j,
                rays: common,
                normal: diff.scaled(1.0 / jump),
                jump,
            });
        }
    }
    let regions = (0..gens.len())
        .map(|i| Region {
            generator: i,
            facet: facets[i].clone(),
            rays: facets[i]
                .iter()
                .map(|&k| verts[k].normalized().expect("vertex of a ball is nonzero"))
                .collect(),
            constraints: interfaces
                .iter()
                .filter_map(|f| {
                    if f.i == i {
                        Some(-&f.normal)
                    } else if f.j == i {
                        Some(f.normal.clone())
                    } else {
                        None
                    }
                })
                .collect(),
        })
        .collect();
    Ok(RegionDecomposition {
        dim: d,
        regions,
        interfaces,
    })
}

impl RegionDecomposition {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn interfaces(&self) -> &[Interface] {
        &self.interfaces
    }

    /// Euclidean distance from `q` to `M_i`.
    pub fn dist_to_region(&self, i: usize, q: &Vector) -> f64 {
        let r = &self.regions[i];
        let scale = q.norm();
        if r.constraints.iter().all(|n| n.dot(q) <= 1e-14 * scale) {
            return 0.0;
        }
        // outside: the nearest point lies on a facet of the cone
        self.interfaces
            .iter()
            .filter(|f| f.i == i || f.j == i)
            .map(|f| dist_to_interface(f, q))
            .fold(q.norm(), f64::min)
    }
}

fn dist_to_ray(a: &Vector, q: &Vector) -> f64 {
    let t = a.dot(q).max(0.0);
    q.dist(&a.scaled(t))
}

/// Distance to the interface cone spanned by its rays.
pub fn dist_to_interface(f: &Interface, q: &Vector) -> f64 {
    match f.rays.as_slice() {
        [a] => dist_to_ray(a, q),
        [a, b] => {
            let h = f.normal.dot(q);
            let qp = q.add_scaled(-h, &f.normal);
            let (aa, ab, bb) = (1.0, a.dot(b), 1.0);
            let (qa, qb) = (qp.dot(a), qp.dot(b));
            let det = aa * bb - ab * ab;
            let s = (qa * bb - qb * ab) / det;
            let t = (qb * aa - qa * ab) / det;
            if s >= 0.0 && t >= 0.0 {
                h.abs()
            } else {
                dist_to_ray(a, q).min(dist_to_ray(b, q))
            }
        }
        rays => rays
            .iter()
            .map(|a| dist_to_ray(a, q))
            .fold(q.norm(), f64::min),
    }
}

/// In-plane orthonormal frame `(e1, e2)` of a 3D interface with `e1` along
/// its first ray.
pub(crate) fn interface_frame(f: &Interface) -> (Vector, Vector) {
    let n = f.normal.as_slice();
    let e1 = f.rays[0].clone();
    let a = e1.as_slice();
    let e2 = Vector::from([
        n[1] * a[2] - n[2] * a[1],
        n[2] * a[0] - n[0] * a[2],
        n[0] * a[1] - n[1] * a[0],
    ]);
    (e1, e2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finsler::builtin;

    #[test]
    fn l1_plane_has_four_quadrants() {
        let n = builtin("l1").unwrap();
        let r = region_decomposition(&n).unwrap();
        assert_eq!(r.regions().len(), 4);
        assert_eq!(r.interfaces().len(), 4);
        for f in r.interfaces() {
            assert_eq!(f.rays.len(), 1);
            let g = n.generators();
            let diff = &g[f.i] - &g[f.j];
            assert!((diff.dot(&f.normal) - diff.norm()).abs() < 1e-15);
            assert!(f.normal.dot(&f.rays[0]).abs() < 1e-15);
        }
        let q = Vector::from([0.5, 0.5]);
        let i = n
            .generators()
            .iter()
            .position(|g| g.as_slice() == [-1.0, -1.0])
            .unwrap();
        assert!((r.dist_to_region(i, &q) - q.norm()).abs() < 1e-15);
    }

    #[test]
    fn l1_space_has_octants_and_quarter_planes() {
        let r = region_decomposition(&builtin("l1:3").unwrap()).unwrap();
        assert_eq!(r.regions().len(), 8);
        assert_eq!(r.interfaces().len(), 12);
        for f in r.interfaces() {
            assert_eq!(f.rays.len(), 2);
            assert!(f.rays[0].dot(&f.rays[1]).abs() < 1e-15);
        }
    }

    #[test]
    fn rhombic_interfaces_are_wedges() {
        let n = builtin("rhombic-dodecahedron").unwrap();
        let r = region_decomposition(&n).unwrap();
        assert_eq!(r.regions().len(), 12);
        for reg in r.regions() {
            assert_eq!(reg.rays.len(), 4);
            assert_eq!(reg.constraints.len(), 4);
        }
        assert_eq!(r.interfaces().len(), 24);
        assert!(r.interfaces().iter().all(|f| f.rays.len() == 2));
    }

    #[test]
    fn four_dimensions_rejected() {
        let n = builtin("l1:4").unwrap();
        assert!(matches!(
            region_decomposition(&n),
            Err(Error::DimensionCap { .. })
        ));
    }
}
