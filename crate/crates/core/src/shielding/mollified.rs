//! The mollified gauge `f_ε = φ ∗ η_ε` with `η_ε(x) = C_d ε^{−d} (1 − |x/ε|²)³`.
//!
//! With `m_i` the `η_ε(q − ·)`-mass of `M_i` and `μ_i` its first moment about
//! `q`, `f_ε(q) = Σ ⟨g_i, m_i q + μ_i⟩` and `Df_ε(q) = Σ m_i g_i`. The Hessian
//! is a sum over interfaces of `s_ij (g_i − g_j)(g_i − g_j)ᵀ / |g_i − g_j|`,
//! where `s_ij` is the surface integral of `η_ε(q − ·)` over `M_i ∩ M_j`.
//!
//! In 2D the region integrals are exact boundary integrals (see
//! [`disk_moments`]). In 3D they are sliced along the last axis; each slice
//! is a 2D polar integral and the slice heights where the topology changes
//! (apex, ray/sphere crossings, face tangencies) split the outer Gauss rule.
//! For `d ≥ 4` only the value and gradient are available, from a ray rule
//! that is exact along each ray and uses a product rule over directions.

use std::f64::consts::PI;

use super::quadrature::{disk_moments, CubicBump, GaussLegendre, Polygon};
use super::regions::{interface_frame, region_decomposition, Interface, Region, RegionDecomposition};
use crate::error::{Error, Result};
use crate::finsler::PolyhedralNorm;
use crate::linalg::{SymMatrix, Vector};

/// Normalizing constant of `(1 − |x|²)³` on the unit ball of `ℝ^d`.
pub fn mollifier_constant(d: usize) -> Result<f64> {
    match d {
        1 => Ok(35.0 / 32.0),
        2 => Ok(4.0 / PI),
        3 => Ok(315.0 / (64.0 * PI)),
        4 => Ok(20.0 / (PI * PI)),
        _ => Err(Error::DimensionCap {
            what: "mollifier",
            dim: d,
            max: 4,
        }),
    }
}

/// Quadrature orders.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureSpec {
    /// Gauss points per slice interval (3D).
    pub slices: usize,
    /// Points per polar angle in the direction rule (`d ≥ 4`).
    pub directions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            slices: 12,
            directions: 24,
        }
    }
}

#[derive(Clone, Debug)]
pub struct MollifiedGauge {
    norm: PolyhedralNorm,
    eps: f64,
    cd: f64,
    regions: Option<RegionDecomposition>,
    spec: QuadratureSpec,
    slices: GaussLegendre,
    directions: GaussLegendre,
}

/// Mass and first moment about `q` of `η_ε(q − ·)` on one region.
#[derive(Clone, Debug)]
pub struct RegionMoment {
    pub mass: f64,
    pub moment: Vector,
}

impl MollifiedGauge {
    pub fn new(norm: &PolyhedralNorm, eps: f64) -> Result<Self> {
        Self::with_quadrature(norm, eps, QuadratureSpec::default())
    }

    pub fn with_quadrature(norm: &PolyhedralNorm, eps: f64, spec: QuadratureSpec) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
        }
        if spec.slices == 0 || spec.directions == 0 {
            return Err(Error::InvalidParameter("quadrature orders must be positive".into()));
        }
        let d = norm.dim();
        let cd = mollifier_constant(d)?;
        let regions = if d <= 3 && d >= 2 {
            Some(region_decomposition(norm)?)
        } else {
            None
        };
        Ok(MollifiedGauge {
            norm: norm.clone(),
            eps,
            cd,
            regions,
            spec,
            slices: GaussLegendre::new(spec.slices),
            directions: GaussLegendre::new(spec.directions),
        })
    }

    pub fn norm(&self) -> &PolyhedralNorm {
        &self.norm
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn dim(&self) -> usize {
        self.norm.dim()
    }

    pub fn quadrature(&self) -> QuadratureSpec {
        self.spec
    }

    pub fn regions(&self) -> Option<&RegionDecomposition> {
        self.regions.as_ref()
    }

    /// Per-generator mass and first moment.
    pub fn moments(&self, q: &Vector) -> Result<Vec<RegionMoment>> {
        q.check_dim(self.dim())?;
        if !q.is_finite() {
            return Err(Error::NumericAbort(format!("non-finite point {q}")));
        }
        let out = match (&self.regions, self.dim()) {
            (Some(r), 2) => r.regions().iter().map(|reg| self.moments_2d(reg, q)).collect(),
            (Some(r), 3) => r.regions().iter().map(|reg| self.moments_3d(reg, q)).collect(),
            _ => self.moments_rays(q),
        };
        let total: f64 = out.iter().map(|m| m.mass).sum();
        if !total.is_finite() || (total - 1.0).abs() > 1e-6 {
            return Err(Error::Quadrature(format!(
                "mollifier mass {total} at {q} differs from 1"
            )));
        }
        Ok(out)
    }

    /// `Df_ε(q) = Σ m_i g_i`: the weights `m_i`.
    pub fn weights(&self, q: &Vector) -> Result<Vec<f64>> {
        Ok(self.moments(q)?.into_iter().map(|m| m.mass).collect())
    }

    pub fn value(&self, q: &Vector) -> Result<f64> {
        Ok(self.value_gradient(q)?.0)
    }

    pub fn gradient(&self, q: &Vector) -> Result<Vector> {
        Ok(self.value_gradient(q)?.1)
    }

    pub fn value_gradient(&self, q: &Vector) -> Result<(f64, Vector)> {
        let m = self.moments(q)?;
        let mut v = 0.0;
        let mut g = Vector::zeros(self.dim());
        for (gen, rm) in self.norm.generators().iter().zip(&m) {
            v += rm.mass * gen.dot(q) + gen.dot(&rm.moment);
            g = g.add_scaled(rm.mass, gen);
        }
        Ok((v, g))
    }

    /// `D²f_ε(q)`; needs the region decomposition (`d ≤ 3`).
    pub fn hessian(&self, q: &Vector) -> Result<SymMatrix> {
        q.check_dim(self.dim())?;
        let r = self.regions.as_ref().ok_or(Error::DimensionCap {
            what: "mollified Hessian",
            dim: self.dim(),
            max: 3,
        })?;
        let gens = self.norm.generators();
        let mut h = SymMatrix::zeros(self.dim());
        for f in r.interfaces() {
            let s = self.interface_density(f, q);
            if s != 0.0 {
                let diff = &gens[f.i] - &gens[f.j];
                h = h.add_scaled(s / f.jump, &SymMatrix::outer(&diff));
            }
        }
        if !h.is_finite() {
            return Err(Error::NumericAbort(format!("non-finite Hessian at {q}")));
        }
        Ok(h)
    }

    /// `∫_{M_i ∩ M_j} η_ε(q − y) dS(y)`.
    pub fn interface_density(&self, f: &Interface, q: &Vector) -> f64 {
        let e2 = self.eps * self.eps;
        let a = self.cd / self.eps.powi(self.dim() as i32 + 6);
        match self.dim() {
            2 => {
                let u = &f.rays[0];
                let t0 = u.dot(q);
                let h2 = (q.dot(q) - t0 * t0).max(0.0);
                if h2 >= e2 {
                    return 0.0;
                }
                let w = (e2 - h2).sqrt();
                let (lo, hi) = ((t0 - w).max(0.0), t0 + w);
                if lo >= hi {
                    return 0.0;
                }
                // degree-6 polynomial in t: four points are exact
                GaussLegendre::new(4).integrate(lo, hi, |t| {
                    let r = q.add_scaled(-t, u);
                    let s = e2 - r.dot(&r);
                    if s > 0.0 {
                        a * s * s * s
                    } else {
                        0.0
                    }
                })
            }
            _ => {
                let h = f.normal.dot(q);
                if h.abs() >= self.eps {
                    return 0.0;
                }
                let (e1, e2v) = interface_frame(f);
                let b = &f.rays[1];
                let (bx, by) = (b.dot(&e1), b.dot(&e2v));
                // outward normals of the wedge in the (e1, e2) frame
                let ma = [0.0, -by.signum()];
                let mb = if by > 0.0 { [-by, bx] } else { [by, -bx] };
                let poly = Polygon {
                    halfplanes: vec![(ma, 0.0), (mb, 0.0)],
                };
                let bump = CubicBump {
                    a,
                    r2: e2 - h * h,
                };
                disk_moments(&poly, [q.dot(&e1), q.dot(&e2v)], &bump).0
            }
        }
    }

    fn moments_2d(&self, reg: &Region, q: &Vector) -> RegionMoment {
        let poly = Polygon {
            halfplanes: reg
                .constraints
                .iter()
                .map(|n| ([n[0], n[1]], 0.0))
                .collect(),
        };
        let bump = CubicBump {
            a: self.cd / self.eps.powi(8),
            r2: self.eps * self.eps,
        };
        let (mass, mom) = disk_moments(&poly, [q[0], q[1]], &bump);
        RegionMoment {
            mass,
            moment: Vector::from(mom),
        }
    }

    fn prunable(&self, reg: &Region, q: &Vector) -> bool {
        reg.constraints.iter().any(|n| n.dot(q) >= self.eps)
    }

    fn moments_3d(&self, reg: &Region, q: &Vector) -> RegionMoment {
        let eps = self.eps;
        let e2 = eps * eps;
        if self.prunable(reg, q) {
            return RegionMoment {
                mass: 0.0,
                moment: Vector::zeros(3),
            };
        }
        let (zlo, zhi) = (q[2] - eps, q[2] + eps);
        let mut cuts = vec![zlo, zhi, 0.0];
        let qq = q.dot(q);
        for a in &reg.rays {
            let t0 = a.dot(q);
            let disc = t0 * t0 - qq + e2;
            if disc > 0.0 {
                for t in [t0 - disc.sqrt(), t0 + disc.sqrt()] {
                    if t >= 0.0 {
                        cuts.push(t * a[2]);
                    }
                }
            }
        }
        for n in &reg.constraints {
            let h = n.dot(q);
            if h.abs() < eps {
                let rho = (e2 - h * h).sqrt();
                let zf = q[2] - h * n[2];
                let s = (1.0 - n[2] * n[2]).max(0.0).sqrt();
                cuts.push(zf - rho * s);
                cuts.push(zf + rho * s);
            }
        }
        let mut cuts: Vec<f64> = cuts.into_iter().filter(|z| *z >= zlo && *z <= zhi).collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * eps);

        let a = self.cd / eps.powi(9);
        let mut mass = 0.0;
        let mut mom = [0.0; 3];
        for w in cuts.windows(2) {
            for (z, wz) in self.slices.mapped(w[0], w[1]) {
                let dz = z - q[2];
                let bump = CubicBump { a, r2: e2 - dz * dz };
                let Some(poly) = slice_polygon(reg, z) else {
                    continue;
                };
                let (m, mxy) = disk_moments(&poly, [q[0], q[1]], &bump);
                mass += wz * m;
                mom[0] += wz * mxy[0];
                mom[1] += wz * mxy[1];
                mom[2] += wz * dz * m;
            }
        }
        RegionMoment {
            mass,
            moment: Vector::from(mom),
        }
    }

    /// Ray rule for any dimension: along each direction `u` the ray
    /// `q + r u` crosses regions at computable radii, and the radial
    /// integrals are polynomial.
    fn moments_rays(&self, q: &Vector) -> Vec<RegionMoment> {
        let d = self.dim();
        let gens = self.norm.generators();
        let mut out: Vec<RegionMoment> = gens
            .iter()
            .map(|_| RegionMoment {
                mass: 0.0,
                moment: Vector::zeros(d),
            })
            .collect();
        let scale = self.cd / self.eps.powi(d as i32);
        for (u, w) in sphere_rule(d, &self.directions) {
            let a: Vec<f64> = gens.iter().map(|g| g.dot(q)).collect();
            let b: Vec<f64> = gens.iter().map(|g| g.dot(&u)).collect();
            let mut r = 0.0;
            let mut cur = argmax_with_slope(&a, &b, 0.0);
            while r < self.eps {
                // next radius where a steeper generator overtakes
                let mut next = self.eps;
                let mut who = cur;
                for j in 0..gens.len() {
                    if b[j] > b[cur] {
                        let t = (a[cur] - a[j]) / (b[j] - b[cur]);
                        if t > r && t < next {
                            next = t;
                            who = j;
                        }
                    }
                }
                let m0 = radial(d - 1, r, next, self.eps);
                let m1 = radial(d, r, next, self.eps);
                out[cur].mass += w * scale * m0;
                out[cur].moment = out[cur].moment.add_scaled(w * scale * m1, &u);
                r = next;
                if who == cur {
                    break;
                }
                cur = argmax_with_slope(&a, &b, r);
                if cur != who && b[who] > b[cur] {
                    cur = who;
                }
            }
        }
        out
    }
}

fn argmax_with_slope(a: &[f64], b: &[f64], r: f64) -> usize {
    let mut best = 0;
    for j in 1..a.len() {
        let (vj, vb) = (a[j] + r * b[j], a[best] + r * b[best]);
        if vj > vb || (vj == vb && b[j] > b[best]) {
            best = j;
        }
    }
    best
}

/// `∫_lo^hi r^k (1 − r²/ε²)³ dr`
fn radial(k: usize, lo: f64, hi: f64, eps: f64) -> f64 {
    let anti = |r: f64| {
        let x = r / eps;
        let k = k as i32;
        eps.powi(k + 1)
            * (x.powi(k + 1) / (k + 1) as f64 - 3.0 * x.powi(k + 3) / (k + 3) as f64
                + 3.0 * x.powi(k + 5) / (k + 5) as f64
                - x.powi(k + 7) / (k + 7) as f64)
    };
    anti(hi) - anti(lo)
}

/// Product rule on `S^{d−1}` in hyperspherical coordinates: Gauss points in
/// each polar angle, equally spaced azimuths.
fn sphere_rule(d: usize, g: &GaussLegendre) -> Vec<(Vector, f64)> {
    let n = g.nodes.len();
    let mut dirs: Vec<(Vec<f64>, f64)> = (0..2 * n)
        .map(|k| {
            let t = (k as f64 + 0.5) * PI / n as f64;
            (vec![t.cos(), t.sin()], PI / n as f64)
        })
        .collect();
    // lift S^{m−1} to S^m with the angle χ: (cos χ, sin χ · u), weight sin^{m−1} χ
    for m in 2..d {
        let mut next = Vec::with_capacity(dirs.len() * n);
        for (chi, wc) in g.mapped(0.0, PI) {
            let (c, s) = (chi.cos(), chi.sin());
            for (u, w) in &dirs {
                let mut v = Vec::with_capacity(m + 1);
                v.push(c);
                v.extend(u.iter().map(|x| s * x));
                next.push((v, w * wc * s.powi(m as i32 - 1)));
            }
        }
        dirs = next;
    }
    dirs.into_iter().map(|(v, w)| (Vector::new(v), w)).collect()
}

/// Cross-section of a 3D region at height `z`, or `None` if empty.
fn slice_polygon(reg: &Region, z: f64) -> Option<Polygon> {
    let mut poly = Polygon::default();
    for n in &reg.constraints {
        let nxy = [n[0], n[1]];
        let b = -n[2] * z;
        if nxy[0].hypot(nxy[1]) < 1e-14 {
            if b < 0.0 {
                return None;
            }
            continue;
        }
        poly.halfplanes.push((nxy, b));
    }
    Some(poly)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finsler::builtin;
    use crate::sampling::{rng, uniform};

    fn mc_value(norm: &PolyhedralNorm, eps: f64, q: &Vector, n: usize) -> f64 {
        // midpoint grid over the cube [−ε, ε]^d
        let d = norm.dim();
        let cd = mollifier_constant(d).unwrap();
        let h = 2.0 / n as f64;
        let mut total = 0.0;
        let mut idx = vec![0usize; d];
        loop {
            let x: Vec<f64> = idx.iter().map(|&i| -1.0 + (i as f64 + 0.5) * h).collect();
            let r2: f64 = x.iter().map(|t| t * t).sum();
            if r2 < 1.0 {
                let y: Vec<f64> = q.iter().zip(&x).map(|(a, b)| a - eps * b).collect();
                total += norm.eval_slice(&y) * cd * (1.0 - r2).powi(3);
            }
            let mut k = 0;
            loop {
                if k == d {
                    return total * h.powi(d as i32);
                }
                idx[k] += 1;
                if idx[k] < n {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }

    #[test]
    fn far_from_interfaces_is_linear() {
        let n = builtin("l1").unwrap();
        let f = MollifiedGauge::new(&n, 0.1).unwrap();
        let q = Vector::from([0.6, 0.7]);
        let (v, g) = f.value_gradient(&q).unwrap();
        assert!((v - 1.3).abs() < 1e-13);
        assert!(g.dist(&Vector::from([1.0, 1.0])) < 1e-13);
        assert!(f.hessian(&q).unwrap().max_abs() == 0.0);
    }

    #[test]
    fn value_matches_grid_oracle_2d() {
        let n = builtin("l1").unwrap();
        let f = MollifiedGauge::new(&n, 0.3).unwrap();
        for q in [[0.05, 0.02], [0.2, -0.1], [0.0, 0.0]] {
            let q = Vector::from(q);
            let v = f.value(&q).unwrap();
            let o = mc_value(&n, 0.3, &q, 800);
            assert!((v - o).abs() < 2e-5, "{v} vs {o}");
        }
    }

    #[test]
    fn value_matches_grid_oracle_3d() {
        let n = builtin("rhombic-dodecahedron").unwrap();
        let f = MollifiedGauge::new(&n, 0.3).unwrap();
        let q = Vector::from([0.07, -0.02, 0.11]);
        let v = f.value(&q).unwrap();
        let o = mc_value(&n, 0.3, &q, 120);
        assert!((v - o).abs() < 2e-4, "{v} vs {o}");
    }

    #[test]
    fn ray_rule_agrees_with_exact_2d() {
        let n = builtin("linf").unwrap();
        let f = MollifiedGauge::new(&n, 0.25).unwrap();
        let q = Vector::from([0.1, 0.05]);
        let exact = f.value_gradient(&q).unwrap();
        let approx = {
            let m = f.moments_rays(&q);
            let mut v = 0.0;
            for (g, rm) in n.generators().iter().zip(&m) {
                v += rm.mass * g.dot(&q) + g.dot(&rm.moment);
            }
            v
        };
        assert!((exact.0 - approx).abs() < 1e-3, "{} vs {approx}", exact.0);
    }

    #[test]
    fn four_dimensional_value_is_available() {
        let n = builtin("l1:4").unwrap();
        let f = MollifiedGauge::new(&n, 0.2).unwrap();
        let q = Vector::from([1.0, 0.5, 0.3, 0.8]);
        let (v, g) = f.value_gradient(&q).unwrap();
        assert!((v - 2.6).abs() < 1e-10);
        assert!(g.dist(&Vector::from([1.0; 4])) < 1e-10);
        assert!(f.hessian(&q).is_err());
    }

    #[test]
    fn hessian_matches_gradient_differences() {
        let mut r = rng(3);
        for name in ["l1", "euclidean-polytope-6", "rhombic-dodecahedron"] {
            let n = builtin(name).unwrap();
            let f = MollifiedGauge::new(&n, 0.2).unwrap();
            for _ in 0..3 {
                let q = Vector::new((0..n.dim()).map(|_| uniform(&mut r, -0.3, 0.3)).collect());
                let h = f.hessian(&q).unwrap();
                let step = 1e-5;
                for k in 0..n.dim() {
                    let e = Vector::unit(n.dim(), k);
                    let gp = f.gradient(&q.add_scaled(step, &e)).unwrap();
                    let gm = f.gradient(&q.add_scaled(-step, &e)).unwrap();
                    for i in 0..n.dim() {
                        let fd = (gp[i] - gm[i]) / (2.0 * step);
                        let tol = if n.dim() == 3 { 1e-3 } else { 1e-6 };
                        assert!(
                            (fd - h.get(i, k)).abs() < tol * (1.0 + h.max_abs()),
                            "{name} {q}: {fd} vs {}",
                            h.get(i, k)
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn mass_is_one_in_3d() {
        let mut r = rng(1);
        for name in ["rhombic-dodecahedron", "linf:3"] {
            let f = MollifiedGauge::new(&builtin(name).unwrap(), 0.3).unwrap();
            for _ in 0..20 {
                let q = Vector::new((0..3).map(|_| uniform(&mut r, -0.5, 0.5)).collect());
                let m: f64 = f.weights(&q).unwrap().iter().sum();
                assert!((m - 1.0).abs() < 1e-9, "{name} {q}: {m}");
            }
        }
    }

    #[test]
    fn gradient_matches_value_differences() {
        let n = builtin("rhombic-dodecahedron").unwrap();
        let f = MollifiedGauge::new(&n, 0.2).unwrap();
        let q = Vector::from([0.12, 0.03, -0.05]);
        let g = f.gradient(&q).unwrap();
        for k in 0..3 {
            let e = Vector::unit(3, k);
            let fd = (f.value(&q.add_scaled(1e-5, &e)).unwrap()
                - f.value(&q.add_scaled(-1e-5, &e)).unwrap())
                / 2e-5;
            assert!((fd - g[k]).abs() < 1e-6, "{fd} vs {}", g[k]);
        }
    }
}
