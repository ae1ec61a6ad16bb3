//! Pointwise shielding checks for the mollified gauge and the sampled
//! search for the largest safe mollification radius.

use super::mollified::MollifiedGauge;
use super::regions::region_decomposition;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::finsler::{support_residual, PolyhedralNorm};
use crate::linalg::{Subspace, SymMatrix, Vector};
use crate::sampling::{substream, uniform, unit_vector, SampleRng};

/// Face tolerance used on `Df_ε`. Weights of regions barely touched by
/// `B(q, ε)` decay like `δ^{9/2}` in the gap `δ` to the ball boundary while
/// the interface density decays like `δ^{7/2}`, so the default face
/// tolerance would admit vertices whose Hessian contribution is still
/// visible at the `1e−6` level.
pub const TOL_FACE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShieldTolerances {
    /// `|φ*(Df) − 1|`
    pub dual: f64,
    /// Membership and kernel residuals, relative to `1 + ‖D²f‖`.
    pub residual: f64,
    /// Hessian against central differences of the gradient, relative to
    /// `max(1, ‖D²f‖)`.
    pub fd: f64,
}

impl Default for ShieldTolerances {
    fn default() -> Self {
        ShieldTolerances {
            dual: 1e-6,
            residual: 1e-6,
            fd: 1e-4,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ShieldPoint {
    pub q: Vector,
    pub phi: f64,
    pub gradient: Vector,
    pub dual_value: f64,
    pub membership: f64,
    pub kernel: f64,
    /// `None` when the finite-difference comparison was skipped.
    pub fd: Option<f64>,
    pub passed: bool,
}

/// Checks at one point: `|φ*(Df) − 1|`, membership of `D²f` in
/// `𝒮_{𝒯(Df)}`, and `D²f v = 0` on the vertices of `∂φ*(Df)`.
pub fn shielding_verify(g: &MollifiedGauge, q: &Vector, tol: &ShieldTolerances) -> Result<ShieldPoint> {
    let norm = g.norm();
    let (_, df) = g.value_gradient(q)?;
    let h = g.hessian(q)?;
    let hn = h.frobenius_norm();
    let dual_value = norm.dual_eval(&df)?;
    let face = norm.dual_subdifferential(&df, TOL_FACE)?;
    let tangent = Subspace::orthogonal_complement(norm.dim(), face.vertices());
    let membership = support_residual(&tangent, &h) * hn.max(1.0) / (1.0 + hn);
    let kernel = face
        .vertices()
        .iter()
        .map(|v| h.mul_vec(v).norm())
        .fold(0.0, f64::max)
        / (1.0 + hn);
    let passed = (dual_value - 1.0).abs() <= tol.dual
        && membership <= tol.residual
        && kernel <= tol.residual;
    Ok(ShieldPoint {
        q: q.clone(),
        phi: norm.eval(q)?,
        gradient: df,
        dual_value,
        membership,
        kernel,
        fd: None,
        passed,
    })
}

/// `max |D²f − FD(Df)| / max(1, ‖D²f‖)` with central differences of step
/// `10⁻³ ε`.
pub fn hessian_fd_error(g: &MollifiedGauge, q: &Vector) -> Result<f64> {
    let d = g.dim();
    let h = g.hessian(q)?;
    let step = 1e-3 * g.eps();
    let mut worst: f64 = 0.0;
    for k in 0..d {
        let e = Vector::unit(d, k);
        let gp = g.gradient(&q.add_scaled(step, &e))?;
        let gm = g.gradient(&q.add_scaled(-step, &e))?;
        for i in 0..d {
            let fd = (gp[i] - gm[i]) / (2.0 * step);
            worst = worst.max((fd - h.get(i, k)).abs());
        }
    }
    Ok(worst / h.frobenius_norm().max(1.0))
}

/// A point with `φ(q)` uniform in `[lo, hi]` along a uniform direction.
pub fn annulus_point(norm: &PolyhedralNorm, rng: &mut SampleRng, lo: f64, hi: f64) -> Vector {
    let u = unit_vector(rng, norm.dim());
    let r = uniform(rng, lo, hi);
    u.scaled(r / norm.eval_slice(u.as_slice()))
}

#[derive(Clone, Debug)]
pub struct ShieldSweep {
    pub c: f64,
    pub eps: f64,
    pub points: Vec<ShieldPoint>,
    pub max_dual: f64,
    pub max_membership: f64,
    pub max_kernel: f64,
    pub max_fd: f64,
    pub failures: usize,
    pub tol: ShieldTolerances,
}

impl ShieldSweep {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Runs [`shielding_verify`] and the finite-difference comparison on
/// `samples` points of the annulus `c ≤ φ ≤ 2c`. Sample `k` draws from its
/// own substream, so the result does not depend on the execution order.
pub fn shielding_sweep(
    g: &MollifiedGauge,
    c: f64,
    samples: usize,
    seed: u64,
    tol: &ShieldTolerances,
    exec: Execution,
) -> Result<ShieldSweep> {
    if !(c > 0.0) {
        return Err(Error::InvalidParameter(format!("c must be positive, got {c}")));
    }
    let pts: Vec<Result<ShieldPoint>> = exec.map(samples, |k| {
        let mut rng = substream(seed, k as u64);
        let q = annulus_point(g.norm(), &mut rng, c, 2.0 * c);
        let mut p = shielding_verify(g, &q, tol)?;
        let fd = hessian_fd_error(g, &q)?;
        p.passed &= fd <= tol.fd;
        p.fd = Some(fd);
        Ok(p)
    });
    let points = pts.into_iter().collect::<Result<Vec<_>>>()?;
    let mut s = ShieldSweep {
        c,
        eps: g.eps(),
        max_dual: 0.0,
        max_membership: 0.0,
        max_kernel: 0.0,
        max_fd: 0.0,
        failures: 0,
        tol: *tol,
        points: Vec::new(),
    };
    for p in &points {
        s.max_dual = s.max_dual.max((p.dual_value - 1.0).abs());
        s.max_membership = s.max_membership.max(p.membership);
        s.max_kernel = s.max_kernel.max(p.kernel);
        s.max_fd = s.max_fd.max(p.fd.unwrap_or(0.0));
        s.failures += usize::from(!p.passed);
    }
    s.points = points;
    Ok(s)
}

#[derive(Clone, Debug)]
pub struct EpsCEstimate {
    /// Largest `2^k` not exceeding [`Self::raw`].
    pub eps_c: f64,
    /// Smallest sampled breaking radius.
    pub raw: f64,
    /// Sample attaining [`Self::raw`].
    pub worst: Vector,
    pub samples: usize,
}

/// Sampled search for the largest `ε` such that, for every sampled `q` with
/// `φ(q) = c`, the regions `M_i` meeting the open ball `B(q, ε)` share a
/// nonzero point (equivalently a common facet vertex).
///
/// For each sample the regions are added in order of distance; the radius at
/// which the common vertex set first becomes empty bounds `ε` from above. The
/// minimum over samples can only overestimate the true constant.
pub fn eps_c_estimate(norm: &PolyhedralNorm, c: f64, samples: usize, seed: u64) -> Result<EpsCEstimate> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidParameter(format!("c must be positive, got {c}")));
    }
    if samples == 0 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    let dec = region_decomposition(norm)?;
    let mut rng = substream(seed, 0);
    let mut best = EpsCEstimate {
        eps_c: f64::INFINITY,
        raw: f64::INFINITY,
        worst: Vector::zeros(norm.dim()),
        samples,
    };
    for _ in 0..samples {
        let u = unit_vector(&mut rng, norm.dim());
        let q = u.scaled(c / norm.eval_slice(u.as_slice()));
        let mut dist: Vec<(f64, usize)> = (0..dec.regions().len())
            .map(|i| (dec.dist_to_region(i, &q), i))
            .collect();
        dist.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut common: Option<Vec<usize>> = None;
        for &(d, i) in &dist {
            let facet = &dec.regions()[i].facet;
            let next: Vec<usize> = match &common {
                None => facet.clone(),
                Some(c) => c.iter().copied().filter(|k| facet.contains(k)).collect(),
            };
            if next.is_empty() {
                if d < best.raw {
                    best.raw = d;
                    best.worst = q.clone();
                }
                break;
            }
            common = Some(next);
        }
    }
    if best.raw.is_finite() {
        best.eps_c = 2f64.powi(best.raw.log2().floor() as i32);
        // guard the floor against log2 rounding at exact powers of two
        if best.eps_c * 2.0 <= best.raw {
            best.eps_c *= 2.0;
        }
    }
    Ok(best)
}

/// Membership of the Hessian in the full space `𝒮(Df, φ)`, which contains
/// `𝒮_{𝒯(Df)}`.
pub fn full_membership_residual(norm: &PolyhedralNorm, df: &Vector, h: &SymMatrix) -> Result<f64> {
    let t = Subspace::orthogonal_complement(norm.dim(), norm.dual_subdifferential(df, TOL_FACE)?.vertices());
    let v = t.join(&Subspace::span(norm.dim(), std::slice::from_ref(df)));
    Ok(support_residual(&v, h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finsler::builtin;

    #[test]
    fn single_region_point_passes_trivially() {
        let n = builtin("l1").unwrap();
        let g = MollifiedGauge::new(&n, 0.05).unwrap();
        let p = shielding_verify(&g, &Vector::from([0.4, 0.3]), &ShieldTolerances::default()).unwrap();
        assert!(p.passed);
        assert_eq!(p.dual_value, 1.0);
        assert_eq!(p.membership, 0.0);
    }

    #[test]
    fn axis_point_has_midpoint_gradient() {
        let n = builtin("l1").unwrap();
        let g = MollifiedGauge::new(&n, 0.05).unwrap();
        let p = shielding_verify(&g, &Vector::from([0.7, 0.0]), &ShieldTolerances::default()).unwrap();
        assert!(p.gradient.dist(&Vector::from([1.0, 0.0])) < 1e-14);
        assert!(p.passed, "{p:?}");
    }

    #[test]
    fn too_large_eps_fails_near_a_vertex() {
        let n = builtin("l1").unwrap();
        let g = MollifiedGauge::new(&n, 0.8).unwrap();
        let p = shielding_verify(&g, &Vector::from([0.5, 0.01]), &ShieldTolerances::default()).unwrap();
        assert!(!p.passed);
        assert!(p.dual_value < 1.0 - 1e-3);
    }

    #[test]
    fn eps_c_of_l1_scales() {
        let n = builtin("l1").unwrap();
        let a = eps_c_estimate(&n, 1.0, 1000, 5).unwrap();
        assert_eq!(a.eps_c, 0.5);
        assert!(a.raw >= 0.5);
        let b = eps_c_estimate(&n, 2.0, 1000, 5).unwrap();
        assert_eq!(b.eps_c, 1.0);
        let r = eps_c_estimate(&builtin("rhombic-dodecahedron").unwrap(), 1.0, 1000, 5).unwrap();
        assert!(r.eps_c > 0.0);
    }
}
