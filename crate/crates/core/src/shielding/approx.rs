//! The approximating norm `ψ`: the Minkowski gauge of `{f_ε ≤ level}`.

use super::mollified::MollifiedGauge;
use super::verify::TOL_FACE;
use crate::error::{Error, Result};
use crate::finsler::support_residual;
use crate::linalg::{Subspace, SymMatrix, Vector};
use crate::sampling::{rng, unit_vector};

#[derive(Clone, Debug)]
pub struct ApproxNorm {
    source: MollifiedGauge,
    level: f64,
    f0: f64,
}

impl ApproxNorm {
    pub fn new(source: MollifiedGauge, level: f64) -> Result<Self> {
        let f0 = source.value(&Vector::zeros(source.dim()))?;
        if !(level > f0) {
            return Err(Error::Bracket(format!(
                "level {level} is not above min f_eps = {f0}"
            )));
        }
        Ok(ApproxNorm { source, level, f0 })
    }

    pub fn source(&self) -> &MollifiedGauge {
        &self.source
    }

    pub fn level(&self) -> f64 {
        self.level
    }

    /// `s > 0` with `f_ε(s u) = level` for a unit `u`.
    ///
    /// `f_ε(s u)` is convex in `s` and nondecreasing for `s ≥ 0`; the bracket
    /// `φ(y) ≤ f_ε(y) ≤ φ(y) + f_ε(0)` gives the ends. Newton steps are kept
    /// inside the bracket, falling back to bisection.
    fn radial(&self, u: &Vector) -> Result<f64> {
        let phi = self.source.norm().eval_slice(u.as_slice());
        let mut lo = (self.level - self.f0) / phi;
        let mut hi = self.level / phi;
        let mut s = 0.5 * (lo + hi);
        for _ in 0..200 {
            let (v, g) = self.source.value_gradient(&u.scaled(s))?;
            let r = v - self.level;
            if r > 0.0 {
                hi = s;
            } else {
                lo = s;
            }
            if r == 0.0 || hi - lo <= 1e-15 * hi {
                return Ok(s);
            }
            let slope = g.dot(u);
            let newton = s - r / slope;
            let next = if slope > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if (next - s).abs() <= 1e-14 * s {
                return Ok(next);
            }
            s = next;
        }
        Err(Error::Bracket(format!("gauge search did not converge along {u}")))
    }

    pub fn eval(&self, q: &Vector) -> Result<f64> {
        q.check_dim(self.source.dim())?;
        let n = q.norm();
        if n == 0.0 {
            return Ok(0.0);
        }
        Ok(n / self.radial(&q.scaled(1.0 / n))?)
    }

    /// `ψ(q)`, the boundary point `y = q / ψ(q)` and `Df_ε(y)`.
    fn boundary(&self, q: &Vector) -> Result<(f64, Vector, Vector)> {
        let psi = self.eval(q)?;
        if psi == 0.0 {
            return Err(Error::InvalidParameter("derivative of the gauge at 0".into()));
        }
        let y = q.scaled(1.0 / psi);
        let n = self.source.gradient(&y)?;
        Ok((psi, y, n))
    }

    /// `Dψ(q) = n / ⟨n, y⟩` with `n = Df_ε(y)`.
    pub fn gradient(&self, q: &Vector) -> Result<Vector> {
        let (_, y, n) = self.boundary(q)?;
        Ok(n.scaled(1.0 / n.dot(&y)))
    }

    /// Implicit differentiation of `f_ε(q/ψ(q)) = level`:
    /// `D²ψ(q) = Pᵀ D²f_ε(y) P / (ψ(q)⟨n, y⟩)` with `P = I − y nᵀ/⟨n, y⟩`.
    pub fn hessian(&self, q: &Vector) -> Result<SymMatrix> {
        let (psi, y, n) = self.boundary(q)?;
        let h = self.source.hessian(&y)?;
        let ny = n.dot(&y);
        let d = y.dim();
        let hp: Vec<Vector> = (0..d)
            .map(|j| {
                // column j of P
                let col = Vector::unit(d, j).add_scaled(-n[j] / ny, &y);
                h.mul_vec(&col)
            })
            .collect();
        Ok(SymMatrix::from_fn(d, |i, j| {
            let ci = Vector::unit(d, i).add_scaled(-n[i] / ny, &y);
            ci.dot(&hp[j]) / (psi * ny)
        }))
    }

    /// Central differences of the gauge, step `h·max(1, |q|)`.
    pub fn fd_gradient(&self, q: &Vector, h: f64) -> Result<Vector> {
        let d = q.dim();
        let step = h * q.norm().max(1.0);
        let mut out = Vector::zeros(d);
        for k in 0..d {
            let e = Vector::unit(d, k);
            out[k] = (self.eval(&q.add_scaled(step, &e))? - self.eval(&q.add_scaled(-step, &e))?)
                / (2.0 * step);
        }
        Ok(out)
    }

    pub fn fd_hessian(&self, q: &Vector, h: f64) -> Result<SymMatrix> {
        let d = q.dim();
        let step = h * q.norm().max(1.0);
        let f = |v: &Vector| self.eval(v);
        let mut m = SymMatrix::zeros(d);
        let f0 = f(q)?;
        for i in 0..d {
            let ei = Vector::unit(d, i);
            for j in i..d {
                let v = if i == j {
                    (f(&q.add_scaled(step, &ei))? - 2.0 * f0 + f(&q.add_scaled(-step, &ei))?)
                        / (step * step)
                } else {
                    let ej = Vector::unit(d, j);
                    let pp = f(&q.add_scaled(step, &ei).add_scaled(step, &ej))?;
                    let pm = f(&q.add_scaled(step, &ei).add_scaled(-step, &ej))?;
                    let mp = f(&q.add_scaled(-step, &ei).add_scaled(step, &ej))?;
                    let mm = f(&q.add_scaled(-step, &ei).add_scaled(-step, &ej))?;
                    (pp - pm - mp + mm) / (4.0 * step * step)
                };
                m.set(i, j, v);
            }
        }
        Ok(m)
    }

    /// `‖π_V D²ψ π_V − D²ψ‖ / max(1, ‖D²ψ‖)` with `V = ⟨Dψ⟩ ⊕ 𝒯(Dψ, φ)`.
    pub fn shielding_residual(&self, q: &Vector) -> Result<f64> {
        let norm = self.source.norm();
        let p = self.gradient(q)?;
        let h = self.hessian(q)?;
        let face = norm.dual_subdifferential(&p, TOL_FACE)?;
        let v = Subspace::orthogonal_complement(norm.dim(), face.vertices())
            .join(&Subspace::span(norm.dim(), std::slice::from_ref(&p)));
        Ok(support_residual(&v, &h))
    }
}

/// `max |ψ(e) − φ(e)/level|` over `samples` uniform unit vectors.
pub fn approx_norm_error(psi: &ApproxNorm, samples: usize, seed: u64) -> Result<f64> {
    let norm = psi.source.norm();
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let e = unit_vector(&mut r, norm.dim());
        let dev = (psi.eval(&e)? - norm.eval_slice(e.as_slice()) / psi.level).abs();
        worst = worst.max(dev);
    }
    Ok(worst)
}

/// Largest [`ApproxNorm::shielding_residual`] over `samples` unit vectors.
pub fn approx_shielding_residual(psi: &ApproxNorm, samples: usize, seed: u64) -> Result<f64> {
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let e = unit_vector(&mut r, psi.source.dim());
        worst = worst.max(psi.shielding_residual(&e)?);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finsler::builtin;

    fn l1_approx(eps: f64) -> ApproxNorm {
        let g = MollifiedGauge::new(&builtin("l1").unwrap(), eps).unwrap();
        ApproxNorm::new(g, 1.0).unwrap()
    }

    #[test]
    fn homogeneous_and_close() {
        let psi = l1_approx(0.05);
        let q = Vector::from([0.3, -0.8]);
        let a = psi.eval(&q).unwrap();
        let b = psi.eval(&q.scaled(4.0)).unwrap();
        assert!((b - 4.0 * a).abs() <= 1e-14 * b);
        assert!((a - 1.1).abs() < 0.05);
    }

    #[test]
    fn error_shrinks_with_eps() {
        let errs: Vec<f64> = [0.1, 0.05, 0.025]
            .iter()
            .map(|&e| approx_norm_error(&l1_approx(e), 200, 1).unwrap())
            .collect();
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    }

    #[test]
    fn implicit_derivatives_match_differences() {
        let psi = l1_approx(0.2);
        for q in [[0.9, 0.05], [0.3, 0.7], [-0.5, 0.52]] {
            let q = Vector::from(q);
            let g = psi.gradient(&q).unwrap();
            let gf = psi.fd_gradient(&q, 1e-6).unwrap();
            assert!(g.dist(&gf) < 1e-7, "{g} vs {gf}");
            let h = psi.hessian(&q).unwrap();
            let hf = psi.fd_hessian(&q, 1e-4).unwrap();
            assert!((&h - &hf).max_abs() < 1e-3 * (1.0 + h.max_abs()), "{q}");
        }
    }

    #[test]
    fn level_below_minimum_is_rejected() {
        let g = MollifiedGauge::new(&builtin("l1").unwrap(), 0.5).unwrap();
        assert!(matches!(ApproxNorm::new(g, 0.01), Err(Error::Bracket(_))));
    }
}
