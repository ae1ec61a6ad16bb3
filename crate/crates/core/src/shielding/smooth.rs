//! Closed-form smooth norms and the kernel identity
//! `D²φ(q) · Dφ*(Dφ(q)) = 0`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{SymMatrix, Vector};
use crate::sampling::{rng, unit_vector};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SmoothNorm {
    Euclidean,
    /// `(Σ q_i⁴)^{1/4}`, dual `(Σ |p_i|^{4/3})^{3/4}`.
    Quartic,
}

impl FromStr for SmoothNorm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" | "l2" => Ok(SmoothNorm::Euclidean),
            "quartic" | "l4" => Ok(SmoothNorm::Quartic),
            _ => Err(Error::Parse(format!("unknown smooth norm {s:?}"))),
        }
    }
}

impl fmt::Display for SmoothNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SmoothNorm::Euclidean => "euclidean",
            SmoothNorm::Quartic => "quartic",
        })
    }
}

impl SmoothNorm {
    pub fn value(self, q: &Vector) -> f64 {
        match self {
            SmoothNorm::Euclidean => q.norm(),
            SmoothNorm::Quartic => q.iter().map(|x| x.powi(4)).sum::<f64>().powf(0.25),
        }
    }

    pub fn gradient(self, q: &Vector) -> Vector {
        let r = self.value(q);
        match self {
            SmoothNorm::Euclidean => q.scaled(1.0 / r),
            SmoothNorm::Quartic => Vector::new(q.iter().map(|x| x.powi(3) / r.powi(3)).collect()),
        }
    }

    pub fn hessian(self, q: &Vector) -> SymMatrix {
        let r = self.value(q);
        let d = q.dim();
        match self {
            SmoothNorm::Euclidean => SymMatrix::from_fn(d, |i, j| {
                (if i == j { 1.0 } else { 0.0 }) / r - q[i] * q[j] / r.powi(3)
            }),
            SmoothNorm::Quartic => SymMatrix::from_fn(d, |i, j| {
                let diag = if i == j { 3.0 * q[i] * q[i] / r.powi(3) } else { 0.0 };
                diag - 3.0 * q[i].powi(3) * q[j].powi(3) / r.powi(7)
            }),
        }
    }

    pub fn dual_value(self, p: &Vector) -> f64 {
        match self {
            SmoothNorm::Euclidean => p.norm(),
            SmoothNorm::Quartic => p
                .iter()
                .map(|x| x.abs().powf(4.0 / 3.0))
                .sum::<f64>()
                .powf(0.75),
        }
    }

    /// `Dφ*(p)`, the unique point of `{φ ≤ 1}` exposed by `p`.
    pub fn dual_gradient(self, p: &Vector) -> Vector {
        match self {
            SmoothNorm::Euclidean => p.scaled(1.0 / p.norm()),
            SmoothNorm::Quartic => {
                let s = self.dual_value(p).cbrt();
                Vector::new(p.iter().map(|x| x.cbrt() / s).collect())
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct SelfShieldReport {
    pub norm: SmoothNorm,
    pub samples: usize,
    /// `max ‖D²φ(q) Dφ*(Dφ(q))‖ / (1 + ‖D²φ(q)‖)`.
    pub max_residual: f64,
    pub worst: Vector,
    pub tol: f64,
}

impl SelfShieldReport {
    pub fn passed(&self) -> bool {
        self.max_residual <= self.tol
    }
}

pub fn kernel_residual(norm: SmoothNorm, q: &Vector) -> f64 {
    let h = norm.hessian(q);
    let v = norm.dual_gradient(&norm.gradient(q));
    h.mul_vec(&v).norm() / (1.0 + h.frobenius_norm())
}

/// The kernel identity at `samples` random points of the unit sphere, plus
/// the given extra points.
pub fn c2_self_shielding_check(
    norm: SmoothNorm,
    dim: usize,
    extra: &[Vector],
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<SelfShieldReport> {
    if !(2..=3).contains(&dim) {
        return Err(Error::DimensionCap {
            what: "smooth self-shielding check",
            dim,
            max: 3,
        });
    }
    let mut r = rng(seed);
    let mut pts: Vec<Vector> = extra.to_vec();
    for p in &pts {
        p.check_dim(dim)?;
    }
    pts.extend((0..samples).map(|_| unit_vector(&mut r, dim)));
    let mut report = SelfShieldReport {
        norm,
        samples: pts.len(),
        max_residual: 0.0,
        worst: Vector::zeros(dim),
        tol,
    };
    for q in pts {
        let v = kernel_residual(norm, &q);
        if v > report.max_residual || report.worst.norm() == 0.0 {
            report.max_residual = report.max_residual.max(v);
            report.worst = q;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclidean_kernel_is_q() {
        let q = Vector::from([0.3, -1.2, 2.0]);
        let h = SmoothNorm::Euclidean.hessian(&q);
        assert!(h.mul_vec(&q).norm() < 1e-15);
    }

    #[test]
    fn quartic_at_diagonal() {
        let q = Vector::from([1.0, 1.0]);
        assert!(kernel_residual(SmoothNorm::Quartic, &q) <= 1e-10);
        let r = c2_self_shielding_check(SmoothNorm::Quartic, 3, &[], 100, 2, 1e-8).unwrap();
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn quartic_gradient_matches_differences() {
        let q = Vector::from([0.4, -0.9, 0.2]);
        let n = SmoothNorm::Quartic;
        let g = n.gradient(&q);
        for k in 0..3 {
            let e = Vector::unit(3, k);
            let fd = (n.value(&q.add_scaled(1e-6, &e)) - n.value(&q.add_scaled(-1e-6, &e))) / 2e-6;
            assert!((fd - g[k]).abs() < 1e-8);
        }
        // dual pairing: φ*(Dφ(q)) = 1
        assert!((n.dual_value(&g) - 1.0).abs() < 1e-14);
    }
}
