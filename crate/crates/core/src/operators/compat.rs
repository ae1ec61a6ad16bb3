use rand_distr::{Distribution, StandardNormal};

use super::OperatorPair;
use crate::error::Result;
use crate::finsler::PolyhedralNorm;
use crate::linalg::{SymMatrix, Vector};
use crate::sampling::SampleRng;

#[derive(Clone, Debug)]
pub struct CompatReport {
    pub p: Vector,
    /// `max |F̄ − F̲| / (1 + ‖X‖_F)` over the tested matrices.
    pub max_violation: f64,
    pub worst: Option<SymMatrix>,
    pub tested: usize,
    pub tol: f64,
}

impl CompatReport {
    pub fn passed(&self) -> bool {
        self.max_violation <= self.tol
    }
}

/// Tests `F̄(p, X) = F̲(p, X)` on every basis element of `𝒮(p, φ)` and on
/// `n_samples` random combinations of them.
pub fn compatibility_check(
    pair: &OperatorPair,
    norm: &PolyhedralNorm,
    p: &Vector,
    n_samples: usize,
    tol: f64,
    rng: &mut SampleRng,
) -> Result<CompatReport> {
    let basis = norm.matrix_space_basis(p)?;
    let mut report = CompatReport {
        p: p.clone(),
        max_violation: 0.0,
        worst: None,
        tested: 0,
        tol,
    };
    let test = |x: SymMatrix, report: &mut CompatReport| -> Result<()> {
        let (lo, hi) = pair.eval(p, &x)?;
        let v = (hi - lo).abs() / (1.0 + x.frobenius_norm());
        report.tested += 1;
        if v > report.max_violation || report.worst.is_none() {
            report.max_violation = report.max_violation.max(v);
            report.worst = Some(x);
        }
        Ok(())
    };
    for b in &basis {
        test(b.clone(), &mut report)?;
    }
    if !basis.is_empty() {
        for _ in 0..n_samples {
            let mut x = SymMatrix::zeros(norm.dim());
            for b in &basis {
                let c: f64 = StandardNormal.sample(rng);
                x = x.add_scaled(c, b);
            }
            test(x, &mut report)?;
        }
    }
    Ok(report)
}
