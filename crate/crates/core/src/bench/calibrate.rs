//! Diffusion constant linking one scheme step to the limit operator: on a
//! quadratic datum the increment at the centre site is `≈ κ ε² F_{E,α}(p, X)`.

use std::time::Instant;

use super::report::{BenchReport, Table};
use crate::error::{Error, Result};
use crate::lattice::{evolve, Alpha, Boundary, InitialDatum, SchemeConfig};
use crate::linalg::{SymMatrix, Vector};
use crate::operators::{f_alpha_pair, f_infty_pair, f_median_pair, LatticeEdges, OperatorPair};
use crate::sampling::{gaussian_symmetric, gaussian_vector, substream};

/// Minimum separation, relative to `|p|`, between distinct values of
/// `|⟨p, e⟩|` (and from zero) for `p` to count as generic.
pub const GENERIC_MARGIN: f64 = 0.1;

#[derive(Clone, Debug)]
pub struct Trial {
    pub p: Vector,
    pub x: SymMatrix,
    /// `F_{E,α}(p, X)`
    pub f: f64,
    /// increment / ε²
    pub ratio: f64,
}

#[derive(Clone, Debug)]
pub struct Calibration {
    pub eps: f64,
    pub kappa: f64,
    /// `max |ratio − κF| / (|κ| max |F|)`
    pub spread: f64,
    pub trials: Vec<Trial>,
    /// Draws rejected as non-generic.
    pub resampled: usize,
}

pub fn operator_for(edges: &LatticeEdges, alpha: Alpha) -> Result<OperatorPair> {
    Ok(match alpha {
        Alpha::Median => f_median_pair(&edges.edges),
        Alpha::Midrange => f_infty_pair(&edges.edges),
        Alpha::Power(a) => f_alpha_pair(&edges.edges, a)?,
    })
}

/// `|⟨p, e⟩|` is bounded away from zero and separates every pair of edges
/// other than `±e`.
pub fn is_generic(edges: &LatticeEdges, p: &Vector) -> bool {
    let set = &edges.edges;
    let margin = GENERIC_MARGIN * p.norm();
    let a: Vec<f64> = set.edges().iter().map(|e| p.dot(e).abs()).collect();
    (0..a.len()).all(|i| {
        a[i] >= margin
            && (i + 1..a.len()).all(|j| j == set.negation_index(i) || (a[i] - a[j]).abs() >= margin)
    })
}

/// Increment of one scheme step at the centre site on
/// `⟨p, y − c⟩ + ½⟨X(y − c), y − c⟩`, with `c` the centre position.
pub fn step_increment(edges: &LatticeEdges, alpha: Alpha, eps: f64, p: &Vector, x: &SymMatrix) -> Result<f64> {
    let d = edges.basis.len();
    let reach = edges
        .offsets
        .iter()
        .flatten()
        .map(|k| k.unsigned_abs() as usize)
        .max()
        .unwrap_or(1);
    let n = 2 * reach + 1;
    let mut cfg = SchemeConfig::new(edges.clone(), alpha, vec![n; d], eps, 1);
    cfg.boundary = Boundary::Frozen;
    let mid = vec![reach as i64; d];
    let datum = InitialDatum::Quadratic {
        center: cfg.position(&mid),
        p: p.clone(),
        x: x.clone(),
    };
    let traj = evolve(&cfg, &datum)?;
    let i = cfg.linear_index(&mid).expect("centre site");
    Ok(traj.last().values[i] - traj.snapshots[0].field.values[i])
}

/// Least-squares fit of `κ` over `trials` generic draws of `(p, X)`. The
/// draws depend on `seed` only, so fits at different `eps` share them.
pub fn calibration_oracle(
    edges: &LatticeEdges,
    alpha: Alpha,
    trials: usize,
    eps: f64,
    seed: u64,
) -> Result<Calibration> {
    if trials == 0 {
        return Err(Error::Empty("calibration trials"));
    }
    let pair = operator_for(edges, alpha)?;
    let d = edges.basis.len();
    let mut rng = substream(seed, 0);
    let mut out = Vec::with_capacity(trials);
    let mut resampled = 0;
    while out.len() < trials {
        let p = gaussian_vector(&mut rng, d);
        let x = gaussian_symmetric(&mut rng, d);
        if !is_generic(edges, &p) {
            resampled += 1;
            if resampled > 1000 * trials {
                return Err(Error::Degenerate("no generic gradients for this edge set".into()));
            }
            continue;
        }
        let (lo, hi) = pair.eval(&p, &x)?;
        if (hi - lo).abs() > 1e-12 * (1.0 + x.max_abs()) {
            resampled += 1;
            continue;
        }
        let ratio = step_increment(edges, alpha, eps, &p, &x)? / (eps * eps);
        out.push(Trial { p, x, f: hi, ratio });
    }
    let num: f64 = out.iter().map(|t| t.ratio * t.f).sum();
    let den: f64 = out.iter().map(|t| t.f * t.f).sum();
    if den == 0.0 {
        return Err(Error::Degenerate("operator vanished on every trial".into()));
    }
    let kappa = num / den;
    let fmax = out.iter().map(|t| t.f.abs()).fold(0.0, f64::max);
    let spread = out
        .iter()
        .map(|t| (t.ratio - kappa * t.f).abs())
        .fold(0.0, f64::max)
        / (kappa.abs() * fmax);
    Ok(Calibration {
        eps,
        kappa,
        spread,
        trials: out,
        resampled,
    })
}

#[derive(Clone, Debug)]
pub struct CalibrationSuite {
    pub edges: LatticeEdges,
    pub alphas: Vec<Alpha>,
    pub trials: usize,
    pub eps: Vec<f64>,
    pub seed: u64,
    pub spread_tol: f64,
    pub stability_tol: f64,
}

impl Default for CalibrationSuite {
    fn default() -> Self {
        CalibrationSuite {
            edges: LatticeEdges::named("z2").expect("built-in edge set"),
            alphas: vec![Alpha::Median, Alpha::Power(2.0), Alpha::Midrange],
            trials: 20,
            eps: vec![0.02, 0.01, 0.005],
            seed: 0,
            spread_tol: 0.05,
            stability_tol: 0.02,
        }
    }
}

pub fn calibration_suite(suite: &CalibrationSuite) -> Result<BenchReport> {
    let start = Instant::now();
    let join = |v: Vec<String>| v.join(";");
    let mut report = BenchReport::new(
        "calibrate",
        [
            ("edges", suite.edges.to_string()),
            ("alphas", join(suite.alphas.iter().map(|a| a.to_string()).collect())),
            ("trials", suite.trials.to_string()),
            ("eps", join(suite.eps.iter().map(|e| format!("{e:?}")).collect())),
            ("seed", suite.seed.to_string()),
        ],
    );
    let mut kt = Table::new("kappa", &["alpha", "eps", "kappa", "spread", "resampled"]);
    let mut tt = Table::new("trials", &["alpha", "eps", "trial", "p", "x", "f", "ratio"]);
    for &alpha in &suite.alphas {
        let mut kappas = Vec::new();
        let mut worst = 0.0f64;
        for &eps in &suite.eps {
            let c = calibration_oracle(&suite.edges, alpha, suite.trials, eps, suite.seed)?;
            kt.push(vec![
                alpha.to_string().into(),
                eps.into(),
                c.kappa.into(),
                c.spread.into(),
                c.resampled.into(),
            ]);
            for (k, t) in c.trials.iter().enumerate() {
                tt.push(vec![
                    alpha.to_string().into(),
                    eps.into(),
                    k.into(),
                    t.p.to_string().into(),
                    format!("{:?}", t.x.to_dense().as_slice()).into(),
                    t.f.into(),
                    t.ratio.into(),
                ]);
            }
            worst = worst.max(c.spread);
            kappas.push(c.kappa);
        }
        report.check_le(format!("spread[alpha={alpha}]"), worst, suite.spread_tol);
        let (lo, hi) = kappas
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &k| (lo.min(k), hi.max(k)));
        let mean = kappas.iter().sum::<f64>() / kappas.len() as f64;
        report.check_le(
            format!("eps_stability[alpha={alpha}]"),
            (hi - lo) / mean.abs(),
            suite.stability_tol,
        );
    }
    report.tables.push(kt);
    report.tables.push(tt);
    report.runtime = start.elapsed();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z2() -> LatticeEdges {
        LatticeEdges::named("z2").unwrap()
    }

    #[test]
    fn median_rule_on_closed_form_quadratic() {
        // increments ε(±2) and ε(±1) + ε²: the two middle ones average to ε²
        let p = Vector::from([2.0, 1.0]);
        let x = SymMatrix::diag(&[0.0, 2.0]);
        let eps = 0.01;
        let inc = step_increment(&z2(), Alpha::Median, eps, &p, &x).unwrap();
        assert!((inc / (eps * eps) - 1.0).abs() < 1e-9);
        let f = operator_for(&z2(), Alpha::Median).unwrap().eval(&p, &x).unwrap();
        assert_eq!(f, (2.0, 2.0));
    }

    #[test]
    fn kappa_is_one_half_on_z2() {
        for alpha in [Alpha::Median, Alpha::Power(2.0), Alpha::Midrange] {
            let c = calibration_oracle(&z2(), alpha, 20, 0.01, 4).unwrap();
            assert!((c.kappa - 0.5).abs() < 1e-6, "{alpha}: {}", c.kappa);
            assert!(c.spread < 1e-6);
        }
    }

    #[test]
    fn kappa_ignores_edge_order() {
        let e = z2();
        let mut offsets = e.offsets.clone();
        offsets.reverse();
        offsets.swap(0, 1);
        let r = LatticeEdges::new(e.basis.clone(), offsets).unwrap();
        for alpha in [Alpha::Median, Alpha::Power(1.5), Alpha::Midrange] {
            let a = calibration_oracle(&e, alpha, 10, 0.01, 9).unwrap().kappa;
            let b = calibration_oracle(&r, alpha, 10, 0.01, 9).unwrap().kappa;
            assert!((a - b).abs() <= 1e-9 * a.abs(), "{alpha}: {a} vs {b}");
        }
    }

    #[test]
    fn ties_are_not_generic() {
        assert!(!is_generic(&z2(), &Vector::from([1.0, 1.0])));
        assert!(!is_generic(&z2(), &Vector::from([1.0, 0.0])));
        assert!(is_generic(&z2(), &Vector::from([2.0, 1.0])));
    }
}
