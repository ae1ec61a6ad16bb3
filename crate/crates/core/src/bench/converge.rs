//! Cauchy-style convergence of the rescaled scheme on periodic data: sup
//! distances between consecutive resolutions should shrink along the ladder.

use std::time::Instant;

use super::report::{BenchReport, Table};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::lattice::{evolve, Alpha, Field, InitialDatum, SchemeConfig};
use crate::operators::LatticeEdges;

#[derive(Clone, Debug)]
pub struct ConvergenceConfig {
    pub edges: LatticeEdges,
    pub alpha: Alpha,
    pub datum: InitialDatum,
    pub t_final: f64,
    /// Sites per axis at the coarsest level; `eps = 1/base` there.
    pub base: usize,
    pub levels: usize,
    pub max_ratio: f64,
    pub execution: Execution,
}

impl ConvergenceConfig {
    pub fn sine(alpha: Alpha) -> Self {
        ConvergenceConfig {
            edges: LatticeEdges::named("z2").expect("built-in edge set"),
            alpha,
            datum: InitialDatum::Sine {
                amplitude: 1.0,
                wavenumber: 1.0,
            },
            t_final: 0.05,
            base: 32,
            levels: 3,
            max_ratio: 0.8,
            execution: Execution::Parallel,
        }
    }

    /// Steps at the coarsest level. Finer levels take four times as many
    /// per halving, so every level stops at the same time.
    pub fn coarse_steps(&self) -> usize {
        (self.t_final * (self.base * self.base) as f64).floor() as usize
    }

    pub fn effective_time(&self) -> f64 {
        self.coarse_steps() as f64 / (self.base * self.base) as f64
    }
}

#[derive(Clone, Debug)]
pub struct Level {
    pub eps: f64,
    pub steps: usize,
    pub field: Field,
}

/// Runs every level on the unit torus.
pub fn convergence_levels(c: &ConvergenceConfig) -> Result<Vec<Level>> {
    if c.levels < 2 {
        return Err(Error::InvalidParameter("need at least two levels".into()));
    }
    let d = c.edges.basis.len();
    let mut out = Vec::with_capacity(c.levels);
    for k in 0..c.levels {
        let n = c.base << k;
        let steps = c.coarse_steps() << (2 * k);
        let eps = 1.0 / n as f64;
        let mut cfg = SchemeConfig::new(c.edges.clone(), c.alpha, vec![n; d], eps, steps);
        cfg.execution = c.execution;
        let traj = evolve(&cfg, &c.datum)?;
        out.push(Level {
            eps,
            steps,
            field: traj.last().clone(),
        });
    }
    Ok(out)
}

/// Sup distance between levels `k` and `k + 1` over the sites of the
/// coarsest level, which both contain.
fn level_distance(levels: &[Level], k: usize) -> f64 {
    let coarse = &levels[0].field.shape;
    let fine = |lvl: &Level, idx: &[usize]| {
        let f = levels[0].eps / lvl.eps;
        let scale = f.round() as usize;
        let mut i = 0;
        for (a, &n) in lvl.field.shape.iter().enumerate() {
            i = i * n + idx[a] * scale;
        }
        lvl.field.values[i]
    };
    let total: usize = coarse.iter().product();
    let mut idx = vec![0usize; coarse.len()];
    let mut worst = 0.0f64;
    for mut r in 0..total {
        for a in (0..coarse.len()).rev() {
            idx[a] = r % coarse[a];
            r /= coarse[a];
        }
        worst = worst.max((fine(&levels[k], &idx) - fine(&levels[k + 1], &idx)).abs());
    }
    worst
}

pub fn convergence_test(c: &ConvergenceConfig) -> Result<BenchReport> {
    let start = Instant::now();
    let mut report = BenchReport::new(
        "converge",
        [
            ("edges", c.edges.to_string()),
            ("alpha", c.alpha.to_string()),
            ("datum", format!("{:?}", c.datum)),
            ("t_final", format!("{:?}", c.t_final)),
            ("base", c.base.to_string()),
            ("levels", c.levels.to_string()),
        ],
    );
    let levels = convergence_levels(c)?;
    let dists: Vec<f64> = (0..levels.len() - 1).map(|k| level_distance(&levels, k)).collect();
    let mut t = Table::new("ladder", &["eps_coarse", "eps_fine", "steps_fine", "time", "sup_distance", "ratio"]);
    for (k, &dk) in dists.iter().enumerate() {
        let ratio = if k == 0 {
            f64::NAN
        } else if dists[k - 1] == 0.0 {
            0.0
        } else {
            dk / dists[k - 1]
        };
        t.push(vec![
            levels[k].eps.into(),
            levels[k + 1].eps.into(),
            levels[k + 1].steps.into(),
            c.effective_time().into(),
            dk.into(),
            ratio.into(),
        ]);
        if k > 0 {
            report.check_le(format!("cauchy_ratio[{k}]"), ratio, c.max_ratio);
        }
    }
    report.tables.push(t);
    report.runtime = start.elapsed();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_datum_has_zero_distances() {
        let mut c = ConvergenceConfig::sine(Alpha::Median);
        c.datum = InitialDatum::Constant(0.25);
        c.base = 8;
        let r = convergence_test(&c).unwrap();
        assert!(r.passed());
        let t = r.table("ladder").unwrap();
        assert!(t.rows.iter().all(|row| row[4] == 0.0.into()));
    }

    #[test]
    fn ladder_times_agree() {
        let c = ConvergenceConfig::sine(Alpha::Median);
        assert_eq!(c.coarse_steps(), 51);
        assert_eq!(c.effective_time(), 51.0 / 1024.0);
    }
}
