//! Directions where a planar gauge fails to be differentiable, the size of
//! its subdifferential there, and the tail count `N(δ)`.

use std::time::Instant;

use super::report::{BenchReport, Table};
use crate::error::{Error, Result};
use crate::finsler::{PolyhedralNorm, TOL_ACTIVE};
use crate::linalg::Vector;
use crate::shielding::SmoothNorm;

#[derive(Clone, Debug, PartialEq)]
pub struct Direction {
    /// A vertex of the unit ball `{ψ ≤ 1}`.
    pub q: Vector,
    /// Euclidean diameter of `∂ψ(q)`.
    pub diam: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TwoDAnalysis {
    pub directions: Vec<Direction>,
    /// `Σ diam ∂ψ(q)`
    pub total: f64,
    /// Length of `{ψ* = 1}`.
    pub perimeter: f64,
}

impl TwoDAnalysis {
    /// `N(δ)`: directions with `diam > δ`.
    pub fn count_above(&self, delta: f64) -> usize {
        self.directions.iter().filter(|d| d.diam > delta).count()
    }
}

fn polygon_length(mut pts: Vec<[f64; 2]>) -> f64 {
    pts.sort_by(|a, b| a[1].atan2(a[0]).total_cmp(&b[1].atan2(b[0])));
    (0..pts.len())
        .map(|i| {
            let (a, b) = (pts[i], pts[(i + 1) % pts.len()]);
            ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
        })
        .sum()
}

pub fn twod_analysis(norm: &PolyhedralNorm) -> Result<TwoDAnalysis> {
    if norm.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: norm.dim(),
        });
    }
    let mut directions = Vec::new();
    for q in norm.primal_vertices()? {
        let face = norm.subdifferential(q, TOL_ACTIVE)?;
        let v = face.vertices();
        let mut diam = 0.0f64;
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                diam = diam.max(v[i].dist(&v[j]));
            }
        }
        directions.push(Direction { q: q.clone(), diam });
    }
    let total = directions.iter().map(|d| d.diam).sum();
    // the generators are the vertices of the dual ball, which contains 0
    let perimeter = polygon_length(norm.generators().iter().map(|g| [g[0], g[1]]).collect());
    Ok(TwoDAnalysis {
        directions,
        total,
        perimeter,
    })
}

/// A smooth gauge has no such directions; the perimeter is that of an
/// inscribed polygon with `samples` vertices on `{ψ* = 1}`.
pub fn twod_smooth(norm: SmoothNorm, samples: usize) -> TwoDAnalysis {
    let pts = (0..samples)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / samples as f64;
            let u = Vector::from([t.cos(), t.sin()]);
            let s = 1.0 / norm.dual_value(&u);
            [s * u[0], s * u[1]]
        })
        .collect();
    TwoDAnalysis {
        directions: Vec::new(),
        total: 0.0,
        perimeter: polygon_length(pts),
    }
}

pub const DEFAULT_DELTAS: [f64; 8] = [0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0];

pub fn twod_report(name: &str, a: &TwoDAnalysis, deltas: &[f64]) -> BenchReport {
    let start = Instant::now();
    let mut report = BenchReport::new(
        "twod",
        [("norm", name.to_string()), ("deltas", format!("{deltas:?}"))],
    );
    let tol = 1e-9 * a.perimeter.max(1.0);
    report.check_le("sum_at_most_perimeter", a.total - a.perimeter, tol);
    if !a.directions.is_empty() {
        report.check_le("sum_equals_perimeter", (a.total - a.perimeter).abs(), tol);
    }
    let counts: Vec<usize> = deltas.iter().map(|&d| a.count_above(d)).collect();
    let mut sorted: Vec<(f64, usize)> = deltas.iter().copied().zip(counts.iter().copied()).collect();
    sorted.sort_by(|x, y| x.0.total_cmp(&y.0));
    let monotone = sorted.windows(2).all(|w| w[1].1 <= w[0].1);
    report.check_that("tail_nonincreasing", monotone, 0.0, 0.0);

    let mut dt = Table::new("directions", &["q1", "q2", "diam"]);
    for d in &a.directions {
        dt.push(vec![d.q[0].into(), d.q[1].into(), d.diam.into()]);
    }
    let mut tt = Table::new("tail", &["delta", "count"]);
    for (d, c) in deltas.iter().zip(counts) {
        tt.push(vec![(*d).into(), c.into()]);
    }
    let mut st = Table::new("summary", &["directions", "total", "perimeter"]);
    st.push(vec![a.directions.len().into(), a.total.into(), a.perimeter.into()]);
    report.tables.extend([dt, tt, st]);
    report.runtime = start.elapsed();
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finsler::builtin;

    #[test]
    fn l1_has_four_directions_of_diameter_two() {
        let a = twod_analysis(&builtin("l1").unwrap()).unwrap();
        assert_eq!(a.directions.len(), 4);
        assert!(a.directions.iter().all(|d| (d.diam - 2.0).abs() < 1e-12));
        assert!((a.total - 8.0).abs() < 1e-12 && (a.perimeter - 8.0).abs() < 1e-12);
        assert_eq!(a.count_above(1.9), 4);
        assert_eq!(a.count_above(2.0), 0);
        assert!(twod_report("l1", &a, &DEFAULT_DELTAS).passed());
    }

    #[test]
    fn regular_polygon_sum_is_the_dual_perimeter() {
        for k in [3, 5, 8] {
            let a = twod_analysis(&builtin(&format!("euclidean-polytope-{k}")).unwrap()).unwrap();
            assert_eq!(a.directions.len(), 2 * k);
            assert!((a.total - a.perimeter).abs() < 1e-12, "{k}");
        }
    }

    #[test]
    fn smooth_norm_has_no_directions() {
        let a = twod_smooth(SmoothNorm::Euclidean, 4096);
        assert_eq!(a.count_above(0.0), 0);
        assert!((a.perimeter - 2.0 * std::f64::consts::PI).abs() < 1e-5);
        assert!(twod_report("euclidean", &a, &DEFAULT_DELTAS).passed());
    }

    #[test]
    fn rejects_other_dimensions() {
        assert!(twod_analysis(&builtin("l1:3").unwrap()).is_err());
    }
}
