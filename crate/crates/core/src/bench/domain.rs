//! Planar polygonal domains, Finsler distance to the boundary, the eikonal
//! residual and the distance-based eigenvalue candidate.

use std::f64::consts::PI;
use std::time::Instant;

use super::report::{BenchReport, Table};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::finsler::PolyhedralNorm;
use crate::linalg::Vector;

pub type Point = [f64; 2];

fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Bounded open polygon, stored counter-clockwise.
#[derive(Clone, Debug, PartialEq)]
pub struct Domain2Poly {
    vertices: Vec<Point>,
}

fn segments_cross(a: Point, b: Point, c: Point, d: Point) -> bool {
    let o = |p: Point, q: Point, r: Point| cross(sub(q, p), sub(r, p));
    let (d1, d2, d3, d4) = (o(a, b, c), o(a, b, d), o(c, d, a), o(c, d, b));
    if d1 * d2 < 0.0 && d3 * d4 < 0.0 {
        return true;
    }
    let on = |p: Point, q: Point, r: Point, s: f64| {
        s == 0.0
            && r[0] >= p[0].min(q[0])
            && r[0] <= p[0].max(q[0])
            && r[1] >= p[1].min(q[1])
            && r[1] <= p[1].max(q[1])
    };
    on(a, b, c, d1) || on(a, b, d, d2) || on(c, d, a, d3) || on(c, d, b, d4)
}

impl Domain2Poly {
    pub fn new(mut vertices: Vec<Point>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::Degenerate(format!("a polygon needs 3 vertices, got {n}")));
        }
        if vertices.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("non-finite polygon vertex".into()));
        }
        let area2: f64 = (0..n).map(|i| cross(vertices[i], vertices[(i + 1) % n])).sum();
        if area2 == 0.0 {
            return Err(Error::Degenerate("polygon has zero area".into()));
        }
        for i in 0..n {
            for j in i + 1..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                let (a, b) = (vertices[i], vertices[(i + 1) % n]);
                let (c, d) = (vertices[j], vertices[(j + 1) % n]);
                if a == c || (!adjacent && segments_cross(a, b, c, d)) {
                    return Err(Error::Degenerate(format!("polygon is not simple (edges {i} and {j})")));
                }
            }
        }
        if area2 < 0.0 {
            vertices.reverse();
        }
        Ok(Domain2Poly { vertices })
    }

    /// `(lo, hi)` rectangle.
    pub fn rectangle(lo: Point, hi: Point) -> Result<Self> {
        Self::new(vec![lo, [hi[0], lo[1]], hi, [lo[0], hi[1]]])
    }

    /// `(−r, r)²`
    pub fn square(r: f64) -> Result<Self> {
        Self::rectangle([-r, -r], [r, r])
    }

    /// Regular `n`-gon with circumradius `r` centred at the origin, one
    /// vertex on the positive first axis.
    pub fn regular(n: usize, r: f64) -> Result<Self> {
        Self::new(
            (0..n)
                .map(|j| {
                    let t = 2.0 * PI * j as f64 / n as f64;
                    [r * t.cos(), r * t.sin()]
                })
                .collect(),
        )
    }

    /// `square[:r]`, `hexagon[:r]`, `disk:<n>[:r]` (regular `n`-gon) or an
    /// explicit list `x,y;x,y;...`.
    pub fn parse(spec: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad domain {spec:?}"));
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
        let mut parts = spec.split(':');
        let head = parts.next().unwrap_or("");
        let rest: Vec<&str> = parts.collect();
        match head {
            "square" => Self::square(rest.first().map_or(Ok(1.0), |s| num(s))?),
            "hexagon" => Self::regular(6, rest.first().map_or(Ok(1.0), |s| num(s))?),
            "disk" => {
                let n: usize = rest.first().ok_or_else(bad)?.parse().map_err(|_| bad())?;
                Self::regular(n, rest.get(1).map_or(Ok(1.0), |s| num(s))?)
            }
            _ if spec.contains(',') => {
                let mut v = Vec::new();
                for pt in spec.split(';').filter(|s| !s.trim().is_empty()) {
                    let (a, b) = pt.split_once(',').ok_or_else(bad)?;
                    v.push([num(a)?, num(b)?]);
                }
                Self::new(v)
            }
            _ => Err(bad()),
        }
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn scaled(&self, s: f64) -> Result<Self> {
        Self::new(self.vertices.iter().map(|v| [s * v[0], s * v[1]]).collect())
    }

    pub fn bbox(&self) -> (Point, Point) {
        self.vertices.iter().fold(
            ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]),
            |(lo, hi), v| ([lo[0].min(v[0]), lo[1].min(v[1])], [hi[0].max(v[0]), hi[1].max(v[1])]),
        )
    }

    pub fn is_convex(&self) -> bool {
        let n = self.vertices.len();
        (0..n).all(|i| {
            let (a, b, c) = (self.vertices[i], self.vertices[(i + 1) % n], self.vertices[(i + 2) % n]);
            cross(sub(b, a), sub(c, b)) >= 0.0
        })
    }

    /// Euclidean distance to the boundary.
    pub fn euclid_boundary_distance(&self, x: Point) -> f64 {
        self.edges()
            .map(|(a, b)| euclid_segment_distance(x, a, b))
            .fold(f64::INFINITY, f64::min)
    }

    /// Copy scaled by `s` about the vertex centroid.
    pub fn shrunk(&self, s: f64) -> Result<Self> {
        let n = self.vertices.len() as f64;
        let c = self.vertices.iter().fold([0.0, 0.0], |c, v| [c[0] + v[0] / n, c[1] + v[1] / n]);
        Self::new(
            self.vertices
                .iter()
                .map(|v| [c[0] + s * (v[0] - c[0]), c[1] + s * (v[1] - c[1])])
                .collect(),
        )
    }

    /// Open interior: crossing parity, boundary points excluded.
    pub fn contains(&self, x: Point) -> bool {
        let mut inside = false;
        for (a, b) in self.edges() {
            let ab = sub(b, a);
            let ax = sub(x, a);
            if cross(ab, ax) == 0.0 && dot(ax, sub(x, b)) <= 0.0 {
                return false;
            }
            if (a[1] > x[1]) != (b[1] > x[1]) {
                let t = (x[1] - a[1]) / (b[1] - a[1]);
                if x[0] < a[0] + t * ab[0] {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Points on `∂Ω` with consecutive spacing at most `h`, vertices
    /// included.
    pub fn boundary_samples(&self, h: f64) -> Result<Vec<Point>> {
        check_spacing(h)?;
        let mut out = Vec::new();
        for (a, b) in self.edges() {
            let ab = sub(b, a);
            let m = (dot(ab, ab).sqrt() / h).ceil().max(1.0) as usize;
            for i in 0..m {
                let t = i as f64 / m as f64;
                out.push([a[0] + t * ab[0], a[1] + t * ab[1]]);
            }
        }
        Ok(out)
    }

    /// Grid points `lo + h·(i, j)` of the bounding box inside `Ω`.
    pub fn interior_grid(&self, h: f64) -> Result<Vec<Point>> {
        check_spacing(h)?;
        let (lo, hi) = self.bbox();
        let nx = ((hi[0] - lo[0]) / h).round() as usize;
        let ny = ((hi[1] - lo[1]) / h).round() as usize;
        let mut out = Vec::new();
        for i in 0..=nx {
            for j in 0..=ny {
                let x = [lo[0] + i as f64 * h, lo[1] + j as f64 * h];
                if self.contains(x) {
                    out.push(x);
                }
            }
        }
        Ok(out)
    }

    /// Closed form `min_k (b_k − ⟨n_k, x⟩) / φ*(−n_k)` over the supporting
    /// half-planes `⟨n_k, y⟩ ≤ b_k`. Only valid on convex domains.
    pub fn convex_distance(&self, norm: &PolyhedralNorm, x: Point) -> Result<f64> {
        if !self.is_convex() {
            return Err(Error::InvalidParameter("closed-form distance needs a convex domain".into()));
        }
        let mut best = f64::INFINITY;
        for (a, b) in self.edges() {
            let e = sub(b, a);
            let n = [e[1], -e[0]];
            let slack = dot(n, a) - dot(n, x);
            best = best.min(slack / norm.dual_eval(&Vector::from([-n[0], -n[1]]))?);
        }
        Ok(best)
    }
}

fn euclid_segment_distance(x: Point, a: Point, b: Point) -> f64 {
    let ab = sub(b, a);
    let t = (dot(sub(x, a), ab) / dot(ab, ab)).clamp(0.0, 1.0);
    let p = [a[0] + t * ab[0], a[1] + t * ab[1]];
    dot(sub(x, p), sub(x, p)).sqrt()
}

fn check_spacing(h: f64) -> Result<()> {
    if h > 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("grid spacing must be positive, got {h}")))
    }
}

fn check_planar(norm: &PolyhedralNorm) -> Result<()> {
    if norm.dim() == 2 {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: 2,
            found: norm.dim(),
        })
    }
}

/// `min φ(x − a − t(b − a))` over `t ∈ [0, 1]`. The objective
/// `max_i (c_i − t s_i)` is convex and piecewise linear; bisection on the sign
/// of its right derivative brackets the kink, and the minimum is taken at the
/// crossing of the two lines active on either side.
pub fn segment_distance(norm: &PolyhedralNorm, x: Point, a: Point, b: Point) -> f64 {
    let g = norm.generators();
    let xa = sub(x, a);
    let ab = sub(b, a);
    let lines: Vec<(f64, f64)> = g
        .iter()
        .map(|gi| {
            let gi = [gi[0], gi[1]];
            (dot(gi, xa), dot(gi, ab))
        })
        .collect();
    let f = |t: f64| lines.iter().map(|&(c, s)| c - t * s).fold(f64::NEG_INFINITY, f64::max);
    // active lines at t with the smallest and largest s; the slope of line
    // i is −s_i, so these carry the right and left derivatives
    let active = |t: f64| {
        let v = f(t);
        let slack = 1e-15 * (1.0 + v.abs());
        let mut it = lines.iter().copied().filter(|&(c, s)| c - t * s >= v - slack);
        let first = it.next().expect("generators");
        it.fold((first, first), |(lo, hi), l| {
            (if l.1 < lo.1 { l } else { lo }, if l.1 > hi.1 { l } else { hi })
        })
    };
    if active(0.0).0 .1 <= 0.0 {
        return f(0.0);
    }
    if active(1.0).1 .1 >= 0.0 {
        return f(1.0);
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..64 {
        let m = 0.5 * (lo + hi);
        if m <= lo || m >= hi {
            break;
        }
        if active(m).0 .1 <= 0.0 {
            hi = m;
        } else {
            lo = m;
        }
    }
    let (c1, s1) = active(lo).0;
    let (c2, s2) = active(hi).0;
    let mut best = f(lo).min(f(hi));
    if s1 != s2 {
        let t = (c1 - c2) / (s1 - s2);
        if t > 0.0 && t < 1.0 {
            best = best.min(f(t));
        }
    }
    best
}

/// Distances from one domain under one norm, with the boundary sampled once.
#[derive(Clone, Debug)]
pub struct DistanceField {
    pub domain: Domain2Poly,
    pub norm: PolyhedralNorm,
    pub h: f64,
    samples: Vec<Point>,
    /// `φ(z) ≥ floor·|z|`
    floor: f64,
}

impl DistanceField {
    pub fn new(domain: &Domain2Poly, norm: &PolyhedralNorm, h: f64) -> Result<Self> {
        check_planar(norm)?;
        Ok(DistanceField {
            domain: domain.clone(),
            norm: norm.clone(),
            h,
            samples: domain.boundary_samples(h)?,
            floor: 1.0 / norm.primal_vertices()?.iter().map(Vector::norm).fold(0.0, f64::max),
        })
    }

    pub fn samples(&self) -> &[Point] {
        &self.samples
    }

    /// `min φ(x − y)` over the boundary samples; no domain check.
    pub fn sampled(&self, x: Point) -> f64 {
        self.samples
            .iter()
            .map(|y| self.norm.eval_slice(&sub(x, *y)))
            .fold(f64::INFINITY, f64::min)
    }

    /// `inf φ(x − y)` over the whole boundary.
    pub fn exact(&self, x: Point) -> f64 {
        let mut best = f64::INFINITY;
        for (a, b) in self.domain.edges() {
            // skip edges whose Euclidean bound already loses
            if self.floor * euclid_segment_distance(x, a, b) < best {
                best = best.min(segment_distance(&self.norm, x, a, b));
            }
        }
        best
    }

    /// Two-stage minimisation through the boundary of `inner`:
    /// `min over y ∈ ∂inner of dist(y) + φ(x − y)`, both sampled.
    pub fn through(&self, inner: &Domain2Poly, x: Point) -> Result<f64> {
        Ok(inner
            .boundary_samples(self.h)?
            .into_iter()
            .map(|y| self.sampled(y) + self.norm.eval_slice(&sub(x, y)))
            .fold(f64::INFINITY, f64::min))
    }
}

/// `dist_φ(x, ∂Ω)` from boundary samples with spacing `h`; the error is at
/// most `Lip(φ)·h/2`.
pub fn finsler_distance(domain: &Domain2Poly, norm: &PolyhedralNorm, x: &Vector, h: f64) -> Result<f64> {
    check_planar(norm)?;
    x.check_dim(2)?;
    let p = [x[0], x[1]];
    if !domain.contains(p) {
        return Err(Error::InvalidParameter(format!("point {x} lies outside the domain")));
    }
    Ok(DistanceField::new(domain, norm, h)?.sampled(p))
}

#[derive(Clone, Debug, PartialEq)]
pub struct EikonalResidual {
    pub max_residual: f64,
    /// `max_residual / h`
    pub constant: f64,
    pub tested: usize,
    pub ridge: usize,
    pub near_boundary: usize,
}

/// Ridge threshold on the disagreement of one-sided difference quotients.
pub const RIDGE_JUMP: f64 = 0.1;

/// `|φ*(D_h d) − 1|` with central differences of the exact distance, over
/// grid points farther than `2h` from `∂Ω` and off the ridge.
pub fn eikonal_residual(domain: &Domain2Poly, norm: &PolyhedralNorm, h: f64, exec: Execution) -> Result<EikonalResidual> {
    let field = DistanceField::new(domain, norm, h)?;
    let vertices = norm.primal_vertices()?;
    let grid = domain.interior_grid(h)?;
    // 0: near boundary, 1: ridge, 2: tested
    let rows = exec.map(grid.len(), |k| {
        let x = grid[k];
        if domain.euclid_boundary_distance(x) <= 2.0 * h {
            return (0u8, 0.0);
        }
        let d0 = field.exact(x);
        let mut grad = [0.0; 2];
        for (a, g) in grad.iter_mut().enumerate() {
            let mut xp = x;
            let mut xm = x;
            xp[a] += h;
            xm[a] -= h;
            let (dp, dm) = (field.exact(xp), field.exact(xm));
            let (fwd, bwd) = ((dp - d0) / h, (d0 - dm) / h);
            if (fwd - bwd).abs() > RIDGE_JUMP {
                return (1, 0.0);
            }
            *g = 0.5 * (fwd + bwd);
        }
        let dual = vertices
            .iter()
            .map(|v| v[0] * grad[0] + v[1] * grad[1])
            .fold(f64::NEG_INFINITY, f64::max);
        (2, (dual - 1.0).abs())
    });
    let mut r = EikonalResidual {
        max_residual: 0.0,
        constant: 0.0,
        tested: 0,
        ridge: 0,
        near_boundary: 0,
    };
    for (kind, res) in rows {
        match kind {
            0 => r.near_boundary += 1,
            1 => r.ridge += 1,
            _ => {
                r.tested += 1;
                r.max_residual = r.max_residual.max(res);
            }
        }
    }
    r.constant = r.max_residual / h;
    Ok(r)
}

/// `1 / max` of the sampled distance over the interior grid: the quotient of
/// the distance candidate, an upper bound for the eigenvalue.
pub fn eigen_estimate(domain: &Domain2Poly, norm: &PolyhedralNorm, h: f64, exec: Execution) -> Result<f64> {
    let field = DistanceField::new(domain, norm, h)?;
    let grid = domain.interior_grid(h)?;
    if grid.is_empty() {
        return Err(Error::Empty("interior grid"));
    }
    let m = exec
        .map(grid.len(), |k| field.sampled(grid[k]))
        .into_iter()
        .fold(0.0, f64::max);
    Ok(1.0 / m)
}

#[derive(Clone, Debug)]
pub struct DistanceConfig {
    pub domain: Domain2Poly,
    pub norm: PolyhedralNorm,
    pub h: f64,
    /// Off-ridge eikonal residual allowed, in units of `h`.
    pub eikonal_c: f64,
    pub execution: Execution,
}

impl DistanceConfig {
    pub fn new(domain: Domain2Poly, norm: PolyhedralNorm, h: f64) -> Self {
        DistanceConfig {
            domain,
            norm,
            h,
            eikonal_c: 5.0,
            execution: Execution::Parallel,
        }
    }

    fn report(&self, name: &str, extra: &[(&str, String)]) -> BenchReport {
        let mut cfg = vec![
            ("domain".to_string(), format!("{:?}", self.domain.vertices())),
            ("norm".to_string(), format!("{:?}", self.norm.generators())),
            ("h".to_string(), format!("{:?}", self.h)),
        ];
        cfg.extend(extra.iter().map(|(k, v)| (k.to_string(), v.clone())));
        BenchReport::new(name, cfg)
    }
}

/// Sampled distance against the exact segment minimisation (and against the
/// half-plane closed form on convex domains), the dynamic-programming
/// identity through a shrunken copy, and the eikonal residual.
pub fn distance_report(c: &DistanceConfig) -> Result<BenchReport> {
    let start = Instant::now();
    let mut report = c.report("distance", &[("eikonal_c", format!("{:?}", c.eikonal_c))]);
    let field = DistanceField::new(&c.domain, &c.norm, c.h)?;
    let lip = c.norm.lipschitz();
    let grid = c.domain.interior_grid(c.h)?;
    let convex = c.domain.is_convex();
    let errs = c.execution.map(grid.len(), |k| {
        let x = grid[k];
        let s = field.sampled(x);
        let e = field.exact(x);
        let oracle = if convex {
            (c.domain.convex_distance(&c.norm, x).unwrap_or(f64::NAN) - e).abs()
        } else {
            0.0
        };
        ((s - e).abs(), oracle)
    });
    let sample_err = errs.iter().map(|e| e.0).fold(0.0, f64::max);
    let oracle_err = errs.iter().map(|e| e.1).fold(0.0, f64::max);
    report.check_le("sampled_vs_exact", sample_err, lip * c.h);
    if convex {
        report.check_le("exact_vs_halfplanes", oracle_err, 1e-12 * (1.0 + lip));
    }

    // the identity needs the inner boundary inside Ω; otherwise no probes
    let inner = c.domain.shrunk(0.5)?;
    let nested = inner
        .boundary_samples(c.h)?
        .iter()
        .all(|&y| c.domain.contains(y));
    let probes: Vec<Point> = if nested {
        grid.iter().copied().filter(|&x| inner.contains(x)).step_by(97).collect()
    } else {
        Vec::new()
    };
    let mut dp_err = 0.0f64;
    for &x in &probes {
        dp_err = dp_err.max((field.through(&inner, x)? - field.sampled(x)).abs());
    }
    report.check_le("dynamic_programming", dp_err, 2.0 * lip * c.h);

    let eik = eikonal_residual(&c.domain, &c.norm, c.h, c.execution)?;
    report.check_le("eikonal_residual", eik.max_residual, c.eikonal_c * c.h);
    let mut t = Table::new(
        "summary",
        &["grid_points", "max_sample_error", "max_halfplane_error", "dp_probes", "dp_error", "eikonal_tested", "eikonal_ridge", "eikonal_near_boundary", "eikonal_max", "eikonal_c"],
    );
    t.push(vec![
        grid.len().into(),
        sample_err.into(),
        oracle_err.into(),
        probes.len().into(),
        dp_err.into(),
        eik.tested.into(),
        eik.ridge.into(),
        eik.near_boundary.into(),
        eik.max_residual.into(),
        eik.constant.into(),
    ]);
    report.tables.push(t);
    report.runtime = start.elapsed();
    Ok(report)
}

/// Eigenvalue candidate against an expected value (within `2h` when given)
/// and the scaling law `Λ(λΩ) = Λ(Ω)/λ`.
pub fn eigen_report(c: &DistanceConfig, expected: Option<f64>) -> Result<BenchReport> {
    let start = Instant::now();
    let exp = expected.map_or("none".to_string(), |e| format!("{e:?}"));
    let mut report = c.report("eigen", &[("expected", exp)]);
    let lam = eigen_estimate(&c.domain, &c.norm, c.h, c.execution)?;
    if let Some(e) = expected {
        report.check_le("lambda_vs_expected", (lam - e).abs(), 2.0 * c.h);
    }
    let s = 2.0;
    let lam2 = eigen_estimate(&c.domain.scaled(s)?, &c.norm, s * c.h, c.execution)?;
    report.check_le("scaling", (lam2 * s - lam).abs(), 1e-12 * lam);
    let mut t = Table::new("eigen", &["scale", "h", "lambda"]);
    t.push(vec![1.0.into(), c.h.into(), lam.into()]);
    t.push(vec![s.into(), (s * c.h).into(), lam2.into()]);
    report.tables.push(t);
    report.runtime = start.elapsed();
    Ok(report)
}
