//! Gauss–Legendre rules and exact integrals of truncated radial bumps over
//! convex polygons.

use std::f64::consts::{PI, TAU};

/// Gauss–Legendre nodes and weights on `[−1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            // Newton from the Chebyshev-like initial guess
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    /// `∫_a^b f` by the rule mapped to `[a, b]`.
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let h = 0.5 * (b - a);
        let m = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(m + h * x))
            .sum::<f64>()
            * h
    }

    /// Mapped nodes and weights for `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let h = 0.5 * (b - a);
        let m = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (m + h * x, w * h))
    }
}

/// `(P_n(x), P_n'(x))`
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Radial profile `a (R² − s²)³` on `s < R`.
#[derive(Clone, Copy, Debug)]
pub struct CubicBump {
    pub a: f64,
    pub r2: f64,
}

impl CubicBump {
    pub fn radius(&self) -> f64 {
        self.r2.max(0.0).sqrt()
    }

    /// `∫_0^r a (R² − s²)³ s ds`
    pub fn mass(&self, r: f64) -> f64 {
        let t = self.r2 - r * r;
        self.a * (self.r2.powi(4) - t.powi(4)) / 8.0
    }

    /// `∫_0^r a (R² − s²)³ s² ds`
    pub fn moment(&self, r: f64) -> f64 {
        let (r2, r3) = (self.r2, r * r * r);
        let s = r * r;
        self.a
            * r3
            * (r2.powi(3) / 3.0 - 3.0 * r2 * r2 * s / 5.0 + 3.0 * r2 * s * s / 7.0
                - s * s * s / 9.0)
    }

    pub fn value(&self, s2: f64) -> f64 {
        let t = self.r2 - s2;
        if t <= 0.0 {
            0.0
        } else {
            self.a * t * t * t
        }
    }
}

/// Convex (possibly unbounded) polygon `{x : ⟨n_k, x⟩ ≤ b_k}`.
#[derive(Clone, Debug, Default)]
pub struct Polygon {
    pub halfplanes: Vec<([f64; 2], f64)>,
}

const GL5: [(f64, f64); 5] = [
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.0, 0.568_888_888_888_888_9),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

/// Mass and first moment `∫ (x − c) f(|x − c|)` of a [`CubicBump`] centred
/// at `c` over a polygon.
///
/// With `G(r) = ∫_0^r f(s) s ds`, the divergence theorem turns both integrals
/// into boundary integrals over `∂(K ∩ disk)`: `∮ G(r)/r² ⟨x − c, ν⟩` for the
/// mass and `∮ G(r) ν` for the moment. On circle arcs these are closed form;
/// on straight edges the integrands are polynomials of degree at most 8 in
/// arclength, so a five-point Gauss rule is exact.
pub fn disk_moments(poly: &Polygon, c: [f64; 2], bump: &CubicBump) -> (f64, [f64; 2]) {
    const ZERO: (f64, [f64; 2]) = (0.0, [0.0, 0.0]);
    let rad = bump.radius();
    if rad == 0.0 {
        return ZERO;
    }
    let r2 = bump.r2;
    // unit normals, offsets relative to c
    let mut hp: Vec<([f64; 2], f64)> = Vec::with_capacity(poly.halfplanes.len());
    for (n, b) in &poly.halfplanes {
        let nn = n[0].hypot(n[1]);
        if nn == 0.0 {
            if *b < 0.0 {
                return ZERO;
            }
            continue;
        }
        let u = [n[0] / nn, n[1] / nn];
        let h = b / nn - (u[0] * c[0] + u[1] * c[1]);
        if h <= -rad {
            return ZERO;
        }
        hp.push((u, h));
    }
    // G(r)/r² and G(r) as polynomials in t = r²
    let a8 = bump.a / 8.0;
    let g_over_t = |t: f64| a8 * (4.0 * r2.powi(3) - 6.0 * r2 * r2 * t + 4.0 * r2 * t * t - t * t * t);
    let g = |t: f64| a8 * (r2.powi(4) - (r2 - t).powi(4));

    let mut mass = 0.0;
    let mut mom = [0.0, 0.0];
    for (k, &(n, h)) in hp.iter().enumerate() {
        if h >= rad {
            continue;
        }
        let w = (r2 - h * h).max(0.0).sqrt();
        let t = [-n[1], n[0]];
        let foot = [h * n[0], h * n[1]];
        let (mut lo, mut hi) = (-w, w);
        for (j, &(m, hj)) in hp.iter().enumerate() {
            if j == k {
                continue;
            }
            let mt = m[0] * t[0] + m[1] * t[1];
            let rhs = hj - (m[0] * foot[0] + m[1] * foot[1]);
            if mt > 0.0 {
                hi = hi.min(rhs / mt);
            } else if mt < 0.0 {
                lo = lo.max(rhs / mt);
            } else if rhs < 0.0 {
                hi = lo;
            }
        }
        if lo >= hi {
            continue;
        }
        let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        let (mut im, mut ig) = (0.0, 0.0);
        for (x, wt) in GL5 {
            let s = mid + half * x;
            let tt = h * h + s * s;
            im += wt * g_over_t(tt);
            ig += wt * g(tt);
        }
        mass += h * im * half;
        mom[0] += n[0] * ig * half;
        mom[1] += n[1] * ig * half;
    }

    // arcs of the circle inside K
    let mut cuts: Vec<f64> = Vec::new();
    for &(n, h) in &hp {
        if h.abs() < rad {
            let base = n[1].atan2(n[0]);
            let half = (h / rad).acos();
            cuts.push((base - half).rem_euclid(TAU));
            cuts.push((base + half).rem_euclid(TAU));
        }
    }
    cuts.sort_by(f64::total_cmp);
    let arcs: Vec<(f64, f64)> = if cuts.is_empty() {
        vec![(0.0, PI), (PI, TAU)]
    } else {
        let mut a: Vec<(f64, f64)> = cuts.windows(2).map(|w| (w[0], w[1])).collect();
        a.push((*cuts.last().unwrap(), cuts[0] + TAU));
        a
    };
    let gr = g(r2);
    for (t0, t1) in arcs {
        if t1 <= t0 {
            continue;
        }
        let tm = 0.5 * (t0 + t1);
        let p = [rad * tm.cos(), rad * tm.sin()];
        if hp.iter().all(|(n, h)| n[0] * p[0] + n[1] * p[1] <= *h) {
            mass += gr * (t1 - t0);
            mom[0] += gr * rad * (t1.sin() - t0.sin());
            mom[1] += gr * rad * (t0.cos() - t1.cos());
        }
    }
    (mass, mom)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_exactness() {
        let g = GaussLegendre::new(5);
        let s: f64 = g.weights.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        // degree 9 is integrated exactly
        let v = g.integrate(0.0, 2.0, |x| x.powi(9) - 3.0 * x.powi(4));
        assert!((v - (2f64.powi(10) / 10.0 - 3.0 * 32.0 / 5.0)).abs() < 1e-11);
    }

    #[test]
    fn full_disk_mass() {
        let bump = CubicBump { a: 1.0, r2: 1.0 };
        let (m, mom) = disk_moments(&Polygon::default(), [0.3, 0.1], &bump);
        // 2π ∫_0^1 (1 − s²)³ s ds = π/4
        assert!((m - PI / 4.0).abs() < 1e-14);
        assert!(mom[0].abs() < 1e-14 && mom[1].abs() < 1e-14);
    }

    #[test]
    fn half_disk_and_quadrant() {
        let bump = CubicBump { a: 1.0, r2: 1.0 };
        let half = Polygon {
            halfplanes: vec![([0.0, -1.0], 0.0)],
        };
        let (m, mom) = disk_moments(&half, [0.0, 0.0], &bump);
        assert!((m - PI / 8.0).abs() < 1e-14);
        // ∫_0^π sin t dt · ∫_0^1 (1 − s²)³ s² ds = 2 · 16/315
        assert!((mom[1] - 32.0 / 315.0).abs() < 1e-14);
        let quad = Polygon {
            halfplanes: vec![([0.0, -1.0], 0.0), ([-1.0, 0.0], 0.0)],
        };
        let (m, _) = disk_moments(&quad, [0.2, -0.3], &bump);
        // brute-force midpoint oracle
        let n = 2000;
        let h = 2.0 / n as f64;
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                let x = -1.0 + 0.2 + (i as f64 + 0.5) * h;
                let y = -1.0 - 0.3 + (j as f64 + 0.5) * h;
                if x >= 0.0 && y >= 0.0 {
                    s += bump.value((x - 0.2).powi(2) + (y + 0.3).powi(2)) * h * h;
                }
            }
        }
        assert!((m - s).abs() < 1e-5, "{m} vs {s}");
    }
}
