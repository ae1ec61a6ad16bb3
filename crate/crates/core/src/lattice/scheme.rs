use super::{Alpha, InitialDatum, Lattice};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::linalg::Vector;
use crate::operators::LatticeEdges;

/// Largest edge set the stack-allocated update buffer holds.
pub const MAX_EDGES: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    /// The window is a torus.
    Periodic,
    /// Out-of-window neighbours always read the initial datum.
    Frozen,
}

impl std::str::FromStr for Boundary {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "periodic" => Ok(Boundary::Periodic),
            "frozen" => Ok(Boundary::Frozen),
            _ => Err(Error::Parse(format!("unknown boundary policy {s:?}"))),
        }
    }
}

impl Boundary {
    pub fn as_str(self) -> &'static str {
        match self {
            Boundary::Periodic => "periodic",
            Boundary::Frozen => "frozen",
        }
    }
}

#[derive(Clone, Debug)]
pub struct SchemeConfig {
    pub edges: LatticeEdges,
    pub alpha: Alpha,
    /// Sites per lattice axis; site `k` sits at `eps · B k`.
    pub window: Vec<usize>,
    pub boundary: Boundary,
    pub eps: f64,
    pub steps: usize,
    /// Keep every `stride`-th field (the final one is always kept).
    pub stride: usize,
    /// Optional time horizon; `steps · eps²` may not exceed it.
    pub horizon: Option<f64>,
    pub execution: Execution,
}

impl SchemeConfig {
    pub fn new(edges: LatticeEdges, alpha: Alpha, window: Vec<usize>, eps: f64, steps: usize) -> Self {
        SchemeConfig {
            edges,
            alpha,
            window,
            boundary: Boundary::Periodic,
            eps,
            steps,
            stride: steps.max(1),
            horizon: None,
            execution: Execution::default(),
        }
    }

    pub fn lattice(&self) -> Result<Lattice> {
        Lattice::new(self.edges.basis.clone())
    }

    pub fn dim(&self) -> usize {
        self.edges.basis.len()
    }

    pub fn sites(&self) -> usize {
        self.window.iter().product()
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        if self.window.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: self.window.len(),
            });
        }
        if self.window.iter().any(|&n| n < 3) {
            return Err(Error::InvalidParameter("window extents must be at least 3".into()));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::InvalidParameter(format!("eps must be positive, got {}", self.eps)));
        }
        if self.stride == 0 {
            return Err(Error::InvalidParameter("snapshot stride must be positive".into()));
        }
        if self.edges.offsets.len() > MAX_EDGES {
            return Err(Error::DimensionCap {
                what: "edge set in the scheme",
                dim: self.edges.offsets.len(),
                max: MAX_EDGES,
            });
        }
        if let Some(t) = self.horizon {
            let reach = self.steps as f64 * self.eps * self.eps;
            if reach > t * (1.0 + 1e-12) {
                return Err(Error::InvalidParameter(format!(
                    "steps·eps² = {reach} exceeds the horizon {t}"
                )));
            }
        }
        Ok(())
    }

    /// Multi-index of linear site `i` (last axis fastest).
    pub fn site(&self, mut i: usize) -> Vec<i64> {
        let mut k = vec![0i64; self.window.len()];
        for a in (0..self.window.len()).rev() {
            k[a] = (i % self.window[a]) as i64;
            i /= self.window[a];
        }
        k
    }

    pub fn linear_index(&self, k: &[i64]) -> Option<usize> {
        let mut i = 0usize;
        for (a, &n) in self.window.iter().enumerate() {
            if k[a] < 0 || k[a] as usize >= n {
                return None;
            }
            i = i * n + k[a] as usize;
        }
        Some(i)
    }

    /// Physical position `eps · B k`.
    pub fn position(&self, k: &[i64]) -> Vector {
        let mut v = Vector::zeros(self.dim());
        for (c, b) in k.iter().zip(&self.edges.basis) {
            v = v.add_scaled(*c as f64, b);
        }
        v.scaled(self.eps)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    pub shape: Vec<usize>,
    pub values: Vec<f64>,
}

impl Field {
    pub fn sample(cfg: &SchemeConfig, datum: &InitialDatum) -> Self {
        let values = cfg
            .execution
            .map(cfg.sites(), |i| datum.eval(cfg.position(&cfg.site(i)).as_slice()));
        Field {
            shape: cfg.window.clone(),
            values,
        }
    }

    pub fn from_values(cfg: &SchemeConfig, values: Vec<f64>) -> Result<Self> {
        if values.len() != cfg.sites() {
            return Err(Error::DimensionMismatch {
                expected: cfg.sites(),
                found: values.len(),
            });
        }
        Ok(Field {
            shape: cfg.window.clone(),
            values,
        })
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    pub fn sup_dist(&self, other: &Field) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Precomputed neighbour tables for one configuration.
#[derive(Clone, Debug)]
pub struct Stepper {
    alpha: Alpha,
    execution: Execution,
    degree: usize,
    sites: usize,
    /// `nbr[i·degree + j]` indexes `values ++ ghosts`.
    nbr: Vec<u32>,
    ghosts: Vec<f64>,
}

impl Stepper {
    /// `datum` supplies the frozen boundary values and is required for the
    /// frozen policy.
    pub fn new(cfg: &SchemeConfig, datum: Option<&InitialDatum>) -> Result<Self> {
        cfg.validate()?;
        let n = cfg.sites();
        let degree = cfg.edges.offsets.len();
        if n + n * degree >= u32::MAX as usize {
            return Err(Error::InvalidParameter("window too large".into()));
        }
        let datum = match (cfg.boundary, datum) {
            (Boundary::Frozen, None) => {
                return Err(Error::InvalidParameter(
                    "the frozen boundary needs a closed-form initial datum".into(),
                ))
            }
            (_, d) => d,
        };
        let mut nbr = Vec::with_capacity(n * degree);
        let mut ghosts = Vec::new();
        for i in 0..n {
            let k = cfg.site(i);
            for off in &cfg.edges.offsets {
                let mut t: Vec<i64> = k.iter().zip(off).map(|(a, b)| a + b).collect();
                let idx = match cfg.boundary {
                    Boundary::Periodic => {
                        for (a, &w) in cfg.window.iter().enumerate() {
                            t[a] = t[a].rem_euclid(w as i64);
                        }
                        cfg.linear_index(&t).expect("wrapped index")
                    }
                    Boundary::Frozen => match cfg.linear_index(&t) {
                        Some(j) => j,
                        None => {
                            let x = cfg.position(&t);
                            ghosts.push(datum.expect("checked above").eval(x.as_slice()));
                            n + ghosts.len() - 1
                        }
                    },
                };
                nbr.push(idx as u32);
            }
        }
        Ok(Stepper {
            alpha: cfg.alpha,
            execution: cfg.execution,
            degree,
            sites: n,
            nbr,
            ghosts,
        })
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    /// One synchronous update. The new value at `x` is `M_α` of the
    /// neighbour values, which equals `u(x) + M_α(increments)` by translation
    /// equivariance and keeps the update exactly monotone in floating point.
    pub fn step(&self, current: &[f64], next: &mut [f64]) {
        let ghosts = &self.ghosts;
        let nbr = &self.nbr;
        let deg = self.degree;
        let alpha = self.alpha;
        let n = self.sites;
        self.execution.fill(next, |i| {
            let mut buf = [0.0f64; MAX_EDGES];
            for (j, slot) in buf[..deg].iter_mut().enumerate() {
                let k = nbr[i * deg + j] as usize;
                *slot = if k < n { current[k] } else { ghosts[k - n] };
            }
            alpha.apply(&mut buf[..deg])
        });
    }
}

#[derive(Clone, Debug)]
pub struct Snapshot {
    pub step: usize,
    pub time: f64,
    pub field: Field,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub eps: f64,
    pub snapshots: Vec<Snapshot>,
}

impl Trajectory {
    pub fn last(&self) -> &Field {
        &self.snapshots.last().expect("at least the initial snapshot").field
    }

    /// Nearest-snapshot, nearest-site value at macroscopic `(x, t)`.
    pub fn rescaled_sample(&self, cfg: &SchemeConfig, x: &Vector, t: f64) -> Result<f64> {
        let n = (t / (self.eps * self.eps)).round();
        let snap = self
            .snapshots
            .iter()
            .min_by(|a, b| {
                (a.step as f64 - n)
                    .abs()
                    .total_cmp(&(b.step as f64 - n).abs())
            })
            .ok_or(Error::Empty("trajectory"))?;
        let horizon = self.snapshots.last().map_or(0.0, |s| s.time);
        if t < 0.0 || t > horizon + self.eps * self.eps {
            return Err(Error::InvalidParameter(format!(
                "time {t} outside the trajectory horizon {horizon}"
            )));
        }
        let lat = cfg.lattice()?;
        let real = lat.real_coords(&x.scaled(1.0 / self.eps));
        let mut k: Vec<i64> = real.iter().map(|r| r.round() as i64).collect();
        if cfg.boundary == Boundary::Periodic {
            for (a, &w) in cfg.window.iter().enumerate() {
                k[a] = k[a].rem_euclid(w as i64);
            }
        }
        let i = cfg
            .linear_index(&k)
            .ok_or_else(|| Error::InvalidParameter(format!("point {x} lies outside the window")))?;
        Ok(snap.field.values[i])
    }
}

/// Runs the scheme from a closed-form datum.
pub fn evolve(cfg: &SchemeConfig, datum: &InitialDatum) -> Result<Trajectory> {
    let u0 = Field::sample(cfg, datum);
    evolve_field(cfg, u0, Some(datum))
}

/// Runs the scheme from sampled initial values.
pub fn evolve_field(cfg: &SchemeConfig, u0: Field, datum: Option<&InitialDatum>) -> Result<Trajectory> {
    let stepper = Stepper::new(cfg, datum)?;
    if u0.values.len() != cfg.sites() {
        return Err(Error::DimensionMismatch {
            expected: cfg.sites(),
            found: u0.values.len(),
        });
    }
    let h2 = cfg.eps * cfg.eps;
    let mut snapshots = vec![Snapshot {
        step: 0,
        time: 0.0,
        field: u0.clone(),
    }];
    let mut cur = u0.values;
    let mut next = vec![0.0; cur.len()];
    for n in 1..=cfg.steps {
        stepper.step(&cur, &mut next);
        std::mem::swap(&mut cur, &mut next);
        if n % cfg.stride == 0 || n == cfg.steps {
            if let Some(bad) = cur.iter().position(|v| !v.is_finite()) {
                return Err(Error::NumericAbort(format!(
                    "non-finite value at site {bad} after step {n}"
                )));
            }
            snapshots.push(Snapshot {
                step: n,
                time: n as f64 * h2,
                field: Field {
                    shape: cfg.window.clone(),
                    values: cur.clone(),
                },
            });
        }
    }
    Ok(Trajectory {
        eps: cfg.eps,
        snapshots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SymMatrix;

    fn z2(alpha: f64, n: usize, steps: usize) -> SchemeConfig {
        SchemeConfig::new(
            LatticeEdges::named("z2").unwrap(),
            Alpha::new(alpha).unwrap(),
            vec![n, n],
            1.0 / n as f64,
            steps,
        )
    }

    #[test]
    fn linear_datum_is_stationary_for_median() {
        let mut cfg = z2(1.0, 8, 5);
        cfg.boundary = Boundary::Frozen;
        let d = InitialDatum::Linear {
            p: Vector::from([0.5, -2.0]),
            offset: 0.25,
        };
        let tr = evolve(&cfg, &d).unwrap();
        assert_eq!(tr.snapshots[0].field, *tr.last());
    }

    #[test]
    fn constant_is_stationary() {
        for a in [1.0, 1.5, 2.0, 3.0, f64::INFINITY] {
            let tr = evolve(&z2(a, 6, 4), &InitialDatum::Constant(1.25)).unwrap();
            assert!(tr.last().values.iter().all(|&v| v == 1.25));
        }
    }

    #[test]
    fn quadratic_increment_at_origin() {
        // u0 = x1 + a x2² on ℤ² at unit spacing: increments {1, −1, a, a}
        let a = 0.125;
        let mut cfg = z2(1.0, 3, 1);
        cfg.eps = 1.0;
        cfg.boundary = Boundary::Frozen;
        let d = InitialDatum::Quadratic {
            center: Vector::from([1.0, 1.0]),
            p: Vector::from([1.0, 0.0]),
            x: SymMatrix::diag(&[0.0, 2.0 * a]),
        };
        let tr = evolve(&cfg, &d).unwrap();
        let c = cfg.linear_index(&[1, 1]).unwrap();
        assert_eq!(tr.last().values[c] - tr.snapshots[0].field.values[c], a);
    }

    #[test]
    fn zero_steps_is_identity() {
        let cfg = z2(1.5, 5, 0);
        let d = InitialDatum::Sine {
            amplitude: 1.0,
            wavenumber: 1.0,
        };
        let tr = evolve(&cfg, &d).unwrap();
        assert_eq!(tr.snapshots.len(), 1);
        let x = Vector::from([0.2, 0.4]);
        assert_eq!(tr.rescaled_sample(&cfg, &x, 0.0).unwrap(), d.eval(&[0.2, 0.4]));
    }

    #[test]
    fn frozen_needs_datum() {
        let mut cfg = z2(1.0, 4, 1);
        cfg.boundary = Boundary::Frozen;
        assert!(Stepper::new(&cfg, None).is_err());
        cfg.window = vec![2, 4];
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn horizon_enforced() {
        let mut cfg = z2(1.0, 4, 100);
        cfg.horizon = Some(1.0);
        assert!(cfg.validate().is_err());
    }
}
