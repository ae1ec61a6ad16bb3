//! `norms`, `shield` and `simulate`.

use finsler_lab::bench::{BenchReport, Cell, Table};
use finsler_lab::finsler::resolve_norm;
use finsler_lab::lattice::{evolve, Alpha, Boundary, InitialDatum, SchemeConfig};
use finsler_lab::operators::LatticeEdges;
use finsler_lab::sampling::{substream, unit_vector};
use finsler_lab::shielding::{
    approx_norm_error, approx_shielding_residual, eps_c_estimate, shielding_sweep, ApproxNorm, MollifiedGauge,
    QuadratureSpec, ShieldTolerances,
};
use finsler_lab::{Error, PolyhedralNorm, Result, SymMatrix, Vector};

use crate::config::Params;
use crate::output::Run;

/// Active-set tolerance for the subdifferential histogram.
const TOL_ACTIVE: f64 = 1e-9;

fn coords(prefix: &str, d: usize) -> Vec<String> {
    (1..=d).map(|i| format!("{prefix}{i}")).collect()
}

fn header<'a>(cols: &'a [String], rest: &[&'a str]) -> Vec<&'a str> {
    cols.iter().map(String::as_str).chain(rest.iter().copied()).collect()
}

fn cells(v: &Vector) -> impl Iterator<Item = Cell> + '_ {
    v.iter().map(|&x| Cell::from(x))
}

pub const NORMS_KEYS: &[&str] = &["norm", "samples", "seed"];

/// Sphere points: equally spaced angles in the plane, seeded unit vectors
/// otherwise.
fn sphere(norm: &PolyhedralNorm, samples: usize, seed: u64) -> Vec<Vector> {
    let d = norm.dim();
    (0..samples)
        .map(|k| {
            let v = if d == 2 {
                let t = std::f64::consts::TAU * (k as f64 + 0.5) / samples as f64;
                Vector::from([t.cos(), t.sin()])
            } else {
                unit_vector(&mut substream(seed, k as u64), d)
            };
            let r = norm.eval_slice(v.as_slice());
            v.scaled(1.0 / r)
        })
        .collect()
}

pub fn norms(p: &Params, run: &mut Run) -> Result<bool> {
    p.restrict(NORMS_KEYS)?;
    let norm = resolve_norm(&p.string("norm", "l1")?)?;
    let samples = p.usize("samples", 256)?;
    let seed = p.u64("seed", 0)?;
    let d = norm.dim();
    let pc = coords("p", d);
    let qc = coords("q", d);

    let mut dual = Table::new("dual_vertices", &header(&pc, &[]));
    for g in norm.generators() {
        dual.push(cells(g).collect());
    }
    run.table("dual_vertices.csv", &dual)?;

    let primal = norm.primal_vertices()?.to_vec();
    let mut pt = Table::new("primal_vertices", &header(&qc, &[]));
    for v in &primal {
        pt.push(cells(v).collect());
    }
    run.table("primal_vertices.csv", &pt)?;

    let points = sphere(&norm, samples, seed);
    let mut gauge = Table::new("gauge", &header(&qc, &["phi", "phi_dual", "face_dim"]));
    let mut hist = vec![[0usize; 2]; d];
    for (src, list) in [(0, &points), (1, &primal)] {
        for q in list.iter() {
            let face = norm.subdifferential(q, TOL_ACTIVE)?;
            hist[face.dim().min(d - 1)][src] += 1;
            if src == 0 {
                let mut row: Vec<Cell> = cells(q).collect();
                row.extend([norm.eval(q)?.into(), norm.dual_eval(q)?.into(), face.dim().into()]);
                gauge.push(row);
            }
        }
    }
    run.table("gauge.csv", &gauge)?;
    let mut ht = Table::new("subdiff_histogram", &["face_dim", "sphere_samples", "primal_vertices"]);
    for (k, [a, b]) in hist.iter().enumerate() {
        ht.push(vec![k.into(), (*a).into(), (*b).into()]);
    }
    run.table("subdiff_histogram.csv", &ht)?;
    println!(
        "norm {}: dim {d}, {} dual vertices, {} primal vertices",
        norm.name(),
        norm.generators().len(),
        primal.len()
    );
    Ok(true)
}

pub const SHIELD_KEYS: &[&str] = &[
    "norm",
    "c",
    "eps",
    "level",
    "samples",
    "seed",
    "tol_dual",
    "tol_residual",
    "tol_fd",
    "tol_approx",
    "tol_approx_residual",
    "eps_c_samples",
    "slices",
    "directions",
];

pub fn shield(p: &Params, run: &mut Run) -> Result<bool> {
    p.restrict(SHIELD_KEYS)?;
    let norm = resolve_norm(&p.string("norm", "l1")?)?;
    let c = p.f64("c", 0.5)?;
    let eps = p.f64("eps", 0.05)?;
    let samples = p.usize("samples", 200)?;
    let seed = p.u64("seed", 0)?;
    let def = ShieldTolerances::default();
    let tol = ShieldTolerances {
        dual: p.f64("tol_dual", def.dual)?,
        residual: p.f64("tol_residual", def.residual)?,
        fd: p.f64("tol_fd", def.fd)?,
    };
    let qd = QuadratureSpec::default();
    let quad = QuadratureSpec {
        slices: p.usize("slices", qd.slices)?,
        directions: p.usize("directions", qd.directions)?,
    };
    let g = MollifiedGauge::with_quadrature(&norm, eps, quad)?;
    let sweep = shielding_sweep(&g, c, samples, seed, &tol, Default::default())?;

    let mut report = BenchReport::new(
        "shield",
        [
            ("norm", format!("{:?}", norm.generators())),
            ("c", format!("{c:?}")),
            ("eps", format!("{eps:?}")),
            ("samples", samples.to_string()),
            ("seed", seed.to_string()),
        ],
    );
    report.check_le("dual_unit", sweep.max_dual, tol.dual);
    report.check_le("failures", sweep.failures as f64, 0.0);
    let d = norm.dim();
    let qc = coords("q", d);
    let mut t = Table::new("points", &header(&qc, &["phi", "phi_dual_df", "membership", "kernel", "fd", "passed"]));
    for pt in &sweep.points {
        let mut row: Vec<Cell> = cells(&pt.q).collect();
        row.extend([
            pt.phi.into(),
            pt.dual_value.into(),
            pt.membership.into(),
            pt.kernel.into(),
            pt.fd.unwrap_or(f64::NAN).into(),
            pt.passed.into(),
        ]);
        t.push(row);
    }
    report.tables.push(t);

    let eps_c_samples = p.usize("eps_c_samples", 200)?;
    if eps_c_samples > 0 {
        let est = eps_c_estimate(&norm, c, eps_c_samples, seed)?;
        let mut t = Table::new("eps_c", &["c", "eps_c", "raw", "samples", "eps"]);
        t.push(vec![c.into(), est.eps_c.into(), est.raw.into(), est.samples.into(), eps.into()]);
        report.tables.push(t);
    }
    if let Some(level) = p.opt_f64("level")? {
        let psi = ApproxNorm::new(g.clone(), level)?;
        let err = approx_norm_error(&psi, 100, seed)?;
        let res = approx_shielding_residual(&psi, 100, seed)?;
        report.check_le("approx_error", err, p.f64("tol_approx", 0.05)?);
        report.check_le("approx_support_residual", res, p.f64("tol_approx_residual", 1e-5)?);
    }
    run.report(&report)?;
    let summary = format!(
        "shield: {}/{} points passed (c {c}, eps {eps}); max |phi*(Df)-1| {:e}, membership {:e}, kernel {:e}, fd {:e}",
        samples - sweep.failures,
        samples,
        sweep.max_dual,
        sweep.max_membership,
        sweep.max_kernel,
        sweep.max_fd
    );
    println!("{summary}");
    let mut lines = report.summary_lines();
    lines.push(summary);
    run.text("summary.txt", &lines)?;
    Ok(report.passed())
}

pub const DATUM_KEYS: &[&str] = &[
    "datum",
    "value",
    "p",
    "offset",
    "center",
    "hessian",
    "amplitude",
    "wavenumber",
    "radius",
    "height",
];

/// Initial datum from `datum` and its parameters.
pub fn datum(p: &Params, d: usize, default: &str) -> Result<InitialDatum> {
    let center = p.vector("center", Vector::zeros(d))?;
    let grad = p.vector("p", Vector::zeros(d))?;
    center.check_dim(d)?;
    grad.check_dim(d)?;
    Ok(match p.string("datum", default)?.as_str() {
        "constant" => InitialDatum::Constant(p.f64("value", 0.0)?),
        "linear" => InitialDatum::Linear {
            p: grad,
            offset: p.f64("offset", 0.0)?,
        },
        "quadratic" => InitialDatum::Quadratic {
            center,
            p: grad,
            x: p.sym_matrix("hessian", d)?.unwrap_or_else(|| SymMatrix::identity(d)),
        },
        "sine" => InitialDatum::Sine {
            amplitude: p.f64("amplitude", 1.0)?,
            wavenumber: p.f64("wavenumber", 1.0)?,
        },
        "bump" => InitialDatum::Bump {
            center,
            radius: p.f64("radius", 0.25)?,
            height: p.f64("height", 1.0)?,
        },
        other => return Err(Error::Parse(format!("unknown datum {other:?}"))),
    })
}

/// Edge set by name or file; `basis` replaces the lattice basis.
pub fn edges(p: &Params) -> Result<LatticeEdges> {
    let e = LatticeEdges::resolve(&p.string("edges", "z2")?)?;
    match p.rows("basis")? {
        Some(cols) => LatticeEdges::new(cols.into_iter().map(Vector::new).collect(), e.offsets),
        None => Ok(e),
    }
}

const SIMULATE_KEYS: &[&str] = &["edges", "basis", "alpha", "window", "eps", "steps", "boundary", "stride", "seed"];

pub fn simulate(p: &Params, run: &mut Run) -> Result<bool> {
    let allowed: Vec<&str> = SIMULATE_KEYS.iter().chain(DATUM_KEYS).copied().collect();
    p.restrict(&allowed)?;
    let edges = edges(p)?;
    let d = edges.basis.len();
    let alpha = p.alphas("alpha", &[Alpha::Median])?;
    let [alpha] = alpha[..] else {
        return Err(Error::Parse("alpha must be a single value".into()));
    };
    let window = p.usize_list("window", &vec![64; d])?;
    let eps = p.f64("eps", 1.0 / window[0] as f64)?;
    let steps = p.usize("steps", 100)?;
    let mut cfg = SchemeConfig::new(edges, alpha, window, eps, steps);
    cfg.boundary = p.string("boundary", "periodic")?.parse::<Boundary>()?;
    cfg.stride = p.usize("stride", steps.max(1))?;
    let u0 = datum(p, d, "sine")?;
    let traj = evolve(&cfg, &u0)?;

    let kc = coords("k", d);
    let xc = coords("x", d);
    let hdr: Vec<&str> = std::iter::once("site")
        .chain(kc.iter().map(String::as_str))
        .chain(xc.iter().map(String::as_str))
        .chain(["value"])
        .collect();
    let mut snaps = Table::new("snapshots", &["step", "time", "min", "max", "file"]);
    for s in &traj.snapshots {
        let file = format!("snapshot_{:06}.csv", s.step);
        let mut t = Table::new("snapshot", &hdr);
        for (i, &v) in s.field.values.iter().enumerate() {
            let k = cfg.site(i);
            let x = cfg.position(&k);
            let mut row: Vec<Cell> = vec![i.into()];
            row.extend(k.iter().map(|&c| Cell::Int(c)));
            row.extend(cells(&x));
            row.push(v.into());
            t.push(row);
        }
        run.table(&file, &t)?;
        let (lo, hi) = s.field.min_max();
        snaps.push(vec![s.step.into(), s.time.into(), lo.into(), hi.into(), file.as_str().into()]);
    }
    run.table("snapshots.csv", &snaps)?;
    println!(
        "simulate: {} sites, {steps} steps of eps {eps}, {} snapshots",
        cfg.sites(),
        traj.snapshots.len()
    );
    Ok(true)
}
