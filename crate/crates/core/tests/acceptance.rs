//! The twelve acceptance criteria, run in order inside one test so that the
//! timed ones do not compete with each other for cores.

use std::io::Write;
use std::path::Path;
use std::time::{Duration, Instant};

use finsler_lab::bench::{
    calibration_suite, convergence_test, distance_report, eigen_estimate, ordering_suite, twod_analysis, twod_report,
    BenchReport, CalibrationSuite, ConeSuite, ConvergenceConfig, DistanceConfig, DistanceField, Domain2Poly,
    OrderingSuite,
};
use finsler_lab::exec::Execution;
use finsler_lab::finsler::builtin;
use finsler_lab::lattice::Alpha;
use finsler_lab::operators::{compatibility_check, f_alpha_pair, f_median_pair, inf_laplacian_pair, EdgeSet};
use finsler_lab::sampling::{dyadic_vector, gaussian_vector, rng, small_integer_vector, unit_vector, SampleRng};
use finsler_lab::shielding::{approx_norm_error, approx_shielding_residual, shielding_sweep, ApproxNorm, MollifiedGauge, ShieldTolerances};
use finsler_lab::{Result, Subspace, Vector};
use sha2::{Digest, Sha256};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome {
        passed,
        detail: detail.into(),
    })
}

fn c1_duality() -> Result<Outcome> {
    let mut worst = 0.0f64;
    for name in ["l1", "linf", "rhombic-dodecahedron", "euclidean-polytope-8"] {
        let phi = builtin(name)?;
        let bidual = phi.dual()?;
        let mut r = rng(1);
        for _ in 0..1000 {
            let q = unit_vector(&mut r, phi.dim());
            let a = phi.eval(&q)?;
            worst = worst.max((bidual.dual_eval(&q)? - a).abs() / a);
        }
    }
    outcome(worst <= 1e-9, format!("max |(φ*)*(q) − φ(q)|/φ(q) = {worst:e} (tol 1e-9)"))
}

fn c2_appendix_oracle() -> Result<Outcome> {
    let mut mismatches = 0;
    let mut tested = 0;
    for d in [2, 3] {
        let phi = builtin(&format!("l1:{d}"))?;
        let mut r = rng(2);
        for k in 0..1000 {
            // small integers tie often; dyadic entries rarely do
            let p = if k % 2 == 0 {
                small_integer_vector(&mut r, d, 3)
            } else {
                dyadic_vector(&mut r, d, 64, 4)
            };
            if p.iter().all(|&x| x == 0.0) {
                continue;
            }
            tested += 1;
            let top = p.norm_inf();
            let free: Vec<Vector> = (0..d).filter(|&i| p[i].abs() < top).map(|i| Vector::unit(d, i)).collect();
            let ties = d - free.len();
            let t = phi.tangent_space(&p)?;
            let oracle = Subspace::span(d, &free);
            let same = t.dim() == oracle.dim()
                && free.iter().all(|e| t.project(e).dist(e) <= 1e-12)
                && t.basis().iter().all(|b| oracle.project(b).dist(b) <= 1e-12);
            let dim_ok = phi.support_space(&p)?.dim() == d - ties + 1;
            if !(same && dim_ok) {
                mismatches += 1;
            }
        }
    }
    outcome(mismatches == 0, format!("{mismatches} mismatches over {tested} rational p"))
}

/// Even draws are small integer vectors, which land on ties (the
/// discontinuity sets) often; odd draws are Gaussian.
fn sample_gradient(r: &mut SampleRng, d: usize, k: usize) -> Vector {
    if k % 2 == 0 {
        small_integer_vector(r, d, 2)
    } else {
        gaussian_vector(r, d)
    }
}

fn c3_inf_laplacian_compat() -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for name in ["l1", "l1:3", "linf", "linf:3", "rhombic-dodecahedron", "euclidean-polytope-8"] {
        let phi = builtin(name)?;
        let pair = inf_laplacian_pair(&phi)?;
        let mut r = rng(3);
        for k in 0..100 {
            let p = sample_gradient(&mut r, phi.dim(), k);
            let rep = compatibility_check(&pair, &phi, &p, 20, 1e-8, &mut r)?;
            worst = worst.max(rep.max_violation);
            if !rep.passed() {
                failures.push(name);
            }
        }
    }
    outcome(failures.is_empty(), format!("max violation {worst:e} (tol 1e-8), failing norms {failures:?}"))
}

fn c4_lattice_compat() -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut negative = 0.0f64;
    for d in [2, 3] {
        let edges = EdgeSet::standard(d);
        let derived = edges.derived_norm()?;
        let l1 = builtin(&format!("l1:{d}"))?;
        for pair in [f_median_pair(&edges), f_alpha_pair(&edges, 1.5)?] {
            let mut r = rng(4);
            for k in 0..100 {
                let p = sample_gradient(&mut r, d, k);
                worst = worst.max(compatibility_check(&pair, &derived, &p, 20, 1e-8, &mut r)?.max_violation);
                negative = negative.max(compatibility_check(&pair, &l1, &p, 20, 1e-8, &mut r)?.max_violation);
            }
        }
    }
    outcome(
        worst <= 1e-8 && negative > 0.1,
        format!("max violation {worst:e} (tol 1e-8); against l1 {negative:.3} (needs > 0.1)"),
    )
}

fn c5_shielding() -> Result<Outcome> {
    let start = Instant::now();
    let g = MollifiedGauge::new(&builtin("l1")?, 0.05)?;
    let s = shielding_sweep(&g, 0.5, 200, 5, &ShieldTolerances::default(), Execution::Parallel)?;
    let t = start.elapsed();
    outcome(
        s.passed() && t < Duration::from_secs(60),
        format!(
            "dual {:e}, membership {:e}, kernel {:e}, fd {:e}, {} failures, {:.1}s",
            s.max_dual,
            s.max_membership,
            s.max_kernel,
            s.max_fd,
            s.failures,
            t.as_secs_f64()
        ),
    )
}

fn c6_approx_norm() -> Result<Outcome> {
    let g = MollifiedGauge::new(&builtin("l1")?, 0.05)?;
    let psi = ApproxNorm::new(g, 1.0)?;
    let err = approx_norm_error(&psi, 200, 6)?;
    let res = approx_shielding_residual(&psi, 100, 6)?;
    outcome(
        err <= 0.05 && res <= 1e-5,
        format!("eps 0.05 level 1: error {err:.4} (tol 0.05), support residual {res:e} (tol 1e-5)"),
    )
}

fn c7_ordering() -> Result<Outcome> {
    let r = ordering_suite(&OrderingSuite::default())?;
    let t = r.runtime;
    let violations: f64 = r.checks.iter().filter(|c| c.name.starts_with("violations")).map(|c| c.value).sum();
    outcome(
        r.passed() && t < Duration::from_secs(120),
        format!("{violations} violations, {} failed checks, {:.1}s", r.failures(), t.as_secs_f64()),
    )
}

fn c8_convergence() -> Result<Outcome> {
    let start = Instant::now();
    let mut ratios = Vec::new();
    let mut ok = true;
    for alpha in [Alpha::Median, Alpha::Midrange] {
        let r = convergence_test(&ConvergenceConfig::sine(alpha))?;
        ok &= r.passed() && !r.checks.is_empty();
        ratios.extend(r.checks.iter().map(|c| c.value));
    }
    let t = start.elapsed();
    outcome(
        ok && t < Duration::from_secs(300),
        format!("ratios {ratios:.3?} (tol 0.8), {:.1}s", t.as_secs_f64()),
    )
}

fn c9_calibration() -> Result<Outcome> {
    let r = calibration_suite(&CalibrationSuite::default())?;
    let detail: Vec<String> = r.checks.iter().map(|c| format!("{} {:.2e}", c.name, c.value)).collect();
    outcome(r.passed(), detail.join(", "))
}

fn c10_distance() -> Result<Outcome> {
    let h = 0.01;
    let sq = Domain2Poly::square(1.0)?;
    let l1 = builtin("l1")?;
    let lip = l1.lipschitz();
    let field = DistanceField::new(&sq, &l1, h)?;
    let oracle = sq
        .interior_grid(h)?
        .into_iter()
        .map(|x| (field.sampled(x) - (1.0 - x[0].abs()).min(1.0 - x[1].abs())).abs())
        .fold(0.0, f64::max);
    let rep = distance_report(&DistanceConfig::new(sq.clone(), l1.clone(), h))?;
    let eik = rep.checks.iter().find(|c| c.name == "eikonal_residual").expect("eikonal check");
    let lam = eigen_estimate(&sq, &l1, h, Execution::Parallel)?;
    outcome(
        oracle <= lip * h && rep.passed() && (lam - 1.0).abs() <= 2.0 * h,
        format!(
            "closed-form error {oracle:e} (tol {:e}), eikonal {:e} (tol {:e}), Λ = {lam}",
            lip * h,
            eik.value,
            5.0 * h
        ),
    )
}

fn c11_twod() -> Result<Outcome> {
    let a = twod_analysis(&builtin("l1")?)?;
    let deltas = [0.0, 0.5, 1.0, 1.5, 1.99, 2.0, 3.0];
    let r = twod_report("l1", &a, &deltas);
    let counts: Vec<usize> = deltas.iter().map(|&d| a.count_above(d)).collect();
    outcome(
        r.passed() && (a.total - 8.0).abs() <= 1e-9 && (a.perimeter - 8.0).abs() <= 1e-9,
        format!("Σ diam {} perimeter {} N(δ) {counts:?}", a.total, a.perimeter),
    )
}

fn checksums(reports: &[BenchReport], dir: &Path) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for r in reports {
        for path in r.write_csv(dir)? {
            let bytes = std::fs::read(&path)?;
            let digest: String = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
            out.push((path.file_name().unwrap().to_string_lossy().into_owned(), digest));
        }
    }
    Ok(out)
}

fn suites(exec: Execution) -> Result<Vec<BenchReport>> {
    let ordering = OrderingSuite {
        window: vec![16, 16],
        pairs: 8,
        steps: 60,
        seed: 12,
        execution: exec,
        ..OrderingSuite::default()
    };
    let mut calib = CalibrationSuite::default();
    calib.seed = 12;
    Ok(vec![
        ordering_suite(&ordering)?,
        calibration_suite(&calib)?,
        finsler_lab::bench::cone_suite(&ConeSuite::new(builtin("l1")?)?)?,
        twod_report("l1", &twod_analysis(&builtin("l1")?)?, &[0.0, 1.0, 2.0]),
    ])
}

fn c12_reproducibility() -> Result<Outcome> {
    let (a, b) = (tempfile::tempdir()?, tempfile::tempdir()?);
    let first = checksums(&suites(Execution::Parallel)?, a.path())?;
    let second = checksums(&suites(Execution::Sequential)?, b.path())?;
    outcome(
        !first.is_empty() && first == second,
        format!("{} files, identical checksums across reruns: {}", first.len(), first == second),
    )
}

#[test]
fn acceptance_criteria() {
    type Criterion = (u8, &'static str, fn() -> Result<Outcome>);
    let only: Option<u8> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|s| s.parse().ok());
    let criteria: [Criterion; 12] = [
        (1, "duality involution", c1_duality),
        (2, "l1 tangent-space oracle", c2_appendix_oracle),
        (3, "infinity-Laplacian compatibility", c3_inf_laplacian_compat),
        (4, "lattice operator compatibility", c4_lattice_compat),
        (5, "mollified shielding", c5_shielding),
        (6, "shielding approximation", c6_approx_norm),
        (7, "discrete comparison", c7_ordering),
        (8, "scheme convergence", c8_convergence),
        (9, "calibration", c9_calibration),
        (10, "distance and eikonal", c10_distance),
        (11, "planar analysis", c11_twod),
        (12, "reproducibility", c12_reproducibility),
    ];
    let mut failed = Vec::new();
    for (k, name, run) in criteria {
        if only.is_some_and(|o| o != k) {
            continue;
        }
        let start = Instant::now();
        let (passed, detail) = match run() {
            Ok(o) => (o.passed, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        // straight to the stream, past the harness capture
        let _ = writeln!(
            std::io::stderr(),
            "{} criterion {k:>2} {name}: {detail} [{:.1}s]",
            if passed { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
        if !passed {
            failed.push(k);
        }
    }
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
