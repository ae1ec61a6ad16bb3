//! `bench` subcommands and `twod`.

use finsler_lab::bench::{
    calibration_suite, cone_suite, convergence_test, distance_report, eigen_report, ordering_suite, twod_analysis,
    twod_report, twod_smooth, BenchReport, CalibrationSuite, ConeSuite, ConvergenceConfig, DistanceConfig,
    Domain2Poly, OrderingSuite,
};
use finsler_lab::finsler::resolve_norm;
use finsler_lab::lattice::Alpha;
use finsler_lab::shielding::SmoothNorm;
use finsler_lab::Result;

use crate::commands::{datum, edges, DATUM_KEYS};
use crate::config::Params;
use crate::output::Run;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Ordering,
    Calibrate,
    Converge,
    Distance,
    Cones,
    Eigen,
    Twod,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Ordering => "ordering",
            Suite::Calibrate => "calibrate",
            Suite::Converge => "converge",
            Suite::Distance => "distance",
            Suite::Cones => "cones",
            Suite::Eigen => "eigen",
            Suite::Twod => "twod",
        }
    }
}

fn ordering(p: &Params) -> Result<Vec<BenchReport>> {
    p.restrict(&["edges", "basis", "alphas", "window", "pairs", "steps", "seed"])?;
    let def = OrderingSuite::default();
    let s = OrderingSuite {
        edges: edges(p)?,
        alphas: p.alphas("alphas", &def.alphas)?,
        window: p.usize_list("window", &def.window)?,
        pairs: p.usize("pairs", def.pairs)?,
        steps: p.usize("steps", def.steps)?,
        seed: p.u64("seed", def.seed)?,
        execution: def.execution,
    };
    Ok(vec![ordering_suite(&s)?])
}

fn calibrate(p: &Params) -> Result<Vec<BenchReport>> {
    p.restrict(&["edges", "basis", "alphas", "trials", "eps", "seed", "spread_tol", "stability_tol"])?;
    let def = CalibrationSuite::default();
    let s = CalibrationSuite {
        edges: edges(p)?,
        alphas: p.alphas("alphas", &def.alphas)?,
        trials: p.usize("trials", def.trials)?,
        eps: p.f64_list("eps", &def.eps)?,
        seed: p.u64("seed", def.seed)?,
        spread_tol: p.f64("spread_tol", def.spread_tol)?,
        stability_tol: p.f64("stability_tol", def.stability_tol)?,
    };
    Ok(vec![calibration_suite(&s)?])
}

/// One report per α.
fn converge(p: &Params) -> Result<Vec<BenchReport>> {
    let mut allowed = vec!["edges", "basis", "alphas", "t", "base", "levels", "max_ratio", "seed"];
    allowed.extend(DATUM_KEYS);
    p.restrict(&allowed)?;
    let alphas = p.alphas("alphas", &[Alpha::Median, Alpha::Power(2.0), Alpha::Midrange])?;
    let e = edges(p)?;
    let d = e.basis.len();
    let u0 = datum(p, d, "sine")?;
    let mut out = Vec::new();
    for a in alphas {
        let mut c = ConvergenceConfig::sine(a);
        c.edges = e.clone();
        c.datum = u0.clone();
        c.t_final = p.f64("t", c.t_final)?;
        c.base = p.usize("base", c.base)?;
        c.levels = p.usize("levels", c.levels)?;
        c.max_ratio = p.f64("max_ratio", c.max_ratio)?;
        let mut r = convergence_test(&c)?;
        r.name = format!("converge_alpha_{a}");
        out.push(r);
    }
    Ok(out)
}

fn distance_config(p: &Params, h: f64) -> Result<DistanceConfig> {
    let domain = Domain2Poly::parse(&p.string("domain", "square")?)?;
    let norm = resolve_norm(&p.string("norm", "l1")?)?;
    let mut c = DistanceConfig::new(domain, norm, p.f64("h", h)?);
    c.eikonal_c = p.f64("eikonal_c", c.eikonal_c)?;
    Ok(c)
}

fn distance(p: &Params) -> Result<Vec<BenchReport>> {
    p.restrict(&["domain", "norm", "h", "eikonal_c", "seed"])?;
    Ok(vec![distance_report(&distance_config(p, 0.01)?)?])
}

fn eigen(p: &Params) -> Result<Vec<BenchReport>> {
    p.restrict(&["domain", "norm", "h", "eikonal_c", "expected", "seed"])?;
    let c = distance_config(p, 0.01)?;
    Ok(vec![eigen_report(&c, p.opt_f64("expected")?)?])
}

fn cones(p: &Params) -> Result<Vec<BenchReport>> {
    p.restrict(&["domain", "norm", "h", "slopes", "seed"])?;
    let mut s = ConeSuite::new(resolve_norm(&p.string("norm", "l1")?)?)?;
    if p.has("domain") {
        s.domain = Domain2Poly::parse(&p.string("domain", "")?)?;
    }
    s.h = p.f64("h", s.h)?;
    s.slopes = p.f64_list("slopes", &s.slopes)?;
    Ok(vec![cone_suite(&s)?])
}

/// `smooth:<name>` selects a closed-form smooth norm.
pub fn twod(p: &Params) -> Result<Vec<BenchReport>> {
    p.restrict(&["norm", "deltas", "samples", "seed"])?;
    let name = p.string("norm", "l1")?;
    let a = match name.strip_prefix("smooth:") {
        Some(s) => twod_smooth(s.parse::<SmoothNorm>()?, p.usize("samples", 4096)?),
        None => twod_analysis(&resolve_norm(&name)?)?,
    };
    let deltas = p.f64_list("deltas", &finsler_lab::bench::twod::DEFAULT_DELTAS)?;
    Ok(vec![twod_report(&name, &a, &deltas)])
}

pub fn run_suite(suite: Suite, p: &Params, run: &mut Run) -> Result<bool> {
    let reports = match suite {
        Suite::Ordering => ordering(p)?,
        Suite::Calibrate => calibrate(p)?,
        Suite::Converge => converge(p)?,
        Suite::Distance => distance(p)?,
        Suite::Cones => cones(p)?,
        Suite::Eigen => eigen(p)?,
        Suite::Twod => twod(p)?,
    };
    write_reports(&reports, run)
}

/// CSVs and `summary.txt`; runtimes go to the manifest only.
pub fn write_reports(reports: &[BenchReport], run: &mut Run) -> Result<bool> {
    let mut lines = Vec::new();
    for r in reports {
        run.report(r)?;
        lines.push(format!("{} config_hash {}", r.name, r.config_hash()));
        lines.extend(r.summary_lines());
    }
    let passed = reports.iter().all(BenchReport::passed);
    let failed: usize = reports.iter().map(BenchReport::failures).sum();
    lines.push(if passed {
        "all checks passed".to_string()
    } else {
        format!("{failed} checks failed")
    });
    for l in &lines {
        println!("{l}");
    }
    run.text("summary.txt", &lines)?;
    Ok(passed)
}
