use std::collections::BTreeSet;
use std::path::Path;
use std::process::{Command, Output};

use finsler_lab::finsler::canonical_generators;
use finsler_lab::lattice::InitialDatum;
use finsler_lab::Vector;

fn finslab(root: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_finslab"))
        .args(args)
        .env("FINSLAB_OUT_ROOT", root)
        .output()
        .expect("spawn finslab")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn manifest(dir: &Path) -> toml::Table {
    toml::from_str(&std::fs::read_to_string(dir.join("manifest.toml")).unwrap()).unwrap()
}

fn manifest_files(dir: &Path) -> Vec<(String, String)> {
    manifest(dir)["files"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| (f["path"].as_str().unwrap().to_string(), f["sha256"].as_str().unwrap().to_string()))
        .collect()
}

#[test]
fn l1_norm_lists_four_dual_vertices() {
    let t = tempfile::tempdir().unwrap();
    let o = finslab(t.path(), &["norms", "--set", "norm=l1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (header, vs) = rows(&t.path().join("norms/dual_vertices.csv"));
    assert_eq!(header, ["p1", "p2"]);
    assert_eq!(vs.len(), 4);
}

#[test]
fn norm_file_is_reduced_to_canonical_generators() {
    let t = tempfile::tempdir().unwrap();
    let file = t.path().join("redundant.toml");
    let pts = [[1.0, 1.0], [-1.0, 1.0], [1.0, -1.0], [-1.0, -1.0], [0.5, 0.0], [0.0, -0.25], [1.0, 1.0]];
    let gens: Vec<String> = pts.iter().map(|p| format!("[{:?}, {:?}]", p[0], p[1])).collect();
    std::fs::write(&file, format!("dim = 2\ngenerators = [{}]\n", gens.join(", "))).unwrap();
    let o = finslab(t.path(), &["norms", "--set", &format!("norm={}", file.display())]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (_, got) = rows(&t.path().join("norms/dual_vertices.csv"));
    let want = canonical_generators(&pts.map(Vector::from)).unwrap();
    let got: Vec<Vec<f64>> = got.iter().map(|r| r.iter().map(|x| x.parse().unwrap()).collect()).collect();
    let want: Vec<Vec<f64>> = want.iter().map(|v| v.as_slice().to_vec()).collect();
    assert_eq!(got, want);
}

#[test]
fn bad_inputs_exit_with_config_code() {
    let t = tempfile::tempdir().unwrap();
    let missing = t.path().join("missing.toml");
    let broken = t.path().join("broken.toml");
    std::fs::write(&broken, "norm = [unterminated\n").unwrap();
    let cases: Vec<Vec<String>> = vec![
        vec!["norms".into(), "--set".into(), format!("norm={}", missing.display())],
        vec!["norms".into(), "--config".into(), missing.display().to_string()],
        vec!["norms".into(), "--config".into(), broken.display().to_string()],
        vec!["norms".into(), "--set".into(), "nrom=l1".into()],
        vec!["simulate".into(), "--set".into(), "datum=spiral".into()],
        vec!["shield".into(), "--set".into(), "eps=-1".into()],
        vec!["bench".into(), "nonsense".into()],
    ];
    for args in cases {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let o = finslab(t.path(), &args);
        assert_eq!(code(&o), 2, "{args:?}");
        assert!(!o.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn zero_steps_reproduce_the_initial_datum() {
    let t = tempfile::tempdir().unwrap();
    let o = finslab(
        t.path(),
        &["simulate", "--set", "window=12x10", "--set", "steps=0", "--set", "wavenumber=2", "--set", "amplitude=0.7"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let dir = t.path().join("simulate");
    let (header, sites) = rows(&dir.join("snapshot_000000.csv"));
    assert_eq!(header, ["site", "k1", "k2", "x1", "x2", "value"]);
    assert_eq!(sites.len(), 120);
    let u0 = InitialDatum::Sine {
        amplitude: 0.7,
        wavenumber: 2.0,
    };
    for r in &sites {
        let x: Vec<f64> = r[3..5].iter().map(|s| s.parse().unwrap()).collect();
        assert_eq!(r[5].parse::<f64>().unwrap(), u0.eval(&x));
    }
    let files: BTreeSet<String> = manifest_files(&dir).into_iter().map(|f| f.0).collect();
    assert_eq!(files, BTreeSet::from(["snapshot_000000.csv".to_string(), "snapshots.csv".to_string()]));
}

#[test]
fn small_ordering_suite_passes() {
    let t = tempfile::tempdir().unwrap();
    let o = finslab(
        t.path(),
        &["bench", "ordering", "--set", "pairs=5", "--set", "steps=100", "--set", "window=[24, 24]"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let summary = std::fs::read_to_string(t.path().join("bench-ordering/summary.txt")).unwrap();
    assert!(summary.contains("all checks passed"));
    assert!(!summary.contains("FAIL"));
}

#[test]
fn oversized_shielding_radius_fails_with_rows() {
    let t = tempfile::tempdir().unwrap();
    let o = finslab(t.path(), &["shield", "--set", "eps=0.4", "--set", "samples=40"]);
    assert_eq!(code(&o), 1);
    let (header, pts) = rows(&t.path().join("shield/shield_points.csv"));
    let passed = header.iter().position(|h| h == "passed").unwrap();
    assert!(pts.iter().any(|r| r[passed] == "false"));
    let (_, est) = rows(&t.path().join("shield/shield_eps_c.csv"));
    assert!(est[0][1].parse::<f64>().unwrap() < 0.4);
}

#[test]
fn default_shielding_run_passes() {
    let t = tempfile::tempdir().unwrap();
    let o = finslab(t.path(), &["shield", "--set", "samples=40"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
}

#[test]
fn reruns_have_identical_checksums() {
    let t = tempfile::tempdir().unwrap();
    let run = |out: &str| {
        let dir = t.path().join(out);
        for args in [
            vec!["shield", "--set", "samples=30", "--seed", "7"],
            vec!["bench", "calibrate", "--set", "trials=5", "--seed", "7"],
            vec!["norms", "--set", "norm=rhombic-dodecahedron", "--seed", "7"],
        ] {
            let sub = dir.join(args[0]);
            let mut full = args.clone();
            let sub_s = sub.display().to_string();
            full.extend(["--out", &sub_s]);
            assert!(code(&finslab(t.path(), &full)) <= 1);
        }
        ["shield", "bench", "norms"].map(|s| manifest_files(&dir.join(s)))
    };
    let (a, b) = (run("a"), run("b"));
    assert_eq!(a, b);
    assert!(a.iter().all(|files| !files.is_empty()));
}

#[test]
fn manifest_lists_every_output_once_with_matching_checksums() {
    use sha2::{Digest, Sha256};
    let t = tempfile::tempdir().unwrap();
    let dir = t.path().join("cones");
    let d = dir.display().to_string();
    assert_eq!(code(&finslab(t.path(), &["bench", "cones", "--set", "h=0.05", "--out", &d])), 0);
    // a second run into the same directory replaces the first
    assert_eq!(code(&finslab(t.path(), &["bench", "twod", "--out", &d])), 0);
    let files = manifest_files(&dir);
    let listed: BTreeSet<String> = files.iter().map(|f| f.0.clone()).collect();
    assert_eq!(listed.len(), files.len());
    let on_disk: BTreeSet<String> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n != "manifest.toml")
        .collect();
    assert_eq!(listed, on_disk);
    for (name, sum) in &files {
        let bytes = std::fs::read(dir.join(name)).unwrap();
        let got: String = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
        assert_eq!(&got, sum, "{name}");
    }
    let m = manifest(&dir);
    assert_eq!(m["command"].as_str(), Some("bench twod"));
    assert_eq!(m["config"]["norm"].as_str(), Some("l1"));
    assert!(m["timings"]["total"].as_float().is_some());
}

#[test]
fn config_file_tables_apply_per_command() {
    let t = tempfile::tempdir().unwrap();
    let cfg = t.path().join("run.toml");
    std::fs::write(&cfg, "seed = 4\n[norms]\nnorm = \"linf\"\nsamples = 16\n[simulate]\nwindow = [4, 4]\nsteps = 0\n").unwrap();
    let c = cfg.display().to_string();
    assert_eq!(code(&finslab(t.path(), &["norms", "--config", &c])), 0);
    let (_, g) = rows(&t.path().join("norms/gauge.csv"));
    assert_eq!(g.len(), 16);
    assert_eq!(manifest(&t.path().join("norms"))["seed"].as_integer(), Some(4));
    assert_eq!(code(&finslab(t.path(), &["simulate", "--config", &c, "--seed", "9"])), 0);
    let (_, s) = rows(&t.path().join("simulate/snapshot_000000.csv"));
    assert_eq!(s.len(), 16);
    assert_eq!(manifest(&t.path().join("simulate"))["seed"].as_integer(), Some(9));
}
