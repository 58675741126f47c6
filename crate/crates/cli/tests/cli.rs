use std::path::Path;
use std::process::{Command, Output};

use sparse_adapt::{AlgorithmSpec, Family, MseTrajectory, Penalty};
use sparse_adapt_cli::csv_table::{format_csv, read_mse_columns};
use sparse_adapt_cli::manifest::{manifest_path, RunManifest};
use sparse_adapt_cli::svg::{svg_string, SvgOptions};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_sparse-adapt"));
    cmd.env_remove("SPARSE_ADAPT_SEED");
    cmd
}

fn run_small(dir: &Path, extra: &[&str]) -> Output {
    bin()
        .args(["run", "--trials", "6", "--iters", "150", "--out-csv"])
        .arg(dir.join("out.csv"))
        .args(extra)
        .output()
        .unwrap()
}

fn traj(family: Family, penalty: Penalty, mse: Vec<f64>) -> MseTrajectory {
    let spec = AlgorithmSpec::new(family, penalty);
    MseTrajectory {
        algorithm_label: spec.label(),
        spec,
        per_iteration_mse_db: mse.iter().map(|v| 10.0 * v.log10()).collect(),
        per_iteration_mse: mse,
        trials: 1,
        diverged_trials: 0,
    }
}

#[test]
fn run_writes_csv_svg_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_small(tmp.path(), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(tmp.path().join("out.csv")).unwrap();
    assert_eq!(csv.lines().count(), 151);
    assert!(csv.starts_with("iteration,NLMS_mse,NLMS_mse_db,LP-NLMS_mse"));
    assert!(tmp.path().join("out.svg").exists());
    let manifest = RunManifest::load(&manifest_path(&tmp.path().join("out.csv"))).unwrap();
    assert_eq!(manifest.config.trials, Some(6));
    assert_eq!(manifest.output_files.len(), 3);
}

#[test]
fn manifest_rerun_is_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_small(tmp.path(), &["--t", "1", "--snr", "6", "--algos", "nlms,l0-nlmf,lp-lms"]);
    assert!(out.status.success());
    let again = tmp.path().join("again.csv");
    let out = bin()
        .args(["run", "--manifest"])
        .arg(tmp.path().join("out.manifest.toml"))
        .arg("--out-csv")
        .arg(&again)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(
        std::fs::read(tmp.path().join("out.csv")).unwrap(),
        std::fs::read(again).unwrap()
    );
}

#[test]
fn config_file_and_flag_precedence() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("exp.toml");
    std::fs::write(
        &cfg,
        "snr_db = 3.0\nt_dominant = 3\ntrials = 4\niterations = 80\n\
         [[algorithm]]\nfamily = \"nlms\"\npenalty = \"l0\"\nbeta = 4.0\n",
    )
    .unwrap();
    let csv = tmp.path().join("o.csv");
    let out = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .args(["--snr", "9", "--t", "1", "--out-csv"])
        .arg(&csv)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let m = RunManifest::load(&manifest_path(&csv)).unwrap();
    assert_eq!(m.config.snr_db, Some(9.0));
    assert_eq!(m.config.t_dominant, Some(1));
    assert_eq!(m.config.algorithm.len(), 1);
    assert_eq!(m.config.algorithm[0].beta, Some(4.0));
}

#[test]
fn validation_failures_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_small(tmp.path(), &["--mu-f", "2.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("mu_f"));

    let cfg = tmp.path().join("bad.toml");
    std::fs::write(&cfg, "snr = 3.0\n").unwrap();
    let out = bin().args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = run_small(tmp.path(), &["--algos", "rls"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn all_diverged_exit_3() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_small(tmp.path(), &["--snr", "30", "--nt", "4", "--algos", "lmf,nlmf", "--mu-f", "1.9"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stdout));
    let cols = read_mse_columns(&std::fs::read_to_string(tmp.path().join("out.csv")).unwrap()).unwrap();
    assert_eq!(cols.len(), 1);
    assert_eq!(cols[0].0, "NLMF");
}

#[test]
fn seed_env_fallback() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |seed_env: &str, name: &str| {
        let csv = tmp.path().join(name);
        let out = bin()
            .env("SPARSE_ADAPT_SEED", seed_env)
            .args(["run", "--trials", "2", "--iters", "30", "--algos", "nlms", "--out-csv"])
            .arg(&csv)
            .output()
            .unwrap();
        assert!(out.status.success());
        (std::fs::read(&csv).unwrap(), RunManifest::load(&manifest_path(&csv)).unwrap())
    };
    let (a, ma) = run("11", "a.csv");
    let (b, _) = run("11", "b.csv");
    let (c, _) = run("12", "c.csv");
    assert_eq!(ma.config.seed, Some(11));
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn validate_command_passes() {
    let out = bin().arg("validate").output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(!text.contains("[FAIL]"));
    assert_eq!(text.matches("[PASS]").count(), 7);
}

#[test]
fn csv_round_trip_keeps_twelve_digits() {
    let mse: Vec<f64> = (1..=50).map(|k| 2.0 * (-0.07 * k as f64).exp() + 1e-3 / k as f64).collect();
    let t = traj(Family::Nlmf, Penalty::L0, mse.clone());
    let cols = read_mse_columns(&format_csv(&[t]).unwrap()).unwrap();
    assert_eq!(cols[0].0, "L0-NLMF");
    for (got, want) in cols[0].1.iter().zip(&mse) {
        assert!(((got - want) / want).abs() <= 5e-12, "{got} vs {want}");
    }
}

fn svg_checked(trajectories: &[MseTrajectory], db: bool) -> (String, usize, Vec<String>) {
    let text = svg_string(
        trajectories,
        &SvgOptions {
            db_scale: db,
            title: "MSE <test> & co".into(),
        },
    )
    .unwrap();
    let doc = roxmltree::Document::parse(&text).expect("well-formed XML");
    assert_eq!(doc.root_element().tag_name().name(), "svg");
    let polylines: Vec<_> = doc
        .descendants()
        .filter(|n| n.has_tag_name("polyline"))
        .collect();
    let legend: Vec<String> = doc
        .descendants()
        .find(|n| n.attribute("class") == Some("legend"))
        .unwrap()
        .descendants()
        .filter(|n| n.has_tag_name("text"))
        .map(|n| n.text().unwrap_or_default().to_string())
        .collect();
    let first = polylines[0].attribute("points").unwrap().to_string();
    (first, polylines.len(), legend)
}

#[test]
fn svg_constant_curve_is_horizontal() {
    let t = traj(Family::Nlms, Penalty::None, vec![1.0; 20]);
    let (points, count, legend) = svg_checked(&[t], true);
    assert_eq!(count, 1);
    assert_eq!(legend, vec!["NLMS".to_string()]);
    let ys: Vec<&str> = points
        .split(' ')
        .map(|p| p.split(',').nth(1).unwrap())
        .collect();
    assert!(ys.iter().all(|y| *y == ys[0]));
}

#[test]
fn svg_two_curves_two_legend_entries() {
    let a = traj(Family::Nlms, Penalty::None, vec![1.0, 0.5, 0.3]);
    let b = traj(Family::Nlms, Penalty::L0, vec![1.0, 0.4, 0.1]);
    let (_, count, legend) = svg_checked(&[a, b], false);
    assert_eq!(count, 2);
    assert_eq!(legend, vec!["NLMS".to_string(), "L0-NLMS".to_string()]);
}

#[test]
fn default_protocol_svg_sparse_curves_end_lower() {
    let tmp = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["run", "--t", "1", "--trials", "60", "--iters", "1500", "--out-csv"])
        .arg(tmp.path().join("f4.csv"))
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = std::fs::read_to_string(tmp.path().join("f4.svg")).unwrap();
    let doc = roxmltree::Document::parse(&text).unwrap();
    // SVG y grows downward: lower MSE means larger y at the last point
    let last_y = |label: &str| -> f64 {
        let node = doc
            .descendants()
            .find(|n| n.attribute("data-label") == Some(label))
            .unwrap();
        let pts = node.attribute("points").unwrap();
        pts.rsplit(' ').next().unwrap().split(',').nth(1).unwrap().parse().unwrap()
    };
    assert!(last_y("L0-NLMS") > last_y("NLMS"));
    assert!(last_y("LP-NLMS") > last_y("NLMS"));
    assert!(last_y("L0-NLMF") > last_y("NLMF"));
    assert!(last_y("LP-NLMF") > last_y("NLMF"));
}
