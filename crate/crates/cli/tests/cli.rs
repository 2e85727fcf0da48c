use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const FAST: &[&str] = &["--len", "700", "--epochs", "3", "--hidden", "32", "--window", "8"];

fn rnndcor(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rnndcor"))
        .args(args)
        .env("RNNDCOR_OUT", out)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], out: &Path) -> Output {
    let o = rnndcor(args, out);
    assert!(
        o.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    o
}

fn with_fast<'a>(cmd: &'a str, extra: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec![cmd];
    v.extend_from_slice(FAST);
    v.extend_from_slice(extra);
    v
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| rnndcor(args, dir.path()).status.code();
    assert_eq!(code(&["generate", "--len", "200"]), Some(0));
    // non-stationary AR(1)
    assert_eq!(code(&["generate", "--coeffs", "1.0"]), Some(2));
    assert_eq!(code(&["run", "--rnn.hidden", "many"]), Some(2));
    assert_eq!(code(&["run", "--no.such.key", "1"]), Some(2));
    assert_eq!(code(&["run", "--config", "/definitely/missing.json"]), Some(2));
    // named flags still count after the first override
    assert_eq!(code(&["run", "--len", "500", "--config=/definitely/missing.json"]), Some(2));
    let diverge = with_fast("run", &["--lr", "1e12", "--rnn.optimizer.kind", "sgd"]);
    assert_eq!(code(&diverge), Some(1));
}

#[test]
fn generate_sidecar_and_determinism() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["generate", "--process", "ar", "--order", "6", "--len", "400", "--seed", "3"];
    ok(&args, a.path());
    ok(&args, b.path());
    let csv_a = fs::read(a.path().join("series.csv")).unwrap();
    assert_eq!(csv_a, fs::read(b.path().join("series.csv")).unwrap());
    assert_eq!(String::from_utf8(csv_a).unwrap().lines().count(), 401);

    let side: serde_json::Value =
        serde_json::from_slice(&fs::read(a.path().join("series.json")).unwrap()).unwrap();
    assert_eq!(side["label"], "AR(6)");
    assert_eq!(side["seed"], 3);
    let coeffs = side["origin"]["origin"]["coeffs"].as_array().unwrap();
    assert_eq!(coeffs.len(), 6);
    assert_eq!(coeffs[5].as_f64(), Some(0.8));
    assert!(coeffs[..5].iter().all(|c| c.as_f64() == Some(0.0)));
}

#[test]
fn output_dir_from_env_and_flag() {
    let env_dir = tempfile::tempdir().unwrap();
    let flag_dir = tempfile::tempdir().unwrap();
    ok(&["generate", "--len", "100"], env_dir.path());
    assert!(env_dir.path().join("series.csv").exists());
    let flag = flag_dir.path().to_str().unwrap();
    ok(&["generate", "--len", "100", "--out", flag], env_dir.path());
    assert!(flag_dir.path().join("series.json").exists());
}

fn data_values(svg: &str, class: &str) -> Vec<String> {
    let doc = roxmltree::Document::parse(svg).unwrap();
    doc.descendants()
        .filter(|n| n.attribute("class") == Some(class))
        .filter_map(|n| n.attribute("data-value").map(str::to_string))
        .collect()
}

#[test]
fn run_writes_consistent_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    ok(&with_fast("run", &["--process.coeff", "0.9"]), dir.path());
    for f in ["summary.json", "profile.csv", "profile.svg", "forecast.csv", "forecast.svg", "model.json", "timing.json"] {
        assert!(dir.path().join(f).exists(), "missing {f}");
    }

    let csv = fs::read_to_string(dir.path().join("profile.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("layer,dcor,acf_lag,acf"));
    let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    assert_eq!(rows.len(), 8);
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r[0], (i + 1).to_string());
        assert_eq!(r[2], (8 - i).to_string());
    }

    let svg = fs::read_to_string(dir.path().join("profile.svg")).unwrap();
    let bars = data_values(&svg, "bar");
    // dcor bars first, then acf bars
    assert_eq!(bars.len(), 16);
    let dcor: Vec<String> = rows.iter().map(|r| r[1].clone()).collect();
    let acf: Vec<String> = rows.iter().map(|r| r[3].clone()).collect();
    assert_eq!(bars[..8], dcor[..]);
    assert_eq!(bars[8..], acf[..]);

    let summary: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("summary.json")).unwrap()).unwrap();
    let max_r = summary["summary"]["max_r"].as_f64().unwrap();
    let best = dcor.iter().map(|v| v.parse::<f64>().unwrap()).fold(0.0, f64::max);
    assert!((max_r - best).abs() < 1e-6);
}

#[test]
fn simulate_then_report() {
    let dir = tempfile::tempdir().unwrap();
    ok(&with_fast("simulate", &["--runs", "2"]), dir.path());
    for f in ["aggregate.json", "table.csv", "table.md", "mean_profile.csv", "mean_profile.svg"] {
        assert!(dir.path().join(f).exists(), "missing {f}");
    }
    assert!(dir.path().join("runs/run_000/summary.json").exists());
    assert!(dir.path().join("runs/run_001/summary.json").exists());

    let table = dir.path().join("report.md");
    let out = ok(
        &["report", dir.path().to_str().unwrap(), "--out", table.to_str().unwrap()],
        dir.path(),
    );
    let printed = String::from_utf8(out.stdout).unwrap();
    assert!(printed.contains("AR(1)"), "{printed}");
    assert_eq!(fs::read_to_string(&table).unwrap(), printed);
}

#[test]
fn heatmap_between_windows() {
    let dir = tempfile::tempdir().unwrap();
    ok(&with_fast("heatmap", &["--b.window", "12"]), dir.path());
    let grid = fs::read_to_string(dir.path().join("grid.csv")).unwrap();
    let mut lines = grid.lines();
    let header = lines.next().unwrap();
    assert_eq!(header.split(',').count(), 13);
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 8);

    let svg = fs::read_to_string(dir.path().join("heatmap.svg")).unwrap();
    let cells = data_values(&svg, "cell");
    assert_eq!(cells.len(), 8 * 12);
    let from_csv: Vec<String> = rows
        .iter()
        .flat_map(|r| r.split(',').skip(1).map(str::to_string))
        .collect();
    assert_eq!(cells, from_csv);
}

#[test]
fn sweep_over_one_axis() {
    let dir = tempfile::tempdir().unwrap();
    let args = with_fast("sweep", &["--runs", "1", "--axis", "activation=relu,tanh"]);
    ok(&args, dir.path());
    let sweep = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(sweep.lines().count(), 3);
    assert!(dir.path().join("variant_00").is_dir());
    assert!(dir.path().join("variant_01").is_dir());
}
