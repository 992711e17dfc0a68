//! CLI behavior: exit codes, output formats, config merging, summarize.

use std::path::PathBuf;
use std::process::{Command, Output};

fn tmp_dir(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_graphsq"))
        .args(args)
        .output()
        .expect("spawn graphsq")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn graphgen_clique_reports_edges_and_epsilon() {
    let dir = tmp_dir("cli_graphgen");
    let out_file = dir.join("clique.txt");
    let out = run(&[
        "graphgen",
        "--family",
        "clique",
        "--n",
        "100",
        "--out",
        out_file.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("edges=4950"), "{text}");
    assert!(text.contains("epsilon=0.000000"), "{text}");
    assert!(text.contains("condition1: PASS"), "{text}");
    let edge_lines = std::fs::read_to_string(&out_file).unwrap().lines().count();
    assert_eq!(edge_lines, 1 + 4950);
}

#[test]
fn graphgen_errg_requires_seed() {
    let dir = tmp_dir("cli_seedless");
    let out = run(&[
        "graphgen",
        "--family",
        "errg",
        "--p",
        "0.1",
        "--n",
        "50",
        "--out",
        dir.join("g.txt").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "missing seed must exit 2");
}

#[test]
fn graphgen_odd_regular_parity_is_usage_error() {
    let dir = tmp_dir("cli_parity");
    let out = run(&[
        "graphgen",
        "--family",
        "random-regular",
        "--k",
        "3",
        "--n",
        "101",
        "--seed",
        "1",
        "--out",
        dir.join("g.txt").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn graphgen_exhausted_restart_budget_is_runtime_error() {
    let dir = tmp_dir("cli_budget");
    let out = run(&[
        "graphgen",
        "--family",
        "random-regular",
        "--k",
        "7",
        "--n",
        "8",
        "--seed",
        "1",
        "--restart-budget",
        "2",
        "--out",
        dir.join("g.txt").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn check_graph_round_trip_and_malformed() {
    let dir = tmp_dir("cli_check");
    let gfile = dir.join("g.txt");
    let out = run(&[
        "graphgen",
        "--family",
        "errg",
        "--p",
        "0.2",
        "--n",
        "40",
        "--seed",
        "5",
        "--out",
        gfile.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let out = run(&["check-graph", "--in", gfile.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("vertices=40"));

    let bad = dir.join("bad.txt");
    std::fs::write(&bad, "graphsq-edgelist v1 3 0\n1 0\n").unwrap();
    let out = run(&["check-graph", "--in", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_lambda_zero_drains_and_missing_seed_errors() {
    let dir = tmp_dir("cli_sim");
    let out = run(&[
        "simulate",
        "--family",
        "clique",
        "--n",
        "30",
        "--lambda",
        "0",
        "--t",
        "25",
        "--sample-dt",
        "5",
        "--seed",
        "3",
        "--q0",
        "1,1,0.5",
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let occ = std::fs::read_to_string(dir.join("occupancy.csv")).unwrap();
    let lines: Vec<&str> = occ.lines().collect();
    assert_eq!(lines[0], "t,j,q_j");
    // final grid time: level 0 row is 1, level >= 1 rows are 0
    let last_t = lines.last().unwrap().split(',').next().unwrap().to_string();
    let finals: Vec<&str> = lines
        .iter()
        .filter(|l| l.starts_with(&format!("{last_t},")))
        .copied()
        .collect();
    assert!(finals[0].ends_with(",1"), "{finals:?}");
    for row in &finals[1..] {
        assert!(row.ends_with(",0"), "queue mass left: {row}");
    }

    let out = run(&[
        "simulate",
        "--family",
        "clique",
        "--n",
        "30",
        "--lambda",
        "0",
        "--t",
        "1",
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "missing --seed must exit 2");
}

#[test]
fn ode_fixed_point_drift_and_unstable_lambda() {
    let dir = tmp_dir("cli_ode");
    let out = run(&[
        "ode",
        "--lambda",
        "0.9",
        "--t",
        "10",
        "--h",
        "0.001",
        "--init",
        "fixed-point",
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let drift: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("fixed-point drift sup_l1="))
        .expect("drift line")
        .parse()
        .unwrap();
    assert!(drift <= 1e-8, "drift {drift}");
    assert!(dir.join("fixed_point.csv").exists());
    let fp = std::fs::read_to_string(dir.join("fixed_point.csv")).unwrap();
    assert!(fp.starts_with("j,q_star\n0,1\n1,0.9\n"), "{fp}");

    let out = run(&[
        "ode",
        "--lambda",
        "1.2",
        "--t",
        "1",
        "--init",
        "fixed-point",
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(2),
        "lambda >= 1 with fixed-point init"
    );
}

#[test]
fn ode_truncation_warning_lands_in_manifest() {
    let dir = tmp_dir("cli_ode_warn");
    let out = run(&[
        "ode",
        "--lambda",
        "0.95",
        "--t",
        "5",
        "--b",
        "3",
        "--init",
        "empty",
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let manifest = std::fs::read_to_string(dir.join("ode_manifest.jsonl")).unwrap();
    assert!(
        manifest.contains("\"truncation_warning\":true"),
        "{manifest}"
    );
}

#[test]
fn compare_writes_cells_and_summarize_groups_them() {
    let dir = tmp_dir("cli_compare");
    let out = run(&[
        "compare",
        "--families",
        "clique,cycle",
        "--n-list",
        "32,64",
        "--lambda",
        "0.8",
        "--t",
        "2",
        "--h",
        "0.01",
        "--reps",
        "3",
        "--seed",
        "9",
        "--jobs",
        "2",
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    assert!(text.contains("condition1: FAIL (d_min=2)"), "{text}");
    assert!(dir.join("compare_summary.csv").exists());
    let cells = std::fs::read_dir(dir.join("compare_cells"))
        .unwrap()
        .count();
    assert_eq!(cells, 2 * 2 * 3);

    let out = run(&[
        "summarize",
        "--dir",
        dir.join("compare_cells").to_str().unwrap(),
        "--group-by",
        "family,n",
        "--value",
        "sup_l1",
        "--out",
        dir.join("summary.csv").to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    assert!(text.starts_with("family,n,mean,stderr,count"), "{text}");
    assert_eq!(text.lines().count(), 1 + 4, "{text}");
    assert!(text.lines().skip(1).all(|l| l.ends_with(",3")), "{text}");
}

#[test]
fn couple_csv_header_and_freeze_flag() {
    let dir = tmp_dir("cli_couple");
    let out = run(&[
        "couple",
        "--family",
        "errg",
        "--pn",
        "const:0.4",
        "--n-list",
        "24",
        "--lambda",
        "0.9",
        "--t",
        "1",
        "--reps",
        "2",
        "--seed",
        "4",
        "--freeze-graph",
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(dir.join("rate_sweep.csv")).unwrap();
    assert!(csv.starts_with("n,p,mean_sup2,stderr,product\n"), "{csv}");
    let manifest = std::fs::read_to_string(dir.join("couple_manifest.jsonl")).unwrap();
    assert!(manifest.contains("\"freeze_graph\":true"), "{manifest}");
}

#[test]
fn chaos_csv_header_and_mkv_control() {
    let dir = tmp_dir("cli_chaos");
    let out = run(&[
        "chaos",
        "--family",
        "clique",
        "--n",
        "30",
        "--lambda",
        "0.9",
        "--t",
        "1",
        "--reps",
        "40",
        "--seed",
        "2",
        "--pairs",
        "0:1,2:2",
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(dir.join("chaos.csv")).unwrap();
    assert!(csv.starts_with("i,j,cov,stderr,reps\n"), "{csv}");
    assert_eq!(csv.lines().count(), 3);

    let out = run(&[
        "chaos",
        "--lambda",
        "0.9",
        "--t",
        "1",
        "--reps",
        "40",
        "--seed",
        "2",
        "--mkv-control",
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn config_file_merging_flags_win() {
    let dir = tmp_dir("cli_config");
    let cfg = dir.join("run.cfg");
    std::fs::write(
        &cfg,
        "family = clique\nn = 20\nlambda = 0.5\nt = 1\nseed = 8\n# comment\n",
    )
    .unwrap();
    // flag --n 24 overrides the file's 20
    let out = run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--n",
        "24",
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let manifest = std::fs::read_to_string(dir.join("simulate_manifest.jsonl")).unwrap();
    assert!(manifest.contains("\"n\":\"24\""), "{manifest}");
    assert!(manifest.contains("\"lambda\":\"0.5\""), "{manifest}");
    assert!(stdout(&out).contains("simulated n=24"));
}

#[test]
fn out_dir_env_var_is_honored() {
    let dir = tmp_dir("cli_envdir");
    let out = Command::new(env!("CARGO_BIN_EXE_graphsq"))
        .env("GRAPHSQ_OUT_DIR", dir.to_str().unwrap())
        .args(["ode", "--lambda", "0.5", "--t", "0.5", "--h", "0.01"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.join("ode.csv").exists());
}
