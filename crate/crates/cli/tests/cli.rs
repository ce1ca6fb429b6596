use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn pps(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pps"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn pps_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pps"))
        .args(args)
        .env(key, value)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("report is JSON")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn two_task_line(rq: f64) -> String {
    format!(
        r#"{{
  "tasks": [
    {{"id": "p", "from": "n0", "to": "n1", "simplicity": 2, "reward": 1}},
    {{"id": "q", "from": "n1", "to": "n2", "simplicity": 1, "reward": {rq}}}
  ],
  "agents": [{{"id": "1", "ability": 1}}, {{"id": "2", "ability": 1}}]
}}"#
    )
}

const TWO_BY_TWO: &str = r#"{
  "tasks": [
    {"id": "u", "from": "s", "to": "t", "reward": 1},
    {"id": "v", "from": "s", "to": "t", "reward": 1}
  ],
  "agents": [
    {"id": "a", "aptitudes": {"u": 1, "v": 0.5}},
    {"id": "b", "aptitudes": {"u": 0.5, "v": 1}}
  ]
}"#;

const DIAMOND: &str = r#"{
  "tasks": [
    {"id": "a", "from": "s", "to": "x", "simplicity": 1.5, "reward": 1},
    {"id": "b", "from": "s", "to": "y", "simplicity": 0.5, "reward": 1},
    {"id": "c", "from": "x", "to": "t", "simplicity": 2, "reward": 1},
    {"id": "d", "from": "y", "to": "t", "simplicity": 1, "reward": 1}
  ],
  "agents": [
    {"id": "1", "ability": 1},
    {"id": "2", "ability": 2},
    {"id": "3", "ability": 0.5}
  ]
}"#;

#[test]
fn line_ne_threshold_from_file() {
    let dir = TempDir::new().unwrap();
    let below = write(&dir, "below.json", &two_task_line(3.9));
    let o = pps(&["check", s(&below), "--which", "line-ne"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["verdict"], "pass");

    let above = write(&dir, "above.json", &two_task_line(5.0));
    let o = pps(&["check", s(&above), "--which", "line-ne"]);
    assert_eq!(code(&o), 1);
    let v = json(&o);
    assert_eq!(v["witnesses"][0]["subject"]["agent"], "1");
    assert_eq!(v["witnesses"][0]["tasks"], serde_json::json!(["p", "q"]));
}

#[test]
fn sa_checker_rejects_general_file() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "g.json", TWO_BY_TWO);
    let o = pps(&["check", s(&f), "--which", "dag-sa"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("does not apply"));
}

#[test]
fn invalid_files_exit_two() {
    let dir = TempDir::new().unwrap();
    let both = write(
        &dir,
        "both.json",
        r#"{"tasks":[{"id":"p","from":"a","to":"b","reward":1}],
            "agents":[{"id":"1","ability":1,"aptitudes":{"p":1}}]}"#,
    );
    let o = pps(&["check", s(&both)]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("agents[0]"));

    let no_reward = write(
        &dir,
        "r.json",
        r#"{"tasks":[{"id":"p","from":"a","to":"b","simplicity":1}],"agents":[{"id":"1","ability":1}]}"#,
    );
    let o = pps(&["analyze", s(&no_reward)]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("tasks[0].reward"));

    let broken = write(&dir, "x.json", "{\n\"tasks\": oops}");
    let o = pps(&["check", s(&broken)]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));

    assert_eq!(code(&pps(&["check", "/nonexistent/game.json"])), 2);
    assert_eq!(code(&pps(&["frobnicate"])), 2);
}

#[test]
fn designed_diamond_is_optimal_and_stable() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "diamond.json", DIAMOND);
    let designed = dir.path().join("designed.json");
    let o = pps(&[
        "design",
        s(&f),
        "--mode",
        "proportional",
        "--out",
        s(&designed),
    ]);
    assert_eq!(code(&o), 0);

    let o = pps(&["check", s(&designed), "--which", "dag-sa"]);
    assert_eq!(code(&o), 0);

    let o = pps(&["analyze", s(&designed)]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    let (th, topt) = (
        v["t_herding"].as_f64().unwrap(),
        v["t_opt"].as_f64().unwrap(),
    );
    assert!((th - topt).abs() <= 1e-9);
    assert_eq!(v["nash"]["holds"], true);
    for a in v["nash"]["agents"].as_array().unwrap() {
        assert_eq!(a["is_best_response"], true);
    }
}

#[test]
fn two_by_two_ratio() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "g.json", TWO_BY_TWO);
    let out = dir.path().join("report.json");
    let o = pps(&["analyze", s(&f), "--out", s(&out)]);
    assert!(code(&o) <= 1);
    assert!(o.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!((v["ratio"].as_f64().unwrap() - 8.0 / 7.0).abs() <= 1e-9);
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn state_cap_from_environment() {
    let o = pps_env(
        &["analyze", "--example", "1.2", "--m", "6", "--n", "2"],
        "PPS_STATE_CAP",
        "3",
    );
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("more than 3 states"));
    let o = pps(&[
        "analyze",
        "--example",
        "1.2",
        "--m",
        "6",
        "--n",
        "2",
        "--opt-cap",
        "3",
    ]);
    assert_eq!(code(&o), 2);
}

fn column_stats(csv: &str, col: usize) -> (f64, f64) {
    let xs: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(col).unwrap().parse().unwrap())
        .collect();
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[test]
fn uniform_line_makespan_from_csv() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("runs.csv");
    let args = [
        "simulate",
        "--example",
        "1.2",
        "--m",
        "6",
        "--n",
        "3",
        "--reps",
        "100000",
        "--seed",
        "42",
        "--out",
        s(&csv),
    ];
    let o = pps(&args);
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "rep,makespan,reward_1,reward_2,reward_3"
    );
    assert_eq!(text.lines().count(), 100_001);
    let (mean, se) = column_stats(&text, 1);
    assert!((mean - 2.0).abs() <= 3.0 * se, "{mean} ± {se}");

    let v = json(&o);
    assert_eq!(v["seed"], 42);
    assert!((v["summary"]["makespan"]["mean"].as_f64().unwrap() - mean).abs() < 1e-12);

    let again = dir.path().join("again.csv");
    let mut rerun = args.to_vec();
    *rerun.last_mut().unwrap() = s(&again);
    assert_eq!(code(&pps(&rerun)), 0);
    assert_eq!(std::fs::read(&csv).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn withholding_payoff_from_csv() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("runs.csv");
    let o = pps(&[
        "simulate",
        "--example",
        "1.1",
        "--strategy",
        "1=withhold",
        "--reps",
        "100000",
        "--seed",
        "7",
        "--out",
        s(&csv),
    ]);
    assert_eq!(code(&o), 0);
    let (mean, se) = column_stats(&std::fs::read_to_string(&csv).unwrap(), 2);
    assert!((mean - 37.0 / 12.0).abs() <= 3.0 * se, "{mean} ± {se}");
    assert_eq!(json(&o)["strategies"]["1"], "withhold");
}

#[test]
fn event_log_lines() {
    let dir = TempDir::new().unwrap();
    let events = dir.path().join("events.jsonl");
    let o = pps(&[
        "simulate",
        "--example",
        "1.1",
        "--strategy",
        "2=delay:0.25",
        "--reps",
        "3",
        "--events",
        s(&events),
    ]);
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(&events).unwrap();
    let lines: Vec<Value> = text
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert!(!lines.is_empty());
    for rep in 0..3 {
        let claims = lines
            .iter()
            .filter(|e| e["rep"] == rep && e["kind"] == "claim")
            .count();
        assert_eq!(claims, 2);
    }
}

#[test]
fn bad_strategy_is_usage_error() {
    let o = pps(&[
        "simulate",
        "--example",
        "1.1",
        "--strategy",
        "1=sleep",
        "--reps",
        "2",
    ]);
    assert_eq!(code(&o), 2);
    let o = pps(&[
        "simulate",
        "--example",
        "1.1",
        "--strategy",
        "7=pps",
        "--reps",
        "2",
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn design_output_round_trips() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "line.json", &two_task_line(5.0));
    let o = pps(&[
        "design",
        s(&f),
        "--mode",
        "line-approx",
        "--alpha",
        "0.5",
        "--scale",
        "2",
    ]);
    assert_eq!(code(&o), 0);
    let first = String::from_utf8(o.stdout).unwrap();
    let again = write(&dir, "designed.json", &first);
    let o = pps(&[
        "design",
        s(&again),
        "--mode",
        "line-approx",
        "--alpha",
        "0.5",
        "--scale",
        "2",
    ]);
    assert_eq!(String::from_utf8(o.stdout).unwrap(), first);

    let o = pps(&["check", s(&again), "--which", "line-ne"]);
    assert_eq!(code(&o), 0);
}

#[test]
fn check_all_skips_inapplicable() {
    let o = pps(&["check", "--example", "4.1", "--m", "3"]);
    let v = json(&o);
    let skipped: Vec<&str> = v["skipped"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x["theorem"].as_str().unwrap())
        .collect();
    assert!(skipped.contains(&"dag-sa"));
    assert!(skipped.contains(&"line-ne"));
    assert_eq!(code(&o), if v["verdict"] == "pass" { 0 } else { 1 });
}

#[test]
fn version_flag() {
    let o = pps(&["--version"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains(env!("CARGO_PKG_VERSION")));
}
