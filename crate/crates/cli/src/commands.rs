use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use crate::error::{CliError, Result};
use crate::report::{format_f64, to_compact, to_pretty, VERSION};
use crate::spec_file::{digest, load_game_spec, serialize_game};
use pps_core::analysis::{coalition_analysis, opt_makespan, utility_profile, verify_nash_pps};
use pps_core::instances::{specialists, two_task_line, uniform_line};
use pps_core::model::{
    check_dag_core, check_dag_ne, check_dag_sa, check_dag_stackelberg, check_line_core,
    check_line_ne, check_line_stackelberg, design_rewards, ConditionReport, RewardDesign, Subject,
    Theorem,
};
use pps_core::sim::{run_batch, simulate_with, EventKind, SimOptions};
use pps_core::{Caps, GameSpec, RewardVector, Strategy, EPS};

/// Where the game comes from: a spec file or a built-in example.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GameSource {
    pub path: Option<PathBuf>,
    pub example: Option<String>,
    pub m: Option<usize>,
    pub n: Option<usize>,
    pub rewards: Option<Vec<f64>>,
}

impl GameSource {
    pub fn load(&self) -> Result<GameSpec> {
        let g = match (&self.path, &self.example) {
            (Some(_), Some(_)) => {
                return Err(CliError::Usage(
                    "give either a game file or --example, not both".into(),
                ))
            }
            (None, None) => {
                return Err(CliError::Usage(
                    "a game file or --example is required".into(),
                ))
            }
            (Some(path), None) => {
                if self.m.is_some() || self.n.is_some() {
                    return Err(CliError::Usage(
                        "--m and --n only apply to --example".into(),
                    ));
                }
                load_game_spec(path)?
            }
            (None, Some(name)) => self.example(name)?,
        };
        match &self.rewards {
            None => Ok(g),
            Some(r) => Ok(g.with_rewards(RewardVector::new(r.clone())?)?),
        }
    }

    fn example(&self, name: &str) -> Result<GameSpec> {
        let g = match name {
            "1.1" => {
                if self.m.is_some() || self.n.is_some() {
                    return Err(CliError::Usage("example 1.1 has fixed size".into()));
                }
                two_task_line(1.0, 5.0)?
            }
            "1.2" => uniform_line(self.m.unwrap_or(6), self.n.unwrap_or(3))?,
            "4.1" => {
                let m = self.m.unwrap_or(4);
                if self.n.is_some_and(|n| n != m) {
                    return Err(CliError::Usage("example 4.1 has one agent per task".into()));
                }
                specialists(m)?
            }
            other => {
                return Err(CliError::Usage(format!(
                    "unknown example `{other}` (expected 1.1, 1.2 or 4.1)"
                )))
            }
        };
        Ok(g)
    }
}

/// Result of a command: the exit code and what goes to stdout.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub code: u8,
    pub stdout: String,
}

fn header(command: &str, g: &GameSpec, seed: Option<u64>) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("tool".into(), json!("pps"));
    m.insert("version".into(), json!(VERSION));
    m.insert("command".into(), json!(command));
    m.insert("input_digest".into(), json!(digest(g)));
    if let Some(s) = seed {
        m.insert("seed".into(), json!(s));
    }
    m
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Writes the report to `out` when given, otherwise returns it for stdout.
fn emit(report: &Map<String, Value>, out: Option<&Path>, code: u8) -> Result<Outcome> {
    let text = to_pretty(report);
    match out {
        Some(p) => {
            write_file(p, &text)?;
            Ok(Outcome {
                code,
                stdout: String::new(),
            })
        }
        None => Ok(Outcome { code, stdout: text }),
    }
}

fn agent_ids(g: &GameSpec, idx: &[usize]) -> Value {
    json!(idx
        .iter()
        .map(|&i| g.agents()[i].as_str())
        .collect::<Vec<_>>())
}

fn condition_json(g: &GameSpec, r: &ConditionReport) -> Value {
    let net = g.network();
    let witnesses: Vec<Value> = r
        .witnesses
        .iter()
        .map(|w| {
            let mut m = Map::new();
            m.insert("kind".into(), json!(format!("{:?}", w.kind).to_lowercase()));
            let subject = match &w.subject {
                Subject::Agent(i) => json!({ "agent": g.agents()[*i] }),
                Subject::Coalition(c) => json!({ "coalition": agent_ids(g, c) }),
                Subject::AgentPair(i, j) => json!({ "agents": agent_ids(g, &[*i, *j]) }),
                Subject::Order => json!("order"),
            };
            m.insert("subject".into(), subject);
            m.insert(
                "tasks".into(),
                json!([net.task_id(w.tasks.0), net.task_id(w.tasks.1)]),
            );
            m.insert("lhs".into(), json!(w.lhs));
            m.insert("rhs".into(), json!(w.rhs));
            Value::Object(m)
        })
        .collect();
    json!({
        "theorem": r.theorem.tag(),
        "verdict": if r.pass { "pass" } else { "fail" },
        "witnesses": witnesses,
        "thresholds": {
            "alpha_ne": r.thresholds.alpha_ne,
            "alpha_c": r.thresholds.alpha_c,
            "alpha_s": r.thresholds.alpha_s,
            "beta": r.thresholds.beta,
        },
        "notes": r.notes,
    })
}

fn run_checker(g: &GameSpec, t: Theorem, caps: Caps) -> Result<ConditionReport> {
    let r = match t {
        Theorem::LineNe => check_line_ne(g),
        Theorem::LineCore => check_line_core(g, caps.coalition_limit),
        Theorem::LineStackelberg => check_line_stackelberg(g),
        Theorem::DagNe => check_dag_ne(g),
        Theorem::DagSa => check_dag_sa(g),
        Theorem::DagStackelberg => check_dag_stackelberg(g),
        Theorem::DagCore => check_dag_core(g),
    };
    r.map_err(|e| match e {
        pps_core::Error::NotALine
        | pps_core::Error::NotSeparable
        | pps_core::Error::EmptyStackelbergSet
        | pps_core::Error::SingleAgent => CliError::InapplicableChecker {
            checker: t.tag().into(),
            reason: e.to_string(),
        },
        other => other.into(),
    })
}

pub fn cmd_check(g: &GameSpec, which: &str, caps: Caps, out: Option<&Path>) -> Result<Outcome> {
    let mut report = header("check", g, None);
    if which != "all" {
        let t = Theorem::from_tag(which)
            .ok_or_else(|| CliError::Usage(format!("unknown checker `{which}`")))?;
        let r = run_checker(g, t, caps)?;
        if let Value::Object(body) = condition_json(g, &r) {
            report.extend(body);
        }
        return emit(&report, out, if r.pass { 0 } else { 1 });
    }
    let mut reports = Vec::new();
    let mut skipped = Vec::new();
    let mut all_pass = true;
    for t in Theorem::ALL {
        match run_checker(g, t, caps) {
            Ok(r) => {
                all_pass &= r.pass;
                reports.push(condition_json(g, &r));
            }
            Err(CliError::InapplicableChecker { checker, reason }) => {
                skipped.push(json!({ "theorem": checker, "reason": reason }))
            }
            Err(e) => return Err(e),
        }
    }
    if reports.is_empty() {
        return Err(CliError::InapplicableChecker {
            checker: "all".into(),
            reason: "no checker applies to this game".into(),
        });
    }
    report.insert(
        "verdict".into(),
        json!(if all_pass { "pass" } else { "fail" }),
    );
    report.insert("reports".into(), Value::Array(reports));
    report.insert("skipped".into(), Value::Array(skipped));
    emit(&report, out, if all_pass { 0 } else { 1 })
}

pub fn cmd_analyze(g: &GameSpec, caps: Caps, core: bool, out: Option<&Path>) -> Result<Outcome> {
    let mut report = header("analyze", g, None);
    let ids = g.agents();
    let utilities = utility_profile(g);
    let mk = opt_makespan(g, caps)?;
    let m = g.m() as f64;
    if !(mk.ratio >= 1.0 - EPS && mk.ratio <= m + EPS) {
        return Err(pps_core::Error::BoundViolated(format!(
            "herding/optimal ratio {} outside [1, {m}]",
            mk.ratio
        ))
        .into());
    }
    let nash = verify_nash_pps(g, caps)?;
    report.insert(
        "utilities".into(),
        Value::Object(
            ids.iter()
                .zip(&utilities.utilities)
                .map(|(id, u)| (id.clone(), json!(u)))
                .collect(),
        ),
    );
    report.insert("total_reward".into(), json!(utilities.total));
    report.insert("t_herding".into(), json!(mk.herding));
    report.insert("t_opt".into(), json!(mk.optimal));
    report.insert("ratio".into(), json!(mk.ratio));
    let verdicts: Vec<Value> = nash
        .agents
        .iter()
        .map(|a| {
            json!({
                "agent": ids[a.agent],
                "pps_value": a.pps_value,
                "best_value": a.best_value,
                "withhold_value": a.withhold_value,
                "is_best_response": a.is_best_response,
            })
        })
        .collect();
    report.insert(
        "nash".into(),
        json!({
            "holds": nash.holds,
            "herding_order": if nash.common_herding_order { "common" } else { "per-agent argmax" },
            "deviators": agent_ids(g, &nash.deviators),
            "agents": verdicts,
        }),
    );
    if core {
        let c = coalition_analysis(g, caps)?;
        let coalitions: Vec<Value> = c
            .coalitions
            .iter()
            .map(|k| {
                json!({
                    "members": agent_ids(g, &k.members),
                    "value": k.value,
                    "pps_sum": k.pps_sum,
                    "blocks": k.blocks(),
                })
            })
            .collect();
        report.insert(
            "core".into(),
            json!({
                "in_core": c.in_core,
                "grand_value": c.grand_value,
                "violator": c.violator.as_deref().map(|v| agent_ids(g, v)),
                "coalitions": coalitions,
            }),
        );
    }
    emit(&report, out, if nash.holds { 0 } else { 1 })
}

/// Parses `<agent>=<pps|split|delay:τ|withhold>` entries; unlisted agents
/// play PPS with herding.
pub fn parse_profile(g: &GameSpec, specs: &[String]) -> Result<Vec<Strategy>> {
    let mut profile = vec![Strategy::PpsHerding; g.n()];
    let mut seen = vec![false; g.n()];
    for spec in specs
        .iter()
        .flat_map(|s| s.split(','))
        .filter(|s| !s.is_empty())
    {
        let (agent, name) = spec.split_once('=').ok_or_else(|| {
            CliError::Usage(format!("strategy `{spec}` is not <agent>=<strategy>"))
        })?;
        let i = g
            .agent_index(agent)
            .ok_or_else(|| CliError::Usage(format!("strategy names unknown agent `{agent}`")))?;
        if std::mem::replace(&mut seen[i], true) {
            return Err(CliError::Usage(format!(
                "agent `{agent}` has two strategies"
            )));
        }
        profile[i] = match name {
            "pps" => Strategy::PpsHerding,
            "split" => Strategy::PpsSplit { weights: None },
            "withhold" => Strategy::WithholdAll,
            _ => match name.strip_prefix("delay:") {
                Some(tau) => {
                    let tau: f64 = tau
                        .parse()
                        .map_err(|_| CliError::Usage(format!("bad delay in `{spec}`")))?;
                    let s = Strategy::Delay { tau };
                    s.validate(g.m())
                        .map_err(|e| CliError::Usage(e.to_string()))?;
                    s
                }
                None => {
                    return Err(CliError::Usage(format!(
                        "unknown strategy `{name}` (expected pps, split, delay:<tau> or withhold)"
                    )))
                }
            },
        };
    }
    Ok(profile)
}

fn strategy_label(s: &Strategy) -> String {
    match s {
        Strategy::PpsHerding => "pps".into(),
        Strategy::PpsSplit { .. } => "split".into(),
        Strategy::Delay { tau } => format!("delay:{tau}"),
        Strategy::WithholdAll => "withhold".into(),
    }
}

fn stats_json(s: &pps_core::sim::Stats) -> Value {
    json!({
        "mean": s.mean,
        "stdev": s.stdev,
        "stderr": s.stderr,
        "ci95": [s.ci_low, s.ci_high],
    })
}

pub struct SimulateArgs<'a> {
    pub strategies: &'a [String],
    pub reps: usize,
    pub seed: u64,
    pub csv: Option<&'a Path>,
    pub events: Option<&'a Path>,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn csv_text(g: &GameSpec, batch: &pps_core::sim::BatchSummary) -> String {
    let mut s = String::from("rep,makespan");
    for id in g.agents() {
        s.push_str(",reward_");
        s.push_str(id);
    }
    s.push('\n');
    for (k, run) in batch.runs.iter().enumerate() {
        s.push_str(&k.to_string());
        s.push(',');
        s.push_str(&format_f64(run.makespan));
        for r in &run.rewards {
            s.push(',');
            s.push_str(&format_f64(*r));
        }
        s.push('\n');
    }
    s
}

fn write_events(
    g: &GameSpec,
    profile: &[Strategy],
    args: &SimulateArgs,
    path: &Path,
) -> Result<()> {
    let mut w = create(path)?;
    let opts = SimOptions {
        record_events: true,
        ..SimOptions::default()
    };
    for k in 0..args.reps as u64 {
        let r = simulate_with(g, profile, args.seed, k, &opts)?;
        for e in &r.events {
            let kind = match e.kind {
                EventKind::Solve => "solve",
                EventKind::Share => "share",
                EventKind::Claim => "claim",
            };
            let line = json!({
                "rep": k,
                "time": e.time,
                "agent": g.agents()[e.agent],
                "kind": kind,
                "task": g.network().task_id(e.task),
            });
            writeln!(w, "{}", to_compact(&line)).map_err(io_err(path))?;
        }
    }
    w.flush().map_err(io_err(path))
}

pub fn cmd_simulate(g: &GameSpec, args: &SimulateArgs) -> Result<Outcome> {
    let profile = parse_profile(g, args.strategies)?;
    if args.reps == 0 {
        return Err(CliError::Usage("--reps must be positive".into()));
    }
    let batch = run_batch(g, &profile, args.reps, args.seed)?;
    if let Some(path) = args.csv {
        write_file(path, &csv_text(g, &batch))?;
    }
    if let Some(path) = args.events {
        write_events(g, &profile, args, path)?;
    }
    let mut report = header("simulate", g, Some(args.seed));
    report.insert("reps".into(), json!(args.reps));
    report.insert(
        "strategies".into(),
        Value::Object(
            g.agents()
                .iter()
                .zip(&profile)
                .map(|(id, s)| (id.clone(), json!(strategy_label(s))))
                .collect(),
        ),
    );
    report.insert(
        "summary".into(),
        json!({
            "makespan": stats_json(&batch.makespan),
            "rewards": Value::Object(
                g.agents()
                    .iter()
                    .zip(&batch.rewards)
                    .map(|(id, s)| (format!("reward_{id}"), stats_json(s)))
                    .collect(),
            ),
        }),
    );
    emit(&report, None, 0)
}

pub fn cmd_design(g: &GameSpec, design: RewardDesign, out: Option<&Path>) -> Result<Outcome> {
    let sa = g.sa().ok_or_else(|| CliError::InapplicableChecker {
        checker: "design".into(),
        reason: pps_core::Error::NotSeparable.to_string(),
    })?;
    let rewards = design_rewards(g.network(), sa, design).map_err(|e| match e {
        pps_core::Error::NotALine => CliError::InapplicableChecker {
            checker: "design".into(),
            reason: e.to_string(),
        },
        other => other.into(),
    })?;
    let text = serialize_game(&g.with_rewards(rewards)?);
    match out {
        Some(p) => {
            write_file(p, &text)?;
            Ok(Outcome {
                code: 0,
                stdout: String::new(),
            })
        }
        None => Ok(Outcome {
            code: 0,
            stdout: text,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example(name: &str, rewards: Option<Vec<f64>>) -> GameSpec {
        GameSource {
            example: Some(name.into()),
            rewards,
            ..GameSource::default()
        }
        .load()
        .unwrap()
    }

    fn parse(o: &Outcome) -> Value {
        serde_json::from_str(&o.stdout).unwrap()
    }

    #[test]
    fn line_ne_exit_codes() {
        let ok = cmd_check(
            &example("1.1", Some(vec![1.0, 3.9])),
            "line-ne",
            Caps::default(),
            None,
        )
        .unwrap();
        assert_eq!(ok.code, 0);
        let bad = cmd_check(&example("1.1", None), "line-ne", Caps::default(), None).unwrap();
        assert_eq!(bad.code, 1);
        let v = parse(&bad);
        assert_eq!(v["verdict"], "fail");
        assert_eq!(v["witnesses"][0]["subject"]["agent"], "1");
        assert_eq!(v["witnesses"][0]["tasks"], json!(["p", "q"]));
        assert_eq!(v["tool"], "pps");
        assert!(v["input_digest"].as_str().unwrap().starts_with("sha256:"));
        assert!(v.get("seed").is_none());
    }

    #[test]
    fn sa_checker_on_general_game_is_inapplicable() {
        let g = example("4.1", None);
        let e = cmd_check(&g, "dag-sa", Caps::default(), None).unwrap_err();
        assert!(matches!(e, CliError::InapplicableChecker { .. }));
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn check_all_lists_skipped() {
        let v = parse(&cmd_check(&example("1.2", None), "all", Caps::default(), None).unwrap());
        let skipped: Vec<&str> = v["skipped"]
            .as_array()
            .unwrap()
            .iter()
            .map(|s| s["theorem"].as_str().unwrap())
            .collect();
        assert_eq!(skipped, ["line-stackelberg", "dag-stackelberg"]);
        assert_eq!(v["reports"].as_array().unwrap().len(), 5);
    }

    #[test]
    fn analyze_two_by_two() {
        let g = pps_core::instances::two_by_two().unwrap();
        let o = cmd_analyze(&g, Caps::default(), true, None).unwrap();
        let v = parse(&o);
        assert!((v["ratio"].as_f64().unwrap() - 8.0 / 7.0).abs() < 1e-9);
        assert!(v["core"]["coalitions"].as_array().unwrap().len() == 2);
    }

    #[test]
    fn analyze_reports_deviation() {
        let o = cmd_analyze(&example("1.1", None), Caps::default(), false, None).unwrap();
        assert_eq!(o.code, 1);
        let v = parse(&o);
        assert_eq!(v["nash"]["deviators"], json!(["1", "2"]));
        assert!(
            (v["nash"]["agents"][0]["best_value"].as_f64().unwrap() - 37.0 / 12.0).abs() < 1e-9
        );
    }

    #[test]
    fn strategy_grammar() {
        let g = example("1.1", None);
        let p = parse_profile(&g, &["1=withhold,2=delay:0.5".into()]).unwrap();
        assert_eq!(p, [Strategy::WithholdAll, Strategy::Delay { tau: 0.5 }]);
        assert_eq!(
            parse_profile(&g, &[]).unwrap(),
            [Strategy::PpsHerding, Strategy::PpsHerding]
        );
        assert_eq!(
            parse_profile(&g, &["2=split".into()]).unwrap()[1],
            Strategy::PpsSplit { weights: None }
        );
        for bad in [
            "3=pps",
            "1=run",
            "1",
            "1=delay:-1",
            "1=delay:x",
            "1=pps,1=pps",
        ] {
            assert!(
                matches!(parse_profile(&g, &[bad.into()]), Err(CliError::Usage(_))),
                "{bad}"
            );
        }
    }

    #[test]
    fn csv_layout() {
        let g = example("1.1", None);
        let batch = run_batch(&g, &[Strategy::PpsHerding, Strategy::PpsHerding], 3, 1).unwrap();
        let csv = csv_text(&g, &batch);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "rep,makespan,reward_1,reward_2");
        assert_eq!(lines.len(), 4);
        assert!(lines[3].starts_with("2,"));
    }

    #[test]
    fn design_proportional() {
        let o = cmd_design(
            &example("1.1", None),
            RewardDesign::Proportional { scale: 2.0 },
            None,
        )
        .unwrap();
        let g = crate::spec_file::parse_game_spec(&o.stdout).unwrap();
        assert_eq!(g.rewards().values(), &[1.0, 2.0]);
        let e = cmd_design(
            &example("4.1", None),
            RewardDesign::Proportional { scale: 1.0 },
            None,
        );
        assert!(matches!(e, Err(CliError::InapplicableChecker { .. })));
    }

    #[test]
    fn source_errors() {
        assert!(matches!(
            GameSource::default().load(),
            Err(CliError::Usage(_))
        ));
        let s = GameSource {
            example: Some("9.9".into()),
            ..GameSource::default()
        };
        assert!(matches!(s.load(), Err(CliError::Usage(_))));
        let s = GameSource {
            example: Some("1.1".into()),
            rewards: Some(vec![1.0]),
            ..GameSource::default()
        };
        assert!(matches!(s.load(), Err(CliError::Core(_))));
    }
}
