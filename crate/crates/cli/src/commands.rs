//! The five commands. Each one parses nothing itself: it takes a parsed
//! config, calls the library and writes its outputs into a directory.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use energy_shield::analysis::{analyze, CharacteristicModel, Setting};
use energy_shield::exactdp::{dp_backward, dp_value_two_group, dp_value_with, write_value_table, ChainSpec, DpResult};
use energy_shield::format::fmt_g12;
use energy_shield::shield::{run_stream, Input};
use energy_shield::simkit::{run_ensemble, simulate_trace, write_ensemble_csv, ExperimentConfig, DEFAULT_COLUMNS};
use energy_shield::synthesis::{synthesize, Status};
use energy_shield::{Group, StepRecord};
use serde_json::{json, Value};

use crate::config::{AnalyzeConfig, DpConfig, ReplayConfig, SimulateConfig, SynthesizeConfig};
use crate::error::CliError;

/// Rounds every non-integer number to 12 significant digits.
pub fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            let r: f64 = fmt_g12(x).parse().expect("formatted float parses");
            serde_json::Number::from_f64(r).map(Value::Number).unwrap_or(Value::Null)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_json).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        other => other,
    }
}

pub fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(&round_json(v.clone())).expect("json renders");
    s.push('\n');
    s
}

fn write_json(dir: &Path, name: &str, v: &Value) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), render(v))?;
    Ok(())
}

pub fn analyze_cmd(cfg: &AnalyzeConfig, out: &Path) -> Result<Value, CliError> {
    let model = CharacteristicModel::new(cfg.setting, cfg.zeta)?;
    let report = analyze(&model, &cfg.target, cfg.eta, &cfg.times)?;
    let v = serde_json::to_value(&report).expect("report serializes");
    write_json(out, "report.json", &v)?;
    Ok(v)
}

pub fn synthesize_cmd(cfg: &SynthesizeConfig, out: &Path) -> Result<Value, CliError> {
    let outcome = synthesize(cfg)?;
    let v = serde_json::to_value(outcome).expect("outcome serializes");
    write_json(out, "outcome.json", &v)?;
    if outcome.status == Status::Fail {
        return Err(CliError::SynthesisFailed);
    }
    Ok(v)
}

pub fn simulate_cmd(cfg: &SimulateConfig, out: &Path) -> Result<Value, CliError> {
    let shields = cfg.shields()?;
    let columns: Vec<String> = match &cfg.columns {
        Some(c) => c.clone(),
        None => DEFAULT_COLUMNS.iter().map(|s| s.to_string()).collect(),
    };
    let cols: Vec<&str> = columns.iter().map(String::as_str).collect();
    fs::create_dir_all(out)?;
    let many = shields.len() > 1;
    let mut results = Vec::new();
    for (k, shield) in shields.iter().enumerate() {
        let mut exp = ExperimentConfig::new(cfg.env, *shield, cfg.horizon, cfg.runs, cfg.seed, cfg.target);
        exp.stride = cfg.stride;
        if let Some(limit) = cfg.sample_limit {
            exp.sample_limit = limit;
        }
        let summary = run_ensemble(&exp)?;
        let suffix = if many { format!("_{k}") } else { String::new() };
        let file = fs::File::create(out.join(format!("ensemble{suffix}.csv")))?;
        write_ensemble_csv(&summary, &cols, BufWriter::new(file))?;
        if cfg.runs == 1 {
            let trace = simulate_trace(&exp, 0)?;
            write_trace(&out.join(format!("trace{suffix}.csv")), &trace)?;
        }
        let last = summary.times.len() - 1;
        results.push(json!({
            "shield": shield,
            "stride": summary.stride,
            "final_mean": summary.mean[last],
            "final_q025": summary.q025[last],
            "final_q975": summary.q975[last],
            "final_cost_mean": summary.cost_mean[last],
            "empirical": summary.empirical,
        }));
    }
    let v = json!({
        "seed": cfg.seed,
        "runs": cfg.runs,
        "horizon": cfg.horizon,
        "results": results,
    });
    write_json(out, "summary.json", &v)?;
    Ok(v)
}

pub fn write_trace(path: &Path, records: &[StepRecord]) -> Result<(), CliError> {
    use std::io::Write;
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "{}", StepRecord::CSV_HEADER)?;
    for r in records {
        writeln!(w, "{r}")?;
    }
    w.flush()?;
    Ok(())
}

/// Runs the exact (or sampled, for long two-group horizons) evaluation.
pub fn dp_result(cfg: &DpConfig) -> Result<DpResult, CliError> {
    let model = CharacteristicModel::new(cfg.setting, cfg.zeta)?;
    Ok(match cfg.setting {
        Setting::Single { .. } => {
            let spec = ChainSpec::new(model, cfg.target, cfg.horizon, cfg.measure)?;
            dp_value_with(&spec, &cfg.options)?
        }
        Setting::TwoGroup { .. } => dp_value_two_group(&model, &cfg.target, cfg.horizon, cfg.measure, &cfg.options)?,
    })
}

pub fn dp_cmd(cfg: &DpConfig, out: &Path) -> Result<Value, CliError> {
    let result = dp_result(cfg)?;
    fs::create_dir_all(out)?;
    if cfg.table {
        let Setting::Single { .. } = cfg.setting else {
            return Err(CliError::Config("the value table is available for single-group models only".into()));
        };
        let model = CharacteristicModel::new(cfg.setting, cfg.zeta)?;
        let spec = ChainSpec::new(model, cfg.target, cfg.horizon, cfg.measure)?;
        let (_, rows) = dp_backward(&spec, &cfg.options, true)?;
        let file = fs::File::create(out.join("value_table.csv"))?;
        write_value_table(&rows, BufWriter::new(file))?;
    }
    let mut v = serde_json::to_value(result).expect("result serializes");
    v["measure"] = serde_json::to_value(cfg.measure).expect("measure serializes");
    v["seed"] = json!(cfg.options.seed);
    // wall-clock time varies between runs; keep the file reproducible
    let elapsed = v.as_object_mut().and_then(|o| o.remove("elapsed_secs"));
    write_json(out, "dp.json", &v)?;
    if let Some(e) = elapsed {
        v["elapsed_secs"] = e;
    }
    Ok(v)
}

/// Reads a replay file: columns `x` or `group,x`, optionally followed by a
/// timestamp, with or without a header naming `group`, `x` (or
/// `decision`) and `timestamp`.
pub fn read_replay(path: &Path, two_group: bool) -> Result<Vec<Input>, CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut x_col = usize::from(two_group);
    let mut g_col = two_group.then_some(0);
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 1;
        let rec = rec.map_err(|e| CliError::Config(format!("{}: line {line}: {e}", path.display())))?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(line);
        let bad = |msg: String| CliError::Config(format!("{}: line {line}: {msg}", path.display()));
        if out.is_empty() && i == 0 {
            let names: Vec<String> = rec.iter().map(|f| f.to_ascii_lowercase()).collect();
            if names.iter().any(|n| ["x", "decision", "group", "timestamp"].contains(&n.as_str())) {
                x_col = names
                    .iter()
                    .position(|n| n == "x" || n == "decision")
                    .ok_or_else(|| bad("header lacks an 'x' column".into()))?;
                g_col = names.iter().position(|n| n == "group");
                if two_group != g_col.is_some() {
                    return Err(bad(if two_group {
                        "a 'group' column is required for a two-group shield".into()
                    } else {
                        "unexpected 'group' column for a single-group shield".into()
                    }));
                }
                continue;
            }
        }
        let field = |c: usize| rec.get(c).ok_or_else(|| bad(format!("missing column {}", c + 1)));
        let x = match field(x_col)? {
            "0" => false,
            "1" => true,
            other => return Err(bad(format!("decision must be 0 or 1, got '{other}'"))),
        };
        let input = match g_col {
            Some(c) => {
                let g: Group = field(c)?.parse().map_err(|_| bad(format!("unknown group '{}'", &rec[c])))?;
                Input::Grouped(g, x)
            }
            None => Input::Bit(x),
        };
        out.push(input);
    }
    Ok(out)
}

pub fn replay_cmd(cfg: &ReplayConfig, base: &Path, out: &Path) -> Result<Value, CliError> {
    let mut engine = cfg.shield.build()?;
    let two = engine.two_group_state().is_some();
    let input: PathBuf = if cfg.input.is_absolute() {
        cfg.input.clone()
    } else {
        base.join(&cfg.input)
    };
    let xs = read_replay(&input, two)?;
    let records = run_stream(&mut engine, &xs, cfg.seed)?;
    fs::create_dir_all(out)?;
    write_trace(&out.join("trace.csv"), &records)?;
    let n = records.len();
    let third = (n / 3).max(1).min(n);
    let at = |t: usize| -> Value {
        if t == 0 {
            return Value::Null;
        }
        let r = &records[t - 1];
        json!({"t": r.t, "m": r.m})
    };
    let v = json!({
        "seed": cfg.seed,
        "steps": n,
        "fairness_one_third": at(if n == 0 { 0 } else { third }),
        "fairness_end": at(n),
        "interventions": engine.interventions(),
        "nu": engine.nu(),
    });
    write_json(out, "replay_summary.json", &v)?;
    Ok(v)
}
