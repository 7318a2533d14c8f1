//! Monte Carlo ensembles of shielded streams.
//!
//! Every replication draws raw decisions from its own environment stream
//! and intervention draws from its own shield stream, both derived from the
//! master seed and the replication index. Feeding the same seeds to
//! different engines therefore gives common random numbers.

use std::f64::consts::PI;
use std::io::Write;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fairness::{FairnessTarget, Group};
use crate::format::fmt_g12;
use crate::seeding::{derive_seed, stream_rng, ENV_STREAM, SHIELD_STREAM};
use crate::shield::{run_stream, Input, ShieldEngine, ShieldSpec, StepRecord};

/// Stored samples (runs x recorded times) above which the time grid is
/// thinned.
pub const DEFAULT_SAMPLE_LIMIT: u64 = 10_000_000;

/// Generator of raw decisions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnvModel {
    SingleGroup {
        p: f64,
    },
    TwoGroup {
        r_a: f64,
        p_a: f64,
        p_b: f64,
    },
    /// Like `SingleGroup`, for shields that must not be told `p`.
    UnknownP {
        p: f64,
    },
    /// `p_t = base + amplitude * sin(2 pi t / period)`.
    DynamicP {
        #[serde(default = "default_base")]
        base: f64,
        #[serde(default = "default_amplitude")]
        amplitude: f64,
        #[serde(default = "default_period")]
        period: f64,
    },
}

fn default_base() -> f64 {
    0.65
}
fn default_amplitude() -> f64 {
    0.1
}
fn default_period() -> f64 {
    2000.0
}

impl EnvModel {
    pub fn sinusoid(amplitude: f64, period: f64) -> Self {
        EnvModel::DynamicP {
            base: default_base(),
            amplitude,
            period,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let prob = |v: f64, name: &str| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::param(format!("{name} = {v} must lie in [0, 1]")))
            }
        };
        match *self {
            EnvModel::SingleGroup { p } | EnvModel::UnknownP { p } => prob(p, "p"),
            EnvModel::TwoGroup { r_a, p_a, p_b } => {
                prob(r_a, "r_a")?;
                prob(p_a, "p_a")?;
                prob(p_b, "p_b")
            }
            EnvModel::DynamicP { base, amplitude, period } => {
                if !(period > 0.0) {
                    return Err(Error::param("period must be positive"));
                }
                if base - amplitude.abs() < 0.0 || base + amplitude.abs() > 1.0 {
                    return Err(Error::param("sinusoid leaves [0, 1]"));
                }
                Ok(())
            }
        }
    }

    pub fn is_two_group(&self) -> bool {
        matches!(self, EnvModel::TwoGroup { .. })
    }

    /// Acceptance probability at step `t` (1-based) for single streams.
    pub fn p_at(&self, t: u64) -> Option<f64> {
        match *self {
            EnvModel::SingleGroup { p } | EnvModel::UnknownP { p } => Some(p),
            EnvModel::TwoGroup { .. } => None,
            EnvModel::DynamicP { base, amplitude, period } => {
                Some(base + amplitude * (2.0 * PI * t as f64 / period).sin())
            }
        }
    }

    /// Draws the raw input of step `t` (1-based).
    pub fn draw(&self, t: u64, rng: &mut ChaCha8Rng) -> Input {
        match *self {
            EnvModel::TwoGroup { r_a, p_a, p_b } => {
                let g = if rng.gen::<f64>() < r_a { Group::A } else { Group::B };
                let p = if g == Group::A { p_a } else { p_b };
                Input::Grouped(g, rng.gen::<f64>() < p)
            }
            _ => {
                let p = self.p_at(t).expect("single stream");
                Input::Bit(rng.gen::<f64>() < p)
            }
        }
    }

    /// The raw inputs of replication `index` under `seed`.
    pub fn raw_stream(&self, horizon: u64, seed: u64, index: u64) -> Vec<Input> {
        let mut rng = stream_rng(seed, index, ENV_STREAM);
        (1..=horizon).map(|t| self.draw(t, &mut rng)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub env: EnvModel,
    pub shield: ShieldSpec,
    pub horizon: u64,
    pub runs: u64,
    #[serde(default)]
    pub seed: u64,
    pub target: FairnessTarget,
    /// Spacing of recorded times; chosen automatically when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stride: Option<u64>,
    #[serde(default = "default_sample_limit")]
    pub sample_limit: u64,
}

fn default_sample_limit() -> u64 {
    DEFAULT_SAMPLE_LIMIT
}

impl ExperimentConfig {
    pub fn new(env: EnvModel, shield: ShieldSpec, horizon: u64, runs: u64, seed: u64, target: FairnessTarget) -> Self {
        Self {
            env,
            shield,
            horizon,
            runs,
            seed,
            target,
            stride: None,
            sample_limit: DEFAULT_SAMPLE_LIMIT,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.env.validate()?;
        if self.runs == 0 || self.horizon == 0 {
            return Err(Error::param("runs and horizon must be at least 1"));
        }
        if self.stride == Some(0) {
            return Err(Error::param("stride must be at least 1"));
        }
        let engine = self.shield.build()?;
        let two = engine.two_group_state().is_some();
        if two != self.env.is_two_group() {
            return Err(Error::param("shield and environment disagree on the number of groups"));
        }
        if self.target.domain != self.shield_domain(&engine) {
            return Err(Error::param("target and shield live on different domains"));
        }
        Ok(())
    }

    fn shield_domain(&self, engine: &ShieldEngine) -> crate::fairness::Domain {
        engine.zeta().domain()
    }

    /// Spacing of the recorded time grid.
    pub fn effective_stride(&self) -> u64 {
        if let Some(s) = self.stride {
            return s;
        }
        let samples = self.runs.saturating_mul(self.horizon);
        samples.div_ceil(self.sample_limit.max(1)).max(1)
    }

    /// Recorded times: every stride-th step, always including the horizon.
    pub fn grid(&self) -> Vec<u64> {
        let s = self.effective_stride();
        let mut g: Vec<u64> = (1..=self.horizon).filter(|t| t % s == 0).collect();
        if g.last() != Some(&self.horizon) {
            g.push(self.horizon);
        }
        if s > 1 && g.first() != Some(&1) {
            g.insert(0, 1);
        }
        g
    }
}

/// Per-run results on the recorded grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    /// Fairness value at each grid time (`NaN` when undefined).
    pub m: Vec<f64>,
    /// Violations counted up to each grid time.
    pub cum_violations: Vec<u64>,
    pub nu: Vec<f64>,
    /// Whether the fairness value at each grid time violates the target.
    pub violating: Vec<bool>,
    pub summary: RunSummary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub final_m: Option<f64>,
    pub nu: f64,
    pub interventions: u64,
    pub violations: u64,
    pub any_violation: bool,
}

/// Whether the value at time `t` counts as a violation.
#[inline]
pub fn is_violation(target: &FairnessTarget, t: u64, m: Option<f64>) -> bool {
    t >= target.burn_in.max(1) && m.is_some_and(|v| !target.running.contains(v))
}

/// Simulates replication `index` on the grid `grid` (sorted, within the
/// horizon).
pub fn simulate_run(cfg: &ExperimentConfig, index: u64, grid: &[u64]) -> Result<RunTrace> {
    let mut engine = cfg.shield.build()?;
    let mut env_rng = stream_rng(cfg.seed, index, ENV_STREAM);
    let mut shield_rng = stream_rng(cfg.seed, index, SHIELD_STREAM);
    let n = grid.len();
    let mut trace = RunTrace {
        m: Vec::with_capacity(n),
        cum_violations: Vec::with_capacity(n),
        nu: Vec::with_capacity(n),
        violating: Vec::with_capacity(n),
        summary: RunSummary {
            final_m: None,
            nu: 0.0,
            interventions: 0,
            violations: 0,
            any_violation: false,
        },
    };
    let mut next = grid.iter().copied().peekable();
    let mut violations = 0u64;
    let mut last: Option<StepRecord> = None;
    for t in 1..=cfg.horizon {
        let input = cfg.env.draw(t, &mut env_rng);
        let u: f64 = shield_rng.gen();
        let rec = engine.step(input, u)?;
        let bad = is_violation(&cfg.target, t, rec.m);
        violations += u64::from(bad);
        if next.peek() == Some(&t) {
            next.next();
            trace.m.push(rec.m.unwrap_or(f64::NAN));
            trace.cum_violations.push(violations);
            trace.nu.push(rec.nu);
            trace.violating.push(bad);
        }
        last = Some(rec);
    }
    trace.summary = RunSummary {
        final_m: last.and_then(|r| r.m),
        nu: engine.nu(),
        interventions: engine.interventions(),
        violations,
        any_violation: violations > 0,
    };
    Ok(trace)
}

/// Full step records of replication `index`.
pub fn simulate_trace(cfg: &ExperimentConfig, index: u64) -> Result<Vec<StepRecord>> {
    let xs = cfg.env.raw_stream(cfg.horizon, cfg.seed, index);
    let mut engine = cfg.shield.build()?;
    run_stream_with(&mut engine, &xs, cfg.seed, index)
}

fn run_stream_with(engine: &mut ShieldEngine, xs: &[Input], seed: u64, index: u64) -> Result<Vec<StepRecord>> {
    run_stream(engine, xs, derive_seed(seed, index, SHIELD_STREAM))
}

/// Empirical violation measures with standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Empirical {
    pub p_hat: f64,
    pub p_std_error: f64,
    pub e_hat: f64,
    pub e_std_error: f64,
    pub runs: u64,
}

fn empirical_from(counts: impl Iterator<Item = u64>) -> Empirical {
    let (mut n, mut any, mut sum, mut sq) = (0u64, 0u64, 0.0f64, 0.0f64);
    for c in counts {
        n += 1;
        any += u64::from(c > 0);
        sum += c as f64;
        sq += (c as f64) * (c as f64);
    }
    if n == 0 {
        return Empirical {
            p_hat: 0.0,
            p_std_error: 0.0,
            e_hat: 0.0,
            e_std_error: 0.0,
            runs: 0,
        };
    }
    let nf = n as f64;
    let p = any as f64 / nf;
    let e = sum / nf;
    let var = if n > 1 { ((sq - nf * e * e) / (nf - 1.0)).max(0.0) } else { 0.0 };
    Empirical {
        p_hat: p,
        p_std_error: (p * (1.0 - p) / nf).sqrt(),
        e_hat: e,
        e_std_error: (var / nf).sqrt(),
        runs: n,
    }
}

/// Violation measures over `[max(tau, 1), T]` of trajectories given as
/// fairness values `M_1, ..., M_T`.
pub fn empirical_violations(trajectories: &[Vec<Option<f64>>], target: &FairnessTarget) -> Empirical {
    empirical_from(trajectories.iter().map(|tr| {
        tr.iter()
            .enumerate()
            .filter(|(i, m)| is_violation(target, *i as u64 + 1, **m))
            .count() as u64
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub seed: u64,
    pub runs: u64,
    pub horizon: u64,
    pub stride: u64,
    pub times: Vec<u64>,
    pub q025: Vec<f64>,
    pub mean: Vec<f64>,
    pub q975: Vec<f64>,
    pub cum_violations_mean: Vec<f64>,
    pub cum_violations_sd: Vec<f64>,
    pub cost_mean: Vec<f64>,
    /// Fraction of runs whose fairness value violates the target at each time.
    pub violation_fraction: Vec<f64>,
    pub empirical: Empirical,
    pub per_run: Vec<RunSummary>,
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn run_ensemble(cfg: &ExperimentConfig) -> Result<EnsembleSummary> {
    cfg.validate()?;
    let grid = cfg.grid();
    let traces: Vec<RunTrace> = (0..cfg.runs)
        .into_par_iter()
        .map(|i| simulate_run(cfg, i, &grid))
        .collect::<Result<_>>()?;
    Ok(summarize(cfg, &grid, &traces))
}

fn summarize(cfg: &ExperimentConfig, grid: &[u64], traces: &[RunTrace]) -> EnsembleSummary {
    let g = grid.len();
    let n = traces.len() as f64;
    let mut s = EnsembleSummary {
        seed: cfg.seed,
        runs: cfg.runs,
        horizon: cfg.horizon,
        stride: cfg.effective_stride(),
        times: grid.to_vec(),
        q025: Vec::with_capacity(g),
        mean: Vec::with_capacity(g),
        q975: Vec::with_capacity(g),
        cum_violations_mean: Vec::with_capacity(g),
        cum_violations_sd: Vec::with_capacity(g),
        cost_mean: Vec::with_capacity(g),
        violation_fraction: Vec::with_capacity(g),
        empirical: empirical_from(traces.iter().map(|t| t.summary.violations)),
        per_run: traces.iter().map(|t| t.summary).collect(),
    };
    let mut col = Vec::with_capacity(traces.len());
    for j in 0..g {
        col.clear();
        col.extend(traces.iter().map(|t| t.m[j]).filter(|v| !v.is_nan()));
        col.sort_by(|a, b| a.total_cmp(b));
        let mean = if col.is_empty() {
            f64::NAN
        } else {
            col.iter().sum::<f64>() / col.len() as f64
        };
        s.q025.push(quantile_sorted(&col, 0.025));
        s.mean.push(mean);
        s.q975.push(quantile_sorted(&col, 0.975));
        let cm = traces.iter().map(|t| t.cum_violations[j] as f64).sum::<f64>() / n;
        let cv = if traces.len() > 1 {
            traces
                .iter()
                .map(|t| (t.cum_violations[j] as f64 - cm).powi(2))
                .sum::<f64>()
                / (n - 1.0)
        } else {
            0.0
        };
        s.cum_violations_mean.push(cm);
        s.cum_violations_sd.push(cv.sqrt());
        s.cost_mean.push(traces.iter().map(|t| t.nu[j]).sum::<f64>() / n);
        s.violation_fraction
            .push(traces.iter().filter(|t| t.violating[j]).count() as f64 / n);
    }
    s
}

/// Columns of the per-time CSV.
pub const ENSEMBLE_COLUMNS: [&str; 8] = [
    "t",
    "q025",
    "mean",
    "q975",
    "cum_violations_mean",
    "cum_violations_sd",
    "cost_mean",
    "violation_fraction",
];

/// Default column selection.
pub const DEFAULT_COLUMNS: [&str; 7] = [
    "t",
    "q025",
    "mean",
    "q975",
    "cum_violations_mean",
    "cum_violations_sd",
    "cost_mean",
];

pub fn write_ensemble_csv<W: Write>(s: &EnsembleSummary, columns: &[&str], mut out: W) -> Result<()> {
    for c in columns {
        if !ENSEMBLE_COLUMNS.contains(c) {
            return Err(Error::param(format!("unknown column '{c}'")));
        }
    }
    let io = |e: std::io::Error| Error::param(format!("write failed: {e}"));
    writeln!(out, "{}", columns.join(",")).map_err(io)?;
    for j in 0..s.times.len() {
        let row: Vec<String> = columns
            .iter()
            .map(|c| match *c {
                "t" => s.times[j].to_string(),
                "q025" => fmt_g12(s.q025[j]),
                "mean" => fmt_g12(s.mean[j]),
                "q975" => fmt_g12(s.q975[j]),
                "cum_violations_mean" => fmt_g12(s.cum_violations_mean[j]),
                "cum_violations_sd" => fmt_g12(s.cum_violations_sd[j]),
                "cost_mean" => fmt_g12(s.cost_mean[j]),
                _ => fmt_g12(s.violation_fraction[j]),
            })
            .collect();
        writeln!(out, "{}", row.join(",")).map_err(io)?;
    }
    Ok(())
}

/// One engine's results under common random numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineRow {
    pub shield: ShieldSpec,
    pub mean_final_m: f64,
    pub p_hat: f64,
    pub e_hat: f64,
    pub mean_interventions: f64,
    pub final_m: Vec<Option<f64>>,
    pub interventions: Vec<u64>,
}

/// Runs every engine on the same raw streams and intervention draws.
pub fn compare_engines(
    env: EnvModel,
    shields: &[ShieldSpec],
    horizon: u64,
    runs: u64,
    seed: u64,
    target: FairnessTarget,
) -> Result<Vec<EngineRow>> {
    shields
        .iter()
        .map(|&shield| {
            let cfg = ExperimentConfig {
                stride: Some(horizon.max(1)),
                ..ExperimentConfig::new(env, shield, horizon, runs, seed, target)
            };
            cfg.validate()?;
            let grid = [horizon];
            let sums: Vec<RunSummary> = (0..runs)
                .into_par_iter()
                .map(|i| simulate_run(&cfg, i, &grid).map(|t| t.summary))
                .collect::<Result<_>>()?;
            let emp = empirical_from(sums.iter().map(|s| s.violations));
            let finals: Vec<Option<f64>> = sums.iter().map(|s| s.final_m).collect();
            let defined: Vec<f64> = finals.iter().flatten().copied().collect();
            Ok(EngineRow {
                shield,
                mean_final_m: defined.iter().sum::<f64>() / defined.len().max(1) as f64,
                p_hat: emp.p_hat,
                e_hat: emp.e_hat,
                mean_interventions: sums.iter().map(|s| s.interventions as f64).sum::<f64>() / runs as f64,
                final_m: finals,
                interventions: sums.iter().map(|s| s.interventions).collect(),
            })
        })
        .collect()
}
