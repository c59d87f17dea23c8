//! Command-line front end. `main` only parses arguments and reports; the
//! commands live here so they can be driven from tests.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::continuous::{dirty_paper_lower, fading_lower, DirtyPaperParams, FadingParams, POWER_GRID};
use crate::error::{Error, Result};
use crate::model::{build_example1, build_example2, build_example3, read_model, roles, ProbingModel};
use crate::montecarlo::{empirical_cmi, rate_split_codec, sample_joint, split_rate, CodecConfig};
use crate::solver::{
    cutoff_point, grid_oracle_thm1, linear_grid, solve_thm1, solve_thm2_lower, solve_thm3, solve_thm4,
    sweep_with, thm1_joint, Argmax, SolveOptions, SolveResult, SweepCurve,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(name = "probecap", version, about = "Cost-capacity curves for channels with costly state probing")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve at one budget or over a grid of budgets.
    Solve(RunConfig),
    /// Smallest budget that already reaches the maximal rate.
    Cutoff(RunConfig),
    /// Check a full-CSI solution by sampling, optionally through the codec.
    Simulate(RunConfig),
    /// Compare the full-CSI solver with the exhaustive grid.
    Oracle(RunConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Example {
    Ex1,
    Ex2,
    Ex3,
    Dpc,
    Fading,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// `start:stop:count` with `count ≥ 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        linear_grid(self.start, self.stop, self.count)
    }
}

impl std::str::FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [start, stop, count] = parts[..] else {
            return Err(format!("expected start:stop:count, got `{s}`"));
        };
        let start: f64 = start.trim().parse().map_err(|e| format!("start: {e}"))?;
        let stop: f64 = stop.trim().parse().map_err(|e| format!("stop: {e}"))?;
        let count: usize = count.trim().parse().map_err(|e| format!("count: {e}"))?;
        if count < 2 || !(stop > start) {
            return Err("grid needs count ≥ 2 and stop > start".into());
        }
        Ok(GridSpec { start, stop, count })
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RunConfig {
    /// Builtin model.
    #[arg(long, value_enum, conflicts_with = "model", required_unless_present = "model")]
    pub example: Option<Example>,
    /// Model file.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Capacity expression (1-4); defaults to the natural one for the model.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
    pub theorem: Option<u8>,
    /// Single budget.
    #[arg(long, conflicts_with = "sweep", allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    /// Budget grid `start:stop:count`.
    #[arg(long)]
    pub sweep: Option<GridSpec>,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, default_value_t = 32)]
    pub multistarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 20_000)]
    pub max_iter: usize,
    /// Largest strategy or map enumeration allowed.
    #[arg(long, default_value_t = 4096)]
    pub strategy_cap: usize,
    /// Restrict the auxiliary alphabet size.
    #[arg(long)]
    pub u_cap: Option<usize>,
    /// Output file; a CSV gets a JSON sidecar next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Value tolerance of the cutoff search, in bits.
    #[arg(long, default_value_t = 1e-6)]
    pub cutoff_tol: f64,
    /// Samples drawn by `simulate`.
    #[arg(long, default_value_t = 1_000_000)]
    pub n: usize,
    /// Grid step of the oracle.
    #[arg(long, default_value_t = 0.01)]
    pub resolution: f64,
    /// Grid points per free power in the continuous bounds.
    #[arg(long, default_value_t = POWER_GRID)]
    pub power_grid: usize,
    /// Also run the rate-splitting codec in `simulate`.
    #[arg(long)]
    pub codec: bool,
    /// Codec rate in bits per symbol; defaults to 0.6 of the solved value.
    #[arg(long)]
    pub rate: Option<f64>,
    #[arg(long, default_value_t = 16)]
    pub blocklength: usize,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    /// Relative slack of the codec's typicality tests.
    #[arg(long, default_value_t = 1.0)]
    pub epsilon: f64,
}

impl RunConfig {
    /// Defaults for a builtin example, as if given on the command line.
    pub fn for_example(example: Example) -> Self {
        let mut cli = Cli::parse_from(["probecap", "solve", "--example", "ex1"]);
        let Command::Solve(cfg) = &mut cli.command else {
            unreachable!()
        };
        cfg.example = Some(example);
        cfg.clone()
    }

    pub fn options(&self) -> SolveOptions {
        SolveOptions {
            tol: self.tol,
            multistarts: self.multistarts,
            seed: self.seed,
            max_iter: self.max_iter,
            strategy_cap: self.strategy_cap,
            u_cap: self.u_cap,
        }
    }

    fn source(&self) -> Result<Source> {
        match (self.example, &self.model) {
            (Some(Example::Ex1), None) => Ok(Source::Discrete(build_example1()?)),
            (Some(Example::Ex2), None) => Ok(Source::Discrete(build_example2()?)),
            (Some(Example::Ex3), None) => Ok(Source::Discrete(build_example3()?)),
            (Some(Example::Dpc), None) => Ok(Source::Dpc),
            (Some(Example::Fading), None) => Ok(Source::Fading),
            (None, Some(path)) => Ok(Source::Discrete(read_model(path)?)),
            _ => Err(Error::Domain("give exactly one of --example and --model".into())),
        }
    }

    /// The theorem actually used: the flag, else the one matching the
    /// model's information pattern.
    pub fn theorem_for(&self, m: &ProbingModel) -> u8 {
        self.theorem.unwrap_or(match self.example {
            Some(Example::Ex2) => 2,
            _ if !m.is_encoder_only() => 4,
            _ if m.has_decoder_csi() => 1,
            _ => 3,
        })
    }

    fn budgets(&self, default: Option<GridSpec>) -> Result<Vec<f64>> {
        match (self.gamma, self.sweep, default) {
            (Some(g), _, _) => Ok(vec![g]),
            (None, Some(grid), _) | (None, None, Some(grid)) => Ok(grid.points()),
            _ => Err(Error::Domain("give --gamma or --sweep".into())),
        }
    }

    fn meta(&self, command: &str) -> serde_json::Value {
        json!({
            "tool": "probecap",
            "version": VERSION,
            "command": command,
            "seed": self.seed,
            "config": self,
        })
    }
}

enum Source {
    Discrete(ProbingModel),
    Dpc,
    Fading,
}

type PointFn<'a> = Box<dyn Fn(f64) -> Result<SolveResult> + Sync + 'a>;

fn point_solver<'a>(cfg: &RunConfig, source: &'a Source) -> (PointFn<'a>, String) {
    let opts = cfg.options();
    let grid = cfg.power_grid;
    match source {
        Source::Dpc => (
            Box::new(move |gamma| {
                dirty_paper_lower(
                    &DirtyPaperParams {
                        p: 1.0,
                        q: 1.0,
                        n: 1.0,
                        gamma,
                    },
                    grid,
                )
            }),
            "dirty-paper power splitting (lower bound)".into(),
        ),
        Source::Fading => (
            Box::new(move |gamma| {
                fading_lower(
                    &FadingParams {
                        p: 1.0,
                        n: 1.0,
                        b: 1.0,
                        g1: 0.01,
                        g2: 1.0,
                        gamma,
                    },
                    grid,
                )
            }),
            "fading power splitting (lower bound)".into(),
        ),
        Source::Discrete(m) => {
            let theorem = cfg.theorem_for(m);
            let label = match theorem {
                1 => "theorem 1 (full decoder CSI)",
                2 => "theorem 2 (non-causal, lower bound)",
                3 => "theorem 3 (causal)",
                _ => "theorem 4 (two-sided probing)",
            };
            let f: PointFn<'a> = match theorem {
                1 => Box::new(move |g| solve_thm1(m, g, &opts)),
                2 => Box::new(move |g| solve_thm2_lower(m, g, &opts)),
                3 => Box::new(move |g| solve_thm3(m, g, &opts)),
                _ => Box::new(move |g| solve_thm4(m, g, &opts)),
            };
            (f, label.into())
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}

fn write_curve(cfg: &RunConfig, curve: &SweepCurve, meta: serde_json::Value) -> Result<Vec<PathBuf>> {
    let Some(out) = &cfg.out else {
        return Ok(Vec::new());
    };
    let sidecar = serde_json::to_string_pretty(&curve.to_json(meta.clone())).map_err(|e| Error::Io(e.to_string()))?;
    match cfg.format {
        Format::Json => {
            write_file(out, &sidecar)?;
            Ok(vec![out.clone()])
        }
        Format::Csv => {
            let pairs: Vec<(&str, String)> = vec![
                ("tool", format!("probecap {VERSION}")),
                ("seed", cfg.seed.to_string()),
                ("method", meta["method"].as_str().unwrap_or_default().to_string()),
                ("config", serde_json::to_string(cfg).map_err(|e| Error::Io(e.to_string()))?),
            ];
            let json_path = out.with_extension("json");
            write_file(out, &curve.to_csv(&pairs))?;
            write_file(&json_path, &sidecar)?;
            Ok(vec![out.clone(), json_path])
        }
    }
}

fn write_report(cfg: &RunConfig, report: &serde_json::Value) -> Result<String> {
    let text = serde_json::to_string_pretty(report).map_err(|e| Error::Io(e.to_string()))? + "\n";
    if let Some(out) = &cfg.out {
        write_file(out, &text)?;
    }
    Ok(text)
}

/// Result of `solve`.
#[derive(Debug)]
pub struct SolveOutcome {
    pub curve: SweepCurve,
    pub method: String,
    /// One `C(Γ)=… @ cost …` line per solved point.
    pub summary: Vec<String>,
    /// Budgets that failed, with the reason.
    pub failed: Vec<(f64, String)>,
    pub written: Vec<PathBuf>,
}

pub fn cmd_solve(cfg: &RunConfig) -> Result<SolveOutcome> {
    let source = cfg.source()?;
    let budgets = cfg.budgets(None)?;
    let (solve, method) = point_solver(cfg, &source);
    let curve = sweep_with(&budgets, solve)?;
    let mut meta = cfg.meta("solve");
    meta["method"] = json!(method);
    let written = write_curve(cfg, &curve, meta)?;
    let mut summary = Vec::new();
    let mut failed = Vec::new();
    for i in 0..curve.len() {
        match &curve.errors[i] {
            Some(e) => failed.push((curve.gammas[i], e.clone())),
            None => summary.push(format!(
                "C({})={:.6} @ cost {:.6}",
                curve.gammas[i], curve.values[i], curve.costs[i]
            )),
        }
    }
    Ok(SolveOutcome {
        curve,
        method,
        summary,
        failed,
        written,
    })
}

#[derive(Debug, Serialize)]
pub struct CutoffReport {
    pub cutoff: f64,
    pub tol: f64,
    pub max_value: f64,
    pub method: String,
    pub curve: SweepCurve,
}

/// Default budget grid for the cutoff search.
pub const CUTOFF_GRID: GridSpec = GridSpec {
    start: 0.0,
    stop: 1.0,
    count: 21,
};

pub fn cmd_cutoff(cfg: &RunConfig) -> Result<CutoffReport> {
    if cfg.gamma.is_some() {
        return Err(Error::Domain("cutoff needs a grid; use --sweep".into()));
    }
    let source = cfg.source()?;
    let budgets = cfg.budgets(Some(CUTOFF_GRID))?;
    let (solve, method) = point_solver(cfg, &source);
    let curve = sweep_with(&budgets, &solve)?;
    let refine = |g: f64| solve(g).map(|r| r.value);
    let cutoff = cutoff_point(&curve, cfg.cutoff_tol, Some(&refine))?;
    let max_value = curve.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let report = CutoffReport {
        cutoff,
        tol: cfg.cutoff_tol,
        max_value,
        method,
        curve,
    };
    write_report(cfg, &json!({ "meta": cfg.meta("cutoff"), "report": report }))?;
    Ok(report)
}

fn discrete(cfg: &RunConfig) -> Result<ProbingModel> {
    match cfg.source()? {
        Source::Discrete(m) => Ok(m),
        _ => Err(Error::Unsupported("continuous examples only support solve and cutoff".into())),
    }
}

fn single_budget(cfg: &RunConfig) -> Result<f64> {
    match (cfg.gamma, cfg.sweep) {
        (Some(g), None) => Ok(g),
        _ => Err(Error::Domain("this command takes a single --gamma".into())),
    }
}

/// `simulate`: returns the JSON report, also written to `--out`.
pub fn cmd_simulate(cfg: &RunConfig) -> Result<serde_json::Value> {
    if cfg.n == 0 {
        return Err(Error::Domain("--n must be at least 1".into()));
    }
    let m = discrete(cfg)?;
    if cfg.theorem.is_some_and(|t| t != 1) {
        return Err(Error::Unsupported("simulation is only available for theorem 1".into()));
    }
    let gamma = single_budget(cfg)?;
    let solved = solve_thm1(&m, gamma, &cfg.options())?;
    let Argmax::Thm1 { pa, px } = &solved.argmax else {
        unreachable!("theorem 1 returns its own parts")
    };
    let joint = thm1_joint(&m, pa, px)?;
    let batch = sample_joint(&joint, cfg.n, cfg.seed)?;
    let est = empirical_cmi(&batch, &[roles::X], &[roles::Y], &[roles::S])?;
    let cells = (m.x.size() * m.y.size() * m.s.size()) as f64;
    let bias_bound = cells / (2.0 * cfg.n as f64 * std::f64::consts::LN_2);
    let mut report = json!({
        "meta": cfg.meta("simulate"),
        "gamma": gamma,
        "solver_value": solved.value,
        "cmi": est,
        "bias_bound": bias_bound,
        "within_bound": (est.estimate - solved.value).abs() <= 3.0 * est.stderr + bias_bound,
    });
    if cfg.codec {
        let rate = cfg.rate.unwrap_or(0.6 * solved.value);
        let (r1, r2) = split_rate(&m, pa, px, rate)?;
        let codec = CodecConfig {
            r1,
            r2,
            n: cfg.blocklength,
            epsilon: cfg.epsilon,
            trials: cfg.trials,
            ..Default::default()
        };
        report["codec"] = json!(rate_split_codec(&m, pa, px, &codec, cfg.seed)?);
    }
    write_report(cfg, &report)?;
    Ok(report)
}

/// `oracle`: solver against the exhaustive grid.
pub fn cmd_oracle(cfg: &RunConfig) -> Result<serde_json::Value> {
    let m = discrete(cfg)?;
    let gamma = single_budget(cfg)?;
    let solved = solve_thm1(&m, gamma, &cfg.options())?;
    let oracle = grid_oracle_thm1(&m, gamma, cfg.resolution)?;
    let report = json!({
        "meta": cfg.meta("oracle"),
        "gamma": gamma,
        "resolution": cfg.resolution,
        "solver_value": solved.value,
        "oracle_value": oracle.value,
        "gap": solved.value - oracle.value,
    });
    write_report(cfg, &report)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_spec_parsing() {
        let g: GridSpec = "0:1:21".parse().unwrap();
        assert_eq!(g.points().len(), 21);
        assert!("0:1:1".parse::<GridSpec>().is_err());
        assert!("1:0:5".parse::<GridSpec>().is_err());
        assert!("0:1".parse::<GridSpec>().is_err());
    }

    #[test]
    fn example_defaults() {
        let cfg = RunConfig::for_example(Example::Ex2);
        assert_eq!(cfg.example, Some(Example::Ex2));
        assert_eq!(cfg.theorem_for(&build_example2().unwrap()), 2);
        assert_eq!(cfg.seed, 0);
    }

    #[test]
    fn requires_a_source() {
        assert!(Cli::try_parse_from(["probecap", "solve", "--gamma", "0.5"]).is_err());
        assert!(Cli::try_parse_from(["probecap", "solve", "--example", "ex1", "--model", "m.txt"]).is_err());
    }

    #[test]
    fn simulate_rejects_zero_samples() {
        let mut cfg = RunConfig::for_example(Example::Ex1);
        cfg.gamma = Some(1.0);
        cfg.n = 0;
        assert!(cmd_simulate(&cfg).is_err());
    }
}
