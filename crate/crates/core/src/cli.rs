//! Command-line front end: flag and config-file parsing, dispatch, output.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::escape::{
    escape, fit_scaling, geometric_indices, sandwich_bounds, escape_ulam_epsilon, sweep,
    EscapeOptions, EscapeReport, Hole, Method, Sandwich, ScalingFit, SweepTable, CSV_HEADER,
};
use crate::map::MapSpec;
use crate::montecarlo::{mc_escape_rate, survival_curve, McRate, SurvivalCurve};
use crate::verify::{run_all, Check};

#[derive(Debug, Parser)]
#[command(
    name = "parabolic-escape",
    version,
    about = "Escape rates of parabolic interval maps through holes at the neutral fixed point"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Escape rate through one hole.
    Escape(Flags),
    /// Escape rates over a range of Markov holes.
    Sweep(Flags),
    /// Sweep, then fit the shrinking-hole law.
    Fit(Flags),
    /// Markov-hole bounds for a hole [0, epsilon], next to the direct Ulam rate.
    Sandwich(Flags),
    /// Monte Carlo survival curve and fitted rate.
    Mc(Flags),
    /// Built-in oracle checks.
    Verify(Flags),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Escape,
    Sweep,
    Fit,
    Sandwich,
    Mc,
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum MapName {
    Pm,
    Lsv,
    Farey,
    Pwl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum MethodName {
    Induced,
    Ulam,
    Montecarlo,
}

impl From<MethodName> for Method {
    fn from(m: MethodName) -> Self {
        match m {
            MethodName::Induced => Method::InducedFormula,
            MethodName::Ulam => Method::UlamDirect,
            MethodName::Montecarlo => Method::MonteCarlo,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

/// Flags shared by all subcommands. A `--config` file uses the same names
/// (with underscores); flags given on the command line win.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Flags {
    /// JSON file with default values for the flags below.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub map: Option<MapName>,
    #[arg(long, allow_negative_numbers = true)]
    pub s: Option<f64>,
    /// `zipf`, `harmonic`, or a file of weights (JSON array or whitespace/comma separated).
    #[arg(long)]
    pub pwl_weights: Option<String>,
    /// `N`, `start:stop:geom` or `start:stop:step`.
    #[arg(long)]
    pub hole_index: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub epsilon: Option<f64>,
    #[arg(long, value_enum)]
    pub method: Option<MethodName>,
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub samples: Option<u64>,
    /// Largest time of the survival curve.
    #[arg(long)]
    pub tmax: Option<usize>,
    /// Monte Carlo fitting window `lo:hi`.
    #[arg(long)]
    pub window: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Also solve for the pressure root of the induced operator.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pressure_root: Option<bool>,
}

macro_rules! overlay {
    ($hi:ident, $lo:ident; $($f:ident),*) => {
        Flags { config: None, $($f: $hi.$f.or($lo.$f)),* }
    };
}

impl Flags {
    /// `self` where set, `base` elsewhere.
    pub fn over(self, base: Flags) -> Flags {
        overlay!(self, base; map, s, pwl_weights, hole_index, epsilon, method, grid, samples,
            tmax, window, seed, threads, output, format, pressure_root)
    }

    /// Reads `--config` (if any) and applies the command-line flags over it.
    pub fn merged(self) -> Result<Flags> {
        match self.config.clone() {
            None => Ok(self),
            Some(path) => {
                let text = fs::read_to_string(&path)
                    .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
                let file: Flags = serde_json::from_str(&text)
                    .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
                Ok(self.over(file))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RangeStep {
    /// Ratio `sqrt 2`.
    Geom,
    Linear(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HoleSpec {
    Index { n: usize },
    Range { start: usize, stop: usize, step: RangeStep },
    Epsilon { epsilon: f64 },
}

impl HoleSpec {
    /// Markov indices covered.
    pub fn indices(&self) -> Vec<usize> {
        match *self {
            HoleSpec::Index { n } => vec![n],
            HoleSpec::Range {
                start,
                stop,
                step: RangeStep::Geom,
            } => geometric_indices(start, stop),
            HoleSpec::Range {
                start,
                stop,
                step: RangeStep::Linear(k),
            } => (start..=stop).step_by(k).collect(),
            HoleSpec::Epsilon { .. } => vec![],
        }
    }
}

fn parse_usize(s: &str, what: &str) -> Result<usize> {
    s.trim()
        .parse()
        .map_err(|_| Error::Config(format!("{what}: cannot parse {s:?} as a non-negative integer")))
}

/// `N`, `start:stop:geom` or `start:stop:step`.
pub fn parse_hole_index(s: &str) -> Result<HoleSpec> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [n] => Ok(HoleSpec::Index {
            n: parse_usize(n, "hole index")?,
        }),
        [a, b, step] => {
            let (start, stop) = (parse_usize(a, "range start")?, parse_usize(b, "range stop")?);
            if start > stop || start == 0 {
                return Err(Error::Config(format!("bad hole-index range {s:?}")));
            }
            let step = if step.trim() == "geom" {
                RangeStep::Geom
            } else {
                match parse_usize(step, "range step")? {
                    0 => return Err(Error::Config("range step must be positive".into())),
                    k => RangeStep::Linear(k),
                }
            };
            Ok(HoleSpec::Range { start, stop, step })
        }
        _ => Err(Error::Config(format!(
            "hole index {s:?} is not N, start:stop:geom or start:stop:step"
        ))),
    }
}

pub fn parse_window(s: &str) -> Result<(usize, usize)> {
    match s.split_once(':') {
        Some((a, b)) => Ok((parse_usize(a, "window")?, parse_usize(b, "window")?)),
        None => Err(Error::Config(format!("window {s:?} is not lo:hi"))),
    }
}

fn read_weights(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    if let Ok(v) = serde_json::from_str::<Vec<f64>>(&text) {
        return Ok(v);
    }
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| Error::Config(format!("{}: bad weight {t:?}", path.display())))
        })
        .collect()
}

fn map_spec(f: &Flags) -> Result<MapSpec> {
    let need_s = |name: &str| {
        f.s.ok_or_else(|| Error::Config(format!("--map {name} needs --s")))
    };
    let name = f
        .map
        .ok_or_else(|| Error::Config("--map is required".into()))?;
    if name != MapName::Pwl && f.pwl_weights.is_some() {
        return Err(Error::Config("--pwl-weights only applies to --map pwl".into()));
    }
    Ok(match name {
        MapName::Pm => MapSpec::pomeau_manneville(need_s("pm")?),
        MapName::Lsv => MapSpec::lsv(need_s("lsv")?),
        MapName::Farey => {
            if f.s.is_some_and(|s| s != 1.0) {
                return Err(Error::Config("the Farey map has s = 1".into()));
            }
            MapSpec::farey()
        }
        MapName::Pwl => {
            let s = f.s.unwrap_or(1.0);
            match f.pwl_weights.as_deref() {
                None if s == 1.0 => MapSpec::pwl_harmonic(),
                None | Some("zipf") => MapSpec::pwl_zipf(s),
                Some("harmonic") => {
                    if s != 1.0 {
                        return Err(Error::Config("harmonic weights have s = 1".into()));
                    }
                    MapSpec::pwl_harmonic()
                }
                Some(path) => MapSpec::pwl_explicit(s, read_weights(Path::new(path))?),
            }
        }
    })
}

/// A validated run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub map: Option<MapSpec>,
    pub hole: Option<HoleSpec>,
    pub method: Method,
    pub grid: usize,
    pub samples: u64,
    pub n_max: usize,
    pub seed: u64,
    pub window: Option<(usize, usize)>,
    pub pressure_root: bool,
    pub threads: Option<usize>,
    pub output: Option<PathBuf>,
    pub format: Format,
}

impl RunConfig {
    pub fn from_flags(command: Command, flags: Flags) -> Result<Self> {
        let f = flags.merged()?;
        let defaults = EscapeOptions::default();
        let hole = match (&f.hole_index, f.epsilon) {
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "give either a hole index N or --epsilon, not both".into(),
                ))
            }
            (Some(s), None) => Some(parse_hole_index(s)?),
            (None, Some(e)) => Some(HoleSpec::Epsilon { epsilon: e }),
            (None, None) => None,
        };
        let map = if command == Command::Verify {
            None
        } else {
            Some(map_spec(&f)?)
        };
        match (command, &hole) {
            (Command::Verify, _) => {}
            (_, None) => {
                return Err(Error::Config("a hole is required (--hole-index or --epsilon)".into()))
            }
            (Command::Escape | Command::Mc, Some(HoleSpec::Range { .. })) => {
                return Err(Error::Config("this command takes a single hole".into()))
            }
            (Command::Sweep | Command::Fit, Some(HoleSpec::Epsilon { .. })) => {
                return Err(Error::Config("sweeps run over Markov hole indices".into()))
            }
            (Command::Sandwich, Some(h)) if !matches!(h, HoleSpec::Epsilon { .. }) => {
                return Err(Error::Config("sandwich needs --epsilon".into()))
            }
            _ => {}
        }
        if let Some(HoleSpec::Epsilon { epsilon }) = hole {
            if !(epsilon > 0.0 && epsilon < 1.0) {
                return Err(Error::Config(format!("epsilon = {epsilon} must lie in (0, 1)")));
            }
        }
        let method = match (command, f.method) {
            (Command::Mc, Some(m)) if m != MethodName::Montecarlo => {
                return Err(Error::Config("mc always uses the montecarlo method".into()))
            }
            (Command::Mc, _) => Method::MonteCarlo,
            (Command::Sandwich, Some(m)) if m != MethodName::Ulam => {
                return Err(Error::Config("sandwich compares against the ulam method".into()))
            }
            (Command::Sandwich, _) => Method::UlamDirect,
            (_, Some(m)) => m.into(),
            (_, None) if matches!(hole, Some(HoleSpec::Epsilon { .. })) => Method::UlamDirect,
            (_, None) => Method::InducedFormula,
        };
        let grid = f.grid.unwrap_or(defaults.grid);
        if grid < 4 {
            return Err(Error::Config(format!("grid = {grid} is too small")));
        }
        let samples = f.samples.unwrap_or(defaults.samples);
        let n_max = f.tmax.unwrap_or(defaults.n_max);
        if method == Method::MonteCarlo && (samples < 1000 || n_max < 10) {
            return Err(Error::Config("need --samples >= 1000 and --tmax >= 10".into()));
        }
        let window = f.window.as_deref().map(parse_window).transpose()?;
        if let Some((lo, hi)) = window {
            if !(lo >= 1 && lo + 2 <= hi && hi <= n_max) {
                return Err(Error::Config(format!(
                    "window {lo}:{hi} must satisfy 1 <= lo, lo + 2 <= hi <= tmax = {n_max}"
                )));
            }
        }
        if f.threads == Some(0) {
            return Err(Error::Config("--threads must be positive".into()));
        }
        let format = f.format.unwrap_or(match command {
            Command::Sweep | Command::Mc | Command::Verify => Format::Csv,
            _ => Format::Json,
        });
        Ok(RunConfig {
            command,
            map,
            hole,
            method,
            grid,
            samples,
            n_max,
            seed: f.seed.unwrap_or(defaults.seed),
            window,
            pressure_root: f.pressure_root.unwrap_or(false),
            threads: f.threads,
            output: f.output,
            format,
        })
    }

    pub fn options(&self) -> EscapeOptions {
        EscapeOptions {
            grid: self.grid,
            pressure_root: self.pressure_root,
            samples: self.samples,
            n_max: self.n_max,
            window: self.window,
            seed: self.seed,
            ..EscapeOptions::default()
        }
    }
}

impl Cli {
    pub fn into_config(self) -> Result<RunConfig> {
        let (cmd, flags) = match self.command {
            CliCommand::Escape(f) => (Command::Escape, f),
            CliCommand::Sweep(f) => (Command::Sweep, f),
            CliCommand::Fit(f) => (Command::Fit, f),
            CliCommand::Sandwich(f) => (Command::Sandwich, f),
            CliCommand::Mc(f) => (Command::Mc, f),
            CliCommand::Verify(f) => (Command::Verify, f),
        };
        RunConfig::from_flags(cmd, flags)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub fit: ScalingFit,
    pub table: SweepTable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichResult {
    pub bounds: Sandwich,
    pub direct: EscapeReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McResult {
    pub rate: McRate,
    pub report: EscapeReport,
    pub curve: SurvivalCurve,
}

/// Every result a run can produce.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunResult {
    Escape(EscapeReport),
    Sweep(SweepTable),
    Fit(FitResult),
    Sandwich(SandwichResult),
    Mc(McResult),
    Verify(Vec<Check>),
}

impl RunResult {
    /// False when some part of the run failed without aborting it.
    pub fn ok(&self) -> bool {
        match self {
            RunResult::Sweep(t) => t.failures.is_empty(),
            RunResult::Fit(r) => r.table.failures.is_empty(),
            RunResult::Verify(c) => c.iter().all(|c| c.pass),
            _ => true,
        }
    }
}

/// The JSON envelope: the resolved configuration next to its result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub config: RunConfig,
    pub result: RunResult,
}

/// Executes the pipeline a configuration asks for.
pub fn execute(cfg: &RunConfig) -> Result<RunResult> {
    let opts = cfg.options();
    if cfg.command == Command::Verify {
        return Ok(RunResult::Verify(run_all()));
    }
    let map = cfg
        .map
        .as_ref()
        .ok_or_else(|| Error::Config("no map".into()))?
        .build()?;
    let hole = cfg.hole.as_ref().expect("validated");
    let single = |h: &HoleSpec| match *h {
        HoleSpec::Index { n } => Hole::Markov(n),
        HoleSpec::Epsilon { epsilon } => Hole::Epsilon(epsilon),
        HoleSpec::Range { .. } => unreachable!("validated"),
    };
    Ok(match cfg.command {
        Command::Escape => RunResult::Escape(escape(&map, single(hole), cfg.method, &opts)?),
        Command::Sweep => RunResult::Sweep(sweep(&map, &hole.indices(), cfg.method, &opts)?),
        Command::Fit => {
            let table = sweep(&map, &hole.indices(), cfg.method, &opts)?;
            let fit = fit_scaling(&table.reports, map.s())?;
            RunResult::Fit(FitResult { fit, table })
        }
        Command::Sandwich => {
            let HoleSpec::Epsilon { epsilon } = *hole else {
                unreachable!("validated")
            };
            RunResult::Sandwich(SandwichResult {
                bounds: sandwich_bounds(&map, epsilon, &opts)?,
                direct: escape_ulam_epsilon(&map, epsilon, &opts)?,
            })
        }
        Command::Mc => {
            let h = single(hole);
            let report = escape(&map, h, Method::MonteCarlo, &opts)?;
            let curve = survival_curve(&map, h.edge(&map)?, opts.n_max, opts.samples, opts.seed)?;
            let window = opts.window.unwrap_or(((opts.n_max / 3).max(1), opts.n_max));
            let rate = mc_escape_rate(&curve, window)?;
            RunResult::Mc(McResult {
                rate,
                report,
                curve,
            })
        }
        Command::Verify => unreachable!(),
    })
}

fn f17(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_text(result: &RunResult) -> Result<String> {
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        match result {
            RunResult::Escape(r) => {
                w.write_record(CSV_HEADER)?;
                w.write_record(r.csv_record())?;
            }
            RunResult::Sweep(t) => {
                w.write_record(CSV_HEADER)?;
                for r in &t.reports {
                    w.write_record(r.csv_record())?;
                }
            }
            RunResult::Fit(r) => {
                w.write_record(["regime", "slope", "r_squared", "constant", "variation_top_decade", "rows"])?;
                let f = &r.fit;
                w.write_record([
                    serde_json::to_value(f.regime)?.as_str().unwrap_or("").to_string(),
                    f17(f.slope),
                    f17(f.r_squared),
                    f17(f.constant),
                    f17(f.variation_top_decade),
                    f.rows.to_string(),
                ])?;
            }
            RunResult::Sandwich(r) => {
                w.write_record(["epsilon", "N_eps", "lower", "upper", "direct"])?;
                let b = &r.bounds;
                w.write_record([
                    f17(b.epsilon),
                    b.n_eps.to_string(),
                    f17(b.lower),
                    f17(b.upper),
                    f17(r.direct.gamma_mu),
                ])?;
            }
            RunResult::Mc(r) => {
                drop(w);
                r.curve.write_csv(&mut buf)?;
                return Ok(String::from_utf8(buf).expect("csv is utf-8"));
            }
            RunResult::Verify(checks) => {
                drop(w);
                return Ok(verify_table(checks));
            }
        }
        w.flush()?;
    }
    Ok(String::from_utf8(buf).expect("csv is utf-8"))
}

/// Renders a result in the configured format.
pub fn render(cfg: &RunConfig, result: &RunResult) -> Result<String> {
    match cfg.format {
        Format::Json => {
            let rec = Record {
                config: cfg.clone(),
                result: result.clone(),
            };
            Ok(serde_json::to_string_pretty(&rec)? + "\n")
        }
        // verify has no table schema; its csv form is the plain report
        Format::Csv => csv_text(result),
    }
}

/// Human-readable verify table.
pub fn verify_table(checks: &[Check]) -> String {
    let mut s = String::new();
    for c in checks {
        s.push_str(&c.to_string());
        s.push('\n');
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    s.push_str(&format!("{} checks, {} failed\n", checks.len(), failed));
    s
}

/// Exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const COMPUTATION: i32 = 1;
    pub const CONFIG: i32 = 2;
    /// The run finished but some checks or sweep points failed.
    pub const PARTIAL: i32 = 3;
}

/// Machine-readable error line for stderr.
pub fn error_json(e: &Error) -> String {
    serde_json::json!({ "error": { "kind": e.kind(), "message": e.to_string() } }).to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flags() -> Flags {
        Flags {
            map: Some(MapName::Pwl),
            s: Some(1.0),
            hole_index: Some("2".into()),
            ..Flags::default()
        }
    }

    #[test]
    fn hole_index_syntax() {
        assert_eq!(parse_hole_index("7").unwrap(), HoleSpec::Index { n: 7 });
        let g = parse_hole_index("2:128:geom").unwrap();
        assert_eq!(g.indices().first(), Some(&2));
        assert_eq!(g.indices().last(), Some(&128));
        assert_eq!(parse_hole_index("2:10:4").unwrap().indices(), vec![2, 6, 10]);
        assert!(parse_hole_index("2:10").is_err());
        assert!(parse_hole_index("10:2:geom").is_err());
        assert!(parse_hole_index("2:10:0").is_err());
        assert!(parse_hole_index("x").is_err());
    }

    #[test]
    fn both_holes_rejected() {
        let f = Flags {
            epsilon: Some(0.1),
            ..flags()
        };
        let e = RunConfig::from_flags(Command::Escape, f).unwrap_err();
        assert!(matches!(e, Error::Config(_)));
    }

    #[test]
    fn defaults_follow_the_hole() {
        let c = RunConfig::from_flags(Command::Escape, flags()).unwrap();
        assert_eq!(c.method, Method::InducedFormula);
        assert_eq!(c.format, Format::Json);
        let f = Flags {
            hole_index: None,
            epsilon: Some(0.2),
            ..flags()
        };
        let c = RunConfig::from_flags(Command::Escape, f).unwrap();
        assert_eq!(c.method, Method::UlamDirect);
        assert_eq!(
            RunConfig::from_flags(Command::Sweep, flags()).unwrap().format,
            Format::Csv
        );
    }

    #[test]
    fn map_flags() {
        let f = Flags {
            map: Some(MapName::Lsv),
            s: None,
            ..flags()
        };
        assert!(RunConfig::from_flags(Command::Escape, f).is_err());
        let f = Flags {
            pwl_weights: Some("zipf".into()),
            s: Some(2.0),
            ..flags()
        };
        let c = RunConfig::from_flags(Command::Escape, f).unwrap();
        assert_eq!(c.map.unwrap(), MapSpec::pwl_zipf(2.0));
        let f = Flags {
            map: Some(MapName::Farey),
            s: Some(2.0),
            ..flags()
        };
        assert!(RunConfig::from_flags(Command::Escape, f).is_err());
    }

    #[test]
    fn flags_override_file() {
        let base = Flags {
            grid: Some(128),
            seed: Some(5),
            ..flags()
        };
        let top = Flags {
            grid: Some(256),
            ..Flags::default()
        };
        let m = top.over(base);
        assert_eq!(m.grid, Some(256));
        assert_eq!(m.seed, Some(5));
        assert_eq!(m.map, Some(MapName::Pwl));
    }

    #[test]
    fn escape_json_round_trips() {
        let c = RunConfig::from_flags(Command::Escape, flags()).unwrap();
        let r = execute(&c).unwrap();
        let text = render(&c, &r).unwrap();
        let back: Record = serde_json::from_str(&text).unwrap();
        assert_eq!(back.config, c);
        assert_eq!(back.result, r);
        let RunResult::Escape(rep) = r else { panic!() };
        assert!((rep.gamma_mu - 0.324_372_1).abs() < 1e-7);
    }

    #[test]
    fn window_validation() {
        let f = Flags {
            window: Some("50:40".into()),
            ..flags()
        };
        assert!(RunConfig::from_flags(Command::Mc, f).is_err());
        assert_eq!(parse_window("20:60").unwrap(), (20, 60));
    }
}
