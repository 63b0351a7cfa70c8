//! The `tsl` command line: map ingestion, scenario generation, checking,
//! trace abstraction and OpenSCENARIO export.
//!
//! Exit codes: 0 success, 1 semantic failure (violations, malformed
//! network), 2 input error, 3 unsupported map feature.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand};
use thiserror::Error;
use tracing::{debug, info};

use tsl_core::domain::{PointId, RoadNetwork};
use tsl_core::facts::{parse_network_text, parse_scenarios, render_network, render_scenario};
use tsl_core::map::{abstract_network, abstract_trace, parse_opendrive, parse_trace_csv, AbstractionParams, MapError};
use tsl_core::osc::{emit_osc, OscError};
use tsl_core::reasoner::{expand, parse_request, render_result, Mode, ReasonerError};
use tsl_core::rules::{check_scenario, render_violations};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Semantic(String),
    #[error("{0}")]
    Unsupported(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Semantic(_) => 1,
            CliError::Input(_) => 2,
            CliError::Unsupported(_) => 3,
        }
    }
}

impl From<MapError> for CliError {
    fn from(e: MapError) -> Self {
        match e {
            MapError::Unsupported { .. } => CliError::Unsupported(e.to_string()),
            MapError::Defects(_) => CliError::Semantic(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<ReasonerError> for CliError {
    fn from(e: ReasonerError) -> Self {
        match e {
            ReasonerError::ThreadPool(_) => CliError::Semantic(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<OscError> for CliError {
    fn from(e: OscError) -> Self {
        CliError::Semantic(e.to_string())
    }
}

/// Settings read from a `key = value` file; flags override them.
#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub params: AbstractionParams,
    pub workers: usize,
    pub out: Option<PathBuf>,
    /// Accepted so one settings file can serve fixture randomization; the
    /// commands themselves are deterministic and ignore it.
    pub seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        Self { params: AbstractionParams::default(), workers: 1, out: None, seed: 0 }
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Config, CliError> {
        let mut c = Config::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |m: &str| CliError::Input(format!("config line {}: {m}", i + 1));
            let (k, v) = line.split_once('=').ok_or_else(|| bad("expected key = value"))?;
            let (k, v) = (k.trim(), v.trim());
            let num = || v.parse::<f64>().map_err(|_| bad(&format!("`{v}` is not a number")));
            match k {
                "step" => c.params.step = num()?,
                "crossing_tolerance" => c.params.crossing_tolerance = num()?,
                "corridor_factor" => c.params.corridor_factor = num()?,
                "min_overlap" => c.params.min_overlap = num()?,
                "half_width" => c.params.half_width = num()?,
                "workers" => c.workers = v.parse().map_err(|_| bad("workers must be a positive integer"))?,
                "out" => c.out = Some(PathBuf::from(v)),
                "seed" => c.seed = v.parse().map_err(|_| bad("seed must be an integer"))?,
                _ => return Err(bad(&format!("unknown key `{k}`"))),
            }
        }
        c.validate()?;
        Ok(c)
    }

    fn validate(&self) -> Result<(), CliError> {
        self.params.validate().map_err(CliError::Input)?;
        if self.workers == 0 {
            return Err(CliError::Input("workers must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Parser)]
#[command(name = "tsl", about = "Qualitative traffic scenario generation and checking")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// `key = value` settings file
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file (standard output if absent)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub workers: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compile an OpenDRIVE map into network facts
    Ingest {
        map: PathBuf,
        /// Also write `point,x,y,z` coordinates here
        #[arg(long)]
        coords: Option<PathBuf>,
    },
    /// Enumerate the scenarios of a request
    Generate {
        request: PathBuf,
        #[arg(long)]
        mode: Option<Mode>,
        #[arg(long)]
        horizon: Option<usize>,
    },
    /// Check scenarios against the rules
    Check {
        scenarios: PathBuf,
        /// Network facts, or a request file whose network is used
        network: PathBuf,
    },
    /// Abstract a trajectory CSV into a scenario
    Abstract { trace: PathBuf, map: PathBuf },
    /// Translate a scenario to OpenSCENARIO DSL
    Export {
        scenario: PathBuf,
        network: PathBuf,
        #[arg(long)]
        coords: Option<PathBuf>,
    },
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Network facts, falling back to the network part of a request file.
fn load_network(path: &Path) -> Result<Arc<RoadNetwork>, CliError> {
    let text = read(path)?;
    match parse_network_text(&text) {
        Ok(n) => Ok(Arc::new(n)),
        Err(e) => match parse_request(&text) {
            Ok(req) => Ok(req.network),
            Err(_) => Err(CliError::Input(format!("{}: {e}", path.display()))),
        },
    }
}

fn parse_coords(text: &str) -> Result<BTreeMap<PointId, (f64, f64, f64)>, CliError> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let bad = || CliError::Input(format!("coords line {}: expected point,x,y,z", i + 1));
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 4 {
            return Err(bad());
        }
        let p = PointId::new(f[0]).map_err(|_| bad())?;
        let n = |s: &str| s.parse::<f64>().map_err(|_| bad());
        out.insert(p, (n(f[1])?, n(f[2])?, n(f[3])?));
    }
    Ok(out)
}

/// Runs one command. The primary output goes to `--out` or `stdout`,
/// summaries and diagnostics to `stderr`.
pub fn run(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let mut config = match &cli.config {
        Some(p) => Config::parse(&read(p)?)?,
        None => Config::default(),
    };
    if let Some(w) = cli.workers {
        config.workers = w;
    }
    if cli.out.is_some() {
        config.out = cli.out.clone();
    }
    config.validate()?;
    debug!(?config, "configuration");

    let output = match &cli.command {
        Command::Ingest { map, coords } => {
            let model = parse_opendrive(&read(map)?)?;
            let compiled = abstract_network(&model, &config.params)?;
            if let Some(c) = coords {
                std::fs::write(c, compiled.coords_csv()).map_err(|e| CliError::Input(format!("{}: {e}", c.display())))?;
            }
            let mut text = compiled.metadata_lines().join("\n");
            text.push('\n');
            text.push_str(&render_network(&compiled.network));
            info!(lanes = compiled.network.lane_count(), points = compiled.network.point_count(), "ingested");
            text
        }
        Command::Generate { request, mode, horizon } => {
            let mut req = parse_request(&read(request)?).map_err(CliError::from)?;
            if let Some(m) = mode {
                req.mode = *m;
            }
            if let Some(h) = horizon {
                req.horizon = *h;
            }
            let res = expand(&req, config.workers)?;
            let _ = writeln!(
                stderr,
                "{} scenarios; expanded {}, pruned {}, shortest {:?}, {:.3}s",
                res.scenarios.len(),
                res.stats.expanded,
                res.stats.pruned,
                res.stats.shortest_len,
                res.stats.wall_time.as_secs_f64()
            );
            render_result(&res.scenarios)
        }
        Command::Check { scenarios, network } => {
            let n = load_network(network)?;
            let all = parse_scenarios(&read(scenarios)?, n).map_err(|e| CliError::Input(e.to_string()))?;
            let mut report = String::new();
            for (i, sc) in all.iter().enumerate() {
                let v = check_scenario(sc);
                if v.is_empty() {
                    continue;
                }
                if all.len() > 1 {
                    report.push_str(&format!("#scenario {i}\n"));
                }
                report.push_str(&render_violations(&v));
            }
            if !report.is_empty() {
                let _ = stdout.write_all(report.as_bytes());
                return Err(CliError::Semantic(format!("{} scenario(s) checked, violations found", all.len())));
            }
            let _ = writeln!(stderr, "{} scenario(s) ok", all.len());
            return Ok(());
        }
        Command::Abstract { trace, map } => {
            let model = parse_opendrive(&read(map)?)?;
            let compiled = abstract_network(&model, &config.params)?;
            let samples = parse_trace_csv(&read(trace)?)?;
            let sc = abstract_trace(&samples, &compiled)?;
            let _ = writeln!(stderr, "{} scenes", sc.horizon());
            render_scenario(&sc)
        }
        Command::Export { scenario, network, coords } => {
            let n = load_network(network)?;
            let mut all = parse_scenarios(&read(scenario)?, n).map_err(|e| CliError::Input(e.to_string()))?;
            if all.len() != 1 {
                return Err(CliError::Input(format!("expected one scenario, found {}", all.len())));
            }
            let coords = coords.as_deref().map(|p| read(p).and_then(|t| parse_coords(&t))).transpose()?;
            emit_osc(&all.remove(0), coords.as_ref())?.text
        }
    };
    match &config.out {
        Some(p) => std::fs::write(p, output).map_err(|e| CliError::Input(format!("{}: {e}", p.display()))),
        None => stdout.write_all(output.as_bytes()).map_err(|e| CliError::Input(e.to_string())),
    }
}

/// Parses arguments, runs, and returns the process exit code.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
