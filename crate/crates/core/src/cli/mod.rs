//! The `proppwalk` command line.
//!
//! Exit codes: 0 success, 1 output I/O failure, 2 bad input or usage,
//! 3 refused for exceeding the memory budget, 4 forcing verification failed.

mod sweep;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand};
use thiserror::Error;

use crate::discrepancy::{write_reports_csv, DiscrepancyReport, Query, SpaceInterval, TimeInterval};
use crate::forcing::{
    self, arrow_force, gen_l2_random, gen_space_lb, gen_spacetime_lb, gen_time_lb, gen_vertex_lb, memory_budget,
    parity_force, text::Prescription, ForceError,
};
use crate::machine::text::{parse_config, write_config_with_comments};
use crate::machine::{Configuration, Game};
use crate::numerics::{c1_bracket, rational_to_decimal};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Resource(String),
    #[error("{0}")]
    Verification(String),
    #[error("{0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Output(_) => 1,
            CliError::Input(_) => 2,
            CliError::Resource(_) => 3,
            CliError::Verification(_) => 4,
        }
    }
}

impl From<ForceError> for CliError {
    fn from(e: ForceError) -> Self {
        match e {
            ForceError::Budget { .. } => CliError::Resource(e.to_string()),
            ForceError::Verification { .. } => CliError::Verification(e.to_string()),
            ForceError::Window(_) | ForceError::Parameter(_) => CliError::Input(e.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "proppwalk", version, about = "Exact Propp machine simulation and discrepancy experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a configuration for T steps; writes the final configuration and `<OUT>.splits.csv`.
    Simulate {
        config: PathBuf,
        #[arg(long)]
        t: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Exact discrepancy of one query, as a CSV row on stdout.
    Disc(DiscArgs),
    /// Certified bracket on c1.
    C1 {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        ycut: u64,
        #[arg(long, default_value_t = 12)]
        digits: usize,
    },
    /// Build a configuration from a prescription file or a named lower-bound construction.
    #[command(group(ArgGroup::new("source").required(true).args(["prescription", "lowerbound"])))]
    Force {
        #[arg(long)]
        prescription: Option<PathBuf>,
        /// vertex | space | time | spacetime | l2
        #[arg(long)]
        lowerbound: Option<String>,
        /// Generator parameters such as `y=4` or `L=16 T=16`.
        params: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a TOML parameter grid and write one CSV.
    Sweep { spec: PathBuf },
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("query").required(true).args(["vertex", "space", "time", "box"])))]
struct DiscArgs {
    config: PathBuf,
    #[arg(long, value_names = ["X"], allow_negative_numbers = true)]
    vertex: Option<i64>,
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
    space: Option<Vec<i64>>,
    #[arg(long, num_args = 3, value_names = ["X", "T0", "LEN"], allow_negative_numbers = true)]
    time: Option<Vec<i64>>,
    #[arg(long = "box", num_args = 4, value_names = ["LO", "HI", "T0", "LEN"], allow_negative_numbers = true)]
    r#box: Option<Vec<i64>>,
    /// Time of a vertex or space query.
    #[arg(long)]
    t: Option<u64>,
    #[arg(long, default_value_t = crate::discrepancy::DEFAULT_DIGITS)]
    digits: usize,
}

/// Parses `std::env::args` and runs; returns the exit code.
pub fn run() -> i32 {
    run_with(std::env::args_os(), &mut std::io::stdout(), &mut std::io::stderr())
}

pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    match cmd {
        Command::Simulate { config, t, out: path } => cmd_simulate(&config, t, &path),
        Command::Disc(args) => cmd_disc(&args, out),
        Command::C1 { ycut, digits } => cmd_c1(ycut, digits, out),
        Command::Force {
            prescription,
            lowerbound,
            params,
            out: path,
        } => cmd_force(prescription.as_deref(), lowerbound.as_deref(), &params, &path, err),
        Command::Sweep { spec } => sweep::cmd_sweep(&spec, err),
    }
}

fn read_config(path: &Path) -> Result<Configuration, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))
}

/// Rough peak memory of running `c` for `t` steps with numbers of `extra_bits`
/// beyond the chip counts (the linear machine's denominators).
fn run_bytes(c: &Configuration, t: u64, extra_bits: u64) -> u64 {
    let (lo, hi) = c.window();
    let width = (hi - lo + 1).max(0) as u64 + 2 * t;
    let bits = c.total_chips().bits() + extra_bits;
    width * (bits / 8 + 48) * 3
}

fn check_budget(needed: u64) -> Result<(), CliError> {
    let budget = memory_budget();
    if needed > budget {
        return Err(CliError::Resource(format!(
            "estimated memory use of {needed} bytes exceeds the budget of {budget} bytes (raise it with {})",
            forcing::MEM_BUDGET_ENV
        )));
    }
    Ok(())
}

fn cmd_simulate(path: &Path, t: u64, out: &Path) -> Result<(), CliError> {
    let c = read_config(path)?;
    check_budget(run_bytes(&c, t, 0))?;
    let mut game = Game::new(&c);
    let log_path = splits_path(out);
    let file = fs::File::create(&log_path).map_err(|e| CliError::Output(format!("{}: {e}", log_path.display())))?;
    let mut log = csv::Writer::from_writer(std::io::BufWriter::new(file));
    let mut failure = None;
    let _ = log.write_record(["position", "time", "rotor"]);
    for _ in 0..t {
        game.step(|e| {
            if failure.is_none() {
                if let Err(err) = log.write_record([e.position.to_string(), e.time.to_string(), e.rotor.symbol().to_string()]) {
                    failure = Some(err);
                }
            }
        });
    }
    if let Some(e) = failure {
        return Err(CliError::Output(format!("{}: {e}", log_path.display())));
    }
    log.flush().map_err(|e| CliError::Output(format!("{}: {e}", log_path.display())))?;
    let comments = [format!("state after {t} steps of {}", path.display())];
    write_file(out, &write_config_with_comments(&game.snapshot(), &comments))
}

pub fn splits_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".splits.csv");
    PathBuf::from(name)
}

fn interval(lo: i64, hi: i64) -> Result<SpaceInterval, CliError> {
    SpaceInterval::new(lo, hi).map_err(|e| CliError::Input(e.to_string()))
}

fn times(t0: i64, len: i64) -> Result<TimeInterval, CliError> {
    if t0 < 0 || len < 0 {
        return Err(CliError::Input("times must be non-negative".into()));
    }
    TimeInterval::new(t0 as u64, len as u64).map_err(|e| CliError::Input(e.to_string()))
}

fn cmd_disc(a: &DiscArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let at = || a.t.ok_or_else(|| CliError::Input("--t is required for --vertex and --space".into()));
    let query = if let Some(x) = a.vertex {
        Query::Vertex { x, t: at()? }
    } else if let Some(v) = &a.space {
        Query::Space {
            xs: interval(v[0], v[1])?,
            t: at()?,
        }
    } else if let Some(v) = &a.time {
        Query::Time {
            x: v[0],
            s: times(v[1], v[2])?,
        }
    } else if let Some(v) = &a.r#box {
        Query::SpaceTime {
            xs: interval(v[0], v[1])?,
            s: times(v[2], v[3])?,
        }
    } else {
        unreachable!("clap requires one query")
    };
    if a.t.is_some() && matches!(query, Query::Time { .. } | Query::SpaceTime { .. }) {
        return Err(CliError::Input("--t only applies to --vertex and --space".into()));
    }
    let c = read_config(&a.config)?;
    check_budget(run_bytes(&c, query.horizon(), query.horizon()))?;
    let report = DiscrepancyReport::evaluate(&c, query);
    write_reports_csv(out, &[report], a.digits).map_err(|e| CliError::Output(e.to_string()))
}

fn cmd_c1(ycut: u64, digits: usize, out: &mut dyn Write) -> Result<(), CliError> {
    let b = c1_bracket(ycut).map_err(|e| CliError::Input(e.to_string()))?;
    let lo2 = rational_to_decimal(&b.lower, 2);
    let hi2 = rational_to_decimal(&b.upper, 2);
    let text = format!(
        "y_cut {ycut}\nlower {}\nupper {}\nwidth {}\nc1 {}\n",
        rational_to_decimal(&b.lower, digits),
        rational_to_decimal(&b.upper, digits),
        rational_to_decimal(&b.width(), digits),
        if lo2 == hi2 { lo2 } else { format!("in [{lo2}, {hi2}]") }
    );
    out.write_all(text.as_bytes()).map_err(|e| CliError::Output(e.to_string()))
}

/// `k=v` pairs, split on whitespace and commas.
fn parse_params(params: &[String]) -> Result<Vec<(String, u64)>, CliError> {
    let mut out = Vec::new();
    for item in params.iter().flat_map(|p| p.split([',', ' '])).filter(|s| !s.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| CliError::Input(format!("expected key=value, got `{item}`")))?;
        let v = v
            .parse()
            .map_err(|_| CliError::Input(format!("`{k}` must be a non-negative integer, got `{v}`")))?;
        out.push((k.to_string(), v));
    }
    Ok(out)
}

fn take(params: &[(String, u64)], key: &str) -> Result<u64, CliError> {
    params
        .iter()
        .find(|(k, _)| k == key)
        .map(|&(_, v)| v)
        .ok_or_else(|| CliError::Input(format!("missing parameter `{key}`")))
}

fn only(params: &[(String, u64)], keys: &[&str]) -> Result<(), CliError> {
    match params.iter().find(|(k, _)| !keys.contains(&k.as_str())) {
        Some((k, _)) => Err(CliError::Input(format!("unknown parameter `{k}`"))),
        None => Ok(()),
    }
}

/// A generated configuration with its provenance and measurement comments.
pub(crate) struct Built {
    pub config: Configuration,
    pub comments: Vec<String>,
    pub warning: Option<String>,
}

pub(crate) fn build_lowerbound(name: &str, params: &[(String, u64)]) -> Result<Built, CliError> {
    let built = match name {
        "vertex" => {
            only(params, &["y"])?;
            let g = gen_vertex_lb(take(params, "y")?)?;
            Built {
                comments: vec![g.sidecar(), format!("measure: vertex x=0 t={}", g.t0)],
                config: g.config,
                warning: None,
            }
        }
        "space" => {
            only(params, &["L"])?;
            let g = gen_space_lb(take(params, "L")?)?;
            Built {
                comments: vec![g.sidecar(), format!("measure: space X=[{}, {}] t={}", g.xs.lo(), g.xs.hi(), g.t)],
                config: g.config,
                warning: None,
            }
        }
        "time" => {
            only(params, &["T"])?;
            let g = gen_time_lb(take(params, "T")?)?;
            Built {
                comments: vec![g.sidecar(), format!("measure: time x=0 S=[{}, {}]", g.s.start(), g.s.last())],
                warning: g.warning(),
                config: g.config,
            }
        }
        "spacetime" => {
            only(params, &["L", "T"])?;
            let g = gen_spacetime_lb(take(params, "L")?, take(params, "T")?)?;
            let warning = g
                .rounded_from
                .map(|t| format!("T = {t} is not a perfect square; using T = {}", g.t_param));
            Built {
                comments: vec![
                    g.sidecar(),
                    format!(
                        "measure: box X=[{}, {}] S=[{}, {}]",
                        g.xs.lo(),
                        g.xs.hi(),
                        g.s.start(),
                        g.s.last()
                    ),
                ],
                warning,
                config: g.config,
            }
        }
        "l2" => {
            only(params, &["t", "seed"])?;
            let seed = params.iter().find(|(k, _)| k == "seed").map_or(0, |p| p.1);
            let g = gen_l2_random(take(params, "t")?, seed)?;
            Built {
                comments: vec![
                    g.sidecar(),
                    format!("measure: intervals inside [{}, {}] at t={}", g.region.lo(), g.region.hi(), g.t),
                ],
                config: g.config,
                warning: None,
            }
        }
        other => return Err(CliError::Input(format!("unknown generator `{other}`"))),
    };
    Ok(built)
}

fn cmd_force(
    prescription: Option<&Path>,
    lowerbound: Option<&str>,
    params: &[String],
    out: &Path,
    err: &mut dyn Write,
) -> Result<(), CliError> {
    let built = match (prescription, lowerbound) {
        (Some(path), None) => {
            if !params.is_empty() {
                return Err(CliError::Input("parameters only apply to --lowerbound".into()));
            }
            let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            let p = forcing::text::parse_prescription(&text)
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            let (config, kind) = match &p {
                Prescription::Arrows(p) => (arrow_force(p)?, "arrows"),
                Prescription::Parities(p) => (parity_force(p)?, "parities"),
            };
            Built {
                config,
                comments: vec![format!("generator: prescription params=kind={kind} seed=-")],
                warning: None,
            }
        }
        (None, Some(name)) => build_lowerbound(name, &parse_params(params)?)?,
        _ => unreachable!("clap requires exactly one source"),
    };
    if let Some(w) = &built.warning {
        let _ = writeln!(err, "warning: {w}");
    }
    write_file(out, &write_config_with_comments(&built.config, &built.comments))
}
