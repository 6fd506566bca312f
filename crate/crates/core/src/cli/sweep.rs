//! `proppwalk sweep`: a TOML grid of lower-bound experiments run on a worker pool.
//!
//! ```toml
//! experiment = "time"      # vertex | space | time | spacetime | l2
//! T = [64, 256, 1024]
//! output = "time.csv"      # relative to the spec file
//! precision = 12
//! ```
//!
//! `vertex` uses `y`; `space` uses `L`; `time` uses `T`; `spacetime` uses
//! `L` x `T`; `l2` uses `t` x `L` x `M` x `seeds`.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Deserialize;

use super::CliError;
use crate::discrepancy::{disc_space, disc_spacetime, disc_time, disc_vertex, l2_sum, DiscrepancyReport, Query};
use crate::forcing::{gen_l2_random, gen_space_lb, gen_spacetime_lb, gen_time_lb, gen_vertex_lb, SpaceTimeRegime};
use crate::numerics::{rational_to_decimal, Dyadic};

pub const LIMIT_Y: u64 = 200;
pub const LIMIT_L: u64 = 128;
pub const LIMIT_T: u64 = 4096;
pub const LIMIT_L2_T: u64 = 4096;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepSpec {
    experiment: String,
    #[serde(default)]
    y: Vec<u64>,
    #[serde(default, rename = "L")]
    l: Vec<u64>,
    #[serde(default, rename = "T")]
    t_big: Vec<u64>,
    #[serde(default)]
    t: Vec<u64>,
    #[serde(default, rename = "M")]
    m: Vec<u64>,
    #[serde(default)]
    seeds: Vec<u64>,
    output: String,
    #[serde(default = "default_precision")]
    precision: usize,
}

fn default_precision() -> usize {
    crate::discrepancy::DEFAULT_DIGITS
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Point {
    Vertex { y: u64 },
    Space { l: u64 },
    Time { t: u64 },
    SpaceTime { l: u64, t: u64 },
    L2 { t: u64, l: u64, m: u64, seed: u64 },
}

impl Point {
    fn params(&self) -> String {
        match *self {
            Point::Vertex { y } => format!("y={y}"),
            Point::Space { l } => format!("L={l}"),
            Point::Time { t } => format!("T={t}"),
            Point::SpaceTime { l, t } => format!("L={l};T={t}"),
            Point::L2 { t, l, m, seed } => format!("t={t};L={l};M={m};seed={seed}"),
        }
    }
}

fn within(name: &str, values: &[u64], limit: u64) -> Result<(), CliError> {
    match values.iter().find(|&&v| v == 0 || v > limit) {
        Some(v) => Err(CliError::Input(format!("{name} = {v} is outside 1..={limit}"))),
        None => Ok(()),
    }
}

fn grid(spec: &SweepSpec) -> Result<Vec<Point>, CliError> {
    let mut points = Vec::new();
    match spec.experiment.as_str() {
        "vertex" => {
            within("y", &spec.y, LIMIT_Y)?;
            points.extend(spec.y.iter().map(|&y| Point::Vertex { y }));
        }
        "space" => {
            within("L", &spec.l, LIMIT_L)?;
            points.extend(spec.l.iter().map(|&l| Point::Space { l }));
        }
        "time" => {
            within("T", &spec.t_big, LIMIT_T)?;
            points.extend(spec.t_big.iter().map(|&t| Point::Time { t }));
        }
        "spacetime" => {
            within("L", &spec.l, LIMIT_L)?;
            within("T", &spec.t_big, LIMIT_T)?;
            for &l in &spec.l {
                points.extend(spec.t_big.iter().map(|&t| Point::SpaceTime { l, t }));
            }
        }
        "l2" => {
            within("t", &spec.t, LIMIT_L2_T)?;
            within("L", &spec.l, LIMIT_L)?;
            within("M", &spec.m, 2 * LIMIT_L2_T)?;
            for &t in &spec.t {
                for &l in &spec.l {
                    for &m in &spec.m {
                        points.extend(spec.seeds.iter().map(|&seed| Point::L2 { t, l, m, seed }));
                    }
                }
            }
        }
        other => return Err(CliError::Input(format!("unknown experiment `{other}`"))),
    }
    if points.is_empty() {
        return Err(CliError::Input("the parameter grid is empty".into()));
    }
    points.sort();
    points.dedup();
    Ok(points)
}

struct Row {
    fields: [String; 8],
    normalized: String,
}

fn dyadic_fields(kind: &str, lo: i64, hi: i64, t0: u64, len: u64, v: &Dyadic, digits: usize) -> [String; 8] {
    [
        kind.to_string(),
        lo.to_string(),
        hi.to_string(),
        t0.to_string(),
        len.to_string(),
        v.mantissa().to_string(),
        v.exponent().to_string(),
        v.abs().to_decimal(digits),
    ]
}

fn report_row(report: DiscrepancyReport, digits: usize, scale: f64) -> Row {
    let rec = report.csv_record(digits);
    let fields: [String; 8] = rec.try_into().expect("eight columns");
    Row {
        fields,
        normalized: format!("{:.digits$}", report.value.abs().to_f64() / scale),
    }
}

fn run_point(p: Point, digits: usize) -> Result<Row, CliError> {
    Ok(match p {
        Point::Vertex { y } => {
            let g = gen_vertex_lb(y)?;
            let value = disc_vertex(&g.config, 0, g.t0);
            report_row(DiscrepancyReport { query: Query::Vertex { x: 0, t: g.t0 }, value }, digits, 1.0)
        }
        Point::Space { l } => {
            let g = gen_space_lb(l)?;
            let value = disc_space(&g.config, g.xs, g.t);
            let q = Query::Space { xs: g.xs, t: g.t };
            report_row(DiscrepancyReport { query: q, value }, digits, (l as f64).ln())
        }
        Point::Time { t } => {
            let g = gen_time_lb(t)?;
            let value = disc_time(&g.config, 0, g.s);
            let q = Query::Time { x: 0, s: g.s };
            report_row(DiscrepancyReport { query: q, value }, digits, (g.t_param as f64).sqrt())
        }
        Point::SpaceTime { l, t } => {
            let g = gen_spacetime_lb(l, t)?;
            let value = disc_spacetime(&g.config, g.xs, g.s);
            let root = (g.t_param as f64).sqrt();
            let scale = match g.regime {
                SpaceTimeRegime::Wide => g.t_param as f64 * (l as f64 / root).ln().max(f64::MIN_POSITIVE),
                SpaceTimeRegime::Narrow => l as f64 * root,
            };
            let q = Query::SpaceTime { xs: g.xs, s: g.s };
            report_row(DiscrepancyReport { query: q, value }, digits, scale)
        }
        Point::L2 { t, l, m, seed } => {
            if t % 2 != 0 {
                return Err(CliError::Input(format!("t = {t} must be even")));
            }
            let base = -((m + l) as i64) / 2;
            if base + 1 < -(t as i64) || base + (m + l) as i64 - 1 > t as i64 {
                return Err(CliError::Input(format!("L + M = {} does not fit in [-t, t]", l + m)));
            }
            let g = gen_l2_random(t, seed)?;
            let sum = l2_sum(&g.config, l, m, t, base).map_err(|e| CliError::Input(e.to_string()))?;
            let avg = sum.to_rational() / num_rational::BigRational::from_integer(m.into());
            Row {
                fields: dyadic_fields("l2sum", base + 1, base + l as i64, t, 1, &sum, digits),
                normalized: rational_to_decimal(&avg, digits),
            }
        }
    })
}

pub(super) fn cmd_sweep(path: &Path, err: &mut dyn Write) -> Result<(), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let spec: SweepSpec = toml::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let points = grid(&spec)?;
    let digits = spec.precision;
    let rows: Vec<(Point, Result<Row, CliError>)> =
        points.par_iter().map(|&p| (p, run_point(p, digits))).collect();

    let out = path.parent().unwrap_or(Path::new(".")).join(&spec.output);
    let file = std::fs::File::create(&out).map_err(|e| CliError::Output(format!("{}: {e}", out.display())))?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    let io = |e: csv::Error| CliError::Output(format!("{}: {e}", out.display()));
    let mut header = vec!["experiment", "params", "status"];
    header.extend(crate::discrepancy::CSV_HEADER);
    header.push("normalized");
    w.write_record(&header).map_err(io)?;
    for (p, row) in rows {
        let mut rec = vec![spec.experiment.clone(), p.params()];
        match row {
            Ok(r) => {
                rec.push("ok".into());
                rec.extend(r.fields);
                rec.push(r.normalized);
            }
            Err(e) => {
                let _ = writeln!(err, "warning: {} {}: {e}", spec.experiment, p.params());
                rec.push(format!("error: {e}"));
                rec.extend(std::iter::repeat_n(String::new(), 9));
            }
        }
        w.write_record(&rec).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Output(e.to_string()))?;
    Ok(())
}
