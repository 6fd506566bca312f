use std::io::Write;

use super::{SpaceInterval, TimeInterval};
use crate::numerics::Dyadic;

pub const CSV_HEADER: [&str; 8] = ["kind", "x_lo", "x_hi", "t0", "t_len", "exact_num", "exact_den_pow2", "decimal"];
pub const DEFAULT_DIGITS: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Query {
    Vertex { x: i64, t: u64 },
    Space { xs: SpaceInterval, t: u64 },
    Time { x: i64, s: TimeInterval },
    SpaceTime { xs: SpaceInterval, s: TimeInterval },
}

impl Query {
    pub fn kind(&self) -> &'static str {
        match self {
            Query::Vertex { .. } => "vertex",
            Query::Space { .. } => "space",
            Query::Time { .. } => "time",
            Query::SpaceTime { .. } => "spacetime",
        }
    }

    /// `(x_lo, x_hi, t0, t_len)`.
    pub fn extent(&self) -> (i64, i64, u64, u64) {
        match *self {
            Query::Vertex { x, t } => (x, x, t, 1),
            Query::Space { xs, t } => (xs.lo(), xs.hi(), t, 1),
            Query::Time { x, s } => (x, x, s.start(), s.len()),
            Query::SpaceTime { xs, s } => (xs.lo(), xs.hi(), s.start(), s.len()),
        }
    }

    /// Last time the query reads.
    pub fn horizon(&self) -> u64 {
        let (_, _, t0, len) = self.extent();
        t0 + len - 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiscrepancyReport {
    pub query: Query,
    pub value: Dyadic,
}

impl DiscrepancyReport {
    pub fn evaluate(c: &crate::machine::Configuration, query: Query) -> Self {
        let value = match query {
            Query::Vertex { x, t } => super::disc_vertex(c, x, t),
            Query::Space { xs, t } => super::disc_space(c, xs, t),
            Query::Time { x, s } => super::disc_time(c, x, s),
            Query::SpaceTime { xs, s } => super::disc_spacetime(c, xs, s),
        };
        DiscrepancyReport { query, value }
    }

    pub fn horizon(&self) -> u64 {
        self.query.horizon()
    }

    /// `|value|` rounded to `digits` places.
    pub fn abs_decimal(&self, digits: usize) -> String {
        self.value.abs().to_decimal(digits)
    }

    pub fn csv_record(&self, digits: usize) -> Vec<String> {
        let (lo, hi, t0, len) = self.query.extent();
        vec![
            self.query.kind().to_string(),
            lo.to_string(),
            hi.to_string(),
            t0.to_string(),
            len.to_string(),
            self.value.mantissa().to_string(),
            self.value.exponent().to_string(),
            self.abs_decimal(digits),
        ]
    }
}

pub fn write_reports_csv<W: Write>(out: W, reports: &[DiscrepancyReport], digits: usize) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in reports {
        w.write_record(r.csv_record(digits))?;
    }
    w.flush()?;
    Ok(())
}
