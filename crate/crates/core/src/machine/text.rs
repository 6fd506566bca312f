//! `propp-config v1` text format.
//!
//! ```text
//! propp-config v1 parity=even
//! # optional comment lines
//! -2 5 L
//! 0 1 R
//! ```
//!
//! One line per site: position, chip count in decimal, rotor. Sites not
//! listed hold no chips and a right-pointing rotor. The writer lists exactly
//! the sites that differ from that default, in increasing position, and always
//! describes a time-0 configuration (see [`Configuration::rebased`]).

use num_bigint::BigInt;
use thiserror::Error;

use super::{make_config, Configuration, MachineError, ParityClass, Rotor};

pub const HEADER_PREFIX: &str = "propp-config v1";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormatError {
    #[error("missing or malformed header (expected `{HEADER_PREFIX} parity=<even|odd>`)")]
    Header,
    #[error("line {line}: {msg}")]
    Line { line: usize, msg: String },
    #[error(transparent)]
    Config(#[from] MachineError),
}

fn line_err(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Line {
        line,
        msg: msg.into(),
    }
}

pub fn parse_config(text: &str) -> Result<Configuration, FormatError> {
    let mut lines = text.lines().enumerate();
    let header = lines
        .by_ref()
        .find(|(_, l)| !l.trim().is_empty())
        .ok_or(FormatError::Header)?
        .1;
    let parity = match header.trim().strip_prefix(HEADER_PREFIX).map(str::trim) {
        Some("parity=even") => ParityClass::Even,
        Some("parity=odd") => ParityClass::Odd,
        _ => return Err(FormatError::Header),
    };
    let mut chips = Vec::new();
    let mut rotors = Vec::new();
    for (i, raw) in lines {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let n = i + 1;
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [x, count, rotor] = fields[..] else {
            return Err(line_err(n, "expected `<position> <chips> <R|L>`"));
        };
        let x: i64 = x.parse().map_err(|_| line_err(n, format!("bad position `{x}`")))?;
        let count: BigInt = count
            .parse()
            .map_err(|_| line_err(n, format!("bad chip count `{count}`")))?;
        let rotor = match rotor {
            "R" => Rotor::Right,
            "L" => Rotor::Left,
            other => return Err(line_err(n, format!("bad rotor `{other}`"))),
        };
        chips.push((x, count));
        rotors.push((x, rotor));
    }
    Ok(make_config(&chips, &rotors, parity)?)
}

pub fn write_config(c: &Configuration) -> String {
    write_config_with_comments(c, &[])
}

/// Writer with `# `-prefixed comment lines placed right after the header.
pub fn write_config_with_comments(c: &Configuration, comments: &[String]) -> String {
    let c = c.rebased();
    let mut out = format!("{HEADER_PREFIX} parity={}\n", c.parity_class().name());
    for line in comments {
        out.push_str("# ");
        out.push_str(line);
        out.push('\n');
    }
    for (x, n, r) in c.sites() {
        if n.bits() > 0 || r != Rotor::Right {
            out.push_str(&format!("{x} {n} {}\n", r.symbol()));
        }
    }
    out
}
