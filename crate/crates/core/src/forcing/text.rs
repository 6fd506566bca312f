//! `propp-prescription v1` text format.
//!
//! ```text
//! propp-prescription v1 kind=arrows variant=even x_lo=-6 x_hi=6 t_hi=6 shape=rect
//! 0 2 L
//! 0 4 L
//! ```
//!
//! Arrow tables list `x t R|L`, parity tables `x t 0|1`; parity tables may
//! also carry `rotor x R|L` lines for the initial rotors. Cells not listed
//! are `R` (arrows) or `0` (parities). `shape` defaults to `rect`.

use std::collections::HashMap;

use thiserror::Error;

use super::{ForceError, ForcingWindow, ParityPrescription, RotorPrescription, WindowShape};
use crate::machine::{ParityClass, Rotor};

pub const PRESCRIPTION_HEADER: &str = "propp-prescription v1";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PrescriptionFormatError {
    #[error("malformed header: {0}")]
    Header(String),
    #[error("line {line}: {msg}")]
    Line { line: usize, msg: String },
    #[error(transparent)]
    Window(#[from] ForceError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Prescription {
    Arrows(RotorPrescription),
    Parities(ParityPrescription),
}

fn line_err(line: usize, msg: impl Into<String>) -> PrescriptionFormatError {
    PrescriptionFormatError::Line { line, msg: msg.into() }
}

fn rotor(s: &str) -> Option<Rotor> {
    match s {
        "R" => Some(Rotor::Right),
        "L" => Some(Rotor::Left),
        _ => None,
    }
}

pub fn parse_prescription(text: &str) -> Result<Prescription, PrescriptionFormatError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| {
        let l = l.trim();
        !l.is_empty() && !l.starts_with('#')
    });
    let (_, header) = lines.next().ok_or_else(|| PrescriptionFormatError::Header("empty input".into()))?;
    let rest = header
        .trim()
        .strip_prefix(PRESCRIPTION_HEADER)
        .ok_or_else(|| PrescriptionFormatError::Header(format!("expected `{PRESCRIPTION_HEADER}`")))?;
    let mut fields = HashMap::new();
    for kv in rest.split_whitespace() {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| PrescriptionFormatError::Header(format!("bad field `{kv}`")))?;
        fields.insert(k, v);
    }
    let field = |k: &str| fields.get(k).copied().ok_or_else(|| PrescriptionFormatError::Header(format!("missing `{k}`")));
    let num = |k: &str| -> Result<i64, PrescriptionFormatError> {
        let v = field(k)?;
        v.parse().map_err(|_| PrescriptionFormatError::Header(format!("bad `{k}={v}`")))
    };
    let arrows = match field("kind")? {
        "arrows" => true,
        "parities" => false,
        other => return Err(PrescriptionFormatError::Header(format!("unknown kind `{other}`"))),
    };
    let class = match field("variant")? {
        "even" => ParityClass::Even,
        "odd" => ParityClass::Odd,
        other => return Err(PrescriptionFormatError::Header(format!("unknown variant `{other}`"))),
    };
    let shape = match fields.get("shape").copied().unwrap_or("rect") {
        "rect" => WindowShape::Rect,
        "cone" => WindowShape::Cone,
        other => return Err(PrescriptionFormatError::Header(format!("unknown shape `{other}`"))),
    };
    let t_hi = num("t_hi")?;
    if t_hi < 0 {
        return Err(PrescriptionFormatError::Header("t_hi must be non-negative".into()));
    }
    let window = ForcingWindow::new(num("x_lo")?, num("x_hi")?, t_hi as u64, shape)?;

    let mut cells: HashMap<(i64, u64), bool> = HashMap::new();
    let mut rotors = Vec::new();
    for (i, raw) in lines {
        let n = i + 1;
        let parts: Vec<&str> = raw.split_whitespace().collect();
        if let ["rotor", x, r] = parts[..] {
            if arrows {
                return Err(line_err(n, "`rotor` lines belong to parity tables"));
            }
            let x: i64 = x.parse().map_err(|_| line_err(n, format!("bad position `{x}`")))?;
            let r = rotor(r).ok_or_else(|| line_err(n, format!("bad rotor `{r}`")))?;
            rotors.push((x, r));
            continue;
        }
        let [x, t, v] = parts[..] else {
            return Err(line_err(n, "expected `<x> <t> <value>`"));
        };
        let x: i64 = x.parse().map_err(|_| line_err(n, format!("bad position `{x}`")))?;
        let t: u64 = t.parse().map_err(|_| line_err(n, format!("bad time `{t}`")))?;
        if !window.contains(x, t) || !class.admits(x, t) {
            return Err(line_err(n, format!("cell ({x}, {t}) is outside the window or parity class")));
        }
        let value = if arrows {
            rotor(v).ok_or_else(|| line_err(n, format!("bad rotor `{v}`")))? == Rotor::Left
        } else {
            match v {
                "0" => false,
                "1" => true,
                _ => return Err(line_err(n, format!("bad parity `{v}`"))),
            }
        };
        if cells.insert((x, t), value).is_some() {
            return Err(line_err(n, format!("cell ({x}, {t}) listed twice")));
        }
    }
    let value = |x, t| cells.get(&(x, t)).copied().unwrap_or(false);
    Ok(if arrows {
        Prescription::Arrows(RotorPrescription::from_fn(class, window, |x, t| {
            if value(x, t) { Rotor::Left } else { Rotor::Right }
        }))
    } else {
        let mut p = ParityPrescription::from_fn(class, window, value);
        for (x, r) in rotors {
            p.set_rotor(x, r);
        }
        Prescription::Parities(p)
    })
}

fn header(kind: &str, class: ParityClass, w: ForcingWindow) -> String {
    format!(
        "{PRESCRIPTION_HEADER} kind={kind} variant={} x_lo={} x_hi={} t_hi={} shape={}\n",
        class.name(),
        w.x_lo(),
        w.x_hi(),
        w.t_hi(),
        w.shape().name()
    )
}

/// Writes every non-default cell.
pub fn write_prescription(p: &Prescription) -> String {
    match p {
        Prescription::Arrows(p) => {
            let mut out = header("arrows", p.class(), p.window());
            for (x, t, r) in p.cells().filter(|c| c.2 == Rotor::Left) {
                out.push_str(&format!("{x} {t} {}\n", r.symbol()));
            }
            out
        }
        Prescription::Parities(p) => {
            let mut out = header("parities", p.class(), p.window());
            for (x, r) in p.rotors() {
                out.push_str(&format!("rotor {x} {}\n", r.symbol()));
            }
            for (x, t, _) in p.cells().filter(|c| c.2) {
                out.push_str(&format!("{x} {t} 1\n"));
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        let w = ForcingWindow::cone(-2, 3, 5).unwrap();
        let a = RotorPrescription::from_fn(ParityClass::Odd, w, |x, t| {
            if (x + 2 * t as i64) % 3 == 0 { Rotor::Left } else { Rotor::Right }
        });
        let a = Prescription::Arrows(a);
        assert_eq!(parse_prescription(&write_prescription(&a)).unwrap(), a);
        let mut p = ParityPrescription::from_fn(ParityClass::Even, w, |x, t| (x * t as i64) % 4 == 1);
        p.set_rotor(-9, Rotor::Left);
        let p = Prescription::Parities(p);
        assert_eq!(parse_prescription(&write_prescription(&p)).unwrap(), p);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(parse_prescription("nope"), Err(PrescriptionFormatError::Header(_))));
        let head = "propp-prescription v1 kind=parities variant=even x_lo=0 x_hi=4 t_hi=3\n";
        assert!(matches!(
            parse_prescription(&format!("{head}1 0 1\n")),
            Err(PrescriptionFormatError::Line { line: 2, .. })
        ));
        assert!(parse_prescription(&format!("{head}9 1 1\n")).is_err());
        assert!(parse_prescription(&format!("{head}2 0 1\n2 0 0\n")).is_err());
        assert!(parse_prescription(&format!("{head}# note\nrotor 3 L\n2 0 1\n")).is_ok());
    }
}
