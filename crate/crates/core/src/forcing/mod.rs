//! Building initial configurations whose games follow a prescribed table of
//! rotor directions or pile parities.
//!
//! Stage `s` adds piles of `2^s` chips. Such a pile splits evenly for `s`
//! steps, so it leaves every earlier parity alone and shifts the parities at
//! time `s` by a row of Pascal's triangle mod 2. Stages run until the last
//! prescribed row, which settles the table on its window; cells outside the
//! window are left to chance.

mod engine;
mod generators;
pub mod reference;
pub mod text;

pub use generators::{
    gen_l2_random, gen_space_lb, gen_spacetime_lb, gen_time_lb, gen_vertex_lb, L2Random, RandomRotorPlan, SpaceLb,
    SpaceTimeLb, SpaceTimeRegime, TimeLb, VertexLb,
};

use std::collections::BTreeMap;

use thiserror::Error;

use crate::machine::{Configuration, Game, ParityClass, Rotor};

pub const MEM_BUDGET_ENV: &str = "PROPPWALK_MEM_BUDGET";
pub const DEFAULT_MEM_BUDGET: u64 = 1 << 30;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ForceError {
    #[error("invalid window: {0}")]
    Window(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("estimated memory use of {needed} bytes exceeds the budget of {budget} bytes (raise it with {MEM_BUDGET_ENV})")]
    Budget { needed: u64, budget: u64 },
    #[error("verification failed at position {x}, time {t}")]
    Verification { x: i64, t: u64 },
}

/// Budget from `PROPPWALK_MEM_BUDGET` (bytes), else [`DEFAULT_MEM_BUDGET`].
pub fn memory_budget() -> u64 {
    std::env::var(MEM_BUDGET_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_MEM_BUDGET)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ForceOptions {
    pub mem_budget: u64,
}

impl Default for ForceOptions {
    fn default() -> Self {
        ForceOptions {
            mem_budget: memory_budget(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WindowShape {
    /// `x_lo <= x <= x_hi` on every row.
    Rect,
    /// Row `t` is `[x_lo - (t_hi - t), x_hi + (t_hi - t)]`: everything that can
    /// reach the top row.
    Cone,
}

impl WindowShape {
    pub fn name(self) -> &'static str {
        match self {
            WindowShape::Rect => "rect",
            WindowShape::Cone => "cone",
        }
    }
}

/// Rows `0..=t_hi` of space-time.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ForcingWindow {
    x_lo: i64,
    x_hi: i64,
    t_hi: u64,
    shape: WindowShape,
}

impl ForcingWindow {
    pub fn new(x_lo: i64, x_hi: i64, t_hi: u64, shape: WindowShape) -> Result<Self, ForceError> {
        if x_lo > x_hi {
            return Err(ForceError::Window(format!("x_lo = {x_lo} exceeds x_hi = {x_hi}")));
        }
        Ok(ForcingWindow { x_lo, x_hi, t_hi, shape })
    }

    pub fn rect(x_lo: i64, x_hi: i64, t_hi: u64) -> Result<Self, ForceError> {
        Self::new(x_lo, x_hi, t_hi, WindowShape::Rect)
    }

    pub fn cone(x_lo: i64, x_hi: i64, t_hi: u64) -> Result<Self, ForceError> {
        Self::new(x_lo, x_hi, t_hi, WindowShape::Cone)
    }

    /// Every cell that can influence `[lo, hi]` at time `t`, up to time `t - 1`.
    pub fn cone_below(lo: i64, hi: i64, t: u64) -> Result<Self, ForceError> {
        if t == 0 {
            return Err(ForceError::Window("no rows below time 0".into()));
        }
        Self::cone(lo - 1, hi + 1, t - 1)
    }

    pub fn x_lo(&self) -> i64 {
        self.x_lo
    }

    pub fn x_hi(&self) -> i64 {
        self.x_hi
    }

    pub fn t_hi(&self) -> u64 {
        self.t_hi
    }

    pub fn shape(&self) -> WindowShape {
        self.shape
    }

    pub fn row(&self, t: u64) -> (i64, i64) {
        match self.shape {
            WindowShape::Rect => (self.x_lo, self.x_hi),
            WindowShape::Cone => {
                let slack = self.t_hi.saturating_sub(t) as i64;
                (self.x_lo - slack, self.x_hi + slack)
            }
        }
    }

    pub fn contains(&self, x: i64, t: u64) -> bool {
        let (lo, hi) = self.row(t);
        t <= self.t_hi && lo <= x && x <= hi
    }

    /// First cell of row `t` admitted by `class`, and the number of such cells.
    fn row_cells(&self, class: ParityClass, t: u64) -> (i64, usize) {
        let (lo, hi) = self.row(t);
        let first = if class.admits(lo, t) { lo } else { lo + 1 };
        let count = if first > hi { 0 } else { ((hi - first) / 2 + 1) as usize };
        (first, count)
    }

    fn tabulate<V>(&self, class: ParityClass, mut f: impl FnMut(i64, u64) -> V) -> Vec<(i64, Vec<V>)> {
        (0..=self.t_hi)
            .map(|t| {
                let (first, count) = self.row_cells(class, t);
                (first, (0..count).map(|k| f(first + 2 * k as i64, t)).collect())
            })
            .collect()
    }
}

fn lookup<V: Copy>(rows: &[(i64, Vec<V>)], x: i64, t: u64) -> Option<V> {
    let (first, vals) = rows.get(t as usize)?;
    let d = x - first;
    if d < 0 || d % 2 != 0 {
        return None;
    }
    vals.get((d / 2) as usize).copied()
}

/// Required rotor directions `rho(x, t)` on the cells of a window that the
/// parity class can occupy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RotorPrescription {
    class: ParityClass,
    window: ForcingWindow,
    rows: Vec<(i64, Vec<Rotor>)>,
}

impl RotorPrescription {
    pub fn from_fn(class: ParityClass, window: ForcingWindow, f: impl FnMut(i64, u64) -> Rotor) -> Self {
        let rows = window.tabulate(class, f);
        RotorPrescription { class, window, rows }
    }

    pub fn class(&self) -> ParityClass {
        self.class
    }

    pub fn window(&self) -> ForcingWindow {
        self.window
    }

    pub fn get(&self, x: i64, t: u64) -> Option<Rotor> {
        lookup(&self.rows, x, t)
    }

    pub fn cells(&self) -> impl Iterator<Item = (i64, u64, Rotor)> + '_ {
        cells(&self.rows)
    }

    /// The pile parities forced by the flips `rho(x, t) != rho(x, t + 2)`.
    pub fn induced_parities(&self) -> Option<ParityPrescription> {
        let t_hi = self.window.t_hi.checked_sub(2)?;
        let window = ForcingWindow { t_hi, ..self.window };
        let window = match window.shape {
            // the cone keeps its slope with the top two rows removed
            WindowShape::Cone => ForcingWindow {
                x_lo: window.x_lo - 2,
                x_hi: window.x_hi + 2,
                ..window
            },
            WindowShape::Rect => window,
        };
        let mut p = ParityPrescription::from_fn(self.class, window, |x, t| {
            self.get(x, t).zip(self.get(x, t + 2)).is_some_and(|(a, b)| a != b)
        });
        p.rotors = self.initial_rotors();
        Some(p)
    }

    /// `rho(x, 0)` and `rho(x, 1)`: the rotors before anything can flip them.
    pub fn initial_rotors(&self) -> BTreeMap<i64, Rotor> {
        self.rows.iter().take(2).flat_map(|(first, vals)| {
            vals.iter().enumerate().map(move |(k, &r)| (first + 2 * k as i64, r))
        })
        .collect()
    }
}

/// Required pile parities `pi(x, t)` (true = odd) plus the initial rotors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParityPrescription {
    class: ParityClass,
    window: ForcingWindow,
    rows: Vec<(i64, Vec<bool>)>,
    rotors: BTreeMap<i64, Rotor>,
}

impl ParityPrescription {
    pub fn from_fn(class: ParityClass, window: ForcingWindow, f: impl FnMut(i64, u64) -> bool) -> Self {
        let rows = window.tabulate(class, f);
        ParityPrescription {
            class,
            window,
            rows,
            rotors: BTreeMap::new(),
        }
    }

    /// Initial rotor at `x`; positions never set keep the default `Right`.
    pub fn set_rotor(&mut self, x: i64, r: Rotor) {
        if r == Rotor::Right {
            self.rotors.remove(&x);
        } else {
            self.rotors.insert(x, r);
        }
    }

    pub fn rotor(&self, x: i64) -> Rotor {
        self.rotors.get(&x).copied().unwrap_or_default()
    }

    pub fn rotors(&self) -> &BTreeMap<i64, Rotor> {
        &self.rotors
    }

    pub fn class(&self) -> ParityClass {
        self.class
    }

    pub fn window(&self) -> ForcingWindow {
        self.window
    }

    pub fn get(&self, x: i64, t: u64) -> Option<bool> {
        lookup(&self.rows, x, t)
    }

    pub fn cells(&self) -> impl Iterator<Item = (i64, u64, bool)> + '_ {
        cells(&self.rows)
    }

    pub(crate) fn rows(&self) -> &[(i64, Vec<bool>)] {
        &self.rows
    }
}

fn cells<V: Copy>(rows: &[(i64, Vec<V>)]) -> impl Iterator<Item = (i64, u64, V)> + '_ {
    rows.iter()
        .enumerate()
        .flat_map(|(t, (first, vals))| vals.iter().enumerate().map(move |(k, &v)| (first + 2 * k as i64, t as u64, v)))
}

pub fn parity_force(p: &ParityPrescription) -> Result<Configuration, ForceError> {
    parity_force_with(p, &ForceOptions::default())
}

pub fn parity_force_with(p: &ParityPrescription, opts: &ForceOptions) -> Result<Configuration, ForceError> {
    let c = engine::force(p, opts.mem_budget)?;
    verify(&c, p.window, |x, t, game| {
        p.get(x, t).is_none_or(|odd| game.chips_at(x).bit(0) == odd)
    })?;
    Ok(c)
}

pub fn arrow_force(p: &RotorPrescription) -> Result<Configuration, ForceError> {
    arrow_force_with(p, &ForceOptions::default())
}

pub fn arrow_force_with(p: &RotorPrescription, opts: &ForceOptions) -> Result<Configuration, ForceError> {
    let c = match p.induced_parities() {
        Some(parities) => engine::force(&parities, opts.mem_budget)?,
        None => engine::rotors_only(p.class, &p.initial_rotors()),
    };
    verify(&c, p.window, |x, t, game| p.get(x, t).is_none_or(|r| game.rotor_at(x) == r))?;
    Ok(c)
}

/// Simulates `c` across the window and checks `ok` at every window cell.
fn verify(
    c: &Configuration,
    window: ForcingWindow,
    ok: impl Fn(i64, u64, &Game) -> bool,
) -> Result<(), ForceError> {
    let (lo, hi) = window.row(window.t_hi);
    let mut game = match window.shape {
        WindowShape::Cone => Game::focused(c, lo, hi, window.t_hi),
        WindowShape::Rect => Game::focused(c, lo - window.t_hi as i64, hi + window.t_hi as i64, window.t_hi),
    };
    for t in 0..=window.t_hi {
        let (lo, hi) = window.row(t);
        if let Some(x) = (lo..=hi).find(|&x| !ok(x, t, &game)) {
            return Err(ForceError::Verification { x, t });
        }
        if t < window.t_hi {
            game.step(|_| {});
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::propp_run;

    #[test]
    fn cone_rows_widen_downwards() {
        let w = ForcingWindow::cone(-1, 2, 5).unwrap();
        assert_eq!(w.row(5), (-1, 2));
        assert_eq!(w.row(0), (-6, 7));
        assert!(w.contains(7, 0) && !w.contains(7, 1) && !w.contains(0, 6));
        assert_eq!(w.row_cells(ParityClass::Even, 5), (-1, 2));
        assert_eq!(w.row_cells(ParityClass::Odd, 5), (0, 2));
        assert!(ForcingWindow::rect(3, 2, 1).is_err());
    }

    #[test]
    fn constant_arrows_need_no_chips() {
        let w = ForcingWindow::rect(-6, 6, 6).unwrap();
        let p = RotorPrescription::from_fn(ParityClass::Even, w, |x, _| Rotor::from_sign(if x % 3 == 0 { -1 } else { 1 }));
        let c = arrow_force(&p).unwrap();
        assert_eq!(c.total_chips(), 0u32.into());
        for x in -6..=6 {
            assert_eq!(c.rotor_at(x), p.get(x, (x.rem_euclid(2)) as u64).unwrap());
        }
    }

    #[test]
    fn one_flip_at_origin() {
        // rotor at 0 is Right at t = 0 and Left from t = 2 on; everything else stays Right
        let w = ForcingWindow::rect(-6, 6, 6).unwrap();
        let p = RotorPrescription::from_fn(ParityClass::Even, w, |x, t| {
            if x == 0 && t >= 2 { Rotor::Left } else { Rotor::Right }
        });
        let c = arrow_force(&p).unwrap();
        let mut game = Game::new(&c);
        for t in 0..=6 {
            for x in -6..=6 {
                if let Some(r) = p.get(x, t) {
                    assert_eq!(game.rotor_at(x), r, "({x}, {t})");
                }
            }
            game.step(|_| {});
        }
    }

    #[test]
    fn single_odd_pile_at_origin() {
        let w = ForcingWindow::rect(-4, 4, 4).unwrap();
        let p = ParityPrescription::from_fn(ParityClass::Even, w, |x, t| x == 0 && t == 0);
        let c = parity_force(&p).unwrap();
        assert!(c.chips_at(0).bit(0));
        let zero = ParityPrescription::from_fn(ParityClass::Even, w, |_, _| false);
        assert_eq!(parity_force(&zero).unwrap().total_chips(), 0u32.into());
    }

    #[test]
    fn odd_class_prescriptions() {
        let w = ForcingWindow::rect(-5, 5, 7).unwrap();
        let p = ParityPrescription::from_fn(ParityClass::Odd, w, |x, t| (x * 7 + t as i64 * 3).rem_euclid(5) < 2);
        let c = parity_force(&p).unwrap();
        assert_eq!(c.parity_class(), ParityClass::Odd);
        let tr = propp_run(&c, 0);
        assert_eq!(tr.final_config, c);
    }

    #[test]
    fn budget_refusal() {
        let w = ForcingWindow::rect(-20, 20, 20).unwrap();
        let p = ParityPrescription::from_fn(ParityClass::Even, w, |x, t| (x + t as i64) % 3 == 0);
        let tight = ForceOptions { mem_budget: 100 };
        assert!(matches!(parity_force_with(&p, &tight), Err(ForceError::Budget { .. })));
    }
}
