//! The Propp machine and the linear machine on a finite window of `Z`.

mod game;
pub mod text;

pub use game::{Game, LinearField};

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::numerics::Dyadic;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum Rotor {
    /// Points toward `+inf`.
    #[default]
    Right,
    Left,
}

impl Rotor {
    pub fn sign(self) -> i64 {
        match self {
            Rotor::Right => 1,
            Rotor::Left => -1,
        }
    }

    pub fn from_sign(s: i64) -> Rotor {
        if s >= 0 {
            Rotor::Right
        } else {
            Rotor::Left
        }
    }

    pub fn flipped(self) -> Rotor {
        match self {
            Rotor::Right => Rotor::Left,
            Rotor::Left => Rotor::Right,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Rotor::Right => 'R',
            Rotor::Left => 'L',
        }
    }
}

/// Which sublattice carries the chips: `Even` configurations hold chips only
/// at `x ~ t`, `Odd` ones only at `x ~ t + 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ParityClass {
    Even,
    Odd,
}

impl ParityClass {
    /// Whether position `x` may hold chips at time `t`.
    pub fn admits(self, x: i64, t: u64) -> bool {
        let shift = match self {
            ParityClass::Even => 0,
            ParityClass::Odd => 1,
        };
        (x - t as i64 - shift).rem_euclid(2) == 0
    }

    pub fn name(self) -> &'static str {
        match self {
            ParityClass::Even => "even",
            ParityClass::Odd => "odd",
        }
    }

    fn flipped(self) -> ParityClass {
        match self {
            ParityClass::Even => ParityClass::Odd,
            ParityClass::Odd => ParityClass::Even,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MachineError {
    #[error("negative chip count at position {position}")]
    NegativeChips { position: i64 },
    #[error("position {position} has chips but does not match the {class} parity class")]
    MixedParity { position: i64, class: &'static str },
    #[error("position {position} listed twice")]
    DuplicateSite { position: i64 },
}

/// Snapshot of chip counts and rotors on a window; positions outside the
/// window hold no chips and a right-pointing rotor.
#[derive(Clone, Debug)]
pub struct Configuration {
    offset: i64,
    chips: Vec<BigUint>,
    rotors: Vec<Rotor>,
    parity: ParityClass,
    time: u64,
}

static ZERO: BigUint = BigUint::ZERO;

impl Configuration {
    pub(crate) fn from_parts(
        offset: i64,
        chips: Vec<BigUint>,
        rotors: Vec<Rotor>,
        parity: ParityClass,
        time: u64,
    ) -> Self {
        debug_assert_eq!(chips.len(), rotors.len());
        debug_assert!(chips
            .iter()
            .enumerate()
            .all(|(i, c)| c.is_zero() || parity.admits(offset + i as i64, time)));
        Configuration {
            offset,
            chips,
            rotors,
            parity,
            time,
        }
    }

    /// Inclusive window `(lo, hi)`; empty configurations report `(offset, offset - 1)`.
    pub fn window(&self) -> (i64, i64) {
        (self.offset, self.offset + self.chips.len() as i64 - 1)
    }

    pub fn time(&self) -> u64 {
        self.time
    }

    pub fn parity_class(&self) -> ParityClass {
        self.parity
    }

    fn index(&self, x: i64) -> Option<usize> {
        let i = x.checked_sub(self.offset)?;
        (i >= 0 && (i as usize) < self.chips.len()).then_some(i as usize)
    }

    pub fn chips_at(&self, x: i64) -> &BigUint {
        self.index(x).map_or(&ZERO, |i| &self.chips[i])
    }

    pub fn rotor_at(&self, x: i64) -> Rotor {
        self.index(x).map_or(Rotor::Right, |i| self.rotors[i])
    }

    pub fn total_chips(&self) -> BigUint {
        self.chips.iter().sum()
    }

    /// Positions holding at least one chip, ascending.
    pub fn support(&self) -> impl Iterator<Item = (i64, &BigUint)> + '_ {
        self.chips
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(move |(i, c)| (self.offset + i as i64, c))
    }

    /// Every site of the window with its chips and rotor.
    pub fn sites(&self) -> impl Iterator<Item = (i64, &BigUint, Rotor)> + '_ {
        self.chips
            .iter()
            .zip(&self.rotors)
            .enumerate()
            .map(move |(i, (c, r))| (self.offset + i as i64, c, *r))
    }

    /// Smallest window containing all chips and all non-default rotors.
    pub fn hull(&self) -> Option<(i64, i64)> {
        let busy = |i: &usize| !self.chips[*i].is_zero() || self.rotors[*i] != Rotor::Right;
        let first = (0..self.chips.len()).find(busy)?;
        let last = (0..self.chips.len()).rev().find(busy)?;
        Some((self.offset + first as i64, self.offset + last as i64))
    }

    /// The same state relabelled as time 0, with the parity class adjusted so
    /// that the chips stay on admissible positions.
    pub fn rebased(&self) -> Configuration {
        let parity = if self.time % 2 == 0 {
            self.parity
        } else {
            self.parity.flipped()
        };
        Configuration {
            offset: self.offset,
            chips: self.chips.clone(),
            rotors: self.rotors.clone(),
            parity,
            time: 0,
        }
    }

    pub(crate) fn into_parts(self) -> (i64, Vec<BigUint>, Vec<Rotor>, ParityClass, u64) {
        (self.offset, self.chips, self.rotors, self.parity, self.time)
    }
}

impl PartialEq for Configuration {
    /// Equal states: same time, parity class, chips and rotors everywhere
    /// (window padding is irrelevant).
    fn eq(&self, other: &Self) -> bool {
        if self.time != other.time || self.parity != other.parity {
            return false;
        }
        let (a, b) = (self.window(), other.window());
        let lo = a.0.min(b.0);
        let hi = a.1.max(b.1);
        (lo..=hi).all(|x| {
            self.chips_at(x) == other.chips_at(x) && self.rotor_at(x) == other.rotor_at(x)
        })
    }
}

impl Eq for Configuration {}

/// Build a time-0 configuration from chip and rotor listings.
pub fn make_config(
    entries: &[(i64, BigInt)],
    rotor_entries: &[(i64, Rotor)],
    parity: ParityClass,
) -> Result<Configuration, MachineError> {
    let mut chip_map = BTreeMap::new();
    for (x, n) in entries {
        if n.is_negative() {
            return Err(MachineError::NegativeChips { position: *x });
        }
        if chip_map.insert(*x, n.magnitude().clone()).is_some() {
            return Err(MachineError::DuplicateSite { position: *x });
        }
        if !n.is_zero() && !parity.admits(*x, 0) {
            return Err(MachineError::MixedParity {
                position: *x,
                class: parity.name(),
            });
        }
    }
    let mut rotor_map = BTreeMap::new();
    for (x, r) in rotor_entries {
        if rotor_map.insert(*x, *r).is_some() {
            return Err(MachineError::DuplicateSite { position: *x });
        }
    }
    let positions = chip_map.keys().chain(rotor_map.keys());
    let lo = positions.clone().min().copied().unwrap_or(0);
    let hi = positions.max().copied().unwrap_or(0);
    let width = (hi - lo + 1) as usize;
    let mut chips = vec![BigUint::zero(); width];
    let mut rotors = vec![Rotor::Right; width];
    for (x, n) in chip_map {
        chips[(x - lo) as usize] = n;
    }
    for (x, r) in rotor_map {
        rotors[(x - lo) as usize] = r;
    }
    Ok(Configuration::from_parts(lo, chips, rotors, parity, 0))
}

/// An odd pile: `position` held an odd number of chips at `time` while its
/// rotor pointed `rotor`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct OddSplitEvent {
    pub position: i64,
    pub time: u64,
    pub rotor: Rotor,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LogError {
    #[error("split times at position {position} are not increasing")]
    Unordered { position: i64 },
    #[error("rotor at position {position} does not alternate between splits (time {time})")]
    NotAlternating { position: i64, time: u64 },
}

/// All odd splits of a game, grouped by position with times increasing.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OddSplitLog {
    by_position: BTreeMap<i64, Vec<(u64, Rotor)>>,
}

impl OddSplitLog {
    pub fn new() -> Self {
        OddSplitLog::default()
    }

    /// Record an event; events for one position must arrive in time order.
    pub fn push(&mut self, e: OddSplitEvent) -> Result<(), LogError> {
        let seq = self.by_position.entry(e.position).or_default();
        if let Some(&(t, r)) = seq.last() {
            if t >= e.time {
                return Err(LogError::Unordered {
                    position: e.position,
                });
            }
            if r == e.rotor {
                return Err(LogError::NotAlternating {
                    position: e.position,
                    time: e.time,
                });
            }
        }
        seq.push((e.time, e.rotor));
        Ok(())
    }

    /// Record without the alternation check, for assembling logs from outside sources.
    pub fn push_unchecked(&mut self, e: OddSplitEvent) {
        self.by_position
            .entry(e.position)
            .or_default()
            .push((e.time, e.rotor));
    }

    /// Check ordering and rotor alternation at every position.
    pub fn validate(&self) -> Result<(), LogError> {
        for (&position, seq) in &self.by_position {
            for w in seq.windows(2) {
                if w[0].0 >= w[1].0 {
                    return Err(LogError::Unordered { position });
                }
                if w[0].1 == w[1].1 {
                    return Err(LogError::NotAlternating {
                        position,
                        time: w[1].0,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.by_position.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Split history of one position: `(time, rotor)` pairs in time order.
    pub fn at(&self, position: i64) -> &[(u64, Rotor)] {
        self.by_position.get(&position).map_or(&[], Vec::as_slice)
    }

    pub fn positions(&self) -> impl Iterator<Item = i64> + '_ {
        self.by_position.keys().copied()
    }

    /// Events ordered by position, then time.
    pub fn events(&self) -> impl Iterator<Item = OddSplitEvent> + '_ {
        self.by_position.iter().flat_map(|(&position, seq)| {
            seq.iter().map(move |&(time, rotor)| OddSplitEvent {
                position,
                time,
                rotor,
            })
        })
    }
}

/// A finished run: replaying `initial` for `horizon` steps yields `final_config` and `log`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameTrace {
    pub initial: Configuration,
    pub final_config: Configuration,
    pub log: OddSplitLog,
    pub horizon: u64,
}

/// One synchronous step of the Propp machine; the window grows by one site per side.
pub fn propp_step(c: &Configuration) -> (Configuration, Vec<OddSplitEvent>) {
    let mut game = Game::new(c);
    let mut events = Vec::new();
    game.step(|e| events.push(e));
    (game.snapshot(), events)
}

/// Run `t` steps of the Propp machine, logging every odd split.
pub fn propp_run(c: &Configuration, t: u64) -> GameTrace {
    let mut game = Game::new(c);
    let mut log = OddSplitLog::new();
    for _ in 0..t {
        game.step(|e| log.push_unchecked(e));
    }
    GameTrace {
        initial: c.clone(),
        final_config: game.snapshot(),
        log,
        horizon: t,
    }
}

/// Expected chip field `E(., t)` of the linear machine started from `c`, as exact dyadics
/// (zero entries omitted).
pub fn linear_run(c: &Configuration, t: u64) -> BTreeMap<i64, Dyadic> {
    let mut field = LinearField::new(c);
    for _ in 0..t {
        field.step();
    }
    field
        .values()
        .filter(|(_, v)| !v.is_zero())
        .collect()
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&text::write_config(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(chips: &[(i64, i64)], rotors: &[(i64, Rotor)], parity: ParityClass) -> Configuration {
        let entries: Vec<_> = chips.iter().map(|&(x, n)| (x, BigInt::from(n))).collect();
        make_config(&entries, rotors, parity).unwrap()
    }

    fn n(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn construction_rules() {
        let c = cfg(&[(0, 2)], &[], ParityClass::Even);
        assert_eq!(c.chips_at(0), &n(2));
        let mixed = make_config(
            &[(0, BigInt::from(1)), (1, BigInt::from(1))],
            &[],
            ParityClass::Even,
        );
        assert_eq!(
            mixed.unwrap_err(),
            MachineError::MixedParity {
                position: 1,
                class: "even"
            }
        );
        let neg = make_config(&[(2, BigInt::from(-1))], &[], ParityClass::Even);
        assert_eq!(neg.unwrap_err(), MachineError::NegativeChips { position: 2 });
        let big = make_config(
            &[(-4, BigInt::from(1u64 << 60))],
            &[(-4, Rotor::Left)],
            ParityClass::Even,
        )
        .unwrap();
        assert_eq!(big.chips_at(-4), &n(1 << 60));
        assert_eq!(big.rotor_at(-4), Rotor::Left);
        assert_eq!(big.rotor_at(100), Rotor::Right);
    }

    #[test]
    fn step_examples() {
        let (c1, ev) = propp_step(&cfg(&[(0, 2)], &[], ParityClass::Even));
        assert_eq!((c1.chips_at(1), c1.chips_at(-1)), (&n(1), &n(1)));
        assert_eq!(c1.rotor_at(0), Rotor::Right);
        assert!(ev.is_empty());

        let (c1, ev) = propp_step(&cfg(&[(0, 1)], &[], ParityClass::Even));
        assert_eq!(c1.chips_at(1), &n(1));
        assert_eq!(c1.rotor_at(0), Rotor::Left);
        assert_eq!(
            ev,
            vec![OddSplitEvent {
                position: 0,
                time: 0,
                rotor: Rotor::Right
            }]
        );

        let (c1, _) = propp_step(&cfg(&[(0, 3)], &[], ParityClass::Even));
        assert_eq!((c1.chips_at(1), c1.chips_at(-1)), (&n(2), &n(1)));
        assert_eq!(c1.rotor_at(0), Rotor::Left);
        assert_eq!(c1.time(), 1);
    }

    #[test]
    fn single_chip_by_hand() {
        // 0 -R-> 1 -R-> 2, and both rotors flip on the way
        let tr = propp_run(&cfg(&[(0, 1)], &[], ParityClass::Even), 2);
        assert_eq!(tr.final_config.chips_at(2), &n(1));
        assert_eq!(tr.final_config.rotor_at(0), Rotor::Left);
        assert_eq!(tr.final_config.rotor_at(1), Rotor::Left);
        assert_eq!(tr.log.len(), 2);
        let tr = propp_run(&cfg(&[(0, 1)], &[(1, Rotor::Left)], ParityClass::Even), 2);
        assert_eq!(tr.final_config.chips_at(0), &n(1));
    }

    #[test]
    fn zero_steps_is_identity() {
        let c = cfg(&[(0, 5), (2, 3)], &[(1, Rotor::Left)], ParityClass::Even);
        let tr = propp_run(&c, 0);
        assert_eq!(tr.final_config, c);
        assert!(tr.log.is_empty());
    }

    #[test]
    fn linear_examples() {
        let c = cfg(&[(0, 1)], &[], ParityClass::Even);
        let e = linear_run(&c, 2);
        let q = |m: i64, k: u64| Dyadic::new(BigInt::from(m), k);
        let want: BTreeMap<i64, Dyadic> = [(-2, q(1, 2)), (0, q(1, 1)), (2, q(1, 2))]
            .into_iter()
            .collect();
        assert_eq!(e, want);
        let c = cfg(&[(0, 4)], &[], ParityClass::Even);
        let e = linear_run(&c, 1);
        assert_eq!(e.get(&-1), Some(&Dyadic::from_int(2)));
        assert_eq!(e.get(&1), Some(&Dyadic::from_int(2)));
        assert_eq!(linear_run(&c, 0).get(&0), Some(&Dyadic::from_int(4)));
    }

    #[test]
    fn rebase_keeps_chip_parity_consistent() {
        let c = cfg(&[(0, 3)], &[], ParityClass::Even);
        let tr = propp_run(&c, 3);
        let r = tr.final_config.rebased();
        assert_eq!(r.time(), 0);
        assert_eq!(r.parity_class(), ParityClass::Odd);
        assert!(r.support().all(|(x, _)| r.parity_class().admits(x, 0)));
    }

    #[test]
    fn log_rejects_bad_sequences() {
        let mut log = OddSplitLog::new();
        let e = |t, r| OddSplitEvent {
            position: 3,
            time: t,
            rotor: r,
        };
        log.push(e(1, Rotor::Right)).unwrap();
        assert!(log.push(e(3, Rotor::Right)).is_err());
        assert!(log.push(e(1, Rotor::Left)).is_err());
        log.push(e(5, Rotor::Left)).unwrap();
        assert_eq!(log.at(3), &[(1, Rotor::Right), (5, Rotor::Left)]);
    }
}
