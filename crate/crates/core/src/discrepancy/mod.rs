//! Exact discrepancies `f - E` between the Propp machine and the linear machine.
//!
//! Times are counted in steps from the given configuration.

mod report;

pub use report::{write_reports_csv, DiscrepancyReport, Query, CSV_HEADER, DEFAULT_DIGITS};

use std::collections::HashMap;

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

use crate::machine::{propp_run, Configuration, Game, LinearField, LogError, OddSplitLog, Rotor};
use crate::numerics::{h_numerator, inf, Dyadic};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DiscrepancyError {
    #[error("interval [{lo}, {hi}] is empty")]
    EmptySpaceInterval { lo: i64, hi: i64 },
    #[error("time interval must have positive length")]
    EmptyTimeInterval,
    #[error("need t1 <= t2, got t1 = {t1}, t2 = {t2}")]
    TimeOrder { t1: u64, t2: u64 },
    #[error("interval length and shift count must be positive")]
    EmptyAverage,
    #[error(transparent)]
    Log(#[from] LogError),
    #[error("first split at position {position} does not use its initial rotor")]
    InitialRotorMismatch { position: i64 },
}

/// Inclusive interval of positions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SpaceInterval {
    lo: i64,
    hi: i64,
}

impl SpaceInterval {
    pub fn new(lo: i64, hi: i64) -> Result<Self, DiscrepancyError> {
        if lo > hi {
            return Err(DiscrepancyError::EmptySpaceInterval { lo, hi });
        }
        Ok(SpaceInterval { lo, hi })
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.hi
    }

    pub fn len(&self) -> u64 {
        (self.hi - self.lo + 1) as u64
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, x: i64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// The times `t0, t0 + 1, ..., t0 + len - 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TimeInterval {
    t0: u64,
    len: u64,
}

impl TimeInterval {
    pub fn new(t0: u64, len: u64) -> Result<Self, DiscrepancyError> {
        if len == 0 {
            return Err(DiscrepancyError::EmptyTimeInterval);
        }
        Ok(TimeInterval { t0, len })
    }

    pub fn start(&self) -> u64 {
        self.t0
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn last(&self) -> u64 {
        self.t0 + self.len - 1
    }

    pub fn contains(&self, t: u64) -> bool {
        self.t0 <= t && t <= self.last()
    }
}

/// `E(x, t)` by direct convolution of the chip field with the kernel `H`.
pub fn expected(c: &Configuration, x: i64, t: u64) -> Dyadic {
    let mut acc = BigInt::zero();
    for (z, n) in c.support() {
        if let Some(k) = h_numerator(x - z, t as i64) {
            acc += BigInt::from_biguint(Sign::Plus, k * n);
        }
    }
    Dyadic::new(acc, t)
}

/// `t1` Propp steps followed by `t2 - t1` linear steps, read at `x`.
pub fn mixed_expected(c: &Configuration, x: i64, t1: u64, t2: u64) -> Result<Dyadic, DiscrepancyError> {
    if t1 > t2 {
        return Err(DiscrepancyError::TimeOrder { t1, t2 });
    }
    let mid = propp_run(c, t1).final_config;
    Ok(expected(&mid, x, t2 - t1))
}

/// Runs both machines side by side, restricted to what can reach `[lo, hi]`
/// by step `until`, calling `visit` after every step (and once before the first).
fn run_pair(
    c: &Configuration,
    lo: i64,
    hi: i64,
    until: u64,
    mut visit: impl FnMut(u64, &Game, &LinearField),
) {
    let t0 = c.time();
    let mut game = Game::focused(c, lo, hi, t0 + until);
    let mut field = LinearField::focused(c, lo, hi, t0 + until);
    visit(0, &game, &field);
    for step in 1..=until {
        game.step(|_| {});
        field.step();
        visit(step, &game, &field);
    }
}

/// `f(x, t) - E(x, t)` as a numerator over `2^scale`.
fn gap_numerator(game: &Game, field: &LinearField, x: i64) -> BigInt {
    let f = BigInt::from_biguint(Sign::Plus, game.chips_at(x) << field.scale());
    f - BigInt::from_biguint(Sign::Plus, field.numerator_at(x).clone())
}

fn interval_gap(game: &Game, field: &LinearField, xs: SpaceInterval) -> BigInt {
    (xs.lo..=xs.hi).map(|x| gap_numerator(game, field, x)).sum()
}

pub fn disc_vertex(c: &Configuration, x: i64, t: u64) -> Dyadic {
    disc_space(c, SpaceInterval { lo: x, hi: x }, t)
}

pub fn disc_space(c: &Configuration, xs: SpaceInterval, t: u64) -> Dyadic {
    let mut out = Dyadic::zero();
    run_pair(c, xs.lo, xs.hi, t, |step, game, field| {
        if step == t {
            out = Dyadic::new(interval_gap(game, field, xs), field.scale());
        }
    });
    out
}

pub fn disc_time(c: &Configuration, x: i64, s: TimeInterval) -> Dyadic {
    disc_spacetime(c, SpaceInterval { lo: x, hi: x }, s)
}

pub fn disc_spacetime(c: &Configuration, xs: SpaceInterval, s: TimeInterval) -> Dyadic {
    // accumulate over the running denominator 2^step
    let mut acc = BigInt::zero();
    let mut scale = 0u64;
    run_pair(c, xs.lo, xs.hi, s.last(), |step, game, field| {
        if s.contains(step) {
            acc <<= field.scale() - scale;
            scale = field.scale();
            acc += interval_gap(game, field, xs);
        }
    });
    Dyadic::new(acc, scale)
}

/// Per-vertex discrepancies at step `t` over `xs`, as numerators over `2^t`.
pub fn disc_profile(c: &Configuration, xs: SpaceInterval, t: u64) -> Vec<BigInt> {
    let mut out = Vec::new();
    run_pair(c, xs.lo, xs.hi, t, |step, game, field| {
        if step == t {
            out = (xs.lo..=xs.hi).map(|x| gap_numerator(game, field, x)).collect();
        }
    });
    out
}

/// `sum_{k=1}^{m} disc(X + k, t)^2` for `X = [base, base + l - 1]`.
pub fn l2_sum(c: &Configuration, l: u64, m: u64, t: u64, base: i64) -> Result<Dyadic, DiscrepancyError> {
    if l == 0 || m == 0 {
        return Err(DiscrepancyError::EmptyAverage);
    }
    let span = SpaceInterval::new(base + 1, base + (m + l) as i64 - 1)?;
    let d = disc_profile(c, span, t);
    let l = l as usize;
    let mut window: BigInt = d[..l].iter().sum();
    let mut squares = &window * &window;
    for k in 1..m as usize {
        window -= &d[k - 1];
        window += &d[k - 1 + l];
        squares += &window * &window;
    }
    Ok(Dyadic::new(squares, 2 * t))
}

/// Mean of the squared discrepancies of the `m` shifts `X + 1, ..., X + m`.
pub fn l2_average(c: &Configuration, l: u64, m: u64, t: u64, base: i64) -> Result<BigRational, DiscrepancyError> {
    let sum = l2_sum(c, l, m, t, base)?;
    Ok(sum.to_rational() / BigRational::from_integer(BigInt::from(m)))
}

/// Evaluates discrepancies from the initial rotors and the split log alone:
/// `f(x, t) - E(x, t) = sum_y arr(y, 0) sum_i (-1)^i inf(y - x, t - s_i(y))`.
pub struct SplitEvaluator<'a, R: Fn(i64) -> Rotor> {
    initial_rotor: R,
    log: &'a OddSplitLog,
    cache: HashMap<(i64, i64), Dyadic>,
}

impl<'a, R: Fn(i64) -> Rotor> SplitEvaluator<'a, R> {
    pub fn new(initial_rotor: R, log: &'a OddSplitLog) -> Result<Self, DiscrepancyError> {
        log.validate()?;
        for y in log.positions() {
            if log.at(y)[0].1 != initial_rotor(y) {
                return Err(DiscrepancyError::InitialRotorMismatch { position: y });
            }
        }
        Ok(SplitEvaluator {
            initial_rotor,
            log,
            cache: HashMap::new(),
        })
    }

    pub fn eval(&mut self, x: i64, t: u64) -> Dyadic {
        let mut acc = Dyadic::zero();
        for y in self.log.positions() {
            let sign = (self.initial_rotor)(y).sign();
            for (i, &(s, _)) in self.log.at(y).iter().enumerate() {
                if s >= t {
                    break;
                }
                let age = (t - s) as i64;
                let z = y - x;
                if z.abs() > age {
                    continue;
                }
                let v = self.cache.entry((z, age)).or_insert_with(|| inf(z, age));
                if (sign == 1) == (i % 2 == 0) {
                    acc += &*v;
                } else {
                    acc -= &*v;
                }
            }
        }
        acc
    }
}

pub fn disc_via_splits(
    initial_rotor: impl Fn(i64) -> Rotor,
    log: &OddSplitLog,
    x: i64,
    t: u64,
) -> Result<Dyadic, DiscrepancyError> {
    Ok(SplitEvaluator::new(initial_rotor, log)?.eval(x, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::{make_config, ParityClass};

    fn cfg(chips: &[(i64, i64)], rotors: &[(i64, Rotor)]) -> Configuration {
        let entries: Vec<_> = chips.iter().map(|&(x, n)| (x, BigInt::from(n))).collect();
        make_config(&entries, rotors, ParityClass::Even).unwrap()
    }

    fn q(m: i64, e: u64) -> Dyadic {
        Dyadic::new(BigInt::from(m), e)
    }

    #[test]
    fn expected_examples() {
        let one = cfg(&[(0, 1)], &[]);
        assert_eq!(expected(&one, 0, 2), q(1, 1));
        assert_eq!(expected(&one, 1, 2), Dyadic::zero());
        let five = cfg(&[(0, 5)], &[]);
        assert_eq!(expected(&five, 1, 1), q(5, 1));
    }

    #[test]
    fn mixed_boundaries() {
        let c = cfg(&[(0, 7), (-2, 3)], &[(0, Rotor::Left)]);
        let f3 = propp_run(&c, 3).final_config;
        for x in -6..6 {
            let direct = Dyadic::from_biguint(f3.chips_at(x).clone(), 0);
            assert_eq!(mixed_expected(&c, x, 3, 3).unwrap(), direct);
            assert_eq!(mixed_expected(&c, x, 0, 3).unwrap(), expected(&c, x, 3));
        }
        let one = cfg(&[(0, 1)], &[]);
        assert_eq!(mixed_expected(&one, 0, 1, 2).unwrap(), q(1, 1));
        assert!(mixed_expected(&one, 0, 2, 1).is_err());
    }

    #[test]
    fn vertex_examples() {
        let one = cfg(&[(0, 1)], &[]);
        assert_eq!(disc_vertex(&one, 1, 1), q(1, 1));
        let two = cfg(&[(0, 2)], &[]);
        assert_eq!(disc_vertex(&two, 1, 1), Dyadic::zero());
        let xs = SpaceInterval::new(1, 1).unwrap();
        assert_eq!(disc_space(&one, xs, 1), q(1, 1));
    }

    #[test]
    fn split_examples() {
        let one = cfg(&[(0, 1)], &[]);
        let tr = propp_run(&one, 1);
        let r = |y| one.rotor_at(y);
        assert_eq!(disc_via_splits(r, &tr.log, 1, 1).unwrap(), q(1, 1));
        assert_eq!(disc_via_splits(r, &OddSplitLog::new(), 1, 1).unwrap(), Dyadic::zero());
        // a log that disagrees with the initial rotor is rejected
        let wrong = |_| Rotor::Left;
        assert!(disc_via_splits(wrong, &tr.log, 1, 1).is_err());
    }

    #[test]
    fn whole_window_sums_vanish() {
        let c = cfg(&[(0, 5), (4, 3), (-2, 1)], &[(4, Rotor::Left)]);
        let all = SpaceInterval::new(-30, 30).unwrap();
        for t in 0..12 {
            assert_eq!(disc_space(&c, all, t), Dyadic::zero());
        }
        let s = TimeInterval::new(2, 9).unwrap();
        assert_eq!(disc_spacetime(&c, all, s), Dyadic::zero());
    }

    #[test]
    fn time_and_interval_consistency() {
        let c = cfg(&[(0, 9), (2, 1), (-4, 3)], &[(2, Rotor::Left)]);
        let s = TimeInterval::new(3, 6).unwrap();
        let direct: Dyadic = (3..9).map(|t| disc_vertex(&c, 1, t)).sum();
        assert_eq!(disc_time(&c, 1, s), direct);
        assert_eq!(disc_time(&c, 1, TimeInterval::new(5, 1).unwrap()), disc_vertex(&c, 1, 5));
        let xs = SpaceInterval::new(-3, 4).unwrap();
        let by_vertex: Dyadic = (3..9)
            .flat_map(|t| (-3..=4).map(move |x| (x, t)))
            .map(|(x, t)| disc_vertex(&c, x, t))
            .sum();
        assert_eq!(disc_spacetime(&c, xs, s), by_vertex);
    }

    #[test]
    fn l2_single_shift_is_a_square() {
        let c = cfg(&[(0, 9), (2, 1)], &[]);
        let one = l2_average(&c, 3, 1, 6, -2).unwrap();
        let d = disc_space(&c, SpaceInterval::new(-1, 1).unwrap(), 6).to_rational();
        assert_eq!(one, &d * &d);
        let even = cfg(&[(0, 4)], &[]);
        assert!(l2_average(&even, 2, 5, 2, -4).unwrap().is_zero());
    }

    #[test]
    fn rejects_empty_intervals() {
        assert!(SpaceInterval::new(2, 1).is_err());
        assert!(TimeInterval::new(0, 0).is_err());
        let c = cfg(&[(0, 1)], &[]);
        assert_eq!(l2_average(&c, 0, 1, 1, 0), Err(DiscrepancyError::EmptyAverage));
    }
}
