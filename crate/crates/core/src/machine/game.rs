use num_bigint::BigUint;
use num_traits::Zero;

use super::{Configuration, OddSplitEvent, ParityClass, Rotor};
use crate::numerics::Dyadic;

/// Restriction of a run to the cells that can still reach `[lo, hi]` by time `until`.
#[derive(Clone, Copy, Debug)]
struct Focus {
    lo: i64,
    hi: i64,
    until: u64,
}

impl Focus {
    fn clip(&self, lo: i64, hi: i64, time: u64) -> (i64, i64) {
        let slack = self.until.saturating_sub(time) as i64;
        (lo.max(self.lo - slack), hi.min(self.hi + slack))
    }
}

/// A Propp game advanced in place.
#[derive(Clone, Debug)]
pub struct Game {
    offset: i64,
    chips: Vec<BigUint>,
    rotors: Vec<Rotor>,
    parity: ParityClass,
    time: u64,
    focus: Option<Focus>,
}

impl Game {
    pub fn new(c: &Configuration) -> Self {
        let (offset, chips, rotors, parity, time) = c.clone().into_parts();
        Game {
            offset,
            chips,
            rotors,
            parity,
            time,
            focus: None,
        }
    }

    /// A game that only tracks the cells able to influence `[lo, hi]` at time
    /// `until`; everything it reports inside that cone is exact.
    pub fn focused(c: &Configuration, lo: i64, hi: i64, until: u64) -> Self {
        let mut g = Game::new(c);
        let focus = Focus { lo, hi, until };
        g.focus = Some(focus);
        let (wlo, whi) = c.window();
        let (nlo, nhi) = focus.clip(wlo, whi, g.time);
        g.restrict(nlo, nhi);
        g
    }

    fn restrict(&mut self, lo: i64, hi: i64) {
        if hi < lo {
            self.chips.clear();
            self.rotors.clear();
            self.offset = lo;
            return;
        }
        let start = (lo - self.offset).max(0) as usize;
        let end = ((hi - self.offset + 1).max(0) as usize).min(self.chips.len());
        let start = start.min(end);
        self.chips = self.chips.drain(start..end).collect();
        self.rotors = self.rotors.drain(start..end).collect();
        self.offset += start as i64;
    }

    pub fn time(&self) -> u64 {
        self.time
    }

    pub fn window(&self) -> (i64, i64) {
        (self.offset, self.offset + self.chips.len() as i64 - 1)
    }

    fn index(&self, x: i64) -> Option<usize> {
        let i = x.checked_sub(self.offset)?;
        (i >= 0 && (i as usize) < self.chips.len()).then_some(i as usize)
    }

    pub fn chips_at(&self, x: i64) -> &BigUint {
        static ZERO: BigUint = BigUint::ZERO;
        self.index(x).map_or(&ZERO, |i| &self.chips[i])
    }

    pub fn rotor_at(&self, x: i64) -> Rotor {
        self.index(x).map_or(Rotor::Right, |i| self.rotors[i])
    }

    /// Advance one step, reporting each odd split before it happens.
    pub fn step(&mut self, mut on_split: impl FnMut(OddSplitEvent)) {
        let (lo, hi) = self.window();
        let (mut nlo, mut nhi) = (lo - 1, hi + 1);
        if let Some(f) = self.focus {
            (nlo, nhi) = f.clip(nlo, nhi, self.time + 1);
        }
        let width = (nhi - nlo + 1).max(0) as usize;
        let mut chips = vec![BigUint::zero(); width];
        let mut rotors = vec![Rotor::Right; width];
        let slot = |x: i64| -> Option<usize> {
            let i = x - nlo;
            (i >= 0 && (i as usize) < width).then_some(i as usize)
        };
        for (i, pile) in std::mem::take(&mut self.chips).into_iter().enumerate() {
            let x = self.offset + i as i64;
            let mut rotor = self.rotors[i];
            if !pile.is_zero() {
                let odd = pile.bit(0);
                let half = pile >> 1u32;
                let extra = |dir: Rotor| u32::from(odd && rotor == dir);
                if let Some(j) = slot(x + 1) {
                    chips[j] += &half + extra(Rotor::Right);
                }
                if let Some(j) = slot(x - 1) {
                    chips[j] += half + extra(Rotor::Left);
                }
                if odd {
                    on_split(OddSplitEvent {
                        position: x,
                        time: self.time,
                        rotor,
                    });
                    rotor = rotor.flipped();
                }
            }
            if let Some(j) = slot(x) {
                rotors[j] = rotor;
            }
        }
        self.offset = nlo;
        self.chips = chips;
        self.rotors = rotors;
        self.time += 1;
    }

    pub fn snapshot(&self) -> Configuration {
        Configuration::from_parts(
            self.offset,
            self.chips.clone(),
            self.rotors.clone(),
            self.parity,
            self.time,
        )
    }
}

/// The linear machine: every site passes half its (fractional) load to each
/// neighbour. Loads are kept as integer numerators over `2^steps`.
#[derive(Clone, Debug)]
pub struct LinearField {
    offset: i64,
    nums: Vec<BigUint>,
    steps: u64,
    time: u64,
    focus: Option<Focus>,
}

impl LinearField {
    pub fn new(c: &Configuration) -> Self {
        let (offset, chips, _, _, time) = c.clone().into_parts();
        LinearField {
            offset,
            nums: chips,
            steps: 0,
            time,
            focus: None,
        }
    }

    /// Same restriction semantics as [`Game::focused`].
    pub fn focused(c: &Configuration, lo: i64, hi: i64, until: u64) -> Self {
        let mut f = LinearField::new(c);
        let focus = Focus { lo, hi, until };
        f.focus = Some(focus);
        let (wlo, whi) = c.window();
        let (nlo, nhi) = focus.clip(wlo, whi, f.time);
        if nhi < nlo {
            f.nums.clear();
            f.offset = nlo;
        } else {
            let start = (nlo - f.offset).max(0) as usize;
            let end = ((nhi - f.offset + 1).max(0) as usize).min(f.nums.len());
            let start = start.min(end);
            f.nums = f.nums.drain(start..end).collect();
            f.offset += start as i64;
        }
        f
    }

    pub fn time(&self) -> u64 {
        self.time
    }

    /// Exponent of the common denominator of all loads.
    pub fn scale(&self) -> u64 {
        self.steps
    }

    pub fn window(&self) -> (i64, i64) {
        (self.offset, self.offset + self.nums.len() as i64 - 1)
    }

    pub fn numerator_at(&self, x: i64) -> &BigUint {
        static ZERO: BigUint = BigUint::ZERO;
        let i = x - self.offset;
        if i >= 0 && (i as usize) < self.nums.len() {
            &self.nums[i as usize]
        } else {
            &ZERO
        }
    }

    pub fn value_at(&self, x: i64) -> Dyadic {
        Dyadic::from_biguint(self.numerator_at(x).clone(), self.steps)
    }

    pub fn values(&self) -> impl Iterator<Item = (i64, Dyadic)> + '_ {
        self.nums
            .iter()
            .enumerate()
            .map(move |(i, n)| (self.offset + i as i64, Dyadic::from_biguint(n.clone(), self.steps)))
    }

    pub fn step(&mut self) {
        let (lo, hi) = self.window();
        let (mut nlo, mut nhi) = (lo - 1, hi + 1);
        if let Some(f) = self.focus {
            (nlo, nhi) = f.clip(nlo, nhi, self.time + 1);
        }
        let width = (nhi - nlo + 1).max(0) as usize;
        let mut out = vec![BigUint::zero(); width];
        for (j, slot) in out.iter_mut().enumerate() {
            let x = nlo + j as i64;
            let a = self.numerator_at(x - 1);
            let b = self.numerator_at(x + 1);
            if !a.is_zero() || !b.is_zero() {
                *slot = a + b;
            }
        }
        self.offset = nlo;
        self.nums = out;
        self.steps += 1;
        self.time += 1;
    }
}
