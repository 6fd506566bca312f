//! Bit-sliced forcing.
//!
//! Chip counts are never held whole. Bit `j` of `f(x, t)` depends only on
//! bits `<= j + 1` of row `t - 1`, so stage `s` (which fixes bit `s` of the
//! initial piles) can be pushed through the game along the diagonal
//! "bit `s - t` of row `t`" for `t = 0..=s`, ending in the parities of row `s`.
//! Each cell keeps its pending carry (0, 1 or 2, in two bit planes), its parity
//! and its rotor; cells are packed 64 to a word.
//!
//! Coordinates: with `x' = x + v` (`v = 1` for the odd class) every occupied
//! cell has `x' ~ t`, and is stored at index `(x' + t) / 2 - base`. The
//! neighbours `x' - 1` and `x' + 1` of row `t - 1` then sit at indices
//! `i - 1` and `i`.

use std::collections::BTreeMap;

use num_bigint::BigUint;

use super::{ForceError, ParityPrescription};
use crate::machine::{Configuration, ParityClass, Rotor};

fn class_shift(class: ParityClass) -> i64 {
    match class {
        ParityClass::Even => 0,
        ParityClass::Odd => 1,
    }
}

/// Per-row extent of the cells that must be tracked exactly.
struct Layout {
    shift: i64,
    lo: Vec<i64>,
    hi: Vec<i64>,
    base: i64,
    words: usize,
}

impl Layout {
    fn new(p: &ParityPrescription) -> Option<Layout> {
        let shift = class_shift(p.class());
        let rows = p.rows();
        let last = rows.iter().rposition(|(_, v)| !v.is_empty())?;
        let mut lo = vec![0; last + 1];
        let mut hi = vec![0; last + 1];
        for t in (0..=last).rev() {
            let (first, vals) = &rows[t];
            let (mut l, mut h) = if vals.is_empty() {
                (i64::MAX, i64::MIN)
            } else {
                (first + shift, first + shift + 2 * (vals.len() as i64 - 1))
            };
            if t < last {
                l = l.min(lo[t + 1] - 1);
                h = h.max(hi[t + 1] + 1);
            }
            lo[t] = l;
            hi[t] = h;
        }
        let base = (0..=last).map(|t| (lo[t] + t as i64) / 2).min()?;
        let top = (0..=last).map(|t| (hi[t] + t as i64) / 2).max()? - base;
        Some(Layout {
            shift,
            lo,
            hi,
            base,
            words: top as usize / 64 + 1,
        })
    }

    fn rows(&self) -> usize {
        self.lo.len()
    }

    fn index(&self, xp: i64, t: usize) -> usize {
        ((xp + t as i64) / 2 - self.base) as usize
    }

    fn words_of(&self, t: usize) -> (usize, usize) {
        (self.index(self.lo[t], t) / 64, self.index(self.hi[t], t) / 64)
    }

    /// Bit planes, the stored stage planes, and the finished configuration
    /// together with the verifying simulation.
    fn estimate_bytes(&self) -> u64 {
        let rows = self.rows() as u64;
        let planes = rows * self.words as u64 * 8 * 5;
        let sites = (self.hi[0] - self.lo[0]) as u64 / 2 + 1;
        let config = sites * (rows / 8 + 48);
        planes + 4 * config
    }
}

fn get(row: &[u64], i: usize) -> bool {
    row[i / 64] >> (i % 64) & 1 == 1
}

fn set(row: &mut [u64], i: usize) {
    row[i / 64] |= 1 << (i % 64);
}

/// Word `w` of the row moved up by one index.
fn shl1(row: &[u64], w: usize) -> u64 {
    (row[w] << 1) | if w > 0 { row[w - 1] >> 63 } else { 0 }
}

/// Divides a GF(2) series by `(1 + z)^s = prod over bits 2^k of s of (1 + z^(2^k))`.
fn divide_by_pascal_row(q: &mut [bool], s: usize) {
    let mut m = 1;
    while m <= s {
        if s & m != 0 {
            for n in m..q.len() {
                q[n] ^= q[n - m];
            }
        }
        m <<= 1;
    }
}

struct Engine<'a> {
    p: &'a ParityPrescription,
    lay: Layout,
    carry0: Vec<u64>,
    carry1: Vec<u64>,
    odd: Vec<u64>,
    right: Vec<u64>,
}

impl<'a> Engine<'a> {
    fn row(plane: &[u64], words: usize, t: usize) -> &[u64] {
        &plane[t * words..(t + 1) * words]
    }

    /// Pushes `eps` (bit `s` of the initial piles) down the diagonal to row
    /// `s` and returns the row's parities. With `commit` the carries are kept.
    fn sweep(&mut self, s: usize, eps: &[u64], commit: bool) -> Vec<u64> {
        let words = self.lay.words;
        let mut prev = eps.to_vec();
        let mut cur = vec![0u64; words];
        for t in 1..=s {
            let (wl, wh) = self.lay.words_of(t);
            let c0 = &mut self.carry0[t * words..(t + 1) * words];
            let c1 = &mut self.carry1[t * words..(t + 1) * words];
            for w in wl..=wh {
                let a = shl1(&prev, w);
                let b = prev[w];
                let c = c0[w];
                cur[w] = a ^ b ^ c;
                if commit {
                    let maj = (a & b) | (c & (a ^ b));
                    let d = c1[w];
                    c0[w] = maj ^ d;
                    c1[w] = maj & d;
                }
            }
            std::mem::swap(&mut prev, &mut cur);
        }
        prev
    }

    /// Chooses stage `s` so that row `s` gets its prescribed parities.
    fn solve(&self, s: usize, base: &[u64]) -> Vec<u64> {
        let mut eps = vec![0u64; self.lay.words];
        let (first, need) = &self.p.rows()[s];
        if need.is_empty() {
            return eps;
        }
        let xf = first + self.lay.shift;
        let d = |k: usize| need[k] ^ get(base, self.lay.index(xf + 2 * k as i64, s));
        let len = need.len() as i64;
        // x' >= 1 is fixed by piles at x' + s, scanning right
        let k0 = ((1 - xf + 1).div_euclid(2)).max(0);
        if k0 < len {
            let mut q: Vec<bool> = (k0..len).map(|k| d(k as usize)).collect();
            divide_by_pascal_row(&mut q, s);
            for (j, &e) in q.iter().enumerate() {
                if e {
                    let y = xf + 2 * (k0 + j as i64) + s as i64;
                    set(&mut eps, self.lay.index(y, 0));
                }
            }
        }
        // x' <= 0 is fixed by piles at x' - s, scanning left
        let k1 = ((-xf).div_euclid(2)).min(len - 1);
        if k1 >= 0 {
            let mut q: Vec<bool> = (0..=k1).rev().map(|k| d(k as usize)).collect();
            divide_by_pascal_row(&mut q, s);
            for (j, &e) in q.iter().enumerate() {
                if e {
                    let y = xf + 2 * (k1 - j as i64) - s as i64;
                    set(&mut eps, self.lay.index(y, 0));
                }
            }
        }
        eps
    }

    /// Carries entering row `t + 1` from the odd piles of row `t`, and the
    /// rotors of row `t + 2`.
    fn advance_rows(&mut self, t: usize) {
        let words = self.lay.words;
        let odd = Self::row(&self.odd, words, t).to_vec();
        let right = Self::row(&self.right, words, t).to_vec();
        if t + 1 < self.lay.rows() {
            let (wl, wh) = self.lay.words_of(t + 1);
            let goes_right: Vec<u64> = odd.iter().zip(&right).map(|(o, r)| o & r).collect();
            for w in wl..=wh {
                let from_left = shl1(&goes_right, w);
                let from_right = odd[w] & !right[w];
                self.carry0[(t + 1) * words + w] = from_left ^ from_right;
                self.carry1[(t + 1) * words + w] = from_left & from_right;
            }
        }
        if t + 2 < self.lay.rows() {
            let (wl, wh) = self.lay.words_of(t + 2);
            let flipped: Vec<u64> = odd.iter().zip(&right).map(|(o, r)| o ^ r).collect();
            for w in wl..=wh {
                self.right[(t + 2) * words + w] = shl1(&flipped, w);
            }
        }
    }

    fn run(mut self) -> Configuration {
        let words = self.lay.words;
        let rows = self.lay.rows();
        for t in 0..rows.min(2) {
            for xp in (self.lay.lo[t]..=self.lay.hi[t]).step_by(2) {
                if self.p.rotor(xp - self.lay.shift) == Rotor::Right {
                    let i = self.lay.index(xp, t);
                    set(&mut self.right[t * words..(t + 1) * words], i);
                }
            }
        }
        let zero = vec![0u64; words];
        let mut stages = Vec::with_capacity(rows);
        for s in 0..rows {
            let base = if s == 0 { zero.clone() } else { self.sweep(s, &zero, false) };
            let eps = self.solve(s, &base);
            let parities = if s == 0 { eps.clone() } else { self.sweep(s, &eps, true) };
            self.odd[s * words..(s + 1) * words].copy_from_slice(&parities);
            self.advance_rows(s);
            stages.push(eps);
        }
        self.assemble(&stages)
    }

    fn assemble(&self, stages: &[Vec<u64>]) -> Configuration {
        let (lo, hi) = (self.lay.lo[0], self.lay.hi[0]);
        let first = self.lay.index(lo, 0);
        let sites = ((hi - lo) / 2 + 1) as usize;
        let mut digits = vec![Vec::<u32>::new(); sites];
        for (s, eps) in stages.iter().enumerate() {
            for (w, &word) in eps.iter().enumerate() {
                let mut bits = word;
                while bits != 0 {
                    let i = w * 64 + bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    let d = &mut digits[i - first];
                    if d.len() <= s / 32 {
                        d.resize(s / 32 + 1, 0);
                    }
                    d[s / 32] |= 1 << (s % 32);
                }
            }
        }
        // both sublattices of the row-0 span, so every initial rotor is kept
        let x_lo = lo - self.lay.shift - 1;
        let x_hi = hi - self.lay.shift + 1;
        let mut chips = vec![BigUint::ZERO; (x_hi - x_lo + 1) as usize];
        for (k, d) in digits.into_iter().enumerate() {
            chips[(lo - self.lay.shift + 2 * k as i64 - x_lo) as usize] = BigUint::new(d);
        }
        let rotors = (x_lo..=x_hi).map(|x| self.p.rotor(x)).collect();
        let c = Configuration::from_parts(x_lo, chips, rotors, self.p.class(), 0);
        with_outside_rotors(c, self.p.rotors())
    }
}

/// Adds rotor settings that fall outside the configuration's window.
fn with_outside_rotors(c: Configuration, rotors: &BTreeMap<i64, Rotor>) -> Configuration {
    let (lo, hi) = c.window();
    let outside: Vec<_> = rotors.iter().filter(|(&x, _)| x < lo || x > hi).collect();
    if outside.is_empty() {
        return c;
    }
    let new_lo = outside.iter().map(|(&x, _)| x).min().unwrap().min(lo);
    let new_hi = outside.iter().map(|(&x, _)| x).max().unwrap().max(hi);
    let (offset, mut chips, mut rot, class, time) = c.into_parts();
    let width = (new_hi - new_lo + 1) as usize;
    let pad = (offset - new_lo) as usize;
    let mut all_chips = vec![BigUint::ZERO; width];
    let mut all_rot = vec![Rotor::Right; width];
    for (k, (n, r)) in chips.drain(..).zip(rot.drain(..)).enumerate() {
        all_chips[pad + k] = n;
        all_rot[pad + k] = r;
    }
    for (&x, &r) in rotors {
        all_rot[(x - new_lo) as usize] = r;
    }
    Configuration::from_parts(new_lo, all_chips, all_rot, class, time)
}

pub(super) fn rotors_only(class: ParityClass, rotors: &BTreeMap<i64, Rotor>) -> Configuration {
    with_outside_rotors(Configuration::from_parts(0, vec![], vec![], class, 0), rotors)
}

pub(super) fn force(p: &ParityPrescription, budget: u64) -> Result<Configuration, ForceError> {
    let Some(lay) = Layout::new(p) else {
        return Ok(rotors_only(p.class(), p.rotors()));
    };
    let needed = lay.estimate_bytes();
    if needed > budget {
        return Err(ForceError::Budget { needed, budget });
    }
    let size = lay.rows() * lay.words;
    let engine = Engine {
        p,
        lay,
        carry0: vec![0; size],
        carry1: vec![0; size],
        odd: vec![0; size],
        right: vec![0; size],
    };
    Ok(engine.run())
}
