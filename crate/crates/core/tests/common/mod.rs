#![allow(dead_code)]

use num_bigint::BigInt;
use proppwalk::machine::{make_config, Configuration, ParityClass, Rotor};
use proptest::prelude::*;
use rand_chacha::rand_core::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn class_strategy() -> impl Strategy<Value = ParityClass> {
    prop_oneof![Just(ParityClass::Even), Just(ParityClass::Odd)]
}

pub fn rotor_strategy() -> impl Strategy<Value = Rotor> {
    prop_oneof![Just(Rotor::Left), Just(Rotor::Right)]
}

/// Up to `max_chips` chips on sites `|x| <= reach` of one parity class, with
/// random rotors on `|x| <= rotor_reach`.
pub fn config_strategy(max_chips: u32, reach: i64, rotor_reach: i64) -> impl Strategy<Value = Configuration> {
    let piles = prop::collection::vec((-reach..=reach, 1..=max_chips.max(1)), 0..8);
    let rotors = prop::collection::vec(rotor_strategy(), (2 * rotor_reach + 1) as usize);
    (class_strategy(), piles, rotors).prop_map(move |(class, piles, rotors)| build(class, &piles, &rotors, rotor_reach, max_chips))
}

pub fn build(class: ParityClass, piles: &[(i64, u32)], rotors: &[Rotor], rotor_reach: i64, max_chips: u32) -> Configuration {
    let mut chips = std::collections::BTreeMap::new();
    let mut total = 0;
    for &(x, n) in piles {
        let x = if class.admits(x, 0) { x } else if x > 0 { x - 1 } else { x + 1 };
        let n = n.min(max_chips - total);
        total += n;
        *chips.entry(x).or_insert(0u32) += n;
    }
    let chips: Vec<_> = chips.into_iter().filter(|&(_, n)| n > 0).map(|(x, n)| (x, BigInt::from(n))).collect();
    let rotors: Vec<_> = rotors.iter().enumerate().map(|(i, &r)| (i as i64 - rotor_reach, r)).collect();
    make_config(&chips, &rotors, class).unwrap()
}

/// Seeded source of random cases for loops that run outside proptest.
pub struct Cases(ChaCha8Rng);

impl Cases {
    pub fn new(seed: u64) -> Self {
        Cases(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn next(&mut self) -> u64 {
        self.0.next_u64()
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.next() % n
    }

    pub fn range(&mut self, lo: i64, hi: i64) -> i64 {
        lo + self.below((hi - lo + 1) as u64) as i64
    }

    pub fn coin(&mut self) -> bool {
        self.next() & 1 == 1
    }

    pub fn rotor(&mut self) -> Rotor {
        if self.coin() {
            Rotor::Right
        } else {
            Rotor::Left
        }
    }

    pub fn class(&mut self) -> ParityClass {
        if self.coin() {
            ParityClass::Even
        } else {
            ParityClass::Odd
        }
    }

    /// A single-parity configuration with at most `max_chips` chips on `|x| <= reach`.
    pub fn config(&mut self, max_chips: u32, reach: i64, rotor_reach: i64) -> Configuration {
        let class = self.class();
        let piles: Vec<_> = (0..self.below(8) + 1)
            .map(|_| (self.range(-reach, reach), self.range(1, max_chips as i64) as u32))
            .collect();
        let rotors: Vec<_> = (0..2 * rotor_reach + 1).map(|_| self.rotor()).collect();
        build(class, &piles, &rotors, rotor_reach, max_chips)
    }
}
