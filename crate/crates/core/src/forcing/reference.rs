//! Stage-by-stage forcing that re-simulates the whole game at every stage and
//! picks the new piles one at a time. Exponentially slower than the engine;
//! kept as an independent check on small windows.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};

use super::ParityPrescription;
use crate::machine::{make_config, Configuration, Game};
use crate::numerics::binom_parity;

fn build(p: &ParityPrescription, piles: &BTreeMap<i64, BigUint>) -> Configuration {
    let chips: Vec<_> = piles.iter().map(|(&x, n)| (x, BigInt::from(n.clone()))).collect();
    let rotors: Vec<_> = p.rotors().iter().map(|(&x, &r)| (x, r)).collect();
    make_config(&chips, &rotors, p.class()).expect("piles respect the parity class")
}

pub fn parity_force_reference(p: &ParityPrescription) -> Configuration {
    parity_force_reference_staged(p, |_, _| {})
}

/// As [`parity_force_reference`], reporting the configuration after each stage.
pub fn parity_force_reference_staged(
    p: &ParityPrescription,
    mut after_stage: impl FnMut(u64, &Configuration),
) -> Configuration {
    let shift = match p.class() {
        crate::machine::ParityClass::Even => 0,
        crate::machine::ParityClass::Odd => 1,
    };
    let mut piles: BTreeMap<i64, BigUint> = BTreeMap::new();
    for (s, (first, need)) in p.rows().iter().enumerate() {
        let s64 = s as u64;
        let mut game = Game::new(&build(p, &piles));
        for _ in 0..s {
            game.step(|_| {});
        }
        // wanted change of parity at each prescribed x (in shifted coordinates)
        let wanted: Vec<(i64, bool)> = need
            .iter()
            .enumerate()
            .map(|(k, &odd)| {
                let x = first + 2 * k as i64;
                (x + shift, odd != game.chips_at(x).bit(0))
            })
            .collect();
        let mut chosen: Vec<i64> = Vec::new();
        let effect = |chosen: &[i64], x: i64| {
            chosen
                .iter()
                .filter(|&&y| binom_parity(s64, (s as i64 + x - y) / 2))
                .count()
                % 2
                == 1
        };
        for &(x, d) in wanted.iter().filter(|(x, _)| *x >= 1) {
            if d != effect(&chosen, x) {
                chosen.push(x + s as i64);
            }
        }
        let mut left = Vec::new();
        for &(x, d) in wanted.iter().rev().filter(|(x, _)| *x <= 0) {
            if d != effect(&left, x) {
                left.push(x - s as i64);
            }
        }
        for y in chosen.into_iter().chain(left) {
            *piles.entry(y - shift).or_default() += BigUint::from(1u32) << s;
        }
        after_stage(s64, &build(p, &piles));
    }
    build(p, &piles)
}
