//! One line per acceptance criterion; exits non-zero if any fails.

mod common;

use std::time::Instant;

use common::Cases;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rayon::prelude::*;

use proppwalk::discrepancy::{
    disc_profile, disc_space, disc_time, disc_vertex, disc_via_splits, l2_average, mixed_expected, SpaceInterval,
};
use proppwalk::forcing::{arrow_force, gen_l2_random, gen_space_lb, gen_time_lb, gen_vertex_lb, ForcingWindow, RotorPrescription};
use proppwalk::machine::{propp_run, Game, LinearField};
use proppwalk::numerics::{c1_bracket, h, inf, inf_time_partial_sum, t_max, Dyadic, HColumn, InfColumn};

const C1_YCUT: u64 = 100_000;
const C1_MAX_WIDTH: f64 = 1e-3;
const PARTIAL_SUM_FLOOR: f64 = 0.95;
const SCALING_BAND: f64 = 2.0;
const L2_T: u64 = 1024;
const L2_SEED: u64 = 1;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn criterion_1() -> Result<String, String> {
    let b = c1_bracket(C1_YCUT).map_err(|e| e.to_string())?;
    let width = b.width();
    let desc = format!(
        "c1 in [{:.8}, {:.8}], width {:.3e}",
        ratio_f64(&b.lower),
        ratio_f64(&b.upper),
        ratio_f64(&width)
    );
    if ratio_f64(&width) >= C1_MAX_WIDTH {
        return Err(format!("{desc}: too wide"));
    }
    // both ends round to 2.29
    if b.lower < q(2285, 1000) || b.upper >= q(2295, 1000) {
        return Err(format!("{desc}: does not round to 2.29"));
    }
    Ok(format!("{desc}, rounds to 2.29"))
}

fn ratio_f64(r: &BigRational) -> f64 {
    let scale = BigInt::from(10u64).pow(15);
    let n = (r * BigRational::from_integer(scale.clone())).round().to_integer();
    n.to_string().parse::<f64>().unwrap() / 1e15
}

fn criterion_2() -> Result<String, String> {
    let upper = c1_bracket(C1_YCUT).map_err(|e| e.to_string())?.upper;
    let worst = (0..1000u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = Cases::new(0xC0FFEE + i);
            let horizon = rng.range(1, 100) as u64;
            let c = rng.config(30, 15, 15 + horizon as i64);
            // every step of the game against every step of the linear machine
            let mut game = Game::new(&c);
            let mut field = LinearField::new(&c);
            let mut worst = BigInt::zero();
            let mut worst_scale = 0;
            for _ in 0..=horizon {
                let (lo, hi) = field.window();
                for x in lo - 1..=hi + 1 {
                    let gap = (BigInt::from(game.chips_at(x).clone()) << field.scale())
                        - BigInt::from(field.numerator_at(x).clone());
                    // compare |gap| / 2^scale with worst / 2^worst_scale
                    if (gap.abs() << worst_scale) > (&worst << field.scale()) {
                        worst = gap.abs();
                        worst_scale = field.scale();
                    }
                }
                game.step(|_| {});
                field.step();
            }
            (Dyadic::new(worst, worst_scale).to_rational(), i)
        })
        .max()
        .unwrap();
    let desc = format!("1000 configs, max |disc| = {:.6} vs c1 upper {:.6}", ratio_f64(&worst.0), ratio_f64(&upper));
    if worst.0 <= upper {
        Ok(desc)
    } else {
        Err(format!("{desc} (config {})", worst.1))
    }
}

fn criterion_3() -> Result<String, String> {
    let bad = (0..100u64)
        .into_par_iter()
        .filter_map(|i| {
            let mut rng = Cases::new(0xD15C + i);
            let horizon = rng.range(1, 40) as u64;
            let c = rng.config(30, 15, 15 + horizon as i64);
            let trace = propp_run(&c, horizon);
            for t in 0..=horizon {
                let reach = 15 + t as i64;
                let xs = SpaceInterval::new(-reach, reach).unwrap();
                let profile = disc_profile(&c, xs, t);
                for (k, num) in profile.into_iter().enumerate() {
                    let x = -reach + k as i64;
                    let via = disc_via_splits(|z| c.rotor_at(z), &trace.log, x, t).ok()?;
                    if via != Dyadic::new(num, t) {
                        return Some((i, x, t));
                    }
                }
                let x = (t as i64 % 7) - 3;
                if disc_vertex(&c, x, t) != disc_via_splits(|z| c.rotor_at(z), &trace.log, x, t).ok()? {
                    return Some((i, x, t));
                }
            }
            None
        })
        .min();
    match bad {
        None => Ok("100 games, split route equals direct route at every in-window (x, t)".into()),
        Some((i, x, t)) => Err(format!("game {i} differs at ({x}, {t})")),
    }
}

fn criterion_4() -> Result<String, String> {
    let mut rng = Cases::new(0x7E1E);
    for i in 0..20 {
        let t = rng.range(1, 30) as u64;
        let c = rng.config(30, 15, 15 + t as i64);
        let x = rng.range(-6, 6);
        let mut sum = Dyadic::zero();
        for s in 0..t {
            let a = mixed_expected(&c, x, s + 1, t).map_err(|e| e.to_string())?;
            let b = mixed_expected(&c, x, s, t).map_err(|e| e.to_string())?;
            sum += &(&a - &b);
        }
        if sum != disc_vertex(&c, x, t) {
            return Err(format!("game {i}: telescoped {sum} != disc {}", disc_vertex(&c, x, t)));
        }
    }
    Ok("20 games, telescoped mixed expectations equal the discrepancy".into())
}

fn criterion_5() -> Result<String, String> {
    let mut rng = Cases::new(0xA770);
    for i in 0..20 {
        let class = rng.class();
        let w = ForcingWindow::rect(-20, 20, 20).unwrap();
        let p = RotorPrescription::from_fn(class, w, |_, _| rng.rotor());
        let c = arrow_force(&p).map_err(|e| format!("prescription {i}: {e}"))?;
        let mut g = Game::new(&c);
        for t in 0..=20 {
            for x in -20..=20 {
                if let Some(r) = p.get(x, t) {
                    if g.rotor_at(x) != r {
                        return Err(format!("prescription {i}: rotor at ({x}, {t}) is {:?}", g.rotor_at(x)));
                    }
                }
            }
            g.step(|_| {});
        }
    }
    Ok("20 random rotor prescriptions on |x| <= 20, t <= 20 realized".into())
}

fn criterion_6() -> Result<String, String> {
    let mut values = Vec::new();
    for y in [2u64, 4, 6, 8, 10] {
        let g = gen_vertex_lb(y).map_err(|e| e.to_string())?;
        let t0 = t_max(y as i64).map_err(|e| e.to_string())?;
        let got = disc_vertex(&g.config, 0, t0);
        let mut want = Dyadic::zero();
        for x in 1..=y as i64 {
            want += &inf(x, t_max(x).unwrap() as i64).abs();
        }
        want = &want + &want;
        if got != want {
            return Err(format!("y = {y}: disc {got} != {want}"));
        }
        values.push(format!("{got}"));
    }
    if gen_vertex_lb(2).map(|g| disc_vertex(&g.config, 0, g.t0)).ok() != Some(Dyadic::new(BigInt::from(3), 1)) {
        return Err("y = 2 does not give 3/2".into());
    }
    Ok(format!("vertex constructions give {}", values.join(", ")))
}

fn criterion_7() -> Result<String, String> {
    let one = Dyadic::one();
    let mut lows = Vec::new();
    for x in 1..=10i64 {
        let cut = 400 * (x * x) as u64;
        let total = inf_time_partial_sum(x, cut);
        // independent running sum from the binomial column
        let mut col = InfColumn::new(x);
        let mut run = Dyadic::zero();
        let mut prev = Dyadic::zero();
        while col.time() <= cut {
            run += &col.value();
            if run < prev || run > one {
                return Err(format!("x = {x}: partial sum not monotone or above 1 at t = {}", col.time()));
            }
            prev = run.clone();
            col.advance();
        }
        if run != total {
            return Err(format!("x = {x}: column sum disagrees with the partial sum"));
        }
        let v = total.to_f64();
        if !(v > PARTIAL_SUM_FLOOR && total <= one) {
            return Err(format!("x = {x}: partial sum {v:.6}"));
        }
        lows.push(v);
    }
    // spot check the column against the kernel for small x
    for x in 1..=3i64 {
        let direct: Dyadic = (1..=400 * x * x).map(|t| inf(x, t).abs()).sum();
        if direct != inf_time_partial_sum(x, 400 * (x * x) as u64) {
            return Err(format!("x = {x}: kernel sum disagrees"));
        }
    }
    let min = lows.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(format!("partial sums at 400x^2 lie in [{min:.6}, 1] and are monotone"))
}

fn band(name: &str, vals: &[(u64, f64)]) -> Result<String, String> {
    let lo = vals.iter().map(|v| v.1).fold(f64::INFINITY, f64::min);
    let hi = vals.iter().map(|v| v.1).fold(0.0, f64::max);
    let shown: Vec<_> = vals.iter().map(|(p, v)| format!("{p}: {v:.4}")).collect();
    let desc = format!("{name} {}", shown.join(", "));
    if lo > 0.0 && hi / lo <= SCALING_BAND {
        Ok(format!("{desc} (ratio {:.3})", hi / lo))
    } else {
        Err(desc)
    }
}

fn criterion_8() -> Result<String, String> {
    let time: Vec<(u64, f64)> = [64u64, 256, 1024]
        .par_iter()
        .map(|&t| {
            let g = gen_time_lb(t).unwrap();
            (t, disc_time(&g.config, 0, g.s).abs().to_f64() / (t as f64).sqrt())
        })
        .collect();
    let space: Vec<(u64, f64)> = [7u64, 15, 31]
        .par_iter()
        .map(|&l| {
            let g = gen_space_lb(l).unwrap();
            (l, disc_space(&g.config, g.xs, g.t).abs().to_f64() / (l as f64).ln())
        })
        .collect();
    let g = gen_l2_random(L2_T, L2_SEED).map_err(|e| e.to_string())?;
    let m = 2 * L2_T - 64;
    let base = -(L2_T as i64) + 15;
    let l2: Vec<(u64, BigRational)> = [8u64, 16, 32]
        .par_iter()
        .map(|&l| (l, l2_average(&g.config, l, m, L2_T, base).unwrap()))
        .collect();

    let a = band("time |disc|/sqrt(T)", &time);
    let b = band("space |disc|/ln(L)", &space);
    let increasing = l2.windows(2).all(|w| w[0].1 < w[1].1);
    let l2_desc: Vec<_> = l2.iter().map(|(l, v)| format!("{l}: {:.5}", ratio_f64(v))).collect();
    let c = format!("l2 average {}", l2_desc.join(", "));
    let parts = [
        a.clone().unwrap_or_else(|e| e),
        b.clone().unwrap_or_else(|e| e),
        c.clone(),
    ];
    if a.is_ok() && b.is_ok() && increasing {
        Ok(parts.join("; "))
    } else {
        Err(format!("{} [a {}, b {}, c {}]", parts.join("; "), a.is_ok(), b.is_ok(), increasing))
    }
}

fn criterion_9() -> Result<String, String> {
    for x in 1..=40i64 {
        let last = 4 * (x * x) as u64 + 8;
        let mut col = HColumn::new(x);
        let mut vals = Vec::new();
        while col.time() <= last {
            vals.push((col.time(), col.value()));
            col.advance();
        }
        let peak = vals.iter().map(|v| &v.1).max().unwrap().clone();
        let top = vals.iter().position(|v| v.1 == peak).unwrap();
        let rises = vals[..=top].windows(2).all(|w| w[0].1 <= w[1].1);
        let falls = vals[top..].windows(2).all(|w| w[0].1 >= w[1].1);
        if !rises || !falls {
            return Err(format!("H({x}, .) is not unimodal"));
        }
        let sq = (x * x) as u64;
        if let Some(v) = vals.iter().find(|v| v.1 == peak && v.0 + 2 != sq && v.0 != sq) {
            return Err(format!("H({x}, .) peaks at t = {}", v.0));
        }
        if h(x, sq as i64) != vals.iter().find(|v| v.0 == sq).unwrap().1 {
            return Err(format!("H({x}, x^2) column mismatch"));
        }
    }
    for y in 1..=40i64 {
        let last = 4 * (y * y) as u64 + 8;
        let mut col = InfColumn::new(y);
        let mut best = (Dyadic::zero(), Vec::new());
        while col.time() <= last {
            let v = col.value();
            if v > best.0 {
                best = (v, vec![col.time()]);
            } else if v == best.0 {
                best.1.push(col.time());
            }
            col.advance();
        }
        let tm = t_max(y).unwrap();
        if !best.1.contains(&tm) {
            return Err(format!("|inf({y}, .)| peaks at {:?}, not {tm}", best.1));
        }
        if inf(y, tm as i64).abs() != best.0 {
            return Err(format!("|inf({y}, {tm})| column mismatch"));
        }
    }
    for t in 0..=200i64 {
        let total: Dyadic = (-t..=t).map(|x| h(x, t)).sum();
        if total != Dyadic::one() {
            return Err(format!("sum of H(., {t}) is {total}"));
        }
    }
    Ok("H unimodal with peak at x^2 - 2 or x^2, |inf| peaks at t_max, rows of H sum to 1".into())
}

fn main() {
    let criteria: [(u32, fn() -> Result<String, String>); 9] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
    ];
    let mut failed = 0;
    for (n, f) in criteria {
        let start = Instant::now();
        let r = f();
        let secs = start.elapsed().as_secs_f64();
        match r {
            Ok(msg) => println!("PASS criterion {n}: {msg} ({secs:.1}s)"),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {n}: {msg} ({secs:.1}s)");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
