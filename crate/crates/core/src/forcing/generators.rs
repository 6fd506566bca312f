//! The lower-bound constructions, each a parity (or rotor) table handed to the
//! forcing engine.

use num_integer::Roots;
use rand_chacha::rand_core::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{arrow_force, parity_force, ForceError, ForcingWindow, ParityPrescription, RotorPrescription};
use crate::discrepancy::{SpaceInterval, TimeInterval};
use crate::machine::{Configuration, ParityClass, Rotor};
use crate::numerics::t_max;

fn sidecar(name: &str, params: &str, seed: Option<u64>) -> String {
    let seed = seed.map_or_else(|| "-".to_string(), |s| s.to_string());
    format!("generator: {name} params={params} seed={seed}")
}

fn param(msg: impl Into<String>) -> ForceError {
    ForceError::Parameter(msg.into())
}

/// Rotors pointing at `[lo, hi]` from either side.
fn point_towards(p: &mut ParityPrescription, lo: i64, hi: i64, sites: impl IntoIterator<Item = i64>) {
    for x in sites {
        if x > hi {
            p.set_rotor(x, Rotor::Left);
        } else if x < lo {
            p.set_rotor(x, Rotor::Right);
        }
    }
}

/// `T` rounded down to a square, with its root.
fn square_floor(t: u64) -> Result<(u64, u64), ForceError> {
    let r = t.sqrt();
    if r == 0 {
        return Err(param("T must be positive"));
    }
    Ok((r * r, r))
}

#[derive(Clone, Debug)]
pub struct VertexLb {
    pub config: Configuration,
    pub y: u64,
    pub t0: u64,
}

impl VertexLb {
    pub fn sidecar(&self) -> String {
        sidecar("vertex", &format!("y={}", self.y), None)
    }
}

/// One odd pile at every `0 < |x| <= y`, timed so that it reaches the origin
/// at time `t0 = t_max(y)` with the largest possible influence, and with its
/// rotor chosen so the influence counts positively.
pub fn gen_vertex_lb(y: u64) -> Result<VertexLb, ForceError> {
    if y < 2 || y % 2 != 0 {
        return Err(param(format!("y must be even and at least 2, got {y}")));
    }
    let t0 = t_max(y as i64).expect("y > 0");
    let split_time = |x: i64| t0 - t_max(x).expect("x != 0");
    let window = ForcingWindow::cone_below(0, 0, t0)?;
    let yi = y as i64;
    let mut p = ParityPrescription::from_fn(ParityClass::Even, window, |x, t| {
        x != 0 && x.abs() <= yi && t == split_time(x.abs())
    });
    point_towards(&mut p, 0, 0, (-yi..=yi).filter(|&x| x != 0));
    Ok(VertexLb {
        config: parity_force(&p)?,
        y,
        t0,
    })
}

#[derive(Clone, Debug)]
pub struct SpaceLb {
    pub config: Configuration,
    pub l: u64,
    pub xs: SpaceInterval,
    pub t: u64,
}

impl SpaceLb {
    pub fn sidecar(&self) -> String {
        sidecar("space", &format!("L={}", self.l), None)
    }
}

/// Odd piles at the even `y` in `[1, L]` at time `L^2 - y^2`, rotors pointing
/// at `X = [-L + 1, 0]`, measured at `t = L^2`.
pub fn gen_space_lb(l: u64) -> Result<SpaceLb, ForceError> {
    if l % 2 == 0 {
        return Err(param(format!("L must be odd, got {l}")));
    }
    let t = l * l;
    let li = l as i64;
    let xs = SpaceInterval::new(-li + 1, 0).expect("L >= 1");
    let window = ForcingWindow::cone_below(xs.lo(), xs.hi(), t)?;
    let mut p = ParityPrescription::from_fn(ParityClass::Odd, window, |y, s| {
        (1..=li).contains(&y) && y % 2 == 0 && s == t - (y * y) as u64
    });
    point_towards(&mut p, xs.lo(), xs.hi(), 1..=li);
    Ok(SpaceLb {
        config: parity_force(&p)?,
        l,
        xs,
        t,
    })
}

#[derive(Clone, Debug)]
pub struct TimeLb {
    pub config: Configuration,
    /// The square actually used.
    pub t_param: u64,
    /// The requested `T` when it was not a square.
    pub rounded_from: Option<u64>,
    pub s: TimeInterval,
}

impl TimeLb {
    pub fn sidecar(&self) -> String {
        sidecar("time", &format!("T={}", self.t_param), None)
    }

    pub fn warning(&self) -> Option<String> {
        self.rounded_from
            .map(|t| format!("T = {t} is not a perfect square; using T = {}", self.t_param))
    }
}

/// Odd piles at `x` in `[sqrt T, 2 sqrt T]` at time `4T - x^2`, rotors pointing
/// at the origin, measured over `S = [4T + 1, 5T]`.
pub fn gen_time_lb(t_req: u64) -> Result<TimeLb, ForceError> {
    let (t, r) = square_floor(t_req)?;
    let (r, four) = (r as i64, 4 * t);
    let window = ForcingWindow::cone_below(0, 0, 5 * t)?;
    let mut p = ParityPrescription::from_fn(ParityClass::Even, window, |x, s| {
        (r..=2 * r).contains(&x) && s == four - (x * x) as u64
    });
    point_towards(&mut p, 0, 0, r..=2 * r);
    Ok(TimeLb {
        config: parity_force(&p)?,
        t_param: t,
        rounded_from: (t != t_req).then_some(t_req),
        s: TimeInterval::new(four + 1, t).expect("T > 0"),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpaceTimeRegime {
    /// `L >= 2 sqrt T`: piles on `[sqrt T, L]` aimed at time `L^2`.
    Wide,
    /// `L < 2 sqrt T`: the time lower-bound piles.
    Narrow,
}

#[derive(Clone, Debug)]
pub struct SpaceTimeLb {
    pub config: Configuration,
    pub l: u64,
    pub t_param: u64,
    pub rounded_from: Option<u64>,
    pub regime: SpaceTimeRegime,
    pub xs: SpaceInterval,
    pub s: TimeInterval,
}

impl SpaceTimeLb {
    pub fn sidecar(&self) -> String {
        sidecar("spacetime", &format!("L={},T={}", self.l, self.t_param), None)
    }
}

/// Construction for the box `X x S` with `X = [-L + 1, 0]` and `|S| = T`.
pub fn gen_spacetime_lb(l: u64, t_req: u64) -> Result<SpaceTimeLb, ForceError> {
    if l == 0 {
        return Err(param("L must be positive"));
    }
    let (t, r) = square_floor(t_req)?;
    let li = l as i64;
    let ri = r as i64;
    let xs = SpaceInterval::new(-li + 1, 0).expect("L >= 1");
    let (regime, class, s, piles) = if l >= 2 * r {
        let class = if l % 2 == 0 { ParityClass::Even } else { ParityClass::Odd };
        (SpaceTimeRegime::Wide, class, TimeInterval::new(l * l, t), (ri..=li, l * l))
    } else {
        (SpaceTimeRegime::Narrow, ParityClass::Even, TimeInterval::new(4 * t, t), (ri..=2 * ri, 4 * t))
    };
    let s = s.expect("T > 0");
    let (range, aim) = piles;
    let window = ForcingWindow::cone_below(xs.lo(), xs.hi(), s.last())?;
    let mut p = ParityPrescription::from_fn(class, window, |x, u| {
        range.contains(&x) && u == aim - (x * x) as u64
    });
    point_towards(&mut p, xs.lo(), xs.hi(), range.clone());
    Ok(SpaceTimeLb {
        config: parity_force(&p)?,
        l,
        t_param: t,
        rounded_from: (t != t_req).then_some(t_req),
        regime,
        xs,
        s,
    })
}

/// Independent random rotor directions, one per dyadic block
/// `(a 2^b, (a + 1) 2^b] x (4^b, 4^(b + 1)]` of even positions and ages, where
/// the age of time `s` is `horizon - s`. Odd positions and ages up to 4 point
/// `Right`.
///
/// Block `(a, b)` reads one 32-bit word of ChaCha8 seeded with `seed`: stream
/// `b`, word `zigzag(a)`; its low bit set means `Right`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RandomRotorPlan {
    pub seed: u64,
    pub horizon: u64,
}

impl RandomRotorPlan {
    pub fn new(seed: u64, horizon: u64) -> Self {
        RandomRotorPlan { seed, horizon }
    }

    /// `(a, b)` of the block holding position `x` at age `u`; `None` where the
    /// rotor is fixed to `Right`.
    pub fn block(x: i64, u: u64) -> Option<(i64, u32)> {
        if x % 2 != 0 || u <= 4 {
            return None;
        }
        let mut b = 1u32;
        while u > 1u64 << (2 * (b + 1)) {
            b += 1;
        }
        Some(((x - 1).div_euclid(1 << b), b))
    }

    pub fn block_value(&self, a: i64, b: u32) -> Rotor {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(b as u64);
        let zigzag = ((a << 1) ^ (a >> 63)) as u64;
        rng.set_word_pos(zigzag as u128);
        if rng.next_u32() & 1 == 1 { Rotor::Right } else { Rotor::Left }
    }

    /// Prescribed rotor at `x` at time `s`.
    pub fn rotor(&self, x: i64, s: u64) -> Rotor {
        let age = self.horizon.saturating_sub(s);
        Self::block(x, age).map_or(Rotor::Right, |(a, b)| self.block_value(a, b))
    }
}

#[derive(Clone, Debug)]
pub struct L2Random {
    pub config: Configuration,
    pub plan: RandomRotorPlan,
    /// Positions whose intervals may be measured at time `t`.
    pub region: SpaceInterval,
    pub t: u64,
}

impl L2Random {
    pub fn sidecar(&self) -> String {
        sidecar("l2", &format!("t={}", self.t), Some(self.plan.seed))
    }
}

/// A game whose rotors follow [`RandomRotorPlan`] wherever they can affect
/// `[-t, t]` up to time `t`.
pub fn gen_l2_random(t: u64, seed: u64) -> Result<L2Random, ForceError> {
    if t == 0 || t % 2 != 0 {
        return Err(param(format!("t must be even and positive, got {t}")));
    }
    let plan = RandomRotorPlan::new(seed, t);
    let ti = t as i64;
    let window = ForcingWindow::cone(-ti + 1, ti - 1, t + 1)?;
    let p = RotorPrescription::from_fn(ParityClass::Even, window, |x, u| plan.rotor(x, u));
    Ok(L2Random {
        config: arrow_force(&p)?,
        plan,
        region: SpaceInterval::new(-ti, ti).expect("t > 0"),
        t,
    })
}
