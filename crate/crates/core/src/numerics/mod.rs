//! Exact arithmetic for the walk: binomials, the heat kernel `H`, the
//! one-split influence `inf`, and a certified bracket on the constant
//! `c1 = sum_y |inf(y, t_max(y))|` (taken over all non-zero `y`).

mod binomial;
mod dyadic;
pub mod enclosure;

pub use binomial::{binom, binom_parity, BinomialWalker};
pub use dyadic::Dyadic;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::sync::OnceLock;

use thiserror::Error;

use enclosure::Enclosure;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NumericsError {
    #[error("position must be non-zero")]
    ZeroPosition,
    #[error("cutoff must be at least 1")]
    ZeroCutoff,
}

/// Probability that a simple random walk started at 0 is at `x` after `t` steps.
pub fn h(x: i64, t: i64) -> Dyadic {
    match h_numerator(x, t) {
        Some(c) => Dyadic::from_biguint(c, t as u64),
        None => Dyadic::zero(),
    }
}

/// `C(t, (t + x) / 2)`, the numerator of `h(x, t)` over `2^t`; `None` where `h` vanishes.
pub fn h_numerator(x: i64, t: i64) -> Option<BigUint> {
    if t < 0 || x.unsigned_abs() > t as u64 || (t - x).is_odd() {
        return None;
    }
    Some(binom(t as u64, (t + x) / 2))
}

/// Change in the expected load at `x` caused by one odd split at the origin
/// with its rotor pointing right, observed `t` steps later.
pub fn inf(y: i64, t: i64) -> Dyadic {
    if t <= 0 {
        return Dyadic::zero();
    }
    (h(y + 1, t - 1) - h(y - 1, t - 1)).half()
}

/// The time at which `|inf(y, .)|` peaks.
pub fn t_max(y: i64) -> Result<u64, NumericsError> {
    if y == 0 {
        return Err(NumericsError::ZeroPosition);
    }
    let y = y.unsigned_abs() as i128;
    Ok(((y * y - 4).div_euclid(3) + 2) as u64)
}

/// `|inf(y, t)|` for `y > 0`, `t ~ y`, `t >= y`, evaluated from one binomial walker
/// parked at `C(t - 1, (t + y) / 2 - 1)`.
fn abs_inf_numerator(w: &BinomialWalker) -> BigUint {
    // |inf| * 2^t = C(t-1, k-1) - C(t-1, k) for y > 0
    w.value() - w.right_neighbour()
}

/// `|inf(y, t_max(y))|` for `y = 1..=y_hi`, exactly.
fn peak_influences(y_hi: u64) -> Vec<Dyadic> {
    let mut out = Vec::with_capacity(y_hi as usize);
    let mut walker = BinomialWalker::new(0, 0);
    for y in 1..=y_hi {
        let t = t_max(y as i64).unwrap();
        let k = (t + y) / 2;
        walker.move_to(t - 1, k - 1);
        out.push(Dyadic::from_biguint(abs_inf_numerator(&walker), t));
    }
    out
}

const PI_LO: &str = "314159265358979323846264338327950288419";
const PI_HI: &str = "314159265358979323846264338327950288420";
const PI_SCALE_DIGITS: u32 = 38;

/// Rational bounds on pi, both over the denominator `10^38`.
pub fn pi_bounds() -> &'static (BigRational, BigRational) {
    static PI: OnceLock<(BigRational, BigRational)> = OnceLock::new();
    PI.get_or_init(|| {
        let den = BigInt::from(10u32).pow(PI_SCALE_DIGITS);
        let lo: BigInt = PI_LO.parse().unwrap();
        let hi: BigInt = PI_HI.parse().unwrap();
        (
            BigRational::new_raw(lo, den.clone()),
            BigRational::new_raw(hi, den),
        )
    })
}

/// Rational `K` with `2 * sum_{y > N} |inf(y, t_max(y))| <= K / N`.
///
/// From `H(y, t) <= sqrt(2 / (pi t))`, `|inf(y, t)| = (y / t) H(y, t)` and
/// `t_max(y) >= y^2 / 3` one gets each term below `sqrt(2/pi) 3^{3/2} / y^2`,
/// so `K^2 >= 216 / pi` suffices.
pub fn c1_tail_constant() -> BigRational {
    BigRational::new(BigInt::from(82919), BigInt::from(10000))
}

/// Beyond this position the bracket evaluates peak influences by certified
/// interval arithmetic instead of exact binomials.
pub const EXACT_PEAK_LIMIT: u64 = 256;

/// Enclosure of `|inf(y, t_max(y))|` from Stirling's series with Robbins' remainder bounds.
pub fn peak_influence_enclosure(y: u64) -> Enclosure {
    assert!(y >= 4);
    let t = t_max(y as i64).unwrap();
    let k = (t + y) / 2;
    let j = (t - y) / 2;
    let (yi, ti) = (BigInt::from(y), BigInt::from(t));

    // H(y, t) = sqrt(2 / (pi t)) * exp(phi + r), with u = y / t,
    // phi = -(t/2) sum_n u^{2n} / (n (2n - 1)) + (1/2) sum_n u^{2n} / n
    let w = Enclosure::ratio(&(&yi * &yi), &(&ti * &ti));
    let mut power = w.clone();
    let mut s1 = Enclosure::exact_int(0);
    let mut s2 = Enclosure::exact_int(0);
    let mut n = 1u64;
    loop {
        s1 = s1.add(&power.div_int(n * (2 * n - 1)));
        s2 = s2.add(&power.div_int(n));
        power = power.mul(&w);
        // remaining terms of either series sum to at most 2 w^{n+1}; stop at one ulp
        if power.hi <= BigInt::one() {
            let slack = &power.hi * 2u32;
            s1.hi += &slack;
            s2.hi += &slack;
            break;
        }
        n += 1;
    }
    let phi = s2.div_int(2).sub(&s1.scale_int(t).div_int(2));

    // Robbins: 1/(12n+1) < r_n < 1/(12n); r = r_t - r_k - r_j
    let recip = |d: u64| Enclosure::ratio(&BigInt::one(), &BigInt::from(d));
    let r = Enclosure {
        lo: recip(12 * t + 1).lo - recip(12 * k).hi - recip(12 * j).hi,
        hi: recip(12 * t).hi - recip(12 * k + 1).lo - recip(12 * j + 1).lo,
    };
    let growth = phi.add(&r).exp();

    let (pi_lo, pi_hi) = pi_bounds();
    // 2 / (pi t), with pi = p / q bracketed by the two rationals
    let two_q = pi_lo.denom() * 2u32;
    let a = Enclosure {
        lo: Enclosure::ratio(&two_q, &(pi_hi.numer() * &ti)).lo,
        hi: Enclosure::ratio(&two_q, &(pi_lo.numer() * &ti)).hi,
    };
    let ratio = Enclosure::ratio(&yi, &ti);
    ratio.mul(&a.sqrt()).mul(&growth)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct C1Bracket {
    pub lower: BigRational,
    pub upper: BigRational,
    pub terms_used: u64,
}

impl C1Bracket {
    pub fn width(&self) -> BigRational {
        &self.upper - &self.lower
    }
}

/// Certified bracket on `c1` using the positions `1..=y_cut` plus an analytic tail bound.
///
/// Terms up to [`EXACT_PEAK_LIMIT`] are summed exactly; beyond it each term is
/// enclosed with outward rounding, so `lower` is a rigorous lower bound and
/// `upper` a rigorous upper bound.
pub fn c1_bracket(y_cut: u64) -> Result<C1Bracket, NumericsError> {
    if y_cut == 0 {
        return Err(NumericsError::ZeroCutoff);
    }
    let exact: Dyadic = peak_influences(y_cut.min(EXACT_PEAK_LIMIT)).iter().sum();
    let mut lo = BigInt::zero();
    let mut hi = BigInt::zero();
    for y in EXACT_PEAK_LIMIT + 1..=y_cut {
        let e = peak_influence_enclosure(y);
        lo += e.lo;
        hi += e.hi;
    }
    let approx = Enclosure { lo, hi };
    let two = BigRational::from_integer(BigInt::from(2));
    let exact = exact.to_rational();
    let lower = (&exact + approx.lower_rational()) * &two;
    let tail = c1_tail_constant() / BigRational::from_integer(BigInt::from(y_cut));
    let upper = (&exact + approx.upper_rational()) * &two + tail;
    Ok(C1Bracket {
        lower,
        upper,
        terms_used: y_cut,
    })
}

/// `sum_{t=1}^{t_cut} |inf(x, t)|`, exactly.
pub fn inf_time_partial_sum(x: i64, t_cut: u64) -> Dyadic {
    let y = x.unsigned_abs();
    if y == 0 || t_cut < y {
        return Dyadic::zero();
    }
    // terms live at t = y, y + 2, ...; accumulate over the running denominator 2^t
    let mut t = y;
    let mut walker = BinomialWalker::new(t - 1, (t + y) / 2 - 1);
    let mut acc = BigUint::zero();
    let mut scale = t;
    loop {
        acc <<= t - scale;
        scale = t;
        acc += abs_inf_numerator(&walker);
        if t + 2 > t_cut {
            break;
        }
        t += 2;
        walker.inc_n();
        walker.inc_nk();
    }
    Dyadic::from_biguint(acc, scale)
}

/// A column `t -> H(x, t)` for fixed `x`, visiting `t = |x|, |x| + 2, ...` exactly.
pub struct HColumn {
    t: u64,
    walker: BinomialWalker,
}

impl HColumn {
    pub fn new(x: i64) -> Self {
        let y = x.unsigned_abs();
        HColumn {
            t: y,
            walker: BinomialWalker::new(y, y),
        }
    }

    pub fn time(&self) -> u64 {
        self.t
    }

    pub fn value(&self) -> Dyadic {
        Dyadic::from_biguint(self.walker.value().clone(), self.t)
    }

    pub fn advance(&mut self) {
        self.walker.inc_n();
        self.walker.inc_nk();
        self.t += 2;
    }
}

/// A column `t -> |inf(x, t)|` for fixed non-zero `x`, visiting `t = |x|, |x| + 2, ...`.
pub struct InfColumn {
    t: u64,
    walker: BinomialWalker,
}

impl InfColumn {
    pub fn new(x: i64) -> Self {
        let y = x.unsigned_abs();
        assert!(y > 0);
        InfColumn {
            t: y,
            walker: BinomialWalker::new(y - 1, y - 1),
        }
    }

    pub fn time(&self) -> u64 {
        self.t
    }

    pub fn value(&self) -> Dyadic {
        Dyadic::from_biguint(abs_inf_numerator(&self.walker), self.t)
    }

    pub fn advance(&mut self) {
        self.walker.inc_n();
        self.walker.inc_nk();
        self.t += 2;
    }
}

/// Decimal rendering of `num / den` (`den > 0`), rounded half away from zero.
pub fn format_decimal(num: &BigInt, den: &BigInt, digits: usize) -> String {
    let ten_pow = BigInt::from(10u32).pow(digits as u32);
    let scaled: BigInt = num.abs() * &ten_pow * 2 + den;
    let q = scaled.div_floor(&(den * 2));
    let (int_part, frac) = q.div_rem(&ten_pow);
    let sign = if num.sign() == Sign::Minus && !q.is_zero() { "-" } else { "" };
    if digits == 0 {
        format!("{sign}{int_part}")
    } else {
        format!("{sign}{int_part}.{:0>width$}", frac.to_string(), width = digits)
    }
}

pub fn rational_to_decimal(r: &BigRational, digits: usize) -> String {
    format_decimal(r.numer(), r.denom(), digits)
}
