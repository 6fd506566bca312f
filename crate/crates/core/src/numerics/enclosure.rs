//! Outward-rounded fixed-point intervals, used to certify sums that are too
//! large to evaluate exactly.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Binary digits kept after the point.
pub const PREC: u64 = 160;

/// Closed interval `[lo, hi] / 2^PREC`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Enclosure {
    pub lo: BigInt,
    pub hi: BigInt,
}

fn one_fixed() -> BigInt {
    BigInt::one() << PREC
}

fn shr_floor(x: BigInt) -> BigInt {
    x >> PREC
}

fn shr_ceil(x: BigInt) -> BigInt {
    -((-x) >> PREC)
}

impl Enclosure {
    pub fn exact_int(v: i64) -> Self {
        let x = BigInt::from(v) << PREC;
        Enclosure { lo: x.clone(), hi: x }
    }

    /// Tightest enclosure of `num / den` (`den > 0`).
    pub fn ratio(num: &BigInt, den: &BigInt) -> Self {
        assert!(den.is_positive());
        let scaled = num << PREC;
        Enclosure {
            lo: scaled.div_floor(den),
            hi: scaled.div_ceil(den),
        }
    }

    pub fn ratio_i(num: i128, den: i128) -> Self {
        Enclosure::ratio(&BigInt::from(num), &BigInt::from(den))
    }

    /// Enclosure of everything between two rationals.
    pub fn between(lo: &BigRational, hi: &BigRational) -> Self {
        assert!(lo <= hi);
        Enclosure {
            lo: Enclosure::ratio(lo.numer(), lo.denom()).lo,
            hi: Enclosure::ratio(hi.numer(), hi.denom()).hi,
        }
    }

    pub fn width(&self) -> BigInt {
        &self.hi - &self.lo
    }

    pub fn add(&self, o: &Enclosure) -> Enclosure {
        Enclosure {
            lo: &self.lo + &o.lo,
            hi: &self.hi + &o.hi,
        }
    }

    pub fn sub(&self, o: &Enclosure) -> Enclosure {
        Enclosure {
            lo: &self.lo - &o.hi,
            hi: &self.hi - &o.lo,
        }
    }

    pub fn scale_int(&self, k: u64) -> Enclosure {
        Enclosure {
            lo: &self.lo * k,
            hi: &self.hi * k,
        }
    }

    pub fn div_int(&self, k: u64) -> Enclosure {
        let k = BigInt::from(k);
        Enclosure {
            lo: self.lo.div_floor(&k),
            hi: self.hi.div_ceil(&k),
        }
    }

    fn assert_nonneg(&self) {
        assert!(!self.lo.is_negative(), "enclosure must be non-negative");
    }

    /// Product of two non-negative enclosures.
    pub fn mul(&self, o: &Enclosure) -> Enclosure {
        self.assert_nonneg();
        o.assert_nonneg();
        Enclosure {
            lo: shr_floor(&self.lo * &o.lo),
            hi: shr_ceil(&self.hi * &o.hi),
        }
    }

    pub fn sqrt(&self) -> Enclosure {
        self.assert_nonneg();
        let lo = (&self.lo << PREC).sqrt();
        let hi_sq = &self.hi << PREC;
        let mut hi = hi_sq.sqrt();
        if &hi * &hi < hi_sq {
            hi += 1;
        }
        Enclosure { lo, hi }
    }

    /// `exp` of the enclosed interval; the argument should be moderate (|x| < 64).
    pub fn exp(&self) -> Enclosure {
        Enclosure {
            lo: exp_point(&self.lo, false),
            hi: exp_point(&self.hi, true),
        }
    }

    pub fn lower_rational(&self) -> BigRational {
        BigRational::new(self.lo.clone(), one_fixed())
    }

    pub fn upper_rational(&self) -> BigRational {
        BigRational::new(self.hi.clone(), one_fixed())
    }

    pub fn contains(&self, q: &BigRational) -> bool {
        self.lower_rational() <= *q && *q <= self.upper_rational()
    }
}

/// Rounded bound on `exp(v / 2^PREC)`: an upper bound if `upward`, otherwise a lower bound.
fn exp_point(v: &BigInt, upward: bool) -> BigInt {
    if v.is_negative() {
        // exp(-a) = 1 / exp(a), with the rounding direction swapped
        let inv = exp_nonneg(&-v, !upward);
        let num = BigInt::one() << (2 * PREC);
        return if upward {
            num.div_ceil(&inv)
        } else {
            num.div_floor(&inv)
        };
    }
    exp_nonneg(v, upward)
}

fn exp_nonneg(v: &BigInt, upward: bool) -> BigInt {
    assert!(*v < (BigInt::from(64) << PREC), "exp argument out of range");
    let mut term = one_fixed();
    let mut sum = term.clone();
    let mut n = 0u64;
    loop {
        n += 1;
        let prod = &term * v;
        let d = BigInt::from(n);
        term = if upward {
            shr_ceil(prod).div_ceil(&d)
        } else {
            shr_floor(prod).div_floor(&d)
        };
        sum += &term;
        // once v <= (n + 1) / 2 the remaining tail is at most the last term
        let v_small = v * 2u32 <= (BigInt::from(n + 1) << PREC);
        if v_small && term <= BigInt::one() {
            break;
        }
        if v_small && !upward && term.is_zero() {
            break;
        }
    }
    if upward {
        sum += term * 2 + 1;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn ratio_is_tight_and_contains() {
        let e = Enclosure::ratio_i(1, 3);
        assert!(e.contains(&rat(1, 3)));
        assert!(e.width() <= BigInt::one());
    }

    #[test]
    fn sqrt_contains_root() {
        let e = Enclosure::ratio_i(2, 1).sqrt();
        let lo = e.lower_rational();
        let hi = e.upper_rational();
        assert!(&lo * &lo <= rat(2, 1) && rat(2, 1) <= &hi * &hi);
        assert!(e.width() <= BigInt::from(2));
    }

    #[test]
    fn exp_brackets_reference_values() {
        // e = 2.71828182845904523536..., 1/e = 0.36787944117144232159...
        let e1 = Enclosure::exact_int(1).exp();
        assert!(e1.lower_rational() > rat(2718281828459045235, 1_000_000_000_000_000_000));
        assert!(e1.upper_rational() < rat(2718281828459045236, 1_000_000_000_000_000_000));
        let em1 = Enclosure::exact_int(-1).exp();
        assert!(em1.lower_rational() > rat(367879441171442321, 1_000_000_000_000_000_000));
        assert!(em1.upper_rational() < rat(367879441171442322, 1_000_000_000_000_000_000));
        assert!(em1.width() < BigInt::from(64));
    }

    #[test]
    fn exp_of_zero_is_one() {
        let e = Enclosure::exact_int(0).exp();
        assert!(e.contains(&rat(1, 1)));
    }
}
