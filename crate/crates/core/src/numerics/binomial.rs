use num_bigint::BigUint;
use num_traits::{One, Zero};

/// Exact `C(n, k)`; zero when `k < 0` or `k > n`.
pub fn binom(n: u64, k: i64) -> BigUint {
    if k < 0 || k as u64 > n {
        return BigUint::zero();
    }
    binom_u(n, k as u64)
}

pub(crate) fn binom_u(n: u64, k: u64) -> BigUint {
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    // multiply/divide in u64-sized batches; each partial product is itself a binomial
    let mut i = 0u64;
    while i < k {
        let mut num = 1u64;
        let mut den = 1u64;
        while i < k {
            let (a, b) = (n - k + i + 1, i + 1);
            match (num.checked_mul(a), den.checked_mul(b)) {
                (Some(x), Some(y)) if x < (1 << 62) => {
                    num = x;
                    den = y;
                    i += 1;
                }
                _ => break,
            }
        }
        acc *= num;
        acc /= den;
    }
    acc
}

/// Parity of `C(n, k)` by Lucas' theorem: odd iff the bits of `k` are a subset of those of `n`.
pub fn binom_parity(n: u64, k: i64) -> bool {
    k >= 0 && (k as u64 & n) == k as u64
}

/// A binomial coefficient `C(n, k)` moved around Pascal's triangle by exact rescaling,
/// so that a run of nearby coefficients costs one short multiplication per step.
#[derive(Clone, Debug)]
pub struct BinomialWalker {
    n: u64,
    k: u64,
    value: BigUint,
}

impl BinomialWalker {
    pub fn new(n: u64, k: u64) -> Self {
        assert!(k <= n, "walker must start inside the triangle");
        BinomialWalker {
            n,
            k,
            value: binom_u(n, k),
        }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn value(&self) -> &BigUint {
        &self.value
    }

    /// `C(n, k) -> C(n + 1, k)`.
    pub fn inc_n(&mut self) {
        self.value *= self.n + 1;
        self.value /= self.n + 1 - self.k;
        self.n += 1;
    }

    /// `C(n, k) -> C(n + 1, k + 1)`.
    pub fn inc_nk(&mut self) {
        self.value *= self.n + 1;
        self.value /= self.k + 1;
        self.n += 1;
        self.k += 1;
    }

    /// `C(n, k) -> C(n, k + 1)`; requires `k < n`.
    pub fn inc_k(&mut self) {
        assert!(self.k < self.n);
        self.value *= self.n - self.k;
        self.value /= self.k + 1;
        self.k += 1;
    }

    /// `C(n, k) -> C(n, k - 1)`; requires `k > 0`.
    pub fn dec_k(&mut self) {
        assert!(self.k > 0);
        self.value *= self.k;
        self.value /= self.n - self.k + 1;
        self.k -= 1;
    }

    /// Move to `C(n2, k2)` with `n2 >= n` and `k2 <= n2`, staying inside the triangle.
    pub fn move_to(&mut self, n2: u64, k2: u64) {
        assert!(n2 >= self.n && k2 <= n2);
        while self.n < n2 {
            if self.k < k2 {
                self.inc_nk();
            } else {
                self.inc_n();
            }
        }
        while self.k < k2 {
            self.inc_k();
        }
        while self.k > k2 {
            self.dec_k();
        }
    }

    /// The neighbour `C(n, k + 1)` without moving.
    pub fn right_neighbour(&self) -> BigUint {
        if self.k >= self.n {
            return BigUint::zero();
        }
        &self.value * (self.n - self.k) / (self.k + 1)
    }
}
