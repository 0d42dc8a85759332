//! Number-theoretic kernel: the Möbius function, the Witt counting function
//! χ_n(d) for basic commutators, and the binomial divisibility criterion used
//! by every multiplier formula.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Deterministic sieve of Eratosthenes; returns all primes ≤ `bound`.
pub fn primes_up_to(bound: u64) -> Vec<u64> {
    if bound < 2 {
        return Vec::new();
    }
    let n = bound as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for p in 2..=n {
        if !composite[p] {
            primes.push(p as u64);
            let mut q = p * p;
            while q <= n {
                composite[q] = true;
                q += p;
            }
        }
    }
    primes
}

/// Möbius function: 1 on 1, 0 on non-squarefree arguments, (−1)^s on a
/// product of s distinct primes.
pub fn moebius(m: u64) -> Result<i32> {
    if m == 0 {
        return Err(Error::Domain("moebius is undefined at 0".into()));
    }
    let mut rest = m;
    let mut s = 0;
    let mut p = 2u64;
    while p * p <= rest {
        if rest % p == 0 {
            rest /= p;
            if rest % p == 0 {
                return Ok(0);
            }
            s += 1;
        }
        p += 1;
    }
    if rest > 1 {
        s += 1;
    }
    Ok(if s % 2 == 0 { 1 } else { -1 })
}

fn divisors(n: u64) -> Vec<u64> {
    let mut divs = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            divs.push(d);
            if d != n / d {
                divs.push(n / d);
            }
        }
        d += 1;
    }
    divs.sort_unstable();
    divs
}

/// Witt formula: the number of basic commutators of weight `n` on `d`
/// letters, χ_n(d) = (1/n) Σ_{m|n} μ(m) d^{n/m}.
///
/// The divisor sum is asserted to be nonnegative and divisible by `n` before
/// dividing. Panics if `n == 0`.
pub fn witt_chi(n: u64, d: u64) -> BigUint {
    witt_chi_big(n, &BigUint::from(d))
}

/// χ_n(d) for an arbitrary-precision alphabet size; the iterated formulas
/// feed χ its own output, which overflows any fixed width almost immediately.
pub fn witt_chi_big(n: u64, d: &BigUint) -> BigUint {
    assert!(n >= 1, "witt_chi requires n >= 1");
    let d = BigInt::from(d.clone());
    let mut sum = BigInt::zero();
    for m in divisors(n) {
        let mu = moebius(m).expect("divisor is positive");
        if mu == 0 {
            continue;
        }
        let term = d.pow((n / m) as u32);
        if mu > 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    assert!(!sum.is_negative(), "Witt divisor sum must be nonnegative");
    let (q, r) = sum.div_rem(&BigInt::from(n));
    assert!(r.is_zero(), "Witt divisor sum must be divisible by n");
    q.to_biguint().expect("quotient is nonnegative")
}

/// Σ_{i=1..n} χ_{c+i}(d): the multiplicity kernel of the multiplier formulas.
pub fn sum_chi(c: u64, n: u64, d: u64) -> BigUint {
    sum_chi_big(c, n, &BigUint::from(d))
}

/// Arbitrary-precision-argument variant of [`sum_chi`].
pub fn sum_chi_big(c: u64, n: u64, d: &BigUint) -> BigUint {
    assert!(n >= 1, "sum_chi requires n >= 1");
    (1..=n).map(|i| witt_chi_big(c + i, d)).sum()
}

/// Exact binomial coefficient C(n, k).
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let mut acc = BigUint::one();
    for i in 0..k.min(n - k) {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// Outcome of the divisibility criterion for r | C(r, i).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DivisibilityReport {
    /// gcd(p, r) = 1 for every prime p ≤ i.
    pub hypothesis_holds: bool,
    /// r divides C(r, i).
    pub divides: bool,
}

/// Checks, for 1 ≤ i < r, whether every prime p ≤ i is coprime to r and
/// whether r divides C(r, i). The first condition implies the second; the
/// report carries both so the implication itself can be tested.
pub fn binomial_divisibility(r: u64, i: u64) -> Result<DivisibilityReport> {
    if i < 1 || i >= r {
        return Err(Error::Domain(format!(
            "binomial_divisibility requires 1 <= i < r, got r={r}, i={i}"
        )));
    }
    let hypothesis_holds = primes_up_to(i).iter().all(|&p| r % p != 0);
    let divides = (binomial(r, i) % BigUint::from(r)).is_zero();
    Ok(DivisibilityReport {
        hypothesis_holds,
        divides,
    })
}
