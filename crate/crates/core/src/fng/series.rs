//! Truncated noncommutative power series over the integers.
//!
//! The free group on d letters embeds into the units of Z⟨X_1..X_d⟩ via
//! x_j ↦ 1 + X_j, and modulo words of length > K this representation is
//! faithful for the free nilpotent group of class K. The collection engine
//! uses it to derive the normal form of each pairwise generator commutator
//! exactly; it never replaces collection itself.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

/// Monomial indexing for words of length 0..=degree over `letters` symbols.
pub(crate) struct SeriesCtx {
    degree: usize,
    /// `offsets[l]` = index of the first length-`l` monomial.
    offsets: Vec<usize>,
    dim: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Series {
    coeffs: Vec<BigInt>,
}

impl SeriesCtx {
    pub fn new(letters: usize, degree: usize) -> SeriesCtx {
        let mut offsets = Vec::with_capacity(degree + 2);
        let mut acc = 0usize;
        let mut pow = 1usize;
        for _ in 0..=degree {
            offsets.push(acc);
            acc += pow;
            pow *= letters;
        }
        offsets.push(acc);
        SeriesCtx {
            degree,
            offsets,
            dim: acc,
        }
    }

    /// Number of monomials of length `l`.
    pub fn monomial_count(&self, l: usize) -> usize {
        self.len_count(l)
    }

    fn len_count(&self, l: usize) -> usize {
        self.offsets[l + 1] - self.offsets[l]
    }

    pub fn zero(&self) -> Series {
        Series {
            coeffs: vec![BigInt::zero(); self.dim],
        }
    }

    pub fn one(&self) -> Series {
        let mut s = self.zero();
        s.coeffs[0] = BigInt::one();
        s
    }

    /// The image 1 + X_j of the 1-based letter `j`.
    pub fn letter(&self, j: u32) -> Series {
        let mut s = self.one();
        s.coeffs[self.offsets[1] + (j as usize - 1)] = BigInt::one();
        s
    }

    pub fn mul(&self, a: &Series, b: &Series) -> Series {
        let mut out = self.zero();
        for la in 0..=self.degree {
            for ia in 0..self.len_count(la) {
                let ca = &a.coeffs[self.offsets[la] + ia];
                if ca.is_zero() {
                    continue;
                }
                for lb in 0..=(self.degree - la) {
                    let shift = self.len_count(lb);
                    let base = self.offsets[la + lb] + ia * shift;
                    for ib in 0..shift {
                        let cb = &b.coeffs[self.offsets[lb] + ib];
                        if !cb.is_zero() {
                            out.coeffs[base + ib] += ca * cb;
                        }
                    }
                }
            }
        }
        out
    }

    /// Multiplicative inverse of a series with constant term 1.
    pub fn group_inverse(&self, a: &Series) -> Series {
        assert!(a.coeffs[0].is_one(), "group element must have unit constant term");
        // a = 1 + u with u supported on positive lengths; a^-1 = sum (-u)^k.
        let mut neg_u = self.zero();
        for (i, c) in a.coeffs.iter().enumerate().skip(1) {
            neg_u.coeffs[i] = -c;
        }
        let mut acc = self.one();
        let mut term = self.one();
        for _ in 1..=self.degree {
            term = self.mul(&term, &neg_u);
            if term.coeffs.iter().all(Zero::is_zero) {
                break;
            }
            for (o, t) in acc.coeffs.iter_mut().zip(&term.coeffs) {
                *o += t;
            }
        }
        acc
    }

    /// Group commutator a⁻¹ b⁻¹ a b.
    pub fn group_comm(&self, a: &Series, b: &Series) -> Series {
        let left = self.mul(&self.group_inverse(a), &self.group_inverse(b));
        self.mul(&left, &self.mul(a, b))
    }

    /// a^e by binary powering; negative exponents via the inverse.
    pub fn pow(&self, a: &Series, e: &BigInt) -> Series {
        if e.is_zero() {
            return self.one();
        }
        let base = if e.is_negative() {
            self.group_inverse(a)
        } else {
            a.clone()
        };
        let mut result = self.one();
        let mut square = base;
        let mut bits = e.magnitude().clone();
        while !bits.is_zero() {
            if bits.bit(0) {
                result = self.mul(&result, &square);
            }
            bits >>= 1;
            if !bits.is_zero() {
                square = self.mul(&square, &square);
            }
        }
        result
    }

    pub fn is_one(&self, a: &Series) -> bool {
        a.coeffs[0].is_one() && a.coeffs.iter().skip(1).all(Zero::is_zero)
    }

    /// The coefficients of all length-`w` monomials.
    pub fn component<'a>(&self, a: &'a Series, w: usize) -> &'a [BigInt] {
        &a.coeffs[self.offsets[w]..self.offsets[w + 1]]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn letters_satisfy_group_axioms() {
        let ctx = SeriesCtx::new(2, 4);
        let x = ctx.letter(1);
        let y = ctx.letter(2);
        let xy = ctx.mul(&x, &y);
        let yx = ctx.mul(&y, &x);
        assert_ne!(xy, yx);
        assert!(ctx.is_one(&ctx.mul(&x, &ctx.group_inverse(&x))));
        // Associativity.
        assert_eq!(ctx.mul(&ctx.mul(&x, &y), &x), ctx.mul(&x, &ctx.mul(&y, &x)));
    }

    #[test]
    fn commutator_has_leading_lie_bracket() {
        let ctx = SeriesCtx::new(2, 3);
        let x = ctx.letter(1);
        let y = ctx.letter(2);
        let c = ctx.group_comm(&x, &y);
        // Degree-2 component of [x,y] is XY - YX.
        assert_eq!(
            ctx.component(&c, 2),
            &[
                BigInt::zero(),
                BigInt::one(),
                -BigInt::one(),
                BigInt::zero()
            ]
        );
    }

    #[test]
    fn powers_match_repeated_multiplication() {
        let ctx = SeriesCtx::new(2, 4);
        let x = ctx.letter(1);
        let y = ctx.letter(2);
        let w = ctx.mul(&x, &y);
        let mut acc = ctx.one();
        for _ in 0..5 {
            acc = ctx.mul(&acc, &w);
        }
        assert_eq!(ctx.pow(&w, &BigInt::from(5)), acc);
        let inv5 = ctx.pow(&w, &BigInt::from(-5));
        assert!(ctx.is_one(&ctx.mul(&acc, &inv5)));
    }
}
