//! Arithmetic in the free nilpotent group of class K on d letters: normal
//! forms over the Hall basis, multiplication by the collection process,
//! powers, and commutators.
//!
//! A group element is a product of basis elements in increasing basis order
//! with nonzero integer exponents ([`NormalWord`]); such forms exist and are
//! unique. Multiplication concatenates words and then collects: the leftmost
//! occurrence of the smallest uncollected generator is bubbled to the front
//! through exchanges v·u → u·v·[v,u], and every commutator of weight beyond
//! the class is discarded at creation time.
//!
//! Exchange corrections [v,u] are re-expressed over the basis once per
//! generator pair (and once per power pair for syllable exchanges) and
//! cached. The re-expression is obtained in the faithful truncated-series
//! representation (see [`series`]): the group commutator is computed there
//! and its normal form is read back layer by layer, solving a small exact
//! integer system per weight. Collection itself never leaves the symbolic
//! side.

mod series;

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Budget, Error, Result};
use crate::hall::HallBasis;
use crate::linalg::ExactSolver;
use series::{Series, SeriesCtx};

/// An element of the free nilpotent group in normal form: basis positions
/// with nonzero exponents, strictly increasing. The empty word is the
/// identity.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct NormalWord {
    terms: Vec<(usize, BigInt)>,
}

impl NormalWord {
    pub fn identity() -> NormalWord {
        NormalWord { terms: Vec::new() }
    }

    pub fn is_identity(&self) -> bool {
        self.terms.is_empty()
    }

    /// (basis position, exponent) pairs in increasing basis order.
    pub fn terms(&self) -> &[(usize, BigInt)] {
        &self.terms
    }
}

/// (h position, h sign, g position, g sign).
type SignedPair = (usize, bool, usize, bool);

/// (h position, h exponent, g position, g exponent).
type PowerPair = (usize, BigInt, usize, BigInt);

#[derive(Default)]
struct Caches {
    /// Series image per basis position.
    series: Mutex<HashMap<usize, Arc<Series>>>,
    /// Per-weight solver extracting layer exponents from a series component.
    solvers: Mutex<HashMap<u32, Arc<ExactSolver>>>,
    /// Normal form of [b_h, b_g] for basis positions h > g.
    comm: Mutex<HashMap<(usize, usize), Arc<NormalWord>>>,
    /// Normal form of [b_h^±1, b_g^±1].
    comm_signed: Mutex<HashMap<SignedPair, Arc<NormalWord>>>,
    /// Normal form of [b_h^f, b_g^e] for general syllable exponents.
    comm_powers: Mutex<HashMap<PowerPair, Arc<NormalWord>>>,
}

/// The free nilpotent group of class `class` on the letters of `basis`.
/// Immutable once built; operations are pure and safe to call concurrently.
pub struct NilpotentContext {
    basis: HallBasis,
    class: u32,
    budget: Budget,
    series_ctx: SeriesCtx,
    caches: Caches,
}

impl NilpotentContext {
    /// Builds the context for `letters >= 1` letters and class `class >= 1`;
    /// the underlying basis runs exactly through weight `class`.
    pub fn new(letters: u32, class: u32, budget: Budget) -> Result<NilpotentContext> {
        if class < 1 {
            return Err(Error::Domain("class must be at least 1".into()));
        }
        let basis = HallBasis::generate(letters, class, &budget)?;
        let series_ctx = SeriesCtx::new(letters as usize, class as usize);
        Ok(NilpotentContext {
            basis,
            class,
            budget,
            series_ctx,
            caches: Caches::default(),
        })
    }

    pub fn basis(&self) -> &HallBasis {
        &self.basis
    }

    pub fn class(&self) -> u32 {
        self.class
    }

    pub fn identity(&self) -> NormalWord {
        NormalWord::identity()
    }

    /// The 1-based letter `j` as a group element.
    pub fn generator(&self, j: u32) -> Result<NormalWord> {
        let c = self.basis.letter(j)?;
        Ok(NormalWord {
            terms: vec![(self.basis.position(c), BigInt::one())],
        })
    }

    fn weight_at(&self, pos: usize) -> u32 {
        self.basis.weight(self.basis.element(pos))
    }

    /// Smallest basis weight in the support, `None` for the identity.
    pub fn min_weight(&self, w: &NormalWord) -> Option<u32> {
        w.terms.first().map(|&(p, _)| self.weight_at(p))
    }

    /// Normal form of an arbitrary product of basis elements.
    pub fn word(&self, terms: &[(usize, BigInt)]) -> Result<NormalWord> {
        self.collect(terms.to_vec())
    }

    pub fn multiply(&self, u: &NormalWord, v: &NormalWord) -> Result<NormalWord> {
        let mut word = u.terms.clone();
        word.extend(v.terms.iter().cloned());
        self.collect(word)
    }

    pub fn inverse(&self, u: &NormalWord) -> Result<NormalWord> {
        let word = u
            .terms
            .iter()
            .rev()
            .map(|(p, e)| (*p, -e.clone()))
            .collect();
        self.collect(word)
    }

    /// u^e by binary powering; e = −1 is the group inverse.
    pub fn power(&self, u: &NormalWord, e: &BigInt) -> Result<NormalWord> {
        if e.is_zero() || u.is_identity() {
            return Ok(NormalWord::identity());
        }
        if u.terms.len() == 1 {
            let (p, k) = &u.terms[0];
            return Ok(NormalWord {
                terms: vec![(*p, k * e)],
            });
        }
        let base = if e.is_negative() {
            self.inverse(u)?
        } else {
            u.clone()
        };
        let mut result = NormalWord::identity();
        let mut square = base;
        let mut bits = e.magnitude().clone();
        loop {
            if bits.bit(0) {
                result = self.multiply(&result, &square)?;
            }
            bits >>= 1;
            if bits.is_zero() {
                break;
            }
            square = self.multiply(&square, &square)?;
        }
        Ok(result)
    }

    /// [u, v] = u⁻¹ v⁻¹ u v.
    pub fn commutator(&self, u: &NormalWord, v: &NormalWord) -> Result<NormalWord> {
        let mut word: Vec<(usize, BigInt)> = Vec::new();
        for x in [u, v] {
            word.extend(x.terms.iter().rev().map(|(p, e)| (*p, -e.clone())));
        }
        word.extend(u.terms.iter().cloned());
        word.extend(v.terms.iter().cloned());
        self.collect(word)
    }

    /// Left-normed chain [u, z_1, …, z_k].
    pub fn commutator_chain(&self, u: &NormalWord, zs: &[NormalWord]) -> Result<NormalWord> {
        let mut acc = u.clone();
        for z in zs {
            acc = self.commutator(&acc, z)?;
        }
        Ok(acc)
    }

    /// Product-form rendering, e.g. `x1^2 x2^2 [x2,x1]^1`; the identity
    /// renders as `1`.
    pub fn render(&self, w: &NormalWord) -> String {
        if w.is_identity() {
            return "1".into();
        }
        w.terms
            .iter()
            .map(|(p, e)| format!("{}^{}", self.basis.render(self.basis.element(*p)), e))
            .collect::<Vec<_>>()
            .join(" ")
    }

    // ---- collection ----

    /// Collects an arbitrary word (any order, any exponents) into normal
    /// form. Deterministic: always bubbles the leftmost occurrence of the
    /// smallest uncollected generator.
    pub fn collect(&self, mut word: Vec<(usize, BigInt)>) -> Result<NormalWord> {
        if let Some(&(p, _)) = word.iter().find(|&&(p, _)| p >= self.basis.len()) {
            return Err(Error::Domain(format!(
                "basis position {p} outside basis of size {}",
                self.basis.len()
            )));
        }
        merge(&mut word);
        loop {
            if word.len() > self.budget.max_word_symbols {
                return Err(Error::Budget(format!(
                    "intermediate word grew past {} symbols",
                    self.budget.max_word_symbols
                )));
            }
            let p = frozen_prefix(&word);
            if p == word.len() {
                break;
            }
            let g = word[p..].iter().map(|s| s.0).min().expect("nonempty");
            let first = (p..word.len()).find(|&k| word[k].0 == g).expect("present");
            let target = if first == p {
                (p + 1..word.len())
                    .find(|&k| word[k].0 == g)
                    .expect("unfrozen front generator must reoccur")
            } else {
                first
            };
            self.exchange(&mut word, target)?;
            merge(&mut word);
        }
        debug_assert!(word.windows(2).all(|w| w[0].0 < w[1].0));
        debug_assert!(word.iter().all(|(_, e)| !e.is_zero()));
        Ok(NormalWord { terms: word })
    }

    /// One exchange step: the syllable at `i` (generator g) moves left past
    /// the syllable at `i-1` (generator h > g) via h^f g^e = g^e h^f [h^f, g^e].
    fn exchange(&self, word: &mut Vec<(usize, BigInt)>, i: usize) -> Result<()> {
        let (h, f) = word[i - 1].clone();
        let (g, e) = word[i].clone();
        debug_assert!(h > g, "exchange requires an inversion");
        let entry = self.comm_entry(h, g)?;

        let central = entry
            .terms
            .iter()
            .all(|&(p, _)| self.weight_at(p) >= self.class);
        let repl = if central {
            // [b_h, b_g] is central, so [h^f, g^e] = [b_h, b_g]^{f·e} exactly.
            let fe = &f * &e;
            let mut repl = vec![(g, e), (h, f)];
            repl.extend(entry.terms.iter().filter_map(|(p, c)| {
                let scaled = c * &fe;
                (!scaled.is_zero()).then_some((*p, scaled))
            }));
            repl
        } else {
            // Whole-syllable exchange; the correction [h^f, g^e] is derived
            // once per (pair, exponents) and cached. Unit exponents go
            // through the word-identity route, general exponents through
            // the series representation.
            let corr = if f.magnitude().is_one() && e.magnitude().is_one() {
                self.comm_signed(h, !f.is_negative(), g, !e.is_negative())?
            } else {
                self.comm_powers(h, &f, g, &e)?
            };
            let mut repl = vec![(g, e), (h, f)];
            repl.extend(corr.terms.iter().cloned());
            repl
        };
        word.splice(i - 1..=i, repl);
        Ok(())
    }

    /// Normal form of [b_h, b_g] for basis positions h > g.
    fn comm_entry(&self, h: usize, g: usize) -> Result<Arc<NormalWord>> {
        debug_assert!(h > g);
        let (wh, wg) = (self.weight_at(h), self.weight_at(g));
        if wh + wg > self.class {
            return Ok(Arc::new(NormalWord::identity()));
        }
        if let Some(hit) = self.caches.comm.lock().unwrap().get(&(h, g)) {
            return Ok(hit.clone());
        }
        let s = self
            .series_ctx
            .group_comm(&self.series_of(h), &self.series_of(g));
        let nf = Arc::new(self.extract_normal_word(&s)?);
        if let Some(&(p, _)) = nf.terms.first() {
            if self.weight_at(p) < wh + wg {
                return Err(Error::Inconsistency(format!(
                    "commutator of weights {wh}+{wg} has support below weight {}",
                    wh + wg
                )));
            }
        }
        self.caches
            .comm
            .lock()
            .unwrap()
            .entry((h, g))
            .or_insert_with(|| nf.clone());
        Ok(nf)
    }

    /// Normal form of [b_h^{±1}, b_g^{±1}]; `plus_*` selects the sign.
    fn comm_signed(
        &self,
        h: usize,
        plus_h: bool,
        g: usize,
        plus_g: bool,
    ) -> Result<Arc<NormalWord>> {
        if plus_h && plus_g {
            return self.comm_entry(h, g);
        }
        let key = (h, plus_h, g, plus_g);
        if let Some(hit) = self.caches.comm_signed.lock().unwrap().get(&key) {
            return Ok(hit.clone());
        }
        let t = self.comm_entry(h, g)?;
        let inv_t = || t.terms.iter().rev().map(|(p, e)| (*p, -e.clone()));
        let fwd_t = || t.terms.iter().cloned();
        let one = BigInt::one();
        // Exact identities over the word alphabet; every collection below
        // only exchanges pairs of strictly larger weight sum than (h, g).
        let word: Vec<(usize, BigInt)> = match (plus_h, plus_g) {
            // [h, g⁻¹] = g [h,g]⁻¹ g⁻¹
            (true, false) => std::iter::once((g, one.clone()))
                .chain(inv_t())
                .chain(std::iter::once((g, -one.clone())))
                .collect(),
            // [h⁻¹, g] = h [h,g]⁻¹ h⁻¹
            (false, true) => std::iter::once((h, one.clone()))
                .chain(inv_t())
                .chain(std::iter::once((h, -one.clone())))
                .collect(),
            // [h⁻¹, g⁻¹] = h g [h,g] g⁻¹ h⁻¹
            (false, false) => [(h, one.clone()), (g, one.clone())]
                .into_iter()
                .chain(fwd_t())
                .chain([(g, -one.clone()), (h, -one)])
                .collect(),
            (true, true) => unreachable!(),
        };
        let nf = Arc::new(self.collect(word)?);
        self.caches
            .comm_signed
            .lock()
            .unwrap()
            .entry(key)
            .or_insert_with(|| nf.clone());
        Ok(nf)
    }

    /// Normal form of [b_h^f, b_g^e] for arbitrary nonzero exponents,
    /// derived in the series representation (binary powering keeps the cost
    /// logarithmic in the exponents).
    fn comm_powers(&self, h: usize, f: &BigInt, g: usize, e: &BigInt) -> Result<Arc<NormalWord>> {
        let (wh, wg) = (self.weight_at(h), self.weight_at(g));
        if wh + wg > self.class {
            return Ok(Arc::new(NormalWord::identity()));
        }
        let key = (h, f.clone(), g, e.clone());
        if let Some(hit) = self.caches.comm_powers.lock().unwrap().get(&key) {
            return Ok(hit.clone());
        }
        let s = self.series_ctx.group_comm(
            &self.series_ctx.pow(&self.series_of(h), f),
            &self.series_ctx.pow(&self.series_of(g), e),
        );
        let nf = Arc::new(self.extract_normal_word(&s)?);
        if let Some(&(p, _)) = nf.terms.first() {
            if self.weight_at(p) < wh + wg {
                return Err(Error::Inconsistency(format!(
                    "power commutator of weights {wh}+{wg} has support below weight {}",
                    wh + wg
                )));
            }
        }
        self.caches
            .comm_powers
            .lock()
            .unwrap()
            .entry(key)
            .or_insert_with(|| nf.clone());
        Ok(nf)
    }

    // ---- series side ----

    fn series_of(&self, pos: usize) -> Arc<Series> {
        if let Some(hit) = self.caches.series.lock().unwrap().get(&pos) {
            return hit.clone();
        }
        let c = self.basis.element(pos);
        let s = match self.basis.parts(c) {
            None => {
                // Letters are positions 0..d in order.
                self.series_ctx.letter(pos as u32 + 1)
            }
            Some((l, r)) => {
                let sl = self.series_of(self.basis.position(l));
                let sr = self.series_of(self.basis.position(r));
                self.series_ctx.group_comm(&sl, &sr)
            }
        };
        let s = Arc::new(s);
        self.caches
            .series
            .lock()
            .unwrap()
            .entry(pos)
            .or_insert_with(|| s.clone());
        s
    }

    /// Series image of a normal word; the engine's own test oracle.
    #[cfg(test)]
    pub(crate) fn word_series(&self, w: &NormalWord) -> Series {
        let mut acc = self.series_ctx.one();
        for (p, e) in &w.terms {
            acc = self
                .series_ctx
                .mul(&acc, &self.series_ctx.pow(&self.series_of(*p), e));
        }
        acc
    }

    fn solver_for_weight(&self, w: u32) -> Result<Arc<ExactSolver>> {
        if let Some(hit) = self.caches.solvers.lock().unwrap().get(&w) {
            return Ok(hit.clone());
        }
        let (lo, hi) = self.basis.layer_range(w);
        let rows = self.series_ctx.monomial_count(w as usize);
        let mut matrix = vec![Vec::with_capacity(hi - lo); rows];
        for pos in lo..hi {
            let s = self.series_of(pos);
            for (row, coeff) in matrix
                .iter_mut()
                .zip(self.series_ctx.component(&s, w as usize))
            {
                row.push(coeff.clone());
            }
        }
        let solver = Arc::new(ExactSolver::new(matrix).map_err(|e| {
            Error::Inconsistency(format!("weight-{w} layer is not independent: {e}"))
        })?);
        self.caches
            .solvers
            .lock()
            .unwrap()
            .entry(w)
            .or_insert_with(|| solver.clone());
        Ok(solver)
    }

    /// Reads the normal form of a group element off its series image,
    /// dividing out one weight layer at a time.
    pub(crate) fn extract_normal_word(&self, s: &Series) -> Result<NormalWord> {
        let mut r = s.clone();
        let mut terms = Vec::new();
        for w in 1..=self.class {
            let comp = self.series_ctx.component(&r, w as usize).to_vec();
            if comp.iter().all(Zero::is_zero) {
                continue;
            }
            let exps = self
                .solver_for_weight(w)?
                .solve_integer(&comp)
                .ok_or_else(|| {
                    Error::Inconsistency(format!(
                        "weight-{w} component is not an integer combination of basis images"
                    ))
                })?;
            let (lo, hi) = self.basis.layer_range(w);
            let mut layer = self.series_ctx.one();
            for (k, pos) in (lo..hi).enumerate() {
                if exps[k].is_zero() {
                    continue;
                }
                layer = self
                    .series_ctx
                    .mul(&layer, &self.series_ctx.pow(&self.series_of(pos), &exps[k]));
                terms.push((pos, exps[k].clone()));
            }
            r = self.series_ctx.mul(&self.series_ctx.group_inverse(&layer), &r);
        }
        if !self.series_ctx.is_one(&r) {
            return Err(Error::Inconsistency(
                "series is not an element of the free nilpotent group".into(),
            ));
        }
        Ok(NormalWord { terms })
    }
}

/// Merges adjacent equal-generator syllables and drops zero exponents.
fn merge(word: &mut Vec<(usize, BigInt)>) {
    let mut out: Vec<(usize, BigInt)> = Vec::with_capacity(word.len());
    for (p, e) in word.drain(..) {
        if e.is_zero() {
            continue;
        }
        match out.last_mut() {
            Some((q, acc)) if *q == p => {
                *acc += e;
                if acc.is_zero() {
                    out.pop();
                }
            }
            _ => out.push((p, e)),
        }
    }
    *word = out;
}

/// Length of the longest front segment that is already in normal form and
/// strictly below every generator occurring after it.
fn frozen_prefix(word: &[(usize, BigInt)]) -> usize {
    let n = word.len();
    let mut suffix_min = vec![usize::MAX; n + 1];
    for k in (0..n).rev() {
        suffix_min[k] = word[k].0.min(suffix_min[k + 1]);
    }
    let mut p = 0;
    while p < n && word[p].0 == suffix_min[p] && word[p].0 < suffix_min[p + 1] {
        p += 1;
    }
    p
}

/// Exact binomial coefficient C(α, j) for integer (possibly negative) α.
pub fn binomial_int(alpha: &BigInt, j: u64) -> BigInt {
    let mut num = BigInt::one();
    for i in 0..j {
        num *= alpha - BigInt::from(i);
    }
    let mut den = BigInt::one();
    for i in 1..=j {
        den *= BigInt::from(i);
    }
    let (q, r) = num_integer::Integer::div_rem(&num, &den);
    debug_assert!(r.is_zero());
    q
}

/// An integer polynomial in the binomial basis with zero constant term:
/// f(α) = Σ_j coeffs[j-1]·C(α, j).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExponentPolynomial {
    pub coeffs: Vec<BigInt>,
}

impl ExponentPolynomial {
    pub fn eval(&self, alpha: &BigInt) -> BigInt {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, a)| a * binomial_int(alpha, i as u64 + 1))
            .sum()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }
}

/// Fits integer coefficients a_1..a_degree with f(α) = Σ a_j C(α, j)
/// reproducing every sample exactly. Requires at least `degree + 1` samples
/// at pairwise distinct α; a system with no exact integer solution is an
/// inconsistency, not a fit error.
pub fn fit_exponent_polynomial(
    samples: &[(BigInt, BigInt)],
    degree: usize,
) -> Result<ExponentPolynomial> {
    if degree == 0 {
        return if samples.iter().all(|(_, y)| y.is_zero()) {
            Ok(ExponentPolynomial { coeffs: Vec::new() })
        } else {
            Err(Error::Inconsistency(
                "nonzero samples cannot fit a zero polynomial".into(),
            ))
        };
    }
    if samples.len() < degree + 1 {
        return Err(Error::Domain(format!(
            "need at least {} samples for degree {degree}, got {}",
            degree + 1,
            samples.len()
        )));
    }
    for (i, (a, _)) in samples.iter().enumerate() {
        if samples[i + 1..].iter().any(|(b, _)| a == b) {
            return Err(Error::Domain(format!("duplicate sample point α = {a}")));
        }
    }
    let matrix: Vec<Vec<BigInt>> = samples
        .iter()
        .map(|(a, _)| (1..=degree as u64).map(|j| binomial_int(a, j)).collect())
        .collect();
    let rhs: Vec<BigInt> = samples.iter().map(|(_, y)| y.clone()).collect();
    let solver = ExactSolver::new(matrix)?;
    let coeffs = solver.solve_integer(&rhs).ok_or_else(|| {
        Error::Inconsistency("samples admit no exact integer binomial-basis fit".into())
    })?;
    Ok(ExponentPolynomial { coeffs })
}
