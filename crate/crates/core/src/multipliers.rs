//! Closed-form multiplier formulas for nth nilpotent products of cyclic
//! groups, together with hypothesis validation and the canonical form of
//! finitely generated abelian groups used to compare results.
//!
//! The group under consideration is
//! `Z *n … *n Z *n Z_{r_1} *n … *n Z_{r_t}` (m free factors, torsion orders
//! r_1..r_t with r_{i+1} | r_i, nth nilpotent product). Its c-nilpotent
//! multiplier is `Z^{d_m} ⊕ Z_{r_1}^{d_{m+1}-d_m} ⊕ … ⊕ Z_{r_t}^{d_{m+t}-d_{m+t-1}}`
//! with d_k = Σ_{i=1..n} χ_{c+i}(k); the polynilpotent variant iterates χ
//! over the class row. The three-factor functions evaluate the expanded
//! mixed-order gcd expressions verbatim and audit them instead of
//! correcting them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use serde_json::{json, Value};

use crate::error::{Error, Result, ValidationReport};
use crate::witt;

/// The group `Z^{*n m} *n Z_{r_1} *n … *n Z_{r_t}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupSpec {
    /// Number m of infinite cyclic factors.
    pub free_rank: u32,
    /// Torsion orders r_1..r_t.
    pub orders: Vec<u64>,
    /// Product class n.
    pub product_class: u32,
}

impl GroupSpec {
    pub fn new(free_rank: u32, orders: Vec<u64>, product_class: u32) -> GroupSpec {
        GroupSpec {
            free_rank,
            orders,
            product_class,
        }
    }

    /// Total number of letters m + t in the free presentation.
    pub fn letters(&self) -> u32 {
        self.free_rank + self.orders.len() as u32
    }
}

/// The class row (c_1, …, c_s) of a polynilpotent variety; nonempty, all
/// entries ≥ 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassRow(Vec<u32>);

impl ClassRow {
    pub fn new(classes: Vec<u32>) -> Result<ClassRow> {
        if classes.is_empty() {
            return Err(Error::Domain("class row must be nonempty".into()));
        }
        if classes.contains(&0) {
            return Err(Error::Domain("class row entries must be positive".into()));
        }
        Ok(ClassRow(classes))
    }

    pub fn single(c: u32) -> ClassRow {
        ClassRow(vec![c])
    }

    pub fn classes(&self) -> &[u32] {
        &self.0
    }

    pub fn first(&self) -> u32 {
        self.0[0]
    }
}

/// Which hypothesis set applies: the divisibility-chain theorems or the
/// arbitrary-orders three-factor remark.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ValidationMode {
    Chain,
    ArbitraryOrders,
}

/// Checks every hypothesis and reports all violations; computations refuse
/// invalid inputs.
pub fn validate_spec(spec: &GroupSpec, row: &ClassRow, mode: ValidationMode) -> ValidationReport {
    let mut violations = Vec::new();
    let n = spec.product_class;
    if n < 1 {
        violations.push("product class n must be at least 1".to_string());
    }
    for (i, &r) in spec.orders.iter().enumerate() {
        if r < 2 {
            violations.push(format!("order r_{} = {r} must be at least 2", i + 1));
        }
    }
    if mode == ValidationMode::Chain {
        for i in 0..spec.orders.len().saturating_sub(1) {
            let (a, b) = (spec.orders[i], spec.orders[i + 1]);
            if b != 0 && a % b != 0 {
                violations.push(format!(
                    "divisibility chain broken: r_{} = {b} does not divide r_{} = {a}",
                    i + 2,
                    i + 1
                ));
            }
        }
    }
    if n >= 2 {
        let check = |r: u64, name: String, violations: &mut Vec<String>| {
            for p in witt::primes_up_to(n as u64) {
                if r % p == 0 {
                    violations.push(format!(
                        "coprimality hypothesis fails: prime {p} <= n = {n} divides {name} = {r}"
                    ));
                }
            }
        };
        match mode {
            ValidationMode::Chain => {
                if let Some(&r1) = spec.orders.first() {
                    check(r1, "r_1".to_string(), &mut violations);
                }
            }
            ValidationMode::ArbitraryOrders => {
                for (i, &s) in spec.orders.iter().enumerate() {
                    check(s, format!("s_{}", i + 1), &mut violations);
                }
            }
        }
    }
    if row.first() < n {
        violations.push(format!(
            "class row must start at c_1 >= n: c_1 = {} < n = {n}",
            row.first()
        ));
    }
    ValidationReport { violations }
}

fn require_valid(spec: &GroupSpec, row: &ClassRow, mode: ValidationMode) -> Result<()> {
    let report = validate_spec(spec, row, mode);
    if report.is_valid() {
        Ok(())
    } else {
        Err(Error::Validation(report))
    }
}

/// A finitely generated abelian group: free rank, torsion as presented by
/// the producing formula, and the canonical ascending invariant-factor
/// chain derived from it. All counts are arbitrary precision; the canonical
/// chain is run-length encoded because iterated χ multiplicities overflow
/// any materialized list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbelianInvariants {
    free_rank: BigUint,
    torsion: Vec<(BigUint, BigUint)>,
    canonical: Vec<(BigUint, BigUint)>,
}

impl AbelianInvariants {
    /// Builds from presented summands (order, multiplicity); order-1 and
    /// multiplicity-0 summands are dropped.
    pub fn new(free_rank: BigUint, summands: Vec<(BigUint, BigUint)>) -> Result<AbelianInvariants> {
        let torsion: Vec<(BigUint, BigUint)> = summands
            .into_iter()
            .filter(|(order, mult)| *order > BigUint::one() && !mult.is_zero())
            .collect();
        let canonical = canonical_chain(&torsion)?;
        Ok(AbelianInvariants {
            free_rank,
            torsion,
            canonical,
        })
    }

    pub fn trivial() -> AbelianInvariants {
        AbelianInvariants {
            free_rank: BigUint::zero(),
            torsion: Vec::new(),
            canonical: Vec::new(),
        }
    }

    /// From an ascending invariant-factor list as produced by Smith normal
    /// form (entries equal to 1 are dropped here).
    pub fn from_invariant_factors(free_rank: BigUint, factors: &[BigUint]) -> Result<AbelianInvariants> {
        let mut summands: Vec<(BigUint, BigUint)> = Vec::new();
        for f in factors {
            match summands.last_mut() {
                Some((order, mult)) if order == f => *mult += BigUint::one(),
                _ => summands.push((f.clone(), BigUint::one())),
            }
        }
        AbelianInvariants::new(free_rank, summands)
    }

    pub fn free_rank(&self) -> &BigUint {
        &self.free_rank
    }

    /// Torsion as presented: (order, multiplicity) pairs.
    pub fn torsion(&self) -> &[(BigUint, BigUint)] {
        &self.torsion
    }

    /// Run-length encoded ascending invariant-factor chain.
    pub fn canonical(&self) -> &[(BigUint, BigUint)] {
        &self.canonical
    }

    pub fn is_trivial(&self) -> bool {
        self.free_rank.is_zero() && self.torsion.is_empty()
    }

    /// Total torsion multiplicity (number of cyclic torsion summands as
    /// presented).
    pub fn torsion_rank(&self) -> BigUint {
        self.torsion.iter().map(|(_, m)| m.clone()).sum()
    }

    /// Isomorphism: equal free ranks and equal canonical chains.
    pub fn is_isomorphic(&self, other: &AbelianInvariants) -> bool {
        self.free_rank == other.free_rank && self.canonical == other.canonical
    }

    /// JSON per the external schema; all numbers as decimal strings. The
    /// canonical chain is materialized and therefore capped.
    pub fn to_json(&self) -> Result<Value> {
        let total: BigUint = self.canonical.iter().map(|(_, m)| m.clone()).sum();
        let cap = 100_000u32;
        if total > BigUint::from(cap) {
            return Err(Error::Budget(format!(
                "canonical chain of length {total} exceeds the {cap}-entry rendering cap"
            )));
        }
        let mut chain = Vec::new();
        for (f, m) in &self.canonical {
            for _ in 0..m.to_u64().expect("bounded by cap") {
                chain.push(Value::String(f.to_string()));
            }
        }
        Ok(json!({
            "free_rank": self.free_rank.to_string(),
            "torsion": self
                .torsion
                .iter()
                .map(|(o, m)| json!({"order": o.to_string(), "multiplicity": m.to_string()}))
                .collect::<Vec<_>>(),
            "canonical": chain,
        }))
    }
}

impl fmt::Display for AbelianInvariants {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_trivial() {
            return write!(f, "0");
        }
        let mut parts = Vec::new();
        if self.free_rank.is_one() {
            parts.push("Z".to_string());
        } else if !self.free_rank.is_zero() {
            parts.push(format!("Z^{}", self.free_rank));
        }
        for (order, mult) in &self.torsion {
            if mult.is_one() {
                parts.push(format!("Z_{order}"));
            } else {
                parts.push(format!("Z_{order}^{mult}"));
            }
        }
        write!(f, "{}", parts.join(" + "))
    }
}

/// Canonicalizes presented torsion into the ascending invariant-factor
/// chain, run-length encoded. Orders must fit in u64.
fn canonical_chain(torsion: &[(BigUint, BigUint)]) -> Result<Vec<(BigUint, BigUint)>> {
    if torsion.is_empty() {
        return Ok(Vec::new());
    }
    // Per prime: runs (exponent, multiplicity), later sorted by descending
    // exponent. The k-th largest invariant factor takes the k-th largest
    // exponent available for each prime.
    let mut prime_runs: BTreeMap<u64, Vec<(u32, BigUint)>> = BTreeMap::new();
    let mut chain_len = BigUint::zero();
    for (order, mult) in torsion {
        let mut rest = order.to_u64().ok_or_else(|| {
            Error::Domain(format!("torsion order {order} too large to factorize"))
        })?;
        let mut p = 2u64;
        while p * p <= rest {
            if rest % p == 0 {
                let mut e = 0u32;
                while rest % p == 0 {
                    rest /= p;
                    e += 1;
                }
                prime_runs.entry(p).or_default().push((e, mult.clone()));
            }
            p += 1;
        }
        if rest > 1 {
            prime_runs.entry(rest).or_default().push((1, mult.clone()));
        }
    }
    for runs in prime_runs.values_mut() {
        runs.sort_by_key(|&(e, _)| std::cmp::Reverse(e));
        let total: BigUint = runs.iter().map(|(_, m)| m.clone()).sum();
        chain_len = chain_len.max(total);
    }

    // Depth-from-top positions where some prime's exponent changes.
    let mut breakpoints: BTreeSet<BigUint> = BTreeSet::new();
    breakpoints.insert(chain_len.clone());
    for runs in prime_runs.values() {
        let mut acc = BigUint::zero();
        for (_, m) in runs {
            acc += m;
            if acc < chain_len {
                breakpoints.insert(acc.clone());
            }
        }
    }

    let exponent_at = |runs: &[(u32, BigUint)], depth: &BigUint| -> u32 {
        let mut acc = BigUint::zero();
        for (e, m) in runs {
            acc += m;
            if depth < &acc {
                return *e;
            }
        }
        0
    };

    // Segments of constant factor, from the largest factor downward.
    let mut segments: Vec<(BigUint, BigUint)> = Vec::new();
    let mut prev = BigUint::zero();
    for b in breakpoints {
        if b <= prev {
            continue;
        }
        let mut factor = BigUint::one();
        for (p, runs) in &prime_runs {
            let e = exponent_at(runs, &prev);
            if e > 0 {
                factor *= BigUint::from(*p).pow(e);
            }
        }
        let len = &b - &prev;
        if factor > BigUint::one() {
            segments.push((factor, len));
        }
        prev = b;
    }
    segments.reverse();
    // Adjacent equal factors can appear after dropping 1-segments.
    let mut merged: Vec<(BigUint, BigUint)> = Vec::new();
    for (f, m) in segments {
        match merged.last_mut() {
            Some((g, acc)) if *g == f => *acc += m,
            _ => merged.push((f, m)),
        }
    }
    Ok(merged)
}

fn summand(order: u64, multiplicity: BigUint) -> (BigUint, BigUint) {
    (BigUint::from(order), multiplicity)
}

/// The c-nilpotent multiplier of `spec` for c ≥ n:
/// Z^{d_m} ⊕ Z_{r_1}^{d_{m+1}-d_m} ⊕ … with d_k = Σ_{i=1..n} χ_{c+i}(k).
pub fn nilpotent_multiplier(spec: &GroupSpec, c: u32) -> Result<AbelianInvariants> {
    require_valid(spec, &ClassRow::single(c), ValidationMode::Chain)?;
    let n = spec.product_class as u64;
    let m = spec.free_rank as u64;
    let d = |k: u64| witt::sum_chi(c as u64, n, k);
    let mut summands = Vec::new();
    for (j, &r) in spec.orders.iter().enumerate() {
        let hi = d(m + j as u64 + 1);
        let lo = d(m + j as u64);
        summands.push(summand(r, hi - lo));
    }
    AbelianInvariants::new(d(m), summands)
}

/// The polynilpotent multiplier with class row (c_1, …, c_s), c_1 ≥ n:
/// as the nilpotent multiplier but with d_k replaced by the iterate
/// χ_{c_s+1}(… χ_{c_2+1}(Σ_{i=1..n} χ_{c_1+i}(k)) …).
pub fn polynilpotent_multiplier(spec: &GroupSpec, row: &ClassRow) -> Result<AbelianInvariants> {
    require_valid(spec, row, ValidationMode::Chain)?;
    let n = spec.product_class as u64;
    let m = spec.free_rank as u64;
    let d = |k: u64| -> BigUint {
        let mut acc = witt::sum_chi(row.first() as u64, n, k);
        for &ci in &row.classes()[1..] {
            acc = witt::witt_chi_big(ci as u64 + 1, &acc);
        }
        acc
    };
    let mut summands = Vec::new();
    for (j, &r) in spec.orders.iter().enumerate() {
        let hi = d(m + j as u64 + 1);
        let lo = d(m + j as u64);
        summands.push(summand(r, hi - lo));
    }
    AbelianInvariants::new(d(m), summands)
}

fn gcd3(a: u64, b: u64, c: u64) -> u64 {
    a.gcd(&b).gcd(&c)
}

/// The c-nilpotent multiplier of `Z_{s_1} *n Z_{s_2} *n Z_{s_3}` for
/// arbitrary orders coprime to all primes ≤ n:
/// Z_α^{E_2} ⊕ Z_β^{E_2} ⊕ Z_γ^{E_2} ⊕ Z_δ^{E_3 − 3E_2}
/// with α = (s_1,s_2), β = (s_2,s_3), γ = (s_1,s_3), δ = (s_1,s_2,s_3) and
/// E_k = Σ_{i=1..n} χ_{c+i}(k).
pub fn three_factor_multiplier(
    s1: u64,
    s2: u64,
    s3: u64,
    n: u32,
    c: u32,
) -> Result<AbelianInvariants> {
    let spec = GroupSpec::new(0, vec![s1, s2, s3], n);
    require_valid(&spec, &ClassRow::single(c), ValidationMode::ArbitraryOrders)?;
    let e2 = witt::sum_chi(c as u64, n as u64, 2);
    let e3 = witt::sum_chi(c as u64, n as u64, 3);
    let delta_mult = BigInt::from(e3) - BigInt::from(3u8) * BigInt::from(e2.clone());
    if delta_mult.is_negative() {
        return Err(Error::Inconsistency(format!(
            "E3 - 3·E2 evaluated to the negative value {delta_mult}"
        )));
    }
    let summands = vec![
        summand(s1.gcd(&s2), e2.clone()),
        summand(s2.gcd(&s3), e2.clone()),
        summand(s1.gcd(&s3), e2),
        summand(gcd3(s1, s2, s3), delta_mult.to_biguint().unwrap()),
    ];
    AbelianInvariants::new(BigUint::zero(), summands)
}

/// Verbatim evaluation of the expanded two-row three-factor expression,
/// plus its audit. The expanded e-formulas mix `c` and `c_1`; the unbound
/// `c` is read as `c_1` throughout.
#[derive(Clone, Debug)]
pub struct TwoRowAudit {
    /// e_1..e_6 exactly as expanded (signed: e_5 can evaluate negative).
    pub exponents: [BigInt; 6],
    /// Total torsion multiplicity of the expanded 13-summand expression.
    pub expanded_total: BigInt,
    /// Total torsion multiplicity the iterated-χ theorem yields for equal
    /// orders, χ_{c_2+1}(Σ_{i=1..n} χ_{c_1+i}(3)).
    pub reference_total: BigUint,
    /// Indices (1-based) of negative expanded exponents, as raw data.
    pub negative: Vec<usize>,
    /// Negative exponents that scale a summand of order > 1 in this
    /// instance. A negative exponent on an order-1 summand is vacuous.
    pub relevant_negative: Vec<usize>,
    /// expanded_total != reference_total, as raw data.
    pub total_mismatch: bool,
    /// For equal orders s1 = s2 = s3, whether the emitted group matches the
    /// iterated-χ route; `None` when orders are mixed (no reference) or no
    /// group was emitted.
    pub equal_orders_check: Option<bool>,
    /// The assembled group; `None` when a relevant exponent is negative, in
    /// which case no group is emitted.
    pub group: Option<AbelianInvariants>,
}

impl TwoRowAudit {
    /// The expanded expression is usable for this instance: no relevant
    /// negative exponent and no failed equal-orders cross-check.
    pub fn is_consistent(&self) -> bool {
        self.relevant_negative.is_empty() && self.equal_orders_check != Some(false)
    }
}

/// Evaluates the expanded two-row formula for `Z_{s_1} *n Z_{s_2} *n Z_{s_3}`
/// with class row (c_1, c_2) and audits it against the iterated-χ route.
/// Inconsistencies are reported, never silently fixed.
pub fn three_factor_two_row(
    s1: u64,
    s2: u64,
    s3: u64,
    n: u32,
    c1: u32,
    c2: u32,
) -> Result<TwoRowAudit> {
    let spec = GroupSpec::new(0, vec![s1, s2, s3], n);
    require_valid(
        &spec,
        &ClassRow::new(vec![c1, c2])?,
        ValidationMode::ArbitraryOrders,
    )?;
    let a2 = BigInt::from(witt::sum_chi(c1 as u64, n as u64, 2));
    let a3 = BigInt::from(witt::sum_chi(c1 as u64, n as u64, 3));
    let chi2 = |x: &BigInt| -> Result<BigInt> {
        let v = x.to_biguint().ok_or_else(|| {
            Error::Inconsistency(format!("χ argument {x} is negative in the expanded formula"))
        })?;
        Ok(BigInt::from(witt::witt_chi_big(c2 as u64 + 1, &v)))
    };

    let two = BigInt::from(2u8);
    let three = BigInt::from(3u8);
    let e1 = chi2(&a2)?;
    let e2 = chi2(&(&a3 - &three * &a2))?;
    let e3 = chi2(&(&two * &a2))? - &two * &e1;
    let e4 = chi2(&(&a3 - &two * &a2))? - &e1 - &e2;
    let e5 = chi2(&(&three * &a2))? - &three * chi2(&(&two * &a2))?;
    let e6 = chi2(&(&a3 - &a2))? - chi2(&(&two * &a2))? - chi2(&(&a3 - &two * &a2))?;
    let exponents = [e1, e2, e3, e4, e5, e6];

    let expanded_total: BigInt = [0usize, 1, 2, 3, 4, 5]
        .iter()
        .map(|&i| &exponents[i] * BigInt::from([3u8, 1, 3, 3, 1, 2][i]))
        .sum();
    let reference_total = witt::witt_chi_big(
        c2 as u64 + 1,
        &witt::sum_chi(c1 as u64, n as u64, 3),
    );
    let negative: Vec<usize> = exponents
        .iter()
        .enumerate()
        .filter_map(|(i, e)| e.is_negative().then_some(i + 1))
        .collect();
    let total_mismatch = expanded_total != BigInt::from(reference_total.clone());

    // The 13 summands of the expanded expression in order, as
    // (order, e-index) pairs; the (α,γ,δ) triple is absent from the
    // expression being audited and is not invented here.
    let (alpha, beta, gamma) = (s1.gcd(&s2), s2.gcd(&s3), s1.gcd(&s3));
    let delta = gcd3(s1, s2, s3);
    let layout: [(u64, usize); 13] = [
        (alpha, 0),
        (beta, 0),
        (gamma, 0),
        (delta, 1),
        (alpha.gcd(&beta), 2),
        (alpha.gcd(&gamma), 2),
        (beta.gcd(&gamma), 2),
        (alpha.gcd(&delta), 3),
        (beta.gcd(&delta), 3),
        (gamma.gcd(&delta), 3),
        (gcd3(alpha, beta, gamma), 4),
        (gcd3(alpha, beta, delta), 5),
        (gcd3(beta, gamma, delta), 5),
    ];
    // A negative exponent matters only where it scales a nontrivial order.
    let relevant_negative: Vec<usize> = negative
        .iter()
        .copied()
        .filter(|&i| layout.iter().any(|&(o, e)| o > 1 && e + 1 == i))
        .collect();

    let group = if relevant_negative.is_empty() {
        let summands = layout
            .iter()
            .filter(|&&(order, _)| order > 1)
            .map(|&(order, e)| {
                let mult = exponents[e]
                    .to_biguint()
                    .expect("relevant exponents are nonnegative");
                summand(order, mult)
            })
            .collect();
        Some(AbelianInvariants::new(BigUint::zero(), summands)?)
    } else {
        None
    };

    let equal_orders_check = match &group {
        Some(g) if s1 == s2 && s2 == s3 => {
            let reference = polynilpotent_multiplier(
                &GroupSpec::new(0, vec![s1, s2, s3], n),
                &ClassRow::new(vec![c1, c2])?,
            )?;
            Some(g.is_isomorphic(&reference))
        }
        _ => None,
    };

    Ok(TwoRowAudit {
        exponents,
        expanded_total,
        reference_total,
        negative,
        relevant_negative,
        total_mismatch,
        equal_orders_check,
        group,
    })
}
