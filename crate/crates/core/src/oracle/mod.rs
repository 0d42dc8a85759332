//! Independent verification of the multiplier formulas.
//!
//! The c-nilpotent multiplier of the product group is the quotient of the
//! free abelian group on the basic commutators of weights c+1..c+n (on the
//! m+t letters of the free presentation) by an integer relation lattice.
//! Two independent builders produce that lattice:
//!
//! * basis mode writes down the known generating columns directly: r_j times
//!   the unit vector of every weight-(c+i) basic commutator on letters
//!   1..m+j that contains letter m+j;
//! * collected mode knows nothing about those sets: it collects the normal
//!   forms of left-normed commutators [x_{m+j}^{r_j}, z_1, …, z_k] over all
//!   generator tuples in the free nilpotent group of class c+n and restricts
//!   their exponent vectors to the ambient weights.
//!
//! Smith normal form then extracts abelian invariants, which are compared
//! against the closed-form result.

mod snf;

use std::time::Instant;

use num_bigint::{BigInt, BigUint};
use serde_json::{json, Value};

use crate::error::{Budget, Error, Result};
use crate::fng::{NilpotentContext, NormalWord};
use crate::hall::HallBasis;
use crate::multipliers::{
    self, AbelianInvariants, ClassRow, GroupSpec, ValidationMode,
};

/// How a relation matrix was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    Basis,
    Collected,
}

/// An integer relation lattice inside the free abelian group on the ambient
/// basic commutators, one sparse exponent column per relation. Zero columns
/// are retained so that column counts match the generating sets.
#[derive(Clone, Debug)]
pub struct RelationMatrix {
    ambient_rank: usize,
    columns: Vec<Vec<(usize, BigInt)>>,
    provenance: Provenance,
}

impl RelationMatrix {
    pub fn new(
        ambient_rank: usize,
        columns: Vec<Vec<(usize, BigInt)>>,
        provenance: Provenance,
    ) -> Result<RelationMatrix> {
        for col in &columns {
            for &(row, _) in col {
                if row >= ambient_rank {
                    return Err(Error::Domain(format!(
                        "relation entry at row {row} outside ambient rank {ambient_rank}"
                    )));
                }
            }
        }
        Ok(RelationMatrix {
            ambient_rank,
            columns,
            provenance,
        })
    }

    pub fn ambient_rank(&self) -> usize {
        self.ambient_rank
    }

    /// Sparse columns as (row, value) pairs.
    pub fn columns(&self) -> &[Vec<(usize, BigInt)>] {
        &self.columns
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }
}

/// Ambient positions for weights c+1..c+n: offset of the first ambient
/// element and the ambient rank.
fn ambient_window(basis: &HallBasis, c: u32, n: u32) -> (usize, usize) {
    let offset = basis.layer_range(c + 1).0;
    let end = basis.layer_range(c + n).1;
    (offset, end - offset)
}

/// Relation columns straight from the generating sets: for each weight
/// w = c+i (1 ≤ i ≤ n) and each torsion factor j, the column r_j·e_b for
/// every weight-w basic commutator b on letters 1..m+j containing letter
/// m+j.
pub fn build_relations_basis(spec: &GroupSpec, c: u32, budget: &Budget) -> Result<RelationMatrix> {
    let report = multipliers::validate_spec(spec, &ClassRow::single(c), ValidationMode::Chain);
    if !report.is_valid() {
        return Err(Error::Validation(report));
    }
    let d = spec.letters();
    let n = spec.product_class;
    if d == 0 {
        return RelationMatrix::new(0, Vec::new(), Provenance::Basis);
    }
    let basis = HallBasis::generate(d, c + n, budget)?;
    let (offset, ambient_rank) = ambient_window(&basis, c, n);
    let m = spec.free_rank;
    let mut columns = Vec::new();
    for i in 1..=n {
        let (lo, hi) = basis.layer_range(c + i);
        for (j, &r) in spec.orders.iter().enumerate() {
            let top = m + j as u32 + 1;
            for pos in lo..hi {
                let b = basis.element(pos);
                if basis.contains_letter(b, top)
                    && (top + 1..=d).all(|k| !basis.contains_letter(b, k))
                {
                    columns.push(vec![(pos - offset, BigInt::from(r))]);
                }
            }
        }
    }
    RelationMatrix::new(ambient_rank, columns, Provenance::Basis)
}

/// Relation columns by explicit collection: the normal forms of all
/// left-normed commutators [x_{m+j}^{r_j}, z_1, …, z_k] with letter entries
/// z_i and c ≤ k ≤ c+n−1, computed in the free nilpotent group of class c+n
/// on the m+t letters. Uses nothing about the structure of the answer.
pub fn build_relations_collected(
    spec: &GroupSpec,
    c: u32,
    budget: &Budget,
) -> Result<RelationMatrix> {
    // Arbitrary-orders validation: collection never uses the divisibility
    // chain, and this keeps the builder usable for the three-factor checks.
    let report = multipliers::validate_spec(
        spec,
        &ClassRow::single(c),
        ValidationMode::ArbitraryOrders,
    );
    if !report.is_valid() {
        return Err(Error::Validation(report));
    }
    let d = spec.letters();
    let n = spec.product_class;
    if d == 0 {
        return RelationMatrix::new(0, Vec::new(), Provenance::Collected);
    }
    let class = c + n;
    let ctx = NilpotentContext::new(d, class, budget.clone())?;
    let (offset, ambient_rank) = ambient_window(ctx.basis(), c, n);
    let generators: Vec<NormalWord> = (1..=d).map(|j| ctx.generator(j)).collect::<Result<_>>()?;
    let m = spec.free_rank as usize;

    let mut columns = Vec::new();
    for (j, &r) in spec.orders.iter().enumerate() {
        let power = ctx.power(&generators[m + j], &BigInt::from(r))?;
        for k in c..class {
            // All d^k letter tuples, lexicographically.
            let k = k as usize;
            let mut digits = vec![0usize; k];
            loop {
                let zs: Vec<NormalWord> =
                    digits.iter().map(|&z| generators[z].clone()).collect();
                let word = ctx.commutator_chain(&power, &zs)?;
                if let Some(w) = ctx.min_weight(&word) {
                    if w <= c {
                        return Err(Error::Inconsistency(format!(
                            "collected relation has weight-{w} support at or below c = {c}"
                        )));
                    }
                }
                columns.push(
                    word.terms()
                        .iter()
                        .map(|(p, e)| (p - offset, e.clone()))
                        .collect(),
                );
                // Increment the tuple.
                let mut pos = k;
                loop {
                    if pos == 0 {
                        break;
                    }
                    pos -= 1;
                    digits[pos] += 1;
                    if digits[pos] < d as usize {
                        break;
                    }
                    digits[pos] = 0;
                }
                if digits.iter().all(|&z| z == 0) {
                    break;
                }
            }
        }
    }
    RelationMatrix::new(ambient_rank, columns, Provenance::Collected)
}

/// Nonzero invariant factors of the column lattice, ascending divisibility,
/// unit factors retained.
pub fn smith_normal_form(matrix: &RelationMatrix) -> Vec<BigUint> {
    snf::invariant_factors(matrix.ambient_rank, &matrix.columns)
}

/// The quotient of Z^ambient_rank by the column lattice.
pub fn abelian_quotient(ambient_rank: usize, matrix: &RelationMatrix) -> Result<AbelianInvariants> {
    if ambient_rank != matrix.ambient_rank {
        return Err(Error::Domain(format!(
            "ambient rank {ambient_rank} does not match matrix rank {}",
            matrix.ambient_rank
        )));
    }
    let factors = smith_normal_form(matrix);
    let free_rank = BigUint::from(ambient_rank - factors.len());
    AbelianInvariants::from_invariant_factors(free_rank, &factors)
}

/// Which oracle routes to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleMode {
    Basis,
    Collected,
    Both,
}

/// Outcome of checking the closed-form multiplier against the oracle(s).
#[derive(Clone, Debug)]
pub struct VerificationReport {
    pub formula: AbelianInvariants,
    pub oracle_basis: Option<AbelianInvariants>,
    pub oracle_collected: Option<AbelianInvariants>,
    /// Every computed oracle is isomorphic to the formula value.
    pub equal: bool,
    pub ambient_rank: usize,
    /// Total relation columns across the computed oracles.
    pub relation_columns: usize,
    pub runtime_ms: u128,
}

impl VerificationReport {
    pub fn to_json(&self) -> Result<Value> {
        let side = |g: &Option<AbelianInvariants>| -> Result<Value> {
            Ok(match g {
                Some(g) => g.to_json()?,
                None => Value::Null,
            })
        };
        Ok(json!({
            "formula": self.formula.to_json()?,
            "oracle_basis": side(&self.oracle_basis)?,
            "oracle_collected": side(&self.oracle_collected)?,
            "equal": self.equal,
            "ambient_rank": self.ambient_rank.to_string(),
            "relation_columns": self.relation_columns.to_string(),
            "runtime_ms": u64::try_from(self.runtime_ms).unwrap_or(u64::MAX),
        }))
    }
}

/// Computes the closed-form multiplier and the selected oracle quotient(s)
/// and reports whether they agree. Disagreement is reported, never
/// suppressed.
pub fn verify_formula(
    spec: &GroupSpec,
    c: u32,
    mode: OracleMode,
    budget: &Budget,
) -> Result<VerificationReport> {
    let start = Instant::now();
    let formula = multipliers::nilpotent_multiplier(spec, c)?;
    let mut ambient_rank: Option<usize> = None;
    let mut relation_columns = 0usize;
    let mut run = |matrix: RelationMatrix| -> Result<AbelianInvariants> {
        match ambient_rank {
            None => ambient_rank = Some(matrix.ambient_rank),
            Some(prev) if prev != matrix.ambient_rank => {
                return Err(Error::Inconsistency(format!(
                    "oracle ambient ranks disagree: {prev} vs {}",
                    matrix.ambient_rank
                )));
            }
            Some(_) => {}
        }
        relation_columns += matrix.columns.len();
        abelian_quotient(matrix.ambient_rank, &matrix)
    };

    let oracle_basis = if matches!(mode, OracleMode::Basis | OracleMode::Both) {
        Some(run(build_relations_basis(spec, c, budget)?)?)
    } else {
        None
    };
    let oracle_collected = if matches!(mode, OracleMode::Collected | OracleMode::Both) {
        Some(run(build_relations_collected(spec, c, budget)?)?)
    } else {
        None
    };

    let equal = oracle_basis
        .iter()
        .chain(oracle_collected.iter())
        .all(|g| g.is_isomorphic(&formula));
    Ok(VerificationReport {
        formula,
        oracle_basis,
        oracle_collected,
        equal,
        ambient_rank: ambient_rank.unwrap_or(0),
        relation_columns,
        runtime_ms: start.elapsed().as_millis(),
    })
}
