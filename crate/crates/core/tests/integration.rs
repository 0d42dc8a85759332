//! Cross-module integration: the public API end to end, plus property tests
//! for the canonical form and the relation-lattice quotient.

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;
use proptest::prelude::*;

use nilmult::multipliers::{nilpotent_multiplier, AbelianInvariants, GroupSpec};
use nilmult::oracle::{
    abelian_quotient, smith_normal_form, verify_formula, OracleMode, Provenance, RelationMatrix,
};
use nilmult::Budget;

#[test]
fn verify_report_round_trips_to_json() {
    let spec = GroupSpec::new(0, vec![9, 3], 2);
    let report = verify_formula(&spec, 3, OracleMode::Both, &Budget::default()).unwrap();
    assert!(report.equal);
    let v = report.to_json().unwrap();
    for key in [
        "formula",
        "oracle_basis",
        "oracle_collected",
        "equal",
        "ambient_rank",
        "relation_columns",
        "runtime_ms",
    ] {
        assert!(v.get(key).is_some(), "missing key {key}");
    }
    assert_eq!(v["equal"], true);
    let formula = nilpotent_multiplier(&spec, 3).unwrap();
    assert_eq!(v["formula"], formula.to_json().unwrap());
}

fn invariants(summands: Vec<(u64, u64)>) -> AbelianInvariants {
    AbelianInvariants::new(
        BigUint::zero(),
        summands
            .into_iter()
            .map(|(o, m)| (BigUint::from(o), BigUint::from(m)))
            .collect(),
    )
    .unwrap()
}

proptest! {
    /// The canonical chain is an ascending divisibility chain, is invariant
    /// under permuting the presented summands, and is invariant under
    /// splitting a summand's multiplicity in two.
    #[test]
    fn canonical_chain_properties(
        mut summands in proptest::collection::vec((2u64..40, 0u64..5), 0..6),
    ) {
        let a = invariants(summands.clone());
        let chain = a.canonical();
        for window in chain.windows(2) {
            let (f, g) = (&window[0].0, &window[1].0);
            prop_assert!(f < g && (g % f).is_zero(), "chain {chain:?} not ascending-divisible");
        }
        // The group order is conserved: Π order^mult = Π factor^mult.
        let pow = |base: &BigUint, e: &BigUint| -> BigUint {
            base.pow(u32::try_from(e).expect("small exponent"))
        };
        let presented: BigUint = summands
            .iter()
            .map(|&(o, m)| BigUint::from(o).pow(m as u32))
            .product();
        let canonical: BigUint = chain.iter().map(|(f, m)| pow(f, m)).product();
        prop_assert_eq!(presented, canonical);

        summands.reverse();
        let b = invariants(summands.clone());
        prop_assert!(a.is_isomorphic(&b));

        if let Some(&(o, m)) = summands.first() {
            if m >= 2 {
                let mut split = summands.clone();
                split[0] = (o, m - 1);
                split.push((o, 1));
                prop_assert!(a.is_isomorphic(&invariants(split)));
            }
        }
    }

    /// The invariant factors depend only on the column lattice: zero
    /// columns, duplicated columns, and negated columns change nothing, and
    /// the factor list is an ascending divisibility chain.
    #[test]
    fn relation_lattice_invariance(
        cols in proptest::collection::vec(
            proptest::collection::vec((0usize..5, -9i64..=9), 0..4),
            0..5,
        ),
    ) {
        let rows = 5usize;
        let to_matrix = |cols: &Vec<Vec<(usize, i64)>>| {
            let columns = cols
                .iter()
                .map(|c| c.iter().map(|&(r, v)| (r, BigInt::from(v))).collect())
                .collect();
            RelationMatrix::new(rows, columns, Provenance::Basis).unwrap()
        };
        let base = to_matrix(&cols);
        let factors = smith_normal_form(&base);
        for window in factors.windows(2) {
            prop_assert!((&window[1] % &window[0]).is_zero());
        }

        let mut noisy = cols.clone();
        noisy.push(Vec::new());
        if let Some(first) = cols.first() {
            noisy.push(first.clone());
            noisy.push(first.iter().map(|&(r, v)| (r, -v)).collect());
        }
        prop_assert_eq!(smith_normal_form(&to_matrix(&noisy)), factors.clone());

        // The quotient is consistent with the factor count.
        let q = abelian_quotient(rows, &base).unwrap();
        let torsion: BigUint = q.torsion().iter().map(|(_, m)| m.clone()).sum();
        let nontrivial = factors.iter().filter(|f| **f > BigUint::from(1u8)).count();
        prop_assert_eq!(torsion, BigUint::from(nontrivial));
        prop_assert_eq!(
            q.free_rank().clone(),
            BigUint::from(rows - factors.len())
        );
    }
}
