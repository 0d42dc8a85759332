//! Exact integer Smith normal form, invariant factors only.
//!
//! The matrix is taken as a set of sparse columns. A structural sweep first
//! finalizes columns that are the only occupants of their row (the
//! basis-mode relation matrices are entirely of this shape), then the
//! remainder is diagonalized densely by minimum-pivot reduction. Diagonal
//! entries are combined into the ascending divisibility chain afterwards.

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::multipliers::AbelianInvariants;

/// Invariant factors f_1 | f_2 | … of the column lattice, ascending, with
/// unit factors retained and zero factors excluded. The length equals the
/// rank of the lattice.
pub(crate) fn invariant_factors(rows: usize, columns: &[Vec<(usize, BigInt)>]) -> Vec<BigUint> {
    let mut sparse: Vec<HashMap<usize, BigInt>> = columns
        .iter()
        .map(|col| {
            let mut m = HashMap::new();
            for (r, v) in col {
                assert!(*r < rows, "row index out of range");
                if !v.is_zero() {
                    let slot = m.entry(*r).or_insert_with(BigInt::zero);
                    *slot += v;
                    if slot.is_zero() {
                        m.remove(r);
                    }
                }
            }
            m
        })
        .collect();

    let mut row_occupancy: HashMap<usize, usize> = HashMap::new();
    for col in &sparse {
        for r in col.keys() {
            *row_occupancy.entry(*r).or_insert(0) += 1;
        }
    }

    // Structural sweep: a column with a single entry in a singly-occupied
    // row is a 1x1 diagonal block of its own.
    let mut diagonal: Vec<BigUint> = Vec::new();
    for col in &mut sparse {
        if col.len() == 1 {
            let (&r, v) = col.iter().next().unwrap();
            if row_occupancy[&r] == 1 {
                diagonal.push(v.magnitude().clone());
                col.clear();
            }
        }
    }

    // Compact the rest into a dense matrix.
    let live_cols: Vec<&HashMap<usize, BigInt>> =
        sparse.iter().filter(|c| !c.is_empty()).collect();
    if !live_cols.is_empty() {
        let mut row_map: HashMap<usize, usize> = HashMap::new();
        for col in &live_cols {
            for r in col.keys() {
                let next = row_map.len();
                row_map.entry(*r).or_insert(next);
            }
        }
        let (nr, nc) = (row_map.len(), live_cols.len());
        let mut dense = vec![vec![BigInt::zero(); nc]; nr];
        for (j, col) in live_cols.iter().enumerate() {
            for (r, v) in col.iter() {
                dense[row_map[r]][j] = v.clone();
            }
        }
        diagonal.extend(diagonalize(&mut dense));
    }

    chain_from_diagonal(diagonal)
}

/// Reduces the matrix to (unordered) diagonal form by unimodular row and
/// column operations and returns the nonzero diagonal magnitudes.
fn diagonalize(m: &mut [Vec<BigInt>]) -> Vec<BigUint> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut diag = Vec::new();
    for k in 0..rows.min(cols) {
        loop {
            // Minimum-magnitude pivot in the remaining submatrix.
            let mut pivot: Option<(usize, usize)> = None;
            for i in k..rows {
                for j in k..cols {
                    if !m[i][j].is_zero()
                        && pivot.is_none_or(|(pi, pj)| m[i][j].magnitude() < m[pi][pj].magnitude())
                    {
                        pivot = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = pivot else {
                return diag;
            };
            m.swap(k, pi);
            for row in m.iter_mut() {
                row.swap(k, pj);
            }

            let mut clean = true;
            for i in k + 1..rows {
                if !m[i][k].is_zero() {
                    let q = m[i][k].div_floor(&m[k][k]);
                    if !q.is_zero() {
                        for j in k..cols {
                            let delta = &q * &m[k][j];
                            m[i][j] -= delta;
                        }
                    }
                    if !m[i][k].is_zero() {
                        clean = false;
                    }
                }
            }
            for j in k + 1..cols {
                if !m[k][j].is_zero() {
                    let q = m[k][j].div_floor(&m[k][k]);
                    if !q.is_zero() {
                        for row in m.iter_mut().skip(k) {
                            let delta = &q * &row[k];
                            row[j] -= delta;
                        }
                    }
                    if !m[k][j].is_zero() {
                        clean = false;
                    }
                }
            }
            if clean {
                break;
            }
        }
        diag.push(m[k][k].magnitude().clone());
    }
    diag
}

/// Combines unordered diagonal entries into the ascending invariant-factor
/// chain (diag(2,3) becomes (1,6)); the chain length equals the number of
/// nonzero entries.
fn chain_from_diagonal(diagonal: Vec<BigUint>) -> Vec<BigUint> {
    let rank = diagonal.len();
    let summands: Vec<(BigUint, BigUint)> = diagonal
        .into_iter()
        .map(|d| (d, BigUint::one()))
        .collect();
    let canonical = AbelianInvariants::new(BigUint::zero(), summands)
        .expect("diagonal entries fit in u64")
        .canonical()
        .to_vec();
    let mut chain: Vec<BigUint> = Vec::with_capacity(rank);
    let nontrivial: usize = canonical
        .iter()
        .map(|(_, m)| usize::try_from(m).expect("desk-scale chain"))
        .sum();
    chain.resize(rank - nontrivial, BigUint::one());
    for (f, m) in canonical {
        for _ in 0..usize::try_from(&m).unwrap() {
            chain.push(f.clone());
        }
    }
    chain
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bi(v: i64) -> BigInt {
        BigInt::from(v)
    }

    fn invariant_factors_dense(matrix: &[Vec<BigInt>]) -> Vec<BigUint> {
        let rows = matrix.len();
        let cols = matrix.first().map_or(0, Vec::len);
        let columns: Vec<Vec<(usize, BigInt)>> = (0..cols)
            .map(|j| {
                (0..rows)
                    .filter(|&i| !matrix[i][j].is_zero())
                    .map(|i| (i, matrix[i][j].clone()))
                    .collect()
            })
            .collect();
        invariant_factors(rows, &columns)
    }

    fn factors_of(rows: &[&[i64]]) -> Vec<u64> {
        let m: Vec<Vec<BigInt>> = rows
            .iter()
            .map(|r| r.iter().map(|&v| bi(v)).collect())
            .collect();
        invariant_factors_dense(&m)
            .into_iter()
            .map(|f| u64::try_from(f).unwrap())
            .collect()
    }

    #[test]
    fn small_matrices() {
        assert_eq!(factors_of(&[&[2, 0], &[0, 3]]), vec![1, 6]);
        assert_eq!(factors_of(&[&[0, 0], &[0, 0]]), Vec::<u64>::new());
        assert_eq!(
            factors_of(&[
                &[3, 0, 0, 0, 0],
                &[0, 3, 0, 0, 0],
                &[0, 0, 3, 0, 0],
                &[0, 0, 0, 3, 0],
                &[0, 0, 0, 0, 3]
            ]),
            vec![3, 3, 3, 3, 3]
        );
        assert_eq!(factors_of(&[&[2, 4], &[6, 8]]), vec![2, 4]);
        // Non-square, rank-deficient.
        assert_eq!(factors_of(&[&[1, 2, 3], &[2, 4, 6]]), vec![1]);
        assert_eq!(
            factors_of(&[
                &[-6, 111, -36, 6],
                &[5, -672, 210, 74],
                &[0, -255, 81, 24],
                &[-7, 255, -81, -10]
            ]),
            vec![1, 3, 21]
        );
    }

    #[test]
    fn sparse_and_dense_paths_agree() {
        // Unit columns exercise the structural sweep; the same lattice given
        // densely with mixed columns goes through diagonalization.
        let sparse_cols = vec![
            vec![(0usize, bi(3))],
            vec![(2usize, bi(9))],
            vec![(4usize, bi(-3))],
        ];
        assert_eq!(
            invariant_factors(5, &sparse_cols),
            vec![
                BigUint::from(3u8),
                BigUint::from(3u8),
                BigUint::from(9u8)
            ]
        );
    }

    #[test]
    fn duplicate_row_entries_in_one_column_are_summed() {
        let cols = vec![vec![(0usize, bi(2)), (0usize, bi(-2))]];
        assert!(invariant_factors(1, &cols).is_empty());
    }

    #[test]
    fn invariant_under_random_unimodular_transforms() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..15 {
            let rows = rng.gen_range(2..=4);
            let cols = rng.gen_range(2..=5);
            let mut m: Vec<Vec<BigInt>> = (0..rows)
                .map(|_| (0..cols).map(|_| bi(rng.gen_range(-9..=9))).collect())
                .collect();
            let reference = invariant_factors_dense(&m);
            for _ in 0..20 {
                match rng.gen_range(0..6) {
                    0 => {
                        let (a, b) = (rng.gen_range(0..rows), rng.gen_range(0..rows));
                        if a != b {
                            let k = bi(rng.gen_range(-3..=3));
                            for j in 0..cols {
                                let delta = &k * &m[b][j];
                                m[a][j] += delta;
                            }
                        }
                    }
                    1 => {
                        let (a, b) = (rng.gen_range(0..cols), rng.gen_range(0..cols));
                        if a != b {
                            let k = bi(rng.gen_range(-3..=3));
                            for row in m.iter_mut() {
                                let delta = &k * &row[b];
                                row[a] += delta;
                            }
                        }
                    }
                    2 => m.swap(rng.gen_range(0..rows), rng.gen_range(0..rows)),
                    3 => {
                        let (a, b) = (rng.gen_range(0..cols), rng.gen_range(0..cols));
                        for row in m.iter_mut() {
                            row.swap(a, b);
                        }
                    }
                    4 => {
                        let a = rng.gen_range(0..rows);
                        for j in 0..cols {
                            m[a][j] = -m[a][j].clone();
                        }
                    }
                    _ => {
                        let a = rng.gen_range(0..cols);
                        for row in m.iter_mut() {
                            row[a] = -row[a].clone();
                        }
                    }
                }
            }
            assert_eq!(invariant_factors_dense(&m), reference);
        }
    }
}
