//! Exact linear solves over the rationals for integer systems.
//!
//! Small systems only: normal-form extraction in `fng` and binomial-basis
//! polynomial fitting. Smith normal form lives in `oracle::snf` and does not
//! come through here.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Solver for `A·x = rhs` where `A` is a fixed integer matrix of full column
/// rank. Construction selects a square invertible row submatrix and inverts
/// it exactly; each `solve` is then a small matrix-vector product plus a
/// consistency check of the remaining rows.
pub(crate) struct ExactSolver {
    rows: usize,
    cols: usize,
    matrix: Vec<Vec<BigInt>>,
    pivot_rows: Vec<usize>,
    inverse: Vec<Vec<BigRational>>,
}

impl ExactSolver {
    /// Fails when `a` does not have full column rank.
    pub fn new(a: Vec<Vec<BigInt>>) -> Result<ExactSolver> {
        let rows = a.len();
        let cols = a.first().map_or(0, Vec::len);
        assert!(a.iter().all(|r| r.len() == cols), "ragged matrix");

        // Row-eliminate a rational copy to pick one pivot row per column.
        let mut work: Vec<(usize, Vec<BigRational>)> = a
            .iter()
            .enumerate()
            .map(|(i, r)| (i, r.iter().map(|v| BigRational::from(v.clone())).collect()))
            .collect();
        let mut pivot_rows = Vec::with_capacity(cols);
        for col in 0..cols {
            let rank = pivot_rows.len();
            let Some(found) = (rank..work.len()).find(|&r| !work[r].1[col].is_zero()) else {
                return Err(Error::Domain(format!(
                    "matrix does not have full column rank (column {col})"
                )));
            };
            work.swap(rank, found);
            let (pivot_span, rest) = work.split_at_mut(rank + 1);
            let pivot = &pivot_span[rank];
            for row in rest.iter_mut() {
                if !row.1[col].is_zero() {
                    let factor = &row.1[col] / &pivot.1[col];
                    for c in col..cols {
                        let delta = &factor * &pivot.1[c];
                        row.1[c] -= delta;
                    }
                }
            }
            pivot_rows.push(work[rank].0);
        }

        let square: Vec<Vec<BigRational>> = pivot_rows
            .iter()
            .map(|&r| a[r].iter().map(|v| BigRational::from(v.clone())).collect())
            .collect();
        let inverse = invert(square).expect("pivot submatrix is invertible");

        Ok(ExactSolver {
            rows,
            cols,
            matrix: a,
            pivot_rows,
            inverse,
        })
    }

    /// Returns the unique solution, or `None` when the system is
    /// inconsistent.
    pub fn solve(&self, rhs: &[BigInt]) -> Option<Vec<BigRational>> {
        assert_eq!(rhs.len(), self.rows, "rhs length mismatch");
        let mut x = vec![BigRational::zero(); self.cols];
        for (i, row) in self.inverse.iter().enumerate() {
            let mut acc = BigRational::zero();
            for (c, coeff) in row.iter().enumerate() {
                if !coeff.is_zero() {
                    acc += coeff * BigRational::from(rhs[self.pivot_rows[c]].clone());
                }
            }
            x[i] = acc;
        }
        // Verify every row, not only the pivot rows.
        for (row, b) in self.matrix.iter().zip(rhs) {
            let mut acc = BigRational::zero();
            for (v, xi) in row.iter().zip(&x) {
                if !v.is_zero() && !xi.is_zero() {
                    acc += BigRational::from(v.clone()) * xi;
                }
            }
            if acc != BigRational::from(b.clone()) {
                return None;
            }
        }
        Some(x)
    }

    /// As `solve`, but additionally requires every component to be an
    /// integer.
    pub fn solve_integer(&self, rhs: &[BigInt]) -> Option<Vec<BigInt>> {
        self.solve(rhs)?
            .into_iter()
            .map(|x| x.is_integer().then(|| x.to_integer()))
            .collect()
    }
}

/// Gauss-Jordan inverse; `None` when singular.
fn invert(mut m: Vec<Vec<BigRational>>) -> Option<Vec<Vec<BigRational>>> {
    let n = m.len();
    let mut inv: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        BigRational::one()
                    } else {
                        BigRational::zero()
                    }
                })
                .collect()
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, pivot);
        inv.swap(col, pivot);
        let p = m[col][col].clone();
        for c in 0..n {
            m[col][c] /= &p;
            inv[col][c] /= &p;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in 0..n {
                    let dm = &f * &m[col][c];
                    let di = &f * &inv[col][c];
                    m[r][c] -= dm;
                    inv[r][c] -= di;
                }
            }
        }
    }
    Some(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bi(v: i64) -> BigInt {
        BigInt::from(v)
    }

    #[test]
    fn solves_square_system() {
        let a = vec![vec![bi(2), bi(1)], vec![bi(1), bi(3)]];
        let solver = ExactSolver::new(a).unwrap();
        let x = solver.solve_integer(&[bi(5), bi(10)]).unwrap();
        assert_eq!(x, vec![bi(1), bi(3)]);
    }

    #[test]
    fn overdetermined_consistent_and_inconsistent() {
        let a = vec![vec![bi(1), bi(0)], vec![bi(0), bi(1)], vec![bi(1), bi(1)]];
        let solver = ExactSolver::new(a).unwrap();
        assert_eq!(
            solver.solve_integer(&[bi(2), bi(3), bi(5)]),
            Some(vec![bi(2), bi(3)])
        );
        assert_eq!(solver.solve_integer(&[bi(2), bi(3), bi(6)]), None);
    }

    #[test]
    fn rational_solution_rejected_by_integer_solve() {
        let a = vec![vec![bi(2)]];
        let solver = ExactSolver::new(a).unwrap();
        assert_eq!(solver.solve_integer(&[bi(3)]), None);
        assert_eq!(
            solver.solve(&[bi(3)]).unwrap()[0],
            BigRational::new(bi(3), bi(2))
        );
    }

    #[test]
    fn rank_deficient_matrix_is_rejected() {
        let a = vec![vec![bi(1), bi(2)], vec![bi(2), bi(4)]];
        assert!(ExactSolver::new(a).is_err());
    }
}
