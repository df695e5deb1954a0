//! Dense Gaussian elimination over the rationals for the small linear
//! systems behind ansatz searches. Row order comes from the canonical
//! monomial order, pivoting takes the first nonzero entry, and free
//! unknowns are set to zero, so a solvable system always yields the same
//! solution.

use crate::jetalg::{Expr, Monomial};
use num::{BigRational, Zero};
use std::collections::BTreeSet;

/// Solve `sum_j c_j * columns[j] = target` for rational `c`, where each
/// column and the target are vectors of expressions (one block per
/// component). Returns `None` when the system is inconsistent.
pub(crate) fn solve_linear(columns: &[Vec<Expr>], target: &[Expr]) -> Option<Vec<BigRational>> {
    let blocks = target.len();
    debug_assert!(columns.iter().all(|col| col.len() == blocks));

    // row index: every monomial that occurs anywhere, per block
    let mut rows: Vec<(usize, Monomial)> = Vec::new();
    for b in 0..blocks {
        let mut monomials: BTreeSet<Monomial> = BTreeSet::new();
        for col in columns {
            monomials.extend(col[b].terms().map(|(m, _)| m.clone()));
        }
        monomials.extend(target[b].terms().map(|(m, _)| m.clone()));
        rows.extend(monomials.into_iter().map(|m| (b, m)));
    }

    let ncols = columns.len();
    let mut matrix: Vec<Vec<BigRational>> = rows
        .iter()
        .map(|(b, m)| {
            let mut row: Vec<BigRational> = columns
                .iter()
                .map(|col| col[*b].coefficient(m))
                .collect();
            row.push(target[*b].coefficient(m));
            row
        })
        .collect();

    // forward elimination
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; ncols];
    let mut next_row = 0;
    for col in 0..ncols {
        let Some(pivot) = (next_row..matrix.len()).find(|&r| !matrix[r][col].is_zero()) else {
            continue;
        };
        matrix.swap(next_row, pivot);
        let lead = matrix[next_row][col].clone();
        for entry in &mut matrix[next_row] {
            *entry /= &lead;
        }
        for r in 0..matrix.len() {
            if r == next_row || matrix[r][col].is_zero() {
                continue;
            }
            let factor = matrix[r][col].clone();
            for c in col..=ncols {
                let delta = &factor * &matrix[next_row][c];
                matrix[r][c] -= delta;
            }
        }
        pivot_of_col[col] = Some(next_row);
        next_row += 1;
        if next_row == matrix.len() {
            break;
        }
    }

    // consistency: a row with zero coefficients must have zero target
    for row in &matrix {
        if row[..ncols].iter().all(Zero::is_zero) && !row[ncols].is_zero() {
            return None;
        }
    }

    let mut solution = vec![BigRational::zero(); ncols];
    for (col, pivot) in pivot_of_col.iter().enumerate() {
        if let Some(r) = pivot {
            solution[col] = matrix[*r][ncols].clone();
        }
    }
    Some(solution)
}
