//! Exact sparse Gaussian elimination over the rationals.
//!
//! Rows arrive one at a time and are reduced online against the pivot rows
//! collected so far. Free columns are fixed to zero, which yields the
//! minimal-support solution for the pivot order chosen by the caller's
//! column numbering.

use num_traits::Zero;

use crate::rational::Rational;

/// One equation `sum_j a_j x_j = rhs` with entries sorted by column.
#[derive(Clone, Debug)]
pub struct SparseRow {
    pub entries: Vec<(usize, Rational)>,
    pub rhs: Rational,
}

impl SparseRow {
    pub fn new(mut entries: Vec<(usize, Rational)>, rhs: Rational) -> Self {
        entries.sort_by_key(|&(c, _)| c);
        entries.retain(|(_, a)| !a.is_zero());
        Self { entries, rhs }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SolveOutcome {
    /// A solution with free columns set to zero.
    Solved(Vec<Rational>),
    /// Some row reduced to `0 = nonzero`.
    Inconsistent,
}

/// `row - factor * pivot`, with the pivot normalized to leading coefficient 1.
fn eliminate(row: &SparseRow, pivot: &SparseRow, factor: &Rational) -> SparseRow {
    let mut entries = Vec::with_capacity(row.entries.len() + pivot.entries.len());
    let mut a = row.entries.iter().peekable();
    let mut b = pivot.entries.iter().peekable();
    loop {
        match (a.peek(), b.peek()) {
            (None, None) => break,
            (Some((ca, va)), Some((cb, vb))) => {
                if ca < cb {
                    entries.push((*ca, va.clone()));
                    a.next();
                } else if cb < ca {
                    entries.push((*cb, -(vb * factor)));
                    b.next();
                } else {
                    let v = va - &(vb * factor);
                    if !v.is_zero() {
                        entries.push((*ca, v));
                    }
                    a.next();
                    b.next();
                }
            }
            (Some((ca, va)), None) => {
                entries.push((*ca, va.clone()));
                a.next();
            }
            (None, Some((cb, vb))) => {
                entries.push((*cb, -(vb * factor)));
                b.next();
            }
        }
    }
    SparseRow {
        entries,
        rhs: &row.rhs - &(&pivot.rhs * factor),
    }
}

/// Reduce every row to echelon form and back-substitute, reporting whether
/// any row collapsed to `0 = nonzero`. The solution from the consistent
/// subsystem is returned either way so callers can inspect what remains.
///
/// Rows are processed sparsest-first so that singleton equations resolve
/// unknowns before wide rows arrive.
pub fn solve_lenient(n_cols: usize, mut rows: Vec<SparseRow>) -> (Vec<Rational>, bool) {
    rows.sort_by_key(|r| r.entries.len());
    let mut pivots: Vec<Option<SparseRow>> = vec![None; n_cols];
    let mut consistent = true;
    for mut row in rows {
        loop {
            let Some((lead, lead_coeff)) = row.entries.first().cloned() else {
                if !row.rhs.is_zero() {
                    consistent = false;
                }
                break;
            };
            match &pivots[lead] {
                Some(pivot) => {
                    row = eliminate(&row, pivot, &lead_coeff);
                }
                None => {
                    let inv = Rational::new(
                        lead_coeff.denom().clone(),
                        lead_coeff.numer().clone(),
                    );
                    for (_, v) in row.entries.iter_mut() {
                        *v *= &inv;
                    }
                    row.rhs *= &inv;
                    pivots[lead] = Some(row);
                    break;
                }
            }
        }
    }
    let mut x = vec![Rational::zero(); n_cols];
    for col in (0..n_cols).rev() {
        if let Some(pivot) = &pivots[col] {
            let mut v = pivot.rhs.clone();
            for (c, a) in pivot.entries.iter().skip(1) {
                if !x[*c].is_zero() {
                    v -= a * &x[*c];
                }
            }
            x[col] = v;
        }
    }
    (x, consistent)
}

/// Strict variant of [`solve_lenient`].
pub fn solve(n_cols: usize, rows: Vec<SparseRow>) -> SolveOutcome {
    let (x, consistent) = solve_lenient(n_cols, rows);
    if consistent {
        SolveOutcome::Solved(x)
    } else {
        SolveOutcome::Inconsistent
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn row(entries: &[(usize, i64)], rhs: i64) -> SparseRow {
        SparseRow::new(
            entries.iter().map(|&(c, v)| (c, rat(v))).collect(),
            rat(rhs),
        )
    }

    #[test]
    fn unique_system() {
        // x + y = 3, x - y = 1
        let rows = vec![row(&[(0, 1), (1, 1)], 3), row(&[(0, 1), (1, -1)], 1)];
        let SolveOutcome::Solved(x) = solve(2, rows) else {
            panic!("expected solution");
        };
        assert_eq!(x, vec![rat(2), rat(1)]);
    }

    #[test]
    fn underdetermined_prefers_zero_free_columns() {
        // x + y = 2 with y free.
        let rows = vec![row(&[(0, 1), (1, 1)], 2)];
        let SolveOutcome::Solved(x) = solve(2, rows) else {
            panic!("expected solution");
        };
        assert_eq!(x, vec![rat(2), rat(0)]);
    }

    #[test]
    fn inconsistent_system() {
        let rows = vec![row(&[(0, 1)], 1), row(&[(0, 2)], 3)];
        assert_eq!(solve(1, rows), SolveOutcome::Inconsistent);
    }

    #[test]
    fn rational_pivoting() {
        // 2x + 4y = 1, 3y = 1
        let rows = vec![row(&[(0, 2), (1, 4)], 1), row(&[(1, 3)], 1)];
        let SolveOutcome::Solved(x) = solve(2, rows) else {
            panic!("expected solution");
        };
        assert_eq!(x[1], crate::rational::ratio(1, 3));
        assert_eq!(x[0], crate::rational::ratio(-1, 6));
    }
}
