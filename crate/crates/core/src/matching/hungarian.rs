//! Minimum-cost assignment on rectangular matrices (shortest augmenting
//! path formulation of the Hungarian method, O(n²m)).

use crate::error::{Error, Result};

/// Dense row-major cost matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        if rows.iter().any(|r| r.as_ref().len() != cols) {
            return Err(Error::InvalidParameter("cost matrix rows differ in length".into()));
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data: rows.iter().flat_map(|r| r.as_ref().iter().copied()).collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    fn transposed(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }
}

/// Row → column assignment. Rows stay unassigned only when there are more
/// rows than columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub row_to_col: Vec<Option<usize>>,
    pub total_cost: f64,
}

impl Assignment {
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.row_to_col
            .iter()
            .enumerate()
            .filter_map(|(r, c)| c.map(|c| (r, c)))
    }
}

/// Minimum total cost assignment of `min(rows, cols)` pairs.
///
/// Deterministic: rows are inserted in index order, and whenever several
/// columns share the smallest reduced cost a free column is preferred, then
/// the lowest index.
pub fn hungarian(cost: &CostMatrix) -> Result<Assignment> {
    if cost.data.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidParameter("cost matrix contains non-finite values".into()));
    }
    if cost.rows == 0 || cost.cols == 0 {
        return Ok(Assignment {
            row_to_col: vec![None; cost.rows],
            total_cost: 0.0,
        });
    }
    let row_to_col = if cost.rows <= cost.cols {
        solve(cost)
    } else {
        let col_to_row = solve(&cost.transposed());
        let mut row_to_col = vec![None; cost.rows];
        for (c, r) in col_to_row.into_iter().enumerate() {
            if let Some(r) = r {
                row_to_col[r] = Some(c);
            }
        }
        row_to_col
    };
    let total_cost = row_to_col
        .iter()
        .enumerate()
        .filter_map(|(r, c)| c.map(|c| cost.get(r, c)))
        .sum();
    Ok(Assignment { row_to_col, total_cost })
}

// Requires rows <= cols. Index 0 of columns is a virtual source.
fn solve(cost: &CostMatrix) -> Vec<Option<usize>> {
    let (n, m) = (cost.rows, cost.cols);
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; m + 1];
    // owner[j] = 1-based row assigned to column j, 0 if free
    let mut owner = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];

    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = cost.get(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                let better = minv[j] < delta
                    || (minv[j] == delta && owner[j] == 0 && j1 != 0 && owner[j1] != 0);
                if better {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut row_to_col = vec![None; n];
    for j in 1..=m {
        if owner[j] != 0 {
            row_to_col[owner[j] - 1] = Some(j - 1);
        }
    }
    row_to_col
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_force(cost: &CostMatrix) -> f64 {
        fn go(cost: &CostMatrix, row: usize, used: &mut Vec<bool>, acc: f64, best: &mut f64) {
            if row == cost.rows() {
                *best = best.min(acc);
                return;
            }
            for c in 0..cost.cols() {
                if !used[c] {
                    used[c] = true;
                    go(cost, row + 1, used, acc + cost.get(row, c), best);
                    used[c] = false;
                }
            }
        }
        let cost = if cost.rows() > cost.cols() { cost.transposed() } else { cost.clone() };
        let mut best = f64::INFINITY;
        go(&cost, 0, &mut vec![false; cost.cols()], 0.0, &mut best);
        best
    }

    #[test]
    fn one_by_one() {
        let a = hungarian(&CostMatrix::from_rows(&[[3.5]]).unwrap()).unwrap();
        assert_eq!(a.row_to_col, vec![Some(0)]);
        assert_eq!(a.total_cost, 3.5);
    }

    #[test]
    fn unique_optimum() {
        let a = hungarian(&CostMatrix::from_rows(&[[1.0, 2.0], [2.0, 1.0]]).unwrap()).unwrap();
        assert_eq!(a.row_to_col, vec![Some(0), Some(1)]);
    }

    #[test]
    fn ties_resolve_to_identity() {
        let a = hungarian(&CostMatrix::from_rows(&[[0.0; 3]; 3]).unwrap()).unwrap();
        assert_eq!(a.row_to_col, vec![Some(0), Some(1), Some(2)]);
    }

    #[test]
    fn empty_matrix_gives_empty_assignment() {
        let a = hungarian(&CostMatrix::from_fn(0, 0, |_, _| 0.0)).unwrap();
        assert!(a.row_to_col.is_empty());
        let a = hungarian(&CostMatrix::from_fn(3, 0, |_, _| 0.0)).unwrap();
        assert_eq!(a.row_to_col, vec![None; 3]);
    }

    #[test]
    fn rejects_non_finite() {
        assert!(hungarian(&CostMatrix::from_rows(&[[f64::NAN]]).unwrap()).is_err());
    }

    #[test]
    fn tall_matrix_leaves_rows_unassigned() {
        let m = CostMatrix::from_rows(&[[5.0], [1.0], [3.0]]).unwrap();
        let a = hungarian(&m).unwrap();
        assert_eq!(a.row_to_col, vec![None, Some(0), None]);
    }

    #[test]
    fn deterministic_on_repeat() {
        let m = CostMatrix::from_fn(9, 7, |r, c| ((r * 7 + c * 3) % 4) as f64);
        assert_eq!(hungarian(&m).unwrap(), hungarian(&m).unwrap());
    }

    proptest! {
        #[test]
        fn matches_brute_force(
            (rows, cols, vals) in (1usize..=6, 1usize..=6)
                .prop_flat_map(|(r, c)| (Just(r), Just(c), prop::collection::vec(0i32..20, r * c)))
        ) {
            let m = CostMatrix::from_fn(rows, cols, |r, c| vals[r * cols + c] as f64);
            let a = hungarian(&m).unwrap();
            prop_assert_eq!(a.total_cost, brute_force(&m));
            prop_assert_eq!(a.pairs().count(), rows.min(cols));
            let mut seen = vec![false; cols];
            for (_, c) in a.pairs() {
                prop_assert!(!seen[c]);
                seen[c] = true;
            }
        }
    }
}
