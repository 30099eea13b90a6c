use std::fmt;

use crate::error::{LabError, Result};
use crate::linalg::Matrix;

/// Row set `I` and column set `J` (0-based, strictly increasing, `|I| = |J|`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MinorIndex {
    rows: Vec<usize>,
    cols: Vec<usize>,
}

fn strictly_increasing(v: &[usize]) -> bool {
    v.windows(2).all(|w| w[0] < w[1])
}

impl MinorIndex {
    pub fn new(rows: Vec<usize>, cols: Vec<usize>, d: usize) -> Result<Self> {
        if rows.is_empty() || rows.len() != cols.len() {
            return Err(LabError::InvalidMinor(format!(
                "|I| = {} and |J| = {} must be equal and positive",
                rows.len(),
                cols.len()
            )));
        }
        if !strictly_increasing(&rows) || !strictly_increasing(&cols) {
            return Err(LabError::InvalidMinor("indices must be strictly increasing".into()));
        }
        if rows.iter().chain(&cols).any(|&i| i >= d) {
            return Err(LabError::InvalidMinor(format!("index out of range for d = {d}")));
        }
        Ok(MinorIndex { rows, cols })
    }

    pub fn full(d: usize) -> Self {
        MinorIndex {
            rows: (0..d).collect(),
            cols: (0..d).collect(),
        }
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn cols(&self) -> &[usize] {
        &self.cols
    }

    pub fn size(&self) -> usize {
        self.rows.len()
    }

    /// Every `(I, J)` with `|I| = |J| ∈ {1, …, d}`, ordered by size, then `I`, then `J`.
    pub fn all(d: usize) -> Vec<MinorIndex> {
        let mut out = Vec::new();
        for size in 1..=d {
            let subsets = subsets(d, size);
            for rows in &subsets {
                for cols in &subsets {
                    out.push(MinorIndex {
                        rows: rows.clone(),
                        cols: cols.clone(),
                    });
                }
            }
        }
        out
    }
}

impl fmt::Display for MinorIndex {
    /// 1-based, e.g. `I={1,2},J={2,3}`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[usize]| v.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(",");
        write!(f, "I={{{}}},J={{{}}}", join(&self.rows), join(&self.cols))
    }
}

/// All `size`-element subsets of `{0, …, n−1}` in lexicographic order.
pub(crate) fn subsets(n: usize, size: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < size - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, size, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, size, &mut Vec::with_capacity(size), &mut out);
    out
}

/// `P_{I,J}(M)`: determinant of the submatrix with rows `I` and columns `J`.
pub fn minor(m: &Matrix, idx: &MinorIndex) -> f64 {
    let r = idx.rows();
    let c = idx.cols();
    match idx.size() {
        1 => m[(r[0], c[0])],
        2 => m[(r[0], c[0])] * m[(r[1], c[1])] - m[(r[0], c[1])] * m[(r[1], c[0])],
        k => Matrix::from_fn(k, k, |i, j| m[(r[i], c[j])]).determinant(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let m = Matrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(minor(&m, &MinorIndex::new(vec![0], vec![1], 2).unwrap()), 2.0);
        assert_eq!(minor(&m, &MinorIndex::full(2)), -2.0);

        let id = Matrix::identity(4, 4);
        for idx in MinorIndex::all(4) {
            let expected = if idx.rows() == idx.cols() { 1.0 } else { 0.0 };
            assert_eq!(minor(&id, &idx), expected, "{idx}");
        }
    }

    #[test]
    fn enumeration_counts() {
        // Σ_j C(d,j)² = C(2d,d) − 1
        assert_eq!(MinorIndex::all(2).len(), 5);
        assert_eq!(MinorIndex::all(3).len(), 19);
        assert_eq!(MinorIndex::all(4).len(), 69);
    }

    #[test]
    fn invalid_indices() {
        assert!(MinorIndex::new(vec![0, 1], vec![1], 3).is_err());
        assert!(MinorIndex::new(vec![1, 0], vec![0, 1], 3).is_err());
        assert!(MinorIndex::new(vec![0], vec![3], 3).is_err());
        assert!(MinorIndex::new(vec![], vec![], 3).is_err());
    }

    #[test]
    fn display_is_one_based() {
        let idx = MinorIndex::new(vec![0, 3], vec![1, 2], 4).unwrap();
        assert_eq!(idx.to_string(), "I={1,4},J={2,3}");
    }
}
