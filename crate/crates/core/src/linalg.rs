//! Exact row reduction over ℚ.
//!
//! Pivots are taken in column order, so when the columns of a matrix list a
//! generating set followed by candidate complement vectors, the pivot
//! columns among the candidates form the greedy complement.

use num_traits::{One, Zero};

use crate::grading::Q;

/// Reduced row echelon form of a dense matrix together with the row
/// transformation that produced it.
#[derive(Clone, Debug)]
pub struct Echelon {
    rows: usize,
    cols: usize,
    rref: Vec<Vec<Q>>,
    transform: Vec<Vec<Q>>,
    pivots: Vec<usize>,
}

impl Echelon {
    /// Row-reduces `matrix` (given as `rows` vectors of length `cols`).
    pub fn new(matrix: Vec<Vec<Q>>, cols: usize) -> Self {
        let rows = matrix.len();
        let mut a = matrix;
        debug_assert!(a.iter().all(|r| r.len() == cols));
        let mut t: Vec<Vec<Q>> = (0..rows)
            .map(|i| (0..rows).map(|j| if i == j { Q::one() } else { Q::zero() }).collect())
            .collect();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            if r == rows {
                break;
            }
            let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
                continue;
            };
            a.swap(r, p);
            t.swap(r, p);
            let inv = a[r][c].recip();
            for v in a[r].iter_mut() {
                *v *= &inv;
            }
            for v in t[r].iter_mut() {
                *v *= &inv;
            }
            for i in 0..rows {
                if i == r || a[i][c].is_zero() {
                    continue;
                }
                let f = a[i][c].clone();
                for j in c..cols {
                    if !a[r][j].is_zero() {
                        let d = &f * &a[r][j];
                        a[i][j] -= d;
                    }
                }
                for j in 0..rows {
                    if !t[r][j].is_zero() {
                        let d = &f * &t[r][j];
                        t[i][j] -= d;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        Self { rows, cols, rref: a, transform: t, pivots }
    }

    /// Builds the matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vec<Q>], rows: usize) -> Self {
        let cols = columns.len();
        let matrix = (0..rows)
            .map(|i| columns.iter().map(|col| col[i].clone()).collect())
            .collect();
        Self::new(matrix, cols)
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn pivot_columns(&self) -> &[usize] {
        &self.pivots
    }

    pub fn is_pivot(&self, col: usize) -> bool {
        self.pivots.binary_search(&col).is_ok()
    }

    /// Particular solution of `A·v = rhs` with every free variable set to
    /// zero, or `None` if the system is inconsistent.
    pub fn solve(&self, rhs: &[Q]) -> Option<Vec<Q>> {
        assert_eq!(rhs.len(), self.rows);
        let y: Vec<Q> = self
            .transform
            .iter()
            .map(|row| {
                row.iter()
                    .zip(rhs)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .fold(Q::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect();
        if y[self.rank()..].iter().any(|v| !v.is_zero()) {
            return None;
        }
        let mut sol = vec![Q::zero(); self.cols];
        for (r, &c) in self.pivots.iter().enumerate() {
            sol[c] = y[r].clone();
        }
        Some(sol)
    }

    /// Basis of the null space, one vector per free column.
    pub fn nullspace(&self) -> Vec<Vec<Q>> {
        let mut out = Vec::new();
        for free in (0..self.cols).filter(|c| !self.is_pivot(*c)) {
            let mut v = vec![Q::zero(); self.cols];
            v[free] = Q::one();
            for (r, &c) in self.pivots.iter().enumerate() {
                v[c] = -self.rref[r][free].clone();
            }
            out.push(v);
        }
        out
    }
}
