//! Dense exact linear algebra over `F_q`.

use crate::field::{Elem, Field};

#[inline]
fn axpy(field: &Field, row: &mut [Elem], c: Elem, other: &[Elem]) {
    // row -= c * other
    let nc = field.neg(c);
    for (a, &b) in row.iter_mut().zip(other) {
        if !b.is_zero() {
            *a = field.add(*a, field.mul(nc, b));
        }
    }
}

fn normalize(field: &Field, row: &mut [Elem], col: usize) {
    let inv = field.inv(row[col]).expect("pivot is nonzero");
    for a in row.iter_mut() {
        *a = field.mul(*a, inv);
    }
}

/// Reduced row echelon form; returns the nonzero rows and their pivot columns.
pub fn rref(field: &Field, mut rows: Vec<Vec<Elem>>) -> (Vec<Vec<Elem>>, Vec<usize>) {
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(pr) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, pr);
        normalize(field, &mut rows[r], c);
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let k = row[c];
                axpy(field, row, k, &pivot_row);
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    (rows, pivots)
}

pub fn rank(field: &Field, rows: &[Vec<Elem>]) -> usize {
    rref(field, rows.to_vec()).1.len()
}

/// Basis of `{x : A x = 0}` for `A` given by rows with `ncols` columns.
pub fn nullspace(field: &Field, rows: &[Vec<Elem>], ncols: usize) -> Vec<Vec<Elem>> {
    let (r, pivots) = rref(field, rows.to_vec());
    kernel_from_rref(field, &r, &pivots, ncols)
}

fn kernel_from_rref(field: &Field, r: &[Vec<Elem>], pivots: &[usize], ncols: usize) -> Vec<Vec<Elem>> {
    let mut is_pivot = vec![false; ncols];
    for &c in pivots {
        is_pivot[c] = true;
    }
    (0..ncols)
        .filter(|&j| !is_pivot[j])
        .map(|j| {
            let mut v = vec![Elem::ZERO; ncols];
            v[j] = Elem::ONE;
            for (row, &c) in r.iter().zip(pivots) {
                v[c] = field.neg(row[j]);
            }
            v
        })
        .collect()
}

pub fn transpose(rows: &[Vec<Elem>], ncols: usize) -> Vec<Vec<Elem>> {
    (0..ncols).map(|j| rows.iter().map(|r| r[j]).collect()).collect()
}

pub fn mat_vec(field: &Field, rows: &[Vec<Elem>], x: &[Elem]) -> Vec<Elem> {
    rows.iter()
        .map(|r| r.iter().zip(x).fold(Elem::ZERO, |acc, (&a, &b)| field.add(acc, field.mul(a, b))))
        .collect()
}

pub fn dot(field: &Field, a: &[Elem], b: &[Elem]) -> Elem {
    a.iter().zip(b).fold(Elem::ZERO, |acc, (&x, &y)| field.add(acc, field.mul(x, y)))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Solve {
    Solution(Vec<Elem>),
    /// `y` with `yᵀA = 0` and `y·b ≠ 0`.
    Inconsistent(Vec<Elem>),
}

/// Solve `A x = b`, where `A` has `rows.len()` equations in `ncols` unknowns.
///
/// Works on `Aᵀ` so the cost is governed by the (small) number of unknowns
/// rather than the number of equations.
pub fn solve(field: &Field, rows: &[Vec<Elem>], ncols: usize, b: &[Elem]) -> Solve {
    assert_eq!(rows.len(), b.len());
    let m = rows.len();
    let at = transpose(rows, ncols);
    let (r, pivots) = rref(field, at);
    // Left kernel of A: for each free column of rref(Aᵀ) one vector y.
    let mut is_pivot = vec![false; m];
    for &c in &pivots {
        is_pivot[c] = true;
    }
    for j in (0..m).filter(|&j| !is_pivot[j]) {
        let mut s = b[j];
        for (row, &c) in r.iter().zip(&pivots) {
            if !row[j].is_zero() {
                s = field.sub(s, field.mul(row[j], b[c]));
            }
        }
        if !s.is_zero() {
            let mut y = vec![Elem::ZERO; m];
            y[j] = Elem::ONE;
            for (row, &c) in r.iter().zip(&pivots) {
                y[c] = field.neg(row[j]);
            }
            return Solve::Inconsistent(y);
        }
    }
    // Consistent: the pivot equations determine a solution.
    let sub: Vec<Vec<Elem>> = pivots.iter().map(|&i| rows[i].clone()).collect();
    let rhs: Vec<Elem> = pivots.iter().map(|&i| b[i]).collect();
    let mut aug: Vec<Vec<Elem>> = sub
        .into_iter()
        .zip(rhs)
        .map(|(mut row, v)| {
            row.push(v);
            row
        })
        .collect();
    if aug.is_empty() {
        return Solve::Solution(vec![Elem::ZERO; ncols]);
    }
    let (red, piv) = rref(field, std::mem::take(&mut aug));
    let mut x = vec![Elem::ZERO; ncols];
    for (row, &c) in red.iter().zip(&piv) {
        debug_assert!(c < ncols, "consistency was checked");
        x[c] = row[ncols];
    }
    Solve::Solution(x)
}

/// Check a certificate returned by [`solve`].
pub fn verify_certificate(field: &Field, rows: &[Vec<Elem>], ncols: usize, b: &[Elem], y: &[Elem]) -> bool {
    if y.len() != rows.len() {
        return false;
    }
    let mut acc = vec![Elem::ZERO; ncols];
    for (row, &c) in rows.iter().zip(y) {
        if c.is_zero() {
            continue;
        }
        for (a, &v) in acc.iter_mut().zip(row) {
            *a = field.add(*a, field.mul(c, v));
        }
    }
    acc.iter().all(|a| a.is_zero()) && !dot(field, y, b).is_zero()
}

/// Row space kept in fully reduced echelon form under incremental insertion.
#[derive(Clone, Debug)]
pub struct RowBasis {
    ncols: usize,
    rows: Vec<Vec<Elem>>,
    pivot_of_col: Vec<Option<usize>>,
    pivots: Vec<usize>,
}

impl RowBasis {
    pub fn new(ncols: usize) -> Self {
        RowBasis { ncols, rows: Vec::new(), pivot_of_col: vec![None; ncols], pivots: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn is_full(&self) -> bool {
        self.rows.len() == self.ncols
    }

    /// Reduce `row` against the basis in place; returns true if it became zero.
    pub fn reduce(&self, field: &Field, row: &mut [Elem]) -> bool {
        // Reduced basis rows vanish on every other pivot column, so one pass
        // over the pivots that are hit is enough.
        let hits: Vec<(usize, Elem)> = self
            .pivots
            .iter()
            .enumerate()
            .filter(|(_, &c)| !row[c].is_zero())
            .map(|(r, &c)| (r, row[c]))
            .collect();
        for (r, k) in hits {
            axpy(field, row, k, &self.rows[r]);
        }
        row.iter().all(|a| a.is_zero())
    }

    /// Insert a row; returns true if the rank grew.
    pub fn insert(&mut self, field: &Field, mut row: Vec<Elem>) -> bool {
        debug_assert_eq!(row.len(), self.ncols);
        if self.is_full() || self.reduce(field, &mut row) {
            return false;
        }
        let c = row.iter().position(|a| !a.is_zero()).unwrap();
        normalize(field, &mut row, c);
        for existing in self.rows.iter_mut() {
            if !existing[c].is_zero() {
                let k = existing[c];
                axpy(field, existing, k, &row);
            }
        }
        self.pivot_of_col[c] = Some(self.rows.len());
        self.pivots.push(c);
        self.rows.push(row);
        true
    }

    pub fn rows(&self) -> &[Vec<Elem>] {
        &self.rows
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn contains(&self, field: &Field, row: &[Elem]) -> bool {
        let mut r = row.to_vec();
        self.reduce(field, &mut r)
    }

    /// Basis of the orthogonal complement `{x : row·x = 0 for all rows}`.
    pub fn kernel(&self, field: &Field) -> Vec<Vec<Elem>> {
        kernel_from_rref(field, &self.rows, &self.pivots, self.ncols)
    }
}
