use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;

use super::{Scalar, SparseVec};
use crate::error::{Error, Result};

/// Sparse matrix stored by rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMatrix {
    cols: usize,
    rows: Vec<SparseVec>,
}

impl SparseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SparseMatrix {
            cols,
            rows: vec![SparseVec::new(); rows],
        }
    }

    pub fn from_rows(cols: usize, rows: Vec<SparseVec>) -> Result<Self> {
        for r in &rows {
            if let Some((c, _)) = r.iter().next_back() {
                if c >= cols {
                    return Err(Error::Invalid(alloc::format!(
                        "column {c} out of range for {cols} columns"
                    )));
                }
            }
        }
        Ok(SparseMatrix { cols, rows })
    }

    pub fn from_dense(rows: &[Vec<Scalar>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let rows = rows
            .iter()
            .map(|r| r.iter().cloned().enumerate().collect())
            .collect();
        SparseMatrix { cols, rows }
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix {
            cols: n,
            rows: (0..n).map(SparseVec::unit).collect(),
        }
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &SparseVec {
        &self.rows[r]
    }

    pub fn get(&self, r: usize, c: usize) -> Scalar {
        self.rows[r].get(c)
    }

    pub fn set(&mut self, r: usize, c: usize, v: Scalar) {
        assert!(c < self.cols && r < self.rows.len());
        let old = self.rows[r].get(c);
        self.rows[r].add_term(c, &(v - old));
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(SparseVec::len).sum()
    }

    pub fn mul_vec(&self, x: &[Scalar]) -> Vec<Scalar> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|(c, v)| v * &x[c]).sum())
            .collect()
    }

    pub fn rank(&self) -> usize {
        self.reducer().rank()
    }

    /// Basis of the right null space, as dense coefficient vectors.
    pub fn kernel_basis(&self) -> Vec<Vec<Scalar>> {
        self.reducer().kernel_basis()
    }

    fn reducer(&self) -> RowReducer {
        let mut red = RowReducer::new(self.cols);
        for r in &self.rows {
            red.insert(r.iter().map(|(c, v)| (c, v.clone())));
        }
        red
    }
}

/// Incremental row echelon form. Rows are inserted one at a time; each pivot
/// row is normalized to a leading 1 and only has entries at or right of its
/// pivot column.
#[derive(Clone, Debug)]
pub struct RowReducer {
    cols: usize,
    pivot_row: Vec<Option<usize>>,
    rows: Vec<Vec<(usize, Scalar)>>,
    scratch: Scratch,
}

#[derive(Clone, Debug)]
struct Scratch {
    acc: Vec<Scalar>,
    touched: Vec<bool>,
    heap: BinaryHeap<Reverse<usize>>,
    seen: Vec<usize>,
}

impl Scratch {
    fn new(cols: usize) -> Self {
        Scratch {
            acc: vec![Scalar::ZERO; cols],
            touched: vec![false; cols],
            heap: BinaryHeap::new(),
            seen: Vec::new(),
        }
    }

    fn push(&mut self, c: usize, v: &Scalar) {
        self.acc[c] += v;
        if !self.touched[c] {
            self.touched[c] = true;
            self.seen.push(c);
            self.heap.push(Reverse(c));
        }
    }

    fn clear(&mut self) {
        for &c in &self.seen {
            self.acc[c] = Scalar::ZERO;
            self.touched[c] = false;
        }
        self.seen.clear();
        self.heap.clear();
    }

    /// Drains the remaining nonzero entries in column order.
    fn drain_sorted(&mut self) -> Vec<(usize, Scalar)> {
        let mut out: Vec<(usize, Scalar)> = self
            .seen
            .iter()
            .filter(|c| !self.acc[**c].is_zero())
            .map(|c| (*c, self.acc[*c].clone()))
            .collect();
        out.sort_unstable_by_key(|e| e.0);
        self.clear();
        out
    }
}

impl RowReducer {
    pub fn new(cols: usize) -> Self {
        RowReducer {
            cols,
            pivot_row: vec![None; cols],
            rows: Vec::new(),
            scratch: Scratch::new(cols),
        }
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn is_full(&self) -> bool {
        self.rows.len() == self.cols
    }

    pub fn pivot_columns(&self) -> Vec<usize> {
        let mut p: Vec<usize> = self.rows.iter().map(|r| r[0].0).collect();
        p.sort_unstable();
        p
    }

    /// Inserts a row; returns whether it increased the rank.
    pub fn insert<I: IntoIterator<Item = (usize, Scalar)>>(&mut self, row: I) -> bool {
        let mut s = core::mem::replace(&mut self.scratch, Scratch::new(0));
        for (c, v) in row {
            assert!(c < self.cols, "column {c} out of range");
            s.push(c, &v);
        }
        let new_pivot = loop {
            let Some(Reverse(c)) = s.heap.pop() else {
                break None;
            };
            if s.acc[c].is_zero() {
                continue;
            }
            match self.pivot_row[c] {
                Some(r) => {
                    let f = -core::mem::take(&mut s.acc[c]);
                    for (j, v) in &self.rows[r][1..] {
                        let t = &f * v;
                        s.push(*j, &t);
                    }
                }
                None => break Some(c),
            }
        };
        let inserted = match new_pivot {
            None => {
                s.clear();
                false
            }
            Some(c) => {
                let mut row = s.drain_sorted();
                let lead = row[0].1.inv();
                debug_assert_eq!(row[0].0, c);
                for e in row.iter_mut() {
                    e.1 = &e.1 * &lead;
                }
                self.pivot_row[c] = Some(self.rows.len());
                self.rows.push(row);
                true
            }
        };
        self.scratch = s;
        inserted
    }

    /// Remainder of `row` after eliminating every pivot column. The result is
    /// supported on free columns only, hence canonical for the row space.
    pub fn reduce<I: IntoIterator<Item = (usize, Scalar)>>(&self, row: I) -> Vec<(usize, Scalar)> {
        let mut s = Scratch::new(self.cols);
        for (c, v) in row {
            s.push(c, &v);
        }
        while let Some(Reverse(c)) = s.heap.pop() {
            if s.acc[c].is_zero() {
                continue;
            }
            if let Some(r) = self.pivot_row[c] {
                let f = -core::mem::take(&mut s.acc[c]);
                for (j, v) in &self.rows[r][1..] {
                    let t = &f * v;
                    s.push(*j, &t);
                }
            }
        }
        s.drain_sorted()
    }

    /// Fully reduced rows, keyed by pivot column in increasing order.
    pub fn rref(&self) -> Vec<(usize, Vec<(usize, Scalar)>)> {
        let mut done = RowReducer::new(self.cols);
        let mut pivots = self.pivot_columns();
        pivots.reverse();
        let mut out = Vec::with_capacity(pivots.len());
        for c in pivots {
            let row = &self.rows[self.pivot_row[c].unwrap_or_default()];
            let mut tail = done.reduce(row[1..].iter().cloned());
            tail.insert(0, (c, Scalar::ONE));
            done.pivot_row[c] = Some(done.rows.len());
            done.rows.push(tail.clone());
            out.push((c, tail));
        }
        out.reverse();
        out
    }

    /// Basis of the null space of the inserted rows.
    pub fn kernel_basis(&self) -> Vec<Vec<Scalar>> {
        let rref = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| self.pivot_row[*c].is_none()).collect();
        let mut basis: Vec<Vec<Scalar>> = free
            .iter()
            .map(|f| {
                let mut x = vec![Scalar::ZERO; self.cols];
                x[*f] = Scalar::ONE;
                x
            })
            .collect();
        let slot: Vec<Option<usize>> = {
            let mut s = vec![None; self.cols];
            for (k, f) in free.iter().enumerate() {
                s[*f] = Some(k);
            }
            s
        };
        for (c, row) in &rref {
            for (j, v) in &row[1..] {
                if let Some(k) = slot[*j] {
                    basis[k][*c] = -v;
                }
            }
        }
        basis
    }
}

/// Small dense matrix, used for per-level operators such as L0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![Scalar::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Scalar::ONE);
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Scalar>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Invalid("ragged matrix".into()));
        }
        Ok(DenseMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Scalar {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Scalar) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Scalar] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<Scalar>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn mul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        let idx = i * out.cols + j;
                        out.data[idx] += a * b;
                    }
                }
            }
        }
        out
    }

    /// `self - c * I`.
    pub fn shift(&self, c: &Scalar) -> DenseMatrix {
        let mut out = self.clone();
        for i in 0..self.rows.min(self.cols) {
            let v = out.get(i, i) - c;
            out.set(i, i, v);
        }
        out
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).clone());
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Scalar::is_zero)
    }

    pub fn apply(&self, x: &[Scalar]) -> Vec<Scalar> {
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Smallest `j` with `self^j = 0`, or `None` if the matrix is not nilpotent.
    pub fn nilpotency_index(&self) -> Option<usize> {
        assert_eq!(self.rows, self.cols);
        let mut p = DenseMatrix::identity(self.rows);
        for j in 0..=self.rows {
            if p.is_zero() {
                return Some(j);
            }
            p = p.mul(self);
        }
        None
    }
}
