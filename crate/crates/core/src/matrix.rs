//! Dense row-major matrices over a [`FieldCtx`].
//!
//! Matrices do not carry their field; every arithmetic operation takes the
//! field context explicitly.

use rand::Rng;

use crate::field::{FieldCtx, FieldElem};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<FieldElem>,
}

/// Result of exact row reduction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rref {
    pub matrix: Matrix,
    pub pivots: Vec<usize>,
}

impl Rref {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![FieldElem::ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = FieldElem::ONE;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<FieldElem>) -> Self {
        assert_eq!(rows * cols, data.len(), "data length does not match shape");
        Matrix { rows, cols, data }
    }

    /// Builds a matrix from small integers reduced into the prime subfield.
    pub fn from_ints(field: &FieldCtx, rows: usize, cols: usize, entries: &[i64]) -> Self {
        assert_eq!(rows * cols, entries.len());
        Matrix { rows, cols, data: entries.iter().map(|&e| field.from_int(e)).collect() }
    }

    /// The elementary matrix `E_ij` (zero-based indices).
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        m[(i, j)] = FieldElem::ONE;
        m
    }

    pub fn from_rows(cols: usize, rows: &[Vec<FieldElem>]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols);
            data.extend_from_slice(r);
        }
        Matrix { rows: rows.len(), cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[FieldElem] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [FieldElem] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<FieldElem> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[FieldElem] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [FieldElem] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn to_ints(&self) -> Vec<u32> {
        self.data.iter().map(|x| x.0 as u32).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn add(&self, f: &FieldCtx, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f.add(a, b)).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, f: &FieldCtx, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f.sub(a, b)).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, f: &FieldCtx, c: FieldElem) -> Matrix {
        let data = self.data.iter().map(|&a| f.mul(c, a)).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn neg(&self, f: &FieldCtx) -> Matrix {
        let data = self.data.iter().map(|&a| f.neg(a)).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn mul(&self, f: &FieldCtx, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "inner dimension mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d = f.add(*d, f.mul(a, b));
                }
            }
        }
        out
    }

    /// `self + c * I` for a square matrix.
    pub fn add_scalar(&self, f: &FieldCtx, c: FieldElem) -> Matrix {
        assert!(self.is_square());
        let mut out = self.clone();
        for i in 0..self.rows {
            out[(i, i)] = f.add(out[(i, i)], c);
        }
        out
    }

    pub fn pow(&self, f: &FieldCtx, mut e: u64) -> Matrix {
        assert!(self.is_square());
        let mut result = Matrix::identity(self.rows);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(f, &base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(f, &base);
            }
        }
        result
    }

    /// Applies a field map entrywise (e.g. Frobenius).
    pub fn map(&self, op: impl Fn(FieldElem) -> FieldElem) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| op(x)).collect() }
    }

    /// Reduced row-echelon form. Pivots are chosen as the first nonzero entry
    /// scanning columns left to right; no other pivoting.
    pub fn rref(&self, f: &FieldCtx) -> Rref {
        let mut m = self.clone();
        let pivots = rref_in_place(f, &mut m.data, m.rows, m.cols);
        Rref { matrix: m, pivots }
    }

    pub fn rank(&self, f: &FieldCtx) -> usize {
        let mut data = self.data.clone();
        rref_in_place(f, &mut data, self.rows, self.cols).len()
    }

    pub fn inverse(&self, f: &FieldCtx) -> Option<Matrix> {
        assert!(self.is_square());
        let n = self.rows;
        let mut aug = Matrix::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug[(i, j)] = self[(i, j)];
            }
            aug[(i, n + i)] = FieldElem::ONE;
        }
        let pivots = rref_in_place(f, &mut aug.data, n, 2 * n);
        if pivots.len() < n || pivots[n - 1] >= n {
            return None;
        }
        let mut inv = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                inv[(i, j)] = aug[(i, n + j)];
            }
        }
        Some(inv)
    }

    pub fn is_invertible(&self, f: &FieldCtx) -> bool {
        self.is_square() && self.rank(f) == self.rows
    }

    /// Basis of `{v : self · v = 0}`, one vector per free column.
    pub fn nullspace(&self, f: &FieldCtx) -> Vec<Vec<FieldElem>> {
        let rref = self.rref(f);
        let cols = self.cols;
        let free: Vec<usize> = (0..cols).filter(|c| !rref.pivots.contains(c)).collect();
        free.iter()
            .map(|&fc| {
                let mut v = vec![FieldElem::ZERO; cols];
                v[fc] = FieldElem::ONE;
                for (row, &pc) in rref.pivots.iter().enumerate() {
                    v[pc] = f.neg(rref.matrix[(row, fc)]);
                }
                v
            })
            .collect()
    }

    pub fn random(f: &FieldCtx, rows: usize, cols: usize, rng: &mut impl Rng) -> Matrix {
        let q = f.q();
        let data = (0..rows * cols).map(|_| FieldElem(rng.gen_range(0..q) as u16)).collect();
        Matrix { rows, cols, data }
    }

    pub fn random_invertible(f: &FieldCtx, n: usize, rng: &mut impl Rng) -> Matrix {
        loop {
            let m = Matrix::random(f, n, n, rng);
            if m.is_invertible(f) {
                return m;
            }
        }
    }

    pub fn random_strictly_upper(f: &FieldCtx, n: usize, rng: &mut impl Rng) -> Matrix {
        let q = f.q();
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i + 1..n {
                m[(i, j)] = FieldElem(rng.gen_range(0..q) as u16);
            }
        }
        m
    }
}

/// Row-reduces a row-major `rows × cols` buffer in place, returning pivot columns.
pub fn rref_in_place(f: &FieldCtx, data: &mut [FieldElem], rows: usize, cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    rref_in_place_with(f, data, rows, cols, |c| pivots.push(c));
    pivots
}

/// As [`rref_in_place`], reporting each pivot column to `on_pivot`; returns the rank.
pub fn rref_in_place_with(
    f: &FieldCtx,
    data: &mut [FieldElem],
    rows: usize,
    cols: usize,
    mut on_pivot: impl FnMut(usize),
) -> usize {
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(src) = (r..rows).find(|&i| !data[i * cols + c].is_zero()) else {
            continue;
        };
        if src != r {
            for j in 0..cols {
                data.swap(src * cols + j, r * cols + j);
            }
        }
        let inv = f.inv(data[r * cols + c]).expect("pivot is nonzero");
        if inv != FieldElem::ONE {
            for j in c..cols {
                data[r * cols + j] = f.mul(inv, data[r * cols + j]);
            }
        }
        for i in 0..rows {
            if i == r {
                continue;
            }
            let factor = data[i * cols + c];
            if factor.is_zero() {
                continue;
            }
            let nf = f.neg(factor);
            for j in c..cols {
                let v = data[r * cols + j];
                if !v.is_zero() {
                    data[i * cols + j] = f.add(data[i * cols + j], f.mul(nf, v));
                }
            }
        }
        on_pivot(c);
        r += 1;
    }
    r
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = FieldElem;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &FieldElem {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut FieldElem {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}
