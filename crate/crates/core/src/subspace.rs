//! Canonical subspaces (RREF bases) and their packed hash keys.

use serde::{Deserialize, Serialize};

use crate::field::{FieldCtx, FieldElem};
use crate::matrix::{rref_in_place, Matrix};

/// A linear subspace of `F^m`, stored as its unique reduced row-echelon basis.
///
/// Two `Subspace` values compare equal iff they represent the same subspace.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subspace {
    ambient_dim: usize,
    basis: Matrix,
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn zero(ambient_dim: usize) -> Self {
        Subspace { ambient_dim, basis: Matrix::zeros(0, ambient_dim), pivots: Vec::new() }
    }

    /// Span of the given vectors; dependent or repeated vectors collapse.
    pub fn from_vectors(f: &FieldCtx, ambient_dim: usize, vectors: &[Vec<FieldElem>]) -> Self {
        let mut data = Vec::with_capacity(vectors.len() * ambient_dim);
        for v in vectors {
            assert_eq!(v.len(), ambient_dim, "vector length does not match ambient dimension");
            data.extend_from_slice(v);
        }
        Self::from_row_buffer(f, ambient_dim, data)
    }

    /// Row space of `m`.
    pub fn from_matrix(f: &FieldCtx, m: &Matrix) -> Self {
        Self::from_row_buffer(f, m.cols(), m.data().to_vec())
    }

    fn from_row_buffer(f: &FieldCtx, m: usize, mut data: Vec<FieldElem>) -> Self {
        let rows = data.len().checked_div(m).unwrap_or(0);
        let pivots = rref_in_place(f, &mut data, rows, m);
        data.truncate(pivots.len() * m);
        Subspace { ambient_dim: m, basis: Matrix::from_vec(pivots.len(), m, data), pivots }
    }

    /// Wraps a matrix already known to be in RREF with no zero rows.
    pub fn from_rref_unchecked(basis: Matrix) -> Self {
        let pivots = (0..basis.rows())
            .map(|i| basis.row(i).iter().position(|x| !x.is_zero()).expect("zero row in RREF"))
            .collect();
        Subspace { ambient_dim: basis.cols(), basis, pivots }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.pivots.len()
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn basis_vectors(&self) -> impl Iterator<Item = &[FieldElem]> {
        (0..self.dim()).map(move |i| self.basis.row(i))
    }

    /// Membership test by reduction against the pivots.
    pub fn contains(&self, f: &FieldCtx, v: &[FieldElem]) -> bool {
        assert_eq!(v.len(), self.ambient_dim);
        let mut w = v.to_vec();
        for (i, &c) in self.pivots.iter().enumerate() {
            let factor = w[c];
            if factor.is_zero() {
                continue;
            }
            let nf = f.neg(factor);
            for (wj, &bj) in w.iter_mut().zip(self.basis.row(i)) {
                *wj = f.add(*wj, f.mul(nf, bj));
            }
        }
        w.iter().all(|x| x.is_zero())
    }

    pub fn contains_subspace(&self, f: &FieldCtx, other: &Subspace) -> bool {
        other.basis_vectors().all(|v| self.contains(f, v))
    }

    /// Smallest subspace containing both.
    pub fn join(&self, f: &FieldCtx, other: &Subspace) -> Subspace {
        assert_eq!(self.ambient_dim, other.ambient_dim);
        let mut data = self.basis.data().to_vec();
        data.extend_from_slice(other.basis.data());
        Self::from_row_buffer(f, self.ambient_dim, data)
    }

    /// All `q^dim` vectors in the subspace, in coefficient-index order.
    pub fn points(&self, f: &FieldCtx) -> Vec<Vec<FieldElem>> {
        let q = f.q() as usize;
        let r = self.dim();
        let total = q.pow(r as u32);
        let mut out = Vec::with_capacity(total);
        for idx in 0..total {
            let mut v = vec![FieldElem::ZERO; self.ambient_dim];
            let mut rest = idx;
            for i in 0..r {
                let c = FieldElem((rest % q) as u16);
                rest /= q;
                if c.is_zero() {
                    continue;
                }
                for (a, &b) in v.iter_mut().zip(self.basis.row(i)) {
                    *a = f.add(*a, f.mul(c, b));
                }
            }
            out.push(v);
        }
        out
    }

    /// Entries of the basis as integers, one vector per basis row.
    pub fn to_int_rows(&self) -> Vec<Vec<u32>> {
        self.basis_vectors().map(|r| r.iter().map(|x| x.0 as u32).collect()).collect()
    }

    pub fn from_int_rows(f: &FieldCtx, ambient_dim: usize, rows: &[Vec<u32>]) -> Option<Self> {
        let mut vectors = Vec::with_capacity(rows.len());
        for r in rows {
            if r.len() != ambient_dim {
                return None;
            }
            vectors.push(r.iter().map(|&x| f.elem(x)).collect::<Option<Vec<_>>>()?);
        }
        Some(Self::from_vectors(f, ambient_dim, &vectors))
    }
}

/// Fixed-width packed encoding of an RREF basis, MSB first.
///
/// Word-wise comparison of two keys of the same codec equals lexicographic
/// comparison of the row-major entry sequences.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PackedKey(pub Box<[u64]>);

/// Packs and unpacks `rows × cols` RREF bases for a fixed field size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KeyCodec {
    pub rows: usize,
    pub cols: usize,
    pub bits: u32,
}

impl KeyCodec {
    pub fn new(rows: usize, cols: usize, q: u32) -> Self {
        let bits = 32 - (q - 1).max(1).leading_zeros();
        KeyCodec { rows, cols, bits }
    }

    fn words(&self) -> usize {
        (self.rows * self.cols * self.bits as usize).div_ceil(64).max(1)
    }

    pub fn pack_entries(&self, entries: &[FieldElem]) -> PackedKey {
        debug_assert_eq!(entries.len(), self.rows * self.cols);
        let mut words = vec![0u64; self.words()];
        let b = self.bits as usize;
        let mut bitpos = 0usize;
        for &e in entries {
            let v = e.0 as u64;
            // MSB-first placement of a b-bit field starting at bitpos.
            let w = bitpos / 64;
            let off = bitpos % 64;
            if off + b <= 64 {
                words[w] |= v << (64 - off - b);
            } else {
                let hi = 64 - off;
                let lo = b - hi;
                words[w] |= v >> lo;
                words[w + 1] |= v << (64 - lo);
            }
            bitpos += b;
        }
        PackedKey(words.into_boxed_slice())
    }

    pub fn unpack_entries(&self, key: &PackedKey) -> Vec<FieldElem> {
        let mut out = vec![FieldElem::ZERO; self.rows * self.cols];
        self.unpack_into(key, &mut out);
        out
    }

    /// Unpacks into a caller-provided buffer of length `rows * cols`.
    pub fn unpack_into(&self, key: &PackedKey, out: &mut [FieldElem]) {
        let b = self.bits as usize;
        let mask = (1u64 << b) - 1;
        let mut bitpos = 0usize;
        for slot in out.iter_mut().take(self.rows * self.cols) {
            let w = bitpos / 64;
            let off = bitpos % 64;
            let v = if off + b <= 64 {
                (key.0[w] >> (64 - off - b)) & mask
            } else {
                let hi = 64 - off;
                let lo = b - hi;
                ((key.0[w] << lo) | (key.0[w + 1] >> (64 - lo))) & mask
            };
            *slot = FieldElem(v as u16);
            bitpos += b;
        }
    }

    pub fn pack(&self, s: &Subspace) -> PackedKey {
        assert_eq!((s.dim(), s.ambient_dim()), (self.rows, self.cols), "codec shape mismatch");
        self.pack_entries(s.basis().data())
    }

    pub fn unpack(&self, key: &PackedKey) -> Subspace {
        let entries = self.unpack_entries(key);
        Subspace::from_rref_unchecked(Matrix::from_vec(self.rows, self.cols, entries))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn f5() -> FieldCtx {
        FieldCtx::prime(5).unwrap()
    }

    fn ints(f: &FieldCtx, v: &[i64]) -> Vec<FieldElem> {
        v.iter().map(|&x| f.from_int(x)).collect()
    }

    #[test]
    fn span_collapses_dependent_vectors() {
        let f = f5();
        let s = Subspace::from_vectors(&f, 3, &[ints(&f, &[1, 0, 0]), ints(&f, &[1, 1, 0])]);
        assert_eq!(s.to_int_rows(), vec![vec![1, 0, 0], vec![0, 1, 0]]);
        let v = ints(&f, &[0, 2, 3]);
        let v2 = ints(&f, &[0, 4, 6]);
        let s = Subspace::from_vectors(&f, 3, &[v, v2]);
        assert_eq!(s.dim(), 1);
        assert_eq!(s.to_int_rows(), vec![vec![0, 1, 4]]);
        assert_eq!(Subspace::from_vectors(&f, 4, &[]), Subspace::zero(4));
    }

    #[test]
    fn rank_matches_matrix_rank() {
        let f = f5();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let m = Matrix::random(&f, 3, 9, &mut rng);
            let vectors: Vec<_> = (0..3).map(|i| m.row(i).to_vec()).collect();
            assert_eq!(Subspace::from_vectors(&f, 9, &vectors).dim(), m.rank(&f));
        }
    }

    #[test]
    fn join_and_containment() {
        let f = f5();
        let a = Subspace::from_vectors(&f, 3, &[ints(&f, &[1, 2, 0])]);
        let b = Subspace::from_vectors(&f, 3, &[ints(&f, &[0, 0, 1])]);
        let j = a.join(&f, &b);
        assert_eq!(j.dim(), 2);
        assert!(j.contains_subspace(&f, &a) && j.contains_subspace(&f, &b));
        assert!(!j.contains(&f, &ints(&f, &[0, 1, 0])));
        assert_eq!(j.points(&f).len(), 25);
    }

    #[test]
    fn packed_order_is_lexicographic() {
        let codec = KeyCodec::new(1, 30, 5); // 3 bits each, crosses word boundaries
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let a: Vec<FieldElem> = (0..30).map(|_| FieldElem(rng.gen_range(0..5))).collect();
            let b: Vec<FieldElem> = (0..30).map(|_| FieldElem(rng.gen_range(0..5))).collect();
            let (ka, kb) = (codec.pack_entries(&a), codec.pack_entries(&b));
            assert_eq!(ka.cmp(&kb), a.cmp(&b));
            assert_eq!(codec.unpack_entries(&ka), a);
        }
    }

    proptest! {
        /// Any invertible change of basis gives the identical canonical form.
        #[test]
        fn rref_is_basis_independent(seed in any::<u64>(), r in 1usize..4) {
            let f = FieldCtx::new(5, 2).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let gens = Matrix::random(&f, r, 7, &mut rng);
            let change = Matrix::random_invertible(&f, r, &mut rng);
            let other = change.mul(&f, &gens);
            prop_assert_eq!(Subspace::from_matrix(&f, &gens), Subspace::from_matrix(&f, &other));
        }

        #[test]
        fn pack_round_trip(seed in any::<u64>(), r in 1usize..4) {
            let f = FieldCtx::new(7, 2).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = Subspace::from_matrix(&f, &Matrix::random(&f, r, 9, &mut rng));
            let codec = KeyCodec::new(s.dim(), 9, f.q());
            prop_assert_eq!(codec.unpack(&codec.pack(&s)), s);
        }
    }
}
