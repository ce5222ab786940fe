//! Matrix presentations of `gl_n`, `sl_n`, `so_n` and the strictly upper
//! triangular nilradical `u_n`, with the bracket, the `p`-power map and the
//! elementarity predicate.
//!
//! Coordinate orders are fixed because every canonical form, orbit key and
//! output file depends on them:
//!
//! * `gl`: `E_ij` row-major.
//! * `sl`: `E_ij` for `i != j` row-major, then `E_ii - E_{i+1,i+1}` for increasing `i`.
//! * `so`: `E_ij - E_ji` for `i < j`, lexicographic in `(i, j)`.
//! * `u`:  `E_ij` for `i < j`, by superdiagonal `j - i` and then by row.
//!
//! For pairwise-commuting matrices `X_1, ..., X_r` the `p`-th power of a linear
//! combination expands by the binomial theorem into terms `c X_1^{a_1} ... X_r^{a_r}`
//! with `a_1 + ... + a_r = p`; all mixed terms carry a multinomial coefficient
//! divisible by `p`, so `(Σ c_i X_i)^p = Σ c_i^p X_i^p`. Checking `X^p = 0` on a
//! commuting basis therefore decides the `p`-power condition on the whole span.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{FieldCtx, FieldElem};
use crate::matrix::Matrix;
use crate::subspace::Subspace;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LieError {
    #[error("condition (p >= n) violated: p = {p} < n = {n}")]
    PrimeTooSmall { p: u32, n: usize },
    #[error("so_n requires an odd characteristic, got p = {0}")]
    EvenCharacteristic(u32),
    #[error("matrix size {n} is too small for family {family}")]
    SizeTooSmall { family: Family, n: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("subspace is not elementary")]
    NotElementary,
    #[error("unknown algebra family '{0}'")]
    UnknownFamily(String),
    #[error("constructed basis fails validation: {0}")]
    InvalidBasis(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Gl,
    Sl,
    So,
    /// Strictly upper triangular matrices (nilradical of the standard Borel).
    U,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Gl => "gl",
            Family::Sl => "sl",
            Family::So => "so",
            Family::U => "u",
        }
    }

    /// True for the families whose matrices are handled by `GL_n`-seeded enumeration.
    pub fn is_gl_type(self) -> bool {
        matches!(self, Family::Gl | Family::Sl | Family::U)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = LieError;
    fn from_str(s: &str) -> Result<Self, LieError> {
        match s.to_ascii_lowercase().as_str() {
            "gl" => Ok(Family::Gl),
            "sl" => Ok(Family::Sl),
            "so" => Ok(Family::So),
            "u" | "b" | "nil" => Ok(Family::U),
            other => Err(LieError::UnknownFamily(other.to_string())),
        }
    }
}

#[derive(Debug, Clone)]
enum CoordMap {
    /// Coordinate k ↔ matrix position (row, col), plain entry.
    Positions(Vec<(usize, usize)>),
    /// Skew pairs: coordinate k ↔ (i, j) with value at (i, j) and its negative at (j, i).
    Skew(Vec<(usize, usize)>),
    /// Off-diagonal positions followed by n-1 diagonal differences.
    Traceless(Vec<(usize, usize)>),
}

/// A restricted Lie algebra of `n × n` matrices with a fixed `F_p`-rational basis.
#[derive(Debug, Clone)]
pub struct AmbientAlgebra {
    family: Family,
    n: usize,
    field: FieldCtx,
    basis: Vec<Matrix>,
    coxeter_h: usize,
    coords: CoordMap,
}

impl PartialEq for AmbientAlgebra {
    fn eq(&self, other: &Self) -> bool {
        self.family == other.family && self.n == other.n && self.field == other.field
    }
}

impl Eq for AmbientAlgebra {}

impl AmbientAlgebra {
    pub fn new(family: Family, n: usize, field: &FieldCtx) -> Result<Self, LieError> {
        let p = field.p();
        let min_n = if family == Family::Gl { 1 } else { 2 };
        if n < min_n {
            return Err(LieError::SizeTooSmall { family, n });
        }
        match family {
            Family::So => {
                if p == 2 {
                    return Err(LieError::EvenCharacteristic(p));
                }
            }
            _ => {
                if (p as usize) < n {
                    return Err(LieError::PrimeTooSmall { p, n });
                }
            }
        }
        let coords = match family {
            Family::Gl => {
                CoordMap::Positions((0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect())
            }
            Family::U => {
                let mut pos = Vec::new();
                for k in 1..n {
                    for i in 0..n - k {
                        pos.push((i, i + k));
                    }
                }
                CoordMap::Positions(pos)
            }
            Family::So => {
                CoordMap::Skew((0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect())
            }
            Family::Sl => CoordMap::Traceless(
                (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).collect(),
            ),
        };
        let coxeter_h = match family {
            Family::So if n % 2 == 1 => (n - 1).max(2),
            Family::So => n.saturating_sub(2).max(2),
            _ => n,
        };
        let mut alg = AmbientAlgebra { family, n, field: field.clone(), basis: Vec::new(), coxeter_h, coords };
        let dim = alg.dim();
        alg.basis = (0..dim)
            .map(|k| {
                let mut e = vec![FieldElem::ZERO; dim];
                e[k] = FieldElem::ONE;
                alg.to_matrix(&e)
            })
            .collect();
        alg.validate()?;
        Ok(alg)
    }

    fn validate(&self) -> Result<(), LieError> {
        let f = &self.field;
        let flat: Vec<Vec<FieldElem>> = self.basis.iter().map(|m| m.data().to_vec()).collect();
        if Subspace::from_vectors(f, self.n * self.n, &flat).dim() != self.dim() {
            return Err(LieError::InvalidBasis("basis matrices are dependent".into()));
        }
        for (i, a) in self.basis.iter().enumerate() {
            if a.data().iter().any(|&x| !f.in_prime_subfield(x)) {
                return Err(LieError::InvalidBasis("basis entry outside F_p".into()));
            }
            for b in &self.basis[i + 1..] {
                if self.coords_of(&bracket(f, a, b)).is_none() {
                    return Err(LieError::InvalidBasis("basis not closed under bracket".into()));
                }
            }
        }
        Ok(())
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn field(&self) -> &FieldCtx {
        &self.field
    }

    pub fn basis(&self) -> &[Matrix] {
        &self.basis
    }

    pub fn coxeter_h(&self) -> usize {
        self.coxeter_h
    }

    pub fn dim(&self) -> usize {
        match &self.coords {
            CoordMap::Positions(p) | CoordMap::Skew(p) => p.len(),
            CoordMap::Traceless(p) => p.len() + self.n - 1,
        }
    }

    /// The matrix with the given coordinates.
    pub fn to_matrix(&self, coords: &[FieldElem]) -> Matrix {
        let mut m = Matrix::zeros(self.n, self.n);
        self.write_matrix(coords, &mut m);
        m
    }

    /// Writes the matrix with the given coordinates into a zeroed `n × n` buffer.
    pub(crate) fn write_matrix(&self, coords: &[FieldElem], m: &mut Matrix) {
        assert_eq!(coords.len(), self.dim(), "coordinate vector has wrong length");
        let f = &self.field;
        match &self.coords {
            CoordMap::Positions(pos) => {
                for (&(i, j), &c) in pos.iter().zip(coords) {
                    m[(i, j)] = c;
                }
            }
            CoordMap::Skew(pos) => {
                for (&(i, j), &c) in pos.iter().zip(coords) {
                    m[(i, j)] = c;
                    m[(j, i)] = f.neg(c);
                }
            }
            CoordMap::Traceless(pos) => {
                for (&(i, j), &c) in pos.iter().zip(coords) {
                    m[(i, j)] = c;
                }
                let h = &coords[pos.len()..];
                for k in 0..self.n - 1 {
                    m[(k, k)] = f.add(m[(k, k)], h[k]);
                    m[(k + 1, k + 1)] = f.sub(m[(k + 1, k + 1)], h[k]);
                }
            }
        }
    }

    /// Coordinates of `m`, or `None` if `m` is not in the algebra.
    pub fn coords_of(&self, m: &Matrix) -> Option<Vec<FieldElem>> {
        let n = self.n;
        if m.rows() != n || m.cols() != n {
            return None;
        }
        let f = &self.field;
        match &self.coords {
            CoordMap::Positions(pos) => {
                let mut covered = vec![false; n * n];
                for &(i, j) in pos {
                    covered[i * n + j] = true;
                }
                if (0..n * n).any(|k| !covered[k] && !m.data()[k].is_zero()) {
                    return None;
                }
                Some(pos.iter().map(|&(i, j)| m[(i, j)]).collect())
            }
            CoordMap::Skew(pos) => {
                for i in 0..n {
                    if !m[(i, i)].is_zero() {
                        return None;
                    }
                    for j in i + 1..n {
                        if f.add(m[(i, j)], m[(j, i)]) != FieldElem::ZERO {
                            return None;
                        }
                    }
                }
                Some(pos.iter().map(|&(i, j)| m[(i, j)]).collect())
            }
            CoordMap::Traceless(pos) => {
                let mut out: Vec<FieldElem> = pos.iter().map(|&(i, j)| m[(i, j)]).collect();
                let mut prefix = FieldElem::ZERO;
                for k in 0..n {
                    prefix = f.add(prefix, m[(k, k)]);
                    if k < n - 1 {
                        out.push(prefix);
                    }
                }
                prefix.is_zero().then_some(out)
            }
        }
    }

    /// Basis matrices of a subspace given in algebra coordinates.
    pub fn subspace_matrices(&self, s: &Subspace) -> Vec<Matrix> {
        s.basis_vectors().map(|v| self.to_matrix(v)).collect()
    }

    /// Canonical subspace spanned by the given algebra elements.
    pub fn span_of(&self, elements: &[Matrix]) -> Result<Subspace, LieError> {
        let coords = elements
            .iter()
            .map(|m| {
                self.coords_of(m)
                    .ok_or_else(|| LieError::DimensionMismatch("element outside the algebra".into()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Subspace::from_vectors(&self.field, self.dim(), &coords))
    }

    pub fn descriptor(&self) -> String {
        format!("{}_{}(F_{})", self.family, self.n, self.field.q())
    }
}

/// `[X, Y] = XY - YX`.
pub fn bracket(f: &FieldCtx, x: &Matrix, y: &Matrix) -> Matrix {
    x.mul(f, y).sub(f, &y.mul(f, x))
}

/// Checked bracket.
pub fn try_bracket(f: &FieldCtx, x: &Matrix, y: &Matrix) -> Result<Matrix, LieError> {
    if !x.is_square() || (x.rows(), x.cols()) != (y.rows(), y.cols()) {
        return Err(LieError::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            x.rows(),
            x.cols(),
            y.rows(),
            y.cols()
        )));
    }
    Ok(bracket(f, x, y))
}

pub fn commute(f: &FieldCtx, x: &Matrix, y: &Matrix) -> bool {
    x.mul(f, y) == y.mul(f, x)
}

/// Least `k` with `X^k = 0`, or `None` if `X` is not nilpotent.
pub fn nilpotency_index(f: &FieldCtx, x: &Matrix) -> Option<usize> {
    assert!(x.is_square());
    let n = x.rows();
    let mut power = x.clone();
    for k in 1..=n.max(1) {
        if power.is_zero() {
            return Some(k);
        }
        power = power.mul(f, x);
    }
    None
}

pub fn is_nilpotent(f: &FieldCtx, x: &Matrix) -> bool {
    nilpotency_index(f, x).is_some()
}

/// `X^p = 0` tested literally.
pub fn p_power_vanishes(f: &FieldCtx, x: &Matrix) -> bool {
    x.pow(f, f.p() as u64).is_zero()
}

/// True iff the basis of `space` pairwise commutes and each basis element has `X^p = 0`.
pub fn is_elementary(alg: &AmbientAlgebra, space: &Subspace) -> bool {
    if space.ambient_dim() != alg.dim() {
        return false;
    }
    let f = alg.field();
    let mats = alg.subspace_matrices(space);
    for (i, a) in mats.iter().enumerate() {
        if !p_power_vanishes(f, a) {
            return false;
        }
        if mats[i + 1..].iter().any(|b| !commute(f, a, b)) {
            return false;
        }
    }
    true
}

/// An integer partition, parts in non-increasing order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Partition(pub Vec<usize>);

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|p| p.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Jordan type of a nilpotent matrix from the rank sequence of its powers.
pub fn jordan_type(f: &FieldCtx, x: &Matrix) -> Option<Partition> {
    let n = x.rows();
    let mut ranks = vec![n];
    let mut power = x.clone();
    loop {
        let r = power.rank(f);
        ranks.push(r);
        if r == 0 {
            break;
        }
        if ranks.len() > n + 1 {
            return None;
        }
        power = power.mul(f, x);
    }
    // at_least[k] = number of blocks of size >= k+1
    let at_least: Vec<usize> = ranks.windows(2).map(|w| w[0] - w[1]).collect();
    let mut parts = Vec::new();
    for k in (0..at_least.len()).rev() {
        let exact = at_least[k] - at_least.get(k + 1).copied().unwrap_or(0);
        parts.extend(std::iter::repeat_n(k + 1, exact));
    }
    Some(Partition(parts))
}

/// A validated elementary subalgebra, stored canonically.
#[derive(Debug, Clone)]
pub struct ElemSubalgebra {
    algebra: Arc<AmbientAlgebra>,
    space: Subspace,
}

impl PartialEq for ElemSubalgebra {
    fn eq(&self, other: &Self) -> bool {
        *self.algebra == *other.algebra && self.space == other.space
    }
}

impl Eq for ElemSubalgebra {}

impl ElemSubalgebra {
    pub fn new(algebra: Arc<AmbientAlgebra>, space: Subspace) -> Result<Self, LieError> {
        if space.ambient_dim() != algebra.dim() {
            return Err(LieError::DimensionMismatch(format!(
                "subspace of F^{} in algebra of dimension {}",
                space.ambient_dim(),
                algebra.dim()
            )));
        }
        if !is_elementary(&algebra, &space) {
            return Err(LieError::NotElementary);
        }
        Ok(ElemSubalgebra { algebra, space })
    }

    /// Span of the given matrices, validated.
    pub fn from_matrices(algebra: Arc<AmbientAlgebra>, elements: &[Matrix]) -> Result<Self, LieError> {
        let space = algebra.span_of(elements)?;
        Self::new(algebra, space)
    }

    pub(crate) fn new_unchecked(algebra: Arc<AmbientAlgebra>, space: Subspace) -> Self {
        ElemSubalgebra { algebra, space }
    }

    pub fn zero(algebra: Arc<AmbientAlgebra>) -> Self {
        let dim = algebra.dim();
        ElemSubalgebra { algebra, space: Subspace::zero(dim) }
    }

    pub fn algebra(&self) -> &Arc<AmbientAlgebra> {
        &self.algebra
    }

    pub fn space(&self) -> &Subspace {
        &self.space
    }

    pub fn rank(&self) -> usize {
        self.space.dim()
    }

    pub fn basis_matrices(&self) -> Vec<Matrix> {
        self.algebra.subspace_matrices(&self.space)
    }

    /// Every element of the subalgebra over its field, as matrices.
    pub fn point_matrices(&self) -> Vec<Matrix> {
        let f = self.algebra.field();
        self.space.points(f).iter().map(|v| self.algebra.to_matrix(v)).collect()
    }

    /// Multiset of Jordan types over all `q^r` points.
    pub fn jordan_profile(&self) -> BTreeMap<Partition, u64> {
        let f = self.algebra.field();
        let mut profile = BTreeMap::new();
        for m in self.point_matrices() {
            let t = jordan_type(f, &m).expect("points of an elementary subalgebra are nilpotent");
            *profile.entry(t).or_insert(0) += 1;
        }
        profile
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn alg(family: Family, n: usize, p: u32, d: u32) -> Arc<AmbientAlgebra> {
        Arc::new(AmbientAlgebra::new(family, n, &FieldCtx::new(p, d).unwrap()).unwrap())
    }

    fn e(n: usize, i: usize, j: usize) -> Matrix {
        Matrix::unit(n, i - 1, j - 1)
    }

    #[test]
    fn dimensions() {
        assert_eq!(alg(Family::Gl, 3, 5, 1).dim(), 9);
        assert_eq!(alg(Family::So, 3, 5, 1).dim(), 3);
        assert_eq!(alg(Family::Sl, 4, 5, 1).dim(), 15);
        assert_eq!(alg(Family::U, 4, 5, 1).dim(), 6);
        assert_eq!(alg(Family::So, 5, 7, 1).dim(), 10);
    }

    #[test]
    fn rejects_small_primes() {
        let f = FieldCtx::prime(5).unwrap();
        assert_eq!(
            AmbientAlgebra::new(Family::Gl, 7, &f).unwrap_err(),
            LieError::PrimeTooSmall { p: 5, n: 7 }
        );
        assert!(AmbientAlgebra::new(Family::So, 7, &f).is_ok());
        let f2 = FieldCtx::prime(2).unwrap();
        assert_eq!(AmbientAlgebra::new(Family::So, 2, &f2).unwrap_err(), LieError::EvenCharacteristic(2));
        assert_eq!("b".parse::<Family>().unwrap(), Family::U);
    }

    #[test]
    fn u_basis_order_is_superdiagonal_then_row() {
        let a = alg(Family::U, 3, 5, 1);
        assert_eq!(a.basis()[0], e(3, 1, 2));
        assert_eq!(a.basis()[1], e(3, 2, 3));
        assert_eq!(a.basis()[2], e(3, 1, 3));
    }

    #[test]
    fn coordinate_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for (fam, n) in [(Family::Gl, 3), (Family::Sl, 4), (Family::So, 4), (Family::U, 4)] {
            let a = alg(fam, n, 7, 2);
            let f = a.field().clone();
            for _ in 0..20 {
                let c: Vec<FieldElem> = (0..a.dim()).map(|_| FieldElem(rng.gen_range(0..f.q()) as u16)).collect();
                let m = a.to_matrix(&c);
                assert_eq!(a.coords_of(&m), Some(c));
            }
        }
        let sl = alg(Family::Sl, 3, 5, 1);
        assert!(sl.coords_of(&Matrix::identity(3)).is_none());
    }

    #[test]
    fn bracket_examples() {
        let f = FieldCtx::prime(5).unwrap();
        assert_eq!(bracket(&f, &e(3, 1, 2), &e(3, 2, 3)), e(3, 1, 3));
        let x = e(3, 1, 2).add(&f, &e(3, 3, 1));
        assert!(bracket(&f, &x, &x).is_zero());
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = Matrix::random(&f, 3, 3, &mut rng);
        let b = Matrix::random(&f, 3, 3, &mut rng);
        assert_eq!(bracket(&f, &a, &b), bracket(&f, &b, &a).neg(&f));
        assert!(try_bracket(&f, &a, &Matrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn jacobi_on_basis_triples() {
        for (fam, n) in [(Family::Gl, 3), (Family::Sl, 3), (Family::So, 4), (Family::U, 4)] {
            let a = alg(fam, n, 5, 1);
            let f = a.field();
            let b = a.basis();
            for x in b {
                for y in b {
                    for z in b.iter().take(6) {
                        let t1 = bracket(f, x, &bracket(f, y, z));
                        let t2 = bracket(f, y, &bracket(f, z, x));
                        let t3 = bracket(f, z, &bracket(f, x, y));
                        assert!(t1.add(f, &t2).add(f, &t3).is_zero());
                    }
                }
            }
        }
    }

    #[test]
    fn nilpotency() {
        let f = FieldCtx::prime(5).unwrap();
        let j = e(4, 1, 2).add(&f, &e(4, 2, 3)).add(&f, &e(4, 3, 4));
        assert_eq!(nilpotency_index(&f, &j), Some(4));
        assert_eq!(nilpotency_index(&f, &Matrix::identity(4)), None);
        let f7 = FieldCtx::prime(7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..10 {
            assert!(is_nilpotent(&f7, &Matrix::random_strictly_upper(&f7, 5, &mut rng)));
        }
    }

    #[test]
    fn elementarity_examples() {
        let a = alg(Family::Gl, 3, 5, 1);
        let f = a.field().clone();
        let good = a.span_of(&[e(3, 1, 3), e(3, 1, 2).add(&f, &e(3, 2, 3))]).unwrap();
        assert!(is_elementary(&a, &good));
        let bad = a.span_of(&[e(3, 1, 2), e(3, 2, 3)]).unwrap();
        assert!(!is_elementary(&a, &bad));
        let diag = a.span_of(&[e(3, 1, 1)]).unwrap();
        assert!(!is_elementary(&a, &diag));
    }

    /// Basis-pair checks agree with checking every pair of points on small cases.
    #[test]
    fn basis_check_matches_exhaustive_check() {
        let a = alg(Family::Gl, 3, 5, 1);
        let f = a.field().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut seen_true = 0;
        for _ in 0..60 {
            let x = Matrix::random_strictly_upper(&f, 3, &mut rng);
            let y = if rng.gen_bool(0.5) {
                x.mul(&f, &x).add(&f, &x.scale(&f, FieldElem(2)))
            } else {
                Matrix::random_strictly_upper(&f, 3, &mut rng)
            };
            let s = a.span_of(&[x, y]).unwrap();
            let pts: Vec<Matrix> = s.points(&f).iter().map(|v| a.to_matrix(v)).collect();
            let exhaustive = pts.iter().all(|m| p_power_vanishes(&f, m))
                && pts.iter().all(|m| pts.iter().all(|n| commute(&f, m, n)));
            assert_eq!(is_elementary(&a, &s), exhaustive);
            seen_true += exhaustive as usize;
        }
        assert!(seen_true > 0);
    }

    #[test]
    fn so3_nilpotent_cone_has_q_squared_points() {
        let a = alg(Family::So, 3, 5, 1);
        let f = a.field().clone();
        let mut nilpotent = 0;
        let mut quadric = 0;
        for x in f.elements() {
            for y in f.elements() {
                for z in f.elements() {
                    // so coordinates: (1,2)=x, (1,3)=y, (2,3)=z
                    let m = a.to_matrix(&[x, y, z]);
                    let nil = is_nilpotent(&f, &m);
                    let sum = f.add(f.add(f.mul(x, x), f.mul(y, y)), f.mul(z, z));
                    assert_eq!(nil, sum.is_zero());
                    nilpotent += nil as usize;
                    quadric += sum.is_zero() as usize;
                }
            }
        }
        assert_eq!(nilpotent, 25);
        assert_eq!(quadric, 25);
    }

    #[test]
    fn jordan_types() {
        let f = FieldCtx::prime(5).unwrap();
        let j = e(4, 1, 2).add(&f, &e(4, 2, 3));
        assert_eq!(jordan_type(&f, &j), Some(Partition(vec![3, 1])));
        assert_eq!(jordan_type(&f, &Matrix::zeros(3, 3)), Some(Partition(vec![1, 1, 1])));
        assert_eq!(jordan_type(&f, &Matrix::identity(2)), None);
    }

    #[test]
    fn jordan_profiles() {
        let a = alg(Family::Gl, 3, 5, 1);
        let f = a.field().clone();
        let zero = ElemSubalgebra::zero(a.clone());
        assert_eq!(zero.jordan_profile().into_iter().collect::<Vec<_>>(), vec![(Partition(vec![1, 1, 1]), 1)]);
        let j = e(3, 1, 2).add(&f, &e(3, 2, 3));
        let reg = ElemSubalgebra::from_matrices(a.clone(), &[j.clone()]).unwrap();
        let prof = reg.jordan_profile();
        // span{J} has q = 5 points
        assert_eq!(prof[&Partition(vec![3])], 4);
        assert_eq!(prof[&Partition(vec![1, 1, 1])], 1);
        let two = ElemSubalgebra::from_matrices(a.clone(), &[j.clone(), j.mul(&f, &j)]).unwrap();
        let prof = two.jordan_profile();
        assert_eq!(prof[&Partition(vec![3])], 20);
        assert_eq!(prof[&Partition(vec![2, 1])], 4);

        let col = ElemSubalgebra::from_matrices(a.clone(), &[e(3, 1, 3), e(3, 1, 2)]).unwrap();
        let row = ElemSubalgebra::from_matrices(a.clone(), &[e(3, 1, 3), e(3, 2, 3)]).unwrap();
        let big = ElemSubalgebra::from_matrices(a, &[e(3, 1, 3), j]).unwrap();
        assert_eq!(col.jordan_profile(), row.jordan_profile());
        assert_ne!(col.jordan_profile(), big.jordan_profile());
    }
}
