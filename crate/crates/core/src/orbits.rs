//! Conjugation orbits of elementary subalgebras under `GL_n(F_q)` (or a
//! subgroup given by generators), per-prime censuses, and point-count
//! polynomials fitted across primes.
//!
//! `GL_n(F_q)` is generated by the transvections `I + E_ij` together with
//! `diag(ω, 1, ..., 1)` for a primitive `ω`: conjugating `I + E_1j` by powers
//! of the diagonal gives `I + ω^k E_1j`, whose products reach `I + c E_1j` for
//! every `c` in `F_p[ω] = F_q`; commutators then give every elementary
//! transvection, hence `SL_n(F_q)`, and the diagonal supplies the determinant.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::sync::Arc;

use dashmap::DashSet;
use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evariety::{self, dim_formula, point_codec, Budget, EnumError, PointSet};
use crate::field::{FieldCtx, FieldElem};
use crate::liealg::{jordan_type, AmbientAlgebra, ElemSubalgebra, Family, LieError, Partition};
use crate::matrix::{rref_in_place_with, Matrix};
use crate::poly::{lagrange_fit, RationalPoly};
use crate::subspace::{KeyCodec, PackedKey, Subspace};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrbitError {
    #[error("matrix is singular")]
    Singular,
    #[error("conjugate leaves the ambient algebra")]
    NotInAlgebra,
    #[error("point set is not closed under the generators")]
    NotClosed,
    #[error("canonical-form cap exceeded: more than {limit} distinct forms")]
    FormCap { limit: u64 },
    #[error("orbit size {size} does not divide group order {order}")]
    NotDivisible { size: u64, order: u128 },
    #[error("census needs a gl, sl or u algebra, got {0}")]
    Unsupported(Family),
    #[error("primes must be distinct and at least n = {n}: {primes:?}")]
    BadPrimes { n: usize, primes: Vec<u32> },
    #[error("cross-prime matching failed: {0}")]
    Matching(String),
    #[error(transparent)]
    Enum(#[from] EnumError),
    #[error(transparent)]
    Lie(#[from] LieError),
}

/// How a generator acts, for fast paths on `gl_n` coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenKind {
    /// `I + E_ij`.
    Transvection { i: usize, j: usize },
    /// Identity except `w` at `(i, i)`.
    Diagonal { i: usize, w: FieldElem, w_inv: FieldElem },
    General,
}

#[derive(Debug, Clone)]
pub struct Generator {
    matrix: Matrix,
    inverse: Matrix,
    kind: GenKind,
}

impl Generator {
    pub fn new(f: &FieldCtx, matrix: Matrix) -> Result<Self, OrbitError> {
        let inverse = matrix.inverse(f).ok_or(OrbitError::Singular)?;
        let kind = classify(&matrix);
        let kind = match kind {
            GenKind::Diagonal { i, w, .. } => GenKind::Diagonal { i, w, w_inv: f.inv(w).expect("invertible") },
            k => k,
        };
        Ok(Generator { matrix, inverse, kind })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn inverse(&self) -> &Matrix {
        &self.inverse
    }

    pub fn kind(&self) -> GenKind {
        self.kind
    }
}

fn classify(m: &Matrix) -> GenKind {
    let n = m.rows();
    let mut off = Vec::new();
    let mut diag = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let x = m[(i, j)];
            if i == j && x != FieldElem::ONE {
                diag.push((i, x));
            } else if i != j && !x.is_zero() {
                off.push((i, j, x));
            }
        }
    }
    match (off.as_slice(), diag.as_slice()) {
        ([(i, j, x)], []) if *x == FieldElem::ONE => GenKind::Transvection { i: *i, j: *j },
        ([], [(i, w)]) => GenKind::Diagonal { i: *i, w: *w, w_inv: FieldElem::ZERO },
        _ => GenKind::General,
    }
}

/// A generating set of a matrix group acting by conjugation.
#[derive(Debug, Clone)]
pub struct GroupGenerators {
    n: usize,
    field: FieldCtx,
    gens: Vec<Generator>,
    order: Option<u128>,
}

/// `|GL_n(F_q)|`.
pub fn gl_order(n: usize, q: u32) -> u128 {
    let q = q as u128;
    let qn = q.pow(n as u32);
    (0..n as u32).map(|i| qn - q.pow(i)).product()
}

pub fn gl_generators(n: usize, f: &FieldCtx) -> GroupGenerators {
    GroupGenerators::gl(n, f)
}

impl GroupGenerators {
    /// Transvections `I + E_ij` (`i != j`, row-major) and `diag(ω, 1, ..., 1)`.
    pub fn gl(n: usize, f: &FieldCtx) -> Self {
        let mut mats = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    mats.push(Matrix::identity(n).add(f, &Matrix::unit(n, i, j)));
                }
            }
        }
        let mut d = Matrix::identity(n);
        d[(0, 0)] = f.primitive_element();
        mats.push(d);
        let gens = mats.into_iter().map(|m| Generator::new(f, m).expect("invertible")).collect();
        GroupGenerators { n, field: f.clone(), gens, order: Some(gl_order(n, f.q())) }
    }

    /// `I + E_ij` for `i < j`; generates `U_n(F_p)` over a prime field.
    pub fn unitriangular(n: usize, f: &FieldCtx) -> Self {
        let mut gens = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let m = Matrix::identity(n).add(f, &Matrix::unit(n, i, j));
                gens.push(Generator::new(f, m).expect("invertible"));
            }
        }
        let order = f.is_prime_field().then(|| (f.q() as u128).pow((n * n.saturating_sub(1) / 2) as u32));
        GroupGenerators { n, field: f.clone(), gens, order }
    }

    /// Arbitrary invertible generators; `order` is the generated group's order if known.
    pub fn custom(n: usize, f: &FieldCtx, mats: Vec<Matrix>, order: Option<u128>) -> Result<Self, OrbitError> {
        let gens = mats.into_iter().map(|m| Generator::new(f, m)).collect::<Result<Vec<_>, _>>()?;
        Ok(GroupGenerators { n, field: f.clone(), gens, order })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn field(&self) -> &FieldCtx {
        &self.field
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn generators(&self) -> &[Generator] {
        &self.gens
    }

    pub fn matrices(&self) -> Vec<Matrix> {
        self.gens.iter().map(|g| g.matrix.clone()).collect()
    }

    pub fn group_order(&self) -> Option<u128> {
        self.order
    }

    /// Same generators in a seeded random order.
    pub fn shuffled(&self, seed: u64) -> Self {
        let mut out = self.clone();
        out.gens.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        out
    }

    /// Order of the generated group by closure on matrices, if at most `limit`.
    pub fn closure_order(&self, limit: u64) -> Option<u64> {
        let f = &self.field;
        let id = Matrix::identity(self.n);
        let mut seen: HashSet<Matrix> = HashSet::new();
        seen.insert(id.clone());
        let mut frontier = vec![id];
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for m in &frontier {
                for g in &self.gens {
                    let h = m.mul(f, &g.matrix);
                    if !seen.contains(&h) {
                        seen.insert(h.clone());
                        next.push(h);
                    }
                }
            }
            if seen.len() as u64 > limit {
                return None;
            }
            frontier = next;
        }
        Some(seen.len() as u64)
    }
}

/// `g eps g^{-1}` in canonical form.
pub fn act(g: &Matrix, eps: &ElemSubalgebra) -> Result<ElemSubalgebra, OrbitError> {
    let alg = eps.algebra();
    let f = alg.field();
    let g_inv = g.inverse(f).ok_or(OrbitError::Singular)?;
    let coords = eps
        .basis_matrices()
        .iter()
        .map(|x| alg.coords_of(&g.mul(f, x).mul(f, &g_inv)).ok_or(OrbitError::NotInAlgebra))
        .collect::<Result<Vec<_>, _>>()?;
    let space = Subspace::from_vectors(f, alg.dim(), &coords);
    Ok(ElemSubalgebra::new_unchecked(alg.clone(), space))
}

/// Applies generators to packed points of one algebra and rank.
struct Actor<'a> {
    alg: &'a AmbientAlgebra,
    gens: &'a [Generator],
    codec: KeyCodec,
    r: usize,
    dim: usize,
    fast: bool,
}

impl<'a> Actor<'a> {
    fn new(alg: &'a AmbientAlgebra, gens: &'a GroupGenerators, r: usize) -> Self {
        Actor {
            alg,
            gens: &gens.gens,
            codec: point_codec(alg, r),
            r,
            dim: alg.dim(),
            fast: alg.family() == Family::Gl,
        }
    }

    fn image(&self, key: &PackedKey, g: &Generator, buf: &mut Vec<FieldElem>) -> Result<PackedKey, OrbitError> {
        let f = self.alg.field();
        let (r, dim) = (self.r, self.dim);
        buf.resize(r * dim, FieldElem::ZERO);
        self.codec.unpack_into(key, buf);
        match (self.fast, g.kind) {
            (true, GenKind::Transvection { i, j }) => {
                let n = self.alg.n();
                for x in buf.chunks_mut(dim) {
                    for k in 0..n {
                        x[i * n + k] = f.add(x[i * n + k], x[j * n + k]);
                    }
                    for k in 0..n {
                        x[k * n + j] = f.sub(x[k * n + j], x[k * n + i]);
                    }
                }
            }
            (true, GenKind::Diagonal { i, w, w_inv }) => {
                let n = self.alg.n();
                for x in buf.chunks_mut(dim) {
                    for k in 0..n {
                        x[i * n + k] = f.mul(w, x[i * n + k]);
                    }
                    for k in 0..n {
                        x[k * n + i] = f.mul(x[k * n + i], w_inv);
                    }
                }
            }
            _ => {
                for x in buf.chunks_mut(dim) {
                    let m = self.alg.to_matrix(x);
                    let c = g.matrix.mul(f, &m).mul(f, &g.inverse);
                    let coords = self.alg.coords_of(&c).ok_or(OrbitError::NotInAlgebra)?;
                    x.copy_from_slice(&coords);
                }
            }
        }
        let rank = rref_in_place_with(f, buf, r, dim, |_| {});
        debug_assert_eq!(rank, r);
        Ok(self.codec.pack_entries(buf))
    }
}

/// One orbit found by closure: its least key and its size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct RawOrbit {
    pub min_key: PackedKey,
    pub size: u64,
}

pub(crate) struct Exploration {
    pub orbits: Vec<RawOrbit>,
    pub visited: DashSet<PackedKey>,
}

/// Breadth-first closure of every unvisited start, in the given order.
///
/// With `members`, every reached point must lie in that set.
pub(crate) fn explore(
    alg: &AmbientAlgebra,
    gens: &GroupGenerators,
    r: usize,
    starts: Vec<PackedKey>,
    members: Option<&PointSet>,
    cap: u64,
) -> Result<Exploration, OrbitError> {
    let actor = Actor::new(alg, gens, r);
    let visited: DashSet<PackedKey> = DashSet::new();
    let mut orbits = Vec::new();
    for start in starts {
        if visited.contains(&start) {
            continue;
        }
        if members.is_some_and(|m| !m.contains_key(&start)) {
            return Err(OrbitError::NotClosed);
        }
        visited.insert(start.clone());
        let mut min_key = start.clone();
        let mut size = 1u64;
        let mut frontier = vec![start];
        while !frontier.is_empty() {
            let next: Vec<Result<PackedKey, OrbitError>> = frontier
                .par_iter()
                .map_init(Vec::new, |buf, key| {
                    let mut out = Vec::new();
                    for g in actor.gens {
                        match actor.image(key, g, buf) {
                            Ok(img) => {
                                if !visited.contains(&img) && visited.insert(img.clone()) {
                                    out.push(Ok(img));
                                }
                            }
                            Err(e) => out.push(Err(e)),
                        }
                    }
                    out
                })
                .flatten_iter()
                .collect();
            let next = next.into_iter().collect::<Result<Vec<_>, _>>()?;
            if let Some(m) = members {
                if next.iter().any(|k| !m.contains_key(k)) {
                    return Err(OrbitError::NotClosed);
                }
            }
            if visited.len() as u64 > cap {
                return Err(OrbitError::FormCap { limit: cap });
            }
            size += next.len() as u64;
            if let Some(m) = next.iter().min() {
                if *m < min_key {
                    min_key = m.clone();
                }
            }
            frontier = next;
        }
        orbits.push(RawOrbit { min_key, size });
    }
    Ok(Exploration { orbits, visited })
}

/// Conjugation-invariant data used to match orbits across primes.
///
/// Jordan-type counts are written in balanced base-`q` digits, so a count that
/// is a small-coefficient polynomial in `q` gives the same digits at every prime.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct InvariantKey {
    pub rank: usize,
    pub jordan: Vec<(Partition, Vec<i64>)>,
    pub kernel_dim: usize,
    pub image_dim: usize,
    pub product_dim: usize,
}

fn balanced_digits(mut v: i64, q: i64) -> Vec<i64> {
    let mut out = Vec::new();
    while v != 0 {
        let mut d = v.rem_euclid(q);
        if d > q / 2 {
            d -= q;
        }
        out.push(d);
        v = (v - d) / q;
    }
    out
}

impl InvariantKey {
    pub fn of(eps: &ElemSubalgebra) -> Self {
        let alg = eps.algebra();
        Self::from_basis(alg.field(), alg.n(), &eps.basis_matrices())
    }

    /// Key of the span of commuting nilpotent `mats` over `f`.
    pub fn from_basis(f: &FieldCtx, n: usize, mats: &[Matrix]) -> Self {
        let q = f.q() as i64;
        let r = mats.len();
        let flat: Vec<Vec<FieldElem>> = mats.iter().map(|m| m.data().to_vec()).collect();
        let span = Subspace::from_vectors(f, n * n, &flat);
        let mut counts: BTreeMap<Partition, i64> = BTreeMap::new();
        for v in span.points(f) {
            let m = Matrix::from_vec(n, n, v);
            *counts.entry(jordan_type(f, &m).expect("nilpotent")).or_insert(0) += 1;
        }
        let jordan = counts.into_iter().map(|(t, c)| (t, balanced_digits(c, q))).collect();
        let mut stacked = Matrix::zeros(r * n, n);
        let mut side = Matrix::zeros(n, r * n);
        for (k, x) in mats.iter().enumerate() {
            for i in 0..n {
                for j in 0..n {
                    stacked[(k * n + i, j)] = x[(i, j)];
                    side[(i, k * n + j)] = x[(i, j)];
                }
            }
        }
        let kernel_dim = n - stacked.rank(f);
        let image_dim = side.rank(f);
        let mut products = Vec::new();
        for a in 0..r {
            for b in a..r {
                products.push(mats[a].mul(f, &mats[b]).into_data());
            }
        }
        let product_dim = Subspace::from_vectors(f, n * n, &products).dim();
        InvariantKey { rank: r, jordan, kernel_dim, image_dim, product_dim }
    }

    /// The parts that do not change under field extension.
    fn geometric(&self) -> (usize, usize, usize, usize) {
        (self.rank, self.kernel_dim, self.image_dim, self.product_dim)
    }
}

/// Settings for detecting `G(F_p)`-classes that fuse over an extension field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeProbe {
    /// Largest extension degree `e` tried; 1 disables probing.
    pub max_extension: u32,
    pub trials: u32,
    pub seed: u64,
}

impl Default for MergeProbe {
    fn default() -> Self {
        MergeProbe { max_extension: 2, trials: 20_000, seed: 0x5eed }
    }
}

impl MergeProbe {
    pub fn disabled() -> Self {
        MergeProbe { max_extension: 1, ..Self::default() }
    }
}

/// Basis matrices lifted into an extension of a prime field (indices below `p` are shared).
fn lift(mats: &[Matrix]) -> Vec<Matrix> {
    mats.to_vec()
}

fn span_of_matrices(f: &FieldCtx, n: usize, mats: &[Matrix]) -> Subspace {
    let flat: Vec<Vec<FieldElem>> = mats.iter().map(|m| m.data().to_vec()).collect();
    Subspace::from_vectors(f, n * n, &flat)
}

fn random_combination(f: &FieldCtx, mats: &[Matrix], rng: &mut ChaCha8Rng) -> Matrix {
    let n = mats[0].rows();
    let mut acc = Matrix::zeros(n, n);
    for m in mats {
        let c = FieldElem(rng.gen_range(0..f.q()) as u16);
        acc = acc.add(f, &m.scale(f, c));
    }
    acc
}

/// Searches for `g` in `GL_n(F_{p^e})` with `g a g^{-1} = b`, where `a`, `b` are
/// points over the prime field `F_p`. Returns `g` on success; `None` is inconclusive.
///
/// Each trial picks random `X` in `a` and `Y` in `b` of equal Jordan type, solves
/// the linear system `gX = Yg`, and tests a random solution.
pub fn merge_probe(a: &ElemSubalgebra, b: &ElemSubalgebra, e: u32, trials: u32, seed: u64) -> Option<Matrix> {
    let base = a.algebra().field();
    assert!(base.is_prime_field(), "merge probing needs a prime base field");
    if a.rank() != b.rank() || a.rank() == 0 {
        return (a == b).then(|| Matrix::identity(a.algebra().n()));
    }
    let f = FieldCtx::new(base.p(), e).ok()?;
    let n = a.algebra().n();
    let xa = lift(&a.basis_matrices());
    let yb = lift(&b.basis_matrices());
    let target = span_of_matrices(&f, n, &yb);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nn = n * n;
    for _ in 0..trials {
        let x = random_combination(&f, &xa, &mut rng);
        let Some(tx) = jordan_type(&f, &x) else { continue };
        let mut y = None;
        for _ in 0..32 {
            let cand = random_combination(&f, &yb, &mut rng);
            if jordan_type(&f, &cand).as_ref() == Some(&tx) {
                y = Some(cand);
                break;
            }
        }
        let Some(y) = y else { continue };
        // Row (i, j) of the system is (gX - Yg)_{ij}; column (s, t) is g_{st}.
        let mut sys = Matrix::zeros(nn, nn);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let col = i * n + k;
                    sys[(i * n + j, col)] = f.add(sys[(i * n + j, col)], x[(k, j)]);
                    let col = k * n + j;
                    sys[(i * n + j, col)] = f.sub(sys[(i * n + j, col)], y[(i, k)]);
                }
            }
        }
        let kernel = sys.nullspace(&f);
        if kernel.is_empty() {
            continue;
        }
        let mut g = vec![FieldElem::ZERO; nn];
        for v in &kernel {
            let c = FieldElem(rng.gen_range(0..f.q()) as u16);
            for (acc, &vi) in g.iter_mut().zip(v) {
                *acc = f.add(*acc, f.mul(c, vi));
            }
        }
        let g = Matrix::from_vec(n, n, g);
        let Some(g_inv) = g.inverse(&f) else { continue };
        let image: Vec<Matrix> = xa.iter().map(|m| g.mul(&f, m).mul(&f, &g_inv)).collect();
        if span_of_matrices(&f, n, &image) == target {
            return Some(g);
        }
    }
    None
}

#[derive(Debug, Clone)]
pub struct OrbitRecord {
    /// Point whose canonical key is least in the orbit.
    pub representative: ElemSubalgebra,
    pub key: PackedKey,
    pub size: u64,
    pub invariant_key: InvariantKey,
    /// `|G| / size`, when the group order is known.
    pub stabilizer_order: Option<u128>,
}

/// `group_order / size`.
pub fn stabilizer_order(rec: &OrbitRecord, group_order: u128) -> Result<u128, OrbitError> {
    let size = rec.size as u128;
    if size == 0 || group_order % size != 0 {
        return Err(OrbitError::NotDivisible { size: rec.size, order: group_order });
    }
    Ok(group_order / size)
}

fn build_records(
    alg: &Arc<AmbientAlgebra>,
    r: usize,
    raw: Vec<RawOrbit>,
    group_order: Option<u128>,
) -> Result<Vec<OrbitRecord>, OrbitError> {
    let codec = point_codec(alg, r);
    let mut recs = raw
        .into_par_iter()
        .map(|o| {
            let representative = ElemSubalgebra::new_unchecked(alg.clone(), codec.unpack(&o.min_key));
            let invariant_key = InvariantKey::of(&representative);
            let mut rec =
                OrbitRecord { representative, key: o.min_key, size: o.size, invariant_key, stabilizer_order: None };
            if let Some(order) = group_order {
                rec.stabilizer_order = Some(stabilizer_order(&rec, order)?);
            }
            Ok(rec)
        })
        .collect::<Result<Vec<_>, OrbitError>>()?;
    recs.sort_by(|a, b| (a.size, &a.key).cmp(&(b.size, &b.key)));
    Ok(recs)
}

/// Partition of a point set into generator-closure classes, sorted by (size, key).
pub fn orbit_partition(points: &PointSet, gens: &GroupGenerators) -> Result<Vec<OrbitRecord>, OrbitError> {
    orbit_partition_capped(points, gens, evariety::DEFAULT_FORM_CAP)
}

pub fn orbit_partition_capped(
    points: &PointSet,
    gens: &GroupGenerators,
    cap: u64,
) -> Result<Vec<OrbitRecord>, OrbitError> {
    let alg = points.algebra();
    let ex = explore(alg, gens, points.r(), points.keys().to_vec(), Some(points), cap)?;
    build_records(alg, points.r(), ex.orbits, gens.group_order())
}

fn generators_for(alg: &AmbientAlgebra) -> Result<GroupGenerators, OrbitError> {
    match alg.family() {
        Family::Gl | Family::Sl => Ok(GroupGenerators::gl(alg.n(), alg.field())),
        Family::U => Ok(GroupGenerators::unitriangular(alg.n(), alg.field())),
        Family::So => Err(OrbitError::Unsupported(Family::So)),
    }
}

/// `G(F_p)`-classes found to fuse into one orbit over `F_{p^e}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergedClass {
    /// Indices into the prime's record list, ascending.
    pub members: Vec<usize>,
    pub size: u64,
    /// `(from, to, e, conjugating matrix entries over F_{p^e})` for each fusion used.
    pub witnesses: Vec<(usize, usize, u32, Vec<u32>)>,
}

/// Orbit records of `E(r, g)(F_p)` for one prime.
#[derive(Debug, Clone)]
pub struct PrimeCensus {
    pub p: u32,
    pub total_points: u64,
    pub group_order: Option<u128>,
    /// `G(F_p)`-conjugacy classes.
    pub records: Vec<OrbitRecord>,
    /// Classes after fusing those conjugate over an extension; sorted by (size, first member).
    pub classes: Vec<MergedClass>,
}

fn find(parent: &mut [usize], i: usize) -> usize {
    let mut root = i;
    while parent[root] != root {
        root = parent[root];
    }
    parent[i] = root;
    root
}

/// Groups records that the probe shows to be conjugate over `F_{p^e}`, `e <= max_extension`.
///
/// Only pairs with equal geometric invariants and equal Jordan profiles over
/// `F_{p^e}` are probed. An inconclusive probe keeps the classes apart.
pub fn merge_classes(records: &[OrbitRecord], probe: &MergeProbe) -> Vec<MergedClass> {
    let k = records.len();
    let mut parent: Vec<usize> = (0..k).collect();
    let mut witnesses = Vec::new();
    for e in 2..=probe.max_extension {
        let mut ext_keys: Vec<Option<InvariantKey>> = vec![None; k];
        for i in 0..k {
            for j in i + 1..k {
                if find(&mut parent, i) == find(&mut parent, j) {
                    continue;
                }
                let (a, b) = (&records[i], &records[j]);
                if a.invariant_key.geometric() != b.invariant_key.geometric() {
                    continue;
                }
                let f = a.representative.algebra().field();
                let Ok(fe) = FieldCtx::new(f.p(), e) else { continue };
                let n = a.representative.algebra().n();
                for idx in [i, j] {
                    if ext_keys[idx].is_none() {
                        let mats = lift(&records[idx].representative.basis_matrices());
                        ext_keys[idx] = Some(InvariantKey::from_basis(&fe, n, &mats));
                    }
                }
                if ext_keys[i] != ext_keys[j] {
                    continue;
                }
                let seed = probe.seed ^ ((i as u64) << 32 | j as u64);
                if let Some(g) = merge_probe(&a.representative, &b.representative, e, probe.trials, seed) {
                    let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                    parent[ri.max(rj)] = ri.min(rj);
                    witnesses.push((i, j, e, g.to_ints()));
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..k {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(i);
    }
    let mut classes: Vec<MergedClass> = groups
        .into_values()
        .map(|members| {
            let size = members.iter().map(|&m| records[m].size).sum();
            let w = witnesses.iter().filter(|w| members.contains(&w.0)).cloned().collect();
            MergedClass { members, size, witnesses: w }
        })
        .collect();
    classes.sort_by_key(|c| (c.size, c.members[0]));
    classes
}

/// Seeds inside `u_n`, explores their orbits in one pass, then fuses classes.
pub fn census_prime(
    family: Family,
    n: usize,
    r: usize,
    p: u32,
    budget: &Budget,
    probe: &MergeProbe,
) -> Result<PrimeCensus, OrbitError> {
    let f = FieldCtx::prime(p).map_err(|_| OrbitError::BadPrimes { n, primes: vec![p] })?;
    let alg = Arc::new(AmbientAlgebra::new(family, n, &f)?);
    let gens = generators_for(&alg)?;
    let seeds = evariety::seed_points(&alg, r, budget)?;
    let codec = point_codec(&alg, r);
    let mut starts: Vec<PackedKey> = seeds.iter().map(|s| codec.pack(s)).collect();
    starts.sort_unstable();
    let ex = explore(&alg, &gens, r, starts, None, budget.forms)?;
    let total_points = ex.visited.len() as u64;
    drop(ex.visited);
    let records = build_records(&alg, r, ex.orbits, gens.group_order())?;
    let classes = merge_classes(&records, probe);
    Ok(PrimeCensus { p, total_points, group_order: gens.group_order(), records, classes })
}

/// One record of a [`CensusSnapshot`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordSnapshot {
    /// RREF basis rows of the representative, in algebra coordinates.
    pub representative: Vec<Vec<u32>>,
    pub size: u64,
    pub invariant_key: InvariantKey,
    #[serde(with = "opt_u128_string")]
    pub stabilizer_order: Option<u128>,
}

/// Decimal strings, since JSON numbers above `u64` are not portable.
mod opt_u128_string {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<u128>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(x) => s.serialize_some(&x.to_string()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<u128>, D::Error> {
        Option::<String>::deserialize(d)?.map(|t| t.parse().map_err(serde::de::Error::custom)).transpose()
    }
}

/// Plain-data form of a [`PrimeCensus`] for storage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusSnapshot {
    pub family: Family,
    pub n: usize,
    pub r: usize,
    pub p: u32,
    pub total_points: u64,
    #[serde(with = "opt_u128_string")]
    pub group_order: Option<u128>,
    pub records: Vec<RecordSnapshot>,
    pub classes: Vec<MergedClass>,
}

impl PrimeCensus {
    pub fn snapshot(&self, family: Family, n: usize, r: usize) -> CensusSnapshot {
        CensusSnapshot {
            family,
            n,
            r,
            p: self.p,
            total_points: self.total_points,
            group_order: self.group_order,
            records: self
                .records
                .iter()
                .map(|rec| RecordSnapshot {
                    representative: rec.representative.space().to_int_rows(),
                    size: rec.size,
                    invariant_key: rec.invariant_key.clone(),
                    stabilizer_order: rec.stabilizer_order,
                })
                .collect(),
            classes: self.classes.clone(),
        }
    }

    /// Rebuilds a census, revalidating every representative.
    pub fn from_snapshot(snap: &CensusSnapshot) -> Result<PrimeCensus, OrbitError> {
        let f = FieldCtx::prime(snap.p).map_err(|_| OrbitError::BadPrimes { n: snap.n, primes: vec![snap.p] })?;
        let alg = Arc::new(AmbientAlgebra::new(snap.family, snap.n, &f)?);
        let codec = point_codec(&alg, snap.r);
        let mut records = Vec::with_capacity(snap.records.len());
        for rs in &snap.records {
            let space = Subspace::from_int_rows(&f, alg.dim(), &rs.representative)
                .filter(|s| s.dim() == snap.r)
                .ok_or(OrbitError::NotInAlgebra)?;
            let representative = ElemSubalgebra::new(alg.clone(), space)?;
            records.push(OrbitRecord {
                key: codec.pack(representative.space()),
                representative,
                size: rs.size,
                invariant_key: rs.invariant_key.clone(),
                stabilizer_order: rs.stabilizer_order,
            });
        }
        if snap.classes.iter().flat_map(|c| &c.members).any(|&m| m >= records.len()) {
            return Err(OrbitError::Matching("class member out of range".into()));
        }
        Ok(PrimeCensus {
            p: snap.p,
            total_points: snap.total_points,
            group_order: snap.group_order,
            records,
            classes: snap.classes.clone(),
        })
    }
}

/// Orbits matched across primes by invariant key, with a fitted point-count polynomial.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitFamily {
    /// Invariant keys of the fused `G(F_p)`-classes, sorted.
    pub invariant_keys: Vec<InvariantKey>,
    /// `(p, size)` per prime, in prime order.
    pub sizes: Vec<(u32, u64)>,
    pub polynomial: Option<RationalPoly>,
    /// Fitted degree, taken as the orbit dimension; `None` with fewer than two primes.
    pub degree: Option<usize>,
    /// At least one measured size beyond the `degree + 1` that determine the fit.
    pub verified: bool,
}

#[derive(Debug, Clone)]
pub struct OrbitCensus {
    pub family: Family,
    pub n: usize,
    pub r: usize,
    pub primes: Vec<u32>,
    pub per_prime: Vec<PrimeCensus>,
    pub families: Vec<OrbitFamily>,
    /// Interpolation degree bound used for every family.
    pub degree_bound: usize,
    /// Number of `G(F_p)`-classes before fusing, per prime.
    pub class_counts: Vec<usize>,
    /// Primes whose class count differs from the majority.
    pub count_flags: Vec<u32>,
}

impl OrbitCensus {
    pub fn orbit_count(&self) -> usize {
        self.families.len()
    }

    pub fn max_degree(&self) -> Option<usize> {
        self.families.iter().filter_map(|f| f.degree).max()
    }

    /// Whether every fitted polynomial was checked against a held-out prime.
    pub fn all_verified(&self) -> bool {
        self.families.iter().all(|f| f.verified)
    }
}

/// Runs one census per prime (in parallel) and assembles them.
pub fn census(
    family: Family,
    n: usize,
    r: usize,
    primes: &[u32],
    budget: &Budget,
    probe: &MergeProbe,
) -> Result<OrbitCensus, OrbitError> {
    check_primes(n, primes)?;
    let per_prime = primes
        .par_iter()
        .map(|&p| census_prime(family, n, r, p, budget, probe))
        .collect::<Result<Vec<_>, _>>()?;
    assemble_census(family, n, r, per_prime)
}

fn check_primes(n: usize, primes: &[u32]) -> Result<(), OrbitError> {
    let distinct: HashSet<u32> = primes.iter().copied().collect();
    let ok = !primes.is_empty()
        && distinct.len() == primes.len()
        && primes.iter().all(|&p| crate::field::is_prime(p) && p as usize >= n);
    if ok {
        Ok(())
    } else {
        Err(OrbitError::BadPrimes { n, primes: primes.to_vec() })
    }
}

/// Matches fused classes across primes and fits each family's sizes.
///
/// A class is keyed by the sorted invariant keys of its members. Each key must
/// occur equally often at every prime; within a prime, classes sharing a key
/// must have equal sizes so that no pairing has to be guessed.
pub fn assemble_census(
    family: Family,
    n: usize,
    r: usize,
    mut per_prime: Vec<PrimeCensus>,
) -> Result<OrbitCensus, OrbitError> {
    per_prime.sort_by_key(|c| c.p);
    let primes: Vec<u32> = per_prime.iter().map(|c| c.p).collect();
    check_primes(n, &primes)?;
    let class_counts: Vec<usize> = per_prime.iter().map(|c| c.records.len()).collect();
    let count_flags: Vec<u32> = primes
        .iter()
        .zip(&class_counts)
        .filter(|&(_, &c)| class_counts.iter().filter(|&&d| d == c).count() * 2 <= class_counts.len())
        .map(|(&p, _)| p)
        .collect();
    let mut groups: BTreeMap<Vec<InvariantKey>, Vec<Vec<u64>>> = BTreeMap::new();
    for (idx, pc) in per_prime.iter().enumerate() {
        for class in &pc.classes {
            let mut key: Vec<InvariantKey> =
                class.members.iter().map(|&m| pc.records[m].invariant_key.clone()).collect();
            key.sort();
            let slot = groups.entry(key).or_insert_with(|| vec![Vec::new(); per_prime.len()]);
            slot[idx].push(class.size);
        }
    }
    let k = per_prime.len();
    let degree_bound = (n * n).min(k.saturating_sub(1));
    let mut families = Vec::new();
    for (key, per) in groups {
        let count = per[0].len();
        if let Some(bad) = per.iter().position(|v| v.len() != count) {
            return Err(OrbitError::Matching(format!(
                "invariant class {key:?} has {count} orbit(s) at p = {} but {} at p = {}",
                primes[0],
                per[bad].len(),
                primes[bad]
            )));
        }
        for (idx, v) in per.iter().enumerate() {
            if v.iter().any(|&s| s != v[0]) {
                return Err(OrbitError::Matching(format!(
                    "orbits with equal invariants but sizes {v:?} at p = {}",
                    primes[idx]
                )));
            }
        }
        let sizes: Vec<(u32, u64)> = primes.iter().zip(&per).map(|(&p, v)| (p, v[0])).collect();
        let (polynomial, degree) = if k >= 2 {
            let pts: Vec<(i64, BigInt)> = sizes.iter().map(|&(p, s)| (p as i64, BigInt::from(s))).collect();
            let poly = lagrange_fit(&pts, degree_bound).map_err(|e| OrbitError::Matching(e.to_string()))?;
            let degree = poly.degree();
            (Some(poly), degree)
        } else {
            (None, None)
        };
        for _ in 0..count {
            families.push(OrbitFamily {
                invariant_keys: key.clone(),
                sizes: sizes.clone(),
                polynomial: polynomial.clone(),
                degree,
                verified: degree.is_some_and(|d| k >= d + 2),
            });
        }
    }
    families.sort_by(|a, b| (&a.sizes, &a.invariant_keys).cmp(&(&b.sizes, &b.invariant_keys)));
    Ok(OrbitCensus { family, n, r, primes, per_prime, families, degree_bound, class_counts, count_flags })
}

/// One `(n, r)` cell of the summary tables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableCell {
    pub n: usize,
    pub r: usize,
    pub primes: Vec<u32>,
    /// Number of `G(F_p)`-classes: an upper bound for the number of orbits.
    pub orbit_count: usize,
    pub max_degree: Option<usize>,
    /// False when some fit used every prime, so a higher true degree is not excluded.
    pub verified: bool,
    pub dim_formula: i64,
    /// `(sizes at the first prime, polynomial)` per orbit family.
    pub polynomials: Vec<(u64, Option<String>)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableReport {
    pub cells: Vec<TableCell>,
}

pub fn table_report(censuses: &[OrbitCensus]) -> TableReport {
    let mut cells: Vec<TableCell> = censuses
        .iter()
        .map(|c| TableCell {
            n: c.n,
            r: c.r,
            primes: c.primes.clone(),
            orbit_count: c.orbit_count(),
            max_degree: c.max_degree(),
            verified: c.all_verified(),
            dim_formula: dim_formula(c.r, c.n),
            polynomials: c
                .families
                .iter()
                .map(|f| (f.sizes[0].1, f.polynomial.as_ref().map(|p| p.to_string())))
                .collect(),
        })
        .collect();
    cells.sort_by_key(|c| (c.n, c.r));
    TableReport { cells }
}

impl TableReport {
    fn grid(&self, value: impl Fn(&TableCell) -> String) -> String {
        let ns: Vec<usize> = self.cells.iter().map(|c| c.n).collect::<std::collections::BTreeSet<_>>().into_iter().collect();
        let rs: Vec<usize> = self.cells.iter().map(|c| c.r).collect::<std::collections::BTreeSet<_>>().into_iter().collect();
        let mut out = String::new();
        let header: Vec<String> = rs.iter().map(|r| format!("r={r}")).collect();
        let _ = writeln!(out, "| n | {} |", header.join(" | "));
        let _ = writeln!(out, "|---|{}", "---|".repeat(rs.len()));
        for &n in &ns {
            let row: Vec<String> = rs
                .iter()
                .map(|&r| self.cells.iter().find(|c| c.n == n && c.r == r).map_or("-".to_string(), &value))
                .collect();
            let _ = writeln!(out, "| {n} | {} |", row.join(" | "));
        }
        out
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        out.push_str("## Orbit classes (upper bounds for the number of orbits)\n\n");
        out.push_str(&self.grid(|c| c.orbit_count.to_string()));
        out.push_str("\n## Largest fitted orbit degree\n\n");
        out.push_str(&self.grid(|c| match c.max_degree {
            None => "deferred".to_string(),
            Some(d) if c.verified => d.to_string(),
            Some(d) => format!("{d} (unconfirmed)"),
        }));
        out.push_str("\n## Dimension formula (n+r-1)(n-1)-r^2\n\n");
        out.push_str(&self.grid(|c| c.dim_formula.to_string()));
        out.push_str("\n## Orbit point counts\n");
        for c in &self.cells {
            let primes: Vec<String> = c.primes.iter().map(|p| p.to_string()).collect();
            let _ = writeln!(out, "\n### n={}, r={} (primes {})\n", c.n, c.r, primes.join(","));
            out.push_str("| size at first prime | polynomial |\n|---|---|\n");
            for (size, poly) in &c.polynomials {
                let _ = writeln!(out, "| {size} | {} |", poly.as_deref().unwrap_or("deferred"));
            }
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,r,primes,orbit_count,max_degree,verified,dim_formula,polynomials\n");
        for c in &self.cells {
            let primes: Vec<String> = c.primes.iter().map(|p| p.to_string()).collect();
            let polys: Vec<String> =
                c.polynomials.iter().map(|(s, p)| p.clone().unwrap_or_else(|| s.to_string())).collect();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},\"{}\"",
                c.n,
                c.r,
                primes.join(" "),
                c.orbit_count,
                c.max_degree.map_or(String::new(), |d| d.to_string()),
                c.verified,
                c.dim_formula,
                polys.join("; ")
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_order_values() {
        assert_eq!(gl_order(2, 5), 480);
        assert_eq!(gl_order(3, 5), 1_488_000);
    }

    #[test]
    fn gl2_generators_generate() {
        let f = FieldCtx::prime(5).unwrap();
        let g = gl_generators(2, &f);
        assert_eq!(g.len(), 3);
        assert_eq!(g.closure_order(10_000), Some(480));
        assert_eq!(gl_generators(3, &f).len(), 7);
    }

    #[test]
    fn generators_of_f25_gl2_generate() {
        let f = FieldCtx::new(5, 2).unwrap();
        assert_eq!(gl_generators(2, &f).closure_order(1_000_000), Some(gl_order(2, 25) as u64));
    }

    #[test]
    fn fast_path_matches_matrix_conjugation() {
        let f = FieldCtx::prime(5).unwrap();
        let alg = Arc::new(AmbientAlgebra::new(Family::Gl, 3, &f).unwrap());
        let gens = gl_generators(3, &f);
        let pts = evariety::enumerate_seeded(&alg, 2, &Budget::default()).unwrap();
        let actor = Actor::new(&alg, &gens, 2);
        let mut buf = Vec::new();
        for key in pts.keys().iter().step_by(37) {
            let eps = ElemSubalgebra::new_unchecked(alg.clone(), pts.codec().unpack(key));
            for g in gens.generators() {
                assert!(g.kind() != GenKind::General);
                let fast = actor.image(key, g, &mut buf).unwrap();
                let slow = act(g.matrix(), &eps).unwrap();
                assert_eq!(pts.codec().unpack(&fast), *slow.space());
            }
        }
    }

    #[test]
    fn balanced_digits_are_prime_independent() {
        assert_eq!(balanced_digits(4, 5), vec![-1, 1]);
        assert_eq!(balanced_digits(6, 7), vec![-1, 1]);
        assert_eq!(balanced_digits(20, 5), vec![0, -1, 1]);
        assert_eq!(balanced_digits(42, 7), vec![0, -1, 1]);
        assert_eq!(balanced_digits(1, 5), vec![1]);
    }

    #[test]
    fn gl2_census_fits_p_plus_one() {
        let c = census(Family::Gl, 2, 1, &[5, 7, 11], &Budget::default(), &MergeProbe::default()).unwrap();
        assert_eq!(c.orbit_count(), 1);
        assert_eq!(c.families[0].polynomial.as_ref().unwrap().to_string(), "p + 1");
        assert_eq!(c.max_degree(), Some(1));
    }

    #[test]
    fn bad_primes_are_rejected() {
        assert!(census(Family::Gl, 3, 2, &[2, 5], &Budget::default(), &MergeProbe::default()).is_err());
        assert!(census(Family::Gl, 3, 2, &[5, 5], &Budget::default(), &MergeProbe::default()).is_err());
        assert!(census(Family::Gl, 3, 2, &[9], &Budget::default(), &MergeProbe::default()).is_err());
    }

    #[test]
    fn probe_finds_conjugator_and_rejects_strangers() {
        let f = FieldCtx::prime(5).unwrap();
        let alg = Arc::new(AmbientAlgebra::new(Family::Gl, 3, &f).unwrap());
        let a = ElemSubalgebra::from_matrices(alg.clone(), &[Matrix::unit(3, 0, 1), Matrix::unit(3, 0, 2)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let g = Matrix::random_invertible(&f, 3, &mut rng);
        let b = act(&g, &a).unwrap();
        let w = merge_probe(&a, &b, 1, 200, 1).expect("conjugate over F_5");
        let w_inv = w.inverse(&f).unwrap();
        let image: Vec<Matrix> = a.basis_matrices().iter().map(|m| w.mul(&f, m).mul(&f, &w_inv)).collect();
        assert_eq!(alg.span_of(&image).unwrap(), *b.space());
        assert!(merge_probe(&a, &b, 2, 200, 1).is_some());
        // Column-type plane: transpose, never conjugate.
        let c = ElemSubalgebra::from_matrices(alg, &[Matrix::unit(3, 0, 2), Matrix::unit(3, 1, 2)]).unwrap();
        assert!(merge_probe(&a, &c, 2, 200, 1).is_none());
    }
}
