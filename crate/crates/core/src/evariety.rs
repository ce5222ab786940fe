//! `F_q`-rational points of the variety `E(r, g)` of rank-`r` elementary
//! subalgebras: a naive enumerator that spans commuting tuples of nilpotent
//! lines, and a seeded enumerator that searches inside `u_n` and closes the
//! seeds under conjugation.
//!
//! The seeded method rests on simultaneous triangularization. A commuting
//! family of nilpotent matrices over `F_q` has a common kernel vector defined
//! over `F_q`; induction on the quotient gives a flag over `F_q` that all of
//! them preserve strictly. So every point of `E(r, gl_n)(F_q)` is
//! `GL_n(F_q)`-conjugate to a point inside `u_n(F_q)`.
//!
//! Points of `E(r, sl_n)` coincide with those of `E(r, gl_n)` because nilpotent
//! matrices are traceless; the `sl` point set is the `gl` one rewritten in
//! `sl` coordinates.

use std::collections::HashSet;
use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{FieldCtx, FieldElem};
use crate::liealg::{AmbientAlgebra, ElemSubalgebra, Family, LieError};
use crate::orbits::{self, GroupGenerators};
use crate::subspace::{KeyCodec, PackedKey, Subspace};

pub const DEFAULT_LINE_BUDGET: u64 = 1_000_000;
pub const DEFAULT_FORM_CAP: u64 = 1 << 25;
/// Largest number of projective vectors the naive scan will visit.
pub const SCAN_LIMIT: u64 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    /// Maximum number of nilpotent lines for the naive enumerator.
    pub lines: u64,
    /// Maximum number of distinct canonical forms held at once.
    pub forms: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { lines: DEFAULT_LINE_BUDGET, forms: DEFAULT_FORM_CAP }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnumError {
    #[error("line budget exceeded: {needed} nilpotent lines > {limit} (use the seeded enumerator)")]
    LineBudget { needed: u64, limit: u64 },
    #[error("scan limit exceeded: {needed} projective vectors > {limit}")]
    ScanLimit { needed: u64, limit: u64 },
    #[error("canonical-form cap exceeded: more than {limit} distinct forms")]
    FormCap { limit: u64 },
    #[error("seeded enumeration needs a gl, sl or u algebra, got {0}")]
    Unsupported(Family),
    #[error(transparent)]
    Lie(#[from] LieError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Naive,
    Seeded,
}

/// A deduplicated set of points of `E(r, g)(F_q)`, held as sorted packed keys.
#[derive(Debug, Clone)]
pub struct PointSet {
    algebra: Arc<AmbientAlgebra>,
    r: usize,
    method: Method,
    codec: KeyCodec,
    keys: Vec<PackedKey>,
}

impl PointSet {
    /// Builds a point set from keys of the algebra's codec for rank `r`; sorts and dedups.
    pub fn from_keys(algebra: Arc<AmbientAlgebra>, r: usize, method: Method, mut keys: Vec<PackedKey>) -> Self {
        keys.par_sort_unstable();
        keys.dedup();
        let codec = point_codec(&algebra, r);
        PointSet { algebra, r, method, codec, keys }
    }

    pub fn from_subspaces(
        algebra: Arc<AmbientAlgebra>,
        r: usize,
        method: Method,
        spaces: impl IntoIterator<Item = Subspace>,
    ) -> Self {
        let codec = point_codec(&algebra, r);
        let keys = spaces.into_iter().map(|s| codec.pack(&s)).collect();
        Self::from_keys(algebra, r, method, keys)
    }

    pub fn algebra(&self) -> &Arc<AmbientAlgebra> {
        &self.algebra
    }

    pub fn field(&self) -> &FieldCtx {
        self.algebra.field()
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn codec(&self) -> KeyCodec {
        self.codec
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    /// Keys in ascending order.
    pub fn keys(&self) -> &[PackedKey] {
        &self.keys
    }

    pub fn contains_key(&self, key: &PackedKey) -> bool {
        self.keys.binary_search(key).is_ok()
    }

    pub fn contains(&self, s: &Subspace) -> bool {
        s.dim() == self.r && s.ambient_dim() == self.algebra.dim() && self.contains_key(&self.codec.pack(s))
    }

    pub fn subspaces(&self) -> impl Iterator<Item = Subspace> + '_ {
        self.keys.iter().map(|k| self.codec.unpack(k))
    }

    pub fn points(&self) -> impl Iterator<Item = ElemSubalgebra> + '_ {
        self.subspaces().map(|s| ElemSubalgebra::new_unchecked(self.algebra.clone(), s))
    }

    /// Set equality of the underlying points (ignores the method tag).
    pub fn same_points(&self, other: &PointSet) -> bool {
        *self.algebra == *other.algebra && self.r == other.r && self.keys == other.keys
    }

    /// One JSON array of basis rows per line, entries as field-element indices.
    pub fn write_json_lines<W: Write>(&self, mut w: W) -> io::Result<()> {
        for s in self.subspaces() {
            let rows: Vec<String> = s
                .to_int_rows()
                .iter()
                .map(|row| {
                    let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
                    format!("[{}]", cells.join(","))
                })
                .collect();
            writeln!(w, "[{}]", rows.join(","))?;
        }
        Ok(())
    }
}

pub(crate) fn point_codec(alg: &AmbientAlgebra, r: usize) -> KeyCodec {
    KeyCodec::new(r, alg.dim(), alg.field().q())
}

fn q_pow(q: u64, e: usize) -> Option<u64> {
    q.checked_pow(e as u32)
}

/// `(q^e - 1) / (q - 1)`, saturating.
fn projective_count(q: u64, e: usize) -> u64 {
    q_pow(q, e).map_or(u64::MAX, |v| (v - 1) / (q - 1))
}

/// Nilpotent lines known in advance without scanning, if any.
fn expected_lines(alg: &AmbientAlgebra) -> Option<u64> {
    let q = alg.field().q() as u64;
    let n = alg.n();
    match alg.family() {
        Family::Gl | Family::Sl => Some(projective_count(q, n * n - n)),
        Family::U => Some(projective_count(q, alg.dim())),
        Family::So => None,
    }
}

/// `XY == YX` for flat `n × n` buffers, with early exit.
fn commute_flat(f: &FieldCtx, n: usize, x: &[FieldElem], y: &[FieldElem]) -> bool {
    for i in 0..n {
        for j in 0..n {
            let mut acc = FieldElem::ZERO;
            for k in 0..n {
                acc = f.add(acc, f.mul(x[i * n + k], y[k * n + j]));
                acc = f.sub(acc, f.mul(y[i * n + k], x[k * n + j]));
            }
            if !acc.is_zero() {
                return false;
            }
        }
    }
    true
}

/// Projective representatives (first nonzero coordinate 1) of elements with `X^p = 0`.
pub fn nilpotent_lines(alg: &AmbientAlgebra, budget: &Budget) -> Result<Vec<Vec<FieldElem>>, EnumError> {
    let f = alg.field();
    let q = f.q() as u64;
    let dim = alg.dim();
    if let Some(needed) = expected_lines(alg) {
        if needed > budget.lines {
            return Err(EnumError::LineBudget { needed, limit: budget.lines });
        }
    }
    let scan = projective_count(q, dim);
    if scan > SCAN_LIMIT {
        return Err(EnumError::ScanLimit { needed: scan, limit: SCAN_LIMIT });
    }
    let p = f.p() as u64;
    // Lead position k: coordinates before k are zero, coordinate k is 1.
    let per_lead: Vec<Vec<Vec<FieldElem>>> = (0..dim)
        .into_par_iter()
        .map(|k| {
            let free = dim - k - 1;
            let total = q.pow(free as u32);
            let mut out = Vec::new();
            let mut v = vec![FieldElem::ZERO; dim];
            v[k] = FieldElem::ONE;
            for idx in 0..total {
                let mut rest = idx;
                for slot in v[k + 1..].iter_mut().rev() {
                    *slot = FieldElem((rest % q) as u16);
                    rest /= q;
                }
                if alg.to_matrix(&v).pow(f, p).is_zero() {
                    out.push(v.clone());
                }
            }
            out
        })
        .collect();
    let lines: Vec<Vec<FieldElem>> = per_lead.into_iter().flatten().collect();
    if lines.len() as u64 > budget.lines {
        return Err(EnumError::LineBudget { needed: lines.len() as u64, limit: budget.lines });
    }
    Ok(lines)
}

/// Exhaustive enumeration by spanning commuting independent `r`-tuples of nilpotent lines.
pub fn enumerate_naive(alg: &Arc<AmbientAlgebra>, r: usize, budget: &Budget) -> Result<PointSet, EnumError> {
    let dim = alg.dim();
    if r == 0 {
        return Ok(PointSet::from_subspaces(alg.clone(), 0, Method::Naive, [Subspace::zero(dim)]));
    }
    let f = alg.field();
    let n = alg.n();
    let lines = nilpotent_lines(alg, budget)?;
    if r == 1 {
        let spaces = lines.iter().map(|v| Subspace::from_vectors(f, dim, std::slice::from_ref(v)));
        return Ok(PointSet::from_subspaces(alg.clone(), 1, Method::Naive, spaces));
    }
    let mats: Vec<Vec<FieldElem>> = lines.iter().map(|v| alg.to_matrix(v).into_data()).collect();
    // Commuting neighbours with larger index.
    let adj: Vec<Vec<u32>> = (0..mats.len())
        .into_par_iter()
        .map(|i| {
            (i + 1..mats.len())
                .filter(|&j| commute_flat(f, n, &mats[i], &mats[j]))
                .map(|j| j as u32)
                .collect()
        })
        .collect();
    let codec = point_codec(alg, r);
    let mut found: HashSet<PackedKey> = HashSet::new();
    let mut chosen: Vec<usize> = Vec::with_capacity(r);
    for start in 0..lines.len() {
        chosen.clear();
        chosen.push(start);
        let cands: Vec<u32> = adj[start].clone();
        extend_tuple(f, dim, r, &lines, &adj, &mut chosen, &cands, &codec, &mut found, budget)?;
    }
    Ok(PointSet::from_keys(alg.clone(), r, Method::Naive, found.into_iter().collect()))
}

#[allow(clippy::too_many_arguments)]
fn extend_tuple(
    f: &FieldCtx,
    dim: usize,
    r: usize,
    lines: &[Vec<FieldElem>],
    adj: &[Vec<u32>],
    chosen: &mut Vec<usize>,
    cands: &[u32],
    codec: &KeyCodec,
    found: &mut HashSet<PackedKey>,
    budget: &Budget,
) -> Result<(), EnumError> {
    let vecs: Vec<Vec<FieldElem>> = chosen.iter().map(|&i| lines[i].clone()).collect();
    let span = Subspace::from_vectors(f, dim, &vecs);
    for &c in cands {
        let c = c as usize;
        if span.contains(f, &lines[c]) {
            continue;
        }
        chosen.push(c);
        if chosen.len() == r {
            let mut all = vecs.clone();
            all.push(lines[c].clone());
            found.insert(codec.pack(&Subspace::from_vectors(f, dim, &all)));
            if found.len() as u64 > budget.forms {
                return Err(EnumError::FormCap { limit: budget.forms });
            }
        } else {
            let next: Vec<u32> = cands.iter().copied().filter(|&d| adj[c].binary_search(&d).is_ok()).collect();
            extend_tuple(f, dim, r, lines, adj, chosen, &next, codec, found, budget)?;
        }
        chosen.pop();
    }
    Ok(())
}

/// All rank-`r` elementary subspaces of `u_n(F_q)`, expressed in `alg`'s coordinates.
///
/// Nonempty iff `E(r, alg)(F_q)` is nonempty, for the gl, sl and u families.
pub fn seed_points(alg: &AmbientAlgebra, r: usize, budget: &Budget) -> Result<Vec<Subspace>, EnumError> {
    if alg.family() == Family::So {
        return Err(EnumError::Unsupported(Family::So));
    }
    let f = alg.field();
    let n = alg.n();
    let u = AmbientAlgebra::new(Family::U, n, f)?;
    let m = u.dim();
    if r == 0 {
        return Ok(vec![Subspace::zero(alg.dim())]);
    }
    if r > m {
        return Ok(Vec::new());
    }
    let mats: SeedSearch = SeedSearch { f, n, m, r, u: &u, cap: budget.forms };
    // Partition the search by the largest pivot column.
    let parts: Vec<Result<Vec<Vec<FieldElem>>, EnumError>> =
        (r - 1..m).into_par_iter().map(|top| mats.search_from(top)).collect();
    let mut out = Vec::new();
    for part in parts {
        let part = part?;
        for rows in part.chunks(r) {
            let coords: Vec<Vec<FieldElem>> = rows
                .iter()
                .map(|row| alg.coords_of(&u.to_matrix(row)).expect("u_n lies inside the ambient algebra"))
                .collect();
            out.push(Subspace::from_vectors(f, alg.dim(), &coords));
        }
        if out.len() as u64 > budget.forms {
            return Err(EnumError::FormCap { limit: budget.forms });
        }
    }
    Ok(out)
}

struct SeedSearch<'a> {
    f: &'a FieldCtx,
    n: usize,
    m: usize,
    r: usize,
    u: &'a AmbientAlgebra,
    cap: u64,
}

impl SeedSearch<'_> {
    /// RREF bases whose largest pivot is `top`, flattened `r` rows at a time.
    fn search_from(&self, top: usize) -> Result<Vec<Vec<FieldElem>>, EnumError> {
        let mut out = Vec::new();
        let mut rows: Vec<(Vec<FieldElem>, Vec<FieldElem>)> = Vec::new();
        let mut pivots: Vec<usize> = Vec::new();
        self.place_row(top, &mut rows, &mut pivots, &mut out)?;
        Ok(out)
    }

    /// Adds a row with pivot `c`, zero at existing pivots, then recurses on smaller pivots.
    fn place_row(
        &self,
        c: usize,
        rows: &mut Vec<(Vec<FieldElem>, Vec<FieldElem>)>,
        pivots: &mut Vec<usize>,
        out: &mut Vec<Vec<FieldElem>>,
    ) -> Result<(), EnumError> {
        let q = self.f.q() as u64;
        let free: Vec<usize> = (c + 1..self.m).filter(|j| !pivots.contains(j)).collect();
        let total = q.pow(free.len() as u32);
        let mut v = vec![FieldElem::ZERO; self.m];
        v[c] = FieldElem::ONE;
        for idx in 0..total {
            let mut rest = idx;
            for &j in free.iter().rev() {
                v[j] = FieldElem((rest % q) as u16);
                rest /= q;
            }
            let mat = self.u.to_matrix(&v).into_data();
            if !rows.iter().all(|(_, other)| commute_flat(self.f, self.n, &mat, other)) {
                continue;
            }
            rows.push((v.clone(), mat));
            pivots.push(c);
            if rows.len() == self.r {
                // Rows were chosen by decreasing pivot; RREF order is increasing.
                for (row, _) in rows.iter().rev() {
                    out.push(row.clone());
                }
                if (out.len() / self.r) as u64 > self.cap {
                    return Err(EnumError::FormCap { limit: self.cap });
                }
            } else {
                let need = self.r - rows.len();
                for next in (need - 1..c).rev() {
                    self.place_row(next, rows, pivots, out)?;
                }
            }
            rows.pop();
            pivots.pop();
        }
        Ok(())
    }
}

/// Enumeration by seeding in `u_n` and closing under `GL_n(F_q)` conjugation.
pub fn enumerate_seeded(alg: &Arc<AmbientAlgebra>, r: usize, budget: &Budget) -> Result<PointSet, EnumError> {
    match alg.family() {
        Family::So => Err(EnumError::Unsupported(Family::So)),
        Family::U => {
            let seeds = seed_points(alg, r, budget)?;
            Ok(PointSet::from_subspaces(alg.clone(), r, Method::Seeded, seeds))
        }
        Family::Sl => {
            let gl = Arc::new(AmbientAlgebra::new(Family::Gl, alg.n(), alg.field())?);
            let gl_points = enumerate_seeded(&gl, r, budget)?;
            let f = alg.field();
            let spaces: Vec<Subspace> = gl_points
                .subspaces()
                .map(|s| {
                    let coords: Vec<Vec<FieldElem>> = gl
                        .subspace_matrices(&s)
                        .iter()
                        .map(|m| alg.coords_of(m).expect("nilpotent matrices are traceless"))
                        .collect();
                    Subspace::from_vectors(f, alg.dim(), &coords)
                })
                .collect();
            Ok(PointSet::from_subspaces(alg.clone(), r, Method::Seeded, spaces))
        }
        Family::Gl => {
            let seeds = seed_points(alg, r, budget)?;
            let codec = point_codec(alg, r);
            let starts: Vec<PackedKey> = seeds.iter().map(|s| codec.pack(s)).collect();
            let gens = GroupGenerators::gl(alg.n(), alg.field());
            let closure = orbits::explore(alg, &gens, r, starts, None, budget.forms)
                .map_err(|_| EnumError::FormCap { limit: budget.forms })?;
            Ok(PointSet::from_keys(alg.clone(), r, Method::Seeded, closure.visited.into_iter().collect()))
        }
    }
}

/// Cartan type of a simple Lie algebra, or `gl_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RootType {
    A(usize),
    B(usize),
    C(usize),
    D(usize),
    E6,
    E7,
    E8,
    F4,
    G2,
    Gl(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RootTypeError {
    #[error("unknown root type '{0}'")]
    Unknown(String),
    #[error("type {0} is outside the tabulated range")]
    OutOfRange(String),
}

impl fmt::Display for RootType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RootType::A(n) => write!(f, "A{n}"),
            RootType::B(n) => write!(f, "B{n}"),
            RootType::C(n) => write!(f, "C{n}"),
            RootType::D(n) => write!(f, "D{n}"),
            RootType::E6 => f.write_str("E6"),
            RootType::E7 => f.write_str("E7"),
            RootType::E8 => f.write_str("E8"),
            RootType::F4 => f.write_str("F4"),
            RootType::G2 => f.write_str("G2"),
            RootType::Gl(n) => write!(f, "gl{n}"),
        }
    }
}

impl FromStr for RootType {
    type Err = RootTypeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let unknown = || RootTypeError::Unknown(s.to_string());
        let lower = t.to_ascii_lowercase();
        if let Some(rest) = lower.strip_prefix("gl") {
            return rest.trim_start_matches('_').parse().map(RootType::Gl).map_err(|_| unknown());
        }
        match t.to_ascii_uppercase().as_str() {
            "E6" => return Ok(RootType::E6),
            "E7" => return Ok(RootType::E7),
            "E8" => return Ok(RootType::E8),
            "F4" => return Ok(RootType::F4),
            "G2" => return Ok(RootType::G2),
            _ => {}
        }
        let mut chars = t.chars();
        let head = chars.next().ok_or_else(unknown)?.to_ascii_uppercase();
        let n: usize = chars.as_str().trim_start_matches('_').parse().map_err(|_| unknown())?;
        match head {
            'A' => Ok(RootType::A(n)),
            'B' => Ok(RootType::B(n)),
            'C' => Ok(RootType::C(n)),
            'D' => Ok(RootType::D(n)),
            _ => Err(unknown()),
        }
    }
}

fn binom2(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Dimension of the largest elementary subalgebra.
///
/// `C_2` is isomorphic to `B_2` and takes the `B_2` value.
pub fn r_max(t: RootType) -> Result<usize, RootTypeError> {
    let out_of_range = || RootTypeError::OutOfRange(t.to_string());
    match t {
        RootType::A(n) if n >= 1 => Ok((n + 1) * (n + 1) / 4),
        RootType::B(n) if n == 2 || n == 3 => Ok(2 * n - 1),
        RootType::B(n) if n >= 4 => Ok(1 + binom2(n)),
        RootType::C(2) => Ok(3),
        RootType::C(n) if n >= 3 => Ok(binom2(n + 1)),
        RootType::D(n) if n >= 4 => Ok(binom2(n)),
        RootType::E6 => Ok(16),
        RootType::E7 => Ok(27),
        RootType::E8 => Ok(36),
        RootType::F4 => Ok(9),
        RootType::G2 => Ok(3),
        RootType::Gl(n) if n >= 1 => Ok(n * n / 4),
        _ => Err(out_of_range()),
    }
}

/// `(n + r - 1)(n - 1) - r^2`.
pub fn dim_formula(r: usize, n: usize) -> i64 {
    let (r, n) = (r as i64, n as i64);
    (n + r - 1) * (n - 1) - r * r
}
