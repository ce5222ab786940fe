//! Elementary abelian unipotent subgroups of `G(F_q)` stored through their
//! log-spaces, `F_q`-linearity, the closure `<E>_{F_q}`, and the bijection
//! between elementary subalgebras over `F_q` and `F_q`-linear subgroups.
//!
//! A subgroup `E` is kept as `log E`, an `F_p`-subspace of the algebra's
//! coordinate space with every `F_q` coordinate flattened to its `d` power-basis
//! coefficients (coefficient index varying fastest). For `p >= n` commuting
//! unipotents have commuting nilpotent logs and `exp(X + Y) = exp X exp Y`, so
//! the subgroup is exactly `exp` of this subspace and `|E| = p^rank`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{FieldCtx, FieldElem};
use crate::liealg::{commute, AmbientAlgebra, ElemSubalgebra, LieError};
use crate::matrix::Matrix;
use crate::springer::{ExpLog, SpringerError, SpringerMap};
use crate::subspace::Subspace;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BridgeError {
    #[error(transparent)]
    Springer(#[from] SpringerError),
    #[error("generators {0} and {1} do not commute")]
    NotCommuting(usize, usize),
    #[error("element lies outside the ambient algebra")]
    NotInAlgebra,
    #[error("subgroup is not F_q-linear")]
    NotLinear,
    #[error("conjugating matrix is singular")]
    Singular,
    #[error(transparent)]
    Lie(#[from] LieError),
}

/// Which map produced a [`BridgeRecord`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

/// An elementary abelian `p`-subgroup of unipotent matrices, via its log-space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElemAbelianSubgroup {
    algebra: Arc<AmbientAlgebra>,
    log_space: Subspace,
}

/// A subalgebra paired with its subgroup.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BridgeRecord {
    pub subalgebra: ElemSubalgebra,
    pub subgroup: ElemAbelianSubgroup,
    pub direction: Direction,
}

/// `F_q` coordinates to `F_p` coordinates, `d` per entry.
pub fn flatten(f: &FieldCtx, coords: &[FieldElem]) -> Vec<FieldElem> {
    let d = f.d() as usize;
    let mut out = Vec::with_capacity(coords.len() * d);
    for &c in coords {
        out.extend(f.coeffs(c).into_iter().map(|x| FieldElem(x as u16)));
    }
    out
}

/// Inverse of [`flatten`].
pub fn unflatten(f: &FieldCtx, flat: &[FieldElem]) -> Vec<FieldElem> {
    let d = f.d() as usize;
    flat.chunks(d).map(|c| f.from_coeffs(&c.iter().map(|x| x.0 as u32).collect::<Vec<_>>())).collect()
}

impl ElemAbelianSubgroup {
    /// Trivial subgroup.
    pub fn trivial(algebra: Arc<AmbientAlgebra>) -> Self {
        let dim = algebra.dim() * algebra.field().d() as usize;
        ElemAbelianSubgroup { algebra, log_space: Subspace::zero(dim) }
    }

    /// Subgroup whose log-space is the `F_p`-span of the given algebra coordinates.
    /// The caller guarantees the span consists of commuting nilpotents.
    fn from_log_coords(algebra: Arc<AmbientAlgebra>, coords: &[Vec<FieldElem>]) -> Self {
        let f = algebra.field();
        let fp = f.prime_subfield();
        let flat: Vec<Vec<FieldElem>> = coords.iter().map(|c| flatten(f, c)).collect();
        let log_space = Subspace::from_vectors(&fp, algebra.dim() * f.d() as usize, &flat);
        ElemAbelianSubgroup { algebra, log_space }
    }

    pub fn algebra(&self) -> &Arc<AmbientAlgebra> {
        &self.algebra
    }

    pub fn field(&self) -> &FieldCtx {
        self.algebra.field()
    }

    /// `F_p`-subspace of flattened coordinates, in canonical form.
    pub fn log_space(&self) -> &Subspace {
        &self.log_space
    }

    pub fn rank(&self) -> usize {
        self.log_space.dim()
    }

    pub fn order(&self) -> u128 {
        (self.field().p() as u128).pow(self.rank() as u32)
    }

    /// Basis of the log-space as algebra coordinates over `F_q`.
    pub fn log_basis_coords(&self) -> Vec<Vec<FieldElem>> {
        self.log_space.basis_vectors().map(|v| unflatten(self.field(), v)).collect()
    }

    pub fn log_basis_matrices(&self) -> Vec<Matrix> {
        self.log_basis_coords().iter().map(|c| self.algebra.to_matrix(c)).collect()
    }

    fn springer(&self) -> Result<SpringerMap, BridgeError> {
        Ok(SpringerMap::for_algebra(&self.algebra)?)
    }

    /// All `p^rank` elements, in the enumeration order of the log-space points.
    pub fn elements(&self) -> Result<Vec<Matrix>, BridgeError> {
        let map = self.springer()?;
        let fp = self.field().prime_subfield();
        self.log_space
            .points(&fp)
            .iter()
            .map(|v| Ok(map.exp(&self.algebra.to_matrix(&unflatten(self.field(), v)))?))
            .collect()
    }

    pub fn contains(&self, g: &Matrix) -> Result<bool, BridgeError> {
        let x = self.springer()?.log(g)?;
        let Some(c) = self.algebra.coords_of(&x) else { return Ok(false) };
        Ok(self.log_space.contains(&self.field().prime_subfield(), &flatten(self.field(), &c)))
    }

    pub fn contains_subgroup(&self, other: &ElemAbelianSubgroup) -> bool {
        self.log_space.contains_subspace(&self.field().prime_subfield(), &other.log_space)
    }

    /// Whether `log E` is stable under multiplication by the field generator.
    pub fn is_fq_linear(&self) -> bool {
        let f = self.field();
        if f.d() == 1 {
            return true;
        }
        let fp = f.prime_subfield();
        let lambda = f.field_generator();
        self.log_basis_coords().iter().all(|c| {
            let scaled: Vec<FieldElem> = c.iter().map(|&x| f.mul(lambda, x)).collect();
            self.log_space.contains(&fp, &flatten(f, &scaled))
        })
    }

    /// `<E>_{F_q}`: the log-space replaced by its `F_q`-span.
    pub fn fq_closure(&self) -> ElemAbelianSubgroup {
        let f = self.field();
        let lambda = f.field_generator();
        let mut coords = Vec::new();
        for c in self.log_basis_coords() {
            let mut cur = c;
            for _ in 0..f.d() {
                let next = cur.iter().map(|&x| f.mul(lambda, x)).collect();
                coords.push(cur);
                cur = next;
            }
        }
        Self::from_log_coords(self.algebra.clone(), &coords)
    }

    /// `A E A^{-1}`.
    pub fn conjugate(&self, a: &Matrix) -> Result<ElemAbelianSubgroup, BridgeError> {
        let f = self.field();
        let a_inv = a.inverse(f).ok_or(BridgeError::Singular)?;
        let coords = self
            .log_basis_matrices()
            .iter()
            .map(|x| self.algebra.coords_of(&a.mul(f, x).mul(f, &a_inv)).ok_or(BridgeError::NotInAlgebra))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::from_log_coords(self.algebra.clone(), &coords))
    }
}

/// The subgroup generated by pairwise-commuting unipotent matrices (needs `p >= n`).
pub fn subgroup_from_generators(
    algebra: Arc<AmbientAlgebra>,
    unipotents: &[Matrix],
) -> Result<ElemAbelianSubgroup, BridgeError> {
    let map = SpringerMap::for_algebra(&algebra)?;
    let f = algebra.field();
    for (i, g) in unipotents.iter().enumerate() {
        for (j, h) in unipotents.iter().enumerate().skip(i + 1) {
            if !commute(f, g, h) {
                return Err(BridgeError::NotCommuting(i, j));
            }
        }
    }
    let coords = unipotents
        .iter()
        .map(|g| algebra.coords_of(&map.log(g)?).ok_or(BridgeError::NotInAlgebra))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ElemAbelianSubgroup::from_log_coords(algebra, &coords))
}

pub fn is_fq_linear(e: &ElemAbelianSubgroup) -> bool {
    e.is_fq_linear()
}

pub fn fq_closure(e: &ElemAbelianSubgroup) -> ElemAbelianSubgroup {
    e.fq_closure()
}

/// `exp` of the `F_q`-points of `eps`: an `F_q`-linear subgroup of rank `r d`.
pub fn bridge_forward(eps: &ElemSubalgebra) -> ElemAbelianSubgroup {
    let alg = eps.algebra().clone();
    let f = alg.field().clone();
    let lambda = f.field_generator();
    let mut coords = Vec::new();
    for b in eps.space().basis_vectors() {
        let mut cur = b.to_vec();
        for _ in 0..f.d() {
            let next = cur.iter().map(|&x| f.mul(lambda, x)).collect();
            coords.push(cur);
            cur = next;
        }
    }
    ElemAbelianSubgroup::from_log_coords(alg, &coords)
}

/// The `F_q`-span of `log E`, for `F_q`-linear `E`.
pub fn bridge_backward(e: &ElemAbelianSubgroup) -> Result<ElemSubalgebra, BridgeError> {
    if !e.is_fq_linear() {
        return Err(BridgeError::NotLinear);
    }
    let alg = e.algebra.clone();
    let space = Subspace::from_vectors(alg.field(), alg.dim(), &e.log_basis_coords());
    Ok(ElemSubalgebra::new(alg, space)?)
}

impl BridgeRecord {
    pub fn forward(eps: &ElemSubalgebra) -> Self {
        BridgeRecord { subalgebra: eps.clone(), subgroup: bridge_forward(eps), direction: Direction::Forward }
    }

    pub fn backward(e: &ElemAbelianSubgroup) -> Result<Self, BridgeError> {
        Ok(BridgeRecord { subalgebra: bridge_backward(e)?, subgroup: e.clone(), direction: Direction::Backward })
    }
}

/// Outcome of running the bridge over a set of enumerated points.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BridgeReport {
    pub points: usize,
    pub distinct_images: usize,
    pub rank_failures: usize,
    pub linearity_failures: usize,
    pub round_trip_failures: usize,
}

impl BridgeReport {
    pub fn all_passed(&self) -> bool {
        self.distinct_images == self.points
            && self.rank_failures == 0
            && self.linearity_failures == 0
            && self.round_trip_failures == 0
    }
}

/// Checks injectivity, the rank law, linearity and the round trip on every point.
pub fn bridge_check(points: &[ElemSubalgebra]) -> BridgeReport {
    let mut images = std::collections::HashSet::new();
    let mut report = BridgeReport {
        points: points.len(),
        distinct_images: 0,
        rank_failures: 0,
        linearity_failures: 0,
        round_trip_failures: 0,
    };
    for eps in points {
        let e = bridge_forward(eps);
        let d = eps.algebra().field().d() as usize;
        report.rank_failures += usize::from(e.rank() != eps.rank() * d);
        report.linearity_failures += usize::from(!e.is_fq_linear());
        report.round_trip_failures += usize::from(bridge_backward(&e).as_ref() != Ok(eps));
        images.insert(e.log_space().clone());
    }
    report.distinct_images = images.len();
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liealg::Family;

    fn alg(family: Family, n: usize, p: u32, d: u32) -> Arc<AmbientAlgebra> {
        Arc::new(AmbientAlgebra::new(family, n, &FieldCtx::new(p, d).unwrap()).unwrap())
    }

    fn transvection(f: &FieldCtx, n: usize, i: usize, j: usize, c: FieldElem) -> Matrix {
        let mut m = Matrix::identity(n);
        m[(i, j)] = f.add(m[(i, j)], c);
        m
    }

    #[test]
    fn commuting_transvections_give_rank_two() {
        let a = alg(Family::Gl, 3, 5, 1);
        let f = a.field().clone();
        let e = subgroup_from_generators(
            a.clone(),
            &[transvection(&f, 3, 0, 1, FieldElem::ONE), transvection(&f, 3, 0, 2, FieldElem::ONE)],
        )
        .unwrap();
        assert_eq!(e.rank(), 2);
        assert_eq!(e.order(), 25);
        assert_eq!(e.elements().unwrap().len(), 25);
        assert_eq!(subgroup_from_generators(a, &[]).unwrap().rank(), 0);
    }

    #[test]
    fn bad_generators_are_refused() {
        let a = alg(Family::Gl, 3, 5, 1);
        let f = a.field().clone();
        let g = transvection(&f, 3, 0, 1, FieldElem::ONE);
        let h = transvection(&f, 3, 1, 2, FieldElem::ONE);
        assert_eq!(subgroup_from_generators(a.clone(), &[g, h]), Err(BridgeError::NotCommuting(0, 1)));
        let mut d = Matrix::identity(3);
        d[(0, 0)] = FieldElem(2);
        assert!(matches!(
            subgroup_from_generators(a, &[d]),
            Err(BridgeError::Springer(SpringerError::NotUnipotent))
        ));
    }

    #[test]
    fn nonlinear_subgroup_over_f25() {
        let a = alg(Family::Sl, 3, 5, 2);
        let f = a.field().clone();
        let g = transvection(&f, 3, 0, 1, FieldElem::ONE);
        let h = transvection(&f, 3, 0, 2, FieldElem::ONE);
        let e = subgroup_from_generators(a.clone(), &[g, h]).unwrap();
        assert_eq!(e.rank(), 2);
        assert!(!e.is_fq_linear());
        assert_eq!(bridge_backward(&e), Err(BridgeError::NotLinear));
        let c = e.fq_closure();
        assert_eq!(c.rank(), 4);
        assert!(c.is_fq_linear());
        let lambda = f.field_generator();
        assert!(c.contains(&transvection(&f, 3, 0, 1, lambda)).unwrap());
        assert!(c.contains(&transvection(&f, 3, 0, 2, lambda)).unwrap());
        assert!(!e.contains(&transvection(&f, 3, 0, 1, lambda)).unwrap());
        assert_eq!(c.fq_closure(), c);
    }

    #[test]
    fn forward_and_backward_are_inverse() {
        let a = alg(Family::Gl, 3, 5, 2);
        let f = a.field().clone();
        let eps = ElemSubalgebra::from_matrices(a.clone(), &[Matrix::unit(3, 0, 1)]).unwrap();
        let e = bridge_forward(&eps);
        assert_eq!(e.rank(), 2);
        assert!(e.is_fq_linear());
        assert_eq!(bridge_backward(&e).unwrap(), eps);
        let zero = ElemSubalgebra::zero(a.clone());
        assert_eq!(bridge_forward(&zero), ElemAbelianSubgroup::trivial(a.clone()));
        assert_eq!(bridge_backward(&ElemAbelianSubgroup::trivial(a)).unwrap(), zero);
        let mut m = Matrix::identity(3);
        m[(1, 0)] = f.field_generator();
        m[(2, 2)] = FieldElem(2);
        assert!(e.conjugate(&m).unwrap().is_fq_linear());
    }

    #[test]
    fn regular_line_over_f5() {
        let a = alg(Family::Gl, 3, 5, 1);
        let f = a.field().clone();
        let x = Matrix::unit(3, 0, 1).add(&f, &Matrix::unit(3, 1, 2));
        let eps = ElemSubalgebra::from_matrices(a.clone(), &[x.clone()]).unwrap();
        let e = bridge_forward(&eps);
        assert_eq!(e.order(), 5);
        let map = SpringerMap::for_algebra(&a).unwrap();
        assert!(e.contains(&map.exp(&x).unwrap()).unwrap());
        let r = BridgeRecord::forward(&eps);
        assert_eq!(BridgeRecord::backward(&r.subgroup).unwrap().subalgebra, eps);
    }

    #[test]
    fn flattening_round_trips() {
        let f = FieldCtx::new(5, 2).unwrap();
        let v: Vec<FieldElem> = f.elements().collect();
        let flat = flatten(&f, &v);
        assert_eq!(flat.len(), 50);
        assert_eq!(&flat[4..6], &[FieldElem(2), FieldElem(0)]);
        assert_eq!(&flat[10..12], &[FieldElem(0), FieldElem(1)]);
        assert_eq!(unflatten(&f, &flat), v);
    }
}
