//! Truncated exponential and logarithm between nilpotent and unipotent
//! matrices when `p >= n`, the generalized power `g^λ = exp(λ log g)`, and a
//! randomized suite checking the identities these maps must satisfy.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{FieldCtx, FieldElem};
use crate::liealg::{commute, is_nilpotent, AmbientAlgebra};
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpringerError {
    #[error("truncated exponential needs p >= n, got p = {p}, n = {n}")]
    PrimeTooSmall { p: u32, n: usize },
    #[error("matrix is not nilpotent")]
    NotNilpotent,
    #[error("matrix is not unipotent")]
    NotUnipotent,
    #[error("expected a {expected}x{expected} matrix, got {rows}x{cols}")]
    Shape { expected: usize, rows: usize, cols: usize },
}

/// A bijection between nilpotent and unipotent `n × n` matrices.
pub trait ExpLog {
    fn field(&self) -> &FieldCtx;
    fn n(&self) -> usize;
    fn exp(&self, x: &Matrix) -> Result<Matrix, SpringerError>;
    fn log(&self, u: &Matrix) -> Result<Matrix, SpringerError>;

    /// `g^λ = exp(λ · log g)`.
    fn power(&self, g: &Matrix, lambda: FieldElem) -> Result<Matrix, SpringerError> {
        let f = self.field().clone();
        self.exp(&self.log(g)?.scale(&f, lambda))
    }
}

/// The canonical truncated-exponential map `X ↦ Σ_{i<p} X^i / i!`.
#[derive(Debug, Clone)]
pub struct SpringerMap {
    field: FieldCtx,
    n: usize,
    /// `1/i!` for `0 <= i < p`.
    inv_factorials: Vec<FieldElem>,
    /// `(-1)^{i+1}/i` for `1 <= i < p`, index 0 unused.
    log_coeffs: Vec<FieldElem>,
}

impl SpringerMap {
    pub fn new(field: &FieldCtx, n: usize) -> Result<Self, SpringerError> {
        let p = field.p();
        if (p as usize) < n {
            return Err(SpringerError::PrimeTooSmall { p, n });
        }
        let mut inv_factorials = vec![FieldElem::ONE];
        let mut log_coeffs = vec![FieldElem::ZERO];
        for i in 1..p as i64 {
            let fi = field.from_int(i);
            let prev = *inv_factorials.last().unwrap();
            inv_factorials.push(field.mul(prev, field.inv(fi).expect("i < p is a unit")));
            let inv_i = field.inv(fi).unwrap();
            log_coeffs.push(if i % 2 == 1 { inv_i } else { field.neg(inv_i) });
        }
        Ok(SpringerMap { field: field.clone(), n, inv_factorials, log_coeffs })
    }

    pub fn for_algebra(alg: &AmbientAlgebra) -> Result<Self, SpringerError> {
        Self::new(alg.field(), alg.n())
    }

    pub fn inverse_factorials(&self) -> &[FieldElem] {
        &self.inv_factorials
    }

    fn check_shape(&self, m: &Matrix) -> Result<(), SpringerError> {
        if m.rows() != self.n || m.cols() != self.n {
            return Err(SpringerError::Shape { expected: self.n, rows: m.rows(), cols: m.cols() });
        }
        Ok(())
    }

    /// Highest series term that can be nonzero: `X^n = 0` and the series stops at `p - 1`.
    fn top_degree(&self) -> usize {
        (self.field.p() as usize - 1).min(self.n.saturating_sub(1))
    }
}

impl ExpLog for SpringerMap {
    fn field(&self) -> &FieldCtx {
        &self.field
    }

    fn n(&self) -> usize {
        self.n
    }

    fn exp(&self, x: &Matrix) -> Result<Matrix, SpringerError> {
        self.check_shape(x)?;
        let f = &self.field;
        if !is_nilpotent(f, x) {
            return Err(SpringerError::NotNilpotent);
        }
        let top = self.top_degree();
        // Horner: (((c_top X + c_{top-1}) X + ...) X + c_0)
        let mut acc = Matrix::identity(self.n).scale(f, self.inv_factorials[top]);
        for i in (0..top).rev() {
            acc = acc.mul(f, x).add_scalar(f, self.inv_factorials[i]);
        }
        Ok(acc)
    }

    fn log(&self, u: &Matrix) -> Result<Matrix, SpringerError> {
        self.check_shape(u)?;
        let f = &self.field;
        let nil = u.add_scalar(f, f.neg(FieldElem::ONE));
        if !is_nilpotent(f, &nil) {
            return Err(SpringerError::NotUnipotent);
        }
        let top = self.top_degree();
        if top == 0 {
            return Ok(nil);
        }
        let mut acc = Matrix::identity(self.n).scale(f, self.log_coeffs[top]);
        for i in (1..top).rev() {
            acc = acc.mul(f, &nil).add_scalar(f, self.log_coeffs[i]);
        }
        Ok(acc.mul(f, &nil))
    }
}

/// A failing trial, with the matrices involved as integer entry lists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub description: String,
    pub matrices: Vec<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckTally {
    pub name: String,
    pub trials: usize,
    pub passed: usize,
    pub failed: usize,
    pub witness: Option<Witness>,
}

impl CheckTally {
    fn new(name: &str) -> Self {
        CheckTally { name: name.to_string(), trials: 0, passed: 0, failed: 0, witness: None }
    }

    fn record(&mut self, ok: bool, witness: impl FnOnce() -> Witness) {
        self.trials += 1;
        if ok {
            self.passed += 1;
        } else {
            self.failed += 1;
            if self.witness.is_none() {
                self.witness = Some(witness());
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub n: usize,
    pub p: u32,
    pub d: u32,
    pub trials: usize,
    pub seed: u64,
    pub checks: Vec<CheckTally>,
}

impl SuiteReport {
    pub fn total_failures(&self) -> usize {
        self.checks.iter().map(|c| c.failed).sum()
    }

    pub fn all_passed(&self) -> bool {
        self.total_failures() == 0
    }

    pub fn check(&self, name: &str) -> Option<&CheckTally> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn random_elem(f: &FieldCtx, rng: &mut impl Rng) -> FieldElem {
    FieldElem(rng.gen_range(0..f.q()) as u16)
}

fn conj(f: &FieldCtx, a: &Matrix, a_inv: &Matrix, x: &Matrix) -> Matrix {
    a.mul(f, x).mul(f, a_inv)
}

/// Random nilpotent matrix `A U A^{-1}` with `U` strictly upper triangular.
pub fn random_nilpotent(f: &FieldCtx, n: usize, rng: &mut impl Rng) -> Matrix {
    let a = Matrix::random_invertible(f, n, rng);
    let a_inv = a.inverse(f).unwrap();
    conj(f, &a, &a_inv, &Matrix::random_strictly_upper(f, n, rng))
}

/// Random pair of commuting nilpotent matrices drawn from a few abelian families.
pub fn random_commuting_nilpotents(f: &FieldCtx, n: usize, rng: &mut impl Rng) -> (Matrix, Matrix) {
    let a = Matrix::random_invertible(f, n, rng);
    let a_inv = a.inverse(f).unwrap();
    let (x, y) = if n >= 2 && rng.gen_bool(0.5) {
        // Both in the square-zero algebra Hom(F^n / W, W) for W = span(e_1..e_k).
        let k = rng.gen_range(1..n);
        let mut x = Matrix::zeros(n, n);
        let mut y = Matrix::zeros(n, n);
        for i in 0..k {
            for j in k..n {
                x[(i, j)] = random_elem(f, rng);
                y[(i, j)] = random_elem(f, rng);
            }
        }
        (x, y)
    } else {
        // Y a polynomial in X without constant term.
        let x = Matrix::random_strictly_upper(f, n, rng);
        let mut y = Matrix::zeros(n, n);
        let mut power = x.clone();
        for _ in 1..n.max(2) {
            y = y.add(f, &power.scale(f, random_elem(f, rng)));
            power = power.mul(f, &x);
        }
        (x, y)
    };
    (conj(f, &a, &a_inv, &x), conj(f, &a, &a_inv, &y))
}

fn ints(m: &Matrix) -> Vec<u32> {
    m.to_ints()
}

fn eq_ok(a: Result<Matrix, SpringerError>, b: Result<Matrix, SpringerError>) -> bool {
    matches!((a, b), (Ok(a), Ok(b)) if a == b)
}

fn frob(f: &FieldCtx, m: &Matrix) -> Matrix {
    m.map(|x| f.frobenius(x))
}

/// Runs the randomized identity checks against `map`.
pub fn springer_identity_suite<S: ExpLog>(map: &S, trials: usize, seed: u64) -> SuiteReport {
    let f = map.field().clone();
    let n = map.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names = [
        "commutation_equivalence",
        "sum_to_product",
        "exp_log_round_trip",
        "equivariance",
        "power_additive",
        "power_multiplicative",
        "power_commuting",
        "power_conjugation",
        "power_prime_subfield",
        "frobenius_equivariance",
        "prime_field_rationality",
    ];
    let mut tallies: Vec<CheckTally> = names.iter().map(|n| CheckTally::new(n)).collect();
    let identity = Matrix::identity(n);
    let prime = f.prime_subfield();

    for _ in 0..trials {
        let (x, y) = random_commuting_nilpotents(&f, n, &mut rng);
        let gx = map.exp(&x);
        let gy = map.exp(&y);

        // (a) commutation equivalence on a commuting pair and on an independent random pair
        let (u, v) = (random_nilpotent(&f, n, &mut rng), random_nilpotent(&f, n, &mut rng));
        let a_ok = [(&x, &y), (&u, &v)].iter().all(|(s, t)| match (map.exp(s), map.exp(t)) {
            (Ok(es), Ok(et)) => commute(&f, s, t) == commute(&f, &es, &et),
            _ => false,
        });
        tallies[0].record(a_ok, || Witness {
            description: "[X,Y]=0 iff exp(X)exp(Y)=exp(Y)exp(X)".into(),
            matrices: vec![ints(&u), ints(&v)],
        });

        // (b) sum to product
        let b_ok = match (map.exp(&x.add(&f, &y)), &gx, &gy) {
            (Ok(s), Ok(a), Ok(b)) => s == a.mul(&f, b),
            _ => false,
        };
        tallies[1].record(b_ok, || Witness {
            description: "exp(X+Y) = exp(X)exp(Y) for commuting X, Y".into(),
            matrices: vec![ints(&x), ints(&y)],
        });

        // (c) round trips, both directions
        let uni = map.exp(&u);
        let c_ok = matches!(&gx, Ok(g) if map.log(g).as_ref() == Ok(&x))
            && matches!(&uni, Ok(g) if map.exp(&map.log(g).unwrap_or_else(|_| identity.clone())).as_ref() == Ok(g));
        tallies[2].record(c_ok, || Witness {
            description: "log(exp(X)) = X and exp(log(g)) = g".into(),
            matrices: vec![ints(&x), ints(&u)],
        });

        // (d) equivariance under a random invertible conjugator
        let a = Matrix::random_invertible(&f, n, &mut rng);
        let a_inv = a.inverse(&f).unwrap();
        let d_ok = match (map.exp(&conj(&f, &a, &a_inv, &x)), &gx) {
            (Ok(l), Ok(g)) => l == conj(&f, &a, &a_inv, g),
            _ => false,
        };
        tallies[3].record(d_ok, || Witness {
            description: "exp(A X A^-1) = A exp(X) A^-1".into(),
            matrices: vec![ints(&x), ints(&a)],
        });

        let lam = random_elem(&f, &mut rng);
        let mu = random_elem(&f, &mut rng);
        let (Ok(g), Ok(h)) = (gx.clone(), gy.clone()) else {
            for t in &mut tallies[4..9] {
                t.record(false, || Witness { description: "exp failed".into(), matrices: vec![ints(&x)] });
            }
            continue;
        };

        let e1 = (|| -> Result<bool, SpringerError> {
            Ok(map.power(&g, lam)?.mul(&f, &map.power(&g, mu)?) == map.power(&g, f.add(lam, mu))?)
        })()
        .unwrap_or(false);
        tallies[4].record(e1, || Witness {
            description: format!("g^l g^m = g^(l+m), l={}, m={}", lam.0, mu.0),
            matrices: vec![ints(&g)],
        });

        let e2 = (|| -> Result<bool, SpringerError> {
            Ok(map.power(&map.power(&g, lam)?, mu)? == map.power(&g, f.mul(lam, mu))?)
        })()
        .unwrap_or(false);
        tallies[5].record(e2, || Witness {
            description: format!("(g^l)^m = g^(lm), l={}, m={}", lam.0, mu.0),
            matrices: vec![ints(&g)],
        });

        let e3 = (|| -> Result<bool, SpringerError> {
            let gl = map.power(&g, lam)?;
            let hm = map.power(&h, mu)?;
            Ok(gl.mul(&f, &hm) == hm.mul(&f, &gl))
        })()
        .unwrap_or(false);
        tallies[6].record(e3, || Witness {
            description: format!("g^l h^m = h^m g^l, l={}, m={}", lam.0, mu.0),
            matrices: vec![ints(&g), ints(&h)],
        });

        let k = map.exp(&u).unwrap_or_else(|_| identity.clone());
        let e4 = (|| -> Result<bool, SpringerError> {
            let lhs = map.power(&conj(&f, &a, &a_inv, &k), lam)?;
            let rhs = conj(&f, &a, &a_inv, &map.power(&k, lam)?);
            Ok(lhs == rhs)
        })()
        .unwrap_or(false);
        tallies[7].record(e4, || Witness {
            description: format!("(a k a^-1)^l = a k^l a^-1, l={}", lam.0),
            matrices: vec![ints(&a), ints(&k)],
        });

        let m_int = rng.gen_range(0..f.p() as u64);
        let e5 = eq_ok(map.power(&g, f.from_int(m_int as i64)), Ok(g.pow(&f, m_int)));
        tallies[8].record(e5, || Witness {
            description: format!("g^m equals the m-th group power, m={m_int}"),
            matrices: vec![ints(&g)],
        });

        // (e) Frobenius equivariance
        let fr_ok = eq_ok(map.exp(&frob(&f, &x)), Ok(frob(&f, &g)));
        tallies[9].record(fr_ok, || Witness {
            description: "exp(Frob X) = Frob exp(X)".into(),
            matrices: vec![ints(&x)],
        });

        // exp maps F_p-rational nilpotents to F_p-rational unipotents
        // Prime-subfield elements share their encoding with F_q.
        let xp = random_nilpotent(&prime, n, &mut rng);
        let r_ok = match map.exp(&xp) {
            Ok(e) => e.data().iter().all(|&c| f.in_prime_subfield(c)),
            Err(_) => false,
        };
        tallies[10].record(r_ok, || Witness {
            description: "exp of an F_p-rational nilpotent is F_p-rational".into(),
            matrices: vec![ints(&xp)],
        });
    }

    SuiteReport { n, p: f.p(), d: f.d(), trials, seed, checks: tallies }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_sum(f: &FieldCtx, n: usize, pairs: &[(usize, usize)]) -> Matrix {
        pairs.iter().fold(Matrix::zeros(n, n), |acc, &(i, j)| acc.add(f, &Matrix::unit(n, i, j)))
    }

    /// Reference exponential by direct summation of all p terms.
    fn exp_direct(f: &FieldCtx, x: &Matrix) -> Matrix {
        let mut acc = Matrix::zeros(x.rows(), x.rows());
        let mut fact = FieldElem::ONE;
        for i in 0..f.p() as u64 {
            if i > 0 {
                fact = f.mul(fact, f.from_int(i as i64));
            }
            acc = acc.add(f, &x.pow(f, i).scale(f, f.inv(fact).unwrap()));
        }
        acc
    }

    #[test]
    fn exp_small_cases() {
        let f = FieldCtx::prime(5).unwrap();
        let s = SpringerMap::new(&f, 3).unwrap();
        assert_eq!(s.exp(&Matrix::zeros(3, 3)).unwrap(), Matrix::identity(3));
        let x = unit_sum(&f, 3, &[(0, 1), (1, 2)]);
        let g = s.exp(&x).unwrap();
        assert_eq!(g[(0, 2)], FieldElem(3));
        assert_eq!(g, Matrix::identity(3).add(&f, &x).add(&f, &x.mul(&f, &x).scale(&f, FieldElem(3))));
        assert_eq!(g, exp_direct(&f, &x));
    }

    #[test]
    fn exp_matches_direct_sum_randomly() {
        let f = FieldCtx::new(7, 2).unwrap();
        let s = SpringerMap::new(&f, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..30 {
            let x = random_nilpotent(&f, 4, &mut rng);
            assert_eq!(s.exp(&x).unwrap(), exp_direct(&f, &x));
        }
    }

    #[test]
    fn domain_errors() {
        let f = FieldCtx::prime(5).unwrap();
        assert_eq!(SpringerMap::new(&f, 7).unwrap_err(), SpringerError::PrimeTooSmall { p: 5, n: 7 });
        let s = SpringerMap::new(&f, 3).unwrap();
        assert_eq!(s.exp(&Matrix::identity(3)).unwrap_err(), SpringerError::NotNilpotent);
        assert_eq!(s.log(&Matrix::zeros(3, 3)).unwrap_err(), SpringerError::NotUnipotent);
        assert!(matches!(s.exp(&Matrix::zeros(2, 2)), Err(SpringerError::Shape { .. })));
    }

    #[test]
    fn log_cases() {
        let f = FieldCtx::prime(5).unwrap();
        let s = SpringerMap::new(&f, 4).unwrap();
        assert!(s.log(&Matrix::identity(4)).unwrap().is_zero());
        let j = unit_sum(&f, 4, &[(0, 1), (1, 2), (2, 3)]);
        assert_eq!(s.log(&s.exp(&j).unwrap()).unwrap(), j);
        let sq0 = unit_sum(&f, 4, &[(0, 2), (1, 3), (0, 3)]);
        let u = Matrix::identity(4).add(&f, &sq0);
        assert_eq!(s.log(&u).unwrap(), sq0);
    }

    #[test]
    fn power_basics() {
        let f = FieldCtx::new(5, 2).unwrap();
        let s = SpringerMap::new(&f, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = s.exp(&random_nilpotent(&f, 3, &mut rng)).unwrap();
        assert_eq!(s.power(&g, FieldElem::ONE).unwrap(), g);
        assert_eq!(s.power(&g, FieldElem::ZERO).unwrap(), Matrix::identity(3));
    }

    /// exp and log are inverse bijections on all of u_3(F_5).
    #[test]
    fn exhaustive_bijection_on_u3() {
        let f = FieldCtx::prime(5).unwrap();
        let s = SpringerMap::new(&f, 3).unwrap();
        let mut images = std::collections::HashSet::new();
        for a in f.elements() {
            for b in f.elements() {
                for c in f.elements() {
                    let mut x = Matrix::zeros(3, 3);
                    x[(0, 1)] = a;
                    x[(1, 2)] = b;
                    x[(0, 2)] = c;
                    let g = s.exp(&x).unwrap();
                    assert_eq!(s.log(&g).unwrap(), x);
                    images.insert(g);
                }
            }
        }
        assert_eq!(images.len(), 125);
    }

    #[test]
    fn suite_passes_gl3_f5() {
        let f = FieldCtx::prime(5).unwrap();
        let report = springer_identity_suite(&SpringerMap::new(&f, 3).unwrap(), 200, 1);
        assert!(report.all_passed(), "{report:?}");
        assert_eq!(report.checks.len(), 11);
    }

    /// exp with the X^2 term omitted.
    struct DroppedSquare(SpringerMap);

    impl ExpLog for DroppedSquare {
        fn field(&self) -> &FieldCtx {
            self.0.field()
        }
        fn n(&self) -> usize {
            self.0.n()
        }
        fn exp(&self, x: &Matrix) -> Result<Matrix, SpringerError> {
            let f = self.0.field();
            let full = self.0.exp(x)?;
            Ok(full.sub(f, &x.mul(f, x).scale(f, self.0.inverse_factorials()[2])))
        }
        fn log(&self, u: &Matrix) -> Result<Matrix, SpringerError> {
            self.0.log(u)
        }
    }

    #[test]
    fn corrupted_exp_is_caught_with_witness() {
        let f = FieldCtx::prime(5).unwrap();
        let bad = DroppedSquare(SpringerMap::new(&f, 3).unwrap());
        let report = springer_identity_suite(&bad, 100, 3);
        let stp = report.check("sum_to_product").unwrap();
        assert!(stp.failed > 0);
        assert!(stp.witness.is_some());
    }
}
