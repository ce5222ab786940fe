//! Finite fields `F_p` and `F_{p^d}` with table-driven arithmetic.
//!
//! An element of `F_q` is stored as the integer `c_0 + c_1 p + ... + c_{d-1} p^{d-1}`
//! where `c_0 + c_1 x + ... + c_{d-1} x^{d-1}` is its reduced residue modulo the
//! field's defining polynomial. Every element therefore has exactly one encoding
//! and equality, ordering and hashing are structural.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest field order for which arithmetic tables are built.
pub const MAX_FIELD_ORDER: u32 = 2048;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("extension degree must be at least 1, got {0}")]
    BadDegree(u32),
    #[error("field order {p}^{d} exceeds the supported maximum {max}")]
    TooLarge { p: u32, d: u32, max: u32 },
}

/// An element of a finite field, encoded as an index in `[0, q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct FieldElem(pub u16);

impl FieldElem {
    pub const ZERO: FieldElem = FieldElem(0);
    pub const ONE: FieldElem = FieldElem(1);

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

struct FieldInner {
    p: u32,
    d: u32,
    q: u32,
    /// Monic modulus, constant term first, length `d + 1`.
    modulus: Vec<u32>,
    add: Vec<u16>,
    mul: Vec<u16>,
    neg: Vec<u16>,
    inv: Vec<u16>,
    frob: Vec<u16>,
}

/// A finite field context. Cloning is cheap (shared tables).
#[derive(Clone)]
pub struct FieldCtx {
    inner: Arc<FieldInner>,
}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldCtx")
            .field("p", &self.p())
            .field("d", &self.d())
            .field("modulus", &self.inner.modulus)
            .finish()
    }
}

impl PartialEq for FieldCtx {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.p == other.inner.p && self.inner.modulus == other.inner.modulus)
    }
}

impl Eq for FieldCtx {}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut i = 2u32;
    while i * i <= n {
        if n % i == 0 {
            return false;
        }
        i += 1;
    }
    true
}

// Polynomials over F_p as coefficient vectors, constant term first.

fn poly_trim(a: &mut Vec<u32>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn inv_mod_p(a: u32, p: u32) -> u32 {
    let mut result = 1u64;
    let mut base = a as u64 % p as u64;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            result = result * base % p as u64;
        }
        base = base * base % p as u64;
        e >>= 1;
    }
    result as u32
}

/// Remainder of `a` divided by a nonzero `b` over `F_p`.
fn poly_rem(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut r = a.to_vec();
    poly_trim(&mut r);
    let db = b.len() - 1;
    let lead_inv = inv_mod_p(b[db], p);
    while r.len() > db {
        let shift = r.len() - 1 - db;
        let factor = r[r.len() - 1] * lead_inv % p;
        for (i, &bc) in b.iter().enumerate() {
            let idx = i + shift;
            r[idx] = (r[idx] + p - factor * bc % p) % p;
        }
        poly_trim(&mut r);
    }
    r
}

/// Digits of `index` in base `p`, least significant first, `len` of them.
fn digits(mut index: u32, p: u32, len: usize) -> Vec<u32> {
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push(index % p);
        index /= p;
    }
    out
}

/// True iff the monic polynomial `f` of degree `d` has no monic factor of degree `1..=d/2`.
pub(crate) fn is_irreducible(f: &[u32], p: u32) -> bool {
    let d = f.len() - 1;
    for k in 1..=d / 2 {
        let count = p.pow(k as u32);
        for low in 0..count {
            let mut g = digits(low, p, k);
            g.push(1);
            if poly_rem(f, &g, p).is_empty() {
                return false;
            }
        }
    }
    true
}

/// Lexicographically smallest monic irreducible polynomial of degree `d` over `F_p`,
/// where the tuple `(c_0, ..., c_{d-1})` is compared with `c_0` most significant.
pub(crate) fn least_irreducible(p: u32, d: u32) -> Vec<u32> {
    let d = d as usize;
    let count = p.pow(d as u32);
    for idx in 0..count {
        // c_0 is the most significant digit of idx.
        let mut coeffs = digits(idx, p, d);
        coeffs.reverse();
        coeffs.push(1);
        if is_irreducible(&coeffs, p) {
            return coeffs;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

impl FieldCtx {
    /// Builds `F_{p^d}` using the lexicographically least monic irreducible modulus.
    pub fn new(p: u32, d: u32) -> Result<Self, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if d < 1 {
            return Err(FieldError::BadDegree(d));
        }
        let q = (p as u64).checked_pow(d).unwrap_or(u64::MAX);
        if q > MAX_FIELD_ORDER as u64 {
            return Err(FieldError::TooLarge { p, d, max: MAX_FIELD_ORDER });
        }
        let q = q as u32;
        let modulus = if d == 1 { vec![0, 1] } else { least_irreducible(p, d) };
        Ok(Self::with_modulus(p, d, q, modulus))
    }

    pub fn prime(p: u32) -> Result<Self, FieldError> {
        Self::new(p, 1)
    }

    fn with_modulus(p: u32, d: u32, q: u32, modulus: Vec<u32>) -> Self {
        let du = d as usize;
        let qs = q as usize;
        let encode = |c: &[u32]| -> u16 {
            let mut v = 0u32;
            for &ci in c.iter().rev() {
                v = v * p + ci;
            }
            v as u16
        };
        let coeffs: Vec<Vec<u32>> = (0..q).map(|i| digits(i, p, du)).collect();
        let mut add = vec![0u16; qs * qs];
        let mut mul = vec![0u16; qs * qs];
        for a in 0..qs {
            for b in 0..qs {
                let s: Vec<u32> = (0..du).map(|k| (coeffs[a][k] + coeffs[b][k]) % p).collect();
                add[a * qs + b] = encode(&s);
                let mut prod = vec![0u32; 2 * du - 1];
                for i in 0..du {
                    for j in 0..du {
                        prod[i + j] = (prod[i + j] + coeffs[a][i] * coeffs[b][j]) % p;
                    }
                }
                let mut r = if du == 1 { prod } else { poly_rem(&prod, &modulus, p) };
                r.resize(du, 0);
                mul[a * qs + b] = encode(&r);
            }
        }
        let mut neg = vec![0u16; qs];
        let mut inv = vec![0u16; qs];
        for a in 0..qs {
            for b in 0..qs {
                if add[a * qs + b] == 0 {
                    neg[a] = b as u16;
                }
                if mul[a * qs + b] == 1 {
                    inv[a] = b as u16;
                }
            }
        }
        let mut frob = vec![0u16; qs];
        for (a, slot) in frob.iter_mut().enumerate() {
            let mut acc = 1usize;
            for _ in 0..p {
                acc = mul[acc * qs + a] as usize;
            }
            *slot = acc as u16;
        }
        FieldCtx { inner: Arc::new(FieldInner { p, d, q, modulus, add, mul, neg, inv, frob }) }
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.inner.p
    }

    #[inline]
    pub fn d(&self) -> u32 {
        self.inner.d
    }

    #[inline]
    pub fn q(&self) -> u32 {
        self.inner.q
    }

    /// Monic modulus coefficients, constant term first (`[0, 1]` for a prime field).
    pub fn modulus(&self) -> &[u32] {
        &self.inner.modulus
    }

    pub fn is_prime_field(&self) -> bool {
        self.inner.d == 1
    }

    /// The prime subfield `F_p` as its own context.
    pub fn prime_subfield(&self) -> FieldCtx {
        FieldCtx::new(self.p(), 1).expect("p is prime")
    }

    #[inline]
    pub fn add(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        FieldElem(self.inner.add[a.index() * self.inner.q as usize + b.index()])
    }

    #[inline]
    pub fn sub(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        FieldElem(self.inner.mul[a.index() * self.inner.q as usize + b.index()])
    }

    #[inline]
    pub fn neg(&self, a: FieldElem) -> FieldElem {
        FieldElem(self.inner.neg[a.index()])
    }

    /// Multiplicative inverse; `None` for zero.
    #[inline]
    pub fn inv(&self, a: FieldElem) -> Option<FieldElem> {
        if a.is_zero() {
            None
        } else {
            Some(FieldElem(self.inner.inv[a.index()]))
        }
    }

    /// `x ↦ x^p`.
    #[inline]
    pub fn frobenius(&self, a: FieldElem) -> FieldElem {
        FieldElem(self.inner.frob[a.index()])
    }

    pub fn pow(&self, a: FieldElem, mut e: u64) -> FieldElem {
        let mut result = FieldElem::ONE;
        let mut base = a;
        while e > 0 {
            if e & 1 == 1 {
                result = self.mul(result, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        result
    }

    /// Image of the integer `k` under `Z -> F_p ⊂ F_q`.
    pub fn from_int(&self, k: i64) -> FieldElem {
        FieldElem(k.rem_euclid(self.p() as i64) as u16)
    }

    /// Element with the given coefficients in the power basis `1, x, ..., x^{d-1}`.
    pub fn from_coeffs(&self, coeffs: &[u32]) -> FieldElem {
        assert!(coeffs.len() <= self.d() as usize);
        let p = self.p();
        let mut v = 0u32;
        for &c in coeffs.iter().rev() {
            v = v * p + c % p;
        }
        FieldElem(v as u16)
    }

    /// Coefficients of `a` in the power basis, length `d`.
    pub fn coeffs(&self, a: FieldElem) -> Vec<u32> {
        digits(a.0 as u32, self.p(), self.d() as usize)
    }

    /// Returns the element encoded by `index`, if in range.
    pub fn elem(&self, index: u32) -> Option<FieldElem> {
        (index < self.q()).then_some(FieldElem(index as u16))
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElem> {
        (0..self.q()).map(|i| FieldElem(i as u16))
    }

    pub fn nonzero_elements(&self) -> impl Iterator<Item = FieldElem> {
        (1..self.q()).map(|i| FieldElem(i as u16))
    }

    /// The class of `x`, which generates `F_q` over `F_p` (equals 1 when `d = 1`).
    pub fn field_generator(&self) -> FieldElem {
        if self.d() == 1 {
            FieldElem::ONE
        } else {
            self.from_coeffs(&[0, 1])
        }
    }

    pub fn in_prime_subfield(&self, a: FieldElem) -> bool {
        (a.0 as u32) < self.p()
    }

    /// Multiplicative order of a nonzero element.
    pub fn order(&self, a: FieldElem) -> Option<u32> {
        if a.is_zero() {
            return None;
        }
        let mut acc = a;
        let mut k = 1;
        while acc != FieldElem::ONE {
            acc = self.mul(acc, a);
            k += 1;
        }
        Some(k)
    }

    /// Least element (in encoding order) generating the multiplicative group.
    pub fn primitive_element(&self) -> FieldElem {
        self.nonzero_elements()
            .find(|&a| self.order(a) == Some(self.q() - 1))
            .expect("multiplicative group of a finite field is cyclic")
    }

    /// A coarse integer lift: the 'balanced' representative of a prime-field element.
    pub fn balanced_lift(&self, a: FieldElem) -> i64 {
        let v = a.0 as i64;
        let p = self.p() as i64;
        if v > p / 2 {
            v - p
        } else {
            v
        }
    }
}
