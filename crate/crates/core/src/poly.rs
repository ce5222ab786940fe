//! Polynomials with exact rational coefficients and interpolation through
//! integer data points.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FitError {
    #[error("need at least {needed} points for degree bound {bound}, got {got}")]
    TooFewPoints { needed: usize, got: usize, bound: usize },
    #[error("duplicate x value {0}")]
    DuplicateX(i64),
    #[error("held-out point ({x}, {y}) does not lie on the fitted polynomial (value {value})")]
    Mismatch { x: i64, y: String, value: String },
}

/// Polynomial with exact rational coefficients, constant term first.
/// The leading coefficient is nonzero unless the polynomial is zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RationalPoly {
    coeffs: Vec<BigRational>,
}

impl RationalPoly {
    pub fn zero() -> Self {
        RationalPoly { coeffs: Vec::new() }
    }

    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        RationalPoly { coeffs }
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigRational::from_integer(BigInt::from(c))).collect())
    }

    /// The monomial `x`.
    pub fn x() -> Self {
        Self::from_ints(&[0, 1])
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn has_integer_coeffs(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_integer())
    }

    /// Integer coefficients, if all coefficients are integers fitting in `i64`.
    pub fn integer_coeffs(&self) -> Option<Vec<i64>> {
        self.coeffs.iter().map(|c| if c.is_integer() { c.to_integer().to_i64() } else { None }).collect()
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_int(&self, x: i64) -> BigRational {
        self.eval(&BigRational::from_integer(BigInt::from(x)))
    }

    pub fn add(&self, other: &RationalPoly) -> RationalPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let zero = BigRational::zero();
        let coeffs = (0..n)
            .map(|i| self.coeffs.get(i).unwrap_or(&zero) + other.coeffs.get(i).unwrap_or(&zero))
            .collect();
        RationalPoly::new(coeffs)
    }

    pub fn mul(&self, other: &RationalPoly) -> RationalPoly {
        if self.is_zero() || other.is_zero() {
            return RationalPoly::zero();
        }
        let mut coeffs = vec![BigRational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        RationalPoly::new(coeffs)
    }

    pub fn scale(&self, c: &BigRational) -> RationalPoly {
        RationalPoly::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    /// Product of the given polynomials.
    pub fn product(factors: &[RationalPoly]) -> RationalPoly {
        factors.iter().fold(RationalPoly::from_ints(&[1]), |acc, f| acc.mul(f))
    }

    /// Human-readable form in the variable `var`, highest degree first.
    pub fn display_in(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let negative = c.is_negative();
            let mag = c.abs();
            if out.is_empty() {
                if negative {
                    out.push('-');
                }
            } else {
                out.push_str(if negative { " - " } else { " + " });
            }
            let mono = match k {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{k}"),
            };
            if mono.is_empty() {
                out.push_str(&mag.to_string());
            } else if mag.is_one() {
                out.push_str(&mono);
            } else {
                out.push_str(&format!("{mag}*{mono}"));
            }
        }
        out
    }
}

impl fmt::Display for RationalPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_in("p"))
    }
}

impl Serialize for RationalPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let strs: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        strs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for RationalPoly {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let strs = Vec::<String>::deserialize(d)?;
        let coeffs = strs
            .iter()
            .map(|s| s.parse::<BigRational>().map_err(serde::de::Error::custom))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(RationalPoly::new(coeffs))
    }
}

/// Interpolates through the first `degree_bound + 1` points with exact rational
/// arithmetic (Newton divided differences) and verifies the remaining points.
pub fn lagrange_fit(points: &[(i64, BigInt)], degree_bound: usize) -> Result<RationalPoly, FitError> {
    let needed = degree_bound + 1;
    if points.len() < needed {
        return Err(FitError::TooFewPoints { needed, got: points.len(), bound: degree_bound });
    }
    for (i, a) in points.iter().enumerate() {
        if points[..i].iter().any(|b| b.0 == a.0) {
            return Err(FitError::DuplicateX(a.0));
        }
    }
    let xs: Vec<BigRational> =
        points[..needed].iter().map(|(x, _)| BigRational::from_integer(BigInt::from(*x))).collect();
    let mut table: Vec<BigRational> =
        points[..needed].iter().map(|(_, y)| BigRational::from_integer(y.clone())).collect();
    // In-place divided differences: table[k] becomes f[x_0..x_k].
    for level in 1..needed {
        for k in (level..needed).rev() {
            table[k] = (&table[k] - &table[k - 1]) / (&xs[k] - &xs[k - level]);
        }
    }
    // Expand Newton form from the innermost coefficient outwards.
    let mut poly = RationalPoly::new(vec![table[needed - 1].clone()]);
    for k in (0..needed - 1).rev() {
        let factor = RationalPoly::new(vec![-xs[k].clone(), BigRational::one()]);
        poly = poly.mul(&factor).add(&RationalPoly::new(vec![table[k].clone()]));
    }
    for (x, y) in &points[needed..] {
        let value = poly.eval_int(*x);
        if value != BigRational::from_integer(y.clone()) {
            return Err(FitError::Mismatch { x: *x, y: y.to_string(), value: value.to_string() });
        }
    }
    Ok(poly)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pts(v: &[(i64, i64)]) -> Vec<(i64, BigInt)> {
        v.iter().map(|&(x, y)| (x, BigInt::from(y))).collect()
    }

    #[test]
    fn linear_fit_is_p_plus_one() {
        let poly = lagrange_fit(&pts(&[(5, 6), (7, 8), (11, 12)]), 1).unwrap();
        assert_eq!(poly, RationalPoly::from_ints(&[1, 1]));
        assert_eq!(poly.to_string(), "p + 1");
    }

    #[test]
    fn constant_fit() {
        let poly = lagrange_fit(&pts(&[(5, 31)]), 0).unwrap();
        assert_eq!(poly, RationalPoly::from_ints(&[31]));
    }

    #[test]
    fn quartic_fit_recovers_product() {
        // (p^2+p+1)(p+1)(p-1), evaluated independently.
        let f = |p: i64| (p * p + p + 1) * (p + 1) * (p - 1);
        let data: Vec<(i64, i64)> = [5, 7, 11, 13, 17].iter().map(|&p| (p, f(p))).collect();
        assert_eq!(data, vec![(5, 744), (7, 2736), (11, 15960), (13, 30744), (17, 88416)]);
        let poly = lagrange_fit(&pts(&data), 4).unwrap();
        let expected = RationalPoly::product(&[
            RationalPoly::from_ints(&[1, 1, 1]),
            RationalPoly::from_ints(&[1, 1]),
            RationalPoly::from_ints(&[-1, 1]),
        ]);
        assert_eq!(poly, expected);
        assert_eq!(poly.to_string(), "p^4 + p^3 - p - 1");
    }

    #[test]
    fn held_out_point_mismatch_is_reported() {
        let err = lagrange_fit(&pts(&[(5, 6), (7, 8), (11, 13)]), 1).unwrap_err();
        assert!(matches!(err, FitError::Mismatch { x: 11, .. }));
        assert!(matches!(lagrange_fit(&pts(&[(5, 6)]), 1), Err(FitError::TooFewPoints { .. })));
        assert!(matches!(lagrange_fit(&pts(&[(5, 6), (5, 6)]), 1), Err(FitError::DuplicateX(5))));
    }

    #[test]
    fn rational_coefficients_survive() {
        // y = x(x+1)/2
        let data: Vec<(i64, i64)> = (1..5).map(|x| (x, x * (x + 1) / 2)).collect();
        let poly = lagrange_fit(&pts(&data), 2).unwrap();
        assert!(!poly.has_integer_coeffs());
        assert_eq!(poly.to_string(), "1/2*p^2 + 1/2*p");
    }

    proptest! {
        #[test]
        fn fit_reproduces_inputs(ys in proptest::collection::vec(-1_000_000i64..1_000_000, 1..7)) {
            let data: Vec<(i64, BigInt)> =
                ys.iter().enumerate().map(|(i, &y)| (3 * i as i64 + 2, BigInt::from(y))).collect();
            let poly = lagrange_fit(&data, data.len() - 1).unwrap();
            for (x, y) in &data {
                prop_assert_eq!(poly.eval_int(*x), BigRational::from_integer(y.clone()));
            }
        }
    }
}
