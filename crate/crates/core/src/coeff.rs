//! Complex scalars, roots of unity, binomial coefficients and the comparison
//! tolerances shared by every verifier.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scalar coefficient type.
pub type Coeff = Complex64;

/// Exact rational exponent / binomial argument.
pub type Rational = Ratio<i64>;

pub const ZERO: Coeff = Coeff::new(0.0, 0.0);
pub const ONE: Coeff = Coeff::new(1.0, 0.0);

#[inline]
pub fn real(re: f64) -> Coeff {
    Coeff::new(re, 0.0)
}

pub fn ensure_finite(c: Coeff, what: &str) -> Result<Coeff> {
    if c.re.is_finite() && c.im.is_finite() {
        Ok(c)
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}

/// Comparison thresholds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    /// Coefficient equality threshold.
    pub eps_eq: f64,
    /// Threshold on series residual norms.
    pub eps_residual: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            eps_eq: 1e-10,
            eps_residual: 1e-9,
        }
    }
}

impl Tolerance {
    pub fn new(eps_eq: f64, eps_residual: f64) -> Result<Self> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(eps_eq) || !ok(eps_residual) {
            return Err(Error::Domain(format!(
                "tolerances must be finite and strictly positive (eps_eq={eps_eq}, eps_residual={eps_residual})"
            )));
        }
        Ok(Tolerance {
            eps_eq,
            eps_residual,
        })
    }

    pub fn with_residual(self, eps_residual: f64) -> Result<Self> {
        Tolerance::new(self.eps_eq, eps_residual)
    }

    pub fn eq(&self, a: Coeff, b: Coeff) -> bool {
        (a - b).norm() <= self.eps_eq
    }

    pub fn is_zero(&self, a: Coeff) -> bool {
        a.norm() <= self.eps_eq
    }
}

/// `e^(2πi/p)`.
pub fn root_of_unity(p: u32) -> Result<Coeff> {
    if p == 0 {
        return Err(Error::Domain("root of unity of order 0".into()));
    }
    match p {
        1 => Ok(ONE),
        2 => Ok(real(-1.0)),
        4 => Ok(Coeff::new(0.0, 1.0)),
        _ => Ok(Coeff::from_polar(1.0, 2.0 * PI / p as f64)),
    }
}

/// Principal `p`-th root of `(-p·c_p1)^(-1)`, argument in `(-π/p, π/p]`.
pub fn gamma_root(c_p1: Coeff, p: u32) -> Result<Coeff> {
    if p == 0 {
        return Err(Error::Domain("p must be positive".into()));
    }
    ensure_finite(c_p1, "c_{p+1}")?;
    if c_p1 == ZERO {
        return Err(Error::Domain("c_{p+1}≠0 required".into()));
    }
    let w = (real(-(p as f64)) * c_p1).inv();
    if p == 1 {
        return Ok(w);
    }
    let (r, theta) = w.to_polar();
    ensure_finite(
        Coeff::from_polar(r.powf(1.0 / p as f64), theta / p as f64),
        "gamma_p",
    )
}

/// `m(m-1)…(m-i+1)/i!`, computed exactly and converted at the end.
pub fn binom(m: Rational, i: u32) -> Coeff {
    let m128 = Ratio::<i128>::new(*m.numer() as i128, *m.denom() as i128);
    let mut acc = Ratio::<i128>::from_integer(1);
    for j in 0..i as i128 {
        let factor = (m128 - Ratio::from_integer(j)) / Ratio::from_integer(j + 1);
        match checked_mul(&acc, &factor) {
            Some(v) => acc = v,
            None => return binom_float(m, i),
        }
    }
    real(*acc.numer() as f64 / *acc.denom() as f64)
}

fn checked_mul(a: &Ratio<i128>, b: &Ratio<i128>) -> Option<Ratio<i128>> {
    let num = a.numer().checked_mul(*b.numer())?;
    let den = a.denom().checked_mul(*b.denom())?;
    Some(Ratio::new(num, den))
}

// Overflow fallback for very large i.
fn binom_float(m: Rational, i: u32) -> Coeff {
    let mf = *m.numer() as f64 / *m.denom() as f64;
    let mut acc = 1.0;
    for j in 0..i {
        acc *= (mf - j as f64) / (j as f64 + 1.0);
    }
    real(acc)
}

/// Root-of-unity and `γ_p` data for a twisted family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RootData {
    pub p: u32,
    pub zeta_p: Coeff,
    pub gamma_p: Coeff,
}

impl RootData {
    pub fn new(p: u32, c_p1: Coeff) -> Result<Self> {
        Ok(RootData {
            p,
            zeta_p: root_of_unity(p)?,
            gamma_p: gamma_root(c_p1, p)?,
        })
    }

    /// The leading scalar coefficient `γ_p ζ_p^l` of the `l`-th module.
    pub fn seed(&self, l: u32) -> Coeff {
        self.gamma_p * self.zeta_p.powu(l)
    }

    /// Checks primitivity of `ζ_p` and `γ_p^p · (-p·c_p1) = 1`.
    pub fn validate(&self, c_p1: Coeff, tol: &Tolerance) -> bool {
        if !tol.eq(self.zeta_p.powu(self.p), ONE) {
            return false;
        }
        if (1..self.p).any(|k| tol.eq(self.zeta_p.powu(k), ONE)) {
            return false;
        }
        tol.eq(
            self.gamma_p.powu(self.p) * real(-(self.p as f64)) * c_p1,
            ONE,
        )
    }
}

/// Smallest `p ≤ max_order` with `alpha^p = 1`, if any.
pub fn order_of_root(alpha: Coeff, max_order: u32, tol: &Tolerance) -> Option<u32> {
    (1..=max_order).find(|&p| tol.eq(alpha.powu(p), ONE))
}

/// Serde adapter writing a [`Coeff`] as `[re, im]`.
pub mod as_pair {
    use super::Coeff;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(c: &Coeff, s: S) -> Result<S::Ok, S::Error> {
        [c.re, c.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Coeff, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(Coeff::new(re, im))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Coeff, b: Coeff) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn roots_of_unity_examples() {
        assert_eq!(root_of_unity(1).unwrap(), ONE);
        assert_eq!(root_of_unity(4).unwrap(), Coeff::new(0.0, 1.0));
        let z3 = root_of_unity(3).unwrap();
        // independent evaluation of e^(2πi/3)
        let expect = Coeff::new((2.0 * PI / 3.0).cos(), (2.0 * PI / 3.0).sin());
        assert!(close(z3, expect));
        assert!(close(z3, Coeff::new(-0.5, 3f64.sqrt() / 2.0)));
        assert!(close(z3.powu(3), ONE));
        assert!(!close(z3, ONE));
        assert!(root_of_unity(0).is_err());
    }

    #[test]
    fn roots_of_unity_are_primitive() {
        let tol = Tolerance::default();
        for p in 1..=12 {
            let z = root_of_unity(p).unwrap();
            assert!(tol.eq(z.powu(p), ONE));
            for k in 1..p {
                assert!(!tol.eq(z.powu(k), ONE), "p={p} k={k}");
            }
            assert_eq!(order_of_root(z, 64, &tol), Some(p));
        }
    }

    #[test]
    fn gamma_examples() {
        assert!(close(gamma_root(real(-0.5), 2).unwrap(), ONE));
        assert!(close(gamma_root(real(-1.0), 1).unwrap(), ONE));
        assert!(close(gamma_root(real(1.0), 1).unwrap(), real(-1.0)));
        let err = gamma_root(ZERO, 3).unwrap_err();
        assert!(err.to_string().contains("c_{p+1}"));
    }

    #[test]
    fn gamma_is_principal() {
        let c = Coeff::new(0.3, -1.7);
        for p in 1..=6 {
            let g = gamma_root(c, p).unwrap();
            assert!(close(g.powu(p) * real(-(p as f64)) * c, ONE));
            let arg = g.arg();
            assert!(arg > -PI / p as f64 - 1e-12 && arg <= PI / p as f64 + 1e-12);
            let data = RootData::new(p, c).unwrap();
            assert!(data.validate(c, &Tolerance::default()));
        }
    }

    #[test]
    fn binom_examples() {
        assert_eq!(binom(Rational::from_integer(-1), 3), real(-1.0));
        assert_eq!(binom(Rational::new(-1, 2), 1), real(-0.5));
        assert_eq!(binom(Rational::new(-1, 2), 2), real(0.375));
        assert_eq!(binom(Rational::new(2, 3), 0), ONE);
    }

    #[test]
    fn binom_pascal_and_vanishing() {
        for m in -6i64..8 {
            for i in 1..10u32 {
                let lhs = binom(Rational::from_integer(m), i);
                let rhs = binom(Rational::from_integer(m - 1), i)
                    + binom(Rational::from_integer(m - 1), i - 1);
                assert!(close(lhs, rhs), "m={m} i={i}");
                if m >= 0 && (m as u32) < i {
                    assert_eq!(lhs, ZERO);
                }
            }
        }
    }

    #[test]
    fn binom_large_index_falls_back() {
        // forces the overflow path; (-1/3 choose i) stays bounded by 1
        let v = binom(Rational::new(-1, 3), 60);
        assert!(v.re.is_finite() && v.re.abs() < 1.0 && v.re > 0.0);
    }

    #[test]
    fn tolerance_validation() {
        assert!(Tolerance::new(0.0, 1e-9).is_err());
        assert!(Tolerance::new(1e-10, f64::NAN).is_err());
        assert!(Tolerance::new(1e-10, 1e-9).is_ok());
    }
}
