//! The algebra `C[t]` with a derivation `D = f(t) d/dt` and a finite-order
//! automorphism `g(t) = αt + β`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::coeff::{order_of_root, root_of_unity, Coeff, Tolerance, ONE, ZERO};
use crate::error::{Error, Result};
use crate::series::{Coefficient, Series};

/// Polynomial with coefficients listed low to high.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Poly {
    coeffs: Vec<Coeff>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<Coeff>) -> Self {
        while coeffs.last() == Some(&ZERO) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: Coeff) -> Self {
        Poly::new(vec![c])
    }

    /// `c·t^k`.
    pub fn monomial(k: usize, c: Coeff) -> Self {
        let mut v = vec![ZERO; k + 1];
        v[k] = c;
        Poly::new(v)
    }

    pub fn t() -> Self {
        Poly::monomial(1, ONE)
    }

    pub fn coeffs(&self) -> &[Coeff] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Coeff {
        self.coeffs.get(k).copied().unwrap_or(ZERO)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Exact degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Drops coefficients of modulus at most `eps`.
    pub fn cleaned(&self, eps: f64) -> Self {
        Poly::new(
            self.coeffs
                .iter()
                .map(|c| if c.norm() <= eps { ZERO } else { *c })
                .collect(),
        )
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) + other.coeff(k)).collect())
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.scale(-ONE))
    }

    pub fn scale(&self, c: Coeff) -> Poly {
        Poly::new(self.coeffs.iter().map(|v| v * c).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![ZERO; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    /// `d/dt`.
    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * k as f64)
                .collect(),
        )
    }

    pub fn eval(&self, t: Coeff) -> Coeff {
        self.coeffs.iter().rev().fold(ZERO, |acc, c| acc * t + c)
    }

    /// `P(a t + b)`.
    pub fn compose_linear(&self, a: Coeff, b: Coeff) -> Poly {
        let inner = Poly::new(vec![b, a]);
        self.coeffs.iter().rev().fold(Poly::zero(), |acc, c| {
            acc.mul(&inner).add(&Poly::constant(*c))
        })
    }

    /// `P(S)` by Horner's rule; `S` may carry matrix coefficients.
    pub fn eval_series<C: Coefficient>(&self, s: &Series<C>) -> Result<Series<C>> {
        let shape = s.shape();
        let ram = s.ram();
        let mut acc = Series::<C>::zero(ram, shape, crate::series::UNBOUNDED);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(s)?;
            if *c != ZERO {
                let term =
                    Series::constant(ram, C::identity(shape).scale(*c), crate::series::UNBOUNDED);
                acc = acc.add(&term)?;
            }
        }
        Ok(acc)
    }

    /// `P(S)` as `Σ c_k S^k` for a series with mutually commuting
    /// coefficients, using the sharper power windows that this allows.
    pub fn eval_commuting<C: Coefficient>(&self, s: &Series<C>) -> Result<Series<C>> {
        let shape = s.shape();
        let ram = s.ram();
        let mut acc = Series::<C>::zero(ram, shape, crate::series::UNBOUNDED);
        let Some(deg) = self.degree() else {
            return Ok(acc);
        };
        let powers = s.commuting_powers(deg)?;
        for (c, pw) in self.coeffs.iter().zip(&powers) {
            if *c != ZERO {
                acc = acc.add(&pw.scale(*c))?;
            }
        }
        Ok(acc)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if *c == ZERO {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "({c})")?,
                1 => write!(f, "({c})t")?,
                _ => write!(f, "({c})t^{k}")?,
            }
        }
        Ok(())
    }
}

impl Serialize for Poly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<[f64; 2]> = self.coeffs.iter().map(|c| [c.re, c.im]).collect();
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Poly {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v: Vec<[f64; 2]> = Vec::deserialize(d)?;
        Ok(Poly::new(
            v.iter().map(|c| Coeff::new(c[0], c[1])).collect(),
        ))
    }
}

/// Algebra automorphism `t ↦ a·t + b` of `C[t]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Affine {
    pub a: Coeff,
    pub b: Coeff,
}

impl Affine {
    pub const IDENTITY: Affine = Affine { a: ONE, b: ZERO };

    pub fn new(a: Coeff, b: Coeff) -> Result<Self> {
        if a == ZERO {
            return Err(Error::Domain("t ↦ b is not an automorphism".into()));
        }
        Ok(Affine { a, b })
    }

    /// `self ∘ other` as algebra maps: `(self ∘ other)(t) = other(t)` with `t`
    /// replaced by `self(t)`.
    pub fn compose(&self, other: &Affine) -> Affine {
        Affine {
            a: other.a * self.a,
            b: other.a * self.b + other.b,
        }
    }

    pub fn inverse(&self) -> Affine {
        let ai = self.a.inv();
        Affine {
            a: ai,
            b: -self.b * ai,
        }
    }

    pub fn apply(&self, p: &Poly) -> Poly {
        p.compose_linear(self.a, self.b)
    }

    /// The transported derivation `φ D φ⁻¹` for `D = f d/dt`: its `f` is
    /// `f(φ(t)) / a`.
    pub fn transport_derivation(&self, f: &Poly) -> Poly {
        self.apply(f).scale(self.a.inv())
    }
}

/// `(C[t], D = f d/dt, g)` with `g` of order `order_p`.
#[derive(Clone, Debug, PartialEq)]
pub struct DerivedAlgebra {
    pub f: Poly,
    pub g_alpha: Coeff,
    pub g_beta: Coeff,
    pub order_p: u32,
}

impl DerivedAlgebra {
    pub fn untwisted(f: Poly) -> Self {
        DerivedAlgebra {
            f,
            g_alpha: ONE,
            g_beta: ZERO,
            order_p: 1,
        }
    }

    /// `g(t) = ζ_p t`, which preserves `Ct`.
    pub fn twisted(f: Poly, p: u32) -> Result<Self> {
        Ok(DerivedAlgebra {
            f,
            g_alpha: root_of_unity(p)?,
            g_beta: ZERO,
            order_p: p,
        })
    }

    /// Validates that `g(t) = αt + β` has exact order `p`.
    pub fn with_automorphism(f: Poly, alpha: Coeff, beta: Coeff, tol: &Tolerance) -> Result<Self> {
        let norm = normalize_automorphism(alpha, beta, tol)?;
        Ok(DerivedAlgebra {
            f,
            g_alpha: alpha,
            g_beta: beta,
            order_p: norm.order_p,
        })
    }

    pub fn g(&self) -> Affine {
        Affine {
            a: self.g_alpha,
            b: self.g_beta,
        }
    }

    pub fn preserves_ct(&self, tol: &Tolerance) -> bool {
        tol.is_zero(self.g_beta)
    }

    /// `D a = f · da/dt`.
    pub fn derive(&self, a: &Poly) -> Poly {
        self.f.mul(&a.derivative())
    }
}

/// `D^k a`.
pub fn apply_d(alg: &DerivedAlgebra, a: &Poly, k: usize) -> Poly {
    (0..k).fold(a.clone(), |acc, _| alg.derive(&acc))
}

/// Coefficients of `Y(a,x)b = Σ_{i=0}^{hi} (D^i a) b x^i / i!`.
pub fn vertex_y_on_algebra(alg: &DerivedAlgebra, a: &Poly, b: &Poly, hi: usize) -> Vec<Poly> {
    let mut out = Vec::with_capacity(hi + 1);
    let mut d = a.clone();
    let mut fact = 1.0;
    for i in 0..=hi {
        if i > 0 {
            d = alg.derive(&d);
            fact *= i as f64;
        }
        out.push(d.mul(b).scale(Coeff::new(1.0 / fact, 0.0)));
    }
    out
}

/// Mode `a_k b` of the vertex operation on `C[t]`: zero for `k ≥ 0`,
/// `(D^i a) b / i!` for `k = -1-i`.
pub fn algebra_mode(alg: &DerivedAlgebra, a: &Poly, k: i64, b: &Poly) -> Poly {
    if k >= 0 {
        return Poly::zero();
    }
    let i = (-1 - k) as usize;
    let fact: f64 = (1..=i).map(|v| v as f64).product();
    apply_d(alg, a, i).mul(b).scale(Coeff::new(1.0 / fact, 0.0))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalizedAutomorphism {
    /// `h(t) = (α-1)t + β` (identity when `p = 1`).
    pub h: Affine,
    /// `h⁻¹ g h (t) = ξ t`.
    pub xi: Coeff,
    pub order_p: u32,
}

/// Largest order searched when recognising `α` as a root of unity.
pub const MAX_AUTOMORPHISM_ORDER: u32 = 1024;

/// Conjugates `g(t) = αt + β` of finite order to `t ↦ ξt`.
pub fn normalize_automorphism(
    alpha: Coeff,
    beta: Coeff,
    tol: &Tolerance,
) -> Result<NormalizedAutomorphism> {
    let g = Affine::new(alpha, beta)?;
    let Some(p) = order_of_root(alpha, MAX_AUTOMORPHISM_ORDER, tol) else {
        return Err(Error::Domain(format!(
            "α={alpha} is not a root of unity; g has infinite order"
        )));
    };
    if p == 1 {
        if !tol.is_zero(beta) {
            return Err(Error::Domain(
                "g(t) = t + β with β≠0 has infinite order".into(),
            ));
        }
        return Ok(NormalizedAutomorphism {
            h: Affine::IDENTITY,
            xi: ONE,
            order_p: 1,
        });
    }
    let h = Affine::new(alpha - ONE, beta)?;
    let conj = h.inverse().compose(&g).compose(&h);
    if !tol.eq(conj.a, alpha) || !tol.is_zero(conj.b) {
        return Err(Error::Internal(format!(
            "conjugation produced {conj:?}, expected ξt"
        )));
    }
    Ok(NormalizedAutomorphism {
        h,
        xi: alpha,
        order_p: p,
    })
}

/// `t^k ∈ C[t]^(k mod p)`.
pub fn grade_of(alg: &DerivedAlgebra, mono_deg: usize) -> u32 {
    (mono_deg % alg.order_p as usize) as u32
}

/// Checks that `D` maps `C[t^p]` into itself, via `D(t^p)`.
pub fn fixed_subalgebra_is_d_invariant(alg: &DerivedAlgebra, tol: &Tolerance) -> bool {
    let p = alg.order_p as usize;
    let d = alg.derive(&Poly::monomial(p, ONE));
    d.coeffs()
        .iter()
        .enumerate()
        .all(|(k, c)| k % p == 0 || tol.is_zero(*c))
}

/// `σ(t) = t/c + α`.
pub fn sigma(alpha: Coeff, c: Coeff) -> Result<Affine> {
    if c == ZERO {
        return Err(Error::Domain("σ needs c≠0".into()));
    }
    Affine::new(c.inv(), alpha)
}

/// Transports `D = c(t-α)(t-β) d/dt` by `σ`; the result is
/// `(c(α-β)t + t²) d/dt`.
pub fn sigma_transport(alpha: Coeff, beta: Coeff, c: Coeff) -> Result<DerivedAlgebra> {
    let s = sigma(alpha, c)?;
    let f = untwisted_derivation(alpha, beta, c);
    Ok(DerivedAlgebra::untwisted(s.transport_derivation(&f)))
}

/// `c(t-α)(t-β)`.
pub fn untwisted_derivation(alpha: Coeff, beta: Coeff, c: Coeff) -> Poly {
    Poly::new(vec![-alpha, ONE])
        .mul(&Poly::new(vec![-beta, ONE]))
        .scale(c)
}

/// `c₁t + c_{p+1}t^{p+1}`.
pub fn twisted_derivation(p: u32, c1: Coeff, cp1: Coeff) -> Poly {
    Poly::monomial(1, c1).add(&Poly::monomial(p as usize + 1, cp1))
}
