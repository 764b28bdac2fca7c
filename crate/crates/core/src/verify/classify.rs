//! Existence of nontrivial finite-dimensional modules for a given `f` and `p`.

use serde::Serialize;

use crate::coeff::{Coeff, Tolerance, ZERO};
use crate::error::{Error, Result};
use crate::modules::Family;
use crate::polyalg::Poly;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Reason {
    Ok,
    DZero,
    DegFNot2,
    FNotC1tPlusCp1,
}

impl Reason {
    pub fn as_str(&self) -> &'static str {
        match self {
            Reason::Ok => "ok",
            Reason::DZero => "D_zero",
            Reason::DegFNot2 => "deg_f_not_2",
            Reason::FNotC1tPlusCp1 => "f_not_c1t_plus_cp1",
        }
    }
}

/// One parameter family: every `n ≥ 1`, each listed `l`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassifiedFamily {
    pub params: Family,
    pub l: Vec<u32>,
    pub n: &'static str,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassificationResult {
    pub exists: bool,
    #[serde(serialize_with = "ser_reason")]
    pub reason: Reason,
    pub families: Vec<ClassifiedFamily>,
}

fn ser_reason<S: serde::Serializer>(r: &Reason, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(r.as_str())
}

/// Roots of `a t² + b t + c` without cancellation.
pub fn solve_quadratic(a: Coeff, b: Coeff, c: Coeff) -> Result<(Coeff, Coeff)> {
    if a == ZERO {
        return Err(Error::Domain("leading coefficient is zero".into()));
    }
    let disc = (b * b - a * c * 4.0).sqrt();
    // pick the sign that adds b and ±disc constructively
    let s = if (b.conj() * disc).re >= 0.0 {
        disc
    } else {
        -disc
    };
    let q = -(b + s) / 2.0;
    if q == ZERO {
        return Ok((ZERO, ZERO));
    }
    Ok((q / a, c / q))
}

fn no(reason: Reason) -> ClassificationResult {
    ClassificationResult {
        exists: false,
        reason,
        families: Vec::new(),
    }
}

/// Decides whether `(C[t], f d/dt)` has finite-dimensional indecomposable
/// `g`-twisted modules with `Y(t, x) ≠ 0`, for `g` of order `p`.
pub fn classify(f: &Poly, p: u32, tol: &Tolerance) -> Result<ClassificationResult> {
    if p == 0 {
        return Err(Error::Domain("p must be positive".into()));
    }
    let f = f.cleaned(tol.eps_eq);
    let Some(deg) = f.degree() else {
        return Ok(no(Reason::DZero));
    };
    if p == 1 {
        if deg != 2 {
            return Ok(no(Reason::DegFNot2));
        }
        let c = f.coeff(2);
        let (alpha, beta) = solve_quadratic(c, f.coeff(1), f.coeff(0))?;
        return Ok(ClassificationResult {
            exists: true,
            reason: Reason::Ok,
            families: vec![ClassifiedFamily {
                params: Family::Untwisted { alpha, beta, c },
                l: vec![0],
                n: "all n >= 1",
            }],
        });
    }
    let top = p as usize + 1;
    let stray = (0..=deg).any(|k| k != 1 && k != top && f.coeff(k) != ZERO);
    if stray || f.coeff(top) == ZERO {
        return Ok(no(Reason::FNotC1tPlusCp1));
    }
    Ok(ClassificationResult {
        exists: true,
        reason: Reason::Ok,
        families: vec![ClassifiedFamily {
            params: Family::Twisted {
                c1: f.coeff(1),
                cp1: f.coeff(top),
            },
            l: (0..p).collect(),
            n: "all n >= 1",
        }],
    })
}
