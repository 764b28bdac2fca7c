//! Verification of constructed modules: the structure conditions on `T(x)`,
//! the module axioms on polynomial generators, indecomposability and the
//! generation check for the nilpotent datum.

mod classify;
mod oracle;

pub use classify::{classify, solve_quadratic, ClassificationResult, ClassifiedFamily, Reason};
pub use oracle::{oracle_compare, solve_band_recursion, solve_scalar_ode, OracleReport};

use std::collections::BTreeMap;

use serde::Serialize;

use crate::coeff::{Rational, Tolerance, ONE};
use crate::error::{Error, Result};
use crate::matser::{
    is_single_jordan_profile, nilpotent_part, rank_profile, MatSeries, MatrixSpan,
};
use crate::modules::{evaluate_y, Family, TwistedModule};
use crate::polyalg::Poly;
use crate::series::{Coefficient, Mat, Series};

fn fmt_exponent(num: i64, ram: u32) -> String {
    let q = Rational::new(num, ram as i64);
    if q.is_integer() {
        q.to_integer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConditionI {
    pub pass: bool,
    /// Lowest exponent with a nonzero coefficient, e.g. `"-3/2"`.
    pub lowest_exponent: Option<String>,
    /// Whether some exponent is negative, i.e. `T ∉ (End M)[[x^(1/p)]]`.
    pub has_negative_exponent: bool,
    /// Whether every exponent lies in `(1/p)Z`.
    pub on_lattice: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConditionII {
    pub pass: bool,
    pub max_commutator: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConditionIII {
    pub pass: bool,
    pub max_residual: f64,
    /// Last exponent at which the residual is determined.
    pub window_hi: String,
    /// `(exponent, residual)` for every exponent with a nonzero residual.
    pub by_exponent: Vec<(String, f64)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Indecomposability {
    pub indecomposable: bool,
    pub rank_profile: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub pass: bool,
    pub max_residual: f64,
    pub eps_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub condition_i: Option<ConditionI>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub condition_ii: Option<ConditionII>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub condition_iii: Option<ConditionIII>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub axiom_results: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub indecomposable: Option<Indecomposability>,
}

impl VerificationReport {
    fn empty(tol: &Tolerance) -> Self {
        VerificationReport {
            pass: true,
            max_residual: 0.0,
            eps_residual: tol.eps_residual,
            condition_i: None,
            condition_ii: None,
            condition_iii: None,
            axiom_results: BTreeMap::new(),
            indecomposable: None,
        }
    }

    fn record(&mut self, residual: f64) {
        self.max_residual = self.max_residual.max(residual);
        // NaN residuals fail too
        if residual.partial_cmp(&self.eps_residual) != Some(std::cmp::Ordering::Less) {
            self.pass = false;
        }
    }

    /// Folds another report into this one.
    pub fn merge(&mut self, other: VerificationReport) {
        self.pass &= other.pass;
        self.max_residual = self.max_residual.max(other.max_residual);
        if other.condition_i.is_some() {
            self.condition_i = other.condition_i;
        }
        if other.condition_ii.is_some() {
            self.condition_ii = other.condition_ii;
        }
        if other.condition_iii.is_some() {
            self.condition_iii = other.condition_iii;
        }
        self.axiom_results.extend(other.axiom_results);
        if let Some(ind) = other.indecomposable {
            self.pass &= ind.indecomposable;
            self.indecomposable = Some(ind);
        }
    }
}

/// Largest coefficient difference on the common window. Fails when the
/// window holds no determined coefficient of either side.
fn window_diff<C: Coefficient>(a: &Series<C>, b: &Series<C>) -> Result<f64> {
    let (d, hi, ram) = a.max_diff(b)?;
    let lows = [a, b]
        .iter()
        .filter(|s| !s.is_zero())
        .map(|s| s.lo() * (ram / s.ram()) as i64)
        .min();
    if let Some(lo) = lows {
        if hi < lo {
            return Err(Error::WindowExhausted {
                achievable_num: hi,
                ram,
            });
        }
    }
    Ok(d)
}

/// Conditions (i)–(iii) on `T(x)`: exponents in `(1/p)Z`, commuting modes,
/// and `dT/dx = f(T)`.
pub fn check_lemma_conditions(
    t: &MatSeries,
    f: &Poly,
    p: u32,
    tol: &Tolerance,
) -> Result<VerificationReport> {
    if p == 0 {
        return Err(Error::Domain("p must be positive".into()));
    }
    let mut report = VerificationReport::empty(tol);
    let ram = t.ram();
    let eps = tol.eps_eq * t.max_norm().max(1.0);

    // (i): with ram | p every exponent is in (1/p)Z; otherwise inspect them
    let on_lattice = p.is_multiple_of(ram)
        || t.iter()
            .all(|(num, c)| Coefficient::norm(c) <= eps || (num * p as i64) % ram as i64 == 0);
    let lowest = t.leading_num(eps);
    report.condition_i = Some(ConditionI {
        pass: on_lattice,
        lowest_exponent: lowest.map(|n| fmt_exponent(n, ram)),
        has_negative_exponent: lowest.is_some_and(|n| n < 0),
        on_lattice,
    });
    report.pass &= on_lattice;

    // (ii)
    let comm = t.max_commutator();
    report.condition_ii = Some(ConditionII {
        pass: comm < tol.eps_residual,
        max_commutator: comm,
    });
    report.record(comm);

    // (iii): the commuting-power windows are only sound when (ii) holds,
    // and a failed (ii) already fails the report
    let lhs = t.derivative();
    let rhs = f.eval_commuting(t)?;
    let residual = lhs.sub(&rhs)?;
    let hi = residual.hi();
    if !t.is_zero() {
        let deg = f.degree().unwrap_or(0).max(1) as i64;
        let lowest_possible = (deg * t.lo()).min(t.lo() - ram as i64);
        if hi < lowest_possible {
            return Err(Error::WindowExhausted {
                achievable_num: hi,
                ram,
            });
        }
    }
    let by_exponent: Vec<(String, f64)> = residual
        .iter()
        .map(|(num, c)| (fmt_exponent(num, ram), Coefficient::norm(c)))
        .filter(|(_, r)| *r > 0.0)
        .collect();
    let max_res = residual.max_norm();
    report.condition_iii = Some(ConditionIII {
        pass: max_res < tol.eps_residual,
        max_residual: max_res,
        window_hi: if residual.is_exact() {
            "exact".into()
        } else {
            fmt_exponent(hi, ram)
        },
        by_exponent,
    });
    report.record(max_res);
    Ok(report)
}

fn monomial(k: usize) -> Poly {
    Poly::monomial(k, ONE)
}

/// Axioms (M1)–(M5) on the generators `t^j`, `j + k ≤ degmax`.
///
/// * M1: `Y(t^k, x)` has exponents in `−k/p + Z`
/// * M2: `Y(1, x) = E`
/// * M3: `Y(t^j, x)` and `Y(t^k, x)` commute as series
/// * M4: `Y(t^(j+k), x) = Y(t^j, x) Y(t^k, x)`
/// * M5: `Y(D t^j, x) = d/dx Y(t^j, x)`
pub fn check_module_axioms(
    module: &TwistedModule,
    degmax: usize,
    tol: &Tolerance,
) -> Result<VerificationReport> {
    if degmax == 0 {
        return Err(Error::Domain("degmax must be at least 1".into()));
    }
    let mut report = VerificationReport::empty(tol);
    let n = module.n();
    let p = module.p() as i64;
    let alg = module.spec().algebra()?;
    let ys: Vec<MatSeries> = (0..=degmax)
        .map(|k| evaluate_y(module, &monomial(k)))
        .collect::<Result<_>>()?;

    let twisted_grading = matches!(module.spec().family, Family::Twisted { .. });
    for (k, y) in ys.iter().enumerate() {
        let ram = y.ram() as i64;
        let mut off = 0.0f64;
        if twisted_grading {
            // numerator/ram + k/p ∈ Z  ⇔  (num·p + k·ram) ≡ 0 mod ram·p
            for (num, c) in y.iter() {
                if (num * p + k as i64 * ram).rem_euclid(ram * p) != 0 {
                    off = off.max(Coefficient::norm(c));
                }
            }
        }
        report.axiom_results.insert(format!("M1[{k}]"), off);
        report.record(off);
    }

    let e = MatSeries::constant_matrix(ys[0].ram(), Mat::identity(n, n));
    let m2 = window_diff(&ys[0], &e)?;
    report.axiom_results.insert("M2".into(), m2);
    report.record(m2);

    for j in 1..degmax {
        for k in j..=degmax - j {
            let a = ys[j].mul(&ys[k])?;
            let b = ys[k].mul(&ys[j])?;
            let m3 = window_diff(&a, &b)?;
            report.axiom_results.insert(format!("M3[{j},{k}]"), m3);
            report.record(m3);
            let m4 = window_diff(&ys[j + k], &a)?;
            report.axiom_results.insert(format!("M4[{j},{k}]"), m4);
            report.record(m4);
        }
    }

    for (j, y) in ys.iter().enumerate().take(degmax + 1).skip(1) {
        let d = alg.derive(&monomial(j));
        let lhs = evaluate_y(module, &d)?;
        let m5 = window_diff(&lhs, &y.derivative())?;
        report.axiom_results.insert(format!("M5[{j}]"), m5);
        report.record(m5);
    }
    Ok(report)
}

/// The mode `T_(−1−1/p)` (twisted) or `T_(−2)` (untwisted).
pub fn pole_mode(module: &TwistedModule) -> Result<Mat> {
    module
        .t()
        .mode(module.pole_exponent())
        .ok_or_else(|| Error::WindowExhausted {
            achievable_num: module.t().hi(),
            ram: module.t().ram(),
        })
}

/// `H` = nilpotent part of the pole mode, with its rank profile.
pub fn check_indecomposable(module: &TwistedModule, tol: &Tolerance) -> Result<Indecomposability> {
    let h = nilpotent_part(&pole_mode(module)?, tol)?;
    let profile = rank_profile(&h, tol.eps_eq);
    Ok(Indecomposability {
        indecomposable: is_single_jordan_profile(&profile),
        rank_profile: profile,
    })
}

/// Relative distance of `H` from the unital algebra generated by the stored
/// modes of `T`.
pub fn generation_residual(module: &TwistedModule, tol: &Tolerance) -> Result<f64> {
    let h = nilpotent_part(&pole_mode(module)?, tol)?;
    let modes: Vec<Mat> = module.t().stored().to_vec();
    let span = MatrixSpan::generated_algebra(module.n(), &modes, tol.eps_eq);
    Ok(span.relative_residual(&h))
}

/// Runs every check on a module: conditions (i)–(iii), the axioms up to
/// `degmax`, and indecomposability.
pub fn verify_module(
    module: &TwistedModule,
    degmax: usize,
    tol: &Tolerance,
) -> Result<VerificationReport> {
    let mut report = check_lemma_conditions(module.t(), &module.f(), module.p(), tol)?;
    report.merge(check_module_axioms(module, degmax, tol)?);
    if !module.t().is_zero() {
        let ind = check_indecomposable(module, tol)?;
        let mut r = VerificationReport::empty(tol);
        r.indecomposable = Some(ind);
        report.merge(r);
    }
    Ok(report)
}
