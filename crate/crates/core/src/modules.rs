//! The classified modules, represented by `T(x) = Y_M(t, x)`.
//!
//! Twisted family (`g(t) = ζ_p t`, `f = c₁t + c_{p+1}t^{p+1}`), with
//! `γ' = γ_p ζ_p^l`:
//!
//! * `c₁ = 0`: `T = γ' x^(-1/p) (E − x⁻¹H)^(-1/p)`
//! * `c₁ ≠ 0`: `T = γ' u^(-1/p) (E − wH)^(-1/p)` where `e = exp(−c₁px)`,
//!   `u = (−1 + e)/(−c₁p)` and `w = e/(−1 + e)`.
//!
//! Untwisted family (`f = c(t−α)(t−β)`):
//!
//! * `α = β`: `T = αE − c⁻¹ x⁻¹ (E − x⁻¹H)⁻¹`
//! * `α ≠ β`: `T = αE + (α−β)(−1 + e)⁻¹ (E − wH)⁻¹` with `e = exp(−c(α−β)x)`.
//!
//! `H` is `J_n` unless a different Jordan structure is requested.

use serde::{Deserialize, Serialize};

use crate::coeff::{as_pair, real, Coeff, Rational, RootData, Tolerance, ONE, ZERO};
use crate::error::{Error, Result};
use crate::matser::{jordan_sum, mat_binomial_power, MatSeries};
use crate::polyalg::{
    fixed_subalgebra_is_d_invariant, twisted_derivation, untwisted_derivation, DerivedAlgebra, Poly,
};
use crate::puiseux::PuiseuxSeries;
use crate::series::{Mat, UNBOUNDED};
use crate::verify::{check_lemma_conditions, VerificationReport};

/// Exponent units per unit of `x` in the default truncation.
pub const DEFAULT_ORDER_PER_P: i64 = 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Family {
    /// `f = c₁t + c_{p+1}t^{p+1}`.
    Twisted {
        #[serde(with = "as_pair")]
        c1: Coeff,
        #[serde(with = "as_pair")]
        cp1: Coeff,
    },
    /// `f = c(t−α)(t−β)`, `p = 1`.
    Untwisted {
        #[serde(with = "as_pair")]
        alpha: Coeff,
        #[serde(with = "as_pair")]
        beta: Coeff,
        #[serde(with = "as_pair")]
        c: Coeff,
    },
    /// `T = 0` for an arbitrary `f`.
    Trivial { f: Poly },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModuleSpec {
    pub n: usize,
    pub p: u32,
    pub l: u32,
    /// Truncation bound as an exponent numerator over `p`.
    pub hi: i64,
    pub family: Family,
    /// Jordan block sizes of the nilpotent datum; `None` means one block `J_n`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jordan: Option<Vec<usize>>,
}

impl ModuleSpec {
    pub fn twisted(n: usize, p: u32, l: u32, c1: Coeff, cp1: Coeff) -> Self {
        ModuleSpec {
            n,
            p,
            l,
            hi: DEFAULT_ORDER_PER_P * p as i64,
            family: Family::Twisted { c1, cp1 },
            jordan: None,
        }
    }

    pub fn untwisted(n: usize, alpha: Coeff, beta: Coeff, c: Coeff) -> Self {
        ModuleSpec {
            n,
            p: 1,
            l: 0,
            hi: DEFAULT_ORDER_PER_P,
            family: Family::Untwisted { alpha, beta, c },
            jordan: None,
        }
    }

    pub fn trivial(n: usize, p: u32, f: Poly) -> Self {
        ModuleSpec {
            n,
            p,
            l: 0,
            hi: DEFAULT_ORDER_PER_P * p as i64,
            family: Family::Trivial { f },
            jordan: None,
        }
    }

    pub fn with_hi(mut self, hi: i64) -> Self {
        self.hi = hi;
        self
    }

    pub fn with_jordan(mut self, sizes: Vec<usize>) -> Self {
        self.jordan = Some(sizes);
        self
    }

    /// The polynomial `f` of `D = f d/dt`.
    pub fn f(&self) -> Poly {
        match &self.family {
            Family::Twisted { c1, cp1 } => twisted_derivation(self.p, *c1, *cp1),
            Family::Untwisted { alpha, beta, c } => untwisted_derivation(*alpha, *beta, *c),
            Family::Trivial { f } => f.clone(),
        }
    }

    pub fn algebra(&self) -> Result<DerivedAlgebra> {
        match self.family {
            Family::Untwisted { .. } => Ok(DerivedAlgebra::untwisted(self.f())),
            _ => DerivedAlgebra::twisted(self.f(), self.p),
        }
    }

    pub fn nilpotent(&self) -> Mat {
        match &self.jordan {
            Some(sizes) => jordan_sum(sizes),
            None => jordan_sum(&[self.n]),
        }
    }

    /// Largest Jordan block.
    fn top_block(&self) -> usize {
        self.jordan
            .as_ref()
            .and_then(|s| s.iter().copied().max())
            .unwrap_or(self.n)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Domain("n must be positive".into()));
        }
        if self.p == 0 {
            return Err(Error::Domain("p must be positive".into()));
        }
        if self.l >= self.p {
            return Err(Error::Domain(format!(
                "l={} out of range 0..{}",
                self.l,
                self.p - 1
            )));
        }
        if let Some(sizes) = &self.jordan {
            if sizes.iter().sum::<usize>() != self.n || sizes.contains(&0) {
                return Err(Error::Domain(format!(
                    "Jordan sizes {sizes:?} do not partition n={}",
                    self.n
                )));
            }
        }
        match &self.family {
            Family::Twisted { c1, cp1 } => {
                if *cp1 == ZERO {
                    return Err(Error::Domain(
                        "c_{p+1}≠0 required: no twisted module with Y(t,x)≠0 exists".into(),
                    ));
                }
                if !(c1.is_finite() && cp1.is_finite()) {
                    return Err(Error::NonFinite("module parameters".into()));
                }
            }
            Family::Untwisted { alpha, beta, c } => {
                if self.p != 1 {
                    return Err(Error::Domain("untwisted modules have p=1".into()));
                }
                if *c == ZERO {
                    return Err(Error::Domain("c≠0 required".into()));
                }
                if !(alpha.is_finite() && beta.is_finite() && c.is_finite()) {
                    return Err(Error::NonFinite("module parameters".into()));
                }
            }
            Family::Trivial { .. } => {}
        }
        Ok(())
    }
}

/// A module `(C^n, Y_M)` given by `T(x) = Y_M(t, x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwistedModule {
    spec: ModuleSpec,
    gamma: Coeff,
    t: MatSeries,
}

impl TwistedModule {
    /// Wraps data without verifying it (e.g. after deserialization).
    pub fn from_parts_unchecked(spec: ModuleSpec, gamma: Coeff, t: MatSeries) -> Self {
        TwistedModule { spec, gamma, t }
    }

    pub fn spec(&self) -> &ModuleSpec {
        &self.spec
    }

    /// `γ_p` (twisted), the leading scalar `−1/c` (untwisted), or 0.
    pub fn gamma(&self) -> Coeff {
        self.gamma
    }

    pub fn t(&self) -> &MatSeries {
        &self.t
    }

    pub fn n(&self) -> usize {
        self.spec.n
    }

    pub fn p(&self) -> u32 {
        self.spec.p
    }

    pub fn f(&self) -> Poly {
        self.spec.f()
    }

    /// Exponent of the pole mode whose nilpotent part carries `H`.
    pub fn pole_exponent(&self) -> Rational {
        let p = self.spec.p as i64;
        Rational::new(-(p + 1), p)
    }
}

#[derive(Serialize, Deserialize)]
struct ModuleJson {
    spec: ModuleSpec,
    #[serde(with = "as_pair")]
    gamma: Coeff,
    #[serde(rename = "T")]
    t: MatSeries,
}

impl Serialize for TwistedModule {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ModuleJson {
            spec: self.spec.clone(),
            gamma: self.gamma,
            t: self.t.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for TwistedModule {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = ModuleJson::deserialize(d)?;
        if j.t.dim() != j.spec.n {
            return Err(serde::de::Error::custom(format!(
                "T is {}×{} but spec.n={}",
                j.t.dim(),
                j.t.dim(),
                j.spec.n
            )));
        }
        Ok(TwistedModule::from_parts_unchecked(j.spec, j.gamma, j.t))
    }
}

fn exhausted(t: &MatSeries, hi: i64) -> Result<()> {
    if t.hi() < hi {
        return Err(Error::WindowExhausted {
            achievable_num: t.hi(),
            ram: t.ram(),
        });
    }
    Ok(())
}

/// `x`-order of scalar inputs needed so that the product reaches `hi / p`.
fn working_order(hi: i64, p: u32, n: usize) -> i64 {
    hi.div_euclid(p as i64) + n as i64 + 3
}

/// `(e, (−1+e)⁻¹, w = e/(−1+e))` for `e = exp(kx)`.
fn exp_pieces(k: Coeff, order: i64) -> Result<(PuiseuxSeries, PuiseuxSeries, PuiseuxSeries)> {
    let e = PuiseuxSeries::exp_linear(k, order)?;
    let em1 = e.sub(&PuiseuxSeries::one(1, ()))?;
    let inv = em1.invert()?;
    let w = e.mul(&inv)?;
    Ok((em1, inv, w))
}

fn twisted_closed_form(
    p: u32,
    lead: Coeff,
    c1: Coeff,
    h: &Mat,
    hi: i64,
    tol: &Tolerance,
) -> Result<MatSeries> {
    let n = h.nrows();
    let m = Rational::new(-1, p as i64);
    let t = if tol.is_zero(c1) {
        let minus_x_inv = PuiseuxSeries::monomial(1, -1, -ONE, UNBOUNDED);
        let b = mat_binomial_power(&minus_x_inv, h, m, tol)?.lift_ram(p);
        b.scale_by(&PuiseuxSeries::monomial(p, -1, lead, UNBOUNDED))?
    } else {
        let k = -c1 * p as f64;
        let (em1, _, w) = exp_pieces(k, working_order(hi, p, n))?;
        let u = em1.scale(k.inv());
        let u_pow = u.power_x_times_unit(m)?.to_ram(p)?;
        let b = mat_binomial_power(&w.neg(), h, m, tol)?.lift_ram(p);
        b.scale_by(&u_pow)?.scale(lead)
    };
    exhausted(&t, hi)?;
    Ok(t.truncate(hi))
}

fn untwisted_closed_form(
    alpha: Coeff,
    beta: Coeff,
    c: Coeff,
    h: &Mat,
    hi: i64,
    tol: &Tolerance,
) -> Result<MatSeries> {
    let n = h.nrows();
    let minus_one = Rational::from_integer(-1);
    let shift = MatSeries::constant_matrix(1, Mat::identity(n, n) * alpha);
    let t = if tol.eq(alpha, beta) {
        let minus_x_inv = PuiseuxSeries::monomial(1, -1, -ONE, UNBOUNDED);
        let b = mat_binomial_power(&minus_x_inv, h, minus_one, tol)?;
        let pole = PuiseuxSeries::monomial(1, -1, -c.inv(), UNBOUNDED);
        shift.add(&b.scale_by(&pole)?)?
    } else {
        let (_, inv, w) = exp_pieces(-c * (alpha - beta), working_order(hi, 1, n))?;
        let b = mat_binomial_power(&w.neg(), h, minus_one, tol)?;
        shift.add(&b.scale_by(&inv.scale(alpha - beta))?)?
    };
    exhausted(&t, hi)?;
    Ok(t.truncate(hi))
}

fn lowest_num(t: &MatSeries, tol: &Tolerance) -> Option<i64> {
    t.leading_num(tol.eps_eq * t.max_norm().max(1.0))
}

fn ensure_verified(report: &VerificationReport, what: &str) -> Result<()> {
    if report.pass {
        Ok(())
    } else {
        Err(Error::Internal(format!(
            "{what} fails the structure conditions (max residual {:.3e})",
            report.max_residual
        )))
    }
}

/// Builds the module described by `spec` and verifies it.
pub fn construct(spec: &ModuleSpec, tol: &Tolerance) -> Result<TwistedModule> {
    spec.validate()?;
    let h = spec.nilpotent();
    let top = spec.top_block() as i64;
    let (gamma, t) = match &spec.family {
        Family::Twisted { c1, cp1 } => {
            let roots = RootData::new(spec.p, *cp1)?;
            let lead = roots.seed(spec.l);
            let t = twisted_closed_form(spec.p, lead, *c1, &h, spec.hi, tol)?;
            let scale = t.max_norm().max(1.0);
            let diag = t.coeff(-1).map(|m| m[(0, 0)]).unwrap_or(ZERO);
            if (diag - lead).norm() > tol.eps_eq * scale {
                return Err(Error::Internal(format!(
                    "leading scalar coefficient {diag} differs from γζ^l = {lead}"
                )));
            }
            let expect = -1 - (top - 1) * spec.p as i64;
            if lowest_num(&t, tol) != Some(expect) {
                return Err(Error::Internal(format!(
                    "lowest exponent of T is not {expect}/{}",
                    spec.p
                )));
            }
            (roots.gamma_p, t)
        }
        Family::Untwisted { alpha, beta, c } => {
            let t = untwisted_closed_form(*alpha, *beta, *c, &h, spec.hi, tol)?;
            if lowest_num(&t, tol) != Some(-top) {
                return Err(Error::Internal(format!(
                    "lowest exponent of T is not -{top}"
                )));
            }
            (-c.inv(), t)
        }
        Family::Trivial { .. } => (ZERO, MatSeries::zero(spec.p, spec.n, spec.hi)),
    };
    let report = check_lemma_conditions(&t, &spec.f(), spec.p, tol)?;
    ensure_verified(&report, "constructed module")?;
    Ok(TwistedModule {
        spec: spec.clone(),
        gamma,
        t,
    })
}

pub fn construct_untwisted(
    n: usize,
    alpha: Coeff,
    beta: Coeff,
    c: Coeff,
    hi: i64,
    tol: &Tolerance,
) -> Result<TwistedModule> {
    construct(&ModuleSpec::untwisted(n, alpha, beta, c).with_hi(hi), tol)
}

pub fn construct_twisted(
    n: usize,
    p: u32,
    l: u32,
    c1: Coeff,
    cp1: Coeff,
    hi: i64,
    tol: &Tolerance,
) -> Result<TwistedModule> {
    construct(&ModuleSpec::twisted(n, p, l, c1, cp1).with_hi(hi), tol)
}

/// `Y_M(P(t), x) = P(T(x))`.
pub fn evaluate_y(module: &TwistedModule, poly: &Poly) -> Result<MatSeries> {
    let t = module.t();
    let out = poly.eval_commuting(t)?;
    let deg = poly.degree().unwrap_or(0) as i64;
    let lowest = if t.is_zero() {
        0
    } else {
        (deg * t.lo()).min(0)
    };
    if out.hi() < lowest {
        return Err(Error::WindowExhausted {
            achievable_num: out.hi(),
            ram: out.ram(),
        });
    }
    Ok(out)
}

/// [`evaluate_y`], additionally requiring every coefficient up to the
/// numerator `order` to be determined.
pub fn evaluate_y_to(module: &TwistedModule, poly: &Poly, order: i64) -> Result<MatSeries> {
    let out = evaluate_y(module, poly)?;
    if out.hi() < order {
        return Err(Error::WindowExhausted {
            achievable_num: out.hi(),
            ram: out.ram(),
        });
    }
    Ok(out.truncate(order))
}

/// `Y(t^p, x)` closed form on `C[t^p]`, in ramification 1.
fn fixed_subalgebra_closed_form(
    p: u32,
    c1: Coeff,
    cp1: Coeff,
    h: &Mat,
    hi: i64,
    tol: &Tolerance,
) -> Result<MatSeries> {
    let pc = real(p as f64);
    let minus_one = Rational::from_integer(-1);
    if tol.is_zero(c1) {
        let minus_x_inv = PuiseuxSeries::monomial(1, -1, -ONE, UNBOUNDED);
        let b = mat_binomial_power(&minus_x_inv, h, minus_one, tol)?;
        let pole = PuiseuxSeries::monomial(1, -1, (-pc * cp1).inv(), UNBOUNDED);
        b.scale_by(&pole)
    } else {
        let (_, inv, w) = exp_pieces(-c1 * pc, hi + h.nrows() as i64 + 3)?;
        let b = mat_binomial_power(&w.neg(), h, minus_one, tol)?;
        // (1 − e)⁻¹ = −(−1 + e)⁻¹
        b.scale_by(&inv.scale(c1 / cp1))
    }
}

/// `Y_M(t^p, x)` as a series in integral powers of `x`, checked against its
/// closed form.
pub fn restrict_to_fixed_subalgebra(module: &TwistedModule, tol: &Tolerance) -> Result<MatSeries> {
    let spec = module.spec();
    let alg = spec.algebra()?;
    if !fixed_subalgebra_is_d_invariant(&alg, tol) {
        return Err(Error::Domain("C[t^p] is not invariant under D".into()));
    }
    let y = evaluate_y(module, &Poly::monomial(spec.p as usize, ONE))?;
    let eps = tol.eps_residual * y.max_norm().max(1.0);
    let reduced = y.reduce_ram(1, eps)?;
    if let Family::Twisted { c1, cp1 } = spec.family {
        let expect =
            fixed_subalgebra_closed_form(spec.p, c1, cp1, &spec.nilpotent(), reduced.hi(), tol)?;
        let (d, _, _) = reduced.max_diff(&expect)?;
        if d > tol.eps_residual {
            return Err(Error::Internal(format!(
                "Y(t^p,x) deviates from its closed form by {d:.3e}"
            )));
        }
    }
    Ok(reduced)
}

/// Transports an untwisted module along `σ(t) = t/c + α`: the result is
/// `c(T − αE)`, a module for `D = (c(α−β)t + t²) d/dt`.
pub fn transport_module(module: &TwistedModule, tol: &Tolerance) -> Result<TwistedModule> {
    let spec = module.spec();
    let Family::Untwisted { alpha, beta, c } = spec.family else {
        return Err(Error::Domain(
            "σ-transport applies to untwisted modules".into(),
        ));
    };
    let n = spec.n;
    let shift = MatSeries::constant_matrix(1, Mat::identity(n, n) * alpha);
    let t = module.t().sub(&shift)?.scale(c);
    let alg = crate::polyalg::sigma_transport(alpha, beta, c)?;
    let report = check_lemma_conditions(&t, &alg.f, 1, tol)?;
    ensure_verified(&report, "transported module")?;
    let new_spec = ModuleSpec {
        n,
        p: 1,
        l: 0,
        hi: t.hi(),
        family: Family::Twisted {
            c1: c * (alpha - beta),
            cp1: ONE,
        },
        jordan: spec.jordan.clone(),
    };
    Ok(TwistedModule {
        spec: new_spec,
        gamma: -ONE,
        t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matser::jordan_block;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn r(v: f64) -> Coeff {
        real(v)
    }

    fn diff(a: &MatSeries, b: &MatSeries) -> f64 {
        a.max_diff(b).unwrap().0
    }

    #[test]
    fn untwisted_double_root_examples() {
        let m = construct_untwisted(1, ZERO, ZERO, ONE, 12, &tol()).unwrap();
        let expect = MatSeries::monomial(1, -1, Mat::identity(1, 1) * -ONE, 12);
        assert_eq!(diff(m.t(), &expect), 0.0);
        assert_eq!(m.gamma(), -ONE);

        let m = construct_untwisted(2, ZERO, ZERO, ONE, 12, &tol()).unwrap();
        let e2 = Mat::identity(2, 2);
        let expect = MatSeries::from_sparse(1, 12, 2, vec![(-2, -jordan_block(2)), (-1, -e2)]);
        assert_eq!(diff(m.t(), &expect), 0.0);
        assert_eq!(m.t().lo(), -2);
    }

    #[test]
    fn untwisted_distinct_roots_solves_riccati() {
        // f = t(t−1): dT/dx = T(T−1); check the residual independently
        let m = construct_untwisted(1, ONE, ZERO, ONE, 12, &tol()).unwrap();
        let t = m.t().entry(0, 0);
        let rhs = t.mul(&t.sub(&PuiseuxSeries::one(1, ())).unwrap()).unwrap();
        let (d, hi, _) = t.derivative().max_diff(&rhs).unwrap();
        assert!(d < 1e-12 && hi >= 9, "{d} {hi}");
        // −x⁻¹(1 − x/2 + …) + 1 = −x⁻¹ + 1/2 + …
        assert!((t.coeff(-1).unwrap() + ONE).norm() < 1e-14);
        assert!((t.coeff(0).unwrap() - r(0.5)).norm() < 1e-14);
        assert!((t.coeff(1).unwrap() + r(1.0 / 12.0)).norm() < 1e-14);
    }

    #[test]
    fn twisted_examples() {
        let m = construct_twisted(1, 2, 0, ZERO, r(-0.5), 40, &tol()).unwrap();
        let expect = MatSeries::monomial(2, -1, Mat::identity(1, 1) * ONE, 40);
        assert!(diff(m.t(), &expect) < 1e-15);
        let m = construct_twisted(1, 2, 1, ZERO, r(-0.5), 40, &tol()).unwrap();
        assert!(diff(m.t(), &expect.neg()) < 1e-15);

        let m = construct_twisted(2, 2, 0, ZERO, r(-0.5), 40, &tol()).unwrap();
        let expect = MatSeries::from_sparse(
            2,
            40,
            2,
            vec![(-3, jordan_block(2) * r(0.5)), (-1, Mat::identity(2, 2))],
        );
        assert!(diff(m.t(), &expect) < 1e-15);
    }

    #[test]
    fn twisted_c1_nonzero_leading_and_ode() {
        let m = construct_twisted(3, 3, 2, ONE, r(2.0), 30, &tol()).unwrap();
        let lead = RootData::new(3, r(2.0)).unwrap().seed(2);
        assert!((m.t().coeff(-1).unwrap()[(1, 1)] - lead).norm() < 1e-12);
        assert_eq!(m.t().lo(), -7);
        assert_eq!(m.t().hi(), 30);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(construct_twisted(1, 2, 0, ONE, ZERO, 20, &tol()).is_err());
        assert!(construct_twisted(1, 2, 2, ONE, ONE, 20, &tol()).is_err());
        assert!(construct_untwisted(1, ONE, ZERO, ZERO, 20, &tol()).is_err());
        let bad = ModuleSpec::twisted(3, 2, 0, ZERO, ONE).with_jordan(vec![2, 2]);
        assert!(construct(&bad, &tol()).is_err());
    }

    #[test]
    fn trivial_module() {
        let f = twisted_derivation(2, ONE, ONE);
        let m = construct(&ModuleSpec::trivial(2, 2, f), &tol()).unwrap();
        assert!(m.t().is_zero());
        let g = Poly::new(vec![ONE, ZERO, ONE]);
        assert!(construct(&ModuleSpec::trivial(2, 1, g), &tol()).is_err());
    }

    #[test]
    fn evaluate_y_examples() {
        let m = construct_untwisted(1, ZERO, ZERO, ONE, 12, &tol()).unwrap();
        let one = evaluate_y(&m, &Poly::constant(ONE)).unwrap();
        assert!(one.is_exact());
        assert_eq!(one.stored(), &[Mat::identity(1, 1)]);
        assert_eq!(&evaluate_y(&m, &Poly::t()).unwrap(), m.t());
        let sq = evaluate_y(&m, &Poly::monomial(2, ONE)).unwrap();
        let expect = MatSeries::monomial(1, -2, Mat::identity(1, 1), 12);
        assert_eq!(diff(&sq, &expect), 0.0);
        assert_eq!(diff(&sq, &m.t().derivative()), 0.0);
    }

    #[test]
    fn evaluate_y_reports_exhaustion() {
        let m = construct_twisted(3, 1, 0, ONE, ONE, 2, &tol()).unwrap();
        let err = evaluate_y_to(&m, &Poly::monomial(6, ONE), 0).unwrap_err();
        assert!(evaluate_y_to(&m, &Poly::monomial(6, ONE), -13).is_ok());
        assert!(matches!(err, Error::WindowExhausted { .. }), "{err}");
    }

    #[test]
    fn restriction_examples() {
        let m0 = construct_twisted(1, 2, 0, ZERO, r(-0.5), 40, &tol()).unwrap();
        let m1 = construct_twisted(1, 2, 1, ZERO, r(-0.5), 40, &tol()).unwrap();
        let y0 = restrict_to_fixed_subalgebra(&m0, &tol()).unwrap();
        let y1 = restrict_to_fixed_subalgebra(&m1, &tol()).unwrap();
        assert_eq!(y0.ram(), 1);
        let expect = MatSeries::monomial(1, -1, Mat::identity(1, 1), 20);
        assert!(diff(&y0, &expect) < 1e-15);
        assert!(diff(&y0, &y1) < 1e-15);

        let m = construct_twisted(2, 2, 0, ZERO, r(-0.5), 40, &tol()).unwrap();
        let y = restrict_to_fixed_subalgebra(&m, &tol()).unwrap();
        let expect = MatSeries::from_sparse(
            1,
            20,
            2,
            vec![(-2, jordan_block(2)), (-1, Mat::identity(2, 2))],
        );
        assert!(diff(&y, &expect) < 1e-15);

        let m = construct_twisted(3, 2, 1, ONE, r(-2.0), 40, &tol()).unwrap();
        assert!(restrict_to_fixed_subalgebra(&m, &tol()).is_ok());
    }

    #[test]
    fn transport_matches_twisted_p1() {
        let (a, b, c) = (
            Coeff::new(0.5, 1.0),
            Coeff::new(-1.0, 0.25),
            Coeff::new(2.0, -1.0),
        );
        let u = construct_untwisted(3, a, b, c, 12, &tol()).unwrap();
        let moved = transport_module(&u, &tol()).unwrap();
        let direct = construct_twisted(3, 1, 0, c * (a - b), ONE, 12, &tol()).unwrap();
        assert!(diff(moved.t(), direct.t()) < 1e-10);
    }

    #[test]
    fn json_roundtrip() {
        let m = construct_twisted(2, 2, 1, ONE, r(-0.5), 10, &tol()).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert!(v.get("spec").is_some() && v.get("gamma").is_some() && v.get("T").is_some());
        assert_eq!(v["spec"]["family"]["kind"], "twisted");
        let back: TwistedModule = serde_json::from_str(&s).unwrap();
        assert_eq!(back.spec(), m.spec());
        assert!(diff(back.t(), m.t()) == 0.0);
    }
}
