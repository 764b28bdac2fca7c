//! Scalar truncated Puiseux series: inversion, `exp(cx)`, and the binomial
//! power `(λ x^q (1+G))^m`.

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::coeff::{binom, ensure_finite, Coeff, Rational, ONE, ZERO};
use crate::error::{Error, Result};
use crate::series::{is_unbounded, Series, UNBOUNDED};

pub type PuiseuxSeries = Series<Coeff>;

/// Relative threshold under which a leading coefficient is treated as
/// cancellation noise before dividing by it.
const LEADING_EPS: f64 = 1e-13;

impl Series<Coeff> {
    pub fn from_coeffs(ram: u32, lo: i64, hi: i64, coeffs: Vec<Coeff>) -> Result<Self> {
        Series::new(ram, lo, hi, (), coeffs)
    }

    /// Numeric value at a positive real point (principal real roots of x).
    pub fn eval_at(&self, x: f64) -> Coeff {
        let r = self.ram() as f64;
        self.iter().map(|(n, c)| *c * x.powf(n as f64 / r)).sum()
    }

    fn strip_noise(&self) -> Self {
        self.normalized(self.max_norm() * LEADING_EPS)
    }

    /// Multiplicative inverse; `hi` becomes `hi - 2·lo`.
    pub fn invert(&self) -> Result<Self> {
        let a = self.strip_noise();
        if a.is_zero() {
            return Err(Error::Domain("cannot invert the zero series".into()));
        }
        let lo = a.lo();
        let rel = if a.is_exact() {
            None
        } else {
            Some(a.hi() - lo)
        };
        let cs = a.stored();
        let lead_inv = cs[0].inv();
        // exact inputs with a non-monomial tail have infinite inverses; cap them
        let len = match rel {
            Some(r) => (r + 1) as usize,
            None if cs.len() == 1 => 1,
            None => {
                return Err(Error::Domain(
                    "inverse of an exact non-monomial series needs a truncation window".into(),
                ))
            }
        };
        let mut out = Vec::with_capacity(len);
        out.push(lead_inv);
        for k in 1..len {
            let mut acc = ZERO;
            for j in 1..=k.min(cs.len() - 1) {
                acc += cs[j] * out[k - j];
            }
            out.push(-lead_inv * acc);
        }
        let hi = match rel {
            Some(r) => -lo + r,
            None => UNBOUNDED,
        };
        let res = Series::from_coeffs(a.ram(), -lo, hi, out)?;
        if !res.is_finite() {
            return Err(Error::NonFinite("series inverse".into()));
        }
        Ok(res)
    }

    /// `Σ_{i=0}^{hi} (c x)^i / i!` with ramification 1.
    pub fn exp_linear(c: Coeff, hi: i64) -> Result<Self> {
        ensure_finite(c, "exp_linear argument")?;
        if hi < 0 {
            return Ok(Series::zero(1, (), hi));
        }
        let mut out = Vec::with_capacity(hi as usize + 1);
        let mut term = ONE;
        out.push(term);
        for i in 1..=hi {
            term = term * c / i as f64;
            out.push(term);
        }
        Series::from_coeffs(1, 0, hi, out)
    }

    /// `(λ x^q (1+G(x)))^m = λ^m x^(qm) Σ_i binom(m,i) G^i` with `λ^m` on the
    /// principal branch. The output ramification is `ram · denom(m)`.
    pub fn power_x_times_unit(&self, m: Rational) -> Result<Self> {
        let a = self.strip_noise();
        if a.is_zero() {
            return Err(Error::Domain("power of the zero series".into()));
        }
        let ram = a.ram();
        let lo = a.lo();
        let lead = a.stored()[0];
        // unit part 1 + G, exponents relative to lo
        let rel_hi = if a.is_exact() { UNBOUNDED } else { a.hi() - lo };
        let unit = Series::from_coeffs(
            ram,
            0,
            rel_hi,
            a.stored().iter().map(|c| *c / lead).collect(),
        )?;
        let g = unit.sub(&Series::one(ram, ()))?;

        let den = *m.denom() as u32;
        let num = *m.numer();
        let out_ram = ram * den;

        let lead_pow = if den == 1 {
            lead.powi(num as i32)
        } else {
            lead.powf(num as f64 / den as f64)
        };
        ensure_finite(lead_pow, "leading coefficient power")?;

        let mut sum = Series::one(ram, ());
        if !g.is_zero() {
            if is_unbounded(rel_hi) {
                if *m.denom() != 1 || num < 0 {
                    return Err(Error::Domain(
                        "non-polynomial power of an exact series needs a truncation window".into(),
                    ));
                }
                // finite binomial sum, exact
                let mut g_pow = Series::one(ram, ());
                for i in 1..=num as u32 {
                    g_pow = g_pow.mul(&g)?;
                    sum = sum.add(&g_pow.scale(binom(m, i)))?;
                }
            } else {
                sum = Series::from_coeffs(ram, 0, rel_hi, unit_power(&unit, m, rel_hi))?;
            }
        }
        // x^(qm) with q = lo/ram; numerator in the out_ram lattice is lo·num
        let shift = lo * num;
        let lifted = sum.lift_ram(den);
        let hi = if lifted.is_exact() {
            UNBOUNDED
        } else {
            lifted.hi() + shift
        };
        let shifted: Vec<Coeff> = lifted.stored().iter().map(|c| *c * lead_pow).collect();
        let out = Series::from_coeffs(out_ram, lifted.lo() + shift, hi, shifted)?;
        Ok(out.simplify_ram())
    }

    /// Lowers the ramification to the smallest one carrying every stored
    /// exponent exactly.
    pub fn simplify_ram(&self) -> Self {
        let mut g = self.ram() as i64;
        for (n, _) in self.iter() {
            g = g.gcd(&n);
        }
        let g = g.max(1) as u32;
        if g == 1 {
            return self.clone();
        }
        self.reduce_ram(self.ram() / g, 0.0)
            .expect("gcd divides every stored numerator")
    }
}

/// Wire format: `{"ram", "lo", "hi", "coeffs": [[re, im], …]}`.
#[derive(Serialize, Deserialize)]
pub struct SeriesJson {
    pub ram: u32,
    pub lo: i64,
    pub hi: i64,
    pub coeffs: Vec<[f64; 2]>,
}

/// Coefficients `0..=hi` of `a^m` for a unit series `a` with `a_0 = 1`, by
/// the recurrence `k y_k = Σ_j ((m+1) j - k) a_j y_(k-j)`. Unlike the
/// binomial sum in `a - 1` it has no large cancelling terms.
fn unit_power(a: &Series<Coeff>, m: Rational, hi: i64) -> Vec<Coeff> {
    let m1 = *m.numer() as f64 / *m.denom() as f64 + 1.0;
    let a: Vec<Coeff> = (0..=hi).map(|j| a.coeff(j).unwrap_or(ZERO)).collect();
    let last = a.iter().rposition(|c| *c != ZERO).unwrap_or(0);
    let mut y = Vec::with_capacity(hi as usize + 1);
    y.push(ONE);
    for k in 1..=hi as usize {
        let mut acc = ZERO;
        for j in 1..=k.min(last) {
            acc += a[j] * y[k - j] * (m1 * j as f64 - k as f64);
        }
        y.push(acc / k as f64);
    }
    y
}

impl From<&PuiseuxSeries> for SeriesJson {
    fn from(s: &PuiseuxSeries) -> Self {
        let mut coeffs: Vec<[f64; 2]> = s.stored().iter().map(|c| [c.re, c.im]).collect();
        if !s.is_exact() && !s.is_zero() {
            coeffs.resize((s.hi() - s.lo() + 1) as usize, [0.0, 0.0]);
        }
        SeriesJson {
            ram: s.ram(),
            lo: s.lo(),
            hi: s.hi(),
            coeffs,
        }
    }
}

impl TryFrom<SeriesJson> for PuiseuxSeries {
    type Error = Error;

    fn try_from(j: SeriesJson) -> Result<Self> {
        Series::from_coeffs(
            j.ram,
            j.lo,
            j.hi,
            j.coeffs.iter().map(|c| Coeff::new(c[0], c[1])).collect(),
        )
    }
}

impl Serialize for Series<Coeff> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SeriesJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Series<Coeff> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = SeriesJson::deserialize(d)?;
        PuiseuxSeries::try_from(j).map_err(serde::de::Error::custom)
    }
}
