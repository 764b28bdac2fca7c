//! Truncated series in `x^(1/ram)` with an honest truncation window.
//!
//! A [`Series`] stores coefficients for exponent numerators `lo ..= lo+len-1`
//! (exponent = numerator / ram). Coefficients below `lo` are zero, coefficients
//! between the last stored one and `hi` are zero, and nothing is known above
//! `hi`. Exact objects (polynomials, constants) use `hi = UNBOUNDED`.
//!
//! Every operation propagates `hi` so that it never claims knowledge of a
//! coefficient that depends on an unknown input coefficient. For a product
//! this gives `hi = min(a.hi + b.lo, b.hi + a.lo)`; powers of a series with
//! commuting coefficients get a sharper bound, see [`Series::commuting_powers`].

use std::fmt::Debug;

use nalgebra::DMatrix;
use num_integer::Integer;

use crate::coeff::{Coeff, ONE, ZERO};
use crate::error::{Error, Result};

/// Sentinel `hi` for series known exactly.
pub const UNBOUNDED: i64 = i64::MAX / 4;
const UNBOUNDED_THRESHOLD: i64 = i64::MAX / 8;

pub type Mat = DMatrix<Coeff>;

#[inline]
fn clamp_hi(h: i64) -> i64 {
    if h >= UNBOUNDED_THRESHOLD {
        UNBOUNDED
    } else {
        h
    }
}

#[inline]
pub fn is_unbounded(h: i64) -> bool {
    h >= UNBOUNDED_THRESHOLD
}

/// Coefficient ring for [`Series`]: scalars or square matrices.
pub trait Coefficient: Clone + Debug + PartialEq + Send + Sync {
    type Shape: Copy + Eq + Debug + Send + Sync;

    fn shape(&self) -> Self::Shape;
    fn zero(shape: Self::Shape) -> Self;
    fn identity(shape: Self::Shape) -> Self;
    fn add_assign(&mut self, other: &Self);
    fn sub_assign(&mut self, other: &Self);
    fn scale(&self, c: Coeff) -> Self;
    /// `self += a * b`
    fn mul_add(&mut self, a: &Self, b: &Self);
    /// Largest entry modulus.
    fn norm(&self) -> f64;
    fn is_exact_zero(&self) -> bool;
    fn is_finite(&self) -> bool;
}

impl Coefficient for Coeff {
    type Shape = ();

    fn shape(&self) {}
    fn zero(_: ()) -> Self {
        ZERO
    }
    fn identity(_: ()) -> Self {
        ONE
    }
    fn add_assign(&mut self, other: &Self) {
        *self += *other;
    }
    fn sub_assign(&mut self, other: &Self) {
        *self -= *other;
    }
    fn scale(&self, c: Coeff) -> Self {
        *self * c
    }
    fn mul_add(&mut self, a: &Self, b: &Self) {
        *self += *a * *b;
    }
    fn norm(&self) -> f64 {
        Coeff::norm(*self)
    }
    fn is_exact_zero(&self) -> bool {
        *self == ZERO
    }
    fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

impl Coefficient for Mat {
    type Shape = usize;

    fn shape(&self) -> usize {
        self.nrows()
    }
    fn zero(n: usize) -> Self {
        Mat::zeros(n, n)
    }
    fn identity(n: usize) -> Self {
        Mat::identity(n, n)
    }
    fn add_assign(&mut self, other: &Self) {
        *self += other;
    }
    fn sub_assign(&mut self, other: &Self) {
        *self -= other;
    }
    fn scale(&self, c: Coeff) -> Self {
        self * c
    }
    fn mul_add(&mut self, a: &Self, b: &Self) {
        self.gemm(ONE, a, b, ONE);
    }
    fn norm(&self) -> f64 {
        self.iter().fold(0.0, |m, z| m.max(z.norm()))
    }
    fn is_exact_zero(&self) -> bool {
        self.iter().all(|z| *z == ZERO)
    }
    fn is_finite(&self) -> bool {
        self.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// Truncated series in `x^(1/ram)` with coefficients in `C`.
#[derive(Clone, Debug, PartialEq)]
pub struct Series<C: Coefficient> {
    ram: u32,
    lo: i64,
    hi: i64,
    shape: C::Shape,
    coeffs: Vec<C>,
}

impl<C: Coefficient> Series<C> {
    /// Builds a series from coefficients at numerators `lo, lo+1, …`.
    /// Entries above `hi` are discarded; leading and trailing exact zeros are
    /// stripped.
    pub fn new(ram: u32, lo: i64, hi: i64, shape: C::Shape, coeffs: Vec<C>) -> Result<Self> {
        if ram == 0 {
            return Err(Error::Domain("ramification must be positive".into()));
        }
        if let Some(bad) = coeffs.iter().find(|c| c.shape() != shape) {
            return Err(Error::Domain(format!(
                "coefficient shape {:?} does not match series shape {:?}",
                bad.shape(),
                shape
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("series coefficient".into()));
        }
        Ok(Self::from_parts(ram, lo, clamp_hi(hi), shape, coeffs))
    }

    fn from_parts(ram: u32, lo: i64, hi: i64, shape: C::Shape, mut coeffs: Vec<C>) -> Self {
        let hi = clamp_hi(hi);
        if hi < lo {
            coeffs.clear();
        } else {
            let keep = (hi - lo + 1).min(coeffs.len() as i64) as usize;
            coeffs.truncate(keep);
        }
        while coeffs.last().is_some_and(|c| c.is_exact_zero()) {
            coeffs.pop();
        }
        let lead = coeffs.iter().take_while(|c| c.is_exact_zero()).count();
        coeffs.drain(..lead);
        let lo = if coeffs.is_empty() {
            hi + 1
        } else {
            lo + lead as i64
        };
        Series {
            ram,
            lo,
            hi,
            shape,
            coeffs,
        }
    }

    pub fn zero(ram: u32, shape: C::Shape, hi: i64) -> Self {
        Self::from_parts(ram, 0, hi, shape, Vec::new())
    }

    /// `c · x^(num/ram)`, known up to `hi`.
    pub fn monomial(ram: u32, num: i64, c: C, hi: i64) -> Self {
        let shape = c.shape();
        Self::from_parts(ram, num, hi, shape, vec![c])
    }

    pub fn constant(ram: u32, c: C, hi: i64) -> Self {
        Self::monomial(ram, 0, c, hi)
    }

    pub fn one(ram: u32, shape: C::Shape) -> Self {
        Self::constant(ram, C::identity(shape), UNBOUNDED)
    }

    pub fn ram(&self) -> u32 {
        self.ram
    }

    /// Lowest stored exponent numerator (`hi + 1` for the zero series).
    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.hi
    }

    pub fn is_exact(&self) -> bool {
        is_unbounded(self.hi)
    }

    pub fn shape(&self) -> C::Shape {
        self.shape
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Numerator of the last stored coefficient.
    pub fn stored_end(&self) -> i64 {
        self.lo + self.coeffs.len() as i64 - 1
    }

    pub fn stored(&self) -> &[C] {
        &self.coeffs
    }

    /// Stored coefficient at `num`, if any.
    pub fn get(&self, num: i64) -> Option<&C> {
        if num < self.lo {
            return None;
        }
        self.coeffs.get((num - self.lo) as usize)
    }

    /// Coefficient at `num`, or `None` when it lies above the window.
    pub fn coeff(&self, num: i64) -> Option<C> {
        if num > self.hi {
            return None;
        }
        Some(
            self.get(num)
                .cloned()
                .unwrap_or_else(|| C::zero(self.shape)),
        )
    }

    /// `(numerator, coefficient)` pairs of stored coefficients.
    pub fn iter(&self) -> impl Iterator<Item = (i64, &C)> {
        let lo = self.lo;
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(k, c)| (lo + k as i64, c))
    }

    /// Lowest numerator whose coefficient exceeds `eps` in norm.
    pub fn leading_num(&self, eps: f64) -> Option<i64> {
        self.iter().find(|(_, c)| c.norm() > eps).map(|(n, _)| n)
    }

    /// Largest coefficient norm.
    pub fn max_norm(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    /// Drops leading coefficients of norm at most `eps`.
    pub fn normalized(&self, eps: f64) -> Self {
        match self.leading_num(eps) {
            Some(n) => {
                let skip = (n - self.lo) as usize;
                Self::from_parts(
                    self.ram,
                    n,
                    self.hi,
                    self.shape,
                    self.coeffs[skip..].to_vec(),
                )
            }
            None => Self::zero(self.ram, self.shape, self.hi),
        }
    }

    /// Forgets everything above `hi`.
    pub fn truncate(&self, hi: i64) -> Self {
        Self::from_parts(
            self.ram,
            self.lo,
            self.hi.min(hi),
            self.shape,
            self.coeffs.clone(),
        )
    }

    pub fn map<D: Coefficient>(&self, shape: D::Shape, f: impl Fn(&C) -> D) -> Series<D> {
        Series::from_parts(
            self.ram,
            self.lo,
            self.hi,
            shape,
            self.coeffs.iter().map(f).collect(),
        )
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.ram != other.ram {
            return Err(Error::RamificationMismatch {
                left: self.ram,
                right: other.ram,
            });
        }
        if self.shape != other.shape {
            return Err(Error::Domain(format!(
                "shape mismatch: {:?} vs {:?}",
                self.shape, other.shape
            )));
        }
        Ok(())
    }

    fn combine(&self, other: &Self, subtract: bool) -> Result<Self> {
        self.check_compatible(other)?;
        let hi = self.hi.min(other.hi);
        if self.is_zero() && other.is_zero() {
            return Ok(Self::zero(self.ram, self.shape, hi));
        }
        if other.is_zero() {
            return Ok(self.truncate(hi));
        }
        if self.is_zero() {
            let o = if subtract { other.neg() } else { other.clone() };
            return Ok(o.truncate(hi));
        }
        let lo = self.lo.min(other.lo);
        let end = self.stored_end().max(other.stored_end()).min(hi);
        if end < lo {
            return Ok(Self::zero(self.ram, self.shape, hi));
        }
        let mut out = Vec::with_capacity((end - lo + 1) as usize);
        for num in lo..=end {
            let mut c = self
                .get(num)
                .cloned()
                .unwrap_or_else(|| C::zero(self.shape));
            if let Some(b) = other.get(num) {
                if subtract {
                    c.sub_assign(b);
                } else {
                    c.add_assign(b);
                }
            }
            out.push(c);
        }
        Ok(Self::from_parts(self.ram, lo, hi, self.shape, out))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, false)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, true)
    }

    pub fn neg(&self) -> Self {
        self.scale(-ONE)
    }

    pub fn scale(&self, c: Coeff) -> Self {
        Self::from_parts(
            self.ram,
            self.lo,
            self.hi,
            self.shape,
            self.coeffs.iter().map(|v| v.scale(c)).collect(),
        )
    }

    /// Cauchy product.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(convolve(
            self,
            other,
            self.shape,
            |acc: &mut C, a: &C, b: &C| acc.mul_add(a, b),
        ))
    }

    /// `S^0, …, S^kmax` for a series whose coefficients commute with each
    /// other and with its unknown tail `R`. Then
    /// `(S+R)^k = Σ_j binom(k,j) S^(k-j) R^j`, so `S^k` is honest below
    /// `lo(S^(k-j)) + j(hi+1)` for every `j ≥ 1`. Nilpotent coefficients make
    /// `lo(S^(k-j))` climb, which gives wider windows than repeated `mul`.
    pub fn commuting_powers(&self, kmax: usize) -> Result<Vec<Self>> {
        let mut out = vec![Self::one(self.ram, self.shape)];
        if self.is_exact() {
            for k in 1..=kmax {
                out.push(out[k - 1].mul(self)?);
            }
            return Ok(out);
        }
        let h = self.hi;
        // powers of the known part, computed far enough that the window
        // rather than the data limits each result
        let known = Self::from_parts(
            self.ram,
            self.lo,
            UNBOUNDED,
            self.shape,
            self.coeffs.clone(),
        );
        let budget = if self.is_zero() {
            h
        } else {
            h + kmax.saturating_sub(2) as i64 * (-self.lo).max(0)
        };
        let mut raw = vec![out[0].clone(), known.clone()];
        for k in 2..=kmax {
            raw.push(raw[k - 1].truncate(budget).mul(&known)?);
        }
        let low = |s: &Self| if s.is_zero() { None } else { Some(s.lo) };
        for k in 1..=kmax {
            let mut hi = raw[k].hi;
            for j in 1..=k {
                if let Some(l) = low(&raw[k - j]) {
                    hi = hi.min(l.saturating_add((j as i64).saturating_mul(h + 1)) - 1);
                }
            }
            out.push(raw[k].truncate(hi));
        }
        Ok(out)
    }

    /// Formal `d/dx`; `x^(q) ↦ q·x^(q-1)`.
    pub fn derivative(&self) -> Self {
        let r = self.ram as i64;
        let hi = if self.is_exact() {
            UNBOUNDED
        } else {
            self.hi - r
        };
        let coeffs = self
            .iter()
            .map(|(num, c)| c.scale(Coeff::new(num as f64 / r as f64, 0.0)))
            .collect();
        Self::from_parts(self.ram, self.lo - r, hi, self.shape, coeffs)
    }

    /// The same series viewed in `x^(1/(ram·q))`.
    pub fn lift_ram(&self, q: u32) -> Self {
        if q == 1 {
            return self.clone();
        }
        let qi = q as i64;
        // exponents strictly between hi/ram and (hi+1)/ram are off-lattice, hence zero
        let hi = if self.is_exact() {
            UNBOUNDED
        } else {
            self.hi.saturating_mul(qi).saturating_add(qi - 1)
        };
        if self.is_zero() {
            return Self::zero(self.ram * q, self.shape, hi);
        }
        let len = (self.coeffs.len() - 1) * q as usize + 1;
        let mut out = vec![C::zero(self.shape); len];
        for (k, c) in self.coeffs.iter().enumerate() {
            out[k * q as usize] = c.clone();
        }
        Self::from_parts(self.ram * q, self.lo * qi, hi, self.shape, out)
    }

    /// Lifts to ramification `target`, which must be a multiple of `ram`.
    pub fn to_ram(&self, target: u32) -> Result<Self> {
        if target == 0 || !target.is_multiple_of(self.ram) {
            return Err(Error::RamificationMismatch {
                left: self.ram,
                right: target,
            });
        }
        Ok(self.lift_ram(target / self.ram))
    }

    /// Re-expresses the series in `x^(1/target)` where `target` divides `ram`.
    /// Fails when a coefficient off the coarser lattice exceeds `eps`.
    pub fn reduce_ram(&self, target: u32, eps: f64) -> Result<Self> {
        if target == 0 || !self.ram.is_multiple_of(target) {
            return Err(Error::RamificationMismatch {
                left: self.ram,
                right: target,
            });
        }
        let q = (self.ram / target) as i64;
        let mut out: Vec<(i64, C)> = Vec::new();
        for (num, c) in self.iter() {
            if num.rem_euclid(q) == 0 {
                out.push((num / q, c.clone()));
            } else if c.norm() > eps {
                return Err(Error::Domain(format!(
                    "coefficient at exponent {num}/{} is not on the 1/{target} lattice",
                    self.ram
                )));
            }
        }
        let hi = if self.is_exact() {
            UNBOUNDED
        } else {
            self.hi.div_euclid(q)
        };
        Ok(Self::from_sparse(target, hi, self.shape, out))
    }

    /// Builds from `(numerator, coefficient)` pairs in increasing order.
    pub fn from_sparse(ram: u32, hi: i64, shape: C::Shape, terms: Vec<(i64, C)>) -> Self {
        let Some(lo) = terms.first().map(|t| t.0) else {
            return Self::zero(ram, shape, hi);
        };
        let end = terms.last().map(|t| t.0).unwrap_or(lo);
        let mut dense = vec![C::zero(shape); (end - lo + 1) as usize];
        for (num, c) in terms {
            dense[(num - lo) as usize].add_assign(&c);
        }
        Self::from_parts(ram, lo, hi, shape, dense)
    }

    /// Largest coefficient difference on the common window, after lifting both
    /// series to a common ramification. Returns `(residual, window_hi, ram)`.
    pub fn max_diff(&self, other: &Self) -> Result<(f64, i64, u32)> {
        let (a, b) = align(self, other);
        a.check_compatible(&b)?;
        let hi = a.hi.min(b.hi);
        let lo = a.lo.min(b.lo);
        let end = match (a.is_zero(), b.is_zero()) {
            (true, true) => return Ok((0.0, hi, a.ram)),
            (true, false) => b.stored_end(),
            (false, true) => a.stored_end(),
            (false, false) => a.stored_end().max(b.stored_end()),
        }
        .min(hi);
        let mut worst: f64 = 0.0;
        let zero = C::zero(a.shape);
        for num in lo..=end {
            let mut d = a.get(num).cloned().unwrap_or_else(|| zero.clone());
            d.sub_assign(b.get(num).unwrap_or(&zero));
            worst = worst.max(d.norm());
        }
        Ok((worst, hi, a.ram))
    }
}

/// Lifts both series to the least common ramification.
pub fn align<C: Coefficient>(a: &Series<C>, b: &Series<C>) -> (Series<C>, Series<C>) {
    let l = a.ram.lcm(&b.ram);
    (a.lift_ram(l / a.ram), b.lift_ram(l / b.ram))
}

/// Generic Cauchy product with the honest window rule.
pub(crate) fn convolve<A, B, C>(
    a: &Series<A>,
    b: &Series<B>,
    shape: C::Shape,
    mul_add: impl Fn(&mut C, &A, &B),
) -> Series<C>
where
    A: Coefficient,
    B: Coefficient,
    C: Coefficient,
{
    debug_assert_eq!(a.ram, b.ram);
    let hi = clamp_hi((a.hi + b.lo).min(b.hi + a.lo));
    if a.is_zero() || b.is_zero() {
        return Series::zero(a.ram, shape, hi);
    }
    let lo = a.lo + b.lo;
    let end = (a.stored_end() + b.stored_end()).min(hi);
    if end < lo {
        return Series::zero(a.ram, shape, hi);
    }
    let (la, lb) = (a.coeffs.len() as i64, b.coeffs.len() as i64);
    let out: Vec<C> = (0..=end - lo)
        .map(|k| {
            let mut acc = C::zero(shape);
            let i_min = (k - (lb - 1)).max(0);
            let i_max = k.min(la - 1);
            for i in i_min..=i_max {
                mul_add(&mut acc, &a.coeffs[i as usize], &b.coeffs[(k - i) as usize]);
            }
            acc
        })
        .collect();
    Series::from_parts(a.ram, lo, hi, shape, out)
}
