//! Series with `n×n` matrix coefficients, band decomposition, matrix binomial
//! powers and nilpotent rank profiles.

use serde::{Deserialize, Serialize};

use crate::coeff::{binom, Coeff, Rational, Tolerance, ONE, ZERO};
use crate::error::{Error, Result};
use crate::puiseux::PuiseuxSeries;
use crate::series::{convolve, Coefficient, Mat, Series};

pub type MatSeries = Series<Mat>;

/// `J_n`: ones on the superdiagonal.
pub fn jordan_block(n: usize) -> Mat {
    Mat::from_fn(n, n, |i, j| if j == i + 1 { ONE } else { ZERO })
}

/// Block-diagonal sum of Jordan blocks of the given sizes.
pub fn jordan_sum(sizes: &[usize]) -> Mat {
    let n: usize = sizes.iter().sum();
    let mut m = Mat::zeros(n, n);
    let mut at = 0;
    for &s in sizes {
        for i in 0..s.saturating_sub(1) {
            m[(at + i, at + i + 1)] = ONE;
        }
        at += s;
    }
    m
}

/// An element of `Δ_k`: only the entries `(i, i+k)` may be nonzero.
#[derive(Clone, Debug, PartialEq)]
pub struct BandMatrix {
    pub n: usize,
    pub k: usize,
    pub entries: Vec<Coeff>,
}

impl BandMatrix {
    pub fn to_matrix(&self) -> Mat {
        let mut m = Mat::zeros(self.n, self.n);
        for (i, v) in self.entries.iter().enumerate() {
            m[(i, i + self.k)] = *v;
        }
        m
    }
}

/// `X^(k)`: the `k`-th superdiagonal of `X`.
pub fn band_project(x: &Mat, k: usize) -> Result<BandMatrix> {
    let n = x.nrows();
    if k >= n.max(1) {
        return Err(Error::Domain(format!("band {k} out of range for n={n}")));
    }
    Ok(BandMatrix {
        n,
        k,
        entries: (0..n - k).map(|i| x[(i, i + k)]).collect(),
    })
}

fn band_matrix(x: &Mat, k: usize) -> Mat {
    let n = x.nrows();
    Mat::from_fn(n, n, |i, j| if j == i + k { x[(i, j)] } else { ZERO })
}

/// Largest entry modulus strictly below the diagonal.
pub fn lower_norm(x: &Mat) -> f64 {
    let mut m: f64 = 0.0;
    for j in 0..x.ncols() {
        for i in j + 1..x.nrows() {
            m = m.max(x[(i, j)].norm());
        }
    }
    m
}

pub fn is_nilpotent(h: &Mat, tol: &Tolerance) -> bool {
    let n = h.nrows();
    if n == 0 {
        return true;
    }
    let scale = h.norm().max(1.0).powi(n as i32);
    let mut p = Mat::identity(n, n);
    for _ in 0..n {
        p = &p * h;
    }
    Coefficient::norm(&p) <= tol.eps_eq * scale
}

/// `X` minus its diagonal, for upper-triangular `X` with scalar diagonal.
pub fn nilpotent_part(x: &Mat, tol: &Tolerance) -> Result<Mat> {
    let n = x.nrows();
    let scale = Coefficient::norm(x).max(1.0);
    if lower_norm(x) > tol.eps_eq * scale {
        return Err(Error::Domain(
            "matrix is not upper triangular; conjugate to upper-triangular form first".into(),
        ));
    }
    if n > 0 {
        let d0 = x[(0, 0)];
        if (1..n).any(|i| (x[(i, i)] - d0).norm() > tol.eps_eq * scale) {
            return Err(Error::Domain(
                "diagonal is not scalar; conjugate to the indecomposable block form first".into(),
            ));
        }
    }
    let mut h = x.clone();
    for i in 0..n {
        h[(i, i)] = ZERO;
    }
    Ok(h)
}

fn spectral_norm(m: &Mat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(0.0, |a: f64, &b| a.max(b))
}

/// Numerical rank: singular values above `threshold`.
pub fn rank(m: &Mat, threshold: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .filter(|&&s| s > threshold)
        .count()
}

/// `[rank(H^0), …, rank(H^n)]`, thresholding `H^k` at `eps_eq·‖H‖^k`.
pub fn rank_profile(h: &Mat, eps_eq: f64) -> Vec<usize> {
    let n = h.nrows();
    let norm = spectral_norm(h);
    let mut out = Vec::with_capacity(n + 1);
    let mut p = Mat::identity(n, n);
    for k in 0..=n {
        if k > 0 {
            p = &p * h;
        }
        out.push(rank(&p, eps_eq * norm.powi(k as i32)));
    }
    out
}

/// True when the profile is `[n, n-1, …, 1, 0]`, i.e. `H` is conjugate to `J_n`.
pub fn is_single_jordan_profile(profile: &[usize]) -> bool {
    let n = profile.len().saturating_sub(1);
    profile.iter().enumerate().all(|(k, &r)| r == n - k)
}

impl Series<Mat> {
    /// `s(x)·E_n`.
    pub fn from_scalar(s: &PuiseuxSeries, n: usize) -> Self {
        s.map(n, |c| Mat::identity(n, n) * *c)
    }

    /// Constant matrix, exact.
    pub fn constant_matrix(ram: u32, m: Mat) -> Self {
        Series::<Coeff>::one(ram, ()).map(m.nrows(), |_| m.clone())
    }

    pub fn dim(&self) -> usize {
        self.shape()
    }

    /// Product with a scalar series.
    pub fn scale_by(&self, s: &PuiseuxSeries) -> Result<Self> {
        if self.ram() != s.ram() {
            return Err(Error::RamificationMismatch {
                left: self.ram(),
                right: s.ram(),
            });
        }
        let n = self.dim();
        Ok(convolve(s, self, n, |acc: &mut Mat, a: &Coeff, b: &Mat| {
            *acc += b * *a;
        }))
    }

    /// Entry `(i, j)` as a scalar series.
    pub fn entry(&self, i: usize, j: usize) -> PuiseuxSeries {
        self.map((), |m| m[(i, j)])
    }

    /// Coefficientwise projection onto `Δ_k`.
    pub fn band(&self, k: usize) -> Self {
        let n = self.dim();
        self.map(n, |m| band_matrix(m, k))
    }

    /// `T_(i)`: coefficient of `x^i`; `None` above the window or off-lattice.
    pub fn mode(&self, exponent: Rational) -> Option<Mat> {
        let num = exponent * Rational::from_integer(self.ram() as i64);
        if !num.is_integer() {
            return Some(Mat::zeros(self.dim(), self.dim()));
        }
        self.coeff(num.to_integer())
    }

    /// Largest `‖[T_(i), T_(j)]‖` over stored pairs.
    pub fn max_commutator(&self) -> f64 {
        let cs = self.stored();
        let mut worst: f64 = 0.0;
        for (a, x) in cs.iter().enumerate() {
            for y in &cs[a + 1..] {
                let c = x * y - y * x;
                worst = worst.max(Coefficient::norm(&c));
            }
        }
        worst
    }
}

/// `(E_n + F(x)H)^m = Σ_i binom(m,i) F^i H^i` for nilpotent `H`.
pub fn mat_binomial_power(
    f: &PuiseuxSeries,
    h: &Mat,
    m: Rational,
    tol: &Tolerance,
) -> Result<MatSeries> {
    let n = h.nrows();
    if h.ncols() != n {
        return Err(Error::DimensionMismatch {
            left: n,
            right: h.ncols(),
        });
    }
    if !is_nilpotent(h, tol) {
        return Err(Error::Domain("H is not nilpotent".into()));
    }
    let ram = f.ram();
    let mut acc = MatSeries::one(ram, n);
    let mut f_pow = PuiseuxSeries::one(ram, ());
    let mut h_pow = Mat::identity(n, n);
    for i in 1..n {
        h_pow = &h_pow * h;
        f_pow = f_pow.mul(f)?;
        if Coefficient::is_exact_zero(&h_pow) {
            break;
        }
        let b = binom(m, i as u32);
        if b == ZERO {
            continue;
        }
        let coef = &h_pow * b;
        acc = acc.add(&f_pow.map(n, |c| &coef * *c))?;
    }
    Ok(acc)
}

/// Orthonormal basis (as flattened vectors) of a span of matrices.
#[derive(Clone, Debug)]
pub struct MatrixSpan {
    n: usize,
    basis: Vec<Vec<Coeff>>,
    rel_eps: f64,
}

impl MatrixSpan {
    pub fn new(n: usize, rel_eps: f64) -> Self {
        MatrixSpan {
            n,
            basis: Vec::new(),
            rel_eps,
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    fn residual_vec(&self, m: &Mat) -> Vec<Coeff> {
        let mut v: Vec<Coeff> = m.iter().copied().collect();
        // two Gram-Schmidt passes
        for _ in 0..2 {
            for b in &self.basis {
                let dot: Coeff = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= dot * bi;
                }
            }
        }
        v
    }

    fn vec_norm(v: &[Coeff]) -> f64 {
        v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Relative distance `‖m − proj(m)‖ / ‖m‖`.
    pub fn relative_residual(&self, m: &Mat) -> f64 {
        let norm = m.norm();
        if norm == 0.0 {
            return 0.0;
        }
        Self::vec_norm(&self.residual_vec(m)) / norm
    }

    /// Adds `m` if it is independent of the current span. Returns whether it
    /// was added.
    pub fn insert(&mut self, m: &Mat) -> bool {
        if self.basis.len() >= self.n * self.n {
            return false;
        }
        let norm = m.norm();
        if norm == 0.0 {
            return false;
        }
        let r = self.residual_vec(m);
        let rn = Self::vec_norm(&r);
        if rn <= self.rel_eps * norm {
            return false;
        }
        self.basis.push(r.into_iter().map(|z| z / rn).collect());
        true
    }

    fn matrix(&self, idx: usize) -> Mat {
        Mat::from_iterator(self.n, self.n, self.basis[idx].iter().copied())
    }

    /// The unital algebra generated by `gens`.
    pub fn generated_algebra(n: usize, gens: &[Mat], rel_eps: f64) -> Self {
        let mut span = MatrixSpan::new(n, rel_eps);
        span.insert(&Mat::identity(n, n));
        for g in gens {
            span.insert(g);
        }
        let mut done = 0;
        // close under products until the dimension stabilizes
        loop {
            let before = span.dim();
            for i in 0..before {
                for j in 0..before {
                    if i < done && j < done {
                        continue;
                    }
                    let p = span.matrix(i) * span.matrix(j);
                    span.insert(&p);
                }
            }
            done = before;
            if span.dim() == before {
                break;
            }
        }
        span
    }

    /// Span of `I, H, …, H^(n-1)`.
    pub fn powers_of(h: &Mat, rel_eps: f64) -> Self {
        let n = h.nrows();
        let mut span = MatrixSpan::new(n, rel_eps);
        let mut p = Mat::identity(n, n);
        for _ in 0..n {
            span.insert(&p);
            p = &p * h;
        }
        span
    }
}

/// Wire format for matrix series.
#[derive(Serialize, Deserialize)]
pub struct MatSeriesJson {
    pub n: usize,
    pub ram: u32,
    pub lo: i64,
    pub hi: i64,
    pub coeffs: Vec<Vec<Vec<[f64; 2]>>>,
}

pub fn mat_to_json(m: &Mat) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

pub fn mat_from_json(rows: &[Vec<[f64; 2]>], n: usize) -> Result<Mat> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Parse(format!("expected a {n}×{n} matrix")));
    }
    Ok(Mat::from_fn(n, n, |i, j| {
        Coeff::new(rows[i][j][0], rows[i][j][1])
    }))
}

impl From<&MatSeries> for MatSeriesJson {
    fn from(s: &MatSeries) -> Self {
        let n = s.dim();
        let mut coeffs: Vec<_> = s.stored().iter().map(mat_to_json).collect();
        if !s.is_exact() && !s.is_zero() {
            coeffs.resize(
                (s.hi() - s.lo() + 1) as usize,
                mat_to_json(&Mat::zeros(n, n)),
            );
        }
        MatSeriesJson {
            n,
            ram: s.ram(),
            lo: s.lo(),
            hi: s.hi(),
            coeffs,
        }
    }
}

impl TryFrom<MatSeriesJson> for MatSeries {
    type Error = Error;

    fn try_from(j: MatSeriesJson) -> Result<Self> {
        let coeffs = j
            .coeffs
            .iter()
            .map(|m| mat_from_json(m, j.n))
            .collect::<Result<Vec<_>>>()?;
        Series::new(j.ram, j.lo, j.hi, j.n, coeffs)
    }
}

impl Serialize for Series<Mat> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatSeriesJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Series<Mat> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = MatSeriesJson::deserialize(d)?;
        MatSeries::try_from(j).map_err(serde::de::Error::custom)
    }
}
