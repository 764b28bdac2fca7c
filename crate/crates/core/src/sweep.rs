//! Parameter sweeps over `(n, p, l, c₁, c_{p+1})` and seeded random checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::coeff::{as_pair, real, Coeff, Tolerance, ONE, ZERO};
use crate::error::Result;
use crate::exec::Execution;
use crate::modules::{
    construct, construct_twisted, construct_untwisted, transport_module, Family, ModuleSpec,
};
use crate::polyalg::Poly;
use crate::verify::{
    check_indecomposable, check_lemma_conditions, check_module_axioms, classify,
    generation_residual, oracle_compare, Reason,
};

pub const DEFAULT_SEED: u64 = 20_240_917;

/// `(c₁, c_{p+1})` pairs: both `c₁ = 0` and `c₁ ≠ 0` regimes.
pub fn standard_samples() -> Vec<(Coeff, Coeff)> {
    vec![
        (ZERO, ONE),
        (ZERO, real(-0.5)),
        (ONE, ONE),
        (Coeff::new(0.0, 2.0), -ONE),
    ]
}

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub n_max: usize,
    pub p_values: Vec<u32>,
    pub samples: Vec<(Coeff, Coeff)>,
    /// Truncation as exponent numerators per `p`.
    pub order_per_p: i64,
    /// Degree bound for the axiom checks; 0 skips them.
    pub degmax: usize,
    pub oracle: bool,
    pub generation: bool,
    pub tol: Tolerance,
    /// Threshold for oracle and generation residuals.
    pub oracle_eps: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            n_max: 5,
            p_values: vec![1, 2, 3, 4],
            samples: standard_samples(),
            order_per_p: 20,
            degmax: 4,
            oracle: true,
            generation: true,
            tol: Tolerance::default(),
            oracle_eps: 1e-8,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Cell {
    pub n: usize,
    pub p: u32,
    pub l: u32,
    #[serde(with = "as_pair")]
    pub c1: Coeff,
    #[serde(with = "as_pair")]
    pub cp1: Coeff,
}

impl Cell {
    pub fn spec(&self, order_per_p: i64) -> ModuleSpec {
        ModuleSpec::twisted(self.n, self.p, self.l, self.c1, self.cp1)
            .with_hi(order_per_p * self.p as i64)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CellReport {
    pub cell: Cell,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub lemma_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axiom_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generation_residual: Option<f64>,
    pub indecomposable: bool,
    pub rank_profile: Vec<usize>,
    /// Whether `T` has an exponent outside `Z` (expected for `p ≥ 2`).
    pub genuinely_twisted: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub pass: bool,
    pub cells: usize,
    pub failures: usize,
    pub max_lemma_residual: f64,
    pub max_axiom_residual: f64,
    pub max_oracle_residual: f64,
    pub max_generation_residual: f64,
    pub reports: Vec<CellReport>,
}

pub fn cells(config: &SweepConfig) -> Vec<Cell> {
    let mut out = Vec::new();
    for &p in &config.p_values {
        for n in 1..=config.n_max {
            for l in 0..p {
                for &(c1, cp1) in &config.samples {
                    out.push(Cell { n, p, l, c1, cp1 });
                }
            }
        }
    }
    out
}

fn run_cell_inner(cell: &Cell, config: &SweepConfig) -> Result<CellReport> {
    let tol = &config.tol;
    let spec = cell.spec(config.order_per_p);
    let module = construct(&spec, tol)?;
    let lemma = check_lemma_conditions(module.t(), &module.f(), cell.p, tol)?;
    let mut pass = lemma.pass;
    let axiom_residual = if config.degmax > 0 {
        let r = check_module_axioms(&module, config.degmax, tol)?;
        pass &= r.pass;
        Some(r.max_residual)
    } else {
        None
    };
    let oracle_residual = if config.oracle {
        let otol = tol.with_residual(config.oracle_eps)?;
        let r = oracle_compare(&spec, &otol)?;
        pass &= r.status == "pass";
        Some(r.max_residual)
    } else {
        None
    };
    let generation = if config.generation {
        let g = generation_residual(&module, tol)?;
        pass &= g < config.oracle_eps;
        Some(g)
    } else {
        None
    };
    let ind = check_indecomposable(&module, tol)?;
    pass &= ind.indecomposable;
    let ram = module.t().ram() as i64;
    let eps = tol.eps_eq * module.t().max_norm().max(1.0);
    let genuinely_twisted = module
        .t()
        .iter()
        .any(|(num, c)| num % ram != 0 && crate::series::Coefficient::norm(c) > eps);
    if cell.p >= 2 {
        pass &= genuinely_twisted;
    }
    Ok(CellReport {
        cell: *cell,
        pass,
        error: None,
        lemma_residual: lemma.max_residual,
        axiom_residual,
        oracle_residual,
        generation_residual: generation,
        indecomposable: ind.indecomposable,
        rank_profile: ind.rank_profile,
        genuinely_twisted,
    })
}

pub fn run_cell(cell: &Cell, config: &SweepConfig) -> CellReport {
    run_cell_inner(cell, config).unwrap_or_else(|e| CellReport {
        cell: *cell,
        pass: false,
        error: Some(e.to_string()),
        lemma_residual: f64::NAN,
        axiom_residual: None,
        oracle_residual: None,
        generation_residual: None,
        indecomposable: false,
        rank_profile: Vec::new(),
        genuinely_twisted: false,
    })
}

fn max_of(it: impl Iterator<Item = f64>) -> f64 {
    it.fold(0.0, |m, v| if v.is_nan() { f64::NAN } else { m.max(v) })
}

/// Runs every cell; the report does not depend on the execution mode.
pub fn run_sweep(config: &SweepConfig, exec: Execution) -> SweepReport {
    let cells = cells(config);
    let reports = exec.map(&cells, |c| run_cell(c, config));
    let failures = reports.iter().filter(|r| !r.pass).count();
    SweepReport {
        pass: failures == 0,
        cells: reports.len(),
        failures,
        max_lemma_residual: max_of(reports.iter().map(|r| r.lemma_residual)),
        max_axiom_residual: max_of(reports.iter().filter_map(|r| r.axiom_residual)),
        max_oracle_residual: max_of(reports.iter().filter_map(|r| r.oracle_residual)),
        max_generation_residual: max_of(reports.iter().filter_map(|r| r.generation_residual)),
        reports,
    }
}

fn random_coeff(rng: &mut impl Rng) -> Coeff {
    Coeff::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0))
}

/// Nonzero with modulus in `[0.5, 2]`, so degrees are unambiguous.
fn random_unit(rng: &mut impl Rng) -> Coeff {
    let r = rng.random_range(0.5..2.0);
    let th = rng.random_range(0.0..std::f64::consts::TAU);
    Coeff::from_polar(r, th)
}

fn random_poly(rng: &mut impl Rng, deg: usize) -> Poly {
    let mut cs: Vec<Coeff> = (0..deg).map(|_| random_coeff(rng)).collect();
    cs.push(random_unit(rng));
    Poly::new(cs)
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassificationSweep {
    pub pass: bool,
    /// `p = 1`, `deg f ∈ {0, 1, 3, 4}`: draws wrongly reported as existing.
    pub wrong_degree_accepted: usize,
    /// `p ∈ {2, 3}` with an injected monomial: draws wrongly accepted.
    pub perturbed_accepted: usize,
    /// `p ∈ {2, 3}`, exact shape: worst parameter recovery error.
    pub twisted_recovery_error: f64,
    /// `p = 1` quadratics: worst root/scale recovery error.
    pub quadratic_recovery_error: f64,
    pub rejected_valid: usize,
    pub draws: usize,
}

/// Seeded checks of the classification dichotomy.
pub fn classification_sweep(
    seed: u64,
    draws: usize,
    tol: &Tolerance,
) -> Result<ClassificationSweep> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut wrong_degree_accepted = 0;
    for deg in [0usize, 1, 3, 4] {
        for _ in 0..draws {
            let r = classify(&random_poly(&mut rng, deg), 1, tol)?;
            if r.exists || r.reason != Reason::DegFNot2 {
                wrong_degree_accepted += 1;
            }
        }
    }

    let mut perturbed_accepted = 0;
    let mut twisted_recovery_error: f64 = 0.0;
    let mut rejected_valid = 0;
    for p in [2u32, 3] {
        for _ in 0..draws {
            let c1 = random_coeff(&mut rng);
            let cp1 = random_unit(&mut rng);
            let base = crate::polyalg::twisted_derivation(p, c1, cp1);
            let r = classify(&base, p, tol)?;
            match r.families.first().map(|f| &f.params) {
                Some(Family::Twisted { c1: a, cp1: b }) if r.exists => {
                    twisted_recovery_error = twisted_recovery_error
                        .max((a - c1).norm())
                        .max((b - cp1).norm());
                }
                _ => rejected_valid += 1,
            }
            // inject a monomial of magnitude in (1e-6, 1] at a forbidden slot
            let slots: Vec<usize> = (0..=p as usize + 3)
                .filter(|&k| k != 1 && k != p as usize + 1)
                .collect();
            let slot = slots[rng.random_range(0..slots.len())];
            let mag = 10f64.powf(rng.random_range(-5.9..0.0));
            let th = rng.random_range(0.0..std::f64::consts::TAU);
            let bad = base.add(&Poly::monomial(slot, Coeff::from_polar(mag, th)));
            if classify(&bad, p, tol)?.exists {
                perturbed_accepted += 1;
            }
        }
    }

    let mut quadratic_recovery_error: f64 = 0.0;
    for _ in 0..draws {
        let alpha = random_coeff(&mut rng);
        let beta = random_coeff(&mut rng);
        let c = random_unit(&mut rng);
        let f = crate::polyalg::untwisted_derivation(alpha, beta, c);
        let r = classify(&f, 1, tol)?;
        match r.families.first().map(|f| &f.params) {
            Some(Family::Untwisted {
                alpha: a,
                beta: b,
                c: cc,
            }) if r.exists => {
                let direct = (a - alpha).norm().max((b - beta).norm());
                let swapped = (a - beta).norm().max((b - alpha).norm());
                let err = direct.min(swapped).max((cc - c).norm());
                quadratic_recovery_error = quadratic_recovery_error.max(err);
            }
            _ => rejected_valid += 1,
        }
    }

    let recovery_ok = twisted_recovery_error < 1e-9 && quadratic_recovery_error < 1e-9;
    Ok(ClassificationSweep {
        pass: wrong_degree_accepted == 0
            && perturbed_accepted == 0
            && rejected_valid == 0
            && recovery_ok,
        wrong_degree_accepted,
        perturbed_accepted,
        twisted_recovery_error,
        quadratic_recovery_error,
        rejected_valid,
        draws,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct TransportCase {
    pub n: usize,
    #[serde(with = "as_pair")]
    pub alpha: Coeff,
    #[serde(with = "as_pair")]
    pub beta: Coeff,
    #[serde(with = "as_pair")]
    pub c: Coeff,
    pub residual: f64,
}

/// Random `(α, β, c)`: the transported untwisted module against the direct
/// `p = 1` twisted construction, to `order`.
pub fn transport_sweep(
    seed: u64,
    cases: usize,
    order: i64,
    tol: &Tolerance,
) -> Result<Vec<TransportCase>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(cases);
    for i in 0..cases {
        let n = 1 + i % 4;
        let alpha = random_coeff(&mut rng);
        let mut beta = random_coeff(&mut rng);
        while (beta - alpha).norm() < 0.1 {
            beta = random_coeff(&mut rng);
        }
        let c = random_unit(&mut rng);
        let u = construct_untwisted(n, alpha, beta, c, order, tol)?;
        let moved = transport_module(&u, tol)?;
        let direct = construct_twisted(n, 1, 0, c * (alpha - beta), ONE, order, tol)?;
        let (residual, _, _) = moved.t().max_diff(direct.t())?;
        out.push(TransportCase {
            n,
            alpha,
            beta,
            c,
            residual,
        });
    }
    Ok(out)
}
