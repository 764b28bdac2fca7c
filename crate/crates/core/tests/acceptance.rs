//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::process::ExitCode;
use std::time::Instant;

use vpl_core::coeff::{real, Coeff, Tolerance, ONE, ZERO};
use vpl_core::exec::Execution;
use vpl_core::modules::{construct, construct_untwisted, restrict_to_fixed_subalgebra, ModuleSpec};
use vpl_core::sweep::{
    classification_sweep, run_sweep, standard_samples, transport_sweep, SweepConfig, DEFAULT_SEED,
};
use vpl_core::verify::check_indecomposable;

struct Outcome {
    pass: bool,
    detail: String,
}

fn line(id: u32, name: &str, o: &Outcome) -> bool {
    let tag = if o.pass { "PASS" } else { "FAIL" };
    println!("{tag} [{id}] {name}: {}", o.detail);
    o.pass
}

fn ok(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn err(e: impl std::fmt::Display) -> Outcome {
    ok(false, format!("error: {e}"))
}

fn main() -> ExitCode {
    let tol = Tolerance::default();
    let mut all = true;

    let config = SweepConfig::default();
    let started = Instant::now();
    let sweep = run_sweep(&config, Execution::default());
    let elapsed = started.elapsed().as_secs_f64();
    let errors: Vec<_> = sweep
        .reports
        .iter()
        .filter_map(|r| r.error.clone())
        .collect();

    // 1
    let o = if errors.is_empty() {
        let worst = sweep.max_lemma_residual;
        ok(
            worst < 1e-9 && sweep.reports.iter().all(|r| r.lemma_residual < 1e-9),
            format!(
                "{} cells, max residual {worst:.3e} < 1e-9, sweep time {elapsed:.2}s",
                sweep.cells
            ),
        )
    } else {
        ok(
            false,
            format!("{} cells failed to build: {}", errors.len(), errors[0]),
        )
    };
    all &= line(1, "closed-form validity", &o);

    // 2
    let worst = sweep.max_axiom_residual;
    let o = ok(
        errors.is_empty() && worst < 1e-9,
        format!("degmax 4, max residual {worst:.3e} < 1e-9"),
    );
    all &= line(2, "module axioms M1-M5", &o);

    // 3
    let worst = sweep.max_oracle_residual;
    let o = ok(
        errors.is_empty() && worst < 1e-8,
        format!("max coefficient difference {worst:.3e} < 1e-8"),
    );
    all &= line(3, "oracle equivalence", &o);

    // 4
    let o = match classification_sweep(DEFAULT_SEED, 20, &tol) {
        Ok(c) => ok(
            c.pass,
            format!(
                "wrong-degree accepted {}, perturbed accepted {}, valid rejected {}, recovery errors {:.1e}/{:.1e} < 1e-9",
                c.wrong_degree_accepted,
                c.perturbed_accepted,
                c.rejected_valid,
                c.twisted_recovery_error,
                c.quadratic_recovery_error
            ),
        ),
        Err(e) => err(e),
    };
    all &= line(4, "classification dichotomy", &o);

    // 5
    let all_indec = errors.is_empty() && sweep.reports.iter().all(|r| r.indecomposable);
    let mut decomposable_flagged = true;
    let mut detail = String::new();
    for (c1, cp1) in standard_samples() {
        let spec = ModuleSpec::twisted(3, 2, 0, c1, cp1).with_jordan(vec![2, 1]);
        match construct(&spec, &tol).and_then(|m| check_indecomposable(&m, &tol)) {
            Ok(ind) => {
                decomposable_flagged &= !ind.indecomposable;
                detail = format!("J2+J1 profile {:?}", ind.rank_profile);
            }
            Err(e) => {
                decomposable_flagged = false;
                detail = format!("error: {e}");
            }
        }
    }
    let spec = ModuleSpec::untwisted(3, ONE, ZERO, ONE)
        .with_hi(12)
        .with_jordan(vec![2, 1]);
    if let Ok(ind) = construct(&spec, &tol).and_then(|m| check_indecomposable(&m, &tol)) {
        decomposable_flagged &= !ind.indecomposable;
    } else {
        decomposable_flagged = false;
    }
    let o = ok(
        all_indec && decomposable_flagged,
        format!(
            "all {} constructed modules indecomposable; {detail} rejected",
            sweep.cells
        ),
    );
    all &= line(5, "indecomposability", &o);

    // 6
    let params = [
        (ZERO, ZERO, ONE),
        (ONE, ZERO, ONE),
        (
            Coeff::new(0.5, -1.0),
            Coeff::new(2.0, 0.5),
            Coeff::new(-1.5, 0.25),
        ),
        (real(3.0), real(3.0), real(-0.25)),
    ];
    let mut pass = true;
    let mut lows = Vec::new();
    for n in 1..=5 {
        for &(a, b, c) in &params {
            match construct_untwisted(n, a, b, c, 20, &tol) {
                Ok(m) => {
                    let t = m.t();
                    let lo = t.leading_num(tol.eps_eq * t.max_norm().max(1.0));
                    pass &= lo == Some(-(n as i64));
                    lows.push(lo.unwrap_or(i64::MAX));
                }
                Err(_) => pass = false,
            }
        }
    }
    lows.dedup();
    let o = ok(pass, format!("lowest exponents by n: {lows:?}"));
    all &= line(6, "untwisted lowest degree -n", &o);

    // 7
    let mut pass = true;
    let mut worst_l: f64 = 0.0;
    let mut detail = String::new();
    for n in 1..=4 {
        for (c1, cp1) in standard_samples() {
            let build = |l| {
                construct(&ModuleSpec::twisted(n, 2, l, c1, cp1), &tol)
                    .and_then(|m| restrict_to_fixed_subalgebra(&m, &tol))
            };
            match (build(0), build(1)) {
                (Ok(a), Ok(b)) => match a.max_diff(&b) {
                    Ok((d, _, _)) => worst_l = worst_l.max(d),
                    Err(e) => {
                        pass = false;
                        detail = e.to_string();
                    }
                },
                (Err(e), _) | (_, Err(e)) => {
                    pass = false;
                    detail = e.to_string();
                }
            }
        }
    }
    let o = ok(
        pass && worst_l < 1e-10,
        if detail.is_empty() {
            format!(
                "closed form matched within 1e-9; max l=0 vs l=1 difference {worst_l:.3e} < 1e-10"
            )
        } else {
            format!("error: {detail}")
        },
    );
    all &= line(7, "fixed-subalgebra restriction", &o);

    // 8
    let o = match transport_sweep(DEFAULT_SEED, 10, 12, &tol) {
        Ok(cases) => {
            let worst = cases.iter().fold(0.0f64, |m, c| m.max(c.residual));
            ok(
                worst < 1e-8,
                format!("10 random cases, order 12, max residual {worst:.3e} < 1e-8"),
            )
        }
        Err(e) => err(e),
    };
    all &= line(8, "sigma-transport consistency", &o);

    // 9
    let gens: Vec<f64> = sweep
        .reports
        .iter()
        .filter(|r| r.cell.n <= 4 && r.cell.p >= 2)
        .map(|r| r.generation_residual.unwrap_or(f64::NAN))
        .collect();
    let worst = gens
        .iter()
        .fold(0.0f64, |m, &v| if v.is_nan() { f64::NAN } else { m.max(v) });
    let o = ok(
        errors.is_empty() && worst < 1e-8,
        format!(
            "{} twisted modules, max relative residual {worst:.3e} < 1e-8",
            gens.len()
        ),
    );
    all &= line(9, "H in generated algebra", &o);

    if !errors.is_empty() {
        for r in sweep.reports.iter().filter(|r| r.error.is_some()) {
            println!("  cell {:?}: {}", r.cell, r.error.as_deref().unwrap_or(""));
        }
    }
    for r in sweep
        .reports
        .iter()
        .filter(|r| !r.pass && r.error.is_none())
    {
        println!(
            "  failing cell {:?}: lemma {:.2e} axioms {:?} oracle {:?}",
            r.cell, r.lemma_residual, r.axiom_residual, r.oracle_residual
        );
    }

    if all {
        println!("acceptance: all criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: FAILED");
        ExitCode::FAILURE
    }
}
