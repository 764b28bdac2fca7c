//! `vpl`: construct, verify and classify modules over `(C[t], D)` from the
//! command line. Every run prints one JSON object with a `"status"` field.
//!
//! Exit codes: 0 success or pass, 1 verification failure, 2 usage or domain
//! error.

mod parse;

use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use vpl_core::exec::Execution;
use vpl_core::modules::{construct, evaluate_y, restrict_to_fixed_subalgebra};
use vpl_core::sweep::{
    classification_sweep, run_sweep, transport_sweep, SweepConfig, DEFAULT_SEED,
};
use vpl_core::verify::{classify, oracle_compare, verify_module};
use vpl_core::{Coeff, ModuleSpec, Poly, Tolerance, TwistedModule};

const TOLERANCE_ENV: &str = "VPL_TOLERANCE";

#[derive(Parser, Debug)]
#[command(
    name = "vpl",
    version,
    about = "Modules over the vertex algebra (C[t], D)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Equality threshold for coefficients.
    #[arg(long, global = true)]
    eps_eq: Option<f64>,
    /// Residual threshold; overrides VPL_TOLERANCE.
    #[arg(long, global = true)]
    eps_residual: Option<f64>,
    /// Write the JSON result here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a module from its closed form.
    Construct(ModuleArgs),
    /// Check conditions, axioms and indecomposability of a module.
    Verify {
        #[command(flatten)]
        module: ModuleArgs,
        /// Read the module JSON from stdin.
        #[arg(long, conflicts_with = "input")]
        stdin: bool,
        /// Read the module JSON from a file.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Degree bound for the axiom checks.
        #[arg(long, default_value_t = 4)]
        degmax: usize,
    },
    /// Decide existence of modules for `D = f(t) d/dt` and `g` of order `p`.
    Classify {
        /// Coefficients of f, constant term first.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, value_parser = parse::complex, required = true)]
        f: Vec<Coeff>,
        #[arg(long, default_value_t = 1)]
        p: u32,
    },
    /// Expand `Y_M(P(t), x)` for a polynomial `P`.
    Expand {
        #[command(flatten)]
        module: ModuleArgs,
        /// Coefficients of P, constant term first.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, value_parser = parse::complex, default_value = "0,1")]
        poly: Vec<Coeff>,
    },
    /// Restrict a module to the fixed-point subalgebra `C[t^p]`.
    Restrict(ModuleArgs),
    /// Compare the closed form with the recursion oracle.
    OracleCompare(ModuleArgs),
    /// Verify every module in a parameter grid plus seeded random checks.
    Sweep {
        #[arg(long, default_value_t = 4)]
        n_max: usize,
        #[arg(long, default_value_t = 3)]
        p_max: u32,
        /// Truncation in exponent numerators per unit of p.
        #[arg(long, default_value_t = 20)]
        order_per_p: i64,
        #[arg(long, default_value_t = 4)]
        degmax: usize,
        /// Random draws per classification case.
        #[arg(long, default_value_t = 20)]
        draws: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Run cells on one thread.
        #[arg(long)]
        sequential: bool,
    },
}

/// Parameters of a single module. Giving `--alpha/--beta/--c` selects the
/// untwisted family, otherwise `--p/--c1/--cp1` select the twisted one.
#[derive(Args, Debug)]
struct ModuleArgs {
    #[arg(long, default_value_t = 1)]
    n: usize,
    #[arg(long)]
    p: Option<u32>,
    #[arg(long, default_value_t = 0)]
    l: u32,
    #[arg(long, allow_hyphen_values = true, value_parser = parse::complex)]
    c1: Option<Coeff>,
    #[arg(long, allow_hyphen_values = true, value_parser = parse::complex)]
    cp1: Option<Coeff>,
    #[arg(long, allow_hyphen_values = true, value_parser = parse::complex)]
    alpha: Option<Coeff>,
    #[arg(long, allow_hyphen_values = true, value_parser = parse::complex)]
    beta: Option<Coeff>,
    #[arg(long, allow_hyphen_values = true, value_parser = parse::complex)]
    c: Option<Coeff>,
    /// Truncation: highest kept exponent numerator, in units of 1/p.
    #[arg(long, allow_hyphen_values = true)]
    order: Option<i64>,
}

/// A failed run: exit code and message.
struct Failure {
    code: u8,
    status: &'static str,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        status: "usage_error",
        message: message.into(),
    }
}

impl From<vpl_core::Error> for Failure {
    fn from(e: vpl_core::Error) -> Self {
        Failure {
            code: 2,
            status: "error",
            message: e.to_string(),
        }
    }
}

impl ModuleArgs {
    fn spec(&self) -> Result<ModuleSpec, Failure> {
        let untwisted = [self.alpha, self.beta, self.c];
        let spec = if untwisted.iter().any(Option::is_some) {
            let [Some(alpha), Some(beta), Some(c)] = untwisted else {
                return Err(usage("the untwisted family needs --alpha, --beta and --c"));
            };
            if self.c1.is_some() || self.cp1.is_some() || self.p.is_some_and(|p| p != 1) {
                return Err(usage(
                    "--alpha/--beta/--c cannot be combined with --p, --c1 or --cp1",
                ));
            }
            ModuleSpec::untwisted(self.n, alpha, beta, c)
        } else {
            let p = self.p.ok_or_else(|| usage("--p is required"))?;
            let cp1 = self.cp1.ok_or_else(|| usage("--cp1 is required"))?;
            ModuleSpec::twisted(self.n, p, self.l, self.c1.unwrap_or_default(), cp1)
        };
        let spec = match self.order {
            Some(hi) => spec.with_hi(hi),
            None => spec,
        };
        spec.validate()?;
        Ok(spec)
    }
}

fn tolerance(cli: &Cli) -> Result<Tolerance, Failure> {
    let base = Tolerance::default();
    let env = match std::env::var(TOLERANCE_ENV) {
        Ok(v) => Some(
            v.trim()
                .parse::<f64>()
                .map_err(|_| usage(format!("{TOLERANCE_ENV}={v:?} is not a number")))?,
        ),
        Err(_) => None,
    };
    let eps_residual = cli.eps_residual.or(env).unwrap_or(base.eps_residual);
    Ok(Tolerance::new(
        cli.eps_eq.unwrap_or(base.eps_eq),
        eps_residual,
    )?)
}

/// Adds `"status"` to an object body.
fn with_status(body: Value, status: &str) -> Value {
    match body {
        Value::Object(mut map) => {
            map.insert("status".into(), json!(status));
            Value::Object(map)
        }
        other => json!({ "status": status, "result": other }),
    }
}

fn to_json<T: serde::Serialize>(x: &T) -> Result<Value, Failure> {
    serde_json::to_value(x).map_err(|e| Failure {
        code: 2,
        status: "error",
        message: e.to_string(),
    })
}

fn read_module(stdin: bool, input: &Option<PathBuf>) -> Result<Option<TwistedModule>, Failure> {
    let text = if stdin {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| usage(format!("reading stdin: {e}")))?;
        s
    } else if let Some(path) = input {
        std::fs::read_to_string(path)
            .map_err(|e| usage(format!("reading {}: {e}", path.display())))?
    } else {
        return Ok(None);
    };
    let module: TwistedModule =
        serde_json::from_str(&text).map_err(|e| usage(format!("invalid module JSON: {e}")))?;
    Ok(Some(module))
}

/// Runs the command; returns the JSON body and exit code.
fn run(cli: &Cli) -> Result<(Value, u8), Failure> {
    let tol = tolerance(cli)?;
    match &cli.command {
        Command::Construct(args) => {
            let module = construct(&args.spec()?, &tol)?;
            Ok((with_status(to_json(&module)?, "ok"), 0))
        }
        Command::Verify {
            module,
            stdin,
            input,
            degmax,
        } => {
            let module = match read_module(*stdin, input)? {
                Some(m) => m,
                // build at no tighter than the default so a strict
                // tolerance reports a failed check rather than a build error
                None => {
                    let build =
                        tol.with_residual(tol.eps_residual.max(Tolerance::default().eps_residual))?;
                    construct(&module.spec()?, &build)?
                }
            };
            let report = verify_module(&module, *degmax, &tol)?;
            let (status, code) = if report.pass {
                ("pass", 0)
            } else {
                ("fail", 1)
            };
            Ok((with_status(to_json(&report)?, status), code))
        }
        Command::Classify { f, p } => {
            let result = classify(&Poly::new(f.clone()), *p, &tol)?;
            Ok((with_status(to_json(&result)?, "ok"), 0))
        }
        Command::Expand { module, poly } => {
            let spec = module.spec()?;
            let m = construct(&spec, &tol)?;
            let poly = Poly::new(poly.clone());
            let series = evaluate_y(&m, &poly)?;
            let body = json!({ "poly": to_json(&poly)?, "series": to_json(&series)? });
            Ok((with_status(body, "ok"), 0))
        }
        Command::Restrict(args) => {
            let m = construct(&args.spec()?, &tol)?;
            let series = restrict_to_fixed_subalgebra(&m, &tol)?;
            let body = json!({ "p": m.p(), "series": to_json(&series)? });
            Ok((with_status(body, "ok"), 0))
        }
        Command::OracleCompare(args) => {
            let report = oracle_compare(&args.spec()?, &tol)?;
            let code = if report.status == "pass" { 0 } else { 1 };
            Ok((to_json(&report)?, code))
        }
        Command::Sweep {
            n_max,
            p_max,
            order_per_p,
            degmax,
            draws,
            seed,
            sequential,
        } => {
            if *p_max == 0 || *n_max == 0 {
                return Err(usage("--n-max and --p-max must be positive"));
            }
            let config = SweepConfig {
                n_max: *n_max,
                p_values: (1..=*p_max).collect(),
                order_per_p: *order_per_p,
                degmax: *degmax,
                tol,
                ..SweepConfig::default()
            };
            let exec = if *sequential {
                Execution::Sequential
            } else {
                Execution::Parallel
            };
            let grid = run_sweep(&config, exec);
            let classes = classification_sweep(*seed, *draws, &tol)?;
            let transport = transport_sweep(*seed, 10, 12, &tol)?;
            let transport_ok = transport.iter().all(|c| c.residual < config.oracle_eps);
            let pass = grid.pass && classes.pass && transport_ok;
            let body = json!({
                "seed": seed,
                "grid": to_json(&grid)?,
                "classification": to_json(&classes)?,
                "transport": to_json(&transport)?,
            });
            let (status, code) = if pass { ("pass", 0) } else { ("fail", 1) };
            Ok((with_status(body, status), code))
        }
    }
}

fn emit(body: &Value, output: &Option<PathBuf>) -> Result<(), String> {
    let text = format!("{body}\n");
    match output {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| format!("writing {}: {e}", path.display()))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            let msg = e.render().to_string();
            let first = msg
                .lines()
                .next()
                .unwrap_or_default()
                .trim_start_matches("error: ");
            let body = json!({ "status": "usage_error", "error": first });
            println!("{body}");
            return ExitCode::from(2);
        }
    };
    let (body, code) = match run(&cli) {
        Ok(r) => r,
        Err(f) => (json!({ "status": f.status, "error": f.message }), f.code),
    };
    if let Err(msg) = emit(&body, &cli.output) {
        eprintln!("{msg}");
        println!("{}", json!({ "status": "error", "error": msg }));
        return ExitCode::from(2);
    }
    ExitCode::from(code)
}
