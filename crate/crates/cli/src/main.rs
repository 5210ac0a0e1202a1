//! `weylmod`: command-line front end.
//!
//! Exit codes: 0 success, 2 unparsable input, 3 arithmetic precondition
//! violated, 4 a consistency check failed. Errors go to stderr as
//! `error: <code>: <message>`.

use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use weylmod::charp::{self, Op2};
use weylmod::curves;
use weylmod::ffield::{primes_in, Fe, FieldCtx};
use weylmod::linalg::{trace_product, MatrixPoly};
use weylmod::mpoly::{self, BivarPoly};
use weylmod::qtorus::{self, LaurentOp, RootCtx};
use weylmod::sweep::{self, Format, SweepPlan};
use weylmod::weyl::{DiffOp, FieldOp, SL2Mat};
use weylmod::MatrixFF;

const DEFAULT_SEED: u64 = 20240607;

#[derive(Parser)]
#[command(name = "weylmod", version, about = "Arithmetic supports of Weyl-algebra modules in characteristic p")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(clap::Args, Clone)]
struct FieldArgs {
    /// Characteristic
    #[arg(short = 'p', long = "prime")]
    p: u64,
    /// Extension degree
    #[arg(short = 'e', long = "ext", default_value_t = 1)]
    e: usize,
    /// Modulus coefficients c0,c1,...,1 (low degree first)
    #[arg(long, value_delimiter = ',')]
    modulus: Option<Vec<u64>>,
}

impl FieldArgs {
    fn ctx(&self) -> Result<FieldCtx, CliError> {
        Ok(FieldCtx::new(self.p, self.e, self.modulus.as_deref())?)
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// p-determinant det(Σ a_ij X_p^i Y_p^j)
    Pdet {
        #[arg(short = 'P', long = "op")]
        op: String,
        #[command(flatten)]
        field: FieldArgs,
        /// Subtract this field element (e.g. `t`) from the operator
        #[arg(long)]
        lambda_shift: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Support curve D(X, Y)
    Curve {
        #[arg(short = 'P', long = "op")]
        op: String,
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        lambda_shift: Option<String>,
        /// Also test D(u^p, v^p) = det at this many random points of F_{p^2}
        #[arg(long, value_name = "K")]
        check_ext: Option<usize>,
        #[arg(long)]
        json: bool,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a sweep plan over a range of primes
    Sweep {
        plan: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
        /// Override the plan's output path
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        csv: bool,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Germ multiplicity along y = 0 of an operator or a curve
    Mult {
        #[arg(short = 'P', long = "op", conflicts_with = "curve")]
        op: Option<String>,
        /// Curve file (JSON from `curve --json`, or text with -p); `-` for stdin
        #[arg(long)]
        curve: Option<String>,
        #[arg(short = 'p', long = "prime")]
        p: Option<u64>,
        /// SL(2) images to report as well: fourier, shear or a,b,c,d separated by ';'
        #[arg(long)]
        sl2: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Determinant polynomial of a two-variable operator on p^2 x p^2 matrices
    Probe2d {
        /// Operator in x1, x2, d1, d2 (and t)
        #[arg(short = 'P', long = "op", conflicts_with = "op_file")]
        op: Option<String>,
        #[arg(long)]
        op_file: Option<PathBuf>,
        #[arg(short = 'p', long = "prime")]
        p: u64,
        #[arg(short = 'e', long = "ext", default_value_t = 2)]
        e: usize,
        #[arg(long, value_delimiter = ',')]
        modulus: Option<Vec<u64>>,
        #[arg(long)]
        json: bool,
    },
    /// q-determinant on the quantum torus at a primitive N-th root of unity
    Qdet {
        /// Laurent polynomial in x1, x2 (and q for the root of unity)
        #[arg(short = 'P', long = "op")]
        op: String,
        #[arg(short = 'N', long = "order")]
        n: u64,
        #[arg(short = 'p', long = "prime")]
        p: u64,
        #[arg(long, default_value_t = 1)]
        u: u64,
        #[arg(long, default_value_t = 1)]
        v: u64,
        /// Print the central polynomial C(Z1, Z2) instead
        #[arg(long)]
        central: bool,
        #[arg(long)]
        json: bool,
    },
    /// Identity battery
    Check {
        #[arg(long, default_value = "identities")]
        suite: String,
        #[arg(long, default_value_t = 97)]
        pmax: u64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Time p-determinants across primes
    Bench {
        #[arg(short = 'P', long = "op")]
        op: String,
        #[arg(long, value_delimiter = ',', default_values_t = [10007u64, 20011, 40009, 100003])]
        primes: Vec<u64>,
        #[arg(long)]
        json: bool,
    },
}

struct CliError {
    exit: u8,
    code: String,
    message: String,
}

impl CliError {
    fn new(code: &str, message: impl Into<String>) -> Self {
        let exit = match code {
            "syntax" | "division-by-zero" | "plan-syntax" | "plan-invalid" | "usage" | "io" => 2,
            "consistency" => 4,
            _ => 3,
        };
        CliError { exit, code: code.into(), message: message.into() }
    }
}

macro_rules! from_lib_error {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::new(e.code(), e.to_string())
            }
        }
    )*};
}

from_lib_error!(
    weylmod::FieldError,
    weylmod::weyl::WeylError,
    weylmod::charp::CharpError,
    weylmod::curves::CurveError,
    weylmod::mpoly::PolyParseError,
    weylmod::qtorus::QtorusError,
    weylmod::sweep::SweepError,
    weylmod::sweep::PlanError
);

fn main() -> ExitCode {
    // single-dash long flags such as `-pmax` are accepted as well
    let args = std::env::args().map(|a| match a.as_str() {
        "-pmax" | "-seed" | "-jobs" | "-json" | "-suite" | "-central" => format!("-{a}"),
        _ => a,
    });
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            // clap spreads one error over several lines; keep it to one
            let text = e.to_string();
            let msg: Vec<&str> = text
                .lines()
                .take_while(|l| !l.starts_with("Usage:") && !l.starts_with("For more information"))
                .map(|l| l.trim().trim_start_matches("error: "))
                .filter(|l| !l.is_empty() && !l.starts_with("tip:"))
                .collect();
            eprintln!("error: usage: {}", msg.join(" "));
            return ExitCode::from(2);
        }
    };
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}: {}", e.code, e.message);
            ExitCode::from(e.exit)
        }
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::new("io", format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn field_op(op: &str, ctx: &FieldCtx, shift: &Option<String>) -> Result<FieldOp, CliError> {
    let fop = DiffOp::parse(op)?.reduce(ctx)?;
    match shift {
        None => Ok(fop),
        Some(s) => {
            let lambda = mpoly::parse_field_element(ctx, s)?;
            Ok(fop.sub(&FieldOp::constant(ctx, lambda))?)
        }
    }
}

fn element_json(ctx: &FieldCtx, a: Fe) -> serde_json::Value {
    json!({ "p": ctx.p(), "e": ctx.degree(), "value": ctx.coeffs(&a) })
}

fn run(cmd: Cmd) -> Result<(), CliError> {
    match cmd {
        Cmd::Pdet { op, field, lambda_shift, json } => {
            let ctx = field.ctx()?;
            let d = charp::p_determinant(&field_op(&op, &ctx, &lambda_shift)?)?;
            if json {
                println!("{}", element_json(&ctx, d));
            } else {
                println!("{}", ctx.display(d));
            }
            Ok(())
        }
        Cmd::Curve { op, field, lambda_shift, check_ext, json, seed, out } => {
            let ctx = field.ctx()?;
            let fop = field_op(&op, &ctx, &lambda_shift)?;
            let curve = charp::support_curve(&fop)?;
            let failures = match check_ext {
                Some(k) => {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    Some((k, charp::extension_consistency(&fop, &curve, 2, k, &mut rng)?))
                }
                None => None,
            };
            let text = if json {
                let mut v = serde_json::to_value(&curve.d).expect("serializable");
                if let Some((k, bad)) = failures {
                    v["extension_check"] = json!({ "points": k, "failures": bad });
                }
                format!("{v}\n")
            } else {
                let mut t = format!("{}\n", curve.d);
                if let Some((k, bad)) = failures {
                    let verdict = if bad == 0 { "pass" } else { "FAIL" };
                    t.push_str(&format!("extension-check: {verdict} ({} of {k} points agree)\n", k - bad));
                }
                t
            };
            emit(&out, &text)?;
            match failures {
                Some((k, bad)) if bad > 0 => {
                    Err(CliError::new("consistency", format!("{bad} of {k} extension points disagree")))
                }
                _ => Ok(()),
            }
        }
        Cmd::Sweep { plan, jobs, out, json, csv, seed } => {
            let text = std::fs::read_to_string(&plan)
                .map_err(|e| CliError::new("io", format!("cannot read {}: {e}", plan.display())))?;
            let mut sp = SweepPlan::parse(&text, plan.parent())?;
            if let Some(s) = seed {
                sp.seed = s;
            }
            if json {
                sp.format = Format::Json;
            }
            if csv {
                sp.format = Format::Csv;
            }
            let result = sweep::run_sweep(&sp, jobs)?;
            emit(&out.or(sp.output.clone()), &result.render(sp.format))?;
            let failed: Vec<String> = result
                .entries
                .iter()
                .filter(|e| e.report().is_some() && !e.all_checks_passed())
                .map(|e| e.p.to_string())
                .collect();
            if failed.is_empty() {
                Ok(())
            } else {
                Err(CliError::new("consistency", format!("checks failed at p = {}", failed.join(", "))))
            }
        }
        Cmd::Mult { op, curve, p, sl2, json } => {
            let mats = match sl2 {
                Some(s) => sweep::parse_sl2_list(&s).map_err(|m| CliError::new("syntax", m))?,
                None => Vec::new(),
            };
            let (base, images): (u32, Vec<u32>) = match (op, curve) {
                (Some(op), None) => {
                    let d = DiffOp::parse(&op)?;
                    let imgs = mats.iter().map(|g| d.sl2_act(g).germ_multiplicity_y0()).collect::<Result<_, _>>()?;
                    (d.germ_multiplicity_y0()?, imgs)
                }
                (None, Some(src)) => {
                    let h = read_curve(&src, p)?;
                    let imgs = mats
                        .iter()
                        .map(|g| curves::germ_multiplicity_y0(&curves::transform(&h, g)))
                        .collect::<Result<_, _>>()?;
                    (curves::germ_multiplicity_y0(&h)?, imgs)
                }
                _ => return Err(CliError::new("usage", "give exactly one of -P or --curve")),
            };
            if json {
                let sl2: Vec<_> = mats
                    .iter()
                    .zip(&images)
                    .map(|(g, m)| json!({ "matrix": [g.a, g.b, g.c, g.d], "multiplicity": m }))
                    .collect();
                println!("{}", json!({ "y0_mult": base, "sl2": sl2 }));
            } else {
                println!("{base}");
                for (g, m) in mats.iter().zip(&images) {
                    println!("{}: {m}", sl2_label(g));
                }
            }
            Ok(())
        }
        Cmd::Probe2d { op, op_file, p, e, modulus, json } => {
            let text = match (op, op_file) {
                (Some(t), None) => t,
                (None, Some(path)) => std::fs::read_to_string(&path)
                    .map_err(|err| CliError::new("io", format!("cannot read {}: {err}", path.display())))?,
                _ => return Err(CliError::new("usage", "give exactly one of -P or --op-file")),
            };
            let ctx = FieldCtx::new(p, e, modulus.as_deref())?;
            let op2 = Op2::parse(&ctx, text.trim())?;
            let r = charp::support_multidim_probe(&op2)?;
            let names = ["X1", "X2", "Y1", "Y2"];
            if json {
                let v = json!({
                    "d": r.d,
                    "p_power": r.p_power,
                    "root": r.root.as_ref().map(|x| x.to_text(&names)),
                    "grid": r.grid,
                });
                println!("{v}");
            } else {
                println!("D = {}", r.d.to_text(&names));
                println!("p-th power: {}", r.p_power);
                if let Some(root) = &r.root {
                    println!("root = {}", root.to_text(&names));
                }
            }
            Ok(())
        }
        Cmd::Qdet { op, n, p, u, v, central, json } => {
            let rc = RootCtx::new(p, n)?;
            let lop = LaurentOp::parse(&rc, &op)?;
            if central {
                let c = qtorus::central_polynomial(&lop, &rc)?;
                if json {
                    println!("{}", serde_json::to_string(&c).expect("serializable"));
                } else {
                    println!("{}", c.to_text(&["Z1", "Z2"]));
                }
            } else {
                let d = qtorus::q_determinant(&lop, &rc, rc.ctx.from_u64(u), rc.ctx.from_u64(v))?;
                if json {
                    println!("{}", element_json(&rc.ctx, d));
                } else {
                    println!("{}", rc.ctx.display(d));
                }
            }
            Ok(())
        }
        Cmd::Check { suite, pmax, seed } => run_checks(&suite, pmax, seed),
        Cmd::Bench { op, primes, json } => {
            let d = DiffOp::parse(&op)?;
            let rows = sweep::benchmark_linear(&d, &primes)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&rows).expect("serializable"));
            } else {
                println!("{:>8} {:>10} {:>6} {:>10} {:>6}", "p", "ms", "shift", "path", "ratio");
                for r in rows {
                    let ratio = r.ratio.map(|x| format!("{x:.2}")).unwrap_or_else(|| "-".into());
                    let path = serde_json::to_value(r.path).expect("serializable");
                    println!("{:>8} {:>10.3} {:>6} {:>10} {:>6}", r.p, r.ms, r.shift, path.as_str().unwrap_or(""), ratio);
                }
            }
            Ok(())
        }
    }
}

fn sl2_label(g: &SL2Mat) -> String {
    match *g {
        SL2Mat::FOURIER => "fourier".into(),
        SL2Mat::SHEAR => "shear".into(),
        SL2Mat::IDENTITY => "identity".into(),
        _ => format!("{},{},{},{}", g.a, g.b, g.c, g.d),
    }
}

fn read_curve(src: &str, p: Option<u64>) -> Result<BivarPoly, CliError> {
    let text = if src == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| CliError::new("io", format!("cannot read stdin: {e}")))?;
        s
    } else {
        std::fs::read_to_string(Path::new(src)).map_err(|e| CliError::new("io", format!("cannot read {src}: {e}")))?
    };
    let text = text.trim();
    if text.starts_with('{') {
        let v: serde_json::Value =
            serde_json::from_str(text).map_err(|e| CliError::new("syntax", format!("curve JSON: {e}")))?;
        return Ok(mpoly::poly_from_json(&v, None)?);
    }
    let p = p.ok_or_else(|| CliError::new("usage", "a text curve needs -p"))?;
    Ok(BivarPoly::parse(&FieldCtx::prime(p)?, text)?)
}

/// Each suite returns (cases run, failures).
fn run_checks(suite: &str, pmax: u64, seed: u64) -> Result<(), CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let suites: Vec<&str> = match suite {
        "identities" | "all" => vec!["field", "rep", "freshman", "wilson", "qtorus"],
        "field" | "rep" | "freshman" | "wilson" | "qtorus" => vec![suite],
        _ => return Err(CliError::new("usage", format!("unknown suite '{suite}'"))),
    };
    let primes = primes_in(2, pmax);
    let mut failed = Vec::new();
    for name in suites {
        let (runs, bad) = match name {
            "field" => check_field(&primes, &mut rng),
            "rep" => check_rep(&primes),
            "freshman" => check_freshman(&primes, &mut rng),
            "wilson" => check_wilson(&primes),
            _ => check_qtorus(&primes, &mut rng),
        };
        println!("{name}: {} of {runs} passed", runs - bad);
        if bad > 0 {
            failed.push(name);
        }
    }
    if failed.is_empty() {
        println!("all passed");
        Ok(())
    } else {
        Err(CliError::new("consistency", format!("failing suites: {}", failed.join(", "))))
    }
}

fn check_field(primes: &[u64], rng: &mut ChaCha8Rng) -> (usize, usize) {
    let mut runs = 0;
    let mut bad = 0;
    for &p in primes {
        for e in [1, 2] {
            let f = FieldCtx::new(p, e, None).expect("prime");
            for _ in 0..50 {
                let (a, b) = (f.random(rng), f.random(rng));
                let lhs = f.pow(f.add(a, b), p as u128);
                let ok = lhs == f.add(f.pow(a, p as u128), f.pow(b, p as u128))
                    && (a.is_zero() || f.mul(a, f.inv(a).expect("nonzero")) == f.one())
                    && f.frobenius(f.mul(a, b)) == f.mul(f.frobenius(a), f.frobenius(b));
                runs += 1;
                bad += usize::from(!ok);
            }
        }
    }
    (runs, bad)
}

fn check_rep(primes: &[u64]) -> (usize, usize) {
    let bad = primes
        .iter()
        .filter(|&&p| {
            let f = FieldCtx::prime(p).expect("prime");
            let r = charp::rep_generators(&f).expect("prime field");
            let comm = r.y.mul(&r.x).and_then(|a| a.sub(&r.x.mul(&r.y)?)).expect("square");
            !(comm == MatrixFF::identity(&f, p as usize)
                && r.x.pow(p).expect("square").is_zero()
                && r.y.pow(p).expect("square").is_zero())
        })
        .count();
    (primes.len(), bad)
}

fn check_freshman(primes: &[u64], rng: &mut ChaCha8Rng) -> (usize, usize) {
    let mut runs = 0;
    let mut bad = 0;
    for &p in primes.iter().filter(|&&p| p >= 5) {
        let f = FieldCtx::prime(p).expect("prime");
        for _ in 0..3 {
            // G' must be a derivative: random G, differentiated
            let deg = rng.gen_range(0..=5usize);
            let g: Vec<Fe> = (0..=deg + 1).map(|_| f.random(rng)).collect();
            let gp = weylmod::poly::derivative(&f, &g);
            runs += 1;
            bad += usize::from(!charp::freshman_identity_check(&gp, &f));
        }
    }
    (runs, bad)
}

fn check_wilson(primes: &[u64]) -> (usize, usize) {
    let bad = primes
        .iter()
        .filter(|&&p| {
            let f = FieldCtx::prime(p).expect("prime");
            let fx = MatrixPoly::new(vec![MatrixFF::zeros(&f, 1, 1), MatrixFF::identity(&f, 1)]).expect("square");
            trace_product(&fx, &MatrixFF::identity(&f, 1), 1).expect("p >= 1") != f.neg(f.one())
        })
        .count();
    (primes.len(), bad)
}

fn check_qtorus(primes: &[u64], rng: &mut ChaCha8Rng) -> (usize, usize) {
    let mut runs = 0;
    let mut bad = 0;
    for n in [2u64, 3, 4, 6, 8, 16] {
        for &p in primes.iter().filter(|&&p| p > 2 && (p - 1) % n == 0) {
            let rc = RootCtx::new(p, n).expect("admissible");
            let (u, v) = qtorus::clock_shift(&rc);
            let id = MatrixFF::identity(&rc.ctx, n as usize);
            let ok = u.mul(&v).expect("square") == v.mul(&u).expect("square").scale(rc.zeta)
                && u.pow(n).expect("square") == id
                && v.pow(n).expect("square") == id
                && qtorus::quantum_freshman_check(&rc, 10, rng);
            runs += 1;
            bad += usize::from(!ok);
        }
    }
    (runs, bad)
}
