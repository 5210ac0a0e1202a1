//! Scans over ranges of primes: per-prime curve reports, cross-prime
//! stability of the invariants, and timing of the linear-in-`p` path.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::charp::{self, CharpError, DetPath};
use crate::curves::{self, CurveReport};
use crate::ffield::{primes_in, FieldCtx};
use crate::mpoly::BivarPoly;
use crate::weyl::{DiffOp, SL2Mat};

/// The bundled operator corpus, one expression per line.
pub const CORPUS: &str = include_str!("../data/corpus.txt");

pub fn corpus() -> Vec<String> {
    CORPUS
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(String::from)
        .collect()
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlanError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("missing key '{0}'")]
    Missing(&'static str),
    #[error("cannot read {path}: {msg}")]
    Io { path: String, msg: String },
    #[error("invalid plan: {0}")]
    Invalid(String),
}

impl PlanError {
    pub fn code(&self) -> &'static str {
        match self {
            PlanError::Syntax { .. } | PlanError::Missing(_) => "plan-syntax",
            PlanError::Io { .. } => "io",
            PlanError::Invalid(_) => "plan-invalid",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    DegreeBound,
    ExtensionConsistency,
    MultiplicityMatch,
    DivisibilityProbe,
}

impl Check {
    pub const ALL: [Check; 4] =
        [Check::DegreeBound, Check::ExtensionConsistency, Check::MultiplicityMatch, Check::DivisibilityProbe];

    pub fn name(self) -> &'static str {
        match self {
            Check::DegreeBound => "degree-bound",
            Check::ExtensionConsistency => "extension-consistency",
            Check::MultiplicityMatch => "multiplicity-match",
            Check::DivisibilityProbe => "divisibility-probe",
        }
    }
}

impl FromStr for Check {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Check::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| format!("unknown check '{s}'"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub operator: String,
    pub p_min: u64,
    pub p_max: u64,
    /// Extension degree of the coefficient field.
    pub e: usize,
    pub checks: Vec<Check>,
    pub sl2: Vec<SL2Mat>,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub seed: u64,
    /// Random points per extension-consistency check.
    pub ext_samples: usize,
    /// Record determinant timings (off for byte-reproducible output).
    pub timings: bool,
    /// Move the interpolation nodes until every determinant takes the banded path.
    pub shift_retry: bool,
}

impl SweepPlan {
    pub fn new(operator: impl Into<String>, p_min: u64, p_max: u64) -> Self {
        SweepPlan {
            operator: operator.into(),
            p_min,
            p_max,
            e: 1,
            checks: Check::ALL.to_vec(),
            sl2: vec![SL2Mat::FOURIER],
            output: None,
            format: Format::Json,
            seed: 0,
            ext_samples: 20,
            timings: true,
            shift_retry: false,
        }
    }

    /// Reads `key = value` lines; `#` starts a comment. A relative
    /// `operator_file` or `output` is resolved against `base`.
    pub fn parse(text: &str, base: Option<&Path>) -> Result<Self, PlanError> {
        let mut plan = SweepPlan::new(String::new(), 0, 0);
        let (mut op, mut pmin, mut pmax) = (None, None, None);
        let resolve = |v: &str| match base {
            Some(b) if Path::new(v).is_relative() => b.join(v),
            _ => PathBuf::from(v),
        };
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| PlanError::Syntax { line: n + 1, msg };
            let (key, value) = line.split_once('=').ok_or_else(|| err("expected key = value".into()))?;
            let (key, value) = (key.trim(), value.trim());
            let num = |v: &str| v.parse::<u64>().map_err(|e| err(format!("{key}: {e}")));
            let flag = |v: &str| v.parse::<bool>().map_err(|e| err(format!("{key}: {e}")));
            match key {
                "operator" => op = Some(value.to_string()),
                "operator_file" => {
                    let path = resolve(value);
                    let text = std::fs::read_to_string(&path)
                        .map_err(|e| PlanError::Io { path: path.display().to_string(), msg: e.to_string() })?;
                    op = Some(text.trim().to_string());
                }
                "p_min" => pmin = Some(num(value)?),
                "p_max" => pmax = Some(num(value)?),
                "e" => plan.e = num(value)? as usize,
                "checks" => {
                    plan.checks = value
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(|s| s.parse().map_err(err))
                        .collect::<Result<_, _>>()?;
                }
                "sl2" => plan.sl2 = parse_sl2_list(value).map_err(err)?,
                "output" => plan.output = Some(resolve(value)),
                "format" => {
                    plan.format = match value {
                        "json" => Format::Json,
                        "csv" => Format::Csv,
                        _ => return Err(err(format!("unknown format '{value}'"))),
                    }
                }
                "seed" => plan.seed = num(value)?,
                "ext_samples" => plan.ext_samples = num(value)? as usize,
                "timings" => plan.timings = flag(value)?,
                "shift_retry" => plan.shift_retry = flag(value)?,
                _ => return Err(err(format!("unknown key '{key}'"))),
            }
        }
        plan.operator = op.ok_or(PlanError::Missing("operator"))?;
        plan.p_min = pmin.ok_or(PlanError::Missing("p_min"))?;
        plan.p_max = pmax.ok_or(PlanError::Missing("p_max"))?;
        if plan.p_min > plan.p_max {
            return Err(PlanError::Invalid(format!("p_min {} exceeds p_max {}", plan.p_min, plan.p_max)));
        }
        Ok(plan)
    }

    pub fn primes(&self) -> Vec<u64> {
        primes_in(self.p_min, self.p_max)
    }
}

/// `fourier`, `shear`, `identity` or `a,b,c,d`, separated by `;`.
pub fn parse_sl2_list(text: &str) -> Result<Vec<SL2Mat>, String> {
    text.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| match s {
            "fourier" => Ok(SL2Mat::FOURIER),
            "shear" => Ok(SL2Mat::SHEAR),
            "identity" => Ok(SL2Mat::IDENTITY),
            _ => SL2Mat::parse(s),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub check: Check,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrimeReport {
    pub curve: String,
    pub curve_poly: BivarPoly,
    pub report: CurveReport,
    pub operator_y0_mult: u32,
    pub operator_sl2_mults: Vec<u32>,
    pub checks: Vec<CheckOutcome>,
    /// Offset of the interpolation nodes (nonzero only after a shift retry).
    pub node_offset: u64,
    pub dense_evals: usize,
    pub det_time_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrimeFailure {
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrimeEntry {
    pub p: u64,
    #[serde(flatten)]
    pub outcome: PrimeOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PrimeOutcome {
    Ok(Box<PrimeReport>),
    Error(PrimeFailure),
}

impl PrimeEntry {
    pub fn report(&self) -> Option<&PrimeReport> {
        match &self.outcome {
            PrimeOutcome::Ok(r) => Some(r),
            PrimeOutcome::Error(_) => None,
        }
    }

    pub fn all_checks_passed(&self) -> bool {
        self.report().is_some_and(|r| r.checks.iter().all(|c| c.passed))
    }
}

/// An invariant whose value stays fixed from `stable_from` through the last prime.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stability {
    pub invariant: String,
    pub constant: bool,
    pub stable_from: Option<u64>,
    pub value: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub operator: String,
    pub p_min: u64,
    pub p_max: u64,
    pub e: usize,
    pub entries: Vec<PrimeEntry>,
    pub stability: Vec<Stability>,
}

#[derive(Debug, Error)]
pub enum SweepError {
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error("operator: {0}")]
    Operator(#[from] crate::weyl::WeylError),
    #[error("thread pool: {0}")]
    Pool(String),
}

impl SweepError {
    pub fn code(&self) -> &'static str {
        match self {
            SweepError::Plan(e) => e.code(),
            SweepError::Operator(e) => e.code(),
            SweepError::Pool(_) => "internal",
        }
    }
}

/// Runs the plan on every prime in range, in parallel over at most `jobs`
/// threads (all cores when `None`). Entries come back sorted by `p`.
pub fn run_sweep(plan: &SweepPlan, jobs: Option<usize>) -> Result<SweepResult, SweepError> {
    let op = DiffOp::parse(&plan.operator)?;
    let primes = plan.primes();
    let work = || -> Vec<PrimeEntry> { primes.par_iter().map(|&p| run_prime(plan, &op, p)).collect() };
    let mut entries = match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| SweepError::Pool(e.to_string()))?
            .install(work),
        None => work(),
    };
    entries.sort_by_key(|e| e.p);
    let stability = stability_summary(&entries);
    Ok(SweepResult { operator: plan.operator.clone(), p_min: plan.p_min, p_max: plan.p_max, e: plan.e, entries, stability })
}

fn run_prime(plan: &SweepPlan, op: &DiffOp, p: u64) -> PrimeEntry {
    let outcome = match prime_report(plan, op, p) {
        Ok(r) => PrimeOutcome::Ok(Box::new(r)),
        Err(e) => PrimeOutcome::Error(PrimeFailure { code: e.code().to_string(), message: e.to_string() }),
    };
    PrimeEntry { p, outcome }
}

fn prime_report(plan: &SweepPlan, op: &DiffOp, p: u64) -> Result<PrimeReport, CharpError> {
    let ctx = FieldCtx::new(p, plan.e, None)?;
    let fop = op.reduce(&ctx)?;
    let mut curve = charp::support_curve(&fop)?;
    let mut node_offset = 0;
    if plan.shift_retry && curve.dense_evals > 0 {
        if let Some((off, c)) = (1..p)
            .map(|off| (off, charp::support_curve_with_offset(&fop, off)))
            .find(|(_, c)| c.as_ref().is_ok_and(|c| c.dense_evals == 0))
        {
            node_offset = off;
            curve = c?;
        }
    }
    let report = curves::curve_report(&curve.d, &plan.sl2)?;
    let op_y0 = op.germ_multiplicity_y0()?;
    let op_sl2: Vec<u32> =
        plan.sl2.iter().map(|g| op.sl2_act(g).germ_multiplicity_y0()).collect::<Result<_, _>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed ^ p.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let mut checks = Vec::new();
    for &check in &plan.checks {
        let (passed, detail) = match check {
            Check::DegreeBound => {
                let deg = curve.d.total_degree().unwrap_or(0);
                (deg <= curve.n, format!("degree {deg} <= {}", curve.n))
            }
            Check::ExtensionConsistency => {
                let bad = charp::extension_consistency(&fop, &curve, 2, plan.ext_samples, &mut rng)?;
                (bad == 0, format!("{bad} of {} points disagree", plan.ext_samples))
            }
            Check::MultiplicityMatch => {
                let mut ok = op_y0 == report.y0_mult;
                let mut detail = format!("y0: operator {op_y0}, curve {}", report.y0_mult);
                for (k, g) in report.sl2.iter().enumerate() {
                    ok &= op_sl2[k] == g.multiplicity;
                    let _ = write!(detail, "; {:?}: operator {}, curve {}", g.matrix, op_sl2[k], g.multiplicity);
                }
                (ok, detail)
            }
            Check::DivisibilityProbe => {
                // informational: records whether D is a p-th power
                let flag = report.p_power.is_some();
                (true, format!("p-th power: {flag}"))
            }
        };
        checks.push(CheckOutcome { check, passed, detail });
    }
    let det_time_ms = plan.timings.then(|| median_ms(3, || charp::p_determinant(&fop).map(|_| ())));
    Ok(PrimeReport {
        curve: curve.d.to_string(),
        curve_poly: curve.d.clone(),
        report,
        operator_y0_mult: op_y0,
        operator_sl2_mults: op_sl2,
        checks,
        node_offset,
        dense_evals: curve.dense_evals,
        det_time_ms,
    })
}

fn median_ms<T>(reps: usize, mut f: impl FnMut() -> T) -> f64 {
    let mut times: Vec<f64> = (0..reps)
        .map(|_| {
            let t = Instant::now();
            std::hint::black_box(f());
            t.elapsed().as_secs_f64() * 1e3
        })
        .collect();
    times.sort_by(f64::total_cmp);
    times[times.len() / 2]
}

fn invariants(r: &PrimeReport) -> Vec<(&'static str, serde_json::Value)> {
    vec![
        ("curve", r.curve.clone().into()),
        ("degree", r.report.degree.into()),
        ("y0_mult", r.report.y0_mult.into()),
        ("fourier_mult", r.report.sl2.first().map(|s| s.multiplicity).into()),
        ("squarefree", r.report.squarefree.into()),
        ("p_power", r.report.p_power.is_some().into()),
        ("zero_section_mult", r.report.zero_section_mult.into()),
        ("checks_passed", r.checks.iter().all(|c| c.passed).into()),
    ]
}

/// For each invariant: the first prime from which its value never changes
/// again. A failed prime counts as a value of its own.
pub fn stability_summary(entries: &[PrimeEntry]) -> Vec<Stability> {
    let names = ["curve", "degree", "y0_mult", "fourier_mult", "squarefree", "p_power", "zero_section_mult", "checks_passed"];
    let rows: Vec<(u64, Vec<serde_json::Value>)> = entries
        .iter()
        .map(|e| {
            let vals = match e.report() {
                Some(r) => invariants(r).into_iter().map(|(_, v)| v).collect(),
                None => vec![serde_json::json!({"error": true}); names.len()],
            };
            (e.p, vals)
        })
        .collect();
    names
        .iter()
        .enumerate()
        .map(|(k, name)| {
            let Some((_, last)) = rows.last().map(|(p, v)| (*p, v[k].clone())) else {
                return Stability { invariant: name.to_string(), constant: true, stable_from: None, value: serde_json::Value::Null };
            };
            let mut from = rows.len() - 1;
            while from > 0 && rows[from - 1].1[k] == last {
                from -= 1;
            }
            Stability { invariant: name.to_string(), constant: from == 0, stable_from: Some(rows[from].0), value: last }
        })
        .collect()
}

impl SweepResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable") + "\n"
    }

    /// One row per prime: `p,degree,y0_mult,fourier_mult,squarefree,p_power_flag,det_time_ms`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("p,degree,y0_mult,fourier_mult,squarefree,p_power_flag,det_time_ms\n");
        for e in &self.entries {
            match e.report() {
                Some(r) => {
                    let fourier = r.report.sl2.first().map(|s| s.multiplicity.to_string()).unwrap_or_default();
                    let time = r.det_time_ms.map(|t| format!("{t:.3}")).unwrap_or_default();
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{},{}",
                        e.p,
                        r.report.degree,
                        r.report.y0_mult,
                        fourier,
                        r.report.squarefree,
                        r.report.p_power.is_some(),
                        time
                    );
                }
                None => {
                    let _ = writeln!(out, "{},,,,,,", e.p);
                }
            }
        }
        out
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub p: u64,
    pub ms: f64,
    /// Central shift `u` used to reach the banded path.
    pub shift: u64,
    pub path: DetPath,
    /// Time relative to the previous row.
    pub ratio: Option<f64>,
}

/// Median-of-three wall time of one determinant per prime, single-threaded.
///
/// If the origin forces the dense fallback the smallest shift `u` that
/// reaches the banded path is timed instead. Ratios are omitted when the
/// previous time is too small to be meaningful.
pub fn benchmark_linear(op: &DiffOp, primes: &[u64]) -> Result<Vec<BenchRow>, CharpError> {
    let mut rows: Vec<BenchRow> = Vec::new();
    for &p in primes {
        let ctx = FieldCtx::prime(p)?;
        let fop = op.reduce(&ctx)?;
        let zero = ctx.zero();
        let mut shift = 0;
        let mut path = charp::determinant_at(&fop, zero, zero)?.1;
        while path == DetPath::Dense && shift + 1 < p.min(64) {
            shift += 1;
            path = charp::determinant_at(&fop, ctx.from_u64(shift), zero)?.1;
        }
        let u = ctx.from_u64(shift);
        let ms = median_ms(3, || charp::determinant_at(&fop, u, zero).map(|_| ()));
        let ratio = rows.last().filter(|r| r.ms >= 0.05).map(|r| ms / r.ms);
        rows.push(BenchRow { p, ms, shift, path, ratio });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plan_parsing() {
        let text = "# demo\noperator = x*d - 2\np_min = 5\np_max = 31\nchecks = degree-bound, multiplicity-match\nsl2 = fourier; 1,1,0,1\nformat = csv\ntimings = false\n";
        let plan = SweepPlan::parse(text, None).unwrap();
        assert_eq!(plan.operator, "x*d - 2");
        assert_eq!(plan.checks, vec![Check::DegreeBound, Check::MultiplicityMatch]);
        assert_eq!(plan.sl2, vec![SL2Mat::FOURIER, SL2Mat { a: 1, b: 1, c: 0, d: 1 }]);
        assert_eq!(plan.format, Format::Csv);
        assert!(!plan.timings);
        assert!(matches!(SweepPlan::parse("p_min = 5\np_max = 7", None), Err(PlanError::Missing("operator"))));
        assert!(matches!(SweepPlan::parse("operator = d\nbogus", None), Err(PlanError::Syntax { line: 2, .. })));
        assert!(SweepPlan::parse("operator = d\np_min=5\np_max=7\nsl2 = 1,1,1,1", None).is_err());
    }

    #[test]
    fn stability_window() {
        let mut plan = SweepPlan::new("x*d - 2", 2, 31);
        plan.timings = false;
        let r = run_sweep(&plan, Some(2)).unwrap();
        assert_eq!(r.entries.len(), primes_in(2, 31).len());
        // p = 2 cannot reconstruct a degree-2 curve
        assert!(r.entries[0].report().is_none());
        let curve = r.stability.iter().find(|s| s.invariant == "curve").unwrap();
        assert_eq!(curve.stable_from, Some(3));
        assert_eq!(curve.value, serde_json::json!("X*Y"));
        assert!(!curve.constant);
    }

    #[test]
    fn corpus_has_twenty_operators() {
        let ops = corpus();
        assert_eq!(ops.len(), 20);
        for o in ops {
            DiffOp::parse(&o).unwrap();
        }
    }
}
