use std::fs;
use std::path::Path;

use serde::Serialize;

use qrac_core::catalog::{builtin_seeded, golden_examples, Builtin, BUILTIN_NAMES};
use qrac_core::detect::{detect_with, jm_degree_formula, robustness_lower_from_p_bar, scaled_success, Verdict};
use qrac_core::error::Error;
use qrac_core::io::{read_povm_with, write_joint};
use qrac_core::oracle::{find_joint_with, verify_joint, Status, DEFAULT_TOL};
use qrac_core::povm::{depolarize, Povm, ProbabilityDistribution};
use qrac_core::qrac::{
    optimal_success, test_regime, trivial_upper_bound, usefulness_2d_with, TestRegime, UsefulnessCertificate,
};
use qrac_core::scan::{count_regions, region_scan_with, write_csv, RegionCounts, ScanConfig};
use qrac_core::tolerance::Tolerances;

use crate::render::{fixed, render, Format};
use crate::{Cli, CliError, Command, GlobalArgs, PairArgs};

type Result<T> = std::result::Result<T, CliError>;

struct Settings {
    tol: Tolerances,
    golden: Option<f64>,
    oracle: f64,
    seed: u64,
    format: Format,
    precision: usize,
}

const CLI_TOLERANCES: [&str; 6] = ["hermitian", "povm", "guard", "region", "golden", "oracle"];

fn settings(g: &GlobalArgs) -> Result<Settings> {
    let mut s = Settings {
        tol: Tolerances::default(),
        golden: None,
        oracle: DEFAULT_TOL,
        seed: g.seed,
        format: g.format,
        precision: g.precision as usize,
    };
    for item in &g.tol {
        let (name, value) = item
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--tol expects NAME=VALUE, got '{item}'")))?;
        let value: f64 = value
            .parse()
            .map_err(|_| CliError::Usage(format!("--tol {name}: '{value}' is not a number")))?;
        if !value.is_finite() || value < 0.0 {
            return Err(CliError::Usage(format!("--tol {name}: must be finite and nonnegative")));
        }
        match name {
            "golden" => s.golden = Some(value),
            "oracle" => s.oracle = value,
            n if CLI_TOLERANCES.contains(&n) => s.tol.set(n, value)?,
            other => {
                return Err(CliError::Usage(format!(
                    "unknown tolerance '{other}' (known: {})",
                    CLI_TOLERANCES.join(", ")
                )))
            }
        }
    }
    Ok(s)
}

fn resolve(arg: &str, s: &Settings) -> Result<Builtin> {
    let path = Path::new(arg);
    if path.is_file() {
        return Ok(Builtin::Single(read_povm_with(path, s.tol.hermitian)?));
    }
    builtin_seeded(arg, s.seed).map_err(|e| match e {
        Error::Parse(msg) if msg.starts_with("unknown built-in") => CliError::Usage(format!(
            "'{arg}' is neither a readable file nor a built-in measurement (see `qrac builtins`)"
        )),
        other => other.into(),
    })
}

fn resolve_pair(args: &PairArgs, s: &Settings) -> Result<(Povm, Povm)> {
    let first = resolve(&args.first, s)?;
    match (&args.second, first) {
        (None, Builtin::Pair(a, b)) => Ok((a, b)),
        (None, Builtin::Single(_)) => Err(CliError::Usage(format!(
            "'{}' is a single measurement; give a second one",
            args.first
        ))),
        (Some(second), Builtin::Single(a)) => match resolve(second, s)? {
            Builtin::Single(b) => Ok((a, b)),
            Builtin::Pair(..) => Err(CliError::Usage(format!(
                "'{second}' names a pair, not a single measurement"
            ))),
        },
        (Some(_), Builtin::Pair(..)) => Err(CliError::Usage(format!(
            "'{}' names a pair; drop the second argument",
            args.first
        ))),
    }
}

fn ensure_valid(p: &Povm, s: &Settings) -> Result<()> {
    p.ensure_valid(s.tol.povm)?;
    Ok(())
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Core(e.into())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn run(cli: &Cli) -> Result<u8> {
    let s = settings(&cli.global)?;
    let out = cli.global.out.as_deref();
    match &cli.command {
        Command::Validate { measurement } => cmd_validate(measurement, &s, out),
        Command::Success(pair) => cmd_success(pair, &s, out),
        Command::Detect(pair) => cmd_detect(pair, &s, out),
        Command::Scan { d, steps } => cmd_scan(*d, *steps, &s, out),
        Command::Examples { noise } => cmd_examples(*noise, &s, out),
        Command::Oracle { pair, max_iter } => cmd_oracle(pair, *max_iter, &s, out),
        Command::Builtins => {
            let text = match s.format {
                Format::Json => serde_json::to_string_pretty(&BUILTIN_NAMES).expect("names serialize") + "\n",
                _ => BUILTIN_NAMES.join("\n") + "\n",
            };
            emit(&text, out)?;
            Ok(0)
        }
    }
}

#[derive(Serialize)]
struct ValidationOut {
    dim: usize,
    outcomes: usize,
    valid: bool,
    min_eigenvalues: Vec<f64>,
    completeness_defect: f64,
    completeness_entry_defect: f64,
    violations: Vec<String>,
}

#[derive(Serialize)]
struct ValidateOut {
    valid: bool,
    measurements: Vec<ValidationOut>,
}

fn cmd_validate(arg: &str, s: &Settings, out: Option<&Path>) -> Result<u8> {
    let povms = match resolve(arg, s)? {
        Builtin::Single(p) => vec![p],
        Builtin::Pair(a, b) => vec![a, b],
    };
    let mut measurements = Vec::new();
    for p in &povms {
        let r = p.validate_with(s.tol.povm)?;
        measurements.push(ValidationOut {
            dim: p.dim(),
            outcomes: p.outcomes(),
            valid: r.is_valid(),
            min_eigenvalues: r.min_eigenvalues.clone(),
            completeness_defect: r.completeness_defect,
            completeness_entry_defect: r.completeness_entry_defect,
            violations: r.violations.iter().map(|v| format!("{v:?}")).collect(),
        });
    }
    let valid = measurements.iter().all(|m| m.valid);
    emit(
        &render(&ValidateOut { valid, measurements }, s.format, s.precision),
        out,
    )?;
    Ok(if valid { 0 } else { 1 })
}

#[derive(Serialize)]
struct SuccessOut {
    dim: usize,
    n: usize,
    m: usize,
    p_bar: f64,
    per_cell_norms: Vec<Vec<f64>>,
    generalized_bound: f64,
    trivial_bound: f64,
    regime: TestRegime,
    usefulness: Option<UsefulnessCertificate>,
}

fn cmd_success(pair: &PairArgs, s: &Settings, out: Option<&Path>) -> Result<u8> {
    let (a, b) = resolve_pair(pair, s)?;
    ensure_valid(&a, s)?;
    ensure_valid(&b, s)?;
    let r = optimal_success(&a, &b)?;
    let usefulness = if r.n == r.dim && r.m == r.dim {
        Some(usefulness_2d_with(&a, &b, s.tol.guard)?)
    } else {
        None
    };
    let report = SuccessOut {
        dim: r.dim,
        n: r.n,
        m: r.m,
        p_bar: r.p_bar,
        generalized_bound: r.bound_classical,
        trivial_bound: trivial_upper_bound(r.dim, r.n, r.m),
        regime: test_regime(r.dim, r.n, r.m),
        per_cell_norms: r.per_cell_norms,
        usefulness,
    };
    emit(&render(&report, s.format, s.precision), out)?;
    Ok(0)
}

#[derive(Serialize)]
struct DetectOut {
    verdict: Verdict,
    p_bar: f64,
    bound: f64,
    margin: f64,
    regime: TestRegime,
    jm_degree_upper: Option<f64>,
    robustness_lower: Option<f64>,
}

fn cmd_detect(pair: &PairArgs, s: &Settings, out: Option<&Path>) -> Result<u8> {
    let (a, b) = resolve_pair(pair, s)?;
    ensure_valid(&a, s)?;
    ensure_valid(&b, s)?;
    let v = detect_with(&a, &b, s.tol.guard)?;
    let (d, n, m) = (a.dim(), a.outcomes(), b.outcomes());
    let detected = v.is_detected();
    let report = DetectOut {
        verdict: v.verdict,
        p_bar: v.p_bar,
        bound: v.bound,
        margin: v.margin,
        regime: v.regime,
        jm_degree_upper: detected.then(|| jm_degree_formula(v.p_bar, d, n, m)),
        robustness_lower: detected.then(|| robustness_lower_from_p_bar(v.p_bar, d, n, m)),
    };
    emit(&render(&report, s.format, s.precision), out)?;
    Ok(match v.verdict {
        Verdict::IncompatibilityDetected => 0,
        Verdict::Inconclusive => 3,
        Verdict::TestVacuous => 4,
    })
}

#[derive(Serialize)]
struct ScanOut {
    d: usize,
    steps: usize,
    rows: usize,
    counts: RegionCounts,
    csv: String,
}

fn cmd_scan(d: usize, steps: usize, s: &Settings, out: Option<&Path>) -> Result<u8> {
    let cfg = ScanConfig::new(d).with_steps(steps);
    let samples = region_scan_with(&cfg, s.tol.region)?;
    match out {
        Some(path) => {
            let file = fs::File::create(path).map_err(|e| CliError::Core(e.into()))?;
            write_csv(&samples, std::io::BufWriter::new(file))?;
            let report = ScanOut {
                d,
                steps,
                rows: samples.len(),
                counts: count_regions(d, &samples),
                csv: path.display().to_string(),
            };
            print!("{}", render(&report, s.format, s.precision));
        }
        None => write_csv(&samples, std::io::stdout().lock())?,
    }
    Ok(0)
}

#[derive(Serialize)]
struct ExampleRow {
    name: &'static str,
    expected: f64,
    computed: f64,
    tolerance: f64,
    detected: bool,
    pass: bool,
}

#[derive(Serialize)]
struct ExamplesOut {
    noise: Option<f64>,
    passed: usize,
    total: usize,
    examples: Vec<ExampleRow>,
}

fn cmd_examples(noise: Option<f64>, s: &Settings, out: Option<&Path>) -> Result<u8> {
    if let Some(t) = noise {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::NoiseOutOfRange(t).into());
        }
    }
    let mut rows = Vec::new();
    for ex in golden_examples() {
        let (n, m) = (ex.first.outcomes(), ex.second.outcomes());
        let (first, second, expected, tolerance) = match noise {
            Some(t) => (
                depolarize(&ex.first, t, &ProbabilityDistribution::uniform(n))?,
                depolarize(&ex.second, t, &ProbabilityDistribution::uniform(m))?,
                scaled_success(ex.expected, t, n, m)?,
                t * ex.tolerance,
            ),
            None => (ex.first.clone(), ex.second.clone(), ex.expected, ex.tolerance),
        };
        let tolerance = s.golden.unwrap_or(tolerance);
        let v = detect_with(&first, &second, s.tol.guard)?;
        rows.push(ExampleRow {
            name: ex.name,
            expected,
            computed: v.p_bar,
            tolerance,
            detected: v.is_detected(),
            pass: (v.p_bar - expected).abs() <= tolerance,
        });
    }
    let passed = rows.iter().filter(|r| r.pass).count();
    let report = ExamplesOut {
        noise,
        passed,
        total: rows.len(),
        examples: rows,
    };
    let text = match s.format {
        Format::Human => examples_table(&report, s.precision),
        f => render(&report, f, s.precision),
    };
    emit(&text, out)?;
    Ok(if passed == report.total { 0 } else { 1 })
}

fn examples_table(r: &ExamplesOut, precision: usize) -> String {
    let mut t = format!(
        "{:<22} {:>w$} {:>w$} {:>10} {:>9}  result\n",
        "example",
        "expected",
        "computed",
        "tolerance",
        "detected",
        w = precision + 3
    );
    for row in &r.examples {
        t.push_str(&format!(
            "{:<22} {:>w$} {:>w$} {:>10.1e} {:>9}  {}\n",
            row.name,
            fixed(row.expected, precision),
            fixed(row.computed, precision),
            row.tolerance,
            if row.detected { "yes" } else { "no" },
            if row.pass { "PASS" } else { "FAIL" },
            w = precision + 3
        ));
    }
    t.push_str(&format!("{}/{} passed\n", r.passed, r.total));
    t
}

#[derive(Serialize)]
struct OracleOut {
    status: Status,
    residual: f64,
    iterations: usize,
    verified: Option<bool>,
    joint_file: Option<String>,
}

fn cmd_oracle(pair: &PairArgs, max_iter: usize, s: &Settings, out: Option<&Path>) -> Result<u8> {
    let (a, b) = resolve_pair(pair, s)?;
    let r = find_joint_with(&a, &b, s.oracle, max_iter)?;
    let mut report = OracleOut {
        status: r.status,
        residual: r.residual,
        iterations: r.iterations,
        verified: None,
        joint_file: None,
    };
    if let Some(g) = &r.joint {
        report.verified = Some(verify_joint(g, &a, &b, 10.0 * s.oracle.max(f64::EPSILON))?.passed);
        if let Some(path) = out {
            write_joint(path, g)?;
            report.joint_file = Some(path.display().to_string());
        }
    }
    print!("{}", render(&report, s.format, s.precision));
    Ok(if r.found() { 0 } else { 3 })
}
