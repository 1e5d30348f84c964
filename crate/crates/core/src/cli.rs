//! Command-line front end: `lgp <subcommand> --fixture PATH [flags]`.
//!
//! Exit codes: 0 when every check passed, 1 when a mathematical
//! expectation failed, 2 on usage or input errors.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::ec::is_prime;
use crate::error::{Error, Result};
use crate::fixture::{load_module, ModuleFixture};
use crate::local_global::{build_counterexample, certify_places, global_membership};
use crate::reduction::{ExperimentSpec, GlobalPoint, Realization};
use crate::report::{
    verify_report, verify_report_against, AxiomsBody, Body, ConfigEcho, CounterexampleBody, DynamicsBody,
    IndependenceRecord, Report, ScanBody, EXIT_ANOMALY, EXIT_INPUT, EXIT_OK,
};

const DEFAULT_COUNTEREXAMPLE_BOUND: u64 = 1000;
const DEFAULT_DYNAMICS_BOUND: u64 = 200;
const DEFAULT_SCAN_BOUND: u64 = 1000;
const DEFAULT_AXIOMS_BOUND: u64 = 10_000;
const DEFAULT_STEP_BOUND: usize = 32;
const DEFAULT_L: u64 = 3;
const DEFAULT_TWIST: i64 = 1;

#[derive(Debug, Parser)]
#[command(
    name = "lgp",
    version,
    about = "Local-to-global experiments on elliptic-curve reduction families"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fixing-matrix certificates at every good place, plus global non-membership.
    Counterexample(RunArgs),
    /// Orbits of an endomorphism globally and modulo places.
    Dynamics(RunArgs),
    /// Places where reduced orders have a prescribed l-adic valuation pattern.
    ScanOrders(RunArgs),
    /// Torsion injectivity, generator independence and the optional order scan.
    Axioms(RunArgs),
    /// Rechecks a saved report from its recorded data.
    VerifyReport { report: PathBuf },
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Module description file (TOML).
    #[arg(long)]
    pub fixture: PathBuf,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub place_bound: Option<u64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub step_bound: Option<u64>,
    #[arg(long = "l")]
    pub l: Option<u64>,
    /// Comma-separated exponents k1,k2,…
    #[arg(long, value_delimiter = ',')]
    pub pattern: Option<Vec<u32>>,
    /// Where to write the JSON report; `-` for standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub jobs: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Parses arguments, runs, prints, and returns the exit code.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return EXIT_INPUT;
            }
            let _ = write!(out, "{e}");
            return EXIT_OK;
        }
    };
    match run(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_INPUT
        }
    }
}

pub fn run(command: Command, out: &mut dyn Write) -> Result<i32> {
    let (name, args) = match command {
        Command::VerifyReport { report } => return verify_file(&report, out),
        Command::Counterexample(a) => ("counterexample", a),
        Command::Dynamics(a) => ("dynamics", a),
        Command::ScanOrders(a) => ("scan-orders", a),
        Command::Axioms(a) => ("axioms", a),
    };
    let report = with_jobs(args.jobs, || build_report(name, &args))?;
    emit(&report, &args, out)?;
    Ok(report.exit_code)
}

fn with_jobs<T: Send>(jobs: Option<u64>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match jobs {
        None => f(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n as usize)
            .build()
            .map_err(|e| Error::input(format!("thread pool: {e}")))?
            .install(f),
    }
}

/// Loads the fixture named in `args` and runs subcommand `name`.
pub fn build_report(name: &str, args: &RunArgs) -> Result<Report> {
    let start = Instant::now();
    let fx = load_module(&args.fixture)?;
    let (body, echo) = match name {
        "counterexample" => run_counterexample(&fx, args)?,
        "dynamics" => run_dynamics(&fx, args)?,
        "scan-orders" => run_scan(&fx, args)?,
        "axioms" => run_axioms(&fx, args)?,
        other => return Err(Error::input(format!("unknown subcommand {other}"))),
    };
    Ok(Report::new(name, echo, body, start.elapsed().as_millis() as u64))
}

fn echo(fx: &ModuleFixture, args: &RunArgs) -> ConfigEcho {
    ConfigEcho {
        fixture: args.fixture.display().to_string(),
        place_bound: None,
        step_bound: None,
        l: None,
        pattern: None,
        seed: args.seed,
        caps: fx.caps,
    }
}

fn independence(fx: &ModuleFixture) -> Result<Option<IndependenceRecord>> {
    if !matches!(fx.module.realization(), Realization::Curve(_)) || fx.module.rank() == 0 {
        return Ok(None);
    }
    let relation = fx.module.generator_relation(fx.independence_box, fx.caps)?;
    Ok(Some(IndependenceRecord {
        box_bound: fx.independence_box,
        relation,
    }))
}

/// Experiments that assume independent generators refuse dependent ones.
fn require_independent(fx: &ModuleFixture) -> Result<Option<IndependenceRecord>> {
    let rec = independence(fx)?;
    if let Some(IndependenceRecord {
        relation: Some(r),
        box_bound,
    }) = &rec
    {
        return Err(Error::fixture(format!(
            "declared generators satisfy the relation {r:?} (box bound {box_bound})"
        )));
    }
    Ok(rec)
}

fn require_prime_l(l: u64) -> Result<()> {
    if is_prime(l) {
        Ok(())
    } else {
        Err(Error::input(format!("l = {l} is not prime")))
    }
}

pub fn run_counterexample(fx: &ModuleFixture, args: &RunArgs) -> Result<(Body, ConfigEcho)> {
    let section = fx
        .counterexample
        .as_ref()
        .ok_or_else(|| Error::fixture("fixture has no [counterexample] section"))?;
    let bound = args
        .place_bound
        .or(section.place_bound)
        .unwrap_or(DEFAULT_COUNTEREXAMPLE_BOUND);
    let l = args.l.or(section.l).unwrap_or(DEFAULT_L);
    require_prime_l(l)?;
    let indep = require_independent(fx)?;
    let lattice = build_counterexample(&fx.module, section.points.clone())?;
    let spec = ExperimentSpec {
        d: lattice.d,
        e: lattice.e(),
        l,
        n: section.n.unwrap_or(DEFAULT_TWIST),
    };
    let global = global_membership(&lattice)?;
    let places = certify_places(&fx.module, &lattice, bound, fx.caps)?;
    let certified = places.iter().filter(|p| p.passed()).count();
    let method_failures = places
        .iter()
        .filter(|p| p.result.certificate().is_none())
        .map(|p| p.place)
        .collect();
    let invalid_certificates = places
        .iter()
        .filter(|p| p.result.certificate().is_some() && !p.passed())
        .map(|p| p.place)
        .collect();
    let mut e = echo(fx, args);
    e.place_bound = Some(bound);
    e.l = Some(l);
    Ok((
        Body::Counterexample(CounterexampleBody {
            spec,
            lattice,
            independence: indep,
            global,
            places,
            certified,
            method_failures,
            invalid_certificates,
        }),
        e,
    ))
}

pub fn run_dynamics(fx: &ModuleFixture, args: &RunArgs) -> Result<(Body, ConfigEcho)> {
    let section = fx
        .dynamics
        .as_ref()
        .ok_or_else(|| Error::fixture("fixture has no [dynamics] section"))?;
    let bound = args
        .place_bound
        .or(section.place_bound)
        .unwrap_or(DEFAULT_DYNAMICS_BOUND);
    let steps = args
        .step_bound
        .map(|s| s as usize)
        .or(section.step_bound)
        .unwrap_or(DEFAULT_STEP_BOUND);
    require_independent(fx)?;
    let result = crate::dynamics::dynamical_lgp_experiment(
        &fx.module,
        &section.map,
        &section.point,
        &section.lambda,
        bound,
        steps,
        args.seed,
        fx.caps,
    )?;
    let mut e = echo(fx, args);
    e.place_bound = Some(bound);
    e.step_bound = Some(steps);
    Ok((
        Body::Dynamics(DynamicsBody {
            map: section.map.clone(),
            rank: fx.module.rank(),
            torsion: fx.module.torsion_group().clone(),
            point: section.point.clone(),
            lambda: section.lambda.clone(),
            place_bound: bound,
            step_bound: steps,
            result,
        }),
        e,
    ))
}

struct ScanParams {
    points: Vec<GlobalPoint>,
    l: u64,
    pattern: Vec<u32>,
    bound: u64,
}

fn scan_params(fx: &ModuleFixture, args: &RunArgs) -> Result<Option<ScanParams>> {
    let Some(section) = fx.scan.as_ref() else {
        return Ok(None);
    };
    let l = args
        .l
        .or(section.l)
        .ok_or_else(|| Error::input("scan needs l (flag --l or [scan].l)"))?;
    require_prime_l(l)?;
    let pattern = args
        .pattern
        .clone()
        .or_else(|| section.pattern.clone())
        .ok_or_else(|| Error::input("scan needs a pattern (flag --pattern or [scan].pattern)"))?;
    let bound = args.place_bound.or(section.place_bound).unwrap_or(DEFAULT_SCAN_BOUND);
    Ok(Some(ScanParams {
        points: section.points.clone(),
        l,
        pattern,
        bound,
    }))
}

pub fn run_scan(fx: &ModuleFixture, args: &RunArgs) -> Result<(Body, ConfigEcho)> {
    let ScanParams {
        points,
        l,
        pattern,
        bound,
    } = scan_params(fx, args)?.ok_or_else(|| Error::fixture("fixture has no [scan] section"))?;
    require_independent(fx)?;
    let result = fx.module.scan_divisibility(&points, l, &pattern, bound, fx.caps)?;
    let mut e = echo(fx, args);
    e.place_bound = Some(bound);
    e.l = Some(l);
    e.pattern = Some(pattern);
    Ok((Body::Scan(ScanBody { points, result }), e))
}

pub fn run_axioms(fx: &ModuleFixture, args: &RunArgs) -> Result<(Body, ConfigEcho)> {
    let bound = args
        .place_bound
        .or(fx.axioms_place_bound)
        .unwrap_or(DEFAULT_AXIOMS_BOUND);
    let indep = independence(fx)?;
    let torsion = fx.module.torsion_injectivity_scan(bound, fx.caps)?;
    let mut e = echo(fx, args);
    e.place_bound = Some(bound);
    let scan = match scan_params(fx, args)? {
        Some(ScanParams {
            points,
            l,
            pattern,
            bound: scan_bound,
        }) => {
            let result = fx.module.scan_divisibility(&points, l, &pattern, scan_bound, fx.caps)?;
            e.l = Some(l);
            e.pattern = Some(pattern);
            Some(ScanBody { points, result })
        }
        None => None,
    };
    Ok((
        Body::Axioms(AxiomsBody {
            independence: indep,
            torsion_order: fx.module.torsion_group().order(),
            torsion,
            scan,
        }),
        e,
    ))
}

fn emit(report: &Report, args: &RunArgs, out: &mut dyn Write) -> Result<()> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| Error::Io { path, source }
    };
    let stdout = Path::new("-");
    match &args.out {
        Some(p) if p == stdout => {
            writeln!(out, "{}", report.to_json()).map_err(io(stdout))?;
        }
        Some(p) => {
            std::fs::write(p, report.to_json() + "\n").map_err(io(p))?;
            writeln!(out, "lgp {}: {}", report.command, report.summary).map_err(io(stdout))?;
            writeln!(out, "verdict: {}", report.verdict).map_err(io(stdout))?;
            writeln!(out, "report: {}", p.display()).map_err(io(stdout))?;
        }
        None => {
            writeln!(out, "lgp {}: {}", report.command, report.summary).map_err(io(stdout))?;
            writeln!(out, "verdict: {}", report.verdict).map_err(io(stdout))?;
        }
    }
    Ok(())
}

fn verify_file(path: &Path, out: &mut dyn Write) -> Result<i32> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let report: Report =
        serde_json::from_str(&text).map_err(|e| Error::input(format!("{}: not a report: {e}", path.display())))?;
    let mut problems = verify_report(&report);
    let io = |source| Error::Io {
        path: PathBuf::from("-"),
        source,
    };
    // The fixture is only needed for recorded scan hits; a report stays
    // checkable when it has moved away from its fixture.
    if let Ok(fx) = load_module(Path::new(&report.config.fixture)) {
        problems.extend(verify_report_against(&report, &fx.module));
    } else {
        writeln!(
            out,
            "note: fixture {} not loadable; scan hits checked from records only",
            report.config.fixture
        )
        .map_err(io)?;
    }
    if problems.is_empty() {
        writeln!(out, "report verified: {} ({})", report.command, report.verdict).map_err(io)?;
        Ok(EXIT_OK)
    } else {
        for p in &problems {
            writeln!(out, "problem: {p}").map_err(io)?;
        }
        Ok(EXIT_ANOMALY)
    }
}
