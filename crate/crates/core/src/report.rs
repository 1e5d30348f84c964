//! The JSON report written by every subcommand, and its offline checker.
//!
//! Reports carry enough data to recheck each claim without rerunning the
//! scans: certificates hold their group and reduced points, orbit records
//! hold the local map and start point, and scan hits hold their orders.
//! Timing lives in its own field so that reports from identical runs
//! differ only there.

use serde::{Deserialize, Serialize};

use crate::dynamics::{global_member, global_orbit_intersection, DynamicsReport, EndoMap, Verdict};
use crate::finite_abelian::FiniteAbelianGroup;
use crate::local_global::{global_membership, FixingOutcome, GlobalMembership, PlaceCertification, TraceZeroLattice};
use crate::reduction::{Caps, ExperimentSpec, GlobalModule, GlobalPoint, ScanResult, TorsionScan};

pub const SCHEMA: &str = "lgp-report/1";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub const EXIT_OK: i32 = 0;
pub const EXIT_ANOMALY: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

/// The parameters a run actually used, after fixture defaults and flags
/// are merged. Parallelism is left out so it cannot change the bytes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub fixture: String,
    pub place_bound: Option<u64>,
    pub step_bound: Option<usize>,
    pub l: Option<u64>,
    pub pattern: Option<Vec<u32>>,
    pub seed: u64,
    pub caps: Caps,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timing {
    pub elapsed_ms: u64,
}

/// Result of the box search for relations among the declared generators.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndependenceRecord {
    pub box_bound: u32,
    pub relation: Option<Vec<i64>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounterexampleBody {
    pub spec: ExperimentSpec,
    pub lattice: TraceZeroLattice,
    pub independence: Option<IndependenceRecord>,
    pub global: GlobalMembership,
    pub places: Vec<PlaceCertification>,
    pub certified: usize,
    pub method_failures: Vec<u64>,
    pub invalid_certificates: Vec<u64>,
}

impl CounterexampleBody {
    pub fn verdict(&self) -> &'static str {
        if !self.lattice.tagged {
            "INFORMATIONAL"
        } else if self.method_failures.is_empty() && self.invalid_certificates.is_empty() && !self.global.member {
            "CONFIRMED"
        } else {
            "ANOMALY"
        }
    }

    pub fn summary(&self) -> String {
        let mut s = format!(
            "local membership at {}/{} places, global non-membership: {}",
            self.certified,
            self.places.len(),
            if self.global.member { "REFUTED" } else { "CONFIRMED" }
        );
        if !self.lattice.tagged {
            s.push_str(&format!(
                " (e = {} and d = {}: hypothesis e = d + 1 unmet)",
                self.lattice.e(),
                self.lattice.d
            ));
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DynamicsBody {
    pub map: EndoMap,
    pub rank: usize,
    pub torsion: FiniteAbelianGroup,
    pub point: GlobalPoint,
    pub lambda: Vec<GlobalPoint>,
    pub place_bound: u64,
    pub step_bound: usize,
    pub result: DynamicsReport,
}

impl DynamicsBody {
    pub fn summary(&self) -> String {
        let global = match &self.result.global.hit {
            Some(h) => format!("global hit at n = {}", h.n),
            None => format!("global miss up to n = {}", self.result.global.searched_steps),
        };
        let n = self.result.places.len();
        let misses = self.result.local_misses.len();
        let first = self
            .result
            .first_miss()
            .map(|p| format!(", first miss at {p}"))
            .unwrap_or_default();
        format!("{global}; local hits at {}/{n} places{first}", n - misses)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanBody {
    pub points: Vec<GlobalPoint>,
    pub result: ScanResult,
}

impl ScanBody {
    pub fn summary(&self) -> String {
        format!(
            "{} of {} good places ≤ {} match l = {}, pattern {:?}",
            self.result.hits.len(),
            self.result.places_scanned,
            self.result.searched_bound,
            self.result.l,
            self.result.pattern
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxiomsBody {
    pub independence: Option<IndependenceRecord>,
    pub torsion_order: u64,
    pub torsion: TorsionScan,
    pub scan: Option<ScanBody>,
}

impl AxiomsBody {
    pub fn passed(&self) -> bool {
        self.torsion.failures.is_empty()
            && self.independence.as_ref().is_none_or(|i| i.relation.is_none())
            && self.scan.as_ref().is_none_or(|s| s.result.reverify())
    }

    pub fn summary(&self) -> String {
        let mut s = format!(
            "torsion of order {} injects at {}/{} good places ≤ {}",
            self.torsion_order,
            self.torsion.places_checked - self.torsion.failures.len(),
            self.torsion.places_checked,
            self.torsion.searched_bound
        );
        if let Some(scan) = &self.scan {
            s.push_str("; ");
            s.push_str(&scan.summary());
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Body {
    Counterexample(CounterexampleBody),
    Dynamics(DynamicsBody),
    Scan(ScanBody),
    Axioms(AxiomsBody),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub tool_version: String,
    pub command: String,
    pub config: ConfigEcho,
    pub body: Body,
    pub summary: String,
    pub verdict: String,
    pub exit_code: i32,
    pub timing: Timing,
}

impl Report {
    pub fn new(command: &str, config: ConfigEcho, body: Body, elapsed_ms: u64) -> Self {
        let (summary, verdict, exit_code) = assess(&body);
        Report {
            schema: SCHEMA.into(),
            tool_version: TOOL_VERSION.into(),
            command: command.into(),
            config,
            body,
            summary,
            verdict,
            exit_code,
            timing: Timing { elapsed_ms },
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

fn verdict_name(v: Verdict) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|x| x.as_str().map(String::from))
        .unwrap_or_default()
}

/// Summary line, verdict and exit code implied by a body.
pub fn assess(body: &Body) -> (String, String, i32) {
    match body {
        Body::Counterexample(c) => {
            let v = c.verdict();
            (
                c.summary(),
                v.into(),
                if v == "ANOMALY" { EXIT_ANOMALY } else { EXIT_OK },
            )
        }
        Body::Dynamics(d) => {
            let code = match d.result.verdict {
                Verdict::Consistent | Verdict::Inconclusive => EXIT_OK,
                Verdict::InconsistentAnomaly | Verdict::PreconditionViolated => EXIT_ANOMALY,
            };
            (d.summary(), verdict_name(d.result.verdict), code)
        }
        Body::Scan(s) => {
            let (v, code) = if !s.result.reverify() {
                ("ANOMALY", EXIT_ANOMALY)
            } else if s.result.hits.is_empty() {
                ("NO_HITS", EXIT_OK)
            } else {
                ("HITS", EXIT_OK)
            };
            (s.summary(), v.into(), code)
        }
        Body::Axioms(a) => {
            let (v, code) = if a.passed() {
                ("PASSED", EXIT_OK)
            } else {
                ("ANOMALY", EXIT_ANOMALY)
            };
            (a.summary(), v.into(), code)
        }
    }
}

/// Rechecks a report from its recorded data. Returns the problems found.
pub fn verify_report(report: &Report) -> Vec<String> {
    let mut problems = Vec::new();
    if report.schema != SCHEMA {
        problems.push(format!("unknown schema {:?}", report.schema));
        return problems;
    }
    match &report.body {
        Body::Counterexample(c) => verify_counterexample(c, &mut problems),
        Body::Dynamics(d) => verify_dynamics(d, &mut problems),
        Body::Scan(s) => {
            if !s.result.reverify() {
                problems.push("a scan hit does not satisfy the pattern".into());
            }
        }
        Body::Axioms(a) => {
            if a.torsion.failures.len() > a.torsion.places_checked {
                problems.push("more torsion failures than places checked".into());
            }
            if let Some(s) = &a.scan {
                if !s.result.reverify() {
                    problems.push("a scan hit does not satisfy the pattern".into());
                }
            }
        }
    }
    let (summary, verdict, code) = assess(&report.body);
    if summary != report.summary {
        problems.push(format!("recorded summary {:?} should read {summary:?}", report.summary));
    }
    if verdict != report.verdict || code != report.exit_code {
        problems.push(format!(
            "recorded verdict {:?} (exit {}) does not follow from the body, which gives {verdict:?} (exit {code})",
            report.verdict, report.exit_code
        ));
    }
    problems
}

/// Checks that need the module itself: recorded scan hits are recomputed
/// at their own places (the scan is not rerun).
pub fn verify_report_against(report: &Report, module: &GlobalModule) -> Vec<String> {
    let scan = match &report.body {
        Body::Scan(s) => Some(s),
        Body::Axioms(a) => a.scan.as_ref(),
        _ => None,
    };
    scan.map(|s| s.result.reverify_against(module, &s.points, report.config.caps))
        .unwrap_or_default()
        .into_iter()
        .map(|p| format!("scan hit at place {p} does not match recomputed orders"))
        .collect()
}

fn verify_counterexample(c: &CounterexampleBody, problems: &mut Vec<String>) {
    let mut certified = 0;
    let mut failures = Vec::new();
    let mut invalid = Vec::new();
    for rec in &c.places {
        match &rec.result {
            FixingOutcome::Certificate(cert) => {
                let checks = cert.verify();
                if cert.place != rec.place {
                    problems.push(format!("certificate for {} filed under {}", cert.place, rec.place));
                }
                if cert.pbar.len() != c.lattice.e() {
                    problems.push(format!("place {}: certificate has the wrong size", rec.place));
                }
                if checks != rec.checks {
                    problems.push(format!(
                        "place {}: recorded checks differ from recomputed ones",
                        rec.place
                    ));
                }
                if checks.iter().all(|k| k.passed) {
                    certified += 1;
                } else {
                    invalid.push(rec.place);
                }
            }
            FixingOutcome::MethodFailure { alphas, gcd, .. } => {
                let g = alphas.iter().fold(0u64, |acc, &a| num_integer::gcd(acc, a));
                if g != *gcd || g <= 1 {
                    problems.push(format!("place {}: method failure with gcd {g}", rec.place));
                }
                failures.push(rec.place);
            }
        }
    }
    if certified != c.certified || failures != c.method_failures || invalid != c.invalid_certificates {
        problems.push("certificate tallies do not match the records".into());
    }
    if !c.places.windows(2).all(|w| w[0].place < w[1].place) {
        problems.push("places are not in strictly ascending order".into());
    }
    match global_membership(&c.lattice) {
        Ok(g) if g == c.global => {}
        Ok(_) => problems.push("global membership does not match recomputation".into()),
        Err(e) => problems.push(format!("global membership: {e}")),
    }
    if c.lattice.tagged != (c.lattice.e() == c.lattice.d + 1) {
        problems.push("tag does not match e = d + 1".into());
    }
}

fn verify_dynamics(d: &DynamicsBody, problems: &mut Vec<String>) {
    for p in &d.result.places {
        if !p.reverify() {
            problems.push(format!("place {}: orbit does not match recomputation", p.place));
        }
    }
    if d.result.recompute_verdict() != d.result.verdict {
        problems.push("dynamics verdict does not follow from the records".into());
    }
    let misses: Vec<u64> = d
        .result
        .places
        .iter()
        .filter(|p| p.orbit.first_hit.is_none())
        .map(|p| p.place)
        .collect();
    if misses != d.result.local_misses {
        problems.push("local miss list does not match the records".into());
    }
    // Global arithmetic needs only the rank and torsion group.
    let module = match GlobalModule::synthetic(d.rank, d.torsion.clone(), 2, Default::default()) {
        Ok(m) => m,
        Err(e) => {
            problems.push(format!("module shape: {e}"));
            return;
        }
    };
    match global_orbit_intersection(&module, &d.map, &d.point, &d.lambda, d.step_bound) {
        Ok(g) if g == d.result.global => {
            if let Some(hit) = &g.hit {
                let mut q = d.point.clone();
                for _ in 0..hit.n {
                    q = d.map.apply(&module, &q);
                }
                let s = module.combine(&hit.coefficients, &d.lambda);
                let same = s.free == q.free && s.torsion == q.torsion;
                let still_member = global_member(&module, &q, &d.lambda).ok().flatten().is_some();
                if !same || !still_member {
                    problems.push("global hit coefficients do not reproduce the orbit point".into());
                }
            }
        }
        Ok(_) => problems.push("global orbit search does not match recomputation".into()),
        Err(e) => problems.push(format!("global orbit search: {e}")),
    }
}
