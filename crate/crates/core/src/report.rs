//! Subcommand dispatch, JSON reports and CSV traces.
//!
//! Reports contain no timings or other run-dependent data, so the same
//! scenario and tool version always serialize to the same bytes.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::estimators::{
    analyze, boundedness_p_inf, boundedness_pq, AnalysisConfig, AnalysisReport, KernelBoundedness, Regime,
    SupBoundedness,
};
use crate::funcspace::{hardy_norm, Exponent};
use crate::measures::{classify_carleson, pullback, CarlesonCertificate};
use crate::scenario::Scenario;
use crate::selftest::{run_criteria, CriterionResult};
use crate::truncation::{build_matrix, default_grid, truncation_bracket, TruncationBracket, TruncationMatrix};
use crate::verdict::Verdict;

pub const TOOL: &str = "wcop";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Analyze,
    Boundedness,
    Essnorm,
    Carleson,
    Truncate,
    Sweep,
    Selftest,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Analyze,
        Command::Boundedness,
        Command::Essnorm,
        Command::Carleson,
        Command::Truncate,
        Command::Sweep,
        Command::Selftest,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Analyze => "analyze",
            Command::Boundedness => "boundedness",
            Command::Essnorm => "essnorm",
            Command::Carleson => "carleson",
            Command::Truncate => "truncate",
            Command::Sweep => "sweep",
            Command::Selftest => "selftest",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| invalid(format!("unknown subcommand {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err(invalid(format!("unknown format {s:?}, expected json or csv"))),
        }
    }
}

/// Overall outcome of one scenario run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Unbounded,
    Undecided,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioSummary {
    pub name: String,
    pub u: String,
    pub phi: String,
    pub p: Exponent,
    pub q: Exponent,
}

impl From<&Scenario> for ScenarioSummary {
    fn from(s: &Scenario) -> Self {
        ScenarioSummary {
            name: s.name.clone(),
            u: s.u.to_string(),
            phi: s.phi.map().to_string(),
            p: s.p,
            q: s.q,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundednessOutcome {
    pub verdict: Verdict,
    pub norm_estimate: Option<f64>,
    pub kernel: Option<KernelBoundedness>,
    pub supremum: Option<SupBoundedness>,
    pub carleson: Option<CarlesonCertificate>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncationOutcome {
    pub degree: usize,
    pub grid_size: usize,
    pub tail_bound: f64,
    pub bracket: TruncationBracket,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Analysis(AnalysisReport),
    Boundedness(BoundednessOutcome),
    Carleson(CarlesonCertificate),
    Truncation(TruncationOutcome),
    Error { kind: &'static str, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: Command,
    pub scenario: ScenarioSummary,
    pub regime: Option<Regime>,
    pub status: Status,
    /// Every grid and schedule used, after scenario overrides.
    pub config: AnalysisConfig,
    pub result: Outcome,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        match (self.status, self.command) {
            (Status::Ok, _) => 0,
            (Status::Unbounded, Command::Essnorm) => 1,
            (Status::Unbounded, _) => 0,
            (Status::Undecided, _) => 2,
            (Status::Error, _) => 1,
        }
    }

    /// Long-format trace rows `(series, x, value)` for plotting.
    pub fn traces(&self) -> Vec<(String, f64, f64)> {
        let mut rows = Vec::new();
        match &self.result {
            Outcome::Analysis(a) => {
                if let Some(k) = &a.kernel {
                    for ring in &k.sweep.rings {
                        rows.push(("ring_max".into(), ring.radius, ring.max));
                        rows.push(("ring_min".into(), ring.radius, ring.min));
                    }
                    for lp in &k.lower_points {
                        rows.push(("kernel_lower".into(), lp.a.norm(), lp.value));
                    }
                }
                if let Some(s) = &a.supremum {
                    sup_rows(s, &mut rows);
                }
                if let Some(m) = &a.m_phi {
                    for e in &m.eps_trace {
                        rows.push(("m_phi".into(), e.eps, e.value));
                    }
                }
                for j in &a.extremal {
                    for e in &j.eps_trace {
                        rows.push((format!("extremal_t{}", j.exponent), e.eps, e.value));
                    }
                }
                for &(n, v) in &a.power_norms {
                    rows.push(("power_norm".into(), n as f64, v));
                }
                if let Some(x) = &a.cross_check {
                    truncation_rows(&x.truncation, &mut rows);
                }
            }
            Outcome::Boundedness(b) => {
                if let Some(k) = &b.kernel {
                    for (r, v) in self.config.rings.radii.iter().zip(&k.ring_maxima) {
                        rows.push(("ring_max".into(), *r, *v));
                    }
                }
                if let Some(s) = &b.supremum {
                    sup_rows(s, &mut rows);
                }
                if let Some(c) = &b.carleson {
                    carleson_rows(c, &mut rows);
                }
            }
            Outcome::Carleson(c) => carleson_rows(c, &mut rows),
            Outcome::Truncation(t) => truncation_rows(&t.bracket, &mut rows),
            Outcome::Error { .. } => {}
        }
        rows
    }
}

fn sup_rows(s: &SupBoundedness, rows: &mut Vec<(String, f64, f64)>) {
    for d in &s.passes {
        rows.push(("sup_depth".into(), d.depth, d.value));
    }
}

fn truncation_rows(t: &TruncationBracket, rows: &mut Vec<(String, f64, f64)>) {
    for (&n, &v) in t.schedule.iter().zip(&t.upper_by_n) {
        rows.push(("trunc_upper".into(), n as f64, v));
    }
    for (&n, &v) in t.schedule.iter().zip(&t.lower_by_n) {
        rows.push(("trunc_lower".into(), n as f64, v));
    }
}

fn carleson_rows(c: &CarlesonCertificate, rows: &mut Vec<(String, f64, f64)>) {
    for (&m, &v) in c.grids.iter().zip(&c.boundary_mass) {
        rows.push(("boundary_mass".into(), m as f64, v));
    }
    for (i, &v) in c.ratio_sups.iter().enumerate() {
        rows.push(("ratio_sup".into(), i as f64, v));
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::SingularPoint(_) => "singular_point",
        Error::OutsideDomain(_) => "outside_domain",
        Error::NonConvergent(_) => "non_convergent",
        Error::AliasingTooLarge { .. } => "aliasing_too_large",
        Error::Undecided(_) => "undecided",
        Error::EmptyLevel { .. } => "empty_level",
        Error::NotBounded(_) => "not_bounded",
        Error::NoConvergence(_) => "no_convergence",
        Error::Parse { .. } => "parse",
        Error::Validation(_) => "validation",
        Error::InvalidArgument(_) => "invalid_argument",
        Error::Io(_) => "io",
        Error::Json(_) => "json",
        Error::Csv(_) => "csv",
    }
}

/// Exit code for a run that failed before producing a report.
pub fn exit_code_for(e: &Error) -> i32 {
    if e.is_indecision() {
        2
    } else {
        1
    }
}

fn status_of(verdict: Verdict, bounded_is_enough: bool, has_bracket: bool) -> Status {
    match verdict {
        Verdict::Fails => Status::Unbounded,
        Verdict::Undecided => Status::Undecided,
        Verdict::Holds if bounded_is_enough || has_bracket => Status::Ok,
        Verdict::Holds => Status::Undecided,
    }
}

fn boundedness(s: &Scenario, cfg: &AnalysisConfig) -> Result<BoundednessOutcome> {
    let mut out = BoundednessOutcome {
        verdict: Verdict::Undecided,
        norm_estimate: None,
        kernel: None,
        supremum: None,
        carleson: None,
    };
    match Regime::classify(s.p, s.q)? {
        Regime::PLeQ | Regime::POneLeQ => {
            let k = boundedness_pq(&s.u, &s.phi, s.p, s.q, &cfg.rings, &cfg.quadrature)?;
            out.verdict = k.verdict;
            out.norm_estimate = Some(k.norm_estimate);
            out.kernel = Some(k);
        }
        Regime::PToInf => {
            let b = boundedness_p_inf(&s.u, &s.phi, s.p, &cfg.disk)?;
            out.verdict = b.verdict;
            out.norm_estimate = Some(b.sup_estimate.powf(1.0 / s.p.require_finite("p")?));
            out.supremum = Some(b);
        }
        Regime::InfToQ => {
            // Bounded exactly when u ∈ H^q, and every expression leaf is.
            out.verdict = Verdict::Holds;
            out.norm_estimate = Some(hardy_norm(&s.u, s.q, &cfg.quadrature)?);
        }
        Regime::PGtQ => {
            let c = classify_carleson(&s.u, &s.phi, s.p, s.q, &cfg.carleson)?;
            out.verdict = c.verdict;
            out.carleson = Some(c);
        }
    }
    Ok(out)
}

fn truncation(s: &Scenario, cfg: &AnalysisConfig) -> Result<(TruncationOutcome, TruncationMatrix)> {
    let k = cfg.truncation_degree;
    let t = build_matrix(&s.u, &s.phi, k, default_grid(k), 1.0)?;
    let bracket = truncation_bracket(&t, &cfg.n_schedule)?;
    let mut notes = Vec::new();
    if s.p != Exponent::Finite(2.0) || s.q != Exponent::Finite(2.0) {
        notes.push(format!(
            "the matrix acts on H^2; the scenario exponents p = {}, q = {} are ignored",
            s.p, s.q
        ));
    }
    let outcome = TruncationOutcome {
        degree: k,
        grid_size: t.grid_size,
        tail_bound: t.tail_bound,
        bracket,
        notes,
    };
    Ok((outcome, t))
}

/// Runs one scenario subcommand. Hard failures are returned as `Err`.
pub fn execute(command: Command, s: &Scenario) -> Result<Report> {
    let cfg = s.config()?;
    let regime = Regime::classify(s.p, s.q).ok();
    let (status, result) = match command {
        Command::Analyze | Command::Sweep => {
            let a = analyze(&s.u, &s.phi, s.p, s.q, &cfg)?;
            (status_of(a.bounded, true, a.bracket.is_some()), Outcome::Analysis(a))
        }
        Command::Essnorm => {
            let a = analyze(&s.u, &s.phi, s.p, s.q, &cfg)?;
            (status_of(a.bounded, false, a.bracket.is_some()), Outcome::Analysis(a))
        }
        Command::Boundedness => {
            let b = boundedness(s, &cfg)?;
            (status_of(b.verdict, true, false), Outcome::Boundedness(b))
        }
        Command::Carleson => {
            let c = classify_carleson(&s.u, &s.phi, s.p, s.q, &cfg.carleson)?;
            (status_of(c.verdict, true, false), Outcome::Carleson(c))
        }
        Command::Truncate => (Status::Ok, Outcome::Truncation(truncation(s, &cfg)?.0)),
        Command::Selftest => return Err(invalid("selftest takes no scenario")),
    };
    Ok(Report {
        tool: TOOL,
        version: VERSION,
        command,
        scenario: s.into(),
        regime,
        status,
        config: cfg,
        result,
    })
}

/// Like [`execute`], but folds failures into an error report.
pub fn execute_or_report(command: Command, s: &Scenario) -> Report {
    execute(command, s).unwrap_or_else(|e| Report {
        tool: TOOL,
        version: VERSION,
        command,
        scenario: s.into(),
        regime: Regime::classify(s.p, s.q).ok(),
        status: if e.is_indecision() {
            Status::Undecided
        } else {
            Status::Error
        },
        config: s.overrides.config(),
        result: Outcome::Error {
            kind: error_kind(&e),
            message: e.to_string(),
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: Command,
    pub status: Status,
    pub reports: Vec<Report>,
}

impl SweepReport {
    pub fn exit_code(&self) -> i32 {
        match self.status {
            Status::Ok | Status::Unbounded => 0,
            Status::Undecided => 2,
            Status::Error => 1,
        }
    }
}

/// Analyzes independent scenarios in parallel; the merged report keeps input
/// order and its status is the worst individual status.
pub fn sweep(scenarios: &[Scenario]) -> SweepReport {
    let reports: Vec<Report> = scenarios
        .par_iter()
        .map(|s| execute_or_report(Command::Sweep, s))
        .collect();
    let status = reports.iter().map(|r| r.status).max().unwrap_or(Status::Ok);
    SweepReport {
        tool: TOOL,
        version: VERSION,
        command: Command::Sweep,
        status,
        reports,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SelftestReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub passed: usize,
    pub failed: usize,
    pub criteria: Vec<CriterionResult>,
}

pub fn selftest(only: Option<&[usize]>) -> SelftestReport {
    let criteria = run_criteria(only);
    let passed = criteria.iter().filter(|c| c.passed).count();
    SelftestReport {
        tool: TOOL,
        version: VERSION,
        passed,
        failed: criteria.len() - passed,
        criteria,
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Trace CSV with columns `scenario,series,x,value`.
pub fn traces_csv<W: Write>(reports: &[&Report], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["scenario", "series", "x", "value"])?;
    for r in reports {
        for (series, x, v) in r.traces() {
            w.write_record([r.scenario.name.as_str(), &series, &x.to_string(), &v.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(std::io::BufWriter::new(std::fs::File::create(path)?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

/// Runs a subcommand and writes its output to `out` (stdout when `None`).
/// Returns the process exit code; `Err` means nothing was written.
///
/// CSV output is the trace table, except for `truncate` (the matrix) and
/// `carleson` (the pullback measure at the configured grid).
pub fn run(command: Command, scenarios: &[Scenario], format: Format, out: Option<&Path>) -> Result<i32> {
    if command == Command::Selftest {
        let report = selftest(None);
        sink(out)?.write_all(to_json(&report)?.as_bytes())?;
        return Ok(if report.failed == 0 { 0 } else { 1 });
    }
    if command == Command::Sweep {
        let report = sweep(scenarios);
        let mut w = sink(out)?;
        match format {
            Format::Json => w.write_all(to_json(&report)?.as_bytes())?,
            Format::Csv => traces_csv(&report.reports.iter().collect::<Vec<_>>(), &mut w)?,
        }
        w.flush()?;
        return Ok(report.exit_code());
    }
    let [s] = scenarios else {
        return Err(invalid(format!(
            "{command} takes exactly one scenario, got {}",
            scenarios.len()
        )));
    };
    let code = match (command, format) {
        (Command::Truncate, Format::Csv) => {
            let cfg = s.config()?;
            let (_, t) = truncation(s, &cfg)?;
            let mut w = sink(out)?;
            t.write_csv(&mut w)?;
            w.flush()?;
            0
        }
        (Command::Carleson, Format::Csv) => {
            let cfg = s.config()?;
            let mu = pullback(&s.u, &s.phi, s.q, cfg.carleson.grid)?;
            let mut w = sink(out)?;
            mu.write_csv(&mut w)?;
            w.flush()?;
            0
        }
        _ => {
            let report = execute(command, s)?;
            let mut w = sink(out)?;
            match format {
                Format::Json => w.write_all(to_json(&report)?.as_bytes())?,
                Format::Csv => traces_csv(&[&report], &mut w)?,
            }
            w.flush()?;
            report.exit_code()
        }
    };
    Ok(code)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::parse_scenario;

    fn quick(text: &str) -> Scenario {
        let base = "grid = 4096\ndepth = 10\nangles = 32\ndegree = 64\nn_schedule = 8, 16, 32\ncarleson_grid = 4096\n";
        parse_scenario(&format!("{text}\n{base}")).unwrap()
    }

    #[test]
    fn command_names_round_trip() {
        for c in Command::ALL {
            assert_eq!(c.name().parse::<Command>().unwrap(), c);
        }
        assert!("plot".parse::<Command>().is_err());
        assert_eq!("csv".parse::<Format>().unwrap(), Format::Csv);
    }

    #[test]
    fn identity_report() {
        let s = quick("name = id\nphi = z\np = 2\nq = 2");
        let r = execute(Command::Analyze, &s).unwrap();
        assert_eq!(r.status, Status::Ok);
        assert_eq!(r.exit_code(), 0);
        let Outcome::Analysis(a) = &r.result else { panic!() };
        let b = a.bracket.as_ref().unwrap();
        assert!((b.raw_upper - 1.0).abs() < 1e-8 && (b.raw_lower - 1.0).abs() < 1e-8);
        let json: serde_json::Value = serde_json::from_str(&to_json(&r).unwrap()).unwrap();
        assert_eq!(json["tool"], "wcop");
        assert_eq!(json["regime"], "p<=q");
        assert_eq!(json["config"]["quadrature"]["base_grid"], 4096);
    }

    #[test]
    fn essnorm_unbounded_exits_one() {
        let s = quick("phi = z\np = 2\nq = 4");
        let r = execute(Command::Essnorm, &s).unwrap();
        assert_eq!(r.status, Status::Unbounded);
        assert_eq!(r.exit_code(), 1);
        assert_eq!(execute(Command::Analyze, &s).unwrap().exit_code(), 0);
    }

    #[test]
    fn json_is_deterministic() {
        let s = quick("phi = mul(0.5, z)\np = 2\nq = 2");
        let a = to_json(&execute(Command::Analyze, &s).unwrap()).unwrap();
        let b = to_json(&execute(Command::Analyze, &s).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sweep_merges_in_order() {
        let ok = quick("name = a\nphi = mul(0.5, z)\np = 2\nq = 2");
        let unbounded = quick("name = b\nphi = z\np = 2\nq = 4");
        let bad = quick("name = c\nphi = z\nu = 0\np = 2\nq = 2");
        let r = sweep(&[ok, unbounded, bad]);
        let names: Vec<_> = r.reports.iter().map(|r| r.scenario.name.as_str()).collect();
        assert_eq!(names, ["a", "b", "c"]);
        assert_eq!(r.status, Status::Error);
        assert_eq!(r.exit_code(), 1);
        assert!(matches!(r.reports[2].result, Outcome::Error { kind: "validation", .. }));
    }

    #[test]
    fn traces_have_rows() {
        let s = quick("name = half\nphi = mul(0.5, z)\np = 2\nq = 2");
        let r = execute(Command::Analyze, &s).unwrap();
        let mut buf = Vec::new();
        traces_csv(&[&r], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("scenario,series,x,value\n"));
        assert!(text.contains("half,ring_max,0.875,"));
        assert!(text.contains("half,trunc_upper,8,"));
    }

    #[test]
    fn boundedness_by_regime() {
        let cases = [
            ("phi = mul(0.5, z)\np = 2\nq = 2", Verdict::Holds),
            ("phi = z\np = 2\nq = 4", Verdict::Fails),
            ("phi = mul(0.5, z)\np = 2\nq = inf", Verdict::Holds),
            ("phi = z\np = 2\nq = inf", Verdict::Fails),
            ("phi = z\np = inf\nq = 2", Verdict::Holds),
            ("phi = mul(0.5, z)\np = 4\nq = 2", Verdict::Holds),
        ];
        for (text, verdict) in cases {
            let r = execute(Command::Boundedness, &quick(text)).unwrap();
            let Outcome::Boundedness(b) = &r.result else { panic!() };
            assert_eq!(b.verdict, verdict, "{text}");
        }
    }
}
