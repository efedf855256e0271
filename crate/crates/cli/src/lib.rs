//! Command implementations behind the `pwhile` binary: analysis reports with
//! oracle cross-checks, Monte Carlo simulation, invariant checking and the
//! corpus runner.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use pwhile_core::analysis::{loop_labels, Analyzer, InvariantVerdict, LoopBoundDerivation, LoopPolicy};
use pwhile_core::rational::{approx, fmt_rat};
use pwhile_core::semantics::{run_oracle, simulate, OracleError, OracleOptions, Scheduler};
use pwhile_core::syntax::{eval_closed, parse_cost_expr, parse_program, Command, CostExpr, FreeVars, Store, Var};
use pwhile_core::{check_upper_invariant, CostMode, LoopStrategy};
use serde::Serialize;
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_GRID: [i64; 6] = [0, 1, 2, 3, 5, 10];
pub const DEFAULT_HORIZON: usize = 200;
const REPLAY_SAMPLES: usize = 1000;
const MAX_GRID_STORES: usize = 256;
const ORACLE_CONFIGURATION_CAP: usize = 200_000;
const SIMULATION_MAX_STEPS: usize = 100_000;

pub const EXIT_CERTIFIED: i32 = 0;
pub const EXIT_FAILED: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{path}:{line}: unknown loop label {label}")]
    UnknownLabel { path: String, line: usize, label: String },
    #[error("invalid binding {0:?}, expected var=integer")]
    Binding(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 1,
            _ => EXIT_INPUT,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Io { .. } => "io",
            CliError::Parse { .. } => "parse",
            CliError::UnknownLabel { .. } => "unknown-label",
            CliError::Binding(_) => "binding",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Text,
    Json,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub strategies: Vec<LoopStrategy>,
    pub max_degree: u32,
    pub horizon: usize,
    pub grid: Vec<i64>,
    pub extra_points: Vec<Store>,
    pub seed: u64,
    pub format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> RunConfig {
        RunConfig {
            strategies: vec![LoopStrategy::Decompose, LoopStrategy::Invariant, LoopStrategy::Unroll(8)],
            max_degree: 2,
            horizon: DEFAULT_HORIZON,
            grid: DEFAULT_GRID.to_vec(),
            extra_points: Vec::new(),
            seed: 0,
            format: OutputFormat::Text,
        }
    }
}

impl RunConfig {
    pub fn policy(&self) -> LoopPolicy {
        LoopPolicy::new(&self.strategies, self.max_degree)
    }
}

pub fn read_program(path: &Path) -> Result<Command, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io { path: path.display().to_string(), message: e.to_string() })?;
    parse_program(&text).map_err(|e| CliError::Parse { path: path.display().to_string(), message: e.to_string() })
}

/// `x=3` style bindings.
pub fn parse_binding(text: &str) -> Result<(Var, i64), CliError> {
    let (name, value) = text.split_once('=').ok_or_else(|| CliError::Binding(text.to_string()))?;
    let var = Var::try_new(name.trim()).ok_or_else(|| CliError::Binding(text.to_string()))?;
    let value = value.trim().parse().map_err(|_| CliError::Binding(text.to_string()))?;
    Ok((var, value))
}

/// Cartesian grid over the free variables of `prog`, capped, followed by the
/// extra points.
pub fn store_grid(prog: &Command, config: &RunConfig) -> Vec<Store> {
    let vars: Vec<Var> = prog.free_vars().into_iter().collect();
    let mut stores = vec![Store::new()];
    for x in &vars {
        stores = stores
            .iter()
            .flat_map(|s| config.grid.iter().map(move |v| s.with(x, (*v).into())))
            .take(MAX_GRID_STORES)
            .collect();
    }
    stores.extend(config.extra_points.iter().cloned());
    stores
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Certified,
    CertifiedWithUnknownLoops,
    Failed,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Failed => EXIT_FAILED,
            _ => EXIT_CERTIFIED,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LoopSummary {
    pub label: String,
    pub mode: String,
    pub continuation: String,
    pub strategy: String,
    pub degree: u32,
    pub norms: Vec<String>,
    pub body_cost: Option<String>,
    pub expected_norms: Vec<String>,
    pub template: String,
    pub assignment: BTreeMap<String, String>,
    pub constraints: Vec<String>,
    pub bound: String,
    pub exact: bool,
    pub replay: String,
}

impl LoopSummary {
    fn new(d: &LoopBoundDerivation, replay: &Result<(), String>) -> LoopSummary {
        LoopSummary {
            label: d.label.clone(),
            mode: d.mode.to_string(),
            continuation: d.continuation.to_string(),
            strategy: d.strategy.to_string(),
            degree: d.degree,
            norms: d.norms.iter().map(|n| n.to_string()).collect(),
            body_cost: d.body_cost.as_ref().map(|g| g.to_string()),
            expected_norms: d.expected_norms.iter().map(|h| h.to_string()).collect(),
            template: d.template.to_string(),
            assignment: d.assignment.iter().map(|(s, v)| (s.to_string(), fmt_rat(v))).collect(),
            constraints: d.constraints.iter().map(|c| c.to_string()).collect(),
            bound: d.bound.to_string(),
            exact: d.exact,
            replay: match replay {
                Ok(()) => "verified".to_string(),
                Err(e) => format!("failed: {e}"),
            },
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CrossCheckRow {
    pub store: String,
    pub oracle_lower: Option<String>,
    pub live_mass: Option<String>,
    pub bound_value: String,
    pub ok: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ErrorDetail {
    pub kind: String,
    pub label: Option<String>,
    pub message: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub program: String,
    pub status: Status,
    pub bound: Option<String>,
    pub loops: Vec<LoopSummary>,
    pub cross_check: Vec<CrossCheckRow>,
    pub errors: Vec<ErrorDetail>,
}

impl AnalysisReport {
    fn input_error(path: &Path, e: &CliError) -> AnalysisReport {
        AnalysisReport {
            schema_version: SCHEMA_VERSION,
            program: path.display().to_string(),
            status: Status::Failed,
            bound: None,
            loops: Vec::new(),
            cross_check: Vec::new(),
            errors: vec![ErrorDetail { kind: e.kind().to_string(), label: None, message: e.to_string() }],
        }
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "program: {}", self.program);
        let _ = writeln!(out, "status: {}", serde_json::to_value(self.status).unwrap().as_str().unwrap_or("?"));
        if let Some(b) = &self.bound {
            let _ = writeln!(out, "bound: {b}");
        }
        for l in &self.loops {
            let _ = writeln!(out, "loop {} [{} mode, f = {}] {} degree {}", l.label, l.mode, l.continuation, l.strategy, l.degree);
            if !l.norms.is_empty() {
                let _ = writeln!(out, "  norms: {}", l.norms.join(", "));
            }
            if let Some(g) = &l.body_cost {
                let _ = writeln!(out, "  body cost: {g}");
            }
            for (n, h) in l.norms.iter().zip(&l.expected_norms) {
                let _ = writeln!(out, "  after body {n} -> {h}");
            }
            let _ = writeln!(out, "  template: {}", l.template);
            for c in &l.constraints {
                let _ = writeln!(out, "  constraint: {c}");
            }
            let vals: Vec<String> = l.assignment.iter().map(|(k, v)| format!("{k} = {v}")).collect();
            if !vals.is_empty() {
                let _ = writeln!(out, "  solution: {}", vals.join(", "));
            }
            let _ = writeln!(out, "  bound: {}{}", l.bound, if l.exact { "" } else { " (strengthened)" });
            let _ = writeln!(out, "  replay: {}", l.replay);
        }
        if !self.cross_check.is_empty() {
            let _ = writeln!(out, "cross-check (store, oracle lower, live mass, bound):");
            for r in &self.cross_check {
                let mark = match r.ok {
                    Some(true) => "ok",
                    Some(false) => "VIOLATED",
                    None => "inconclusive",
                };
                let _ = writeln!(
                    out,
                    "  {}\t{}\t{}\t{}\t{mark}",
                    r.store,
                    r.oracle_lower.as_deref().unwrap_or("-"),
                    r.live_mass.as_deref().unwrap_or("-"),
                    r.bound_value
                );
            }
        }
        for e in &self.errors {
            match &e.label {
                Some(l) => {
                    let _ = writeln!(out, "error [{}] {l}: {}", e.kind, e.message);
                }
                None => {
                    let _ = writeln!(out, "error [{}]: {}", e.kind, e.message);
                }
            }
        }
        out
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Text => self.render_text(),
            OutputFormat::Json => serde_json::to_string_pretty(self).expect("report serializes") + "\n",
        }
    }
}

fn failure_details(analyzer: &Analyzer) -> Vec<ErrorDetail> {
    analyzer
        .failures()
        .iter()
        .map(|(label, message)| {
            let kind = if message.contains("unsupported") || message.contains("nonlinear") {
                "unsupported"
            } else {
                "attempt-failed"
            };
            ErrorDetail { kind: kind.to_string(), label: Some(label.clone()), message: message.clone() }
        })
        .collect()
}

/// Infers a cost bound for `prog`, replays every loop derivation and compares
/// the bound against the exhaustive oracle on the store grid.
pub fn analyze_program(path: &str, prog: &Command, config: &RunConfig) -> AnalysisReport {
    let mut analyzer = Analyzer::new(config.policy());
    let result = analyzer.et(CostMode::Cost, prog, &CostExpr::zero());
    let mut errors = Vec::new();
    let mut loops = Vec::new();
    let mut replay_ok = true;
    for d in analyzer.derivations() {
        let replay = d.replay(REPLAY_SAMPLES, config.seed).map_err(|e| e.to_string());
        if let Err(e) = &replay {
            replay_ok = false;
            errors.push(ErrorDetail { kind: "replay".to_string(), label: Some(d.label.clone()), message: e.clone() });
        }
        loops.push(LoopSummary::new(d, &replay));
    }
    let bound = match result {
        Ok(b) => b,
        Err(e) => {
            errors.extend(failure_details(&analyzer));
            errors.push(ErrorDetail { kind: "analysis".to_string(), label: None, message: e.to_string() });
            return AnalysisReport {
                schema_version: SCHEMA_VERSION,
                program: path.to_string(),
                status: Status::Failed,
                bound: None,
                loops,
                cross_check: Vec::new(),
                errors,
            };
        }
    };

    let mut cross_check = Vec::new();
    let mut violated = false;
    let mut inconclusive = false;
    let opts = OracleOptions::new(config.horizon).max_configurations(ORACLE_CONFIGURATION_CAP);
    let vars = prog.free_vars();
    for s in store_grid(prog, config) {
        let value = eval_closed(&bound, &s);
        let row = match run_oracle(CostMode::Cost, prog, &s, &CostExpr::zero(), &opts) {
            Ok(o) => {
                let ok = o.lower <= value;
                violated |= !ok;
                CrossCheckRow {
                    store: s.render_over(&vars),
                    oracle_lower: Some(approx(&o.lower, 12)),
                    live_mass: Some(approx(&o.live_mass, 12)),
                    bound_value: fmt_rat(&value),
                    ok: Some(ok),
                }
            }
            Err(OracleError::TooManyConfigurations(_)) => {
                inconclusive = true;
                CrossCheckRow { store: s.render_over(&vars), oracle_lower: None, live_mass: None, bound_value: fmt_rat(&value), ok: None }
            }
        };
        cross_check.push(row);
    }
    if violated {
        errors.push(ErrorDetail {
            kind: "cross-check".to_string(),
            label: None,
            message: "oracle lower bound exceeds the inferred bound".to_string(),
        });
    }
    let status = if violated || !replay_ok {
        Status::Failed
    } else if inconclusive {
        Status::CertifiedWithUnknownLoops
    } else {
        Status::Certified
    };
    AnalysisReport {
        schema_version: SCHEMA_VERSION,
        program: path.to_string(),
        status,
        bound: Some(bound.to_string()),
        loops,
        cross_check,
        errors,
    }
}

/// Reads, parses and analyzes one file. Parse failures yield a failed report
/// together with the input error.
pub fn cmd_analyze(path: &Path, config: &RunConfig) -> (AnalysisReport, Option<CliError>) {
    match read_program(path) {
        Ok(prog) => (analyze_program(&path.display().to_string(), &prog, config), None),
        Err(e) => (AnalysisReport::input_error(path, &e), Some(e)),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleLine {
    pub horizon: usize,
    pub lower: String,
    pub live_mass: String,
    pub configurations: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SimulationReport {
    pub schema_version: u32,
    pub program: String,
    pub store: String,
    pub samples: usize,
    pub seed: u64,
    pub mean_cost: String,
    pub mean_cost_decimal: String,
    pub abort_rate: String,
    pub timeout_rate: String,
    pub oracle: Option<OracleLine>,
}

impl SimulationReport {
    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => serde_json::to_string_pretty(self).expect("report serializes") + "\n",
            OutputFormat::Text => {
                let mut out = String::new();
                let _ = writeln!(out, "program: {}", self.program);
                let _ = writeln!(out, "store: {}", self.store);
                let _ = writeln!(out, "samples: {} (seed {})", self.samples, self.seed);
                let _ = writeln!(out, "mean cost: {} ~ {}", self.mean_cost, self.mean_cost_decimal);
                let _ = writeln!(out, "abort rate: {}", self.abort_rate);
                let _ = writeln!(out, "timeout rate: {}", self.timeout_rate);
                match &self.oracle {
                    Some(o) => {
                        let _ = writeln!(
                            out,
                            "oracle (horizon {}): lower {} live mass {} ({} configurations)",
                            o.horizon, o.lower, o.live_mass, o.configurations
                        );
                    }
                    None => {
                        let _ = writeln!(out, "oracle: state space too large");
                    }
                }
                out
            }
        }
    }
}

pub fn cmd_simulate(
    path: &Path,
    bindings: &[(Var, i64)],
    samples: usize,
    seed: u64,
    horizon: usize,
) -> Result<SimulationReport, CliError> {
    let prog = read_program(path)?;
    let mut store = Store::new();
    for (x, v) in bindings {
        store.set(x.clone(), (*v).into());
    }
    let stats = simulate(&prog, &store, samples, seed, &Scheduler::Left, SIMULATION_MAX_STEPS)
        .expect("left scheduler is concrete");
    let opts = OracleOptions::new(horizon).max_configurations(ORACLE_CONFIGURATION_CAP);
    let oracle = run_oracle(CostMode::Cost, &prog, &store, &CostExpr::zero(), &opts).ok().map(|o| OracleLine {
        horizon,
        lower: approx(&o.lower, 12),
        live_mass: approx(&o.live_mass, 12),
        configurations: o.configurations,
    });
    Ok(SimulationReport {
        schema_version: SCHEMA_VERSION,
        program: path.display().to_string(),
        store: store.to_string(),
        samples,
        seed,
        mean_cost: fmt_rat(&stats.mean_cost),
        mean_cost_decimal: approx(&stats.mean_cost, 6),
        abort_rate: fmt_rat(&stats.abort_rate),
        timeout_rate: fmt_rat(&stats.timeout_rate),
        oracle,
    })
}

/// `label: cost-expression` lines; `#` starts a comment.
pub fn parse_invariant_file(path: &Path, text: &str) -> Result<Vec<(usize, String, CostExpr)>, CliError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| CliError::Parse { path: format!("{}:{}", path.display(), i + 1), message };
        let (label, expr) = line.split_once(':').ok_or_else(|| err("expected `label: expression`".to_string()))?;
        let expr = parse_cost_expr(expr.trim()).map_err(|e| err(e.to_string()))?;
        out.push((i + 1, label.trim().to_string(), expr));
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckRow {
    pub label: String,
    pub invariant: Option<String>,
    pub verdict: String,
    pub witness: Option<String>,
    pub detail: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub schema_version: u32,
    pub program: String,
    pub loops: Vec<CheckRow>,
    pub certified: bool,
}

impl CheckReport {
    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => serde_json::to_string_pretty(self).expect("report serializes") + "\n",
            OutputFormat::Text => {
                let mut out = String::new();
                let _ = writeln!(out, "program: {}", self.program);
                for r in &self.loops {
                    let _ = write!(out, "{}: {}", r.label, r.verdict);
                    if let Some(i) = &r.invariant {
                        let _ = write!(out, " ({i})");
                    }
                    if let Some(w) = &r.witness {
                        let _ = write!(out, " witness {w}");
                    }
                    if let Some(d) = &r.detail {
                        let _ = write!(out, ": {d}");
                    }
                    out.push('\n');
                }
                let _ = writeln!(out, "{}", if self.certified { "all loops certified" } else { "not certified" });
                out
            }
        }
    }
}

/// Checks each loop's candidate upper invariant, with the loop taken in
/// isolation (continuation 0).
pub fn cmd_check(path: &Path, invariants: &Path) -> Result<CheckReport, CliError> {
    let prog = read_program(path)?;
    let text = std::fs::read_to_string(invariants)
        .map_err(|e| CliError::Io { path: invariants.display().to_string(), message: e.to_string() })?;
    let entries = parse_invariant_file(invariants, &text)?;
    let labels = loop_labels(&prog);
    for (line, label, _) in &entries {
        if !labels.iter().any(|(l, _)| l == label) {
            return Err(CliError::UnknownLabel { path: invariants.display().to_string(), line: *line, label: label.clone() });
        }
    }
    let mut rows = Vec::new();
    for (label, lp) in &labels {
        let row = match entries.iter().find(|(_, l, _)| l == label) {
            None => CheckRow {
                label: label.clone(),
                invariant: None,
                verdict: "missing".to_string(),
                witness: None,
                detail: None,
            },
            Some((_, _, inv)) => {
                let verdict = check_upper_invariant(CostMode::Cost, lp, &CostExpr::zero(), inv);
                let (v, witness, detail) = match verdict {
                    InvariantVerdict::Certified => ("certified", None, None),
                    InvariantVerdict::Refuted(s) => ("refuted", Some(s.to_string()), None),
                    InvariantVerdict::Unknown(d) => ("unknown", None, Some(d)),
                };
                CheckRow { label: label.clone(), invariant: Some(inv.to_string()), verdict: v.to_string(), witness, detail }
            }
        };
        rows.push(row);
    }
    let certified = rows.iter().all(|r| r.verdict == "certified");
    Ok(CheckReport { schema_version: SCHEMA_VERSION, program: path.display().to_string(), loops: rows, certified })
}

#[derive(Clone, Debug, Serialize)]
pub struct CorpusReport {
    pub schema_version: u32,
    pub reports: Vec<AnalysisReport>,
}

/// `.pw` files directly under `dir`, sorted by name.
pub fn corpus_files(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let entries = std::fs::read_dir(dir).map_err(|e| CliError::Io { path: dir.display().to_string(), message: e.to_string() })?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "pw"))
        .collect();
    files.sort();
    Ok(files)
}

/// Analyzes every corpus file on its own thread; reports keep file order.
pub fn run_corpus(dir: &Path, config: &RunConfig) -> Result<CorpusReport, CliError> {
    let files = corpus_files(dir)?;
    let reports = std::thread::scope(|scope| {
        let handles: Vec<_> = files.iter().map(|f| scope.spawn(move || cmd_analyze(f, config).0)).collect();
        handles.into_iter().map(|h| h.join().expect("analysis thread panicked")).collect()
    });
    Ok(CorpusReport { schema_version: SCHEMA_VERSION, reports })
}

impl CorpusReport {
    pub fn all_certified(&self) -> bool {
        self.reports.iter().all(|r| r.status != Status::Failed)
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => serde_json::to_string_pretty(self).expect("report serializes") + "\n",
            OutputFormat::Text => {
                let mut out = String::new();
                for r in &self.reports {
                    let status = serde_json::to_value(r.status).unwrap();
                    let _ = writeln!(
                        out,
                        "{}\t{}\t{}",
                        r.program,
                        status.as_str().unwrap_or("?"),
                        r.bound.as_deref().unwrap_or("-")
                    );
                }
                out
            }
        }
    }
}
