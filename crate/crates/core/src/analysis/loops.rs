use std::collections::{BTreeMap, HashMap};
use std::fmt;

use thiserror::Error;

use super::concavity::{concavity_check, ConcavityVerdict};
use super::norms::{cost_norms, select_norms, Norm, NormShape, Template};
use crate::rational::Rat;
use crate::solver::{numeric_refute, numeric_refute_with, synthesize, Constraint, RefuteOptions, Refutation, SolverError};
use crate::syntax::{BExp, Command, CostExpr, EvalError, Store, Sym};
use crate::transformer::{et_with, simplify, CostMode, LoopStrategy};

const REPLAY_SAMPLES: usize = 500;
const CONCAVITY_TRIALS: usize = 200;
const MAX_UNROLLED_SIZE: usize = 20_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("{label}: no linear norms available")]
    NoNorms { label: String },
    #[error("{label}: {error}")]
    Solver { label: String, error: SolverError },
    #[error("{label}: instantiated template {shape} is not affine over a probabilistic body ({detail})")]
    ConcavityViolation { label: String, shape: String, detail: String },
    #[error("{label}: {detail}")]
    Unsupported { label: String, detail: String },
    #[error("{label}: candidate invariant refuted at {witness}")]
    Refuted { label: String, witness: Store },
    #[error("{label}: certified constraint fails at {witness}: {constraint}")]
    ReplayFailed { label: String, constraint: String, witness: Store },
    #[error("{label}: no strategy succeeded ({})", attempts.join("; "))]
    AllStrategiesFailed { label: String, attempts: Vec<String> },
    #[error("{0}")]
    Eval(#[from] EvalError),
}

/// One strategy at one template degree.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Attempt {
    pub strategy: LoopStrategy,
    pub degree: u32,
}

impl fmt::Display for Attempt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.strategy {
            LoopStrategy::Unroll(_) => write!(f, "{}", self.strategy),
            s => write!(f, "{s}/deg{}", self.degree),
        }
    }
}

/// Ordered attempts tried for every loop until one succeeds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoopPolicy {
    pub attempts: Vec<Attempt>,
}

impl LoopPolicy {
    /// Each strategy at degrees `1..=max_degree`, lower degrees first.
    pub fn new(strategies: &[LoopStrategy], max_degree: u32) -> LoopPolicy {
        let mut attempts = Vec::new();
        for &strategy in strategies {
            match strategy {
                LoopStrategy::Unroll(_) => attempts.push(Attempt { strategy, degree: 0 }),
                _ => attempts.extend((1..=max_degree.max(1)).map(|degree| Attempt { strategy, degree })),
            }
        }
        LoopPolicy { attempts }
    }

    pub fn only(strategy: LoopStrategy, degree: u32) -> LoopPolicy {
        LoopPolicy { attempts: vec![Attempt { strategy, degree }] }
    }
}

impl Default for LoopPolicy {
    fn default() -> LoopPolicy {
        LoopPolicy::new(&[LoopStrategy::Decompose, LoopStrategy::Invariant, LoopStrategy::Unroll(8)], 2)
    }
}

/// Everything needed to re-check one loop bound.
#[derive(Clone, Debug)]
pub struct LoopBoundDerivation {
    pub label: String,
    pub mode: CostMode,
    pub continuation: CostExpr,
    pub strategy: LoopStrategy,
    pub degree: u32,
    pub norms: Vec<Norm>,
    /// Body cost `g` (decomposition only).
    pub body_cost: Option<CostExpr>,
    /// Expected norms after one iteration (decomposition only).
    pub expected_norms: Vec<CostExpr>,
    pub template: CostExpr,
    pub coefficients: Vec<Sym>,
    pub assignment: BTreeMap<Sym, Rat>,
    pub shape: Option<NormShape>,
    pub concavity: Option<ConcavityVerdict>,
    pub constraints: Vec<Constraint>,
    pub bound: CostExpr,
    /// False when case splitting strengthened some constraint.
    pub exact: bool,
}

impl LoopBoundDerivation {
    pub fn instantiated_constraints(&self) -> Vec<Constraint> {
        self.constraints.iter().map(|c| c.instantiate(&self.assignment)).collect()
    }

    /// Re-checks every constraint under the assignment with the solver and by
    /// sampling.
    pub fn replay(&self, samples: usize, seed: u64) -> Result<(), AnalysisError> {
        let label = self.label.clone();
        for c in self.instantiated_constraints() {
            synthesize(std::slice::from_ref(&c), &[]).map_err(|error| AnalysisError::Solver { label: label.clone(), error })?;
            if let Refutation::Counterexample(witness) = numeric_refute(&c, &BTreeMap::new(), samples, seed)? {
                return Err(AnalysisError::ReplayFailed { label, constraint: c.to_string(), witness });
            }
        }
        Ok(())
    }
}

impl fmt::Display for LoopBoundDerivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "loop {} ({}, f = {}): {} deg {}", self.label, self.mode, self.continuation, self.strategy, self.degree)?;
        if !self.norms.is_empty() {
            let norms: Vec<String> = self.norms.iter().map(Norm::to_string).collect();
            writeln!(f, "  norms: {}", norms.join(", "))?;
        }
        if let Some(g) = &self.body_cost {
            writeln!(f, "  g = {g}")?;
        }
        for (n, h) in self.norms.iter().zip(&self.expected_norms) {
            writeln!(f, "  h[{n}] = {h}")?;
        }
        writeln!(f, "  template: {}", self.template)?;
        for c in &self.constraints {
            writeln!(f, "  constraint: {c}")?;
        }
        let values: Vec<String> =
            self.assignment.iter().map(|(s, v)| format!("{s} = {}", crate::rational::fmt_rat(v))).collect();
        if !values.is_empty() {
            writeln!(f, "  solution: {}", values.join(", "))?;
        }
        write!(f, "  bound: {}{}", self.bound, if self.exact { "" } else { " (strengthened)" })
    }
}

/// Result of checking a candidate upper invariant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InvariantVerdict {
    Certified,
    Refuted(Store),
    Unknown(String),
}

/// Labels `L0, L1, ...` in pre-order; structurally equal loops share one.
pub fn loop_labels(prog: &Command) -> Vec<(String, Command)> {
    let mut out: Vec<(String, Command)> = Vec::new();
    for lp in prog.loops() {
        if !out.iter().any(|(_, c)| c == lp) {
            out.push((format!("L{}", out.len()), lp.clone()));
        }
    }
    out
}

fn loop_parts(lp: &Command) -> (&BExp, &BExp, &Command) {
    match lp {
        Command::While { inv, guard, body } => (inv, guard, body),
        _ => panic!("not a loop: {lp}"),
    }
}

fn with_f_norms(lp: &Command, f: &CostExpr) -> Vec<Norm> {
    let mut norms = select_norms(lp);
    for n in cost_norms(f) {
        if !norms.contains(&n) {
            norms.push(n);
        }
    }
    norms
}

/// Symbolic transformer with loop bounds inferred by trying the policy's
/// attempts in order. Every successful loop bound is kept as a derivation.
pub struct Analyzer {
    policy: LoopPolicy,
    labels: HashMap<Command, String>,
    cache: HashMap<(Command, CostMode, CostExpr), CostExpr>,
    derivations: Vec<LoopBoundDerivation>,
    failures: Vec<(String, String)>,
}

impl Analyzer {
    pub fn new(policy: LoopPolicy) -> Analyzer {
        Analyzer { policy, labels: HashMap::new(), cache: HashMap::new(), derivations: Vec::new(), failures: Vec::new() }
    }

    pub fn derivations(&self) -> &[LoopBoundDerivation] {
        &self.derivations
    }

    /// `(loop label, reason)` for every failed attempt, in order.
    pub fn failures(&self) -> &[(String, String)] {
        &self.failures
    }

    fn register(&mut self, prog: &Command) {
        for lp in prog.loops() {
            if !self.labels.contains_key(lp) {
                let label = format!("L{}", self.labels.len());
                self.labels.insert(lp.clone(), label);
            }
        }
    }

    pub fn label_of(&mut self, lp: &Command) -> String {
        self.register(lp);
        self.labels[lp].clone()
    }

    pub fn et(&mut self, mode: CostMode, cmd: &Command, f: &CostExpr) -> Result<CostExpr, AnalysisError> {
        self.register(cmd);
        et_with(mode, cmd, f, &mut |m, lp, f| self.bound_loop(m, lp, f))
    }

    /// Upper bound on `et[lp](f)`, trying each policy attempt in turn.
    pub fn bound_loop(&mut self, mode: CostMode, lp: &Command, f: &CostExpr) -> Result<CostExpr, AnalysisError> {
        let key = (lp.clone(), mode, f.clone());
        if let Some(b) = self.cache.get(&key) {
            return Ok(b.clone());
        }
        let label = self.label_of(lp);
        let mut attempts = Vec::new();
        for a in self.policy.attempts.clone() {
            match self.attempt(mode, lp, f, a.strategy, a.degree) {
                Ok(d) => {
                    let bound = d.bound.clone();
                    self.derivations.push(d);
                    self.cache.insert(key, bound.clone());
                    return Ok(bound);
                }
                Err(e) => {
                    self.failures.push((label.clone(), format!("{a}: {e}")));
                    attempts.push(format!("{a}: {e}"));
                }
            }
        }
        Err(AnalysisError::AllStrategiesFailed { label, attempts })
    }

    /// A single attempt; inner loops still use the full policy.
    pub fn attempt(
        &mut self,
        mode: CostMode,
        lp: &Command,
        f: &CostExpr,
        strategy: LoopStrategy,
        degree: u32,
    ) -> Result<LoopBoundDerivation, AnalysisError> {
        match strategy {
            LoopStrategy::Decompose => self.decompose(mode, lp, f, degree),
            LoopStrategy::Invariant => self.invariant(mode, lp, f, degree),
            LoopStrategy::Unroll(k) => self.unroll(mode, lp, f, k),
        }
    }

    fn solve(
        &self,
        label: &str,
        constraints: &[Constraint],
        template: &Template,
    ) -> Result<(BTreeMap<Sym, Rat>, bool), AnalysisError> {
        let cert = synthesize(constraints, template.coeffs())
            .map_err(|error| AnalysisError::Solver { label: label.to_string(), error })?;
        for c in constraints {
            let opts = RefuteOptions { samples: REPLAY_SAMPLES, ..RefuteOptions::default() };
            if let Refutation::Counterexample(witness) = numeric_refute_with(c, &cert.assignment, &opts)? {
                return Err(AnalysisError::ReplayFailed {
                    label: label.to_string(),
                    constraint: c.instantiate(&cert.assignment).to_string(),
                    witness,
                });
            }
        }
        Ok((cert.assignment, cert.exact))
    }

    fn decompose(&mut self, mode: CostMode, lp: &Command, f: &CostExpr, degree: u32) -> Result<LoopBoundDerivation, AnalysisError> {
        let label = self.label_of(lp);
        let (inv, guard, body) = loop_parts(lp);
        let norms = with_f_norms(lp, f);
        if norms.is_empty() {
            return Err(AnalysisError::NoNorms { label });
        }
        let template = Template::new(norms.clone(), degree, false, &format!("{label}_q"));
        let g = self.et(mode, body, &CostExpr::zero())?;
        let mut hs = Vec::with_capacity(norms.len());
        for n in &norms {
            hs.push(self.et(CostMode::Value, body, &n.cost())?);
        }
        let step = Constraint::new(
            BExp::and(inv.clone(), guard.clone()),
            simplify(&(g.clone() + template.apply(&hs))),
            template.expr(),
        );
        let exit = Constraint::new(BExp::and(inv.clone(), BExp::not(guard.clone())), f.clone(), template.expr());
        let constraints = vec![step, exit];
        let (assignment, exact) = self.solve(&label, &constraints, &template)?;
        let shape = template.instantiate(&assignment);
        let concavity = concavity_check(&shape, CONCAVITY_TRIALS);
        if body.is_probabilistic() && !shape.is_affine() {
            let detail = match &concavity {
                ConcavityVerdict::Fail(w) => w.to_string(),
                ConcavityVerdict::Pass => "joint concavity not established".to_string(),
            };
            return Err(AnalysisError::ConcavityViolation { label, shape: shape.to_string(), detail });
        }
        let bound = simplify(&template.expr().instantiate(&assignment));
        Ok(LoopBoundDerivation {
            label,
            mode,
            continuation: f.clone(),
            strategy: LoopStrategy::Decompose,
            degree,
            norms,
            body_cost: Some(g),
            expected_norms: hs,
            template: template.expr(),
            coefficients: template.coeffs().to_vec(),
            assignment,
            shape: Some(shape),
            concavity: Some(concavity),
            constraints,
            bound,
            exact,
        })
    }

    fn invariant(&mut self, mode: CostMode, lp: &Command, f: &CostExpr, degree: u32) -> Result<LoopBoundDerivation, AnalysisError> {
        let label = self.label_of(lp);
        let (inv, guard, body) = loop_parts(lp);
        if body.contains_loop() {
            return Err(AnalysisError::Unsupported {
                label,
                detail: "template invariants need a loop-free body".to_string(),
            });
        }
        let norms = with_f_norms(lp, f);
        let template = Template::new(norms.clone(), degree, true, &format!("{label}_i"));
        let body_et = self.et(mode, body, &template.expr())?;
        let constraints = vec![
            Constraint::new(BExp::and(inv.clone(), guard.clone()), body_et, template.expr()),
            Constraint::new(BExp::and(inv.clone(), BExp::not(guard.clone())), f.clone(), template.expr()),
        ];
        let (assignment, exact) = self.solve(&label, &constraints, &template)?;
        let bound = simplify(&template.expr().instantiate(&assignment));
        Ok(LoopBoundDerivation {
            label,
            mode,
            continuation: f.clone(),
            strategy: LoopStrategy::Invariant,
            degree,
            norms,
            body_cost: None,
            expected_norms: Vec::new(),
            template: template.expr(),
            coefficients: template.coeffs().to_vec(),
            shape: Some(template.instantiate(&assignment)),
            assignment,
            concavity: None,
            constraints,
            bound,
            exact,
        })
    }

    fn unroll(&mut self, mode: CostMode, lp: &Command, f: &CostExpr, k: usize) -> Result<LoopBoundDerivation, AnalysisError> {
        let label = self.label_of(lp);
        let (inv, guard, body) = loop_parts(lp);
        let yes = BExp::and(inv.clone(), guard.clone());
        let no = BExp::and(inv.clone(), BExp::not(guard.clone()));
        let mut candidate = CostExpr::zero();
        for _ in 0..k {
            let next = self.et(mode, body, &candidate)?;
            candidate = simplify(&(CostExpr::iverson(yes.clone(), next) + CostExpr::iverson(no.clone(), f.clone())));
            if candidate.size() > MAX_UNROLLED_SIZE {
                return Err(AnalysisError::Unsupported { label, detail: format!("unrolled candidate exceeds {MAX_UNROLLED_SIZE} nodes") });
            }
        }
        let (verdict, constraints) = self.check_invariant(mode, lp, f, &candidate)?;
        match verdict {
            InvariantVerdict::Certified => Ok(LoopBoundDerivation {
                label,
                mode,
                continuation: f.clone(),
                strategy: LoopStrategy::Unroll(k),
                degree: 0,
                norms: Vec::new(),
                body_cost: None,
                expected_norms: Vec::new(),
                template: candidate.clone(),
                coefficients: Vec::new(),
                assignment: BTreeMap::new(),
                shape: None,
                concavity: None,
                constraints,
                bound: candidate,
                exact: true,
            }),
            InvariantVerdict::Refuted(witness) => Err(AnalysisError::Refuted { label, witness }),
            InvariantVerdict::Unknown(detail) => Err(AnalysisError::Unsupported { label, detail }),
        }
    }

    /// Checks `[inv && guard]*et[body](I) + [inv && !guard]*f <= I`.
    pub fn check_invariant(
        &mut self,
        mode: CostMode,
        lp: &Command,
        f: &CostExpr,
        candidate: &CostExpr,
    ) -> Result<(InvariantVerdict, Vec<Constraint>), AnalysisError> {
        let (inv, guard, body) = loop_parts(lp);
        let body_et = match self.et(mode, body, candidate) {
            Ok(e) => e,
            Err(e) => return Ok((InvariantVerdict::Unknown(e.to_string()), Vec::new())),
        };
        let constraints = vec![
            Constraint::new(BExp::and(inv.clone(), guard.clone()), body_et, candidate.clone()),
            Constraint::new(BExp::and(inv.clone(), BExp::not(guard.clone())), f.clone(), candidate.clone()),
        ];
        let certified = constraints.iter().all(|c| synthesize(std::slice::from_ref(c), &[]).is_ok());
        if certified {
            return Ok((InvariantVerdict::Certified, constraints));
        }
        for c in &constraints {
            if let Refutation::Counterexample(s) = numeric_refute(c, &BTreeMap::new(), 2_000, 0)? {
                let verdict = if body.contains_loop() {
                    InvariantVerdict::Unknown(format!("violated at {s} relative to inner-loop bounds"))
                } else {
                    InvariantVerdict::Refuted(s)
                };
                return Ok((verdict, constraints));
            }
        }
        Ok((InvariantVerdict::Unknown("no certificate and no counterexample".to_string()), constraints))
    }
}

/// Bound for a single loop using exactly `strategy` at `degree`; nested
/// loops use the default attempts up to `degree`.
pub fn analyze_loop(
    mode: CostMode,
    lp: &Command,
    f: &CostExpr,
    strategy: LoopStrategy,
    degree: u32,
) -> Result<(CostExpr, Vec<LoopBoundDerivation>), AnalysisError> {
    if !matches!(lp, Command::While { .. }) {
        return Err(AnalysisError::Unsupported { label: "-".to_string(), detail: format!("not a loop: {lp}") });
    }
    let mut policy = LoopPolicy::new(&[LoopStrategy::Decompose, LoopStrategy::Invariant], degree);
    policy.attempts.push(Attempt { strategy: LoopStrategy::Unroll(8), degree: 0 });
    let mut a = Analyzer::new(policy);
    a.register(lp);
    let d = a.attempt(mode, lp, f, strategy, degree)?;
    let bound = d.bound.clone();
    let mut all = a.derivations;
    all.push(d);
    Ok((bound, all))
}

/// Whether `candidate` is an upper invariant of `lp` for continuation `f`.
pub fn check_upper_invariant(mode: CostMode, lp: &Command, f: &CostExpr, candidate: &CostExpr) -> InvariantVerdict {
    if !matches!(lp, Command::While { .. }) {
        return InvariantVerdict::Unknown(format!("not a loop: {lp}"));
    }
    let mut a = Analyzer::new(LoopPolicy::default());
    match a.check_invariant(mode, lp, f, candidate) {
        Ok((v, _)) => v,
        Err(e) => InvariantVerdict::Unknown(e.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int_rat, rat};
    use crate::syntax::{eval_closed, parse_cost_expr, parse_program};

    fn cost(src: &str) -> (CostExpr, Vec<LoopBoundDerivation>) {
        let mut a = Analyzer::new(LoopPolicy::default());
        let e = a.et(CostMode::Cost, &parse_program(src).unwrap(), &CostExpr::zero()).unwrap();
        (e, a.derivations().to_vec())
    }

    #[test]
    fn countdown() {
        let (b, ds) = cost("while [x >= 0] (x > 0) { tick(1); x := x - 1 }");
        assert_eq!(b.to_string(), "nat(x)");
        assert_eq!(ds.len(), 1);
        assert_eq!(ds[0].strategy, LoopStrategy::Decompose);
        ds[0].replay(500, 1).unwrap();
    }

    #[test]
    fn geometric() {
        let (b, ds) = cost("while [true] (x = 1) { {x := 0}[1/2]{skip}; tick(1) }");
        assert_eq!(eval_closed(&b, &Store::from_pairs([("x", 1)])), int_rat(2));
        assert!(ds[0].shape.as_ref().unwrap().is_affine());
    }

    #[test]
    fn walk() {
        let fair = parse_program("while [x >= 0] (x > 0) { x := {1/2: x - 1, 1/2: x + 1}; tick(1) }").unwrap();
        assert!(Analyzer::new(LoopPolicy::default()).et(CostMode::Cost, &fair, &CostExpr::zero()).is_err());
        let (b, _) = cost("while [x >= 0] (x > 0) { x := {3/4: x - 1, 1/4: x + 1}; tick(1) }");
        assert_eq!(b.to_string(), "2 * nat(x)");
    }

    #[test]
    fn nested_quadratic() {
        let src = "while [x >= 0] (x > 0) { y := x; while [y >= 0] (y > 0) { tick(1); y := y - 1 }; x := x - 1 }";
        let (b, ds) = cost(src);
        for n in 0..8i64 {
            let v = eval_closed(&b, &Store::from_pairs([("x", n)]));
            assert!(v >= rat(n * (n + 1), 2), "bound {b} at {n}");
        }
        let outer = ds.iter().find(|d| d.label == "L0").unwrap();
        assert_eq!(outer.degree, 2);
        for c in &outer.constraints {
            assert!(c.coeffs().iter().all(|s| s.name().starts_with("L0_")));
        }
    }

    #[test]
    fn value_mode() {
        let prog = parse_program("while [true] (x > 0) { x := x - 1 }").unwrap();
        let f = parse_cost_expr("nat(y)").unwrap();
        let mut a = Analyzer::new(LoopPolicy::default());
        let b = a.et(CostMode::Value, &prog, &f).unwrap();
        assert_eq!(eval_closed(&b, &Store::from_pairs([("x", 3), ("y", 2)])), int_rat(2));
    }

    #[test]
    fn invariant_checks() {
        let lp = parse_program("while [x >= 0] (x > 0) { tick(1); x := x - 1 }").unwrap();
        let zero = CostExpr::zero();
        let v = check_upper_invariant(CostMode::Cost, &lp, &zero, &parse_cost_expr("nat(x)").unwrap());
        assert_eq!(v, InvariantVerdict::Certified);
        let v = check_upper_invariant(CostMode::Cost, &lp, &zero, &parse_cost_expr("1/2*nat(x)").unwrap());
        assert_eq!(v, InvariantVerdict::Refuted(Store::from_pairs([("x", 1)])));
        let v = check_upper_invariant(CostMode::Cost, &lp, &zero, &zero);
        assert!(matches!(v, InvariantVerdict::Refuted(_)));
    }

    #[test]
    fn unrolling_certifies_bounded_loops() {
        let lp = parse_program("while [true] (x = 1) { x := 0; tick(3) }").unwrap();
        let (b, _) = analyze_loop(CostMode::Cost, &lp, &CostExpr::zero(), LoopStrategy::Unroll(2), 0).unwrap();
        assert_eq!(eval_closed(&b, &Store::from_pairs([("x", 1)])), int_rat(3));
    }

    #[test]
    fn nonlinear_guard_fails() {
        let prog = parse_program("while [true] (x * x > 0) { tick(1); x := x - 1 }").unwrap();
        let mut a = Analyzer::new(LoopPolicy::default());
        let e = a.et(CostMode::Cost, &prog, &CostExpr::zero()).unwrap_err();
        assert!(matches!(e, AnalysisError::AllStrategiesFailed { .. }));
    }
}
