//! Reduction of cost-expression constraints with template coefficients to
//! linear programs, and their exact solution.

mod eliminate;
mod farkas;
mod linear;
mod poly;
mod refute;
mod simplex;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::rational::Rat;
use crate::syntax::{eval_bexp, eval_cost, BExp, CostExpr, EvalError, FreeVars, Store, Sym, Var};

pub use eliminate::{eliminate_cases, PolyInequality};
pub use farkas::farkas_reduce;
pub use linear::{bexp_dnf, comparison_dnf, LinAtom, LinExpr, NonlinearAtom};
pub use poly::{Affine, LpVar, Monomial, Poly};
pub use refute::{boundary_stores, numeric_refute, numeric_refute_with, RefuteOptions, Refutation};
pub use simplex::{solve_linear, LinearConstraint, LinearSolution, LinearSystem, LpError, Relation};

/// `premise ⊨ lhs <= rhs`: holds iff the inequality holds at every store
/// satisfying the premise.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Constraint {
    pub premise: BExp,
    pub lhs: CostExpr,
    pub rhs: CostExpr,
}

impl Constraint {
    pub fn new(premise: BExp, lhs: CostExpr, rhs: CostExpr) -> Constraint {
        Constraint { premise, lhs, rhs }
    }

    pub fn coeffs(&self) -> BTreeSet<Sym> {
        let mut out = self.lhs.coeffs();
        out.extend(self.rhs.coeffs());
        out
    }

    pub fn holds_at(&self, store: &Store, assignment: &BTreeMap<Sym, Rat>) -> Result<bool, EvalError> {
        if !eval_bexp(&self.premise, store) {
            return Ok(true);
        }
        Ok(eval_cost(&self.lhs, store, assignment)? <= eval_cost(&self.rhs, store, assignment)?)
    }

    pub fn instantiate(&self, assignment: &BTreeMap<Sym, Rat>) -> Constraint {
        Constraint {
            premise: self.premise.clone(),
            lhs: self.lhs.instantiate(assignment),
            rhs: self.rhs.instantiate(assignment),
        }
    }
}

impl FreeVars for Constraint {
    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        self.premise.collect_vars(out);
        self.lhs.collect_vars(out);
        self.rhs.collect_vars(out);
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} |= {} <= {}", self.premise, self.lhs, self.rhs)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolverError {
    #[error("unsupported constraint: {0}")]
    Unsupported(String),
    #[error("case analysis exceeded {0} cases")]
    TooManyCases(usize),
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// Outcome of coefficient synthesis for a set of constraints.
#[derive(Clone, Debug)]
pub struct Certificate {
    pub assignment: BTreeMap<Sym, Rat>,
    /// False when some case reduction strengthened a constraint.
    pub exact: bool,
    pub inequalities: usize,
    pub system: LinearSystem,
}

/// Builds one linear system from all constraints and minimizes the sum of
/// template coefficients, breaking ties by maximizing `tie_break` in order.
/// Every coefficient of the constraints is bound in the result.
pub fn synthesize(constraints: &[Constraint], tie_break: &[Sym]) -> Result<Certificate, SolverError> {
    let mut sys = LinearSystem::new();
    let mut aux = 0;
    let mut exact = true;
    let mut inequalities = 0;
    for c in constraints {
        for p in eliminate_cases(c)? {
            exact &= p.exact;
            inequalities += 1;
            for lc in farkas_reduce(&p, &mut aux)? {
                sys.push(lc);
            }
        }
    }
    let mut all: BTreeSet<Sym> = constraints.iter().flat_map(|c| c.coeffs()).collect();
    all.extend(tie_break.iter().cloned());
    let mut objective = Affine::default();
    for s in &all {
        objective.add_term(LpVar::Coeff(s.clone()), &Rat::from_integer(1.into()));
    }
    sys.objective = Some(objective);
    sys.tie_break = tie_break.to_vec();
    let sol = solve_linear(&sys)?;
    let mut assignment = sol.coefficients();
    for s in all {
        assignment.entry(s).or_insert_with(|| Rat::from_integer(0.into()));
    }
    Ok(Certificate { assignment, exact, inequalities, system: sys })
}
