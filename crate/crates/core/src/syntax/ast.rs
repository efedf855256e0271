use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::rational::{fmt_rat, Int, Rat};

/// A program variable. Always a valid identifier.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Var(String);

impl Var {
    pub fn new(name: impl Into<String>) -> Var {
        let name = name.into();
        assert!(is_identifier(&name), "invalid variable name {name:?}");
        Var(name)
    }

    pub fn try_new(name: impl Into<String>) -> Option<Var> {
        let name = name.into();
        is_identifier(&name).then_some(Var(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Var {
    fn from(s: &str) -> Var {
        Var::new(s)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// An undetermined template coefficient, written `?name` in cost expressions.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Sym(String);

impl Sym {
    pub fn new(name: impl Into<String>) -> Sym {
        let name = name.into();
        assert!(is_identifier(&name), "invalid coefficient name {name:?}");
        Sym(name)
    }

    pub fn indexed(prefix: &str, i: usize) -> Sym {
        Sym(format!("{prefix}{i}"))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "?{}", self.0)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum IntExpr {
    Var(Var),
    Const(Int),
    Add(Box<IntExpr>, Box<IntExpr>),
    Sub(Box<IntExpr>, Box<IntExpr>),
    Mul(Box<IntExpr>, Box<IntExpr>),
}

impl IntExpr {
    pub fn var(name: &str) -> IntExpr {
        IntExpr::Var(Var::new(name))
    }

    pub fn int(v: i64) -> IntExpr {
        IntExpr::Const(Int::from(v))
    }

    pub fn as_const(&self) -> Option<&Int> {
        match self {
            IntExpr::Const(c) => Some(c),
            _ => None,
        }
    }

    /// Replaces every occurrence of `x` by `a`.
    pub fn subst(&self, x: &Var, a: &IntExpr) -> IntExpr {
        match self {
            IntExpr::Var(v) if v == x => a.clone(),
            IntExpr::Var(_) | IntExpr::Const(_) => self.clone(),
            IntExpr::Add(l, r) => IntExpr::Add(Box::new(l.subst(x, a)), Box::new(r.subst(x, a))),
            IntExpr::Sub(l, r) => IntExpr::Sub(Box::new(l.subst(x, a)), Box::new(r.subst(x, a))),
            IntExpr::Mul(l, r) => IntExpr::Mul(Box::new(l.subst(x, a)), Box::new(r.subst(x, a))),
        }
    }

    /// Cheap local cleanup: constant folding and `+0`, `-0`, `*1`, `*0` units.
    pub fn fold(&self) -> IntExpr {
        match self {
            IntExpr::Var(_) | IntExpr::Const(_) => self.clone(),
            IntExpr::Add(l, r) => match (l.fold(), r.fold()) {
                (IntExpr::Const(a), IntExpr::Const(b)) => IntExpr::Const(a + b),
                (e, IntExpr::Const(c)) | (IntExpr::Const(c), e) if c.is_zero() => e,
                (e, IntExpr::Const(c)) if c.is_negative() => {
                    IntExpr::Sub(Box::new(e), Box::new(IntExpr::Const(-c)))
                }
                (l, r) => IntExpr::Add(Box::new(l), Box::new(r)),
            },
            IntExpr::Sub(l, r) => match (l.fold(), r.fold()) {
                (IntExpr::Const(a), IntExpr::Const(b)) => IntExpr::Const(a - b),
                (e, IntExpr::Const(c)) if c.is_zero() => e,
                (e, IntExpr::Const(c)) if c.is_negative() => {
                    IntExpr::Add(Box::new(e), Box::new(IntExpr::Const(-c)))
                }
                (l, r) if l == r => IntExpr::int(0),
                (l, r) => IntExpr::Sub(Box::new(l), Box::new(r)),
            },
            IntExpr::Mul(l, r) => match (l.fold(), r.fold()) {
                (IntExpr::Const(a), IntExpr::Const(b)) => IntExpr::Const(a * b),
                (_, IntExpr::Const(c)) | (IntExpr::Const(c), _) if c.is_zero() => IntExpr::int(0),
                (e, IntExpr::Const(c)) | (IntExpr::Const(c), e) if c.is_one() => e,
                (l, r) => IntExpr::Mul(Box::new(l), Box::new(r)),
            },
        }
    }
}

impl ops::Add for IntExpr {
    type Output = IntExpr;
    fn add(self, rhs: IntExpr) -> IntExpr {
        IntExpr::Add(Box::new(self), Box::new(rhs))
    }
}

impl ops::Sub for IntExpr {
    type Output = IntExpr;
    fn sub(self, rhs: IntExpr) -> IntExpr {
        IntExpr::Sub(Box::new(self), Box::new(rhs))
    }
}

impl ops::Mul for IntExpr {
    type Output = IntExpr;
    fn mul(self, rhs: IntExpr) -> IntExpr {
        IntExpr::Mul(Box::new(self), Box::new(rhs))
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum CmpOp {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
    Ne,
}

impl CmpOp {
    pub fn holds(self, a: &Int, b: &Int) -> bool {
        match self {
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Eq => a == b,
            CmpOp::Ge => a >= b,
            CmpOp::Gt => a > b,
            CmpOp::Ne => a != b,
        }
    }

    pub fn negate(self) -> CmpOp {
        match self {
            CmpOp::Lt => CmpOp::Ge,
            CmpOp::Le => CmpOp::Gt,
            CmpOp::Eq => CmpOp::Ne,
            CmpOp::Ge => CmpOp::Lt,
            CmpOp::Gt => CmpOp::Le,
            CmpOp::Ne => CmpOp::Eq,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Eq => "=",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
            CmpOp::Ne => "!=",
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum BExp {
    True,
    False,
    Cmp(CmpOp, IntExpr, IntExpr),
    And(Box<BExp>, Box<BExp>),
    Or(Box<BExp>, Box<BExp>),
    Not(Box<BExp>),
}

impl BExp {
    pub fn cmp(op: CmpOp, a: IntExpr, b: IntExpr) -> BExp {
        BExp::Cmp(op, a, b)
    }

    /// Conjunction with literal short-circuiting.
    pub fn and(a: BExp, b: BExp) -> BExp {
        match (a, b) {
            (BExp::True, e) | (e, BExp::True) => e,
            (BExp::False, _) | (_, BExp::False) => BExp::False,
            (a, b) => BExp::And(Box::new(a), Box::new(b)),
        }
    }

    pub fn or(a: BExp, b: BExp) -> BExp {
        match (a, b) {
            (BExp::False, e) | (e, BExp::False) => e,
            (BExp::True, _) | (_, BExp::True) => BExp::True,
            (a, b) => BExp::Or(Box::new(a), Box::new(b)),
        }
    }

    pub fn not(a: BExp) -> BExp {
        match a {
            BExp::True => BExp::False,
            BExp::False => BExp::True,
            BExp::Not(e) => *e,
            e => BExp::Not(Box::new(e)),
        }
    }

    pub fn subst(&self, x: &Var, a: &IntExpr) -> BExp {
        match self {
            BExp::True | BExp::False => self.clone(),
            BExp::Cmp(op, l, r) => BExp::Cmp(*op, l.subst(x, a), r.subst(x, a)),
            BExp::And(l, r) => BExp::And(Box::new(l.subst(x, a)), Box::new(r.subst(x, a))),
            BExp::Or(l, r) => BExp::Or(Box::new(l.subst(x, a)), Box::new(r.subst(x, a))),
            BExp::Not(e) => BExp::Not(Box::new(e.subst(x, a))),
        }
    }

    /// Comparisons in left-to-right order, descending through connectives.
    pub fn atoms(&self) -> Vec<(CmpOp, &IntExpr, &IntExpr)> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<(CmpOp, &'a IntExpr, &'a IntExpr)>) {
        match self {
            BExp::True | BExp::False => {}
            BExp::Cmp(op, l, r) => out.push((*op, l, r)),
            BExp::And(l, r) | BExp::Or(l, r) => {
                l.collect_atoms(out);
                r.collect_atoms(out);
            }
            BExp::Not(e) => e.collect_atoms(out),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DistError {
    #[error("distribution has no branches")]
    Empty,
    #[error("branch probability {0} is outside (0,1]")]
    BadProbability(String),
    #[error("probabilities sum to {0}, expected 1")]
    BadTotal(String),
}

/// A finite distribution over integer expressions.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct DistExpr {
    branches: Vec<(Rat, IntExpr)>,
}

impl DistExpr {
    pub fn new(branches: Vec<(Rat, IntExpr)>) -> Result<DistExpr, DistError> {
        if branches.is_empty() {
            return Err(DistError::Empty);
        }
        let mut total = Rat::zero();
        for (p, _) in &branches {
            if !p.is_positive() || *p > Rat::one() {
                return Err(DistError::BadProbability(fmt_rat(p)));
            }
            total += p;
        }
        if !total.is_one() {
            return Err(DistError::BadTotal(fmt_rat(&total)));
        }
        Ok(DistExpr { branches })
    }

    /// The Dirac distribution `{1: e}`, i.e. a deterministic assignment.
    pub fn point(e: IntExpr) -> DistExpr {
        DistExpr { branches: vec![(Rat::one(), e)] }
    }

    pub fn branches(&self) -> &[(Rat, IntExpr)] {
        &self.branches
    }

    pub fn is_point(&self) -> bool {
        self.branches.len() == 1
    }
}

/// pWhile commands. Children are shared so configurations can be cloned
/// cheaply during exploration.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Command {
    Skip,
    Abort,
    Tick(Rat),
    Assign(Var, DistExpr),
    If { inv: BExp, guard: BExp, then: Arc<Command>, els: Arc<Command> },
    While { inv: BExp, guard: BExp, body: Arc<Command> },
    NdChoice(Arc<Command>, Arc<Command>),
    PChoice(Rat, Arc<Command>, Arc<Command>),
    Seq(Arc<Command>, Arc<Command>),
}

impl Command {
    pub fn tick(r: Rat) -> Command {
        assert!(!r.is_negative(), "tick rate must be nonnegative");
        Command::Tick(r)
    }

    pub fn assign(x: &str, e: IntExpr) -> Command {
        Command::Assign(Var::new(x), DistExpr::point(e))
    }

    pub fn seq(a: Command, b: Command) -> Command {
        Command::Seq(Arc::new(a), Arc::new(b))
    }

    /// Right-nested sequence of the given commands.
    pub fn seq_all(cmds: impl IntoIterator<Item = Command>) -> Command {
        let mut cmds: Vec<Command> = cmds.into_iter().collect();
        let mut acc = cmds.pop().unwrap_or(Command::Skip);
        while let Some(c) = cmds.pop() {
            acc = Command::seq(c, acc);
        }
        acc
    }

    pub fn while_loop(inv: BExp, guard: BExp, body: Command) -> Command {
        Command::While { inv, guard, body: Arc::new(body) }
    }

    pub fn if_then_else(inv: BExp, guard: BExp, then: Command, els: Command) -> Command {
        Command::If { inv, guard, then: Arc::new(then), els: Arc::new(els) }
    }

    pub fn pchoice(p: Rat, a: Command, b: Command) -> Command {
        assert!(crate::rational::is_unit_interval(&p), "choice probability outside [0,1]");
        Command::PChoice(p, Arc::new(a), Arc::new(b))
    }

    pub fn ndchoice(a: Command, b: Command) -> Command {
        Command::NdChoice(Arc::new(a), Arc::new(b))
    }

    pub fn contains_loop(&self) -> bool {
        self.any(&|c| matches!(c, Command::While { .. }))
    }

    pub fn contains_tick(&self) -> bool {
        self.any(&|c| matches!(c, Command::Tick(r) if !r.is_zero()))
    }

    /// True if some reduction of this command branches probabilistically.
    pub fn is_probabilistic(&self) -> bool {
        self.any(&|c| match c {
            Command::PChoice(p, _, _) => !p.is_zero() && !p.is_one(),
            Command::Assign(_, d) => !d.is_point(),
            _ => false,
        })
    }

    pub fn any(&self, pred: &dyn Fn(&Command) -> bool) -> bool {
        if pred(self) {
            return true;
        }
        match self {
            Command::Skip | Command::Abort | Command::Tick(_) | Command::Assign(..) => false,
            Command::If { then, els, .. } => then.any(pred) || els.any(pred),
            Command::While { body, .. } => body.any(pred),
            Command::NdChoice(a, b) | Command::PChoice(_, a, b) | Command::Seq(a, b) => {
                a.any(pred) || b.any(pred)
            }
        }
    }

    /// Loops in pre-order.
    pub fn loops(&self) -> Vec<&Command> {
        let mut out = Vec::new();
        self.collect_loops(&mut out);
        out
    }

    fn collect_loops<'a>(&'a self, out: &mut Vec<&'a Command>) {
        match self {
            Command::Skip | Command::Abort | Command::Tick(_) | Command::Assign(..) => {}
            Command::If { then, els, .. } => {
                then.collect_loops(out);
                els.collect_loops(out);
            }
            Command::While { body, .. } => {
                out.push(self);
                body.collect_loops(out);
            }
            Command::NdChoice(a, b) | Command::PChoice(_, a, b) | Command::Seq(a, b) => {
                a.collect_loops(out);
                b.collect_loops(out);
            }
        }
    }

    /// The first command to execute when `self` runs.
    pub fn head(&self) -> &Command {
        match self {
            Command::Seq(a, _) => a.head(),
            c => c,
        }
    }
}

/// Cost expressions: nonnegative symbolic expectations.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum CostExpr {
    Const(Rat),
    Nat(IntExpr),
    Iverson(BExp, Box<CostExpr>),
    Add(Box<CostExpr>, Box<CostExpr>),
    Mul(Box<CostExpr>, Box<CostExpr>),
    Max(Box<CostExpr>, Box<CostExpr>),
    Coeff(Sym),
}

impl CostExpr {
    pub fn zero() -> CostExpr {
        CostExpr::Const(Rat::zero())
    }

    pub fn one() -> CostExpr {
        CostExpr::Const(Rat::one())
    }

    pub fn constant(r: Rat) -> CostExpr {
        assert!(!r.is_negative(), "cost constants are nonnegative");
        CostExpr::Const(r)
    }

    pub fn nat(a: IntExpr) -> CostExpr {
        CostExpr::Nat(a)
    }

    pub fn iverson(phi: BExp, c: CostExpr) -> CostExpr {
        CostExpr::Iverson(phi, Box::new(c))
    }

    pub fn max(a: CostExpr, b: CostExpr) -> CostExpr {
        CostExpr::Max(Box::new(a), Box::new(b))
    }

    pub fn coeff(s: Sym) -> CostExpr {
        CostExpr::Coeff(s)
    }

    pub fn scale(r: Rat, c: CostExpr) -> CostExpr {
        CostExpr::Const(r) * c
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, CostExpr::Const(r) if r.is_zero())
    }

    pub fn as_const(&self) -> Option<&Rat> {
        match self {
            CostExpr::Const(r) => Some(r),
            _ => None,
        }
    }

    /// Coefficient symbols occurring in the expression.
    pub fn coeffs(&self) -> BTreeSet<Sym> {
        let mut out = BTreeSet::new();
        self.collect_coeffs(&mut out);
        out
    }

    fn collect_coeffs(&self, out: &mut BTreeSet<Sym>) {
        match self {
            CostExpr::Const(_) | CostExpr::Nat(_) => {}
            CostExpr::Coeff(s) => {
                out.insert(s.clone());
            }
            CostExpr::Iverson(_, c) => c.collect_coeffs(out),
            CostExpr::Add(a, b) | CostExpr::Mul(a, b) | CostExpr::Max(a, b) => {
                a.collect_coeffs(out);
                b.collect_coeffs(out);
            }
        }
    }

    pub fn is_coefficient_free(&self) -> bool {
        self.coeffs().is_empty()
    }

    /// Replaces coefficient symbols by the given constants; unbound symbols stay.
    pub fn instantiate(&self, assignment: &BTreeMap<Sym, Rat>) -> CostExpr {
        match self {
            CostExpr::Const(_) | CostExpr::Nat(_) => self.clone(),
            CostExpr::Coeff(s) => match assignment.get(s) {
                Some(v) => CostExpr::Const(v.clone()),
                None => self.clone(),
            },
            CostExpr::Iverson(phi, c) => CostExpr::iverson(phi.clone(), c.instantiate(assignment)),
            CostExpr::Add(a, b) => a.instantiate(assignment) + b.instantiate(assignment),
            CostExpr::Mul(a, b) => a.instantiate(assignment) * b.instantiate(assignment),
            CostExpr::Max(a, b) => CostExpr::max(a.instantiate(assignment), b.instantiate(assignment)),
        }
    }

    /// Number of nodes; used to keep generated expressions in check.
    pub fn size(&self) -> usize {
        match self {
            CostExpr::Const(_) | CostExpr::Nat(_) | CostExpr::Coeff(_) => 1,
            CostExpr::Iverson(_, c) => 1 + c.size(),
            CostExpr::Add(a, b) | CostExpr::Mul(a, b) | CostExpr::Max(a, b) => 1 + a.size() + b.size(),
        }
    }
}

impl ops::Add for CostExpr {
    type Output = CostExpr;
    fn add(self, rhs: CostExpr) -> CostExpr {
        CostExpr::Add(Box::new(self), Box::new(rhs))
    }
}

impl ops::Mul for CostExpr {
    type Output = CostExpr;
    fn mul(self, rhs: CostExpr) -> CostExpr {
        CostExpr::Mul(Box::new(self), Box::new(rhs))
    }
}

/// Integer stores. Unbound variables read as 0, and zero bindings are never
/// stored, so structural equality is equality of the total functions.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default, PartialOrd, Ord)]
pub struct Store {
    bindings: BTreeMap<Var, Int>,
}

impl Store {
    pub fn new() -> Store {
        Store::default()
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, i64)>) -> Store {
        let mut s = Store::new();
        for (k, v) in pairs {
            s.set(Var::new(k), Int::from(v));
        }
        s
    }

    pub fn get(&self, x: &Var) -> Int {
        self.bindings.get(x).cloned().unwrap_or_else(Int::zero)
    }

    pub fn set(&mut self, x: Var, v: Int) {
        if v.is_zero() {
            self.bindings.remove(&x);
        } else {
            self.bindings.insert(x, v);
        }
    }

    pub fn with(&self, x: &Var, v: Int) -> Store {
        let mut s = self.clone();
        s.set(x.clone(), v);
        s
    }

    /// Nonzero bindings in variable order.
    pub fn bindings(&self) -> impl Iterator<Item = (&Var, &Int)> {
        self.bindings.iter()
    }

    /// Renders the store over `vars`, showing zeros explicitly.
    pub fn render_over(&self, vars: &BTreeSet<Var>) -> String {
        let mut all: BTreeSet<&Var> = vars.iter().collect();
        all.extend(self.bindings.keys());
        let parts: Vec<String> = all.iter().map(|v| format!("{v}: {}", self.get(v))).collect();
        format!("{{{}}}", parts.join(", "))
    }
}

impl fmt::Display for Store {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render_over(&BTreeSet::new()))
    }
}

/// Syntactic variable collection.
pub trait FreeVars {
    fn collect_vars(&self, out: &mut BTreeSet<Var>);

    fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }
}

impl FreeVars for IntExpr {
    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            IntExpr::Var(v) => {
                out.insert(v.clone());
            }
            IntExpr::Const(_) => {}
            IntExpr::Add(a, b) | IntExpr::Sub(a, b) | IntExpr::Mul(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }
}

impl FreeVars for BExp {
    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        for (_, a, b) in self.atoms() {
            a.collect_vars(out);
            b.collect_vars(out);
        }
    }
}

impl FreeVars for DistExpr {
    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        for (_, e) in &self.branches {
            e.collect_vars(out);
        }
    }
}

impl FreeVars for CostExpr {
    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            CostExpr::Const(_) | CostExpr::Coeff(_) => {}
            CostExpr::Nat(a) => a.collect_vars(out),
            CostExpr::Iverson(phi, c) => {
                phi.collect_vars(out);
                c.collect_vars(out);
            }
            CostExpr::Add(a, b) | CostExpr::Mul(a, b) | CostExpr::Max(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }
}

impl FreeVars for Command {
    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Command::Skip | Command::Abort | Command::Tick(_) => {}
            Command::Assign(x, d) => {
                out.insert(x.clone());
                d.collect_vars(out);
            }
            Command::If { inv, guard, then, els } => {
                inv.collect_vars(out);
                guard.collect_vars(out);
                then.collect_vars(out);
                els.collect_vars(out);
            }
            Command::While { inv, guard, body } => {
                inv.collect_vars(out);
                guard.collect_vars(out);
                body.collect_vars(out);
            }
            Command::NdChoice(a, b) | Command::PChoice(_, a, b) | Command::Seq(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn names(s: BTreeSet<Var>) -> Vec<String> {
        s.into_iter().map(|v| v.name().to_string()).collect()
    }

    #[test]
    fn free_vars_of_examples() {
        assert!(Command::tick(rat(1, 1)).free_vars().is_empty());
        let assign = Command::assign("x", IntExpr::var("y") + IntExpr::int(1));
        assert_eq!(names(assign.free_vars()), ["x", "y"]);
        let norm = CostExpr::nat(IntExpr::var("x") - IntExpr::var("y"));
        assert_eq!(names(norm.free_vars()), ["x", "y"]);
    }

    #[test]
    fn dist_validation() {
        let bad = DistExpr::new(vec![(rat(1, 2), IntExpr::int(0)), (rat(1, 3), IntExpr::int(1))]);
        assert_eq!(bad, Err(DistError::BadTotal("5/6".into())));
        assert!(DistExpr::new(vec![]).is_err());
        assert!(DistExpr::new(vec![(rat(0, 1), IntExpr::int(0)), (rat(1, 1), IntExpr::int(1))]).is_err());
    }

    #[test]
    fn store_zero_is_unbound() {
        let a = Store::from_pairs([("x", 0), ("y", 2)]);
        let b = Store::from_pairs([("y", 2)]);
        assert_eq!(a, b);
        assert_eq!(a.get(&Var::new("x")), Int::zero());
    }

    #[test]
    fn fold_units() {
        let e = (IntExpr::var("x") - IntExpr::int(0)) + IntExpr::int(1);
        assert_eq!(e.fold(), IntExpr::var("x") + IntExpr::int(1));
        let e = IntExpr::var("x") + IntExpr::int(-2);
        assert_eq!(e.fold(), IntExpr::var("x") - IntExpr::int(2));
    }

    #[test]
    fn identifiers() {
        assert!(Var::try_new("x_1").is_some());
        assert!(Var::try_new("1x").is_none());
        assert!(Var::try_new("").is_none());
    }
}
