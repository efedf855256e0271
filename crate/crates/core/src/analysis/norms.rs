use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::rational::{fmt_rat, Rat};
use crate::solver::LinExpr;
use crate::syntax::{BExp, CmpOp, Command, CostExpr, IntExpr, Sym};

/// `nat(expr)` used as an abstract view of stores.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Norm {
    pub expr: IntExpr,
}

impl Norm {
    /// Canonical linear form; `None` for constants and nonlinear expressions.
    pub fn canonical(e: &IntExpr) -> Option<Norm> {
        let lin = LinExpr::from_int_expr(e)?;
        if lin.is_constant() {
            return None;
        }
        Some(Norm { expr: lin.to_int_expr()? })
    }

    pub fn cost(&self) -> CostExpr {
        CostExpr::Nat(self.expr.clone())
    }
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "nat({})", self.expr)
    }
}

fn push_norm(out: &mut Vec<Norm>, e: IntExpr) {
    if let Some(n) = Norm::canonical(&e) {
        if !out.contains(&n) {
            out.push(n);
        }
    }
}

fn comparison_norms(op: CmpOp, a: &IntExpr, b: &IntExpr, out: &mut Vec<Norm>) {
    let diff = |x: &IntExpr, y: &IntExpr| x.clone() - y.clone();
    let plus_one = |e: IntExpr| e + IntExpr::int(1);
    match op {
        CmpOp::Gt => push_norm(out, diff(a, b)),
        CmpOp::Lt => push_norm(out, diff(b, a)),
        CmpOp::Ge => {
            push_norm(out, plus_one(diff(a, b)));
            push_norm(out, diff(a, b));
        }
        CmpOp::Le => {
            push_norm(out, plus_one(diff(b, a)));
            push_norm(out, diff(b, a));
        }
        CmpOp::Eq => {
            comparison_norms(CmpOp::Ge, a, b, out);
            comparison_norms(CmpOp::Le, a, b, out);
        }
        CmpOp::Ne => {
            push_norm(out, diff(a, b));
            push_norm(out, diff(b, a));
        }
    }
}

fn bexp_norms(b: &BExp, out: &mut Vec<Norm>) {
    for (op, l, r) in b.atoms() {
        comparison_norms(op, l, r, out);
    }
}

/// Candidate norms of a loop: its guard, its invariant, then the guards and
/// invariants of nested loops in pre-order. Constant and nonlinear
/// candidates are skipped.
pub fn select_norms(lp: &Command) -> Vec<Norm> {
    let mut out = Vec::new();
    if let Command::While { inv, guard, body } = lp {
        bexp_norms(guard, &mut out);
        bexp_norms(inv, &mut out);
        for inner in body.loops() {
            if let Command::While { inv, guard, .. } = inner {
                bexp_norms(guard, &mut out);
                bexp_norms(inv, &mut out);
            }
        }
    }
    out
}

/// Linear norms occurring in `c`, left to right.
pub fn cost_norms(c: &CostExpr) -> Vec<Norm> {
    fn walk(c: &CostExpr, out: &mut Vec<Norm>) {
        match c {
            CostExpr::Const(_) | CostExpr::Coeff(_) => {}
            CostExpr::Nat(a) => push_norm(out, a.clone()),
            CostExpr::Iverson(_, c) => walk(c, out),
            CostExpr::Add(a, b) | CostExpr::Mul(a, b) | CostExpr::Max(a, b) => {
                walk(a, out);
                walk(b, out);
            }
        }
    }
    let mut out = Vec::new();
    walk(c, &mut out);
    out
}

/// A polynomial `Σ c · Π n_i` in norm placeholders `n1..nk` with nonnegative
/// coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormShape {
    arity: usize,
    terms: Vec<(Rat, Vec<usize>)>,
}

impl NormShape {
    pub fn new(arity: usize, terms: Vec<(Rat, Vec<usize>)>) -> NormShape {
        assert!(terms.iter().all(|(_, m)| m.iter().all(|&i| i < arity)), "norm index out of range");
        NormShape { arity, terms: terms.into_iter().filter(|(c, _)| !c.is_zero()).collect() }
    }

    /// `Σ coeffs[i] · n_i + constant`.
    pub fn linear(coeffs: &[Rat], constant: Rat) -> NormShape {
        let mut terms: Vec<(Rat, Vec<usize>)> = coeffs.iter().cloned().enumerate().map(|(i, c)| (c, vec![i])).collect();
        terms.push((constant, vec![]));
        NormShape::new(coeffs.len(), terms)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn terms(&self) -> &[(Rat, Vec<usize>)] {
        &self.terms
    }

    pub fn is_affine(&self) -> bool {
        self.terms.iter().all(|(_, m)| m.len() <= 1)
    }

    pub fn eval(&self, xs: &[Rat]) -> Rat {
        self.terms
            .iter()
            .map(|(c, m)| m.iter().fold(c.clone(), |acc, &i| acc * &xs[i]))
            .fold(Rat::zero(), |a, b| a + b)
    }

    pub fn compose(&self, args: &[CostExpr]) -> CostExpr {
        let terms: Vec<CostExpr> = self
            .terms
            .iter()
            .map(|(c, m)| m.iter().fold(CostExpr::Const(c.clone()), |acc, &i| acc * args[i].clone()))
            .collect();
        terms.into_iter().reduce(|a, b| a + b).unwrap_or_else(CostExpr::zero)
    }
}

impl fmt::Display for NormShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(c, m)| {
                let vars: Vec<String> = m.iter().map(|i| format!("n{}", i + 1)).collect();
                match (c.is_one(), vars.is_empty()) {
                    (_, true) => fmt_rat(c),
                    (true, false) => vars.join("*"),
                    (false, false) => format!("{}*{}", fmt_rat(c), vars.join("*")),
                }
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

/// Template `Σ ?q_t · Π norms` over linear terms, then pairwise products
/// (degree 2), then a constant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Template {
    norms: Vec<Norm>,
    terms: Vec<Vec<usize>>,
    coeffs: Vec<Sym>,
    degree: u32,
}

impl Template {
    pub fn new(norms: Vec<Norm>, degree: u32, squares: bool, prefix: &str) -> Template {
        let k = norms.len();
        let mut terms: Vec<Vec<usize>> = (0..k).map(|i| vec![i]).collect();
        if degree >= 2 {
            for i in 0..k {
                let start = if squares { i } else { i + 1 };
                for j in start..k {
                    terms.push(vec![i, j]);
                }
            }
        }
        terms.push(vec![]);
        let coeffs = (0..terms.len()).map(|i| Sym::indexed(prefix, i)).collect();
        Template { norms, terms, coeffs, degree }
    }

    pub fn norms(&self) -> &[Norm] {
        &self.norms
    }

    pub fn coeffs(&self) -> &[Sym] {
        &self.coeffs
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// The template with its norms replaced by `args`.
    pub fn apply(&self, args: &[CostExpr]) -> CostExpr {
        let terms: Vec<CostExpr> = self
            .terms
            .iter()
            .zip(&self.coeffs)
            .map(|(m, q)| m.iter().fold(CostExpr::coeff(q.clone()), |acc, &i| acc * args[i].clone()))
            .collect();
        terms.into_iter().reduce(|a, b| a + b).unwrap_or_else(CostExpr::zero)
    }

    pub fn expr(&self) -> CostExpr {
        let args: Vec<CostExpr> = self.norms.iter().map(Norm::cost).collect();
        self.apply(&args)
    }

    pub fn instantiate(&self, assignment: &BTreeMap<Sym, Rat>) -> NormShape {
        let terms = self
            .terms
            .iter()
            .zip(&self.coeffs)
            .map(|(m, q)| (assignment.get(q).cloned().unwrap_or_else(Rat::zero), m.clone()))
            .collect();
        NormShape::new(self.norms.len(), terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int_rat;
    use crate::syntax::parse_program;

    fn norms_of(src: &str) -> Vec<String> {
        select_norms(&parse_program(src).unwrap()).iter().map(|n| n.to_string()).collect()
    }

    #[test]
    fn selection() {
        assert_eq!(norms_of("while [true] (x > 0) { skip }"), vec!["nat(x)"]);
        assert_eq!(norms_of("while [true] (x > y) { skip }"), vec!["nat(x - y)"]);
        assert!(norms_of("while [true] (true) { skip }").is_empty());
        assert_eq!(norms_of("while [x >= 0] (x > 0) { skip }"), vec!["nat(x)", "nat(x + 1)"]);
        assert_eq!(
            norms_of("while [true] (x = 1) { skip }"),
            vec!["nat(x)", "nat(x - 1)", "nat(2 - x)", "nat(1 - x)"]
        );
        assert_eq!(
            norms_of("while [x >= 0] (x > 0) { while [y >= 0] (y > 0) { y := y - 1 }; x := x - 1 }"),
            vec!["nat(x)", "nat(x + 1)", "nat(y)", "nat(y + 1)"]
        );
    }

    #[test]
    fn template_shapes() {
        let norms = vec![Norm::canonical(&IntExpr::var("x")).unwrap(), Norm::canonical(&IntExpr::var("y")).unwrap()];
        let t = Template::new(norms.clone(), 1, false, "q");
        assert_eq!(t.expr().to_string(), "?q0 * nat(x) + ?q1 * nat(y) + ?q2");
        let t = Template::new(norms.clone(), 2, false, "q");
        assert_eq!(t.coeffs().len(), 4);
        let t = Template::new(norms, 2, true, "q");
        assert_eq!(t.coeffs().len(), 6);
        let shape = t.instantiate(&BTreeMap::from([(Sym::new("q3"), int_rat(2))]));
        assert_eq!(shape.to_string(), "2*n1*n2");
        assert!(!shape.is_affine());
        assert_eq!(shape.eval(&[int_rat(3), int_rat(4)]), int_rat(24));
    }
}
