use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use super::linear::LinAtom;
use super::poly::{Affine, LpVar};
use crate::rational::Rat;
use crate::syntax::{Sym, Var};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub(crate) enum Rel {
    Ge,
    Le,
    Eq,
}

/// `a · x (rel) b` over nonnegative `x`.
pub(crate) struct DenseLp {
    pub n: usize,
    pub rows: Vec<(Vec<Rat>, Rel, Rat)>,
}

#[derive(Debug, PartialEq, Eq)]
pub(crate) enum LpOutcome {
    Optimal(Vec<Rat>),
    Infeasible,
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<Rat>>,
    basis: Vec<usize>,
    z: Vec<Rat>,
    allowed: Vec<bool>,
    cols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let inv = Rat::one() / &self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            if !v.is_zero() {
                *v *= &inv;
            }
        }
        let nz: Vec<usize> = (0..=self.cols).filter(|&j| !self.rows[r][j].is_zero()).collect();
        let pivot_row = self.rows[r].clone();
        let eliminate = |row: &mut Vec<Rat>| {
            let f = row[c].clone();
            if f.is_zero() {
                return;
            }
            for &j in &nz {
                let d = &f * &pivot_row[j];
                row[j] -= d;
            }
        };
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                eliminate(row);
            }
        }
        eliminate(&mut self.z);
        self.basis[r] = c;
    }

    fn set_objective(&mut self, c: &[Rat]) {
        self.z = c.to_vec();
        self.z.resize(self.cols + 1, Rat::zero());
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = self.z[b].clone();
            if cb.is_zero() {
                continue;
            }
            for j in 0..=self.cols {
                if !self.rows[i][j].is_zero() {
                    let d = &cb * &self.rows[i][j];
                    self.z[j] -= d;
                }
            }
        }
    }

    /// Bland's rule; returns false when unbounded.
    fn optimize(&mut self) -> bool {
        loop {
            let enter = (0..self.cols).find(|&j| self.allowed[j] && self.z[j].is_negative());
            let Some(c) = enter else { return true };
            let mut best: Option<(Rat, usize, usize)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[c].is_positive() {
                    let ratio = &row[self.cols] / &row[c];
                    let better = match &best {
                        None => true,
                        Some((r, _, b)) => ratio < *r || (ratio == *r && self.basis[i] < *b),
                    };
                    if better {
                        best = Some((ratio, i, self.basis[i]));
                    }
                }
            }
            let Some((_, r, _)) = best else { return false };
            self.pivot(r, c);
        }
    }

    fn solution(&self, n: usize) -> Vec<Rat> {
        let mut x = vec![Rat::zero(); n];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < n {
                x[b] = self.rows[i][self.cols].clone();
            }
        }
        x
    }
}

/// Exact two-phase simplex minimizing the objectives lexicographically.
/// With no objectives only feasibility is decided.
pub(crate) fn lexmin(lp: &DenseLp, objectives: &[Vec<Rat>]) -> LpOutcome {
    let n = lp.n;
    let mut rows: Vec<(Vec<Rat>, Rel, Rat)> = Vec::with_capacity(lp.rows.len());
    for (a, rel, b) in &lp.rows {
        let (mut a, mut rel, mut b) = (a.clone(), *rel, b.clone());
        if b.is_negative() || (b.is_zero() && rel == Rel::Ge) {
            a.iter_mut().for_each(|v| *v = -v.clone());
            b = -b;
            rel = match rel {
                Rel::Ge => Rel::Le,
                Rel::Le => Rel::Ge,
                Rel::Eq => Rel::Eq,
            };
        }
        rows.push((a, rel, b));
    }
    let slacks = rows.iter().filter(|r| r.1 != Rel::Eq).count();
    let artificials = rows.iter().filter(|r| r.1 != Rel::Le).count();
    let cols = n + slacks + artificials;
    let mut t = Tableau {
        rows: Vec::with_capacity(rows.len()),
        basis: Vec::with_capacity(rows.len()),
        z: Vec::new(),
        allowed: vec![true; cols],
        cols,
    };
    let (mut s, mut art) = (n, n + slacks);
    for (a, rel, b) in rows {
        let mut row = a;
        row.resize(cols + 1, Rat::zero());
        row[cols] = b;
        match rel {
            Rel::Le => {
                row[s] = Rat::one();
                t.basis.push(s);
                s += 1;
            }
            Rel::Ge => {
                row[s] = -Rat::one();
                s += 1;
                row[art] = Rat::one();
                t.basis.push(art);
                art += 1;
            }
            Rel::Eq => {
                row[art] = Rat::one();
                t.basis.push(art);
                art += 1;
            }
        }
        t.rows.push(row);
    }

    let first_art = n + slacks;
    if artificials > 0 {
        let mut c1 = vec![Rat::zero(); cols];
        c1[first_art..].iter_mut().for_each(|v| *v = Rat::one());
        t.set_objective(&c1);
        t.optimize();
        if !t.z[cols].is_zero() {
            return LpOutcome::Infeasible;
        }
        let mut i = 0;
        while i < t.rows.len() {
            if t.basis[i] >= first_art {
                match (0..first_art).find(|&j| !t.rows[i][j].is_zero()) {
                    Some(j) => t.pivot(i, j),
                    None => {
                        t.rows.swap_remove(i);
                        t.basis.swap_remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
        t.allowed[first_art..].iter_mut().for_each(|v| *v = false);
    }

    for c in objectives {
        t.set_objective(c);
        if !t.optimize() {
            return LpOutcome::Unbounded;
        }
        for j in 0..cols {
            if t.z[j].is_positive() {
                t.allowed[j] = false;
            }
        }
    }
    LpOutcome::Optimal(t.solution(n))
}

/// Rational feasibility of a conjunction of integer atoms over free
/// variables. Infeasible means no integer store satisfies the atoms either.
pub(crate) fn atoms_feasible(atoms: &[LinAtom]) -> bool {
    if atoms.iter().any(LinAtom::is_trivially_false) {
        return false;
    }
    let vars: BTreeSet<&Var> = atoms.iter().flat_map(|a| a.expr().coeffs().keys()).collect();
    let index: BTreeMap<&Var, usize> = vars.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let n = 2 * vars.len();
    let rows = atoms
        .iter()
        .filter(|a| !a.is_trivially_true())
        .map(|a| {
            let mut row = vec![Rat::zero(); n];
            for (x, c) in a.expr().coeffs() {
                row[2 * index[x]] = c.clone();
                row[2 * index[x] + 1] = -c.clone();
            }
            (row, Rel::Ge, -a.expr().constant_term().clone())
        })
        .collect();
    lexmin(&DenseLp { n, rows }, &[]) != LpOutcome::Infeasible
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Relation {
    /// `form >= 0`
    Ge,
    /// `form = 0`
    Eq,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LinearConstraint {
    pub form: Affine,
    pub relation: Relation,
}

impl LinearConstraint {
    pub fn ge(form: Affine) -> LinearConstraint {
        LinearConstraint { form, relation: Relation::Ge }
    }

    pub fn eq(form: Affine) -> LinearConstraint {
        LinearConstraint { form, relation: Relation::Eq }
    }

    pub fn holds(&self, values: &BTreeMap<LpVar, Rat>) -> bool {
        let v = self.form.eval(values);
        match self.relation {
            Relation::Ge => !v.is_negative(),
            Relation::Eq => v.is_zero(),
        }
    }
}

/// Affine constraints over nonnegative unknowns. The objective is minimized;
/// ties are broken by maximizing the `tie_break` coefficients in order.
#[derive(Clone, Debug, Default)]
pub struct LinearSystem {
    pub constraints: Vec<LinearConstraint>,
    pub objective: Option<Affine>,
    pub tie_break: Vec<Sym>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpError {
    #[error("linear system is infeasible")]
    Infeasible,
    #[error("objective is unbounded")]
    Unbounded,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearSolution {
    pub values: BTreeMap<LpVar, Rat>,
    pub objective: Rat,
}

impl LinearSolution {
    pub fn coefficients(&self) -> BTreeMap<Sym, Rat> {
        self.values
            .iter()
            .filter_map(|(v, r)| match v {
                LpVar::Coeff(s) => Some((s.clone(), r.clone())),
                LpVar::Aux(_) => None,
            })
            .collect()
    }
}

impl LinearSystem {
    pub fn new() -> LinearSystem {
        LinearSystem::default()
    }

    pub fn push(&mut self, c: LinearConstraint) {
        self.constraints.push(c);
    }

    pub fn vars(&self) -> BTreeSet<LpVar> {
        let mut out: BTreeSet<LpVar> = self.constraints.iter().flat_map(|c| c.form.terms.keys().cloned()).collect();
        if let Some(o) = &self.objective {
            out.extend(o.terms.keys().cloned());
        }
        out.extend(self.tie_break.iter().cloned().map(LpVar::Coeff));
        out
    }

    /// Σ of all template coefficients.
    pub fn effective_objective(&self) -> Affine {
        self.objective.clone().unwrap_or_else(|| {
            let mut a = Affine::default();
            for v in self.vars() {
                if matches!(v, LpVar::Coeff(_)) {
                    a.add_term(v, &Rat::one());
                }
            }
            a
        })
    }

    /// LP-format text for external solvers.
    pub fn dump_lp(&self) -> String {
        let mut out = String::new();
        let obj = self.effective_objective();
        let _ = writeln!(out, "Minimize\n obj: {}", lp_terms(&obj));
        out.push_str("Subject To\n");
        for (i, c) in self.constraints.iter().enumerate() {
            let op = match c.relation {
                Relation::Ge => ">=",
                Relation::Eq => "=",
            };
            let _ = writeln!(out, " c{i}: {} {op} {}", lp_terms(&c.form), crate::rational::fmt_rat(&-c.form.constant.clone()));
        }
        out.push_str("Bounds\n");
        for v in self.vars() {
            let _ = writeln!(out, " {v} >= 0");
        }
        out.push_str("End\n");
        out
    }
}

fn lp_terms(a: &Affine) -> String {
    if a.terms.is_empty() {
        return "0".into();
    }
    let mut s = String::new();
    for (i, (v, c)) in a.terms.iter().enumerate() {
        let sign = if c.is_negative() { "-" } else if i > 0 { "+" } else { "" };
        let mag = c.abs();
        if i > 0 {
            s.push(' ');
        }
        if mag.is_one() {
            let _ = write!(s, "{sign} {v}");
        } else {
            let _ = write!(s, "{sign} {} {v}", crate::rational::fmt_rat(&mag));
        }
    }
    s.trim_start().to_string()
}

/// Exact minimization with all unknowns nonnegative.
pub fn solve_linear(sys: &LinearSystem) -> Result<LinearSolution, LpError> {
    let vars: Vec<LpVar> = sys.vars().into_iter().collect();
    let index: BTreeMap<&LpVar, usize> = vars.iter().enumerate().map(|(i, v)| (v, i)).collect();
    let n = vars.len();
    let dense = |a: &Affine| {
        let mut row = vec![Rat::zero(); n];
        for (v, c) in &a.terms {
            row[index[v]] = c.clone();
        }
        row
    };
    let rows = sys
        .constraints
        .iter()
        .map(|c| {
            let rel = match c.relation {
                Relation::Ge => Rel::Ge,
                Relation::Eq => Rel::Eq,
            };
            (dense(&c.form), rel, -c.form.constant.clone())
        })
        .collect();
    let objective = sys.effective_objective();
    let mut objectives = vec![dense(&objective)];
    for s in &sys.tie_break {
        let mut row = vec![Rat::zero(); n];
        row[index[&LpVar::Coeff(s.clone())]] = -Rat::one();
        objectives.push(row);
    }
    match lexmin(&DenseLp { n, rows }, &objectives) {
        LpOutcome::Infeasible => Err(LpError::Infeasible),
        LpOutcome::Unbounded => Err(LpError::Unbounded),
        LpOutcome::Optimal(x) => {
            let values: BTreeMap<LpVar, Rat> = vars.into_iter().zip(x).collect();
            let objective = objective.eval(&values);
            Ok(LinearSolution { values, objective })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int_rat, rat};
    use crate::solver::linear::LinExpr;
    use crate::syntax::parse_int_expr;

    fn q(name: &str) -> LpVar {
        LpVar::Coeff(Sym::new(name))
    }

    fn ge(terms: &[(&str, i64)], k: i64) -> LinearConstraint {
        let mut a = Affine::constant(int_rat(k));
        for (v, c) in terms {
            a.add_term(q(v), &int_rat(*c));
        }
        LinearConstraint::ge(a)
    }

    #[test]
    fn single_bounds() {
        let mut sys = LinearSystem::new();
        sys.push(ge(&[("q", 1)], -2));
        let sol = solve_linear(&sys).unwrap();
        assert_eq!(sol.coefficients()[&Sym::new("q")], int_rat(2));

        sys.push(ge(&[("q", 1)], -1));
        assert_eq!(solve_linear(&sys).unwrap().coefficients()[&Sym::new("q")], int_rat(2));

        let mut upper = LinearSystem::new();
        upper.push(ge(&[("q", -1)], 1));
        assert_eq!(solve_linear(&upper).unwrap().coefficients()[&Sym::new("q")], int_rat(0));
        let mut bad3 = LinearSystem::new();
        bad3.push(ge(&[("q", -1)], 1));
        bad3.push(ge(&[("q", 1)], -2));
        assert_eq!(solve_linear(&bad3), Err(LpError::Infeasible));
    }

    #[test]
    fn known_optimum() {
        // minimize a + b s.t. a + 2b >= 4, 3a + b >= 6
        let mut sys = LinearSystem::new();
        sys.push(ge(&[("a", 1), ("b", 2)], -4));
        sys.push(ge(&[("a", 3), ("b", 1)], -6));
        let sol = solve_linear(&sys).unwrap();
        assert_eq!(sol.objective, rat(14, 5));
        assert_eq!(sol.coefficients()[&Sym::new("a")], rat(8, 5));
        assert_eq!(sol.coefficients()[&Sym::new("b")], rat(6, 5));
    }

    #[test]
    fn tie_break_prefers_earlier() {
        let mut sys = LinearSystem::new();
        sys.push(ge(&[("a", 1), ("b", 1)], -2));
        sys.tie_break = vec![Sym::new("b"), Sym::new("a")];
        let sol = solve_linear(&sys).unwrap();
        assert_eq!(sol.coefficients()[&Sym::new("b")], int_rat(2));
        sys.tie_break = vec![Sym::new("a"), Sym::new("b")];
        let sol = solve_linear(&sys).unwrap();
        assert_eq!(sol.coefficients()[&Sym::new("a")], int_rat(2));
    }

    #[test]
    fn equalities_and_unbounded() {
        let mut sys = LinearSystem::new();
        let mut e = Affine::constant(int_rat(-3));
        e.add_term(q("a"), &int_rat(1));
        e.add_term(LpVar::Aux(0), &int_rat(-1));
        sys.push(LinearConstraint::eq(e));
        let sol = solve_linear(&sys).unwrap();
        assert_eq!(sol.coefficients()[&Sym::new("a")], int_rat(3));
        let mut o = Affine::default();
        o.add_term(LpVar::Aux(0), &int_rat(-1));
        sys.objective = Some(o);
        assert_eq!(solve_linear(&sys), Err(LpError::Unbounded));
        assert!(sys.dump_lp().contains("c0: a - l0 = 3"));
    }

    #[test]
    fn premise_feasibility() {
        let atom = |s: &str| LinAtom::new(LinExpr::from_int_expr(&parse_int_expr(s).unwrap()).unwrap());
        assert!(atoms_feasible(&[atom("x - 1"), atom("5 - x")]));
        assert!(!atoms_feasible(&[atom("x - 1"), atom("0 - x")]));
        assert!(atoms_feasible(&[atom("0 - x - y"), atom("x - 3")]));
        assert!(!atoms_feasible(&[atom("2*x - 1"), atom("0 - 2*x")]));
        assert!(atoms_feasible(&[]));
    }
}
