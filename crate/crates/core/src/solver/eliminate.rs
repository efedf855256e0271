use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::Signed;

use super::linear::{bexp_dnf, comparison_dnf, LinAtom, LinExpr};
use super::poly::{LpVar, Poly};
use super::simplex::atoms_feasible;
use super::{Constraint, SolverError};
use crate::rational::{clamp_nat, Rat};
use crate::syntax::{BExp, CostExpr, Store};

const MAX_CASES: usize = 4096;

/// `premise ⊨ difference >= 0` with a conjunctive linear premise.
/// `exact` is false when the reduction strengthened the original constraint.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PolyInequality {
    pub premise: Vec<LinAtom>,
    pub difference: Poly,
    pub exact: bool,
}

impl PolyInequality {
    pub fn premise_holds(&self, store: &Store) -> bool {
        self.premise.iter().all(|a| a.holds(store))
    }

    /// Whether the inequality holds at `store` under the given unknowns.
    pub fn holds_at(&self, store: &Store, values: &BTreeMap<LpVar, Rat>) -> bool {
        !self.premise_holds(store) || !self.difference.eval(store, values).is_negative()
    }
}

impl fmt::Display for PolyInequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let premise: Vec<String> = self.premise.iter().map(|a| a.to_string()).collect();
        let premise = if premise.is_empty() { "true".to_string() } else { premise.join(", ") };
        write!(f, "{premise} |= {} >= 0", self.difference)
    }
}

enum Tri {
    True,
    False,
    Unknown(LinAtom),
}

enum Stop {
    Split(LinAtom),
    Fail(SolverError),
}

impl From<SolverError> for Stop {
    fn from(e: SolverError) -> Stop {
        Stop::Fail(e)
    }
}

#[derive(Default)]
struct Eliminator {
    cache: HashMap<Vec<LinAtom>, bool>,
    out: Vec<PolyInequality>,
    cases: usize,
}

impl Eliminator {
    fn feasible(&mut self, atoms: &[LinAtom]) -> bool {
        let mut key: Vec<LinAtom> = atoms.iter().filter(|a| !a.is_trivially_true()).cloned().collect();
        key.sort();
        key.dedup();
        if let Some(&r) = self.cache.get(&key) {
            return r;
        }
        let r = atoms_feasible(&key);
        self.cache.insert(key, r);
        r
    }

    fn entails(&mut self, ctx: &[LinAtom], a: &LinAtom) -> bool {
        if a.is_trivially_true() {
            return true;
        }
        let mut with = ctx.to_vec();
        with.push(a.negate());
        !self.feasible(&with)
    }

    fn atom_status(&mut self, ctx: &[LinAtom], a: &LinAtom) -> Tri {
        if self.entails(ctx, a) {
            Tri::True
        } else if self.entails(ctx, &a.negate()) {
            Tri::False
        } else {
            Tri::Unknown(a.clone())
        }
    }

    fn decide(&mut self, b: &BExp, ctx: &[LinAtom]) -> Result<Tri, SolverError> {
        Ok(match b {
            BExp::True => Tri::True,
            BExp::False => Tri::False,
            BExp::Cmp(op, l, r) => {
                let dnf = comparison_dnf(*op, l, r).map_err(|e| SolverError::Unsupported(e.0))?;
                let mut unknown = None;
                let mut any_true = false;
                for conj in dnf {
                    let mut conj_status = Tri::True;
                    for a in &conj {
                        match self.atom_status(ctx, a) {
                            Tri::True => {}
                            Tri::False => {
                                conj_status = Tri::False;
                                break;
                            }
                            Tri::Unknown(a) => {
                                if matches!(conj_status, Tri::True) {
                                    conj_status = Tri::Unknown(a);
                                }
                            }
                        }
                    }
                    match conj_status {
                        Tri::True => any_true = true,
                        Tri::False => {}
                        Tri::Unknown(a) => {
                            unknown.get_or_insert(a);
                        }
                    }
                }
                match (any_true, unknown) {
                    (true, _) => Tri::True,
                    (false, Some(a)) => Tri::Unknown(a),
                    (false, None) => Tri::False,
                }
            }
            BExp::Not(e) => match self.decide(e, ctx)? {
                Tri::True => Tri::False,
                Tri::False => Tri::True,
                u => u,
            },
            BExp::And(l, r) => match (self.decide(l, ctx)?, self.decide(r, ctx)?) {
                (Tri::False, _) | (_, Tri::False) => Tri::False,
                (Tri::True, Tri::True) => Tri::True,
                (Tri::Unknown(a), _) | (_, Tri::Unknown(a)) => Tri::Unknown(a),
            },
            BExp::Or(l, r) => match (self.decide(l, ctx)?, self.decide(r, ctx)?) {
                (Tri::True, _) | (_, Tri::True) => Tri::True,
                (Tri::False, Tri::False) => Tri::False,
                (Tri::Unknown(a), _) | (_, Tri::Unknown(a)) => Tri::Unknown(a),
            },
        })
    }

    /// Resolves `e` to polynomials in the current case. Several results on
    /// the left-hand side stand for a maximum that must be bounded branchwise.
    fn to_poly(&mut self, e: &CostExpr, ctx: &[LinAtom], rhs: bool, exact: &mut bool) -> Result<Vec<Poly>, Stop> {
        Ok(match e {
            CostExpr::Const(q) => vec![Poly::constant(q.clone())],
            CostExpr::Coeff(s) => vec![Poly::coeff(s.clone())],
            CostExpr::Nat(a) => {
                let lin = LinExpr::from_int_expr(a)
                    .ok_or_else(|| SolverError::Unsupported(format!("nonlinear norm nat({a})")))?;
                if lin.is_constant() {
                    let v = lin.constant_term();
                    return Ok(vec![Poly::constant(clamp_nat(&v.to_integer()))]);
                }
                let nonneg = LinAtom::new(lin.clone());
                let nonpos = LinAtom::new(lin.scale(&-Rat::from_integer(1.into())));
                if self.entails(ctx, &nonneg) {
                    vec![Poly::from_lin(&lin)]
                } else if self.entails(ctx, &nonpos) {
                    vec![Poly::zero()]
                } else {
                    return Err(Stop::Split(nonneg));
                }
            }
            CostExpr::Iverson(phi, c) => match self.decide(phi, ctx)? {
                Tri::True => self.to_poly(c, ctx, rhs, exact)?,
                Tri::False => vec![Poly::zero()],
                Tri::Unknown(a) => return Err(Stop::Split(a)),
            },
            CostExpr::Add(a, b) => {
                let (pa, pb) = (self.to_poly(a, ctx, rhs, exact)?, self.to_poly(b, ctx, rhs, exact)?);
                let mut out = Vec::with_capacity(pa.len() * pb.len());
                for x in &pa {
                    for y in &pb {
                        out.push(x.add(y));
                    }
                }
                out
            }
            CostExpr::Mul(a, b) => {
                let (pa, pb) = (self.to_poly(a, ctx, rhs, exact)?, self.to_poly(b, ctx, rhs, exact)?);
                let mut out = Vec::with_capacity(pa.len() * pb.len());
                for x in &pa {
                    for y in &pb {
                        out.push(x.mul(y).map_err(|_| {
                            SolverError::Unsupported("product of template coefficients".into())
                        })?);
                    }
                }
                out
            }
            CostExpr::Max(a, b) => {
                let (pa, pb) = (self.to_poly(a, ctx, rhs, exact)?, self.to_poly(b, ctx, rhs, exact)?);
                if pa.len() == 1 && pb.len() == 1 {
                    let d = pa[0].sub(&pb[0]);
                    if let Some(lin) = d.as_linear() {
                        if lin.is_constant() {
                            let left = !lin.constant_term().is_negative();
                            return Ok(if left { pa } else { pb });
                        }
                        let ge = LinAtom::new(lin.clone());
                        let le = LinAtom::new(lin.scale(&-Rat::from_integer(1.into())));
                        if self.entails(ctx, &ge) {
                            return Ok(pa);
                        }
                        if self.entails(ctx, &le) {
                            return Ok(pb);
                        }
                        if rhs {
                            return Err(Stop::Split(ge));
                        }
                    }
                }
                if rhs {
                    *exact = false;
                    pa.into_iter().take(1).collect()
                } else {
                    pa.into_iter().chain(pb).collect()
                }
            }
        })
    }

    fn process(&mut self, ctx: Vec<LinAtom>, c: &Constraint) -> Result<(), SolverError> {
        self.cases += 1;
        if self.cases > MAX_CASES {
            return Err(SolverError::TooManyCases(MAX_CASES));
        }
        if !self.feasible(&ctx) {
            return Ok(());
        }
        let mut exact = true;
        let resolved = self
            .to_poly(&c.rhs, &ctx, true, &mut exact)
            .and_then(|r| Ok((r, self.to_poly(&c.lhs, &ctx, false, &mut exact)?)));
        match resolved {
            Ok((r, l)) => {
                let r = r.into_iter().next().unwrap_or_else(Poly::zero);
                for lp in l {
                    self.out.push(PolyInequality { premise: ctx.clone(), difference: r.sub(&lp), exact });
                }
                Ok(())
            }
            Err(Stop::Fail(e)) => Err(e),
            Err(Stop::Split(a)) => {
                let mut no = ctx.clone();
                no.push(a.negate());
                let mut yes = ctx;
                yes.push(a);
                self.process(yes, c)?;
                self.process(no, c)
            }
        }
    }
}

/// Reduces a constraint to polynomial inequalities over linear premises by
/// resolving every `nat`, Iverson bracket and `max` through case analysis.
pub fn eliminate_cases(c: &Constraint) -> Result<Vec<PolyInequality>, SolverError> {
    let mut el = Eliminator::default();
    let dnf = bexp_dnf(&c.premise, false).map_err(|e| SolverError::Unsupported(e.0))?;
    for conj in dnf {
        el.process(conj, c)?;
    }
    Ok(el.out)
}
