use std::collections::{BTreeMap, BTreeSet};

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Constraint;
use crate::rational::Rat;
use crate::syntax::{BExp, CostExpr, EvalError, FreeVars, IntExpr, Store, Sym, Var};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Refutation {
    Pass,
    Counterexample(Store),
}

#[derive(Clone, Debug)]
pub struct RefuteOptions {
    pub samples: usize,
    pub seed: u64,
    pub low: i64,
    pub high: i64,
}

impl Default for RefuteOptions {
    fn default() -> RefuteOptions {
        RefuteOptions { samples: 10_000, seed: 0, low: -50, high: 50 }
    }
}

const MAX_BOUNDARY_STORES: usize = 4096;

fn collect_int_consts(a: &IntExpr, out: &mut BTreeSet<i64>) {
    match a {
        IntExpr::Var(_) => {}
        IntExpr::Const(c) => {
            if let Some(v) = c.to_i64() {
                out.insert(v);
                out.insert(-v);
            }
        }
        IntExpr::Add(l, r) | IntExpr::Sub(l, r) | IntExpr::Mul(l, r) => {
            collect_int_consts(l, out);
            collect_int_consts(r, out);
        }
    }
}

fn collect_bexp_consts(b: &BExp, out: &mut BTreeSet<i64>) {
    for (_, l, r) in b.atoms() {
        collect_int_consts(l, out);
        collect_int_consts(r, out);
    }
}

fn collect_cost_consts(c: &CostExpr, out: &mut BTreeSet<i64>) {
    match c {
        CostExpr::Const(_) | CostExpr::Coeff(_) => {}
        CostExpr::Nat(a) => collect_int_consts(a, out),
        CostExpr::Iverson(phi, c) => {
            collect_bexp_consts(phi, out);
            collect_cost_consts(c, out);
        }
        CostExpr::Add(a, b) | CostExpr::Mul(a, b) | CostExpr::Max(a, b) => {
            collect_cost_consts(a, out);
            collect_cost_consts(b, out);
        }
    }
}

/// Stores built from constants near the comparison and norm boundaries of
/// `c`, smallest values first.
pub fn boundary_stores(c: &Constraint) -> Vec<Store> {
    let mut consts = BTreeSet::from([0i64]);
    collect_bexp_consts(&c.premise, &mut consts);
    collect_cost_consts(&c.lhs, &mut consts);
    collect_cost_consts(&c.rhs, &mut consts);
    let mut values = BTreeSet::new();
    for k in consts {
        for d in -1..=1 {
            values.insert(k.saturating_add(d));
        }
    }
    let mut values: Vec<i64> = values.into_iter().collect();
    values.sort_by_key(|v| (v.unsigned_abs(), *v < 0));

    let vars: Vec<Var> = c.free_vars().into_iter().collect();
    let mut stores = vec![Store::new()];
    for x in &vars {
        let mut next = Vec::new();
        for s in &stores {
            for v in &values {
                if next.len() >= MAX_BOUNDARY_STORES {
                    break;
                }
                next.push(s.with(x, (*v).into()));
            }
        }
        stores = next;
    }
    stores
}

/// Evaluates the constraint at boundary stores and at `samples` random
/// stores in `[low, high]`. A counterexample falsifies the constraint under
/// `assignment`; passing is evidence only.
pub fn numeric_refute_with(
    c: &Constraint,
    assignment: &BTreeMap<Sym, Rat>,
    opts: &RefuteOptions,
) -> Result<Refutation, EvalError> {
    for s in boundary_stores(c) {
        if !c.holds_at(&s, assignment)? {
            return Ok(Refutation::Counterexample(s));
        }
    }
    let vars: Vec<Var> = c.free_vars().into_iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..opts.samples {
        let mut s = Store::new();
        for x in &vars {
            s.set(x.clone(), rng.gen_range(opts.low..=opts.high).into());
        }
        if !c.holds_at(&s, assignment)? {
            return Ok(Refutation::Counterexample(s));
        }
    }
    Ok(Refutation::Pass)
}

pub fn numeric_refute(
    c: &Constraint,
    assignment: &BTreeMap<Sym, Rat>,
    samples: usize,
    seed: u64,
) -> Result<Refutation, EvalError> {
    numeric_refute_with(c, assignment, &RefuteOptions { samples, seed, ..RefuteOptions::default() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int_rat, rat};
    use crate::syntax::{parse_bexp, parse_cost_expr};

    fn countdown() -> Constraint {
        Constraint::new(
            parse_bexp("x >= 0 && x > 0").unwrap(),
            parse_cost_expr("1 + ?q*nat(x - 1)").unwrap(),
            parse_cost_expr("?q*nat(x)").unwrap(),
        )
    }

    #[test]
    fn countdown_constraint() {
        let q = |v| BTreeMap::from([(Sym::new("q"), v)]);
        assert_eq!(numeric_refute(&countdown(), &q(int_rat(1)), 10_000, 0).unwrap(), Refutation::Pass);
        assert_eq!(
            numeric_refute(&countdown(), &q(rat(1, 2)), 10_000, 0).unwrap(),
            Refutation::Counterexample(Store::from_pairs([("x", 1)]))
        );
    }

    #[test]
    fn vacuous_premise() {
        let c = Constraint::new(BExp::False, parse_cost_expr("100").unwrap(), CostExpr::zero());
        assert_eq!(numeric_refute(&c, &BTreeMap::new(), 100, 1).unwrap(), Refutation::Pass);
    }

    #[test]
    fn unbound_coefficient() {
        assert!(numeric_refute(&countdown(), &BTreeMap::new(), 10, 0).is_err());
    }
}
