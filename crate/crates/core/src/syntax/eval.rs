use std::collections::BTreeMap;

use num_traits::Zero;
use thiserror::Error;

use super::ast::{BExp, CostExpr, DistExpr, IntExpr, Store, Sym};
use crate::rational::{clamp_nat, max_rat, Int, Rat};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("coefficient {0} is not bound")]
    UnboundCoefficient(Sym),
}

pub fn eval_int(a: &IntExpr, store: &Store) -> Int {
    match a {
        IntExpr::Var(x) => store.get(x),
        IntExpr::Const(c) => c.clone(),
        IntExpr::Add(l, r) => eval_int(l, store) + eval_int(r, store),
        IntExpr::Sub(l, r) => eval_int(l, store) - eval_int(r, store),
        IntExpr::Mul(l, r) => eval_int(l, store) * eval_int(r, store),
    }
}

pub fn eval_bexp(phi: &BExp, store: &Store) -> bool {
    match phi {
        BExp::True => true,
        BExp::False => false,
        BExp::Cmp(op, a, b) => op.holds(&eval_int(a, store), &eval_int(b, store)),
        BExp::And(l, r) => eval_bexp(l, store) && eval_bexp(r, store),
        BExp::Or(l, r) => eval_bexp(l, store) || eval_bexp(r, store),
        BExp::Not(e) => !eval_bexp(e, store),
    }
}

/// Evaluates a distribution, merging branches that land on the same value.
pub fn eval_dist(d: &DistExpr, store: &Store) -> BTreeMap<Int, Rat> {
    let mut out: BTreeMap<Int, Rat> = BTreeMap::new();
    for (p, e) in d.branches() {
        *out.entry(eval_int(e, store)).or_insert_with(Rat::zero) += p;
    }
    out
}

pub fn eval_cost(c: &CostExpr, store: &Store, coeffs: &BTreeMap<Sym, Rat>) -> Result<Rat, EvalError> {
    Ok(match c {
        CostExpr::Const(q) => q.clone(),
        CostExpr::Nat(a) => clamp_nat(&eval_int(a, store)),
        CostExpr::Iverson(phi, c) => {
            if eval_bexp(phi, store) {
                eval_cost(c, store, coeffs)?
            } else {
                Rat::zero()
            }
        }
        CostExpr::Add(a, b) => eval_cost(a, store, coeffs)? + eval_cost(b, store, coeffs)?,
        CostExpr::Mul(a, b) => {
            let l = eval_cost(a, store, coeffs)?;
            if l.is_zero() {
                // still surface unbound symbols on the right
                eval_cost(b, store, coeffs)?;
                return Ok(l);
            }
            l * eval_cost(b, store, coeffs)?
        }
        CostExpr::Max(a, b) => max_rat(eval_cost(a, store, coeffs)?, eval_cost(b, store, coeffs)?),
        CostExpr::Coeff(s) => coeffs.get(s).cloned().ok_or_else(|| EvalError::UnboundCoefficient(s.clone()))?,
    })
}

/// Evaluation of coefficient-free cost expressions.
///
/// Panics if `c` mentions a coefficient symbol.
pub fn eval_closed(c: &CostExpr, store: &Store) -> Rat {
    eval_cost(c, store, &BTreeMap::new()).expect("cost expression has unbound coefficients")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int_rat, rat};
    use crate::syntax::ast::CmpOp;

    fn x() -> IntExpr {
        IntExpr::var("x")
    }

    #[test]
    fn int_examples() {
        let s = Store::from_pairs([("x", 5), ("y", 2)]);
        assert_eq!(eval_int(&(x() - IntExpr::var("y")), &s), Int::from(3));
        let s = Store::from_pairs([("x", -3)]);
        assert_eq!(eval_int(&(x() * x()), &s), Int::from(9));
        assert_eq!(eval_int(&IntExpr::int(0), &s), Int::from(0));
    }

    #[test]
    fn bexp_examples() {
        let gt = BExp::cmp(CmpOp::Gt, x(), IntExpr::int(0));
        assert!(eval_bexp(&gt, &Store::from_pairs([("x", 1)])));
        let contra = BExp::And(Box::new(gt.clone()), Box::new(BExp::Not(Box::new(gt))));
        for v in -3..3 {
            assert!(!eval_bexp(&contra, &Store::from_pairs([("x", v)])));
        }
        assert!(eval_bexp(&BExp::True, &Store::new()));
    }

    #[test]
    fn dist_examples() {
        let d = DistExpr::new(vec![(rat(1, 2), IntExpr::int(0)), (rat(1, 2), IntExpr::int(2))]).unwrap();
        let r = eval_dist(&d, &Store::new());
        assert_eq!(r, BTreeMap::from([(Int::from(0), rat(1, 2)), (Int::from(2), rat(1, 2))]));

        let d = DistExpr::new(vec![(rat(1, 2), x()), (rat(1, 2), x())]).unwrap();
        let r = eval_dist(&d, &Store::from_pairs([("x", 7)]));
        assert_eq!(r, BTreeMap::from([(Int::from(7), rat(1, 1))]));

        let d = DistExpr::new(vec![(rat(1, 3), x()), (rat(2, 3), x() + IntExpr::int(1))]).unwrap();
        let r = eval_dist(&d, &Store::new());
        assert_eq!(r, BTreeMap::from([(Int::from(0), rat(1, 3)), (Int::from(1), rat(2, 3))]));
    }

    #[test]
    fn cost_examples() {
        let none = BTreeMap::new();
        let c = CostExpr::nat(x() - IntExpr::var("y"));
        assert_eq!(eval_cost(&c, &Store::from_pairs([("x", 2), ("y", 5)]), &none).unwrap(), int_rat(0));

        let c = CostExpr::iverson(BExp::cmp(CmpOp::Gt, x(), IntExpr::int(0)), CostExpr::Const(int_rat(5)));
        assert_eq!(eval_cost(&c, &Store::from_pairs([("x", 0)]), &none).unwrap(), int_rat(0));
        assert_eq!(eval_cost(&c, &Store::from_pairs([("x", 1)]), &none).unwrap(), int_rat(5));

        let c = CostExpr::max(CostExpr::Const(int_rat(2)), CostExpr::nat(x()));
        assert_eq!(eval_cost(&c, &Store::from_pairs([("x", 7)]), &none).unwrap(), int_rat(7));
    }

    #[test]
    fn unbound_coefficient() {
        let c = CostExpr::coeff(Sym::new("q0")) * CostExpr::nat(x());
        let err = eval_cost(&c, &Store::new(), &BTreeMap::new()).unwrap_err();
        assert_eq!(err, EvalError::UnboundCoefficient(Sym::new("q0")));
        let bound = BTreeMap::from([(Sym::new("q0"), rat(3, 2))]);
        assert_eq!(eval_cost(&c, &Store::from_pairs([("x", 2)]), &bound).unwrap(), int_rat(3));
    }
}
