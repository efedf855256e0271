use num_traits::{One, Zero};

use crate::rational::{clamp_nat, max_rat, Rat};
use crate::solver::LinExpr;
use crate::syntax::{BExp, CostExpr, IntExpr, Var};

/// Substitutes `a` for `x` inside norms and Iverson guards.
pub fn subst(f: &CostExpr, x: &Var, a: &IntExpr) -> CostExpr {
    match f {
        CostExpr::Const(_) | CostExpr::Coeff(_) => f.clone(),
        CostExpr::Nat(e) => CostExpr::Nat(e.subst(x, a)),
        CostExpr::Iverson(phi, c) => CostExpr::Iverson(phi.subst(x, a), Box::new(subst(c, x, a))),
        CostExpr::Add(l, r) => CostExpr::Add(Box::new(subst(l, x, a)), Box::new(subst(r, x, a))),
        CostExpr::Mul(l, r) => CostExpr::Mul(Box::new(subst(l, x, a)), Box::new(subst(r, x, a))),
        CostExpr::Max(l, r) => CostExpr::Max(Box::new(subst(l, x, a)), Box::new(subst(r, x, a))),
    }
}

/// Linear integer expressions in canonical form; others folded.
pub fn normalize_int(a: &IntExpr) -> IntExpr {
    LinExpr::from_int_expr(a).and_then(|l| l.to_int_expr()).unwrap_or_else(|| a.fold())
}

fn simplify_bexp(b: &BExp) -> BExp {
    match b {
        BExp::True | BExp::False => b.clone(),
        BExp::Cmp(op, l, r) => {
            let (l, r) = (normalize_int(l), normalize_int(r));
            match (l.as_const(), r.as_const()) {
                (Some(x), Some(y)) => {
                    if op.holds(x, y) {
                        BExp::True
                    } else {
                        BExp::False
                    }
                }
                _ => BExp::Cmp(*op, l, r),
            }
        }
        BExp::And(l, r) => BExp::and(simplify_bexp(l), simplify_bexp(r)),
        BExp::Or(l, r) => BExp::or(simplify_bexp(l), simplify_bexp(r)),
        BExp::Not(e) => BExp::not(simplify_bexp(e)),
    }
}

/// Splits a product into its constant factor and the remaining factors.
fn split_scale(c: CostExpr) -> (Rat, Option<CostExpr>) {
    match c {
        CostExpr::Const(q) => (q, None),
        CostExpr::Mul(l, r) => {
            let (a, ra) = split_scale(*l);
            let (b, rb) = split_scale(*r);
            let rest = match (ra, rb) {
                (None, x) | (x, None) => x,
                (Some(x), Some(y)) => Some(x * y),
            };
            (a * b, rest)
        }
        other => (Rat::one(), Some(other)),
    }
}

fn scaled(k: Rat, rest: Option<CostExpr>) -> CostExpr {
    match rest {
        _ if k.is_zero() => CostExpr::zero(),
        None => CostExpr::Const(k),
        Some(e) if k.is_one() => e,
        Some(e) => CostExpr::Const(k) * e,
    }
}

fn flatten_add(c: CostExpr, out: &mut Vec<CostExpr>) {
    match c {
        CostExpr::Add(l, r) => {
            flatten_add(*l, out);
            flatten_add(*r, out);
        }
        other => out.push(other),
    }
}

fn flatten_max(c: CostExpr, out: &mut Vec<CostExpr>) {
    match c {
        CostExpr::Max(l, r) => {
            flatten_max(*l, out);
            flatten_max(*r, out);
        }
        other => out.push(other),
    }
}

fn sum_of(terms: Vec<CostExpr>) -> CostExpr {
    let mut it = terms.into_iter();
    let first = it.next().unwrap_or_else(CostExpr::zero);
    it.fold(first, |acc, t| acc + t)
}

/// Semantics-preserving normalization: constant folding, canonical linear
/// norms, units, literal Iverson guards, like-term merging in sums (constant
/// last) and flattened, deduplicated maxima.
pub fn simplify(c: &CostExpr) -> CostExpr {
    match c {
        CostExpr::Const(_) | CostExpr::Coeff(_) => c.clone(),
        CostExpr::Nat(a) => {
            let a = normalize_int(a);
            match a.as_const() {
                Some(k) => CostExpr::Const(clamp_nat(k)),
                None => CostExpr::Nat(a),
            }
        }
        CostExpr::Iverson(phi, body) => {
            let body = simplify(body);
            if body.is_zero() {
                return CostExpr::zero();
            }
            match simplify_bexp(phi) {
                BExp::True => body,
                BExp::False => CostExpr::zero(),
                phi => match body {
                    CostExpr::Iverson(inner, rest) if inner == phi => CostExpr::Iverson(phi, rest),
                    body => CostExpr::Iverson(phi, Box::new(body)),
                },
            }
        }
        CostExpr::Mul(l, r) => {
            let (l, r) = (simplify(l), simplify(r));
            let (k, rest) = split_scale(l * r);
            scaled(k, rest)
        }
        CostExpr::Add(..) => {
            let mut raw = Vec::new();
            flatten_add(c.clone(), &mut raw);
            let mut constant = Rat::zero();
            let mut terms: Vec<(Rat, CostExpr)> = Vec::new();
            for t in raw {
                let mut inner = Vec::new();
                flatten_add(simplify(&t), &mut inner);
                for t in inner {
                    match split_scale(t) {
                        (k, None) => constant += k,
                        (k, Some(e)) => match terms.iter_mut().find(|(_, x)| *x == e) {
                            Some((acc, _)) => *acc += k,
                            None => terms.push((k, e)),
                        },
                    }
                }
            }
            let mut out: Vec<CostExpr> =
                terms.into_iter().filter(|(k, _)| !k.is_zero()).map(|(k, e)| scaled(k, Some(e))).collect();
            if !constant.is_zero() || out.is_empty() {
                out.push(CostExpr::Const(constant));
            }
            sum_of(out)
        }
        CostExpr::Max(..) => {
            let mut raw = Vec::new();
            flatten_max(c.clone(), &mut raw);
            let mut constant: Option<Rat> = None;
            let mut args: Vec<CostExpr> = Vec::new();
            for a in raw {
                let mut inner = Vec::new();
                flatten_max(simplify(&a), &mut inner);
                for a in inner {
                    match a {
                        CostExpr::Const(q) => constant = Some(constant.map_or(q.clone(), |k| max_rat(k, q))),
                        a if !args.contains(&a) => args.push(a),
                        _ => {}
                    }
                }
            }
            if let Some(k) = constant.filter(|k| !k.is_zero() || args.is_empty()) {
                args.push(CostExpr::Const(k));
            }
            let mut it = args.into_iter();
            let first = it.next().unwrap_or_else(CostExpr::zero);
            it.fold(first, CostExpr::max)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int_rat;
    use crate::syntax::parse_cost_expr;

    fn s(text: &str) -> String {
        simplify(&parse_cost_expr(text).unwrap()).to_string()
    }

    #[test]
    fn examples() {
        assert_eq!(s("1/2*nat(0) + 1/2*nat(2)"), "1");
        assert_eq!(s("[true]*nat(x)"), "nat(x)");
        assert_eq!(s("max(nat(x), nat(x))"), "nat(x)");
        assert_eq!(s("max(0, nat(x))"), "nat(x)");
        assert_eq!(s("nat(x - 0) + 2*nat(x) + 1 + 0*nat(y)"), "3 * nat(x) + 1");
        assert_eq!(s("[x > 0]*[x > 0]*nat(x)"), "[x > 0]*nat(x)");
        assert_eq!(s("[1 > 0]*3 + [0 > 1]*4"), "3");
        assert_eq!(s("nat((x + 1) - 1)"), "nat(x)");
        assert_eq!(s("2 * (3 * nat(x))"), "6 * nat(x)");
        assert_eq!(s("max(1, max(2, nat(y)))"), "max(nat(y), 2)");
    }

    #[test]
    fn substitution() {
        let f = parse_cost_expr("nat(x - y)").unwrap();
        let a = IntExpr::var("x") + IntExpr::int(1);
        assert_eq!(subst(&f, &Var::new("x"), &a).to_string(), "nat(x + 1 - y)");
        assert_eq!(subst(&CostExpr::Const(int_rat(5)), &Var::new("x"), &a), CostExpr::Const(int_rat(5)));
        let g = parse_cost_expr("[x > 0]*nat(x)").unwrap();
        assert_eq!(subst(&g, &Var::new("x"), &IntExpr::int(0)).to_string(), "[0 > 0]*nat(0)");
    }
}
