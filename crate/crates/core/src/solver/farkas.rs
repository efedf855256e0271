use std::collections::BTreeSet;

use num_traits::{Signed, Zero};

use super::eliminate::PolyInequality;
use super::poly::{Affine, LpVar, Monomial, Poly};
use super::simplex::LinearConstraint;
use super::SolverError;

/// Replaces `premise ⊨ difference >= 0` by linear conditions on the
/// unknowns: the difference must equal a nonnegative combination of 1, the
/// premise atoms and, for quadratic differences, their pairwise products.
/// Multipliers are fresh `Aux` unknowns numbered from `next_aux`.
pub fn farkas_reduce(p: &PolyInequality, next_aux: &mut usize) -> Result<Vec<LinearConstraint>, SolverError> {
    let d = &p.difference;
    let degree = d.degree();
    if degree > 2 {
        return Err(SolverError::Unsupported(format!("difference of degree {degree}")));
    }
    if degree == 0 {
        let k = d.coefficient(&Monomial::new());
        if k.as_constant().is_some_and(|c| !c.is_negative()) {
            return Ok(Vec::new());
        }
        return Ok(vec![LinearConstraint::ge(k)]);
    }

    let atoms: Vec<Poly> = p.premise.iter().map(Poly::from_atom).collect();
    let mut basis = atoms.clone();
    if degree == 2 {
        for i in 0..atoms.len() {
            for j in i..atoms.len() {
                basis.push(atoms[i].mul(&atoms[j]).expect("premise atoms are coefficient-free"));
            }
        }
    }
    let lambdas: Vec<LpVar> = basis
        .iter()
        .map(|_| {
            *next_aux += 1;
            LpVar::Aux(*next_aux - 1)
        })
        .collect();

    let monomials: BTreeSet<Monomial> =
        d.terms().keys().chain(basis.iter().flat_map(|b| b.terms().keys())).cloned().collect();
    let mut out = Vec::with_capacity(monomials.len());
    for m in monomials {
        let mut form: Affine = d.coefficient(&m);
        for (b, l) in basis.iter().zip(&lambdas) {
            if let Some(c) = b.coefficient(&m).as_constant() {
                if !c.is_zero() {
                    form.add_term(l.clone(), &-c.clone());
                }
            }
        }
        if form.is_zero() {
            continue;
        }
        out.push(if m.is_empty() { LinearConstraint::ge(form) } else { LinearConstraint::eq(form) });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int_rat;
    use crate::solver::simplex::{solve_linear, LinearSystem};
    use crate::solver::{eliminate_cases, Constraint};
    use crate::syntax::{parse_bexp, parse_cost_expr, Sym};

    fn solve(p: &str, l: &str, r: &str) -> Option<crate::rational::Rat> {
        let c = Constraint::new(parse_bexp(p).unwrap(), parse_cost_expr(l).unwrap(), parse_cost_expr(r).unwrap());
        let mut sys = LinearSystem::new();
        let mut aux = 0;
        for pi in eliminate_cases(&c).unwrap() {
            for lc in farkas_reduce(&pi, &mut aux).unwrap() {
                sys.push(lc);
            }
        }
        sys.tie_break = vec![Sym::new("q")];
        solve_linear(&sys).ok().map(|s| s.coefficients().get(&Sym::new("q")).cloned().unwrap_or_else(|| int_rat(0)))
    }

    #[test]
    fn variable_free_difference() {
        assert_eq!(solve("x > 0", "1 + ?q*nat(x - 1)", "?q*nat(x)"), Some(int_rat(1)));
    }

    #[test]
    fn linear_multiplier() {
        assert_eq!(solve("x >= 0", "nat(x)", "?q*nat(x)"), Some(int_rat(1)));
        assert_eq!(solve("true", "nat(x) + nat(y)", "?q*nat(x + y)"), None);
        assert_eq!(solve("x >= 0 && y >= 0", "nat(x) + nat(y)", "?q*nat(x + y)"), Some(int_rat(1)));
    }

    #[test]
    fn empty_and_quadratic() {
        let p = PolyInequality { premise: vec![], difference: Poly::zero(), exact: true };
        assert!(farkas_reduce(&p, &mut 0).unwrap().is_empty());
        assert_eq!(solve("x >= 1", "nat(x)", "?q*nat(x)*nat(x)"), Some(int_rat(1)));
    }
}
