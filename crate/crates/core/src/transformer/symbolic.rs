use num_traits::{One, Zero};

use super::simplify::{simplify, subst};
use super::CostMode;
use crate::analysis::{AnalysisError, Analyzer, LoopPolicy};
use crate::rational::Rat;
use crate::syntax::{BExp, Command, CostExpr};

/// Symbolic transformer with loops delegated to `on_loop(mode, loop, f)`.
pub fn et_with<E>(
    mode: CostMode,
    cmd: &Command,
    f: &CostExpr,
    on_loop: &mut dyn FnMut(CostMode, &Command, &CostExpr) -> Result<CostExpr, E>,
) -> Result<CostExpr, E> {
    Ok(match cmd {
        Command::Skip => f.clone(),
        Command::Abort => CostExpr::zero(),
        Command::Tick(r) => match mode {
            CostMode::Cost if !r.is_zero() => simplify(&(CostExpr::Const(r.clone()) + f.clone())),
            _ => f.clone(),
        },
        Command::Assign(x, d) => {
            let terms = d.branches().iter().map(|(p, a)| CostExpr::scale(p.clone(), subst(f, x, a)));
            simplify(&terms.reduce(|acc, t| acc + t).unwrap_or_else(CostExpr::zero))
        }
        Command::If { inv, guard, then, els } => {
            let t = et_with(mode, then, f, on_loop)?;
            let e = et_with(mode, els, f, on_loop)?;
            let yes = BExp::and(inv.clone(), guard.clone());
            let no = BExp::and(inv.clone(), BExp::not(guard.clone()));
            simplify(&(CostExpr::iverson(yes, t) + CostExpr::iverson(no, e)))
        }
        Command::While { .. } => on_loop(mode, cmd, f)?,
        Command::NdChoice(a, b) => {
            let l = et_with(mode, a, f, on_loop)?;
            let r = et_with(mode, b, f, on_loop)?;
            simplify(&CostExpr::max(l, r))
        }
        Command::PChoice(p, a, b) => {
            let q = Rat::one() - p;
            let l = if p.is_zero() { CostExpr::zero() } else { et_with(mode, a, f, on_loop)? };
            let r = if q.is_zero() { CostExpr::zero() } else { et_with(mode, b, f, on_loop)? };
            simplify(&(CostExpr::scale(p.clone(), l) + CostExpr::scale(q, r)))
        }
        Command::Seq(a, b) => {
            let inner = et_with(mode, b, f, on_loop)?;
            et_with(mode, a, &inner, on_loop)?
        }
    })
}

/// Exact symbolic transformer of a loop-free command; `None` if `cmd`
/// contains a loop.
pub fn et_loop_free(mode: CostMode, cmd: &Command, f: &CostExpr) -> Option<CostExpr> {
    et_with(mode, cmd, f, &mut |_, _, _| Err(())).ok()
}

/// Symbolic upper bound on the expected cost (or value) of `cmd` with
/// continuation `f`, inferring loop bounds according to `policy`.
pub fn et_symbolic(mode: CostMode, cmd: &Command, f: &CostExpr, policy: &LoopPolicy) -> Result<CostExpr, AnalysisError> {
    Analyzer::new(policy.clone()).et(mode, cmd, f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int_rat;
    use crate::syntax::{eval_closed, parse_cost_expr, parse_program, Store};

    fn et(mode: CostMode, prog: &str, f: &str) -> CostExpr {
        et_loop_free(mode, &parse_program(prog).unwrap(), &parse_cost_expr(f).unwrap()).unwrap()
    }

    #[test]
    fn loop_free_examples() {
        assert_eq!(et(CostMode::Cost, "tick(2)", "0"), CostExpr::Const(int_rat(2)));
        assert_eq!(et(CostMode::Value, "tick(2)", "nat(x)").to_string(), "nat(x)");
        assert_eq!(et(CostMode::Value, "x := {1/2:0, 1/2:2}", "nat(x)"), CostExpr::Const(int_rat(1)));
        assert_eq!(et(CostMode::Cost, "tick(2); {tick(1)}[1/3]{tick(4)}", "0"), CostExpr::Const(int_rat(5)));
        assert_eq!(et(CostMode::Cost, "abort", "7").to_string(), "0");
        assert_eq!(et(CostMode::Cost, "{tick(1)}<>{tick(3)}", "0").to_string(), "3");
    }

    #[test]
    fn conditionals() {
        let e = et(CostMode::Cost, "if [true] (x > 0) { tick(1) } { skip }", "nat(x)");
        for x in -2..3 {
            let s = Store::from_pairs([("x", x)]);
            let want = if x > 0 { x + 1 } else { 0 };
            assert_eq!(eval_closed(&e, &s), int_rat(want));
        }
        let e = et(CostMode::Cost, "if [x >= 0] (x > 0) { tick(1) } { skip }", "1");
        assert_eq!(eval_closed(&e, &Store::from_pairs([("x", -1)])), int_rat(0));
    }

    #[test]
    fn loops_are_delegated() {
        let c = parse_program("while [true] (x > 0) { x := x - 1 }").unwrap();
        assert!(et_loop_free(CostMode::Cost, &c, &CostExpr::zero()).is_none());
    }
}
