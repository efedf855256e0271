//! ASTs, concrete syntax, and store-level evaluation.

mod ast;
mod eval;
mod parse;
mod print;

pub use ast::{BExp, CmpOp, Command, CostExpr, DistError, DistExpr, FreeVars, IntExpr, Store, Sym, Var};
pub use eval::{eval_bexp, eval_closed, eval_cost, eval_dist, eval_int, EvalError};
pub use parse::{
    parse_bexp, parse_cost_expr, parse_int_expr, parse_program, parse_rat, ParseError, ParseErrorKind,
};
