//! Concrete-syntax printing. Output parses back to the same AST.

use std::fmt::{self, Display, Formatter};

use super::ast::{BExp, Command, CostExpr, DistExpr, IntExpr};
use crate::rational::fmt_rat;

impl Display for IntExpr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            IntExpr::Var(v) => write!(f, "{v}"),
            IntExpr::Const(c) => write!(f, "{c}"),
            IntExpr::Add(a, b) | IntExpr::Sub(a, b) => {
                let op = if matches!(self, IntExpr::Add(..)) { "+" } else { "-" };
                write!(f, "{a} {op} ")?;
                if matches!(**b, IntExpr::Add(..) | IntExpr::Sub(..)) {
                    write!(f, "({b})")
                } else {
                    write!(f, "{b}")
                }
            }
            IntExpr::Mul(a, b) => {
                if matches!(**a, IntExpr::Add(..) | IntExpr::Sub(..)) {
                    write!(f, "({a})")?;
                } else {
                    write!(f, "{a}")?;
                }
                f.write_str(" * ")?;
                if matches!(**b, IntExpr::Add(..) | IntExpr::Sub(..) | IntExpr::Mul(..)) {
                    write!(f, "({b})")
                } else {
                    write!(f, "{b}")
                }
            }
        }
    }
}

fn bexp_prec(b: &BExp) -> u8 {
    match b {
        BExp::Or(..) => 1,
        BExp::And(..) => 2,
        _ => 3,
    }
}

fn write_bexp_child(f: &mut Formatter<'_>, b: &BExp, min_prec: u8) -> fmt::Result {
    if bexp_prec(b) < min_prec {
        write!(f, "({b})")
    } else {
        write!(f, "{b}")
    }
}

impl Display for BExp {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            BExp::True => f.write_str("true"),
            BExp::False => f.write_str("false"),
            BExp::Cmp(op, a, b) => write!(f, "{a} {} {b}", op.symbol()),
            BExp::Or(a, b) => {
                write_bexp_child(f, a, 1)?;
                f.write_str(" || ")?;
                write_bexp_child(f, b, 2)
            }
            BExp::And(a, b) => {
                write_bexp_child(f, a, 2)?;
                f.write_str(" && ")?;
                write_bexp_child(f, b, 3)
            }
            BExp::Not(e) => {
                f.write_str("!")?;
                match **e {
                    BExp::True | BExp::False | BExp::Not(_) => write!(f, "{e}"),
                    _ => write!(f, "({e})"),
                }
            }
        }
    }
}

impl Display for DistExpr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        if self.is_point() {
            return write!(f, "{}", self.branches()[0].1);
        }
        let parts: Vec<String> =
            self.branches().iter().map(|(p, e)| format!("{}: {e}", fmt_rat(p))).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

impl Display for Command {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Command::Skip => f.write_str("skip"),
            Command::Abort => f.write_str("abort"),
            Command::Tick(r) => write!(f, "tick({})", fmt_rat(r)),
            Command::Assign(x, d) => write!(f, "{x} := {d}"),
            Command::If { inv, guard, then, els } => {
                write!(f, "if [{inv}] ({guard}) {{ {then} }} {{ {els} }}")
            }
            Command::While { inv, guard, body } => write!(f, "while [{inv}] ({guard}) {{ {body} }}"),
            Command::NdChoice(a, b) => write!(f, "{{ {a} }} <> {{ {b} }}"),
            Command::PChoice(p, a, b) => write!(f, "{{ {a} }} [{}] {{ {b} }}", fmt_rat(p)),
            Command::Seq(a, b) => {
                if matches!(**a, Command::Seq(..)) {
                    write!(f, "{{ {a} }}; {b}")
                } else {
                    write!(f, "{a}; {b}")
                }
            }
        }
    }
}

fn cost_is_atomic(c: &CostExpr) -> bool {
    matches!(
        c,
        CostExpr::Const(_) | CostExpr::Nat(_) | CostExpr::Max(..) | CostExpr::Coeff(_) | CostExpr::Iverson(..)
    )
}

impl Display for CostExpr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            CostExpr::Const(q) => f.write_str(&fmt_rat(q)),
            CostExpr::Nat(a) => write!(f, "nat({a})"),
            CostExpr::Coeff(s) => write!(f, "{s}"),
            CostExpr::Max(a, b) => write!(f, "max({a}, {b})"),
            CostExpr::Iverson(phi, c) => {
                write!(f, "[{phi}]*")?;
                if cost_is_atomic(c) {
                    write!(f, "{c}")
                } else {
                    write!(f, "({c})")
                }
            }
            CostExpr::Add(a, b) => {
                write!(f, "{a} + ")?;
                if matches!(**b, CostExpr::Add(..)) {
                    write!(f, "({b})")
                } else {
                    write!(f, "{b}")
                }
            }
            CostExpr::Mul(a, b) => {
                if matches!(**a, CostExpr::Add(..)) {
                    write!(f, "({a})")?;
                } else {
                    write!(f, "{a}")?;
                }
                f.write_str(" * ")?;
                if cost_is_atomic(b) {
                    write!(f, "{b}")
                } else {
                    write!(f, "({b})")
                }
            }
        }
    }
}
