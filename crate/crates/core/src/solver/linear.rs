use std::collections::BTreeMap;
use std::fmt;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::rational::{fmt_rat, Int, Rat};
use crate::syntax::{BExp, CmpOp, IntExpr, Store, Var};

/// Affine form over program variables with rational coefficients.
#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord, Default)]
pub struct LinExpr {
    coeffs: BTreeMap<Var, Rat>,
    constant: Rat,
}

impl LinExpr {
    pub fn constant(c: Rat) -> LinExpr {
        LinExpr { coeffs: BTreeMap::new(), constant: c }
    }

    pub fn var(x: Var) -> LinExpr {
        LinExpr { coeffs: BTreeMap::from([(x, Rat::one())]), constant: Rat::zero() }
    }

    pub fn coeffs(&self) -> &BTreeMap<Var, Rat> {
        &self.coeffs
    }

    pub fn constant_term(&self) -> &Rat {
        &self.constant
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, other: &LinExpr) -> LinExpr {
        let mut out = self.clone();
        for (x, c) in &other.coeffs {
            let slot = out.coeffs.entry(x.clone()).or_insert_with(Rat::zero);
            *slot += c;
            if slot.is_zero() {
                out.coeffs.remove(x);
            }
        }
        out.constant += &other.constant;
        out
    }

    pub fn scale(&self, k: &Rat) -> LinExpr {
        if k.is_zero() {
            return LinExpr::default();
        }
        LinExpr {
            coeffs: self.coeffs.iter().map(|(x, c)| (x.clone(), c * k)).collect(),
            constant: &self.constant * k,
        }
    }

    pub fn sub(&self, other: &LinExpr) -> LinExpr {
        self.add(&other.scale(&-Rat::one()))
    }

    pub fn offset(&self, k: &Rat) -> LinExpr {
        let mut out = self.clone();
        out.constant += k;
        out
    }

    pub fn eval(&self, store: &Store) -> Rat {
        self.coeffs.iter().fold(self.constant.clone(), |acc, (x, c)| acc + c * Rat::from_integer(store.get(x)))
    }

    /// `None` when `a` multiplies two non-constant terms.
    pub fn from_int_expr(a: &IntExpr) -> Option<LinExpr> {
        Some(match a {
            IntExpr::Var(x) => LinExpr::var(x.clone()),
            IntExpr::Const(c) => LinExpr::constant(Rat::from_integer(c.clone())),
            IntExpr::Add(l, r) => LinExpr::from_int_expr(l)?.add(&LinExpr::from_int_expr(r)?),
            IntExpr::Sub(l, r) => LinExpr::from_int_expr(l)?.sub(&LinExpr::from_int_expr(r)?),
            IntExpr::Mul(l, r) => {
                let (l, r) = (LinExpr::from_int_expr(l)?, LinExpr::from_int_expr(r)?);
                if l.is_constant() {
                    r.scale(&l.constant)
                } else if r.is_constant() {
                    l.scale(&r.constant)
                } else {
                    return None;
                }
            }
        })
    }

    /// Canonical integer expression, e.g. `x - y + 1` or `2 - x`. `None` for
    /// non-integral coefficients.
    pub fn to_int_expr(&self) -> Option<IntExpr> {
        if !self.constant.is_integer() || self.coeffs.values().any(|c| !c.is_integer()) {
            return None;
        }
        let mut k = self.constant.to_integer();
        let mut acc: Option<IntExpr> = None;
        let leading_negative = self.coeffs.values().next().is_some_and(|c| c.is_negative());
        if leading_negative && k.is_positive() {
            acc = Some(IntExpr::Const(k.clone()));
            k = Int::zero();
        }
        for (x, c) in &self.coeffs {
            let c = c.to_integer();
            let mag = c.abs();
            let term = if mag.is_one() {
                IntExpr::Var(x.clone())
            } else {
                IntExpr::Const(mag) * IntExpr::Var(x.clone())
            };
            acc = Some(match (acc, c.is_negative()) {
                (None, false) => term,
                (None, true) => IntExpr::Const(-Int::one()) * term,
                (Some(a), false) => a + term,
                (Some(a), true) => a - term,
            });
        }
        Some(match acc {
            None => IntExpr::Const(k),
            Some(a) if k.is_zero() => a,
            Some(a) if k.is_negative() => a - IntExpr::Const(-k),
            Some(a) => a + IntExpr::Const(k),
        })
    }
}

impl fmt::Display for LinExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (x, c) in &self.coeffs {
            let (neg, mag) = (c.is_negative(), c.abs());
            match (first, neg) {
                (true, true) => f.write_str("-")?,
                (true, false) => {}
                (false, true) => f.write_str(" - ")?,
                (false, false) => f.write_str(" + ")?,
            }
            if mag.is_one() {
                write!(f, "{x}")?;
            } else {
                write!(f, "{}*{x}", fmt_rat(&mag))?;
            }
            first = false;
        }
        if first {
            return f.write_str(&fmt_rat(&self.constant));
        }
        if !self.constant.is_zero() {
            let sign = if self.constant.is_negative() { "-" } else { "+" };
            write!(f, " {sign} {}", fmt_rat(&self.constant.abs()))?;
        }
        Ok(())
    }
}

/// `expr >= 0` over integer stores, normalized to coprime integer variable
/// coefficients with the constant rounded down.
#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct LinAtom {
    expr: LinExpr,
}

impl LinAtom {
    pub fn new(e: LinExpr) -> LinAtom {
        let lcm = e.coeffs.values().chain(std::iter::once(&e.constant)).fold(Int::one(), |acc, c| acc.lcm(c.denom()));
        let e = e.scale(&Rat::from_integer(lcm));
        let g = e.coeffs.values().fold(Int::zero(), |acc, c| acc.gcd(&c.to_integer()));
        if g.is_zero() {
            let constant = if e.constant.is_negative() { -Rat::one() } else { Rat::zero() };
            return LinAtom { expr: LinExpr::constant(constant) };
        }
        let coeffs = e.coeffs.iter().map(|(x, c)| (x.clone(), Rat::from_integer(c.to_integer() / &g))).collect();
        let constant = Rat::from_integer(e.constant.to_integer().div_floor(&g));
        LinAtom { expr: LinExpr { coeffs, constant } }
    }

    pub fn expr(&self) -> &LinExpr {
        &self.expr
    }

    /// The integer complement `-expr - 1 >= 0`.
    pub fn negate(&self) -> LinAtom {
        LinAtom::new(self.expr.scale(&-Rat::one()).offset(&-Rat::one()))
    }

    pub fn holds(&self, store: &Store) -> bool {
        !self.expr.eval(store).is_negative()
    }

    pub fn is_trivially_true(&self) -> bool {
        self.expr.is_constant() && !self.expr.constant.is_negative()
    }

    pub fn is_trivially_false(&self) -> bool {
        self.expr.is_constant() && self.expr.constant.is_negative()
    }
}

impl fmt::Display for LinAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} >= 0", self.expr)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NonlinearAtom(pub String);

/// Disjunctive normal form of a comparison as integer atoms.
pub fn comparison_dnf(op: CmpOp, a: &IntExpr, b: &IntExpr) -> Result<Vec<Vec<LinAtom>>, NonlinearAtom> {
    let la = LinExpr::from_int_expr(a);
    let lb = LinExpr::from_int_expr(b);
    let (la, lb) = match (la, lb) {
        (Some(la), Some(lb)) => (la, lb),
        _ => return Err(NonlinearAtom(format!("{a} {} {b}", op.symbol()))),
    };
    let ge = |x: &LinExpr, y: &LinExpr, k: i64| LinAtom::new(x.sub(y).offset(&Rat::from_integer((-k).into())));
    Ok(match op {
        CmpOp::Lt => vec![vec![ge(&lb, &la, 1)]],
        CmpOp::Le => vec![vec![ge(&lb, &la, 0)]],
        CmpOp::Gt => vec![vec![ge(&la, &lb, 1)]],
        CmpOp::Ge => vec![vec![ge(&la, &lb, 0)]],
        CmpOp::Eq => vec![vec![ge(&la, &lb, 0), ge(&lb, &la, 0)]],
        CmpOp::Ne => vec![vec![ge(&la, &lb, 1)], vec![ge(&lb, &la, 1)]],
    })
}

/// DNF of `b` (or of its negation) with trivially false conjuncts dropped and
/// trivially true atoms removed.
pub fn bexp_dnf(b: &BExp, negated: bool) -> Result<Vec<Vec<LinAtom>>, NonlinearAtom> {
    let raw = match (b, negated) {
        (BExp::True, false) | (BExp::False, true) => vec![vec![]],
        (BExp::True, true) | (BExp::False, false) => vec![],
        (BExp::Cmp(op, l, r), false) => comparison_dnf(*op, l, r)?,
        (BExp::Cmp(op, l, r), true) => comparison_dnf(op.negate(), l, r)?,
        (BExp::Not(e), n) => bexp_dnf(e, !n)?,
        (BExp::And(l, r), false) | (BExp::Or(l, r), true) => {
            let (l, r) = (bexp_dnf(l, negated)?, bexp_dnf(r, negated)?);
            let mut out = Vec::new();
            for a in &l {
                for b in &r {
                    out.push(a.iter().chain(b).cloned().collect());
                }
            }
            out
        }
        (BExp::Or(l, r), false) | (BExp::And(l, r), true) => {
            let mut out = bexp_dnf(l, negated)?;
            out.extend(bexp_dnf(r, negated)?);
            out
        }
    };
    Ok(raw
        .into_iter()
        .filter(|conj: &Vec<LinAtom>| !conj.iter().any(LinAtom::is_trivially_false))
        .map(|conj| {
            let mut conj: Vec<LinAtom> = conj.into_iter().filter(|a| !a.is_trivially_true()).collect();
            conj.sort();
            conj.dedup();
            conj
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int_rat, rat};
    use crate::syntax::{parse_bexp, parse_int_expr};

    fn lin(s: &str) -> LinExpr {
        LinExpr::from_int_expr(&parse_int_expr(s).unwrap()).unwrap()
    }

    #[test]
    fn linearize_and_print() {
        assert_eq!(lin("x - 0").to_string(), "x");
        assert_eq!(lin("2*(x - y) + 3").to_string(), "2*x - 2*y + 3");
        assert_eq!(lin("x - x").to_string(), "0");
        assert!(LinExpr::from_int_expr(&parse_int_expr("x*y").unwrap()).is_none());
        assert_eq!(lin("1 - x").to_int_expr().unwrap().to_string(), "1 - x");
        assert_eq!(lin("0 - x").to_int_expr().unwrap().to_string(), "-1 * x");
        assert_eq!(lin("x - y + 1").to_int_expr().unwrap().to_string(), "x - y + 1");
    }

    #[test]
    fn atom_normalization() {
        let a = LinAtom::new(lin("2*x - 3"));
        assert_eq!(a.to_string(), "x - 2 >= 0");
        let a = LinAtom::new(lin("x").scale(&rat(1, 2)).offset(&rat(-1, 3)));
        assert_eq!(a.to_string(), "x - 1 >= 0");
        assert_eq!(a.negate().to_string(), "-x >= 0");
        assert!(LinAtom::new(LinExpr::constant(int_rat(-2))).is_trivially_false());
    }

    #[test]
    fn dnf_of_guards() {
        let d = bexp_dnf(&parse_bexp("x > 0 && x >= 0").unwrap(), false).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].len(), 2);
        let d = bexp_dnf(&parse_bexp("x = 1").unwrap(), true).unwrap();
        assert_eq!(d.len(), 2);
        assert!(bexp_dnf(&parse_bexp("x*x > 0").unwrap(), false).is_err());
        assert_eq!(bexp_dnf(&BExp::True, true).unwrap(), Vec::<Vec<LinAtom>>::new());
    }
}
