use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use super::linear::{LinAtom, LinExpr};
use crate::rational::{fmt_rat, Rat};
use crate::syntax::{Store, Sym, Var};

/// Unknowns of the linear programs: template coefficients and auxiliary
/// certificate multipliers. All are implicitly nonnegative.
#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum LpVar {
    Coeff(Sym),
    Aux(usize),
}

impl fmt::Display for LpVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LpVar::Coeff(s) => write!(f, "{}", s.name()),
            LpVar::Aux(i) => write!(f, "l{i}"),
        }
    }
}

/// `constant + Σ c_v · v` over LP unknowns.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Affine {
    pub constant: Rat,
    pub terms: BTreeMap<LpVar, Rat>,
}

impl Affine {
    pub fn constant(c: Rat) -> Affine {
        Affine { constant: c, terms: BTreeMap::new() }
    }

    pub fn var(v: LpVar) -> Affine {
        Affine { constant: Rat::zero(), terms: BTreeMap::from([(v, Rat::one())]) }
    }

    pub fn is_zero(&self) -> bool {
        self.constant.is_zero() && self.terms.is_empty()
    }

    pub fn as_constant(&self) -> Option<&Rat> {
        self.terms.is_empty().then_some(&self.constant)
    }

    pub fn add_scaled(&mut self, other: &Affine, k: &Rat) {
        if k.is_zero() {
            return;
        }
        self.constant += &other.constant * k;
        for (v, c) in &other.terms {
            let slot = self.terms.entry(v.clone()).or_insert_with(Rat::zero);
            *slot += c * k;
            if slot.is_zero() {
                self.terms.remove(v);
            }
        }
    }

    pub fn add_term(&mut self, v: LpVar, k: &Rat) {
        self.add_scaled(&Affine::var(v), k);
    }

    pub fn scale(&self, k: &Rat) -> Affine {
        let mut out = Affine::default();
        out.add_scaled(self, k);
        out
    }

    pub fn eval(&self, values: &BTreeMap<LpVar, Rat>) -> Rat {
        self.terms.iter().fold(self.constant.clone(), |acc, (v, c)| {
            acc + c * values.get(v).cloned().unwrap_or_else(Rat::zero)
        })
    }
}

impl fmt::Display for Affine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (v, c) in &self.terms {
            let (neg, mag) = (c.is_negative(), c.abs());
            match (first, neg) {
                (true, true) => f.write_str("-")?,
                (true, false) => {}
                (false, true) => f.write_str(" - ")?,
                (false, false) => f.write_str(" + ")?,
            }
            if mag.is_one() {
                write!(f, "{v}")?;
            } else {
                write!(f, "{} {v}", fmt_rat(&mag))?;
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

/// Product of program variables with exponents; empty for the constant
/// monomial.
pub type Monomial = BTreeMap<Var, u32>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoefficientProduct;

/// Polynomial over program variables whose coefficients are affine in the LP
/// unknowns.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, Affine>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly::default()
    }

    pub fn constant(c: Rat) -> Poly {
        Poly::from_affine(Affine::constant(c))
    }

    pub fn from_affine(a: Affine) -> Poly {
        let mut p = Poly::zero();
        if !a.is_zero() {
            p.terms.insert(Monomial::new(), a);
        }
        p
    }

    pub fn coeff(s: Sym) -> Poly {
        Poly::from_affine(Affine::var(LpVar::Coeff(s)))
    }

    pub fn from_lin(e: &LinExpr) -> Poly {
        let mut p = Poly::constant(e.constant_term().clone());
        for (x, c) in e.coeffs() {
            p.terms.insert(Monomial::from([(x.clone(), 1)]), Affine::constant(c.clone()));
        }
        p
    }

    pub fn from_atom(a: &LinAtom) -> Poly {
        Poly::from_lin(a.expr())
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, Affine> {
        &self.terms
    }

    pub fn coefficient(&self, m: &Monomial) -> Affine {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|m| m.values().sum()).max().unwrap_or(0)
    }

    pub fn is_coefficient_free(&self) -> bool {
        self.terms.values().all(|a| a.terms.is_empty())
    }

    fn add_monomial(&mut self, m: Monomial, a: &Affine, k: &Rat) {
        let slot = self.terms.entry(m.clone()).or_default();
        slot.add_scaled(a, k);
        if slot.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, a) in &other.terms {
            out.add_monomial(m.clone(), a, &Rat::one());
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, a) in &other.terms {
            out.add_monomial(m.clone(), a, &-Rat::one());
        }
        out
    }

    pub fn scale(&self, k: &Rat) -> Poly {
        let mut out = Poly::zero();
        for (m, a) in &self.terms {
            out.add_monomial(m.clone(), a, k);
        }
        out
    }

    /// Fails when both factors carry LP unknowns in the same product term.
    pub fn mul(&self, other: &Poly) -> Result<Poly, CoefficientProduct> {
        let mut out = Poly::zero();
        for (m1, a1) in &self.terms {
            for (m2, a2) in &other.terms {
                let (factor, k) = match (a1.as_constant(), a2.as_constant()) {
                    (Some(k), _) => (a2, k),
                    (_, Some(k)) => (a1, k),
                    _ => return Err(CoefficientProduct),
                };
                let mut m = m1.clone();
                for (x, e) in m2 {
                    *m.entry(x.clone()).or_insert(0) += e;
                }
                out.add_monomial(m, factor, k);
            }
        }
        Ok(out)
    }

    /// Linear form when the polynomial has degree at most one and no LP
    /// unknowns.
    pub fn as_linear(&self) -> Option<LinExpr> {
        if self.degree() > 1 || !self.is_coefficient_free() {
            return None;
        }
        let mut e = LinExpr::default();
        for (m, a) in &self.terms {
            match m.iter().next() {
                None => e = e.offset(&a.constant),
                Some((x, _)) => e = e.add(&LinExpr::var(x.clone()).scale(&a.constant)),
            }
        }
        Some(e)
    }

    pub fn eval(&self, store: &Store, values: &BTreeMap<LpVar, Rat>) -> Rat {
        self.terms.iter().fold(Rat::zero(), |acc, (m, a)| {
            let mv = m.iter().fold(Rat::one(), |acc, (x, e)| {
                acc * num_traits::pow(Rat::from_integer(store.get(x)), *e as usize)
            });
            acc + a.eval(values) * mv
        })
    }
}

fn fmt_monomial(m: &Monomial) -> String {
    m.iter()
        .map(|(x, e)| if *e == 1 { x.to_string() } else { format!("{x}^{e}") })
        .collect::<Vec<_>>()
        .join("*")
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .rev()
            .map(|(m, a)| match (m.is_empty(), a.as_constant()) {
                (true, _) => format!("({a})"),
                (false, Some(c)) if c.is_one() => fmt_monomial(m),
                (false, _) => format!("({a})*{}", fmt_monomial(m)),
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int_rat;
    use crate::syntax::parse_int_expr;

    fn lin(s: &str) -> Poly {
        Poly::from_lin(&LinExpr::from_int_expr(&parse_int_expr(s).unwrap()).unwrap())
    }

    #[test]
    fn arithmetic() {
        let q = Poly::coeff(Sym::new("q"));
        let x = lin("x");
        let p = q.mul(&x).unwrap().sub(&q.mul(&lin("x - 1")).unwrap()).sub(&Poly::constant(int_rat(1)));
        assert_eq!(p.degree(), 0);
        let k = p.coefficient(&Monomial::new());
        assert_eq!(k.to_string(), "q - 1");
        assert!(q.mul(&q).is_err());
        let sq = x.mul(&lin("x + 1")).unwrap();
        assert_eq!(sq.degree(), 2);
        let vals = BTreeMap::new();
        assert_eq!(sq.eval(&Store::from_pairs([("x", 3)]), &vals), int_rat(12));
        assert_eq!(lin("2*x - 1").as_linear().unwrap().to_string(), "2*x - 1");
    }
}
