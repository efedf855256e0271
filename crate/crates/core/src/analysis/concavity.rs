use std::fmt;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::loops::AnalysisError;
use super::norms::{Norm, NormShape};
use crate::rational::{fmt_rat, int_rat, rat, Rat};
use crate::syntax::{eval_closed, Command, CostExpr, Store};
use crate::transformer::{et_loop_free, CostMode};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShapeProperty {
    Concavity,
    Monotonicity,
}

/// Points where `h(p*r + (1-p)*s) < p*h(r) + (1-p)*h(s)`, or where `r >= s`
/// but `h(r) < h(s)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConcavityWitness {
    pub property: ShapeProperty,
    pub r: Vec<Rat>,
    pub s: Vec<Rat>,
    pub p: Rat,
}

impl fmt::Display for ConcavityWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = |xs: &[Rat]| xs.iter().map(fmt_rat).collect::<Vec<_>>().join(", ");
        match self.property {
            ShapeProperty::Concavity => {
                write!(f, "not concave: r = ({}), s = ({}), p = {}", v(&self.r), v(&self.s), fmt_rat(&self.p))
            }
            ShapeProperty::Monotonicity => write!(f, "not monotone: r = ({}) >= s = ({})", v(&self.r), v(&self.s)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConcavityVerdict {
    Pass,
    Fail(ConcavityWitness),
}

impl ConcavityVerdict {
    pub fn passed(&self) -> bool {
        matches!(self, ConcavityVerdict::Pass)
    }
}

fn probe(h: &NormShape, base: &[Rat], i: usize, a: &Rat, b: &Rat, p: &Rat) -> Option<ConcavityWitness> {
    let mut r = base.to_vec();
    let mut s = base.to_vec();
    r[i] = a.clone();
    s[i] = b.clone();
    let mut mix = base.to_vec();
    mix[i] = p * a + (Rat::one() - p) * b;
    let (hr, hs) = (h.eval(&r), h.eval(&s));
    if h.eval(&mix) < p * &hr + (Rat::one() - p) * &hs {
        return Some(ConcavityWitness { property: ShapeProperty::Concavity, r, s, p: p.clone() });
    }
    if a >= b && hr < hs {
        return Some(ConcavityWitness { property: ShapeProperty::Monotonicity, r, s, p: p.clone() });
    }
    None
}

/// Coordinate-wise concavity and monotonicity of `h` on nonnegative inputs:
/// an exhaustive pass over small values, then `trials` seeded random probes.
pub fn concavity_check(h: &NormShape, trials: usize) -> ConcavityVerdict {
    let k = h.arity();
    if k == 0 {
        return ConcavityVerdict::Pass;
    }
    let small: Vec<Rat> = (0..4).map(int_rat).collect();
    let ps = [rat(1, 2), rat(1, 4), rat(3, 4)];
    let mut bases = vec![vec![Rat::zero(); k]];
    if k <= 3 {
        bases = (0..3usize.pow(k as u32))
            .map(|mut n| {
                (0..k)
                    .map(|_| {
                        let d = n % 3;
                        n /= 3;
                        int_rat(d as i64)
                    })
                    .collect()
            })
            .collect();
    }
    for base in &bases {
        for i in 0..k {
            for a in &small {
                for b in &small {
                    for p in &ps {
                        if let Some(w) = probe(h, base, i, a, b, p) {
                            return ConcavityVerdict::Fail(w);
                        }
                    }
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for _ in 0..trials {
        let base: Vec<Rat> = (0..k).map(|_| int_rat(rng.gen_range(0..=20))).collect();
        let i = rng.gen_range(0..k);
        let a = int_rat(rng.gen_range(0..=20));
        let b = int_rat(rng.gen_range(0..=20));
        let p = rat(rng.gen_range(1..16), 16);
        if let Some(w) = probe(h, &base, i, &a, &b, &p) {
            return ConcavityVerdict::Fail(w);
        }
    }
    ConcavityVerdict::Pass
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lemma1Row {
    pub store: Store,
    /// `et[C](h(g))`
    pub lhs: Rat,
    /// `ect[C](0) + h(evt[C](g_1), ..., evt[C](g_k))`
    pub rhs: Rat,
}

impl Lemma1Row {
    pub fn gap(&self) -> Rat {
        &self.lhs - &self.rhs
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lemma1Report {
    pub rows: Vec<Lemma1Row>,
    /// Largest `lhs - rhs`; positive means the decomposition inequality fails.
    pub max_gap: Rat,
}

impl Lemma1Report {
    pub fn violations(&self) -> impl Iterator<Item = &Lemma1Row> {
        self.rows.iter().filter(|r| r.lhs > r.rhs)
    }
}

/// Compares both sides of the decomposition inequality for a loop-free
/// command at each store.
pub fn lemma1_gap(cmd: &Command, h: &NormShape, norms: &[Norm], stores: &[Store]) -> Result<Lemma1Report, AnalysisError> {
    let unsupported = |detail: &str| AnalysisError::Unsupported { label: "-".to_string(), detail: detail.to_string() };
    if norms.len() != h.arity() {
        return Err(unsupported("norm count does not match the shape arity"));
    }
    let args: Vec<CostExpr> = norms.iter().map(Norm::cost).collect();
    let lhs = et_loop_free(CostMode::Cost, cmd, &h.compose(&args)).ok_or_else(|| unsupported("command contains a loop"))?;
    let cost = et_loop_free(CostMode::Cost, cmd, &CostExpr::zero()).ok_or_else(|| unsupported("command contains a loop"))?;
    let expected: Vec<CostExpr> = args
        .iter()
        .map(|g| et_loop_free(CostMode::Value, cmd, g).ok_or_else(|| unsupported("command contains a loop")))
        .collect::<Result<_, _>>()?;
    let mut rows = Vec::with_capacity(stores.len());
    let mut max_gap: Option<Rat> = None;
    for s in stores {
        let values: Vec<Rat> = expected.iter().map(|e| eval_closed(e, s)).collect();
        let row = Lemma1Row { store: s.clone(), lhs: eval_closed(&lhs, s), rhs: eval_closed(&cost, s) + h.eval(&values) };
        let gap = row.gap();
        if max_gap.as_ref().is_none_or(|m| gap > *m) {
            max_gap = Some(gap);
        }
        rows.push(row);
    }
    Ok(Lemma1Report { rows, max_gap: max_gap.unwrap_or_else(Rat::zero) })
}
