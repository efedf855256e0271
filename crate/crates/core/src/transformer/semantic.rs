use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_traits::{One, Zero};

use super::CostMode;
use crate::rational::{max_rat, Rat};
use crate::semantics::Configuration;
use crate::syntax::{eval_bexp, eval_closed, eval_dist, Command, CostExpr, Store};

/// A store-level expectation.
pub type Expectation = Arc<dyn Fn(&Store) -> Rat + Send + Sync>;

pub fn expectation_of(c: &CostExpr) -> Expectation {
    let c = c.clone();
    Arc::new(move |s| eval_closed(&c, s))
}

pub fn constant_expectation(q: Rat) -> Expectation {
    Arc::new(move |_| q.clone())
}

fn memoized(f: impl Fn(&Store) -> Rat + Send + Sync + 'static) -> Expectation {
    let cache: Mutex<HashMap<Store, Rat>> = Mutex::new(HashMap::new());
    Arc::new(move |s| {
        if let Some(v) = cache.lock().expect("cache poisoned").get(s) {
            return v.clone();
        }
        let v = f(s);
        cache.lock().expect("cache poisoned").insert(s.clone(), v.clone());
        v
    })
}

/// The transformer as a function on expectations. Loops are approximated
/// from below by `fuel` Kleene iterations starting at 0.
pub fn et_semantic(mode: CostMode, cmd: &Command, f: Expectation, fuel: usize) -> Expectation {
    match cmd {
        Command::Skip => f,
        Command::Abort => constant_expectation(Rat::zero()),
        Command::Tick(r) => match mode {
            CostMode::Cost => {
                let r = r.clone();
                Arc::new(move |s| &r + f(s))
            }
            CostMode::Value => f,
        },
        Command::Assign(x, d) => {
            let (x, d) = (x.clone(), d.clone());
            Arc::new(move |s| {
                eval_dist(&d, s).into_iter().fold(Rat::zero(), |acc, (v, p)| acc + p * f(&s.with(&x, v)))
            })
        }
        Command::If { inv, guard, then, els } => {
            let t = et_semantic(mode, then, f.clone(), fuel);
            let e = et_semantic(mode, els, f, fuel);
            let (inv, guard) = (inv.clone(), guard.clone());
            Arc::new(move |s| {
                if !eval_bexp(&inv, s) {
                    Rat::zero()
                } else if eval_bexp(&guard, s) {
                    t(s)
                } else {
                    e(s)
                }
            })
        }
        Command::While { inv, guard, body } => {
            let mut w: Expectation = constant_expectation(Rat::zero());
            for _ in 0..fuel {
                let b = et_semantic(mode, body, w, fuel);
                let (inv, guard, f) = (inv.clone(), guard.clone(), f.clone());
                w = memoized(move |s| {
                    if !eval_bexp(&inv, s) {
                        Rat::zero()
                    } else if eval_bexp(&guard, s) {
                        b(s)
                    } else {
                        f(s)
                    }
                });
            }
            w
        }
        Command::NdChoice(a, b) => {
            let l = et_semantic(mode, a, f.clone(), fuel);
            let r = et_semantic(mode, b, f, fuel);
            Arc::new(move |s| max_rat(l(s), r(s)))
        }
        Command::PChoice(p, a, b) => {
            let l = et_semantic(mode, a, f.clone(), fuel);
            let r = et_semantic(mode, b, f, fuel);
            let p = p.clone();
            let q = Rat::one() - &p;
            Arc::new(move |s| {
                let mut v = Rat::zero();
                if !p.is_zero() {
                    v += &p * l(s);
                }
                if !q.is_zero() {
                    v += &q * r(s);
                }
                v
            })
        }
        Command::Seq(a, b) => et_semantic(mode, a, et_semantic(mode, b, f, fuel), fuel),
    }
}

/// The transformer lifted to configurations: halted stores yield `f`, the
/// abnormal halt yields 0.
pub fn et_configuration(mode: CostMode, conf: &Configuration, f: &Expectation, fuel: usize) -> Rat {
    match conf {
        Configuration::Running(c, s) => et_semantic(mode, c, f.clone(), fuel)(s),
        Configuration::Halted(s) => f(s),
        Configuration::Aborted => Rat::zero(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int_rat;
    use crate::syntax::{parse_cost_expr, parse_program};

    #[test]
    fn countdown_fixpoint() {
        let c = parse_program("while [x>=0](x>0){ tick(1); x := x-1 }").unwrap();
        let zero = constant_expectation(Rat::zero());
        let e = et_semantic(CostMode::Cost, &c, zero.clone(), 10);
        assert_eq!(e(&Store::from_pairs([("x", 3)])), int_rat(3));
        let e = et_semantic(CostMode::Cost, &c, zero, 2);
        assert_eq!(e(&Store::from_pairs([("x", 3)])), int_rat(2));
    }

    #[test]
    fn fuel_is_monotone() {
        let c = parse_program("while [true](x=1){ {x:=0}[1/2]{skip}; tick(1) }").unwrap();
        let s = Store::from_pairs([("x", 1)]);
        let mut prev = Rat::zero();
        for k in 0..12 {
            let v = et_semantic(CostMode::Cost, &c, constant_expectation(Rat::zero()), k)(&s);
            assert!(v >= prev);
            prev = v;
        }
        assert!(prev < int_rat(2));
    }

    #[test]
    fn skip_is_identity() {
        let f = expectation_of(&parse_cost_expr("nat(x)").unwrap());
        let e = et_semantic(CostMode::Value, &Command::Skip, f, 1);
        assert_eq!(e(&Store::from_pairs([("x", 4)])), int_rat(4));
        assert_eq!(et_configuration(CostMode::Value, &Configuration::Aborted, &e, 1), int_rat(0));
    }
}
