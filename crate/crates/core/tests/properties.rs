use std::collections::BTreeMap;

use num_traits::{One, Zero};
use proptest::prelude::*;
use pwhile_core::generate::{cost_pool, random_bexp, random_dist, random_loop_free, random_store, GenConfig};
use pwhile_core::rational::{int_rat, rat};
use pwhile_core::semantics::{run_oracle, OracleOptions};
use pwhile_core::solver::{eliminate_cases, Constraint, LpVar};
use pwhile_core::syntax::{eval_closed, eval_cost, eval_dist, FreeVars};
use pwhile_core::transformer::et_loop_free;
use pwhile_core::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn small_config() -> GenConfig {
    GenConfig { max_depth: 3, ..GenConfig::default() }
}

fn stores(seed: u64, n: usize) -> Vec<Store> {
    let vars = GenConfig::default().vars;
    let mut r = rng(seed ^ 0x5eed);
    (0..n).map(|_| random_store(&mut r, &vars, 4)).collect()
}

fn pool_expr(i: usize, j: usize, k: usize) -> CostExpr {
    let pool = cost_pool(&GenConfig::default().vars);
    let (a, b, c) = (pool[i % pool.len()].clone(), pool[j % pool.len()].clone(), pool[k % pool.len()].clone());
    match k % 4 {
        0 => a + b,
        1 => CostExpr::max(a, b) + c,
        2 => CostExpr::scale(rat(3, 2), a) * b,
        _ => CostExpr::iverson(BExp::cmp(CmpOp::Le, IntExpr::var("y"), IntExpr::int(1)), a + c),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn print_parse_round_trip(seed in any::<u64>()) {
        let prog = random_loop_free(&mut rng(seed), &GenConfig::default());
        let text = prog.to_string();
        let back = parse_program(&text).unwrap();
        prop_assert_eq!(back.to_string(), text);
        let zero = CostExpr::zero();
        let (a, b) = (et_loop_free(CostMode::Cost, &prog, &zero).unwrap(), et_loop_free(CostMode::Cost, &back, &zero).unwrap());
        for s in stores(seed, 5) {
            prop_assert_eq!(eval_closed(&a, &s), eval_closed(&b, &s));
        }
    }

    #[test]
    fn cost_round_trip(i in 0usize..40, j in 0usize..40, k in 0usize..40) {
        let c = pool_expr(i, j, k);
        let back = parse_cost_expr(&c.to_string()).unwrap();
        for s in stores(k as u64, 5) {
            prop_assert_eq!(eval_closed(&c, &s), eval_closed(&back, &s));
        }
    }

    #[test]
    fn distributions_sum_to_one(seed in any::<u64>()) {
        let cfg = GenConfig::default();
        let d = random_dist(&mut rng(seed), &cfg);
        let total = d.branches().iter().fold(Rat::zero(), |acc, (p, _)| acc + p);
        prop_assert_eq!(total, Rat::one());
        for s in stores(seed, 3) {
            let mass = eval_dist(&d, &s).values().fold(Rat::zero(), |acc, p| acc + p);
            prop_assert_eq!(mass, Rat::one());
        }
    }

    #[test]
    fn cost_expressions_are_nonnegative(i in 0usize..40, j in 0usize..40, k in 0usize..40, seed in any::<u64>()) {
        let c = pool_expr(i, j, k);
        for s in stores(seed, 8) {
            prop_assert!(eval_closed(&c, &s) >= Rat::zero());
        }
    }

    #[test]
    fn iverson_idempotent(seed in any::<u64>(), i in 0usize..9) {
        let phi = random_bexp(&mut rng(seed), &GenConfig::default());
        let c = cost_pool(&GenConfig::default().vars)[i].clone();
        let once = CostExpr::iverson(phi.clone(), c.clone());
        let twice = CostExpr::iverson(phi.clone(), CostExpr::iverson(phi, c));
        for s in stores(seed, 8) {
            prop_assert_eq!(eval_closed(&once, &s), eval_closed(&twice, &s));
        }
        prop_assert_eq!(simplify(&twice), simplify(&once));
    }

    #[test]
    fn simplify_preserves_value(i in 0usize..40, j in 0usize..40, k in 0usize..40, seed in any::<u64>()) {
        let c = pool_expr(i, j, k);
        let s = simplify(&c);
        for st in stores(seed, 8) {
            prop_assert_eq!(eval_closed(&c, &st), eval_closed(&s, &st));
        }
        prop_assert_eq!(simplify(&s), s);
    }

    #[test]
    fn transformer_preserves_nonnegativity(seed in any::<u64>(), i in 0usize..9) {
        let prog = random_loop_free(&mut rng(seed), &small_config());
        let f = cost_pool(&GenConfig::default().vars)[i].clone();
        for mode in [CostMode::Cost, CostMode::Value] {
            let e = et_loop_free(mode, &prog, &f).unwrap();
            for s in stores(seed, 4) {
                prop_assert!(eval_closed(&e, &s) >= Rat::zero());
            }
        }
    }

    #[test]
    fn step_multi_conserves_mass(seed in any::<u64>()) {
        let prog = random_loop_free(&mut rng(seed), &GenConfig::default());
        let s = stores(seed, 1).remove(0);
        let mut mu = MultiDistribution::dirac(Configuration::running(&prog, &s));
        for _ in 0..12 {
            let (w, next) = step_multi(&mu, &Scheduler::Left).unwrap();
            prop_assert!(w >= Rat::zero());
            prop_assert_eq!(next.mass(), Rat::one());
            mu = next;
        }
    }

    #[test]
    fn oracle_monotone_in_horizon(p in 1i64..8, x in 0i64..4) {
        let prog = parse_program(&format!(
            "while [true] (x > 0) {{ {{x := x - 1}}[{p}/8]{{skip}}; tick(1) }}"
        )).unwrap();
        let s = Store::from_pairs([("x", x)]);
        let mut prev = Rat::zero();
        for h in [0usize, 3, 7, 15, 31] {
            let r = expected_cost_oracle(&prog, &s, h);
            prop_assert!(r.lower >= prev);
            prop_assert!(r.live_mass <= Rat::one());
            prev = r.lower;
        }
    }

    #[test]
    fn demonic_dominates(seed in any::<u64>()) {
        let prog = random_loop_free(&mut rng(seed), &small_config());
        let s = stores(seed, 1).remove(0);
        let zero = CostExpr::zero();
        let demonic = run_oracle(CostMode::Cost, &prog, &s, &zero, &OracleOptions::new(60)).unwrap();
        for sched in [Scheduler::Left, Scheduler::Right] {
            let r = run_oracle(CostMode::Cost, &prog, &s, &zero, &OracleOptions::new(60).scheduler(sched)).unwrap();
            prop_assert!(r.lower <= demonic.lower);
        }
    }

    #[test]
    fn elimination_agrees_with_evaluation(seed in any::<u64>(), i in 0usize..9, a in 0i64..6, b in 0i64..6) {
        let cfg = GenConfig::default();
        let premise = random_bexp(&mut rng(seed), &cfg);
        let lhs = cost_pool(&cfg.vars)[i].clone();
        let rhs = CostExpr::coeff(Sym::new("a")) * CostExpr::nat(IntExpr::var("x"))
            + CostExpr::max(CostExpr::nat(IntExpr::var("y")), CostExpr::coeff(Sym::new("b")));
        let c = Constraint::new(premise, lhs, rhs);
        let assignment = BTreeMap::from([(Sym::new("a"), rat(a, 2)), (Sym::new("b"), int_rat(b))]);
        let values: BTreeMap<LpVar, Rat> =
            assignment.iter().map(|(s, v)| (LpVar::Coeff(s.clone()), v.clone())).collect();
        let cases = match eliminate_cases(&c) {
            Ok(cases) => cases,
            Err(_) => return Ok(()),
        };
        let exact = cases.iter().all(|p| p.exact);
        for s in stores(seed, 20) {
            let direct = c.holds_at(&s, &assignment).unwrap();
            let reduced = cases.iter().all(|p| p.holds_at(&s, &values));
            if reduced {
                prop_assert!(direct, "cases hold but constraint fails at {}", s);
            }
            if exact {
                prop_assert_eq!(direct, reduced, "at {}", s);
            }
            if pwhile_core::syntax::eval_bexp(&c.premise, &s) {
                prop_assert!(cases.iter().any(|p| p.premise_holds(&s)) || eval_cost(&c.lhs, &s, &assignment).unwrap().is_zero());
            }
        }
        prop_assert!(c.free_vars().len() <= cfg.vars.len());
    }
}
