//! Seeded random loop-free programs, stores and cost expressions.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::rational::{int_rat, rat, Rat};
use crate::syntax::{BExp, CmpOp, Command, CostExpr, DistExpr, IntExpr, Store, Var};

#[derive(Clone, Debug)]
pub struct GenConfig {
    pub max_depth: usize,
    pub vars: Vec<Var>,
    pub max_branches: usize,
    pub const_range: i64,
    pub nondeterminism: bool,
    pub probabilistic: bool,
    pub abort: bool,
}

impl Default for GenConfig {
    fn default() -> GenConfig {
        GenConfig {
            max_depth: 4,
            vars: ["x", "y", "z", "w"].into_iter().map(Var::new).collect(),
            max_branches: 3,
            const_range: 3,
            nondeterminism: true,
            probabilistic: true,
            abort: true,
        }
    }
}

fn var_expr(rng: &mut impl Rng, cfg: &GenConfig) -> IntExpr {
    IntExpr::Var(cfg.vars.choose(rng).expect("no variables").clone())
}

pub fn random_int_expr(rng: &mut impl Rng, cfg: &GenConfig) -> IntExpr {
    let k = IntExpr::int(rng.gen_range(-cfg.const_range..=cfg.const_range));
    match rng.gen_range(0..5) {
        0 => k,
        1 => var_expr(rng, cfg),
        2 => var_expr(rng, cfg) + k,
        3 => var_expr(rng, cfg) - k,
        _ => var_expr(rng, cfg) + var_expr(rng, cfg),
    }
}

pub fn random_bexp(rng: &mut impl Rng, cfg: &GenConfig) -> BExp {
    let ops = [CmpOp::Lt, CmpOp::Le, CmpOp::Eq, CmpOp::Ne, CmpOp::Ge, CmpOp::Gt];
    let atom = |rng: &mut _| BExp::cmp(*ops.choose(rng).unwrap(), var_expr(rng, cfg), random_int_expr(rng, cfg));
    match rng.gen_range(0..6) {
        0 => BExp::True,
        1 => BExp::and(atom(rng), atom(rng)),
        2 => BExp::not(atom(rng)),
        _ => atom(rng),
    }
}

fn random_probability(rng: &mut impl Rng) -> Rat {
    [rat(1, 2), rat(1, 3), rat(2, 3), rat(1, 4), rat(3, 4)].choose(rng).unwrap().clone()
}

pub fn random_dist(rng: &mut impl Rng, cfg: &GenConfig) -> DistExpr {
    let n = rng.gen_range(1..=cfg.max_branches.max(1));
    let weights: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=4)).collect();
    let total: i64 = weights.iter().sum();
    let branches = weights.into_iter().map(|w| (rat(w, total), random_int_expr(rng, cfg))).collect();
    DistExpr::new(branches).expect("weights sum to one")
}

fn random_tick(rng: &mut impl Rng) -> Command {
    Command::tick([int_rat(0), int_rat(1), int_rat(2), int_rat(3), rat(1, 2)].choose(rng).unwrap().clone())
}

fn random_leaf(rng: &mut impl Rng, cfg: &GenConfig) -> Command {
    match rng.gen_range(0..10) {
        0 => Command::Skip,
        1 if cfg.abort => Command::Abort,
        2..=4 => random_tick(rng),
        5..=6 if cfg.probabilistic => {
            Command::Assign(cfg.vars.choose(rng).unwrap().clone(), random_dist(rng, cfg))
        }
        _ => Command::Assign(cfg.vars.choose(rng).unwrap().clone(), DistExpr::point(random_int_expr(rng, cfg))),
    }
}

fn command(rng: &mut impl Rng, cfg: &GenConfig, depth: usize) -> Command {
    if depth == 0 || rng.gen_bool(0.25) {
        return random_leaf(rng, cfg);
    }
    let sub = |rng: &mut _| command(rng, cfg, depth - 1);
    match rng.gen_range(0..8) {
        0 | 1 | 2 => Command::seq(sub(rng), sub(rng)),
        3 => {
            let inv = if rng.gen_bool(0.8) { BExp::True } else { random_bexp(rng, cfg) };
            let guard = random_bexp(rng, cfg);
            Command::if_then_else(inv, guard, sub(rng), sub(rng))
        }
        4 if cfg.nondeterminism => Command::ndchoice(sub(rng), sub(rng)),
        5 | 6 if cfg.probabilistic => Command::pchoice(random_probability(rng), sub(rng), sub(rng)),
        _ => Command::seq(sub(rng), sub(rng)),
    }
}

pub fn random_loop_free(rng: &mut impl Rng, cfg: &GenConfig) -> Command {
    command(rng, cfg, cfg.max_depth)
}

pub fn random_store(rng: &mut impl Rng, vars: &[Var], range: i64) -> Store {
    let mut s = Store::new();
    for x in vars {
        s.set(x.clone(), rng.gen_range(-range..=range).into());
    }
    s
}

/// Small coefficient-free cost expressions used as post-expectations.
pub fn cost_pool(vars: &[Var]) -> Vec<CostExpr> {
    let v = |i: usize| IntExpr::Var(vars[i % vars.len()].clone());
    vec![
        CostExpr::zero(),
        CostExpr::constant(int_rat(2)),
        CostExpr::nat(v(0)),
        CostExpr::nat(v(0) + IntExpr::int(1)),
        CostExpr::scale(rat(1, 2), CostExpr::nat(v(1))),
        CostExpr::nat(v(0) - v(1)),
        CostExpr::iverson(BExp::cmp(CmpOp::Gt, v(0), IntExpr::int(0)), CostExpr::nat(v(2))),
        CostExpr::max(CostExpr::nat(v(0)), CostExpr::nat(v(1))),
        CostExpr::nat(v(0)) * CostExpr::nat(v(1)) + CostExpr::one(),
    ]
}

pub fn random_cost_expr(rng: &mut impl Rng, vars: &[Var]) -> CostExpr {
    cost_pool(vars).choose(rng).unwrap().clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn programs_are_loop_free_and_deterministic() {
        let cfg = GenConfig::default();
        for seed in 0..50 {
            let a = random_loop_free(&mut ChaCha8Rng::seed_from_u64(seed), &cfg);
            let b = random_loop_free(&mut ChaCha8Rng::seed_from_u64(seed), &cfg);
            assert_eq!(a, b);
            assert!(!a.contains_loop());
        }
    }
}
