use std::collections::{HashMap, VecDeque};

use num_traits::{One, Zero};
use thiserror::Error;

use super::reduction::{step, Configuration, Scheduler};
use crate::rational::{max_rat, Rat};
use crate::syntax::{eval_closed, Command, CostExpr, Store};
use crate::transformer::CostMode;

/// Result of exhaustive bounded exploration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleResult {
    /// Expected cost (or value) accumulated within the horizon.
    pub lower: Rat,
    /// Probability mass still running at the horizon.
    pub live_mass: Rat,
    pub configurations: usize,
}

impl OracleResult {
    pub fn is_exact(&self) -> bool {
        self.live_mass.is_zero()
    }
}

#[derive(Clone, Debug)]
pub struct OracleOptions {
    pub horizon: usize,
    pub scheduler: Scheduler,
    pub max_configurations: usize,
}

impl OracleOptions {
    pub fn new(horizon: usize) -> OracleOptions {
        OracleOptions { horizon, scheduler: Scheduler::Demonic, max_configurations: usize::MAX }
    }

    pub fn scheduler(mut self, s: Scheduler) -> OracleOptions {
        self.scheduler = s;
        self
    }

    pub fn max_configurations(mut self, n: usize) -> OracleOptions {
        self.max_configurations = n;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("more than {0} reachable configurations")]
    TooManyConfigurations(usize),
}

struct Rule {
    weight: Rat,
    successors: Vec<(Rat, usize)>,
}

struct Graph {
    confs: Vec<Configuration>,
    depth: Vec<usize>,
    rules: Vec<Vec<Rule>>,
}

fn explore(start: Configuration, opts: &OracleOptions) -> Result<Graph, OracleError> {
    let mut index: HashMap<Configuration, usize> = HashMap::new();
    let mut g = Graph { confs: vec![start.clone()], depth: vec![0], rules: vec![Vec::new()] };
    index.insert(start, 0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let d = g.depth[i];
        if d >= opts.horizon {
            continue;
        }
        let mut rules = Vec::new();
        for rule in step(&g.confs[i]) {
            let mut successors = Vec::with_capacity(rule.target.len());
            for (p, c) in rule.target.entries() {
                let j = match index.get(c) {
                    Some(&j) => j,
                    None => {
                        let j = g.confs.len();
                        if j >= opts.max_configurations {
                            return Err(OracleError::TooManyConfigurations(opts.max_configurations));
                        }
                        index.insert(c.clone(), j);
                        g.confs.push(c.clone());
                        g.depth.push(d + 1);
                        g.rules.push(Vec::new());
                        queue.push_back(j);
                        j
                    }
                };
                successors.push((p.clone(), j));
            }
            rules.push(Rule { weight: rule.weight, successors });
        }
        g.rules[i] = rules;
    }
    Ok(g)
}

/// Backward value iteration over the configurations reachable from
/// `⟨cmd⟩(store)` within `horizon` full-advance steps. Cost mode accumulates
/// tick weights; both modes credit `f` on normally halted stores and nothing
/// on `⊥`. The demonic scheduler maximizes over rules.
pub fn run_oracle(
    mode: CostMode,
    cmd: &Command,
    store: &Store,
    f: &CostExpr,
    opts: &OracleOptions,
) -> Result<OracleResult, OracleError> {
    let g = explore(Configuration::running(cmd, store), opts)?;
    let n = g.confs.len();
    let h = opts.horizon;
    let count_cost = mode == CostMode::Cost;

    let mut value = vec![Rat::zero(); n];
    let mut live = vec![Rat::zero(); n];
    for (i, c) in g.confs.iter().enumerate() {
        match c {
            Configuration::Halted(s) => value[i] = eval_closed(f, s),
            Configuration::Running(..) => live[i] = Rat::one(),
            Configuration::Aborted => {}
        }
    }

    for k in 1..=h {
        let mut next_value = value.clone();
        let mut next_live = live.clone();
        for i in 0..n {
            if g.depth[i] > h - k || !g.confs[i].is_running() {
                continue;
            }
            let rules = &g.rules[i];
            let eval_rule = |r: &Rule| {
                let mut v = if count_cost { r.weight.clone() } else { Rat::zero() };
                let mut l = Rat::zero();
                for (p, j) in &r.successors {
                    v += p * &value[*j];
                    l += p * &live[*j];
                }
                (v, l)
            };
            let (v, l) = match opts.scheduler.choose(&g.confs[i], rules.len()) {
                Some(pick) => eval_rule(&rules[pick]),
                None => rules.iter().map(eval_rule).fold((Rat::zero(), Rat::zero()), |(av, al), (v, l)| {
                    (max_rat(av, v), max_rat(al, l))
                }),
            };
            next_value[i] = v;
            next_live[i] = l;
        }
        value = next_value;
        live = next_live;
    }
    Ok(OracleResult { lower: value.swap_remove(0), live_mass: live.swap_remove(0), configurations: n })
}

/// Lower bound on `ec[cmd](store)` under demonic nondeterminism.
pub fn expected_cost_oracle(cmd: &Command, store: &Store, horizon: usize) -> OracleResult {
    run_oracle(CostMode::Cost, cmd, store, &CostExpr::zero(), &OracleOptions::new(horizon))
        .expect("unbounded exploration")
}

/// Lower bound on `ev[cmd](store)(f)` under demonic nondeterminism.
pub fn expected_value_oracle(cmd: &Command, store: &Store, f: &CostExpr, horizon: usize) -> OracleResult {
    run_oracle(CostMode::Value, cmd, store, f, &OracleOptions::new(horizon)).expect("unbounded exploration")
}
