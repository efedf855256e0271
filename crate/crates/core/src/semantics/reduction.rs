use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::rational::{fmt_rat, Rat};
use crate::syntax::{eval_bexp, eval_dist, Command, FreeVars, Store};

/// `⟨C⟩(σ)`, a halted store, or the abnormal halt `⊥`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Configuration {
    Running(Arc<Command>, Store),
    Halted(Store),
    Aborted,
}

impl Configuration {
    pub fn running(cmd: &Command, store: &Store) -> Configuration {
        Configuration::Running(Arc::new(cmd.clone()), store.clone())
    }

    pub fn is_running(&self) -> bool {
        matches!(self, Configuration::Running(..))
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Configuration::Running(c, s) => write!(f, "<{c}>({})", s.render_over(&c.free_vars())),
            Configuration::Halted(s) => write!(f, "{s}"),
            Configuration::Aborted => f.write_str("_|_"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("entry probability {0} is outside (0,1]")]
    BadProbability(String),
    #[error("multidistribution mass {0} exceeds 1")]
    MassExceeded(String),
    #[error("operation requires a concrete scheduler")]
    NonConcreteScheduler,
}

/// A finite multiset of probability-weighted configurations with total mass
/// at most one. Equal configurations are kept as separate entries.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct MultiDistribution {
    entries: Vec<(Rat, Configuration)>,
}

impl MultiDistribution {
    pub fn new(entries: Vec<(Rat, Configuration)>) -> Result<MultiDistribution, SemanticsError> {
        let mut total = Rat::zero();
        for (p, _) in &entries {
            if p <= &Rat::zero() || p > &Rat::one() {
                return Err(SemanticsError::BadProbability(fmt_rat(p)));
            }
            total += p;
        }
        if total > Rat::one() {
            return Err(SemanticsError::MassExceeded(fmt_rat(&total)));
        }
        Ok(MultiDistribution { entries })
    }

    pub fn dirac(c: Configuration) -> MultiDistribution {
        MultiDistribution { entries: vec![(Rat::one(), c)] }
    }

    pub fn empty() -> MultiDistribution {
        MultiDistribution::default()
    }

    pub fn entries(&self) -> &[(Rat, Configuration)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn mass(&self) -> Rat {
        self.entries.iter().map(|(p, _)| p).sum()
    }

    pub fn running_mass(&self) -> Rat {
        self.entries.iter().filter(|(_, c)| c.is_running()).map(|(p, _)| p).sum()
    }

    /// Multiset equality: same entries up to reordering, duplicates counted.
    pub fn multiset_eq(&self, other: &MultiDistribution) -> bool {
        if self.entries.len() != other.entries.len() {
            return false;
        }
        let mut used = vec![false; other.entries.len()];
        'outer: for e in &self.entries {
            for (i, o) in other.entries.iter().enumerate() {
                if !used[i] && e == o {
                    used[i] = true;
                    continue 'outer;
                }
            }
            return false;
        }
        true
    }

    fn map_configs(&self, f: impl Fn(&Configuration) -> Configuration) -> MultiDistribution {
        MultiDistribution { entries: self.entries.iter().map(|(p, c)| (p.clone(), f(c))).collect() }
    }
}

impl fmt::Display for MultiDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.entries.iter().map(|(p, c)| format!("{}: {c}", fmt_rat(p))).collect();
        write!(f, "{{{{{}}}}}", parts.join(", "))
    }
}

/// `γ →^w μ`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct WeightedRule {
    pub weight: Rat,
    pub target: MultiDistribution,
}

impl WeightedRule {
    fn dirac(weight: Rat, c: Configuration) -> WeightedRule {
        WeightedRule { weight, target: MultiDistribution::dirac(c) }
    }
}

/// All one-step rules applicable to `conf`. Halted and aborted
/// configurations have none; nondeterministic choice yields two rules, left
/// first.
pub fn step(conf: &Configuration) -> Vec<WeightedRule> {
    match conf {
        Configuration::Running(cmd, store) => step_command(cmd, store),
        Configuration::Halted(_) | Configuration::Aborted => Vec::new(),
    }
}

fn step_command(cmd: &Arc<Command>, store: &Store) -> Vec<WeightedRule> {
    let zero = Rat::zero;
    let running = |c: &Arc<Command>| Configuration::Running(c.clone(), store.clone());
    match &**cmd {
        Command::Skip => vec![WeightedRule::dirac(zero(), Configuration::Halted(store.clone()))],
        Command::Abort => vec![WeightedRule::dirac(zero(), Configuration::Aborted)],
        Command::Tick(r) => vec![WeightedRule::dirac(r.clone(), Configuration::Halted(store.clone()))],
        Command::Assign(x, d) => {
            let entries = eval_dist(d, store)
                .into_iter()
                .map(|(v, p)| (p, Configuration::Halted(store.with(x, v))))
                .collect();
            vec![WeightedRule { weight: zero(), target: MultiDistribution { entries } }]
        }
        Command::If { inv, guard, then, els } => {
            let next = if !eval_bexp(inv, store) {
                Configuration::Aborted
            } else if eval_bexp(guard, store) {
                running(then)
            } else {
                running(els)
            };
            vec![WeightedRule::dirac(zero(), next)]
        }
        Command::While { inv, guard, body } => {
            let next = if !eval_bexp(inv, store) {
                Configuration::Aborted
            } else if eval_bexp(guard, store) {
                Configuration::Running(Arc::new(Command::Seq(body.clone(), cmd.clone())), store.clone())
            } else {
                Configuration::Halted(store.clone())
            };
            vec![WeightedRule::dirac(zero(), next)]
        }
        Command::NdChoice(a, b) => {
            vec![WeightedRule::dirac(zero(), running(a)), WeightedRule::dirac(zero(), running(b))]
        }
        Command::PChoice(p, a, b) => {
            let mut entries = Vec::with_capacity(2);
            if !p.is_zero() {
                entries.push((p.clone(), running(a)));
            }
            let q = Rat::one() - p;
            if !q.is_zero() {
                entries.push((q, running(b)));
            }
            vec![WeightedRule { weight: zero(), target: MultiDistribution { entries } }]
        }
        Command::Seq(first, rest) => step_command(first, store)
            .into_iter()
            .map(|rule| WeightedRule {
                weight: rule.weight,
                target: rule.target.map_configs(|c| continue_with(c, rest)),
            })
            .collect(),
    }
}

/// Lifts a configuration of `C` to one of `C; D`.
pub fn continue_with(c: &Configuration, rest: &Arc<Command>) -> Configuration {
    match c {
        Configuration::Running(cmd, s) => {
            Configuration::Running(Arc::new(Command::Seq(cmd.clone(), rest.clone())), s.clone())
        }
        Configuration::Halted(s) => Configuration::Running(rest.clone(), s.clone()),
        Configuration::Aborted => Configuration::Aborted,
    }
}

/// `⊎ p_i · μ_i`, keeping every entry.
pub fn convex_union(parts: &[(Rat, MultiDistribution)]) -> MultiDistribution {
    let entries = parts
        .iter()
        .flat_map(|(p, mu)| mu.entries.iter().map(move |(q, c)| (p * q, c.clone())))
        .collect();
    MultiDistribution { entries }
}

/// Resolution of nondeterministic choice.
#[derive(Clone)]
pub enum Scheduler {
    /// Maximize expected cost/value. Only meaningful for the oracles.
    Demonic,
    Left,
    Right,
    /// Picks a rule index given the configuration and the number of rules.
    Policy(Arc<dyn Fn(&Configuration, usize) -> usize + Send + Sync>),
}

impl fmt::Debug for Scheduler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scheduler::Demonic => f.write_str("Demonic"),
            Scheduler::Left => f.write_str("Left"),
            Scheduler::Right => f.write_str("Right"),
            Scheduler::Policy(_) => f.write_str("Policy(..)"),
        }
    }
}

impl Scheduler {
    pub fn is_concrete(&self) -> bool {
        !matches!(self, Scheduler::Demonic)
    }

    /// Selected rule index, or `None` for the demonic scheduler.
    pub fn choose(&self, conf: &Configuration, rules: usize) -> Option<usize> {
        if rules <= 1 {
            return Some(0);
        }
        match self {
            Scheduler::Demonic => None,
            Scheduler::Left => Some(0),
            Scheduler::Right => Some(rules - 1),
            Scheduler::Policy(f) => Some(f(conf, rules).min(rules - 1)),
        }
    }
}

/// One full-advance step of a multidistribution: every running entry takes
/// its scheduled rule, terminal entries stay put.
pub fn step_multi(mu: &MultiDistribution, sched: &Scheduler) -> Result<(Rat, MultiDistribution), SemanticsError> {
    if !sched.is_concrete() {
        return Err(SemanticsError::NonConcreteScheduler);
    }
    let mut weight = Rat::zero();
    let mut parts = Vec::with_capacity(mu.len());
    for (p, conf) in &mu.entries {
        let mut rules = step(conf);
        if rules.is_empty() {
            parts.push((p.clone(), MultiDistribution::dirac(conf.clone())));
            continue;
        }
        let pick = sched.choose(conf, rules.len()).expect("concrete scheduler");
        let rule = rules.swap_remove(pick);
        weight += p * &rule.weight;
        parts.push((p.clone(), rule.target));
    }
    Ok((weight, convex_union(&parts)))
}

/// One line of a reduction trace.
#[derive(Clone, Debug)]
pub struct TraceLine {
    pub index: usize,
    pub weight: Rat,
    pub state: MultiDistribution,
}

impl fmt::Display for TraceLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t{}\t{}", self.index, fmt_rat(&self.weight), self.state)
    }
}

/// Runs `steps` multidistribution steps and records each one. Stops early
/// once nothing is running.
pub fn trace(mu: &MultiDistribution, sched: &Scheduler, steps: usize) -> Result<Vec<TraceLine>, SemanticsError> {
    let mut out = vec![TraceLine { index: 0, weight: Rat::zero(), state: mu.clone() }];
    let mut cur = mu.clone();
    for index in 1..=steps {
        if cur.running_mass().is_zero() {
            break;
        }
        let (weight, next) = step_multi(&cur, sched)?;
        out.push(TraceLine { index, weight, state: next.clone() });
        cur = next;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;
    use crate::syntax::parse_program;

    fn run(src: &str, store: &Store) -> Configuration {
        Configuration::running(&parse_program(src).unwrap(), store)
    }

    #[test]
    fn tick_rule() {
        let s = Store::from_pairs([("x", 1)]);
        let rules = step(&run("tick(3/2)", &s));
        assert_eq!(rules, vec![WeightedRule::dirac(rat(3, 2), Configuration::Halted(s))]);
    }

    #[test]
    fn prob_choice_rule() {
        let s = Store::new();
        let rules = step(&run("{tick(1)}[1/4]{tick(2)}", &s));
        assert_eq!(rules.len(), 1);
        assert_eq!(rules[0].weight, rat(0, 1));
        let expected = MultiDistribution::new(vec![
            (rat(1, 4), run("tick(1)", &s)),
            (rat(3, 4), run("tick(2)", &s)),
        ])
        .unwrap();
        assert_eq!(rules[0].target, expected);
    }

    #[test]
    fn abort_while_rule() {
        let s = Store::from_pairs([("x", -1)]);
        let rules = step(&run("while [x >= 0] (x > 0) { tick(1) }", &s));
        assert_eq!(rules, vec![WeightedRule::dirac(rat(0, 1), Configuration::Aborted)]);
    }

    #[test]
    fn assign_rule() {
        let s = Store::from_pairs([("x", 5)]);
        let rules = step(&run("x := {1/2: 0, 1/2: 2}", &s));
        let x = crate::syntax::Var::new("x");
        let expected = MultiDistribution::new(vec![
            (rat(1, 2), Configuration::Halted(s.with(&x, 0.into()))),
            (rat(1, 2), Configuration::Halted(s.with(&x, 2.into()))),
        ])
        .unwrap();
        assert_eq!(rules, vec![WeightedRule { weight: rat(0, 1), target: expected }]);
    }

    #[test]
    fn choice_and_terminal_rules() {
        let s = Store::new();
        assert_eq!(step(&run("{skip} <> {abort}", &s)).len(), 2);
        assert!(step(&Configuration::Halted(s)).is_empty());
        assert!(step(&Configuration::Aborted).is_empty());
    }

    #[test]
    fn convex_union_keeps_duplicates() {
        let a = Configuration::Halted(Store::from_pairs([("a", 1)]));
        let b = Configuration::Halted(Store::from_pairs([("b", 1)]));
        let mu1 = MultiDistribution::dirac(a.clone());
        let mu2 = MultiDistribution::new(vec![(rat(1, 3), a.clone()), (rat(1, 2), b.clone())]).unwrap();
        let u = convex_union(&[(rat(1, 2), mu1.clone()), (rat(1, 2), mu2)]);
        let expected =
            MultiDistribution::new(vec![(rat(1, 2), a.clone()), (rat(1, 6), a), (rat(1, 4), b)]).unwrap();
        assert!(u.multiset_eq(&expected));
        assert_eq!(u.len(), 3);
        assert!(convex_union(&[(rat(1, 1), mu1.clone())]).multiset_eq(&mu1));
        assert!(convex_union(&[]).is_empty());
    }

    #[test]
    fn multi_step_weights() {
        let s = Store::new();
        let mu = MultiDistribution::dirac(run("tick(2)", &s));
        let (w, nu) = step_multi(&mu, &Scheduler::Left).unwrap();
        assert_eq!(w, rat(2, 1));
        assert_eq!(nu, MultiDistribution::dirac(Configuration::Halted(s.clone())));

        let mu = MultiDistribution::new(vec![
            (rat(1, 2), run("tick(2)", &s)),
            (rat(1, 2), Configuration::Halted(s.clone())),
        ])
        .unwrap();
        let (w, nu) = step_multi(&mu, &Scheduler::Left).unwrap();
        assert_eq!(w, rat(1, 1));
        let halted = Configuration::Halted(s.clone());
        assert!(nu.multiset_eq(&MultiDistribution::new(vec![(rat(1, 2), halted.clone()), (rat(1, 2), halted)]).unwrap()));

        let mu = MultiDistribution::dirac(Configuration::Halted(s.clone()));
        assert_eq!(step_multi(&mu, &Scheduler::Left).unwrap(), (rat(0, 1), mu.clone()));
        assert_eq!(step_multi(&mu, &Scheduler::Demonic), Err(SemanticsError::NonConcreteScheduler));
    }

    #[test]
    fn invalid_multidistributions() {
        let h = Configuration::Aborted;
        assert!(MultiDistribution::new(vec![(rat(0, 1), h.clone())]).is_err());
        assert!(MultiDistribution::new(vec![(rat(2, 3), h.clone()), (rat(2, 3), h)]).is_err());
    }

    #[test]
    fn trace_lines() {
        let mu = MultiDistribution::dirac(run("tick(1); tick(2)", &Store::new()));
        let lines = trace(&mu, &Scheduler::Left, 10).unwrap();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[1].weight, rat(1, 1));
        assert_eq!(lines[2].to_string(), "2\t2\t{{1: {}}}");
    }
}
