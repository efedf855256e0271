use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::reduction::{step, Configuration, MultiDistribution, Scheduler, SemanticsError};
use crate::rational::Rat;
use crate::syntax::{Command, Store};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Halted(Store),
    Aborted,
    Timeout,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleRun {
    pub cost: Rat,
    pub outcome: Outcome,
    pub steps: usize,
}

/// Draws one entry of `mu` with its exact probability. Mass missing from a
/// subdistribution is never drawn; `mu` must be nonempty.
fn draw<'a>(mu: &'a MultiDistribution, rng: &mut ChaCha8Rng) -> &'a Configuration {
    let entries = mu.entries();
    if entries.len() == 1 {
        return &entries[0].1;
    }
    let denom = entries.iter().fold(num_bigint::BigInt::one(), |acc, (p, _)| acc.lcm(p.denom()));
    let scaled: Vec<BigUint> = entries
        .iter()
        .map(|(p, _)| (p.numer() * (&denom / p.denom())).to_biguint().expect("positive probability"))
        .collect();
    let total: BigUint = scaled.iter().sum();
    let mut r = rng.gen_biguint_below(&total);
    for (w, (_, c)) in scaled.iter().zip(entries) {
        if &r < w {
            return c;
        }
        r -= w;
    }
    unreachable!("draw exceeded total weight")
}

/// One pseudo-random trajectory, deterministic in `seed`.
pub fn sample_run(
    cmd: &Command,
    store: &Store,
    seed: u64,
    sched: &Scheduler,
    max_steps: usize,
) -> Result<SampleRun, SemanticsError> {
    if !sched.is_concrete() {
        return Err(SemanticsError::NonConcreteScheduler);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut conf = Configuration::running(cmd, store);
    let mut cost = Rat::zero();
    let mut steps = 0;
    loop {
        match conf {
            Configuration::Halted(s) => return Ok(SampleRun { cost, outcome: Outcome::Halted(s), steps }),
            Configuration::Aborted => return Ok(SampleRun { cost, outcome: Outcome::Aborted, steps }),
            Configuration::Running(..) if steps >= max_steps => {
                return Ok(SampleRun { cost, outcome: Outcome::Timeout, steps })
            }
            Configuration::Running(..) => {}
        }
        let mut rules = step(&conf);
        let pick = sched.choose(&conf, rules.len()).expect("concrete scheduler");
        let rule = rules.swap_remove(pick);
        cost += rule.weight;
        conf = draw(&rule.target, &mut rng).clone();
        steps += 1;
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimulationStats {
    pub samples: usize,
    pub mean_cost: Rat,
    pub abort_rate: Rat,
    pub timeout_rate: Rat,
}

/// Runs `samples` trajectories whose seeds are drawn from a generator seeded
/// with `seed`.
pub fn simulate(
    cmd: &Command,
    store: &Store,
    samples: usize,
    seed: u64,
    sched: &Scheduler,
    max_steps: usize,
) -> Result<SimulationStats, SemanticsError> {
    let mut seeds = ChaCha8Rng::seed_from_u64(seed);
    let mut total = Rat::zero();
    let (mut aborts, mut timeouts) = (0usize, 0usize);
    for _ in 0..samples {
        let run = sample_run(cmd, store, seeds.next_u64(), sched, max_steps)?;
        total += run.cost;
        match run.outcome {
            Outcome::Aborted => aborts += 1,
            Outcome::Timeout => timeouts += 1,
            Outcome::Halted(_) => {}
        }
    }
    let n = Rat::from_integer(samples.max(1).into());
    Ok(SimulationStats {
        samples,
        mean_cost: total / &n,
        abort_rate: Rat::from_integer(aborts.into()) / &n,
        timeout_rate: Rat::from_integer(timeouts.into()) / &n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int_rat;
    use crate::syntax::parse_program;

    #[test]
    fn deterministic_runs() {
        let c = parse_program("while [x>=0](x>0){ tick(1); x := x-1 }").unwrap();
        for seed in 0..5 {
            let r = sample_run(&c, &Store::from_pairs([("x", 3)]), seed, &Scheduler::Left, 1000).unwrap();
            assert_eq!(r.cost, int_rat(3));
            assert_eq!(r.outcome, Outcome::Halted(Store::new()));
        }
        let r = sample_run(&parse_program("abort").unwrap(), &Store::new(), 7, &Scheduler::Left, 10).unwrap();
        assert_eq!((r.cost, r.outcome), (int_rat(0), Outcome::Aborted));
    }

    #[test]
    fn geometric_mean() {
        let c = parse_program("while [true](x=1){ {x:=0}[1/2]{skip}; tick(1) }").unwrap();
        let stats = simulate(&c, &Store::from_pairs([("x", 1)]), 20_000, 3, &Scheduler::Left, 10_000).unwrap();
        assert!(stats.mean_cost >= Rat::new(19.into(), 10.into()));
        assert!(stats.mean_cost <= Rat::new(21.into(), 10.into()));
        assert!(stats.timeout_rate.is_zero());
    }

    #[test]
    fn seeds_reproduce() {
        let c = parse_program("while [true](x=1){ {x:=0}[1/3]{skip}; tick(1) }").unwrap();
        let s = Store::from_pairs([("x", 1)]);
        let a = sample_run(&c, &s, 11, &Scheduler::Right, 500).unwrap();
        let b = sample_run(&c, &s, 11, &Scheduler::Right, 500).unwrap();
        assert_eq!(a, b);
        assert!(sample_run(&c, &s, 11, &Scheduler::Demonic, 500).is_err());
    }

    #[test]
    fn timeout() {
        let c = parse_program("while [true](true){ tick(1) }").unwrap();
        let r = sample_run(&c, &Store::new(), 0, &Scheduler::Left, 30).unwrap();
        assert_eq!(r.outcome, Outcome::Timeout);
        assert_eq!(r.cost, int_rat(15));
    }
}
