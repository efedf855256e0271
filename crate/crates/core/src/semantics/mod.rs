//! The weighted probabilistic reduction system over configurations, and
//! bounded exhaustive oracles for expected cost and value.

mod oracle;
mod reduction;
mod sample;

pub use oracle::{expected_cost_oracle, expected_value_oracle, run_oracle, OracleError, OracleOptions, OracleResult};
pub use reduction::{
    continue_with, convex_union, step, step_multi, trace, Configuration, MultiDistribution, Scheduler,
    SemanticsError, TraceLine, WeightedRule,
};
pub use sample::{sample_run, simulate, Outcome, SampleRun, SimulationStats};
