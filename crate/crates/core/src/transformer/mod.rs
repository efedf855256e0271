//! Expectation transformers: exact store-level functions and symbolic
//! rewriting on cost expressions.

mod semantic;
mod simplify;
mod symbolic;

use std::fmt;

pub use semantic::{constant_expectation, et_configuration, et_semantic, expectation_of, Expectation};
pub use simplify::{normalize_int, simplify, subst};
pub use symbolic::{et_loop_free, et_symbolic, et_with};

/// Whether tick costs are counted (`ect`) or only the post-expectation is
/// propagated (`evt`).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum CostMode {
    Cost,
    Value,
}

impl fmt::Display for CostMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CostMode::Cost => "cost",
            CostMode::Value => "value",
        })
    }
}

/// How a loop bound is obtained.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum LoopStrategy {
    /// Norm decomposition of the loop body.
    Decompose,
    /// Template upper invariant checked directly.
    Invariant,
    /// Finite unrolling certified as an upper invariant.
    Unroll(usize),
}

impl fmt::Display for LoopStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoopStrategy::Decompose => f.write_str("decompose"),
            LoopStrategy::Invariant => f.write_str("invariant"),
            LoopStrategy::Unroll(k) => write!(f, "unroll({k})"),
        }
    }
}
