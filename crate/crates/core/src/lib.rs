//! Expected-cost analysis for probabilistic while programs.
//!
//! The crate is split along the pipeline:
//!
//! * [`syntax`]: ASTs, the concrete grammar, and store-level evaluation.
//! * [`semantics`]: the weighted probabilistic reduction system over
//!   configurations and exhaustive expected cost/value oracles.
//! * [`transformer`]: the expectation transformer, both as an exact
//!   store-level function and as a symbolic rewrite on cost expressions.
//! * [`analysis`]: loop bound inference through norm decomposition and upper
//!   invariants.
//! * [`solver`]: reduction of cost-expression constraints to linear programs
//!   over template coefficients, and an exact rational simplex.

pub mod analysis;
pub mod generate;
pub mod rational;
pub mod semantics;
pub mod solver;
pub mod syntax;
pub mod transformer;

pub use analysis::{
    analyze_loop, check_upper_invariant, concavity_check, lemma1_gap, select_norms, AnalysisError,
    Analyzer, InvariantVerdict, LoopBoundDerivation, LoopPolicy, Norm, NormShape, Template,
};
pub use rational::{Int, Rat};
pub use semantics::{
    convex_union, expected_cost_oracle, expected_value_oracle, sample_run, step, step_multi,
    Configuration, MultiDistribution, OracleResult, Scheduler, WeightedRule,
};
pub use syntax::{
    parse_cost_expr, parse_program, BExp, CmpOp, Command, CostExpr, DistExpr, IntExpr, ParseError,
    Store, Sym, Var,
};
pub use transformer::{et_semantic, et_symbolic, simplify, subst, CostMode, LoopStrategy};
