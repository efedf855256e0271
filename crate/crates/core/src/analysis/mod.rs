//! Loop bound inference: norm selection, template synthesis and invariant
//! checking on top of the symbolic transformer.

mod concavity;
mod loops;
mod norms;

pub use concavity::{concavity_check, lemma1_gap, ConcavityVerdict, ConcavityWitness, Lemma1Report, Lemma1Row, ShapeProperty};
pub use loops::{
    analyze_loop, check_upper_invariant, loop_labels, AnalysisError, Analyzer, Attempt, InvariantVerdict, LoopBoundDerivation,
    LoopPolicy,
};
pub use norms::{cost_norms, select_norms, Norm, NormShape, Template};
