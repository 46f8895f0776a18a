//! Exact matrix seriation.
//!
//! Reorders the rows and columns of a matrix to minimize neighborhood stress
//! or maximize the measure of effectiveness, with native exact engines and
//! mixed-integer models for external solvers. The guide in `book/` walks
//! through every module with runnable examples.
pub mod error;
pub mod heuristics;
pub mod instances;
pub mod io;
pub mod matrix;
pub mod measures;
pub mod milp;
pub mod neighborhoods;
pub mod render;
pub mod solver;
pub mod weights;
pub use error::{Result, SeriationError};
pub use matrix::{apply_permutations, normalize, DenseMatrix, NormalizationInfo, Permutation};
pub use measures::{Measure, Sense, StressParams};
pub use neighborhoods::Neighborhood;
pub use solver::{seriate, Engine, SeriationResult, SolveLimits, SolveOptions, Status};

// Runs the guide's code listings as doctests, one module per chapter.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/matrices.md")]
    mod matrices {}
    #[doc = include_str!("../../../book/src/measures.md")]
    mod measures {}
    #[doc = include_str!("../../../book/src/engines.md")]
    mod engines {}
    #[doc = include_str!("../../../book/src/moore-cross2.md")]
    mod moore_cross2 {}
    #[doc = include_str!("../../../book/src/milp.md")]
    mod milp {}
    #[doc = include_str!("../../../book/src/instances-io.md")]
    mod instances_io {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
