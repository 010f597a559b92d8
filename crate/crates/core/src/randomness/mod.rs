//! Algorithmic randomness on a concrete prefix-free machine, plus the
//! statistical battery.

pub mod complexity;
pub mod machine;
pub mod stats;

pub use complexity::{
    count_c_incompressible, exact_k_small, k_upper_bound, levin_chaitin_margin, omega_lower_bound, Budget,
    ComplexityEstimate, Dyadic, EstimateKind, ExactK, Method, OmegaEstimate,
};
pub use machine::{run_machine, RunOutcome};
pub use stats::{borel_normality_test, monkey_search, TestReport, Verdict};
