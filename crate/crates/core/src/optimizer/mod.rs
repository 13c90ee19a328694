//! Plan rewriting: the equivalence rules, the fixed pipeline that applies
//! them, and an execution-based checker.

pub mod pipeline;
pub mod rules;
pub mod verify;

pub use pipeline::{measure, optimize, Measure, Optimized, RewriteStep, RewriteTrace};
pub use rules::{JoinDirection, RewriteError, Rule};
pub use verify::{check_rule, verify_equivalence, RuleFamily, RuleReport, VerifyError};
