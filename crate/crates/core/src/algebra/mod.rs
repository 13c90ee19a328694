//! The mapping algebra: extend expressions, the operators over relations,
//! and plans built from them.

pub mod expr;
pub mod ops;
pub mod plan;

pub use expr::ExtendExpression;
pub use plan::{ExecContext, ExecError, Plan, PlanError};
