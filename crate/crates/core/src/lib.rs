//! Knowledge-graph construction over a mapping algebra.
//!
//! RML mappings are parsed and normalized ([`rml`]), translated into algebra
//! [`Plan`]s, optionally rewritten by the [`optimizer`], and executed over
//! CSV and JSON [`source`]s. The resulting [`MappingRelation`] becomes an
//! [`RdfDataset`] serialized as N-Quads.

pub mod algebra;
pub mod construct;
pub mod dataset;
pub mod diagnostics;
pub mod functions;
pub mod isomorphism;
pub mod optimizer;
pub mod relation;
pub mod rml;
pub mod source;
pub mod term;
pub mod vocab;

pub use algebra::{ExtendExpression, Plan};
pub use construct::{construct, ConstructError, ConstructOptions};
pub use dataset::{relation_to_dataset, RdfDataset};
pub use diagnostics::Diagnostics;
pub use functions::{BNodeFactory, FunctionRegistry};
pub use relation::{Attribute, MappingRelation, MappingTuple};
pub use term::{RdfTerm, Value};
