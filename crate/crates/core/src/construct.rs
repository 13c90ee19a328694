//! End to end: mapping document in, RDF dataset out.

use std::path::PathBuf;
use std::sync::Arc;

use thiserror::Error;

use crate::algebra::{ExecContext, ExecError, Plan};
use crate::dataset::{relation_to_dataset, DatasetError, RdfDataset};
use crate::diagnostics::Diagnostics;
use crate::functions::{BNodeFactory, FunctionRegistry};
use crate::optimizer::{optimize, Optimized};
use crate::rml::{parse_turtle, translate, ParseError, SourceResolver, TranslateError};

/// Used when no base IRI is given.
pub const DEFAULT_BASE: &str = "http://example.com/base/";

#[derive(Debug, Clone)]
pub struct ConstructOptions {
    pub base: String,
    pub data_root: PathBuf,
    pub optimize: bool,
}

impl ConstructOptions {
    pub fn new(data_root: impl Into<PathBuf>) -> Self {
        Self {
            base: DEFAULT_BASE.to_owned(),
            data_root: data_root.into(),
            optimize: false,
        }
    }
}

#[derive(Debug, Error)]
pub enum ConstructError {
    #[error("parse: {0}")]
    Parse(#[from] ParseError),
    #[error("translate: {0}")]
    Translate(TranslateError),
    #[error("{0}")]
    Source(TranslateError),
    #[error("execute: {0}")]
    Execute(#[from] ExecError),
    #[error("dataset: {0}")]
    Dataset(#[from] DatasetError),
}

impl From<TranslateError> for ConstructError {
    fn from(e: TranslateError) -> Self {
        match e {
            TranslateError::Source { .. } => ConstructError::Source(e),
            e => ConstructError::Translate(e),
        }
    }
}

impl ConstructError {
    /// Process exit status for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            ConstructError::Parse(_) => 2,
            ConstructError::Translate(_) => 3,
            ConstructError::Source(_) | ConstructError::Execute(_) | ConstructError::Dataset(_) => 4,
        }
    }
}

/// The translated plan and, when optimization is on, the optimizer's result.
#[derive(Debug, Clone)]
pub struct Plans {
    pub translated: Plan,
    pub optimized: Option<Optimized>,
}

impl Plans {
    pub fn final_plan(&self) -> &Plan {
        self.optimized.as_ref().map_or(&self.translated, |o| &o.plan)
    }

    /// Text for `--dump-plan`: the translated plan, and with optimization
    /// the optimized plan and the rewrite trace.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        match &self.optimized {
            None => out.push_str(&self.translated.dump()),
            Some(o) => {
                out.push_str("# translated\n");
                out.push_str(&self.translated.dump());
                out.push_str("# optimized\n");
                out.push_str(&o.plan.dump());
                out.push_str("# trace\n");
                out.push_str(&o.trace.to_string());
            }
        }
        out
    }
}

pub fn plan_mapping(
    mapping: &[u8],
    options: &ConstructOptions,
    diagnostics: &Diagnostics,
) -> Result<Plans, ConstructError> {
    let graph = parse_turtle(mapping, &options.base)?;
    let mut resolver = SourceResolver::new(&options.data_root);
    let translated = translate(&graph, &options.base, &mut resolver, diagnostics)?;
    let optimized = options.optimize.then(|| optimize(&translated));
    Ok(Plans { translated, optimized })
}

pub fn execute_plan(plan: &Plan, diagnostics: &Diagnostics) -> Result<RdfDataset, ConstructError> {
    let registry = FunctionRegistry::with_builtins(Arc::new(BNodeFactory::new()));
    let ctx = ExecContext {
        registry: &registry,
        diagnostics,
    };
    let relation = plan.execute(ctx)?;
    Ok(relation_to_dataset(&relation)?)
}

pub fn construct(
    mapping: &[u8],
    options: &ConstructOptions,
    diagnostics: &Diagnostics,
) -> Result<RdfDataset, ConstructError> {
    let plans = plan_mapping(mapping, options, diagnostics)?;
    execute_plan(plans.final_plan(), diagnostics)
}
