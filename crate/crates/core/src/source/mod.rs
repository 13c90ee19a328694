//! Source types: how context objects and values are pulled out of a dataset
//! object, and how values become literals.
//!
//! A [`SourceType`] bundles the root-query evaluation (`eval_root`), the
//! context-query evaluation (`eval_context`), and `cast`. A [`DataSource`]
//! pairs a source type with one parsed dataset object. Plans hold sources as
//! `Arc<dyn Source>`, the object-safe view used by the source operator.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use thiserror::Error;

use crate::diagnostics::Diagnostics;
use crate::relation::{Attribute, MappingRelation, RelationError};
use crate::term::RdfTerm;

pub mod csv;
pub mod json;
pub mod jsonpath;
pub mod memory;

pub use self::csv::{CsvDocument, CsvRow, CsvSourceType};
pub use self::json::JsonSourceType;
pub use self::jsonpath::{JsonPath, JsonPathError};
pub use self::memory::{memory_source, MemoryDocument, MemoryRecord, MemorySourceType};

#[derive(Debug, Error)]
pub enum SourceError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("CSV parse error in {path}: {message}")]
    CsvParse { path: String, message: String },
    #[error("JSON parse error in {path}: {message}")]
    JsonParse { path: String, message: String },
    #[error("unsupported {kind} root query {query:?}")]
    UnsupportedQuery { kind: &'static str, query: String },
    #[error(transparent)]
    JsonPath(#[from] JsonPathError),
    #[error("context object is not from this dataset object: {0}")]
    ForeignContext(String),
    #[error("source operator needs a non-empty attribute map")]
    EmptyQueryMap,
    #[error(transparent)]
    Relation(#[from] RelationError),
}

/// A source type. Context queries may fail; the source operator turns such
/// failures into an empty value sequence and a warning.
pub trait SourceType: Send + Sync + 'static {
    type Document: Send + Sync;
    type Context;
    type Item;

    fn kind(&self) -> &'static str;

    fn eval_root(&self, doc: &Self::Document, query: &str) -> Result<Vec<Self::Context>, SourceError>;

    fn eval_context(
        &self,
        doc: &Self::Document,
        ctx: &Self::Context,
        query: &str,
    ) -> Result<Vec<Self::Item>, SourceError>;

    /// `None` when cast is undefined for the value. CSV and JSON casts only
    /// produce literals; the in-memory test source may produce any term.
    fn cast(&self, item: &Self::Item) -> Option<RdfTerm>;

    /// A context query that yields exactly one value per context object,
    /// used when a triples map references no data at all.
    fn benign_query(&self, doc: &Self::Document, root_query: &str) -> Option<String>;
}

/// A source type together with a parsed dataset object.
pub struct DataSource<T: SourceType> {
    source_type: T,
    document: T::Document,
    label: String,
}

impl<T: SourceType> DataSource<T> {
    pub fn new(source_type: T, document: T::Document, label: impl Into<String>) -> Self {
        Self {
            source_type,
            document,
            label: label.into(),
        }
    }

    pub fn source_type(&self) -> &T {
        &self.source_type
    }

    pub fn document(&self) -> &T::Document {
        &self.document
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl<T: SourceType> fmt::Debug for DataSource<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.source_type.kind(), self.label)
    }
}

/// Object-safe view of a data source, as stored in plan nodes.
pub trait Source: Send + Sync + fmt::Debug {
    fn kind(&self) -> &'static str;

    fn label(&self) -> &str;

    /// `kind:label`, stable across runs.
    fn describe(&self) -> String {
        format!("{}:{}", self.kind(), self.label())
    }

    fn check_root_query(&self, query: &str) -> Result<(), SourceError>;

    fn benign_query(&self, root_query: &str) -> Option<String>;

    /// Whether `query` yields at least one value for every context object
    /// selected by `root_query`. Dropping such a query from a source
    /// operator cannot remove tuples.
    fn query_is_total(&self, root_query: &str, query: &str) -> bool;

    /// The mapping relation obtained from this source for a root query and
    /// an attribute-to-query map.
    fn relation(
        &self,
        root_query: &str,
        queries: &BTreeMap<Attribute, String>,
        diagnostics: &Diagnostics,
    ) -> Result<MappingRelation, SourceError>;
}

impl<T: SourceType> Source for DataSource<T> {
    fn kind(&self) -> &'static str {
        self.source_type.kind()
    }

    fn label(&self) -> &str {
        &self.label
    }

    fn check_root_query(&self, query: &str) -> Result<(), SourceError> {
        self.source_type.eval_root(&self.document, query).map(|_| ())
    }

    fn benign_query(&self, root_query: &str) -> Option<String> {
        self.source_type.benign_query(&self.document, root_query)
    }

    fn query_is_total(&self, root_query: &str, query: &str) -> bool {
        let Ok(contexts) = self.source_type.eval_root(&self.document, root_query) else {
            return false;
        };
        contexts.iter().all(|ctx| {
            matches!(self.source_type.eval_context(&self.document, ctx, query), Ok(values) if !values.is_empty())
        })
    }

    fn relation(
        &self,
        root_query: &str,
        queries: &BTreeMap<Attribute, String>,
        diagnostics: &Diagnostics,
    ) -> Result<MappingRelation, SourceError> {
        crate::algebra::ops::source(self, root_query, queries, diagnostics)
    }
}

pub type SharedSource = Arc<dyn Source>;

/// Opens `path` as a CSV data source.
pub fn open_csv(path: &Path, label: impl Into<String>) -> Result<SharedSource, SourceError> {
    let label = label.into();
    let bytes = std::fs::read(path).map_err(|source| SourceError::Io {
        path: path.to_owned(),
        source,
    })?;
    let doc = CsvDocument::parse(&bytes, &label)?;
    Ok(Arc::new(DataSource::new(CsvSourceType, doc, label)))
}

/// Opens `path` as a JSON data source.
pub fn open_json(path: &Path, label: impl Into<String>) -> Result<SharedSource, SourceError> {
    let label = label.into();
    let bytes = std::fs::read(path).map_err(|source| SourceError::Io {
        path: path.to_owned(),
        source,
    })?;
    let doc = json::parse_document(&bytes, &label)?;
    Ok(Arc::new(DataSource::new(JsonSourceType, doc, label)))
}
