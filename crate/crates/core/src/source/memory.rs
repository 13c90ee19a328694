//! In-memory source type used by tests and the equivalence verifier.
//!
//! Each context object is a map from query names to value sequences; values
//! are terms or `Error`, and `cast` maps `Error` to "undefined".

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::relation::MappingRelation;
use crate::source::{DataSource, SharedSource, SourceError, SourceType};
use crate::term::{RdfTerm, Value};

pub type MemoryRecord = BTreeMap<String, Vec<Value>>;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MemoryDocument {
    pub records: Vec<MemoryRecord>,
}

impl MemoryDocument {
    /// One record per tuple, keyed by attribute name, so that a source over
    /// the document with queries `a -> a` reproduces the relation.
    pub fn from_relation(relation: &MappingRelation) -> Self {
        let records = relation
            .tuples()
            .iter()
            .map(|t| {
                t.iter()
                    .map(|(a, v)| (a.name().to_owned(), vec![v.clone()]))
                    .collect()
            })
            .collect();
        Self { records }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct MemorySourceType;

impl SourceType for MemorySourceType {
    type Document = MemoryDocument;
    type Context = usize;
    type Item = Value;

    fn kind(&self) -> &'static str {
        "memory"
    }

    fn eval_root(&self, doc: &MemoryDocument, query: &str) -> Result<Vec<usize>, SourceError> {
        if !query.is_empty() {
            return Err(SourceError::UnsupportedQuery {
                kind: "memory",
                query: query.to_owned(),
            });
        }
        Ok((0..doc.records.len()).collect())
    }

    fn eval_context(
        &self,
        doc: &MemoryDocument,
        ctx: &usize,
        query: &str,
    ) -> Result<Vec<Value>, SourceError> {
        let record = doc
            .records
            .get(*ctx)
            .ok_or_else(|| SourceError::ForeignContext(format!("record {ctx}")))?;
        Ok(record.get(query).cloned().unwrap_or_default())
    }

    fn cast(&self, item: &Value) -> Option<RdfTerm> {
        item.term().cloned()
    }

    fn benign_query(&self, doc: &MemoryDocument, _root_query: &str) -> Option<String> {
        doc.records.first()?.keys().next().cloned()
    }
}

pub fn memory_source(document: MemoryDocument, label: impl Into<String>) -> SharedSource {
    Arc::new(DataSource::new(MemorySourceType, document, label))
}
