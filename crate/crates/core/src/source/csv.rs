//! CSV source type: rows are context objects, column names are context
//! queries, the only root query is the empty string.

use crate::source::{SourceError, SourceType};
use crate::term::RdfTerm;

/// A parsed RFC 4180 file: header plus data rows of equal width.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvDocument {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

/// A data row, identified by its position in the file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvRow {
    index: usize,
}

impl CsvRow {
    pub fn index(&self) -> usize {
        self.index
    }
}

impl CsvDocument {
    pub fn parse(bytes: &[u8], label: &str) -> Result<Self, SourceError> {
        let err = |message: String| SourceError::CsvParse {
            path: label.to_owned(),
            message,
        };
        let mut reader = ::csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(false)
            .from_reader(bytes);
        let mut records = reader.records();
        let header: Vec<String> = match records.next() {
            Some(record) => record
                .map_err(|e| err(e.to_string()))?
                .iter()
                .map(str::to_owned)
                .collect(),
            None => return Err(err("missing header row".into())),
        };
        let mut rows = Vec::new();
        for record in records {
            let record = record.map_err(|e| err(e.to_string()))?;
            rows.push(record.iter().map(str::to_owned).collect());
        }
        Ok(Self { header, rows })
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct CsvSourceType;

impl SourceType for CsvSourceType {
    type Document = CsvDocument;
    type Context = CsvRow;
    type Item = String;

    fn kind(&self) -> &'static str {
        "csv"
    }

    fn eval_root(&self, doc: &CsvDocument, query: &str) -> Result<Vec<CsvRow>, SourceError> {
        if !query.is_empty() {
            return Err(SourceError::UnsupportedQuery {
                kind: "csv",
                query: query.to_owned(),
            });
        }
        Ok((0..doc.rows.len()).map(|index| CsvRow { index }).collect())
    }

    /// Unknown columns give the empty sequence.
    fn eval_context(
        &self,
        doc: &CsvDocument,
        row: &CsvRow,
        column: &str,
    ) -> Result<Vec<String>, SourceError> {
        let fields = doc
            .rows
            .get(row.index)
            .ok_or_else(|| SourceError::ForeignContext(format!("row {}", row.index)))?;
        Ok(doc
            .column(column)
            .map(|i| fields[i].clone())
            .into_iter()
            .collect())
    }

    fn cast(&self, item: &String) -> Option<RdfTerm> {
        Some(RdfTerm::string(item.clone()))
    }

    fn benign_query(&self, doc: &CsvDocument, _root_query: &str) -> Option<String> {
        doc.header.first().cloned()
    }
}
