//! JSON source type: JSON values are both context and value objects; root
//! queries are `$`-prefixed JSONPath, context queries are relative paths.

use serde_json::Value as Json;

use crate::source::jsonpath::JsonPath;
use crate::source::{SourceError, SourceType};
use crate::term::{Literal, RdfTerm};
use crate::vocab::xsd;

pub fn parse_document(bytes: &[u8], label: &str) -> Result<Json, SourceError> {
    serde_json::from_slice(bytes).map_err(|e| SourceError::JsonParse {
        path: label.to_owned(),
        message: e.to_string(),
    })
}

#[derive(Debug, Clone, Copy, Default)]
pub struct JsonSourceType;

impl SourceType for JsonSourceType {
    type Document = Json;
    type Context = Json;
    type Item = Json;

    fn kind(&self) -> &'static str {
        "json"
    }

    fn eval_root(&self, doc: &Json, query: &str) -> Result<Vec<Json>, SourceError> {
        let path = JsonPath::parse(query)?;
        if !path.is_rooted() {
            return Err(SourceError::UnsupportedQuery {
                kind: "json",
                query: query.to_owned(),
            });
        }
        Ok(path.select(doc).into_iter().cloned().collect())
    }

    fn eval_context(&self, _doc: &Json, ctx: &Json, query: &str) -> Result<Vec<Json>, SourceError> {
        let path = JsonPath::parse(query)?;
        if path.is_rooted() {
            return Err(SourceError::UnsupportedQuery {
                kind: "json context",
                query: query.to_owned(),
            });
        }
        Ok(path.select(ctx).into_iter().cloned().collect())
    }

    fn cast(&self, item: &Json) -> Option<RdfTerm> {
        cast(item).map(RdfTerm::Literal)
    }

    fn benign_query(&self, _doc: &Json, _root_query: &str) -> Option<String> {
        Some(String::new())
    }
}

/// Scalar JSON values to literals. Numbers written without fraction or
/// exponent are `xsd:integer`; other numbers are `xsd:double`.
pub fn cast(value: &Json) -> Option<Literal> {
    match value {
        Json::String(s) => Some(Literal::string(s.clone())),
        Json::Bool(b) => Some(Literal::with_known_datatype(b.to_string(), xsd::BOOLEAN)),
        Json::Number(n) => {
            let text = n.to_string();
            if text.contains(['.', 'e', 'E']) {
                let f: f64 = text.parse().ok()?;
                Some(Literal::with_known_datatype(format!("{f:?}"), xsd::DOUBLE))
            } else {
                Some(Literal::with_known_datatype(canonical_integer(&text), xsd::INTEGER))
            }
        }
        Json::Null | Json::Array(_) | Json::Object(_) => None,
    }
}

fn canonical_integer(text: &str) -> String {
    let (negative, digits) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    let digits = digits.trim_start_matches('0');
    if digits.is_empty() {
        "0".to_owned()
    } else if negative {
        format!("-{digits}")
    } else {
        digits.to_owned()
    }
}
