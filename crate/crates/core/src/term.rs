//! RDF terms and the error value that mapping tuples may carry.

use std::fmt;

use thiserror::Error;

use crate::vocab::xsd;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TermError {
    #[error("invalid IRI <{0}>")]
    InvalidIri(String),
    #[error("invalid datatype IRI <{0}>")]
    InvalidDatatype(String),
    #[error("invalid blank node label {0:?}")]
    InvalidBlankNode(String),
}

/// Syntactic IRI check (RFC 3987 absolute IRI grammar). No resolution.
pub fn is_valid_iri(text: &str) -> bool {
    oxiri::Iri::parse(text).is_ok()
}

/// A literal: lexical form plus datatype IRI. Language tags are not modelled.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    lexical: String,
    datatype: String,
}

impl Literal {
    pub fn new(lexical: impl Into<String>, datatype: impl Into<String>) -> Result<Self, TermError> {
        let datatype = datatype.into();
        if !is_valid_iri(&datatype) {
            return Err(TermError::InvalidDatatype(datatype));
        }
        Ok(Self {
            lexical: lexical.into(),
            datatype,
        })
    }

    /// `(lexical, xsd:string)`.
    pub fn string(lexical: impl Into<String>) -> Self {
        Self {
            lexical: lexical.into(),
            datatype: xsd::STRING.to_owned(),
        }
    }

    pub(crate) fn with_known_datatype(lexical: impl Into<String>, datatype: &'static str) -> Self {
        debug_assert!(is_valid_iri(datatype));
        Self {
            lexical: lexical.into(),
            datatype: datatype.to_owned(),
        }
    }

    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    pub fn datatype(&self) -> &str {
        &self.datatype
    }

    pub fn is_string(&self) -> bool {
        self.datatype == xsd::STRING
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RdfTerm {
    Iri(String),
    BlankNode(String),
    Literal(Literal),
}

impl RdfTerm {
    pub fn iri(text: impl Into<String>) -> Result<Self, TermError> {
        let text = text.into();
        if is_valid_iri(&text) {
            Ok(RdfTerm::Iri(text))
        } else {
            Err(TermError::InvalidIri(text))
        }
    }

    /// IRI from a compile-time constant known to be valid (vocabulary terms).
    pub fn named(text: &'static str) -> Self {
        assert!(is_valid_iri(text), "invalid vocabulary IRI {text}");
        RdfTerm::Iri(text.to_owned())
    }

    pub fn blank(label: impl Into<String>) -> Result<Self, TermError> {
        let label = label.into();
        if label.is_empty() {
            return Err(TermError::InvalidBlankNode(label));
        }
        Ok(RdfTerm::BlankNode(label))
    }

    pub fn literal(lexical: impl Into<String>, datatype: impl Into<String>) -> Result<Self, TermError> {
        Literal::new(lexical, datatype).map(RdfTerm::Literal)
    }

    pub fn string(lexical: impl Into<String>) -> Self {
        RdfTerm::Literal(Literal::string(lexical))
    }

    pub fn is_iri(&self) -> bool {
        matches!(self, RdfTerm::Iri(_))
    }

    pub fn is_blank(&self) -> bool {
        matches!(self, RdfTerm::BlankNode(_))
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, RdfTerm::Literal(_))
    }

    pub fn as_iri(&self) -> Option<&str> {
        match self {
            RdfTerm::Iri(iri) => Some(iri),
            _ => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            RdfTerm::Literal(lit) => Some(lit),
            _ => None,
        }
    }

    /// True if the term may appear as a triple subject or graph name.
    pub fn is_resource(&self) -> bool {
        !self.is_literal()
    }
}

impl From<Literal> for RdfTerm {
    fn from(lit: Literal) -> Self {
        RdfTerm::Literal(lit)
    }
}

impl fmt::Display for RdfTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RdfTerm::Iri(iri) => write!(f, "<{}>", escape_iri(iri)),
            RdfTerm::BlankNode(label) => write!(f, "_:{label}"),
            RdfTerm::Literal(lit) => fmt::Display::fmt(lit, f),
        }
    }
}

impl fmt::Display for Literal {
    // xsd:string literals use the short (simple literal) form.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_string() {
            return write!(f, "\"{}\"", escape_string(&self.lexical));
        }
        write!(
            f,
            "\"{}\"^^<{}>",
            escape_string(&self.lexical),
            escape_iri(&self.datatype)
        )
    }
}

/// Escapes a lexical form for the N-Triples/N-Quads `STRING_LITERAL_QUOTE` production.
pub fn escape_string(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 2);
    for c in text.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            '\u{8}' => out.push_str("\\b"),
            '\u{c}' => out.push_str("\\f"),
            c if (c as u32) < 0x20 || c == '\u{7f}' => {
                out.push_str(&format!("\\u{:04X}", c as u32));
            }
            c => out.push(c),
        }
    }
    out
}

/// Escapes characters that may not appear raw inside `<...>` in N-Quads.
/// Valid IRIs never contain them, so this is a no-op on validated terms.
fn escape_iri(iri: &str) -> String {
    let mut out = String::with_capacity(iri.len());
    for c in iri.chars() {
        match c {
            '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\' => {
                out.push_str(&format!("\\u{:04X}", c as u32))
            }
            c if (c as u32) <= 0x20 => out.push_str(&format!("\\u{:04X}", c as u32)),
            c => out.push(c),
        }
    }
    out
}

/// A binding value: an RDF term or the error value.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Term(RdfTerm),
    Error,
}

impl Value {
    pub fn is_error(&self) -> bool {
        matches!(self, Value::Error)
    }

    pub fn term(&self) -> Option<&RdfTerm> {
        match self {
            Value::Term(t) => Some(t),
            Value::Error => None,
        }
    }

    pub fn literal(&self) -> Option<&Literal> {
        self.term().and_then(RdfTerm::as_literal)
    }

    /// The literal's lexical form when the value is an `xsd:string` literal.
    pub fn string_lexical(&self) -> Option<&str> {
        self.literal().filter(|l| l.is_string()).map(Literal::lexical)
    }
}

impl From<RdfTerm> for Value {
    fn from(term: RdfTerm) -> Self {
        Value::Term(term)
    }
}

impl From<Option<RdfTerm>> for Value {
    fn from(term: Option<RdfTerm>) -> Self {
        term.map_or(Value::Error, Value::Term)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Term(t) => t.fmt(f),
            Value::Error => f.write_str("ε"),
        }
    }
}
