//! Extension functions and the name-indexed registry extend expressions use.
//!
//! Every built-in is total over terms and `Error`, and returns `Error` when
//! any argument is `Error`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use thiserror::Error;

use crate::term::{is_valid_iri, Literal, RdfTerm, Value};
use crate::vocab::xsd;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FunctionError {
    #[error("unknown extension function {0:?}")]
    Unknown(String),
    #[error("extension function {name} takes {expected} argument(s), got {found}")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
    },
}

pub const TO_INT: &str = "toInt";
pub const TO_IRI: &str = "toIRI";
pub const TO_BNODE: &str = "toBNode";
pub const TO_LITERAL: &str = "toLiteral";
pub const CONCAT: &str = "concat";

type Apply = dyn Fn(&[Value]) -> Value + Send + Sync;

#[derive(Clone)]
pub struct ExtensionFunction {
    name: String,
    arity: usize,
    apply: Arc<Apply>,
}

impl ExtensionFunction {
    pub fn new(
        name: impl Into<String>,
        arity: usize,
        apply: impl Fn(&[Value]) -> Value + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            arity,
            apply: Arc::new(apply),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Panics if `args.len()` differs from the arity; plans are validated
    /// before execution so this does not happen on validated plans.
    pub fn apply(&self, args: &[Value]) -> Value {
        assert_eq!(args.len(), self.arity, "arity mismatch for {}", self.name);
        (self.apply)(args)
    }
}

impl fmt::Debug for ExtensionFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

/// Injective map from strings to blank-node labels, stable for one run.
#[derive(Debug, Default)]
pub struct BNodeFactory {
    labels: Mutex<HashMap<String, String>>,
}

impl BNodeFactory {
    pub fn new() -> Self {
        Self::default()
    }

    /// Get-or-insert; labels are `b` plus a zero-padded insertion counter.
    pub fn label_for(&self, text: &str) -> String {
        let mut labels = self.labels.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(label) = labels.get(text) {
            return label.clone();
        }
        let label = format!("b{:06}", labels.len());
        labels.insert(text.to_owned(), label.clone());
        label
    }

    pub fn len(&self) -> usize {
        self.labels.lock().unwrap_or_else(|e| e.into_inner()).len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// `toInt`: `xsd:string` literals in the `xsd:integer` lexical space become
/// `xsd:integer` literals with the same lexical form.
pub fn to_int(v: &Value) -> Value {
    match v.string_lexical() {
        Some(lex) if is_integer_lexical(lex) => {
            Value::Term(Literal::with_known_datatype(lex, xsd::INTEGER).into())
        }
        _ => Value::Error,
    }
}

/// Optional sign followed by one or more ASCII digits.
pub fn is_integer_lexical(lex: &str) -> bool {
    let digits = lex.strip_prefix(['+', '-']).unwrap_or(lex);
    !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
}

/// `toIRI`: a string literal that is a valid IRI, else `base` concatenated
/// with it if that is valid. The base is plain string concatenation, not
/// RFC 3986 reference resolution.
pub fn to_iri(v: &Value, base: &Value) -> Value {
    let (Some(lex), Some(base)) = (v.string_lexical(), base.term().and_then(RdfTerm::as_iri)) else {
        return Value::Error;
    };
    if is_valid_iri(lex) {
        return Value::Term(RdfTerm::Iri(lex.to_owned()));
    }
    let joined = format!("{base}{lex}");
    if is_valid_iri(&joined) {
        Value::Term(RdfTerm::Iri(joined))
    } else {
        Value::Error
    }
}

pub fn to_bnode(v: &Value, factory: &BNodeFactory) -> Value {
    match v.string_lexical() {
        Some(lex) => Value::Term(RdfTerm::BlankNode(factory.label_for(lex))),
        None => Value::Error,
    }
}

/// `toLiteral`: retypes an `xsd:string` literal with the datatype IRI `dt`.
pub fn to_literal(v: &Value, dt: &Value) -> Value {
    match (v.string_lexical(), dt.term().and_then(RdfTerm::as_iri)) {
        (Some(lex), Some(dt)) => Value::Term(RdfTerm::Literal(
            Literal::new(lex, dt).expect("IRI terms are valid datatype IRIs"),
        )),
        _ => Value::Error,
    }
}

pub fn concat(v1: &Value, v2: &Value) -> Value {
    match (v1.string_lexical(), v2.string_lexical()) {
        (Some(a), Some(b)) => Value::Term(RdfTerm::string(format!("{a}{b}"))),
        _ => Value::Error,
    }
}

/// Name-indexed set of extension functions.
#[derive(Debug, Clone)]
pub struct FunctionRegistry {
    functions: BTreeMap<String, ExtensionFunction>,
    bnodes: Arc<BNodeFactory>,
}

impl FunctionRegistry {
    /// Registry with the five built-ins; `toBNode` uses `bnodes`.
    pub fn with_builtins(bnodes: Arc<BNodeFactory>) -> Self {
        let mut registry = Self {
            functions: BTreeMap::new(),
            bnodes: bnodes.clone(),
        };
        registry.register(ExtensionFunction::new(TO_INT, 1, |a| to_int(&a[0])));
        registry.register(ExtensionFunction::new(TO_IRI, 2, |a| to_iri(&a[0], &a[1])));
        registry.register(ExtensionFunction::new(TO_BNODE, 1, move |a| {
            to_bnode(&a[0], &bnodes)
        }));
        registry.register(ExtensionFunction::new(TO_LITERAL, 2, |a| {
            to_literal(&a[0], &a[1])
        }));
        registry.register(ExtensionFunction::new(CONCAT, 2, |a| concat(&a[0], &a[1])));
        registry
    }

    pub fn register(&mut self, function: ExtensionFunction) {
        self.functions.insert(function.name.clone(), function);
    }

    pub fn lookup(&self, name: &str) -> Result<&ExtensionFunction, FunctionError> {
        self.functions
            .get(name)
            .ok_or_else(|| FunctionError::Unknown(name.to_owned()))
    }

    pub fn bnodes(&self) -> &Arc<BNodeFactory> {
        &self.bnodes
    }
}

impl Default for FunctionRegistry {
    fn default() -> Self {
        Self::with_builtins(Arc::new(BNodeFactory::new()))
    }
}
