//! Attributes, mapping tuples and mapping relations.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::term::Value;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RelationError {
    #[error("mapping relation schema must not be empty")]
    EmptySchema,
    #[error("tuple domain {found} does not match schema {expected}")]
    DomainMismatch { expected: String, found: String },
    #[error("tuples are not compatible on attribute {0}")]
    Incompatible(Attribute),
    #[error("attributes {0} are not in the tuple domain")]
    NotInDomain(String),
    #[error("attribute {0} is already in the schema")]
    AttributeExists(Attribute),
    #[error("projection attributes must be a non-empty subset of the schema, got {0}")]
    BadProjection(String),
    #[error("join inputs share attributes {0}")]
    OverlappingSchemas(String),
    #[error("join pair ({0}, {1}) is not in left x right schema")]
    BadJoinPair(Attribute, Attribute),
    #[error("union of relations with different schemas {0} and {1}")]
    SchemaMismatch(String, String),
}

/// An attribute name. Equality is name equality.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Attribute(Arc<str>);

impl Attribute {
    pub fn new(name: impl AsRef<str>) -> Self {
        Attribute(Arc::from(name.as_ref()))
    }

    pub fn name(&self) -> &str {
        &self.0
    }

    pub fn subject() -> Self {
        Attribute::new("a_s")
    }

    pub fn predicate() -> Self {
        Attribute::new("a_p")
    }

    pub fn object() -> Self {
        Attribute::new("a_o")
    }

    pub fn graph() -> Self {
        Attribute::new("a_g")
    }

    /// `{a_s, a_p, a_o, a_g}`
    pub fn reserved() -> BTreeSet<Attribute> {
        [
            Attribute::subject(),
            Attribute::predicate(),
            Attribute::object(),
            Attribute::graph(),
        ]
        .into_iter()
        .collect()
    }

    pub fn is_reserved(&self) -> bool {
        matches!(self.name(), "a_s" | "a_p" | "a_o" | "a_g")
    }
}

impl fmt::Debug for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Attribute {
    fn from(name: &str) -> Self {
        Attribute::new(name)
    }
}

pub(crate) fn fmt_attrs<'a>(attrs: impl IntoIterator<Item = &'a Attribute>) -> String {
    let names: Vec<&str> = attrs.into_iter().map(Attribute::name).collect();
    format!("{{{}}}", names.join(","))
}

/// A partial function from attributes to terms or the error value.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MappingTuple {
    bindings: BTreeMap<Attribute, Value>,
}

impl MappingTuple {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, attr: impl Into<Attribute>, value: impl Into<Value>) -> Self {
        self.bindings.insert(attr.into(), value.into());
        self
    }

    pub fn insert(&mut self, attr: Attribute, value: Value) -> Option<Value> {
        self.bindings.insert(attr, value)
    }

    /// `None` means the attribute is outside the domain, which is distinct
    /// from `Some(Value::Error)`.
    pub fn get(&self, attr: &Attribute) -> Option<&Value> {
        self.bindings.get(attr)
    }

    pub fn contains(&self, attr: &Attribute) -> bool {
        self.bindings.contains_key(attr)
    }

    pub fn domain(&self) -> impl Iterator<Item = &Attribute> {
        self.bindings.keys()
    }

    pub fn domain_set(&self) -> BTreeSet<Attribute> {
        self.bindings.keys().cloned().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Attribute, &Value)> {
        self.bindings.iter()
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    /// Tuples agree on every shared attribute. `Error` equals only `Error`.
    pub fn compatible(&self, other: &MappingTuple) -> bool {
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        small
            .bindings
            .iter()
            .all(|(a, v)| large.bindings.get(a).is_none_or(|w| v == w))
    }

    pub fn merge(&self, other: &MappingTuple) -> Result<MappingTuple, RelationError> {
        let mut bindings = self.bindings.clone();
        for (a, v) in &other.bindings {
            match bindings.get(a) {
                Some(existing) if existing != v => {
                    return Err(RelationError::Incompatible(a.clone()));
                }
                Some(_) => {}
                None => {
                    bindings.insert(a.clone(), v.clone());
                }
            }
        }
        Ok(MappingTuple { bindings })
    }

    /// `t[P]`
    pub fn restrict(&self, attrs: &BTreeSet<Attribute>) -> Result<MappingTuple, RelationError> {
        let missing: Vec<&Attribute> = attrs.iter().filter(|a| !self.contains(a)).collect();
        if !missing.is_empty() {
            return Err(RelationError::NotInDomain(fmt_attrs(missing)));
        }
        Ok(self.restrict_unchecked(attrs))
    }

    pub(crate) fn restrict_unchecked(&self, attrs: &BTreeSet<Attribute>) -> MappingTuple {
        MappingTuple {
            bindings: self
                .bindings
                .iter()
                .filter(|(a, _)| attrs.contains(a))
                .map(|(a, v)| (a.clone(), v.clone()))
                .collect(),
        }
    }
}

impl FromIterator<(Attribute, Value)> for MappingTuple {
    fn from_iter<I: IntoIterator<Item = (Attribute, Value)>>(iter: I) -> Self {
        MappingTuple {
            bindings: iter.into_iter().collect(),
        }
    }
}

/// A mapping relation: non-empty schema plus a set of tuples whose domain is
/// exactly the schema.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MappingRelation {
    schema: BTreeSet<Attribute>,
    instance: BTreeSet<MappingTuple>,
}

impl MappingRelation {
    pub fn new(
        schema: impl IntoIterator<Item = Attribute>,
        tuples: impl IntoIterator<Item = MappingTuple>,
    ) -> Result<Self, RelationError> {
        let mut relation = Self::empty(schema)?;
        for tuple in tuples {
            relation.insert(tuple)?;
        }
        Ok(relation)
    }

    pub fn empty(schema: impl IntoIterator<Item = Attribute>) -> Result<Self, RelationError> {
        let schema: BTreeSet<Attribute> = schema.into_iter().collect();
        if schema.is_empty() {
            return Err(RelationError::EmptySchema);
        }
        Ok(Self {
            schema,
            instance: BTreeSet::new(),
        })
    }

    /// Adds a tuple; duplicates collapse.
    pub fn insert(&mut self, tuple: MappingTuple) -> Result<bool, RelationError> {
        if !tuple.domain().eq(self.schema.iter()) {
            return Err(RelationError::DomainMismatch {
                expected: fmt_attrs(&self.schema),
                found: fmt_attrs(tuple.domain()),
            });
        }
        Ok(self.instance.insert(tuple))
    }

    pub(crate) fn from_parts_unchecked(
        schema: BTreeSet<Attribute>,
        instance: BTreeSet<MappingTuple>,
    ) -> Self {
        debug_assert!(!schema.is_empty());
        debug_assert!(instance.iter().all(|t| t.domain().eq(schema.iter())));
        Self { schema, instance }
    }

    pub fn schema(&self) -> &BTreeSet<Attribute> {
        &self.schema
    }

    pub fn tuples(&self) -> &BTreeSet<MappingTuple> {
        &self.instance
    }

    pub fn len(&self) -> usize {
        self.instance.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instance.is_empty()
    }

    pub fn contains(&self, tuple: &MappingTuple) -> bool {
        self.instance.contains(tuple)
    }
}

impl fmt::Display for MappingRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", fmt_attrs(&self.schema))?;
        for t in &self.instance {
            let cells: Vec<String> = t.iter().map(|(a, v)| format!("{a}={v}")).collect();
            writeln!(f, "  {}", cells.join(" "))?;
        }
        Ok(())
    }
}
