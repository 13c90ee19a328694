//! The operators over materialized mapping relations.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::algebra::expr::ExtendExpression;
use crate::diagnostics::Diagnostics;
use crate::functions::{FunctionError, FunctionRegistry};
use crate::relation::{fmt_attrs, Attribute, MappingRelation, MappingTuple, RelationError};
use crate::source::{DataSource, SourceError, SourceType};
use crate::term::Value;

/// The source operator: per context object, the cartesian product of the
/// cast value sequences of every attribute's query.
///
/// A failing context query counts as the empty sequence and is reported on
/// `diagnostics`; a failing root query is an error.
pub fn source<T: SourceType>(
    s: &DataSource<T>,
    root_query: &str,
    queries: &BTreeMap<Attribute, String>,
    diagnostics: &Diagnostics,
) -> Result<MappingRelation, SourceError> {
    if queries.is_empty() {
        return Err(SourceError::EmptyQueryMap);
    }
    let st = s.source_type();
    let doc = s.document();
    let schema: BTreeSet<Attribute> = queries.keys().cloned().collect();
    let mut instance = BTreeSet::new();
    for ctx in st.eval_root(doc, root_query)? {
        let mut columns: Vec<(&Attribute, Vec<Value>)> = Vec::with_capacity(queries.len());
        for (attr, query) in queries {
            let values = match st.eval_context(doc, &ctx, query) {
                Ok(items) => items.iter().map(|i| Value::from(st.cast(i))).collect(),
                Err(e) => {
                    diagnostics.warn(format!(
                        "{}: query {query:?} failed, treated as no values: {e}",
                        s.label()
                    ));
                    Vec::new()
                }
            };
            columns.push((attr, values));
        }
        cartesian(&columns, &mut instance);
    }
    Ok(MappingRelation::from_parts_unchecked(schema, instance))
}

fn cartesian(columns: &[(&Attribute, Vec<Value>)], out: &mut BTreeSet<MappingTuple>) {
    if columns.iter().any(|(_, vs)| vs.is_empty()) {
        return;
    }
    let mut idx = vec![0usize; columns.len()];
    loop {
        out.insert(
            columns
                .iter()
                .zip(&idx)
                .map(|((a, vs), &i)| ((*a).clone(), vs[i].clone()))
                .collect(),
        );
        // odometer increment, last column fastest
        let mut k = columns.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < columns[k].1.len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum OpError {
    #[error(transparent)]
    Relation(#[from] RelationError),
    #[error(transparent)]
    Function(#[from] FunctionError),
}

/// The (a, φ)-extension of `r`.
pub fn extend(
    r: &MappingRelation,
    attr: &Attribute,
    expr: &ExtendExpression,
    registry: &FunctionRegistry,
) -> Result<MappingRelation, OpError> {
    if r.schema().contains(attr) {
        return Err(RelationError::AttributeExists(attr.clone()).into());
    }
    expr.check(registry)?;
    let mut schema = r.schema().clone();
    schema.insert(attr.clone());
    let mut instance = BTreeSet::new();
    for t in r.tuples() {
        let value = expr.eval(t, registry)?;
        instance.insert(t.clone().with(attr.clone(), value));
    }
    Ok(MappingRelation::from_parts_unchecked(schema, instance))
}

/// The P-specific projection of `r`; duplicates collapse.
pub fn project(r: &MappingRelation, attrs: &BTreeSet<Attribute>) -> Result<MappingRelation, RelationError> {
    if attrs.is_empty() || !attrs.is_subset(r.schema()) {
        return Err(RelationError::BadProjection(fmt_attrs(attrs)));
    }
    let instance = r.tuples().iter().map(|t| t.restrict_unchecked(attrs)).collect();
    Ok(MappingRelation::from_parts_unchecked(attrs.clone(), instance))
}

/// Equijoin on attribute pairs `(left, right)`. `Error` matches `Error`.
pub fn equijoin(
    r1: &MappingRelation,
    r2: &MappingRelation,
    pairs: &BTreeSet<(Attribute, Attribute)>,
) -> Result<MappingRelation, RelationError> {
    let overlap: BTreeSet<_> = r1.schema().intersection(r2.schema()).cloned().collect();
    if !overlap.is_empty() {
        return Err(RelationError::OverlappingSchemas(fmt_attrs(&overlap)));
    }
    for (a1, a2) in pairs {
        if !r1.schema().contains(a1) || !r2.schema().contains(a2) {
            return Err(RelationError::BadJoinPair(a1.clone(), a2.clone()));
        }
    }
    let key = |t: &MappingTuple, pick: fn(&(Attribute, Attribute)) -> &Attribute| -> Vec<Value> {
        pairs
            .iter()
            .map(|p| t.get(pick(p)).expect("join attribute in schema").clone())
            .collect()
    };
    let mut index: HashMap<Vec<Value>, Vec<&MappingTuple>> = HashMap::new();
    for t2 in r2.tuples() {
        index.entry(key(t2, |p| &p.1)).or_default().push(t2);
    }
    let mut instance = BTreeSet::new();
    for t1 in r1.tuples() {
        if let Some(matches) = index.get(&key(t1, |p| &p.0)) {
            for t2 in matches {
                instance.insert(t1.merge(t2)?);
            }
        }
    }
    let schema = r1.schema().union(r2.schema()).cloned().collect();
    Ok(MappingRelation::from_parts_unchecked(schema, instance))
}

pub fn union(r1: &MappingRelation, r2: &MappingRelation) -> Result<MappingRelation, RelationError> {
    if r1.schema() != r2.schema() {
        return Err(RelationError::SchemaMismatch(
            fmt_attrs(r1.schema()),
            fmt_attrs(r2.schema()),
        ));
    }
    let instance = r1.tuples().union(r2.tuples()).cloned().collect();
    Ok(MappingRelation::from_parts_unchecked(r1.schema().clone(), instance))
}
