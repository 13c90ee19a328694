//! A brute-force model of the source operator over JSON documents.

use serde_json::Value as Json;

use kgc_core::term::{RdfTerm, Value};
use kgc_core::vocab::xsd;
use kgc_core::{Attribute, MappingTuple};

/// Direct navigation for paths of the form `name`, `name[*]` and
/// `name.name`. A name step only applies to objects.
pub fn navigate<'a>(ctx: &'a Json, path: &str) -> Vec<&'a Json> {
    let mut current = vec![ctx];
    for step in path.split('.') {
        let (name, all) = match step.strip_suffix("[*]") {
            Some(n) => (n, true),
            None => (step, false),
        };
        current = current
            .into_iter()
            .filter_map(|v| v.as_object().and_then(|o| o.get(name)))
            .flat_map(|v| match (all, v) {
                (true, Json::Array(items)) => items.iter().collect::<Vec<_>>(),
                (true, _) => Vec::new(),
                (false, v) => vec![v],
            })
            .collect();
    }
    current
}

pub fn cast(v: &Json) -> Value {
    let typed = |lex: String, dt: &str| Value::from(RdfTerm::literal(lex, dt).unwrap());
    match v {
        Json::String(s) => RdfTerm::string(s.clone()).into(),
        Json::Bool(b) => typed(b.to_string(), xsd::BOOLEAN),
        Json::Number(n) if n.is_i64() || n.is_u64() => typed(n.to_string(), xsd::INTEGER),
        Json::Number(n) => typed(format!("{:?}", n.as_f64().unwrap()), xsd::DOUBLE),
        _ => Value::Error,
    }
}

pub fn values(ctx: &Json, path: &str) -> Vec<Value> {
    navigate(ctx, path).into_iter().map(cast).collect()
}

/// Every combination of one value per attribute.
pub fn product(columns: &[(Attribute, Vec<Value>)]) -> Vec<MappingTuple> {
    columns.iter().fold(vec![MappingTuple::new()], |acc, (attr, values)| {
        acc.iter()
            .flat_map(|t| values.iter().map(move |v| t.clone().with(attr.clone(), v.clone())))
            .collect()
    })
}
