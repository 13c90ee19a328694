//! Translation of a normalized mapping graph into an algebra plan.

use std::cell::Cell;
use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::algebra::{ExtendExpression, Plan};
use crate::diagnostics::Diagnostics;
use crate::functions::{CONCAT, TO_BNODE, TO_IRI, TO_LITERAL};
use crate::relation::Attribute;
use crate::rml::graph::Graph;
use crate::rml::normalize::{normalize, NormalizeError};
use crate::rml::template::{split_template, TemplatePart};
use crate::source::{self, SharedSource, SourceError};
use crate::term::{is_valid_iri, RdfTerm};
use crate::vocab::{ql, rml, rr, xsd};

#[derive(Debug, Error)]
pub enum TranslateError {
    #[error(transparent)]
    Normalize(#[from] NormalizeError),
    #[error("base IRI {0:?} is not a valid IRI")]
    BadBase(String),
    #[error("triples map {triples_map}: {message}")]
    Mapping { triples_map: String, message: String },
    #[error("triples map {triples_map}: {error}")]
    Source {
        triples_map: String,
        #[source]
        error: SourceError,
    },
}

/// Opens data sources named by `rml:source`, relative to a data root. Each
/// file is opened once per resolver, so triples maps over the same file
/// share one source.
#[derive(Debug, Default)]
pub struct SourceResolver {
    data_root: PathBuf,
    cache: BTreeMap<(String, String), SharedSource>,
}

impl SourceResolver {
    pub fn new(data_root: impl Into<PathBuf>) -> Self {
        Self {
            data_root: data_root.into(),
            cache: BTreeMap::new(),
        }
    }

    pub fn data_root(&self) -> &Path {
        &self.data_root
    }

    /// Pre-registers a source for a given reference formulation and
    /// `rml:source` value, bypassing the file system.
    pub fn register(&mut self, formulation: &str, name: &str, source: SharedSource) {
        self.cache.insert((formulation.to_owned(), name.to_owned()), source);
    }

    fn open(&mut self, formulation: &str, name: &str) -> Result<SharedSource, SourceError> {
        let key = (formulation.to_owned(), name.to_owned());
        if let Some(s) = self.cache.get(&key) {
            return Ok(s.clone());
        }
        let path = self.data_root.join(name);
        let s = if formulation == ql::CSV {
            source::open_csv(&path, name)?
        } else {
            source::open_json(&path, name)?
        };
        self.cache.insert(key, s.clone());
        Ok(s)
    }
}

/// Hands out attributes `a1`, `a2`, ... that are never reused within one
/// translation.
#[derive(Debug, Default)]
pub struct AttributeGenerator {
    next: Cell<usize>,
}

impl AttributeGenerator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn fresh(&self) -> Attribute {
        let n = self.next.get() + 1;
        self.next.set(n);
        Attribute::new(format!("a{n}"))
    }
}

fn mapping_err(tm: &RdfTerm, message: impl Into<String>) -> TranslateError {
    TranslateError::Mapping {
        triples_map: tm.to_string(),
        message: message.into(),
    }
}

fn literal_lexicals(g: &Graph, s: &RdfTerm, p: &str) -> Vec<String> {
    g.objects(s, p)
        .into_iter()
        .filter_map(|o| o.as_literal().map(|l| l.lexical().to_owned()))
        .collect()
}

/// The data source and root query described by the logical source of `tm`.
pub fn src_and_root_query(
    tm: &RdfTerm,
    g: &Graph,
    resolver: &mut SourceResolver,
) -> Result<(SharedSource, String), TranslateError> {
    let ls = g
        .object(tm, rml::LOGICAL_SOURCE)
        .ok_or_else(|| mapping_err(tm, "no rml:logicalSource"))?;
    let name = literal_lexicals(g, &ls, rml::SOURCE)
        .into_iter()
        .next()
        .ok_or_else(|| mapping_err(tm, "logical source has no rml:source file name"))?;
    let formulation = g
        .object(&ls, rml::REFERENCE_FORMULATION)
        .ok_or_else(|| mapping_err(tm, "logical source has no rml:referenceFormulation"))?;
    let formulation = formulation.as_iri().unwrap_or_default().to_owned();
    let root_query = match formulation.as_str() {
        ql::CSV => String::new(),
        ql::JSON_PATH => literal_lexicals(g, &ls, rml::ITERATOR)
            .into_iter()
            .next()
            .unwrap_or_else(|| "$".to_owned()),
        other => {
            return Err(mapping_err(tm, format!("unsupported reference formulation <{other}>")));
        }
    };
    let source = resolver
        .open(&formulation, &name)
        .map_err(|error| TranslateError::Source {
            triples_map: tm.to_string(),
            error,
        })?;
    source
        .check_root_query(&root_query)
        .map_err(|e| mapping_err(tm, format!("bad iterator {root_query:?}: {e}")))?;
    Ok((source, root_query))
}

/// The query strings used below `root`: references, template placeholders
/// and join-condition child queries in its rooted subgraph, plus parent
/// queries of join conditions that name `tm` as parent.
pub fn collect_queries(tm: &RdfTerm, root: &RdfTerm, g: &Graph) -> Result<BTreeSet<String>, TranslateError> {
    let sub = g.rooted_subgraph(root);
    let mut queries = BTreeSet::new();
    for (_, o) in sub.pairs(rml::REFERENCE) {
        if let Some(l) = o.as_literal() {
            queries.insert(l.lexical().to_owned());
        }
    }
    for (_, o) in sub.pairs(rr::TEMPLATE) {
        if let Some(l) = o.as_literal() {
            let parts = split_template(l.lexical()).map_err(|e| mapping_err(tm, e.to_string()))?;
            for part in parts {
                if let TemplatePart::Query(q) = part {
                    queries.insert(q);
                }
            }
        }
    }
    for (_, o) in sub.pairs(rr::CHILD) {
        if let Some(l) = o.as_literal() {
            queries.insert(l.lexical().to_owned());
        }
    }
    for rom in g.subjects(rr::PARENT_TRIPLES_MAP, tm) {
        for jc in g.objects(&rom, rr::JOIN_CONDITION) {
            queries.extend(literal_lexicals(g, &jc, rr::PARENT));
        }
    }
    Ok(queries)
}

/// Binds each query below `root` to a fresh attribute. `root` is the
/// triples map itself, or the subject map of a parent triples map.
pub fn extract_queries(
    tm: &RdfTerm,
    root: &RdfTerm,
    g: &Graph,
    fresh: &AttributeGenerator,
) -> Result<BTreeMap<Attribute, String>, TranslateError> {
    Ok(collect_queries(tm, root, g)?
        .into_iter()
        .map(|q| (fresh.fresh(), q))
        .collect())
}

fn inverse<'a>(p: &'a BTreeMap<Attribute, String>, query: &str) -> Option<&'a Attribute> {
    p.iter().find(|(_, q)| q.as_str() == query).map(|(a, _)| a)
}

fn string_const(s: impl Into<String>) -> ExtendExpression {
    ExtendExpression::Const(RdfTerm::string(s))
}

/// The extend expression for term map `u`.
///
/// Reference-valued object maps become literals unless they explicitly
/// declare `rr:termType rr:IRI`.
pub fn create_ext_expr(
    u: &RdfTerm,
    g: &Graph,
    base: &str,
    p: &BTreeMap<Attribute, String>,
) -> Result<ExtendExpression, String> {
    if let Some(c) = g.object(u, rr::CONSTANT) {
        return Ok(ExtendExpression::Const(c));
    }
    let lookup = |q: &str| {
        inverse(p, q)
            .cloned()
            .map(ExtendExpression::Attr)
            .ok_or_else(|| format!("query {q:?} has no attribute"))
    };
    let reference = literal_lexicals(g, u, rml::REFERENCE).into_iter().next();
    let phi = if let Some(r) = &reference {
        lookup(r)?
    } else if let Some(t) = literal_lexicals(g, u, rr::TEMPLATE).into_iter().next() {
        let mut parts = split_template(&t).map_err(|e| e.to_string())?.into_iter();
        let mut phi = match parts.next() {
            Some(TemplatePart::Text(s)) => string_const(s),
            _ => unreachable!("split_template starts with a normal substring"),
        };
        for part in parts {
            let next = match part {
                TemplatePart::Query(q) => lookup(&q)?,
                TemplatePart::Text(s) => string_const(s),
            };
            phi = ExtendExpression::func(CONCAT, vec![phi, next]);
        }
        phi
    } else {
        return Err(format!("term map {u} has no rr:constant, rml:reference or rr:template"));
    };
    let term_type = g.object(u, rr::TERM_TYPE);
    let is_type = |t: &str| term_type.as_ref().and_then(RdfTerm::as_iri) == Some(t);
    let datatype = g.objects(u, rr::DATATYPE).into_iter().find(RdfTerm::is_iri);
    let to_literal = |phi, dt: RdfTerm| ExtendExpression::func(TO_LITERAL, vec![phi, ExtendExpression::Const(dt)]);
    Ok(if is_type(rr::BLANK_NODE) {
        ExtendExpression::func(TO_BNODE, vec![phi])
    } else if let Some(dt) = datatype {
        to_literal(phi, dt)
    } else if is_type(rr::LITERAL)
        || (reference.is_some() && !g.subjects(rr::OBJECT_MAP, u).is_empty() && !is_type(rr::IRI))
    {
        to_literal(phi, RdfTerm::named(xsd::STRING))
    } else {
        ExtendExpression::func(
            TO_IRI,
            vec![phi, ExtendExpression::Const(RdfTerm::Iri(base.to_owned()))],
        )
    })
}

/// The attribute-to-query map for a source, or, when the triples map
/// references no data, a single attribute bound to a query that yields one
/// value per context object.
fn queries_or_benign(
    tm: &RdfTerm,
    root: &RdfTerm,
    g: &Graph,
    source: &SharedSource,
    root_query: &str,
    fresh: &AttributeGenerator,
) -> Result<BTreeMap<Attribute, String>, TranslateError> {
    let p = extract_queries(tm, root, g, fresh)?;
    if !p.is_empty() {
        return Ok(p);
    }
    let q = source
        .benign_query(root_query)
        .ok_or_else(|| mapping_err(tm, "source has no column or value to iterate over"))?;
    Ok(BTreeMap::from([(fresh.fresh(), q)]))
}

fn single(g: &Graph, tm: &RdfTerm, s: &RdfTerm, p: &str, what: &str) -> Result<RdfTerm, TranslateError> {
    let mut objects = g.objects(s, p);
    match objects.len() {
        1 => Ok(objects.remove(0)),
        0 => Err(mapping_err(tm, format!("no {what}"))),
        n => Err(mapping_err(tm, format!("{n} {what}s after normalization"))),
    }
}

/// Normalizes `graph` and translates it into a plan whose result has the
/// attributes `a_s, a_p, a_o, a_g`. Triples maps are visited in term order.
pub fn translate(
    graph: &Graph,
    base: &str,
    resolver: &mut SourceResolver,
    diagnostics: &Diagnostics,
) -> Result<Plan, TranslateError> {
    if !is_valid_iri(base) {
        return Err(TranslateError::BadBase(base.to_owned()));
    }
    let g = normalize(graph)?;
    translate_normalized(&g, base, resolver, diagnostics)
}

/// Translation of a graph that is already in normal form.
pub fn translate_normalized(
    g: &Graph,
    base: &str,
    resolver: &mut SourceResolver,
    diagnostics: &Diagnostics,
) -> Result<Plan, TranslateError> {
    let fresh = AttributeGenerator::new();
    let spog = Attribute::reserved();
    let mut acc = Plan::empty(spog.iter().cloned());
    let tms: BTreeSet<RdfTerm> = g
        .pairs(rr::PREDICATE_OBJECT_MAP)
        .into_iter()
        .map(|(tm, _)| tm)
        .collect();
    for tm in &tms {
        let ext = |u: &RdfTerm, p: &BTreeMap<Attribute, String>| {
            create_ext_expr(u, g, base, p).map_err(|m| mapping_err(tm, m))
        };
        let (s, q) = src_and_root_query(tm, g, resolver)?;
        let sm = single(g, tm, tm, rr::SUBJECT_MAP, "subject map")?;
        let p = queries_or_benign(tm, tm, g, &s, &q, &fresh)?;
        let pom = single(g, tm, tm, rr::PREDICATE_OBJECT_MAP, "predicate-object map")?;
        let pm = single(g, tm, &pom, rr::PREDICATE_MAP, "predicate map")?;
        let om = single(g, tm, &pom, rr::OBJECT_MAP, "object map")?;

        let mut plan = Plan::source(s, q, p.clone())
            .extend(Attribute::subject(), ext(&sm, &p)?)
            .extend(Attribute::predicate(), ext(&pm, &p)?);

        if let Some(ptm) = g.object(&om, rr::PARENT_TRIPLES_MAP) {
            let (s2, q2) = src_and_root_query(&ptm, g, resolver)?;
            let psm = single(g, &ptm, &ptm, rr::SUBJECT_MAP, "subject map")?;
            let p2 = queries_or_benign(&ptm, &psm, g, &s2, &q2, &fresh)?;
            let mut pairs = BTreeSet::new();
            for jc in g.objects(&om, rr::JOIN_CONDITION) {
                let child = literal_lexicals(g, &jc, rr::CHILD).into_iter().next();
                let parent = literal_lexicals(g, &jc, rr::PARENT).into_iter().next();
                let (Some(child), Some(parent)) = (child, parent) else {
                    return Err(mapping_err(tm, format!("join condition {jc} needs rr:child and rr:parent")));
                };
                let a = inverse(&p, &child).ok_or_else(|| mapping_err(tm, format!("child query {child:?} has no attribute")))?;
                let a2 = inverse(&p2, &parent)
                    .ok_or_else(|| mapping_err(tm, format!("parent query {parent:?} has no attribute")))?;
                pairs.insert((a.clone(), a2.clone()));
            }
            let parent_subject = ext(&psm, &p2)?;
            plan = plan
                .join(Plan::source(s2, q2, p2), pairs)
                .extend(Attribute::object(), parent_subject);
        } else {
            plan = plan.extend(Attribute::object(), ext(&om, &p)?);
        }

        let sm_gm = g.object(&sm, rr::GRAPH_MAP);
        let pom_gm = g.object(&pom, rr::GRAPH_MAP);
        if sm_gm.is_some() && pom_gm.is_some() {
            diagnostics.warn(format!(
                "triples map {tm}: graph maps on both subject map and predicate-object map, using the subject map's"
            ));
        }
        let graph_expr = match sm_gm.or(pom_gm) {
            Some(gm) => ext(&gm, &p)?,
            None => ExtendExpression::Const(RdfTerm::named(rr::DEFAULT_GRAPH)),
        };
        plan = plan.extend(Attribute::graph(), graph_expr).project(spog.iter().cloned());
        acc = acc.union(plan);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::algebra::ExecContext;
    use crate::dataset::relation_to_dataset;
    use crate::functions::FunctionRegistry;
    use crate::rml::graph::parse_turtle;
    use crate::source::{CsvDocument, CsvSourceType, DataSource};

    const BASE: &str = "http://example.com/base/";

    const EXAMPLE: &str = r#"
@prefix ex: <http://example.com/> .
@prefix rr: <http://www.w3.org/ns/r2rml#> .
@prefix rml: <http://semweb.mmlab.be/ns/rml#> .
@prefix ql: <http://semweb.mmlab.be/ns/ql#> .
@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .
ex:tm rml:logicalSource [ rml:source "data.csv"; rml:referenceFormulation ql:CSV ];
      rr:subjectMap [ rr:template "http://example.com/person_{ID}"; rr:termType rr:IRI ];
      rr:predicateObjectMap [ rr:predicate rdfs:label; rr:objectMap [ rml:reference "Name" ] ].
"#;

    fn resolver_with(name: &str, csv: &str) -> SourceResolver {
        let mut r = SourceResolver::new("/nonexistent");
        let doc = CsvDocument::parse(csv.as_bytes(), name).unwrap();
        r.register(ql::CSV, name, Arc::new(DataSource::new(CsvSourceType, doc, name)));
        r
    }

    fn plan_for(mapping: &str, resolver: &mut SourceResolver) -> Plan {
        let g = parse_turtle(mapping.as_bytes(), BASE).unwrap();
        translate(&g, BASE, resolver, &Diagnostics::new()).unwrap()
    }

    fn run(mapping: &str, resolver: &mut SourceResolver) -> Vec<String> {
        let plan = plan_for(mapping, resolver);
        let registry = FunctionRegistry::default();
        let diagnostics = Diagnostics::new();
        let r = plan.execute(ExecContext { registry: &registry, diagnostics: &diagnostics }).unwrap();
        relation_to_dataset(&r).unwrap().to_nquads_lines()
    }

    const EXAMPLE_DUMP: &str = r#"UNION [a_g,a_o,a_p,a_s] id=0
  EMPTY [a_g,a_o,a_p,a_s] id=0.0
  PROJECT [a_g,a_o,a_p,a_s] id=0.1
    EXTEND [a1,a2,a_g,a_o,a_p,a_s] id=0.1.0 attr=a_g expr=<http://www.w3.org/ns/r2rml#defaultGraph>
      EXTEND [a1,a2,a_o,a_p,a_s] id=0.1.0.0 attr=a_o expr=toLiteral(a2, <http://www.w3.org/2001/XMLSchema#string>)
        EXTEND [a1,a2,a_p,a_s] id=0.1.0.0.0 attr=a_p expr=<http://www.w3.org/2000/01/rdf-schema#label>
          EXTEND [a1,a2,a_s] id=0.1.0.0.0.0 attr=a_s expr=toIRI(concat("http://example.com/person_", a1), <http://example.com/base/>)
            SOURCE [a1,a2] id=0.1.0.0.0.0.0 source=csv:data.csv root="" queries={a1:"ID",a2:"Name"}
"#;

    #[test]
    fn example_plan() {
        let mut r = resolver_with("data.csv", "ID,Name\n1,Alice\n2,Bob\n");
        let plan = plan_for(EXAMPLE, &mut r);
        assert_eq!(plan.dump(), EXAMPLE_DUMP);
    }

    #[test]
    fn example_output() {
        let mut r = resolver_with("data.csv", "ID,Name\n1,Alice\n2,Bob\n");
        assert_eq!(
            run(EXAMPLE, &mut r),
            [
                r#"<http://example.com/person_1> <http://www.w3.org/2000/01/rdf-schema#label> "Alice" ."#,
                r#"<http://example.com/person_2> <http://www.w3.org/2000/01/rdf-schema#label> "Bob" ."#,
            ]
        );
    }

    const HEAD: &str = r#"
@prefix ex: <http://example.com/> .
@prefix rr: <http://www.w3.org/ns/r2rml#> .
@prefix rml: <http://semweb.mmlab.be/ns/rml#> .
@prefix ql: <http://semweb.mmlab.be/ns/ql#> .
@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .
"#;

    #[test]
    fn join_uses_parent_subject() {
        let mut r = resolver_with("people.csv", "id,dept\n1,10\n2,20\n3,30\n");
        r.register(
            ql::CSV,
            "depts.csv",
            Arc::new(DataSource::new(
                CsvSourceType,
                CsvDocument::parse(b"code,name\n10,Sales\n20,HR\n", "depts.csv").unwrap(),
                "depts.csv",
            )),
        );
        let mapping = format!(
            r#"{HEAD}
ex:people rml:logicalSource [ rml:source "people.csv"; rml:referenceFormulation ql:CSV ];
    rr:subjectMap [ rr:template "http://example.com/p/{{id}}" ];
    rr:predicateObjectMap [ rr:predicate ex:worksIn;
        rr:objectMap [ rr:parentTriplesMap ex:depts; rr:joinCondition [ rr:child "dept"; rr:parent "code" ] ] ].
ex:depts rml:logicalSource [ rml:source "depts.csv"; rml:referenceFormulation ql:CSV ];
    rr:subjectMap [ rr:template "http://example.com/d/{{name}}" ];
    rr:predicateObjectMap [ rr:predicate ex:label; rr:objectMap [ rml:reference "missing" ] ].
"#
        );
        let out = run(&mapping, &mut r);
        assert_eq!(
            out,
            [
                "<http://example.com/p/1> <http://example.com/worksIn> <http://example.com/d/Sales> .",
                "<http://example.com/p/2> <http://example.com/worksIn> <http://example.com/d/HR> .",
            ]
        );
    }

    #[test]
    fn constant_only_map_uses_benign_query() {
        let mut r = resolver_with("data.csv", "ID\n1\n2\n");
        let mapping = format!(
            r#"{HEAD}
ex:tm rml:logicalSource [ rml:source "data.csv"; rml:referenceFormulation ql:CSV ];
    rr:subject ex:s; rr:predicateObjectMap [ rr:predicate ex:p; rr:object ex:o ].
"#
        );
        let plan = plan_for(&mapping, &mut r);
        assert!(plan.dump().contains(r#"queries={a1:"ID"}"#), "{}", plan.dump());
        assert_eq!(run(&mapping, &mut r), ["<http://example.com/s> <http://example.com/p> <http://example.com/o> ."]);
    }

    #[test]
    fn term_types_and_datatypes() {
        let mut r = resolver_with("data.csv", "ID,Age\n1,30\n");
        let mapping = format!(
            r#"{HEAD}
ex:tm rml:logicalSource [ rml:source "data.csv"; rml:referenceFormulation ql:CSV ];
    rr:subjectMap [ rml:reference "ID"; rr:termType rr:BlankNode ];
    rr:predicateObjectMap [ rr:predicate ex:age; rr:objectMap [ rml:reference "Age"; rr:datatype xsd:integer ] ],
        [ rr:predicate ex:tag; rr:objectMap [ rr:template "t{{ID}}"; rr:termType rr:Literal ] ],
        [ rr:predicate ex:ref; rr:objectMap [ rml:reference "Age"; rr:termType rr:IRI ] ];
    rr:predicateObjectMap [ rr:predicate ex:g; rr:objectMap [ rr:constant "c" ]; rr:graph ex:G ].
"#
        );
        let out = run(&mapping, &mut r);
        assert_eq!(
            out,
            [
                r#"_:b000000 <http://example.com/age> "30"^^<http://www.w3.org/2001/XMLSchema#integer> ."#,
                r#"_:b000000 <http://example.com/g> "c" <http://example.com/G> ."#,
                r#"_:b000000 <http://example.com/ref> <http://example.com/base/30> ."#,
                r#"_:b000000 <http://example.com/tag> "t1" ."#,
            ]
        );
    }

    #[test]
    fn errors_are_classified() {
        let mut r = SourceResolver::new("/nonexistent");
        let g = parse_turtle(EXAMPLE.as_bytes(), BASE).unwrap();
        let err = translate(&g, BASE, &mut r, &Diagnostics::new()).unwrap_err();
        assert!(matches!(err, TranslateError::Source { .. }), "{err}");

        let err = translate(&g, "not an iri", &mut r, &Diagnostics::new()).unwrap_err();
        assert!(matches!(err, TranslateError::BadBase(_)));

        let xpath = EXAMPLE.replace("ql:CSV", "ql:XPath");
        let g = parse_turtle(xpath.as_bytes(), BASE).unwrap();
        let err = translate(&g, BASE, &mut r, &Diagnostics::new()).unwrap_err();
        assert!(matches!(err, TranslateError::Mapping { .. }), "{err}");
    }

    #[test]
    fn attributes_are_fresh_across_triples_maps() {
        let mut r = resolver_with("data.csv", "ID,Name\n1,Alice\n");
        let twice = format!("{EXAMPLE}\nex:tm2 rml:logicalSource [ rml:source \"data.csv\"; rml:referenceFormulation ql:CSV ];\n  rr:subjectMap [ rml:reference \"Name\" ]; rr:predicateObjectMap [ rr:predicate ex:p; rr:objectMap [ rml:reference \"ID\" ] ].\n");
        let plan = plan_for(&twice, &mut r);
        let dump = plan.dump();
        assert!(dump.contains(r#"queries={a1:"ID",a2:"Name"}"#), "{dump}");
        assert!(dump.contains(r#"queries={a3:"ID",a4:"Name"}"#), "{dump}");
    }
}
