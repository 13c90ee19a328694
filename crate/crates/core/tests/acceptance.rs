//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use kgc_core::algebra::{ExecContext, ExtendExpression, Plan};
use kgc_core::construct::{plan_mapping, ConstructOptions};
use kgc_core::dataset::{relation_to_dataset, RdfDataset, Triple};
use kgc_core::functions::{BNodeFactory, FunctionRegistry, TO_INT};
use kgc_core::isomorphism::{dataset_quads, isomorphic};
use kgc_core::optimizer::{check_rule, RuleFamily};
use kgc_core::rml::{check_normal_form, normalize};
use kgc_core::source::json::parse_document;
use kgc_core::source::{CsvDocument, CsvSourceType, DataSource, JsonSourceType, SharedSource};
use kgc_core::term::{RdfTerm, Value};
use kgc_core::vocab::{rr, xsd};
use kgc_core::{construct, Attribute, Diagnostics, MappingRelation, MappingTuple};
use serde_json::Value as Json;

use common::cartesian;

const EX: &str = "http://example.com/";
const FOAF: &str = "http://xmlns.com/foaf/0.1/";

fn ex(local: &str) -> RdfTerm {
    RdfTerm::iri(format!("{EX}{local}")).unwrap()
}

fn foaf(local: &str) -> RdfTerm {
    RdfTerm::iri(format!("{FOAF}{local}")).unwrap()
}

fn typed(lex: &str, dt: &str) -> RdfTerm {
    RdfTerm::literal(lex, dt).unwrap()
}

fn execute(plan: &Plan) -> Result<MappingRelation, String> {
    let registry = FunctionRegistry::with_builtins(Arc::new(BNodeFactory::new()));
    let diagnostics = Diagnostics::new();
    plan.execute(ExecContext {
        registry: &registry,
        diagnostics: &diagnostics,
    })
    .map_err(|e| e.to_string())
}

fn ensure(ok: bool, message: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(message())
    }
}

// ---------------------------------------------------------------------------

fn table_one() -> Result<String, String> {
    let ax = Attribute::new("a_x");
    let tuple = |x: Value, s: RdfTerm, p: RdfTerm, o: RdfTerm, g: RdfTerm| {
        MappingTuple::new()
            .with(ax.clone(), x)
            .with(Attribute::subject(), s)
            .with(Attribute::predicate(), p)
            .with(Attribute::object(), o)
            .with(Attribute::graph(), g)
    };
    let t = tuple(
        typed("12", xsd::INTEGER).into(),
        ex("alice"),
        foaf("knows"),
        ex("bob"),
        RdfTerm::named(rr::DEFAULT_GRAPH),
    );
    let t1 = tuple(ex("alice").into(), ex("alice"), RdfTerm::string("knows"), ex("charles"), ex("g1"));
    let t2 = tuple(Value::Error, ex("bob"), foaf("name"), RdfTerm::string("Bob"), ex("g2"));
    let mut schema = Attribute::reserved();
    schema.insert(ax.clone());
    let r = MappingRelation::new(schema, [t, t1, t2]).map_err(|e| e.to_string())?;
    let dataset = relation_to_dataset(&r).map_err(|e| e.to_string())?;

    let mut expected = RdfDataset::new();
    let triple = |s, p, o| Triple::new(s, p, o).unwrap();
    expected
        .insert(triple(ex("alice"), foaf("knows"), ex("bob")), None)
        .unwrap();
    expected
        .insert(triple(ex("bob"), foaf("name"), RdfTerm::string("Bob")), Some(ex("g2")))
        .unwrap();
    ensure(dataset == expected, || format!("got\n{}", dataset.to_nquads()))?;
    ensure(dataset.named_graph(&ex("g1")).is_none(), || "t' leaked into ex:g1".into())?;
    Ok(format!("{} quads, {} named graph", dataset.len(), dataset.named_graphs().len()))
}

// ---------------------------------------------------------------------------

const D_EX: &str = "id,firstname,lastname,age\n1,Alice,Lee,23\n2,Bob,Malice,unknown\n";

fn worked_example_chain() -> Result<String, String> {
    let doc = CsvDocument::parse(D_EX.as_bytes(), "D_ex").map_err(|e| e.to_string())?;
    let s_ex: SharedSource = Arc::new(DataSource::new(CsvSourceType, doc, "D_ex"));
    let (a1, a2, a3, a4) = (Attribute::new("a1"), Attribute::new("a2"), Attribute::new("a3"), Attribute::new("a4"));
    let queries = BTreeMap::from([
        (a1.clone(), "id".to_owned()),
        (a2.clone(), "firstname".to_owned()),
        (a3.clone(), "age".to_owned()),
    ]);
    let source = Plan::source(s_ex, "", queries);
    let s = |v: &str| Value::from(RdfTerm::string(v));

    let t1 = MappingTuple::new().with(a1.clone(), s("1")).with(a2.clone(), s("Alice")).with(a3.clone(), s("23"));
    let t2 = MappingTuple::new().with(a1.clone(), s("2")).with(a2.clone(), s("Bob")).with(a3.clone(), s("unknown"));
    let r = execute(&source)?;
    let expected_r = MappingRelation::new([a1.clone(), a2.clone(), a3.clone()], [t1.clone(), t2.clone()]).unwrap();
    ensure(r == expected_r, || format!("source operator gave\n{r}"))?;

    let phi_ex = ExtendExpression::func(TO_INT, vec![ExtendExpression::attr(a3.clone())]);
    let extended = source.extend(a4.clone(), phi_ex);
    let t1p = t1.clone().with(a4.clone(), typed("23", xsd::INTEGER));
    let t2p = t2.clone().with(a4.clone(), Value::Error);
    let r_ext = execute(&extended)?;
    let expected_ext = MappingRelation::new([a1, a2.clone(), a3, a4.clone()], [t1p, t2p]).unwrap();
    ensure(r_ext == expected_ext, || format!("extend operator gave\n{r_ext}"))?;

    let projected = extended.project([a2.clone(), a4.clone()]);
    let t1pp = MappingTuple::new().with(a2.clone(), s("Alice")).with(a4.clone(), typed("23", xsd::INTEGER));
    let t2pp = MappingTuple::new().with(a2.clone(), s("Bob")).with(a4.clone(), Value::Error);
    let r_proj = execute(&projected)?;
    let expected_proj = MappingRelation::new([a2, a4], [t1pp, t2pp]).unwrap();
    ensure(r_proj == expected_proj, || format!("projection gave\n{r_proj}"))?;
    Ok("source, extend and projection relations match, t2' carries the error value".into())
}

// ---------------------------------------------------------------------------

const EXAMPLE_MAPPING: &str = r#"@prefix ex: <http://example.com/> .
@prefix rr: <http://www.w3.org/ns/r2rml#> .
@prefix rml: <http://semweb.mmlab.be/ns/rml#> .
@prefix ql: <http://semweb.mmlab.be/ns/ql#> .
@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .
ex:tm rml:logicalSource [ rml:source "data.csv";  rml:referenceFormulation ql:CSV ];
      rr:subjectMap [ rr:template "http://example.com/person_{ID}";  rr:termType rr:IRI ];
      rr:predicateObjectMap [ rr:predicate rdfs:label;
                              rr:objectMap [rml:reference "Name"] ].
"#;

const GOLDEN_DUMP: &str = r#"UNION [a_g,a_o,a_p,a_s] id=0
  EMPTY [a_g,a_o,a_p,a_s] id=0.0
  PROJECT [a_g,a_o,a_p,a_s] id=0.1
    EXTEND [a1,a2,a_g,a_o,a_p,a_s] id=0.1.0 attr=a_g expr=<http://www.w3.org/ns/r2rml#defaultGraph>
      EXTEND [a1,a2,a_o,a_p,a_s] id=0.1.0.0 attr=a_o expr=toLiteral(a2, <http://www.w3.org/2001/XMLSchema#string>)
        EXTEND [a1,a2,a_p,a_s] id=0.1.0.0.0 attr=a_p expr=<http://www.w3.org/2000/01/rdf-schema#label>
          EXTEND [a1,a2,a_s] id=0.1.0.0.0.0 attr=a_s expr=toIRI(concat("http://example.com/person_", a1), <http://example.com/base/>)
            SOURCE [a1,a2] id=0.1.0.0.0.0.0 source=csv:data.csv root="" queries={a1:"ID",a2:"Name"}
"#;

const EXPECTED_LABELS: &str = "<http://example.com/person_1> <http://www.w3.org/2000/01/rdf-schema#label> \"Alice\" .\n\
<http://example.com/person_2> <http://www.w3.org/2000/01/rdf-schema#label> \"Bob\" .\n";

fn translation_fidelity() -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    fs::write(dir.path().join("data.csv"), "ID,Name\n1,Alice\n2,Bob\n").map_err(|e| e.to_string())?;
    let options = ConstructOptions::new(dir.path());
    let diagnostics = Diagnostics::new();
    let plans = plan_mapping(EXAMPLE_MAPPING.as_bytes(), &options, &diagnostics).map_err(|e| e.to_string())?;
    let dump = plans.translated.dump();
    ensure(dump == GOLDEN_DUMP, || format!("plan dump differs:\n{dump}"))?;
    let dataset = construct(EXAMPLE_MAPPING.as_bytes(), &options, &diagnostics).map_err(|e| e.to_string())?;
    let out = dataset.to_nquads();
    ensure(out == EXPECTED_LABELS, || format!("output differs:\n{out}"))?;
    Ok("golden plan dump and 2 rdfs:label quads".into())
}

// ---------------------------------------------------------------------------

const RULE_TRIALS: usize = 1000;
const RULE_SEED: u64 = 20_240_601;

fn rule_soundness() -> Result<String, String> {
    let mut summary = Vec::new();
    let mut failures = Vec::new();
    for family in RuleFamily::ALL {
        let report = check_rule(family, RULE_SEED, RULE_TRIALS).map_err(|e| format!("{family}: {e}"))?;
        if report.trials != RULE_TRIALS {
            failures.push(format!("{family}: ran {} trials", report.trials));
        }
        if let Some(c) = report.counterexamples.first() {
            failures.push(format!("{family}: {} failures, e.g.\n{c}", report.counterexamples.len()));
        }
        summary.push(format!("{family}={}", report.trials));
    }
    ensure(failures.is_empty(), || failures.join("\n"))?;
    Ok(format!("0 failures; {}", summary.join(" ")))
}

// ---------------------------------------------------------------------------

fn normalization_invariants() -> Result<String, String> {
    let corpus = common::corpus_mappings();
    let mut failures = Vec::new();
    for (name, _, bytes) in &corpus {
        let g = common::parse_mapping(bytes);
        let n = match normalize(&g) {
            Ok(n) => n,
            Err(e) => {
                failures.push(format!("{name}: {e}"));
                continue;
            }
        };
        if let Err(problems) = check_normal_form(&n) {
            failures.push(format!("{name}: {}", problems.join("; ")));
        }
        match normalize(&n) {
            Ok(again) if again == n => {}
            Ok(_) => failures.push(format!("{name}: second normalization changed the graph")),
            Err(e) => failures.push(format!("{name}: second normalization failed: {e}")),
        }
    }
    ensure(failures.is_empty(), || failures.join("\n"))?;
    Ok(format!("{} mappings normalized, invariants hold, idempotent", corpus.len()))
}

// ---------------------------------------------------------------------------

fn rml_conformance() -> Result<String, String> {
    let manifest = common::skip_manifest();
    let cases = common::selected_cases();
    let failures: Vec<String> = cases
        .iter()
        .filter_map(|c| c.check().err().map(|e| format!("{}: {e}", c.id)))
        .collect();
    ensure(failures.is_empty(), || failures.join("\n"))?;
    let joins = cases.iter().filter(|c| c.has_join()).count();
    let graphs = cases.iter().filter(|c| c.has_graph_map()).count();
    ensure(cases.len() >= 25 && joins >= 3 && graphs >= 3, || {
        format!("selection too small: {} cases, {joins} joins, {graphs} graph maps", cases.len())
    })?;
    Ok(format!(
        "{}/{} passed ({joins} join, {graphs} graph-map), {} skip entries",
        cases.len(),
        cases.len(),
        manifest.len()
    ))
}

// ---------------------------------------------------------------------------

fn optimizer_neutrality() -> Result<String, String> {
    let corpus = common::corpus_mappings();
    let mut failures = Vec::new();
    for (name, dir, bytes) in &corpus {
        let run = |optimize: bool| {
            let mut options = ConstructOptions::new(dir);
            options.base = common::BASE.to_owned();
            options.optimize = optimize;
            construct(bytes, &options, &Diagnostics::new()).map(|d| dataset_quads(&d))
        };
        match (run(false), run(true)) {
            (Ok(a), Ok(b)) if isomorphic(&a, &b) => {}
            (Ok(_), Ok(_)) => failures.push(format!("{name}: outputs differ")),
            (a, b) => failures.push(format!("{name}: {:?} / {:?}", a.err(), b.err())),
        }
    }
    ensure(failures.is_empty(), || failures.join("\n"))?;
    Ok(format!("{} mappings, isomorphic with and without optimization", corpus.len()))
}

// ---------------------------------------------------------------------------

const MULTI_JSON: &str = r#"{
  "items": [
    { "id": "i1", "tags": ["red", "blue"], "sizes": [1, 2, 3], "owner": { "name": "Ann" } },
    { "id": "i2", "tags": ["green"], "sizes": [], "owner": { "name": "Ben" } },
    { "id": "i3", "tags": ["red", "red", null], "sizes": [4], "owner": [{ "name": "Cy" }, { "name": "Di" }] },
    { "id": "i4", "tags": [], "sizes": [5] },
    { "tags": ["x"], "sizes": [true, 2.5] },
    { "id": "i6", "tags": [{ "nested": 1 }], "sizes": [7], "owner": { "name": "Ed" } }
  ]
}"#;

fn source_cartesian() -> Result<String, String> {
    let doc = parse_document(MULTI_JSON.as_bytes(), "multi.json").map_err(|e| e.to_string())?;
    let root: Json = serde_json::from_str(MULTI_JSON).unwrap();
    let queries: BTreeMap<Attribute, String> = [("a1", "id"), ("a2", "tags[*]"), ("a3", "sizes[*]"), ("a4", "owner.name")]
        .into_iter()
        .map(|(a, q)| (Attribute::new(a), q.to_owned()))
        .collect();
    let source: SharedSource = Arc::new(DataSource::new(JsonSourceType, doc, "multi.json"));
    let got = execute(&Plan::source(source, "$.items[*]", queries.clone()))?;

    let mut expected = BTreeSet::new();
    for ctx in cartesian::navigate(&root, "items[*]") {
        let columns: Vec<(Attribute, Vec<Value>)> = queries
            .iter()
            .map(|(a, q)| (a.clone(), cartesian::values(ctx, q)))
            .collect();
        expected.extend(cartesian::product(&columns));
    }
    let got_tuples: BTreeSet<MappingTuple> = got.tuples().clone();
    ensure(got_tuples == expected, || {
        format!("source gave {} tuples, oracle {}\n{got}", got_tuples.len(), expected.len())
    })?;
    Ok(format!("{} tuples equal to the cartesian oracle", expected.len()))
}

// ---------------------------------------------------------------------------

struct Criterion {
    number: u8,
    name: &'static str,
    budget: Duration,
    run: fn() -> Result<String, String>,
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { number: 1, name: "Table 1 reproduction", budget: Duration::from_secs(1), run: table_one },
        Criterion { number: 2, name: "worked-example chain", budget: Duration::from_secs(1), run: worked_example_chain },
        Criterion { number: 3, name: "translation fidelity", budget: Duration::from_secs(1), run: translation_fidelity },
        Criterion { number: 4, name: "rewrite-rule soundness", budget: Duration::from_secs(60), run: rule_soundness },
        Criterion { number: 5, name: "normalization invariants", budget: Duration::from_secs(10), run: normalization_invariants },
        Criterion { number: 6, name: "RML conformance subset", budget: Duration::from_secs(30), run: rml_conformance },
        Criterion { number: 7, name: "optimizer neutrality", budget: Duration::from_secs(30), run: optimizer_neutrality },
        Criterion { number: 8, name: "source cartesian semantics", budget: Duration::from_secs(1), run: source_cartesian },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > c.budget => Err(format!("over budget: {detail}")),
            other => other,
        };
        let timing = format!("{:.3}s of {}s", elapsed.as_secs_f64(), c.budget.as_secs());
        match outcome {
            Ok(detail) => println!("PASS [{}] {} ({timing}): {detail}", c.number, c.name),
            Err(why) => {
                failed += 1;
                println!("FAIL [{}] {} ({timing}): {why}", c.number, c.name);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
