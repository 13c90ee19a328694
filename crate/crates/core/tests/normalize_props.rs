use std::fmt::Write as _;
use std::fs;

use kgc_core::construct::ConstructOptions;
use kgc_core::isomorphism::{dataset_quads, isomorphic};
use kgc_core::rml::{check_normal_form, normalize, parse_turtle};
use kgc_core::{construct, Diagnostics};
use proptest::prelude::*;

const PREFIXES: &str = "@prefix rr: <http://www.w3.org/ns/r2rml#> .
@prefix rml: <http://semweb.mmlab.be/ns/rml#> .
@prefix ql: <http://semweb.mmlab.be/ns/ql#> .
@prefix ex: <http://example.com/> .
";

const DATA: &str = "a,b,c\n1,x,p\n2,y,q\n2,z,\n";

#[derive(Debug, Clone)]
enum Object {
    Reference(&'static str),
    Constant,
    Template(&'static str),
    Parent { tm: usize, join: bool },
}

#[derive(Debug, Clone)]
struct Pom {
    predicates: usize,
    objects: Vec<Object>,
    graphs: usize,
    shortcut: bool,
}

#[derive(Debug, Clone)]
struct TriplesMap {
    classes: usize,
    subject_graphs: usize,
    blank: bool,
    poms: Vec<Pom>,
}

fn column() -> impl Strategy<Value = &'static str> {
    proptest::sample::select(vec!["a", "b", "c"])
}

fn object(tms: usize) -> impl Strategy<Value = Object> {
    prop_oneof![
        column().prop_map(Object::Reference),
        Just(Object::Constant),
        column().prop_map(Object::Template),
        (0..tms, any::<bool>()).prop_map(|(tm, join)| Object::Parent { tm, join }),
    ]
}

fn pom(tms: usize) -> impl Strategy<Value = Pom> {
    (1usize..3, prop::collection::vec(object(tms), 1..3), 0usize..3, any::<bool>()).prop_map(
        |(predicates, objects, graphs, shortcut)| Pom {
            predicates,
            objects,
            graphs,
            shortcut,
        },
    )
}

fn mapping() -> impl Strategy<Value = Vec<TriplesMap>> {
    (1usize..4).prop_flat_map(|n| {
        prop::collection::vec(
            (0usize..3, 0usize..3, any::<bool>(), prop::collection::vec(pom(n), 0..3)).prop_map(
                |(classes, subject_graphs, blank, poms)| TriplesMap {
                    classes,
                    subject_graphs,
                    blank,
                    poms,
                },
            ),
            n..=n,
        )
    })
}

fn render(tms: &[TriplesMap]) -> String {
    let mut out = PREFIXES.to_owned();
    for (i, tm) in tms.iter().enumerate() {
        let _ = writeln!(out, "ex:tm{i} rml:logicalSource [ rml:source \"data.csv\" ; rml:referenceFormulation ql:CSV ] ;");
        let term_type = if tm.blank { " ; rr:termType rr:BlankNode" } else { "" };
        let _ = write!(out, "  rr:subjectMap [ rr:template \"http://example.com/s{i}/{{a}}\"{term_type}");
        for c in 0..tm.classes {
            let _ = write!(out, " ; rr:class ex:C{c}");
        }
        for g in 0..tm.subject_graphs {
            let _ = write!(out, " ; rr:graphMap [ rr:constant ex:sg{g} ]");
        }
        out.push_str(" ]");
        for (j, pom) in tm.poms.iter().enumerate() {
            out.push_str(" ;\n  rr:predicateObjectMap [ ");
            for p in 0..pom.predicates {
                if pom.shortcut {
                    let _ = write!(out, "rr:predicate ex:p{j}_{p} ; ");
                } else {
                    let _ = write!(out, "rr:predicateMap [ rr:constant ex:p{j}_{p} ] ; ");
                }
            }
            for o in &pom.objects {
                let text = match o {
                    Object::Reference(c) => format!("rr:objectMap [ rml:reference \"{c}\" ]"),
                    Object::Constant if pom.shortcut => "rr:object \"k\"".to_owned(),
                    Object::Constant => "rr:objectMap [ rr:constant ex:k ]".to_owned(),
                    Object::Template(c) => format!("rr:objectMap [ rr:template \"v-{{{c}}}\" ; rr:termType rr:Literal ]"),
                    Object::Parent { tm, join: true } => format!(
                        "rr:objectMap [ rr:parentTriplesMap ex:tm{tm} ; rr:joinCondition [ rr:child \"b\" ; rr:parent \"b\" ] ]"
                    ),
                    Object::Parent { tm, join: false } => format!("rr:objectMap [ rr:parentTriplesMap ex:tm{tm} ]"),
                };
                out.push_str(&text);
                out.push_str(" ; ");
            }
            for g in 0..pom.graphs {
                if pom.shortcut {
                    let _ = write!(out, "rr:graph ex:pg{g} ; ");
                } else {
                    let _ = write!(out, "rr:graphMap [ rr:constant ex:pg{g} ] ; ");
                }
            }
            out.push(']');
        }
        out.push_str(" .\n");
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn normal_form_and_idempotence(tms in mapping()) {
        let text = render(&tms);
        let g = parse_turtle(text.as_bytes(), "http://example.com/base/").unwrap();
        let n = normalize(&g).unwrap();
        if let Err(problems) = check_normal_form(&n) {
            prop_assert!(false, "{}\n{}", problems.join("\n"), text);
        }
        prop_assert_eq!(normalize(&n).unwrap(), n);
    }

    #[test]
    fn optimization_does_not_change_output(tms in mapping()) {
        let text = render(&tms);
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("data.csv"), DATA).unwrap();
        let run = |optimize: bool| {
            let mut options = ConstructOptions::new(dir.path());
            options.optimize = optimize;
            dataset_quads(&construct(text.as_bytes(), &options, &Diagnostics::new()).unwrap())
        };
        let plain = run(false);
        let optimized = run(true);
        prop_assert!(isomorphic(&plain, &optimized), "{}", text);
    }
}
