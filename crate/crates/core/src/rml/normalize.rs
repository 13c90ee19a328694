//! Rewrites a mapping graph into normal form: no shortcut properties, every
//! referencing object map has a join condition, and every triples map that
//! has a predicate-object map has exactly one, with a single predicate map,
//! a single object map and at most one graph map.
//!
//! Each step first collects all matches on the current graph and then
//! applies the deletions and insertions, like an update query would.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::rml::graph::Graph;
use crate::term::RdfTerm;
use crate::vocab::{rdf, rml, rr};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("cannot normalize mapping at {node}: {message}")]
pub struct NormalizeError {
    pub node: String,
    pub message: String,
}

fn named(iri: &'static str) -> RdfTerm {
    RdfTerm::named(iri)
}

/// Applies all normalization steps in order.
pub fn normalize(graph: &Graph) -> Result<Graph, NormalizeError> {
    let mut g = graph.clone();
    rename_reference_alias(&mut g);
    expand_classes(&mut g);
    expand_constant_shortcuts(&mut g);
    split_predicate_object_maps(&mut g);
    replace_joinless_referencing_maps(&mut g)?;
    split_triples_maps(&mut g);
    move_pom_graph_maps(&mut g);
    split_subject_graph_maps(&mut g);
    Ok(g)
}

/// `rr:reference` is accepted as a spelling of `rml:reference`.
pub fn rename_reference_alias(g: &mut Graph) {
    for (s, o) in g.pairs(rr::REFERENCE) {
        g.remove(&s, rr::REFERENCE, &o);
        g.insert(s, rml::REFERENCE, o);
    }
}

/// Step 1: `rr:class` on a subject map becomes an `rdf:type` predicate-object
/// map on every triples map using that subject map.
pub fn expand_classes(g: &mut Graph) {
    let mut matches = Vec::new();
    for (tm, sm) in g.pairs(rr::SUBJECT_MAP) {
        for class in g.objects(&sm, rr::CLASS) {
            matches.push((tm.clone(), sm.clone(), class));
        }
    }
    for (_, sm, class) in &matches {
        g.remove(sm, rr::CLASS, class);
    }
    for (tm, _, class) in matches {
        let pom = g.fresh_blank();
        let pm = g.fresh_blank();
        let om = g.fresh_blank();
        g.insert(tm, rr::PREDICATE_OBJECT_MAP, pom.clone());
        g.insert(pom.clone(), rr::PREDICATE_MAP, pm.clone());
        g.insert(pm.clone(), rr::TERM_TYPE, named(rr::IRI));
        g.insert(pm, rr::CONSTANT, named(rdf::TYPE));
        g.insert(pom, rr::OBJECT_MAP, om.clone());
        g.insert(om.clone(), rr::TERM_TYPE, named(rr::IRI));
        g.insert(om, rr::CONSTANT, class);
    }
}

/// Step 2: `rr:subject`, `rr:predicate`, `rr:object` and `rr:graph` become
/// constant-valued term maps.
pub fn expand_constant_shortcuts(g: &mut Graph) {
    let shortcuts = [
        (rr::SUBJECT, rr::SUBJECT_MAP),
        (rr::PREDICATE, rr::PREDICATE_MAP),
        (rr::OBJECT, rr::OBJECT_MAP),
        (rr::GRAPH, rr::GRAPH_MAP),
    ];
    for (shortcut, map) in shortcuts {
        for (s, c) in g.pairs(shortcut) {
            g.remove(&s, shortcut, &c);
            let m = g.fresh_blank();
            g.insert(s, map, m.clone());
            g.insert(m, rr::CONSTANT, c);
        }
    }
}

/// Step 3: a predicate-object map with several predicate, object or graph
/// maps becomes one predicate-object map per combination.
pub fn split_predicate_object_maps(g: &mut Graph) {
    let mut matches = Vec::new();
    for (tm, pom) in g.pairs(rr::PREDICATE_OBJECT_MAP) {
        let pms = g.objects(&pom, rr::PREDICATE_MAP);
        let oms = g.objects(&pom, rr::OBJECT_MAP);
        let gms = g.objects(&pom, rr::GRAPH_MAP);
        if pms.is_empty() || oms.is_empty() {
            continue;
        }
        if pms.len() == 1 && oms.len() == 1 && gms.len() <= 1 {
            continue;
        }
        matches.push((tm, pom, pms, oms, gms));
    }
    for (tm, pom, pms, oms, gms) in &matches {
        g.remove(tm, rr::PREDICATE_OBJECT_MAP, pom);
        for pm in pms {
            g.remove(pom, rr::PREDICATE_MAP, pm);
        }
        for om in oms {
            g.remove(pom, rr::OBJECT_MAP, om);
        }
        for gm in gms {
            g.remove(pom, rr::GRAPH_MAP, gm);
        }
    }
    for (tm, _, pms, oms, gms) in matches {
        let gms: Vec<Option<RdfTerm>> = if gms.is_empty() {
            vec![None]
        } else {
            gms.into_iter().map(Some).collect()
        };
        for pm in &pms {
            for om in &oms {
                for gm in &gms {
                    let pom = g.fresh_blank();
                    g.insert(tm.clone(), rr::PREDICATE_OBJECT_MAP, pom.clone());
                    g.insert(pom.clone(), rr::PREDICATE_MAP, pm.clone());
                    g.insert(pom.clone(), rr::OBJECT_MAP, om.clone());
                    if let Some(gm) = gm {
                        g.insert(pom, rr::GRAPH_MAP, gm.clone());
                    }
                }
            }
        }
    }
}

/// The logical-source description used to decide whether two triples maps
/// read the same data: source, reference formulation and iterator.
fn logical_source_key(g: &Graph, tm: &RdfTerm) -> BTreeSet<(String, Vec<RdfTerm>)> {
    g.objects(tm, rml::LOGICAL_SOURCE)
        .iter()
        .flat_map(|ls| {
            [rml::SOURCE, rml::REFERENCE_FORMULATION, rml::ITERATOR]
                .into_iter()
                .map(|p| (p.to_owned(), g.objects(ls, p)))
        })
        .collect()
}

/// Step 4: a referencing object map without join conditions takes over the
/// parent subject map's reference, template or constant, as an IRI map.
/// The parent must read the same logical source as the child.
pub fn replace_joinless_referencing_maps(g: &mut Graph) -> Result<(), NormalizeError> {
    let mut matches = Vec::new();
    for (om, ptm) in g.pairs(rr::PARENT_TRIPLES_MAP) {
        if !g.objects(&om, rr::JOIN_CONDITION).is_empty() {
            continue;
        }
        let parent_key = logical_source_key(g, &ptm);
        for pom in g.subjects(rr::OBJECT_MAP, &om) {
            for tm in g.subjects(rr::PREDICATE_OBJECT_MAP, &pom) {
                if logical_source_key(g, &tm) != parent_key {
                    return Err(NormalizeError {
                        node: om.to_string(),
                        message: format!(
                            "referencing object map without join condition, but {tm} and parent {ptm} use different logical sources"
                        ),
                    });
                }
            }
        }
        let sms = g.objects(&ptm, rr::SUBJECT_MAP);
        if sms.is_empty() {
            return Err(NormalizeError {
                node: ptm.to_string(),
                message: "parent triples map has no subject map".into(),
            });
        }
        let mut copied = Vec::new();
        for sm in &sms {
            for p in [rml::REFERENCE, rr::TEMPLATE, rr::CONSTANT] {
                for v in g.objects(sm, p) {
                    copied.push((p, v));
                }
            }
        }
        matches.push((om, ptm, copied));
    }
    for (om, ptm, copied) in matches {
        g.remove(&om, rr::PARENT_TRIPLES_MAP, &ptm);
        for (p, v) in copied {
            g.insert(om.clone(), p, v);
        }
        g.insert(om, rr::TERM_TYPE, named(rr::IRI));
    }
    Ok(())
}

fn triples_map_parts(g: &Graph, tm: &RdfTerm) -> (Vec<RdfTerm>, Vec<RdfTerm>, Vec<RdfTerm>) {
    (
        g.objects(tm, rml::LOGICAL_SOURCE),
        g.objects(tm, rr::SUBJECT_MAP),
        g.objects(tm, rr::PREDICATE_OBJECT_MAP),
    )
}

fn triples_maps(g: &Graph) -> BTreeSet<RdfTerm> {
    g.pairs(rr::PREDICATE_OBJECT_MAP).into_iter().map(|(tm, _)| tm).collect()
}

/// Step 5: a triples map with several predicate-object maps is split into
/// new triples maps with one each, sharing logical source and subject map.
/// The original keeps its logical source and subject map so that it can
/// still serve as a parent triples map.
pub fn split_triples_maps(g: &mut Graph) {
    let mut matches = Vec::new();
    for tm in triples_maps(g) {
        let (lss, sms, poms) = triples_map_parts(g, &tm);
        if poms.len() > 1 && !lss.is_empty() && !sms.is_empty() {
            matches.push((tm, lss, sms, poms));
        }
    }
    for (tm, _, _, poms) in &matches {
        for pom in poms {
            g.remove(tm, rr::PREDICATE_OBJECT_MAP, pom);
        }
    }
    for (_, lss, sms, poms) in matches {
        for ls in &lss {
            for sm in &sms {
                for pom in &poms {
                    let t = g.fresh_blank();
                    g.insert(t.clone(), rml::LOGICAL_SOURCE, ls.clone());
                    g.insert(t.clone(), rr::SUBJECT_MAP, sm.clone());
                    g.insert(t, rr::PREDICATE_OBJECT_MAP, pom.clone());
                }
            }
        }
    }
}

const SUBJECT_COPY: [&str; 4] = [rml::REFERENCE, rr::TEMPLATE, rr::CONSTANT, rr::TERM_TYPE];

fn copy_subject_map(g: &mut Graph, sm: &RdfTerm, graph_maps: &[RdfTerm]) -> RdfTerm {
    let copy = g.fresh_blank();
    for p in SUBJECT_COPY {
        for v in g.objects(sm, p) {
            g.insert(copy.clone(), p, v);
        }
    }
    for gm in graph_maps {
        g.insert(copy.clone(), rr::GRAPH_MAP, gm.clone());
    }
    copy
}

/// Step 6a: a graph map on a predicate-object map moves into a new triples
/// map whose subject map copies the original and carries both the subject
/// map's graph maps and this one.
pub fn move_pom_graph_maps(g: &mut Graph) {
    let mut matches = Vec::new();
    for tm in triples_maps(g) {
        let (lss, sms, poms) = triples_map_parts(g, &tm);
        for pom in &poms {
            for pom_gm in g.objects(pom, rr::GRAPH_MAP) {
                for ls in &lss {
                    for sm in &sms {
                        matches.push((tm.clone(), ls.clone(), sm.clone(), pom.clone(), pom_gm.clone()));
                    }
                }
            }
        }
    }
    for (tm, _, _, pom, pom_gm) in &matches {
        g.remove(tm, rr::PREDICATE_OBJECT_MAP, pom);
        g.remove(pom, rr::GRAPH_MAP, pom_gm);
    }
    for (_, ls, sm, pom, pom_gm) in matches {
        let mut gms = g.objects(&sm, rr::GRAPH_MAP);
        gms.push(pom_gm);
        let new_sm = copy_subject_map(g, &sm, &gms);
        let t = g.fresh_blank();
        g.insert(t.clone(), rml::LOGICAL_SOURCE, ls);
        g.insert(t.clone(), rr::SUBJECT_MAP, new_sm);
        g.insert(t, rr::PREDICATE_OBJECT_MAP, pom);
    }
}

/// Step 6b: a subject map with several graph maps yields one new triples
/// map per graph map. The original triples map loses its predicate-object
/// map, since otherwise it would also emit into the default graph.
pub fn split_subject_graph_maps(g: &mut Graph) {
    let mut matches = Vec::new();
    for tm in triples_maps(g) {
        let (lss, sms, poms) = triples_map_parts(g, &tm);
        for sm in &sms {
            let gms = g.objects(sm, rr::GRAPH_MAP);
            if gms.len() < 2 {
                continue;
            }
            for ls in &lss {
                for pom in &poms {
                    matches.push((tm.clone(), ls.clone(), sm.clone(), pom.clone(), gms.clone()));
                }
            }
        }
    }
    for (tm, _, sm, pom, gms) in &matches {
        g.remove(tm, rr::PREDICATE_OBJECT_MAP, pom);
        for gm in gms {
            g.remove(sm, rr::GRAPH_MAP, gm);
        }
    }
    for (_, ls, sm, pom, gms) in matches {
        for gm in gms {
            let new_sm = copy_subject_map(g, &sm, std::slice::from_ref(&gm));
            let t = g.fresh_blank();
            g.insert(t.clone(), rml::LOGICAL_SOURCE, ls.clone());
            g.insert(t.clone(), rr::SUBJECT_MAP, new_sm);
            g.insert(t, rr::PREDICATE_OBJECT_MAP, pom.clone());
        }
    }
}

/// Structural normal-form check; returns every violation found.
pub fn check_normal_form(g: &Graph) -> Result<(), Vec<String>> {
    let mut problems = Vec::new();
    for p in [rr::CLASS, rr::SUBJECT, rr::PREDICATE, rr::OBJECT, rr::GRAPH] {
        if g.has_predicate(p) {
            problems.push(format!("shortcut {p} still used"));
        }
    }
    for tm in triples_maps(g) {
        let (_, sms, poms) = triples_map_parts(g, &tm);
        if sms.len() != 1 {
            problems.push(format!("{tm}: {} subject maps", sms.len()));
        }
        if poms.len() != 1 {
            problems.push(format!("{tm}: {} predicate-object maps", poms.len()));
        }
        let mut graph_maps = 0;
        for sm in &sms {
            graph_maps += g.objects(sm, rr::GRAPH_MAP).len();
        }
        for pom in &poms {
            let pms = g.objects(pom, rr::PREDICATE_MAP).len();
            let oms = g.objects(pom, rr::OBJECT_MAP).len();
            if pms != 1 || oms != 1 {
                problems.push(format!("{tm}: {pom} has {pms} predicate maps and {oms} object maps"));
            }
            graph_maps += g.objects(pom, rr::GRAPH_MAP).len();
        }
        if graph_maps > 1 {
            problems.push(format!("{tm}: {graph_maps} graph maps"));
        }
    }
    for (om, _) in g.pairs(rr::PARENT_TRIPLES_MAP) {
        if g.objects(&om, rr::JOIN_CONDITION).is_empty() {
            problems.push(format!("{om}: referencing object map without join condition"));
        }
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(problems)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rml::graph::parse_turtle;

    const PREFIXES: &str = r#"
@prefix ex: <http://example.com/> .
@prefix rr: <http://www.w3.org/ns/r2rml#> .
@prefix rml: <http://semweb.mmlab.be/ns/rml#> .
@prefix ql: <http://semweb.mmlab.be/ns/ql#> .
"#;

    fn parse(body: &str) -> Graph {
        parse_turtle(format!("{PREFIXES}{body}").as_bytes(), "http://example.com/base/").unwrap()
    }

    fn iri(s: &str) -> RdfTerm {
        RdfTerm::iri(s).unwrap()
    }

    #[test]
    fn class_becomes_type_map() {
        let mut g = parse(
            r#"ex:tm rml:logicalSource ex:ls; rr:subjectMap [ rr:template "{id}"; rr:class ex:C ]."#,
        );
        expand_classes(&mut g);
        assert!(!g.has_predicate(rr::CLASS));
        let tm = iri("http://example.com/tm");
        let pom = g.object(&tm, rr::PREDICATE_OBJECT_MAP).unwrap();
        let pm = g.object(&pom, rr::PREDICATE_MAP).unwrap();
        let om = g.object(&pom, rr::OBJECT_MAP).unwrap();
        assert_eq!(g.object(&pm, rr::CONSTANT), Some(named(rdf::TYPE)));
        assert_eq!(g.object(&om, rr::CONSTANT), Some(iri("http://example.com/C")));
        assert_eq!(g.object(&om, rr::TERM_TYPE), Some(named(rr::IRI)));
    }

    #[test]
    fn shortcuts_expand() {
        let mut g = parse(
            r#"ex:tm rr:subject ex:s; rr:predicateObjectMap [ rr:predicate ex:p; rr:object ex:o; rr:graph ex:g ]."#,
        );
        expand_constant_shortcuts(&mut g);
        for p in [rr::SUBJECT, rr::PREDICATE, rr::OBJECT, rr::GRAPH] {
            assert!(!g.has_predicate(p));
        }
        let sm = g.object(&iri("http://example.com/tm"), rr::SUBJECT_MAP).unwrap();
        assert_eq!(g.object(&sm, rr::CONSTANT), Some(iri("http://example.com/s")));
        assert_eq!(g.pairs(rr::CONSTANT).len(), 4);
    }

    #[test]
    fn pom_split_is_a_product() {
        let mut g = parse(
            r#"ex:tm rr:predicateObjectMap [
                 rr:predicateMap ex:p1, ex:p2; rr:objectMap ex:o1, ex:o2, ex:o3; rr:graphMap ex:g1, ex:g2 ]."#,
        );
        split_predicate_object_maps(&mut g);
        let poms = g.objects(&iri("http://example.com/tm"), rr::PREDICATE_OBJECT_MAP);
        assert_eq!(poms.len(), 2 * 3 * 2);
        for pom in &poms {
            assert_eq!(g.objects(pom, rr::PREDICATE_MAP).len(), 1);
            assert_eq!(g.objects(pom, rr::OBJECT_MAP).len(), 1);
            assert_eq!(g.objects(pom, rr::GRAPH_MAP).len(), 1);
        }
    }

    #[test]
    fn single_pom_is_untouched() {
        let g0 = parse(r#"ex:tm rr:predicateObjectMap [ rr:predicateMap ex:p; rr:objectMap ex:o ]."#);
        let mut g = g0.clone();
        split_predicate_object_maps(&mut g);
        assert_eq!(g, g0);
    }

    const SAME_SOURCE: &str = r#"
ex:tm1 rml:logicalSource [ rml:source "a.csv"; rml:referenceFormulation ql:CSV ];
    rr:subjectMap [ rr:template "x/{id}" ];
    rr:predicateObjectMap [ rr:predicate ex:p; rr:objectMap [ rr:parentTriplesMap ex:tm2 ] ].
ex:tm2 rml:logicalSource [ rml:source "a.csv"; rml:referenceFormulation ql:CSV ];
    rr:subjectMap [ rr:template "y/{id}"; rr:termType rr:BlankNode ].
"#;

    #[test]
    fn joinless_referencing_map_copies_parent_subject() {
        let g = normalize(&parse(SAME_SOURCE)).unwrap();
        assert!(!g.has_predicate(rr::PARENT_TRIPLES_MAP));
        let (om, t) = g.pairs(rr::TEMPLATE).into_iter().find(|(_, t)| t == &RdfTerm::string("y/{id}")).unwrap();
        assert_eq!(t, RdfTerm::string("y/{id}"));
        let _ = g.subjects(rr::OBJECT_MAP, &om).into_iter().next().expect("copied onto an object map");
        assert_eq!(g.object(&om, rr::TERM_TYPE), Some(named(rr::IRI)));
        check_normal_form(&g).unwrap();
    }

    #[test]
    fn joinless_referencing_map_needs_same_source() {
        let g = parse(&SAME_SOURCE.replacen("a.csv", "b.csv", 1));
        let err = normalize(&g).unwrap_err();
        assert!(err.message.contains("different logical sources"), "{err}");
    }

    #[test]
    fn triples_map_split_keeps_parent_usable() {
        let g = parse(
            r#"ex:tm rml:logicalSource ex:ls; rr:subjectMap ex:sm;
                 rr:predicateObjectMap ex:pom1, ex:pom2."#,
        );
        let mut g = g;
        split_triples_maps(&mut g);
        let tm = iri("http://example.com/tm");
        assert!(g.objects(&tm, rr::PREDICATE_OBJECT_MAP).is_empty());
        assert_eq!(g.object(&tm, rr::SUBJECT_MAP), Some(iri("http://example.com/sm")));
        let new: Vec<_> = g.pairs(rr::PREDICATE_OBJECT_MAP);
        assert_eq!(new.len(), 2);
        for (t, _) in new {
            assert!(t.is_blank());
            assert_eq!(g.object(&t, rr::SUBJECT_MAP), Some(iri("http://example.com/sm")));
            assert_eq!(g.object(&t, rml::LOGICAL_SOURCE), Some(iri("http://example.com/ls")));
        }
    }

    #[test]
    fn graph_maps_end_up_one_per_triples_map() {
        let g = parse(
            r#"ex:tm rml:logicalSource ex:ls;
                 rr:subjectMap [ rr:template "s/{id}"; rr:graph ex:g1 ];
                 rr:predicateObjectMap [ rr:predicate ex:p; rr:objectMap [ rml:reference "v" ]; rr:graph ex:g2 ]."#,
        );
        let g = normalize(&g).unwrap();
        check_normal_form(&g).unwrap();
        let mut graphs = BTreeSet::new();
        for tm in triples_maps(&g) {
            let sm = g.object(&tm, rr::SUBJECT_MAP).unwrap();
            let pom = g.object(&tm, rr::PREDICATE_OBJECT_MAP).unwrap();
            assert!(g.objects(&pom, rr::GRAPH_MAP).is_empty());
            let gm = g.object(&sm, rr::GRAPH_MAP).unwrap();
            graphs.insert(g.object(&gm, rr::CONSTANT).unwrap());
            assert_eq!(g.object(&sm, rr::TEMPLATE), Some(RdfTerm::string("s/{id}")));
        }
        assert_eq!(
            graphs,
            BTreeSet::from([iri("http://example.com/g1"), iri("http://example.com/g2")])
        );
    }

    #[test]
    fn reference_alias_is_renamed() {
        let g = normalize(&parse(r#"ex:om rr:reference "x"."#)).unwrap();
        assert!(g.contains(&iri("http://example.com/om"), rml::REFERENCE, &RdfTerm::string("x")));
        assert!(!g.has_predicate(rr::REFERENCE));
    }

    #[test]
    fn normalize_is_idempotent_on_example() {
        let g = normalize(&parse(SAME_SOURCE)).unwrap();
        assert_eq!(normalize(&g).unwrap(), g);
    }

    #[test]
    fn normal_form_check_reports_problems() {
        let g = parse(r#"ex:tm rr:subjectMap ex:sm; rr:predicateObjectMap ex:a, ex:b."#);
        let problems = check_normal_form(&g).unwrap_err();
        assert!(problems.iter().any(|p| p.contains("2 predicate-object maps")));
    }
}
