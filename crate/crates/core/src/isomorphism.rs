//! Comparing quad sets up to blank-node renaming, and reading N-Quads
//! files into quad sets.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::hash::{Hash, Hasher};

use thiserror::Error;

use crate::dataset::{Quad, RdfDataset};
use crate::term::{Literal, RdfTerm};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NQuadsError {
    #[error("N-Quads syntax error at line {line}: {message}")]
    Syntax { line: u64, message: String },
    #[error("unsupported N-Quads content: {0}")]
    Unsupported(String),
}

fn convert_subject(s: &oxrdf::NamedOrBlankNode) -> RdfTerm {
    match s {
        oxrdf::NamedOrBlankNode::NamedNode(n) => RdfTerm::Iri(n.as_str().to_owned()),
        oxrdf::NamedOrBlankNode::BlankNode(b) => RdfTerm::BlankNode(b.as_str().to_owned()),
    }
}

/// Parses N-Quads. Language-tagged literals are not supported.
pub fn parse_nquads(bytes: &[u8]) -> Result<BTreeSet<Quad>, NQuadsError> {
    let mut quads = BTreeSet::new();
    for item in oxttl::NQuadsParser::new().for_slice(bytes) {
        let q = item.map_err(|e| NQuadsError::Syntax {
            line: e.location().start.line + 1,
            message: e.message().to_owned(),
        })?;
        let object = match &q.object {
            oxrdf::Term::NamedNode(n) => RdfTerm::Iri(n.as_str().to_owned()),
            oxrdf::Term::BlankNode(b) => RdfTerm::BlankNode(b.as_str().to_owned()),
            oxrdf::Term::Literal(l) => {
                if let Some(lang) = l.language() {
                    return Err(NQuadsError::Unsupported(format!("language-tagged literal @{lang}")));
                }
                RdfTerm::Literal(
                    Literal::new(l.value(), l.datatype().as_str()).expect("parser produces valid datatype IRIs"),
                )
            }
        };
        let graph = match &q.graph_name {
            oxrdf::GraphName::DefaultGraph => None,
            oxrdf::GraphName::NamedNode(n) => Some(RdfTerm::Iri(n.as_str().to_owned())),
            oxrdf::GraphName::BlankNode(b) => Some(RdfTerm::BlankNode(b.as_str().to_owned())),
        };
        quads.insert(Quad {
            subject: convert_subject(&q.subject),
            predicate: RdfTerm::Iri(q.predicate.as_str().to_owned()),
            object,
            graph,
        });
    }
    Ok(quads)
}

pub fn dataset_quads(dataset: &RdfDataset) -> BTreeSet<Quad> {
    dataset.quads().collect()
}

fn terms(q: &Quad) -> [Option<&RdfTerm>; 4] {
    [Some(&q.subject), Some(&q.predicate), Some(&q.object), q.graph.as_ref()]
}

fn has_blank(q: &Quad) -> bool {
    terms(q).into_iter().flatten().any(RdfTerm::is_blank)
}

fn blank_nodes(quads: &[&Quad]) -> BTreeSet<String> {
    quads
        .iter()
        .flat_map(|q| terms(q))
        .flatten()
        .filter_map(|t| match t {
            RdfTerm::BlankNode(b) => Some(b.clone()),
            _ => None,
        })
        .collect()
}

fn hash_of(h: impl Hash) -> u64 {
    let mut s = DefaultHasher::new();
    h.hash(&mut s);
    s.finish()
}

/// Colour refinement: a blank node's colour summarizes the quads it occurs
/// in, with other blank nodes replaced by their colours.
fn colours(quads: &[&Quad], nodes: &BTreeSet<String>) -> BTreeMap<String, u64> {
    let mut colour: BTreeMap<String, u64> = nodes.iter().map(|b| (b.clone(), 0)).collect();
    for _ in 0..=nodes.len().min(8) {
        let mut signatures: BTreeMap<String, Vec<u64>> = BTreeMap::new();
        for q in quads {
            let shape: Vec<(usize, u64)> = terms(q)
                .iter()
                .enumerate()
                .map(|(i, t)| match t {
                    Some(RdfTerm::BlankNode(b)) => (i, colour[b]),
                    other => (i, hash_of(other)),
                })
                .collect();
            for (i, t) in terms(q).iter().enumerate() {
                if let Some(RdfTerm::BlankNode(b)) = t {
                    signatures.entry(b.clone()).or_default().push(hash_of((i, &shape)));
                }
            }
        }
        let next: BTreeMap<String, u64> = signatures
            .into_iter()
            .map(|(b, mut sig)| {
                sig.sort_unstable();
                let c = hash_of((colour[&b], sig));
                (b, c)
            })
            .collect();
        if next == colour {
            break;
        }
        colour = next;
    }
    colour
}

fn rename(q: &Quad, m: &HashMap<&str, &str>) -> Option<Quad> {
    let map = |t: &RdfTerm| -> Option<RdfTerm> {
        Some(match t {
            RdfTerm::BlankNode(b) => RdfTerm::BlankNode((*m.get(b.as_str())?).to_owned()),
            t => t.clone(),
        })
    };
    Some(Quad {
        subject: map(&q.subject)?,
        predicate: map(&q.predicate)?,
        object: map(&q.object)?,
        graph: match &q.graph {
            Some(g) => Some(map(g)?),
            None => None,
        },
    })
}

/// Whether the two quad sets are equal up to a bijective renaming of
/// blank nodes.
pub fn isomorphic(a: &BTreeSet<Quad>, b: &BTreeSet<Quad>) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let (a_blank, a_ground): (Vec<&Quad>, Vec<&Quad>) = a.iter().partition(|q| has_blank(q));
    let (b_blank, b_ground): (Vec<&Quad>, Vec<&Quad>) = b.iter().partition(|q| has_blank(q));
    if a_ground != b_ground || a_blank.len() != b_blank.len() {
        return false;
    }
    let a_nodes = blank_nodes(&a_blank);
    let b_nodes = blank_nodes(&b_blank);
    if a_nodes.len() != b_nodes.len() {
        return false;
    }
    let ca = colours(&a_blank, &a_nodes);
    let cb = colours(&b_blank, &b_nodes);
    let mut hist_a: Vec<u64> = ca.values().copied().collect();
    let mut hist_b: Vec<u64> = cb.values().copied().collect();
    hist_a.sort_unstable();
    hist_b.sort_unstable();
    if hist_a != hist_b {
        return false;
    }
    let b_set: BTreeSet<&Quad> = b_blank.iter().copied().collect();
    let mut order: Vec<&str> = a_nodes.iter().map(String::as_str).collect();
    let class_size = |c: u64| cb.values().filter(|&&x| x == c).count();
    order.sort_by_key(|n| (class_size(ca[*n]), *n));
    let mut mapping: HashMap<&str, &str> = HashMap::new();
    let mut used: BTreeSet<&str> = BTreeSet::new();
    search(&order, 0, &ca, &cb, &a_blank, &b_set, &mut mapping, &mut used)
}

#[allow(clippy::too_many_arguments)]
fn search<'a>(
    order: &[&'a str],
    i: usize,
    ca: &BTreeMap<String, u64>,
    cb: &'a BTreeMap<String, u64>,
    a_quads: &[&Quad],
    b_set: &BTreeSet<&Quad>,
    mapping: &mut HashMap<&'a str, &'a str>,
    used: &mut BTreeSet<&'a str>,
) -> bool {
    let Some(&node) = order.get(i) else {
        return a_quads.iter().all(|q| rename(q, mapping).is_some_and(|r| b_set.contains(&r)));
    };
    for (cand, &c) in cb {
        if c != ca[node] || used.contains(cand.as_str()) {
            continue;
        }
        mapping.insert(node, cand);
        used.insert(cand);
        // every quad whose blank nodes are all mapped must exist on the other side
        let consistent = a_quads
            .iter()
            .all(|q| rename(q, mapping).is_none_or(|r| b_set.contains(&r)));
        if consistent && search(order, i + 1, ca, cb, a_quads, b_set, mapping, used) {
            return true;
        }
        mapping.remove(node);
        used.remove(cand.as_str());
    }
    false
}
