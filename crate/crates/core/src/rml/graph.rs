//! RDF graphs holding mapping documents, and Turtle parsing into them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::term::{Literal, RdfTerm};

pub type GraphTriple = (RdfTerm, RdfTerm, RdfTerm);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("Turtle syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: u64,
        column: u64,
        message: String,
    },
    #[error("invalid base IRI {0:?}")]
    BadBase(String),
    #[error("unsupported mapping content: {0}")]
    Unsupported(String),
}

/// A set of triples plus the base IRI it was parsed with.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct Graph {
    triples: BTreeSet<GraphTriple>,
    base: String,
    next_blank: usize,
}

impl Graph {
    pub fn new(base: impl Into<String>) -> Self {
        Self {
            triples: BTreeSet::new(),
            base: base.into(),
            next_blank: 0,
        }
    }

    pub fn base(&self) -> &str {
        &self.base
    }

    pub fn triples(&self) -> &BTreeSet<GraphTriple> {
        &self.triples
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn contains(&self, s: &RdfTerm, p: &str, o: &RdfTerm) -> bool {
        self.triples
            .contains(&(s.clone(), RdfTerm::Iri(p.to_owned()), o.clone()))
    }

    pub fn insert(&mut self, s: RdfTerm, p: &str, o: RdfTerm) -> bool {
        self.triples.insert((s, RdfTerm::Iri(p.to_owned()), o))
    }

    pub fn insert_triple(&mut self, t: GraphTriple) -> bool {
        self.triples.insert(t)
    }

    pub fn remove(&mut self, s: &RdfTerm, p: &str, o: &RdfTerm) -> bool {
        self.triples
            .remove(&(s.clone(), RdfTerm::Iri(p.to_owned()), o.clone()))
    }

    /// Objects of `(s, p, ?)`, in term order.
    pub fn objects(&self, s: &RdfTerm, p: &str) -> Vec<RdfTerm> {
        self.triples_from(s)
            .filter(|(_, pp, _)| pp.as_iri() == Some(p))
            .map(|(_, _, o)| o.clone())
            .collect()
    }

    pub fn object(&self, s: &RdfTerm, p: &str) -> Option<RdfTerm> {
        self.objects(s, p).into_iter().next()
    }

    /// Subjects of `(?, p, o)`, in term order.
    pub fn subjects(&self, p: &str, o: &RdfTerm) -> Vec<RdfTerm> {
        self.triples
            .iter()
            .filter(|(_, pp, oo)| pp.as_iri() == Some(p) && oo == o)
            .map(|(s, _, _)| s.clone())
            .collect()
    }

    /// All `(s, o)` pairs for predicate `p`.
    pub fn pairs(&self, p: &str) -> Vec<(RdfTerm, RdfTerm)> {
        self.triples
            .iter()
            .filter(|(_, pp, _)| pp.as_iri() == Some(p))
            .map(|(s, _, o)| (s.clone(), o.clone()))
            .collect()
    }

    pub fn has_predicate(&self, p: &str) -> bool {
        self.triples.iter().any(|(_, pp, _)| pp.as_iri() == Some(p))
    }

    pub fn triples_from<'a>(&'a self, s: &'a RdfTerm) -> impl Iterator<Item = &'a GraphTriple> + 'a {
        let start = (s.clone(), RdfTerm::Iri(String::new()), RdfTerm::Iri(String::new()));
        self.triples.range(start..).take_while(move |(ss, _, _)| ss == s)
    }

    /// A blank node not used anywhere in the graph.
    pub fn fresh_blank(&mut self) -> RdfTerm {
        let used: BTreeSet<&str> = self
            .triples
            .iter()
            .flat_map(|(s, _, o)| [s, o])
            .filter_map(|t| match t {
                RdfTerm::BlankNode(l) => Some(l.as_str()),
                _ => None,
            })
            .collect();
        loop {
            let label = format!("n{:04}", self.next_blank);
            self.next_blank += 1;
            if !used.contains(label.as_str()) {
                return RdfTerm::BlankNode(label);
            }
        }
    }

    /// The u-rooted subgraph: triples reachable from `u` without following
    /// `rr:parentTriplesMap` edges.
    pub fn rooted_subgraph(&self, u: &RdfTerm) -> Graph {
        let mut out = Graph::new(self.base.clone());
        let mut frontier = vec![u.clone()];
        let mut visited = BTreeSet::new();
        while let Some(node) = frontier.pop() {
            if !visited.insert(node.clone()) {
                continue;
            }
            for t in self.triples_from(&node) {
                out.triples.insert(t.clone());
                if t.1.as_iri() != Some(crate::vocab::rr::PARENT_TRIPLES_MAP) && t.2.is_resource() {
                    frontier.push(t.2.clone());
                }
            }
        }
        out
    }
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (s, p, o) in &self.triples {
            writeln!(f, "{s} {p} {o} .")?;
        }
        Ok(())
    }
}

/// Parses Turtle. Blank nodes are relabelled `g0`, `g1`, ... in order of
/// first appearance so repeated parses give identical graphs.
pub fn parse_turtle(bytes: &[u8], base: &str) -> Result<Graph, ParseError> {
    let parser = oxttl::TurtleParser::new()
        .with_base_iri(base)
        .map_err(|_| ParseError::BadBase(base.to_owned()))?;
    let mut graph = Graph::new(base);
    let mut labels: BTreeMap<String, String> = BTreeMap::new();
    let mut relabel = |id: &str| -> RdfTerm {
        let n = labels.len();
        RdfTerm::BlankNode(labels.entry(id.to_owned()).or_insert_with(|| format!("g{n}")).clone())
    };
    for item in parser.for_slice(bytes) {
        let triple = item.map_err(|e| {
            let start = e.location().start;
            ParseError::Syntax {
                line: start.line + 1,
                column: start.column + 1,
                message: e.message().to_owned(),
            }
        })?;
        let s = match &triple.subject {
            oxrdf::NamedOrBlankNode::NamedNode(n) => RdfTerm::Iri(n.as_str().to_owned()),
            oxrdf::NamedOrBlankNode::BlankNode(b) => relabel(b.as_str()),
        };
        let p = RdfTerm::Iri(triple.predicate.as_str().to_owned());
        let o = match &triple.object {
            oxrdf::Term::NamedNode(n) => RdfTerm::Iri(n.as_str().to_owned()),
            oxrdf::Term::BlankNode(b) => relabel(b.as_str()),
            oxrdf::Term::Literal(l) => {
                if let Some(lang) = l.language() {
                    return Err(ParseError::Unsupported(format!(
                        "language-tagged literal {:?}@{lang}",
                        l.value()
                    )));
                }
                RdfTerm::Literal(
                    Literal::new(l.value(), l.datatype().as_str())
                        .expect("parser produces valid datatype IRIs"),
                )
            }
        };
        graph.triples.insert((s, p, o));
    }
    Ok(graph)
}
