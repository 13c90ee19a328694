//! RDF datasets, their construction from mapping relations, and N-Quads output.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{self, Write};

use thiserror::Error;

use crate::relation::{fmt_attrs, Attribute, MappingRelation};
use crate::term::{RdfTerm, Value};
use crate::vocab::rr;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DatasetError {
    #[error("relation schema {0} lacks the reserved attributes a_s, a_p, a_o, a_g")]
    MissingReservedAttributes(String),
    #[error("invalid triple ({0}, {1}, {2})")]
    InvalidTriple(String, String, String),
    #[error("invalid graph name {0}")]
    InvalidGraphName(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    subject: RdfTerm,
    predicate: RdfTerm,
    object: RdfTerm,
}

impl Triple {
    pub fn new(subject: RdfTerm, predicate: RdfTerm, object: RdfTerm) -> Result<Self, DatasetError> {
        if !subject.is_resource() || !predicate.is_iri() {
            return Err(DatasetError::InvalidTriple(
                subject.to_string(),
                predicate.to_string(),
                object.to_string(),
            ));
        }
        Ok(Self {
            subject,
            predicate,
            object,
        })
    }

    fn from_values(s: &Value, p: &Value, o: &Value) -> Option<Self> {
        Triple::new(s.term()?.clone(), p.term()?.clone(), o.term()?.clone()).ok()
    }

    pub fn subject(&self) -> &RdfTerm {
        &self.subject
    }

    pub fn predicate(&self) -> &RdfTerm {
        &self.predicate
    }

    pub fn object(&self) -> &RdfTerm {
        &self.object
    }
}

/// A default graph plus named graphs. Named graphs are never empty and never
/// named `rr:defaultGraph`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RdfDataset {
    default_graph: BTreeSet<Triple>,
    named_graphs: BTreeMap<RdfTerm, BTreeSet<Triple>>,
}

/// A quad as it appears in N-Quads; `graph == None` is the default graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Quad {
    pub subject: RdfTerm,
    pub predicate: RdfTerm,
    pub object: RdfTerm,
    pub graph: Option<RdfTerm>,
}

impl Quad {
    pub fn to_nquads_line(&self) -> String {
        match &self.graph {
            Some(g) => format!("{} {} {} {} .", self.subject, self.predicate, self.object, g),
            None => format!("{} {} {} .", self.subject, self.predicate, self.object),
        }
    }
}

impl RdfDataset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, triple: Triple, graph: Option<RdfTerm>) -> Result<(), DatasetError> {
        match graph {
            None => {
                self.default_graph.insert(triple);
            }
            Some(RdfTerm::Iri(ref iri)) if iri == rr::DEFAULT_GRAPH => {
                self.default_graph.insert(triple);
            }
            Some(name) if name.is_resource() => {
                self.named_graphs.entry(name).or_default().insert(triple);
            }
            Some(name) => return Err(DatasetError::InvalidGraphName(name.to_string())),
        }
        Ok(())
    }

    pub fn default_graph(&self) -> &BTreeSet<Triple> {
        &self.default_graph
    }

    pub fn named_graphs(&self) -> &BTreeMap<RdfTerm, BTreeSet<Triple>> {
        &self.named_graphs
    }

    pub fn named_graph(&self, name: &RdfTerm) -> Option<&BTreeSet<Triple>> {
        self.named_graphs.get(name)
    }

    pub fn len(&self) -> usize {
        self.default_graph.len() + self.named_graphs.values().map(BTreeSet::len).sum::<usize>()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn quads(&self) -> impl Iterator<Item = Quad> + '_ {
        let default = self.default_graph.iter().map(|t| Quad {
            subject: t.subject.clone(),
            predicate: t.predicate.clone(),
            object: t.object.clone(),
            graph: None,
        });
        let named = self.named_graphs.iter().flat_map(|(g, triples)| {
            triples.iter().map(move |t| Quad {
                subject: t.subject.clone(),
                predicate: t.predicate.clone(),
                object: t.object.clone(),
                graph: Some(g.clone()),
            })
        });
        default.chain(named)
    }

    /// Serialized quads in lexicographic line order.
    pub fn to_nquads_lines(&self) -> Vec<String> {
        let mut lines: Vec<String> = self.quads().map(|q| q.to_nquads_line()).collect();
        lines.sort();
        lines
    }

    pub fn write_nquads<W: Write>(&self, mut out: W) -> io::Result<()> {
        for line in self.to_nquads_lines() {
            writeln!(out, "{line}")?;
        }
        out.flush()
    }

    pub fn to_nquads(&self) -> String {
        let mut buf = Vec::new();
        self.write_nquads(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("N-Quads output is UTF-8")
    }
}

/// The dataset generated by a relation with attributes `a_s, a_p, a_o, a_g`.
///
/// Tuples whose subject/predicate/object values do not form a triple, or
/// whose graph value is not an IRI or blank node, are dropped.
pub fn relation_to_dataset(relation: &MappingRelation) -> Result<RdfDataset, DatasetError> {
    let reserved = Attribute::reserved();
    if !reserved.is_subset(relation.schema()) {
        return Err(DatasetError::MissingReservedAttributes(fmt_attrs(
            relation.schema(),
        )));
    }
    let (s, p, o, g) = (
        Attribute::subject(),
        Attribute::predicate(),
        Attribute::object(),
        Attribute::graph(),
    );
    let mut dataset = RdfDataset::new();
    for t in relation.tuples() {
        let lookup = |a: &Attribute| t.get(a).expect("schema checked above");
        let Some(triple) = Triple::from_values(lookup(&s), lookup(&p), lookup(&o)) else {
            continue;
        };
        let graph = match lookup(&g) {
            Value::Term(name) if name.is_resource() => name.clone(),
            _ => continue,
        };
        dataset
            .insert(triple, Some(graph))
            .expect("graph name checked above");
    }
    Ok(dataset)
}
