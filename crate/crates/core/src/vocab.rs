//! IRIs of the vocabularies the engine understands.

pub mod xsd {
    pub const STRING: &str = "http://www.w3.org/2001/XMLSchema#string";
    pub const INTEGER: &str = "http://www.w3.org/2001/XMLSchema#integer";
    pub const DOUBLE: &str = "http://www.w3.org/2001/XMLSchema#double";
    pub const BOOLEAN: &str = "http://www.w3.org/2001/XMLSchema#boolean";
}

pub mod rdf {
    pub const TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
    pub const LANG_STRING: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#langString";
}

pub mod rr {
    pub const NS: &str = "http://www.w3.org/ns/r2rml#";

    pub const TRIPLES_MAP: &str = "http://www.w3.org/ns/r2rml#TriplesMap";
    pub const SUBJECT_MAP: &str = "http://www.w3.org/ns/r2rml#subjectMap";
    pub const PREDICATE_OBJECT_MAP: &str = "http://www.w3.org/ns/r2rml#predicateObjectMap";
    pub const PREDICATE_MAP: &str = "http://www.w3.org/ns/r2rml#predicateMap";
    pub const OBJECT_MAP: &str = "http://www.w3.org/ns/r2rml#objectMap";
    pub const GRAPH_MAP: &str = "http://www.w3.org/ns/r2rml#graphMap";

    pub const SUBJECT: &str = "http://www.w3.org/ns/r2rml#subject";
    pub const PREDICATE: &str = "http://www.w3.org/ns/r2rml#predicate";
    pub const OBJECT: &str = "http://www.w3.org/ns/r2rml#object";
    pub const GRAPH: &str = "http://www.w3.org/ns/r2rml#graph";
    pub const CLASS: &str = "http://www.w3.org/ns/r2rml#class";

    pub const CONSTANT: &str = "http://www.w3.org/ns/r2rml#constant";
    pub const TEMPLATE: &str = "http://www.w3.org/ns/r2rml#template";
    pub const TERM_TYPE: &str = "http://www.w3.org/ns/r2rml#termType";
    pub const DATATYPE: &str = "http://www.w3.org/ns/r2rml#datatype";
    pub const LANGUAGE: &str = "http://www.w3.org/ns/r2rml#language";

    pub const PARENT_TRIPLES_MAP: &str = "http://www.w3.org/ns/r2rml#parentTriplesMap";
    pub const JOIN_CONDITION: &str = "http://www.w3.org/ns/r2rml#joinCondition";
    pub const CHILD: &str = "http://www.w3.org/ns/r2rml#child";
    pub const PARENT: &str = "http://www.w3.org/ns/r2rml#parent";

    pub const IRI: &str = "http://www.w3.org/ns/r2rml#IRI";
    pub const BLANK_NODE: &str = "http://www.w3.org/ns/r2rml#BlankNode";
    pub const LITERAL: &str = "http://www.w3.org/ns/r2rml#Literal";
    pub const DEFAULT_GRAPH: &str = "http://www.w3.org/ns/r2rml#defaultGraph";

    /// Alias used by some mapping documents for `rml:reference`.
    pub const REFERENCE: &str = "http://www.w3.org/ns/r2rml#reference";
}

pub mod rml {
    pub const LOGICAL_SOURCE: &str = "http://semweb.mmlab.be/ns/rml#logicalSource";
    pub const SOURCE: &str = "http://semweb.mmlab.be/ns/rml#source";
    pub const REFERENCE_FORMULATION: &str = "http://semweb.mmlab.be/ns/rml#referenceFormulation";
    pub const ITERATOR: &str = "http://semweb.mmlab.be/ns/rml#iterator";
    pub const REFERENCE: &str = "http://semweb.mmlab.be/ns/rml#reference";
}

pub mod ql {
    pub const CSV: &str = "http://semweb.mmlab.be/ns/ql#CSV";
    pub const JSON_PATH: &str = "http://semweb.mmlab.be/ns/ql#JSONPath";
    pub const XPATH: &str = "http://semweb.mmlab.be/ns/ql#XPath";
}
