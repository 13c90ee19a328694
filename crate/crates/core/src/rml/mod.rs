//! RML front end: Turtle parsing, normalization and translation to plans.

pub mod graph;
pub mod normalize;
pub mod template;
pub mod translate;

pub use graph::{parse_turtle, Graph, ParseError};
pub use normalize::{check_normal_form, normalize, NormalizeError};
pub use template::{split_template, TemplatePart};
pub use translate::{
    create_ext_expr, extract_queries, src_and_root_query, translate, AttributeGenerator,
    SourceResolver, TranslateError,
};
