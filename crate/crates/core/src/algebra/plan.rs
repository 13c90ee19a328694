//! Plans: trees of operator nodes, their static schemas, execution, and the
//! text dump.
//!
//! Nodes are addressed by paths: the root is `0`, and the `i`-th child of
//! node `p` is `p.i`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::sync::Arc;

use thiserror::Error;

use crate::algebra::expr::ExtendExpression;
use crate::algebra::ops::{self, OpError};
use crate::diagnostics::Diagnostics;
use crate::functions::{FunctionError, FunctionRegistry};
use crate::relation::{fmt_attrs, Attribute, MappingRelation};
use crate::source::{SharedSource, SourceError};

#[derive(Clone)]
pub enum Plan {
    Source {
        source: SharedSource,
        root_query: String,
        queries: BTreeMap<Attribute, String>,
    },
    Extend {
        input: Box<Plan>,
        attr: Attribute,
        expr: ExtendExpression,
    },
    Project {
        input: Box<Plan>,
        attrs: BTreeSet<Attribute>,
    },
    EquiJoin {
        left: Box<Plan>,
        right: Box<Plan>,
        pairs: BTreeSet<(Attribute, Attribute)>,
    },
    Union {
        left: Box<Plan>,
        right: Box<Plan>,
    },
    /// The relation with the given schema and no tuples.
    Empty { schema: BTreeSet<Attribute> },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid plan node {path} ({kind}): {reason}")]
pub struct PlanError {
    pub path: String,
    pub kind: &'static str,
    pub reason: String,
}

#[derive(Debug, Error)]
pub enum ExecError {
    #[error("plan node {path} ({source_label}): {error}")]
    Source {
        path: String,
        source_label: String,
        #[source]
        error: SourceError,
    },
    #[error("plan node {path} ({kind}): {error}")]
    Operator {
        path: String,
        kind: &'static str,
        #[source]
        error: OpError,
    },
    #[error(transparent)]
    Invalid(#[from] PlanError),
}

/// What execution needs besides the plan.
#[derive(Debug, Clone, Copy)]
pub struct ExecContext<'a> {
    pub registry: &'a FunctionRegistry,
    pub diagnostics: &'a Diagnostics,
}

pub fn child_path(path: &str, i: usize) -> String {
    format!("{path}.{i}")
}

impl Plan {
    pub fn source(
        source: SharedSource,
        root_query: impl Into<String>,
        queries: BTreeMap<Attribute, String>,
    ) -> Plan {
        Plan::Source {
            source,
            root_query: root_query.into(),
            queries,
        }
    }

    pub fn extend(self, attr: impl Into<Attribute>, expr: ExtendExpression) -> Plan {
        Plan::Extend {
            input: Box::new(self),
            attr: attr.into(),
            expr,
        }
    }

    pub fn project(self, attrs: impl IntoIterator<Item = Attribute>) -> Plan {
        Plan::Project {
            input: Box::new(self),
            attrs: attrs.into_iter().collect(),
        }
    }

    pub fn join(self, right: Plan, pairs: impl IntoIterator<Item = (Attribute, Attribute)>) -> Plan {
        Plan::EquiJoin {
            left: Box::new(self),
            right: Box::new(right),
            pairs: pairs.into_iter().collect(),
        }
    }

    pub fn union(self, right: Plan) -> Plan {
        Plan::Union {
            left: Box::new(self),
            right: Box::new(right),
        }
    }

    pub fn empty(schema: impl IntoIterator<Item = Attribute>) -> Plan {
        Plan::Empty {
            schema: schema.into_iter().collect(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Plan::Source { .. } => "SOURCE",
            Plan::Extend { .. } => "EXTEND",
            Plan::Project { .. } => "PROJECT",
            Plan::EquiJoin { .. } => "EQUIJOIN",
            Plan::Union { .. } => "UNION",
            Plan::Empty { .. } => "EMPTY",
        }
    }

    pub fn children(&self) -> Vec<&Plan> {
        match self {
            Plan::Source { .. } | Plan::Empty { .. } => vec![],
            Plan::Extend { input, .. } | Plan::Project { input, .. } => vec![input],
            Plan::EquiJoin { left, right, .. } | Plan::Union { left, right } => vec![left, right],
        }
    }

    pub fn children_mut(&mut self) -> Vec<&mut Plan> {
        match self {
            Plan::Source { .. } | Plan::Empty { .. } => vec![],
            Plan::Extend { input, .. } | Plan::Project { input, .. } => vec![input],
            Plan::EquiJoin { left, right, .. } | Plan::Union { left, right } => vec![left, right],
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    fn child_indices(path: &str) -> Option<Vec<usize>> {
        let mut parts = path.split('.');
        if parts.next()? != "0" {
            return None;
        }
        parts.map(|p| p.parse().ok()).collect()
    }

    pub fn at(&self, path: &str) -> Option<&Plan> {
        let mut node = self;
        for i in Self::child_indices(path)? {
            node = node.children().get(i).copied()?;
        }
        Some(node)
    }

    pub fn at_mut(&mut self, path: &str) -> Option<&mut Plan> {
        let mut node = self;
        for i in Self::child_indices(path)? {
            node = node.children_mut().into_iter().nth(i)?;
        }
        Some(node)
    }

    /// Static output schema; fails on the first structural violation, in
    /// bottom-up order.
    pub fn schema_of(&self) -> Result<BTreeSet<Attribute>, PlanError> {
        self.schema_at("0", None)
    }

    /// Like [`Plan::schema_of`], and additionally checks function names and
    /// arities and warns about extend expressions that reference attributes
    /// their input does not have.
    pub fn validate(
        &self,
        registry: &FunctionRegistry,
        diagnostics: &Diagnostics,
    ) -> Result<BTreeSet<Attribute>, PlanError> {
        self.schema_at("0", Some((registry, diagnostics)))
    }

    fn schema_at(
        &self,
        path: &str,
        checks: Option<(&FunctionRegistry, &Diagnostics)>,
    ) -> Result<BTreeSet<Attribute>, PlanError> {
        let fail = |reason: String| PlanError {
            path: path.to_owned(),
            kind: self.kind(),
            reason,
        };
        let sub = |i: usize, p: &Plan| p.schema_at(&child_path(path, i), checks);
        match self {
            Plan::Source { queries, .. } => {
                if queries.is_empty() {
                    return Err(fail("attribute query map is empty".into()));
                }
                let mut seen = BTreeSet::new();
                for q in queries.values() {
                    if !seen.insert(q) {
                        return Err(fail(format!("query {q:?} is bound to two attributes")));
                    }
                }
                Ok(queries.keys().cloned().collect())
            }
            Plan::Extend { input, attr, expr } => {
                let mut schema = sub(0, input)?;
                if schema.contains(attr) {
                    return Err(fail(format!("attribute {attr} already in input schema")));
                }
                if let Some((registry, diagnostics)) = checks {
                    expr.check(registry).map_err(|e: FunctionError| fail(e.to_string()))?;
                    let unbound: BTreeSet<_> = expr.attrs().difference(&schema).cloned().collect();
                    if !unbound.is_empty() {
                        diagnostics.warn(format!(
                            "plan node {path}: extend of {attr} references unbound attributes {}",
                            fmt_attrs(&unbound)
                        ));
                    }
                }
                schema.insert(attr.clone());
                Ok(schema)
            }
            Plan::Project { input, attrs } => {
                let schema = sub(0, input)?;
                if attrs.is_empty() || !attrs.is_subset(&schema) {
                    return Err(fail(format!(
                        "projection {} is not a non-empty subset of {}",
                        fmt_attrs(attrs),
                        fmt_attrs(&schema)
                    )));
                }
                Ok(attrs.clone())
            }
            Plan::EquiJoin { left, right, pairs } => {
                let l = sub(0, left)?;
                let r = sub(1, right)?;
                let overlap: BTreeSet<_> = l.intersection(&r).cloned().collect();
                if !overlap.is_empty() {
                    return Err(fail(format!("inputs share attributes {}", fmt_attrs(&overlap))));
                }
                if let Some((a, b)) = pairs.iter().find(|(a, b)| !l.contains(a) || !r.contains(b)) {
                    return Err(fail(format!("join pair ({a}, {b}) not in left x right")));
                }
                Ok(l.union(&r).cloned().collect())
            }
            Plan::Union { left, right } => {
                let l = sub(0, left)?;
                let r = sub(1, right)?;
                if l != r {
                    return Err(fail(format!(
                        "input schemas differ: {} vs {}",
                        fmt_attrs(&l),
                        fmt_attrs(&r)
                    )));
                }
                Ok(l)
            }
            Plan::Empty { schema } => {
                if schema.is_empty() {
                    return Err(fail("schema is empty".into()));
                }
                Ok(schema.clone())
            }
        }
    }

    /// Validates, then evaluates bottom-up.
    pub fn execute(&self, ctx: ExecContext<'_>) -> Result<MappingRelation, ExecError> {
        self.validate(ctx.registry, ctx.diagnostics)?;
        self.execute_at("0", ctx)
    }

    fn execute_at(&self, path: &str, ctx: ExecContext<'_>) -> Result<MappingRelation, ExecError> {
        let op_err = |error: OpError| ExecError::Operator {
            path: path.to_owned(),
            kind: self.kind(),
            error,
        };
        let sub = |i: usize, p: &Plan| p.execute_at(&child_path(path, i), ctx);
        match self {
            Plan::Source {
                source,
                root_query,
                queries,
            } => source
                .relation(root_query, queries, ctx.diagnostics)
                .map_err(|error| ExecError::Source {
                    path: path.to_owned(),
                    source_label: source.describe(),
                    error,
                }),
            Plan::Extend { input, attr, expr } => {
                ops::extend(&sub(0, input)?, attr, expr, ctx.registry).map_err(op_err)
            }
            Plan::Project { input, attrs } => {
                ops::project(&sub(0, input)?, attrs).map_err(|e| op_err(e.into()))
            }
            Plan::EquiJoin { left, right, pairs } => {
                ops::equijoin(&sub(0, left)?, &sub(1, right)?, pairs).map_err(|e| op_err(e.into()))
            }
            Plan::Union { left, right } => {
                ops::union(&sub(0, left)?, &sub(1, right)?).map_err(|e| op_err(e.into()))
            }
            Plan::Empty { schema } => {
                MappingRelation::empty(schema.iter().cloned()).map_err(|e| op_err(e.into()))
            }
        }
    }

    /// The indented text dump, one node per line:
    /// `KIND [schema] id=<path> key=value...`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        self.dump_at("0", 0, &mut out);
        out
    }

    fn dump_at(&self, path: &str, depth: usize, out: &mut String) {
        let schema = match self.schema_at(path, None) {
            Ok(s) => s.iter().map(Attribute::name).collect::<Vec<_>>().join(","),
            Err(_) => "?".into(),
        };
        let _ = write!(out, "{:indent$}{} [{schema}] id={path}", "", self.kind(), indent = depth * 2);
        match self {
            Plan::Source {
                source,
                root_query,
                queries,
            } => {
                let qs: Vec<String> = queries.iter().map(|(a, q)| format!("{a}:{q:?}")).collect();
                let _ = write!(
                    out,
                    " source={} root={root_query:?} queries={{{}}}",
                    source.describe(),
                    qs.join(",")
                );
            }
            Plan::Extend { attr, expr, .. } => {
                let _ = write!(out, " attr={attr} expr={expr}");
            }
            Plan::EquiJoin { pairs, .. } => {
                let ps: Vec<String> = pairs.iter().map(|(a, b)| format!("({a},{b})")).collect();
                let _ = write!(out, " pairs={{{}}}", ps.join(","));
            }
            Plan::Project { .. } | Plan::Union { .. } | Plan::Empty { .. } => {}
        }
        out.push('\n');
        for (i, c) in self.children().into_iter().enumerate() {
            c.dump_at(&child_path(path, i), depth + 1, out);
        }
    }
}

fn same_source(a: &SharedSource, b: &SharedSource) -> bool {
    std::ptr::eq(Arc::as_ptr(a) as *const (), Arc::as_ptr(b) as *const ())
}

/// Structural equality; sources compare by identity.
impl PartialEq for Plan {
    fn eq(&self, other: &Plan) -> bool {
        match (self, other) {
            (
                Plan::Source {
                    source: s1,
                    root_query: q1,
                    queries: m1,
                },
                Plan::Source {
                    source: s2,
                    root_query: q2,
                    queries: m2,
                },
            ) => same_source(s1, s2) && q1 == q2 && m1 == m2,
            (
                Plan::Extend { input: i1, attr: a1, expr: e1 },
                Plan::Extend { input: i2, attr: a2, expr: e2 },
            ) => a1 == a2 && e1 == e2 && i1 == i2,
            (Plan::Project { input: i1, attrs: p1 }, Plan::Project { input: i2, attrs: p2 }) => {
                p1 == p2 && i1 == i2
            }
            (
                Plan::EquiJoin { left: l1, right: r1, pairs: j1 },
                Plan::EquiJoin { left: l2, right: r2, pairs: j2 },
            ) => j1 == j2 && l1 == l2 && r1 == r2,
            (Plan::Union { left: l1, right: r1 }, Plan::Union { left: l2, right: r2 }) => {
                l1 == l2 && r1 == r2
            }
            (Plan::Empty { schema: s1 }, Plan::Empty { schema: s2 }) => s1 == s2,
            _ => false,
        }
    }
}

impl Eq for Plan {}

impl fmt::Debug for Plan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.dump())
    }
}
