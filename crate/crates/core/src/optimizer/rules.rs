//! Rewrite rules over plans. Each rule matches at a single node; side
//! conditions are checked against static schemas.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::algebra::{ExtendExpression, Plan};
use crate::relation::{fmt_attrs, Attribute};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum JoinDirection {
    /// `Extend(EquiJoin(r1, r2))` to `EquiJoin(Extend(r1), r2)`.
    PushLeft,
    /// `Extend(EquiJoin(r1, r2))` to `EquiJoin(r1, Extend(r2))`.
    PushRight,
    /// `EquiJoin(Extend(r1), r2)` to `Extend(EquiJoin(r1, r2))`.
    PullLeft,
    /// `EquiJoin(r1, Extend(r2))` to `Extend(EquiJoin(r1, r2))`.
    PullRight,
}

impl JoinDirection {
    pub const ALL: [JoinDirection; 4] = [
        JoinDirection::PushLeft,
        JoinDirection::PushRight,
        JoinDirection::PullLeft,
        JoinDirection::PullRight,
    ];

    fn name(self) -> &'static str {
        match self {
            JoinDirection::PushLeft => "push-left",
            JoinDirection::PushRight => "push-right",
            JoinDirection::PullLeft => "pull-left",
            JoinDirection::PullRight => "pull-right",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    /// `Project[P ∪ {a}](Extend[a, φ](r))` to `Extend[a, φ](Project[P](r))`
    /// when `attrs(φ) ∩ schema(r) ⊆ P`.
    ProjectIntoExtend,
    /// `Project[P](r)` to `Project[P](Project[P ∪ extra](r))`.
    ProjectSplit { extra: BTreeSet<Attribute> },
    /// `Project[P](Extend[a, φ](r))` to
    /// `Project[P](Extend[a, φ](Project[P'](r)))` with
    /// `P' = (P \ {a}) ∪ (attrs(φ) ∩ schema(r))`.
    PartialProjectPush,
    /// `Project[P](Source(s, q, 𝕡))` to `Source(s, q, 𝕡|P)`.
    ///
    /// A dropped query that yields no value for some context object removes
    /// that object's tuples from the unprojected source, so every dropped
    /// query must be total on the source.
    ProjectIntoSource,
    /// `Project[schema(r)](r)` to `r`.
    ProjectRemove,
    ExtendJoin(JoinDirection),
    /// `Extend[a1, φ1](Extend[a2, φ2](r))` to `Extend[a2, φ2](Extend[a1, φ1](r))`
    /// when neither expression mentions the other's attribute.
    ExtendSwap,
}

impl Rule {
    /// The rules that take no parameters, in a fixed order.
    pub fn all_simple() -> Vec<Rule> {
        let mut rules = vec![
            Rule::ProjectIntoExtend,
            Rule::PartialProjectPush,
            Rule::ProjectIntoSource,
            Rule::ProjectRemove,
        ];
        rules.extend(JoinDirection::ALL.map(Rule::ExtendJoin));
        rules.push(Rule::ExtendSwap);
        rules
    }

    pub fn name(&self) -> String {
        match self {
            Rule::ProjectIntoExtend => "project-into-extend".into(),
            Rule::ProjectSplit { extra } => format!("project-split{}", fmt_attrs(extra)),
            Rule::PartialProjectPush => "partial-project-push".into(),
            Rule::ProjectIntoSource => "project-into-source".into(),
            Rule::ProjectRemove => "project-remove".into(),
            Rule::ExtendJoin(d) => format!("extend-join-{}", d.name()),
            Rule::ExtendSwap => "extend-swap".into(),
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{rule} not applicable at {path}: {reason}")]
pub struct RewriteError {
    pub rule: String,
    pub path: String,
    pub reason: String,
}

fn schema(p: &Plan) -> Result<BTreeSet<Attribute>, String> {
    p.schema_of().map_err(|e| e.to_string())
}

fn require(cond: bool, reason: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(reason())
    }
}

fn intersect(a: &BTreeSet<Attribute>, b: &BTreeSet<Attribute>) -> BTreeSet<Attribute> {
    a.intersection(b).cloned().collect()
}

fn extend_parts(p: &Plan) -> Option<(&Plan, &Attribute, &ExtendExpression)> {
    match p {
        Plan::Extend { input, attr, expr } => Some((input, attr, expr)),
        _ => None,
    }
}

impl Rule {
    pub fn matches(&self, p: &Plan) -> bool {
        self.rewrite(p).is_ok()
    }

    /// Rewrites the node `p` itself.
    pub fn apply(&self, p: &Plan) -> Result<Plan, RewriteError> {
        self.rewrite(p).map_err(|reason| RewriteError {
            rule: self.name(),
            path: "0".into(),
            reason,
        })
    }

    /// Rewrites the node at `path` inside `plan`, returning the whole plan.
    pub fn apply_at(&self, plan: &Plan, path: &str) -> Result<Plan, RewriteError> {
        let err = |reason: String| RewriteError {
            rule: self.name(),
            path: path.to_owned(),
            reason,
        };
        let node = plan.at(path).ok_or_else(|| err("no such node".into()))?;
        let replacement = self.rewrite(node).map_err(err)?;
        let mut out = plan.clone();
        *out.at_mut(path).expect("path resolved above") = replacement;
        Ok(out)
    }

    /// Whether the node kind is the one the rule rewrites; checked before
    /// anything that walks the subtree.
    fn fits(&self, p: &Plan) -> bool {
        match self {
            Rule::ExtendJoin(JoinDirection::PullLeft | JoinDirection::PullRight) => {
                matches!(p, Plan::EquiJoin { .. })
            }
            Rule::ExtendJoin(_) | Rule::ExtendSwap => matches!(p, Plan::Extend { .. }),
            _ => matches!(p, Plan::Project { .. }),
        }
    }

    fn rewrite(&self, p: &Plan) -> Result<Plan, String> {
        if self.fits(p) {
            schema(p)?;
        }
        match self {
            Rule::ProjectIntoExtend => {
                let Plan::Project { input, attrs: q } = p else {
                    return Err("not a projection".into());
                };
                let (r, a, phi) = extend_parts(input).ok_or("projection input is not an extend")?;
                let a_schema = schema(r)?;
                require(q.contains(a), || format!("extend attribute {a} is projected away"))?;
                let mut pp = q.clone();
                pp.remove(a);
                require(!pp.is_empty(), || "no projection attributes besides the extend attribute".into())?;
                let used = intersect(&phi.attrs(), &a_schema);
                require(used.is_subset(&pp), || {
                    format!("{phi} uses {} outside {}", fmt_attrs(&used), fmt_attrs(&pp))
                })?;
                Ok(r.clone().project(pp).extend(a.clone(), phi.clone()))
            }
            Rule::ProjectSplit { extra } => {
                let Plan::Project { input, attrs } = p else {
                    return Err("not a projection".into());
                };
                let a_schema = schema(input)?;
                require(extra.is_subset(&a_schema), || {
                    format!("{} not within {}", fmt_attrs(extra), fmt_attrs(&a_schema))
                })?;
                let inner: BTreeSet<_> = attrs.union(extra).cloned().collect();
                Ok((**input).clone().project(inner).project(attrs.iter().cloned()))
            }
            Rule::PartialProjectPush => {
                let Plan::Project { input, attrs } = p else {
                    return Err("not a projection".into());
                };
                let (r, a, phi) = extend_parts(input).ok_or("projection input is not an extend")?;
                let a_schema = schema(r)?;
                let mut inner = attrs.clone();
                inner.remove(a);
                inner.extend(intersect(&phi.attrs(), &a_schema));
                require(!inner.is_empty(), || "pushed projection would be empty".into())?;
                Ok(r.clone()
                    .project(inner)
                    .extend(a.clone(), phi.clone())
                    .project(attrs.iter().cloned()))
            }
            Rule::ProjectIntoSource => {
                let Plan::Project { input, attrs } = p else {
                    return Err("not a projection".into());
                };
                let Plan::Source {
                    source,
                    root_query,
                    queries,
                } = &**input
                else {
                    return Err("projection input is not a source".into());
                };
                for (a, q) in queries {
                    if !attrs.contains(a) {
                        require(source.query_is_total(root_query, q), || {
                            format!("dropped query {q:?} yields no value for some context object")
                        })?;
                    }
                }
                let kept = queries
                    .iter()
                    .filter(|(a, _)| attrs.contains(*a))
                    .map(|(a, q)| (a.clone(), q.clone()))
                    .collect();
                Ok(Plan::source(source.clone(), root_query.clone(), kept))
            }
            Rule::ProjectRemove => {
                let Plan::Project { input, attrs } = p else {
                    return Err("not a projection".into());
                };
                let a_schema = schema(input)?;
                require(*attrs == a_schema, || {
                    format!("{} differs from input schema {}", fmt_attrs(attrs), fmt_attrs(&a_schema))
                })?;
                Ok((**input).clone())
            }
            Rule::ExtendJoin(direction) => rewrite_extend_join(*direction, p),
            Rule::ExtendSwap => {
                let (inner, a1, phi1) = extend_parts(p).ok_or("not an extend")?;
                let (r, a2, phi2) = extend_parts(inner).ok_or("extend input is not an extend")?;
                require(!phi2.attrs().contains(a1), || format!("{phi2} mentions {a1}"))?;
                require(!phi1.attrs().contains(a2), || format!("{phi1} mentions {a2}"))?;
                Ok(r.clone()
                    .extend(a1.clone(), phi1.clone())
                    .extend(a2.clone(), phi2.clone()))
            }
        }
    }
}

fn rewrite_extend_join(direction: JoinDirection, p: &Plan) -> Result<Plan, String> {
    use JoinDirection::*;
    match direction {
        PushLeft | PushRight => {
            let (join, a, phi) = extend_parts(p).ok_or("not an extend")?;
            let Plan::EquiJoin { left, right, pairs } = join else {
                return Err("extend input is not a join".into());
            };
            let other = if direction == PushLeft { right } else { left };
            let clash = intersect(&phi.attrs(), &schema(other)?);
            require(clash.is_empty(), || format!("{phi} uses {} from the other side", fmt_attrs(&clash)))?;
            let (l, r) = ((**left).clone(), (**right).clone());
            Ok(if direction == PushLeft {
                l.extend(a.clone(), phi.clone()).join(r, pairs.iter().cloned())
            } else {
                l.join(r.extend(a.clone(), phi.clone()), pairs.iter().cloned())
            })
        }
        PullLeft | PullRight => {
            let Plan::EquiJoin { left, right, pairs } = p else {
                return Err("not a join".into());
            };
            let (ext, other) = if direction == PullLeft { (left, right) } else { (right, left) };
            let (r, a, phi) = extend_parts(ext).ok_or("join input is not an extend")?;
            let clash = intersect(&phi.attrs(), &schema(other)?);
            require(clash.is_empty(), || format!("{phi} uses {} from the other side", fmt_attrs(&clash)))?;
            require(!pairs.iter().any(|(x, y)| x == a || y == a), || {
                format!("join condition uses extend attribute {a}")
            })?;
            let joined = if direction == PullLeft {
                r.clone().join((**other).clone(), pairs.iter().cloned())
            } else {
                (**other).clone().join(r.clone(), pairs.iter().cloned())
            };
            Ok(joined.extend(a.clone(), phi.clone()))
        }
    }
}
