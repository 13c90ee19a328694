//! The fixed rewrite pipeline.
//!
//! Projection rules are applied until none helps, then constant extends are
//! pushed below joins, and the whole thing repeats until nothing changes.
//! Nodes are visited leftmost-innermost first and rules are tried in a fixed
//! order. A step is only taken when it lowers [`Measure`], so the pipeline
//! always terminates.

use std::collections::BTreeSet;
use std::fmt;

use crate::algebra::Plan;
use crate::algebra::plan::child_path;
use crate::optimizer::rules::{JoinDirection, RewriteError, Rule};
use crate::relation::Attribute;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewriteStep {
    pub rule: Rule,
    pub node: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RewriteTrace {
    pub steps: Vec<RewriteStep>,
}

impl RewriteTrace {
    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    /// Re-applies the recorded steps to `plan`.
    pub fn replay(&self, plan: &Plan) -> Result<Plan, RewriteError> {
        self.steps
            .iter()
            .try_fold(plan.clone(), |p, step| step.rule.apply_at(&p, &step.node))
    }
}

impl fmt::Display for RewriteTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, step) in self.steps.iter().enumerate() {
            writeln!(f, "{:>3} {} id={}", i + 1, step.rule, step.node)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Optimized {
    pub plan: Plan,
    pub trace: RewriteTrace,
}

/// Ordered lexicographically: attributes carried by nodes although nothing
/// above them uses them, then plan size, then the number of joins below
/// constant extends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Measure {
    pub unused_attributes: usize,
    pub size: usize,
    pub joins_below_constant_extends: usize,
}

pub fn measure(plan: &Plan) -> Option<Measure> {
    let root = plan.schema_of().ok()?;
    Some(measure_with(plan, &shape(plan), &root))
}

/// The schema of every node of a plan known to be valid.
struct Shape {
    schema: BTreeSet<Attribute>,
    children: Vec<Shape>,
}

fn shape(plan: &Plan) -> Shape {
    let children: Vec<Shape> = plan.children().into_iter().map(shape).collect();
    let schema = match plan {
        Plan::Source { queries, .. } => queries.keys().cloned().collect(),
        Plan::Extend { attr, .. } => {
            let mut s = children[0].schema.clone();
            s.insert(attr.clone());
            s
        }
        Plan::Project { attrs, .. } => attrs.clone(),
        Plan::EquiJoin { .. } => children[0].schema.union(&children[1].schema).cloned().collect(),
        Plan::Union { .. } => children[0].schema.clone(),
        Plan::Empty { schema } => schema.clone(),
    };
    Shape { schema, children }
}

fn measure_with(plan: &Plan, shape: &Shape, needed: &BTreeSet<Attribute>) -> Measure {
    Measure {
        unused_attributes: unused(plan, shape, needed),
        size: plan.size(),
        joins_below_constant_extends: joins_below_constant_extends(plan),
    }
}

/// What each child has to provide, given what is needed from `plan`.
fn child_needs(plan: &Plan, shape: &Shape, needed: &BTreeSet<Attribute>) -> Vec<BTreeSet<Attribute>> {
    match plan {
        Plan::Source { .. } | Plan::Empty { .. } => vec![],
        Plan::Project { attrs, .. } => vec![attrs.clone()],
        Plan::Extend { attr, expr, .. } => {
            let input_schema = &shape.children[0].schema;
            let mut n: BTreeSet<Attribute> = needed.iter().filter(|a| *a != attr).cloned().collect();
            n.extend(expr.attrs().intersection(input_schema).cloned());
            vec![n]
        }
        Plan::EquiJoin { pairs, .. } => {
            let side = |s: &Shape, keys: Vec<Attribute>| {
                let mut n: BTreeSet<Attribute> = needed.intersection(&s.schema).cloned().collect();
                n.extend(keys);
                n
            };
            vec![
                side(&shape.children[0], pairs.iter().map(|(a, _)| a.clone()).collect()),
                side(&shape.children[1], pairs.iter().map(|(_, b)| b.clone()).collect()),
            ]
        }
        Plan::Union { .. } => vec![needed.clone(), needed.clone()],
    }
}

fn unused(plan: &Plan, shape: &Shape, needed: &BTreeSet<Attribute>) -> usize {
    let here = shape.schema.difference(needed).count();
    let below: usize = plan
        .children()
        .into_iter()
        .zip(&shape.children)
        .zip(child_needs(plan, shape, needed))
        .map(|((c, s), n)| unused(c, s, &n))
        .sum();
    here + below
}

fn count_joins(plan: &Plan) -> usize {
    usize::from(matches!(plan, Plan::EquiJoin { .. })) + plan.children().into_iter().map(count_joins).sum::<usize>()
}

fn joins_below_constant_extends(plan: &Plan) -> usize {
    let here = match plan {
        Plan::Extend { input, expr, .. } if expr.is_constant_only() => count_joins(input),
        _ => 0,
    };
    here + plan.children().into_iter().map(joins_below_constant_extends).sum::<usize>()
}

fn is_constant_extend(plan: &Plan) -> bool {
    matches!(plan, Plan::Extend { expr, .. } if expr.is_constant_only())
}

/// A node with what its ancestors need from it and how many constant
/// extends sit above it.
struct Site<'a> {
    path: String,
    plan: &'a Plan,
    shape: &'a Shape,
    needed: BTreeSet<Attribute>,
    constant_extends_above: usize,
}

fn sites<'a>(plan: &'a Plan, shape: &'a Shape, needed: BTreeSet<Attribute>, path: String, above: usize, out: &mut Vec<Site<'a>>) {
    let inner = above + usize::from(is_constant_extend(plan));
    let children = plan.children().into_iter().zip(&shape.children).zip(child_needs(plan, shape, &needed));
    for (i, ((c, s), n)) in children.enumerate() {
        sites(c, s, n, child_path(&path, i), inner, out);
    }
    out.push(Site {
        path,
        plan,
        shape,
        needed,
        constant_extends_above: above,
    });
}

const PROJECTION_RULES: [Rule; 4] = [
    Rule::ProjectIntoExtend,
    Rule::PartialProjectPush,
    Rule::ProjectIntoSource,
    Rule::ProjectRemove,
];

const EXTEND_RULES: [Rule; 2] = [
    Rule::ExtendJoin(JoinDirection::PushLeft),
    Rule::ExtendJoin(JoinDirection::PushRight),
];

/// The first improving step from `rules`, scanning nodes innermost first.
///
/// Rewrites keep the schema of the node they replace, so the measure only
/// changes inside the rewritten subtree, plus the joins it contributes to
/// constant extends above it.
fn find_step(plan: &Plan, current: Measure, rules: &[Rule], constant_only: bool) -> Option<(RewriteStep, Plan, Measure)> {
    let root_shape = shape(plan);
    let mut all = Vec::new();
    sites(plan, &root_shape, root_shape.schema.clone(), "0".into(), 0, &mut all);
    for site in all {
        if constant_only && !is_constant_extend(site.plan) {
            continue;
        }
        let mut before = None;
        for rule in rules {
            let Ok(replacement) = rule.apply(site.plan) else {
                continue;
            };
            if replacement.schema_of().ok().as_ref() != Some(&site.shape.schema) {
                continue;
            }
            let old = *before.get_or_insert_with(|| {
                (measure_with(site.plan, site.shape, &site.needed), count_joins(site.plan))
            });
            let new = (
                measure_with(&replacement, &shape(&replacement), &site.needed),
                count_joins(&replacement),
            );
            let k = site.constant_extends_above;
            let m = Measure {
                unused_attributes: current.unused_attributes + new.0.unused_attributes - old.0.unused_attributes,
                size: current.size + new.0.size - old.0.size,
                joins_below_constant_extends: current.joins_below_constant_extends
                    + new.0.joins_below_constant_extends
                    + k * new.1
                    - old.0.joins_below_constant_extends
                    - k * old.1,
            };
            if m < current {
                let next = rule.apply_at(plan, &site.path).expect("rule matched at this node");
                debug_assert_eq!(measure(&next), Some(m));
                let step = RewriteStep {
                    rule: rule.clone(),
                    node: site.path,
                };
                return Some((step, next, m));
            }
        }
    }
    None
}

/// Runs the pipeline. A plan without a valid schema comes back unchanged.
pub fn optimize(plan: &Plan) -> Optimized {
    let mut plan = plan.clone();
    let mut trace = RewriteTrace::default();
    let Some(mut current) = measure(&plan) else {
        return Optimized { plan, trace };
    };
    loop {
        let step = find_step(&plan, current, &PROJECTION_RULES, false)
            .or_else(|| find_step(&plan, current, &EXTEND_RULES, true));
        let Some((step, next, m)) = step else {
            break;
        };
        assert!(m < current, "rewrite did not lower the measure");
        log::debug!("optimizer: {} at {}", step.rule, step.node);
        trace.steps.push(step);
        plan = next;
        current = m;
    }
    Optimized { plan, trace }
}
