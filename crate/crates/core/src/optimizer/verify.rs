//! Checking rewrites by execution: random match instances over in-memory
//! sources, both plans executed, results compared.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::algebra::{ExecContext, ExecError, ExtendExpression, Plan};
use crate::diagnostics::Diagnostics;
use crate::functions::{BNodeFactory, FunctionRegistry, CONCAT, TO_BNODE, TO_INT, TO_IRI, TO_LITERAL};
use crate::optimizer::rules::{JoinDirection, Rule};
use crate::relation::Attribute;
use crate::source::{memory_source, MemoryDocument, MemoryRecord, SharedSource};
use crate::term::{RdfTerm, Value};
use crate::vocab::xsd;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("plans have different schemas")]
    SchemaMismatch,
    #[error("plan uses non-memory source {0}")]
    NotInMemory(String),
    #[error(transparent)]
    Exec(#[from] ExecError),
}

fn check_sources(p: &Plan) -> Result<(), VerifyError> {
    if let Plan::Source { source, .. } = p {
        if source.kind() != "memory" {
            return Err(VerifyError::NotInMemory(source.describe()));
        }
    }
    p.children().into_iter().try_for_each(check_sources)
}

/// Executes both plans with one function registry and compares the
/// resulting relations.
pub fn verify_equivalence(p1: &Plan, p2: &Plan) -> Result<bool, VerifyError> {
    check_sources(p1)?;
    check_sources(p2)?;
    let s1 = p1.schema_of().map_err(ExecError::from)?;
    let s2 = p2.schema_of().map_err(ExecError::from)?;
    if s1 != s2 {
        return Err(VerifyError::SchemaMismatch);
    }
    let registry = FunctionRegistry::with_builtins(Arc::new(BNodeFactory::new()));
    let diagnostics = Diagnostics::new();
    let ctx = ExecContext {
        registry: &registry,
        diagnostics: &diagnostics,
    };
    Ok(p1.execute(ctx)? == p2.execute(ctx)?)
}

/// The rules exercised by [`check_rule`], one per family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleFamily {
    ProjectIntoExtend,
    ProjectSplit,
    PartialProjectPush,
    ProjectIntoSource,
    ProjectRemove,
    ExtendJoin,
    ExtendSwap,
}

impl RuleFamily {
    pub const ALL: [RuleFamily; 7] = [
        RuleFamily::ProjectIntoExtend,
        RuleFamily::ProjectSplit,
        RuleFamily::PartialProjectPush,
        RuleFamily::ProjectIntoSource,
        RuleFamily::ProjectRemove,
        RuleFamily::ExtendJoin,
        RuleFamily::ExtendSwap,
    ];
}

impl fmt::Display for RuleFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            RuleFamily::ProjectIntoExtend => "project-into-extend",
            RuleFamily::ProjectSplit => "project-split",
            RuleFamily::PartialProjectPush => "partial-project-push",
            RuleFamily::ProjectIntoSource => "project-into-source",
            RuleFamily::ProjectRemove => "project-remove",
            RuleFamily::ExtendJoin => "extend-join",
            RuleFamily::ExtendSwap => "extend-swap",
        };
        f.write_str(name)
    }
}

/// A generated plan over in-memory documents, plus the rule to apply at its
/// root. The plan is rebuilt from the documents so that counterexamples can
/// be shrunk by deleting records.
type PlanBuilder = Box<dyn Fn(&[SharedSource]) -> Plan>;

pub struct Instance {
    pub docs: Vec<MemoryDocument>,
    pub rule: Rule,
    build: PlanBuilder,
}

impl Instance {
    pub fn plan(&self) -> Plan {
        let sources: Vec<SharedSource> = self
            .docs
            .iter()
            .enumerate()
            .map(|(i, d)| memory_source(d.clone(), format!("r{}", i + 1)))
            .collect();
        (self.build)(&sources)
    }

    /// `Some(true)` when the rule applies and both sides agree, `Some(false)`
    /// on a counterexample, `None` when the rule does not apply.
    pub fn check(&self) -> Result<Option<bool>, VerifyError> {
        let original = self.plan();
        match self.rule.apply(&original) {
            Ok(rewritten) => verify_equivalence(&original, &rewritten).map(Some),
            Err(_) => Ok(None),
        }
    }

    /// Deletes records while the instance stays a counterexample.
    pub fn shrink(mut self) -> Self {
        let mut changed = true;
        while changed {
            changed = false;
            for d in 0..self.docs.len() {
                let mut i = 0;
                while i < self.docs[d].records.len() {
                    let removed = self.docs[d].records.remove(i);
                    if matches!(self.check(), Ok(Some(false))) {
                        changed = true;
                    } else {
                        self.docs[d].records.insert(i, removed);
                        i += 1;
                    }
                }
            }
        }
        self
    }
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "rule {}", self.rule)?;
        let original = self.plan();
        write!(f, "plan:\n{}", original.dump())?;
        if let Ok(rewritten) = self.rule.apply(&original) {
            write!(f, "rewritten:\n{}", rewritten.dump())?;
        }
        for (i, d) in self.docs.iter().enumerate() {
            writeln!(f, "r{}:", i + 1)?;
            for rec in &d.records {
                let cells: Vec<String> = rec
                    .iter()
                    .map(|(q, vs)| {
                        let vs: Vec<String> = vs.iter().map(Value::to_string).collect();
                        format!("{q}=[{}]", vs.join(" "))
                    })
                    .collect();
                writeln!(f, "  {}", cells.join(" "))?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Default)]
pub struct RuleReport {
    pub trials: usize,
    /// Generated plans the rule did not match.
    pub rejected: usize,
    pub counterexamples: Vec<String>,
}

/// Generates random instances of `family` from `seed` until `trials` of
/// them match, and checks each one.
pub fn check_rule(family: RuleFamily, seed: u64, trials: usize) -> Result<RuleReport, VerifyError> {
    let mut report = RuleReport::default();
    let mut attempt: u64 = 0;
    while report.trials < trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (family as u64) << 56 ^ attempt);
        attempt += 1;
        assert!(attempt < 1000 * trials as u64 + 1000, "generator for {family} rarely matches");
        let instance = generate(family, &mut rng);
        match instance.check()? {
            None => report.rejected += 1,
            Some(true) => report.trials += 1,
            Some(false) => {
                report.trials += 1;
                report.counterexamples.push(instance.shrink().to_string());
            }
        }
    }
    Ok(report)
}

const EX: &str = "http://example.com/";

fn term_pool() -> Vec<Value> {
    let iri = |s: &str| Value::Term(RdfTerm::iri(format!("{EX}{s}")).unwrap());
    vec![
        iri("a"),
        iri("b"),
        Value::Term(RdfTerm::string("1")),
        Value::Term(RdfTerm::string("x")),
        Value::Term(RdfTerm::string("")),
        Value::Term(RdfTerm::literal("2", xsd::INTEGER).unwrap()),
        Value::Term(RdfTerm::blank("z").unwrap()),
        Value::Error,
    ]
}

fn random_value(rng: &mut ChaCha8Rng) -> Value {
    term_pool().choose(rng).cloned().expect("pool is not empty")
}

fn random_term(rng: &mut ChaCha8Rng) -> RdfTerm {
    loop {
        if let Value::Term(t) = random_value(rng) {
            return t;
        }
    }
}

/// A document with one query per attribute; query `q` of attribute `a` is
/// the attribute's name. Most value lists have one entry, some are empty or
/// hold two values.
fn random_doc(rng: &mut ChaCha8Rng, attrs: &[Attribute]) -> MemoryDocument {
    let n = rng.gen_range(0..=8);
    let records = (0..n)
        .map(|_| {
            attrs
                .iter()
                .map(|a| {
                    let len = match rng.gen_range(0..10) {
                        0 => 0,
                        1 => 2,
                        _ => 1,
                    };
                    (a.name().to_owned(), (0..len).map(|_| random_value(rng)).collect())
                })
                .collect::<MemoryRecord>()
        })
        .collect();
    MemoryDocument { records }
}

fn random_expr(rng: &mut ChaCha8Rng, attrs: &[Attribute], depth: usize) -> ExtendExpression {
    match rng.gen_range(0..10) {
        0..=2 => ExtendExpression::Const(random_term(rng)),
        3..=6 => ExtendExpression::Attr(if attrs.is_empty() || rng.gen_range(0..8) == 0 {
            Attribute::new("unbound")
        } else {
            attrs.choose(rng).cloned().expect("non-empty")
        }),
        _ if depth == 0 => ExtendExpression::Const(random_term(rng)),
        _ => {
            let which = rng.gen_range(0..5);
            let mut arg = || random_expr(rng, attrs, depth - 1);
            match which {
                0 => ExtendExpression::func(TO_INT, vec![arg()]),
                1 => ExtendExpression::func(TO_BNODE, vec![arg()]),
                2 => ExtendExpression::func(
                    TO_IRI,
                    vec![arg(), ExtendExpression::Const(RdfTerm::iri(EX).unwrap())],
                ),
                3 => ExtendExpression::func(
                    TO_LITERAL,
                    vec![arg(), ExtendExpression::Const(RdfTerm::named(xsd::INTEGER))],
                ),
                _ => {
                    let a = arg();
                    ExtendExpression::func(CONCAT, vec![a, arg()])
                }
            }
        }
    }
}

fn random_subset(rng: &mut ChaCha8Rng, attrs: &[Attribute]) -> BTreeSet<Attribute> {
    attrs.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect()
}

fn attr_names(prefix: &str, n: usize) -> Vec<Attribute> {
    (1..=n).map(|i| Attribute::new(format!("{prefix}{i}"))).collect()
}

/// The input relation `r` of a rule: a source, sometimes with one extend on
/// top. Returns the attributes of `r` and a builder.
fn random_input(
    rng: &mut ChaCha8Rng,
    prefix: &str,
    max_attrs: usize,
) -> (Vec<Attribute>, Vec<Attribute>, Option<(Attribute, ExtendExpression)>) {
    let n = rng.gen_range(1..=max_attrs);
    let source_attrs = attr_names(prefix, n);
    let mut schema = source_attrs.clone();
    let extra = if n < max_attrs && rng.gen_bool(0.3) {
        let a = Attribute::new(format!("{prefix}x"));
        let phi = random_expr(rng, &source_attrs, 2);
        schema.push(a.clone());
        Some((a, phi))
    } else {
        None
    };
    (source_attrs, schema, extra)
}

fn build_input(
    source: &SharedSource,
    source_attrs: &[Attribute],
    extra: &Option<(Attribute, ExtendExpression)>,
) -> Plan {
    let queries: BTreeMap<Attribute, String> = source_attrs
        .iter()
        .map(|a| (a.clone(), a.name().to_owned()))
        .collect();
    let p = Plan::source(source.clone(), "", queries);
    match extra {
        Some((a, phi)) => p.extend(a.clone(), phi.clone()),
        None => p,
    }
}

/// One random plan shaped for `family`. Side conditions are not enforced
/// here; instances the rule rejects are counted and skipped.
pub fn generate(family: RuleFamily, rng: &mut ChaCha8Rng) -> Instance {
    let (src_attrs, schema, extra) = random_input(rng, "a", 6);
    let doc = random_doc(rng, &src_attrs);
    let new_attr = Attribute::new("e1");
    let mut visible = schema.clone();
    visible.push(new_attr.clone());
    match family {
        RuleFamily::ProjectIntoExtend | RuleFamily::PartialProjectPush => {
            let phi = random_expr(rng, &schema, 2);
            let mut p = random_subset(rng, &schema);
            if family == RuleFamily::ProjectIntoExtend {
                p.extend(phi.attrs().into_iter().filter(|a| schema.contains(a)));
                p.insert(new_attr.clone());
            } else if rng.gen_bool(0.7) {
                p.insert(new_attr.clone());
            }
            if p.is_empty() {
                p.insert(new_attr.clone());
            }
            let rule = if family == RuleFamily::ProjectIntoExtend {
                Rule::ProjectIntoExtend
            } else {
                Rule::PartialProjectPush
            };
            Instance {
                docs: vec![doc],
                rule,
                build: Box::new(move |s| {
                    build_input(&s[0], &src_attrs, &extra)
                        .extend(new_attr.clone(), phi.clone())
                        .project(p.iter().cloned())
                }),
            }
        }
        RuleFamily::ProjectSplit | RuleFamily::ProjectRemove | RuleFamily::ProjectIntoSource => {
            let (pool, extra) = if family == RuleFamily::ProjectIntoSource {
                (src_attrs.clone(), None)
            } else {
                (schema.clone(), extra)
            };
            let mut p = if family == RuleFamily::ProjectRemove && rng.gen_bool(0.9) {
                pool.iter().cloned().collect()
            } else {
                random_subset(rng, &pool)
            };
            if p.is_empty() {
                p.insert(pool.choose(rng).cloned().expect("non-empty"));
            }
            let rule = match family {
                RuleFamily::ProjectSplit => Rule::ProjectSplit {
                    extra: random_subset(rng, &pool),
                },
                RuleFamily::ProjectRemove => Rule::ProjectRemove,
                _ => Rule::ProjectIntoSource,
            };
            Instance {
                docs: vec![doc],
                rule,
                build: Box::new(move |s| build_input(&s[0], &src_attrs, &extra).project(p.iter().cloned())),
            }
        }
        RuleFamily::ExtendJoin => {
            let (src2, schema2, extra2) = random_input(rng, "b", 6usize.saturating_sub(schema.len()).max(1));
            let doc2 = random_doc(rng, &src2);
            let mut both = schema.clone();
            both.extend(schema2.iter().cloned());
            let n_pairs = rng.gen_range(1..=2);
            let pairs: BTreeSet<(Attribute, Attribute)> = (0..n_pairs)
                .map(|_| {
                    (
                        schema.choose(rng).cloned().expect("non-empty"),
                        schema2.choose(rng).cloned().expect("non-empty"),
                    )
                })
                .collect();
            let direction = *JoinDirection::ALL.choose(rng).expect("non-empty");
            // pick the expression's attributes from one side most of the time
            let phi_attrs = match rng.gen_range(0..3) {
                0 => schema.clone(),
                1 => schema2.clone(),
                _ => both,
            };
            let phi = random_expr(rng, &phi_attrs, 2);
            Instance {
                docs: vec![doc, doc2],
                rule: Rule::ExtendJoin(direction),
                build: Box::new(move |s| {
                    let l = build_input(&s[0], &src_attrs, &extra);
                    let r = build_input(&s[1], &src2, &extra2);
                    match direction {
                        JoinDirection::PushLeft | JoinDirection::PushRight => {
                            l.join(r, pairs.iter().cloned()).extend(new_attr.clone(), phi.clone())
                        }
                        JoinDirection::PullLeft => {
                            l.extend(new_attr.clone(), phi.clone()).join(r, pairs.iter().cloned())
                        }
                        JoinDirection::PullRight => {
                            l.join(r.extend(new_attr.clone(), phi.clone()), pairs.iter().cloned())
                        }
                    }
                }),
            }
        }
        RuleFamily::ExtendSwap => {
            let a2 = Attribute::new("e2");
            let mut inner_scope = schema.clone();
            let phi2 = random_expr(rng, &inner_scope, 2);
            inner_scope.push(a2.clone());
            let phi1 = random_expr(rng, &inner_scope, 2);
            Instance {
                docs: vec![doc],
                rule: Rule::ExtendSwap,
                build: Box::new(move |s| {
                    build_input(&s[0], &src_attrs, &extra)
                        .extend(a2.clone(), phi2.clone())
                        .extend(new_attr.clone(), phi1.clone())
                }),
            }
        }
    }
}
