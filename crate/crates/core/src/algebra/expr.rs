use std::collections::BTreeSet;
use std::fmt;

use crate::functions::{FunctionError, FunctionRegistry};
use crate::relation::{Attribute, MappingTuple};
use crate::term::{RdfTerm, Value};

/// An extend expression: constant term, attribute reference, or an
/// extension-function application.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExtendExpression {
    Const(RdfTerm),
    Attr(Attribute),
    Func {
        name: String,
        args: Vec<ExtendExpression>,
    },
}

impl ExtendExpression {
    pub fn constant(term: RdfTerm) -> Self {
        ExtendExpression::Const(term)
    }

    pub fn attr(attr: impl Into<Attribute>) -> Self {
        ExtendExpression::Attr(attr.into())
    }

    pub fn func(name: impl Into<String>, args: Vec<ExtendExpression>) -> Self {
        ExtendExpression::Func {
            name: name.into(),
            args,
        }
    }

    /// attrs(φ): every attribute mentioned anywhere in the expression.
    pub fn attrs(&self) -> BTreeSet<Attribute> {
        let mut out = BTreeSet::new();
        self.collect_attrs(&mut out);
        out
    }

    fn collect_attrs(&self, out: &mut BTreeSet<Attribute>) {
        match self {
            ExtendExpression::Const(_) => {}
            ExtendExpression::Attr(a) => {
                out.insert(a.clone());
            }
            ExtendExpression::Func { args, .. } => {
                args.iter().for_each(|e| e.collect_attrs(out));
            }
        }
    }

    /// Evaluates the expression over `tuple`. Only an unknown function name
    /// or a wrong argument count is an error; everything else is a value.
    pub fn eval(
        &self,
        tuple: &MappingTuple,
        registry: &FunctionRegistry,
    ) -> Result<Value, FunctionError> {
        match self {
            ExtendExpression::Const(t) => Ok(Value::Term(t.clone())),
            ExtendExpression::Attr(a) => Ok(tuple.get(a).cloned().unwrap_or(Value::Error)),
            ExtendExpression::Func { name, args } => {
                let f = registry.lookup(name)?;
                check_arity(name, f.arity(), args.len())?;
                let values = args
                    .iter()
                    .map(|e| e.eval(tuple, registry))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(f.apply(&values))
            }
        }
    }

    /// Checks every function name and arity against the registry.
    pub fn check(&self, registry: &FunctionRegistry) -> Result<(), FunctionError> {
        if let ExtendExpression::Func { name, args } = self {
            check_arity(name, registry.lookup(name)?.arity(), args.len())?;
            args.iter().try_for_each(|e| e.check(registry))?;
        }
        Ok(())
    }

    pub fn is_constant_only(&self) -> bool {
        self.attrs().is_empty()
    }
}

fn check_arity(name: &str, expected: usize, found: usize) -> Result<(), FunctionError> {
    if expected == found {
        Ok(())
    } else {
        Err(FunctionError::Arity {
            name: name.to_owned(),
            expected,
            found,
        })
    }
}

impl fmt::Display for ExtendExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendExpression::Const(t) => t.fmt(f),
            ExtendExpression::Attr(a) => a.fmt(f),
            ExtendExpression::Func { name, args } => {
                write!(f, "{name}(")?;
                for (i, arg) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    arg.fmt(f)?;
                }
                f.write_str(")")
            }
        }
    }
}

impl From<RdfTerm> for ExtendExpression {
    fn from(term: RdfTerm) -> Self {
        ExtendExpression::Const(term)
    }
}

impl From<Attribute> for ExtendExpression {
    fn from(attr: Attribute) -> Self {
        ExtendExpression::Attr(attr)
    }
}
