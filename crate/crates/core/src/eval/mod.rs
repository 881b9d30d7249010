//! Constructors run as content selections over a local graph.
//!
//! Each definition (block) yields its own match set. A tuple `(y1, y2)` of
//! the block's property survives when both fillers are members of their
//! role types, satisfy the role constraints and agree with every
//! instantiation of the constructor.

mod functions;
mod graph;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::model::*;

pub use functions::{FunctionRegistry, NativeFn, RegisteredFunction, RegistryError, Value, BUILTINS, DEFAULT_AGE_FUNCTION};
pub use graph::{GraphBuilder, GraphError, KnowledgeGraph, Object, Triple, INSTANCE_OF, SUBCLASS_OF};

/// Language used for label comparisons unless told otherwise.
pub const DEFAULT_LANG: &str = "en";

/// The object that reifies one property tuple. Two ids are equal exactly
/// when their property and fillers are.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ReifiedId {
    pub property: ItemId,
    pub subject: ItemId,
    pub object: ItemId,
}

impl fmt::Display for ReifiedId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ob({}, {}, {})", self.property, self.subject, self.object)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockResult {
    pub property: ItemId,
    pub tuples: BTreeSet<(ItemId, ItemId)>,
    pub reified: BTreeSet<ReifiedId>,
    /// Outputs per function, in tuple order, after the function's own
    /// value constraint.
    pub function_outputs: BTreeMap<ItemId, Vec<Value>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EvalIssue {
    UnknownFunction { block: usize, function: ItemId },
    ArityMismatch { block: usize, function: ItemId, declared: usize, given: usize },
}

impl fmt::Display for EvalIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalIssue::UnknownFunction { block, function } => {
                write!(f, "block {block}: no implementation registered for {function}")
            }
            EvalIssue::ArityMismatch { block, function, declared, given } => {
                write!(f, "block {block}: {function} takes {declared} argument(s), given {given}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    pub constructor: LocalVar,
    pub blocks: Vec<BlockResult>,
    /// False when some mandatory role has nothing to bind to.
    pub realisable: bool,
    pub issues: Vec<EvalIssue>,
}

impl SelectionResult {
    pub fn reified(&self) -> BTreeSet<ReifiedId> {
        self.blocks.iter().flat_map(|b| b.reified.iter().copied()).collect()
    }

    /// Line-oriented report, one tuple per line.
    pub fn report(&self) -> String {
        let mut out = format!("constructor {}\nrealisable {}\n", self.constructor, self.realisable);
        for (i, b) in self.blocks.iter().enumerate() {
            out.push_str(&format!("block {i} {} {} tuple(s)\n", b.property, b.tuples.len()));
            for (a, c) in &b.tuples {
                out.push_str(&format!("  {a} {c}\n"));
            }
            for (z, outs) in &b.function_outputs {
                let vals: Vec<String> = outs.iter().map(ToString::to_string).collect();
                out.push_str(&format!("  {z} -> [{}]\n", vals.join(", ")));
            }
        }
        for issue in &self.issues {
            out.push_str(&format!("issue {issue}\n"));
        }
        out
    }
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("`{0}` is not a constructor of this model")]
    UnresolvedEndpoint(LocalVar),
}

/// Properties a block's tuples may come from: its own and any partner
/// through a property join naming it.
pub fn effective_properties(b: &Block) -> BTreeSet<ItemId> {
    let p = b.predicate.property;
    let mut out = BTreeSet::from([p]);
    for j in &b.joins {
        if j.kind() == Some(JoinKind::Properties) {
            out.extend(j.partner(p));
        }
    }
    out
}

/// Types a role filler may belong to: the declared one and any partner
/// through an object join naming it.
pub fn effective_types(b: &Block, filler: ItemId) -> BTreeSet<ItemId> {
    let mut out = BTreeSet::from([filler]);
    for j in &b.joins {
        if j.kind() == Some(JoinKind::Objects) {
            out.extend(j.partner(filler));
        }
    }
    out
}

pub fn eval_constructor(c: &Constructor, g: &KnowledgeGraph, fr: &FunctionRegistry) -> SelectionResult {
    eval_constructor_in(c, g, fr, DEFAULT_LANG)
}

/// As [`eval_constructor`], comparing text constraints against labels in
/// `lang`.
pub fn eval_constructor_in(c: &Constructor, g: &KnowledgeGraph, fr: &FunctionRegistry, lang: &str) -> SelectionResult {
    let mut blocks = Vec::with_capacity(c.blocks.len());
    let mut issues = Vec::new();
    let mut realisable = true;

    for (bi, b) in c.blocks.iter().enumerate() {
        let props = effective_properties(b);
        let roles: Vec<RoleCheck> = b
            .roles
            .iter()
            .map(|r| RoleCheck {
                types: effective_types(b, r.filler),
                pins: c.instances_of(r.filler),
                constraint: r.constraint.as_ref(),
            })
            .collect();

        let mut tuples = BTreeSet::new();
        let mut reified = BTreeSet::new();
        for &p in &props {
            for &(y1, y2) in g.pairs(p) {
                if roles[0].admits(y1, g, lang) && roles[1].admits(y2, g, lang) {
                    tuples.insert((y1, y2));
                    reified.insert(ReifiedId { property: p, subject: y1, object: y2 });
                }
            }
        }

        for m in &b.mandatories {
            if b.role(m).is_some() && tuples.is_empty() {
                realisable = false;
            }
        }

        let mut function_outputs = BTreeMap::new();
        for f in &b.functions {
            let Some(imp) = fr.get(f.function) else {
                issues.push(EvalIssue::UnknownFunction { block: bi, function: f.function });
                continue;
            };
            if imp.arity != f.args.len() {
                issues.push(EvalIssue::ArityMismatch {
                    block: bi,
                    function: f.function,
                    declared: imp.arity,
                    given: f.args.len(),
                });
                continue;
            }
            let mut outs = Vec::new();
            for &(y1, y2) in &tuples {
                let args: Vec<Value> = f
                    .args
                    .iter()
                    .map(|&a| {
                        if a == b.roles[0].filler {
                            Value::Item(y1)
                        } else if a == b.roles[1].filler {
                            Value::Item(y2)
                        } else {
                            Value::Item(a)
                        }
                    })
                    .collect();
                if let Some(v) = imp.call(&args, g) {
                    if f.constraint.as_ref().is_none_or(|vc| value_satisfies(&v, vc, g, lang)) {
                        outs.push(v);
                    }
                }
            }
            function_outputs.insert(f.function, outs);
        }

        blocks.push(BlockResult { property: b.predicate.property, tuples, reified, function_outputs });
    }

    SelectionResult { constructor: c.name.clone(), blocks, realisable, issues }
}

struct RoleCheck<'a> {
    types: BTreeSet<ItemId>,
    pins: Vec<ItemId>,
    constraint: Option<&'a ValueConstraint>,
}

impl RoleCheck<'_> {
    fn admits(&self, y: ItemId, g: &KnowledgeGraph, lang: &str) -> bool {
        self.types.iter().any(|&t| g.member_of(y, t))
            && self.pins.iter().all(|&i| i == y)
            && self.constraint.is_none_or(|vc| item_satisfies(y, vc, g, lang))
    }
}

fn number_matches(v: f64, item: &ValueItem) -> bool {
    match item {
        ValueItem::Number(n) => v == n.value(),
        ValueItem::Range { lo, hi } => lo.value() <= v && v <= hi.value(),
        ValueItem::Compare { op, bound } => op.holds(v, bound.value()),
        _ => false,
    }
}

/// A role filler against a constraint: text compares with the label in
/// `lang`, items by identity, numbers with any numeric value of the item.
pub fn item_satisfies(y: ItemId, vc: &ValueConstraint, g: &KnowledgeGraph, lang: &str) -> bool {
    vc.items().iter().any(|item| match item {
        ValueItem::Text(t) => g.label(y, lang) == Some(t.as_str()),
        ValueItem::Item(q) => *q == y,
        numeric => g.values_of(y).any(|(_, v)| number_matches(v, numeric)),
    })
}

fn value_satisfies(v: &Value, vc: &ValueConstraint, g: &KnowledgeGraph, lang: &str) -> bool {
    match v {
        Value::Item(i) => item_satisfies(*i, vc, g, lang),
        Value::Text(s) => vc.items().iter().any(|it| matches!(it, ValueItem::Text(t) if t == s)),
        Value::Number(n) => vc.items().iter().any(|it| number_matches(*n, it)),
    }
}

/// Checks a link on one graph. Subconstructor and instance links ask for
/// extension inclusion; a part-of link asks that every tuple of the part
/// has a tuple of the whole whose subject it is a proper part of.
pub fn check_link(model: &Model, link: &Link, g: &KnowledgeGraph, fr: &FunctionRegistry) -> Result<bool, EvalError> {
    let from = model.constructor(&link.from).ok_or_else(|| EvalError::UnresolvedEndpoint(link.from.clone()))?;
    let to = model.constructor(&link.to).ok_or_else(|| EvalError::UnresolvedEndpoint(link.to.clone()))?;
    let a = eval_constructor(from, g, fr).reified();
    let b = eval_constructor(to, g, fr).reified();
    Ok(match link.kind {
        LinkKind::SubConstructorOf | LinkKind::InstanceOf => a.is_subset(&b),
        LinkKind::PartOf => a.iter().all(|x| b.iter().any(|y| g.proper_part_of(x.subject, y.subject))),
    })
}
