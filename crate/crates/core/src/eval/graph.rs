use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::path::Path;

use thiserror::Error;

use crate::model::{ItemId, ItemKind};

/// `instance of`, fixed by the evaluator.
pub const INSTANCE_OF: ItemId = ItemId::p(31);
/// `subclass of`, fixed by the evaluator.
pub const SUBCLASS_OF: ItemId = ItemId::p(279);

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Object {
    Item(ItemId),
    Literal(String),
}

impl fmt::Display for Object {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Object::Item(i) => write!(f, "{i}"),
            Object::Literal(s) => write!(f, "{s:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    pub subject: ItemId,
    pub predicate: ItemId,
    pub object: Object,
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("graph line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("part-of is not a strict order: {0} is a proper part of itself")]
    MereologyViolation(ItemId),
    #[error("{0} is not a property")]
    NotAProperty(ItemId),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A finite fragment of a knowledge graph. Immutable once built.
#[derive(Debug, Clone, Default)]
pub struct KnowledgeGraph {
    triples: BTreeSet<Triple>,
    labels: BTreeMap<(ItemId, String), String>,
    partof: BTreeSet<(ItemId, ItemId)>,
    values: BTreeMap<ItemId, BTreeMap<ItemId, f64>>,

    by_predicate: HashMap<ItemId, Vec<(ItemId, ItemId)>>,
    types: HashMap<ItemId, Vec<ItemId>>,
    /// `x -> { y | x P279+ y }`
    superclasses: HashMap<ItemId, HashSet<ItemId>>,
    /// `x -> { y | x partof+ y }`
    wholes: HashMap<ItemId, HashSet<ItemId>>,
}

#[derive(Debug, Clone, Default)]
pub struct GraphBuilder {
    triples: BTreeSet<Triple>,
    labels: BTreeMap<(ItemId, String), String>,
    partof: BTreeSet<(ItemId, ItemId)>,
    values: BTreeMap<ItemId, BTreeMap<ItemId, f64>>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn triple(&mut self, subject: ItemId, predicate: ItemId, object: ItemId) -> &mut Self {
        self.triples.insert(Triple { subject, predicate, object: Object::Item(object) });
        self
    }

    pub fn literal(&mut self, subject: ItemId, predicate: ItemId, text: &str) -> &mut Self {
        self.triples.insert(Triple { subject, predicate, object: Object::Literal(text.to_string()) });
        self
    }

    pub fn label(&mut self, item: ItemId, lang: &str, text: &str) -> &mut Self {
        self.labels.insert((item, lang.to_string()), text.to_string());
        self
    }

    pub fn part_of(&mut self, part: ItemId, whole: ItemId) -> &mut Self {
        self.partof.insert((part, whole));
        self
    }

    pub fn value(&mut self, item: ItemId, property: ItemId, value: f64) -> &mut Self {
        self.values.entry(item).or_default().insert(property, value);
        self
    }

    pub fn build(self) -> Result<KnowledgeGraph, GraphError> {
        for t in &self.triples {
            if t.predicate.kind() != ItemKind::PItem {
                return Err(GraphError::NotAProperty(t.predicate));
            }
        }
        for p in self.values.values().flat_map(|m| m.keys()) {
            if p.kind() != ItemKind::PItem {
                return Err(GraphError::NotAProperty(*p));
            }
        }

        let mut by_predicate: HashMap<ItemId, Vec<(ItemId, ItemId)>> = HashMap::new();
        let mut types: HashMap<ItemId, Vec<ItemId>> = HashMap::new();
        let mut sub_edges: HashMap<ItemId, Vec<ItemId>> = HashMap::new();
        for t in &self.triples {
            let Object::Item(o) = t.object else { continue };
            by_predicate.entry(t.predicate).or_default().push((t.subject, o));
            if t.predicate == INSTANCE_OF {
                types.entry(t.subject).or_default().push(o);
            } else if t.predicate == SUBCLASS_OF {
                sub_edges.entry(t.subject).or_default().push(o);
            }
        }
        let superclasses = closure(&sub_edges);

        let mut part_edges: HashMap<ItemId, Vec<ItemId>> = HashMap::new();
        for (a, b) in &self.partof {
            part_edges.entry(*a).or_default().push(*b);
        }
        let wholes = closure(&part_edges);
        // irreflexive closure implies asymmetry as well
        let mut cyclic: Vec<ItemId> = wholes.iter().filter(|(x, ys)| ys.contains(x)).map(|(x, _)| *x).collect();
        cyclic.sort();
        if let Some(x) = cyclic.first() {
            return Err(GraphError::MereologyViolation(*x));
        }

        Ok(KnowledgeGraph {
            triples: self.triples,
            labels: self.labels,
            partof: self.partof,
            values: self.values,
            by_predicate,
            types,
            superclasses,
            wholes,
        })
    }
}

/// Transitive (not reflexive) closure of an edge map.
fn closure(edges: &HashMap<ItemId, Vec<ItemId>>) -> HashMap<ItemId, HashSet<ItemId>> {
    let mut out = HashMap::new();
    for &start in edges.keys() {
        let mut seen = HashSet::new();
        let mut stack: Vec<ItemId> = edges[&start].clone();
        while let Some(n) = stack.pop() {
            if seen.insert(n) {
                if let Some(next) = edges.get(&n) {
                    stack.extend(next.iter().copied());
                }
            }
        }
        out.insert(start, seen);
    }
    out
}

impl KnowledgeGraph {
    pub fn builder() -> GraphBuilder {
        GraphBuilder::new()
    }

    /// Reads the line format: `triple S P O`, `label I LANG "text"`,
    /// `partof A B`, `value I P NUMBER`; `#` starts a comment.
    pub fn parse(text: &str) -> Result<KnowledgeGraph, GraphError> {
        let mut b = GraphBuilder::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let fields = split_fields(raw).map_err(|message| GraphError::Format { line, message })?;
            if fields.is_empty() {
                continue;
            }
            let bad = |message: String| GraphError::Format { line, message };
            let item = |f: &Field| match f {
                Field::Word(w) => w.parse::<ItemId>().map_err(|_| bad(format!("`{w}` is not an item"))),
                Field::Quoted(s) => Err(bad(format!("expected an item, found \"{s}\""))),
            };
            let arity = |n: usize| {
                if fields.len() == n + 1 {
                    Ok(())
                } else {
                    Err(bad(format!("`{}` takes {n} fields, found {}", fields[0].text(), fields.len() - 1)))
                }
            };
            match fields[0].text() {
                "triple" => {
                    arity(3)?;
                    let (s, p) = (item(&fields[1])?, item(&fields[2])?);
                    if !p.is_p() {
                        return Err(bad(format!("{p} is not a property")));
                    }
                    match &fields[3] {
                        Field::Quoted(text) => b.literal(s, p, text),
                        w => b.triple(s, p, item(w)?),
                    };
                }
                "label" => {
                    arity(3)?;
                    let Field::Quoted(text) = &fields[3] else {
                        return Err(bad("label text must be quoted".into()));
                    };
                    b.label(item(&fields[1])?, fields[2].text(), text);
                }
                "partof" => {
                    arity(2)?;
                    b.part_of(item(&fields[1])?, item(&fields[2])?);
                }
                "value" => {
                    arity(3)?;
                    let p = item(&fields[2])?;
                    if !p.is_p() {
                        return Err(bad(format!("{p} is not a property")));
                    }
                    let v: f64 = fields[3]
                        .text()
                        .parse()
                        .ok()
                        .filter(|v: &f64| v.is_finite())
                        .ok_or_else(|| bad(format!("`{}` is not a number", fields[3].text())))?;
                    b.value(item(&fields[1])?, p, v);
                }
                other => return Err(bad(format!("unknown record `{other}`"))),
            }
        }
        b.build()
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<KnowledgeGraph, GraphError> {
        KnowledgeGraph::parse(&std::fs::read_to_string(path)?)
    }

    pub fn triples(&self) -> impl Iterator<Item = &Triple> {
        self.triples.iter()
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    /// Item-valued pairs of a property, in no particular order.
    pub fn pairs(&self, property: ItemId) -> &[(ItemId, ItemId)] {
        self.by_predicate.get(&property).map_or(&[], Vec::as_slice)
    }

    pub fn label(&self, item: ItemId, lang: &str) -> Option<&str> {
        self.labels.get(&(item, lang.to_string())).map(String::as_str)
    }

    pub fn labels(&self) -> impl Iterator<Item = (ItemId, &str, &str)> {
        self.labels.iter().map(|((i, l), t)| (*i, l.as_str(), t.as_str()))
    }

    pub fn values_of(&self, item: ItemId) -> impl Iterator<Item = (ItemId, f64)> + '_ {
        self.values.get(&item).into_iter().flat_map(|m| m.iter().map(|(p, v)| (*p, *v)))
    }

    /// Items carrying at least one numeric value.
    pub fn value_subjects(&self) -> impl Iterator<Item = ItemId> + '_ {
        self.values.keys().copied()
    }

    pub fn value(&self, item: ItemId, property: ItemId) -> Option<f64> {
        self.values.get(&item)?.get(&property).copied()
    }

    pub fn part_of_edges(&self) -> impl Iterator<Item = (ItemId, ItemId)> + '_ {
        self.partof.iter().copied()
    }

    /// Proper parthood, transitively closed.
    pub fn proper_part_of(&self, part: ItemId, whole: ItemId) -> bool {
        self.wholes.get(&part).is_some_and(|w| w.contains(&whole))
    }

    pub fn is_subclass(&self, sub: ItemId, sup: ItemId) -> bool {
        self.superclasses.get(&sub).is_some_and(|s| s.contains(&sup))
    }

    /// Membership of `x` in the class `q`: `x` is `q` itself, an instance of
    /// `q` or of a subclass of it, or a subclass of `q`.
    pub fn member_of(&self, x: ItemId, q: ItemId) -> bool {
        x == q
            || self.is_subclass(x, q)
            || self
                .types
                .get(&x)
                .is_some_and(|ts| ts.iter().any(|&t| t == q || self.is_subclass(t, q)))
    }

    /// Every item mentioned as a triple subject or item object.
    pub fn items(&self) -> BTreeSet<ItemId> {
        let mut out = BTreeSet::new();
        for t in &self.triples {
            out.insert(t.subject);
            if let Object::Item(o) = t.object {
                out.insert(o);
            }
        }
        out
    }
}

enum Field {
    Word(String),
    Quoted(String),
}

impl Field {
    fn text(&self) -> &str {
        match self {
            Field::Word(s) | Field::Quoted(s) => s,
        }
    }
}

fn split_fields(line: &str) -> Result<Vec<Field>, String> {
    let mut out = Vec::new();
    let mut chars = line.chars().peekable();
    while let Some(&c) = chars.peek() {
        if c == '#' {
            break;
        }
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        if c == '"' {
            chars.next();
            let mut s = String::new();
            loop {
                match chars.next() {
                    Some('"') => break,
                    Some('\\') => match chars.next() {
                        Some(e) => s.push(e),
                        None => return Err("unterminated string".into()),
                    },
                    Some(c) => s.push(c),
                    None => return Err("unterminated string".into()),
                }
            }
            out.push(Field::Quoted(s));
        } else {
            let mut s = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_whitespace() || c == '#' {
                    break;
                }
                s.push(c);
                chars.next();
            }
            out.push(Field::Word(s));
        }
    }
    Ok(out)
}
