//! A small evaluator for compiled pattern trees over a local graph.
//!
//! It sees the graph only as RDF triples and follows SPARQL semantics for
//! the handful of constructs the compiler emits. It shares no code with
//! [`crate::eval`].

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use crate::eval::{KnowledgeGraph, Object};
use crate::model::ItemId;

use super::{CompileOptions, CompiledQuery, Expr, Node, PathExpr, Pattern, RDFS_LABEL};

#[derive(Debug, Clone, PartialEq)]
pub enum RdfTerm {
    Entity(ItemId),
    Property(ItemId),
    Iri(String),
    Literal(String),
    LangLiteral(String, String),
    Number(f64),
}

impl RdfTerm {
    fn key(&self) -> String {
        format!("{self:?}")
    }
}

pub type Solution = BTreeMap<String, RdfTerm>;

struct Store {
    triples: Vec<(RdfTerm, RdfTerm, RdfTerm)>,
    type_chain: Vec<(RdfTerm, RdfTerm)>,
    subclass_plus: Vec<(RdfTerm, RdfTerm)>,
}

impl Store {
    fn new(g: &KnowledgeGraph, opts: &CompileOptions) -> Store {
        let mut triples = Vec::new();
        for t in g.triples() {
            let o = match &t.object {
                Object::Item(i) => RdfTerm::Entity(*i),
                Object::Literal(s) => RdfTerm::Literal(s.clone()),
            };
            triples.push((RdfTerm::Entity(t.subject), RdfTerm::Property(t.predicate), o));
        }
        for (i, lang, text) in g.labels() {
            triples.push((
                RdfTerm::Entity(i),
                RdfTerm::Iri(RDFS_LABEL.into()),
                RdfTerm::LangLiteral(text.into(), lang.into()),
            ));
        }
        for s in g.value_subjects() {
            for (p, v) in g.values_of(s) {
                triples.push((RdfTerm::Entity(s), RdfTerm::Property(p), RdfTerm::Number(v)));
            }
        }

        let edges = |p: ItemId| -> Vec<(RdfTerm, RdfTerm)> {
            triples
                .iter()
                .filter(|(_, pr, _)| *pr == RdfTerm::Property(p))
                .map(|(s, _, o)| (s.clone(), o.clone()))
                .collect()
        };
        let sub = edges(opts.subclass_of);
        let mut succ: HashMap<String, Vec<RdfTerm>> = HashMap::new();
        for (s, o) in &sub {
            succ.entry(s.key()).or_default().push(o.clone());
        }
        // nodes reachable in one or more steps
        let reach = |start: &RdfTerm| -> Vec<RdfTerm> {
            let mut seen = HashSet::new();
            let mut out = Vec::new();
            let mut stack: Vec<RdfTerm> = succ.get(&start.key()).cloned().unwrap_or_default();
            while let Some(n) = stack.pop() {
                if seen.insert(n.key()) {
                    stack.extend(succ.get(&n.key()).cloned().unwrap_or_default());
                    out.push(n);
                }
            }
            out
        };

        let mut subclass_plus = Vec::new();
        let mut starts = HashSet::new();
        for (s, _) in &sub {
            if starts.insert(s.key()) {
                for o in reach(s) {
                    subclass_plus.push((s.clone(), o));
                }
            }
        }
        let mut type_chain = Vec::new();
        let mut seen = HashSet::new();
        for (x, t) in edges(opts.instance_of) {
            let mut targets = vec![t.clone()];
            targets.extend(reach(&t));
            for y in targets {
                if seen.insert((x.key(), y.key())) {
                    type_chain.push((x.clone(), y));
                }
            }
        }
        Store { triples, type_chain, subclass_plus }
    }
}

fn bind(sol: &Solution, node: &Node, value: &RdfTerm) -> Option<Solution> {
    match node {
        Node::Item(i) => (RdfTerm::Entity(*i) == *value).then(|| sol.clone()),
        Node::LangLiteral(t, l) => (RdfTerm::LangLiteral(t.clone(), l.clone()) == *value).then(|| sol.clone()),
        Node::Var(v) => match sol.get(v) {
            Some(bound) => (bound == value).then(|| sol.clone()),
            None => {
                let mut s = sol.clone();
                s.insert(v.clone(), value.clone());
                Some(s)
            }
        },
    }
}

impl Store {
    fn group(&self, patterns: &[Pattern], input: Vec<Solution>) -> Vec<Solution> {
        let mut sols = input;
        for p in patterns {
            sols = match p {
                Pattern::Filter(_) => continue,
                Pattern::Triple { subject, path, object } => {
                    let mut out = Vec::new();
                    for sol in &sols {
                        self.triple(sol, subject, path, object, &mut out);
                    }
                    out
                }
                Pattern::Values { var, items } => {
                    let mut out = Vec::new();
                    for sol in &sols {
                        for i in items {
                            out.extend(bind(sol, &Node::Var(var.clone()), &RdfTerm::Entity(*i)));
                        }
                    }
                    out
                }
                Pattern::Union(branches) => {
                    let mut out = Vec::new();
                    for sol in &sols {
                        for b in branches {
                            out.extend(self.group(b, vec![sol.clone()]));
                        }
                    }
                    out
                }
            };
        }
        sols.retain(|s| {
            patterns.iter().all(|p| match p {
                Pattern::Filter(e) => self.expr(e, s) == Some(true),
                _ => true,
            })
        });
        sols
    }

    fn triple(&self, sol: &Solution, s: &Node, path: &PathExpr, o: &Node, out: &mut Vec<Solution>) {
        let pairs = |rel: &[(RdfTerm, RdfTerm)], out: &mut Vec<Solution>| {
            for (a, b) in rel {
                if let Some(x) = bind(sol, s, a) {
                    out.extend(bind(&x, o, b));
                }
            }
        };
        match path {
            PathExpr::TypeChain => pairs(&self.type_chain, out),
            PathExpr::SubclassPlus => pairs(&self.subclass_plus, out),
            _ => {
                for (a, p, b) in &self.triples {
                    let matched = match path {
                        PathExpr::Property(q) => *p == RdfTerm::Property(*q),
                        PathExpr::Label => *p == RdfTerm::Iri(RDFS_LABEL.into()),
                        _ => true,
                    };
                    if !matched {
                        continue;
                    }
                    let Some(x) = bind(sol, s, a) else { continue };
                    let x = match path {
                        PathExpr::Var(v) => match bind(&x, &Node::Var(v.clone()), p) {
                            Some(x) => x,
                            None => continue,
                        },
                        _ => x,
                    };
                    out.extend(bind(&x, o, b));
                }
            }
        }
    }

    /// `None` is a SPARQL expression error.
    fn expr(&self, e: &Expr, sol: &Solution) -> Option<bool> {
        match e {
            Expr::Or(xs) => {
                let vals: Vec<Option<bool>> = xs.iter().map(|x| self.expr(x, sol)).collect();
                if vals.contains(&Some(true)) {
                    Some(true)
                } else if vals.contains(&None) {
                    None
                } else {
                    Some(false)
                }
            }
            Expr::And(xs) => {
                let vals: Vec<Option<bool>> = xs.iter().map(|x| self.expr(x, sol)).collect();
                if vals.contains(&Some(false)) {
                    Some(false)
                } else if vals.contains(&None) {
                    None
                } else {
                    Some(true)
                }
            }
            Expr::SameItem(v, i) => sol.get(v).map(|t| *t == RdfTerm::Entity(*i)),
            Expr::IsNumeric(v) => sol.get(v).map(|t| matches!(t, RdfTerm::Number(_))),
            Expr::Compare(v, op, n) => match sol.get(v)? {
                RdfTerm::Number(x) => Some(op.holds(*x, n.value())),
                _ => None,
            },
            Expr::Exists(ps) => Some(!self.group(ps, vec![sol.clone()]).is_empty()),
        }
    }
}

/// Runs a compiled query over `g`. Rows hold the projected variables that
/// are bound, without duplicates, in no particular order.
pub fn reference_match(q: &CompiledQuery, g: &KnowledgeGraph) -> Vec<Solution> {
    let store = Store::new(g, &q.options);
    let mut sols = vec![Solution::new()];
    for grp in &q.groups {
        if grp.optional {
            let mut out = Vec::new();
            for sol in sols {
                let ext = store.group(&grp.patterns, vec![sol.clone()]);
                if ext.is_empty() {
                    out.push(sol);
                } else {
                    out.extend(ext);
                }
            }
            sols = out;
        } else {
            sols = store.group(&grp.patterns, sols);
        }
    }
    let mut seen = HashSet::new();
    let mut rows = Vec::new();
    for sol in sols {
        let row: Solution = q
            .projection
            .iter()
            .filter_map(|p| sol.get(&p.var).map(|t| (p.var.clone(), t.clone())))
            .collect();
        let key: Vec<(String, String)> = row.iter().map(|(k, v)| (k.clone(), v.key())).collect();
        if seen.insert(key) {
            rows.push(row);
        }
    }
    rows
}

impl CompiledQuery {
    /// Entity pairs bound to the two roles of block `block` across `rows`.
    pub fn block_tuples<'a, V: 'a>(
        &self,
        rows: impl IntoIterator<Item = &'a BTreeMap<String, V>>,
        block: usize,
        as_item: impl Fn(&V) -> Option<ItemId>,
    ) -> BTreeSet<(ItemId, ItemId)> {
        let Some((a, b)) = self.block_vars(block) else { return BTreeSet::new() };
        rows.into_iter()
            .filter_map(|r| Some((as_item(r.get(a)?)?, as_item(r.get(b)?)?)))
            .collect()
    }
}

impl RdfTerm {
    pub fn as_entity(&self) -> Option<ItemId> {
        match self {
            RdfTerm::Entity(i) => Some(*i),
            _ => None,
        }
    }
}
