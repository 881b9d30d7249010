//! Compiling constructors to SPARQL.
//!
//! The compiler builds a small pattern tree first and renders text from
//! it; [`reference_match`] evaluates the same tree over a local graph so
//! compiled queries can be checked without an endpoint.

mod client;
mod reference;

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::eval::{effective_properties, effective_types, KnowledgeGraph, Object};
use crate::model::*;

pub use client::{catalog_from_endpoint, execute, parse_results, EndpointConfig, ExecuteError, ResultSet, Row, SparqlValue};
pub use reference::{reference_match, RdfTerm, Solution};

#[derive(Debug, Clone, PartialEq)]
pub struct CompileOptions {
    /// IRI prefix of entities, bound to `wd:`.
    pub entity_prefix: String,
    /// IRI prefix of direct-claim properties, bound to `wdt:`.
    pub property_prefix: String,
    pub instance_of: ItemId,
    pub subclass_of: ItemId,
    /// Language tag of labels matched by text constraints.
    pub label_lang: String,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions {
            entity_prefix: "http://www.wikidata.org/entity/".into(),
            property_prefix: "http://www.wikidata.org/prop/direct/".into(),
            instance_of: ItemId::p(31),
            subclass_of: ItemId::p(279),
            label_lang: "en".into(),
        }
    }
}

pub const RDFS_LABEL: &str = "http://www.w3.org/2000/01/rdf-schema#label";

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Var(String),
    Item(ItemId),
    LangLiteral(String, String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum PathExpr {
    Property(ItemId),
    Label,
    /// A predicate variable.
    Var(String),
    /// `instance of` then zero or more `subclass of`.
    TypeChain,
    /// One or more `subclass of`.
    SubclassPlus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    pub fn holds(self, a: f64, b: f64) -> bool {
        match self {
            CmpOp::Eq => a == b,
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Or(Vec<Expr>),
    And(Vec<Expr>),
    SameItem(String, ItemId),
    Exists(Vec<Pattern>),
    IsNumeric(String),
    Compare(String, CmpOp, Number),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Pattern {
    Triple { subject: Node, path: PathExpr, object: Node },
    Union(Vec<Vec<Pattern>>),
    Values { var: String, items: Vec<ItemId> },
    Filter(Expr),
}

/// The patterns compiled from one definition.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockGroup {
    pub block: usize,
    pub optional: bool,
    pub patterns: Vec<Pattern>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Projected {
    pub var: String,
    pub block: usize,
    pub role: LocalVar,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompiledQuery {
    pub text: String,
    pub projection: Vec<Projected>,
    pub groups: Vec<BlockGroup>,
    /// Parts of the constructor that stay outside the query.
    pub notes: Vec<String>,
    pub options: CompileOptions,
}

impl CompiledQuery {
    /// The variables holding the two roles of block `block`.
    pub fn block_vars(&self, block: usize) -> Option<(&str, &str)> {
        let mut it = self.projection.iter().filter(|p| p.block == block);
        Some((it.next()?.var.as_str(), it.next()?.var.as_str()))
    }
}

fn role_var(block: usize, role: &LocalVar) -> String {
    format!("b{}_{}", block + 1, role)
}

pub fn compile(c: &Constructor, opts: &CompileOptions) -> CompiledQuery {
    let mut groups = Vec::new();
    let mut projection = Vec::new();
    let mut notes = Vec::new();

    for (bi, b) in c.blocks.iter().enumerate() {
        let v: Vec<String> = b.roles.iter().map(|r| role_var(bi, &r.var)).collect();
        for (r, name) in b.roles.iter().zip(&v) {
            projection.push(Projected { var: name.clone(), block: bi, role: r.var.clone() });
        }

        let mut patterns = Vec::new();
        let props: Vec<ItemId> = effective_properties(b).into_iter().collect();
        let edge = |p: ItemId| Pattern::Triple {
            subject: Node::Var(v[0].clone()),
            path: PathExpr::Property(p),
            object: Node::Var(v[1].clone()),
        };
        if props.len() == 1 {
            patterns.push(edge(props[0]));
        } else {
            patterns.push(Pattern::Union(props.iter().map(|p| vec![edge(*p)]).collect()));
        }

        let mut filters = Vec::new();
        for (i, r) in b.roles.iter().enumerate() {
            let var = &v[i];
            let mut branches = Vec::new();
            for t in effective_types(b, r.filler) {
                branches.push(vec![Pattern::Values { var: var.clone(), items: vec![t] }]);
                branches.push(vec![Pattern::Triple {
                    subject: Node::Var(var.clone()),
                    path: PathExpr::TypeChain,
                    object: Node::Item(t),
                }]);
                branches.push(vec![Pattern::Triple {
                    subject: Node::Var(var.clone()),
                    path: PathExpr::SubclassPlus,
                    object: Node::Item(t),
                }]);
            }
            patterns.push(Pattern::Union(branches));
            for inst in c.instances_of(r.filler) {
                patterns.push(Pattern::Values { var: var.clone(), items: vec![inst] });
            }
            if let Some(vc) = &r.constraint {
                filters.push(Pattern::Filter(constraint_expr(var, vc, opts, &mut 0)));
            }
        }
        patterns.extend(filters);

        for f in &b.functions {
            let args: Vec<String> = f.args.iter().map(ToString::to_string).collect();
            notes.push(format!("function {}({}) in block {} is evaluated outside SPARQL", f.function, args.join(", "), bi + 1));
        }

        let required = b.mandatories.iter().any(|m| b.role(m).is_some());
        groups.push(BlockGroup { block: bi, optional: !required, patterns });
    }

    let text = render(c, &projection, &groups, &notes, opts);
    CompiledQuery { text, projection, groups, notes, options: opts.clone() }
}

fn constraint_expr(var: &str, vc: &ValueConstraint, opts: &CompileOptions, counter: &mut usize) -> Expr {
    let mut alts = Vec::new();
    for item in vc.items() {
        alts.push(match item {
            ValueItem::Item(q) => Expr::SameItem(var.to_string(), *q),
            ValueItem::Text(t) => Expr::Exists(vec![Pattern::Triple {
                subject: Node::Var(var.to_string()),
                path: PathExpr::Label,
                object: Node::LangLiteral(t.clone(), opts.label_lang.clone()),
            }]),
            numeric => {
                *counter += 1;
                let p = format!("{var}_p{counter}");
                let n = format!("{var}_n{counter}");
                let test = match numeric {
                    ValueItem::Number(x) => Expr::Compare(n.clone(), CmpOp::Eq, *x),
                    ValueItem::Range { lo, hi } => Expr::And(vec![
                        Expr::Compare(n.clone(), CmpOp::Ge, *lo),
                        Expr::Compare(n.clone(), CmpOp::Le, *hi),
                    ]),
                    ValueItem::Compare { op, bound } => {
                        let op = match op {
                            CompareOp::Lt => CmpOp::Lt,
                            CompareOp::Le => CmpOp::Le,
                            CompareOp::Gt => CmpOp::Gt,
                            CompareOp::Ge => CmpOp::Ge,
                        };
                        Expr::Compare(n.clone(), op, *bound)
                    }
                    _ => unreachable!("text and items handled above"),
                };
                Expr::Exists(vec![
                    Pattern::Triple { subject: Node::Var(var.to_string()), path: PathExpr::Var(p), object: Node::Var(n.clone()) },
                    Pattern::Filter(Expr::And(vec![Expr::IsNumeric(n), test])),
                ])
            }
        });
    }
    if alts.len() == 1 {
        alts.remove(0)
    } else {
        Expr::Or(alts)
    }
}

// ---- rendering ---------------------------------------------------------

fn render(c: &Constructor, projection: &[Projected], groups: &[BlockGroup], notes: &[String], opts: &CompileOptions) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# {}:{}", c.kind.english(), c.name);
    for n in notes {
        let _ = writeln!(out, "# {n}");
    }
    let _ = writeln!(out, "PREFIX wd: <{}>", opts.entity_prefix);
    let _ = writeln!(out, "PREFIX wdt: <{}>", opts.property_prefix);
    let _ = writeln!(out, "PREFIX rdfs: <http://www.w3.org/2000/01/rdf-schema#>");
    let vars: Vec<String> = projection.iter().map(|p| format!("?{}", p.var)).collect();
    let _ = writeln!(out, "SELECT DISTINCT {} WHERE {{", vars.join(" "));
    for g in groups {
        let _ = write!(out, "  # block {}\n  ", g.block + 1);
        if g.optional {
            out.push_str("OPTIONAL ");
        }
        out.push_str("{\n");
        render_patterns(&mut out, &g.patterns, 2, opts);
        out.push_str("  }\n");
    }
    out.push_str("}\n");
    out
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

fn render_patterns(out: &mut String, patterns: &[Pattern], depth: usize, opts: &CompileOptions) {
    for p in patterns {
        indent(out, depth);
        match p {
            Pattern::Triple { subject, path, object } => {
                let _ = writeln!(out, "{} {} {} .", node(subject), path_text(path, opts), node(object));
            }
            Pattern::Values { var, items } => {
                let items: Vec<String> = items.iter().map(|i| format!("wd:{i}")).collect();
                let _ = writeln!(out, "VALUES ?{var} {{ {} }}", items.join(" "));
            }
            Pattern::Filter(e) => {
                let _ = writeln!(out, "FILTER({})", expr(e, depth, opts));
            }
            Pattern::Union(branches) => {
                for (i, b) in branches.iter().enumerate() {
                    if i > 0 {
                        indent(out, depth);
                        out.push_str("UNION ");
                    }
                    out.push_str("{\n");
                    render_patterns(out, b, depth + 1, opts);
                    indent(out, depth);
                    out.push_str("}\n");
                }
            }
        }
    }
}

fn node(n: &Node) -> String {
    match n {
        Node::Var(v) => format!("?{v}"),
        Node::Item(i) => format!("wd:{i}"),
        Node::LangLiteral(t, lang) => format!("{}@{lang}", quote(t)),
    }
}

fn quote(t: &str) -> String {
    let mut s = String::from("\"");
    for c in t.chars() {
        match c {
            '"' => s.push_str("\\\""),
            '\\' => s.push_str("\\\\"),
            '\n' => s.push_str("\\n"),
            '\r' => s.push_str("\\r"),
            c => s.push(c),
        }
    }
    s.push('"');
    s
}

fn path_text(p: &PathExpr, opts: &CompileOptions) -> String {
    match p {
        PathExpr::Property(p) => format!("wdt:{p}"),
        PathExpr::Label => "rdfs:label".into(),
        PathExpr::Var(v) => format!("?{v}"),
        PathExpr::TypeChain => format!("wdt:{}/wdt:{}*", opts.instance_of, opts.subclass_of),
        PathExpr::SubclassPlus => format!("wdt:{}+", opts.subclass_of),
    }
}

fn expr(e: &Expr, depth: usize, opts: &CompileOptions) -> String {
    match e {
        Expr::Or(xs) => format!("({})", xs.iter().map(|x| expr(x, depth, opts)).collect::<Vec<_>>().join(" || ")),
        Expr::And(xs) => format!("({})", xs.iter().map(|x| expr(x, depth, opts)).collect::<Vec<_>>().join(" && ")),
        Expr::SameItem(v, i) => format!("?{v} = wd:{i}"),
        Expr::IsNumeric(v) => format!("isNumeric(?{v})"),
        Expr::Compare(v, op, n) => format!("?{v} {} {}", op.symbol(), number_literal(*n)),
        Expr::Exists(ps) => {
            let mut inner = String::new();
            render_patterns(&mut inner, ps, depth + 1, opts);
            let mut s = String::from("EXISTS {\n");
            s.push_str(&inner);
            for _ in 0..depth {
                s.push_str("  ");
            }
            s.push('}');
            s
        }
    }
}

/// Numbers are written as decimals so every bound compares numerically.
fn number_literal(n: Number) -> String {
    let s = n.to_string();
    if s.contains('.') {
        s
    } else {
        format!("{s}.0")
    }
}

/// The graph as N-Triples, the way a store would see it: item triples,
/// literal triples, labels, and numeric values as decimal literals.
pub fn to_ntriples(g: &KnowledgeGraph, opts: &CompileOptions) -> String {
    let e = |i: ItemId| format!("<{}{i}>", opts.entity_prefix);
    let p = |i: ItemId| format!("<{}{i}>", opts.property_prefix);
    let mut lines = BTreeSet::new();
    for t in g.triples() {
        let o = match &t.object {
            Object::Item(i) => e(*i),
            Object::Literal(s) => quote(s),
        };
        lines.insert(format!("{} {} {o} .", e(t.subject), p(t.predicate)));
    }
    for (i, lang, text) in g.labels() {
        lines.insert(format!("{} <{RDFS_LABEL}> {}@{lang} .", e(i), quote(text)));
    }
    for item in g.value_subjects() {
        for (prop, v) in g.values_of(item) {
            lines.insert(format!(
                "{} {} \"{}\"^^<http://www.w3.org/2001/XMLSchema#decimal> .",
                e(item),
                p(prop),
                decimal(v)
            ));
        }
    }
    let mut out = String::new();
    for l in lines {
        out.push_str(&l);
        out.push('\n');
    }
    out
}

fn decimal(v: f64) -> String {
    let s = format!("{v}");
    if s.contains('.') {
        s
    } else {
        format!("{s}.0")
    }
}
