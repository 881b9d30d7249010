//! First-order reading of a model.
//!
//! Items become constants (`q7566`) and predicates (`Q7566(x)`,
//! `P40(x, y)`); local variables become unary predicates. A constructor
//! object reifies one tuple per definition through `Contains`.

use std::collections::HashSet;
use std::fmt;

use crate::model::*;

#[derive(Debug, Clone, PartialEq)]
pub enum Term {
    Var(String),
    Const(String),
    Str(String),
    Num(Number),
    Apply(String, Vec<Term>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    Atom(String, Vec<Term>),
    Equals(Term, Term),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    ForAll(Vec<String>, Box<Formula>),
    Exists(Vec<String>, Box<Formula>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Ascii,
    Unicode,
}

fn var(name: &str) -> Term {
    Term::Var(name.to_string())
}

fn constant(item: ItemId) -> Term {
    Term::Const(item.to_string().to_lowercase())
}

fn atom(name: impl fmt::Display, args: Vec<Term>) -> Formula {
    Formula::Atom(name.to_string(), args)
}

fn implies(a: Formula, b: Formula) -> Formula {
    Formula::Implies(Box::new(a), Box::new(b))
}

fn iff(a: Formula, b: Formula) -> Formula {
    Formula::Iff(Box::new(a), Box::new(b))
}

fn forall(vars: &[&str], body: Formula) -> Formula {
    Formula::ForAll(vars.iter().map(|v| v.to_string()).collect(), Box::new(body))
}

fn exists(vars: Vec<String>, body: Formula) -> Formula {
    Formula::Exists(vars, Box::new(body))
}

/// A conjunction, collapsed when it has a single member.
fn and(mut parts: Vec<Formula>) -> Formula {
    if parts.len() == 1 {
        parts.remove(0)
    } else {
        Formula::And(parts)
    }
}

fn or(mut parts: Vec<Formula>) -> Formula {
    if parts.len() == 1 {
        parts.remove(0)
    } else {
        Formula::Or(parts)
    }
}

impl Formula {
    pub fn render(&self, style: Style) -> String {
        let mut out = String::new();
        write_formula(&mut out, self, style);
        out
    }

    fn is_binary(&self) -> bool {
        matches!(self, Formula::And(_) | Formula::Or(_) | Formula::Implies(..) | Formula::Iff(..))
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(Style::Ascii))
    }
}

fn write_term(out: &mut String, t: &Term) {
    match t {
        Term::Var(v) | Term::Const(v) => out.push_str(v),
        Term::Str(s) => {
            out.push('"');
            for c in s.chars() {
                if c == '"' || c == '\\' {
                    out.push('\\');
                }
                out.push(c);
            }
            out.push('"');
        }
        Term::Num(n) => out.push_str(&n.to_string()),
        Term::Apply(name, args) => {
            out.push_str(name);
            write_args(out, args);
        }
    }
}

fn write_args(out: &mut String, args: &[Term]) {
    out.push('(');
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_term(out, a);
    }
    out.push(')');
}

/// Operands that are themselves connectives are always parenthesized,
/// except the consequent of an implication, which associates to the right.
fn write_operand(out: &mut String, f: &Formula, style: Style, right_of_implies: bool) {
    let wrap = f.is_binary() && !(right_of_implies && matches!(f, Formula::Implies(..)));
    if wrap {
        out.push('(');
    }
    write_formula(out, f, style);
    if wrap {
        out.push(')');
    }
}

fn write_formula(out: &mut String, f: &Formula, style: Style) {
    let (and_s, or_s, imp_s, iff_s, not_s, all_s, ex_s) = match style {
        Style::Ascii => (" & ", " | ", " -> ", " <-> ", "~", "forall ", "exists "),
        Style::Unicode => (" ∧ ", " ∨ ", " → ", " ↔ ", "¬", "∀", "∃"),
    };
    match f {
        Formula::Atom(name, args) => {
            out.push_str(name);
            if !args.is_empty() {
                write_args(out, args);
            }
        }
        Formula::Equals(a, b) => {
            write_term(out, a);
            out.push_str(" = ");
            write_term(out, b);
        }
        Formula::Not(inner) => {
            out.push_str(not_s);
            let wrap = inner.is_binary() || matches!(**inner, Formula::Equals(..));
            if wrap {
                out.push('(');
            }
            write_formula(out, inner, style);
            if wrap {
                out.push(')');
            }
        }
        Formula::And(parts) | Formula::Or(parts) => {
            let sep = if matches!(f, Formula::And(_)) { and_s } else { or_s };
            for (i, p) in parts.iter().enumerate() {
                if i > 0 {
                    out.push_str(sep);
                }
                write_operand(out, p, style, false);
            }
        }
        Formula::Implies(a, b) | Formula::Iff(a, b) => {
            let is_imp = matches!(f, Formula::Implies(..));
            write_operand(out, a, style, false);
            out.push_str(if is_imp { imp_s } else { iff_s });
            write_operand(out, b, style, is_imp);
        }
        Formula::ForAll(vars, body) | Formula::Exists(vars, body) => {
            out.push_str(if matches!(f, Formula::ForAll(..)) { all_s } else { ex_s });
            out.push_str(&vars.join(", "));
            out.push_str(" (");
            write_formula(out, body, style);
            out.push(')');
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TheoryEntry {
    pub formula: Formula,
    /// Index of the declaration the formula comes from; `None` for the
    /// model-level mereology axioms.
    pub provenance: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TheoryFragment {
    pub entries: Vec<TheoryEntry>,
}

impl TheoryFragment {
    pub fn formulas(&self) -> impl Iterator<Item = &Formula> {
        self.entries.iter().map(|e| &e.formula)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// One formula per line, each declaration's group introduced by a
    /// `#` comment naming it.
    pub fn render(&self, model: &Model, style: Style) -> String {
        let mut out = String::new();
        let mut current: Option<Option<usize>> = None;
        for e in &self.entries {
            if current != Some(e.provenance) {
                current = Some(e.provenance);
                match e.provenance {
                    Some(i) => {
                        let what = model.declarations.get(i).map(Declaration::describe).unwrap_or_default();
                        out.push_str(&format!("# {i} {what}\n"));
                    }
                    None => out.push_str("# mereology\n"),
                }
            }
            out.push_str(&e.formula.render(style));
            out.push('\n');
        }
        out
    }
}

pub fn translate(model: &Model) -> TheoryFragment {
    let mut entries = Vec::new();
    for (i, decl) in model.declarations.iter().enumerate() {
        let formulas = match decl {
            Declaration::Constructor(c) => constructor(c),
            Declaration::Link(l) => vec![link(l)],
        };
        entries.extend(formulas.into_iter().map(|formula| TheoryEntry { formula, provenance: Some(i) }));
    }
    if model.links().any(|l| l.kind == LinkKind::PartOf) {
        entries.extend(mereology().into_iter().map(|formula| TheoryEntry { formula, provenance: None }));
    }
    TheoryFragment { entries }
}

/// Predicate name introduced by `Join(a, b)`.
pub fn join_name(j: &JoinDecl) -> String {
    format!("Join_{}_{}", j.left, j.right)
}

fn link(l: &Link) -> Formula {
    let from = atom(&l.from, vec![var("x")]);
    match l.kind {
        LinkKind::SubConstructorOf | LinkKind::InstanceOf => forall(&["x"], implies(from, atom(&l.to, vec![var("x")]))),
        LinkKind::PartOf => forall(
            &["x"],
            implies(
                from,
                exists(
                    vec!["y".into()],
                    and(vec![atom(&l.to, vec![var("y")]), atom("PPartOf", vec![var("x"), var("y")])]),
                ),
            ),
        ),
    }
}

fn mereology() -> Vec<Formula> {
    let pp = |a: &str, b: &str| atom("PPartOf", vec![var(a), var(b)]);
    vec![
        forall(&["x", "y", "z"], implies(and(vec![pp("x", "y"), pp("y", "z")]), pp("x", "z"))),
        forall(&["x"], Formula::Not(Box::new(pp("x", "x")))),
        forall(&["x", "y"], implies(pp("x", "y"), Formula::Not(Box::new(pp("y", "x"))))),
    ]
}

/// The predicate a block's tuples satisfy: its property, or the join of
/// it with another property.
fn tuple_predicate(b: &Block) -> String {
    b.joins
        .iter()
        .find(|j| j.kind() == Some(JoinKind::Properties) && j.partner(b.predicate.property).is_some())
        .map(join_name)
        .unwrap_or_else(|| b.predicate.property.to_string())
}

fn filler_predicate(b: &Block, filler: ItemId) -> String {
    b.joins
        .iter()
        .find(|j| j.kind() == Some(JoinKind::Objects) && j.partner(filler).is_some())
        .map(join_name)
        .unwrap_or_else(|| filler.to_string())
}

fn constructor(c: &Constructor) -> Vec<Formula> {
    let mut out = Vec::new();
    let mut declared: HashSet<ItemId> = HashSet::new();
    let mut qitem = |out: &mut Vec<Formula>, q: ItemId| {
        if declared.insert(q) {
            out.push(atom("QItem", vec![constant(q)]));
        }
    };

    for b in &c.blocks {
        for r in &b.roles {
            qitem(&mut out, r.filler);
        }
        let p = &b.predicate;
        out.push(and(vec![
            atom("PItem", vec![constant(p.property)]),
            forall(
                &["x", "y"],
                implies(
                    atom(p.property, vec![var("x"), var("y")]),
                    and(vec![atom(&p.first, vec![var("x")]), atom(&p.second, vec![var("y")])]),
                ),
            ),
        ]));
        for r in &b.roles {
            let typed = match r.kind {
                RoleKind::ObjectType => atom(filler_predicate(b, r.filler), vec![var("x")]),
                RoleKind::Object => Formula::Equals(var("x"), constant(r.filler)),
            };
            out.push(forall(&["x"], implies(atom(&r.var, vec![var("x")]), typed)));
            if let Some(vc) = &r.constraint {
                out.push(forall(&["x"], implies(atom(&r.var, vec![var("x")]), constraint(vc, var("x")))));
            }
        }
        for r in &b.roles {
            if let Some(n) = r.name {
                qitem(&mut out, n);
            }
        }
        for f in &b.functions {
            let mut args = vec![constant(f.function)];
            args.extend(f.args.iter().map(|a| constant(*a)));
            let result = Term::Apply(f.function.to_string(), vec![var("o")]);
            args.push(result.clone());
            let mut body = vec![atom("Has", args)];
            if let Some(vc) = &f.constraint {
                body.push(constraint(vc, result));
            }
            out.push(and(vec![atom("ZItem", vec![constant(f.function)]), exists(vec!["o".into()], and(body))]));
        }
        for j in &b.joins {
            let name = join_name(j);
            out.push(match j.kind() {
                Some(JoinKind::Properties) => {
                    let xy = || vec![var("x"), var("y")];
                    forall(&["x", "y"], iff(atom(name, xy()), or(vec![atom(j.left, xy()), atom(j.right, xy())])))
                }
                _ => forall(
                    &["x"],
                    iff(atom(name, vec![var("x")]), or(vec![atom(j.left, vec![var("x")]), atom(j.right, vec![var("x")])])),
                ),
            });
        }
    }
    out.push(constructor_axiom(c));
    out
}

/// `forall x (C(x) -> exists y1, y2 (Contains(x, p, y1, y2) & ...))`, one
/// existential per definition.
fn constructor_axiom(c: &Constructor) -> Formula {
    // each instantiation is stated in the first definition that has a role
    // of its type, or where it was written when no role has it
    let home = |inst: &Instantiation, written_in: usize| {
        c.blocks.iter().position(|b| b.has_filler(inst.type_item)).unwrap_or(written_in)
    };
    let mut placed: Vec<Vec<Instantiation>> = vec![Vec::new(); c.blocks.len()];
    for (bi, b) in c.blocks.iter().enumerate() {
        for inst in &b.instantiations {
            let h = home(inst, bi);
            if !placed[h].contains(inst) {
                placed[h].push(*inst);
            }
        }
    }

    let mut parts = Vec::new();
    for (bi, b) in c.blocks.iter().enumerate() {
        let y1 = format!("y{}", 2 * bi + 1);
        let y2 = format!("y{}", 2 * bi + 2);
        let mut body = vec![
            atom("Contains", vec![var("x"), constant(b.predicate.property), var(&y1), var(&y2)]),
            atom(tuple_predicate(b), vec![var(&y1), var(&y2)]),
            atom(&b.roles[0].var, vec![var(&y1)]),
            atom(&b.roles[1].var, vec![var(&y2)]),
        ];
        for inst in &placed[bi] {
            body.push(atom("QItem", vec![constant(inst.type_item)]));
            body.push(atom("QItem", vec![constant(inst.instance)]));
            body.push(atom(inst.type_item, vec![constant(inst.instance)]));
        }
        for (r, y) in b.roles.iter().zip([&y1, &y2]) {
            for i in c.instances_of(r.filler) {
                body.push(Formula::Equals(var(y), constant(i)));
            }
        }
        parts.push(exists(vec![y1, y2], and(body)));
    }
    forall(&["x"], implies(atom(&c.name, vec![var("x")]), and(parts)))
}

/// A value constraint as a disjunction over its items, about `subject`.
fn constraint(vc: &ValueConstraint, subject: Term) -> Formula {
    let s = || subject.clone();
    or(vc
        .items()
        .iter()
        .map(|item| match item {
            ValueItem::Item(q) => Formula::Equals(s(), constant(*q)),
            ValueItem::Text(t) => atom("Label", vec![s(), Term::Str(t.clone())]),
            ValueItem::Number(n) => atom("Value", vec![s(), Term::Num(*n)]),
            ValueItem::Range { lo, hi } => atom("Between", vec![s(), Term::Num(*lo), Term::Num(*hi)]),
            ValueItem::Compare { op, bound } => {
                let name = match op {
                    CompareOp::Lt => "Lt",
                    CompareOp::Le => "Le",
                    CompareOp::Gt => "Gt",
                    CompareOp::Ge => "Ge",
                };
                atom(name, vec![s(), Term::Num(*bound)])
            }
        })
        .collect())
}
