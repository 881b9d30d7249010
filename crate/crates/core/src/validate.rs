//! Static checks that the grammar alone does not enforce.
//!
//! Rule ids are stable: VR01 to VR12 cover the design principles of the
//! language, VR13 onwards re-check invariants that only hand-built models
//! can break.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::model::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
    Info,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
            Severity::Info => "info",
        })
    }
}

/// Where a finding points: a declaration and a path inside it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Location {
    pub declaration: usize,
    pub path: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Finding {
    pub rule: &'static str,
    pub severity: Severity,
    pub location: Location,
    pub message: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} [declaration {}", self.rule, self.severity, self.location.declaration)?;
        if !self.location.path.is_empty() {
            write!(f, " {}", self.location.path)?;
        }
        write!(f, "]: {}", self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
    /// Info-level observations; they never make a model invalid.
    pub notes: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.findings.is_empty()
    }

    pub fn has_errors(&self) -> bool {
        self.findings.iter().any(|f| f.severity == Severity::Error)
    }

    pub fn rules(&self) -> BTreeSet<&'static str> {
        self.findings.iter().map(|f| f.rule).collect()
    }

    fn push(&mut self, rule: &'static str, severity: Severity, declaration: usize, path: String, message: String) {
        let finding = Finding { rule, severity, location: Location { declaration, path }, message };
        if severity == Severity::Info {
            self.notes.push(finding);
        } else {
            self.findings.push(finding);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CatalogSource {
    File,
    Endpoint,
    OpenWorld,
}

/// The items a model may mention. Constructors reuse existing vocabulary
/// and never introduce new items.
#[derive(Debug, Clone, PartialEq)]
pub struct ItemCatalog {
    known: HashSet<ItemId>,
    source: CatalogSource,
}

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("catalog line {line}: `{text}` is not a Q, P or Z item")]
    BadLine { line: usize, text: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl ItemCatalog {
    pub fn open_world() -> Self {
        ItemCatalog { known: HashSet::new(), source: CatalogSource::OpenWorld }
    }

    pub fn from_items(items: impl IntoIterator<Item = ItemId>, source: CatalogSource) -> Self {
        ItemCatalog { known: items.into_iter().collect(), source }
    }

    /// One item per line; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, CatalogError> {
        let mut known = HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let item = line
                .parse::<ItemId>()
                .map_err(|_| CatalogError::BadLine { line: i + 1, text: line.to_string() })?;
            known.insert(item);
        }
        Ok(ItemCatalog { known, source: CatalogSource::File })
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, CatalogError> {
        ItemCatalog::parse(&std::fs::read_to_string(path)?)
    }

    pub fn source(&self) -> CatalogSource {
        self.source
    }

    pub fn contains(&self, item: ItemId) -> bool {
        self.source == CatalogSource::OpenWorld || self.known.contains(&item)
    }

    pub fn len(&self) -> usize {
        self.known.len()
    }

    pub fn is_empty(&self) -> bool {
        self.known.is_empty()
    }
}

/// Items of the model missing from the catalog, first occurrence first.
/// Always empty for an open-world catalog.
pub fn check_against_catalog(model: &Model, catalog: &ItemCatalog) -> Vec<ItemId> {
    if catalog.source == CatalogSource::OpenWorld {
        return Vec::new();
    }
    let mut seen = HashSet::new();
    model
        .items()
        .into_iter()
        .filter(|i| !catalog.contains(*i) && seen.insert(*i))
        .collect()
}

pub fn validate(model: &Model, catalog: &ItemCatalog) -> ValidationReport {
    let mut r = ValidationReport::default();

    // name -> (declaration index, kind) of the first constructor with that name
    let mut names: HashMap<&LocalVar, (usize, ConstructorKind)> = HashMap::new();
    for (d, decl) in model.declarations.iter().enumerate() {
        if let Declaration::Constructor(c) = decl {
            if let Some((first, _)) = names.get(&c.name) {
                r.push(
                    "VR01",
                    Severity::Error,
                    d,
                    String::new(),
                    format!("constructor `{}` is already declared at declaration {first}", c.name),
                );
            } else {
                names.insert(&c.name, (d, c.kind));
            }
        }
    }

    for (d, decl) in model.declarations.iter().enumerate() {
        match decl {
            Declaration::Constructor(c) => constructor_rules(&mut r, d, c, catalog),
            Declaration::Link(l) => link_rules(&mut r, d, l, &names),
        }
    }

    cycle_rule(&mut r, model, LinkKind::SubConstructorOf, "VR11");
    cycle_rule(&mut r, model, LinkKind::PartOf, "VR12");
    r
}

fn constructor_rules(r: &mut ValidationReport, d: usize, c: &Constructor, catalog: &ItemCatalog) {
    if c.blocks.is_empty() {
        r.push("VR15", Severity::Error, d, String::new(), format!("constructor `{}` has no definitions", c.name));
    }
    let instantiations = c.instantiations().count();
    match c.kind {
        ConstructorKind::Instance if instantiations == 0 => r.push(
            "VR10",
            Severity::Error,
            d,
            String::new(),
            format!("instance constructor `{}` has no instantiation", c.name),
        ),
        ConstructorKind::Type if instantiations > 0 => r.push(
            "VR10",
            Severity::Info,
            d,
            String::new(),
            format!("type constructor `{}` carries {instantiations} instantiation(s)", c.name),
        ),
        _ => {}
    }

    let fillers: HashSet<ItemId> = c.blocks.iter().flat_map(|b| b.roles.iter().map(|r| r.filler)).collect();
    for (bi, b) in c.blocks.iter().enumerate() {
        let at = |rest: &str| format!("blocks[{bi}]{rest}");
        let p = &b.predicate;

        if p.first == p.second {
            r.push("VR05", Severity::Error, d, at(".predicate"), format!("{} uses `{}` for both roles", p.property, p.first));
        }
        for (i, (role, want)) in b.roles.iter().zip([&p.first, &p.second]).enumerate() {
            if &role.var != want {
                r.push(
                    "VR05",
                    Severity::Error,
                    d,
                    at(&format!(".roles[{i}]")),
                    format!("role `{}` does not play position {} of {}({}, {})", role.var, i + 1, p.property, p.first, p.second),
                );
            }
        }
        for (i, m) in b.mandatories.iter().enumerate() {
            if b.role(m).is_none() {
                r.push(
                    "VR06",
                    Severity::Error,
                    d,
                    at(&format!(".mandatories[{i}]")),
                    format!("`{m}` is not a role of this definition"),
                );
            }
        }
        for (i, inst) in b.instantiations.iter().enumerate() {
            if !fillers.contains(&inst.type_item) {
                r.push(
                    "VR07",
                    Severity::Warning,
                    d,
                    at(&format!(".instantiations[{i}]")),
                    format!("{} is instantiated but no role is filled by it", inst.type_item),
                );
            }
        }
        for (i, j) in b.joins.iter().enumerate() {
            let path = at(&format!(".joins[{i}]"));
            match j.kind() {
                None => r.push(
                    "VR08",
                    Severity::Error,
                    d,
                    path,
                    format!("join mixes {} and {}", j.left, j.right),
                ),
                Some(kind) => {
                    let touches = |x: ItemId| match kind {
                        JoinKind::Properties => x == p.property,
                        JoinKind::Objects => b.has_filler(x),
                    };
                    if !touches(j.left) && !touches(j.right) {
                        r.push(
                            "VR13",
                            Severity::Warning,
                            d,
                            path,
                            format!("Join({}, {}) names nothing in its definition and has no effect", j.left, j.right),
                        );
                    }
                }
            }
        }

        kind_rules(r, d, bi, b);
    }

    if catalog.source != CatalogSource::OpenWorld {
        let single = Model::new(vec![Declaration::Constructor(c.clone())]);
        for item in check_against_catalog(&single, catalog) {
            r.push("VR09", Severity::Error, d, String::new(), format!("{item} is not in the item catalog"));
        }
    }
}

fn kind_rules(r: &mut ValidationReport, d: usize, bi: usize, b: &Block) {
    let mut check = |item: ItemId, want: ItemKind, path: String| {
        if item.kind() != want {
            r.push(
                "VR14",
                Severity::Error,
                d,
                format!("blocks[{bi}]{path}"),
                format!("{item} is used where a {want:?} is required"),
            );
        }
    };
    check(b.predicate.property, ItemKind::PItem, ".predicate".into());
    for (i, role) in b.roles.iter().enumerate() {
        check(role.filler, ItemKind::QItem, format!(".roles[{i}].filler"));
        if let Some(n) = role.name {
            check(n, ItemKind::QItem, format!(".roles[{i}].name"));
        }
    }
    for (i, f) in b.functions.iter().enumerate() {
        check(f.function, ItemKind::ZItem, format!(".functions[{i}]"));
        for a in &f.args {
            check(*a, ItemKind::QItem, format!(".functions[{i}].args"));
        }
    }
    for (i, inst) in b.instantiations.iter().enumerate() {
        check(inst.type_item, ItemKind::QItem, format!(".instantiations[{i}]"));
        check(inst.instance, ItemKind::QItem, format!(".instantiations[{i}]"));
    }
}

fn link_rules(r: &mut ValidationReport, d: usize, l: &Link, names: &HashMap<&LocalVar, (usize, ConstructorKind)>) {
    let from = names.get(&l.from).map(|x| x.1);
    let to = names.get(&l.to).map(|x| x.1);
    for (end, var, kind) in [("from", &l.from, from), ("to", &l.to, to)] {
        if kind.is_none() {
            r.push("VR02", Severity::Error, d, end.to_string(), format!("`{var}` is not a constructor of this model"));
        }
    }
    if l.from == l.to && l.kind != LinkKind::PartOf {
        r.push("VR16", Severity::Error, d, String::new(), format!("{} links `{}` to itself", l.kind.english(), l.from));
    }
    match (l.kind, from, to) {
        (LinkKind::InstanceOf, Some(f), Some(t)) => {
            if f != ConstructorKind::Instance {
                r.push("VR03", Severity::Warning, d, "from".into(), format!("`{}` is not an instance constructor", l.from));
            }
            if t != ConstructorKind::Type {
                r.push("VR03", Severity::Warning, d, "to".into(), format!("`{}` is not a type constructor", l.to));
            }
        }
        (LinkKind::SubConstructorOf, Some(f), Some(t)) if f != t => r.push(
            "VR04",
            Severity::Error,
            d,
            String::new(),
            format!("`{}` is a {} but `{}` is a {}", l.from, f.english(), l.to, t.english()),
        ),
        _ => {}
    }
}

/// Reports every link of `kind` that lies on a cycle. Self-loops count for
/// part-of (parthood is irreflexive); for subconstructors they are VR16.
fn cycle_rule(r: &mut ValidationReport, model: &Model, kind: LinkKind, rule: &'static str) {
    let mut edges: HashMap<&LocalVar, Vec<&LocalVar>> = HashMap::new();
    for l in model.links().filter(|l| l.kind == kind) {
        edges.entry(&l.from).or_default().push(&l.to);
    }
    let reaches = |start: &LocalVar, goal: &LocalVar| {
        let mut stack = vec![start];
        let mut seen = HashSet::new();
        while let Some(n) = stack.pop() {
            if n == goal {
                return true;
            }
            if seen.insert(n) {
                stack.extend(edges.get(n).into_iter().flatten().copied());
            }
        }
        false
    };
    for (d, decl) in model.declarations.iter().enumerate() {
        let Declaration::Link(l) = decl else { continue };
        if l.kind != kind {
            continue;
        }
        let on_cycle = if l.from == l.to { kind == LinkKind::PartOf } else { reaches(&l.to, &l.from) };
        if on_cycle {
            r.push(
                rule,
                Severity::Error,
                d,
                String::new(),
                format!("{}({}, {}) closes a cycle", kind.english(), l.from, l.to),
            );
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c1() -> Constructor {
        Constructor {
            kind: ConstructorKind::Type,
            name: LocalVar::new("C1").unwrap(),
            blocks: vec![Block::simple(ItemId::p(40), ("r1", ItemId::q(7566)), ("r2", ItemId::q(29514218)))],
        }
    }

    #[test]
    fn empty_model_is_valid() {
        assert!(validate(&Model::default(), &ItemCatalog::open_world()).is_valid());
    }

    #[test]
    fn catalog_difference_in_first_occurrence_order() {
        let m = Model::new(vec![Declaration::Constructor(c1())]);
        let cat = ItemCatalog::parse("P40 # the only one\n").unwrap();
        assert_eq!(check_against_catalog(&m, &cat), vec![ItemId::q(7566), ItemId::q(29514218)]);
        let full = ItemCatalog::parse("Q7566\nQ29514218\nP40").unwrap();
        assert!(check_against_catalog(&m, &full).is_empty());
        assert!(check_against_catalog(&m, &ItemCatalog::open_world()).is_empty());
    }

    #[test]
    fn bad_catalog_line() {
        assert!(matches!(ItemCatalog::parse("Q1\nfoo\n"), Err(CatalogError::BadLine { line: 2, .. })));
    }

    #[test]
    fn type_constructor_with_instantiation_is_only_noted() {
        let mut c = c1();
        c.blocks[0].instantiations.push(Instantiation { type_item: ItemId::q(29514218), instance: ItemId::q(1) });
        let rep = validate(&Model::new(vec![Declaration::Constructor(c)]), &ItemCatalog::open_world());
        assert!(rep.is_valid());
        assert_eq!(rep.notes.len(), 1);
    }
}
