//! Language-agnostic abstract syntax of CoSMo models.
//!
//! Everything here is plain data: the parser builds these values, the
//! serializer prints them, and the evaluator, translator and compiler read
//! them. Constructors of the newtypes check the lexical rules of the
//! language so that a `Model` built by hand can always be printed.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The three identifier spaces a model may reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ItemKind {
    /// Wikidata entity (`Q42`).
    QItem,
    /// Wikidata property (`P31`).
    PItem,
    /// Wikifunctions function (`Z12345`).
    ZItem,
}

impl ItemKind {
    pub fn letter(self) -> char {
        match self {
            ItemKind::QItem => 'Q',
            ItemKind::PItem => 'P',
            ItemKind::ZItem => 'Z',
        }
    }

    fn from_letter(c: char) -> Option<Self> {
        match c {
            'Q' => Some(ItemKind::QItem),
            'P' => Some(ItemKind::PItem),
            'Z' => Some(ItemKind::ZItem),
            _ => None,
        }
    }
}

/// A Q, P or Z identifier such as `Q42`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ItemId {
    kind: ItemKind,
    number: u64,
}

impl ItemId {
    /// Panics if `number` is zero.
    pub const fn new(kind: ItemKind, number: u64) -> Self {
        assert!(number >= 1, "item numbers start at 1");
        ItemId { kind, number }
    }

    pub const fn q(number: u64) -> Self {
        Self::new(ItemKind::QItem, number)
    }

    pub const fn p(number: u64) -> Self {
        Self::new(ItemKind::PItem, number)
    }

    pub const fn z(number: u64) -> Self {
        Self::new(ItemKind::ZItem, number)
    }

    pub fn kind(self) -> ItemKind {
        self.kind
    }

    pub fn number(self) -> u64 {
        self.number
    }

    pub fn is_q(self) -> bool {
        self.kind == ItemKind::QItem
    }

    pub fn is_p(self) -> bool {
        self.kind == ItemKind::PItem
    }

    pub fn is_z(self) -> bool {
        self.kind == ItemKind::ZItem
    }
}

impl fmt::Display for ItemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.kind.letter(), self.number)
    }
}

impl fmt::Debug for ItemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for ItemId {
    type Err = IdentifierError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match classify_identifier(s)? {
            Identifier::Item(item) => Ok(item),
            _ => Err(IdentifierError::Malformed(s.to_string())),
        }
    }
}

impl Serialize for ItemId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ItemId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One of the fourteen language-feature identifiers `CSM001`..`CSM014`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CsmId(u8);

impl CsmId {
    pub const OBJECT: CsmId = CsmId(1);
    pub const OBJECT_TYPE: CsmId = CsmId(2);
    pub const PROPERTY: CsmId = CsmId(3);
    pub const ROLE: CsmId = CsmId(4);
    pub const FUNCTION: CsmId = CsmId(5);
    pub const INSTANCE_CONSTRUCTOR: CsmId = CsmId(6);
    pub const TYPE_CONSTRUCTOR: CsmId = CsmId(7);
    pub const SUB_CONSTRUCTOR_OF: CsmId = CsmId(8);
    pub const INSTANCE_OF: CsmId = CsmId(9);
    pub const PART_OF: CsmId = CsmId(10);
    pub const JOIN: CsmId = CsmId(11);
    pub const IS_MANDATORY: CsmId = CsmId(12);
    pub const NAME: CsmId = CsmId(13);
    pub const VALUE_CONSTRAINT: CsmId = CsmId(14);

    pub const COUNT: u8 = 14;

    pub fn new(number: u8) -> Option<Self> {
        (1..=Self::COUNT).contains(&number).then_some(CsmId(number))
    }

    pub fn number(self) -> u8 {
        self.0
    }

    pub fn all() -> impl Iterator<Item = CsmId> {
        (1..=Self::COUNT).map(CsmId)
    }
}

impl fmt::Display for CsmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CSM{:03}", self.0)
    }
}

impl fmt::Debug for CsmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for CsmId {
    type Err = IdentifierError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match classify_identifier(s)? {
            Identifier::Csm(id) => Ok(id),
            _ => Err(IdentifierError::Malformed(s.to_string())),
        }
    }
}

/// A model-local variable: constructor names and role variables.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct LocalVar(String);

impl LocalVar {
    pub fn new(name: impl Into<String>) -> Result<Self, IdentifierError> {
        let name = name.into();
        match classify_identifier(&name)? {
            Identifier::Var(v) => Ok(v),
            _ => Err(IdentifierError::NotAVariable(name)),
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Appends a suffix, e.g. `C5` + `_gen`. The result is still a variable
    /// because the base already starts with a letter.
    pub fn with_suffix(&self, suffix: &str) -> LocalVar {
        LocalVar::new(format!("{}{}", self.0, suffix)).expect("suffixed variable stays well-formed")
    }
}

impl fmt::Display for LocalVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for LocalVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl TryFrom<String> for LocalVar {
    type Error = IdentifierError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        LocalVar::new(value)
    }
}

impl From<LocalVar> for String {
    fn from(v: LocalVar) -> String {
        v.0
    }
}

impl FromStr for LocalVar {
    type Err = IdentifierError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        LocalVar::new(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IdentifierError {
    #[error("empty identifier")]
    Empty,
    #[error("malformed token `{0}`")]
    Malformed(String),
    #[error("`{0}` is outside CSM001..CSM014")]
    CsmOutOfRange(String),
    #[error("`{0}` is not a local variable")]
    NotAVariable(String),
}

/// The three token classes an identifier-shaped token can fall into.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Identifier {
    Item(ItemId),
    Csm(CsmId),
    Var(LocalVar),
}

/// Classifies an identifier-shaped token.
///
/// `Q`/`P`/`Z` followed only by digits is an item (no leading zeros, number
/// at least 1); `CSM` followed by exactly three digits is a feature id;
/// anything else starting with a letter and continuing with letters, digits
/// or `_` is a local variable.
pub fn classify_identifier(token: &str) -> Result<Identifier, IdentifierError> {
    let mut chars = token.chars();
    let first = chars.next().ok_or(IdentifierError::Empty)?;
    if !first.is_alphabetic() {
        return Err(IdentifierError::Malformed(token.to_string()));
    }
    if !token.chars().all(|c| c.is_alphanumeric() || c == '_') {
        return Err(IdentifierError::Malformed(token.to_string()));
    }

    if let Some(digits) = token.strip_prefix("CSM") {
        if digits.len() == 3 && digits.bytes().all(|b| b.is_ascii_digit()) {
            let n: u8 = digits.parse().expect("three ascii digits");
            return CsmId::new(n)
                .map(Identifier::Csm)
                .ok_or_else(|| IdentifierError::CsmOutOfRange(token.to_string()));
        }
    }

    if let Some(kind) = ItemKind::from_letter(first) {
        let digits = &token[1..];
        if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
            if digits.starts_with('0') {
                return Err(IdentifierError::Malformed(token.to_string()));
            }
            let number: u64 = digits
                .parse()
                .map_err(|_| IdentifierError::Malformed(token.to_string()))?;
            return Ok(Identifier::Item(ItemId { kind, number }));
        }
    }

    Ok(Identifier::Var(LocalVar(token.to_string())))
}

/// A finite decimal number appearing in value constraints.
#[derive(Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Number(f64);

impl Number {
    /// Returns `None` for NaN and infinities.
    pub fn new(value: f64) -> Option<Self> {
        value.is_finite().then_some(Number(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // `{}` on f64 is the shortest representation that parses back exactly
        write!(f, "{}", self.0)
    }
}

impl fmt::Debug for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CompareOp {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
}

impl CompareOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CompareOp::Lt => "<",
            CompareOp::Le => "<=",
            CompareOp::Gt => ">",
            CompareOp::Ge => ">=",
        }
    }

    pub fn holds(self, value: f64, bound: f64) -> bool {
        match self {
            CompareOp::Lt => value < bound,
            CompareOp::Le => value <= bound,
            CompareOp::Gt => value > bound,
            CompareOp::Ge => value >= bound,
        }
    }
}

/// One alternative of an ORM-style value constraint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueItem {
    Text(String),
    Item(ItemId),
    Number(Number),
    Range { lo: Number, hi: Number },
    Compare { op: CompareOp, bound: Number },
}

/// A non-empty enumeration of admissible values; a value satisfies the
/// constraint when it satisfies any of the items.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<ValueItem>", into = "Vec<ValueItem>")]
pub struct ValueConstraint {
    items: Vec<ValueItem>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstraintError {
    #[error("a value constraint needs at least one item")]
    Empty,
    #[error("range {lo}..{hi} has lo > hi")]
    InvertedRange { lo: String, hi: String },
}

impl ValueConstraint {
    pub fn new(items: Vec<ValueItem>) -> Result<Self, ConstraintError> {
        if items.is_empty() {
            return Err(ConstraintError::Empty);
        }
        for item in &items {
            if let ValueItem::Range { lo, hi } = item {
                if lo.value() > hi.value() {
                    return Err(ConstraintError::InvertedRange {
                        lo: lo.to_string(),
                        hi: hi.to_string(),
                    });
                }
            }
        }
        Ok(ValueConstraint { items })
    }

    pub fn items(&self) -> &[ValueItem] {
        &self.items
    }
}

impl TryFrom<Vec<ValueItem>> for ValueConstraint {
    type Error = ConstraintError;

    fn try_from(items: Vec<ValueItem>) -> Result<Self, Self::Error> {
        ValueConstraint::new(items)
    }
}

impl From<ValueConstraint> for Vec<ValueItem> {
    fn from(c: ValueConstraint) -> Self {
        c.items
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RoleKind {
    Object,
    ObjectType,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoleDecl {
    pub var: LocalVar,
    pub name: Option<ItemId>,
    pub kind: RoleKind,
    pub filler: ItemId,
    pub constraint: Option<ValueConstraint>,
}

impl RoleDecl {
    pub fn new(var: LocalVar, filler: ItemId) -> Self {
        RoleDecl {
            var,
            name: None,
            kind: RoleKind::ObjectType,
            filler,
            constraint: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredicateDecl {
    pub property: ItemId,
    pub first: LocalVar,
    pub second: LocalVar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionDecl {
    pub function: ItemId,
    pub args: Vec<ItemId>,
    pub constraint: Option<ValueConstraint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum JoinKind {
    /// `Join(Q1, Q2)`: union of two object types.
    Objects,
    /// `Join(P1, P2)`: union of two properties.
    Properties,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct JoinDecl {
    pub left: ItemId,
    pub right: ItemId,
}

impl JoinDecl {
    /// `None` when the two sides are of different kinds, or are Z items.
    pub fn kind(&self) -> Option<JoinKind> {
        match (self.left.kind(), self.right.kind()) {
            (ItemKind::QItem, ItemKind::QItem) => Some(JoinKind::Objects),
            (ItemKind::PItem, ItemKind::PItem) => Some(JoinKind::Properties),
            _ => None,
        }
    }

    /// The other side of the join, if `item` is one of its sides.
    pub fn partner(&self, item: ItemId) -> Option<ItemId> {
        if self.left == item {
            Some(self.right)
        } else if self.right == item {
            Some(self.left)
        } else {
            None
        }
    }
}

/// `ObjectType(T)={I}`: the fillers typed `T` are the instance `I`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Instantiation {
    pub type_item: ItemId,
    pub instance: ItemId,
}

/// One predicate with its two roles and the adornments that follow it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub predicate: PredicateDecl,
    /// Positional: `roles[0]` plays `predicate.first`, `roles[1]` plays
    /// `predicate.second`.
    pub roles: [RoleDecl; 2],
    pub functions: Vec<FunctionDecl>,
    pub joins: Vec<JoinDecl>,
    pub mandatories: Vec<LocalVar>,
    pub instantiations: Vec<Instantiation>,
}

impl Block {
    /// A block with the given property and two `ObjectType` roles.
    pub fn simple(property: ItemId, first: (&str, ItemId), second: (&str, ItemId)) -> Self {
        let v1 = LocalVar::new(first.0).expect("valid role variable");
        let v2 = LocalVar::new(second.0).expect("valid role variable");
        Block {
            predicate: PredicateDecl {
                property,
                first: v1.clone(),
                second: v2.clone(),
            },
            roles: [RoleDecl::new(v1, first.1), RoleDecl::new(v2, second.1)],
            functions: Vec::new(),
            joins: Vec::new(),
            mandatories: Vec::new(),
            instantiations: Vec::new(),
        }
    }

    pub fn role(&self, var: &LocalVar) -> Option<&RoleDecl> {
        self.roles.iter().find(|r| &r.var == var)
    }

    pub fn has_filler(&self, item: ItemId) -> bool {
        self.roles.iter().any(|r| r.filler == item)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConstructorKind {
    Type,
    Instance,
}

impl ConstructorKind {
    pub fn english(self) -> &'static str {
        match self {
            ConstructorKind::Type => "TypeConstructor",
            ConstructorKind::Instance => "InstanceConstructor",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constructor {
    pub kind: ConstructorKind,
    pub name: LocalVar,
    pub blocks: Vec<Block>,
}

impl Constructor {
    pub fn instantiations(&self) -> impl Iterator<Item = &Instantiation> {
        self.blocks.iter().flat_map(|b| b.instantiations.iter())
    }

    /// Instances that `type_item` is pinned to anywhere in this constructor.
    pub fn instances_of(&self, type_item: ItemId) -> Vec<ItemId> {
        self.instantiations()
            .filter(|i| i.type_item == type_item)
            .map(|i| i.instance)
            .collect()
    }

    /// Every role variable, in declaration order.
    pub fn role_vars(&self) -> impl Iterator<Item = &LocalVar> {
        self.blocks.iter().flat_map(|b| b.roles.iter().map(|r| &r.var))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LinkKind {
    SubConstructorOf,
    InstanceOf,
    PartOf,
}

impl LinkKind {
    pub fn english(self) -> &'static str {
        match self {
            LinkKind::SubConstructorOf => "SubConstructorOf",
            LinkKind::InstanceOf => "InstanceOf",
            LinkKind::PartOf => "PartOf",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Link {
    pub kind: LinkKind,
    pub from: LocalVar,
    pub to: LocalVar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Declaration {
    Constructor(Constructor),
    Link(Link),
}

impl Declaration {
    /// Short human description, e.g. `TypeConstructor:C1` or `InstanceOf(C2, C1)`.
    pub fn describe(&self) -> String {
        match self {
            Declaration::Constructor(c) => format!("{}:{}", c.kind.english(), c.name),
            Declaration::Link(l) => format!("{}({}, {})", l.kind.english(), l.from, l.to),
        }
    }
}

/// An ordered list of declarations; the unit of parsing and variable scope.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Model {
    pub declarations: Vec<Declaration>,
}

impl Model {
    pub fn new(declarations: Vec<Declaration>) -> Self {
        Model { declarations }
    }

    pub fn is_empty(&self) -> bool {
        self.declarations.is_empty()
    }

    pub fn constructors(&self) -> impl Iterator<Item = &Constructor> {
        self.declarations.iter().filter_map(|d| match d {
            Declaration::Constructor(c) => Some(c),
            Declaration::Link(_) => None,
        })
    }

    pub fn links(&self) -> impl Iterator<Item = &Link> {
        self.declarations.iter().filter_map(|d| match d {
            Declaration::Link(l) => Some(l),
            Declaration::Constructor(_) => None,
        })
    }

    pub fn constructor(&self, name: &LocalVar) -> Option<&Constructor> {
        self.constructors().find(|c| &c.name == name)
    }

    /// Every item occurrence in traversal order (duplicates included).
    pub fn items(&self) -> Vec<ItemId> {
        let mut out = Vec::new();
        for c in self.constructors() {
            for block in &c.blocks {
                out.push(block.predicate.property);
                for role in &block.roles {
                    out.extend(role.name);
                    out.push(role.filler);
                    if let Some(vc) = &role.constraint {
                        out.extend(constraint_items(vc));
                    }
                }
                for f in &block.functions {
                    out.push(f.function);
                    out.extend(f.args.iter().copied());
                    if let Some(vc) = &f.constraint {
                        out.extend(constraint_items(vc));
                    }
                }
                for j in &block.joins {
                    out.push(j.left);
                    out.push(j.right);
                }
                for i in &block.instantiations {
                    out.push(i.type_item);
                    out.push(i.instance);
                }
            }
        }
        out
    }
}

fn constraint_items(vc: &ValueConstraint) -> impl Iterator<Item = ItemId> + '_ {
    vc.items().iter().filter_map(|i| match i {
        ValueItem::Item(id) => Some(*id),
        _ => None,
    })
}
