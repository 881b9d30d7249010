//! Seeded random models, constructors and graphs.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use cosmo::eval::KnowledgeGraph;
use cosmo::*;

pub use rand::SeedableRng;
pub type Rng8 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng8 {
    ChaCha8Rng::seed_from_u64(seed)
}

fn var(s: &str) -> LocalVar {
    LocalVar::new(s).unwrap_or_else(|e| panic!("{s}: {e}"))
}

// ---- models for notation round trips ------------------------------------

/// Variable spellings, including keywords of every notation, which the
/// parser must still read as variables in variable positions.
const VAR_POOL: &[&str] = &[
    "r1", "r2", "r3", "x", "y_2", "Ár", "TC", "IC", "Join", "IsMand", "Property", "Propiedad", "Funcion",
    "ObjectType", "Objeto", "SubTC", "InstOf", "Po", "Izen", "rol", "Role", "Name",
];

const NAME_POOL: &[&str] = &["C1", "C2", "C3", "C5", "Cx", "Hub", "TC", "Join", "Constructor", "Ñu", "k_9"];

const TEXT_POOL: &[&str] = &[
    "has scholarship",
    "Argentina",
    "a",
    "with \"quotes\"",
    "back\\slash",
    "Q42",
    "3",
    "TC",
    "línea",
    "two  spaces",
    "",
    "comma, inside",
    "brace }",
];

fn q(r: &mut Rng8) -> ItemId {
    match r.gen_range(0..4) {
        0 => ItemId::q(r.gen_range(1..10)),
        1 => ItemId::q(r.gen_range(1..100_000)),
        _ => ItemId::q(r.gen_range(1..200_000_000)),
    }
}

fn p(r: &mut Rng8) -> ItemId {
    ItemId::p(r.gen_range(1..20_000))
}

fn z(r: &mut Rng8) -> ItemId {
    ItemId::z(r.gen_range(1..100_000))
}

fn number(r: &mut Rng8) -> Number {
    let v = match r.gen_range(0..4) {
        0 => r.gen_range(-50..200) as f64,
        1 => r.gen_range(-1000..1000) as f64 / 8.0,
        2 => r.gen_range(0.0..1e6_f64),
        _ => r.gen_range(-1.0..1.0_f64),
    };
    Number::new(v).expect("finite")
}

fn constraint(r: &mut Rng8) -> ValueConstraint {
    let n = r.gen_range(1..=3);
    let items = (0..n)
        .map(|_| match r.gen_range(0..5) {
            0 => ValueItem::Text(TEXT_POOL.choose(r).unwrap().to_string()),
            1 => ValueItem::Item(q(r)),
            2 => ValueItem::Number(number(r)),
            3 => {
                let (a, b) = (number(r), number(r));
                let (lo, hi) = if a.value() <= b.value() { (a, b) } else { (b, a) };
                ValueItem::Range { lo, hi }
            }
            _ => {
                let op = *[CompareOp::Lt, CompareOp::Le, CompareOp::Gt, CompareOp::Ge].choose(r).unwrap();
                ValueItem::Compare { op, bound: number(r) }
            }
        })
        .collect();
    ValueConstraint::new(items).expect("non-empty, ordered ranges")
}

/// A well-formed model: unique constructor names, distinct role variables
/// inside each constructor, instance constructors with at least one
/// instantiation, links only towards earlier constructors of a fitting
/// kind. `object_roles` allows `Object(...)` fillers, which only the
/// longform notation keeps apart.
pub fn random_model(r: &mut Rng8, object_roles: bool) -> Model {
    let mut names: Vec<&str> = NAME_POOL.to_vec();
    names.shuffle(r);
    let count = r.gen_range(0..=4);
    let mut decls = Vec::new();
    let mut made: Vec<(LocalVar, ConstructorKind)> = Vec::new();
    for name in names.into_iter().take(count) {
        let kind = if r.gen_bool(0.5) { ConstructorKind::Type } else { ConstructorKind::Instance };
        let c = random_constructor_for_syntax(r, var(name), kind, object_roles);
        if !made.is_empty() && r.gen_bool(0.6) {
            let (to, to_kind) = made.choose(r).unwrap().clone();
            let link = match (kind, to_kind) {
                (ConstructorKind::Instance, ConstructorKind::Type) if r.gen_bool(0.5) => LinkKind::InstanceOf,
                (a, b) if a == b && r.gen_bool(0.6) => LinkKind::SubConstructorOf,
                _ => LinkKind::PartOf,
            };
            let l = Declaration::Link(Link { kind: link, from: c.name.clone(), to });
            if r.gen_bool(0.5) {
                decls.push(Declaration::Constructor(c.clone()));
                decls.push(l);
            } else {
                decls.push(l);
                decls.push(Declaration::Constructor(c.clone()));
            }
        } else {
            decls.push(Declaration::Constructor(c.clone()));
        }
        made.push((c.name, kind));
    }
    Model::new(decls)
}

fn random_constructor_for_syntax(r: &mut Rng8, name: LocalVar, kind: ConstructorKind, object_roles: bool) -> Constructor {
    let mut vars: Vec<&str> = VAR_POOL.to_vec();
    vars.shuffle(r);
    let nblocks = r.gen_range(1..=3);
    let mut blocks = Vec::new();
    for bi in 0..nblocks {
        let (v1, v2) = (var(vars[2 * bi]), var(vars[2 * bi + 1]));
        let property = p(r);
        let mut roles = [RoleDecl::new(v1.clone(), q(r)), RoleDecl::new(v2.clone(), q(r))];
        for role in &mut roles {
            if r.gen_bool(0.2) {
                role.name = Some(q(r));
            }
            if object_roles && r.gen_bool(0.25) {
                role.kind = RoleKind::Object;
            }
            if r.gen_bool(0.25) {
                role.constraint = Some(constraint(r));
            }
        }
        let mut functions = Vec::new();
        for _ in 0..r.gen_range(0..=2) {
            let nargs = r.gen_range(1..=3);
            let args = (0..nargs)
                .map(|_| if r.gen_bool(0.6) { roles[r.gen_range(0..2)].filler } else { q(r) })
                .collect();
            let constraint = r.gen_bool(0.2).then(|| constraint(r));
            functions.push(FunctionDecl { function: z(r), args, constraint });
        }
        let mut joins = Vec::new();
        if r.gen_bool(0.25) {
            joins.push(if r.gen_bool(0.5) {
                JoinDecl { left: roles[r.gen_range(0..2)].filler, right: q(r) }
            } else {
                JoinDecl { left: property, right: p(r) }
            });
        }
        let mut mandatories = Vec::new();
        for v in [&v1, &v2] {
            if r.gen_bool(0.25) {
                mandatories.push(v.clone());
            }
        }
        let mut instantiations = Vec::new();
        let want = kind == ConstructorKind::Instance && (bi == 0 || r.gen_bool(0.3));
        if want || (kind == ConstructorKind::Type && r.gen_bool(0.05)) {
            instantiations.push(Instantiation { type_item: roles[r.gen_range(0..2)].filler, instance: q(r) });
        }
        blocks.push(Block {
            predicate: PredicateDecl { property, first: v1, second: v2 },
            roles,
            functions,
            joins,
            mandatories,
            instantiations,
        });
    }
    Constructor { kind, name, blocks }
}

/// Shorthand has no spelling for `Object(...)` fillers; this is what a
/// model looks like after passing through it.
pub fn as_shorthand_sees_it(m: &Model) -> Model {
    let mut m = m.clone();
    for d in &mut m.declarations {
        if let Declaration::Constructor(c) = d {
            for b in &mut c.blocks {
                for role in &mut b.roles {
                    role.kind = RoleKind::ObjectType;
                }
            }
        }
    }
    m
}

// ---- small worlds for evaluation ----------------------------------------

pub const Q_POOL: u64 = 8;
pub const P_POOL: u64 = 4;
/// Property carrying numeric values in generated graphs.
pub const VALUE_PROP: ItemId = ItemId::p(5);
pub const LABELS: [&str; 3] = ["a", "b", "c"];

fn small_q(r: &mut Rng8) -> ItemId {
    ItemId::q(r.gen_range(1..=Q_POOL))
}

fn small_p(r: &mut Rng8) -> ItemId {
    ItemId::p(r.gen_range(1..=P_POOL))
}

/// Up to `max_triples` triples over Q1..Q8, with instance-of and
/// subclass-of edges mixed in, plus some labels and numeric values.
pub fn random_graph(r: &mut Rng8, max_triples: usize) -> KnowledgeGraph {
    let mut b = KnowledgeGraph::builder();
    let n = r.gen_range(0..=max_triples);
    for _ in 0..n {
        let s = small_q(r);
        let roll = r.gen_range(0..100);
        let pred = if roll < 20 {
            ItemId::p(31)
        } else if roll < 35 {
            ItemId::p(279)
        } else {
            small_p(r)
        };
        if r.gen_range(0..100) < 4 {
            b.literal(s, pred, LABELS.choose(r).unwrap());
        } else {
            b.triple(s, pred, small_q(r));
        }
    }
    for i in 1..=Q_POOL {
        if r.gen_bool(0.4) {
            b.label(ItemId::q(i), "en", LABELS.choose(r).unwrap());
        }
        if r.gen_bool(0.1) {
            b.label(ItemId::q(i), "es", LABELS.choose(r).unwrap());
        }
        if r.gen_bool(0.3) {
            b.value(ItemId::q(i), VALUE_PROP, r.gen_range(0..6) as f64);
        }
    }
    b.build().expect("no part-of records, so no mereology violation")
}

fn small_constraint(r: &mut Rng8) -> ValueConstraint {
    let n = r.gen_range(1..=2);
    let items = (0..n)
        .map(|_| match r.gen_range(0..5) {
            0 => ValueItem::Text(LABELS.choose(r).unwrap().to_string()),
            1 => ValueItem::Item(small_q(r)),
            2 => ValueItem::Number(Number::new(r.gen_range(0..6) as f64).unwrap()),
            3 => {
                let lo = r.gen_range(0..6);
                let hi = r.gen_range(lo..6);
                ValueItem::Range { lo: Number::new(lo as f64).unwrap(), hi: Number::new(hi as f64).unwrap() }
            }
            _ => {
                let op = *[CompareOp::Lt, CompareOp::Le, CompareOp::Gt, CompareOp::Ge].choose(r).unwrap();
                ValueItem::Compare { op, bound: Number::new(r.gen_range(0..6) as f64).unwrap() }
            }
        })
        .collect();
    ValueConstraint::new(items).unwrap()
}

/// A valid constructor over the small pools. `with_functions` adds
/// function declarations, which never change tuple sets.
pub fn random_small_constructor(r: &mut Rng8, with_functions: bool) -> Constructor {
    let kind = if r.gen_bool(0.5) { ConstructorKind::Type } else { ConstructorKind::Instance };
    let nblocks = r.gen_range(1..=3);
    let mut blocks = Vec::new();
    for bi in 0..nblocks {
        let v1 = var(&format!("r{}", 2 * bi + 1));
        let v2 = var(&format!("r{}", 2 * bi + 2));
        let property = small_p(r);
        let mut roles = [RoleDecl::new(v1.clone(), small_q(r)), RoleDecl::new(v2.clone(), small_q(r))];
        for role in &mut roles {
            if r.gen_bool(0.2) {
                role.constraint = Some(small_constraint(r));
            }
            if r.gen_bool(0.1) {
                role.name = Some(small_q(r));
            }
        }
        let mut joins = Vec::new();
        if r.gen_bool(0.2) {
            joins.push(JoinDecl { left: roles[r.gen_range(0..2)].filler, right: small_q(r) });
        }
        if r.gen_bool(0.2) {
            joins.push(JoinDecl { left: property, right: small_p(r) });
        }
        let mut mandatories = Vec::new();
        for v in [&v1, &v2] {
            if r.gen_bool(0.2) {
                mandatories.push(v.clone());
            }
        }
        let mut instantiations = Vec::new();
        if (kind == ConstructorKind::Instance && bi == 0) || r.gen_bool(0.1) {
            instantiations.push(Instantiation { type_item: roles[r.gen_range(0..2)].filler, instance: small_q(r) });
        }
        let mut functions = Vec::new();
        if with_functions && r.gen_bool(0.3) {
            functions.push(FunctionDecl { function: ItemId::z(1), args: vec![roles[0].filler], constraint: None });
        }
        blocks.push(Block {
            predicate: PredicateDecl { property, first: v1, second: v2 },
            roles,
            functions,
            joins,
            mandatories,
            instantiations,
        });
    }
    let kind = if blocks.iter().any(|b| !b.instantiations.is_empty()) { kind } else { ConstructorKind::Type };
    Constructor { kind, name: var("G"), blocks }
}

/// A type constructor over the small pools with no instantiations.
pub fn random_small_type_constructor(r: &mut Rng8) -> Constructor {
    let mut c = random_small_constructor(r, false);
    c.kind = ConstructorKind::Type;
    for b in &mut c.blocks {
        b.instantiations.clear();
    }
    c
}

pub fn pick_q(r: &mut Rng8) -> ItemId {
    small_q(r)
}
