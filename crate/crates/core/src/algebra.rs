//! Refining and generalising constructors.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use thiserror::Error;

use crate::eval::{effective_properties, effective_types};
use crate::model::*;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("`{0}` is already a type constructor")]
    AlreadyType(LocalVar),
    #[error("`{0}` is not a type constructor")]
    NotType(LocalVar),
    #[error("no bindings given")]
    EmptyBindings,
    #[error("{0} fills no role of the constructor")]
    UnboundType(ItemId),
    #[error("{0} is not a Q item")]
    NotQItem(ItemId),
}

/// Type-to-instance bindings used by [`instantiate`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BindingSet {
    bindings: BTreeMap<ItemId, ItemId>,
}

impl BindingSet {
    pub fn new(pairs: impl IntoIterator<Item = (ItemId, ItemId)>) -> Result<Self, AlgebraError> {
        let mut bindings = BTreeMap::new();
        for (t, i) in pairs {
            for x in [t, i] {
                if !x.is_q() {
                    return Err(AlgebraError::NotQItem(x));
                }
            }
            bindings.insert(t, i);
        }
        Ok(BindingSet { bindings })
    }

    pub fn iter(&self) -> impl Iterator<Item = (ItemId, ItemId)> + '_ {
        self.bindings.iter().map(|(t, i)| (*t, *i))
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }
}

/// Drops every instantiation, turning an instance constructor into the
/// type it instantiates. The name gets a `_gen` suffix.
pub fn generalize(c: &Constructor) -> Result<Constructor, AlgebraError> {
    if c.kind == ConstructorKind::Type {
        return Err(AlgebraError::AlreadyType(c.name.clone()));
    }
    let mut out = c.clone();
    out.kind = ConstructorKind::Type;
    out.name = c.name.with_suffix("_gen");
    for b in &mut out.blocks {
        b.instantiations.clear();
    }
    Ok(out)
}

/// Pins role types to instances. Each binding lands in every definition
/// that has a role of that type. The name gets an `_inst` suffix.
pub fn instantiate(c: &Constructor, bindings: &BindingSet) -> Result<Constructor, AlgebraError> {
    if c.kind != ConstructorKind::Type {
        return Err(AlgebraError::NotType(c.name.clone()));
    }
    if bindings.is_empty() {
        return Err(AlgebraError::EmptyBindings);
    }
    for (t, _) in bindings.iter() {
        if !c.blocks.iter().any(|b| b.has_filler(t)) {
            return Err(AlgebraError::UnboundType(t));
        }
    }
    let mut out = c.clone();
    out.kind = ConstructorKind::Instance;
    out.name = c.name.with_suffix("_inst");
    for b in &mut out.blocks {
        for (t, i) in bindings.iter() {
            let inst = Instantiation { type_item: t, instance: i };
            if b.has_filler(t) && !b.instantiations.contains(&inst) {
                b.instantiations.push(inst);
            }
        }
    }
    Ok(out)
}

/// Canonical form for comparisons that ignore the name and where an
/// instantiation was written: it is placed in every definition having a
/// role of its type, or left where it was when there is none.
pub fn normalize(c: &Constructor) -> Constructor {
    let mut out = c.clone();
    out.name = LocalVar::new("X").expect("valid variable");
    let all: Vec<(usize, Instantiation)> = c
        .blocks
        .iter()
        .enumerate()
        .flat_map(|(bi, b)| b.instantiations.iter().map(move |i| (bi, *i)))
        .collect();
    for b in &mut out.blocks {
        b.instantiations.clear();
    }
    for (bi, inst) in all {
        let homes: Vec<usize> = c
            .blocks
            .iter()
            .enumerate()
            .filter(|(_, b)| b.has_filler(inst.type_item))
            .map(|(i, _)| i)
            .collect();
        let homes = if homes.is_empty() { vec![bi] } else { homes };
        for h in homes {
            if !out.blocks[h].instantiations.contains(&inst) {
                out.blocks[h].instantiations.push(inst);
            }
        }
    }
    for b in &mut out.blocks {
        b.instantiations.sort();
    }
    out
}

/// Structural equality ignoring names and instantiation placement.
pub fn equal_up_to_name(a: &Constructor, b: &Constructor) -> bool {
    normalize(a) == normalize(b)
}

/// Structural subsumption with type identity as the only subclass fact.
pub fn subsumes(general: &Constructor, specific: &Constructor) -> bool {
    subsumes_with(general, specific, |a, b| a == b)
}

/// Sufficient condition for every block of `general` to select at least
/// what some block of `specific` selects. `narrower(t, u)` states that
/// type `t` is `u` or a subclass of it.
pub fn subsumes_with(general: &Constructor, specific: &Constructor, narrower: impl Fn(ItemId, ItemId) -> bool) -> bool {
    general
        .blocks
        .iter()
        .all(|g| specific.blocks.iter().any(|s| block_subsumes(general, g, specific, s, &narrower)))
}

fn block_subsumes(
    gc: &Constructor,
    g: &Block,
    sc: &Constructor,
    s: &Block,
    narrower: &impl Fn(ItemId, ItemId) -> bool,
) -> bool {
    if !effective_properties(s).is_subset(&effective_properties(g)) {
        return false;
    }
    for i in 0..2 {
        let (gr, sr) = (&g.roles[i], &s.roles[i]);
        let gtypes = effective_types(g, gr.filler);
        if !effective_types(s, sr.filler).iter().all(|t| gtypes.iter().any(|u| narrower(*t, *u))) {
            return false;
        }
        if gr.constraint.is_some() && gr.constraint != sr.constraint {
            return false;
        }
        let gpins: BTreeSet<ItemId> = gc.instances_of(gr.filler).into_iter().collect();
        let spins: BTreeSet<ItemId> = sc.instances_of(sr.filler).into_iter().collect();
        if !gpins.is_subset(&spins) {
            return false;
        }
        let mandatory = |b: &Block, var: &LocalVar| b.mandatories.contains(var);
        if mandatory(g, &gr.var) && !mandatory(s, &sr.var) {
            return false;
        }
    }
    g.functions.iter().all(|f| s.functions.contains(f))
}

/// A merged constructor and the renamings applied to the second input.
#[derive(Debug, Clone, PartialEq)]
pub struct Merged {
    pub constructor: Constructor,
    pub renames: Vec<(LocalVar, LocalVar)>,
}

impl Merged {
    /// Human-readable note on the renamings, empty when there were none.
    pub fn provenance_note(&self) -> String {
        self.renames.iter().map(|(a, b)| format!("{a} -> {b}")).collect::<Vec<_>>().join(", ")
    }
}

/// Concatenates the definitions of `c1` and `c2`. Role variables of `c2`
/// that clash with `c1` are renamed `v_2`, `v_3`, ... Instantiations keep
/// their constructor-wide reach in the result.
pub fn merge(c1: &Constructor, c2: &Constructor, name: LocalVar) -> Merged {
    let taken: HashSet<&LocalVar> = c1.role_vars().chain(c2.role_vars()).collect();
    let left: HashSet<&LocalVar> = c1.role_vars().collect();
    let mut used: HashSet<LocalVar> = taken.iter().map(|v| (*v).clone()).collect();

    let mut renames: Vec<(LocalVar, LocalVar)> = Vec::new();
    let mut seen = HashSet::new();
    for v in c2.role_vars() {
        if left.contains(v) && seen.insert(v.clone()) {
            let fresh = (2..)
                .map(|k| v.with_suffix(&format!("_{k}")))
                .find(|cand| !used.contains(cand))
                .expect("an unused suffix exists");
            used.insert(fresh.clone());
            renames.push((v.clone(), fresh));
        }
    }
    let rename = |v: &LocalVar| renames.iter().find(|(a, _)| a == v).map_or_else(|| v.clone(), |(_, b)| b.clone());

    let mut blocks = c1.blocks.clone();
    for b in &c2.blocks {
        let mut b = b.clone();
        b.predicate.first = rename(&b.predicate.first);
        b.predicate.second = rename(&b.predicate.second);
        for r in &mut b.roles {
            r.var = rename(&r.var);
        }
        for m in &mut b.mandatories {
            *m = rename(m);
        }
        blocks.push(b);
    }
    let kind = if c1.kind == ConstructorKind::Instance || c2.kind == ConstructorKind::Instance {
        ConstructorKind::Instance
    } else {
        ConstructorKind::Type
    };
    Merged { constructor: Constructor { kind, name, blocks }, renames }
}
