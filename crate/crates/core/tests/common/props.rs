//! Algebraic laws checked case by case. Each function draws one case and
//! returns a description of the failure, if any.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;

use cosmo::algebra::{equal_up_to_name, generalize, instantiate, subsumes, subsumes_with, BindingSet};
use cosmo::eval::{eval_constructor, FunctionRegistry};
use cosmo::*;

use super::gen::{self, Rng8};

/// An instance constructor whose instantiated types each have one instance,
/// so its pins can be written as a binding set.
fn bindable_instance_constructor(r: &mut Rng8) -> (Constructor, BindingSet) {
    loop {
        let c = gen::random_small_constructor(r, false);
        if c.kind != ConstructorKind::Instance {
            continue;
        }
        let mut pins: BTreeMap<ItemId, BTreeSet<ItemId>> = BTreeMap::new();
        for i in c.instantiations() {
            pins.entry(i.type_item).or_default().insert(i.instance);
        }
        if pins.values().all(|s| s.len() == 1) {
            let b = BindingSet::new(pins.into_iter().map(|(t, s)| (t, *s.first().unwrap()))).unwrap();
            return (c, b);
        }
    }
}

pub fn generalize_instantiate_inverse(r: &mut Rng8) -> Result<(), String> {
    let (c, bindings) = bindable_instance_constructor(r);
    let g = generalize(&c).map_err(|e| e.to_string())?;
    if g.instantiations().next().is_some() || g.kind != ConstructorKind::Type {
        return Err(format!("generalize kept pins: {g:?}"));
    }
    let back = instantiate(&g, &bindings).map_err(|e| e.to_string())?;
    if !equal_up_to_name(&back, &c) {
        return Err(format!("instantiate(generalize(c)) differs from c: {c:?} vs {back:?}"));
    }

    let t = gen::random_small_type_constructor(r);
    let fillers: Vec<ItemId> = t.blocks.iter().flat_map(|b| b.roles.iter().map(|x| x.filler)).collect();
    let n = r.gen_range(1..=fillers.len().min(3));
    let chosen: Vec<ItemId> = fillers.choose_multiple(r, n).copied().collect();
    let bindings = BindingSet::new(chosen.iter().map(|&f| (f, gen::pick_q(r)))).unwrap();
    let inst = instantiate(&t, &bindings).map_err(|e| e.to_string())?;
    let again = generalize(&inst).map_err(|e| e.to_string())?;
    if !equal_up_to_name(&again, &t) {
        return Err(format!("generalize(instantiate(t)) differs from t: {t:?}"));
    }
    Ok(())
}

/// A constructor that `c` subsumes: more pins, constraints, mandatory
/// roles, functions or definitions, fewer joins.
pub fn specialize(r: &mut Rng8, c: &Constructor) -> Constructor {
    let mut s = c.clone();
    for _ in 0..r.gen_range(1..=3) {
        let bi = r.gen_range(0..s.blocks.len());
        match r.gen_range(0..6) {
            0 => {
                let ri = r.gen_range(0..2);
                let t = s.blocks[bi].roles[ri].filler;
                if s.instances_of(t).is_empty() {
                    s.blocks[bi].instantiations.push(Instantiation { type_item: t, instance: gen::pick_q(r) });
                    s.kind = ConstructorKind::Instance;
                }
            }
            1 => {
                let ri = r.gen_range(0..2);
                let role = &mut s.blocks[bi].roles[ri];
                if role.constraint.is_none() {
                    let v = ValueItem::Item(gen::pick_q(r));
                    role.constraint = Some(ValueConstraint::new(vec![v]).unwrap());
                }
            }
            2 => {
                let v = s.blocks[bi].roles[r.gen_range(0..2)].var.clone();
                if !s.blocks[bi].mandatories.contains(&v) {
                    s.blocks[bi].mandatories.push(v);
                }
            }
            3 => {
                let arg = s.blocks[bi].roles[0].filler;
                s.blocks[bi].functions.push(FunctionDecl { function: ItemId::z(1), args: vec![arg], constraint: None });
            }
            4 => {
                let extra = gen::random_small_type_constructor(r).blocks.remove(0);
                let n = s.blocks.len();
                let mut extra = extra;
                for (k, role) in extra.roles.iter_mut().enumerate() {
                    role.var = LocalVar::new(format!("s{n}_{k}")).unwrap();
                }
                extra.predicate.first = extra.roles[0].var.clone();
                extra.predicate.second = extra.roles[1].var.clone();
                extra.mandatories.clear();
                s.blocks.push(extra);
            }
            _ => {
                if !s.blocks[bi].joins.is_empty() {
                    let j = r.gen_range(0..s.blocks[bi].joins.len());
                    s.blocks[bi].joins.remove(j);
                }
            }
        }
    }
    s
}

pub fn subsumption_preorder(r: &mut Rng8) -> Result<(), String> {
    let a = gen::random_small_constructor(r, false);
    if !subsumes(&a, &a) {
        return Err(format!("not reflexive: {a:?}"));
    }
    let b = specialize(r, &a);
    let c = specialize(r, &b);
    for (x, y, what) in [(&a, &b, "a ⊒ b"), (&b, &c, "b ⊒ c")] {
        if !subsumes(x, y) {
            return Err(format!("specialisation not subsumed ({what}): {x:?} / {y:?}"));
        }
    }
    if !subsumes(&a, &c) {
        return Err(format!("not transitive: {a:?} / {b:?} / {c:?}"));
    }
    // Unrelated triples: the law must hold whenever its premises do.
    let (x, y, z) = (
        gen::random_small_constructor(r, false),
        gen::random_small_constructor(r, false),
        gen::random_small_constructor(r, false),
    );
    if subsumes(&x, &y) && subsumes(&y, &z) && !subsumes(&x, &z) {
        return Err(format!("not transitive: {x:?} / {y:?} / {z:?}"));
    }
    Ok(())
}

/// When `general` subsumes `specific`, each block of `general` selects at
/// least what some block of `specific` selects, on any graph.
pub fn monotone_generalization(r: &mut Rng8) -> Result<(), String> {
    let g = gen::random_graph(r, 50);
    let general = gen::random_small_constructor(r, false);
    let mut specific = specialize(r, &general);
    // Narrow a filler to a subclass known to the graph.
    let bi = r.gen_range(0..specific.blocks.len());
    let ri = r.gen_range(0..2);
    let filler = specific.blocks[bi].roles[ri].filler;
    let subs: Vec<ItemId> = g.items().into_iter().filter(|&x| g.is_subclass(x, filler)).collect();
    if let Some(&narrow) = subs.choose(r) {
        let pinned = specific.instantiations().any(|i| i.type_item == filler || i.type_item == narrow);
        let joined = specific.blocks[bi].joins.iter().any(|j| j.partner(filler).is_some() || j.partner(narrow).is_some());
        if !pinned && !joined {
            specific.blocks[bi].roles[ri].filler = narrow;
        }
    }
    let narrower = |t: ItemId, u: ItemId| t == u || g.is_subclass(t, u);
    if !subsumes_with(&general, &specific, narrower) {
        return Err(format!("specialisation not subsumed: {general:?} / {specific:?}"));
    }
    let fr = FunctionRegistry::empty();
    let ge = eval_constructor(&general, &g, &fr);
    let se = eval_constructor(&specific, &g, &fr);
    for (i, gb) in ge.blocks.iter().enumerate() {
        if !se.blocks.iter().any(|sb| sb.tuples.is_subset(&gb.tuples)) {
            return Err(format!("block {i} of the general constructor selects less: {general:?} / {specific:?}"));
        }
    }
    Ok(())
}
