//! Brute-force evaluation straight from the definitions: enumerate every
//! pair of graph items and test each condition against the raw records.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use cosmo::eval::{KnowledgeGraph, Object};
use cosmo::*;

pub struct Oracle<'g> {
    g: &'g KnowledgeGraph,
    items: Vec<ItemId>,
    edges: HashSet<(ItemId, ItemId, ItemId)>,
    /// Reflexive-transitive subclass-of, computed by iterating to a fixpoint.
    sub_star: HashSet<(ItemId, ItemId)>,
    /// Transitive subclass-of (at least one step).
    sub_plus: HashSet<(ItemId, ItemId)>,
}

impl<'g> Oracle<'g> {
    pub fn new(g: &'g KnowledgeGraph) -> Self {
        let mut items = BTreeSet::new();
        let mut edges = HashSet::new();
        for t in g.triples() {
            if let Object::Item(o) = t.object {
                items.insert(t.subject);
                items.insert(o);
                edges.insert((t.subject, t.predicate, o));
            }
        }
        let items: Vec<ItemId> = items.into_iter().collect();
        let p279 = ItemId::p(279);
        let mut sub_plus: HashSet<(ItemId, ItemId)> =
            edges.iter().filter(|e| e.1 == p279).map(|e| (e.0, e.2)).collect();
        loop {
            let mut grew = false;
            let snapshot: Vec<(ItemId, ItemId)> = sub_plus.iter().copied().collect();
            for &(a, b) in &snapshot {
                for &(c, d) in &snapshot {
                    if b == c && sub_plus.insert((a, d)) {
                        grew = true;
                    }
                }
            }
            if !grew {
                break;
            }
        }
        let mut sub_star = sub_plus.clone();
        for &i in &items {
            sub_star.insert((i, i));
        }
        Oracle { g, items, edges, sub_star, sub_plus }
    }

    pub fn member(&self, x: ItemId, q: ItemId) -> bool {
        if x == q || self.sub_plus.contains(&(x, q)) {
            return true;
        }
        self.items
            .iter()
            .any(|&t| self.edges.contains(&(x, ItemId::p(31), t)) && (t == q || self.sub_star.contains(&(t, q))))
    }

    fn satisfies(&self, y: ItemId, vc: &ValueConstraint) -> bool {
        vc.items().iter().any(|it| match it {
            ValueItem::Item(q) => *q == y,
            ValueItem::Text(t) => self.g.labels().any(|(i, l, s)| i == y && l == "en" && s == t),
            ValueItem::Number(n) => self.g.values_of(y).any(|(_, v)| v == n.value()),
            ValueItem::Range { lo, hi } => self.g.values_of(y).any(|(_, v)| lo.value() <= v && v <= hi.value()),
            ValueItem::Compare { op, bound } => {
                let b = bound.value();
                self.g.values_of(y).any(|(_, v)| match op {
                    CompareOp::Lt => v < b,
                    CompareOp::Le => v <= b,
                    CompareOp::Gt => v > b,
                    CompareOp::Ge => v >= b,
                })
            }
        })
    }

    fn role_ok(&self, c: &Constructor, b: &Block, role: &RoleDecl, y: ItemId) -> bool {
        let mut types = vec![role.filler];
        for j in &b.joins {
            if j.left.is_q() && j.right.is_q() {
                if j.left == role.filler {
                    types.push(j.right);
                }
                if j.right == role.filler {
                    types.push(j.left);
                }
            }
        }
        if !types.iter().any(|&t| self.member(y, t)) {
            return false;
        }
        for blk in &c.blocks {
            for inst in &blk.instantiations {
                if inst.type_item == role.filler && inst.instance != y {
                    return false;
                }
            }
        }
        role.constraint.as_ref().is_none_or(|vc| self.satisfies(y, vc))
    }

    /// Tuple set of every block and the realisable flag.
    pub fn eval(&self, c: &Constructor) -> (Vec<BTreeSet<(ItemId, ItemId)>>, bool) {
        let mut out = Vec::new();
        let mut realisable = true;
        for b in &c.blocks {
            let mut props = vec![b.predicate.property];
            for j in &b.joins {
                if j.left.is_p() && j.right.is_p() {
                    if j.left == b.predicate.property {
                        props.push(j.right);
                    }
                    if j.right == b.predicate.property {
                        props.push(j.left);
                    }
                }
            }
            let mut tuples = BTreeSet::new();
            for &y1 in &self.items {
                for &y2 in &self.items {
                    if props.iter().any(|&p| self.edges.contains(&(y1, p, y2)))
                        && self.role_ok(c, b, &b.roles[0], y1)
                        && self.role_ok(c, b, &b.roles[1], y2)
                    {
                        tuples.insert((y1, y2));
                    }
                }
            }
            let has_mandatory = b.mandatories.iter().any(|m| b.roles.iter().any(|r| &r.var == m));
            if has_mandatory && tuples.is_empty() {
                realisable = false;
            }
            out.push(tuples);
        }
        (out, realisable)
    }
}

/// Per-block tuple sets keyed by block index, for readable diffs.
pub fn by_block(sets: &[BTreeSet<(ItemId, ItemId)>]) -> BTreeMap<usize, BTreeSet<(ItemId, ItemId)>> {
    sets.iter().cloned().enumerate().collect()
}
