//! Graphviz export of a model.
//!
//! Constructors are boxes, shaded by kind. Each definition gets a diamond
//! for its predicate with one labelled edge per role to the filler node.
//! Links between constructors use one edge style per link kind.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use cosmo::*;

fn esc(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

struct Out {
    text: String,
    nodes: BTreeSet<String>,
}

impl Out {
    fn node(&mut self, id: &str, attrs: &str) {
        if self.nodes.insert(id.to_string()) {
            let _ = writeln!(self.text, "  \"{}\" [{attrs}];", esc(id));
        }
    }

    fn edge(&mut self, from: &str, to: &str, attrs: &str) {
        let _ = writeln!(self.text, "  \"{}\" -> \"{}\" [{attrs}];", esc(from), esc(to));
    }
}

fn item_node(out: &mut Out, i: ItemId) -> String {
    let id = i.to_string();
    let shape = match i.kind() {
        ItemKind::QItem => "ellipse",
        ItemKind::PItem => "diamond",
        ItemKind::ZItem => "hexagon",
    };
    out.node(&id, &format!("label=\"{i}\", shape={shape}"));
    id
}

fn constraint_label(vc: &ValueConstraint) -> String {
    let items: Vec<String> = vc
        .items()
        .iter()
        .map(|v| match v {
            ValueItem::Item(i) => i.to_string(),
            ValueItem::Text(t) => format!("'{t}'"),
            ValueItem::Number(n) => n.to_string(),
            ValueItem::Range { lo, hi } => format!("{lo}..{hi}"),
            ValueItem::Compare { op, bound } => format!("{}{bound}", op.symbol()),
        })
        .collect();
    format!("{{{}}}", items.join(", "))
}

pub fn export_dot(model: &Model) -> String {
    let mut out = Out { text: String::new(), nodes: BTreeSet::new() };
    for c in model.constructors() {
        let (fill, label) = match c.kind {
            ConstructorKind::Type => ("white", "TC"),
            ConstructorKind::Instance => ("lightgrey", "IC"),
        };
        let cid = format!("c:{}", c.name);
        out.node(&cid, &format!("label=\"{label}:{}\", shape=box, style=filled, fillcolor={fill}", esc(c.name.as_str())));
        for (bi, b) in c.blocks.iter().enumerate() {
            let pid = format!("{cid}/{bi}");
            out.node(&pid, &format!("label=\"{}\", shape=diamond", b.predicate.property));
            out.edge(&cid, &pid, "arrowhead=none");
            for (ri, r) in b.roles.iter().enumerate() {
                let fid = item_node(&mut out, r.filler);
                let mut label = format!("{}", r.var);
                if let Some(n) = r.name {
                    let _ = write!(label, "[{n}]");
                }
                if let Some(vc) = &r.constraint {
                    let _ = write!(label, " {}", constraint_label(vc));
                }
                if b.mandatories.contains(&r.var) {
                    label.push_str(" \u{25cf}");
                }
                out.edge(&pid, &fid, &format!("label=\"{}\", taillabel=\"{}\"", esc(&label), ri + 1));
            }
            for f in &b.functions {
                let zid = format!("{pid}/{}", f.function);
                let mut label = f.function.to_string();
                if let Some(vc) = &f.constraint {
                    let _ = write!(label, " {}", constraint_label(vc));
                }
                out.node(&zid, &format!("label=\"{}\", shape=hexagon", esc(&label)));
                out.edge(&pid, &zid, "style=dotted, arrowhead=none");
                for a in &f.args {
                    let aid = item_node(&mut out, *a);
                    out.edge(&zid, &aid, "style=dotted");
                }
            }
            for (ji, j) in b.joins.iter().enumerate() {
                let jid = format!("{pid}/join{ji}");
                out.node(&jid, "label=\"Join\", shape=circle");
                out.edge(&pid, &jid, "style=dashed, arrowhead=none");
                for side in [j.left, j.right] {
                    let sid = item_node(&mut out, side);
                    out.edge(&jid, &sid, "style=dashed");
                }
            }
            for inst in &b.instantiations {
                let tid = item_node(&mut out, inst.type_item);
                let iid = format!("{}", inst.instance);
                out.node(&iid, &format!("label=\"{}\", shape=ellipse, style=filled, fillcolor=lightgrey", inst.instance));
                out.edge(&iid, &tid, "label=\"=\", style=dashed");
            }
        }
    }
    for l in model.links() {
        let style = match l.kind {
            LinkKind::SubConstructorOf => "arrowhead=empty",
            LinkKind::InstanceOf => "arrowhead=empty, style=dashed",
            LinkKind::PartOf => "arrowhead=odiamond, style=bold",
        };
        let (from, to) = (format!("c:{}", l.from), format!("c:{}", l.to));
        out.edge(&from, &to, &format!("label=\"{}\", {style}", l.kind.english()));
    }
    format!("digraph cosmo {{\n{}}}\n", out.text)
}
