use crate::lexicon::{shorthand_keyword, Lexicon, LexiconError};
use crate::model::*;

use super::SyntaxKind;

const INDENT: &str = "   ";

/// Renders a model in canonical layout: one declaration per paragraph,
/// one definition item per line. Shorthand output does not depend on
/// `lang`, which is only checked for longform.
pub fn serialize(model: &Model, syntax: SyntaxKind, lang: &str, lex: &Lexicon) -> Result<String, LexiconError> {
    let kw = Keywords::new(syntax, lang, lex)?;
    let mut out = String::new();
    for (i, decl) in model.declarations.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        match decl {
            Declaration::Constructor(c) => constructor(&mut out, c, &kw),
            Declaration::Link(l) => {
                let id = match l.kind {
                    LinkKind::SubConstructorOf => CsmId::SUB_CONSTRUCTOR_OF,
                    LinkKind::InstanceOf => CsmId::INSTANCE_OF,
                    LinkKind::PartOf => CsmId::PART_OF,
                };
                out.push_str(&format!("{}({}, {})", kw.get(id), l.from, l.to));
            }
        }
        out.push('\n');
    }
    Ok(out)
}

struct Keywords {
    syntax: SyntaxKind,
    words: Vec<String>,
}

impl Keywords {
    fn new(syntax: SyntaxKind, lang: &str, lex: &Lexicon) -> Result<Self, LexiconError> {
        let words = CsmId::all()
            .map(|id| match syntax {
                SyntaxKind::Longform => lex.keyword(id, lang).map(str::to_string),
                SyntaxKind::Shorthand => Ok(shorthand_keyword(id).unwrap_or_default().to_string()),
            })
            .collect::<Result<_, _>>()?;
        Ok(Keywords { syntax, words })
    }

    fn get(&self, id: CsmId) -> &str {
        &self.words[id.number() as usize - 1]
    }

    fn long(&self) -> bool {
        self.syntax == SyntaxKind::Longform
    }
}

fn constructor(out: &mut String, c: &Constructor, kw: &Keywords) {
    let head = match c.kind {
        ConstructorKind::Type => CsmId::TYPE_CONSTRUCTOR,
        ConstructorKind::Instance => CsmId::INSTANCE_CONSTRUCTOR,
    };
    let mut items = Vec::new();
    for b in &c.blocks {
        block_items(&mut items, b, kw);
    }
    out.push_str(&format!("{}:{}(\n{INDENT}", kw.get(head), c.name));
    out.push_str(&items.join(&format!(",\n{INDENT}")));
    out.push(')');
}

fn block_items(items: &mut Vec<String>, b: &Block, kw: &Keywords) {
    let p = &b.predicate;
    let pred = format!("{}({},{})", p.property, p.first, p.second);
    items.push(if kw.long() { format!("{}({pred})", kw.get(CsmId::PROPERTY)) } else { pred });

    for r in &b.roles {
        let mut s = r.var.to_string();
        if let Some(n) = r.name {
            s.push_str(&format!("[{n}]"));
        }
        s.push(':');
        if kw.long() {
            let id = match r.kind {
                RoleKind::Object => CsmId::OBJECT,
                RoleKind::ObjectType => CsmId::OBJECT_TYPE,
            };
            s.push_str(&format!("{}({})", kw.get(id), r.filler));
        } else {
            s.push_str(&r.filler.to_string());
        }
        if let Some(vc) = &r.constraint {
            s.push_str(&constraint(vc));
        }
        items.push(s);
    }

    for f in &b.functions {
        let args: Vec<String> = f.args.iter().map(ToString::to_string).collect();
        let mut s = if kw.long() {
            format!("{}({}({}))", kw.get(CsmId::FUNCTION), f.function, args.join(","))
        } else if f.args.len() == 1 {
            format!("{}.{}", f.args[0], f.function)
        } else {
            format!("{}({})", f.function, args.join(","))
        };
        if let Some(vc) = &f.constraint {
            s.push_str(&constraint(vc));
        }
        items.push(s);
    }
    for j in &b.joins {
        items.push(format!("{}({},{})", kw.get(CsmId::JOIN), j.left, j.right));
    }
    for m in &b.mandatories {
        items.push(format!("{}({m})", kw.get(CsmId::IS_MANDATORY)));
    }
    for i in &b.instantiations {
        items.push(if kw.long() {
            format!("{}({})={{{}}}", kw.get(CsmId::OBJECT_TYPE), i.type_item, i.instance)
        } else {
            format!("{}={{{}}}", i.type_item, i.instance)
        });
    }
}

fn constraint(vc: &ValueConstraint) -> String {
    let parts: Vec<String> = vc.items().iter().map(value_item).collect();
    format!("{{{}}}", parts.join(", "))
}

fn value_item(v: &ValueItem) -> String {
    match v {
        ValueItem::Text(t) if is_bare_text(t) => t.clone(),
        ValueItem::Text(t) => quote(t),
        ValueItem::Item(i) => i.to_string(),
        ValueItem::Number(n) => n.to_string(),
        ValueItem::Range { lo, hi } => format!("{lo}..{hi}"),
        ValueItem::Compare { op, bound } => format!("{}{bound}", op.symbol()),
    }
}

/// Bare text must re-lex as the same words: every word an ordinary
/// identifier, single spaces between them.
fn is_bare_text(t: &str) -> bool {
    !t.is_empty()
        && t.split(' ').all(|w| {
            matches!(classify_identifier(w), Ok(Identifier::Var(_)))
        })
}

fn quote(t: &str) -> String {
    let mut s = String::with_capacity(t.len() + 2);
    s.push('"');
    for c in t.chars() {
        match c {
            '"' => s.push_str("\\\""),
            '\\' => s.push_str("\\\\"),
            '\n' => s.push_str("\\n"),
            c => s.push(c),
        }
    }
    s.push('"');
    s
}
