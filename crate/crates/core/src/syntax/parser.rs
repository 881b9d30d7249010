//! Recursive-descent parser shared by both notations.
//!
//! The two notations differ only in how a block item is spelled, so one
//! parser handles both and switches on [`SyntaxKind`] where they diverge.
//! Keywords are resolved positionally: an identifier is a keyword only
//! where the grammar expects one, which lets a role variable share its
//! spelling with a reserved word of some language.

use crate::lexicon::{shorthand_lookup, Lexicon};
use crate::model::*;

use super::lexer::{Token, TokenKind};
use super::{DiagnosticKind, ParseDiagnostic, Span, SyntaxKind};

struct Fail;

type PResult<T> = Result<T, Fail>;

pub(crate) struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    syntax: SyntaxKind,
    lang: &'a str,
    lex: &'a Lexicon,
    pub(crate) diagnostics: Vec<ParseDiagnostic>,
    end: Span,
}

enum Item {
    Predicate(PredicateDecl),
    Role(RoleDecl, Span),
    Function(FunctionDecl),
    Join(JoinDecl),
    Mandatory(LocalVar),
    Instantiation(Instantiation),
}

#[derive(Default)]
struct PendingBlock {
    predicate: Option<(PredicateDecl, Span)>,
    roles: Vec<(RoleDecl, Span)>,
    functions: Vec<FunctionDecl>,
    joins: Vec<JoinDecl>,
    mandatories: Vec<LocalVar>,
    instantiations: Vec<Instantiation>,
}

impl<'a> Parser<'a> {
    pub(crate) fn new(tokens: &'a [Token], syntax: SyntaxKind, lang: &'a str, lex: &'a Lexicon, end: Span) -> Self {
        Parser { tokens, pos: 0, syntax, lang, lex, diagnostics: Vec::new(), end }
    }

    pub(crate) fn parse_model(&mut self) -> Model {
        let mut declarations = Vec::new();
        while self.pos < self.tokens.len() {
            match self.declaration() {
                Ok(d) => declarations.push(d),
                Err(Fail) => self.recover(),
            }
        }
        Model { declarations }
    }

    // ---- token helpers -------------------------------------------------

    fn peek(&self) -> Option<&'a TokenKind> {
        self.tokens.get(self.pos).map(|t| &t.kind)
    }

    fn peek_at(&self, offset: usize) -> Option<&'a TokenKind> {
        self.tokens.get(self.pos + offset).map(|t| &t.kind)
    }

    fn span(&self) -> Span {
        self.tokens.get(self.pos).map_or(self.end, |t| t.span)
    }

    fn found(&self) -> String {
        match self.peek() {
            Some(k) => format!("`{}`", k.text()),
            None => "end of input".to_string(),
        }
    }

    fn fail<T>(&mut self, expected: &[&str]) -> PResult<T> {
        let message = format!("expected {}, found {}", expected.join(" or "), self.found());
        let mut d = ParseDiagnostic::error(DiagnosticKind::Syntax, self.span(), message);
        d.expected = expected.iter().map(|s| s.to_string()).collect();
        self.diagnostics.push(d);
        Err(Fail)
    }

    fn grammar_error(&mut self, span: Span, message: String) {
        self.diagnostics
            .push(ParseDiagnostic::error(DiagnosticKind::Grammar, span, message));
    }

    fn expect(&mut self, kind: TokenKind) -> PResult<()> {
        if self.peek() == Some(&kind) {
            self.pos += 1;
            Ok(())
        } else {
            let want = format!("`{}`", kind.text());
            self.fail(&[&want])
        }
    }

    fn eat(&mut self, kind: TokenKind) -> bool {
        if self.peek() == Some(&kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    /// The feature a token stands for in the active notation and language.
    fn keyword_at(&self, offset: usize) -> Option<CsmId> {
        let kind = self.peek_at(offset)?;
        match self.syntax {
            SyntaxKind::Shorthand => match kind {
                TokenKind::Ident(s) => shorthand_lookup(s),
                _ => None,
            },
            SyntaxKind::Longform => match kind {
                TokenKind::Ident(_) | TokenKind::Csm(_) => self.lex.lookup(&kind.text(), self.lang).ok(),
                _ => None,
            },
        }
    }

    fn keyword_name(&self, id: CsmId) -> String {
        let kw = match self.syntax {
            SyntaxKind::Shorthand => crate::lexicon::shorthand_keyword(id).map(str::to_string),
            SyntaxKind::Longform => self.lex.keyword(id, self.lang).ok().map(str::to_string),
        };
        format!("`{}`", kw.unwrap_or_else(|| id.to_string()))
    }

    fn expect_keyword(&mut self, ids: &[CsmId]) -> PResult<CsmId> {
        match self.keyword_at(0) {
            Some(id) if ids.contains(&id) => {
                self.pos += 1;
                Ok(id)
            }
            _ => {
                let names: Vec<String> = ids.iter().map(|id| self.keyword_name(*id)).collect();
                let refs: Vec<&str> = names.iter().map(String::as_str).collect();
                self.fail(&refs)
            }
        }
    }

    fn variable(&mut self) -> PResult<LocalVar> {
        match self.peek() {
            Some(TokenKind::Ident(s)) => {
                let v = LocalVar::new(s.as_str()).map_err(|_| Fail)?;
                self.pos += 1;
                Ok(v)
            }
            _ => self.fail(&["variable"]),
        }
    }

    fn item_of(&mut self, kind: ItemKind, what: &str) -> PResult<ItemId> {
        match self.peek() {
            Some(TokenKind::Item(i)) if i.kind() == kind => {
                let i = *i;
                self.pos += 1;
                Ok(i)
            }
            Some(TokenKind::Number { text, .. }) if kind == ItemKind::QItem => {
                let message = format!(
                    "expected QItem, found number `{text}`; did you mean `Q{}`?",
                    text.trim_start_matches('-')
                );
                let mut d = ParseDiagnostic::error(DiagnosticKind::Syntax, self.span(), message);
                d.expected = vec![what.to_string()];
                self.diagnostics.push(d);
                Err(Fail)
            }
            _ => self.fail(&[what]),
        }
    }

    fn any_item(&mut self) -> PResult<ItemId> {
        match self.peek() {
            Some(TokenKind::Item(i)) => {
                let i = *i;
                self.pos += 1;
                Ok(i)
            }
            _ => self.fail(&["QItem", "PItem"]),
        }
    }

    /// Skips to the next token that can start a declaration.
    fn recover(&mut self) {
        if self.pos < self.tokens.len() {
            self.pos += 1;
        }
        while self.pos < self.tokens.len() && !self.at_declaration_start() {
            self.pos += 1;
        }
    }

    fn at_declaration_start(&self) -> bool {
        match self.keyword_at(0) {
            Some(CsmId::TYPE_CONSTRUCTOR | CsmId::INSTANCE_CONSTRUCTOR) => {
                self.peek_at(1) == Some(&TokenKind::Colon)
            }
            Some(CsmId::SUB_CONSTRUCTOR_OF | CsmId::INSTANCE_OF | CsmId::PART_OF) => {
                self.peek_at(1) == Some(&TokenKind::LParen)
            }
            _ => false,
        }
    }

    // ---- declarations --------------------------------------------------

    fn declaration(&mut self) -> PResult<Declaration> {
        let kw = self.expect_keyword(&[
            CsmId::TYPE_CONSTRUCTOR,
            CsmId::INSTANCE_CONSTRUCTOR,
            CsmId::SUB_CONSTRUCTOR_OF,
            CsmId::INSTANCE_OF,
            CsmId::PART_OF,
        ])?;
        match kw {
            CsmId::TYPE_CONSTRUCTOR => self.constructor(ConstructorKind::Type).map(Declaration::Constructor),
            CsmId::INSTANCE_CONSTRUCTOR => {
                self.constructor(ConstructorKind::Instance).map(Declaration::Constructor)
            }
            CsmId::SUB_CONSTRUCTOR_OF => self.link(LinkKind::SubConstructorOf),
            CsmId::INSTANCE_OF => self.link(LinkKind::InstanceOf),
            _ => self.link(LinkKind::PartOf),
        }
    }

    fn link(&mut self, kind: LinkKind) -> PResult<Declaration> {
        self.expect(TokenKind::LParen)?;
        let from = self.variable()?;
        self.expect(TokenKind::Comma)?;
        let to = self.variable()?;
        self.expect(TokenKind::RParen)?;
        Ok(Declaration::Link(Link { kind, from, to }))
    }

    fn constructor(&mut self, kind: ConstructorKind) -> PResult<Constructor> {
        let start = self.tokens[self.pos - 1].span;
        self.expect(TokenKind::Colon)?;
        let name = self.variable()?;
        self.expect(TokenKind::LParen)?;

        let mut blocks: Vec<Block> = Vec::new();
        let mut pending: Option<PendingBlock> = None;
        let mut roles_expected = 0usize;
        loop {
            let item_span = self.span();
            let item = self.block_item()?;
            match item {
                Item::Predicate(p) => {
                    if roles_expected > 0 {
                        return self.fail_at(item_span, &["role declaration"]);
                    }
                    if let Some(done) = pending.take() {
                        blocks.push(self.finish_block(done)?);
                    }
                    pending = Some(PendingBlock { predicate: Some((p, item_span)), ..Default::default() });
                    roles_expected = 2;
                }
                Item::Role(r, span) => {
                    let Some(block) = pending.as_mut().filter(|_| roles_expected > 0) else {
                        self.grammar_error(span, "role declarations must directly follow their predicate".into());
                        return Err(Fail);
                    };
                    block.roles.push((r, span));
                    roles_expected -= 1;
                }
                other => {
                    let Some(block) = pending.as_mut() else {
                        return self.fail_at(item_span, &["predicate"]);
                    };
                    if roles_expected > 0 {
                        return self.fail_at(item_span, &["role declaration"]);
                    }
                    match other {
                        Item::Function(f) => block.functions.push(f),
                        Item::Join(j) => block.joins.push(j),
                        Item::Mandatory(v) => block.mandatories.push(v),
                        Item::Instantiation(i) => block.instantiations.push(i),
                        Item::Predicate(_) | Item::Role(..) => unreachable!(),
                    }
                }
            }

            if self.eat(TokenKind::Comma) {
                if self.peek() == Some(&TokenKind::RParen) {
                    let span = self.tokens[self.pos - 1].span;
                    self.diagnostics.push(ParseDiagnostic::warning(
                        DiagnosticKind::Syntax,
                        span,
                        "trailing comma before `)`".into(),
                    ));
                    self.pos += 1;
                    break;
                }
                continue;
            }
            if roles_expected > 0 {
                return self.fail(&["`,`"]);
            }
            self.expect(TokenKind::RParen)?;
            break;
        }
        if roles_expected > 0 {
            return self.fail(&["role declaration"]);
        }
        if let Some(done) = pending.take() {
            blocks.push(self.finish_block(done)?);
        }

        let constructor = Constructor { kind, name, blocks };
        if kind == ConstructorKind::Instance && constructor.instantiations().next().is_none() {
            self.grammar_error(
                start,
                format!("instance constructor `{}` needs at least one instantiation", constructor.name),
            );
            return Err(Fail);
        }
        Ok(constructor)
    }

    fn fail_at<T>(&mut self, span: Span, expected: &[&str]) -> PResult<T> {
        let saved = self.pos;
        let r = self.fail(expected);
        if let Some(d) = self.diagnostics.last_mut() {
            d.span = span;
        }
        self.pos = saved;
        r
    }

    fn finish_block(&mut self, pending: PendingBlock) -> PResult<Block> {
        let (predicate, pred_span) = pending.predicate.expect("block starts with its predicate");
        let mut roles = pending.roles;
        debug_assert_eq!(roles.len(), 2);
        if predicate.first == predicate.second {
            self.grammar_error(
                pred_span,
                format!("predicate {} uses `{}` for both positions", predicate.property, predicate.first),
            );
            return Err(Fail);
        }
        // roles may be listed in either order; store them positionally
        if roles[0].0.var == predicate.second && roles[1].0.var == predicate.first {
            roles.swap(0, 1);
        }
        for (i, (role, span)) in roles.iter().enumerate() {
            let want = if i == 0 { &predicate.first } else { &predicate.second };
            if &role.var != want {
                self.grammar_error(
                    *span,
                    format!(
                        "role `{}` does not match the variables of {}({}, {})",
                        role.var, predicate.property, predicate.first, predicate.second
                    ),
                );
                return Err(Fail);
            }
        }
        let mut it = roles.into_iter().map(|(r, _)| r);
        let roles = [it.next().expect("two roles"), it.next().expect("two roles")];
        Ok(Block {
            predicate,
            roles,
            functions: pending.functions,
            joins: pending.joins,
            mandatories: pending.mandatories,
            instantiations: pending.instantiations,
        })
    }

    // ---- block items ---------------------------------------------------

    fn at_role(&self) -> bool {
        matches!(self.peek(), Some(TokenKind::Ident(_)))
            && matches!(self.peek_at(1), Some(TokenKind::Colon | TokenKind::LBracket))
    }

    fn block_item(&mut self) -> PResult<Item> {
        if self.at_role() {
            let span = self.span();
            return self.role().map(|r| Item::Role(r, span));
        }
        match self.syntax {
            SyntaxKind::Longform => self.longform_item(),
            SyntaxKind::Shorthand => self.shorthand_item(),
        }
    }

    fn longform_item(&mut self) -> PResult<Item> {
        let kw = self.expect_keyword(&[
            CsmId::PROPERTY,
            CsmId::FUNCTION,
            CsmId::JOIN,
            CsmId::IS_MANDATORY,
            CsmId::OBJECT_TYPE,
            CsmId::OBJECT,
        ])?;
        match kw {
            CsmId::PROPERTY => {
                self.expect(TokenKind::LParen)?;
                let p = self.predicate_body()?;
                self.expect(TokenKind::RParen)?;
                Ok(Item::Predicate(p))
            }
            CsmId::FUNCTION => {
                self.expect(TokenKind::LParen)?;
                let function = self.item_of(ItemKind::ZItem, "ZItem")?;
                let args = self.arguments()?;
                self.expect(TokenKind::RParen)?;
                let constraint = self.opt_constraint()?;
                Ok(Item::Function(FunctionDecl { function, args, constraint }))
            }
            CsmId::JOIN => self.join_body().map(Item::Join),
            CsmId::IS_MANDATORY => self.mandatory_body().map(Item::Mandatory),
            _ => {
                self.expect(TokenKind::LParen)?;
                let type_item = self.item_of(ItemKind::QItem, "QItem")?;
                self.expect(TokenKind::RParen)?;
                self.instantiation_rhs(type_item).map(Item::Instantiation)
            }
        }
    }

    fn shorthand_item(&mut self) -> PResult<Item> {
        match (self.peek(), self.peek_at(1)) {
            (Some(TokenKind::Item(p)), Some(TokenKind::LParen)) if p.is_p() => {
                self.pos += 1;
                self.predicate_args(*p).map(Item::Predicate)
            }
            (Some(TokenKind::Item(z)), Some(TokenKind::LParen)) if z.is_z() => {
                let function = *z;
                self.pos += 1;
                let args = self.arguments()?;
                let constraint = self.opt_constraint()?;
                Ok(Item::Function(FunctionDecl { function, args, constraint }))
            }
            (Some(TokenKind::Item(q)), Some(TokenKind::Dot)) if q.is_q() => {
                let arg = *q;
                self.pos += 2;
                let function = self.item_of(ItemKind::ZItem, "ZItem")?;
                let constraint = self.opt_constraint()?;
                Ok(Item::Function(FunctionDecl { function, args: vec![arg], constraint }))
            }
            (Some(TokenKind::Item(q)), Some(TokenKind::Eq)) if q.is_q() => {
                let type_item = *q;
                self.pos += 1;
                self.instantiation_rhs(type_item).map(Item::Instantiation)
            }
            _ => match self.keyword_at(0) {
                Some(CsmId::JOIN) => {
                    self.pos += 1;
                    self.join_body().map(Item::Join)
                }
                Some(CsmId::IS_MANDATORY) => {
                    self.pos += 1;
                    self.mandatory_body().map(Item::Mandatory)
                }
                _ => self.fail(&[
                    "PItem(…)",
                    "role",
                    "ZItem(…)",
                    "QItem.ZItem",
                    "QItem={…}",
                    "`Join`",
                    "`IsMand`",
                ]),
            },
        }
    }

    /// `P40(r1,r2)` after the keyword and its opening parenthesis.
    fn predicate_body(&mut self) -> PResult<PredicateDecl> {
        let property = self.item_of(ItemKind::PItem, "PItem")?;
        self.predicate_args(property)
    }

    fn predicate_args(&mut self, property: ItemId) -> PResult<PredicateDecl> {
        self.expect(TokenKind::LParen)?;
        let first = self.variable()?;
        self.expect(TokenKind::Comma)?;
        let second = self.variable()?;
        self.expect(TokenKind::RParen)?;
        Ok(PredicateDecl { property, first, second })
    }

    fn arguments(&mut self) -> PResult<Vec<ItemId>> {
        self.expect(TokenKind::LParen)?;
        let mut args = vec![self.item_of(ItemKind::QItem, "QItem")?];
        while self.eat(TokenKind::Comma) {
            args.push(self.item_of(ItemKind::QItem, "QItem")?);
        }
        self.expect(TokenKind::RParen)?;
        Ok(args)
    }

    fn join_body(&mut self) -> PResult<JoinDecl> {
        let span = self.span();
        self.expect(TokenKind::LParen)?;
        let left = self.any_item()?;
        self.expect(TokenKind::Comma)?;
        let right = self.any_item()?;
        self.expect(TokenKind::RParen)?;
        let join = JoinDecl { left, right };
        if join.kind().is_none() {
            self.grammar_error(
                span,
                format!("join needs two QItems or two PItems, found {left} and {right}"),
            );
            return Err(Fail);
        }
        Ok(join)
    }

    fn mandatory_body(&mut self) -> PResult<LocalVar> {
        self.expect(TokenKind::LParen)?;
        let v = self.variable()?;
        self.expect(TokenKind::RParen)?;
        Ok(v)
    }

    /// `={Q2}` or `=Q2`.
    fn instantiation_rhs(&mut self, type_item: ItemId) -> PResult<Instantiation> {
        self.expect(TokenKind::Eq)?;
        let instance = if self.eat(TokenKind::LBrace) {
            let i = self.item_of(ItemKind::QItem, "QItem")?;
            self.expect(TokenKind::RBrace)?;
            i
        } else {
            self.item_of(ItemKind::QItem, "QItem")?
        };
        Ok(Instantiation { type_item, instance })
    }

    fn role(&mut self) -> PResult<RoleDecl> {
        let var = self.variable()?;
        let name = if self.eat(TokenKind::LBracket) {
            let n = self.item_of(ItemKind::QItem, "QItem")?;
            self.expect(TokenKind::RBracket)?;
            Some(n)
        } else {
            None
        };
        self.expect(TokenKind::Colon)?;
        let (kind, filler) = match self.syntax {
            SyntaxKind::Longform if matches!(self.peek(), Some(TokenKind::Item(_))) => {
                // the identifier-only rendering sometimes drops the wrapper
                let span = self.span();
                let filler = self.item_of(ItemKind::QItem, "QItem")?;
                self.diagnostics.push(ParseDiagnostic::warning(
                    DiagnosticKind::Syntax,
                    span,
                    format!("bare role filler `{filler}` read as an object type"),
                ));
                (RoleKind::ObjectType, filler)
            }
            SyntaxKind::Longform => {
                let kw = self.expect_keyword(&[CsmId::OBJECT_TYPE, CsmId::OBJECT])?;
                self.expect(TokenKind::LParen)?;
                let filler = self.item_of(ItemKind::QItem, "QItem")?;
                self.expect(TokenKind::RParen)?;
                let kind = if kw == CsmId::OBJECT { RoleKind::Object } else { RoleKind::ObjectType };
                (kind, filler)
            }
            SyntaxKind::Shorthand => {
                let filler = if self.eat(TokenKind::LParen) {
                    let f = self.item_of(ItemKind::QItem, "QItem")?;
                    self.expect(TokenKind::RParen)?;
                    f
                } else {
                    self.item_of(ItemKind::QItem, "QItem")?
                };
                (RoleKind::ObjectType, filler)
            }
        };
        let constraint = self.opt_constraint()?;
        Ok(RoleDecl { var, name, kind, filler, constraint })
    }

    // ---- value constraints ---------------------------------------------

    fn opt_constraint(&mut self) -> PResult<Option<ValueConstraint>> {
        if !self.eat(TokenKind::LBrace) {
            return Ok(None);
        }
        let open = self.tokens[self.pos - 1].span;
        let mut items = Vec::new();
        loop {
            items.push(self.constraint_item()?);
            if self.eat(TokenKind::Comma) {
                continue;
            }
            self.expect(TokenKind::RBrace)?;
            break;
        }
        match ValueConstraint::new(items) {
            Ok(vc) => Ok(Some(vc)),
            Err(e) => {
                self.grammar_error(open, e.to_string());
                Err(Fail)
            }
        }
    }

    fn number(&mut self) -> PResult<Number> {
        match self.peek() {
            Some(TokenKind::Number { value, .. }) => {
                let n = Number::new(*value).ok_or(Fail)?;
                self.pos += 1;
                Ok(n)
            }
            _ => self.fail(&["number"]),
        }
    }

    fn constraint_item(&mut self) -> PResult<ValueItem> {
        let op = match self.peek() {
            Some(TokenKind::Lt) => Some(CompareOp::Lt),
            Some(TokenKind::Le) => Some(CompareOp::Le),
            Some(TokenKind::Gt) => Some(CompareOp::Gt),
            Some(TokenKind::Ge) => Some(CompareOp::Ge),
            _ => None,
        };
        if let Some(op) = op {
            self.pos += 1;
            let bound = self.number()?;
            return Ok(ValueItem::Compare { op, bound });
        }
        match (self.peek(), self.peek_at(1)) {
            (Some(TokenKind::Str(s)), _) => {
                let s = s.clone();
                self.pos += 1;
                return Ok(ValueItem::Text(s));
            }
            (Some(TokenKind::Number { .. }), Some(TokenKind::DotDot)) => {
                let lo = self.number()?;
                self.pos += 1;
                let hi = self.number()?;
                return Ok(ValueItem::Range { lo, hi });
            }
            _ => {}
        }

        // a run of words, numbers and items up to `,` or `}`
        let mut words: Vec<&TokenKind> = Vec::new();
        while let Some(k) = self.peek() {
            match k {
                TokenKind::Ident(_) | TokenKind::Item(_) | TokenKind::Csm(_) | TokenKind::Number { .. } => {
                    words.push(k);
                    self.pos += 1;
                }
                _ => break,
            }
        }
        match words.as_slice() {
            [] => self.fail(&["constraint value"]),
            [TokenKind::Item(i)] => Ok(ValueItem::Item(*i)),
            [TokenKind::Number { value, .. }] => Ok(ValueItem::Number(Number::new(*value).ok_or(Fail)?)),
            _ => Ok(ValueItem::Text(words.iter().map(|w| w.text()).collect::<Vec<_>>().join(" "))),
        }
    }
}
