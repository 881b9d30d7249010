use crate::model::{classify_identifier, CsmId, Identifier, IdentifierError, ItemId};

use super::{DiagnosticKind, ParseDiagnostic, Span};

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    /// A letter-initial word: keyword or local variable, decided by the parser.
    Ident(String),
    Item(ItemId),
    Csm(CsmId),
    Number { value: f64, text: String },
    Str(String),
    Colon,
    Comma,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Eq,
    Dot,
    DotDot,
    Lt,
    Le,
    Gt,
    Ge,
}

impl TokenKind {
    /// The token as it would be written back, for messages and comparisons.
    pub fn text(&self) -> String {
        match self {
            TokenKind::Ident(s) => s.clone(),
            TokenKind::Item(i) => i.to_string(),
            TokenKind::Csm(c) => c.to_string(),
            TokenKind::Number { text, .. } => text.clone(),
            TokenKind::Str(s) => format!("{s:?}"),
            TokenKind::Colon => ":".into(),
            TokenKind::Comma => ",".into(),
            TokenKind::LParen => "(".into(),
            TokenKind::RParen => ")".into(),
            TokenKind::LBracket => "[".into(),
            TokenKind::RBracket => "]".into(),
            TokenKind::LBrace => "{".into(),
            TokenKind::RBrace => "}".into(),
            TokenKind::Eq => "=".into(),
            TokenKind::Dot => ".".into(),
            TokenKind::DotDot => "..".into(),
            TokenKind::Lt => "<".into(),
            TokenKind::Le => "<=".into(),
            TokenKind::Gt => ">".into(),
            TokenKind::Ge => ">=".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: u32,
    column: u32,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn peek2(&self) -> Option<char> {
        let mut it = self.chars.clone();
        it.next();
        it.next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn span(&self) -> Span {
        Span { line: self.line, column: self.column }
    }
}

/// Splits constructor text into tokens. `//` comments and whitespace are
/// dropped. All lexical errors are collected before giving up.
pub fn tokenize(text: &str) -> Result<Vec<Token>, Vec<ParseDiagnostic>> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut cur = Cursor { chars: text.chars().peekable(), line: 1, column: 1 };
    let mut tokens = Vec::new();
    let mut errors = Vec::new();

    while let Some(c) = cur.peek() {
        let span = cur.span();
        let error = |message: String| ParseDiagnostic::error(DiagnosticKind::Lexical, span, message);

        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if c == '/' && cur.peek2() == Some('/') {
            while let Some(c) = cur.peek() {
                if c == '\n' {
                    break;
                }
                cur.bump();
            }
            continue;
        }

        let simple = match c {
            ':' => Some(TokenKind::Colon),
            ',' => Some(TokenKind::Comma),
            '(' => Some(TokenKind::LParen),
            ')' => Some(TokenKind::RParen),
            '[' => Some(TokenKind::LBracket),
            ']' => Some(TokenKind::RBracket),
            '{' => Some(TokenKind::LBrace),
            '}' => Some(TokenKind::RBrace),
            '=' => Some(TokenKind::Eq),
            '≤' => Some(TokenKind::Le),
            '≥' => Some(TokenKind::Ge),
            _ => None,
        };
        if let Some(kind) = simple {
            cur.bump();
            tokens.push(Token { kind, span });
            continue;
        }

        match c {
            '.' => {
                cur.bump();
                let kind = if cur.peek() == Some('.') {
                    cur.bump();
                    TokenKind::DotDot
                } else {
                    TokenKind::Dot
                };
                tokens.push(Token { kind, span });
            }
            '<' | '>' => {
                cur.bump();
                let or_equal = cur.peek() == Some('=');
                if or_equal {
                    cur.bump();
                }
                let kind = match (c, or_equal) {
                    ('<', false) => TokenKind::Lt,
                    ('<', true) => TokenKind::Le,
                    ('>', false) => TokenKind::Gt,
                    _ => TokenKind::Ge,
                };
                tokens.push(Token { kind, span });
            }
            '"' => {
                cur.bump();
                let mut s = String::new();
                let mut closed = false;
                while let Some(c) = cur.bump() {
                    match c {
                        '"' => {
                            closed = true;
                            break;
                        }
                        '\\' => match cur.bump() {
                            Some(e @ ('"' | '\\')) => s.push(e),
                            Some('n') => s.push('\n'),
                            Some(other) => {
                                s.push('\\');
                                s.push(other);
                            }
                            None => break,
                        },
                        _ => s.push(c),
                    }
                }
                if closed {
                    tokens.push(Token { kind: TokenKind::Str(s), span });
                } else {
                    errors.push(error("unterminated string".into()));
                }
            }
            c if c.is_ascii_digit() || (c == '-' && cur.peek2().is_some_and(|d| d.is_ascii_digit())) => {
                let mut text = String::new();
                if c == '-' {
                    text.push('-');
                    cur.bump();
                }
                while let Some(d) = cur.peek().filter(char::is_ascii_digit) {
                    text.push(d);
                    cur.bump();
                }
                if cur.peek() == Some('.') && cur.peek2().is_some_and(|d| d.is_ascii_digit()) {
                    text.push('.');
                    cur.bump();
                    while let Some(d) = cur.peek().filter(char::is_ascii_digit) {
                        text.push(d);
                        cur.bump();
                    }
                }
                if cur.peek().is_some_and(|c| c.is_alphabetic() || c == '_') {
                    while let Some(c) = cur.peek().filter(|c| c.is_alphanumeric() || *c == '_') {
                        text.push(c);
                        cur.bump();
                    }
                    errors.push(error(format!("malformed token `{text}`: identifiers start with a letter")));
                    continue;
                }
                let value: f64 = text.parse().expect("digits form a valid float");
                tokens.push(Token { kind: TokenKind::Number { value, text }, span });
            }
            c if c.is_alphabetic() => {
                let mut word = String::new();
                while let Some(c) = cur.peek().filter(|c| c.is_alphanumeric() || *c == '_') {
                    word.push(c);
                    cur.bump();
                }
                match classify_identifier(&word) {
                    Ok(Identifier::Item(item)) => tokens.push(Token { kind: TokenKind::Item(item), span }),
                    Ok(Identifier::Csm(id)) => tokens.push(Token { kind: TokenKind::Csm(id), span }),
                    Ok(Identifier::Var(_)) => tokens.push(Token { kind: TokenKind::Ident(word), span }),
                    Err(IdentifierError::CsmOutOfRange(t)) => {
                        errors.push(error(format!("`{t}` is outside CSM001..CSM014")))
                    }
                    Err(e) => errors.push(error(e.to_string())),
                }
            }
            other => {
                cur.bump();
                errors.push(error(format!("unexpected character `{other}`")));
            }
        }
    }

    if errors.is_empty() {
        Ok(tokens)
    } else {
        Err(errors)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(text: &str) -> Vec<TokenKind> {
        tokenize(text).unwrap().into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn comments_and_whitespace_are_dropped() {
        let k = kinds("IC:C5( // about Writer Douglas Adams\n  P106(r1,r2))");
        assert_eq!(k[0], TokenKind::Ident("IC".into()));
        assert_eq!(k[3], TokenKind::LParen);
        assert_eq!(k[4], TokenKind::Item(ItemId::p(106)));
        assert_eq!(k.len(), 11);
    }

    #[test]
    fn spans_are_one_based() {
        let toks = tokenize("TC\n  :C1").unwrap();
        assert_eq!(toks[0].span, Span { line: 1, column: 1 });
        assert_eq!(toks[1].span, Span { line: 2, column: 3 });
        assert_eq!(toks[2].span, Span { line: 2, column: 4 });
    }

    #[test]
    fn dot_notation_and_ranges() {
        assert_eq!(
            kinds("Q29514218.Z12345"),
            vec![
                TokenKind::Item(ItemId::q(29514218)),
                TokenKind::Dot,
                TokenKind::Item(ItemId::z(12345))
            ]
        );
        let k = kinds("{1..2.5, >=-3, ≤4}");
        assert!(matches!(k[1], TokenKind::Number { value, .. } if value == 1.0));
        assert_eq!(k[2], TokenKind::DotDot);
        assert!(matches!(k[3], TokenKind::Number { value, .. } if value == 2.5));
        assert_eq!(k[5], TokenKind::Ge);
        assert!(matches!(k[6], TokenKind::Number { value, .. } if value == -3.0));
        assert_eq!(k[8], TokenKind::Le);
    }

    #[test]
    fn strings_unescape() {
        assert_eq!(kinds(r#""a \"b\" \\ c""#), vec![TokenKind::Str(r#"a "b" \ c"#.into())]);
    }

    #[test]
    fn lexical_errors_are_collected() {
        let errs = tokenize("CSM015 12abc #").unwrap_err();
        assert_eq!(errs.len(), 3);
        assert!(errs[0].message.contains("CSM015"));
        assert_eq!(errs[2].span, Span { line: 1, column: 14 });
    }

    #[test]
    fn accented_keywords_are_single_tokens() {
        assert_eq!(kinds("Función"), vec![TokenKind::Ident("Función".into())]);
    }
}
