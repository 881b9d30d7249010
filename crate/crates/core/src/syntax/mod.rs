//! Reading and writing constructor text in both notations.

mod lexer;
mod parser;
mod printer;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::lexicon::{shorthand_lookup, Lexicon, LexiconError};
use crate::model::Model;

pub use lexer::{tokenize, Token, TokenKind};
pub use printer::serialize;

/// 1-based position of a token in the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Span {
    pub line: u32,
    pub column: u32,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DiagnosticKind {
    Lexical,
    Syntax,
    /// Well-formed tokens in a shape the grammar forbids, e.g. an instance
    /// constructor without an instantiation.
    Grammar,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParseDiagnostic {
    pub severity: Severity,
    pub kind: DiagnosticKind,
    pub span: Span,
    pub message: String,
    /// Token classes that would have been accepted, when known.
    pub expected: Vec<String>,
}

impl ParseDiagnostic {
    pub fn error(kind: DiagnosticKind, span: Span, message: String) -> Self {
        ParseDiagnostic { severity: Severity::Error, kind, span, message, expected: Vec::new() }
    }

    pub fn warning(kind: DiagnosticKind, span: Span, message: String) -> Self {
        ParseDiagnostic { severity: Severity::Warning, kind, span, message, expected: Vec::new() }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}: {sev}: {}", self.span, self.message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum SyntaxKind {
    Longform,
    Shorthand,
}

/// A successful parse.
#[derive(Debug, Clone, PartialEq)]
pub struct Parsed {
    pub model: Model,
    pub syntax: SyntaxKind,
    /// The keyword language; `None` for shorthand and for empty input.
    pub lang: Option<String>,
    pub warnings: Vec<ParseDiagnostic>,
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("{}", render_diagnostics(.0))]
    Invalid(Vec<ParseDiagnostic>),
    #[error("keywords fit several languages with different readings: {}", .candidates.join(", "))]
    AmbiguousLanguage { candidates: Vec<String> },
    #[error("no declaration keyword found")]
    Undetectable,
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
}

impl ParseError {
    pub fn diagnostics(&self) -> &[ParseDiagnostic] {
        match self {
            ParseError::Invalid(d) => d,
            _ => &[],
        }
    }
}

fn render_diagnostics(diags: &[ParseDiagnostic]) -> String {
    diags.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n")
}

/// Parses constructor text. `None` for `syntax` or `lang` asks for
/// detection from the keywords in the text.
pub fn parse(
    text: &str,
    syntax: Option<SyntaxKind>,
    lang: Option<&str>,
    lex: &Lexicon,
) -> Result<Parsed, ParseError> {
    let tokens = tokenize(text).map_err(ParseError::Invalid)?;
    if let Some(l) = lang {
        if !lex.has_language(l) {
            return Err(LexiconError::UnknownLanguage(l.to_string()).into());
        }
    }
    if tokens.is_empty() {
        return Ok(Parsed {
            model: Model::default(),
            syntax: syntax.unwrap_or(SyntaxKind::Longform),
            lang: lang.map(str::to_string),
            warnings: Vec::new(),
        });
    }
    let end = end_span(text);

    let (syntax, candidates) = match (syntax, lang) {
        (Some(SyntaxKind::Shorthand), _) => (SyntaxKind::Shorthand, Vec::new()),
        (Some(SyntaxKind::Longform), Some(l)) => (SyntaxKind::Longform, vec![l.to_string()]),
        (s, l) => match detect_tokens(&tokens, lex) {
            Some(Detected::Shorthand) if s != Some(SyntaxKind::Longform) => (SyntaxKind::Shorthand, Vec::new()),
            Some(Detected::Longform(langs)) if s != Some(SyntaxKind::Shorthand) => {
                (SyntaxKind::Longform, l.map_or(langs, |l| vec![l.to_string()]))
            }
            _ => match s {
                Some(SyntaxKind::Longform) => (SyntaxKind::Longform, lex.languages().to_vec()),
                Some(SyntaxKind::Shorthand) => (SyntaxKind::Shorthand, Vec::new()),
                None => return Err(ParseError::Undetectable),
            },
        },
    };

    if syntax == SyntaxKind::Shorthand {
        let mut p = parser::Parser::new(&tokens, syntax, "", lex, end);
        let model = p.parse_model();
        return finish(p.diagnostics, model, syntax, None);
    }

    let mut first_failure = None;
    let mut successes: Vec<Parsed> = Vec::new();
    for l in &candidates {
        let mut p = parser::Parser::new(&tokens, syntax, l, lex, end);
        let model = p.parse_model();
        match finish(p.diagnostics, model, syntax, Some(l.clone())) {
            Ok(parsed) => successes.push(parsed),
            Err(e) => {
                first_failure.get_or_insert(e);
            }
        }
    }
    match successes.len() {
        0 => Err(first_failure.unwrap_or(ParseError::Undetectable)),
        1 => Ok(successes.remove(0)),
        _ if successes.iter().all(|s| s.model == successes[0].model) => Ok(successes.remove(0)),
        _ => Err(ParseError::AmbiguousLanguage {
            candidates: successes.into_iter().filter_map(|s| s.lang).collect(),
        }),
    }
}

fn finish(
    diagnostics: Vec<ParseDiagnostic>,
    model: Model,
    syntax: SyntaxKind,
    lang: Option<String>,
) -> Result<Parsed, ParseError> {
    if diagnostics.iter().any(ParseDiagnostic::is_error) {
        return Err(ParseError::Invalid(diagnostics));
    }
    Ok(Parsed { model, syntax, lang, warnings: diagnostics })
}

fn end_span(text: &str) -> Span {
    let line = text.split('\n').count() as u32;
    let last = text.rsplit('\n').next().unwrap_or("");
    Span { line, column: last.chars().count() as u32 + 1 }
}

enum Detected {
    Shorthand,
    /// Candidate languages, best first.
    Longform(Vec<String>),
}

fn detect_tokens(tokens: &[Token], lex: &Lexicon) -> Option<Detected> {
    for tok in tokens {
        let word = match &tok.kind {
            TokenKind::Ident(_) | TokenKind::Csm(_) => tok.kind.text(),
            _ => continue,
        };
        let langs = lex.languages_with_keyword(&word);
        let short = shorthand_lookup(&word).is_some();
        match (short, langs.is_empty()) {
            (true, true) => return Some(Detected::Shorthand),
            (false, false) => {
                let mut ranked: Vec<(usize, usize, String)> = langs
                    .iter()
                    .map(|l| {
                        let order = lex.languages().iter().position(|x| x == l).unwrap_or(usize::MAX);
                        (usize::MAX - keyword_hits(tokens, lex, l), order, l.to_string())
                    })
                    .collect();
                ranked.sort();
                return Some(Detected::Longform(ranked.into_iter().map(|r| r.2).collect()));
            }
            // a word such as `Join` is a keyword in both notations
            _ => continue,
        }
    }
    None
}

fn keyword_hits(tokens: &[Token], lex: &Lexicon, lang: &str) -> usize {
    tokens
        .iter()
        .filter(|t| matches!(t.kind, TokenKind::Ident(_) | TokenKind::Csm(_)))
        .filter(|t| lex.lookup(&t.kind.text(), lang).is_ok())
        .count()
}

/// Guesses the notation and, for longform, the keyword language.
pub fn detect_syntax(text: &str, lex: &Lexicon) -> Result<(SyntaxKind, Option<String>), ParseError> {
    let tokens = tokenize(text).map_err(ParseError::Invalid)?;
    match detect_tokens(&tokens, lex) {
        Some(Detected::Shorthand) => Ok((SyntaxKind::Shorthand, None)),
        Some(Detected::Longform(langs)) => Ok((SyntaxKind::Longform, langs.into_iter().next())),
        None => Err(ParseError::Undetectable),
    }
}

/// Re-renders text in another notation and/or language.
pub fn convert(
    text: &str,
    from_syntax: Option<SyntaxKind>,
    from_lang: Option<&str>,
    to_syntax: SyntaxKind,
    to_lang: &str,
    lex: &Lexicon,
) -> Result<String, ParseError> {
    let parsed = parse(text, from_syntax, from_lang, lex)?;
    Ok(serialize(&parsed.model, to_syntax, to_lang, lex)?)
}
