mod common;

use std::time::Instant;

use common::gen;
use common::{corpus_mismatches, fixture, notation_round_trip, round_trip, scan_items, token_texts, REFERENCE_LISTINGS};
use cosmo::syntax::{convert, detect_syntax, tokenize, DiagnosticKind, Span};
use cosmo::*;

#[test]
fn reference_listings_round_trip() {
    let start = Instant::now();
    let bad = corpus_mismatches();
    assert!(bad.is_empty(), "{}", bad.join("\n"));
    assert!(start.elapsed().as_secs_f64() < 1.0);
}

#[test]
fn spanish_aliases_are_canonicalised() {
    let lex = Lexicon::builtin();
    let out = round_trip(&fixture("c1c2c3_es.cosmo"), SyntaxKind::Longform, Some("es"), &lex);
    assert!(!out.contains("Propriedad"));
    assert!(!out.contains("TipoDeEntitdad"));
    assert!(out.contains("Propiedad(P40(r1,r2))"));
}

#[test]
fn pivot_listing_reads_bare_fillers_as_object_types() {
    let lex = Lexicon::builtin();
    let text = fixture("pivot_csm.cosmo");
    let p = parse(&text, None, None, &lex).unwrap();
    assert_eq!(p.lang.as_deref(), Some("csm"));
    assert_eq!(p.warnings.len(), 2);
    let out = serialize(&p.model, SyntaxKind::Longform, "csm", &lex).unwrap();
    let expected = text.replace("r3:Q18844224", "r3:CSM002(Q18844224)").replace("r4:Q24925", "r4:CSM002(Q24925)");
    assert_eq!(token_texts(&out), token_texts(&expected));
}

#[test]
fn english_instance_constructor_to_pivot() {
    let lex = Lexicon::builtin();
    let out = convert(&fixture("c5_long.cosmo"), None, None, SyntaxKind::Longform, "csm", &lex).unwrap();
    assert!(out.starts_with("CSM006:C5("), "{out}");
    let back = parse(&out, None, None, &lex).unwrap();
    assert_eq!(back.model, parse(&fixture("c5_long.cosmo"), None, None, &lex).unwrap().model);
}

#[test]
fn notations_and_languages_agree() {
    let lex = Lexicon::builtin();
    let m = |name: &str| parse(&fixture(name), None, None, &lex).unwrap().model;
    assert_eq!(m("c5_long.cosmo"), m("c5_short.cosmo"));
    assert_eq!(m("c5_short.cosmo"), m("c5_short_vertical.cosmo"));
    assert_eq!(m("c1c2c3_long.cosmo"), m("c1c2c3_es.cosmo"));
    let long: Vec<_> = m("c1c2c3_long.cosmo").constructors().cloned().collect();
    let short: Vec<_> = m("c1c2c3_short.cosmo").constructors().cloned().collect();
    assert_eq!(long, short);
}

#[test]
fn every_listed_item_survives_parsing() {
    let lex = Lexicon::builtin();
    for (name, _, _) in REFERENCE_LISTINGS {
        let text = fixture(name);
        let mut scanned = scan_items(&text);
        let mut parsed = parse(&text, None, None, &lex).unwrap().model.items();
        scanned.sort();
        parsed.sort();
        assert_eq!(parsed, scanned, "{name}");
    }
}

#[test]
fn invented_fixtures_round_trip_as_models() {
    let lex = Lexicon::builtin();
    for name in ["capybara.cosmo", "san_francisco.cosmo", "composition.cosmo"] {
        let m = parse(&fixture(name), None, None, &lex).unwrap().model;
        for lang in ["en", "es", "eu", "csm"] {
            let text = serialize(&m, SyntaxKind::Longform, lang, &lex).unwrap();
            assert_eq!(parse(&text, None, None, &lex).unwrap().model, m, "{name} {lang}");
        }
        let text = serialize(&m, SyntaxKind::Shorthand, "en", &lex).unwrap();
        assert_eq!(parse(&text, None, None, &lex).unwrap().model, m, "{name} shorthand");
    }
}

#[test]
fn random_models_round_trip() {
    let mut r = gen::rng(11);
    for i in 0..1000 {
        if let Err(e) = notation_round_trip(&mut r) {
            panic!("model {i}: {e}");
        }
    }
}

#[test]
fn detection() {
    let lex = Lexicon::builtin();
    assert_eq!(detect_syntax(&fixture("c5_short.cosmo"), &lex).unwrap(), (SyntaxKind::Shorthand, None));
    assert_eq!(detect_syntax(&fixture("c5_long.cosmo"), &lex).unwrap().1.as_deref(), Some("en"));
    assert_eq!(detect_syntax(&fixture("c1c2c3_es.cosmo"), &lex).unwrap().1.as_deref(), Some("es"));
    assert_eq!(detect_syntax(&fixture("pivot_csm.cosmo"), &lex).unwrap().1.as_deref(), Some("csm"));
}

#[test]
fn errors_carry_positions() {
    let lex = Lexicon::builtin();
    let err = parse("TC:C1(\n   P40(r1,r2), r1:Q7566 r2:Q29514218)", None, None, &lex).unwrap_err();
    let d = &err.diagnostics()[0];
    assert_eq!(d.kind, DiagnosticKind::Syntax);
    assert_eq!(d.span, Span { line: 2, column: 25 });

    let err = parse("TC:C1(P40(r1,r2), r1:Q0, r2:Q1)", None, None, &lex).unwrap_err();
    assert_eq!(err.diagnostics()[0].kind, DiagnosticKind::Lexical);

    let err = parse("IC:C2(P40(r1,r2), r1:Q7566, r2:Q29514218)", None, None, &lex).unwrap_err();
    assert_eq!(err.diagnostics()[0].kind, DiagnosticKind::Grammar);
}

#[test]
fn comments_are_not_tokens() {
    let toks = tokenize("IC:C5( // about Writer Douglas Adams\n P106").unwrap();
    assert_eq!(toks.len(), 5);
}
