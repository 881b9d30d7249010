mod common;

use std::collections::BTreeSet;

use common::{fixture, invalid_models};
use cosmo::validate::{validate, ItemCatalog, Severity};
use cosmo::*;

#[test]
fn each_rule_fires_alone() {
    let cases = invalid_models();
    let rules: BTreeSet<&str> = cases.iter().map(|c| c.0).collect();
    assert_eq!(rules.len(), 16);
    for (rule, model, catalog) in &cases {
        let report = validate(model, catalog);
        assert_eq!(report.rules(), BTreeSet::from([*rule]), "{rule}: {:?}", report.findings);
    }
}

#[test]
fn severities() {
    for (rule, model, catalog) in invalid_models() {
        let report = validate(&model, &catalog);
        let want = match rule {
            "VR03" | "VR07" | "VR13" => Severity::Warning,
            _ => Severity::Error,
        };
        assert!(report.findings.iter().all(|f| f.severity == want), "{rule}");
        assert_eq!(report.has_errors(), want == Severity::Error, "{rule}");
        assert!(!report.is_valid(), "{rule}");
    }
}

#[test]
fn listings_are_clean() {
    let lex = Lexicon::builtin();
    for name in ["c1c2c3_long.cosmo", "c1c2c3_short.cosmo", "c5_long.cosmo", "capybara.cosmo", "composition.cosmo"] {
        let m = parse(&fixture(name), None, None, &lex).unwrap().model;
        let report = validate(&m, &ItemCatalog::open_world());
        assert!(report.findings.is_empty(), "{name}: {:?}", report.findings);
    }
}

#[test]
fn catalog_from_file() {
    let lex = Lexicon::builtin();
    let cat = ItemCatalog::from_path(common::fixture_path("example1.catalog")).unwrap();
    let m = parse(&fixture("c5_short.cosmo"), None, None, &lex).unwrap().model;
    assert!(validate(&m, &cat).is_valid());
    let m = parse(&fixture("capybara.cosmo"), None, None, &lex).unwrap().model;
    let report = validate(&m, &cat);
    assert_eq!(report.rules(), BTreeSet::from(["VR09"]));
}

#[test]
fn type_constructor_with_instantiation_is_noted() {
    let m = parse("TC:C1(P40(r1,r2), r1:Q1, r2:Q2, Q1={Q3})", None, None, &Lexicon::builtin()).unwrap().model;
    let report = validate(&m, &ItemCatalog::open_world());
    assert!(report.is_valid());
    assert_eq!(report.notes[0].rule, "VR10");
    assert_eq!(report.notes[0].severity, Severity::Info);
}
