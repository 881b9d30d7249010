//! CoSMo: a modelling language for selecting content from a knowledge
//! graph, with a longform and a shorthand notation, multilingual keywords,
//! a first-order-logic reading, an evaluator and a SPARQL compiler.

pub mod algebra;
pub mod eval;
pub mod fol;
pub mod lexicon;
pub mod model;
pub mod sparql;
pub mod syntax;
pub mod validate;

pub use lexicon::Lexicon;
pub use model::*;
pub use syntax::{parse, serialize, ParseError, Parsed, SyntaxKind};
