//! Concrete syntax, serialization, corpus generation, independent oracles
//! and the acceptance-property suites for the lambda-core engine.

pub mod gen;
pub mod json;
pub mod oracle;
pub mod parse;
pub mod print;
pub mod suites;

pub use gen::{enum_terms, enum_terms_cbv, random_term, Calculus, CorpusSpec};
pub use parse::{parse_term, parse_term_prime, ParseError};
pub use print::{print_term, PrintStyle};
pub use suites::{run_all, run_suite, SuiteReport, UnknownSuite, SUITE_NAMES};
