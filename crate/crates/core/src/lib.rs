//! Specification-based black-box testing of abstract data type
//! implementations.
//!
//! A positive conditional specification is oriented into a rewrite system
//! ([`rewrite`]), its axioms are split into uniformity subdomains by
//! unfolding and instantiated under a size bound ([`select`]), equations of
//! non-observable sort are wrapped into minimal observable contexts
//! ([`observe`]), and the resulting suites are run against an
//! implementation ([`harness`]): the reference interpreter, a mutant, or an
//! external process speaking a line protocol.

pub mod catalog;
pub mod cli;
pub mod enumerate;
pub mod harness;
pub mod observe;
pub mod parser;
pub mod rewrite;
pub mod select;
pub mod term;

pub use enumerate::{enumerate_constructor_terms, enumerate_ground_terms, TermEnumerator};
pub use parser::{parse_spec, parse_spec_file, parse_term, render_spec, render_term, SpecError};
pub use term::{
    apply_substitution, validate_signature, well_sorted, ConditionalAxiom, Defect, Equation,
    OpSymbol, Signature, Sort, Specification, Substitution, Term, Variable,
};
