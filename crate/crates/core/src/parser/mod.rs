//! Textual specification format and term syntax.
//!
//! ```text
//! spec     ::= "spec" IDENT ("imports" IDENT ("," IDENT)*)? "sorts" sortdecl+
//!              ("observable" IDENT ("," IDENT)*)? "constructors" opdecl+
//!              ("ops" opdecl*)? ("vars" vardecl*)? "axioms" axiom* "end"
//! opdecl   ::= IDENT ":" (IDENT ("," IDENT)*)? "->" IDENT
//! vardecl  ::= IDENT ("," IDENT)* ":" IDENT
//! axiom    ::= "override"? "[" IDENT "]" (eq ("&" eq)* "=>")? eq
//! eq       ::= term "=" term
//! term     ::= IDENT | NAT | IDENT "(" term ("," term)* ")" | term "::" term
//! ```
//!
//! `::` is right associative. Decimal numerals stand for `succ` towers over
//! `0` when the signature declares both. `--` starts a comment.

mod elaborate;
mod lexer;
mod render;
mod syntax;

use std::fmt;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::term::{SortError, Specification, Signature, Term};

pub use elaborate::{SearchPath, SpecLoader};
pub use render::{render_spec, render_term};
pub(crate) use elaborate::elaborate_axiom;
pub(crate) use syntax::SpecAst;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SourceSpan {
    pub file: PathBuf,
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file.display(), self.line, self.column)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{span}: {message}")]
pub struct ParseError {
    pub span: SourceSpan,
    pub message: String,
    pub expected: Vec<String>,
}

#[derive(Debug, Error)]
pub enum SpecError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("cannot read {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("{span}: import `{name}` not found on the search path")]
    ImportNotFound { name: String, span: SourceSpan },
    #[error("import cycle: {}", .0.join(" -> "))]
    ImportCycle(Vec<String>),
    #[error("{span}: signature clash on {symbol}: {detail}")]
    SignatureClash {
        symbol: String,
        detail: String,
        span: SourceSpan,
    },
    #[error("{span}: unknown sort `{name}`")]
    UnknownSort { name: String, span: SourceSpan },
    #[error("{span}: unknown symbol `{name}`")]
    UnknownSymbol { name: String, span: SourceSpan },
    #[error("{span}: ambiguous constant `{name}`")]
    Ambiguous { name: String, span: SourceSpan },
    #[error("{span}: {error}")]
    Sort { error: SortError, span: SourceSpan },
    #[error("{span}: duplicate axiom label `{label}`")]
    DuplicateLabel { label: String, span: SourceSpan },
    #[error("{span}: override of unknown axiom `{label}`")]
    OverrideTarget { label: String, span: SourceSpan },
}

/// Parses and flattens a specification; imports are looked up on
/// `search_path`, then among the bundled specifications.
pub fn parse_spec(text: &str, search_path: &[PathBuf]) -> Result<Specification, SpecError> {
    let loader = SearchPath::new(search_path.to_vec());
    parse_spec_with(text, Path::new("<input>"), &loader)
}

/// Reads a `.spec` file; its own directory is searched first for imports.
pub fn parse_spec_file(path: &Path, extra_search: &[PathBuf]) -> Result<Specification, SpecError> {
    let text = std::fs::read_to_string(path).map_err(|e| SpecError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let mut dirs = vec![path
        .parent()
        .map(Path::to_path_buf)
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or_else(|| PathBuf::from("."))];
    dirs.extend(extra_search.iter().cloned());
    parse_spec_with(&text, path, &SearchPath::new(dirs))
}

pub fn parse_spec_with(
    text: &str,
    file: &Path,
    loader: &dyn SpecLoader,
) -> Result<Specification, SpecError> {
    let ast = parse_ast(text, file)?;
    elaborate::flatten(&ast, loader)
}

pub(crate) fn parse_ast(text: &str, file: &Path) -> Result<SpecAst, ParseError> {
    let tokens = lexer::tokenize(text, file)?;
    syntax::Parser::new(tokens).spec()
}

/// Parses a term against `sig`; declared variables may appear free.
pub fn parse_term(text: &str, sig: &Signature) -> Result<Term, SpecError> {
    let tokens = lexer::tokenize(text, Path::new("<term>"))?;
    let mut p = syntax::Parser::new(tokens);
    let ast = p.term()?;
    p.expect_eof()?;
    elaborate::resolve_term(&ast, sig)
}
