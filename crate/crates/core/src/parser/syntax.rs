//! Concrete syntax tree and recursive-descent parser for `.spec` text.

use super::lexer::{Tok, Token};
use super::{ParseError, SourceSpan};

const KEYWORDS: &[&str] = &[
    "spec",
    "imports",
    "sorts",
    "observable",
    "constructors",
    "ops",
    "vars",
    "axioms",
    "end",
    "override",
];

#[derive(Clone, Debug)]
pub struct SpecAst {
    pub name: String,
    pub imports: Vec<(String, SourceSpan)>,
    pub sorts: Vec<(String, SourceSpan)>,
    pub observable: Option<Vec<(String, SourceSpan)>>,
    pub constructors: Vec<OpDeclAst>,
    pub ops: Vec<OpDeclAst>,
    pub vars: Vec<VarDeclAst>,
    pub axioms: Vec<AxiomAst>,
}

#[derive(Clone, Debug)]
pub struct OpDeclAst {
    pub name: String,
    pub args: Vec<String>,
    pub result: String,
    pub span: SourceSpan,
}

#[derive(Clone, Debug)]
pub struct VarDeclAst {
    pub names: Vec<String>,
    pub sort: String,
    pub span: SourceSpan,
}

#[derive(Clone, Debug)]
pub struct AxiomAst {
    pub label: String,
    pub premises: Vec<EqAst>,
    pub conclusion: EqAst,
    pub is_override: bool,
    pub span: SourceSpan,
}

#[derive(Clone, Debug)]
pub struct EqAst {
    pub lhs: TermAst,
    pub rhs: TermAst,
    pub span: SourceSpan,
}

#[derive(Clone, Debug)]
pub enum TermAst {
    Name(String, SourceSpan),
    Nat(u64, SourceSpan),
    App(String, Vec<TermAst>, SourceSpan),
    Cons(Box<TermAst>, Box<TermAst>, SourceSpan),
}

pub struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    pub fn new(tokens: Vec<Token>) -> Self {
        Parser { tokens, pos: 0 }
    }

    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        let found = self.peek();
        ParseError {
            span: found.span.clone(),
            message: format!(
                "expected {}, found {}",
                expected.join(" or "),
                found.tok.describe()
            ),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s == kw)
    }

    fn is_any_keyword(&self) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if KEYWORDS.contains(&s.as_str()))
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<SourceSpan, ParseError> {
        if self.is_keyword(kw) {
            Ok(self.bump().span)
        } else {
            Err(self.error(&[&format!("`{kw}`")]))
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<SourceSpan, ParseError> {
        if self.peek().tok == tok {
            Ok(self.bump().span)
        } else {
            Err(self.error(&[&tok.describe()]))
        }
    }

    fn ident(&mut self) -> Result<(String, SourceSpan), ParseError> {
        match &self.peek().tok {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let s = s.clone();
                Ok((s, self.bump().span))
            }
            _ => Err(self.error(&["identifier"])),
        }
    }

    fn ident_list(&mut self) -> Result<Vec<(String, SourceSpan)>, ParseError> {
        let mut out = vec![self.ident()?];
        while self.peek().tok == Tok::Comma {
            self.bump();
            out.push(self.ident()?);
        }
        Ok(out)
    }

    pub fn spec(&mut self) -> Result<SpecAst, ParseError> {
        self.expect_keyword("spec")?;
        let (name, _) = self.ident()?;
        let imports = if self.is_keyword("imports") {
            self.bump();
            self.ident_list()?
        } else {
            Vec::new()
        };
        self.expect_keyword("sorts")?;
        let mut sorts = vec![self.ident()?];
        loop {
            if self.peek().tok == Tok::Comma {
                self.bump();
                sorts.push(self.ident()?);
            } else if matches!(self.peek().tok, Tok::Ident(_)) && !self.is_any_keyword() {
                sorts.push(self.ident()?);
            } else {
                break;
            }
        }
        let observable = if self.is_keyword("observable") {
            self.bump();
            Some(self.ident_list()?)
        } else {
            None
        };
        self.expect_keyword("constructors")?;
        let mut constructors = vec![self.opdecl()?];
        while self.at_opdecl() {
            constructors.push(self.opdecl()?);
        }
        let mut ops = Vec::new();
        if self.is_keyword("ops") {
            self.bump();
            while self.at_opdecl() {
                ops.push(self.opdecl()?);
            }
        }
        let mut vars = Vec::new();
        if self.is_keyword("vars") {
            self.bump();
            while matches!(self.peek().tok, Tok::Ident(_)) && !self.is_any_keyword() {
                vars.push(self.vardecl()?);
            }
        }
        self.expect_keyword("axioms")?;
        let mut axioms = Vec::new();
        while self.peek().tok == Tok::LBracket || self.is_keyword("override") {
            axioms.push(self.axiom()?);
        }
        if !self.is_keyword("end") {
            return Err(self.error(&["`[`", "`override`", "`end`"]));
        }
        self.bump();
        if self.peek().tok != Tok::Eof {
            return Err(self.error(&["end of input"]));
        }
        Ok(SpecAst {
            name,
            imports,
            sorts,
            observable,
            constructors,
            ops,
            vars,
            axioms,
        })
    }

    fn at_opdecl(&self) -> bool {
        let name_like = match &self.peek().tok {
            Tok::Ident(s) => !KEYWORDS.contains(&s.as_str()),
            Tok::Nat(_) | Tok::DoubleColon => true,
            _ => false,
        };
        name_like && *self.peek_at(1) == Tok::Colon
    }

    fn opdecl(&mut self) -> Result<OpDeclAst, ParseError> {
        let span = self.peek().span.clone();
        let name = match self.peek().tok.clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => s,
            Tok::Nat(n) => n.to_string(),
            Tok::DoubleColon => "::".to_string(),
            _ => return Err(self.error(&["operation name"])),
        };
        self.bump();
        self.expect(Tok::Colon)?;
        let args = if self.peek().tok == Tok::Arrow {
            Vec::new()
        } else {
            self.ident_list()?.into_iter().map(|(s, _)| s).collect()
        };
        self.expect(Tok::Arrow)?;
        let (result, _) = self.ident()?;
        Ok(OpDeclAst {
            name,
            args,
            result,
            span,
        })
    }

    fn vardecl(&mut self) -> Result<VarDeclAst, ParseError> {
        let span = self.peek().span.clone();
        let names = self.ident_list()?.into_iter().map(|(s, _)| s).collect();
        self.expect(Tok::Colon)?;
        let (sort, _) = self.ident()?;
        Ok(VarDeclAst { names, sort, span })
    }

    fn axiom(&mut self) -> Result<AxiomAst, ParseError> {
        let span = self.peek().span.clone();
        let is_override = if self.is_keyword("override") {
            self.bump();
            true
        } else {
            false
        };
        self.expect(Tok::LBracket)?;
        let (label, _) = self.ident()?;
        self.expect(Tok::RBracket)?;
        let mut eqs = vec![self.equation()?];
        let mut premises = Vec::new();
        loop {
            match self.peek().tok {
                Tok::Amp => {
                    self.bump();
                    eqs.push(self.equation()?);
                }
                Tok::Implies if premises.is_empty() => {
                    self.bump();
                    premises = std::mem::take(&mut eqs);
                    eqs.push(self.equation()?);
                    break;
                }
                _ => break,
            }
        }
        if eqs.len() != 1 {
            return Err(self.error(&["`=>`"]));
        }
        Ok(AxiomAst {
            label,
            premises,
            conclusion: eqs.pop().unwrap(),
            is_override,
            span,
        })
    }

    pub fn equation(&mut self) -> Result<EqAst, ParseError> {
        let span = self.peek().span.clone();
        let lhs = self.term()?;
        self.expect(Tok::Eq)?;
        let rhs = self.term()?;
        Ok(EqAst { lhs, rhs, span })
    }

    pub fn term(&mut self) -> Result<TermAst, ParseError> {
        let head = self.primary()?;
        if self.peek().tok == Tok::DoubleColon {
            let span = self.bump().span;
            let tail = self.term()?;
            return Ok(TermAst::Cons(Box::new(head), Box::new(tail), span));
        }
        Ok(head)
    }

    fn primary(&mut self) -> Result<TermAst, ParseError> {
        let span = self.peek().span.clone();
        match self.peek().tok.clone() {
            Tok::Nat(n) => {
                self.bump();
                Ok(TermAst::Nat(n, span))
            }
            Tok::LParen => {
                self.bump();
                let t = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                if self.peek().tok == Tok::LParen {
                    self.bump();
                    let mut args = vec![self.term()?];
                    while self.peek().tok == Tok::Comma {
                        self.bump();
                        args.push(self.term()?);
                    }
                    self.expect(Tok::RParen)?;
                    Ok(TermAst::App(s, args, span))
                } else {
                    Ok(TermAst::Name(s, span))
                }
            }
            _ => Err(self.error(&["term"])),
        }
    }

    pub fn expect_eof(&mut self) -> Result<(), ParseError> {
        if self.peek().tok == Tok::Eof {
            Ok(())
        } else {
            Err(self.error(&["end of input"]))
        }
    }
}
