//! Import flattening and name resolution.

use std::collections::{BTreeSet, HashSet};
use std::path::PathBuf;
use std::sync::Arc;

use super::syntax::{AxiomAst, EqAst, SpecAst, TermAst};
use super::{parse_ast, SourceSpan, SpecError};
use crate::catalog;
use crate::term::{
    ConditionalAxiom, Equation, OpSymbol, Signature, Sort, SortError, Specification, Term, Variable,
};

/// Resolves an imported specification name to its source text.
pub trait SpecLoader {
    fn load(&self, name: &str) -> Option<(String, PathBuf)>;
}

/// Directory search, falling back to the bundled specifications.
#[derive(Clone, Debug, Default)]
pub struct SearchPath {
    pub dirs: Vec<PathBuf>,
}

impl SearchPath {
    pub fn new(dirs: Vec<PathBuf>) -> Self {
        SearchPath { dirs }
    }
}

fn snake_case(name: &str) -> String {
    let mut out = String::new();
    for (i, c) in name.chars().enumerate() {
        if c.is_uppercase() && i > 0 {
            out.push('_');
        }
        out.extend(c.to_lowercase());
    }
    out
}

impl SpecLoader for SearchPath {
    fn load(&self, name: &str) -> Option<(String, PathBuf)> {
        let candidates = [name.to_string(), name.to_lowercase(), snake_case(name)];
        for dir in &self.dirs {
            for c in &candidates {
                let path = dir.join(format!("{c}.spec"));
                if let Ok(text) = std::fs::read_to_string(&path) {
                    return Some((text, path));
                }
            }
        }
        catalog::builtin_source(name).map(|t| (t.to_string(), PathBuf::from(format!("<builtin>/{name}.spec"))))
    }
}

#[derive(Default)]
struct Acc {
    sorts: Vec<Sort>,
    constructors: Vec<Arc<OpSymbol>>,
    others: Vec<Arc<OpSymbol>>,
    observable: BTreeSet<Sort>,
    vars: Vec<Variable>,
    axioms: Vec<ConditionalAxiom>,
}

impl Acc {
    fn signature(&self) -> Signature {
        Signature {
            sorts: self.sorts.clone(),
            ops: self
                .constructors
                .iter()
                .chain(&self.others)
                .cloned()
                .collect(),
            observable: self.observable.clone(),
            vars: self.vars.clone(),
        }
    }
}

struct Flattener<'l> {
    loader: &'l dyn SpecLoader,
    stack: Vec<String>,
    merged: HashSet<String>,
    imports: Vec<String>,
    acc: Acc,
}

pub fn flatten(ast: &SpecAst, loader: &dyn SpecLoader) -> Result<Specification, SpecError> {
    let mut f = Flattener {
        loader,
        stack: vec![ast.name.clone()],
        merged: HashSet::new(),
        imports: Vec::new(),
        acc: Acc::default(),
    };
    f.merge(ast)?;
    let signature = f.acc.signature();
    Ok(Specification {
        name: ast.name.clone(),
        signature,
        axioms: f.acc.axioms,
        imports: f.imports,
    })
}

impl Flattener<'_> {
    fn merge(&mut self, ast: &SpecAst) -> Result<(), SpecError> {
        for (name, span) in &ast.imports {
            if self.merged.contains(name) {
                continue;
            }
            if self.stack.contains(name) {
                let mut cycle = self.stack.clone();
                cycle.push(name.clone());
                return Err(SpecError::ImportCycle(cycle));
            }
            let (text, path) = self.loader.load(name).ok_or_else(|| SpecError::ImportNotFound {
                name: name.clone(),
                span: span.clone(),
            })?;
            let imported = parse_ast(&text, &path)?;
            self.stack.push(name.clone());
            self.merge(&imported)?;
            self.stack.pop();
            self.merged.insert(name.clone());
            self.imports.push(name.clone());
        }

        let mut own_sorts = Vec::new();
        for (name, _) in &ast.sorts {
            let s = Sort::new(name);
            // redeclaring an imported sort keeps its observability
            if !self.acc.sorts.contains(&s) {
                self.acc.sorts.push(s.clone());
                own_sorts.push(s);
            }
        }
        match &ast.observable {
            Some(list) => {
                for (name, span) in list {
                    let s = self.sort(name, span)?;
                    self.acc.observable.insert(s);
                }
            }
            None => self.acc.observable.extend(own_sorts),
        }
        for (decls, constructor) in [(&ast.constructors, true), (&ast.ops, false)] {
            for d in decls {
                let args = d
                    .args
                    .iter()
                    .map(|a| self.sort(a, &d.span))
                    .collect::<Result<Vec<_>, _>>()?;
                let op = OpSymbol {
                    name: d.name.clone(),
                    arg_sorts: args,
                    result: self.sort(&d.result, &d.span)?,
                    constructor,
                };
                self.add_op(op, &d.span)?;
            }
        }
        for decl in &ast.vars {
            let sort = self.sort(&decl.sort, &decl.span)?;
            for name in &decl.names {
                match self.acc.vars.iter().find(|v| &*v.name == name) {
                    Some(v) if v.sort == sort => {}
                    Some(v) => {
                        return Err(SpecError::SignatureClash {
                            symbol: name.clone(),
                            detail: format!("variable declared with sorts {} and {}", v.sort, sort),
                            span: decl.span.clone(),
                        })
                    }
                    None => self.acc.vars.push(Variable::new(name, &sort)),
                }
            }
        }

        let sig = self.acc.signature();
        for ax in &ast.axioms {
            let mut axiom = elaborate_axiom(ax, &sig)?;
            axiom.origin = ast.name.clone();
            let existing = self.acc.axioms.iter().position(|a| a.label == ax.label);
            match (ax.is_override, existing) {
                (true, Some(i)) => {
                    // an override stays with the specification it patches
                    axiom.origin = self.acc.axioms[i].origin.clone();
                    self.acc.axioms[i] = axiom
                }
                (true, None) => {
                    return Err(SpecError::OverrideTarget {
                        label: ax.label.clone(),
                        span: ax.span.clone(),
                    })
                }
                (false, Some(_)) => {
                    return Err(SpecError::DuplicateLabel {
                        label: ax.label.clone(),
                        span: ax.span.clone(),
                    })
                }
                (false, None) => self.acc.axioms.push(axiom),
            }
        }
        Ok(())
    }

    fn sort(&self, name: &str, span: &SourceSpan) -> Result<Sort, SpecError> {
        self.acc
            .sorts
            .iter()
            .find(|s| s.name() == name)
            .cloned()
            .ok_or_else(|| SpecError::UnknownSort {
                name: name.to_string(),
                span: span.clone(),
            })
    }

    fn add_op(&mut self, op: OpSymbol, span: &SourceSpan) -> Result<(), SpecError> {
        let existing = self
            .acc
            .constructors
            .iter()
            .chain(&self.acc.others)
            .find(|o| o.same_profile(&op));
        match existing {
            Some(o) if **o == op => Ok(()),
            Some(o) => Err(SpecError::SignatureClash {
                symbol: op.name.clone(),
                detail: format!("declared as `{o}`{} and `{op}`{}", ctor_note(o), ctor_note(&op)),
                span: span.clone(),
            }),
            None => {
                if op.constructor {
                    self.acc.constructors.push(Arc::new(op));
                } else {
                    self.acc.others.push(Arc::new(op));
                }
                Ok(())
            }
        }
    }
}

fn ctor_note(op: &OpSymbol) -> &'static str {
    if op.constructor {
        " (constructor)"
    } else {
        ""
    }
}

pub(crate) fn elaborate_axiom(ax: &AxiomAst, sig: &Signature) -> Result<ConditionalAxiom, SpecError> {
    let premises = ax
        .premises
        .iter()
        .map(|e| elaborate_eq(e, sig))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ConditionalAxiom {
        label: ax.label.clone(),
        premises,
        conclusion: elaborate_eq(&ax.conclusion, sig)?,
        span: Some(ax.span.clone()),
        origin: String::new(),
    })
}

fn elaborate_eq(e: &EqAst, sig: &Signature) -> Result<Equation, SpecError> {
    let lhs = resolve_term(&e.lhs, sig)?;
    let rhs = resolve_term(&e.rhs, sig)?;
    Equation::new(lhs, rhs).map_err(|error| SpecError::Sort {
        error,
        span: e.span.clone(),
    })
}

pub fn resolve_term(ast: &TermAst, sig: &Signature) -> Result<Term, SpecError> {
    match ast {
        TermAst::Name(name, span) => {
            if let Some(v) = sig.var(name) {
                return Ok(Term::var(v));
            }
            let mut consts = sig.ops.iter().filter(|o| &o.name == name && o.arity() == 0);
            match (consts.next(), consts.next()) {
                (Some(op), None) => Ok(Term::constant(op)),
                (Some(_), Some(_)) => Err(SpecError::Ambiguous {
                    name: name.clone(),
                    span: span.clone(),
                }),
                (None, _) => Err(SpecError::UnknownSymbol {
                    name: name.clone(),
                    span: span.clone(),
                }),
            }
        }
        TermAst::Nat(n, span) => {
            let (zero, succ) = sig.numeral_ops().ok_or_else(|| SpecError::UnknownSymbol {
                name: n.to_string(),
                span: span.clone(),
            })?;
            let mut t = Term::constant(&zero);
            for _ in 0..*n {
                t = Term::App(succ.clone(), vec![t]);
            }
            Ok(t)
        }
        TermAst::App(name, args, span) => {
            let args = args
                .iter()
                .map(|a| resolve_term(a, sig))
                .collect::<Result<Vec<_>, _>>()?;
            apply_named(name, args, sig, span)
        }
        TermAst::Cons(head, tail, span) => {
            let args = vec![resolve_term(head, sig)?, resolve_term(tail, sig)?];
            apply_named("::", args, sig, span)
        }
    }
}

fn apply_named(name: &str, args: Vec<Term>, sig: &Signature, span: &SourceSpan) -> Result<Term, SpecError> {
    let sorts: Vec<Sort> = args.iter().map(|a| a.sort().clone()).collect();
    if let Some(op) = sig.lookup(name, &sorts) {
        return Ok(Term::App(op.clone(), args));
    }
    let same_arity = sig
        .ops
        .iter()
        .find(|o| o.name == name && o.arity() == args.len());
    match same_arity {
        // reuse the checked constructor for a precise message
        Some(op) => Err(SpecError::Sort {
            error: Term::app(op, args).err().unwrap_or(SortError::UnknownOp(name.to_string())),
            span: span.clone(),
        }),
        None => Err(SpecError::UnknownSymbol {
            name: name.to_string(),
            span: span.clone(),
        }),
    }
}
