//! Sorted first-order terms over a signature with constructors.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::parser::SourceSpan;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sort(Arc<str>);

impl Sort {
    pub fn new(name: &str) -> Self {
        Sort(Arc::from(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// An operation symbol `name : arg_sorts -> result`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OpSymbol {
    pub name: String,
    pub arg_sorts: Vec<Sort>,
    pub result: Sort,
    pub constructor: bool,
}

impl OpSymbol {
    pub fn new(name: &str, arg_sorts: &[&str], result: &str, constructor: bool) -> Self {
        OpSymbol {
            name: name.to_string(),
            arg_sorts: arg_sorts.iter().map(|s| Sort::new(s)).collect(),
            result: Sort::new(result),
            constructor,
        }
    }

    pub fn arity(&self) -> usize {
        self.arg_sorts.len()
    }

    /// Same name and argument profile.
    pub fn same_profile(&self, other: &OpSymbol) -> bool {
        self.name == other.name && self.arg_sorts == other.arg_sorts
    }
}

impl fmt::Display for OpSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let args: Vec<&str> = self.arg_sorts.iter().map(Sort::name).collect();
        write!(f, "{} : {} -> {}", self.name, args.join(", "), self.result)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Variable {
    pub name: Arc<str>,
    pub sort: Sort,
}

impl Variable {
    pub fn new(name: &str, sort: &Sort) -> Self {
        Variable {
            name: Arc::from(name),
            sort: sort.clone(),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Signature {
    pub sorts: Vec<Sort>,
    pub ops: Vec<Arc<OpSymbol>>,
    pub observable: BTreeSet<Sort>,
    pub vars: Vec<Variable>,
}

impl PartialEq for Signature {
    fn eq(&self, other: &Self) -> bool {
        self.sorts == other.sorts
            && self.observable == other.observable
            && self.vars == other.vars
            && self.ops.len() == other.ops.len()
            && self.ops.iter().zip(&other.ops).all(|(a, b)| a == b)
    }
}

/// A single problem found by [`validate_signature`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Defect {
    DuplicateSort(String),
    UndeclaredSort { symbol: String, sort: String },
    DuplicateOperation(String),
    UninhabitedSort(String),
    ObservableNotDeclared(String),
    DuplicateVariable(String),
}

impl fmt::Display for Defect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Defect::DuplicateSort(s) => write!(f, "duplicate sort: {s}"),
            Defect::UndeclaredSort { symbol, sort } => {
                write!(f, "undeclared sort {sort} used by {symbol}")
            }
            Defect::DuplicateOperation(op) => write!(f, "duplicate operation: {op}"),
            Defect::UninhabitedSort(s) => write!(f, "uninhabited sort: {s}"),
            Defect::ObservableNotDeclared(s) => write!(f, "observable sort not declared: {s}"),
            Defect::DuplicateVariable(v) => write!(f, "duplicate variable: {v}"),
        }
    }
}

impl Signature {
    pub fn sort(&self, name: &str) -> Option<&Sort> {
        self.sorts.iter().find(|s| s.name() == name)
    }

    pub fn var(&self, name: &str) -> Option<&Variable> {
        self.vars.iter().find(|v| &*v.name == name)
    }

    pub fn is_observable(&self, sort: &Sort) -> bool {
        self.observable.contains(sort)
    }

    pub fn constructors(&self) -> impl Iterator<Item = &Arc<OpSymbol>> {
        self.ops.iter().filter(|op| op.constructor)
    }

    pub fn constructors_of<'a>(&'a self, sort: &'a Sort) -> impl Iterator<Item = &'a Arc<OpSymbol>> {
        self.constructors().filter(move |op| &op.result == sort)
    }

    pub fn lookup(&self, name: &str, arg_sorts: &[Sort]) -> Option<&Arc<OpSymbol>> {
        self.ops
            .iter()
            .find(|op| op.name == name && op.arg_sorts == arg_sorts)
    }

    pub fn contains_op(&self, op: &OpSymbol) -> bool {
        self.ops.iter().any(|o| **o == *op)
    }

    /// Declaration index, used for deterministic orderings.
    pub fn op_index(&self, op: &OpSymbol) -> usize {
        self.ops
            .iter()
            .position(|o| **o == *op)
            .unwrap_or(usize::MAX)
    }

    /// Sorts that have at least one ground constructor term.
    pub fn inhabited_sorts(&self) -> BTreeSet<Sort> {
        let mut inhabited = BTreeSet::new();
        loop {
            let before = inhabited.len();
            for op in self.constructors() {
                if op.arg_sorts.iter().all(|s| inhabited.contains(s)) {
                    inhabited.insert(op.result.clone());
                }
            }
            if inhabited.len() == before {
                return inhabited;
            }
        }
    }

    pub fn numeral_ops(&self) -> Option<(Arc<OpSymbol>, Arc<OpSymbol>)> {
        let zero = self.ops.iter().find(|o| o.name == "0" && o.arity() == 0)?;
        let succ = self.lookup("succ", std::slice::from_ref(&zero.result))?;
        (succ.result == zero.result).then(|| (zero.clone(), succ.clone()))
    }
}

pub fn validate_signature(sig: &Signature) -> Vec<Defect> {
    let mut defects = Vec::new();
    let mut seen = BTreeSet::new();
    for s in &sig.sorts {
        if !seen.insert(s.clone()) {
            defects.push(Defect::DuplicateSort(s.to_string()));
        }
    }
    let mut profiles: HashMap<(&str, &[Sort]), usize> = HashMap::new();
    for op in &sig.ops {
        for s in op.arg_sorts.iter().chain(std::iter::once(&op.result)) {
            if !seen.contains(s) {
                defects.push(Defect::UndeclaredSort {
                    symbol: op.name.clone(),
                    sort: s.to_string(),
                });
            }
        }
        let n = profiles.entry((&op.name, &op.arg_sorts)).or_default();
        *n += 1;
        if *n == 2 {
            let args: Vec<&str> = op.arg_sorts.iter().map(Sort::name).collect();
            defects.push(Defect::DuplicateOperation(format!(
                "({}, [{}])",
                op.name,
                args.join(",")
            )));
        }
    }
    let inhabited = sig.inhabited_sorts();
    for s in seen.iter() {
        if !inhabited.contains(s) {
            defects.push(Defect::UninhabitedSort(s.to_string()));
        }
    }
    for s in &sig.observable {
        if !seen.contains(s) {
            defects.push(Defect::ObservableNotDeclared(s.to_string()));
        }
    }
    let mut names = BTreeSet::new();
    for v in &sig.vars {
        if !names.insert(v.name.clone()) {
            defects.push(Defect::DuplicateVariable(v.name.to_string()));
        }
        if !seen.contains(&v.sort) {
            defects.push(Defect::UndeclaredSort {
                symbol: v.name.to_string(),
                sort: v.sort.to_string(),
            });
        }
    }
    defects
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SortError {
    #[error("{op} expects {expected} arguments, got {found} in `{term}`")]
    Arity {
        op: String,
        expected: usize,
        found: usize,
        term: String,
    },
    #[error("sort mismatch at argument {position} of `{term}`: expected {expected}, found {found}")]
    Mismatch {
        term: String,
        position: usize,
        expected: Sort,
        found: Sort,
    },
    #[error("operation {0} is not part of the signature")]
    UnknownOp(String),
    #[error("equation sides have different sorts: {0} vs {1}")]
    EquationSides(Sort, Sort),
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Variable),
    App(Arc<OpSymbol>, Vec<Term>),
}

impl Term {
    pub fn var(v: &Variable) -> Term {
        Term::Var(v.clone())
    }

    pub fn constant(op: &Arc<OpSymbol>) -> Term {
        Term::App(op.clone(), Vec::new())
    }

    /// Builds an application, checking arity and argument sorts.
    pub fn app(op: &Arc<OpSymbol>, args: Vec<Term>) -> Result<Term, SortError> {
        let t = Term::App(op.clone(), args);
        t.check_root()?;
        Ok(t)
    }

    fn check_root(&self) -> Result<(), SortError> {
        if let Term::App(op, args) = self {
            if args.len() != op.arity() {
                return Err(SortError::Arity {
                    op: op.name.clone(),
                    expected: op.arity(),
                    found: args.len(),
                    term: self.to_string(),
                });
            }
            for (i, (arg, expected)) in args.iter().zip(&op.arg_sorts).enumerate() {
                let found = arg.sort();
                if found != expected {
                    return Err(SortError::Mismatch {
                        term: self.to_string(),
                        position: i + 1,
                        expected: expected.clone(),
                        found: found.clone(),
                    });
                }
            }
        }
        Ok(())
    }

    /// The sort annotation: the variable's sort or the head's result sort.
    pub fn sort(&self) -> &Sort {
        match self {
            Term::Var(v) => &v.sort,
            Term::App(op, _) => &op.result,
        }
    }

    pub fn head(&self) -> Option<&Arc<OpSymbol>> {
        match self {
            Term::App(op, _) => Some(op),
            Term::Var(_) => None,
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::App(_, args) => args,
            Term::Var(_) => &[],
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::App(_, args) => args.iter().all(Term::is_ground),
        }
    }

    /// Built from constructors and variables only.
    pub fn is_constructor_pattern(&self) -> bool {
        match self {
            Term::Var(_) => true,
            Term::App(op, args) => op.constructor && args.iter().all(Term::is_constructor_pattern),
        }
    }

    /// Ground and built from constructors only.
    pub fn is_constructor_term(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::App(op, args) => op.constructor && args.iter().all(Term::is_constructor_term),
        }
    }

    /// Node count: every symbol and variable occurrence counts 1.
    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::App(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
        }
    }

    pub fn variables(&self) -> BTreeSet<Variable> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    /// Variables in order of first occurrence (left to right, pre-order).
    pub fn variables_ordered(&self, out: &mut Vec<Variable>) {
        match self {
            Term::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Term::App(_, args) => args.iter().for_each(|a| a.variables_ordered(out)),
        }
    }

    fn collect_vars(&self, out: &mut BTreeSet<Variable>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn occurs(&self, v: &Variable) -> bool {
        match self {
            Term::Var(w) => w == v,
            Term::App(_, args) => args.iter().any(|a| a.occurs(v)),
        }
    }

    pub fn count_occurrences(&self, v: &Variable) -> usize {
        match self {
            Term::Var(w) => usize::from(w == v),
            Term::App(_, args) => args.iter().map(|a| a.count_occurrences(v)).sum(),
        }
    }

    pub fn subterm(&self, path: &[usize]) -> Option<&Term> {
        match path.split_first() {
            None => Some(self),
            Some((i, rest)) => self.args().get(*i)?.subterm(rest),
        }
    }

    pub fn replace_at(&self, path: &[usize], replacement: Term) -> Term {
        match (path.split_first(), self) {
            (None, _) => replacement,
            (Some((i, rest)), Term::App(op, args)) => {
                let mut args = args.clone();
                args[*i] = args[*i].replace_at(rest, replacement);
                Term::App(op.clone(), args)
            }
            (Some(_), Term::Var(_)) => self.clone(),
        }
    }

    /// All subterms with their positions, pre-order.
    pub fn positions(&self) -> Vec<(Vec<usize>, &Term)> {
        let mut out = Vec::new();
        self.walk(&mut Vec::new(), &mut out);
        out
    }

    fn walk<'a>(&'a self, path: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, &'a Term)>) {
        out.push((path.clone(), self));
        for (i, a) in self.args().iter().enumerate() {
            path.push(i);
            a.walk(path, out);
            path.pop();
        }
    }

    pub fn apply(&self, subst: &Substitution) -> Term {
        apply_substitution(self, subst)
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::parser::render_term(self))
    }
}

/// Returns the sort of `t`, checking every node against `sig`.
pub fn well_sorted(t: &Term, sig: &Signature) -> Result<Sort, SortError> {
    match t {
        Term::Var(v) => Ok(v.sort.clone()),
        Term::App(op, args) => {
            if !sig.contains_op(op) {
                return Err(SortError::UnknownOp(op.to_string()));
            }
            for a in args {
                well_sorted(a, sig)?;
            }
            t.check_root()?;
            Ok(op.result.clone())
        }
    }
}

pub fn is_ground(t: &Term) -> bool {
    t.is_ground()
}

pub fn variables_of(t: &Term) -> BTreeSet<Variable> {
    t.variables()
}

pub fn term_size(t: &Term) -> usize {
    t.size()
}

/// A finite, sort-preserving map from variables to terms.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Substitution(BTreeMap<Variable, Term>);

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    /// Panics if the image sort differs from the variable's sort.
    pub fn insert(&mut self, v: Variable, t: Term) {
        assert_eq!(&v.sort, t.sort(), "substitution must preserve sorts");
        self.0.insert(v, t);
    }

    pub fn get(&self, v: &Variable) -> Option<&Term> {
        self.0.get(v)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Variable, &Term)> {
        self.0.iter()
    }

    pub fn domain(&self) -> impl Iterator<Item = &Variable> {
        self.0.keys()
    }

    /// `t.apply(&a.then(&b)) == t.apply(&a).apply(&b)`.
    pub fn then(&self, next: &Substitution) -> Substitution {
        let mut out: BTreeMap<Variable, Term> = self
            .0
            .iter()
            .map(|(v, t)| (v.clone(), t.apply(next)))
            .collect();
        for (v, t) in &next.0 {
            out.entry(v.clone()).or_insert_with(|| t.clone());
        }
        Substitution(out)
    }

    pub fn restrict<'a>(&self, vars: impl IntoIterator<Item = &'a Variable>) -> Substitution {
        Substitution(
            vars.into_iter()
                .filter_map(|v| self.0.get(v).map(|t| (v.clone(), t.clone())))
                .collect(),
        )
    }
}

impl FromIterator<(Variable, Term)> for Substitution {
    fn from_iter<I: IntoIterator<Item = (Variable, Term)>>(iter: I) -> Self {
        let mut s = Substitution::new();
        for (v, t) in iter {
            s.insert(v, t);
        }
        s
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(v, t)| format!("{} -> {}", v.name, t))
            .collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// Simultaneous replacement; variables outside the domain stay in place.
pub fn apply_substitution(t: &Term, subst: &Substitution) -> Term {
    match t {
        Term::Var(v) => subst.get(v).cloned().unwrap_or_else(|| t.clone()),
        Term::App(op, args) => Term::App(
            op.clone(),
            args.iter().map(|a| apply_substitution(a, subst)).collect(),
        ),
    }
}

/// One-way matching: finds `s` with `pattern.apply(&s) == target`.
pub fn match_term(pattern: &Term, target: &Term) -> Option<Substitution> {
    let mut s = Substitution::new();
    match_into(pattern, target, &mut s).then_some(s)
}

pub(crate) fn match_into(pattern: &Term, target: &Term, s: &mut Substitution) -> bool {
    match (pattern, target) {
        (Term::Var(v), _) => {
            if v.sort != *target.sort() {
                return false;
            }
            match s.get(v) {
                Some(bound) => bound == target,
                None => {
                    s.insert(v.clone(), target.clone());
                    true
                }
            }
        }
        (Term::App(f, fargs), Term::App(g, gargs)) => {
            f == g && fargs.iter().zip(gargs).all(|(p, t)| match_into(p, t, s))
        }
        (Term::App(..), Term::Var(_)) => false,
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Equation {
    pub lhs: Term,
    pub rhs: Term,
}

impl Equation {
    pub fn new(lhs: Term, rhs: Term) -> Result<Self, SortError> {
        if lhs.sort() != rhs.sort() {
            return Err(SortError::EquationSides(lhs.sort().clone(), rhs.sort().clone()));
        }
        Ok(Equation { lhs, rhs })
    }

    pub fn sort(&self) -> &Sort {
        self.lhs.sort()
    }

    pub fn apply(&self, s: &Substitution) -> Equation {
        Equation {
            lhs: self.lhs.apply(s),
            rhs: self.rhs.apply(s),
        }
    }

    pub fn is_ground(&self) -> bool {
        self.lhs.is_ground() && self.rhs.is_ground()
    }

    pub fn swapped(&self) -> Equation {
        Equation {
            lhs: self.rhs.clone(),
            rhs: self.lhs.clone(),
        }
    }

    pub fn variables_ordered(&self, out: &mut Vec<Variable>) {
        self.lhs.variables_ordered(out);
        self.rhs.variables_ordered(out);
    }
}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.lhs, self.rhs)
    }
}

impl fmt::Debug for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// `premises => conclusion`, with an empty premise list for plain equations.
#[derive(Clone, Debug)]
pub struct ConditionalAxiom {
    pub label: String,
    pub premises: Vec<Equation>,
    pub conclusion: Equation,
    pub span: Option<SourceSpan>,
    /// Name of the specification that declared the axiom.
    pub origin: String,
}

impl PartialEq for ConditionalAxiom {
    fn eq(&self, other: &Self) -> bool {
        self.label == other.label
            && self.premises == other.premises
            && self.conclusion == other.conclusion
    }
}

impl ConditionalAxiom {
    pub fn variables_ordered(&self) -> Vec<Variable> {
        let mut out = Vec::new();
        self.conclusion.variables_ordered(&mut out);
        for p in &self.premises {
            p.variables_ordered(&mut out);
        }
        out
    }
}

impl fmt::Display for ConditionalAxiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] ", self.label)?;
        if !self.premises.is_empty() {
            let ps: Vec<String> = self.premises.iter().map(|p| p.to_string()).collect();
            write!(f, "{} => ", ps.join(" & "))?;
        }
        write!(f, "{}", self.conclusion)
    }
}

/// A flattened specification: imports are already merged in.
#[derive(Clone, Debug)]
pub struct Specification {
    pub name: String,
    pub signature: Signature,
    pub axioms: Vec<ConditionalAxiom>,
    pub imports: Vec<String>,
}

impl PartialEq for Specification {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.signature == other.signature && self.axioms == other.axioms
    }
}

impl Specification {
    pub fn axiom(&self, label: &str) -> Option<&ConditionalAxiom> {
        self.axioms.iter().find(|a| a.label == label)
    }

    /// Axioms declared by this specification itself, not by its imports.
    pub fn own_axioms(&self) -> impl Iterator<Item = &ConditionalAxiom> {
        self.axioms.iter().filter(move |a| a.origin == self.name)
    }

    /// Hex SHA-256 of the canonical rendering.
    pub fn content_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        hex::encode(Sha256::digest(crate::parser::render_spec(self).as_bytes()))
    }

    /// Same specification with a different observable sort set.
    pub fn with_observable<'a>(&self, sorts: impl IntoIterator<Item = &'a Sort>) -> Specification {
        let mut spec = self.clone();
        spec.signature.observable = sorts.into_iter().cloned().collect();
        spec
    }

    pub fn all_observable(&self) -> Specification {
        let sorts = self.signature.sorts.clone();
        self.with_observable(sorts.iter())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn containers() -> Signature {
        let mut sig = Signature::default();
        for s in ["Nat", "Bool", "Container"] {
            sig.sorts.push(Sort::new(s));
        }
        let ops = [
            OpSymbol::new("0", &[], "Nat", true),
            OpSymbol::new("succ", &["Nat"], "Nat", true),
            OpSymbol::new("true", &[], "Bool", true),
            OpSymbol::new("false", &[], "Bool", true),
            OpSymbol::new("[]", &[], "Container", true),
            OpSymbol::new("::", &["Nat", "Container"], "Container", true),
            OpSymbol::new("isin", &["Nat", "Container"], "Bool", false),
        ];
        sig.ops = ops.into_iter().map(Arc::new).collect();
        sig.vars = vec![
            Variable::new("x", &Sort::new("Nat")),
            Variable::new("c", &Sort::new("Container")),
        ];
        sig.observable = sig.sorts.iter().cloned().collect();
        sig
    }

    fn op(sig: &Signature, name: &str) -> Arc<OpSymbol> {
        sig.ops.iter().find(|o| o.name == name).unwrap().clone()
    }

    #[test]
    fn clean_signature_has_no_defects() {
        assert!(validate_signature(&containers()).is_empty());
    }

    #[test]
    fn uninhabited_sort_is_reported() {
        let mut sig = containers();
        sig.sorts.push(Sort::new("Void"));
        assert_eq!(
            validate_signature(&sig),
            vec![Defect::UninhabitedSort("Void".into())]
        );
        // a sort whose only constructor is recursive is uninhabited too
        sig.ops
            .push(Arc::new(OpSymbol::new("wrap", &["Void"], "Void", true)));
        assert_eq!(
            validate_signature(&sig),
            vec![Defect::UninhabitedSort("Void".into())]
        );
    }

    #[test]
    fn duplicate_operation_is_reported() {
        let mut sig = containers();
        sig.ops
            .push(Arc::new(OpSymbol::new("isin", &["Nat", "Container"], "Bool", false)));
        let defects = validate_signature(&sig);
        assert_eq!(defects.len(), 1);
        assert!(defects[0].to_string().starts_with("duplicate operation"));
        assert!(defects[0].to_string().contains("isin"));
    }

    #[test]
    fn sort_of_terms() {
        let sig = containers();
        let x = Term::var(sig.var("x").unwrap());
        let c = Term::var(sig.var("c").unwrap());
        let zero = Term::constant(&op(&sig, "0"));
        let cons = Term::app(&op(&sig, "::"), vec![zero.clone(), c]).unwrap();
        let t = Term::app(&op(&sig, "isin"), vec![x, cons]).unwrap();
        assert_eq!(well_sorted(&t, &sig).unwrap(), Sort::new("Bool"));
        let empty = Term::constant(&op(&sig, "[]"));
        assert_eq!(well_sorted(&empty, &sig).unwrap(), Sort::new("Container"));

        let tt = Term::constant(&op(&sig, "true"));
        let err = Term::app(&op(&sig, "::"), vec![zero, tt]).unwrap_err();
        assert!(matches!(err, SortError::Mismatch { position: 2, .. }));
    }

    #[test]
    fn ill_sorted_raw_term_is_caught() {
        let sig = containers();
        let bad = Term::App(
            op(&sig, "::"),
            vec![Term::constant(&op(&sig, "0")), Term::constant(&op(&sig, "true"))],
        );
        let wrapped = Term::App(op(&sig, "isin"), vec![Term::constant(&op(&sig, "0")), bad]);
        match well_sorted(&wrapped, &sig) {
            Err(SortError::Mismatch { term, position, .. }) => {
                assert_eq!(position, 2);
                assert_eq!(term, "0 :: true");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn substitution_example() {
        let sig = containers();
        let nat = Sort::new("Nat");
        let x = sig.var("x").unwrap().clone();
        let y = Variable::new("y", &nat);
        let c = sig.var("c").unwrap().clone();
        let zero = Term::constant(&op(&sig, "0"));
        let empty = Term::constant(&op(&sig, "[]"));
        let cons = |h: Term, t: Term| Term::app(&op(&sig, "::"), vec![h, t]).unwrap();
        let t = Term::app(&op(&sig, "isin"), vec![Term::var(&x), cons(zero.clone(), Term::var(&c))])
            .unwrap();
        let sigma: Substitution = [
            (x.clone(), zero.clone()),
            (y.clone(), zero.clone()),
            (c.clone(), cons(Term::var(&y), empty.clone())),
        ]
        .into_iter()
        .collect();
        let inst = t.apply(&sigma);
        assert_eq!(inst.to_string(), "isin(0, 0 :: y :: [])");
        assert!(!inst.is_ground());
        assert_eq!(t.apply(&Substitution::new()), t);
        let ground = cons(zero.clone(), cons(zero, empty));
        assert!(ground.is_ground());
        assert_eq!(ground.apply(&sigma), ground);
        let vars: Vec<_> = t.variables().into_iter().map(|v| v.name.to_string()).collect();
        assert_eq!(vars, vec!["c", "x"]);
        assert_eq!(term_size(&Term::constant(&op(&sig, "[]"))), 1);
        assert_eq!(t.size(), 5);
    }

    #[test]
    fn matching_binds_consistently() {
        let sig = containers();
        let x = Term::var(sig.var("x").unwrap());
        let zero = Term::constant(&op(&sig, "0"));
        let one = Term::app(&op(&sig, "succ"), vec![zero.clone()]).unwrap();
        let cons = |h: Term, t: Term| Term::app(&op(&sig, "::"), vec![h, t]).unwrap();
        let empty = Term::constant(&op(&sig, "[]"));
        let pat = cons(x.clone(), cons(x, empty.clone()));
        assert!(match_term(&pat, &cons(zero.clone(), cons(zero.clone(), empty.clone()))).is_some());
        assert!(match_term(&pat, &cons(zero, cons(one, empty))).is_none());
    }
}
