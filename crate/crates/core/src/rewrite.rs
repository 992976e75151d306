//! Conditional rewriting over oriented axioms.
//!
//! Every axiom `p1 & ... & pn => l = r` becomes the rule `l -> r if p1..pn`
//! when `l` is a defined symbol applied to constructor patterns. Ground terms
//! are normalized innermost first; a rule fires only when each of its
//! instantiated conditions normalizes to one identical constructor term on
//! both sides. Evaluation is bounded by [`Fuel`], so nontermination surfaces
//! as a status rather than a hang.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog;
use crate::enumerate::TermEnumerator;
use crate::parser::{self, SpecError};
use crate::term::{match_term, Equation, OpSymbol, Specification, Term, Variable};

// Recursion guard on term nesting during normalization. Exceeding it is
// reported like running out of steps.
const MAX_NESTING: usize = 512;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fuel {
    pub max_steps: usize,
    pub max_condition_depth: usize,
}

impl Default for Fuel {
    fn default() -> Self {
        Fuel {
            max_steps: 10_000,
            max_condition_depth: 8,
        }
    }
}

impl Fuel {
    pub fn steps(max_steps: usize) -> Self {
        Fuel {
            max_steps,
            ..Fuel::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnknownReason {
    FuelExhausted,
    StuckTerm,
}

impl fmt::Display for UnknownReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UnknownReason::FuelExhausted => "fuel-exhausted",
            UnknownReason::StuckTerm => "stuck-term",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TriState {
    Holds,
    FailsToHold,
    Unknown(UnknownReason),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NormalStatus {
    Normal,
    FuelExhausted,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RewriteRule {
    pub label: String,
    pub conditions: Vec<Equation>,
    pub lhs: Term,
    pub rhs: Term,
}

impl RewriteRule {
    pub fn head(&self) -> &Arc<OpSymbol> {
        self.lhs.head().expect("rule lhs is an application")
    }

    pub fn is_conditional(&self) -> bool {
        !self.conditions.is_empty()
    }
}

impl fmt::Display for RewriteRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {} -> {}", self.label, self.lhs, self.rhs)?;
        if !self.conditions.is_empty() {
            let cs: Vec<String> = self.conditions.iter().map(|c| c.to_string()).collect();
            write!(f, " if {}", cs.join(" & "))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OrientDefect {
    NonOrientable { label: String, reason: String },
    ExtraVariable { label: String, vars: Vec<String> },
    ConstructorHeadedLhs { label: String, symbol: String },
}

impl OrientDefect {
    pub fn label(&self) -> &str {
        match self {
            OrientDefect::NonOrientable { label, .. }
            | OrientDefect::ExtraVariable { label, .. }
            | OrientDefect::ConstructorHeadedLhs { label, .. } => label,
        }
    }
}

impl fmt::Display for OrientDefect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrientDefect::NonOrientable { label, reason } => {
                write!(f, "[{label}] non-orientable axiom: {reason}")
            }
            OrientDefect::ExtraVariable { label, vars } => {
                write!(f, "[{label}] extra variable: {}", vars.join(", "))
            }
            OrientDefect::ConstructorHeadedLhs { label, symbol } => {
                write!(f, "[{label}] constructor-headed lhs: {symbol}")
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct ConditionalRewriteSystem {
    pub rules: Vec<RewriteRule>,
    pub source: Arc<Specification>,
    pub defects: Vec<OrientDefect>,
}

/// Orients every axiom left to right; axioms that do not have the rule shape
/// are left out and reported.
pub fn orient(spec: &Specification) -> ConditionalRewriteSystem {
    let mut rules = Vec::new();
    let mut defects = Vec::new();
    for ax in &spec.axioms {
        let label = ax.label.clone();
        let lhs = &ax.conclusion.lhs;
        let Some(head) = lhs.head() else {
            defects.push(OrientDefect::NonOrientable {
                label,
                reason: format!("lhs `{lhs}` is a variable"),
            });
            continue;
        };
        if head.constructor {
            defects.push(OrientDefect::ConstructorHeadedLhs {
                label,
                symbol: head.name.clone(),
            });
            continue;
        }
        if let Some(bad) = lhs.args().iter().find(|a| !a.is_constructor_pattern()) {
            defects.push(OrientDefect::NonOrientable {
                label,
                reason: format!("argument `{bad}` is not a constructor pattern"),
            });
            continue;
        }
        let bound = lhs.variables();
        let mut extra: BTreeSet<Variable> = ax.conclusion.rhs.variables();
        for p in &ax.premises {
            extra.extend(p.lhs.variables());
            extra.extend(p.rhs.variables());
        }
        let extra: Vec<String> = extra
            .difference(&bound)
            .map(|v| v.name.to_string())
            .collect();
        if !extra.is_empty() {
            defects.push(OrientDefect::ExtraVariable { label, vars: extra });
            continue;
        }
        rules.push(RewriteRule {
            label,
            conditions: ax.premises.clone(),
            lhs: lhs.clone(),
            rhs: ax.conclusion.rhs.clone(),
        });
    }
    ConditionalRewriteSystem {
        rules,
        source: Arc::new(spec.clone()),
        defects,
    }
}

/// Rule selection order. `Leftmost` is the engine's strategy; `Rightmost`
/// visits arguments right to left and prefers later rules, and exists to
/// cross-check ground confluence.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RewriteStrategy {
    Leftmost,
    Rightmost,
}

impl ConditionalRewriteSystem {
    pub fn is_partial(&self) -> bool {
        !self.defects.is_empty()
    }

    /// Rules headed by `op`, in axiom order.
    pub fn rules_for<'a>(&'a self, op: &'a OpSymbol) -> impl Iterator<Item = &'a RewriteRule> + 'a {
        self.rules.iter().filter(move |r| **r.head() == *op)
    }

    /// Non-constructor symbols heading at least one rule.
    pub fn is_defined(&self, op: &OpSymbol) -> bool {
        !op.constructor && self.rules.iter().any(|r| **r.head() == *op)
    }

    pub fn normalize(&self, t: &Term, fuel: Fuel) -> (Term, NormalStatus) {
        self.normalize_with(t, fuel, RewriteStrategy::Leftmost)
    }

    pub fn normalize_with(&self, t: &Term, fuel: Fuel, strategy: RewriteStrategy) -> (Term, NormalStatus) {
        let mut engine = Engine::new(self, fuel, strategy);
        let nf = engine.norm(t.clone(), 0, 0);
        (nf, engine.status())
    }

    pub fn holds(&self, e: &Equation, fuel: Fuel) -> TriState {
        let mut engine = Engine::new(self, fuel, RewriteStrategy::Leftmost);
        engine.eval_eq(e, 0, 0)
    }
}

pub fn normalize(crs: &ConditionalRewriteSystem, t: &Term, fuel: Fuel) -> (Term, NormalStatus) {
    crs.normalize(t, fuel)
}

/// Bounded ground approximation of semantic consequence. Each side gets its
/// own step budget.
pub fn holds(crs: &ConditionalRewriteSystem, e: &Equation, fuel: Fuel) -> TriState {
    crs.holds(e, fuel)
}

struct Engine<'a> {
    crs: &'a ConditionalRewriteSystem,
    fuel: Fuel,
    strategy: RewriteStrategy,
    steps: usize,
    exhausted: bool,
}

impl<'a> Engine<'a> {
    fn new(crs: &'a ConditionalRewriteSystem, fuel: Fuel, strategy: RewriteStrategy) -> Self {
        Engine {
            crs,
            fuel,
            strategy,
            steps: 0,
            exhausted: false,
        }
    }

    fn status(&self) -> NormalStatus {
        if self.exhausted {
            NormalStatus::FuelExhausted
        } else {
            NormalStatus::Normal
        }
    }

    fn compare(l: &Term, r: &Term) -> TriState {
        if !(l.is_constructor_term() && r.is_constructor_term()) {
            TriState::Unknown(UnknownReason::StuckTerm)
        } else if l == r {
            TriState::Holds
        } else {
            TriState::FailsToHold
        }
    }

    fn eval_eq(&mut self, e: &Equation, depth: usize, nesting: usize) -> TriState {
        if depth > self.fuel.max_condition_depth {
            self.exhausted = true;
            return TriState::Unknown(UnknownReason::FuelExhausted);
        }
        let budget = self.steps;
        let l = self.norm(e.lhs.clone(), depth, nesting);
        if depth == 0 {
            // top-level sides are budgeted separately
            self.steps = budget;
        }
        let r = self.norm(e.rhs.clone(), depth, nesting);
        if self.exhausted {
            return TriState::Unknown(UnknownReason::FuelExhausted);
        }
        Self::compare(&l, &r)
    }

    fn norm(&mut self, mut t: Term, depth: usize, nesting: usize) -> Term {
        if nesting > MAX_NESTING {
            self.exhausted = true;
            return t;
        }
        loop {
            let Term::App(op, args) = t else { return t };
            let mut args = args;
            let order: Vec<usize> = match self.strategy {
                RewriteStrategy::Leftmost => (0..args.len()).collect(),
                RewriteStrategy::Rightmost => (0..args.len()).rev().collect(),
            };
            for i in order {
                let a = std::mem::replace(&mut args[i], Term::App(op.clone(), Vec::new()));
                args[i] = self.norm(a, depth, nesting + 1);
                if self.exhausted {
                    return Term::App(op, args);
                }
            }
            let current = Term::App(op.clone(), args);
            if op.constructor {
                return current;
            }
            match self.fire(&current, depth, nesting) {
                Some(next) => t = next,
                None => return current,
            }
            if self.exhausted {
                return t;
            }
        }
    }

    // One rewrite step at the root, if any rule applies.
    fn fire(&mut self, t: &Term, depth: usize, nesting: usize) -> Option<Term> {
        let op = t.head()?;
        let candidates: Vec<&RewriteRule> = match self.strategy {
            RewriteStrategy::Leftmost => self.crs.rules_for(op).collect(),
            RewriteStrategy::Rightmost => {
                let mut v: Vec<_> = self.crs.rules_for(op).collect();
                v.reverse();
                v
            }
        };
        'rules: for rule in candidates {
            let Some(sigma) = match_term(&rule.lhs, t) else {
                continue;
            };
            for c in &rule.conditions {
                match self.eval_eq(&c.apply(&sigma), depth + 1, nesting + 1) {
                    TriState::Holds => {}
                    _ if self.exhausted => return None,
                    _ => continue 'rules,
                }
            }
            if self.steps >= self.fuel.max_steps {
                self.exhausted = true;
                return None;
            }
            self.steps += 1;
            return Some(rule.rhs.apply(&sigma));
        }
        None
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WitnessReason {
    Stuck(Term),
    FuelExhausted,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompletenessWitness {
    pub term: Term,
    pub reason: WitnessReason,
}

impl fmt::Display for CompletenessWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.reason {
            WitnessReason::Stuck(nf) => write!(f, "{} is stuck at {}", self.term, nf),
            WitnessReason::FuelExhausted => write!(f, "{} ran out of fuel", self.term),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct CompletenessReport {
    pub checked: usize,
    pub condition1_witnesses: Vec<CompletenessWitness>,
    /// Orientation defects that would let a rule rewrite a constructor term,
    /// plus any enumerated constructor term that did not normalize to itself.
    pub condition2_witnesses: Vec<String>,
}

impl CompletenessReport {
    pub fn is_complete(&self) -> bool {
        self.condition1_witnesses.is_empty() && self.condition2_witnesses.is_empty()
    }
}

/// Sufficient completeness with respect to the constructors, checked on
/// `f(c1, ..., cn)` for every defined `f` and ground constructor terms `ci`
/// with total size at most `size_bound`.
pub fn check_constructor_completeness(spec: &Specification, size_bound: usize, fuel: Fuel) -> CompletenessReport {
    let crs = orient(spec);
    let sig = &spec.signature;
    let mut report = CompletenessReport::default();
    let mut en = TermEnumerator::constructors(sig);
    for op in sig.ops.iter().filter(|o| !o.constructor) {
        if op.arity() + 1 > size_bound {
            continue;
        }
        let mut tuples: Vec<Vec<Term>> = vec![Vec::new()];
        for s in &op.arg_sorts {
            let pool = en.up_to(s, size_bound - op.arity());
            tuples = tuples
                .into_iter()
                .flat_map(|prefix| {
                    pool.iter().map(move |t| {
                        let mut p = prefix.clone();
                        p.push(t.clone());
                        p
                    })
                })
                .filter(|p| 1 + p.iter().map(Term::size).sum::<usize>() <= size_bound)
                .collect();
        }
        for args in tuples {
            let t = Term::App(op.clone(), args);
            report.checked += 1;
            let (nf, status) = crs.normalize(&t, fuel);
            if status == NormalStatus::FuelExhausted {
                report.condition1_witnesses.push(CompletenessWitness {
                    term: t,
                    reason: WitnessReason::FuelExhausted,
                });
            } else if !nf.is_constructor_term() {
                report.condition1_witnesses.push(CompletenessWitness {
                    term: t,
                    reason: WitnessReason::Stuck(nf),
                });
            }
        }
    }
    for d in &crs.defects {
        if matches!(d, OrientDefect::ConstructorHeadedLhs { .. }) {
            report.condition2_witnesses.push(d.to_string());
        }
    }
    for sort in &sig.sorts {
        for t in en.up_to(sort, size_bound) {
            report.checked += 1;
            let (nf, _) = crs.normalize(&t, fuel);
            if nf != t {
                report
                    .condition2_witnesses
                    .push(format!("constructor term {t} rewrites to {nf}"));
            }
        }
    }
    report
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Discrepancy {
    pub term: Term,
    pub leftmost: (Term, NormalStatus),
    pub rightmost: (Term, NormalStatus),
}

impl fmt::Display for Discrepancy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: leftmost gives {} ({:?}), rightmost gives {} ({:?})",
            self.term, self.leftmost.0, self.leftmost.1, self.rightmost.0, self.rightmost.1
        )
    }
}

#[derive(Clone, Debug, Default)]
pub struct ConfluenceReport {
    pub checked: usize,
    pub discrepancies: Vec<Discrepancy>,
}

impl ConfluenceReport {
    pub fn is_confluent(&self) -> bool {
        self.discrepancies.is_empty()
    }
}

/// Normalizes every ground term of size at most `size_bound` with up to two
/// defined symbols under both strategies and lists the terms where they
/// disagree.
pub fn check_ground_confluence(spec: &Specification, size_bound: usize, fuel: Fuel) -> ConfluenceReport {
    let crs = orient(spec);
    let mut en = TermEnumerator::new(&spec.signature, 2);
    let mut report = ConfluenceReport::default();
    for sort in &spec.signature.sorts {
        for t in en.up_to(sort, size_bound) {
            report.checked += 1;
            let l = crs.normalize_with(&t, fuel, RewriteStrategy::Leftmost);
            let r = crs.normalize_with(&t, fuel, RewriteStrategy::Rightmost);
            if l != r {
                report.discrepancies.push(Discrepancy {
                    term: t,
                    leftmost: l,
                    rightmost: r,
                });
            }
        }
    }
    report
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("fuel exhausted while evaluating {0}")]
    FuelExhausted(Term),
    #[error("{term} has no constructor normal form (stuck at {normal_form})")]
    Stuck { term: Term, normal_form: Term },
    #[error("term {0} is not ground")]
    NotGround(Term),
    #[error("unknown mutation `{0}`")]
    UnknownMutation(String),
}

/// An oriented specification used as an evaluator.
#[derive(Clone, Debug)]
pub struct Evaluator {
    pub crs: ConditionalRewriteSystem,
    pub fuel: Fuel,
}

impl Evaluator {
    pub fn new(spec: &Specification, fuel: Fuel) -> Self {
        Evaluator {
            crs: orient(spec),
            fuel,
        }
    }

    pub fn mutant(spec: &Specification, mutation: &Mutation, fuel: Fuel) -> Result<Self, SpecError> {
        Ok(Evaluator::new(&mutation.apply(spec)?, fuel))
    }

    pub fn spec(&self) -> &Specification {
        &self.crs.source
    }

    pub fn eval(&self, t: &Term) -> Result<Term, EvalError> {
        if !t.is_ground() {
            return Err(EvalError::NotGround(t.clone()));
        }
        match self.crs.normalize(t, self.fuel) {
            (_, NormalStatus::FuelExhausted) => Err(EvalError::FuelExhausted(t.clone())),
            (nf, _) if nf.is_constructor_term() => Ok(nf),
            (nf, _) => Err(EvalError::Stuck {
                term: t.clone(),
                normal_form: nf,
            }),
        }
    }
}

/// Normal form of `t` under the specification's own rules.
pub fn reference_eval(spec: &Specification, t: &Term, fuel: Fuel) -> Result<Term, EvalError> {
    Evaluator::new(spec, fuel).eval(t)
}

pub fn mutant_eval(spec: &Specification, mutation_id: &str, t: &Term, fuel: Fuel) -> Result<Term, EvalError> {
    let m = Mutation::builtin(mutation_id).ok_or_else(|| EvalError::UnknownMutation(mutation_id.to_string()))?;
    let ev = Evaluator::mutant(spec, &m, fuel).map_err(|_| EvalError::UnknownMutation(mutation_id.to_string()))?;
    ev.eval(t)
}

/// A spec patch: its `override` axioms replace same-labelled axioms of the
/// specification it is applied to, other axioms are appended.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mutation {
    pub id: String,
    pub source: String,
}

impl Mutation {
    pub fn builtin(id: &str) -> Option<Mutation> {
        catalog::mutation_source(id).map(|source| Mutation {
            id: id.to_string(),
            source: source.to_string(),
        })
    }

    pub fn from_file(path: &Path) -> Result<Mutation, SpecError> {
        let source = std::fs::read_to_string(path).map_err(|e| SpecError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        Ok(Mutation { id, source })
    }

    pub fn apply(&self, spec: &Specification) -> Result<Specification, SpecError> {
        let ast = parser::parse_ast(&self.source, Path::new(&format!("<mutation {}>", self.id)))?;
        let mut out = spec.clone();
        for ax in &ast.axioms {
            let axiom = parser::elaborate_axiom(ax, &spec.signature)?;
            match out.axioms.iter().position(|a| a.label == ax.label) {
                Some(i) if ax.is_override => out.axioms[i] = axiom,
                None if !ax.is_override => out.axioms.push(axiom),
                Some(_) => {
                    return Err(SpecError::DuplicateLabel {
                        label: ax.label.clone(),
                        span: ax.span.clone(),
                    })
                }
                None => {
                    return Err(SpecError::OverrideTarget {
                        label: ax.label.clone(),
                        span: ax.span.clone(),
                    })
                }
            }
        }
        out.name = format!("{}_{}", spec.name, self.id);
        Ok(out)
    }
}
