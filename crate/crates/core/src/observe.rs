//! Observable contexts and observational test suites.
//!
//! An equation between values of a non-observable sort cannot be checked by
//! comparing the values. It is checked instead through contexts `c[z]`:
//! terms of observable sort with a single hole `z`, so that `c[t] = c[t']`
//! compares observable results. Only minimal contexts are used, those with no
//! observable strict subterm above the hole.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::enumerate::{TermEnumerator, TupleIndex};
use crate::rewrite::{orient, TriState};
use crate::select::{decompose, instantiate_all, HypothesisError, Hypotheses, Skip, TestCase, TestSuite};
use crate::term::{Equation, Signature, Sort, Specification, Substitution, Term, Variable};

pub const HOLE: &str = "z";

/// Reason recorded for axioms whose non-observable premises cannot be
/// settled by evaluation.
pub const NON_OBSERVABLE_PREMISE: &str = "non-observable premise: context expansion forbidden";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservationPlan {
    /// Largest node count of a context body, the hole excluded.
    pub context_depth: usize,
    pub contexts_per_test: usize,
    /// Largest node count of a ground term substituted for a parameter.
    pub parameter_bound: usize,
}

impl Default for ObservationPlan {
    fn default() -> Self {
        ObservationPlan {
            context_depth: 5,
            contexts_per_test: 4,
            parameter_bound: 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("observation plan fields must all be at least 1")]
pub struct PlanError;

impl ObservationPlan {
    pub fn validate(&self) -> Result<(), PlanError> {
        if self.context_depth == 0 || self.contexts_per_test == 0 || self.parameter_bound == 0 {
            return Err(PlanError);
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ObservableContext {
    pub body: Term,
    pub hole: Variable,
    pub result_sort: Sort,
}

impl ObservableContext {
    pub fn hole_sort(&self) -> &Sort {
        &self.hole.sort
    }

    /// Parameter variables in pre-order, the hole excluded.
    pub fn parameters(&self) -> Vec<Variable> {
        let mut vars = Vec::new();
        self.body.variables_ordered(&mut vars);
        vars.retain(|v| *v != self.hole);
        vars
    }

    /// Node count of the body, the hole excluded.
    pub fn size(&self) -> usize {
        self.body.size() - 1
    }

    pub fn plug(&self, t: &Term) -> Term {
        let s: Substitution = [(self.hole.clone(), t.clone())].into_iter().collect();
        self.body.apply(&s)
    }

    /// Exactly one hole, observable result, no observable strict subterm
    /// containing the hole.
    pub fn is_minimal(&self, sig: &Signature) -> bool {
        if self.body.count_occurrences(&self.hole) != 1 || !sig.is_observable(self.body.sort()) {
            return false;
        }
        self.body.positions().iter().all(|(path, sub)| {
            path.is_empty() || !sub.occurs(&self.hole) || !sig.is_observable(sub.sort())
        })
    }
}

impl fmt::Display for ObservableContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.body)
    }
}

// One-hole terms of `sort` with exactly `size` nodes besides the hole.
// Parameters are left as placeholders and named afterwards.
struct Shapes<'a> {
    sig: &'a Signature,
    hole: Variable,
    memo: HashMap<(Sort, usize), Vec<Term>>,
}

const PARAM: &str = "?";

impl Shapes<'_> {
    fn holed(&mut self, sort: &Sort, size: usize) -> Vec<Term> {
        if size == 0 {
            return if *sort == self.hole.sort {
                vec![Term::var(&self.hole)]
            } else {
                Vec::new()
            };
        }
        if let Some(hit) = self.memo.get(&(sort.clone(), size)) {
            return hit.clone();
        }
        let mut out = Vec::new();
        let ops: Vec<_> = self.sig.ops.iter().filter(|o| &o.result == sort && o.arity() > 0).cloned().collect();
        for op in ops {
            // the other arguments are one-node parameters
            let rest = op.arity() - 1;
            if size < 1 + rest {
                continue;
            }
            for i in 0..op.arity() {
                for inner in self.holed(&op.arg_sorts[i], size - 1 - rest) {
                    let args = op
                        .arg_sorts
                        .iter()
                        .enumerate()
                        .map(|(j, s)| {
                            if j == i {
                                inner.clone()
                            } else {
                                Term::var(&Variable::new(PARAM, s))
                            }
                        })
                        .collect();
                    out.push(Term::App(op.clone(), args));
                }
            }
        }
        self.memo.insert((sort.clone(), size), out.clone());
        out
    }
}

fn name_parameters(t: &Term, next: &mut usize) -> Term {
    match t {
        Term::Var(v) if &*v.name == PARAM => {
            let name = if *next == 0 { "x".to_string() } else { format!("x{next}") };
            *next += 1;
            Term::var(&Variable::new(&name, &v.sort))
        }
        Term::Var(_) => t.clone(),
        Term::App(op, args) => Term::App(op.clone(), args.iter().map(|a| name_parameters(a, next)).collect()),
    }
}

/// Minimal observable contexts over `hole_sort` with bodies of at most
/// `plan.context_depth` nodes, smallest first. An observable hole sort has
/// the single context `z`.
pub fn enumerate_minimal_contexts(spec: &Specification, hole_sort: &Sort, plan: &ObservationPlan) -> Vec<ObservableContext> {
    let sig = &spec.signature;
    let hole = Variable::new(HOLE, hole_sort);
    if sig.is_observable(hole_sort) {
        return vec![ObservableContext {
            body: Term::var(&hole),
            hole: hole.clone(),
            result_sort: hole_sort.clone(),
        }];
    }
    let mut shapes = Shapes {
        sig,
        hole: hole.clone(),
        memo: HashMap::new(),
    };
    let mut out = Vec::new();
    for size in 1..=plan.context_depth {
        for sort in sig.sorts.iter().filter(|s| sig.is_observable(s)) {
            for body in shapes.holed(sort, size) {
                let ctx = ObservableContext {
                    body: name_parameters(&body, &mut 0),
                    hole: hole.clone(),
                    result_sort: sort.clone(),
                };
                if ctx.is_minimal(sig) {
                    out.push(ctx);
                }
            }
        }
    }
    out
}

/// `c[lhs] = c[rhs]` for up to `plan.contexts_per_test` instantiated
/// contexts, taken round-robin over `contexts`. Parameters are filled with
/// ground constructor terms in enumeration order. Tests of observable sort
/// are returned unchanged.
pub fn observe_test(tc: &TestCase, contexts: &[ObservableContext], plan: &ObservationPlan, sig: &Signature) -> Vec<TestCase> {
    if sig.is_observable(tc.sort()) {
        return vec![tc.clone()];
    }
    let mut en = TermEnumerator::constructors(sig);
    let mut streams = Vec::new();
    for ctx in contexts.iter().filter(|c| c.hole_sort() == tc.sort()) {
        let params = ctx.parameters();
        let pools: Vec<Vec<Term>> = params.iter().map(|p| en.up_to(&p.sort, plan.parameter_bound)).collect();
        let idx = TupleIndex::new(pools.iter().map(Vec::len).collect());
        streams.push((ctx, params, pools, idx));
    }
    let mut out = Vec::new();
    let mut round: u128 = 0;
    while out.len() < plan.contexts_per_test {
        let mut any = false;
        for (ctx, params, pools, idx) in &streams {
            if out.len() >= plan.contexts_per_test {
                break;
            }
            if round >= idx.len() {
                continue;
            }
            any = true;
            let rho: Substitution = params
                .iter()
                .zip(pools)
                .zip(idx.digits(round))
                .map(|((p, pool), d)| (p.clone(), pool[d].clone()))
                .collect();
            let body = ctx.body.apply(&rho);
            let inst = ObservableContext {
                body,
                hole: ctx.hole.clone(),
                result_sort: ctx.result_sort.clone(),
            };
            out.push(TestCase {
                id: format!("{}@{}", tc.id, out.len() + 1),
                equation: Equation {
                    lhs: inst.plug(&tc.equation.lhs),
                    rhs: inst.plug(&tc.equation.rhs),
                },
                subdomain_id: tc.subdomain_id.clone(),
                source_axiom: tc.source_axiom.clone(),
                instantiation: tc.instantiation.clone(),
                premises: tc.premises.clone(),
                applied_context: Some(inst.to_string()),
            });
        }
        if !any {
            break;
        }
        round += 1;
    }
    out
}

#[derive(Debug, Error)]
pub enum ObserveError {
    #[error(transparent)]
    Hypotheses(#[from] HypothesisError),
    #[error(transparent)]
    Plan(#[from] PlanError),
}

/// Selection as in [`crate::select::generate`], then every test of a
/// non-observable sort is replaced by its observations.
pub fn generate_observational(spec: &Specification, hyp: &Hypotheses, plan: &ObservationPlan) -> Result<TestSuite, ObserveError> {
    hyp.validate()?;
    plan.validate()?;
    let sig = &spec.signature;
    let crs = orient(spec);
    let dec = decompose(spec, hyp);
    let mut suite = TestSuite::empty(spec, hyp.clone());
    suite.plan = Some(plan.clone());
    suite.observable = Some(
        sig.sorts
            .iter()
            .filter(|s| sig.is_observable(s))
            .map(|s| s.name().to_string())
            .collect(),
    );
    suite.skipped = dec.skipped;
    let mut contexts: HashMap<Sort, Vec<ObservableContext>> = HashMap::new();
    let results = instantiate_all(&crs, &dec.leaves, hyp);
    for (leaf, result) in dec.leaves.iter().zip(results) {
        let tests = match result {
            Ok(tests) => tests,
            Err(e) => {
                let hidden = leaf.constraints.iter().any(|c| !sig.is_observable(c.sort()));
                let reason = if hidden {
                    format!("{NON_OBSERVABLE_PREMISE} ({e})")
                } else {
                    e.to_string()
                };
                suite.skipped.push(Skip {
                    subdomain: leaf.id.clone(),
                    reason,
                });
                continue;
            }
        };
        for tc in tests {
            if !hyp.keep_tautologies && tc.equation.lhs == tc.equation.rhs && tc.equation.lhs.is_constructor_term() {
                continue;
            }
            // premises were settled by evaluation, never through contexts
            debug_assert!(tc.premises.iter().all(|p| crs.holds(p, hyp.fuel) == TriState::Holds));
            let sort = tc.sort().clone();
            let ctxs = contexts
                .entry(sort.clone())
                .or_insert_with(|| enumerate_minimal_contexts(spec, &sort, plan));
            if ctxs.is_empty() {
                suite.skipped.push(Skip {
                    subdomain: tc.id.clone(),
                    reason: format!("no minimal observable context over sort {sort}"),
                });
                continue;
            }
            suite.tests.extend(observe_test(&tc, ctxs, plan, sig));
        }
    }
    Ok(suite)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::parser::parse_term;

    fn containers() -> Specification {
        catalog::containers()
    }

    #[test]
    fn container_contexts() {
        let spec = containers();
        let plan = ObservationPlan {
            context_depth: 4,
            ..ObservationPlan::default()
        };
        let ctxs = enumerate_minimal_contexts(&spec, &Sort::new("Container"), &plan);
        let shown: Vec<String> = ctxs.iter().map(|c| c.to_string()).collect();
        assert_eq!(shown[0], "isin(x, z)");
        for want in ["isin(x, x1 :: z)", "isin(x, remove(x1, z))"] {
            assert!(shown.contains(&want.to_string()), "{shown:?}");
        }
        assert!(!shown.iter().any(|s| s.starts_with("notb")));
        assert!(ctxs.iter().all(|c| c.is_minimal(&spec.signature) && c.size() <= 4));
    }

    #[test]
    fn observable_hole_is_trivial() {
        let spec = containers();
        let ctxs = enumerate_minimal_contexts(&spec, &Sort::new("Bool"), &ObservationPlan::default());
        assert_eq!(ctxs.len(), 1);
        assert_eq!(ctxs[0].to_string(), "z");
    }

    #[test]
    fn wrapping_remove() {
        let spec = containers();
        let sig = &spec.signature;
        let tc = TestCase {
            id: "t".into(),
            equation: Equation::new(parse_term("remove(3, [])", sig).unwrap(), parse_term("[]", sig).unwrap()).unwrap(),
            subdomain_id: "remove_empty".into(),
            source_axiom: "remove_empty".into(),
            instantiation: Substitution::new(),
            premises: vec![],
            applied_context: None,
        };
        let hole = Variable::new(HOLE, &Sort::new("Container"));
        let body = parse_term("isin(3, remove(0, []))", sig)
            .unwrap()
            .replace_at(&[1], Term::var(&hole));
        let ctx = ObservableContext {
            body,
            hole,
            result_sort: Sort::new("Bool"),
        };
        let out = observe_test(&tc, &[ctx], &ObservationPlan::default(), sig);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].equation.to_string(), "isin(3, remove(3, [])) = isin(3, [])");
        assert_eq!(out[0].applied_context.as_deref(), Some("isin(3, z)"));
    }

    #[test]
    fn observational_suite_is_observable() {
        let spec = containers();
        let suite = generate_observational(&spec, &Hypotheses::default(), &ObservationPlan::default()).unwrap();
        assert!(suite.tests.iter().all(|t| spec.signature.is_observable(t.sort())));
        assert!(suite.tests.iter().any(|t| t.applied_context.is_some()));
        let all = spec.all_observable();
        let plain = crate::select::generate(&all, &Hypotheses::default()).unwrap();
        let obs = generate_observational(&all, &Hypotheses::default(), &ObservationPlan::default()).unwrap();
        assert_eq!(plain.tests, obs.tests);
    }
}
