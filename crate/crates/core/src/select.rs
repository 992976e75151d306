//! Test selection: uniformity subdomains, unfolding, bounded instantiation.
//!
//! Each axiom of the specification under test starts as one subdomain whose
//! constraints are its premises. Unfolding replaces one call of a defined
//! function by the cases of its definition, giving one child per rule whose
//! left-hand side unifies with the call. Leaves are instantiated with ground
//! constructor terms no larger than the regularity bound; a candidate is kept
//! only if every instantiated constraint holds in the reference rewriting.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::enumerate::{TermEnumerator, TupleIndex};
use crate::observe::ObservationPlan;
use crate::parser::{parse_term, SpecError};
use crate::rewrite::{orient, ConditionalRewriteSystem, Fuel, NormalStatus, RewriteRule, TriState};
use crate::term::{Equation, Specification, Substitution, Term, Variable};

// Above this many candidate tuples, seeded-random draws with rejection
// instead of shuffling the whole index space.
const SHUFFLE_LIMIT: u128 = 1_000_000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    #[default]
    ExhaustiveFirst,
    SeededRandom,
}

impl std::str::FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exhaustive-first" => Ok(Strategy::ExhaustiveFirst),
            "seeded-random" => Ok(Strategy::SeededRandom),
            other => Err(format!("unknown strategy `{other}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hypotheses {
    pub unfold_depth: usize,
    /// Largest node count of a term substituted for one variable.
    pub regularity_bound: usize,
    pub representatives_per_subdomain: usize,
    pub seed: u64,
    pub strategy: Strategy,
    pub fuel: Fuel,
    pub keep_tautologies: bool,
}

impl Default for Hypotheses {
    fn default() -> Self {
        Hypotheses {
            unfold_depth: 0,
            regularity_bound: 7,
            representatives_per_subdomain: 1,
            seed: 0,
            strategy: Strategy::ExhaustiveFirst,
            fuel: Fuel::default(),
            keep_tautologies: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum HypothesisError {
    #[error("regularity bound must be at least 1")]
    RegularityBound,
    #[error("representatives per subdomain must be at least 1")]
    Representatives,
    #[error("fuel limits must be at least 1")]
    Fuel,
}

impl Hypotheses {
    pub fn validate(&self) -> Result<(), HypothesisError> {
        if self.regularity_bound == 0 {
            return Err(HypothesisError::RegularityBound);
        }
        if self.representatives_per_subdomain == 0 {
            return Err(HypothesisError::Representatives);
        }
        if self.fuel.max_steps == 0 || self.fuel.max_condition_depth == 0 {
            return Err(HypothesisError::Fuel);
        }
        Ok(())
    }
}

/// A uniformity subdomain: the instances of `conclusion` whose constraints
/// hold. `binding` maps variables of the source axiom to what unfolding made
/// of them; unbound axiom variables stand for themselves.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subdomain {
    pub id: String,
    pub source_axiom: String,
    pub constraints: Vec<Equation>,
    pub conclusion: Equation,
    pub binding: Substitution,
    pub axiom_vars: Vec<Variable>,
}

impl Subdomain {
    /// Free variables, first occurrence order: conclusion, then constraints.
    pub fn variables(&self) -> Vec<Variable> {
        let mut out = Vec::new();
        self.conclusion.variables_ordered(&mut out);
        for c in &self.constraints {
            c.variables_ordered(&mut out);
        }
        out
    }

    /// Constraints with the equalities solved by unfolding written out, e.g.
    /// `c = y' :: c'` next to the premises.
    pub fn constraint_view(&self) -> Vec<Equation> {
        let mut out: Vec<Equation> = self.constraints.clone();
        for v in &self.axiom_vars {
            if let Some(t) = self.binding.get(v) {
                if *t != Term::var(v) {
                    out.push(Equation {
                        lhs: Term::var(v),
                        rhs: t.clone(),
                    });
                }
            }
        }
        out
    }

    /// Whether the ground assignment `sigma` of the axiom variables lies in
    /// this subdomain. Variables left free by the binding are searched up to
    /// `bound`.
    pub fn contains(&self, crs: &ConditionalRewriteSystem, sigma: &Substitution, bound: usize, fuel: Fuel) -> bool {
        let mut rho = Substitution::new();
        for v in &self.axiom_vars {
            let Some(value) = sigma.get(v) else { return false };
            let pattern = self.binding.get(v).cloned().unwrap_or_else(|| Term::var(v));
            if !crate::term::match_into(&pattern, value, &mut rho) {
                return false;
            }
        }
        let rest: Vec<Variable> = self
            .variables()
            .into_iter()
            .filter(|v| rho.get(v).is_none())
            .collect();
        let mut en = TermEnumerator::constructors(&crs.source.signature);
        let pools: Vec<Vec<Term>> = rest.iter().map(|v| en.up_to(&v.sort, bound)).collect();
        let idx = TupleIndex::new(pools.iter().map(Vec::len).collect());
        (0..idx.len()).any(|i| {
            let mut full = rho.clone();
            for ((v, pool), d) in rest.iter().zip(&pools).zip(idx.digits(i)) {
                full.insert(v.clone(), pool[d].clone());
            }
            self.constraints
                .iter()
                .all(|c| crs.holds(&c.apply(&full), fuel) == TriState::Holds)
        })
    }

    /// Whether the ground equation is an instance of this subdomain's
    /// conclusion under an assignment satisfying its constraints.
    pub fn admits(&self, crs: &ConditionalRewriteSystem, e: &Equation, fuel: Fuel) -> bool {
        let mut rho = Substitution::new();
        if !crate::term::match_into(&self.conclusion.lhs, &e.lhs, &mut rho)
            || !crate::term::match_into(&self.conclusion.rhs, &e.rhs, &mut rho)
        {
            return false;
        }
        self.constraints.iter().all(|c| {
            let g = c.apply(&rho);
            g.is_ground() && crs.holds(&g, fuel) == TriState::Holds
        })
    }
}

impl fmt::Display for Subdomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.id)?;
        let view = self.constraint_view();
        if !view.is_empty() {
            let cs: Vec<String> = view.iter().map(|c| c.to_string()).collect();
            write!(f, "{} => ", cs.join(" & "))?;
        }
        write!(f, "{}", self.conclusion)
    }
}

/// Where a subterm sits inside a subdomain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Site {
    ConclusionLhs,
    ConclusionRhs,
    ConstraintLhs(usize),
    ConstraintRhs(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Occurrence {
    pub site: Site,
    pub path: Vec<usize>,
}

impl fmt::Display for Occurrence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let site = match self.site {
            Site::ConclusionLhs => "conclusion.lhs".to_string(),
            Site::ConclusionRhs => "conclusion.rhs".to_string(),
            Site::ConstraintLhs(i) => format!("constraint[{i}].lhs"),
            Site::ConstraintRhs(i) => format!("constraint[{i}].rhs"),
        };
        let path: Vec<String> = self.path.iter().map(|p| (p + 1).to_string()).collect();
        write!(f, "{site}@{}", path.join("."))
    }
}

fn site_term<'a>(d: &'a Subdomain, site: Site) -> &'a Term {
    match site {
        Site::ConclusionLhs => &d.conclusion.lhs,
        Site::ConclusionRhs => &d.conclusion.rhs,
        Site::ConstraintLhs(i) => &d.constraints[i].lhs,
        Site::ConstraintRhs(i) => &d.constraints[i].rhs,
    }
}

impl Occurrence {
    pub fn term<'a>(&self, d: &'a Subdomain) -> Option<&'a Term> {
        site_term(d, self.site).subterm(&self.path)
    }
}

/// One subdomain per own axiom of `spec`, in declaration order.
pub fn axiom_domains(spec: &Specification) -> Vec<Subdomain> {
    spec.own_axioms()
        .map(|ax| Subdomain {
            id: ax.label.clone(),
            source_axiom: ax.label.clone(),
            constraints: ax.premises.clone(),
            conclusion: ax.conclusion.clone(),
            binding: Substitution::new(),
            axiom_vars: ax.variables_ordered(),
        })
        .collect()
}

/// Calls of rule-defined functions on constructor patterns, innermost first
/// and left to right: conclusion lhs, conclusion rhs, then constraints. The
/// root of the conclusion lhs is the call under test and is never listed.
pub fn unfoldable_occurrences(spec: &Specification, d: &Subdomain) -> Vec<Occurrence> {
    occurrences(&orient(spec), d)
}

fn occurrences(crs: &ConditionalRewriteSystem, d: &Subdomain) -> Vec<Occurrence> {
    let mut sites = vec![Site::ConclusionLhs, Site::ConclusionRhs];
    for i in 0..d.constraints.len() {
        sites.push(Site::ConstraintLhs(i));
        sites.push(Site::ConstraintRhs(i));
    }
    let mut out = Vec::new();
    for site in sites {
        let mut paths = Vec::new();
        post_order(site_term(d, site), &mut Vec::new(), &mut paths);
        for path in paths {
            if site == Site::ConclusionLhs && path.is_empty() {
                continue;
            }
            let t = site_term(d, site).subterm(&path).expect("path from walk");
            let unfoldable = t.head().is_some_and(|op| crs.is_defined(op))
                && t.args().iter().all(Term::is_constructor_pattern);
            if unfoldable {
                out.push(Occurrence { site, path });
            }
        }
    }
    out
}

fn post_order(t: &Term, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    for (i, a) in t.args().iter().enumerate() {
        path.push(i);
        post_order(a, path, out);
        path.pop();
    }
    out.push(path.clone());
}

/// Most general unifier with occurs check. When two variables meet, the one
/// from `a` is bound.
pub fn unify(a: &Term, b: &Term) -> Option<Substitution> {
    let mut sigma = Substitution::new();
    let mut work = vec![(a.clone(), b.clone())];
    while let Some((s, t)) = work.pop() {
        let (s, t) = (s.apply(&sigma), t.apply(&sigma));
        if s == t {
            continue;
        }
        match (s, t) {
            (Term::Var(v), t) | (t, Term::Var(v)) => {
                if t.occurs(&v) || v.sort != *t.sort() {
                    return None;
                }
                let single: Substitution = [(v, t)].into_iter().collect();
                sigma = sigma.then(&single);
            }
            (Term::App(f, fa), Term::App(g, ga)) => {
                if f != g {
                    return None;
                }
                work.extend(fa.into_iter().zip(ga).rev());
            }
        }
    }
    Some(sigma)
}

fn fresh_name(base: &str, used: &BTreeSet<String>) -> String {
    let mut name = format!("{base}'");
    while used.contains(&name) {
        name.push('\'');
    }
    name
}

fn rename_apart(rule: &RewriteRule, used: &BTreeSet<String>) -> RewriteRule {
    let mut vars = Vec::new();
    rule.lhs.variables_ordered(&mut vars);
    let mut taken = used.clone();
    let renaming: Substitution = vars
        .into_iter()
        .map(|v| {
            let name = fresh_name(&v.name, &taken);
            taken.insert(name.clone());
            let fresh = Variable::new(&name, &v.sort);
            (v, Term::var(&fresh))
        })
        .collect();
    RewriteRule {
        label: rule.label.clone(),
        conditions: rule.conditions.iter().map(|c| c.apply(&renaming)).collect(),
        lhs: rule.lhs.apply(&renaming),
        rhs: rule.rhs.apply(&renaming),
    }
}

fn used_names(d: &Subdomain) -> BTreeSet<String> {
    let mut names: BTreeSet<String> = d.variables().iter().map(|v| v.name.to_string()).collect();
    names.extend(d.axiom_vars.iter().map(|v| v.name.to_string()));
    for (_, t) in d.binding.iter() {
        names.extend(t.variables().iter().map(|v| v.name.to_string()));
    }
    names
}

/// Applies `theta` everywhere, then solves constraints between constructor
/// patterns by unification. `None` when some constraint cannot hold.
fn settle(mut d: Subdomain, theta: Substitution) -> Option<Subdomain> {
    let mut theta = theta;
    loop {
        d.conclusion = d.conclusion.apply(&theta);
        d.constraints = d.constraints.iter().map(|c| c.apply(&theta)).collect();
        d.binding = d.binding.then(&theta).restrict(d.axiom_vars.iter());
        d.constraints.retain(|c| c.lhs != c.rhs);
        let solvable = d
            .constraints
            .iter()
            .position(|c| c.lhs.is_constructor_pattern() && c.rhs.is_constructor_pattern());
        match solvable {
            None => return Some(d),
            Some(i) => {
                let c = d.constraints.remove(i);
                theta = unify(&c.lhs, &c.rhs)?;
            }
        }
    }
}

// Overlapping left-hand sides are fine only between conditional rules.
fn overlap_problem(rules: &[&RewriteRule]) -> Option<String> {
    for (i, r1) in rules.iter().enumerate() {
        for r2 in &rules[i + 1..] {
            if r1.is_conditional() && r2.is_conditional() {
                continue;
            }
            let r2 = rename_apart(r2, &r1.lhs.variables().iter().map(|v| v.name.to_string()).collect());
            if unify(&r1.lhs, &r2.lhs).is_some() {
                return Some(format!(
                    "rules {} and {} overlap and are not both conditional",
                    r1.label, r2.label
                ));
            }
        }
    }
    None
}

/// Children of `d` obtained by unfolding the call at `occ`. The error is a
/// skip reason.
pub fn unfold(spec: &Specification, d: &Subdomain, occ: &Occurrence) -> Result<Vec<Subdomain>, String> {
    unfold_with(&orient(spec), d, occ)
}

fn unfold_with(crs: &ConditionalRewriteSystem, d: &Subdomain, occ: &Occurrence) -> Result<Vec<Subdomain>, String> {
    let target = occ
        .term(d)
        .ok_or_else(|| format!("{}: no subterm at {occ}", d.id))?
        .clone();
    let op = target
        .head()
        .filter(|op| crs.is_defined(op))
        .ok_or_else(|| format!("{}: `{target}` is not a call of a defined function", d.id))?;
    if !target.args().iter().all(Term::is_constructor_pattern) {
        return Err(format!("{}: arguments of `{target}` are not constructor patterns", d.id));
    }
    let rules: Vec<&RewriteRule> = crs.rules_for(op).collect();
    if let Some(problem) = overlap_problem(&rules) {
        return Err(format!("{}: cannot unfold `{target}`: {problem}", d.id));
    }
    let used = used_names(d);
    let mut children = Vec::new();
    for (k, rule) in rules.iter().enumerate() {
        let rule = rename_apart(rule, &used);
        let Some(theta) = unify(&rule.lhs, &target) else {
            continue;
        };
        let mut child = d.clone();
        child.id = format!("{}/{}", d.id, k + 1);
        let replace = |t: &Term| t.replace_at(&occ.path, rule.rhs.clone());
        match occ.site {
            Site::ConclusionLhs => child.conclusion.lhs = replace(&d.conclusion.lhs),
            Site::ConclusionRhs => child.conclusion.rhs = replace(&d.conclusion.rhs),
            Site::ConstraintLhs(i) => child.constraints[i].lhs = replace(&d.constraints[i].lhs),
            Site::ConstraintRhs(i) => child.constraints[i].rhs = replace(&d.constraints[i].rhs),
        }
        child.constraints.extend(rule.conditions.iter().cloned());
        if let Some(child) = settle(child, theta) {
            children.push(child);
        }
    }
    Ok(children)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Decomposition {
    pub leaves: Vec<Subdomain>,
    pub skipped: Vec<Skip>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Skip {
    pub subdomain: String,
    pub reason: String,
}

/// Breadth-first unfolding, `hyp.unfold_depth` rounds, always at the first
/// unfoldable occurrence.
pub fn decompose(spec: &Specification, hyp: &Hypotheses) -> Decomposition {
    decompose_with(&orient(spec), spec, hyp.unfold_depth)
}

fn decompose_with(crs: &ConditionalRewriteSystem, spec: &Specification, depth: usize) -> Decomposition {
    let mut leaves = axiom_domains(spec);
    let mut skipped = Vec::new();
    let mut stuck: HashSet<String> = HashSet::new();
    for _ in 0..depth {
        let mut next = Vec::new();
        for leaf in leaves {
            let occs = occurrences(crs, &leaf);
            if occs.is_empty() || stuck.contains(&leaf.id) {
                next.push(leaf);
                continue;
            }
            match unfold_with(crs, &leaf, &occs[0]) {
                Ok(children) if children.is_empty() => skipped.push(Skip {
                    subdomain: leaf.id.clone(),
                    reason: format!("no rule case of `{}` is compatible", occs[0].term(&leaf).unwrap()),
                }),
                Ok(children) => next.extend(children),
                Err(reason) => {
                    skipped.push(Skip {
                        subdomain: leaf.id.clone(),
                        reason,
                    });
                    stuck.insert(leaf.id.clone());
                    next.push(leaf);
                }
            }
        }
        leaves = next;
    }
    Decomposition { leaves, skipped }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TestCase {
    pub id: String,
    pub equation: Equation,
    pub subdomain_id: String,
    pub source_axiom: String,
    pub instantiation: Substitution,
    /// Instantiated constraints, each checked to hold when the test was made.
    pub premises: Vec<Equation>,
    /// The observable context wrapped around both sides, if any.
    pub applied_context: Option<String>,
}

impl TestCase {
    pub fn sort(&self) -> &crate::term::Sort {
        self.equation.sort()
    }
}

impl fmt::Display for TestCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.id, self.equation)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum InstantiateError {
    #[error("{subdomain}: no solution among {space} candidate tuples within the regularity bound ({unknown} premise evaluations undecided)")]
    UnsatWithinBound {
        subdomain: String,
        space: u128,
        unknown: usize,
    },
}

/// Up to `representatives_per_subdomain` ground instances of `d` whose
/// constraints hold.
pub fn instantiate(spec: &Specification, d: &Subdomain, hyp: &Hypotheses) -> Result<Vec<TestCase>, InstantiateError> {
    instantiate_with(&orient(spec), d, hyp)
}

struct Search<'a> {
    crs: &'a ConditionalRewriteSystem,
    d: &'a Subdomain,
    hyp: &'a Hypotheses,
    vars: Vec<Variable>,
    pools: Vec<Vec<Term>>,
    // constraints that become ground once the first k variables are set
    checks: Vec<Vec<usize>>,
    unknown: usize,
    found: Vec<Substitution>,
}

impl Search<'_> {
    fn check(&mut self, level: usize, rho: &Substitution) -> bool {
        for &ci in &self.checks[level] {
            match self.crs.holds(&self.d.constraints[ci].apply(rho), self.hyp.fuel) {
                TriState::Holds => {}
                TriState::FailsToHold => return false,
                TriState::Unknown(_) => {
                    self.unknown += 1;
                    return false;
                }
            }
        }
        true
    }

    fn dfs(&mut self, level: usize, rho: &mut Substitution) {
        if self.found.len() >= self.hyp.representatives_per_subdomain {
            return;
        }
        if !self.check(level, rho) {
            return;
        }
        if level == self.vars.len() {
            self.found.push(rho.clone());
            return;
        }
        for i in 0..self.pools[level].len() {
            let t = self.pools[level][i].clone();
            rho.insert(self.vars[level].clone(), t);
            self.dfs(level + 1, rho);
            if self.found.len() >= self.hyp.representatives_per_subdomain {
                return;
            }
        }
    }

    fn random(&mut self) {
        let idx = TupleIndex::new(self.pools.iter().map(Vec::len).collect());
        let total = idx.len();
        let mut rng = ChaCha8Rng::seed_from_u64(self.hyp.seed ^ fnv1a(&self.d.id));
        let all = self.checks.len() - 1;
        let try_tuple = |s: &mut Self, index: u128| {
            let rho: Substitution = s
                .vars
                .iter()
                .zip(&s.pools)
                .zip(idx.digits(index))
                .map(|((v, pool), d)| (v.clone(), pool[d].clone()))
                .collect();
            let ok = (0..=all).all(|level| s.check(level, &rho));
            if ok {
                s.found.push(rho);
            }
        };
        let want = self.hyp.representatives_per_subdomain;
        if total <= SHUFFLE_LIMIT {
            let mut order: Vec<u32> = (0..total as u32).collect();
            order.shuffle(&mut rng);
            for i in order {
                if self.found.len() >= want {
                    break;
                }
                try_tuple(self, i as u128);
            }
        } else {
            let mut seen = HashSet::new();
            while self.found.len() < want && (seen.len() as u128) < SHUFFLE_LIMIT {
                let i = rng.gen_range(0..total);
                if seen.insert(i) {
                    try_tuple(self, i);
                }
            }
        }
    }
}

fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

fn instantiate_with(crs: &ConditionalRewriteSystem, d: &Subdomain, hyp: &Hypotheses) -> Result<Vec<TestCase>, InstantiateError> {
    let vars = d.variables();
    let mut en = TermEnumerator::constructors(&crs.source.signature);
    let pools: Vec<Vec<Term>> = vars.iter().map(|v| en.up_to(&v.sort, hyp.regularity_bound)).collect();
    let mut checks = vec![Vec::new(); vars.len() + 1];
    for (ci, c) in d.constraints.iter().enumerate() {
        let level = c
            .lhs
            .variables()
            .union(&c.rhs.variables())
            .map(|v| vars.iter().position(|w| w == v).unwrap() + 1)
            .max()
            .unwrap_or(0);
        checks[level].push(ci);
    }
    let mut search = Search {
        crs,
        d,
        hyp,
        vars,
        pools,
        checks,
        unknown: 0,
        found: Vec::new(),
    };
    match hyp.strategy {
        Strategy::ExhaustiveFirst => search.dfs(0, &mut Substitution::new()),
        Strategy::SeededRandom => search.random(),
    }
    if search.found.is_empty() {
        let space = TupleIndex::new(search.pools.iter().map(Vec::len).collect()).len();
        return Err(InstantiateError::UnsatWithinBound {
            subdomain: d.id.clone(),
            space,
            unknown: search.unknown,
        });
    }
    Ok(search
        .found
        .into_iter()
        .enumerate()
        .map(|(k, rho)| TestCase {
            id: format!("{}#{}", d.id, k + 1),
            equation: d.conclusion.apply(&rho),
            subdomain_id: d.id.clone(),
            source_axiom: d.source_axiom.clone(),
            premises: d.constraints.iter().map(|c| c.apply(&rho)).collect(),
            instantiation: rho,
            applied_context: None,
        })
        .collect())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SuiteKind {
    #[default]
    Axioms,
    NormalForm,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TestSuite {
    pub spec_name: String,
    pub spec_hash: String,
    /// Where the specification was read from, when it came from a file.
    pub spec_path: Option<String>,
    /// Observable sorts the suite was generated for, when contexts were used.
    pub observable: Option<Vec<String>>,
    pub kind: SuiteKind,
    pub hypotheses: Hypotheses,
    pub plan: Option<ObservationPlan>,
    pub tests: Vec<TestCase>,
    pub skipped: Vec<Skip>,
}

impl TestSuite {
    pub fn empty(spec: &Specification, hypotheses: Hypotheses) -> Self {
        TestSuite {
            spec_name: spec.name.clone(),
            spec_hash: spec.content_hash(),
            spec_path: None,
            observable: None,
            kind: SuiteKind::Axioms,
            hypotheses,
            plan: None,
            tests: Vec::new(),
            skipped: Vec::new(),
        }
    }
}

/// Decomposes, then instantiates every leaf.
pub fn generate(spec: &Specification, hyp: &Hypotheses) -> Result<TestSuite, HypothesisError> {
    hyp.validate()?;
    let crs = orient(spec);
    let dec = decompose_with(&crs, spec, hyp.unfold_depth);
    let mut suite = TestSuite::empty(spec, hyp.clone());
    suite.skipped = dec.skipped;
    let results = instantiate_all(&crs, &dec.leaves, hyp);
    for (leaf, result) in dec.leaves.iter().zip(results) {
        match result {
            Ok(tests) => suite
                .tests
                .extend(tests.into_iter().filter(|t| hyp.keep_tautologies || !is_tautology(&t.equation))),
            Err(e) => suite.skipped.push(Skip {
                subdomain: leaf.id.clone(),
                reason: e.to_string(),
            }),
        }
    }
    Ok(suite)
}

pub(crate) fn instantiate_all(
    crs: &ConditionalRewriteSystem,
    leaves: &[Subdomain],
    hyp: &Hypotheses,
) -> Vec<Result<Vec<TestCase>, InstantiateError>> {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(leaves.len().max(1));
    if workers <= 1 {
        return leaves.iter().map(|d| instantiate_with(crs, d, hyp)).collect();
    }
    let mut out: Vec<Option<Result<Vec<TestCase>, InstantiateError>>> = vec![None; leaves.len()];
    let next = std::sync::atomic::AtomicUsize::new(0);
    let results = std::sync::Mutex::new(&mut out);
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if i >= leaves.len() {
                    break;
                }
                let r = instantiate_with(crs, &leaves[i], hyp);
                results.lock().unwrap()[i] = Some(r);
            });
        }
    });
    out.into_iter().map(|r| r.expect("every leaf instantiated")).collect()
}

fn is_tautology(e: &Equation) -> bool {
    e.lhs == e.rhs && e.lhs.is_constructor_term()
}

/// `t = t↓` for every ground term of size at most `size_bound`; tautologies
/// `c = c` on constructor terms are dropped.
pub fn normal_form_tests(spec: &Specification, size_bound: usize, fuel: Fuel) -> TestSuite {
    normal_form_tests_with(spec, size_bound, fuel, false)
}

pub fn normal_form_tests_with(spec: &Specification, size_bound: usize, fuel: Fuel, keep_tautologies: bool) -> TestSuite {
    let crs = orient(spec);
    let hyp = Hypotheses {
        regularity_bound: size_bound.max(1),
        fuel,
        keep_tautologies,
        ..Hypotheses::default()
    };
    let mut suite = TestSuite::empty(spec, hyp);
    suite.kind = SuiteKind::NormalForm;
    let mut en = TermEnumerator::new(&spec.signature, usize::MAX);
    for sort in &spec.signature.sorts {
        for (k, t) in en.up_to(sort, size_bound).into_iter().enumerate() {
            let id = format!("nf/{}/{}", sort, k + 1);
            match crs.normalize(&t, fuel) {
                (nf, NormalStatus::Normal) if nf.is_constructor_term() => {
                    let equation = Equation { lhs: t, rhs: nf };
                    if !keep_tautologies && is_tautology(&equation) {
                        continue;
                    }
                    suite.tests.push(TestCase {
                        id,
                        equation,
                        subdomain_id: format!("nf/{sort}"),
                        source_axiom: String::new(),
                        instantiation: Substitution::new(),
                        premises: Vec::new(),
                        applied_context: None,
                    });
                }
                (nf, status) => suite.skipped.push(Skip {
                    subdomain: id,
                    reason: match status {
                        NormalStatus::FuelExhausted => format!("{t}: fuel exhausted"),
                        NormalStatus::Normal => format!("{t}: stuck at {nf}"),
                    },
                }),
            }
        }
    }
    suite
}

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error("malformed suite file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("suite was generated from {expected} but the specification hashes to {found}")]
    HashMismatch { expected: String, found: String },
    #[error("test {test}: {error}")]
    Term { test: String, error: SpecError },
    #[error("test {test}: {message}")]
    Invalid { test: String, message: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteSpecRef {
    pub name: String,
    pub sha256: String,
    pub path: Option<String>,
    pub observable: Option<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
struct SuiteFile {
    spec: SuiteSpecRef,
    kind: SuiteKind,
    hypotheses: Hypotheses,
    plan: Option<ObservationPlan>,
    tests: Vec<TestEntry>,
    skipped: Vec<Skip>,
}

#[derive(Serialize, Deserialize)]
struct TestEntry {
    id: String,
    sort: String,
    lhs: String,
    rhs: String,
    axiom: String,
    subdomain: String,
    context: Option<String>,
    premises: Vec<[String; 2]>,
    instantiation: Vec<[String; 2]>,
}

#[derive(Deserialize)]
struct HeaderOnly {
    spec: SuiteSpecRef,
}

/// The `spec` object of a suite file, read without the specification.
pub fn suite_header(text: &str) -> Result<SuiteSpecRef, SuiteError> {
    Ok(serde_json::from_str::<HeaderOnly>(text)?.spec)
}

impl TestSuite {
    pub fn to_json(&self) -> String {
        let file = SuiteFile {
            spec: SuiteSpecRef {
                name: self.spec_name.clone(),
                sha256: self.spec_hash.clone(),
                path: self.spec_path.clone(),
                observable: self.observable.clone(),
            },
            kind: self.kind,
            hypotheses: self.hypotheses.clone(),
            plan: self.plan.clone(),
            tests: self
                .tests
                .iter()
                .map(|t| TestEntry {
                    id: t.id.clone(),
                    sort: t.sort().to_string(),
                    lhs: t.equation.lhs.to_string(),
                    rhs: t.equation.rhs.to_string(),
                    axiom: t.source_axiom.clone(),
                    subdomain: t.subdomain_id.clone(),
                    context: t.applied_context.clone(),
                    premises: t.premises.iter().map(|p| [p.lhs.to_string(), p.rhs.to_string()]).collect(),
                    instantiation: t
                        .instantiation
                        .iter()
                        .map(|(v, t)| [v.name.to_string(), t.to_string()])
                        .collect(),
                })
                .collect(),
            skipped: self.skipped.clone(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("suite serializes");
        s.push('\n');
        s
    }

    /// Reads a suite back; `spec` must be the specification it was generated
    /// from (its observable set is taken from the file).
    pub fn from_json(text: &str, spec: &Specification) -> Result<TestSuite, SuiteError> {
        let file: SuiteFile = serde_json::from_str(text)?;
        let spec = match &file.spec.observable {
            Some(obs) => {
                let sorts: Vec<_> = spec
                    .signature
                    .sorts
                    .iter()
                    .filter(|s| obs.iter().any(|o| o == s.name()))
                    .cloned()
                    .collect();
                spec.with_observable(sorts.iter())
            }
            None => spec.clone(),
        };
        let found = spec.content_hash();
        if found != file.spec.sha256 {
            return Err(SuiteError::HashMismatch {
                expected: file.spec.sha256,
                found,
            });
        }
        let sig = &spec.signature;
        let term = |test: &str, s: &str| {
            parse_term(s, sig).map_err(|error| SuiteError::Term {
                test: test.to_string(),
                error,
            })
        };
        let mut tests = Vec::new();
        for e in &file.tests {
            let lhs = term(&e.id, &e.lhs)?;
            let rhs = term(&e.id, &e.rhs)?;
            let equation = Equation::new(lhs, rhs).map_err(|err| SuiteError::Invalid {
                test: e.id.clone(),
                message: err.to_string(),
            })?;
            if equation.sort().name() != e.sort || !equation.is_ground() {
                return Err(SuiteError::Invalid {
                    test: e.id.clone(),
                    message: format!("expected a ground equation of sort {}", e.sort),
                });
            }
            let mut premises = Vec::new();
            for [l, r] in &e.premises {
                premises.push(Equation {
                    lhs: term(&e.id, l)?,
                    rhs: term(&e.id, r)?,
                });
            }
            let mut instantiation = Substitution::new();
            for [v, t] in &e.instantiation {
                let t = term(&e.id, t)?;
                instantiation.insert(Variable::new(v, t.sort()), t);
            }
            tests.push(TestCase {
                id: e.id.clone(),
                equation,
                subdomain_id: e.subdomain.clone(),
                source_axiom: e.axiom.clone(),
                instantiation,
                premises,
                applied_context: e.context.clone(),
            });
        }
        Ok(TestSuite {
            spec_name: file.spec.name,
            spec_hash: file.spec.sha256,
            spec_path: file.spec.path,
            observable: file.spec.observable,
            kind: file.kind,
            hypotheses: file.hypotheses,
            plan: file.plan,
            tests,
            skipped: file.skipped,
        })
    }
}
