//! Native model of the containers specification, written without the
//! rewriting engine: numbers are u64, containers are vectors, `remove` drops
//! the first occurrence.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use axiomtest::select::Subdomain;
use axiomtest::{ConditionalAxiom, Term};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Val {
    Nat(u64),
    Bool(bool),
    List(Vec<u64>),
}

impl Val {
    pub fn render(&self) -> String {
        match self {
            Val::Nat(n) => n.to_string(),
            Val::Bool(b) => b.to_string(),
            Val::List(items) => {
                let mut s = String::new();
                for i in items {
                    s.push_str(&format!("{i} :: "));
                }
                s.push_str("[]");
                s
            }
        }
    }
}

pub fn remove_first(x: u64, items: &[u64]) -> Vec<u64> {
    let mut v = items.to_vec();
    if let Some(i) = v.iter().position(|&y| y == x) {
        v.remove(i);
    }
    v
}

/// A ground term as text, with its value.
#[derive(Clone, Debug)]
pub struct Gen {
    pub text: String,
    pub val: Val,
    pub defined: bool,
}

/// Every ground term of `sort` with exactly `size` nodes. With
/// `with_defined = false` only constructors are used.
pub fn ground(sort: &str, size: usize, with_defined: bool) -> Vec<Gen> {
    let mut memo = HashMap::new();
    gen(sort, size, with_defined, &mut memo)
}

pub fn ground_up_to(sort: &str, max: usize, with_defined: bool) -> Vec<Gen> {
    (1..=max).flat_map(|n| ground(sort, n, with_defined)).collect()
}

fn splits(total: usize) -> impl Iterator<Item = (usize, usize)> {
    (1..total).map(move |a| (a, total - a))
}

fn gen(sort: &str, size: usize, d: bool, memo: &mut HashMap<(String, usize), Vec<Gen>>) -> Vec<Gen> {
    if size == 0 {
        return vec![];
    }
    if let Some(v) = memo.get(&(sort.to_string(), size)) {
        return v.clone();
    }
    let mut out = Vec::new();
    match sort {
        "Nat" => out.push(Gen {
            text: (size - 1).to_string(),
            val: Val::Nat(size as u64 - 1),
            defined: false,
        }),
        "Bool" => {
            if size == 1 {
                for b in [true, false] {
                    out.push(Gen {
                        text: b.to_string(),
                        val: Val::Bool(b),
                        defined: false,
                    });
                }
            }
            if d {
                for (a, b) in splits(size - 1) {
                    for l in gen("Nat", a, d, memo) {
                        for r in gen("Nat", b, d, memo) {
                            out.push(Gen {
                                text: format!("eq({}, {})", l.text, r.text),
                                val: Val::Bool(l.val == r.val),
                                defined: true,
                            });
                        }
                    }
                }
                for b in gen("Bool", size - 1, d, memo) {
                    let Val::Bool(v) = b.val else { unreachable!() };
                    out.push(Gen {
                        text: format!("notb({})", b.text),
                        val: Val::Bool(!v),
                        defined: true,
                    });
                }
                for (a, b) in splits(size - 1) {
                    for n in gen("Nat", a, d, memo) {
                        for c in gen("Container", b, d, memo) {
                            let (Val::Nat(x), Val::List(items)) = (&n.val, &c.val) else { unreachable!() };
                            out.push(Gen {
                                text: format!("isin({}, {})", n.text, c.text),
                                val: Val::Bool(items.contains(x)),
                                defined: true,
                            });
                        }
                    }
                }
            }
        }
        "Container" => {
            if size == 1 {
                out.push(Gen {
                    text: "[]".into(),
                    val: Val::List(vec![]),
                    defined: false,
                });
            }
            for (a, b) in splits(size - 1) {
                for n in gen("Nat", a, d, memo) {
                    for c in gen("Container", b, d, memo) {
                        let (Val::Nat(x), Val::List(items)) = (&n.val, &c.val) else { unreachable!() };
                        let mut v = vec![*x];
                        v.extend(items);
                        out.push(Gen {
                            text: format!("{} :: {}", n.text, c.text),
                            val: Val::List(v),
                            defined: c.defined,
                        });
                        if d {
                            out.push(Gen {
                                text: format!("remove({}, {})", n.text, c.text),
                                val: Val::List(remove_first(*x, items)),
                                defined: true,
                            });
                        }
                    }
                }
            }
        }
        other => panic!("unknown sort {other}"),
    }
    memo.insert((sort.to_string(), size), out.clone());
    out
}

/// Evaluates a term of the containers signature under `env`.
pub fn eval(t: &Term, env: &HashMap<String, Val>) -> Val {
    match t {
        Term::Var(v) => env
            .get(&*v.name)
            .cloned()
            .unwrap_or_else(|| panic!("unbound {}", v.name)),
        Term::App(op, args) => {
            let a: Vec<Val> = args.iter().map(|x| eval(x, env)).collect();
            match (op.name.as_str(), a.as_slice()) {
                ("0", []) => Val::Nat(0),
                ("succ", [Val::Nat(n)]) => Val::Nat(n + 1),
                ("true", []) => Val::Bool(true),
                ("false", []) => Val::Bool(false),
                ("eq", [Val::Nat(x), Val::Nat(y)]) => Val::Bool(x == y),
                ("notb", [Val::Bool(b)]) => Val::Bool(!b),
                ("[]", []) => Val::List(vec![]),
                ("::", [Val::Nat(x), Val::List(c)]) => {
                    let mut v = vec![*x];
                    v.extend(c);
                    Val::List(v)
                }
                ("isin", [Val::Nat(x), Val::List(c)]) => Val::Bool(c.contains(x)),
                ("remove", [Val::Nat(x), Val::List(c)]) => Val::List(remove_first(*x, c)),
                (name, _) => panic!("cannot evaluate {name}"),
            }
        }
    }
}

/// Matches a constructor pattern against a value, extending `env`.
pub fn match_val(p: &Term, v: &Val, env: &mut HashMap<String, Val>) -> bool {
    match p {
        Term::Var(x) => match env.get(&*x.name) {
            Some(old) => old == v,
            None => {
                env.insert(x.name.to_string(), v.clone());
                true
            }
        },
        Term::App(op, args) => match (op.name.as_str(), v) {
            ("0", Val::Nat(0)) => true,
            ("succ", Val::Nat(n)) if *n > 0 => match_val(&args[0], &Val::Nat(n - 1), env),
            ("true", Val::Bool(true)) | ("false", Val::Bool(false)) => true,
            ("[]", Val::List(items)) => items.is_empty(),
            ("::", Val::List(items)) if !items.is_empty() => {
                match_val(&args[0], &Val::Nat(items[0]), env) && match_val(&args[1], &Val::List(items[1..].to_vec()), env)
            }
            _ => false,
        },
    }
}

/// Constructor values of a sort whose term has at most `max` nodes.
pub fn values_up_to(sort: &str, max: usize) -> Vec<Val> {
    ground_up_to(sort, max, false).into_iter().map(|g| g.val).collect()
}

pub fn term_size(t: &Term) -> usize {
    match t {
        Term::Var(_) => 1,
        Term::App(_, args) => 1 + args.iter().map(term_size).sum::<usize>(),
    }
}

pub fn axiom_vars(ax: &ConditionalAxiom) -> Vec<(String, String)> {
    ax.variables_ordered()
        .iter()
        .map(|v| (v.name.to_string(), v.sort.name().to_string()))
        .collect()
}

/// Assignments of the axiom variables, each a constructor value of at most
/// `bound` nodes, whose premises hold in the native model.
pub fn solutions(vars: &[(String, String)], premises: &dyn Fn(&HashMap<String, Val>) -> bool, bound: usize) -> BTreeSet<Vec<Val>> {
    let pools: Vec<Vec<Val>> = vars.iter().map(|(_, s)| values_up_to(s.as_str(), bound)).collect();
    let mut out = BTreeSet::new();
    let mut idx = vec![0usize; vars.len()];
    loop {
        let env: HashMap<String, Val> = vars
            .iter()
            .zip(&idx)
            .zip(&pools)
            .map(|(((n, _), &i), p)| (n.clone(), p[i].clone()))
            .collect();
        if premises(&env) {
            out.insert(vars.iter().map(|(n, _)| env[n].clone()).collect());
        }
        let mut k = vars.len();
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < pools[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// Ground solutions of an axiom's premises, by brute force.
pub fn axiom_solutions(ax: &ConditionalAxiom, bound: usize) -> BTreeSet<Vec<Val>> {
    solutions(
        &axiom_vars(ax),
        &|env| ax.premises.iter().all(|p| eval(&p.lhs, env) == eval(&p.rhs, env)),
        bound,
    )
}

/// Assignments of the source axiom's variables that fall in `d`: each value
/// matches its binding pattern and the constraints hold on the match.
pub fn subdomain_solutions(ax: &ConditionalAxiom, d: &Subdomain, bound: usize) -> BTreeSet<Vec<Val>> {
    solutions(
        &axiom_vars(ax),
        &|env| {
            let mut rho = HashMap::new();
            for v in &d.axiom_vars {
                let p = d.binding.get(v).cloned().unwrap_or_else(|| Term::var(v));
                if !match_val(&p, &env[&*v.name], &mut rho) {
                    return false;
                }
            }
            d.constraints.iter().all(|c| eval(&c.lhs, &rho) == eval(&c.rhs, &rho))
        },
        bound,
    )
}
