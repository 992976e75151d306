//! Size-bounded exhaustive enumeration of ground terms.
//!
//! Terms come out ordered by node count, then by the declaration order of
//! the head symbol, then lexicographically on children (each child compared
//! by its own position in this same order).

use std::collections::HashMap;
use std::sync::Arc;

use crate::term::{OpSymbol, Signature, Sort, Term};

/// Memoizing enumerator of ground terms.
///
/// `max_defined` bounds the number of non-constructor symbol occurrences in
/// each emitted term; `0` gives exactly the ground constructor terms.
pub struct TermEnumerator<'a> {
    sig: &'a Signature,
    max_defined: usize,
    ops: Vec<Arc<OpSymbol>>,
    // (sort, exact size) -> terms with their defined-symbol count, in order
    memo: HashMap<(Sort, usize), Arc<Vec<(Term, usize)>>>,
}

impl<'a> TermEnumerator<'a> {
    pub fn new(sig: &'a Signature, max_defined: usize) -> Self {
        let ops = sig
            .ops
            .iter()
            .filter(|op| op.constructor || max_defined > 0)
            .cloned()
            .collect();
        TermEnumerator {
            sig,
            max_defined,
            ops,
            memo: HashMap::new(),
        }
    }

    pub fn constructors(sig: &'a Signature) -> Self {
        Self::new(sig, 0)
    }

    pub fn signature(&self) -> &Signature {
        self.sig
    }

    /// All terms of `sort` with exactly `size` nodes.
    pub fn of_size(&mut self, sort: &Sort, size: usize) -> Arc<Vec<(Term, usize)>> {
        if let Some(hit) = self.memo.get(&(sort.clone(), size)) {
            return hit.clone();
        }
        let mut out = Vec::new();
        if size >= 1 {
            let ops: Vec<Arc<OpSymbol>> = self
                .ops
                .iter()
                .filter(|op| &op.result == sort)
                .cloned()
                .collect();
            for op in ops {
                let own = usize::from(!op.constructor);
                if own > self.max_defined {
                    continue;
                }
                if op.arity() == 0 {
                    if size == 1 {
                        out.push((Term::constant(&op), own));
                    }
                    continue;
                }
                if size < 1 + op.arity() {
                    continue;
                }
                let mut tuples = Vec::new();
                self.tuples(&op.arg_sorts, size - 1, self.max_defined - own, &mut Vec::new(), &mut tuples);
                for (args, defined) in tuples {
                    out.push((Term::App(op.clone(), args), defined + own));
                }
            }
        }
        let out = Arc::new(out);
        self.memo.insert((sort.clone(), size), out.clone());
        out
    }

    // Children tuples with total size exactly `budget`, lexicographic order.
    fn tuples(
        &mut self,
        sorts: &[Sort],
        budget: usize,
        defined_left: usize,
        prefix: &mut Vec<(Term, usize)>,
        out: &mut Vec<(Vec<Term>, usize)>,
    ) {
        let Some((first, rest)) = sorts.split_first() else {
            if budget == 0 {
                let defined = prefix.iter().map(|(_, d)| d).sum();
                out.push((prefix.iter().map(|(t, _)| t.clone()).collect(), defined));
            }
            return;
        };
        let min_rest = rest.len();
        if budget < 1 + min_rest {
            return;
        }
        let sizes: Vec<usize> = if rest.is_empty() {
            vec![budget]
        } else {
            (1..=budget - min_rest).collect()
        };
        for s in sizes {
            let candidates = self.of_size(first, s);
            for (t, d) in candidates.iter() {
                if *d > defined_left {
                    continue;
                }
                prefix.push((t.clone(), *d));
                self.tuples(rest, budget - s, defined_left - d, prefix, out);
                prefix.pop();
            }
        }
    }

    /// All terms of `sort` with at most `max_size` nodes, in canonical order.
    pub fn up_to(&mut self, sort: &Sort, max_size: usize) -> Vec<Term> {
        (1..=max_size)
            .flat_map(|n| {
                self.of_size(sort, n)
                    .iter()
                    .map(|(t, _)| t.clone())
                    .collect::<Vec<_>>()
            })
            .collect()
    }
}

/// Ground constructor terms of `sort` with size at most `max_size`.
pub fn enumerate_constructor_terms(sig: &Signature, sort: &Sort, max_size: usize) -> Vec<Term> {
    TermEnumerator::constructors(sig).up_to(sort, max_size)
}

/// Ground terms of `sort` using at most `max_defined` non-constructor symbols.
pub fn enumerate_ground_terms(
    sig: &Signature,
    sort: &Sort,
    max_size: usize,
    max_defined: usize,
) -> Vec<Term> {
    TermEnumerator::new(sig, max_defined).up_to(sort, max_size)
}

/// Mixed-radix iteration over one candidate list per variable; the first list
/// is the most significant digit.
pub(crate) struct TupleIndex {
    radices: Vec<usize>,
}

impl TupleIndex {
    pub fn new(radices: Vec<usize>) -> Self {
        TupleIndex { radices }
    }

    /// Number of tuples, saturating.
    pub fn len(&self) -> u128 {
        self.radices
            .iter()
            .fold(1u128, |acc, r| acc.saturating_mul(*r as u128))
    }

    pub fn digits(&self, mut index: u128) -> Vec<usize> {
        let mut out = vec![0; self.radices.len()];
        for (slot, r) in out.iter_mut().zip(&self.radices).rev() {
            let r = *r as u128;
            *slot = (index % r) as usize;
            index /= r;
        }
        out
    }
}
