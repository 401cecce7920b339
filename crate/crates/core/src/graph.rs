//! Predicate dependency graphs.

use std::collections::{BTreeMap, BTreeSet};

use crate::ast::{Pred, Rule};

/// Predicates lying on a cycle of the head-from-body dependency graph.
pub fn recursive_predicates<'a>(rules: impl IntoIterator<Item = &'a Rule>) -> BTreeSet<Pred> {
    let mut succ: BTreeMap<Pred, BTreeSet<Pred>> = BTreeMap::new();
    for r in rules {
        let h = &r.head.pred;
        succ.entry(h.clone()).or_default();
        for a in &r.body {
            succ.entry(a.pred.clone()).or_default().insert(h.clone());
        }
    }
    let mut out = BTreeSet::new();
    for p in succ.keys() {
        if reaches(&succ, p, p) {
            out.insert(p.clone());
        }
    }
    out
}

fn reaches(succ: &BTreeMap<Pred, BTreeSet<Pred>>, from: &Pred, to: &Pred) -> bool {
    let mut seen = BTreeSet::new();
    let mut stack: Vec<&Pred> = succ[from].iter().collect();
    while let Some(p) = stack.pop() {
        if p == to {
            return true;
        }
        if seen.insert(p) {
            stack.extend(succ[p].iter());
        }
    }
    false
}
