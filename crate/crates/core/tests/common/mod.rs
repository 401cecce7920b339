//! Test-side oracles, written independently of the library's evaluator.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use dlsb::eval::{EDBInstance, Tuple};
use dlsb::{Constant, Name, Pred, Rule, Term};

pub type Relations = BTreeMap<Pred, BTreeSet<Tuple>>;
type Env = BTreeMap<Name, Constant>;

fn lookup<'a>(p: &Pred, heads: &BTreeSet<Pred>, d: &'a EDBInstance, idb: &'a Relations) -> Option<&'a BTreeSet<Tuple>> {
    if heads.contains(p) {
        idb.get(p)
    } else {
        d.relation(p.base())
    }
}

fn join(
    rule: &Rule,
    i: usize,
    env: &mut Env,
    heads: &BTreeSet<Pred>,
    d: &EDBInstance,
    idb: &Relations,
    out: &mut BTreeSet<Tuple>,
) {
    if i == rule.body.len() {
        let t = rule
            .head
            .terms
            .iter()
            .map(|t| match t {
                Term::Var(v) => env[v].clone(),
                Term::Const(c) => c.clone(),
                Term::Wildcard => panic!("wildcard in a head"),
            })
            .collect();
        out.insert(t);
        return;
    }
    let a = &rule.body[i];
    let Some(rel) = lookup(&a.pred, heads, d, idb) else { return };
    for t in rel {
        let saved = env.clone();
        let ok = t.len() == a.terms.len()
            && a.terms.iter().zip(t).all(|(term, c)| match term {
                Term::Const(k) => k == c,
                Term::Wildcard => true,
                Term::Var(v) => match env.get(v) {
                    Some(x) => x == c,
                    None => {
                        env.insert(v.clone(), c.clone());
                        true
                    }
                },
            });
        if ok {
            join(rule, i + 1, env, heads, d, idb, out);
        }
        *env = saved;
    }
}

/// One application of `rule` against `idb` and `d`.
pub fn apply(rule: &Rule, heads: &BTreeSet<Pred>, d: &EDBInstance, idb: &Relations) -> BTreeSet<Tuple> {
    let mut out = BTreeSet::new();
    join(rule, 0, &mut Env::new(), heads, d, idb, &mut out);
    out
}

/// Naive fixpoint: apply every rule to everything until nothing changes.
pub fn naive(rules: &[Rule], d: &EDBInstance) -> Relations {
    let heads: BTreeSet<Pred> = rules.iter().map(|r| r.head.pred.clone()).collect();
    let mut idb: Relations = heads.iter().map(|p| (p.clone(), BTreeSet::new())).collect();
    loop {
        let mut changed = false;
        for r in rules {
            let new = apply(r, &heads, d, &idb);
            let rel = idb.get_mut(&r.head.pred).unwrap();
            for t in new {
                changed |= rel.insert(t);
            }
        }
        if !changed {
            return idb;
        }
    }
}

/// Union of all relations whose predicate has base `q`.
pub fn union_of(r: &Relations, q: &str) -> BTreeSet<Tuple> {
    r.iter().filter(|(p, _)| &**p.base() == q).flat_map(|(_, ts)| ts.iter().cloned()).collect()
}

/// Whether some `k` facts of `d` jointly contain every value of `values`,
/// trying all `k`-subsets of facts.
pub fn covered_by_facts(d: &EDBInstance, values: &BTreeSet<Constant>, k: usize) -> bool {
    let facts: Vec<&Tuple> = d.relations().flat_map(|(_, r)| r.iter()).collect();
    fn pick(facts: &[&Tuple], start: usize, left: usize, got: &mut Vec<Constant>, want: &BTreeSet<Constant>) -> bool {
        if want.iter().all(|v| got.contains(v)) {
            return true;
        }
        if left == 0 {
            return false;
        }
        for i in start..facts.len() {
            let n = got.len();
            got.extend(facts[i].iter().cloned());
            if pick(facts, i + 1, left - 1, got, want) {
                return true;
            }
            got.truncate(n);
        }
        false
    }
    pick(&facts, 0, k, &mut Vec::new(), values)
}

/// Number of set partitions of `n` elements into `k` blocks, by listing
/// restricted growth strings.
pub fn count_partitions(n: usize, k: usize) -> u64 {
    fn go(i: usize, n: usize, k: usize, blocks: usize) -> u64 {
        if i == n {
            return (blocks == k) as u64;
        }
        // Element i joins an existing block or opens the next one.
        let mut c = 0;
        for _ in 0..blocks {
            c += go(i + 1, n, k, blocks);
        }
        if blocks < k {
            c += go(i + 1, n, k, blocks + 1);
        }
        c
    }
    go(0, n, k, 0)
}

/// Number of injective sequences of length `k` over `n` symbols, by listing
/// them.
pub fn count_arrangements(n: usize, k: usize) -> u64 {
    fn go(used: &mut Vec<bool>, left: usize) -> u64 {
        if left == 0 {
            return 1;
        }
        let mut c = 0;
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                c += go(used, left - 1);
                used[i] = false;
            }
        }
        c
    }
    go(&mut vec![false; n], k)
}
