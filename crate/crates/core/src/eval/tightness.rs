//! Instances on which the size bound is attained, and frozen witnesses.

use std::collections::HashMap;

use crate::ast::{name, AdornedPredicate, AdornedProgram, Atom, Constant, Name, Pred, Program, Rule, Term};
use crate::error::Error;

use super::{EDBInstance, Tuple};

#[derive(Clone, Debug)]
pub struct TightnessInstance {
    pub program: Program,
    pub edb: EDBInstance,
    /// The IDB predicate whose size meets the bound.
    pub query: Name,
}

/// Program and instance on which `|q|` equals the first size bound.
///
/// There are `m` EDB relations `e1..em` of arity `nu`, each holding `n`
/// tuples with pairwise distinct values. For every `k <= omega`, every choice
/// of `k` relation symbols and every `mu`-tuple over the `k * nu` body
/// variables there is one rule, so `q` collects every `mu`-tuple whose values
/// come from at most `omega` EDB tuples.
pub fn generate_tightness_instance(
    omega: u32,
    mu: u32,
    nu: u32,
    m: u32,
    n: u32,
    max_rules: usize,
) -> Result<TightnessInstance, Error> {
    if m == 0 || nu == 0 || omega == 0 {
        return Err(Error::TooLarge("tightness instance needs m, nu, omega >= 1".into()));
    }
    let count: u128 = (1..=omega as u128).map(|k| (m as u128).pow(k as u32) * (k * nu as u128).pow(mu)).sum();
    if count > max_rules as u128 {
        return Err(Error::TooLarge(format!("tightness program needs {count} rules, cap is {max_rules}")));
    }
    let rel = |i: u32| format!("e{}", i + 1);
    let var = |j: u32| Term::Var(name(&format!("X{}", j + 1)));
    let mut rules = Vec::new();
    for k in 1..=omega {
        for syms in tuples(m, k) {
            let body: Vec<Atom> = syms
                .iter()
                .enumerate()
                .map(|(a, &s)| Atom::new(&rel(s), (0..nu).map(|p| var(a as u32 * nu + p)).collect()))
                .collect();
            for head in tuples(k * nu, mu) {
                rules.push(Rule::new(Atom::new("q", head.into_iter().map(var).collect()), body.clone()));
            }
        }
    }
    let program = Program::new(rules)?;
    let mut edb = EDBInstance::new();
    for i in 0..m {
        for r in 0..n {
            let base = (n * nu * i + r * nu + 1) as i64;
            edb.insert(&rel(i), (0..nu as i64).map(|p| Constant::Int(base + p)).collect())?;
        }
    }
    Ok(TightnessInstance { program, edb, query: name("q") })
}

/// All length-`len` sequences over `0..base`, lexicographically.
fn tuples(base: u32, len: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..base).map(move |x| {
                    let mut t = t.clone();
                    t.push(x);
                    t
                })
            })
            .collect();
    }
    out
}

/// First value used for frozen variables; far above constants in practice.
const FROZEN_BASE: i64 = 1 << 40;

/// Canonical instance of a conjunctive query over EDBs: every variable and
/// every wildcard occurrence becomes its own constant. Returns the instance
/// and the frozen head tuple.
pub fn freeze(r: &Rule) -> Result<(EDBInstance, Tuple), Error> {
    let mut vals: HashMap<Name, Constant> = HashMap::new();
    let mut next = FROZEN_BASE;
    let mut val = |t: &Term| -> Constant {
        match t {
            Term::Const(c) => c.clone(),
            Term::Var(v) => vals
                .entry(v.clone())
                .or_insert_with(|| {
                    next += 1;
                    Constant::Int(next)
                })
                .clone(),
            Term::Wildcard => {
                next += 1;
                Constant::Int(next)
            }
        }
    };
    let head: Tuple = r.head.terms.iter().map(&mut val).collect();
    let mut d = EDBInstance::new();
    for a in &r.body {
        if let Pred::Adorned(_) = a.pred {
            return Err(Error::Instance("only EDB atoms can be frozen".into()));
        }
        d.insert(a.pred.base(), a.terms.iter().map(&mut val).collect())?;
    }
    Ok((d, head))
}

/// Frozen witness of an adorned predicate: an instance on which the
/// predicate derives the returned tuple.
pub fn witness_instance(pi: &AdornedProgram, p: &AdornedPredicate) -> Option<Result<(EDBInstance, Tuple), Error>> {
    pi.rules
        .iter()
        .filter(|r| matches!(&r.rule.head.pred, Pred::Adorned(a) if **a == *p))
        .find_map(|r| r.witness.as_ref())
        .map(freeze)
}
