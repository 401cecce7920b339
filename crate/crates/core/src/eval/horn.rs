//! Evaluation of adornment-groundable programs through propositional Horn
//! clauses: each grounding of a head adornment's cover fixes a grounding of
//! the adorned rule, and the resulting clauses are solved by unit
//! propagation.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::ast::{AdornedProgram, Atom, Constant, Name, Pred, Program, Term};
use crate::error::Error;
use crate::print::print_rule;
use crate::width::{edge_cover, hypergraph_of, CoverMode};

use super::{classify_program, EDBInstance, IDBResult, ProgramClass, Tuple};

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HornStats {
    /// Groundings of head-adornment covers that were enumerated.
    pub cover_groundings: usize,
    /// Distinct ground clauses.
    pub clauses: usize,
    /// Atom occurrences over all clauses.
    pub symbols: usize,
}

pub fn horn_ground_evaluate(p: &Program, pi: &AdornedProgram, d: &EDBInstance) -> Result<IDBResult, Error> {
    Ok(horn_ground_evaluate_with_stats(p, pi, d)?.0)
}

type Env = BTreeMap<Name, Constant>;

/// Extends `env` so that `atoms` all hold in `d`, calling `f` on each result.
fn matches(atoms: &[&Atom], d: &EDBInstance, env: &mut Env, f: &mut dyn FnMut(&Env)) {
    let Some((a, rest)) = atoms.split_first() else {
        f(env);
        return;
    };
    let Some(rel) = d.relation(a.pred.base()) else { return };
    for t in rel {
        if t.len() != a.arity() {
            continue;
        }
        let mut bound = Vec::new();
        let mut ok = true;
        for (term, c) in a.terms.iter().zip(t) {
            match term {
                Term::Const(k) => ok = k == c,
                Term::Wildcard => {}
                Term::Var(v) => match env.get(v) {
                    Some(x) => ok = x == c,
                    None => {
                        env.insert(v.clone(), c.clone());
                        bound.push(v.clone());
                    }
                },
            }
            if !ok {
                break;
            }
        }
        if ok {
            matches(rest, d, env, f);
        }
        for v in bound {
            env.remove(&v);
        }
    }
}

fn ground(terms: &[Term], env: &Env) -> Option<Tuple> {
    terms
        .iter()
        .map(|t| match t {
            Term::Const(c) => Some(c.clone()),
            Term::Var(v) => env.get(v).cloned(),
            Term::Wildcard => None,
        })
        .collect()
}

/// Like [`horn_ground_evaluate`], also reporting the size of the Horn system.
pub fn horn_ground_evaluate_with_stats(
    p: &Program,
    pi: &AdornedProgram,
    d: &EDBInstance,
) -> Result<(IDBResult, HornStats), Error> {
    if !classify_program(p).contains(&ProgramClass::AdornmentGroundable) {
        return Err(Error::NotGroundable("some rule violates the groundability conditions".into()));
    }
    let mut stats = HornStats::default();
    let mut atoms: HashMap<(Pred, Tuple), usize> = HashMap::new();
    let mut names: Vec<(Pred, Tuple)> = Vec::new();
    let mut clauses: BTreeSet<(usize, Vec<usize>)> = BTreeSet::new();

    for r in pi.rules() {
        let Some(ad) = r.head.pred.adornment() else {
            return Err(Error::NotGroundable(format!("rule {} has a plain head", print_rule(r))));
        };
        let h = hypergraph_of(ad.rule());
        let cover = edge_cover(&h, &h.out, CoverMode::Integral)?;
        let cover_atoms: Vec<&Atom> = cover.chosen().iter().map(|&e| &ad.body()[h.edges[e].atoms[0]]).collect();
        let (idb, edb): (Vec<&Atom>, Vec<&Atom>) = r.body.iter().partition(|a| a.pred.is_adorned());
        let mut failure = None;
        matches(&cover_atoms, d, &mut Env::new(), &mut |cenv| {
            stats.cover_groundings += 1;
            let Some(values) = ground(&ad.head().terms, cenv) else { return };
            // Transfer the adornment's head values to the rule's head terms.
            let mut env = Env::new();
            for (t, c) in r.head.terms.iter().zip(&values) {
                match t {
                    Term::Const(k) if k != c => return,
                    Term::Var(v) => match env.get(v) {
                        Some(x) if x != c => return,
                        Some(_) => {}
                        None => {
                            env.insert(v.clone(), c.clone());
                        }
                    },
                    _ => {}
                }
            }
            matches(&edb, d, &mut env, &mut |renv| {
                let mut body = Vec::new();
                for a in &idb {
                    let Some(t) = ground(&a.terms, renv) else {
                        failure.get_or_insert_with(|| print_rule(r));
                        return;
                    };
                    body.push(intern(&mut atoms, &mut names, a.pred.clone(), t));
                }
                let head = intern(&mut atoms, &mut names, r.head.pred.clone(), values.clone());
                body.sort_unstable();
                body.dedup();
                clauses.insert((head, body));
            });
        });
        if let Some(rule) = failure {
            return Err(Error::NotGroundable(format!("rule {rule} leaves an IDB atom unground")));
        }
    }
    stats.clauses = clauses.len();
    stats.symbols = clauses.iter().map(|(_, b)| b.len() + 1).sum();

    let truth = propagate(names.len(), &clauses);
    let mut relations: BTreeMap<Pred, BTreeSet<Tuple>> = BTreeMap::new();
    for r in pi.rules() {
        relations.entry(r.head.pred.clone()).or_default();
    }
    for (i, (p, t)) in names.into_iter().enumerate() {
        if truth[i] {
            relations.entry(p).or_default().insert(t);
        }
    }
    Ok((IDBResult { relations }, stats))
}

fn intern(atoms: &mut HashMap<(Pred, Tuple), usize>, names: &mut Vec<(Pred, Tuple)>, p: Pred, t: Tuple) -> usize {
    let n = names.len();
    *atoms.entry((p.clone(), t.clone())).or_insert_with(|| {
        names.push((p, t));
        n
    })
}

/// Minimal model of the clauses: a counter per clause of body atoms not yet
/// true, and a watch list per atom.
fn propagate(n: usize, clauses: &BTreeSet<(usize, Vec<usize>)>) -> Vec<bool> {
    let clauses: Vec<&(usize, Vec<usize>)> = clauses.iter().collect();
    let mut missing: Vec<usize> = clauses.iter().map(|(_, b)| b.len()).collect();
    let mut watch: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, (_, b)) in clauses.iter().enumerate() {
        for &a in b {
            watch[a].push(i);
        }
    }
    let mut truth = vec![false; n];
    let mut queue: Vec<usize> = Vec::new();
    for (i, (h, _)) in clauses.iter().enumerate() {
        if missing[i] == 0 && !truth[*h] {
            truth[*h] = true;
            queue.push(*h);
        }
    }
    while let Some(a) = queue.pop() {
        for &c in &watch[a] {
            missing[c] -= 1;
            let h = clauses[c].0;
            if missing[c] == 0 && !truth[h] {
                truth[h] = true;
                queue.push(h);
            }
        }
    }
    truth
}
