//! Bottom-up evaluation over EDB instances, plus the semantic checks built on
//! it: per-rule boundedness by head adornments and value covers.

mod classify;
mod complexity;
mod horn;
mod tightness;

pub use classify::{classify_program, ProgramClass};
pub use complexity::{complexity_report, fc_decomposition, ComplexityBound, ComplexityReport, Decomposition, Fchw, FchwSource};
pub use horn::{horn_ground_evaluate, horn_ground_evaluate_with_stats, HornStats};
pub use tightness::{freeze, generate_tightness_instance, witness_instance, TightnessInstance};

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use crate::ast::{AdornedProgram, Atom, Constant, Name, Pred, Program, Rule, Term};
use crate::error::Error;
use crate::parse::parse_facts;
use crate::print::{print_atom, print_rule};
use crate::width::{width_of_rule, CoverMode};

pub type Tuple = Vec<Constant>;

/// A database: one finite relation per EDB predicate.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EDBInstance {
    relations: BTreeMap<Name, BTreeSet<Tuple>>,
}

impl EDBInstance {
    pub fn new() -> EDBInstance {
        EDBInstance::default()
    }

    pub fn parse(text: &str) -> Result<EDBInstance, Error> {
        let mut d = EDBInstance::new();
        for (p, t) in parse_facts(text)? {
            d.insert(&p, t)?;
        }
        Ok(d)
    }

    /// Adds a fact; fails when the arity disagrees with earlier facts.
    pub fn insert(&mut self, p: &str, t: Tuple) -> Result<bool, Error> {
        let rel = self.relations.entry(Name::from(p)).or_default();
        if let Some(first) = rel.iter().next() {
            if first.len() != t.len() {
                return Err(Error::Instance(format!("{p} has facts of arity {} and {}", first.len(), t.len())));
            }
        }
        Ok(rel.insert(t))
    }

    pub fn relation(&self, p: &str) -> Option<&BTreeSet<Tuple>> {
        self.relations.get(p)
    }

    pub fn relations(&self) -> impl Iterator<Item = (&Name, &BTreeSet<Tuple>)> {
        self.relations.iter()
    }

    /// Size of the largest relation.
    pub fn max_relation_size(&self) -> usize {
        self.relations.values().map(BTreeSet::len).max().unwrap_or(0)
    }

    pub fn fact_count(&self) -> usize {
        self.relations.values().map(BTreeSet::len).sum()
    }

    /// All facts, one per line, in sorted order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (p, rel) in &self.relations {
            for t in rel {
                out.push_str(&fact_text(p, t));
                out.push('\n');
            }
        }
        out
    }
}

pub fn fact_text(p: &str, t: &[Constant]) -> String {
    print_atom(&Atom::new(p, t.iter().cloned().map(Term::Const).collect())) + "."
}

/// Derived relations, keyed by (possibly adorned) predicate.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IDBResult {
    pub relations: BTreeMap<Pred, BTreeSet<Tuple>>,
}

impl IDBResult {
    pub fn get(&self, p: &Pred) -> Option<&BTreeSet<Tuple>> {
        self.relations.get(p)
    }

    /// Relation of a plain predicate, empty if absent.
    pub fn plain(&self, p: &str) -> BTreeSet<Tuple> {
        self.relations.get(&Pred::plain(p)).cloned().unwrap_or_default()
    }

    pub fn total(&self) -> usize {
        self.relations.values().map(BTreeSet::len).sum()
    }
}

/// Union of the relations of every predicate with base `q`.
pub fn union_adorned(r: &IDBResult, q: &str) -> BTreeSet<Tuple> {
    r.relations
        .iter()
        .filter(|(p, _)| &**p.base() == q)
        .flat_map(|(_, ts)| ts.iter().cloned())
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Slot {
    Var(usize),
    Const(Constant),
    Wild,
}

struct CAtom {
    rel: usize,
    slots: Vec<Slot>,
    /// Positions bound before this atom is joined (constants or variables
    /// bound by earlier atoms).
    key: Vec<usize>,
}

struct CRule {
    head_rel: usize,
    head: Vec<Slot>,
    body: Vec<CAtom>,
    nvars: usize,
}

struct Db {
    rels: Vec<Vec<Tuple>>,
    sets: Vec<HashSet<Tuple>>,
    idb: Vec<bool>,
    preds: Vec<Pred>,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum Src {
    Full,
    Delta,
}

type IndexKey = (usize, Src, Vec<usize>);
type Index = HashMap<Vec<Constant>, Vec<usize>>;

struct Joiner<'a> {
    db: &'a Db,
    delta: &'a [Vec<Tuple>],
    cache: HashMap<IndexKey, Index>,
}

impl Joiner<'_> {
    fn relation(&self, rel: usize, src: Src) -> &Vec<Tuple> {
        match src {
            Src::Full => &self.db.rels[rel],
            Src::Delta => &self.delta[rel],
        }
    }

    fn index(&mut self, rel: usize, src: Src, key: &[usize]) -> &Index {
        let k = (rel, src, key.to_vec());
        if !self.cache.contains_key(&k) {
            let mut idx: Index = HashMap::new();
            for (i, t) in self.relation(rel, src).iter().enumerate() {
                idx.entry(key.iter().map(|&p| t[p].clone()).collect()).or_default().push(i);
            }
            self.cache.insert(k.clone(), idx);
        }
        &self.cache[&k]
    }

    fn join(&mut self, r: &CRule, srcs: &[Src], out: &mut Vec<Tuple>) {
        let mut env: Vec<Option<Constant>> = vec![None; r.nvars];
        self.step(r, srcs, 0, &mut env, out);
    }

    fn step(&mut self, r: &CRule, srcs: &[Src], i: usize, env: &mut Vec<Option<Constant>>, out: &mut Vec<Tuple>) {
        let Some(a) = r.body.get(i) else {
            out.push(
                r.head
                    .iter()
                    .map(|s| match s {
                        Slot::Var(v) => env[*v].clone().expect("safe rule binds head variables"),
                        Slot::Const(c) => c.clone(),
                        Slot::Wild => unreachable!("no wildcards in heads"),
                    })
                    .collect(),
            );
            return;
        };
        let key: Vec<Constant> = a
            .key
            .iter()
            .map(|&p| match &a.slots[p] {
                Slot::Const(c) => c.clone(),
                Slot::Var(v) => env[*v].clone().unwrap(),
                Slot::Wild => unreachable!(),
            })
            .collect();
        let hits: Vec<usize> = match self.index(a.rel, srcs[i], &a.key).get(&key) {
            Some(h) => h.clone(),
            None => return,
        };
        for h in hits {
            let t = self.relation(a.rel, srcs[i])[h].clone();
            let mut bound = Vec::new();
            let mut ok = true;
            for (slot, c) in a.slots.iter().zip(&t) {
                if let Slot::Var(v) = slot {
                    match &env[*v] {
                        Some(x) if x != c => {
                            ok = false;
                            break;
                        }
                        Some(_) => {}
                        None => {
                            env[*v] = Some(c.clone());
                            bound.push(*v);
                        }
                    }
                }
            }
            if ok {
                self.step(r, srcs, i + 1, env, out);
            }
            for v in bound {
                env[v] = None;
            }
        }
    }
}

fn compile(rules: &[Rule], d: &EDBInstance) -> Result<(Db, Vec<CRule>), Error> {
    let mut ids: HashMap<Pred, usize> = HashMap::new();
    let mut arity: Vec<usize> = Vec::new();
    let mut preds: Vec<Pred> = Vec::new();
    let mut idb: Vec<bool> = Vec::new();
    let mut intern = |p: &Pred, k: usize, head: bool| -> Result<usize, Error> {
        let id = *ids.entry(p.clone()).or_insert_with(|| {
            preds.push(p.clone());
            arity.push(k);
            idb.push(false);
            preds.len() - 1
        });
        if arity[id] != k {
            return Err(Error::Instance(format!("{} used with arities {} and {k}", print_pred(p), arity[id])));
        }
        idb[id] |= head;
        Ok(id)
    };
    let mut out = Vec::new();
    for r in rules {
        let head_rel = intern(&r.head.pred, r.head.arity(), true)?;
        let mut vars: HashMap<Name, usize> = HashMap::new();
        let mut body = Vec::new();
        for a in &r.body {
            let rel = intern(&a.pred, a.arity(), false)?;
            let before = vars.len();
            let mut key = Vec::new();
            let mut slots = Vec::new();
            for (p, t) in a.terms.iter().enumerate() {
                slots.push(match t {
                    Term::Const(c) => {
                        key.push(p);
                        Slot::Const(c.clone())
                    }
                    Term::Wildcard => Slot::Wild,
                    Term::Var(v) => match vars.get(v) {
                        Some(&i) => {
                            if i < before {
                                key.push(p);
                            }
                            Slot::Var(i)
                        }
                        None => Slot::Var(vars.len()),
                    },
                });
                if let Term::Var(v) = t {
                    let n = vars.len();
                    vars.entry(v.clone()).or_insert(n);
                }
            }
            body.push(CAtom { rel, slots, key });
        }
        let head = r
            .head
            .terms
            .iter()
            .map(|t| match t {
                Term::Var(v) => vars.get(v).map(|&i| Slot::Var(i)).ok_or_else(|| {
                    Error::Instance(format!("unsafe rule {}", print_rule(r)))
                }),
                Term::Const(c) => Ok(Slot::Const(c.clone())),
                Term::Wildcard => Err(Error::Instance(format!("wildcard in head of {}", print_rule(r)))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        out.push(CRule { head_rel, head, body, nvars: vars.len() });
    }
    let n = preds.len();
    let mut db = Db { rels: vec![Vec::new(); n], sets: vec![HashSet::new(); n], idb, preds };
    for (p, rel) in d.relations() {
        let pred = Pred::Plain(p.clone());
        let Some(&id) = ids.get(&pred) else { continue };
        if db.idb[id] {
            return Err(Error::Instance(format!("{p} is an IDB predicate of the program")));
        }
        for t in rel {
            if t.len() != arity[id] {
                return Err(Error::Instance(format!("{p} has arity {} in the program, fact {}", arity[id], fact_text(p, t))));
            }
            db.sets[id].insert(t.clone());
            db.rels[id].push(t.clone());
        }
    }
    Ok((db, out))
}

fn print_pred(p: &Pred) -> String {
    print_atom(&Atom { pred: p.clone(), terms: vec![] })
}

fn result(db: &Db) -> IDBResult {
    let mut relations = BTreeMap::new();
    for (i, p) in db.preds.iter().enumerate() {
        if db.idb[i] {
            relations.insert(p.clone(), db.rels[i].iter().cloned().collect());
        }
    }
    IDBResult { relations }
}

/// Provenance: for each rule, every head tuple it can derive at the fixpoint.
pub type Provenance = Vec<BTreeSet<Tuple>>;

fn semi_naive(rules: &[Rule], d: &EDBInstance, track: bool) -> Result<(IDBResult, Provenance), Error> {
    let (mut db, crules) = compile(rules, d)?;
    let n = db.rels.len();
    let mut prov: Provenance = vec![BTreeSet::new(); if track { rules.len() } else { 0 }];
    let mut delta: Vec<Vec<Tuple>> = vec![Vec::new(); n];
    let mut first = true;
    loop {
        let mut fresh: Vec<Vec<Tuple>> = vec![Vec::new(); n];
        {
            let mut j = Joiner { db: &db, delta: &delta, cache: HashMap::new() };
            for (ri, r) in crules.iter().enumerate() {
                let mut derived = Vec::new();
                if first {
                    j.join(r, &vec![Src::Full; r.body.len()], &mut derived);
                } else {
                    for (k, a) in r.body.iter().enumerate() {
                        if !db.idb[a.rel] || delta[a.rel].is_empty() {
                            continue;
                        }
                        let mut srcs = vec![Src::Full; r.body.len()];
                        srcs[k] = Src::Delta;
                        j.join(r, &srcs, &mut derived);
                    }
                }
                for t in derived {
                    if track {
                        prov[ri].insert(t.clone());
                    }
                    if !db.sets[r.head_rel].contains(&t) {
                        fresh[r.head_rel].push(t);
                    }
                }
            }
        }
        first = false;
        let mut any = false;
        for (rel, ts) in fresh.iter_mut().enumerate() {
            ts.sort();
            ts.dedup();
            for t in ts.iter() {
                db.sets[rel].insert(t.clone());
                db.rels[rel].push(t.clone());
            }
            any |= !ts.is_empty();
        }
        if !any {
            break;
        }
        delta = fresh;
    }
    Ok((result(&db), prov))
}

/// Semi-naive evaluation of arbitrary rules (plain or adorned).
pub fn evaluate_rules(rules: &[Rule], d: &EDBInstance) -> Result<IDBResult, Error> {
    Ok(semi_naive(rules, d, false)?.0)
}

/// Semi-naive evaluation that also records which tuples each rule derives.
pub fn evaluate_with_provenance(rules: &[Rule], d: &EDBInstance) -> Result<(IDBResult, Provenance), Error> {
    semi_naive(rules, d, true)
}

/// Naive fixpoint iteration; slower, kept as a reference.
pub fn evaluate_naive(rules: &[Rule], d: &EDBInstance) -> Result<IDBResult, Error> {
    let (mut db, crules) = compile(rules, d)?;
    loop {
        let mut fresh: Vec<(usize, Tuple)> = Vec::new();
        {
            let empty = vec![Vec::new(); db.rels.len()];
            let mut j = Joiner { db: &db, delta: &empty, cache: HashMap::new() };
            for r in &crules {
                let mut derived = Vec::new();
                j.join(r, &vec![Src::Full; r.body.len()], &mut derived);
                fresh.extend(derived.into_iter().map(|t| (r.head_rel, t)));
            }
        }
        let mut any = false;
        for (rel, t) in fresh {
            if db.sets[rel].insert(t.clone()) {
                db.rels[rel].push(t);
                any = true;
            }
        }
        if !any {
            return Ok(result(&db));
        }
    }
}

pub fn evaluate(p: &Program, d: &EDBInstance) -> Result<IDBResult, Error> {
    evaluate_rules(p.rules(), d)
}

pub fn evaluate_adorned(pi: &AdornedProgram, d: &EDBInstance) -> Result<IDBResult, Error> {
    evaluate_rules(&pi.plain_rules(), d)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub rule: String,
    pub tuple: Tuple,
}

/// Tuples derived by an adorned rule that its head adornment does not
/// produce on `d`.
pub fn check_rule_bounded(pi: &AdornedProgram, d: &EDBInstance) -> Result<Vec<Violation>, Error> {
    let rules = pi.plain_rules();
    let (_, prov) = evaluate_with_provenance(&rules, d)?;
    let mut out = Vec::new();
    let mut cache: HashMap<Pred, BTreeSet<Tuple>> = HashMap::new();
    for (r, derived) in rules.iter().zip(prov) {
        let Some(ad) = r.head.pred.adornment() else { continue };
        let allowed = match cache.get(&r.head.pred) {
            Some(s) => s,
            None => {
                let res = evaluate_rules(std::slice::from_ref(ad.rule()), d)?;
                let s = res.get(&ad.rule().head.pred).cloned().unwrap_or_default();
                cache.entry(r.head.pred.clone()).or_insert(s)
            }
        };
        for t in derived.difference(allowed) {
            out.push(Violation { rule: print_rule(r), tuple: t.clone() });
        }
    }
    Ok(out)
}

/// Smallest number of EDB facts whose values jointly contain `values`, if it
/// is at most `limit`.
pub fn min_fact_cover(d: &EDBInstance, values: &BTreeSet<Constant>, limit: usize) -> Option<usize> {
    let facts: Vec<BTreeSet<&Constant>> = d
        .relations()
        .flat_map(|(_, rel)| rel.iter())
        .map(|t| t.iter().filter(|c| values.contains(*c)).collect::<BTreeSet<_>>())
        .filter(|s| !s.is_empty())
        .collect();
    let want: Vec<&Constant> = values.iter().collect();
    (0..=limit).find(|&k| cover_within(&facts, &want, &mut vec![false; want.len()], k))
}

fn cover_within(facts: &[BTreeSet<&Constant>], want: &[&Constant], got: &mut Vec<bool>, k: usize) -> bool {
    let Some(i) = got.iter().position(|g| !g) else { return true };
    if k == 0 {
        return false;
    }
    for f in facts.iter().filter(|f| f.contains(want[i])) {
        let before = got.clone();
        for (j, w) in want.iter().enumerate() {
            if f.contains(w) {
                got[j] = true;
            }
        }
        if cover_within(facts, want, got, k - 1) {
            return true;
        }
        *got = before;
    }
    false
}

/// Tuples of some adorned predicate whose head-variable values cannot be
/// covered by as many EDB facts as the integral width of its adornment.
pub fn check_value_cover(pi: &AdornedProgram, d: &EDBInstance) -> Result<Vec<Violation>, Error> {
    let res = evaluate_adorned(pi, d)?;
    let mut out = Vec::new();
    for (p, tuples) in &res.relations {
        let Some(ad) = p.adornment() else { continue };
        let k = width_of_rule(ad.rule(), CoverMode::Integral)?.to_integer();
        let k: usize = k.try_into().expect("width fits in usize");
        let positions: Vec<usize> = (0..ad.head().arity()).filter(|&i| ad.head().terms[i].is_var()).collect();
        for t in tuples {
            let values: BTreeSet<Constant> = positions.iter().map(|&i| t[i].clone()).collect();
            if min_fact_cover(d, &values, k).is_none() {
                out.push(Violation { rule: print_pred(p), tuple: t.clone() });
            }
        }
    }
    Ok(out)
}
