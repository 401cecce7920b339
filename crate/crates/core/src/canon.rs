//! Canonical forms of rules and rule subsumption.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};

use rustc_hash::FxHashMap;

use crate::ast::{name, Adornment, Atom, Constant, Name, Pred, Rule, Term};
use crate::error::{Error, ValidationError};

const LETTERS: [&str; 26] = [
    "X", "Y", "Z", "W", "V", "U", "T", "S", "R", "Q", "P", "O", "N", "M", "L", "K", "J", "I", "H",
    "G", "F", "E", "D", "C", "B", "A",
];

/// Name of the `i`-th canonical variable: X, Y, Z, W, ..., then X1, Y1, ...
pub fn canonical_var_name(i: usize) -> String {
    let (round, k) = (i / LETTERS.len(), i % LETTERS.len());
    if round == 0 {
        LETTERS[k].to_string()
    } else {
        format!("{}{}", LETTERS[k], round)
    }
}

/// A rule in canonical form: equal canonical forms mean the rules are equal
/// up to variable renaming, body order and duplicate atoms.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalForm(Rule);

impl CanonicalForm {
    pub fn rule(&self) -> &Rule {
        &self.0
    }

    pub fn into_rule(self) -> Rule {
        self.0
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Code {
    Var(u32),
    Const(Constant),
    Wild,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct AtomCode {
    pred: Pred,
    terms: Vec<Code>,
}

fn encode(a: &Atom, labels: &HashMap<Name, u32>, next: u32) -> (AtomCode, Vec<Name>) {
    let mut fresh: Vec<Name> = Vec::new();
    let terms = a
        .terms
        .iter()
        .map(|t| match t {
            Term::Const(c) => Code::Const(c.clone()),
            Term::Wildcard => Code::Wild,
            Term::Var(v) => match labels.get(v) {
                Some(&l) => Code::Var(l),
                None => {
                    let pos = fresh.iter().position(|f| f == v).unwrap_or_else(|| {
                        fresh.push(v.clone());
                        fresh.len() - 1
                    });
                    Code::Var(next + pos as u32)
                }
            },
        })
        .collect();
    (AtomCode { pred: a.pred.clone(), terms }, fresh)
}

/// Code of an atom relative to the current labeling: labeled variables come
/// before unlabeled ones, which are numbered by first occurrence. Relative
/// codes order unused atoms exactly as their absolute codes would.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Rel {
    Labeled(u32),
    Fresh(u32),
    Const(Constant),
    Wild,
}

fn relative(a: &Atom, labels: &HashMap<Name, u32>) -> (Pred, Vec<Rel>) {
    let mut fresh: Vec<&Name> = Vec::new();
    let terms = a
        .terms
        .iter()
        .map(|t| match t {
            Term::Const(c) => Rel::Const(c.clone()),
            Term::Wildcard => Rel::Wild,
            Term::Var(v) => match labels.get(v) {
                Some(&l) => Rel::Labeled(l),
                None => {
                    let pos = fresh.iter().position(|f| *f == v).unwrap_or_else(|| {
                        fresh.push(v);
                        fresh.len() - 1
                    });
                    Rel::Fresh(pos as u32)
                }
            },
        })
        .collect();
    (a.pred.clone(), terms)
}

type Key = ((Pred, Vec<Rel>), usize);

struct Search<'a> {
    atoms: &'a [Atom],
    by_var: HashMap<&'a Name, Vec<usize>>,
    /// Relative codes of the unused atoms.
    open: BTreeSet<Key>,
    codes: Vec<(Pred, Vec<Rel>)>,
    best: Option<Vec<AtomCode>>,
    /// Bumped whenever `best` is replaced.
    version: u64,
}

impl<'a> Search<'a> {
    fn new(atoms: &'a [Atom], labels: &HashMap<Name, u32>) -> Search<'a> {
        let mut by_var: HashMap<&Name, Vec<usize>> = HashMap::new();
        for (i, a) in atoms.iter().enumerate() {
            for v in a.vars() {
                let e = by_var.entry(v).or_default();
                if e.last() != Some(&i) {
                    e.push(i);
                }
            }
        }
        let codes: Vec<_> = atoms.iter().map(|a| relative(a, labels)).collect();
        let open = codes.iter().cloned().zip(0..).collect();
        Search { atoms, by_var, open, codes, best: None, version: 0 }
    }

    /// Extends `prefix`; `state` is how `prefix` compares with the same
    /// length prefix of `best`.
    fn run(&mut self, labels: &mut HashMap<Name, u32>, next: u32, prefix: &mut Vec<AtomCode>, state: Ordering) {
        if prefix.len() == self.atoms.len() {
            if self.best.is_none() || state == Ordering::Less {
                self.best = Some(prefix.clone());
                self.version += 1;
            }
            return;
        }
        let min = self.open.first().expect("an unused atom").0.clone();
        let cands: Vec<usize> = self.open.iter().take_while(|(c, _)| *c == min).map(|(_, i)| *i).collect();
        let (first, _) = encode(&self.atoms[cands[0]], labels, next);
        let mut state = state;
        if let Some(best) = &self.best {
            if state == Ordering::Equal {
                match first.cmp(&best[prefix.len()]) {
                    Ordering::Greater => return,
                    o => state = o,
                }
            }
        }
        for i in cands {
            let (code, fresh) = encode(&self.atoms[i], labels, next);
            self.open.remove(&(self.codes[i].clone(), i));
            for (j, f) in fresh.iter().enumerate() {
                labels.insert(f.clone(), next + j as u32);
            }
            let touched = self.relabel(&fresh, labels);
            prefix.push(code);
            let version = self.version;
            self.run(labels, next + fresh.len() as u32, prefix, state);
            if self.version != version {
                // The new best extends the current prefix.
                state = Ordering::Equal;
            }
            prefix.pop();
            for f in &fresh {
                labels.remove(f);
            }
            for (j, old) in touched.into_iter().rev() {
                self.open.remove(&(self.codes[j].clone(), j));
                self.codes[j] = old;
                self.open.insert((self.codes[j].clone(), j));
            }
            self.open.insert((self.codes[i].clone(), i));
        }
    }

    /// Re-encodes the unused atoms mentioning `fresh`, returning their old
    /// codes.
    fn relabel(&mut self, fresh: &[Name], labels: &HashMap<Name, u32>) -> Vec<(usize, (Pred, Vec<Rel>))> {
        let mut touched = Vec::new();
        for f in fresh {
            for &j in self.by_var.get(f).map(Vec::as_slice).unwrap_or_default() {
                if !self.open.contains(&(self.codes[j].clone(), j)) {
                    continue;
                }
                let code = relative(&self.atoms[j], labels);
                if code == self.codes[j] {
                    continue;
                }
                self.open.remove(&(self.codes[j].clone(), j));
                self.open.insert((code.clone(), j));
                touched.push((j, std::mem::replace(&mut self.codes[j], code)));
            }
        }
        touched
    }
}

/// Computes the canonical form of a rule.
///
/// Body variables occurring once become wildcards, duplicate atoms are
/// dropped, head variables are numbered by first occurrence and the labeling
/// of the remaining variables is the one giving the lexicographically least
/// body, found by exhaustive backtracking.
pub fn canonical_form(r: &Rule) -> CanonicalForm {
    let head_vars = r.head_vars();
    let mut body = r.body.clone();
    // Dropping a duplicate can leave a new singleton behind.
    loop {
        let mut counts: HashMap<&Name, usize> = HashMap::new();
        for v in r.head.vars().chain(body.iter().flat_map(|a| a.vars())) {
            *counts.entry(v).or_default() += 1;
        }
        let mut next: Vec<Atom> = body
            .iter()
            .map(|a| Atom {
                pred: a.pred.clone(),
                terms: a
                    .terms
                    .iter()
                    .map(|t| match t {
                        Term::Var(v) if counts[v] == 1 && !head_vars.contains(v) => Term::Wildcard,
                        t => t.clone(),
                    })
                    .collect(),
            })
            .collect();
        next.sort();
        next.dedup();
        if next == body {
            break;
        }
        body = next;
    }

    let mut labels: HashMap<Name, u32> = HashMap::new();
    for (i, v) in head_vars.iter().enumerate() {
        labels.insert(v.clone(), i as u32);
    }
    let mut search = Search::new(&body, &labels);
    search.run(&mut labels, head_vars.len() as u32, &mut Vec::new(), Ordering::Equal);
    let codes = search.best.unwrap_or_default();

    let mut names: BTreeMap<u32, Name> = BTreeMap::new();
    let mut var = |l: u32| names.entry(l).or_insert_with(|| name(&canonical_var_name(l as usize))).clone();
    let head = Atom {
        pred: r.head.pred.clone(),
        terms: r
            .head
            .terms
            .iter()
            .map(|t| match t {
                Term::Var(v) => Term::Var(var(labels[v])),
                t => t.clone(),
            })
            .collect(),
    };
    let body = codes
        .into_iter()
        .map(|c| Atom {
            pred: c.pred,
            terms: c
                .terms
                .into_iter()
                .map(|t| match t {
                    Code::Var(l) => Term::Var(var(l)),
                    Code::Const(c) => Term::Const(c),
                    Code::Wild => Term::Wildcard,
                })
                .collect(),
        })
        .collect();
    CanonicalForm(Rule { head, body })
}

/// Builds an adornment from a rule over EDB predicates.
pub fn make_adornment(r: &Rule) -> Result<Adornment, ValidationError> {
    let bad = |reason: &str| ValidationError::BadAdornment {
        predicate: r.head.pred.base().to_string(),
        reason: reason.to_string(),
    };
    if r.head.pred.is_adorned() || r.body.iter().any(|a| a.pred.is_adorned()) {
        return Err(bad("adornments may not mention adorned predicates"));
    }
    if r.head.terms.contains(&Term::Wildcard) {
        return Err(bad("wildcard in head"));
    }
    if !r.is_safe() {
        return Err(bad("head variable missing from body"));
    }
    Ok(Adornment(canonical_form(r).into_rule()))
}

/// Argument of a source atom: a variable index, a value id, or a wildcard.
#[derive(Clone, Copy)]
enum Src {
    Var(usize),
    Val(u32),
    Any,
}

/// The right-hand rule of a subsumption test, prepared once so that many
/// candidate subsumers can be tested against it.
pub struct SubsumptionTarget {
    base: Name,
    preds: FxHashMap<Pred, u32>,
    vals: FxHashMap<Term, u32>,
    head: Vec<u32>,
    dst: Vec<Vec<u32>>,
    by_arg: FxHashMap<(u32, usize, u32), Vec<usize>>,
    by_pred: FxHashMap<u32, Vec<usize>>,
}

impl SubsumptionTarget {
    pub fn new(r: &Rule) -> SubsumptionTarget {
        // Ids for predicates and terms; every wildcard gets its own.
        let mut preds: FxHashMap<Pred, u32> = FxHashMap::default();
        let mut vals: FxHashMap<Term, u32> = FxHashMap::default();
        let mut next = 0u32;
        let mut id = |t: &Term, vals: &mut FxHashMap<Term, u32>| {
            next += 1;
            match t {
                Term::Wildcard => next,
                t => *vals.entry(t.clone()).or_insert(next),
            }
        };
        let mut dst = Vec::new();
        let mut by_arg: FxHashMap<(u32, usize, u32), Vec<usize>> = FxHashMap::default();
        let mut by_pred: FxHashMap<u32, Vec<usize>> = FxHashMap::default();
        for (i, a) in r.body.iter().enumerate() {
            let n = preds.len() as u32;
            let p = *preds.entry(a.pred.clone()).or_insert(n);
            let args: Vec<u32> = a.terms.iter().map(|t| id(t, &mut vals)).collect();
            by_pred.entry(p).or_default().push(i);
            for (k, &x) in args.iter().enumerate() {
                by_arg.entry((p, k, x)).or_default().push(i);
            }
            dst.push(args);
        }
        let head = r.head.terms.iter().map(|t| id(t, &mut vals)).collect();
        SubsumptionTarget { base: r.head.pred.base().clone(), preds, vals, head, dst, by_arg, by_pred }
    }

    /// Whether `r` subsumes the prepared rule.
    pub fn subsumed_by(&self, r: &Rule) -> Result<bool, Error> {
        if *r.head.pred.base() != self.base || r.head.arity() != self.head.len() {
            return Err(Error::HeadMismatch);
        }
        let mut vars: FxHashMap<&Name, usize> = FxHashMap::default();
        for v in r.head.vars().chain(r.body.iter().flat_map(|a| a.vars())) {
            let n = vars.len();
            vars.entry(v).or_insert(n);
        }
        // A constant absent from the target can match nothing.
        let code = |t: &Term| match t {
            Term::Var(v) => Src::Var(vars[v]),
            Term::Wildcard => Src::Any,
            t => Src::Val(self.vals.get(t).copied().unwrap_or(u32::MAX)),
        };
        let mut search = HomSearch { target: self, src: Vec::new(), h: vec![None; vars.len()], trail: Vec::new() };
        for (t, &v) in r.head.terms.iter().zip(&self.head) {
            if !search.bind(code(t), v) {
                return Ok(false);
            }
        }
        for i in connected_order(&r.body, &|v| search.h[vars[v]].is_some()) {
            let a = &r.body[i];
            let Some(&p) = self.preds.get(&a.pred) else { return Ok(false) };
            search.src.push((p, a.terms.iter().map(code).collect()));
        }
        Ok(search.extend(0))
    }
}

struct HomSearch<'a> {
    target: &'a SubsumptionTarget,
    /// Source atoms as (predicate id, arguments), in search order.
    src: Vec<(u32, Vec<Src>)>,
    h: Vec<Option<u32>>,
    trail: Vec<usize>,
}

impl<'a> HomSearch<'a> {
    fn bind(&mut self, s: Src, v: u32) -> bool {
        match s {
            Src::Any => true,
            Src::Val(x) => x == v,
            Src::Var(i) => match self.h[i] {
                Some(x) => x == v,
                None => {
                    self.h[i] = Some(v);
                    self.trail.push(i);
                    true
                }
            },
        }
    }

    fn undo(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let i = self.trail.pop().unwrap();
            self.h[i] = None;
        }
    }

    /// Target atoms that source atom `i` could map to, narrowed by one fixed
    /// argument.
    fn candidates(&self, i: usize) -> &'a [usize] {
        let t = self.target;
        let (p, args) = &self.src[i];
        for (k, s) in args.iter().enumerate() {
            let fixed = match *s {
                Src::Val(x) => x,
                Src::Var(v) => match self.h[v] {
                    Some(x) => x,
                    None => continue,
                },
                Src::Any => continue,
            };
            return t.by_arg.get(&(*p, k, fixed)).map_or(&[], Vec::as_slice);
        }
        t.by_pred.get(p).map_or(&[], Vec::as_slice)
    }

    fn extend(&mut self, i: usize) -> bool {
        if i == self.src.len() {
            return true;
        }
        for &j in self.candidates(i) {
            let dst = &self.target.dst[j];
            if dst.len() != self.src[i].1.len() {
                continue;
            }
            let mark = self.trail.len();
            let ok = (0..dst.len()).all(|k| self.bind(self.src[i].1[k], dst[k]));
            if ok && self.extend(i + 1) {
                return true;
            }
            self.undo(mark);
        }
        false
    }
}

/// Orders atoms so that each one shares a variable with an earlier atom or
/// the head whenever possible: atoms with constants or head variables come
/// first, then a breadth-first walk over shared variables.
fn connected_order(atoms: &[Atom], bound: &dyn Fn(&Name) -> bool) -> Vec<usize> {
    let mut by_var: FxHashMap<&Name, Vec<usize>> = FxHashMap::default();
    for (i, a) in atoms.iter().enumerate() {
        for v in a.vars() {
            by_var.entry(v).or_default().push(i);
        }
    }
    let mut placed = vec![false; atoms.len()];
    let mut queue: std::collections::VecDeque<usize> = (0..atoms.len())
        .filter(|&i| {
            atoms[i].terms.iter().any(|t| match t {
                Term::Const(_) => true,
                Term::Var(v) => bound(v),
                Term::Wildcard => false,
            })
        })
        .collect();
    let mut out = Vec::with_capacity(atoms.len());
    let mut next_root = 0;
    while out.len() < atoms.len() {
        let i = match queue.pop_front() {
            Some(i) => i,
            None => {
                while placed[next_root] {
                    next_root += 1;
                }
                next_root
            }
        };
        if placed[i] {
            continue;
        }
        placed[i] = true;
        out.push(i);
        for v in atoms[i].vars() {
            queue.extend(by_var[v].iter().copied().filter(|&j| !placed[j]));
        }
    }
    out
}

/// True iff there is a homomorphism from `r1` to `r2` that maps the head of
/// `r1` onto the head of `r2` and every body atom of `r1` into the body of
/// `r2`. Then `r1` derives a superset of what `r2` derives on every
/// instance. Wildcards in `r2` behave as pairwise distinct variables.
pub fn subsumes(r1: &Rule, r2: &Rule) -> Result<bool, Error> {
    SubsumptionTarget::new(r2).subsumed_by(r1)
}
