//! Adornment construction: rewriting a program so that every IDB predicate
//! carries a conjunctive query over the EDBs that upper-bounds what it derives.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use crate::ast::{
    classify_rule_atoms, name, Adornment, AdornedPredicate, AdornedProgram, AdornedRule, Atom, Name,
    Pred, Program, Rule, Term,
};
use crate::canon::{canonical_form, make_adornment, subsumes, CanonicalForm, SubsumptionTarget};
use crate::error::Error;
use crate::unify::{mgu, Substitution};

/// Relaxation function applied to each candidate head adornment.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relaxation {
    /// Keep the inlined query as is.
    Id,
    /// Keep only head variables and drop dominated atoms.
    GOut,
    /// Identity while the body has at most `k` atoms, `GOut` beyond.
    GK(usize),
    /// Minimum cover of the head variables, each variable kept once.
    GMin,
}

impl fmt::Display for Relaxation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Relaxation::Id => write!(f, "id"),
            Relaxation::GOut => write!(f, "gout"),
            Relaxation::GK(k) => write!(f, "gk={k}"),
            Relaxation::GMin => write!(f, "gmin"),
        }
    }
}

/// Membership test deciding whether a candidate rule is already represented.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Membership {
    HEq,
    HCont,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub max_rules: usize,
    pub max_iterations: usize,
}

pub const DEFAULT_MAX_RULES: usize = 10_000;
pub const DEFAULT_MAX_ITERATIONS: usize = 1_000;

impl Default for Limits {
    /// `DLSB_MAX_RULES` in the environment overrides the rule cap.
    fn default() -> Limits {
        let max_rules = std::env::var("DLSB_MAX_RULES")
            .ok()
            .and_then(|s| s.trim().parse().ok())
            .unwrap_or(DEFAULT_MAX_RULES);
        Limits { max_rules, max_iterations: DEFAULT_MAX_ITERATIONS }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Limit {
    Rules,
    Iterations,
}

impl fmt::Display for Limit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Limit::Rules => write!(f, "rule limit"),
            Limit::Iterations => write!(f, "iteration limit"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct BudgetExceeded {
    pub partial: AdornedProgram,
    pub limit: Limit,
}

impl fmt::Display for BudgetExceeded {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "adornment construction hit the {} after {} rules", self.limit, self.partial.len())
    }
}

impl std::error::Error for BudgetExceeded {}

fn check_edb_only(rho: &Rule, f: Relaxation) -> Result<(), Error> {
    if rho.head.pred.is_adorned() || rho.body.iter().any(|a| a.pred.is_adorned()) {
        return Err(Error::Relaxation(f.to_string(), "body must only mention EDB predicates".into()));
    }
    Ok(())
}

/// Every non-head argument becomes `_`.
fn wildcard_non_head(rho: &Rule) -> Vec<Atom> {
    let head: BTreeSet<Name> = rho.head_vars().into_iter().collect();
    rho.body
        .iter()
        .map(|a| Atom {
            pred: a.pred.clone(),
            terms: a
                .terms
                .iter()
                .map(|t| match t {
                    Term::Var(v) if head.contains(v) => t.clone(),
                    _ => Term::Wildcard,
                })
                .collect(),
        })
        .collect()
}

fn dominates(b: &Atom, a: &Atom) -> bool {
    b.pred == a.pred
        && b.terms.len() == a.terms.len()
        && a.terms.iter().zip(&b.terms).all(|(x, y)| x == y || *x == Term::Wildcard)
}

fn gout(rho: &Rule) -> Rule {
    let mut body = wildcard_non_head(rho);
    body.sort();
    body.dedup();
    let kept: Vec<Atom> = body
        .iter()
        .filter(|a| a.terms.iter().any(Term::is_var))
        .filter(|a| !body.iter().any(|b| b != *a && dominates(b, a)))
        .cloned()
        .collect();
    Rule::new(rho.head.clone(), kept)
}

fn gmin(rho: &Rule) -> Rule {
    let base = canonical_form(&Rule::new(rho.head.clone(), wildcard_non_head(rho))).into_rule();
    let head_vars = base.head_vars();
    let sets: Vec<BTreeSet<&Name>> = base.body.iter().map(|a| a.vars().collect()).collect();
    let covers = |idx: &[usize]| head_vars.iter().all(|v| idx.iter().any(|&i| sets[i].contains(v)));
    let n = base.body.len();
    let mut chosen: Vec<usize> = Vec::new();
    'size: for k in 0..=n {
        let mut idx: Vec<usize> = (0..k).collect();
        loop {
            if covers(&idx) {
                chosen = idx;
                break 'size;
            }
            // Next k-combination in lexicographic order.
            let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else { break };
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }
    let mut seen: BTreeSet<Name> = BTreeSet::new();
    let body = chosen
        .into_iter()
        .map(|i| {
            let a = &base.body[i];
            Atom {
                pred: a.pred.clone(),
                terms: a
                    .terms
                    .iter()
                    .map(|t| match t {
                        Term::Var(v) if seen.insert(v.clone()) => t.clone(),
                        _ => Term::Wildcard,
                    })
                    .collect(),
            }
        })
        .collect();
    Rule::new(base.head, body)
}

/// Applies a relaxation function to a rule whose body mentions only EDBs.
pub fn relax(f: Relaxation, rho: &Rule) -> Result<Adornment, Error> {
    check_edb_only(rho, f)?;
    let out = match f {
        Relaxation::Id => rho.clone(),
        Relaxation::GK(k) if rho.body.len() <= k => rho.clone(),
        Relaxation::GOut | Relaxation::GK(_) => gout(rho),
        Relaxation::GMin => gmin(rho),
    };
    make_adornment(&out).map_err(|e| Error::Relaxation(f.to_string(), e.to_string()))
}

fn adorned_head(r: &Rule) -> Option<&Arc<AdornedPredicate>> {
    match &r.head.pred {
        Pred::Adorned(a) => Some(a),
        Pred::Plain(_) => None,
    }
}

/// Whether `r` is already represented in `pi` under the membership function.
///
/// `HEq` asks for a rule with the same canonical form. `HCont` additionally
/// accepts `r` when its head predicate would not be recursive in `pi` plus
/// `r`, and some exact adorned predicate of `pi` on the same base has an
/// adornment subsuming the head adornment of `r`.
pub fn membership(h: Membership, r: &Rule, pi: &AdornedProgram) -> bool {
    let c = canonical_form(r);
    if pi.rules().any(|x| canonical_form(x) == c) {
        return true;
    }
    if h == Membership::HEq {
        return false;
    }
    let Some(head) = adorned_head(r) else { return false };
    let mut with: Vec<Rule> = pi.plain_rules();
    with.push(r.clone());
    if crate::graph::recursive_predicates(&with).contains(&r.head.pred) {
        return false;
    }
    pi.rules
        .iter()
        .filter(|x| x.exact)
        .filter_map(|x| adorned_head(&x.rule))
        .filter(|a| a.base == head.base)
        .any(|a| subsumes(a.adornment.rule(), head.adornment.rule()).unwrap_or(false))
}

/// Largest inlined query kept as a witness.
const WITNESS_CAP: usize = 64;

struct Entry {
    pred: Arc<AdornedPredicate>,
    key: Pred,
    exact: bool,
    witness: Option<Rule>,
    sweep: usize,
}

struct Candidate {
    rule: Rule,
    key: CanonicalForm,
    rho: Adornment,
    exact: bool,
    witness: Option<Rule>,
    body_preds: Vec<usize>,
}

struct Engine<'a> {
    program: &'a Program,
    order: Vec<usize>,
    g: Relaxation,
    h: Membership,
    entries: Vec<Entry>,
    index: HashMap<Arc<AdornedPredicate>, usize>,
    by_base: HashMap<Name, Vec<usize>>,
    succ: Vec<Vec<usize>>,
    canon: HashSet<CanonicalForm>,
    rules: Vec<AdornedRule>,
    fresh: usize,
}

/// Fresh copy of an adornment's head and body, plus the matching copy of a
/// witness that shares its head.
type Instance = (Vec<Term>, Vec<Atom>, Option<Vec<Atom>>);

impl Engine<'_> {
    fn fresh_var(&mut self) -> Term {
        self.fresh += 1;
        Term::Var(name(&format!("_a{}", self.fresh)))
    }

    fn instantiate(&mut self, e: usize) -> Instance {
        let rho = self.entries[e].pred.adornment.rule().clone();
        let witness = self.entries[e].witness.clone();
        let mut map: HashMap<Name, Term> = HashMap::new();
        for v in rho.vars() {
            let f = self.fresh_var();
            map.insert(v, f);
        }
        let s = Substitution::from_pairs(map.clone());
        let head = s.apply_terms(&rho.head.terms);
        let body = rho.body.iter().map(|a| s.apply_atom(a)).collect();
        let w = witness.map(|w| {
            let mut wm: HashMap<Name, Term> = HashMap::new();
            for (t, u) in w.head.terms.iter().zip(&head) {
                if let Term::Var(v) = t {
                    wm.insert(v.clone(), u.clone());
                }
            }
            for v in w.vars() {
                wm.entry(v).or_insert_with(|| self.fresh_var());
            }
            let ws = Substitution::from_pairs(wm);
            w.body.iter().map(|a| ws.apply_atom(a)).collect()
        });
        (head, body, w)
    }

    fn build(&mut self, ri: usize, combo: &[usize]) -> Option<Candidate> {
        let program = self.program;
        let r = &program.rules()[ri];
        let (idb, edb) = classify_rule_atoms(r, program);
        let mut pairs = Vec::new();
        let mut inst = Vec::new();
        for (a, &e) in idb.iter().zip(combo) {
            let (head, body, w) = self.instantiate(e);
            pairs.push((a.terms.clone(), head));
            inst.push((body, w));
        }
        let sigma = mgu(&pairs).ok()?;
        let head_terms = sigma.apply_terms(&r.head.terms);
        let edb_atoms: Vec<Atom> = edb.iter().map(|a| sigma.apply_atom(a)).collect();
        let mut rho0_body: Vec<Atom> = Vec::new();
        let mut witness_body: Option<Vec<Atom>> = Some(Vec::new());
        for (body, w) in &inst {
            rho0_body.extend(body.iter().map(|a| sigma.apply_atom(a)));
            match (w, witness_body.as_mut()) {
                (Some(w), Some(wb)) => wb.extend(w.iter().map(|a| sigma.apply_atom(a))),
                _ => witness_body = None,
            }
        }
        rho0_body.extend(edb_atoms.iter().cloned());
        let base = r.head.pred.base().clone();
        let plain_head = Atom { pred: Pred::Plain(base.clone()), terms: head_terms.clone() };
        let rho0 = Rule::new(plain_head.clone(), rho0_body);

        let premises_exact = combo.iter().all(|&e| self.entries[e].exact);
        let g = match self.g {
            Relaxation::GK(_) if !premises_exact => Relaxation::GOut,
            g => g,
        };
        let rho = relax(g, &rho0).ok()?;
        // Id returns the adornment of rho0 itself.
        let exact = premises_exact && (g == Relaxation::Id || make_adornment(&rho0).ok()? == rho);
        let witness = witness_body.and_then(|mut wb| {
            wb.extend(edb_atoms.iter().cloned());
            (wb.len() <= WITNESS_CAP).then(|| Rule::new(plain_head, wb))
        });

        let pred = Arc::new(AdornedPredicate { base, adornment: rho.clone() });
        let mut body: Vec<Atom> = idb
            .iter()
            .zip(combo)
            .map(|(a, &e)| Atom { pred: self.entries[e].key.clone(), terms: sigma.apply_terms(&a.terms) })
            .collect();
        body.extend(edb_atoms);
        let key = canonical_form(&Rule::new(Atom { pred: Pred::Adorned(pred), terms: head_terms }, body));
        Some(Candidate { rule: key.rule().clone(), key, rho, exact, witness, body_preds: combo.to_vec() })
    }

    /// The candidate's head would lie on a cycle once the candidate is added.
    fn would_recurse(&self, head: Option<usize>, body: &[usize]) -> bool {
        let Some(h) = head else { return false };
        let mut seen = vec![false; self.entries.len()];
        let mut stack = vec![h];
        let mut reach_self = false;
        while let Some(x) = stack.pop() {
            for &y in &self.succ[x] {
                if y == h {
                    reach_self = true;
                }
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        reach_self || body.iter().any(|&b| b == h || seen[b])
    }

    fn is_member(&self, c: &Candidate) -> bool {
        if self.canon.contains(&c.key) {
            return true;
        }
        if self.h == Membership::HEq {
            return false;
        }
        let base = c.rule.head.pred.base();
        let head = self.index.get(&AdornedPredicate { base: base.clone(), adornment: c.rho.clone() });
        if self.would_recurse(head.copied(), &c.body_preds) {
            return false;
        }
        let target = SubsumptionTarget::new(c.rho.rule());
        self.by_base
            .get(base)
            .into_iter()
            .flatten()
            .any(|&e| self.entries[e].exact && target.subsumed_by(self.entries[e].pred.adornment.rule()).unwrap_or(false))
    }

    fn add(&mut self, ri: usize, c: Candidate, sweep: usize) {
        let pred = Arc::new(AdornedPredicate { base: c.rule.head.pred.base().clone(), adornment: c.rho });
        let e = match self.index.get(&pred) {
            Some(&e) => {
                let entry = &mut self.entries[e];
                if c.exact && !entry.exact {
                    entry.exact = true;
                    entry.witness = c.witness.clone();
                }
                e
            }
            None => {
                let e = self.entries.len();
                self.entries.push(Entry {
                    pred: pred.clone(),
                    key: Pred::Adorned(pred.clone()),
                    exact: c.exact,
                    witness: c.witness.clone(),
                    sweep,
                });
                self.index.insert(pred.clone(), e);
                self.by_base.entry(pred.base.clone()).or_default().push(e);
                self.succ.push(Vec::new());
                e
            }
        };
        for &b in &c.body_preds {
            if !self.succ[b].contains(&e) {
                self.succ[b].push(e);
            }
        }
        self.canon.insert(c.key);
        self.rules.push(AdornedRule { rule: c.rule, source: Some(self.order[ri]), exact: c.exact, witness: c.witness });
    }

    fn finish(&self) -> AdornedProgram {
        let mut rules = self.rules.clone();
        rules.sort_by(|a, b| a.rule.cmp(&b.rule));
        AdornedProgram { rules, schema: self.program.schema().clone() }
    }

    fn run(&mut self, limits: Limits) -> Result<AdornedProgram, BudgetExceeded> {
        let n = self.program.rules().len();
        let mut sweep = 0;
        loop {
            if sweep >= limits.max_iterations {
                return Err(BudgetExceeded { partial: self.finish(), limit: Limit::Iterations });
            }
            let before = self.entries.len();
            let mut tuples: Vec<(usize, Vec<usize>)> = Vec::new();
            for ri in 0..n {
                let r = &self.program.rules()[ri];
                let (idb, _) = classify_rule_atoms(r, self.program);
                let bases: Vec<&Name> = idb.iter().map(|a| a.pred.base()).collect();
                if sweep == 0 {
                    if bases.is_empty() {
                        tuples.push((ri, vec![]));
                    }
                    continue;
                }
                // Each tuple is produced exactly once over the whole run: the
                // first component created in the previous sweep sits at j.
                for j in 0..bases.len() {
                    let choices: Vec<Vec<usize>> = bases
                        .iter()
                        .enumerate()
                        .map(|(k, b)| {
                            let all = self.by_base.get(*b).cloned().unwrap_or_default();
                            all.into_iter()
                                .filter(|&e| {
                                    let s = self.entries[e].sweep;
                                    match k.cmp(&j) {
                                        std::cmp::Ordering::Less => s + 1 < sweep,
                                        std::cmp::Ordering::Equal => s + 1 == sweep,
                                        std::cmp::Ordering::Greater => s < sweep,
                                    }
                                })
                                .collect()
                        })
                        .collect();
                    product(&choices, |combo| tuples.push((ri, combo.to_vec())));
                }
            }
            for (ri, combo) in tuples {
                let Some(c) = self.build(ri, &combo) else { continue };
                if self.is_member(&c) {
                    continue;
                }
                self.add(ri, c, sweep);
                if self.rules.len() > limits.max_rules {
                    return Err(BudgetExceeded { partial: self.finish(), limit: Limit::Rules });
                }
            }
            sweep += 1;
            if self.entries.len() == before {
                return Ok(self.finish());
            }
        }
    }
}

fn product(choices: &[Vec<usize>], mut f: impl FnMut(&[usize])) {
    if choices.iter().any(Vec::is_empty) {
        return;
    }
    let mut idx = vec![0usize; choices.len()];
    let mut combo: Vec<usize> = choices.iter().map(|c| c[0]).collect();
    loop {
        f(&combo);
        let mut k = choices.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < choices[k].len() {
                combo[k] = choices[k][idx[k]];
                break;
            }
            idx[k] = 0;
            combo[k] = choices[k][0];
        }
    }
}

/// Builds the adorned program for `p` under relaxation `g` and membership `h`.
///
/// Rules are processed in canonical order and the output is sorted by
/// canonical form, so the result does not depend on the input rule order.
pub fn adorn_program(
    p: &Program,
    g: Relaxation,
    h: Membership,
    limits: Limits,
) -> Result<AdornedProgram, BudgetExceeded> {
    let mut order: Vec<usize> = (0..p.rules().len()).collect();
    let keys: Vec<CanonicalForm> = p.rules().iter().map(canonical_form).collect();
    order.sort_by(|&a, &b| keys[a].cmp(&keys[b]).then(a.cmp(&b)));
    let sorted = Program::new(order.iter().map(|&i| p.rules()[i].clone()).collect())
        .expect("reordering keeps a valid program valid");
    let mut engine = Engine {
        program: &sorted,
        order,
        g,
        h,
        entries: Vec::new(),
        index: HashMap::new(),
        by_base: HashMap::new(),
        succ: Vec::new(),
        canon: HashSet::new(),
        rules: Vec::new(),
        fresh: 0,
    };
    engine.run(limits)
}

/// Distinct adornments of IDB predicate `q` in `pi`.
pub fn adornments_of(pi: &AdornedProgram, q: &str) -> Result<Vec<Adornment>, Error> {
    if !pi.schema.is_idb(q) {
        return Err(Error::UnknownPredicate(q.to_string()));
    }
    Ok(pi.head_predicates_of(q).into_iter().map(|a| a.adornment.clone()).collect())
}
