//! Substitutions, most general unifiers and renaming apart.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::ast::{name, Atom, Constant, Name, Rule, Term};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Substitution {
    map: BTreeMap<Name, Term>,
}

impl Substitution {
    pub fn new() -> Substitution {
        Substitution::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Name, Term)>) -> Substitution {
        Substitution { map: pairs.into_iter().collect() }
    }

    pub fn get(&self, v: &str) -> Option<&Term> {
        self.map.get(v)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Name, &Term)> {
        self.map.iter()
    }

    pub fn apply_term(&self, t: &Term) -> Term {
        match t {
            Term::Var(v) => self.map.get(v).cloned().unwrap_or_else(|| t.clone()),
            t => t.clone(),
        }
    }

    pub fn apply_terms(&self, ts: &[Term]) -> Vec<Term> {
        ts.iter().map(|t| self.apply_term(t)).collect()
    }

    pub fn apply_atom(&self, a: &Atom) -> Atom {
        Atom { pred: a.pred.clone(), terms: self.apply_terms(&a.terms) }
    }

    pub fn apply_rule(&self, r: &Rule) -> Rule {
        Rule { head: self.apply_atom(&r.head), body: r.body.iter().map(|a| self.apply_atom(a)).collect() }
    }

    /// True when applying the substitution twice equals applying it once.
    pub fn is_idempotent(&self) -> bool {
        self.map.values().all(|t| match t {
            Term::Var(v) => !self.map.contains_key(v),
            _ => true,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum UnifyFailure {
    #[error("cannot unify constants {0} and {1}")]
    Clash(Constant, Constant),
    #[error("tuples of different length")]
    Length,
}

/// Union-find node for one equivalence class of variables.
struct Classes {
    parent: Vec<usize>,
    value: Vec<Option<Constant>>,
}

impl Classes {
    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }
}

/// Simultaneous most general unifier of the pairs `(s_i, t_i)`.
///
/// When two variables are identified, the one whose first occurrence in the
/// pair list (scanning each `s_i` then `t_i`) comes later is mapped to the
/// earlier one. Wildcards unify with anything and bind nothing. The result is
/// idempotent. Terms are flat, so there is nothing for an occurs check to
/// reject.
pub fn mgu(pairs: &[(Vec<Term>, Vec<Term>)]) -> Result<Substitution, UnifyFailure> {
    let mut index: HashMap<Name, usize> = HashMap::new();
    let mut order: Vec<Name> = Vec::new();
    for (s, t) in pairs {
        if s.len() != t.len() {
            return Err(UnifyFailure::Length);
        }
        for v in s.iter().chain(t.iter()).filter_map(Term::as_var) {
            index.entry(v.clone()).or_insert_with(|| {
                order.push(v.clone());
                order.len() - 1
            });
        }
    }
    let n = order.len();
    let mut cl = Classes { parent: (0..n).collect(), value: vec![None; n] };
    for (s, t) in pairs {
        for (a, b) in s.iter().zip(t) {
            match (a, b) {
                (Term::Wildcard, _) | (_, Term::Wildcard) => {}
                (Term::Const(c), Term::Const(d)) => {
                    if c != d {
                        return Err(UnifyFailure::Clash(c.clone(), d.clone()));
                    }
                }
                (Term::Var(v), Term::Const(c)) | (Term::Const(c), Term::Var(v)) => {
                    let r = cl.find(index[v]);
                    match &cl.value[r] {
                        Some(d) if d != c => return Err(UnifyFailure::Clash(d.clone(), c.clone())),
                        _ => cl.value[r] = Some(c.clone()),
                    }
                }
                (Term::Var(v), Term::Var(w)) => {
                    let (x, y) = (cl.find(index[v]), cl.find(index[w]));
                    if x == y {
                        continue;
                    }
                    let (keep, drop) = if x < y { (x, y) } else { (y, x) };
                    let merged = match (cl.value[keep].take(), cl.value[drop].take()) {
                        (Some(c), Some(d)) if c != d => return Err(UnifyFailure::Clash(c, d)),
                        (c, d) => c.or(d),
                    };
                    cl.parent[drop] = keep;
                    cl.value[keep] = merged;
                }
            }
        }
    }
    let mut map = BTreeMap::new();
    for i in 0..n {
        let r = cl.find(i);
        let target = match &cl.value[r] {
            Some(c) => Term::Const(c.clone()),
            None if r == i => continue,
            None => Term::Var(order[r].clone()),
        };
        map.insert(order[i].clone(), target);
    }
    Ok(Substitution { map })
}

/// Copies of the rules with pairwise disjoint variables. The first rule is
/// unchanged; later rules get a numeric suffix on every variable, avoiding
/// every name already in use.
pub fn rename_apart(rules: &[Rule]) -> Vec<Rule> {
    let mut used: BTreeSet<Name> = rules.iter().flat_map(|r| r.vars()).collect();
    let mut out = Vec::with_capacity(rules.len());
    for (i, r) in rules.iter().enumerate() {
        if i == 0 {
            out.push(r.clone());
            continue;
        }
        let mut pairs = Vec::new();
        for v in r.vars() {
            let mut k = i;
            let fresh = loop {
                let cand = name(&format!("{v}{k}"));
                if !used.contains(&cand) {
                    break cand;
                }
                k += rules.len();
            };
            used.insert(fresh.clone());
            pairs.push((v, Term::Var(fresh)));
        }
        out.push(Substitution::from_pairs(pairs).apply_rule(r));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_rule;

    fn vars(s: &[&str]) -> Vec<Term> {
        s.iter()
            .map(|x| match x.parse::<i64>() {
                Ok(i) => Term::Const(Constant::Int(i)),
                Err(_) if x.chars().next().unwrap().is_lowercase() => Term::Const(Constant::Sym(name(x))),
                Err(_) => Term::var(x),
            })
            .collect()
    }

    #[test]
    fn later_variable_maps_to_earlier() {
        let s = mgu(&[(vars(&["X", "Y", "Z", "Z"]), vars(&["X", "Y", "Z", "W"]))]).unwrap();
        assert_eq!(s, Substitution::from_pairs([(name("W"), Term::var("Z"))]));
    }

    #[test]
    fn constants_bind() {
        let s = mgu(&[(vars(&["a", "X"]), vars(&["Y", "b"]))]).unwrap();
        assert_eq!(s.get("Y"), Some(&Term::Const(Constant::Sym(name("a")))));
        assert_eq!(s.get("X"), Some(&Term::Const(Constant::Sym(name("b")))));
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn clash_fails() {
        assert!(matches!(mgu(&[(vars(&["a"]), vars(&["b"]))]), Err(UnifyFailure::Clash(..))));
        assert!(mgu(&[(vars(&["X", "X"]), vars(&["1", "2"]))]).is_err());
    }

    #[test]
    fn chains_are_composed() {
        let s = mgu(&[(vars(&["X", "Y"]), vars(&["Y", "Z"])), (vars(&["Z"]), vars(&["3"]))]).unwrap();
        assert!(s.is_idempotent());
        for v in ["X", "Y", "Z"] {
            assert_eq!(s.get(v), Some(&Term::Const(Constant::Int(3))));
        }
    }

    #[test]
    fn rename_apart_keeps_first() {
        let r1 = parse_rule("p(V,V) :- e(V,W).").unwrap();
        let out = rename_apart(&[r1.clone(), r1.clone()]);
        assert_eq!(out[0], r1);
        assert!(out[0].vars().is_disjoint(&out[1].vars()));
        assert_eq!(crate::canon::canonical_form(&out[1]), crate::canon::canonical_form(&r1));
    }
}
