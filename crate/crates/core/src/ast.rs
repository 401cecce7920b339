//! Syntax trees for positive datalog programs and their adorned rewritings.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::ValidationError;

/// Interned identifier. Cloning is a reference-count bump.
pub type Name = Arc<str>;

pub fn name(s: &str) -> Name {
    Arc::from(s)
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Constant {
    Int(i64),
    Sym(Name),
}

impl fmt::Display for Constant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constant::Int(i) => write!(f, "{i}"),
            Constant::Sym(s) => write!(f, "{s}"),
        }
    }
}

/// A term. `Wildcard` only survives parsing inside adornments; program rules
/// carry fresh variables in its place.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(Name),
    Const(Constant),
    Wildcard,
}

impl Term {
    pub fn var(s: &str) -> Term {
        Term::Var(name(s))
    }

    pub fn as_var(&self) -> Option<&Name> {
        match self {
            Term::Var(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }
}

/// An adornment: a rule whose body mentions only EDB predicates, kept in
/// canonical form so that structural equality is equivalence up to renaming.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Adornment(pub(crate) Rule);

impl Adornment {
    pub fn rule(&self) -> &Rule {
        &self.0
    }

    pub fn head(&self) -> &Atom {
        &self.0.head
    }

    pub fn body(&self) -> &[Atom] {
        &self.0.body
    }

    /// Distinct head variables in order of first occurrence.
    pub fn head_vars(&self) -> Vec<Name> {
        self.0.head_vars()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AdornedPredicate {
    pub base: Name,
    pub adornment: Adornment,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pred {
    Plain(Name),
    Adorned(Arc<AdornedPredicate>),
}

impl Pred {
    pub fn plain(s: &str) -> Pred {
        Pred::Plain(name(s))
    }

    /// Underlying predicate symbol for both plain and adorned predicates.
    pub fn base(&self) -> &Name {
        match self {
            Pred::Plain(n) => n,
            Pred::Adorned(a) => &a.base,
        }
    }

    pub fn adornment(&self) -> Option<&Adornment> {
        match self {
            Pred::Plain(_) => None,
            Pred::Adorned(a) => Some(&a.adornment),
        }
    }

    pub fn is_adorned(&self) -> bool {
        matches!(self, Pred::Adorned(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub pred: Pred,
    pub terms: Vec<Term>,
}

impl Atom {
    pub fn new(pred: &str, terms: Vec<Term>) -> Atom {
        Atom { pred: Pred::plain(pred), terms }
    }

    pub fn arity(&self) -> usize {
        self.terms.len()
    }

    pub fn vars(&self) -> impl Iterator<Item = &Name> {
        self.terms.iter().filter_map(Term::as_var)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rule {
    pub head: Atom,
    pub body: Vec<Atom>,
}

impl Rule {
    pub fn new(head: Atom, body: Vec<Atom>) -> Rule {
        Rule { head, body }
    }

    pub fn head_vars(&self) -> Vec<Name> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for v in self.head.vars() {
            if seen.insert(v.clone()) {
                out.push(v.clone());
            }
        }
        out
    }

    pub fn vars(&self) -> BTreeSet<Name> {
        std::iter::once(&self.head)
            .chain(self.body.iter())
            .flat_map(|a| a.vars().cloned())
            .collect()
    }

    pub fn body_vars(&self) -> BTreeSet<Name> {
        self.body.iter().flat_map(|a| a.vars().cloned()).collect()
    }

    pub fn is_safe(&self) -> bool {
        let body = self.body_vars();
        self.head.vars().all(|v| body.contains(v))
    }

    pub fn term_count(&self) -> usize {
        self.head.arity() + self.body.iter().map(Atom::arity).sum::<usize>()
    }
}

/// Predicate arities and the IDB/EDB partition of a program.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Schema {
    pub arities: BTreeMap<Name, usize>,
    pub idb: BTreeSet<Name>,
    pub edb: BTreeSet<Name>,
}

impl Schema {
    pub fn arity(&self, p: &str) -> Option<usize> {
        self.arities.get(p).copied()
    }

    pub fn is_idb(&self, p: &str) -> bool {
        self.idb.contains(p)
    }

    pub fn max_edb_arity(&self) -> usize {
        self.edb.iter().filter_map(|e| self.arity(e)).max().unwrap_or(0)
    }

    fn from_rules(rules: &[Rule]) -> Result<Schema, ValidationError> {
        let mut s = Schema::default();
        for (i, r) in rules.iter().enumerate() {
            for a in std::iter::once(&r.head).chain(r.body.iter()) {
                let p = a.pred.base().clone();
                match s.arities.get(&p) {
                    Some(&k) if k != a.arity() => {
                        return Err(ValidationError::ArityMismatch {
                            predicate: p.to_string(),
                            expected: k,
                            found: a.arity(),
                            rule: i,
                        })
                    }
                    Some(_) => {}
                    None => {
                        s.arities.insert(p, a.arity());
                    }
                }
            }
            s.idb.insert(r.head.pred.base().clone());
        }
        for p in s.arities.keys() {
            if !s.idb.contains(p) {
                s.edb.insert(p.clone());
            }
        }
        Ok(s)
    }
}

/// A validated plain program: non-empty, safe, arity-consistent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    rules: Vec<Rule>,
    schema: Schema,
}

impl Program {
    pub fn new(rules: Vec<Rule>) -> Result<Program, ValidationError> {
        if rules.is_empty() {
            return Err(ValidationError::Empty);
        }
        for (i, r) in rules.iter().enumerate() {
            if r.body.is_empty() {
                return Err(ValidationError::Fact { rule: i });
            }
            if std::iter::once(&r.head).chain(r.body.iter()).any(|a| a.pred.is_adorned()) {
                return Err(ValidationError::AdornedInPlain { rule: i });
            }
            if r.head.terms.contains(&Term::Wildcard) {
                return Err(ValidationError::WildcardInHead { rule: i });
            }
            if !r.is_safe() {
                let body = r.body_vars();
                let v = r.head.vars().find(|v| !body.contains(*v)).unwrap();
                return Err(ValidationError::Unsafe { rule: i, variable: v.to_string() });
            }
        }
        let schema = Schema::from_rules(&rules)?;
        Ok(Program { rules, schema })
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn rule_count(&self) -> usize {
        self.rules.len()
    }

    /// Total number of term occurrences across all rules.
    pub fn term_count(&self) -> usize {
        self.rules.iter().map(Rule::term_count).sum()
    }

    pub fn idb_atoms<'a>(&'a self, r: &'a Rule) -> impl Iterator<Item = &'a Atom> {
        r.body.iter().filter(move |a| self.schema.is_idb(a.pred.base()))
    }

    pub fn edb_atoms<'a>(&'a self, r: &'a Rule) -> impl Iterator<Item = &'a Atom> {
        r.body.iter().filter(move |a| !self.schema.is_idb(a.pred.base()))
    }
}

/// Splits a rule's body into (IDB atoms, EDB atoms) with respect to `p`.
pub fn classify_rule_atoms<'a>(r: &'a Rule, p: &Program) -> (Vec<&'a Atom>, Vec<&'a Atom>) {
    r.body.iter().partition(|a| p.schema.is_idb(a.pred.base()))
}

/// A rule of an adorned program together with bookkeeping from construction.
#[derive(Clone, Debug)]
pub struct AdornedRule {
    pub rule: Rule,
    /// Index of the originating rule in the source program.
    pub source: Option<usize>,
    /// The derivation reproduces its head adornment exactly (no relaxation
    /// anywhere below it).
    pub exact: bool,
    /// The fully inlined conjunctive query this rule was built from, before
    /// any relaxation. Only kept while it stays small.
    pub witness: Option<Rule>,
}

impl PartialEq for AdornedRule {
    fn eq(&self, other: &Self) -> bool {
        self.rule == other.rule
    }
}

impl Eq for AdornedRule {}

/// An adorned program. Every IDB atom carries an adornment; EDB atoms are plain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdornedProgram {
    pub rules: Vec<AdornedRule>,
    pub schema: Schema,
}

impl AdornedProgram {
    pub fn rules(&self) -> impl Iterator<Item = &Rule> {
        self.rules.iter().map(|r| &r.rule)
    }

    pub fn plain_rules(&self) -> Vec<Rule> {
        self.rules().cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Distinct adorned predicates occurring as rule heads, in sorted order.
    pub fn head_predicates(&self) -> Vec<Arc<AdornedPredicate>> {
        let set: BTreeSet<Arc<AdornedPredicate>> = self
            .rules()
            .filter_map(|r| match &r.head.pred {
                Pred::Adorned(a) => Some(a.clone()),
                Pred::Plain(_) => None,
            })
            .collect();
        set.into_iter().collect()
    }

    pub fn head_predicates_of(&self, base: &str) -> Vec<Arc<AdornedPredicate>> {
        self.head_predicates().into_iter().filter(|a| &*a.base == base).collect()
    }

    /// Adorned predicates whose head is on a cycle of the dependency graph.
    pub fn recursive_predicates(&self) -> BTreeSet<Pred> {
        crate::graph::recursive_predicates(self.rules())
    }

    pub fn is_recursive(&self) -> bool {
        !self.recursive_predicates().is_empty()
    }
}
