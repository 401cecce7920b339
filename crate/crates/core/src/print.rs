//! Pretty printing. Output is accepted by the parser.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write;

use crate::ast::{AdornedProgram, Atom, Name, Pred, Program, Rule, Term};
use crate::parse::RESERVED_PREFIX;

struct Names {
    map: HashMap<Name, Option<String>>,
}

impl Names {
    /// Body-only variables occurring once print as `_`; reserved names that
    /// survive get fresh user-visible names.
    fn for_rule(r: &Rule) -> Names {
        let mut counts: HashMap<&Name, usize> = HashMap::new();
        for v in r.head.vars().chain(r.body.iter().flat_map(|a| a.vars())) {
            *counts.entry(v).or_default() += 1;
        }
        let head: BTreeSet<&Name> = r.head.vars().collect();
        let taken: BTreeSet<String> = counts.keys().map(|v| v.to_string()).collect();
        let mut next = 0;
        let mut map = HashMap::new();
        let mut order: Vec<&Name> = r.head.vars().chain(r.body.iter().flat_map(|a| a.vars())).collect();
        order.dedup();
        for v in order {
            if map.contains_key(v) {
                continue;
            }
            let shown = if counts[v] == 1 && !head.contains(v) {
                None
            } else if v.starts_with(RESERVED_PREFIX) {
                loop {
                    next += 1;
                    let cand = format!("V{next}");
                    if !taken.contains(&cand) {
                        break Some(cand);
                    }
                }
            } else {
                Some(v.to_string())
            };
            map.insert(v.clone(), shown);
        }
        Names { map }
    }

    fn term(&self, t: &Term, out: &mut String) {
        match t {
            Term::Var(v) => match self.map.get(v) {
                Some(Some(s)) => out.push_str(s),
                Some(None) => out.push('_'),
                None => out.push_str(v),
            },
            Term::Const(c) => write!(out, "{c}").unwrap(),
            Term::Wildcard => out.push('_'),
        }
    }

    fn atom(&self, a: &Atom, out: &mut String) {
        match &a.pred {
            Pred::Plain(p) => out.push_str(p),
            Pred::Adorned(ap) => {
                out.push_str(&ap.base);
                out.push('[');
                rule_text(ap.adornment.rule(), out);
                out.push(']');
            }
        }
        if !a.terms.is_empty() {
            out.push('(');
            for (i, t) in a.terms.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                self.term(t, out);
            }
            out.push(')');
        }
    }
}

fn rule_text(r: &Rule, out: &mut String) {
    let names = Names::for_rule(r);
    names.atom(&r.head, out);
    if !r.body.is_empty() {
        out.push_str(" :- ");
        let (adorned, plain): (Vec<&Atom>, Vec<&Atom>) = r.body.iter().partition(|a| a.pred.is_adorned());
        for (i, a) in adorned.into_iter().chain(plain).enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            names.atom(a, out);
        }
    }
}

pub fn print_atom(a: &Atom) -> String {
    let mut s = String::new();
    Names { map: HashMap::new() }.atom(a, &mut s);
    s
}

/// A rule without the terminating period.
pub fn print_rule_body(r: &Rule) -> String {
    let mut s = String::new();
    rule_text(r, &mut s);
    s
}

pub fn print_rule(r: &Rule) -> String {
    let mut s = print_rule_body(r);
    s.push('.');
    s
}

pub fn print_program(p: &Program) -> String {
    p.rules().iter().map(|r| print_rule(r) + "\n").collect()
}

pub fn print_adorned_program(p: &AdornedProgram) -> String {
    p.rules().map(|r| print_rule(r) + "\n").collect()
}
