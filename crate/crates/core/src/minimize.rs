//! Minimal equivalent programs: every adornment replaced by its minimal
//! relaxation, with predicates merged when their adornments coincide.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use crate::adorn::{relax, Relaxation};
use crate::ast::{AdornedPredicate, AdornedProgram, AdornedRule, Atom, Name, Pred, Rule, Term};
use crate::canon::{canonical_form, CanonicalForm};

fn minimal_pred(p: &Pred, memo: &mut HashMap<Pred, Pred>) -> Pred {
    let Pred::Adorned(a) = p else { return p.clone() };
    memo.entry(p.clone())
        .or_insert_with(|| {
            let adornment = relax(Relaxation::GMin, a.adornment.rule()).expect("adornments mention only EDBs");
            Pred::Adorned(Arc::new(AdornedPredicate { base: a.base.clone(), adornment }))
        })
        .clone()
}

fn rewrite(a: &Atom, memo: &mut HashMap<Pred, Pred>) -> Atom {
    Atom { pred: minimal_pred(&a.pred, memo), terms: a.terms.clone() }
}

/// Applies the minimal relaxation to every adornment of `pi`, rewriting all
/// references and dropping rules that become duplicates.
pub fn minimize_program(pi: &AdornedProgram) -> AdornedProgram {
    let mut memo = HashMap::new();
    let mut seen: BTreeMap<CanonicalForm, usize> = BTreeMap::new();
    let mut rules: Vec<AdornedRule> = Vec::new();
    for r in &pi.rules {
        let rule = Rule::new(rewrite(&r.rule.head, &mut memo), r.rule.body.iter().map(|a| rewrite(a, &mut memo)).collect());
        let unchanged = rule == r.rule;
        let c = canonical_form(&rule);
        let ar = AdornedRule {
            rule: c.rule().clone(),
            source: r.source,
            exact: r.exact && unchanged,
            witness: r.witness.clone(),
        };
        match seen.get(&c) {
            Some(&i) => rules[i].exact |= ar.exact,
            None => {
                seen.insert(c, rules.len());
                rules.push(ar);
            }
        }
    }
    rules.sort_by(|a, b| a.rule.cmp(&b.rule));
    AdornedProgram { rules, schema: pi.schema.clone() }
}

/// Every head variable of every adornment occurs in exactly one body atom,
/// and no adornment has an atom made only of wildcards.
pub fn is_minimal(pi: &AdornedProgram) -> bool {
    let preds: BTreeSet<&Arc<AdornedPredicate>> = pi
        .rules()
        .flat_map(|r| std::iter::once(&r.head).chain(&r.body))
        .filter_map(|a| match &a.pred {
            Pred::Adorned(p) => Some(p),
            Pred::Plain(_) => None,
        })
        .collect();
    preds.into_iter().all(|p| {
        let rho = p.adornment.rule();
        let blank = rho.body.iter().any(|a| !a.terms.is_empty() && a.terms.iter().all(|t| *t == Term::Wildcard));
        !blank
            && rho.head_vars().iter().all(|v: &Name| rho.body.iter().filter(|a| a.vars().any(|w| w == v)).count() == 1)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adorn::{adorn_program, Limits, Membership};
    use crate::parse::parse_program;
    use crate::print::print_adorned_program;

    #[test]
    fn minimal_after_minimize() {
        let p = parse_program("p(X,Y) :- e(X,Y), f(X). q(X) :- p(X,Y), e(Y,X).").unwrap();
        let pi = adorn_program(&p, Relaxation::Id, Membership::HEq, Limits::default()).unwrap();
        assert!(!is_minimal(&pi));
        let m = minimize_program(&pi);
        assert!(is_minimal(&m));
        assert_eq!(print_adorned_program(&minimize_program(&m)), print_adorned_program(&m));
    }
}
