use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::ast::{classify_rule_atoms, Name, Program};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProgramClass {
    /// At most one IDB atom per rule body.
    Linear,
    /// At most two atoms per rule body.
    SimpleChain,
    /// Grounding a rule's head adornment fixes the grounding of the rule.
    AdornmentGroundable,
}

impl fmt::Display for ProgramClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProgramClass::Linear => "linear",
            ProgramClass::SimpleChain => "simple-chain",
            ProgramClass::AdornmentGroundable => "adornment-groundable",
        })
    }
}

/// Syntactic classes the program belongs to.
pub fn classify_program(p: &Program) -> BTreeSet<ProgramClass> {
    let mut out = BTreeSet::new();
    if p.rules().iter().all(|r| classify_rule_atoms(r, p).0.len() <= 1) {
        out.insert(ProgramClass::Linear);
    }
    if p.rules().iter().all(|r| r.body.len() <= 2) {
        out.insert(ProgramClass::SimpleChain);
    }
    if p.rules().iter().all(|r| groundable_rule(r, p)) {
        out.insert(ProgramClass::AdornmentGroundable);
    }
    out
}

/// Every EDB atom either has a head variable it shares with no other body
/// atom, or has all its variables in the head; and every variable of an IDB
/// atom occurs in the head or in an EDB atom.
fn groundable_rule(r: &crate::ast::Rule, p: &Program) -> bool {
    let head: BTreeSet<&Name> = r.head.vars().collect();
    let (idb, edb) = classify_rule_atoms(r, p);
    let edb_ok = r.body.iter().enumerate().filter(|(_, a)| !p.schema().is_idb(a.pred.base())).all(|(i, a)| {
        let vars: BTreeSet<&Name> = a.vars().collect();
        vars.is_subset(&head)
            || vars.iter().any(|v| {
                head.contains(v)
                    && r.body.iter().enumerate().all(|(j, b)| j == i || !b.vars().any(|w| w == *v))
            })
    });
    let covered: BTreeSet<&Name> = head.iter().copied().chain(edb.iter().flat_map(|a| a.vars())).collect();
    edb_ok && idb.iter().all(|a| a.vars().all(|v| covered.contains(v)))
}
