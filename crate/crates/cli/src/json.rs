//! JSON shapes of command output. `docs/json-schema.md` documents them.

use std::collections::{BTreeMap, BTreeSet};

use dlsb::eval::{IDBResult, Tuple};
use dlsb::{print_rule, AdornedProgram};
use serde::{Deserialize, Serialize};

#[derive(Serialize, Deserialize, Debug, PartialEq)]
pub struct JsonRule {
    pub rule: String,
    /// Base predicate of the head.
    pub head: String,
    /// Head adornment, absent for plain heads.
    pub adornment: Option<String>,
    pub source: Option<usize>,
    pub exact: bool,
}

#[derive(Serialize, Deserialize, Debug, PartialEq)]
pub struct JsonAdornedProgram {
    pub rules: Vec<JsonRule>,
    /// Adornments per IDB predicate.
    pub adornments: BTreeMap<String, Vec<String>>,
}

pub fn adorned_program(pi: &AdornedProgram) -> JsonAdornedProgram {
    let rules = pi
        .rules
        .iter()
        .map(|r| JsonRule {
            rule: print_rule(&r.rule),
            head: r.rule.head.pred.base().to_string(),
            adornment: r.rule.head.pred.adornment().map(|a| print_rule(a.rule())),
            source: r.source,
            exact: r.exact,
        })
        .collect();
    let mut adornments: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for q in &pi.schema.idb {
        adornments.insert(q.to_string(), Vec::new());
    }
    for a in pi.head_predicates() {
        adornments.entry(a.base.to_string()).or_default().push(print_rule(a.adornment.rule()));
    }
    JsonAdornedProgram { rules, adornments }
}

#[derive(Serialize, Deserialize, Debug, PartialEq)]
pub struct JsonWidths {
    /// `integral` or `fractional`.
    pub mode: String,
    /// Width per IDB predicate, rendered as `p` or `p/q`.
    pub predicates: BTreeMap<String, String>,
    pub program: String,
}

#[derive(Serialize, Deserialize, Debug, PartialEq)]
pub struct JsonBoundedness {
    /// `non-recursive`, `degraded` or `inconclusive`.
    pub outcome: String,
    pub budget: Option<usize>,
    /// Limit that stopped an inconclusive run.
    pub limit: Option<String>,
    pub program: JsonAdornedProgram,
    /// Conjunctive queries per IDB predicate; only for non-recursive outcomes.
    pub ucq: Option<BTreeMap<String, Vec<String>>>,
}

/// Relations as sorted lists of tuples.
pub type JsonRelations = BTreeMap<String, Vec<Tuple>>;

pub fn relations(rel: &BTreeMap<String, BTreeSet<Tuple>>) -> JsonRelations {
    rel.iter().map(|(k, v)| (k.clone(), v.iter().cloned().collect())).collect()
}

#[derive(Serialize, Deserialize, Debug, PartialEq)]
pub struct JsonEval {
    /// `semi-naive` or `horn`.
    pub method: String,
    pub relations: JsonRelations,
    pub horn: Option<dlsb::eval::HornStats>,
}

#[derive(Serialize, Deserialize, Debug, PartialEq, Clone)]
pub struct JsonCheck {
    /// `equivalence`, `rule-bounded` or `value-cover`.
    pub check: String,
    pub cases: usize,
    pub violations: usize,
    /// Up to ten violations, as text.
    pub examples: Vec<String>,
}

#[derive(Serialize, Deserialize, Debug, PartialEq)]
pub struct JsonVerify {
    pub programs: usize,
    pub instances: usize,
    pub seed: Option<u64>,
    pub checks: Vec<JsonCheck>,
    pub ok: bool,
}

/// Plain relations of an evaluation keyed by base name, merging adorned ones.
pub fn by_base(r: &IDBResult) -> BTreeMap<String, BTreeSet<Tuple>> {
    let mut out: BTreeMap<String, BTreeSet<Tuple>> = BTreeMap::new();
    for (p, ts) in &r.relations {
        out.entry(p.base().to_string()).or_default().extend(ts.iter().cloned());
    }
    out
}
