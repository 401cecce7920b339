//! Evaluation-cost formulas and free-connex decompositions of rules.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::adorn::adornments_of;
use crate::ast::{AdornedProgram, Name, Program, Rule};
use crate::error::Error;
use crate::width::{edge_cover, hypergraph_of, width_of_program, CoverMode, Hypergraph};

use super::{classify_program, ProgramClass};

/// Rules with more body atoms than this are not searched.
pub const MAX_SEARCH_ATOMS: usize = 5;
/// Rules with more variables than this are not searched.
pub const MAX_SEARCH_VARS: usize = 8;

/// A tree decomposition whose bags are covered by body atoms.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decomposition {
    pub bags: Vec<BTreeSet<Name>>,
    /// Tree edges as pairs of bag indices.
    pub edges: Vec<(usize, usize)>,
    /// Bags forming the connected subtree whose union is the head variables.
    pub free: Vec<usize>,
    /// Largest integral edge cover of a bag.
    pub width: u32,
}

impl Decomposition {
    /// Every atom lies in a bag, every variable's bags form a subtree, and
    /// the free bags form a subtree with union exactly `h.out`.
    pub fn is_valid_for(&self, h: &Hypergraph) -> bool {
        let n = self.bags.len();
        if self.edges.len() + 1 != n.max(1) || !connected(n, &self.edges, &(0..n).collect()) {
            return n == 0 && h.vertices.is_empty();
        }
        let all: BTreeSet<Name> = self.bags.iter().flatten().cloned().collect();
        if all != h.vertices {
            return false;
        }
        if !h.edges.iter().all(|e| self.bags.iter().any(|b| e.vertices.is_subset(b))) {
            return false;
        }
        for v in &h.vertices {
            let holding: BTreeSet<usize> = (0..n).filter(|&i| self.bags[i].contains(v)).collect();
            if !connected(n, &self.edges, &holding) {
                return false;
            }
        }
        let free: BTreeSet<usize> = self.free.iter().copied().collect();
        let union: BTreeSet<Name> = free.iter().flat_map(|&i| self.bags[i].iter().cloned()).collect();
        union == h.out && (free.is_empty() || connected(n, &self.edges, &free))
    }
}

/// Whether `nodes` induce a connected subgraph of the tree.
fn connected(n: usize, edges: &[(usize, usize)], nodes: &BTreeSet<usize>) -> bool {
    let Some(&start) = nodes.iter().next() else { return true };
    let mut seen = vec![false; n];
    let mut stack = vec![start];
    seen[start] = true;
    while let Some(x) = stack.pop() {
        for &(a, b) in edges {
            for (u, w) in [(a, b), (b, a)] {
                if u == x && nodes.contains(&w) && !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
    }
    nodes.iter().all(|&x| seen[x])
}

/// Decomposition induced by eliminating variables in `order`.
fn eliminate(h: &Hypergraph, order: &[Name], widths: &mut HashMap<BTreeSet<Name>, u32>) -> Result<Decomposition, Error> {
    let pos: BTreeMap<&Name, usize> = order.iter().enumerate().map(|(i, v)| (v, i)).collect();
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); order.len()];
    for e in &h.edges {
        for a in &e.vertices {
            for b in &e.vertices {
                if a != b {
                    adj[pos[a]].insert(pos[b]);
                }
            }
        }
    }
    let mut bags = Vec::new();
    let mut parent: Vec<Option<usize>> = Vec::new();
    for i in 0..order.len() {
        let later: Vec<usize> = adj[i].iter().copied().filter(|&j| j > i).collect();
        for &a in &later {
            for &b in &later {
                if a != b {
                    adj[a].insert(b);
                }
            }
        }
        bags.push(std::iter::once(i).chain(later.iter().copied()).map(|j| order[j].clone()).collect::<BTreeSet<_>>());
        parent.push(later.first().copied());
    }
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let free: Vec<usize> = (0..order.len()).filter(|&i| h.out.contains(&order[i])).collect();
    // Roots of separate components are linked; preferring a free root keeps
    // the free bags connected.
    let roots: Vec<usize> = (0..order.len()).filter(|&i| parent[i].is_none()).collect();
    let hub = roots.iter().copied().find(|r| free.contains(r)).or(roots.first().copied());
    for (i, p) in parent.iter().enumerate() {
        match p {
            Some(j) => edges.push((i, *j)),
            None if Some(i) != hub => edges.push((i, hub.unwrap())),
            None => {}
        }
    }
    let mut width = 0;
    for b in &bags {
        let w = match widths.get(b) {
            Some(w) => *w,
            None => {
                let w = edge_cover(h, b, CoverMode::Integral)?.value.to_integer().to_u32().unwrap();
                widths.insert(b.clone(), w);
                w
            }
        };
        width = width.max(w);
    }
    Ok(Decomposition { bags, edges, free, width })
}

fn permutations(items: &[Name]) -> Vec<Vec<Name>> {
    if items.is_empty() {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let x = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x.clone());
            out.push(p);
        }
    }
    out
}

/// Minimum-width free-connex decomposition of a rule's body, searching all
/// elimination orders that eliminate existential variables before head
/// variables. `None` when the rule exceeds the search limits.
pub fn fc_decomposition(r: &Rule) -> Result<Option<Decomposition>, Error> {
    let h = hypergraph_of(r);
    if r.body.len() > MAX_SEARCH_ATOMS || h.vertices.len() > MAX_SEARCH_VARS {
        return Ok(None);
    }
    let bound: Vec<Name> = h.vertices.iter().filter(|v| !h.out.contains(*v)).cloned().collect();
    let free: Vec<Name> = h.out.iter().cloned().collect();
    let frees = permutations(&free);
    let mut widths = HashMap::new();
    let mut best: Option<Decomposition> = None;
    for b in permutations(&bound) {
        for f in &frees {
            let order: Vec<Name> = b.iter().chain(f).cloned().collect();
            let d = eliminate(&h, &order, &mut widths)?;
            debug_assert!(d.is_valid_for(&h));
            if best.as_ref().is_none_or(|x| d.width < x.width) {
                best = Some(d);
            }
        }
    }
    Ok(best)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FchwSource {
    /// Exhaustive search; integral width, an upper bound on the fractional one.
    SearchIntegral,
    /// At most two body atoms per rule.
    SimpleChainBound,
    /// Not computed.
    Symbolic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fchw {
    pub value: Option<u32>,
    pub source: FchwSource,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexityBound {
    pub class: String,
    /// Formula in f, |P|, N, ew and fchw.
    pub formula: String,
    /// The formula with every known parameter filled in.
    pub instantiated: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexityReport {
    pub classes: Vec<ProgramClass>,
    /// Largest number of adornments of one predicate.
    pub f: u64,
    pub rules: usize,
    pub ew: u32,
    pub fchw: Fchw,
    pub bounds: Vec<ComplexityBound>,
}

fn program_fchw(p: &Program, classes: &BTreeSet<ProgramClass>) -> Result<Fchw, Error> {
    let mut best = Some(0);
    for r in p.rules() {
        match fc_decomposition(r)? {
            Some(d) => best = best.map(|b: u32| b.max(d.width)),
            None => best = None,
        }
    }
    Ok(match best {
        Some(w) => Fchw { value: Some(w), source: FchwSource::SearchIntegral },
        None if classes.contains(&ProgramClass::SimpleChain) => {
            Fchw { value: Some(2), source: FchwSource::SimpleChainBound }
        }
        None => Fchw { value: None, source: FchwSource::Symbolic },
    })
}

/// `N^e` with a product exponent simplified when it is known.
fn power(e: Option<u32>, symbolic: &str) -> String {
    match e {
        Some(0) => "1".into(),
        Some(1) => "N".into(),
        Some(k) => format!("N^{k}"),
        None => format!("N^({symbolic})"),
    }
}

/// Cost formulas for evaluating `p`, one for general programs and one per
/// class that `p` belongs to.
pub fn complexity_report(p: &Program, pi: &AdornedProgram) -> Result<ComplexityReport, Error> {
    let classes = classify_program(p);
    let mut f = 0u64;
    for q in &p.schema().idb {
        f = f.max(adornments_of(pi, q)?.len() as u64);
    }
    let ew = width_of_program(pi, CoverMode::Integral)?.to_integer().to_u32().unwrap();
    let fchw = program_fchw(p, &classes)?;
    let n = p.rule_count();
    let fw = fchw.value;
    let fw_s = fw.map_or("fchw".to_string(), |w| w.to_string());
    let mut bounds = vec![ComplexityBound {
        class: "general".into(),
        formula: "O(f^fchw * |P| * N^(ew*fchw))".into(),
        instantiated: format!("O({f}^{fw_s} * {n} * {})", power(fw.map(|w| ew * w), &format!("{ew}*fchw"))),
    }];
    if classes.contains(&ProgramClass::SimpleChain) {
        bounds.push(ComplexityBound {
            class: ProgramClass::SimpleChain.to_string(),
            formula: "O(f^2 * |P| * N^(2*ew))".into(),
            instantiated: format!("O({f}^2 * {n} * {})", power(Some(2 * ew), "")),
        });
    }
    if classes.contains(&ProgramClass::Linear) {
        bounds.push(ComplexityBound {
            class: ProgramClass::Linear.to_string(),
            formula: "O(f * |P| * N^(ew+fchw-1))".into(),
            instantiated: format!(
                "O({f} * {n} * {})",
                power(fw.map(|w| (ew + w).saturating_sub(1)), &format!("{ew}+fchw-1"))
            ),
        });
    }
    if classes.contains(&ProgramClass::AdornmentGroundable) {
        bounds.push(ComplexityBound {
            class: ProgramClass::AdornmentGroundable.to_string(),
            formula: "O(f * |P| * N^ew)".into(),
            instantiated: format!("O({f} * {n} * {})", power(Some(ew), "")),
        });
    }
    Ok(ComplexityReport { classes: classes.into_iter().collect(), f, rules: n, ew, fchw, bounds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adorn::{adorn_program, Limits, Membership, Relaxation};
    use crate::parse::{parse_program, parse_rule};

    #[test]
    fn transitive_closure_report() {
        let p = parse_program("tc(X,Y) :- e(X,Y). tc(X,Y) :- tc(X,Z), e(Z,Y).").unwrap();
        let pi = adorn_program(&p, Relaxation::GOut, Membership::HEq, Limits::default()).unwrap();
        let r = complexity_report(&p, &pi).unwrap();
        assert_eq!((r.f, r.ew, r.fchw.value), (2, 2, Some(2)));
        let g = r.bounds.iter().find(|b| b.class == "adornment-groundable").unwrap();
        assert_eq!(g.instantiated, "O(2 * 2 * N^2)");
    }

    #[test]
    fn decompositions() {
        // Free-connex forces the bag {X,Y} although the path is acyclic.
        let d = fc_decomposition(&parse_rule("q(X,Y) :- e(X,Z), e(Z,Y).").unwrap()).unwrap().unwrap();
        assert_eq!(d.width, 2);
        assert!(d.is_valid_for(&hypergraph_of(&parse_rule("q(X,Y) :- e(X,Z), e(Z,Y).").unwrap())));
        let d = fc_decomposition(&parse_rule("q(X) :- e(X,Z), e(Z,Y).").unwrap()).unwrap().unwrap();
        assert_eq!(d.width, 1);
        let big = "q(X) :- e(X,A), e(A,B), e(B,C), e(C,D), e(D,E), e(E,X).";
        assert!(fc_decomposition(&parse_rule(big).unwrap()).unwrap().is_none());
    }

    #[test]
    fn symbolic_fallback() {
        let p = parse_program("q(X) :- e(X,A), e(A,B), e(B,C), e(C,D), e(D,E), e(E,X).").unwrap();
        let pi = adorn_program(&p, Relaxation::GOut, Membership::HEq, Limits::default()).unwrap();
        let r = complexity_report(&p, &pi).unwrap();
        assert_eq!(r.fchw.source, FchwSource::Symbolic);
        assert_eq!(r.bounds[0].instantiated, "O(1^fchw * 1 * N^(1*fchw))");
    }
}
