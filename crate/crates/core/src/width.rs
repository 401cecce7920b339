//! Hypergraphs of rules and edge-cover widths of adorned programs.

use std::collections::BTreeSet;

use num::{BigInt, BigRational, Zero};
use serde::{Deserialize, Serialize};

use crate::adorn::adornments_of;
use crate::ast::{AdornedProgram, Name, Rule};
use crate::error::Error;
use crate::lp;
use crate::print::print_atom;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoverMode {
    Integral,
    Fractional,
}

/// A hyperedge: the variable set of one or more body atoms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub vertices: BTreeSet<Name>,
    /// Positions in the rule body of the atoms with exactly this variable set.
    pub atoms: Vec<usize>,
    pub labels: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hypergraph {
    pub vertices: BTreeSet<Name>,
    pub edges: Vec<Edge>,
    /// Head variables.
    pub out: BTreeSet<Name>,
}

/// One vertex per body variable, one edge per distinct atom variable set.
/// Constants and wildcards contribute nothing.
pub fn hypergraph_of(r: &Rule) -> Hypergraph {
    let mut edges: Vec<Edge> = Vec::new();
    for (i, a) in r.body.iter().enumerate() {
        let vs: BTreeSet<Name> = a.vars().cloned().collect();
        match edges.iter_mut().find(|e| e.vertices == vs) {
            Some(e) => {
                e.atoms.push(i);
                e.labels.push(print_atom(a));
            }
            None => edges.push(Edge { vertices: vs, atoms: vec![i], labels: vec![print_atom(a)] }),
        }
    }
    Hypergraph {
        vertices: r.body_vars(),
        edges,
        out: r.head.vars().cloned().collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeCoverSolution {
    /// Weight of each edge, in edge order.
    pub weights: Vec<BigRational>,
    pub value: BigRational,
}

impl EdgeCoverSolution {
    pub fn chosen(&self) -> Vec<usize> {
        (0..self.weights.len()).filter(|&i| !self.weights[i].is_zero()).collect()
    }
}

/// Minimum edge cover of `targets` in `h`.
pub fn edge_cover(h: &Hypergraph, targets: &BTreeSet<Name>, mode: CoverMode) -> Result<EdgeCoverSolution, Error> {
    let order: Vec<&Name> = targets.iter().collect();
    if let Some(v) = order.iter().find(|v| !h.edges.iter().any(|e| e.vertices.contains(**v))) {
        return Err(Error::Uncoverable(v.to_string()));
    }
    let sets: Vec<Vec<usize>> = h
        .edges
        .iter()
        .map(|e| (0..order.len()).filter(|&i| e.vertices.contains(order[i])).collect())
        .collect();
    match mode {
        CoverMode::Fractional => {
            let c = lp::fractional_cover(order.len(), &sets).expect("coverability checked above");
            Ok(EdgeCoverSolution { weights: c.weights, value: c.value })
        }
        CoverMode::Integral => {
            let chosen = lp::integral_cover(order.len(), &sets).expect("coverability checked above");
            let mut weights = vec![BigRational::zero(); sets.len()];
            for &i in &chosen {
                weights[i] = BigRational::from_integer(BigInt::from(1));
            }
            Ok(EdgeCoverSolution { weights, value: BigRational::from_integer(BigInt::from(chosen.len())) })
        }
    }
}

/// Edge-cover number of the head variables of `r`.
pub fn width_of_rule(r: &Rule, mode: CoverMode) -> Result<BigRational, Error> {
    let h = hypergraph_of(r);
    Ok(edge_cover(&h, &h.out, mode)?.value)
}

/// Largest width among the adornments of `q`.
pub fn width_of_predicate(pi: &AdornedProgram, q: &str, mode: CoverMode) -> Result<BigRational, Error> {
    let ads = adornments_of(pi, q)?;
    if ads.is_empty() {
        return Err(Error::NoAdornment(q.to_string()));
    }
    let mut best = BigRational::zero();
    for a in ads {
        let w = width_of_rule(a.rule(), mode)?;
        if w > best {
            best = w;
        }
    }
    Ok(best)
}

/// Largest width over all IDB predicates that have adornments.
pub fn width_of_program(pi: &AdornedProgram, mode: CoverMode) -> Result<BigRational, Error> {
    let mut best: Option<BigRational> = None;
    for q in &pi.schema.idb {
        match width_of_predicate(pi, q, mode) {
            Ok(w) => {
                if best.as_ref().is_none_or(|b| w > *b) {
                    best = Some(w);
                }
            }
            Err(Error::NoAdornment(_)) => {}
            Err(e) => return Err(e),
        }
    }
    best.ok_or_else(|| Error::EmptyProgram("any IDB".into()))
}

/// Renders a rational as `p` or `p/q`.
pub fn format_ratio(r: &BigRational) -> String {
    if r.is_integer() {
        r.to_integer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_rule;

    fn w(s: &str, m: CoverMode) -> String {
        format_ratio(&width_of_rule(&parse_rule(s).unwrap(), m).unwrap())
    }

    #[test]
    fn triangle_widths() {
        let r = "p(X,Y,Z) :- e(X,Y,_), e(X,Z,_), e(Y,Z,_).";
        assert_eq!(w(r, CoverMode::Fractional), "3/2");
        assert_eq!(w(r, CoverMode::Integral), "2");
    }

    #[test]
    fn identical_variable_sets_merge() {
        let h = hypergraph_of(&parse_rule("q(X,Y) :- e(X,Y), f(Y,X), g(X).").unwrap());
        assert_eq!(h.edges.len(), 2);
        assert_eq!(h.edges[0].atoms, vec![0, 1]);
    }

    #[test]
    fn ground_head_has_width_zero() {
        assert_eq!(w("q(1) :- e(X).", CoverMode::Integral), "0");
    }
}
