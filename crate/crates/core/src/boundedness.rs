//! Semi-deciding boundedness: a program is bounded iff adornment with the
//! identity relaxation and containment-based membership terminates.

use crate::adorn::{adorn_program, BudgetExceeded, Limit, Limits, Membership, Relaxation};
use crate::ast::{AdornedProgram, Program, Rule};
use crate::canon::{canonical_form, subsumes};
use crate::error::Error;

/// Rule cap used when no budget is given.
pub const DEFAULT_MAX_RULES: usize = 500;
/// Sweep cap used when no budget is given.
pub const DEFAULT_MAX_SWEEPS: usize = 200;

pub fn default_limits() -> Limits {
    Limits { max_rules: DEFAULT_MAX_RULES, max_iterations: DEFAULT_MAX_SWEEPS }
}

#[derive(Clone, Debug)]
pub enum BoundednessOutcome {
    /// An equivalent program without recursion was found.
    NonRecursive { program: AdornedProgram },
    /// Construction terminated but the result is recursive or relaxed.
    Degraded { program: AdornedProgram, budget: Option<usize> },
    /// A limit was reached first.
    Inconclusive { partial: AdornedProgram, limit: Limit },
}

impl BoundednessOutcome {
    pub fn program(&self) -> &AdornedProgram {
        match self {
            BoundednessOutcome::NonRecursive { program } | BoundednessOutcome::Degraded { program, .. } => program,
            BoundednessOutcome::Inconclusive { partial, .. } => partial,
        }
    }

    pub fn is_non_recursive(&self) -> bool {
        matches!(self, BoundednessOutcome::NonRecursive { .. })
    }
}

/// Adorns `p` with `Id` (or `GK(k)` given a budget) and `HCont`.
///
/// The outcome is `NonRecursive` only when the result has no recursive
/// adorned predicate and no relaxation was applied anywhere, so that every
/// adornment is exactly the query its rules compute.
pub fn check_boundedness(p: &Program, budget: Option<usize>, limits: Limits) -> BoundednessOutcome {
    let g = budget.map_or(Relaxation::Id, Relaxation::GK);
    match adorn_program(p, g, Membership::HCont, limits) {
        Ok(program) => {
            if !program.is_recursive() && program.rules.iter().all(|r| r.exact) {
                BoundednessOutcome::NonRecursive { program }
            } else {
                BoundednessOutcome::Degraded { program, budget }
            }
        }
        Err(BudgetExceeded { partial, limit }) => BoundednessOutcome::Inconclusive { partial, limit },
    }
}

/// The distinct head adornments of `q`'s rules, as a union of conjunctive
/// queries equivalent to `q`.
pub fn extract_ucq(outcome: &BoundednessOutcome, q: &str) -> Result<Vec<Rule>, Error> {
    let BoundednessOutcome::NonRecursive { program } = outcome else {
        return Err(Error::NotApplicable(format!("no non-recursive program to read {q} from")));
    };
    if !program.schema.is_idb(q) {
        return Err(Error::UnknownPredicate(q.to_string()));
    }
    let mut out: Vec<Rule> = program
        .head_predicates_of(q)
        .into_iter()
        .map(|a| canonical_form(a.adornment.rule()).into_rule())
        .collect();
    out.sort();
    out.dedup();
    Ok(out)
}

/// Whether `c1` is contained in `c2` on every instance.
pub fn cq_contained(c1: &Rule, c2: &Rule) -> Result<bool, Error> {
    subsumes(c2, c1)
}
