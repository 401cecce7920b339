//! Static analysis of positive datalog programs.
//!
//! The central construction rewrites a program into an adorned program in
//! which every IDB predicate carries a conjunctive query over the EDBs that
//! bounds what it can derive. From the adornments follow edge-cover widths,
//! output size bounds, a boundedness semi-decision procedure, minimization and
//! a grounding-based evaluator.

pub mod adorn;
pub mod ast;
pub mod boundedness;
pub mod canon;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod graph;
pub mod lp;
pub mod minimize;
pub mod parse;
pub mod print;
pub mod sizebound;
pub mod unify;
pub mod width;

pub use adorn::{adorn_program, adornments_of, membership, relax, BudgetExceeded, Limit, Limits, Membership, Relaxation};
pub use ast::{
    classify_rule_atoms, AdornedPredicate, AdornedProgram, AdornedRule, Adornment, Atom, Constant, Name, Pred,
    Program, Rule, Schema, Term,
};
pub use boundedness::{check_boundedness, cq_contained, extract_ucq, BoundednessOutcome};
pub use canon::{canonical_form, subsumes, CanonicalForm};
pub use error::{Error, ParseError, ValidationError};
pub use minimize::{is_minimal, minimize_program};
pub use parse::{parse_adorned_program, parse_facts, parse_program, parse_rule};
pub use print::{print_adorned_program, print_atom, print_program, print_rule};
pub use unify::{mgu, rename_apart, Substitution, UnifyFailure};
