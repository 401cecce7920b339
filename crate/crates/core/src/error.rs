use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("program has no rules")]
    Empty,
    #[error("rule {rule}: facts are not allowed in program text")]
    Fact { rule: usize },
    #[error("rule {rule}: variable {variable} occurs in the head but not in the body")]
    Unsafe { rule: usize, variable: String },
    #[error("rule {rule}: wildcard in rule head")]
    WildcardInHead { rule: usize },
    #[error("rule {rule}: adorned predicate in a plain program")]
    AdornedInPlain { rule: usize },
    #[error("rule {rule}: predicate {predicate} used with arity {found}, expected {expected}")]
    ArityMismatch { predicate: String, expected: usize, found: usize, rule: usize },
    #[error("adornment for {predicate} is malformed: {reason}")]
    BadAdornment { predicate: String, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error("unknown predicate {0}")]
    UnknownPredicate(String),
    #[error("{0} has no adornment")]
    NoAdornment(String),
    #[error("no predicate {0} with adornments in the program")]
    EmptyProgram(String),
    #[error("head variable {0} occurs in no body atom")]
    Uncoverable(String),
    #[error("rules have different head predicates or arities")]
    HeadMismatch,
    #[error("EDB instance: {0}")]
    Instance(String),
    #[error("program is not adornment-groundable: {0}")]
    NotGroundable(String),
    #[error("{0}")]
    TooLarge(String),
    #[error("{0}")]
    NotApplicable(String),
    #[error("relaxation {0} is not defined for this input: {1}")]
    Relaxation(String, String),
}

pub type Result<T> = std::result::Result<T, Error>;
