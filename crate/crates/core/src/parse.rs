//! Parser for the datalog dialect.
//!
//! Variables start with an uppercase letter, predicates and symbolic constants
//! with a lowercase letter. `_` is the anonymous variable and `%` starts a
//! comment. Adorned predicates are written `p[<rule>](args)`.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::ast::{
    name, AdornedPredicate, AdornedProgram, AdornedRule, Atom, Constant, Name, Pred, Program, Rule,
    Schema, Term,
};
use crate::canon::make_adornment;
use crate::error::{Error, ParseError, ValidationError};

/// Prefix of variables introduced for wildcards and renamings. User variables
/// cannot start with an underscore, so these never clash.
pub const RESERVED_PREFIX: char = '_';

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Lower(String),
    Upper(String),
    Int(i64),
    Wild,
    LParen,
    RParen,
    LBrack,
    RBrack,
    Comma,
    Dot,
    Neck,
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn err(line: usize, column: usize, message: impl Into<String>) -> ParseError {
    ParseError { line, column, message: message.into() }
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let mut push = |tok: Tok| out.push(Spanned { tok, line: l0, column: c0 });
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '%' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let single = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '[' => Some(Tok::LBrack),
            ']' => Some(Tok::RBrack),
            ',' => Some(Tok::Comma),
            '.' => Some(Tok::Dot),
            _ => None,
        };
        if let Some(t) = single {
            push(t);
            i += 1;
            col += 1;
            continue;
        }
        if c == ':' {
            if chars.get(i + 1) == Some(&'-') {
                push(Tok::Neck);
                i += 2;
                col += 2;
                continue;
            }
            return Err(err(l0, c0, "expected ':-'"));
        }
        if c.is_ascii_digit() || (c == '-' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            i += 1;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            let v = s.parse::<i64>().map_err(|_| err(l0, c0, format!("integer out of range: {s}")))?;
            push(Tok::Int(v));
            continue;
        }
        if c.is_alphanumeric() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            if s == "_" {
                push(Tok::Wild);
            } else if s.starts_with(RESERVED_PREFIX) {
                return Err(err(l0, c0, format!("identifiers may not start with '_': {s}")));
            } else if c.is_uppercase() {
                push(Tok::Upper(s));
            } else if c.is_lowercase() {
                push(Tok::Lower(s));
            } else {
                return Err(err(l0, c0, format!("unexpected identifier {s}")));
            }
            continue;
        }
        return Err(err(l0, c0, format!("unexpected character {c:?}")));
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    end: (usize, usize),
    fresh: usize,
}

/// How wildcards are represented after parsing.
#[derive(Clone, Copy, PartialEq)]
enum Wild {
    FreshVar,
    Keep,
}

impl Parser {
    fn new(text: &str) -> Result<Parser, ParseError> {
        let toks = lex(text)?;
        let lines = text.split('\n').count();
        let last = text.rsplit('\n').next().map(|l| l.chars().count() + 1).unwrap_or(1);
        Ok(Parser { toks, pos: 0, end: (lines, last), fresh: 0 })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks.get(self.pos).map(|s| (s.line, s.column)).unwrap_or(self.end)
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        let (l, c) = self.here();
        Err(err(l, c, message))
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&t) {
            self.pos += 1;
            Ok(())
        } else {
            self.fail(format!("expected {what}"))
        }
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn term(&mut self, wild: Wild) -> Result<Term, ParseError> {
        let t = match self.peek() {
            Some(Tok::Upper(v)) => Term::Var(name(v)),
            Some(Tok::Lower(s)) => Term::Const(Constant::Sym(name(s))),
            Some(Tok::Int(i)) => Term::Const(Constant::Int(*i)),
            Some(Tok::Wild) => match wild {
                Wild::Keep => Term::Wildcard,
                Wild::FreshVar => {
                    self.fresh += 1;
                    Term::Var(name(&format!("{RESERVED_PREFIX}{}", self.fresh)))
                }
            },
            _ => return self.fail("expected a term"),
        };
        self.pos += 1;
        Ok(t)
    }

    fn args(&mut self, wild: Wild) -> Result<Vec<Term>, ParseError> {
        let mut terms = Vec::new();
        if self.eat(&Tok::LParen) {
            if self.eat(&Tok::RParen) {
                return Ok(terms);
            }
            loop {
                terms.push(self.term(wild)?);
                if self.eat(&Tok::RParen) {
                    break;
                }
                self.expect(Tok::Comma, "',' or ')'")?;
            }
        }
        Ok(terms)
    }

    /// An atom; `adorned` permits a bracketed adornment after the predicate.
    fn atom(&mut self, wild: Wild, adorned: bool) -> Result<RawAtom, ParseError> {
        let (line, column) = self.here();
        let pred = match self.peek() {
            Some(Tok::Lower(p)) => name(p),
            Some(Tok::Upper(_)) => return self.fail("expected a predicate (predicates start lowercase)"),
            _ => return self.fail("expected a predicate"),
        };
        self.pos += 1;
        let mut adornment = None;
        if self.peek() == Some(&Tok::LBrack) {
            if !adorned {
                return self.fail("adornments are not allowed here");
            }
            self.pos += 1;
            let head = self.atom(Wild::Keep, false)?;
            let mut body = Vec::new();
            if self.eat(&Tok::Neck) {
                loop {
                    body.push(self.atom(Wild::Keep, false)?.atom);
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
            }
            self.expect(Tok::RBrack, "']'")?;
            adornment = Some(Rule::new(head.atom, body));
        }
        let terms = self.args(wild)?;
        Ok(RawAtom { atom: Atom { pred: Pred::Plain(pred), terms }, adornment, line, column })
    }

    fn rule(&mut self, adorned: bool) -> Result<RawRule, ParseError> {
        self.fresh = 0;
        let (line, column) = self.here();
        let head = self.atom(Wild::FreshVar, adorned)?;
        if head.atom.terms.iter().any(|t| t.as_var().is_some_and(|v| v.starts_with(RESERVED_PREFIX))) {
            return Err(err(head.line, head.column, "wildcard in rule head"));
        }
        if self.eat(&Tok::Dot) {
            return Err(err(line, column, "facts are not allowed in program text"));
        }
        self.expect(Tok::Neck, "':-' or '.'")?;
        let mut body = Vec::new();
        loop {
            body.push(self.atom(Wild::FreshVar, adorned)?);
            if self.eat(&Tok::Dot) {
                break;
            }
            self.expect(Tok::Comma, "',' or '.'")?;
        }
        Ok(RawRule { head, body, line })
    }
}

struct RawAtom {
    atom: Atom,
    adornment: Option<Rule>,
    line: usize,
    column: usize,
}

struct RawRule {
    head: RawAtom,
    body: Vec<RawAtom>,
    line: usize,
}

impl RawRule {
    fn plain(self) -> Result<Rule, ParseError> {
        for a in std::iter::once(&self.head).chain(self.body.iter()) {
            if a.adornment.is_some() {
                return Err(err(a.line, a.column, "adornments are not allowed in a plain program"));
            }
        }
        Ok(Rule::new(self.head.atom, self.body.into_iter().map(|a| a.atom).collect()))
    }
}

fn located(e: ValidationError, lines: &[usize]) -> Error {
    let rule = match &e {
        ValidationError::Fact { rule }
        | ValidationError::Unsafe { rule, .. }
        | ValidationError::WildcardInHead { rule }
        | ValidationError::AdornedInPlain { rule }
        | ValidationError::ArityMismatch { rule, .. } => Some(*rule),
        _ => None,
    };
    match rule {
        Some(i) => Error::Parse(err(lines[i], 1, e.to_string())),
        None => Error::Validation(e),
    }
}

/// Parses and validates a plain program.
pub fn parse_program(text: &str) -> Result<Program, Error> {
    let mut p = Parser::new(text)?;
    let mut rules = Vec::new();
    let mut lines = Vec::new();
    while !p.at_end() {
        let r = p.rule(false)?;
        lines.push(r.line);
        rules.push(r.plain()?);
    }
    if rules.is_empty() {
        return Err(Error::Validation(ValidationError::Empty));
    }
    Program::new(rules).map_err(|e| located(e, &lines))
}

/// Parses a single rule, e.g. `tc(X,Y) :- e(X,Z), tc(Z,Y).`
pub fn parse_rule(text: &str) -> Result<Rule, Error> {
    let mut p = Parser::new(text)?;
    let r = p.rule(false)?.plain()?;
    if !p.at_end() {
        return Err(p.fail::<()>("trailing input after rule").unwrap_err().into());
    }
    Ok(r)
}

/// Parses a ground fact list, one `p(c1,...,ck).` per statement.
pub fn parse_facts(text: &str) -> Result<Vec<(Name, Vec<Constant>)>, ParseError> {
    let mut p = Parser::new(text)?;
    let mut out = Vec::new();
    while !p.at_end() {
        let a = p.atom(Wild::Keep, false)?;
        let mut tuple = Vec::with_capacity(a.atom.terms.len());
        for t in a.atom.terms {
            match t {
                Term::Const(c) => tuple.push(c),
                _ => return Err(err(a.line, a.column, "facts must be ground")),
            }
        }
        if !p.eat(&Tok::Dot) {
            return p.fail("expected '.' after fact");
        }
        out.push((a.atom.pred.base().clone(), tuple));
    }
    Ok(out)
}

/// Parses a program in adorned syntax, as produced by the printer.
pub fn parse_adorned_program(text: &str) -> Result<AdornedProgram, Error> {
    let mut p = Parser::new(text)?;
    let mut raw = Vec::new();
    while !p.at_end() {
        raw.push(p.rule(true)?);
    }
    if raw.is_empty() {
        return Err(Error::Validation(ValidationError::Empty));
    }
    let mut schema = Schema::default();
    for r in &raw {
        schema.idb.insert(r.head.atom.pred.base().clone());
    }
    let mut note = |p: &Name, k: usize, line: usize, col: usize| -> Result<(), Error> {
        match schema.arities.insert(p.clone(), k) {
            Some(old) if old != k => Err(Error::Parse(err(
                line,
                col,
                format!("predicate {p} used with arity {k}, expected {old}"),
            ))),
            _ => Ok(()),
        }
    };
    let mut rules = Vec::new();
    let idb = schema.idb.clone();
    for r in raw {
        let mut atoms = Vec::new();
        for (i, a) in std::iter::once(r.head).chain(r.body).enumerate() {
            let base = a.atom.pred.base().clone();
            note(&base, a.atom.arity(), a.line, a.column)?;
            let pred = match a.adornment {
                Some(ad) => {
                    if ad.head.pred.base() != &base || ad.head.arity() != a.atom.arity() {
                        return Err(Error::Parse(err(a.line, a.column, "adornment head does not match its predicate")));
                    }
                    for b in &ad.body {
                        if idb.contains(b.pred.base()) {
                            return Err(Error::Parse(err(a.line, a.column, "adornment bodies may only use EDB predicates")));
                        }
                        note(b.pred.base(), b.arity(), a.line, a.column)?;
                    }
                    let adornment = make_adornment(&ad).map_err(|e| Error::Parse(err(a.line, a.column, e.to_string())))?;
                    Pred::Adorned(Arc::new(AdornedPredicate { base, adornment }))
                }
                None if idb.contains(&base) => {
                    return Err(Error::Parse(err(a.line, a.column, format!("IDB atom {base} needs an adornment"))));
                }
                None if i == 0 => unreachable!(),
                None => Pred::Plain(base),
            };
            atoms.push(Atom { pred, terms: a.atom.terms });
        }
        let head = atoms.remove(0);
        let rule = Rule::new(head, atoms);
        if !rule.is_safe() {
            return Err(Error::Parse(err(r.line, 1, "unsafe rule")));
        }
        rules.push(AdornedRule { rule, source: None, exact: false, witness: None });
    }
    let all: BTreeSet<Name> = schema.arities.keys().cloned().collect();
    schema.edb = all.difference(&schema.idb).cloned().collect();
    Ok(AdornedProgram { rules, schema })
}
