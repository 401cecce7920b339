//! Equivalence, per-rule boundedness and value-cover checks, over one
//! program or a sampled corpus.

use dlsb::eval::{check_rule_bounded, check_value_cover, evaluate, evaluate_adorned, fact_text, union_adorned, EDBInstance};
use dlsb::{adorn_program, Error, Limits, Membership, Program, Relaxation};

use crate::json::JsonCheck;
use crate::Failure;

const NAMES: [&str; 3] = ["equivalence", "rule-bounded", "value-cover"];
const MAX_EXAMPLES: usize = 10;

#[derive(Default)]
struct Tally {
    cases: usize,
    failures: Vec<String>,
}

/// Check results for a batch, one entry per check.
pub struct Report(Vec<Tally>);

impl Report {
    fn new() -> Report {
        Report((0..NAMES.len()).map(|_| Tally::default()).collect())
    }

    fn merge(&mut self, other: Report) {
        for (a, b) in self.0.iter_mut().zip(other.0) {
            a.cases += b.cases;
            a.failures.extend(b.failures);
        }
    }

    pub fn ok(&self) -> bool {
        self.0.iter().all(|t| t.failures.is_empty())
    }

    pub fn checks(&self) -> Vec<JsonCheck> {
        NAMES
            .iter()
            .zip(&self.0)
            .map(|(n, t)| JsonCheck {
                check: n.to_string(),
                cases: t.cases,
                violations: t.failures.len(),
                examples: t.failures.iter().take(MAX_EXAMPLES).cloned().collect(),
            })
            .collect()
    }
}

fn check_one(p: &Program, ds: &[EDBInstance], report: &mut Report) -> Result<(), Failure> {
    let pi = adorn_program(p, Relaxation::GOut, Membership::HEq, Limits::default())
        .map_err(|e| Failure::Analysis(e.to_string()))?;
    let usage = |e: Error| Failure::Usage(e.to_string());
    for d in ds {
        let plain = evaluate(p, d).map_err(usage)?;
        let adorned = evaluate_adorned(&pi, d).map_err(usage)?;
        let t = &mut report.0[0];
        for q in &p.schema().idb {
            t.cases += 1;
            let (a, b) = (plain.plain(q), union_adorned(&adorned, q));
            if let Some(x) = a.symmetric_difference(&b).next() {
                t.failures.push(format!("{} differs between the program and its adornment", fact_text(q, x)));
            }
        }
        for (i, vs) in [check_rule_bounded(&pi, d).map_err(usage)?, check_value_cover(&pi, d).map_err(usage)?]
            .into_iter()
            .enumerate()
        {
            let t = &mut report.0[i + 1];
            t.cases += 1;
            t.failures.extend(vs.into_iter().map(|v| format!("{}: {}", v.rule, fact_text("", &v.tuple))));
        }
    }
    Ok(())
}

pub fn verify_program(p: &Program, d: &EDBInstance) -> Result<Report, Failure> {
    let mut report = Report::new();
    check_one(p, std::slice::from_ref(d), &mut report)?;
    Ok(report)
}

/// Checks `corpus` with up to `threads` workers.
pub fn verify_corpus(corpus: &[(Program, Vec<EDBInstance>)], threads: usize) -> Result<Report, Failure> {
    let threads = threads.max(1).min(corpus.len().max(1));
    let chunk = corpus.len().div_ceil(threads).max(1);
    let parts: Vec<Result<Report, Failure>> = std::thread::scope(|s| {
        let handles: Vec<_> = corpus
            .chunks(chunk)
            .map(|c| {
                s.spawn(move || {
                    let mut r = Report::new();
                    for (p, ds) in c {
                        check_one(p, ds, &mut r)?;
                    }
                    Ok(r)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("verification worker panicked")).collect()
    });
    let mut report = Report::new();
    for part in parts {
        report.merge(part?);
    }
    Ok(report)
}
