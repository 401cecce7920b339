use std::collections::BTreeMap;
use std::fmt::Write;
use std::path::Path;

use dlsb::boundedness::default_limits;
use dlsb::corpus::corpus;
use dlsb::eval::{
    classify_program, complexity_report, evaluate, fact_text, horn_ground_evaluate_with_stats, EDBInstance,
};
use dlsb::sizebound::size_report;
use dlsb::width::{format_ratio, width_of_predicate, width_of_program, CoverMode};
use dlsb::{
    adorn_program, check_boundedness, extract_ucq, minimize_program, parse_program, print_adorned_program,
    print_rule, AdornedProgram, BoundednessOutcome, Error, Limits, Membership, Program, Relaxation,
};
use serde::Serialize;

use crate::json::{self, JsonBoundedness, JsonEval, JsonVerify, JsonWidths};
use crate::verify::{verify_corpus, verify_program, Report};
use crate::{AdornArgs, Cli, Command, Failure, Outcome};

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn load_program(path: &Path) -> Result<Program, Failure> {
    parse_program(&read(path)?).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn load_edb(path: &Path) -> Result<EDBInstance, Failure> {
    EDBInstance::parse(&read(path)?).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn adorn(p: &Program, g: Relaxation, h: Membership) -> Result<AdornedProgram, Failure> {
    adorn_program(p, g, h, Limits::default()).map_err(|e| Failure::Analysis(e.to_string()))
}

fn adorn_with(p: &Program, a: &AdornArgs) -> Result<AdornedProgram, Failure> {
    adorn(p, a.relax, a.membership.into())
}

fn value<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("output types serialize")
}

fn done(text: String, json: serde_json::Value) -> Result<Outcome, Failure> {
    Ok(Outcome { text, json, negative: false })
}

pub fn run(cli: &Cli) -> Result<Outcome, Failure> {
    match &cli.command {
        Command::Adorn { program, adorn } => {
            let pi = adorn_with(&load_program(program)?, adorn)?;
            done(print_adorned_program(&pi), value(&json::adorned_program(&pi)))
        }
        Command::Widths { program, fractional, adorn } => {
            let p = load_program(program)?;
            let pi = adorn_with(&p, adorn)?;
            let mode = if *fractional { CoverMode::Fractional } else { CoverMode::Integral };
            let mut predicates = BTreeMap::new();
            let mut text = String::new();
            for q in &p.schema().idb {
                match width_of_predicate(&pi, q, mode) {
                    Ok(w) => {
                        writeln!(text, "{q}\t{}", format_ratio(&w)).unwrap();
                        predicates.insert(q.to_string(), format_ratio(&w));
                    }
                    Err(Error::NoAdornment(_)) => writeln!(text, "{q}\t-").unwrap(),
                    Err(e) => return Err(usage(e)),
                }
            }
            let w = width_of_program(&pi, mode).map_err(usage)?;
            writeln!(text, "program\t{}", format_ratio(&w)).unwrap();
            let mode = if *fractional { "fractional" } else { "integral" }.to_string();
            done(text, value(&JsonWidths { mode, predicates, program: format_ratio(&w) }))
        }
        Command::Bounds { program, n, adorn } => {
            let p = load_program(program)?;
            let pi = adorn_with(&p, adorn)?;
            let r = size_report(&p, &pi, *n).map_err(usage)?;
            let mut text = format!("N = {}\n", r.n);
            for b in &r.predicates {
                writeln!(
                    text,
                    "{}: f={} ew={} ew_fractional={} bound1={} bound2={} agm={} coeff_naive={} coeff_minimal={}",
                    b.predicate,
                    b.f_exact,
                    b.ew_integral,
                    b.ew_fractional,
                    b.bound1,
                    b.bound2.value,
                    b.agm_bound.value,
                    b.coeff_naive,
                    b.coeff_minimal
                )
                .unwrap();
            }
            done(text, value(&r))
        }
        Command::Boundedness { program, budget, max_rules } => {
            let p = load_program(program)?;
            let mut limits = default_limits();
            if let Some(m) = max_rules {
                limits.max_rules = *m;
            }
            boundedness(&p, *budget, limits)
        }
        Command::Minimize { program, adorn } => {
            let pi = minimize_program(&adorn_with(&load_program(program)?, adorn)?);
            done(print_adorned_program(&pi), value(&json::adorned_program(&pi)))
        }
        Command::Eval { program, edb, horn } => {
            let p = load_program(program)?;
            let d = load_edb(edb)?;
            let (rel, stats) = if *horn {
                let pi = adorn(&p, Relaxation::GOut, Membership::HEq)?;
                let (r, s) = horn_ground_evaluate_with_stats(&p, &pi, &d).map_err(usage)?;
                (json::by_base(&r), Some(s))
            } else {
                (json::by_base(&evaluate(&p, &d).map_err(usage)?), None)
            };
            let mut text = String::new();
            for (q, ts) in &rel {
                for t in ts {
                    writeln!(text, "{}", fact_text(q, t)).unwrap();
                }
            }
            let method = if *horn { "horn" } else { "semi-naive" }.to_string();
            done(text, value(&JsonEval { method, relations: json::relations(&rel), horn: stats }))
        }
        Command::Classify { program } => {
            let classes: Vec<_> = classify_program(&load_program(program)?).into_iter().collect();
            let text = classes.iter().map(|c| format!("{c}\n")).collect();
            done(text, value(&classes))
        }
        Command::Complexity { program } => {
            let p = load_program(program)?;
            let pi = adorn(&p, Relaxation::GOut, Membership::HEq)?;
            let r = complexity_report(&p, &pi).map_err(usage)?;
            let fchw = match (r.fchw.value, r.fchw.source) {
                (Some(w), s) => format!("{w} ({})", value(&s).as_str().unwrap_or_default()),
                (None, _) => "symbolic".to_string(),
            };
            let classes: Vec<String> = r.classes.iter().map(|c| c.to_string()).collect();
            let mut text = format!(
                "classes: {}\nf = {}, |P| = {}, ew = {}, fchw = {fchw}\n",
                classes.join(", "),
                r.f,
                r.rules,
                r.ew
            );
            for b in &r.bounds {
                writeln!(text, "{}: {} = {}", b.class, b.formula, b.instantiated).unwrap();
            }
            done(text, value(&r))
        }
        Command::Verify { program, edb, seed, programs, instances } => {
            let threads = cli.threads.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            let (report, np, ni, seed) = match program {
                Some(path) => {
                    let edb = edb.as_ref().ok_or_else(|| Failure::Usage("verify needs --edb with a program".into()))?;
                    (verify_program(&load_program(path)?, &load_edb(edb)?)?, 1, 1, None)
                }
                None => {
                    let c = corpus(*seed, *programs, *instances);
                    (verify_corpus(&c, threads)?, *programs, *instances, Some(*seed))
                }
            };
            Ok(verify_outcome(report, np, ni, seed))
        }
    }
}

fn verify_outcome(report: Report, programs: usize, instances: usize, seed: Option<u64>) -> Outcome {
    let checks = report.checks();
    let mut text = String::new();
    for c in &checks {
        writeln!(text, "{}: {} cases, {} violations", c.check, c.cases, c.violations).unwrap();
        for e in &c.examples {
            writeln!(text, "  {e}").unwrap();
        }
    }
    let ok = report.ok();
    text.push_str(if ok { "ok\n" } else { "FAILED\n" });
    let json = value(&JsonVerify { programs, instances, seed, checks, ok });
    Outcome { text, json, negative: !ok }
}

fn boundedness(p: &Program, budget: Option<usize>, limits: Limits) -> Result<Outcome, Failure> {
    let o = check_boundedness(p, budget, limits);
    let (name, limit) = match &o {
        BoundednessOutcome::NonRecursive { .. } => ("non-recursive", None),
        BoundednessOutcome::Degraded { .. } => ("degraded", None),
        BoundednessOutcome::Inconclusive { limit, .. } => ("inconclusive", Some(limit.to_string())),
    };
    let mut text = match &o {
        BoundednessOutcome::NonRecursive { program } => {
            format!("NonRecursive: {} rules\n", program.len())
        }
        BoundednessOutcome::Degraded { program, budget } => match budget {
            Some(k) => format!("Degraded (budget {k}): {} rules\n", program.len()),
            None => format!("Degraded: {} rules\n", program.len()),
        },
        BoundednessOutcome::Inconclusive { partial, limit } => {
            format!("Inconclusive: hit the {limit} after {} rules\n", partial.len())
        }
    };
    text.push_str(&print_adorned_program(o.program()));
    let ucq = if o.is_non_recursive() {
        let mut m = BTreeMap::new();
        text.push_str("UCQ:\n");
        for q in &p.schema().idb {
            let cqs: Vec<String> = extract_ucq(&o, q).map_err(usage)?.iter().map(print_rule).collect();
            for c in &cqs {
                writeln!(text, "  {c}").unwrap();
            }
            m.insert(q.to_string(), cqs);
        }
        Some(m)
    } else {
        None
    };
    let json = value(&JsonBoundedness {
        outcome: name.to_string(),
        budget,
        limit,
        program: json::adorned_program(o.program()),
        ucq,
    });
    Ok(Outcome { text, json, negative: !o.is_non_recursive() })
}
