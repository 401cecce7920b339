//! Seeded random programs and instances for property checks.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::adorn::{adorn_program, Limits, Membership, Relaxation, DEFAULT_MAX_ITERATIONS};
use crate::ast::{Constant, Program, Schema};
use crate::eval::EDBInstance;
use crate::parse::parse_program;

/// Shape limits of generated programs.
#[derive(Clone, Copy, Debug)]
pub struct ProgramShape {
    pub max_idb: usize,
    pub max_edb: usize,
    pub max_arity: usize,
    pub max_edb_arity: usize,
    pub max_rules: usize,
    pub max_body: usize,
    pub max_vars: usize,
    /// Chance that a body argument is a constant.
    pub const_prob: f64,
    /// Chance that a body argument is a wildcard.
    pub wild_prob: f64,
}

impl Default for ProgramShape {
    fn default() -> ProgramShape {
        ProgramShape {
            max_idb: 3,
            max_edb: 2,
            max_arity: 3,
            max_edb_arity: 3,
            max_rules: 4,
            max_body: 3,
            max_vars: 4,
            const_prob: 0.05,
            wild_prob: 0.1,
        }
    }
}

/// Shape limits of generated instances.
#[derive(Clone, Copy, Debug)]
pub struct InstanceShape {
    pub domain: i64,
    pub max_facts: usize,
}

impl Default for InstanceShape {
    fn default() -> InstanceShape {
        InstanceShape { domain: 4, max_facts: 6 }
    }
}

const IDB_NAMES: [&str; 3] = ["p", "q", "r"];
const EDB_NAMES: [&str; 3] = ["e", "f", "g"];
const VAR_NAMES: [&str; 6] = ["A", "B", "C", "D", "E", "F"];

/// A random program; heads carry no constants.
pub fn random_program(rng: &mut impl Rng, shape: &ProgramShape) -> Program {
    loop {
        if let Some(p) = try_program(rng, shape) {
            return p;
        }
    }
}

fn try_program(rng: &mut impl Rng, shape: &ProgramShape) -> Option<Program> {
    let n_idb = rng.gen_range(1..=shape.max_idb.min(IDB_NAMES.len()));
    let n_edb = rng.gen_range(1..=shape.max_edb.min(EDB_NAMES.len()));
    let preds: Vec<(&str, usize, bool)> = IDB_NAMES[..n_idb]
        .iter()
        .map(|p| (*p, true))
        .chain(EDB_NAMES[..n_edb].iter().map(|p| (*p, false)))
        .map(|(p, idb)| {
            let max = if idb { shape.max_arity } else { shape.max_edb_arity };
            (p, rng.gen_range(1..=max), idb)
        })
        .collect();
    let n_rules = rng.gen_range(1..=shape.max_rules);
    let vars = &VAR_NAMES[..shape.max_vars.min(VAR_NAMES.len())];
    let mut text = String::new();
    for i in 0..n_rules {
        // The first rules give every IDB predicate a head.
        let head = if i < n_idb { i } else { rng.gen_range(0..n_idb) };
        let len = rng.gen_range(1..=shape.max_body);
        let mut body = Vec::new();
        let mut body_vars: Vec<&str> = Vec::new();
        for _ in 0..len {
            let (p, k, _) = preds[rng.gen_range(0..preds.len())];
            let args: Vec<String> = (0..k)
                .map(|_| {
                    let x: f64 = rng.gen();
                    if x < shape.const_prob {
                        rng.gen_range(1..=2).to_string()
                    } else if x < shape.const_prob + shape.wild_prob {
                        "_".to_string()
                    } else {
                        let v = *vars.choose(rng).unwrap();
                        body_vars.push(v);
                        v.to_string()
                    }
                })
                .collect();
            body.push(format!("{p}({})", args.join(",")));
        }
        let (hp, hk, _) = preds[head];
        if body_vars.is_empty() {
            return None;
        }
        let args: Vec<&str> = (0..hk).map(|_| *body_vars.choose(rng).unwrap()).collect();
        text.push_str(&format!("{hp}({}) :- {}.\n", args.join(","), body.join(", ")));
    }
    parse_program(&text).ok()
}

/// A random instance over the EDB predicates of `schema`.
pub fn random_instance(rng: &mut impl Rng, schema: &Schema, shape: &InstanceShape) -> EDBInstance {
    let mut d = EDBInstance::new();
    for p in &schema.edb {
        let k = schema.arity(p).expect("EDB predicates have arities");
        let n = rng.gen_range(0..=shape.max_facts);
        for _ in 0..n {
            let t = (0..k).map(|_| Constant::Int(rng.gen_range(1..=shape.domain))).collect();
            d.insert(p, t).expect("arity is fixed per predicate");
        }
    }
    d
}

/// Adorned-program size above which a sampled program is redrawn.
pub const CORPUS_RULE_CAP: usize = 2_000;

/// Whether `p` adorns with `GOut` and `HEq` within [`CORPUS_RULE_CAP`] rules.
pub fn admissible(p: &Program) -> bool {
    let limits = Limits { max_rules: CORPUS_RULE_CAP, max_iterations: DEFAULT_MAX_ITERATIONS };
    adorn_program(p, Relaxation::GOut, Membership::HEq, limits).is_ok()
}

/// Deterministic sample of admissible programs, each with its instances.
pub fn corpus(seed: u64, programs: usize, instances: usize) -> Vec<(Program, Vec<EDBInstance>)> {
    corpus_with(seed, programs, instances, &ProgramShape::default(), &InstanceShape::default())
}

pub fn corpus_with(
    seed: u64,
    programs: usize,
    instances: usize,
    ps: &ProgramShape,
    is: &InstanceShape,
) -> Vec<(Program, Vec<EDBInstance>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..programs)
        .map(|_| {
            let p = loop {
                let p = random_program(&mut rng, ps);
                if admissible(&p) {
                    break p;
                }
            };
            let ds = (0..instances).map(|_| random_instance(&mut rng, p.schema(), is)).collect();
            (p, ds)
        })
        .collect()
}
