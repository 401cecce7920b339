mod common;

use std::collections::{BTreeMap, BTreeSet};

use num::{BigRational, One, Signed, ToPrimitive};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{covered_by_facts, naive, union_of};
use dlsb::corpus::{random_instance, random_program, InstanceShape, ProgramShape};
use dlsb::eval::{evaluate, evaluate_adorned, evaluate_naive, witness_instance, EDBInstance};
use dlsb::lp::{fractional_cover, integral_cover};
use dlsb::sizebound::{bound1, bound2, SchemaStats};
use dlsb::width::{width_of_predicate, CoverMode};
use dlsb::{
    adorn_program, canonical_form, mgu, parse_adorned_program, parse_program, print_adorned_program, print_program,
    print_rule, relax, subsumes, AdornedProgram, Atom, Constant, Limits, Membership, Name, Program, Relaxation, Rule,
    Term,
};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn program(seed: u64) -> Program {
    random_program(&mut rng(seed), &ProgramShape::default())
}

fn instances(p: &Program, seed: u64, n: usize) -> Vec<EDBInstance> {
    let mut r = rng(seed ^ 0x5eed);
    (0..n).map(|_| random_instance(&mut r, p.schema(), &InstanceShape::default())).collect()
}

fn gout(p: &Program) -> Option<AdornedProgram> {
    adorn_program(p, Relaxation::GOut, Membership::HEq, Limits::default()).ok()
}

const VARS: [&str; 5] = ["A", "B", "C", "D", "E"];

fn term() -> impl Strategy<Value = Term> {
    prop_oneof![
        3 => (0..VARS.len()).prop_map(|i| Term::var(VARS[i])),
        2 => (0..3i64).prop_map(|c| Term::Const(Constant::Int(c))),
    ]
}

fn pair_set() -> impl Strategy<Value = Vec<(Vec<Term>, Vec<Term>)>> {
    prop::collection::vec((1..4usize).prop_flat_map(|n| (prop::collection::vec(term(), n), prop::collection::vec(term(), n))), 1..4)
}

fn ground(env: &BTreeMap<&str, i64>, t: &Term) -> Term {
    match t {
        Term::Var(v) => Term::Const(Constant::Int(env[&**v])),
        other => other.clone(),
    }
}

/// Every assignment of the five variables to the three constants.
fn assignments() -> Vec<BTreeMap<&'static str, i64>> {
    let mut out = vec![BTreeMap::new()];
    for v in VARS {
        out = out
            .into_iter()
            .flat_map(|m| {
                (0..3).map(move |c| {
                    let mut m = m.clone();
                    m.insert(v, c);
                    m
                })
            })
            .collect();
    }
    out
}

fn atom() -> impl Strategy<Value = Atom> {
    prop_oneof![
        prop::collection::vec(term(), 2).prop_map(|ts| Atom::new("e", ts)),
        prop::collection::vec(term(), 1).prop_map(|ts| Atom::new("f", ts)),
    ]
}

/// A rule `q(_, _) :- body` with head variables drawn from the body, or a
/// constant head when the body has none.
fn rule(max_body: usize) -> impl Strategy<Value = Rule> {
    (prop::collection::vec(atom(), 1..=max_body), prop::collection::vec(any::<prop::sample::Index>(), 2)).prop_map(
        |(body, picks)| {
            let vars: Vec<Name> = body.iter().flat_map(|a| a.vars().cloned()).collect::<BTreeSet<_>>().into_iter().collect();
            let head = picks
                .iter()
                .map(|i| match vars.len() {
                    0 => Term::Const(Constant::Int(0)),
                    n => Term::Var(vars[i.index(n)].clone()),
                })
                .collect();
            Rule::new(Atom::new("q", head), body)
        },
    )
}

/// Brute-force homomorphism from `r1` into `r2`.
fn homomorphic(r1: &Rule, r2: &Rule) -> bool {
    let vars: Vec<Name> = r1.vars().into_iter().collect();
    let mut targets: Vec<Term> = r2.vars().into_iter().map(Term::Var).collect();
    for a in std::iter::once(&r2.head).chain(&r2.body) {
        for t in &a.terms {
            if matches!(t, Term::Const(_)) && !targets.contains(t) {
                targets.push(t.clone());
            }
        }
    }
    for t in std::iter::once(&r1.head).chain(&r1.body).flat_map(|a| &a.terms) {
        if matches!(t, Term::Const(_)) && !targets.contains(t) {
            targets.push(t.clone());
        }
    }
    let mut choice = vec![0usize; vars.len()];
    loop {
        let h: BTreeMap<&Name, &Term> = vars.iter().zip(&choice).map(|(v, &i)| (v, &targets[i])).collect();
        let map = |a: &Atom| Atom {
            pred: a.pred.clone(),
            terms: a
                .terms
                .iter()
                .map(|t| match t {
                    Term::Var(v) => h[v].clone(),
                    other => other.clone(),
                })
                .collect(),
        };
        if map(&r1.head) == r2.head && r1.body.iter().all(|a| r2.body.contains(&map(a))) {
            return true;
        }
        // Next assignment in lexicographic order.
        let mut i = 0;
        loop {
            if i == choice.len() {
                return false;
            }
            choice[i] += 1;
            if choice[i] < targets.len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

fn rename(r: &Rule, seed: u64) -> Rule {
    let mut g = rng(seed);
    let vars: Vec<Name> = r.vars().into_iter().collect();
    let mut fresh: Vec<String> = (0..vars.len()).map(|i| format!("V{i}")).collect();
    fresh.shuffle(&mut g);
    let m: BTreeMap<&Name, Term> = vars.iter().zip(&fresh).map(|(v, f)| (v, Term::var(f))).collect();
    let sub = |a: &Atom| Atom {
        pred: a.pred.clone(),
        terms: a.terms.iter().map(|t| if let Term::Var(v) = t { m[v].clone() } else { t.clone() }).collect(),
    };
    let mut body: Vec<Atom> = r.body.iter().map(sub).collect();
    body.shuffle(&mut g);
    Rule::new(sub(&r.head), body)
}

/// Smallest number of sets covering `0..n`, over all subsets.
fn min_cover(n: usize, sets: &[Vec<usize>]) -> Option<usize> {
    (0u32..1 << sets.len())
        .filter(|mask| (0..n).all(|v| (0..sets.len()).any(|i| mask >> i & 1 == 1 && sets[i].contains(&v))))
        .map(|mask| mask.count_ones() as usize)
        .min()
}

fn set_system() -> impl Strategy<Value = (usize, Vec<Vec<usize>>)> {
    (1..7usize).prop_flat_map(|n| {
        (Just(n), prop::collection::vec(prop::collection::btree_set(0..n, 1..=n).prop_map(|s| s.into_iter().collect()), 1..=12))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn mgu_is_sound_and_most_general(pairs in pair_set()) {
        let unifiers: Vec<_> = assignments()
            .into_iter()
            .filter(|env| pairs.iter().all(|(s, t)| s.iter().zip(t).all(|(a, b)| ground(env, a) == ground(env, b))))
            .collect();
        match mgu(&pairs) {
            Ok(sigma) => {
                for (s, t) in &pairs {
                    prop_assert_eq!(sigma.apply_terms(s), sigma.apply_terms(t));
                }
                prop_assert!(!unifiers.is_empty());
                for theta in &unifiers {
                    for v in VARS {
                        let through = ground(theta, &sigma.apply_term(&Term::var(v)));
                        prop_assert_eq!(through, ground(theta, &Term::var(v)));
                    }
                }
            }
            Err(_) => prop_assert!(unifiers.is_empty()),
        }
    }

    #[test]
    fn subsumption_is_homomorphism(r1 in rule(3), r2 in rule(5)) {
        prop_assert_eq!(subsumes(&r1, &r2).unwrap(), homomorphic(&r1, &r2));
    }

    #[test]
    fn integral_cover_is_optimal((n, sets) in set_system()) {
        let brute = min_cover(n, &sets);
        let got = integral_cover(n, &sets);
        prop_assert_eq!(got.as_ref().map(|c| c.len()), brute);
        if let Some(c) = got {
            prop_assert!((0..n).all(|v| c.iter().any(|&i| sets[i].contains(&v))));
        }
    }

    #[test]
    fn fractional_cover_is_feasible_and_below_integral((n, sets) in set_system()) {
        let Some(f) = fractional_cover(n, &sets) else {
            prop_assert!(min_cover(n, &sets).is_none());
            return Ok(());
        };
        prop_assert!(f.weights.iter().all(|w| !w.is_negative()));
        let total: BigRational = f.weights.iter().sum();
        prop_assert_eq!(&total, &f.value);
        for v in 0..n {
            let load: BigRational = sets.iter().zip(&f.weights).filter(|(s, _)| s.contains(&v)).map(|(_, w)| w.clone()).sum();
            prop_assert!(load >= BigRational::one());
        }
        let k = min_cover(n, &sets).unwrap();
        prop_assert!(f.value <= BigRational::from_integer(k.into()));
        let mut seen = BTreeSet::new();
        if sets.iter().flatten().all(|v| seen.insert(*v)) {
            prop_assert_eq!(f.value, BigRational::from_integer(k.into()));
        }
    }

    #[test]
    fn bound1_below_bound2(num_edbs in 1..4u64, ear in 1..4u32, arq in 0..5u32, ew in 1..5u32, n in 1..6u64) {
        // A cover of arq head variables uses between one and arq atoms.
        let ew = if arq == 0 { 0 } else { ew.min(arq) };
        let stats = SchemaStats { num_edbs, ear, arq, rule_count: 1, term_count: 1 };
        prop_assert!(bound1(&stats, ew, n) <= bound2(&stats, &BigRational::from_integer(ew.into()), n).value);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn canonical_form_is_a_congruence(seed in any::<u64>(), shuffle in any::<u64>()) {
        for r in program(seed).rules() {
            let c = canonical_form(r);
            prop_assert_eq!(&canonical_form(&rename(r, shuffle)), &c);
            prop_assert_eq!(&canonical_form(c.rule()), &c);
        }
    }

    #[test]
    fn print_then_parse_is_identity(seed in any::<u64>()) {
        let p = program(seed);
        let text = print_program(&p);
        let back = parse_program(&text).unwrap();
        prop_assert_eq!(print_program(&back), text.clone());
        for (a, b) in p.rules().iter().zip(back.rules()) {
            prop_assert_eq!(canonical_form(a), canonical_form(b));
        }
        if let Some(pi) = gout(&p).filter(|pi| !pi.is_empty()) {
            let text = print_adorned_program(&pi);
            prop_assert_eq!(print_adorned_program(&parse_adorned_program(&text).unwrap()), text);
        }
    }

    #[test]
    fn relabeled_rules_are_accepted_only_when_safe(seed in any::<u64>()) {
        let p = program(seed);
        let mut g = rng(seed.rotate_left(7));
        let rules: Vec<Rule> = p
            .rules()
            .iter()
            .map(|r| {
                let terms = r.head.terms.iter().map(|_| Term::var(["A", "B", "C", "D", "Z"][g.gen_range(0..5)])).collect();
                Rule::new(Atom { pred: r.head.pred.clone(), terms }, r.body.clone())
            })
            .collect();
        let safe = rules.iter().all(|r| r.head.vars().all(|v| r.body.iter().any(|a| a.vars().any(|w| w == v))));
        prop_assert_eq!(Program::new(rules).is_ok(), safe);
    }

    #[test]
    fn each_predicate_has_one_arity(seed in any::<u64>()) {
        let p = program(seed);
        let mut arity: BTreeMap<&str, usize> = BTreeMap::new();
        for a in p.rules().iter().flat_map(|r| std::iter::once(&r.head).chain(&r.body)) {
            prop_assert_eq!(*arity.entry(a.pred.base()).or_insert(a.arity()), a.arity());
        }
    }

    #[test]
    fn relaxations_subsume_their_input(r in rule(4), k in 0..4usize) {
        for f in [Relaxation::Id, Relaxation::GOut, Relaxation::GK(k), Relaxation::GMin] {
            let g = relax(f, &r).unwrap();
            prop_assert!(subsumes(g.rule(), &r).unwrap(), "{} does not subsume {}", print_rule(g.rule()), print_rule(&r));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn semi_naive_matches_naive(seed in any::<u64>()) {
        let p = program(seed);
        for d in instances(&p, seed, 3) {
            let got = evaluate(&p, &d).unwrap();
            let lib_naive = evaluate_naive(p.rules(), &d).unwrap();
            let oracle = naive(p.rules(), &d);
            for q in &p.schema().idb {
                prop_assert_eq!(got.plain(q), union_of(&oracle, q));
                prop_assert_eq!(lib_naive.plain(q), union_of(&oracle, q));
            }
            if let Some(pi) = gout(&p) {
                let got = evaluate_adorned(&pi, &d).unwrap();
                let oracle = naive(&pi.plain_rules(), &d);
                for (pred, ts) in &oracle {
                    prop_assert_eq!(got.get(pred).cloned().unwrap_or_default(), ts.clone());
                }
            }
        }
    }

    #[test]
    fn adornment_ignores_rule_order(seed in any::<u64>(), shuffle in any::<u64>()) {
        let p = program(seed);
        let mut rules = p.rules().to_vec();
        rules.shuffle(&mut rng(shuffle));
        let q = Program::new(rules).unwrap();
        let (a, b) = (gout(&p), gout(&q));
        prop_assert_eq!(a.map(|x| print_adorned_program(&x)), b.map(|x| print_adorned_program(&x)));
    }

    #[test]
    fn sizes_stay_within_bound1(seed in any::<u64>()) {
        let p = program(seed);
        let Some(pi) = gout(&p) else { return Ok(()) };
        for d in instances(&p, seed, 3) {
            let n = d.max_relation_size() as u64;
            let out = evaluate(&p, &d).unwrap();
            for q in &p.schema().idb {
                let Ok(ew) = width_of_predicate(&pi, q, CoverMode::Integral) else { continue };
                let stats = SchemaStats::of(&p, q).unwrap();
                let b = bound1(&stats, ew.to_integer().to_u32().unwrap(), n);
                prop_assert!(num::BigUint::from(out.plain(q).len()) <= b);
            }
        }
    }

    #[test]
    fn witnesses_need_width_many_facts(seed in any::<u64>()) {
        let p = program(seed);
        let Some(pi) = gout(&p) else { return Ok(()) };
        for a in pi.head_predicates() {
            let Some(w) = witness_instance(&pi, &a) else { continue };
            let (d, t) = w.unwrap();
            let k = adornment_width(&a);
            let out = evaluate_adorned(&pi, &d).unwrap();
            let pred = dlsb::Pred::Adorned(a.clone());
            prop_assert!(out.get(&pred).is_some_and(|ts| ts.contains(&t)));
            let values: BTreeSet<Constant> = t.iter().cloned().collect();
            if k > 0 {
                prop_assert!(!covered_by_facts(&d, &values, k - 1), "tuple covered by fewer than {} facts", k);
            }
        }
    }
}

/// Integral width of one adorned predicate: the cover number of the head
/// variables of its adornment.
fn adornment_width(a: &dlsb::AdornedPredicate) -> usize {
    dlsb::width::width_of_rule(a.adornment.rule(), CoverMode::Integral).unwrap().to_integer().to_usize().unwrap()
}
