//! End-to-end runs of the `dlsb` binary over the files in `programs/`.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde::Deserialize;

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn dlsb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dlsb")).args(args).current_dir(root()).output().expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = dlsb(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    dlsb(args).status.code().expect("exit code")
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(root().join("crates/cli/tests/golden").join(name)).unwrap()
}

#[test]
fn golden_outputs() {
    let cases: &[(&[&str], &str)] = &[
        (&["adorn", "programs/tc.dl"], "adorn_tc.txt"),
        (&["adorn", "programs/triangle.dl"], "adorn_triangle.txt"),
        (&["minimize", "programs/triangle.dl"], "minimize_triangle.txt"),
        (&["bounds", "--n", "2", "programs/tight.dl"], "bounds_tight_2.txt"),
        (&["bounds", "--n", "3", "programs/tight.dl"], "bounds_tight_3.txt"),
        (&["boundedness", "programs/buys.dl"], "boundedness_buys.txt"),
        (&["boundedness", "programs/reach.dl"], "boundedness_reach.txt"),
        (&["widths", "programs/triangle.dl"], "widths_triangle.txt"),
        (&["widths", "--fractional", "programs/triangle.dl"], "widths_triangle_fractional.txt"),
        (&["complexity", "programs/tc.dl"], "complexity_tc.txt"),
    ];
    for (args, file) in cases {
        assert_eq!(stdout(args), golden(file), "{args:?}");
    }
}

#[test]
fn transitive_closure_has_three_adorned_rules() {
    let out = stdout(&["adorn", "programs/tc.dl"]);
    assert_eq!(out.lines().count(), 3);
    assert!(out.contains("tc[tc(X,Y) :- e(X,_), e(_,Y)](X,Y) :- tc[tc(X,Y) :- e(X,Y)](X,Z), e(Z,Y)."));
}

#[test]
fn tight_bounds_at_two() {
    let out = stdout(&["bounds", "--n", "2", "programs/tight.dl"]);
    assert!(out.contains("bound1=64 "), "{out}");
    assert!(out.contains("bound2=864 "), "{out}");
    // The matching instance reaches bound1.
    assert_eq!(stdout(&["eval", "programs/tight.dl", "--edb", "programs/tight2.edb"]).lines().count(), 64);
}

#[test]
fn buys_is_bounded() {
    let out = dlsb(&["boundedness", "programs/buys.dl"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let ucq: Vec<&str> = text.lines().skip_while(|l| *l != "UCQ:").skip(1).collect();
    assert_eq!(ucq, ["  buys(X,Y) :- likes(X,Y).", "  buys(X,Y) :- likes(_,Y), trendy(X)."]);
}

#[test]
fn exit_codes() {
    assert_eq!(code(&["adorn", "programs/tc.dl"]), 0);
    assert_eq!(code(&["boundedness", "programs/tc.dl", "--max-rules", "40"]), 1);
    assert_eq!(code(&["boundedness", "--budget", "2", "programs/reach_from.dl"]), 1);
    let capped = Command::new(env!("CARGO_BIN_EXE_dlsb"))
        .args(["adorn", "--relax", "id", "programs/tc.dl"])
        .env("DLSB_MAX_RULES", "30")
        .current_dir(root())
        .output()
        .unwrap();
    assert_eq!(capped.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&capped.stderr).contains("rule limit"));
    assert_eq!(code(&["adorn", "programs/missing.dl"]), 2);
    assert_eq!(code(&["adorn", "--relax", "nope", "programs/tc.dl"]), 2);
    assert_eq!(code(&["eval", "--horn", "programs/triangle.dl", "--edb", "programs/path.edb"]), 2);
    assert_eq!(code(&["verify", "--edb", "programs/path.edb"]), 2);
}

#[test]
fn evaluation_methods_agree() {
    let semi = stdout(&["eval", "programs/tc.dl", "--edb", "programs/path.edb"]);
    assert_eq!(semi, "tc(1,2).\ntc(1,3).\ntc(2,3).\n");
    assert_eq!(stdout(&["eval", "--horn", "programs/tc.dl", "--edb", "programs/path.edb"]), semi);
}

#[test]
fn complexity_of_chain() {
    let out = stdout(&["complexity", "programs/chain.dl"]);
    assert!(out.starts_with("classes: linear, simple-chain\n"), "{out}");
    assert!(out.contains("linear: O(f * |P| * N^(ew+fchw-1)) = O(2 * 2 * N)"), "{out}");
    assert!(!out.contains("adornment-groundable:"), "{out}");
}

#[test]
fn repeated_runs_are_byte_identical() {
    let runs: &[&[&str]] = &[
        &["--json", "adorn", "programs/tight.dl"],
        &["--json", "bounds", "--n", "3", "programs/tight.dl"],
        &["boundedness", "--budget", "2", "programs/reach_from.dl"],
        &["--json", "verify", "--seed", "3", "--programs", "20", "--instances", "2", "--threads", "3"],
    ];
    for args in runs {
        let a = dlsb(args);
        let b = dlsb(args);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        assert_eq!(a.status.code(), b.status.code(), "{args:?}");
    }
    let one = dlsb(&["--json", "verify", "--seed", "3", "--programs", "20", "--instances", "2", "--threads", "1"]);
    let four = dlsb(&["--json", "verify", "--seed", "3", "--programs", "20", "--instances", "2", "--threads", "4"]);
    assert_eq!(one.stdout, four.stdout);
}

// Mirrors of the documented JSON shapes. Unknown fields are errors, so
// output drifting from the documentation fails here.

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(dead_code)]
struct Rule {
    rule: String,
    head: String,
    adornment: Option<String>,
    source: Option<usize>,
    exact: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Adorned {
    rules: Vec<Rule>,
    adornments: BTreeMap<String, Vec<String>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Widths {
    mode: String,
    predicates: BTreeMap<String, String>,
    program: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(dead_code)]
struct Boundedness {
    outcome: String,
    budget: Option<usize>,
    limit: Option<String>,
    program: Adorned,
    ucq: Option<BTreeMap<String, Vec<String>>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Horn {
    clauses: usize,
    cover_groundings: usize,
    symbols: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Eval {
    method: String,
    relations: BTreeMap<String, Vec<Vec<serde_json::Value>>>,
    horn: Option<Horn>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Certified {
    value: String,
    exact: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(dead_code)]
struct Stats {
    num_edbs: u64,
    ear: u32,
    arq: u32,
    rule_count: u64,
    term_count: u64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(dead_code)]
struct PredicateBounds {
    predicate: String,
    stats: Stats,
    f_exact: u64,
    ew_integral: u32,
    ew_fractional: String,
    bound1: String,
    bound2: Certified,
    agm_bound: Certified,
    coeff_naive: String,
    coeff_minimal: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Bounds {
    n: u64,
    predicates: Vec<PredicateBounds>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Fchw {
    value: Option<u64>,
    source: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(dead_code)]
struct Bound {
    class: String,
    formula: String,
    instantiated: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Complexity {
    classes: Vec<String>,
    f: u64,
    rules: u64,
    ew: u64,
    fchw: Fchw,
    bounds: Vec<Bound>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(dead_code)]
struct Check {
    check: String,
    cases: usize,
    violations: usize,
    examples: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Verify {
    programs: usize,
    instances: usize,
    seed: Option<u64>,
    checks: Vec<Check>,
    ok: bool,
}

fn json<T: for<'de> Deserialize<'de>>(args: &[&str]) -> T {
    let mut full = vec!["--json"];
    full.extend_from_slice(args);
    let out = dlsb(&full);
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{args:?}: {e}"))
}

#[test]
fn json_follows_the_schema() {
    let a: Adorned = json(&["adorn", "programs/tc.dl"]);
    assert_eq!(a.rules.len(), 3);
    assert_eq!(a.adornments["tc"], ["tc(X,Y) :- e(X,Y).", "tc(X,Y) :- e(X,_), e(_,Y)."]);
    assert!(a.rules.iter().all(|r| r.head == "tc" && r.adornment.is_some()));
    assert_eq!(a.rules.iter().map(|r| r.exact).collect::<Vec<_>>(), [true, false, false]);

    let w: Widths = json(&["widths", "--fractional", "programs/triangle.dl"]);
    assert_eq!((w.mode.as_str(), w.program.as_str(), w.predicates["p"].as_str()), ("fractional", "3/2", "3/2"));

    let b: Boundedness = json(&["boundedness", "programs/reach.dl"]);
    assert_eq!(b.outcome, "non-recursive");
    assert_eq!(b.ucq.unwrap()["r"], ["r(X) :- e(_,X)."]);
    let b: Boundedness = json(&["boundedness", "--budget", "2", "programs/reach_from.dl"]);
    assert_eq!((b.outcome.as_str(), b.budget, b.ucq.is_none()), ("degraded", Some(2), true));
    assert_eq!(b.program.rules.len(), 4);
    let b: Boundedness = json(&["boundedness", "--max-rules", "40", "programs/tc.dl"]);
    assert_eq!(b.outcome, "inconclusive");
    assert_eq!(b.limit.as_deref(), Some("rule limit"));

    let e: Eval = json(&["eval", "--horn", "programs/tc.dl", "--edb", "programs/path.edb"]);
    assert_eq!(e.method, "horn");
    assert_eq!(e.relations["tc"].len(), 3);
    let h = e.horn.unwrap();
    assert!(h.clauses > 0 && h.cover_groundings > 0 && h.symbols > 0);
    let e: Eval = json(&["eval", "programs/tc.dl", "--edb", "programs/path.edb"]);
    assert_eq!((e.method.as_str(), e.horn.is_none()), ("semi-naive", true));

    let s: Bounds = json(&["bounds", "--n", "2", "programs/tight.dl"]);
    assert_eq!(s.n, 2);
    let q = &s.predicates[0];
    assert_eq!((q.bound1.as_str(), q.bound2.value.as_str(), q.bound2.exact), ("64", "864", true));
    assert_eq!(q.agm_bound.value, "128");

    let c: Complexity = json(&["complexity", "programs/tc.dl"]);
    assert_eq!(c.classes, ["linear", "simple-chain", "adornment-groundable"]);
    assert_eq!((c.f, c.rules, c.ew, c.fchw.value), (2, 2, 2, Some(2)));
    assert_eq!(c.fchw.source, "search-integral");
    assert_eq!(c.bounds.len(), 4);

    let classes: Vec<String> = json(&["classify", "programs/chain.dl"]);
    assert_eq!(classes, ["linear", "simple-chain"]);

    let v: Verify = json(&["verify", "--seed", "5", "--programs", "10", "--instances", "2"]);
    assert!(v.ok);
    assert_eq!((v.programs, v.instances, v.seed), (10, 2, Some(5)));
    assert_eq!(v.checks.len(), 3);
    assert!(v.checks.iter().all(|c| c.violations == 0 && c.examples.is_empty()));
}
