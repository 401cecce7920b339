use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dlsb::boundedness::default_limits;
use dlsb::eval::{evaluate, horn_ground_evaluate};
use dlsb::width::{width_of_program, CoverMode};
use dlsb::{adorn_program, check_boundedness, minimize_program, Limits, Membership, Relaxation};
use dlsb_bench::{path, program, ternary, BUYS, REACH_FROM, TC, TIGHT, TRIANGLE};

fn adorn(c: &mut Criterion) {
    let mut g = c.benchmark_group("adorn");
    for (name, text) in [("tc", TC), ("tight", TIGHT), ("triangle", TRIANGLE)] {
        let p = program(text);
        g.bench_function(name, |b| {
            b.iter(|| adorn_program(black_box(&p), Relaxation::GOut, Membership::HEq, Limits::default()).unwrap())
        });
    }
    let tc = program(TC);
    g.bench_function("tc-id-200", |b| {
        let limits = Limits { max_rules: 200, ..Limits::default() };
        b.iter(|| adorn_program(black_box(&tc), Relaxation::Id, Membership::HEq, limits).unwrap_err())
    });
    g.finish();
}

fn widths(c: &mut Criterion) {
    let mut g = c.benchmark_group("width");
    for (name, text) in [("tight", TIGHT), ("triangle", TRIANGLE)] {
        let pi = adorn_program(&program(text), Relaxation::GOut, Membership::HEq, Limits::default()).unwrap();
        for mode in [CoverMode::Integral, CoverMode::Fractional] {
            g.bench_with_input(BenchmarkId::new(name, format!("{mode:?}")), &pi, |b, pi| {
                b.iter(|| width_of_program(black_box(pi), mode).unwrap())
            });
        }
        g.bench_function(BenchmarkId::new(name, "minimize"), |b| b.iter(|| minimize_program(black_box(&pi))));
    }
    g.finish();
}

fn boundedness(c: &mut Criterion) {
    let mut g = c.benchmark_group("boundedness");
    let buys = program(BUYS);
    g.bench_function("buys", |b| b.iter(|| check_boundedness(black_box(&buys), None, default_limits())));
    let reach = program(REACH_FROM);
    g.bench_function("reach-budget-2", |b| b.iter(|| check_boundedness(black_box(&reach), Some(2), default_limits())));
    g.finish();
}

fn evaluation(c: &mut Criterion) {
    let mut g = c.benchmark_group("eval");
    let tc = program(TC);
    let pi = adorn_program(&tc, Relaxation::GOut, Membership::HEq, Limits::default()).unwrap();
    for n in [16, 64] {
        let d = path(n);
        g.bench_with_input(BenchmarkId::new("tc-semi-naive", n), &d, |b, d| b.iter(|| evaluate(&tc, black_box(d)).unwrap()));
        g.bench_with_input(BenchmarkId::new("tc-horn", n), &d, |b, d| {
            b.iter(|| horn_ground_evaluate(&tc, &pi, black_box(d)).unwrap())
        });
    }
    let triangle = program(TRIANGLE);
    let d = ternary(6);
    g.bench_function("triangle-semi-naive", |b| b.iter(|| evaluate(&triangle, black_box(&d)).unwrap()));
    g.finish();
}

criterion_group!(benches, adorn, widths, boundedness, evaluation);
criterion_main!(benches);
