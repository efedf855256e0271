use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use pwhile_core::transformer::et_loop_free;
use pwhile_core::{
    analyze_loop, et_symbolic, expected_cost_oracle, parse_program, CostExpr, CostMode, LoopPolicy, LoopStrategy, Store,
};

const NESTED: &str = "while [x >= 0] (x > 0) { y := x; while [y >= 0] (y > 0) { tick(1); y := y - 1 }; x := x - 1 }";
const WALK: &str = "while [x >= 0] (x > 0) { {x := x - 1}[3/4]{x := x + 1}; tick(1) }";
const STRAIGHT: &str = "x := {1/2: x + 1, 1/2: x - 1}; if [true] (x > y) { tick(2); y := y + x } { {tick(1)}<>{z := z + 1} }; \
                        {x := x * 2}[1/3]{y := y - 1}; tick(1/2)";

fn parsing(c: &mut Criterion) {
    c.bench_function("parse/nested", |b| b.iter(|| parse_program(black_box(NESTED)).unwrap()));
}

fn transformer(c: &mut Criterion) {
    let prog = parse_program(STRAIGHT).unwrap();
    let zero = CostExpr::zero();
    c.bench_function("transformer/loop_free", |b| b.iter(|| et_loop_free(CostMode::Cost, black_box(&prog), &zero).unwrap()));
}

fn oracle(c: &mut Criterion) {
    let prog = parse_program(WALK).unwrap();
    let s = Store::from_pairs([("x", 3)]);
    c.bench_function("oracle/walk_h200", |b| b.iter(|| expected_cost_oracle(black_box(&prog), &s, 200)));
}

fn analysis(c: &mut Criterion) {
    let walk = parse_program(WALK).unwrap();
    let nested = parse_program(NESTED).unwrap();
    let zero = CostExpr::zero();
    let mut g = c.benchmark_group("analysis");
    g.sample_size(10);
    g.bench_function("walk", |b| b.iter(|| et_symbolic(CostMode::Cost, black_box(&walk), &zero, &LoopPolicy::default()).unwrap()));
    g.bench_function("nested_decompose", |b| {
        b.iter(|| analyze_loop(CostMode::Cost, black_box(&nested), &zero, LoopStrategy::Decompose, 2).unwrap())
    });
    g.finish();
}

criterion_group!(benches, parsing, transformer, oracle, analysis);
criterion_main!(benches);
