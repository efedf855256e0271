use pwhile_core::analysis::{concavity_check, ConcavityVerdict, InvariantVerdict};
use pwhile_core::rational::int_rat;
use pwhile_core::syntax::eval_closed;
use pwhile_core::*;

const PROGRAMS: &[&str] = &[
    "while [x >= 0] (x > 0) { tick(1); x := x - 1 }",
    "while [true] (x = 1) { {x := 0}[1/2]{skip}; tick(1) }",
    "while [x >= 0] (x > 0) { {x := x - 1}[3/4]{x := x + 1}; tick(1) }",
    "while [x >= 0] (x > 0) { y := x; while [y >= 0] (y > 0) { tick(1); y := y - 1 }; x := x - 1 }",
    "while [true] (x > y) { {x := x - 1}<>{y := y + 1}; tick(2) }",
    "while [true] (x > 0) { x := {1/3: x - 1, 2/3: x - 2}; tick(1) }; tick(1/2)",
    "if [true] (x > 2) { while [true] (x > 2) { x := x - 1; tick(1) } } { tick(5) }",
];

fn grid() -> Vec<Store> {
    let mut out = Vec::new();
    for x in [-1, 0, 1, 2, 3, 5] {
        for y in [0, 2] {
            out.push(Store::from_pairs([("x", x), ("y", y)]));
        }
    }
    out
}

#[test]
fn bounds_dominate_oracle() {
    for src in PROGRAMS {
        let prog = parse_program(src).unwrap();
        let mut a = Analyzer::new(LoopPolicy::default());
        let bound = a.et(CostMode::Cost, &prog, &CostExpr::zero()).unwrap_or_else(|e| panic!("{src}: {e}"));
        assert!(bound.is_coefficient_free());
        for d in a.derivations() {
            d.replay(300, 7).unwrap_or_else(|e| panic!("{src}: {e}"));
        }
        for s in grid() {
            let oracle = expected_cost_oracle(&prog, &s, 120);
            let b = eval_closed(&bound, &s);
            assert!(oracle.lower <= b, "{src} at {s}: oracle {} > bound {b}", oracle.lower);
        }
    }
}

#[test]
fn value_mode_bounds_dominate_oracle() {
    let prog = parse_program("while [true] (x > 0) { {x := x - 1}[1/2]{z := z + 1} }").unwrap();
    let f = parse_cost_expr("nat(z)").unwrap();
    let bound = et_symbolic(CostMode::Value, &prog, &f, &LoopPolicy::default()).unwrap();
    for s in grid() {
        let s = s.with(&Var::new("z"), 1.into());
        let oracle = expected_value_oracle(&prog, &s, &f, 150);
        assert!(oracle.lower <= eval_closed(&bound, &s), "{s}: {bound}");
    }
}

#[test]
fn countdown_is_tight() {
    let prog = parse_program(PROGRAMS[0]).unwrap();
    let bound = et_symbolic(CostMode::Cost, &prog, &CostExpr::zero(), &LoopPolicy::default()).unwrap();
    assert_eq!(bound.to_string(), "nat(x)");
    for n in 0..12 {
        let s = Store::from_pairs([("x", n)]);
        let oracle = expected_cost_oracle(&prog, &s, 200);
        assert!(oracle.is_exact());
        assert_eq!(oracle.lower, int_rat(n));
        assert_eq!(eval_closed(&bound, &s), int_rat(n));
    }
}

#[test]
fn semantic_transformer_approaches_bound() {
    let prog = parse_program(PROGRAMS[2]).unwrap();
    let bound = et_symbolic(CostMode::Cost, &prog, &CostExpr::zero(), &LoopPolicy::default()).unwrap();
    let zero = pwhile_core::transformer::constant_expectation(Rat::default());
    let approx = et_semantic(CostMode::Cost, &prog, zero, 40);
    let s = Store::from_pairs([("x", 2)]);
    assert!(approx(&s) <= eval_closed(&bound, &s));
    assert!(approx(&s) > int_rat(3));
}

#[test]
fn policy_restrictions() {
    let lp = parse_program(PROGRAMS[3]).unwrap();
    let (_, ds) = analyze_loop(CostMode::Cost, &lp, &CostExpr::zero(), LoopStrategy::Decompose, 2).unwrap();
    let outer = ds.last().unwrap();
    assert_eq!(outer.label, "L0");
    assert!(matches!(outer.concavity, Some(ConcavityVerdict::Pass)));
    assert!(analyze_loop(CostMode::Cost, &lp, &CostExpr::zero(), LoopStrategy::Decompose, 1).is_err());
    let only = LoopPolicy::only(LoopStrategy::Invariant, 1);
    assert!(et_symbolic(CostMode::Cost, &lp, &CostExpr::zero(), &only).is_err());
}

#[test]
fn invariant_verdicts() {
    let lp = parse_program(PROGRAMS[1]).unwrap();
    let two = parse_cost_expr("[x = 1]*2").unwrap();
    assert_eq!(check_upper_invariant(CostMode::Cost, &lp, &CostExpr::zero(), &two), InvariantVerdict::Certified);
    let one = parse_cost_expr("[x = 1]*1").unwrap();
    assert!(matches!(check_upper_invariant(CostMode::Cost, &lp, &CostExpr::zero(), &one), InvariantVerdict::Refuted(_)));
}

#[test]
fn shape_checks() {
    let square = NormShape::new(1, vec![(int_rat(1), vec![0, 0])]);
    match concavity_check(&square, 50) {
        ConcavityVerdict::Fail(w) => assert!(w.to_string().starts_with("not concave")),
        ConcavityVerdict::Pass => panic!("square passed"),
    }
}
