use mwp_core::analyzer::{analyze_function, analyze_program, Options};
use mwp_core::frontend::{parse, parse_with, ParseOptions};
use mwp_core::inliner::{build_inlined, check_call_theorem, project_variables, ChoiceProjection};
use mwp_core::{Assignment, MwpError};

const CALL_PAIR: &str = "
function f(X1) { loop X1 { X2 = X2 + X3; } return X2; }
function main() { X3 = X1 + X2; X2 = X3 + X1; X1 = f(X2); }
";

#[test]
fn inlined_body_renames_callee_variables() {
    let p = parse(CALL_PAIR).unwrap();
    let inl = build_inlined(p.function("main").unwrap(), p.function("f").unwrap()).unwrap();
    assert_eq!(inl.params, ["__y1"]);
    assert_eq!(inl.result, "__r1");
    let text = inl.function.to_string();
    assert!(text.contains("__y1 = X2;"), "{text}");
    assert!(text.contains("loop __y1 {"), "{text}");
    assert!(text.contains("__r1 = __r1 + __v1;"), "{text}");
    assert!(text.contains("X1 = __r1;"), "{text}");
    assert!(!text.contains("f("), "{text}");
}

#[test]
fn inlined_output_reparses_to_the_same_function() {
    let p = parse(CALL_PAIR).unwrap();
    let inl = build_inlined(p.function("main").unwrap(), p.function("f").unwrap()).unwrap();
    let reparsed = parse_with(
        &inl.function.to_string(),
        ParseOptions {
            allow_reserved: true,
        },
    )
    .unwrap()
    .program;
    assert_eq!(reparsed.functions[0], inl.function);

    let a = analyze_function(&inl.function, &Default::default(), &Options::default()).unwrap();
    let b = analyze_function(
        &reparsed.functions[0],
        &Default::default(),
        &Options::default(),
    )
    .unwrap();
    assert_eq!(a.matrix, b.matrix);
}

#[test]
fn reserved_names_are_rejected_by_default() {
    assert!(parse("function main() { __y1 = X1; }").is_err());
}

#[test]
fn example_pair_satisfies_both_clauses() {
    let p = parse(CALL_PAIR).unwrap();
    let r = check_call_theorem(&p, "main", "f", 1 << 16).unwrap();
    assert_eq!(r.projection.block_start, 2);
    assert_eq!(r.projection.block_len, 1);
    assert_eq!(r.projection.call_index, Some(2));
    assert_eq!(r.caller_assignments, 9);
    assert_eq!(r.inlined_assignments, 27);
    assert_eq!(r.outside_image, 18);
    assert_eq!(r.outside_with_infinity, 18);
    assert!(r.holds(), "{r:?}");
}

#[test]
fn projection_maps_block_and_shifts_later_indices() {
    let proj = ChoiceProjection {
        block_start: 1,
        block_len: 3,
        call_index: Some(1),
        representatives: vec![Assignment(vec![0, 0, 0]), Assignment(vec![2, 1, 0])],
    };
    let pis: Vec<usize> = (0..6).map(|j| proj.pi(j)).collect();
    assert_eq!(pis, [0, 1, 1, 1, 2, 3]);
    let beta = proj.inject(&Assignment(vec![2, 1, 0, 1])).unwrap();
    assert_eq!(beta.values(), [2, 2, 1, 0, 0, 1]);
    // Every caller index is recovered through π.
    for i in 0..4 {
        let preimage: Vec<usize> = (0..6).filter(|&j| proj.pi(j) == i).collect();
        assert!(!preimage.is_empty());
    }
    assert_eq!(proj.behavior_of(&beta), Some(1));
    assert_eq!(proj.behavior_of(&Assignment(vec![0, 1, 1, 1, 0, 0])), None);
}

#[test]
fn calls_with_several_behaviours() {
    let src = "
        function add(X1, X2) { X3 = X1 + X2; return X3; }
        function main() { X4 = X5 + X6; X6 = add(X4, X5); X5 = X6 - X4; }
    ";
    let p = parse(src).unwrap();
    let r = check_call_theorem(&p, "main", "add", 1 << 16).unwrap();
    assert_eq!(r.projection.representatives.len(), 3);
    assert_eq!(r.outside_image, 0);
    assert!(r.holds(), "{r:?}");
}

#[test]
fn merged_behaviours_only_hold_up_to_merging() {
    // The second sum never reaches the result, so its three choices merge.
    let src = "
        function g(X1, X2) { X3 = X1 + X2; X4 = X1 + X2; return X3; }
        function main() { X1 = g(X2, X3); }
    ";
    let p = parse(src).unwrap();
    let r = check_call_theorem(&p, "main", "g", 1 << 16).unwrap();
    assert_eq!(r.projection.representatives.len(), 3);
    assert_eq!(r.outside_image, 6);
    assert_eq!(r.outside_merged, 6);
    assert!(!r.holds());
    assert!(r.holds_up_to_merging(), "{r:?}");
}

#[test]
fn callee_without_behaviours() {
    let src = "
        function h(X1) { loop X1 { X2 = X2 + X2; } return X2; }
        function main() { X3 = h(X1); }
    ";
    let p = parse(src).unwrap();
    let r = check_call_theorem(&p, "main", "h", 1 << 16).unwrap();
    assert_eq!(r.projection.call_index, None);
    assert!(r.holds(), "{r:?}");
}

#[test]
fn missing_call_site_is_reported() {
    let src = "
        function f(X1) { return X1; }
        function main() { X2 = X1; }
    ";
    let p = parse(src).unwrap();
    assert!(matches!(
        check_call_theorem(&p, "main", "f", 1 << 16),
        Err(MwpError::NoCallSite { .. })
    ));
}

#[test]
fn oversized_check_is_refused() {
    let p = parse(CALL_PAIR).unwrap();
    assert!(matches!(
        check_call_theorem(&p, "main", "f", 10),
        Err(MwpError::BudgetExceeded { .. })
    ));
}

#[test]
fn projection_of_unknown_variable_fails() {
    let p = parse(CALL_PAIR).unwrap();
    let a = analyze_program(&p, &Options::default()).unwrap();
    let main = a.function("main").unwrap();
    let keep = vec!["X2".to_string(), "X1".to_string()];
    let sub = project_variables(&main.matrix, &main.variables, &keep).unwrap();
    assert_eq!(sub.dim(), 2);
    assert_eq!(
        sub.get(0, 1),
        main.matrix
            .get(main.var_index("X2").unwrap(), main.var_index("X1").unwrap())
    );
    let bad = vec!["X9".to_string()];
    assert!(matches!(
        project_variables(&main.matrix, &main.variables, &bad),
        Err(MwpError::UnknownVariable(_))
    ));
}

#[test]
fn callee_state_carried_across_loop_iterations_breaks_equality() {
    // Inlined, `__r1` keeps its value from one iteration to the next, while
    // the call rule treats every call as starting afresh.
    let src = "
        function f(X1) { X2 = X2 + X1; return X2; }
        function main() { loop X3 { X1 = f(X2); } }
    ";
    let p = parse(src).unwrap();
    let r = check_call_theorem(&p, "main", "f", 1 << 16).unwrap();
    assert_eq!(r.equality_failures.len(), 1);
    assert_eq!(r.equality_failures[0].0.values(), [1]);
}
