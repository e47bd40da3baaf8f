use netlogic::logic::{GroundLiteral, GroundRule, GroundedProgram, ProgramBuilder, Weight};
use netlogic::semantics::{
    count_true_groundings, eval_ground_rule, rule_distance, soft_and, soft_neg, soft_or, world_log_weight,
    Interpretation, World,
};
use proptest::prelude::*;

fn rule(body: Vec<GroundLiteral>, head: GroundLiteral) -> GroundRule {
    GroundRule { rule: 0, body, head }
}

fn world(bits: &[bool]) -> World {
    World(bits.to_vec())
}

fn interp(values: &[f64]) -> Interpretation {
    Interpretation(values.to_vec())
}

#[test]
fn implication_truth_table() {
    let r = rule(vec![GroundLiteral::pos(0)], GroundLiteral::pos(1));
    assert!(!eval_ground_rule(&r, &world(&[true, false])));
    assert!(eval_ground_rule(&r, &world(&[false, false])));
    // A negated body literal on a false atom is a true conjunct.
    let r = rule(vec![GroundLiteral::neg(0)], GroundLiteral::pos(1));
    assert!(!eval_ground_rule(&r, &world(&[false, false])));
    assert!(eval_ground_rule(&r, &world(&[false, true])));
}

fn chain(weights: &[f64], groundings: &[usize]) -> GroundedProgram {
    let mut b = ProgramBuilder::new();
    let x = b.prop("x");
    let y = b.prop("y");
    for (&w, &n) in weights.iter().zip(groundings) {
        let id = b.rule(Weight::Soft(w), format!("{w}"));
        for _ in 0..n {
            b.ground(id, vec![GroundLiteral::pos(x)], GroundLiteral::pos(y));
        }
    }
    b.build().unwrap()
}

#[test]
fn counts_and_log_weights() {
    let p = chain(&[2.0], &[1]);
    assert_eq!(count_true_groundings(&p, &world(&[true, false])), vec![0]);
    assert_eq!(count_true_groundings(&p, &world(&[false, false])), vec![1]);
    assert_eq!(world_log_weight(&p, &world(&[true, true])), 2.0);

    let p = chain(&[1.0, 0.5], &[1, 2]);
    assert_eq!(count_true_groundings(&p, &world(&[true, true])), vec![1, 2]);
    assert_eq!(world_log_weight(&p, &world(&[true, true])), 2.0);

    let mut b = ProgramBuilder::new();
    let x = b.prop("x");
    let y = b.prop("y");
    b.clause(Weight::Hard, vec![GroundLiteral::pos(x)], GroundLiteral::pos(y));
    let p = b.build().unwrap();
    assert_eq!(world_log_weight(&p, &world(&[true, false])), f64::NEG_INFINITY);
}

#[test]
fn connective_examples() {
    assert_eq!(soft_and(1.0, 0.6).unwrap(), 0.6);
    assert_eq!(soft_and(0.7, 0.2).unwrap(), 0.0);
    assert_eq!(soft_or(0.8, 0.5).unwrap(), 1.0);
}

#[test]
fn distance_examples() {
    let r = rule(vec![GroundLiteral::pos(0)], GroundLiteral::pos(1));
    assert_eq!(rule_distance(&r, &interp(&[0.4, 0.7])).unwrap(), 0.0);
    assert!((rule_distance(&r, &interp(&[0.9, 0.6])).unwrap() - 0.3).abs() < 1e-12);
    let r = rule(vec![GroundLiteral::pos(0), GroundLiteral::pos(1)], GroundLiteral::pos(2));
    assert!((rule_distance(&r, &interp(&[1.0, 0.6, 0.2])).unwrap() - 0.4).abs() < 1e-12);
}

#[test]
fn out_of_range_values_are_rejected() {
    assert!(soft_or(-0.1, 0.5).is_err());
    let r = rule(vec![GroundLiteral::pos(0)], GroundLiteral::pos(1));
    assert!(rule_distance(&r, &interp(&[1.5, 0.0])).is_err());
    assert!(rule_distance(&r, &interp(&[1.0])).is_err());
}

fn literals(n: usize) -> impl Strategy<Value = (Vec<GroundLiteral>, GroundLiteral)> {
    let lit = (0..n, any::<bool>()).prop_map(|(a, neg)| if neg { GroundLiteral::neg(a) } else { GroundLiteral::pos(a) });
    (prop::collection::vec(lit.clone(), 0..4), lit)
}

proptest! {
    #[test]
    fn connectives_commute_and_are_monotone(a in 0.0f64..=1.0, b in 0.0f64..=1.0, d in 0.0f64..=1.0) {
        prop_assert_eq!(soft_and(a, b).unwrap(), soft_and(b, a).unwrap());
        prop_assert_eq!(soft_or(a, b).unwrap(), soft_or(b, a).unwrap());
        let hi = (a + d).min(1.0);
        prop_assert!(soft_and(hi, b).unwrap() >= soft_and(a, b).unwrap());
        prop_assert!(soft_or(hi, b).unwrap() >= soft_or(a, b).unwrap());
        prop_assert!((soft_neg(soft_neg(a).unwrap()).unwrap() - a).abs() < 1e-15);
    }

    #[test]
    fn distance_is_unit_and_zero_iff_satisfied(
        (body, head) in literals(4),
        values in prop::collection::vec(0.0f64..=1.0, 4),
    ) {
        let r = rule(body.clone(), head);
        let d = rule_distance(&r, &interp(&values)).unwrap();
        prop_assert!((0.0..=1.0).contains(&d));
        let truth = |l: GroundLiteral| if l.negated { 1.0 - values[l.atom] } else { values[l.atom] };
        let body_truth = body.iter().fold(1.0, |acc, &l| f64::max(0.0, acc + truth(l) - 1.0));
        prop_assert!((d - (body_truth - truth(head)).max(0.0)).abs() < 1e-12);
        if body_truth > truth(head) + 1e-12 {
            prop_assert!(d > 0.0);
        }
    }

    #[test]
    fn boolean_distance_matches_rule_truth(
        (body, head) in literals(4),
        bits in prop::collection::vec(any::<bool>(), 4),
    ) {
        let r = rule(body, head);
        let w = world(&bits);
        let d = rule_distance(&r, &Interpretation::from_world(&w)).unwrap();
        prop_assert_eq!(d == 0.0, eval_ground_rule(&r, &w));
    }
}
