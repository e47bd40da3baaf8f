use netlogic::logic::{
    ground, ground_with, parse_rule_file, EvidenceMap, GroundAtom, GroundingOptions, KnowledgeBase, Literal,
    PredicateSchema, Role, Rule, Term, Weight,
};
use netlogic::Error;
use proptest::prelude::*;

fn kb() -> KnowledgeBase {
    let mut kb = KnowledgeBase::new();
    kb.declare(PredicateSchema::new("WorkInIT", &["User"], Role::Evidence)).unwrap();
    kb.declare(PredicateSchema::new("LikeElectronics", &["User"], Role::Query)).unwrap();
    kb.declare(PredicateSchema::new("Friend", &["User", "User"], Role::Evidence).irreflexive())
        .unwrap();
    kb.declare(PredicateSchema::new("Spouse", &["User", "User"], Role::Evidence).irreflexive())
        .unwrap();
    kb.declare(PredicateSchema::new("LiveInSamePlace", &["User", "User"], Role::Query)).unwrap();
    kb.declare(PredicateSchema::new("Like", &["User", "Entity"], Role::Query).category_scoped())
        .unwrap();
    for u in ["u1", "u2"] {
        kb.add_constant("User", u);
    }
    kb
}

#[test]
fn weighted_rule_parses_into_parts() {
    let kb = kb();
    let r = kb.parse_rule("0.242: WorkInIT(u) => LikeElectronics(u)").unwrap();
    assert_eq!(r.weight, Weight::Soft(0.242));
    assert_eq!(r.body, vec![Literal::new("WorkInIT", vec![Term::Var("u".into())])]);
    assert_eq!(r.head, Literal::new("LikeElectronics", vec![Term::Var("u".into())]));
}

#[test]
fn hard_rule_round_trips_through_text() {
    let kb = kb();
    let r = kb.parse_rule("HARD: Spouse(a,b) => Friend(a,b)").unwrap();
    assert!(r.weight.is_hard());
    assert_eq!(kb.parse_rule(&r.to_string()).unwrap(), r);
}

#[test]
fn malformed_rule_reports_a_position() {
    let err = kb().parse_rule("0.5: Friend(a,b =>").unwrap_err();
    assert!(matches!(err, Error::Parse { .. }), "{err:?}");
    assert!(err.to_string().contains("column"), "{err}");
}

#[test]
fn binary_relation_grounds_ordered_distinct_pairs() {
    let mut kb = kb();
    kb.add_rule_text("1: Friend(a,b) => LiveInSamePlace(a,b)").unwrap();
    let mut ev = EvidenceMap::new();
    ev.insert(GroundAtom::of("Friend", &["u1", "u2"]), 1.0);
    ev.insert(GroundAtom::of("Friend", &["u2", "u1"]), 1.0);
    let p = ground(&kb, &ev).unwrap();
    let heads: Vec<String> = p.rules().iter().map(|r| p.atom(r.head.atom).to_string()).collect();
    assert_eq!(heads, ["LiveInSamePlace(u1,u2)", "LiveInSamePlace(u2,u1)"]);
}

#[test]
fn cross_category_grounding_is_dropped() {
    let mut kb = kb();
    kb.set_category("e_fish", "food");
    kb.set_category("e_football", "sports");
    kb.add_rule_text("1: Friend(a,b) & Like(a,@e_fish) => Like(b,@e_football)").unwrap();
    let mut ev = EvidenceMap::new();
    ev.insert(GroundAtom::of("Friend", &["u1", "u2"]), 1.0);
    assert!(ground(&kb, &ev).unwrap().rules().is_empty());
    let uncut = GroundingOptions {
        cutoff: false,
        ..GroundingOptions::default()
    };
    assert_eq!(ground_with(&kb, &ev, &uncut, &[]).unwrap().rules().len(), 1);
}

#[test]
fn empty_entity_sort_fails_to_ground() {
    let mut kb = kb();
    kb.add_rule_text("1: Like(u,e) => LikeElectronics(u)").unwrap();
    assert!(matches!(ground(&kb, &EvidenceMap::new()), Err(Error::EmptySort { .. })));
}

#[test]
fn rule_file_errors_name_the_line() {
    let mut kb = kb();
    let err = parse_rule_file("1: WorkInIT(u) => LikeElectronics(u)\n\n2: WorkInIT(u\n", &mut kb).unwrap_err();
    assert!(err.to_string().contains("line 3"), "{err}");
}

fn literal() -> impl Strategy<Value = Literal> {
    let var = prop::sample::select(vec!["a", "b", "c"]);
    prop_oneof![
        var.clone().prop_map(|v| Literal::new("WorkInIT", vec![Term::Var(v.into())])),
        var.clone().prop_map(|v| Literal::new("LikeElectronics", vec![Term::Var(v.into())])),
        (var.clone(), var).prop_map(|(x, y)| Literal::new("Friend", vec![Term::Var(x.into()), Term::Var(y.into())])),
    ]
    .prop_flat_map(|l| any::<bool>().prop_map(move |neg| if neg { l.clone().negate() } else { l.clone() }))
}

fn rule() -> impl Strategy<Value = Rule> {
    let weight = prop_oneof![Just(Weight::Hard), (-5.0f64..5.0).prop_map(|w| Weight::Soft((w * 1000.0).round() / 1000.0))];
    (weight, prop::collection::vec(literal(), 1..4), literal()).prop_map(|(w, body, head)| Rule::new(w, body, head))
}

proptest! {
    #[test]
    fn print_then_parse_is_identity(r in rule()) {
        let kb = kb();
        prop_assume!(kb.check_rule(&r).is_ok());
        prop_assert_eq!(kb.parse_rule(&r.to_string()).unwrap(), r);
    }

    #[test]
    fn grounding_is_deterministic_and_bounded(
        rules in prop::collection::vec(rule(), 1..4),
        friends in prop::collection::vec((0usize..3, 0usize..3), 0..6),
    ) {
        let mut kb = kb();
        kb.add_constant("User", "u3");
        // Hard rules can contradict closed-world evidence; soft ones cannot.
        for r in rules.into_iter().filter(|r| !r.weight.is_hard()) {
            if kb.check_rule(&r).is_ok() {
                kb.add_rule(r).unwrap();
            }
        }
        let mut ev = EvidenceMap::new();
        for (a, b) in friends {
            if a != b {
                ev.insert(GroundAtom::new("Friend", vec![format!("u{}", a + 1), format!("u{}", b + 1)]), 1.0);
            }
        }
        let unpruned = GroundingOptions { prune: false, ..GroundingOptions::default() };
        let p = ground_with(&kb, &ev, &unpruned, &[]).unwrap();
        let q = ground_with(&kb, &ev, &unpruned, &[]).unwrap();
        prop_assert_eq!(p.atoms(), q.atoms());
        prop_assert_eq!(p.rules(), q.rules());
        // At most |User|^|vars| instances per rule.
        for (i, n) in p.groundings_per_rule().into_iter().enumerate() {
            let vars = kb.rules()[i].variables().len() as u32;
            prop_assert!(n <= 3usize.pow(vars));
        }
    }
}
