use netlogic::logic::{GroundLiteral, GroundRule, ProgramBuilder, Weight};
use netlogic::psl::{mpe_infer, soft_marginal_report, total_distance, PslConfig, SoftProgram};
use netlogic::semantics::{rule_distance, Interpretation};
use proptest::prelude::*;

fn soft(b: ProgramBuilder) -> SoftProgram {
    SoftProgram::from_program(&b.build().unwrap()).unwrap()
}

#[test]
fn distance_totals() {
    let mut b = ProgramBuilder::new();
    let x = b.prop("x");
    let y = b.prop("y");
    b.clause(Weight::Soft(2.0), vec![GroundLiteral::pos(x)], GroundLiteral::pos(y));
    let sp = soft(b);
    assert_eq!(total_distance(&sp, &Interpretation(vec![0.2, 0.5])).unwrap().total, 0.0);
    let d = total_distance(&sp, &Interpretation(vec![0.9, 0.6])).unwrap();
    assert!((d.total - 0.6).abs() < 1e-12);
    assert!(total_distance(&sp, &Interpretation(vec![0.9])).is_err());
}

#[test]
fn spouse_like_rule_is_satisfied_at_equal_truth() {
    let mut b = ProgramBuilder::new();
    let spouse = b.prop("Spouse");
    let like = b.prop("like");
    let x = b.prop("X");
    b.clause(
        Weight::Soft(1.0),
        vec![GroundLiteral::pos(spouse), GroundLiteral::pos(like)],
        GroundLiteral::pos(x),
    );
    let sp = soft(b);
    let d = total_distance(&sp, &Interpretation(vec![1.0, 0.6, 0.6])).unwrap();
    assert_eq!(d.total, 0.0);
}

#[test]
fn single_rule_is_satisfied_exactly() {
    let mut b = ProgramBuilder::new();
    let a = b.prop("A");
    let bb = b.prop("B");
    b.evidence(a, 1.0).unwrap();
    b.clause(Weight::Soft(1.0), vec![GroundLiteral::pos(a)], GroundLiteral::pos(bb));
    let res = mpe_infer(&soft(b), &PslConfig::default()).unwrap();
    assert!((res.values[bb] - 1.0).abs() < 1e-9);
    assert!(res.objective.abs() < 1e-9);
}

#[test]
fn chain_optimum_matches_a_fine_grid() {
    let mut b = ProgramBuilder::new();
    let a = b.prop("A");
    let bb = b.prop("B");
    let c = b.prop("C");
    b.evidence(a, 1.0).unwrap();
    b.evidence(c, 0.0).unwrap();
    b.clause(Weight::Soft(2.0), vec![GroundLiteral::pos(a)], GroundLiteral::pos(bb));
    b.clause(Weight::Soft(1.0), vec![GroundLiteral::pos(bb)], GroundLiteral::pos(c));
    let res = mpe_infer(&soft(b), &PslConfig::default()).unwrap();
    let grid = (0..=100)
        .map(|k| {
            let v = k as f64 / 100.0;
            2.0 * (1.0 - v) + v
        })
        .fold(f64::INFINITY, f64::min);
    assert!((res.objective - grid).abs() < 1e-9);
    assert!((res.values[bb] - 1.0).abs() < 1e-9);
}

#[test]
fn mention_lower_bounds_the_preference() {
    let mut b = ProgramBuilder::new();
    let mention = b.prop("MentionPos");
    let like = b.prop("Like");
    b.evidence(mention, 0.8).unwrap();
    b.clause(Weight::Hard, vec![GroundLiteral::pos(mention)], GroundLiteral::pos(like));
    b.clause(Weight::Soft(3.0), vec![], GroundLiteral::neg(like));
    let res = mpe_infer(&soft(b), &PslConfig::default()).unwrap();
    assert!(res.values[like] >= 0.8 - 1e-9);
    assert!(res.hard_violation <= 1e-9);
}

#[test]
fn report_thresholds_and_echoes_evidence() {
    let mut b = ProgramBuilder::new();
    let x = b.prop("x");
    let y = b.prop("y");
    let e = b.prop("e");
    b.evidence(e, 0.3).unwrap();
    let rep = soft_marginal_report(&soft(b), &Interpretation(vec![0.8, 0.5, 0.3]));
    assert!(rep[x].predicted && rep[y].predicted);
    assert_eq!(rep[e].value, 0.3);
    assert!(!rep[e].predicted);
}

fn random_program(seed: u64, bump: Option<(usize, f64)>) -> (SoftProgram, Vec<(Vec<GroundLiteral>, GroundLiteral)>) {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..6);
    let mut b = ProgramBuilder::new();
    for i in 0..n {
        b.prop(&format!("x{i}"));
    }
    b.evidence(0, rng.gen_range(0.0..=1.0)).unwrap();
    let lit = |rng: &mut rand_chacha::ChaCha8Rng| {
        let a = rng.gen_range(0..n);
        if rng.gen_bool(0.3) {
            GroundLiteral::neg(a)
        } else {
            GroundLiteral::pos(a)
        }
    };
    let mut rules = Vec::new();
    for r in 0..rng.gen_range(2..7) {
        let body: Vec<_> = (0..rng.gen_range(0..3)).map(|_| lit(&mut rng)).collect();
        let head = lit(&mut rng);
        let mut w = rng.gen_range(0.1..3.0);
        if let Some((which, factor)) = bump {
            if which == r {
                w *= factor;
            }
        }
        b.clause(Weight::Soft(w), body.clone(), head);
        rules.push((body, head));
    }
    (soft(b), rules)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn raising_a_weight_never_raises_its_distance(seed in 0u64..10_000, pick in 0usize..6, factor in 1.5f64..5.0) {
        let (base, rules) = random_program(seed, None);
        let r = pick % rules.len();
        let (bumped, _) = random_program(seed, Some((r, factor)));
        let cfg = PslConfig::default();
        let lo = mpe_infer(&base, &cfg).unwrap();
        let hi = mpe_infer(&bumped, &cfg).unwrap();
        let g = GroundRule { rule: 0, body: rules[r].0.clone(), head: rules[r].1 };
        let d_lo = rule_distance(&g, &Interpretation(lo.values)).unwrap();
        let d_hi = rule_distance(&g, &Interpretation(hi.values)).unwrap();
        prop_assert!(d_hi <= d_lo + 1e-7, "{} > {}", d_hi, d_lo);
    }

    #[test]
    fn mpe_values_are_in_the_unit_box(seed in 0u64..10_000) {
        let (sp, _) = random_program(seed, None);
        let res = mpe_infer(&sp, &PslConfig::default()).unwrap();
        prop_assert!(res.values.iter().all(|v| (0.0..=1.0).contains(v)));
        let d = total_distance(&sp, &Interpretation(res.values.clone())).unwrap();
        prop_assert!((d.total - res.objective).abs() < 1e-6);
    }
}
