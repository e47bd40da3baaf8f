use std::collections::BTreeMap;

use netlogic::baselines::{
    cf_predict, featurize, nb_predict, nb_train, p_entity, CfConfig, CfModel, PopulationTable, SparseFeatures,
    FRIENDS_BLOCK,
};
use netlogic::logic::GroundAtom;
use netlogic::social::{CategorySet, SocialGraph};
use proptest::prelude::*;

fn graph() -> SocialGraph {
    SocialGraph::new(CategorySet::default())
}

fn set(g: &mut SocialGraph, pred: &str, args: &[&str], v: f64) {
    g.set(GroundAtom::of(pred, args), v).unwrap();
}

fn befriend(g: &mut SocialGraph, a: &str, b: &str) {
    set(g, "Friend", &[a, b], 1.0);
    set(g, "Friend", &[b, a], 1.0);
}

fn sparse(pairs: &[(&str, f64)]) -> SparseFeatures {
    SparseFeatures {
        values: pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        ..SparseFeatures::default()
    }
}

#[test]
fn friend_share_counts_friends_with_a_known_value() {
    let mut g = graph();
    for (f, s) in [("f1", "IL"), ("f2", "IL"), ("f3", "NY"), ("f4", "CA")] {
        befriend(&mut g, "u", f);
        set(&mut g, "LiveIn", &[f, s], 1.0);
    }
    let fv = featurize("u", &g);
    let net = fv.network.unwrap();
    assert_eq!(net["LiveIn(IL)"], 0.5);
    assert_eq!(net["LiveIn(NY)"], 0.25);
}

#[test]
fn no_friends_masks_the_network_block() {
    let mut g = graph();
    set(&mut g, "Male", &["u"], 1.0);
    let fv = featurize("u", &g);
    assert!(fv.network.is_none());
    assert!(fv.flatten().masked.contains(FRIENDS_BLOCK));
}

#[test]
fn spouse_features_scale_by_confidence() {
    let mut g = graph();
    set(&mut g, "Spouse", &["u", "s"], 1.0);
    set(&mut g, "WorkIn", &["s", "IT"], 0.6);
    let fv = featurize("u", &g);
    assert_eq!(fv.spouse.unwrap()["WorkIn(IT)"], 0.6);
}

#[test]
fn separable_feature_gives_confident_posterior() {
    let classes = vec!["no".to_string(), "yes".to_string()];
    let mut ex = Vec::new();
    // Twenty per class: the smoothed likelihood is 21/22, so the
    // posterior on a training point is 21/22 as well.
    for i in 0..40 {
        let label = if i % 2 == 0 { "yes" } else { "no" };
        let x = if label == "yes" { 1.0 } else { 0.0 };
        ex.push((sparse(&[("f", x)]), label.to_string()));
    }
    let m = nb_train(&classes, &ex).unwrap();
    for (f, label) in &ex {
        let p = nb_predict(&m, f, label).unwrap();
        assert!(p > 0.9);
        assert!((p - 21.0 / 22.0).abs() < 1e-12);
    }
}

#[test]
fn uniform_features_return_the_prior() {
    let classes = vec!["a".to_string(), "b".to_string()];
    // Both classes see f = 1 half of the time, so every smoothed likelihood
    // is 0.5 and the posterior is the 4:2 class prior.
    let ex: Vec<_> = [("a", 1.0), ("a", 0.0), ("a", 1.0), ("a", 0.0), ("b", 1.0), ("b", 0.0)]
        .iter()
        .map(|(l, x)| (sparse(&[("f", *x)]), l.to_string()))
        .collect();
    let m = nb_train(&classes, &ex).unwrap();
    for x in [0.0, 0.3, 1.0] {
        let post = m.predict(&sparse(&[("f", x)]));
        assert!((post[0] - 4.0 / 6.0).abs() < 1e-12);
    }
}

#[test]
fn empty_class_is_rejected() {
    let classes = vec!["a".to_string(), "b".to_string()];
    assert!(nb_train(&classes, &[(sparse(&[]), "a".to_string())]).is_err());
}

#[test]
fn cf_duplicate_user_copies_the_rating() {
    let mut g = graph();
    g.add_entity("team", "sports").unwrap();
    for u in ["u1", "u2"] {
        set(&mut g, "Male", &[u], 1.0);
        set(&mut g, "WorkIn", &[u, "IT"], 1.0);
    }
    set(&mut g, "Like", &["u1", "team"], 1.0);
    assert_eq!(cf_predict("u2", "team", &g, &CfConfig::default()), 1.0);
}

#[test]
fn cf_without_overlap_falls_back_to_the_prior() {
    let mut g = graph();
    g.add_entity("team", "sports").unwrap();
    set(&mut g, "Male", &["u1"], 1.0);
    set(&mut g, "Like", &["u1", "team"], 1.0);
    set(&mut g, "Female", &["u2"], 1.0);
    let score = cf_predict("u2", "team", &g, &CfConfig::default());
    assert_eq!(score, p_entity(&g, "team"));
    assert_eq!(score, 0.5);
}

#[test]
fn cf_weighted_average_of_two_neighbours() {
    // Cosines to the query (1, 0) are 0.8 and 0.2.
    let features = vec![
        ("a".to_string(), sparse(&[("x", 0.8), ("y", 0.6)])),
        ("b".to_string(), sparse(&[("x", 0.2), ("y", 0.96f64.sqrt())])),
    ];
    let mut ratings = BTreeMap::new();
    ratings.insert("a".to_string(), BTreeMap::from([("e".to_string(), 1.0)]));
    ratings.insert("b".to_string(), BTreeMap::from([("e".to_string(), 0.0)]));
    let model = CfModel::new(features, &ratings, BTreeMap::new(), BTreeMap::new(), CfConfig::default());
    let s = model.predict_vector(None, &sparse(&[("x", 1.0)]), "e");
    assert!((s - 0.8).abs() < 1e-12, "{s}");
}

#[test]
fn entity_prior_and_population_baselines() {
    let mut g = graph();
    g.add_entity("e", "food").unwrap();
    for i in 0..200 {
        let u = format!("u{i}");
        g.add_user(&u);
        if i < 30 {
            set(&mut g, "Like", &[&u, "e"], 1.0);
        }
    }
    assert!((p_entity(&g, "e") - 0.15).abs() < 1e-12);
    assert_eq!(p_entity(&graph(), "e"), 0.0);
    assert_eq!(PopulationTable::default().unified(), "CA");
}

proptest! {
    #[test]
    fn nb_posterior_is_normalized(
        rows in prop::collection::vec((0.0f64..=1.0, 0.0f64..=1.0, any::<bool>()), 2..30),
        q in (0.0f64..=1.0, 0.0f64..=1.0),
    ) {
        let classes = vec!["n".to_string(), "y".to_string()];
        let mut ex: Vec<_> = rows
            .iter()
            .map(|&(a, b, l)| (sparse(&[("a", a), ("b", b)]), classes[usize::from(l)].clone()))
            .collect();
        ex.push((sparse(&[]), "n".to_string()));
        ex.push((sparse(&[]), "y".to_string()));
        let m = nb_train(&classes, &ex).unwrap();
        let post = m.predict(&sparse(&[("a", q.0), ("b", q.1)]));
        prop_assert!((post.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cf_score_is_bounded_and_monotone(
        sims in prop::collection::vec((0.05f64..1.0, 0.0f64..=1.0), 1..6),
        bump in 0.0f64..=1.0,
    ) {
        let features: Vec<_> = sims
            .iter()
            .enumerate()
            .map(|(i, &(x, _))| (format!("n{i}"), sparse(&[("x", x), ("y", 1.0 - x)])))
            .collect();
        let build = |first: f64| {
            let ratings: BTreeMap<_, _> = sims
                .iter()
                .enumerate()
                .map(|(i, &(_, r))| (format!("n{i}"), BTreeMap::from([("e".to_string(), if i == 0 { first } else { r })])))
                .collect();
            CfModel::new(features.clone(), &ratings, BTreeMap::new(), BTreeMap::new(), CfConfig::default())
        };
        let q = sparse(&[("x", 1.0)]);
        let low = build(sims[0].1).predict_vector(None, &q, "e");
        let high = build(sims[0].1.max(bump)).predict_vector(None, &q, "e");
        prop_assert!((0.0..=1.0).contains(&low));
        prop_assert!(high >= low - 1e-12);
    }
}
