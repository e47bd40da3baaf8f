//! Bernoulli naive Bayes over [0, 1]-valued features with add-one
//! smoothing. A value x contributes x log(theta) + (1 - x) log(1 - theta);
//! masked features are skipped in both training and prediction.

use std::collections::BTreeMap;

use super::features::SparseFeatures;
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct NaiveBayes {
    classes: Vec<String>,
    log_prior: Vec<f64>,
    /// feature -> per class (log theta, log (1 - theta))
    params: BTreeMap<String, Vec<(f64, f64)>>,
}

pub fn nb_train(classes: &[String], examples: &[(SparseFeatures, String)]) -> Result<NaiveBayes> {
    if classes.is_empty() {
        return Err(Error::Data("no classes".into()));
    }
    let k = classes.len();
    let class_index = |c: &str| {
        classes
            .iter()
            .position(|x| x == c)
            .ok_or_else(|| Error::Data(format!("example label `{c}` is not a declared class")))
    };
    let mut n_class = vec![0usize; k];
    let mut keys: BTreeMap<&str, ()> = BTreeMap::new();
    for (f, label) in examples {
        n_class[class_index(label)?] += 1;
        for key in f.values.keys() {
            keys.insert(key, ());
        }
    }
    if let Some(i) = n_class.iter().position(|&n| n == 0) {
        return Err(Error::Data(format!("class `{}` has no training examples", classes[i])));
    }
    let total = examples.len() as f64;
    let log_prior = n_class.iter().map(|&n| (n as f64 / total).ln()).collect();
    let mut params = BTreeMap::new();
    for key in keys.into_keys() {
        let mut sum = vec![0.0; k];
        let mut seen = vec![0.0; k];
        for (f, label) in examples {
            if let Some(x) = f.get(key) {
                let c = class_index(label)?;
                sum[c] += x;
                seen[c] += 1.0;
            }
        }
        let p = (0..k)
            .map(|c| {
                let theta = (sum[c] + 1.0) / (seen[c] + 2.0);
                (theta.ln(), (1.0 - theta).ln())
            })
            .collect();
        params.insert(key.to_string(), p);
    }
    Ok(NaiveBayes {
        classes: classes.to_vec(),
        log_prior,
        params,
    })
}

impl NaiveBayes {
    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    /// Normalized class posterior, in class order.
    pub fn predict(&self, features: &SparseFeatures) -> Vec<f64> {
        let mut score = self.log_prior.clone();
        for (key, p) in &self.params {
            let Some(x) = features.get(key) else { continue };
            for (s, &(lt, lf)) in score.iter_mut().zip(p) {
                *s += x * lt + (1.0 - x) * lf;
            }
        }
        let m = score.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let z: f64 = score.iter().map(|s| (s - m).exp()).sum();
        score.iter().map(|s| (s - m).exp() / z).collect()
    }

    /// Most probable class; the first in class order on ties.
    pub fn predict_label(&self, features: &SparseFeatures) -> &str {
        let post = self.predict(features);
        let mut best = 0;
        for (i, &p) in post.iter().enumerate() {
            if p > post[best] {
                best = i;
            }
        }
        &self.classes[best]
    }
}

/// Posterior probability of `class` for `features`.
pub fn nb_predict(model: &NaiveBayes, features: &SparseFeatures, class: &str) -> Option<f64> {
    let i = model.classes.iter().position(|c| c == class)?;
    Some(model.predict(features)[i])
}
