//! Comparison predictors: popularity prior, population-based location,
//! naive Bayes and collaborative filtering over shared features.

mod cf;
mod features;
mod nb;
mod prior;

pub use cf::{cf_predict, entity_ratings, CfConfig, CfModel};
pub use features::{
    attribute_group, attribute_key, featurize, FeatureVector, Featurizer, SparseFeatures, FRIENDS_BLOCK,
    SELF_BLOCK, SPOUSE_BLOCK,
};
pub use nb::{nb_predict, nb_train, NaiveBayes};
pub use prior::{p_entity, PopulationTable, US_POPULATION};
