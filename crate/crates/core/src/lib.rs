//! Few-shot generalization harness for rule-sliced text classifiers.
//!
//! A base classifier is trained on every rule but one. The held-out rule then
//! contributes a handful of labeled shots, which are expanded with the most
//! similar examples from the existing rules and used to adapt the classifier,
//! either by full head fine-tuning or by tuning a small prompt vector.
//!
//! The numeric modules are generic over [`num::Real`] (`f32` or `f64`); the
//! aliases below fix the scalar to `f64`, which is what the runner uses.

pub mod augment;
pub mod corpus;
pub mod error;
pub mod http;
pub mod metrics;
pub mod model;
pub mod num;
pub mod rng;
pub mod runner;
pub mod shots;
pub mod textsim;

pub use error::{Error, Result};
pub use num::Real;

pub type Classifier = model::ClassifierState<f64>;
pub type Head = model::LinearHead<f64>;
pub type Prompt = model::PromptVector<f64>;
pub type Distances = shots::DistanceMatrix<f64>;
pub type Index = textsim::SimilarityIndex<f64>;
pub type Summary = metrics::TrialSummary<f64>;
