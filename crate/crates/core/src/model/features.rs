use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;
use crate::textsim::{tokenize_bow, SignProjection, Stopwords, TfIdf, TokenVector};

/// Sparse feature vector: `(index, value)` pairs sorted by index.
pub type SparseFeatures<F> = Vec<(u32, F)>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopwordChoice {
    English,
    None,
}

impl StopwordChoice {
    pub fn list(self) -> Stopwords {
        match self {
            StopwordChoice::English => Stopwords::english().clone(),
            StopwordChoice::None => Stopwords::none(),
        }
    }
}

/// TF-IDF features fit on the base training texts, L2-normalized, then
/// optionally sign-projected to a fixed dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureExtractor {
    stopwords: StopwordChoice,
    tfidf: TfIdf,
    vocabulary: BTreeMap<String, u32>,
    projection: Option<SignProjection>,
    frozen: bool,
    #[serde(skip, default = "Stopwords::none")]
    cached_stopwords: Stopwords,
}

impl FeatureExtractor {
    pub fn fit<'a, I>(texts: I, stopwords: StopwordChoice, projection: Option<SignProjection>) -> Result<Self>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let list = stopwords.list();
        let docs: Vec<TokenVector<f64>> = texts.into_iter().map(|t| tokenize_bow(t, &list)).collect();
        if docs.is_empty() {
            return Err(Error::Empty("feature extractor training texts".into()));
        }
        let tfidf = TfIdf::fit(&docs);
        let vocabulary = tfidf.table().keys().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect();
        Ok(FeatureExtractor { stopwords, tfidf, vocabulary, projection, frozen: false, cached_stopwords: list })
    }

    pub fn freeze(&mut self) {
        self.frozen = true;
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    pub fn dim(&self) -> usize {
        self.projection.map(|p| p.dim).unwrap_or(self.vocabulary.len())
    }

    pub fn vocabulary_len(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn projection(&self) -> Option<SignProjection> {
        self.projection
    }

    /// Restores derived fields after deserialization.
    pub(crate) fn rehydrate(&mut self) {
        self.cached_stopwords = self.stopwords.list();
    }

    /// Unit-norm sparse features; texts with no known terms map to the empty vector.
    pub fn features<F: Real>(&self, text: &str) -> SparseFeatures<F> {
        let weighted = self.tfidf.weigh(&tokenize_bow::<f64>(text, &self.cached_stopwords));
        let raw: Vec<(u32, f64)> = match &self.projection {
            Some(p) => p.project_sparse(&weighted),
            None => weighted.entries().iter().map(|(t, &w)| (self.vocabulary[t], w)).collect(),
        };
        let mut raw = raw;
        raw.sort_unstable_by_key(|(i, _)| *i);
        let norm = raw.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Vec::new();
        }
        raw.into_iter().map(|(i, w)| (i, F::of(w / norm))).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn features_are_unit_norm_and_stable() {
        let fx = FeatureExtractor::fit(["red apple pie", "green apple", "fast red car"], StopwordChoice::English, None)
            .unwrap();
        assert_eq!(fx.dim(), 6);
        let a: SparseFeatures<f64> = fx.features("red apple");
        let norm: f64 = a.iter().map(|(_, w)| w * w).sum();
        assert!((norm - 1.0).abs() < 1e-12);
        assert_eq!(a, fx.features("Red, APPLE!"));
        assert!(fx.features::<f64>("unseen words only").is_empty());
        assert!(a.windows(2).all(|w| w[0].0 < w[1].0));
    }

    #[test]
    fn projection_bounds_the_dimension() {
        let p = SignProjection::new(16, 3).unwrap();
        let fx = FeatureExtractor::fit(["a b c d e f g h i j k l"], StopwordChoice::None, Some(p)).unwrap();
        assert_eq!(fx.dim(), 16);
        let v: SparseFeatures<f32> = fx.features("a b c d e f g h i j k l");
        assert!(v.iter().all(|(i, _)| (*i as usize) < 16));
    }

    #[test]
    fn serde_round_trip_keeps_features() {
        let mut fx = FeatureExtractor::fit(["the cat sat", "a dog ran"], StopwordChoice::English, None).unwrap();
        fx.freeze();
        let json = serde_json::to_string(&fx).unwrap();
        let mut back: FeatureExtractor = serde_json::from_str(&json).unwrap();
        back.rehydrate();
        assert!(back.is_frozen());
        assert_eq!(back.features::<f64>("the cat ran"), fx.features::<f64>("the cat ran"));
        assert!(FeatureExtractor::fit(Vec::<&str>::new(), StopwordChoice::None, None).is_err());
    }
}
