use std::cmp::Ordering;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::embed::{EmbedRequest, EmbeddingProvider, ProviderDescriptor};
use super::tokenize::{tokenize_bow, Stopwords, TfIdf};
use super::vector::{cosine, Vector};
use crate::corpus::{Example, ExampleId};
use crate::error::{Error, Result};
use crate::num::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Representation {
    Bow,
    Tfidf,
    Embedding,
}

/// Which part of an example gets vectorized.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TextField {
    /// Context and focus concatenated.
    #[default]
    Full,
    Focus,
    /// The context field, or the focus when an example has no context.
    Context,
}

impl TextField {
    pub fn select<'a>(self, example: &'a Example) -> std::borrow::Cow<'a, str> {
        match self {
            TextField::Full => example.full_text().into(),
            TextField::Focus => example.focus.as_str().into(),
            TextField::Context => match example.context.as_deref() {
                Some(c) if !c.trim().is_empty() => c.into(),
                _ => example.focus.as_str().into(),
            },
        }
    }
}

/// How per-query cosines are combined into one candidate score.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Aggregation {
    #[default]
    Mean,
    Max,
}

/// Turns texts into vectors of one representation. TF-IDF statistics are
/// fixed at construction.
#[derive(Clone)]
pub struct Featurizer {
    representation: Representation,
    stopwords: Stopwords,
    tfidf: Option<TfIdf>,
    provider: Option<Arc<dyn EmbeddingProvider>>,
}

impl Featurizer {
    pub fn representation(&self) -> Representation {
        self.representation
    }

    pub fn tfidf(&self) -> Option<&TfIdf> {
        self.tfidf.as_ref()
    }

    pub fn provider(&self) -> Option<ProviderDescriptor> {
        self.provider.as_ref().map(|p| p.descriptor())
    }

    pub fn vectorize<F: Real>(&self, items: &[EmbedRequest<'_>]) -> Result<Vec<Vector<F>>> {
        match self.representation {
            Representation::Bow => Ok(items
                .iter()
                .map(|r| Vector::Sparse(tokenize_bow(r.text, &self.stopwords)))
                .collect()),
            Representation::Tfidf => {
                let tfidf = self.tfidf.as_ref().expect("tf-idf featurizer carries its table");
                Ok(items
                    .iter()
                    .map(|r| Vector::Sparse(tfidf.weigh(&tokenize_bow::<F>(r.text, &self.stopwords))))
                    .collect())
            }
            Representation::Embedding => {
                let provider = self.provider.as_ref().expect("embedding featurizer carries a provider");
                Ok(provider
                    .embed(items)?
                    .into_iter()
                    .map(|v| Vector::Dense(v.normalized().cast()))
                    .collect())
            }
        }
    }

    pub fn vectorize_examples<F: Real>(&self, examples: &[Example], field: TextField) -> Result<Vec<Vector<F>>> {
        let texts: Vec<_> = examples.iter().map(|e| field.select(e)).collect();
        let requests: Vec<EmbedRequest<'_>> = examples
            .iter()
            .zip(&texts)
            .map(|(e, t)| EmbedRequest { id: &e.id, text: t.as_ref() })
            .collect();
        self.vectorize(&requests)
    }
}

/// Immutable exact-scan similarity index.
#[derive(Clone)]
pub struct SimilarityIndex<F> {
    featurizer: Featurizer,
    field: TextField,
    entries: Vec<(ExampleId, Vector<F>)>,
}

/// A scored candidate; `best_query` is the query with the highest cosine.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hit<F> {
    pub id: ExampleId,
    pub score: F,
    pub best_query: usize,
}

/// Indexes `examples` under one representation. TF-IDF statistics come from
/// the indexed examples only. Embeddings come from `provider`, which must
/// cover every example.
pub fn build_index<F: Real>(
    examples: &[Example],
    field: TextField,
    representation: Representation,
    provider: Option<Arc<dyn EmbeddingProvider>>,
    stopwords: &Stopwords,
) -> Result<SimilarityIndex<F>> {
    let tfidf = match representation {
        Representation::Tfidf => {
            let docs: Vec<_> = examples
                .iter()
                .map(|e| tokenize_bow::<F>(&field.select(e), stopwords))
                .collect();
            Some(TfIdf::fit(&docs))
        }
        _ => None,
    };
    if representation == Representation::Embedding && provider.is_none() {
        return Err(Error::Config("embedding index needs an embedding provider".into()));
    }
    let featurizer = Featurizer { representation, stopwords: stopwords.clone(), tfidf, provider };
    let vectors = featurizer.vectorize_examples(examples, field)?;
    let entries = examples.iter().map(|e| e.id.clone()).zip(vectors).collect();
    Ok(SimilarityIndex { featurizer, field, entries })
}

impl<F: Real> SimilarityIndex<F> {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn featurizer(&self) -> &Featurizer {
        &self.featurizer
    }

    pub fn field(&self) -> TextField {
        self.field
    }

    pub fn entries(&self) -> &[(ExampleId, Vector<F>)] {
        &self.entries
    }

    /// Vectorizes examples with this index's featurizer (and the given field).
    pub fn vectorize(&self, examples: &[Example], field: TextField) -> Result<Vec<Vector<F>>> {
        self.featurizer.vectorize_examples(examples, field)
    }

    /// Scores every entry against `queries`; unsorted, in index order.
    pub fn score_all(&self, queries: &[Vector<F>], aggregation: Aggregation) -> Result<Vec<Hit<F>>> {
        if queries.is_empty() {
            return Err(Error::Empty("query list".into()));
        }
        let expected = match self.featurizer.representation {
            Representation::Embedding => "dense",
            _ => "sparse",
        };
        if let Some(q) = queries.iter().find(|q| q.kind() != expected) {
            return Err(Error::RepresentationMismatch(format!(
                "index holds {expected} vectors, query is {}",
                q.kind()
            )));
        }
        self.entries
            .par_iter()
            .map(|(id, v)| {
                let mut total = F::zero();
                let mut best = (F::neg_infinity(), 0usize);
                for (qi, q) in queries.iter().enumerate() {
                    let c = cosine(v, q)?;
                    total = total + c;
                    if c > best.0 {
                        best = (c, qi);
                    }
                }
                let score = match aggregation {
                    Aggregation::Mean => total / F::of_usize(queries.len()),
                    Aggregation::Max => best.0,
                };
                Ok(Hit { id: id.clone(), score, best_query: best.1 })
            })
            .collect()
    }

    /// Top `k` entries by aggregated cosine, descending, ties by ascending id.
    pub fn query_topk(&self, queries: &[Vector<F>], k: usize, aggregation: Aggregation) -> Result<Vec<Hit<F>>> {
        let hits = self.score_all(queries, aggregation)?;
        Ok(top_k(hits, k))
    }
}

pub(crate) fn rank_order<F: Real>(a: &Hit<F>, b: &Hit<F>) -> Ordering {
    b.score
        .partial_cmp(&a.score)
        .unwrap_or(Ordering::Equal)
        .then_with(|| a.id.cmp(&b.id))
}

pub(crate) fn top_k<F: Real>(mut hits: Vec<Hit<F>>, k: usize) -> Vec<Hit<F>> {
    let k = k.min(hits.len());
    if k == 0 {
        return Vec::new();
    }
    if k < hits.len() {
        hits.select_nth_unstable_by(k - 1, rank_order);
        hits.truncate(k);
    }
    hits.sort_by(rank_order);
    hits
}

/// Free-function form of [`SimilarityIndex::query_topk`].
pub fn query_topk<F: Real>(
    index: &SimilarityIndex<F>,
    queries: &[Vector<F>],
    k: usize,
    aggregation: Aggregation,
) -> Result<Vec<(ExampleId, F)>> {
    Ok(index
        .query_topk(queries, k, aggregation)?
        .into_iter()
        .map(|h| (h.id, h.score))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Label, Likert};
    use crate::textsim::embed::{InternalTfidfProvider, PrecomputedFileProvider, SignProjection};
    use crate::textsim::vector::EmbeddingVector;
    use std::collections::HashMap;

    fn ex(id: &str, text: &str) -> Example {
        Example {
            id: ExampleId(id.into()),
            context: None,
            focus: text.into(),
            rule_tags: Default::default(),
            label: Label::Likert(Likert::Ok),
        }
    }

    fn corpus() -> Vec<Example> {
        vec![
            ex("e0", "red apple pie"),
            ex("e1", "green apple"),
            ex("e2", "fast red car"),
            ex("e3", "slow blue boat"),
            ex("e4", "apple tree in the garden"),
        ]
    }

    #[test]
    fn bow_index_has_one_entry_per_example() {
        let idx = build_index::<f64>(&corpus()[..3], TextField::Full, Representation::Bow, None, Stopwords::english()).unwrap();
        assert_eq!(idx.len(), 3);
    }

    #[test]
    fn k_zero_and_identity_query() {
        let docs = corpus();
        let idx = build_index::<f64>(&docs, TextField::Full, Representation::Bow, None, Stopwords::english()).unwrap();
        let q = idx.vectorize(&docs[2..3], TextField::Full).unwrap();
        assert!(idx.query_topk(&q, 0, Aggregation::Mean).unwrap().is_empty());
        let top = idx.query_topk(&q, 10, Aggregation::Mean).unwrap();
        assert_eq!(top.len(), 5);
        assert_eq!(top[0].id.as_str(), "e2");
        assert!((top[0].score - 1.0).abs() < 1e-12);
        assert!(idx.query_topk(&[], 1, Aggregation::Mean).is_err());
    }

    /// Brute-force oracle for 5 items, 2 queries, k = 3, mean aggregation.
    #[test]
    fn mean_topk_matches_exhaustive_scoring() {
        let docs = corpus();
        let idx = build_index::<f64>(&docs, TextField::Full, Representation::Bow, None, Stopwords::english()).unwrap();
        let queries = [ex("q0", "red apple"), ex("q1", "apple garden")];
        let qv = idx.vectorize(&queries, TextField::Full).unwrap();
        // Hand-computed cosines (unit counts): q0={red,apple}, q1={apple,garden}
        // e0 {red,apple,pie}: q0 2/(√2√3), q1 1/(√2√3)
        // e1 {green,apple}:   q0 1/2,      q1 1/2
        // e2 {fast,red,car}:  q0 1/(√2√3), q1 0
        // e3: 0, 0
        // e4 {apple,tree,garden}: q0 1/(√2√3), q1 2/(√2√3)
        let s6 = 2f64.sqrt() * 3f64.sqrt();
        let expected = [
            ("e0", (3.0 / s6) / 2.0),
            ("e4", (3.0 / s6) / 2.0),
            ("e1", 0.5),
        ];
        let got = idx.query_topk(&qv, 3, Aggregation::Mean).unwrap();
        assert_eq!(got.len(), 3);
        for (h, (id, score)) in got.iter().zip(expected) {
            assert_eq!(h.id.as_str(), id);
            assert!((h.score - score).abs() < 1e-12);
        }
    }

    #[test]
    fn tfidf_statistics_come_from_indexed_set_only() {
        let docs = corpus();
        let base = build_index::<f64>(&docs[..3], TextField::Full, Representation::Tfidf, None, Stopwords::english()).unwrap();
        let table = base.featurizer().tfidf().unwrap().table().clone();
        assert!(table.keys().all(|t| ["red", "apple", "pie", "green", "fast", "car"].contains(&t.as_str())));
        // querying with out-of-corpus text changes nothing about the table
        let _ = base.vectorize(&docs[3..], TextField::Full).unwrap();
        assert_eq!(base.featurizer().tfidf().unwrap().table(), &table);
        let widened = build_index::<f64>(&docs, TextField::Full, Representation::Tfidf, None, Stopwords::english()).unwrap();
        assert_ne!(widened.featurizer().tfidf().unwrap().table(), &table);
    }

    #[test]
    fn embedding_index_reports_missing_ids() {
        let docs = corpus();
        let mut vectors = HashMap::new();
        for e in &docs[..4] {
            vectors.insert(e.id.clone(), EmbeddingVector::new(vec![1.0, 0.5]).unwrap());
        }
        let provider: Arc<dyn EmbeddingProvider> = Arc::new(PrecomputedFileProvider::from_vectors(2, vectors).unwrap());
        let err = build_index::<f64>(&docs, TextField::Full, Representation::Embedding, Some(provider), Stopwords::english())
            .err()
            .unwrap();
        assert!(matches!(err, Error::ProviderMiss(id) if id == "e4"));
    }

    #[test]
    fn repeated_builds_give_identical_results_and_mismatch_errors() {
        let docs = corpus();
        let provider: Arc<dyn EmbeddingProvider> = Arc::new(InternalTfidfProvider::fit(
            docs.iter().map(|e| e.focus.as_str()),
            Stopwords::english(),
            SignProjection::new(64, 2).ok(),
        ));
        let run = || {
            let idx = build_index::<f64>(&docs, TextField::Full, Representation::Embedding, Some(provider.clone()), Stopwords::english()).unwrap();
            let q = idx.vectorize(&docs[..1], TextField::Full).unwrap();
            idx.query_topk(&q, 5, Aggregation::Max).unwrap()
        };
        assert_eq!(run(), run());
        let idx = build_index::<f64>(&docs, TextField::Full, Representation::Bow, None, Stopwords::english()).unwrap();
        let dense = vec![Vector::Dense(EmbeddingVector::new(vec![1.0]).unwrap())];
        assert!(matches!(idx.query_topk(&dense, 1, Aggregation::Mean), Err(Error::RepresentationMismatch(_))));
    }
}
