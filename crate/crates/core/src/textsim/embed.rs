use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs;
use std::path::Path;
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::tokenize::{tokenize_bow, Stopwords, TfIdf};
use super::vector::{EmbeddingVector, TokenVector};
use crate::corpus::ExampleId;
use crate::error::{Error, Result};
use crate::http::JsonClient;
use crate::num::Real;
use crate::rng;

pub const EMBED_URL_VAR: &str = "RULESHIFT_EMBED_URL";

/// Seeded sparse random projection: each term lands in one signed bucket.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignProjection {
    pub dim: usize,
    pub seed: u64,
}

impl SignProjection {
    pub fn new(dim: usize, seed: u64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("projection dimension must be positive".into()));
        }
        Ok(SignProjection { dim, seed })
    }

    /// Bucket and sign (`true` = negative) for a term.
    pub fn bucket(&self, term: &str) -> (usize, bool) {
        let mut key = self.seed.to_le_bytes().to_vec();
        key.extend_from_slice(term.as_bytes());
        let h = rng::stable_hash(&key);
        ((h >> 1) as usize % self.dim, h & 1 == 1)
    }

    /// Projected coordinates as `(index, value)` sorted by index, zeros dropped.
    pub fn project_sparse<F: Real>(&self, v: &TokenVector<F>) -> Vec<(u32, F)> {
        let mut acc: BTreeMap<u32, F> = BTreeMap::new();
        for (term, &w) in v.entries() {
            let (b, negative) = self.bucket(term);
            let slot = acc.entry(b as u32).or_insert_with(F::zero);
            *slot = if negative { *slot - w } else { *slot + w };
        }
        acc.into_iter().filter(|(_, w)| *w != F::zero()).collect()
    }

    pub fn project_dense<F: Real>(&self, v: &TokenVector<F>) -> Vec<F> {
        let mut out = vec![F::zero(); self.dim];
        for (i, w) in self.project_sparse(v) {
            out[i as usize] = w;
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProviderKind {
    InternalTfidf,
    PrecomputedFile,
    RemoteService,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProviderDescriptor {
    pub kind: ProviderKind,
    pub dim: usize,
    pub provenance: String,
}

impl fmt::Display for ProviderDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}(dim={}, {})", self.kind, self.dim, self.provenance)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct EmbedRequest<'a> {
    pub id: &'a ExampleId,
    pub text: &'a str,
}

/// Source of dense sentence vectors.
pub trait EmbeddingProvider: Send + Sync {
    fn descriptor(&self) -> ProviderDescriptor;

    /// One vector per request, in request order.
    fn embed(&self, items: &[EmbedRequest<'_>]) -> Result<Vec<EmbeddingVector<f64>>>;

    fn dim(&self) -> usize {
        self.descriptor().dim
    }
}

/// TF-IDF vectors fit on a reference corpus, L2-normalized, then optionally
/// sign-projected to a fixed dimension.
#[derive(Clone, Debug)]
pub struct InternalTfidfProvider {
    tfidf: TfIdf,
    stopwords: Stopwords,
    projection: Option<SignProjection>,
    vocabulary: BTreeMap<String, usize>,
}

impl InternalTfidfProvider {
    pub const DEFAULT_DIM: usize = 256;

    pub fn fit<'a, I>(texts: I, stopwords: &Stopwords, projection: Option<SignProjection>) -> Self
    where
        I: IntoIterator<Item = &'a str>,
    {
        let docs: Vec<TokenVector<f64>> = texts.into_iter().map(|t| tokenize_bow(t, stopwords)).collect();
        let tfidf = TfIdf::fit(&docs);
        let vocabulary = tfidf.table().keys().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        InternalTfidfProvider { tfidf, stopwords: stopwords.clone(), projection, vocabulary }
    }

    pub fn embed_text(&self, text: &str) -> EmbeddingVector<f64> {
        let weighted = self.tfidf.weigh(&tokenize_bow::<f64>(text, &self.stopwords));
        let norm = weighted.norm();
        let unit = if norm > 0.0 { weighted.scaled(1.0 / norm) } else { weighted };
        let values = match &self.projection {
            Some(p) => p.project_dense(&unit),
            None => {
                let mut out = vec![0.0; self.vocabulary.len()];
                for (t, &w) in unit.entries() {
                    out[self.vocabulary[t]] = w;
                }
                out
            }
        };
        EmbeddingVector::new(values).expect("tf-idf weights are finite")
    }
}

impl EmbeddingProvider for InternalTfidfProvider {
    fn descriptor(&self) -> ProviderDescriptor {
        let projection = match &self.projection {
            Some(p) => format!("sign-projection seed={}", p.seed),
            None => "no projection".to_string(),
        };
        ProviderDescriptor {
            kind: ProviderKind::InternalTfidf,
            dim: self.projection.map(|p| p.dim).unwrap_or(self.vocabulary.len()),
            provenance: format!(
                "tf-idf over {} documents, stopwords {}, {projection}",
                self.tfidf.documents(),
                self.stopwords.version()
            ),
        }
    }

    fn embed(&self, items: &[EmbedRequest<'_>]) -> Result<Vec<EmbeddingVector<f64>>> {
        Ok(items.iter().map(|r| self.embed_text(r.text)).collect())
    }
}

#[derive(Debug, Deserialize)]
struct PrecomputedHeader {
    dim: usize,
}

#[derive(Debug, Deserialize)]
struct PrecomputedRecord {
    id: String,
    vector: Vec<f64>,
}

/// Vectors read from a JSONL file: a `{"dim": N}` header line, then one
/// `{"id": ..., "vector": [...]}` object per line.
#[derive(Clone, Debug)]
pub struct PrecomputedFileProvider {
    dim: usize,
    vectors: HashMap<ExampleId, EmbeddingVector<f64>>,
    source: String,
}

impl PrecomputedFileProvider {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::Ingestion(format!("{} is empty", path.display())))?;
        let header: PrecomputedHeader = serde_json::from_str(header)
            .map_err(|e| Error::Record { row: 0, message: format!("bad header: {e}") })?;
        let mut vectors = HashMap::new();
        for (row, line) in lines {
            let rec: PrecomputedRecord = serde_json::from_str(line)
                .map_err(|e| Error::Record { row, message: e.to_string() })?;
            if rec.vector.len() != header.dim {
                return Err(Error::Record {
                    row,
                    message: format!("vector has {} values, header says {}", rec.vector.len(), header.dim),
                });
            }
            let v = EmbeddingVector::new(rec.vector)
                .map_err(|e| Error::Record { row, message: e.to_string() })?;
            vectors.insert(ExampleId(rec.id), v);
        }
        Ok(PrecomputedFileProvider { dim: header.dim, vectors, source: path.display().to_string() })
    }

    pub fn from_vectors(dim: usize, vectors: HashMap<ExampleId, EmbeddingVector<f64>>) -> Result<Self> {
        if let Some((id, v)) = vectors.iter().find(|(_, v)| v.dim() != dim) {
            return Err(Error::Config(format!("vector `{id}` has dim {} not {dim}", v.dim())));
        }
        Ok(PrecomputedFileProvider { dim, vectors, source: "in-memory".into() })
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

impl EmbeddingProvider for PrecomputedFileProvider {
    fn descriptor(&self) -> ProviderDescriptor {
        ProviderDescriptor {
            kind: ProviderKind::PrecomputedFile,
            dim: self.dim,
            provenance: self.source.clone(),
        }
    }

    fn embed(&self, items: &[EmbedRequest<'_>]) -> Result<Vec<EmbeddingVector<f64>>> {
        items
            .iter()
            .map(|r| self.vectors.get(r.id).cloned().ok_or_else(|| Error::ProviderMiss(r.id.to_string())))
            .collect()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RemoteConfig {
    pub base_url: String,
    pub batch_size: usize,
    pub max_in_flight: usize,
    pub timeout_secs: f64,
}

impl RemoteConfig {
    pub fn from_env(var: &str) -> Result<Self> {
        let base_url = std::env::var(var).map_err(|_| Error::Config(format!("{var} is not set")))?;
        Ok(RemoteConfig { base_url, ..RemoteConfig::default() })
    }
}

impl Default for RemoteConfig {
    fn default() -> Self {
        RemoteConfig { base_url: String::new(), batch_size: 64, max_in_flight: 4, timeout_secs: 30.0 }
    }
}

#[derive(Serialize)]
struct EmbedBody<'a> {
    texts: Vec<&'a str>,
}

#[derive(Deserialize)]
struct EmbedReply {
    vectors: Vec<Vec<f64>>,
}

/// HTTP embedding service: `POST {base}/embed {"texts": [...]}` ->
/// `{"vectors": [[...], ...]}`. Texts are sent in batches with at most
/// `max_in_flight` requests outstanding; replies are reassembled in order.
/// Vectors are memoized per text for the life of the provider.
pub struct RemoteServiceProvider {
    client: JsonClient,
    config: RemoteConfig,
    dim: Mutex<Option<usize>>,
    memo: Mutex<HashMap<String, EmbeddingVector<f64>>>,
}

impl RemoteServiceProvider {
    pub fn new(config: RemoteConfig) -> Result<Self> {
        if config.base_url.is_empty() || config.batch_size == 0 || config.max_in_flight == 0 {
            return Err(Error::Config("remote embedding config needs a URL and positive limits".into()));
        }
        let client = JsonClient::new(&config.base_url, Duration::from_secs_f64(config.timeout_secs));
        Ok(RemoteServiceProvider { client, config, dim: Mutex::new(None), memo: Mutex::new(HashMap::new()) })
    }

    pub fn from_env() -> Result<Self> {
        Self::new(RemoteConfig::from_env(EMBED_URL_VAR)?)
    }

    fn fetch(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector<f64>>> {
        let reply: EmbedReply = self.client.post("embed", &EmbedBody { texts: texts.to_vec() })?;
        if reply.vectors.len() != texts.len() {
            return Err(Error::Transport {
                message: format!("asked for {} vectors, got {}", texts.len(), reply.vectors.len()),
                retryable: false,
            });
        }
        reply
            .vectors
            .into_iter()
            .map(|v| EmbeddingVector::new(v).map_err(|e| Error::Transport { message: e.to_string(), retryable: false }))
            .collect()
    }
}

impl EmbeddingProvider for RemoteServiceProvider {
    fn descriptor(&self) -> ProviderDescriptor {
        ProviderDescriptor {
            kind: ProviderKind::RemoteService,
            dim: self.dim.lock().expect("dim lock").unwrap_or(0),
            provenance: self.client.base_url().to_string(),
        }
    }

    fn embed(&self, items: &[EmbedRequest<'_>]) -> Result<Vec<EmbeddingVector<f64>>> {
        let missing: Vec<&str> = {
            let memo = self.memo.lock().expect("memo lock");
            let mut seen = std::collections::HashSet::new();
            items
                .iter()
                .map(|r| r.text)
                .filter(|t| !memo.contains_key(*t) && seen.insert(*t))
                .collect()
        };
        let batches: Vec<&[&str]> = missing.chunks(self.config.batch_size).collect();
        let mut fetched: Vec<Option<Result<Vec<EmbeddingVector<f64>>>>> = (0..batches.len()).map(|_| None).collect();
        for (wave_no, wave) in batches.chunks(self.config.max_in_flight).enumerate() {
            let results: Vec<Result<Vec<EmbeddingVector<f64>>>> = std::thread::scope(|s| {
                let handles: Vec<_> = wave.iter().map(|batch| s.spawn(move || self.fetch(batch))).collect();
                handles
                    .into_iter()
                    .map(|h| h.join().unwrap_or_else(|_| Err(Error::Transport { message: "worker panicked".into(), retryable: false })))
                    .collect()
            });
            for (offset, r) in results.into_iter().enumerate() {
                fetched[wave_no * self.config.max_in_flight + offset] = Some(r);
            }
        }
        {
            let mut memo = self.memo.lock().expect("memo lock");
            let mut dim = self.dim.lock().expect("dim lock");
            for (batch, result) in batches.iter().zip(fetched) {
                let vectors = result.expect("every batch was fetched")?;
                for (text, v) in batch.iter().zip(vectors) {
                    match *dim {
                        None => *dim = Some(v.dim()),
                        Some(d) if d != v.dim() => {
                            return Err(Error::Transport {
                                message: format!("service changed dimension from {d} to {}", v.dim()),
                                retryable: false,
                            })
                        }
                        _ => {}
                    }
                    memo.insert(text.to_string(), v);
                }
            }
        }
        let memo = self.memo.lock().expect("memo lock");
        Ok(items.iter().map(|r| memo[r.text].clone()).collect())
    }
}
