use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::ClassifierState;
use crate::error::{Error, Result};
use crate::http::JsonClient;
use crate::num::Real;

pub const MODEL_URL_VAR: &str = "RULESHIFT_MODEL_URL";

/// Anything that maps texts to per-class probability distributions.
pub trait ClassifierBackend: Send + Sync {
    fn describe(&self) -> String;

    fn classes(&self) -> usize;

    fn predict_texts(&self, texts: &[String]) -> Result<Vec<Vec<f64>>>;
}

impl<F: Real> ClassifierBackend for ClassifierState<F> {
    fn describe(&self) -> String {
        format!("local linear head ({} classes, dim {})", self.head.classes, self.head.dim)
    }

    fn classes(&self) -> usize {
        self.head.classes
    }

    fn predict_texts(&self, texts: &[String]) -> Result<Vec<Vec<f64>>> {
        Ok(texts.iter().map(|t| self.predict_text(t).into_iter().map(Real::as_f64).collect()).collect())
    }
}

#[derive(Serialize)]
struct PredictBody<'a> {
    texts: &'a [String],
    mode: &'a str,
}

#[derive(Deserialize)]
struct PredictReply {
    probabilities: Vec<Vec<f64>>,
}

/// HTTP classifier: `POST {base}/predict {"texts": [...], "mode": "..."}` ->
/// `{"probabilities": [[...], ...]}`. Prediction only; it cannot be trained here.
pub struct RemoteClassifier {
    client: JsonClient,
    mode: String,
    classes: usize,
    batch_size: usize,
}

impl RemoteClassifier {
    pub fn new(base_url: &str, mode: &str, classes: usize, timeout: Duration) -> Result<Self> {
        if base_url.is_empty() || classes < 2 {
            return Err(Error::Config("remote classifier needs a URL and at least two classes".into()));
        }
        Ok(RemoteClassifier { client: JsonClient::new(base_url, timeout), mode: mode.into(), classes, batch_size: 64 })
    }

    pub fn from_env(mode: &str, classes: usize) -> Result<Self> {
        let url = std::env::var(MODEL_URL_VAR).map_err(|_| Error::Config(format!("{MODEL_URL_VAR} is not set")))?;
        Self::new(&url, mode, classes, Duration::from_secs(30))
    }
}

impl ClassifierBackend for RemoteClassifier {
    fn describe(&self) -> String {
        format!("remote classifier at {} (mode {})", self.client.base_url(), self.mode)
    }

    fn classes(&self) -> usize {
        self.classes
    }

    fn predict_texts(&self, texts: &[String]) -> Result<Vec<Vec<f64>>> {
        let mut out = Vec::with_capacity(texts.len());
        for chunk in texts.chunks(self.batch_size) {
            let reply: PredictReply = self.client.post("predict", &PredictBody { texts: chunk, mode: &self.mode })?;
            if reply.probabilities.len() != chunk.len() {
                return Err(Error::Transport {
                    message: format!("asked for {} predictions, got {}", chunk.len(), reply.probabilities.len()),
                    retryable: false,
                });
            }
            for probs in &reply.probabilities {
                check_distribution(probs, self.classes, 1e-6)
                    .map_err(|e| Error::Transport { message: e.to_string(), retryable: false })?;
            }
            out.extend(reply.probabilities);
        }
        Ok(out)
    }
}

/// A distribution over `classes` values: finite, in [0, 1], summing to 1 within `tolerance`.
pub fn check_distribution(probs: &[f64], classes: usize, tolerance: f64) -> Result<()> {
    if probs.len() != classes {
        return Err(Error::DimensionMismatch { left: probs.len(), right: classes });
    }
    if probs.iter().any(|p| !p.is_finite() || *p < 0.0 || *p > 1.0) {
        return Err(Error::Config(format!("invalid probabilities {probs:?}")));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > tolerance {
        return Err(Error::Config(format!("probabilities sum to {total}")));
    }
    Ok(())
}

/// Checks the backend contract on `texts`: valid distributions, and the same
/// answer when asked twice.
pub fn check_conformance(backend: &dyn ClassifierBackend, texts: &[String], tolerance: f64) -> Result<()> {
    let first = backend.predict_texts(texts)?;
    let second = backend.predict_texts(texts)?;
    if first.len() != texts.len() {
        return Err(Error::LengthMismatch { left: first.len(), right: texts.len() });
    }
    for probs in &first {
        check_distribution(probs, backend.classes(), tolerance)?;
    }
    if first != second {
        return Err(Error::Config(format!("{} is not deterministic", backend.describe())));
    }
    Ok(())
}
