//! Surrogate classifier: frozen TF-IDF features, a linear softmax head, and an
//! optional 50-parameter logit offset for prompt-style adaptation.

mod features;
mod remote;
mod train;

use std::fs;
use std::path::Path;

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

pub use features::{FeatureExtractor, SparseFeatures, StopwordChoice};
pub use remote::{check_distribution, check_conformance, ClassifierBackend, RemoteClassifier, MODEL_URL_VAR};
pub use train::{adapt, batch_stream, build_instances, loss_and_gradient, train_base, BatchStream, Gradient, Instance};

use crate::corpus::{model_text, Example, RuleId, TaskKind};
use crate::error::{Error, Result};
use crate::num::{softmax_into, Real};
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AdaptMode {
    Sft,
    Pt,
}

impl AdaptMode {
    pub fn as_str(self) -> &'static str {
        match self {
            AdaptMode::Sft => "sft",
            AdaptMode::Pt => "pt",
        }
    }
}

/// Class-by-feature weights and per-class bias.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearHead<F> {
    pub classes: usize,
    pub dim: usize,
    /// Row-major `classes * dim`.
    pub w: Vec<F>,
    pub b: Vec<F>,
}

impl<F: Real> LinearHead<F> {
    pub fn zeros(classes: usize, dim: usize) -> Self {
        LinearHead { classes, dim, w: vec![F::zero(); classes * dim], b: vec![F::zero(); classes] }
    }

    pub fn parameter_count(&self) -> usize {
        self.w.len() + self.b.len()
    }

    pub fn logits_into(&self, x: &[(u32, F)], out: &mut [F]) {
        for (c, o) in out.iter_mut().enumerate() {
            let row = &self.w[c * self.dim..(c + 1) * self.dim];
            *o = self.b[c] + x.iter().map(|&(j, v)| row[j as usize] * v).sum::<F>();
        }
    }

    /// Little-endian bytes of every weight then every bias.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 * self.parameter_count());
        for v in self.w.iter().chain(&self.b) {
            out.extend_from_slice(&v.as_f64().to_le_bytes());
        }
        out
    }

    fn check(&self) -> Result<()> {
        if self.w.len() != self.classes * self.dim || self.b.len() != self.classes {
            return Err(Error::DimensionMismatch { left: self.w.len(), right: self.classes * self.dim });
        }
        if self.w.iter().chain(&self.b).any(|v| !v.is_finite()) {
            return Err(Error::Config("head has non-finite parameters".into()));
        }
        Ok(())
    }
}

/// Tunable vector `p` mapped to a logit offset through a frozen seeded matrix `U`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PromptVector<F> {
    pub p: Vec<F>,
    /// Row-major `classes * p.len()`, entries drawn from N(0, 1/m).
    pub u: Vec<F>,
    pub seed: u64,
}

impl<F: Real> PromptVector<F> {
    pub const DEFAULT_LEN: usize = 50;

    pub fn new(classes: usize, len: usize, seed: u64) -> Result<Self> {
        if len == 0 {
            return Err(Error::Config("prompt length must be positive".into()));
        }
        let normal = Normal::new(0.0, (1.0 / len as f64).sqrt()).expect("positive standard deviation");
        let mut r = rng::seeded(seed);
        let u = (0..classes * len).map(|_| F::of(normal.sample(&mut r))).collect();
        Ok(PromptVector { p: vec![F::zero(); len], u, seed })
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn add_offset(&self, logits: &mut [F]) {
        let m = self.p.len();
        for (c, l) in logits.iter_mut().enumerate() {
            let row = &self.u[c * m..(c + 1) * m];
            *l = *l + row.iter().zip(&self.p).map(|(&u, &p)| u * p).sum::<F>();
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "stage")]
pub enum TrainingRecord {
    Base { steps: usize, lr: f64, seed: u64, examples: usize, dataset_digest: String, held_rule: RuleId },
    Adapt { mode: AdaptMode, steps: usize, lr: f64, seed: u64, examples: usize },
}

/// Everything needed to score text: features, head, optional prompt, and how it was trained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifierState<F> {
    pub task: TaskKind,
    pub extractor: FeatureExtractor,
    pub head: LinearHead<F>,
    pub prompt: Option<PromptVector<F>>,
    pub history: Vec<TrainingRecord>,
}

const STATE_FORMAT: u32 = 1;

#[derive(Serialize, Deserialize)]
struct StateFile<F> {
    format: u32,
    scalar: String,
    state: ClassifierState<F>,
}

impl<F: Real> ClassifierState<F> {
    pub fn classes(&self) -> usize {
        self.head.classes
    }

    pub fn features(&self, text: &str) -> SparseFeatures<F> {
        self.extractor.features(text)
    }

    pub fn logits(&self, x: &[(u32, F)]) -> Vec<F> {
        let mut out = vec![F::zero(); self.head.classes];
        self.head.logits_into(x, &mut out);
        if let Some(prompt) = &self.prompt {
            prompt.add_offset(&mut out);
        }
        out
    }

    pub fn probabilities_of(&self, x: &[(u32, F)]) -> Vec<F> {
        let logits = self.logits(x);
        let mut out = vec![F::zero(); logits.len()];
        softmax_into(&logits, &mut out);
        out
    }

    pub fn predict_text(&self, text: &str) -> Vec<F> {
        self.probabilities_of(&self.features(text))
    }

    /// Class distribution for an example; the binary task scores it against `rule`.
    pub fn predict(&self, example: &Example, rule: Option<&RuleId>) -> Vec<F> {
        self.predict_text(&model_text(example, self.task, rule))
    }

    /// Parameters an adaptation mode may change.
    pub fn trainable_parameters(&self, mode: AdaptMode) -> usize {
        match mode {
            AdaptMode::Sft => self.head.parameter_count(),
            AdaptMode::Pt => self.prompt.as_ref().map(|p| p.len()).unwrap_or(PromptVector::<F>::DEFAULT_LEN),
        }
    }

    /// Flattened trainable values for `mode` (head weights then biases, or `p`).
    pub fn parameters(&self, mode: AdaptMode) -> Vec<F> {
        match mode {
            AdaptMode::Sft => self.head.w.iter().chain(&self.head.b).copied().collect(),
            AdaptMode::Pt => self.prompt.as_ref().map(|p| p.p.clone()).unwrap_or_default(),
        }
    }

    pub fn set_parameters(&mut self, mode: AdaptMode, values: &[F]) -> Result<()> {
        match mode {
            AdaptMode::Sft => {
                if values.len() != self.head.parameter_count() {
                    return Err(Error::DimensionMismatch { left: values.len(), right: self.head.parameter_count() });
                }
                let (w, b) = values.split_at(self.head.w.len());
                self.head.w.copy_from_slice(w);
                self.head.b.copy_from_slice(b);
            }
            AdaptMode::Pt => {
                let prompt = self.prompt.as_mut().ok_or_else(|| Error::Config("state has no prompt vector".into()))?;
                if values.len() != prompt.p.len() {
                    return Err(Error::DimensionMismatch { left: values.len(), right: prompt.p.len() });
                }
                prompt.p.copy_from_slice(values);
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let file = StateFile { format: STATE_FORMAT, scalar: std::any::type_name::<F>().into(), state: self.clone() };
        Ok(serde_json::to_string(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: StateFile<F> = serde_json::from_str(text)?;
        if file.format != STATE_FORMAT {
            return Err(Error::UnknownFormat(format!("classifier state format {}", file.format)));
        }
        if file.scalar != std::any::type_name::<F>() {
            return Err(Error::UnknownFormat(format!("classifier state stores {} scalars", file.scalar)));
        }
        let mut state = file.state;
        state.extractor.rehydrate();
        state.head.check()?;
        if state.head.dim != state.extractor.dim() || state.head.classes != state.task.class_count() {
            return Err(Error::DimensionMismatch { left: state.head.dim, right: state.extractor.dim() });
        }
        Ok(state)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// Adaptation and base-training hyperparameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub lr_pt: f64,
    pub lr_sft: f64,
    /// Learning rate for base training.
    pub lr_base: f64,
    pub adapt_steps: usize,
    pub base_steps: usize,
    pub prompt_len: usize,
    /// Projection dimension for the feature extractor; `None` keeps the full vocabulary.
    pub feature_dim: Option<usize>,
    pub stopwords: StopwordChoice,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 16,
            lr_pt: 0.3,
            lr_sft: 0.005,
            lr_base: 1.0,
            adapt_steps: 200,
            base_steps: 10_000,
            prompt_len: PromptVector::<f64>::DEFAULT_LEN,
            feature_dim: Some(4096),
            stopwords: StopwordChoice::English,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let rates = [self.lr_pt, self.lr_sft, self.lr_base];
        if self.batch_size == 0 || self.prompt_len == 0 || rates.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::Config("batch size, prompt length and learning rates must be positive".into()));
        }
        if self.feature_dim == Some(0) {
            return Err(Error::Config("feature dimension must be positive".into()));
        }
        Ok(())
    }
}

/// Number of scalar parameters (head weights and biases, prompt vector and
/// its projection) that differ bitwise between two states. A prompt absent
/// from `before` counts as a zero vector with the projection of `after`.
pub fn changed_parameters<F: Real>(before: &ClassifierState<F>, after: &ClassifierState<F>) -> usize {
    fn diff<F: Real>(a: &[F], b: &[F]) -> usize {
        a.iter().zip(b).filter(|(x, y)| x.as_f64().to_bits() != y.as_f64().to_bits()).count() + a.len().abs_diff(b.len())
    }
    let head = diff(&before.head.w, &after.head.w) + diff(&before.head.b, &after.head.b);
    let prompt = match (&before.prompt, &after.prompt) {
        (Some(a), Some(b)) => diff(&a.p, &b.p) + diff(&a.u, &b.u),
        (None, Some(b)) => diff(&vec![F::zero(); b.p.len()], &b.p),
        (Some(a), None) => a.p.len() + a.u.len(),
        (None, None) => 0,
    };
    head + prompt
}

/// Checks what an adaptation in `mode` may change. PT must leave the
/// extractor and head byte-identical and change exactly the prompt vector's
/// entries; SFT must change the head and leave the prompt alone.
pub fn check_freeze_contract<F: Real>(
    before: &ClassifierState<F>,
    after: &ClassifierState<F>,
    mode: AdaptMode,
) -> Result<()> {
    if before.extractor != after.extractor {
        return Err(Error::FreezeContract("feature extractor changed".into()));
    }
    let head_same = before.head.to_bytes() == after.head.to_bytes();
    match mode {
        AdaptMode::Pt => {
            if !head_same {
                return Err(Error::FreezeContract("prompt tuning changed the head".into()));
            }
            let len = after.prompt.as_ref().map(|p| p.len()).ok_or_else(|| {
                Error::FreezeContract("prompt tuning left no prompt vector".into())
            })?;
            let changed = changed_parameters(before, after);
            if changed != len {
                return Err(Error::FreezeContract(format!("{changed} parameters changed, expected {len}")));
            }
        }
        AdaptMode::Sft => {
            if head_same {
                return Err(Error::FreezeContract("fine-tuning left the head unchanged".into()));
            }
            if before.prompt != after.prompt {
                return Err(Error::FreezeContract("fine-tuning changed the prompt vector".into()));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_state() -> ClassifierState<f64> {
        let mut extractor =
            FeatureExtractor::fit(["good kind help", "bad cruel harm"], StopwordChoice::English, None).unwrap();
        extractor.freeze();
        let dim = extractor.dim();
        ClassifierState {
            task: TaskKind::BinaryPerRule,
            extractor,
            head: LinearHead::zeros(2, dim),
            prompt: None,
            history: Vec::new(),
        }
    }

    #[test]
    fn zero_head_is_uniform() {
        let s = tiny_state();
        let p = s.predict_text("kind help");
        assert_eq!(p, vec![0.5, 0.5]);
    }

    #[test]
    fn prompt_matrix_is_seeded_with_expected_scale() {
        let a = PromptVector::<f64>::new(5, 50, 7).unwrap();
        assert_eq!(a, PromptVector::new(5, 50, 7).unwrap());
        assert_ne!(a.u, PromptVector::<f64>::new(5, 50, 8).unwrap().u);
        assert!(a.p.iter().all(|&v| v == 0.0));
        let var = a.u.iter().map(|v| v * v).sum::<f64>() / a.u.len() as f64;
        assert!((var - 0.02).abs() < 0.01, "{var}");
        assert!(PromptVector::<f64>::new(2, 0, 1).is_err());
    }

    #[test]
    fn json_round_trip_is_exact() {
        let mut s = tiny_state();
        s.head.w[1] = 0.1 + 0.2;
        s.head.b[0] = -1.0 / 3.0;
        s.prompt = Some(PromptVector::new(2, 4, 3).unwrap());
        let back = ClassifierState::<f64>::from_json(&s.to_json().unwrap()).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.head.to_bytes(), s.head.to_bytes());
        assert!(ClassifierState::<f32>::from_json(&s.to_json().unwrap()).is_err());
    }

    #[test]
    fn parameter_views_round_trip() {
        let mut s = tiny_state();
        assert_eq!(s.trainable_parameters(AdaptMode::Sft), 2 * s.head.dim + 2);
        assert_eq!(s.trainable_parameters(AdaptMode::Pt), 50);
        let values: Vec<f64> = (0..s.head.parameter_count()).map(|i| i as f64).collect();
        s.set_parameters(AdaptMode::Sft, &values).unwrap();
        assert_eq!(s.parameters(AdaptMode::Sft), values);
        assert!(s.set_parameters(AdaptMode::Pt, &[1.0]).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig::default().validate().is_ok());
        assert!(TrainConfig { batch_size: 0, ..Default::default() }.validate().is_err());
        assert!(TrainConfig { lr_pt: -1.0, ..Default::default() }.validate().is_err());
        assert!(TrainConfig { feature_dim: Some(0), ..Default::default() }.validate().is_err());
    }
}
