use rand::seq::SliceRandom;

use super::{check_freeze_contract, AdaptMode, ClassifierState, FeatureExtractor, LinearHead, PromptVector, SparseFeatures, TrainConfig, TrainingRecord};
use crate::corpus::{model_text, Example, HoldoutSplit, RuleId, TaskKind};
use crate::error::{Error, Result};
use crate::num::{softmax_into, Real};
use crate::rng::{self, SeededRng};
use crate::textsim::SignProjection;

/// One featurized training row.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance<F> {
    pub features: SparseFeatures<F>,
    pub class: usize,
}

/// Featurizes examples. The binary task yields one instance per (example, rule);
/// the Likert task ignores `rules`.
pub fn build_instances<F: Real>(
    extractor: &FeatureExtractor,
    task: TaskKind,
    examples: &[Example],
    rules: &[RuleId],
) -> Result<Vec<Instance<F>>> {
    let mut out = Vec::new();
    for e in examples {
        match task {
            TaskKind::Likert5 => out.push(Instance {
                features: extractor.features(&model_text(e, task, None)),
                class: e.class_index(task, None)?,
            }),
            TaskKind::BinaryPerRule => {
                for rule in rules {
                    out.push(Instance {
                        features: extractor.features(&model_text(e, task, Some(rule))),
                        class: e.class_index(task, Some(rule))?,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Endless index stream made of concatenated shuffled epochs, so sets smaller
/// than a batch are upsampled with every example present once per epoch.
pub struct BatchStream {
    order: Vec<usize>,
    pos: usize,
    rng: SeededRng,
}

pub fn batch_stream(n: usize, seed: u64) -> BatchStream {
    BatchStream { order: (0..n).collect(), pos: n, rng: rng::seeded(seed) }
}

impl BatchStream {
    pub fn next_batch(&mut self, size: usize) -> Vec<usize> {
        let mut batch = Vec::with_capacity(size);
        if self.order.is_empty() {
            return batch;
        }
        while batch.len() < size {
            if self.pos == self.order.len() {
                self.order.shuffle(&mut self.rng);
                self.pos = 0;
            }
            batch.push(self.order[self.pos]);
            self.pos += 1;
        }
        batch
    }
}

/// `softmax(logits) - onehot(class)`, the logit gradient of cross-entropy.
fn residual<F: Real>(state: &ClassifierState<F>, inst: &Instance<F>, buf: &mut Vec<F>) -> F {
    let logits = state.logits(&inst.features);
    buf.resize(logits.len(), F::zero());
    softmax_into(&logits, buf);
    let loss = -buf[inst.class].max(F::min_positive_value()).ln();
    buf[inst.class] = buf[inst.class] - F::one();
    loss
}

/// Gradient of the mean loss, flattened like [`ClassifierState::parameters`].
#[derive(Clone, Debug, PartialEq)]
pub struct Gradient<F> {
    pub values: Vec<F>,
}

/// Mean cross-entropy over `instances` and its gradient with respect to the
/// parameters `mode` trains.
pub fn loss_and_gradient<F: Real>(
    state: &ClassifierState<F>,
    instances: &[Instance<F>],
    mode: AdaptMode,
) -> Result<(F, Gradient<F>)> {
    if instances.is_empty() {
        return Err(Error::Empty("training instances".into()));
    }
    let n = F::of_usize(instances.len());
    let head = &state.head;
    let mut values = match mode {
        AdaptMode::Sft => vec![F::zero(); head.parameter_count()],
        AdaptMode::Pt => {
            let prompt = state.prompt.as_ref().ok_or_else(|| Error::Config("state has no prompt vector".into()))?;
            vec![F::zero(); prompt.len()]
        }
    };
    let mut loss = F::zero();
    let mut g = Vec::new();
    for inst in instances {
        loss = loss + residual(state, inst, &mut g);
        match mode {
            AdaptMode::Sft => {
                for (c, &gc) in g.iter().enumerate() {
                    for &(j, v) in &inst.features {
                        let slot = &mut values[c * head.dim + j as usize];
                        *slot = *slot + gc * v / n;
                    }
                    let slot = &mut values[head.w.len() + c];
                    *slot = *slot + gc / n;
                }
            }
            AdaptMode::Pt => {
                let prompt = state.prompt.as_ref().expect("checked above");
                let m = prompt.len();
                for (c, &gc) in g.iter().enumerate() {
                    for (k, slot) in values.iter_mut().enumerate() {
                        *slot = *slot + gc * prompt.u[c * m + k] / n;
                    }
                }
            }
        }
    }
    Ok((loss / n, Gradient { values }))
}

/// One plain SGD step on the mean loss of `batch`.
fn sgd_step<F: Real>(state: &mut ClassifierState<F>, instances: &[Instance<F>], batch: &[usize], mode: AdaptMode, lr: F) {
    let scale = lr / F::of_usize(batch.len());
    let mut buf = Vec::new();
    let residuals: Vec<Vec<F>> = batch
        .iter()
        .map(|&i| {
            residual(state, &instances[i], &mut buf);
            buf.clone()
        })
        .collect();
    match mode {
        AdaptMode::Sft => {
            let head = &mut state.head;
            for (&i, g) in batch.iter().zip(&residuals) {
                for (c, &gc) in g.iter().enumerate() {
                    let step = scale * gc;
                    head.b[c] = head.b[c] - step;
                    for &(j, v) in &instances[i].features {
                        let slot = &mut head.w[c * head.dim + j as usize];
                        *slot = *slot - step * v;
                    }
                }
            }
        }
        AdaptMode::Pt => {
            let prompt = state.prompt.as_mut().expect("prompt attached before training");
            let m = prompt.len();
            let mut grad = vec![F::zero(); m];
            for g in &residuals {
                for (c, &gc) in g.iter().enumerate() {
                    for (k, slot) in grad.iter_mut().enumerate() {
                        *slot = *slot + gc * prompt.u[c * m + k];
                    }
                }
            }
            for (p, d) in prompt.p.iter_mut().zip(grad) {
                *p = *p - scale * d;
            }
        }
    }
}

fn run_sgd<F: Real>(
    state: &mut ClassifierState<F>,
    instances: &[Instance<F>],
    mode: AdaptMode,
    steps: usize,
    lr: f64,
    batch_size: usize,
    seed: u64,
) {
    let mut stream = batch_stream(instances.len(), seed);
    let lr = F::of(lr);
    for _ in 0..steps {
        let batch = stream.next_batch(batch_size);
        sgd_step(state, instances, &batch, mode, lr);
    }
}

/// Fits the extractor on the base training texts, freezes it, and trains a
/// zero-initialized head by mini-batch SGD on cross-entropy.
pub fn train_base<F: Real>(split: &HoldoutSplit, config: &TrainConfig) -> Result<ClassifierState<F>> {
    config.validate()?;
    if split.base_train.is_empty() {
        return Err(Error::Empty("base training set".into()));
    }
    let task = split.task_kind;
    let rules: Vec<RuleId> = split.existing_rules().cloned().collect();
    let texts: Vec<String> = match task {
        TaskKind::Likert5 => split.base_train.iter().map(|e| model_text(e, task, None)).collect(),
        TaskKind::BinaryPerRule => split
            .base_train
            .iter()
            .flat_map(|e| rules.iter().map(move |r| model_text(e, task, Some(r))))
            .collect(),
    };
    let projection = match config.feature_dim {
        Some(dim) => Some(SignProjection::new(dim, rng::derive_seed(config.seed, &["feature-projection"]))?),
        None => None,
    };
    let mut extractor = FeatureExtractor::fit(texts.iter().map(String::as_str), config.stopwords, projection)?;
    extractor.freeze();
    let instances = build_instances::<F>(&extractor, task, &split.base_train, &rules)?;
    let dim = extractor.dim();
    let mut state = ClassifierState {
        task,
        extractor,
        head: LinearHead::zeros(task.class_count(), dim),
        prompt: None,
        history: Vec::new(),
    };
    let seed = rng::derive_seed(config.seed, &["base-batches", split.held_rule.as_str()]);
    run_sgd(&mut state, &instances, AdaptMode::Sft, config.base_steps, config.lr_base, config.batch_size, seed);
    state.history.push(TrainingRecord::Base {
        steps: config.base_steps,
        lr: config.lr_base,
        seed: config.seed,
        examples: instances.len(),
        dataset_digest: split.dataset_digest.clone(),
        held_rule: split.held_rule.clone(),
    });
    Ok(state)
}

/// Adapts a trained state to `examples` labeled for `rule`.
///
/// SFT updates the head. PT leaves the head and extractor untouched and
/// trains only the prompt vector, attaching a fresh zero one if absent. Zero
/// steps return the state unchanged; otherwise the result is checked with
/// [`check_freeze_contract`](super::check_freeze_contract).
pub fn adapt<F: Real>(
    state: &ClassifierState<F>,
    examples: &[Example],
    rule: Option<&RuleId>,
    mode: AdaptMode,
    config: &TrainConfig,
) -> Result<ClassifierState<F>> {
    config.validate()?;
    if !state.extractor.is_frozen() {
        return Err(Error::UnfrozenExtractor);
    }
    if examples.is_empty() {
        return Err(Error::Empty("adaptation set".into()));
    }
    if config.adapt_steps == 0 {
        return Ok(state.clone());
    }
    let rules: Vec<RuleId> = match (state.task, rule) {
        (TaskKind::BinaryPerRule, Some(r)) => vec![r.clone()],
        (TaskKind::BinaryPerRule, None) => {
            return Err(Error::Config("binary adaptation needs the held rule".into()));
        }
        (TaskKind::Likert5, _) => Vec::new(),
    };
    let instances = build_instances::<F>(&state.extractor, state.task, examples, &rules)?;
    let mut next = state.clone();
    let lr = match mode {
        AdaptMode::Sft => config.lr_sft,
        AdaptMode::Pt => {
            if next.prompt.is_none() {
                let seed = rng::derive_seed(config.seed, &["prompt-projection"]);
                next.prompt = Some(PromptVector::new(next.classes(), config.prompt_len, seed)?);
            }
            config.lr_pt
        }
    };
    let seed = rng::derive_seed(config.seed, &["adapt-batches", mode.as_str()]);
    run_sgd(&mut next, &instances, mode, config.adapt_steps, lr, config.batch_size, seed);
    check_freeze_contract(state, &next, mode)?;
    next.history.push(TrainingRecord::Adapt {
        mode,
        steps: config.adapt_steps,
        lr,
        seed: config.seed,
        examples: instances.len(),
    });
    Ok(next)
}
