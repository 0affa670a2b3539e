//! Experiment orchestration: splits, base models, shots, augmentation,
//! adaptation and sliced evaluation, summarized over seeded trials.

mod report;
pub mod synthetic;

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::{Arc, Mutex};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use report::{emit_report, emit_sweep, EvalReport, ReportCell, ReportFormat, ReportMetadata, ReportRow, SweepReport, TrialFailure};
pub use synthetic::SyntheticConfig;

use crate::augment::{audit_plan, audit_shots, AugmentConfig, AugmentMethod, Augmenter};
use crate::corpus::{
    ingest_jsonl, ingest_social_chemistry, ingest_toxicity, make_holdout_split, model_text, Dataset, HoldoutSplit,
    RuleId, SourceSchema, TaskKind,
};
use crate::error::{Error, Result};
use crate::metrics::{macro_f1, roc_auc, summarize_trials, MetricKind, TrialSummary};
use crate::model::{adapt, train_base, AdaptMode, ClassifierBackend, ClassifierState, RemoteClassifier, TrainConfig};
use crate::rng;
use crate::shots::{select_shots, ShotConfig, ShotSet, ShotStrategy};
use crate::textsim::{
    EmbeddingProvider, InternalTfidfProvider, PrecomputedFileProvider, ProviderKind, RemoteConfig,
    RemoteServiceProvider, SignProjection, Stopwords, EMBED_URL_VAR,
};

/// Environment variable naming the on-disk base model cache directory.
pub const CACHE_DIR_VAR: &str = "RULESHIFT_CACHE_DIR";

/// Report metrics are stored as percentages.
pub const METRIC_SCALE: f64 = 100.0;

/// An adaptation mode (or none, for the unadapted base model) combined with
/// an optional augmenter. Written `base`, `pt`, `sft+cosine`, `pt+random`, ...
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Method {
    pub mode: Option<AdaptMode>,
    pub augment: Option<AugmentMethod>,
}

impl Method {
    pub const BASE: Method = Method { mode: None, augment: None };
    pub const DAPT: Method = Method { mode: Some(AdaptMode::Pt), augment: Some(AugmentMethod::Cosine) };

    /// The default comparison: base, prompt tuning with cosine, random or no
    /// augmentation, and head fine-tuning with cosine augmentation.
    pub const COMPARISON: [Method; 5] = [
        Method::BASE,
        Method::DAPT,
        Method { mode: Some(AdaptMode::Pt), augment: Some(AugmentMethod::Random) },
        Method { mode: Some(AdaptMode::Pt), augment: None },
        Method { mode: Some(AdaptMode::Sft), augment: Some(AugmentMethod::Cosine) },
    ];

    pub fn new(mode: AdaptMode, augment: Option<AugmentMethod>) -> Self {
        Method { mode: Some(mode), augment }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.mode, self.augment) {
            (None, _) => f.write_str("base"),
            (Some(m), None) => f.write_str(m.as_str()),
            (Some(m), Some(a)) => write!(f, "{}+{}", m.as_str(), a),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        if s == "base" {
            return Ok(Method::BASE);
        }
        let (mode, augment) = match s.split_once('+') {
            Some((m, a)) => (m, Some(a.parse::<AugmentMethod>()?)),
            None => (s.as_str(), None),
        };
        let mode = match mode {
            "sft" => AdaptMode::Sft,
            "pt" => AdaptMode::Pt,
            other => return Err(Error::Config(format!("unknown adaptation mode {other:?}"))),
        };
        Ok(Method::new(mode, augment))
    }
}

impl TryFrom<String> for Method {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Method> for String {
    fn from(m: Method) -> String {
        m.to_string()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DatasetSource {
    File {
        path: PathBuf,
        schema: SourceSchema,
        /// Per-rule cap applied at ingestion (Social Chemistry only).
        #[serde(default)]
        per_rule_cap: Option<usize>,
    },
    Synthetic(SyntheticConfig),
}

impl DatasetSource {
    pub fn load(&self, seed: u64) -> Result<Dataset> {
        match self {
            DatasetSource::Synthetic(cfg) => synthetic::generate(cfg),
            DatasetSource::File { path, schema, per_rule_cap } => match schema {
                SourceSchema::SocialChemistry => ingest_social_chemistry(path, per_rule_cap.unwrap_or(usize::MAX), seed),
                SourceSchema::JigsawToxicity => ingest_toxicity(path),
                SourceSchema::GenericJsonl => ingest_jsonl(path),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProviderSpec {
    pub kind: ProviderKind,
    /// Projection dimension for the internal provider.
    pub dim: usize,
    pub path: Option<PathBuf>,
    /// Remote service URL; falls back to the environment.
    pub url: Option<String>,
}

impl Default for ProviderSpec {
    fn default() -> Self {
        ProviderSpec { kind: ProviderKind::InternalTfidf, dim: InternalTfidfProvider::DEFAULT_DIM, path: None, url: None }
    }
}

impl ProviderSpec {
    /// Builds the embedding provider for a split. The internal provider is fit
    /// on the split's base training texts.
    pub fn build(&self, split: &HoldoutSplit, seed: u64) -> Result<Arc<dyn EmbeddingProvider>> {
        Ok(match self.kind {
            ProviderKind::InternalTfidf => {
                let projection = SignProjection::new(self.dim, rng::derive_seed(seed, &["embedding-projection"]))?;
                let texts: Vec<String> = split.base_train.iter().map(|e| e.full_text()).collect();
                Arc::new(InternalTfidfProvider::fit(texts.iter().map(String::as_str), Stopwords::english(), Some(projection)))
            }
            ProviderKind::PrecomputedFile => {
                let path = self.path.as_ref().ok_or_else(|| Error::Config("file provider needs a path".into()))?;
                Arc::new(PrecomputedFileProvider::load(path)?)
            }
            ProviderKind::RemoteService => {
                let config = match &self.url {
                    Some(url) => RemoteConfig { base_url: url.clone(), ..RemoteConfig::default() },
                    None => RemoteConfig::from_env(EMBED_URL_VAR)?,
                };
                Arc::new(RemoteServiceProvider::new(config)?)
            }
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackendKind {
    #[default]
    Local,
    /// Prediction-only HTTP classifier; usable for the `base` method only.
    Remote,
}

/// A full experiment grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    pub dataset: DatasetSource,
    /// Rules to hold out in turn; empty means every rule.
    pub held_rules: Vec<String>,
    pub methods: Vec<Method>,
    pub shot_strategy: ShotStrategy,
    pub shots: usize,
    pub da_size: usize,
    /// ReCross stage-one pool; defaults to a multiple of `da_size`.
    pub recross_pool: Option<usize>,
    pub trials: usize,
    pub seed: u64,
    pub base_cap: usize,
    pub train: TrainConfig,
    pub augment: AugmentConfig,
    pub shot_selection: ShotConfig,
    pub provider: ProviderSpec,
    pub backend: BackendKind,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            name: "experiment".into(),
            dataset: DatasetSource::Synthetic(SyntheticConfig::default()),
            held_rules: Vec::new(),
            methods: Method::COMPARISON.to_vec(),
            shot_strategy: ShotStrategy::Random,
            shots: 5,
            da_size: 100,
            recross_pool: None,
            trials: 5,
            seed: 0,
            base_cap: 10_000,
            train: TrainConfig::default(),
            augment: AugmentConfig::default(),
            shot_selection: ShotConfig::default(),
            provider: ProviderSpec::default(),
            backend: BackendKind::Local,
        }
    }
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: ExperimentSpec = toml::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| e.context(format!("experiment spec {}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        self.train.validate()?;
        if self.trials == 0 || self.shots == 0 {
            return Err(Error::Config("trials and shots must be at least 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("no methods requested".into()));
        }
        if self.backend == BackendKind::Remote && self.methods.iter().any(|m| *m != Method::BASE) {
            return Err(Error::Config("the remote classifier cannot be adapted; only `base` may run on it".into()));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON encoding.
    pub fn digest(&self) -> Result<String> {
        let value = serde_json::to_value(self)?;
        Ok(rng::digest_hex(serde_json::to_string(&value)?.as_bytes()))
    }

    /// Seed of trial `t`; everything random inside a trial derives from it.
    pub fn trial_seed(&self, trial: usize) -> u64 {
        rng::derive_seed(self.seed, &["trial", &trial.to_string()])
    }

    /// Training config of the base models, seeded by the experiment seed.
    pub fn base_config(&self) -> TrainConfig {
        TrainConfig { seed: self.seed, ..self.train.clone() }
    }
}

/// Base models keyed by (dataset digest, held rule, base config digest), held
/// in memory and optionally mirrored to a directory.
pub struct BaseCache {
    dir: Option<PathBuf>,
    memory: Mutex<HashMap<String, Arc<ClassifierState<f64>>>>,
}

impl BaseCache {
    pub fn new(dir: Option<PathBuf>) -> Self {
        BaseCache { dir, memory: Mutex::new(HashMap::new()) }
    }

    /// Uses `RULESHIFT_CACHE_DIR` when set.
    pub fn from_env() -> Self {
        Self::new(std::env::var_os(CACHE_DIR_VAR).map(PathBuf::from))
    }

    pub fn key(split: &HoldoutSplit, config: &TrainConfig) -> Result<String> {
        let config_digest = rng::digest_hex(
            serde_json::to_string(&(config, split.base_cap, split.seed, split.base_train.len()))?.as_bytes(),
        );
        Ok(rng::digest_hex(
            format!("{}\n{}\n{}", split.dataset_digest, split.held_rule, config_digest).as_bytes(),
        ))
    }

    pub fn get_or_train(&self, split: &HoldoutSplit, config: &TrainConfig) -> Result<Arc<ClassifierState<f64>>> {
        let key = Self::key(split, config)?;
        if let Some(hit) = self.memory.lock().expect("cache lock").get(&key) {
            return Ok(hit.clone());
        }
        let path = self.dir.as_ref().map(|d| d.join(format!("base-{key}.json")));
        let state = match path.as_ref().filter(|p| p.exists()) {
            Some(p) => {
                log::info!("loading cached base model {}", p.display());
                ClassifierState::load(p)?
            }
            None => {
                log::info!("training base model for held rule {}", split.held_rule);
                let state = train_base(split, config)?;
                if let (Some(dir), Some(p)) = (&self.dir, &path) {
                    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
                    let tmp = p.with_extension("json.tmp");
                    state.save(&tmp)?;
                    fs::rename(&tmp, p).map_err(|e| Error::io(p, e))?;
                }
                state
            }
        };
        let state = Arc::new(state);
        self.memory.lock().expect("cache lock").insert(key, state.clone());
        Ok(state)
    }
}

/// Sliced metric of `backend` on the held rule's test slice: macro-F1 for the
/// Likert task, ROC AUC of the positive class for the binary task.
pub fn evaluate(backend: &dyn ClassifierBackend, split: &HoldoutSplit) -> Result<f64> {
    let slice = split.held_test_slice();
    if slice.is_empty() {
        return Err(Error::Empty(format!("test slice of {}", split.held_rule)));
    }
    let task = split.task_kind;
    let rule = Some(&split.held_rule);
    let texts: Vec<String> = slice.iter().map(|e| model_text(e, task, rule)).collect();
    let probs: Vec<Vec<f64>> = texts
        .par_chunks(256)
        .map(|chunk| backend.predict_texts(chunk))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    match task {
        TaskKind::Likert5 => {
            let preds: Vec<usize> = probs.iter().map(|p| argmax(p)).collect();
            let golds: Vec<usize> = slice.iter().map(|e| e.class_index(task, None)).collect::<Result<_>>()?;
            macro_f1(&preds, &golds, task.class_count())
        }
        TaskKind::BinaryPerRule => {
            let scores: Vec<f64> = probs.iter().map(|p| p[1]).collect();
            let labels: Vec<bool> = slice.iter().map(|e| e.binary(&split.held_rule).unwrap_or(false)).collect();
            roc_auc(&scores, &labels)
        }
    }
}

fn argmax(p: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in p.iter().enumerate() {
        if v > p[best] {
            best = i;
        }
    }
    best
}

/// Per-rule state shared by every trial and method.
struct RuleContext {
    split: HoldoutSplit,
    /// Absent when the remote backend stands in for the base model.
    base: Option<Arc<ClassifierState<f64>>>,
    provider: Arc<dyn EmbeddingProvider>,
    augmenters: HashMap<AugmentMethod, Augmenter>,
}

fn prepare_rule(
    spec: &ExperimentSpec,
    dataset: &Dataset,
    rule: &RuleId,
    cache: &BaseCache,
) -> Result<RuleContext> {
    let split = make_holdout_split(dataset, rule, spec.base_cap, spec.seed)?;
    let base = match spec.backend {
        BackendKind::Local => Some(cache.get_or_train(&split, &spec.base_config())?),
        BackendKind::Remote => None,
    };
    let needs_provider = spec.methods.iter().any(|m| m.augment == Some(AugmentMethod::Recross))
        || !matches!(spec.shot_strategy, ShotStrategy::Random);
    let provider: Arc<dyn EmbeddingProvider> = if needs_provider {
        spec.provider.build(&split, spec.seed)?
    } else {
        Arc::new(InternalTfidfProvider::fit(std::iter::empty(), Stopwords::english(), None))
    };
    let mut augmenters = HashMap::new();
    for m in spec.methods.iter().filter_map(|m| m.augment) {
        if !augmenters.contains_key(&m) {
            augmenters.insert(m, Augmenter::new(&split, m, spec.augment, Some(provider.clone()))?);
        }
    }
    Ok(RuleContext { split, base, provider, augmenters })
}

/// Shots for one (rule, trial); shared by every method in that trial.
pub fn trial_shots(
    spec: &ExperimentSpec,
    split: &HoldoutSplit,
    provider: &dyn EmbeddingProvider,
    trial: usize,
) -> Result<ShotSet> {
    let seed = rng::derive_seed(spec.trial_seed(trial), &["shots", split.held_rule.as_str()]);
    let shots = select_shots(split, spec.shot_strategy, spec.shots, seed, provider, &spec.shot_selection)?;
    audit_shots(&shots, split)?;
    Ok(shots)
}

fn evaluate_base(ctx: &RuleContext) -> Result<f64> {
    match &ctx.base {
        Some(base) => evaluate(base.as_ref(), &ctx.split),
        None => {
            let backend = RemoteClassifier::from_env("base", ctx.split.task_kind.class_count())?;
            evaluate(&backend, &ctx.split)
        }
    }
}

fn run_trial(spec: &ExperimentSpec, ctx: &RuleContext, shots: &ShotSet, method: Method, trial: usize) -> Result<f64> {
    let Some(mode) = method.mode else {
        return evaluate_base(ctx);
    };
    let base = ctx.base.as_ref().ok_or_else(|| Error::Config("adaptation needs the local backend".into()))?;
    let trial_seed = spec.trial_seed(trial);
    let rule = ctx.split.held_rule.as_str();
    let mut examples = shots.shots.clone();
    if let Some(kind) = method.augment {
        if spec.da_size > 0 {
            let seed = rng::derive_seed(trial_seed, &["augment", rule, kind.as_str()]);
            let plan = ctx.augmenters[&kind].plan(shots, spec.da_size, spec.recross_pool, seed)?;
            audit_plan(&plan, &ctx.split)?;
            examples.extend(plan.examples(&ctx.split)?);
        }
    }
    let config = TrainConfig { seed: rng::derive_seed(trial_seed, &["adapt", rule, mode.as_str()]), ..spec.train.clone() };
    let adapted = adapt(base.as_ref(), &examples, Some(&ctx.split.held_rule), mode, &config)?;
    evaluate(&adapted, &ctx.split)
}

fn held_rules(spec: &ExperimentSpec, dataset: &Dataset) -> Result<Vec<RuleId>> {
    if spec.held_rules.is_empty() {
        return Ok(dataset.rules().to_vec());
    }
    spec.held_rules.iter().map(|r| dataset.rule(r).cloned()).collect()
}

/// Runs every (held rule, trial, method) cell of the grid.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<EvalReport> {
    run_with_cache(spec, &BaseCache::from_env())
}

/// [`run_experiment`] with an explicit base-model cache, so several runs can
/// share trained base models.
pub fn run_with_cache(spec: &ExperimentSpec, cache: &BaseCache) -> Result<EvalReport> {
    spec.validate()?;
    let dataset = spec.dataset.load(spec.seed)?;
    let rules = held_rules(spec, &dataset)?;
    let task = dataset.task_kind();
    let mut warnings = Vec::new();
    let mut failures = Vec::new();
    // values[method][rule][trial]
    let mut values: Vec<Vec<Vec<Option<f64>>>> = vec![vec![vec![None; spec.trials]; rules.len()]; spec.methods.len()];

    for (ri, rule) in rules.iter().enumerate() {
        let ctx = prepare_rule(spec, &dataset, rule, cache)?;
        if spec.da_size > ctx.split.base_train.len() && spec.methods.iter().any(|m| m.augment.is_some()) {
            warnings.push(format!(
                "da_size {} exceeds the {} base examples for {rule}",
                spec.da_size,
                ctx.split.base_train.len()
            ));
        }
        let shot_sets: Vec<Result<ShotSet>> = (0..spec.trials)
            .into_par_iter()
            .map(|t| trial_shots(spec, &ctx.split, ctx.provider.as_ref(), t))
            .collect();
        // The base model is deterministic, so it is scored once rather than per trial.
        let jobs: Vec<(usize, usize)> = spec
            .methods
            .iter()
            .enumerate()
            .flat_map(|(mi, m)| (0..if *m == Method::BASE { 1 } else { spec.trials }).map(move |t| (mi, t)))
            .collect();
        let results: Vec<(usize, usize, Result<f64>)> = jobs
            .into_par_iter()
            .map(|(mi, t)| {
                let method = spec.methods[mi];
                let outcome = match (method == Method::BASE, &shot_sets[t]) {
                    (true, _) => evaluate_base(&ctx),
                    (false, Ok(shots)) => run_trial(spec, &ctx, shots, method, t),
                    (false, Err(e)) => Err(Error::Config(format!("shot selection failed: {e}"))),
                };
                (mi, t, outcome)
            })
            .collect();
        for (mi, t, outcome) in results {
            let method = spec.methods[mi];
            match outcome {
                Ok(v) => values[mi][ri][t] = Some(v * METRIC_SCALE),
                Err(e) => {
                    log::warn!("{method} on {rule}, trial {t}: {e}");
                    failures.push(TrialFailure {
                        method: method.to_string(),
                        rule: rule.to_string(),
                        trial: t,
                        error: e.to_string(),
                    });
                }
            }
        }
    }

    let mut rows = Vec::new();
    for (mi, method) in spec.methods.iter().enumerate() {
        let mut cells = Vec::new();
        for (ri, rule) in rules.iter().enumerate() {
            let ok: Vec<f64> = values[mi][ri].iter().flatten().copied().collect();
            if let Ok(summary) = summarize_trials(&ok) {
                cells.push(ReportCell { rule: rule.to_string(), summary });
            }
        }
        let per_trial: Vec<f64> = (0..spec.trials)
            .filter_map(|t| {
                let vals: Option<Vec<f64>> = (0..rules.len()).map(|ri| values[mi][ri][t]).collect();
                vals.map(|v| v.iter().sum::<f64>() / v.len() as f64)
            })
            .collect();
        let overall = summarize_trials(&per_trial).ok();
        rows.push(ReportRow { method: method.to_string(), cells, overall });
    }

    Ok(EvalReport {
        metadata: ReportMetadata {
            name: spec.name.clone(),
            config_digest: spec.digest()?,
            dataset_digest: dataset.digest().to_string(),
            task,
            metric: MetricKind::for_task(task),
            scale: METRIC_SCALE,
            seed: spec.seed,
            trial_seeds: (0..spec.trials).map(|t| spec.trial_seed(t)).collect(),
            shot_strategy: spec.shot_strategy,
            da_size: spec.da_size,
            created_unix: SystemTime::now().duration_since(UNIX_EPOCH).unwrap_or(Duration::ZERO).as_secs(),
            warnings,
        },
        rules: rules.iter().map(|r| r.to_string()).collect(),
        rows,
        failures,
    })
}

/// Re-runs a single report cell from the `ExperimentSpec` that produced the report.
pub fn reproduce_cell(spec: &ExperimentSpec, report: &EvalReport, method: &str, rule: &str) -> Result<TrialSummary<f64>> {
    if spec.digest()? != report.metadata.config_digest {
        return Err(Error::Config("spec does not match the report's config digest".into()));
    }
    let method: Method = method.parse()?;
    let narrowed = ExperimentSpec { held_rules: vec![rule.to_string()], methods: vec![method], ..spec.clone() };
    let rerun = run_with_cache(&narrowed, &BaseCache::new(None))?;
    if rerun.metadata.dataset_digest != report.metadata.dataset_digest {
        return Err(Error::Config("dataset changed since the report was produced".into()));
    }
    rerun
        .rows
        .into_iter()
        .next()
        .and_then(|row| row.cells.into_iter().next())
        .map(|c| c.summary)
        .ok_or_else(|| Error::Empty(format!("no successful trials for {method} on {rule}")))
}

/// Default augmentation sizes for [`sweep_da_size`].
pub const SWEEP_SIZES: [usize; 6] = [0, 10, 50, 100, 500, 1000];

/// Runs `method` at each augmentation size. Sizes larger than the smallest
/// base training set are clamped, with a warning.
pub fn sweep_da_size(spec: &ExperimentSpec, method: Method, sizes: &[usize]) -> Result<SweepReport> {
    if method.augment.is_none() {
        return Err(Error::Config(format!("sweep needs an augmented method, got {method}")));
    }
    let cache = BaseCache::from_env();
    let dataset = spec.dataset.load(spec.seed)?;
    let rules = held_rules(spec, &dataset)?;
    let mut smallest = usize::MAX;
    for rule in &rules {
        let split = make_holdout_split(&dataset, rule, spec.base_cap, spec.seed)?;
        smallest = smallest.min(split.base_train.len());
    }
    let mut warnings = Vec::new();
    let mut reports = Vec::new();
    for &size in sizes {
        let used = if size > smallest {
            let w = format!("da_size {size} clamped to {smallest}");
            log::warn!("{w}");
            warnings.push(w);
            smallest
        } else {
            size
        };
        let run = ExperimentSpec { methods: vec![method], da_size: used, ..spec.clone() };
        reports.push((size, used, run_with_cache(&run, &cache)?));
    }
    Ok(SweepReport::from_runs(spec, method, reports, warnings)?)
}
