//! Expanding a few target shots with similar examples from the existing rules.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::seq::index;
use serde::{Deserialize, Serialize};

pub use crate::shots::ShotSet;

use crate::corpus::{Example, ExampleId, HoldoutSplit, Label};
use crate::error::{Error, Result};
use crate::rng;
use crate::textsim::{
    build_index, Aggregation, EmbeddingProvider, Hit, Representation, SimilarityIndex, Stopwords, TextField,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AugmentMethod {
    Cosine,
    Recross,
    Cda,
    Random,
}

impl AugmentMethod {
    pub const ALL: [AugmentMethod; 4] =
        [AugmentMethod::Cosine, AugmentMethod::Recross, AugmentMethod::Cda, AugmentMethod::Random];

    pub fn as_str(self) -> &'static str {
        match self {
            AugmentMethod::Cosine => "cosine",
            AugmentMethod::Recross => "recross",
            AugmentMethod::Cda => "cda",
            AugmentMethod::Random => "random",
        }
    }
}

impl fmt::Display for AugmentMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AugmentMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AugmentMethod::ALL
            .into_iter()
            .find(|m| m.as_str() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| Error::Config(format!("unknown augmentation method {s:?}")))
    }
}

/// One selected source example.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanEntry {
    pub id: ExampleId,
    /// Similarity score; absent for random selection.
    pub score: Option<f64>,
    /// Shot with the highest similarity to this example.
    pub matched_shot: Option<ExampleId>,
}

/// Ordered selection of base-training examples to add to the shots.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AugmentationPlan {
    pub method: AugmentMethod,
    pub selected: Vec<PlanEntry>,
    pub da_size: usize,
    pub provenance: String,
    pub seed: Option<u64>,
    pub shot_ids: Vec<ExampleId>,
}

impl AugmentationPlan {
    pub fn ids(&self) -> Vec<ExampleId> {
        self.selected.iter().map(|e| e.id.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }

    /// The selected examples, resolved against the split's base training set.
    pub fn examples(&self, split: &HoldoutSplit) -> Result<Vec<Example>> {
        let by_id: HashMap<&ExampleId, &Example> = split.base_train.iter().map(|e| (&e.id, e)).collect();
        self.selected
            .iter()
            .map(|entry| {
                by_id
                    .get(&entry.id)
                    .map(|&e| e.clone())
                    .ok_or_else(|| Error::Config(format!("plan entry `{}` is not in base training", entry.id)))
            })
            .collect()
    }
}

/// Settings shared by the similarity augmenters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct AugmentConfig {
    /// Text compared for cosine and ReCross.
    pub field: TextField,
    /// How shot similarities combine for cosine and CDA.
    pub aggregation: Aggregation,
    /// ReCross stage-one pool as a multiple of the augmentation size.
    pub pool_factor: usize,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        AugmentConfig { field: TextField::Full, aggregation: Aggregation::Mean, pool_factor: 10 }
    }
}

/// Per-split augmentation state: indices over the base training set are built
/// once and reused for every shot set.
pub struct Augmenter {
    method: AugmentMethod,
    config: AugmentConfig,
    index: Option<SimilarityIndex<f64>>,
    base_ids: Vec<ExampleId>,
}

impl Augmenter {
    pub fn new(
        split: &HoldoutSplit,
        method: AugmentMethod,
        config: AugmentConfig,
        provider: Option<Arc<dyn EmbeddingProvider>>,
    ) -> Result<Self> {
        if split.base_train.is_empty() {
            return Err(Error::Empty("base training set".into()));
        }
        let sw = Stopwords::english();
        let index = match method {
            AugmentMethod::Cosine => Some(build_index(&split.base_train, config.field, Representation::Bow, None, sw)?),
            AugmentMethod::Cda => Some(build_index(&split.base_train, TextField::Context, Representation::Bow, None, sw)?),
            AugmentMethod::Recross => {
                let provider = provider.ok_or_else(|| Error::Config("recross needs an embedding provider".into()))?;
                Some(build_index(&split.base_train, config.field, Representation::Embedding, Some(provider), sw)?)
            }
            AugmentMethod::Random => None,
        };
        Ok(Augmenter { method, config, index, base_ids: split.base_train.iter().map(|e| e.id.clone()).collect() })
    }

    pub fn method(&self) -> AugmentMethod {
        self.method
    }

    fn provenance(&self) -> String {
        let Some(index) = &self.index else {
            return format!("uniform sample of {} base examples", self.base_ids.len());
        };
        let f = index.featurizer();
        let mut out = format!(
            "{:?} over {} base examples, field {:?}",
            f.representation(),
            index.len(),
            index.field()
        );
        if let Some(p) = f.provider() {
            out.push_str(&format!(", provider {p}"));
        }
        out
    }

    /// Plan for `shots`. `pool_size` only affects ReCross; `seed` only random.
    pub fn plan(&self, shots: &ShotSet, da_size: usize, pool_size: Option<usize>, seed: u64) -> Result<AugmentationPlan> {
        if shots.is_empty() {
            return Err(Error::Empty("shot set".into()));
        }
        let shot_ids = shots.ids();
        let mut plan_seed = None;
        let selected = match (self.method, &self.index) {
            (AugmentMethod::Random, _) => {
                plan_seed = Some(seed);
                let n = self.base_ids.len();
                if n < da_size {
                    return Err(Error::PoolTooSmall { needed: da_size, available: n });
                }
                index::sample(&mut rng::seeded(seed), n, da_size)
                    .iter()
                    .map(|i| PlanEntry { id: self.base_ids[i].clone(), score: None, matched_shot: None })
                    .collect()
            }
            (AugmentMethod::Cosine, Some(index)) => {
                let queries = index.vectorize(&shots.shots, self.config.field)?;
                entries(index.query_topk(&queries, da_size, self.config.aggregation)?, &shot_ids)
            }
            (AugmentMethod::Cda, Some(index)) => {
                let queries = index.vectorize(&shots.shots, TextField::Focus)?;
                entries(index.query_topk(&queries, da_size, self.config.aggregation)?, &shot_ids)
            }
            (AugmentMethod::Recross, Some(index)) => {
                let pool = match pool_size {
                    Some(p) if p < da_size => {
                        return Err(Error::Config(format!("recross pool {p} is smaller than da_size {da_size}")));
                    }
                    Some(p) => p,
                    None => da_size.saturating_mul(self.config.pool_factor),
                }
                .min(index.len());
                let queries = index.vectorize(&shots.shots, self.config.field)?;
                let stage_one: HashSet<ExampleId> =
                    index.query_topk(&queries, pool, Aggregation::Max)?.into_iter().map(|h| h.id).collect();
                let reranked: Vec<Hit<f64>> = index
                    .score_all(&queries, Aggregation::Mean)?
                    .into_iter()
                    .filter(|h| stage_one.contains(&h.id))
                    .collect();
                entries(crate::textsim::top_k(reranked, da_size), &shot_ids)
            }
            (_, None) => unreachable!("similarity augmenters always build an index"),
        };
        Ok(AugmentationPlan {
            method: self.method,
            selected: dedupe(selected),
            da_size,
            provenance: self.provenance(),
            seed: plan_seed,
            shot_ids,
        })
    }
}

fn entries(hits: Vec<Hit<f64>>, shot_ids: &[ExampleId]) -> Vec<PlanEntry> {
    hits.into_iter()
        .map(|h| PlanEntry { id: h.id, score: Some(h.score), matched_shot: shot_ids.get(h.best_query).cloned() })
        .collect()
}

/// Keeps the first (highest-ranked) entry for each id.
fn dedupe(entries: Vec<PlanEntry>) -> Vec<PlanEntry> {
    let mut seen = HashSet::new();
    entries.into_iter().filter(|e| seen.insert(e.id.clone())).collect()
}

/// Top `da_size` base examples by aggregated bag-of-words cosine to the shots.
pub fn augment_cosine(split: &HoldoutSplit, shots: &ShotSet, da_size: usize) -> Result<AugmentationPlan> {
    Augmenter::new(split, AugmentMethod::Cosine, AugmentConfig::default(), None)?.plan(shots, da_size, None, 0)
}

/// Two-stage dense retrieval: `pool_size` candidates by best cosine to any
/// shot, re-ranked by mean cosine to all shots. The default pool is ten times
/// `da_size`, capped at the base set size.
pub fn augment_recross(
    split: &HoldoutSplit,
    shots: &ShotSet,
    da_size: usize,
    pool_size: Option<usize>,
    provider: Arc<dyn EmbeddingProvider>,
) -> Result<AugmentationPlan> {
    Augmenter::new(split, AugmentMethod::Recross, AugmentConfig::default(), Some(provider))?
        .plan(shots, da_size, pool_size, 0)
}

/// Source contexts matched against shot focus texts; examples without a
/// context are matched on their focus.
pub fn augment_cda(split: &HoldoutSplit, shots: &ShotSet, da_size: usize) -> Result<AugmentationPlan> {
    Augmenter::new(split, AugmentMethod::Cda, AugmentConfig::default(), None)?.plan(shots, da_size, None, 0)
}

/// Seeded uniform sample without replacement.
pub fn augment_random(split: &HoldoutSplit, shots: &ShotSet, da_size: usize, seed: u64) -> Result<AugmentationPlan> {
    Augmenter::new(split, AugmentMethod::Random, AugmentConfig::default(), None)?.plan(shots, da_size, None, seed)
}

/// Confirms a plan stays inside the base set: nothing from the adaptation
/// pool or any test slice, and no example positive for the held rule.
pub fn audit_plan(plan: &AugmentationPlan, split: &HoldoutSplit) -> Result<()> {
    let forbidden: HashSet<&ExampleId> = split
        .adaptation_pool
        .iter()
        .chain(split.test_slices.values().flatten())
        .map(|e| &e.id)
        .collect();
    if let Some(e) = plan.selected.iter().find(|e| forbidden.contains(&e.id)) {
        return Err(Error::Config(format!("plan selects held-out example `{}`", e.id)));
    }
    for e in plan.examples(split)? {
        if e.has_rule(&split.held_rule) || e.binary(&split.held_rule) == Some(true) {
            return Err(Error::Config(format!("plan selects held-rule positive `{}`", e.id)));
        }
    }
    let unique: BTreeSet<&ExampleId> = plan.selected.iter().map(|e| &e.id).collect();
    if unique.len() != plan.selected.len() {
        return Err(Error::Config("plan contains duplicate examples".into()));
    }
    Ok(())
}

/// Confirms every shot is a held-rule example from the adaptation pool.
pub fn audit_shots(shots: &ShotSet, split: &HoldoutSplit) -> Result<()> {
    let pool: HashSet<&ExampleId> = split.adaptation_pool.iter().map(|e| &e.id).collect();
    let tests: HashSet<&ExampleId> = split.test_slices.values().flatten().map(|e| &e.id).collect();
    for s in &shots.shots {
        if !pool.contains(&s.id) || tests.contains(&s.id) || !s.has_rule(&split.held_rule) {
            return Err(Error::Config(format!("shot `{}` is not an adaptation-pool example", s.id)));
        }
    }
    if shots.is_empty() {
        return Err(Error::Empty("shot set".into()));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RowKind {
    Shot,
    Augmented,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InspectionRow {
    pub kind: RowKind,
    pub id: ExampleId,
    pub text: String,
    pub label: String,
    pub score: Option<f64>,
    pub rules: Vec<String>,
}

/// Shots followed by the top augmented examples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InspectionReport {
    pub method: AugmentMethod,
    pub held_rule: String,
    pub rows: Vec<InspectionRow>,
}

impl InspectionReport {
    pub fn to_markdown(&self) -> String {
        let mut out = format!("Augmentation ({}) for held rule `{}`\n\n", self.method, self.held_rule);
        out.push_str("| kind | id | text | label | score | rules |\n|---|---|---|---|---|---|\n");
        for r in &self.rows {
            let kind = match r.kind {
                RowKind::Shot => "shot",
                RowKind::Augmented => "augmented",
            };
            let score = r.score.map(|s| format!("{s:.3}")).unwrap_or_else(|| "-".into());
            out.push_str(&format!(
                "| {kind} | {} | {} | {} | {score} | {} |\n",
                r.id,
                r.text.replace('|', "\\|"),
                r.label,
                r.rules.join(", ")
            ));
        }
        out
    }
}

fn label_text(example: &Example, split: &HoldoutSplit) -> String {
    match &example.label {
        Label::Likert(l) => l.as_str().to_string(),
        Label::Binary(_) => match example.binary(&split.held_rule) {
            Some(true) => format!("{}: yes", split.held_rule),
            _ => format!("{}: no", split.held_rule),
        },
    }
}

fn row(kind: RowKind, example: &Example, split: &HoldoutSplit, score: Option<f64>) -> InspectionRow {
    InspectionRow {
        kind,
        id: example.id.clone(),
        text: example.full_text(),
        label: label_text(example, split),
        score,
        rules: example.rule_tags.iter().map(|r| r.to_string()).collect(),
    }
}

/// Inspection table: every shot, then the first `top_n` plan entries.
pub fn export_plan(plan: &AugmentationPlan, split: &HoldoutSplit, top_n: usize) -> Result<InspectionReport> {
    let pool: HashMap<&ExampleId, &Example> = split.adaptation_pool.iter().map(|e| (&e.id, e)).collect();
    let mut rows = Vec::new();
    for id in &plan.shot_ids {
        let shot = pool
            .get(id)
            .ok_or_else(|| Error::Config(format!("shot `{id}` is not in the adaptation pool")))?;
        rows.push(row(RowKind::Shot, shot, split, None));
    }
    let examples = plan.examples(split)?;
    for (entry, example) in plan.selected.iter().zip(&examples).take(top_n) {
        rows.push(row(RowKind::Augmented, example, split, entry.score));
    }
    Ok(InspectionReport { method: plan.method, held_rule: split.held_rule.to_string(), rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Likert, RuleId, TaskKind};
    use crate::shots::ShotStrategy;
    use std::collections::BTreeMap;

    fn ex(id: &str, context: Option<&str>, focus: &str, rule: &str) -> Example {
        Example {
            id: ExampleId::from(id),
            context: context.map(str::to_string),
            focus: focus.to_string(),
            rule_tags: BTreeSet::from([RuleId::new(rule).unwrap()]),
            label: Label::Likert(Likert::Bad),
        }
    }

    fn split(base: Vec<Example>, pool: Vec<Example>) -> HoldoutSplit {
        let rules = vec![RuleId::new("care").unwrap(), RuleId::new("loyalty").unwrap()];
        HoldoutSplit {
            held_rule: rules[0].clone(),
            task_kind: TaskKind::Likert5,
            rules: rules.clone(),
            base_train: base,
            adaptation_pool: pool,
            test_slices: BTreeMap::from([(rules[0].clone(), Vec::new()), (rules[1].clone(), Vec::new())]),
            seed: 0,
            base_cap: 100,
            dataset_digest: "d".into(),
        }
    }

    fn shots_of(split: &HoldoutSplit) -> ShotSet {
        ShotSet {
            held_rule: split.held_rule.clone(),
            shots: split.adaptation_pool.clone(),
            strategy: ShotStrategy::Random,
            seed: 0,
        }
    }

    #[test]
    fn exact_duplicate_ranks_first_with_score_one() {
        let base = vec![
            ex("b1", Some("at work"), "ignore a colleague", "loyalty"),
            ex("b2", Some("at home"), "hug a friend", "loyalty"),
            ex("b3", Some("at school"), "steal lunch money", "loyalty"),
        ];
        let s = split(base, vec![ex("s1", Some("at home"), "hug a friend", "care")]);
        let plan = augment_cosine(&s, &shots_of(&s), 2).unwrap();
        assert_eq!(plan.selected[0].id, ExampleId::from("b2"));
        assert!((plan.selected[0].score.unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(plan.selected[0].matched_shot, Some(ExampleId::from("s1")));
        audit_plan(&plan, &s).unwrap();
    }

    #[test]
    fn cda_matches_context_against_focus() {
        let base = vec![
            ex("b1", Some("feed the stray cat"), "walk away", "loyalty"),
            ex("b2", Some("a rainy day"), "feed the stray cat", "loyalty"),
        ];
        let s = split(base, vec![ex("s1", Some("in town"), "feed the stray cat", "care")]);
        let plan = augment_cda(&s, &shots_of(&s), 2).unwrap();
        assert_eq!(plan.ids(), vec![ExampleId::from("b1"), ExampleId::from("b2")]);
        assert!((plan.selected[0].score.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_plans_are_seeded_and_bounded() {
        let base: Vec<Example> = (0..10).map(|i| ex(&format!("b{i}"), None, "text", "loyalty")).collect();
        let s = split(base, vec![ex("s1", None, "x", "care")]);
        let shots = shots_of(&s);
        let a = augment_random(&s, &shots, 4, 5).unwrap();
        assert_eq!(a, augment_random(&s, &shots, 4, 5).unwrap());
        assert_eq!(a.seed, Some(5));
        assert!(a.selected.iter().all(|e| e.score.is_none()));
        let all = augment_random(&s, &shots, 10, 5).unwrap();
        assert_eq!(all.ids().into_iter().collect::<BTreeSet<_>>().len(), 10);
        assert!(matches!(augment_random(&s, &shots, 11, 5), Err(Error::PoolTooSmall { .. })));
    }

    #[test]
    fn export_row_count() {
        let base: Vec<Example> = (0..4).map(|i| ex(&format!("b{i}"), None, "lend money", "loyalty")).collect();
        let pool: Vec<Example> = (0..5).map(|i| ex(&format!("s{i}"), None, "lend money", "care")).collect();
        let s = split(base, pool);
        let plan = augment_cosine(&s, &shots_of(&s), 3).unwrap();
        for (top_n, rows) in [(0, 5), (2, 7), (10, 8)] {
            let report = export_plan(&plan, &s, top_n).unwrap();
            assert_eq!(report.rows.len(), rows);
            assert_eq!(report.to_markdown().lines().count(), 4 + rows);
        }
    }

    #[test]
    fn audit_catches_leaks() {
        let base = vec![ex("b1", None, "a", "loyalty"), ex("s1", None, "a", "care")];
        let s = split(base, vec![ex("s1", None, "a", "care")]);
        let plan = augment_cosine(&s, &shots_of(&s), 2).unwrap();
        assert!(audit_plan(&plan, &s).is_err());
        assert!(audit_shots(&shots_of(&s), &s).is_ok());
        assert!("nope".parse::<AugmentMethod>().is_err());
        assert_eq!("cda".parse::<AugmentMethod>().unwrap(), AugmentMethod::Cda);
    }
}
