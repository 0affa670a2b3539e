//! Seeded Likert corpus with rule-specific label shifts and tunable overlap
//! between rules.
//!
//! Every rule owns a few topic clusters and a label prior leaning towards one
//! Likert level; valence and filler words are shared by all rules. An
//! example's label is drawn from the prior of the rule owning its topic, and
//! its focus carries a valence word that names the label with probability
//! `cue_reliability` (a uniformly random level otherwise). With probability
//! `correlation` an example is written about a topic owned by another rule
//! while still being tagged with its own rule, so the existing rules contain
//! some text about a held rule's topics, labeled under that rule's prior.

use std::collections::{BTreeSet, HashSet};

use rand::seq::IndexedRandom;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Dataset, Example, ExampleId, Label, Likert, RuleId, SourceSchema, TaskKind};
use crate::error::{Error, Result};
use crate::rng::{self, SeededRng};
use crate::textsim::Stopwords;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticConfig {
    pub rules: usize,
    pub per_rule: usize,
    /// Probability an example's topic belongs to a different rule.
    pub correlation: f64,
    pub topics_per_rule: usize,
    pub words_per_topic: usize,
    pub valence_words: usize,
    pub filler_words: usize,
    /// Offset from the neutral level of the level each rule's prior leans
    /// towards, cycled when there are more rules.
    pub shifts: Vec<i32>,
    /// Prior weight of a level decays as `exp(-lean_strength * distance)`
    /// from the rule's leaning level.
    pub lean_strength: f64,
    /// Probability the valence word names the true label.
    pub cue_reliability: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            rules: 5,
            per_rule: 2000,
            correlation: 0.3,
            topics_per_rule: 20,
            words_per_topic: 20,
            valence_words: 6,
            filler_words: 400,
            shifts: vec![1, -1, 2, -2, 1],
            lean_strength: 3.0,
            cue_reliability: 0.5,
            seed: 0,
        }
    }
}

const SYLLABLES: [&str; 24] = [
    "ka", "lo", "mi", "ru", "te", "sa", "no", "vi", "pe", "du", "ga", "zo", "fi", "ba", "ne", "tu", "ri", "mo",
    "se", "ya", "ku", "li", "po", "de",
];

/// Distinct pronounceable pseudo-words that are never stopwords.
fn word_source(seed: u64) -> impl FnMut() -> String {
    let mut r = rng::seeded(seed);
    let mut used: HashSet<String> = HashSet::new();
    let stop = Stopwords::english();
    move || loop {
        let n = r.random_range(2..=4);
        let w: String = (0..n).map(|_| *SYLLABLES.choose(&mut r).expect("nonempty")).collect();
        if !stop.contains(&w) && used.insert(w.clone()) {
            return w;
        }
    }
}

struct Vocabulary {
    /// `[level][word]`
    valence: Vec<Vec<String>>,
    /// `[rule][topic][word]`
    topics: Vec<Vec<Vec<String>>>,
    filler: Vec<String>,
}

fn vocabulary(config: &SyntheticConfig) -> Vocabulary {
    let mut next = word_source(rng::derive_seed(config.seed, &["words"]));
    let valence = (0..5).map(|_| (0..config.valence_words).map(|_| next()).collect()).collect();
    let topics = (0..config.rules)
        .map(|_| {
            (0..config.topics_per_rule)
                .map(|_| (0..config.words_per_topic).map(|_| next()).collect())
                .collect()
        })
        .collect();
    let filler = (0..config.filler_words).map(|_| next()).collect();
    Vocabulary { valence, topics, filler }
}

pub fn rule_names(count: usize) -> Vec<String> {
    (0..count).map(|i| format!("rule-{}", (b'a' + (i % 26) as u8) as char)).collect()
}

fn pick<'a>(words: &'a [String], r: &mut SeededRng) -> &'a str {
    words.choose(r).expect("word pools are nonempty")
}

/// Generates the corpus. Ids are `syn-<rule>-<n>`.
pub fn generate(config: &SyntheticConfig) -> Result<Dataset> {
    if config.rules < 2 || config.per_rule == 0 || config.topics_per_rule == 0 || config.words_per_topic == 0 {
        return Err(Error::Config("synthetic corpus needs at least two rules and nonempty pools".into()));
    }
    if config.valence_words == 0 || config.filler_words == 0 || config.shifts.is_empty() {
        return Err(Error::Config("synthetic corpus needs valence words, filler words and shifts".into()));
    }
    if !(0.0..=1.0).contains(&config.correlation) || !(0.0..=1.0).contains(&config.cue_reliability) {
        return Err(Error::Config("correlation and cue reliability must lie in [0, 1]".into()));
    }
    if !config.lean_strength.is_finite() || config.lean_strength < 0.0 {
        return Err(Error::Config("lean strength must be finite and nonnegative".into()));
    }
    let vocab = vocabulary(config);
    let names = rule_names(config.rules);
    let rules: Vec<RuleId> = names.iter().map(RuleId::new).collect::<Result<_>>()?;
    let priors: Vec<WeightedIndex<f64>> = (0..config.rules)
        .map(|ri| {
            let lean = (2 + config.shifts[ri % config.shifts.len()]).clamp(0, 4);
            let weights = (0..5).map(|level: i32| (-config.lean_strength * f64::from((level - lean).abs())).exp());
            WeightedIndex::new(weights).expect("positive weights")
        })
        .collect();
    let mut r = rng::seeded(rng::derive_seed(config.seed, &["examples"]));
    let mut examples = Vec::with_capacity(config.rules * config.per_rule);
    for (ri, rule) in rules.iter().enumerate() {
        for n in 0..config.per_rule {
            let owner = if config.rules > 1 && r.random_bool(config.correlation) {
                let other = r.random_range(0..config.rules - 1);
                if other >= ri {
                    other + 1
                } else {
                    other
                }
            } else {
                ri
            };
            let topic = &vocab.topics[owner][r.random_range(0..config.topics_per_rule)];
            let level = priors[owner].sample(&mut r);
            let cue = if r.random_bool(config.cue_reliability) { level } else { r.random_range(0..5) };
            let level_words = &vocab.valence[cue];

            let context = format!(
                "{} {} {} {}",
                pick(topic, &mut r),
                pick(&vocab.filler, &mut r),
                pick(topic, &mut r),
                pick(&vocab.filler, &mut r)
            );
            let focus = format!(
                "{} {} {} {}",
                pick(level_words, &mut r),
                pick(&vocab.filler, &mut r),
                pick(topic, &mut r),
                pick(&vocab.filler, &mut r)
            );

            let label = Likert::from_index(level).expect("prior covers five levels");
            examples.push(Example {
                id: ExampleId(format!("syn-{rule}-{n}")),
                context: Some(context),
                focus,
                rule_tags: BTreeSet::from([rule.clone()]),
                label: Label::Likert(label),
            });
        }
    }
    let digest = rng::digest_hex(serde_json::to_string(config)?.as_bytes());
    Dataset::new(TaskKind::Likert5, rules, SourceSchema::GenericJsonl, examples, format!("synthetic-{digest}"), None)
}
