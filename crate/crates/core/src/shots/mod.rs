//! Choosing the handful of labeled target examples an adaptation run sees.

mod tabu;

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use serde::{Deserialize, Serialize};

pub use tabu::{greedy_maxsum, tabu_maxsum, DistanceMatrix, Objective, TabuParams};

use crate::corpus::{Example, ExampleId, HoldoutSplit, RuleId};
use crate::error::{Error, Result};
use crate::rng;
use crate::textsim::{EmbedRequest, EmbeddingProvider, EmbeddingVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShotStrategy {
    Random,
    ClosestTarget,
    FurthestTarget,
    ClosestSource,
    FurthestSource,
}

impl ShotStrategy {
    pub const ALL: [ShotStrategy; 5] = [
        ShotStrategy::Random,
        ShotStrategy::ClosestTarget,
        ShotStrategy::FurthestTarget,
        ShotStrategy::ClosestSource,
        ShotStrategy::FurthestSource,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ShotStrategy::Random => "random",
            ShotStrategy::ClosestTarget => "closest-target",
            ShotStrategy::FurthestTarget => "furthest-target",
            ShotStrategy::ClosestSource => "closest-source",
            ShotStrategy::FurthestSource => "furthest-source",
        }
    }
}

impl fmt::Display for ShotStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ShotStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ShotStrategy::ALL
            .into_iter()
            .find(|st| st.as_str() == s.trim().to_ascii_lowercase().replace('_', "-"))
            .ok_or_else(|| Error::Config(format!("unknown shot strategy {s:?}")))
    }
}

/// The labeled target examples given to one adaptation trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShotSet {
    pub held_rule: RuleId,
    pub shots: Vec<Example>,
    pub strategy: ShotStrategy,
    pub seed: u64,
}

impl ShotSet {
    pub fn ids(&self) -> Vec<ExampleId> {
        self.shots.iter().map(|e| e.id.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.shots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shots.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ShotConfig {
    pub tabu: TabuParams,
    /// Target pools larger than this are subsampled before the pairwise search.
    pub target_cap: usize,
    /// Source examples sampled when measuring distance to the source.
    pub source_cap: usize,
}

impl Default for ShotConfig {
    fn default() -> Self {
        ShotConfig { tabu: TabuParams::default(), target_cap: 2000, source_cap: 5000 }
    }
}

fn check_pool(pool: &[Example], k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::Config("shot count must be at least 1".into()));
    }
    if pool.len() < k {
        return Err(Error::PoolTooSmall { needed: k, available: pool.len() });
    }
    Ok(())
}

fn seeded_subset(n: usize, cap: usize, seed: u64) -> Vec<usize> {
    if n <= cap {
        return (0..n).collect();
    }
    let mut picked = index::sample(&mut rng::seeded(seed), n, cap).into_vec();
    picked.sort_unstable();
    picked
}

fn embed_examples(provider: &dyn EmbeddingProvider, examples: &[&Example]) -> Result<Vec<EmbeddingVector<f64>>> {
    let texts: Vec<String> = examples.iter().map(|e| e.full_text()).collect();
    let requests: Vec<EmbedRequest<'_>> =
        examples.iter().zip(&texts).map(|(e, t)| EmbedRequest { id: &e.id, text: t }).collect();
    let vectors = provider.embed(&requests)?;
    if vectors.len() != requests.len() {
        return Err(Error::LengthMismatch { left: vectors.len(), right: requests.len() });
    }
    Ok(vectors)
}

/// `k` target examples drawn uniformly without replacement.
pub fn sample_random_shots(pool: &[Example], held_rule: &RuleId, k: usize, seed: u64) -> Result<ShotSet> {
    check_pool(pool, k)?;
    let picked = index::sample(&mut rng::seeded(seed), pool.len(), k);
    Ok(ShotSet {
        held_rule: held_rule.clone(),
        shots: picked.iter().map(|i| pool[i].clone()).collect(),
        strategy: ShotStrategy::Random,
        seed,
    })
}

/// The `k` target examples whose pairwise embedding distances sum lowest
/// (`Minimize`, most similar to each other) or highest (`Maximize`).
pub fn select_extreme_within_target(
    pool: &[Example],
    held_rule: &RuleId,
    k: usize,
    objective: Objective,
    provider: &dyn EmbeddingProvider,
    config: &ShotConfig,
) -> Result<ShotSet> {
    check_pool(pool, k)?;
    let seed = config.tabu.seed;
    let candidates = seeded_subset(pool.len(), config.target_cap.max(k), rng::derive_seed(seed, &["target-cap"]));
    let examples: Vec<&Example> = candidates.iter().map(|&i| &pool[i]).collect();
    let vectors = embed_examples(provider, &examples)?;
    let dist = DistanceMatrix::cosine_distances(&vectors)?;
    let chosen = tabu_maxsum(&dist, k, objective, &config.tabu)?;
    Ok(ShotSet {
        held_rule: held_rule.clone(),
        shots: chosen.iter().map(|&i| examples[i].clone()).collect(),
        strategy: match objective {
            Objective::Minimize => ShotStrategy::ClosestTarget,
            Objective::Maximize => ShotStrategy::FurthestTarget,
        },
        seed,
    })
}

/// Mean cosine distance from each target vector to a set of source vectors.
///
/// With unit vectors the mean cosine equals the dot product with the source
/// centroid, so this is linear in the number of sources. Zero vectors have
/// cosine zero with everything.
pub fn mean_distance_to_source(targets: &[EmbeddingVector<f64>], sources: &[EmbeddingVector<f64>]) -> Result<Vec<f64>> {
    if sources.is_empty() {
        return Err(Error::Empty("source sample".into()));
    }
    let dim = sources[0].dim();
    let mut centroid = vec![0.0; dim];
    for s in sources {
        if s.dim() != dim {
            return Err(Error::DimensionMismatch { left: s.dim(), right: dim });
        }
        let unit = s.normalized();
        for (c, v) in centroid.iter_mut().zip(unit.values()) {
            *c += v / sources.len() as f64;
        }
    }
    targets
        .iter()
        .map(|t| {
            if t.dim() != dim {
                return Err(Error::DimensionMismatch { left: t.dim(), right: dim });
            }
            let unit = t.normalized();
            let c: f64 = unit.values().iter().zip(&centroid).map(|(a, b)| a * b).sum();
            Ok(1.0 - c.clamp(-1.0, 1.0))
        })
        .collect()
}

/// The `k` target examples with the smallest (`Minimize`) or largest
/// (`Maximize`) mean embedding distance to a seeded sample of the source.
/// Ties go to the earlier pool position.
#[allow(clippy::too_many_arguments)]
pub fn select_relative_to_source(
    pool: &[Example],
    source: &[Example],
    held_rule: &RuleId,
    k: usize,
    objective: Objective,
    provider: &dyn EmbeddingProvider,
    config: &ShotConfig,
    seed: u64,
) -> Result<ShotSet> {
    check_pool(pool, k)?;
    let sample = seeded_subset(source.len(), config.source_cap, rng::derive_seed(seed, &["source-sample"]));
    let source_examples: Vec<&Example> = sample.iter().map(|&i| &source[i]).collect();
    let source_vectors = embed_examples(provider, &source_examples)?;
    let targets: Vec<&Example> = pool.iter().collect();
    let target_vectors = embed_examples(provider, &targets)?;
    let distances = mean_distance_to_source(&target_vectors, &source_vectors)?;
    let mut order: Vec<usize> = (0..pool.len()).collect();
    order.sort_by(|&a, &b| {
        let by = match objective {
            Objective::Minimize => distances[a].total_cmp(&distances[b]),
            Objective::Maximize => distances[b].total_cmp(&distances[a]),
        };
        by.then(a.cmp(&b))
    });
    Ok(ShotSet {
        held_rule: held_rule.clone(),
        shots: order[..k].iter().map(|&i| pool[i].clone()).collect(),
        strategy: match objective {
            Objective::Minimize => ShotStrategy::ClosestSource,
            Objective::Maximize => ShotStrategy::FurthestSource,
        },
        seed,
    })
}

/// Shot selection for a split: shots come from the adaptation pool, and the
/// source is the split's base training set.
pub fn select_shots(
    split: &HoldoutSplit,
    strategy: ShotStrategy,
    k: usize,
    seed: u64,
    provider: &dyn EmbeddingProvider,
    config: &ShotConfig,
) -> Result<ShotSet> {
    let pool = &split.adaptation_pool;
    let rule = &split.held_rule;
    let tabu = ShotConfig { tabu: TabuParams { seed, ..config.tabu }, ..*config };
    match strategy {
        ShotStrategy::Random => sample_random_shots(pool, rule, k, seed),
        ShotStrategy::ClosestTarget => select_extreme_within_target(pool, rule, k, Objective::Minimize, provider, &tabu),
        ShotStrategy::FurthestTarget => select_extreme_within_target(pool, rule, k, Objective::Maximize, provider, &tabu),
        ShotStrategy::ClosestSource => {
            select_relative_to_source(pool, &split.base_train, rule, k, Objective::Minimize, provider, config, seed)
        }
        ShotStrategy::FurthestSource => {
            select_relative_to_source(pool, &split.base_train, rule, k, Objective::Maximize, provider, config, seed)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Label, Likert};
    use crate::textsim::{InternalTfidfProvider, Stopwords};
    use std::collections::BTreeSet;

    fn example(id: &str, text: &str, rule: &RuleId) -> Example {
        Example {
            id: ExampleId::from(id),
            context: None,
            focus: text.to_string(),
            rule_tags: BTreeSet::from([rule.clone()]),
            label: Label::Likert(Likert::Ok),
        }
    }

    fn rule() -> RuleId {
        RuleId::new("care").unwrap()
    }

    #[test]
    fn strategy_names_round_trip() {
        for s in ShotStrategy::ALL {
            assert_eq!(s.as_str().parse::<ShotStrategy>().unwrap(), s);
        }
        assert_eq!("closest_target".parse::<ShotStrategy>().unwrap(), ShotStrategy::ClosestTarget);
        assert!("nearest".parse::<ShotStrategy>().is_err());
    }

    #[test]
    fn random_shots_are_distinct_and_seeded() {
        let r = rule();
        let pool: Vec<Example> = (0..20).map(|i| example(&format!("e{i:02}"), "text", &r)).collect();
        let a = sample_random_shots(&pool, &r, 5, 9).unwrap();
        let b = sample_random_shots(&pool, &r, 5, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.ids().iter().collect::<BTreeSet<_>>().len(), 5);
        assert!(matches!(sample_random_shots(&pool, &r, 21, 9), Err(Error::PoolTooSmall { .. })));
        assert!(sample_random_shots(&pool, &r, 0, 9).is_err());
    }

    #[test]
    fn identical_texts_give_zero_distance_sets() {
        let r = rule();
        let pool: Vec<Example> = (0..5).map(|i| example(&format!("e{i}"), "walk the dog at night", &r)).collect();
        let provider = InternalTfidfProvider::fit(["walk the dog at night", "feed the cat"], Stopwords::english(), None);
        for obj in [Objective::Minimize, Objective::Maximize] {
            let set = select_extreme_within_target(&pool, &r, 5, obj, &provider, &ShotConfig::default()).unwrap();
            assert_eq!(set.len(), 5);
            let vectors = embed_examples(&provider, &set.shots.iter().collect::<Vec<_>>()).unwrap();
            let d = DistanceMatrix::cosine_distances(&vectors).unwrap();
            assert!(d.subset_sum(&[0, 1, 2, 3, 4]).abs() < 1e-12);
        }
    }

    #[test]
    fn closest_target_prefers_a_shared_topic() {
        let r = rule();
        let mut pool = vec![
            example("a", "lend money to a friend", &r),
            example("b", "borrow money from a friend", &r),
            example("c", "lend money to a cousin", &r),
        ];
        for (i, t) in ["paint the fence", "sing loudly", "plant tomatoes", "repair the bike"].iter().enumerate() {
            pool.push(example(&format!("z{i}"), t, &r));
        }
        let texts: Vec<String> = pool.iter().map(|e| e.full_text()).collect();
        let provider = InternalTfidfProvider::fit(texts.iter().map(String::as_str), Stopwords::english(), None);
        let set = select_extreme_within_target(&pool, &r, 3, Objective::Minimize, &provider, &ShotConfig::default())
            .unwrap();
        let ids: BTreeSet<String> = set.ids().into_iter().map(|i| i.0).collect();
        assert_eq!(ids, BTreeSet::from(["a".to_string(), "b".to_string(), "c".to_string()]));
        assert_eq!(set.strategy, ShotStrategy::ClosestTarget);
    }

    #[test]
    fn centroid_shortcut_matches_pairwise_mean() {
        let v = |xs: &[f64]| EmbeddingVector::new(xs.to_vec()).unwrap();
        let targets = vec![v(&[1.0, 0.0, 0.0]), v(&[0.3, 0.4, 0.0]), v(&[0.0, 0.0, 0.0])];
        let sources = vec![v(&[2.0, 1.0, 0.0]), v(&[0.0, 0.0, 5.0]), v(&[0.0, 0.0, 0.0]), v(&[1.0, 1.0, 1.0])];
        let got = mean_distance_to_source(&targets, &sources).unwrap();
        for (t, g) in targets.iter().zip(got) {
            let brute: f64 = sources
                .iter()
                .map(|s| {
                    let c = if t.norm() == 0.0 || s.norm() == 0.0 { 0.0 } else { t.cosine(s).unwrap() };
                    1.0 - c
                })
                .sum::<f64>()
                / sources.len() as f64;
            assert!((g - brute).abs() < 1e-12, "{g} vs {brute}");
        }
    }

    #[test]
    fn source_relative_selection_orders_by_distance() {
        let r = rule();
        let source: Vec<Example> =
            (0..6).map(|i| example(&format!("s{i}"), "steal money from a neighbor", &r)).collect();
        let pool = vec![
            example("t0", "plant tomatoes", &r),
            example("t1", "steal money", &r),
            example("t2", "steal money from a neighbor", &r),
            example("t3", "sing loudly", &r),
        ];
        let texts: Vec<String> = source.iter().chain(&pool).map(|e| e.full_text()).collect();
        let provider = InternalTfidfProvider::fit(texts.iter().map(String::as_str), Stopwords::english(), None);
        let cfg = ShotConfig::default();
        let close = select_relative_to_source(&pool, &source, &r, 2, Objective::Minimize, &provider, &cfg, 1).unwrap();
        assert_eq!(close.ids(), vec![ExampleId::from("t2"), ExampleId::from("t1")]);
        let far = select_relative_to_source(&pool, &source, &r, 2, Objective::Maximize, &provider, &cfg, 1).unwrap();
        assert_eq!(far.ids(), vec![ExampleId::from("t0"), ExampleId::from("t3")]);
    }
}
