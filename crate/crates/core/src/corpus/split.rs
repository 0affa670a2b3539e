use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::ingest::cap_per_rule;
use super::{Dataset, Example, ExampleId, RuleId, TaskKind};
use crate::error::{Error, Result};
use crate::rng;

/// Fraction of each rule reserved for evaluation, as 1 in `TEST_MODULUS`.
const TEST_MODULUS: u64 = 10;

/// Seed-independent test membership: one example in ten, chosen by hashing its id.
pub fn is_test_example(id: &ExampleId) -> bool {
    let mut key = b"ruleshift/test-slice/".to_vec();
    key.extend_from_slice(id.as_str().as_bytes());
    rng::stable_hash(&key) % TEST_MODULUS == 0
}

/// Leave-one-rule-out partition of a dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HoldoutSplit {
    pub held_rule: RuleId,
    pub task_kind: TaskKind,
    pub rules: Vec<RuleId>,
    /// Training data for the base classifier; never contains a held-rule positive.
    pub base_train: Vec<Example>,
    /// Held-rule examples eligible to become shots.
    pub adaptation_pool: Vec<Example>,
    pub test_slices: BTreeMap<RuleId, Vec<Example>>,
    pub seed: u64,
    pub base_cap: usize,
    pub dataset_digest: String,
}

impl HoldoutSplit {
    pub fn held_test_slice(&self) -> &[Example] {
        self.test_slices.get(&self.held_rule).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Rules other than the held one.
    pub fn existing_rules(&self) -> impl Iterator<Item = &RuleId> {
        self.rules.iter().filter(move |r| **r != self.held_rule)
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_vec(self)?).map_err(|e| Error::io(path, e))
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_slice(&bytes)?)
    }
}

/// Builds the held-out split for `held_rule`.
///
/// Test slices are fixed by [`is_test_example`]. For the Likert task the slice
/// of a rule holds that rule's test examples and `base_cap` caps each existing
/// rule; for the binary task every test example is labeled on every rule, so
/// each slice holds all test examples and `base_cap` is the total base size.
/// Any example tagged with the held rule is kept out of `base_train`.
pub fn make_holdout_split(
    dataset: &Dataset,
    held_rule: &RuleId,
    base_cap: usize,
    seed: u64,
) -> Result<HoldoutSplit> {
    if !dataset.rules().contains(held_rule) {
        return Err(Error::UnknownRule(held_rule.to_string()));
    }
    let task = dataset.task_kind();
    let (test, rest): (Vec<&Example>, Vec<&Example>) =
        dataset.examples.iter().partition(|ex| is_test_example(&ex.id));

    let mut test_slices = BTreeMap::new();
    for rule in dataset.rules() {
        let slice: Vec<Example> = match task {
            TaskKind::Likert5 => test.iter().filter(|ex| ex.has_rule(rule)).map(|&ex| ex.clone()).collect(),
            TaskKind::BinaryPerRule => test.iter().map(|&ex| ex.clone()).collect(),
        };
        test_slices.insert(rule.clone(), slice);
    }

    let adaptation_pool: Vec<Example> =
        rest.iter().filter(|ex| ex.has_rule(held_rule)).map(|&ex| ex.clone()).collect();
    let eligible: Vec<Example> =
        rest.iter().filter(|ex| !ex.has_rule(held_rule)).map(|&ex| ex.clone()).collect();

    let base_seed = rng::derive_seed(seed, &["base-train", held_rule.as_str()]);
    let base_train = match task {
        TaskKind::Likert5 => cap_per_rule(eligible, base_cap, base_seed),
        TaskKind::BinaryPerRule => {
            let mut sampled = eligible;
            sampled.shuffle(&mut rng::seeded(base_seed));
            sampled.truncate(base_cap);
            sampled
        }
    };

    Ok(HoldoutSplit {
        held_rule: held_rule.clone(),
        task_kind: task,
        rules: dataset.rules().to_vec(),
        base_train,
        adaptation_pool,
        test_slices,
        seed,
        base_cap,
        dataset_digest: dataset.digest().to_string(),
    })
}
