#![allow(dead_code)]

pub mod oracle;

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ruleshift::augment::{audit_plan, audit_shots, AugmentationPlan, ShotSet};
use ruleshift::corpus::{Example, ExampleId, HoldoutSplit, Label, Likert, RuleId, TaskKind};
use ruleshift::model::{
    adapt, changed_parameters, check_freeze_contract, loss_and_gradient, AdaptMode, ClassifierState, Instance, TrainConfig,
};
use ruleshift::Real;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("fixtures").join(name)
}

pub fn rule(name: &str) -> RuleId {
    RuleId::new(name).unwrap()
}

pub fn likert(id: &str, rule_name: &str, context: Option<&str>, focus: &str, level: usize) -> Example {
    Example {
        id: ExampleId(id.into()),
        context: context.map(str::to_string),
        focus: focus.into(),
        rule_tags: BTreeSet::from([rule(rule_name)]),
        label: Label::Likert(Likert::from_index(level).unwrap()),
    }
}

/// A Likert split assembled by hand; test slices are left empty unless given.
pub fn toy_split(held: &str, base: Vec<Example>, pool: Vec<Example>, test: Vec<Example>) -> HoldoutSplit {
    let mut rules: BTreeSet<RuleId> = base.iter().chain(&pool).flat_map(|e| e.rule_tags.iter().cloned()).collect();
    rules.insert(rule(held));
    let mut test_slices = BTreeMap::new();
    test_slices.insert(rule(held), test);
    HoldoutSplit {
        held_rule: rule(held),
        task_kind: TaskKind::Likert5,
        rules: rules.into_iter().collect(),
        base_train: base,
        adaptation_pool: pool,
        test_slices,
        seed: 0,
        base_cap: usize::MAX,
        dataset_digest: "toy".into(),
    }
}

const WORDS: [&str; 14] =
    ["home", "work", "friend", "lie", "steal", "help", "boss", "family", "money", "party", "the", "a", "gift", "loud"];

fn phrase(rng: &mut ChaCha8Rng, max: usize) -> String {
    let n = rng.random_range(1..=max);
    (0..n).map(|_| WORDS[rng.random_range(0..WORDS.len())]).collect::<Vec<_>>().join(" ")
}

/// A split over `n` base examples from two source rules and `pool` held-rule
/// examples. Roughly one base example in five has no context.
pub fn random_split(n: usize, pool: usize, seed: u64) -> HoldoutSplit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = (0..n)
        .map(|i| {
            let context = (rng.random_range(0..5) > 0).then(|| phrase(&mut rng, 4));
            let rule = if i % 2 == 0 { "rule-a" } else { "rule-b" };
            likert(&format!("b{i:04}"), rule, context.as_deref(), &phrase(&mut rng, 5), rng.random_range(0..5))
        })
        .collect();
    let pool = (0..pool)
        .map(|i| {
            let context = phrase(&mut rng, 4);
            likert(&format!("s{i:02}"), "held", Some(&context), &phrase(&mut rng, 5), rng.random_range(0..5))
        })
        .collect();
    let test = vec![likert("t0", "held", Some("test only"), "never selected", 0)];
    toy_split("held", base, pool, test)
}

pub fn first_shots(split: &HoldoutSplit, k: usize) -> ShotSet {
    shot_set("held", split.adaptation_pool[..k].to_vec())
}

/// Adapts and re-checks the freeze contract from the outside: after PT the
/// serialized head is unchanged and exactly the prompt's parameters moved;
/// after SFT the head moved.
pub fn checked_adapt<F: Real>(
    state: &ClassifierState<F>,
    examples: &[Example],
    held: Option<&RuleId>,
    mode: AdaptMode,
    config: &TrainConfig,
) -> ClassifierState<F> {
    let after = adapt(state, examples, held, mode, config).unwrap();
    if config.adapt_steps > 0 {
        check_freeze_contract(state, &after, mode).unwrap();
        match mode {
            AdaptMode::Pt => {
                assert_eq!(state.head.to_bytes(), after.head.to_bytes());
                assert_eq!(changed_parameters(state, &after), config.prompt_len);
                assert_eq!(after.trainable_parameters(AdaptMode::Pt), config.prompt_len);
            }
            AdaptMode::Sft => assert_ne!(state.head.to_bytes(), after.head.to_bytes()),
        }
    }
    after
}

/// Plan after the leakage audit, plus a direct tag scan.
pub fn audited(plan: AugmentationPlan, split: &HoldoutSplit) -> AugmentationPlan {
    audit_plan(&plan, split).unwrap();
    let examples = plan.examples(split).unwrap();
    assert!(examples.iter().all(|e| !e.has_rule(&split.held_rule)));
    let test: BTreeSet<&ExampleId> = split.test_slices.values().flatten().map(|e| &e.id).collect();
    assert!(examples.iter().all(|e| !test.contains(&e.id)));
    plan
}

pub fn audited_shots(shots: ShotSet, split: &HoldoutSplit) -> ShotSet {
    audit_shots(&shots, split).unwrap();
    assert!(shots.shots.iter().all(|e| e.has_rule(&split.held_rule)));
    shots
}

pub fn shot_set(held: &str, shots: Vec<Example>) -> ShotSet {
    ShotSet { held_rule: rule(held), shots, strategy: ruleshift::shots::ShotStrategy::Random, seed: 0 }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Relative distance between the analytic gradient and central finite
/// differences over every parameter `mode` trains.
pub fn gradient_error(state: &ClassifierState<f64>, instances: &[Instance<f64>], mode: AdaptMode) -> f64 {
    let (_, grad) = loss_and_gradient(state, instances, mode).unwrap();
    let base = state.parameters(mode);
    assert_eq!(grad.values.len(), base.len());
    assert_eq!(base.len(), state.trainable_parameters(mode));
    let h = 1e-6;
    let mut probe = state.clone();
    let numeric: Vec<f64> = (0..base.len())
        .map(|i| {
            let mut shifted = base.clone();
            shifted[i] = base[i] + h;
            probe.set_parameters(mode, &shifted).unwrap();
            let (up, _) = loss_and_gradient(&probe, instances, mode).unwrap();
            shifted[i] = base[i] - h;
            probe.set_parameters(mode, &shifted).unwrap();
            let (down, _) = loss_and_gradient(&probe, instances, mode).unwrap();
            (up - down) / (2.0 * h)
        })
        .collect();
    let diff: Vec<f64> = grad.values.iter().zip(&numeric).map(|(a, b)| a - b).collect();
    norm(&diff) / norm(&grad.values).max(norm(&numeric)).max(1e-12)
}
