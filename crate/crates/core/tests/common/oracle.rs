//! Brute-force reference implementations written without the library's
//! similarity code.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ruleshift::augment::{AugmentationPlan, ShotSet};
use ruleshift::corpus::{Example, HoldoutSplit};
use ruleshift::textsim::{EmbeddingProvider, EmbeddingVector, PrecomputedFileProvider, Stopwords};

pub type Bag = HashMap<String, f64>;

pub fn bag(text: &str, stop: &Stopwords) -> Bag {
    let mut out = Bag::new();
    let lower = text.to_lowercase();
    for word in lower.split(|c: char| !c.is_alphanumeric()) {
        if !word.is_empty() && !stop.contains(word) {
            *out.entry(word.to_string()).or_insert(0.0) += 1.0;
        }
    }
    out
}

pub fn sparse_cosine(a: &Bag, b: &Bag) -> f64 {
    let dot: f64 = a.iter().map(|(t, x)| x * b.get(t).copied().unwrap_or(0.0)).sum();
    let na = a.values().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.values().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

pub fn dense_cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

pub fn max(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Full sort by descending score, ascending id.
pub fn ranked(scores: &HashMap<String, f64>) -> Vec<(String, f64)> {
    let mut all: Vec<(String, f64)> = scores.iter().map(|(i, s)| (i.clone(), *s)).collect();
    all.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    all
}

/// Asserts that `got` is a valid top-`k` of `scores`: right length, every
/// score equal to the oracle's within `tol`, the i-th score equal to the
/// oracle's i-th best, nothing left out that beats the last kept entry, and
/// exact ties in ascending id order.
pub fn assert_topk(got: &[(String, f64)], scores: &HashMap<String, f64>, k: usize, tol: f64) {
    let oracle = ranked(scores);
    assert_eq!(got.len(), k.min(oracle.len()), "result length");
    for (i, (id, s)) in got.iter().enumerate() {
        let expected = scores.get(id).unwrap_or_else(|| panic!("unknown id {id}"));
        assert!((s - expected).abs() <= tol, "{id}: {s} vs oracle {expected}");
        assert!((s - oracle[i].1).abs() <= tol, "rank {i}: {s} vs oracle {}", oracle[i].1);
    }
    if let Some((_, last)) = got.last() {
        let kept: std::collections::HashSet<&String> = got.iter().map(|(i, _)| i).collect();
        for (id, s) in &oracle {
            if !kept.contains(id) {
                assert!(*s <= last + tol, "{id} with {s} beats the last kept score {last}");
            }
        }
    }
    for pair in got.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let (sa, sb) = (scores[&a.0], scores[&b.0]);
        if sa == sb {
            assert!(a.0 < b.0, "exact tie out of id order: {} then {}", a.0, b.0);
        }
    }
}

/// Probability that a random positive outranks a random negative, ties half.
pub fn pairwise_auc(scores: &[f64], labels: &[bool]) -> f64 {
    let (mut wins, mut pairs) = (0.0, 0.0);
    for (i, &li) in labels.iter().enumerate() {
        for (j, &lj) in labels.iter().enumerate() {
            if li && !lj {
                pairs += 1.0;
                if scores[i] > scores[j] {
                    wins += 1.0;
                } else if scores[i] == scores[j] {
                    wins += 0.5;
                }
            }
        }
    }
    wins / pairs
}

/// Macro F1 from a full confusion matrix.
pub fn confusion_f1(predictions: &[usize], golds: &[usize], classes: usize) -> f64 {
    let mut m = vec![vec![0usize; classes]; classes];
    for (&p, &g) in predictions.iter().zip(golds) {
        m[g][p] += 1;
    }
    let per_class: Vec<f64> = (0..classes)
        .map(|c| {
            let tp = m[c][c] as f64;
            let fp = (0..classes).filter(|&g| g != c).map(|g| m[g][c]).sum::<usize>() as f64;
            let fn_ = (0..classes).filter(|&p| p != c).map(|p| m[c][p]).sum::<usize>() as f64;
            if tp == 0.0 {
                0.0
            } else {
                let precision = tp / (tp + fp);
                let recall = tp / (tp + fn_);
                2.0 * precision * recall / (precision + recall)
            }
        })
        .collect();
    per_class.iter().sum::<f64>() / classes as f64
}

/// Every size-`k` subset of `0..n`.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

pub fn pair_sum(d: &[Vec<f64>], subset: &[usize]) -> f64 {
    let mut total = 0.0;
    for (a, &i) in subset.iter().enumerate() {
        for &j in &subset[a + 1..] {
            total += d[i][j];
        }
    }
    total
}

/// Alternates between Euclidean distances of random points and arbitrary
/// symmetric nonnegative matrices.
pub fn random_distances(rng: &mut ChaCha8Rng, n: usize, metric: bool) -> Vec<Vec<f64>> {
    let mut d = vec![vec![0.0; n]; n];
    let points: Vec<[f64; 3]> = (0..n).map(|_| [rng.random(), rng.random(), rng.random()]).collect();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = if metric {
                points[i].iter().zip(&points[j]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
            } else {
                rng.random_range(0.0..10.0)
            };
            d[i][j] = v;
            d[j][i] = v;
        }
    }
    d
}

pub fn plan_pairs(plan: &AugmentationPlan) -> Vec<(String, f64)> {
    plan.selected.iter().map(|e| (e.id.0.clone(), e.score.unwrap())).collect()
}

pub fn context_or_focus(e: &Example) -> String {
    match e.context.as_deref() {
        Some(c) if !c.trim().is_empty() => c.to_string(),
        _ => e.focus.clone(),
    }
}

/// Per-shot cosines between `candidate` texts of the base set and `query` texts of the shots.
pub fn per_shot(
    split: &HoldoutSplit,
    shots: &ShotSet,
    candidate: impl Fn(&Example) -> String,
    query: impl Fn(&Example) -> String,
) -> HashMap<String, Vec<f64>> {
    let stop = Stopwords::english();
    let q: Vec<Bag> = shots.shots.iter().map(|s| bag(&query(s), stop)).collect();
    split
        .base_train
        .iter()
        .map(|e| {
            let b = bag(&candidate(e), stop);
            (e.id.0.clone(), q.iter().map(|qb| sparse_cosine(&b, qb)).collect())
        })
        .collect()
}

pub fn aggregated(per: &HashMap<String, Vec<f64>>, f: fn(&[f64]) -> f64) -> HashMap<String, f64> {
    per.iter().map(|(id, v)| (id.clone(), f(v))).collect()
}

/// Every entry names a shot whose similarity equals the entry's best.
pub fn assert_matched_shots(plan: &AugmentationPlan, per: &HashMap<String, Vec<f64>>, shots: &ShotSet) {
    for entry in &plan.selected {
        let sims = &per[&entry.id.0];
        let matched = entry.matched_shot.as_ref().unwrap();
        let at = shots.shots.iter().position(|s| &s.id == matched).unwrap();
        assert!((sims[at] - max(sims)).abs() <= 1e-12, "{}", entry.id);
    }
}

/// Random dense vectors for every base example and shot.
pub fn dense_provider(split: &HoldoutSplit, dim: usize, seed: u64) -> (Arc<dyn EmbeddingProvider>, HashMap<String, Vec<f64>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut raw = HashMap::new();
    let mut vectors = HashMap::new();
    for e in split.base_train.iter().chain(&split.adaptation_pool) {
        let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        vectors.insert(e.id.clone(), EmbeddingVector::new(v.clone()).unwrap());
        raw.insert(e.id.0.clone(), v);
    }
    (Arc::new(PrecomputedFileProvider::from_vectors(dim, vectors).unwrap()), raw)
}

/// Two-stage oracle: the `pool` best by max cosine, then the `da` best of those by mean.
pub fn recross_oracle(
    raw: &HashMap<String, Vec<f64>>,
    split: &HoldoutSplit,
    shots: &ShotSet,
    pool: usize,
) -> HashMap<String, f64> {
    let per: HashMap<String, Vec<f64>> = split
        .base_train
        .iter()
        .map(|e| {
            let v = &raw[&e.id.0];
            (e.id.0.clone(), shots.shots.iter().map(|s| dense_cosine(v, &raw[&s.id.0])).collect())
        })
        .collect();
    let stage_one: BTreeSet<String> =
        ranked(&aggregated(&per, max)).into_iter().take(pool).map(|(id, _)| id).collect();
    aggregated(&per, mean).into_iter().filter(|(id, _)| stage_one.contains(id)).collect()
}
