//! Sliced evaluation metrics: macro F1, rank-based ROC AUC, Pearson rule
//! correlations, and trial aggregation.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::corpus::{Dataset, RuleId, TaskKind};
use crate::error::{Error, Result};
use crate::num::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricKind {
    MacroF1,
    Auc,
}

impl MetricKind {
    pub fn for_task(task: TaskKind) -> Self {
        match task {
            TaskKind::Likert5 => MetricKind::MacroF1,
            TaskKind::BinaryPerRule => MetricKind::Auc,
        }
    }
}

/// A metric value on one rule's test slice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceScore<F> {
    pub rule: RuleId,
    pub metric: MetricKind,
    pub value: F,
    pub n: usize,
}

impl<F: Real> SliceScore<F> {
    pub fn new(rule: RuleId, metric: MetricKind, value: F, n: usize) -> Result<Self> {
        if !value.is_finite() || value < F::zero() || value > F::one() {
            return Err(Error::Config(format!("slice score {value} outside [0, 1]")));
        }
        Ok(SliceScore { rule, metric, value, n })
    }
}

/// Unweighted mean of per-class F1 over `class_count` classes. A class with no
/// support in either predictions or golds scores 0.
pub fn macro_f1<F: Real>(predictions: &[usize], golds: &[usize], class_count: usize) -> Result<F> {
    if predictions.len() != golds.len() {
        return Err(Error::LengthMismatch { left: predictions.len(), right: golds.len() });
    }
    if class_count == 0 {
        return Err(Error::Config("class_count must be positive".into()));
    }
    let mut tp = vec![0usize; class_count];
    let mut pred_count = vec![0usize; class_count];
    let mut gold_count = vec![0usize; class_count];
    for (&p, &g) in predictions.iter().zip(golds) {
        if p >= class_count || g >= class_count {
            return Err(Error::Config(format!("label {} out of range", p.max(g))));
        }
        pred_count[p] += 1;
        gold_count[g] += 1;
        if p == g {
            tp[p] += 1;
        }
    }
    let total: F = (0..class_count)
        .map(|c| {
            let denom = pred_count[c] + gold_count[c];
            if denom == 0 {
                F::zero()
            } else {
                F::of_usize(2 * tp[c]) / F::of_usize(denom)
            }
        })
        .sum();
    Ok(total / F::of_usize(class_count))
}

/// ROC AUC in Mann-Whitney form: the fraction of (positive, negative) pairs in
/// which the positive scores higher, ties counting one half. Uses midranks, so
/// it runs in O(n log n).
pub fn roc_auc<F: Real>(scores: &[F], labels: &[bool]) -> Result<F> {
    if scores.len() != labels.len() {
        return Err(Error::LengthMismatch { left: scores.len(), right: labels.len() });
    }
    let positives = labels.iter().filter(|&&l| l).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::UndefinedAuc);
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::Config("NaN score".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap_or(Ordering::Equal));

    // sum of (doubled) midranks of positives, kept integral to avoid rounding
    let mut doubled_rank_sum: u128 = 0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        // ranks i+1 ..= j share midrank (i+1+j)/2
        let doubled_mid = (i + 1 + j) as u128;
        let pos_in_group = order[i..j].iter().filter(|&&k| labels[k]).count() as u128;
        doubled_rank_sum += doubled_mid * pos_in_group;
        i = j;
    }
    let p = positives as u128;
    // 2U = 2 * sum(rank_pos) - p(p+1)
    let doubled_u = doubled_rank_sum - p * (p + 1);
    let pairs = (positives as u128) * (negatives as u128);
    Ok(F::of(doubled_u as f64) / F::of(2.0 * pairs as f64))
}

/// Square symmetric matrix labeled by rules.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuleMatrix<F> {
    pub rules: Vec<RuleId>,
    pub values: Vec<Vec<F>>,
}

impl<F: Real> RuleMatrix<F> {
    pub fn get(&self, a: &str, b: &str) -> Option<F> {
        let i = self.rules.iter().position(|r| r.as_str() == a)?;
        let j = self.rules.iter().position(|r| r.as_str() == b)?;
        Some(self.values[i][j])
    }

    /// CSV with a header row of rule names and one labeled row per rule.
    pub fn to_csv(&self, decimals: usize) -> String {
        let mut out = String::from("rule");
        for r in &self.rules {
            out.push(',');
            out.push_str(r.as_str());
        }
        out.push('\n');
        for (r, row) in self.rules.iter().zip(&self.values) {
            out.push_str(r.as_str());
            for v in row {
                out.push_str(&format!(",{:.*}", decimals, v.as_f64()));
            }
            out.push('\n');
        }
        out
    }
}

/// Pearson correlation between two columns.
pub fn pearson<F: Real>(x: &[F], y: &[F]) -> Result<F> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { left: x.len(), right: y.len() });
    }
    if x.is_empty() {
        return Err(Error::Empty("pearson input".into()));
    }
    let n = F::of_usize(x.len());
    let mx = x.iter().copied().sum::<F>() / n;
    let my = y.iter().copied().sum::<F>() / n;
    let (mut sxy, mut sxx, mut syy) = (F::zero(), F::zero(), F::zero());
    for (&a, &b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy = sxy + da * db;
        sxx = sxx + da * da;
        syy = syy + db * db;
    }
    if sxx == F::zero() || syy == F::zero() {
        return Err(Error::ZeroVariance("column".into()));
    }
    Ok(sxy / (sxx.sqrt() * syy.sqrt()))
}

/// Pairwise Pearson r over the binary label columns of a per-rule dataset.
pub fn pearson_matrix<F: Real>(dataset: &Dataset, rules: &[RuleId]) -> Result<RuleMatrix<F>> {
    if dataset.task_kind() != TaskKind::BinaryPerRule {
        return Err(Error::Config("pearson_matrix needs a binary-per-rule dataset".into()));
    }
    let mut columns = Vec::with_capacity(rules.len());
    for rule in rules {
        let col: Vec<F> = dataset
            .examples
            .iter()
            .map(|ex| ex.binary(rule).map(|b| if b { F::one() } else { F::zero() }))
            .collect::<Option<_>>()
            .ok_or_else(|| Error::UnknownRule(rule.to_string()))?;
        let first = col[0];
        if col.iter().all(|&v| v == first) {
            return Err(Error::ZeroVariance(rule.to_string()));
        }
        columns.push(col);
    }
    let k = rules.len();
    let mut values = vec![vec![F::one(); k]; k];
    for i in 0..k {
        for j in (i + 1)..k {
            let r = pearson(&columns[i], &columns[j])?;
            values[i][j] = r;
            values[j][i] = r;
        }
    }
    Ok(RuleMatrix { rules: rules.to_vec(), values })
}

/// Mean and standard error of a metric over trials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary<F> {
    pub mean: F,
    pub stderr: F,
    pub values: Vec<F>,
    pub trials: usize,
}

/// `stderr = s / sqrt(n)` with the sample (n - 1) deviation; 0 for one value.
pub fn summarize_trials<F: Real>(values: &[F]) -> Result<TrialSummary<F>> {
    if values.is_empty() {
        return Err(Error::Empty("trial values".into()));
    }
    let n = values.len();
    let mean = values.iter().copied().sum::<F>() / F::of_usize(n);
    let stderr = if n == 1 {
        F::zero()
    } else {
        let ss: F = values.iter().map(|&v| (v - mean) * (v - mean)).sum();
        (ss / F::of_usize(n - 1)).sqrt() / F::of_usize(n).sqrt()
    };
    Ok(TrialSummary { mean, stderr, values: values.to_vec(), trials: n })
}
