//! Rule-sliced datasets: ingestion adapters, the example data model, and
//! leave-one-rule-out split construction.

mod ingest;
mod prompt;
mod split;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use ingest::{
    ingest_jsonl, ingest_social_chemistry, ingest_toxicity, write_jsonl, SOCIAL_CHEMISTRY_RULES,
    TOXICITY_RULES,
};
pub use prompt::{model_text, render_prompt};
pub use split::{is_test_example, make_holdout_split, HoldoutSplit};

/// Identifier of a safety rule, e.g. `care` or `toxic`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct RuleId(String);

impl RuleId {
    pub fn new(name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        let trimmed = name.trim();
        if trimmed.is_empty() {
            return Err(Error::UnknownRule(name));
        }
        Ok(RuleId(trimmed.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for RuleId {
    type Error = Error;
    fn try_from(value: String) -> Result<Self> {
        RuleId::new(value)
    }
}

impl From<RuleId> for String {
    fn from(value: RuleId) -> Self {
        value.0
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Stable example identifier. Ordering of ids is the global tie-break order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ExampleId(pub String);

impl ExampleId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ExampleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ExampleId {
    fn from(value: &str) -> Self {
        ExampleId(value.to_string())
    }
}

/// Five-level ordinal moral judgment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Likert {
    VeryBad = 0,
    Bad = 1,
    Ok = 2,
    Good = 3,
    VeryGood = 4,
}

impl Likert {
    pub const ALL: [Likert; 5] = [
        Likert::VeryBad,
        Likert::Bad,
        Likert::Ok,
        Likert::Good,
        Likert::VeryGood,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Likert> {
        Likert::ALL.get(index).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Likert::VeryBad => "very-bad",
            Likert::Bad => "bad",
            Likert::Ok => "ok",
            Likert::Good => "good",
            Likert::VeryGood => "very-good",
        }
    }
}

impl FromStr for Likert {
    type Err = String;

    /// Accepts the level names (`very-bad`, `very bad`, `very_bad`) and the
    /// signed integer scale `-2..=2` used by the moral-judgment corpus.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace(['_', ' '], "-");
        let level = match norm.as_str() {
            "very-bad" | "-2" | "-2.0" => Likert::VeryBad,
            "bad" | "-1" | "-1.0" => Likert::Bad,
            "ok" | "0" | "0.0" | "-0" => Likert::Ok,
            "good" | "1" | "1.0" | "+1" => Likert::Good,
            "very-good" | "2" | "2.0" | "+2" => Likert::VeryGood,
            _ => return Err(format!("not a Likert level: `{s}`")),
        };
        Ok(level)
    }
}

impl fmt::Display for Likert {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Label {
    Likert(Likert),
    /// Positivity for every rule in the manifest.
    Binary(BTreeMap<RuleId, bool>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Example {
    pub id: ExampleId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context: Option<String>,
    pub focus: String,
    pub rule_tags: BTreeSet<RuleId>,
    pub label: Label,
}

impl Example {
    pub fn has_rule(&self, rule: &RuleId) -> bool {
        self.rule_tags.contains(rule)
    }

    /// Context and focus joined by a space; the focus alone when there is no context.
    pub fn full_text(&self) -> String {
        match &self.context {
            Some(c) if !c.is_empty() => format!("{} {}", c, self.focus),
            _ => self.focus.clone(),
        }
    }

    pub fn likert(&self) -> Option<Likert> {
        match &self.label {
            Label::Likert(l) => Some(*l),
            Label::Binary(_) => None,
        }
    }

    pub fn binary(&self, rule: &RuleId) -> Option<bool> {
        match &self.label {
            Label::Binary(map) => map.get(rule).copied(),
            Label::Likert(_) => None,
        }
    }

    /// Class index of this example for the given task. Binary tasks need the
    /// rule being asked about; class 1 is the positive answer.
    pub fn class_index(&self, task: TaskKind, rule: Option<&RuleId>) -> Result<usize> {
        match (task, &self.label) {
            (TaskKind::Likert5, Label::Likert(l)) => Ok(l.index()),
            (TaskKind::BinaryPerRule, Label::Binary(map)) => {
                let rule = rule.ok_or_else(|| {
                    Error::Rendering(format!("binary label of `{}` needs a rule", self.id))
                })?;
                map.get(rule)
                    .map(|&pos| usize::from(pos))
                    .ok_or_else(|| Error::UnknownRule(rule.to_string()))
            }
            _ => Err(Error::Config(format!(
                "example `{}` label does not match task {task}",
                self.id
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskKind {
    #[serde(rename = "likert-5")]
    Likert5,
    BinaryPerRule,
}

impl TaskKind {
    pub fn class_count(self) -> usize {
        match self {
            TaskKind::Likert5 => 5,
            TaskKind::BinaryPerRule => 2,
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TaskKind::Likert5 => "likert-5",
            TaskKind::BinaryPerRule => "binary-per-rule",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourceSchema {
    SocialChemistry,
    JigsawToxicity,
    GenericJsonl,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub task_kind: TaskKind,
    pub rules: Vec<RuleId>,
    /// Examples per rule in the ingested data (positives for binary tasks).
    pub per_rule_counts: BTreeMap<RuleId, usize>,
    /// Per-rule counts before any capping.
    pub raw_per_rule_counts: BTreeMap<RuleId, usize>,
    pub source_schema: SourceSchema,
    /// SHA-256 of the source bytes (or of the generator parameters).
    pub digest: String,
    #[serde(default)]
    pub skipped_rows: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub manifest: DatasetManifest,
    pub examples: Vec<Example>,
}

impl Dataset {
    /// Validates the examples against the declared rules and builds the manifest.
    /// `raw_counts` defaults to the ingested counts.
    pub fn new(
        task_kind: TaskKind,
        rules: Vec<RuleId>,
        source_schema: SourceSchema,
        examples: Vec<Example>,
        digest: String,
        raw_counts: Option<BTreeMap<RuleId, usize>>,
    ) -> Result<Self> {
        if rules.len() < 2 {
            return Err(Error::Ingestion(format!(
                "a dataset needs at least 2 rules, got {}",
                rules.len()
            )));
        }
        let declared: BTreeSet<&RuleId> = rules.iter().collect();
        if declared.len() != rules.len() {
            return Err(Error::Ingestion("duplicate rule in manifest".into()));
        }
        let mut ids = BTreeSet::new();
        for (row, ex) in examples.iter().enumerate() {
            if !ids.insert(&ex.id) {
                return Err(Error::Record { row, message: format!("duplicate id `{}`", ex.id) });
            }
            if ex.focus.trim().is_empty() {
                return Err(Error::Record { row, message: "empty focus text".into() });
            }
            if let Some(unknown) = ex.rule_tags.iter().find(|r| !declared.contains(r)) {
                return Err(Error::Record { row, message: format!("unknown rule `{unknown}`") });
            }
            match (&ex.label, task_kind) {
                (Label::Likert(_), TaskKind::Likert5) => {
                    if ex.rule_tags.is_empty() {
                        return Err(Error::Record { row, message: "no rule tags".into() });
                    }
                }
                (Label::Binary(map), TaskKind::BinaryPerRule) => {
                    if let Some(missing) = rules.iter().find(|r| !map.contains_key(*r)) {
                        return Err(Error::Record {
                            row,
                            message: format!("no label for rule `{missing}`"),
                        });
                    }
                    let positives: BTreeSet<&RuleId> =
                        map.iter().filter(|(_, &v)| v).map(|(r, _)| r).collect();
                    if positives != ex.rule_tags.iter().collect() {
                        return Err(Error::Record {
                            row,
                            message: "rule tags must equal the positive labels".into(),
                        });
                    }
                }
                _ => {
                    return Err(Error::Record {
                        row,
                        message: format!("label kind does not match task {task_kind}"),
                    })
                }
            }
        }
        if examples.is_empty() {
            return Err(Error::Ingestion("no examples".into()));
        }
        let per_rule_counts = count_tags(&rules, &examples);
        let raw_per_rule_counts = raw_counts.unwrap_or_else(|| per_rule_counts.clone());
        Ok(Dataset {
            manifest: DatasetManifest {
                task_kind,
                rules,
                per_rule_counts,
                raw_per_rule_counts,
                source_schema,
                digest,
                skipped_rows: 0,
            },
            examples,
        })
    }

    pub fn task_kind(&self) -> TaskKind {
        self.manifest.task_kind
    }

    pub fn rules(&self) -> &[RuleId] {
        &self.manifest.rules
    }

    pub fn digest(&self) -> &str {
        &self.manifest.digest
    }

    /// Looks up a declared rule by name.
    pub fn rule(&self, name: &str) -> Result<&RuleId> {
        self.manifest
            .rules
            .iter()
            .find(|r| r.as_str() == name)
            .ok_or_else(|| Error::UnknownRule(name.to_string()))
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        let bytes = serde_json::to_vec(self)?;
        fs::write(path, bytes).map_err(|e| Error::io(path, e))
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_slice(&bytes)?)
    }
}

pub(crate) fn count_tags(rules: &[RuleId], examples: &[Example]) -> BTreeMap<RuleId, usize> {
    let mut counts: BTreeMap<RuleId, usize> = rules.iter().map(|r| (r.clone(), 0)).collect();
    for ex in examples {
        for tag in &ex.rule_tags {
            if let Some(c) = counts.get_mut(tag) {
                *c += 1;
            }
        }
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn likert_parses_names_and_signed_scale() {
        assert_eq!("very-bad".parse::<Likert>().unwrap(), Likert::VeryBad);
        assert_eq!("Very Good".parse::<Likert>().unwrap(), Likert::VeryGood);
        assert_eq!("-1".parse::<Likert>().unwrap(), Likert::Bad);
        assert_eq!("0".parse::<Likert>().unwrap(), Likert::Ok);
        assert_eq!("2".parse::<Likert>().unwrap(), Likert::VeryGood);
        assert!("3".parse::<Likert>().is_err());
        assert!("meh".parse::<Likert>().is_err());
        let names: Vec<_> = Likert::ALL.iter().map(|l| l.as_str()).collect();
        assert_eq!(names, ["very-bad", "bad", "ok", "good", "very-good"]);
        for (i, l) in Likert::ALL.iter().enumerate() {
            assert_eq!(l.index(), i);
        }
    }

    #[test]
    fn rule_ids_reject_empty_names() {
        assert!(RuleId::new("  ").is_err());
        assert_eq!(RuleId::new(" care ").unwrap().as_str(), "care");
        assert!(serde_json::from_str::<RuleId>("\"\"").is_err());
    }

    #[test]
    fn dataset_requires_two_rules_and_known_tags() {
        let care = RuleId::new("care").unwrap();
        let ex = Example {
            id: "a".into(),
            context: None,
            focus: "x".into(),
            rule_tags: [care.clone()].into(),
            label: Label::Likert(Likert::Ok),
        };
        let err = Dataset::new(
            TaskKind::Likert5,
            vec![care.clone()],
            SourceSchema::GenericJsonl,
            vec![ex.clone()],
            String::new(),
            None,
        );
        assert!(err.is_err());
        let other = RuleId::new("other").unwrap();
        let ok = Dataset::new(
            TaskKind::Likert5,
            vec![care.clone(), other.clone()],
            SourceSchema::GenericJsonl,
            vec![ex.clone()],
            String::new(),
            None,
        )
        .unwrap();
        assert_eq!(ok.manifest.per_rule_counts[&care], 1);
        assert_eq!(ok.manifest.per_rule_counts[&other], 0);

        let mut bad = ex;
        bad.rule_tags = [RuleId::new("ghost").unwrap()].into();
        let err = Dataset::new(
            TaskKind::Likert5,
            vec![care, other],
            SourceSchema::GenericJsonl,
            vec![bad],
            String::new(),
            None,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Record { row: 0, .. }));
    }
}
