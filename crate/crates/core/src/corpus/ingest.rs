use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{count_tags, Dataset, Example, ExampleId, Label, Likert, RuleId, SourceSchema, TaskKind};
use crate::error::{Error, Result};
use crate::rng;

/// Moral-foundation rules as `(id, accepted spellings)`, in manifest order.
pub const SOCIAL_CHEMISTRY_RULES: [(&str, &[&str]); 5] = [
    ("care", &["care", "care-harm", "care/harm", "harm"]),
    ("fairness", &["fairness", "fairness-cheating", "fairness/cheating", "cheating"]),
    ("loyalty", &["loyalty", "loyalty-betrayal", "loyalty/betrayal", "betrayal"]),
    ("authority", &["authority", "authority-subversion", "authority/subversion", "subversion"]),
    ("sanctity", &["sanctity", "sanctity-degradation", "sanctity/degradation", "degradation"]),
];

/// Toxicity rules as `(id, label column)`. `severe_toxic` is deliberately absent.
pub const TOXICITY_RULES: [(&str, &str); 5] = [
    ("toxic", "toxic"),
    ("obscene", "obscene"),
    ("threat", "threat"),
    ("insult", "insult"),
    ("hate", "identity_hate"),
];

const SC_SITUATION: &str = "situation";
const SC_ACTION: &str = "action";
const SC_FOUNDATIONS: &str = "rot-moral-foundations";
const SC_JUDGMENT: &str = "action-moral-judgment";
const TOX_TEXT: &str = "comment_text";

fn read_source(path: &Path) -> Result<(Vec<u8>, String)> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.iter().all(u8::is_ascii_whitespace) {
        return Err(Error::Ingestion(format!("{} is empty", path.display())));
    }
    let digest = rng::digest_hex(&bytes);
    Ok((bytes, digest))
}

fn row_id(digest: &str, row: usize) -> ExampleId {
    let mut key = digest.as_bytes().to_vec();
    key.extend_from_slice(&(row as u64).to_le_bytes());
    ExampleId(rng::digest_hex(&key)[..16].to_string())
}

fn column(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| Error::MissingColumn { column: name.to_string() })
}

fn parse_foundation(raw: &str) -> Option<RuleId> {
    let norm = raw.trim().to_ascii_lowercase().replace(' ', "");
    SOCIAL_CHEMISTRY_RULES
        .iter()
        .find(|(_, spellings)| spellings.contains(&norm.as_str()))
        .map(|(id, _)| RuleId(id.to_string()))
}

/// Reads the moral-judgment corpus (tab-separated with a header row).
///
/// Rows with no moral foundation or no judgment are skipped and counted in
/// `manifest.skipped_rows`; they carry no rule to slice on. An unrecognized
/// foundation or judgment is a record error. After ingestion each rule is capped
/// at `per_rule_cap` examples by a seeded shuffle followed by a greedy pass that
/// admits an example only while every one of its rules is under the cap.
pub fn ingest_social_chemistry(path: &Path, per_rule_cap: usize, seed: u64) -> Result<Dataset> {
    let (bytes, digest) = read_source(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .quoting(false)
        .flexible(true)
        .from_reader(bytes.as_slice());
    let headers = reader.headers()?.clone();
    let situation = column(&headers, SC_SITUATION)?;
    let action = column(&headers, SC_ACTION)?;
    let foundations = column(&headers, SC_FOUNDATIONS)?;
    let judgment = column(&headers, SC_JUDGMENT)?;

    let rules: Vec<RuleId> =
        SOCIAL_CHEMISTRY_RULES.iter().map(|(id, _)| RuleId(id.to_string())).collect();
    let mut examples = Vec::new();
    let mut skipped = 0;
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let field = |i: usize| record.get(i).unwrap_or("").trim();
        let raw_rules = field(foundations);
        let raw_judgment = field(judgment);
        if raw_rules.is_empty() || raw_judgment.is_empty() {
            skipped += 1;
            continue;
        }
        let mut tags = BTreeSet::new();
        for part in raw_rules.split(['|', ',']).filter(|p| !p.trim().is_empty()) {
            let rule = parse_foundation(part).ok_or_else(|| Error::Record {
                row,
                message: format!("unknown rule tag `{}`", part.trim()),
            })?;
            tags.insert(rule);
        }
        let level: Likert = raw_judgment
            .parse()
            .map_err(|message| Error::Record { row, message })?;
        let focus = field(action);
        if focus.is_empty() {
            return Err(Error::Record { row, message: "empty action".into() });
        }
        let context = Some(field(situation).to_string()).filter(|s| !s.is_empty());
        examples.push(Example {
            id: row_id(&digest, row),
            context,
            focus: focus.to_string(),
            rule_tags: tags,
            label: Label::Likert(level),
        });
    }
    if examples.is_empty() {
        return Err(Error::Ingestion(format!("{} has no usable rows", path.display())));
    }
    let raw_counts = count_tags(&rules, &examples);
    let capped = cap_per_rule(examples, per_rule_cap, seed);
    let mut dataset = Dataset::new(
        TaskKind::Likert5,
        rules,
        SourceSchema::SocialChemistry,
        capped,
        digest,
        Some(raw_counts),
    )?;
    dataset.manifest.skipped_rows = skipped;
    Ok(dataset)
}

/// Seeded greedy cap: every rule ends with at most `cap` examples. Original
/// order is preserved among the survivors.
pub(crate) fn cap_per_rule(examples: Vec<Example>, cap: usize, seed: u64) -> Vec<Example> {
    let mut order: Vec<usize> = (0..examples.len()).collect();
    order.shuffle(&mut rng::seeded(rng::derive_seed(seed, &["cap-per-rule"])));
    let mut counts: BTreeMap<&RuleId, usize> = BTreeMap::new();
    let mut keep = vec![false; examples.len()];
    for i in order {
        let ex = &examples[i];
        if ex.rule_tags.iter().all(|r| counts.get(r).copied().unwrap_or(0) < cap) {
            for r in &ex.rule_tags {
                *counts.entry(r).or_default() += 1;
            }
            keep[i] = true;
        }
    }
    examples
        .into_iter()
        .zip(keep)
        .filter_map(|(ex, k)| k.then_some(ex))
        .collect()
}

/// Reads the toxic-comment corpus (comma-separated, quoted fields, embedded
/// newlines). The `severe_toxic` column, if present, is ignored.
pub fn ingest_toxicity(path: &Path) -> Result<Dataset> {
    let (bytes, digest) = read_source(path)?;
    let mut reader = csv::ReaderBuilder::new().from_reader(bytes.as_slice());
    let headers = reader.headers()?.clone();
    let text = column(&headers, TOX_TEXT)?;
    let label_columns: Vec<(RuleId, usize)> = TOXICITY_RULES
        .iter()
        .map(|(id, col)| Ok((RuleId(id.to_string()), column(&headers, col)?)))
        .collect::<Result<_>>()?;

    let mut examples = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let comment = record.get(text).unwrap_or("").trim();
        if comment.is_empty() {
            return Err(Error::Record { row, message: "empty comment".into() });
        }
        let mut labels = BTreeMap::new();
        for (rule, col) in &label_columns {
            let value = match record.get(*col).map(str::trim) {
                Some("1") => true,
                Some("0") => false,
                other => {
                    return Err(Error::Record {
                        row,
                        message: format!(
                            "non-binary value `{}` for rule `{rule}`",
                            other.unwrap_or("")
                        ),
                    })
                }
            };
            labels.insert(rule.clone(), value);
        }
        let tags = labels.iter().filter(|(_, &v)| v).map(|(r, _)| r.clone()).collect();
        examples.push(Example {
            id: row_id(&digest, row),
            context: None,
            focus: comment.to_string(),
            rule_tags: tags,
            label: Label::Binary(labels),
        });
    }
    if examples.is_empty() {
        return Err(Error::Ingestion(format!("{} has no rows", path.display())));
    }
    let rules = label_columns.into_iter().map(|(r, _)| r).collect();
    Dataset::new(TaskKind::BinaryPerRule, rules, SourceSchema::JigsawToxicity, examples, digest, None)
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonlHeader {
    manifest: JsonlManifest,
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonlManifest {
    task_kind: TaskKind,
    rules: Vec<RuleId>,
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonlRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    context: Option<String>,
    focus: String,
    #[serde(default)]
    rules: Vec<String>,
    label: JsonlLabel,
}

/// Likert labels are level names or integers 0..=4 (very-bad = 0); binary
/// labels are an object of rule -> bool/0/1.
#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum JsonlLabel {
    Index(u64),
    Level(String),
    PerRule(BTreeMap<String, serde_json::Value>),
}

/// Reads the generic one-object-per-line format.
///
/// An optional first line `{"manifest": {"task_kind": ..., "rules": [...]}}`
/// declares the rule set; otherwise rules are collected in order of first
/// appearance and the task kind follows the first label. Records with an `id`
/// keep it; others get a row-derived id like the other adapters.
pub fn ingest_jsonl(path: &Path) -> Result<Dataset> {
    let (bytes, digest) = read_source(path)?;
    let text = std::str::from_utf8(&bytes)
        .map_err(|e| Error::Ingestion(format!("{} is not UTF-8: {e}", path.display())))?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty()).peekable();

    let mut declared: Option<JsonlManifest> = None;
    if let Some(first) = lines.peek() {
        if let Ok(header) = serde_json::from_str::<JsonlHeader>(first) {
            declared = Some(header.manifest);
            lines.next();
        }
    }

    let mut rules: Vec<RuleId> = declared.as_ref().map(|m| m.rules.clone()).unwrap_or_default();
    let mut task: Option<TaskKind> = declared.as_ref().map(|m| m.task_kind);
    let mut examples = Vec::new();
    for (row, line) in lines.enumerate() {
        let record: JsonlRecord = serde_json::from_str(line)
            .map_err(|e| Error::Record { row, message: e.to_string() })?;
        let (label, tags) = match record.label {
            JsonlLabel::Index(i) => {
                let level = Likert::from_index(i as usize).ok_or_else(|| Error::Record {
                    row,
                    message: format!("Likert index {i} out of range"),
                })?;
                (Label::Likert(level), parse_tags(&record.rules, row)?)
            }
            JsonlLabel::Level(s) => {
                let level: Likert = s.parse().map_err(|message| Error::Record { row, message })?;
                (Label::Likert(level), parse_tags(&record.rules, row)?)
            }
            JsonlLabel::PerRule(map) => {
                let mut labels = BTreeMap::new();
                for (k, v) in map {
                    let positive = match v {
                        serde_json::Value::Bool(b) => b,
                        serde_json::Value::Number(n) if n.as_u64() == Some(1) => true,
                        serde_json::Value::Number(n) if n.as_u64() == Some(0) => false,
                        other => {
                            return Err(Error::Record {
                                row,
                                message: format!("non-binary value `{other}` for rule `{k}`"),
                            })
                        }
                    };
                    labels.insert(RuleId::new(k)?, positive);
                }
                let tags = labels.iter().filter(|(_, &v)| v).map(|(r, _)| r.clone()).collect();
                (Label::Binary(labels), tags)
            }
        };
        let kind = match label {
            Label::Likert(_) => TaskKind::Likert5,
            Label::Binary(_) => TaskKind::BinaryPerRule,
        };
        match task {
            None => task = Some(kind),
            Some(t) if t != kind => {
                return Err(Error::Record { row, message: format!("label kind differs from {t}") })
            }
            _ => {}
        }
        if declared.is_none() {
            let mentioned: Vec<RuleId> = match &label {
                Label::Binary(map) => map.keys().cloned().collect(),
                Label::Likert(_) => tags.iter().cloned().collect(),
            };
            for r in mentioned {
                if !rules.contains(&r) {
                    rules.push(r);
                }
            }
        }
        examples.push(Example {
            id: record.id.map(ExampleId).unwrap_or_else(|| row_id(&digest, row)),
            context: record.context.filter(|c| !c.trim().is_empty()),
            focus: record.focus,
            rule_tags: tags,
            label,
        });
    }
    let task = task.ok_or_else(|| Error::Ingestion(format!("{} has no records", path.display())))?;
    Dataset::new(task, rules, SourceSchema::GenericJsonl, examples, digest, None)
}

fn parse_tags(raw: &[String], row: usize) -> Result<BTreeSet<RuleId>> {
    raw.iter()
        .map(|r| RuleId::new(r.as_str()).map_err(|_| Error::Record { row, message: "empty rule tag".into() }))
        .collect()
}

/// Writes a dataset in the generic line format, header included, so that
/// `ingest_jsonl` reproduces the same examples, ids, and rule order.
pub fn write_jsonl(dataset: &Dataset, path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    let header = JsonlHeader {
        manifest: JsonlManifest {
            task_kind: dataset.task_kind(),
            rules: dataset.rules().to_vec(),
        },
    };
    let mut emit = |value: String| writeln!(out, "{value}").map_err(|e| Error::io(path, e));
    emit(serde_json::to_string(&header)?)?;
    for ex in &dataset.examples {
        let label = match &ex.label {
            Label::Likert(l) => JsonlLabel::Level(l.as_str().to_string()),
            Label::Binary(map) => JsonlLabel::PerRule(
                map.iter()
                    .map(|(r, &v)| (r.to_string(), serde_json::Value::Bool(v)))
                    .collect(),
            ),
        };
        let record = JsonlRecord {
            id: Some(ex.id.0.clone()),
            context: ex.context.clone(),
            focus: ex.focus.clone(),
            rules: ex.rule_tags.iter().map(|r| r.to_string()).collect(),
            label,
        };
        emit(serde_json::to_string(&record)?)?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}
