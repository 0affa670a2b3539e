use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{ExperimentSpec, Method};
use crate::corpus::TaskKind;
use crate::error::{Error, Result};
use crate::metrics::{MetricKind, TrialSummary};
use crate::shots::ShotStrategy;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub name: String,
    pub config_digest: String,
    pub dataset_digest: String,
    pub task: TaskKind,
    pub metric: MetricKind,
    /// Factor applied to every stored metric value.
    pub scale: f64,
    pub seed: u64,
    pub trial_seeds: Vec<u64>,
    pub shot_strategy: ShotStrategy,
    pub da_size: usize,
    pub created_unix: u64,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportCell {
    pub rule: String,
    pub summary: TrialSummary<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub method: String,
    pub cells: Vec<ReportCell>,
    /// Summary over trials of the mean across held rules; trials where any
    /// rule failed are left out.
    pub overall: Option<TrialSummary<f64>>,
}

impl ReportRow {
    pub fn cell(&self, rule: &str) -> Option<&TrialSummary<f64>> {
        self.cells.iter().find(|c| c.rule == rule).map(|c| &c.summary)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialFailure {
    pub method: String,
    pub rule: String,
    pub trial: usize,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub metadata: ReportMetadata,
    pub rules: Vec<String>,
    pub rows: Vec<ReportRow>,
    pub failures: Vec<TrialFailure>,
}

impl EvalReport {
    pub fn row(&self, method: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.method == method)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportFormat {
    Markdown,
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::UnknownFormat(other.to_string())),
        }
    }
}

fn pm(s: &TrialSummary<f64>) -> String {
    format!("{:.1} ± {:.1}", s.mean, s.stderr)
}

fn csv_pair(s: Option<&TrialSummary<f64>>) -> String {
    match s {
        Some(s) => format!("{:.1},{:.1}", s.mean, s.stderr),
        None => ",".into(),
    }
}

fn metric_name(m: &ReportMetadata) -> &'static str {
    match m.metric {
        MetricKind::MacroF1 => "macro-F1",
        MetricKind::Auc => "AUC",
    }
}

fn markdown(report: &EvalReport) -> String {
    let m = &report.metadata;
    let mut out = String::new();
    let _ = writeln!(out, "# {}\n", m.name);
    let _ = writeln!(
        out,
        "{} (x{}) on each held-out rule, mean ± stderr over trials. Shots: {}, augmentation size: {}.\n",
        metric_name(m),
        m.scale,
        m.shot_strategy,
        m.da_size
    );
    let _ = writeln!(out, "| method | {} | mean |", report.rules.join(" | "));
    let _ = writeln!(out, "|---|{}---|", "---|".repeat(report.rules.len()));
    for row in &report.rows {
        let cells: Vec<String> =
            report.rules.iter().map(|r| row.cell(r).map(pm).unwrap_or_else(|| "-".into())).collect();
        let overall = row.overall.as_ref().map(pm).unwrap_or_else(|| "-".into());
        let _ = writeln!(out, "| {} | {} | {overall} |", row.method, cells.join(" | "));
    }
    let _ = writeln!(out, "\nconfig digest `{}`, dataset digest `{}`", m.config_digest, m.dataset_digest);
    if !report.failures.is_empty() {
        let _ = writeln!(out, "\n{} failed trials:", report.failures.len());
        for f in &report.failures {
            let _ = writeln!(out, "- {} on {}, trial {}: {}", f.method, f.rule, f.trial, f.error);
        }
    }
    for w in &m.warnings {
        let _ = writeln!(out, "\nwarning: {w}");
    }
    out
}

fn csv(report: &EvalReport) -> String {
    let mut out = String::from("method");
    for r in report.rules.iter().map(String::as_str).chain(["all"]) {
        let _ = write!(out, ",{r}_mean,{r}_stderr");
    }
    out.push('\n');
    for row in &report.rows {
        out.push_str(&row.method);
        for r in &report.rules {
            let _ = write!(out, ",{}", csv_pair(row.cell(r)));
        }
        let _ = writeln!(out, ",{}", csv_pair(row.overall.as_ref()));
    }
    out
}

pub fn emit_report(report: &EvalReport, format: ReportFormat) -> Result<String> {
    Ok(match format {
        ReportFormat::Markdown => markdown(report),
        ReportFormat::Csv => csv(report),
        ReportFormat::Json => serde_json::to_string_pretty(report)? + "\n",
    })
}

/// One augmentation-size sweep: a row per requested size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub name: String,
    pub config_digest: String,
    pub method: String,
    pub rules: Vec<String>,
    pub points: Vec<SweepPoint>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub requested: usize,
    pub used: usize,
    pub row: ReportRow,
}

impl SweepReport {
    pub(crate) fn from_runs(
        spec: &ExperimentSpec,
        method: Method,
        runs: Vec<(usize, usize, EvalReport)>,
        mut warnings: Vec<String>,
    ) -> Result<Self> {
        let mut rules = Vec::new();
        let mut points = Vec::new();
        for (requested, used, report) in runs {
            rules = report.rules.clone();
            warnings.extend(report.metadata.warnings.iter().cloned());
            let row = report.rows.into_iter().next().ok_or_else(|| Error::Empty("sweep run".into()))?;
            points.push(SweepPoint { requested, used, row });
        }
        Ok(SweepReport {
            name: spec.name.clone(),
            config_digest: spec.digest()?,
            method: method.to_string(),
            rules,
            points,
            warnings,
        })
    }

    /// Overall means in size order; `None` where every trial failed.
    pub fn means(&self) -> Vec<Option<f64>> {
        self.points.iter().map(|p| p.row.overall.as_ref().map(|s| s.mean)).collect()
    }
}

pub fn emit_sweep(sweep: &SweepReport, format: ReportFormat) -> Result<String> {
    Ok(match format {
        ReportFormat::Json => serde_json::to_string_pretty(sweep)? + "\n",
        ReportFormat::Markdown => {
            let mut out = format!("# {} augmentation-size sweep ({})\n\n", sweep.name, sweep.method);
            let _ = writeln!(out, "| size | {} | mean |", sweep.rules.join(" | "));
            let _ = writeln!(out, "|---|{}---|", "---|".repeat(sweep.rules.len()));
            for p in &sweep.points {
                let cells: Vec<String> =
                    sweep.rules.iter().map(|r| p.row.cell(r).map(pm).unwrap_or_else(|| "-".into())).collect();
                let overall = p.row.overall.as_ref().map(pm).unwrap_or_else(|| "-".into());
                let _ = writeln!(out, "| {} | {} | {overall} |", p.used, cells.join(" | "));
            }
            for w in &sweep.warnings {
                let _ = writeln!(out, "\nwarning: {w}");
            }
            out
        }
        ReportFormat::Csv => {
            let mut out = String::from("size");
            for r in sweep.rules.iter().map(String::as_str).chain(["all"]) {
                let _ = write!(out, ",{r}_mean,{r}_stderr");
            }
            out.push('\n');
            for p in &sweep.points {
                let _ = write!(out, "{}", p.used);
                for r in &sweep.rules {
                    let _ = write!(out, ",{}", csv_pair(p.row.cell(r)));
                }
                let _ = writeln!(out, ",{}", csv_pair(p.row.overall.as_ref()));
            }
            out
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn summary(values: &[f64]) -> TrialSummary<f64> {
        crate::metrics::summarize_trials(values).unwrap()
    }

    fn report() -> EvalReport {
        EvalReport {
            metadata: ReportMetadata {
                name: "t".into(),
                config_digest: "c".into(),
                dataset_digest: "d".into(),
                task: TaskKind::Likert5,
                metric: MetricKind::MacroF1,
                scale: 100.0,
                seed: 1,
                trial_seeds: vec![2, 3],
                shot_strategy: ShotStrategy::Random,
                da_size: 100,
                created_unix: 0,
                warnings: vec![],
            },
            rules: vec!["care".into(), "loyalty".into()],
            rows: vec![ReportRow {
                method: "pt+cosine".into(),
                cells: vec![ReportCell { rule: "care".into(), summary: summary(&[37.3, 39.5]) }],
                overall: Some(summary(&[38.4])),
            }],
            failures: vec![],
        }
    }

    #[test]
    fn csv_uses_paired_columns() {
        let text = emit_report(&report(), ReportFormat::Csv).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "method,care_mean,care_stderr,loyalty_mean,loyalty_stderr,all_mean,all_stderr");
        assert_eq!(lines[1], "pt+cosine,38.4,1.1,,,38.4,0.0");
    }

    #[test]
    fn markdown_and_json() {
        let md = emit_report(&report(), ReportFormat::Markdown).unwrap();
        assert!(md.contains("| pt+cosine | 38.4 ± 1.1 | - | 38.4 ± 0.0 |"));
        let json = emit_report(&report(), ReportFormat::Json).unwrap();
        assert_eq!(EvalReport::from_json(&json).unwrap(), report());
        assert!(matches!("xml".parse::<ReportFormat>(), Err(Error::UnknownFormat(_))));
        assert_eq!("md".parse::<ReportFormat>().unwrap(), ReportFormat::Markdown);
    }
}
