use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures").join(name)
}

fn ruleshift(args: &[&str]) -> Output {
    let output = Command::new(env!("CARGO_BIN_EXE_ruleshift")).args(args).output().expect("binary runs");
    assert!(
        output.status.success(),
        "ruleshift {args:?} failed:\n{}",
        String::from_utf8_lossy(&output.stderr)
    );
    output
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).unwrap()
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_owned()
}

#[test]
fn pipeline_from_synthetic_corpus_to_reproduced_cell() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let (dataset, split, shots, plan) = (path(d, "data.json"), path(d, "split.json"), path(d, "shots.json"), path(d, "plan.json"));

    let out = stdout(&ruleshift(&["synth", "--out", &dataset, "--per-rule", "200", "--rules", "3"]));
    assert!(out.starts_with("600 examples over 3 rules"), "{out}");

    let out = stdout(&ruleshift(&["split", "--dataset", &dataset, "--held-rule", "rule-b", "--out", &split]));
    assert!(out.starts_with("held rule-b: base ") && out.contains(", pool "), "{out}");

    for strategy in ["random", "closest-target", "furthest-source"] {
        ruleshift(&["shots", "--split", &split, "--strategy", strategy, "--k", "5", "--out", &shots]);
    }
    ruleshift(&["shots", "--split", &split, "--out", &shots, "--seed", "3"]);
    let first = std::fs::read(&shots).unwrap();
    ruleshift(&["shots", "--split", &split, "--out", &shots, "--seed", "3"]);
    assert_eq!(first, std::fs::read(&shots).unwrap());

    for method in ["cosine", "recross", "cda", "random"] {
        let out = stdout(&ruleshift(&["augment", "--method", method, "--da-size", "30", "--shots", &shots, "--split", &split, "--out", &plan]));
        assert!(out.contains("plan with 30 examples"), "{method}: {out}");
    }
    let table = stdout(&ruleshift(&["augment", "--da-size", "30", "--shots", &shots, "--split", &split, "--out", &plan, "--inspect", "4"]));
    assert_eq!(table.lines().filter(|l| l.starts_with('|')).count(), 2 + 5 + 4, "{table}");

    let config = path(d, "spec.toml");
    std::fs::write(
        &config,
        "name = \"cli\"\nheld_rules = [\"rule-a\"]\nmethods = [\"base\", \"pt\", \"pt+cosine\"]\ntrials = 2\nda_size = 30\n\n\
         [dataset]\nkind = \"synthetic\"\nper_rule = 200\nrules = 3\n\n[train]\nbase_steps = 400\nadapt_steps = 30\n",
    )
    .unwrap();
    let report = path(d, "report.json");
    let md = stdout(&ruleshift(&["run", "--config", &config, "--out", &report]));
    assert!(md.contains("| method | rule-a | mean |"), "{md}");
    assert!(md.lines().any(|l| l.starts_with("| pt+cosine | ")));

    let csv = stdout(&ruleshift(&["report", "--input", &report, "--format", "csv"]));
    assert_eq!(csv.lines().next().unwrap(), "method,rule-a_mean,rule-a_stderr,all_mean,all_stderr");
    assert_eq!(csv.lines().count(), 4);

    let out = stdout(&ruleshift(&["reproduce", "--config", &config, "--report", &report, "--method", "pt+cosine", "--rule", "rule-a"]));
    assert!(out.starts_with("identical: pt+cosine on rule-a"), "{out}");

    let sweep = path(d, "sweep.json");
    let out = stdout(&ruleshift(&["sweep", "--config", &config, "--sizes", "0,10", "--out", &sweep, "--format", "csv"]));
    assert_eq!(out.lines().count(), 3, "{out}");
    assert!(!stdout(&ruleshift(&["report", "--input", &sweep])).is_empty());
}

#[test]
fn corr_prints_the_rule_matrix() {
    let out = stdout(&ruleshift(&["corr", "--dataset", fixture("pearson_8.csv").to_str().unwrap()]));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "rule,toxic,obscene,threat,insult,hate");
    assert!(lines[1].starts_with("toxic,1.00,0.26,"), "{out}");
    assert_eq!(lines.len(), 6);
}

#[test]
fn ingest_writes_a_dataset_the_other_commands_read() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "social.json");
    let msg = stdout(&ruleshift(&["ingest", "--schema", "socialchem", "--input", fixture("social_chem_10.tsv").to_str().unwrap(), "--out", &out]));
    assert!(msg.contains("examples over"), "{msg}");
    let matrix = path(dir.path(), "jigsaw.json");
    ruleshift(&["ingest", "--schema", "toxicity", "--input", fixture("jigsaw_6.csv").to_str().unwrap(), "--out", &matrix]);
    let split = path(dir.path(), "split.json");
    ruleshift(&["split", "--dataset", &matrix, "--held-rule", "threat", "--out", &split]);
}

#[test]
fn errors_exit_nonzero_with_a_message() {
    let output = Command::new(env!("CARGO_BIN_EXE_ruleshift"))
        .args(["split", "--dataset", "/nonexistent/data.json", "--held-rule", "x", "--out", "/tmp/never.json"])
        .output()
        .unwrap();
    assert!(!output.status.success());
    assert!(!output.stderr.is_empty());
    let unknown = Command::new(env!("CARGO_BIN_EXE_ruleshift"))
        .args(["ingest", "--schema", "socialchem", "--input", fixture("social_chem_unknown_rule.tsv").to_str().unwrap(), "--out", "/tmp/never.json"])
        .output()
        .unwrap();
    assert!(!unknown.status.success());
}
