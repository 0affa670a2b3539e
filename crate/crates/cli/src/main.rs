use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use ruleshift::augment::{audit_plan, audit_shots, export_plan, AugmentConfig, AugmentMethod, Augmenter, ShotSet};
use ruleshift::corpus::{
    ingest_jsonl, ingest_social_chemistry, ingest_toxicity, make_holdout_split, Dataset, HoldoutSplit,
};
use ruleshift::metrics::pearson_matrix;
use ruleshift::model::{train_base, ClassifierBackend};
use ruleshift::runner::{
    emit_report, emit_sweep, reproduce_cell, run_experiment, sweep_da_size, synthetic, EvalReport, ExperimentSpec,
    Method, ProviderSpec, ReportFormat, SweepReport, SyntheticConfig, SWEEP_SIZES,
};
use ruleshift::shots::{select_shots, ShotConfig, ShotStrategy};
use ruleshift::Classifier;

#[derive(Parser)]
#[command(name = "ruleshift", version, about = "Few-shot rule generalization harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Read a raw corpus into the dataset JSON used by the other commands.
    Ingest(IngestArgs),
    /// Generate the seeded synthetic corpus.
    Synth(SynthArgs),
    /// Hold out one rule.
    Split(SplitArgs),
    /// Select the held rule's shots.
    Shots(ShotsArgs),
    /// Build an augmentation plan from the existing rules.
    Augment(AugmentArgs),
    /// Pearson correlations between the rules of a binary-label corpus.
    Corr(CorrArgs),
    /// Run an experiment grid.
    Run(RunArgs),
    /// Sweep the augmentation size for one method.
    Sweep(SweepArgs),
    /// Re-render a saved report.
    Report(ReportArgs),
    /// Recompute one report cell from its config and compare it bit for bit.
    Reproduce(ReproduceArgs),
    /// Save or inspect classifier states.
    #[command(subcommand)]
    Model(ModelCommand),
}

#[derive(Clone, Copy, ValueEnum)]
enum Schema {
    Socialchem,
    Toxicity,
    Jsonl,
}

#[derive(Args)]
struct IngestArgs {
    #[arg(long, value_enum)]
    schema: Schema,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Per-rule cap for the Social Chemistry schema.
    #[arg(long)]
    per_rule_cap: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    rules: Option<usize>,
    #[arg(long)]
    per_rule: Option<usize>,
    #[arg(long)]
    correlation: Option<f64>,
}

#[derive(Args)]
struct SplitArgs {
    /// Dataset JSON written by `ingest` or `synth`.
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    held_rule: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10_000)]
    base_cap: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ShotsArgs {
    #[arg(long)]
    split: PathBuf,
    #[arg(long, default_value = "random")]
    strategy: ShotStrategy,
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AugmentArgs {
    #[arg(long, default_value = "cosine")]
    method: AugmentMethod,
    #[arg(long, default_value_t = 100)]
    da_size: usize,
    #[arg(long)]
    shots: PathBuf,
    #[arg(long)]
    split: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// ReCross stage-one pool size.
    #[arg(long)]
    pool: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Print a markdown table of the shots and the top N selected examples.
    #[arg(long, value_name = "N")]
    inspect: Option<usize>,
}

#[derive(Args)]
struct CorrArgs {
    /// Raw Jigsaw CSV, generic JSONL, or dataset JSON.
    #[arg(long)]
    dataset: PathBuf,
    /// Defaults to standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    decimals: usize,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Where to write the JSON report.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "markdown")]
    format: ReportFormat,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long, default_value = "pt+cosine")]
    method: Method,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "markdown")]
    format: ReportFormat,
}

#[derive(Args)]
struct ReportArgs {
    /// JSON written by `run` or `sweep`.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "markdown")]
    format: ReportFormat,
}

#[derive(Args)]
struct ReproduceArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    report: PathBuf,
    #[arg(long)]
    method: String,
    #[arg(long)]
    rule: String,
}

#[derive(Subcommand)]
enum ModelCommand {
    /// Train the base classifier for one held rule and save it.
    Save {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        held_rule: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Load a saved classifier and optionally score texts.
    Load {
        #[arg(long)]
        model: PathBuf,
        #[arg(long = "text")]
        texts: Vec<String>,
    },
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn load_dataset_any(path: &Path) -> Result<Dataset> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("").to_ascii_lowercase();
    Ok(match ext.as_str() {
        "json" => Dataset::load_json(path)?,
        "jsonl" => ingest_jsonl(path)?,
        _ => ingest_toxicity(path)?,
    })
}

fn split_provider(split: &HoldoutSplit, seed: u64) -> Result<Arc<dyn ruleshift::textsim::EmbeddingProvider>> {
    Ok(ProviderSpec::default().build(split, seed)?)
}

fn ingest(args: IngestArgs) -> Result<()> {
    let dataset = match args.schema {
        Schema::Socialchem => {
            ingest_social_chemistry(&args.input, args.per_rule_cap.unwrap_or(usize::MAX), args.seed)?
        }
        Schema::Toxicity => ingest_toxicity(&args.input)?,
        Schema::Jsonl => ingest_jsonl(&args.input)?,
    };
    dataset.save_json(&args.out)?;
    println!("{} examples over {} rules -> {}", dataset.examples.len(), dataset.rules().len(), args.out.display());
    Ok(())
}

fn synth(args: SynthArgs) -> Result<()> {
    let defaults = SyntheticConfig::default();
    let config = SyntheticConfig {
        seed: args.seed,
        rules: args.rules.unwrap_or(defaults.rules),
        per_rule: args.per_rule.unwrap_or(defaults.per_rule),
        correlation: args.correlation.unwrap_or(defaults.correlation),
        ..defaults
    };
    let dataset = synthetic::generate(&config)?;
    dataset.save_json(&args.out)?;
    println!("{} examples over {} rules -> {}", dataset.examples.len(), dataset.rules().len(), args.out.display());
    Ok(())
}

fn split(args: SplitArgs) -> Result<()> {
    let dataset = Dataset::load_json(&args.dataset)?;
    let rule = dataset.rule(&args.held_rule)?.clone();
    let split = make_holdout_split(&dataset, &rule, args.base_cap, args.seed)?;
    split.save_json(&args.out)?;
    println!(
        "held {}: base {}, pool {}, test {}",
        split.held_rule,
        split.base_train.len(),
        split.adaptation_pool.len(),
        split.held_test_slice().len()
    );
    Ok(())
}

fn shots(args: ShotsArgs) -> Result<()> {
    let split = HoldoutSplit::load_json(&args.split)?;
    let provider = split_provider(&split, split.seed)?;
    let shots = select_shots(&split, args.strategy, args.k, args.seed, provider.as_ref(), &ShotConfig::default())?;
    audit_shots(&shots, &split)?;
    write_json(&args.out, &shots)?;
    println!("{} {} shots -> {}", shots.len(), shots.strategy, args.out.display());
    Ok(())
}

fn augment(args: AugmentArgs) -> Result<()> {
    let split = HoldoutSplit::load_json(&args.split)?;
    let shots: ShotSet = read_json(&args.shots)?;
    if shots.held_rule != split.held_rule {
        bail!("shots are for {} but the split holds out {}", shots.held_rule, split.held_rule);
    }
    let provider = match args.method {
        AugmentMethod::Recross => Some(split_provider(&split, split.seed)?),
        _ => None,
    };
    let augmenter = Augmenter::new(&split, args.method, AugmentConfig::default(), provider)?;
    let plan = augmenter.plan(&shots, args.da_size, args.pool, args.seed)?;
    audit_plan(&plan, &split)?;
    write_json(&args.out, &plan)?;
    info!("wrote {} selected examples", plan.len());
    if let Some(n) = args.inspect {
        print!("{}", export_plan(&plan, &split, n)?.to_markdown());
    } else {
        println!("{} plan with {} examples -> {}", plan.method.as_str(), plan.len(), args.out.display());
    }
    Ok(())
}

fn corr(args: CorrArgs) -> Result<()> {
    let start = Instant::now();
    let dataset = load_dataset_any(&args.dataset)?;
    let matrix = pearson_matrix::<f64>(&dataset, dataset.rules())?;
    let csv = matrix.to_csv(args.decimals);
    match &args.out {
        Some(path) => fs::write(path, &csv).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{csv}"),
    }
    eprintln!("{} examples in {:.2?}", dataset.examples.len(), start.elapsed());
    Ok(())
}

fn run(args: RunArgs) -> Result<()> {
    let spec = ExperimentSpec::load(&args.config)?;
    let report = run_experiment(&spec)?;
    if let Some(path) = &args.out {
        fs::write(path, emit_report(&report, ReportFormat::Json)?)?;
    }
    print!("{}", emit_report(&report, args.format)?);
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<()> {
    let spec = ExperimentSpec::load(&args.config)?;
    let sizes = args.sizes.unwrap_or_else(|| SWEEP_SIZES.to_vec());
    let sweep = sweep_da_size(&spec, args.method, &sizes)?;
    if let Some(path) = &args.out {
        fs::write(path, emit_sweep(&sweep, ReportFormat::Json)?)?;
    }
    print!("{}", emit_sweep(&sweep, args.format)?);
    Ok(())
}

fn report(args: ReportArgs) -> Result<()> {
    let text = fs::read_to_string(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    if let Ok(report) = EvalReport::from_json(&text) {
        print!("{}", emit_report(&report, args.format)?);
        return Ok(());
    }
    let sweep: SweepReport = serde_json::from_str(&text).context("input is neither a report nor a sweep")?;
    print!("{}", emit_sweep(&sweep, args.format)?);
    Ok(())
}

fn reproduce(args: ReproduceArgs) -> Result<()> {
    let spec = ExperimentSpec::load(&args.config)?;
    let report: EvalReport = EvalReport::from_json(&fs::read_to_string(&args.report)?)?;
    let recorded = report
        .row(&args.method)
        .and_then(|r| r.cell(&args.rule))
        .with_context(|| format!("no cell for {} on {}", args.method, args.rule))?
        .clone();
    let again = reproduce_cell(&spec, &report, &args.method, &args.rule)?;
    let same = again.values.iter().map(|v| v.to_bits()).eq(recorded.values.iter().map(|v| v.to_bits()));
    if !same {
        bail!("cell differs: recorded {:?}, recomputed {:?}", recorded.values, again.values);
    }
    println!("identical: {} on {} = {:?}", args.method, args.rule, again.values);
    Ok(())
}

fn model(cmd: ModelCommand) -> Result<()> {
    match cmd {
        ModelCommand::Save { config, held_rule, out } => {
            let spec = ExperimentSpec::load(&config)?;
            let dataset = spec.dataset.load(spec.seed)?;
            let rule = dataset.rule(&held_rule)?.clone();
            let split = make_holdout_split(&dataset, &rule, spec.base_cap, spec.seed)?;
            let state: Classifier = train_base(&split, &spec.base_config())?;
            state.save(&out)?;
            println!("{} -> {}", state.describe(), out.display());
        }
        ModelCommand::Load { model, texts } => {
            let state = Classifier::load(&model)?;
            println!("{}", state.describe());
            if !texts.is_empty() {
                for (text, probs) in texts.iter().zip(state.predict_texts(&texts)?) {
                    let shown: Vec<String> = probs.iter().map(|p| format!("{p:.4}")).collect();
                    println!("{}\t{}", shown.join(" "), text);
                }
            }
        }
    }
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Ingest(a) => ingest(a),
        Command::Synth(a) => synth(a),
        Command::Split(a) => split(a),
        Command::Shots(a) => shots(a),
        Command::Augment(a) => augment(a),
        Command::Corr(a) => corr(a),
        Command::Run(a) => run(a),
        Command::Sweep(a) => sweep(a),
        Command::Report(a) => report(a),
        Command::Reproduce(a) => reproduce(a),
        Command::Model(c) => model(c),
    }
}
