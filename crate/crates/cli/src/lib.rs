//! Subcommands of the `nutrient-eval` binary.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error,
//! 3 backend error.

mod config;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use thiserror::Error;

use nutrient_eval::evaluation::{score_run, write_report, ParseMode, ScoreError, ScoreOptions};
use nutrient_eval::inference::{
    load_nutrient_table, now_timestamp, persist_run, run_inference, start_run, Backend, BackendKind, EchoTruthBackend,
    HttpChatBackend, InferenceError, RunError, RunMetadata, TableOracleBackend,
};
use nutrient_eval::prompt::{export_finetune_dataset, render_prompt, PromptBundle, PromptTemplate};
use nutrient_eval::recall::{
    load_cohort, load_ground_truth, partition_cohort, Cohort, CohortPartition, EligibilityReport, EVALUATED_DAY,
    MAX_ELIGIBLE_AGE, MIN_ELIGIBLE_AGE,
};
use nutrient_eval::NutrientVector;

pub use config::RunConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Backend(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 1,
            CliError::Data(_) => 2,
            CliError::Backend(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Config(m) | CliError::Data(m) | CliError::Backend(m) => m,
        }
    }
}

fn data<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Data(e.to_string())
}

fn write_out(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes()).map_err(data)
}

#[derive(Debug, Parser)]
#[command(name = "nutrient-eval", version, about = "Batch nutrient-estimation evaluation over 24-hour dietary recalls")]
pub struct Cli {
    /// Run configuration (flat TOML).
    #[arg(long, global = true, default_value = "nutrient-eval.toml")]
    pub config: PathBuf,
    /// Override the partition seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Reject replies with a trailing period.
    #[arg(long, global = true)]
    pub strict: bool,
    /// Slice the cohort in input order instead of shuffling.
    #[arg(long, global = true)]
    pub no_shuffle: bool,
    /// Score runs that did not finish.
    #[arg(long, global = true)]
    pub allow_partial: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load the cohort and report eligibility counts.
    Ingest,
    /// Partition the evaluable cohort and write partition.json.
    Split,
    /// Print one participant's rendered prompt.
    Prompt {
        #[arg(long)]
        participant: String,
    },
    /// Query the backend for every member of a subset and persist the run.
    Run {
        #[arg(long)]
        subset: usize,
        #[arg(long)]
        run_dir: Option<PathBuf>,
    },
    /// Score a persisted run and write the report next to it.
    Score {
        #[arg(long)]
        run_dir: PathBuf,
    },
    /// Write the fine-tuning JSONL for a subset.
    ExportFinetune {
        #[arg(long, default_value_t = 1)]
        subset: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parses `args` (including the program name) and runs the subcommand,
/// writing its report to `out`.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            return write_out(out, &e.to_string());
        }
        Err(e) => return Err(CliError::Usage(e.to_string().trim_end().to_owned())),
    };
    let mut config = RunConfig::load(&cli.config)?;
    if let Some(seed) = cli.seed {
        config.partition.seed = seed;
    }
    if cli.no_shuffle {
        config.partition.shuffle = false;
    }
    let ctx = Context { mode: if cli.strict { ParseMode::Strict } else { ParseMode::Tolerant }, allow_partial: cli.allow_partial, config };
    match cli.command {
        Command::Ingest => cmd_ingest(&ctx, out),
        Command::Split => cmd_split(&ctx, out),
        Command::Prompt { participant } => cmd_prompt(&ctx, &participant, out),
        Command::Run { subset, run_dir } => cmd_run(&ctx, subset, run_dir, out),
        Command::Score { run_dir } => cmd_score(&ctx, &run_dir, out),
        Command::ExportFinetune { subset, out: path } => cmd_export_finetune(&ctx, subset, path, out),
    }
}

struct Context {
    config: RunConfig,
    mode: ParseMode,
    allow_partial: bool,
}

impl Context {
    fn eligible_cohort(&self) -> Result<(Cohort, EligibilityReport), CliError> {
        let c = &self.config;
        let (cohort, _) = load_cohort(&c.participants, &c.recalls, &c.truth).map_err(data)?;
        Ok(cohort.filter_eligible())
    }

    fn template(&self) -> Result<PromptTemplate, CliError> {
        match &self.config.prompt_template {
            Some(path) => PromptTemplate::load(path, self.config.prompt_fidelity).map_err(|e| CliError::Config(e.to_string())),
            None => Ok(PromptTemplate::fixture(self.config.prompt_fidelity)),
        }
    }

    fn partition(&self) -> Result<CohortPartition, CliError> {
        let path = self.config.partition_file();
        let text = fs::read_to_string(&path)
            .map_err(|e| CliError::Data(format!("cannot read {} ({e}); run `split` first", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
    }

    fn subset(&self, partition: &CohortPartition, index: usize) -> Result<Vec<String>, CliError> {
        partition
            .subset(index)
            .map(<[String]>::to_vec)
            .ok_or_else(|| CliError::Usage(format!("subset {index} does not exist (1..={})", partition.subsets.len())))
    }
}

/// Sizes as runs of equal values, e.g. `1129 1128 ×9`.
pub fn format_sizes(sizes: &[usize]) -> String {
    let mut parts = Vec::new();
    let mut i = 0;
    while i < sizes.len() {
        let run = sizes[i..].iter().take_while(|&&s| s == sizes[i]).count();
        parts.push(if run == 1 { sizes[i].to_string() } else { format!("{} ×{run}", sizes[i]) });
        i += run;
    }
    parts.join(" ")
}

fn cmd_ingest(ctx: &Context, out: &mut dyn Write) -> Result<(), CliError> {
    let c = &ctx.config;
    let (cohort, summary) = load_cohort(&c.participants, &c.recalls, &c.truth).map_err(data)?;
    let (eligible, report) = cohort.filter_eligible();
    let evaluable = eligible.evaluable_ids(EVALUATED_DAY).len();
    let text = format!(
        "participants: {}\nrecalls: {} ({} items)\nground truth rows: {}\n\
         removed, age outside {MIN_ELIGIBLE_AGE}-{MAX_ELIGIBLE_AGE}: {}\nremoved, breastfeeding: {}\n\
         removed, unreliable recall: {}\n{} loaded, {} eligible\nevaluable ({} recall and ground truth): {}\n",
        summary.participants,
        summary.recalls,
        summary.recall_items,
        summary.truths,
        report.removed_age,
        report.removed_breastfeeding,
        report.removed_recall_quality,
        report.loaded,
        report.eligible,
        EVALUATED_DAY,
        evaluable,
    );
    write_out(out, &text)
}

fn cmd_split(ctx: &Context, out: &mut dyn Write) -> Result<(), CliError> {
    let (cohort, _) = ctx.eligible_cohort()?;
    let ids = cohort.evaluable_ids(EVALUATED_DAY);
    let partition = partition_cohort(&ids, &ctx.config.partition).map_err(data)?;
    let path = ctx.config.partition_file();
    fs::create_dir_all(&ctx.config.output_dir).map_err(|e| CliError::Data(format!("{}: {e}", ctx.config.output_dir.display())))?;
    let mut text = serde_json::to_string_pretty(&partition).expect("partition serializes");
    text.push('\n');
    fs::write(&path, text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    write_out(out, &format!("{}\nwrote {}\n", format_sizes(&partition.sizes()), path.display()))
}

fn bundle_for(cohort: &Cohort, template: &PromptTemplate, id: &str) -> Result<PromptBundle, CliError> {
    let recall = cohort
        .recall(id, EVALUATED_DAY)
        .ok_or_else(|| CliError::Data(format!("participant {id:?} has no {EVALUATED_DAY} recall")))?;
    let food = recall.food_string().map_err(|e| CliError::Data(format!("participant {id:?}: {e}")))?;
    render_prompt(template, id, &food).map_err(|e| CliError::Data(format!("participant {id:?}: {e}")))
}

fn cmd_prompt(ctx: &Context, participant: &str, out: &mut dyn Write) -> Result<(), CliError> {
    let (cohort, _) = ctx.eligible_cohort()?;
    let template = ctx.template()?;
    let bundle = bundle_for(&cohort, &template, participant)?;
    write_out(out, &format!("=== system ===\n{}\n=== user ===\n{}\n", bundle.system_message, bundle.user_message))
}

fn make_backend(ctx: &Context, truths: &BTreeMap<String, NutrientVector>) -> Result<Box<dyn Backend>, CliError> {
    let b = &ctx.config.backend;
    b.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(match b.kind {
        BackendKind::HttpChat => Box::new(HttpChatBackend::new(b).map_err(|e| CliError::Config(e.to_string()))?),
        BackendKind::TableOracle => {
            let path = ctx
                .config
                .nutrient_table
                .as_ref()
                .ok_or_else(|| CliError::Config("nutrient_table is required for the table_oracle backend".into()))?;
            Box::new(TableOracleBackend::new(load_nutrient_table(path).map_err(data)?))
        }
        BackendKind::EchoTruth => Box::new(EchoTruthBackend::new(truths.clone())),
    })
}

fn inference_error(e: InferenceError) -> CliError {
    match e {
        InferenceError::Config(m) => CliError::Config(m),
        InferenceError::Unreachable(m) => CliError::Backend(format!("backend unreachable: {m}")),
        e @ InferenceError::Log { .. } => CliError::Data(e.to_string()),
    }
}

fn cmd_run(ctx: &Context, subset: usize, run_dir: Option<PathBuf>, out: &mut dyn Write) -> Result<(), CliError> {
    let (cohort, _) = ctx.eligible_cohort()?;
    let partition = ctx.partition()?;
    let ids = ctx.subset(&partition, subset)?;
    let template = ctx.template()?;
    let bundles = ids.iter().map(|id| bundle_for(&cohort, &template, id)).collect::<Result<Vec<_>, _>>()?;
    let truths: BTreeMap<String, NutrientVector> =
        ids.iter().filter_map(|id| cohort.truth(id).map(|t| (id.clone(), *t))).collect();
    let backend = make_backend(ctx, &truths)?;
    backend.check_ready().map_err(inference_error)?;

    let dir = run_dir.unwrap_or_else(|| {
        ctx.config.output_dir.join("runs").join(format!("subset-{subset:02}-{}", ctx.config.backend.kind.as_str()))
    });
    let metadata = RunMetadata {
        config: ctx.config.to_json(),
        seed: partition.seed,
        subset_index: subset,
        prompt_checksum: template.checksum().to_owned(),
        prompt_fidelity: serde_json::to_value(template.fidelity())
            .ok()
            .and_then(|v| v.as_str().map(str::to_owned))
            .unwrap_or_default(),
        backend_id: backend.id(),
        expected_results: bundles.len(),
        started_at: now_timestamp(),
    };
    let run_error = |e: RunError| match e {
        RunError::Log(e) => inference_error(e),
        e => data(e),
    };
    let log = start_run(&dir, &metadata).map_err(run_error)?;
    let results = run_inference(&bundles, backend.as_ref(), &ctx.config.backend, Some(&log)).map_err(inference_error)?;
    drop(log);
    let manifest = persist_run(&dir, &results, &metadata).map_err(run_error)?;
    write_out(
        out,
        &format!(
            "{} results ({} backend failures) written to {}\n",
            manifest.result_count,
            manifest.failure_count,
            dir.display()
        ),
    )
}

fn cmd_score(ctx: &Context, run_dir: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    let truths: BTreeMap<String, NutrientVector> = load_ground_truth(&ctx.config.truth)
        .map_err(data)?
        .into_iter()
        .map(|t| (t.participant_id, t.values))
        .collect();
    let options = ScoreOptions { mode: ctx.mode, allow_partial: ctx.allow_partial };
    let (outcome, run) = score_run(run_dir, &truths, options).map_err(|e| match e {
        ScoreError::Run(RunError::NotARun(p)) => CliError::Usage(format!("{} is not a run directory", p.display())),
        e => data(e),
    })?;
    let files = write_report(run_dir, &outcome, ctx.mode).map_err(data)?;
    let mut text = nutrient_eval::evaluation::metrics_table(&outcome);
    if run.partial {
        text.push_str(&format!(
            "\nWARNING: partial run, {} of {} results\n",
            run.results.len(),
            run.manifest.metadata.expected_results
        ));
    }
    text.push_str(&format!("\nwrote {} and {} plots\n", files.metrics_json.display(), files.plots.len()));
    write_out(out, &text)
}

fn cmd_export_finetune(ctx: &Context, subset: usize, path: Option<PathBuf>, out: &mut dyn Write) -> Result<(), CliError> {
    let (cohort, _) = ctx.eligible_cohort()?;
    let partition = ctx.partition()?;
    let ids = ctx.subset(&partition, subset)?;
    let template = ctx.template()?;
    let path = path.unwrap_or_else(|| ctx.config.output_dir.join(format!("finetune_subset{subset}.jsonl")));
    let n = export_finetune_dataset(&cohort, &ids, &template, &path).map_err(data)?;
    write_out(out, &format!("wrote {n} examples to {}\n", path.display()))
}
